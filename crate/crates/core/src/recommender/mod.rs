//! Catalog filtering, size matching and pattern-based ranking.

mod catalog;
mod sizing;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{load_catalog, CatalogEntry, Category};
pub use sizing::{fit_distance, load_sizing, match_size, FieldWeights, GarmentClass, SizingRecord};

use crate::gim::{self, MinerConfig};
use crate::higen::{extract_higens, trend_of, Higen, HigenError, Relation};
use crate::taxonomy::{Item, Itemset, Taxonomy};
use crate::transactions::{PeriodSequence, SupportIndex};
use crate::vision::{BodyMeasurements, MeasurementField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecommendError {
    #[error("sizing line {line}: {message}")]
    Sizing { line: usize, message: String },
    #[error("catalog line {line}: {message}")]
    Catalog { line: usize, message: String },
    #[error("unknown garment class `{0}`")]
    UnknownClass(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("{class} sizing needs measurements: {}", fields.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(", "))]
    MissingMeasurements {
        class: GarmentClass,
        fields: Vec<MeasurementField>,
    },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
}

impl RecommendError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        RecommendError::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

fn default_top_k() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationRequest {
    #[serde(default)]
    pub measurements: BodyMeasurements,
    pub gender: String,
    #[serde(default)]
    pub profession: String,
    pub budget: f64,
    #[serde(default)]
    pub category: Option<Category>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

impl RecommendationRequest {
    pub fn validate(&self) -> Result<(), RecommendError> {
        if self.gender.trim().is_empty() {
            return Err(RecommendError::invalid("gender", "gender is required"));
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(RecommendError::invalid(
                "budget",
                format!("budget must be positive, got {}", self.budget),
            ));
        }
        if self.top_k == 0 {
            return Err(RecommendError::invalid("top_k", "top_k must be at least 1"));
        }
        self.measurements.validate().map_err(|e| match e {
            crate::vision::MeasureError::Negative { field, .. } => {
                RecommendError::invalid(&format!("measurements.{field}"), e.to_string())
            }
            other => RecommendError::invalid("measurements", other.to_string()),
        })
    }
}

/// HIGEN relation leading into the matched itemset, or `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Trend {
    Gen,
    Spec,
    Same,
    Lateral,
    None,
}

impl From<Option<Relation>> for Trend {
    fn from(r: Option<Relation>) -> Self {
        match r {
            Some(Relation::Gen) => Trend::Gen,
            Some(Relation::Spec) => Trend::Spec,
            Some(Relation::Same) => Trend::Same,
            Some(Relation::Lateral) => Trend::Lateral,
            None => Trend::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternScore {
    pub pattern_score: usize,
    pub matched_itemset: Itemset,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub entry: CatalogEntry,
    pub size: String,
    pub fit_distance: f64,
    pub pattern_score: usize,
    pub matched_itemset: Itemset,
    /// `matched_itemset` rendered in display order, e.g. `{T-shirt, 2500}`.
    pub matched_pattern: String,
    pub trend: Trend,
}

/// Attribute names used to turn a request into items, plus ranking knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecommendConfig {
    pub outfit_attribute: String,
    pub budget_attribute: String,
    pub profession_attribute: String,
    /// Use the best stocked size when the best size overall is unavailable.
    pub size_fallback: bool,
    pub weights: FieldWeights,
}

impl Default for RecommendConfig {
    fn default() -> Self {
        RecommendConfig {
            outfit_attribute: "Outfit".into(),
            budget_attribute: "Budget".into(),
            profession_attribute: "Profession".into(),
            size_fallback: false,
            weights: FieldWeights::default(),
        }
    }
}

/// Maps a numeric budget to a taxonomy value: the leaf with that exact
/// value, else the lowest-level node whose numeric leaves bracket it.
pub fn budget_item(tax: &Taxonomy, attribute: &str, budget: f64) -> Option<Item> {
    let leaves = tax.leaves(attribute).ok()?;
    let numeric: Vec<(&Item, f64)> = leaves
        .iter()
        .filter_map(|l| l.value.trim().parse::<f64>().ok().map(|v| (l, v)))
        .collect();
    if let Some((leaf, _)) = numeric.iter().find(|(_, v)| *v == budget) {
        return Some((*leaf).clone());
    }
    let mut best: Option<(u32, Item)> = None;
    for node in tax.values(attribute).ok()? {
        if !node.is_generalized {
            continue;
        }
        let covered: Vec<f64> = numeric
            .iter()
            .filter(|(leaf, _)| tax.is_descendant_or_self(leaf, &node).unwrap_or(false))
            .map(|&(_, v)| v)
            .collect();
        let (lo, hi) = covered.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if lo <= budget && budget <= hi {
            let level = tax.level(&node).unwrap_or(u32::MAX);
            if best.as_ref().is_none_or(|(l, b)| (level, &node) < (*l, b)) {
                best = Some((level, node));
            }
        }
    }
    best.map(|(_, item)| item)
}

/// Item for `value`, falling back to a plain leaf when the taxonomy has
/// never seen it (its support is then zero).
fn item_or_leaf(tax: &Taxonomy, attribute: &str, value: &str) -> Item {
    tax.item(attribute, value)
        .unwrap_or_else(|_| Item::leaf(attribute, value))
}

/// Mined history ready for scoring: the periods, their taxonomy, the
/// HIGENs across them and a support index over the latest period.
#[derive(Debug)]
pub struct PatternModel {
    pub periods: PeriodSequence,
    pub tax: Taxonomy,
    pub cfg: MinerConfig,
    pub higens: Vec<Higen>,
    latest: Option<SupportIndex>,
}

impl PatternModel {
    /// Mines HIGENs; a single period simply yields none.
    pub fn build(periods: PeriodSequence, tax: Taxonomy, cfg: MinerConfig) -> Result<Self, HigenError> {
        let higens = match extract_higens(&periods, &tax, &cfg) {
            Ok(h) => h,
            Err(HigenError::TooFewPeriods(_)) => {
                cfg.validate()?;
                Vec::new()
            }
            Err(e) => return Err(e),
        };
        Ok(Self::from_parts(periods, tax, cfg, higens))
    }

    pub fn from_parts(periods: PeriodSequence, tax: Taxonomy, cfg: MinerConfig, higens: Vec<Higen>) -> Self {
        let latest = periods.latest().map(|d| SupportIndex::build(d, &tax));
        PatternModel {
            periods,
            tax,
            cfg,
            higens,
            latest,
        }
    }

    /// Request items over the mined attributes: the mapped budget and the
    /// profession, each only when its attribute is mined.
    pub fn request_itemset(&self, profession: &str, budget: f64, rc: &RecommendConfig) -> Itemset {
        let mined = |a: &str| self.cfg.attributes.iter().any(|x| x == a);
        let mut items = Vec::new();
        if mined(&rc.budget_attribute) {
            items.extend(budget_item(&self.tax, &rc.budget_attribute, budget));
        }
        if mined(&rc.profession_attribute) && !profession.trim().is_empty() {
            items.push(item_or_leaf(&self.tax, &rc.profession_attribute, profession.trim()));
        }
        Itemset::new(items).unwrap_or_else(|_| Itemset::empty())
    }

    pub fn latest_support(&self, itemset: &Itemset) -> usize {
        self.latest.as_ref().map_or(0, |idx| idx.support(itemset))
    }

    /// Support of `attrs ∪ {outfit}` in the latest period, climbing to its
    /// minimal frequent generalization when it is not frequent. Among tied
    /// generalizations the best supported wins.
    pub fn score(&self, attrs: &Itemset, outfit_attribute: &str, outfit_value: &str) -> PatternScore {
        let x = attrs
            .without(outfit_attribute)
            .with(item_or_leaf(&self.tax, outfit_attribute, outfit_value));
        let sup = self.latest_support(&x);
        let min_sup = self.cfg.min_sup;
        if sup >= min_sup {
            let trend = trend_of(&self.higens, &x, &x).into();
            return PatternScore {
                pattern_score: sup,
                matched_itemset: x,
                trend,
            };
        }
        let climbed = self
            .latest
            .as_ref()
            .map(|idx| gim::climb(idx, &self.tax, &x, min_sup))
            .unwrap_or_default();
        let best = climbed
            .into_iter()
            .fold(None::<(Itemset, usize)>, |acc, (set, s)| match acc {
                Some((_, best_s)) if best_s >= s => acc,
                _ => Some((set, s)),
            });
        match best {
            Some((set, s)) => PatternScore {
                trend: trend_of(&self.higens, &x, &set).into(),
                pattern_score: s,
                matched_itemset: set,
            },
            None => PatternScore {
                pattern_score: sup,
                matched_itemset: x,
                trend: Trend::None,
            },
        }
    }
}

/// Filters `catalog` by gender, stock, budget and category, sizes each
/// survivor and ranks by pattern score (desc), fit distance (asc) and id.
pub fn recommend(
    req: &RecommendationRequest,
    catalog: &[CatalogEntry],
    sizing: &BTreeMap<GarmentClass, Vec<SizingRecord>>,
    model: &PatternModel,
    rc: &RecommendConfig,
) -> Result<Vec<Recommendation>, RecommendError> {
    req.validate()?;
    rc.weights.validate()?;
    let attrs = model.request_itemset(&req.profession, req.budget, rc);
    let order = model.cfg.display_order();
    let mut scores: HashMap<&str, PatternScore> = HashMap::new();
    let mut out = Vec::new();

    for entry in catalog {
        if !entry.in_stock
            || !entry.gender.trim().eq_ignore_ascii_case(req.gender.trim())
            || entry.price > req.budget
            || req.category.is_some_and(|c| c != entry.category)
        {
            continue;
        }
        let Some(records) = sizing.get(&entry.garment_class) else {
            continue;
        };
        // Entries we cannot size for this shopper are skipped, not failed.
        let Ok(ranked) = match_size(&req.measurements, records, &rc.weights) else {
            continue;
        };
        let stocked = |r: &SizingRecord| entry.available_sizes.iter().any(|s| s == &r.size_label);
        let chosen = if rc.size_fallback {
            ranked.iter().find(|(r, _)| stocked(r))
        } else {
            ranked.first().filter(|(r, _)| stocked(r))
        };
        let Some(&(record, fit)) = chosen else {
            continue;
        };
        let score = scores
            .entry(entry.outfit_value.as_str())
            .or_insert_with(|| model.score(&attrs, &rc.outfit_attribute, &entry.outfit_value))
            .clone();
        out.push(Recommendation {
            entry: entry.clone(),
            size: record.size_label.clone(),
            fit_distance: fit,
            pattern_score: score.pattern_score,
            matched_pattern: score.matched_itemset.render(&order),
            matched_itemset: score.matched_itemset,
            trend: score.trend,
        });
    }
    out.sort_by(|a, b| {
        b.pattern_score
            .cmp(&a.pattern_score)
            .then_with(|| a.fit_distance.total_cmp(&b.fit_distance))
            .then_with(|| a.entry.outfit_id.cmp(&b.entry.outfit_id))
            .then_with(|| a.entry.name.cmp(&b.entry.name))
            .then_with(|| a.entry.price.total_cmp(&b.entry.price))
    });
    out.truncate(req.top_k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transactions::{load_periods, Granularity};

    const LOG: &str = "date,Profession,Budget,Outfit\n\
        2012-10-01,Engineer,2500,T-shirt\n\
        2012-10-06,Businessman,2800,T-shirt\n\
        2012-10-08,Teacher,5800,Jacket\n\
        2012-10-20,Teacher,5800,Jacket\n\
        2012-10-23,Doctor,5200,Jacket\n\
        2012-11-03,Engineer,2500,T-shirt\n\
        2012-11-09,Engineer,2500,T-shirt\n\
        2012-11-15,Teacher,5800,Jacket\n\
        2012-11-28,Doctor,5200,Jacket\n\
        2012-11-29,Businessman,2800,Jacket\n";

    const TAX: &str = "attribute,child,parent\n\
        Budget,2500,Medium\nBudget,2800,Medium\nBudget,5200,High\nBudget,5800,High\n";

    const TOPS: &str =
        "name,bust,waist,hips,back_width,front_chest,shoulder,sleeve,wrist,nape_to_waist,front_shoulder_to_waist\n\
        L,30,29,37,19,12,5,4,9,16,15\n\
        M,31,30,41,20,13,6,5,10,17,16\n\
        N,32,31,42,17,14,4.4,2.6,10,15.6,14.6\n\
        O,33,33,33,18,12,6,0,14,17,15.6\n\
        P,29,27.5,46,18,15,4.9,10,15,15.8,14.6\n";

    fn model(cfg: MinerConfig) -> PatternModel {
        let periods = load_periods(LOG, &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::parse(TAX, Some(&periods.schema)).unwrap();
        periods.register_domain(&mut tax).unwrap();
        PatternModel::build(periods, tax, cfg).unwrap()
    }

    fn sizing() -> BTreeMap<GarmentClass, Vec<SizingRecord>> {
        BTreeMap::from([(
            GarmentClass::TopKurtaOnepiece,
            load_sizing(TOPS, GarmentClass::TopKurtaOnepiece).unwrap(),
        )])
    }

    fn size_m() -> BodyMeasurements {
        let records = load_sizing(TOPS, GarmentClass::TopKurtaOnepiece).unwrap();
        BodyMeasurements::manual(records[1].measurements.clone())
    }

    fn entry(id: &str, outfit: &str, category: Category, price: f64) -> CatalogEntry {
        CatalogEntry {
            outfit_id: id.into(),
            name: format!("{outfit} {id}"),
            outfit_value: outfit.into(),
            garment_class: GarmentClass::TopKurtaOnepiece,
            category,
            gender: "female".into(),
            price,
            available_sizes: vec!["L".into(), "M".into(), "N".into()],
            in_stock: true,
        }
    }

    fn request(budget: f64, category: Option<Category>) -> RecommendationRequest {
        RecommendationRequest {
            measurements: size_m(),
            gender: "female".into(),
            profession: "Engineer".into(),
            budget,
            category,
            top_k: 5,
        }
    }

    fn set(m: &PatternModel, spec: &[(&str, &str)]) -> Itemset {
        Itemset::new(spec.iter().map(|(a, v)| m.tax.item(a, v).unwrap())).unwrap()
    }

    #[test]
    fn budget_mapping() {
        let m = model(MinerConfig::default());
        let value = |b| budget_item(&m.tax, "Budget", b).map(|i| i.value);
        assert_eq!(value(2500.0).as_deref(), Some("2500"));
        assert_eq!(value(2600.0).as_deref(), Some("Medium"));
        assert_eq!(value(5500.0).as_deref(), Some("High"));
        assert_eq!(value(4000.0), None);
        assert_eq!(value(100.0), None);
        assert_eq!(budget_item(&m.tax, "Nope", 1.0), None);
    }

    #[test]
    fn frequent_request_scores_its_support() {
        let m = model(MinerConfig::default());
        let attrs = set(&m, &[("Budget", "2500")]);
        let s = m.score(&attrs, "Outfit", "T-shirt");
        assert_eq!(s.pattern_score, 2);
        assert_eq!(s.matched_itemset, set(&m, &[("Outfit", "T-shirt"), ("Budget", "2500")]));
        assert_eq!(s.trend, Trend::Spec);
    }

    #[test]
    fn infrequent_request_climbs() {
        let m = model(MinerConfig::default());
        let attrs = set(&m, &[("Budget", "5800")]);
        let s = m.score(&attrs, "Outfit", "Jacket");
        assert_eq!(s.matched_itemset, set(&m, &[("Outfit", "Jacket"), ("Budget", "High")]));
        assert_eq!(s.pattern_score, 2);
        assert_eq!(s.trend, Trend::Gen);
    }

    #[test]
    fn unseen_values_score_zero() {
        let m = model(MinerConfig::default());
        let attrs = Itemset::new([Item::leaf("Budget", "999")]).unwrap();
        let s = m.score(&attrs, "Outfit", "Gown");
        assert_eq!((s.pattern_score, s.trend), (0, Trend::None));
        assert_eq!(s.matched_itemset.len(), 2);
    }

    #[test]
    fn profession_follows_mined_attributes() {
        let rc = RecommendConfig::default();
        let m = model(MinerConfig::default());
        assert_eq!(m.request_itemset("Engineer", 2500.0, &rc).len(), 1);
        let m = model(MinerConfig::new(2, ["Outfit", "Budget", "Profession"]));
        let attrs = m.request_itemset("Engineer", 2500.0, &rc);
        assert_eq!(attrs.len(), 2);
        let s = m.score(&attrs, "Outfit", "T-shirt");
        assert_eq!(s.pattern_score, 2);
        assert_eq!(s.matched_itemset.len(), 3);
    }

    #[test]
    fn western_budget_example() {
        let m = model(MinerConfig::default());
        let catalog = vec![
            entry("W-101", "T-shirt", Category::Western, 2400.0),
            entry("W-205", "Jacket", Category::Western, 5500.0),
        ];
        let recs = recommend(
            &request(2500.0, Some(Category::Western)),
            &catalog,
            &sizing(),
            &m,
            &RecommendConfig::default(),
        )
        .unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].entry.outfit_id, "W-101");
        assert_eq!(recs[0].size, "M");
        assert_eq!(recs[0].fit_distance, 0.0);
        assert_eq!(recs[0].pattern_score, 2);
        assert_eq!(recs[0].matched_pattern, "{T-shirt, 2500}");
        assert_eq!(recs[0].trend, Trend::Spec);
    }

    #[test]
    fn empty_catalog_and_ties() {
        let m = model(MinerConfig::default());
        let rc = RecommendConfig::default();
        assert!(recommend(&request(2500.0, None), &[], &sizing(), &m, &rc)
            .unwrap()
            .is_empty());
        let catalog = vec![
            entry("B", "T-shirt", Category::Western, 100.0),
            entry("A", "T-shirt", Category::Daytime, 100.0),
        ];
        let recs = recommend(&request(2500.0, None), &catalog, &sizing(), &m, &rc).unwrap();
        let ids: Vec<&str> = recs.iter().map(|r| r.entry.outfit_id.as_str()).collect();
        assert_eq!(ids, ["A", "B"]);
    }

    #[test]
    fn hard_filters() {
        let m = model(MinerConfig::default());
        let rc = RecommendConfig::default();
        let mut male = entry("1", "T-shirt", Category::Western, 100.0);
        male.gender = "male".into();
        let mut gone = entry("2", "T-shirt", Category::Western, 100.0);
        gone.in_stock = false;
        let night = entry("3", "T-shirt", Category::Night, 100.0);
        let mut no_m = entry("4", "T-shirt", Category::Western, 100.0);
        no_m.available_sizes = vec!["L".into()];
        let catalog = vec![male, gone, night, no_m.clone()];
        let recs = recommend(&request(2500.0, Some(Category::Western)), &catalog, &sizing(), &m, &rc).unwrap();
        assert!(recs.is_empty());

        let fallback = RecommendConfig {
            size_fallback: true,
            ..RecommendConfig::default()
        };
        let recs = recommend(
            &request(2500.0, Some(Category::Western)),
            &[no_m],
            &sizing(),
            &m,
            &fallback,
        )
        .unwrap();
        assert_eq!(recs[0].size, "L");
        assert!(recs[0].fit_distance > 0.0);
    }

    #[test]
    fn ranking_prefers_pattern_score() {
        let m = model(MinerConfig::default());
        let catalog = vec![
            entry("J", "Jacket", Category::Western, 2000.0),
            entry("T", "T-shirt", Category::Western, 2000.0),
        ];
        // budget 2500 maps to the 2500 leaf: {T-shirt, 2500} has support 2,
        // {Jacket, 2500} climbs nowhere frequent
        let recs = recommend(
            &request(2500.0, None),
            &catalog,
            &sizing(),
            &m,
            &RecommendConfig::default(),
        )
        .unwrap();
        assert_eq!(recs[0].entry.outfit_id, "T");
        assert_eq!(recs[1].pattern_score, m.latest_support(&recs[1].matched_itemset));
    }

    #[test]
    fn request_validation() {
        let mut r = request(0.0, None);
        assert!(matches!(r.validate(), Err(RecommendError::Validation { ref field, .. }) if field == "budget"));
        r.budget = 10.0;
        r.top_k = 0;
        assert!(matches!(r.validate(), Err(RecommendError::Validation { ref field, .. }) if field == "top_k"));
        r.top_k = 1;
        r.gender = " ".into();
        assert!(matches!(r.validate(), Err(RecommendError::Validation { ref field, .. }) if field == "gender"));
        r.gender = "f".into();
        r.measurements.waist = Some(-1.0);
        assert!(
            matches!(r.validate(), Err(RecommendError::Validation { ref field, .. }) if field == "measurements.waist")
        );
    }

    #[test]
    fn trend_serializes_uppercase() {
        let json = serde_json::to_string(&[Trend::Gen, Trend::None]).unwrap();
        assert_eq!(json, r#"["GEN","NONE"]"#);
    }
}
