//! History-generalized patterns (HIGENs).
//!
//! For every leaf itemset that is frequent in at least one period, a HIGEN
//! records, period by period, either the itemset itself (when frequent) or
//! its least-generalized frequent ancestor itemset, together with the
//! abstraction change between consecutive periods.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gim::{self, MinerConfig, MinerError, MiningMode};
use crate::taxonomy::{DisplayOrder, Itemset, Taxonomy};
use crate::transactions::{PeriodSequence, SupportIndex, TimePeriodDataset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HigenError {
    #[error("HIGEN extraction needs at least 2 periods, got {0}")]
    TooFewPeriods(usize),
    #[error(transparent)]
    Config(#[from] MinerError),
}

/// Abstraction change between two consecutive nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Relation {
    /// The later node generalizes the earlier one.
    Gen,
    /// The later node specializes the earlier one.
    Spec,
    Same,
    /// Neither generalizes the other. Only possible with three or more
    /// periods, when two different generalizations follow each other.
    Lateral,
}

impl Relation {
    pub fn glyph(self, ascii: bool) -> &'static str {
        match (self, ascii) {
            (Relation::Gen, false) => "↗",
            (Relation::Gen, true) => "/>",
            (Relation::Spec, false) => "↘",
            (Relation::Spec, true) => "\\>",
            (Relation::Same, _) => "~>",
            (Relation::Lateral, _) => "<>",
        }
    }

    pub fn between(tax: &Taxonomy, from: &Itemset, to: &Itemset) -> Relation {
        if from == to {
            Relation::Same
        } else if tax.generalizes(to, from) {
            Relation::Gen
        } else if tax.generalizes(from, to) {
            Relation::Spec
        } else {
            Relation::Lateral
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.glyph(false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HigenNode {
    pub itemset: Itemset,
    pub support: usize,
    pub period_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Higen {
    pub reference: Itemset,
    pub nodes: Vec<HigenNode>,
    pub relations: Vec<Relation>,
}

impl Higen {
    /// Relation of the last transition, `None` for single-node patterns.
    pub fn last_relation(&self) -> Option<Relation> {
        self.relations.last().copied()
    }
}

/// Frequent strict generalizations of `reference` with minimal total level
/// distance; ties come back in lexicographic order.
pub fn minimal_frequent_generalizations(
    reference: &Itemset,
    dataset: &TimePeriodDataset,
    tax: &Taxonomy,
    min_sup: usize,
) -> Vec<(Itemset, usize)> {
    let index = SupportIndex::build(dataset, tax);
    gim::climb(&index, tax, reference, min_sup)
}

/// Extracts every HIGEN over `cfg.attributes` at `cfg.min_sup`.
pub fn extract_higens(periods: &PeriodSequence, tax: &Taxonomy, cfg: &MinerConfig) -> Result<Vec<Higen>, HigenError> {
    if periods.len() < 2 {
        return Err(HigenError::TooFewPeriods(periods.len()));
    }
    cfg.validate()?;

    let indexes: Vec<SupportIndex> = periods.periods.iter().map(|p| SupportIndex::build(p, tax)).collect();

    // Leaf-level itemsets are the same in both modes, lazy is cheaper.
    let leaf_cfg = MinerConfig {
        mode: MiningMode::Lazy,
        ..cfg.clone()
    };
    let mut references = std::collections::BTreeSet::new();
    for period in &periods.periods {
        for f in gim::mine_frequent(period, tax, &leaf_cfg)? {
            if f.itemset.is_leaf_level() {
                references.insert(f.itemset);
            }
        }
    }

    let mut out = Vec::new();
    for reference in references {
        // Candidate nodes per period; more than one only on ties.
        let mut per_period: Vec<Vec<HigenNode>> = Vec::with_capacity(periods.len());
        for (period, index) in periods.periods.iter().zip(&indexes) {
            let sup = index.support(&reference);
            let options: Vec<HigenNode> = if sup >= cfg.min_sup {
                vec![HigenNode {
                    itemset: reference.clone(),
                    support: sup,
                    period_id: period.period_id.clone(),
                }]
            } else {
                gim::climb(index, tax, &reference, cfg.min_sup)
                    .into_iter()
                    .map(|(itemset, support)| HigenNode {
                        itemset,
                        support,
                        period_id: period.period_id.clone(),
                    })
                    .collect()
            };
            if options.is_empty() {
                break;
            }
            per_period.push(options);
        }
        if per_period.len() < periods.len() {
            continue;
        }
        for nodes in cartesian(&per_period) {
            let relations = nodes
                .windows(2)
                .map(|w| Relation::between(tax, &w[0].itemset, &w[1].itemset))
                .collect();
            out.push(Higen {
                reference: reference.clone(),
                nodes,
                relations,
            });
        }
    }
    out.sort_by(|a, b| (a.reference.len(), &a.reference, &a.nodes).cmp(&(b.reference.len(), &b.reference, &b.nodes)));
    Ok(out)
}

fn cartesian(options: &[Vec<HigenNode>]) -> Vec<Vec<HigenNode>> {
    let mut acc: Vec<Vec<HigenNode>> = vec![Vec::new()];
    for choices in options {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut next = prefix.clone();
                    next.push(c.clone());
                    next
                })
            })
            .collect();
    }
    acc
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenderOptions {
    /// Use `/>` and `\>` instead of the Unicode arrows.
    pub ascii: bool,
    /// Wrap nodes equal to the reference itemset in `*...*`.
    pub mark_reference: bool,
    pub order: DisplayOrder,
}

impl RenderOptions {
    /// Settings of the HIGEN report file.
    pub fn report(order: DisplayOrder) -> Self {
        RenderOptions {
            ascii: false,
            mark_reference: true,
            order,
        }
    }
}

/// `{Jacket, 5800}[sup=2] ↗ {Jacket, High}[sup=2]`
pub fn render_higen(h: &Higen, opts: &RenderOptions) -> String {
    let mut out = String::new();
    for (i, node) in h.nodes.iter().enumerate() {
        if i > 0 {
            out.push(' ');
            out.push_str(h.relations[i - 1].glyph(opts.ascii));
            out.push(' ');
        }
        let set = node.itemset.render(&opts.order);
        if opts.mark_reference && node.itemset == h.reference {
            out.push_str(&format!("*{set}*"));
        } else {
            out.push_str(&set);
        }
        out.push_str(&format!("[sup={}]", node.support));
    }
    out
}

pub fn render_higen_report(higens: &[Higen], opts: &RenderOptions) -> String {
    let mut out = String::new();
    for h in higens {
        out.push_str(&render_higen(h, opts));
        out.push('\n');
    }
    out
}

/// Trend of `matched` in the latest period: the last relation of a HIGEN
/// whose final node is `matched`, preferring one whose reference is `query`.
pub fn trend_of(higens: &[Higen], query: &Itemset, matched: &Itemset) -> Option<Relation> {
    let ending: Vec<&Higen> = higens
        .iter()
        .filter(|h| h.nodes.last().is_some_and(|n| &n.itemset == matched))
        .collect();
    ending
        .iter()
        .find(|h| &h.reference == query)
        .or_else(|| ending.first())
        .and_then(|h| h.last_relation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Item;
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

    fn fixture(log: &str) -> (PeriodSequence, Taxonomy) {
        let periods = load_periods(log, &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::parse(TAX, Some(&periods.schema)).unwrap();
        periods.register_domain(&mut tax).unwrap();
        (periods, tax)
    }

    fn set(tax: &Taxonomy, spec: &[(&str, &str)]) -> Itemset {
        Itemset::new(spec.iter().map(|(a, v)| tax.item(a, v).unwrap())).unwrap()
    }

    fn plain() -> RenderOptions {
        RenderOptions {
            order: DisplayOrder::new(["Outfit", "Budget"]),
            ..RenderOptions::default()
        }
    }

    #[test]
    fn minimal_generalization_examples() {
        let (periods, tax) = fixture(LOG);
        let (d1, d2) = (&periods.periods[0], &periods.periods[1]);
        assert_eq!(
            minimal_frequent_generalizations(&set(&tax, &[("Outfit", "Jacket"), ("Budget", "5800")]), d2, &tax, 2),
            vec![(set(&tax, &[("Outfit", "Jacket"), ("Budget", "High")]), 2)]
        );
        assert_eq!(
            minimal_frequent_generalizations(&set(&tax, &[("Budget", "2500")]), d1, &tax, 2),
            vec![(set(&tax, &[("Budget", "Medium")]), 2)]
        );
        assert!(minimal_frequent_generalizations(&set(&tax, &[("Budget", "2500")]), d1, &tax, 6).is_empty());
    }

    #[test]
    fn six_patterns_from_october_to_november() {
        let (periods, tax) = fixture(LOG);
        let higens = extract_higens(&periods, &tax, &MinerConfig::default()).unwrap();
        let mut lines: Vec<String> = higens.iter().map(|h| render_higen(h, &plain())).collect();
        lines.sort();
        let mut want = vec![
            "{T-shirt}[sup=2] ~> {T-shirt}[sup=2]",
            "{Jacket}[sup=3] ~> {Jacket}[sup=3]",
            "{5800}[sup=2] ↗ {High}[sup=2]",
            "{T-shirt, Medium}[sup=2] ↘ {T-shirt, 2500}[sup=2]",
            "{Jacket, 5800}[sup=2] ↗ {Jacket, High}[sup=2]",
            "{Medium}[sup=2] ↘ {2500}[sup=2]",
        ];
        want.sort();
        assert_eq!(lines, want);
        for h in &higens {
            assert!(h.reference.is_leaf_level());
            assert_eq!(h.relations.len(), h.nodes.len() - 1);
        }
    }

    #[test]
    fn marked_and_ascii_rendering() {
        let (periods, tax) = fixture(LOG);
        let higens = extract_higens(&periods, &tax, &MinerConfig::default()).unwrap();
        let jacket_5800 = set(&tax, &[("Outfit", "Jacket"), ("Budget", "5800")]);
        let h = higens.iter().find(|h| h.reference == jacket_5800).unwrap();
        let opts = RenderOptions {
            ascii: true,
            ..RenderOptions::report(DisplayOrder::new(["Outfit", "Budget"]))
        };
        assert_eq!(
            render_higen(h, &opts),
            "*{Jacket, 5800}*[sup=2] /> {Jacket, High}[sup=2]"
        );
        let r2500 = set(&tax, &[("Budget", "2500")]);
        let h = higens.iter().find(|h| h.reference == r2500).unwrap();
        assert_eq!(render_higen(h, &opts), "{Medium}[sup=2] \\> *{2500}*[sup=2]");
    }

    #[test]
    fn three_periods_give_three_nodes() {
        let log = format!("{LOG}2012-12-01,Engineer,2800,Jacket\n2012-12-02,Teacher,2800,Jacket\n");
        let (periods, tax) = fixture(&log);
        let higens = extract_higens(&periods, &tax, &MinerConfig::default()).unwrap();
        let jacket = set(&tax, &[("Outfit", "Jacket")]);
        let h = higens.iter().find(|h| h.reference == jacket).unwrap();
        assert_eq!(
            render_higen(h, &plain()),
            "{Jacket}[sup=3] ~> {Jacket}[sup=3] ~> {Jacket}[sup=2]"
        );
        // {2800}: infrequent, infrequent, frequent.
        let r2800 = set(&tax, &[("Budget", "2800")]);
        let h = higens.iter().find(|h| h.reference == r2800).unwrap();
        assert_eq!(
            render_higen(h, &plain()),
            "{Medium}[sup=2] ~> {Medium}[sup=3] ↘ {2800}[sup=2]"
        );
    }

    #[test]
    fn always_frequent_reference_is_all_same() {
        let log = "date,Outfit\n2012-10-01,Jacket\n2012-10-02,Jacket\n2012-11-01,Jacket\n2012-11-02,Jacket\n";
        let periods = load_periods(log, &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::parse("attribute,child,parent\n", Some(&periods.schema)).unwrap();
        periods.register_domain(&mut tax).unwrap();
        let higens = extract_higens(&periods, &tax, &MinerConfig::new(2, ["Outfit"])).unwrap();
        assert_eq!(higens.len(), 1);
        assert_eq!(higens[0].relations, vec![Relation::Same]);
    }

    #[test]
    fn ties_emit_one_pattern_per_generalization() {
        // Both {A', b} and {a, B'} are frequent at distance 1 in P2.
        let tax_src = "attribute,child,parent\nA,a,A'\nA,x,A'\nB,b,B'\nB,y,B'\n";
        let log = "date,A,B\n2012-10-01,a,b\n2012-10-02,a,b\n\
            2012-11-01,a,y\n2012-11-02,x,b\n2012-11-03,a,y\n2012-11-04,x,b\n";
        let periods = load_periods(log, &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::parse(tax_src, Some(&periods.schema)).unwrap();
        periods.register_domain(&mut tax).unwrap();
        let higens = extract_higens(&periods, &tax, &MinerConfig::new(2, ["A", "B"])).unwrap();
        let ab = Itemset::new([Item::leaf("A", "a"), Item::leaf("B", "b")]).unwrap();
        let from_ab: Vec<String> = higens
            .iter()
            .filter(|h| h.reference == ab)
            .map(|h| render_higen(h, &RenderOptions::default()))
            .collect();
        assert_eq!(
            from_ab,
            ["{a, b}[sup=2] ↗ {A', b}[sup=2]", "{a, b}[sup=2] ↗ {a, B'}[sup=2]"]
        );
    }

    #[test]
    fn needs_two_periods() {
        let (periods, tax) = fixture("date,Budget,Outfit\n2012-10-01,2500,Jacket\n");
        assert_eq!(
            extract_higens(&periods, &tax, &MinerConfig::new(1, ["Outfit"])),
            Err(HigenError::TooFewPeriods(1))
        );
    }

    #[test]
    fn trend_lookup_prefers_the_query_reference() {
        let (periods, tax) = fixture(LOG);
        let higens = extract_higens(&periods, &tax, &MinerConfig::default()).unwrap();
        let shirt_2500 = set(&tax, &[("Outfit", "T-shirt"), ("Budget", "2500")]);
        assert_eq!(trend_of(&higens, &shirt_2500, &shirt_2500), Some(Relation::Spec));
        let jacket_5800 = set(&tax, &[("Outfit", "Jacket"), ("Budget", "5800")]);
        let jacket_high = set(&tax, &[("Outfit", "Jacket"), ("Budget", "High")]);
        assert_eq!(trend_of(&higens, &jacket_5800, &jacket_high), Some(Relation::Gen));
        let jacket_medium = set(&tax, &[("Outfit", "Jacket"), ("Budget", "Medium")]);
        assert_eq!(trend_of(&higens, &jacket_medium, &jacket_medium), None);
    }
}
