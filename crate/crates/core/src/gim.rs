//! Frequent generalized itemset mining within one period.
//!
//! Eager mode runs a level-wise Apriori over every taxonomy node of the
//! selected attributes. Lazy mode mines leaf-level itemsets only and then
//! materializes generalizations for the leaf itemsets that fall below the
//! threshold, at the price of one extra pass per infrequent itemset.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{DisplayOrder, Item, Itemset, Taxonomy};
use crate::transactions::{SupportIndex, TimePeriodDataset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinerError {
    #[error("min_sup must be at least 1")]
    ZeroSupport,
    #[error("at least one attribute must be selected")]
    NoAttributes,
    #[error("max_itemset_size must be at least 1")]
    ZeroSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiningMode {
    #[default]
    Eager,
    Lazy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub min_sup: usize,
    /// Attributes to mine over. Their order doubles as the display order.
    pub attributes: Vec<String>,
    pub max_itemset_size: Option<usize>,
    pub mode: MiningMode,
}

impl MinerConfig {
    pub fn new(min_sup: usize, attributes: impl IntoIterator<Item = impl Into<String>>) -> Self {
        MinerConfig {
            min_sup,
            attributes: attributes.into_iter().map(Into::into).collect(),
            max_itemset_size: None,
            mode: MiningMode::Eager,
        }
    }

    pub fn lazy(mut self) -> Self {
        self.mode = MiningMode::Lazy;
        self
    }

    pub fn with_max_size(mut self, size: usize) -> Self {
        self.max_itemset_size = Some(size);
        self
    }

    pub fn validate(&self) -> Result<(), MinerError> {
        if self.min_sup == 0 {
            return Err(MinerError::ZeroSupport);
        }
        if self.attributes.is_empty() {
            return Err(MinerError::NoAttributes);
        }
        if self.max_itemset_size == Some(0) {
            return Err(MinerError::ZeroSize);
        }
        Ok(())
    }

    pub fn max_size(&self) -> usize {
        self.max_itemset_size
            .unwrap_or(self.attributes.len())
            .min(self.attributes.len())
    }

    pub fn display_order(&self) -> DisplayOrder {
        DisplayOrder::new(self.attributes.iter().cloned())
    }
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig::new(2, ["Outfit", "Budget"])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequentItemset {
    pub itemset: Itemset,
    pub support: usize,
    pub period_id: String,
}

fn output_order(a: &FrequentItemset, b: &FrequentItemset) -> std::cmp::Ordering {
    (a.itemset.len(), &a.itemset).cmp(&(b.itemset.len(), &b.itemset))
}

/// Mines frequent itemsets (leaf and generalized) of one period.
pub fn mine_frequent(
    dataset: &TimePeriodDataset,
    tax: &Taxonomy,
    cfg: &MinerConfig,
) -> Result<Vec<FrequentItemset>, MinerError> {
    cfg.validate()?;
    let index = SupportIndex::build(dataset, tax);
    let found = match cfg.mode {
        MiningMode::Eager => apriori(&index, tax, cfg, false),
        MiningMode::Lazy => lazy(dataset, &index, tax, cfg),
    };
    let mut out: Vec<FrequentItemset> = found
        .into_iter()
        .map(|(itemset, support)| FrequentItemset {
            itemset,
            support,
            period_id: dataset.period_id.clone(),
        })
        .collect();
    out.sort_by(output_order);
    Ok(out)
}

/// All valid itemsets of exactly `size` items over the attributes' leaf and
/// generalized values.
pub fn enumerate_candidates(tax: &Taxonomy, attributes: &[String], size: usize) -> Vec<Itemset> {
    let attributes: BTreeSet<&String> = attributes.iter().collect();
    let domains: Vec<Vec<Item>> = attributes.into_iter().filter_map(|a| tax.values(a).ok()).collect();
    if size == 0 || size > domains.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(size);
    combine(&domains, 0, size, &mut chosen, &mut out);
    out.sort();
    out
}

fn combine(domains: &[Vec<Item>], start: usize, size: usize, chosen: &mut Vec<Item>, out: &mut Vec<Itemset>) {
    if chosen.len() == size {
        out.push(Itemset::new(chosen.iter().cloned()).expect("distinct attributes"));
        return;
    }
    for d in start..domains.len() {
        for item in &domains[d] {
            chosen.push(item.clone());
            combine(domains, d + 1, size, chosen, out);
            chosen.pop();
        }
    }
}

/// Level-wise candidate generation with anti-monotone pruning.
fn apriori(index: &SupportIndex, tax: &Taxonomy, cfg: &MinerConfig, leaves_only: bool) -> Vec<(Itemset, usize)> {
    let mut singles: Vec<Item> = Vec::new();
    for attribute in &cfg.attributes {
        let values = if leaves_only {
            tax.leaves(attribute)
        } else {
            tax.values(attribute)
        };
        singles.extend(values.unwrap_or_default());
    }
    singles.sort();
    singles.dedup();

    let mut level: Vec<(Itemset, usize)> = singles
        .into_iter()
        .map(|item| Itemset::new([item]).expect("single item"))
        .map(|set| {
            let sup = index.support(&set);
            (set, sup)
        })
        .filter(|(_, sup)| *sup >= cfg.min_sup)
        .collect();
    let mut all = level.clone();

    for _ in 1..cfg.max_size() {
        let frequent: BTreeSet<&Itemset> = level.iter().map(|(s, _)| s).collect();
        let mut next = Vec::new();
        for (i, (a, _)) in level.iter().enumerate() {
            for (b, _) in &level[i + 1..] {
                let Some(candidate) = join(a, b) else {
                    continue;
                };
                let closed = candidate
                    .attributes()
                    .all(|attr| frequent.contains(&candidate.without(attr)));
                if !closed {
                    continue;
                }
                let sup = index.support(&candidate);
                if sup >= cfg.min_sup {
                    next.push((candidate, sup));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort();
        next.dedup();
        all.extend(next.iter().cloned());
        level = next;
    }
    all
}

// Joins two k-itemsets sharing their first k-1 items into a (k+1)-itemset.
fn join(a: &Itemset, b: &Itemset) -> Option<Itemset> {
    let (a, b) = (a.items(), b.items());
    let k = a.len();
    if a[..k - 1] != b[..k - 1] || a[k - 1].attribute >= b[k - 1].attribute {
        return None;
    }
    let mut items = a.to_vec();
    items.push(b[k - 1].clone());
    Itemset::new(items).ok()
}

fn lazy(dataset: &TimePeriodDataset, index: &SupportIndex, tax: &Taxonomy, cfg: &MinerConfig) -> Vec<(Itemset, usize)> {
    let mut found: BTreeSet<(Itemset, usize)> = apriori(index, tax, cfg, true).into_iter().collect();
    for leaf_set in observed_leaf_itemsets(dataset, cfg) {
        if index.support(&leaf_set) >= cfg.min_sup {
            continue;
        }
        found.extend(climb(index, tax, &leaf_set, cfg.min_sup));
    }
    found.into_iter().collect()
}

/// Distinct projections of the period's transactions onto every attribute
/// subset of the configured sizes.
pub(crate) fn observed_leaf_itemsets(dataset: &TimePeriodDataset, cfg: &MinerConfig) -> BTreeSet<Itemset> {
    let mut out = BTreeSet::new();
    for t in &dataset.transactions {
        let projected: Vec<Item> = t
            .items
            .items()
            .iter()
            .filter(|i| cfg.attributes.contains(&i.attribute))
            .cloned()
            .collect();
        let n = projected.len();
        for mask in 1u32..(1 << n) {
            if mask.count_ones() as usize > cfg.max_size() {
                continue;
            }
            let subset = (0..n)
                .filter(|bit| mask & (1 << bit) != 0)
                .map(|bit| projected[bit].clone());
            out.insert(Itemset::new(subset).expect("projection of a transaction"));
        }
    }
    out
}

/// The frequent strict generalizations of `reference` with minimal total
/// level distance, in lexicographic order.
pub(crate) fn climb(
    index: &SupportIndex,
    tax: &Taxonomy,
    reference: &Itemset,
    min_sup: usize,
) -> Vec<(Itemset, usize)> {
    let mut best: Option<u32> = None;
    let mut out = Vec::new();
    // generalizations_of is sorted by distance, so the first frequent
    // distance found is the minimum.
    for candidate in tax.generalizations_of(reference) {
        let distance = tax.level_distance(reference, &candidate).unwrap_or(u32::MAX);
        if best.is_some_and(|d| distance > d) {
            break;
        }
        let sup = index.support(&candidate);
        if sup >= min_sup {
            best = Some(distance);
            out.push((candidate, sup));
        }
    }
    out
}

/// One line per itemset: `{a, b}<TAB>sup=<n><TAB>period=<id>`.
pub fn render_pattern_report(frequent: &[FrequentItemset], order: &DisplayOrder) -> String {
    let mut out = String::new();
    for f in frequent {
        out.push_str(&format!(
            "{}\tsup={}\tperiod={}\n",
            f.itemset.render(order),
            f.support,
            f.period_id
        ));
    }
    out
}
