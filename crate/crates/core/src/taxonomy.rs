//! Per-attribute generalization hierarchies.
//!
//! Every attribute owns a forest mapping a value to its one-step
//! generalization. Leaves sit at level 0 and each parent sits one level
//! above its highest child. Attributes without edges are *flat*: each of
//! their values is a leaf and a root at once.
//!
//! The file format is a small CSV dialect:
//!
//! ```text
//! attribute,child,parent
//! # comment
//! Budget,2500,Medium
//! Budget,5800,High
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const HEADER: [&str; 3] = ["attribute", "child", "parent"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("line 1: expected header `attribute,child,parent`")]
    MissingHeader,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: `{child}` already has a parent in attribute `{attribute}`")]
    DuplicateParent {
        line: usize,
        attribute: String,
        child: String,
    },
    #[error("line {line}: cycle through `{value}` in attribute `{attribute}`")]
    Cycle {
        line: usize,
        attribute: String,
        value: String,
    },
    #[error("line {line}: attribute `{attribute}` is not part of the schema")]
    UndeclaredAttribute { line: usize, attribute: String },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown value `{value}` for attribute `{attribute}`")]
    UnknownValue { attribute: String, value: String },
    #[error("items belong to different attributes: `{left}` vs `{right}`")]
    AttributeMismatch { left: String, right: String },
    #[error("`{value}` is a generalized node of `{attribute}` and cannot be a leaf")]
    NotALeaf { attribute: String, value: String },
}

/// One attribute-value pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub attribute: String,
    pub value: String,
    pub is_generalized: bool,
}

impl Item {
    pub fn leaf(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Item {
            attribute: attribute.into(),
            value: value.into(),
            is_generalized: false,
        }
    }

    pub fn generalized(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Item {
            attribute: attribute.into(),
            value: value.into(),
            is_generalized: true,
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.value)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ItemsetError {
    #[error("itemset holds more than one item for attribute `{0}`")]
    DuplicateAttribute(String),
}

/// A set of items, at most one per attribute, kept sorted by
/// (attribute, value).
///
/// Since ancestors always share the attribute of their descendants, the
/// one-item-per-attribute rule also rules out ancestor pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Item>", into = "Vec<Item>")]
pub struct Itemset(Vec<Item>);

impl Itemset {
    pub fn new(items: impl IntoIterator<Item = Item>) -> Result<Self, ItemsetError> {
        let mut items: Vec<Item> = items.into_iter().collect();
        items.sort();
        items.dedup();
        for pair in items.windows(2) {
            if pair[0].attribute == pair[1].attribute {
                return Err(ItemsetError::DuplicateAttribute(pair[0].attribute.clone()));
            }
        }
        Ok(Itemset(items))
    }

    pub fn empty() -> Self {
        Itemset(Vec::new())
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, attribute: &str) -> Option<&Item> {
        self.0.iter().find(|item| item.attribute == attribute)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|item| item.attribute.as_str())
    }

    /// True when no item is a generalized taxonomy node.
    pub fn is_leaf_level(&self) -> bool {
        self.0.iter().all(|item| !item.is_generalized)
    }

    /// Adds or replaces the item for `item.attribute`.
    pub fn with(&self, item: Item) -> Itemset {
        let mut items: Vec<Item> = self
            .0
            .iter()
            .filter(|i| i.attribute != item.attribute)
            .cloned()
            .collect();
        items.push(item);
        items.sort();
        Itemset(items)
    }

    pub fn without(&self, attribute: &str) -> Itemset {
        Itemset(self.0.iter().filter(|i| i.attribute != attribute).cloned().collect())
    }

    /// True when every item of `self` has the same attribute as some item of
    /// `other` and the values are equal, i.e. plain set inclusion.
    pub fn is_subset_of(&self, other: &Itemset) -> bool {
        self.0.iter().all(|item| other.0.contains(item))
    }

    /// Renders `{a, b}` with items ordered by `order`.
    pub fn render(&self, order: &DisplayOrder) -> String {
        let mut items: Vec<&Item> = self.0.iter().collect();
        items.sort_by(|a, b| order.compare(a, b));
        let values: Vec<&str> = items.iter().map(|i| i.value.as_str()).collect();
        format!("{{{}}}", values.join(", "))
    }
}

impl TryFrom<Vec<Item>> for Itemset {
    type Error = ItemsetError;

    fn try_from(items: Vec<Item>) -> Result<Self, Self::Error> {
        Itemset::new(items)
    }
}

impl From<Itemset> for Vec<Item> {
    fn from(set: Itemset) -> Self {
        set.0
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&DisplayOrder::default()))
    }
}

/// Attribute order used when rendering itemsets.
///
/// Listed attributes come first, in list order; the rest follow by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayOrder(Vec<String>);

impl DisplayOrder {
    pub fn new(attributes: impl IntoIterator<Item = impl Into<String>>) -> Self {
        DisplayOrder(attributes.into_iter().map(Into::into).collect())
    }

    fn rank(&self, attribute: &str) -> usize {
        self.0.iter().position(|a| a == attribute).unwrap_or(self.0.len())
    }

    pub fn compare(&self, a: &Item, b: &Item) -> std::cmp::Ordering {
        self.rank(&a.attribute)
            .cmp(&self.rank(&b.attribute))
            .then_with(|| a.cmp(b))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Node {
    parent: Option<String>,
    children: BTreeSet<String>,
    level: u32,
    // Source line of the edge child -> parent, for diagnostics.
    line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Hierarchy {
    nodes: BTreeMap<String, Node>,
    has_edges: bool,
}

/// Generalization forests keyed by attribute name. Immutable once shared.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    attributes: BTreeMap<String, Hierarchy>,
}

/// Parses a taxonomy file. Attributes are accepted as they appear.
pub fn load_taxonomy(source: &str) -> Result<Taxonomy, TaxonomyError> {
    Taxonomy::parse(source, None)
}

impl Taxonomy {
    /// Parses the taxonomy file format. When `schema` is given, edges for
    /// attributes outside it are rejected and every schema attribute is
    /// registered (flat if it has no edges).
    pub fn parse(source: &str, schema: Option<&[String]>) -> Result<Taxonomy, TaxonomyError> {
        let mut tax = Taxonomy::default();
        if let Some(schema) = schema {
            for attribute in schema {
                tax.attributes.entry(attribute.clone()).or_default();
            }
        }

        let mut saw_header = false;
        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = text.split(',').map(str::trim).collect();
            if !saw_header {
                if fields != HEADER {
                    return Err(TaxonomyError::MissingHeader);
                }
                saw_header = true;
                continue;
            }
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(TaxonomyError::Malformed {
                    line,
                    reason: format!("expected `attribute,child,parent`, got `{text}`"),
                });
            }
            let (attribute, child, parent) = (fields[0], fields[1], fields[2]);
            if let Some(schema) = schema {
                if !schema.iter().any(|a| a == attribute) {
                    return Err(TaxonomyError::UndeclaredAttribute {
                        line,
                        attribute: attribute.to_string(),
                    });
                }
            }
            tax.add_edge(attribute, child, parent, line)?;
        }
        if !saw_header {
            return Err(TaxonomyError::MissingHeader);
        }
        tax.check_acyclic()?;
        tax.assign_levels();
        Ok(tax)
    }

    fn add_edge(&mut self, attribute: &str, child: &str, parent: &str, line: usize) -> Result<(), TaxonomyError> {
        let hierarchy = self.attributes.entry(attribute.to_string()).or_default();
        hierarchy.has_edges = true;
        let node = hierarchy.nodes.entry(child.to_string()).or_default();
        if node.parent.is_some() {
            return Err(TaxonomyError::DuplicateParent {
                line,
                attribute: attribute.to_string(),
                child: child.to_string(),
            });
        }
        node.parent = Some(parent.to_string());
        node.line = line;
        hierarchy
            .nodes
            .entry(parent.to_string())
            .or_default()
            .children
            .insert(child.to_string());
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), TaxonomyError> {
        for (attribute, hierarchy) in &self.attributes {
            for start in hierarchy.nodes.keys() {
                let mut seen = BTreeSet::new();
                let mut current = start;
                while let Some(parent) = hierarchy.nodes[current].parent.as_ref() {
                    if !seen.insert(current) {
                        return Err(TaxonomyError::Cycle {
                            line: hierarchy.nodes[current].line,
                            attribute: attribute.clone(),
                            value: current.clone(),
                        });
                    }
                    current = parent;
                }
            }
        }
        Ok(())
    }

    fn assign_levels(&mut self) {
        for hierarchy in self.attributes.values_mut() {
            let mut levels = BTreeMap::new();
            let names: Vec<String> = hierarchy.nodes.keys().cloned().collect();
            for name in &names {
                level_of(&hierarchy.nodes, name, &mut levels);
            }
            for (name, level) in levels {
                if let Some(node) = hierarchy.nodes.get_mut(&name) {
                    node.level = level;
                }
            }
        }
    }

    /// Registers a value observed in the data as a leaf of `attribute`.
    ///
    /// For flat attributes any value is accepted. For attributes with a
    /// hierarchy the value must already be a leaf of it.
    pub fn register_leaf(&mut self, attribute: &str, value: &str) -> Result<(), TaxonomyError> {
        let hierarchy = self.attributes.entry(attribute.to_string()).or_default();
        match hierarchy.nodes.get(value) {
            Some(node) if !node.children.is_empty() => Err(TaxonomyError::NotALeaf {
                attribute: attribute.to_string(),
                value: value.to_string(),
            }),
            Some(_) => Ok(()),
            None if hierarchy.has_edges => Err(TaxonomyError::UnknownValue {
                attribute: attribute.to_string(),
                value: value.to_string(),
            }),
            None => {
                hierarchy.nodes.insert(value.to_string(), Node::default());
                Ok(())
            }
        }
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.attributes.keys().map(String::as_str)
    }

    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.attributes.contains_key(attribute)
    }

    /// True if the attribute has no generalization edges.
    pub fn is_flat(&self, attribute: &str) -> bool {
        self.attributes.get(attribute).is_none_or(|h| !h.has_edges)
    }

    pub fn edge_count(&self) -> usize {
        self.attributes
            .values()
            .flat_map(|h| h.nodes.values())
            .filter(|n| n.parent.is_some())
            .count()
    }

    fn hierarchy(&self, attribute: &str) -> Result<&Hierarchy, TaxonomyError> {
        self.attributes
            .get(attribute)
            .ok_or_else(|| TaxonomyError::UnknownAttribute(attribute.to_string()))
    }

    fn node(&self, attribute: &str, value: &str) -> Result<&Node, TaxonomyError> {
        self.hierarchy(attribute)?
            .nodes
            .get(value)
            .ok_or_else(|| TaxonomyError::UnknownValue {
                attribute: attribute.to_string(),
                value: value.to_string(),
            })
    }

    /// Builds an item with its generalized flag taken from the hierarchy.
    pub fn item(&self, attribute: &str, value: &str) -> Result<Item, TaxonomyError> {
        let node = self.node(attribute, value)?;
        Ok(Item {
            attribute: attribute.to_string(),
            value: value.to_string(),
            is_generalized: !node.children.is_empty(),
        })
    }

    pub fn contains(&self, item: &Item) -> bool {
        self.node(&item.attribute, &item.value).is_ok()
    }

    pub fn level(&self, item: &Item) -> Result<u32, TaxonomyError> {
        Ok(self.node(&item.attribute, &item.value)?.level)
    }

    /// One-step generalization, `None` for roots.
    pub fn parent(&self, item: &Item) -> Result<Option<Item>, TaxonomyError> {
        let node = self.node(&item.attribute, &item.value)?;
        Ok(node
            .parent
            .as_ref()
            .map(|p| Item::generalized(item.attribute.clone(), p.clone())))
    }

    /// Strict ancestors, nearest first.
    pub fn ancestors(&self, item: &Item) -> Result<Vec<Item>, TaxonomyError> {
        let mut out = Vec::new();
        let mut current = self.parent(item)?;
        while let Some(p) = current {
            current = self.parent(&p)?;
            out.push(p);
        }
        Ok(out)
    }

    /// Reflexive-transitive closure of the parent relation.
    pub fn is_descendant_or_self(&self, leaf: &Item, gen: &Item) -> Result<bool, TaxonomyError> {
        if leaf.attribute != gen.attribute {
            return Err(TaxonomyError::AttributeMismatch {
                left: leaf.attribute.clone(),
                right: gen.attribute.clone(),
            });
        }
        let hierarchy = self.hierarchy(&leaf.attribute)?;
        if !hierarchy.nodes.contains_key(&gen.value) {
            return Err(TaxonomyError::UnknownValue {
                attribute: gen.attribute.clone(),
                value: gen.value.clone(),
            });
        }
        let mut current = Some(&leaf.value);
        while let Some(value) = current {
            if *value == gen.value {
                return Ok(true);
            }
            current = hierarchy
                .nodes
                .get(value)
                .ok_or_else(|| TaxonomyError::UnknownValue {
                    attribute: leaf.attribute.clone(),
                    value: value.clone(),
                })?
                .parent
                .as_ref();
        }
        Ok(false)
    }

    /// All nodes of an attribute (leaves and generalized values), sorted.
    pub fn values(&self, attribute: &str) -> Result<Vec<Item>, TaxonomyError> {
        let hierarchy = self.hierarchy(attribute)?;
        Ok(hierarchy
            .nodes
            .iter()
            .map(|(value, node)| Item {
                attribute: attribute.to_string(),
                value: value.clone(),
                is_generalized: !node.children.is_empty(),
            })
            .collect())
    }

    pub fn leaves(&self, attribute: &str) -> Result<Vec<Item>, TaxonomyError> {
        Ok(self
            .values(attribute)?
            .into_iter()
            .filter(|i| !i.is_generalized)
            .collect())
    }

    /// True when every item of `specific` has an ancestor-or-self in
    /// `general` over the same attribute set.
    pub fn generalizes(&self, general: &Itemset, specific: &Itemset) -> bool {
        general.len() == specific.len()
            && specific.items().iter().all(|s| {
                general
                    .get(&s.attribute)
                    .is_some_and(|g| self.is_descendant_or_self(s, g).unwrap_or(false))
            })
    }

    /// Sum over items of the level gap between `specific` and `general`.
    /// Only meaningful when `general` generalizes `specific`.
    pub fn level_distance(&self, specific: &Itemset, general: &Itemset) -> Result<u32, TaxonomyError> {
        let mut total = 0;
        for s in specific.items() {
            let g = general
                .get(&s.attribute)
                .ok_or_else(|| TaxonomyError::UnknownAttribute(s.attribute.clone()))?;
            total += self.level(g)?.saturating_sub(self.level(s)?);
        }
        Ok(total)
    }

    /// Every itemset obtained by replacing a non-empty subset of the items
    /// with strict ancestors, ordered by total level distance and then
    /// lexicographically. Items unknown to the taxonomy are kept as-is.
    pub fn generalizations_of(&self, itemset: &Itemset) -> Vec<Itemset> {
        let choices: Vec<Vec<(Item, u32)>> = itemset
            .items()
            .iter()
            .map(|item| {
                let base = self.level(item).unwrap_or(0);
                let mut options = vec![(item.clone(), 0)];
                for a in self.ancestors(item).unwrap_or_default() {
                    let level = self.level(&a).unwrap_or(base);
                    options.push((a, level - base));
                }
                options
            })
            .collect();

        let mut out: Vec<(u32, Itemset)> = Vec::new();
        let mut picks = vec![0usize; choices.len()];
        loop {
            if picks.iter().any(|&p| p > 0) {
                let items = picks.iter().zip(&choices).map(|(&p, c)| c[p].0.clone());
                let distance = picks.iter().zip(&choices).map(|(&p, c)| c[p].1).sum();
                out.push((distance, Itemset(items.collect::<Vec<_>>())));
            }
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == picks.len() {
                    out.sort();
                    return out.into_iter().map(|(_, set)| set).collect();
                }
                picks[pos] += 1;
                if picks[pos] < choices[pos].len() {
                    break;
                }
                picks[pos] = 0;
                pos += 1;
            }
        }
    }
}

fn level_of(nodes: &BTreeMap<String, Node>, name: &str, memo: &mut BTreeMap<String, u32>) -> u32 {
    if let Some(&level) = memo.get(name) {
        return level;
    }
    let level = nodes[name]
        .children
        .iter()
        .map(|c| level_of(nodes, c, memo) + 1)
        .max()
        .unwrap_or(0);
    memo.insert(name.to_string(), level);
    level
}
