//! Outfit catalog and its CSV format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sizing::GarmentClass;
use super::RecommendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Traditional,
    Western,
    Functional,
    Daytime,
    Night,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Traditional,
        Category::Western,
        Category::Functional,
        Category::Daytime,
        Category::Night,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Traditional => "traditional",
            Category::Western => "western",
            Category::Functional => "functional",
            Category::Daytime => "daytime",
            Category::Night => "night",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = RecommendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or(RecommendError::UnknownCategory(s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub outfit_id: String,
    pub name: String,
    /// Value of the Outfit attribute in the purchase log.
    pub outfit_value: String,
    pub garment_class: GarmentClass,
    pub category: Category,
    pub gender: String,
    pub price: f64,
    pub available_sizes: Vec<String>,
    pub in_stock: bool,
}

impl CatalogEntry {
    pub fn validate(&self) -> Result<(), String> {
        if self.outfit_id.is_empty() {
            return Err("empty outfit_id".into());
        }
        if !(self.price.is_finite() && self.price > 0.0) {
            return Err(format!("price {} must be positive", self.price));
        }
        if self.in_stock && self.available_sizes.is_empty() {
            return Err(format!("{} is in stock with no sizes", self.outfit_id));
        }
        Ok(())
    }
}

const COLUMNS: [&str; 9] = [
    "outfit_id",
    "name",
    "outfit_value",
    "garment_class",
    "category",
    "gender",
    "price",
    "available_sizes",
    "in_stock",
];

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Parses the catalog CSV. Sizes are `|`-separated; ids must be unique.
pub fn load_catalog(source: &str) -> Result<Vec<CatalogEntry>, RecommendError> {
    let err = |line: usize, message: String| RecommendError::Catalog { line, message };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source.as_bytes());
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let mut index = [0usize; 9];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(1, format!("missing column `{name}`")))?;
    }

    let mut out: Vec<CatalogEntry> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let cell = |i: usize| row.get(index[i]).unwrap_or("");
        let price = cell(6)
            .parse()
            .map_err(|_| err(line, format!("price `{}` is not a number", cell(6))))?;
        let entry = CatalogEntry {
            outfit_id: cell(0).to_string(),
            name: cell(1).to_string(),
            outfit_value: cell(2).to_string(),
            garment_class: cell(3).parse().map_err(|e: RecommendError| err(line, e.to_string()))?,
            category: cell(4).parse().map_err(|e: RecommendError| err(line, e.to_string()))?,
            gender: cell(5).to_string(),
            price,
            available_sizes: cell(7)
                .split('|')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
            in_stock: parse_bool(cell(8))
                .ok_or_else(|| err(line, format!("in_stock `{}` is not a boolean", cell(8))))?,
        };
        entry.validate().map_err(|m| err(line, m))?;
        if entry.outfit_value.is_empty() {
            return Err(err(line, "empty outfit_value".into()));
        }
        if out.iter().any(|e| e.outfit_id == entry.outfit_id) {
            return Err(err(line, format!("duplicate outfit_id `{}`", entry.outfit_id)));
        }
        out.push(entry);
    }
    Ok(out)
}
