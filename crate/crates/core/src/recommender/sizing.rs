//! Size charts and weighted L1 size matching.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RecommendError;
use crate::vision::{BodyMeasurements, MeasurementField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GarmentClass {
    JeansLegging,
    TopKurtaOnepiece,
}

impl GarmentClass {
    pub const ALL: [GarmentClass; 2] = [GarmentClass::JeansLegging, GarmentClass::TopKurtaOnepiece];

    pub fn as_str(self) -> &'static str {
        match self {
            GarmentClass::JeansLegging => "jeans-legging",
            GarmentClass::TopKurtaOnepiece => "top-kurta-onepiece",
        }
    }

    /// Fields a size chart of this class must carry.
    pub fn fields(self) -> &'static [MeasurementField] {
        use MeasurementField::*;
        match self {
            GarmentClass::JeansLegging => &[Waist, Hips, Calf, Ankle, OutsideLeg],
            GarmentClass::TopKurtaOnepiece => &[
                Bust,
                Waist,
                Hips,
                BackWidth,
                FrontChest,
                Shoulder,
                Sleeve,
                Wrist,
                NapeToWaist,
                FrontShoulderToWaist,
            ],
        }
    }
}

impl fmt::Display for GarmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GarmentClass {
    type Err = RecommendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GarmentClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| RecommendError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingRecord {
    pub garment_class: GarmentClass,
    pub size_label: String,
    pub measurements: BTreeMap<MeasurementField, f64>,
}

/// Maps a header cell such as `Outside Leg` or `nape-to-waist` to its field.
fn header_field(cell: &str) -> Option<MeasurementField> {
    let key: String = cell
        .trim()
        .to_ascii_lowercase()
        .split(|c: char| c.is_whitespace() || c == '-' || c == '_')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_");
    key.parse().ok()
}

/// Reads a size chart: a `name` column followed by measurement columns.
/// Every field the class requires must be present; values must be
/// non-negative numbers.
pub fn load_sizing(source: &str, class: GarmentClass) -> Result<Vec<SizingRecord>, RecommendError> {
    let err = |line: usize, message: String| RecommendError::Sizing { line, message };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source.as_bytes());
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let mut name_col = None;
    let mut columns: Vec<(usize, MeasurementField)> = Vec::new();
    for (i, cell) in headers.iter().enumerate() {
        if cell.eq_ignore_ascii_case("name") {
            name_col = Some(i);
        } else {
            let field = header_field(cell).ok_or_else(|| err(1, format!("unknown column `{cell}`")))?;
            if columns.iter().any(|&(_, f)| f == field) {
                return Err(err(1, format!("duplicate column `{cell}`")));
            }
            columns.push((i, field));
        }
    }
    let name_col = name_col.ok_or_else(|| err(1, "missing `name` column".into()))?;
    let missing: Vec<String> = class
        .fields()
        .iter()
        .filter(|f| !columns.iter().any(|(_, c)| c == *f))
        .map(|f| f.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(err(1, format!("missing columns for {class}: {}", missing.join(", "))));
    }

    let mut out: Vec<SizingRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let label = row.get(name_col).unwrap_or("").to_string();
        if label.is_empty() {
            return Err(err(line, "empty size name".into()));
        }
        if out.iter().any(|r| r.size_label == label) {
            return Err(err(line, format!("duplicate size `{label}`")));
        }
        let mut measurements = BTreeMap::new();
        for &(col, field) in &columns {
            let cell = row.get(col).unwrap_or("");
            let value: f64 = cell
                .parse()
                .map_err(|_| err(line, format!("{field}: `{cell}` is not a number")))?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(err(line, format!("{field}: {value} is negative")));
            }
            measurements.insert(field, value);
        }
        out.push(SizingRecord {
            garment_class: class,
            size_label: label,
            measurements,
        });
    }
    Ok(out)
}

/// Per-field weights for the fit distance; unlisted fields weigh 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldWeights(pub BTreeMap<MeasurementField, f64>);

impl FieldWeights {
    pub fn get(&self, field: MeasurementField) -> f64 {
        self.0.get(&field).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<(), RecommendError> {
        for (field, &w) in &self.0 {
            if !(w.is_finite() && w >= 0.0) {
                return Err(RecommendError::Validation {
                    field: format!("weights.{field}"),
                    message: format!("weight {w} must be a non-negative number"),
                });
            }
        }
        Ok(())
    }
}

/// `Σ weight · |m - record|` over the record's class fields.
pub fn fit_distance(
    m: &BodyMeasurements,
    record: &SizingRecord,
    weights: &FieldWeights,
) -> Result<f64, RecommendError> {
    let fields = record.garment_class.fields();
    let missing: Vec<MeasurementField> = fields.iter().copied().filter(|&f| m.get(f).is_none()).collect();
    if !missing.is_empty() {
        return Err(RecommendError::MissingMeasurements {
            class: record.garment_class,
            fields: missing,
        });
    }
    Ok(fields
        .iter()
        .map(|&f| {
            let want = m.get(f).unwrap_or_default();
            let have = record.measurements.get(&f).copied().unwrap_or_default();
            weights.get(f) * (want - have).abs()
        })
        .sum())
}

/// Ranks `records` by fit distance, ties broken by size label.
pub fn match_size<'a>(
    m: &BodyMeasurements,
    records: &'a [SizingRecord],
    weights: &FieldWeights,
) -> Result<Vec<(&'a SizingRecord, f64)>, RecommendError> {
    let mut ranked = records
        .iter()
        .map(|r| fit_distance(m, r, weights).map(|d| (r, d)))
        .collect::<Result<Vec<_>, _>>()?;
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.size_label.cmp(&b.0.size_label)));
    Ok(ranked)
}
