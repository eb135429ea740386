//! Body measurements and their estimation from a front-view silhouette.
//!
//! The silhouette is thresholded, its bounding box located, and widths are
//! read at configured fractions of the box height. A single view cannot see
//! depth, so girths are estimated as `width · girth_multiplier`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::GrayImage;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("no foreground pixels found")]
    NoForeground,
    #[error("calibration must be a positive pixels-per-centimeter value, got {0}")]
    Calibration(f64),
    #[error("measurement `{field}` must be non-negative, got {value}")]
    Negative { field: MeasurementField, value: f64 },
    #[error("unknown measurement field `{0}`")]
    UnknownField(String),
}

/// The fourteen measurement points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementField {
    Bust,
    Waist,
    Hips,
    BackWidth,
    FrontChest,
    Shoulder,
    Sleeve,
    Wrist,
    UpperArm,
    Calf,
    Ankle,
    NapeToWaist,
    FrontShoulderToWaist,
    OutsideLeg,
}

impl MeasurementField {
    pub const ALL: [MeasurementField; 14] = [
        MeasurementField::Bust,
        MeasurementField::Waist,
        MeasurementField::Hips,
        MeasurementField::BackWidth,
        MeasurementField::FrontChest,
        MeasurementField::Shoulder,
        MeasurementField::Sleeve,
        MeasurementField::Wrist,
        MeasurementField::UpperArm,
        MeasurementField::Calf,
        MeasurementField::Ankle,
        MeasurementField::NapeToWaist,
        MeasurementField::FrontShoulderToWaist,
        MeasurementField::OutsideLeg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementField::Bust => "bust",
            MeasurementField::Waist => "waist",
            MeasurementField::Hips => "hips",
            MeasurementField::BackWidth => "back_width",
            MeasurementField::FrontChest => "front_chest",
            MeasurementField::Shoulder => "shoulder",
            MeasurementField::Sleeve => "sleeve",
            MeasurementField::Wrist => "wrist",
            MeasurementField::UpperArm => "upper_arm",
            MeasurementField::Calf => "calf",
            MeasurementField::Ankle => "ankle",
            MeasurementField::NapeToWaist => "nape_to_waist",
            MeasurementField::FrontShoulderToWaist => "front_shoulder_to_waist",
            MeasurementField::OutsideLeg => "outside_leg",
        }
    }
}

impl fmt::Display for MeasurementField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasurementField {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MeasurementField::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| MeasureError::UnknownField(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementSource {
    Detected,
    #[default]
    Manual,
    Mixed,
}

/// Lengths in centimeters; absent values are unmeasured.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BodyMeasurements {
    pub bust: Option<f64>,
    pub waist: Option<f64>,
    pub hips: Option<f64>,
    pub back_width: Option<f64>,
    pub front_chest: Option<f64>,
    pub shoulder: Option<f64>,
    pub sleeve: Option<f64>,
    pub wrist: Option<f64>,
    pub upper_arm: Option<f64>,
    pub calf: Option<f64>,
    pub ankle: Option<f64>,
    pub nape_to_waist: Option<f64>,
    pub front_shoulder_to_waist: Option<f64>,
    pub outside_leg: Option<f64>,
    pub source: MeasurementSource,
}

impl BodyMeasurements {
    pub fn get(&self, field: MeasurementField) -> Option<f64> {
        use MeasurementField::*;
        match field {
            Bust => self.bust,
            Waist => self.waist,
            Hips => self.hips,
            BackWidth => self.back_width,
            FrontChest => self.front_chest,
            Shoulder => self.shoulder,
            Sleeve => self.sleeve,
            Wrist => self.wrist,
            UpperArm => self.upper_arm,
            Calf => self.calf,
            Ankle => self.ankle,
            NapeToWaist => self.nape_to_waist,
            FrontShoulderToWaist => self.front_shoulder_to_waist,
            OutsideLeg => self.outside_leg,
        }
    }

    pub fn set(&mut self, field: MeasurementField, value: Option<f64>) {
        use MeasurementField::*;
        let slot = match field {
            Bust => &mut self.bust,
            Waist => &mut self.waist,
            Hips => &mut self.hips,
            BackWidth => &mut self.back_width,
            FrontChest => &mut self.front_chest,
            Shoulder => &mut self.shoulder,
            Sleeve => &mut self.sleeve,
            Wrist => &mut self.wrist,
            UpperArm => &mut self.upper_arm,
            Calf => &mut self.calf,
            Ankle => &mut self.ankle,
            NapeToWaist => &mut self.nape_to_waist,
            FrontShoulderToWaist => &mut self.front_shoulder_to_waist,
            OutsideLeg => &mut self.outside_leg,
        };
        *slot = value;
    }

    pub fn manual(values: impl IntoIterator<Item = (MeasurementField, f64)>) -> Self {
        let mut m = BodyMeasurements::default();
        for (field, value) in values {
            m.set(field, Some(value));
        }
        m
    }

    pub fn present(&self) -> BTreeMap<MeasurementField, f64> {
        MeasurementField::ALL
            .into_iter()
            .filter_map(|f| self.get(f).map(|v| (f, v)))
            .collect()
    }

    /// Values may be zero (some sizing rows carry 0) but never negative or
    /// non-finite.
    pub fn validate(&self) -> Result<(), MeasureError> {
        for (field, value) in self.present() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(MeasureError::Negative { field, value });
            }
        }
        Ok(())
    }

    /// Overlays `manual` on `self`; manual values always win.
    pub fn with_overrides(&self, manual: &BodyMeasurements) -> BodyMeasurements {
        let mut out = self.clone();
        let mut overridden = false;
        for (field, value) in manual.present() {
            out.set(field, Some(value));
            overridden = true;
        }
        if overridden {
            out.source = if self.present().is_empty() {
                MeasurementSource::Manual
            } else {
                MeasurementSource::Mixed
            };
        }
        out
    }
}

/// How one measurement is read off the silhouette.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Landmark {
    /// Silhouette width at a fractional height of the body box.
    Width { row: f64 },
    /// Width times the girth multiplier.
    Girth { row: f64 },
    /// Vertical distance between two fractional heights.
    Span { from: f64, to: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    /// Pixels darker than this are foreground (or lighter, see below).
    pub threshold: u8,
    pub foreground_dark: bool,
    pub girth_multiplier: f64,
    pub landmarks: Vec<(MeasurementField, Landmark)>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        use Landmark::*;
        use MeasurementField::*;
        MeasureConfig {
            threshold: 128,
            foreground_dark: true,
            // half-ellipse model
            girth_multiplier: std::f64::consts::FRAC_PI_2,
            landmarks: vec![
                (Shoulder, Width { row: 0.18 }),
                (BackWidth, Width { row: 0.24 }),
                (FrontChest, Width { row: 0.26 }),
                (Bust, Girth { row: 0.28 }),
                (Waist, Girth { row: 0.40 }),
                (Hips, Girth { row: 0.52 }),
                (Calf, Girth { row: 0.78 }),
                (Ankle, Girth { row: 0.95 }),
                (Sleeve, Span { from: 0.18, to: 0.50 }),
                (NapeToWaist, Span { from: 0.14, to: 0.40 }),
                (FrontShoulderToWaist, Span { from: 0.18, to: 0.40 }),
                (OutsideLeg, Span { from: 0.52, to: 1.0 }),
            ],
        }
    }
}

struct Silhouette {
    mask: Vec<bool>,
    width: usize,
    top: usize,
    bottom: usize,
}

impl Silhouette {
    fn extract(img: &GrayImage, cfg: &MeasureConfig) -> Option<Silhouette> {
        let mask: Vec<bool> = img
            .pixels()
            .iter()
            .map(|&p| {
                if cfg.foreground_dark {
                    p < cfg.threshold
                } else {
                    p > cfg.threshold
                }
            })
            .collect();
        let rows: Vec<usize> = (0..img.height())
            .filter(|&y| mask[y * img.width()..(y + 1) * img.width()].iter().any(|&b| b))
            .collect();
        Some(Silhouette {
            top: *rows.first()?,
            bottom: *rows.last()?,
            mask,
            width: img.width(),
        })
    }

    fn row_at(&self, fraction: f64) -> usize {
        let span = (self.bottom - self.top) as f64;
        self.top + (fraction.clamp(0.0, 1.0) * span).round() as usize
    }

    /// Longest run of foreground pixels in a row.
    fn run_width(&self, row: usize) -> usize {
        let line = &self.mask[row * self.width..(row + 1) * self.width];
        let (mut best, mut current) = (0, 0);
        for &on in line {
            current = if on { current + 1 } else { 0 };
            best = best.max(current);
        }
        best
    }
}

/// Estimates measurements from a silhouette at `ppcm` pixels per centimeter.
pub fn estimate_measurements(
    img: &GrayImage,
    ppcm: f64,
    cfg: &MeasureConfig,
) -> Result<BodyMeasurements, MeasureError> {
    if !(ppcm.is_finite() && ppcm > 0.0) {
        return Err(MeasureError::Calibration(ppcm));
    }
    let body = Silhouette::extract(img, cfg).ok_or(MeasureError::NoForeground)?;
    let mut out = BodyMeasurements {
        source: MeasurementSource::Detected,
        ..BodyMeasurements::default()
    };
    for &(field, landmark) in &cfg.landmarks {
        let value = match landmark {
            Landmark::Width { row } => body.run_width(body.row_at(row)) as f64 / ppcm,
            Landmark::Girth { row } => body.run_width(body.row_at(row)) as f64 / ppcm * cfg.girth_multiplier,
            Landmark::Span { from, to } => body.row_at(to).abs_diff(body.row_at(from)) as f64 / ppcm,
        };
        if value > 0.0 {
            out.set(field, Some(value));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_girth() -> MeasureConfig {
        MeasureConfig {
            girth_multiplier: 1.0,
            ..MeasureConfig::default()
        }
    }

    #[test]
    fn rectangle_silhouette_gives_equal_widths() {
        let img = GrayImage::from_fn(200, 300, |x, y| {
            if (50..150).contains(&x) && (20..280).contains(&y) {
                0
            } else {
                255
            }
        });
        let m = estimate_measurements(&img, 2.0, &unit_girth()).unwrap();
        for (field, landmark) in unit_girth().landmarks {
            if !matches!(landmark, Landmark::Span { .. }) {
                assert_eq!(m.get(field), Some(50.0), "{field}");
            }
        }
        assert_eq!(m.source, MeasurementSource::Detected);
        assert_eq!(m.upper_arm, None);
        // 259 rows between top and bottom, outside leg covers 0.52..1.0
        let legs = (279 - (20 + (0.52f64 * 259.0).round() as usize)) as f64 / 2.0;
        assert_eq!(m.outside_leg, Some(legs));
    }

    #[test]
    fn hourglass_waist_is_narrowest() {
        // width at each row: 120 at the bust row, 80 at the waist, 140 at the hips
        let (top, bottom) = (0usize, 200usize);
        let width_at = |y: usize| -> usize {
            let f = (y - top) as f64 / (bottom - top) as f64;
            if f < 0.34 {
                120
            } else if f < 0.46 {
                80
            } else {
                140
            }
        };
        let img = GrayImage::from_fn(200, 201, |x, y| {
            let w = width_at(y);
            let left = 100 - w / 2;
            if x >= left && x < left + w {
                0
            } else {
                255
            }
        });
        let m = estimate_measurements(&img, 1.0, &unit_girth()).unwrap();
        assert_eq!(m.bust, Some(120.0));
        assert_eq!(m.waist, Some(80.0));
        assert_eq!(m.hips, Some(140.0));
        assert!(m.waist < m.bust && m.waist < m.hips);
    }

    #[test]
    fn default_girth_multiplier() {
        let img = GrayImage::from_fn(60, 60, |x, _| if (10..50).contains(&x) { 0 } else { 255 });
        let m = estimate_measurements(&img, 1.0, &MeasureConfig::default()).unwrap();
        assert!((m.waist.unwrap() - 40.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(m.shoulder, Some(40.0));
    }

    #[test]
    fn blank_image_and_bad_calibration() {
        let blank = GrayImage::filled(20, 20, 255);
        assert_eq!(
            estimate_measurements(&blank, 1.0, &MeasureConfig::default()),
            Err(MeasureError::NoForeground)
        );
        let dot = GrayImage::filled(2, 2, 0);
        for cal in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                estimate_measurements(&dot, cal, &MeasureConfig::default()),
                Err(MeasureError::Calibration(_))
            ));
        }
    }

    #[test]
    fn manual_values_override_detected() {
        let detected = BodyMeasurements {
            waist: Some(70.0),
            hips: Some(90.0),
            source: MeasurementSource::Detected,
            ..Default::default()
        };
        let manual = BodyMeasurements::manual([(MeasurementField::Waist, 68.0)]);
        let merged = detected.with_overrides(&manual);
        assert_eq!(merged.waist, Some(68.0));
        assert_eq!(merged.hips, Some(90.0));
        assert_eq!(merged.source, MeasurementSource::Mixed);
    }

    #[test]
    fn field_names() {
        for f in MeasurementField::ALL {
            assert_eq!(f.as_str().parse::<MeasurementField>().unwrap(), f);
        }
        let json = serde_json::to_string(&BodyMeasurements::manual([(MeasurementField::OutsideLeg, 40.0)])).unwrap();
        assert!(json.contains(r#""outside_leg":40.0"#));
        assert!(json.contains(r#""source":"manual""#));
    }
}
