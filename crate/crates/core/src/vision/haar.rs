//! Haar-like features: signed sums of adjacent rectangles inside a
//! detection window.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::integral::{IntegralImage, Rect, RotatedIntegralImage, TiltedRect};
use super::VisionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    TwoRectHorizontal,
    TwoRectVertical,
    ThreeRect,
    FourRect,
    Tilted,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::TwoRectHorizontal => "two-rect-horizontal",
            FeatureKind::TwoRectVertical => "two-rect-vertical",
            FeatureKind::ThreeRect => "three-rect",
            FeatureKind::FourRect => "four-rect",
            FeatureKind::Tilted => "tilted",
        }
    }

    fn rect_count(self) -> Option<usize> {
        match self {
            FeatureKind::TwoRectHorizontal | FeatureKind::TwoRectVertical => Some(2),
            FeatureKind::ThreeRect => Some(3),
            FeatureKind::FourRect => Some(4),
            FeatureKind::Tilted => None,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = VisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            FeatureKind::TwoRectHorizontal,
            FeatureKind::TwoRectVertical,
            FeatureKind::ThreeRect,
            FeatureKind::FourRect,
            FeatureKind::Tilted,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| VisionError::InvalidFeature(format!("unknown feature kind `{s}`")))
    }
}

/// Window-relative rectangle with a +1 or -1 weight. For tilted features
/// the rectangle is read as a [`TiltedRect`] with the same fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedRect {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub weight: i64,
}

impl WeightedRect {
    pub fn new(x: i64, y: i64, w: i64, h: i64, weight: i64) -> Self {
        WeightedRect { x, y, w, h, weight }
    }

    fn area(&self, tilted: bool) -> i64 {
        if tilted {
            2 * self.w * self.h
        } else {
            self.w * self.h
        }
    }

    fn scaled(&self, scale: f64) -> WeightedRect {
        let s = |v: i64| (v as f64 * scale).floor() as i64;
        WeightedRect {
            x: s(self.x),
            y: s(self.y),
            w: s(self.w).max(1),
            h: s(self.h).max(1),
            weight: self.weight,
        }
    }

    fn tilted(&self) -> TiltedRect {
        TiltedRect::new(self.x, self.y, self.w, self.h)
    }

    fn fits(&self, tilted: bool, width: usize, height: usize) -> bool {
        if tilted {
            self.tilted().fits(width, height)
        } else {
            self.x >= 0
                && self.y >= 0
                && self.w > 0
                && self.h > 0
                && ((self.x + self.w) as usize) <= width
                && ((self.y + self.h) as usize) <= height
        }
    }
}

impl fmt::Display for WeightedRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{:+}", self.x, self.y, self.w, self.h, self.weight)
    }
}

impl FromStr for WeightedRect {
    type Err = VisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| VisionError::InvalidFeature(format!("bad rectangle `{s}`")))?;
        match parts[..] {
            [x, y, w, h, weight] => Ok(WeightedRect { x, y, w, h, weight }),
            _ => Err(VisionError::InvalidFeature(format!(
                "rectangle `{s}` must be x,y,w,h,weight"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarFeature {
    pub kind: FeatureKind,
    pub rects: Vec<WeightedRect>,
    /// Base window (width, height) the rectangles are relative to.
    pub window: (usize, usize),
}

/// Where a feature is evaluated: window origin in the image plus scale
/// relative to the base window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub x: usize,
    pub y: usize,
    pub scale: f64,
}

impl Placement {
    pub fn at(x: usize, y: usize) -> Self {
        Placement { x, y, scale: 1.0 }
    }

    pub fn scaled(x: usize, y: usize, scale: f64) -> Self {
        Placement { x, y, scale }
    }

    pub fn window_size(&self, base: (usize, usize)) -> (usize, usize) {
        (
            (base.0 as f64 * self.scale).round() as usize,
            (base.1 as f64 * self.scale).round() as usize,
        )
    }
}

impl HaarFeature {
    /// Checks rectangle count, weights, containment and balance.
    pub fn new(kind: FeatureKind, rects: Vec<WeightedRect>, window: (usize, usize)) -> Result<Self, VisionError> {
        let feature = HaarFeature { kind, rects, window };
        feature.validate()?;
        Ok(feature)
    }

    pub fn validate(&self) -> Result<(), VisionError> {
        let invalid = |msg: String| Err(VisionError::InvalidFeature(msg));
        if let Some(n) = self.kind.rect_count() {
            if self.rects.len() != n {
                return invalid(format!("{} needs {n} rectangles, got {}", self.kind, self.rects.len()));
            }
        } else if self.rects.is_empty() {
            return invalid("tilted feature without rectangles".into());
        }
        let tilted = self.is_tilted();
        for r in &self.rects {
            if r.weight != 1 && r.weight != -1 {
                return invalid(format!("weight {} is not +1 or -1", r.weight));
            }
            if !r.fits(tilted, self.window.0, self.window.1) {
                return invalid(format!(
                    "rectangle {r} leaves the {}x{} window",
                    self.window.0, self.window.1
                ));
            }
        }
        if !tilted {
            let balance: i64 = self.rects.iter().map(|r| r.weight * r.area(false)).sum();
            if balance != 0 {
                return invalid(format!("weighted areas do not cancel (sum {balance})"));
            }
        }
        Ok(())
    }

    pub fn is_tilted(&self) -> bool {
        self.kind == FeatureKind::Tilted
    }

    /// Left `+1`, right `-1`; each half `w x h`.
    pub fn two_rect_horizontal(x: i64, y: i64, w: i64, h: i64, window: (usize, usize)) -> Result<Self, VisionError> {
        HaarFeature::new(
            FeatureKind::TwoRectHorizontal,
            vec![WeightedRect::new(x, y, w, h, 1), WeightedRect::new(x + w, y, w, h, -1)],
            window,
        )
    }

    /// Top `+1`, bottom `-1`; each half `w x h`.
    pub fn two_rect_vertical(x: i64, y: i64, w: i64, h: i64, window: (usize, usize)) -> Result<Self, VisionError> {
        HaarFeature::new(
            FeatureKind::TwoRectVertical,
            vec![WeightedRect::new(x, y, w, h, 1), WeightedRect::new(x, y + h, w, h, -1)],
            window,
        )
    }

    /// Outer bands `w` wide at `+1`, centre band `2w` wide at `-1`.
    pub fn three_rect(x: i64, y: i64, w: i64, h: i64, window: (usize, usize)) -> Result<Self, VisionError> {
        HaarFeature::new(
            FeatureKind::ThreeRect,
            vec![
                WeightedRect::new(x, y, w, h, 1),
                WeightedRect::new(x + w, y, 2 * w, h, -1),
                WeightedRect::new(x + 3 * w, y, w, h, 1),
            ],
            window,
        )
    }

    /// 2x2 checkerboard, top-left and bottom-right at `+1`.
    pub fn four_rect(x: i64, y: i64, w: i64, h: i64, window: (usize, usize)) -> Result<Self, VisionError> {
        HaarFeature::new(
            FeatureKind::FourRect,
            vec![
                WeightedRect::new(x, y, w, h, 1),
                WeightedRect::new(x + w, y, w, h, -1),
                WeightedRect::new(x, y + h, w, h, -1),
                WeightedRect::new(x + w, y + h, w, h, 1),
            ],
            window,
        )
    }

    /// Two tilted rectangles adjacent along the down-right axis.
    pub fn tilted_edge(x: i64, y: i64, w: i64, h: i64, window: (usize, usize)) -> Result<Self, VisionError> {
        HaarFeature::new(
            FeatureKind::Tilted,
            vec![
                WeightedRect::new(x, y, w, h, 1),
                WeightedRect::new(x + w, y + w, w, h, -1),
            ],
            window,
        )
    }

    /// Σ weight · rectangle sum, rectangles scaled and offset by the
    /// placement.
    pub fn value(&self, ii: &IntegralImage, rii: &RotatedIntegralImage, at: Placement) -> Result<i64, VisionError> {
        let (ww, wh) = at.window_size(self.window);
        if at.x + ww > ii.width() || at.y + wh > ii.height() {
            return Err(VisionError::OutOfBounds(format!(
                "{ww}x{wh} window at ({}, {}) leaves the {}x{} image",
                at.x,
                at.y,
                ii.width(),
                ii.height()
            )));
        }
        let tilted = self.is_tilted();
        let mut total = 0i64;
        for r in &self.rects {
            let s = r.scaled(at.scale);
            if !s.fits(tilted, ww, wh) {
                return Err(VisionError::OutOfBounds(format!(
                    "scaled rectangle {s} leaves the {ww}x{wh} window"
                )));
            }
            let (ox, oy) = (at.x as i64, at.y as i64);
            let sum = if tilted {
                rii.tilted_sum_unchecked(TiltedRect::new(s.x + ox, s.y + oy, s.w, s.h))
            } else {
                ii.rect_sum_unchecked(Rect::new(
                    (s.x + ox) as usize,
                    (s.y + oy) as usize,
                    s.w as usize,
                    s.h as usize,
                )) as i64
            };
            total += s.weight * sum;
        }
        Ok(total)
    }
}

/// Free-function form of [`HaarFeature::value`].
pub fn feature_value(
    ii: &IntegralImage,
    rii: &RotatedIntegralImage,
    feature: &HaarFeature,
    at: Placement,
) -> Result<i64, VisionError> {
    feature.value(ii, rii, at)
}
