//! Stage cascades of thresholded Haar features and their text format.
//!
//! ```text
//! # comment
//! window 12 12
//! stage 1.0
//! feat two-rect-vertical 2,2,8,3,-1 2,5,8,3,+1 40 1 1.0
//! ```
//!
//! A `feat` line is `feat <kind> <rect>... <threshold> <polarity> <weight>`
//! with each rect written `x,y,w,h,weight`.

use std::fmt::Write as _;

use super::haar::{FeatureKind, HaarFeature, Placement, WeightedRect};
use super::integral::{IntegralImage, RotatedIntegralImage};
use super::VisionError;

/// A feature vote. Feature values are divided by the window's area ratio to
/// the base window before comparison, so thresholds hold at every scale.
/// The vote fires when `polarity · value >= polarity · threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakClassifier {
    pub feature: HaarFeature,
    pub threshold: f64,
    pub polarity: i8,
    pub weight: f64,
}

impl WeakClassifier {
    pub fn fires(&self, normalized: f64) -> bool {
        let p = self.polarity as f64;
        p * normalized >= p * self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub threshold: f64,
    pub classifiers: Vec<WeakClassifier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeClassifier {
    pub window: (usize, usize),
    pub stages: Vec<Stage>,
}

impl CascadeClassifier {
    pub fn new(window: (usize, usize), stages: Vec<Stage>) -> Result<Self, VisionError> {
        let cascade = CascadeClassifier { window, stages };
        cascade.validate()?;
        Ok(cascade)
    }

    pub fn validate(&self) -> Result<(), VisionError> {
        if self.window.0 == 0 || self.window.1 == 0 {
            return Err(VisionError::InvalidCascade("empty base window".into()));
        }
        if self.stages.is_empty() {
            return Err(VisionError::InvalidCascade("cascade has no stages".into()));
        }
        for stage in &self.stages {
            for weak in &stage.classifiers {
                if weak.feature.window != self.window {
                    return Err(VisionError::InvalidCascade(
                        "feature window differs from the cascade window".into(),
                    ));
                }
                if weak.polarity != 1 && weak.polarity != -1 {
                    return Err(VisionError::InvalidCascade(format!(
                        "polarity {} is not +1 or -1",
                        weak.polarity
                    )));
                }
                weak.feature.validate()?;
            }
        }
        Ok(())
    }

    /// Runs every stage on one window. Returns the summed votes when all
    /// stages pass.
    pub fn evaluate(
        &self,
        ii: &IntegralImage,
        rii: &RotatedIntegralImage,
        at: Placement,
    ) -> Result<Option<f64>, VisionError> {
        let (ww, wh) = at.window_size(self.window);
        let area_ratio = (ww * wh) as f64 / (self.window.0 * self.window.1) as f64;
        let mut score = 0.0;
        for stage in &self.stages {
            let mut votes = 0.0;
            for weak in &stage.classifiers {
                let value = weak.feature.value(ii, rii, at)? as f64 / area_ratio;
                if weak.fires(value) {
                    votes += weak.weight;
                }
            }
            if votes < stage.threshold {
                return Ok(None);
            }
            score += votes;
        }
        Ok(Some(score))
    }

    pub fn parse(source: &str) -> Result<Self, VisionError> {
        let mut window: Option<(usize, usize)> = None;
        let mut stages: Vec<Stage> = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| VisionError::CascadeSyntax { line, message: msg };
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = text.split_whitespace().collect();
            match tokens[0] {
                "window" => {
                    let [_, w, h] = tokens[..] else {
                        return Err(err("expected `window <w> <h>`".into()));
                    };
                    let w = w.parse().map_err(|_| err(format!("bad width `{w}`")))?;
                    let h = h.parse().map_err(|_| err(format!("bad height `{h}`")))?;
                    window = Some((w, h));
                }
                "stage" => {
                    if window.is_none() {
                        return Err(err("`stage` before `window`".into()));
                    }
                    let [_, t] = tokens[..] else {
                        return Err(err("expected `stage <threshold>`".into()));
                    };
                    let threshold = t.parse().map_err(|_| err(format!("bad threshold `{t}`")))?;
                    stages.push(Stage {
                        threshold,
                        classifiers: Vec::new(),
                    });
                }
                "feat" => {
                    let window = window.ok_or_else(|| err("`feat` before `window`".into()))?;
                    let stage = stages
                        .last_mut()
                        .ok_or_else(|| err("`feat` before any `stage`".into()))?;
                    if tokens.len() < 6 {
                        return Err(err(
                            "expected `feat <kind> <rect>... <threshold> <polarity> <weight>`".into()
                        ));
                    }
                    let n = tokens.len();
                    let kind: FeatureKind = tokens[1].parse().map_err(|e: VisionError| err(e.to_string()))?;
                    let rects = tokens[2..n - 3]
                        .iter()
                        .map(|t| t.parse::<WeightedRect>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| err(e.to_string()))?;
                    let feature = HaarFeature::new(kind, rects, window).map_err(|e| err(e.to_string()))?;
                    let threshold = tokens[n - 3]
                        .parse()
                        .map_err(|_| err(format!("bad threshold `{}`", tokens[n - 3])))?;
                    let polarity: i8 = tokens[n - 2]
                        .parse()
                        .map_err(|_| err(format!("bad polarity `{}`", tokens[n - 2])))?;
                    let weight = tokens[n - 1]
                        .parse()
                        .map_err(|_| err(format!("bad weight `{}`", tokens[n - 1])))?;
                    stage.classifiers.push(WeakClassifier {
                        feature,
                        threshold,
                        polarity,
                        weight,
                    });
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let window = window.ok_or_else(|| VisionError::InvalidCascade("missing `window` line".into()))?;
        CascadeClassifier::new(window, stages)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("window {} {}\n", self.window.0, self.window.1);
        for stage in &self.stages {
            let _ = writeln!(out, "stage {}", stage.threshold);
            for weak in &stage.classifiers {
                let rects: Vec<String> = weak.feature.rects.iter().map(ToString::to_string).collect();
                let _ = writeln!(
                    out,
                    "feat {} {} {} {} {}",
                    weak.feature.kind,
                    rects.join(" "),
                    weak.threshold,
                    weak.polarity,
                    weak.weight
                );
            }
        }
        out
    }
}
