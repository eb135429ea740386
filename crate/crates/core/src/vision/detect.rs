//! Multi-scale sliding-window detection.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::cascade::CascadeClassifier;
use super::haar::Placement;
use super::integral::{integral_image, rotated_integral_image};
use super::{GrayImage, VisionError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub score: f64,
}

impl Detection {
    pub fn iou(&self, other: &Detection) -> f64 {
        let ix = (self.x + self.w)
            .min(other.x + other.w)
            .saturating_sub(self.x.max(other.x));
        let iy = (self.y + self.h)
            .min(other.y + other.h)
            .saturating_sub(self.y.max(other.y));
        let inter = (ix * iy) as f64;
        let union = (self.w * self.h + other.w * other.h) as f64 - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

impl fmt::Display for Detection {
    /// `x y w h score`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {:.3}", self.x, self.y, self.w, self.h, self.score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanParams {
    /// Window growth per scale step, > 1.
    pub scale_factor: f64,
    /// Window shift in pixels at every scale, >= 1.
    pub step: usize,
    /// Smallest window width to scan; defaults to the cascade window.
    pub min_window: Option<usize>,
    pub max_window: Option<usize>,
    /// Boxes overlapping above this intersection-over-union are merged.
    pub group_iou: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            scale_factor: 1.25,
            step: 2,
            min_window: None,
            max_window: None,
            group_iou: 0.4,
        }
    }
}

/// Scans scales (outer), rows, then columns; windows passing every stage
/// are grouped and returned sorted by position.
pub fn detect(img: &GrayImage, cascade: &CascadeClassifier, scan: &ScanParams) -> Result<Vec<Detection>, VisionError> {
    Ok(group(&raw_detections(img, cascade, scan)?, scan.group_iou))
}

/// Every accepted window before grouping, in scan order.
pub fn raw_detections(
    img: &GrayImage,
    cascade: &CascadeClassifier,
    scan: &ScanParams,
) -> Result<Vec<Detection>, VisionError> {
    if !(scan.scale_factor.is_finite() && scan.scale_factor > 1.0) {
        return Err(VisionError::InvalidScan(format!(
            "scale factor {} must exceed 1",
            scan.scale_factor
        )));
    }
    if scan.step == 0 {
        return Err(VisionError::InvalidScan("step must be at least 1".into()));
    }
    let (bw, bh) = cascade.window;
    let ii = integral_image(img);
    let rii = rotated_integral_image(img);
    let mut out = Vec::new();

    let mut scale = 1.0f64;
    loop {
        let at = Placement::scaled(0, 0, scale);
        let (ww, wh) = at.window_size((bw, bh));
        if ww > img.width() || wh > img.height() || scan.max_window.is_some_and(|m| ww > m) {
            break;
        }
        if scan.min_window.is_none_or(|m| ww >= m) {
            for y in (0..=img.height() - wh).step_by(scan.step) {
                for x in (0..=img.width() - ww).step_by(scan.step) {
                    if let Some(score) = cascade.evaluate(&ii, &rii, Placement::scaled(x, y, scale))? {
                        out.push(Detection {
                            x,
                            y,
                            w: ww,
                            h: wh,
                            score,
                        });
                    }
                }
            }
        }
        scale *= scan.scale_factor;
    }
    Ok(out)
}

/// Merges boxes whose IoU exceeds `threshold` (transitively) into their
/// coordinate-wise lower median; the group keeps its best score.
pub fn group(boxes: &[Detection], threshold: f64) -> Vec<Detection> {
    let n = boxes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if boxes[i].iou(&boxes[j]) > threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<&Detection>> = Default::default();
    for (i, b) in boxes.iter().enumerate() {
        let root = find(&mut parent, i);
        clusters.entry(root).or_default().push(b);
    }
    let median = |mut v: Vec<usize>| {
        v.sort_unstable();
        v[(v.len() - 1) / 2]
    };
    let mut out: Vec<Detection> = clusters
        .into_values()
        .map(|members| Detection {
            x: median(members.iter().map(|d| d.x).collect()),
            y: median(members.iter().map(|d| d.y).collect()),
            w: median(members.iter().map(|d| d.w).collect()),
            h: median(members.iter().map(|d| d.h).collect()),
            score: members.iter().map(|d| d.score).fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    out.sort_by_key(|d| (d.y, d.x, d.h, d.w));
    out
}
