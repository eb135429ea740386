use serde::{Deserialize, Serialize};

use super::{GrayImage, VisionError};

/// Upright rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w > 0 && self.h > 0 && self.x + self.w <= width && self.y + self.h <= height
    }
}

/// Rectangle rotated by 45 degrees.
///
/// `(x, y)` is its topmost pixel. The rectangle extends `w` steps down-right
/// and `h` steps down-left and covers the `2·w·h` pixels `(i, j)` with
/// `(i - x) + (j - y)` in `0..2w` and `(j - y) - (i - x)` in `0..2h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TiltedRect {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

impl TiltedRect {
    pub fn new(x: i64, y: i64, w: i64, h: i64) -> Self {
        TiltedRect { x, y, w, h }
    }

    pub fn area(&self) -> i64 {
        2 * self.w * self.h
    }

    /// Inclusive pixel bounds `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (i64, i64, i64, i64) {
        (
            self.x - self.h + 1,
            self.y,
            self.x + self.w - 1,
            self.y + self.w + self.h - 1,
        )
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        let (x0, y0, x1, y1) = self.bounds();
        self.w > 0 && self.h > 0 && x0 >= 0 && y0 >= 0 && x1 < width as i64 && y1 < height as i64
    }
}

/// Summed-area table. Stored with a zero row and column in front so that
/// rectangle sums need no branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    sums: Vec<u64>,
}

pub fn integral_image(img: &GrayImage) -> IntegralImage {
    let (w, h) = (img.width(), img.height());
    let stride = w + 1;
    let mut sums = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += img.get(x, y) as u64;
            sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
        }
    }
    IntegralImage {
        width: w,
        height: h,
        sums,
    }
}

impl IntegralImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum of pixels `(i, j)` with `i <= x` and `j <= y`.
    pub fn at(&self, x: usize, y: usize) -> u64 {
        self.sums[(y + 1) * (self.width + 1) + x + 1]
    }

    /// Four-lookup rectangle sum.
    pub fn rect_sum(&self, rect: Rect) -> Result<u64, VisionError> {
        if !rect.fits(self.width, self.height) {
            return Err(VisionError::OutOfBounds(format!("{rect:?}")));
        }
        Ok(self.rect_sum_unchecked(rect))
    }

    #[inline]
    pub(crate) fn rect_sum_unchecked(&self, r: Rect) -> u64 {
        let s = self.width + 1;
        let (x0, y0, x1, y1) = (r.x, r.y, r.x + r.w, r.y + r.h);
        self.sums[y1 * s + x1] + self.sums[y0 * s + x0] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]
    }
}

/// Rotated summed-area table.
///
/// `at(x, y)` is the sum of pixels `(i, j)` with `j <= y` and
/// `|i - x| <= y - j`: the upward-opening triangle with apex at `(x, y)`.
/// Apexes outside the image still cover image pixels, so columns are
/// stored from `-(h + 1)` to `w + h`; beyond those every triangle misses
/// the image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotatedIntegralImage {
    width: usize,
    height: usize,
    offset: i64,
    stride: usize,
    // row 0 holds y = -1
    sums: Vec<i64>,
}

pub fn rotated_integral_image(img: &GrayImage) -> RotatedIntegralImage {
    let (w, h) = (img.width(), img.height());
    let offset = h as i64 + 1;
    let stride = w + 2 * h + 2;
    let mut rii = RotatedIntegralImage {
        width: w,
        height: h,
        offset,
        stride,
        sums: vec![0; stride * (h + 1)],
    };
    let pixel = |x: i64, y: i64| -> i64 {
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            img.get(x as usize, y as usize) as i64
        } else {
            0
        }
    };
    for y in 0..h as i64 {
        for col in 0..stride {
            let x = col as i64 - offset;
            let v = rii.at(x - 1, y - 1) + rii.at(x + 1, y - 1) - rii.at(x, y - 2) + pixel(x, y) + pixel(x, y - 1);
            rii.sums[(y as usize + 1) * stride + col] = v;
        }
    }
    rii
}

impl RotatedIntegralImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Triangle sum with apex `(x, y)`; zero above the image or beyond the
    /// stored columns.
    pub fn at(&self, x: i64, y: i64) -> i64 {
        if y < 0 {
            return 0;
        }
        assert!(y < self.height as i64, "row {y} below the image");
        let col = x + self.offset;
        if col < 0 || col >= self.stride as i64 {
            return 0;
        }
        self.sums[(y as usize + 1) * self.stride + col as usize]
    }

    /// Constant-time sum over a 45-degree rectangle.
    pub fn tilted_sum(&self, r: TiltedRect) -> Result<i64, VisionError> {
        if !r.fits(self.width, self.height) {
            return Err(VisionError::OutOfBounds(format!("{r:?}")));
        }
        Ok(self.tilted_sum_unchecked(r))
    }

    #[inline]
    pub(crate) fn tilted_sum_unchecked(&self, r: TiltedRect) -> i64 {
        let top = self.at(r.x, r.y - 1);
        let right = self.at(r.x + r.w, r.y - 1 + r.w);
        let left = self.at(r.x - r.h, r.y - 1 + r.h);
        let bottom = self.at(r.x + r.w - r.h, r.y - 1 + r.w + r.h);
        bottom - right - left + top
    }
}
