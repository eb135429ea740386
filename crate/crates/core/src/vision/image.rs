use std::fmt::Write as _;

use super::VisionError;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, VisionError> {
        if width == 0 || height == 0 {
            return Err(VisionError::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(VisionError::PixelCount {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Copies `patch` with its top-left corner at (x, y), clipping at the
    /// borders.
    pub fn paste(&mut self, patch: &GrayImage, x: usize, y: usize) {
        for py in 0..patch.height {
            for px in 0..patch.width {
                let (tx, ty) = (x + px, y + py);
                if tx < self.width && ty < self.height {
                    self.set(tx, ty, patch.get(px, py));
                }
            }
        }
    }

    /// Decodes binary (P5) or ASCII (P2) PGM. Maxval must not exceed 255.
    pub fn from_pgm(data: &[u8]) -> Result<Self, VisionError> {
        let mut cursor = PgmCursor { data, pos: 0 };
        let magic = cursor.token()?;
        let binary = match magic.as_str() {
            "P5" => true,
            "P2" => false,
            other => return Err(VisionError::Pgm(format!("unsupported magic `{other}`"))),
        };
        let width = cursor.number()?;
        let height = cursor.number()?;
        let maxval = cursor.number()?;
        if maxval == 0 || maxval > 255 {
            return Err(VisionError::Pgm(format!("maxval {maxval} outside 1..=255")));
        }
        let count = width * height;
        let pixels = if binary {
            // exactly one whitespace byte separates the header from the raster
            let start = cursor.pos + 1;
            let raster = data
                .get(start..start + count)
                .ok_or_else(|| VisionError::Pgm("truncated raster".into()))?;
            raster.to_vec()
        } else {
            let mut pixels = Vec::with_capacity(count);
            for _ in 0..count {
                let v = cursor.number()?;
                if v > maxval {
                    return Err(VisionError::Pgm(format!("sample {v} exceeds maxval {maxval}")));
                }
                pixels.push(v as u8);
            }
            pixels
        };
        let pixels = if maxval == 255 {
            pixels
        } else {
            pixels
                .into_iter()
                .map(|v| ((v as usize * 255 + maxval / 2) / maxval) as u8)
                .collect()
        };
        GrayImage::new(width, height, pixels)
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn to_ascii_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

struct PgmCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl PgmCursor<'_> {
    fn token(&mut self) -> Result<String, VisionError> {
        loop {
            match self.data.get(self.pos) {
                Some(b'#') => {
                    while self.data.get(self.pos).is_some_and(|&b| b != b'\n') {
                        self.pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(_) => break,
                None => return Err(VisionError::Pgm("unexpected end of header".into())),
            }
        }
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        Ok(String::from_utf8_lossy(&self.data[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize, VisionError> {
        let token = self.token()?;
        token
            .parse()
            .map_err(|_| VisionError::Pgm(format!("expected a number, got `{token}`")))
    }
}
