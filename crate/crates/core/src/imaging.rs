//! Raster types and PGM (Netpbm P2/P5) input/output.
//!
//! Two raster types flow through the pipeline: [`GrayImage`] (8-bit
//! grayscale, the scanner-side input) and [`BinaryImage`] (0/1, used for
//! both the binarized and the thinned stage). The internal binary
//! convention is ridge = 1, background = 0; on disk a binary image is a
//! maxval-255 PGM with ridge pixels stored as 255.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::minutiae::{MinutiaType, MinutiaeSet};

/// Errors from image loading, saving, and overlay rendering.
#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("file not found: {}", path.display())]
    FileNotFound { path: PathBuf },
    #[error("unsupported format in {}: magic {magic:?} (want P2 or P5)", path.display())]
    UnsupportedFormat { path: PathBuf, magic: String },
    #[error("malformed header in {} at byte {offset}: {reason}", path.display())]
    MalformedHeader {
        path: PathBuf,
        offset: usize,
        reason: String,
    },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("minutia at ({row}, {col}) outside {width}x{height} raster")]
    OutOfBounds {
        row: f64,
        col: f64,
        width: usize,
        height: usize,
    },
}

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

/// 0/1 raster, row-major. 1 = ridge (foreground), 0 = background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Builds an image from row-major pixel data.
    ///
    /// Panics if `pixels.len() != width * height` or either dimension is 0;
    /// those are programming errors, not data errors.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        assert_eq!(pixels.len(), width * height, "pixel count mismatch");
        Self {
            width,
            height,
            pixels,
        }
    }

    /// All-background (255, white) canvas.
    pub fn blank(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![255; width * height])
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
    pub fn get(&self, row: usize, col: usize) -> u8 {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col] = value;
    }

    /// Mean intensity, rounded to the nearest integer. Used by the
    /// automatic threshold mode.
    pub fn mean_intensity(&self) -> u8 {
        let sum: u64 = self.pixels.iter().map(|&p| p as u64).sum();
        let n = self.pixels.len() as u64;
        ((sum + n / 2) / n) as u8
    }

    /// Loads a PGM (P2 or P5) file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ImageError> {
        let path = path.as_ref();
        let bytes = read_file(path)?;
        decode_pgm(&bytes, path)
    }

    /// Saves as binary PGM (P5, maxval 255).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let path = path.as_ref();
        write_pgm(path, self.width, self.height, &self.pixels)
    }
}

impl BinaryImage {
    /// Builds a binary image from row-major 0/1 data.
    ///
    /// Panics on dimension mismatch or a value outside {0, 1}.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        assert_eq!(pixels.len(), width * height, "pixel count mismatch");
        assert!(
            pixels.iter().all(|&p| p <= 1),
            "binary pixel outside {{0,1}}"
        );
        Self {
            width,
            height,
            pixels,
        }
    }

    /// All-background canvas.
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width * height],
        }
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
    pub fn get(&self, row: usize, col: usize) -> u8 {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        debug_assert!(row < self.height && col < self.width);
        debug_assert!(value <= 1);
        self.pixels[row * self.width + col] = value;
    }

    /// True if the pixel is a ridge pixel; out-of-range coordinates read
    /// as background, which keeps neighborhood scans edge-safe.
    #[inline]
    pub fn is_ridge(&self, row: i64, col: i64) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.pixels[row as usize * self.width + col as usize] == 1
    }

    /// Number of ridge pixels.
    pub fn ridge_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1).count()
    }

    /// Flips every pixel 0 <-> 1. Terminations of the result correspond to
    /// bifurcations of the original, which is how bifurcation angles are
    /// computed.
    pub fn invert(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| 1 - p).collect(),
        }
    }

    /// Widens to grayscale with ridge pixels at 255.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::new(
            self.width,
            self.height,
            self.pixels
                .iter()
                .map(|&p| if p == 1 { 255 } else { 0 })
                .collect(),
        )
    }

    /// Reads a PGM and treats every nonzero pixel as ridge. Round-trips
    /// the output of [`BinaryImage::save`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ImageError> {
        let gray = GrayImage::load(path)?;
        Ok(Self {
            width: gray.width,
            height: gray.height,
            pixels: gray.pixels.iter().map(|&p| u8::from(p > 0)).collect(),
        })
    }

    /// Saves as binary PGM with ridge pixels stored as 255.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        self.to_gray().save(path)
    }
}

impl fmt::Display for BinaryImage {
    /// Compact ASCII dump ('#' = ridge), handy in test failure output.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            for c in 0..self.width {
                f.write_str(if self.get(r, c) == 1 { "#" } else { "." })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, ImageError> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ImageError::FileNotFound {
                path: path.to_path_buf(),
            }
        } else {
            ImageError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn malformed(&self, reason: impl Into<String>) -> ImageError {
        ImageError::MalformedHeader {
            path: self.path.to_path_buf(),
            offset: self.pos,
            reason: reason.into(),
        }
    }

    /// Skips whitespace and `#` comments (comment runs to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<u64, ImageError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.malformed(format!("expected {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<u64>()
            .map_err(|_| self.malformed(format!("{what} out of range: {text}")))
    }
}

/// Decodes PGM bytes. Maxval other than 255 is rescaled to [0, 255] by
/// rounded integer proportion so the in-memory contract stays 8-bit.
fn decode_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::MalformedHeader {
            path: path.to_path_buf(),
            offset: 0,
            reason: "file shorter than a magic number".into(),
        });
    }
    let magic = &bytes[..2];
    if magic != b"P2" && magic != b"P5" {
        return Err(ImageError::UnsupportedFormat {
            path: path.to_path_buf(),
            magic: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    let binary = magic == b"P5";
    let mut cur = Cursor {
        bytes,
        pos: 2,
        path,
    };

    let width = cur.read_uint("width")? as usize;
    let height = cur.read_uint("height")? as usize;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.malformed(format!("degenerate dimensions {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(cur.malformed(format!("maxval {maxval} outside 1..=65535")));
    }

    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(cur.malformed("expected single whitespace before raster data"));
        }
        cur.pos += 1;
        let sample_bytes = if maxval > 255 { 2 } else { 1 };
        let need = n * sample_bytes;
        let body = &bytes[cur.pos.min(bytes.len())..];
        if body.len() < need {
            return Err(cur.malformed(format!(
                "raster truncated: need {need} bytes, have {}",
                body.len()
            )));
        }
        for i in 0..n {
            let v = if sample_bytes == 2 {
                u64::from(u16::from_be_bytes([body[2 * i], body[2 * i + 1]]))
            } else {
                u64::from(body[i])
            };
            if v > maxval {
                cur.pos += i * sample_bytes;
                return Err(cur.malformed(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(rescale(v, maxval));
        }
    } else {
        for _ in 0..n {
            let v = cur.read_uint("pixel value")?;
            if v > maxval {
                return Err(cur.malformed(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(rescale(v, maxval));
        }
    }
    Ok(GrayImage::new(width, height, pixels))
}

#[inline]
fn rescale(v: u64, maxval: u64) -> u8 {
    if maxval == 255 {
        v as u8
    } else {
        ((v * 255 + maxval / 2) / maxval) as u8
    }
}

fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<(), ImageError> {
    let io_err = |source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = Vec::with_capacity(pixels.len() + 32);
    write!(out, "P5\n{width} {height}\n255\n").expect("write to Vec");
    out.extend_from_slice(pixels);
    fs::write(path, out).map_err(io_err)
}

/// Marker half-size: markers are 5x5, centered on the minutia.
const MARKER_RADIUS: i64 = 2;

/// Draws the extracted minutiae over a grayscale image and writes the
/// result as PGM: a hollow square for each termination, a hollow diamond
/// for each bifurcation, both in intensity 0. Marker arms that stick out
/// of the raster are clipped, but every minutia center must be in bounds.
pub fn render_overlay(
    img: &GrayImage,
    minutiae: &MinutiaeSet,
    path: impl AsRef<Path>,
) -> Result<(), ImageError> {
    let out = draw_overlay(img, minutiae)?;
    out.save(path)
}

/// Overlay rendering without the file write; exposed for tests.
pub fn draw_overlay(img: &GrayImage, minutiae: &MinutiaeSet) -> Result<GrayImage, ImageError> {
    let mut out = img.clone();
    let (h, w) = (img.height() as i64, img.width() as i64);
    for m in minutiae.iter() {
        let r0 = m.row.round() as i64;
        let c0 = m.col.round() as i64;
        if r0 < 0 || r0 >= h || c0 < 0 || c0 >= w {
            return Err(ImageError::OutOfBounds {
                row: m.row,
                col: m.col,
                width: img.width(),
                height: img.height(),
            });
        }
        for dr in -MARKER_RADIUS..=MARKER_RADIUS {
            for dc in -MARKER_RADIUS..=MARKER_RADIUS {
                let on_marker = match m.mtype {
                    // Hollow square: the 5x5 ring.
                    MinutiaType::Termination => {
                        dr.abs() == MARKER_RADIUS || dc.abs() == MARKER_RADIUS
                    }
                    // Hollow diamond: constant L1 distance.
                    MinutiaType::Bifurcation => dr.abs() + dc.abs() == MARKER_RADIUS,
                };
                if !on_marker {
                    continue;
                }
                let (r, c) = (r0 + dr, c0 + dc);
                if r >= 0 && r < h && c >= 0 && c < w {
                    out.set(r as usize, c as usize, 0);
                }
            }
        }
    }
    Ok(out)
}
