//! Grayscale-to-skeleton preprocessing: binarization, boundary whitening,
//! and morphological thinning.
//!
//! The internal binary convention is ridge = 1. That inverts the usual
//! scan convention (ridges are dark, so on disk they are *low* intensity);
//! binarization performs the flip, and everything downstream works on
//! foreground-as-1 rasters so crossing-number sums read off directly.

use crate::imaging::{BinaryImage, GrayImage};

/// Errors from the preprocessing stages.
#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error(
        "margin {margin} too large for {width}x{height} image (need 2*margin < min dimension)"
    )]
    MarginTooLarge {
        margin: usize,
        width: usize,
        height: usize,
    },
    #[error("thinning did not converge within {iterations} iterations")]
    IterationLimitExceeded { iterations: usize },
}

/// Binarization settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinarizeConfig {
    /// Intensity cutoff: a pixel becomes ridge iff its intensity is
    /// strictly below this value.
    pub threshold: u8,
}

impl Default for BinarizeConfig {
    fn default() -> Self {
        Self { threshold: 128 }
    }
}

impl BinarizeConfig {
    /// Automatic threshold: the image's mean intensity. This is an
    /// extension over the fixed manual cutoff, useful for scans with
    /// uneven exposure.
    pub fn auto(img: &GrayImage) -> Self {
        Self {
            threshold: img.mean_intensity(),
        }
    }
}

/// Thinning settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThinConfig {
    /// Boundary band cleared before thinning (applied via
    /// [`whiten_boundary`]).
    pub boundary_margin: usize,
    /// Safety bound on thinning rounds; `None` means 2*max(width, height),
    /// which far exceeds what any real raster needs.
    pub max_iterations: Option<usize>,
}

impl Default for ThinConfig {
    fn default() -> Self {
        Self {
            boundary_margin: 5,
            max_iterations: None,
        }
    }
}

/// Thresholds a grayscale image: ridge (1) iff intensity < threshold.
/// The tie at intensity == threshold goes to background.
pub fn binarize(img: &GrayImage, cfg: &BinarizeConfig) -> BinaryImage {
    BinaryImage::new(
        img.width(),
        img.height(),
        img.pixels()
            .iter()
            .map(|&p| u8::from(p < cfg.threshold))
            .collect(),
    )
}

/// Clears a `margin`-pixel band along all four edges to background.
pub fn whiten_boundary(img: &BinaryImage, margin: usize) -> Result<BinaryImage, PreprocessError> {
    let (w, h) = (img.width(), img.height());
    if margin > 0 && 2 * margin >= w.min(h) {
        return Err(PreprocessError::MarginTooLarge {
            margin,
            width: w,
            height: h,
        });
    }
    let mut out = img.clone();
    for r in 0..h {
        for c in 0..w {
            if r < margin || r >= h - margin || c < margin || c >= w - margin {
                out.set(r, c, 0);
            }
        }
    }
    Ok(out)
}

/// Neighborhood offsets in the conventional cyclic order, starting north
/// and going clockwise: N, NE, E, SE, S, SW, W, NW.
pub(crate) const NEIGHBOR_OFFSETS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

#[inline]
pub(crate) fn neighbor_ring(img: &BinaryImage, row: i64, col: i64) -> [bool; 8] {
    let mut ring = [false; 8];
    for (i, (dr, dc)) in NEIGHBOR_OFFSETS.iter().enumerate() {
        ring[i] = img.is_ridge(row + dr, col + dc);
    }
    ring
}

#[inline]
fn ridge_count(ring: &[bool; 8]) -> u32 {
    ring.iter().map(|&b| u32::from(b)).sum()
}

/// Number of 0->1 transitions around the cyclic neighbor sequence.
#[inline]
fn transitions(ring: &[bool; 8]) -> u32 {
    (0..8).filter(|&i| !ring[i] && ring[(i + 1) % 8]).count() as u32
}

#[derive(Clone, Copy)]
enum Subpass {
    First,
    Second,
}

/// Zhang-Suen deletion conditions for one subpass. Ring indices: 0 = N,
/// 2 = E, 4 = S, 6 = W.
#[inline]
fn deletable(ring: &[bool; 8], pass: Subpass) -> bool {
    let b = ridge_count(ring);
    if !(2..=6).contains(&b) || transitions(ring) != 1 {
        return false;
    }
    match pass {
        Subpass::First => !(ring[0] && ring[2] && ring[4]) && !(ring[2] && ring[4] && ring[6]),
        Subpass::Second => !(ring[0] && ring[2] && ring[6]) && !(ring[0] && ring[4] && ring[6]),
    }
}

/// One subpass in row-major order with immediate deletion: each pixel's
/// conditions see earlier deletions from the same sweep. Deleting only
/// pixels whose transition count is 1 makes every removal topology-safe,
/// which the classic simultaneous-update formulation does not guarantee
/// (it erases an isolated 2x2 block outright).
fn subpass(img: &mut BinaryImage, pass: Subpass) -> usize {
    let mut deleted = 0;
    for r in 0..img.height() as i64 {
        for c in 0..img.width() as i64 {
            if img.is_ridge(r, c) && deletable(&neighbor_ring(img, r, c), pass) {
                img.set(r as usize, c as usize, 0);
                deleted += 1;
            }
        }
    }
    deleted
}

/// Top-left corner of the first all-ridge 2x2 block, if any.
pub(crate) fn find_square_block(img: &BinaryImage) -> Option<(usize, usize)> {
    for r in 0..img.height().saturating_sub(1) {
        for c in 0..img.width().saturating_sub(1) {
            if img.get(r, c) == 1
                && img.get(r, c + 1) == 1
                && img.get(r + 1, c) == 1
                && img.get(r + 1, c + 1) == 1
            {
                return Some((r, c));
            }
        }
    }
    None
}

/// Number of 8-connected ridge components.
pub fn ridge_components(img: &BinaryImage) -> usize {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if img.pixels()[start] == 0 || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (r, c) = ((idx / w) as i64, (idx % w) as i64);
            for (dr, dc) in NEIGHBOR_OFFSETS {
                let (nr, nc) = (r + dr, c + dc);
                if img.is_ridge(nr, nc) {
                    let nidx = nr as usize * w + nc as usize;
                    if !seen[nidx] {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
    }
    components
}

/// Dismantles residual 2x2 blocks left at the subpass fixpoint (staircase
/// corners, mostly). Each candidate deletion is verified to keep the
/// component count unchanged before it is accepted; a block with no safe
/// deletion is left alone and the caller's iteration bound turns that
/// into an error.
fn clear_square_blocks(img: &mut BinaryImage) -> usize {
    let mut removed = 0;
    let mut resume = (0, 0);
    loop {
        let block = {
            let mut found = None;
            'scan: for r in resume.0..img.height().saturating_sub(1) {
                let c0 = if r == resume.0 { resume.1 } else { 0 };
                for c in c0..img.width().saturating_sub(1) {
                    if img.get(r, c) == 1
                        && img.get(r, c + 1) == 1
                        && img.get(r + 1, c) == 1
                        && img.get(r + 1, c + 1) == 1
                    {
                        found = Some((r, c));
                        break 'scan;
                    }
                }
            }
            found
        };
        let Some((r, c)) = block else { break };
        let before = ridge_components(img);
        let mut fixed = false;
        for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            img.set(r + dr, c + dc, 0);
            if ridge_components(img) == before {
                removed += 1;
                fixed = true;
                break;
            }
            img.set(r + dr, c + dc, 1);
        }
        if fixed {
            // A deletion can expose a block up-left of the current scan
            // position, so restart conservatively.
            resume = (r.saturating_sub(1), 0);
        } else {
            // Skip past the stuck block so the scan terminates.
            resume = if c + 1 < img.width() - 1 {
                (r, c + 1)
            } else {
                (r + 1, 0)
            };
        }
    }
    removed
}

/// Thins a binary image to a one-pixel-wide skeleton.
///
/// Applies [`whiten_boundary`] with the configured margin, then iterates
/// two-subpass neighborhood thinning (Zhang-Suen conditions, sequential
/// deletion) to a fixpoint, then clears any residual 2x2 ridge blocks.
/// The result contains no all-ridge 2x2 block, is a subset of the input
/// ridge pixels, preserves the 8-connected component count, and is a
/// fixed point of the whole operation.
pub fn thin(img: &BinaryImage, cfg: &ThinConfig) -> Result<BinaryImage, PreprocessError> {
    let mut out = whiten_boundary(img, cfg.boundary_margin)?;
    let limit = cfg
        .max_iterations
        .unwrap_or(2 * img.width().max(img.height()))
        .max(1);
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > limit {
            return Err(PreprocessError::IterationLimitExceeded { iterations: limit });
        }
        let deleted = subpass(&mut out, Subpass::First) + subpass(&mut out, Subpass::Second);
        if deleted > 0 {
            continue;
        }
        if clear_square_blocks(&mut out) > 0 {
            continue;
        }
        if find_square_block(&out).is_some() {
            // No safe deletion exists; keep looping so the bound reports
            // the failure instead of returning a bad skeleton.
            continue;
        }
        return Ok(out);
    }
}
