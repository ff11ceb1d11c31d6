//! Deterministic sample-data generators.
//!
//! Everything here is seeded, so tests and demos get reproducible rasters
//! and minutiae sets without shipping binary fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::angle::normalize_deg;
use crate::imaging::{BinaryImage, GrayImage};
use crate::minutiae::{Minutia, MinutiaType, MinutiaeSet};

/// Union of a few random filled discs, kept clear of the boundary band so
/// a `margin`-wide whitening pass is a no-op on it.
pub fn random_blob(width: usize, height: usize, seed: u64, margin: usize) -> BinaryImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = BinaryImage::blank(width, height);
    let discs = rng.gen_range(3..8);
    for _ in 0..discs {
        let radius = rng.gen_range(2i64..6);
        let lo_r = margin as i64 + radius;
        let hi_r = height as i64 - margin as i64 - radius;
        let lo_c = margin as i64 + radius;
        let hi_c = width as i64 - margin as i64 - radius;
        if hi_r <= lo_r || hi_c <= lo_c {
            continue;
        }
        let cr = rng.gen_range(lo_r..hi_r);
        let cc = rng.gen_range(lo_c..hi_c);
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                if dr * dr + dc * dc <= radius * radius {
                    img.set((cr + dr) as usize, (cc + dc) as usize, 1);
                }
            }
        }
    }
    img
}

/// 50x50 skeleton of an eastward stem forking into two parallel prongs.
///
/// Stem on row 25 (cols 12..=19), a vertical junction bar at col 20
/// (rows 24..=26), prongs on rows 24 and 26 (cols 21..=38). The one-pixel
/// valley channel between the prongs dead-ends at the junction bar, which
/// pins the bifurcation angle to exactly 0 degrees. Already thinned.
pub fn fork_raster() -> BinaryImage {
    let mut img = BinaryImage::blank(50, 50);
    for c in 12..=19 {
        img.set(25, c, 1);
    }
    for r in 24..=26 {
        img.set(r, 20, 1);
    }
    for c in 21..=38 {
        img.set(24, c, 1);
        img.set(26, c, 1);
    }
    img
}

/// 50x50 skeleton shaped like a sideways Y: a west arm meeting NE and SE
/// diagonal arms at (25, 25). Three terminations, one bifurcation.
pub fn y_raster() -> BinaryImage {
    let mut img = BinaryImage::blank(50, 50);
    for c in 15..=25 {
        img.set(25, c, 1);
    }
    for k in 1..=10 {
        img.set(25 - k, 25 + k, 1);
        img.set(25 + k, 25 + k, 1);
    }
    img
}

/// [`y_raster`] as dark ink (20) on a light background (255).
pub fn y_gray() -> GrayImage {
    let ridge = y_raster();
    let mut img = GrayImage::new(50, 50, vec![255; 50 * 50]);
    for r in 0..50 {
        for c in 0..50 {
            if ridge.get(r, c) == 1 {
                img.set(r, c, 20);
            }
        }
    }
    img
}

/// Quarter turn counterclockwise: (r, c) -> (width-1-c, r), dims swapped.
pub fn rotate90_ccw(img: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::blank(img.height(), img.width());
    for r in 0..img.height() {
        for c in 0..img.width() {
            if img.get(r, c) == 1 {
                out.set(img.width() - 1 - c, r, 1);
            }
        }
    }
    out
}

/// 96x96 gray raster with ridge-like content: five wavy two-pixel
/// strokes, one broken mid-way, plus a couple of diagonal spurs that fork
/// off a stroke. Not a fingerprint, but it exercises every pipeline stage
/// and yields a stable, nonempty minutiae set.
pub fn fingerprint_like(seed: u64) -> GrayImage {
    const SIZE: usize = 96;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = GrayImage::new(SIZE, SIZE, vec![235; SIZE * SIZE]);
    let broken = rng.gen_range(0..5i64);
    let gap_at = rng.gen_range(30..60i64);
    // Bottom ink row per stroke and column, so spurs attach exactly.
    let mut bottom = [[0i64; SIZE]; 5];
    for (stroke, ink_floor) in bottom.iter_mut().enumerate() {
        let base = 18 + 12 * stroke as i64;
        let phase = rng.gen::<f64>() * std::f64::consts::TAU;
        let freq = 0.08 + rng.gen::<f64>() * 0.06;
        for c in 12..84i64 {
            let wave = ((c as f64) * freq + phase).sin() * 2.0;
            let r = base + wave.round() as i64;
            ink_floor[c as usize] = r + 1;
            if stroke as i64 == broken && (c - gap_at).abs() < 3 {
                continue;
            }
            img.set(r as usize, c as usize, 20);
            img.set(r as usize + 1, c as usize, 20);
        }
    }
    let spurs = rng.gen_range(1..3);
    for _ in 0..spurs {
        let stroke = ((broken + 1 + rng.gen_range(0..4)) % 5) as usize;
        let c0 = rng.gen_range(20..70i64);
        let r0 = bottom[stroke][c0 as usize];
        for k in 1..=6i64 {
            img.set((r0 + k) as usize, (c0 + k) as usize, 20);
        }
    }
    img
}

/// Random minutiae over a 256x256 frame: integer positions at least six
/// pixels apart (Chebyshev), hundredth-degree orientations, mixed types.
pub fn random_minutiae_set(seed: u64, n_min: usize, n_max: usize) -> MinutiaeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(n_min..=n_max);
    let mut minutiae: Vec<Minutia> = Vec::with_capacity(n);
    while minutiae.len() < n {
        let row = rng.gen_range(60i64..196) as f64;
        let col = rng.gen_range(60i64..196) as f64;
        let clear = minutiae
            .iter()
            .all(|m| (m.row - row).abs() >= 6.0 || (m.col - col).abs() >= 6.0);
        if !clear {
            continue;
        }
        let theta = rng.gen_range(0..36000) as f64 / 100.0;
        let mtype = if rng.gen_bool(0.5) {
            MinutiaType::Termination
        } else {
            MinutiaType::Bifurcation
        };
        minutiae.push(Minutia::new(row, col, theta, mtype));
    }
    MinutiaeSet::new(minutiae, 256, 256).expect("generated set is valid")
}

/// Colinear minutiae on a 45-degree line through (128, 128) with thetas
/// that are multiples of 45. Under quarter-turn rigid motion every
/// derived polar quantity stays an exact multiple of 45, which lets
/// equivariance tests compare floats bit for bit.
pub fn colinear_minutiae_set(seed: u64) -> MinutiaeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = [(0i64, 1i64), (1, 1), (1, 0), (1, -1)];
    let (dr, dc) = dirs[rng.gen_range(0..4)];
    let n = rng.gen_range(3usize..=8);
    let mut ks: Vec<i64> = Vec::with_capacity(n);
    while ks.len() < n {
        let k = rng.gen_range(-15i64..=15);
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    let minutiae = ks
        .iter()
        .map(|&k| {
            let theta = (rng.gen_range(0i64..8) * 45) as f64;
            let mtype = if rng.gen_bool(0.5) {
                MinutiaType::Termination
            } else {
                MinutiaType::Bifurcation
            };
            Minutia::new((128 + k * dr) as f64, (128 + k * dc) as f64, theta, mtype)
        })
        .collect();
    MinutiaeSet::new(minutiae, 256, 256).expect("generated set is valid")
}

/// Rotates counterclockwise by `alpha_deg` about the frame center, then
/// translates; thetas shift by the same angle.
///
/// Quarter-turn angles take an exact integer path ((x, y) -> (-y, x) per
/// quarter) because sin/cos of rounded pi multiples carry enough error to
/// break bit-exact comparisons downstream.
pub fn rigid_motion(set: &MinutiaeSet, alpha_deg: f64, drow: f64, dcol: f64) -> MinutiaeSet {
    let cr = set.source_height() as f64 / 2.0;
    let cc = set.source_width() as f64 / 2.0;
    let minutiae = set
        .iter()
        .map(|m| {
            let x = m.col - cc;
            let y = cr - m.row;
            let (nx, ny) = if alpha_deg % 90.0 == 0.0 {
                let quarters = (((alpha_deg / 90.0) as i64) % 4 + 4) % 4;
                let (mut px, mut py) = (x, y);
                for _ in 0..quarters {
                    let t = px;
                    px = -py;
                    py = t;
                }
                (px, py)
            } else {
                let a = alpha_deg.to_radians();
                (x * a.cos() - y * a.sin(), x * a.sin() + y * a.cos())
            };
            Minutia {
                row: cr - ny + drow,
                col: cc + nx + dcol,
                theta: normalize_deg(m.theta + alpha_deg),
                mtype: m.mtype,
                degenerate: m.degenerate,
            }
        })
        .collect();
    MinutiaeSet::new(minutiae, set.source_width(), set.source_height())
        .expect("motion kept the set in frame")
}

/// Pure translation; exact when inputs and offsets are integer-valued.
pub fn translate(set: &MinutiaeSet, drow: f64, dcol: f64) -> MinutiaeSet {
    rigid_motion(set, 0.0, drow, dcol)
}

/// Displaces roughly `fraction` of the minutiae by up to `max_px` pixels
/// per axis, keeping positions distinct and inside the frame. Models a
/// noisy second impression of the same finger.
pub fn jitter(set: &MinutiaeSet, seed: u64, fraction: f64, max_px: i64) -> MinutiaeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: HashSet<(u64, u64)> = set
        .iter()
        .map(|m| (m.row.to_bits(), m.col.to_bits()))
        .collect();
    let mut out = Vec::with_capacity(set.len());
    for m in set.iter() {
        if rng.gen::<f64>() >= fraction {
            out.push(*m);
            continue;
        }
        taken.remove(&(m.row.to_bits(), m.col.to_bits()));
        let mut placed = *m;
        for _ in 0..32 {
            let dr = rng.gen_range(-max_px..=max_px) as f64;
            let dc = rng.gen_range(-max_px..=max_px) as f64;
            let row = (m.row + dr).clamp(0.0, set.source_height() as f64 - 1.0);
            let col = (m.col + dc).clamp(0.0, set.source_width() as f64 - 1.0);
            if !taken.contains(&(row.to_bits(), col.to_bits())) {
                placed = Minutia { row, col, ..*m };
                break;
            }
        }
        taken.insert((placed.row.to_bits(), placed.col.to_bits()));
        out.push(placed);
    }
    MinutiaeSet::new(out, set.source_width(), set.source_height())
        .expect("jitter keeps the set valid")
}
