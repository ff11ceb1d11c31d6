//! Minutiae extraction from ridge skeletons.
//!
//! A skeleton pixel's crossing number (CN) is half the sum of absolute
//! differences between consecutive values of its 8 cyclic neighbors.
//! CN 1 marks a ridge termination, CN 2 an ordinary ridge pixel, and
//! CN >= 3 a bifurcation. Each minutia carries an orientation angle and
//! a type code (1 = termination, 3 = bifurcation), and a set serializes
//! to a 4-column CSV data matrix: `row,col,theta,type`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::angle::{normalize_deg, of_vector_deg};
use crate::imaging::BinaryImage;
use crate::preprocess::{find_square_block, neighbor_ring, thin, ThinConfig, NEIGHBOR_OFFSETS};

/// Ridge path length traced when estimating a termination's direction.
pub const DEFAULT_TRACE_LEN: usize = 10;

/// Half-size of the local window used for bifurcation angles (window is
/// 21x21). Inverting and re-thinning only a window keeps the valley
/// skeleton away from the whitened image border, which would otherwise
/// merge with the valleys.
const VALLEY_WINDOW_HALF: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum MinutiaeError {
    #[error("pixel ({row}, {col}) is not a ridge pixel")]
    NotRidgePixel { row: usize, col: usize },
    #[error("pixel ({row}, {col}) lies on the image border")]
    OnBorder { row: usize, col: usize },
    #[error("skeleton has an all-ridge 2x2 block at ({row}, {col}); input was not thinned")]
    NotThinned { row: usize, col: usize },
    #[error("pixel ({row}, {col}) is not a termination")]
    NotTermination { row: usize, col: usize },
    #[error("pixel ({row}, {col}) is not a bifurcation")]
    NotBifurcation { row: usize, col: usize },
    #[error("no valley ending found near bifurcation at ({row}, {col})")]
    ValleyNotFound { row: usize, col: usize },
    #[error("invalid minutiae set: {reason}")]
    InvalidSet { reason: String },
    #[error("data matrix parse error at line {line}: {reason}")]
    DataMatrix { line: usize, reason: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Minutia type with its data-matrix code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinutiaType {
    Termination,
    Bifurcation,
}

impl MinutiaType {
    pub fn code(self) -> u8 {
        match self {
            MinutiaType::Termination => 1,
            MinutiaType::Bifurcation => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(MinutiaType::Termination),
            3 => Some(MinutiaType::Bifurcation),
            _ => None,
        }
    }
}

/// One minutia: position, orientation in degrees [0,360), and type.
///
/// `degenerate` flags a bifurcation whose valley ending could not be
/// located (its theta is 0 by convention); the flag is diagnostic only
/// and, like the set dimensions, does not participate in equality or in
/// the CSV data matrix.
#[derive(Debug, Clone, Copy)]
pub struct Minutia {
    pub row: f64,
    pub col: f64,
    pub theta: f64,
    pub mtype: MinutiaType,
    pub degenerate: bool,
}

impl Minutia {
    pub fn new(row: f64, col: f64, theta: f64, mtype: MinutiaType) -> Self {
        Self {
            row,
            col,
            theta: normalize_deg(theta),
            mtype,
            degenerate: false,
        }
    }

    /// Bifurcation kept despite a failed valley search; theta defaults
    /// to 0 so the minutia still counts toward set cardinality.
    pub fn degenerate(row: f64, col: f64, mtype: MinutiaType) -> Self {
        Self {
            row,
            col,
            theta: 0.0,
            mtype,
            degenerate: true,
        }
    }
}

impl PartialEq for Minutia {
    fn eq(&self, other: &Self) -> bool {
        self.row == other.row
            && self.col == other.col
            && self.theta == other.theta
            && self.mtype == other.mtype
    }
}

/// Ordered minutiae list plus the dimensions of the raster it came from.
///
/// Equality compares the minutiae sequence only: the data matrix does
/// not record dimensions, so sets that round-trip through CSV stay
/// equal even though the parsed copy re-infers its dimensions.
#[derive(Debug, Clone)]
pub struct MinutiaeSet {
    minutiae: Vec<Minutia>,
    source_width: usize,
    source_height: usize,
}

impl PartialEq for MinutiaeSet {
    fn eq(&self, other: &Self) -> bool {
        self.minutiae == other.minutiae
    }
}

impl MinutiaeSet {
    /// Validates bounds, finiteness, and coordinate uniqueness.
    pub fn new(
        minutiae: Vec<Minutia>,
        source_width: usize,
        source_height: usize,
    ) -> Result<Self, MinutiaeError> {
        let mut seen = HashSet::new();
        for m in &minutiae {
            if !(m.row.is_finite() && m.col.is_finite() && m.theta.is_finite()) {
                return Err(MinutiaeError::InvalidSet {
                    reason: format!("non-finite minutia ({}, {})", m.row, m.col),
                });
            }
            if m.row < 0.0
                || m.col < 0.0
                || m.row >= source_height as f64
                || m.col >= source_width as f64
            {
                return Err(MinutiaeError::InvalidSet {
                    reason: format!(
                        "minutia ({}, {}) outside {source_width}x{source_height}",
                        m.row, m.col
                    ),
                });
            }
            if !seen.insert((m.row.to_bits(), m.col.to_bits())) {
                return Err(MinutiaeError::InvalidSet {
                    reason: format!("duplicate minutia coordinates ({}, {})", m.row, m.col),
                });
            }
        }
        Ok(Self {
            minutiae,
            source_width,
            source_height,
        })
    }

    pub fn empty(source_width: usize, source_height: usize) -> Self {
        Self {
            minutiae: Vec::new(),
            source_width,
            source_height,
        }
    }

    /// Skips validation; for tests that need deliberately bad data.
    pub fn unchecked(minutiae: Vec<Minutia>, source_width: usize, source_height: usize) -> Self {
        Self {
            minutiae,
            source_width,
            source_height,
        }
    }

    pub fn len(&self) -> usize {
        self.minutiae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minutiae.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Minutia> {
        self.minutiae.iter()
    }

    pub fn minutiae(&self) -> &[Minutia] {
        &self.minutiae
    }

    pub fn get(&self, index: usize) -> Option<&Minutia> {
        self.minutiae.get(index)
    }

    pub fn source_width(&self) -> usize {
        self.source_width
    }

    pub fn source_height(&self) -> usize {
        self.source_height
    }

    /// Serializes to the 4-column CSV data matrix. Theta is printed with
    /// two decimals, which is lossless because extraction quantizes
    /// angles to the same precision.
    pub fn to_data_matrix(&self) -> String {
        let mut out = String::from("row,col,theta,type\n");
        for m in &self.minutiae {
            writeln!(out, "{},{},{:.2},{}", m.row, m.col, m.theta, m.mtype.code())
                .expect("write to String");
        }
        out
    }

    pub fn write_data_matrix(&self, path: impl AsRef<Path>) -> Result<(), MinutiaeError> {
        let path = path.as_ref();
        fs::write(path, self.to_data_matrix()).map_err(|source| MinutiaeError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Parses a data matrix. Source dimensions are inferred from the
    /// maximum coordinates (they are bookkeeping only; matching never
    /// reads them).
    pub fn from_data_matrix(text: &str) -> Result<Self, MinutiaeError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim_end() == "row,col,theta,type" => {}
            Some((_, header)) => {
                return Err(MinutiaeError::DataMatrix {
                    line: 1,
                    reason: format!("bad header {header:?}, want \"row,col,theta,type\""),
                })
            }
            None => {
                return Err(MinutiaeError::DataMatrix {
                    line: 1,
                    reason: "empty file".into(),
                })
            }
        }
        let mut minutiae = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(MinutiaeError::DataMatrix {
                    line: line_no,
                    reason: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let num = |what: &str, s: &str| -> Result<f64, MinutiaeError> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MinutiaeError::DataMatrix {
                        line: line_no,
                        reason: format!("bad {what} value {s:?}"),
                    })
            };
            let row = num("row", fields[0])?;
            let col = num("col", fields[1])?;
            let theta = num("theta", fields[2])?;
            let code = fields[3]
                .trim()
                .parse::<u8>()
                .ok()
                .and_then(MinutiaType::from_code);
            let Some(mtype) = code else {
                return Err(MinutiaeError::DataMatrix {
                    line: line_no,
                    reason: format!("bad type code {:?}, want 1 or 3", fields[3]),
                });
            };
            minutiae.push(Minutia::new(row, col, theta, mtype));
        }
        let width = minutiae
            .iter()
            .fold(0usize, |acc, m| acc.max(m.col.floor() as usize + 1));
        let height = minutiae
            .iter()
            .fold(0usize, |acc, m| acc.max(m.row.floor() as usize + 1));
        Self::new(minutiae, width, height)
    }

    pub fn load_data_matrix(path: impl AsRef<Path>) -> Result<Self, MinutiaeError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| MinutiaeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_data_matrix(&text)
    }
}

/// Crossing number of an interior ridge pixel: half the sum of absolute
/// differences between cyclically adjacent neighbor values.
pub fn crossing_number(skel: &BinaryImage, row: usize, col: usize) -> Result<u8, MinutiaeError> {
    if row == 0 || col == 0 || row + 1 >= skel.height() || col + 1 >= skel.width() {
        return Err(MinutiaeError::OnBorder { row, col });
    }
    if skel.get(row, col) != 1 {
        return Err(MinutiaeError::NotRidgePixel { row, col });
    }
    let ring = neighbor_ring(skel, row as i64, col as i64);
    let sum: u8 = (0..8)
        .map(|i| (u8::from(ring[i])).abs_diff(u8::from(ring[(i + 1) % 8])))
        .sum();
    Ok(sum / 2)
}

/// Neighbor visiting order for ridge walks: orthogonal steps first
/// (N, E, S, W), then diagonals. Without the preference a straight walk
/// arriving at a junction can be pulled onto a diagonally-adjacent arm
/// one step early.
const TRACE_ORDER: [usize; 8] = [0, 2, 4, 6, 1, 3, 5, 7];

/// Follows the ridge from `(row, col)` for at most `trace_len` steps,
/// stopping early at a junction, a termination, or the image border.
/// Steps go to the first unvisited ridge neighbor in trace order, which
/// makes the walk deterministic.
fn trace_ridge(skel: &BinaryImage, row: usize, col: usize, trace_len: usize) -> (usize, usize) {
    let mut visited = HashSet::from([(row, col)]);
    let (mut cr, mut cc) = (row, col);
    for _ in 0..trace_len {
        let ring = neighbor_ring(skel, cr as i64, cc as i64);
        let mut next = None;
        for i in TRACE_ORDER {
            if !ring[i] {
                continue;
            }
            let (dr, dc) = NEIGHBOR_OFFSETS[i];
            let np = ((cr as i64 + dr) as usize, (cc as i64 + dc) as usize);
            if !visited.contains(&np) {
                next = Some(np);
                break;
            }
        }
        let Some((nr, nc)) = next else { break };
        visited.insert((nr, nc));
        cr = nr;
        cc = nc;
        if nr == 0 || nc == 0 || nr + 1 >= skel.height() || nc + 1 >= skel.width() {
            break;
        }
        if !matches!(crossing_number(skel, nr, nc), Ok(2)) {
            break;
        }
    }
    (cr, cc)
}

/// Direction a ridge leaves its termination, in degrees [0,360) measured
/// from the +column axis, counter-clockwise with the row axis pointing
/// down (so due north is 90).
pub fn termination_angle(skel: &BinaryImage, row: usize, col: usize) -> Result<f64, MinutiaeError> {
    termination_angle_traced(skel, row, col, DEFAULT_TRACE_LEN)
}

/// [`termination_angle`] with an explicit trace length.
pub fn termination_angle_traced(
    skel: &BinaryImage,
    row: usize,
    col: usize,
    trace_len: usize,
) -> Result<f64, MinutiaeError> {
    if crossing_number(skel, row, col)? != 1 {
        return Err(MinutiaeError::NotTermination { row, col });
    }
    let (er, ec) = trace_ridge(skel, row, col, trace_len);
    Ok(of_vector_deg(
        er as f64 - row as f64,
        ec as f64 - col as f64,
    ))
}

/// Orientation of a bifurcation via ridge/valley duality: a bifurcation
/// in the skeleton is a termination in the negative image. A window
/// around the junction is inverted, re-thinned, and the valley
/// termination nearest the junction supplies the angle.
pub fn bifurcation_angle(skel: &BinaryImage, row: usize, col: usize) -> Result<f64, MinutiaeError> {
    if crossing_number(skel, row, col)? < 3 {
        return Err(MinutiaeError::NotBifurcation { row, col });
    }
    let r0 = row.saturating_sub(VALLEY_WINDOW_HALF);
    let c0 = col.saturating_sub(VALLEY_WINDOW_HALF);
    let r1 = (row + VALLEY_WINDOW_HALF).min(skel.height() - 1);
    let c1 = (col + VALLEY_WINDOW_HALF).min(skel.width() - 1);
    let (wh, ww) = (r1 - r0 + 1, c1 - c0 + 1);
    let mut window = BinaryImage::blank(ww, wh);
    for r in 0..wh {
        for c in 0..ww {
            window.set(r, c, skel.get(r0 + r, c0 + c));
        }
    }
    let cfg = ThinConfig {
        boundary_margin: 1,
        max_iterations: None,
    };
    let valleys =
        thin(&window.invert(), &cfg).map_err(|_| MinutiaeError::ValleyNotFound { row, col })?;
    let (jr, jc) = ((row - r0) as f64, (col - c0) as f64);
    let mut best: Option<(f64, usize, usize)> = None;
    for r in 1..wh.saturating_sub(1) {
        for c in 1..ww.saturating_sub(1) {
            if valleys.get(r, c) != 1 || !matches!(crossing_number(&valleys, r, c), Ok(1)) {
                continue;
            }
            let d2 = (r as f64 - jr).powi(2) + (c as f64 - jc).powi(2);
            if best.is_none_or(|(bd, _, _)| d2 < bd) {
                best = Some((d2, r, c));
            }
        }
    }
    match best {
        Some((_, tr, tc)) => termination_angle(&valleys, tr, tc),
        None => Err(MinutiaeError::ValleyNotFound { row, col }),
    }
}

/// Rounds an angle to two decimals so the CSV data matrix round-trips
/// without loss.
fn quantize_theta(theta: f64) -> f64 {
    normalize_deg((theta * 100.0).round() / 100.0)
}

/// Scans a skeleton for minutiae in row-major order.
///
/// Interior ridge pixels with CN 1 become terminations, CN >= 3 become
/// bifurcations. Terminations closer than `2 * margin` to an image edge
/// are discarded: the whitening band itself is `margin` wide and every
/// ridge it clips ends with a spurious termination within another
/// `margin` of it. Bifurcations are never position-filtered.
pub fn extract(skel: &BinaryImage, margin: usize) -> Result<MinutiaeSet, MinutiaeError> {
    if let Some((row, col)) = find_square_block(skel) {
        return Err(MinutiaeError::NotThinned { row, col });
    }
    let (w, h) = (skel.width(), skel.height());
    let band = 2 * margin;
    let mut minutiae = Vec::new();
    let mut seen = HashSet::new();
    for r in 1..h.saturating_sub(1) {
        for c in 1..w.saturating_sub(1) {
            if skel.get(r, c) != 1 {
                continue;
            }
            let cn = crossing_number(skel, r, c).expect("interior ridge pixel");
            let m = match cn {
                1 => {
                    if r < band || r >= h - band || c < band || c >= w - band {
                        continue;
                    }
                    let theta = termination_angle(skel, r, c)?;
                    Minutia::new(
                        r as f64,
                        c as f64,
                        quantize_theta(theta),
                        MinutiaType::Termination,
                    )
                }
                n if n >= 3 => match bifurcation_angle(skel, r, c) {
                    Ok(theta) => Minutia::new(
                        r as f64,
                        c as f64,
                        quantize_theta(theta),
                        MinutiaType::Bifurcation,
                    ),
                    Err(MinutiaeError::ValleyNotFound { .. }) => {
                        Minutia::degenerate(r as f64, c as f64, MinutiaType::Bifurcation)
                    }
                    Err(e) => return Err(e),
                },
                _ => continue,
            };
            if seen.insert((m.row.to_bits(), m.col.to_bits())) {
                minutiae.push(m);
            }
        }
    }
    MinutiaeSet::new(minutiae, w, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn from_coords(w: usize, h: usize, coords: &[(usize, usize)]) -> BinaryImage {
        let mut img = BinaryImage::blank(w, h);
        for &(r, c) in coords {
            img.set(r, c, 1);
        }
        img
    }

    fn with_center_neighbors(neighbors: &[(i64, i64)]) -> BinaryImage {
        let mut img = BinaryImage::blank(5, 5);
        img.set(2, 2, 1);
        for &(dr, dc) in neighbors {
            img.set((2 + dr) as usize, (2 + dc) as usize, 1);
        }
        img
    }

    #[test]
    fn crossing_number_classifies_basic_neighborhoods() {
        let isolated = with_center_neighbors(&[]);
        assert_eq!(crossing_number(&isolated, 2, 2).unwrap(), 0);

        let through = with_center_neighbors(&[(0, 1), (0, -1)]);
        assert_eq!(crossing_number(&through, 2, 2).unwrap(), 2);

        let ending = with_center_neighbors(&[(0, 1)]);
        assert_eq!(crossing_number(&ending, 2, 2).unwrap(), 1);

        let fork = with_center_neighbors(&[(0, 1), (-1, -1), (1, -1)]);
        assert_eq!(crossing_number(&fork, 2, 2).unwrap(), 3);

        let cross = with_center_neighbors(&[(0, 1), (0, -1), (1, 0), (-1, 0)]);
        assert_eq!(crossing_number(&cross, 2, 2).unwrap(), 4);
    }

    #[test]
    fn crossing_number_rejects_background_and_border() {
        let img = with_center_neighbors(&[(0, 1)]);
        assert!(matches!(
            crossing_number(&img, 2, 1),
            Err(MinutiaeError::NotRidgePixel { .. })
        ));
        assert!(matches!(
            crossing_number(&img, 0, 2),
            Err(MinutiaeError::OnBorder { .. })
        ));
        assert!(matches!(
            crossing_number(&img, 2, 4),
            Err(MinutiaeError::OnBorder { .. })
        ));
    }

    #[test]
    fn termination_angles_follow_the_ridge() {
        // Line along row 10, cols 5..=25.
        let coords: Vec<(usize, usize)> = (5..=25).map(|c| (10, c)).collect();
        let img = from_coords(31, 21, &coords);
        assert_eq!(termination_angle(&img, 10, 5).unwrap(), 0.0);
        assert_eq!(termination_angle(&img, 10, 25).unwrap(), 180.0);

        // Vertical line: tip at the bottom looks north.
        let coords: Vec<(usize, usize)> = (5..=25).map(|r| (r, 10)).collect();
        let img = from_coords(21, 31, &coords);
        assert_eq!(termination_angle(&img, 25, 10).unwrap(), 90.0);
        assert_eq!(termination_angle(&img, 5, 10).unwrap(), 270.0);

        // Diagonal: tip at the NE end points back southwest.
        let coords: Vec<(usize, usize)> = (0..15).map(|k| (20 - k, 10 + k)).collect();
        let img = from_coords(40, 40, &coords);
        assert_eq!(termination_angle(&img, 6, 24).unwrap(), 225.0);
    }

    #[test]
    fn termination_angle_rejects_midline_pixel() {
        let coords: Vec<(usize, usize)> = (5..=25).map(|c| (10, c)).collect();
        let img = from_coords(31, 21, &coords);
        assert!(matches!(
            termination_angle(&img, 10, 15),
            Err(MinutiaeError::NotTermination { .. })
        ));
    }

    #[test]
    fn trace_stops_at_junction() {
        // The fork's stem tip is 8 px from the junction; even with a
        // generous trace budget the walk must stop there instead of
        // running through into a prong.
        let img = synth::fork_raster();
        let angle = termination_angle_traced(&img, 25, 12, 30).unwrap();
        assert_eq!(angle, 0.0);
        assert_eq!(angle, termination_angle(&img, 25, 12).unwrap());
    }

    #[test]
    fn bifurcation_angle_of_fork_is_east() {
        let img = synth::fork_raster();
        assert_eq!(crossing_number(&img, 25, 20).unwrap(), 3);
        assert_eq!(bifurcation_angle(&img, 25, 20).unwrap(), 0.0);
    }

    #[test]
    fn bifurcation_angle_rotates_with_the_raster() {
        let img = synth::fork_raster();
        let rot = synth::rotate90_ccw(&img);
        // (25, 20) maps to (width-1-20, 25) = (29, 25).
        assert_eq!(crossing_number(&rot, 29, 25).unwrap(), 3);
        assert_eq!(bifurcation_angle(&rot, 29, 25).unwrap(), 90.0);
    }

    #[test]
    fn bifurcation_angle_rejects_plain_ridge() {
        let img = synth::fork_raster();
        assert!(matches!(
            bifurcation_angle(&img, 25, 15),
            Err(MinutiaeError::NotBifurcation { .. })
        ));
    }

    #[test]
    fn cramped_cross_has_no_valley_ending() {
        // 5x5 '+': the inverted window holds only four isolated corner
        // pixels, none of which is a CN-1 valley ending.
        let img = from_coords(5, 5, &[(2, 2), (1, 2), (3, 2), (2, 1), (2, 3)]);
        assert!(matches!(
            bifurcation_angle(&img, 2, 2),
            Err(MinutiaeError::ValleyNotFound { .. })
        ));
        let set = extract(&img, 0).unwrap();
        assert_eq!(set.len(), 5);
        let degenerate: Vec<&Minutia> = set.iter().filter(|m| m.degenerate).collect();
        assert_eq!(degenerate.len(), 1);
        assert_eq!(degenerate[0].theta, 0.0);
        assert_eq!(degenerate[0].mtype, MinutiaType::Bifurcation);
    }

    #[test]
    fn extract_finds_line_endpoints() {
        let coords: Vec<(usize, usize)> = (10..30).map(|c| (20, c)).collect();
        let img = from_coords(40, 40, &coords);
        let set = extract(&img, 0).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(
            set.minutiae()[0],
            Minutia::new(20.0, 10.0, 0.0, MinutiaType::Termination)
        );
        assert_eq!(
            set.minutiae()[1],
            Minutia::new(20.0, 29.0, 180.0, MinutiaType::Termination)
        );
    }

    #[test]
    fn extract_of_closed_loop_is_empty() {
        let mut coords = Vec::new();
        for c in 10..=14 {
            coords.push((10, c));
            coords.push((14, c));
        }
        for r in 11..=13 {
            coords.push((r, 10));
            coords.push((r, 14));
        }
        let img = from_coords(25, 25, &coords);
        let set = extract(&img, 0).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn extract_of_empty_skeleton_is_empty() {
        let img = BinaryImage::blank(30, 30);
        assert!(extract(&img, 5).unwrap().is_empty());
    }

    #[test]
    fn extract_classifies_y_arms() {
        let img = synth::y_raster();
        let set = extract(&img, 5).unwrap();
        assert_eq!(set.len(), 4);
        let terms: Vec<&Minutia> = set
            .iter()
            .filter(|m| m.mtype == MinutiaType::Termination)
            .collect();
        let bifs: Vec<&Minutia> = set
            .iter()
            .filter(|m| m.mtype == MinutiaType::Bifurcation)
            .collect();
        assert_eq!(terms.len(), 3);
        assert_eq!(bifs.len(), 1);
        assert_eq!((bifs[0].row, bifs[0].col), (25.0, 25.0));
    }

    #[test]
    fn extract_discards_terminations_near_frame_only() {
        let img = synth::fork_raster();
        // Stem tip sits at col 12; prong tips at col 38; bifurcation at
        // (25, 20). Band 2*5=10 keeps everything.
        let set = extract(&img, 5).unwrap();
        assert_eq!(set.len(), 4);
        // Band 2*8=16 drops all three tip terminations (stem at col 12,
        // prongs at col 38) but never the bifurcation.
        let set = extract(&img, 8).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.minutiae()[0].mtype, MinutiaType::Bifurcation);
    }

    #[test]
    fn extract_rejects_unthinned_input() {
        let img = from_coords(10, 10, &[(4, 4), (4, 5), (5, 4), (5, 5)]);
        assert!(matches!(
            extract(&img, 0),
            Err(MinutiaeError::NotThinned { row: 4, col: 4 })
        ));
    }

    #[test]
    fn extraction_commutes_with_quarter_rotation() {
        let diag: Vec<(usize, usize)> = (12..30).map(|k| (k, k + 3)).collect();
        for img in [synth::fork_raster(), from_coords(50, 50, &diag)] {
            let set = extract(&img, 0).unwrap();
            let rot = synth::rotate90_ccw(&img);
            let rot_set = extract(&rot, 0).unwrap();
            assert_eq!(set.len(), rot_set.len());
            let w = img.width() as f64;
            for m in set.iter() {
                let expect_row = w - 1.0 - m.col;
                let expect_col = m.row;
                let partner = rot_set
                    .iter()
                    .find(|p| p.row == expect_row && p.col == expect_col)
                    .unwrap_or_else(|| panic!("no rotated partner for ({}, {})", m.row, m.col));
                assert_eq!(partner.mtype, m.mtype);
                let want = normalize_deg(m.theta + 90.0);
                let diff = crate::angle::circular_diff_deg(partner.theta, want);
                assert!(diff <= 1.0, "theta {} vs {want}", partner.theta);
            }
        }
    }

    #[test]
    fn data_matrix_formats_and_round_trips() {
        assert_eq!(
            MinutiaeSet::empty(10, 10).to_data_matrix(),
            "row,col,theta,type\n"
        );

        let set = MinutiaeSet::new(
            vec![Minutia::new(10.0, 20.0, 45.0, MinutiaType::Termination)],
            30,
            30,
        )
        .unwrap();
        assert_eq!(set.to_data_matrix(), "row,col,theta,type\n10,20,45.00,1\n");

        let img = synth::fork_raster();
        let set = extract(&img, 5).unwrap();
        let parsed = MinutiaeSet::from_data_matrix(&set.to_data_matrix()).unwrap();
        assert_eq!(parsed, set);
        // Quantized thetas survive a second trip bit-exactly.
        assert_eq!(parsed.to_data_matrix(), set.to_data_matrix());
    }

    #[test]
    fn data_matrix_parse_rejects_garbage() {
        assert!(matches!(
            MinutiaeSet::from_data_matrix("r,c,t,k\n"),
            Err(MinutiaeError::DataMatrix { line: 1, .. })
        ));
        assert!(matches!(
            MinutiaeSet::from_data_matrix("row,col,theta,type\n1,2,3\n"),
            Err(MinutiaeError::DataMatrix { line: 2, .. })
        ));
        assert!(matches!(
            MinutiaeSet::from_data_matrix("row,col,theta,type\n1,2,3.0,2\n"),
            Err(MinutiaeError::DataMatrix { line: 2, .. })
        ));
        assert!(matches!(
            MinutiaeSet::from_data_matrix("row,col,theta,type\n1,2,x,1\n"),
            Err(MinutiaeError::DataMatrix { line: 2, .. })
        ));
        assert!(matches!(
            MinutiaeSet::from_data_matrix("row,col,theta,type\n-1,2,0.0,1\n"),
            Err(MinutiaeError::InvalidSet { .. })
        ));
        assert!(matches!(
            MinutiaeSet::from_data_matrix("row,col,theta,type\n1,2,0.0,1\n1,2,90.0,3\n"),
            Err(MinutiaeError::InvalidSet { .. })
        ));
    }

    #[test]
    fn set_constructor_validates_bounds_and_uniqueness() {
        let ok = MinutiaeSet::new(
            vec![Minutia::new(0.0, 0.0, 0.0, MinutiaType::Termination)],
            1,
            1,
        );
        assert!(ok.is_ok());
        let oob = MinutiaeSet::new(
            vec![Minutia::new(1.0, 0.0, 0.0, MinutiaType::Termination)],
            1,
            1,
        );
        assert!(matches!(oob, Err(MinutiaeError::InvalidSet { .. })));
        let dup = MinutiaeSet::new(
            vec![
                Minutia::new(0.0, 0.0, 0.0, MinutiaType::Termination),
                Minutia::new(0.0, 0.0, 10.0, MinutiaType::Bifurcation),
            ],
            5,
            5,
        );
        assert!(matches!(dup, Err(MinutiaeError::InvalidSet { .. })));
    }

    #[test]
    fn type_codes_match_the_data_matrix_convention() {
        assert_eq!(MinutiaType::Termination.code(), 1);
        assert_eq!(MinutiaType::Bifurcation.code(), 3);
        assert_eq!(MinutiaType::from_code(1), Some(MinutiaType::Termination));
        assert_eq!(MinutiaType::from_code(3), Some(MinutiaType::Bifurcation));
        assert_eq!(MinutiaType::from_code(2), None);
    }
}
