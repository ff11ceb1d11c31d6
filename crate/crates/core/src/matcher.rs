//! Minutiae-set matching by exhaustive reference-pair polar alignment.
//!
//! Every template/input minutia pair (with agreeing types) is tried as a
//! reference pair: both sets are re-expressed in polar coordinates about
//! their reference minutia, the input set additionally rotated by the
//! difference of the reference orientation angles, and a greedy
//! one-to-one pairing counts how many minutiae agree within tolerance.
//! The best reference pair wins and the score is
//! `matched / max(template size, input size)`, a ratio in [0, 1].

use crate::angle::{circular_diff_deg, normalize_deg, of_vector_deg};
use crate::minutiae::{Minutia, MinutiaType, MinutiaeSet};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("minutiae set is empty")]
    EmptySet,
    #[error("reference index {index} out of range for set of {len}")]
    BadIndex { index: usize, len: usize },
    #[error("template minutiae set is empty")]
    EmptyTemplate,
    #[error("input minutiae set is empty")]
    EmptyInput,
}

/// A minutia in polar coordinates about a reference minutia: radial
/// distance, radial angle (degrees, [0,360)), and orientation relative
/// to the reference orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarMinutia {
    pub r: f64,
    pub phi: f64,
    pub theta: f64,
}

/// Matching tolerances and the accept/reject threshold.
///
/// The tolerance defaults are calibration choices for ~500 dpi scans,
/// not derived quantities; all of them are configurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    /// Max radial distance disagreement, pixels.
    pub r_tol: f64,
    /// Max radial angle disagreement, degrees (circular).
    pub phi_tol: f64,
    /// Max orientation disagreement, degrees (circular).
    pub theta_tol: f64,
    /// Require equal minutia types both for reference pairs and for
    /// counted pairs.
    pub require_same_type: bool,
    /// Score above which the result is a match.
    pub decision_threshold: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            r_tol: 10.0,
            phi_tol: 15.0,
            theta_tol: 20.0,
            require_same_type: true,
            decision_threshold: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Match,
    NonMatch,
}

/// Outcome of matching two minutiae sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched_count: usize,
    pub nt: usize,
    pub ni: usize,
    pub score: f64,
    /// (template index, input index) of the winning reference pair;
    /// (0, 0) when no compatible reference pair existed.
    pub best_ref_pair: (usize, usize),
    pub decision: Decision,
}

/// Difference of the reference orientation angles, normalized. Rotating
/// the input polar angles by this value aligns the two reference frames.
pub fn rotateval(t_ref: &Minutia, i_ref: &Minutia) -> f64 {
    normalize_deg(t_ref.theta - i_ref.theta)
}

/// Re-expresses a set in polar coordinates about the minutia at
/// `ref_index`, rotating radial angles by `rotate_offset`. The reference
/// minutia itself maps to (0, 0, 0).
pub fn polar_transform(
    set: &MinutiaeSet,
    ref_index: usize,
    rotate_offset: f64,
) -> Result<Vec<PolarMinutia>, MatchError> {
    if set.is_empty() {
        return Err(MatchError::EmptySet);
    }
    let Some(reference) = set.get(ref_index) else {
        return Err(MatchError::BadIndex {
            index: ref_index,
            len: set.len(),
        });
    };
    let out = set
        .iter()
        .enumerate()
        .map(|(j, m)| {
            if j == ref_index {
                return PolarMinutia {
                    r: 0.0,
                    phi: 0.0,
                    theta: 0.0,
                };
            }
            let dr = m.row - reference.row;
            let dc = m.col - reference.col;
            PolarMinutia {
                r: (dr * dr + dc * dc).sqrt(),
                phi: normalize_deg(of_vector_deg(dr, dc) + rotate_offset),
                theta: normalize_deg(m.theta - reference.theta),
            }
        })
        .collect();
    Ok(out)
}

#[inline]
fn within(t: &PolarMinutia, i: &PolarMinutia, cfg: &MatchConfig) -> bool {
    (t.r - i.r).abs() <= cfg.r_tol
        && circular_diff_deg(t.phi, i.phi) <= cfg.phi_tol
        && circular_diff_deg(t.theta, i.theta) <= cfg.theta_tol
}

/// Greedy one-to-one pairing count. Template minutiae are visited in
/// ascending radial order; each claims the unclaimed input minutia with
/// the smallest radial disagreement among those inside all tolerances
/// (first such input on a tie). Deterministic; each input is claimed at
/// most once.
pub fn count_matches(
    tpl_polar: &[PolarMinutia],
    inp_polar: &[PolarMinutia],
    tpl_types: &[MinutiaType],
    inp_types: &[MinutiaType],
    cfg: &MatchConfig,
) -> usize {
    debug_assert_eq!(tpl_polar.len(), tpl_types.len());
    debug_assert_eq!(inp_polar.len(), inp_types.len());
    let mut order: Vec<usize> = (0..tpl_polar.len()).collect();
    order.sort_by(|&a, &b| {
        tpl_polar[a]
            .r
            .partial_cmp(&tpl_polar[b].r)
            .expect("finite radii")
            .then(a.cmp(&b))
    });
    let mut claimed = vec![false; inp_polar.len()];
    let mut matched = 0;
    for &t in &order {
        let mut best: Option<(f64, usize)> = None;
        for (i, inp) in inp_polar.iter().enumerate() {
            if claimed[i] || (cfg.require_same_type && tpl_types[t] != inp_types[i]) {
                continue;
            }
            if !within(&tpl_polar[t], inp, cfg) {
                continue;
            }
            let dr = (tpl_polar[t].r - inp.r).abs();
            if best.is_none_or(|(bd, _)| dr < bd) {
                best = Some((dr, i));
            }
        }
        if let Some((_, i)) = best {
            claimed[i] = true;
            matched += 1;
        }
    }
    matched
}

/// Matches an input set against a template set over all compatible
/// reference pairs and returns the best alignment's count, score, and
/// decision (score strictly above the threshold).
pub fn match_sets(
    template: &MinutiaeSet,
    input: &MinutiaeSet,
    cfg: &MatchConfig,
) -> Result<MatchResult, MatchError> {
    if template.is_empty() {
        return Err(MatchError::EmptyTemplate);
    }
    if input.is_empty() {
        return Err(MatchError::EmptyInput);
    }
    let (nt, ni) = (template.len(), input.len());
    let tpl_types: Vec<MinutiaType> = template.iter().map(|m| m.mtype).collect();
    let inp_types: Vec<MinutiaType> = input.iter().map(|m| m.mtype).collect();

    let mut best_count = 0;
    let mut best_pair = (0, 0);
    'pairs: for k in 0..nt {
        let tpl_polar = polar_transform(template, k, 0.0).expect("nonempty template");
        for m in 0..ni {
            if cfg.require_same_type && tpl_types[k] != inp_types[m] {
                continue;
            }
            let offset = rotateval(&template.minutiae()[k], &input.minutiae()[m]);
            let inp_polar = polar_transform(input, m, offset).expect("nonempty input");
            let count = count_matches(&tpl_polar, &inp_polar, &tpl_types, &inp_types, cfg);
            if count > best_count {
                best_count = count;
                best_pair = (k, m);
                if best_count == nt.min(ni) {
                    break 'pairs;
                }
            }
        }
    }

    let score = best_count as f64 / nt.max(ni) as f64;
    debug_assert!(best_count <= nt.min(ni));
    debug_assert!((0.0..=1.0).contains(&score));
    Ok(MatchResult {
        matched_count: best_count,
        nt,
        ni,
        score,
        best_ref_pair: best_pair,
        decision: if score > cfg.decision_threshold {
            Decision::Match
        } else {
            Decision::NonMatch
        },
    })
}
