//! Dataset evaluation: enrollee (one-to-one) and imposter (one-to-all)
//! protocols, false-match and false-non-match rates.
//!
//! Scores sitting exactly on the threshold count as neither error: an
//! imposter attempt is a false match only when its score is strictly
//! greater, an enrollee attempt a false non-match only when strictly
//! less.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::matcher::{match_sets, MatchConfig, MatchError};
use crate::minutiae::MinutiaeSet;
use crate::pipeline::{extract_from_path, PipelineConfig, PipelineError};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("manifest has no entries")]
    EmptyManifest,
    #[error("duplicate identity {id:?} in manifest")]
    DuplicateIdentity { id: String },
    #[error("identity {id:?} has no input paths")]
    NoInputs { id: String },
    #[error("imposter protocol needs at least two identities, found {found}")]
    NeedTwoIdentities { found: usize },
    #[error("invalid manifest {}: {reason}", path.display())]
    InvalidManifest { path: PathBuf, reason: String },
    #[error("cannot read {}: {source}", path.display())]
    FileError {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Pipeline {
        path: PathBuf,
        #[source]
        source: PipelineError,
    },
    #[error("matching template {template:?} against input {input:?}: {source}")]
    MatchFailed {
        template: String,
        input: String,
        #[source]
        source: MatchError,
    },
}

/// One identity: a template plus the inputs claimed to be from the same
/// finger.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub template: PathBuf,
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Parses a manifest JSON file. Relative template and input paths are
    /// resolved against the manifest's own directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EvalError::FileError {
            path: path.to_path_buf(),
            source,
        })?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| EvalError::InvalidManifest {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in &mut manifest.entries {
            entry.template = resolve(base, &entry.template);
            for input in &mut entry.inputs {
                *input = resolve(base, input);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks the structural invariants: nonempty, unique identity
    /// labels, at least one input per identity.
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.entries.is_empty() {
            return Err(EvalError::EmptyManifest);
        }
        let mut seen = HashSet::new();
        for entry in &self.entries {
            if !seen.insert(entry.id.as_str()) {
                return Err(EvalError::DuplicateIdentity {
                    id: entry.id.clone(),
                });
            }
            if entry.inputs.is_empty() {
                return Err(EvalError::NoInputs {
                    id: entry.id.clone(),
                });
            }
        }
        Ok(())
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptKind {
    Enrollee,
    Imposter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    Match,
    NonMatch,
}

/// One scored comparison. `input` and `template` are identity labels;
/// `input_index` disambiguates multiple impressions of the same finger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub input: String,
    pub input_index: usize,
    pub template: String,
    pub score: f64,
    pub kind: AttemptKind,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub false_matches: usize,
    pub imposter_attempts: usize,
    pub false_non_matches: usize,
    pub enrollee_attempts: usize,
    pub fmr: f64,
    pub fnmr: f64,
    pub threshold: f64,
    pub per_attempt: Vec<AttemptRecord>,
}

/// One operating point of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn sort_attempts(rows: &mut [AttemptRecord]) {
    rows.sort_by(|a, b| {
        a.input
            .cmp(&b.input)
            .then(a.input_index.cmp(&b.input_index))
            .then(a.template.cmp(&b.template))
    });
}

/// Extraction results keyed by file content hash, so the O(N^2) imposter
/// pass never reprocesses an image and byte-identical files are shared.
type Cache = HashMap<[u8; 32], MinutiaeSet>;

fn load_cached(
    cache: &mut Cache,
    path: &Path,
    pcfg: &PipelineConfig,
) -> Result<MinutiaeSet, EvalError> {
    let bytes = fs::read(path).map_err(|source| EvalError::FileError {
        path: path.to_path_buf(),
        source,
    })?;
    let digest: [u8; 32] = Sha256::digest(&bytes).into();
    if let Some(set) = cache.get(&digest) {
        return Ok(set.clone());
    }
    let set = extract_from_path(path, pcfg).map_err(|source| EvalError::Pipeline {
        path: path.to_path_buf(),
        source,
    })?;
    cache.insert(digest, set.clone());
    Ok(set)
}

fn attempt(
    template: &MinutiaeSet,
    input: &MinutiaeSet,
    template_id: &str,
    input_id: &str,
    mcfg: &MatchConfig,
) -> Result<f64, EvalError> {
    match_sets(template, input, mcfg)
        .map(|res| res.score)
        .map_err(|source| EvalError::MatchFailed {
            template: template_id.to_string(),
            input: input_id.to_string(),
            source,
        })
}

fn enrollee_pass(
    manifest: &DatasetManifest,
    mcfg: &MatchConfig,
    pcfg: &PipelineConfig,
    cache: &mut Cache,
    rows: &mut Vec<AttemptRecord>,
) -> Result<usize, EvalError> {
    let mut false_non_matches = 0;
    for entry in &manifest.entries {
        let template = load_cached(cache, &entry.template, pcfg)?;
        for (idx, input_path) in entry.inputs.iter().enumerate() {
            let input = load_cached(cache, input_path, pcfg)?;
            let score = attempt(&template, &input, &entry.id, &entry.id, mcfg)?;
            let accepted = score >= mcfg.decision_threshold;
            if !accepted {
                false_non_matches += 1;
            }
            rows.push(AttemptRecord {
                input: entry.id.clone(),
                input_index: idx,
                template: entry.id.clone(),
                score,
                kind: AttemptKind::Enrollee,
                outcome: if accepted {
                    AttemptOutcome::Match
                } else {
                    AttemptOutcome::NonMatch
                },
            });
        }
    }
    Ok(false_non_matches)
}

fn imposter_pass(
    manifest: &DatasetManifest,
    mcfg: &MatchConfig,
    pcfg: &PipelineConfig,
    cache: &mut Cache,
    rows: &mut Vec<AttemptRecord>,
) -> Result<usize, EvalError> {
    let mut false_matches = 0;
    for entry in &manifest.entries {
        for (idx, input_path) in entry.inputs.iter().enumerate() {
            let input = load_cached(cache, input_path, pcfg)?;
            for other in &manifest.entries {
                if other.id == entry.id {
                    continue;
                }
                let template = load_cached(cache, &other.template, pcfg)?;
                let score = attempt(&template, &input, &other.id, &entry.id, mcfg)?;
                let false_match = score > mcfg.decision_threshold;
                if false_match {
                    false_matches += 1;
                }
                rows.push(AttemptRecord {
                    input: entry.id.clone(),
                    input_index: idx,
                    template: other.id.clone(),
                    score,
                    kind: AttemptKind::Imposter,
                    outcome: if false_match {
                        AttemptOutcome::Match
                    } else {
                        AttemptOutcome::NonMatch
                    },
                });
            }
        }
    }
    Ok(false_matches)
}

/// One-to-one pass: each input against its own identity's template.
/// The imposter side of the report is zeroed.
pub fn run_enrollee(
    manifest: &DatasetManifest,
    mcfg: &MatchConfig,
    pcfg: &PipelineConfig,
) -> Result<EvalReport, EvalError> {
    manifest.validate()?;
    let mut cache = Cache::new();
    let mut rows = Vec::new();
    let false_non_matches = enrollee_pass(manifest, mcfg, pcfg, &mut cache, &mut rows)?;
    sort_attempts(&mut rows);
    let enrollee_attempts = rows.len();
    Ok(EvalReport {
        false_matches: 0,
        imposter_attempts: 0,
        false_non_matches,
        enrollee_attempts,
        fmr: 0.0,
        fnmr: ratio(false_non_matches, enrollee_attempts),
        threshold: mcfg.decision_threshold,
        per_attempt: rows,
    })
}

/// One-to-all pass: each input against every other identity's template.
/// The enrollee side of the report is zeroed.
pub fn run_imposter(
    manifest: &DatasetManifest,
    mcfg: &MatchConfig,
    pcfg: &PipelineConfig,
) -> Result<EvalReport, EvalError> {
    manifest.validate()?;
    if manifest.entries.len() < 2 {
        return Err(EvalError::NeedTwoIdentities {
            found: manifest.entries.len(),
        });
    }
    let mut cache = Cache::new();
    let mut rows = Vec::new();
    let false_matches = imposter_pass(manifest, mcfg, pcfg, &mut cache, &mut rows)?;
    sort_attempts(&mut rows);
    let imposter_attempts = rows.len();
    Ok(EvalReport {
        false_matches,
        imposter_attempts,
        false_non_matches: 0,
        enrollee_attempts: 0,
        fmr: ratio(false_matches, imposter_attempts),
        fnmr: 0.0,
        threshold: mcfg.decision_threshold,
        per_attempt: rows,
    })
}

/// Both passes over one shared extraction cache; rows merged in
/// (input identity, input index, template identity) order.
pub fn evaluate(
    manifest: &DatasetManifest,
    mcfg: &MatchConfig,
    pcfg: &PipelineConfig,
) -> Result<EvalReport, EvalError> {
    manifest.validate()?;
    if manifest.entries.len() < 2 {
        return Err(EvalError::NeedTwoIdentities {
            found: manifest.entries.len(),
        });
    }
    let mut cache = Cache::new();
    let mut rows = Vec::new();
    let false_non_matches = enrollee_pass(manifest, mcfg, pcfg, &mut cache, &mut rows)?;
    let enrollee_attempts = rows.len();
    let false_matches = imposter_pass(manifest, mcfg, pcfg, &mut cache, &mut rows)?;
    let imposter_attempts = rows.len() - enrollee_attempts;
    sort_attempts(&mut rows);
    Ok(EvalReport {
        false_matches,
        imposter_attempts,
        false_non_matches,
        enrollee_attempts,
        fmr: ratio(false_matches, imposter_attempts),
        fnmr: ratio(false_non_matches, enrollee_attempts),
        threshold: mcfg.decision_threshold,
        per_attempt: rows,
    })
}

/// Scores every attempt once, then recounts the error rates at each
/// threshold in `thresholds`.
pub fn sweep(
    manifest: &DatasetManifest,
    mcfg: &MatchConfig,
    pcfg: &PipelineConfig,
    thresholds: &[f64],
) -> Result<Vec<SweepPoint>, EvalError> {
    let base = evaluate(manifest, mcfg, pcfg)?;
    Ok(thresholds
        .iter()
        .map(|&t| {
            let mut false_matches = 0;
            let mut false_non_matches = 0;
            for row in &base.per_attempt {
                match row.kind {
                    AttemptKind::Imposter if row.score > t => false_matches += 1,
                    AttemptKind::Enrollee if row.score < t => false_non_matches += 1,
                    _ => {}
                }
            }
            SweepPoint {
                threshold: t,
                fmr: ratio(false_matches, base.imposter_attempts),
                fnmr: ratio(false_non_matches, base.enrollee_attempts),
            }
        })
        .collect())
}
