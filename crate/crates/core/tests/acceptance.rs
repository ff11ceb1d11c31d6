//! Acceptance suite for the core library. Each test covers one headline
//! guarantee and prints a single `ACCEPTANCE PASS` line on success (run
//! with `--nocapture` to see them).

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minutia_core::angle::circular_diff_deg;
use minutia_core::synth;
use minutia_core::{
    count_matches, crossing_number, evaluate, match_sets, ridge_components, sweep, thin,
    BinaryImage, DatasetManifest, ManifestEntry, MatchConfig, MinutiaType, MinutiaeSet,
    PipelineConfig, PolarMinutia, ThinConfig,
};

// ---------------------------------------------------------------- 1

#[test]
fn crossing_number_equals_half_sum_oracle_on_all_256_neighborhoods() {
    // Ring order: N, NE, E, SE, S, SW, W, NW (cyclic).
    let offsets: [(i64, i64); 8] = [
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
    ];
    for mask in 0u16..256 {
        let ring: Vec<u8> = (0..8).map(|i| ((mask >> i) & 1) as u8).collect();
        let mut img = BinaryImage::blank(3, 3);
        img.set(1, 1, 1);
        for (bit, (dr, dc)) in ring.iter().zip(offsets) {
            if *bit == 1 {
                img.set((1 + dr) as usize, (1 + dc) as usize, 1);
            }
        }
        let half_sum: u8 = (0..8)
            .map(|i| ring[i].abs_diff(ring[(i + 1) % 8]))
            .sum::<u8>()
            / 2;
        assert_eq!(
            crossing_number(&img, 1, 1).unwrap(),
            half_sum,
            "neighborhood {mask:08b}"
        );
    }
    println!(
        "ACCEPTANCE PASS: crossing number equals the half-sum oracle on all 256 neighborhoods"
    );
}

// ---------------------------------------------------------------- 2

#[test]
fn thinning_invariants_hold_on_100_random_blobs() {
    let cfg = ThinConfig {
        boundary_margin: 3,
        max_iterations: None,
    };
    for seed in 0..100u64 {
        // Blobs stay off the margin band, so whitening is a no-op and
        // the raw input is the right baseline for every invariant.
        let img = synth::random_blob(64, 64, seed, 3);
        let out = thin(&img, &cfg).unwrap();
        for r in 0..63 {
            for c in 0..63 {
                let block = out.get(r, c) == 1
                    && out.get(r, c + 1) == 1
                    && out.get(r + 1, c) == 1
                    && out.get(r + 1, c + 1) == 1;
                assert!(!block, "2x2 ridge block at ({r}, {c}), seed {seed}");
            }
        }
        for (skel, orig) in out.pixels().iter().zip(img.pixels()) {
            assert!(skel <= orig, "skeleton outside input, seed {seed}");
        }
        assert_eq!(
            ridge_components(&out),
            ridge_components(&img),
            "component count changed, seed {seed}"
        );
        assert_eq!(
            thin(&out, &cfg).unwrap(),
            out,
            "not idempotent, seed {seed}"
        );
    }
    println!(
        "ACCEPTANCE PASS: thinning on 100 random blobs: no 2x2 blocks, subset of input, \
         component count preserved, idempotent"
    );
}

// ---------------------------------------------------------------- 3

/// Exact maximum one-to-one pairing via bitmask DP over input minutiae,
/// with the pass predicate reimplemented independently of the matcher.
fn optimal_assignment(
    tpl: &[PolarMinutia],
    inp: &[PolarMinutia],
    tpl_types: &[MinutiaType],
    inp_types: &[MinutiaType],
    cfg: &MatchConfig,
) -> usize {
    let ni = inp.len();
    let adj: Vec<u32> = tpl
        .iter()
        .zip(tpl_types)
        .map(|(t, tt)| {
            let mut mask = 0u32;
            for (i, (p, it)) in inp.iter().zip(inp_types).enumerate() {
                let type_ok = !cfg.require_same_type || tt == it;
                let close = (t.r - p.r).abs() <= cfg.r_tol
                    && circular_diff_deg(t.phi, p.phi) <= cfg.phi_tol
                    && circular_diff_deg(t.theta, p.theta) <= cfg.theta_tol;
                if type_ok && close {
                    mask |= 1 << i;
                }
            }
            mask
        })
        .collect();
    let mut dp = vec![0u8; 1 << ni];
    for &options in &adj {
        let mut next = dp.clone();
        for (mask, &pairs) in dp.iter().enumerate() {
            let mut avail = options & !(mask as u32);
            while avail != 0 {
                let bit = avail & avail.wrapping_neg();
                let with = mask | bit as usize;
                next[with] = next[with].max(pairs + 1);
                avail &= avail - 1;
            }
        }
        dp = next;
    }
    dp.into_iter().max().unwrap() as usize
}

#[test]
fn greedy_pairing_tracks_the_optimal_assignment() {
    let cfg = MatchConfig::default();
    let total = 250;
    let mut equal = 0;
    for seed in 0..total {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let draw = |rng: &mut ChaCha8Rng, n: usize| {
            let mut polar = Vec::new();
            let mut types = Vec::new();
            for _ in 0..n {
                polar.push(PolarMinutia {
                    r: rng.gen::<f64>() * 30.0,
                    phi: rng.gen::<f64>() * 360.0,
                    theta: rng.gen::<f64>() * 360.0,
                });
                types.push(if rng.gen_bool(0.5) {
                    MinutiaType::Termination
                } else {
                    MinutiaType::Bifurcation
                });
            }
            (polar, types)
        };
        let nt = rng.gen_range(1..=6);
        let ni = rng.gen_range(1..=6);
        let (tp, tt) = draw(&mut rng, nt);
        let (ip, it) = draw(&mut rng, ni);
        let greedy = count_matches(&tp, &ip, &tt, &it, &cfg);
        let optimal = optimal_assignment(&tp, &ip, &tt, &it, &cfg);
        assert!(greedy <= optimal, "seed {seed}: greedy above optimal");
        assert!(
            greedy + 1 >= optimal,
            "seed {seed}: greedy {greedy} vs optimal {optimal}"
        );
        if greedy == optimal {
            equal += 1;
        }
    }
    assert!(
        equal * 10 >= total * 9,
        "greedy equaled optimal on only {equal}/{total} instances"
    );
    println!(
        "ACCEPTANCE PASS: greedy pairing within 1 of the optimal assignment on {total} instances, \
         equal on {equal}"
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn rigid_motion_scores_perfectly_at_tight_tolerances() {
    let cfg = MatchConfig {
        r_tol: 2.0,
        phi_tol: 3.0,
        theta_tol: 3.0,
        ..MatchConfig::default()
    };
    for seed in 0..50u64 {
        let set = synth::random_minutiae_set(seed, 5, 30);
        let drow = (seed % 11) as f64 - 5.0;
        let dcol = (seed % 7) as f64 - 3.0;
        for step in 0..36 {
            let alpha = 10.0 * step as f64;
            let moved = synth::rigid_motion(&set, alpha, drow, dcol);
            let res = match_sets(&set, &moved, &cfg).unwrap();
            assert_eq!(
                res.score, 1.0,
                "seed {seed}, alpha {alpha}, translation ({drow}, {dcol})"
            );
        }
    }
    println!(
        "ACCEPTANCE PASS: rotations 0..350 deg plus translation score 1.0 on 50 sets \
         at tolerances (2 px, 3 deg, 3 deg)"
    );
}

// ---------------------------------------------------------------- 5

#[test]
fn score_ratio_arithmetic_is_exact() {
    let cfg = MatchConfig::default();
    let set10 = synth::random_minutiae_set(77, 10, 10);
    let sub8 = MinutiaeSet::new(set10.minutiae()[..8].to_vec(), 256, 256).unwrap();
    let res = match_sets(&set10, &sub8, &cfg).unwrap();
    assert_eq!((res.matched_count, res.nt, res.ni), (8, 10, 8));
    assert_eq!(res.score, 0.8);

    let full = match_sets(&set10, &set10, &cfg).unwrap();
    assert_eq!(full.score, 1.0);

    for seed in 0..1000u64 {
        let t = synth::random_minutiae_set(2000 + seed, 1, 12);
        let i = synth::random_minutiae_set(4000 + seed, 1, 12);
        let res = match_sets(&t, &i, &cfg).unwrap();
        assert!((0.0..=1.0).contains(&res.score), "seed {seed}");
        assert!(res.matched_count <= res.nt.min(res.ni), "seed {seed}");
    }
    println!(
        "ACCEPTANCE PASS: score is matched/max(nt, ni): 8/10 = 0.8, self-match 1.0, \
         in [0,1] on 1000 random pairs"
    );
}

// ---------------------------------------------------------------- 6

/// Ten identities, two impressions each: the second impression displaces
/// about 20% of the minutiae by up to 3 px.
fn verification_dataset(dir: &Path) -> DatasetManifest {
    let mut entries = Vec::new();
    for i in 0..10u64 {
        let template = synth::random_minutiae_set(100 + i, 15, 25);
        let input = synth::jitter(&template, 500 + i, 0.2, 3);
        let tname = format!("id{i:02}_t.csv");
        let iname = format!("id{i:02}_i.csv");
        template.write_data_matrix(dir.join(&tname)).unwrap();
        input.write_data_matrix(dir.join(&iname)).unwrap();
        entries.push(ManifestEntry {
            id: format!("id{i:02}"),
            template: PathBuf::from(tname),
            inputs: vec![PathBuf::from(iname)],
        });
    }
    let path = dir.join("manifest.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&DatasetManifest { entries }).unwrap(),
    )
    .unwrap();
    DatasetManifest::load(&path).unwrap()
}

#[test]
fn verification_protocol_hits_reference_rates() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = verification_dataset(dir.path());
    let report = evaluate(
        &manifest,
        &MatchConfig::default(),
        &PipelineConfig::default(),
    )
    .unwrap();
    assert_eq!(report.enrollee_attempts, 10);
    assert_eq!(report.false_non_matches, 0);
    assert_eq!(report.fnmr, 0.0);
    assert_eq!(report.imposter_attempts, 90);
    assert!(report.fmr <= 0.05, "fmr {} over budget", report.fmr);
    // The error rates are plain ratios of counts.
    assert_eq!(13.0 / 500.0, 0.026);
    assert_eq!(
        report.fmr,
        report.false_matches as f64 / report.imposter_attempts as f64
    );
    println!(
        "ACCEPTANCE PASS: jittered-impression dataset: fnmr 0.00 over 10 enrollee attempts, \
         90 imposter attempts, fmr {} <= 0.05, and 13/500 = 0.026",
        report.fmr
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn threshold_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = verification_dataset(dir.path());
    let thresholds: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let points = sweep(
        &manifest,
        &MatchConfig::default(),
        &PipelineConfig::default(),
        &thresholds,
    )
    .unwrap();
    assert_eq!(points.len(), 21);
    for pair in points.windows(2) {
        assert!(
            pair[1].fmr <= pair[0].fmr,
            "fmr rose from {} to {} at threshold {}",
            pair[0].fmr,
            pair[1].fmr,
            pair[1].threshold
        );
        assert!(
            pair[1].fnmr >= pair[0].fnmr,
            "fnmr fell from {} to {} at threshold {}",
            pair[0].fnmr,
            pair[1].fnmr,
            pair[1].threshold
        );
    }
    println!(
        "ACCEPTANCE PASS: threshold sweep over 21 points: fmr non-increasing, \
         fnmr non-decreasing"
    );
}
