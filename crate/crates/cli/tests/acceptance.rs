//! Acceptance gate: one test per shipping criterion, each printing a single
//! pass/fail line (visible with `--nocapture`) before asserting.
//!
//! Tolerances and sample budgets are part of the contract; seeds are
//! arbitrary fixed constants.

use std::fs;
use std::process::Command;

use bandlab_cli::scan::{run_decay_scan, DecayScanConfig};
use bandlab_core::linalg::{singular_values, spectral_norm};
use bandlab_core::lyapunov::{estimate_lyapunov, newman_exponent, FactorGenerator, FactorKind};
use bandlab_core::model::{
    anticommutator_norm, build_chiral_model_in_field, build_full_model_in_field,
    build_general_chiral_model_in_field,
};
use bandlab_core::resolvent::{resolvent_block, zero_energy_corner_block};
use bandlab_core::sampling::{sample_ginibre, sample_ginibre_real, sample_gue, EntryField};
use bandlab_core::RngStream;
use num_complex::Complex64;

fn report(idx: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance {idx}/9] {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {idx} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_corner_formula_matches_dense_inverse() {
    let mut worst = 0.0_f64;
    let mut count = 0u32;
    for (ni, &n) in [2usize, 4, 6, 8, 10].iter().enumerate() {
        for (wi, &w) in [1usize, 2, 3, 4].iter().enumerate() {
            for rep in 0..5u64 {
                let stream = RngStream::with_index(4001, ((ni * 4 + wi) as u64) * 8 + rep);
                let h = if rep % 2 == 0 {
                    build_chiral_model_in_field(n, w, EntryField::Complex, &stream).unwrap()
                } else {
                    build_general_chiral_model_in_field(n, w, EntryField::Complex, &stream).unwrap()
                };
                let corner = zero_energy_corner_block(&h).unwrap();
                let dense = resolvent_block(&h, Complex64::new(0.0, 0.0), 1, n).unwrap();
                let rel = spectral_norm(&(&corner - &dense.block)) / dense.norm;
                worst = worst.max(rel);
                count += 1;
            }
        }
    }
    report(
        1,
        "corner-formula-oracle",
        count == 100 && worst < 1e-8,
        &format!("{count} models, worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_2_odd_chains_are_singular_at_zero_energy() {
    let mut worst_ratio = 0.0_f64;
    let mut count = 0u32;
    let mut corner_rejects = true;
    'outer: for rep in 0..4u64 {
        for (ni, &n) in [3usize, 5, 7, 9].iter().enumerate() {
            for (wi, &w) in [1usize, 2, 3, 4].iter().enumerate() {
                if count == 50 {
                    break 'outer;
                }
                let stream = RngStream::with_index(4002, ((ni * 4 + wi) as u64) * 8 + rep);
                let h = if rep % 2 == 0 {
                    build_chiral_model_in_field(n, w, EntryField::Complex, &stream).unwrap()
                } else {
                    build_general_chiral_model_in_field(n, w, EntryField::Complex, &stream).unwrap()
                };
                let sv = singular_values(&h.to_dense());
                let ratio = sv[sv.len() - 1] / sv[0];
                worst_ratio = worst_ratio.max(ratio);
                corner_rejects &= zero_energy_corner_block(&h).is_err();
                count += 1;
            }
        }
    }
    report(
        2,
        "odd-length-kernel",
        count == 50 && worst_ratio < 1e-10 && corner_rejects,
        &format!(
            "{count} models, worst sigma_min/sigma_max {worst_ratio:.2e}, \
             corner formula rejects odd n: {corner_rejects}"
        ),
    );
}

#[test]
fn criterion_3_qr_spectrum_matches_digamma_formula() {
    let mut max_abs_z = 0.0_f64;
    let mut exponents = 0usize;
    let mut w1_gap = f64::NAN;
    for &w in &[1usize, 2, 4, 8] {
        let gen = FactorGenerator::new(
            FactorKind::Ginibre,
            w,
            EntryField::Real,
            RngStream::new(7000 + w as u64),
        )
        .unwrap();
        let est = estimate_lyapunov(&gen, 100_000, 100).unwrap();
        for k in 1..=w {
            let reference = newman_exponent(w, k).unwrap();
            let z = (est.gamma[k - 1] - reference) / est.std_error[k - 1];
            max_abs_z = max_abs_z.max(z.abs());
            exponents += 1;
        }
        if w == 1 {
            w1_gap = (est.gamma[0] - (-0.6351814)).abs();
        }
    }
    report(
        3,
        "digamma-spectrum-oracle",
        exponents == 15 && max_abs_z < 3.0 && w1_gap < 0.01,
        &format!(
            "15 exponents over W in {{1,2,4,8}}, max |z| = {max_abs_z:.2}, \
             |gamma_1(W=1) + 0.6351814| = {w1_gap:.2e}"
        ),
    );
}

#[test]
fn criterion_4_top_exponent_large_width_asymptotics() {
    let mut worst = 0.0_f64;
    for &w in &[8usize, 16, 32, 64, 128] {
        let gap = (newman_exponent(w, 1).unwrap() + 1.0 / (2.0 * w as f64)).abs();
        let bound = 1.0 / (5.0 * (w * w) as f64);
        worst = worst.max(gap / bound);
    }
    report(
        4,
        "half-integer-digamma-asymptotics",
        worst < 1.0,
        &format!("max |gamma_1 + 1/(2W)| / (1/(5W^2)) = {worst:.3} over W in {{8..128}}"),
    );
}

#[test]
fn criterion_5_decay_rate_and_width_scaling() {
    // Rate match at W in {1,2,4}. Lengths start at 32, past the reach of
    // the subleading corrections to the top exponent at these widths.
    let scan = run_decay_scan(&DecayScanConfig {
        widths: vec![1, 2, 4],
        blocks: vec![32, 48, 64, 96, 128],
        samples: 400,
        seed: 501,
        field: EntryField::Real,
        keep_raw: false,
    })
    .unwrap();
    let mut max_abs_z = 0.0_f64;
    for f in &scan.fits {
        max_abs_z = max_abs_z.max(f.z_score.abs());
    }
    // Power law over W in {2,4,8}. W = 8 converges more slowly, so its rate
    // comes from the longest admissible cells only.
    let wide = run_decay_scan(&DecayScanConfig {
        widths: vec![2, 4, 8],
        blocks: vec![64, 96, 128],
        samples: 800,
        seed: 502,
        field: EntryField::Real,
        keep_raw: false,
    })
    .unwrap();
    let pick = |w: usize| wide.fits.iter().find(|f| f.width == w).unwrap().mu_hat;
    let fit =
        bandlab_core::fit::fit_power_law(&[2.0, 4.0, 8.0], &[pick(2), pick(4), pick(8)]).unwrap();
    let pass = max_abs_z < 3.0 && (0.8..=1.2).contains(&fit.alpha);
    report(
        5,
        "inverse-width-decay-rate",
        pass,
        &format!(
            "rate fits at W in {{1,2,4}}: max |z| = {max_abs_z:.2}; \
             power law over W in {{2,4,8}}: alpha = {:.3}",
            fit.alpha
        ),
    );
}

#[test]
fn criterion_6_symmetry_invariants() {
    let mut worst_defect = 0.0_f64;
    let mut worst_chiral_anticomm = 0.0_f64;
    let mut full_anticomms_positive = true;
    for &field in &[EntryField::Complex, EntryField::Real] {
        for (i, &(n, w)) in [(2usize, 1usize), (5, 2), (8, 3), (11, 4)]
            .iter()
            .enumerate()
        {
            let stream = RngStream::with_index(4006, i as u64 + 10 * field as u64);
            let full = build_full_model_in_field(n, w, field, &stream).unwrap();
            let chiral = build_chiral_model_in_field(n, w, field, &stream).unwrap();
            let general = build_general_chiral_model_in_field(n, w, field, &stream).unwrap();
            for h in [&full, &chiral, &general] {
                worst_defect = worst_defect.max(h.to_dense().hermitian_defect());
            }
            worst_chiral_anticomm = worst_chiral_anticomm
                .max(anticommutator_norm(&chiral))
                .max(anticommutator_norm(&general));
            full_anticomms_positive &= anticommutator_norm(&full) > 0.0;
        }
    }
    report(
        6,
        "hermiticity-and-chirality",
        worst_defect == 0.0 && worst_chiral_anticomm == 0.0 && full_anticomms_positive,
        &format!(
            "hermitian defect {worst_defect:.1e}, chiral anticommutator {worst_chiral_anticomm:.1e}, \
             full-model anticommutator positive: {full_anticomms_positive}"
        ),
    );
}

#[test]
fn criterion_7_identical_bond_pairs_give_zero_exponent() {
    let gen = FactorGenerator::new(
        FactorKind::Pair { odd_scale: 1.0 },
        1,
        EntryField::Complex,
        RngStream::new(4007),
    )
    .unwrap();
    let est = estimate_lyapunov(&gen, 100_000, 100).unwrap();
    let z = est.gamma[0] / est.std_error[0];
    report(
        7,
        "pair-cancellation-zero-exponent",
        z.abs() < 3.0,
        &format!(
            "gamma_1 = {:.2e} +- {:.2e}, |z| = {:.2}",
            est.gamma[0],
            est.std_error[0],
            z.abs()
        ),
    );
}

#[test]
fn criterion_8_outputs_are_thread_count_invariant() {
    let bin = env!("CARGO_BIN_EXE_bandlab");
    let cases: &[&[&str]] = &[
        &[
            "sample", "-n", "6", "-W", "3", "--model", "full", "--seed", "11", "--format", "json",
        ],
        &[
            "lyapunov", "-W", "2", "--steps", "400", "--seed", "6", "--format", "json",
        ],
        &[
            "green", "-n", "6", "-W", "2", "--z", "0.4,0.1", "--seed", "3", "--format", "json",
        ],
        &[
            "decay-scan",
            "--widths",
            "1,2",
            "--blocks",
            "8,16,24",
            "--samples",
            "40",
            "--seed",
            "9",
        ],
        &[
            "fmc-scan",
            "--widths",
            "1",
            "--blocks",
            "4,8,12",
            "--z",
            "0.5,0.5",
            "--samples",
            "30",
            "--seed",
            "13",
            "--format",
            "json",
        ],
        &[
            "scaling-fit",
            "--widths",
            "1,2,3",
            "--blocks",
            "8,16,24",
            "--samples",
            "40",
            "--seed",
            "21",
            "--format",
            "json",
        ],
    ];
    let mut checked = 0;
    for (i, case) in cases.iter().enumerate() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes: Vec<Vec<u8>> = Vec::new();
        for (j, threads) in ["1", "4"].iter().enumerate() {
            let sub = dir.path().join(format!("run{j}"));
            fs::create_dir(&sub).unwrap();
            let is_json = case.contains(&"json");
            let out_path = sub.join(if is_json { "out.json" } else { "out.csv" });
            let status = Command::new(bin)
                .args(*case)
                .args(["--threads", threads, "--out", out_path.to_str().unwrap()])
                .status()
                .unwrap();
            assert!(status.success(), "case {i} threads {threads}");
            // Concatenate every file the run produced, in name order, so
            // sibling CSV tables are covered too.
            let mut names: Vec<_> = fs::read_dir(&sub)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            names.sort();
            let mut all = Vec::new();
            for p in names {
                all.extend(fs::read(p).unwrap());
            }
            bytes.push(all);
        }
        assert_eq!(bytes[0], bytes[1], "case {i} differs across thread counts");
        checked += 1;
    }
    report(
        8,
        "thread-count-reproducibility",
        checked == cases.len(),
        &format!("{checked} subcommands byte-identical with --threads 1 vs 4"),
    );
}

#[test]
fn criterion_9_sampler_second_moments() {
    let mut max_abs_z = 0.0_f64;
    let mut stats = 0usize;
    // Empirical mean of `values` against `target`, in standard errors.
    let z_score = |values: &[f64], target: f64| -> f64 {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        (mean - target) / (var / k).sqrt()
    };
    for (wi, &w) in [1usize, 4, 16].iter().enumerate() {
        let draws = 100_000usize.div_ceil(w * w);
        let mut ginibre = Vec::with_capacity(draws * w * w);
        for i in 0..draws {
            let a = sample_ginibre(
                w,
                &RngStream::with_index(4009, (wi as u64) << 32 | i as u64),
            )
            .unwrap();
            ginibre.extend(a.data().iter().map(|v| v.norm_sqr()));
        }
        let zg = z_score(&ginibre, 1.0 / w as f64);
        max_abs_z = max_abs_z.max(zg.abs());
        stats += 1;

        // Real-field hopping blocks share the 1/W second moment.
        let mut real = Vec::with_capacity(draws * w * w);
        for i in 0..draws {
            let a = sample_ginibre_real(
                w,
                &RngStream::with_index(4010, (wi as u64) << 32 | i as u64),
            )
            .unwrap();
            real.extend(a.data().iter().map(|v| v.norm_sqr()));
        }
        let zr = z_score(&real, 1.0 / w as f64);
        max_abs_z = max_abs_z.max(zr.abs());
        stats += 1;

        // GUE: off-diagonal E|a|^2 = 1/(2W); the diagonal variance matches it.
        // Width 1 has no off-diagonal entries, so only the diagonal is
        // testable there.
        let mut offdiag = Vec::new();
        let mut diag = Vec::new();
        let mut i = 0u64;
        while diag.len() < 100_000 || (w > 1 && offdiag.len() < 100_000) {
            let a = sample_gue(w, &RngStream::with_index(4011, (wi as u64) << 32 | i)).unwrap();
            for r in 0..w {
                for c in r..w {
                    if r == c {
                        diag.push(a[(r, c)].re * a[(r, c)].re);
                    } else {
                        offdiag.push(a[(r, c)].norm_sqr());
                    }
                }
            }
            i += 1;
        }
        let zd = z_score(&diag, 1.0 / (2.0 * w as f64));
        max_abs_z = max_abs_z.max(zd.abs());
        stats += 1;
        if w > 1 {
            let zo = z_score(&offdiag, 1.0 / (2.0 * w as f64));
            max_abs_z = max_abs_z.max(zo.abs());
            stats += 1;
        }
    }
    report(
        9,
        "sampler-second-moments",
        max_abs_z < 4.0 && stats == 11,
        &format!("{stats} moment checks at 1e5 entries each, max |z| = {max_abs_z:.2}"),
    );
}
