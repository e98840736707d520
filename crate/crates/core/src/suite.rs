//! The verification battery: ten numbered criteria covering reconstruction,
//! frame inequalities, norm structure, the oracle sandwich, direct and
//! inverse rates, Bernstein sweeps, dyadic equivalence, and determinism.
//!
//! Each criterion is a pure function of one 64-bit seed, returns a
//! [`CriterionOutcome`] with its measured numbers, and is consumed both by
//! the `acceptance` integration test and by `gabor all`. Tolerances are
//! pinned here as constants.

use num_complex::Complex64;
use serde_json::json;

use crate::error::Result;
use crate::gabor::{CoefficientGrid, GaborSystem, WindowChoice};
use crate::norms::{mixed_norm, modulation_norm, NormParams};
use crate::nterm::{exhaustive_sigma, greedy_nterm, sigma_curve, Method, SigmaTable};
use crate::rng::SeededRng;
use crate::signal::{make_window, Normalization, Signal, WindowKind, WindowSpec};
use crate::testsig::{generate_test_signal, TestSignal};
use crate::theory::{
    bernstein_ratio_sweep, direct_rate_experiment, dyadic_equivalence_interval,
    inverse_bound_experiment, series_functional, BernsteinScale,
};

/// Documented default seed for the acceptance battery.
pub const DEFAULT_SEED: u64 = 42;

/// Reconstruction and frame-probe tolerance (relative).
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Tightness tolerance for the full-STFT case: B/A - 1.
pub const TIGHTNESS_TOL: f64 = 1e-8;
/// Embedding-monotonicity slack on finite grids.
pub const EMBEDDING_TOL: f64 = 1e-12;
/// Floating-point guard for interval membership of the (2,2) norm.
pub const NORM_INTERVAL_GUARD: f64 = 1e-10;
/// Greedy+LS may exceed the exhaustive infimum by at most this factor.
pub const ORACLE_FACTOR: f64 = 3.0;
/// Direct experiment: minimum accepted slope is alpha - 0.15 (pinned in
/// `theory::DIRECT_SLOPE_TOL`); Bernstein sweeps accept fitted growth up to
/// alpha + 0.1 and this hard ceiling for the diagonal case.
pub const BERNSTEIN_GROWTH_CEILING: f64 = 1.6;
/// C_hat must stay within this factor under trial doubling.
pub const BERNSTEIN_STABILITY_FACTOR: f64 = 2.0;
/// Inverse experiment: max/min ratio spread across the signal family.
pub const INVERSE_SPREAD_LIMIT: f64 = 1e3;
/// Scale-invariance tolerance for the inverse ratio under f -> 2f.
pub const INVERSE_SCALE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: serde_json::Value,
    /// Optional CSV artifact backing the reported numbers.
    pub csv: Option<String>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{}: criterion {:2} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name
        )
    }
}

/// The L = 128, a = b = 8 Gaussian frame (redundancy 2) used by the
/// reconstruction, norm, Bernstein, and inverse criteria.
pub fn gaussian_frame_128() -> Result<GaborSystem> {
    let g = make_window(&WindowSpec::gaussian(8.0), 128)?;
    GaborSystem::new(g, 8, 8)?.canonical_dual()
}

/// Orthonormal Gabor basis on L = 256 (16-sample tiling window at critical
/// sampling): zero cross-terms, which the planted-rate construction needs.
pub fn onb_system_256() -> Result<GaborSystem> {
    let a = 16usize;
    let l = 256usize;
    let mut samples = vec![0.0; l];
    let inv = 1.0 / (a as f64).sqrt();
    for s in samples.iter_mut().take(a) {
        *s = inv;
    }
    let g = make_window(
        &WindowSpec {
            kind: WindowKind::Custom(samples),
            width: 1.0,
            normalization: Normalization::None,
        },
        l,
    )?;
    GaborSystem::new(g, a, l / a)?.canonical_dual()
}

/// Critically sampled L = 16, a = b = 4 frame for the exhaustive oracle.
/// Every even window is exactly singular on this lattice (a symmetry-forced
/// Zak zero), so the window is a skewed Gaussian, which gives A/B ~ 0.09.
pub fn skewed_frame_16() -> Result<GaborSystem> {
    let l = 16usize;
    let gauss = make_window(&WindowSpec::gaussian(4.0), l)?;
    let samples: Vec<f64> = gauss
        .data()
        .iter()
        .enumerate()
        .map(|(t, z)| z.re * (1.0 + 0.5 * (std::f64::consts::TAU * t as f64 / l as f64).sin()))
        .collect();
    let g = make_window(
        &WindowSpec {
            kind: WindowKind::Custom(samples),
            width: 1.0,
            normalization: Normalization::UnitL2,
        },
        l,
    )?;
    GaborSystem::new(g, 4, 4)?.canonical_dual()
}

fn random_signal(l: usize, rng: &mut SeededRng) -> Result<Signal> {
    Signal::new((0..l).map(|_| rng.complex_normal()).collect())
}

/// Criterion 1: both reconstruction directions on 100 seeded random signals.
pub fn criterion_1_reconstruction(seed: u64) -> Result<CriterionOutcome> {
    let sys = gaussian_frame_128()?;
    let mut worst_dual = 0.0f64;
    let mut worst_primal = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = SeededRng::substream(seed, trial);
        let f = random_signal(128, &mut rng)?;
        let nf = f.norm_l2();
        let rec1 = sys.synthesize(&sys.analyze(&f)?, WindowChoice::Dual)?;
        let rec2 = sys.synthesize(&sys.analyze_with(&f, WindowChoice::Dual)?, WindowChoice::Primal)?;
        worst_dual = worst_dual.max(rec1.sub(&f)?.norm_l2() / nf);
        worst_primal = worst_primal.max(rec2.sub(&f)?.norm_l2() / nf);
    }
    let passed = worst_dual <= RECONSTRUCTION_TOL && worst_primal <= RECONSTRUCTION_TOL;
    Ok(CriterionOutcome {
        id: 1,
        name: "reconstruction round trip",
        passed,
        details: json!({
            "L": 128, "a": 8, "b": 8, "signals": 100,
            "worst_dual_synthesis": worst_dual,
            "worst_primal_synthesis": worst_primal,
            "tolerance": RECONSTRUCTION_TOL,
        }),
        csv: None,
    })
}

/// Criterion 2: the frame inequality on random probes plus the tight
/// full-STFT case.
pub fn criterion_2_frame_inequality(seed: u64) -> Result<CriterionOutcome> {
    let sys = gaussian_frame_128()?;
    let (a, b) = sys.bounds().expect("bounds attached");
    let mut worst_slack = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = SeededRng::substream(seed, trial);
        let f = random_signal(128, &mut rng)?;
        let quad = sys.frame_operator(&f)?.inner(&f)?.re;
        let nn = f.norm_l2().powi(2);
        let below = (a * nn - quad) / (a * nn);
        let above = (quad - b * nn) / (b * nn);
        worst_slack = worst_slack.max(below.max(above));
    }

    let tight = {
        let g = make_window(&WindowSpec::gaussian(5.0), 32)?;
        GaborSystem::new(g, 1, 1)?
    };
    let (ta, tb) = tight.frame_bounds()?;
    let tightness = tb / ta - 1.0;

    let passed = worst_slack <= RECONSTRUCTION_TOL && tightness <= TIGHTNESS_TOL;
    Ok(CriterionOutcome {
        id: 2,
        name: "frame inequality sandwich",
        passed,
        details: json!({
            "A": a, "B": b, "probes": 100,
            "worst_relative_slack": worst_slack,
            "tight_case": {"L": 32, "a": 1, "b": 1, "A": ta, "B": tb, "B_over_A_minus_1": tightness},
        }),
        csv: None,
    })
}

/// Criterion 3: the flat (2,2) modulation norm lies in [sqrt(A)|f|, sqrt(B)|f|].
pub fn criterion_3_norm_equivalence(seed: u64) -> Result<CriterionOutcome> {
    let sys = gaussian_frame_128()?;
    let (a, b) = sys.bounds().expect("bounds attached");
    let params = NormParams::flat(2.0, 2.0)?;
    let mut worst_low = f64::INFINITY;
    let mut worst_high = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = SeededRng::substream(seed, trial);
        let f = random_signal(128, &mut rng)?;
        let ratio = modulation_norm(&f, &sys, &params)? / f.norm_l2();
        worst_low = worst_low.min(ratio / a.sqrt());
        worst_high = worst_high.max(ratio / b.sqrt());
    }
    let passed =
        worst_low >= 1.0 - NORM_INTERVAL_GUARD && worst_high <= 1.0 + NORM_INTERVAL_GUARD;
    Ok(CriterionOutcome {
        id: 3,
        name: "(2,2) norm between frame bounds",
        passed,
        details: json!({
            "sqrtA_margin": worst_low, "sqrtB_margin": worst_high,
            "probes": 100, "guard": NORM_INTERVAL_GUARD,
        }),
        csv: None,
    })
}

/// Criterion 4: componentwise-larger exponents shrink flat mixed norms.
pub fn criterion_4_embedding(seed: u64) -> Result<CriterionOutcome> {
    let pairs = [
        ((1.0, 1.0), (2.0, 2.0)),
        ((1.0, 2.0), (2.0, 4.0)),
        ((1.5, 1.0), (1.5, 2.0)),
        ((2.0, 2.0), (f64::INFINITY, f64::INFINITY)),
    ];
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = SeededRng::substream(seed, trial);
        let grid = CoefficientGrid::new(
            4,
            4,
            64,
            (0..256).map(|_| rng.complex_normal()).collect(),
        )?;
        for ((p1, q1), (p2, q2)) in pairs {
            let n1 = mixed_norm(&grid, &NormParams::flat(p1, q1)?);
            let n2 = mixed_norm(&grid, &NormParams::flat(p2, q2)?);
            worst = worst.max((n2 - n1) / n1);
        }
    }
    let passed = worst <= EMBEDDING_TOL;
    Ok(CriterionOutcome {
        id: 4,
        name: "embedding monotonicity",
        passed,
        details: json!({
            "grids": 100, "index_pairs": 4,
            "worst_violation": worst, "tolerance": EMBEDDING_TOL,
        }),
        csv: None,
    })
}

/// Criterion 5: exhaustive <= greedy+ls <= greedy pointwise in the l2 error,
/// and greedy+ls within a factor 3 of the exhaustive infimum.
pub fn criterion_5_oracle_sandwich(seed: u64) -> Result<CriterionOutcome> {
    let sys = skewed_frame_16()?;
    let params = NormParams::flat(2.0, 2.0)?;
    let mut worst_factor = 0.0f64;
    let mut sandwich_ok = true;
    for trial in 0..20u64 {
        let mut rng = SeededRng::substream(seed, trial);
        let f = random_signal(16, &mut rng)?;
        for n in [1usize, 2, 3] {
            let (ex, _) = exhaustive_sigma(&sys, &f, n)?;
            let gls = greedy_nterm(&sys, &f, n, &params, true)?.error_l2;
            let g = greedy_nterm(&sys, &f, n, &params, false)?.error_l2;
            sandwich_ok &= ex <= gls * (1.0 + 1e-10) && gls <= g * (1.0 + 1e-10);
            if ex > 0.0 {
                worst_factor = worst_factor.max(gls / ex);
            }
        }
    }
    let passed = sandwich_ok && worst_factor <= ORACLE_FACTOR;
    Ok(CriterionOutcome {
        id: 5,
        name: "oracle sandwich",
        passed,
        details: json!({
            "L": 16, "a": 4, "b": 4, "seeds": 20, "Ns": [1, 2, 3],
            "sandwich_ordering": sandwich_ok,
            "worst_greedy_ls_over_exhaustive": worst_factor,
            "factor_limit": ORACLE_FACTOR,
        }),
        csv: None,
    })
}

/// Criterion 6: planted power-law direct rate on the L = 256 orthonormal
/// Gabor basis, plus stabilization of the characterizing partial sums.
pub fn criterion_6_direct_rate(seed: u64) -> Result<CriterionOutcome> {
    let sys = onb_system_256()?;
    let report = direct_rate_experiment(&sys, 1.0, 2.0, 1.1, 64, seed)?;
    let csv = direct_partial_sum_csv(&report);
    let details = serde_json::to_value(&report)?;
    Ok(CriterionOutcome {
        id: 6,
        name: "direct approximation rate",
        passed: report.passed,
        details,
        csv: Some(csv),
    })
}

fn direct_partial_sum_csv(report: &crate::theory::DirectReport) -> String {
    let mut out = String::from("N_max,partial_sum\n");
    for &(n, v) in &report.partial_sums {
        out.push_str(&format!("{},{}\n", n, crate::report::fmt_f64(v)));
    }
    out
}

/// Criterion 7: Bernstein ratio sweeps, diagonal and mixed, with C_hat
/// stability under trial doubling.
pub fn criterion_7_bernstein(seed: u64) -> Result<CriterionOutcome> {
    let sys = gaussian_frame_128()?;
    let ns: Vec<usize> = (0..=7).map(|j| 1usize << j).collect();
    let trials = 100usize;

    let source = NormParams::flat(1.0, 1.0)?;
    let target = NormParams::flat(2.0, 2.0)?;
    let diag = bernstein_ratio_sweep(
        &sys,
        &source,
        &target,
        BernsteinScale::Diagonal,
        &ns,
        trials,
        seed,
    )?;
    let diag2 = bernstein_ratio_sweep(
        &sys,
        &source,
        &target,
        BernsteinScale::Diagonal,
        &ns,
        2 * trials,
        seed,
    )?;
    let diag_stability = (diag2.c_hat / diag.c_hat).max(diag.c_hat / diag2.c_hat);

    let mixed = bernstein_ratio_sweep(
        &sys,
        &source,
        &target,
        BernsteinScale::Mixed,
        &ns,
        trials,
        seed,
    )?;
    let mixed2 = bernstein_ratio_sweep(
        &sys,
        &source,
        &target,
        BernsteinScale::Mixed,
        &ns,
        2 * trials,
        seed,
    )?;
    let mixed_stability = (mixed2.c_hat / mixed.c_hat).max(mixed.c_hat / mixed2.c_hat);

    let passed = diag.alpha_theory == 1.5
        && mixed.alpha_theory == 3.0
        && diag.bound_holds()
        && mixed.bound_holds()
        && diag.fitted_growth <= BERNSTEIN_GROWTH_CEILING
        && mixed.fitted_growth <= mixed.alpha_theory + 0.1
        && diag_stability <= BERNSTEIN_STABILITY_FACTOR
        && mixed_stability <= BERNSTEIN_STABILITY_FACTOR;

    let mut csv = String::from("N,max_ratio_diagonal,max_ratio_mixed\n");
    for (i, &n) in ns.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{}\n",
            n,
            crate::report::fmt_f64(diag.max_ratio[i]),
            crate::report::fmt_f64(mixed.max_ratio[i]),
        ));
    }
    // The growth exponent carries a +1 (diagonal) or +2 (mixed) over the
    // sharp sequence-space exponent 1/p - 1/q; report how the observed
    // growth compares with the sharp value so the slack is visible.
    let sharp_exponent = 0.5;
    Ok(CriterionOutcome {
        id: 7,
        name: "Bernstein ratio sweeps",
        passed,
        details: json!({
            "diagonal": serde_json::to_value(&diag)?,
            "diagonal_c_hat_stability": diag_stability,
            "mixed": serde_json::to_value(&mixed)?,
            "mixed_c_hat_stability": mixed_stability,
            "growth_ceiling": BERNSTEIN_GROWTH_CEILING,
            "sharp_exponent": sharp_exponent,
            "fitted_growth_within_sharp": diag.fitted_growth <= sharp_exponent + 0.1,
            "trials": trials,
        }),
        csv: Some(csv),
    })
}

/// Criterion 8: dyadic/direct series ratio inside the block-comparison
/// interval for synthetic power-law decays across doubling N_max.
pub fn criterion_8_dyadic_equivalence(_seed: u64) -> Result<CriterionOutcome> {
    let (alpha, lam) = (0.5, 1.0);
    let (a1, a2) = dyadic_equivalence_interval(alpha, lam);
    let mut rows = Vec::new();
    let mut passed = true;
    for beta in [0.75, 1.0, 1.5] {
        for n_max in [256usize, 512, 1024, 2048] {
            let ns: Vec<usize> = (1..=n_max).collect();
            let sig: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-beta)).collect();
            let table = SigmaTable::from_values(
                ns,
                sig,
                NormParams::flat(2.0, 2.0)?,
                Method::Greedy,
            )?;
            let sums = series_functional(&table, alpha, lam)?;
            passed &= sums.ratio >= a1 - 1e-12 && sums.ratio <= a2 + 1e-12;
            rows.push((beta, n_max, sums.ratio));
        }
    }
    let mut csv = String::from("beta,N_max,dyadic_over_direct\n");
    for (beta, n_max, ratio) in &rows {
        csv.push_str(&format!(
            "{beta},{n_max},{}\n",
            crate::report::fmt_f64(*ratio)
        ));
    }
    Ok(CriterionOutcome {
        id: 8,
        name: "dyadic series equivalence",
        passed,
        details: json!({
            "alpha": alpha, "lambda": lam,
            "interval": [a1, a2],
            "ratios": rows.iter().map(|&(b, n, r)| json!({"beta": b, "N_max": n, "ratio": r})).collect::<Vec<_>>(),
        }),
        csv: Some(csv),
    })
}

/// Criterion 9: the inverse-estimate ratio over a 20-signal family is
/// scale-invariant and its spread stays under 10^3.
pub fn criterion_9_inverse_bound(seed: u64) -> Result<CriterionOutcome> {
    let sys = gaussian_frame_128()?;
    let (p1, q1, p, q) = (1.0, 1.0, 2.0, 2.0);
    let params = NormParams::flat(p, q)?;
    let ns: Vec<usize> = (0..=8).map(|j| 1usize << j).collect(); // 1..=256 dyadic

    // Family: planted power laws across tau, a few sparse plants with
    // comparable amplitudes, noise, and chirps. Exactly-one-atom signals are
    // excluded: sigma_1 ~ 0 degenerates the majorant.
    let mut family: Vec<Signal> = Vec::new();
    let taus = [0.8, 1.0, 1.2, 1.5, 2.0];
    for (i, &tau) in taus.iter().enumerate() {
        for rep in 0..2u64 {
            let (f, _) = generate_test_signal(
                &TestSignal::PowerLawCoeffs {
                    atoms: 24,
                    tau,
                    min_separation: 1,
                },
                Some(&sys),
                128,
                seed.wrapping_add(17 * i as u64 + rep),
            )?;
            family.push(f);
        }
    }
    for rep in 0..4u64 {
        let (f, _) = generate_test_signal(
            &TestSignal::PowerLawCoeffs {
                atoms: 6,
                tau: 0.2,
                min_separation: 2,
            },
            Some(&sys),
            128,
            seed.wrapping_add(1000 + rep),
        )?;
        family.push(f);
    }
    for rep in 0..3u64 {
        let (f, _) = generate_test_signal(&TestSignal::Noise, None, 128, seed.wrapping_add(2000 + rep))?;
        family.push(f);
    }
    for (f0, f1) in [(2.0, 40.0), (10.0, 60.0), (0.0, 25.0)] {
        let (f, _) = generate_test_signal(&TestSignal::Chirp { f0, f1 }, None, 128, 0)?;
        family.push(f);
    }
    assert_eq!(family.len(), 20);

    let mut ratios = Vec::with_capacity(family.len());
    for f in &family {
        let table = sigma_curve(&sys, f, &ns, &params, Method::GreedyLs)?;
        let rep = inverse_bound_experiment(&sys, p1, q1, p, q, &table, f)?;
        ratios.push(rep.ratio);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0f64, f64::max);
    let spread = hi / lo;

    // scale invariance on the first family member
    let f = &family[0];
    let f2 = f.scaled(Complex64::new(2.0, 0.0));
    let t1 = sigma_curve(&sys, f, &ns, &params, Method::GreedyLs)?;
    let t2 = sigma_curve(&sys, &f2, &ns, &params, Method::GreedyLs)?;
    let r1 = inverse_bound_experiment(&sys, p1, q1, p, q, &t1, f)?;
    let r2 = inverse_bound_experiment(&sys, p1, q1, p, q, &t2, &f2)?;
    let scale_drift = (r2.ratio / r1.ratio - 1.0).abs();

    let passed = spread <= INVERSE_SPREAD_LIMIT && scale_drift <= INVERSE_SCALE_TOL;
    let mut csv = String::from("signal,ratio\n");
    for (i, r) in ratios.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", crate::report::fmt_f64(*r)));
    }
    Ok(CriterionOutcome {
        id: 9,
        name: "inverse bound family spread",
        passed,
        details: json!({
            "alpha_theory": r1.alpha_theory,
            "family_size": family.len(),
            "ratio_min": lo, "ratio_max": hi, "spread": spread,
            "spread_limit": INVERSE_SPREAD_LIMIT,
            "scale_drift": scale_drift,
        }),
        csv: Some(csv),
    })
}

/// Criterion 10: repeating a randomized experiment with the same seed
/// reproduces its CSV artifact byte for byte.
pub fn criterion_10_determinism(seed: u64) -> Result<CriterionOutcome> {
    let first = criterion_6_direct_rate(seed)?;
    let second = criterion_6_direct_rate(seed)?;
    let sigma_equal = first.csv == second.csv;

    let b1 = criterion_7_bernstein(seed)?;
    let b2 = criterion_7_bernstein(seed)?;
    let bernstein_equal = b1.csv == b2.csv;

    let passed = sigma_equal && bernstein_equal;
    Ok(CriterionOutcome {
        id: 10,
        name: "seeded determinism",
        passed,
        details: json!({
            "direct_csv_identical": sigma_equal,
            "bernstein_csv_identical": bernstein_equal,
        }),
        csv: None,
    })
}

/// Runs the whole battery in order.
pub fn run_all(seed: u64) -> Result<Vec<CriterionOutcome>> {
    Ok(vec![
        criterion_1_reconstruction(seed)?,
        criterion_2_frame_inequality(seed)?,
        criterion_3_norm_equivalence(seed)?,
        criterion_4_embedding(seed)?,
        criterion_5_oracle_sandwich(seed)?,
        criterion_6_direct_rate(seed)?,
        criterion_7_bernstein(seed)?,
        criterion_8_dyadic_equivalence(seed)?,
        criterion_9_inverse_bound(seed)?,
        criterion_10_determinism(seed)?,
    ])
}
