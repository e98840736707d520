//! Best N-term approximation over the Gabor dictionary: greedy thresholding
//! of canonical-dual coefficients, least-squares coefficient refinement,
//! an exhaustive small-instance oracle, and per-N error curves.
//!
//! The greedy error field follows the requested measuring norm (the mixed
//! norm of the residual's analysis coefficients); the l2 residual is always
//! reported alongside, because least-squares optimality and the exhaustive
//! infimum are statements about the signal-space l2 norm.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gabor::{CoefficientGrid, GaborSystem, WindowChoice};
use crate::norms::{mixed_norm, NormParams};
use crate::signal::Signal;

/// Combinatorial budget for the exhaustive oracle.
pub const EXHAUSTIVE_BUDGET: u128 = 2_000_000;

/// Rank tolerance for least-squares refinement and basis extension.
const RANK_TOL: f64 = 1e-12;

/// A set of lattice cells `(k, n)`, kept in selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    entries: Vec<(usize, usize)>,
}

impl Support {
    pub fn new(entries: Vec<(usize, usize)>, kk: usize, mm: usize) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(k, n) in &entries {
            if k >= kk || n >= mm {
                return Err(Error::SupportOutOfBounds { k, n, kk, mm });
            }
            if !seen.insert((k, n)) {
                return Err(Error::DuplicateSupportIndex(k, n));
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// Entries in ascending `(k, n)` order, for set comparisons.
    pub fn sorted_entries(&self) -> Vec<(usize, usize)> {
        let mut v = self.entries.clone();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Greedy,
    GreedyLs,
    Exhaustive,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::GreedyLs => "greedy+ls",
            Method::Exhaustive => "exhaustive",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "greedy" => Ok(Method::Greedy),
            "greedy+ls" => Ok(Method::GreedyLs),
            "exhaustive" => Ok(Method::Exhaustive),
            other => Err(Error::Parse {
                what: "method",
                input: other.to_string(),
            }),
        }
    }
}

/// Result of a single N-term approximation.
#[derive(Debug, Clone)]
pub struct NtermApprox {
    pub approx: Signal,
    pub support: Support,
    /// Residual size in the requested measuring norm.
    pub error: f64,
    /// Plain l2 norm of the residual.
    pub error_l2: f64,
}

/// Greedy N-term approximation.
///
/// Selection keeps the `n` cells with the largest weighted canonical-dual
/// coefficient magnitudes `m(ak, bn) |c_kn|`, ties broken by smaller k then
/// smaller n. Coefficients are the dual coefficients restricted to the
/// support; with `refine` they are replaced by the l2-optimal coefficients
/// on the span of the selected atoms. Requires a prepared frame system
/// (canonical dual attached).
pub fn greedy_nterm(
    sys: &GaborSystem,
    f: &Signal,
    n: usize,
    params: &NormParams,
    refine: bool,
) -> Result<NtermApprox> {
    let checkpoints = [n];
    let mut out = greedy_sweep(sys, f, params, refine, &checkpoints)?;
    Ok(out.pop().expect("one checkpoint requested"))
}

/// Shared greedy engine: one ranking pass, then a single walk through the
/// selection order that reports the approximation at each checkpoint N.
fn greedy_sweep(
    sys: &GaborSystem,
    f: &Signal,
    params: &NormParams,
    refine: bool,
    checkpoints: &[usize],
) -> Result<Vec<NtermApprox>> {
    sys.require_frame()?;
    if f.len() != sys.len() {
        return Err(Error::LengthMismatch(f.len(), sys.len()));
    }
    let max_n = sys.atom_count();
    for window in checkpoints.windows(2) {
        if window[1] <= window[0] {
            return Err(Error::NsNotIncreasing);
        }
    }
    if let Some(&last) = checkpoints.last() {
        if last > max_n {
            return Err(Error::NOutOfRange { n: last, max: max_n });
        }
    }

    let order = selection_order(sys, f, params)?;
    let dual_coeffs = sys.analyze_with(f, WindowChoice::Dual)?;

    let mut residual = f.clone();
    // Orthonormal basis of the span of accepted atoms (refine path only).
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut results = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0usize;

    let record = |taken: usize, residual: &Signal, results: &mut Vec<NtermApprox>| -> Result<()> {
        let support = Support::new(
            order[..taken].to_vec(),
            sys.time_positions(),
            sys.freq_channels(),
        )?;
        let approx = f.sub(residual)?;
        let error = mixed_norm(&sys.analyze(residual)?, params);
        results.push(NtermApprox {
            approx,
            support,
            error,
            error_l2: residual.norm_l2(),
        });
        Ok(())
    };

    if checkpoints.first() == Some(&0) {
        record(0, &residual, &mut results)?;
        next_checkpoint = 1;
    }

    for (rank, &(k, n)) in order.iter().enumerate() {
        if next_checkpoint >= checkpoints.len() {
            break;
        }
        let atom = sys.atom(k, n, WindowChoice::Primal)?;
        if refine {
            // Modified Gram-Schmidt with one reorthogonalization pass; the
            // residual stays the exact l2 projection error on the selected
            // span. Dependent atoms extend nothing and leave it unchanged.
            let mut v: Vec<Complex64> = atom.data().to_vec();
            let atom_norm = atom.norm_l2();
            for _ in 0..2 {
                for q in &basis {
                    let proj: Complex64 =
                        v.iter().zip(q.iter()).map(|(x, y)| x * y.conj()).sum();
                    for (slot, y) in v.iter_mut().zip(q.iter()) {
                        *slot -= proj * y;
                    }
                }
            }
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if vnorm > RANK_TOL * atom_norm.max(1e-300) {
                let inv = 1.0 / vnorm;
                for z in &mut v {
                    *z *= inv;
                }
                let proj: Complex64 = residual
                    .data()
                    .iter()
                    .zip(v.iter())
                    .map(|(x, y)| x * y.conj())
                    .sum();
                let mut new_res = residual.into_data();
                for (slot, y) in new_res.iter_mut().zip(v.iter()) {
                    *slot -= proj * y;
                }
                residual = Signal::new(new_res)?;
                basis.push(v);
            }
        } else {
            let c = dual_coeffs.get(k, n);
            let mut new_res = residual.into_data();
            for (slot, y) in new_res.iter_mut().zip(atom.data()) {
                *slot -= c * y;
            }
            residual = Signal::new(new_res)?;
        }
        let taken = rank + 1;
        if checkpoints[next_checkpoint] == taken {
            record(taken, &residual, &mut results)?;
            next_checkpoint += 1;
        }
    }
    Ok(results)
}

/// All lattice cells ranked by decreasing `m(ak, bn) |c_kn|` of the
/// canonical-dual coefficients, ties broken lexicographically by `(k, n)`.
fn selection_order(
    sys: &GaborSystem,
    f: &Signal,
    params: &NormParams,
) -> Result<Vec<(usize, usize)>> {
    let dual_coeffs = sys.analyze_with(f, WindowChoice::Dual)?;
    let l = sys.len();
    let (a, b) = (sys.time_step(), sys.freq_step());
    let mut keyed: Vec<(f64, usize, usize)> = dual_coeffs
        .iter_indexed()
        .map(|(k, n, c)| {
            let w = params.weight.eval((a * k) as i64, (b * n) as i64, l);
            (w * c.norm(), k, n)
        })
        .collect();
    keyed.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then_with(|| x.1.cmp(&y.1))
            .then_with(|| x.2.cmp(&y.2))
    });
    Ok(keyed.into_iter().map(|(_, k, n)| (k, n)).collect())
}

/// l2-optimal coefficients on the span of the selected atoms, computed with
/// an SVD at rank tolerance 1e-12; rank deficiency yields the minimum-norm
/// solution. The returned grid carries the refined coefficients on the
/// support and zeros elsewhere.
pub fn ls_refine(sys: &GaborSystem, support: &Support, f: &Signal) -> Result<CoefficientGrid> {
    if support.cardinality() == 0 {
        return Err(Error::EmptySupport);
    }
    if f.len() != sys.len() {
        return Err(Error::LengthMismatch(f.len(), sys.len()));
    }
    let atoms: Vec<DVector<Complex64>> = support
        .entries()
        .iter()
        .map(|&(k, n)| {
            sys.atom(k, n, WindowChoice::Primal)
                .map(|a| DVector::from_column_slice(a.data()))
        })
        .collect::<Result<_>>()?;
    let coeffs = min_norm_lstsq(&atoms, f)?;
    let mut grid = CoefficientGrid::zeros(sys);
    for (&(k, n), c) in support.entries().iter().zip(coeffs.iter()) {
        grid.set(k, n, *c);
    }
    Ok(grid)
}

fn min_norm_lstsq(atoms: &[DVector<Complex64>], f: &Signal) -> Result<Vec<Complex64>> {
    let m = DMatrix::from_columns(atoms);
    let rhs = DVector::from_column_slice(f.data());
    let svd = m.svd(true, true);
    let smax = svd
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s));
    if smax == 0.0 {
        return Ok(vec![Complex64::ZERO; atoms.len()]);
    }
    let sol = svd
        .solve(&rhs, RANK_TOL * smax)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(sol.iter().copied().collect())
}

/// Exact best N-term l2 error by enumerating every support of size `n` and
/// refining coefficients on each: the ground-truth sigma_N for q = 2.
///
/// Enforces `binomial(K*M, n) <= 2e6`.
pub fn exhaustive_sigma(sys: &GaborSystem, f: &Signal, n: usize) -> Result<(f64, Support)> {
    let total = sys.atom_count();
    if f.len() != sys.len() {
        return Err(Error::LengthMismatch(f.len(), sys.len()));
    }
    if n > total {
        return Err(Error::NOutOfRange { n, max: total });
    }
    if n == 0 {
        return Ok((f.norm_l2(), Support::empty()));
    }
    let count = binomial(total, n);
    if count > EXHAUSTIVE_BUDGET {
        return Err(Error::CombinatorialBudget {
            atoms: total,
            n,
            count,
        });
    }

    let mm = sys.freq_channels();
    let atoms: Vec<DVector<Complex64>> = (0..total)
        .map(|i| {
            sys.atom(i / mm, i % mm, WindowChoice::Primal)
                .map(|a| DVector::from_column_slice(a.data()))
        })
        .collect::<Result<_>>()?;
    let rhs = DVector::from_column_slice(f.data());

    let mut best_err = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    for_each_combination(total, n, |sel| {
        let cols: Vec<DVector<Complex64>> = sel.iter().map(|&i| atoms[i].clone()).collect();
        let m = DMatrix::from_columns(&cols);
        let svd = m.clone().svd(true, true);
        let smax = svd
            .singular_values
            .iter()
            .fold(0.0f64, |acc, &s| acc.max(s));
        let err = if smax == 0.0 {
            rhs.norm()
        } else {
            match svd.solve(&rhs, RANK_TOL * smax) {
                Ok(c) => (&rhs - m * c).norm(),
                Err(_) => rhs.norm(),
            }
        };
        if err < best_err {
            best_err = err;
            best = sel.to_vec();
        }
    });
    let entries = best.into_iter().map(|i| (i / mm, i % mm)).collect();
    let support = Support::new(entries, sys.time_positions(), mm)?;
    Ok((best_err, support))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > EXHAUSTIVE_BUDGET.saturating_mul(1000) {
            return u128::MAX;
        }
    }
    acc
}

/// Lexicographic enumeration of all k-subsets of `0..n`.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        // advance the rightmost index that can still move
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Per-N approximation errors with raw and monotone (running-minimum) tracks.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    pub ns: Vec<usize>,
    pub sigma_raw: Vec<f64>,
    pub sigma_monotone: Vec<f64>,
    pub supports: Vec<Support>,
    pub norm: NormParams,
    pub method: Method,
}

impl SigmaTable {
    /// Builds a table from raw per-N values (supports empty), applying the
    /// running minimum. Used for synthetic decay families.
    pub fn from_values(
        ns: Vec<usize>,
        sigma_raw: Vec<f64>,
        norm: NormParams,
        method: Method,
    ) -> Result<Self> {
        if ns.is_empty() || ns.len() != sigma_raw.len() {
            return Err(Error::EmptyTable);
        }
        for w in ns.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::NsNotIncreasing);
            }
        }
        let supports = vec![Support::empty(); ns.len()];
        let sigma_monotone = running_min(&sigma_raw);
        Ok(Self {
            ns,
            sigma_raw,
            sigma_monotone,
            supports,
            norm,
            method,
        })
    }

    /// Monotone sigma at `n` by step lookup: the value at the largest
    /// tabulated N <= `n`. None if `n` precedes the first table entry.
    pub fn sigma_at(&self, n: usize) -> Option<f64> {
        let mut best = None;
        for (i, &tn) in self.ns.iter().enumerate() {
            if tn <= n {
                best = Some(self.sigma_monotone[i]);
            } else {
                break;
            }
        }
        best
    }

    /// CSV with the fixed header `N,sigma_raw,sigma_monotone,method,p,q,weight`.
    /// Floats carry 17 significant digits so they round-trip exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,sigma_raw,sigma_monotone,method,p,q,weight\n");
        for i in 0..self.ns.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.ns[i],
                crate::report::fmt_f64(self.sigma_raw[i]),
                crate::report::fmt_f64(self.sigma_monotone[i]),
                self.method.label(),
                crate::norms::fmt_exponent(self.norm.p()),
                crate::norms::fmt_exponent(self.norm.q()),
                self.norm.weight.label(),
            ));
        }
        out
    }

    /// JSON mirror of the CSV plus per-N supports.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ns": self.ns,
            "sigma_raw": self.sigma_raw,
            "sigma_monotone": self.sigma_monotone,
            "supports": self.supports.iter().map(|s| s.entries().to_vec()).collect::<Vec<_>>(),
            "method": self.method.label(),
            "norm": self.norm.label(),
        })
    }
}

fn running_min(values: &[f64]) -> Vec<f64> {
    let mut acc = f64::INFINITY;
    values
        .iter()
        .map(|&v| {
            acc = acc.min(v);
            acc
        })
        .collect()
}

/// Sweeps sigma_N over `ns`.
///
/// Greedy methods measure the residual in `params` and require a prepared
/// frame system. The exhaustive method is pinned to the plain l2 error
/// (`params` must be `p=2,q=2,weight=flat`) and is subject to the
/// combinatorial budget.
pub fn sigma_curve(
    sys: &GaborSystem,
    f: &Signal,
    ns: &[usize],
    params: &NormParams,
    method: Method,
) -> Result<SigmaTable> {
    if ns.is_empty() {
        return Err(Error::EmptyTable);
    }
    for w in ns.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::NsNotIncreasing);
        }
    }
    let (sigma_raw, supports) = match method {
        Method::Greedy | Method::GreedyLs => {
            let results = greedy_sweep(sys, f, params, method == Method::GreedyLs, ns)?;
            let sigmas = results.iter().map(|r| r.error).collect::<Vec<_>>();
            let supports = results.into_iter().map(|r| r.support).collect::<Vec<_>>();
            (sigmas, supports)
        }
        Method::Exhaustive => {
            if params.p() != 2.0 || params.q() != 2.0 || params.weight != crate::norms::WeightSpec::Flat
            {
                return Err(Error::InvalidArgument(
                    "exhaustive sigma is defined in the plain l2 error; use p=2,q=2,weight=flat"
                        .to_string(),
                ));
            }
            let mut sigmas = Vec::with_capacity(ns.len());
            let mut supports = Vec::with_capacity(ns.len());
            for &n in ns {
                let (err, support) = exhaustive_sigma(sys, f, n)?;
                sigmas.push(err);
                supports.push(support);
            }
            (sigmas, supports)
        }
    };
    let sigma_monotone = running_min(&sigma_raw);
    Ok(SigmaTable {
        ns: ns.to_vec(),
        sigma_raw,
        sigma_monotone,
        supports,
        norm: params.clone(),
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::WeightSpec;
    use crate::rng::SeededRng;
    use crate::signal::{make_window, Normalization, WindowKind, WindowSpec};
    use crate::testsig::{generate_test_signal, PlantedAtom, TestSignal};

    fn frame_system(l: usize, a: usize, b: usize, width: f64) -> GaborSystem {
        let g = make_window(&WindowSpec::gaussian(width), l).unwrap();
        GaborSystem::new(g, a, b).unwrap().canonical_dual().unwrap()
    }

    /// Critically sampled frame for oracle tests: an asymmetric window (even
    /// windows are singular at critical sampling).
    fn skewed_system(l: usize, a: usize, b: usize) -> GaborSystem {
        let gauss = make_window(&WindowSpec::gaussian((a as f64 * b as f64).sqrt()), l).unwrap();
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
        )
        .unwrap();
        GaborSystem::new(g, a, b).unwrap().canonical_dual().unwrap()
    }

    /// Orthonormal Gabor basis: indicator of one a-sample block at critical
    /// sampling (b = L/a). Cross-terms vanish exactly, which is what the
    /// support-recovery constructions require.
    fn onb_system(l: usize, a: usize) -> GaborSystem {
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
        )
        .unwrap();
        GaborSystem::new(g, a, l / a)
            .unwrap()
            .canonical_dual()
            .unwrap()
    }

    fn random_signal(l: usize, rng: &mut SeededRng) -> Signal {
        Signal::new((0..l).map(|_| rng.complex_normal()).collect()).unwrap()
    }

    #[test]
    fn greedy_n0_is_the_zero_approximant() {
        let sys = frame_system(64, 8, 4, 8.0);
        let params = NormParams::flat(2.0, 2.0).unwrap();
        let mut rng = SeededRng::new(41);
        let f = random_signal(64, &mut rng);
        let out = greedy_nterm(&sys, &f, 0, &params, true).unwrap();
        assert_eq!(out.support.cardinality(), 0);
        assert_eq!(out.approx.norm_l2(), 0.0);
        let full = crate::norms::modulation_norm(&f, &sys, &params).unwrap();
        assert!((out.error - full).abs() <= 1e-12 * full);
    }

    #[test]
    fn greedy_recovers_a_planted_atom() {
        let sys = frame_system(64, 8, 4, 8.0);
        let params = NormParams::flat(2.0, 2.0).unwrap();
        let f = sys.atom(3, 9, WindowChoice::Primal).unwrap();
        let out = greedy_nterm(&sys, &f, 1, &params, true).unwrap();
        assert_eq!(out.support.entries(), &[(3, 9)]);
        assert!(out.error_l2 <= 1e-8 * f.norm_l2(), "l2 residual {}", out.error_l2);
        assert!(out.error <= 1e-8 * crate::norms::modulation_norm(&f, &sys, &params).unwrap());
    }

    #[test]
    fn greedy_selects_the_largest_planted_atoms() {
        // Cross-terms must stay below 10% of the smallest kept coefficient
        // for thresholding to recover the planted top 8. A Gaussian frame at
        // redundancy R puts ~exp(-pi/(2R)) >= 21% of an atom's coefficient
        // into each free neighbour cell, which always outranks the weakest
        // planted atoms here; the tiling ONB has exactly zero cross-terms.
        let sys = onb_system(256, 16);
        let kind = TestSignal::PowerLawCoeffs {
            atoms: 32,
            tau: 1.0,
            min_separation: 2,
        };
        let (f, planted) = generate_test_signal(&kind, Some(&sys), 256, 4242).unwrap();
        let planted = planted.unwrap();
        let params = NormParams::flat(2.0, 2.0).unwrap();
        let out = greedy_nterm(&sys, &f, 8, &params, false).unwrap();

        let mut expected: Vec<(f64, usize, usize)> = planted
            .iter_indexed()
            .filter(|(_, _, z)| z.norm() > 0.0)
            .map(|(k, n, z)| (z.norm(), k, n))
            .collect();
        expected.sort_by(|x, y| y.0.total_cmp(&x.0));
        let expected: Vec<(usize, usize)> =
            expected.into_iter().take(8).map(|(_, k, n)| (k, n)).collect();
        let mut expected_sorted = expected.clone();
        expected_sorted.sort_unstable();
        assert_eq!(out.support.sorted_entries(), expected_sorted);
    }

    #[test]
    fn ls_refine_projects_onto_one_atom() {
        let sys = frame_system(64, 8, 4, 8.0);
        let mut rng = SeededRng::new(43);
        let f = random_signal(64, &mut rng);
        let support = Support::new(vec![(2, 3)], 8, 16).unwrap();
        let grid = ls_refine(&sys, &support, &f).unwrap();
        let atom = sys.atom(2, 3, WindowChoice::Primal).unwrap();
        let expect = f.inner(&atom).unwrap() / atom.norm_l2().powi(2);
        assert!((grid.get(2, 3) - expect).norm() < 1e-10);
        // residual orthogonal to the atom
        let approx = sys.synthesize(&grid, WindowChoice::Primal).unwrap();
        let residual = f.sub(&approx).unwrap();
        assert!(residual.inner(&atom).unwrap().norm() <= 1e-10 * f.norm_l2());
    }

    #[test]
    fn ls_refine_full_support_reconstructs_frames() {
        let sys = frame_system(32, 4, 4, 4.0);
        let mut rng = SeededRng::new(44);
        let f = random_signal(32, &mut rng);
        let all: Vec<(usize, usize)> = (0..sys.time_positions())
            .flat_map(|k| (0..sys.freq_channels()).map(move |n| (k, n)))
            .collect();
        let support = Support::new(all, sys.time_positions(), sys.freq_channels()).unwrap();
        let grid = ls_refine(&sys, &support, &f).unwrap();
        let approx = sys.synthesize(&grid, WindowChoice::Primal).unwrap();
        assert!(f.sub(&approx).unwrap().norm_l2() <= 1e-8 * f.norm_l2());
    }

    #[test]
    fn ls_refine_residual_orthogonal_to_every_selected_atom() {
        let sys = frame_system(64, 8, 4, 8.0);
        let mut rng = SeededRng::new(45);
        let f = random_signal(64, &mut rng);
        let support = Support::new(vec![(0, 1), (3, 7), (5, 2), (7, 15)], 8, 16).unwrap();
        let grid = ls_refine(&sys, &support, &f).unwrap();
        let approx = sys.synthesize(&grid, WindowChoice::Primal).unwrap();
        let residual = f.sub(&approx).unwrap();
        for &(k, n) in support.entries() {
            let atom = sys.atom(k, n, WindowChoice::Primal).unwrap();
            assert!(residual.inner(&atom).unwrap().norm() <= 1e-10 * f.norm_l2());
        }
    }

    #[test]
    fn ls_refine_handles_duplicate_directions() {
        // A window with period L/2 makes atom(0, 0) and atom(2, 0) literally
        // identical (a = 2, so the second is a shift by L/2). The rank-1
        // pair must produce the same residual as the single atom, with the
        // minimum-norm coefficient split.
        let l = 8;
        let inv = 0.5f64.sqrt();
        let samples = vec![inv, 0.0, 0.0, 0.0, inv, 0.0, 0.0, 0.0];
        let g = make_window(
            &WindowSpec {
                kind: WindowKind::Custom(samples),
                width: 1.0,
                normalization: Normalization::None,
            },
            l,
        )
        .unwrap();
        let sys = GaborSystem::new(g, 2, 2).unwrap();
        let a0 = sys.atom(0, 0, WindowChoice::Primal).unwrap();
        let a2 = sys.atom(2, 0, WindowChoice::Primal).unwrap();
        assert!(a0.sub(&a2).unwrap().norm_l2() < 1e-15, "atoms must coincide");

        let mut rng = SeededRng::new(46);
        let f = random_signal(l, &mut rng);
        let pair = Support::new(vec![(0, 0), (2, 0)], 4, 4).unwrap();
        let single = Support::new(vec![(0, 0)], 4, 4).unwrap();
        let grid_pair = ls_refine(&sys, &pair, &f).unwrap();
        let grid_single = ls_refine(&sys, &single, &f).unwrap();
        let res_pair = f
            .sub(&sys.synthesize(&grid_pair, WindowChoice::Primal).unwrap())
            .unwrap();
        let res_single = f
            .sub(&sys.synthesize(&grid_single, WindowChoice::Primal).unwrap())
            .unwrap();
        assert!((res_pair.norm_l2() - res_single.norm_l2()).abs() <= 1e-10 * f.norm_l2());
        // minimum-norm: the pair splits the single-atom coefficient equally
        let c = grid_single.get(0, 0);
        assert!((grid_pair.get(0, 0) - c * 0.5).norm() <= 1e-10 * c.norm());
        assert!((grid_pair.get(2, 0) - c * 0.5).norm() <= 1e-10 * c.norm());
    }

    #[test]
    fn ls_refine_rejects_empty_support() {
        let sys = frame_system(32, 4, 4, 4.0);
        let f = Signal::delta(32, 0).unwrap();
        assert!(matches!(
            ls_refine(&sys, &Support::empty(), &f),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn exhaustive_n0_and_planted_atom() {
        let sys = skewed_system(16, 4, 4);
        let mut rng = SeededRng::new(47);
        let f = random_signal(16, &mut rng);
        let (err, support) = exhaustive_sigma(&sys, &f, 0).unwrap();
        assert_eq!(support.cardinality(), 0);
        assert!((err - f.norm_l2()).abs() < 1e-14);

        let planted = sys.atom(1, 2, WindowChoice::Primal).unwrap();
        let (err, support) = exhaustive_sigma(&sys, &planted, 1).unwrap();
        assert!(err <= 1e-10, "oracle must find the planted atom, err={err}");
        assert_eq!(support.entries(), &[(1, 2)]);
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let sys = frame_system(256, 8, 8, 8.0); // 1024 atoms
        let f = Signal::delta(256, 0).unwrap();
        assert!(matches!(
            exhaustive_sigma(&sys, &f, 4),
            Err(Error::CombinatorialBudget { .. })
        ));
    }

    #[test]
    fn oracle_dominates_greedy_on_small_instances() {
        // exhaustive <= greedy+ls <= greedy in the l2 error, 20 seeds.
        let sys = skewed_system(16, 4, 4);
        let params = NormParams::flat(2.0, 2.0).unwrap();
        for seed in 0..20u64 {
            let mut rng = SeededRng::new(seed);
            let f = random_signal(16, &mut rng);
            for n in [1usize, 2] {
                let (ex, _) = exhaustive_sigma(&sys, &f, n).unwrap();
                let gls = greedy_nterm(&sys, &f, n, &params, true).unwrap().error_l2;
                let g = greedy_nterm(&sys, &f, n, &params, false).unwrap().error_l2;
                assert!(ex <= gls * (1.0 + 1e-10), "seed {seed} N {n}: {ex} vs {gls}");
                assert!(gls <= g * (1.0 + 1e-10), "seed {seed} N {n}: {gls} vs {g}");
            }
        }
    }

    #[test]
    fn refinement_never_hurts_in_l2() {
        let sys = frame_system(64, 8, 4, 8.0);
        let params = NormParams::flat(2.0, 2.0).unwrap();
        let mut rng = SeededRng::new(48);
        for _ in 0..10 {
            let f = random_signal(64, &mut rng);
            for n in [1usize, 4, 16] {
                let gls = greedy_nterm(&sys, &f, n, &params, true).unwrap().error_l2;
                let g = greedy_nterm(&sys, &f, n, &params, false).unwrap().error_l2;
                assert!(gls <= g * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sigma_curve_single_n0_entry() {
        let sys = frame_system(64, 8, 4, 8.0);
        let params = NormParams::flat(1.0, 2.0).unwrap();
        let mut rng = SeededRng::new(49);
        let f = random_signal(64, &mut rng);
        let table = sigma_curve(&sys, &f, &[0], &params, Method::GreedyLs).unwrap();
        let expect = crate::norms::modulation_norm(&f, &sys, &params).unwrap();
        assert_eq!(table.ns, vec![0]);
        assert!((table.sigma_raw[0] - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn sigma_collapses_at_the_planted_size() {
        // Comparable amplitudes at Chebyshev separation >= 4 on a
        // lattice-matched Gaussian (width sqrt(aL/b)): the strongest atom's
        // one-cell sidelobe (~0.46 of its coefficient) stays below the
        // weakest planted coefficient, so greedy recovery is exact and the
        // N=4 projection residual collapses.
        let sys = frame_system(64, 8, 4, (8.0f64 * 64.0 / 4.0).sqrt());
        let atoms = vec![
            PlantedAtom { k: 0, n: 0, coeff: Complex64::new(1.0, 0.0) },
            PlantedAtom { k: 0, n: 8, coeff: Complex64::new(0.0, -0.9) },
            PlantedAtom { k: 4, n: 4, coeff: Complex64::new(-0.8, 0.0) },
            PlantedAtom { k: 4, n: 12, coeff: Complex64::new(0.7, 0.2) },
        ];
        let (f, _) = generate_test_signal(
            &TestSignal::SparseGabor { atoms },
            Some(&sys),
            64,
            0,
        )
        .unwrap();
        let params = NormParams::flat(2.0, 2.0).unwrap();
        let table = sigma_curve(&sys, &f, &[1, 2, 4, 8], &params, Method::GreedyLs).unwrap();
        let sigma0 = crate::norms::modulation_norm(&f, &sys, &params).unwrap();
        let at4 = table.sigma_at(4).unwrap();
        assert!(at4 <= 1e-8 * sigma0, "sigma_4 = {at4}");
        // monotone track is non-increasing
        for w in table.sigma_monotone.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn sigma_at_full_support_vanishes() {
        let sys = frame_system(32, 4, 4, 4.0);
        let mut rng = SeededRng::new(50);
        let f = random_signal(32, &mut rng);
        let params = NormParams::flat(2.0, 2.0).unwrap();
        let full = sys.atom_count();
        let table = sigma_curve(&sys, &f, &[0, full / 2, full], &params, Method::GreedyLs).unwrap();
        assert!(table.sigma_monotone[2] <= 1e-8 * table.sigma_monotone[0]);
    }

    #[test]
    fn sigma_curve_rejects_unsorted_ns() {
        let sys = frame_system(32, 4, 4, 4.0);
        let f = Signal::delta(32, 0).unwrap();
        let params = NormParams::flat(2.0, 2.0).unwrap();
        assert!(matches!(
            sigma_curve(&sys, &f, &[2, 1], &params, Method::GreedyLs),
            Err(Error::NsNotIncreasing)
        ));
    }

    #[test]
    fn sigma_table_csv_and_lookup() {
        let params = NormParams::new(1.0, 2.0, WeightSpec::flat()).unwrap();
        let table = SigmaTable::from_values(
            vec![1, 2, 4, 8],
            vec![1.0, 0.5, 0.6, 0.125],
            params,
            Method::Greedy,
        )
        .unwrap();
        // running minimum flattens the raw bump at N=4
        assert_eq!(table.sigma_monotone, vec![1.0, 0.5, 0.5, 0.125]);
        assert_eq!(table.sigma_at(3), Some(0.5));
        assert_eq!(table.sigma_at(100), Some(0.125));
        assert_eq!(table.sigma_at(0), None);
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "N,sigma_raw,sigma_monotone,method,p,q,weight"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,"));
        assert!(first.ends_with(",greedy,1,2,flat"));
    }

    #[test]
    fn combination_enumeration_is_complete() {
        let mut seen = Vec::new();
        for_each_combination(5, 3, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen.first().unwrap(), &vec![0, 1, 2]);
        assert_eq!(seen.last().unwrap(), &vec![2, 3, 4]);
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(1024, 2), 1024 * 1023 / 2);
    }
}
