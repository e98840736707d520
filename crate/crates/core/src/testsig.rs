//! Deterministic test-signal generators.
//!
//! Every generator is a pure function of its parameters and a 64-bit seed;
//! the same seed yields bit-identical signals. Dictionary-based kinds plant
//! coefficients on a Gabor lattice and return the planted grid alongside the
//! signal, so experiments can check recovered supports against ground truth.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gabor::{CoefficientGrid, GaborSystem, WindowChoice};
use crate::rng::SeededRng;
use crate::signal::Signal;

/// A coefficient planted at lattice cell `(k, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedAtom {
    pub k: usize,
    pub n: usize,
    pub coeff: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestSignal {
    /// Explicit sparse Gabor expansion with the given atoms.
    SparseGabor { atoms: Vec<PlantedAtom> },
    /// `atoms` random lattice cells with sorted coefficient magnitudes
    /// `|c|_(j) = j^{-tau}` and uniform random phases. Cells are kept at
    /// pairwise Chebyshev distance >= `min_separation` on the (k, n) torus.
    PowerLawCoeffs {
        atoms: usize,
        tau: f64,
        min_separation: usize,
    },
    /// Unit-amplitude linear chirp sweeping bin `f0` to bin `f1` over the
    /// period. Deterministic; the seed is unused.
    Chirp { f0: f64, f1: f64 },
    /// Independent standard complex Gaussian samples.
    Noise,
}

impl TestSignal {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TestSignal::SparseGabor { .. } => "sparse-gabor",
            TestSignal::PowerLawCoeffs { .. } => "power-law-coeffs",
            TestSignal::Chirp { .. } => "chirp",
            TestSignal::Noise => "noise",
        }
    }

    fn needs_system(&self) -> bool {
        matches!(
            self,
            TestSignal::SparseGabor { .. } | TestSignal::PowerLawCoeffs { .. }
        )
    }
}

/// Generates a length-`l` signal. `sys` is required for the dictionary-based
/// kinds (`sparse-gabor`, `power-law-coeffs`), which synthesize with the
/// primal window and also return the planted grid.
pub fn generate_test_signal(
    kind: &TestSignal,
    sys: Option<&GaborSystem>,
    l: usize,
    seed: u64,
) -> Result<(Signal, Option<CoefficientGrid>)> {
    if kind.needs_system() && sys.is_none() {
        return Err(Error::SystemRequired {
            kind: kind.kind_name().to_string(),
        });
    }
    if let Some(sys) = sys {
        if sys.len() != l {
            return Err(Error::LengthMismatch(sys.len(), l));
        }
    }
    match kind {
        TestSignal::SparseGabor { atoms } => {
            let sys = sys.unwrap();
            let mut grid = CoefficientGrid::zeros(sys);
            for atom in atoms {
                if atom.k >= sys.time_positions() || atom.n >= sys.freq_channels() {
                    return Err(Error::SupportOutOfBounds {
                        k: atom.k,
                        n: atom.n,
                        kk: sys.time_positions(),
                        mm: sys.freq_channels(),
                    });
                }
                grid.set(atom.k, atom.n, atom.coeff);
            }
            let f = sys.synthesize(&grid, WindowChoice::Primal)?;
            Ok((f, Some(grid)))
        }
        TestSignal::PowerLawCoeffs {
            atoms,
            tau,
            min_separation,
        } => {
            let sys = sys.unwrap();
            let cells = place_separated_cells(sys, *atoms, *min_separation, seed)?;
            let mut rng = SeededRng::substream(seed, 1);
            let mut grid = CoefficientGrid::zeros(sys);
            for (j, &(k, n)) in cells.iter().enumerate() {
                let mag = ((j + 1) as f64).powf(-tau);
                grid.set(k, n, rng.unit_phase() * mag);
            }
            let f = sys.synthesize(&grid, WindowChoice::Primal)?;
            Ok((f, Some(grid)))
        }
        TestSignal::Chirp { f0, f1 } => {
            let lf = l as f64;
            let data = (0..l)
                .map(|t| {
                    let t = t as f64;
                    let phase = std::f64::consts::TAU * (f0 * t + (f1 - f0) * t * t / (2.0 * lf))
                        / lf;
                    Complex64::new(phase.cos(), phase.sin())
                })
                .collect();
            Ok((Signal::new(data)?, None))
        }
        TestSignal::Noise => {
            let mut rng = SeededRng::new(seed);
            let data = (0..l).map(|_| rng.complex_normal()).collect();
            Ok((Signal::new(data)?, None))
        }
    }
}

/// Rejection-samples `count` lattice cells with pairwise Chebyshev distance
/// >= `sep` on the (k, n) torus. Deterministic given the seed.
fn place_separated_cells(
    sys: &GaborSystem,
    count: usize,
    sep: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let (kk, mm) = (sys.time_positions(), sys.freq_channels());
    if count > kk * mm {
        return Err(Error::InvalidArgument(format!(
            "{count} atoms exceed the {kk}x{mm} lattice"
        )));
    }
    let mut rng = SeededRng::substream(seed, 0);
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let budget = 1000 * count.max(1);
    while cells.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::InvalidArgument(format!(
                "could not place {count} atoms with separation {sep} on a {kk}x{mm} lattice"
            )));
        }
        let cand = (rng.below(kk), rng.below(mm));
        let ok = cells.iter().all(|&(k, n)| {
            let dk = torus_dist(cand.0, k, kk);
            let dn = torus_dist(cand.1, n, mm);
            dk.max(dn) >= sep
        }) && !cells.contains(&cand);
        if ok {
            cells.push(cand);
        }
    }
    Ok(cells)
}

fn torus_dist(a: usize, b: usize, modulus: usize) -> usize {
    let d = a.abs_diff(b) % modulus;
    d.min(modulus - d)
}
