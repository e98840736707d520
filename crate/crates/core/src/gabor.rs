//! Gabor systems on `Z_L`: analysis, synthesis, the frame operator, dense
//! frame bounds, and the canonical dual window.
//!
//! Atoms follow one convention everywhere: `atom(k, n) = T_{ak} M_{bn} g`
//! (modulation first, translation applied last), so
//! `atom(k, n)[t] = e^{2 pi i b n (t - a k) / L} g[t - a k]`. Analysis
//! coefficients are the inner products against these atoms, which makes
//! synthesis the exact adjoint of analysis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::ser::SerializeStruct;

use crate::error::{Error, Result};
use crate::signal::{unit_root, Signal};

/// Largest `L` for which the dense frame-operator path is allowed.
pub const DENSE_LIMIT: usize = 1024;

/// `A/B` below this is treated as rank-deficient, i.e. not a frame.
pub const FRAME_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowChoice {
    Primal,
    Dual,
}

/// A Gabor system `{T_{ak} M_{bn} g : 0 <= k < L/a, 0 <= n < L/b}` with
/// optional cached frame data (canonical dual window and frame bounds).
#[derive(Debug, Clone)]
pub struct GaborSystem {
    g: Signal,
    a: usize,
    b: usize,
    dual: Option<Signal>,
    bounds: Option<(f64, f64)>,
}

impl GaborSystem {
    /// Requires `a | L` and `b | L`. Systems with `a*b > L` are constructible
    /// but cannot be frames (fewer atoms than dimensions).
    pub fn new(g: Signal, a: usize, b: usize) -> Result<Self> {
        let l = g.len();
        if a == 0 || !l.is_multiple_of(a) {
            return Err(Error::LatticeMismatch {
                step: 'a',
                value: a,
                l,
            });
        }
        if b == 0 || !l.is_multiple_of(b) {
            return Err(Error::LatticeMismatch {
                step: 'b',
                value: b,
                l,
            });
        }
        Ok(Self {
            g,
            a,
            b,
            dual: None,
            bounds: None,
        })
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time_step(&self) -> usize {
        self.a
    }

    pub fn freq_step(&self) -> usize {
        self.b
    }

    /// Number of time positions `K = L/a`.
    pub fn time_positions(&self) -> usize {
        self.len() / self.a
    }

    /// Number of frequency channels `M = L/b`.
    pub fn freq_channels(&self) -> usize {
        self.len() / self.b
    }

    /// Total atom count `K * M`.
    pub fn atom_count(&self) -> usize {
        self.time_positions() * self.freq_channels()
    }

    /// `K*M / L = L / (a*b)`; a frame needs redundancy >= 1.
    pub fn redundancy(&self) -> f64 {
        self.len() as f64 / (self.a * self.b) as f64
    }

    pub fn window(&self) -> &Signal {
        &self.g
    }

    pub fn dual_window(&self) -> Option<&Signal> {
        self.dual.as_ref()
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    fn select_window(&self, which: WindowChoice) -> Result<&Signal> {
        match which {
            WindowChoice::Primal => Ok(&self.g),
            WindowChoice::Dual => self.dual.as_ref().ok_or(Error::DualMissing),
        }
    }

    /// The atom `T_{ak} M_{bn} w` for the selected window.
    pub fn atom(&self, k: usize, n: usize, which: WindowChoice) -> Result<Signal> {
        let w = self.select_window(which)?;
        Ok(crate::signal::tf_shift(
            w,
            (self.a * k) as i64,
            (self.b * n) as i64,
        ))
    }

    /// Errors unless cached bounds say `A/B >= 1e-10`.
    pub fn require_frame(&self) -> Result<()> {
        let (a, b) = self.bounds.ok_or(Error::BoundsMissing)?;
        if a < FRAME_RANK_TOL * b {
            return Err(Error::NotAFrame { ratio: a / b });
        }
        Ok(())
    }

    /// Gabor coefficients `<f, T_{ak} M_{bn} g>` on the lattice, via one
    /// length-L DFT per time position.
    pub fn analyze(&self, f: &Signal) -> Result<CoefficientGrid> {
        self.analyze_with(f, WindowChoice::Primal)
    }

    pub fn analyze_with(&self, f: &Signal, which: WindowChoice) -> Result<CoefficientGrid> {
        let w = self.select_window(which)?.clone();
        let l = self.len();
        if f.len() != l {
            return Err(Error::LengthMismatch(f.len(), l));
        }
        let (kk, mm) = (self.time_positions(), self.freq_channels());
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(l);
        let mut data = vec![Complex64::ZERO; kk * mm];
        let mut buf = vec![Complex64::ZERO; l];
        for k in 0..kk {
            let shift = self.a * k;
            for (t, slot) in buf.iter_mut().enumerate() {
                *slot = f.data()[t] * w.data()[(t + l - shift) % l].conj();
            }
            fft.process(&mut buf);
            // buf[w0] = sum_t f[t] conj(g[t - ak]) e^{-2 pi i w0 t / L}
            //         = <f, M_{w0} T_{ak} g>; the T-then-M atom convention
            // adds the phase e^{2 pi i b n a k / L}.
            for n in 0..mm {
                let phase = unit_root(l, (self.b * n * shift) % l);
                data[k * mm + n] = buf[self.b * n] * phase;
            }
        }
        CoefficientGrid::new(self.a, self.b, l, data)
    }

    /// `sum_{k,n} c[k][n] T_{ak} M_{bn} w` for the selected window.
    pub fn synthesize(&self, c: &CoefficientGrid, which: WindowChoice) -> Result<Signal> {
        let w = self.select_window(which)?;
        let l = self.len();
        if (c.a, c.b, c.l) != (self.a, self.b, l) {
            return Err(Error::GridShapeMismatch {
                a: c.a,
                b: c.b,
                l: c.l,
            });
        }
        let (kk, mm) = (self.time_positions(), self.freq_channels());
        let mut planner = FftPlanner::<f64>::new();
        let ifft = planner.plan_fft_inverse(l);
        let mut out = vec![Complex64::ZERO; l];
        let mut buf = vec![Complex64::ZERO; l];
        for k in 0..kk {
            buf.fill(Complex64::ZERO);
            for n in 0..mm {
                buf[self.b * n] = c.data[k * mm + n];
            }
            // Unnormalized inverse: buf[u] = sum_n c[k][n] e^{2 pi i b n u / L},
            // so w[u] * buf[u] placed at t = u + ak is row k's contribution
            // sum_n c[k][n] atom(k, n).
            ifft.process(&mut buf);
            let shift = self.a * k;
            for u in 0..l {
                out[(u + shift) % l] += w.data()[u] * buf[u];
            }
        }
        Signal::new(out)
    }

    /// Frame operator `S f = D_g C_g f` (analysis followed by synthesis with
    /// the primal window). Self-adjoint and positive semidefinite.
    pub fn frame_operator(&self, f: &Signal) -> Result<Signal> {
        let grid = self.analyze(f)?;
        self.synthesize(&grid, WindowChoice::Primal)
    }

    /// Extreme eigenvalues `(A, B)` of the dense `L x L` matrix of the frame
    /// operator. Refuses `L > 1024`; `A` may be ~0 for non-frames.
    pub fn frame_bounds(&self) -> Result<(f64, f64)> {
        let eig = self.dense_eigen()?;
        Ok(extreme_eigenvalues(&eig.eigenvalues))
    }

    /// Canonical dual system: solves `S gamma = g` densely and returns a copy
    /// of the system with `dual` and `bounds` attached.
    ///
    /// Fails with a "not a frame" error when the smallest eigenvalue of `S`
    /// is below `1e-10` times the largest.
    pub fn canonical_dual(&self) -> Result<GaborSystem> {
        let eig = self.dense_eigen()?;
        let (a, b) = extreme_eigenvalues(&eig.eigenvalues);
        if a < FRAME_RANK_TOL * b {
            return Err(Error::NotAFrame { ratio: a / b });
        }
        // gamma = V diag(1/lambda) V^H g
        let g = DVector::from_column_slice(self.g.data());
        let coeffs = eig.eigenvectors.adjoint() * g;
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, &lam)| c / Complex64::new(lam, 0.0)),
        );
        let gamma = &eig.eigenvectors * scaled;
        let dual = Signal::new(gamma.iter().copied().collect())?;
        Ok(GaborSystem {
            g: self.g.clone(),
            a: self.a,
            b: self.b,
            dual: Some(dual),
            bounds: Some((a, b)),
        })
    }

    /// Copy of the system with frame bounds attached (dual not computed).
    pub fn with_bounds(&self) -> Result<GaborSystem> {
        let mut sys = self.clone();
        sys.bounds = Some(sys.frame_bounds()?);
        Ok(sys)
    }

    fn dense_eigen(&self) -> Result<nalgebra::SymmetricEigen<Complex64, nalgebra::Dyn>> {
        let l = self.len();
        if l > DENSE_LIMIT {
            return Err(Error::DenseLimitExceeded(l));
        }
        // Column t of S is S e_t; assembly goes through the same
        // analysis/synthesis pipeline the rest of the crate uses.
        let mut s = DMatrix::<Complex64>::zeros(l, l);
        for t in 0..l {
            let e = Signal::delta(l, t)?;
            let col = self.frame_operator(&e)?;
            for (r, z) in col.data().iter().enumerate() {
                s[(r, t)] = *z;
            }
        }
        // Symmetrize away the last-bit asymmetry from floating-point assembly.
        let sh = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(nalgebra::SymmetricEigen::new(sh))
    }
}

fn extreme_eigenvalues(eigenvalues: &DVector<f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &lam in eigenvalues.iter() {
        lo = lo.min(lam);
        hi = hi.max(lam);
    }
    // S is PSD; clamp eigen-solver noise on singular systems.
    (lo.max(0.0), hi.max(0.0))
}

/// `K x M` grid of Gabor coefficients, tagged with the `(a, b, L)` shape of
/// the generating system. Stored k-major: `data[k * M + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientGrid {
    a: usize,
    b: usize,
    l: usize,
    data: Vec<Complex64>,
}

impl CoefficientGrid {
    pub fn new(a: usize, b: usize, l: usize, data: Vec<Complex64>) -> Result<Self> {
        if a == 0 || b == 0 || !l.is_multiple_of(a) || !l.is_multiple_of(b) {
            return Err(Error::GridShapeMismatch { a, b, l });
        }
        let (kk, mm) = (l / a, l / b);
        if data.len() != kk * mm {
            return Err(Error::GridShapeMismatch { a, b, l });
        }
        if let Some(i) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFiniteEntry(i));
        }
        Ok(Self { a, b, l, data })
    }

    pub fn zeros(sys: &GaborSystem) -> Self {
        Self {
            a: sys.time_step(),
            b: sys.freq_step(),
            l: sys.len(),
            data: vec![Complex64::ZERO; sys.atom_count()],
        }
    }

    pub fn time_step(&self) -> usize {
        self.a
    }

    pub fn freq_step(&self) -> usize {
        self.b
    }

    pub fn signal_len(&self) -> usize {
        self.l
    }

    pub fn time_positions(&self) -> usize {
        self.l / self.a
    }

    pub fn freq_channels(&self) -> usize {
        self.l / self.b
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, k: usize, n: usize) -> Complex64 {
        self.data[k * self.freq_channels() + n]
    }

    pub fn set(&mut self, k: usize, n: usize, z: Complex64) {
        let mm = self.freq_channels();
        self.data[k * mm + n] = z;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Iterates in the fixed k-major order.
    pub fn iter_indexed(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let mm = self.freq_channels();
        self.data
            .iter()
            .enumerate()
            .map(move |(i, &z)| (i / mm, i % mm, z))
    }

    pub fn scaled(&self, z: Complex64) -> CoefficientGrid {
        CoefficientGrid {
            a: self.a,
            b: self.b,
            l: self.l,
            data: self.data.iter().map(|c| c * z).collect(),
        }
    }

    pub fn add(&self, other: &CoefficientGrid) -> Result<CoefficientGrid> {
        if (self.a, self.b, self.l) != (other.a, other.b, other.l) {
            return Err(Error::GridShapeMismatch {
                a: other.a,
                b: other.b,
                l: other.l,
            });
        }
        Ok(CoefficientGrid {
            a: self.a,
            b: self.b,
            l: self.l,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x + y)
                .collect(),
        })
    }
}

// Grids interchange as {"a":…, "b":…, "L":…, "data": K x M array of [re, im]}.
impl serde::Serialize for CoefficientGrid {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mm = self.freq_channels();
        let rows: Vec<Vec<[f64; 2]>> = self
            .data
            .chunks(mm)
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        let mut st = ser.serialize_struct("CoefficientGrid", 4)?;
        st.serialize_field("a", &self.a)?;
        st.serialize_field("b", &self.b)?;
        st.serialize_field("L", &self.l)?;
        st.serialize_field("data", &rows)?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for CoefficientGrid {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            a: usize,
            b: usize,
            #[serde(rename = "L")]
            l: usize,
            data: Vec<Vec<[f64; 2]>>,
        }
        let raw = Raw::deserialize(de)?;
        let data = raw
            .data
            .into_iter()
            .flatten()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        CoefficientGrid::new(raw.a, raw.b, raw.l, data).map_err(serde::de::Error::custom)
    }
}
