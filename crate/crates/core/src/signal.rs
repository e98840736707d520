//! Finite periodic signals on `Z_L`, the DFT kernel, time-frequency shift
//! operators, and window construction.
//!
//! The continuous line is replaced by the cyclic group `Z_L`; translations and
//! modulations are cyclic, so every operator here is an exact group action.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::de::Error as _;

use crate::error::{Error, Result};

/// Minimum admissible signal length.
pub const MIN_LEN: usize = 4;

/// A complex-valued vector of length `L >= 4`, unit-spaced on `Z_L`.
///
/// The length is fixed at construction and all entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    data: Vec<Complex64>,
}

impl Signal {
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if data.len() < MIN_LEN {
            return Err(Error::SignalTooShort(data.len()));
        }
        if let Some(i) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFiniteEntry(i));
        }
        Ok(Self { data })
    }

    pub fn zeros(l: usize) -> Result<Self> {
        Self::new(vec![Complex64::ZERO; l])
    }

    /// Unit impulse at index `at` (mod L).
    pub fn delta(l: usize, at: usize) -> Result<Self> {
        let mut data = vec![Complex64::ZERO; l];
        if l > 0 {
            data[at % l] = Complex64::ONE;
        }
        Self::new(data)
    }

    pub fn from_real(data: &[f64]) -> Result<Self> {
        Self::new(data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction enforces L >= 4
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `<self, other>`, conjugate-linear in `other`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    pub fn scaled(&self, z: Complex64) -> Signal {
        Signal {
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(Signal {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(Signal {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

// Signals interchange as JSON arrays of [re, im] pairs.
impl serde::Serialize for Signal {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(self.data.iter().map(|z| [z.re, z.im]))
    }
}

impl<'de> serde::Deserialize<'de> for Signal {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(de)?;
        let data = pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Signal::new(data).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftDirection {
    Forward,
    Inverse,
}

/// Discrete Fourier transform on `Z_L`.
///
/// Forward uses the kernel `e^{-2 pi i t w / L}`; the inverse carries the
/// `1/L` normalization so that `dft(dft(f, Forward), Inverse) == f`.
pub fn dft(f: &Signal, direction: FftDirection) -> Signal {
    let l = f.len();
    let mut buf = f.data().to_vec();
    let mut planner = FftPlanner::<f64>::new();
    match direction {
        FftDirection::Forward => planner.plan_fft_forward(l).process(&mut buf),
        FftDirection::Inverse => {
            planner.plan_fft_inverse(l).process(&mut buf);
            let scale = 1.0 / l as f64;
            for z in &mut buf {
                *z *= scale;
            }
        }
    }
    Signal { data: buf }
}

/// Cyclic translation `T_x f(t) = f(t - x)`.
pub fn translate(f: &Signal, x: i64) -> Signal {
    let l = f.len() as i64;
    let shift = x.rem_euclid(l) as usize;
    let l = f.len();
    let mut data = vec![Complex64::ZERO; l];
    for (t, slot) in data.iter_mut().enumerate() {
        *slot = f.data[(t + l - shift) % l];
    }
    Signal { data }
}

/// Modulation `M_w f(t) = e^{2 pi i w t / L} f(t)`.
pub fn modulate(f: &Signal, w: i64) -> Signal {
    let l = f.len();
    let w = w.rem_euclid(l as i64) as usize;
    let data = f
        .data
        .iter()
        .enumerate()
        .map(|(t, z)| z * unit_root(l, w * t))
        .collect();
    Signal { data }
}

/// Time-frequency shift `T_x M_w f` (modulation first, translation last).
pub fn tf_shift(f: &Signal, x: i64, w: i64) -> Signal {
    translate(&modulate(f, w), x)
}

/// `e^{2 pi i k / l}` with the argument reduced mod `l` before evaluation,
/// keeping phases well inside the accurate range of `sin`/`cos`.
pub(crate) fn unit_root(l: usize, k: usize) -> Complex64 {
    let theta = std::f64::consts::TAU * (k % l) as f64 / l as f64;
    Complex64::new(theta.cos(), theta.sin())
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowKind {
    Gaussian,
    Hann,
    Boxcar,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    UnitL2,
    None,
}

/// Parameters for [`make_window`]. `width` is in samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub width: f64,
    pub normalization: Normalization,
}

impl WindowSpec {
    pub fn gaussian(width: f64) -> Self {
        Self {
            kind: WindowKind::Gaussian,
            width,
            normalization: Normalization::UnitL2,
        }
    }

    pub fn hann(width: f64) -> Self {
        Self {
            kind: WindowKind::Hann,
            width,
            normalization: Normalization::UnitL2,
        }
    }

    pub fn boxcar(width: f64) -> Self {
        Self {
            kind: WindowKind::Boxcar,
            width,
            normalization: Normalization::UnitL2,
        }
    }

    pub fn custom(samples: Vec<f64>) -> Self {
        Self {
            kind: WindowKind::Custom(samples),
            width: 1.0,
            normalization: Normalization::UnitL2,
        }
    }
}

/// Builds a periodized window of length `L`.
///
/// The Gaussian kind is the periodization `g[n] = sum_j exp(-pi (n+jL)^2 / width^2)`,
/// summed over at least `j in [-4, 4]` and extended until the added ring falls
/// below 1e-16 of the accumulated value. Hann and boxcar are supported on
/// `|d| <= width/2` in cyclic distance `d` from 0, so all named kinds are even.
pub fn make_window(spec: &WindowSpec, l: usize) -> Result<Signal> {
    if l < MIN_LEN {
        return Err(Error::SignalTooShort(l));
    }
    let mut data: Vec<f64> = match &spec.kind {
        WindowKind::Custom(samples) => {
            if samples.len() != l {
                return Err(Error::BadCustomWindow {
                    got: samples.len(),
                    expected: l,
                });
            }
            samples.clone()
        }
        kind => {
            let width = spec.width;
            if width.is_nan() || width <= 0.0 || width > l as f64 {
                return Err(Error::BadWindowWidth(width));
            }
            match kind {
                WindowKind::Gaussian => periodized_gaussian(l, width),
                WindowKind::Hann => (0..l)
                    .map(|n| {
                        let d = cyclic_distance(n, l);
                        if d <= width / 2.0 {
                            let c = (std::f64::consts::PI * d / width).cos();
                            c * c
                        } else {
                            0.0
                        }
                    })
                    .collect(),
                WindowKind::Boxcar => (0..l)
                    .map(|n| {
                        if cyclic_distance(n, l) <= width / 2.0 {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
                WindowKind::Custom(_) => unreachable!(),
            }
        }
    };

    if spec.normalization == Normalization::UnitL2 {
        let norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::BadWindowWidth(spec.width));
        }
        for x in &mut data {
            *x /= norm;
        }
    }
    Signal::from_real(&data)
}

/// Cyclic distance from `n` to 0 on `Z_L`.
pub fn cyclic_distance(n: usize, l: usize) -> f64 {
    let n = n % l;
    n.min(l - n) as f64
}

fn periodized_gaussian(l: usize, width: f64) -> Vec<f64> {
    let mut g = vec![0.0; l];
    for (n, slot) in g.iter_mut().enumerate() {
        let mut acc = (-std::f64::consts::PI * (n as f64 / width).powi(2)).exp();
        let mut j = 1i64;
        loop {
            let up = n as f64 + (j * l as i64) as f64;
            let dn = n as f64 - (j * l as i64) as f64;
            let ring = (-std::f64::consts::PI * (up / width).powi(2)).exp()
                + (-std::f64::consts::PI * (dn / width).powi(2)).exp();
            acc += ring;
            if j >= 4 && ring < 1e-16 * acc.max(1e-300) {
                break;
            }
            j += 1;
        }
        *slot = acc;
    }
    g
}
