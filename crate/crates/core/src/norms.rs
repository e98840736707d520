//! Moderate weights and weighted mixed-norm sequence norms over coefficient
//! grids — the discrete realization of modulation-space norms.
//!
//! The mixed norm iterates an inner l^p over the time index k and an outer
//! l^q over the frequency index n, with the weight evaluated at the lattice
//! point `(a k, b n)` in cyclic coordinates. `p = inf` or `q = inf` replace
//! the corresponding sum with a supremum. Reductions run in a fixed k-major
//! order so results are bit-reproducible.

use crate::error::{Error, Result};
use crate::gabor::{CoefficientGrid, GaborSystem};
use crate::rng::SeededRng;
use crate::signal::{cyclic_distance, Signal};

/// A v-moderate weight on the time-frequency plane `Z_L x Z_L`.
///
/// `flat` is identically 1. `poly:s` is `m(x, w) = (1 + d(x)^2 + d(w)^2)^{s/2}`
/// with `d` the cyclic distance to 0, which is symmetric, >= 1, and moderate
/// with respect to itself: `m(z1 + z2) <= C m(z1) m(z2)` for `C = 2^{s/2}`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Flat,
    Polynomial { s: f64 },
}

impl WeightSpec {
    pub fn flat() -> Self {
        WeightSpec::Flat
    }

    pub fn polynomial(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::BadWeightOrder(s));
        }
        Ok(WeightSpec::Polynomial { s })
    }

    /// Weight value at the point `(x, freq)` on `Z_L x Z_L`.
    pub fn eval(&self, x: i64, freq: i64, l: usize) -> f64 {
        match self {
            WeightSpec::Flat => 1.0,
            WeightSpec::Polynomial { s } => {
                let dx = cyclic_distance(x.rem_euclid(l as i64) as usize, l);
                let dw = cyclic_distance(freq.rem_euclid(l as i64) as usize, l);
                (1.0 + dx * dx + dw * dw).powf(s / 2.0)
            }
        }
    }

    /// Cached moderation constant: the analytic `C` with
    /// `m(z1 + z2) <= C v(z1) m(z2)` for `v = m`.
    pub fn moderation_constant(&self) -> f64 {
        match self {
            WeightSpec::Flat => 1.0,
            WeightSpec::Polynomial { s } => (s / 2.0).exp2(),
        }
    }

    /// Empirical moderation constant over `samples` random lattice pairs:
    /// the largest observed `m(z1 + z2) / (m(z1) m(z2))`.
    pub fn fit_moderation_constant(&self, l: usize, samples: usize, seed: u64) -> f64 {
        let mut rng = SeededRng::new(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let (x1, w1) = (rng.below(l) as i64, rng.below(l) as i64);
            let (x2, w2) = (rng.below(l) as i64, rng.below(l) as i64);
            let lhs = self.eval(x1 + x2, w1 + w2, l);
            let rhs = self.eval(x1, w1, l) * self.eval(x2, w2, l);
            worst = worst.max(lhs / rhs);
        }
        worst
    }

    /// Grammar: `flat` or `poly:s=<real>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "flat" {
            return Ok(WeightSpec::Flat);
        }
        if let Some(rest) = text.strip_prefix("poly:s=") {
            let s: f64 = rest.parse().map_err(|_| Error::Parse {
                what: "weight order",
                input: text.to_string(),
            })?;
            return WeightSpec::polynomial(s);
        }
        Err(Error::Parse {
            what: "weight",
            input: text.to_string(),
        })
    }

    pub fn label(&self) -> String {
        match self {
            WeightSpec::Flat => "flat".to_string(),
            WeightSpec::Polynomial { s } => format!("poly:s={s}"),
        }
    }
}

/// Mixed-norm indices `1 <= p, q <= inf` plus a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct NormParams {
    p: f64,
    q: f64,
    pub weight: WeightSpec,
}

impl NormParams {
    pub fn new(p: f64, q: f64, weight: WeightSpec) -> Result<Self> {
        for e in [p, q] {
            if e.is_nan() || e < 1.0 {
                return Err(Error::BadExponent(e));
            }
        }
        Ok(Self { p, q, weight })
    }

    pub fn flat(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, WeightSpec::Flat)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Grammar: comma-separated `key=value` with keys `p`, `q`, `weight`;
    /// exponent values are reals or `inf`; weight values follow
    /// [`WeightSpec::parse`]. Example: `p=1,q=2,weight=poly:s=2`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = None;
        let mut q = None;
        let mut weight = WeightSpec::Flat;
        // The weight value itself contains no commas, so a plain split works.
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| Error::Parse {
                what: "norm params",
                input: text.to_string(),
            })?;
            match key.trim() {
                "p" => p = Some(parse_exponent(value)?),
                "q" => q = Some(parse_exponent(value)?),
                "weight" => {
                    // Re-join the possible "poly:s=<real>" split on '='.
                    let raw = &part[part.find('=').unwrap() + 1..];
                    weight = WeightSpec::parse(raw)?;
                }
                _ => {
                    return Err(Error::Parse {
                        what: "norm params key",
                        input: part.to_string(),
                    })
                }
            }
        }
        match (p, q) {
            (Some(p), Some(q)) => Self::new(p, q, weight),
            _ => Err(Error::Parse {
                what: "norm params (need p= and q=)",
                input: text.to_string(),
            }),
        }
    }

    pub fn label(&self) -> String {
        format!(
            "p={},q={},weight={}",
            fmt_exponent(self.p),
            fmt_exponent(self.q),
            self.weight.label()
        )
    }
}

fn parse_exponent(text: &str) -> Result<f64> {
    let t = text.trim();
    if t == "inf" || t == "infinity" {
        return Ok(f64::INFINITY);
    }
    t.parse().map_err(|_| Error::Parse {
        what: "exponent",
        input: text.to_string(),
    })
}

pub(crate) fn fmt_exponent(e: f64) -> String {
    if e.is_infinite() {
        "inf".to_string()
    } else {
        format!("{e}")
    }
}

/// Weighted mixed norm
/// `( sum_n ( sum_k |c_kn|^p m(ak, bn)^p )^{q/p} )^{1/q}`,
/// with suprema replacing sums when an exponent is infinite.
pub fn mixed_norm(c: &CoefficientGrid, params: &NormParams) -> f64 {
    let (p, q) = (params.p, params.q);
    let l = c.signal_len();
    let (a, b) = (c.time_step(), c.freq_step());
    let (kk, mm) = (c.time_positions(), c.freq_channels());

    let mut outer_sum = 0.0f64;
    let mut outer_sup = 0.0f64;
    for n in 0..mm {
        let mut inner_sum = 0.0f64;
        let mut inner_sup = 0.0f64;
        for k in 0..kk {
            let w = params.weight.eval((a * k) as i64, (b * n) as i64, l);
            let v = c.get(k, n).norm() * w;
            if p.is_infinite() {
                inner_sup = inner_sup.max(v);
            } else {
                inner_sum += powp(v, p);
            }
        }
        let inner = if p.is_infinite() {
            inner_sup
        } else {
            rootp(inner_sum, p)
        };
        if q.is_infinite() {
            outer_sup = outer_sup.max(inner);
        } else {
            outer_sum += powp(inner, q);
        }
    }
    if q.is_infinite() {
        outer_sup
    } else {
        rootp(outer_sum, q)
    }
}

/// `x^p` with the common exponents special-cased for speed and exactness.
fn powp(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

fn rootp(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / p)
    }
}

/// Modulation-space norm of a signal: the mixed norm of its Gabor analysis
/// coefficients. Requires frame bounds attached to the system and a genuine
/// frame (`A/B >= 1e-10`).
pub fn modulation_norm(f: &Signal, sys: &GaborSystem, params: &NormParams) -> Result<f64> {
    sys.require_frame()?;
    Ok(mixed_norm(&sys.analyze(f)?, params))
}

/// Coefficient-budget seminorm `( sum |c_kn|^p )^{1/p}` over the whole grid,
/// for any `p > 0`.
///
/// For a redundant dictionary this is the canonical-coefficient upper proxy
/// for the representation-infimum seminorm, not the infimum itself.
pub fn ap_seminorm(c: &CoefficientGrid, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::BadExponent(p));
    }
    let sum: f64 = c.data().iter().map(|z| powp(z.norm(), p)).sum();
    Ok(rootp(sum, p))
}
