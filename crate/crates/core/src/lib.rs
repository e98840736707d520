//! Discrete Gabor-frame time-frequency analysis on the cyclic group `Z_L`.
//!
//! The crate models finite periodic signals, Gabor analysis/synthesis with
//! canonical dual windows, weighted mixed-norm sequence norms (discrete
//! modulation-space norms), and best N-term nonlinear approximation over the
//! Gabor dictionary. The `theory` layer turns direct/inverse approximation
//! estimates and Bernstein-type inequalities into reproducible numerical
//! experiments, and `suite` bundles the verification battery run by the
//! `gabor` CLI.
//!
//! Everything is deterministic: randomized experiments draw from a single
//! 64-bit seed through counter-based substreams, and all reductions use a
//! fixed summation order.

pub mod error;
pub mod gabor;
pub mod norms;
pub mod nterm;
pub mod report;
pub mod rng;
pub mod signal;
pub mod suite;
pub mod testsig;
pub mod theory;

pub use error::Error;
pub use gabor::{CoefficientGrid, GaborSystem, WindowChoice};
pub use norms::{ap_seminorm, mixed_norm, modulation_norm, NormParams, WeightSpec};
pub use nterm::{
    exhaustive_sigma, greedy_nterm, ls_refine, sigma_curve, Method, NtermApprox, SigmaTable,
    Support,
};
pub use signal::{
    dft, make_window, modulate, tf_shift, translate, FftDirection, Normalization, Signal,
    WindowKind, WindowSpec,
};
pub use testsig::{generate_test_signal, PlantedAtom, TestSignal};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
