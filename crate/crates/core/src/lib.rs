//! Estimation of random time shifts in noisy periodic curves and of the
//! density of those shifts.

pub mod density;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod seed;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
pub use estimation::*;
pub use signal::{
    generate_curve, generate_panel, generate_panel_with_shifts, half_sine_signal, sample_shifts, CosineSignal,
    CurvePanel, SampledSignal, ShiftDistribution, Signal, TimeGrid,
};
pub use spectral::{empirical_spectrum, EmpiricalSpectrum};
