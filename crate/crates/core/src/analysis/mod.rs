//! Quasiperiodicity diagnostics: strobe sections, Lyapunov spectra, power
//! spectra with peak picking, and recurrence matrices.

pub mod lyapunov;
pub mod recurrence;
pub mod spectrum;
pub mod strobe;

pub use lyapunov::{lyapunov_spectrum, AttitudeFlow, Flow, LinearFlow, LyapunovEstimate, LyapunovOptions};
pub use recurrence::{recurrence, RecurrenceMatrix, MAX_RECURRENCE_SAMPLES};
pub use spectrum::{detect_peaks, power_spectrum, Peak, Spectrum, Window};
pub use strobe::{nearest_neighbor_gaps, strobe, GapStats, StrobeSeries};
