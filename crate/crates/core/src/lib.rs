//! Event-driven sampling and exact reconstruction of signals with a finite
//! rate of innovation.
//!
//! A periodic stream of Diracs, pulses, or nonuniform splines is smoothed by a
//! compactly supported sum-of-modulated-splines kernel and fed to a
//! threshold-crossing encoder. From the event times and polarities alone the
//! decoder recovers the Fourier coefficients of the smoothed signal, locates
//! the innovations with an annihilating filter, and fits their amplitudes.
//!
//! ```
//! use neurofri::{encoder::Encoder, kernels::SamplingKernel, recon, signal_model::*};
//!
//! let x = FriSignal::new(SignalKind::DiracStream, vec![1.0, -0.5], vec![0.2, 0.7], 1.0).unwrap();
//! let f = FilteredSignal::new(&x, &SamplingKernel::sms(0, 2, 1.0)).unwrap();
//! let bound = neurofri::encoder::max_threshold_for(&f, 1.0, 5).unwrap();
//! let events = Encoder::new(0.9 * bound, 1.0).encode(&f).unwrap();
//! let report = recon::reconstruct(&events, &recon::ModelSpec::new(x.kind(), 2), 1.0).unwrap();
//! assert!(recon::parameter_error(&report.tau, &report.a, &x) < 1e-9);
//! ```

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod encoder;
pub mod error;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod multichannel;
pub mod par;
pub mod prony;
pub mod recon;
mod scan;
pub mod scenarios;
pub mod signal_model;
pub mod synth;

pub use error::{FriError, Result};
pub use par::Execution;
