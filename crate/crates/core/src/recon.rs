//! Single-channel reconstruction: events to amplitude samples, samples to
//! Fourier coefficients, coefficients to supports and amplitudes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::encoder::{t_transform, EventStream};
use crate::error::{FriError, Result};
use crate::linalg::{condition_number, lstsq_qr, residual_inf};
use crate::prony::{
    annihilating_filter, recover_coefficients, supports_from_roots, AnnihilatingFilter,
    CoefficientFit, ILL_CONDITIONED,
};
use crate::signal_model::{harmonic_phasor, FourierVector, FriSignal, SignalKind, C64};

/// Error estimate above which a reconstruction is flagged ill-conditioned.
pub const ERROR_ESTIMATE_LIMIT: f64 = 1e-9;

/// Event-time Fourier system: row `m` is `exp(j l w0 t_m)` for `l = -K..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventVandermonde {
    pub matrix: DMatrix<C64>,
    pub model_order: usize,
    pub period: f64,
}

impl EventVandermonde {
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.matrix)
    }
}

pub fn build_g(times: &[f64], model_order: usize, period: f64) -> Result<EventVandermonde> {
    if model_order == 0 || !(period > 0.0) {
        return Err(FriError::InvalidArgument("need K >= 1 and T > 0".into()));
    }
    for i in 1..times.len() {
        if !(times[i] > times[i - 1]) {
            return Err(FriError::DuplicateTimes { index: i });
        }
    }
    let k = model_order as i64;
    let matrix = DMatrix::from_fn(times.len(), 2 * model_order + 1, |m, c| {
        harmonic_phasor(c as i64 - k, times[m], period)
    });
    Ok(EventVandermonde {
        matrix,
        model_order,
        period,
    })
}

/// Fourier coefficients fitted to amplitude samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierEstimate {
    pub fourier: FourierVector,
    /// `max_m |f_m - (G x)_m|`.
    pub residual: f64,
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Least-squares Fourier fit to `(t, f(t))` samples with distinct times.
pub(crate) fn fourier_from_samples(
    samples: &[(f64, f64)],
    model_order: usize,
    period: f64,
) -> Result<FourierEstimate> {
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let g = build_g(&times, model_order, period)?;
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| C64::new(s.1, 0.0)));
    let x = lstsq_qr(&g.matrix, &b)?;
    let residual = residual_inf(&g.matrix, &x, &b);
    let condition = g.condition_number();
    Ok(FourierEstimate {
        fourier: FourierVector::new(x.iter().copied().collect(), period)?,
        residual,
        condition,
        ill_conditioned: condition > ILL_CONDITIONED,
    })
}

pub(crate) fn insufficient(channel: usize, found: usize, model_order: usize) -> FriError {
    let required = 2 * model_order + 1;
    FriError::InsufficientEvents {
        channel,
        found,
        required,
        bound_hint: format!("(f_max - f_min) / {required}"),
    }
}

pub fn fourier_from_events(
    stream: &EventStream,
    model_order: usize,
    period: f64,
) -> Result<FourierEstimate> {
    stream.validate()?;
    if stream.len() < 2 * model_order + 1 {
        return Err(insufficient(stream.channel, stream.len(), model_order));
    }
    fourier_from_samples(&t_transform(stream), model_order, period)
}

/// What the decoder knows a priori: signal class and number of innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: SignalKind,
    pub model_order: usize,
}

impl ModelSpec {
    pub fn new(kind: SignalKind, model_order: usize) -> Self {
        Self { kind, model_order }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub tau: Vec<f64>,
    pub a: Vec<f64>,
    #[serde(rename = "L")]
    pub event_count: usize,
    #[serde(rename = "condG", with = "extended_float")]
    pub condition_g: f64,
    /// Largest annihilation residual `max_l |(h * y)_l| / ||y||` of the
    /// recovered filter on the weighted sequence `y`.
    #[serde(with = "extended_float")]
    pub residual: f64,
    /// Largest parameter error against the ground truth, when known.
    pub err: Option<f64>,
    #[serde(with = "extended_float")]
    pub fourier_residual: f64,
    #[serde(with = "extended_float")]
    pub nullspace_gap: f64,
    #[serde(with = "extended_float")]
    pub radial_deviation: f64,
    #[serde(with = "extended_float")]
    pub regression_condition: f64,
    /// First-order bound on the parameter error caused by round-off in the
    /// event data: `eps * condG * ||x|| / sigma_min(J)`, with `J` the
    /// Jacobian of the Fourier coefficients with respect to `(tau, a)`.
    #[serde(with = "extended_float")]
    pub error_estimate: f64,
    /// Set when `condG` or the regression condition exceeds `1e12`, or the
    /// error estimate exceeds [`ERROR_ESTIMATE_LIMIT`].
    pub ill_conditioned: bool,
}

/// Serialises non-finite diagnostics as the strings `"inf"`, `"-inf"` and
/// `"nan"`, which plain JSON numbers cannot carry.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *v {
            v if v.is_finite() => s.serialize_f64(v),
            v if v.is_nan() => s.serialize_str("nan"),
            v if v > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got {other:?}"
                ))),
            },
        }
    }
}

impl ReconstructionReport {
    pub fn with_ground_truth(mut self, truth: &FriSignal) -> Self {
        self.err = Some(parameter_error(&self.tau, &self.a, truth));
        self
    }
}

/// `x_l / w(l)`: the weighted exponential-sum sequence fed to Prony. Spline
/// DC terms are set to zero, which holds for any periodic spline.
pub fn exponential_sequence(x: &FourierVector, kind: SignalKind) -> Result<FourierVector> {
    let period = x.period();
    let m = x.order() as i64;
    let mut values = Vec::with_capacity(x.len());
    for l in -m..=m {
        match kind.spectral_weight(l, period) {
            Some(w) if w.norm() > 0.0 => values.push(x.get(l) / w),
            None if l == 0 && kind.is_spline() => values.push(C64::new(0.0, 0.0)),
            _ => return Err(FriError::KernelNullsSignal { harmonic: l }),
        }
    }
    FourierVector::new(values, period)
}

/// Prony plus amplitude regression on known Fourier coefficients.
pub(crate) struct Tail {
    pub kind: SignalKind,
    pub supports: Vec<f64>,
    pub filter: AnnihilatingFilter,
    pub annihilation_residual: f64,
}

pub(crate) fn supports_from_fourier(x: &FourierVector, model: &ModelSpec) -> Result<Tail> {
    let y = exponential_sequence(x, model.kind)?;
    let filter = annihilating_filter(&y, model.model_order)?;
    let supports = supports_from_roots(&filter.roots, x.period());
    let annihilation_residual = filter.convolution_residual(&y) / y.norm();
    Ok(Tail {
        kind: model.kind,
        supports,
        filter,
        annihilation_residual,
    })
}

pub(crate) fn amplitudes_for(
    x: &FourierVector,
    supports: &[f64],
    kind: SignalKind,
) -> Result<CoefficientFit> {
    let period = x.period();
    recover_coefficients(x, supports, |l| kind.spectral_weight(l, period))
}

/// Smallest singular value of the real Jacobian of `x_l`, over the rows
/// where the spectral weight is defined, with respect to `(tau, a)`.
pub fn parameter_sensitivity(
    x: &FourierVector,
    supports: &[f64],
    amplitudes: &[f64],
    kind: SignalKind,
) -> f64 {
    let period = x.period();
    let m = x.order() as i64;
    let k = supports.len();
    let rows: Vec<(i64, C64)> = (-m..=m)
        .filter_map(|l| kind.spectral_weight(l, period).map(|w| (l, w / period)))
        .collect();
    let mut jac = DMatrix::<f64>::zeros(2 * rows.len(), 2 * k);
    for (r, &(l, w)) in rows.iter().enumerate() {
        let jlw = C64::new(0.0, -(l as f64) * x.omega0());
        for j in 0..k {
            let d_a = w * harmonic_phasor(-l, supports[j], period);
            let d_tau = d_a * jlw * amplitudes[j];
            jac[(2 * r, j)] = d_tau.re;
            jac[(2 * r + 1, j)] = d_tau.im;
            jac[(2 * r, k + j)] = d_a.re;
            jac[(2 * r + 1, k + j)] = d_a.im;
        }
    }
    jac.singular_values().min()
}

pub(crate) fn assemble(
    estimate: &FourierEstimate,
    tail: &Tail,
    fit: CoefficientFit,
    event_count: usize,
) -> ReconstructionReport {
    let sigma = parameter_sensitivity(
        &estimate.fourier,
        &tail.supports,
        &fit.amplitudes,
        tail.kind,
    );
    let error_estimate = f64::EPSILON * estimate.condition * estimate.fourier.norm() / sigma;
    ReconstructionReport {
        tau: tail.supports.clone(),
        a: fit.amplitudes,
        event_count,
        condition_g: estimate.condition,
        residual: tail.annihilation_residual,
        err: None,
        fourier_residual: estimate.residual,
        nullspace_gap: tail.filter.nullspace_gap(),
        radial_deviation: tail.filter.radial_deviation,
        regression_condition: fit.condition,
        error_estimate,
        ill_conditioned: estimate.ill_conditioned
            || fit.ill_conditioned
            || !(error_estimate <= ERROR_ESTIMATE_LIMIT),
    }
}

pub(crate) fn reconstruct_from_estimate(
    estimate: &FourierEstimate,
    model: &ModelSpec,
    event_count: usize,
) -> Result<ReconstructionReport> {
    let tail = supports_from_fourier(&estimate.fourier, model)?;
    let fit = amplitudes_for(&estimate.fourier, &tail.supports, model.kind)?;
    Ok(assemble(estimate, &tail, fit, event_count))
}

/// Full single-channel pipeline.
pub fn reconstruct(
    stream: &EventStream,
    model: &ModelSpec,
    period: f64,
) -> Result<ReconstructionReport> {
    let estimate = fourier_from_events(stream, model.model_order, period)?;
    reconstruct_from_estimate(&estimate, model, stream.len())
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Largest support or amplitude error under the best cyclic alignment of the
/// two sorted support lists. Supports are compared modulo the period, so an
/// estimate just below `T` matches a true support at `0`.
pub fn parameter_error(tau: &[f64], a: &[f64], truth: &FriSignal) -> f64 {
    let k = truth.model_order();
    if tau.len() != k || a.len() != k {
        return f64::INFINITY;
    }
    let period = truth.period();
    (0..k)
        .map(|shift| {
            (0..k)
                .map(|i| {
                    let j = (i + shift) % k;
                    let dt = circular_distance(tau[j], truth.supports()[i], period);
                    let da = (a[j] - truth.amplitudes()[i]).abs();
                    dt.max(da)
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}
