//! Parametric FRI signal classes and their Fourier-series coefficients.
//!
//! Every signal is periodised with period `T`. Its Fourier coefficients share
//! one structure,
//!
//! ```text
//! x_l = (1/T) * w(l) * sum_k a_k exp(-j l w0 tau_k)
//! ```
//!
//! where the spectral weight `w(l)` is `1` for Dirac streams, the pulse
//! spectrum `phi(l w0)` for pulse streams, and `(j w0 l)^-(n+1)` for
//! nonuniform splines of degree `n` (undefined at `l = 0`).

use std::f64::consts::PI;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{FriError, Result};
use crate::kernels::{
    bspline_eval, check_alias_cancellation, sinc, SamplingKernel, MAX_SPLINE_ORDER,
};

pub type C64 = Complex<f64>;

/// Highest spline degree handled by the closed-form time-domain evaluation.
pub const MAX_LSPLINE_DEGREE: usize = 8;

const CONJ_SYMMETRY_TOL: f64 = 1e-9;
const SPLINE_BALANCE_TOL: f64 = 1e-9;

// B_0 .. B_9, with B_1 = -1/2.
const BERNOULLI: [f64; 10] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
];

/// Anything that can be sampled in time, e.g. a filtered signal or a test
/// waveform.
pub trait Waveform: Sync {
    fn value(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> Waveform for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pulse {
    Dirac,
    /// `phi(t) = beta_r(t / scale)`.
    ScaledBspline {
        order: usize,
        scale: f64,
    },
}

impl Pulse {
    pub fn fourier(&self, omega: f64) -> f64 {
        match *self {
            Pulse::Dirac => 1.0,
            Pulse::ScaledBspline { order, scale } => {
                scale * sinc(scale * omega / (2.0 * PI)).powi(order as i32 + 1)
            }
        }
    }

    /// Pulse spectrum on harmonic `l` of period `T`, with the argument formed
    /// as an exact ratio where possible.
    fn harmonic(&self, l: i64, period: f64) -> f64 {
        match *self {
            Pulse::Dirac => 1.0,
            Pulse::ScaledBspline { order, scale } => {
                scale * sinc(l as f64 * scale / period).powi(order as i32 + 1)
            }
        }
    }

    /// Time-domain value; `None` for the Dirac impulse.
    pub fn eval(&self, t: f64) -> Option<f64> {
        match *self {
            Pulse::Dirac => None,
            Pulse::ScaledBspline { order, scale } => Some(bspline_eval(order, t / scale)),
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            Pulse::Dirac => 0.0,
            Pulse::ScaledBspline { order, scale } => scale * (order as f64 + 1.0) / 2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Pulse::Dirac => Ok(()),
            Pulse::ScaledBspline { order, scale } => {
                if order > MAX_SPLINE_ORDER {
                    return Err(FriError::InvalidSignal(format!(
                        "pulse B-spline order {order} exceeds {MAX_SPLINE_ORDER}"
                    )));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(FriError::InvalidSignal(format!(
                        "pulse scale {scale} must be positive"
                    )));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SignalKind {
    DiracStream,
    PulseStream {
        pulse: Pulse,
    },
    /// Nonuniform spline whose `(degree+1)`-th derivative is a Dirac stream.
    LSpline {
        degree: usize,
    },
}

impl SignalKind {
    /// Spectral weight `w(l)` for period `T`; `None` where it is singular.
    pub fn spectral_weight(&self, l: i64, period: f64) -> Option<C64> {
        match *self {
            SignalKind::DiracStream => Some(C64::new(1.0, 0.0)),
            SignalKind::PulseStream { pulse } => Some(C64::new(pulse.harmonic(l, period), 0.0)),
            SignalKind::LSpline { degree } => {
                if l == 0 {
                    None
                } else {
                    let jw = C64::new(0.0, 2.0 * PI * l as f64 / period);
                    Some(jw.powi(-(degree as i32 + 1)))
                }
            }
        }
    }

    pub fn is_spline(&self) -> bool {
        matches!(self, SignalKind::LSpline { .. })
    }
}

/// `exp(j 2 pi l t / T)`. The product `l t / T` is reduced modulo one
/// exactly before scaling by `2 pi`, so the phase error stays at one
/// rounding regardless of `l`.
pub fn harmonic_phasor(l: i64, t: f64, period: f64) -> C64 {
    let u = t / period;
    let lf = l as f64;
    let p = lf * u;
    let tail = lf.mul_add(u, -p);
    let x = (p - p.round()) + tail;
    let (s, c) = (2.0 * PI * x).sin_cos();
    C64::new(c, s)
}

/// Contiguous Fourier-series coefficients `x_{-M} .. x_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierVector {
    values: Vec<C64>,
    order: usize,
    period: f64,
}

impl FourierVector {
    pub fn new(values: Vec<C64>, period: f64) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(FriError::InvalidArgument(format!(
                "Fourier vector length {} is not odd",
                values.len()
            )));
        }
        if !(period > 0.0) {
            return Err(FriError::InvalidArgument("period must be positive".into()));
        }
        let order = values.len() / 2;
        Ok(Self {
            values,
            order,
            period,
        })
    }

    /// Builds `x_l = f(l)` for `l = -M..M`.
    pub fn from_fn(order: usize, period: f64, f: impl Fn(i64) -> C64) -> Self {
        let m = order as i64;
        Self {
            values: (-m..=m).map(f).collect(),
            order,
            period,
        }
    }

    /// `M`; the vector holds `2M+1` values.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficient at harmonic `l`, `|l| <= M`.
    pub fn get(&self, l: i64) -> C64 {
        self.values[(l + self.order as i64) as usize]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|x_{-l} - conj(x_l)|`.
    pub fn conjugate_symmetry_error(&self) -> f64 {
        let m = self.order as i64;
        (0..=m)
            .map(|l| (self.get(-l) - self.get(l).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            order: self.order,
            period: self.period,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.order != other.order || self.period != other.period {
            return Err(FriError::InvalidArgument(
                "Fourier vectors have different shapes".into(),
            ));
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            order: self.order,
            period: self.period,
        })
    }
}

/// A `K`-parameter-pair FRI signal, periodised with period `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriSignal {
    kind: SignalKind,
    amplitudes: Vec<f64>,
    supports: Vec<f64>,
    period: f64,
}

impl FriSignal {
    pub fn new(
        kind: SignalKind,
        amplitudes: Vec<f64>,
        supports: Vec<f64>,
        period: f64,
    ) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(FriError::InvalidSignal(format!(
                "period {period} must be positive"
            )));
        }
        if amplitudes.is_empty() {
            return Err(FriError::InvalidSignal(
                "need at least one component".into(),
            ));
        }
        if amplitudes.len() != supports.len() {
            return Err(FriError::InvalidSignal(format!(
                "{} amplitudes but {} supports",
                amplitudes.len(),
                supports.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(FriError::InvalidSignal("non-finite amplitude".into()));
        }
        if supports[0] < 0.0
            || supports[supports.len() - 1] >= period
            || supports.iter().any(|t| !t.is_finite())
        {
            return Err(FriError::InvalidSignal(format!(
                "supports must lie in [0, {period})"
            )));
        }
        if let Some(i) = supports.windows(2).position(|w| w[1] <= w[0]) {
            return Err(FriError::InvalidSignal(format!(
                "supports not strictly increasing at index {}",
                i + 1
            )));
        }
        match kind {
            SignalKind::DiracStream => {}
            SignalKind::PulseStream { pulse } => pulse.validate()?,
            SignalKind::LSpline { degree } => {
                if degree > MAX_LSPLINE_DEGREE {
                    return Err(FriError::InvalidSignal(format!(
                        "spline degree {degree} exceeds {MAX_LSPLINE_DEGREE}"
                    )));
                }
                let sum: f64 = amplitudes.iter().sum();
                let scale: f64 = amplitudes.iter().map(|a| a.abs()).sum();
                if sum.abs() > SPLINE_BALANCE_TOL * scale.max(1.0) {
                    return Err(FriError::NonPeriodicSpline { degree, sum });
                }
            }
        }
        Ok(Self {
            kind,
            amplitudes,
            supports,
            period,
        })
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Number of components `K`.
    pub fn model_order(&self) -> usize {
        self.amplitudes.len()
    }

    /// `2K / T`.
    pub fn rate_of_innovation(&self) -> f64 {
        2.0 * self.model_order() as f64 / self.period
    }

    /// `(1/T) sum_k a_k exp(-j l w0 tau_k)`, the weight-free part of `x_l`.
    pub fn exponential_sum(&self, l: i64) -> C64 {
        self.amplitudes
            .iter()
            .zip(&self.supports)
            .map(|(&a, &tau)| a * harmonic_phasor(-l, tau, self.period))
            .sum::<C64>()
            / self.period
    }

    /// Analytic Fourier-series coefficients for `l = -M..M`.
    pub fn fourier_coefficients(&self, order: usize) -> Result<FourierVector> {
        let m = order as i64;
        match self.kind {
            SignalKind::LSpline { .. } if order == 0 => {
                return Err(FriError::InvalidArgument(
                    "spline signals need M >= 1: the l = 0 coefficient carries no support information".into(),
                ));
            }
            SignalKind::PulseStream { pulse } => {
                let dc = pulse.harmonic(0, self.period).abs();
                for l in 0..=m {
                    if pulse.harmonic(l, self.period).abs() <= 1e-12 * dc {
                        return Err(FriError::KernelNullsSignal { harmonic: l });
                    }
                }
            }
            _ => {}
        }
        Ok(FourierVector::from_fn(order, self.period, |l| {
            match self.kind.spectral_weight(l, self.period) {
                Some(w) => w * self.exponential_sum(l),
                None => C64::new(self.spline_mean(), 0.0),
            }
        }))
    }

    /// Mean over one period of the spline anchored at `x(0) = 0`.
    fn spline_mean(&self) -> f64 {
        let SignalKind::LSpline { degree } = self.kind else {
            return self.exponential_sum(0).re;
        };
        let m = degree + 1;
        let scale = self.period.powi(degree as i32) / factorial(m);
        scale
            * self
                .amplitudes
                .iter()
                .zip(&self.supports)
                .map(|(&a, &tau)| a * bernoulli_poly(m, (-tau / self.period).rem_euclid(1.0)))
                .sum::<f64>()
    }

    /// Time-domain value of the periodised signal. `None` for Dirac streams.
    pub fn time_value(&self, t: f64) -> Option<f64> {
        match self.kind {
            SignalKind::DiracStream
            | SignalKind::PulseStream {
                pulse: Pulse::Dirac,
            } => None,
            SignalKind::PulseStream { pulse } => {
                let reach = pulse.support_radius();
                let mut total = 0.0;
                for (&a, &tau) in self.amplitudes.iter().zip(&self.supports) {
                    let base = t - tau;
                    let n_lo = ((base - reach) / self.period).floor() as i64;
                    let n_hi = ((base + reach) / self.period).ceil() as i64;
                    for n in n_lo..=n_hi {
                        total += a * pulse.eval(base - n as f64 * self.period).unwrap_or(0.0);
                    }
                }
                Some(total)
            }
            SignalKind::LSpline { degree } => {
                let m = degree + 1;
                let scale = self.period.powi(degree as i32) / factorial(m);
                let periodic: f64 = self
                    .amplitudes
                    .iter()
                    .zip(&self.supports)
                    .map(|(&a, &tau)| {
                        a * bernoulli_poly(m, ((t - tau) / self.period).rem_euclid(1.0))
                    })
                    .sum();
                Some(self.spline_mean() - scale * periodic)
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bernoulli polynomial `B_m(x)`.
fn bernoulli_poly(m: usize, x: f64) -> f64 {
    (0..=m)
        .map(|k| binomial(m, k) * BERNOULLI[k] * x.powi((m - k) as i32))
        .sum()
}

/// The kernel-filtered signal `f(t) = sum_{|l|<=K} x_l g(l w0) exp(j l w0 t)`.
///
/// Stored as the non-negative half of a conjugate-symmetric spectrum, so
/// evaluation returns a real number by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSignal {
    half_spectrum: Vec<C64>,
    period: f64,
}

impl FilteredSignal {
    pub fn new(signal: &FriSignal, kernel: &SamplingKernel) -> Result<Self> {
        let k = signal.model_order();
        let report = check_alias_cancellation(kernel, k);
        if !report.passes {
            return Err(FriError::Aliasing {
                model_order: k,
                worst_harmonic: report.worst_harmonic,
                deviation: report.worst_deviation,
            });
        }
        let coeffs = signal.fourier_coefficients(k)?;
        let gained = FourierVector::from_fn(k, signal.period(), |l| {
            coeffs.get(l) * kernel.harmonic_gain(l)
        });
        Self::from_fourier(&gained)
    }

    /// Trigonometric polynomial with the given coefficients (kernel gain
    /// already applied).
    pub fn from_fourier(coeffs: &FourierVector) -> Result<Self> {
        let err = coeffs.conjugate_symmetry_error();
        if err > CONJ_SYMMETRY_TOL * coeffs.norm().max(1.0) {
            return Err(FriError::InvalidArgument(format!(
                "coefficients are not conjugate symmetric (error {err:.3e}); the filtered signal would be complex"
            )));
        }
        let m = coeffs.order() as i64;
        Ok(Self {
            half_spectrum: (0..=m).map(|l| coeffs.get(l)).collect(),
            period: coeffs.period(),
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn degree(&self) -> usize {
        self.half_spectrum.len() - 1
    }

    /// Fourier coefficient at harmonic `l` (`|l| <= K`).
    pub fn coefficient(&self, l: i64) -> C64 {
        let c = self.half_spectrum[l.unsigned_abs() as usize];
        if l < 0 {
            c.conj()
        } else {
            c
        }
    }
}

impl Waveform for FilteredSignal {
    fn value(&self, t: f64) -> f64 {
        let mut acc = self.half_spectrum[0].re;
        for (l, c) in self.half_spectrum.iter().enumerate().skip(1) {
            let z = harmonic_phasor(l as i64, t, self.period);
            acc += 2.0 * (c.re * z.re - c.im * z.im);
        }
        acc
    }
}

/// Evaluates the filtered signal at `t` by summing the full two-sided series.
///
/// Panics if the imaginary residue exceeds `1e-12`, which would mean the
/// coefficients were not those of a real signal.
pub fn eval_filtered(signal: &FriSignal, kernel: &SamplingKernel, t: f64) -> Result<f64> {
    let k = signal.model_order();
    let report = check_alias_cancellation(kernel, k);
    if !report.passes {
        return Err(FriError::Aliasing {
            model_order: k,
            worst_harmonic: report.worst_harmonic,
            deviation: report.worst_deviation,
        });
    }
    let coeffs = signal.fourier_coefficients(k)?;
    let ki = k as i64;
    let total: C64 = (-ki..=ki)
        .map(|l| coeffs.get(l) * kernel.harmonic_gain(l) * harmonic_phasor(l, t, signal.period()))
        .sum();
    assert!(
        total.im.abs() < 1e-12,
        "filtered signal has imaginary residue {:.3e}",
        total.im
    );
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig5a() -> FriSignal {
        FriSignal::new(
            SignalKind::DiracStream,
            vec![1.0; 5],
            vec![0.25, 0.375, 0.5, 0.625, 0.75],
            1.0,
        )
        .unwrap()
    }

    fn trapezoid_fourier(f: impl Fn(f64) -> f64, period: f64, l: i64, n: usize) -> C64 {
        let w0 = 2.0 * PI / period;
        let h = period / n as f64;
        (0..n)
            .map(|i| {
                let t = i as f64 * h;
                C64::from_polar(f(t), -(l as f64) * w0 * t)
            })
            .sum::<C64>()
            * (h / period)
    }

    #[test]
    fn single_impulse_at_origin_has_flat_spectrum() {
        let s = FriSignal::new(SignalKind::DiracStream, vec![1.0], vec![0.0], 1.0).unwrap();
        let x = s.fourier_coefficients(7).unwrap();
        for l in -7..=7 {
            assert!((x.get(l) - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn validation_rejects_bad_signals() {
        let dirac = SignalKind::DiracStream;
        assert!(FriSignal::new(dirac, vec![], vec![], 1.0).is_err());
        assert!(FriSignal::new(dirac, vec![1.0, 2.0], vec![0.5], 1.0).is_err());
        assert!(FriSignal::new(dirac, vec![1.0, 2.0], vec![0.5, 0.5], 1.0).is_err());
        assert!(FriSignal::new(dirac, vec![1.0], vec![1.0], 1.0).is_err());
        assert!(FriSignal::new(dirac, vec![1.0], vec![-0.1], 1.0).is_err());
        let spline = SignalKind::LSpline { degree: 0 };
        assert!(matches!(
            FriSignal::new(spline, vec![1.0, 0.5], vec![0.1, 0.6], 1.0),
            Err(FriError::NonPeriodicSpline { .. })
        ));
        let s = FriSignal::new(spline, vec![1.0, -1.0], vec![0.1, 0.6], 1.0).unwrap();
        assert!(s.fourier_coefficients(0).is_err());
        assert!(s.fourier_coefficients(1).is_ok());
    }

    #[test]
    fn rate_of_innovation() {
        assert_eq!(fig5a().rate_of_innovation(), 10.0);
    }

    #[test]
    fn vanishing_pulse_spectrum_is_rejected() {
        // beta_3(t/10) on T = 1 has a spectral zero on every nonzero harmonic
        let pulse = Pulse::ScaledBspline {
            order: 3,
            scale: 10.0,
        };
        let s =
            FriSignal::new(SignalKind::PulseStream { pulse }, vec![1.0], vec![0.2], 1.0).unwrap();
        assert_eq!(
            s.fourier_coefficients(5),
            Err(FriError::KernelNullsSignal { harmonic: 1 })
        );
    }

    #[test]
    fn pulse_coefficients_carry_pulse_spectrum() {
        let pulse = Pulse::ScaledBspline {
            order: 3,
            scale: 0.1,
        };
        let a = vec![0.49, -0.65, 0.47, -0.52, 0.22];
        let tau = vec![0.22, 0.35, 0.46, 0.62, 0.79];
        let ps = FriSignal::new(
            SignalKind::PulseStream { pulse },
            a.clone(),
            tau.clone(),
            1.0,
        )
        .unwrap();
        let ds = FriSignal::new(SignalKind::DiracStream, a, tau, 1.0).unwrap();
        let xp = ps.fourier_coefficients(5).unwrap();
        let xd = ds.fourier_coefficients(5).unwrap();
        for l in -5i64..=5 {
            let phi = pulse.fourier(2.0 * PI * l as f64);
            assert!((xp.get(l) - xd.get(l) * phi).norm() < 1e-15);
        }
        // and agree with quadrature of the periodised pulse train
        for l in -8i64..=8 {
            let q = trapezoid_fourier(|t| ps.time_value(t).unwrap(), 1.0, l, 1 << 14);
            let x = ps.fourier_coefficients(8).unwrap().get(l);
            assert!((q - x).norm() < 1e-8, "l = {l}: {q} vs {x}");
        }
    }

    #[test]
    fn spline_time_form_matches_coefficients() {
        for degree in 0..=2usize {
            let s = FriSignal::new(
                SignalKind::LSpline { degree },
                vec![0.7, -1.1, 0.9, -0.5],
                vec![0.05, 0.3, 0.55, 0.81],
                1.0,
            )
            .unwrap();
            assert!(s.time_value(0.0).unwrap().abs() < 1e-12);
            let x = s.fourier_coefficients(6).unwrap();
            // composite midpoint rule is exact enough once the panel count is large;
            // jumps for degree 0 limit accuracy to O(h)
            let n = 1 << 16;
            let tol = if degree == 0 { 1e-4 } else { 1e-8 };
            for l in -6i64..=6 {
                let q = trapezoid_fourier(|t| s.time_value(t).unwrap(), 1.0, l, n);
                assert!((q - x.get(l)).norm() < tol, "degree {degree}, l = {l}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_signals() {
        let x = fig5a().fourier_coefficients(9).unwrap();
        assert!(x.conjugate_symmetry_error() < 1e-12);
    }

    #[test]
    fn filtered_signal_matches_two_sided_sum() {
        let s = fig5a();
        let g = SamplingKernel::sms(0, 5, 1.0);
        let f = FilteredSignal::new(&s, &g).unwrap();
        for i in 0..50 {
            let t = i as f64 * 0.0213;
            assert!((f.value(t) - eval_filtered(&s, &g, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_kernel_is_aliasing_error() {
        let s = fig5a();
        let g = SamplingKernel::sms(0, 3, 1.0);
        assert!(matches!(
            eval_filtered(&s, &g, 0.1),
            Err(FriError::Aliasing { .. })
        ));
        assert!(matches!(
            FilteredSignal::new(&s, &g),
            Err(FriError::Aliasing { .. })
        ));
    }
}
