//! Polynomial B-splines and the sum-of-modulated-splines (SMS) sampling kernel.
//!
//! The SMS kernel of order `r` for model order `K` and period `T` is
//!
//! ```text
//! g(t) = (1/T) * beta_r(t/T) * sum_{k=-K..K} exp(j k w0 t),   w0 = 2 pi / T
//! ```
//!
//! Its spectrum is a sum of shifted B-spline spectra that equals exactly one on
//! the harmonics `|l| <= K` and zero on every other harmonic, which is what
//! makes the filtered signal a trigonometric polynomial of degree `K`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Highest B-spline degree supported by [`bspline_eval`].
pub const MAX_SPLINE_ORDER: usize = 8;

const ALIAS_TOLERANCE: f64 = 1e-9;

/// `sin(pi x)` that is exactly zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let frac = x - n;
    if frac == 0.0 {
        return 0.0;
    }
    let s = (PI * frac).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Normalised sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// Centered B-spline of degree `r` at `t`, via Cox-de Boor on the knots
/// `-(r+1)/2, -(r+1)/2 + 1, ..., (r+1)/2`.
///
/// The degree-0 spline is the half-open box `[-1/2, 1/2)`.
pub fn bspline_eval(r: usize, t: f64) -> f64 {
    assert!(
        r <= MAX_SPLINE_ORDER,
        "B-spline degree {r} exceeds {MAX_SPLINE_ORDER}"
    );
    let half = (r as f64 + 1.0) / 2.0;
    if !(t >= -half && t < half) {
        return 0.0;
    }
    let knot = |i: usize| i as f64 - half;
    let mut basis = [0.0f64; MAX_SPLINE_ORDER + 1];
    for (i, b) in basis.iter_mut().enumerate().take(r + 1) {
        *b = if knot(i) <= t && t < knot(i + 1) {
            1.0
        } else {
            0.0
        };
    }
    for p in 1..=r {
        let inv = 1.0 / p as f64;
        for i in 0..=(r - p) {
            basis[i] = (t - knot(i)) * inv * basis[i] + (knot(i + p + 1) - t) * inv * basis[i + 1];
        }
    }
    basis[0]
}

/// Fourier transform of the centered B-spline, `(sin(w/2) / (w/2))^(r+1)`.
pub fn bspline_spectrum(r: usize, omega: f64) -> f64 {
    sinc(omega / (2.0 * PI)).powi(r as i32 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Sum of modulated splines.
    Sms,
    /// Plain `(1/T) beta_r(t/T)` without modulation; fails alias cancellation
    /// for every `K >= 1` and exists for comparison.
    Spline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingKernel {
    pub family: KernelFamily,
    pub order: usize,
    pub model_order: usize,
    pub period: f64,
}

impl SamplingKernel {
    pub fn sms(order: usize, model_order: usize, period: f64) -> Self {
        assert!(order <= MAX_SPLINE_ORDER);
        assert!(period > 0.0);
        Self {
            family: KernelFamily::Sms,
            order,
            model_order,
            period,
        }
    }

    pub fn plain_spline(order: usize, period: f64) -> Self {
        assert!(order <= MAX_SPLINE_ORDER);
        assert!(period > 0.0);
        Self {
            family: KernelFamily::Spline,
            order,
            model_order: 0,
            period,
        }
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Half-width of the compact time support.
    pub fn support_radius(&self) -> f64 {
        self.period * (self.order as f64 + 1.0) / 2.0
    }

    /// Time-domain value. The modulation sum over `-K..K` is the real
    /// Dirichlet factor `1 + 2 sum cos(k w0 t)`.
    pub fn time_eval(&self, t: f64) -> f64 {
        let envelope = bspline_eval(self.order, t / self.period) / self.period;
        if envelope == 0.0 {
            return 0.0;
        }
        match self.family {
            KernelFamily::Spline => envelope,
            KernelFamily::Sms => {
                let w = self.omega0() * t;
                let dirichlet = 1.0
                    + 2.0
                        * (1..=self.model_order)
                            .map(|k| (k as f64 * w).cos())
                            .sum::<f64>();
                envelope * dirichlet
            }
        }
    }

    /// Closed-form spectrum at angular frequency `omega`. The kernels are
    /// real and even, so the transform is real.
    pub fn fourier_eval(&self, omega: f64) -> f64 {
        let nu = omega * self.period / (2.0 * PI);
        match self.family {
            KernelFamily::Spline => sinc(nu).powi(self.order as i32 + 1),
            KernelFamily::Sms => {
                let k = self.model_order as i64;
                (-k..=k)
                    .map(|m| sinc(nu - m as f64).powi(self.order as i32 + 1))
                    .sum()
            }
        }
    }

    /// Spectrum on the harmonic `l w0`, evaluated with integer offsets so the
    /// passband is exactly one and the stopband exactly zero.
    pub fn harmonic_gain(&self, l: i64) -> f64 {
        let p = self.order as i32 + 1;
        match self.family {
            KernelFamily::Spline => sinc(l as f64).powi(p),
            KernelFamily::Sms => {
                let k = self.model_order as i64;
                (-k..=k).map(|m| sinc((l - m) as f64).powi(p)).sum()
            }
        }
    }
}

/// Outcome of [`check_alias_cancellation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasReport {
    pub passes: bool,
    pub worst_harmonic: i64,
    pub worst_deviation: f64,
}

/// Verifies `g(l w0) = 1` for `|l| <= K` and `0` for `K < |l| <= 4K`.
pub fn check_alias_cancellation(kernel: &SamplingKernel, model_order: usize) -> AliasReport {
    let k = model_order as i64;
    let span = 4 * k.max(1);
    let w0 = kernel.omega0();
    let mut worst_harmonic = 0;
    let mut worst_deviation = 0.0f64;
    for l in -span..=span {
        let target = if l.abs() <= k { 1.0 } else { 0.0 };
        let dev = (kernel.fourier_eval(l as f64 * w0) - target).abs();
        if dev > worst_deviation {
            worst_deviation = dev;
            worst_harmonic = l;
        }
    }
    AliasReport {
        passes: worst_deviation <= ALIAS_TOLERANCE,
        worst_harmonic,
        worst_deviation,
    }
}
