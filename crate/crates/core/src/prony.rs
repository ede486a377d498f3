//! Prony's annihilating-filter method for sums of complex exponentials.
//!
//! Given `y_l = sum_k c_k u_k^l` for `l = -M..M`, the `(K+1)`-tap filter `h`
//! whose z-transform vanishes at every `u_k` annihilates the sequence:
//! `sum_i h_i y_{l-i} = 0`. The filter is the null vector of a Toeplitz matrix
//! built from `y`; its roots give the supports, and a Vandermonde regression
//! gives the amplitudes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{FriError, Result};
use crate::linalg::{condition_number, lstsq_qr, smallest_right_singular_vector};
use crate::signal_model::{harmonic_phasor, FourierVector, C64};

/// Singular-value ratio `sigma_K / sigma_{K+1}` above which the nullspace is
/// taken to be one-dimensional.
pub const NULLSPACE_GAP: f64 = 1e6;

/// `sigma_K / sigma_1` below which `sigma_K` is indistinguishable from
/// round-off, i.e. the nullspace has more than one dimension.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Condition number above which a regression is flagged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

/// `(Gamma_M x)_{i,j} = x_{i-j}`, an `(M+1) x (M+1)` Toeplitz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix {
    entries: DMatrix<C64>,
}

impl ToeplitzMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn toeplitzify(x: &FourierVector) -> ToeplitzMatrix {
    let n = x.order() + 1;
    ToeplitzMatrix {
        entries: DMatrix::from_fn(n, n, |i, j| x.get(i as i64 - j as i64)),
    }
}

/// Rectangular annihilation system for a `(K+1)`-tap filter:
/// row `i` holds `x_{l-j}` for `j = 0..K` with lag `l = i - (M - K)`, so every
/// window of `K+1` consecutive coefficients contributes one equation. For
/// `M = K` this is exactly `Gamma_K x`.
pub fn annihilation_matrix(x: &FourierVector, model_order: usize) -> Result<DMatrix<C64>> {
    let m = x.order();
    let k = model_order;
    if k == 0 || m < k {
        return Err(FriError::InvalidArgument(format!(
            "need 1 <= K <= M, got K = {k}, M = {m}"
        )));
    }
    let rows = 2 * m - k + 1;
    let shift = (m - k) as i64;
    Ok(DMatrix::from_fn(rows, k + 1, |i, j| {
        x.get(i as i64 - shift - j as i64)
    }))
}

/// Unit-norm `(K+1)`-tap filter and its roots.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatingFilter {
    pub taps: Vec<C64>,
    pub roots: Vec<C64>,
    /// Descending singular values of the annihilation system.
    pub singular_values: Vec<f64>,
    /// `||A h||_2` of the system the filter was extracted from.
    pub residual: f64,
    /// `max_k | |root_k| - 1 |`, before projection onto the unit circle.
    pub radial_deviation: f64,
}

impl AnnihilatingFilter {
    /// `sigma_K / sigma_{K+1}`.
    pub fn nullspace_gap(&self) -> f64 {
        let k = self.taps.len() - 1;
        self.singular_values[k - 1] / self.singular_values[k]
    }

    /// `max_l |(h * y)_l|` over every lag where the convolution is fully
    /// defined.
    pub fn convolution_residual(&self, y: &FourierVector) -> f64 {
        let k = self.taps.len() as i64 - 1;
        let m = y.order() as i64;
        ((-m + k)..=m)
            .map(|l| {
                self.taps
                    .iter()
                    .enumerate()
                    .map(|(i, h)| h * y.get(l - i as i64))
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Extracts the filter from an annihilation system with `K+1` columns.
pub(crate) fn filter_from_system(
    a: &DMatrix<C64>,
    model_order: usize,
) -> Result<AnnihilatingFilter> {
    let k = model_order;
    let (h, sv) = smallest_right_singular_vector(a);
    let gap = if sv[k] == 0.0 && sv[k - 1] > 0.0 {
        f64::INFINITY
    } else {
        sv[k - 1] / sv[k]
    };
    if !(gap > NULLSPACE_GAP) || !(sv[k - 1] > NOISE_FLOOR * sv[0]) {
        return Err(FriError::ModelOrderMismatch {
            model_order: k,
            gap,
        });
    }
    let residual = (a * &h).norm();
    let taps: Vec<C64> = h.iter().copied().collect();
    let roots = filter_roots(&taps)?;
    let radial_deviation = roots
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(AnnihilatingFilter {
        taps,
        roots,
        singular_values: sv,
        residual,
        radial_deviation,
    })
}

/// Annihilating filter of a sequence generated by `K` exponentials.
pub fn annihilating_filter(y: &FourierVector, model_order: usize) -> Result<AnnihilatingFilter> {
    let a = annihilation_matrix(y, model_order)?;
    filter_from_system(&a, model_order)
}

fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of `h_0 z^K + h_1 z^{K-1} + ... + h_K` from the companion-matrix
/// eigenvalues, polished with a few Newton steps.
pub fn filter_roots(taps: &[C64]) -> Result<Vec<C64>> {
    let k = taps.len() - 1;
    if k == 0 {
        return Ok(Vec::new());
    }
    let lead = taps[0];
    let scale = taps.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if lead.norm() <= 1e-14 * scale {
        return Err(FriError::RootFinding);
    }
    let monic: Vec<C64> = taps.iter().map(|c| c / lead).collect();
    let mut companion = DMatrix::<C64>::zeros(k, k);
    for j in 0..k {
        companion[(0, j)] = -monic[j + 1];
    }
    for i in 1..k {
        companion[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    let eig = companion
        .schur()
        .eigenvalues()
        .ok_or(FriError::RootFinding)?;
    let mut roots: Vec<C64> = eig.iter().copied().collect();
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&monic, *z);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *z - p / dp;
            if horner(&monic, next).0.norm() < p.norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

/// `tau_k = -(T / 2 pi) arg(root_k)` wrapped into `[0, T)`, sorted ascending.
/// Roots are projected radially onto the unit circle first.
pub fn supports_from_roots(roots: &[C64], period: f64) -> Vec<f64> {
    let mut taus: Vec<f64> = roots
        .iter()
        .map(|z| {
            let unit = z / z.norm();
            let tau = (-period / (2.0 * PI) * unit.arg()).rem_euclid(period);
            if tau >= period {
                0.0
            } else {
                tau
            }
        })
        .collect();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus
}

/// Result of the amplitude regression.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFit {
    pub amplitudes: Vec<f64>,
    pub condition: f64,
    pub ill_conditioned: bool,
    /// Largest imaginary part discarded from the complex solution.
    pub imaginary_residue: f64,
}

/// Least-squares amplitudes for known supports:
/// `x_l = w(l) (1/T) sum_k a_k exp(-j l w0 tau_k)`. Rows where `weight`
/// returns `None` (or zero) are dropped.
pub fn recover_coefficients(
    x: &FourierVector,
    supports: &[f64],
    weight: impl Fn(i64) -> Option<C64>,
) -> Result<CoefficientFit> {
    recover_coefficients_many(std::slice::from_ref(x), supports, weight).map(|mut v| v.remove(0))
}

/// Shared-support regression for several coefficient vectors at once.
pub(crate) fn recover_coefficients_many(
    xs: &[FourierVector],
    supports: &[f64],
    weight: impl Fn(i64) -> Option<C64>,
) -> Result<Vec<CoefficientFit>> {
    let first = xs
        .first()
        .ok_or_else(|| FriError::InvalidArgument("no Fourier vectors".into()))?;
    let k = supports.len();
    if k == 0 {
        return Err(FriError::InvalidArgument("no supports".into()));
    }
    let m = first.order() as i64;
    let period = first.period();
    let rows: Vec<(i64, C64)> = (-m..=m)
        .filter_map(|l| weight(l).filter(|w| w.norm() > 0.0).map(|w| (l, w)))
        .collect();
    if rows.len() < k {
        return Err(FriError::InvalidArgument(format!(
            "{} usable equations for {k} amplitudes",
            rows.len()
        )));
    }
    let v = DMatrix::from_fn(rows.len(), k, |i, j| {
        let (l, w) = rows[i];
        w * harmonic_phasor(-l, supports[j], period) / period
    });
    let condition = condition_number(&v);
    xs.iter()
        .map(|x| {
            let b = DVector::from_iterator(rows.len(), rows.iter().map(|&(l, _)| x.get(l)));
            let sol = lstsq_qr(&v, &b)?;
            Ok(CoefficientFit {
                amplitudes: sol.iter().map(|z| z.re).collect(),
                condition,
                ill_conditioned: condition > ILL_CONDITIONED,
                imaginary_residue: sol.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
            })
        })
        .collect()
}
