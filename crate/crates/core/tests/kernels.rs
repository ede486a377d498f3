mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use neurofri::kernels::{bspline_eval, bspline_spectrum, SamplingKernel, MAX_SPLINE_ORDER};

use common::{bspline_closed, gauss_legendre};

#[test]
fn bsplines_integrate_to_one() {
    let rule = gauss_legendre(20);
    for r in 0..=MAX_SPLINE_ORDER {
        let half = (r as f64 + 1.0) / 2.0;
        // integrate knot interval by knot interval, where the spline is a polynomial
        let mut total = 0.0;
        for i in 0..=r {
            let (lo, hi) = (i as f64 - half, i as f64 + 1.0 - half);
            let (mid, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            total += rule
                .iter()
                .map(|&(z, w)| w * h * bspline_eval(r, mid + h * z))
                .sum::<f64>();
        }
        assert!((total - 1.0).abs() < 1e-8, "degree {r}: {total}");
    }
}

#[test]
fn spectrum_vanishes_on_nonzero_integer_frequencies() {
    for r in 0..=MAX_SPLINE_ORDER {
        assert_eq!(bspline_spectrum(r, 0.0), 1.0);
        for n in 1..=20 {
            assert!(
                bspline_spectrum(r, 2.0 * PI * n as f64).abs() < 1e-15,
                "degree {r}, n {n}"
            );
        }
    }
}

#[test]
fn sms_gain_is_unit_in_band_and_zero_outside() {
    for r in 0..=4 {
        for k in 1..=8usize {
            let g = SamplingKernel::sms(r, k, 2.0);
            for l in -(3 * k as i64)..=3 * k as i64 {
                let expected = if l.unsigned_abs() as usize <= k {
                    1.0
                } else {
                    0.0
                };
                assert!((g.harmonic_gain(l) - expected).abs() < 1e-12);
                assert!((g.fourier_eval(l as f64 * g.omega0()) - expected).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(common::fixed_config(256))]

    #[test]
    fn partition_of_unity(r in 0usize..=MAX_SPLINE_ORDER, t in -50.0f64..50.0) {
        let total: f64 = (-10i64..=10).map(|n| bspline_eval(r, t - t.floor() - n as f64)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recursion_matches_closed_forms(t in -3.0f64..3.0) {
        prop_assert!((bspline_eval(1, t) - bspline_closed(1, t)).abs() < 1e-14);
        prop_assert!((bspline_eval(3, t) - bspline_closed(3, t)).abs() < 1e-14);
    }

    #[test]
    fn order_zero_sms_is_a_sum_of_sinc_lobes(k in 1usize..=8, period in 0.5f64..4.0, omega in -100.0f64..100.0) {
        let g = SamplingKernel::sms(0, k, period);
        let w0 = 2.0 * PI / period;
        let lobes: f64 = (-(k as i64)..=k as i64)
            .map(|m| {
                let x = (omega - m as f64 * w0) * period / 2.0;
                if x == 0.0 { 1.0 } else { x.sin() / x }
            })
            .sum();
        prop_assert!((g.fourier_eval(omega) - lobes).abs() < 1e-9);
    }

    #[test]
    fn kernel_spectrum_matches_time_domain(r in 0usize..=3, k in 1usize..=4, l in -6i64..=6) {
        // (1/T) int g(t) e^{-j l w0 t} dt over the support, by quadrature
        let period = 1.0;
        let g = SamplingKernel::sms(r, k, period);
        let rule = gauss_legendre(30);
        let half = (r as f64 + 1.0) / 2.0;
        let w = l as f64 * g.omega0();
        let mut total = 0.0;
        let panels = 16 * (r + 1);
        for p in 0..panels {
            let lo = -half + p as f64 / 16.0;
            let (mid, h) = (lo + 1.0 / 32.0, 1.0 / 32.0);
            total += rule.iter().map(|&(z, wt)| {
                let t = (mid + h * z) * period;
                wt * h * period * g.time_eval(t) * (w * t).cos()
            }).sum::<f64>();
        }
        prop_assert!((total - g.harmonic_gain(l)).abs() < 1e-9, "{total}");
    }
}
