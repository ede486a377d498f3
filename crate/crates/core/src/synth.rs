//! Seeded random signal generators for trials and sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{FriError, Result};
use crate::signal_model::{FriSignal, SignalKind};

pub type TrialRng = ChaCha8Rng;

/// Reproducible generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Amplitude law for generated signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeLaw {
    /// Random sign, magnitude uniform on `[lo, hi]`.
    SignedUniform {
        lo: f64,
        hi: f64,
    },
    StandardNormal,
}

impl Default for AmplitudeLaw {
    fn default() -> Self {
        AmplitudeLaw::SignedUniform { lo: 0.2, hi: 1.0 }
    }
}

impl AmplitudeLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AmplitudeLaw::SignedUniform { lo, hi } => {
                let m = rng.random_range(lo..=hi);
                if rng.random_bool(0.5) {
                    m
                } else {
                    -m
                }
            }
            AmplitudeLaw::StandardNormal => rng.sample(StandardNormal),
        }
    }

    fn admits(&self, a: f64) -> bool {
        match *self {
            AmplitudeLaw::SignedUniform { lo, hi } => (lo..=hi).contains(&a.abs()),
            AmplitudeLaw::StandardNormal => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSignalSpec {
    pub kind: SignalKind,
    pub model_order: usize,
    pub period: f64,
    /// Minimum circular distance between supports, as a fraction of `T`.
    pub min_gap: f64,
    pub amplitudes: AmplitudeLaw,
}

impl RandomSignalSpec {
    pub fn new(kind: SignalKind, model_order: usize, period: f64) -> Self {
        Self {
            kind,
            model_order,
            period,
            min_gap: 1.0 / 50.0,
            amplitudes: AmplitudeLaw::default(),
        }
    }

    pub fn with_min_gap(mut self, min_gap: f64) -> Self {
        self.min_gap = min_gap;
        self
    }

    pub fn with_amplitudes(mut self, law: AmplitudeLaw) -> Self {
        self.amplitudes = law;
        self
    }
}

const MAX_ATTEMPTS: usize = 100_000;

/// `K` sorted supports uniform on `[0, T)` with pairwise circular distance at
/// least `min_gap * T`.
pub fn random_supports<R: Rng + ?Sized>(
    rng: &mut R,
    model_order: usize,
    period: f64,
    min_gap: f64,
) -> Result<Vec<f64>> {
    if model_order as f64 * min_gap >= 1.0 {
        return Err(FriError::InvalidArgument(format!(
            "{model_order} supports cannot be {min_gap} T apart"
        )));
    }
    let gap = min_gap * period;
    for _ in 0..MAX_ATTEMPTS {
        let mut tau: Vec<f64> = (0..model_order)
            .map(|_| rng.random_range(0.0..period))
            .collect();
        tau.sort_by(f64::total_cmp);
        let wrap = tau[0] + period - tau[model_order - 1];
        if tau.windows(2).all(|w| w[1] - w[0] >= gap) && (model_order == 1 || wrap >= gap) {
            return Ok(tau);
        }
    }
    Err(FriError::InvalidArgument(
        "support spacing constraint could not be met".into(),
    ))
}

/// Amplitudes for a signal class; splines get amplitudes summing to zero.
pub fn random_amplitudes<R: Rng + ?Sized>(
    rng: &mut R,
    model_order: usize,
    law: AmplitudeLaw,
    zero_sum: bool,
) -> Result<Vec<f64>> {
    if !zero_sum {
        return Ok((0..model_order).map(|_| law.draw(rng)).collect());
    }
    if model_order < 2 {
        return Err(FriError::InvalidArgument(
            "a zero-sum amplitude set needs K >= 2".into(),
        ));
    }
    for _ in 0..MAX_ATTEMPTS {
        let mut a: Vec<f64> = (0..model_order - 1).map(|_| law.draw(rng)).collect();
        let last = -a.iter().sum::<f64>();
        if law.admits(last) {
            a.push(last);
            return Ok(a);
        }
    }
    Err(FriError::InvalidArgument(
        "zero-sum amplitudes could not be drawn".into(),
    ))
}

pub fn random_signal<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSignalSpec) -> Result<FriSignal> {
    let tau = random_supports(rng, spec.model_order, spec.period, spec.min_gap)?;
    let a = random_amplitudes(
        rng,
        spec.model_order,
        spec.amplitudes,
        spec.kind.is_spline(),
    )?;
    FriSignal::new(spec.kind, a, tau, spec.period)
}

/// `Q` signals sharing one support set, with independent amplitudes.
pub fn common_support_signals<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &RandomSignalSpec,
    channels: usize,
) -> Result<Vec<FriSignal>> {
    let tau = random_supports(rng, spec.model_order, spec.period, spec.min_gap)?;
    (0..channels)
        .map(|_| {
            let a = random_amplitudes(
                rng,
                spec.model_order,
                spec.amplitudes,
                spec.kind.is_spline(),
            )?;
            FriSignal::new(spec.kind, a, tau.clone(), spec.period)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_signal() {
        let spec = RandomSignalSpec::new(SignalKind::DiracStream, 6, 1.0);
        let a = random_signal(&mut trial_rng(7, 3), &spec).unwrap();
        let b = random_signal(&mut trial_rng(7, 3), &spec).unwrap();
        let c = random_signal(&mut trial_rng(7, 4), &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn constraints_hold() {
        let spec = RandomSignalSpec::new(SignalKind::LSpline { degree: 1 }, 8, 2.0);
        for i in 0..50 {
            let s = random_signal(&mut trial_rng(1, i), &spec).unwrap();
            let tau = s.supports();
            assert!(tau.windows(2).all(|w| w[1] - w[0] >= 2.0 / 50.0));
            assert!(tau[0] + 2.0 - tau[7] >= 2.0 / 50.0);
            assert!(s
                .amplitudes()
                .iter()
                .all(|a| (0.2..=1.0).contains(&a.abs())));
            assert!(s.amplitudes().iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn common_support_shared() {
        let spec = RandomSignalSpec::new(SignalKind::DiracStream, 4, 1.0)
            .with_amplitudes(AmplitudeLaw::StandardNormal);
        let s = common_support_signals(&mut trial_rng(2, 0), &spec, 3).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|x| x.supports() == s[0].supports()));
        assert_ne!(s[0].amplitudes(), s[1].amplitudes());
    }
}
