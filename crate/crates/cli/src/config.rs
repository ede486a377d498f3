//! Scenario configuration files.
//!
//! A configuration is a TOML document:
//!
//! ```toml
//! name = "two-channel-dirac"
//! configuration = "simo"        # single | simo | mimo
//! channels = 2                  # Q; 1 for single
//! period = 1.0                  # T
//! seed = 7                      # random signals and threshold search
//! tolerance = 1e-8              # largest accepted parameter error
//! expect = "success"            # or "insufficient_events" for negative cases
//!
//! [kernel]
//! order = 0                     # SMS spline degree r
//!
//! # Either explicit signals (one per MIMO channel) ...
//! [[signals]]
//! kind = "pulse"                # dirac | pulse | spline
//! pulse = { order = 3, scale = 0.1 }
//! amplitudes = [0.49, -0.65]
//! supports = [0.22, 0.35]
//!
//! # ... or a random draw.
//! [random]
//! kind = "spline"
//! degree = 0
//! model_order = 5               # K
//! min_gap = 0.02                # fraction of T
//! amplitudes = "uniform"        # uniform (|a| in [0.2, 1], random sign) | normal
//!
//! [threshold]
//! policy = "bound_fraction"     # explicit | bound_fraction | subrate
//! fractions = [0.9]             # one per channel, or one for all
//! # values = [0.09]             # explicit thresholds
//! # enforce_bound = true        # explicit only: reject C at or above the bound
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use neurofri::encoder::{max_threshold_for, Encoder};
use neurofri::kernels::SamplingKernel;
use neurofri::multichannel::{simo_threshold_bounds, subrate_thresholds};
use neurofri::scenarios::{
    common_support_mimo, fraction_of_bound, subrate_simo, Configuration, Scenario,
};
use neurofri::signal_model::{FilteredSignal, FriSignal, Pulse, SignalKind};
use neurofri::synth::{
    common_support_signals, random_signal, trial_rng, AmplitudeLaw, RandomSignalSpec,
};
use neurofri::FriError;

/// Draws tried by the randomised set-ups before giving up.
const MAX_DRAWS: u64 = 200;
/// Candidate grid of the sub-rate threshold search for explicit signals.
const SUBRATE_STEPS: usize = 100;

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}

impl From<FriError> for ConfigError {
    fn from(e: FriError) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub configuration: Configuration,
    #[serde(default = "one")]
    pub channels: usize,
    #[serde(default = "unit")]
    pub period: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub expect: Expectation,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub signals: Vec<SignalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomConfig>,
    pub threshold: ThresholdPolicy,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    #[default]
    Success,
    InsufficientEvents,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalClass {
    Dirac,
    Pulse,
    Spline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub order: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: SignalClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub amplitudes: Vec<f64>,
    pub supports: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudeConfig {
    #[default]
    Uniform,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConfig {
    pub kind: SignalClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub model_order: usize,
    #[serde(default = "default_gap")]
    pub min_gap: f64,
    #[serde(default)]
    pub amplitudes: AmplitudeConfig,
}

fn default_gap() -> f64 {
    1.0 / 50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdPolicy {
    Explicit {
        values: Vec<f64>,
        #[serde(default = "yes")]
        enforce_bound: bool,
    },
    BoundFraction {
        fractions: Vec<f64>,
    },
    Subrate,
}

fn yes() -> bool {
    true
}

fn signal_kind(
    class: SignalClass,
    pulse: Option<PulseConfig>,
    degree: Option<usize>,
) -> Result<SignalKind, ConfigError> {
    match (class, pulse, degree) {
        (SignalClass::Dirac, None, None) => Ok(SignalKind::DiracStream),
        (SignalClass::Pulse, Some(p), None) => Ok(SignalKind::PulseStream {
            pulse: Pulse::ScaledBspline {
                order: p.order,
                scale: p.scale,
            },
        }),
        (SignalClass::Spline, None, Some(degree)) => Ok(SignalKind::LSpline { degree }),
        (SignalClass::Pulse, None, _) => Err(ConfigError::new(
            "pulse signals need `pulse = { order, scale }`",
        )),
        (SignalClass::Spline, _, None) => Err(ConfigError::new("spline signals need `degree`")),
        (class, _, _) => Err(ConfigError::new(format!(
            "unexpected `pulse` or `degree` for {class:?} signals"
        ))),
    }
}

/// A configuration resolved into a runnable scenario, plus the bound each
/// threshold was checked against.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub bounds: Vec<f64>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::new(e.to_string()))?;
        cfg.check_shape()?;
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    fn check_shape(&self) -> Result<(), ConfigError> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(ConfigError::new("period must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(ConfigError::new("tolerance must be positive"));
        }
        match self.configuration {
            Configuration::Single if self.channels != 1 => {
                return Err(ConfigError::new(
                    "single configuration has exactly one channel",
                ))
            }
            Configuration::Simo | Configuration::Mimo if self.channels < 1 => {
                return Err(ConfigError::new("channels must be at least 1"))
            }
            _ => {}
        }
        match (self.signals.is_empty(), &self.random) {
            (true, None) => return Err(ConfigError::new("give either [[signals]] or [random]")),
            (false, Some(_)) => {
                return Err(ConfigError::new("give [[signals]] or [random], not both"))
            }
            _ => {}
        }
        if !self.signals.is_empty() {
            let expected = if self.configuration == Configuration::Mimo {
                self.channels
            } else {
                1
            };
            if self.signals.len() != expected {
                return Err(ConfigError::new(format!(
                    "{:?} configuration needs {expected} signal(s), got {}",
                    self.configuration,
                    self.signals.len()
                )));
            }
        }
        match &self.threshold {
            ThresholdPolicy::Explicit { values, .. } => {
                if values.len() != self.channels {
                    return Err(ConfigError::new(format!(
                        "{} threshold values for {} channels",
                        values.len(),
                        self.channels
                    )));
                }
                if values.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
                    return Err(ConfigError::new("thresholds must be positive"));
                }
            }
            ThresholdPolicy::BoundFraction { fractions } => {
                if fractions.len() != 1 && fractions.len() != self.channels {
                    return Err(ConfigError::new("give one fraction, or one per channel"));
                }
                if fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
                    return Err(ConfigError::new("bound fractions must lie in (0, 1)"));
                }
            }
            ThresholdPolicy::Subrate => {
                if self.configuration != Configuration::Simo || self.channels < 2 {
                    return Err(ConfigError::new(
                        "the sub-rate policy needs a SIMO bank with at least 2 channels",
                    ));
                }
            }
        }
        Ok(())
    }

    fn random_spec(&self) -> Result<Option<RandomSignalSpec>, ConfigError> {
        let Some(r) = &self.random else {
            return Ok(None);
        };
        let kind = signal_kind(r.kind, r.pulse, r.degree)?;
        let law = match r.amplitudes {
            AmplitudeConfig::Uniform => AmplitudeLaw::default(),
            AmplitudeConfig::Normal => AmplitudeLaw::StandardNormal,
        };
        Ok(Some(
            RandomSignalSpec::new(kind, r.model_order, self.period)
                .with_min_gap(r.min_gap)
                .with_amplitudes(law),
        ))
    }

    fn explicit_signals(&self) -> Result<Vec<FriSignal>, ConfigError> {
        self.signals
            .iter()
            .map(|s| {
                let kind = signal_kind(s.kind, s.pulse, s.degree)?;
                Ok(FriSignal::new(
                    kind,
                    s.amplitudes.clone(),
                    s.supports.clone(),
                    self.period,
                )?)
            })
            .collect()
    }

    fn fractions(&self) -> Vec<f64> {
        match &self.threshold {
            ThresholdPolicy::BoundFraction { fractions } if fractions.len() == 1 => {
                vec![fractions[0]; self.channels]
            }
            ThresholdPolicy::BoundFraction { fractions } => fractions.clone(),
            _ => Vec::new(),
        }
    }

    /// Upper threshold bound per channel: the single-channel bound for
    /// single and MIMO set-ups, the bank bound `Q (f_max - f_min) / (2K+1)`
    /// for SIMO.
    fn bounds(&self, scenario: &Scenario) -> Result<Vec<f64>, ConfigError> {
        let k = scenario.signals[0].model_order();
        let filtered = scenario.filtered()?;
        Ok(match self.configuration {
            Configuration::Single => vec![max_threshold_for(&filtered[0], self.period, 2 * k + 1)?],
            Configuration::Simo => {
                let (_, hi) = simo_threshold_bounds(&filtered[0], self.period, self.channels, k)?;
                vec![hi; self.channels]
            }
            Configuration::Mimo => filtered
                .iter()
                .map(|f| max_threshold_for(f, self.period, 2 * k + 1))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Builds the signals and thresholds. Randomised set-ups are drawn from
    /// `seed`; the encoder template sets the scan density used while
    /// searching.
    pub fn resolve(&self, template: &Encoder) -> Result<Resolved, ConfigError> {
        self.check_shape()?;
        let spec = self.random_spec()?;
        let order = self.kernel.order;
        let scenario = match (&spec, &self.threshold) {
            (Some(spec), ThresholdPolicy::Subrate) => {
                subrate_simo(spec, order, self.channels, self.seed, template, MAX_DRAWS)?
            }
            (Some(spec), ThresholdPolicy::BoundFraction { .. })
                if self.configuration == Configuration::Mimo
                    && self.fractions().windows(2).all(|w| w[0] == w[1]) =>
            {
                common_support_mimo(
                    spec,
                    order,
                    self.channels,
                    self.seed,
                    self.fractions()[0],
                    template,
                    MAX_DRAWS,
                )?
            }
            _ => {
                let signals = match &spec {
                    Some(spec) if self.configuration == Configuration::Mimo => {
                        common_support_signals(&mut trial_rng(self.seed, 0), spec, self.channels)?
                    }
                    Some(spec) => vec![random_signal(&mut trial_rng(self.seed, 0), spec)?],
                    None => self.explicit_signals()?,
                };
                let k = signals[0].model_order();
                let kernel = SamplingKernel::sms(order, k, self.period);
                let thresholds = self.thresholds_for(&signals, &kernel, template)?;
                Scenario {
                    name: self.name.clone(),
                    configuration: self.configuration,
                    kernel,
                    signals,
                    thresholds,
                }
            }
        };
        let scenario = Scenario {
            name: self.name.clone(),
            ..scenario
        };
        scenario.validate()?;
        let bounds = self.bounds(&scenario)?;
        let enforce = !matches!(
            self.threshold,
            ThresholdPolicy::Explicit {
                enforce_bound: false,
                ..
            }
        );
        if enforce {
            for (i, (c, b)) in scenario.thresholds.iter().zip(&bounds).enumerate() {
                if c >= b {
                    return Err(ConfigError::new(format!(
                        "channel {}: threshold {c} is not below the bound {b}",
                        i + 1
                    )));
                }
            }
        }
        Ok(Resolved { scenario, bounds })
    }

    fn thresholds_for(
        &self,
        signals: &[FriSignal],
        kernel: &SamplingKernel,
        template: &Encoder,
    ) -> Result<Vec<f64>, ConfigError> {
        match &self.threshold {
            ThresholdPolicy::Explicit { values, .. } => Ok(values.clone()),
            ThresholdPolicy::BoundFraction { .. } => {
                let fractions = self.fractions();
                match self.configuration {
                    Configuration::Mimo => signals
                        .iter()
                        .zip(&fractions)
                        .map(|(x, fr)| Ok(fraction_of_bound(x, kernel, *fr)?))
                        .collect(),
                    _ => {
                        let f = FilteredSignal::new(&signals[0], kernel)?;
                        let k = signals[0].model_order();
                        let (_, hi) = simo_threshold_bounds(&f, self.period, self.channels, k)?;
                        Ok(fractions.iter().map(|fr| fr * hi).collect())
                    }
                }
            }
            ThresholdPolicy::Subrate => {
                let f = FilteredSignal::new(&signals[0], kernel)?;
                let k = signals[0].model_order();
                let template = Encoder {
                    period: self.period,
                    horizon: self.period,
                    ..*template
                };
                subrate_thresholds(&f, &template, self.channels, k, SUBRATE_STEPS)?
                    .map(|choice| choice.thresholds)
                    .ok_or_else(|| {
                        ConfigError::new("no sub-rate threshold set exists for this signal")
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPLICIT: &str = r#"
name = "grid"
configuration = "single"
[[signals]]
kind = "dirac"
amplitudes = [1.0, 1.0, 1.0, 1.0, 1.0]
supports = [0.25, 0.375, 0.5, 0.625, 0.75]
[threshold]
policy = "explicit"
values = [0.09]
"#;

    #[test]
    fn parses_and_resolves_explicit_configuration() {
        let cfg = ScenarioConfig::from_toml(EXPLICIT).unwrap();
        assert_eq!(cfg.channels, 1);
        assert_eq!(cfg.tolerance, 1e-8);
        let r = cfg.resolve(&Encoder::new(1.0, 1.0)).unwrap();
        assert_eq!(r.scenario.thresholds, vec![0.09]);
        assert!(r.bounds[0] > 0.09);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ScenarioConfig::from_toml(EXPLICIT).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = EXPLICIT.replace(
            "configuration = \"single\"",
            "configuration = \"single\"\nthreshhold = 1",
        );
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn rejects_threshold_above_bound() {
        let text = EXPLICIT.replace("values = [0.09]", "values = [5.0]");
        let cfg = ScenarioConfig::from_toml(&text).unwrap();
        let err = cfg.resolve(&Encoder::new(1.0, 1.0)).unwrap_err();
        assert!(err.0.contains("not below the bound"), "{err}");
    }

    #[test]
    fn rejects_mismatched_signal_fields() {
        let text = EXPLICIT.replace("kind = \"dirac\"", "kind = \"spline\"");
        let cfg = ScenarioConfig::from_toml(&text).unwrap();
        assert!(cfg.resolve(&Encoder::new(1.0, 1.0)).is_err());
    }
}
