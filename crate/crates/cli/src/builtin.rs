//! Built-in scenario configurations.

use crate::config::{ConfigError, ScenarioConfig};

pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

const DIRAC_GRID: &str = r#"
name = "dirac-grid"
configuration = "single"
tolerance = 1e-9

[kernel]
order = 0

[[signals]]
kind = "dirac"
amplitudes = [1.0, 1.0, 1.0, 1.0, 1.0]
supports = [0.25, 0.375, 0.5, 0.625, 0.75]

[threshold]
policy = "explicit"
values = [0.09090909090909091]
"#;

const PULSE_STREAM: &str = r#"
name = "pulse-stream"
configuration = "single"
tolerance = 1e-9

[kernel]
order = 0

[[signals]]
kind = "pulse"
pulse = { order = 3, scale = 0.1 }
amplitudes = [0.49, -0.65, 0.47, -0.52, 0.22]
supports = [0.22, 0.35, 0.46, 0.62, 0.79]

[threshold]
policy = "explicit"
values = [0.015]
"#;

const SPLINE_D1: &str = r#"
name = "spline-d1"
configuration = "single"
seed = 0

[random]
kind = "spline"
degree = 0
model_order = 5

[threshold]
policy = "bound_fraction"
fractions = [0.9]
"#;

const SPLINE_D2: &str = r#"
name = "spline-d2"
configuration = "single"
seed = 0

[random]
kind = "spline"
degree = 1
model_order = 5

[threshold]
policy = "bound_fraction"
fractions = [0.9]
"#;

const SIMO_DIRAC: &str = r#"
name = "simo-dirac"
configuration = "simo"
channels = 2
seed = 7

[random]
kind = "dirac"
model_order = 5
amplitudes = "normal"

[threshold]
policy = "subrate"
"#;

const SIMO_PULSE: &str = r#"
name = "simo-pulse"
configuration = "simo"
channels = 2
seed = 7

[random]
kind = "pulse"
pulse = { order = 3, scale = 0.1 }
model_order = 5
amplitudes = "normal"

[threshold]
policy = "subrate"
"#;

const SIMO_D1: &str = r#"
name = "simo-d1"
configuration = "simo"
channels = 2
seed = 7

[random]
kind = "spline"
degree = 0
model_order = 5
amplitudes = "normal"

[threshold]
policy = "subrate"
"#;

const SIMO_D2: &str = r#"
name = "simo-d2"
configuration = "simo"
channels = 2
seed = 7

[random]
kind = "spline"
degree = 1
model_order = 5
amplitudes = "normal"

[threshold]
policy = "subrate"
"#;

const MIMO_DIRAC: &str = r#"
name = "mimo-dirac"
configuration = "mimo"
channels = 2
seed = 8

[random]
kind = "dirac"
model_order = 5
amplitudes = "normal"

[threshold]
policy = "bound_fraction"
fractions = [0.9]
"#;

const MIMO_PULSE: &str = r#"
name = "mimo-pulse"
configuration = "mimo"
channels = 2
seed = 8

[random]
kind = "pulse"
pulse = { order = 3, scale = 0.1 }
model_order = 5
amplitudes = "normal"

[threshold]
policy = "bound_fraction"
fractions = [0.9]
"#;

const MIMO_D1: &str = r#"
name = "mimo-d1"
configuration = "mimo"
channels = 2
seed = 8

[random]
kind = "spline"
degree = 0
model_order = 5
amplitudes = "normal"

[threshold]
policy = "bound_fraction"
fractions = [0.9]
"#;

const MIMO_D2: &str = r#"
name = "mimo-d2"
configuration = "mimo"
channels = 2
seed = 8

[random]
kind = "spline"
degree = 1
model_order = 5
amplitudes = "normal"

[threshold]
policy = "bound_fraction"
fractions = [0.9]
"#;

// Threshold far above the bound: the encoder records too few events and the
// decoder must refuse.
const OVER_THRESHOLD: &str = r#"
name = "over-threshold"
configuration = "single"
expect = "insufficient_events"

[[signals]]
kind = "dirac"
amplitudes = [1.0, 1.0, 1.0, 1.0, 1.0]
supports = [0.25, 0.375, 0.5, 0.625, 0.75]

[threshold]
policy = "explicit"
values = [5.0]
enforce_bound = false
"#;

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "dirac-grid",
        summary: "five unit Diracs on [0.25, 0.75], C = 1/11",
        toml: DIRAC_GRID,
    },
    Builtin {
        name: "pulse-stream",
        summary: "five narrow cubic B-spline pulses, C = 0.015",
        toml: PULSE_STREAM,
    },
    Builtin {
        name: "spline-d1",
        summary: "random piecewise-constant spline, K = 5, C at 0.9 of the bound",
        toml: SPLINE_D1,
    },
    Builtin {
        name: "spline-d2",
        summary: "random piecewise-linear spline, K = 5, C at 0.9 of the bound",
        toml: SPLINE_D2,
    },
    Builtin {
        name: "simo-dirac",
        summary: "two-channel SIMO, Diracs, each channel below 2K+1 events",
        toml: SIMO_DIRAC,
    },
    Builtin {
        name: "simo-pulse",
        summary: "two-channel SIMO, cubic B-spline pulses, each channel below 2K+1 events",
        toml: SIMO_PULSE,
    },
    Builtin {
        name: "simo-d1",
        summary: "two-channel SIMO, piecewise-constant spline, each channel below 2K+1 events",
        toml: SIMO_D1,
    },
    Builtin {
        name: "simo-d2",
        summary: "two-channel SIMO, piecewise-linear spline, each channel below 2K+1 events",
        toml: SIMO_D2,
    },
    Builtin {
        name: "mimo-dirac",
        summary: "two-channel MIMO, Diracs with common supports",
        toml: MIMO_DIRAC,
    },
    Builtin {
        name: "mimo-pulse",
        summary: "two-channel MIMO, cubic B-spline pulses with common supports",
        toml: MIMO_PULSE,
    },
    Builtin {
        name: "mimo-d1",
        summary: "two-channel MIMO, piecewise-constant splines with common knots",
        toml: MIMO_D1,
    },
    Builtin {
        name: "mimo-d2",
        summary: "two-channel MIMO, piecewise-linear splines with common knots",
        toml: MIMO_D2,
    },
    Builtin {
        name: "over-threshold",
        summary: "negative case: C above the bound, decoding must fail",
        toml: OVER_THRESHOLD,
    },
];

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

pub fn config(b: &Builtin) -> Result<ScenarioConfig, ConfigError> {
    ScenarioConfig::from_toml(b.toml)
}
