//! Experiment configuration: a TOML file of flat `key = value` entries with
//! one section per sweep kind, plus command-line overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::ReferenceSpec;
use crate::error::{invalid, Error, Result};
use crate::initdata::G1Variant;
use crate::model::{Example, InitialCondition, Potential, Problem};
use crate::spectral::C64;
use crate::steppers::{PredictionVariant, Scheme, StepperOptions};
use crate::toy::{default_toy_epsilons, ToyCoefficient, ToyProblem};

/// Problem selection: one of the three examples or a `[custom]` section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    I,
    II,
    III,
    #[serde(rename = "custom")]
    Custom,
}

impl Preset {
    pub fn example(self) -> Option<Example> {
        match self {
            Preset::I => Some(Example::I),
            Preset::II => Some(Example::II),
            Preset::III => Some(Example::III),
            Preset::Custom => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.example() {
            Some(e) => e.fmt(f),
            None => f.write_str("custom"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("custom") {
            return Ok(Preset::Custom);
        }
        Ok(match s.parse::<Example>()? {
            Example::I => Preset::I,
            Example::II => Preset::II,
            Example::III => Preset::III,
        })
    }
}

/// `[custom]`: a user-defined problem on the configured domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub lambda: f64,
    #[serde(default = "zero_potential")]
    pub v_e: Potential,
    #[serde(default = "zero_potential")]
    pub v_m: Potential,
    #[serde(default = "gaussian_pair")]
    pub initial: InitialCondition,
}

fn zero_potential() -> Potential {
    Potential::Zero
}

fn gaussian_pair() -> InitialCondition {
    InitialCondition::GaussianPair
}

/// `[reference]`: resolution of the fine-step reference runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub dt: f64,
    /// Defaults to the run's `n_tau`.
    pub n_tau: Option<usize>,
    /// Fixed preparation order; unset selects the largest order whose
    /// prepared data stays close to `Phi_0`.
    pub order: Option<u32>,
    /// Defaults to `<output.dir>/reference-cache`.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self { dt: 1e-5, n_tau: None, order: None, cache_dir: None }
    }
}

/// `[output]`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Plain two-column data files, one per curve.
    pub plot_data: bool,
    /// Self-contained SVG line plots next to the data files.
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), plot_data: true, svg: false }
    }
}

/// `[sweep_space]`: spectral accuracy in `x` and `tau` at a fixed small `dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceSweepConfig {
    pub dt: f64,
    /// Defaults to the first entry of `epsilons`.
    pub epsilon: Option<f64>,
    pub n_values: Vec<usize>,
    pub n_tau_values: Vec<usize>,
    /// Grid of the comparison run; the `N` sweep holds `N_tau = ref_n_tau`
    /// and the `N_tau` sweep holds `N = ref_n`.
    pub ref_n: usize,
    pub ref_n_tau: usize,
}

impl Default for SpaceSweepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            epsilon: None,
            n_values: vec![8, 16, 32, 64],
            n_tau_values: vec![4, 8, 16, 32],
            ref_n: 128,
            ref_n_tau: 64,
        }
    }
}

/// `[limit_rate]`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    pub epsilons: Vec<f64>,
    /// Strang step of the limit model.
    pub dt: f64,
    /// Defaults to the top-level `n`.
    pub n: Option<usize>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self { epsilons: (2..=6).map(|j| 2f64.powi(-j)).collect(), dt: 1e-3, n: None }
    }
}

/// `[toy_check]`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub coefficient: ToyCoefficient,
    pub u0_re: f64,
    pub u0_im: f64,
    pub p: u32,
    pub epsilons: Vec<f64>,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self { coefficient: ToyCoefficient::Cos, u0_re: 1.0, u0_im: 0.0, p: 1, epsilons: default_toy_epsilons() }
    }
}

/// Full description of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: Preset,
    pub scheme: Scheme,
    /// Defaults to 3 for UA1 and 5 for UA2.
    pub init_order: Option<u32>,
    pub epsilons: Vec<f64>,
    pub dts: Vec<f64>,
    pub n: usize,
    pub n_tau: usize,
    pub t_final: f64,
    pub a: f64,
    pub b: f64,
    pub ua2_prediction: PredictionVariant,
    pub g1: G1Variant,
    /// Worker threads for sweep points; defaults to the number of cores.
    pub threads: Option<usize>,
    pub custom: Option<CustomProblem>,
    pub reference: ReferenceConfig,
    pub output: OutputConfig,
    pub sweep_space: SpaceSweepConfig,
    pub limit_rate: LimitConfig,
    pub toy_check: ToyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            example: Preset::I,
            scheme: Scheme::Ua2,
            init_order: None,
            epsilons: (0..=8).map(|j| 2f64.powi(-j)).collect(),
            dts: (0..=7).map(|j| 0.1 * 2f64.powi(-j)).collect(),
            n: 128,
            n_tau: 32,
            t_final: 0.5,
            a: -8.0,
            b: 8.0,
            ua2_prediction: PredictionVariant::HalfStep,
            g1: G1Variant::Printed,
            threads: None,
            custom: None,
            reference: ReferenceConfig::default(),
            output: OutputConfig::default(),
            sweep_space: SpaceSweepConfig::default(),
            limit_rate: LimitConfig::default(),
            toy_check: ToyConfig::default(),
        }
    }
}

/// Command-line values that replace configuration entries when present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub example: Option<Preset>,
    pub scheme: Option<Scheme>,
    pub order: Option<u32>,
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub ua2_prediction: Option<PredictionVariant>,
    pub g1: Option<G1Variant>,
}

/// Which operation a configuration is validated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Run,
    SweepTime,
    SweepSpace,
    LimitRate,
    ToyCheck,
}

fn field_err<T>(field: &str, msg: impl fmt::Display) -> Result<T> {
    invalid(format!("field `{field}`: {msg}"))
}

fn check_n(field: &str, n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        return field_err(field, format!("N must be even and at least 4, got {n}"));
    }
    Ok(())
}

fn check_n_tau(field: &str, n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return field_err(field, format!("N_tau must be even and at least 2, got {n}"));
    }
    Ok(())
}

fn check_epsilons(field: &str, eps: &[f64], min_len: usize) -> Result<()> {
    if eps.len() < min_len {
        return field_err(field, format!("needs at least {min_len} value(s), got {}", eps.len()));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return field_err(field, format!("epsilon must lie in (0, 1], got {e}"));
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return field_err(field, format!("must be positive and finite, got {v}"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(e) = o.example {
            self.example = e;
        }
        if let Some(s) = o.scheme {
            self.scheme = s;
        }
        if let Some(k) = o.order {
            self.init_order = Some(k);
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if o.svg {
            self.output.svg = true;
        }
        if let Some(p) = o.ua2_prediction {
            self.ua2_prediction = p;
        }
        if let Some(g) = o.g1 {
            self.g1 = g;
        }
    }

    /// Checks every field the operation reads, naming the offending field.
    pub fn validate(&self, op: Operation) -> Result<()> {
        if !(self.a < self.b) || !self.a.is_finite() || !self.b.is_finite() {
            return field_err("a", format!("domain needs a < b, got ({}, {})", self.a, self.b));
        }
        if let Some(k) = self.init_order {
            if k > 5 {
                return field_err("init_order", format!("must lie in 0..=5, got {k}"));
            }
        }
        if let Some(k) = self.reference.order {
            if k > 5 {
                return field_err("reference.order", format!("must lie in 0..=5, got {k}"));
            }
        }
        if self.threads == Some(0) {
            return field_err("threads", "must be at least 1");
        }
        match (self.example, &self.custom) {
            (Preset::Custom, None) => return field_err("custom", "example = \"custom\" needs a [custom] section"),
            (Preset::Custom, Some(c)) if !c.lambda.is_finite() => {
                return field_err("custom.lambda", format!("must be finite, got {}", c.lambda))
            }
            (p, Some(_)) if p != Preset::Custom => {
                return field_err("custom", format!("a [custom] section conflicts with example = \"{p}\""))
            }
            _ => {}
        }
        if op == Operation::ToyCheck {
            let t = &self.toy_check;
            check_epsilons("toy_check.epsilons", &t.epsilons, 1)?;
            if !(1..=3).contains(&t.p) {
                return field_err("toy_check.p", format!("must lie in 1..=3, got {}", t.p));
            }
            return ToyProblem::new(t.coefficient.clone(), self.toy_u0(), t.epsilons[0], t.p).map(|_| ());
        }
        check_n_tau("n_tau", self.n_tau)?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return field_err("t_final", format!("must be non-negative and finite, got {}", self.t_final));
        }
        check_positive("reference.dt", self.reference.dt)?;
        if let Some(nt) = self.reference.n_tau {
            check_n_tau("reference.n_tau", nt)?;
        }
        match op {
            Operation::Run | Operation::SweepTime => {
                check_n("n", self.n)?;
                check_epsilons("epsilons", &self.epsilons, 1)?;
                if self.dts.is_empty() {
                    return field_err("dts", "needs at least 1 value, got 0");
                }
                for &dt in &self.dts {
                    check_positive("dts", dt)?;
                }
            }
            Operation::SweepSpace => {
                let s = &self.sweep_space;
                check_positive("sweep_space.dt", s.dt)?;
                match s.epsilon {
                    Some(e) => check_epsilons("sweep_space.epsilon", &[e], 1)?,
                    None => check_epsilons("epsilons", &self.epsilons, 1)?,
                }
                check_n("sweep_space.ref_n", s.ref_n)?;
                check_n_tau("sweep_space.ref_n_tau", s.ref_n_tau)?;
                if s.n_values.is_empty() && s.n_tau_values.is_empty() {
                    return field_err("sweep_space.n_values", "both sweeps are empty");
                }
                for &n in &s.n_values {
                    check_n("sweep_space.n_values", n)?;
                    if n > s.ref_n || s.ref_n % n != 0 {
                        return field_err("sweep_space.n_values", format!("{n} must divide ref_n = {}", s.ref_n));
                    }
                }
                for &n in &s.n_tau_values {
                    check_n_tau("sweep_space.n_tau_values", n)?;
                }
            }
            Operation::LimitRate => {
                let l = &self.limit_rate;
                check_epsilons("limit_rate.epsilons", &l.epsilons, 2)?;
                check_positive("limit_rate.dt", l.dt)?;
                check_n("limit_rate.n", l.n.unwrap_or(self.n))?;
            }
            Operation::ToyCheck => unreachable!(),
        }
        Ok(())
    }

    pub fn order(&self) -> u32 {
        self.init_order.unwrap_or(match self.scheme {
            Scheme::Ua1 => 3,
            Scheme::Ua2 => 5,
        })
    }

    pub fn problem(&self, epsilon: f64) -> Result<Problem> {
        match (self.example.example(), &self.custom) {
            (Some(ex), _) => Ok(Problem { a: self.a, b: self.b, ..ex.problem(epsilon) }),
            (None, Some(c)) => Ok(Problem {
                epsilon,
                lambda: c.lambda,
                v_e: c.v_e.clone(),
                v_m: c.v_m.clone(),
                a: self.a,
                b: self.b,
                initial: c.initial.clone(),
            }),
            (None, None) => field_err("custom", "example = \"custom\" needs a [custom] section"),
        }
    }

    pub fn stepper(&self, dt: f64, n_tau: usize) -> StepperOptions {
        StepperOptions { scheme: self.scheme, dt, n_tau, prediction: self.ua2_prediction }
    }

    pub fn reference_spec(&self) -> ReferenceSpec {
        ReferenceSpec {
            dt: self.reference.dt,
            n_tau: self.reference.n_tau.unwrap_or(self.n_tau),
            order: self.reference.order,
            g1: self.g1,
        }
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.reference.cache_dir.clone().unwrap_or_else(|| self.output.dir.join("reference-cache"))
    }

    pub fn toy_u0(&self) -> C64 {
        C64::new(self.toy_check.u0_re, self.toy_check.u0_im)
    }
}
