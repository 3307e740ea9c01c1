//! Run configuration: a JSON document with dot-path overrides applied before
//! it is deserialised, and every cross-constraint checked before any compute.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nlhelm::angular::{AngularSpectrum, ModeSet};
use nlhelm::fields::{Domain, Grading, RadialGrid, MAX_LAMBDA_SPACING};
use nlhelm::flow::WeightSpec;
use nlhelm::nonlin::NonlinearitySpec;
use nlhelm::resolvent::Potential;
use nlhelm::solver::SolverConfig;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub incoming_data: IncomingData,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    pub discretization: Discretization,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub farfield: FarFieldSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub n: usize,
    pub lambda: f64,
    #[serde(default)]
    pub potential: Option<Potential>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub l: i64,
    pub m: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// `f = Y₀₀`.
    Constant,
    /// `f = Y_{l0}`.
    Zonal { l: i64 },
    /// Uniform random real and imaginary parts in `[−1, 1]` on degrees `≤ max_degree`.
    Random { max_degree: usize, seed: u64 },
}

/// Incoming data `f`: a preset plus explicit modes, optionally rescaled to a given `H^{k+2}` size.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncomingData {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub modes: Vec<ModeEntry>,
    /// Target `‖f‖_{H^{k+2}}`.
    #[serde(default)]
    pub size: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `α |u|^{p−1} u`.
    GaugePower {
        alpha: Complex64,
        p: u32,
    },
    /// `α u^p`.
    PurePower {
        alpha: Complex64,
        p: u32,
    },
    Monomials {
        spec: NonlinearitySpec,
    },
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Self::GaugePower {
            alpha: Complex64::new(1.0, 0.0),
            p: 5,
        }
    }
}

impl Nonlinearity {
    pub fn spec(&self) -> CliResult<NonlinearitySpec> {
        Ok(match self {
            Self::GaugePower { alpha, p } => NonlinearitySpec::gauge_power(*alpha, *p)?,
            Self::PurePower { alpha, p } => NonlinearitySpec::pure_power(*alpha, *p),
            Self::Monomials { spec } => spec.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub r_min: f64,
    pub r_max: f64,
    pub radial_count: usize,
    #[serde(default)]
    pub grading: Grading,
    /// Band limit `L`.
    pub max_degree: usize,
    /// Inner radius `R0` of the cutoff.
    #[serde(default = "default_r0")]
    pub r0: f64,
}

fn default_r0() -> f64 {
    2.0
}

/// Solver settings; `R0` lives in [`Discretization`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub delta: Option<f64>,
    pub tol_step: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub k: Option<u32>,
    pub anderson: usize,
    pub smallness_budget: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            delta: d.delta,
            tol_step: d.tol_step,
            tol_residual: d.tol_residual,
            max_iter: d.max_iter,
            k: d.k,
            anderson: d.anderson,
            smallness_budget: d.smallness_budget,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarFieldSection {
    /// Fit window `[r_a, r_b]`; `[0.6, 0.95]·r_max` when absent.
    pub window: Option<(f64, f64)>,
    /// Field to analyse in `farfield`; `<outputs.directory>/u.hfld` when absent.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    /// Number of random initial points on the characteristic set.
    pub starts: usize,
    pub seed: u64,
    /// Integration time in each direction.
    pub horizon: f64,
    /// Initial `x` is drawn from `[0, x_max]`.
    pub x_max: f64,
    pub weight: WeightSpec,
    /// How many trajectories to write out in full.
    pub dump: usize,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            starts: 100,
            seed: 0,
            horizon: 20.0,
            x_max: 0.0,
            weight: WeightSpec::standard(0.05),
            dump: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// Multipliers applied to `f`.
    pub scales: Vec<f64>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            scales: (0..5).map(|j| 10f64.powf(j as f64 / 4.0)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Field,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub directory: PathBuf,
    /// The JSON manifest is always written.
    pub formats: Vec<Format>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Field],
        }
    }
}

impl Outputs {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

/// Sets `path` (dot-separated keys, numeric segments index arrays) in `doc`,
/// creating intermediate objects. `raw` is read as JSON, or as a string if it is not valid JSON.
pub fn apply_override(doc: &mut Value, path: &str, raw: &str) -> CliResult<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Override(format!("malformed key path '{path}'")));
    }
    let mut node = doc;
    for (depth, key) in keys.iter().enumerate() {
        let last = depth + 1 == keys.len();
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Object(map) => {
                let slot = map.entry(key.to_string()).or_insert(Value::Null);
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Array(items) => {
                let idx: usize = key.parse().map_err(|_| {
                    CliError::Override(format!("'{key}' in '{path}' indexes an array"))
                })?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    CliError::Override(format!("index {idx} in '{path}' is past the end ({len})"))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(CliError::Override(format!(
                    "'{}' in '{path}' is not an object or array",
                    keys[..depth].join(".")
                )))
            }
        };
    }
    unreachable!("the loop returns at the last key")
}

/// Splits `key=value`.
pub fn parse_override(arg: &str) -> CliResult<(&str, &str)> {
    arg.split_once('=')
        .ok_or_else(|| CliError::Override(format!("override '{arg}' is not of the form key=value")))
}

impl RunConfig {
    pub fn from_value(doc: Value) -> CliResult<Self> {
        Ok(serde_json::from_value(doc)?)
    }

    pub fn parse(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut doc: Value = serde_json::from_str(text)?;
        for o in overrides {
            let (k, v) = parse_override(o)?;
            apply_override(&mut doc, k, v)?;
        }
        Self::from_value(doc)
    }

    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialise")
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            delta: s.delta,
            tol_step: s.tol_step,
            tol_residual: s.tol_residual,
            max_iter: s.max_iter,
            k: s.k,
            r0: self.discretization.r0,
            anderson: s.anderson,
            smallness_budget: s.smallness_budget,
        }
    }

    pub fn grid(&self) -> CliResult<RadialGrid> {
        let d = &self.discretization;
        Ok(RadialGrid::new(
            d.r_min,
            d.r_max,
            d.radial_count,
            d.grading,
        )?)
    }

    pub fn domain(&self) -> CliResult<Arc<Domain>> {
        Ok(Domain::new(
            self.problem.lambda,
            self.grid()?,
            self.problem.n,
            self.discretization.max_degree,
        )?)
    }

    /// Checks that need no field-sized computation.
    pub fn validate(&self) -> CliResult<()> {
        let cfg = |msg: String| Err(CliError::Core(nlhelm::Error::Config(msg)));
        let p = &self.problem;
        if p.n < 2 {
            return cfg(format!("dimension n = {} must be at least 2", p.n));
        }
        if !(p.lambda.is_finite() && p.lambda > 0.0) {
            return cfg(format!("λ = {} must be positive", p.lambda));
        }
        if let Some(v) = &p.potential {
            v.validate()?;
        }
        let d = &self.discretization;
        if !(d.r0 > 0.0 && 2.0 * d.r0 <= d.r_max) {
            return cfg(format!(
                "cutoff radius R0 = {} needs 0 < 2 R0 ≤ r_max = {}",
                d.r0, d.r_max
            ));
        }
        if let Some(size) = self.incoming_data.size {
            if !(size.is_finite() && size >= 0.0) {
                return cfg(format!(
                    "incoming data size {size} must be finite and nonnegative"
                ));
            }
        }
        let l_max = d.max_degree as i64;
        for m in &self.incoming_data.modes {
            if m.l > l_max {
                return cfg(format!(
                    "incoming mode (l, m) = ({}, {}) exceeds the band limit {l_max}",
                    m.l, m.m
                ));
            }
        }
        match self.incoming_data.preset {
            Some(Preset::Zonal { l }) if l < 0 || l > l_max => {
                return cfg(format!("zonal preset degree {l} outside 0..={l_max}"));
            }
            Some(Preset::Random { max_degree, .. }) if max_degree > d.max_degree => {
                return cfg(format!(
                    "random preset degree {max_degree} exceeds the band limit {l_max}"
                ));
            }
            _ => {}
        }
        if matches!(p.n, 2 | 3) {
            self.raw_incoming()?;
        }
        if let Some((a, b)) = self.farfield.window {
            if !(2.0 * d.r0 <= a && a < b && b <= d.r_max) {
                return cfg(format!(
                    "far-field window [{a}, {b}] must satisfy 2 R0 = {} ≤ r_a < r_b ≤ r_max = {}",
                    2.0 * d.r0,
                    d.r_max
                ));
            }
        }
        let fl = &self.flow;
        if !(fl.horizon.is_finite() && fl.horizon > 0.0 && fl.x_max >= 0.0 && fl.x_max < 1.0) {
            return cfg(format!(
                "flow needs a positive horizon and x_max in [0, 1), got {} and {}",
                fl.horizon, fl.x_max
            ));
        }
        fl.weight.validate()?;
        if self.probe.scales.is_empty()
            || self
                .probe
                .scales
                .iter()
                .any(|s| !(s.is_finite() && *s > 0.0))
        {
            return cfg("probe scales must be a nonempty list of positive numbers".into());
        }
        let h = self.grid()?.max_spacing();
        if p.lambda * h > MAX_LAMBDA_SPACING {
            return cfg(format!(
                "radial grid too coarse: λ · spacing = {:.3} exceeds {MAX_LAMBDA_SPACING}; add nodes",
                p.lambda * h
            ));
        }
        Ok(())
    }

    /// `f` from the preset and explicit modes, before any rescaling.
    pub fn raw_incoming(&self) -> CliResult<AngularSpectrum> {
        let n = self.problem.n;
        let big_l = self.discretization.max_degree;
        let mut f = AngularSpectrum::zeros(n, big_l)?;
        match &self.incoming_data.preset {
            None => {}
            Some(Preset::Constant) => f.set(0, 0, Complex64::new(1.0, 0.0))?,
            Some(Preset::Zonal { l }) => f.set(*l, 0, Complex64::new(1.0, 0.0))?,
            Some(Preset::Random { max_degree, seed }) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modes: ModeSet = f.modes;
                for idx in 0..modes.count() {
                    if modes.degree(idx) <= *max_degree {
                        f.coeffs[idx] =
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
        for m in &self.incoming_data.modes {
            let old = f.get(m.l, m.m);
            f.set(m.l, m.m, old + Complex64::new(m.re, m.im))?;
        }
        Ok(f)
    }

    /// `f`, rescaled to `incoming_data.size` in `H^{k+2}` when that is set.
    pub fn incoming(&self) -> CliResult<AngularSpectrum> {
        let f = self.raw_incoming()?;
        let Some(size) = self.incoming_data.size else {
            return Ok(f);
        };
        let k = self.solver_config().module_order(self.problem.n);
        let norm = f.sobolev_norm(k as f64 + 2.0);
        if norm == 0.0 {
            if size == 0.0 {
                return Ok(f);
            }
            return Err(CliError::Core(nlhelm::Error::Config(
                "cannot rescale vanishing incoming data to a nonzero size".into(),
            )));
        }
        Ok(f.scaled(Complex64::new(size / norm, 0.0)))
    }
}
