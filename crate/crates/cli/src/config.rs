//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stcutfem::{
    manufactured_problem, Discretization, Interval, OverlapSpec, ProblemSpec, SpaceTimeMesh, TimeDegree, Velocity,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: ProblemConfig,
    pub overlap: OverlapConfig,
    pub discretization: DiscretizationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Manufactured solution `sin²(πx) e^{-t/2}` when true, zero data otherwise.
    pub manufactured: bool,
    #[serde(rename = "T")]
    pub final_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapConfig {
    pub length: f64,
    pub initial_left: f64,
    pub velocity: VelocityConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityKind {
    Constant,
    /// `value · sin(2πt/3)`, sampled at slab ends.
    SinDemo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityConfig {
    pub mode: VelocityKind,
    pub value: f64,
}

fn default_gamma() -> f64 {
    10.0
}

fn default_omega1() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub n0: usize,
    #[serde(rename = "nG")]
    pub n_g: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub q: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_omega1")]
    pub omega1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    K,
    H,
}

/// Parameters held fixed during a sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub sweep: Sweep,
    /// Inverse step sizes, `1/k` or `1/h`.
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub fixed: FixedConfig,
    /// One-based inclusive range of rows entering the fit.
    pub fit_window: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("output")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir() }
    }
}

/// One fully resolved run.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub problem: ProblemSpec,
    pub overlap: OverlapSpec,
    pub discretization: Discretization,
}

impl RunSetup {
    pub fn mesh(&self) -> stcutfem::Result<SpaceTimeMesh> {
        SpaceTimeMesh::new(&self.problem, &self.overlap, &self.discretization)
    }
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config(format!("{field}: {}", message.into()))
}

/// `value · count` rounded, provided it is an integer to within rounding.
fn exact_count(field: &str, value: f64, count: f64) -> Result<usize, CliError> {
    let n = value * count;
    let rounded = n.round();
    if !(rounded >= 1.0) || (n - rounded).abs() > 1e-9 * rounded {
        return Err(invalid(field, format!("{value} x {count} is not a positive integer")));
    }
    Ok(rounded as usize)
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!(
                "line {} column {}, field `{path}`: {inner}",
                inner.line(),
                inner.column()
            ))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.problem;
        if !(p.final_time > 0.0 && p.final_time.is_finite()) {
            return Err(invalid("problem.T", "must be positive"));
        }
        let o = &self.overlap;
        if !(o.length > 0.0 && o.length < 1.0) {
            return Err(invalid("overlap.length", "must lie in (0, 1)"));
        }
        if !(o.initial_left > 0.0 && o.initial_left + o.length < 1.0) {
            return Err(invalid("overlap.initial_left", "overlap must start strictly inside (0, 1)"));
        }
        if !o.velocity.value.is_finite() {
            return Err(invalid("overlap.velocity.value", "must be finite"));
        }
        let d = &self.discretization;
        for (field, v) in [("discretization.n0", d.n0), ("discretization.nG", d.n_g), ("discretization.N", d.n)] {
            if v == 0 {
                return Err(invalid(field, "must be positive"));
            }
        }
        TimeDegree::from_q(d.q).map_err(|e| invalid("discretization.q", e.to_string()))?;
        if !(d.gamma > 0.0 && d.gamma.is_finite()) {
            return Err(invalid("discretization.gamma", "must be positive"));
        }
        if !(0.0..=1.0).contains(&d.omega1) {
            return Err(invalid("discretization.omega1", "must lie in [0, 1]"));
        }
        if let Some(s) = &self.study {
            if s.resolutions.len() < 2 {
                return Err(invalid("study.resolutions", "need at least two entries"));
            }
            if s.resolutions.contains(&0) {
                return Err(invalid("study.resolutions", "entries must be positive"));
            }
            let [i, j] = s.fit_window;
            if !(1 <= i && i < j && j <= s.resolutions.len()) {
                return Err(invalid(
                    "study.fit_window",
                    format!("[{i}, {j}] must satisfy 1 <= i < j <= {}", s.resolutions.len()),
                ));
            }
            for (field, v) in [("study.fixed.h", s.fixed.h), ("study.fixed.k", s.fixed.k)] {
                if let Some(v) = v {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(invalid(field, "must be positive"));
                    }
                }
            }
            for r in 0..s.resolutions.len() {
                self.study_entry(r)?;
            }
        }
        // the base run must fit the domain too
        self.base_run()?.mesh().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    fn problem_spec(&self) -> ProblemSpec {
        let domain = Interval::new(0.0, 1.0).expect("unit interval");
        if self.problem.manufactured {
            manufactured_problem().with_final_time(self.problem.final_time)
        } else {
            ProblemSpec::zero(domain, self.problem.final_time)
        }
    }

    fn overlap_spec(&self) -> OverlapSpec {
        let v = &self.overlap.velocity;
        let velocity = match v.mode {
            VelocityKind::Constant => Velocity::Constant(v.value),
            VelocityKind::SinDemo => Velocity::sin_demo(v.value),
        };
        OverlapSpec::new(self.overlap.length, self.overlap.initial_left, velocity)
    }

    fn setup(&self, n0: usize, n_g: usize, n: usize) -> Result<RunSetup, CliError> {
        let d = &self.discretization;
        let mut discretization =
            Discretization::new(n0, n_g, n, TimeDegree::from_q(d.q).map_err(|e| invalid("discretization.q", e.to_string()))?);
        discretization.gamma = d.gamma;
        discretization.omega1 = d.omega1;
        Ok(RunSetup {
            problem: self.problem_spec(),
            overlap: self.overlap_spec(),
            discretization,
        })
    }

    /// The run described by the discretization block alone.
    pub fn base_run(&self) -> Result<RunSetup, CliError> {
        let d = &self.discretization;
        self.setup(d.n0, d.n_g, d.n)
    }

    /// Run number `index` of the sweep. The overlap keeps the base ratio
    /// `nG / n0` so both meshes refine together.
    pub fn study_entry(&self, index: usize) -> Result<RunSetup, CliError> {
        let s = self.study.as_ref().ok_or_else(|| invalid("study", "missing"))?;
        let d = &self.discretization;
        let r = *s
            .resolutions
            .get(index)
            .ok_or_else(|| invalid("study.resolutions", format!("no entry {index}")))? as f64;
        let ratio = d.n_g as f64 / d.n0 as f64;
        let (n0, n) = match s.sweep {
            Sweep::K => {
                let n0 = match s.fixed.h {
                    Some(h) => exact_count("study.fixed.h", 1.0 / h, 1.0)?,
                    None => d.n0,
                };
                (n0, exact_count("study.resolutions", r, self.problem.final_time)?)
            }
            Sweep::H => {
                let n = match s.fixed.k {
                    Some(k) => exact_count("study.fixed.k", self.problem.final_time, 1.0 / k)?,
                    None => d.n,
                };
                (exact_count("study.resolutions", r, 1.0)?, n)
            }
        };
        let n_g = exact_count("discretization.nG", n0 as f64, ratio)?;
        self.setup(n0, n_g, n)
    }

    /// Slope expected from theory for the configured sweep.
    pub fn reference_slope(&self) -> f64 {
        match self.study.as_ref().map(|s| s.sweep) {
            Some(Sweep::K) => self.discretization.q as f64 + 0.5,
            _ => 1.0,
        }
    }
}
