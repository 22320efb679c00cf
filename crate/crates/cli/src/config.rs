//! Experiment configuration: a JSON file with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use esl_core::analysis::Window;
use esl_core::dynamics::BoundaryPolicy;
use esl_core::omega::Tabulated;
use esl_core::{Attitude, AxisAngle, EulerVector, OmegaModel, Representation, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `euler`, `quat`, `gibbs` or `axisangle`.
    pub representation: String,
    /// `const:x,y,z`, `rotplane:T`, `pathological` or `csv:PATH`.
    pub omega: String,
    /// Initial Euler vector; ignored when `axis_angle` is set.
    pub e0: [f64; 3],
    pub axis_angle: Option<AxisAngleStart>,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub boundary: BoundaryPolicy,
    pub analyses: Analyses,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisAngleStart {
    pub axis: [f64; 3],
    pub theta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    pub strobe: Option<StrobeRequest>,
    pub psd: Option<PsdRequest>,
    pub recurrence: Option<RecurrenceRequest>,
    pub lyapunov: Option<LyapunovRequest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrobeRequest {
    pub period: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdRequest {
    /// `angle` (|E| or theta) or a trajectory column name.
    pub series: String,
    pub window: Window,
    pub min_prominence: f64,
    pub max_peaks: usize,
}

impl Default for PsdRequest {
    fn default() -> Self {
        Self { series: "angle".into(), window: Window::Hann, min_prominence: 0.0, max_peaks: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceRequest {
    pub epsilon: f64,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovRequest {
    pub steps: usize,
    pub dt: f64,
    /// Linearized form: `quat` (default), `euler` or `gibbs`.
    pub representation: String,
}

impl Default for LyapunovRequest {
    fn default() -> Self {
        Self { steps: 100_000, dt: 0.01, representation: "quat".into() }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let c = 1.0 / 3f64.sqrt();
        Self {
            representation: "euler".into(),
            omega: "rotplane:40".into(),
            e0: [c, c, c],
            axis_angle: None,
            t0: 0.0,
            t_end: 100.0,
            dt: 1e-3,
            boundary: BoundaryPolicy::Continue,
            analyses: Analyses::default(),
            out: PathBuf::from("out"),
        }
    }
}

/// Flags that override fields of a loaded configuration.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON experiment configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// euler | quat | gibbs | axisangle
    #[arg(long)]
    pub rep: Option<String>,
    /// const:x,y,z | rotplane:T | pathological | csv:PATH
    #[arg(long)]
    pub omega: Option<String>,
    /// Initial Euler vector x,y,z
    #[arg(long, allow_hyphen_values = true)]
    pub e0: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))?)
    }

    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut cfg = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(r) = &o.rep {
            cfg.representation = r.clone();
        }
        if let Some(w) = &o.omega {
            cfg.omega = w.clone();
        }
        if let Some(e) = &o.e0 {
            cfg.e0 = parse_triple(e)?;
            cfg.axis_angle = None;
        }
        if let Some(t) = o.t_end {
            cfg.t_end = t;
        }
        if let Some(dt) = o.dt {
            cfg.dt = dt;
        }
        if let Some(out) = &o.out {
            cfg.out = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.t_end > self.t0, invalid(format!("t_end ({}) must exceed t0 ({})", self.t_end, self.t0)));
        ensure!(self.dt > 0.0 && self.dt.is_finite(), invalid(format!("dt must be positive, got {}", self.dt)));
        let rep = self.rep()?;
        if let Some(p) = &self.analyses.psd {
            if p.series != "angle" && !rep.columns().contains(&p.series.as_str()) {
                bail!(invalid(format!("psd series '{}' is not a {rep} column", p.series)));
            }
        }
        if let Some(s) = &self.analyses.strobe {
            ensure!(s.period >= 2.0 * self.dt, invalid(format!("strobe period {} is shorter than two steps", s.period)));
        }
        if let Some(r) = &self.analyses.recurrence {
            ensure!(r.stride >= 1 && r.epsilon >= 0.0, invalid("recurrence needs stride >= 1 and epsilon >= 0".into()));
        }
        if let Some(l) = &self.analyses.lyapunov {
            lyapunov_rep(&l.representation)?;
        }
        self.omega_model()?;
        Ok(())
    }

    pub fn rep(&self) -> Result<Representation> {
        let rep: Representation = self.representation.parse()?;
        ensure!(rep != Representation::ModifiedGibbs, invalid("choose one of euler, quat, gibbs, axisangle".into()));
        Ok(rep)
    }

    pub fn omega_model(&self) -> Result<OmegaModel> {
        parse_omega(&self.omega)
    }

    pub fn initial(&self) -> Result<Attitude> {
        Ok(match self.axis_angle {
            Some(a) => Attitude::AxisAngle(AxisAngle::new(Vec3::from_slice(&a.axis), a.theta)?),
            None => Attitude::Euler(EulerVector(Vec3::from_slice(&self.e0))),
        })
    }
}

pub fn lyapunov_rep(name: &str) -> Result<Representation> {
    let rep: Representation = name.parse()?;
    ensure!(
        matches!(rep, Representation::Euler | Representation::Quaternion | Representation::Gibbs),
        invalid(format!("no Lyapunov flow for {rep}"))
    );
    Ok(rep)
}

pub fn parse_omega(spec: &str) -> Result<OmegaModel> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match kind.trim() {
        "const" => OmegaModel::constant(Vec3::from_slice(&parse_triple(arg)?)),
        "rotplane" => {
            let period: f64 = arg.trim().parse().map_err(|_| invalid(format!("bad rotplane period '{arg}'")))?;
            ensure!(period > 0.0, invalid(format!("rotplane period must be positive, got {period}")));
            OmegaModel::rotating_plane(period)
        }
        "pathological" if arg.is_empty() => OmegaModel::Pathological,
        "csv" => OmegaModel::Tabulated(Tabulated::from_csv(arg)?),
        _ => bail!(invalid(format!("unknown omega spec '{spec}'"))),
    })
}

pub fn parse_triple(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| invalid(format!("expected x,y,z, got '{s}'")))?;
    ensure!(parts.len() == 3 && parts.iter().all(|v| v.is_finite()), invalid(format!("expected x,y,z, got '{s}'")));
    Ok([parts[0], parts[1], parts[2]])
}

fn invalid(msg: String) -> esl_core::EslError {
    esl_core::EslError::InvalidInput(msg)
}

fn schema(msg: String) -> esl_core::EslError {
    esl_core::EslError::Schema(msg)
}
