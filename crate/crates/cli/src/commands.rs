use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use clap::{Args, Subcommand};
use esl_core::analysis::{
    detect_peaks, lyapunov_spectrum, nearest_neighbor_gaps, power_spectrum, recurrence, strobe, AttitudeFlow,
    LinearFlow, LyapunovEstimate, LyapunovOptions, Window,
};
use esl_core::closed_form::{spinor_params, spinor_trajectory};
use esl_core::dynamics::{integrate_with, IntegrationOptions, Trajectory};
use esl_core::rotation::convert;
use esl_core::{io, EslError, OmegaModel, Vec3};
use serde::Serialize;
use serde_json::json;

use crate::config::{
    lyapunov_rep, parse_triple, ExperimentConfig, LyapunovRequest, Overrides, PsdRequest, RecurrenceRequest,
    StrobeRequest,
};

/// Some acceptance check did not pass.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

#[derive(Debug, Args)]
pub struct SpinorArgs {
    /// Initial axis x,y,z
    #[arg(long, allow_hyphen_values = true, default_value = "1,0,0")]
    pub n0: String,
    /// Initial angle in (0, 2 pi)
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub theta0: f64,
    /// Spin axis x,y,z (normalized)
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,1")]
    pub omega_hat: String,
    #[arg(long, default_value_t = 4.0 * std::f64::consts::PI)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Sample a trajectory once per period
    Strobe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        period: f64,
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Power spectrum of one trajectory series, with peak picking
    Psd {
        #[arg(long)]
        input: PathBuf,
        /// `angle` or a column name
        #[arg(long, default_value = "angle")]
        series: String,
        /// hann | none
        #[arg(long, default_value = "hann")]
        window: Window,
        #[arg(long, default_value_t = 0.0)]
        min_prominence: f64,
        #[arg(long, default_value_t = 5)]
        max_peaks: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Binary recurrence matrix, written as the list of set entries
    Recurrence {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Lyapunov spectrum of the flow described by a configuration
    Lyapunov {
        #[command(flatten)]
        experiment: Overrides,
        /// Number of RK4 steps (the step is --dt, default 0.01)
        #[arg(long)]
        steps: Option<usize>,
        /// Linearized form: quat | euler | gibbs
        #[arg(long)]
        form: Option<String>,
        /// Check the estimator on the linear system diag(0.1, -0.2) instead
        #[arg(long)]
        self_test: bool,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Divide every tolerance by this factor
    #[arg(long, default_value_t = 1.0)]
    pub tighten: f64,
    /// Run only the named checks
    #[arg(long)]
    pub only: Vec<String>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_csv<T: ?Sized>(
    path: &Path,
    value: &T,
    f: fn(std::io::BufWriter<fs::File>, &T) -> esl_core::Result<()>,
) -> Result<()> {
    io::to_file(path, value, f).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn read_input(path: &Path) -> Result<Trajectory> {
    io::read_trajectory_file(path).with_context(|| format!("reading {}", path.display()))
}

pub fn simulate(o: &Overrides) -> Result<()> {
    let cfg = ExperimentConfig::resolve(o)?;
    let omega = cfg.omega_model()?;
    out_dir(&cfg.out)?;
    let opts = IntegrationOptions { boundary: cfg.boundary, ..Default::default() };
    let (traj, aborted) = match integrate_with(cfg.rep()?, cfg.initial()?, &omega, cfg.t0, cfg.t_end, cfg.dt, opts) {
        Ok(tr) => (tr, None),
        Err(EslError::Aborted { cause, time, partial }) => (*partial, Some((cause, time))),
        Err(e) => return Err(e.into()),
    };
    write_csv(&cfg.out.join("trajectory.csv"), &traj, io::write_trajectory)?;
    write_json(
        &cfg.out.join("trajectory.json"),
        &json!({
            "command": "simulate",
            "config": cfg,
            "columns": io::trajectory_header(traj.representation),
            "samples": traj.len(),
            "abort": traj.abort,
            "continuation": traj.continuation,
            "norm_drift": traj.norm_drift,
        }),
    )?;
    if let Some((cause, time)) = aborted {
        return Err(EslError::TrajectoryAborted { time }).context(format!("{cause}; partial trajectory written"));
    }
    let a = &cfg.analyses;
    let sidecar = |params: serde_json::Value| json!({ "command": "simulate", "config": cfg, "parameters": params });
    if let Some(req) = &a.strobe {
        run_strobe(&traj, req, &cfg.out, sidecar(json!(req)))?;
    }
    if let Some(req) = &a.psd {
        run_psd(&traj, req, &cfg.out, sidecar(json!(req)))?;
    }
    if let Some(req) = &a.recurrence {
        run_recurrence(&traj, req, &cfg.out, sidecar(json!(req)))?;
    }
    if let Some(req) = &a.lyapunov {
        let est = lyapunov_for(&cfg, &omega, req)?;
        write_lyapunov(&est, &cfg.out, sidecar(json!(req)))?;
    }
    Ok(())
}

pub fn spinor(a: &SpinorArgs) -> Result<()> {
    let n0 = Vec3::from_slice(&parse_triple(&a.n0)?);
    let w = Vec3::from_slice(&parse_triple(&a.omega_hat)?);
    let sol = spinor_params(n0, a.theta0, w)?;
    let tr = spinor_trajectory(&sol, 0.0, a.t_end, a.dt)?;
    out_dir(&a.out)?;
    write_csv(&a.out.join("spinor.csv"), &tr, io::write_trajectory)?;
    let (lo, hi) = sol.theta_bounds();
    write_json(
        &a.out.join("spinor.json"),
        &json!({
            "command": "spinor",
            "parameters": { "n0": a.n0, "theta0": a.theta0, "omega_hat": a.omega_hat, "t_end": a.t_end, "dt": a.dt },
            "a": sol.a,
            "b": sol.b,
            "e1": sol.e1,
            "e2": sol.e2,
            "identity_residual": sol.identity_residual(),
            "theta_bounds": [lo, hi],
            "samples": tr.len(),
        }),
    )
}

pub fn analyze(cmd: &AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::Strobe { input, period, offset, out } => {
            let traj = read_input(input)?;
            out_dir(out)?;
            let req = StrobeRequest { period: *period, offset: *offset };
            run_strobe(&traj, &req, out, from_file("strobe", input, json!(req)))
        }
        AnalyzeCommand::Psd { input, series, window, min_prominence, max_peaks, out } => {
            let traj = read_input(input)?;
            out_dir(out)?;
            let req = PsdRequest {
                series: series.clone(),
                window: *window,
                min_prominence: *min_prominence,
                max_peaks: *max_peaks,
            };
            run_psd(&traj, &req, out, from_file("psd", input, json!(req)))
        }
        AnalyzeCommand::Recurrence { input, epsilon, stride, out } => {
            let traj = read_input(input)?;
            out_dir(out)?;
            let req = RecurrenceRequest { epsilon: *epsilon, stride: *stride };
            run_recurrence(&traj, &req, out, from_file("recurrence", input, json!(req)))
        }
        AnalyzeCommand::Lyapunov { experiment, steps, form, self_test } => {
            let cfg = ExperimentConfig::resolve(experiment)?;
            out_dir(&cfg.out)?;
            let mut req = cfg.analyses.lyapunov.clone().unwrap_or_default();
            if let Some(s) = steps {
                req.steps = *s;
            }
            if let Some(f) = form {
                req.representation = f.clone();
            }
            if let Some(dt) = experiment.dt {
                req.dt = dt;
            }
            if *self_test {
                return lyapunov_self_test(&cfg.out);
            }
            let est = lyapunov_for(&cfg, &cfg.omega_model()?, &req)?;
            let sidecar = json!({ "command": "analyze lyapunov", "config": cfg, "parameters": req });
            write_lyapunov(&est, &cfg.out, sidecar)
        }
    }
}

fn from_file(kind: &str, input: &Path, params: serde_json::Value) -> serde_json::Value {
    json!({ "command": format!("analyze {kind}"), "input": input, "parameters": params })
}

fn with(mut base: serde_json::Value, key: &str, value: serde_json::Value) -> serde_json::Value {
    base[key] = value;
    base
}

fn run_strobe(traj: &Trajectory, req: &StrobeRequest, out: &Path, sidecar: serde_json::Value) -> Result<()> {
    let s = strobe(traj, req.period, req.offset)?;
    write_csv(&out.join("strobe.csv"), &s, io::write_strobe)?;
    let gaps = nearest_neighbor_gaps(&s.points);
    write_json(&out.join("strobe.json"), &with(with(sidecar, "points", json!(s.points.len())), "gaps", json!(gaps)))
}

fn run_psd(traj: &Trajectory, req: &PsdRequest, out: &Path, sidecar: serde_json::Value) -> Result<()> {
    let series = if req.series == "angle" {
        traj.angle_series()
    } else {
        let col = traj.representation.columns().iter().position(|c| *c == req.series).ok_or_else(|| {
            EslError::Schema(format!("no column '{}' in a {} trajectory", req.series, traj.representation))
        })?;
        traj.component(col)
    };
    let spec = power_spectrum(&series, traj.dt, req.window)?;
    let peaks = detect_peaks(&spec, req.min_prominence, req.max_peaks);
    write_csv(&out.join("spectrum.csv"), &spec, io::write_spectrum)?;
    write_csv(&out.join("peaks.csv"), peaks.as_slice(), io::write_peaks)?;
    write_json(&out.join("spectrum.json"), &with(sidecar.clone(), "bin_width", json!(spec.bin_width())))?;
    let periods: Vec<f64> = peaks.iter().map(|p| 1.0 / p.freq).collect();
    write_json(&out.join("peaks.json"), &with(with(sidecar, "peaks", json!(peaks)), "periods", json!(periods)))
}

fn run_recurrence(traj: &Trajectory, req: &RecurrenceRequest, out: &Path, sidecar: serde_json::Value) -> Result<()> {
    let r = recurrence(traj, req.epsilon, req.stride)?;
    write_csv(&out.join("recurrence.csv"), &r, io::write_recurrence)?;
    let info = json!({ "size": r.size(), "set": r.count_set() });
    write_json(&out.join("recurrence.json"), &with(sidecar, "matrix", info))
}

fn lyapunov_for(cfg: &ExperimentConfig, omega: &OmegaModel, req: &LyapunovRequest) -> Result<LyapunovEstimate> {
    let rep = lyapunov_rep(&req.representation)?;
    let x0 = convert(cfg.initial()?, rep, None)?.to_state();
    let mut opts = LyapunovOptions::new(req.steps, req.dt);
    opts.t0 = cfg.t0;
    opts.record_interval = (req.steps / 1000).max(1).next_multiple_of(opts.renorm_interval);
    Ok(lyapunov_spectrum(&AttitudeFlow::new(rep, omega.clone())?, &x0, opts)?)
}

fn write_lyapunov(est: &LyapunovEstimate, out: &Path, sidecar: serde_json::Value) -> Result<()> {
    write_csv(&out.join("lyapunov.csv"), est, io::write_lyapunov)?;
    println!("exponents: {:?}", est.exponents);
    write_json(&out.join("lyapunov.json"), &with(with(sidecar, "exponents", json!(est.exponents)), "sum", json!(est.sum())))
}

fn lyapunov_self_test(out: &Path) -> Result<()> {
    let expected = [0.1, -0.2];
    let est = lyapunov_spectrum(&LinearFlow::diagonal(&expected), &[1.0, 1.0], LyapunovOptions::new(10_000, 0.01))?;
    let err = est.exponents.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sidecar = json!({
        "command": "analyze lyapunov --self-test",
        "system": "diag(0.1, -0.2)",
        "expected": expected,
        "max_error": err,
    });
    write_lyapunov(&est, out, sidecar)?;
    ensure!(err <= 1e-4, VerificationFailed(format!("self-test error {err:e} exceeds 1e-4")));
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    ensure!(a.tighten > 0.0, EslError::InvalidInput(format!("tighten must be positive, got {}", a.tighten)));
    let selected: Vec<&esl_verify::Check> = if a.only.is_empty() {
        esl_verify::checks().iter().collect()
    } else {
        a.only
            .iter()
            .map(|id| esl_verify::find(id).ok_or_else(|| EslError::InvalidInput(format!("no check named '{id}'"))))
            .collect::<Result<_, _>>()?
    };
    let mut failed = 0;
    for check in &selected {
        let report = check.run(a.tighten);
        println!("{report}");
        if !report.passed() {
            failed += 1;
        }
    }
    println!("\n{} passed, {failed} failed", selected.len() - failed);
    ensure!(failed == 0, VerificationFailed(format!("{failed} acceptance check(s) failed")));
    Ok(())
}
