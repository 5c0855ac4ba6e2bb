//! The three subcommands, writing to any `Write` sink.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use stirap_tomo::analytic::{cd_basis, pa_with_decay, predicted_pa};
use stirap_tomo::{
    propagate_with, reconstruct, run_protocol, Level, MeasurementReport, PropagateOptions, StateVector, Trajectory,
};

use crate::config::{parse_real, ConfigError, RunConfig};

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Numerical(stirap_tomo::Error),
    Io(io::Error),
}

impl CommandError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Numerical(_) => 3,
            CommandError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Config(e) => write!(f, "config error: {e}"),
            CommandError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CommandError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<stirap_tomo::Error> for CommandError {
    fn from(e: stirap_tomo::Error) -> Self {
        match e {
            stirap_tomo::Error::Io(msg) => CommandError::Io(io::Error::other(msg)),
            other => CommandError::Numerical(other),
        }
    }
}

impl From<io::Error> for CommandError {
    fn from(e: io::Error) -> Self {
        CommandError::Io(e)
    }
}

pub type CommandResult<T> = Result<T, CommandError>;

fn options(cfg: &RunConfig) -> PropagateOptions<f64> {
    PropagateOptions::with_tol(cfg.integrator_tol)
}

fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// Integrates the configured state over the pulse window.
pub fn trajectory(cfg: &RunConfig) -> CommandResult<Trajectory<f64>> {
    let (t0, t1) = cfg.pulse.window();
    Ok(propagate_with(&cfg.initial_state, &cfg.pulse, &cfg.decay, t0, t1, &options(cfg))?)
}

/// Writes `header` as a `#` comment line, then the trajectory table.
pub fn simulate<W: Write>(cfg: &RunConfig, header: &str, mut out: W) -> CommandResult<Trajectory<f64>> {
    let traj = trajectory(cfg)?;
    let basis = cd_basis(cfg.pulse.alpha, cfg.pulse.beta);
    let excited = StateVector::basis(4, Level::E.index());
    writeln!(out, "# {header}")?;
    traj.write_csv(
        &mut out,
        &[("rho_ee", &excited), ("c_population", &basis.c_state), ("d_population", &basis.d_state)],
    )?;
    Ok(traj)
}

#[derive(Serialize)]
struct StampedReport<'a> {
    generated: &'a str,
    #[serde(flatten)]
    report: &'a MeasurementReport<f64>,
}

/// Runs the protocol and writes the report JSON; `generated` is its first field.
pub fn measure<W: Write>(cfg: &RunConfig, generated: &str, mut out: W) -> CommandResult<MeasurementReport<f64>> {
    let settings = cfg.settings();
    let records = run_protocol(&cfg.initial_state, &settings, &cfg.pulse, &cfg.decay, &options(cfg))?;
    for r in &records {
        log::info!(
            "setting alpha={:.6} beta={:.6}: raw {:.6e}, calibrated {:.6e}",
            r.setting.alpha,
            r.setting.beta,
            r.raw_signal,
            r.calibrated_pa
        );
    }
    let estimate = reconstruct(&records)?;
    if !estimate.is_physical() {
        log::warn!(
            "estimate is not a physical block (Cauchy-Schwarz violation {:.3e})",
            estimate.cauchy_schwarz_violation
        );
    }
    let report = MeasurementReport::new(estimate, records, Some(&cfg.initial_state));
    let text =
        serde_json::to_string_pretty(&StampedReport { generated, report: &report }).expect("report fields serialize");
    writeln!(out, "{text}")?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    GammaA,
    OmegaMax,
    DelayTau,
    Delta,
    Alpha,
    Beta,
}

impl SweepParam {
    pub const NAMES: [&'static str; 6] = ["gamma_a", "omega_max", "delay_tau", "delta", "alpha", "beta"];

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "gamma_a" => SweepParam::GammaA,
            "omega_max" => SweepParam::OmegaMax,
            "delay_tau" => SweepParam::DelayTau,
            "delta" => SweepParam::Delta,
            "alpha" => SweepParam::Alpha,
            "beta" => SweepParam::Beta,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    /// Copy of `cfg` with the parameter set to `value`.
    pub fn apply(self, cfg: &RunConfig, value: f64) -> Result<RunConfig, ConfigError> {
        let mut out = cfg.clone();
        match self {
            SweepParam::GammaA => out.decay.gamma_a = value,
            SweepParam::OmegaMax => out.pulse.omega_max = value,
            SweepParam::DelayTau => out.pulse.delay = value,
            SweepParam::Delta => out.pulse.delta = value,
            SweepParam::Alpha => out.pulse.alpha = value,
            SweepParam::Beta => out.pulse.beta = value,
        }
        let checked = out.pulse.validate().and_then(|_| out.decay.validate());
        checked.map_err(|e| ConfigError {
            source: "--grid".into(),
            line: None,
            field: Some(self.name().into()),
            message: format!("value {value}: {e}"),
        })?;
        Ok(out)
    }
}

/// `start:stop:count` (inclusive, evenly spaced) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, ConfigError> {
    let err = |message: String| ConfigError { source: "--grid".into(), line: None, field: None, message };
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let start = parse_real(parts[0]).ok_or_else(|| err(format!("bad start `{}`", parts[0])))?;
        let stop = parse_real(parts[1]).ok_or_else(|| err(format!("bad stop `{}`", parts[1])))?;
        let n: usize = parts[2].trim().parse().map_err(|_| err(format!("bad count `{}`", parts[2])))?;
        match n {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
        }
    } else {
        s.split(',')
            .map(|x| parse_real(x).ok_or_else(|| err(format!("bad grid value `{}`", x.trim()))))
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(err("grid is empty".into()));
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    /// ρ_aa at the window end.
    pub final_pa: f64,
    pub decay_prediction: f64,
    pub ratio: f64,
    pub max_rho_ee: f64,
    pub final_c_pop: f64,
}

pub fn sweep_point(cfg: &RunConfig, param: f64) -> CommandResult<SweepRow> {
    let traj = trajectory(cfg)?;
    let last = traj.final_state();
    let (alpha, beta) = (cfg.pulse.alpha, cfg.pulse.beta);
    let p_a = predicted_pa(&cfg.initial_state, alpha, beta);
    let prediction = pa_with_decay(p_a, &cfg.pulse, cfg.decay.amplitude_rate_a())?;
    let final_pa = last.population(Level::A);
    Ok(SweepRow {
        param,
        final_pa,
        decay_prediction: prediction,
        ratio: final_pa / prediction,
        max_rho_ee: traj.max_population(Level::E),
        final_c_pop: last.overlap(&cd_basis(alpha, beta).c_state),
    })
}

/// Evaluates every grid point in parallel; rows come back in grid order.
pub fn sweep_rows(cfg: &RunConfig, param: SweepParam, grid: &[f64]) -> CommandResult<Vec<SweepRow>> {
    let points: Vec<RunConfig> = grid.iter().map(|&v| param.apply(cfg, v)).collect::<Result<_, _>>()?;
    points
        .par_iter()
        .zip(grid.par_iter())
        .map(|(point, &v)| {
            let row = sweep_point(point, v);
            log::debug!("{} = {v}: {:?}", param.name(), row.as_ref().map(|r| r.final_pa));
            row
        })
        .collect()
}

pub fn sweep<W: Write>(
    cfg: &RunConfig,
    param: SweepParam,
    grid: &[f64],
    header: &str,
    mut out: W,
) -> CommandResult<Vec<SweepRow>> {
    let rows = sweep_rows(cfg, param, grid)?;
    writeln!(out, "# {header}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    let io = |e: csv::Error| CommandError::Io(io::Error::other(e));
    w.write_record([param.name(), "final_pa", "decay_prediction", "ratio", "max_rho_ee", "final_c_pop"]).map_err(io)?;
    for r in &rows {
        w.write_record(
            [r.param, r.final_pa, r.decay_prediction, r.ratio, r.max_rho_ee, r.final_c_pop].map(full_precision),
        )
        .map_err(io)?;
    }
    w.flush()?;
    Ok(rows)
}
