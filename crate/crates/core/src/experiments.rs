//! Batch experiments: sweeps over the initial field, optimization runs,
//! pulse transfer between ring sizes, and their CSV/JSON output.
//!
//! Every experiment is a pure function of an [`ExperimentConfig`] (plus pulse
//! files for transfers). Sweep points run through [`crate::sweep`] and are
//! merged in input order, so the CSV text does not depend on the worker
//! count. Wall-clock time only enters the metadata sidecar.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::dcrab::{optimize_with, DcrabParams, DcrabPulse, OptimizationTrace, StoppingReason};
use crate::dynamics::{convergence_check, ControlProtocol, ProtocolKind, TimeGrid};
use crate::spin_model::SpinChainConfig;
use crate::sweep::{try_map_points, Execution};
use crate::thermo::{IrreversibilityReport, ProcessEvaluator, Quantifier};

/// Tag written into every pulse file.
pub const PULSE_FORMAT: &str = "ising-qoc-pulse/1";

/// CSV header shared by all sweep experiments.
pub const RESULT_HEADER: [&str; 10] = [
    "f0",
    "fT",
    "protocol",
    "avg_work",
    "delta_f",
    "s_irr",
    "w_fric",
    "s_qvol",
    "n_evaluations",
    "stopping_reason",
];

pub const TRACE_HEADER: [&str; 10] = [
    "nu",
    "superiteration",
    "cost",
    "s_irr",
    "w_fric",
    "s_qvol",
    "best_cost",
    "best_s_irr",
    "best_w_fric",
    "best_s_qvol",
];

pub const CONVERGENCE_HEADER: [&str; 6] = [
    "f0",
    "fT",
    "protocol",
    "n_steps",
    "n_steps_doubled",
    "max_abs_difference",
];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
}

impl ExperimentError {
    /// Process exit status: 1 for configuration and I/O problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Io { .. } => 1,
            ExperimentError::Numerical(_) => 2,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type ExperimentResult<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    QuenchSweep,
    RampSweep,
    OptimizeSweep,
    ConvergenceTrace,
    Transfer,
    WorkCompare,
    /// Step-doubling check of the linear-ramp propagation.
    Convergence,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::QuenchSweep => "quench_sweep",
            ExperimentKind::RampSweep => "ramp_sweep",
            ExperimentKind::OptimizeSweep => "optimize_sweep",
            ExperimentKind::ConvergenceTrace => "convergence_trace",
            ExperimentKind::Transfer => "transfer",
            ExperimentKind::WorkCompare => "work_compare",
            ExperimentKind::Convergence => "convergence",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parses `"pi"`, `"pi/4"`, `"16pi"`, `"2*pi/3"` or a plain number.
pub fn parse_duration(text: &str) -> Result<f64, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    let value = match lower.find("pi") {
        None => lower
            .parse::<f64>()
            .map_err(|e| format!("duration {text:?}: {e}"))?,
        Some(at) => {
            let head = lower[..at].trim_end_matches('*');
            let tail = &lower[at + 2..];
            let factor = if head.is_empty() {
                1.0
            } else {
                head.parse::<f64>()
                    .map_err(|e| format!("duration {text:?}: {e}"))?
            };
            let divisor = match tail.strip_prefix('/') {
                Some(d) => d
                    .parse::<f64>()
                    .map_err(|e| format!("duration {text:?}: {e}"))?,
                None if tail.is_empty() => 1.0,
                None => return Err(format!("duration {text:?}: unexpected {tail:?}")),
            };
            factor * std::f64::consts::PI / divisor
        }
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("duration {text:?} must be positive and finite"));
    }
    Ok(value)
}

fn deserialize_duration<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Spec {
        Number(f64),
        Text(String),
    }
    match Spec::deserialize(deserializer)? {
        Spec::Number(x) => Ok(x),
        Spec::Text(s) => parse_duration(&s).map_err(serde::de::Error::custom),
    }
}

/// Flat TOML experiment description. Every key is optional; missing keys
/// take the defaults listed on [`ExperimentConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_spins: usize,
    pub beta: f64,
    pub f0_start: f64,
    pub f0_stop: f64,
    pub f0_step: f64,
    /// `f_T = f₀ + delta_f`.
    pub delta_f: f64,
    #[serde(deserialize_with = "deserialize_duration")]
    pub duration: f64,
    /// Time steps; defaults to 1000 per `π` of duration, at least 1000.
    pub n_steps: Option<usize>,
    pub eta_error: f64,
    pub eta_change: f64,
    pub n_frequencies: usize,
    /// `T ω_max / 2π`.
    pub bandwidth_periods: f64,
    pub max_superiterations: usize,
    /// Nelder–Mead budget per super-iteration; defaults to `200 N_c`.
    pub max_evaluations: Option<usize>,
    pub simplex_step: f64,
    pub simplex_tolerance: f64,
    pub seed: u64,
    pub objective: Quantifier,
    /// Pulse files read by the transfer experiment.
    pub pulses: Vec<PathBuf>,
    /// Directory receiving one pulse file per optimized point.
    pub pulse_dir: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::QuenchSweep,
            n_spins: 4,
            beta: 50.0,
            f0_start: 0.1,
            f0_stop: 2.0,
            f0_step: 0.05,
            delta_f: 0.1,
            duration: std::f64::consts::FRAC_PI_4,
            n_steps: None,
            eta_error: 1e-4,
            eta_change: 1e-4,
            n_frequencies: 4,
            bandwidth_periods: crate::dcrab::DEFAULT_BANDWIDTH_PERIODS,
            max_superiterations: 10,
            max_evaluations: None,
            simplex_step: 0.1,
            simplex_tolerance: 1e-7,
            seed: 0,
            objective: Quantifier::SIrr,
            pulses: Vec::new(),
            pulse_dir: None,
            output: None,
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = ExperimentError;

    fn from_str(text: &str) -> ExperimentResult<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> ExperimentResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let mut cfg: ExperimentConfig = text.parse()?;
        // relative pulse paths are resolved against the config file
        let base = path.parent().unwrap_or(Path::new(""));
        for p in cfg
            .pulses
            .iter_mut()
            .chain(cfg.pulse_dir.iter_mut())
            .chain(cfg.output.iter_mut())
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> ExperimentResult<()> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        self.chain()?;
        if !(self.f0_step.is_finite() && self.f0_step > 0.0) {
            return bad(format!("f0_step = {} must be positive", self.f0_step));
        }
        if !(self.f0_start.is_finite() && self.f0_stop.is_finite() && self.f0_stop >= self.f0_start)
        {
            return bad(format!(
                "empty f0 range [{}, {}]",
                self.f0_start, self.f0_stop
            ));
        }
        if !self.delta_f.is_finite() {
            return bad("delta_f must be finite".into());
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration = {} must be positive", self.duration));
        }
        if self.n_steps == Some(0) {
            return bad("n_steps must be positive".into());
        }
        if !(self.bandwidth_periods.is_finite() && self.bandwidth_periods > 0.0) {
            return bad("bandwidth_periods must be positive".into());
        }
        self.dcrab_params()
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn chain(&self) -> ExperimentResult<SpinChainConfig> {
        SpinChainConfig::new(self.n_spins, self.beta)
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }

    /// `f0_start, f0_start + step, …` up to `f0_stop` inclusive.
    pub fn f0_values(&self) -> Vec<f64> {
        let span = (self.f0_stop - self.f0_start) / self.f0_step;
        let count = (span + 1e-9).floor() as usize + 1;
        // snapped to 1e-12 so decimal grids print as typed
        (0..count)
            .map(|i| ((self.f0_start + i as f64 * self.f0_step) * 1e12).round() / 1e12)
            .collect()
    }

    pub fn steps_for(&self, duration: f64) -> usize {
        self.n_steps
            .unwrap_or_else(|| TimeGrid::default_steps(duration))
    }

    pub fn grid(&self) -> ExperimentResult<TimeGrid> {
        Ok(TimeGrid::new(self.duration, self.steps_for(self.duration))?)
    }

    pub fn dcrab_params(&self) -> DcrabParams {
        let mut params = DcrabParams::for_duration(self.duration).with_seed(self.seed);
        params.n_frequencies = self.n_frequencies;
        params.omega_max = 2.0 * std::f64::consts::PI * self.bandwidth_periods / self.duration;
        params.eta_error = self.eta_error;
        params.eta_change = self.eta_change;
        params.max_superiterations = self.max_superiterations;
        params.simplex.initial_step = self.simplex_step;
        params.simplex.tolerance = self.simplex_tolerance;
        params.simplex.max_evaluations = self.max_evaluations.unwrap_or(200 * self.n_frequencies);
        params
    }
}

/// One CSV line of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub f0: f64,
    pub f_final: f64,
    pub protocol: &'static str,
    pub report: IrreversibilityReport,
    pub n_evaluations: Option<usize>,
    pub stopping_reason: Option<StoppingReason>,
}

impl ResultRow {
    fn plain(
        f0: f64,
        f_final: f64,
        protocol: &ControlProtocol,
        report: IrreversibilityReport,
    ) -> Self {
        Self {
            f0,
            f_final,
            protocol: protocol.kind().as_str(),
            report,
            n_evaluations: None,
            stopping_reason: None,
        }
    }

    fn record(&self) -> Vec<String> {
        let r = &self.report;
        vec![
            fmt_float(self.f0),
            fmt_float(self.f_final),
            self.protocol.to_string(),
            fmt_float(r.avg_work),
            fmt_float(r.delta_f),
            fmt_float(r.s_irr),
            fmt_float(r.w_fric),
            fmt_float(r.s_qvol),
            self.n_evaluations
                .map(|n| n.to_string())
                .unwrap_or_default(),
            self.stopping_reason
                .map(|s| s.as_str().to_string())
                .unwrap_or_default(),
        ]
    }
}

/// 17 significant digits; round-trips every `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_csv<R: AsRef<[u8]>>(header: &[&str], rows: impl IntoIterator<Item = Vec<R>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("writing to memory");
    for row in rows {
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flushing to memory")).expect("CSV is UTF-8")
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    to_csv(&RESULT_HEADER, rows.iter().map(ResultRow::record))
}

/// Stored optimized pulse with the system it was optimized for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseFile {
    pub format: String,
    pub n_spins: usize,
    pub beta: f64,
    pub seed: u64,
    pub objective: Quantifier,
    pub pulse: DcrabPulse,
}

impl PulseFile {
    pub fn new(
        chain: &SpinChainConfig,
        seed: u64,
        objective: Quantifier,
        pulse: DcrabPulse,
    ) -> Self {
        Self {
            format: PULSE_FORMAT.to_string(),
            n_spins: chain.n_spins(),
            beta: chain.beta(),
            seed,
            objective,
            pulse,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pulse files serialize")
    }

    pub fn from_json(text: &str) -> ExperimentResult<Self> {
        let file: PulseFile = serde_json::from_str(text)
            .map_err(|e| ExperimentError::Config(format!("malformed pulse file: {e}")))?;
        if file.format != PULSE_FORMAT {
            return Err(ExperimentError::Config(format!(
                "unsupported pulse format {:?}, expected {PULSE_FORMAT:?}",
                file.format
            )));
        }
        let p = &file.pulse;
        if !(p.duration().is_finite()
            && p.duration() > 0.0
            && p.f0().is_finite()
            && p.f_final().is_finite())
        {
            return Err(ExperimentError::Config(
                "pulse file has invalid endpoints or duration".into(),
            ));
        }
        DcrabPulse::from_layers(p.f0(), p.f_final(), p.duration(), p.layers().to_vec())
            .map_err(|e| ExperimentError::Config(format!("malformed pulse file: {e}")))?;
        Ok(file)
    }

    pub fn read(path: &Path) -> ExperimentResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            ExperimentError::Config(msg) => {
                ExperimentError::Config(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    /// File name used for point `index` of an optimize sweep.
    pub fn file_name(index: usize, f0: f64) -> String {
        format!("pulse_{index:03}_f0_{f0:.4}.json")
    }
}

/// Quench, ramp and optimized runs at one sweep point.
#[derive(Debug, Clone)]
pub struct OptimizedPoint {
    pub f0: f64,
    pub f_final: f64,
    pub quench: IrreversibilityReport,
    pub ramp: IrreversibilityReport,
    pub optimized: IrreversibilityReport,
    pub pulse: DcrabPulse,
    pub trace: OptimizationTrace,
}

impl OptimizedPoint {
    fn rows(&self, include_ramp: bool) -> Vec<ResultRow> {
        let row = |kind: ProtocolKind, report| ResultRow {
            f0: self.f0,
            f_final: self.f_final,
            protocol: kind.as_str(),
            report,
            n_evaluations: None,
            stopping_reason: None,
        };
        let mut rows = vec![row(ProtocolKind::SuddenQuench, self.quench)];
        if include_ramp {
            rows.push(row(ProtocolKind::LinearRamp, self.ramp));
        }
        rows.push(ResultRow {
            n_evaluations: Some(self.trace.n_evaluations()),
            stopping_reason: Some(self.trace.stopping_reason),
            ..row(ProtocolKind::DcrabPulse, self.optimized)
        });
        rows
    }
}

/// Evaluates one protocol family over the configured `f₀` grid.
pub fn protocol_sweep(
    cfg: &ExperimentConfig,
    execution: Execution,
    make: impl Fn(f64, f64, f64) -> ControlProtocol + Sync + Send,
) -> ExperimentResult<Vec<ResultRow>> {
    let chain = cfg.chain()?;
    let grid = cfg.grid()?;
    try_map_points(execution, &cfg.f0_values(), |&f0| {
        let f_final = f0 + cfg.delta_f;
        let protocol = make(f0, f_final, cfg.duration);
        let report = ProcessEvaluator::new(&chain, f0, f_final)?.report(&protocol, &grid)?;
        Ok(ResultRow::plain(f0, f_final, &protocol, report))
    })
}

/// Optimizes one point, seeded with `cfg.seed`.
pub fn optimize_point(cfg: &ExperimentConfig, f0: f64) -> ExperimentResult<OptimizedPoint> {
    let chain = cfg.chain()?;
    let grid = cfg.grid()?;
    let f_final = f0 + cfg.delta_f;
    let evaluator = ProcessEvaluator::new(&chain, f0, f_final)?;
    let quench = evaluator.report(
        &ControlProtocol::sudden_quench(f0, f_final, cfg.duration),
        &grid,
    )?;
    let ramp = evaluator.report(
        &ControlProtocol::linear_ramp(f0, f_final, cfg.duration),
        &grid,
    )?;
    let (protocol, trace) = optimize_with(&evaluator, &grid, &cfg.dcrab_params(), cfg.objective)?;
    let optimized = evaluator.report(&protocol, &grid)?;
    let ControlProtocol::Dcrab(pulse) = protocol else {
        unreachable!("the optimizer returns a dCRAB pulse")
    };
    Ok(OptimizedPoint {
        f0,
        f_final,
        quench,
        ramp,
        optimized,
        pulse,
        trace,
    })
}

/// Optimizes every point of the `f₀` grid; each point uses the same seed so
/// a single-point rerun reproduces its row.
pub fn optimize_points(
    cfg: &ExperimentConfig,
    execution: Execution,
) -> ExperimentResult<Vec<OptimizedPoint>> {
    cfg.validate()?;
    try_map_points(execution, &cfg.f0_values(), |&f0| optimize_point(cfg, f0))
}

/// Applies stored pulses unchanged to the chain described by `cfg`: for
/// each pulse, quench, ramp and transferred-pulse rows at the target size.
pub fn transfer_rows(
    cfg: &ExperimentConfig,
    pulses: &[PulseFile],
    execution: Execution,
) -> ExperimentResult<Vec<ResultRow>> {
    let chain = cfg.chain()?;
    let nested = try_map_points(
        execution,
        pulses,
        |file| -> ExperimentResult<Vec<ResultRow>> {
            let pulse = &file.pulse;
            let (f0, f_final, duration) = (pulse.f0(), pulse.f_final(), pulse.duration());
            let grid = TimeGrid::new(duration, cfg.steps_for(duration))?;
            let evaluator = ProcessEvaluator::new(&chain, f0, f_final)?;
            [
                ControlProtocol::sudden_quench(f0, f_final, duration),
                ControlProtocol::linear_ramp(f0, f_final, duration),
                ControlProtocol::Dcrab(pulse.clone()),
            ]
            .iter()
            .map(|p| {
                Ok(ResultRow::plain(
                    f0,
                    f_final,
                    p,
                    evaluator.report(p, &grid)?,
                ))
            })
            .collect()
        },
    )?;
    Ok(nested.into_iter().flatten().collect())
}

/// Per-evaluation CSV of one optimization trace.
pub fn trace_to_csv(trace: &OptimizationTrace) -> String {
    to_csv(
        &TRACE_HEADER,
        trace.evaluations.iter().map(|e| {
            vec![
                e.nu.to_string(),
                e.superiteration.to_string(),
                fmt_float(e.cost),
                fmt_float(e.report.s_irr),
                fmt_float(e.report.w_fric),
                fmt_float(e.report.s_qvol),
                fmt_float(e.best_cost),
                fmt_float(e.best_report.s_irr),
                fmt_float(e.best_report.w_fric),
                fmt_float(e.best_report.s_qvol),
            ]
        }),
    )
}

/// Everything an experiment produces; written by [`ExperimentOutput::write`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub csv: String,
    /// `(file name, JSON)` pairs destined for `pulse_dir`.
    pub pulses: Vec<(String, String)>,
    pub metadata: serde_json::Value,
}

impl ExperimentOutput {
    /// Writes the CSV to `csv_path` (standard output when `None`), the
    /// sidecar next to it and the pulse files into `pulse_dir`.
    pub fn write(&self, csv_path: Option<&Path>, pulse_dir: Option<&Path>) -> ExperimentResult<()> {
        match csv_path {
            Some(path) => {
                std::fs::write(path, &self.csv).map_err(|e| ExperimentError::io(path, e))?;
                let sidecar = sidecar_path(path);
                let json =
                    serde_json::to_string_pretty(&self.metadata).expect("metadata serializes");
                std::fs::write(&sidecar, json + "\n")
                    .map_err(|e| ExperimentError::io(&sidecar, e))?;
            }
            None => print!("{}", self.csv),
        }
        if !self.pulses.is_empty() {
            if let Some(dir) = pulse_dir {
                std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
                for (name, json) in &self.pulses {
                    let path = dir.join(name);
                    std::fs::write(&path, json).map_err(|e| ExperimentError::io(&path, e))?;
                }
            }
        }
        Ok(())
    }
}

/// `<out>.meta.json` next to the CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Expands directories to the `*.json` files they contain, sorted by name.
pub fn collect_pulse_paths(paths: &[PathBuf]) -> ExperimentResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| ExperimentError::io(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(path.clone());
        }
    }
    Ok(out)
}

/// Runs the experiment selected by `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig, execution: Execution) -> ExperimentResult<ExperimentOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let mut pulses = Vec::new();
    let mut stopping: Vec<StoppingReason> = Vec::new();
    let csv = match cfg.experiment {
        ExperimentKind::QuenchSweep => rows_to_csv(&protocol_sweep(
            cfg,
            execution,
            ControlProtocol::sudden_quench,
        )?),
        ExperimentKind::RampSweep => rows_to_csv(&protocol_sweep(
            cfg,
            execution,
            ControlProtocol::linear_ramp,
        )?),
        ExperimentKind::OptimizeSweep | ExperimentKind::WorkCompare => {
            let points = optimize_points(cfg, execution)?;
            let include_ramp = cfg.experiment == ExperimentKind::OptimizeSweep;
            let chain = cfg.chain()?;
            let mut rows = Vec::new();
            for (i, point) in points.iter().enumerate() {
                rows.extend(point.rows(include_ramp));
                stopping.push(point.trace.stopping_reason);
                let file = PulseFile::new(&chain, cfg.seed, cfg.objective, point.pulse.clone());
                pulses.push((PulseFile::file_name(i, point.f0), file.to_json() + "\n"));
            }
            rows_to_csv(&rows)
        }
        ExperimentKind::ConvergenceTrace => {
            let point = optimize_point(cfg, cfg.f0_start)?;
            stopping.push(point.trace.stopping_reason);
            let file = PulseFile::new(&cfg.chain()?, cfg.seed, cfg.objective, point.pulse.clone());
            pulses.push((PulseFile::file_name(0, point.f0), file.to_json() + "\n"));
            trace_to_csv(&point.trace)
        }
        ExperimentKind::Transfer => {
            let paths = collect_pulse_paths(&cfg.pulses)?;
            if paths.is_empty() {
                return Err(ExperimentError::Config(
                    "transfer needs at least one pulse file".into(),
                ));
            }
            let files = paths
                .iter()
                .map(|p| PulseFile::read(p))
                .collect::<ExperimentResult<Vec<_>>>()?;
            rows_to_csv(&transfer_rows(cfg, &files, execution)?)
        }
        ExperimentKind::Convergence => {
            let chain = cfg.chain()?;
            let grid = cfg.grid()?;
            let rows = try_map_points(
                execution,
                &cfg.f0_values(),
                |&f0| -> ExperimentResult<Vec<String>> {
                    let f_final = f0 + cfg.delta_f;
                    let protocol = ControlProtocol::linear_ramp(f0, f_final, cfg.duration);
                    let evaluator = ProcessEvaluator::new(&chain, f0, f_final)?;
                    let report =
                        convergence_check(&chain, &protocol, evaluator.initial_state(), &grid)?;
                    Ok(vec![
                        fmt_float(f0),
                        fmt_float(f_final),
                        protocol.kind().as_str().to_string(),
                        report.n_steps.to_string(),
                        report.n_steps_doubled.to_string(),
                        fmt_float(report.max_abs_difference),
                    ])
                },
            )?;
            to_csv(&CONVERGENCE_HEADER, rows)
        }
    };
    let metadata = serde_json::json!({
        "experiment": cfg.experiment.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": cfg,
        "n_steps": cfg.steps_for(cfg.duration),
        "n_points": cfg.f0_values().len(),
        "stopping_reasons": stopping.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    Ok(ExperimentOutput {
        csv,
        pulses,
        metadata,
    })
}
