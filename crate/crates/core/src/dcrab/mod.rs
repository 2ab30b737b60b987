//! dCRAB optimal control.
//!
//! Each super-iteration draws `N_c` random frequencies and sine/cosine
//! phases, optimizes their coefficients with Nelder–Mead starting from zero,
//! and folds the optimized correction into the guess for the next round.
//! The first guess is the linear ramp. Corrections are multiplied by the
//! window `sin(π t / T)` so every candidate pulse keeps its endpoints.
//!
//! Random draws use ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`):
//! for every basis element one `f64` uniform on `[0, ω_max]` for the
//! frequency, then one fair Bernoulli draw selecting the phase `π/2`.

mod nelder_mead;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use nelder_mead::{nelder_mead, NelderMeadParams, NelderMeadResult};

use crate::dynamics::{boundary_window, ramp_value, ControlProtocol, TimeGrid};
use crate::spin_model::SpinChainConfig;
use crate::thermo::{IrreversibilityReport, ProcessEvaluator, Quantifier};
use crate::{Error, Result};

/// Default `T ω_max / 2π`.
pub const DEFAULT_BANDWIDTH_PERIODS: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcrabParams {
    pub n_frequencies: usize,
    /// Angular frequency cap.
    pub omega_max: f64,
    pub eta_error: f64,
    pub eta_change: f64,
    pub max_superiterations: usize,
    pub seed: u64,
    pub simplex: NelderMeadParams,
    pub duration: f64,
}

impl DcrabParams {
    /// Defaults for a pulse of length `duration`: `N_c = 4`,
    /// `T ω_max / 2π = 20`, both thresholds `1e-5`, and a Nelder–Mead budget
    /// of `200 N_c` evaluations per super-iteration.
    pub fn for_duration(duration: f64) -> Self {
        let n_frequencies = 4;
        Self {
            n_frequencies,
            omega_max: 2.0 * PI * DEFAULT_BANDWIDTH_PERIODS / duration,
            eta_error: 1e-5,
            eta_change: 1e-5,
            max_superiterations: 10,
            seed: 0,
            simplex: NelderMeadParams {
                max_evaluations: 200 * n_frequencies,
                ..NelderMeadParams::default()
            },
            duration,
        }
    }

    /// Sets both thresholds.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta_error = eta;
        self.eta_change = eta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.n_frequencies == 0 {
            return bad("n_frequencies must be at least 1");
        }
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return bad("omega_max must be positive");
        }
        if !(self.eta_error > 0.0 && self.eta_change > 0.0) {
            return bad("thresholds must be positive");
        }
        if self.max_superiterations == 0 {
            return bad("max_superiterations must be at least 1");
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be positive");
        }
        self.simplex.validate()
    }
}

/// Random frequencies and phases of one super-iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseBasis {
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
}

impl PulseBasis {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

pub fn draw_basis<R: Rng + ?Sized>(params: &DcrabParams, rng: &mut R) -> PulseBasis {
    let mut frequencies = Vec::with_capacity(params.n_frequencies);
    let mut phases = Vec::with_capacity(params.n_frequencies);
    for _ in 0..params.n_frequencies {
        frequencies.push(rng.random_range(0.0..=params.omega_max));
        phases.push(if rng.random_bool(0.5) { PI / 2.0 } else { 0.0 });
    }
    PulseBasis {
        frequencies,
        phases,
    }
}

/// An optimized basis with its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseLayer {
    #[serde(flatten)]
    pub basis: PulseBasis,
    pub coefficients: Vec<f64>,
}

impl PulseLayer {
    fn correction(&self, t: f64) -> f64 {
        self.basis
            .frequencies
            .iter()
            .zip(&self.basis.phases)
            .zip(&self.coefficients)
            .map(|((w, phi), c)| c * (w * t + phi).sin())
            .sum()
    }
}

/// Linear ramp plus the windowed corrections of every completed
/// super-iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcrabPulse {
    f0: f64,
    f_final: f64,
    duration: f64,
    layers: Vec<PulseLayer>,
}

impl DcrabPulse {
    /// The first-round guess `g¹_t = f₀ + (f_T - f₀) t / T`.
    pub fn linear(f0: f64, f_final: f64, duration: f64) -> Self {
        Self {
            f0,
            f_final,
            duration,
            layers: Vec::new(),
        }
    }

    pub fn from_layers(
        f0: f64,
        f_final: f64,
        duration: f64,
        layers: Vec<PulseLayer>,
    ) -> Result<Self> {
        for layer in &layers {
            let n = layer.basis.frequencies.len();
            if layer.basis.phases.len() != n || layer.coefficients.len() != n {
                return Err(Error::CoefficientCount {
                    expected: n,
                    found: layer.coefficients.len().min(layer.basis.phases.len()),
                });
            }
        }
        Ok(Self {
            f0,
            f_final,
            duration,
            layers,
        })
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn f_final(&self) -> f64 {
        self.f_final
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn layers(&self) -> &[PulseLayer] {
        &self.layers
    }

    pub fn n_frequencies(&self) -> usize {
        self.layers.iter().map(|l| l.basis.len()).sum()
    }

    pub(crate) fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.f0;
        }
        if t >= self.duration {
            return self.f_final;
        }
        let correction: f64 = self.layers.iter().map(|l| l.correction(t)).sum();
        ramp_value(self.f0, self.f_final, self.duration, t)
            + boundary_window(t, self.duration) * correction
    }

    /// Same pulse with endpoints moved and the shape kept.
    pub fn with_endpoints(&self, f0: f64, f_final: f64) -> Self {
        Self {
            f0,
            f_final,
            ..self.clone()
        }
    }
}

/// `guess + sin(π t / T) Σ_k c_k sin(ω_k t + φ_k)`.
pub fn assemble_pulse(
    guess: &DcrabPulse,
    basis: &PulseBasis,
    coefficients: &[f64],
) -> Result<ControlProtocol> {
    if coefficients.len() != basis.len() {
        return Err(Error::CoefficientCount {
            expected: basis.len(),
            found: coefficients.len(),
        });
    }
    let mut pulse = guess.clone();
    pulse.layers.push(PulseLayer {
        basis: basis.clone(),
        coefficients: coefficients.to_vec(),
    });
    Ok(ControlProtocol::Dcrab(pulse))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingReason {
    ErrorThreshold,
    MaxSuperiterations,
    ChangeThreshold,
}

impl StoppingReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StoppingReason::ErrorThreshold => "error_threshold",
            StoppingReason::MaxSuperiterations => "max_superiterations",
            StoppingReason::ChangeThreshold => "change_threshold",
        }
    }
}

/// One cost evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    /// 1-based evaluation counter.
    pub nu: usize,
    /// 0 for the evaluation of the initial guess.
    pub superiteration: usize,
    pub cost: f64,
    pub best_cost: f64,
    pub report: IrreversibilityReport,
    /// Quantifiers of the best candidate so far.
    pub best_report: IrreversibilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperIterationRecord {
    pub index: usize,
    pub basis: PulseBasis,
    pub coefficients: Vec<f64>,
    pub best_cost: f64,
    pub evaluations: usize,
    pub simplex_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub objective: Quantifier,
    pub initial_cost: f64,
    pub evaluations: Vec<EvaluationRecord>,
    pub superiterations: Vec<SuperIterationRecord>,
    pub stopping_reason: StoppingReason,
}

impl OptimizationTrace {
    pub fn best_cost(&self) -> f64 {
        self.evaluations
            .last()
            .map(|e| e.best_cost)
            .unwrap_or(self.initial_cost)
    }

    pub fn n_evaluations(&self) -> usize {
        self.evaluations.len()
    }
}

struct Recorder {
    objective: Quantifier,
    records: Vec<EvaluationRecord>,
    best: Option<(f64, IrreversibilityReport)>,
    failure: Option<Error>,
}

impl Recorder {
    fn record(&mut self, superiteration: usize, outcome: Result<IrreversibilityReport>) -> f64 {
        let report = match outcome {
            Ok(r) => r,
            Err(e) => {
                self.failure.get_or_insert(e);
                return f64::INFINITY;
            }
        };
        let cost = report.value(self.objective);
        let improved = match self.best {
            None => true,
            Some((best, _)) => cost < best,
        };
        if improved && !cost.is_nan() {
            self.best = Some((cost, report));
        }
        let (best_cost, best_report) = self.best.unwrap_or((cost, report));
        self.records.push(EvaluationRecord {
            nu: self.records.len() + 1,
            superiteration,
            cost,
            best_cost,
            report,
            best_report,
        });
        cost
    }
}

/// Runs dCRAB for the process `H(f₀) → H(f_T)` over `grid`.
pub fn optimize(
    config: &SpinChainConfig,
    f0: f64,
    f_final: f64,
    grid: &TimeGrid,
    params: &DcrabParams,
    objective: Quantifier,
) -> Result<(ControlProtocol, OptimizationTrace)> {
    let evaluator = ProcessEvaluator::new(config, f0, f_final)?;
    optimize_with(&evaluator, grid, params, objective)
}

/// [`optimize`] with a prepared evaluator.
pub fn optimize_with(
    evaluator: &ProcessEvaluator,
    grid: &TimeGrid,
    params: &DcrabParams,
    objective: Quantifier,
) -> Result<(ControlProtocol, OptimizationTrace)> {
    params.validate()?;
    if (grid.duration() - params.duration).abs() > 1e-12 * params.duration || grid.start() != 0.0 {
        return Err(Error::InvalidParams(format!(
            "grid covers [{}, {}] but the pulse lasts {}",
            grid.start(),
            grid.start() + grid.duration(),
            params.duration
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut guess = DcrabPulse::linear(evaluator.f0(), evaluator.f_final(), params.duration);
    let mut recorder = Recorder {
        objective,
        records: Vec::new(),
        best: None,
        failure: None,
    };

    let initial_cost = recorder.record(
        0,
        evaluator.report(&ControlProtocol::Dcrab(guess.clone()), grid),
    );
    if let Some(e) = recorder.failure.take() {
        return Err(e);
    }
    let mut superiterations = Vec::new();
    let mut previous = initial_cost;
    let mut stopping_reason = StoppingReason::ErrorThreshold;

    if initial_cost >= params.eta_error {
        for j in 1..=params.max_superiterations {
            let basis = draw_basis(params, &mut rng);
            let x0 = vec![0.0; basis.len()];
            let result = nelder_mead(
                |c: &[f64]| {
                    let outcome =
                        assemble_pulse(&guess, &basis, c).and_then(|p| evaluator.report(&p, grid));
                    recorder.record(j, outcome)
                },
                &x0,
                &params.simplex,
            );
            if let Some(e) = recorder.failure.take() {
                return Err(e);
            }
            let ControlProtocol::Dcrab(next) = assemble_pulse(&guess, &basis, &result.x_best)?
            else {
                unreachable!("assemble_pulse always yields a dCRAB pulse")
            };
            guess = next;
            let current = result.cost_best;
            superiterations.push(SuperIterationRecord {
                index: j,
                basis,
                coefficients: result.x_best,
                best_cost: current,
                evaluations: result.evaluations,
                simplex_converged: result.converged,
            });

            if current < params.eta_error {
                stopping_reason = StoppingReason::ErrorThreshold;
                break;
            }
            if j == params.max_superiterations {
                stopping_reason = StoppingReason::MaxSuperiterations;
                break;
            }
            if j >= 2 && (previous == 0.0 || 1.0 - current / previous < params.eta_change) {
                stopping_reason = StoppingReason::ChangeThreshold;
                break;
            }
            previous = current;
        }
    }

    let trace = OptimizationTrace {
        objective,
        initial_cost,
        evaluations: recorder.records,
        superiterations,
        stopping_reason,
    };
    Ok((ControlProtocol::Dcrab(guess), trace))
}
