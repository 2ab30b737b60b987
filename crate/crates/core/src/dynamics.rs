//! Control protocols and unitary propagation of the density matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dcrab::DcrabPulse;
use crate::spectral::{hermitian_part, DensityMatrix};
use crate::spin_model::{IsingTerms, SpinChainConfig};
use crate::symmetry::{self, Block};
use crate::{CMatrix, Error, Result, C64};

/// Trace drift beyond which a propagated state is rejected.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    SuddenQuench,
    LinearRamp,
    DcrabPulse,
}

impl ProtocolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolKind::SuddenQuench => "sudden_quench",
            ProtocolKind::LinearRamp => "linear_ramp",
            ProtocolKind::DcrabPulse => "dcrab_pulse",
        }
    }
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Time-dependent control `f_t` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlProtocol {
    /// `f_t = f₀` for `t ≤ T`, `f_T` afterwards.
    SuddenQuench {
        f0: f64,
        f_final: f64,
        duration: f64,
    },
    /// `f_t = f₀ + (f_T - f₀) t / T`.
    LinearRamp {
        f0: f64,
        f_final: f64,
        duration: f64,
    },
    Dcrab(DcrabPulse),
}

impl ControlProtocol {
    pub fn sudden_quench(f0: f64, f_final: f64, duration: f64) -> Self {
        Self::SuddenQuench {
            f0,
            f_final,
            duration,
        }
    }

    pub fn linear_ramp(f0: f64, f_final: f64, duration: f64) -> Self {
        Self::LinearRamp {
            f0,
            f_final,
            duration,
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        match self {
            Self::SuddenQuench { .. } => ProtocolKind::SuddenQuench,
            Self::LinearRamp { .. } => ProtocolKind::LinearRamp,
            Self::Dcrab(_) => ProtocolKind::DcrabPulse,
        }
    }

    pub fn f0(&self) -> f64 {
        match self {
            Self::SuddenQuench { f0, .. } | Self::LinearRamp { f0, .. } => *f0,
            Self::Dcrab(p) => p.f0(),
        }
    }

    pub fn f_final(&self) -> f64 {
        match self {
            Self::SuddenQuench { f_final, .. } | Self::LinearRamp { f_final, .. } => *f_final,
            Self::Dcrab(p) => p.f_final(),
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Self::SuddenQuench { duration, .. } | Self::LinearRamp { duration, .. } => *duration,
            Self::Dcrab(p) => p.duration(),
        }
    }

    /// Control value at time `t ≥ 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.value_at(t))
    }

    pub(crate) fn value_at(&self, t: f64) -> f64 {
        match self {
            Self::SuddenQuench {
                f0,
                f_final,
                duration,
            } => {
                if t <= *duration {
                    *f0
                } else {
                    *f_final
                }
            }
            Self::LinearRamp {
                f0,
                f_final,
                duration,
            } => ramp_value(*f0, *f_final, *duration, t),
            Self::Dcrab(p) => p.value_at(t),
        }
    }
}

/// `(1 - s) f₀ + s f_T` with `s = t / T` clamped to `[0, 1]`; exact at both ends.
pub fn ramp_value(f0: f64, f_final: f64, duration: f64, t: f64) -> f64 {
    let s = (t / duration).clamp(0.0, 1.0);
    (1.0 - s) * f0 + s * f_final
}

/// `sin(π t / T)` on `[0, T]`, evaluated from the nearer endpoint so that it
/// vanishes exactly at `t = 0` and `t = T`; zero outside.
pub fn boundary_window(t: f64, duration: f64) -> f64 {
    if t <= 0.0 || t >= duration {
        return 0.0;
    }
    (PI * t.min(duration - t) / duration).sin()
}

/// Uniform piecewise-constant grid on `[start, start + duration]`; every
/// step uses the Hamiltonian at its midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start: f64,
    duration: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(duration: f64, n_steps: usize) -> Result<Self> {
        Self::segment(0.0, duration, n_steps)
    }

    pub fn segment(start: f64, duration: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be at least 1".into()));
        }
        if !(duration > 0.0 && duration.is_finite()) || !(start >= 0.0 && start.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "start {start}, duration {duration}"
            )));
        }
        Ok(Self {
            start,
            duration,
            n_steps,
        })
    }

    /// 1000 steps up to `T = π`, proportionally more beyond.
    pub fn default_steps(duration: f64) -> usize {
        if duration <= PI {
            1000
        } else {
            (1000.0 * duration / PI).ceil() as usize
        }
    }

    pub fn with_default_steps(duration: f64) -> Result<Self> {
        Self::new(duration, Self::default_steps(duration))
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.duration / self.n_steps as f64
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        self.start + (k as f64 + 0.5) * self.step()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step()
    }

    pub fn doubled(&self) -> Self {
        Self {
            n_steps: 2 * self.n_steps,
            ..*self
        }
    }
}

/// Complex matrix stored as separate real and imaginary parts so products
/// run on the real matrix kernels.
#[derive(Debug, Clone)]
struct SplitMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl SplitMatrix {
    fn identity(dim: usize) -> Self {
        Self {
            re: DMatrix::identity(dim, dim),
            im: DMatrix::zeros(dim, dim),
        }
    }

    /// `self ← a · self`.
    fn left_multiply(&mut self, a: &SplitMatrix, scratch: &mut DMatrix<f64>) {
        let mut re = &a.re * &self.re;
        re.gemm(-1.0, &a.im, &self.im, 1.0);
        scratch.gemm(1.0, &a.re, &self.im, 0.0);
        scratch.gemm(1.0, &a.im, &self.re, 1.0);
        std::mem::swap(&mut self.im, scratch);
        self.re = re;
    }

    fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.re.nrows(), self.re.ncols(), |i, j| {
            C64::new(self.re[(i, j)], self.im[(i, j)])
        })
    }
}

/// Stepper for the Ising ring: `U = exp(-i H(f) Δt)` through the exact
/// eigendecomposition of the real symmetric `H(f)`, taken block by block in
/// a fixed symmetry-adapted basis.
#[derive(Debug, Clone)]
pub struct Propagator {
    terms: IsingTerms,
    blocks: Vec<Block>,
}

impl Propagator {
    pub fn new(config: &SpinChainConfig) -> Self {
        let terms = IsingTerms::new(config);
        let blocks = symmetry::blocks(&terms);
        Self { terms, blocks }
    }

    pub fn terms(&self) -> &IsingTerms {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms.dim()
    }

    /// Sizes of the invariant blocks used for stepping.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.basis.ncols()).collect()
    }

    fn split_step(block: &Block, f: f64, dt: f64) -> Result<SplitMatrix> {
        let h = block.hamiltonian(f);
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
            .ok_or_else(|| Error::Eigensolver(format!("step Hamiltonian at f = {f}")))?;
        let v = &eig.eigenvectors;
        let mut v_cos = v.clone();
        let mut v_sin = v.clone();
        for (k, &e) in eig.eigenvalues.iter().enumerate() {
            let (s, c) = (e * dt).sin_cos();
            v_cos.column_mut(k).scale_mut(c);
            v_sin.column_mut(k).scale_mut(-s);
        }
        Ok(SplitMatrix {
            re: v_cos * v.transpose(),
            im: v_sin * v.transpose(),
        })
    }

    /// Maps block-diagonal factors back to the computational basis.
    fn assemble(&self, parts: &[SplitMatrix]) -> CMatrix {
        let dim = self.dim();
        let mut re = DMatrix::zeros(dim, dim);
        let mut im = DMatrix::zeros(dim, dim);
        for (block, part) in self.blocks.iter().zip(parts) {
            let q = &block.basis;
            re += q * &part.re * q.transpose();
            im += q * &part.im * q.transpose();
        }
        SplitMatrix { re, im }.to_complex()
    }

    /// Single step `exp(-i H(f) Δt)`.
    pub fn step_unitary(&self, f: f64, dt: f64) -> Result<CMatrix> {
        let parts = self
            .blocks
            .iter()
            .map(|b| Self::split_step(b, f, dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.assemble(&parts))
    }

    /// Time-ordered product of the midpoint step propagators over `grid`.
    pub fn total_unitary(&self, protocol: &ControlProtocol, grid: &TimeGrid) -> Result<CMatrix> {
        let mut noop = |_: usize, _: &[SplitMatrix]| {};
        let parts = self.accumulate(protocol, grid, &mut noop)?;
        Ok(self.assemble(&parts))
    }

    fn accumulate(
        &self,
        protocol: &ControlProtocol,
        grid: &TimeGrid,
        on_step: &mut dyn FnMut(usize, &[SplitMatrix]),
    ) -> Result<Vec<SplitMatrix>> {
        let dt = grid.step();
        let mut totals: Vec<SplitMatrix> = self
            .blocks
            .iter()
            .map(|b| SplitMatrix::identity(b.basis.ncols()))
            .collect();
        let mut scratch: Vec<DMatrix<f64>> = self
            .blocks
            .iter()
            .map(|b| DMatrix::zeros(b.basis.ncols(), b.basis.ncols()))
            .collect();
        for k in 0..grid.n_steps() {
            let f = protocol.value_at(grid.midpoint(k));
            for ((block, total), scratch) in self.blocks.iter().zip(&mut totals).zip(&mut scratch) {
                let step = Self::split_step(block, f, dt)?;
                total.left_multiply(&step, scratch);
            }
            on_step(k + 1, &totals);
        }
        Ok(totals)
    }

    pub fn propagate(
        &self,
        protocol: &ControlProtocol,
        grid: &TimeGrid,
        rho0: &DensityMatrix,
        options: PropagationOptions,
    ) -> Result<PropagationResult> {
        if rho0.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho0.dim(),
            });
        }
        let mut trajectory = Vec::new();
        if let Some(every) = options.sample_every {
            trajectory.push(TrajectorySample {
                time: grid.start(),
                control: protocol.value_at(grid.start()),
                rho: rho0.clone(),
            });
            let every = every.max(1);
            let mut sample = |k: usize, parts: &[SplitMatrix]| {
                if k.is_multiple_of(every) || k == grid.n_steps() {
                    let t = grid.time(k);
                    trajectory.push(TrajectorySample {
                        time: t,
                        control: protocol.value_at(t),
                        rho: conjugate(&self.assemble(parts), rho0),
                    });
                }
            };
            let parts = self.accumulate(protocol, grid, &mut sample)?;
            return finish(self.assemble(&parts), rho0, options, trajectory);
        }
        let total = self.total_unitary(protocol, grid)?;
        finish(total, rho0, options, trajectory)
    }
}

fn conjugate(u: &CMatrix, rho: &DensityMatrix) -> DensityMatrix {
    let m = u * rho.matrix() * u.adjoint();
    DensityMatrix::from_matrix_unchecked(hermitian_part(&m))
}

fn finish(
    unitary: CMatrix,
    rho0: &DensityMatrix,
    options: PropagationOptions,
    trajectory: Vec<TrajectorySample>,
) -> Result<PropagationResult> {
    let rho_final = conjugate(&unitary, rho0);
    let drift = (rho_final.trace() - C64::new(1.0, 0.0)).norm();
    if drift.is_nan() || drift > MAX_TRACE_DRIFT {
        return Err(Error::NonPhysicalState { drift });
    }
    Ok(PropagationResult {
        rho_final,
        unitary: options.keep_unitary.then_some(unitary),
        trajectory,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Return the accumulated propagator `U_T`.
    pub keep_unitary: bool,
    /// Record `(t, f_t, ρ_t)` every this many steps.
    pub sample_every: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub time: f64,
    pub control: f64,
    pub rho: DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub rho_final: DensityMatrix,
    pub unitary: Option<CMatrix>,
    pub trajectory: Vec<TrajectorySample>,
}

/// `ρ(T) = U_T ρ(0) U_T†` for `protocol` sampled on `grid`.
pub fn propagate(
    config: &SpinChainConfig,
    protocol: &ControlProtocol,
    grid: &TimeGrid,
    rho0: &DensityMatrix,
) -> Result<PropagationResult> {
    Propagator::new(config).propagate(protocol, grid, rho0, PropagationOptions::default())
}

/// Self-convergence of `ρ(T)` under step doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub n_steps: usize,
    pub n_steps_doubled: usize,
    pub max_abs_difference: f64,
}

pub fn convergence_check(
    config: &SpinChainConfig,
    protocol: &ControlProtocol,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<ConvergenceReport> {
    let propagator = Propagator::new(config);
    let coarse = propagator.propagate(protocol, grid, rho0, PropagationOptions::default())?;
    let fine_grid = grid.doubled();
    let fine = propagator.propagate(protocol, &fine_grid, rho0, PropagationOptions::default())?;
    let max_abs_difference = (coarse.rho_final.matrix() - fine.rho_final.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        n_steps: grid.n_steps(),
        n_steps_doubled: fine_grid.n_steps(),
        max_abs_difference,
    })
}
