//! Work statistics and irreversibility quantifiers of a driven process.
//!
//! All quantities refer to a process that starts in the Gibbs state of
//! `H(f₀)` at inverse temperature `β` and ends with the Hamiltonian `H(f_T)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlProtocol, PropagationOptions, Propagator, ProtocolKind, TimeGrid};
use crate::spectral::{
    boltzmann_populations, eigendecompose, free_energy_difference, gibbs_state, trace_of_product,
    DensityMatrix, SpectralDecomposition, DEFAULT_DEGENERACY_TOL,
};
use crate::spin_model::{HermitianOperator, SpinChainConfig};
use crate::{CMatrix, Error, Result, C64};

/// Imaginary parts of traces below this are treated as round-off.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-8;
const UNITARITY_TOL: f64 = 1e-9;
const POPULATION_TOL: f64 = 1e-10;

/// Figure of merit that the optimizer can minimize.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    /// Irreversible entropy `β(⟨W⟩ - ΔF)`.
    #[default]
    SIrr,
    /// Inner friction.
    WFric,
    /// Quantum volume entropy.
    SQvol,
}

impl Quantifier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantifier::SIrr => "s_irr",
            Quantifier::WFric => "w_fric",
            Quantifier::SQvol => "s_qvol",
        }
    }
}

impl std::str::FromStr for Quantifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "s_irr" => Ok(Quantifier::SIrr),
            "w_fric" => Ok(Quantifier::WFric),
            "s_qvol" => Ok(Quantifier::SQvol),
            other => Err(format!("unknown quantifier `{other}`")),
        }
    }
}

/// Work and irreversibility of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrreversibilityReport {
    pub avg_work: f64,
    pub delta_f: f64,
    pub s_irr: f64,
    pub w_fric: f64,
    pub s_qvol: f64,
}

impl IrreversibilityReport {
    pub fn value(&self, quantifier: Quantifier) -> f64 {
        match quantifier {
            Quantifier::SIrr => self.s_irr,
            Quantifier::WFric => self.w_fric,
            Quantifier::SQvol => self.s_qvol,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.avg_work,
            self.delta_f,
            self.s_irr,
            self.w_fric,
            self.s_qvol,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

/// `Tr[H_T ρ_T] - Tr[H₀ ρ₀]`.
pub fn average_work(
    h0: &HermitianOperator,
    h_final: &HermitianOperator,
    rho0: &DensityMatrix,
    rho_final: &DensityMatrix,
) -> Result<f64> {
    let dim = h0.dim();
    for d in [h_final.dim(), rho0.dim(), rho_final.dim()] {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
    }
    Ok(real_trace(h_final.matrix(), rho_final.matrix())? - real_trace(h0.matrix(), rho0.matrix())?)
}

fn real_trace(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let t = trace_of_product(a, b);
    if t.im.abs() > IMAGINARY_RESIDUE_TOL {
        return Err(Error::ImaginaryTrace { residue: t.im });
    }
    Ok(t.re)
}

/// `β(⟨W⟩ - ΔF)`.
pub fn irreversible_entropy(avg_work: f64, delta_f: f64, beta: f64) -> f64 {
    beta * (avg_work - delta_f)
}

/// `Tr[H_T ρ_T] - Σ_m E_m(f_T) P_m(0)`, pairing final levels with initial
/// populations by ascending-energy index.
pub fn inner_friction(
    fin: &SpectralDecomposition,
    rho_final: &DensityMatrix,
    initial_populations: &[f64],
) -> Result<f64> {
    if initial_populations.len() != fin.dim() {
        return Err(Error::PopulationMismatch(format!(
            "{} populations for {} levels",
            initial_populations.len(),
            fin.dim()
        )));
    }
    let total: f64 = initial_populations.iter().sum();
    if (total - 1.0).abs() > POPULATION_TOL {
        return Err(Error::PopulationMismatch(format!(
            "populations sum to {total}"
        )));
    }
    Ok(final_energy(fin, rho_final)? - adiabatic_energy(fin, initial_populations))
}

fn final_energy(fin: &SpectralDecomposition, rho_final: &DensityMatrix) -> Result<f64> {
    let diag = fin.diagonal_elements(rho_final.matrix());
    let energy: C64 = diag
        .iter()
        .zip(fin.eigenvalues())
        .map(|(p, &e)| p * e)
        .sum();
    if energy.im.abs() > IMAGINARY_RESIDUE_TOL {
        return Err(Error::ImaginaryTrace { residue: energy.im });
    }
    Ok(energy.re)
}

fn adiabatic_energy(fin: &SpectralDecomposition, populations: &[f64]) -> f64 {
    fin.eigenvalues()
        .iter()
        .zip(populations)
        .map(|(e, p)| e * p)
        .sum()
}

/// `Tr[ρ log(N̂_d + 1/2)]` where `N̂_d` labels distinct levels `k = 0, 1, …`
/// in ascending order and gives every member of a degenerate group the same `k`.
pub fn volume_entropy_expectation(spec: &SpectralDecomposition, rho: &DensityMatrix) -> f64 {
    spec.diagonal_elements(rho.matrix())
        .iter()
        .zip(spec.level_indices())
        .map(|(p, &k)| p.re * (k as f64 + 0.5).ln())
        .sum()
}

/// `Tr[ρ_T Ŝ_d(T)] - Tr[ρ₀ Ŝ_d(0)]` with `Ŝ_d = log(N̂_d + 1/2)`.
pub fn quantum_volume_entropy(
    initial: &SpectralDecomposition,
    fin: &SpectralDecomposition,
    rho0: &DensityMatrix,
    rho_final: &DensityMatrix,
) -> f64 {
    volume_entropy_expectation(fin, rho_final) - volume_entropy_expectation(initial, rho0)
}

/// Two-point-measurement work statistics.
#[derive(Debug, Clone)]
pub struct WorkDistribution {
    initial_energies: Vec<f64>,
    final_energies: Vec<f64>,
    initial_populations: Vec<f64>,
    /// `p(n|m)` with rows `m` (initial level) and columns `n` (final level).
    transitions: nalgebra::DMatrix<f64>,
}

/// One outcome `(w, p)` of the work distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkOutcome {
    pub work: f64,
    pub probability: f64,
}

impl WorkDistribution {
    pub fn transitions(&self) -> &nalgebra::DMatrix<f64> {
        &self.transitions
    }

    pub fn initial_populations(&self) -> &[f64] {
        &self.initial_populations
    }

    /// All `(E_n(f_T) - E_m(f₀), p_m p(n|m))` pairs, row-major in `(m, n)`.
    pub fn outcomes(&self) -> impl Iterator<Item = WorkOutcome> + '_ {
        let dim = self.initial_energies.len();
        (0..dim).flat_map(move |m| {
            (0..dim).map(move |n| WorkOutcome {
                work: self.final_energies[n] - self.initial_energies[m],
                probability: self.initial_populations[m] * self.transitions[(m, n)],
            })
        })
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes().map(|o| o.probability).sum()
    }

    /// First moment `Σ p w`.
    pub fn mean(&self) -> f64 {
        self.outcomes().map(|o| o.probability * o.work).sum()
    }

    /// `⟨e^{-βW}⟩`.
    pub fn exponential_average(&self, beta: f64) -> f64 {
        self.outcomes()
            .map(|o| o.probability * (-beta * o.work).exp())
            .sum()
    }
}

/// Builds the two-point-measurement distribution from the spectra at both
/// ends, the total propagator `U_T` and Gibbs initial populations.
pub fn work_distribution(
    initial: &SpectralDecomposition,
    fin: &SpectralDecomposition,
    unitary: &CMatrix,
    beta: f64,
) -> Result<WorkDistribution> {
    let dim = initial.dim();
    if fin.dim() != dim || unitary.nrows() != dim || unitary.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: unitary.nrows(),
        });
    }
    let deviation = (unitary.adjoint() * unitary - CMatrix::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if deviation > UNITARITY_TOL {
        return Err(Error::NonUnitary { deviation });
    }
    // amplitudes ⟨n(f_T)| U |m(f₀)⟩, indexed [n, m]
    let amplitudes = fin.eigenvectors().adjoint() * unitary * initial.eigenvectors();
    let transitions = nalgebra::DMatrix::from_fn(dim, dim, |m, n| amplitudes[(n, m)].norm_sqr());
    Ok(WorkDistribution {
        initial_energies: initial.eigenvalues().to_vec(),
        final_energies: fin.eigenvalues().to_vec(),
        initial_populations: boltzmann_populations(initial, beta),
        transitions,
    })
}

/// `G(u) = Σ p_{mn} e^{i u w_{mn}}`.
pub fn characteristic_function(wd: &WorkDistribution, u: f64) -> C64 {
    wd.outcomes()
        .map(|o| C64::from_polar(o.probability, u * o.work))
        .sum()
}

/// Everything about a process `H(f₀) → H(f_T)` that does not depend on the
/// protocol in between, so that many protocols can be scored cheaply.
#[derive(Debug, Clone)]
pub struct ProcessEvaluator {
    config: SpinChainConfig,
    f0: f64,
    f_final: f64,
    propagator: Propagator,
    h0: HermitianOperator,
    h_final: HermitianOperator,
    initial: SpectralDecomposition,
    fin: SpectralDecomposition,
    rho0: DensityMatrix,
    populations: Vec<f64>,
    delta_f: f64,
}

impl ProcessEvaluator {
    pub fn new(config: &SpinChainConfig, f0: f64, f_final: f64) -> Result<Self> {
        let propagator = Propagator::new(config);
        let h0 = propagator.terms().hamiltonian(f0);
        let h_final = propagator.terms().hamiltonian(f_final);
        let initial = eigendecompose(&h0, DEFAULT_DEGENERACY_TOL)?;
        let fin = eigendecompose(&h_final, DEFAULT_DEGENERACY_TOL)?;
        let beta = config.beta();
        let delta_f = free_energy_difference(&initial, &fin, beta)?;
        let rho0 = gibbs_state(&initial, beta);
        let populations = boltzmann_populations(&initial, beta);
        Ok(Self {
            config: *config,
            f0,
            f_final,
            propagator,
            h0,
            h_final,
            initial,
            fin,
            rho0,
            populations,
            delta_f,
        })
    }

    pub fn config(&self) -> &SpinChainConfig {
        &self.config
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn f_final(&self) -> f64 {
        self.f_final
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn initial_spectrum(&self) -> &SpectralDecomposition {
        &self.initial
    }

    pub fn final_spectrum(&self) -> &SpectralDecomposition {
        &self.fin
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    fn check_endpoints(&self, protocol: &ControlProtocol) -> Result<()> {
        if protocol.f0() != self.f0 || protocol.f_final() != self.f_final {
            return Err(Error::EndpointMismatch {
                expected_f0: self.f0,
                expected_f_final: self.f_final,
                found_f0: protocol.f0(),
                found_f_final: protocol.f_final(),
            });
        }
        Ok(())
    }

    /// Final state of the process. A sudden quench leaves the Gibbs state
    /// untouched, so it is returned without numerical propagation.
    pub fn final_state(
        &self,
        protocol: &ControlProtocol,
        grid: &TimeGrid,
    ) -> Result<DensityMatrix> {
        self.check_endpoints(protocol)?;
        if protocol.kind() == ProtocolKind::SuddenQuench {
            return Ok(self.rho0.clone());
        }
        Ok(self
            .propagator
            .propagate(protocol, grid, &self.rho0, PropagationOptions::default())?
            .rho_final)
    }

    pub fn report(
        &self,
        protocol: &ControlProtocol,
        grid: &TimeGrid,
    ) -> Result<IrreversibilityReport> {
        let rho_final = self.final_state(protocol, grid)?;
        self.report_for_state(&rho_final)
    }

    /// Quantifiers for a given final state of this process.
    pub fn report_for_state(&self, rho_final: &DensityMatrix) -> Result<IrreversibilityReport> {
        let avg_work = average_work(&self.h0, &self.h_final, &self.rho0, rho_final)?;
        let beta = self.config.beta();
        Ok(IrreversibilityReport {
            avg_work,
            delta_f: self.delta_f,
            s_irr: irreversible_entropy(avg_work, self.delta_f, beta),
            w_fric: inner_friction(&self.fin, rho_final, &self.populations)?,
            s_qvol: quantum_volume_entropy(&self.initial, &self.fin, &self.rho0, rho_final),
        })
    }

    /// Work statistics of `protocol`; the quench uses `U_T = I`.
    pub fn work_distribution(
        &self,
        protocol: &ControlProtocol,
        grid: &TimeGrid,
    ) -> Result<WorkDistribution> {
        self.check_endpoints(protocol)?;
        let dim = self.config.dim();
        let unitary = if protocol.kind() == ProtocolKind::SuddenQuench {
            CMatrix::identity(dim, dim)
        } else {
            self.propagator.total_unitary(protocol, grid)?
        };
        work_distribution(&self.initial, &self.fin, &unitary, self.config.beta())
    }
}

/// Gibbs state at `f₀`, propagation under `protocol`, and all quantifiers
/// evaluated on the same final state.
pub fn full_report(
    config: &SpinChainConfig,
    protocol: &ControlProtocol,
    grid: &TimeGrid,
) -> Result<IrreversibilityReport> {
    ProcessEvaluator::new(config, protocol.f0(), protocol.f_final())?.report(protocol, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::{build_hamiltonian, IsingTerms};
    use std::f64::consts::PI;

    fn evaluator(n: usize, beta: f64, f0: f64, f_final: f64) -> ProcessEvaluator {
        ProcessEvaluator::new(&SpinChainConfig::new(n, beta).unwrap(), f0, f_final).unwrap()
    }

    #[test]
    fn identity_process_is_free() {
        let ev = evaluator(4, 50.0, 0.8, 0.8);
        let grid = TimeGrid::new(PI, 100).unwrap();
        for p in [
            ControlProtocol::sudden_quench(0.8, 0.8, PI),
            ControlProtocol::linear_ramp(0.8, 0.8, PI),
        ] {
            let r = ev.report(&p, &grid).unwrap();
            for x in [r.avg_work, r.delta_f, r.s_irr, r.w_fric, r.s_qvol] {
                assert!(x.abs() < 1e-10, "{r:?}");
            }
        }
        let wd = ev
            .work_distribution(&ControlProtocol::sudden_quench(0.8, 0.8, PI), &grid)
            .unwrap();
        let off_zero: f64 = wd
            .outcomes()
            .filter(|o| o.work.abs() > 1e-12)
            .map(|o| o.probability)
            .sum();
        assert!(off_zero < 1e-12);
        for u in [-3.0, 0.5, 7.0] {
            assert!((characteristic_function(&wd, u) - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn quench_work_closed_form() {
        let cfg = SpinChainConfig::new(4, 50.0).unwrap();
        let (f0, ft) = (0.8, 0.9);
        let ev = ProcessEvaluator::new(&cfg, f0, ft).unwrap();
        let r = ev
            .report(
                &ControlProtocol::sudden_quench(f0, ft, PI),
                &TimeGrid::new(PI, 10).unwrap(),
            )
            .unwrap();
        let x = IsingTerms::new(&cfg).transverse().map(|v| C64::new(v, 0.0));
        let oracle = (f0 - ft) * ev.initial_state().expectation(&x).re;
        assert!((r.avg_work - oracle).abs() < 1e-12);
        assert_eq!(r.s_irr, irreversible_entropy(r.avg_work, r.delta_f, 50.0));
    }

    #[test]
    fn average_work_rejects_mismatch_and_complex_traces() {
        let cfg = SpinChainConfig::new(2, 1.0).unwrap();
        let h = build_hamiltonian(&cfg, 0.3);
        let small = DensityMatrix::maximally_mixed(2);
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            average_work(&h, &h, &rho, &small),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(average_work(&h, &h, &rho, &rho).unwrap(), 0.0);
    }

    #[test]
    fn inner_friction_validates_populations() {
        let ev = evaluator(2, 1.0, 0.2, 0.4);
        let rho = ev.initial_state();
        assert!(inner_friction(ev.final_spectrum(), rho, &[1.0, 0.0]).is_err());
        assert!(inner_friction(ev.final_spectrum(), rho, &[0.5, 0.4, 0.0, 0.0]).is_err());
    }

    #[test]
    fn tpm_first_moment_and_jarzynski() {
        let cfg = SpinChainConfig::new(3, 2.0).unwrap();
        let ev = ProcessEvaluator::new(&cfg, 0.4, 1.2).unwrap();
        let p = ControlProtocol::linear_ramp(0.4, 1.2, 1.0);
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let wd = ev.work_distribution(&p, &grid).unwrap();
        assert!((wd.total_probability() - 1.0).abs() < 1e-10);
        for row in wd.transitions().row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-10);
        }
        let r = ev.report(&p, &grid).unwrap();
        assert!((wd.mean() - r.avg_work).abs() < 1e-9);
        let lhs = wd.exponential_average(2.0);
        let rhs = (-2.0 * r.delta_f).exp();
        assert!((lhs - rhs).abs() < 1e-6 * rhs);
    }

    #[test]
    fn characteristic_function_properties() {
        let cfg = SpinChainConfig::new(3, 1.0).unwrap();
        let ev = ProcessEvaluator::new(&cfg, 0.3, 0.9).unwrap();
        let p = ControlProtocol::linear_ramp(0.3, 0.9, 0.7);
        let grid = TimeGrid::new(0.7, 100).unwrap();
        let wd = ev.work_distribution(&p, &grid).unwrap();
        assert!((characteristic_function(&wd, 0.0) - C64::new(1.0, 0.0)).norm() < 1e-12);
        for i in 0..=200 {
            let u = -10.0 + 0.1 * i as f64;
            assert!(characteristic_function(&wd, u).norm() <= 1.0 + 1e-12);
        }
        let eps = 1e-6;
        let derivative =
            (characteristic_function(&wd, eps) - characteristic_function(&wd, -eps)) / (2.0 * eps);
        let r = ev.report(&p, &grid).unwrap();
        assert!((derivative - C64::new(0.0, r.avg_work)).norm() < 1e-6);
    }

    #[test]
    fn non_unitary_rejected() {
        let ev = evaluator(2, 1.0, 0.2, 0.4);
        let u = CMatrix::identity(4, 4) * C64::new(1.01, 0.0);
        assert!(matches!(
            work_distribution(ev.initial_spectrum(), ev.final_spectrum(), &u, 1.0),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn endpoints_must_match() {
        let ev = evaluator(2, 1.0, 0.2, 0.4);
        let grid = TimeGrid::new(1.0, 10).unwrap();
        assert!(matches!(
            ev.report(&ControlProtocol::linear_ramp(0.2, 0.5, 1.0), &grid),
            Err(Error::EndpointMismatch { .. })
        ));
    }

    #[test]
    fn volume_entropy_of_identity_is_zero() {
        let ev = evaluator(3, 5.0, 0.6, 0.6);
        let rho = ev.initial_state();
        assert_eq!(
            quantum_volume_entropy(ev.initial_spectrum(), ev.final_spectrum(), rho, rho),
            0.0
        );
    }

    #[test]
    fn second_law_on_quench_grid() {
        for n in 3..=5 {
            for i in 1..=20 {
                let f0 = 0.1 * i as f64;
                let ev = evaluator(n, 50.0, f0, f0 + 0.1);
                let r = ev
                    .report(
                        &ControlProtocol::sudden_quench(f0, f0 + 0.1, PI),
                        &TimeGrid::new(PI, 1).unwrap(),
                    )
                    .unwrap();
                assert!(r.s_irr >= -1e-9, "N={n} f0={f0} {r:?}");
                assert!(r.s_qvol >= -1e-9, "N={n} f0={f0} {r:?}");
            }
        }
    }
}
