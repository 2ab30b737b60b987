//! Eigendecomposition, degeneracy grouping, Gibbs states and free energies.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::spin_model::{hermiticity_defect, HermitianOperator, HERMITICITY_TOL};
use crate::{CMatrix, Error, Result, C64};

/// Default absolute tolerance for grouping equal eigenvalues.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Ascending eigenvalues with matching orthonormal eigenvectors (columns).
///
/// Inside a degenerate group the basis is canonical: it is obtained by
/// projecting the computational basis vectors onto the eigenspace in order
/// and orthonormalizing, so it does not depend on the rotation the solver
/// happened to return. Every column has its first non-negligible component
/// real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    groups: Vec<Range<usize>>,
    level_index: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Index ranges of equal eigenvalues, in ascending order of energy.
    pub fn degeneracy_groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    /// Distinct-level index `k` of every eigenvector; members of one
    /// degenerate group share the same `k`.
    pub fn level_indices(&self) -> &[usize] {
        &self.level_index
    }

    /// Number of distinct eigenvalues.
    pub fn n_levels(&self) -> usize {
        self.groups.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        self.operator_function(|e| e)
    }

    /// `V diag(g(E)) V†`.
    pub fn operator_function(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&e| g(e)).collect();
        self.weighted_projectors(&weights)
    }

    /// `Σ_m w_m |m⟩⟨m|`.
    pub fn weighted_projectors(&self, weights: &[f64]) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (mut col, &w) in scaled.column_iter_mut().zip(weights) {
            col *= C64::new(w, 0.0);
        }
        scaled * v.adjoint()
    }

    /// Diagonal `⟨m|A|m⟩` of an operator in this eigenbasis.
    pub fn diagonal_elements(&self, a: &CMatrix) -> Vec<C64> {
        let v = &self.eigenvectors;
        let av = a * v;
        (0..self.dim())
            .map(|m| v.column(m).dotc(&av.column(m)))
            .collect()
    }
}

/// Hermitian eigendecomposition with deterministic ordering and degeneracy
/// groups built transitively from neighbouring gaps `≤ degeneracy_tol`.
pub fn eigendecompose(h: &HermitianOperator, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    let (values, vectors) = if h.is_real() {
        let eig = SymmetricEigen::try_new(h.real_part(), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::Eigensolver(format!("no convergence for dim {}", h.dim())))?;
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::try_new(h.matrix().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::Eigensolver(format!("no convergence for dim {}", h.dim())))?;
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            eig.eigenvectors,
        )
    };
    if values.iter().any(|e| !e.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }

    let dim = values.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }

    let groups = group_levels(&eigenvalues, degeneracy_tol);
    let mut level_index = vec![0; dim];
    for (k, g) in groups.iter().enumerate() {
        for m in g.clone() {
            level_index[m] = k;
        }
        if g.len() > 1 {
            canonicalize_subspace(&mut eigenvectors, g.clone());
        }
    }
    for mut col in eigenvectors.column_iter_mut() {
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-10) {
            col *= lead.conj() / lead.norm();
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        groups,
        level_index,
    })
}

fn group_levels(sorted: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// Replace the columns in `range` by the Gram-Schmidt orthonormalization
/// of the projected computational basis vectors `P e_0, P e_1, …`.
fn canonicalize_subspace(vectors: &mut CMatrix, range: Range<usize>) {
    let dim = vectors.nrows();
    let width = range.len();
    let block = vectors.columns(range.start, width).into_owned();
    let mut accepted: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(width);
    for j in 0..dim {
        if accepted.len() == width {
            break;
        }
        // P e_j = W (W† e_j) = W conj(W[j, :])ᵀ
        let coeffs = block.row(j).adjoint();
        let mut v = &block * coeffs;
        for _ in 0..2 {
            for u in &accepted {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            accepted.push(v / C64::new(norm, 0.0));
        }
    }
    if accepted.len() == width {
        for (offset, v) in accepted.iter().enumerate() {
            vectors.set_column(range.start + offset, v);
        }
    }
}

/// `log Z = log Σ_m e^{-β E_m}`, shifted by the ground energy for stability.
pub fn partition_function_log(spec: &SpectralDecomposition, beta: f64) -> f64 {
    let e_min = spec.ground_energy();
    let sum: f64 = spec
        .eigenvalues()
        .iter()
        .map(|&e| (-beta * (e - e_min)).exp())
        .sum();
    -beta * e_min + sum.ln()
}

/// Gibbs populations `p_m = e^{-β E_m} / Z` in ascending-energy order.
pub fn boltzmann_populations(spec: &SpectralDecomposition, beta: f64) -> Vec<f64> {
    let e_min = spec.ground_energy();
    let weights: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .map(|&e| (-beta * (e - e_min)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// `ρ = e^{-βH} / Z`.
pub fn gibbs_state(spec: &SpectralDecomposition, beta: f64) -> DensityMatrix {
    let populations = boltzmann_populations(spec, beta);
    DensityMatrix::from_matrix_unchecked(spec.weighted_projectors(&populations))
}

/// `ΔF = -(log Z_T - log Z_0) / β`.
pub fn free_energy_difference(
    initial: &SpectralDecomposition,
    fin: &SpectralDecomposition,
    beta: f64,
) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::UndefinedFreeEnergy);
    }
    Ok((partition_function_log(initial, beta) - partition_function_log(fin, beta)) / beta)
}

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity defect {defect:e}"
            )));
        }
        let trace = matrix.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let rho = Self { matrix };
        let smallest = rho.eigenvalues()?[0];
        if smallest < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {smallest:e}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// Maximally mixed state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_matrix_unchecked(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = HermitianOperator::new(hermitian_part(&self.matrix))?;
        let eig = SymmetricEigen::try_new(h.into_matrix(), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::Eigensolver("density matrix spectrum".into()))?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// `-Tr ρ log ρ`.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum())
    }

    /// `Tr[A ρ]`.
    pub fn expectation(&self, a: &CMatrix) -> C64 {
        trace_of_product(a, &self.matrix)
    }
}

/// `(A + A†) / 2`.
pub(crate) fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// `Tr[A B]` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Real symmetric view of an operator known to be real, for tests.
pub fn real_matrix(a: &CMatrix) -> DMatrix<f64> {
    a.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::{build_hamiltonian, SpinChainConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn diag(values: &[f64]) -> HermitianOperator {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        HermitianOperator::from_real(&m).unwrap()
    }

    fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::new(hermitian_part(&(m / tr))).unwrap()
    }

    #[test]
    fn diagonal_input_sorted_with_permutation_vectors() {
        let spec = eigendecompose(&diag(&[3.0, 1.0, 2.0]), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(spec.eigenvalues(), &[1.0, 2.0, 3.0]);
        let expected_rows = [1, 2, 0];
        for (m, &row) in expected_rows.iter().enumerate() {
            assert!((spec.eigenvectors()[(row, m)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        assert_eq!(spec.n_levels(), 3);
    }

    #[test]
    fn two_spin_analytic_spectrum_at_unit_field() {
        let cfg = SpinChainConfig::new(2, 1.0).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&cfg, 1.0), DEFAULT_DEGENERACY_TOL).unwrap();
        let s = 2.0 * 2f64.sqrt();
        let expected = [-s, -2.0, 2.0, s];
        for (a, b) in spec.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_and_unitarity() {
        for n in 2..=5 {
            let cfg = SpinChainConfig::new(n, 1.0).unwrap();
            let h = build_hamiltonian(&cfg, 0.63);
            let spec = eigendecompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
            let v = spec.eigenvectors();
            let dim = cfg.dim();
            assert!(max_abs(&(v.adjoint() * v - CMatrix::identity(dim, dim))) < 1e-10);
            assert!(max_abs(&(spec.reconstruct() - h.matrix())) < 1e-10);
            assert!(spec.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn complex_hermitian_input() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(1.0, 0.0),
            ],
        );
        let h = HermitianOperator::new(m.clone()).unwrap();
        let spec = eigendecompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((spec.eigenvalues()[0] - 0.0).abs() < 1e-14);
        assert!((spec.eigenvalues()[1] - 2.0).abs() < 1e-14);
        assert!(max_abs(&(spec.reconstruct() - m)) < 1e-12);
    }

    #[test]
    fn degenerate_groups_are_canonical() {
        // identical spectra, eigenspaces given in two different rotations
        let spec = eigendecompose(&diag(&[1.0, 0.0, 1.0, 2.0]), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(spec.degeneracy_groups(), &[0..1, 1..3, 3..4]);
        assert_eq!(spec.level_indices(), &[0, 1, 1, 2]);
        let v = spec.eigenvectors();
        assert!((v[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((v[(2, 2)] - C64::new(1.0, 0.0)).norm() < 1e-12);

        let cfg = SpinChainConfig::new(4, 1.0).unwrap();
        let h = build_hamiltonian(&cfg, 0.8);
        let a = eigendecompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let b = eigendecompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(a, b);
        assert!(a.degeneracy_groups().iter().any(|g| g.len() > 1));
    }

    #[test]
    fn phase_convention_first_component_real_positive() {
        let cfg = SpinChainConfig::new(3, 1.0).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&cfg, 0.4), DEFAULT_DEGENERACY_TOL).unwrap();
        for col in spec.eigenvectors().column_iter() {
            let lead = col.iter().find(|z| z.norm() > 1e-10).unwrap();
            assert!(lead.re > 0.0 && lead.im.abs() < 1e-15);
        }
    }

    #[test]
    fn transitive_grouping() {
        let spec =
            eigendecompose(&diag(&[0.0, 0.6e-9, 1.2e-9, 1.0]), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(spec.degeneracy_groups(), &[0..3, 3..4]);
    }

    #[test]
    fn level_crossing_at_unit_field() {
        // odd rings and N = 6 acquire extra degeneracies exactly at f = 1
        for n in [3, 5, 6] {
            let cfg = SpinChainConfig::new(n, 1.0).unwrap();
            let at = eigendecompose(&build_hamiltonian(&cfg, 1.0), DEFAULT_DEGENERACY_TOL).unwrap();
            let near =
                eigendecompose(&build_hamiltonian(&cfg, 1.001), DEFAULT_DEGENERACY_TOL).unwrap();
            assert!(at.n_levels() < near.n_levels(), "N={n}");
        }
    }

    #[test]
    fn four_spin_crossing_is_detected_where_it_occurs() {
        // for N = 4 the level E = -2f meets its lower neighbour near f ≈ 1.15
        let cfg = SpinChainConfig::new(4, 1.0).unwrap();
        let gap = |f: f64| {
            let spec = eigendecompose(&build_hamiltonian(&cfg, f), DEFAULT_DEGENERACY_TOL).unwrap();
            let e = spec.eigenvalues();
            let pair = e.iter().position(|&x| (x + 2.0 * f).abs() < 1e-9).unwrap();
            let other = if pair == 3 { e[2] } else { e[pair + 2] };
            other - (-2.0 * f)
        };
        let (mut lo, mut hi) = (1.0, 1.3);
        assert!(gap(lo) < 0.0 && gap(hi) > 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);
        let at =
            eigendecompose(&build_hamiltonian(&cfg, crossing), DEFAULT_DEGENERACY_TOL).unwrap();
        let unit = eigendecompose(&build_hamiltonian(&cfg, 1.0), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(at.n_levels() < unit.n_levels());
        assert!(at.degeneracy_groups().iter().any(|g| g.len() == 3));
    }

    #[test]
    fn partition_function_values() {
        let spec = eigendecompose(&diag(&[0.0, 0.0]), DEFAULT_DEGENERACY_TOL).unwrap();
        for beta in [0.0, 1.0, 50.0] {
            assert!((partition_function_log(&spec, beta) - 2f64.ln()).abs() < 1e-15);
        }

        let cfg = SpinChainConfig::new(2, 1.0).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&cfg, 1.0), DEFAULT_DEGENERACY_TOL).unwrap();
        let s = 2.0 * 2f64.sqrt();
        let oracle = ((-2f64).exp() + 2f64.exp() + 2.0 * s.cosh()).ln();
        assert!((partition_function_log(&spec, 1.0) - oracle).abs() < 1e-12);

        let cfg = SpinChainConfig::new(4, 1.0).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&cfg, 0.7), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((partition_function_log(&spec, 0.0) - 16f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn partition_function_is_stable_at_large_beta() {
        let values: Vec<f64> = (0..21).map(|i| -10.0 + i as f64).collect();
        let spec = eigendecompose(&diag(&values), DEFAULT_DEGENERACY_TOL).unwrap();
        for beta in [1.0, 1e3, 1e6] {
            let log_z = partition_function_log(&spec, beta);
            assert!(log_z.is_finite());
            // Σ_i e^{-β i} summed directly for i = 0..20
            let tail: f64 = (0..21).map(|i| (-beta * i as f64).exp()).sum();
            let oracle = 10.0 * beta + tail.ln();
            assert!((log_z - oracle).abs() <= 1e-12 * oracle.abs());
        }
    }

    #[test]
    fn gibbs_state_limits() {
        let cfg = SpinChainConfig::new(3, 1.0).unwrap();
        let h = build_hamiltonian(&cfg, 0.8);
        let spec = eigendecompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();

        let hot = gibbs_state(&spec, 0.0);
        assert!(max_abs(&(hot.matrix() - CMatrix::identity(8, 8) / C64::new(8.0, 0.0))) < 1e-14);

        assert_eq!(spec.degeneracy_groups()[0].len(), 1);
        let cold = gibbs_state(&spec, 1e4);
        let g = spec.eigenvectors().column(0);
        let projector = g * g.adjoint();
        assert!(max_abs(&(cold.matrix() - projector)) < 1e-8);

        let rho = gibbs_state(&spec, 50.0);
        DensityMatrix::new(rho.matrix().clone()).unwrap();
        let commutator = h.matrix() * rho.matrix() - rho.matrix() * h.matrix();
        assert!(max_abs(&commutator) < 1e-10);
    }

    #[test]
    fn gibbs_state_minimizes_free_energy_functional() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = SpinChainConfig::new(3, 1.0).unwrap();
        let h = build_hamiltonian(&cfg, 0.6);
        let spec = eigendecompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        for beta in [0.5, 2.0] {
            let functional = |rho: &DensityMatrix| {
                rho.expectation(h.matrix()).re - rho.von_neumann_entropy().unwrap() / beta
            };
            let best = functional(&gibbs_state(&spec, beta));
            // equals -log Z / β
            assert!((best + partition_function_log(&spec, beta) / beta).abs() < 1e-9);
            for _ in 0..20 {
                let rho = random_density(8, &mut rng);
                assert!(best <= functional(&rho) + 1e-9);
            }
        }
    }

    #[test]
    fn free_energy_difference_cases() {
        let cfg = SpinChainConfig::new(2, 1.0).unwrap();
        let s0 = eigendecompose(&build_hamiltonian(&cfg, 0.0), DEFAULT_DEGENERACY_TOL).unwrap();
        let s1 = eigendecompose(&build_hamiltonian(&cfg, 1.0), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(free_energy_difference(&s0, &s0, 1.0).unwrap(), 0.0);
        assert_eq!(
            free_energy_difference(&s0, &s1, 0.0).unwrap_err(),
            Error::UndefinedFreeEnergy
        );

        // analytic: Z(0) = 2e^{2} + 2e^{-2}, Z(1) = e^{-2} + e^{2} + 2cosh(2√2)
        let z0 = 2.0 * 2f64.exp() + 2.0 * (-2f64).exp();
        let z1 = (-2f64).exp() + 2f64.exp() + 2.0 * (2.0 * 2f64.sqrt()).cosh();
        let oracle = z0.ln() - z1.ln();
        assert!((free_energy_difference(&s0, &s1, 1.0).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-0.5, 0.0),
            ],
        );
        assert!(DensityMatrix::new(negative).is_err());
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((mixed.purity() - 0.25).abs() < 1e-15);
        assert!((mixed.von_neumann_entropy().unwrap() - 4f64.ln()).abs() < 1e-12);
    }
}
