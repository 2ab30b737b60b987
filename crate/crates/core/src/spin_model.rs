//! Periodic transverse-field Ising ring and elementary spin operators.
//!
//! Basis states are labelled by integers whose binary digits are the spin
//! configurations; site 1 is the leftmost tensor factor (most significant
//! bit) and bit value 0 is the `σᶻ = +1` state.

use nalgebra::{DMatrix, DVector};

use crate::{CMatrix, Error, Result, C64};

/// Largest chain handled by the dense representation.
pub const MAX_SPINS: usize = 12;

/// Tolerance on `max |A - A†|` accepted by [`HermitianOperator::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Size and temperature of a periodic Ising ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinChainConfig {
    n_spins: usize,
    beta: f64,
}

impl SpinChainConfig {
    /// `beta = 0` is the infinite-temperature limit.
    pub fn new(n_spins: usize, beta: f64) -> Result<Self> {
        if !(2..=MAX_SPINS).contains(&n_spins) {
            return Err(Error::InvalidChain(format!(
                "n_spins = {n_spins} outside 2..={MAX_SPINS}"
            )));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidChain(format!(
                "beta = {beta} must be finite and non-negative"
            )));
        }
        Ok(Self { n_spins, beta })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Hilbert space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn with_spins(&self, n_spins: usize) -> Result<Self> {
        Self::new(n_spins, self.beta)
    }
}

/// Dense Hermitian matrix on the spin Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let deviation = hermiticity_defect(&matrix);
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| C64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// True when every entry has an exactly vanishing imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }
}

/// `max |A_ij - conj(A_ji)|`.
pub fn hermiticity_defect(matrix: &CMatrix) -> f64 {
    let n = matrix.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_site(n_spins: usize, site: usize) -> Result<()> {
    if site == 0 || site > n_spins {
        return Err(Error::SiteOutOfRange { site, n_spins });
    }
    Ok(())
}

#[inline]
fn site_mask(n_spins: usize, site: usize) -> usize {
    1 << (n_spins - site)
}

/// `I ⊗ … ⊗ σᵏ ⊗ … ⊗ I` with the Pauli matrix on `site` (1-based) of an
/// `n_spins`-site register. Accepts single-site registers.
pub fn pauli_on_site(n_spins: usize, site: usize, axis: Axis) -> Result<HermitianOperator> {
    if n_spins == 0 || n_spins > MAX_SPINS {
        return Err(Error::InvalidChain(format!(
            "n_spins = {n_spins} outside 1..={MAX_SPINS}"
        )));
    }
    check_site(n_spins, site)?;
    let dim = 1usize << n_spins;
    let mask = site_mask(n_spins, site);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let up = col & mask == 0;
        match axis {
            Axis::Z => m[(col, col)] = C64::new(if up { 1.0 } else { -1.0 }, 0.0),
            Axis::X => m[(col ^ mask, col)] = C64::new(1.0, 0.0),
            // σʸ|0⟩ = i|1⟩, σʸ|1⟩ = -i|0⟩
            Axis::Y => m[(col ^ mask, col)] = C64::new(0.0, if up { 1.0 } else { -1.0 }),
        }
    }
    HermitianOperator::new(m)
}

/// [`pauli_on_site`] for the chain described by `config`.
pub fn embed_pauli(config: &SpinChainConfig, site: usize, axis: Axis) -> Result<HermitianOperator> {
    pauli_on_site(config.n_spins, site, axis)
}

/// Real building blocks of `H(f) = -f X + Z₂` with `X = Σ σˣᵢ` and the
/// diagonal periodic coupling `Z₂ = Σ σᶻᵢ σᶻᵢ₊₁`.
#[derive(Debug, Clone)]
pub struct IsingTerms {
    n_spins: usize,
    transverse: DMatrix<f64>,
    coupling: DVector<f64>,
}

impl IsingTerms {
    pub fn new(config: &SpinChainConfig) -> Self {
        let n = config.n_spins;
        let dim = config.dim();
        let mut transverse = DMatrix::zeros(dim, dim);
        let mut coupling = DVector::zeros(dim);
        for state in 0..dim {
            let spin = |site: usize| {
                if state & site_mask(n, site) == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            // bond (i, i+1) with σ_{N+1} ≡ σ_1; for N = 2 both (1,2) and (2,1) count
            coupling[state] = (1..=n).map(|i| spin(i) * spin(i % n + 1)).sum();
            for site in 1..=n {
                transverse[(state ^ site_mask(n, site), state)] += 1.0;
            }
        }
        Self {
            n_spins: n,
            transverse,
            coupling,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.coupling.len()
    }

    /// `Σ σˣᵢ` in the computational basis.
    pub fn transverse(&self) -> &DMatrix<f64> {
        &self.transverse
    }

    /// Diagonal of `Σ σᶻᵢ σᶻᵢ₊₁`.
    pub fn coupling(&self) -> &DVector<f64> {
        &self.coupling
    }

    /// `H(f)` as a real symmetric matrix.
    pub fn real_hamiltonian(&self, f: f64) -> DMatrix<f64> {
        let mut h = &self.transverse * (-f);
        for (i, c) in self.coupling.iter().enumerate() {
            h[(i, i)] += c;
        }
        h
    }

    pub fn hamiltonian(&self, f: f64) -> HermitianOperator {
        HermitianOperator {
            matrix: self.real_hamiltonian(f).map(|x| C64::new(x, 0.0)),
        }
    }
}

/// `H(f) = -f Σᵢ σˣᵢ + Σᵢ σᶻᵢ σᶻᵢ₊₁` on the periodic ring, in units of the
/// coupling energy.
pub fn build_hamiltonian(config: &SpinChainConfig, f: f64) -> HermitianOperator {
    IsingTerms::new(config).hamiltonian(f)
}

/// Permutation matrix of the cyclic shift `site i → site i+1`.
pub fn cyclic_shift(config: &SpinChainConfig) -> CMatrix {
    let n = config.n_spins;
    let dim = config.dim();
    let mut p = CMatrix::zeros(dim, dim);
    for state in 0..dim {
        let mut image = 0;
        for site in 1..=n {
            if state & site_mask(n, site) != 0 {
                image |= site_mask(n, site % n + 1);
            }
        }
        p[(image, state)] = C64::new(1.0, 0.0);
    }
    p
}
