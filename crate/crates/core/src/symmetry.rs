//! Field-independent block structure of `H(f)`.
//!
//! Translations, the reflection `i → N + 1 - i` and the global spin flip
//! commute with both `Σ σˣ` and `Σ σᶻσᶻ`. Any symmetric element of their
//! group algebra therefore commutes with `H(f)` for every `f`, and its
//! eigenspaces are invariant subspaces of every `H(f)`. Diagonalizing one
//! such element once yields an orthogonal basis in which all `H(f)` are
//! block diagonal.

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::spin_model::IsingTerms;

/// Off-block leakage above which the decomposition is discarded.
const LEAKAGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct Block {
    /// Orthonormal columns spanning the invariant subspace.
    pub basis: DMatrix<f64>,
    pub transverse: DMatrix<f64>,
    pub coupling: DMatrix<f64>,
}

impl Block {
    pub fn hamiltonian(&self, f: f64) -> DMatrix<f64> {
        &self.coupling - &self.transverse * f
    }
}

type Permutation = Vec<usize>;

fn symmetry_group(n_spins: usize) -> Vec<Permutation> {
    let dim = 1usize << n_spins;
    let bit = |site: usize| 1usize << (n_spins - site);
    let relabel = |map: &dyn Fn(usize) -> usize| -> Permutation {
        (0..dim)
            .map(|state| {
                (1..=n_spins)
                    .filter(|&s| state & bit(s) != 0)
                    .fold(0, |acc, s| acc | bit(map(s)))
            })
            .collect()
    };
    let shift = relabel(&|s| s % n_spins + 1);
    let reflect = relabel(&|s| n_spins + 1 - s);
    let flip: Permutation = (0..dim).map(|state| state ^ (dim - 1)).collect();
    let generators = [shift, reflect, flip];

    let identity: Permutation = (0..dim).collect();
    let mut seen: HashSet<Permutation> = HashSet::from([identity.clone()]);
    let mut order = vec![identity.clone()];
    let mut queue = VecDeque::from([identity]);
    while let Some(g) = queue.pop_front() {
        for h in &generators {
            let composed: Permutation = g.iter().map(|&x| h[x]).collect();
            if seen.insert(composed.clone()) {
                order.push(composed.clone());
                queue.push_back(composed);
            }
        }
    }
    order
}

/// Splits the Hilbert space of `terms` into symmetry blocks. Falls back to a
/// single block if the numerical decomposition leaks.
pub(crate) fn blocks(terms: &IsingTerms) -> Vec<Block> {
    let dim = terms.dim();
    let group = symmetry_group(terms.n_spins());
    let mut commutant = DMatrix::<f64>::zeros(dim, dim);
    for (k, g) in group.iter().enumerate() {
        // deterministic, rationally independent weights
        let weight =
            ((k as f64 + 1.0) * 0.618_033_988_749_894_9).fract() + 0.1 * (k as f64 + 1.0).sqrt();
        for (state, &image) in g.iter().enumerate() {
            commutant[(image, state)] += weight;
            commutant[(state, image)] += weight;
        }
    }
    let eig = SymmetricEigen::new(commutant);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.amax().max(1.0);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g)
                if (eig.eigenvalues[i] - eig.eigenvalues[*g.last().unwrap()]).abs()
                    <= 1e-9 * scale =>
            {
                g.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }

    let transverse = terms.transverse();
    let coupling = DMatrix::from_diagonal(terms.coupling());
    let mut out = Vec::with_capacity(groups.len());
    for g in &groups {
        let mut basis = DMatrix::zeros(dim, g.len());
        for (c, &i) in g.iter().enumerate() {
            basis.set_column(c, &eig.eigenvectors.column(i));
        }
        out.push(Block {
            transverse: basis.transpose() * transverse * &basis,
            coupling: basis.transpose() * &coupling * &basis,
            basis,
        });
    }
    if leaks(&out, transverse, &coupling) {
        return vec![Block {
            basis: DMatrix::identity(dim, dim),
            transverse: transverse.clone(),
            coupling,
        }];
    }
    out
}

fn leaks(blocks: &[Block], transverse: &DMatrix<f64>, coupling: &DMatrix<f64>) -> bool {
    for (a, ba) in blocks.iter().enumerate() {
        for (b, bb) in blocks.iter().enumerate() {
            if a == b {
                continue;
            }
            let cross_x = ba.basis.transpose() * transverse * &bb.basis;
            let cross_z = ba.basis.transpose() * coupling * &bb.basis;
            if cross_x.amax() > LEAKAGE_TOL || cross_z.amax() > LEAKAGE_TOL {
                return true;
            }
        }
    }
    false
}
