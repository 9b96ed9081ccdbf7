//! Brute-force reference evolution.
//!
//! The restricted Hamiltonian is assembled densely from its three Kronecker
//! terms, `(Δ/2) I_N⊗Z + √2λ I_N⊗X + 2ξ A⊗(I₂−Z)/2`, over the site-major
//! basis `(|1⟩|e,0⟩, |1⟩|g,2⟩, |2⟩|e,0⟩, …)`, then diagonalized numerically.
//! Nothing here uses the chain eigenmodes.
//!
//! Dense storage limits practical use to `N ≲ 2000`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice;
use crate::model::{RestrictedState, SystemParams};

/// Largest `N` the dense oracle is meant for.
pub const ORACLE_MAX_SITES: usize = 2000;

/// Tolerance on `|‖ψ₀‖² − 1|` accepted by [`evolve`].
pub const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseRestrictedHamiltonian {
    pub n_sites: usize,
    pub matrix: DMatrix<f64>,
}

pub fn build_hamiltonian(params: &SystemParams) -> DenseRestrictedHamiltonian {
    let n = params.n_cavities;
    let id_n = DMatrix::<f64>::identity(n, n);
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let x = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let photon_projector = (Matrix2::identity() - z) * 0.5;
    let adjacency = lattice::adjacency(params);

    let matrix = id_n.kronecker(&z) * (0.5 * params.detuning)
        + id_n.kronecker(&x) * (SQRT_2 * params.coupling)
        + adjacency.kronecker(&photon_projector) * (2.0 * params.hopping);
    DenseRestrictedHamiltonian { n_sites: n, matrix }
}

impl DenseRestrictedHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full Hermitian eigendecomposition.
    pub fn decompose(&self) -> DenseEvolver {
        let eig = SymmetricEigen::new(self.matrix.clone());
        DenseEvolver { n_sites: self.n_sites, energies: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, state: &RestrictedState) -> f64 {
        let v = state.to_interleaved();
        let mut acc = C64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            let row: C64 = v.iter().enumerate().map(|(j, vj)| vj * self.matrix[(i, j)]).sum();
            acc += vi.conj() * row;
        }
        acc.re
    }
}

/// Eigen-system of a dense restricted Hamiltonian, reusable across
/// evolution times.
#[derive(Clone, Debug)]
pub struct DenseEvolver {
    n_sites: usize,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl DenseEvolver {
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.energies.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn check(&self, state: &RestrictedState) -> Result<Vec<C64>> {
        if state.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, actual: state.n_sites() });
        }
        let deviation = (state.norm_sqr() - 1.0).abs();
        if deviation > NORM_TOLERANCE {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(state.to_interleaved())
    }

    /// `ψ(t) = Σ_k e^{−iE_k t} |k⟩⟨k|ψ₀⟩`.
    pub fn evolve(&self, state: &RestrictedState, t: f64) -> Result<RestrictedState> {
        let psi = self.check(state)?;
        let dim = psi.len();
        let coeffs: Vec<C64> = (0..dim)
            .map(|k| {
                let phase = C64::from_polar(1.0, -self.energies[k] * t);
                let overlap: C64 = (0..dim).map(|i| psi[i] * self.vectors[(i, k)]).sum();
                overlap * phase
            })
            .collect();
        let out: Vec<C64> = (0..dim).map(|i| (0..dim).map(|k| coeffs[k] * self.vectors[(i, k)]).sum()).collect();
        Ok(RestrictedState::from_interleaved(&out))
    }
}

/// One-shot evolution: decomposes `h` and propagates `state` to time `t`.
pub fn evolve(h: &DenseRestrictedHamiltonian, state: &RestrictedState, t: f64) -> Result<RestrictedState> {
    h.decompose().evolve(state, t)
}
