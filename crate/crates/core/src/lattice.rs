//! Open-chain adjacency matrices and their closed-form eigenmodes.
//!
//! Uniform chains have the standing-wave modes
//! `|m⟩ = √(2/(N+1)) Σ_M (−1)^{M+1} sin(mMπ/(N+1)) |M⟩` with
//! `ε_m = −2cos(mπ/(N+1))`. The site sign `(−1)^{M+1}` is what makes `ε_m`
//! the eigenvalue of this vector for the positive-bond adjacency matrix; the
//! untwisted sine belongs to `+2cos(mπ/(N+1))`. Site populations never see
//! the difference.
//! Staggered (dimerized) chains with odd `N` have one zero mode living on the
//! odd sites plus `(N−1)/2` pairs `|m⟩±` with `ε_{m±} = ±2√(cos²q + κ²sin²q)`,
//! `q = mπ/(N+1)`.
//!
//! Every mode amplitude is real.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{HoppingPattern, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeLabel {
    /// Standing wave `m = 1..=N` of the uniform chain.
    Uniform(usize),
    /// Zero-energy mode of the staggered chain, supported on odd sites.
    Zero,
    /// Paired staggered mode, `m = 1..=(N−1)/2`.
    Staggered(usize, Branch),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMode {
    pub label: ModeLabel,
    pub eigenvalue: f64,
    /// Site amplitudes, stored 0-indexed.
    pub site_amps: Vec<f64>,
}

impl ChainMode {
    /// `⟨site|mode⟩` for a 1-indexed site.
    pub fn amp(&self, site: usize) -> f64 {
        self.site_amps[site - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpectrum {
    pub n_sites: usize,
    pub modes: Vec<ChainMode>,
}

impl ChainSpectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut e = self.eigenvalues();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Projection of a complex site vector onto each mode.
    pub fn project(&self, amps: &[C64]) -> Vec<C64> {
        self.modes.iter().map(|mode| mode.site_amps.iter().zip(amps).map(|(&v, &a)| a * v).sum()).collect()
    }
}

/// Bond strength between 1-indexed sites `i` and `i + 1`, in units of `ξ`.
pub fn bond_strength(pattern: HoppingPattern, i: usize) -> f64 {
    match pattern {
        HoppingPattern::Uniform => 1.0,
        HoppingPattern::Staggered { kappa } => {
            if i.is_multiple_of(2) {
                1.0 - kappa
            } else {
                1.0 + kappa
            }
        }
    }
}

/// Nearest-neighbour adjacency matrix of the open chain.
pub fn adjacency(params: &SystemParams) -> DMatrix<f64> {
    adjacency_matrix(params.n_cavities, params.pattern)
}

pub fn adjacency_matrix(n: usize, pattern: HoppingPattern) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 1..n {
        let b = bond_strength(pattern, i);
        a[(i - 1, i)] = b;
        a[(i, i - 1)] = b;
    }
    a
}

/// Closed-form spectrum of the uniform open chain.
pub fn uniform_spectrum(n: usize) -> Result<ChainSpectrum> {
    if n == 0 {
        return Err(invalid("n_cavities", "need at least one cavity"));
    }
    let denom = (n + 1) as f64;
    let norm = (2.0 / denom).sqrt();
    let modes = (1..=n)
        .map(|m| {
            let q = m as f64 * PI / denom;
            let site_amps = (1..=n)
                .map(|site| {
                    let sign = if site % 2 == 1 { 1.0 } else { -1.0 };
                    sign * norm * (q * site as f64).sin()
                })
                .collect();
            ChainMode { label: ModeLabel::Uniform(m), eigenvalue: -2.0 * q.cos(), site_amps }
        })
        .collect();
    Ok(ChainSpectrum { n_sites: n, modes })
}

/// `τ = (κ+1)/(κ−1)`, the bond-alternation ratio.
pub fn bond_ratio(kappa: f64) -> f64 {
    (kappa + 1.0) / (kappa - 1.0)
}

/// `ε_{m+}` of the paired staggered modes.
pub fn staggered_pair_energy(n: usize, kappa: f64, m: usize) -> f64 {
    let q = m as f64 * PI / (n + 1) as f64;
    let (s, c) = q.sin_cos();
    2.0 * (c * c + kappa * kappa * s * s).sqrt()
}

/// Phase `θ_m` from `e^{iθ_m} = (1−κ)/ε_{m+} · (e^{−2imπ/(N+1)} − τ)`,
/// principal branch.
pub fn staggered_theta(n: usize, kappa: f64, m: usize) -> f64 {
    let phase = C64::from_polar(1.0, -2.0 * m as f64 * PI / (n + 1) as f64);
    let rhs = (phase - bond_ratio(kappa)) * ((1.0 - kappa) / staggered_pair_energy(n, kappa, m));
    rhs.arg()
}

/// Unit-norm zero-mode amplitudes on the odd sites `1, 3, …, N`, i.e. the
/// sequence `τ^{j}`, `j = 0..(N+1)/2`, normalized with the first entry
/// positive.
///
/// The magnitudes are evaluated relative to the largest term so that
/// `|τ|^{N+1}` never has to be formed (it overflows for `|τ| > 1` and large
/// `N`).
pub fn zero_mode_odd_amplitudes(n: usize, kappa: f64) -> Vec<f64> {
    let count = n.div_ceil(2);
    let tau = bond_ratio(kappa);
    let log_mag = tau.abs().ln();
    let ref_index = if tau.abs() > 1.0 { count - 1 } else { 0 } as f64;
    let mut amps: Vec<f64> = (0..count)
        .map(|j| {
            let mag = ((j as f64 - ref_index) * log_mag).exp();
            if tau < 0.0 && j % 2 == 1 {
                -mag
            } else {
                mag
            }
        })
        .collect();
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    amps
}

/// Zero-mode amplitude at 1-indexed `site` from the closed form
/// `(2/(κ−1))·√(κ/(τ^{N+1}−1))·τ^{(s−1)/2}` on odd sites, evaluated through
/// logarithms. The overall sign is flipped so that site 1 is positive.
pub fn zero_mode_amplitude(n: usize, kappa: f64, site: usize) -> f64 {
    if site.is_multiple_of(2) {
        return 0.0;
    }
    let tau = bond_ratio(kappa);
    let log_tau = tau.abs().ln();
    let power = (n + 1) as f64 * log_tau;
    // ln|τ^{N+1} − 1|; N + 1 is even so τ^{N+1} = |τ|^{N+1}.
    let log_denominator = if log_tau < 0.0 { (-power.exp()).ln_1p() } else { power + (-(-power).exp()).ln_1p() };
    let log_prefactor = 2f64.ln() - (kappa - 1.0).abs().ln() + 0.5 * (kappa.abs().ln() - log_denominator);
    let j = (site - 1) / 2;
    let mag = (log_prefactor + j as f64 * log_tau).exp();
    if tau < 0.0 && j % 2 == 1 {
        -mag
    } else {
        mag
    }
}

/// Closed-form spectrum of the staggered open chain (odd `N`).
///
/// Ordering is the zero mode first, then `(m, −), (m, +)` for ascending
/// `m`. `κ = 0` has no staggered closed form (`τ = −1`); it returns the
/// uniform spectrum.
pub fn staggered_spectrum(n: usize, kappa: f64) -> Result<ChainSpectrum> {
    if n == 0 {
        return Err(invalid("n_cavities", "need at least one cavity"));
    }
    if n.is_multiple_of(2) {
        return Err(Error::EvenStaggeredChain(n));
    }
    if !(kappa > -1.0 && kappa < 1.0) {
        return Err(invalid("kappa", format!("must lie strictly inside (-1, 1), got {kappa}")));
    }
    if kappa == 0.0 {
        return uniform_spectrum(n);
    }

    let mut modes = Vec::with_capacity(n);
    let mut zero = vec![0.0; n];
    for (j, a) in zero_mode_odd_amplitudes(n, kappa).into_iter().enumerate() {
        zero[2 * j] = a;
    }
    modes.push(ChainMode { label: ModeLabel::Zero, eigenvalue: 0.0, site_amps: zero });

    let denom = (n + 1) as f64;
    let norm = (2.0 / denom).sqrt();
    for m in 1..=(n - 1) / 2 {
        let energy = staggered_pair_energy(n, kappa, m);
        let theta = staggered_theta(n, kappa, m);
        let q2 = 2.0 * m as f64 * PI / denom;
        for branch in [Branch::Minus, Branch::Plus] {
            let site_amps = (1..=n)
                .map(|site| {
                    if site % 2 == 0 {
                        norm * (q2 * (site / 2) as f64).sin()
                    } else {
                        branch.sign() * norm * (q2 * site.div_ceil(2) as f64 + theta).sin()
                    }
                })
                .collect();
            modes.push(ChainMode {
                label: ModeLabel::Staggered(m, branch),
                eigenvalue: branch.sign() * energy,
                site_amps,
            });
        }
    }
    Ok(ChainSpectrum { n_sites: n, modes })
}

/// Spectrum matching the hopping pattern of `params`.
pub fn spectrum_for(params: &SystemParams) -> Result<ChainSpectrum> {
    match params.pattern {
        HoppingPattern::Uniform => uniform_spectrum(params.n_cavities),
        HoppingPattern::Staggered { kappa } => staggered_spectrum(params.n_cavities, kappa),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::SQRT_2;

    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    use super::*;

    fn residual(spec: &ChainSpectrum, a: &DMatrix<f64>) -> f64 {
        spec.modes
            .iter()
            .map(|mode| {
                let v = nalgebra::DVector::from_column_slice(&mode.site_amps);
                (a * &v - &v * mode.eigenvalue).amax()
            })
            .fold(0.0, f64::max)
    }

    fn completeness_error(spec: &ChainSpectrum) -> f64 {
        let n = spec.n_sites;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = spec.modes.iter().map(|m| m.site_amps[i] * m.site_amps[j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    fn orthonormality_error(spec: &ChainSpectrum) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in spec.modes.iter().enumerate() {
            for (j, b) in spec.modes.iter().enumerate() {
                let s: f64 = a.site_amps.iter().zip(&b.site_amps).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    #[test]
    fn adjacency_entries() {
        let u = adjacency_matrix(3, HoppingPattern::Uniform);
        assert_eq!((u[(0, 1)], u[(1, 2)], u[(1, 0)], u[(0, 2)]), (1.0, 1.0, 1.0, 0.0));
        let s = adjacency_matrix(3, HoppingPattern::Staggered { kappa: -0.2 });
        assert!((s[(0, 1)] - 0.8).abs() < 1e-15);
        assert!((s[(1, 2)] - 1.2).abs() < 1e-15);
        assert_eq!(s, s.transpose());
        assert!((0..3).all(|i| s[(i, i)] == 0.0));
        assert_eq!(
            adjacency_matrix(7, HoppingPattern::Staggered { kappa: 0.0 }),
            adjacency_matrix(7, HoppingPattern::Uniform)
        );
    }

    #[test]
    fn uniform_small_eigenvalues() {
        let e3 = uniform_spectrum(3).unwrap().eigenvalues();
        for (got, want) in e3.iter().zip([-SQRT_2, 0.0, SQRT_2]) {
            assert!((got - want).abs() < 1e-14);
        }
        let e2 = uniform_spectrum(2).unwrap().eigenvalues();
        assert!((e2[0] + 1.0).abs() < 1e-14 && (e2[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_residual_n101() {
        let spec = uniform_spectrum(101).unwrap();
        assert_eq!(spec.modes.len(), 101);
        assert!(residual(&spec, &adjacency_matrix(101, HoppingPattern::Uniform)) < 1e-10);
    }

    #[test]
    fn staggered_rejects_even_chain() {
        assert!(matches!(staggered_spectrum(6, 0.3), Err(Error::EvenStaggeredChain(6))));
    }

    #[test]
    fn staggered_zero_mode_structure() {
        for (n, kappa) in [(5, -0.2), (9, 0.6), (31, -0.8), (301, 0.8)] {
            let spec = staggered_spectrum(n, kappa).unwrap();
            let zero = &spec.modes[0];
            assert_eq!(zero.label, ModeLabel::Zero);
            assert_eq!(zero.eigenvalue, 0.0);
            assert!(zero.site_amps.iter().skip(1).step_by(2).all(|&a| a == 0.0));
            assert!(zero.amp(1) >= 0.0);
            // Successive odd-site amplitudes follow τ.
            let tau = bond_ratio(kappa);
            let (a1, a3) = (zero.amp(1), zero.amp(3));
            if a1 > 1e-200 {
                assert!((a3 / a1 - tau).abs() < 1e-12, "n={n} κ={kappa}");
            }
        }
    }

    #[test]
    fn zero_mode_closed_form_matches_spectrum() {
        for (n, kappa) in [(3, 0.4), (11, -0.2), (101, -0.8), (401, 0.95), (401, -0.95)] {
            let spec = staggered_spectrum(n, kappa).unwrap();
            let zero = &spec.modes[0];
            for site in 1..=n {
                let closed = zero_mode_amplitude(n, kappa, site);
                assert!((closed - zero.amp(site)).abs() < 1e-12, "n={n} κ={kappa} site={site}");
            }
        }
    }

    #[test]
    fn staggered_pairs_are_antisymmetric() {
        let spec = staggered_spectrum(21, 0.35).unwrap();
        for pair in spec.modes[1..].chunks(2) {
            assert!(matches!(pair[0].label, ModeLabel::Staggered(_, Branch::Minus)));
            assert!(matches!(pair[1].label, ModeLabel::Staggered(_, Branch::Plus)));
            assert_eq!(pair[0].eigenvalue, -pair[1].eigenvalue);
            assert!(pair[1].eigenvalue > 0.0);
        }
    }

    #[test]
    fn staggered_matches_dense_eigensolver() {
        let (n, kappa) = (5, -0.2);
        let a = adjacency_matrix(n, HoppingPattern::Staggered { kappa });
        let dense = SymmetricEigen::new(a.clone());
        let spec = staggered_spectrum(n, kappa).unwrap();
        for mode in &spec.modes {
            // Pair each analytic mode with the closest dense eigenvalue, then
            // compare vectors up to sign.
            let (k, gap) = dense
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &e)| (k, (e - mode.eigenvalue).abs()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            assert!(gap < 1e-10, "{:?} gap {gap}", mode.label);
            let col = dense.eigenvectors.column(k);
            let dot: f64 = col.iter().zip(&mode.site_amps).map(|(x, y)| x * y).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-10, "{:?} overlap {dot}", mode.label);
        }
        assert!(residual(&spec, &a) < 1e-12);
    }

    #[test]
    fn staggered_kappa_zero_dispatches_to_uniform() {
        assert_eq!(staggered_spectrum(9, 0.0).unwrap(), uniform_spectrum(9).unwrap());
    }

    #[test]
    fn completeness_large_chains() {
        for spec in [
            uniform_spectrum(401).unwrap(),
            staggered_spectrum(401, -0.8).unwrap(),
            staggered_spectrum(401, 0.8).unwrap(),
            staggered_spectrum(401, 0.05).unwrap(),
        ] {
            assert!(completeness_error(&spec) < 1e-9);
            assert!(orthonormality_error(&spec) < 1e-9);
        }
    }

    #[test]
    fn staggered_converges_to_uniform() {
        let n = 41;
        let target = uniform_spectrum(n).unwrap().sorted_eigenvalues();
        let errors: Vec<f64> = [-0.1, -0.01, -0.001]
            .iter()
            .map(|&k| {
                let got = staggered_spectrum(n, k).unwrap().sorted_eigenvalues();
                got.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
        assert!(errors[2] < 1e-2);
    }

    proptest! {
        #[test]
        fn odd_chains_have_symmetric_spectra(half in 0usize..40, kappa in -0.95..0.95f64, staggered: bool) {
            let n = 2 * half + 1;
            let spec = if staggered { staggered_spectrum(n, kappa).unwrap() } else { uniform_spectrum(n).unwrap() };
            let e = spec.sorted_eigenvalues();
            for (lo, hi) in e.iter().zip(e.iter().rev()) {
                prop_assert!((lo + hi).abs() < 1e-12);
            }
        }

        #[test]
        fn staggered_modes_are_eigenvectors(half in 0usize..60, kappa in -0.99..0.99f64) {
            let n = 2 * half + 1;
            let spec = staggered_spectrum(n, kappa).unwrap();
            prop_assert_eq!(spec.modes.len(), n);
            let a = adjacency_matrix(n, HoppingPattern::Staggered { kappa });
            prop_assert!(residual(&spec, &a) < 1e-10);
            prop_assert!(orthonormality_error(&spec) < 1e-9);
        }
    }
}
