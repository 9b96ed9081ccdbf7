//! Shared domain types and the single-cavity two-photon Jaynes-Cummings
//! spectrum.
//!
//! Units: ħ = 1. Sites are 1-indexed in every public accessor (`M = 1..=N`);
//! storage is 0-indexed.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Intercavity hopping profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HoppingPattern {
    /// Identical tunneling `ξ` on every bond.
    Uniform,
    /// Bond `(i, i+1)` carries `ξ·(1 − κ(−1)^i)`.
    Staggered { kappa: f64 },
}

impl HoppingPattern {
    pub fn kappa(&self) -> Option<f64> {
        match *self {
            HoppingPattern::Uniform => None,
            HoppingPattern::Staggered { kappa } => Some(kappa),
        }
    }
}

/// Which half of the restricted basis a probability refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// `|e, 0⟩`: atomic excitation.
    Atom,
    /// `|g, 2⟩`: photon pair.
    Photon,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Atom, Channel::Photon];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Atom => "atom",
            Channel::Photon => "photon",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atom" => Ok(Channel::Atom),
            "photon" => Ok(Channel::Photon),
            other => Err(Error::Parse(format!("unknown channel `{other}`"))),
        }
    }
}

/// All constants of the cavity array in one validated record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_cavities: usize,
    /// Two-photon atom-cavity coupling `λ`.
    pub coupling: f64,
    /// Two-photon intercavity tunneling `ξ`.
    pub hopping: f64,
    /// `Δ = ω_a − 2ω_c`.
    pub detuning: f64,
    /// Mixing angle of the initial polariton in cavity 1, in `[0, π/2]`.
    pub beta: f64,
    pub pattern: HoppingPattern,
}

impl SystemParams {
    /// Validated constructor.
    pub fn new(
        n_cavities: usize,
        coupling: f64,
        hopping: f64,
        detuning: f64,
        beta: f64,
        pattern: HoppingPattern,
    ) -> Result<Self> {
        let params = SystemParams { n_cavities, coupling, hopping, detuning, beta, pattern };
        params.validate()?;
        Ok(params)
    }

    /// Uniform chain with `Δ = 0`.
    pub fn uniform(n_cavities: usize, coupling: f64, hopping: f64, beta: f64) -> Result<Self> {
        Self::new(n_cavities, coupling, hopping, 0.0, beta, HoppingPattern::Uniform)
    }

    /// Staggered chain with `Δ = 0`.
    pub fn staggered(n_cavities: usize, coupling: f64, hopping: f64, beta: f64, kappa: f64) -> Result<Self> {
        Self::new(n_cavities, coupling, hopping, 0.0, beta, HoppingPattern::Staggered { kappa })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cavities == 0 {
            return Err(invalid("n_cavities", "need at least one cavity"));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(invalid("coupling", format!("must be finite and >= 0, got {}", self.coupling)));
        }
        if !(self.hopping.is_finite() && self.hopping >= 0.0) {
            return Err(invalid("hopping", format!("must be finite and >= 0, got {}", self.hopping)));
        }
        if !self.detuning.is_finite() {
            return Err(invalid("detuning", "must be finite"));
        }
        if !(self.beta.is_finite() && (0.0..=FRAC_PI_2).contains(&self.beta)) {
            return Err(invalid("beta", format!("must lie in [0, π/2], got {}", self.beta)));
        }
        if let HoppingPattern::Staggered { kappa } = self.pattern {
            if !(kappa.is_finite() && kappa > -1.0 && kappa < 1.0) {
                return Err(invalid("kappa", format!("must lie strictly inside (-1, 1), got {kappa}")));
            }
            if self.n_cavities.is_multiple_of(2) {
                return Err(Error::EvenStaggeredChain(self.n_cavities));
            }
        }
        Ok(())
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate().map(|_| self)
    }

    pub fn with_n_cavities(mut self, n: usize) -> Result<Self> {
        self.n_cavities = n;
        self.validate().map(|_| self)
    }
}

/// One cavity of the two-photon JC model in the `{|e, n−2⟩, |g, n⟩}` sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleCavityParams {
    pub omega_a: f64,
    pub omega_c: f64,
    pub lambda: f64,
    pub n_photons: u32,
}

impl SingleCavityParams {
    pub fn detuning(&self) -> f64 {
        self.omega_a - 2.0 * self.omega_c
    }

    /// The symmetric sector matrix `[[a, b], [b, d]]` in the
    /// `(|e, n−2⟩, |g, n⟩)` basis, returned as `(a, b, d)`.
    pub fn sector_matrix(&self) -> Result<(f64, f64, f64)> {
        if self.n_photons < 2 {
            return Err(Error::PhotonSector(self.n_photons));
        }
        let n = f64::from(self.n_photons);
        let a = self.omega_a + (n - 2.0) * self.omega_c;
        let b = self.lambda * (n * (n - 1.0)).sqrt();
        let d = n * self.omega_c;
        Ok((a, b, d))
    }
}

/// Dressed eigen-pair of a real symmetric 2×2 block written in an
/// (excited-atom, ground-plus-photons) basis.
///
/// The angle follows the convention
/// `|+⟩ = cos φ |upper⟩ − sin φ |lower⟩`, `|−⟩ = sin φ |upper⟩ + cos φ |lower⟩`
/// where "upper" is the atomic-excitation component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedPair {
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub mixing_angle: f64,
}

impl DressedPair {
    /// Exact diagonalization of `[[a, b], [b, d]]`.
    pub fn diagonalize(a: f64, b: f64, d: f64) -> Self {
        let mean = 0.5 * (a + d);
        let half_gap = 0.5 * (a - d);
        let radius = half_gap.hypot(b);
        // (cos θ, sin θ) is the upper eigenvector for tan 2θ = 2b / (a − d).
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        DressedPair { energy_plus: mean + radius, energy_minus: mean - radius, mixing_angle: -theta }
    }

    /// `|+⟩` as (atom, photon) components.
    pub fn plus_state(&self) -> [f64; 2] {
        let (s, c) = self.mixing_angle.sin_cos();
        [c, -s]
    }

    /// `|−⟩` as (atom, photon) components.
    pub fn minus_state(&self) -> [f64; 2] {
        let (s, c) = self.mixing_angle.sin_cos();
        [s, c]
    }
}

/// `λ = g₁g₂/δ` from adiabatic elimination of the intermediate level.
pub fn effective_coupling(g1: f64, g2: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    Ok(g1 * g2 / delta)
}

/// Dressed spectrum of one cavity in the `n`-photon sector.
pub fn jc_spectrum(p: &SingleCavityParams) -> Result<DressedPair> {
    let (a, b, d) = p.sector_matrix()?;
    Ok(DressedPair::diagonalize(a, b, d))
}

/// Complex amplitudes over the restricted basis
/// `{|M⟩⊗|e,0⟩, |M⟩⊗|g,2⟩}`, `M = 1..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedState {
    pub atom_amps: Vec<C64>,
    pub photon_amps: Vec<C64>,
}

impl RestrictedState {
    pub fn zeros(n: usize) -> Self {
        RestrictedState { atom_amps: vec![C64::new(0.0, 0.0); n], photon_amps: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn n_sites(&self) -> usize {
        self.atom_amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.atom_amps.iter().chain(&self.photon_amps).map(|z| z.norm_sqr()).sum()
    }

    /// Atomic amplitude at 1-indexed `site`.
    pub fn atom(&self, site: usize) -> C64 {
        self.atom_amps[site - 1]
    }

    /// Photonic amplitude at 1-indexed `site`.
    pub fn photon(&self, site: usize) -> C64 {
        self.photon_amps[site - 1]
    }

    pub fn populations(&self) -> (Vec<f64>, Vec<f64>) {
        (self.atom_amps.iter().map(|z| z.norm_sqr()).collect(), self.photon_amps.iter().map(|z| z.norm_sqr()).collect())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &RestrictedState) -> C64 {
        self.atom_amps
            .iter()
            .zip(&other.atom_amps)
            .chain(self.photon_amps.iter().zip(&other.photon_amps))
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Interleaved site-major vector `(atom_1, photon_1, atom_2, …)`.
    pub fn to_interleaved(&self) -> Vec<C64> {
        self.atom_amps.iter().zip(&self.photon_amps).flat_map(|(&a, &p)| [a, p]).collect()
    }

    pub fn from_interleaved(v: &[C64]) -> Self {
        let atom_amps = v.iter().step_by(2).copied().collect();
        let photon_amps = v.iter().skip(1).step_by(2).copied().collect();
        RestrictedState { atom_amps, photon_amps }
    }
}

/// `|1⟩ ⊗ (cos β |g,2⟩ + sin β |e,0⟩)`.
pub fn initial_state(params: &SystemParams) -> RestrictedState {
    let mut state = RestrictedState::zeros(params.n_cavities);
    let (s, c) = params.beta.sin_cos();
    state.atom_amps[0] = C64::new(s, 0.0);
    state.photon_amps[0] = C64::new(c, 0.0);
    state
}
