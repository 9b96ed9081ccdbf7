//! Closed-form evolution in the restricted single-excitation sector.
//!
//! The restricted Hamiltonian is block diagonal in the chain eigenmodes:
//! mode `υ` with adjacency eigenvalue `ε_υ` carries the 2×2 block
//! `[[Δ/2, √2λ], [√2λ, −Δ/2 + 2ξε_υ]]` over `(|e,0⟩, |g,2⟩)`. Injecting the
//! polariton `cos β |g,2⟩ + sin β |e,0⟩` into site 1 gives site amplitudes
//!
//! ```text
//! atom_s(t)   = Σ_υ c_υ c′_υ(s) [ cos α sin(β−α) e^{−iE₊t} + sin α cos(β−α) e^{−iE₋t} ]
//! photon_s(t) = Σ_υ c_υ c′_υ(s) [−sin α sin(β−α) e^{−iE₊t} + cos α cos(β−α) e^{−iE₋t} ]
//! ```
//!
//! with `c_υ = ⟨υ|1⟩`, `c′_υ(s) = ⟨s|υ⟩`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, ChainSpectrum, ModeLabel};
use crate::model::{Channel, DressedPair, HoppingPattern, RestrictedState, SystemParams};

/// Dressed eigen-pair of one chain-mode block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeBlock {
    pub label: ModeLabel,
    /// Adjacency eigenvalue `ε_υ`.
    pub mode_energy: f64,
    pub pair: DressedPair,
}

impl ModeBlock {
    pub fn alpha(&self) -> f64 {
        self.pair.mixing_angle
    }
}

/// One [`ModeBlock`] per chain mode, in spectrum order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEigenSystem {
    pub blocks: Vec<ModeBlock>,
}

impl BlockEigenSystem {
    /// Every `E±^υ`, unsorted.
    pub fn energies(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| [b.pair.energy_plus, b.pair.energy_minus]).collect()
    }

    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut e = self.energies();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// The 2×2 block `(a, b, d)` for adjacency eigenvalue `eps`.
pub fn block_matrix(params: &SystemParams, eps: f64) -> (f64, f64, f64) {
    let half_delta = 0.5 * params.detuning;
    (half_delta, SQRT_2 * params.coupling, -half_delta + 2.0 * params.hopping * eps)
}

pub fn block_eigensystem(spectrum: &ChainSpectrum, params: &SystemParams) -> Result<BlockEigenSystem> {
    if spectrum.n_sites != params.n_cavities {
        return Err(Error::DimensionMismatch { expected: params.n_cavities, actual: spectrum.n_sites });
    }
    let blocks = spectrum
        .modes
        .iter()
        .map(|mode| {
            let (a, b, d) = block_matrix(params, mode.eigenvalue);
            ModeBlock { label: mode.label, mode_energy: mode.eigenvalue, pair: DressedPair::diagonalize(a, b, d) }
        })
        .collect();
    Ok(BlockEigenSystem { blocks })
}

/// `tan α = −√{[(Δ−2E₊)² + 8λ²] / [(Δ−2E₋)² + 8λ²]}`, the printed closed
/// form, kept as a cross-check on the diagonalized angle.
pub fn tan_alpha_closed_form(params: &SystemParams, pair: &DressedPair) -> f64 {
    let l2 = 8.0 * params.coupling * params.coupling;
    let num = (params.detuning - 2.0 * pair.energy_plus).powi(2) + l2;
    let den = (params.detuning - 2.0 * pair.energy_minus).powi(2) + l2;
    -(num / den).sqrt()
}

/// Site- and channel-resolved populations on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationTrace {
    pub params: SystemParams,
    pub times: Vec<f64>,
    /// `p_atom[t][s]`, site `s` 0-indexed.
    pub p_atom: Vec<Vec<f64>>,
    pub p_photon: Vec<Vec<f64>>,
}

impl PopulationTrace {
    /// Largest `|Σ_s (P_atom,s + P_photon,s) − 1|` over the grid.
    pub fn max_norm_error(&self) -> f64 {
        self.p_atom
            .iter()
            .zip(&self.p_photon)
            .map(|(a, p)| (a.iter().sum::<f64>() + p.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn channel(&self, channel: Channel) -> &[Vec<f64>] {
        match channel {
            Channel::Atom => &self.p_atom,
            Channel::Photon => &self.p_photon,
        }
    }

    /// Time series of one channel at 1-indexed `site`.
    pub fn site_series(&self, channel: Channel, site: usize) -> Vec<f64> {
        self.channel(channel).iter().map(|row| row[site - 1]).collect()
    }

    /// `(t, P)` at the largest sample of a site series.
    pub fn peak(&self, channel: Channel, site: usize) -> (f64, f64) {
        self.site_series(channel, site)
            .into_iter()
            .zip(&self.times)
            .fold((f64::NAN, f64::NEG_INFINITY), |best, (p, &t)| if p > best.1 { (t, p) } else { best })
    }
}

/// A probability of the form `|Σ_j w_j e^{−iE_j t}|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProbe {
    terms: Vec<(f64, f64)>,
}

impl SpectralProbe {
    /// Terms are `(weight, energy)` pairs; vanishing weights are dropped.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        SpectralProbe { terms: terms.into_iter().filter(|(w, _)| *w != 0.0).collect() }
    }

    pub fn amplitude(&self, t: f64) -> C64 {
        self.terms.iter().map(|&(w, e)| C64::from_polar(w, -e * t)).sum()
    }

    pub fn probability(&self, t: f64) -> f64 {
        self.amplitude(t).norm_sqr()
    }

    /// Spread `max E − min E` of the contributing energies.
    pub fn bandwidth(&self) -> f64 {
        let (lo, hi) =
            self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, e)| (lo.min(e), hi.max(e)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Closed-form solution for the site-1 polariton injection.
///
/// `initial[υ] = c_υ` and `site_coeffs[(s−1)·n_modes + υ] = c′_υ(s)`.
#[derive(Clone, Debug)]
pub struct SiteInjection {
    params: SystemParams,
    blocks: Vec<ModeBlock>,
    initial: Vec<f64>,
    site_coeffs: Vec<f64>,
}

impl SiteInjection {
    /// Uniform chain: `c_m c′_m(s) = (2/(N+1)) sin(mπ/(N+1)) sin(msπ/(N+1))`
    /// paired with `ε_m = −2cos(mπ/(N+1))`. Site amplitudes carry an extra
    /// `(−1)^{s+1}` relative to true evolution; populations are exact.
    pub fn uniform(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        if params.pattern != HoppingPattern::Uniform {
            return Err(Error::PatternMismatch { expected: "uniform" });
        }
        let n = params.n_cavities;
        let spectrum = lattice::uniform_spectrum(n)?;
        let blocks = block_eigensystem(&spectrum, params)?.blocks;
        let norm = (2.0 / (n + 1) as f64).sqrt();
        let q = PI / (n + 1) as f64;
        let initial = (1..=n).map(|m| norm * (q * m as f64).sin()).collect();
        let mut site_coeffs = Vec::with_capacity(n * n);
        for s in 1..=n {
            site_coeffs.extend((1..=n).map(|m| norm * (q * (m * s) as f64).sin()));
        }
        Ok(SiteInjection { params: *params, blocks, initial, site_coeffs })
    }

    /// Staggered chain, coefficients from [`site_coefficients_staggered`].
    pub fn staggered(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let HoppingPattern::Staggered { kappa } = params.pattern else {
            return Err(Error::PatternMismatch { expected: "staggered" });
        };
        let n = params.n_cavities;
        let spectrum = lattice::staggered_spectrum(n, kappa)?;
        let blocks = block_eigensystem(&spectrum, params)?.blocks;
        let initial = site_coefficients_staggered(&spectrum, kappa, 1);
        let mut site_coeffs = Vec::with_capacity(n * n);
        for s in 1..=n {
            site_coeffs.extend(site_coefficients_staggered(&spectrum, kappa, s));
        }
        Ok(SiteInjection { params: *params, blocks, initial, site_coeffs })
    }

    pub fn for_params(params: &SystemParams) -> Result<Self> {
        match params.pattern {
            HoppingPattern::Uniform => Self::uniform(params),
            HoppingPattern::Staggered { .. } => Self::staggered(params),
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn blocks(&self) -> &[ModeBlock] {
        &self.blocks
    }

    fn n_modes(&self) -> usize {
        self.blocks.len()
    }

    fn coeff(&self, site: usize, mode: usize) -> f64 {
        self.site_coeffs[(site - 1) * self.n_modes() + mode]
    }

    /// `(f⁺, f⁻)` for 1-indexed `site` and 0-indexed mode slot.
    fn dressed_amplitudes(&self, site: usize, mode: usize, t: f64) -> (C64, C64) {
        let block = &self.blocks[mode];
        let weight = self.initial[mode] * self.coeff(site, mode);
        let (s, c) = (self.params.beta - block.alpha()).sin_cos();
        (
            C64::from_polar(weight * s, -block.pair.energy_plus * t),
            C64::from_polar(weight * c, -block.pair.energy_minus * t),
        )
    }

    /// `(atom, photon)` amplitudes at 1-indexed `site`.
    pub fn site_amplitudes(&self, site: usize, t: f64) -> (C64, C64) {
        let mut atom = C64::new(0.0, 0.0);
        let mut photon = C64::new(0.0, 0.0);
        for mode in 0..self.n_modes() {
            let (fp, fm) = self.dressed_amplitudes(site, mode, t);
            let (s, c) = self.blocks[mode].alpha().sin_cos();
            atom += fp * c + fm * s;
            photon += fm * c - fp * s;
        }
        (atom, photon)
    }

    /// Populations of every site at one time.
    pub fn populations_at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.params.n_cavities;
        // Per-mode dressed coefficients are shared across sites.
        let branch: Vec<(C64, C64)> = self
            .blocks
            .iter()
            .zip(&self.initial)
            .map(|(block, &c0)| {
                let (sb, cb) = (self.params.beta - block.alpha()).sin_cos();
                let (sa, ca) = block.alpha().sin_cos();
                let plus = C64::from_polar(c0 * sb, -block.pair.energy_plus * t);
                let minus = C64::from_polar(c0 * cb, -block.pair.energy_minus * t);
                (plus * ca + minus * sa, minus * ca - plus * sa)
            })
            .collect();
        let mut p_atom = Vec::with_capacity(n);
        let mut p_photon = Vec::with_capacity(n);
        for site in 1..=n {
            let row = &self.site_coeffs[(site - 1) * self.n_modes()..site * self.n_modes()];
            let (mut a, mut p) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for (&w, &(ba, bp)) in row.iter().zip(&branch) {
                a += ba * w;
                p += bp * w;
            }
            p_atom.push(a.norm_sqr());
            p_photon.push(p.norm_sqr());
        }
        (p_atom, p_photon)
    }

    pub fn trace(&self, times: &[f64]) -> Result<PopulationTrace> {
        if times.is_empty() {
            return Err(Error::EmptyTimeGrid);
        }
        let rows: Vec<(Vec<f64>, Vec<f64>)> = times.par_iter().map(|&t| self.populations_at(t)).collect();
        let (p_atom, p_photon) = rows.into_iter().unzip();
        Ok(PopulationTrace { params: self.params, times: times.to_vec(), p_atom, p_photon })
    }

    /// Probability of `channel` at 1-indexed `site` as a spectral sum.
    pub fn probe(&self, site: usize, channel: Channel) -> SpectralProbe {
        let terms = (0..self.n_modes()).flat_map(|mode| {
            let block = &self.blocks[mode];
            let weight = self.initial[mode] * self.coeff(site, mode);
            let (sb, cb) = (self.params.beta - block.alpha()).sin_cos();
            let (sa, ca) = block.alpha().sin_cos();
            let (wp, wm) = match channel {
                Channel::Atom => (ca * sb, sa * cb),
                Channel::Photon => (-sa * sb, ca * cb),
            };
            [(weight * wp, block.pair.energy_plus), (weight * wm, block.pair.energy_minus)]
        });
        SpectralProbe::new(terms)
    }
}

/// `(f⁺_{M,m}(t), f⁻_{M,m}(t))` for the uniform chain, 1-indexed `site`
/// and `mode`.
pub fn amplitudes_uniform(params: &SystemParams, site: usize, mode: usize, t: f64) -> Result<(C64, C64)> {
    if params.pattern != HoppingPattern::Uniform {
        return Err(Error::PatternMismatch { expected: "uniform" });
    }
    let n = params.n_cavities;
    if !(1..=n).contains(&site) || !(1..=n).contains(&mode) {
        return Err(Error::InvalidParameter {
            name: "site/mode",
            reason: format!("site {site} and mode {mode} must lie in 1..={n}"),
        });
    }
    let q = mode as f64 * PI / (n + 1) as f64;
    let eps = -2.0 * q.cos();
    let (a, b, d) = block_matrix(params, eps);
    let pair = DressedPair::diagonalize(a, b, d);
    let weight = 2.0 / (n + 1) as f64 * q.sin() * (q * site as f64).sin();
    let (s, c) = (params.beta - pair.mixing_angle).sin_cos();
    Ok((C64::from_polar(weight * s, -pair.energy_plus * t), C64::from_polar(weight * c, -pair.energy_minus * t)))
}

pub fn populations_uniform(params: &SystemParams, times: &[f64]) -> Result<PopulationTrace> {
    if times.is_empty() {
        return Err(Error::EmptyTimeGrid);
    }
    SiteInjection::uniform(params)?.trace(times)
}

/// `c′_υ(s)` for every mode of `spectrum`, in spectrum order.
///
/// Odd `s`: `c′_o ∝ τ^{(s−1)/2}` and
/// `c′_{m+} = −c′_{m−} = √(2/(N+1)) sin((s+1)mπ/(N+1) + θ_m)`.
/// Even `s`: `c′_o = 0` and `c′_{m+} = c′_{m−} = √(2/(N+1)) sin(smπ/(N+1))`.
/// Uniform-labelled modes (the `κ = 0` dispatch) use the spectrum's own
/// amplitudes.
pub fn site_coefficients_staggered(spectrum: &ChainSpectrum, kappa: f64, site: usize) -> Vec<f64> {
    let n = spectrum.n_sites;
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let q = PI / (n + 1) as f64;
    spectrum
        .modes
        .iter()
        .map(|mode| match mode.label {
            ModeLabel::Zero => lattice::zero_mode_amplitude(n, kappa, site),
            ModeLabel::Uniform(_) => mode.amp(site),
            ModeLabel::Staggered(m, branch) => {
                if site.is_multiple_of(2) {
                    norm * (q * (site * m) as f64).sin()
                } else {
                    let theta = lattice::staggered_theta(n, kappa, m);
                    branch.sign() * norm * (q * ((site + 1) * m) as f64 + theta).sin()
                }
            }
        })
        .collect()
}

pub fn populations_staggered(params: &SystemParams, times: &[f64]) -> Result<PopulationTrace> {
    if times.is_empty() {
        return Err(Error::EmptyTimeGrid);
    }
    SiteInjection::staggered(params)?.trace(times)
}

/// Populations for whichever hopping pattern `params` carries.
pub fn populations(params: &SystemParams, times: &[f64]) -> Result<PopulationTrace> {
    match params.pattern {
        HoppingPattern::Uniform => populations_uniform(params, times),
        HoppingPattern::Staggered { .. } => populations_staggered(params, times),
    }
}

/// End-site (`s = N`) probability of one channel after site-1 injection.
pub fn end_site_probe(params: &SystemParams, channel: Channel) -> Result<SpectralProbe> {
    Ok(SiteInjection::for_params(params)?.probe(params.n_cavities, channel))
}

/// `n` evenly spaced points covering `[start, end]`.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { end } else { start + step * i as f64 }).collect()
        }
    }
}

/// Spectral propagator for arbitrary restricted states, built from the
/// chain modes and block eigen-pairs.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    spectrum: ChainSpectrum,
    blocks: BlockEigenSystem,
}

impl SpectralPropagator {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let spectrum = lattice::spectrum_for(params)?;
        let blocks = block_eigensystem(&spectrum, params)?;
        Ok(SpectralPropagator { spectrum, blocks })
    }

    pub fn spectrum(&self) -> &ChainSpectrum {
        &self.spectrum
    }

    pub fn blocks(&self) -> &BlockEigenSystem {
        &self.blocks
    }

    /// Coordinates of `state` in the dressed basis: `(⟨υ,+|ψ⟩, ⟨υ,−|ψ⟩)`.
    pub fn dressed_coordinates(&self, state: &RestrictedState) -> Result<Vec<(C64, C64)>> {
        if state.n_sites() != self.spectrum.n_sites {
            return Err(Error::DimensionMismatch { expected: self.spectrum.n_sites, actual: state.n_sites() });
        }
        let atom = self.spectrum.project(&state.atom_amps);
        let photon = self.spectrum.project(&state.photon_amps);
        Ok(self
            .blocks
            .blocks
            .iter()
            .zip(atom.into_iter().zip(photon))
            .map(|(block, (a, p))| {
                let [pa, pp] = block.pair.plus_state();
                let [ma, mp] = block.pair.minus_state();
                (a * pa + p * pp, a * ma + p * mp)
            })
            .collect())
    }

    pub fn evolve(&self, state: &RestrictedState, t: f64) -> Result<RestrictedState> {
        let coords = self.dressed_coordinates(state)?;
        let n = self.spectrum.n_sites;
        let mut out = RestrictedState::zeros(n);
        for ((mode, block), (cp, cm)) in self.spectrum.modes.iter().zip(&self.blocks.blocks).zip(coords) {
            let plus = cp * C64::from_polar(1.0, -block.pair.energy_plus * t);
            let minus = cm * C64::from_polar(1.0, -block.pair.energy_minus * t);
            let [pa, pp] = block.pair.plus_state();
            let [ma, mp] = block.pair.minus_state();
            let atom = plus * pa + minus * ma;
            let photon = plus * pp + minus * mp;
            for (site, &v) in mode.site_amps.iter().enumerate() {
                out.atom_amps[site] += atom * v;
                out.photon_amps[site] += photon * v;
            }
        }
        Ok(out)
    }
}
