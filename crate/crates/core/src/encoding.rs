//! Multi-site encoding and decoding on the uniform chain.
//!
//! The sender spreads one atomic excitation over the odd sites
//! `1, 3, …, 2k−1` with alternating signs; the receiver projects onto the
//! mirrored window `M_q = N − 2(r−1) + 2q`, `q = 0..r`, in either channel.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{block_eigensystem, SpectralProbe};
use crate::error::{Error, Result};
use crate::lattice;
use crate::model::{Channel, DressedPair, HoppingPattern, RestrictedState, SystemParams};
use crate::sweep::{maximize_probe, Peak, SearchGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingScheme {
    /// Encoded sites.
    pub k: usize,
    /// Decoded sites.
    pub r: usize,
    pub params: SystemParams,
}

impl EncodingScheme {
    pub fn new(params: SystemParams, k: usize, r: usize) -> Result<Self> {
        params.validate()?;
        if params.pattern != HoppingPattern::Uniform {
            return Err(Error::PatternMismatch { expected: "uniform" });
        }
        let n = params.n_cavities;
        if k == 0 || r == 0 {
            return Err(Error::Encoding(format!("k = {k} and r = {r} must both be positive")));
        }
        if 2 * k - 1 > n {
            return Err(Error::Encoding(format!("k = {k} needs {} cavities, have {n}", 2 * k - 1)));
        }
        // M_0 = N − 2(r−1) must clear the encoding window, i.e. M_0 ≥ 2k.
        if n + 2 < 2 * r || n + 2 - 2 * r < 2 * k {
            return Err(Error::Encoding(format!(
                "decoding window of r = {r} overlaps the encoding window of k = {k} on N = {n}"
            )));
        }
        Ok(EncodingScheme { k, r, params })
    }

    /// Scheme with as many decoded as encoded sites.
    pub fn symmetric(params: SystemParams, k: usize) -> Result<Self> {
        Self::new(params, k, k)
    }

    /// 1-indexed encoded sites `2ν + 1`.
    pub fn encoding_sites(&self) -> Vec<usize> {
        (0..self.k).map(|nu| 2 * nu + 1).collect()
    }

    /// 1-indexed decoding sites `M_q`.
    pub fn decoding_sites(&self) -> Vec<usize> {
        let first = self.params.n_cavities + 2 - 2 * self.r;
        (0..self.r).map(|q| first + 2 * q).collect()
    }
}

fn alternating(q: usize) -> f64 {
    if q.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_ν (−1)^ν |2ν+1⟩ ⊗ |e,0⟩ / √k` on a chain of `n` sites.
pub fn encoded_state(n: usize, k: usize) -> Result<RestrictedState> {
    if k == 0 || 2 * k - 1 > n {
        return Err(Error::Encoding(format!("k = {k} does not fit on {n} cavities")));
    }
    let mut state = RestrictedState::zeros(n);
    let w = 1.0 / (k as f64).sqrt();
    for nu in 0..k {
        state.atom_amps[2 * nu] = C64::new(alternating(nu) * w, 0.0);
    }
    Ok(state)
}

pub fn encoded_initial_state(scheme: &EncodingScheme) -> Result<RestrictedState> {
    encoded_state(scheme.params.n_cavities, scheme.k)
}

/// Ideal received state `Σ_q (−1)^q |M_q⟩ ⊗ |channel⟩ / √r`.
pub fn ideal_state(scheme: &EncodingScheme, channel: Channel) -> RestrictedState {
    let mut state = RestrictedState::zeros(scheme.params.n_cavities);
    let w = 1.0 / (scheme.r as f64).sqrt();
    for (q, site) in scheme.decoding_sites().into_iter().enumerate() {
        let amp = C64::new(alternating(q) * w, 0.0);
        match channel {
            Channel::Atom => state.atom_amps[site - 1] = amp,
            Channel::Photon => state.photon_amps[site - 1] = amp,
        }
    }
    state
}

/// Precomputed mode data for evaluating encoded transfer at many times.
#[derive(Clone, Debug)]
pub struct EncodedTransfer {
    scheme: EncodingScheme,
    pairs: Vec<DressedPair>,
    /// `Σ_ν (−1)^ν sin((2ν+1)mπ/(N+1))` per mode.
    encode_sums: Vec<f64>,
}

impl EncodedTransfer {
    pub fn new(scheme: &EncodingScheme) -> Result<Self> {
        let n = scheme.params.n_cavities;
        let spectrum = lattice::uniform_spectrum(n)?;
        let pairs = block_eigensystem(&spectrum, &scheme.params)?.blocks.into_iter().map(|b| b.pair).collect();
        let q = PI / (n + 1) as f64;
        let encode_sums = (1..=n)
            .map(|m| (0..scheme.k).map(|nu| alternating(nu) * (q * ((2 * nu + 1) * m) as f64).sin()).sum())
            .collect();
        Ok(EncodedTransfer { scheme: *scheme, pairs, encode_sums })
    }

    fn prefactor(&self) -> f64 {
        2.0 / ((self.scheme.params.n_cavities + 1) as f64 * (self.scheme.k as f64).sqrt())
    }

    /// `(f̃⁺_{M,m}(t), f̃⁻_{M,m}(t))`, 1-indexed site and mode.
    pub fn f_tilde(&self, site: usize, mode: usize, t: f64) -> (C64, C64) {
        let n = self.scheme.params.n_cavities;
        let pair = &self.pairs[mode - 1];
        let (s, c) = pair.mixing_angle.sin_cos();
        let w = self.prefactor() * (mode as f64 * site as f64 * PI / (n + 1) as f64).sin() * self.encode_sums[mode - 1];
        (C64::from_polar(w * c, -pair.energy_plus * t), C64::from_polar(w * s, -pair.energy_minus * t))
    }

    /// `(μ⁺_{m,q}, μ⁻_{m,q})`: the atom and photon overlap contributions of
    /// mode `m` at decoding slot `q`.
    pub fn mu(&self, mode: usize, q: usize, t: f64) -> (C64, C64) {
        let site = self.scheme.decoding_sites()[q];
        let (fp, fm) = self.f_tilde(site, mode, t);
        let (s, c) = self.pairs[mode - 1].mixing_angle.sin_cos();
        let sign = alternating(q);
        ((fp * c + fm * s) * sign, (fm * c - fp * s) * sign)
    }

    /// `(P_atom, P_photon)` at time `t`.
    pub fn probabilities(&self, t: f64) -> (f64, f64) {
        let n = self.scheme.params.n_cavities;
        let mut atom = C64::new(0.0, 0.0);
        let mut photon = C64::new(0.0, 0.0);
        for mode in 1..=n {
            for q in 0..self.scheme.r {
                let (ma, mp) = self.mu(mode, q, t);
                atom += ma;
                photon += mp;
            }
        }
        let r = self.scheme.r as f64;
        (atom.norm_sqr() / r, photon.norm_sqr() / r)
    }

    /// The same overlap as a spectral sum, for fast repeated evaluation.
    pub fn probe(&self, channel: Channel) -> SpectralProbe {
        let n = self.scheme.params.n_cavities;
        let q = PI / (n + 1) as f64;
        let sites = self.scheme.decoding_sites();
        let norm = self.prefactor() / (self.scheme.r as f64).sqrt();
        let terms = (1..=n).flat_map(|mode| {
            let decode: f64 = sites
                .iter()
                .enumerate()
                .map(|(slot, &site)| alternating(slot) * (q * (mode * site) as f64).sin())
                .sum();
            let pair = &self.pairs[mode - 1];
            let (s, c) = pair.mixing_angle.sin_cos();
            let w = norm * decode * self.encode_sums[mode - 1];
            let (wp, wm) = match channel {
                Channel::Atom => (c * c, s * s),
                Channel::Photon => (-s * c, s * c),
            };
            [(w * wp, pair.energy_plus), (w * wm, pair.energy_minus)]
        });
        SpectralProbe::new(terms)
    }
}

pub fn transfer_probability(scheme: &EncodingScheme, t: f64) -> Result<(f64, f64)> {
    Ok(EncodedTransfer::new(scheme)?.probabilities(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferPeaks {
    pub atom: Peak,
    pub photon: Peak,
}

/// Best transfer time and probability per channel within `window`.
pub fn max_transfer_over_time(scheme: &EncodingScheme, window: (f64, f64), grid: SearchGrid) -> Result<TransferPeaks> {
    let transfer = EncodedTransfer::new(scheme)?;
    Ok(TransferPeaks {
        atom: maximize_probe(&transfer.probe(Channel::Atom), window, grid)?,
        photon: maximize_probe(&transfer.probe(Channel::Photon), window, grid)?,
    })
}
