//! Analytic-versus-oracle consistency checks.
//!
//! Every check draws parameters from a seeded RNG, evaluates the closed-form
//! path and the dense oracle, and records the largest absolute disagreement.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{block_eigensystem, populations, uniform_grid, SiteInjection};
use crate::encoding::{encoded_initial_state, ideal_state, EncodedTransfer, EncodingScheme};
use crate::error::Result;
use crate::lattice;
use crate::model::{initial_state, Channel, HoppingPattern, SystemParams};
use crate::oracle::build_hamiltonian;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub min_n: usize,
    pub max_n: usize,
    /// Random parameter draws per chain length and pattern.
    pub draws: usize,
    /// Evaluation times per draw.
    pub times_per_draw: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Multiply `λ` by `1 + δ` in every analytic evaluation. Negative
    /// control for the harness; `None` in normal runs.
    pub corrupt_coupling: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            min_n: 2,
            max_n: 12,
            draws: 50,
            times_per_draw: 4,
            seed: 0x7770_5043,
            tolerance: 1e-9,
            corrupt_coupling: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

struct Tracker {
    name: &'static str,
    samples: usize,
    max_error: f64,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Tracker { name, samples: 0, max_error: 0.0 }
    }

    fn record(&mut self, err: f64) {
        self.samples += 1;
        // NaN must fail the check.
        if err.is_nan() || err > self.max_error {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
    }

    fn finish(self, tolerance: f64) -> CheckReport {
        CheckReport { name: self.name.to_string(), samples: self.samples, max_error: self.max_error, tolerance }
    }
}

fn draw_params(rng: &mut ChaCha8Rng, n: usize, pattern: HoppingPattern) -> SystemParams {
    let pattern = match pattern {
        HoppingPattern::Uniform => HoppingPattern::Uniform,
        HoppingPattern::Staggered { .. } => HoppingPattern::Staggered { kappa: rng.gen_range(-0.95..0.95) },
    };
    SystemParams {
        n_cavities: n,
        coupling: rng.gen_range(0.0..10.0),
        hopping: rng.gen_range(0.0..2.0),
        detuning: rng.gen_range(-4.0..4.0),
        beta: rng.gen_range(0.0..=FRAC_PI_2),
        pattern,
    }
}

fn analytic(params: &SystemParams, opts: &VerifyOptions) -> SystemParams {
    let mut p = *params;
    if let Some(delta) = opts.corrupt_coupling {
        p.coupling *= 1.0 + delta;
    }
    p
}

fn population_error(params: &SystemParams, opts: &VerifyOptions, times: &[f64]) -> Result<f64> {
    let trace = SiteInjection::for_params(&analytic(params, opts))?.trace(times)?;
    let evolver = build_hamiltonian(params).decompose();
    let psi0 = initial_state(params);
    let mut worst: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let (a, p) = evolver.evolve(&psi0, t)?.populations();
        for s in 0..params.n_cavities {
            worst = worst.max((a[s] - trace.p_atom[i][s]).abs()).max((p[s] - trace.p_photon[i][s]).abs());
        }
    }
    Ok(worst)
}

fn random_times(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(0.0..30.0)).collect()
}

/// Run the full analytic-vs-oracle suite.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lengths = opts.min_n.max(1)..=opts.max_n;

    let mut uniform = Tracker::new("dynamics: uniform populations vs oracle");
    let mut staggered = Tracker::new("dynamics: staggered populations vs oracle");
    let mut spectra = Tracker::new("oracle: dense spectrum vs block eigen-system");
    for n in lengths.clone() {
        for pattern in [HoppingPattern::Uniform, HoppingPattern::Staggered { kappa: 0.5 }] {
            if matches!(pattern, HoppingPattern::Staggered { .. }) && n % 2 == 0 {
                continue;
            }
            for _ in 0..opts.draws {
                let params = draw_params(&mut rng, n, pattern);
                let times = random_times(&mut rng, opts.times_per_draw);
                let err = population_error(&params, opts, &times)?;
                match pattern {
                    HoppingPattern::Uniform => uniform.record(err),
                    HoppingPattern::Staggered { .. } => staggered.record(err),
                }
                let a = analytic(&params, opts);
                let blocks = block_eigensystem(&lattice::spectrum_for(&a)?, &a)?.sorted_energies();
                let dense = build_hamiltonian(&params).decompose().sorted_energies();
                spectra.record(blocks.iter().zip(&dense).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            }
        }
    }

    let mut encoding = Tracker::new("encoding: transfer overlaps vs oracle");
    for k in 1..=3 {
        for n in lengths.clone().filter(|&n| n + 2 >= 4 * k) {
            for _ in 0..opts.draws {
                let params = draw_params(&mut rng, n, HoppingPattern::Uniform);
                let scheme = EncodingScheme::symmetric(params, k)?;
                let transfer = EncodedTransfer::new(&EncodingScheme { params: analytic(&params, opts), ..scheme })?;
                let evolver = build_hamiltonian(&params).decompose();
                let psi0 = encoded_initial_state(&scheme)?;
                let targets = Channel::BOTH.map(|c| ideal_state(&scheme, c));
                for t in random_times(&mut rng, opts.times_per_draw) {
                    let psi = evolver.evolve(&psi0, t)?;
                    let (pa, pp) = transfer.probabilities(t);
                    encoding.record((targets[0].inner(&psi).norm_sqr() - pa).abs());
                    encoding.record((targets[1].inner(&psi).norm_sqr() - pp).abs());
                }
            }
        }
    }

    let mut residuals = Tracker::new("lattice: eigen-residual and orthonormality");
    for n in lengths.clone() {
        let mut patterns = vec![HoppingPattern::Uniform];
        if n % 2 == 1 {
            patterns.extend([-0.8, -0.2, 0.3, 0.9].map(|kappa| HoppingPattern::Staggered { kappa }));
        }
        for pattern in patterns {
            let spec = match pattern {
                HoppingPattern::Uniform => lattice::uniform_spectrum(n)?,
                HoppingPattern::Staggered { kappa } => lattice::staggered_spectrum(n, kappa)?,
            };
            residuals.record(lattice_error(&spec, &lattice::adjacency_matrix(n, pattern)));
        }
    }

    let mut limit = Tracker::new("limit: staggered κ = 0 vs uniform");
    for n in lengths.filter(|n| n % 2 == 1) {
        let params = draw_params(&mut rng, n, HoppingPattern::Uniform);
        let times = uniform_grid(0.0, 20.0, 41);
        let u = populations(&analytic(&params, opts), &times)?;
        let mut sp = params;
        sp.pattern = HoppingPattern::Staggered { kappa: 0.0 };
        let s = populations(&sp, &times)?;
        let err = u
            .p_atom
            .iter()
            .flatten()
            .zip(s.p_atom.iter().flatten())
            .chain(u.p_photon.iter().flatten().zip(s.p_photon.iter().flatten()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        limit.record(err);
    }

    Ok(VerifyReport {
        checks: vec![
            uniform.finish(opts.tolerance),
            staggered.finish(opts.tolerance),
            spectra.finish(opts.tolerance),
            encoding.finish(opts.tolerance),
            residuals.finish(opts.tolerance),
            limit.finish(1e-10),
        ],
    })
}

/// Largest of the eigen-equation residual `|Av − εv|` and the deviation of
/// the mode Gram matrix from the identity.
pub fn lattice_error(spec: &lattice::ChainSpectrum, adjacency: &nalgebra::DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in spec.modes.iter().enumerate() {
        let v = nalgebra::DVector::from_column_slice(&a.site_amps);
        worst = worst.max((adjacency * &v - &v * a.eigenvalue).amax());
        for b in &spec.modes[i..] {
            let dot: f64 = a.site_amps.iter().zip(&b.site_amps).map(|(x, y)| x * y).sum();
            let target = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}
