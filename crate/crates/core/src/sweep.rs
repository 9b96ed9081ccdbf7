//! Arrival-peak searches and parameter scans.
//!
//! A peak search scans a uniform coarse grid, takes the earliest global
//! maximum, and refines it by golden-section search inside the two
//! neighbouring grid cells.

use std::f64::consts::TAU;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{end_site_probe, uniform_grid, SpectralProbe};
use crate::encoding::{max_transfer_over_time, EncodingScheme};
use crate::error::{invalid, Error, Result};
use crate::model::{Channel, HoppingPattern, SystemParams};

/// Default number of coarse samples.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default refinement bracket, in units of `1/ξ`.
pub const DEFAULT_REFINE_TOLERANCE: f64 = 1e-4;
/// Minimum coarse samples per period of the fastest spectral beat.
pub const SAMPLES_PER_BEAT: f64 = 8.0;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub time: f64,
    pub probability: f64,
}

/// Coarse-grid size and refinement tolerance of a peak search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub grid_points: usize,
    pub refine_tolerance: f64,
}

impl SearchGrid {
    pub fn new(grid_points: usize, refine_tolerance: f64) -> Result<Self> {
        if grid_points < 2 {
            return Err(invalid("grid_points", "need at least 2 coarse points"));
        }
        if !(refine_tolerance.is_finite() && refine_tolerance > 0.0) {
            return Err(invalid("refine_tolerance", "must be finite and > 0"));
        }
        Ok(SearchGrid { grid_points, refine_tolerance })
    }

    /// Raise the point count until the grid resolves beats of frequency
    /// `bandwidth` with [`SAMPLES_PER_BEAT`] samples.
    pub fn resolving(self, window: (f64, f64), bandwidth: f64) -> Self {
        let span = window.1 - window.0;
        let needed = (SAMPLES_PER_BEAT * span * bandwidth / TAU).ceil();
        let needed = if needed.is_finite() { needed as usize + 1 } else { self.grid_points };
        SearchGrid { grid_points: self.grid_points.max(needed), ..self }
    }
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (start, end) = window;
    if !(start.is_finite() && end.is_finite() && start >= 0.0 && end > start) {
        return Err(Error::EmptyWindow { start, end });
    }
    Ok(())
}

/// Golden-section maximization of `f` on `[lo, hi]` until the bracket is
/// narrower than `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Peak {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        Peak { time: x1, probability: f1 }
    } else {
        Peak { time: x2, probability: f2 }
    }
}

/// Global maximum of `f` over `window`: grid scan, then golden-section
/// refinement around the earliest best grid point. The result is never
/// below the best grid sample.
pub fn maximize(f: impl Fn(f64) -> f64 + Sync, window: (f64, f64), grid: SearchGrid) -> Result<Peak> {
    check_window(window)?;
    let times = uniform_grid(window.0, window.1, grid.grid_points);
    let values: Vec<f64> = times.par_iter().map(|&t| f(t)).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let coarse = Peak { time: times[best], probability: values[best] };
    let lo = times[best.saturating_sub(1)];
    let hi = times[(best + 1).min(times.len() - 1)];
    let refined = golden_section_max(&f, lo, hi, grid.refine_tolerance);
    Ok(if refined.probability > coarse.probability { refined } else { coarse })
}

/// Peak of a spectral probe with the grid raised to resolve its bandwidth.
pub fn maximize_probe(probe: &SpectralProbe, window: (f64, f64), grid: SearchGrid) -> Result<Peak> {
    let grid = grid.resolving(window, probe.bandwidth());
    maximize(|t| probe.probability(t), window, grid)
}

/// Arrival time and height of the end-site probability peak for one
/// channel after site-1 injection.
pub fn optimal_time(
    params: &SystemParams,
    channel: Channel,
    window: (f64, f64),
    grid_points: usize,
    refine_tolerance: f64,
) -> Result<Peak> {
    check_window(window)?;
    let grid = SearchGrid::new(grid_points, refine_tolerance)?;
    maximize_probe(&end_site_probe(params, channel)?, window, grid)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    SystemSize,
    Beta,
    Kappa,
    EncodingK,
    Hopping,
}

impl SweepAxis {
    pub fn is_integral(self) -> bool {
        matches!(self, SweepAxis::SystemSize | SweepAxis::EncodingK)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TimeWindow {
    /// `[0, end]` for every point.
    Fixed { end: f64 },
    /// `[0, factor·N/ξ]`, following the ballistic arrival time.
    Ballistic { factor: f64 },
}

impl TimeWindow {
    pub fn resolve(&self, params: &SystemParams) -> Result<(f64, f64)> {
        let end = match *self {
            TimeWindow::Fixed { end } => end,
            TimeWindow::Ballistic { factor } => {
                if params.hopping <= 0.0 {
                    return Err(invalid("hopping", "a ballistic time window needs ξ > 0"));
                }
                factor * params.n_cavities as f64 / params.hopping
            }
        };
        check_window((0.0, end))?;
        Ok((0.0, end))
    }
}

impl Default for TimeWindow {
    fn default() -> Self {
        TimeWindow::Ballistic { factor: 2.0 }
    }
}

/// Encoded-transfer settings for a scan; `r = None` decodes on `k` sites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub k: usize,
    pub r: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub fixed: SystemParams,
    pub time_window: TimeWindow,
    pub grid_points: usize,
    /// Refinement bracket in units of `1/ξ` of each point.
    pub refine_tolerance: f64,
    /// Score encoded transfer instead of site-1 injection.
    pub encoding: Option<EncodingSpec>,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>, fixed: SystemParams) -> Self {
        SweepSpec {
            axis,
            values,
            fixed,
            time_window: TimeWindow::default(),
            grid_points: DEFAULT_GRID_POINTS,
            refine_tolerance: DEFAULT_REFINE_TOLERANCE,
            encoding: None,
        }
    }

    pub fn with_encoding(mut self, k: usize, r: Option<usize>) -> Self {
        self.encoding = Some(EncodingSpec { k, r });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("values", "sweep needs at least one axis value"));
        }
        SearchGrid::new(self.grid_points, self.refine_tolerance)?;
        if let TimeWindow::Fixed { end } = self.time_window {
            check_window((0.0, end))?;
        }
        Ok(())
    }

    fn point_params(&self, value: f64) -> Result<SystemParams> {
        let integral = || -> Result<usize> {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(invalid("axis value", format!("{value} is not a positive integer")));
            }
            Ok(value as usize)
        };
        let mut p = self.fixed;
        match self.axis {
            SweepAxis::SystemSize => p.n_cavities = integral()?,
            SweepAxis::Beta => p.beta = value,
            SweepAxis::Kappa => p.pattern = HoppingPattern::Staggered { kappa: value },
            SweepAxis::Hopping => p.hopping = value,
            SweepAxis::EncodingK => {
                integral()?;
            }
        }
        p.validate()?;
        Ok(p)
    }

    fn encoding_for(&self, value: f64) -> Option<(usize, usize)> {
        match (self.axis, self.encoding) {
            (SweepAxis::EncodingK, enc) => {
                let k = value as usize;
                Some((k, enc.and_then(|e| e.r).unwrap_or(k)))
            }
            (_, Some(EncodingSpec { k, r })) => Some((k, r.unwrap_or(k))),
            (_, None) => None,
        }
    }

    fn evaluate(&self, value: f64) -> Result<SweepPoint> {
        let params = self.point_params(value)?;
        let window = self.time_window.resolve(&params)?;
        let scale = if params.hopping > 0.0 { params.hopping } else { 1.0 };
        let grid = SearchGrid::new(self.grid_points, self.refine_tolerance / scale)?;
        let (atom, photon) = match self.encoding_for(value) {
            Some((k, r)) => {
                let scheme = EncodingScheme::new(params, k, r)?;
                let peaks = max_transfer_over_time(&scheme, window, grid)?;
                (peaks.atom, peaks.photon)
            }
            None => (
                maximize_probe(&end_site_probe(&params, Channel::Atom)?, window, grid)?,
                maximize_probe(&end_site_probe(&params, Channel::Photon)?, window, grid)?,
            ),
        };
        Ok(SweepPoint { axis_value: value, atom, photon })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub atom: Peak,
    pub photon: Peak,
}

impl SweepPoint {
    pub fn peak(&self, channel: Channel) -> Peak {
        match channel {
            Channel::Atom => self.atom,
            Channel::Photon => self.photon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// One record per axis value, in axis order.
    pub points: Vec<SweepPoint>,
    /// Seconds spent per point; excluded from the data files.
    pub wall_times: Vec<f64>,
}

/// Evaluate every axis value. Points run in parallel; output keeps axis
/// order.
pub fn scan(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let evaluated: Vec<(SweepPoint, f64)> = spec
        .values
        .par_iter()
        .map(|&value| {
            let start = Instant::now();
            spec.evaluate(value)
                .map(|p| (p, start.elapsed().as_secs_f64()))
                .map_err(|e| Error::SweepPoint { value, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let (points, wall_times) = evaluated.into_iter().unzip();
    Ok(SweepResult { spec: spec.clone(), points, wall_times })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual divided by the mean of the fitted values.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), actual: ys.len() });
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("x", "all abscissae coincide"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / n).sqrt();
    let residual = if my != 0.0 { rms / my.abs() } else { rms };
    Ok(LinearFit { slope, intercept, residual })
}

/// Fit the optimal arrival time of one channel against `N`.
pub fn linear_fit_t_vs_n(result: &SweepResult, channel: Channel) -> Result<LinearFit> {
    if result.spec.axis != SweepAxis::SystemSize {
        return Err(invalid("axis", "t_o vs N fit needs a system-size sweep"));
    }
    let xs: Vec<f64> = result.points.iter().map(|p| p.axis_value).collect();
    let ys: Vec<f64> = result.points.iter().map(|p| p.peak(channel).time).collect();
    linear_fit(&xs, &ys)
}
