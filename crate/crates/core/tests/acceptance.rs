//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use twophoton::dynamics::{populations, uniform_grid, PopulationTrace, SpectralPropagator};
use twophoton::io::{write_sweep_csv, write_trace_csv};
use twophoton::lattice::{adjacency_matrix, staggered_spectrum, uniform_spectrum};
use twophoton::model::initial_state;
use twophoton::sweep::{
    linear_fit_t_vs_n, optimal_time, scan, LinearFit, Peak, SweepAxis, SweepResult, SweepSpec, DEFAULT_GRID_POINTS,
    DEFAULT_REFINE_TOLERANCE,
};
use twophoton::verify::{lattice_error, run_verification, VerifyOptions};
use twophoton::{Channel, HoppingPattern, Result, SystemParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(ok: bool, detail: &mut String, text: std::fmt::Arguments) -> bool {
    let _ = write!(detail, "{}{}{text}", if detail.is_empty() { "" } else { "; " }, if ok { "" } else { "✗ " });
    ok
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn end_peaks(params: &SystemParams) -> Result<(Peak, Peak)> {
    let window = (0.0, 2.0 * params.n_cavities as f64 / params.hopping);
    let peak = |c| optimal_time(params, c, window, DEFAULT_GRID_POINTS, DEFAULT_REFINE_TOLERANCE);
    Ok((peak(Channel::Atom)?, peak(Channel::Photon)?))
}

fn default_trace(params: &SystemParams) -> Result<PopulationTrace> {
    let t_max = 2.0 * params.n_cavities as f64 / params.hopping;
    populations(params, &uniform_grid(0.0, t_max, DEFAULT_GRID_POINTS))
}

fn criterion_1() -> Result<(Outcome, Vec<u8>)> {
    let params = SystemParams::uniform(100, 10.0, 1.0, FRAC_PI_4)?;
    let (atom, photon) = end_peaks(&params)?;
    let mut d = String::new();
    let mut ok = check(
        within(atom.probability, 0.135, 0.005) && within(atom.time, 51.84, 0.5),
        &mut d,
        format_args!("atom {:.5} @ t={:.3}", atom.probability, atom.time),
    );
    ok &= check(
        within(photon.probability, 0.139, 0.005) && within(photon.time, 51.73, 0.5),
        &mut d,
        format_args!("photon {:.5} @ t={:.3}", photon.probability, photon.time),
    );
    let sweep = scan(&SweepSpec::new(SweepAxis::Beta, vec![FRAC_PI_4], params))?;
    let mut bytes = Vec::new();
    write_sweep_csv(&sweep, &mut bytes)?;
    Ok((Outcome { passed: ok, detail: d }, bytes))
}

fn criterion_2() -> Result<Outcome> {
    let quarter = SystemParams::uniform(100, 10.0, 1.0, FRAC_PI_4)?;
    let (qa, qp) = end_peaks(&quarter)?;
    let (ha, hp) = end_peaks(&quarter.with_beta(FRAC_PI_2)?)?;
    let (ra, rp) = (qa.probability / ha.probability, qp.probability / hp.probability);
    let mut d = String::new();
    let ok = check(
        within(ra, 0.5, 0.1) && within(rp, 0.5, 0.1),
        &mut d,
        format_args!(
            "ratio atom {ra:.3} ({:.4}/{:.4}), photon {rp:.3} ({:.4}/{:.4})",
            qa.probability, ha.probability, qp.probability, hp.probability
        ),
    );
    Ok(Outcome { passed: ok, detail: d })
}

fn criterion_3() -> Result<(Outcome, Vec<PopulationTrace>)> {
    let mut d = String::new();
    let strong = SystemParams::staggered(101, 200.0, 1.0, FRAC_PI_4, -0.2)?;
    let (a, p) = end_peaks(&strong)?;
    let mut ok = check(
        within(a.probability, 0.08, 0.01) && within(p.probability, 0.08, 0.01),
        &mut d,
        format_args!("κ=-0.2 λ=200 end max atom {:.4}, photon {:.4}", a.probability, p.probability),
    );

    let hopping = SystemParams::staggered(101, 1.0 / 200.0, 1.0, FRAC_PI_4, -0.8)?;
    let (_, p) = end_peaks(&hopping)?;
    ok &= check(
        within(p.probability, 0.0026, 0.0005),
        &mut d,
        format_args!("κ=-0.8 λ=1/200 photon max {:.5}", p.probability),
    );

    let trapped = SystemParams::staggered(101, 200.0, 1.0, FRAC_PI_4, -0.8)?;
    let trace = default_trace(&trapped)?;
    let site1: Vec<f64> = trace.p_atom.iter().zip(&trace.p_photon).map(|(a, p)| a[0] + p[0]).collect();
    let mean = site1.iter().sum::<f64>() / site1.len() as f64;
    ok &= check(mean > 0.5, &mut d, format_args!("κ=-0.8 λ=200 mean P_site1 {mean:.4}"));
    Ok((Outcome { passed: ok, detail: d }, vec![default_trace(&strong)?, default_trace(&hopping)?, trace]))
}

fn encoding_sweeps() -> Result<Vec<SweepResult>> {
    let fixed = SystemParams::uniform(50, 10.0, 1.0, FRAC_PI_4)?;
    [2, 4, 8]
        .into_iter()
        .map(|k| {
            scan(&SweepSpec::new(SweepAxis::SystemSize, vec![50.0, 100.0, 150.0, 200.0], fixed).with_encoding(k, None))
        })
        .collect()
}

fn criterion_4() -> Result<(Outcome, Vec<u8>)> {
    let sweeps = encoding_sweeps()?;
    let mut d = String::new();
    let mut ok = true;
    let (k2, k4, k8) = (&sweeps[0], &sweeps[1], &sweeps[2]);
    for c in Channel::BOTH {
        let p8: Vec<f64> = k8.points.iter().map(|p| p.peak(c).probability).collect();
        let min8 = p8.iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= check(
            min8 > 0.86,
            &mut d,
            format_args!("k=8 {} {:?}", c.as_str(), p8.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>()),
        );
        let ordered = (0..4).all(|i| {
            let (a, b, e) = (k2.points[i].peak(c), k4.points[i].peak(c), k8.points[i].peak(c));
            e.probability > b.probability && b.probability > a.probability
        });
        ok &= check(ordered, &mut d, format_args!("{} k8>k4>k2", c.as_str()));
    }
    let mut bytes = Vec::new();
    for s in &sweeps {
        write_sweep_csv(s, &mut bytes)?;
    }
    Ok((Outcome { passed: ok, detail: d }, bytes))
}

fn size_fit(xi: f64, lambda: f64, channel: Channel) -> Result<LinearFit> {
    let fixed = SystemParams::uniform(20, lambda, xi, 0.0)?;
    let result = scan(&SweepSpec::new(SweepAxis::SystemSize, vec![20.0, 40.0, 60.0, 80.0, 100.0], fixed))?;
    linear_fit_t_vs_n(&result, channel)
}

fn criterion_5() -> Result<Outcome> {
    let mut d = String::new();
    let mut ok = true;
    for c in Channel::BOTH {
        let slow = size_fit(1.0, 10.0, c)?;
        let fast = size_fit(4.0, 40.0, c)?;
        let ratio = slow.slope / fast.slope;
        ok &= check(
            slow.residual < 0.02 && fast.residual < 0.02 && within(ratio, 4.0, 0.2),
            &mut d,
            format_args!(
                "{} slopes {:.4}/{:.4} ratio {ratio:.3}, rms {:.4}/{:.4}",
                c.as_str(),
                slow.slope,
                fast.slope,
                slow.residual,
                fast.residual
            ),
        );
    }
    Ok(Outcome { passed: ok, detail: d })
}

fn criterion_6() -> Result<Outcome> {
    let report = run_verification(&VerifyOptions::default())?;
    let mut d = String::new();
    let mut ok = true;
    for c in report.checks.iter().filter(|c| c.name.contains("oracle")) {
        ok &= check(c.max_error < 1e-9, &mut d, format_args!("{} {:.2e} (n={})", c.name, c.max_error, c.samples));
    }
    Ok(Outcome { passed: ok, detail: d })
}

fn criterion_7(traces: &[PopulationTrace]) -> Result<Outcome> {
    let mut d = String::new();

    let mut norm: f64 = traces.iter().map(PopulationTrace::max_norm_error).fold(0.0, f64::max);
    let params = SystemParams::staggered(41, 3.0, 1.0, 0.3, 0.5)?.with_beta(1.1)?;
    let prop = SpectralPropagator::new(&params)?;
    for t in uniform_grid(0.0, 80.0, 41) {
        norm = norm.max((prop.evolve(&initial_state(&params), t)?.norm_sqr() - 1.0).abs());
    }
    let mut ok = check(norm < 1e-8, &mut d, format_args!("norm {norm:.1e}"));

    let mut lattice: f64 = 0.0;
    for n in (1..=25).chain([51, 100, 101, 200, 201, 301, 400, 401]) {
        lattice = lattice.max(lattice_error(&uniform_spectrum(n)?, &adjacency_matrix(n, HoppingPattern::Uniform)));
        if n % 2 == 1 {
            for kappa in [-0.95, -0.8, -0.2, 0.2, 0.8, 0.95] {
                let pattern = HoppingPattern::Staggered { kappa };
                lattice = lattice.max(lattice_error(&staggered_spectrum(n, kappa)?, &adjacency_matrix(n, pattern)));
            }
        }
    }
    ok &= check(lattice < 1e-9, &mut d, format_args!("lattice {lattice:.1e}"));

    let uniform = SystemParams::uniform(101, 10.0, 1.0, FRAC_PI_4)?;
    let nearly = SystemParams::staggered(101, 10.0, 1.0, FRAC_PI_4, 1e-6)?;
    let times = uniform_grid(0.0, 202.0, 401);
    let (u, s) = (populations(&uniform, &times)?, populations(&nearly, &times)?);
    let cont = u
        .p_atom
        .iter()
        .chain(&u.p_photon)
        .flatten()
        .zip(s.p_atom.iter().chain(&s.p_photon).flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ok &= check(cont < 1e-4, &mut d, format_args!("κ=1e-6 continuity {cont:.1e}"));

    let mut floor: f64 = 1.0;
    for n in [100, 101] {
        let p = SystemParams::uniform(n, 1.0 / 200.0, 1.0, FRAC_PI_2)?;
        let trace = populations(&p, &uniform_grid(0.0, 50.0, 2001))?;
        floor = floor.min(trace.site_series(Channel::Atom, 1).into_iter().fold(1.0, f64::min));
    }
    ok &= check(floor > 0.99, &mut d, format_args!("trapping min P_atom,1 {floor:.5}"));
    Ok(Outcome { passed: ok, detail: d })
}

fn criterion_8(first: &[Vec<u8>], traces: &[PopulationTrace]) -> Result<Outcome> {
    let again = [criterion_1()?.1, criterion_4()?.1];
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir)?;
    let mut identical = true;
    for (i, (a, b)) in first.iter().zip(&again).enumerate() {
        let (pa, pb) = (dir.join(format!("run1-{i}.csv")), dir.join(format!("run2-{i}.csv")));
        std::fs::write(&pa, a)?;
        std::fs::write(&pb, b)?;
        identical &= std::fs::read(&pa)? == std::fs::read(&pb)?;
    }
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    write_trace_csv(&traces[0], &mut t1)?;
    write_trace_csv(&default_trace(&traces[0].params)?, &mut t2)?;
    identical &= t1 == t2;
    let mut d = String::new();
    let bytes: usize = first.iter().map(Vec::len).sum();
    let ok = check(identical, &mut d, format_args!("criteria 1 and 4 data ({bytes} bytes) byte-identical across runs"));
    Ok(Outcome { passed: ok, detail: d })
}

fn report(id: u32, title: &str, budget: Duration, run: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let (passed, detail) = match outcome {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= budget;
    let status = if passed && in_time { "PASS" } else { "FAIL" };
    let timing = format!("{:.2}s{}", elapsed.as_secs_f64(), if in_time { "" } else { " over budget" });
    println!("{status} [{id}] {title}: {detail} ({timing})");
    passed && in_time
}

fn main() {
    let mut all = true;
    let mut data: Vec<Vec<u8>> = Vec::new();
    let mut traces: Vec<PopulationTrace> = Vec::new();

    all &= report(1, "end-site peaks, N=100 λ=10 β=π/4", Duration::from_secs(10), || {
        let (o, bytes) = criterion_1()?;
        data.push(bytes);
        traces.push(default_trace(&SystemParams::uniform(100, 10.0, 1.0, FRAC_PI_4)?)?);
        Ok(o)
    });
    all &= report(2, "β=π/4 vs β=π/2 maxima", Duration::from_secs(20), criterion_2);
    all &= report(3, "staggered localization", Duration::from_secs(60), || {
        let (o, t) = criterion_3()?;
        traces.extend(t);
        Ok(o)
    });
    all &= report(4, "encoding gain k=8 > k=4 > k=2", Duration::from_secs(300), || {
        let (o, bytes) = criterion_4()?;
        data.push(bytes);
        Ok(o)
    });
    all &= report(5, "optimal-time scaling t_o ∝ N/ξ", Duration::from_secs(120), criterion_5);
    all &= report(6, "closed form vs dense oracle", Duration::from_secs(120), criterion_6);
    all &= report(7, "invariants", Duration::from_secs(120), || criterion_7(&traces));
    all &= report(8, "determinism", Duration::from_secs(600), || criterion_8(&data, &traces));

    if !all {
        std::process::exit(1);
    }
}
