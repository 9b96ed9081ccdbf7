//! CSV and JSON encodings of traces and sweep results.
//!
//! CSV files are UTF-8 with LF line endings and 17 significant digits per
//! real number, so every value parses back to the same `f64`.

use std::io::{Read, Write};

use serde::Serialize;

use crate::dynamics::PopulationTrace;
use crate::error::{Error, Result};
use crate::model::{Channel, SystemParams};
use crate::sweep::{Peak, SweepAxis, SweepPoint, SweepResult};

pub const TRACE_HEADER: [&str; 4] = ["t", "site", "channel", "probability"];
pub const SWEEP_HEADER: [&str; 4] = ["axis_value", "channel", "t_opt", "p_max"];

/// Scientific notation with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn parse_real(field: &str) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse(format!("`{field}` is not a number")))
}

/// Rows `t,site,channel,probability`, ordered by time, then site, then
/// channel (atom before photon).
pub fn write_trace_csv<W: Write>(trace: &PopulationTrace, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(TRACE_HEADER)?;
    for (i, &t) in trace.times.iter().enumerate() {
        let t = format_real(t);
        for site in 0..trace.params.n_cavities {
            for channel in Channel::BOTH {
                let p = trace.channel(channel)[i][site];
                out.write_record([t.as_str(), &(site + 1).to_string(), channel.as_str(), &format_real(p)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Parse a trace written by [`write_trace_csv`]; the parameters are not
/// part of the CSV and must be supplied.
pub fn read_trace_csv<R: Read>(r: R, params: SystemParams) -> Result<PopulationTrace> {
    let n = params.n_cavities;
    let mut reader = csv::ReaderBuilder::new().from_reader(r);
    if reader.headers()?.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse("unexpected trace header".into()));
    }
    let mut trace = PopulationTrace { params, times: Vec::new(), p_atom: Vec::new(), p_photon: Vec::new() };
    for record in reader.records() {
        let record = record?;
        let t = parse_real(&record[0])?;
        let site: usize = record[1].parse().map_err(|_| Error::Parse(format!("bad site `{}`", &record[1])))?;
        let channel: Channel = record[2].parse()?;
        let p = parse_real(&record[3])?;
        if !(1..=n).contains(&site) {
            return Err(Error::Parse(format!("site {site} outside 1..={n}")));
        }
        if trace.times.last() != Some(&t) {
            trace.times.push(t);
            trace.p_atom.push(vec![f64::NAN; n]);
            trace.p_photon.push(vec![f64::NAN; n]);
        }
        let row = trace.times.len() - 1;
        match channel {
            Channel::Atom => trace.p_atom[row][site - 1] = p,
            Channel::Photon => trace.p_photon[row][site - 1] = p,
        }
    }
    if trace.p_atom.iter().chain(&trace.p_photon).flatten().any(|p| p.is_nan()) {
        return Err(Error::Parse("trace has missing site rows".into()));
    }
    Ok(trace)
}

fn format_axis(axis: SweepAxis, v: f64) -> String {
    if axis.is_integral() && v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format_real(v)
    }
}

/// Rows `axis_value,channel,t_opt,p_max` in axis order, atom then photon.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for point in &result.points {
        let v = format_axis(result.spec.axis, point.axis_value);
        for channel in Channel::BOTH {
            let peak = point.peak(channel);
            out.write_record([v.as_str(), channel.as_str(), &format_real(peak.time), &format_real(peak.probability)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepPoint>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(r);
    if reader.headers()?.iter().ne(SWEEP_HEADER) {
        return Err(Error::Parse("unexpected sweep header".into()));
    }
    let mut points: Vec<SweepPoint> = Vec::new();
    let blank = Peak { time: f64::NAN, probability: f64::NAN };
    for record in reader.records() {
        let record = record?;
        let value = parse_real(&record[0])?;
        let channel: Channel = record[1].parse()?;
        let peak = Peak { time: parse_real(&record[2])?, probability: parse_real(&record[3])? };
        if points.last().map(|p| p.axis_value.to_bits()) != Some(value.to_bits()) {
            points.push(SweepPoint { axis_value: value, atom: blank, photon: blank });
        }
        let point = points.last_mut().expect("pushed above");
        match channel {
            Channel::Atom => point.atom = peak,
            Channel::Photon => point.photon = peak,
        }
    }
    if points.iter().any(|p| p.atom.time.is_nan() || p.photon.time.is_nan()) {
        return Err(Error::Parse("sweep row missing a channel".into()));
    }
    Ok(points)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dynamics::{populations, uniform_grid};
    use crate::sweep::{scan, SweepSpec};

    #[test]
    fn trace_csv_layout() {
        let params = SystemParams::uniform(2, 1.0, 1.0, 0.3).unwrap();
        let trace = populations(&params, &[0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,site,channel,probability");
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        assert!(lines[1].starts_with("0.0000000000000000e0,1,atom,"));
        assert!(lines[2].starts_with("0.0000000000000000e0,1,photon,"));
        assert!(lines[3].starts_with("0.0000000000000000e0,2,atom,"));
        assert!(lines[5].starts_with("5.0000000000000000e-1,1,atom,"));
    }

    #[test]
    fn trace_csv_round_trip() {
        let params = SystemParams::staggered(7, 3.0, 1.0, 0.8, -0.4).unwrap();
        let trace = populations(&params, &uniform_grid(0.0, 5.0, 13)).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        assert_eq!(read_trace_csv(buf.as_slice(), params).unwrap(), trace);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let fixed = SystemParams::uniform(10, 10.0, 1.0, 0.0).unwrap();
        let result = scan(&SweepSpec::new(SweepAxis::SystemSize, vec![6.0, 8.0], fixed)).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("6,atom,"));
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), result.points);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let params = SystemParams::uniform(2, 1.0, 1.0, 0.3).unwrap();
        assert!(read_trace_csv("a,b,c,d\n".as_bytes(), params).is_err());
        assert!(read_trace_csv("t,site,channel,probability\n0,3,atom,0.1\n".as_bytes(), params).is_err());
        assert!(read_trace_csv("t,site,channel,probability\n0,1,atom,0.1\n".as_bytes(), params).is_err());
        assert!(read_sweep_csv("axis_value,channel,t_opt,p_max\n1,atom,2,0.5\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn reals_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_real(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
