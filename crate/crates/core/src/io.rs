//! CSV reading and writing for trajectories and analysis results.
//!
//! Numbers are written with 17 significant digits so that a written file
//! reads back bit-for-bit.

use std::io::{Read, Write};
use std::path::Path;

use crate::analysis::{LyapunovEstimate, Peak, RecurrenceMatrix, Spectrum, StrobeSeries};
use crate::dynamics::Trajectory;
use crate::error::{EslError, Result};
use crate::rotation::Representation;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows<W: Write>(out: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn trajectory_header(rep: Representation) -> Vec<String> {
    std::iter::once("t").chain(rep.columns().iter().copied()).map(String::from).collect()
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let rows = traj.times().zip(traj.states()).map(|(t, s)| {
        std::iter::once(fmt_f64(t)).chain(s.iter().map(|v| fmt_f64(*v))).collect()
    });
    write_rows(out, &trajectory_header(traj.representation), rows)
}

pub fn write_trajectory_file(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    write_trajectory(create(path.as_ref())?, traj)
}

/// Representation whose column set matches `header` (after the leading `t`).
pub fn representation_for_header(header: &[&str]) -> Result<Representation> {
    const ALL: [Representation; 5] = [
        Representation::Euler,
        Representation::Quaternion,
        Representation::Gibbs,
        Representation::ModifiedGibbs,
        Representation::AxisAngle,
    ];
    if header.first() != Some(&"t") {
        return Err(EslError::Schema(format!("trajectory header must start with t, found {}", header.join(","))));
    }
    ALL.into_iter()
        .find(|r| r.columns() == &header[1..])
        .ok_or_else(|| EslError::Schema(format!("unrecognized trajectory header {}", header.join(","))))
}

/// Reads a trajectory written by [`write_trajectory`]; the time column must be a uniform grid.
pub fn read_trajectory<R: Read>(input: R) -> Result<Trajectory> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rep = representation_for_header(&header_refs)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(EslError::Schema(format!("row {} has {} fields, expected {}", line + 1, rec.len(), header.len())));
        }
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| EslError::Schema(format!("row {}: '{field}' is not a number ({e})", line + 1)))?;
            if k == 0 {
                times.push(v);
            } else {
                states.push(v);
            }
        }
    }
    if times.is_empty() {
        return Err(EslError::Schema("trajectory file has no rows".into()));
    }
    let t0 = times[0];
    let dt = if times.len() > 1 { (times[times.len() - 1] - t0) / (times.len() - 1) as f64 } else { 1.0 };
    if !(dt > 0.0) {
        return Err(EslError::Schema("trajectory times must increase".into()));
    }
    for (i, t) in times.iter().enumerate() {
        let want = t0 + i as f64 * dt;
        if (t - want).abs() > 1e-9 * want.abs().max(1.0) {
            return Err(EslError::Schema(format!("time column is not a uniform grid at row {}", i + 1)));
        }
    }
    Trajectory::from_states(rep, None, t0, dt, states)
}

pub fn read_trajectory_file(path: impl AsRef<Path>) -> Result<Trajectory> {
    read_trajectory(std::fs::File::open(path.as_ref())?)
}

pub fn write_strobe<W: Write>(out: W, s: &StrobeSeries) -> Result<()> {
    let width = s.points.first().map_or(s.representation.width(), Vec::len);
    let header: Vec<String> =
        ["k", "t"].iter().map(|h| h.to_string()).chain((1..=width).map(|i| format!("c{i}"))).collect();
    let rows = s.times.iter().zip(&s.points).enumerate().map(|(k, (t, p))| {
        [k.to_string(), fmt_f64(*t)].into_iter().chain(p.iter().map(|v| fmt_f64(*v))).collect()
    });
    write_rows(out, &header, rows)
}

pub fn write_spectrum<W: Write>(out: W, s: &Spectrum) -> Result<()> {
    let rows = s.freqs.iter().zip(&s.power).map(|(f, p)| vec![fmt_f64(*f), fmt_f64(*p)]);
    write_rows(out, &["freq".into(), "power".into()], rows)
}

pub fn write_peaks<W: Write>(out: W, peaks: &[Peak]) -> Result<()> {
    let rows = peaks.iter().map(|p| vec![fmt_f64(p.freq), fmt_f64(p.power), fmt_f64(p.prominence)]);
    write_rows(out, &["freq".into(), "power".into(), "prominence".into()], rows)
}

pub fn write_lyapunov<W: Write>(out: W, est: &LyapunovEstimate) -> Result<()> {
    let width = est.history.first().map_or(est.exponents.len(), |h| h.1.len());
    let header: Vec<String> = std::iter::once("step".to_string()).chain((1..=width).map(|i| format!("l{i}"))).collect();
    let rows = est
        .history
        .iter()
        .map(|(step, v)| std::iter::once(step.to_string()).chain(v.iter().map(|x| fmt_f64(*x))).collect());
    write_rows(out, &header, rows)
}

pub fn write_recurrence<W: Write>(out: W, r: &RecurrenceMatrix) -> Result<()> {
    let rows = r.set_bits().map(|(i, j)| vec![i.to_string(), j.to_string()]);
    write_rows(out, &["i".into(), "j".into()], rows)
}

/// Writes to `path` through one of the writers above.
pub fn to_file<T: ?Sized>(path: impl AsRef<Path>, value: &T, f: fn(std::io::BufWriter<std::fs::File>, &T) -> Result<()>) -> Result<()> {
    f(create(path.as_ref())?, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let states = vec![0.1, 1.0 / 3.0, -2.5e-17, 0.7, 1e10, std::f64::consts::PI];
        let tr = Trajectory::from_states(Representation::Euler, None, 0.25, 0.125, states.clone()).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,ex,ey,ez\n"));
        let back = read_trajectory(buf.as_slice()).unwrap();
        assert_eq!(back.flat_states(), states.as_slice());
        assert_eq!(back.t0, 0.25);
        assert_eq!(back.dt, 0.125);
    }

    #[test]
    fn unknown_header_is_schema_error() {
        let err = read_trajectory("t,a,b\n0,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EslError::Schema(_)));
        assert_eq!(
            representation_for_header(&["t", "nx", "ny", "nz", "theta"]).unwrap(),
            Representation::AxisAngle
        );
    }
}
