//! Trace CSV files and relative objective curves.
//!
//! Floats are written in scientific notation with 17 significant digits, so
//! reading a trace back reproduces every value bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::monitor::TraceRecord;

pub const TRACE_HEADER: [&str; 11] = [
    "iter",
    "h",
    "H",
    "d_n",
    "residual",
    "path_length",
    "block",
    "alpha",
    "L",
    "delta",
    "gamma",
];

/// Round-trip float formatting.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_trace<W: Write>(out: W, trace: &[TraceRecord]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        w.write_record([
            r.n.to_string(),
            format_float(r.h),
            format_float(r.lyapunov),
            format_float(r.d_n),
            format_float(r.residual),
            format_float(r.path_length),
            r.block.to_string(),
            format_float(r.alpha),
            format_float(r.lipschitz),
            format_float(r.delta),
            format_float(r.gamma),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn save_trace(path: impl AsRef<Path>, trace: &[TraceRecord]) -> Result<()> {
    let path = path.as_ref();
    write_trace(create(path)?, trace)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Trace(format!("line {line}: bad `{}` field", TRACE_HEADER[i])))
}

/// Parses a trace. The inertia `β` is not stored and is recovered from
/// `γ = δ − β/(2α)`.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Trace(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut trace = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let alpha: f64 = field(&rec, 7, line)?;
        let delta: f64 = field(&rec, 9, line)?;
        let gamma: f64 = field(&rec, 10, line)?;
        trace.push(TraceRecord {
            n: field(&rec, 0, line)?,
            h: field(&rec, 1, line)?,
            lyapunov: field(&rec, 2, line)?,
            d_n: field(&rec, 3, line)?,
            residual: field(&rec, 4, line)?,
            path_length: field(&rec, 5, line)?,
            block: field(&rec, 6, line)?,
            alpha,
            beta: 2.0 * alpha * (delta - gamma),
            lipschitz: field(&rec, 8, line)?,
            delta,
            gamma,
        });
    }
    Ok(trace)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_trace(file)
}

/// Which trace column a relative curve is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveColumn {
    /// The objective `h`.
    #[default]
    Objective,
    /// The Lyapunov value `H`.
    Lyapunov,
}

impl CurveColumn {
    fn pick(self, r: &TraceRecord) -> f64 {
        match self {
            CurveColumn::Objective => r.h,
            CurveColumn::Lyapunov => r.lyapunov,
        }
    }
}

/// Normalized curves `(Eⁿ − E*)/(E⁰ − E*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeCurves {
    /// Smallest value reached by any trace.
    pub e_star: f64,
    /// Surviving curves, in input order.
    pub curves: Vec<(String, Vec<f64>)>,
    /// Traces whose normalization was degenerate (`E⁰ = E*`).
    pub omitted: Vec<String>,
}

/// Builds relative curves for named traces of equal length.
///
/// `E*` is the minimum of `column` over all traces. `E⁰` is `e0` when given
/// (typically the common starting objective), otherwise the first value of
/// each trace.
pub fn relative_curves(
    traces: &[(String, Vec<TraceRecord>)],
    e0: Option<f64>,
    column: CurveColumn,
) -> Result<RelativeCurves> {
    let Some((_, first)) = traces.first() else {
        return Err(Error::Trace("no traces given".into()));
    };
    if first.is_empty() {
        return Err(Error::Trace("empty trace".into()));
    }
    if let Some((name, t)) = traces.iter().find(|(_, t)| t.len() != first.len()) {
        return Err(Error::Trace(format!(
            "trace `{name}` has {} rows, expected {}",
            t.len(),
            first.len()
        )));
    }
    let e_star = traces
        .iter()
        .flat_map(|(_, t)| t.iter().map(|r| column.pick(r)))
        .fold(f64::INFINITY, f64::min);
    let mut curves = Vec::with_capacity(traces.len());
    let mut omitted = Vec::new();
    for (name, t) in traces {
        let start = e0.unwrap_or_else(|| column.pick(&t[0]));
        let scale = start - e_star;
        if !(scale > 0.0) || !scale.is_finite() {
            log::warn!("trace `{name}`: E⁰ − E* = {scale}, curve omitted");
            omitted.push(name.clone());
            continue;
        }
        curves.push((
            name.clone(),
            t.iter()
                .map(|r| (column.pick(r) - e_star) / scale)
                .collect(),
        ));
    }
    Ok(RelativeCurves {
        e_star,
        curves,
        omitted,
    })
}

/// Writes `iter,<name>,…` with one row per iteration.
pub fn write_curves<W: Write>(out: W, curves: &RelativeCurves) -> Result<()> {
    let mut w = writer(out);
    let mut header = vec!["iter".to_string()];
    header.extend(curves.curves.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    let rows = curves.curves.first().map_or(0, |(_, c)| c.len());
    for i in 0..rows {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(curves.curves.iter().map(|(_, c)| format_float(c[i])));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn save_curves(path: impl AsRef<Path>, curves: &RelativeCurves) -> Result<()> {
    let path = path.as_ref();
    write_curves(create(path)?, curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, h: f64) -> TraceRecord {
        TraceRecord {
            n,
            h,
            lyapunov: h + 0.1,
            d_n: 0.5,
            residual: 1.0 / 3.0,
            path_length: 0.5 * n as f64,
            block: 0,
            alpha: 0.1,
            beta: 0.7,
            lipschitz: 8.0,
            delta: 4.0,
            gamma: 4.0 - 0.7 / 0.2,
        }
    }

    fn hs(v: &[f64]) -> Vec<TraceRecord> {
        v.iter()
            .enumerate()
            .map(|(i, h)| record(i + 1, *h))
            .collect()
    }

    #[test]
    fn header_and_line_endings() {
        let mut buf = Vec::new();
        write_trace(&mut buf, &hs(&[1.0])).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,h,H,d_n,residual,path_length,block,alpha,L,delta,gamma\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let mut t = hs(&[std::f64::consts::PI, 1e-300, -0.1]);
        t[1].residual = f64::MIN_POSITIVE;
        let mut buf = Vec::new();
        write_trace(&mut buf, &t).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        for (a, b) in t.iter().zip(&back) {
            assert_eq!(a.h.to_bits(), b.h.to_bits());
            assert_eq!(a.residual.to_bits(), b.residual.to_bits());
            assert_eq!((a.n, a.block), (b.n, b.block));
            assert!((a.beta - b.beta).abs() < 1e-12);
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn bad_traces_are_rejected() {
        assert!(read_trace("iter,h\n1,2\n".as_bytes()).is_err());
        let bad =
            "iter,h,H,d_n,residual,path_length,block,alpha,L,delta,gamma\n1,x,0,0,0,0,0,1,1,1,1\n";
        assert!(matches!(read_trace(bad.as_bytes()), Err(Error::Trace(_))));
    }

    #[test]
    fn hand_computed_curve() {
        let c = relative_curves(
            &[("a".into(), hs(&[10.0, 6.0, 2.0]))],
            None,
            CurveColumn::Objective,
        )
        .unwrap();
        assert_eq!(c.e_star, 2.0);
        assert_eq!(c.curves[0].1, vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn lower_trace_touches_zero() {
        let traces = vec![
            ("a".to_string(), hs(&[5.0, 3.0, 1.0])),
            ("b".to_string(), hs(&[5.0, 4.0, 3.0])),
        ];
        let c = relative_curves(&traces, Some(5.0), CurveColumn::Objective).unwrap();
        assert_eq!(c.curves[0].1[2], 0.0);
        assert_eq!(c.curves[1].1, vec![1.0, 0.75, 0.5]);
        let strictly_decreasing = c.curves[0].1.windows(2).all(|w| w[1] < w[0]);
        assert!(strictly_decreasing);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let flat = relative_curves(
            &[("flat".into(), hs(&[2.0, 2.0]))],
            None,
            CurveColumn::Objective,
        )
        .unwrap();
        assert!(flat.curves.is_empty());
        assert_eq!(flat.omitted, vec!["flat".to_string()]);
        assert!(relative_curves(&[], None, CurveColumn::Objective).is_err());
        assert!(relative_curves(&[("e".into(), vec![])], None, CurveColumn::Objective).is_err());
        let uneven = vec![
            ("a".to_string(), hs(&[1.0, 0.0])),
            ("b".to_string(), hs(&[1.0])),
        ];
        assert!(relative_curves(&uneven, None, CurveColumn::Objective).is_err());
    }

    #[test]
    fn curves_csv() {
        let traces = vec![("fb".to_string(), hs(&[3.0, 1.0]))];
        let c = relative_curves(&traces, None, CurveColumn::Lyapunov).unwrap();
        let mut buf = Vec::new();
        write_curves(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "iter,fb\n1,1.0000000000000000e0\n2,0.0000000000000000e0\n"
        );
    }
}
