use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::restart::{SolverTrace, TraceRow};

pub const TRACE_HEADER: [&str; 6] = ["total_iter", "epoch", "inner_iter", "residual", "potential", "restarted"];

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Writes the trace as CSV. An absent potential is an empty field.
pub fn write_trace<W: Write>(trace: &SolverTrace, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for r in &trace.rows {
        w.write_record([
            r.total_iter.to_string(),
            r.epoch.to_string(),
            r.inner_iter.to_string(),
            format_float(r.residual),
            r.potential.map(format_float).unwrap_or_default(),
            r.restarted.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-iteration residuals of the restart candidate and of the raw iterate.
pub fn write_current_series<W: Write>(trace: &SolverTrace, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["total_iter", "candidate_residual", "current_residual"])
        .map_err(csv_err)?;
    for r in &trace.rows {
        w.write_record([
            r.total_iter.to_string(),
            format_float(r.residual),
            r.current_residual.map(format_float).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(source: R) -> Result<SolverTrace> {
    let mut rd = csv::Reader::from_reader(source);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected trace header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let bad = |field: &str| Error::Parse {
            line,
            message: format!("bad `{field}` field"),
        };
        let int = |k: usize| rec[k].parse::<usize>().map_err(|_| bad(TRACE_HEADER[k]));
        let residual: f64 = rec[3].parse().map_err(|_| bad("residual"))?;
        let potential = if rec[4].is_empty() {
            None
        } else {
            Some(rec[4].parse::<f64>().map_err(|_| bad("potential"))?)
        };
        let restarted: bool = rec[5].parse().map_err(|_| bad("restarted"))?;
        rows.push(TraceRow {
            total_iter: int(0)?,
            epoch: int(1)?,
            inner_iter: int(2)?,
            residual,
            potential,
            restarted,
            current_residual: None,
            elapsed: None,
        });
    }
    Ok(SolverTrace { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(total: usize, residual: f64, potential: Option<f64>, restarted: bool) -> TraceRow {
        TraceRow {
            total_iter: total,
            epoch: 1,
            inner_iter: total,
            residual,
            potential,
            restarted,
            current_residual: None,
            elapsed: None,
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let mut out = Vec::new();
        write_trace(&SolverTrace::default(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "total_iter,epoch,inner_iter,residual,potential,restarted\n");
    }

    #[test]
    fn single_row_is_two_lines() {
        let mut out = Vec::new();
        let t = SolverTrace {
            rows: vec![row(1, 0.1, None, false)],
        };
        write_trace(&t, &mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s.lines().count(), 2);
        assert_eq!(s.lines().nth(1).unwrap(), "1,1,1,1.0000000000000001e-1,,false");
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_trace("a,b\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(vals in prop::collection::vec((any::<f64>(), prop::option::of(any::<f64>()), any::<bool>()), 0..20)) {
            let rows: Vec<TraceRow> = vals
                .iter()
                .enumerate()
                .filter(|(_, (r, p, _))| r.is_finite() && p.is_none_or(f64::is_finite))
                .map(|(i, &(r, p, b))| row(i + 1, r, p, b))
                .collect();
            let t = SolverTrace { rows };
            let mut out = Vec::new();
            write_trace(&t, &mut out).unwrap();
            let back = read_trace(out.as_slice()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
