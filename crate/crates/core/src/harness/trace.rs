use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::solver::IterationRecord;

pub const TRACE_HEADER: &str = "run_id,algorithm,iteration,phase,iter_time,cum_time,objective,suboptimality";

/// 17 significant digits: enough for an exact `f64` round trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub run_id: String,
    pub algorithm: String,
    pub record: IterationRecord,
}

/// Append one run's records to a trace being built.
pub fn append_trace(out: &mut String, run_id: &str, algorithm: &str, records: &[IterationRecord]) {
    for r in records {
        let _ = writeln!(
            out,
            "{run_id},{algorithm},{},{},{},{},{},{}",
            r.iteration,
            r.phase,
            format_float(r.iter_time),
            format_float(r.cum_time),
            format_float(r.objective),
            format_float(r.suboptimality),
        );
    }
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::InvalidConfiguration(
            "trace file has an unexpected header".into(),
        ));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = || Error::InvalidConfiguration(format!("malformed trace line {}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad());
            }
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(TraceRow {
                run_id: f[0].to_string(),
                algorithm: f[1].to_string(),
                record: IterationRecord {
                    iteration: int(f[2])?,
                    phase: int(f[3])?,
                    iter_time: real(f[4])?,
                    cum_time: real(f[5])?,
                    objective: real(f[6])?,
                    suboptimality: real(f[7])?,
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.0833333333333335, 1e-300, 123456.789e10, 0.0] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn trace_round_trip() {
        let recs = vec![
            IterationRecord {
                iteration: 1,
                phase: 1,
                iter_time: 0.3,
                cum_time: 0.3,
                objective: 5.0,
                suboptimality: 0.9,
            },
            IterationRecord {
                iteration: 2,
                phase: 2,
                iter_time: 0.7,
                cum_time: 1.0,
                objective: 4.0,
                suboptimality: 0.1,
            },
        ];
        let mut text = format!("{TRACE_HEADER}\n");
        append_trace(&mut text, "0", "sequential", &recs);
        let rows = parse_trace(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].record, recs[1]);
        assert_eq!(rows[0].algorithm, "sequential");
        assert!(parse_trace("nope\n").is_err());
        assert!(parse_trace(&format!("{TRACE_HEADER}\n1,a,2\n")).is_err());
    }
}
