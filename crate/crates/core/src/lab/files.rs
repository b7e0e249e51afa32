use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::landscape::PeriodicPotential;
use crate::pdmp::{segment_u, PdmpState, Segment};
use crate::stats::PathPoint;

/// `t,x,u` rows.
pub fn trajectory_csv(rows: &[PathPoint]) -> String {
    let mut out = String::with_capacity(32 * rows.len() + 8);
    out.push_str("t,x,u\n");
    for (t, x, u) in rows {
        let _ = writeln!(out, "{t},{x},{u}");
    }
    out
}

/// `t,x,u,y,cause` rows: the initial state (cause `start`), then the state
/// just after each event. The last row is the horizon.
pub fn events_csv(p: &PeriodicPotential, initial: PdmpState, segments: &[Segment]) -> String {
    let mut out = String::with_capacity(48 * (segments.len() + 1) + 16);
    out.push_str("t,x,u,y,cause\n");
    let _ = writeln!(out, "0,{},{},{},start", initial.x, initial.u, initial.y);
    for s in segments {
        let u = segment_u(p, s.x0, s.y, s.duration, s.u0);
        let y = if s.cause == crate::pdmp::Cause::HorizonEnd {
            s.y
        } else {
            -s.y
        };
        let _ = writeln!(out, "{},{},{},{},{}", s.t0 + s.duration, s.end_x(), u, y, s.cause);
    }
    out
}

/// Named output files, kept in memory until the run is complete.
#[derive(Debug, Default)]
pub(crate) struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn put(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    /// A CSV with the given header and one row per item.
    pub fn table<I, R>(&mut self, name: &str, header: &str, rows: I)
    where
        I: IntoIterator<Item = R>,
        R: std::fmt::Display,
    {
        let mut out = String::new();
        out.push_str(header);
        out.push('\n');
        for r in rows {
            let _ = writeln!(out, "{r}");
        }
        self.put(name, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdmp::simulate_pdmp;
    use crate::seeding::replica_rng;

    #[test]
    fn event_rows_match_the_log() {
        let p = PeriodicPotential::cosine();
        let log = simulate_pdmp(
            &p,
            1.0,
            PdmpState::new(0.5, 1.0, 1.0),
            20.0,
            &mut replica_rng(1, 0),
            1000,
        )
        .unwrap();
        let segs: Vec<Segment> = log.segments().collect();
        let csv = events_csv(&p, log.initial, &segs);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x,u,y,cause");
        assert_eq!(lines.len(), log.events.len() + 2);
        let last: Vec<f64> = lines
            .last()
            .unwrap()
            .split(',')
            .take(4)
            .map(|v| v.parse().unwrap())
            .collect();
        let end = log.terminal();
        assert!((last[0] - 20.0).abs() < 1e-12);
        assert!((last[1] - end.x).abs() < 1e-12 && (last[2] - end.u).abs() < 1e-10 && last[3] == end.y);
        assert!(lines.last().unwrap().ends_with("horizon-end"));
    }

    #[test]
    fn trajectory_header() {
        assert_eq!(trajectory_csv(&[(0.0, 1.0, -0.5)]), "t,x,u\n0,1,-0.5\n");
    }
}
