//! Trace CSV files, JSON sidecars and atomic file output.
//!
//! Trace CSV schema: `t_us,ch,end,intensity` with `end` one of `fwd`, `bwd`,
//! `in` and `intensity` the photon flux in s⁻¹.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{End, Trace};
use crate::dynamics::{ChannelRun, LedgerSample, TraceSet};
use crate::error::{Error, Result};
use crate::scenario::Outcome;

#[derive(Serialize)]
struct Row {
    t_us: f64,
    ch: usize,
    end: &'static str,
    intensity: f64,
}

/// Writes every trace of `traces`, channel by channel, in the order
/// forward, backward, input.
pub fn write_traces_csv<W: Write>(traces: &TraceSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for run in &traces.runs {
        for tr in [&run.forward, &run.backward, &run.input] {
            for (t, v) in tr.t.iter().zip(&tr.intensity) {
                w.serialize(Row {
                    t_us: (t * 1e12).round() / 1e6,
                    ch: tr.channel,
                    end: tr.end.as_str(),
                    intensity: *v,
                })?;
            }
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: PathBuf::from("<csv>"),
        source: e,
    })?;
    Ok(())
}

type Columns = (Vec<f64>, Vec<f64>);

/// Reads traces back, grouped by (channel, end) in first-seen order.
pub fn read_traces_csv<R: Read>(input: R) -> Result<Vec<Trace>> {
    let mut r = csv::Reader::from_reader(input);
    let mut order: Vec<(usize, End)> = Vec::new();
    let mut data: BTreeMap<(usize, &'static str), Columns> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::parse(i + 2, 1, format!("invalid {what} in trace row"));
        let t: f64 = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("t_us"))?;
        let ch: usize = rec
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("ch"))?;
        let end = rec
            .get(2)
            .and_then(|s| End::parse(s.trim()))
            .ok_or_else(|| bad("end"))?;
        let v: f64 = rec
            .get(3)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("intensity"))?;
        let key = (ch, end.as_str());
        if !data.contains_key(&key) {
            order.push((ch, end));
        }
        let e = data.entry(key).or_default();
        e.0.push(t * 1e-6);
        e.1.push(v);
    }
    order
        .into_iter()
        .map(|(ch, end)| {
            let (t, v) = data.remove(&(ch, end.as_str())).unwrap_or_default();
            Trace::new(t, v, ch, end)
        })
        .collect()
}

pub fn traces_csv_string(traces: &TraceSet) -> Result<String> {
    let mut buf = Vec::new();
    write_traces_csv(traces, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct ChannelSidecar<'a> {
    channel: usize,
    params: &'a crate::dynamics::ChannelParams,
    ledger: &'a [LedgerSample],
}

#[derive(Serialize)]
struct PointSidecar<'a> {
    value_us: Option<f64>,
    interval_us: Option<f64>,
    metrics: &'a [crate::scenario::ChannelMetrics],
    channels: Vec<ChannelSidecar<'a>>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    scenario: &'a str,
    timeline: String,
    params: &'a crate::config::ParamSet,
    initial_spin: &'a Option<crate::dynamics::InitialSpinWave>,
    grid: &'a crate::dynamics::Grid,
    solver: crate::dynamics::SolverKind,
    points: Vec<PointSidecar<'a>>,
    fits: &'a [crate::scenario::ChannelFit],
}

fn channel_sidecars(runs: &[ChannelRun]) -> Vec<ChannelSidecar<'_>> {
    runs.iter()
        .map(|r| ChannelSidecar {
            channel: r.channel,
            params: &r.params,
            ledger: &r.ledger,
        })
        .collect()
}

/// Parameters, metrics, fits and the full ledger history as JSON.
pub fn sidecar_json(outcome: &Outcome) -> Result<String> {
    let sc = Sidecar {
        scenario: &outcome.scenario.name,
        timeline: outcome.scenario.timeline.to_text(),
        params: &outcome.scenario.params,
        initial_spin: &outcome.scenario.initial_spin,
        grid: &outcome.grid,
        solver: outcome
            .points
            .first()
            .map(|p| p.traces.solver)
            .unwrap_or_default(),
        points: outcome
            .points
            .iter()
            .map(|p| PointSidecar {
                value_us: p.value.map(|v| v * 1e6),
                interval_us: p.interval.map(|v| v * 1e6),
                metrics: &p.metrics,
                channels: channel_sidecars(&p.traces.runs),
            })
            .collect(),
        fits: &outcome.fits,
    };
    Ok(serde_json::to_string_pretty(&sc)?)
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| Error::Io { path: p, source }
    };
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// File names used by [`write_outcome`]: one CSV per sweep point.
pub fn trace_file_name(index: usize, n_points: usize) -> String {
    if n_points == 1 {
        "traces.csv".to_string()
    } else {
        format!("traces_{index:02}.csv")
    }
}

/// Writes all trace CSVs and `<scenario>.json` into `dir`. Returns the paths
/// written, in order.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let n = outcome.points.len();
    for (i, p) in outcome.points.iter().enumerate() {
        let path = dir.join(trace_file_name(i, n));
        write_atomic(&path, traces_csv_string(&p.traces)?.as_bytes())?;
        written.push(path);
    }
    let path = dir.join(format!("{}.json", outcome.scenario.name));
    write_atomic(&path, sidecar_json(outcome)?.as_bytes())?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ChannelParams, Grid, SolverKind};

    fn tiny() -> TraceSet {
        let tr =
            |end, k: f64| Trace::new(vec![0.0, 1e-8, 2e-8], vec![0.0, k, 0.5 * k], 1, end).unwrap();
        TraceSet {
            grid: Grid::new(16, 0.01, 1e-9).unwrap(),
            solver: SolverKind::Adiabatic,
            runs: vec![ChannelRun {
                channel: 1,
                params: ChannelParams {
                    od_eff: 1.0,
                    overlap: 1.0,
                    angle: 0.0,
                    delta_k_l: 0.0,
                },
                forward: tr(End::Forward, 1.5),
                backward: tr(End::Backward, 0.25),
                input: tr(End::Input, 1e6),
                ledger: vec![],
                centroid: vec![],
                final_state: None,
            }],
        }
    }

    #[test]
    fn csv_round_trip() {
        let ts = tiny();
        let text = traces_csv_string(&ts).unwrap();
        assert!(text.starts_with("t_us,ch,end,intensity\n"));
        let back = read_traces_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0].intensity, ts.runs[0].forward.intensity);
        assert_eq!(back[2].end, End::Input);
        for (a, b) in back[1].t.iter().zip(&ts.runs[0].backward.t) {
            assert!((a - b).abs() < 1e-20);
        }
    }

    #[test]
    fn bad_rows_are_reported() {
        let e = read_traces_csv("t_us,ch,end,intensity\n0,1,sideways,1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("slp-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
