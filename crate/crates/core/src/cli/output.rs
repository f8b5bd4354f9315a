//! Path CSV and JSON writers.

use std::io::{Read, Write};

use serde_json::json;

use crate::sde::{PathRecord, StateKind};

/// `t,X1,...,Xp` for particle-like states, `t,e1,...,ep` for polynomials.
pub fn csv_header(path: &PathRecord) -> Vec<String> {
    let prefix = if path.kind == StateKind::Polys { "e" } else { "X" };
    std::iter::once("t".to_string())
        .chain((1..=path.p).map(|i| format!("{prefix}{i}")))
        .collect()
}

/// Writes one row per snapshot. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_path_csv<W: Write>(path: &PathRecord, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(path))?;
    for (t, row) in path.times.iter().zip(&path.states) {
        w.write_record(std::iter::once(t).chain(row).map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Header, times and states of a CSV written by [`write_path_csv`].
pub fn read_path_csv<R: Read>(input: R) -> csv::Result<(Vec<String>, Vec<f64>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(String::from).collect();
    let mut times = Vec::new();
    let mut states = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
            })
            .collect::<Result<_, _>>()?;
        times.push(vals[0]);
        states.push(vals[1..].to_vec());
    }
    Ok((header, times, states))
}

/// Event times are the grid times at which an event was first seen, so they
/// trail the continuous event by at most the largest grid step.
fn event_resolution(path: &PathRecord) -> f64 {
    path.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

pub fn path_json(path: &PathRecord) -> serde_json::Value {
    let mut v = json!({
        "kind": path.kind,
        "p": path.p,
        "completed": path.completed(),
        "times": path.times,
        "states": path.states,
        "events": path.events,
        "event_time_bias_max": event_resolution(path),
    });
    if !path.mapped.is_empty() {
        v["particles"] = json!(path.mapped);
    }
    v
}

pub fn events_json(path: &PathRecord) -> serde_json::Value {
    json!({
        "completed": path.completed(),
        "t_end": path.t_end,
        "event_time_bias_max": event_resolution(path),
        "events": path.events,
    })
}
