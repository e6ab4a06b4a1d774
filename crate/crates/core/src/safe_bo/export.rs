//! Plot-ready dumps of campaign histories and grid surfaces.

use std::io::{self, Write};

use serde::Serialize;

use super::{CampaignState, Evaluation};

/// Writes the history as CSV:
/// `iteration, p1.., z1.., objective_meas, constraint_meas, was_initializer, safe_set_size, best_so_far`.
pub fn write_history_csv<W: Write>(mut out: W, history: &[Evaluation]) -> io::Result<()> {
    let dim = history.first().map_or(0, |e| e.point.len());
    let ctx = history.iter().find_map(|e| e.context.as_ref()).map_or(0, Vec::len);
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=dim).map(|i| format!("p{i}")));
    header.extend((1..=ctx).map(|i| format!("z{i}")));
    header.extend(
        ["objective_meas", "constraint_meas", "was_initializer", "safe_set_size", "best_so_far"]
            .map(String::from),
    );
    writeln!(out, "{}", header.join(","))?;
    for e in history {
        let mut row = vec![e.iteration.to_string()];
        row.extend(e.point.iter().map(|v| fmt_f64(*v)));
        match &e.context {
            Some(z) => row.extend(z.iter().map(|v| fmt_f64(*v))),
            None => row.extend(std::iter::repeat_n(String::new(), ctx)),
        }
        row.push(fmt_f64(e.objective));
        row.push(fmt_f64(e.constraint));
        row.push(u8::from(e.was_initializer).to_string());
        row.push(e.safe_set_size.to_string());
        row.push(e.best_so_far.map(fmt_f64).unwrap_or_default());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Shortest round-trip representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Serialize)]
struct SurfaceLine<'a> {
    iteration: usize,
    point: &'a [f64],
    mu_o: f64,
    sigma_o: f64,
    mu_c: f64,
    sigma_c: f64,
    safe: bool,
    minimizer: bool,
    expander: bool,
}

/// Appends one JSON line per grid point describing the planned iteration.
pub fn write_surface_jsonl<W: Write>(mut out: W, state: &CampaignState) -> io::Result<()> {
    let o = &state.objective_bounds;
    let c = &state.constraint_bounds;
    for i in 0..state.grid.len() {
        let line = SurfaceLine {
            iteration: state.iteration,
            point: state.grid.point(i),
            mu_o: o.mean[i],
            sigma_o: o.std[i],
            mu_c: c.mean[i],
            sigma_c: c.std[i],
            safe: state.safe_mask[i],
            minimizer: state.minimizer_mask[i],
            expander: state.expander_mask[i],
        };
        serde_json::to_writer(&mut out, &line).map_err(io::Error::other)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
