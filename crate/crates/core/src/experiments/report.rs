//! CSV and JSON emitters. Every writer produces byte-identical output for
//! identical input.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::sweep::SweepReport;
use crate::error::Result;
use crate::model::Trajectory;

/// Colour of a fully infected node.
pub const RED: [f64; 3] = [255.0, 0.0, 0.0];
/// Colour of a healthy node.
pub const BLUE: [f64; 3] = [0.0, 0.0, 255.0];

/// `x r + (1 - x) b` per RGB channel.
pub fn node_color(x: f64) -> [f64; 3] {
    let mut c = [0.0; 3];
    for (ch, (r, b)) in c.iter_mut().zip(RED.iter().zip(&BLUE)) {
        *ch = x * r + (1.0 - x) * b;
    }
    c
}

/// `#rrggbb` of [`node_color`], channels rounded to the nearest integer.
pub fn node_color_hex(x: f64) -> String {
    let [r, g, b] = node_color(x.clamp(0.0, 1.0)).map(|v| v.round() as u8);
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Header `k,x_0,...,x_{n-1},xbar`, one row per step.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string()];
    header.extend((0..traj.n()).map(|i| format!("x_{i}")));
    header.push("xbar".into());
    w.write_record(&header)?;
    for (k, (x, xbar)) in traj.states.iter().zip(&traj.xbar).enumerate() {
        let mut row = Vec::with_capacity(x.len() + 2);
        row.push(k.to_string());
        row.extend(x.iter().map(f64::to_string));
        row.push(xbar.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `k,node,channel` for every `every`-th step.
pub fn write_color_csv<W: Write>(traj: &Trajectory, every: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "node", "channel"])?;
    for (k, x) in traj.states.iter().enumerate().step_by(every.max(1)) {
        for (i, xi) in x.iter().enumerate() {
            w.write_record([k.to_string(), i.to_string(), node_color_hex(*xi)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Rows `param_value,rho,classification,converged,hitting_step,empirical_rate`;
/// invalid rows leave the analysis columns empty.
pub fn write_sweep_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param_value", "rho", "classification", "converged", "hitting_step", "empirical_rate"])?;
    for row in &report.rows {
        w.write_record([
            row.param_value.to_string(),
            opt(row.rho),
            opt(row.classification.map(|c| c.as_str())),
            opt(row.convergence.map(|c| c.converged)),
            opt(row.convergence.and_then(|c| c.hitting_step)),
            opt(row.convergence.map(|c| c.empirical_rate)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_csv_file(
    path: impl AsRef<Path>,
    emit: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    emit(&mut file)?;
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colours() {
        assert_eq!(node_color(0.0), BLUE);
        assert_eq!(node_color(1.0), RED);
        assert_eq!(node_color(0.25), [63.75, 0.0, 191.25]);
        assert_eq!(node_color_hex(0.0), "#0000ff");
        assert_eq!(node_color_hex(1.0), "#ff0000");
        assert_eq!(node_color_hex(0.25), "#4000bf");
    }

    #[test]
    fn trajectory_layout() {
        let traj = Trajectory {
            p: 1,
            start_phase: 0,
            states: vec![vec![1.0, 0.0], vec![0.5, 0.25]],
            xbar: vec![0.5, 0.375],
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,x_0,x_1,xbar\n0,1,0,0.5\n1,0.5,0.25,0.375\n");

        let mut buf = Vec::new();
        write_color_csv(&traj, 1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,node,channel\n0,0,#ff0000\n0,1,#0000ff\n"));
    }
}
