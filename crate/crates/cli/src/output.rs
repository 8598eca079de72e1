//! Result files: CSV tables, their schema, gnuplot scripts and the manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bbm_core::diagnostics::{ErrorReport, WaveTrackRecord};
use bbm_core::experiments::{Evolution, GammaStats, Snapshot};
use bbm_core::io::{write_schema, write_table, Table};
use bbm_core::Result;
use serde_json::{json, Map, Value};

pub const INVARIANT_COLUMNS: [(&str, &str); 6] = [
    ("t", "time"),
    ("mass", "integral of eta"),
    ("momentum", "integral of u"),
    ("impulse", "integral of eta u + eta_x u_x / 6"),
    ("energy", "half the integral of eta^2 + (1 + eta) u^2"),
    (
        "gamma",
        "relaxation parameter of the step ending at t (1 without relaxation)",
    ),
];

pub const CONVERGENCE_COLUMNS: [(&str, &str); 13] = [
    ("dx", "mesh spacing"),
    ("E0_H", "L2 error of eta"),
    ("R0_H", "rate of E0_H against the previous row (empty on the first)"),
    ("E0_U", "L2 error of u"),
    ("R0_U", "rate of E0_U"),
    ("E1_H", "H1 error of eta"),
    ("R1_H", "rate of E1_H"),
    ("E1_U", "H1 error of u"),
    ("R1_U", "rate of E1_U"),
    ("tE1_H", "L2 errors of eta and of the computed eta_x, combined"),
    ("tR1_H", "rate of tE1_H"),
    ("tE1_U", "L2 errors of u and of the computed u_x, combined"),
    ("tR1_U", "rate of tE1_U"),
];

pub const TRACK_COLUMNS: [(&str, &str); 6] = [
    ("t", "time"),
    ("x_star", "peak position"),
    ("amplitude", "peak value"),
    ("e_amp", "relative amplitude error"),
    ("e_phase", "distance of the peak from its expected position"),
    (
        "e_shape",
        "relative L2 distance to the best translate of the initial profile",
    ),
];

pub const SNAPSHOT_COLUMNS: [(&str, &str); 4] = [
    ("t", "time of the snapshot"),
    ("x", "Lagrange node"),
    ("eta", "surface elevation"),
    ("u", "velocity"),
];

pub const RESIDUAL_COLUMNS: [(&str, &str); 2] = [
    ("iteration", "Petviashvili iteration"),
    ("residual", "normalised residual"),
];

fn header<'a>(cols: &[(&'a str, &str)]) -> Vec<&'a str> {
    cols.iter().map(|(c, _)| *c).collect()
}

pub fn invariant_table(ev: &Evolution) -> Table {
    let mut t = Table::new(&header(&INVARIANT_COLUMNS));
    for s in &ev.invariants {
        let i = s.invariants;
        t.rows.push(vec![i.t, i.mass, i.momentum, i.impulse, i.energy, s.gamma]);
    }
    t
}

pub fn convergence_table(report: &ErrorReport) -> Result<Table> {
    let mut t = Table::new(&header(&CONVERGENCE_COLUMNS));
    let rates = report.rates()?;
    let nan = f64::NAN;
    for (k, e) in report.rows.iter().enumerate() {
        let r = k.checked_sub(1).map(|j| rates[j]);
        let g = |f: fn(&bbm_core::diagnostics::RateRow) -> Option<f64>| r.as_ref().and_then(f).unwrap_or(nan);
        t.rows.push(vec![
            e.dx,
            e.e0_h,
            g(|r| r.r0_h),
            e.e0_u,
            g(|r| r.r0_u),
            e.e1_h,
            g(|r| r.r1_h),
            e.e1_u,
            g(|r| r.r1_u),
            e.te1_h,
            g(|r| r.tr1_h),
            e.te1_u,
            g(|r| r.tr1_u),
        ]);
    }
    Ok(t)
}

pub fn track_table(track: &[WaveTrackRecord]) -> Table {
    let mut t = Table::new(&header(&TRACK_COLUMNS));
    for r in track {
        t.rows
            .push(vec![r.t, r.x_star, r.amplitude, r.e_amp, r.e_phase, r.e_shape]);
    }
    t
}

pub fn snapshot_table(snaps: &[Snapshot]) -> Table {
    let mut t = Table::new(&header(&SNAPSHOT_COLUMNS));
    for s in snaps {
        for k in 0..s.x.len() {
            t.rows.push(vec![s.t, s.x[k], s.eta[k], s.u[k]]);
        }
    }
    t
}

pub fn gamma_json(g: &GammaStats) -> Value {
    if g.steps == 0 {
        json!(null)
    } else {
        json!({ "min_minus_one": g.min, "max_minus_one": g.max, "steps": g.steps })
    }
}

/// Collects the files of one run in its output directory.
pub struct Outputs {
    dir: PathBuf,
    started: Instant,
    files: Vec<String>,
    schema: Vec<(String, Vec<(&'static str, &'static str)>)>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            files: Vec::new(),
            schema: Vec::new(),
        })
    }

    pub fn csv(&mut self, name: &str, table: &Table, cols: &[(&'static str, &'static str)]) -> Result<()> {
        write_table(table, BufWriter::new(File::create(self.dir.join(name))?))?;
        self.files.push(name.to_string());
        self.schema.push((name.to_string(), cols.to_vec()));
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), body)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `schema.txt` and `run.json`.
    pub fn finish(mut self, command: &str, config: Map<String, Value>, results: Value, gamma: Value) -> Result<()> {
        let tables: Vec<(&str, &[(&str, &str)])> =
            self.schema.iter().map(|(n, c)| (n.as_str(), c.as_slice())).collect();
        write_schema(&tables, BufWriter::new(File::create(self.dir.join("schema.txt"))?))?;
        self.files.push("schema.txt".into());
        self.files.push("run.json".into());
        let manifest = json!({
            "command": command,
            "config": config,
            "versions": {
                "bbm": env!("CARGO_PKG_VERSION"),
                "bbm_core": bbm_core::VERSION,
            },
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "gamma": gamma,
            "results": results,
            "files": self.files,
        });
        let body = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::from)?;
        fs::write(self.dir.join("run.json"), body + "\n")?;
        Ok(())
    }
}

/// gnuplot script drawing the invariant drifts from `invariants.csv`.
pub fn invariants_plot() -> String {
    "set datafile separator ','\n\
     set key autotitle columnhead\n\
     set xlabel 't'\n\
     set logscale y\n\
     set format y '%.0e'\n\
     stats 'invariants.csv' using 2 every ::0::0 name 'M0' nooutput\n\
     stats 'invariants.csv' using 3 every ::0::0 name 'I0' nooutput\n\
     stats 'invariants.csv' using 4 every ::0::0 name 'H0' nooutput\n\
     stats 'invariants.csv' using 5 every ::0::0 name 'E0' nooutput\n\
     plot 'invariants.csv' using 1:(abs($2-M0_min)+1e-18) with lines title 'mass', \\\n\
     \x20    '' using 1:(abs($3-I0_min)+1e-18) with lines title 'momentum', \\\n\
     \x20    '' using 1:(abs($4-H0_min)+1e-18) with lines title 'impulse', \\\n\
     \x20    '' using 1:(abs($5-E0_min)+1e-18) with lines title 'energy'\n\
     pause -1\n"
        .to_string()
}

/// gnuplot script of the errors against `dx` on log axes.
pub fn convergence_plot() -> String {
    "set datafile separator ','\n\
     set key autotitle columnhead left\n\
     set logscale xy\n\
     set xlabel 'dx'\n\
     plot 'convergence.csv' using 1:2 with linespoints, '' using 1:4 with linespoints, \\\n\
     \x20    '' using 1:6 with linespoints, '' using 1:8 with linespoints, \\\n\
     \x20    '' using 1:10 with linespoints, '' using 1:12 with linespoints\n\
     pause -1\n"
        .to_string()
}

/// gnuplot script of the tracking errors in `track.csv`.
pub fn track_plot() -> String {
    "set datafile separator ','\n\
     set key autotitle columnhead\n\
     set logscale y\n\
     set xlabel 't'\n\
     plot 'track.csv' using 1:4 with lines, '' using 1:5 with lines, '' using 1:6 with lines\n\
     pause -1\n"
        .to_string()
}

/// gnuplot script of every snapshot in `snapshots.csv`, one panel per time.
pub fn snapshot_plot(times: &[f64]) -> String {
    let mut s = String::from(
        "set datafile separator ','\n\
         set xlabel 'x'\n\
         set ylabel 'eta'\n",
    );
    s.push_str(&format!("set multiplot layout {},1\n", times.len().max(1)));
    for t in times {
        s.push_str(&format!(
            "plot 'snapshots.csv' using 2:(abs($1-({t:e})) < 1e-9 ? $3 : 1/0) with lines title 't = {t}'\n"
        ));
    }
    s.push_str("unset multiplot\npause -1\n");
    s
}

/// gnuplot script of the Petviashvili residual history.
pub fn residual_plot() -> String {
    "set datafile separator ','\n\
     set key autotitle columnhead\n\
     set logscale y\n\
     set xlabel 'iteration'\n\
     plot 'residuals.csv' using 1:2 with linespoints\n\
     pause -1\n"
        .to_string()
}
