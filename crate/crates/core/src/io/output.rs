use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::scheme::State;

pub const ENERGY_HEADER: &str = "n,t,e_kin,e_mix,e_ent,e_pressure,e_mod,d_visc,d_mu,d_c";
pub const MANIFEST_NAME: &str = "manifest.sha256";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Legacy ASCII VTK structured points: `phi`, `c`, `p` and the
/// cell-averaged velocity as cell data.
pub fn render_vtk(state: &State) -> String {
    let g = state.grid();
    let (cu, cv) = state.vel.cell_averaged();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "permeaflow n={} t={}", state.n, num(state.t));
    s.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", g.nx + 1, g.ny + 1);
    let _ = writeln!(s, "ORIGIN {} {} {}", num(g.x_min), num(g.y_min), num(0.0));
    let _ = writeln!(s, "SPACING {} {} {}", num(g.hx), num(g.hy), num(1.0));
    let _ = writeln!(s, "CELL_DATA {}", g.cell_count());
    for (name, f) in [("phi", &state.phi), ("c", &state.c), ("p", &state.p)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in &f.data {
            let _ = writeln!(s, "{}", num(*v));
        }
    }
    s.push_str("VECTORS velocity double\n");
    for (u, v) in cu.data.iter().zip(&cv.data) {
        let _ = writeln!(s, "{} {} {}", num(*u), num(*v), num(0.0));
    }
    s
}

/// CSV twin of the snapshot, one row per cell.
pub fn render_csv(state: &State) -> String {
    let g = state.grid();
    let (cu, cv) = state.vel.cell_averaged();
    let mut s = String::from("x,y,phi,c,p,u,v\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.cell_index(i, j);
            let row = [g.xc(i), g.yc(j), state.phi.data[k], state.c.data[k], state.p.data[k], cu.data[k], cv.data[k]];
            let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the VTK file at `path` and the CSV twin next to it; returns both paths.
pub fn write_snapshot(state: &State, path: &Path) -> Result<Vec<PathBuf>> {
    let csv = path.with_extension("csv");
    write_file(path, &render_vtk(state))?;
    write_file(&csv, &render_csv(state))?;
    Ok(vec![path.to_path_buf(), csv])
}

/// Appends one row to the energy CSV, writing the header first if the file
/// is new or empty.
pub fn append_energy_log(report: &EnergyReport, t: f64, n: usize, path: &Path) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let empty = file.metadata().map_err(|e| Error::io(path, e))?.len() == 0;
    let mut row = String::new();
    if empty {
        row.push_str(ENERGY_HEADER);
        row.push('\n');
    }
    let vals = [
        t,
        report.e_kin,
        report.e_mix,
        report.e_ent,
        report.e_pressure,
        report.e_mod,
        report.d_visc,
        report.d_mu,
        report.d_c,
    ];
    let _ = write!(row, "{n}");
    for v in vals {
        let _ = write!(row, ",{}", num(v));
    }
    row.push('\n');
    file.write_all(row.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes `hash  path` lines for every artifact (paths relative to `dir`
/// when possible) and returns the manifest path.
pub fn write_manifest(dir: &Path, artifacts: &[PathBuf]) -> Result<PathBuf> {
    let mut seen = std::collections::BTreeSet::new();
    let mut s = String::new();
    for a in artifacts {
        if !seen.insert(a.clone()) {
            continue;
        }
        let rel = a.strip_prefix(dir).unwrap_or(a);
        let _ = writeln!(s, "{}  {}", sha256_file(a)?, rel.display());
    }
    let path = dir.join(MANIFEST_NAME);
    write_file(&path, &s)?;
    Ok(path)
}
