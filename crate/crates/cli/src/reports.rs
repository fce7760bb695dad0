//! Report writers. Output is byte-deterministic for identical results:
//! floating point values are printed with Rust's shortest round-trip
//! formatting and rows follow the data order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use muspar_core::diagnostics::EnergyAudit;
use muspar_core::fem::{FemFunction, FemSpace, Mesh};
use muspar_core::harness::ConvergenceReport;
use muspar_core::stepper::DiscreteTrajectory;

use crate::runner::RunnerError;

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<PathBuf, RunnerError> {
    fs::create_dir_all(dir)
        .map_err(|e| RunnerError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| RunnerError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_json<T: serde::Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
) -> Result<PathBuf, RunnerError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| RunnerError::Io(format!("cannot serialize {name}: {e}")))?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Ledger CSV: one row per time step (header only for an empty audit).
pub fn ledger_csv(audit: &EnergyAudit) -> String {
    let mut out = String::from("n,t_n,b_norm_sq,jump_sq,modular,data_term,lhs_cum,rhs_cum,verdict\n");
    for row in &audit.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.n,
            row.t,
            row.b_norm_sq,
            row.jump_sq,
            row.modular,
            row.data_term,
            row.lhs_cum,
            row.rhs,
            if row.pass { "pass" } else { "fail" }
        );
    }
    out
}

/// Convergence table CSV; the rate column is empty on the first level.
pub fn study_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("level,tau_or_h,err_L1,err_L2,rate\n");
    for row in &report.rows {
        let rate = row.rate.map(|r| r.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.level, row.tau_or_h, row.err_l1, row.err_l2, rate
        );
    }
    out
}

/// Nodal field CSV over all vertices (boundary values included).
pub fn field_csv(space: &FemSpace, u: &FemFunction) -> String {
    let mesh = space.mesh();
    let mut out = String::from("vertex,x,y,value\n");
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        let _ = writeln!(out, "{},{},{},{}", v, p[0], p[1], u.vertex_value(v));
    }
    out
}

pub fn trajectory_csv(traj: &DiscreteTrajectory) -> String {
    let mesh = traj.space().mesh();
    let grid = traj.grid();
    let mut out = String::from("step,t,vertex,x,y,value\n");
    for (n, state) in traj.states().iter().enumerate() {
        let t = grid.node(n);
        for v in 0..mesh.n_vertices() {
            let p = mesh.vertex(v);
            let _ = writeln!(out, "{},{},{},{},{},{}", n, t, v, p[0], p[1], state.vertex_value(v));
        }
    }
    out
}

/// Plain-text mesh listing: vertices with coordinates, cells with vertex ids,
/// and the boundary vertex set.
pub fn mesh_text(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim {}", mesh.dim());
    let _ = writeln!(out, "vertices {}", mesh.n_vertices());
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        let _ = writeln!(out, "v {} {} {}", v, p[0], p[1]);
    }
    let _ = writeln!(out, "cells {}", mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let ids: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "c {} {}", c, ids.join(" "));
    }
    let boundary: Vec<String> = mesh.boundary_vertices().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "boundary {}", boundary.join(" "));
    out
}
