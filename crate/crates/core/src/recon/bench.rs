use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{choose_controller, generate_instance, ControllerChoice, InstanceKind};
use super::solvers::{controlled_richardson_solve, richardson_solve, Solve, SolverConfig};
use crate::error::{Error, Result};
use crate::frames::frame_operator;
use crate::opcore::{gl_plus_check, hermitian_part, Operator, Tolerances};
use crate::sampling;

pub const CSV_HEADER: &str = "instance_id,dim,n,cond_S,cond_precond,iters_plain,iters_controlled,speedup,converged_plain,converged_controlled";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub kinds: Vec<InstanceKind>,
    pub dims: Vec<usize>,
    pub cond_targets: Vec<f64>,
    pub trials: usize,
    /// Frame size is `oversampling * dim`.
    pub oversampling: usize,
    pub controller: ControllerChoice,
    pub solver: SolverConfig,
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            kinds: vec![InstanceKind::IllConditioned],
            dims: vec![16],
            cond_targets: vec![1e2],
            trials: 5,
            oversampling: 2,
            controller: ControllerChoice::Instance,
            solver: SolverConfig::default(),
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: String,
    pub dim: usize,
    pub n_vectors: usize,
    pub cond_s: f64,
    pub cond_precond: f64,
    pub iters_plain: usize,
    pub iters_controlled: usize,
    /// `iters_plain / iters_controlled`, present only when both solves converged.
    pub speedup: Option<f64>,
    pub converged_plain: bool,
    pub converged_controlled: bool,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        let speedup = self.speedup.map(|s| s.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.dim,
            self.n_vectors,
            self.cond_s,
            self.cond_precond,
            self.iters_plain,
            self.iters_controlled,
            speedup,
            self.converged_plain,
            self.converged_controlled
        )
    }
}

struct Cell {
    index: usize,
    kind: InstanceKind,
    dim: usize,
    cond: f64,
    trial: usize,
}

fn outcome(r: Result<Solve>) -> (usize, bool) {
    match r {
        Ok(s) => (s.trace.iterations, true),
        Err(Error::NotConverged(s)) => (s.trace.iterations, false),
        Err(_) => (0, false),
    }
}

fn condition(op: &Operator, tol: &Tolerances) -> f64 {
    let h = Operator::from_matrix_unchecked(hermitian_part(op.matrix()));
    gl_plus_check(&h, tol)
        .map(|b| b.condition_number())
        .unwrap_or(f64::INFINITY)
}

fn run_cell(cell: &Cell, cfg: &BenchConfig, seed: u64) -> BenchRow {
    let tol = Tolerances::default();
    let n = (cfg.oversampling * cell.dim).max(cell.dim);
    let instance_id = format!("{}-d{}-c{}-t{}", cell.kind, cell.dim, cell.cond, cell.trial);
    let failed = |dim: usize, n: usize| BenchRow {
        instance_id: instance_id.clone(),
        dim,
        n_vectors: n,
        cond_s: f64::INFINITY,
        cond_precond: f64::INFINITY,
        iters_plain: 0,
        iters_controlled: 0,
        speedup: None,
        converged_plain: false,
        converged_controlled: false,
    };
    let inst = match generate_instance(cell.kind, cell.dim, n, cell.cond, seed) {
        Ok(i) => i,
        Err(_) => return failed(cell.dim, n),
    };
    let (dim, n) = (inst.frame.dim(), inst.frame.count());
    let s = frame_operator(&inst.frame);
    let g = sampling::random_vector(&mut sampling::rng(seed ^ 0x9e37_79b9_7f4a_7c15), dim);
    let solver = SolverConfig { seed, ..cfg.solver };

    let cond_s = condition(&s, &tol);
    let (iters_plain, converged_plain) = match gl_plus_check(&s, &tol) {
        Ok(bounds) => outcome(richardson_solve(&s, &g, bounds, &solver)),
        Err(_) => (0, false),
    };
    let (cond_precond, iters_controlled, converged_controlled) =
        match choose_controller(&inst, cfg.controller, &tol) {
            Ok(ctrl) => {
                let cp = condition(&ctrl.operator().compose(&s), &tol);
                let (it, ok) = outcome(controlled_richardson_solve(
                    &inst.frame,
                    &ctrl,
                    &inst.k,
                    &g,
                    &solver,
                ));
                (cp, it, ok)
            }
            Err(_) => (f64::INFINITY, 0, false),
        };
    let speedup = (converged_plain && converged_controlled && iters_controlled > 0)
        .then(|| iters_plain as f64 / iters_controlled as f64);
    BenchRow {
        instance_id,
        dim,
        n_vectors: n,
        cond_s,
        cond_precond,
        iters_plain,
        iters_controlled,
        speedup,
        converged_plain,
        converged_controlled,
    }
}

/// Runs every (kind, dim, cond, trial) cell. Cell `i` uses seed `cfg.solver.seed + i`,
/// so rows are identical whether or not cells run concurrently.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.solver.validate()?;
    if cfg.kinds.is_empty() || cfg.dims.is_empty() || cfg.cond_targets.is_empty() || cfg.trials == 0
    {
        return Err(Error::InvalidParameters("benchmark grid is empty".into()));
    }
    if cfg.oversampling == 0 || cfg.dims.contains(&0) {
        return Err(Error::InvalidParameters(
            "dims and oversampling must be positive".into(),
        ));
    }
    if let Some(c) = cfg
        .cond_targets
        .iter()
        .find(|c| !(**c >= 1.0 && c.is_finite()))
    {
        return Err(Error::InvalidParameters(format!(
            "condition target {c} is not >= 1"
        )));
    }
    let mut cells = Vec::new();
    for &kind in &cfg.kinds {
        for &dim in &cfg.dims {
            for &cond in &cfg.cond_targets {
                for trial in 0..cfg.trials {
                    cells.push(Cell {
                        index: cells.len(),
                        kind,
                        dim,
                        cond,
                        trial,
                    });
                }
            }
        }
    }
    let base = cfg.solver.seed;
    let run = |c: &Cell| run_cell(c, cfg, base.wrapping_add(c.index as u64));
    Ok(if cfg.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    })
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}
