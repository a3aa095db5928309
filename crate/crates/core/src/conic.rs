//! Block-structured linear/semidefinite feasibility problems and the solver
//! backend. Nothing outside this module talks to the numerical solver.
//!
//! Variables are nonnegative or free scalars plus symmetric PSD blocks.
//! Constraints are linear equalities; an optional linear objective is
//! minimized. Solutions reported as feasible have been re-checked here
//! (equality residuals recomputed, block eigenvalues from a separate
//! eigendecomposition), not taken from the solver's own report.

use std::cell::Cell;
use std::collections::HashMap;
use std::panic::AssertUnwindSafe;
use std::sync::Once;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use serde::{Deserialize, Serialize};

use crate::error::{CoposError, Result};
use crate::matrix::SymMatrix;

/// An inexact infeasibility ray from the backend is accepted when its
/// violation is below this multiple of `feas_tol`.
pub const RAY_TOL_FACTOR: f64 = 10.0;

/// Environment variable overriding both default tolerances.
pub const TOL_ENV: &str = "COPOS_SOLVER_TOL";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feas_tol: f64,
    pub psd_tol: f64,
    /// Seconds.
    pub time_limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let tol = std::env::var(TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| *t > 0.0)
            .unwrap_or(1e-7);
        Self {
            feas_tol: tol,
            psd_tol: tol,
            time_limit: 600.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Scalar(usize),
    /// Entry `(i, j)` of a block; `(i, j)` and `(j, i)` name the same variable.
    Entry { block: usize, i: usize, j: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    Nonneg,
    Free,
}

pub type LinExpr = Vec<(Var, f64)>;

#[derive(Clone, Debug, Default)]
pub struct FeasibilityProblem {
    blocks: Vec<usize>,
    scalars: Vec<ScalarKind>,
    equalities: Vec<(LinExpr, f64)>,
    objective: Option<LinExpr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub scalars: Vec<f64>,
    pub blocks: Vec<SymMatrix>,
    pub objective_value: Option<f64>,
    pub max_equality_residual: f64,
    pub min_block_eigenvalue: f64,
    /// Smallest value among the nonnegative scalars.
    pub min_nonneg_scalar: f64,
    /// The solver's own status, for diagnostics.
    pub solver_status: String,
    pub iterations: u32,
}

impl SolveResult {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }

    pub fn value(&self, v: Var) -> f64 {
        match v {
            Var::Scalar(s) => self.scalars[s],
            Var::Entry { block, i, j } => self.blocks[block].get(i, j),
        }
    }
}

thread_local! {
    static IN_SOLVER: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f`, turning a panic into `Err` without printing it.
fn quiet_catch<T>(f: impl FnOnce() -> T) -> std::thread::Result<T> {
    static HOOK: Once = Once::new();
    HOOK.call_once(|| {
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(move |info| {
            if !IN_SOLVER.with(Cell::get) {
                prev(info);
            }
        }));
    });
    IN_SOLVER.with(|c| c.set(true));
    let r = std::panic::catch_unwind(AssertUnwindSafe(f));
    IN_SOLVER.with(|c| c.set(false));
    r
}

/// Position of `(i, j)`, `i <= j`, in the column-major upper triangle.
fn tri_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

impl FeasibilityProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, dim: usize) -> usize {
        self.blocks.push(dim);
        self.blocks.len() - 1
    }

    pub fn add_scalar(&mut self, kind: ScalarKind) -> usize {
        self.scalars.push(kind);
        self.scalars.len() - 1
    }

    pub fn add_equality(&mut self, expr: LinExpr, rhs: f64) {
        self.equalities.push((expr, rhs));
    }

    pub fn set_objective(&mut self, expr: LinExpr) {
        self.objective = Some(expr);
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_scalars(&self) -> usize {
        self.scalars.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.equalities.len()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.blocks
    }

    fn offsets(&self) -> (Vec<usize>, usize) {
        let mut offs = Vec::with_capacity(self.blocks.len());
        let mut at = self.scalars.len();
        for &d in &self.blocks {
            offs.push(at);
            at += d * (d + 1) / 2;
        }
        (offs, at)
    }

    fn column(&self, v: Var, offs: &[usize]) -> Result<usize> {
        match v {
            Var::Scalar(s) if s < self.scalars.len() => Ok(s),
            Var::Entry { block, i, j }
                if block < self.blocks.len() && i < self.blocks[block] && j < self.blocks[block] =>
            {
                Ok(offs[block] + tri_index(i, j))
            }
            _ => Err(CoposError::MalformedProblem(format!(
                "undeclared variable {v:?}"
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(&d) = self.blocks.iter().find(|&&d| d == 0) {
            return Err(CoposError::MalformedProblem(format!("block of dimension {d}")));
        }
        for (expr, rhs) in &self.equalities {
            if !rhs.is_finite() || expr.iter().any(|(_, c)| !c.is_finite()) {
                return Err(CoposError::MalformedProblem("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    fn unpack(&self, x: &[f64], offs: &[usize]) -> (Vec<f64>, Vec<SymMatrix>) {
        let scalars = x[..self.scalars.len()].to_vec();
        let blocks = self
            .blocks
            .iter()
            .zip(offs)
            .map(|(&d, &o)| SymMatrix::from_fn(d, |i, j| x[o + tri_index(i, j)]))
            .collect();
        (scalars, blocks)
    }

    fn eval(expr: &LinExpr, scalars: &[f64], blocks: &[SymMatrix]) -> f64 {
        expr.iter()
            .map(|&(v, c)| {
                c * match v {
                    Var::Scalar(s) => scalars[s],
                    Var::Entry { block, i, j } => blocks[block].get(i, j),
                }
            })
            .sum()
    }

    /// Solves with the configured backend and re-checks any claimed solution.
    pub fn solve(&self, tols: &Tolerances) -> Result<SolveResult> {
        self.validate()?;
        let (offs, nvar) = self.offsets();

        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut b = Vec::new();
        let mut cones = Vec::new();

        for (expr, rhs) in &self.equalities {
            let r = b.len();
            for &(v, c) in expr {
                rows.push(r);
                cols.push(self.column(v, &offs)?);
                vals.push(c);
            }
            b.push(*rhs);
        }
        if !self.equalities.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(self.equalities.len()));
        }

        let nonneg: Vec<usize> = (0..self.scalars.len())
            .filter(|&s| self.scalars[s] == ScalarKind::Nonneg)
            .collect();
        for &s in &nonneg {
            rows.push(b.len());
            cols.push(s);
            vals.push(-1.0);
            b.push(0.0);
        }
        if !nonneg.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(nonneg.len()));
        }

        // Slack s = -A x is the scaled upper triangle (√2 off the diagonal).
        for (&d, &o) in self.blocks.iter().zip(&offs) {
            for j in 0..d {
                for i in 0..=j {
                    rows.push(b.len());
                    cols.push(o + tri_index(i, j));
                    vals.push(if i == j { -1.0 } else { -std::f64::consts::SQRT_2 });
                    b.push(0.0);
                }
            }
            cones.push(SupportedConeT::PSDTriangleConeT(d));
        }

        let mut q = vec![0.0; nvar];
        if let Some(obj) = &self.objective {
            for &(v, c) in obj {
                q[self.column(v, &offs)?] += c;
            }
        }

        let triplets: Vec<(usize, usize, f64)> = rows
            .iter()
            .zip(&cols)
            .zip(&vals)
            .map(|((&r, &c), &v)| (r, c, v))
            .collect();
        let a = CscMatrix::new_from_triplets(b.len(), nvar, rows, cols, vals);
        let p = CscMatrix::zeros((nvar, nvar));
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(400)
            .time_limit(tols.time_limit)
            .tol_feas(1e-10)
            .tol_gap_abs(1e-10)
            .tol_gap_rel(1e-10)
            .build()
            .map_err(|e| CoposError::MalformedProblem(format!("solver settings: {e}")))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| CoposError::MalformedProblem(format!("solver setup: {e}")))?;
        // The backend panics on some numerical failures (eigensolver errors).
        let solved = quiet_catch(|| solver.solve());
        if solved.is_err() {
            let zero = vec![0.0; nvar];
            let (scalars, blocks) = self.unpack(&zero, &offs);
            return Ok(SolveResult {
                status: SolveStatus::Unknown,
                scalars,
                blocks,
                objective_value: None,
                max_equality_residual: f64::INFINITY,
                min_block_eigenvalue: f64::NEG_INFINITY,
                min_nonneg_scalar: f64::NEG_INFINITY,
                solver_status: "Panicked".into(),
                iterations: 0,
            });
        }

        let sol = &solver.solution;
        let (scalars, blocks) = self.unpack(&sol.x, &offs);
        let max_equality_residual = self
            .equalities
            .iter()
            .map(|(e, rhs)| (Self::eval(e, &scalars, &blocks) - rhs).abs())
            .fold(0.0, f64::max);
        let min_block_eigenvalue = blocks
            .iter()
            .map(SymMatrix::min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        let min_nonneg_scalar = nonneg
            .iter()
            .map(|&s| scalars[s])
            .fold(f64::INFINITY, f64::min);
        let objective_value = self
            .objective
            .as_ref()
            .map(|o| Self::eval(o, &scalars, &blocks));

        let checks_pass = max_equality_residual <= tols.feas_tol
            && min_block_eigenvalue >= -tols.psd_tol
            && min_nonneg_scalar >= -tols.feas_tol;
        let status = match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved if checks_pass => {
                SolveStatus::Feasible
            }
            SolverStatus::PrimalInfeasible => SolveStatus::Infeasible,
            SolverStatus::AlmostPrimalInfeasible
                if self.ray_violation(&triplets, &b, &sol.z, nonneg.len(), nvar)
                    <= RAY_TOL_FACTOR * tols.feas_tol =>
            {
                SolveStatus::Infeasible
            }
            _ => SolveStatus::Unknown,
        };

        Ok(SolveResult {
            status,
            scalars,
            blocks,
            objective_value,
            max_equality_residual,
            min_block_eigenvalue,
            min_nonneg_scalar,
            solver_status: if status == SolveStatus::Infeasible
                && sol.status == SolverStatus::AlmostPrimalInfeasible
            {
                "AlmostPrimalInfeasible (ray verified)".into()
            } else {
                format!("{:?}", sol.status)
            },
            iterations: sol.iterations,
        })
    }
}

impl FeasibilityProblem {
    /// How far `z` is from a Farkas ray of `{x : b − Ax ∈ K}` once scaled
    /// to `b^T z = −1`: the largest of `‖A^T z‖∞` and the dual cone
    /// violations. Infinite when `b^T z ≥ 0`.
    fn ray_violation(
        &self,
        a: &[(usize, usize, f64)],
        b: &[f64],
        z: &[f64],
        n_nonneg: usize,
        nvar: usize,
    ) -> f64 {
        let bz: f64 = b.iter().zip(z).map(|(x, y)| x * y).sum();
        if !(bz < 0.0) || z.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let z: Vec<f64> = z.iter().map(|v| v / -bz).collect();
        let mut atz = vec![0.0; nvar];
        for &(r, c, v) in a {
            atz[c] += v * z[r];
        }
        let mut worst = atz.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut at = self.equalities.len();
        for v in &z[at..at + n_nonneg] {
            worst = worst.max(-v);
        }
        at += n_nonneg;
        for &d in &self.blocks {
            let blk = &z[at..at + d * (d + 1) / 2];
            let m = SymMatrix::from_fn(d, |i, j| {
                let v = blk[tri_index(i, j)];
                if i == j { v } else { v / std::f64::consts::SQRT_2 }
            });
            worst = worst.max(-m.min_eigenvalue());
            at += d * (d + 1) / 2;
        }
        worst
    }
}

/// Merges repeated variables in a linear expression and drops zeros.
pub fn compact(expr: LinExpr) -> LinExpr {
    let mut acc: HashMap<Var, f64> = HashMap::new();
    let mut order = Vec::new();
    for (v, c) in expr {
        let v = match v {
            Var::Entry { block, i, j } if i > j => Var::Entry { block, i: j, j: i },
            v => v,
        };
        let e = acc.entry(v).or_insert_with(|| {
            order.push(v);
            0.0
        });
        *e += c;
    }
    order
        .into_iter()
        .filter_map(|v| {
            let c = acc[&v];
            (c != 0.0).then_some((v, c))
        })
        .collect()
}
