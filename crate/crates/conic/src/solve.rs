//! Interior-point solve of a [`ConicProgram`].
//!
//! The heavy lifting is delegated to Clarabel, a homogeneous self-dual
//! embedding interior-point method with Nesterov-Todd scaling on symmetric
//! cones and a native nonsymmetric exponential cone. The backend's own
//! termination status is not trusted blindly: `Optimal` is only reported
//! when the residuals recomputed here (primal via [`audit`], dual from
//! `c + A^T z`, relative gap) are all within `tol`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use serde::{Deserialize, Serialize};

use crate::audit::audit;
use crate::error::ConicError;
use crate::program::{AffineExpr, ConicProgram};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalError,
}

impl std::fmt::Display for ConicStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConicStatus::Optimal => "optimal",
            ConicStatus::Infeasible => "infeasible",
            ConicStatus::Unbounded => "unbounded",
            ConicStatus::MaxIter => "max_iter",
            ConicStatus::NumericalError => "numerical_error",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicSolution {
    pub status: ConicStatus,
    pub primal: Vec<f64>,
    /// `c^T x` evaluated at `primal`.
    pub objective_value: f64,
    /// Dual bound `-b^T z` of the conic dual.
    pub dual_objective: f64,
    pub max_primal_residual: f64,
    pub max_dual_residual: f64,
    pub duality_gap: f64,
    pub iterations: u32,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == ConicStatus::Optimal
    }

    fn without_solve(program: &ConicProgram, status: ConicStatus) -> Self {
        Self {
            status,
            primal: vec![0.0; program.num_vars],
            objective_value: f64::NAN,
            dual_objective: f64::NAN,
            max_primal_residual: f64::INFINITY,
            max_dual_residual: f64::INFINITY,
            duality_gap: f64::INFINITY,
            iterations: 0,
        }
    }
}

/// Standard form `A x + s = b`, `s` in the product cone, as triplets.
struct StandardForm {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
}

impl StandardForm {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
            b: Vec::new(),
            cones: Vec::new(),
        }
    }

    /// Pushes the row `a^T x + s = rhs`.
    fn push_row(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        let row = self.b.len();
        for &(j, a) in coeffs {
            if a != 0.0 {
                self.rows.push(row);
                self.cols.push(j);
                self.vals.push(a);
            }
        }
        self.b.push(rhs);
    }

    /// Pushes a cone entry `s = expr(x)`, i.e. `-f^T x + s = d`.
    fn push_affine(&mut self, expr: &AffineExpr) {
        let expr = expr.compacted();
        let negated: Vec<(usize, f64)> = expr.terms.iter().map(|&(j, a)| (j, -a)).collect();
        self.push_row(&negated, expr.constant);
    }

    fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// `c + A^T z`, infinity norm.
    fn dual_residual(&self, c: &[f64], z: &[f64]) -> f64 {
        let mut r = c.to_vec();
        for ((&i, &j), &v) in self.rows.iter().zip(&self.cols).zip(&self.vals) {
            r[j] += v * z[i];
        }
        r.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }
}

enum Translation {
    Form(StandardForm),
    /// An all-zero row with an unsatisfiable right-hand side.
    TriviallyInfeasible,
}

fn translate(program: &ConicProgram, tol: f64) -> Translation {
    let mut form = StandardForm::new();

    let eq: Vec<_> = program
        .linear_eq
        .iter()
        .map(|r| {
            (
                AffineExpr {
                    terms: r.coeffs.clone(),
                    constant: -r.rhs,
                }
                .compacted(),
                r.rhs,
            )
        })
        .collect();
    let mut n_eq = 0;
    for (expr, rhs) in &eq {
        if expr.terms.is_empty() {
            if rhs.abs() > tol {
                return Translation::TriviallyInfeasible;
            }
            continue;
        }
        form.push_row(&expr.terms, *rhs);
        n_eq += 1;
    }
    if n_eq > 0 {
        form.cones.push(SupportedConeT::ZeroConeT(n_eq));
    }

    let mut n_ineq = 0;
    for row in &program.linear_ineq {
        let expr = AffineExpr {
            terms: row.coeffs.clone(),
            constant: 0.0,
        }
        .compacted();
        if expr.terms.is_empty() {
            if row.rhs < -tol {
                return Translation::TriviallyInfeasible;
            }
            continue;
        }
        form.push_row(&expr.terms, row.rhs);
        n_ineq += 1;
    }
    if n_ineq > 0 {
        form.cones.push(SupportedConeT::NonnegativeConeT(n_ineq));
    }

    for block in &program.soc_blocks {
        form.push_affine(&block.bound);
        for e in &block.entries {
            form.push_affine(e);
        }
        form.cones
            .push(SupportedConeT::SecondOrderConeT(block.entries.len() + 1));
    }

    // Backend ordering is (x, y, z) with y exp(x / y) <= z.
    for block in &program.exp_blocks {
        form.push_affine(&block.x3);
        form.push_affine(&block.x2);
        form.push_affine(&block.x1);
        form.cones.push(SupportedConeT::ExponentialConeT());
    }

    Translation::Form(form)
}

/// Solves `program` to tolerance `opts.tol`.
///
/// Returns `Err` only for malformed programs or invalid options; solver
/// outcomes (including infeasibility) are reported through
/// [`ConicSolution::status`].
pub fn solve(program: &ConicProgram, opts: &SolveOptions) -> Result<ConicSolution, ConicError> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(ConicError::InvalidTolerance(opts.tol));
    }
    program.validate()?;

    let form = match translate(program, opts.tol) {
        Translation::Form(f) => f,
        Translation::TriviallyInfeasible => {
            return Ok(ConicSolution::without_solve(
                program,
                ConicStatus::Infeasible,
            ))
        }
    };

    // A stalled default run is retried once with tighter regularization and
    // deeper iterative refinement.
    let mut attempt = run_backend(program, &form, opts, false)?;
    if attempt.stalled {
        let precise = run_backend(program, &form, opts, true)?;
        if precise.solution.status == ConicStatus::Optimal {
            attempt = precise;
        }
    }
    Ok(attempt.solution)
}

struct Attempt {
    solution: ConicSolution,
    /// The backend stopped short of its tolerances without a certificate.
    stalled: bool,
}

fn run_backend(
    program: &ConicProgram,
    form: &StandardForm,
    opts: &SolveOptions,
    precise: bool,
) -> Result<Attempt, ConicError> {
    let n = program.num_vars;
    let m = form.num_rows();
    let p = CscMatrix::<f64>::zeros((n, n));
    let a = CscMatrix::new_from_triplets(
        m,
        n,
        form.rows.clone(),
        form.cols.clone(),
        form.vals.clone(),
    );

    // Backend tolerances sit one decade below the contract so the
    // recomputed residuals land inside it.
    let inner = opts.tol * 0.1;
    let mut settings = DefaultSettings {
        max_iter: opts.max_iter,
        verbose: false,
        tol_feas: inner,
        tol_gap_abs: inner,
        tol_gap_rel: inner,
        max_threads: 1,
        ..DefaultSettings::default()
    };
    if precise {
        settings.static_regularization_constant = 1e-10;
        settings.iterative_refinement_reltol = 1e-14;
        settings.iterative_refinement_abstol = 1e-15;
        settings.iterative_refinement_max_iter = 50;
        settings.iterative_refinement_stop_ratio = 1.0;
        settings.max_step_fraction = 0.95;
    }

    let mut solver = DefaultSolver::new(&p, &program.objective, &a, &form.b, &form.cones, settings)
        .map_err(|e| ConicError::Backend(e.to_string()))?;
    solver.solve();
    let sol = &solver.solution;

    let primal = sol.x.clone();
    let finite = primal.iter().all(|v| v.is_finite()) && sol.z.iter().all(|v| v.is_finite());
    let objective_value = program.objective_value(&primal);
    let dual_objective = -form.b.iter().zip(&sol.z).map(|(b, z)| b * z).sum::<f64>();

    let (max_primal_residual, max_dual_residual, duality_gap) = if finite {
        let c_scale = program
            .objective
            .iter()
            .fold(0.0, |m: f64, c| m.max(c.abs()));
        (
            audit(program, &primal).worst(),
            form.dual_residual(&program.objective, &sol.z) / (1.0 + c_scale),
            (objective_value - dual_objective).abs()
                / (1.0 + objective_value.abs().min(dual_objective.abs())),
        )
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    };
    let within_tol =
        max_primal_residual <= opts.tol && max_dual_residual <= opts.tol && duality_gap <= opts.tol;

    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved | SolverStatus::InsufficientProgress
            if within_tol =>
        {
            ConicStatus::Optimal
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            ConicStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => ConicStatus::Unbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => ConicStatus::MaxIter,
        _ => ConicStatus::NumericalError,
    };
    let stalled = matches!(status, ConicStatus::NumericalError | ConicStatus::MaxIter);

    let solution = ConicSolution {
        status,
        primal,
        objective_value,
        dual_objective,
        max_primal_residual,
        max_dual_residual,
        duality_gap,
        iterations: sol.iterations,
    };
    Ok(Attempt { solution, stalled })
}
