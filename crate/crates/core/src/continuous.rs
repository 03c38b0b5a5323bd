//! Smooth problems: fairness ascent along a parametrized optimum.
//!
//! Here the solution is a point `s` in ℝ^d′ rather than a subset, the utility
//! `U(θ, s)` is twice differentiable, and for each θ the inner problem picks
//! `s*(θ) = argmax_s U(θ, s)`. Differentiating the stationarity condition
//! `∇_s U(θ, s*(θ)) = 0` in θ gives the sensitivity of the optimum, and with
//! it the gradient of the fairness value `f(θ) = F(s*(θ))`:
//!
//! ```text
//! G(θ) = −[∇_θ ∇_sᵀ U] · [∇_s ∇_sᵀ U]⁻¹ · ∇_s F,   evaluated at (θ, s*(θ)).
//! ```
//!
//! The Hessian solve is the only linear algebra involved; it is done with
//! partially pivoted LU plus an exact 1-norm condition number (the dimensions
//! here are tiny). A Hessian that is singular, or so ill-conditioned that the
//! computed direction would be noise ([`CONDITION_LIMIT`]), surfaces as
//! [`Error::SingularHessian`] rather than as a confidently wrong gradient.
//! Linear utilities have identically zero curvature, so problems like the
//! relaxed selection below are *supposed* to end there.
//!
//! [`alternating_ascent`] interleaves a projected gradient step on `s` (or an
//! exact inner solve when the problem provides one) with a projected step on
//! θ along `G`. The trace records every iterate so a report can show the
//! path, not just the endpoint. [`finite_difference_audit`] cross-checks the
//! closed-form `G` against central differences of the actual inner optimum,
//! which is the whole-pipeline test that catches sign errors anywhere in the
//! chain.

use crate::error::{Error, Result};

/// Condition numbers above this make the Hessian solve untrustworthy.
pub const CONDITION_LIMIT: f64 = 1e12;

type ScalarField = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type VectorField = Box<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
type MatrixField = Box<dyn Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync>;
type SolutionMap = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type SolutionScalar = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A twice-differentiable parametrized problem, supplied as closures.
///
/// Every evaluator is shape-checked on call; a closure returning the wrong
/// dimension is reported as a parameter error naming the offender instead of
/// corrupting the arithmetic downstream.
pub struct SmoothProblem {
    theta_dim: usize,
    solution_dim: usize,
    utility_fn: ScalarField,
    gradient_fn: VectorField,
    hessian_fn: MatrixField,
    mixed_fn: MatrixField,
    fairness_fn: SolutionScalar,
    fairness_gradient_fn: SolutionMap,
    project_solution_fn: SolutionMap,
    project_theta_fn: SolutionMap,
    exact_inner_fn: Option<SolutionMap>,
}

/// Builder for [`SmoothProblem`]; all pieces except the projections and the
/// exact inner solver are mandatory.
#[derive(Default)]
pub struct SmoothProblemBuilder {
    theta_dim: usize,
    solution_dim: usize,
    utility_fn: Option<ScalarField>,
    gradient_fn: Option<VectorField>,
    hessian_fn: Option<MatrixField>,
    mixed_fn: Option<MatrixField>,
    fairness_fn: Option<SolutionScalar>,
    fairness_gradient_fn: Option<SolutionMap>,
    project_solution_fn: Option<SolutionMap>,
    project_theta_fn: Option<SolutionMap>,
    exact_inner_fn: Option<SolutionMap>,
}

impl std::fmt::Debug for SmoothProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothProblem")
            .field("theta_dim", &self.theta_dim)
            .field("solution_dim", &self.solution_dim)
            .field("has_exact_inner", &self.exact_inner_fn.is_some())
            .finish_non_exhaustive()
    }
}

impl SmoothProblem {
    pub fn builder(theta_dim: usize, solution_dim: usize) -> SmoothProblemBuilder {
        SmoothProblemBuilder { theta_dim, solution_dim, ..Default::default() }
    }

    pub fn theta_dim(&self) -> usize {
        self.theta_dim
    }

    pub fn solution_dim(&self) -> usize {
        self.solution_dim
    }

    pub fn has_exact_inner(&self) -> bool {
        self.exact_inner_fn.is_some()
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.theta_dim {
            return Err(Error::Parameter(format!(
                "θ has dimension {}, problem expects {}",
                theta.len(),
                self.theta_dim
            )));
        }
        Ok(())
    }

    fn check_solution(&self, solution: &[f64]) -> Result<()> {
        if solution.len() != self.solution_dim {
            return Err(Error::Parameter(format!(
                "solution has dimension {}, problem expects {}",
                solution.len(),
                self.solution_dim
            )));
        }
        Ok(())
    }

    fn check_output(&self, what: &str, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::Parameter(format!(
                "{what} returned {got} components, expected {want}"
            )));
        }
        Ok(())
    }

    pub fn utility(&self, theta: &[f64], solution: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_solution(solution)?;
        Ok((self.utility_fn)(theta, solution))
    }

    /// `∇_s U`.
    pub fn gradient(&self, theta: &[f64], solution: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        self.check_solution(solution)?;
        let g = (self.gradient_fn)(theta, solution);
        self.check_output("solution gradient", g.len(), self.solution_dim)?;
        Ok(g)
    }

    /// `∇_s∇_sᵀ U`, a d′×d′ matrix.
    pub fn hessian(&self, theta: &[f64], solution: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_theta(theta)?;
        self.check_solution(solution)?;
        let h = (self.hessian_fn)(theta, solution);
        self.check_output("Hessian", h.len(), self.solution_dim)?;
        for row in &h {
            self.check_output("Hessian row", row.len(), self.solution_dim)?;
        }
        Ok(h)
    }

    /// `∇_θ∇_sᵀ U`, a d×d′ matrix.
    pub fn mixed(&self, theta: &[f64], solution: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_theta(theta)?;
        self.check_solution(solution)?;
        let m = (self.mixed_fn)(theta, solution);
        self.check_output("mixed second derivative", m.len(), self.theta_dim)?;
        for row in &m {
            self.check_output("mixed second derivative row", row.len(), self.solution_dim)?;
        }
        Ok(m)
    }

    pub fn fairness(&self, solution: &[f64]) -> Result<f64> {
        self.check_solution(solution)?;
        Ok((self.fairness_fn)(solution))
    }

    /// `∇_s F`.
    pub fn fairness_gradient_s(&self, solution: &[f64]) -> Result<Vec<f64>> {
        self.check_solution(solution)?;
        let g = (self.fairness_gradient_fn)(solution);
        self.check_output("fairness gradient", g.len(), self.solution_dim)?;
        Ok(g)
    }

    pub fn project_solution(&self, solution: &[f64]) -> Result<Vec<f64>> {
        self.check_solution(solution)?;
        let p = (self.project_solution_fn)(solution);
        self.check_output("solution projection", p.len(), self.solution_dim)?;
        Ok(p)
    }

    pub fn project_theta(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        let p = (self.project_theta_fn)(theta);
        self.check_output("θ projection", p.len(), self.theta_dim)?;
        Ok(p)
    }

    /// `s*(θ)` in closed form, when the problem provides it.
    pub fn exact_inner(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        let f = self.exact_inner_fn.as_ref().ok_or_else(|| {
            Error::Argument("this problem has no exact inner solver".into())
        })?;
        let s = f(theta);
        self.check_output("exact inner solver", s.len(), self.solution_dim)?;
        Ok(s)
    }
}

impl SmoothProblemBuilder {
    pub fn utility(mut self, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.utility_fn = Some(Box::new(f));
        self
    }

    pub fn gradient(
        mut self,
        f: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient_fn = Some(Box::new(f));
        self
    }

    pub fn hessian(
        mut self,
        f: impl Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.hessian_fn = Some(Box::new(f));
        self
    }

    pub fn mixed(
        mut self,
        f: impl Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.mixed_fn = Some(Box::new(f));
        self
    }

    pub fn fairness(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.fairness_fn = Some(Box::new(f));
        self
    }

    pub fn fairness_gradient(
        mut self,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.fairness_gradient_fn = Some(Box::new(f));
        self
    }

    pub fn project_solution(
        mut self,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.project_solution_fn = Some(Box::new(f));
        self
    }

    pub fn project_theta(
        mut self,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.project_theta_fn = Some(Box::new(f));
        self
    }

    pub fn exact_inner(
        mut self,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.exact_inner_fn = Some(Box::new(f));
        self
    }

    pub fn build(self) -> Result<SmoothProblem> {
        if self.theta_dim == 0 || self.solution_dim == 0 {
            return Err(Error::Parameter(
                "θ and solution dimensions must both be at least 1".into(),
            ));
        }
        let mut missing = Vec::new();
        if self.utility_fn.is_none() {
            missing.push("utility");
        }
        if self.gradient_fn.is_none() {
            missing.push("gradient");
        }
        if self.hessian_fn.is_none() {
            missing.push("hessian");
        }
        if self.mixed_fn.is_none() {
            missing.push("mixed");
        }
        if self.fairness_fn.is_none() {
            missing.push("fairness");
        }
        if self.fairness_gradient_fn.is_none() {
            missing.push("fairness_gradient");
        }
        if !missing.is_empty() {
            return Err(Error::Parameter(format!(
                "smooth problem is missing: {}",
                missing.join(", ")
            )));
        }
        Ok(SmoothProblem {
            theta_dim: self.theta_dim,
            solution_dim: self.solution_dim,
            utility_fn: self.utility_fn.expect("checked"),
            gradient_fn: self.gradient_fn.expect("checked"),
            hessian_fn: self.hessian_fn.expect("checked"),
            mixed_fn: self.mixed_fn.expect("checked"),
            fairness_fn: self.fairness_fn.expect("checked"),
            fairness_gradient_fn: self.fairness_gradient_fn.expect("checked"),
            project_solution_fn: self
                .project_solution_fn
                .unwrap_or_else(|| Box::new(|s: &[f64]| s.to_vec())),
            project_theta_fn: self
                .project_theta_fn
                .unwrap_or_else(|| Box::new(|t: &[f64]| t.to_vec())),
            exact_inner_fn: self.exact_inner_fn,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Gradient of `θ ↦ F(s*(θ))` at (θ, s), assuming s is the inner optimum.
///
/// Errors with [`Error::SingularHessian`] when the Hessian cannot be solved
/// or its condition number exceeds [`CONDITION_LIMIT`].
pub fn fairness_gradient(
    problem: &SmoothProblem,
    theta: &[f64],
    solution: &[f64],
) -> Result<Vec<f64>> {
    let hessian = problem.hessian(theta, solution)?;
    let grad_f = problem.fairness_gradient_s(solution)?;
    let (x, condition) = linalg::solve_with_condition(&hessian, &grad_f)
        .ok_or(Error::SingularHessian { condition: None })?;
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::SingularHessian { condition: Some(condition) });
    }
    let mixed = problem.mixed(theta, solution)?;
    Ok(mixed.iter().map(|row| -dot(row, &x)).collect())
}

/// One projected gradient step on the inner variable.
pub fn inner_step(
    problem: &SmoothProblem,
    theta: &[f64],
    solution: &[f64],
    alpha: f64,
) -> Result<Vec<f64>> {
    let g = problem.gradient(theta, solution)?;
    let moved: Vec<f64> = solution.iter().zip(&g).map(|(s, d)| s + alpha * d).collect();
    problem.project_solution(&moved)
}

/// One projected ascent step on θ along the fairness gradient.
pub fn outer_step(
    problem: &SmoothProblem,
    theta: &[f64],
    solution: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    let g = fairness_gradient(problem, theta, solution)?;
    let moved: Vec<f64> = theta.iter().zip(&g).map(|(t, d)| t + beta * d).collect();
    problem.project_theta(&moved)
}

/// Step sizes and stopping rules for [`alternating_ascent`].
#[derive(Clone, Debug)]
pub struct AscentConfig {
    /// Inner (solution) step size.
    pub alpha: f64,
    /// Outer (θ) step size.
    pub beta: f64,
    pub max_iterations: usize,
    /// Converged when both step norms fall below this.
    pub tolerance: f64,
    /// Solve the inner problem exactly each iteration instead of stepping;
    /// requires the problem to provide an exact inner solver.
    pub use_exact_inner: bool,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            alpha: 0.01,
            beta: 0.01,
            max_iterations: 10_000,
            tolerance: 1e-8,
            use_exact_inner: false,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("tolerance", self.tolerance)]
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why the ascent stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Both step norms fell below the tolerance.
    Converged,
    /// The iteration budget ran out first.
    IterationCap,
    /// The Hessian became singular or numerically untrustworthy; the trace
    /// holds everything up to that point.
    SingularHessian,
}

/// One recorded iterate.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub solution: Vec<f64>,
    pub utility: f64,
    pub fairness: f64,
    pub solution_step: f64,
    pub theta_step: f64,
}

/// The full ascent path plus how it ended.
#[derive(Clone, Debug)]
pub struct AscentTrace {
    pub steps: Vec<TraceStep>,
    pub termination: Termination,
    /// Condition estimate when the run ended in `SingularHessian` and one
    /// could be formed.
    pub condition: Option<f64>,
}

impl AscentTrace {
    pub fn final_step(&self) -> &TraceStep {
        self.steps.last().expect("trace always records the initial state")
    }
}

/// Alternating maximization of `F(s*(θ))`: an inner step (or exact solve)
/// for `s`, then an outer fairness-gradient step for θ, until both stall.
///
/// A singular Hessian ends the run gracefully: the trace up to that
/// iteration is returned with [`Termination::SingularHessian`] rather than
/// an error, because the partial path is exactly what a report needs to
/// show. Genuine misuse (wrong dimensions, missing exact solver) stays an
/// error.
pub fn alternating_ascent(
    problem: &SmoothProblem,
    config: &AscentConfig,
    initial_theta: &[f64],
    initial_solution: &[f64],
) -> Result<AscentTrace> {
    config.validate()?;
    if config.use_exact_inner && !problem.has_exact_inner() {
        return Err(Error::Argument(
            "config asks for the exact inner solver but the problem has none".into(),
        ));
    }
    let mut theta = problem.project_theta(initial_theta)?;
    let mut solution = problem.project_solution(initial_solution)?;
    let mut steps = vec![TraceStep {
        iteration: 0,
        theta: theta.clone(),
        solution: solution.clone(),
        utility: problem.utility(&theta, &solution)?,
        fairness: problem.fairness(&solution)?,
        solution_step: 0.0,
        theta_step: 0.0,
    }];
    for iteration in 1..=config.max_iterations {
        let new_solution = if config.use_exact_inner {
            problem.exact_inner(&theta)?
        } else {
            inner_step(problem, &theta, &solution, config.alpha)?
        };
        let new_theta = match outer_step(problem, &theta, &new_solution, config.beta) {
            Ok(t) => t,
            Err(Error::SingularHessian { condition }) => {
                return Ok(AscentTrace {
                    steps,
                    termination: Termination::SingularHessian,
                    condition,
                });
            }
            Err(other) => return Err(other),
        };
        let solution_step = l2_distance(&new_solution, &solution);
        let theta_step = l2_distance(&new_theta, &theta);
        solution = new_solution;
        theta = new_theta;
        steps.push(TraceStep {
            iteration,
            theta: theta.clone(),
            solution: solution.clone(),
            utility: problem.utility(&theta, &solution)?,
            fairness: problem.fairness(&solution)?,
            solution_step,
            theta_step,
        });
        if solution_step < config.tolerance && theta_step < config.tolerance {
            return Ok(AscentTrace { steps, termination: Termination::Converged, condition: None });
        }
    }
    Ok(AscentTrace { steps, termination: Termination::IterationCap, condition: None })
}

/// Closed-form gradient versus central differences of the true inner
/// optimum.
#[derive(Clone, Debug)]
pub struct GradientAudit {
    pub theta: Vec<f64>,
    pub analytic: Vec<f64>,
    pub finite_difference: Vec<f64>,
    pub max_absolute_deviation: f64,
    pub epsilon: f64,
}

/// Audits [`fairness_gradient`] against `(f(θ+εe_j) − f(θ−εe_j)) / 2ε` where
/// `f(θ) = F(s*(θ))` uses the problem's exact inner solver.
pub fn finite_difference_audit(
    problem: &SmoothProblem,
    theta: &[f64],
    epsilon: f64,
) -> Result<GradientAudit> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Argument(format!(
            "finite-difference ε must be positive and finite, got {epsilon}"
        )));
    }
    if !problem.has_exact_inner() {
        return Err(Error::Argument(
            "the finite-difference audit needs an exact inner solver".into(),
        ));
    }
    let solution = problem.exact_inner(theta)?;
    let analytic = fairness_gradient(problem, theta, &solution)?;
    let value_at = |t: &[f64]| -> Result<f64> {
        let s = problem.exact_inner(t)?;
        problem.fairness(&s)
    };
    let mut finite_difference = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let mut up = theta.to_vec();
        up[j] += epsilon;
        let mut down = theta.to_vec();
        down[j] -= epsilon;
        finite_difference.push((value_at(&up)? - value_at(&down)?) / (2.0 * epsilon));
    }
    let max_absolute_deviation = analytic
        .iter()
        .zip(&finite_difference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    Ok(GradientAudit {
        theta: theta.to_vec(),
        analytic,
        finite_difference,
        max_absolute_deviation,
        epsilon,
    })
}

mod linalg {
    /// Solves `A x = b` by LU with partial pivoting and returns the solution
    /// together with the exact 1-norm condition number `‖A‖₁·‖A⁻¹‖₁`
    /// (dimensions here are small enough to invert column by column).
    /// Returns `None` when a pivot vanishes relative to the matrix scale.
    pub(crate) fn solve_with_condition(a: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, f64)> {
        let n = a.len();
        if n == 0 {
            return Some((Vec::new(), 1.0));
        }
        let anorm = (0..n)
            .map(|j| (0..n).map(|i| a[i][j].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        if anorm == 0.0 {
            return None;
        }
        let mut lu: Vec<Vec<f64>> = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = anorm * (n as f64) * f64::EPSILON;
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| {
                    lu[r1][col].abs().partial_cmp(&lu[r2][col].abs()).expect("finite")
                })
                .expect("nonempty range");
            if lu[pivot_row][col].abs() <= threshold {
                return None;
            }
            lu.swap(col, pivot_row);
            perm.swap(col, pivot_row);
            let pivot = lu[col][col];
            for r in (col + 1)..n {
                let (head, tail) = lu.split_at_mut(r);
                let pivot_row = &head[col];
                let row = &mut tail[0];
                let factor = row[col] / pivot;
                row[col] = factor;
                for (cell, p) in row[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                    *cell -= factor * p;
                }
            }
        }
        let solve = |rhs: &[f64]| -> Vec<f64> {
            let mut x: Vec<f64> = perm.iter().map(|&p| rhs[p]).collect();
            for col in 0..n {
                for r in (col + 1)..n {
                    x[r] -= lu[r][col] * x[col];
                }
            }
            for col in (0..n).rev() {
                x[col] /= lu[col][col];
                for r in 0..col {
                    x[r] -= lu[r][col] * x[col];
                }
            }
            x
        };
        let x = solve(b);
        let inv_norm = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                solve(&e).iter().map(|v| v.abs()).sum::<f64>()
            })
            .fold(0.0_f64, f64::max);
        Some((x, anorm * inv_norm))
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn solves_a_known_system() {
            let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
            let b = vec![5.0, 10.0];
            let (x, cond) = solve_with_condition(&a, &b).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-12);
            assert!((x[1] - 3.0).abs() < 1e-12);
            assert!(cond >= 1.0);
        }

        #[test]
        fn pivoting_handles_a_zero_leading_entry() {
            let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
            let b = vec![2.0, 3.0];
            let (x, _) = solve_with_condition(&a, &b).unwrap();
            assert!((x[0] - 3.0).abs() < 1e-12);
            assert!((x[1] - 2.0).abs() < 1e-12);
        }

        #[test]
        fn identity_has_condition_one() {
            let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            let (_, cond) = solve_with_condition(&a, &[1.0, 1.0]).unwrap();
            assert!((cond - 1.0).abs() < 1e-12);
        }

        #[test]
        fn singular_matrices_are_refused() {
            let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
            assert!(solve_with_condition(&zero, &[1.0, 1.0]).is_none());
            let rank_one = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
            assert!(solve_with_condition(&rank_one, &[1.0, 1.0]).is_none());
        }

        #[test]
        fn near_singular_matrices_report_a_huge_condition() {
            let a = vec![vec![1.0, 0.0], vec![0.0, 1.0e-13]];
            let (_, cond) = solve_with_condition(&a, &[1.0, 1.0]).unwrap();
            assert!(cond > 1.0e12);
        }
    }
}

/// Euclidean projection onto `{x ≥ 0, Σx = total}`.
pub fn project_to_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - total) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// A named, ready-to-run smooth problem.
pub struct RegisteredProblem {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: SmoothProblem,
    pub initial_theta: Vec<f64>,
    pub initial_solution: Vec<f64>,
}

/// The built-in smooth problems.
pub fn registry() -> Vec<RegisteredProblem> {
    vec![quadratic_toy(), simplex_relaxation()]
}

pub fn problem_names() -> Vec<&'static str> {
    registry().into_iter().map(|p| p.name).collect()
}

pub fn by_name(name: &str) -> Option<RegisteredProblem> {
    registry().into_iter().find(|p| p.name == name)
}

/// Strictly concave quadratic with inner optimum `s*(θ) = (θ, θ²)` and
/// fairness `F(s) = s₂ − s₁`, so `f(θ) = θ² − θ` and `G(θ) = 2θ − 1`:
/// starting right of 1/2 the ascent must ride to the θ = 1 boundary.
pub fn quadratic_toy() -> RegisteredProblem {
    let problem = SmoothProblem::builder(1, 2)
        .utility(|t, s| {
            let (a, b) = (s[0] - t[0], s[1] - t[0] * t[0]);
            -(a * a) - (b * b)
        })
        .gradient(|t, s| vec![-2.0 * (s[0] - t[0]), -2.0 * (s[1] - t[0] * t[0])])
        .hessian(|_, _| vec![vec![-2.0, 0.0], vec![0.0, -2.0]])
        .mixed(|t, _| vec![vec![2.0, 4.0 * t[0]]])
        .fairness(|s| s[1] - s[0])
        .fairness_gradient(|_| vec![-1.0, 1.0])
        .project_theta(|t| vec![t[0].clamp(0.0, 1.0)])
        .exact_inner(|t| vec![t[0], t[0] * t[0]])
        .build()
        .expect("toy problem is complete");
    RegisteredProblem {
        name: "quadratic-toy",
        description: "strictly concave quadratic whose optimum traces (θ, θ²); \
                      the fairness gradient is 2θ−1, so the ascent rides to a boundary",
        problem,
        initial_theta: vec![0.6],
        initial_solution: vec![0.0, 0.0],
    }
}

/// The six-student roster with the selection relaxed to weights on a scaled
/// simplex. The utility is linear in s, its curvature is identically zero,
/// and the fairness-gradient machinery must refuse with a singular Hessian;
/// this problem exists to exercise that honest failure.
pub fn simplex_relaxation() -> RegisteredProblem {
    const IQ10: [f64; 6] = [10.0, 15.0, 15.0, 11.0, 7.0, 14.0];
    const GRADE: [f64; 6] = [10.0, 7.0, 5.0, 9.0, 9.0, 8.0];
    /// +1 male, −1 female; order Amy, Bob, Eve, Isa, Max, Zac.
    const GENDER_SIGN: [f64; 6] = [-1.0, 1.0, -1.0, -1.0, 1.0, 1.0];
    const SLOTS: f64 = 2.0;
    let weight = |t: &[f64], i: usize| t[0] * IQ10[i] + (1.0 - t[0]) * GRADE[i];
    let problem = SmoothProblem::builder(1, 6)
        .utility(move |t, s| (0..6).map(|i| s[i] * weight(t, i)).sum())
        .gradient(move |t, _| (0..6).map(|i| weight(t, i)).collect())
        .hessian(|_, _| vec![vec![0.0; 6]; 6])
        .mixed(|_, _| vec![(0..6).map(|i| IQ10[i] - GRADE[i]).collect()])
        .fairness(|s| {
            let imbalance: f64 = (0..6).map(|i| GENDER_SIGN[i] * s[i]).sum();
            -(imbalance * imbalance)
        })
        .fairness_gradient(|s| {
            let imbalance: f64 = (0..6).map(|i| GENDER_SIGN[i] * s[i]).sum();
            (0..6).map(|i| -2.0 * imbalance * GENDER_SIGN[i]).collect()
        })
        .project_solution(|s| project_to_simplex(s, SLOTS))
        .project_theta(|t| vec![t[0].clamp(0.0, 1.0)])
        .build()
        .expect("relaxation is complete");
    RegisteredProblem {
        name: "simplex-relaxation",
        description: "the six-student pick relaxed to two slots of weight on a simplex; \
                      linear utility, so the curvature-based fairness gradient must refuse",
        problem,
        initial_theta: vec![0.5],
        initial_solution: vec![1.0 / 3.0; 6],
    }
}
