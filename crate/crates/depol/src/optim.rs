//! Modified-Newton minimizer for the maximum-likelihood searches.
//!
//! Both ML objectives share one algebraic shape. With x the real Cholesky
//! parameter vector and T(x) the triangular factor, every projector
//! expectation is a ratio of quadratic forms,
//!
//! ```text
//! p_i(x) = (xᵀ F_i x) / (xᵀ S x),   F_i, S constant and PSD,
//! ```
//!
//! because tr(Π·T†T) and tr(T†T) are quadratic in the entries of T. The
//! likelihood L = Σ (μᵢ − nᵢ)²/(2μᵢ) with μᵢ = Nᵢ·max(pᵢ, floor) therefore
//! has an exact, cheap gradient and Hessian. A Gauss-Newton model is not
//! good enough here: the searches routinely end on the boundary of the
//! state space (rank-deficient states), where the dropped residual-curvature
//! term dominates and damped least-squares crawls. Full Newton steps with
//! an adaptive ridge converge quadratically instead.
//!
//! Only improving steps are accepted, so the best value never increases.
//! Convergence is declared when an accepted step's actual and predicted
//! reductions both fall below the relative tolerance, when the gradient or
//! the step vanishes, or when even the model's promised reduction drops
//! below the floating-point resolution of the value.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Best value after each iteration; non-increasing.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Relative parameter step below which an accepted step counts as stationary.
const STEP_TOL: f64 = 1e-12;
/// Ridge ceiling: beyond this no usable descent direction exists.
const RIDGE_MAX: f64 = 1e16;

/// The ML objective: counted projector expectations as ratios of quadratic
/// forms in the parameter vector.
pub(crate) struct MlProblem {
    /// One PSD quadratic form per measured projector.
    pub forms: Vec<DMatrix<f64>>,
    /// The quadratic form of tr(T†T).
    pub trace_form: DMatrix<f64>,
    /// Measured (or artificial) counts per projector.
    pub counts: Vec<f64>,
    /// Count scale per projector: μᵢ = exposuresᵢ·pᵢ.
    pub exposures: Vec<f64>,
    /// Probability floor inside the likelihood.
    pub floor: f64,
}

impl MlProblem {
    pub fn dim(&self) -> usize {
        self.trace_form.nrows()
    }

    /// L(x) = Σ (μᵢ − nᵢ)²/(2μᵢ).
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let tau = (&self.trace_form * x).dot(x);
        if tau <= 0.0 {
            return f64::INFINITY;
        }
        let mut total = 0.0;
        for ((form, n), exposure) in self.forms.iter().zip(&self.counts).zip(&self.exposures) {
            let p = ((form * x).dot(x) / tau).max(self.floor);
            let mu = exposure * p;
            let diff = mu - n;
            total += diff * diff / (2.0 * mu);
        }
        total
    }

    /// Exact gradient and Hessian of L at x.
    fn gradient_hessian(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n_par = self.dim();
        let sx = &self.trace_form * x;
        let tau = sx.dot(x);
        let mut gradient = DVector::zeros(n_par);
        let mut hessian = DMatrix::zeros(n_par, n_par);

        for ((form, count), exposure) in self.forms.iter().zip(&self.counts).zip(&self.exposures)
        {
            let fx = form * x;
            let p = fx.dot(x) / tau;
            if p <= self.floor {
                // μ is pinned at the floor: locally constant term.
                continue;
            }
            let mu = exposure * p;
            // Chain pieces of (μ − n)²/(2μ) through μ = N·p.
            let dl_dp = exposure * (mu * mu - count * count) / (2.0 * mu * mu);
            let d2l_dp2 = exposure * exposure * count * count / (mu * mu * mu);

            // ∇p = 2(Fx − p·Sx)/τ and
            // ∇²p = (2F − 2pS − ∇p(2Sx)ᵀ − 2Sx∇pᵀ)/τ.
            let grad_p = (&fx - &sx * p) * (2.0 / tau);
            gradient.axpy(dl_dp, &grad_p, 1.0);

            hessian.ger(d2l_dp2, &grad_p, &grad_p, 1.0);
            hessian += form * (2.0 * dl_dp / tau);
            hessian += &self.trace_form * (-2.0 * p * dl_dp / tau);
            hessian.ger(-2.0 * dl_dp / tau, &grad_p, &sx, 1.0);
            hessian.ger(-2.0 * dl_dp / tau, &sx, &grad_p, 1.0);
        }
        // Symmetrize against accumulation-order roundoff.
        let hessian = (&hessian + hessian.transpose()) * 0.5;
        (gradient, hessian)
    }
}

pub(crate) fn minimize(
    problem: &MlProblem,
    x0: &[f64],
    max_iterations: usize,
    ftol: f64,
) -> Outcome {
    let n = problem.dim();
    assert_eq!(x0.len(), n, "parameter count mismatch");

    let mut x = DVector::from_column_slice(x0);
    let mut value = problem.value(&x);
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut ridge = 1e-6;

    'outer: while iterations < max_iterations {
        if value <= 1e-300 {
            converged = true;
            break;
        }
        let (gradient, hessian) = problem.gradient_hessian(&x);
        if gradient.amax() <= 1e-12 * value.max(1.0) {
            converged = true;
            break;
        }
        let diag_max = (0..n)
            .map(|j| hessian[(j, j)].abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);

        // Ridge-regularized Newton steps until one improves.
        loop {
            if iterations >= max_iterations {
                break 'outer;
            }
            iterations += 1;

            let mut shifted = hessian.clone();
            for j in 0..n {
                shifted[(j, j)] += ridge * diag_max;
            }
            let step = match nalgebra::Cholesky::new(shifted) {
                Some(ch) => ch.solve(&(-&gradient)),
                None => {
                    // Not positive definite at this shift.
                    ridge *= 4.0;
                    trace.push(value);
                    if ridge > RIDGE_MAX {
                        break 'outer;
                    }
                    continue;
                }
            };
            // Exact quadratic model reduction: −gᵀδ − ½δᵀHδ.
            let predicted = -gradient.dot(&step) - 0.5 * (&hessian * &step).dot(&step);

            let candidate = &x + &step;
            let new_value = problem.value(&candidate);

            if new_value < value {
                let actual = value - new_value;
                let rel_step = step
                    .iter()
                    .zip(x.iter())
                    .map(|(s, xi)| s.abs() / (1.0 + xi.abs()))
                    .fold(0.0, f64::max);
                x = candidate;
                value = new_value;
                ridge = (ridge / 10.0).max(1e-12);
                trace.push(value);

                let tol = ftol * (value + 1e-300);
                if (actual <= tol && predicted.abs() <= 2.0 * tol) || rel_step <= STEP_TOL {
                    converged = true;
                    break 'outer;
                }
                break; // fresh gradient and Hessian
            }

            trace.push(value);
            if predicted.abs() <= 1e-12 * (value + 1e-300) {
                // Even the exact model promises less than the floating-point
                // resolution of the value: numerically stationary.
                converged = true;
                break 'outer;
            }
            ridge *= 4.0;
            if ridge > RIDGE_MAX {
                break 'outer;
            }
        }
    }

    Outcome {
        x: x.as_slice().to_vec(),
        value,
        trace,
        iterations,
        converged,
    }
}
