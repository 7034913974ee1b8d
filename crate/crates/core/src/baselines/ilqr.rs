//! Iterative LQR with finite-difference linearization.

use nalgebra::{DMatrix, DVector};

use crate::error::IlqrError;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Finite-horizon tracking problem with quadratic cost
/// `Σ ½eₜᵀQeₜ + ½(uₜ−ūₜ)ᵀR(uₜ−ūₜ) + ½e_TᵀQ_f e_T`, where `eₜ = error(xₜ, x̄ₜ)`.
pub struct IlqrProblem<'a> {
    pub dynamics: &'a dyn Fn(&Vector, &Vector) -> Vector,
    /// `x − x_ref`; callers with angular coordinates wrap them here.
    pub error: &'a dyn Fn(&Vector, &Vector) -> Vector,
    pub q: Matrix,
    pub r: Matrix,
    pub qf: Matrix,
    /// Reference states, one per step plus the terminal one.
    pub x_ref: Vec<Vector>,
    pub u_ref: Vec<Vector>,
    pub x0: Vector,
    pub u_init: Vec<Vector>,
}

/// Plain vector difference.
pub fn euclidean_error(x: &Vector, r: &Vector) -> Vector {
    x - r
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlqrSettings {
    pub max_iterations: usize,
    /// Stop when an accepted iteration improves the cost by less than this.
    pub tolerance: f64,
    pub fd_step: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_factor: f64,
    /// Line-search step sizes tried are `1, ½, ¼, …` for this many halvings.
    pub line_search_steps: usize,
}

impl Default for IlqrSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-8,
            fd_step: 1e-5,
            mu_min: 1e-6,
            mu_max: 1e10,
            mu_factor: 10.0,
            line_search_steps: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IlqrSolution {
    pub states: Vec<Vector>,
    pub controls: Vec<Vector>,
    /// Feedback gains `Kₜ`.
    pub gains: Vec<Matrix>,
    /// Feed-forward terms `kₜ` from the last backward pass.
    pub feedforward: Vec<Vector>,
    /// Cost of the initial rollout followed by every accepted iterate.
    pub costs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl IlqrSolution {
    pub fn cost(&self) -> f64 {
        *self.costs.last().expect("at least the initial cost")
    }

    /// Affine feedback action `ūₜ + Kₜ·dx` at step `t` for state error `dx`
    /// from the nominal. The feed-forward term is left out: at convergence it
    /// is a step the line search would not have taken in full.
    pub fn control(&self, t: usize, dx: &Vector) -> Vector {
        &self.controls[t] + &self.gains[t] * dx
    }
}

/// Central-difference Jacobians `(∂f/∂x, ∂f/∂u)` at `(x, u)`.
pub fn linearize(
    dynamics: &dyn Fn(&Vector, &Vector) -> Vector,
    error: &dyn Fn(&Vector, &Vector) -> Vector,
    x: &Vector,
    u: &Vector,
    h: f64,
) -> (Matrix, Matrix) {
    let n = x.len();
    let m = u.len();
    let mut fx = Matrix::zeros(n, n);
    let mut fu = Matrix::zeros(n, m);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let d = error(&dynamics(&xp, u), &dynamics(&xm, u)) / (2.0 * h);
        fx.set_column(j, &d);
    }
    for j in 0..m {
        let mut up = u.clone();
        let mut um = u.clone();
        up[j] += h;
        um[j] -= h;
        let d = error(&dynamics(x, &up), &dynamics(x, &um)) / (2.0 * h);
        fu.set_column(j, &d);
    }
    (fx, fu)
}

impl IlqrProblem<'_> {
    fn horizon(&self) -> usize {
        self.u_ref.len()
    }

    fn check(&self) -> Result<(), IlqrError> {
        let t = self.horizon();
        if t == 0 {
            return Err(IlqrError::EmptyHorizon);
        }
        let n = self.x0.len();
        let m = self.u_ref[0].len();
        let bad = |what: &str| Err(IlqrError::Dimension(what.to_string()));
        if self.x_ref.len() != t + 1 || self.u_init.len() != t {
            return bad("reference and initial control sequences must have horizon length");
        }
        if self.x_ref.iter().any(|x| x.len() != n) {
            return bad("reference state width");
        }
        if self.u_ref.iter().chain(&self.u_init).any(|u| u.len() != m) {
            return bad("control width");
        }
        if self.q.shape() != (n, n) || self.qf.shape() != (n, n) || self.r.shape() != (m, m) {
            return bad("cost matrix shapes");
        }
        Ok(())
    }

    pub fn cost(&self, xs: &[Vector], us: &[Vector]) -> f64 {
        let mut c = 0.0;
        for t in 0..us.len() {
            let e = (self.error)(&xs[t], &self.x_ref[t]);
            let du = &us[t] - &self.u_ref[t];
            c += 0.5 * e.dot(&(&self.q * &e)) + 0.5 * du.dot(&(&self.r * &du));
        }
        let e = (self.error)(&xs[us.len()], &self.x_ref[us.len()]);
        c + 0.5 * e.dot(&(&self.qf * &e))
    }

    pub fn rollout(&self, us: &[Vector]) -> Vec<Vector> {
        let mut xs = Vec::with_capacity(us.len() + 1);
        xs.push(self.x0.clone());
        for u in us {
            let next = (self.dynamics)(xs.last().unwrap(), u);
            xs.push(next);
        }
        xs
    }
}

struct BackwardPass {
    gains: Vec<Matrix>,
    feedforward: Vec<Vector>,
    /// Expected cost change is `α·d1 + α²·d2` for line-search step α.
    d1: f64,
    d2: f64,
}

fn backward(
    p: &IlqrProblem,
    xs: &[Vector],
    us: &[Vector],
    jac: &[(Matrix, Matrix)],
    mu: f64,
) -> Result<BackwardPass, usize> {
    let t_len = us.len();
    let e_t = (p.error)(&xs[t_len], &p.x_ref[t_len]);
    let mut vx = &p.qf * e_t;
    let mut vxx = p.qf.clone();
    let mut gains = vec![Matrix::zeros(0, 0); t_len];
    let mut ff = vec![Vector::zeros(0); t_len];
    let (mut d1, mut d2) = (0.0, 0.0);
    for t in (0..t_len).rev() {
        let (fx, fu) = &jac[t];
        let e = (p.error)(&xs[t], &p.x_ref[t]);
        let lx = &p.q * e;
        let lu = &p.r * (&us[t] - &p.u_ref[t]);
        let qx = lx + fx.transpose() * &vx;
        let qu = lu + fu.transpose() * &vx;
        let qxx = &p.q + fx.transpose() * &vxx * fx;
        let quu = &p.r + fu.transpose() * &vxx * fu;
        let qux = fu.transpose() * &vxx * fx;
        let m = quu.nrows();
        let quu_reg = &quu + Matrix::identity(m, m) * mu;
        let chol = quu_reg.cholesky().ok_or(t)?;
        let k = -chol.solve(&qu);
        let kk = -chol.solve(&qux);
        d1 += k.dot(&qu);
        d2 += 0.5 * k.dot(&(&quu * &k));
        vx = &qx + kk.transpose() * &quu * &k + kk.transpose() * &qu + qux.transpose() * &k;
        vxx = &qxx + kk.transpose() * &quu * &kk + kk.transpose() * &qux + qux.transpose() * &kk;
        vxx = 0.5 * (&vxx + vxx.transpose());
        gains[t] = kk;
        ff[t] = k;
    }
    Ok(BackwardPass {
        gains,
        feedforward: ff,
        d1,
        d2,
    })
}

/// Solves `problem` from its initial controls. The accepted cost sequence is
/// non-increasing; the returned gains come from a backward pass at the final
/// trajectory.
pub fn ilqr_solve(problem: &IlqrProblem, settings: &IlqrSettings) -> Result<IlqrSolution, IlqrError> {
    problem.check()?;
    let h = settings.fd_step;
    let mut us = problem.u_init.clone();
    let mut xs = problem.rollout(&us);
    let mut cost = problem.cost(&xs, &us);
    let mut costs = vec![cost];
    let mut mu = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let jacobians = |xs: &[Vector], us: &[Vector]| -> Vec<(Matrix, Matrix)> {
        (0..us.len())
            .map(|t| linearize(problem.dynamics, problem.error, &xs[t], &us[t], h))
            .collect()
    };
    let mut jac = jacobians(&xs, &us);

    let solve_backward = |jac: &[(Matrix, Matrix)], xs: &[Vector], us: &[Vector], mu: &mut f64| {
        loop {
            match backward(problem, xs, us, jac, *mu) {
                Ok(bp) => return Ok(bp),
                Err(step) => {
                    *mu = (*mu * settings.mu_factor).max(settings.mu_min);
                    if *mu > settings.mu_max {
                        return Err(IlqrError::NotPositiveDefinite { step, mu: *mu });
                    }
                }
            }
        }
    };

    let mut bp = solve_backward(&jac, &xs, &us, &mut mu)?;
    while iterations < settings.max_iterations {
        iterations += 1;
        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..=settings.line_search_steps {
            let mut nx = Vec::with_capacity(xs.len());
            let mut nu = Vec::with_capacity(us.len());
            nx.push(problem.x0.clone());
            for t in 0..us.len() {
                let dx = (problem.error)(&nx[t], &xs[t]);
                let u = &us[t] + alpha * &bp.feedforward[t] + &bp.gains[t] * dx;
                nx.push((problem.dynamics)(&nx[t], &u));
                nu.push(u);
            }
            let c = problem.cost(&nx, &nu);
            let expected = -(alpha * bp.d1 + alpha * alpha * bp.d2);
            if c.is_finite() && c < cost && (expected <= 0.0 || (cost - c) >= 1e-4 * expected) {
                accepted = Some((nx, nu, c));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((nx, nu, c)) => {
                let improvement = cost - c;
                xs = nx;
                us = nu;
                cost = c;
                costs.push(c);
                mu /= settings.mu_factor;
                if mu < settings.mu_min {
                    mu = 0.0;
                }
                jac = jacobians(&xs, &us);
                bp = solve_backward(&jac, &xs, &us, &mut mu)?;
                if improvement < settings.tolerance {
                    converged = true;
                    break;
                }
            }
            None => {
                // No descent along this direction: at a (local) optimum unless
                // more regularization helps.
                if bp.d1.abs() < settings.tolerance {
                    converged = true;
                    break;
                }
                mu = (mu * settings.mu_factor).max(settings.mu_min);
                if mu > settings.mu_max {
                    break;
                }
                bp = solve_backward(&jac, &xs, &us, &mut mu)?;
            }
        }
    }
    Ok(IlqrSolution {
        states: xs,
        controls: us,
        gains: bp.gains,
        feedforward: bp.feedforward,
        costs,
        iterations,
        converged,
    })
}
