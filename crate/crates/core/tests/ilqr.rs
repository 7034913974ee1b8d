use leaper_core::baselines::{
    cartpole_ilqr, euclidean_error, ilqr_solve, CartPoleOracleConfig, IlqrProblem, IlqrSettings,
    Matrix, Vector,
};
use leaper_core::env::{CartPoleConfig, CartPoleState};

fn double_integrator() -> (Matrix, Matrix) {
    let dt = 0.1;
    (
        Matrix::from_row_slice(2, 2, &[1.0, dt, 0.0, 1.0]),
        Matrix::from_row_slice(2, 1, &[0.5 * dt * dt, dt]),
    )
}

/// Finite-horizon discrete Riccati recursion, gains in time order.
fn riccati(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, qf: &Matrix, t: usize) -> Vec<Matrix> {
    let mut p = qf.clone();
    let mut gains = vec![Matrix::zeros(1, 2); t];
    for k in (0..t).rev() {
        let s = r + b.transpose() * &p * b;
        let kk = -s.try_inverse().unwrap() * b.transpose() * &p * a;
        p = q + a.transpose() * &p * a + a.transpose() * &p * b * &kk;
        gains[k] = kk;
    }
    gains
}

#[test]
fn lti_gains_match_riccati_recursion() {
    let (a, b) = double_integrator();
    let f = |x: &Vector, u: &Vector| &a * x + &b * u;
    let q = Matrix::from_diagonal(&Vector::from_row_slice(&[1.0, 0.5]));
    let r = Matrix::from_row_slice(1, 1, &[0.1]);
    let qf = &q * 10.0;
    let t = 30;
    let problem = IlqrProblem {
        dynamics: &f,
        error: &euclidean_error,
        q: q.clone(),
        r: r.clone(),
        qf: qf.clone(),
        x_ref: vec![Vector::zeros(2); t + 1],
        u_ref: vec![Vector::zeros(1); t],
        x0: Vector::from_row_slice(&[1.0, -0.5]),
        u_init: vec![Vector::zeros(1); t],
    };
    let sol = ilqr_solve(&problem, &IlqrSettings::default()).unwrap();
    assert!(sol.converged);
    let expect = riccati(&a, &b, &q, &r, &qf, t);
    for (k, e) in sol.gains.iter().zip(&expect) {
        assert!((k - e).abs().max() < 1e-6, "{k} vs {e}");
    }
    // The optimal open-loop controls equal the Riccati feedback rollout.
    let mut x = problem.x0.clone();
    for (step, e) in expect.iter().enumerate() {
        let u = e * &x;
        assert!((&u - &sol.controls[step]).abs().max() < 1e-6);
        x = &a * &x + &b * u;
    }
}

#[test]
fn converged_solution_is_a_fixed_point_of_the_forward_pass() {
    let (a, b) = double_integrator();
    let f = |x: &Vector, u: &Vector| &a * x + &b * u;
    let t = 15;
    let problem = IlqrProblem {
        dynamics: &f,
        error: &euclidean_error,
        q: Matrix::identity(2, 2),
        r: Matrix::identity(1, 1),
        qf: Matrix::identity(2, 2),
        x_ref: vec![Vector::from_row_slice(&[1.0, 0.0]); t + 1],
        u_ref: vec![Vector::zeros(1); t],
        x0: Vector::zeros(2),
        u_init: vec![Vector::zeros(1); t],
    };
    let sol = ilqr_solve(&problem, &IlqrSettings::default()).unwrap();
    let mut x = problem.x0.clone();
    for step in 0..t {
        let u = sol.control(step, &(&x - &sol.states[step]));
        assert!((&x - &sol.states[step]).norm() < 1e-9);
        x = f(&x, &u);
    }
    assert!((&x - &sol.states[t]).norm() < 1e-9);
}

#[test]
fn cartpole_reaches_goal_with_non_increasing_cost() {
    let env = CartPoleConfig::default();
    let start = CartPoleState {
        theta: 0.04,
        ..CartPoleState::default()
    };
    let oracle = cartpole_ilqr(&env, &CartPoleOracleConfig::default(), &start).unwrap();
    let costs = &oracle.solution.costs;
    assert!(costs.windows(2).all(|w| w[1] <= w[0]));
    let mut s = start;
    for t in 0..env.horizon {
        s = env.control_step(&s, oracle.action(t, &s));
    }
    assert_eq!(env.reward(&CartPoleConfig::achieved(&s), &env.goal()), 0.0, "{s:?}");
}
