//! High-accuracy integration of the two-mode system
//!
//! ```text
//! v'' + m(v² + λ²w²) v = φ(t)
//! w'' + λ² m(v² + λ²w²) w = ψ(t)
//! ```
//!
//! with an embedded Dormand–Prince 5(4) scheme and per-step dense output of
//! order 4. Energy drift is monitored against the conserved value, not
//! structurally enforced; a drift above tolerance attaches a warning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearityModel;

/// State of the two-mode system: positions and velocities of both components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub v: f64,
    pub dv: f64,
    pub w: f64,
    pub dw: f64,
}

impl PhaseState {
    pub fn new(v: f64, dv: f64, w: f64, dw: f64) -> Self {
        Self { v, dv, w, dw }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.v, self.dv, self.w, self.dw]
    }

    pub fn from_array(y: [f64; 4]) -> Self {
        Self { v: y[0], dv: y[1], w: y[2], dw: y[3] }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.dv.is_finite() && self.w.is_finite() && self.dw.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-11, abs_tol: 1e-12, max_step: f64::INFINITY, max_steps: 2_000_000 }
    }
}

impl IntegratorConfig {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::domain("integrator tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// One accepted step with its dense-output polynomial.
#[derive(Clone, Debug)]
struct DenseStep {
    t: f64,
    h: f64,
    rcont: [[f64; 4]; 5],
}

impl DenseStep {
    /// Evaluate the interpolant at fraction θ ∈ [0, 1] of the step.
    fn eval(&self, theta: f64) -> [f64; 4] {
        let th1 = 1.0 - theta;
        let mut y = [0.0; 4];
        for i in 0..4 {
            let r = &self.rcont;
            y[i] = r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

/// Dense-output numerical solution over a directed time span.
#[derive(Clone, Debug)]
pub struct Trajectory {
    steps: Vec<DenseStep>,
    t_start: f64,
    t_end: f64,
    y_end: [f64; 4],
    pub stats: IntegratorStats,
    pub hamiltonian_start: f64,
    /// Max relative deviation of the energy at the accepted breakpoints.
    pub hamiltonian_drift: f64,
    pub warnings: Vec<String>,
    pub lambda: f64,
}

impl Trajectory {
    /// Directed span (start, end); start > end for backward runs.
    pub fn directed_span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    /// Span as (min, max).
    pub fn span(&self) -> (f64, f64) {
        if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.span();
        let slack = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
        t >= lo - slack && t <= hi + slack
    }

    pub fn end_state(&self) -> PhaseState {
        PhaseState::from_array(self.y_end)
    }

    /// Evaluate the dense interpolant. Panics outside the stored span; use
    /// [`Trajectory::contains`] to guard.
    pub fn eval(&self, t: f64) -> PhaseState {
        assert!(self.contains(t), "t={t} outside trajectory span {:?}", self.span());
        let forward = self.t_end >= self.t_start;
        // Index of the step whose interval contains t.
        let idx = if forward {
            self.steps.partition_point(|s| s.t + s.h <= t).min(self.steps.len() - 1)
        } else {
            self.steps.partition_point(|s| s.t + s.h >= t).min(self.steps.len() - 1)
        };
        let step = &self.steps[idx];
        let theta = ((t - step.t) / step.h).clamp(0.0, 1.0);
        PhaseState::from_array(step.eval(theta))
    }

    /// Breakpoint times in integration order.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.t).chain(std::iter::once(self.t_end))
    }

    /// Uniform sampling of the span, n >= 2 points, in increasing time.
    pub fn sample(&self, n: usize) -> Vec<(f64, PhaseState)> {
        let (lo, hi) = self.span();
        (0..n)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                (t, self.eval(t))
            })
            .collect()
    }
}

/// Conserved energy v'² + w'² + M(v² + λ²w²).
pub fn hamiltonian(model: &NonlinearityModel, lambda: f64, state: &PhaseState) -> f64 {
    let sigma = state.v * state.v + lambda * lambda * state.w * state.w;
    state.dv * state.dv + state.dw * state.dw + model.m_primitive_raw(sigma)
}

/// Integrate the unforced system over `t_span` (forward or backward).
pub fn integrate(
    model: &NonlinearityModel,
    lambda: f64,
    initial: PhaseState,
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let l2 = lambda * lambda;
    let rhs = move |_t: f64, y: &[f64; 4]| {
        let m = model.m_raw(y[0] * y[0] + l2 * y[2] * y[2]);
        [y[1], -m * y[0], y[3], -l2 * m * y[2]]
    };
    let mut traj = dopri5(&rhs, t_span, initial.to_array(), config)?;
    traj.lambda = lambda;
    attach_energy_monitor(model, lambda, &mut traj);
    Ok(traj)
}

/// Integrate the forced system; `forcing(t)` returns (φ(t), ψ(t)).
pub fn forced_integrate<F: Fn(f64) -> (f64, f64)>(
    model: &NonlinearityModel,
    lambda: f64,
    initial: PhaseState,
    forcing: F,
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let l2 = lambda * lambda;
    let rhs = move |t: f64, y: &[f64; 4]| {
        let m = model.m_raw(y[0] * y[0] + l2 * y[2] * y[2]);
        let (phi, psi) = forcing(t);
        [y[1], -m * y[0] + phi, y[3], -l2 * m * y[2] + psi]
    };
    let mut traj = dopri5(&rhs, t_span, initial.to_array(), config)?;
    traj.lambda = lambda;
    Ok(traj)
}

/// Integrate an arbitrary 4-dimensional first-order system with the same
/// adaptive scheme and dense output. Used for linearized (Hill) systems.
pub(crate) fn integrate_raw<F: Fn(f64, &[f64; 4]) -> [f64; 4]>(
    rhs: &F,
    t_span: (f64, f64),
    y0: [f64; 4],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    dopri5(rhs, t_span, y0, config)
}

fn attach_energy_monitor(model: &NonlinearityModel, lambda: f64, traj: &mut Trajectory) {
    let h0 = hamiltonian(model, lambda, &PhaseState::from_array(traj.steps[0].rcont[0]));
    let scale = h0.abs().max(f64::MIN_POSITIVE);
    let mut drift = 0.0f64;
    for step in &traj.steps {
        let h = hamiltonian(model, lambda, &PhaseState::from_array(step.rcont[0]));
        drift = drift.max((h - h0).abs() / scale);
    }
    let h_end = hamiltonian(model, lambda, &traj.end_state());
    drift = drift.max((h_end - h0).abs() / scale);
    traj.hamiltonian_start = h0;
    traj.hamiltonian_drift = drift;
    if drift > 1e-9 {
        traj.warnings.push(format!("energy drift {drift:.3e} exceeds 1e-9"));
    }
}

/// Pointwise residual of the unforced equations along a trajectory; the
/// second derivatives come from central finite differences of the dense
/// output (step 1e-4), an independent route from the integrator right-hand
/// side. Near a span boundary the stencil becomes one-sided and is flagged.
#[derive(Clone, Copy, Debug)]
pub struct Residual {
    pub r_v: f64,
    pub r_w: f64,
    pub one_sided: bool,
}

pub const RESIDUAL_FD_STEP: f64 = 1e-4;

pub fn residual(
    model: &NonlinearityModel,
    lambda: f64,
    trajectory: &Trajectory,
    t: f64,
) -> Result<Residual> {
    if !trajectory.contains(t) {
        return Err(Error::domain(format!("t={t} outside trajectory span")));
    }
    let h = RESIDUAL_FD_STEP;
    let (lo, hi) = trajectory.span();
    let (ddv, ddw, one_sided) = if t - h >= lo && t + h <= hi {
        let p = trajectory.eval(t + h);
        let m_ = trajectory.eval(t - h);
        ((p.dv - m_.dv) / (2.0 * h), (p.dw - m_.dw) / (2.0 * h), false)
    } else if t + 2.0 * h <= hi {
        let p1 = trajectory.eval(t + h);
        let p2 = trajectory.eval(t + 2.0 * h);
        let y = trajectory.eval(t);
        ((-3.0 * y.dv + 4.0 * p1.dv - p2.dv) / (2.0 * h), (-3.0 * y.dw + 4.0 * p1.dw - p2.dw) / (2.0 * h), true)
    } else if t - 2.0 * h >= lo {
        let m1 = trajectory.eval(t - h);
        let m2 = trajectory.eval(t - 2.0 * h);
        let y = trajectory.eval(t);
        ((3.0 * y.dv - 4.0 * m1.dv + m2.dv) / (2.0 * h), (3.0 * y.dw - 4.0 * m1.dw + m2.dw) / (2.0 * h), true)
    } else {
        return Err(Error::domain("trajectory span too short for residual stencil"));
    };
    let y = trajectory.eval(t);
    let m = model.m_raw(y.v * y.v + lambda * lambda * y.w * y.w);
    Ok(Residual { r_v: ddv + m * y.v, r_w: ddw + lambda * lambda * m * y.w, one_sided })
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn dopri5<F: Fn(f64, &[f64; 4]) -> [f64; 4]>(
    rhs: &F,
    (t0, t1): (f64, f64),
    y0: [f64; 4],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if t0 == t1 {
        return Err(Error::domain("degenerate time span"));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = dir * initial_step(rhs, t0, &y0, &k1, config).min(config.max_step).min(span);

    let mut steps: Vec<DenseStep> = Vec::new();
    let mut stats = IntegratorStats::default();
    let mut rejected_in_row = 0usize;

    loop {
        if stats.accepted + stats.rejected > config.max_steps {
            return Err(Error::numerical(format!(
                "step budget exhausted at t={t:.6e} after {} accepted / {} rejected steps",
                stats.accepted, stats.rejected
            )));
        }
        // Land exactly on the endpoint.
        if (t1 - (t + h)) * dir < 0.0 {
            h = t1 - t;
        }
        let mut k = [[0.0; 4]; 7];
        k[0] = k1;
        for s in 0..6 {
            let mut ys = y;
            for i in 0..4 {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc += A[s][j] * kj[i];
                }
                ys[i] += h * acc;
            }
            k[s + 1] = rhs(t + C[s] * h, &ys);
        }
        // Stage 7 already evaluated the 5th-order solution (FSAL).
        let mut y_new = y;
        for i in 0..4 {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += A[5][j] * k[j][i];
            }
            y_new[i] += h * acc;
        }

        let mut err_sq = 0.0;
        for i in 0..4 {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            e *= h;
            let sc = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / 4.0).sqrt();

        if !y_new.iter().all(|v| v.is_finite()) {
            return Err(Error::numerical(format!(
                "non-finite state at t={:.6e}; last good state {:?}",
                t, y
            )));
        }

        if err <= 1.0 {
            // Dense coefficients for this step.
            let mut rcont = [[0.0; 4]; 5];
            for i in 0..4 {
                let delta = y_new[i] - y[i];
                rcont[0][i] = y[i];
                rcont[1][i] = delta;
                rcont[2][i] = h * k[0][i] - delta;
                rcont[3][i] = delta - h * k[6][i] - rcont[2][i];
                let mut dacc = 0.0;
                for j in 0..7 {
                    dacc += D[j] * k[j][i];
                }
                rcont[4][i] = h * dacc;
            }
            steps.push(DenseStep { t, h, rcont });
            stats.accepted += 1;
            t += h;
            y = y_new;
            k1 = k[6];
            rejected_in_row = 0;
            if (t1 - t) * dir <= 0.0 {
                break;
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 10.0);
            h = (h * fac).clamp(-config.max_step, config.max_step);
        } else {
            stats.rejected += 1;
            rejected_in_row += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
            if rejected_in_row > 30 || h.abs() < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::numerical(format!("step size underflow at t={t:.6e}")));
            }
        }
    }

    Ok(Trajectory {
        steps,
        t_start: t0,
        t_end: t1,
        y_end: y,
        stats,
        hamiltonian_start: 0.0,
        hamiltonian_drift: 0.0,
        warnings: Vec::new(),
        lambda: f64::NAN,
    })
}

/// Standard starting-step heuristic (order 5).
fn initial_step<F: Fn(f64, &[f64; 4]) -> [f64; 4]>(
    rhs: &F,
    t0: f64,
    y0: &[f64; 4],
    f0: &[f64; 4],
    config: &IntegratorConfig,
) -> f64 {
    let sc: Vec<f64> =
        y0.iter().map(|yi| config.abs_tol + config.rel_tol * yi.abs()).collect();
    let d0 = norm_scaled(y0, &sc);
    let d1 = norm_scaled(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };

    let mut y1 = *y0;
    for i in 0..4 {
        y1[i] += h0 * f0[i];
    }
    let f1 = rhs(t0 + h0, &y1);
    let mut diff = [0.0; 4];
    for i in 0..4 {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm_scaled(&diff, &sc) / h0;

    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

fn norm_scaled(v: &[f64; 4], sc: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        s += (v[i] / sc[i]) * (v[i] / sc[i]);
    }
    (s / 4.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn decoupled_harmonic_v() {
        // m = 1, λ = 2, start (0,1,0,0): v(t) = sin t, w stays 0.
        let model = NonlinearityModel::constant(1.0).unwrap();
        let traj =
            integrate(&model, 2.0, PhaseState::new(0.0, 1.0, 0.0, 0.0), (0.0, 10.0), &cfg()).unwrap();
        let mut max_err = 0.0f64;
        for (t, s) in traj.sample(500) {
            max_err = max_err.max((s.v - t.sin()).abs()).max((s.dv - t.cos()).abs());
            assert!(s.w.abs() <= 1e-12 && s.dw.abs() <= 1e-12);
        }
        assert!(max_err <= 1e-9, "max error {max_err:.3e}");
    }

    #[test]
    fn decoupled_harmonic_w() {
        // Start (0,0,0,1): w'' + 4w = 0 with w'(0)=1 gives w = sin(2t)/2.
        let model = NonlinearityModel::constant(1.0).unwrap();
        let traj =
            integrate(&model, 2.0, PhaseState::new(0.0, 0.0, 0.0, 1.0), (0.0, 10.0), &cfg()).unwrap();
        let mut max_err = 0.0f64;
        for (t, s) in traj.sample(500) {
            max_err = max_err.max((s.w - (2.0 * t).sin() / 2.0).abs());
        }
        assert!(max_err <= 1e-9, "max error {max_err:.3e}");
    }

    #[test]
    fn hamiltonian_values() {
        let model = NonlinearityModel::constant(1.0).unwrap();
        let h0 = 1.3;
        assert!((hamiltonian(&model, 2.0, &PhaseState::new(0.0, h0, 0.0, 0.0)) - h0 * h0).abs() < 1e-15);
        assert!((hamiltonian(&model, 2.0, &PhaseState::new(0.0, 0.0, 0.0, h0)) - h0 * h0).abs() < 1e-15);
        assert!((hamiltonian(&model, 1.0, &PhaseState::new(1.0, 0.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_drift_affine() {
        let model = NonlinearityModel::affine(1.0, 1.0).unwrap();
        let traj = integrate(
            &model,
            2.0,
            PhaseState::new(0.3, 0.1, 0.2, -0.4),
            (0.0, 50.0),
            &cfg(),
        )
        .unwrap();
        assert!(traj.hamiltonian_drift <= 1e-9, "drift {:.3e}", traj.hamiltonian_drift);
        assert!(traj.warnings.is_empty());
    }

    #[test]
    fn time_reversal() {
        let model = NonlinearityModel::affine(1.0, 2.0).unwrap();
        let start = PhaseState::new(0.4, -0.2, 0.1, 0.3);
        let fwd = integrate(&model, 1.7, start, (0.0, 20.0), &cfg()).unwrap();
        let back = integrate(&model, 1.7, fwd.end_state(), (20.0, 0.0), &cfg()).unwrap();
        let r = back.end_state();
        for (a, b) in start.to_array().iter().zip(r.to_array()) {
            assert!((a - b).abs() <= 1e-8, "reversal mismatch {a} vs {b}");
        }
    }

    #[test]
    fn forced_zero_matches_unforced() {
        let model = NonlinearityModel::affine(1.0, 1.0).unwrap();
        let init = PhaseState::new(0.2, 0.0, -0.1, 0.5);
        let a = integrate(&model, 2.0, init, (0.0, 10.0), &cfg()).unwrap();
        let b = forced_integrate(&model, 2.0, init, |_| (0.0, 0.0), (0.0, 10.0), &cfg()).unwrap();
        for (t, s) in a.sample(200) {
            let sb = b.eval(t);
            for (x, y) in s.to_array().iter().zip(sb.to_array()) {
                assert!((x - y).abs() <= 1e-11);
            }
        }
    }

    #[test]
    fn resonant_forcing_closed_form() {
        // v'' + v = sin t from rest: v = (sin t − t cos t)/2.
        let model = NonlinearityModel::constant(1.0).unwrap();
        let traj = forced_integrate(
            &model,
            1.0,
            PhaseState::new(0.0, 0.0, 0.0, 0.0),
            |t| (t.sin(), 0.0),
            (0.0, 5.0),
            &cfg(),
        )
        .unwrap();
        for (t, s) in traj.sample(200) {
            let exact = 0.5 * (t.sin() - t * t.cos());
            assert!((s.v - exact).abs() <= 1e-8, "t={t}: {} vs {exact}", s.v);
        }
    }

    #[test]
    fn residual_small_on_analytic_solution() {
        let model = NonlinearityModel::constant(1.0).unwrap();
        let traj =
            integrate(&model, 1.0, PhaseState::new(0.0, 1.0, 0.0, 0.0), (0.0, 10.0), &cfg()).unwrap();
        for j in 1..100 {
            let t = 10.0 * j as f64 / 101.0;
            let r = residual(&model, 1.0, &traj, t).unwrap();
            assert!(!r.one_sided);
            assert!(r.r_v.abs() <= 1e-8 && r.r_w.abs() <= 1e-8, "t={t}: {r:?}");
        }
        // Boundary stencils are one-sided and flagged.
        let r = residual(&model, 1.0, &traj, 0.0).unwrap();
        assert!(r.one_sided);
    }

    #[test]
    fn residual_matches_forcing() {
        let model = NonlinearityModel::affine(1.0, 1.0).unwrap();
        let forcing = |t: f64| ((0.7 * t).sin() * 0.1, (1.3 * t).cos() * 0.05);
        let traj = forced_integrate(
            &model,
            2.0,
            PhaseState::new(0.1, 0.2, 0.05, -0.1),
            forcing,
            (0.0, 8.0),
            &cfg(),
        )
        .unwrap();
        for j in 1..50 {
            let t = 8.0 * j as f64 / 51.0;
            let r = residual(&model, 2.0, &traj, t).unwrap();
            let (phi, psi) = forcing(t);
            assert!((r.r_v - phi).abs() <= 1e-6, "t={t}: r_v {} vs φ {phi}", r.r_v);
            assert!((r.r_w - psi).abs() <= 1e-6, "t={t}: r_w {} vs ψ {psi}", r.r_w);
        }
    }

    #[test]
    fn step_budget_exhaustion_reports_position() {
        let model = NonlinearityModel::affine(1.0, 1.0).unwrap();
        let cfg = IntegratorConfig { max_steps: 20, ..IntegratorConfig::default() };
        let err = integrate(&model, 2.0, PhaseState::new(0.3, 0.1, 0.2, -0.4), (0.0, 100.0), &cfg);
        match err {
            Err(Error::Numerical(msg)) => assert!(msg.contains("step budget"), "{msg}"),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }

    #[test]
    fn backward_integration() {
        let model = NonlinearityModel::constant(1.0).unwrap();
        let traj =
            integrate(&model, 1.0, PhaseState::new(0.0, 1.0, 0.0, 0.0), (0.0, -6.0), &cfg()).unwrap();
        for (t, s) in traj.sample(100) {
            assert!((s.v - t.sin()).abs() <= 1e-9, "t={t}");
        }
        let (lo, hi) = traj.span();
        assert!(lo == -6.0 && hi == 0.0);
    }
}
