//! Search for trajectories of the unforced two-mode system that leave one
//! simple mode along its unstable manifold as t → −∞ and land on the simple
//! mode of frequency λ² as t → +∞, together with the asymptotic data
//! (phases τ₀, τ₁ and exponential decay constants) that the transition
//! construction consumes.
//!
//! The outer search is plain forward shooting from the linearized unstable
//! direction, minimized over (phase, ε). Candidate assembly then conditions
//! the forward tail by matching against a backward-integrated arc seeded on
//! the target's stable direction: raw forward integration cannot shadow the
//! target orbit for long once roundoff excites its unstable direction, while
//! each arc integrated in its own contracting direction stays relatively
//! accurate over the whole span. The two arcs are blended over a short
//! window by a smooth step, which leaves a residual of the order of the
//! matching mismatch.

use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, hamiltonian, IntegratorConfig, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearityModel;
use crate::simple_modes::{hill_matrix, source_monodromy, target_monodromy, Monodromy, SimpleMode};

/// Controls for the connection search.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Signed-magnitude range scanned for the seeding amplitude ε.
    pub eps_range: (f64, f64),
    /// Phase grid resolution per mode period.
    pub phase_grid: usize,
    /// Amplitude grid resolution (log-spaced, both signs).
    pub eps_grid: usize,
    /// Forward shooting horizon.
    pub horizon: f64,
    /// Span of the backward (source-side) arc of an assembled candidate.
    pub back_span: f64,
    /// Span of the forward (target-side) arc of an assembled candidate.
    pub fwd_span: f64,
    /// Function-evaluation budget of each derivative-free refinement.
    pub optimizer_budget: usize,
    /// Largest shooting defect accepted for candidate assembly.
    pub delta_accept: f64,
    /// Half-width of the window over which the two arcs are blended.
    pub blend_halfwidth: f64,
    /// Integration tolerance of the coarse grid stage.
    pub scan_rel_tol: f64,
    /// Integration tolerance of refinement and assembly.
    pub refine_rel_tol: f64,
    /// Seed for sampled diagnostics; the search itself is deterministic.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            eps_range: (1e-7, 1e-4),
            phase_grid: 48,
            eps_grid: 6,
            horizon: 60.0,
            back_span: 56.0,
            fwd_span: 43.0,
            optimizer_budget: 1400,
            delta_accept: 1e-4,
            blend_halfwidth: 0.75,
            scan_rel_tol: 1e-8,
            refine_rel_tol: 1e-11,
            seed: 0,
        }
    }
}

/// State on the local unstable manifold of the first simple mode:
/// (z₁(phase), z₁'(phase), 0, 0) + ε·(0, 0, ξ, ξ') with (ξ, ξ') the
/// period-map eigenvector of the largest multiplier, transported to the
/// given phase and normalized.
pub fn unstable_manifold_seed(
    model: &Arc<NonlinearityModel>,
    h0: f64,
    lambda: f64,
    eps: f64,
    phase: f64,
) -> Result<PhaseState> {
    let base = SimpleMode::new(model, h0, 1.0)?;
    let mono = source_monodromy(&base, lambda)?;
    let dir = transported_direction(&base, &mono, lambda, true, phase)?;
    let (z, dz) = base.eval(phase.rem_euclid(base.base_period()));
    Ok(PhaseState::new(z, dz, eps * dir[0], eps * dir[1]))
}

/// State on the local stable manifold of the target mode: the mode state at
/// `phase` plus ε times the transported stable eigenvector in the first
/// component.
fn target_stable_seed(
    base: &SimpleMode,
    mono: &Monodromy,
    lambda: f64,
    eps: f64,
    phase: f64,
) -> Result<PhaseState> {
    let dir = transported_direction(base, mono, lambda, false, phase)?;
    let target = base.rescale(lambda);
    let ph = phase.rem_euclid(target.period());
    let (z, dz) = target.eval(ph);
    Ok(PhaseState::new(eps * dir[0], eps * dir[1], z, dz))
}

/// Transports the (un)stable eigenvector of a transverse period map from
/// phase 0 to `phase` with the fundamental Hill matrix, then normalizes.
fn transported_direction(
    base: &SimpleMode,
    mono: &Monodromy,
    lambda: f64,
    unstable: bool,
    phase: f64,
) -> Result<[f64; 2]> {
    let e = if unstable { mono.unstable_eigenvector() } else { mono.stable_eigenvector() }
        .ok_or_else(|| Error::domain("no unstable direction: transverse period map is not hyperbolic"))?;
    // Source transverse equation has (c, β) = (λ, 1); target one has (1, λ)
    // with its own period π₁/λ.
    let (c, beta, period) =
        if unstable { (lambda, 1.0, base.base_period()) } else { (1.0, lambda, base.base_period() / lambda) };
    let ph = phase.rem_euclid(period);
    let v = if ph > 1e-14 {
        let t = hill_matrix(base, c, beta, 0.0, ph)?;
        [t[0][0] * e[0] + t[0][1] * e[1], t[1][0] * e[0] + t[1][1] * e[1]]
    } else {
        e
    };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    Ok([v[0] / n, v[1] / n])
}

/// Result of one forward shot: the smallest target defect over the final
/// quarter of the horizon, with the time and target phase attaining it.
#[derive(Clone, Copy, Debug)]
pub struct ShootReport {
    pub distance: f64,
    pub best_time: f64,
    pub best_phase: f64,
}

/// Defect of a state from the target orbit point with phase shift τ:
/// v'² + v² + |w' − z_λ'(t−τ)|² + λ²|w − z_λ(t−τ)|².
fn target_defect(state: &PhaseState, target: &SimpleMode, t: f64, tau: f64) -> f64 {
    let lambda = target.lambda();
    let (z, dz) = target.eval(t - tau);
    state.dv * state.dv
        + state.v * state.v
        + (state.dw - dz) * (state.dw - dz)
        + lambda * lambda * (state.w - z) * (state.w - z)
}

/// Integrates forward over the horizon and minimizes the target defect over
/// the final quarter of the window and a target-phase grid.
pub fn shoot_distance(
    model: &Arc<NonlinearityModel>,
    lambda: f64,
    seed: PhaseState,
    horizon: f64,
) -> Result<ShootReport> {
    let h0 = hamiltonian(model, lambda, &seed).sqrt();
    let target = SimpleMode::new(model, h0, lambda)?;
    let cfg = IntegratorConfig::with_tol(1e-10, 1e-11);
    let traj = dynamics::integrate(model, lambda, seed, (0.0, horizon), &cfg)?;
    Ok(shoot_report(&traj, &target, horizon))
}

fn shoot_report(traj: &Trajectory, target: &SimpleMode, horizon: f64) -> ShootReport {
    let p = target.period();
    let t_lo = 0.75 * horizon;
    let nt = (((horizon - t_lo) / p * 32.0).ceil() as usize).max(16);
    let ntau = 64;
    let mut best = (f64::INFINITY, t_lo, 0.0);
    for i in 0..=nt {
        let t = t_lo + (horizon - t_lo) * i as f64 / nt as f64;
        let s = traj.eval(t);
        for j in 0..ntau {
            let tau = p * j as f64 / ntau as f64;
            let d = target_defect(&s, target, t, tau);
            if d < best.0 {
                best = (d, t, tau);
            }
        }
    }
    // Local polish of (t, τ) around the grid optimum.
    let obj = |x: &[f64]| {
        let t = x[0].clamp(t_lo, horizon);
        target_defect(&traj.eval(t), target, t, x[1])
    };
    let (x, d) = nelder_mead(&obj, &[best.1, best.2], &[p / 64.0, p / 64.0], 80, 0.0);
    if d < best.0 {
        best = (d, x[0].clamp(t_lo, horizon), x[1]);
    }
    ShootReport { distance: best.0, best_time: best.1, best_phase: best.2.rem_euclid(p) }
}

/// Composite trajectory of an assembled candidate: a backward arc on the
/// source side and a forward arc on the target side, blended over
/// [−w, w] by a smooth step, with on-demand extension by integration.
#[derive(Debug)]
pub struct ConnectionTrajectory {
    model: Arc<NonlinearityModel>,
    lambda: f64,
    back: Trajectory,
    fwd: Trajectory,
    blend_halfwidth: f64,
    /// Candidate time t maps to arc time t + shift.
    shift: f64,
    rel_tol: f64,
    extensions: RwLock<(Vec<Trajectory>, Vec<Trajectory>)>,
}

impl ConnectionTrajectory {
    /// Span of the originally assembled arcs, excluding on-demand
    /// extensions. The asymptotic fits and their majorants are certified on
    /// this window.
    pub fn base_span(&self) -> (f64, f64) {
        (self.back.span().0 - self.shift, self.fwd.span().1 - self.shift)
    }

    /// Stored span in candidate time, including extensions.
    pub fn span(&self) -> (f64, f64) {
        let ext = self.extensions.read().unwrap();
        let lo = ext.0.last().map(|t| t.span().0).unwrap_or(self.back.span().0);
        let hi = ext.1.last().map(|t| t.span().1).unwrap_or(self.fwd.span().1);
        (lo - self.shift, hi - self.shift)
    }

    /// Extends the stored arcs by unforced integration until the span covers
    /// [lo, hi] in candidate time.
    pub fn ensure_span(&self, lo: f64, hi: f64) -> Result<()> {
        let cfg = IntegratorConfig::with_tol(self.rel_tol, self.rel_tol * 0.1);
        let chunk = 20.0;
        loop {
            let (cur_lo, cur_hi) = self.span();
            if cur_lo <= lo && cur_hi >= hi {
                return Ok(());
            }
            let mut ext = self.extensions.write().unwrap();
            if cur_lo > lo {
                let (t0, state) = match ext.0.last() {
                    Some(seg) => (seg.directed_span().1, seg.end_state()),
                    None => (self.back.directed_span().0, self.back.eval(self.back.span().0)),
                };
                let seg =
                    dynamics::integrate(&self.model, self.lambda, state, (t0, t0 - chunk), &cfg)?;
                ext.0.push(seg);
            }
            if cur_hi < hi {
                let (t0, state) = match ext.1.last() {
                    Some(seg) => (seg.directed_span().1, seg.end_state()),
                    None => (self.fwd.directed_span().0, self.fwd.eval(self.fwd.span().1)),
                };
                let seg =
                    dynamics::integrate(&self.model, self.lambda, state, (t0, t0 + chunk), &cfg)?;
                ext.1.push(seg);
            }
        }
    }

    /// Evaluate the composite at candidate time t. Panics outside the stored
    /// span; call [`ConnectionTrajectory::ensure_span`] first.
    pub fn eval(&self, t: f64) -> PhaseState {
        let s = t + self.shift;
        let w = self.blend_halfwidth;
        if s <= -w {
            self.eval_side(s, false)
        } else if s >= w {
            self.eval_side(s, true)
        } else {
            let a = self.eval_side(s, false);
            let b = self.eval_side(s, true);
            // Smooth step and its derivative on [−w, w].
            let x = (s + w) / (2.0 * w);
            let (beta, dbeta_dx) = smooth_step(x);
            let dbeta = dbeta_dx / (2.0 * w);
            PhaseState::new(
                (1.0 - beta) * a.v + beta * b.v,
                (1.0 - beta) * a.dv + beta * b.dv + dbeta * (b.v - a.v),
                (1.0 - beta) * a.w + beta * b.w,
                (1.0 - beta) * a.dw + beta * b.dw + dbeta * (b.w - a.w),
            )
        }
    }

    fn eval_side(&self, s: f64, forward: bool) -> PhaseState {
        let (arc, ext_idx) = if forward { (&self.fwd, 1) } else { (&self.back, 0) };
        if arc.contains(s) {
            return arc.eval(s);
        }
        let ext = self.extensions.read().unwrap();
        let segs = if ext_idx == 0 { &ext.0 } else { &ext.1 };
        for seg in segs {
            if seg.contains(s) {
                return seg.eval(s);
            }
        }
        panic!("t={} outside stored span {:?}", s - self.shift, self.span());
    }

    /// Mismatch of the two arcs at the matching point, in the energy norm.
    pub fn matching_mismatch(&self) -> f64 {
        let a = self.back.eval(0.0);
        let b = self.fwd.eval(0.0);
        state_mismatch(&a, &b, self.lambda).sqrt()
    }
}

fn state_mismatch(a: &PhaseState, b: &PhaseState, lambda: f64) -> f64 {
    let d = [a.v - b.v, a.dv - b.dv, a.w - b.w, a.dw - b.dw];
    d[0] * d[0] + d[1] * d[1] + lambda * lambda * d[2] * d[2] + d[3] * d[3]
}

impl ConnectionTrajectory {
    /// Builds a composite from the two endpoint states of an externally
    /// supplied trajectory. Each tail is integrated from its own end — the
    /// numerically contracting direction relative to the limit orbit on
    /// that side — and the arcs are blended around t = 0; the remaining
    /// mismatch there is reported by [`ConnectionTrajectory::matching_mismatch`].
    pub fn from_endpoint_states(
        model: &Arc<NonlinearityModel>,
        lambda: f64,
        left: (f64, PhaseState),
        right: (f64, PhaseState),
        rel_tol: f64,
    ) -> Result<Self> {
        let w = 0.75;
        let (t_lo, state_lo) = left;
        let (t_hi, state_hi) = right;
        if !(t_lo < -w - 2.0 && t_hi > w + 2.0) {
            return Err(Error::domain(format!(
                "trajectory span [{t_lo}, {t_hi}] must straddle the blend window around 0"
            )));
        }
        let cfg = IntegratorConfig::with_tol(rel_tol, rel_tol * 0.1);
        let back = dynamics::integrate(model, lambda, state_lo, (t_lo, w + 1.0), &cfg)?;
        let fwd = dynamics::integrate(model, lambda, state_hi, (t_hi, -w - 1.0), &cfg)?;
        Ok(Self {
            model: Arc::clone(model),
            lambda,
            back,
            fwd,
            blend_halfwidth: w,
            shift: 0.0,
            rel_tol,
            extensions: RwLock::new((Vec::new(), Vec::new())),
        })
    }
}

/// C^∞ step 0 → 1 on [0, 1]; returns (value, derivative).
fn smooth_step(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let rho = |u: f64| if u > 1e-4 { (-1.0 / u).exp() } else { 0.0 };
    let drho = |u: f64| if u > 1e-4 { (-1.0 / u).exp() / (u * u) } else { 0.0 };
    let (n, dn) = (rho(x), drho(x));
    let (m, dm) = (rho(1.0 - x), -drho(1.0 - x));
    let den = n + m;
    (n / den, (dn * m - n * dm) / (den * den))
}

/// Fitted asymptotic data of a connection candidate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// Phase of the source mode approached as t → −∞, in [0, π₁).
    pub tau0: f64,
    /// Phase of the target mode approached as t → +∞, in [0, π_λ).
    pub tau1: f64,
    /// Decay rate/prefactor of the plain tail energies (first component
    /// forward, second component backward).
    pub a0: f64,
    pub b0: f64,
    /// Decay rate/prefactor of the deviations from the shifted limit modes.
    pub a1: f64,
    pub b1: f64,
    /// Per-series fit diagnostics.
    pub series: Vec<SeriesFit>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesFit {
    pub name: String,
    pub rate: f64,
    pub prefactor: f64,
    /// RMS residual of the log-envelope fit.
    pub residual: f64,
    pub windows: usize,
}

/// Least-squares exponential-envelope fits of the four tail series, plus the
/// limiting phases. The prefactors are inflated to majorants: B is raised
/// until D(t) <= B·exp(−A|t|) at every sampled tail time, so downstream
/// bounds built from (A, B) hold on the whole stored span.
pub fn fit_asymptotics<F: Fn(f64) -> PhaseState>(
    eval: &F,
    span: (f64, f64),
    source: &SimpleMode,
    target: &SimpleMode,
) -> Result<AsymptoticFit> {
    let lambda = target.lambda();
    let (lo, hi) = span;
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::domain("candidate span must straddle the transition at t = 0"));
    }

    // Limiting phases from the outermost stretch of each tail, where the
    // genuine deviation from the orbit is smallest and the residual cost is
    // almost purely a phase signal.
    let back_window = (lo + 1.0, 0.25 * lo);
    let fwd_window = (0.25 * hi, hi - 1.0);
    let tau_back = (lo + 0.5, (lo + 0.5 + 2.5 * source.base_period()).min(-1.0));
    let tau_fwd = ((hi - 0.5 - 2.5 * target.period()).max(1.0), hi - 0.5);
    let tau0 = fit_phase(eval, tau_back, source, false)?;
    let tau1 = fit_phase(eval, tau_fwd, target, true)?;

    let l2 = lambda * lambda;
    let v_energy = |s: &PhaseState, _t: f64| s.dv * s.dv + s.v * s.v;
    let w_energy = |s: &PhaseState, _t: f64| s.dw * s.dw + l2 * s.w * s.w;
    let v_dev = |s: &PhaseState, t: f64| {
        let (z, dz) = source.eval(t - tau0);
        (s.dv - dz) * (s.dv - dz) + (s.v - z) * (s.v - z)
    };
    let w_dev = |s: &PhaseState, t: f64| {
        let (z, dz) = target.eval(t - tau1);
        (s.dw - dz) * (s.dw - dz) + l2 * (s.w - z) * (s.w - z)
    };

    let sf = envelope_fit(eval, &w_energy, back_window, source.base_period(), "w_energy_back")?;
    let tf = envelope_fit(eval, &v_energy, fwd_window, target.period(), "v_energy_fwd")?;
    let sd = envelope_fit(eval, &v_dev, back_window, source.base_period(), "v_dev_back")?;
    let td = envelope_fit(eval, &w_dev, fwd_window, target.period(), "w_dev_fwd")?;

    for f in [&sf, &tf, &sd, &td] {
        if !(f.rate > 1e-3) {
            return Err(Error::numerical(format!(
                "tail series {} has nonpositive decay rate {:.3e}; candidate rejected",
                f.name, f.rate
            )));
        }
    }

    let a0 = sf.rate.min(tf.rate);
    let a1 = sd.rate.min(td.rate);
    // Majorant prefactors over every sampled tail time.
    let b0 = majorant(eval, &w_energy, (lo + 0.1, 0.0), a0)?
        .max(majorant(eval, &v_energy, (0.0, hi - 0.1), a0)?);
    let b1 = majorant(eval, &v_dev, (lo + 0.1, 0.0), a1)?
        .max(majorant(eval, &w_dev, (0.0, hi - 0.1), a1)?);

    Ok(AsymptoticFit { tau0, tau1, a0, b0, a1, b1, series: vec![sf, tf, sd, td] })
}

/// Phase shift minimizing the tail-averaged squared deviation from the
/// shifted mode over one period.
fn fit_phase<F: Fn(f64) -> PhaseState>(
    eval: &F,
    window: (f64, f64),
    mode: &SimpleMode,
    forward: bool,
) -> Result<f64> {
    let p = mode.period();
    let lambda = mode.lambda();
    let samples: Vec<(f64, PhaseState)> = sample_window(eval, window, p / 16.0);
    if samples.len() < 8 {
        return Err(Error::domain("tail window too short for a phase fit"));
    }
    let cost = |tau: f64| -> f64 {
        samples
            .iter()
            .map(|(t, s)| {
                let (z, dz) = mode.eval(t - tau);
                if forward {
                    (s.dw - dz) * (s.dw - dz) + lambda * lambda * (s.w - z) * (s.w - z)
                } else {
                    (s.dv - dz) * (s.dv - dz) + (s.v - z) * (s.v - z)
                }
            })
            .sum()
    };
    let n = 256;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let tau = p * i as f64 / n as f64;
        let c = cost(tau);
        if c < best.0 {
            best = (c, tau);
        }
    }
    // Golden-section polish on the bracketing interval.
    let (mut a, mut b) = (best.1 - p / n as f64, best.1 + p / n as f64);
    let phi = 0.618_033_988_749_894_9;
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = cost(x2);
        }
    }
    Ok((0.5 * (a + b)).rem_euclid(p))
}

fn sample_window<F: Fn(f64) -> PhaseState>(
    eval: &F,
    (lo, hi): (f64, f64),
    dt: f64,
) -> Vec<(f64, PhaseState)> {
    let n = (((hi - lo) / dt).ceil() as usize).max(2);
    (0..=n)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            (t, eval(t))
        })
        .collect()
}

/// Log-linear fit of per-window peak envelopes of a tail series
/// D(t) ≈ B·exp(−A·|t|).
fn envelope_fit<F: Fn(f64) -> PhaseState, G: Fn(&PhaseState, f64) -> f64>(
    eval: &F,
    series: &G,
    (lo, hi): (f64, f64),
    mode_period: f64,
    name: &str,
) -> Result<SeriesFit> {
    // Squared quantities oscillate at half the mode period.
    let window = 0.5 * mode_period;
    let nw = ((hi - lo) / window).floor() as usize;
    if nw < 3 {
        return Err(Error::domain(format!("tail window too short for envelope fit ({name})")));
    }
    let mut points = Vec::new();
    for k in 0..nw {
        let wlo = lo + k as f64 * window;
        let mut peak = f64::NEG_INFINITY;
        for j in 0..16 {
            let t = wlo + window * j as f64 / 16.0;
            peak = peak.max(series(&eval(t), t));
        }
        // Skip windows at the arithmetic noise floor.
        if peak > 1e-24 {
            points.push((wlo + 0.5 * window, peak.ln()));
        }
    }
    if points.len() < 3 {
        if points.is_empty() {
            // The series vanishes to arithmetic precision: perfect tracking,
            // which constrains nothing.
            return Ok(SeriesFit {
                name: name.to_string(),
                rate: f64::INFINITY,
                prefactor: 0.0,
                residual: 0.0,
                windows: 0,
            });
        }
        return Err(Error::numerical(format!("tail series {name} sits at the noise floor")));
    }
    // ln D = ln B − A·|t|.
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0.abs()).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0.abs() * p.0.abs()).sum();
    let sxy: f64 = points.iter().map(|p| p.0.abs() * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rms = (points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0.abs());
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SeriesFit {
        name: name.to_string(),
        rate: -slope,
        prefactor: intercept.exp(),
        residual: rms,
        windows: points.len(),
    })
}

/// Smallest B with D(t) <= B·exp(−A|t|) over a dense grid of the window,
/// inflated by 5% so the inequality also holds between grid points.
fn majorant<F: Fn(f64) -> PhaseState, G: Fn(&PhaseState, f64) -> f64>(
    eval: &F,
    series: &G,
    (lo, hi): (f64, f64),
    rate: f64,
) -> Result<f64> {
    let mut b: f64 = 0.0;
    let n = (((hi - lo) * 16.0).ceil() as usize).max(64);
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        let d = series(&eval(t), t);
        let grow = rate * t.abs();
        if grow < 700.0 {
            b = b.max(d * grow.exp());
        }
    }
    Ok(1.05 * b)
}

/// A trajectory realizing (approximately) a connection between the two
/// simple modes, with fitted asymptotic data and assembly provenance.
#[derive(Debug)]
pub struct HeteroclinicCandidate {
    pub model: Arc<NonlinearityModel>,
    pub h0: f64,
    pub lambda: f64,
    /// The standard mode z₁ (frequency 1).
    pub source: SimpleMode,
    /// The mode z_λ (frequency λ²).
    pub target: SimpleMode,
    pub trajectory: ConnectionTrajectory,
    pub fit: AsymptoticFit,
    /// Largest distance from the limit orbits over the outer quarter of each
    /// stored tail (energy norm, squared).
    pub defect: f64,
    /// Seed data for deterministic rebuilds; absent for hand-crafted
    /// trajectories loaded from samples.
    pub assembly: Option<AssemblyInfo>,
}

/// Everything needed to rebuild the candidate deterministically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyInfo {
    pub phase0: f64,
    pub eps0: f64,
    /// Seed time of the backward arc.
    pub t_minus: f64,
    pub phase1: f64,
    pub eps1: f64,
    /// Seed time of the forward arc.
    pub t_plus: f64,
    pub blend_halfwidth: f64,
    pub shift: f64,
    pub rel_tol: f64,
}

impl HeteroclinicCandidate {
    pub fn eval(&self, t: f64) -> PhaseState {
        self.trajectory.eval(t)
    }

    pub fn span(&self) -> (f64, f64) {
        self.trajectory.span()
    }

    pub fn ensure_span(&self, lo: f64, hi: f64) -> Result<()> {
        self.trajectory.ensure_span(lo, hi)
    }

    /// Rebuilds a candidate from assembly data (deterministic).
    pub fn from_assembly(
        model: &Arc<NonlinearityModel>,
        h0: f64,
        lambda: f64,
        assembly: AssemblyInfo,
    ) -> Result<Self> {
        let source = SimpleMode::new(model, h0, 1.0)?;
        let target = source.rescale(lambda);
        let s_mono = source_monodromy(&source, lambda)?;
        let t_mono = target_monodromy(&source, lambda)?;
        let composite = assemble_composite(model, lambda, &source, &s_mono, &t_mono, &assembly)?;
        finish_candidate(model, h0, lambda, source, target, composite, Some(assembly))
    }

    /// Wraps an externally supplied trajectory (it must solve the unforced
    /// system and straddle t = 0) into a candidate by fitting its tails.
    pub fn from_trajectory(
        model: &Arc<NonlinearityModel>,
        h0: f64,
        lambda: f64,
        trajectory: ConnectionTrajectory,
    ) -> Result<Self> {
        let source = SimpleMode::new(model, h0, 1.0)?;
        let target = source.rescale(lambda);
        finish_candidate(model, h0, lambda, source, target, trajectory, None)
    }
}

fn finish_candidate(
    model: &Arc<NonlinearityModel>,
    h0: f64,
    lambda: f64,
    source: SimpleMode,
    target: SimpleMode,
    trajectory: ConnectionTrajectory,
    assembly: Option<AssemblyInfo>,
) -> Result<HeteroclinicCandidate> {
    let span = trajectory.span();
    let fit = fit_asymptotics(&|t| trajectory.eval(t), span, &source, &target)?;
    let defect = tail_defect(&trajectory, &source, &target, &fit);
    Ok(HeteroclinicCandidate {
        model: Arc::clone(model),
        h0,
        lambda,
        source,
        target,
        trajectory,
        fit,
        defect,
        assembly,
    })
}

/// Largest squared distance from the limit orbits over the outer quarter of
/// each stored tail.
fn tail_defect(
    traj: &ConnectionTrajectory,
    source: &SimpleMode,
    target: &SimpleMode,
    fit: &AsymptoticFit,
) -> f64 {
    let (lo, hi) = traj.span();
    let lambda = target.lambda();
    let mut worst: f64 = 0.0;
    for (t, s) in sample_window(&|t| traj.eval(t), (lo + 0.1, 0.75 * lo), 0.2) {
        let (z, dz) = source.eval(t - fit.tau0);
        let d = (s.v - z) * (s.v - z)
            + (s.dv - dz) * (s.dv - dz)
            + s.dw * s.dw
            + lambda * lambda * s.w * s.w;
        worst = worst.max(d);
        let _ = t;
    }
    for (t, s) in sample_window(&|t| traj.eval(t), (0.75 * hi, hi - 0.1), 0.2) {
        let (z, dz) = target.eval(t - fit.tau1);
        let d = s.v * s.v
            + s.dv * s.dv
            + (s.dw - dz) * (s.dw - dz)
            + lambda * lambda * (s.w - z) * (s.w - z);
        worst = worst.max(d);
        let _ = t;
    }
    worst
}

/// Outcome of a connection search. Absence is a valid result and carries the
/// best defect found.
#[derive(Debug)]
pub struct SearchOutcome {
    pub candidate: Option<HeteroclinicCandidate>,
    pub best_defect: f64,
    pub best_phase: f64,
    pub best_eps: f64,
    pub evaluations: usize,
    pub notes: Vec<String>,
}

/// Shooting search for a connection: coarse grid over (phase, ε) of the
/// target defect at the end of the horizon, derivative-free refinement, and
/// — below the acceptance threshold — candidate assembly with a
/// stable-manifold-conditioned forward tail.
pub fn search(
    model: &Arc<NonlinearityModel>,
    h0: f64,
    lambda: f64,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    let mut notes = Vec::new();
    let source = SimpleMode::new(model, h0, 1.0)?;
    let target = source.rescale(lambda);
    let s_mono = source_monodromy(&source, lambda)?;
    let t_mono = target_monodromy(&source, lambda)?;
    let pi1 = source.base_period();

    let unstable_dirs = s_mono.is_unstable();
    if !unstable_dirs {
        notes.push(format!(
            "source mode transversely stable (max multiplier {:.6}); shooting from generic \
             transverse perturbations",
            s_mono.max_abs_multiplier()
        ));
    }

    let seed_at = |phase: f64, eps: f64| -> Result<PhaseState> {
        if unstable_dirs {
            let dir = transported_direction(&source, &s_mono, lambda, true, phase)?;
            let (z, dz) = source.eval(phase.rem_euclid(pi1));
            Ok(PhaseState::new(z, dz, eps * dir[0], eps * dir[1]))
        } else {
            let (z, dz) = source.eval(phase.rem_euclid(pi1));
            Ok(PhaseState::new(z, dz, 0.0, eps))
        }
    };

    // Coarse grid over phase and signed log-spaced amplitude.
    let scan_cfg = IntegratorConfig::with_tol(config.scan_rel_tol, config.scan_rel_tol * 0.1);
    let mut evaluations = 0usize;
    let (eps_lo, eps_hi) = config.eps_range;
    let mut best = (f64::INFINITY, 0.0, eps_lo);
    for i in 0..config.phase_grid {
        let phase = pi1 * i as f64 / config.phase_grid as f64;
        for j in 0..config.eps_grid {
            let mag = eps_lo * (eps_hi / eps_lo).powf(j as f64 / (config.eps_grid - 1).max(1) as f64);
            for sign in [1.0, -1.0] {
                let seed = seed_at(phase, sign * mag)?;
                let traj = dynamics::integrate(model, lambda, seed, (0.0, config.horizon), &scan_cfg)?;
                let rep = shoot_report(&traj, &target, config.horizon);
                evaluations += 1;
                if rep.distance < best.0 {
                    best = (rep.distance, phase, sign * mag);
                }
            }
        }
    }

    // Derivative-free refinement on (phase, ln|ε|).
    let refine_cfg = IntegratorConfig::with_tol(config.refine_rel_tol, config.refine_rel_tol * 0.1);
    let sign = best.2.signum();
    let shoot_obj = |x: &[f64]| -> f64 {
        if !(-35.0..=-2.0).contains(&x[1]) {
            return f64::INFINITY;
        }
        let seed = match seed_at(x[0], sign * x[1].exp()) {
            Ok(s) => s,
            Err(_) => return f64::INFINITY,
        };
        match dynamics::integrate(model, lambda, seed, (0.0, config.horizon), &refine_cfg) {
            Ok(traj) => shoot_report(&traj, &target, config.horizon).distance,
            Err(_) => f64::INFINITY,
        }
    };
    let budget = config.optimizer_budget / 2;
    let (x, refined) = nelder_mead(
        &shoot_obj,
        &[best.1, best.2.abs().ln()],
        &[pi1 / config.phase_grid as f64, 0.5],
        budget,
        0.0,
    );
    evaluations += budget;
    let (mut best_defect, mut best_phase, mut best_eps) = best;
    if refined < best_defect {
        best_defect = refined;
        best_phase = x[0].rem_euclid(pi1);
        best_eps = sign * x[1].exp();
    }

    if best_defect > config.delta_accept {
        return Ok(SearchOutcome {
            candidate: None,
            best_defect,
            best_phase,
            best_eps,
            evaluations,
            notes,
        });
    }
    if !t_mono.is_unstable() {
        notes.push(format!(
            "target mode transversely stable (max multiplier {:.6}); no exponentially \
             attracting direction, candidate assembly impossible",
            t_mono.max_abs_multiplier()
        ));
        return Ok(SearchOutcome {
            candidate: None,
            best_defect,
            best_phase,
            best_eps,
            evaluations,
            notes,
        });
    }

    // Assembly: match the shooting arc against a backward arc seeded on the
    // target's stable direction, then blend.
    match assemble_from_shoot(
        model, h0, lambda, &source, &target, &s_mono, &t_mono, best_phase, best_eps, config,
        &mut evaluations, &mut notes,
    ) {
        Ok(candidate) => Ok(SearchOutcome {
            candidate: Some(candidate),
            best_defect,
            best_phase,
            best_eps,
            evaluations,
            notes,
        }),
        Err(e) => {
            notes.push(format!("assembly failed: {e}"));
            Ok(SearchOutcome { candidate: None, best_defect, best_phase, best_eps, evaluations, notes })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble_from_shoot(
    model: &Arc<NonlinearityModel>,
    h0: f64,
    lambda: f64,
    source: &SimpleMode,
    target: &SimpleMode,
    s_mono: &Monodromy,
    t_mono: &Monodromy,
    phase_star: f64,
    eps_star: f64,
    config: &SearchConfig,
    evaluations: &mut usize,
    notes: &mut Vec<String>,
) -> Result<HeteroclinicCandidate> {
    let pi1 = source.base_period();
    let pil = target.period();
    let mult = s_mono.max_abs_multiplier();
    let mu_s = mult.ln() / pi1;

    // Walk the optimal seed down the manifold to a small amplitude: one
    // backward period divides the transverse amplitude by the multiplier and
    // keeps the phase. A small seed keeps the O(ε²) energy offset of the
    // linearized manifold below the tail-fit scales; a large one shows up as
    // a secular phase drift in the backward deviation series.
    let eps_target = 0.4 * (-mu_s * (config.back_span - 3.0)).exp();
    let periods_down = ((eps_star.abs() / eps_target).ln() / mult.ln()).round().max(0.0);
    let unstable_sign = {
        let (m0, m1) = s_mono.multipliers;
        if m0.norm() >= m1.norm() { m0.re.signum() } else { m1.re.signum() }
    };
    let eps_small = eps_star
        * mult.powf(-periods_down)
        * if unstable_sign < 0.0 { (-1.0f64).powf(periods_down) } else { 1.0 };

    let t_minus = -config.back_span;
    let t_plus = config.fwd_span;
    let refine_cfg = IntegratorConfig::with_tol(config.refine_rel_tol, config.refine_rel_tol * 0.1);

    let arc_back = |phase0: f64, eps0: f64| -> Result<Trajectory> {
        let seed = unstable_seed_cached(source, s_mono, lambda, eps0, phase0)?;
        dynamics::integrate(
            model,
            lambda,
            seed,
            (t_minus, config.blend_halfwidth + 1.0),
            &refine_cfg,
        )
    };
    let arc_fwd = |phase1: f64, eps1: f64| -> Result<Trajectory> {
        let seed = target_stable_seed(source, t_mono, lambda, eps1, phase1)?;
        dynamics::integrate(
            model,
            lambda,
            seed,
            (t_plus, -(config.blend_halfwidth + 1.0)),
            &refine_cfg,
        )
    };

    // Deterministic sweep of the target-side tube (phase × log-amplitude ×
    // sign) against the fixed backward-arc endpoint.
    let back0 = arc_back(phase_star, eps_small)?;
    let p0 = back0.eval(0.0);
    let scan_cfg = IntegratorConfig::with_tol(config.scan_rel_tol, config.scan_rel_tol * 0.1);
    let mut init = (f64::INFINITY, 0.0, 1e-9);
    for i in 0..32 {
        let ph = pil * i as f64 / 32.0;
        for j in 0..10 {
            let emag = 1e-11 * (1e-6f64 / 1e-11).powf(j as f64 / 9.0);
            for sg in [1.0, -1.0] {
                let seed = target_stable_seed(source, t_mono, lambda, sg * emag, ph)?;
                let t = dynamics::integrate(
                    model,
                    lambda,
                    seed,
                    (t_plus, -(config.blend_halfwidth + 1.0)),
                    &scan_cfg,
                )?;
                *evaluations += 1;
                let mm = state_mismatch(&p0, &t.eval(0.0), lambda);
                if mm < init.0 {
                    init = (mm, ph, sg * emag);
                }
            }
        }
    }

    // Joint refinement of (phase0, ln|ε0|, phase1, ln|ε1|).
    let sg0 = eps_small.signum();
    let sg1 = init.2.signum();
    let match_obj = |x: &[f64]| -> f64 {
        if !(-35.0..=-2.0).contains(&x[1]) || !(-35.0..=-2.0).contains(&x[3]) {
            return f64::INFINITY;
        }
        let b = match arc_back(x[0], sg0 * x[1].exp()) {
            Ok(t) => t,
            Err(_) => return f64::INFINITY,
        };
        let f = match arc_fwd(x[2], sg1 * x[3].exp()) {
            Ok(t) => t,
            Err(_) => return f64::INFINITY,
        };
        state_mismatch(&b.eval(0.0), &f.eval(0.0), lambda)
    };
    let budget = config.optimizer_budget;
    let (x, mismatch_sq) = nelder_mead(
        &match_obj,
        &[phase_star, eps_small.abs().ln(), init.1, init.2.abs().ln()],
        &[0.05, 0.1, 0.02, 0.1],
        budget,
        1e-25,
    );
    *evaluations += budget;
    let mismatch = mismatch_sq.sqrt();
    if mismatch > 1e-7 {
        notes.push(format!(
            "arc matching stalled at mismatch {mismatch:.3e}; blended residual may exceed 1e-6"
        ));
    }

    let assembly = AssemblyInfo {
        phase0: x[0].rem_euclid(pi1),
        eps0: sg0 * x[1].exp(),
        t_minus,
        phase1: x[2].rem_euclid(pil),
        eps1: sg1 * x[3].exp(),
        t_plus,
        blend_halfwidth: config.blend_halfwidth,
        shift: 0.0,
        rel_tol: config.refine_rel_tol,
    };
    let composite = assemble_composite(model, lambda, source, s_mono, t_mono, &assembly)?;

    // Re-center so the transition (energy crossing) sits at t = 0.
    let shift = find_energy_crossing(&composite, lambda);
    let assembly = AssemblyInfo { shift, ..assembly };
    let composite = assemble_composite(model, lambda, source, s_mono, t_mono, &assembly)?;

    finish_candidate(model, h0, lambda, source.clone(), target.clone(), composite, Some(assembly))
}

fn unstable_seed_cached(
    source: &SimpleMode,
    mono: &Monodromy,
    lambda: f64,
    eps: f64,
    phase: f64,
) -> Result<PhaseState> {
    let dir = transported_direction(source, mono, lambda, true, phase)?;
    let (z, dz) = source.eval(phase.rem_euclid(source.base_period()));
    Ok(PhaseState::new(z, dz, eps * dir[0], eps * dir[1]))
}

/// Builds the blended composite trajectory for given assembly data.
fn assemble_composite(
    model: &Arc<NonlinearityModel>,
    lambda: f64,
    source: &SimpleMode,
    s_mono: &Monodromy,
    t_mono: &Monodromy,
    a: &AssemblyInfo,
) -> Result<ConnectionTrajectory> {
    let cfg = IntegratorConfig::with_tol(a.rel_tol, a.rel_tol * 0.1);
    let margin = a.blend_halfwidth + 1.0;
    let seed_b = unstable_seed_cached(source, s_mono, lambda, a.eps0, a.phase0)?;
    let seed_f = target_stable_seed(source, t_mono, lambda, a.eps1, a.phase1)?;
    let back = dynamics::integrate(model, lambda, seed_b, (a.t_minus, margin), &cfg)?;
    let fwd = dynamics::integrate(model, lambda, seed_f, (a.t_plus, -margin), &cfg)?;
    Ok(ConnectionTrajectory {
        model: Arc::clone(model),
        lambda,
        back,
        fwd,
        blend_halfwidth: a.blend_halfwidth,
        shift: a.shift,
        rel_tol: a.rel_tol,
        extensions: RwLock::new((Vec::new(), Vec::new())),
    })
}

/// Time where the first-component energy hands over to the second-component
/// energy, used to center the transition.
fn find_energy_crossing(traj: &ConnectionTrajectory, lambda: f64) -> f64 {
    let g = |t: f64| {
        let s = traj.eval(t);
        (s.dv * s.dv + s.v * s.v) - (s.dw * s.dw + lambda * lambda * s.w * s.w)
    };
    let (lo, hi) = traj.span();
    let (wlo, whi) = ((lo + 1.0).max(-12.0), (hi - 1.0).min(12.0));
    let n = 128;
    let mut best: Option<(f64, f64)> = None;
    let mut prev = (wlo, g(wlo));
    for i in 1..=n {
        let t = wlo + (whi - wlo) * i as f64 / n as f64;
        let v = g(t);
        if prev.1 > 0.0 && v <= 0.0 {
            // Bisect this crossing.
            let (mut a, mut b) = (prev.0, t);
            for _ in 0..50 {
                let m = 0.5 * (a + b);
                if g(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let c = 0.5 * (a + b);
            if best.is_none_or(|(bc, _)| c.abs() < bc.abs()) {
                best = Some((c, 0.0));
            }
        }
        prev = (t, v);
    }
    best.map(|(c, _)| c).unwrap_or(0.0).clamp(-8.0, 8.0)
}

/// Step for verification finite differences. Smaller than the generic
/// residual step because steep stiffness profiles carry fourth derivatives
/// of order (m_hi − m_lo)/width², which dominate the truncation error.
pub const VERIFY_FD_STEP: f64 = 2e-5;

/// Report of the candidate verification clauses.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateReport {
    pub non_trivial: bool,
    /// Tolerance the residual clause was checked against.
    pub residual_tol: f64,
    pub residual_max: f64,
    pub residual_pass: bool,
    /// Worst margin of D(t) <= B₀·exp(−A₀|t|) over the sampled tails
    /// (positive = satisfied with room).
    pub decay_margin_plain: f64,
    pub decay_plain_pass: bool,
    pub decay_margin_deviation: f64,
    pub decay_deviation_pass: bool,
    pub tail_coverage_pass: bool,
    pub tail_periods_back: f64,
    pub tail_periods_fwd: f64,
    pub hamiltonian_drift: f64,
    pub hamiltonian_pass: bool,
    pub pass: bool,
}

/// Checks non-triviality, the unforced residual along the trajectory, both
/// families of decay inequalities with the fitted constants, tail coverage,
/// and energy conservation.
pub fn verify_candidate(candidate: &HeteroclinicCandidate, tol: f64) -> CandidateReport {
    let traj = &candidate.trajectory;
    // The decay majorants are certified on the assembled arcs; extensions
    // bottom out at the integration noise floor and are not covered.
    let (lo, hi) = traj.base_span();
    let lambda = candidate.lambda;
    let fit = &candidate.fit;

    let s0 = traj.eval(0.0);
    let non_trivial =
        s0.v * s0.v + s0.dv * s0.dv + s0.w * s0.w + s0.dw * s0.dw > 0.0;

    // Residual of the unforced system via an auxiliary dense re-integration
    // around sampled times (finite differences of the composite itself).
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let h = VERIFY_FD_STEP;
    let mut residual_max: f64 = 0.0;
    for _ in 0..400 {
        let t = rng.gen_range((lo + 3.0 * h)..(hi - 3.0 * h));
        let p = traj.eval(t + h);
        let m_ = traj.eval(t - h);
        let c = traj.eval(t);
        let ddv = (p.dv - m_.dv) / (2.0 * h);
        let ddw = (p.dw - m_.dw) / (2.0 * h);
        let mval = candidate.model.m_raw(c.v * c.v + lambda * lambda * c.w * c.w);
        residual_max = residual_max
            .max((ddv + mval * c.v).abs())
            .max((ddw + lambda * lambda * mval * c.w).abs());
    }

    let l2 = lambda * lambda;
    let mut margin_plain = f64::INFINITY;
    let mut margin_dev = f64::INFINITY;
    for (t, s) in sample_window(&|t| traj.eval(t), (lo + 0.2, -0.2), 0.25) {
        let dw = s.dw * s.dw + l2 * s.w * s.w;
        margin_plain = margin_plain.min(fit.b0 * (-fit.a0 * t.abs()).exp() - dw);
        let (z, dz) = candidate.source.eval(t - fit.tau0);
        let dv = (s.dv - dz) * (s.dv - dz) + (s.v - z) * (s.v - z);
        margin_dev = margin_dev.min(fit.b1 * (-fit.a1 * t.abs()).exp() - dv);
    }
    for (t, s) in sample_window(&|t| traj.eval(t), (0.2, hi - 0.2), 0.25) {
        let ev = s.dv * s.dv + s.v * s.v;
        margin_plain = margin_plain.min(fit.b0 * (-fit.a0 * t).exp() - ev);
        let (z, dz) = candidate.target.eval(t - fit.tau1);
        let dwd = (s.dw - dz) * (s.dw - dz) + l2 * (s.w - z) * (s.w - z);
        margin_dev = margin_dev.min(fit.b1 * (-fit.a1 * t).exp() - dwd);
    }

    let tail_periods_back = -lo / candidate.source.base_period();
    let tail_periods_fwd = hi / candidate.target.period();
    let tail_coverage_pass = tail_periods_back >= 2.0 && tail_periods_fwd >= 2.0;

    let h0sq = candidate.h0 * candidate.h0;
    let mut ham_drift: f64 = 0.0;
    for (_, s) in sample_window(&|t| traj.eval(t), (lo + 0.1, hi - 0.1), 0.5) {
        ham_drift = ham_drift.max((hamiltonian(&candidate.model, lambda, &s) - h0sq).abs() / h0sq);
    }

    let residual_pass = residual_max <= tol;
    let decay_plain_pass = margin_plain >= -1e-12;
    let decay_deviation_pass = margin_dev >= -1e-12;
    let hamiltonian_pass = ham_drift <= 1e-8;
    CandidateReport {
        non_trivial,
        residual_tol: tol,
        residual_max,
        residual_pass,
        decay_margin_plain: margin_plain,
        decay_plain_pass,
        decay_margin_deviation: margin_dev,
        decay_deviation_pass,
        tail_coverage_pass,
        tail_periods_back,
        tail_periods_fwd,
        hamiltonian_drift: ham_drift,
        hamiltonian_pass,
        pass: non_trivial
            && residual_pass
            && decay_plain_pass
            && decay_deviation_pass
            && tail_coverage_pass
            && hamiltonian_pass,
    }
}

/// Plain Nelder–Mead minimization; deterministic for fixed inputs.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    scales: &[f64],
    budget: usize,
    fatol: f64,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for d in 0..dim {
        let mut x = x0.to_vec();
        x[d] += scales[d];
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = dim + 1;
    while evals < budget {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        if simplex[0].1 <= fatol {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex.iter().take(dim).map(|s| s.0[d]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].0.clone();
        let refl: Vec<f64> = (0..dim).map(|d| 2.0 * centroid[d] - worst[d]).collect();
        let f_refl = f(&refl);
        evals += 1;
        if f_refl < simplex[0].1 {
            let exp: Vec<f64> = (0..dim).map(|d| 3.0 * centroid[d] - 2.0 * worst[d]).collect();
            let f_exp = f(&exp);
            evals += 1;
            simplex[dim] = if f_exp < f_refl { (exp, f_exp) } else { (refl, f_refl) };
        } else if f_refl < simplex[dim - 1].1 {
            simplex[dim] = (refl, f_refl);
        } else {
            let con: Vec<f64> = (0..dim).map(|d| 0.5 * (centroid[d] + worst[d])).collect();
            let f_con = f(&con);
            evals += 1;
            if f_con < simplex[dim].1 {
                simplex[dim] = (con, f_con);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> =
                        (0..dim).map(|d| 0.5 * (best[d] + s.0[d])).collect();
                    let fx = f(&x);
                    *s = (x, fx);
                }
                evals += dim;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    (simplex[0].0.clone(), simplex[0].1)
}
