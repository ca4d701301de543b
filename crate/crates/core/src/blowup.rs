//! Glues the rescaled transitions into one solution on [0, T_end] that walks
//! the energy up the frequency ladder: at time T_k the solution passes
//! exactly through (0, H₀·e_k), the half-scales S_k shrink fast enough that
//! the T_k converge to a finite T_∞, and the forcing norms carry the
//! per-interval exponential bound.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bridge::{build_bridge, CutoffFunction};
use crate::error::{Error, Result};
use crate::heteroclinic::HeteroclinicCandidate;
use crate::spectral::{
    apply_a_power, fk_gevrey_bound_ln, gevrey_norm_sq_ln, rescale_bridge, weighted_norm_sq_ln,
    OperatorSpec, RescaledBridge, SpectralVector, WeightFunction,
};

/// Rule for the half-scales S_k.
#[derive(Clone, Debug)]
pub enum ScheduleRule {
    /// S_k = 1/(k+1)².
    Default,
    /// S_k = max{(2/A₂)·φ(λ^{2k+2})/λ^k, 1/(k+1)²}, for a generalized
    /// weight φ; verified numerically at construction.
    Weighted(WeightFunction),
}

impl ScheduleRule {
    fn label(&self) -> String {
        match self {
            ScheduleRule::Default => "default".into(),
            ScheduleRule::Weighted(w) => format!("weighted({})", w.label()),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub k: u32,
    pub s_k: f64,
    /// Left anchor offset: the piece starts at local time −S_{1,k}.
    pub s1k: f64,
    /// Right anchor offset: the piece ends at local time S_{2,k}.
    pub s2k: f64,
    /// T_k, the junction time where this piece starts.
    pub t_start: f64,
}

/// The glue schedule {S_k, S_{1,k}, S_{2,k}, T_k} together with the finite
/// blow-up time estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Schedule {
    pub lambda: f64,
    pub h0: f64,
    pub pi1: f64,
    pub k_max: u32,
    pub s_multiplier: f64,
    pub rule: String,
    pub entries: Vec<ScheduleEntry>,
    /// T_{K_max}, the end of the computed range.
    pub t_end: f64,
    /// Upper bound for T_∞ − T_{K_max}.
    pub tail_bound: f64,
    /// T_end + tail bound.
    pub t_infinity: f64,
}

impl Schedule {
    /// Junction times T_0 .. T_{K_max}.
    pub fn junction_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.entries.iter().map(|e| e.t_start).collect();
        t.push(self.t_end);
        t
    }
}

/// Σ_{j=1}^{n} 1/j².
fn partial_basel(n: u32) -> f64 {
    (1..=n).map(|j| 1.0 / (j as f64 * j as f64)).sum()
}

/// Closed-form tail Σ_{k>=K} [4·mult/(k+1)² + π₁(λ^{−k} + λ^{−k−1})].
fn default_tail(k_from: u32, mult: f64, pi1: f64, lambda: f64) -> f64 {
    let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let quad_tail = 4.0 * mult * (zeta2 - partial_basel(k_from));
    let geo_tail = pi1 * (lambda + 1.0) / (lambda - 1.0) * lambda.powi(-(k_from as i32));
    quad_tail + geo_tail
}

/// Builds the schedule: half-scales per rule, anchors from the mode zero
/// crossings, junction recursion, and a verified tail estimate for T_∞.
pub fn make_schedule(
    candidate: &HeteroclinicCandidate,
    op: &OperatorSpec,
    k_max: u32,
    rule: &ScheduleRule,
    s_multiplier: f64,
) -> Result<Schedule> {
    if k_max < 1 {
        return Err(Error::domain("schedule needs K_max >= 1"));
    }
    if (op.lambda - candidate.lambda).abs() > 1e-12 {
        return Err(Error::domain(format!(
            "operator scale {} does not match the candidate's λ = {}",
            op.lambda, candidate.lambda
        )));
    }
    if !(s_multiplier > 0.0) {
        return Err(Error::domain("half-scale multiplier must be positive"));
    }
    let lambda = op.lambda;
    let pi1 = candidate.source.base_period();
    let a2 = candidate.fit.a0.min(candidate.fit.a1);

    let s_k_of = |k: u32| -> f64 {
        let default = 1.0 / ((k as f64 + 1.0) * (k as f64 + 1.0));
        let base = match rule {
            ScheduleRule::Default => default,
            ScheduleRule::Weighted(phi) => {
                let sigma = op.lambda_k(k + 1) * op.lambda_k(k + 1);
                ((2.0 / a2) * phi.eval(sigma) / op.lambda_k(k)).max(default)
            }
        };
        s_multiplier * base
    };

    if let ScheduleRule::Weighted(phi) = rule {
        phi.validate()?;
        verify_weighted_rule(phi, op, a2, k_max, s_multiplier, &s_k_of, pi1)?;
    }

    let mut entries = Vec::with_capacity(k_max as usize);
    let mut t = 0.0;
    for k in 0..k_max {
        let s_k = s_k_of(k);
        let scale = op.lambda_k(k);
        let s_big = scale * s_k;
        let t_left = candidate.source.anchor_time(candidate.fit.tau0, -2.0 * s_big - pi1);
        let s1k = -t_left / scale;
        let s2k = candidate.target.anchor_time(candidate.fit.tau1, 2.0 * s_big) / scale;
        entries.push(ScheduleEntry { k, s_k, s1k, s2k, t_start: t });
        t += s1k + s2k;
    }

    let tail_bound = match rule {
        ScheduleRule::Default => default_tail(k_max, s_multiplier, pi1, lambda),
        ScheduleRule::Weighted(_) => {
            // Numeric sum of the per-piece upper bounds until the weighted
            // part is dominated by the default rule, then the closed form.
            let mut tail = 0.0;
            let mut k = k_max;
            loop {
                let default = s_multiplier / ((k as f64 + 1.0) * (k as f64 + 1.0));
                let s_k = s_k_of(k);
                if (s_k - default).abs() <= 1e-15 * default || k > k_max + 20_000 {
                    tail += default_tail(k, s_multiplier, pi1, lambda);
                    break;
                }
                tail += 4.0 * s_k + pi1 * (lambda.powi(-(k as i32)) + lambda.powi(-(k as i32) - 1));
                k += 1;
            }
            tail
        }
    };

    Ok(Schedule {
        lambda,
        h0: candidate.h0,
        pi1,
        k_max,
        s_multiplier,
        rule: rule.label(),
        entries,
        t_end: t,
        tail_bound,
        t_infinity: t + tail_bound,
    })
}

/// Numeric gates for the weighted rule: (a) the per-piece upper bounds must
/// have Cauchy partial sums; (b) φ(λ^{2k+2}) − A₂·λ^k·S_k must run to −∞
/// over the probed range.
fn verify_weighted_rule(
    phi: &WeightFunction,
    op: &OperatorSpec,
    a2: f64,
    k_max: u32,
    s_multiplier: f64,
    s_k_of: &dyn Fn(u32) -> f64,
    pi1: f64,
) -> Result<()> {
    let lambda = op.lambda;
    // Largest k with λ^{2k+2} still representable.
    let k_repr = ((1020.0 * std::f64::consts::LN_2 / (2.0 * lambda.ln())) as u32).saturating_sub(2);

    // (a) Cauchy partial sums: the default part 1/(k+1)² and the geometric
    // π-part have closed-form tails, so it suffices that the weighted excess
    // over the default rule sums below 1e-6 over the last representable
    // stretch.
    let probe = (k_max + 600).min(k_repr);
    if probe < k_max + 50 {
        return Err(Error::domain(
            "weighted rule rejected: λ^{2k} overflows before the tail can be probed",
        ));
    }
    let mut excess_tail = 0.0;
    for k in (probe - 100)..probe {
        let default = s_multiplier / ((k as f64 + 1.0) * (k as f64 + 1.0));
        excess_tail += 4.0 * (s_k_of(k) - default).max(0.0);
    }
    if !(excess_tail <= 1e-6) {
        return Err(Error::domain(format!(
            "weighted rule rejected: junction increments are not Cauchy \
             (weighted excess over pieces {}..{} sums to {excess_tail:.3e} > 1e-6)",
            probe - 100,
            probe
        )));
    }
    let _ = pi1;

    // (b) φ(λ^{2k+2}) − A₂·λ^k·S_k must run to −∞ over the probed range.
    let g = |k: u32| -> f64 {
        let sigma = op.lambda_k(k + 1) * op.lambda_k(k + 1);
        phi.eval(sigma) - a2 * op.lambda_k(k) * s_k_of(k)
    };
    let probe_g = (k_max + 60).min(k_repr);
    let mut prev = g(probe_g * 3 / 4);
    for k in (probe_g * 3 / 4 + 1)..=probe_g {
        let v = g(k);
        if v >= prev {
            return Err(Error::domain(format!(
                "weighted rule rejected: φ(λ^{{2k+2}}) − A₂λ^k S_k is not decreasing at k = {k}"
            )));
        }
        prev = v;
    }
    if !(g(probe_g) < -10.0) {
        return Err(Error::domain(format!(
            "weighted rule rejected: φ(λ^{{2k+2}}) − A₂λ^k S_k only reaches {:.3} by k = {probe_g}",
            g(probe_g)
        )));
    }
    Ok(())
}

/// The glued solution: per-interval rescaled transitions with evaluators for
/// u(t), u'(t) and f(t) as finite spectral vectors.
pub struct GluedSolution {
    pub schedule: Schedule,
    pub op: OperatorSpec,
    pub candidate: Arc<HeteroclinicCandidate>,
    bridges: Vec<RescaledBridge>,
}

impl GluedSolution {
    /// Index and local time of the piece containing t ∈ [0, T_end].
    fn locate(&self, t: f64) -> (usize, f64) {
        let entries = &self.schedule.entries;
        assert!(
            t >= 0.0 && t <= self.schedule.t_end * (1.0 + 1e-12),
            "t={t} outside the glued range [0, {}]",
            self.schedule.t_end
        );
        let idx = entries
            .partition_point(|e| e.t_start <= t)
            .saturating_sub(1)
            .min(entries.len() - 1);
        let e = &entries[idx];
        (idx, t - e.t_start - e.s1k)
    }

    pub fn u(&self, t: f64) -> SpectralVector {
        let (idx, local) = self.locate(t);
        self.bridges[idx].u(local)
    }

    pub fn u_prime(&self, t: f64) -> SpectralVector {
        let (idx, local) = self.locate(t);
        self.bridges[idx].u_prime(local)
    }

    /// The glued forcing; zero for t >= T_end.
    pub fn f(&self, t: f64) -> SpectralVector {
        if t >= self.schedule.t_end {
            return SpectralVector::zero();
        }
        let (idx, local) = self.locate(t);
        self.bridges[idx].f(local)
    }

    pub fn bridges(&self) -> &[RescaledBridge] {
        &self.bridges
    }

    /// Exact junction state at T_k: u = 0, u' = H₀·e_k, by construction of
    /// the anchors.
    pub fn junction_state(&self, k: u32) -> (SpectralVector, SpectralVector) {
        (SpectralVector::zero(), SpectralVector::from_pairs([(k, self.schedule.h0)]))
    }
}

/// Builds every transition piece and wires the evaluators.
pub fn assemble(
    candidate: &Arc<HeteroclinicCandidate>,
    schedule: &Schedule,
    cutoff: &CutoffFunction,
) -> Result<GluedSolution> {
    let op = OperatorSpec::new(schedule.lambda)?;
    let mut bridges = Vec::with_capacity(schedule.entries.len());
    for e in &schedule.entries {
        let s_big = op.lambda_k(e.k) * e.s_k;
        let profile = Arc::new(
            build_bridge(candidate, s_big, cutoff)
                .map_err(|err| Error::Numerical(format!("piece k={}: {err}", e.k)))?,
        );
        bridges.push(rescale_bridge(&profile, e.k, e.s_k, &op)?);
    }
    Ok(GluedSolution {
        schedule: schedule.clone(),
        op,
        candidate: Arc::clone(candidate),
        bridges,
    })
}

/// Junction continuity report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JunctionReport {
    /// Tolerance the continuity clauses were checked against.
    pub tol: f64,
    /// Worst ‖u_L − u_R‖ over the interior junctions.
    pub u_jump: f64,
    /// Worst ‖u'_L − u'_R‖.
    pub du_jump: f64,
    /// Worst |u''| limit over both sides of every junction.
    pub ddu_max: f64,
    /// Worst ‖u'(T_k) − H₀e_k‖ against the exact junction law.
    pub law_err: f64,
    pub per_junction: Vec<(u32, f64, f64, f64)>,
    pub pass: bool,
}

/// Checks left/right limits of u, u' and u'' at every junction.
///
/// The u'' limits are evaluated through the field equation
/// u'' = −m(|A^{1/2}u|²)Au + f on each side: at junction scale k the local
/// curvature grows like λ^{2k}, so no finite-difference stencil in f64 can
/// resolve the limit there; a finite-difference cross-check runs on the low
/// pieces where it is meaningful.
pub fn junction_check(solution: &GluedSolution, tol: f64) -> JunctionReport {
    let sched = &solution.schedule;
    let op = &solution.op;
    let model = &solution.candidate.model;
    let h0 = sched.h0;

    let u_second = |b: &RescaledBridge, local: f64| -> SpectralVector {
        let u = b.u(local);
        let f = b.f(local);
        let m = model.m_raw(b.a_half_u_norm_sq(local));
        SpectralVector::from_pairs(u.iter().map(|(k, c)| {
            let eig = op.lambda_k(k) * op.lambda_k(k);
            (k, -m * eig * c + f.coeff(k))
        }))
    };

    let mut u_jump: f64 = 0.0;
    let mut du_jump: f64 = 0.0;
    let mut ddu_max: f64 = 0.0;
    let mut law_err: f64 = 0.0;
    let mut per_junction = Vec::new();

    // Local junction times come from the schedule, not from the pieces'
    // intrinsic anchors, so inconsistencies in the schedule are caught.
    let times = sched.junction_times();
    let n = sched.entries.len();
    #[allow(clippy::needless_range_loop)]
    for j in 0..=n {
        let left = (j > 0).then(|| {
            let e = &sched.entries[j - 1];
            (&solution.bridges[j - 1], times[j] - e.t_start - e.s1k)
        });
        let right = (j < n).then(|| {
            let e = &sched.entries[j];
            (&solution.bridges[j], -e.s1k)
        });
        let exact = SpectralVector::from_pairs([(j as u32, h0)]);
        let mut ju: f64 = 0.0;
        let mut jdu: f64 = 0.0;
        let mut jddu: f64 = 0.0;
        let mut states = Vec::new();
        if let Some((b, local)) = left {
            states.push((b.u(local), b.u_prime(local), u_second(b, local)));
        }
        if let Some((b, local)) = right {
            states.push((b.u(local), b.u_prime(local), u_second(b, local)));
        }
        for (_u, du, ddu) in &states {
            law_err = law_err.max(du.sub(&exact).norm());
            jddu = jddu.max(ddu.norm());
        }
        if states.len() == 2 {
            ju = states[0].0.sub(&states[1].0).norm();
            jdu = states[0].1.sub(&states[1].1).norm();
        }
        u_jump = u_jump.max(ju);
        du_jump = du_jump.max(jdu);
        ddu_max = ddu_max.max(jddu);
        per_junction.push((j as u32, ju, jdu, jddu));
    }

    JunctionReport {
        tol,
        u_jump,
        du_jump,
        ddu_max,
        law_err,
        per_junction,
        pass: u_jump <= tol && du_jump <= tol && ddu_max <= 1e-6 && law_err <= tol.max(1e-9),
    }
}

/// Blow-up diagnostics: the higher-order energy along sample times, the
/// exact junction values H₀²λ^{4kα}, and the non-convergence witness
/// ⟨u'(T_k), u'(T_{k+1})⟩.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowupDiagnostics {
    pub alpha: f64,
    pub samples: Vec<(f64, f64)>,
    /// (k, |A^α u'(T_k)|²) with the exact junction states.
    pub junction_values: Vec<(u32, f64)>,
    /// ⟨u'(T_k), u'(T_{k+1})⟩ for consecutive junctions (zero exactly).
    pub consecutive_inner_products: Vec<f64>,
}

pub fn blowup_diagnostics(solution: &GluedSolution, alpha: f64, times: &[f64]) -> BlowupDiagnostics {
    let op = &solution.op;
    let samples = times
        .iter()
        .map(|&t| {
            let du = apply_a_power(&solution.u_prime(t), op, alpha);
            let u = apply_a_power(&solution.u(t), op, alpha + 0.5);
            (t, du.dot(&du) + u.dot(&u))
        })
        .collect();

    let mut junction_values = Vec::new();
    let mut inner = Vec::new();
    let mut prev: Option<SpectralVector> = None;
    for k in 0..=solution.schedule.k_max {
        let (_, du) = solution.junction_state(k);
        let a_du = apply_a_power(&du, op, alpha);
        junction_values.push((k, a_du.dot(&a_du)));
        if let Some(p) = prev {
            inner.push(p.dot(&du));
        }
        prev = Some(du);
    }
    BlowupDiagnostics { alpha, samples, junction_values, consecutive_inner_products: inner }
}

/// Norm used for forcing profiles.
#[derive(Clone, Debug)]
pub enum NormSpec {
    Gevrey { r: f64, s: f64 },
    Weighted(WeightFunction),
    Plain,
}

impl NormSpec {
    pub fn label(&self) -> String {
        match self {
            NormSpec::Gevrey { r, s } => format!("gevrey(r={r}, s={s})"),
            NormSpec::Weighted(w) => format!("weighted({})", w.label()),
            NormSpec::Plain => "plain".into(),
        }
    }
}

/// Per-interval sup of the chosen forcing norm (dense sampling, 10³ points
/// per interval), the matching bound curve, and the decay verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForcingProfile {
    pub norm: String,
    /// ln of sup over [T_k, T_{k+1}] of the squared norm of f.
    pub sup_sq_ln: Vec<f64>,
    /// ln of the per-interval bound for the squared norm.
    pub bound_sq_ln: Vec<f64>,
    /// Whether the bound curve diverges over the computed range.
    pub bound_diverges: bool,
    /// PASS iff the sup series is eventually decreasing and the last value
    /// is below the first by a factor 1e-3.
    pub decay_pass: bool,
}

pub fn forcing_profile(solution: &GluedSolution, norm: &NormSpec) -> ForcingProfile {
    let op = &solution.op;
    let sched = &solution.schedule;
    let mut sup_sq_ln = Vec::new();
    let mut bound_sq_ln = Vec::new();
    let fb = crate::bridge::bridge_forcing_bound(
        &solution.candidate,
        &crate::bridge::make_cutoff(),
    )
    .ok();

    for (idx, e) in sched.entries.iter().enumerate() {
        let b = &solution.bridges[idx];
        let mut sup = f64::NEG_INFINITY;
        let n = 1000;
        for i in 0..=n {
            let local = -e.s1k + (e.s1k + e.s2k) * i as f64 / n as f64;
            let f = b.f(local);
            let v = match norm {
                NormSpec::Gevrey { r, s } => gevrey_norm_sq_ln(&f, op, *r, *s),
                NormSpec::Weighted(w) => weighted_norm_sq_ln(&f, op, w),
                NormSpec::Plain => {
                    let nn = f.norm();
                    if nn == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        2.0 * nn.ln()
                    }
                }
            };
            sup = sup.max(v);
        }
        sup_sq_ln.push(sup);

        let bound = match (&fb, norm) {
            (Some(fb), NormSpec::Gevrey { r, s }) => {
                fk_gevrey_bound_ln(e.k, e.s_k, op, *r, *s, fb.a2, fb.b2)
            }
            (Some(fb), NormSpec::Plain) => fk_gevrey_bound_ln(e.k, e.s_k, op, 0.0, 1.0, fb.a2, fb.b2),
            (Some(fb), NormSpec::Weighted(w)) => {
                let lk = op.lambda_k(e.k);
                let prefactor = 1.0 / (lk * e.s_k * e.s_k) + lk;
                let sigma = op.lambda_k(e.k + 1) * op.lambda_k(e.k + 1);
                2.0 * prefactor.ln() + fb.b2.ln() + w.eval(sigma) - fb.a2 * lk * e.s_k
            }
            (None, _) => f64::INFINITY,
        };
        bound_sq_ln.push(bound);
    }

    // Divergence of the bound curve over the computed range: the last value
    // exceeds the first and the tail of the curve is increasing.
    let nb = bound_sq_ln.len();
    let bound_diverges = nb >= 3
        && bound_sq_ln[nb - 1] > bound_sq_ln[0]
        && bound_sq_ln[nb - 1] > bound_sq_ln[nb - 2]
        && bound_sq_ln[nb - 2] > bound_sq_ln[nb - 3];

    // Eventually decreasing + thousandfold drop (norms, not squares).
    let n = sup_sq_ln.len();
    let mut tail_decreasing_from = None;
    'outer: for j in 0..n.saturating_sub(1) {
        for i in j..n - 1 {
            if sup_sq_ln[i + 1] >= sup_sq_ln[i] {
                continue 'outer;
            }
        }
        tail_decreasing_from = Some(j);
        break;
    }
    let ratio_ok = 0.5 * (sup_sq_ln[n - 1] - sup_sq_ln[0]) < (1e-3f64).ln();
    let decay_pass = tail_decreasing_from.is_some_and(|j| j < n - 1) && ratio_ok;

    ForcingProfile {
        norm: norm.label(),
        sup_sq_ln,
        bound_sq_ln,
        bound_diverges,
        decay_pass,
    }
}
