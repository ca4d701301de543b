//! Simple modes: periodic one-component solutions z_λ of the unforced system,
//! their minimal periods, zero-crossing anchors, and the Floquet stability of
//! the transverse linearization around them.
//!
//! The standard mode z₁ solves z'' + m(z²) z = 0 with z(0) = 0, z'(0) = H₀;
//! every other frequency comes from the rescaling z_λ(t) = z₁(λt)/λ. One
//! quarter period of z₁ is tabulated densely once and extended everywhere by
//! the odd/even symmetries, so evaluation costs O(1) in every inner loop.

use std::sync::Arc;

use num_complex::Complex64;

use crate::dynamics::{self, IntegratorConfig};
use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearityModel;
use crate::quad;

/// Number of table cells per quarter period.
const TABLE_CELLS: usize = 4096;

/// Multipliers farther than this from the unit circle count as genuinely
/// hyperbolic rather than truncation noise.
pub const INSTABILITY_MARGIN: f64 = 1e-6;

/// Minimal period π₁ of the standard mode with energy H₀:
///
/// ```text
/// π₁ = 4 ∫₀^{z_max} dz / sqrt(H₀² − M(z²)),   M(z_max²) = H₀²,
/// ```
///
/// evaluated after the substitution z = z_max·sin θ that removes the
/// inverse-square-root endpoint.
pub fn mode_period(model: &NonlinearityModel, h0: f64) -> Result<f64> {
    if !(h0 > 0.0) {
        return Err(Error::domain(format!("energy level must be positive, got {h0}")));
    }
    let sigma_max = amplitude_squared(model, h0)?;
    let z_max = sigma_max.sqrt();
    let h0sq = h0 * h0;
    let integrand = |theta: f64| {
        let s = theta.sin();
        let c = theta.cos();
        let sigma = sigma_max * s * s;
        // Near the turning point M(z_max²) − M(σ) cancels badly; integrate m
        // over the short remaining interval instead.
        let rest = if c * c < 1e-6 {
            quad::gk15(&|u| model.m_raw(u), sigma, sigma_max).0
        } else {
            h0sq - model.m_primitive_raw(sigma)
        };
        if rest <= 0.0 {
            return 0.0;
        }
        z_max * c / rest.sqrt()
    };
    let quarter = quad::integrate(&integrand, 0.0, std::f64::consts::FRAC_PI_2, 1e-12, 1e-300)?;
    Ok(4.0 * quarter)
}

/// Solves M(σ) = H₀² for the squared amplitude σ = z_max².
fn amplitude_squared(model: &NonlinearityModel, h0: f64) -> Result<f64> {
    let target = h0 * h0;
    let mut hi = 1.0f64;
    while model.m_primitive_raw(hi) < target {
        hi *= 2.0;
        if hi > 1e30 {
            return Err(Error::domain(format!(
                "no bounded amplitude at energy {h0}: M saturates below H₀²"
            )));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model.m_primitive_raw(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Dense quarter-period table of the standard mode (z₁, z₁', z₁'').
#[derive(Debug)]
struct BaseMode {
    model: Arc<NonlinearityModel>,
    h0: f64,
    pi1: f64,
    z_max: f64,
    dt: f64,
    z: Vec<f64>,
    dz: Vec<f64>,
    ddz: Vec<f64>,
}

impl BaseMode {
    fn new(model: Arc<NonlinearityModel>, h0: f64) -> Result<Self> {
        let pi1 = mode_period(&model, h0)?;
        let z_max = amplitude_squared(&model, h0)?.sqrt();
        let quarter = 0.25 * pi1;

        let cfg = IntegratorConfig::with_tol(1e-12, 1e-13);
        let rhs = |_t: f64, y: &[f64; 4]| {
            let m = model.m_raw(y[0] * y[0]);
            [y[1], -m * y[0], 0.0, 0.0]
        };
        let traj = dynamics::integrate_raw(&rhs, (0.0, quarter), [0.0, h0, 0.0, 0.0], &cfg)?;

        let n = TABLE_CELLS;
        let dt = quarter / n as f64;
        let mut z = Vec::with_capacity(n + 1);
        let mut dz = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let s = traj.eval((i as f64 * dt).min(quarter));
            z.push(s.v);
            dz.push(s.dv);
        }
        // The endpoints are known exactly; snap them so the symmetry
        // extension is continuous to machine precision.
        let turn_err = (z[n] - z_max).abs().max(dz[n].abs());
        if turn_err > 1e-8 * h0.max(1.0) {
            return Err(Error::numerical(format!(
                "quarter-period integration disagrees with the amplitude by {turn_err:.3e}"
            )));
        }
        z[0] = 0.0;
        dz[0] = h0;
        z[n] = z_max;
        dz[n] = 0.0;
        let ddz = z.iter().map(|&zi| -model.m_raw(zi * zi) * zi).collect();

        Ok(Self { model, h0, pi1, z_max, dt, z, dz, ddz })
    }

    /// (z₁(r), z₁'(r)) for r in [0, π₁/4] by cubic Hermite interpolation.
    fn eval_quarter(&self, r: f64) -> (f64, f64) {
        let n = self.z.len() - 1;
        let i = ((r / self.dt) as usize).min(n - 1);
        let u = (r / self.dt - i as f64).clamp(0.0, 1.0);
        let z = hermite(self.z[i], self.dz[i] * self.dt, self.z[i + 1], self.dz[i + 1] * self.dt, u);
        let dz =
            hermite(self.dz[i], self.ddz[i] * self.dt, self.dz[i + 1], self.ddz[i + 1] * self.dt, u);
        (z, dz)
    }

    /// (z₁(s), z₁'(s)) for any s, by periodicity and the odd/even symmetries
    /// of the mode about its zeros and extrema.
    fn eval(&self, s: f64) -> (f64, f64) {
        let p = self.pi1;
        let mut sm = s - p * (s / p).floor();
        if sm < 0.0 {
            sm += p;
        }
        let q = 0.25 * p;
        let quadrant = ((sm / q) as usize).min(3);
        let r = sm - quadrant as f64 * q;
        match quadrant {
            0 => self.eval_quarter(r),
            1 => {
                let (z, dz) = self.eval_quarter(q - r);
                (z, -dz)
            }
            2 => {
                let (z, dz) = self.eval_quarter(r);
                (-z, -dz)
            }
            _ => {
                let (z, dz) = self.eval_quarter(q - r);
                (-z, dz)
            }
        }
    }
}

fn hermite(y0: f64, s0: f64, y1: f64, s1: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * s0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * s1
}

/// The simple mode z_λ(t) = z₁(λt)/λ of energy H₀ and frequency λ².
#[derive(Clone, Debug)]
pub struct SimpleMode {
    base: Arc<BaseMode>,
    lambda: f64,
}

impl SimpleMode {
    pub fn new(model: &Arc<NonlinearityModel>, h0: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!("frequency scale must be positive, got {lambda}")));
        }
        Ok(Self { base: Arc::new(BaseMode::new(Arc::clone(model), h0)?), lambda })
    }

    /// The same underlying standard mode at a different frequency scale;
    /// shares the quarter-period table.
    pub fn rescale(&self, lambda: f64) -> Self {
        Self { base: Arc::clone(&self.base), lambda }
    }

    pub fn model(&self) -> &Arc<NonlinearityModel> {
        &self.base.model
    }

    pub fn h0(&self) -> f64 {
        self.base.h0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Minimal period π_λ = π₁/λ.
    pub fn period(&self) -> f64 {
        self.base.pi1 / self.lambda
    }

    /// Minimal period of the standard mode.
    pub fn base_period(&self) -> f64 {
        self.base.pi1
    }

    /// Amplitude of z_λ.
    pub fn amplitude(&self) -> f64 {
        self.base.z_max / self.lambda
    }

    /// (z_λ(t), z_λ'(t)).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (z, dz) = self.base.eval(self.lambda * t);
        (z / self.lambda, dz)
    }

    /// Energy defect z_λ'(t)² + M(λ² z_λ(t)²) − H₀².
    pub fn energy_residual(&self, t: f64) -> f64 {
        let (z, dz) = self.eval(t);
        dz * dz + self.base.model.m_primitive_raw(self.lambda * self.lambda * z * z)
            - self.base.h0 * self.base.h0
    }

    /// The unique t* in [window_start, window_start + π_λ) where the shifted
    /// mode passes through zero with velocity +H₀, i.e. z_λ(t*−τ) = 0 and
    /// z_λ'(t*−τ) = H₀. Located in closed form from periodicity, then
    /// polished by Newton on the interpolant.
    pub fn anchor_time(&self, tau: f64, window_start: f64) -> f64 {
        let p = self.period();
        let k = ((window_start - tau) / p).ceil();
        let mut t = tau + k * p;
        while t < window_start {
            t += p;
        }
        while t >= window_start + p {
            t -= p;
        }
        for _ in 0..4 {
            let (z, dz) = self.eval(t - tau);
            if dz.abs() > 1e-8 {
                t -= z / dz;
            }
        }
        t
    }
}

/// Fundamental 2×2 solution matrix of the Hill equation
/// ξ'' + c²·m(z₁(βt)²)·ξ = 0 from t0 to t1.
///
/// The source-mode transverse linearization has (c, β) = (λ, 1); the
/// target-mode one reduces to (c, β) = (1, λ) after writing z_λ in terms of
/// the standard mode.
pub fn hill_matrix(
    base: &SimpleMode,
    c: f64,
    beta: f64,
    t0: f64,
    t1: f64,
) -> Result<[[f64; 2]; 2]> {
    let csq = c * c;
    let rhs = |t: f64, y: &[f64; 4]| {
        let (z, _) = base.base.eval(beta * t);
        let q = csq * base.base.model.m_raw(z * z);
        [y[1], -q * y[0], y[3], -q * y[2]]
    };
    let cfg = IntegratorConfig::with_tol(1e-12, 1e-13);
    let traj = dynamics::integrate_raw(&rhs, (t0, t1), [1.0, 0.0, 0.0, 1.0], &cfg)?;
    let e = traj.end_state();
    // Columns are the transported canonical basis vectors.
    Ok([[e.v, e.w], [e.dv, e.dw]])
}

/// Monodromy matrix of a transverse Hill equation together with its
/// eigenvalues (the Floquet multipliers).
#[derive(Clone, Copy, Debug)]
pub struct Monodromy {
    pub matrix: [[f64; 2]; 2],
    pub multipliers: (Complex64, Complex64),
}

impl Monodromy {
    fn from_matrix(matrix: [[f64; 2]; 2]) -> Result<Self> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if (det - 1.0).abs() > 1e-8 {
            return Err(Error::numerical(format!(
                "monodromy determinant {det} deviates from 1 by {:.3e}",
                (det - 1.0).abs()
            )));
        }
        let tr = matrix[0][0] + matrix[1][1];
        let disc = tr * tr - 4.0 * det;
        let multipliers = if disc >= 0.0 {
            let root = disc.sqrt();
            (Complex64::new(0.5 * (tr + root), 0.0), Complex64::new(0.5 * (tr - root), 0.0))
        } else {
            let root = (-disc).sqrt();
            (Complex64::new(0.5 * tr, 0.5 * root), Complex64::new(0.5 * tr, -0.5 * root))
        };
        Ok(Self { matrix, multipliers })
    }

    pub fn det(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    pub fn max_abs_multiplier(&self) -> f64 {
        self.multipliers.0.norm().max(self.multipliers.1.norm())
    }

    pub fn is_unstable(&self) -> bool {
        self.max_abs_multiplier() > 1.0 + INSTABILITY_MARGIN
    }

    /// Real eigenvector of the multiplier with |μ| maximal (unstable
    /// direction), when the monodromy is hyperbolic.
    pub fn unstable_eigenvector(&self) -> Option<[f64; 2]> {
        self.real_eigenvector(true)
    }

    /// Real eigenvector of the multiplier with |μ| minimal (stable direction).
    pub fn stable_eigenvector(&self) -> Option<[f64; 2]> {
        self.real_eigenvector(false)
    }

    fn real_eigenvector(&self, unstable: bool) -> Option<[f64; 2]> {
        if !self.is_unstable() {
            return None;
        }
        let (m0, m1) = self.multipliers;
        if m0.im != 0.0 {
            return None;
        }
        let mu = if unstable == (m0.norm() >= m1.norm()) { m0.re } else { m1.re };
        let m = &self.matrix;
        // (M − μI) x = 0; pick the better-conditioned row.
        let cand1 = [m[0][1], mu - m[0][0]];
        let cand2 = [mu - m[1][1], m[1][0]];
        let n1 = (cand1[0] * cand1[0] + cand1[1] * cand1[1]).sqrt();
        let n2 = (cand2[0] * cand2[0] + cand2[1] * cand2[1]).sqrt();
        let (v, n) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
        if n == 0.0 {
            return None;
        }
        Some([v[0] / n, v[1] / n])
    }
}

/// Monodromy of the transverse linearization around the standard mode
/// carried by the first component: ξ'' + λ² m(z₁(t)²) ξ = 0 over one period π₁.
pub fn source_monodromy(base: &SimpleMode, lambda: f64) -> Result<Monodromy> {
    Monodromy::from_matrix(hill_matrix(base, lambda, 1.0, 0.0, base.base_period())?)
}

/// Monodromy of the transverse linearization around the mode z_λ carried by
/// the second component: η'' + m(λ² z_λ(t)²) η = 0 over one period π_λ.
pub fn target_monodromy(base: &SimpleMode, lambda: f64) -> Result<Monodromy> {
    Monodromy::from_matrix(hill_matrix(base, 1.0, lambda, 0.0, base.base_period() / lambda)?)
}

/// Floquet multipliers of ξ'' + λ² m(z₁(t)²) ξ = 0 over one period.
pub fn floquet_multipliers(
    model: &Arc<NonlinearityModel>,
    h0: f64,
    lambda: f64,
) -> Result<(Complex64, Complex64)> {
    let base = SimpleMode::new(model, h0, 1.0)?;
    Ok(source_monodromy(&base, lambda)?.multipliers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn harmonic_period() {
        let model = NonlinearityModel::constant(1.0).unwrap();
        let p = mode_period(&model, 1.0).unwrap();
        assert!((p - 2.0 * std::f64::consts::PI).abs() < 1e-10, "got {p}");

        let model = NonlinearityModel::constant(4.0).unwrap();
        let p = mode_period(&model, 1.0).unwrap();
        assert!((p - std::f64::consts::PI).abs() < 1e-10, "got {p}");
    }

    #[test]
    fn period_matches_first_return() {
        // Independent oracle: integrate until the first positive-slope zero.
        let model = NonlinearityModel::affine(1.0, 1.0).unwrap();
        let p = mode_period(&model, 1.0).unwrap();
        let cfg = IntegratorConfig::with_tol(1e-12, 1e-13);
        let traj = dynamics::integrate(
            &model,
            1.0,
            dynamics::PhaseState::new(0.0, 1.0, 0.0, 0.0),
            (0.0, 2.0 * p),
            &cfg,
        )
        .unwrap();
        // Bisect the sign change of v around the predicted period.
        let (mut lo, mut hi) = (0.9 * p, 1.1 * p);
        assert!(traj.eval(lo).v < 0.0 && traj.eval(hi).v > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if traj.eval(mid).v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let first_return = 0.5 * (lo + hi);
        assert!((first_return - p).abs() < 1e-9, "quadrature {p} vs return {first_return}");
    }

    #[test]
    fn mode_eval_harmonic() {
        let model = NonlinearityModel::constant(1.0).unwrap();
        let mode = SimpleMode::new(&model, 1.0, 2.0).unwrap();
        let (z, dz) = mode.eval(std::f64::consts::FRAC_PI_4);
        assert!((z - 0.5).abs() < 1e-12 && dz.abs() < 1e-11, "got ({z}, {dz})");
    }

    #[test]
    fn initial_conditions_and_periodicity() {
        for (model, h0, lambda) in [
            (NonlinearityModel::affine(1.0, 3.0).unwrap(), 1.3, 2.0),
            (NonlinearityModel::constant(2.0).unwrap(), 0.7, 1.0),
        ] {
            let mode = SimpleMode::new(&model, h0, lambda).unwrap();
            let (z0, dz0) = mode.eval(0.0);
            assert!(z0.abs() < 1e-12 && (dz0 - h0).abs() < 1e-12);
            let (zp, dzp) = mode.eval(mode.period());
            assert!(zp.abs() < 1e-10 && (dzp - h0).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_equality_random_times() {
        let model = NonlinearityModel::affine(1.0, 1.0).unwrap();
        let h0 = 1.2;
        let mode = SimpleMode::new(&model, h0, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(-50.0..50.0);
            assert!(
                mode.energy_residual(t).abs() <= 1e-9 * h0 * h0,
                "t={t}: residual {:.3e}",
                mode.energy_residual(t)
            );
        }
    }

    #[test]
    fn sup_bounds_hold() {
        let model = NonlinearityModel::affine(0.5, 2.0).unwrap();
        let h0 = 1.1;
        let b = model.effective_bounds(h0).unwrap();
        let mode = SimpleMode::new(&model, h0, 2.5).unwrap();
        for i in 0..2000 {
            let t = -10.0 + i as f64 * 0.01;
            let (z, dz) = mode.eval(t);
            assert!(dz.abs() <= b.h1 + 1e-9);
            assert!(mode.lambda() * z.abs() <= b.h1 + 1e-9);
        }
    }

    #[test]
    fn rescaling_identity_two_routes() {
        // Table + scaling against direct integration of the λ-mode equation.
        let model = NonlinearityModel::affine(1.0, 1.0).unwrap();
        let lambda = 2.0;
        let mode = SimpleMode::new(&model, 1.0, lambda).unwrap();
        let cfg = IntegratorConfig::with_tol(1e-12, 1e-13);
        let traj = dynamics::integrate(
            &model,
            lambda,
            dynamics::PhaseState::new(0.0, 0.0, 0.0, 1.0),
            (0.0, 10.0),
            &cfg,
        )
        .unwrap();
        for (t, s) in traj.sample(400) {
            let (z, dz) = mode.eval(t);
            assert!((s.w - z).abs() <= 1e-10, "t={t}: {} vs {z}", s.w);
            assert!((s.dw - dz).abs() <= 1e-10);
        }
    }

    #[test]
    fn anchor_time_cases() {
        let model = NonlinearityModel::constant(1.0).unwrap();
        let mode = SimpleMode::new(&model, 1.0, 1.0).unwrap();
        let t = mode.anchor_time(0.0, 2.0);
        assert!((t - 2.0 * std::f64::consts::PI).abs() < 1e-10, "got {t}");
        let t = mode.anchor_time(0.3, 0.0);
        assert!((t - 0.3).abs() < 1e-10, "got {t}");

        let model = NonlinearityModel::affine(1.0, 2.0).unwrap();
        let mode = SimpleMode::new(&model, 1.4, 2.0).unwrap();
        for (tau, ws) in [(0.17, 5.0), (1.9, -8.3), (0.0, 100.0)] {
            let t = mode.anchor_time(tau, ws);
            assert!(t >= ws && t < ws + mode.period());
            let (z, dz) = mode.eval(t - tau);
            assert!(z.abs() <= 1e-11, "anchor z residual {z:.3e}");
            assert!((dz - 1.4).abs() <= 1e-10, "anchor dz residual {:.3e}", dz - 1.4);
        }
    }

    #[test]
    fn floquet_constant_m() {
        // Constant coefficients: the monodromy is a rotation by λ·π₁, so for
        // λ = 2 and π₁ = 2π both multipliers equal 1 (a full double turn).
        let model = NonlinearityModel::constant(1.0).unwrap();
        let (m0, m1) = floquet_multipliers(&model, 1.0, 2.0).unwrap();
        assert!((m0 - Complex64::new(1.0, 0.0)).norm() < 1e-6, "got {m0}");
        assert!((m1 - Complex64::new(1.0, 0.0)).norm() < 1e-6, "got {m1}");
        // Against the explicit rotation at a generic scale.
        let lam = 1.37;
        let base = SimpleMode::new(&model, 1.0, 1.0).unwrap();
        let m = source_monodromy(&base, lam).unwrap();
        let angle = lam * base.base_period();
        let expected = [[angle.cos(), angle.sin() / lam], [-lam * angle.sin(), angle.cos()]];
        for (row, want) in m.matrix.iter().zip(&expected) {
            for (got, want) in row.iter().zip(want) {
                assert!((got - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn monodromy_determinant_is_one() {
        let model = NonlinearityModel::affine(1.0, 5.0).unwrap();
        let base = SimpleMode::new(&model, 1.5, 1.0).unwrap();
        for lam in [1.0, 1.3, 1.8, 2.0, 2.6, 3.0] {
            let m = source_monodromy(&base, lam).unwrap();
            assert!((m.det() - 1.0).abs() <= 1e-8, "λ={lam}: det {}", m.det());
            let t = target_monodromy(&base, lam).unwrap();
            assert!((t.det() - 1.0).abs() <= 1e-8);
            let prod = (m.multipliers.0 * m.multipliers.1).norm();
            assert!((prod - 1.0).abs() <= 1e-8, "multiplier product {prod}");
        }
    }

    #[test]
    fn resonance_tongue_scan_finds_instability() {
        // Scan λ ∈ [1,3] for a strongly modulated stiffness and report the
        // largest multiplier; the scan has to find a genuine tongue.
        let model = NonlinearityModel::affine(1.0, 5.0).unwrap();
        let base = SimpleMode::new(&model, 1.5, 1.0).unwrap();
        let mut best = 0.0f64;
        for i in 0..=40 {
            let lam = 1.0 + 2.0 * i as f64 / 40.0;
            let m = source_monodromy(&base, lam).unwrap();
            best = best.max(m.max_abs_multiplier());
        }
        assert!(best > 1.0 + INSTABILITY_MARGIN, "max multiplier over the scan: {best}");
    }
}
