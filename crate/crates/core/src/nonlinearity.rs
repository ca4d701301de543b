//! Nonlinear stiffness m, its primitive M, and the a-priori bounds that
//! confine the dynamics to a bounded Lipschitz setting.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Relative tolerance used when the primitive of a tabulated stiffness has to
/// be computed by quadrature. M enters the conserved energy, so its error
/// floor propagates into every downstream check.
pub const TABLE_QUAD_REL_TOL: f64 = 1e-12;

/// Grid size for slope estimates on tabulated data.
const LIPSCHITZ_GRID: usize = 10_000;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum Family {
    /// m(σ) = c
    Constant { c: f64 },
    /// m(σ) = a + bσ (the classical string stiffness)
    Affine { a: f64, b: f64 },
    /// m(σ) = (a + bσ)⁻², the family with a conserved higher-order quantity;
    /// used here as an expected-failure control in connection searches.
    Pohozaev { a: f64, b: f64 },
    /// Smooth step from a stiff core to a soft tail:
    /// m(σ) = m_lo + (m_hi − m_lo)·(1 − tanh((σ − σ_c)/w))/2.
    ///
    /// An orbit with amplitude well past σ_c dwells in the soft region and
    /// sweeps quickly through the stiff core, which turns both transverse
    /// linearizations into kicked oscillators with broad instability regions.
    /// This is the family where connection searches have a chance.
    Plateau { m_hi: f64, m_lo: f64, sigma_c: f64, width: f64 },
    /// Monotone-cubic interpolation of user-supplied samples.
    Tabulated(Table),
}

/// The stiffness function σ ↦ m(σ) together with its primitive
/// M(σ) = ∫₀^σ m(s) ds and family-level bound data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonlinearityModel {
    family: Family,
}

/// Uniform bounds on an invariant ball determined by the energy level H₀.
///
/// `h1 = max{1, 1/√μ₁}·H₀` bounds every amplitude the dynamics can reach,
/// `mu2` and `lipschitz` bound m and its slope on [0, H₀²/μ₁].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EffectiveBounds {
    pub h0: f64,
    pub h1: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub lipschitz: f64,
}

impl NonlinearityModel {
    pub fn constant(c: f64) -> Result<Arc<Self>> {
        if !(c > 0.0) {
            return Err(Error::domain(format!("constant stiffness must be positive, got {c}")));
        }
        Ok(Arc::new(Self { family: Family::Constant { c } }))
    }

    pub fn affine(a: f64, b: f64) -> Result<Arc<Self>> {
        if !(a > 0.0) || !(b >= 0.0) {
            return Err(Error::domain(format!(
                "affine stiffness needs a > 0 and b >= 0, got a={a}, b={b}"
            )));
        }
        Ok(Arc::new(Self { family: Family::Affine { a, b } }))
    }

    pub fn pohozaev(a: f64, b: f64) -> Result<Arc<Self>> {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::domain(format!(
                "pohozaev stiffness needs a > 0 and b > 0, got a={a}, b={b}"
            )));
        }
        Ok(Arc::new(Self { family: Family::Pohozaev { a, b } }))
    }

    pub fn plateau(m_hi: f64, m_lo: f64, sigma_c: f64, width: f64) -> Result<Arc<Self>> {
        if !(m_lo > 0.0) || !(m_hi > m_lo) || !(sigma_c >= 0.0) || !(width > 0.0) {
            return Err(Error::domain(format!(
                "plateau stiffness needs m_hi > m_lo > 0, σ_c >= 0, width > 0; \
                 got m_hi={m_hi}, m_lo={m_lo}, σ_c={sigma_c}, width={width}"
            )));
        }
        Ok(Arc::new(Self { family: Family::Plateau { m_hi, m_lo, sigma_c, width } }))
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Arc<Self>> {
        let table = Table::new(points)?;
        Ok(Arc::new(Self { family: Family::Tabulated(table) }))
    }

    /// Reads a two-column CSV (header row, then σ,m(σ) with strictly
    /// increasing σ) into a tabulated model.
    pub fn tabulated_from_csv(path: &Path) -> Result<Arc<Self>> {
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let sigma = cols
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad σ on line {}", path.display(), i + 1)))?;
            let m = cols
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad m on line {}", path.display(), i + 1)))?;
            points.push((sigma, m));
        }
        Self::tabulated(points)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// m(σ). Errors on negative σ.
    pub fn eval_m(&self, sigma: f64) -> Result<f64> {
        if sigma < 0.0 {
            return Err(Error::domain(format!("m is defined on σ >= 0, got {sigma}")));
        }
        Ok(self.m_raw(sigma))
    }

    /// M(σ) = ∫₀^σ m(s) ds. Errors on negative σ.
    pub fn eval_m_primitive(&self, sigma: f64) -> Result<f64> {
        if sigma < 0.0 {
            return Err(Error::domain(format!("M is defined on σ >= 0, got {sigma}")));
        }
        Ok(self.m_primitive_raw(sigma))
    }

    /// Unchecked m(σ); callers guarantee σ >= 0.
    pub(crate) fn m_raw(&self, sigma: f64) -> f64 {
        match &self.family {
            Family::Constant { c } => *c,
            Family::Affine { a, b } => a + b * sigma,
            Family::Pohozaev { a, b } => (a + b * sigma).powi(-2),
            Family::Plateau { m_hi, m_lo, sigma_c, width } => {
                m_lo + (m_hi - m_lo) * 0.5 * (1.0 - ((sigma - sigma_c) / width).tanh())
            }
            Family::Tabulated(t) => t.eval(sigma),
        }
    }

    /// Unchecked M(σ); closed form except for tabulated data.
    pub(crate) fn m_primitive_raw(&self, sigma: f64) -> f64 {
        match &self.family {
            Family::Constant { c } => c * sigma,
            Family::Affine { a, b } => a * sigma + 0.5 * b * sigma * sigma,
            Family::Pohozaev { a, b } => (1.0 / b) * (1.0 / a - 1.0 / (a + b * sigma)),
            Family::Plateau { m_hi, m_lo, sigma_c, width } => {
                // ∫ (1 − tanh((x−c)/w))/2 dx = (x − w·logcosh((x−c)/w))/2 + C
                let f = |x: f64| 0.5 * (x - width * log_cosh((x - sigma_c) / width));
                m_lo * sigma + (m_hi - m_lo) * (f(sigma) - f(0.0))
            }
            Family::Tabulated(t) => t.primitive(sigma),
        }
    }

    /// Greatest known positive lower bound of m over all σ >= 0, when the
    /// family has one. The pohozaev family decays to zero, so its lower bound
    /// exists only on energy-dependent invariant balls (see
    /// [`NonlinearityModel::effective_bounds`]).
    pub fn mu1_global(&self) -> Option<f64> {
        match &self.family {
            Family::Constant { c } => Some(*c),
            Family::Affine { a, .. } => Some(*a),
            Family::Pohozaev { .. } => None,
            Family::Plateau { m_lo, .. } => Some(*m_lo),
            Family::Tabulated(t) => {
                let min = t.min_value();
                (min > 0.0).then_some(min)
            }
        }
    }

    /// sup of m on [0, hi] (closed form where the family permits).
    pub fn sup_on(&self, hi: f64) -> f64 {
        match &self.family {
            Family::Constant { c } => *c,
            Family::Affine { a, b } => a + b * hi,
            Family::Pohozaev { a, .. } => a.powi(-2),
            Family::Plateau { .. } => self.m_raw(0.0),
            Family::Tabulated(t) => t.sup_on(hi),
        }
    }

    /// Lipschitz constant of m on [0, hi]. For tabulated data this is the max
    /// slope over a dense grid: an estimate, not a certificate.
    pub fn lipschitz_on(&self, hi: f64) -> f64 {
        match &self.family {
            Family::Constant { .. } => 0.0,
            Family::Affine { b, .. } => *b,
            // |m'| = 2b(a+bσ)⁻³ is maximal at σ = 0.
            Family::Pohozaev { a, b } => 2.0 * b * a.powi(-3),
            Family::Plateau { m_hi, m_lo, sigma_c, width } => {
                // |m'| = (m_hi−m_lo)/(2w)·sech²((σ−σ_c)/w), maximal at σ_c.
                let u = if *sigma_c <= hi { 0.0 } else { (sigma_c - hi) / width };
                let sech = 1.0 / u.cosh();
                (m_hi - m_lo) / (2.0 * width) * sech * sech
            }
            Family::Tabulated(t) => t.max_slope_on(hi),
        }
    }

    /// Bounds on the invariant ball reachable from energy level H₀.
    ///
    /// For families with a global lower bound μ₁ the ball is [0, H₀²/μ₁]. For
    /// the pohozaev family μ₁ is the self-consistent root of μ = m(H₀²/μ),
    /// which exists only while 4abH₀² <= 1; beyond that the energy no longer
    /// confines σ and the decadent ball is unbounded.
    pub fn effective_bounds(&self, h0: f64) -> Result<EffectiveBounds> {
        if !(h0 > 0.0) {
            return Err(Error::domain(format!("energy level must be positive, got {h0}")));
        }
        let mu1 = match &self.family {
            Family::Pohozaev { a, b } => {
                let disc = 1.0 - 4.0 * a * b * h0 * h0;
                if disc < 0.0 {
                    return Err(Error::domain(format!(
                        "strict hyperbolicity fails on the invariant ball: pohozaev family \
                         needs 4abH₀² <= 1, got {}",
                        4.0 * a * b * h0 * h0
                    )));
                }
                (1.0 - 2.0 * a * b * h0 * h0 + disc.sqrt()) / (2.0 * a * a)
            }
            _ => self
                .mu1_global()
                .ok_or_else(|| Error::domain("stiffness has no positive lower bound".to_string()))?,
        };
        let cap = h0 * h0 / mu1;
        Ok(EffectiveBounds {
            h0,
            h1: 1.0f64.max(1.0 / mu1.sqrt()) * h0,
            mu1,
            mu2: self.sup_on(cap),
            lipschitz: self.lipschitz_on(cap),
        })
    }
}

impl fmt::Display for NonlinearityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Constant { c } => write!(f, "constant(c={c})"),
            Family::Affine { a, b } => write!(f, "affine(a={a}, b={b})"),
            Family::Pohozaev { a, b } => write!(f, "pohozaev(a={a}, b={b})"),
            Family::Plateau { m_hi, m_lo, sigma_c, width } => {
                write!(f, "plateau(m_hi={m_hi}, m_lo={m_lo}, σ_c={sigma_c}, width={width})")
            }
            Family::Tabulated(t) => write!(f, "tabulated({} samples)", t.sigma.len()),
        }
    }
}

/// Monotone cubic (Fritsch–Carlson) interpolant of sampled stiffness values,
/// clamped to the endpoint values outside the sampled range.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Table {
    sigma: Vec<f64>,
    value: Vec<f64>,
    slope: Vec<f64>,
    /// Cumulative ∫₀^{σ_i} of the interpolant, filled at construction.
    cumulative: Vec<f64>,
}

impl Table {
    fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("tabulated stiffness needs at least 2 samples"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::domain("tabulated σ values must be strictly increasing"));
            }
        }
        if points[0].0 < 0.0 {
            return Err(Error::domain("tabulated σ values must be nonnegative"));
        }
        if points.iter().any(|&(_, m)| !(m > 0.0)) {
            return Err(Error::domain("tabulated m values must be positive"));
        }
        let sigma: Vec<f64> = points.iter().map(|p| p.0).collect();
        let value: Vec<f64> = points.iter().map(|p| p.1).collect();
        let slope = fritsch_carlson_slopes(&sigma, &value);

        let mut table = Table { sigma, value, slope, cumulative: Vec::new() };
        table.fill_cumulative()?;
        Ok(table)
    }

    fn fill_cumulative(&mut self) -> Result<()> {
        let n = self.sigma.len();
        let mut cum = Vec::with_capacity(n);
        // Constant extension below the first sample.
        let mut acc = self.sigma[0] * self.value[0];
        cum.push(acc);
        for i in 0..n - 1 {
            let (a, b) = (self.sigma[i], self.sigma[i + 1]);
            acc += quad::integrate(&|s| self.eval(s), a, b, TABLE_QUAD_REL_TOL, 1e-300)?;
            cum.push(acc);
        }
        self.cumulative = cum;
        Ok(())
    }

    fn segment(&self, sigma: f64) -> usize {
        match self.sigma.binary_search_by(|s| s.partial_cmp(&sigma).unwrap()) {
            Ok(i) => i.min(self.sigma.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.sigma.len() - 2),
        }
    }

    fn eval(&self, sigma: f64) -> f64 {
        let n = self.sigma.len();
        if sigma <= self.sigma[0] {
            return self.value[0];
        }
        if sigma >= self.sigma[n - 1] {
            return self.value[n - 1];
        }
        let i = self.segment(sigma);
        let h = self.sigma[i + 1] - self.sigma[i];
        let t = (sigma - self.sigma[i]) / h;
        hermite(self.value[i], self.slope[i] * h, self.value[i + 1], self.slope[i + 1] * h, t).0
    }

    fn primitive(&self, sigma: f64) -> f64 {
        let n = self.sigma.len();
        if sigma <= self.sigma[0] {
            return sigma * self.value[0];
        }
        if sigma >= self.sigma[n - 1] {
            return self.cumulative[n - 1] + (sigma - self.sigma[n - 1]) * self.value[n - 1];
        }
        let i = self.segment(sigma);
        self.cumulative[i]
            + quad::integrate(&|s| self.eval(s), self.sigma[i], sigma, TABLE_QUAD_REL_TOL, 1e-300)
                .unwrap_or_else(|_| (sigma - self.sigma[i]) * self.eval(sigma))
    }

    fn min_value(&self) -> f64 {
        // The monotone interpolant cannot undershoot its data.
        self.value.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn sup_on(&self, hi: f64) -> f64 {
        let mut sup = f64::NEG_INFINITY;
        for j in 0..=LIPSCHITZ_GRID {
            let s = hi * j as f64 / LIPSCHITZ_GRID as f64;
            sup = sup.max(self.eval(s));
        }
        sup
    }

    fn max_slope_on(&self, hi: f64) -> f64 {
        let mut max = 0.0f64;
        let mut prev = self.eval(0.0);
        for j in 1..=LIPSCHITZ_GRID {
            let s = hi * j as f64 / LIPSCHITZ_GRID as f64;
            let v = self.eval(s);
            max = max.max((v - prev).abs() / (hi / LIPSCHITZ_GRID as f64));
            prev = v;
        }
        max
    }
}

/// Overflow-safe ln(cosh(u)).
fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Cubic Hermite basis evaluation; returns (value, derivative/h).
fn hermite(y0: f64, m0h: f64, y1: f64, m1h: f64, t: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * m0h
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * m1h;
    let d = (6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * m0h
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * m1h;
    (v, d)
}

/// Monotonicity-preserving slopes (Fritsch–Carlson limiter).
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n - 1];
    for i in 0..n - 1 {
        d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    }
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let alpha = m[i] / d[i];
        let beta = m[i + 1] / d[i];
        let r = alpha * alpha + beta * beta;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * alpha * d[i];
            m[i + 1] = tau * beta * d[i];
        }
    }
    m
}
