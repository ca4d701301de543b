//! Finite spectral vectors on the eigenbasis {e_k} with A e_k = λ^{2k} e_k,
//! exponentially weighted (Gevrey and generalized) norms computed in the log
//! domain, and the rescaling that turns a transition profile between the
//! frequencies 1 and λ² into one between λ^{2k} and λ^{2k+2}.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bridge::BridgeProfile;
use crate::error::{Error, Result};
use crate::quad;

/// Sparse vector with finitely many nonzero coefficients on {e_k}.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectralVector {
    coeffs: BTreeMap<u32, f64>,
}

impl SpectralVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(k: u32) -> Self {
        Self::from_pairs([(k, 1.0)])
    }

    pub fn from_pairs<I: IntoIterator<Item = (u32, f64)>>(pairs: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in pairs {
            if c != 0.0 {
                coeffs.insert(k, c);
            }
        }
        Self { coeffs }
    }

    pub fn coeff(&self, k: u32) -> f64 {
        self.coeffs.get(&k).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Plain Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c * other.coeff(*k))
            .sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            let v = out.coeffs.entry(k).or_insert(0.0);
            *v -= c;
            if *v == 0.0 {
                out.coeffs.remove(&k);
            }
        }
        out
    }
}

impl Serialize for SpectralVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for (k, c) in &self.coeffs {
            seq.serialize_element(&(*k, *c))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SpectralVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = SpectralVector;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a sequence of (index, coefficient) pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some(p) = seq.next_element::<(u32, f64)>()? {
                    pairs.push(p);
                }
                Ok(SpectralVector::from_pairs(pairs))
            }
        }
        deserializer.deserialize_seq(V)
    }
}

/// The operator A with eigenvalues λ^{2k} on {e_k} (so λ_k = λ^k).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub lambda: f64,
}

impl OperatorSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::domain(format!("operator scale must satisfy λ > 1, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    /// λ_k = λ^k.
    pub fn lambda_k(&self, k: u32) -> f64 {
        (k as f64 * self.lambda.log2()).exp2()
    }
}

/// A^α: the coefficient at k is multiplied by λ^{2kα}. Computed through
/// exp2, so powers compose exactly whenever the binary exponents are exact
/// (for instance λ = 2 with dyadic α·k).
pub fn apply_a_power(vec: &SpectralVector, op: &OperatorSpec, alpha: f64) -> SpectralVector {
    SpectralVector::from_pairs(
        vec.iter()
            .map(|(k, c)| (k, c * (2.0 * k as f64 * alpha * op.lambda.log2()).exp2())),
    )
}

/// ln of Σ c_k² exp(r·λ_k^{1/s}); −∞ for the zero vector.
pub fn gevrey_norm_sq_ln(vec: &SpectralVector, op: &OperatorSpec, r: f64, s: f64) -> f64 {
    log_sum_exp(vec.iter().map(|(k, c)| {
        let weight = r * op.lambda_k(k).powf(1.0 / s);
        ln_sq(c) + weight
    }))
}

/// The Gevrey norm sqrt(Σ c_k² exp(r·λ_k^{1/s})); +∞ when the weighted sum
/// overflows the representable range.
pub fn gevrey_norm(vec: &SpectralVector, op: &OperatorSpec, r: f64, s: f64) -> f64 {
    (0.5 * gevrey_norm_sq_ln(vec, op, r, s)).exp()
}

/// ln of Σ c_k² exp(φ(λ^{2k})) for a generalized weight.
pub fn weighted_norm_sq_ln(vec: &SpectralVector, op: &OperatorSpec, phi: &WeightFunction) -> f64 {
    log_sum_exp(vec.iter().map(|(k, c)| {
        let sigma = op.lambda_k(k);
        ln_sq(c) + phi.eval(sigma * sigma)
    }))
}

pub fn weighted_norm(vec: &SpectralVector, op: &OperatorSpec, phi: &WeightFunction) -> f64 {
    (0.5 * weighted_norm_sq_ln(vec, op, phi)).exp()
}

fn ln_sq(c: f64) -> f64 {
    if c == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * c.abs().ln()
    }
}

fn log_sum_exp<I: Iterator<Item = f64>>(terms: I) -> f64 {
    let v: Vec<f64> = terms.filter(|t| *t > f64::NEG_INFINITY).collect();
    if v.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Increasing weight φ: [1, ∞) → [0, ∞) defining a generalized spectral
/// class through the norm Σ c_k² exp(φ(λ^{2k})).
#[derive(Clone)]
pub struct WeightFunction {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WeightFunction({})", self.label)
    }
}

impl WeightFunction {
    /// φ(σ) = r·σ^{1/(2s)}, which reproduces the Gevrey weight since
    /// λ_k = σ^{1/2}.
    pub fn gevrey(r: f64, s: f64) -> Self {
        Self {
            label: format!("gevrey(r={r}, s={s})"),
            f: Arc::new(move |sigma| r * sigma.powf(1.0 / (2.0 * s))),
        }
    }

    pub fn zero() -> Self {
        Self { label: "zero".into(), f: Arc::new(|_| 0.0) }
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(label: &str, f: F) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        (self.f)(sigma.max(1.0))
    }

    /// Checks the class conditions on a geometric grid: φ increasing,
    /// φ(σ)/σ² nonincreasing, and a summable tail of ∫ φ(σ)/σ² dσ (the
    /// partial sums over decades must be Cauchy within 1e-6).
    pub fn validate(&self) -> Result<()> {
        let mut prev = self.eval(1.0);
        let mut prev_ratio = f64::INFINITY;
        for i in 1..=240 {
            let sigma = 10f64.powf(i as f64 / 20.0);
            let v = self.eval(sigma);
            if v < prev - 1e-12 * (1.0 + prev.abs()) {
                return Err(Error::domain(format!(
                    "weight {} is not increasing near σ = {sigma:.3e}",
                    self.label
                )));
            }
            let ratio = v / (sigma * sigma);
            if ratio > prev_ratio * (1.0 + 1e-12) {
                return Err(Error::domain(format!(
                    "weight {}: φ(σ)/σ² increases near σ = {sigma:.3e}",
                    self.label
                )));
            }
            prev = v;
            prev_ratio = ratio;
        }
        // Tail of the defining integral over the last computed decades;
        // decade-wise panels keep the integrand well scaled.
        let integrand = |sigma: f64| self.eval(sigma) / (sigma * sigma);
        let mut head = 0.0;
        for j in 0..10 {
            let (lo, hi) = (10f64.powi(j), 10f64.powi(j + 1));
            head += quad::integrate(&integrand, lo, hi, 1e-9, 1e-12).map_err(|e| {
                Error::domain(format!("weight {}: ∫ φ(σ)/σ² did not converge: {e}", self.label))
            })?;
        }
        let mut tail = 0.0;
        for j in 10..13 {
            let (lo, hi) = (10f64.powi(j), 10f64.powi(j + 1));
            tail += quad::gk15(&integrand, lo, hi).0;
        }
        if !(tail <= 1e-6 * (1.0 + head)) {
            return Err(Error::domain(format!(
                "weight {}: tail of ∫ φ(σ)/σ² over [1e10, 1e13] is {tail:.3e}, not Cauchy at 1e-6",
                self.label
            )));
        }
        Ok(())
    }
}

/// A transition profile rescaled to connect the modes at frequencies λ^{2k}
/// and λ^{2k+2}: u_k(t) = λ^{−k}[v_S(λ^k t) e_k + w_S(λ^k t) e_{k+1}] with
/// forcing f_k(t) = λ^k[φ_S(λ^k t) e_k + ψ_S(λ^k t) e_{k+1}], where the
/// underlying profile was built at half-scale S = λ^k S_k.
#[derive(Clone)]
pub struct RescaledBridge {
    profile: Arc<BridgeProfile>,
    op: OperatorSpec,
    k: u32,
    s_k: f64,
    s1k: f64,
    s2k: f64,
}

impl RescaledBridge {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn s_k(&self) -> f64 {
        self.s_k
    }

    /// Left anchor: u_k(−S_{1,k}) = 0, u_k'(−S_{1,k}) = H₀ e_k.
    pub fn s1k(&self) -> f64 {
        self.s1k
    }

    /// Right anchor: u_k(S_{2,k}) = 0, u_k'(S_{2,k}) = H₀ e_{k+1}.
    pub fn s2k(&self) -> f64 {
        self.s2k
    }

    pub fn profile(&self) -> &Arc<BridgeProfile> {
        &self.profile
    }

    fn scale(&self) -> f64 {
        self.op.lambda_k(self.k)
    }

    pub fn u(&self, t: f64) -> SpectralVector {
        let scale = self.scale();
        let p = self.profile.profile(scale * t);
        SpectralVector::from_pairs([(self.k, p.v / scale), (self.k + 1, p.w / scale)])
    }

    pub fn u_prime(&self, t: f64) -> SpectralVector {
        let scale = self.scale();
        let p = self.profile.profile(scale * t);
        SpectralVector::from_pairs([(self.k, p.dv), (self.k + 1, p.dw)])
    }

    pub fn f(&self, t: f64) -> SpectralVector {
        let scale = self.scale();
        let (phi, psi) = self.profile.forcing(scale * t);
        SpectralVector::from_pairs([(self.k, scale * phi), (self.k + 1, scale * psi)])
    }

    /// |A^{1/2} u_k(t)|² evaluated spectrally.
    pub fn a_half_u_norm_sq(&self, t: f64) -> f64 {
        let u = self.u(t);
        apply_a_power(&u, &self.op, 0.5).iter().map(|(_, c)| c * c).sum()
    }

    /// sup over a dense grid of the squared Gevrey norm of f_k, in the log
    /// domain.
    pub fn sup_f_gevrey_sq_ln(&self, r: f64, s: f64, samples_per_side: usize) -> f64 {
        let mut sup = f64::NEG_INFINITY;
        for side in [-1.0, 1.0] {
            for i in 0..=samples_per_side {
                let t = side * (self.s_k + self.s_k * i as f64 / samples_per_side as f64);
                sup = sup.max(gevrey_norm_sq_ln(&self.f(t), &self.op, r, s));
            }
        }
        sup
    }
}

/// Rescales a profile built at half-scale S = λ^k S_k. Errors when the
/// profile's scale does not match.
pub fn rescale_bridge(
    profile: &Arc<BridgeProfile>,
    k: u32,
    s_k: f64,
    op: &OperatorSpec,
) -> Result<RescaledBridge> {
    let scale = op.lambda_k(k);
    let want = scale * s_k;
    if (profile.s() - want).abs() > 1e-9 * want.max(1.0) {
        return Err(Error::domain(format!(
            "profile half-scale {} does not match λ^k·S_k = {want}",
            profile.s()
        )));
    }
    Ok(RescaledBridge {
        profile: Arc::clone(profile),
        op: *op,
        k,
        s_k,
        s1k: profile.s1() / scale,
        s2k: profile.s2() / scale,
    })
}

/// ln of the forcing-norm bound
/// (λ^{−k} S_k^{−2} + λ^k)²·B₂·exp(r·λ^{(k+1)/s} − A₂·λ^k·S_k).
pub fn fk_gevrey_bound_ln(
    k: u32,
    s_k: f64,
    op: &OperatorSpec,
    r: f64,
    s: f64,
    a2: f64,
    b2: f64,
) -> f64 {
    let lk = op.lambda_k(k);
    let prefactor = 1.0 / (lk * s_k * s_k) + lk;
    2.0 * prefactor.ln() + b2.ln() + r * op.lambda_k(k + 1).powf(1.0 / s) - a2 * lk * s_k
}

/// Linear-domain version; +∞ on overflow.
pub fn fk_gevrey_bound(k: u32, s_k: f64, op: &OperatorSpec, r: f64, s: f64, a2: f64, b2: f64) -> f64 {
    fk_gevrey_bound_ln(k, s_k, op, r, s, a2, b2).exp()
}
