//! Adaptive Gauss–Kronrod quadrature (15-point Kronrod, embedded 7-point Gauss).

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1] side of the symmetric rule (index 0 is the origin).
const XGK: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_2,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_4,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_813,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.209_482_141_084_728,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_2,
    0.104_790_010_322_250_18,
    0.063_092_092_629_979,
    0.022_935_322_010_529_225,
];

/// Weights of the embedded 7-point Gauss rule (at XGK indices 0, 2, 4, 6).
const WG: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_119,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// One Kronrod panel on [a, b]; returns (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);

    let f0 = f(c);
    let mut kronrod = WGK[0] * f0;
    let mut gauss = WG[0] * f0;
    for j in 1..8 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 0 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= h;
    gauss *= h;
    (kronrod, (kronrod - gauss).abs())
}

/// Integrate `f` over [a, b] by adaptive bisection of GK15 panels.
///
/// Stops refining a panel once its error estimate is below the panel's share
/// of `abs_tol + rel_tol * |whole|`. Errors out if the recursion exhausts its
/// depth budget without converging.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = gk15(f, a, b);
    let budget = abs_tol.max(rel_tol * whole.abs());
    if err <= budget {
        return Ok(whole);
    }
    let mut total = 0.0;
    adaptive(f, a, b, whole, budget, 0, &mut total)?;
    Ok(total)
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    budget: f64,
    depth: u32,
    total: &mut f64,
) -> Result<()> {
    if depth > 60 {
        return Err(Error::numerical(format!(
            "quadrature did not converge on [{a:.6e}, {b:.6e}] (depth 60 exceeded)"
        )));
    }
    let c = 0.5 * (a + b);
    let (left, err_l) = gk15(f, a, c);
    let (right, err_r) = gk15(f, c, b);
    // Local budget scales with the panel fraction of the original interval.
    let local = budget * 0.5f64.powi(depth as i32 + 1);
    if err_l <= local || !left.is_finite() {
        if !left.is_finite() {
            return Err(Error::numerical("non-finite quadrature panel".to_string()));
        }
        *total += left;
    } else {
        adaptive(f, a, c, left, budget, depth + 1, total)?;
    }
    if err_r <= local || !right.is_finite() {
        if !right.is_finite() {
            return Err(Error::numerical("non-finite quadrature panel".to_string()));
        }
        *total += right;
    } else {
        adaptive(f, c, b, right, budget, depth + 1, total)?;
    }
    let _ = whole;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let f = |x: f64| 3.0 * x * x;
        let v = integrate(&f, 0.0, 2.0, 1e-14, 1e-15).unwrap();
        assert!((v - 8.0).abs() < 1e-13, "got {v}");
    }

    #[test]
    fn oscillatory_integrand() {
        let f = |x: f64| (10.0 * x).sin();
        let v = integrate(&f, 0.0, std::f64::consts::PI, 1e-13, 1e-14).unwrap();
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-12, "got {v}, want {exact}");
    }

    #[test]
    fn near_singular_endpoint() {
        // sqrt has unbounded derivative at 0; adaptivity must dig in.
        let f = |x: f64| x.sqrt();
        let v = integrate(&f, 0.0, 1.0, 1e-12, 1e-14).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10, "got {v}");
    }
}
