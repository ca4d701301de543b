//! Scans the (λ, H₀) plane for transverse instability of both limiting
//! simple modes. A connection between the modes needs hyperbolicity on both
//! sides: the first mode must have an unstable direction to leave along,
//! the second a stable direction to arrive along.
//!
//! Usage:
//!   cargo run --release --example floquet_scan            # plateau family
//!   cargo run --release --example floquet_scan affine a b
//!   cargo run --release --example floquet_scan plateau m_hi m_lo sigma_c width
//!
//! For the affine family the target column stays at 1.0 throughout the
//! scanned region — the low-frequency transverse direction around the high
//! mode is elliptic — which is exactly why the plateau family exists.

use std::sync::Arc;

use kirchhoff_lab::nonlinearity::NonlinearityModel;
use kirchhoff_lab::simple_modes::{source_monodromy, target_monodromy, SimpleMode};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p = |i: usize, d: f64| -> f64 { args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d) };
    let model: Arc<NonlinearityModel> = match args.first().map(String::as_str) {
        None | Some("plateau") => {
            NonlinearityModel::plateau(p(1, 8.0), p(2, 0.3), p(3, 0.08), p(4, 0.03))?
        }
        Some("affine") => NonlinearityModel::affine(p(1, 1.0), p(2, 5.0))?,
        Some(other) => anyhow::bail!("unknown family {other:?} (use plateau or affine)"),
    };
    eprintln!("scanning {model}");

    println!("lambda,h0,pi1,mult_source,mult_target,rate_source,rate_target,both_unstable");
    for i in 0..=12 {
        let h0 = 0.5 + 1.0 * i as f64 / 12.0;
        let base = SimpleMode::new(&model, h0, 1.0)?;
        let pi1 = base.base_period();
        for j in 0..=30 {
            let lambda = 1.1 + 1.9 * j as f64 / 30.0;
            let ms = source_monodromy(&base, lambda)?;
            let mt = target_monodromy(&base, lambda)?;
            let (s, t) = (ms.max_abs_multiplier(), mt.max_abs_multiplier());
            // Per-unit-time growth rates of the transverse deviations.
            let rate_s = s.ln() / pi1;
            let rate_t = t.ln() / (pi1 / lambda);
            println!(
                "{lambda:.4},{h0:.4},{pi1:.6},{s:.6},{t:.6},{rate_s:.6},{rate_t:.6},{}",
                ms.is_unstable() && mt.is_unstable()
            );
        }
    }
    Ok(())
}
