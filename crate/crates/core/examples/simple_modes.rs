//! Builds both limiting simple modes of the default plateau model, checks
//! the energy equality along them, and reports the transverse Floquet
//! multipliers that decide whether a connection can exist.
//!
//! Usage: cargo run --release --example simple_modes [> modes.csv]

use kirchhoff_lab::nonlinearity::NonlinearityModel;
use kirchhoff_lab::simple_modes::{source_monodromy, target_monodromy, SimpleMode};

fn main() -> anyhow::Result<()> {
    let model = NonlinearityModel::plateau(8.0, 0.3, 0.08, 0.03)?;
    let (h0, lambda) = (0.9, 2.0);
    let base = SimpleMode::new(&model, h0, 1.0)?;
    let target = base.rescale(lambda);

    eprintln!("model: {model}");
    eprintln!("π₁ = {:.12}, π_λ = {:.12}", base.base_period(), target.period());
    eprintln!("amplitudes: z₁ max = {:.6}, z_λ max = {:.6}", base.amplitude(), target.amplitude());

    let ms = source_monodromy(&base, lambda)?;
    let mt = target_monodromy(&base, lambda)?;
    eprintln!(
        "source transverse multipliers: {:.6} / {:.6} (unstable: {})",
        ms.multipliers.0, ms.multipliers.1, ms.is_unstable()
    );
    eprintln!(
        "target transverse multipliers: {:.6} / {:.6} (unstable: {})",
        mt.multipliers.0, mt.multipliers.1, mt.is_unstable()
    );
    let mu_s = ms.max_abs_multiplier().ln() / base.base_period();
    let mu_t = mt.max_abs_multiplier().ln() / target.period();
    eprintln!("growth rates per unit time: μ_source = {mu_s:.4}, μ_target = {mu_t:.4}");

    println!("t,z1,dz1,z_lambda,dz_lambda,energy_residual_1,energy_residual_lambda");
    for i in 0..=1000 {
        let t = 2.0 * base.base_period() * i as f64 / 1000.0;
        let (z1, dz1) = base.eval(t);
        let (zl, dzl) = target.eval(t);
        println!(
            "{t:.9},{z1:.12},{dz1:.12},{zl:.12},{dzl:.12},{:.3e},{:.3e}",
            base.energy_residual(t),
            target.energy_residual(t)
        );
    }
    Ok(())
}
