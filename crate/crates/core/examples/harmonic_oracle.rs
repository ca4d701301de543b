//! Everything has a closed form when the stiffness is constant: the mode is
//! a sine, the period is 2π/√c, resonant forcing grows linearly. This
//! example replays those oracles against the numerical pipeline.
//!
//! Usage: cargo run --release --example harmonic_oracle

use kirchhoff_lab::dynamics::{self, IntegratorConfig, PhaseState};
use kirchhoff_lab::nonlinearity::NonlinearityModel;
use kirchhoff_lab::simple_modes::{mode_period, SimpleMode};

fn main() -> anyhow::Result<()> {
    let model = NonlinearityModel::constant(1.0)?;
    let cfg = IntegratorConfig::default();

    let p = mode_period(&model, 1.0)?;
    println!("π₁ = {p:.15}  (2π = {:.15})", 2.0 * std::f64::consts::PI);

    let traj =
        dynamics::integrate(&model, 2.0, PhaseState::new(0.0, 1.0, 0.0, 0.0), (0.0, 10.0), &cfg)?;
    let mut worst = 0.0f64;
    for (t, s) in traj.sample(1000) {
        worst = worst.max((s.v - t.sin()).abs());
    }
    println!("max |v − sin t| over [0, 10]: {worst:.3e} ({} steps)", traj.stats.accepted);

    let forced = dynamics::forced_integrate(
        &model,
        1.0,
        PhaseState::new(0.0, 0.0, 0.0, 0.0),
        |t| (t.sin(), 0.0),
        (0.0, 5.0),
        &cfg,
    )?;
    let mut worst = 0.0f64;
    for (t, s) in forced.sample(500) {
        worst = worst.max((s.v - 0.5 * (t.sin() - t * t.cos())).abs());
    }
    println!("resonant forcing vs (sin t − t cos t)/2: {worst:.3e}");

    let mode = SimpleMode::new(&model, 1.0, 2.0)?;
    let (z, dz) = mode.eval(std::f64::consts::FRAC_PI_4);
    println!("z₂(π/4) = {z:.12} (want 0.5), z₂'(π/4) = {dz:.3e} (want 0)");
    Ok(())
}
