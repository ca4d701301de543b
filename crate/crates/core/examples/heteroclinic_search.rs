//! Full connection search on the plateau model: forward shooting over
//! (phase, ε), stable-manifold-conditioned assembly, tail fits, and
//! verification. Writes the candidate file consumed by the bridge and glue
//! examples.
//!
//! Usage: cargo run --release --example heteroclinic_search [candidate.json]

use kirchhoff_lab::export::save_candidate;
use kirchhoff_lab::heteroclinic::{search, verify_candidate, SearchConfig};
use kirchhoff_lab::nonlinearity::NonlinearityModel;

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "candidate.json".into());
    let model = NonlinearityModel::plateau(8.0, 0.3, 0.08, 0.03)?;
    let config = SearchConfig::default();

    let t0 = std::time::Instant::now();
    let out = search(&model, 0.9, 2.0, &config)?;
    println!(
        "search: best shooting defect {:.3e} at phase {:.6}, ε = {:.3e} ({} evaluations, {:?})",
        out.best_defect,
        out.best_phase,
        out.best_eps,
        out.evaluations,
        t0.elapsed()
    );
    for n in &out.notes {
        println!("note: {n}");
    }

    let Some(candidate) = out.candidate else {
        println!("no connection below δ = {:.1e}; nothing written", config.delta_accept);
        return Ok(());
    };

    println!(
        "candidate: tail defect {:.3e}, arc mismatch {:.3e}, span {:?}",
        candidate.defect,
        candidate.trajectory.matching_mismatch(),
        candidate.span()
    );
    let fit = &candidate.fit;
    println!("phases: τ₀ = {:.9}, τ₁ = {:.9}", fit.tau0, fit.tau1);
    println!("decay:  A₀ = {:.4} (B₀ = {:.3}), A₁ = {:.4} (B₁ = {:.3})", fit.a0, fit.b0, fit.a1, fit.b1);
    for s in &fit.series {
        println!(
            "  tail {}: rate {:.4}, envelope windows {}, log-fit rms {:.2}",
            s.name, s.rate, s.windows, s.residual
        );
    }

    let report = verify_candidate(&candidate, 1e-6);
    println!(
        "verify: residual {:.2e}, decay margins {:.2e}/{:.2e}, H drift {:.2e} -> {}",
        report.residual_max,
        report.decay_margin_plain,
        report.decay_margin_deviation,
        report.hamiltonian_drift,
        if report.pass { "pass" } else { "FAIL" }
    );

    save_candidate(&path, &candidate, 0.25)?;
    println!("candidate written to {path}");
    Ok(())
}
