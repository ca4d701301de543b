//! The generalized-weight schedule: enlarging S_k to
//! max{(2/A₂)·φ(λ^{2k+2})/λ^k, 1/(k+1)²} pushes the forcing into the class
//! with weight φ, as long as φ keeps ∫ φ(σ)/σ² finite. The construction
//! verifies both gates numerically and rejects weights at the
//! quasi-analytic boundary.
//!
//! Usage: cargo run --release --example weighted_schedule [candidate.json]

use std::sync::Arc;

use kirchhoff_lab::blowup::{assemble, forcing_profile, junction_check, make_schedule, NormSpec, ScheduleRule};
use kirchhoff_lab::bridge::make_cutoff;
use kirchhoff_lab::export::load_candidate;
use kirchhoff_lab::heteroclinic::{search, SearchConfig};
use kirchhoff_lab::nonlinearity::NonlinearityModel;
use kirchhoff_lab::spectral::{OperatorSpec, WeightFunction};

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "candidate.json".into());
    let candidate = if std::path::Path::new(&path).exists() {
        load_candidate(&path)?.0
    } else {
        eprintln!("{path} not found; running the search");
        let model = NonlinearityModel::plateau(8.0, 0.3, 0.08, 0.03)?;
        Arc::new(
            search(&model, 0.9, 2.0, &SearchConfig::default())?
                .candidate
                .expect("search finds the plateau connection"),
        )
    };
    let op = OperatorSpec::new(candidate.lambda)?;
    let cutoff = make_cutoff();

    // A valid weight below the quasi-analytic threshold.
    let phi = WeightFunction::gevrey(1.0, 2.0);
    phi.validate()?;
    let rule = ScheduleRule::Weighted(phi.clone());
    let sched = make_schedule(&candidate, &op, 8, &rule, 1.0)?;
    println!("weighted rule accepted: {}", sched.rule);
    println!("k,S_k(weighted),S_k(default),T_k");
    for e in &sched.entries {
        let default = 1.0 / ((e.k as f64 + 1.0) * (e.k as f64 + 1.0));
        println!("{},{:.9},{default:.9},{:.9}", e.k, e.s_k, e.t_start);
    }
    println!("T_end = {:.9}, T_∞ <= {:.9}", sched.t_end, sched.t_infinity);

    let glued = assemble(&candidate, &sched, &cutoff)?;
    let report = junction_check(&glued, 1e-9);
    println!("junctions: {}", if report.pass { "pass" } else { "FAIL" });
    let p = forcing_profile(&glued, &NormSpec::Weighted(phi));
    println!(
        "weighted-norm forcing sup (ln): {:?}",
        p.sup_sq_ln.iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>()
    );

    // Shrinking every S_k shortens T_∞ but raises the forcing; the inverse
    // trade (larger multiplier) makes the force as small as desired.
    for mult in [0.5, 1.0, 2.0, 4.0] {
        let s = make_schedule(&candidate, &op, 8, &ScheduleRule::Default, mult)?;
        let g = assemble(&candidate, &s, &cutoff)?;
        let p = forcing_profile(&g, &NormSpec::Plain);
        let peak = p.sup_sq_ln.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "multiplier {mult}: T_∞ <= {:.6}, peak plain forcing ln = {peak:.3}",
            s.t_infinity
        );
    }

    // Weights with a divergent ∫ φ/σ² are the quasi-analytic regime where
    // global existence is known; the rule must refuse them.
    let bad = ScheduleRule::Weighted(WeightFunction::from_fn("sigma/log", |s| {
        s / (1.0 + s.ln().max(0.0))
    }));
    match make_schedule(&candidate, &op, 8, &bad, 1.0) {
        Err(e) => println!("quasi-analytic weight rejected as required: {e}"),
        Ok(_) => println!("UNEXPECTED: quasi-analytic weight accepted"),
    }
    Ok(())
}
