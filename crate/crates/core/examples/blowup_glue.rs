//! The full construction: glue the rescaled transitions over the default
//! schedule S_k = 1/(k+1)². The solution passes exactly through (0, H₀e_k)
//! at time T_k, the times converge to a finite T_∞, and |A^α u'(T_k)|² walks
//! the exact ladder H₀²λ^{4kα} while the energy norm stays bounded — blow-up
//! of every higher-order norm in finite time.
//!
//! Usage: cargo run --release --example blowup_glue [candidate.json]

use std::sync::Arc;

use kirchhoff_lab::blowup::{
    assemble, blowup_diagnostics, forcing_profile, junction_check, make_schedule, NormSpec,
    ScheduleRule,
};
use kirchhoff_lab::bridge::make_cutoff;
use kirchhoff_lab::export::load_candidate;
use kirchhoff_lab::heteroclinic::{search, SearchConfig};
use kirchhoff_lab::nonlinearity::NonlinearityModel;
use kirchhoff_lab::spectral::OperatorSpec;

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
    let k_max = 12;
    let schedule = make_schedule(&candidate, &op, k_max, &ScheduleRule::Default, 1.0)?;
    println!(
        "schedule: K_max = {k_max}, T_end = {:.12}, T_∞ ∈ [T_end, {:.12}]",
        schedule.t_end, schedule.t_infinity
    );
    println!("k,S_k,S_1k,S_2k,T_k");
    for e in &schedule.entries {
        println!("{},{:.9},{:.9},{:.9},{:.9}", e.k, e.s_k, e.s1k, e.s2k, e.t_start);
    }

    let cutoff = make_cutoff();
    let glued = assemble(&candidate, &schedule, &cutoff)?;

    let report = junction_check(&glued, 1e-9);
    println!(
        "\njunctions: u jump {:.2e}, u' jump {:.2e}, |u''| {:.2e}, law error {:.2e} -> {}",
        report.u_jump,
        report.du_jump,
        report.ddu_max,
        report.law_err,
        if report.pass { "pass" } else { "FAIL" }
    );

    let d = blowup_diagnostics(&glued, 0.5, &[]);
    println!("\nblow-up ladder at α = 1/2 (junction values |A^α u'(T_k)|²):");
    for (k, v) in &d.junction_values {
        println!("  k = {k:2}: {v:.1}");
    }
    println!("consecutive junction velocity inner products: {:?}", d.consecutive_inner_products);

    for (r, s) in [(1.0, 2.0), (1.0, 1.0)] {
        let p = forcing_profile(&glued, &NormSpec::Gevrey { r, s });
        println!(
            "\nforcing sup ‖f‖² in Gevrey(r={r}, s={s}), ln per interval:\n  measured: {:?}\n  bound:    {:?}\n  decay verdict: {}, bound curve {}",
            p.sup_sq_ln.iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>(),
            p.bound_sq_ln.iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>(),
            if p.decay_pass { "pass" } else { "fail" },
            if p.bound_diverges { "diverges" } else { "bounded" },
        );
    }
    println!(
        "\n(The Gevrey(1,2) series still grows over k <= 12: the weight exp(√λ^(k+1)) \
         outruns exp(−A₂λ^k S_k) until k ≈ 21, far beyond what a double-precision \
         trajectory can span. The junction ladder above is exact regardless.)"
    );
    Ok(())
}
