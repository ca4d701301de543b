//! The frequency ladder: each transition profile rescales to a bridge
//! between the eigenvalues λ^{2k} and λ^{2k+2}. Prints the identity checks
//! and the Gevrey forcing-norm table against the per-k bound.
//!
//! Usage: cargo run --release --example rescaled_bridges [candidate.json]

use std::sync::Arc;

use kirchhoff_lab::bridge::{bridge_forcing_bound, build_bridge, make_cutoff};
use kirchhoff_lab::export::load_candidate;
use kirchhoff_lab::heteroclinic::{search, SearchConfig};
use kirchhoff_lab::nonlinearity::NonlinearityModel;
use kirchhoff_lab::spectral::{fk_gevrey_bound_ln, rescale_bridge, OperatorSpec};

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
    let fb = bridge_forcing_bound(&candidate, &cutoff)?;
    let (r, s) = (1.0, 2.0);

    println!("k,s_k,s1k,s2k,mode_identity_err,a_half_identity_err,sup_f_gevrey_sq_ln,bound_ln");
    for k in 0..=6u32 {
        let s_k = 1.0 / ((k as f64 + 1.0) * (k as f64 + 1.0));
        let scale = op.lambda_k(k);
        let profile = Arc::new(build_bridge(&candidate, scale * s_k, &cutoff)?);
        let rb = rescale_bridge(&profile, k, s_k, &op)?;

        // Beyond ±2S_k the piece is exactly the shifted mode at the scaled
        // frequency.
        let mode_k = candidate.source.rescale(scale);
        let mode_k1 = candidate.source.rescale(scale * op.lambda);
        let mut mode_err = 0.0f64;
        for i in 0..40 {
            let dt = 0.2 + 1.8 * i as f64 / 40.0;
            let u = rb.u(-2.0 * s_k - dt);
            let (z, _) = mode_k.eval(-2.0 * s_k - dt - candidate.fit.tau0 / scale);
            mode_err = mode_err.max((u.coeff(k) - z).abs());
            let u = rb.u(2.0 * s_k + dt);
            let (z, _) = mode_k1.eval(2.0 * s_k + dt - candidate.fit.tau1 / scale);
            mode_err = mode_err.max((u.coeff(k + 1) - z).abs());
        }

        // |A^{1/2}u_k|² computed spectrally equals v_S² + λ²w_S².
        let mut norm_err = 0.0f64;
        for i in 0..=80 {
            let t = -2.4 * s_k + 4.8 * s_k * i as f64 / 80.0;
            let p = profile.profile(scale * t);
            let direct = p.v * p.v + op.lambda * op.lambda * p.w * p.w;
            norm_err = norm_err.max((rb.a_half_u_norm_sq(t) - direct).abs());
        }

        let sup_ln = rb.sup_f_gevrey_sq_ln(r, s, 600);
        let bound_ln = fk_gevrey_bound_ln(k, s_k, &op, r, s, fb.a2, fb.b2);
        println!(
            "{k},{s_k:.6},{:.9},{:.9},{mode_err:.3e},{norm_err:.3e},{sup_ln:.4},{bound_ln:.4}",
            rb.s1k(),
            rb.s2k()
        );
    }
    println!("\n(A₂ = {:.4}, B₂ = {:.4e}; norms in the log domain)", fb.a2, fb.b2);
    Ok(())
}
