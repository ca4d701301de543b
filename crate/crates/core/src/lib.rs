// Validation guards are written as `!(x > 0.0)` so that NaN inputs fail
// them; the positive comparison clippy suggests would accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for two-mode Kirchhoff systems.
//!
//! The pipeline goes from a nonlinear stiffness m and an energy level H₀ to:
//! periodic one-component solutions (simple modes) and their Floquet
//! stability; numerically sought trajectories connecting two simple modes of
//! different frequency; cutoff-blended transition profiles that switch
//! between the modes over a finite window under an explicit small forcing;
//! spectral rescalings of those transitions to higher frequencies; and a
//! glued solution whose higher-order norms grow without bound in finite time
//! while the forcing stays bounded.

pub mod blowup;
pub mod bridge;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod heteroclinic;
pub mod nonlinearity;
pub mod quad;
pub mod simple_modes;
pub mod spectral;

pub use error::{Error, Result};
pub use nonlinearity::{EffectiveBounds, NonlinearityModel};

#[cfg(test)]
pub(crate) mod testkit {
    use std::sync::Arc;

    use once_cell::sync::Lazy;

    use crate::heteroclinic::{AssemblyInfo, HeteroclinicCandidate};
    use crate::nonlinearity::NonlinearityModel;

    pub fn plateau_model() -> Arc<NonlinearityModel> {
        NonlinearityModel::plateau(8.0, 0.3, 0.08, 0.03).unwrap()
    }

    pub const H0: f64 = 0.9;
    pub const LAMBDA: f64 = 2.0;

    /// Assembly data produced by the default search on the plateau model;
    /// rebuilding from it is deterministic and much cheaper than searching.
    pub fn frozen_assembly() -> AssemblyInfo {
        AssemblyInfo {
            phase0: 1.5229707986254477,
            eps0: -8.395859139189812e-7,
            t_minus: -56.0,
            phase1: 1.59438028636772,
            eps1: 1.23574252103854e-10,
            t_plus: 43.0,
            blend_halfwidth: 0.75,
            shift: -0.01726542276628859,
            rel_tol: 1e-11,
        }
    }

    pub static CANDIDATE: Lazy<Arc<HeteroclinicCandidate>> = Lazy::new(|| {
        let model = plateau_model();
        Arc::new(
            HeteroclinicCandidate::from_assembly(&model, H0, LAMBDA, frozen_assembly())
                .expect("fixture candidate rebuilds"),
        )
    });
}
