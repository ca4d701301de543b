//! Deterministic data export: CSV with 17 significant digits and '.'
//! decimals, JSON through serde, and the candidate file that carries a
//! connection between runs (and between users: hand-crafted sample files
//! are accepted too).

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::heteroclinic::{AssemblyInfo, ConnectionTrajectory, HeteroclinicCandidate};
use crate::nonlinearity::{Family, NonlinearityModel};

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                write!(out, ",")?;
            }
            write!(out, "{}", fmt_g17(v))?;
            first = false;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_json<P: AsRef<Path>, T: Serialize>(path: P, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("json encode: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<P: AsRef<Path>, T: for<'de> Deserialize<'de>>(path: P) -> Result<T> {
    let text = std::fs::read_to_string(&path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))
}

/// Trajectory export: t, v, v', w, w', hamiltonian.
pub fn trajectory_csv<P: AsRef<Path>>(
    path: P,
    model: &NonlinearityModel,
    lambda: f64,
    trajectory: &Trajectory,
    samples: usize,
) -> Result<()> {
    let rows = trajectory.sample(samples).into_iter().map(|(t, s)| {
        vec![t, s.v, s.dv, s.w, s.dw, dynamics::hamiltonian(model, lambda, &s)]
    });
    write_csv(path, &["t", "v", "dv", "w", "dw", "hamiltonian"], rows)
}

/// Serializable description of a stiffness model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    /// Samples for the tabulated family.
    #[serde(default)]
    pub table: Option<Vec<(f64, f64)>>,
}

impl ModelSpec {
    pub fn of(model: &NonlinearityModel) -> Self {
        match model.family() {
            Family::Constant { c } => Self { family: "constant".into(), params: vec![*c], table: None },
            Family::Affine { a, b } => {
                Self { family: "affine".into(), params: vec![*a, *b], table: None }
            }
            Family::Pohozaev { a, b } => {
                Self { family: "pohozaev".into(), params: vec![*a, *b], table: None }
            }
            Family::Plateau { m_hi, m_lo, sigma_c, width } => Self {
                family: "plateau".into(),
                params: vec![*m_hi, *m_lo, *sigma_c, *width],
                table: None,
            },
            Family::Tabulated(_) => Self {
                family: "tabulated".into(),
                params: Vec::new(),
                // Re-sample the interpolant densely enough to rebuild it.
                table: Some(
                    (0..=4000)
                        .map(|i| {
                            let sigma = 10.0 * i as f64 / 4000.0;
                            (sigma, model.m_raw(sigma))
                        })
                        .collect(),
                ),
            },
        }
    }

    pub fn build(&self) -> Result<Arc<NonlinearityModel>> {
        match self.family.as_str() {
            "constant" => NonlinearityModel::constant(self.params[0]),
            "affine" => NonlinearityModel::affine(self.params[0], self.params[1]),
            "pohozaev" => NonlinearityModel::pohozaev(self.params[0], self.params[1]),
            "plateau" => NonlinearityModel::plateau(
                self.params[0],
                self.params[1],
                self.params[2],
                self.params[3],
            ),
            "tabulated" => NonlinearityModel::tabulated(
                self.table
                    .clone()
                    .ok_or_else(|| Error::Parse("tabulated model without table samples".into()))?,
            ),
            other => Err(Error::Parse(format!("unknown model family {other:?}"))),
        }
    }
}

/// On-disk schema of a connection candidate.
///
/// `assembly` allows a bit-deterministic rebuild; hand-crafted files may
/// omit it and supply only `samples` (t, v, v', w, w' at fixed dt), from
/// which the trajectory is re-integrated and cross-checked.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateFile {
    pub model: ModelSpec,
    pub h0: f64,
    pub lambda: f64,
    #[serde(default)]
    pub assembly: Option<AssemblyInfo>,
    pub span: (f64, f64),
    pub tau0: f64,
    pub tau1: f64,
    pub a0: f64,
    pub b0: f64,
    pub a1: f64,
    pub b1: f64,
    pub defect: f64,
    pub dt: f64,
    pub samples: Vec<[f64; 5]>,
}

impl CandidateFile {
    pub fn of(candidate: &HeteroclinicCandidate, dt: f64) -> Self {
        let (lo, hi) = candidate.span();
        let n = ((hi - lo) / dt).floor() as usize;
        let samples = (0..=n)
            .map(|i| {
                let t = lo + i as f64 * dt;
                let s = candidate.eval(t);
                [t, s.v, s.dv, s.w, s.dw]
            })
            .collect();
        CandidateFile {
            model: ModelSpec::of(&candidate.model),
            h0: candidate.h0,
            lambda: candidate.lambda,
            assembly: candidate.assembly.clone(),
            span: (lo, hi),
            tau0: candidate.fit.tau0,
            tau1: candidate.fit.tau1,
            a0: candidate.fit.a0,
            b0: candidate.fit.b0,
            a1: candidate.fit.a1,
            b1: candidate.fit.b1,
            defect: candidate.defect,
            dt,
            samples,
        }
    }

    /// Rebuilds the candidate. With assembly data the arcs are re-integrated
    /// from the stored seeds; otherwise the trajectory is reconstructed from
    /// the sample nearest t = 0 and checked against the remaining samples.
    /// Returns the candidate and any consistency warnings.
    pub fn into_candidate(self) -> Result<(Arc<HeteroclinicCandidate>, Vec<String>)> {
        let model = self.model.build()?;
        let mut warn = Vec::new();
        let candidate = match &self.assembly {
            Some(assembly) => HeteroclinicCandidate::from_assembly(
                &model,
                self.h0,
                self.lambda,
                assembly.clone(),
            )?,
            None => {
                if self.samples.len() < 8 {
                    return Err(Error::Parse(
                        "candidate file carries neither assembly data nor enough samples".into(),
                    ));
                }
                let first = self.samples.first().unwrap();
                let last = self.samples.last().unwrap();
                let traj = ConnectionTrajectory::from_endpoint_states(
                    &model,
                    self.lambda,
                    (first[0], PhaseState::new(first[1], first[2], first[3], first[4])),
                    (last[0], PhaseState::new(last[1], last[2], last[3], last[4])),
                    1e-11,
                )?;
                let mismatch = traj.matching_mismatch();
                if mismatch > 1e-8 {
                    warn.push(format!(
                        "arcs rebuilt from the boundary samples miss each other by {mismatch:.3e} \
                         at t = 0; the supplied samples may not be a solution"
                    ));
                }
                // Cross-check the reconstruction against the stored samples.
                let mut worst: f64 = 0.0;
                for s in self.samples.iter().step_by(7) {
                    let got = traj.eval(s[0]);
                    worst = worst
                        .max((got.v - s[1]).abs())
                        .max((got.dv - s[2]).abs())
                        .max((got.w - s[3]).abs())
                        .max((got.dw - s[4]).abs());
                }
                if worst > 1e-6 {
                    warn.push(format!(
                        "re-integrated trajectory deviates from the stored samples by {worst:.3e}"
                    ));
                }
                HeteroclinicCandidate::from_trajectory(&model, self.h0, self.lambda, traj)?
            }
        };
        for (name, stored, fitted) in [
            ("tau0", self.tau0, candidate.fit.tau0),
            ("tau1", self.tau1, candidate.fit.tau1),
            ("a0", self.a0, candidate.fit.a0),
            ("a1", self.a1, candidate.fit.a1),
        ] {
            if (stored - fitted).abs() > 1e-6 * (1.0 + stored.abs()) {
                warn.push(format!("stored {name} = {stored} vs refitted {fitted}"));
            }
        }
        Ok((Arc::new(candidate), warn))
    }
}

pub fn save_candidate<P: AsRef<Path>>(
    path: P,
    candidate: &HeteroclinicCandidate,
    dt: f64,
) -> Result<()> {
    write_json(path, &CandidateFile::of(candidate, dt))
}

pub fn load_candidate<P: AsRef<Path>>(path: P) -> Result<(Arc<HeteroclinicCandidate>, Vec<String>)> {
    let file: CandidateFile = read_json(path)?;
    file.into_candidate()
}
