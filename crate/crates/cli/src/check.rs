//! Randomized self-checks of the bilinear form on a configured mesh.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stcutfem::assembly::forms::{apply_bh, FormVariant};
use stcutfem::{bnorm, SpaceTimeSolution, TimeRule};

use crate::config::Config;
use crate::error::CliError;

/// Coercivity constant asserted by the check.
pub const COERCIVITY_FLOOR: f64 = 0.01;
/// Relative tolerance between the two forms of the bilinear form.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub samples: usize,
    /// `min B_h(v, v) / |||v|||_B²` over the samples.
    pub min_coercivity: f64,
    /// Largest relative gap between the standard form and its integrated
    /// by parts counterpart.
    pub max_identity_gap: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.min_coercivity >= COERCIVITY_FLOOR && self.max_identity_gap <= IDENTITY_TOL
    }
}

pub fn run_check(config: &Config, seed: u64, samples: usize) -> Result<CheckReport, CliError> {
    let setup = config.base_run()?;
    let mesh = Arc::new(setup.mesh().map_err(|e| CliError::Config(e.to_string()))?);
    // exact for the integrands on every event panel, so the identity holds to rounding
    let rule = TimeRule::Gauss3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |rng: &mut ChaCha8Rng| {
        SpaceTimeSolution::from_fn(&mesh, |_, _, space| (0..space.n_columns()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .map_err(|e| CliError::Numerical(e.to_string()))
    };
    let numerical = |e: stcutfem::Error| CliError::Numerical(e.to_string());
    let mut report = CheckReport {
        samples,
        min_coercivity: f64::INFINITY,
        max_identity_gap: 0.0,
    };
    for _ in 0..samples {
        let v = random(&mut rng)?;
        let w = random(&mut rng)?;
        let b = apply_bh(&v, &v, rule, FormVariant::Standard).map_err(numerical)?;
        report.min_coercivity = report.min_coercivity.min(b / bnorm(&v).powi(2));
        let standard = apply_bh(&w, &v, rule, FormVariant::Standard).map_err(numerical)?;
        let parts = apply_bh(&w, &v, rule, FormVariant::IntegratedByParts).map_err(numerical)?;
        let gap = (standard - parts).abs() / standard.abs().max(1.0);
        report.max_identity_gap = report.max_identity_gap.max(gap);
    }
    Ok(report)
}
