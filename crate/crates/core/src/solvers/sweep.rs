use rayon::prelude::*;

use super::{optimize_adasense, solve_bmac, solve_single_phase, OptimizationResult};
use crate::base::{NoiseProfile, ReliabilityTarget, ScenarioParams};
use crate::error::Result;
use crate::schemes::Scheme;

/// One cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub scenario: ScenarioParams,
    pub target: ReliabilityTarget,
    pub scheme: Scheme,
    pub result: OptimizationResult,
    /// Set on AdaSense rows when the same cell also has a feasible BMAC row.
    pub savings_vs_bmac_pct: Option<f64>,
}

/// Percentage of the BMAC energy saved by AdaSense.
pub fn savings_pct(bmac_energy: f64, adasense_energy: f64) -> f64 {
    100.0 * (bmac_energy - adasense_energy) / bmac_energy
}

/// Solves every (scenario, target, scheme) combination. Rows come out in
/// scenario-major, then target, then scheme order as given.
pub fn sweep(
    scenarios: &[ScenarioParams],
    profile: &NoiseProfile,
    targets: &[ReliabilityTarget],
    schemes: &[Scheme],
) -> Result<Vec<SweepRow>> {
    let cells: Vec<(ScenarioParams, ReliabilityTarget)> =
        scenarios.iter().flat_map(|s| targets.iter().map(move |t| (*s, *t))).collect();
    let solved: Vec<Vec<SweepRow>> = cells
        .par_iter()
        .map(|(scenario, target)| {
            let mut rows = schemes
                .iter()
                .map(|&scheme| {
                    let result = match scheme {
                        Scheme::SinglePhase => solve_single_phase(scenario, profile, target)?,
                        Scheme::Bmac => solve_bmac(scenario, profile, target)?,
                        Scheme::AdaSense => optimize_adasense(scenario, profile, target)?,
                    };
                    Ok(SweepRow { scenario: *scenario, target: *target, scheme, result, savings_vs_bmac_pct: None })
                })
                .collect::<Result<Vec<_>>>()?;
            let bmac = rows.iter().find(|r| r.scheme == Scheme::Bmac && r.result.feasible).map(|r| r.result.report.energy);
            if let Some(e_bmac) = bmac {
                for row in rows.iter_mut().filter(|r| r.scheme == Scheme::AdaSense && r.result.feasible) {
                    row.savings_vs_bmac_pct = Some(savings_pct(e_bmac, row.result.report.energy));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(solved.into_iter().flatten().collect())
}
