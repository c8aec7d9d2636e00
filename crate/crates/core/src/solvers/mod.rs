//! Minimum-energy configurations under reliability targets.
//!
//! The fixed-length and BMAC baselines are solved by bisection on the
//! receiver power. AdaSense is optimized over both phase lengths, powers and
//! thresholds; see [`optimize_adasense`].

mod adasense;
mod baseline;
mod nelder_mead;
mod sweep;

pub use adasense::{optimize_adasense, optimize_adasense_with, AdaSenseOptions};
pub use baseline::{solve_bmac, solve_single_phase};
pub use sweep::{savings_pct, sweep, SweepRow};

use crate::base::ReliabilityTarget;
use crate::schemes::{PerfReport, Scheme, SchemeConfig};

/// Smallest receiver power the solvers consider, in Watts.
pub const MIN_RECEIVER_POWER: f64 = 1e-12;
/// Largest receiver power the solvers consider, in Watts.
pub const MAX_RECEIVER_POWER: f64 = 1.0;
/// Relative slack allowed on both reliability constraints.
pub const FEASIBILITY_REL_TOL: f64 = 1e-9;

/// True when the report meets both targets up to [`FEASIBILITY_REL_TOL`].
/// Compared in the log domain so that underflowed probabilities still count.
pub fn meets_target(report: &PerfReport, target: &ReliabilityTarget) -> bool {
    let slack = FEASIBILITY_REL_TOL.ln_1p();
    report.ln_p_fa <= target.alpha().ln() + slack && report.ln_p_miss <= target.beta().ln() + slack
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Local searches run (one per start per phase-length pair).
    pub starts_tried: usize,
    /// Start that produced the returned configuration, if a multi-start search produced it.
    pub best_start_index: Option<usize>,
    /// `(alpha - p_fa, beta - p_miss)` of the returned configuration.
    pub constraint_slack: (f64, f64),
    /// Not part of any determinism guarantee.
    pub wall_time_seconds: f64,
    /// The soft time budget ran out and later pairs used fewer starts.
    pub budget_exceeded: bool,
    /// Phase-length pairs searched (AdaSense only).
    pub pairs_evaluated: usize,
    /// `p_fa >= alpha / 2` at the returned point.
    pub fa_near_active: bool,
}

impl Diagnostics {
    pub(crate) fn for_report(report: &PerfReport, target: &ReliabilityTarget) -> Self {
        Self {
            starts_tried: 0,
            best_start_index: None,
            constraint_slack: (target.alpha() - report.p_fa, target.beta() - report.p_miss),
            wall_time_seconds: 0.0,
            budget_exceeded: false,
            pairs_evaluated: 0,
            fa_near_active: report.p_fa >= 0.5 * target.alpha(),
        }
    }
}

/// A solved configuration together with its exact performance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    /// Scheme the solver was asked for. An AdaSense result may carry a
    /// single-phase config when skipping the first phase is cheapest.
    pub scheme: Scheme,
    pub config: SchemeConfig,
    /// Fresh evaluation of `config`.
    pub report: PerfReport,
    pub feasible: bool,
    /// `report.energy` when feasible, `+inf` otherwise.
    pub objective_energy: f64,
    pub diagnostics: Diagnostics,
}

impl OptimizationResult {
    pub(crate) fn new(
        scheme: Scheme,
        config: SchemeConfig,
        report: PerfReport,
        target: &ReliabilityTarget,
        diagnostics: Diagnostics,
    ) -> Self {
        let feasible = meets_target(&report, target);
        let fresh = Diagnostics::for_report(&report, target);
        let diagnostics = Diagnostics {
            constraint_slack: fresh.constraint_slack,
            fa_near_active: fresh.fa_near_active,
            ..diagnostics
        };
        Self {
            scheme,
            config,
            report,
            feasible,
            objective_energy: if feasible { report.energy } else { f64::INFINITY },
            diagnostics,
        }
    }
}
