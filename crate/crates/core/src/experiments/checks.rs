use std::fmt;

use super::{CaseKind, CaseReport, RateTable, RunOutcome};

/// Projection tolerance on `max |div u|`.
pub const DIV_TOL: f64 = 1e-8;
/// Allowed per-step increase of the modified energy.
pub const ENERGY_TOL: f64 = 1e-10;
/// Allowed relative drift of volume and mass.
pub const CONSERVATION_TOL: f64 = 1e-8;
/// Accepted band of observed convergence rates.
pub const RATE_BAND: (f64, f64) = (1.7, 2.3);
/// Accepted merge-time window of the two-droplet case.
pub const MERGE_WINDOW: (f64, f64) = (1.0, 1.5);
/// Largest interior standard deviation after the merge, relative to the
/// pre-merge plateau gap.
pub const PLATEAU_TOL: f64 = 0.1;

/// Outcome of one threshold test.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Threshold tests that apply to a single run.
pub fn check_run(o: &RunOutcome) -> Vec<Check> {
    let s = &o.stats;
    let mut out = vec![Check::new(
        "projection",
        s.max_div_projected <= DIV_TOL,
        format!("max |div u| = {:.2e}", s.max_div_projected),
    )];
    let closed = matches!(o.spec.kind, CaseKind::Convergence2D { .. } | CaseKind::EnergyStability { .. });
    if closed {
        out.push(Check::new(
            "energy",
            s.max_energy_increase <= ENERGY_TOL,
            format!("largest modified-energy increase {:.2e}", s.max_energy_increase),
        ));
    }
    if closed {
        out.push(Check::new(
            "conservation",
            s.volume_drift <= CONSERVATION_TOL && s.mass_drift <= CONSERVATION_TOL,
            format!("volume drift {:.2e}, mass drift {:.2e}", s.volume_drift, s.mass_drift),
        ));
    }
    match &o.report {
        CaseReport::TwoInterface {
            bulk_linf,
            flux_variation,
            flux_law_error,
            ..
        } => {
            out.push(Check::new("bulk error", *bulk_linf <= 0.02, format!("{bulk_linf:.3e} (limit 2e-2)")));
            out.push(Check::new(
                "flux law",
                *flux_law_error <= 0.05 && *flux_variation <= 0.01,
                format!("flux-law error {flux_law_error:.2e}, bulk flux variation {flux_variation:.2e}"),
            ));
        }
        CaseReport::TwoDroplets {
            merge_time,
            pre_merge_plateaus,
            post_merge_spread,
            post_merge_relative_std,
            ..
        } => {
            let ok = merge_time.is_some_and(|t| t >= MERGE_WINDOW.0 && t <= MERGE_WINDOW.1);
            out.push(Check::new("merge time", ok, format!("{merge_time:?}")));
            out.push(Check::new(
                "single plateau",
                pre_merge_plateaus.len() == 2 && *post_merge_relative_std <= PLATEAU_TOL,
                format!(
                    "pre-merge plateaus {pre_merge_plateaus:.4?}; interior std / pre-merge gap = \
                     {post_merge_relative_std:.3e}, interior max - min = {post_merge_spread:.3e}"
                ),
            ));
        }
        _ => {}
    }
    out
}

/// Every observed rate lies in [`RATE_BAND`].
pub fn check_rates(table: &RateTable) -> Check {
    let bad: Vec<String> = table
        .variables
        .iter()
        .flat_map(|(name, rows)| {
            rows.iter().flat_map(move |r| {
                [("L2", r.rate_l2), ("Linf", r.rate_linf)]
                    .into_iter()
                    .filter_map(move |(norm, x)| x.map(|x| (name, r.n, norm, x)))
            })
        })
        .filter(|&(_, _, _, x)| !(x >= RATE_BAND.0 && x <= RATE_BAND.1))
        .map(|(name, n, norm, x)| format!("{name} {norm} at {n}: {x:.2}"))
        .collect();
    let detail = if bad.is_empty() {
        format!("all rates in [{}, {}]", RATE_BAND.0, RATE_BAND.1)
    } else {
        bad.join("; ")
    };
    Check::new("convergence rates", bad.is_empty(), detail)
}

/// Errors strictly decrease and the last is at most half the first.
pub fn check_sharp_limit(errors: &[(f64, f64)]) -> Check {
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    let halved = match (errors.first(), errors.last()) {
        (Some(a), Some(b)) if errors.len() > 1 => b.1 <= 0.5 * a.1,
        _ => false,
    };
    let detail = errors
        .iter()
        .map(|(e, err)| format!("eps={e}: {err:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Check::new("sharp-interface limit", decreasing && halved, detail)
}

/// Flux strictly increases with `K`, and the highest-`K` field stays within
/// 10% of the interface-free profile.
pub fn check_permeability(reports: &[CaseReport]) -> Check {
    let pts: Vec<(f64, f64, f64)> = reports
        .iter()
        .filter_map(|r| match r {
            CaseReport::ShearDrop {
                k,
                interface_flux,
                linear_deviation,
                ..
            } => Some((*k, *interface_flux, *linear_deviation)),
            _ => None,
        })
        .collect();
    let mut sorted = pts.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let increasing = sorted.len() >= 2 && sorted.windows(2).all(|w| w[1].1 > w[0].1);
    let close = sorted.last().is_some_and(|p| p.2 <= 0.1);
    let detail = sorted
        .iter()
        .map(|(k, f, d)| format!("K={k:.4}: flux {f:.4e}, deviation {d:.3e}"))
        .collect::<Vec<_>>()
        .join("; ");
    Check::new("permeability monotonicity", increasing && close, detail)
}
