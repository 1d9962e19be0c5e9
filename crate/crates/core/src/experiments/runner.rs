use std::collections::VecDeque;
use std::path::PathBuf;

use rayon::prelude::*;

use super::{cauchy_error, cauchy_error_velocity, exact_sharp_limit_1d, exact_two_interface, rate_rows};
use super::{CaseKind, CaseSpec, RateTable, SHARP_X0, TWO_INTERFACE_X1, TWO_INTERFACE_X2};
use crate::energy::{total_energy, ConservationTracker, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::{face_average, gradient, make_grid, BoundarySpec, FaceVectorField, GridSpec, ScalarField};
use crate::io;
use crate::model::{effective_diffusivity, q_of_c_floored, PhysicalParams, PROFILE_A};
use crate::scheme::{SolverConfig, State, Stepper};

/// Relative L2 change of `c` per unit time below which a run is steady.
pub const STEADY_TOL: f64 = 1e-8;
/// Half-width of the excluded interface band, in units of `eps`.
const BULK_BAND: f64 = 5.0;
/// `phi` above which a cell belongs to a drop interior.
const INTERIOR_PHI: f64 = 0.9;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for snapshots, the energy log and the manifest.
    pub out_dir: Option<PathBuf>,
    /// Evaluate the energy after every step even for frozen cases.
    pub track_energy: bool,
    /// Overrides the case end time.
    pub end_time: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub max_div_projected: f64,
    pub max_gauss_iterations: usize,
    pub max_newton_iterations: usize,
    /// Largest step-to-step increase of the modified energy (0 if none).
    pub max_energy_increase: f64,
    pub energy_checked: bool,
    pub volume_drift: f64,
    pub mass_drift: f64,
    /// Relative L2 change of `c` per unit time over the last step.
    pub final_change_rate: f64,
    pub steady: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseReport {
    SharpLimit {
        epsilon: f64,
        bulk_linf: f64,
    },
    TwoInterface {
        bulk_linf: f64,
        /// Largest relative deviation of the bulk face flux from its mean.
        flux_variation: f64,
        /// Mean bulk flux.
        flux: f64,
        /// `K |[[c]]|` at each interface from the bulk line fits.
        k_jumps: [f64; 2],
        /// Largest `| |flux| - K |[[c]]| | / |flux|`.
        flux_law_error: f64,
    },
    Gaussian {
        min_c: f64,
        max_c: f64,
        /// Mass of `c` inside the disc (`phi > 0`).
        inner_mass: f64,
    },
    Flow,
    ShearDrop {
        k: f64,
        /// Mean diffusive flux magnitude over cells with `|phi| < 1/2`.
        interface_flux: f64,
        /// Relative L2 distance of `c` from the interface-free profile.
        linear_deviation: f64,
        /// Spread (max - min) of `c` in the drop interior.
        interior_spread: f64,
    },
    TwoDroplets {
        merge_time: Option<f64>,
        /// Interior mean `c` of each drop just before the merge.
        pre_merge_plateaus: Vec<f64>,
        /// Spread (max - min) of `c` in the merged drop interior at the end.
        post_merge_spread: f64,
        /// Standard deviation of `c` in the merged drop interior at the end.
        post_merge_std: f64,
        /// Standard deviation at the end relative to the pre-merge plateau gap.
        post_merge_relative_std: f64,
    },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub spec: CaseSpec,
    pub final_state: State,
    pub stats: RunStats,
    pub report: CaseReport,
    /// `(n, t, energy)` after every step when energy was tracked.
    pub energy: Vec<(usize, f64, EnergyReport)>,
    pub artifacts: Vec<PathBuf>,
}

/// Connected region of `phi > 0` (4-connectivity).
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub cells: Vec<usize>,
}

/// Labels the connected regions of `phi > 0`; x wraps around when
/// `periodic_x` is set.
pub fn find_components(phi: &ScalarField, periodic_x: bool) -> Vec<Component> {
    let g = phi.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut label = vec![usize::MAX; g.cell_count()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..g.cell_count() {
        if label[start] != usize::MAX || phi.data[start] <= 0.0 {
            continue;
        }
        let id = out.len();
        let mut cells = Vec::new();
        label[start] = id;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            cells.push(k);
            let (i, j) = (k % nx, k / nx);
            let mut nb = Vec::with_capacity(4);
            if i > 0 {
                nb.push(k - 1);
            } else if periodic_x && nx > 1 {
                nb.push(k + nx - 1);
            }
            if i + 1 < nx {
                nb.push(k + 1);
            } else if periodic_x && nx > 1 {
                nb.push(k + 1 - nx);
            }
            if j > 0 {
                nb.push(k - nx);
            }
            if j + 1 < ny {
                nb.push(k + nx);
            }
            for m in nb {
                if label[m] == usize::MAX && phi.data[m] > 0.0 {
                    label[m] = id;
                    queue.push_back(m);
                }
            }
        }
        cells.sort_unstable();
        out.push(Component { cells });
    }
    out
}

/// Diffusive flux `-D_eff(phi, q(c)) grad c / Pe` on the faces.
pub fn diffusive_flux(state: &State, p: &PhysicalParams, bc: &BoundarySpec) -> FaceVectorField {
    let grad = gradient(&state.c, &bc.c);
    let phi_f = face_average(&state.phi, &bc.phi);
    let c_f = face_average(&state.c, &bc.c);
    let d = |phi: f64, c: f64| effective_diffusivity(phi, q_of_c_floored(c, p.q_law), p, PROFILE_A) / p.pe;
    let mut out = grad.clone();
    for k in 0..out.u.len() {
        out.u[k] = -d(phi_f.u[k], c_f.u[k]) * grad.u[k];
    }
    for k in 0..out.v.len() {
        out.v[k] = -d(phi_f.v[k], c_f.v[k]) * grad.v[k];
    }
    out
}

fn relative_change(new: &ScalarField, old: &ScalarField, dt: f64) -> f64 {
    let diff: f64 = new.data.iter().zip(&old.data).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = old.data.iter().map(|a| a * a).sum();
    (diff / norm.max(f64::MIN_POSITIVE)).sqrt() / dt
}

fn in_bulk(x: f64, interfaces: &[f64], eps: f64) -> bool {
    interfaces.iter().all(|x0| (x - x0).abs() > BULK_BAND * eps)
}

fn bulk_linf(state: &State, interfaces: &[f64], eps: f64, exact: impl Fn(f64) -> f64) -> f64 {
    let g = state.grid();
    (0..g.nx)
        .filter(|&i| in_bulk(g.xc(i), interfaces, eps))
        .map(|i| (state.c.get(i, 0) - exact(g.xc(i))).abs())
        .fold(0.0, f64::max)
}

/// Least-squares line `a + b x` through `(x, c)` pairs.
fn line_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn two_interface_report(state: &State, p: &PhysicalParams) -> CaseReport {
    let g = state.grid();
    let eps = p.epsilon;
    let xs = [TWO_INTERFACE_X1, TWO_INTERFACE_X2];
    let bounds = [(0.0, xs[0]), (xs[0], xs[1]), (xs[1], 1.0)];
    let d = 1.0 / p.pe;
    let mut fits = Vec::new();
    let mut fluxes = Vec::new();
    for (lo, hi) in bounds {
        let pts: Vec<(f64, f64)> = (0..g.nx)
            .map(|i| (g.xc(i), state.c.get(i, 0)))
            .filter(|&(x, _)| x > lo && x < hi && in_bulk(x, &xs, eps))
            .collect();
        for w in pts.windows(2) {
            let bulk_d = if lo == xs[0] { d * p.d_plus } else { d * p.d_minus };
            fluxes.push(-bulk_d * (w[1].1 - w[0].1) / (w[1].0 - w[0].0));
        }
        fits.push(line_fit(&pts));
    }
    let flux = fluxes.iter().sum::<f64>() / fluxes.len() as f64;
    let flux_variation = fluxes.iter().map(|f| (f - flux).abs()).fold(0.0, f64::max) / flux.abs();
    let at = |(a, b): (f64, f64), x: f64| a + b * x;
    let k_jumps = [
        p.k * (at(fits[0], xs[0]) - at(fits[1], xs[0])).abs(),
        p.k * (at(fits[1], xs[1]) - at(fits[2], xs[1])).abs(),
    ];
    let flux_law_error = k_jumps
        .iter()
        .map(|kj| (flux.abs() - kj).abs() / flux.abs())
        .fold(0.0, f64::max);
    CaseReport::TwoInterface {
        bulk_linf: bulk_linf(state, &xs, eps, exact_two_interface),
        flux_variation,
        flux,
        k_jumps,
        flux_law_error,
    }
}

fn shear_drop_report(state: &State, spec: &CaseSpec) -> CaseReport {
    let g = state.grid();
    let p = &spec.params;
    let j = diffusive_flux(state, p, &spec.bc);
    let (jx, jy) = j.cell_averaged();
    let mut sum = 0.0;
    let mut count = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut dev, mut norm) = (0.0, 0.0);
    for jj in 0..g.ny {
        for ii in 0..g.nx {
            let k = g.cell_index(ii, jj);
            let phi = state.phi.data[k];
            if phi.abs() < 0.5 {
                sum += jx.data[k].hypot(jy.data[k]);
                count += 1;
            }
            let c = state.c.data[k];
            if phi > INTERIOR_PHI {
                lo = lo.min(c);
                hi = hi.max(c);
            }
            let lin = 0.2 + 0.6 * (g.yc(jj) - g.y_min) / (g.y_max - g.y_min);
            dev += (c - lin).powi(2);
            norm += lin * lin;
        }
    }
    CaseReport::ShearDrop {
        k: p.k,
        interface_flux: if count > 0 { sum / count as f64 } else { 0.0 },
        linear_deviation: (dev / norm).sqrt(),
        interior_spread: if hi >= lo { hi - lo } else { 0.0 },
    }
}

fn interior_values<'a>(state: &'a State, comp: &'a Component) -> impl Iterator<Item = f64> + 'a {
    comp.cells
        .iter()
        .filter(|&&k| state.phi.data[k] > INTERIOR_PHI)
        .map(|&k| state.c.data[k])
}

fn interior_mean(state: &State, comp: &Component) -> f64 {
    let (s, n) = interior_values(state, comp).fold((0.0, 0usize), |(s, n), c| (s + c, n + 1));
    s / n.max(1) as f64
}

struct MergeTracker {
    periodic_x: bool,
    merge_time: Option<f64>,
    pre_merge: Vec<f64>,
}

impl MergeTracker {
    fn observe(&mut self, s: &State) {
        if self.merge_time.is_some() {
            return;
        }
        let comps = find_components(&s.phi, self.periodic_x);
        if comps.len() == 1 {
            self.merge_time = Some(s.t);
        } else {
            self.pre_merge = comps.iter().map(|c| interior_mean(s, c)).collect();
        }
    }

    fn report(&self, s: &State) -> CaseReport {
        let comps = find_components(&s.phi, self.periodic_x);
        let (spread, std) = match comps.as_slice() {
            [one] => {
                let vals: Vec<f64> = interior_values(s, one).collect();
                if vals.is_empty() {
                    (f64::INFINITY, f64::INFINITY)
                } else {
                    let n = vals.len() as f64;
                    let mean = vals.iter().sum::<f64>() / n;
                    let var = vals.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
                    let (lo, hi) = vals
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
                    (hi - lo, var.sqrt())
                }
            }
            _ => (f64::INFINITY, f64::INFINITY),
        };
        let gap = self
            .pre_merge
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - self.pre_merge.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        CaseReport::TwoDroplets {
            merge_time: self.merge_time,
            pre_merge_plateaus: self.pre_merge.clone(),
            post_merge_spread: spread,
            post_merge_std: std,
            post_merge_relative_std: if gap > 0.0 { std / gap } else { f64::INFINITY },
        }
    }
}

/// Runs `spec` with default options (no files written).
pub fn run_case(spec: &CaseSpec, cfg: &SolverConfig) -> Result<RunOutcome> {
    run_case_with(spec, cfg, &RunOptions::default())
}

pub fn run_case_with(spec: &CaseSpec, cfg: &SolverConfig, opts: &RunOptions) -> Result<RunOutcome> {
    spec.validate()?;
    cfg.validate()?;
    let grid = make_grid(spec.grid)?;
    let mut state = spec.initial_state()?;
    let mut stepper = Stepper::new(grid, spec.params, *cfg, spec.bc)?;
    let end_time = opts.end_time.unwrap_or(spec.end_time);
    let steps = ((end_time / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let track_energy = opts.track_energy || !spec.frozen_interface || opts.out_dir.is_some();
    let mut stats = RunStats {
        energy_checked: track_energy,
        ..Default::default()
    };
    let mut tracker = ConservationTracker::new(&state);
    let mut energy = Vec::new();
    let mut artifacts = Vec::new();
    let mut merge = matches!(spec.kind, CaseKind::TwoDroplets).then(|| MergeTracker {
        periodic_x: spec.bc.phi.periodic_in_x(),
        merge_time: None,
        pre_merge: Vec::new(),
    });
    if let Some(m) = merge.as_mut() {
        m.observe(&state);
    }

    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.clone(), e))?;
    }
    let energy_path = opts.out_dir.as_ref().map(|d| d.join("energy.csv"));
    let snapshot = |s: &State, artifacts: &mut Vec<PathBuf>| -> Result<()> {
        if let Some(dir) = &opts.out_dir {
            let path = dir.join(format!("snapshot_{:06}.vtk", s.n));
            artifacts.extend(io::write_snapshot(s, &path)?);
        }
        Ok(())
    };
    snapshot(&state, &mut artifacts)?;
    let mut prev_energy = if track_energy {
        let e = total_energy(&state, &spec.params, cfg.dt, &spec.bc);
        if let Some(path) = &energy_path {
            io::append_energy_log(&e, state.t, state.n, path)?;
        }
        energy.push((state.n, state.t, e));
        Some(e)
    } else {
        None
    };

    for _ in 0..steps {
        let (next, st) = if spec.frozen_interface {
            stepper.advance_frozen(&state)?
        } else {
            stepper.advance(&state)?
        };
        stats.steps += 1;
        stats.max_div_projected = stats.max_div_projected.max(st.div_projected);
        stats.max_gauss_iterations = stats.max_gauss_iterations.max(st.gauss_iterations);
        stats.max_newton_iterations = stats.max_newton_iterations.max(st.newton_iterations);
        stats.final_change_rate = relative_change(&next.c, &state.c, cfg.dt);
        tracker.observe(&next);
        if let Some(prev) = prev_energy {
            let e = total_energy(&next, &spec.params, cfg.dt, &spec.bc);
            stats.max_energy_increase = stats.max_energy_increase.max(e.e_mod - prev.e_mod);
            if let Some(path) = &energy_path {
                io::append_energy_log(&e, next.t, next.n, path)?;
            }
            energy.push((next.n, next.t, e));
            prev_energy = Some(e);
        }
        if let Some(m) = merge.as_mut() {
            m.observe(&next);
        }
        state = next;
        if steps >= 20 && stats.steps % (steps / 10) == 0 {
            log::info!("{}: step {}/{} t={:.4e}", spec.kind.name(), stats.steps, steps, state.t);
        }
        if spec.output_every > 0 && state.n % spec.output_every == 0 {
            snapshot(&state, &mut artifacts)?;
        }
        if spec.stop_when_steady && stats.final_change_rate < STEADY_TOL {
            break;
        }
    }
    stats.steady = stats.final_change_rate < STEADY_TOL;
    stats.volume_drift = tracker.max_volume_drift;
    stats.mass_drift = tracker.max_mass_drift;
    if spec.stop_when_steady && !stats.steady {
        log::warn!(
            "{}: not steady at t={:.3} (change rate {:.2e})",
            spec.kind.name(),
            state.t,
            stats.final_change_rate
        );
    }
    if let Some(dir) = &opts.out_dir {
        if spec.output_every == 0 || state.n % spec.output_every != 0 {
            snapshot(&state, &mut artifacts)?;
        }
        if let Some(path) = energy_path {
            artifacts.push(path);
        }
        artifacts.push(io::write_manifest(dir, &artifacts)?);
    }

    let p = &spec.params;
    let report = match spec.kind {
        CaseKind::SharpLimit1D { epsilon } => CaseReport::SharpLimit {
            epsilon,
            bulk_linf: bulk_linf(&state, &[SHARP_X0], epsilon, exact_sharp_limit_1d),
        },
        CaseKind::TwoInterface1D => two_interface_report(&state, p),
        CaseKind::Gaussian2D => CaseReport::Gaussian {
            min_c: state.c.min(),
            max_c: state.c.max(),
            inner_mass: state
                .c
                .data
                .iter()
                .zip(&state.phi.data)
                .filter(|(_, &f)| f > 0.0)
                .map(|(c, _)| c)
                .sum::<f64>()
                * state.grid().cell_area(),
        },
        CaseKind::Convergence2D { .. } | CaseKind::EnergyStability { .. } => CaseReport::Flow,
        CaseKind::ShearDrop { .. } => shear_drop_report(&state, spec),
        CaseKind::TwoDroplets => merge.as_ref().map(|m| m.report(&state)).ok_or_else(|| {
            Error::Consistency("merge tracker missing".into())
        })?,
    };
    Ok(RunOutcome {
        spec: spec.clone(),
        final_state: state,
        stats,
        report,
        energy,
        artifacts,
    })
}

/// Runs the convergence case on `N x N` grids for each `N` in `sizes`
/// (doubling) and tabulates the Cauchy errors of successive pairs.
pub fn convergence_study(template: &CaseSpec, sizes: &[usize]) -> Result<(RateTable, Vec<RunOutcome>)> {
    if sizes.len() < 2 {
        return Err(Error::Config("convergence study needs at least two grids".into()));
    }
    if sizes.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Config(format!("grid sizes must double, got {sizes:?}")));
    }
    let runs: Vec<RunOutcome> = sizes
        .par_iter()
        .map(|&n| {
            let h = 1.0 / n as f64;
            let kind = match template.kind {
                CaseKind::Convergence2D { dt, .. } => CaseKind::Convergence2D { h, dt },
                other => other,
            };
            let spec = CaseSpec {
                kind,
                grid: GridSpec { nx: n, ny: n, ..template.grid },
                ..template.clone()
            };
            run_case(&spec, &spec.solver_config())
        })
        .collect::<Result<_>>()?;
    let mut per_var: Vec<(String, Vec<(usize, f64, f64, f64)>)> = ["phi", "c", "u", "v", "p"]
        .iter()
        .map(|s| (s.to_string(), Vec::new()))
        .collect();
    for w in runs.windows(2) {
        let (a, b) = (&w[0].final_state, &w[1].final_state);
        let n = a.grid().nx;
        let h = a.grid().hx;
        let ((u2, ui), (v2, vi)) = cauchy_error_velocity(&a.vel, &b.vel)?;
        let errs = [
            cauchy_error(&a.phi, &b.phi)?,
            cauchy_error(&a.c, &b.c)?,
            (u2, ui),
            (v2, vi),
            cauchy_error(&a.p, &b.p)?,
        ];
        for ((_, rows), (l2, li)) in per_var.iter_mut().zip(errs) {
            rows.push((n, h, l2, li));
        }
    }
    let variables = per_var
        .into_iter()
        .map(|(name, errs)| Ok((name, rate_rows(&errs)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((RateTable { variables }, runs))
}
