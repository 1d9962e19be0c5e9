//! Catalog of verification and study cases, exact solutions, the Cauchy
//! convergence harness and case runners.

mod checks;
mod convergence;
mod exact;
mod runner;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{make_grid, Bc, BoundarySpec, FaceVectorField, GridSpec, ScalarField, SideBcs};
use crate::model::{FluxLaw, PhysicalParams, PROFILE_A, SIGMA};
use crate::scheme::{SolverConfig, State, Step3Mode};

pub use checks::{
    check_permeability, check_rates, check_run, check_sharp_limit, Check, CONSERVATION_TOL, DIV_TOL, ENERGY_TOL,
    MERGE_WINDOW, PLATEAU_TOL, RATE_BAND,
};
pub use convergence::{
    cauchy_error, cauchy_error_velocity, convergence_rates, rate_rows, restrict_cells, RateRow, RateTable,
};
pub use exact::{
    exact_sharp_limit_1d, exact_two_interface, gaussian_seed, SHARP_X0, TWO_INTERFACE_X1, TWO_INTERFACE_X2,
};
pub use runner::{
    convergence_study, diffusive_flux, find_components, run_case, run_case_with, CaseReport, Component, RunOptions, RunOutcome,
    RunStats, STEADY_TOL,
};

/// Permeability ratio used by the shear-drop study.
pub const PERMEABILITY_DELTA: f64 = 0.02;
/// Seed time of the heat-kernel initial concentration.
pub const GAUSSIAN_T0: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseKind {
    SharpLimit1D { epsilon: f64 },
    TwoInterface1D,
    Gaussian2D,
    Convergence2D { h: f64, dt: f64 },
    EnergyStability { dt: f64 },
    ShearDrop { k: f64 },
    TwoDroplets,
}

impl CaseKind {
    pub fn name(&self) -> &'static str {
        match self {
            CaseKind::SharpLimit1D { .. } => "SharpLimit1D",
            CaseKind::TwoInterface1D => "TwoInterface1D",
            CaseKind::Gaussian2D => "Gaussian2D",
            CaseKind::Convergence2D { .. } => "Convergence2D",
            CaseKind::EnergyStability { .. } => "EnergyStability",
            CaseKind::ShearDrop { .. } => "ShearDrop",
            CaseKind::TwoDroplets => "TwoDroplets",
        }
    }

    /// Cases that hold the interface and velocity fixed.
    pub fn requires_frozen(&self) -> bool {
        matches!(
            self,
            CaseKind::SharpLimit1D { .. } | CaseKind::TwoInterface1D | CaseKind::Gaussian2D
        )
    }

    pub const ALL_NAMES: [&'static str; 7] = [
        "SharpLimit1D",
        "TwoInterface1D",
        "Gaussian2D",
        "Convergence2D",
        "EnergyStability",
        "ShearDrop",
        "TwoDroplets",
    ];
}

/// The three shear-drop permeabilities: low, medium, high.
pub fn shear_drop_permeabilities() -> [f64; 3] {
    let d = PERMEABILITY_DELTA;
    [d / (2.0 * SIGMA), 1.0 / (2.0 * SIGMA), 1.0 / (2.0 * SIGMA * d)]
}

/// Initial phase field.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiInit {
    /// `tanh((x - x0) / (sqrt2 eps))`.
    Front { x0: f64 },
    /// `+1` inside `(x1, x2)`, `-1` outside.
    Slab { x1: f64, x2: f64 },
    /// Union of discs, `sum tanh((r - d) / (sqrt2 eps)) + (n - 1)`.
    Discs(Vec<(f64, f64, f64)>),
    /// `mean + amp cos(2 pi x) cos(2 pi y)`.
    Cosine { mean: f64, amp: f64 },
}

/// Initial concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CInit {
    /// `a + b x`.
    LinearX { a: f64, b: f64 },
    /// `a + b y`.
    LinearY { a: f64, b: f64 },
    /// Heat kernel at `(1/2, 1/2)`.
    Gaussian { t0: f64, d: f64 },
    /// `mean + amp cos(2 pi x) cos(2 pi y)`.
    Cosine { mean: f64, amp: f64 },
}

/// Initial velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelInit {
    Zero,
    /// `u = -a sin^2(pi x) cos(2 pi y)`, `v = a sin^2(pi y) cos(2 pi x)`.
    Vortex { a: f64 },
    /// Simple shear `u = bottom + (top - bottom) (y - y_min) / Ly`.
    Shear { bottom: f64, top: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub kind: CaseKind,
    pub grid: GridSpec,
    pub params: PhysicalParams,
    pub bc: BoundarySpec,
    pub phi_init: PhiInit,
    pub c_init: CInit,
    pub vel_init: VelInit,
    pub end_time: f64,
    /// Steps between snapshots; 0 disables them.
    pub output_every: usize,
    pub frozen_interface: bool,
    pub dt: f64,
    pub step3_mode: Step3Mode,
    /// Stop as soon as the concentration is steady.
    pub stop_when_steady: bool,
}

impl fmt::Display for CaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {}x{}, dt={:e}, T={:e}",
            self.kind.name(),
            self.grid.nx,
            self.grid.ny,
            self.dt,
            self.end_time
        )
    }
}

fn base_params() -> PhysicalParams {
    PhysicalParams {
        re: 1.0,
        ca: 1.0,
        pe: 1.0,
        d_plus: 1.0,
        d_minus: 1.0,
        q_law: FluxLaw::Linear,
        ..Default::default()
    }
}

fn frozen_bc(c: SideBcs) -> BoundarySpec {
    BoundarySpec { c, ..BoundarySpec::closed_box() }
}

fn dirichlet_line(left: f64, right: f64) -> BoundarySpec {
    frozen_bc(SideBcs::x_sides(Bc::Dirichlet(left), Bc::Dirichlet(right)))
}

/// Cells used by the sharp-limit run at `epsilon`; the mesh is refined as
/// `eps^2` so that the discretization error shrinks with the model error.
pub fn sharp_limit_cells(epsilon: f64) -> usize {
    let n = 256.0 * (0.04 / epsilon).powi(2);
    (n.round() as usize).max(16)
}

impl CaseSpec {
    /// Default configuration for `kind`.
    pub fn new(kind: CaseKind) -> Result<Self> {
        let spec = match kind {
            CaseKind::SharpLimit1D { epsilon } => {
                if !(epsilon > 0.0) {
                    return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
                }
                let nx = sharp_limit_cells(epsilon);
                Self {
                    kind,
                    grid: GridSpec::line(nx, 0.0, 1.0),
                    params: PhysicalParams { epsilon, k: 0.5, ..base_params() },
                    bc: dirichlet_line(1.0, 4.0),
                    phi_init: PhiInit::Front { x0: SHARP_X0 },
                    c_init: CInit::LinearX { a: 1.0, b: 3.0 },
                    vel_init: VelInit::Zero,
                    end_time: 200.0,
                    output_every: 0,
                    frozen_interface: true,
                    dt: 0.5,
                    step3_mode: Step3Mode::LinearizedFlux,
                    stop_when_steady: true,
                }
            }
            CaseKind::TwoInterface1D => Self {
                kind,
                grid: GridSpec::line(512, 0.0, 1.0),
                params: PhysicalParams { epsilon: 0.01, k: 0.2, ..base_params() },
                bc: dirichlet_line(2.0, 1.0),
                phi_init: PhiInit::Slab { x1: TWO_INTERFACE_X1, x2: TWO_INTERFACE_X2 },
                c_init: CInit::LinearX { a: 2.0, b: -1.0 },
                vel_init: VelInit::Zero,
                end_time: 200.0,
                output_every: 0,
                frozen_interface: true,
                dt: 0.5,
                step3_mode: Step3Mode::LinearizedFlux,
                stop_when_steady: true,
            },
            CaseKind::Gaussian2D => Self {
                kind,
                grid: GridSpec::unit_square(128),
                params: PhysicalParams { epsilon: 0.01, k: 10.0, ..base_params() },
                bc: frozen_bc(SideBcs::neumann()),
                phi_init: PhiInit::Discs(vec![(0.5, 0.5, 11.0 / 18.0)]),
                c_init: CInit::Gaussian { t0: GAUSSIAN_T0, d: 1.0 },
                vel_init: VelInit::Zero,
                end_time: 1e-2,
                output_every: 0,
                frozen_interface: true,
                dt: 1e-4,
                step3_mode: Step3Mode::LinearizedFlux,
                stop_when_steady: false,
            },
            CaseKind::Convergence2D { h, dt } => {
                let n = (1.0 / h).round();
                if !(h > 0.0) || (n * h - 1.0).abs() > 1e-9 || n < 2.0 {
                    return Err(Error::Config(format!("h must be 1/N for an integer N >= 2, got {h}")));
                }
                Self {
                    grid: GridSpec::unit_square(n as usize),
                    dt,
                    end_time: 0.1,
                    ..Self::vortex_case(kind)
                }
            }
            CaseKind::EnergyStability { dt } => Self {
                grid: GridSpec::unit_square(128),
                dt,
                end_time: 0.5,
                ..Self::vortex_case(kind)
            },
            CaseKind::ShearDrop { k } => Self {
                kind,
                grid: GridSpec::unit_square(128),
                params: PhysicalParams { k, ..Self::shear_params() },
                bc: Self::shear_bc(),
                phi_init: PhiInit::Discs(vec![(0.5, 0.5, 0.25)]),
                c_init: CInit::LinearY { a: 0.2, b: 0.6 },
                vel_init: VelInit::Shear { bottom: -1.0, top: 1.0 },
                end_time: 2.0,
                output_every: 0,
                frozen_interface: false,
                dt: 2e-3,
                step3_mode: Step3Mode::EntropyFlux,
                stop_when_steady: false,
            },
            CaseKind::TwoDroplets => Self {
                kind,
                grid: GridSpec { nx: 256, ny: 128, x_min: 0.0, x_max: 2.0, y_min: 0.0, y_max: 1.0 },
                params: PhysicalParams { k: 1.0 / (2.0 * SIGMA), ..Self::shear_params() },
                bc: Self::shear_bc(),
                phi_init: PhiInit::Discs(vec![(0.5, 0.7, 0.2), (1.5, 0.3, 0.2)]),
                c_init: CInit::LinearY { a: 0.2, b: 0.6 },
                vel_init: VelInit::Shear { bottom: -1.0, top: 1.0 },
                end_time: 2.5,
                output_every: 0,
                frozen_interface: false,
                dt: 5e-4,
                step3_mode: Step3Mode::EntropyFlux,
                stop_when_steady: false,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Mobility of the convergence and energy cases.
    pub const VORTEX_MOBILITY: f64 = 0.1;

    fn vortex_case(kind: CaseKind) -> Self {
        Self {
            kind,
            grid: GridSpec::unit_square(128),
            params: PhysicalParams {
                epsilon: 0.08,
                mobility: Self::VORTEX_MOBILITY,
                k: 1.0 / PROFILE_A,
                ..base_params()
            },
            bc: BoundarySpec::all_periodic(),
            phi_init: PhiInit::Cosine { mean: 0.2, amp: 0.5 },
            c_init: CInit::Cosine { mean: 0.6, amp: 0.2 },
            vel_init: VelInit::Vortex { a: 0.25 },
            end_time: 0.1,
            output_every: 0,
            frozen_interface: false,
            dt: 1e-4,
            step3_mode: Step3Mode::EntropyFlux,
            stop_when_steady: false,
        }
    }

    fn shear_params() -> PhysicalParams {
        PhysicalParams {
            re: 100.0,
            epsilon: 0.02,
            mobility: 0.02,
            ..base_params()
        }
    }

    fn shear_bc() -> BoundarySpec {
        BoundarySpec {
            phi: SideBcs::periodic_x(Bc::Neumann, Bc::Neumann),
            mu: SideBcs::periodic_x(Bc::Neumann, Bc::Neumann),
            c: SideBcs::periodic_x(Bc::Dirichlet(0.2), Bc::Dirichlet(0.8)),
            vel: SideBcs::periodic_x(Bc::MovingWall(-1.0), Bc::MovingWall(1.0)),
            p: SideBcs::periodic_x(Bc::Neumann, Bc::Neumann),
        }
    }

    /// Case with the given name and default values for its variant fields.
    pub fn by_name(name: &str) -> Result<Self> {
        let kind = match name {
            "SharpLimit1D" => CaseKind::SharpLimit1D { epsilon: 0.01 },
            "TwoInterface1D" => CaseKind::TwoInterface1D,
            "Gaussian2D" => CaseKind::Gaussian2D,
            "Convergence2D" => CaseKind::Convergence2D { h: 1.0 / 64.0, dt: 1e-4 },
            "EnergyStability" => CaseKind::EnergyStability { dt: 0.1 / 256.0 },
            "ShearDrop" => CaseKind::ShearDrop { k: 1.0 / (2.0 * SIGMA) },
            "TwoDroplets" => CaseKind::TwoDroplets,
            other => return Err(Error::Config(format!("unknown case '{other}'"))),
        };
        Self::new(kind)
    }

    pub fn validate(&self) -> Result<()> {
        make_grid(self.grid)?;
        self.params.validate()?;
        self.bc.validate()?;
        self.solver_config().validate()?;
        if self.kind.requires_frozen() != self.frozen_interface {
            return Err(Error::Config(format!(
                "{}: frozen_interface must be {}",
                self.kind.name(),
                self.kind.requires_frozen()
            )));
        }
        let consistent = match self.kind {
            CaseKind::SharpLimit1D { epsilon } => epsilon == self.params.epsilon,
            CaseKind::ShearDrop { k } => k == self.params.k,
            CaseKind::Convergence2D { h, dt } => {
                dt == self.dt && (h * self.grid.nx as f64 - 1.0).abs() < 1e-9 && self.grid.nx == self.grid.ny
            }
            CaseKind::EnergyStability { dt } => dt == self.dt,
            _ => true,
        };
        if !consistent {
            return Err(Error::Config(format!(
                "{}: case parameters disagree with the grid, dt or physical parameters",
                self.kind.name()
            )));
        }
        if !(self.end_time.is_finite() && self.end_time > 0.0) {
            return Err(Error::Config(format!("end time must be positive, got {}", self.end_time)));
        }
        if let CInit::Gaussian { t0, d } = self.c_init {
            if !(t0 > 0.0 && d > 0.0) {
                return Err(Error::Config("gaussian seed needs t0 > 0 and D > 0".into()));
            }
        }
        if self.params.q_law == FluxLaw::Logarithmic && self.step3_mode == Step3Mode::LinearizedFlux {
            log::warn!("linearized flux ignores the positivity the logarithmic law relies on");
        }
        Ok(())
    }

    /// Solver settings implied by the case.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            step3_mode: self.step3_mode,
            ..Default::default()
        }
    }

    /// Number of time steps to reach `end_time`.
    pub fn step_count(&self) -> usize {
        ((self.end_time / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn initial_state(&self) -> Result<State> {
        let g = make_grid(self.grid)?;
        let eps = self.params.epsilon;
        let w = SQRT_2 * eps;
        let phi = match &self.phi_init {
            PhiInit::Front { x0 } => ScalarField::from_fn(g, |x, _| ((x - x0) / w).tanh()),
            PhiInit::Slab { x1, x2 } => {
                ScalarField::from_fn(g, |x, _| ((x - x1) / w).tanh() - ((x - x2) / w).tanh() - 1.0)
            }
            PhiInit::Discs(discs) => ScalarField::from_fn(g, |x, y| {
                discs
                    .iter()
                    .map(|&(cx, cy, r)| ((r - ((x - cx).powi(2) + (y - cy).powi(2)).sqrt()) / w).tanh())
                    .sum::<f64>()
                    + (discs.len() as f64 - 1.0)
            }),
            PhiInit::Cosine { mean, amp } => {
                ScalarField::from_fn(g, |x, y| mean + amp * (2.0 * PI * x).cos() * (2.0 * PI * y).cos())
            }
        };
        let c = match self.c_init {
            CInit::LinearX { a, b } => ScalarField::from_fn(g, |x, _| a + b * x),
            CInit::LinearY { a, b } => ScalarField::from_fn(g, |_, y| a + b * y),
            CInit::Gaussian { t0, d } => ScalarField::from_fn(g, |x, y| gaussian_seed(x, y, t0, d)),
            CInit::Cosine { mean, amp } => {
                ScalarField::from_fn(g, |x, y| mean + amp * (2.0 * PI * x).cos() * (2.0 * PI * y).cos())
            }
        };
        let vel = match self.vel_init {
            VelInit::Zero => FaceVectorField::zeros(g),
            VelInit::Vortex { a } => FaceVectorField::from_fns(
                g,
                |x, y| -a * (PI * x).sin().powi(2) * (2.0 * PI * y).cos(),
                |x, y| a * (PI * y).sin().powi(2) * (2.0 * PI * x).cos(),
            ),
            VelInit::Shear { bottom, top } => {
                let (y0, ly) = (g.y_min, g.y_max - g.y_min);
                FaceVectorField::from_fns(g, move |_, y| bottom + (top - bottom) * (y - y0) / ly, |_, _| 0.0)
            }
        };
        State::initial(phi, c, vel, &self.params, &self.bc)
    }
}
