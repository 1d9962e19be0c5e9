//! Decoupled linear time integrator: coupled Cahn-Hilliard and tentative
//! momentum solved by block Gauss iteration, pressure-correction
//! projection, then an implicit concentration update.

mod cahn_hilliard;
mod concentration;
mod layout;
mod linear;
mod momentum;
mod projection;

use crate::error::{Error, Result};
use crate::grid::{laplacian, BoundarySpec, FaceVectorField, Grid, ScalarField};
use crate::linalg::SeparableSolver;
use crate::model::{double_well_prime, FluxLaw, PhysicalParams};

pub use layout::VelocityLayout;
pub use linear::{solve_linear, LinearSystem, UnknownLayout};

/// Flux discretization of the concentration step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step3Mode {
    /// `j = -D grad c`, one linear solve per step.
    LinearizedFlux,
    /// `j = -D c grad(ln c)`, solved by Newton iteration.
    EntropyFlux,
}

impl Step3Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Step3Mode::LinearizedFlux => "linearized",
            Step3Mode::EntropyFlux => "entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub gauss_tol: f64,
    pub gauss_max_iters: usize,
    pub lin_tol: f64,
    pub lin_max_iters: usize,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub step3_mode: Step3Mode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            gauss_tol: 1e-8,
            gauss_max_iters: 100,
            lin_tol: 1e-10,
            lin_max_iters: 2000,
            newton_tol: 1e-12,
            newton_max_iters: 50,
            step3_mode: Step3Mode::EntropyFlux,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        for (name, v) in [
            ("gauss_tol", self.gauss_tol),
            ("lin_tol", self.lin_tol),
            ("newton_tol", self.newton_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        for (name, v) in [
            ("gauss_max_iters", self.gauss_max_iters),
            ("lin_max_iters", self.lin_max_iters),
            ("newton_max_iters", self.newton_max_iters),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

/// Solution at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub phi: ScalarField,
    pub mu: ScalarField,
    pub c: ScalarField,
    pub vel: FaceVectorField,
    pub p: ScalarField,
    pub t: f64,
    pub n: usize,
}

impl State {
    /// Builds the initial state: `mu = -eps lap(phi) + G'(phi)/eps`, `p = 0`.
    pub fn initial(
        phi: ScalarField,
        c: ScalarField,
        mut vel: FaceVectorField,
        params: &PhysicalParams,
        bc: &BoundarySpec,
    ) -> Result<Self> {
        let g = phi.grid;
        if !g.same_shape(&c.grid) || !g.same_shape(&vel.grid) {
            return Err(Error::Config("initial fields live on different grids".into()));
        }
        let lap = laplacian(&phi, &bc.phi);
        let eps = params.epsilon;
        let mu = ScalarField::from_vec(
            g,
            phi.data
                .iter()
                .zip(&lap.data)
                .map(|(&f, &l)| -eps * l + double_well_prime(f) / eps)
                .collect(),
        );
        vel.sync_periodic(bc.vel.periodic_in_x(), bc.vel.periodic_in_y());
        VelocityLayout::new(g, &bc.vel).impose_walls(&mut vel);
        let state = Self {
            phi,
            mu,
            c,
            vel,
            p: ScalarField::zeros(g),
            t: 0.0,
            n: 0,
        };
        state.validate(params.q_law)?;
        Ok(state)
    }

    pub fn grid(&self) -> Grid {
        self.phi.grid
    }

    pub fn validate(&self, law: FluxLaw) -> Result<()> {
        let g = self.phi.grid;
        let same = [&self.mu.grid, &self.c.grid, &self.p.grid, &self.vel.grid]
            .iter()
            .all(|o| g.same_shape(o));
        if !same {
            return Err(Error::Consistency("state fields live on different grids".into()));
        }
        let finite = self.phi.is_finite()
            && self.mu.is_finite()
            && self.c.is_finite()
            && self.p.is_finite()
            && self.vel.is_finite();
        if !finite {
            return Err(Error::Consistency(format!("non-finite values at step {}", self.n)));
        }
        if law == FluxLaw::Logarithmic && self.c.min() <= 0.0 {
            return Err(Error::Domain("logarithmic flux law needs c > 0".into()));
        }
        Ok(())
    }
}

/// Diagnostics from one time step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub gauss_iterations: usize,
    pub gauss_increment: f64,
    /// `max |div u|` of the tentative velocity.
    pub div_tentative: f64,
    /// `max |div u|` after projection.
    pub div_projected: f64,
    pub newton_iterations: usize,
}

/// Time integrator for fixed grid, parameters and boundary conditions.
/// Factorizations that depend only on these are built once and reused.
pub struct Stepper {
    pub grid: Grid,
    pub params: PhysicalParams,
    pub cfg: SolverConfig,
    pub bc: BoundarySpec,
    layout: VelocityLayout,
    ch_solver: Option<SeparableSolver>,
    poisson: Option<SeparableSolver>,
}

impl Stepper {
    pub fn new(grid: Grid, params: PhysicalParams, cfg: SolverConfig, bc: BoundarySpec) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        bc.validate()?;
        Ok(Self {
            grid,
            params,
            cfg,
            bc,
            layout: VelocityLayout::new(grid, &bc.vel),
            ch_solver: None,
            poisson: None,
        })
    }

    fn check_grid(&self, state: &State) -> Result<()> {
        if !self.grid.same_shape(&state.grid()) {
            return Err(Error::Config("state grid does not match the stepper grid".into()));
        }
        Ok(())
    }

    /// Step 1: returns `(phi^{n+1}, mu^{n+1}, u_tilde)`.
    pub fn step1(&mut self, state: &State) -> Result<(ScalarField, ScalarField, FaceVectorField, StepStats)> {
        self.check_grid(state)?;
        let mom = momentum::MomentumSystem::assemble(state, &self.params, &self.cfg, &self.bc, &self.layout)?;
        let mut u_k = state.vel.clone();
        let mut phi_k = state.phi.clone();
        let mut mu_k = state.mu.clone();
        let mut stats = StepStats::default();
        let rel = |new: &[f64], old: &[f64]| {
            let mut diff: f64 = 0.0;
            let mut norm: f64 = 0.0;
            for (a, b) in new.iter().zip(old) {
                diff = diff.max((a - b).abs());
                norm = norm.max(a.abs());
            }
            diff / norm.max(1.0)
        };
        for it in 1..=self.cfg.gauss_max_iters {
            let (phi_new, mu_new) = cahn_hilliard::solve(
                state,
                &u_k,
                &self.params,
                &self.cfg,
                &self.bc,
                &mut self.ch_solver,
            )?;
            let u_new = mom.solve(&mu_new, &u_k, &self.params, &self.bc, &self.cfg)?;
            let inc = rel(&phi_new.data, &phi_k.data)
                .max(rel(&mu_new.data, &mu_k.data))
                .max(rel(&u_new.u, &u_k.u))
                .max(rel(&u_new.v, &u_k.v));
            phi_k = phi_new;
            mu_k = mu_new;
            u_k = u_new;
            stats.gauss_iterations = it;
            stats.gauss_increment = inc;
            if inc <= self.cfg.gauss_tol {
                log::debug!("block Gauss converged in {it} iterations (increment {inc:.2e})");
                return Ok((phi_k, mu_k, u_k, stats));
            }
        }
        Err(Error::NonConvergence {
            what: "block Gauss iteration",
            iterations: self.cfg.gauss_max_iters,
            residual: stats.gauss_increment,
        })
    }

    /// Step 2: projection of `u_tilde`; returns `(u^{n+1}, p^{n+1})`.
    pub fn step2(&mut self, u_tilde: &FaceVectorField, p_old: &ScalarField) -> Result<(FaceVectorField, ScalarField)> {
        let poisson = self
            .poisson
            .get_or_insert_with(|| SeparableSolver::new(&self.grid, &self.bc.p));
        projection::project(u_tilde, p_old, self.params.re, &self.cfg, &self.bc, poisson, &self.layout)
    }

    /// Step 3: implicit concentration update; returns `(c^{n+1}, newton iterations)`.
    pub fn step3(&self, state: &State, phi_next: &ScalarField, u_next: &FaceVectorField) -> Result<(ScalarField, usize)> {
        concentration::solve(state, phi_next, u_next, &self.params, &self.cfg, &self.bc)
    }

    /// One full step `1 -> 2 -> 3`.
    pub fn advance(&mut self, state: &State) -> Result<(State, StepStats)> {
        let (phi, mu, u_tilde, mut stats) = self.step1(state)?;
        stats.div_tentative = crate::grid::divergence(&u_tilde).max_abs();
        let (vel, p) = self.step2(&u_tilde, &state.p)?;
        stats.div_projected = crate::grid::divergence(&vel).max_abs();
        let (c, newton) = self.step3(state, &phi, &vel)?;
        stats.newton_iterations = newton;
        let next = State {
            phi,
            mu,
            c,
            vel,
            p,
            t: state.t + self.cfg.dt,
            n: state.n + 1,
        };
        next.validate(self.params.q_law)?;
        Ok((next, stats))
    }

    /// Step 3 only, with `phi` and `u` held at their current values.
    pub fn advance_frozen(&mut self, state: &State) -> Result<(State, StepStats)> {
        self.check_grid(state)?;
        let (c, newton) = self.step3(state, &state.phi, &state.vel)?;
        let next = State {
            c,
            t: state.t + self.cfg.dt,
            n: state.n + 1,
            ..state.clone()
        };
        next.validate(self.params.q_law)?;
        let div = crate::grid::divergence(&state.vel).max_abs();
        Ok((
            next,
            StepStats {
                div_tentative: div,
                div_projected: div,
                newton_iterations: newton,
                ..Default::default()
            },
        ))
    }
}

pub fn step1_phase_velocity(
    state: &State,
    p: &PhysicalParams,
    cfg: &SolverConfig,
    bc: &BoundarySpec,
) -> Result<(ScalarField, ScalarField, FaceVectorField)> {
    let mut s = Stepper::new(state.grid(), *p, *cfg, *bc)?;
    let (phi, mu, u, _) = s.step1(state)?;
    Ok((phi, mu, u))
}

pub fn step2_projection(
    u_tilde: &FaceVectorField,
    p_old: &ScalarField,
    re: f64,
    cfg: &SolverConfig,
    bc: &BoundarySpec,
) -> Result<(FaceVectorField, ScalarField)> {
    let params = PhysicalParams { re, ..Default::default() };
    let mut s = Stepper::new(u_tilde.grid, params, *cfg, *bc)?;
    s.step2(u_tilde, p_old)
}

pub fn step3_concentration(
    state: &State,
    phi_next: &ScalarField,
    u_next: &FaceVectorField,
    p: &PhysicalParams,
    cfg: &SolverConfig,
    bc: &BoundarySpec,
) -> Result<ScalarField> {
    p.validate()?;
    cfg.validate()?;
    Ok(concentration::solve(state, phi_next, u_next, p, cfg, bc)?.0)
}

pub fn advance(state: &State, p: &PhysicalParams, cfg: &SolverConfig, bc: &BoundarySpec) -> Result<State> {
    let mut s = Stepper::new(state.grid(), *p, *cfg, *bc)?;
    Ok(s.advance(state)?.0)
}

#[cfg(test)]
mod tests;
