//! Dimensionless parameters and the constitutive functions of the model:
//! the flux law, the restricted-diffusion effective diffusivity, the
//! double-well potential and the interface-profile constants.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Trans-membrane flux law `Q(c)` with `q = dQ/dc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxLaw {
    /// `Q(c) = c`
    Linear,
    /// `Q(c) = ln c`
    Logarithmic,
}

impl FluxLaw {
    pub fn name(&self) -> &'static str {
        match self {
            FluxLaw::Linear => "linear",
            FluxLaw::Logarithmic => "log",
        }
    }
}

/// Floor applied to `c` when the solver loop evaluates the logarithmic law.
pub const SOLVER_C_FLOOR: f64 = 1e-12;

/// `dQ/dc` for the chosen law.
pub fn q_of_c(c: f64, law: FluxLaw) -> Result<f64> {
    match law {
        FluxLaw::Linear => Ok(1.0),
        FluxLaw::Logarithmic => {
            if c > 0.0 {
                Ok(1.0 / c)
            } else {
                Err(Error::Domain(format!(
                    "logarithmic flux law needs c > 0, got {c}"
                )))
            }
        }
    }
}

/// Solver-side variant of [`q_of_c`] that floors `c` instead of failing.
#[inline]
pub(crate) fn q_of_c_floored(c: f64, law: FluxLaw) -> f64 {
    match law {
        FluxLaw::Linear => 1.0,
        FluxLaw::Logarithmic => 1.0 / c.max(SOLVER_C_FLOOR),
    }
}

/// Constants of the leading-order tanh interface profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    /// Surface tension constant `2*sqrt(2)/3`.
    pub sigma: f64,
    /// Profile integral of `(1 - tanh^2)^2`, equal to `2*sigma`.
    pub a: f64,
}

impl AsymptoticConstants {
    pub fn new() -> Self {
        let sigma = 2.0 * SQRT_2 / 3.0;
        Self {
            sigma,
            a: 2.0 * sigma,
        }
    }
}

impl Default for AsymptoticConstants {
    fn default() -> Self {
        Self::new()
    }
}

pub const SIGMA: f64 = 2.0 * SQRT_2 / 3.0;
pub const PROFILE_A: f64 = 4.0 * SQRT_2 / 3.0;

/// Dimensionless model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub re: f64,
    pub ca: f64,
    pub pe: f64,
    pub epsilon: f64,
    pub mobility: f64,
    /// Interface permeability.
    pub k: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    /// Stabilization constant of the linear Cahn-Hilliard step.
    pub s: f64,
    pub q_law: FluxLaw,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            re: 1.0,
            ca: 1.0,
            pe: 1.0,
            epsilon: 0.02,
            mobility: 0.02,
            k: 1.0 / PROFILE_A,
            d_plus: 1.0,
            d_minus: 1.0,
            s: 2.0,
            q_law: FluxLaw::Linear,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("Re", self.re),
            ("Ca", self.ca),
            ("Pe", self.pe),
            ("epsilon", self.epsilon),
            ("M", self.mobility),
            ("D_plus", self.d_plus),
            ("D_minus", self.d_minus),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::Config(format!("K must be nonnegative, got {}", self.k)));
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(Error::Config(format!("s must be nonnegative, got {}", self.s)));
        }
        Ok(())
    }
}

/// Restricted-diffusion coefficient
/// `1/D = (1-phi^2)^2/(A K q eps) + (1-phi)/(2 D-) + (1+phi)/(2 D+)`.
///
/// `phi` is clamped to `[-1, 1]` first. With `K = 0` the interface is
/// impermeable and the result is exactly zero for `|phi| < 1`.
pub fn effective_diffusivity(phi: f64, q: f64, p: &PhysicalParams, a: f64) -> f64 {
    let phi = phi.clamp(-1.0, 1.0);
    let well = (1.0 - phi * phi).powi(2);
    let bulk = (1.0 - phi) / (2.0 * p.d_minus) + (1.0 + phi) / (2.0 * p.d_plus);
    if well == 0.0 {
        return 1.0 / bulk;
    }
    if p.k == 0.0 {
        return 0.0;
    }
    let inv = well / (a * p.k * q * p.epsilon) + bulk;
    1.0 / inv
}

/// Leading-order interface profile `tanh(d / (sqrt(2) eps))`.
pub fn tanh_profile(signed_distance: f64, epsilon: f64) -> f64 {
    (signed_distance / (SQRT_2 * epsilon)).tanh()
}

/// `G(phi) = (1 - phi^2)^2 / 4`.
#[inline]
pub fn double_well(phi: f64) -> f64 {
    0.25 * (1.0 - phi * phi).powi(2)
}

/// `G'(phi) = phi^3 - phi`.
#[inline]
pub fn double_well_prime(phi: f64) -> f64 {
    phi * (phi * phi - 1.0)
}
