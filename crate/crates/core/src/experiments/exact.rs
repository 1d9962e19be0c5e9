use std::f64::consts::PI;

/// Interface position of the sharp-limit problem.
pub const SHARP_X0: f64 = 0.5;
/// Interfaces of the two-interface problem.
pub const TWO_INTERFACE_X1: f64 = 7.0 / 18.0;
pub const TWO_INTERFACE_X2: f64 = 11.0 / 18.0;

/// Sharp-interface solution with `c(0) = 1`, `c(1) = 4`, jump at `x0 = 1/2`.
pub fn exact_sharp_limit_1d(x: f64) -> f64 {
    if x < SHARP_X0 {
        x + 1.0
    } else {
        x + 3.0
    }
}

/// Steady linear-law solution through two membranes with `K = 1/5`.
pub fn exact_two_interface(x: f64) -> f64 {
    if x < TWO_INTERFACE_X1 {
        -x / 11.0 + 2.0
    } else if x < TWO_INTERFACE_X2 {
        -x / 11.0 + 17.0 / 11.0
    } else {
        -(x - 1.0) / 11.0 + 1.0
    }
}

/// Heat kernel `exp(-|x - x0|^2 / 4Dt0) / (4 pi D t0)` centered at `(1/2, 1/2)`.
pub fn gaussian_seed(x: f64, y: f64, t0: f64, d: f64) -> f64 {
    let r2 = (x - 0.5).powi(2) + (y - 0.5).powi(2);
    (-r2 / (4.0 * d * t0)).exp() / (4.0 * PI * d * t0)
}
