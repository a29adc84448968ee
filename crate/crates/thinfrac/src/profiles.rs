//! Canned boundary-data profiles sampled onto grids.

use crate::barriers::u_profile;
use crate::field::ScalarField;
use crate::grid::GridSpec;

/// The model profile `U(x_n, y)`.
pub fn sample_u(grid: GridSpec, s: f64) -> ScalarField {
    let n = grid.dim_x;
    let mut f = ScalarField::from_fn(grid, |x, y| u_profile(x[n - 1], y, s));
    f.dump_s = Some(s);
    f
}

/// Tilted profile `U(x . nu, y)` for a unit direction `nu` in the thin space.
pub fn sample_u_tilted(grid: GridSpec, s: f64, nu: &[f64]) -> ScalarField {
    let nu = nu.to_vec();
    let mut f = ScalarField::from_fn(grid, move |x, y| {
        let t: f64 = x.iter().zip(&nu).map(|(a, b)| a * b).sum();
        u_profile(t, y, s)
    });
    f.dump_s = Some(s);
    f
}

/// Odd two-phase pattern `U(x_n, y) - U(-x_n, y)`.
pub fn sample_two_phase(grid: GridSpec, s: f64) -> ScalarField {
    let n = grid.dim_x;
    let mut f = ScalarField::from_fn(grid, |x, y| {
        u_profile(x[n - 1], y, s) - u_profile(-x[n - 1], y, s)
    });
    f.dump_s = Some(s);
    f
}

/// The one-sided `a`-harmonic profile `y^{2s}`.
pub fn sample_y2s(grid: GridSpec, s: f64) -> ScalarField {
    let mut f = ScalarField::from_fn(grid, |_, y| y.powf(2.0 * s));
    f.dump_s = Some(s);
    f
}
