//! Multi-bump vanishing sequences for the Rayleigh quotient.
//!
//! The sequence splits mass r into n identical narrow bumps whose centers
//! sit on a line, spacing D = separation * n. Radial quadrature handles each
//! bump on its own grid (the bumps are translates, so single-center
//! integrals add exactly), and the only inter-bump coupling, the Coulomb
//! cross energy, is summed in closed form with the far-field kernel
//! 2 m^2 / distance, which is what the wide spacing is for.
//!
//! The resulting integrals scale like A ~ n^(2/3), B ~ n^(-2/3), C ~ const,
//! so R_p(u_n) blows up for p < 3: the quotient infimum over all of H^1 is
//! zero only in the regimes where the theory says coercivity fails.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::grid::{check_exponent, RadialFunction, RadialGrid};
use crate::hartree::{hartree_energy, Integrals};
use crate::rayleigh::rayleigh;

/// Center spacing per bump index step, in units of n.
pub const DEFAULT_SEPARATION: f64 = 25.0;

/// Integrals of the n-bump trial function.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CattoRow {
    pub n: usize,
    pub mass: f64,
    pub grad_sq: f64,
    pub hartree: f64,
    pub lp: f64,
    /// None at p = 3, where the quotient is undefined.
    pub rayleigh: Option<f64>,
}

/// Catto-style vanishing sequence for n = 1..=n_max bumps of total mass r.
///
/// Each bump is a unit-width Gaussian dilated by n^(1/3), which keeps the
/// per-bump grids affordable while the kinetic term grows. The configuration
/// is rejected if the bumps are too wide for the chosen separation to make
/// the far-field cross-energy kernel honest.
pub fn catto_sequence(
    p: f64,
    q: f64,
    lambda: f64,
    r: f64,
    n_max: usize,
    separation: f64,
) -> Result<Vec<CattoRow>> {
    check_exponent(p)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(CoreError::domain("total mass r must be finite and positive"));
    }
    if !(q > 0.0 && lambda > 0.0) {
        return Err(CoreError::domain("couplings q, lambda must be positive"));
    }
    if n_max == 0 || n_max > 64 {
        return Err(CoreError::config("bump count must satisfy 1 <= n_max <= 64"));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(CoreError::config("bump separation must be finite and positive"));
    }

    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let t_n = (n as f64).powf(1.0 / 3.0);
        let sigma_n = 1.0 / t_n;
        let spacing = separation * n as f64;
        if 12.0 * sigma_n >= 0.5 * spacing {
            return Err(CoreError::config(format!(
                "bumps of width {sigma_n:.3} overlap at separation {spacing:.3}; increase separation"
            )));
        }
        let m = r / n as f64;

        let grid = std::sync::Arc::new(RadialGrid::new(40.0 / t_n, 2048)?);
        let bump = RadialFunction::gaussian(grid, sigma_n)?.project_to_sphere(m)?;
        let a_bump = bump.grad_sq();
        let c_bump = bump.lp(p)?;
        let b_bump = hartree_energy(&bump);

        // Pairwise point-charge cross terms: sum over ordered pairs i < j of
        // 2 m^2 / (spacing * (j - i)).
        let mut cross = 0.0;
        for k in 1..n {
            cross += 2.0 * m * m * (n - k) as f64 / (spacing * k as f64);
        }

        let ints = Integrals {
            mass: r,
            grad_sq: n as f64 * a_bump,
            hartree: n as f64 * b_bump + cross,
            lp: n as f64 * c_bump,
            p,
        };
        rows.push(CattoRow {
            n,
            mass: ints.mass,
            grad_sq: ints.grad_sq,
            hartree: ints.hartree,
            lp: ints.lp,
            rayleigh: rayleigh(&ints, q, lambda).ok(),
        });
    }
    Ok(rows)
}

/// Least-squares slope of ln(y) against ln(x); the empirical scaling
/// exponent of a sequence.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "slope needs at least two points");
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..lx.len() {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    num / den
}
