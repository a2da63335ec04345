//! The Newton potential of a radial charge density and the Coulomb energy.
//!
//! For radial u the Poisson problem -laplace(phi) = 4 pi u^2 has the closed
//! cumulative form
//!
//!   phi(r) = (4 pi / r) * int_0^r s^2 u(s)^2 ds + 4 pi * int_r^R s u(s)^2 ds
//!
//! which costs O(N) via two cumulative sums. The cumulative trapezoid gets
//! the same endpoint curvature correction as the grid weights,
//! cum_k -> cum_k - h^2/12 (g'_k - g'_0), which is what keeps the potential
//! accurate where the 4 pi / r prefactor amplifies small-r errors.

use std::io::Write;
use std::sync::Arc;

use crate::error::Result;
use crate::grid::{RadialFunction, RadialGrid};

/// Solution of -laplace(phi) = 4 pi u^2 sampled on the grid of u.
///
/// For nonnegative density the potential is nonnegative, nonincreasing, and
/// r*phi(r) climbs to mass(u) at the box edge (up to the leak tolerance).
#[derive(Debug, Clone)]
pub struct HartreePotential {
    grid: Arc<RadialGrid>,
    phi: Vec<f64>,
}

impl HartreePotential {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# r_max={}, n={}", self.grid.r_max(), self.grid.len())?;
        writeln!(w, "r,phi")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.phi) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }
}

/// Cumulative trapezoid of nodewise samples with the h^2/12 endpoint
/// curvature correction; result[k] approximates int_0^{r_k} g.
fn corrected_cumulative(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = cum[k - 1] + 0.5 * h * (g[k] + g[k - 1]);
    }
    let dg = |k: usize| -> f64 {
        if k == 0 {
            (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * h)
        } else {
            (g[k + 1] - g[k - 1]) / (2.0 * h)
        }
    };
    let d0 = dg(0);
    for k in 1..n {
        cum[k] -= h * h / 12.0 * (dg(k) - d0);
    }
    cum
}

/// phi_u by the radial Newton formula. At r=0 only the outer integral
/// contributes (the analytic limit, no 1/0 evaluation).
pub fn hartree_potential(u: &RadialFunction) -> HartreePotential {
    let grid = u.grid().clone();
    let r = grid.nodes();
    let h = grid.spacing();
    let n = grid.len();
    let dens: Vec<f64> = u.values().iter().map(|v| v * v).collect();

    let inner: Vec<f64> = (0..n).map(|i| r[i] * r[i] * dens[i]).collect();
    let outer: Vec<f64> = (0..n).map(|i| r[i] * dens[i]).collect();
    let cum_inner = corrected_cumulative(&inner, h);
    let cum_outer = corrected_cumulative(&outer, h);
    let total_outer = cum_outer[n - 1];

    let four_pi = 4.0 * std::f64::consts::PI;
    let mut phi = Vec::with_capacity(n);
    phi.push(four_pi * total_outer);
    for i in 1..n {
        phi.push(four_pi * (cum_inner[i] / r[i] + (total_outer - cum_outer[i])));
    }
    HartreePotential { grid, phi }
}

/// B = integral of phi_u u^2 (the Coulomb energy without its q prefactor).
pub fn hartree_energy(u: &RadialFunction) -> f64 {
    let pot = hartree_potential(u);
    let vals = u.values();
    u.grid().integrate(|i| pot.phi_values()[i] * vals[i] * vals[i])
}

/// O(N^2) double-quadrature Coulomb energy using the radial kernel
/// 1/max(r_i, r_j). Slow; kept as the independent cross-check for
/// `hartree_energy`.
pub fn hartree_energy_direct(u: &RadialFunction) -> f64 {
    let grid = u.grid();
    let r = grid.nodes();
    let w = grid.weights();
    let vals = u.values();
    let dm: Vec<f64> = (0..grid.len()).map(|i| w[i] * vals[i] * vals[i]).collect();
    let mut acc = 0.0;
    for i in 0..dm.len() {
        for j in 0..dm.len() {
            let d = r[i].max(r[j]);
            if d > 0.0 {
                acc += dm[i] * dm[j] / d;
            }
        }
    }
    acc
}

/// All four scalar integrals of the theory for one profile.
///
/// These are the coefficients every fiber map is built from; the algebraic
/// transforms below (sphere projection, dilation) apply the exact scaling
/// laws so that family searches do not accumulate re-interpolation error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Integrals {
    pub mass: f64,
    pub grad_sq: f64,
    pub hartree: f64,
    pub lp: f64,
    pub p: f64,
}

impl Integrals {
    pub fn of(u: &RadialFunction, p: f64) -> Result<Self> {
        let lp = u.lp(p)?;
        Ok(Integrals { mass: u.mass(), grad_sq: u.grad_sq(), hartree: hartree_energy(u), lp, p })
    }

    /// Exact integrals after rescaling u -> c*u.
    pub fn scaled(&self, c: f64) -> Self {
        let c2 = c * c;
        Integrals {
            mass: c2 * self.mass,
            grad_sq: c2 * self.grad_sq,
            hartree: c2 * c2 * self.hartree,
            lp: c.abs().powf(self.p) * self.lp,
            p: self.p,
        }
    }

    /// Exact integrals of the projection onto the mass sphere S_r.
    pub fn on_sphere(&self, r: f64) -> Self {
        self.scaled((r / self.mass).sqrt())
    }

    /// Exact integrals of the dilation u -> u^t.
    pub fn dilated(&self, t: f64) -> Self {
        Integrals {
            mass: self.mass,
            grad_sq: t * t * self.grad_sq,
            hartree: t * self.hartree,
            lp: t.powf(1.5 * (self.p - 2.0)) * self.lp,
            p: self.p,
        }
    }

    pub fn is_unit_mass(&self, tol: f64) -> bool {
        (self.mass - 1.0).abs() <= tol
    }
}
