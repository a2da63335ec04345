//! Uniform radial grids on [0, r_max] and sampled radial functions on R^3.
//!
//! All integrals carry the 4*pi*r^2 volume factor in the quadrature weights.
//! The trapezoid rule gets Gregory end corrections (3/8, 7/6, 23/24) so that
//! polynomial boundary layers integrate to fourth order while the interior
//! keeps the spectral accuracy of the trapezoid rule on decayed profiles; in
//! particular the weight sum reproduces the ball volume to machine precision.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{CoreError, Result};

pub const DEFAULT_R_MAX: f64 = 40.0;
pub const DEFAULT_N: usize = 4096;
/// Decay budget for u(r_max)^2 * r_max^3; profiles above this leak mass
/// through the box boundary and their integrals are not trustworthy.
pub const DEFAULT_LEAK_TOL: f64 = 1e-8;

const GREGORY_END: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

/// Uniform grid 0 = r_0 < r_1 < ... < r_{n-1} = r_max with volume weights.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(CoreError::config(format!("r_max must be positive, got {r_max}")));
        }
        if n < 16 {
            return Err(CoreError::config(format!("grid needs at least 16 nodes, got {n}")));
        }
        let h = r_max / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let mut weights = Vec::with_capacity(n);
        for (i, &r) in nodes.iter().enumerate() {
            let end = i.min(n - 1 - i);
            let c = if end < 3 { GREGORY_END[end] } else { 1.0 };
            weights.push(c * h * 4.0 * std::f64::consts::PI * r * r);
        }
        Ok(RadialGrid { r_max, n, h, nodes, weights })
    }

    pub fn default_grid() -> Arc<Self> {
        Arc::new(Self::new(DEFAULT_R_MAX, DEFAULT_N).expect("default grid parameters are valid"))
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exact ball volume (4/3) pi r_max^3; the weight sum reproduces it.
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.r_max.powi(3)
    }

    /// Quadrature of a nodewise integrand.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += self.weights[i] * f(i);
        }
        acc
    }
}

/// A radial function sampled on a shared grid. Samples must be finite; a
/// decay check against the leak tolerance guards operations that assume the
/// profile is supported inside the box.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::degenerate(format!(
                "sample count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::degenerate("non-finite sample"));
        }
        Ok(RadialFunction { grid, values })
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialFunction { grid, values: vec![0.0; n] }
    }

    pub fn from_profile(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    /// Unit-mass Gaussian of width sigma: (2 pi sigma^2)^{-3/4} e^{-r^2/(4 sigma^2)}.
    pub fn gaussian(grid: Arc<RadialGrid>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(CoreError::domain(format!("gaussian width must be positive, got {sigma}")));
        }
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.75);
        Self::from_profile(grid, |r| norm * (-r * r / (4.0 * sigma * sigma)).exp())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// u(r_max)^2 * r_max^3, the mass-scale of the tail beyond the box.
    pub fn leak(&self) -> f64 {
        let u_end = *self.values.last().expect("grids are nonempty");
        u_end * u_end * self.grid.r_max().powi(3)
    }

    /// mass = integral of u^2.
    pub fn mass(&self) -> f64 {
        self.grid.integrate(|i| self.values[i] * self.values[i])
    }

    /// A = integral of |grad u|^2, with u'(r) from fourth-order central
    /// stencils (symmetric ghost nodes at r=0, one-sided at the far end).
    pub fn grad_sq(&self) -> f64 {
        let du = self.gradient_values();
        self.grid.integrate(|i| du[i] * du[i])
    }

    /// C = integral of |u|^p for p in (2,6).
    pub fn lp(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(self.grid.integrate(|i| self.values[i].abs().powf(p)))
    }

    /// Nodewise u'(r). Radial symmetry gives the exact ghost values
    /// u(-h) = u(h), so the stencil at r=0 vanishes identically.
    pub fn gradient_values(&self) -> Vec<f64> {
        let u = &self.values;
        let n = u.len();
        let h = self.grid.spacing();
        let mut du = vec![0.0; n];
        du[0] = 0.0;
        du[1] = (-u[3] + 8.0 * u[2] - 8.0 * u[0] + u[1]) / (12.0 * h);
        for i in 2..n - 2 {
            du[i] = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
        }
        du[n - 2] = (u[n - 1] - u[n - 3]) / (2.0 * h);
        du[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        du
    }

    /// Value at an off-node radius by centered 4-point Lagrange interpolation
    /// (clamped stencils near the ends, zero beyond r_max).
    pub fn sample(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.grid.r_max() {
            return 0.0;
        }
        let n = self.values.len();
        let h = self.grid.spacing();
        let xi = x / h;
        let j = (xi.floor() as usize).min(n - 2);
        let k = j.saturating_sub(1).min(n - 4);
        let s = xi - k as f64;
        let mut acc = 0.0;
        for m in 0..4 {
            let mut ell = 1.0;
            for mm in 0..4 {
                if mm != m {
                    ell *= (s - mm as f64) / (m as f64 - mm as f64);
                }
            }
            acc += self.values[k + m] * ell;
        }
        acc
    }

    /// The mass-preserving dilation u^t(r) = t^{3/2} u(t r), sampled back on
    /// the same grid. Scaling laws: mass invariant, A -> t^2 A, B -> t B,
    /// C_p -> t^{3(p-2)/2} C_p.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        self.dilate_with_leak_tol(t, DEFAULT_LEAK_TOL)
    }

    pub fn dilate_with_leak_tol(&self, t: f64, leak_tol: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CoreError::domain(format!("dilation parameter must be positive, got {t}")));
        }
        let scale = t.powf(1.5);
        let values: Vec<f64> =
            self.grid.nodes().iter().map(|&r| scale * self.sample(t * r)).collect();
        let out = RadialFunction { grid: self.grid.clone(), values };
        if out.leak() > leak_tol {
            return Err(CoreError::degenerate(format!(
                "dilation by t={t} pushes mass through r_max (leak {:.3e} > {leak_tol:.1e})",
                out.leak()
            )));
        }
        Ok(out)
    }

    /// Rescale onto the mass sphere S_r: result has integral of u^2 equal r.
    pub fn project_to_sphere(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(CoreError::domain(format!("sphere radius must be positive, got {r}")));
        }
        let m = self.mass();
        if m <= 0.0 {
            return Err(CoreError::degenerate("cannot project the zero function to a mass sphere"));
        }
        let s = (r / m).sqrt();
        let values = self.values.iter().map(|v| s * v).collect();
        Ok(RadialFunction { grid: self.grid.clone(), values })
    }

    /// Two-column CSV with the grid declared in a comment line.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# r_max={}, n={}", self.grid.r_max(), self.grid.len())?;
        writeln!(w, "r,u")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut r_max = None;
        let mut n = None;
        let mut values = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| CoreError::config(format!("profile read failed: {e}")))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for part in rest.split(',') {
                    let mut kv = part.splitn(2, '=');
                    match (kv.next().map(str::trim), kv.next().map(str::trim)) {
                        (Some("r_max"), Some(v)) => r_max = v.parse::<f64>().ok(),
                        (Some("n"), Some(v)) => n = v.parse::<usize>().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            if line == "r,u" {
                continue;
            }
            let mut cols = line.split(',');
            let (_, u) = (cols.next(), cols.next());
            let u = u
                .ok_or_else(|| CoreError::config(format!("malformed profile row: {line}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| CoreError::config(format!("malformed profile value: {e}")))?;
            values.push(u);
        }
        let (r_max, n) = match (r_max, n) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(CoreError::config("profile CSV is missing the `# r_max=..., n=...` header")),
        };
        if values.len() != n {
            return Err(CoreError::config(format!(
                "profile declares n={n} but carries {} rows",
                values.len()
            )));
        }
        let grid = Arc::new(RadialGrid::new(r_max, n)?);
        RadialFunction::new(grid, values)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p > 2.0 && p < 6.0) {
        return Err(CoreError::domain(format!("exponent p must lie in (2,6), got {p}")));
    }
    Ok(())
}

/// integral of u^2 (the constraint value r).
pub fn integrate_mass(u: &RadialFunction) -> f64 {
    u.mass()
}

/// A = integral of |grad u|^2.
pub fn integrate_grad_sq(u: &RadialFunction) -> f64 {
    u.grad_sq()
}

/// C = integral of |u|^p.
pub fn integrate_lp(u: &RadialFunction, p: f64) -> Result<f64> {
    u.lp(p)
}

/// u^t(r) = t^{3/2} u(t r) on the same grid.
pub fn dilate(u: &RadialFunction, t: f64) -> Result<RadialFunction> {
    u.dilate(t)
}

/// Rescale u onto the mass sphere S_r.
pub fn project_to_sphere(u: &RadialFunction, r: f64) -> Result<RadialFunction> {
    u.project_to_sphere(r)
}
