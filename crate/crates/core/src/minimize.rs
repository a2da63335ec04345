//! Energy minimization: ground states on the mass sphere, Nehari-component
//! minimization through exact fiber projection, and the unboundedness test.
//!
//! The sphere minimizer runs a semi-implicit gradient flow: the stiff
//! Laplacian is treated implicitly (one tridiagonal solve per step), the
//! Hartree and power nonlinearities explicitly, followed by mass projection.
//! Energy acceptance keeps the flow monotone, and a periodic exact dilation
//! to the fiber minimum removes the slow scaling mode that plain flows crawl
//! along; a final round of such dilations polishes the Nehari residual below
//! the gradient tolerance.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::family::TrialFamily;
use crate::fiber::{
    classify_fiber, nehari_membership, pohozaev_residual, FiberMap, NehariMembership,
    NehariVerdict, PohozaevResidual,
};
use crate::grid::{check_exponent, RadialFunction, RadialGrid};
use crate::hartree::{hartree_potential, Integrals};
use crate::rayleigh::minimize_family_objective;

/// E(u) = 1/2 A + q/4 B - lambda/p C.
pub fn energy(ints: &Integrals, q: f64, lambda: f64) -> f64 {
    0.5 * ints.grad_sq + 0.25 * q * ints.hartree - lambda / ints.p * ints.lp
}

/// Nodewise energy gradient G = -lap u + q phi_u u - lambda |u|^{p-2} u with
/// the same second-order radial Laplacian the implicit flow uses (symmetric
/// origin row, Dirichlet far end), so flow residuals measure the operator
/// actually being driven to stationarity.
pub fn energy_gradient(u: &RadialFunction, q: f64, lambda: f64, p: f64) -> Result<Vec<f64>> {
    check_exponent(p)?;
    let grid = u.grid();
    let n = grid.len();
    let h = grid.spacing();
    let r = grid.nodes();
    let vals = u.values();
    let pot = hartree_potential(u);
    let phi = pot.phi_values();

    let mut g = vec![0.0; n];
    let nonlinear = |i: usize| -> f64 {
        q * phi[i] * vals[i] - lambda * vals[i].abs().powf(p - 2.0) * vals[i]
    };
    g[0] = -6.0 * (vals[1] - vals[0]) / (h * h) + nonlinear(0);
    for i in 1..n - 1 {
        let lap = (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (h * h)
            + (vals[i + 1] - vals[i - 1]) / (h * r[i]);
        g[i] = -lap + nonlinear(i);
    }
    g[n - 1] = 0.0;
    Ok(g)
}

/// Weighted inner product sum(w_i a_i b_i).
fn inner(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.integrate(|i| a[i] * b[i])
}

/// Solves (I + tau L) v = rhs with L the discrete radial -Laplacian:
/// symmetric origin row from lap u(0) = 6 (u_1 - u_0)/h^2, Dirichlet far end.
fn implicit_step(grid: &RadialGrid, tau: f64, rhs: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let r = grid.nodes();
    let hh = h * h;

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut d = rhs.to_vec();
    diag[0] = 1.0 + 6.0 * tau / hh;
    sup[0] = -6.0 * tau / hh;
    for i in 1..n - 1 {
        sub[i] = -tau * (1.0 / hh - 1.0 / (h * r[i]));
        diag[i] = 1.0 + 2.0 * tau / hh;
        sup[i] = -tau * (1.0 / hh + 1.0 / (h * r[i]));
    }
    sub[n - 1] = 0.0;
    diag[n - 1] = 1.0;
    d[n - 1] = 0.0;

    // Thomas sweep.
    let mut c_star = vec![0.0; n];
    c_star[0] = sup[0] / diag[0];
    d[0] /= diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c_star[i - 1];
        c_star[i] = sup[i] / m;
        d[i] = (d[i] - sub[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c_star[i] * d[i + 1];
    }
    d
}

#[derive(Debug, Clone, Copy)]
pub struct GroundStateOptions {
    pub max_iter: usize,
    /// Relative residual target for the projected gradient.
    pub tol: f64,
    pub tau_init: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Dilate to the exact fiber minimum every this many accepted steps.
    pub redilate_every: usize,
    /// Final fiber-dilation rounds and the |Q|/A target they aim for.
    pub polish_rounds: usize,
    pub polish_target: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        GroundStateOptions {
            max_iter: 40_000,
            tol: 1e-8,
            tau_init: 5.0,
            tau_min: 0.5,
            tau_max: 200.0,
            redilate_every: 25,
            polish_rounds: 6,
            polish_target: 2e-7,
        }
    }
}

/// Everything the sphere minimization reports about its final iterate. The
/// `converged` flag is computed from the invariant checks (gradient
/// residual, Pohozaev identity, Nehari membership), never just asserted.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub r: f64,
    pub converged: bool,
    pub iterations: usize,
    pub energy: f64,
    /// Lagrange multiplier ell = <G, u> / r.
    pub multiplier: f64,
    /// Weighted norm of G - ell u.
    pub residual: f64,
    pub integrals: Integrals,
    pub nehari: NehariMembership,
    pub pohozaev: PohozaevResidual,
    /// Fiber minimum location of the final iterate (1 at a true minimizer).
    pub fiber_t: f64,
    /// |phi(fiber_t) - E| / (1 + |E|): energy consistency along the fiber.
    pub fiber_consistency: f64,
    /// Energy after every `trace_stride`-th accepted step.
    pub trace_stride: usize,
    pub trace_energies: Vec<f64>,
}

fn sphere_preconditions(p: f64, q: f64, lambda: f64, r: f64) -> Result<()> {
    check_exponent(p)?;
    if p >= 10.0 / 3.0 - 1e-12 {
        return Err(CoreError::domain(
            "the sphere infimum is -infinity for p >= 10/3; minimize on a Nehari component instead",
        ));
    }
    if !(q >= 0.0 && lambda > 0.0 && r > 0.0) {
        return Err(CoreError::domain("couplings must satisfy q >= 0, lambda > 0, r > 0"));
    }
    Ok(())
}

/// Minimizes E on the mass sphere S_r for p < 10/3 (where the infimum is
/// finite) by semi-implicit projected gradient flow from the best Gaussian
/// width found by a coarse line search. Reaching max_iter is not an error:
/// the report carries the honest convergence verdict either way.
pub fn minimize_on_sphere(
    grid: Arc<RadialGrid>,
    p: f64,
    q: f64,
    lambda: f64,
    r: f64,
    opts: &GroundStateOptions,
) -> Result<(RadialFunction, SolveReport)> {
    sphere_preconditions(p, q, lambda, r)?;
    let mut seed: Option<(f64, RadialFunction)> = None;
    for k in 0..24 {
        let sigma = 2.0 * 30f64.powf(k as f64 / 23.0);
        let candidate = RadialFunction::gaussian(grid.clone(), sigma)
            .and_then(|g| g.project_to_sphere(r))
            .and_then(|c| Integrals::of(&c, p).map(|ints| (energy(&ints, q, lambda), c)));
        if let Ok((e, c)) = candidate {
            if seed.as_ref().map_or(true, |(best, _)| e < *best) {
                seed = Some((e, c));
            }
        }
    }
    let (e0, u0) = seed.ok_or_else(|| CoreError::Numerical {
        context: "no admissible Gaussian seed on this grid".into(),
        residual: f64::NAN,
        iterations: 0,
    })?;
    run_flow(u0, e0, p, q, lambda, r, opts)
}

/// Same flow started from a caller-supplied profile (projected onto S_r
/// first), for robustness runs against alternative initializations.
pub fn minimize_on_sphere_from(
    init: &RadialFunction,
    p: f64,
    q: f64,
    lambda: f64,
    r: f64,
    opts: &GroundStateOptions,
) -> Result<(RadialFunction, SolveReport)> {
    sphere_preconditions(p, q, lambda, r)?;
    let u0 = init.project_to_sphere(r)?;
    let e0 = energy(&Integrals::of(&u0, p)?, q, lambda);
    run_flow(u0, e0, p, q, lambda, r, opts)
}

fn run_flow(
    mut u: RadialFunction,
    mut e_old: f64,
    p: f64,
    q: f64,
    lambda: f64,
    r: f64,
    opts: &GroundStateOptions,
) -> Result<(RadialFunction, SolveReport)> {
    let grid = u.grid().clone();
    let slack = |e: f64| 1e-12 * (1.0 + e.abs());
    let mut tau = opts.tau_init;
    let mut iterations = 0usize;
    let mut accepted = 0usize;
    let mut trace = vec![e_old];

    for iter in 0..opts.max_iter {
        iterations = iter + 1;

        let pot = hartree_potential(&u);
        let vals = u.values();
        let phi = pot.phi_values();
        let rhs: Vec<f64> = (0..grid.len())
            .map(|i| {
                let f = q * phi[i] * vals[i] - lambda * vals[i].abs().powf(p - 2.0) * vals[i];
                vals[i] - tau * f
            })
            .collect();
        let stepped = implicit_step(&grid, tau, &rhs);
        let candidate = RadialFunction::new(grid.clone(), stepped)
            .and_then(|v| v.project_to_sphere(r))
            .and_then(|c| Integrals::of(&c, p).map(|ints| (energy(&ints, q, lambda), c)));

        match candidate {
            Ok((e_new, cand)) if e_new <= e_old + slack(e_old) => {
                u = cand;
                e_old = e_new;
                accepted += 1;
                tau = (tau * 1.05).min(opts.tau_max);
                if accepted % 25 == 0 {
                    trace.push(e_old);
                }
            }
            _ => {
                if tau <= opts.tau_min {
                    break;
                }
                tau = (tau * 0.5).max(opts.tau_min);
                continue;
            }
        }

        if opts.redilate_every > 0 && accepted % opts.redilate_every == 0 {
            if let Some((e_new, better)) = fiber_redilate(&u, p, q, lambda, r, e_old) {
                u = better;
                e_old = e_new;
            }
        }

        if iter % 5 == 4 {
            let g = energy_gradient(&u, q, lambda, p)?;
            let ell = inner(&grid, &g, u.values()) / r;
            let res: f64 = grid
                .integrate(|i| {
                    let d = g[i] - ell * u.values()[i];
                    d * d
                })
                .sqrt();
            if res < opts.tol * (1.0 + e_old.abs()) {
                break;
            }
        }
    }

    // Exact-dilation polish of the Nehari residual.
    for _ in 0..opts.polish_rounds {
        let ints = Integrals::of(&u, p)?;
        let map = FiberMap::new(&ints, q, lambda, r)?;
        if map.dphi(1.0).abs() <= opts.polish_target * ints.grad_sq {
            break;
        }
        let Ok(cls) = classify_fiber(&map) else { break };
        let Some(t) = cls.minimum() else { break };
        if (t - 1.0).abs() < 1e-15 {
            break;
        }
        match u.dilate_with_leak_tol(t, 1e-6).and_then(|d| d.project_to_sphere(r)) {
            Ok(d) => u = d,
            Err(_) => break,
        }
    }

    let ints = Integrals::of(&u, p)?;
    let e_final = energy(&ints, q, lambda);
    trace.push(e_final);
    let g = energy_gradient(&u, q, lambda, p)?;
    let ell = inner(&grid, &g, u.values()) / r;
    let residual: f64 = grid
        .integrate(|i| {
            let d = g[i] - ell * u.values()[i];
            d * d
        })
        .sqrt();
    let nehari = nehari_membership(&ints, q, lambda, r)?;
    let pohozaev = pohozaev_residual(&ints, 1.0, -ell, q, -lambda);
    let map = FiberMap::new(&ints, q, lambda, r)?;
    let (fiber_t, fiber_consistency) = match classify_fiber(&map).ok().and_then(|c| c.minimum()) {
        Some(t) => (t, (map.phi(t) - e_final).abs() / (1.0 + e_final.abs())),
        None => (f64::NAN, f64::NAN),
    };
    let converged = residual < opts.tol * (1.0 + e_final.abs())
        && pohozaev.normalized < 1e-5
        && nehari.verdict != NehariVerdict::NotMember;

    let report = SolveReport {
        p,
        q,
        lambda,
        r,
        converged,
        iterations,
        energy: e_final,
        multiplier: ell,
        residual,
        integrals: ints,
        nehari,
        pohozaev,
        fiber_t,
        fiber_consistency,
        trace_stride: 25,
        trace_energies: trace,
    };
    Ok((u, report))
}

/// One exact dilation to the fiber minimum, if it exists, helps, and stays
/// inside the box.
fn fiber_redilate(
    u: &RadialFunction,
    p: f64,
    q: f64,
    lambda: f64,
    r: f64,
    e_old: f64,
) -> Option<(f64, RadialFunction)> {
    let ints = Integrals::of(u, p).ok()?;
    let map = FiberMap::new(&ints, q, lambda, r).ok()?;
    let t = classify_fiber(&map).ok()?.minimum()?;
    if (t - 1.0).abs() <= 1e-12 {
        return None;
    }
    let cand = u.dilate_with_leak_tol(t, 1e-6).ok()?.project_to_sphere(r).ok()?;
    let e_new = energy(&Integrals::of(&cand, p).ok()?, q, lambda);
    if e_new <= e_old + 1e-12 * (1.0 + e_old.abs()) {
        Some((e_new, cand))
    } else {
        None
    }
}

/// Which Nehari component to minimize over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NehariSide {
    /// N+ together with N0: fiber minima and degenerate points.
    #[serde(rename = "plus_union_zero")]
    PlusUnionZero,
    /// N-: fiber maxima.
    #[serde(rename = "minus")]
    Minus,
}

impl std::fmt::Display for NehariSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NehariSide::PlusUnionZero => f.write_str("plus_union_zero"),
            NehariSide::Minus => f.write_str("minus"),
        }
    }
}

/// Result of minimizing E over one Nehari component of the family.
#[derive(Debug, Clone)]
pub struct NehariMinimization {
    /// Best fiber value found: the I_r (plus side) or J_r (minus side) estimate.
    pub value: f64,
    pub params: Vec<f64>,
    /// Fiber parameter of the winning profile.
    pub t: f64,
    pub verdict: NehariVerdict,
    pub evaluations: usize,
    /// Best-so-far trace of the family search.
    pub trace: Vec<f64>,
    /// The winning member r^{1/2} u^t materialized on the grid; None when
    /// the dilation pushes visible mass through the box boundary.
    pub witness: Option<RadialFunction>,
}

/// Minimizes E over { r^{1/2} u^t : u in the family, t a fiber critical
/// point of the requested kind }. The projection onto the Nehari set is
/// exact (closed-form classification per candidate), so every evaluated
/// value is a true member energy. Errors with `EmptyNehari` when no
/// candidate in the budget has a critical point of the requested kind.
pub fn minimize_nehari(
    family: &TrialFamily,
    p: f64,
    q: f64,
    lambda: f64,
    r: f64,
    side: NehariSide,
    budget: usize,
    seed: u64,
) -> Result<NehariMinimization> {
    check_exponent(p)?;
    if !(q >= 0.0 && lambda > 0.0 && r > 0.0) {
        return Err(CoreError::domain("couplings must satisfy q >= 0, lambda > 0, r > 0"));
    }
    let fiber_t = |ints: &Integrals| -> Option<(FiberMap, f64)> {
        let map = FiberMap::new(ints, q, lambda, r).ok()?;
        let cls = classify_fiber(&map).ok()?;
        let t = match side {
            NehariSide::PlusUnionZero => cls.minimum().or_else(|| cls.degenerate()),
            NehariSide::Minus => cls.maximum(),
        }?;
        Some((map, t))
    };

    let search = minimize_family_objective(
        family,
        p,
        budget,
        seed,
        |ints| match fiber_t(ints) {
            Some((map, t)) => map.phi(t),
            None => f64::INFINITY,
        },
        "nehari component minimization",
    )
    .map_err(|e| match e {
        CoreError::Numerical { .. } => CoreError::EmptyNehari(format!(
            "no {side} fiber critical point across the family at r = {r}"
        )),
        other => other,
    })?;

    let u = family.materialize(&search.params)?;
    let ints = Integrals::of(&u, p)?;
    let (map, t) = fiber_t(&ints).ok_or_else(|| {
        CoreError::EmptyNehari(format!("winning candidate lost its {side} critical point"))
    })?;
    let dd = map.ddphi(t);
    let dd_scale = map.ddphi_scale(t);
    let verdict = if dd > 1e-6 * dd_scale {
        NehariVerdict::Plus
    } else if dd < -1e-6 * dd_scale {
        NehariVerdict::Minus
    } else {
        NehariVerdict::Zero
    };
    let witness = u
        .project_to_sphere(1.0)
        .and_then(|w| w.dilate_with_leak_tol(t, 1e-6))
        .and_then(|w| w.project_to_sphere(r))
        .ok();

    Ok(NehariMinimization {
        value: search.value,
        params: search.params,
        t,
        verdict,
        evaluations: search.evaluations,
        trace: search.trace,
        witness,
    })
}

/// True when the fiber of this profile witnesses E being unbounded below on
/// S_r: phi strictly decreasing along t = 10, 10^2, 10^3, 10^4 and below
/// -1e6 at the last probe. Accepts any nonzero profile (normalized
/// internally). Only meaningful for p >= 10/3, and refuses below.
pub fn detect_unbounded(u: &RadialFunction, p: f64, q: f64, lambda: f64, r: f64) -> Result<bool> {
    check_exponent(p)?;
    if p < 10.0 / 3.0 - 1e-12 {
        return Err(CoreError::domain(
            "unboundedness probe applies only to p >= 10/3; the sphere infimum is finite below",
        ));
    }
    let ints = Integrals::of(u, p)?;
    let map = FiberMap::new(&ints, q, lambda, r)?;
    let mut prev = map.phi(10.0);
    for k in 2..=4 {
        let v = map.phi(10f64.powi(k));
        if v >= prev {
            return Ok(false);
        }
        prev = v;
    }
    Ok(prev < -1e6)
}
