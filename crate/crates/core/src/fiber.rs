//! Fiber maps of the constrained energy and their critical-point taxonomy.
//!
//! For a unit-mass profile u with integrals A = grad_sq, B = hartree,
//! C = lp, the energy of the dilated, mass-r rescaling r^{1/2} u^t is
//!
//!   phi(t) = t^2/2 r A + t/4 r^2 qB - t^(3p/2-3)/p r^(p/2) lC
//!
//! with derivatives
//!
//!   phi'(t)  = t r A + r^2/4 qB - 3(p-2)/(2p) t^(3p/2-4) r^(p/2) lC
//!   phi''(t) = r A - 3(p-2)(3p-8)/(4p) t^(3p/2-5) r^(p/2) lC
//!
//! The shape of phi is decided entirely by where p sits relative to 8/3
//! and 10/3 (the exponents where phi' loses its singular, respectively
//! superlinear, behaviour), which gives the five-case classification
//! implemented here.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::grid::check_exponent;
use crate::hartree::Integrals;

/// Width of the interval around 8/3 and 10/3 treated as the boundary case.
const P_BOUNDARY_TOL: f64 = 1e-12;

/// Relative tolerance for detecting a degenerate (coalesced) critical pair.
const COALESCE_TOL: f64 = 1e-6;

/// Target relative residual of phi' at a reported critical point.
const ROOT_RESIDUAL_TOL: f64 = 1e-9;

/// One fiber of the constrained problem: mass radius r, exponent p, and the
/// unit-sphere integrals of the underlying profile with the physical
/// couplings already folded in.
#[derive(Debug, Clone, Copy)]
pub struct FiberMap {
    /// A = grad_sq of the unit-mass profile.
    pub grad_sq: f64,
    /// q * B of the unit-mass profile.
    pub hartree_q: f64,
    /// lambda * C of the unit-mass profile.
    pub lp_lambda: f64,
    pub p: f64,
    pub r: f64,
}

impl FiberMap {
    /// Builds the fiber map over the mass sphere S_r from integrals of any
    /// nonzero profile; the unit-sphere normalization is applied
    /// algebraically so no regridding error enters.
    pub fn new(ints: &Integrals, q: f64, lambda: f64, r: f64) -> Result<Self> {
        check_exponent(ints.p)?;
        if !(q.is_finite() && q >= 0.0) {
            return Err(CoreError::domain("coulomb coupling q must be finite and nonnegative"));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(CoreError::domain("focusing coupling lambda must be finite and positive"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(CoreError::domain("mass radius r must be finite and positive"));
        }
        if !(ints.mass > 0.0) {
            return Err(CoreError::degenerate("fiber map needs a profile with positive mass"));
        }
        let s1 = ints.on_sphere(1.0);
        if !(s1.grad_sq > 0.0 && s1.lp > 0.0 && s1.hartree >= 0.0) {
            return Err(CoreError::degenerate(
                "fiber map needs positive gradient and L^p integrals",
            ));
        }
        Ok(FiberMap {
            grad_sq: s1.grad_sq,
            hartree_q: q * s1.hartree,
            lp_lambda: lambda * s1.lp,
            p: s1.p,
            r,
        })
    }

    /// Assembles a map directly from unit-sphere coefficients. Intended for
    /// closed-form cross-checks where A, qB, lC are prescribed numbers.
    pub fn from_coefficients(grad_sq: f64, hartree_q: f64, lp_lambda: f64, p: f64, r: f64) -> Result<Self> {
        check_exponent(p)?;
        if !(grad_sq > 0.0 && lp_lambda > 0.0 && hartree_q >= 0.0 && r > 0.0) {
            return Err(CoreError::domain(
                "fiber coefficients must satisfy A > 0, qB >= 0, lC > 0, r > 0",
            ));
        }
        Ok(FiberMap { grad_sq, hartree_q, lp_lambda, p, r })
    }

    pub fn phi(&self, t: f64) -> f64 {
        let p = self.p;
        0.5 * t * t * self.r * self.grad_sq + 0.25 * t * self.r * self.r * self.hartree_q
            - t.powf(1.5 * p - 3.0) / p * self.r.powf(0.5 * p) * self.lp_lambda
    }

    pub fn dphi(&self, t: f64) -> f64 {
        let p = self.p;
        t * self.r * self.grad_sq + 0.25 * self.r * self.r * self.hartree_q
            - 1.5 * (p - 2.0) / p * t.powf(1.5 * p - 4.0) * self.r.powf(0.5 * p) * self.lp_lambda
    }

    pub fn ddphi(&self, t: f64) -> f64 {
        let p = self.p;
        self.r * self.grad_sq
            - 0.75 * (p - 2.0) * (3.0 * p - 8.0) / p
                * t.powf(1.5 * p - 5.0)
                * self.r.powf(0.5 * p)
                * self.lp_lambda
    }

    /// d/dr of phi at fixed t (the radius derivative along the mass scale).
    pub fn dphi_dr(&self, t: f64) -> f64 {
        let p = self.p;
        0.5 * t * t * self.grad_sq + 0.5 * t * self.r * self.hartree_q
            - 0.5 * t.powf(1.5 * p - 3.0) * self.r.powf(0.5 * p - 1.0) * self.lp_lambda
    }

    /// d/dr of phi(t)/r at fixed t.
    pub fn d_dr_phi_over_r(&self, t: f64) -> f64 {
        let p = self.p;
        0.25 * t * self.hartree_q
            - (0.5 * p - 1.0) / p * t.powf(1.5 * p - 3.0) * self.r.powf(0.5 * p - 2.0) * self.lp_lambda
    }

    /// Dilation derivative of the energy at the point r^{1/2} u^t itself:
    /// Q(r^{1/2} u^t) = t phi'(t).
    pub fn nehari_functional(&self, t: f64) -> f64 {
        t * self.dphi(t)
    }

    /// Sum of term magnitudes of phi at t; the scale for relative residuals.
    pub fn phi_scale(&self, t: f64) -> f64 {
        let p = self.p;
        0.5 * t * t * self.r * self.grad_sq
            + 0.25 * t * self.r * self.r * self.hartree_q
            + t.powf(1.5 * p - 3.0) / p * self.r.powf(0.5 * p) * self.lp_lambda
    }

    pub fn dphi_scale(&self, t: f64) -> f64 {
        let p = self.p;
        t * self.r * self.grad_sq
            + 0.25 * self.r * self.r * self.hartree_q
            + 1.5 * (p - 2.0) / p * t.powf(1.5 * p - 4.0) * self.r.powf(0.5 * p) * self.lp_lambda
    }

    pub fn ddphi_scale(&self, t: f64) -> f64 {
        let p = self.p;
        self.r * self.grad_sq
            + (0.75 * (p - 2.0) * (3.0 * p - 8.0) / p).abs()
                * t.powf(1.5 * p - 5.0)
                * self.r.powf(0.5 * p)
                * self.lp_lambda
    }

    pub fn dphi_dr_scale(&self, t: f64) -> f64 {
        let p = self.p;
        0.5 * t * t * self.grad_sq
            + 0.5 * t * self.r * self.hartree_q
            + 0.5 * t.powf(1.5 * p - 3.0) * self.r.powf(0.5 * p - 1.0) * self.lp_lambda
    }

    pub fn d_dr_phi_over_r_scale(&self, t: f64) -> f64 {
        let p = self.p;
        0.25 * t * self.hartree_q
            + ((0.5 * p - 1.0) / p).abs()
                * t.powf(1.5 * p - 3.0)
                * self.r.powf(0.5 * p - 2.0)
                * self.lp_lambda
    }
}

/// phi, phi', phi'' of the fiber through `ints` at dilation t.
pub fn fiber_eval(ints: &Integrals, q: f64, lambda: f64, r: f64, t: f64) -> Result<(f64, f64, f64)> {
    let map = FiberMap::new(ints, q, lambda, r)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(CoreError::domain("fiber parameter t must be finite and positive"));
    }
    Ok((map.phi(t), map.dphi(t), map.ddphi(t)))
}

/// The five-case taxonomy (sub-cases resolve how many critical points exist).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FiberCase {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II-1")]
    II1,
    #[serde(rename = "II-2")]
    II2,
    #[serde(rename = "III-1")]
    III1,
    #[serde(rename = "III-2")]
    III2,
    #[serde(rename = "III-3")]
    III3,
    #[serde(rename = "IV-1")]
    IV1,
    #[serde(rename = "IV-2")]
    IV2,
    #[serde(rename = "V")]
    V,
}

impl std::fmt::Display for FiberCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FiberCase::I => "I",
            FiberCase::II1 => "II-1",
            FiberCase::II2 => "II-2",
            FiberCase::III1 => "III-1",
            FiberCase::III2 => "III-2",
            FiberCase::III3 => "III-3",
            FiberCase::IV1 => "IV-1",
            FiberCase::IV2 => "IV-2",
            FiberCase::V => "V",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriticalKind {
    #[serde(rename = "min")]
    Minimum,
    #[serde(rename = "max")]
    Maximum,
    #[serde(rename = "degenerate")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalPoint {
    pub t: f64,
    #[serde(rename = "type")]
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberClassification {
    pub case: FiberCase,
    /// Critical points of phi, ascending in t.
    pub critical_points: Vec<CriticalPoint>,
}

impl FiberClassification {
    /// The local minimum (Nehari-plus point), if the case has one.
    pub fn minimum(&self) -> Option<f64> {
        self.critical_points
            .iter()
            .find(|cp| cp.kind == CriticalKind::Minimum)
            .map(|cp| cp.t)
    }

    /// The local maximum (Nehari-minus point), if the case has one.
    pub fn maximum(&self) -> Option<f64> {
        self.critical_points
            .iter()
            .find(|cp| cp.kind == CriticalKind::Maximum)
            .map(|cp| cp.t)
    }

    /// The degenerate point of a coalesced pair, if the case has one.
    pub fn degenerate(&self) -> Option<f64> {
        self.critical_points
            .iter()
            .find(|cp| cp.kind == CriticalKind::Degenerate)
            .map(|cp| cp.t)
    }
}

/// Classifies the fiber map by exponent regime and locates every critical
/// point of phi on (0, inf).
pub fn classify_fiber(map: &FiberMap) -> Result<FiberClassification> {
    let p = map.p;
    if (p - 8.0 / 3.0).abs() <= P_BOUNDARY_TOL {
        return classify_case_ii(map);
    }
    if (p - 10.0 / 3.0).abs() <= P_BOUNDARY_TOL {
        return classify_case_iv(map);
    }
    if p < 8.0 / 3.0 {
        // phi'' > 0 everywhere, phi' runs from -inf to +inf: one minimum.
        let t = locate_roots(map, 1, FiberCase::I)?[0];
        return Ok(FiberClassification {
            case: FiberCase::I,
            critical_points: vec![CriticalPoint { t, kind: CriticalKind::Minimum }],
        });
    }
    if p < 10.0 / 3.0 {
        return classify_case_iii(map);
    }
    // p > 10/3: phi' starts positive and falls superlinearly: one maximum.
    let t = locate_roots(map, 1, FiberCase::V)?[0];
    Ok(FiberClassification {
        case: FiberCase::V,
        critical_points: vec![CriticalPoint { t, kind: CriticalKind::Maximum }],
    })
}

/// p = 8/3: phi' is affine in t, slope r A.
fn classify_case_ii(map: &FiberMap) -> Result<FiberClassification> {
    let offset =
        0.25 * map.r * map.r * map.hartree_q - 0.375 * map.r.powf(4.0 / 3.0) * map.lp_lambda;
    if offset < 0.0 {
        let t = -offset / (map.r * map.grad_sq);
        Ok(FiberClassification {
            case: FiberCase::II1,
            critical_points: vec![CriticalPoint { t, kind: CriticalKind::Minimum }],
        })
    } else {
        Ok(FiberClassification { case: FiberCase::II2, critical_points: vec![] })
    }
}

/// p = 10/3: phi is a pure quadratic-plus-linear in t.
fn classify_case_iv(map: &FiberMap) -> Result<FiberClassification> {
    let quad = 0.5 * map.r * map.grad_sq - 0.3 * map.r.powf(5.0 / 3.0) * map.lp_lambda;
    if quad < 0.0 {
        let t = -0.25 * map.r * map.r * map.hartree_q / (2.0 * quad);
        Ok(FiberClassification {
            case: FiberCase::IV1,
            critical_points: vec![CriticalPoint { t, kind: CriticalKind::Maximum }],
        })
    } else {
        Ok(FiberClassification { case: FiberCase::IV2, critical_points: vec![] })
    }
}

/// p in (8/3, 10/3): phi' dips from a positive start; the dip bottom is the
/// inflection of phi and its sign decides between two, one, or no roots.
fn classify_case_iii(map: &FiberMap) -> Result<FiberClassification> {
    let p = map.p;
    let d = 0.75 * (p - 2.0) * (3.0 * p - 8.0) / p * map.r.powf(0.5 * p) * map.lp_lambda;
    let t_infl = (map.r * map.grad_sq / d).powf(1.0 / (1.5 * p - 5.0));
    let dip = map.dphi(t_infl);
    let scale = map.r * map.grad_sq * t_infl + 0.25 * map.r * map.r * map.hartree_q;
    if dip.abs() <= COALESCE_TOL * scale {
        return Ok(FiberClassification {
            case: FiberCase::III2,
            critical_points: vec![CriticalPoint { t: t_infl, kind: CriticalKind::Degenerate }],
        });
    }
    if dip > 0.0 {
        return Ok(FiberClassification { case: FiberCase::III3, critical_points: vec![] });
    }
    let roots = locate_roots(map, 2, FiberCase::III1)?;
    Ok(FiberClassification {
        case: FiberCase::III1,
        critical_points: vec![
            CriticalPoint { t: roots[0], kind: CriticalKind::Maximum },
            CriticalPoint { t: roots[1], kind: CriticalKind::Minimum },
        ],
    })
}

/// Finds the sign-change roots of phi'. A log-spaced scan brackets them; if
/// the scan misses, case-specific analytic brackets recover them. Each root
/// is refined by bisection plus a short Newton polish.
fn locate_roots(map: &FiberMap, expected: usize, case: FiberCase) -> Result<Vec<f64>> {
    const SCAN_POINTS: usize = 512;
    let (lo_exp, hi_exp) = (-6.0f64, 6.0f64);
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut prev_t = 10f64.powf(lo_exp);
    let mut prev_v = map.dphi(prev_t);
    for k in 1..SCAN_POINTS {
        let t = 10f64.powf(lo_exp + (hi_exp - lo_exp) * k as f64 / (SCAN_POINTS - 1) as f64);
        let v = map.dphi(t);
        if prev_v == 0.0 {
            brackets.push((prev_t, prev_t));
        } else if prev_v * v < 0.0 {
            brackets.push((prev_t, t));
        }
        prev_t = t;
        prev_v = v;
    }
    if brackets.len() < expected {
        brackets = analytic_brackets(map, case)?;
    }
    if brackets.len() != expected {
        return Err(CoreError::Numerical {
            context: format!(
                "fiber case {case}: expected {expected} critical points, bracketed {}",
                brackets.len()
            ),
            residual: f64::NAN,
            iterations: SCAN_POINTS,
        });
    }
    brackets.into_iter().map(|(lo, hi)| refine_root(map, lo, hi)).collect()
}

/// Brackets built from the known shape of phi' in each case, independent of
/// the scan window.
fn analytic_brackets(map: &FiberMap, case: FiberCase) -> Result<Vec<(f64, f64)>> {
    let grow = |mut t: f64, want_positive: bool| -> Result<f64> {
        for _ in 0..2000 {
            let v = map.dphi(t);
            if (v > 0.0) == want_positive && v != 0.0 {
                return Ok(t);
            }
            t *= 2.0;
        }
        Err(CoreError::Numerical {
            context: "fiber bracket expansion ran away".into(),
            residual: f64::NAN,
            iterations: 2000,
        })
    };
    let shrink = |mut t: f64, want_positive: bool| -> Result<f64> {
        for _ in 0..2000 {
            let v = map.dphi(t);
            if (v > 0.0) == want_positive && v != 0.0 {
                return Ok(t);
            }
            t *= 0.5;
        }
        Err(CoreError::Numerical {
            context: "fiber bracket contraction ran away".into(),
            residual: f64::NAN,
            iterations: 2000,
        })
    };
    match case {
        FiberCase::I => {
            // phi'(0+) = -inf, phi'(inf) = +inf.
            let lo = shrink(1.0, false)?;
            let hi = grow(lo.max(1.0), true)?;
            Ok(vec![(lo, hi)])
        }
        FiberCase::V => {
            // phi' positive until past the inflection, then falls to -inf.
            let p = map.p;
            let d = 0.75 * (p - 2.0) * (3.0 * p - 8.0) / p * map.r.powf(0.5 * p) * map.lp_lambda;
            let t_infl = (map.r * map.grad_sq / d).powf(1.0 / (1.5 * p - 5.0));
            let hi = grow(t_infl, false)?;
            Ok(vec![(t_infl, hi)])
        }
        FiberCase::III1 => {
            let p = map.p;
            let d = 0.75 * (p - 2.0) * (3.0 * p - 8.0) / p * map.r.powf(0.5 * p) * map.lp_lambda;
            let t_infl = (map.r * map.grad_sq / d).powf(1.0 / (1.5 * p - 5.0));
            let lo = shrink(t_infl, true)?;
            let hi = grow(t_infl, true)?;
            Ok(vec![(lo, t_infl), (t_infl, hi)])
        }
        _ => Err(CoreError::Numerical {
            context: format!("no analytic bracket for fiber case {case}"),
            residual: f64::NAN,
            iterations: 0,
        }),
    }
}

/// Bisection to relative width 1e-12 followed by at most four Newton steps,
/// then a residual check against the natural phi' magnitude.
fn refine_root(map: &FiberMap, mut lo: f64, mut hi: f64) -> Result<f64> {
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut t = 0.5 * (lo + hi);
    if lo == hi {
        t = lo;
    } else {
        let mut flo = map.dphi(lo);
        for _ in 0..200 {
            if (hi - lo) <= 1e-12 * hi {
                break;
            }
            t = 0.5 * (lo + hi);
            let ft = map.dphi(t);
            if ft == 0.0 {
                break;
            }
            if flo * ft < 0.0 {
                hi = t;
            } else {
                lo = t;
                flo = ft;
            }
        }
        for _ in 0..4 {
            let ft = map.dphi(t);
            let dft = map.ddphi(t);
            if dft == 0.0 {
                break;
            }
            let next = t - ft / dft;
            if next.is_finite() && next > lo && next < hi {
                t = next;
            } else {
                break;
            }
        }
    }
    let residual = map.dphi(t);
    let scale = map.r * map.grad_sq * t.max(1.0) + 0.25 * map.r * map.r * map.hartree_q;
    if residual.abs() > ROOT_RESIDUAL_TOL * scale {
        return Err(CoreError::Numerical {
            context: "fiber critical point did not meet the residual target".into(),
            residual,
            iterations: 204,
        });
    }
    Ok(t)
}

/// Relative tolerance on the stationarity functional for sphere membership.
pub const NEHARI_EPS_Q: f64 = 1e-6;
/// Relative tolerance on the second-variation sign split.
pub const NEHARI_EPS_W: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NehariVerdict {
    #[serde(rename = "plus")]
    Plus,
    #[serde(rename = "zero")]
    Zero,
    #[serde(rename = "minus")]
    Minus,
    #[serde(rename = "not_member")]
    NotMember,
}

impl std::fmt::Display for NehariVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            NehariVerdict::Plus => "plus",
            NehariVerdict::Zero => "zero",
            NehariVerdict::Minus => "minus",
            NehariVerdict::NotMember => "not_member",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NehariMembership {
    pub verdict: NehariVerdict,
    /// Q(u): first dilation derivative of the energy at u.
    pub q_value: f64,
    /// W(u): the second-variation scale separating minus from plus.
    pub w_value: f64,
}

/// Tests Nehari manifold membership of the profile with integrals `ints`
/// (mass must match r) and splits members by the sign of the second
/// variation along dilations.
pub fn nehari_membership(ints: &Integrals, q: f64, lambda: f64, r: f64) -> Result<NehariMembership> {
    nehari_membership_with(ints, q, lambda, r, NEHARI_EPS_Q, NEHARI_EPS_W)
}

pub fn nehari_membership_with(
    ints: &Integrals,
    q: f64,
    lambda: f64,
    r: f64,
    eps_q: f64,
    eps_w: f64,
) -> Result<NehariMembership> {
    check_exponent(ints.p)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(CoreError::domain("mass radius r must be finite and positive"));
    }
    if (ints.mass - r).abs() > 1e-6 * r {
        return Err(CoreError::degenerate(format!(
            "membership test needs mass(u) = r: got mass {} on the sphere of mass {r}",
            ints.mass
        )));
    }
    let p = ints.p;
    let a = ints.grad_sq;
    let q_value = a + 0.25 * q * ints.hartree - 1.5 * (p - 2.0) / p * lambda * ints.lp;
    let w_value = a - 0.75 * (p - 2.0) * (3.0 * p - 8.0) / p * lambda * ints.lp;
    let verdict = if q_value.abs() > eps_q * a {
        NehariVerdict::NotMember
    } else if w_value > eps_w * a {
        NehariVerdict::Plus
    } else if w_value < -eps_w * a {
        NehariVerdict::Minus
    } else {
        NehariVerdict::Zero
    };
    Ok(NehariMembership { verdict, q_value, w_value })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PohozaevResidual {
    /// The raw Pohozaev combination for the stated equation coefficients.
    pub value: f64,
    /// |value| divided by the sum of the four integral magnitudes.
    pub normalized: f64,
}

/// Pohozaev identity residual for a claimed solution of
/// -a laplace(u) + b u + c phi_u u + d |u|^{p-2} u = 0:
///
///   P = a/2 A + 3b/2 M + 5c/4 B + 3d/p C
///
/// which vanishes on true solutions. The normalization makes the residual
/// comparable across profiles of different size.
pub fn pohozaev_residual(ints: &Integrals, a: f64, b: f64, c: f64, d: f64) -> PohozaevResidual {
    let value = 0.5 * a * ints.grad_sq
        + 1.5 * b * ints.mass
        + 1.25 * c * ints.hartree
        + 3.0 / ints.p * d * ints.lp;
    let scale = ints.grad_sq.abs() + ints.mass.abs() + ints.hartree.abs() + ints.lp.abs();
    PohozaevResidual { value, normalized: value.abs() / scale }
}
