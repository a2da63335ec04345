//! Closed-form extremal radii and coupling thresholds.
//!
//! Pairs of stationarity conditions on the fiber map (for example phi = 0
//! together with phi' = 0) reduce, after dividing each condition by r t, to
//! a 2x2 linear system in the monomials
//!
//!   X = A t,   Y = B r,   Z = C r^(p/2-1) t^(3p/2-4)
//!
//! whose positive solution ratios alpha = X/Z and beta = Y/Z invert to a
//! closed form for (r, t). `solve_closed_system` performs that inversion for
//! arbitrary coefficient rows; `extremal_pair` evaluates the per-variant
//! ratios directly, so the two functions are independent implementations
//! that the tests cross-check against each other.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::fiber::FiberMap;
use crate::grid::check_exponent;
use crate::hartree::Integrals;

/// Interval half-width around p = 3 inside which the r-formula exponents
/// blow up and the lambda thresholds take over.
pub const P_THREE_TOL: f64 = 1e-9;

/// Relative back-substitution tolerance for the defining pair of conditions.
const PAIR_RESIDUAL_TOL: f64 = 1e-8;

/// Relative back-substitution tolerance inside `solve_closed_system`.
const SYSTEM_RESIDUAL_TOL: f64 = 1e-9;

/// Which pair of fiber conditions the extremal value solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalVariant {
    /// phi = phi' = 0: the radius r0(u) where the fiber minimum reaches zero.
    Zero,
    /// phi' = phi'' = 0: the radius r(u) where the critical pair coalesces.
    Star,
    /// phi' = d/dr (phi/r) = 0: the radius tilde-r(u) of the I_r/r monotonicity split.
    Tilde,
    /// phi' = d/dr phi = 0: the radius bar-r(u) of the r-monotonicity split.
    Bar,
    /// p = 3 substitute for Zero: the coupling lambda_{0,q}(u), with its dilation.
    LambdaZero,
    /// p = 3 substitute for Star: the coupling lambda_q(u), with its dilation.
    LambdaStar,
}

impl std::fmt::Display for ExtremalVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExtremalVariant::Zero => "zero",
            ExtremalVariant::Star => "star",
            ExtremalVariant::Tilde => "tilde",
            ExtremalVariant::Bar => "bar",
            ExtremalVariant::LambdaZero => "lambda_zero",
            ExtremalVariant::LambdaStar => "lambda_star",
        };
        f.write_str(s)
    }
}

/// The closed-form pair for one variant: a radius (or coupling, for the
/// lambda variants) together with the dilation at which the defining
/// conditions hold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtremalPair {
    pub variant: ExtremalVariant,
    /// r-type radius, or the lambda threshold for the lambda variants
    /// (reported on the unit mass sphere r = 1).
    pub value: f64,
    pub dilation: f64,
}

/// Row of the divided stationarity condition phi' = 0.
pub fn row_dphi(p: f64) -> (f64, f64, f64) {
    (1.0, 0.25, -1.5 * (p - 2.0) / p)
}

/// Row of the divided level condition phi = 0.
pub fn row_phi(p: f64) -> (f64, f64, f64) {
    (0.5, 0.25, -1.0 / p)
}

/// Row of the divided condition d/dr (phi/r) = 0.
pub fn row_tilde(p: f64) -> (f64, f64, f64) {
    (0.0, 0.5, -(p - 2.0) / p)
}

/// Row of the divided condition phi'' = 0.
pub fn row_star(p: f64) -> (f64, f64, f64) {
    (1.0, 0.0, -0.75 * (p - 2.0) * (3.0 * p - 8.0) / p)
}

/// Row of the divided condition d/dr phi = 0.
pub fn row_bar(_p: f64) -> (f64, f64, f64) {
    (1.0, 1.0, -1.0)
}

/// Solves the 2x2 monomial system
///
///   a X + b Y + c Z = 0,    d X + e Y + f Z = 0
///
/// for (r, t), where X = A t, Y = B r, Z = C r^(p/2-1) t^(3p/2-4) and the
/// couplings are already folded into B and C. Requires b != 0, a
/// nondegenerate row pair, and positive solution ratios; the result is
/// back-substituted into both equations and rejected if either relative
/// residual exceeds 1e-9.
pub fn solve_closed_system(
    row1: (f64, f64, f64),
    row2: (f64, f64, f64),
    a_int: f64,
    b_int: f64,
    c_int: f64,
    p: f64,
) -> Result<(f64, f64)> {
    check_exponent(p)?;
    if (p - 3.0).abs() <= P_THREE_TOL {
        return Err(CoreError::domain("closed-form system is singular at p = 3"));
    }
    if !(a_int > 0.0 && b_int > 0.0 && c_int > 0.0)
        || !(a_int.is_finite() && b_int.is_finite() && c_int.is_finite())
    {
        return Err(CoreError::domain("system integrals A, B, C must be finite and positive"));
    }
    let (a, b, c) = row1;
    let (d, e, f) = row2;
    if b == 0.0 {
        return Err(CoreError::domain("system hypothesis b != 0 violated"));
    }
    let denom = b * d - a * e;
    if denom == 0.0 || !denom.is_finite() {
        return Err(CoreError::domain("system rows are degenerate: b d - a e = 0"));
    }
    let alpha = (c * e - b * f) / denom;
    let beta = (a * f - c * d) / denom;
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(CoreError::domain(
            "system sign conditions fail: solution ratios are not both positive",
        ));
    }
    let (r, t) = pair_from_ratios(alpha, beta, a_int, b_int, c_int, p);

    let x = a_int * t;
    let y = b_int * r;
    let z = c_int * r.powf(0.5 * p - 1.0) * t.powf(1.5 * p - 4.0);
    for (name, (ra, rb, rc)) in [("first", row1), ("second", row2)] {
        let res = ra * x + rb * y + rc * z;
        let scale = (ra * x).abs() + (rb * y).abs() + (rc * z).abs();
        if res.abs() > SYSTEM_RESIDUAL_TOL * scale {
            return Err(CoreError::Numerical {
                context: format!("closed-form system back-substitution failed in the {name} row"),
                residual: res / scale,
                iterations: 0,
            });
        }
    }
    Ok((r, t))
}

/// Inverts the ratios X/Z = alpha, Y/Z = beta to (r, t).
fn pair_from_ratios(alpha: f64, beta: f64, a_int: f64, b_int: f64, c_int: f64, p: f64) -> (f64, f64) {
    let s = 4.0 * (p - 3.0);
    let r = alpha.powf((8.0 - 3.0 * p) / s)
        * beta.powf((3.0 * p - 10.0) / s)
        * a_int.powf((3.0 * p - 8.0) / s)
        * b_int.powf((10.0 - 3.0 * p) / s)
        * c_int.powf(-1.0 / (2.0 * (p - 3.0)));
    let t = alpha * b_int * r / (beta * a_int);
    (r, t)
}

/// Solution ratios (alpha, beta) of the variant's 2x2 system, in closed form.
fn variant_ratios(variant: ExtremalVariant, p: f64) -> Result<(f64, f64)> {
    let (alpha, beta) = match variant {
        ExtremalVariant::Zero => ((3.0 * p - 8.0) / p, 2.0 * (10.0 - 3.0 * p) / p),
        ExtremalVariant::Star => (
            0.75 * (p - 2.0) * (3.0 * p - 8.0) / p,
            3.0 * (p - 2.0) * (10.0 - 3.0 * p) / p,
        ),
        ExtremalVariant::Tilde => ((p - 2.0) / p, 2.0 * (p - 2.0) / p),
        ExtremalVariant::Bar => ((5.0 * p - 12.0) / (3.0 * p), 2.0 * (6.0 - p) / (3.0 * p)),
        _ => {
            return Err(CoreError::domain(
                "lambda variants have no (r, t) ratio form; they fix p = 3",
            ))
        }
    };
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(CoreError::domain(format!(
            "variant {variant} has no positive solution at p = {p}"
        )));
    }
    Ok((alpha, beta))
}

/// The multiplier in front of the Rayleigh quotient in the closed form
/// r_variant(u) = prefactor(p) * A^e1 (qB)^e2 (lC)^e3. Defined for the four
/// radius variants away from p = 3.
pub fn prefactor(variant: ExtremalVariant, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if (p - 3.0).abs() <= P_THREE_TOL {
        return Err(CoreError::domain("prefactor is singular at p = 3"));
    }
    let (alpha, beta) = variant_ratios(variant, p)?;
    let s = 4.0 * (p - 3.0);
    Ok(alpha.powf((8.0 - 3.0 * p) / s) * beta.powf((3.0 * p - 10.0) / s))
}

/// Closed-form extremal pair for a unit-mass profile with integrals `ints`.
///
/// For the radius variants the returned value is the extremal mass radius
/// and `dilation` the fiber parameter where the two defining conditions
/// hold; both conditions are re-evaluated and must vanish within 1e-8
/// relative. The lambda variants (p = 3 only) return the coupling threshold
/// evaluated on the unit sphere together with its companion dilation.
pub fn extremal_pair(
    ints: &Integrals,
    q: f64,
    lambda: f64,
    variant: ExtremalVariant,
) -> Result<ExtremalPair> {
    check_exponent(ints.p)?;
    if (ints.mass - 1.0).abs() > 1e-6 {
        return Err(CoreError::degenerate(format!(
            "extremal pair needs a unit-mass profile: got mass {}",
            ints.mass
        )));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(CoreError::domain("coulomb coupling q must be finite and positive"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CoreError::domain("focusing coupling lambda must be finite and positive"));
    }
    if !(ints.grad_sq > 0.0 && ints.hartree > 0.0 && ints.lp > 0.0) {
        return Err(CoreError::degenerate("extremal pair needs positive integrals"));
    }
    let p = ints.p;
    let (a_val, qb, lc) = (ints.grad_sq, q * ints.hartree, lambda * ints.lp);

    match variant {
        ExtremalVariant::LambdaZero | ExtremalVariant::LambdaStar => {
            if (p - 3.0).abs() > P_THREE_TOL {
                return Err(CoreError::domain(format!(
                    "variant {variant} is defined only at p = 3 (got p = {p})"
                )));
            }
            let root_ab = (q * ints.grad_sq * ints.hartree).sqrt();
            let (lam, t) = match variant {
                ExtremalVariant::LambdaZero => {
                    let lam = (4.5f64).sqrt() * root_ab / ints.lp;
                    let t = (lam * ints.lp / (3.0 * ints.grad_sq)).powi(2);
                    (lam, t)
                }
                _ => {
                    let lam = 2.0 * root_ab / ints.lp;
                    let t = (lam * ints.lp / (4.0 * ints.grad_sq)).powi(2);
                    (lam, t)
                }
            };
            let map = FiberMap::from_coefficients(a_val, qb, lam * ints.lp, p, 1.0)?;
            let (r1, s1, r2, s2) = match variant {
                ExtremalVariant::LambdaZero => {
                    (map.phi(t), map.phi_scale(t), map.dphi(t), map.dphi_scale(t))
                }
                _ => (map.dphi(t), map.dphi_scale(t), map.ddphi(t), map.ddphi_scale(t)),
            };
            check_pair_residuals(variant, r1, s1, r2, s2)?;
            Ok(ExtremalPair { variant, value: lam, dilation: t })
        }
        _ => {
            if (p - 3.0).abs() <= P_THREE_TOL {
                return Err(CoreError::domain(format!(
                    "variant {variant} is undefined at p = 3; use the lambda variants"
                )));
            }
            if variant == ExtremalVariant::Bar && !(p >= 10.0 / 3.0 - 1e-12 && p < 6.0) {
                return Err(CoreError::domain(format!(
                    "variant bar is defined for p in [10/3, 6) (got p = {p})"
                )));
            }
            let (alpha, beta) = variant_ratios(variant, p)?;
            let (r, t) = pair_from_ratios(alpha, beta, a_val, qb, lc, p);
            let map = FiberMap::from_coefficients(a_val, qb, lc, p, r)?;
            let (r1, s1, r2, s2) = match variant {
                ExtremalVariant::Zero => {
                    (map.phi(t), map.phi_scale(t), map.dphi(t), map.dphi_scale(t))
                }
                ExtremalVariant::Star => {
                    (map.dphi(t), map.dphi_scale(t), map.ddphi(t), map.ddphi_scale(t))
                }
                ExtremalVariant::Tilde => (
                    map.dphi(t),
                    map.dphi_scale(t),
                    map.d_dr_phi_over_r(t),
                    map.d_dr_phi_over_r_scale(t),
                ),
                _ => (map.dphi(t), map.dphi_scale(t), map.dphi_dr(t), map.dphi_dr_scale(t)),
            };
            check_pair_residuals(variant, r1, s1, r2, s2)?;
            Ok(ExtremalPair { variant, value: r, dilation: t })
        }
    }
}

fn check_pair_residuals(
    variant: ExtremalVariant,
    res1: f64,
    scale1: f64,
    res2: f64,
    scale2: f64,
) -> Result<()> {
    if res1.abs() > PAIR_RESIDUAL_TOL * scale1 || res2.abs() > PAIR_RESIDUAL_TOL * scale2 {
        return Err(CoreError::Numerical {
            context: format!("extremal pair {variant} failed its defining-condition check"),
            residual: (res1 / scale1).abs().max((res2 / scale2).abs()),
            iterations: 0,
        });
    }
    Ok(())
}

/// Every closed-form quantity of one unit-mass profile. Variants outside
/// their p-range are None.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalReport {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub rayleigh: Option<f64>,
    pub r_zero: Option<ExtremalPair>,
    pub r_star: Option<ExtremalPair>,
    pub r_tilde: Option<ExtremalPair>,
    pub r_bar: Option<ExtremalPair>,
    pub lambda_zero: Option<ExtremalPair>,
    pub lambda_star: Option<ExtremalPair>,
}

/// Evaluates all closed forms that exist at this p for one profile.
pub fn extremal_report(ints: &Integrals, q: f64, lambda: f64) -> Result<ExtremalReport> {
    check_exponent(ints.p)?;
    let pair = |v: ExtremalVariant| extremal_pair(ints, q, lambda, v).ok();
    Ok(ExtremalReport {
        p: ints.p,
        q,
        lambda,
        rayleigh: crate::rayleigh::rayleigh(ints, q, lambda).ok(),
        r_zero: pair(ExtremalVariant::Zero),
        r_star: pair(ExtremalVariant::Star),
        r_tilde: pair(ExtremalVariant::Tilde),
        r_bar: pair(ExtremalVariant::Bar),
        lambda_zero: pair(ExtremalVariant::LambdaZero),
        lambda_star: pair(ExtremalVariant::LambdaStar),
    })
}
