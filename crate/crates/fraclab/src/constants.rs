//! Closed-form constants and thresholds.
//!
//! Everything in this module is an exact Gamma-function formula: the best
//! Sobolev (Talenti) constant of the embedding H^s -> L^{2*_s}, the torsion
//! profile amplitude and its exact norms, and the explicit parameter
//! thresholds (lambda*, mu*, r, c*) that certify existence of one or two
//! positive solutions of (-Delta)^s u = lambda f(u).
//!
//! Conventions: the fractional Laplacian carries a leading factor 2 and no
//! normalizing constant; `normalization_constant` converts to the other
//! common convention and is never used internally.

use serde::Serialize;

use crate::error::{Error, Result};

const PI: f64 = std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Gamma function (Lanczos approximation, Pugh's coefficients).
// ---------------------------------------------------------------------------

const GAMMA_R: f64 = 10.900511;

const GAMMA_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

const TWO_SQRT_E_OVER_PI: f64 = 1.8603827342052657173362492472666631120594218414085755;

/// Gamma function for positive real arguments, accurate to better than
/// 1e-13 relative over the range used by the threshold formulas.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "gamma_fn requires a positive argument, got {x}"
        )));
    }
    Ok(if x < 0.5 {
        let s: f64 = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |acc, (i, &dk)| acc + dk / (i as f64 - x));
        PI / ((PI * x).sin()
            * s
            * TWO_SQRT_E_OVER_PI
            * ((0.5 - x + GAMMA_R) / std::f64::consts::E).powf(0.5 - x))
    } else {
        let s: f64 = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |acc, (i, &dk)| acc + dk / (x + i as f64 - 1.0));
        s * TWO_SQRT_E_OVER_PI * ((x - 0.5 + GAMMA_R) / std::f64::consts::E).powf(x - 0.5)
    })
}

fn g(x: f64) -> f64 {
    // Internal shorthand: arguments are positive by construction in every
    // formula below once FracParams invariants hold.
    gamma_fn(x).expect("gamma argument positive by construction")
}

// ---------------------------------------------------------------------------
// Parameter records.
// ---------------------------------------------------------------------------

/// Space dimension N, fractional order s in (0,1), and the critical exponent
/// 2*_s = 2N/(N-2s). Construction enforces N > 2s, which keeps 2*_s finite
/// and greater than 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracParams {
    pub dim: u32,
    pub s: f64,
    pub crit_exp: f64,
}

impl FracParams {
    pub fn new(dim: u32, s: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension N must be a positive integer"));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!(
                "fractional order s must lie in (0,1), got {s}"
            )));
        }
        let n = dim as f64;
        if n <= 2.0 * s {
            return Err(Error::domain(format!(
                "need N > 2s for the critical exponent to be finite (N = {dim}, s = {s})"
            )));
        }
        let crit_exp = 2.0 * n / (n - 2.0 * s);
        Ok(FracParams { dim, s, crit_exp })
    }

    /// Relaxed constructor for operator-only work (torsion profile, norms,
    /// discretization): any s in (0,1) is accepted and the critical exponent
    /// is set to infinity when N <= 2s. Threshold formulas reject such
    /// parameters.
    pub fn operator_only(dim: u32, s: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension N must be a positive integer"));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!(
                "fractional order s must lie in (0,1), got {s}"
            )));
        }
        let n = dim as f64;
        let crit_exp = if n > 2.0 * s {
            2.0 * n / (n - 2.0 * s)
        } else {
            f64::INFINITY
        };
        Ok(FracParams { dim, s, crit_exp })
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    fn require_subcritical_regime(&self) -> Result<()> {
        if !self.crit_exp.is_finite() {
            return Err(Error::domain(format!(
                "threshold formulas need N > 2s (N = {}, s = {})",
                self.dim, self.s
            )));
        }
        Ok(())
    }
}

/// Shape of the underlying domain, used only where the geometry enters a
/// formula (measure factors, inscribed-ball radius for test functions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DomainKind {
    Interval,
    Ball,
}

/// Bounded domain summary: radius (half-length for an interval), Lebesgue
/// measure |Omega|, and the radius of the largest inscribed ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub radius: f64,
    pub measure: f64,
    pub inradius: f64,
}

impl DomainSpec {
    /// The interval (-R, R): measure 2R, inradius R.
    pub fn interval(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {radius}")));
        }
        Ok(DomainSpec {
            kind: DomainKind::Interval,
            radius,
            measure: 2.0 * radius,
            inradius: radius,
        })
    }

    /// Ball of radius R in dimension N: measure pi^{N/2} R^N / Gamma(N/2+1).
    pub fn ball(dim: u32, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {radius}")));
        }
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        let n = dim as f64;
        let measure = PI.powf(n / 2.0) / g(n / 2.0 + 1.0) * radius.powf(n);
        Ok(DomainSpec {
            kind: DomainKind::Ball,
            radius,
            measure,
            inradius: radius,
        })
    }

    /// Domain with explicitly prescribed measure and inradius (for instances
    /// where only |Omega| is pinned down, not the shape).
    pub fn with_measure(kind: DomainKind, radius: f64, measure: f64, inradius: f64) -> Result<Self> {
        if !(radius > 0.0 && measure > 0.0 && inradius > 0.0) {
            return Err(Error::domain(
                "radius, measure, and inradius must all be positive",
            ));
        }
        if inradius > radius + 1e-14 {
            return Err(Error::domain(format!(
                "inradius {inradius} exceeds radius {radius}"
            )));
        }
        Ok(DomainSpec {
            kind,
            radius,
            measure,
            inradius,
        })
    }
}

/// One term a (t+)^{rho-1} of the reaction; coefficients are nonnegative and
/// exponents exceed 1 so that the primitive a (t+)^rho / rho is well defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReactionTerm {
    pub coeff: f64,
    pub exponent: f64,
}

/// Sum of signed power terms f(t) = sum a_i (t+)^{rho_i - 1}, together with
/// its exact primitive F. Only the positive part of t reacts, so f and F
/// vanish identically on t <= 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReaction {
    pub terms: Vec<ReactionTerm>,
}

impl PowerReaction {
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (coeff, exponent) in terms {
            if !(coeff >= 0.0) {
                return Err(Error::domain(format!(
                    "reaction coefficients must be nonnegative, got {coeff}"
                )));
            }
            if !(exponent > 1.0) {
                return Err(Error::domain(format!(
                    "reaction exponents must exceed 1, got {exponent}"
                )));
            }
            out.push(ReactionTerm { coeff, exponent });
        }
        Ok(PowerReaction { terms: out })
    }

    /// Check the subcritical/critical growth bound rho <= 2*_s.
    pub fn validate_growth(&self, params: &FracParams) -> Result<()> {
        for t in &self.terms {
            if t.exponent > params.crit_exp + 1e-12 {
                return Err(Error::domain(format!(
                    "reaction exponent {} violates the growth bound rho <= 2N/(N-2s) = {}",
                    t.exponent, params.crit_exp
                )));
            }
        }
        Ok(())
    }

    /// f(t) = sum a (t+)^{rho-1}.
    pub fn f(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|tm| tm.coeff * t.powf(tm.exponent - 1.0))
            .sum()
    }

    /// Primitive F(t) = sum a (t+)^rho / rho, F(0) = 0.
    pub fn big_f(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|tm| tm.coeff * t.powf(tm.exponent) / tm.exponent)
            .sum()
    }

    /// f'(t) for t > 0 (zero on the nonpositive axis, where f is constant).
    pub fn fprime(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|tm| tm.coeff * (tm.exponent - 1.0) * t.powf(tm.exponent - 2.0))
            .sum()
    }

    /// Largest exponent present (drives coercivity / superquadraticity).
    pub fn max_exponent(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.exponent)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Closed-form constants.
// ---------------------------------------------------------------------------

/// Best constant T(N,s) of the embedding H^s -> L^{2*_s}:
/// T = s^{1/2} Gamma((N-2s)/2)^{1/2} Gamma(N)^{s/N}
///     / (2^{1/2} pi^{(N+2s)/4} Gamma(1-s)^{1/2} Gamma(N/2)^{s/N}).
pub fn talenti_constant(p: &FracParams) -> f64 {
    let n = p.n();
    let s = p.s;
    (s.sqrt() * g((n - 2.0 * s) / 2.0).sqrt() * g(n).powf(s / n))
        / (2.0f64.sqrt() * PI.powf((n + 2.0 * s) / 4.0) * g(1.0 - s).sqrt() * g(n / 2.0).powf(s / n))
}

/// Amplitude A(N,s) = s Gamma(N/2) / (2 pi^{N/2} Gamma(1+s) Gamma(1-s)) of
/// the torsion profile A (R^2 - |x - x0|^2)_+^s solving (-Delta)^s u = 1 on
/// a ball of radius R.
pub fn torsion_amplitude(p: &FracParams) -> f64 {
    let n = p.n();
    let s = p.s;
    s * g(n / 2.0) / (2.0 * PI.powf(n / 2.0) * g(1.0 + s) * g(1.0 - s))
}

/// Normalizing constant C(N,s) = 2^{2s} s Gamma((N+2s)/2) / (pi^{N/2} Gamma(1-s))
/// of the other common convention for (-Delta)^s. Provided for comparison
/// with the literature only; no internal formula uses it.
pub fn normalization_constant(p: &FracParams) -> f64 {
    let n = p.n();
    let s = p.s;
    2.0f64.powf(2.0 * s) * s * g((n + 2.0 * s) / 2.0) / (PI.powf(n / 2.0) * g(1.0 - s))
}

/// Exact L^nu norm of the torsion profile on the ball of radius R:
/// ||u_R||_nu = A(N,s) [ pi^{N/2} Gamma(1+nu s) R^{N+2 nu s} / Gamma((N+2 nu s+2)/2) ]^{1/nu}.
pub fn torsion_lp_norm(p: &FracParams, radius: f64, nu: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    if !(nu >= 1.0) {
        return Err(Error::domain(format!("norm order nu must be >= 1, got {nu}")));
    }
    let n = p.n();
    let s = p.s;
    let inner = PI.powf(n / 2.0) * g(1.0 + nu * s) * radius.powf(n + 2.0 * nu * s)
        / g((n + 2.0 * nu * s + 2.0) / 2.0);
    Ok(torsion_amplitude(p) * inner.powf(1.0 / nu))
}

/// Exact Gagliardo seminorm of the torsion profile:
/// [u_R]_s = [ s Gamma(N/2) R^{N+2s} / (2 Gamma(1-s) Gamma((N+2s+2)/2)) ]^{1/2}.
/// Its square equals the L^1 norm of the profile exactly (test the weak
/// formulation of the torsion equation with the solution itself).
pub fn torsion_seminorm(p: &FracParams, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    let n = p.n();
    let s = p.s;
    Ok((s * g(n / 2.0) * radius.powf(n + 2.0 * s)
        / (2.0 * g(1.0 - s) * g((n + 2.0 * s + 2.0) / 2.0)))
    .sqrt())
}

fn check_subcritical_exponents(p: &FracParams, p_exp: f64, q_exp: f64) -> Result<()> {
    p.require_subcritical_regime()?;
    if !(p_exp >= 1.0 && p_exp < 2.0 && q_exp > 2.0 && q_exp < p.crit_exp) {
        return Err(Error::domain(format!(
            "need 1 <= p < 2 < q < 2*_s = {}, got p = {p_exp}, q = {q_exp}",
            p.crit_exp
        )));
    }
    // The closed forms carry exponents like (2-p)/(q-p) and 2/(q-p); they
    // blow up as p -> 2 or q -> 2, so near-degenerate inputs are rejected
    // instead of silently overflowing.
    if 2.0 - p_exp < 1e-9 || q_exp - 2.0 < 1e-9 {
        return Err(Error::domain(format!(
            "exponent configuration is near-degenerate (2-p = {}, q-2 = {})",
            2.0 - p_exp,
            q_exp - 2.0
        )));
    }
    Ok(())
}

/// Subcritical threshold lambda*: for lambda below it, the concave-convex
/// problem with f(t) = a_p (t+)^{p-1} + a_q (t+)^{q-1}, 1 <= p < 2 < q < 2*_s,
/// has two positive solutions.
pub fn lambda_star_subcritical(
    p: &FracParams,
    d: &DomainSpec,
    a_p: f64,
    p_exp: f64,
    a_q: f64,
    q_exp: f64,
) -> Result<f64> {
    check_subcritical_exponents(p, p_exp, q_exp)?;
    if !(a_p > 0.0 && a_q > 0.0) {
        return Err(Error::domain(format!(
            "coefficients must be positive, got a_p = {a_p}, a_q = {a_q}"
        )));
    }
    let t = talenti_constant(p);
    let ts = p.crit_exp;
    let qmp = q_exp - p_exp;
    Ok(1.0 / (2.0 * t * t * d.measure.powf((ts - 2.0) / ts))
        * (a_p / p_exp).powf((2.0 - q_exp) / qmp)
        * (a_q / q_exp).powf((p_exp - 2.0) / qmp)
        * ((2.0 - p_exp) / (q_exp - 2.0)).powf((2.0 - p_exp) / qmp)
        * (q_exp - 2.0)
        / qmp)
}

/// Sublevel radius r for the subcritical problem:
/// r = |Omega|^{2/2*_s} / (2 T^2) * [ a_p q (2-p) / (a_q p (q-2)) ]^{2/(q-p)}.
/// Only the ratio a_p/a_q enters.
pub fn radius_subcritical(
    p: &FracParams,
    d: &DomainSpec,
    a_p: f64,
    p_exp: f64,
    a_q: f64,
    q_exp: f64,
) -> Result<f64> {
    check_subcritical_exponents(p, p_exp, q_exp)?;
    if !(a_p > 0.0 && a_q > 0.0) {
        return Err(Error::domain(format!(
            "coefficients must be positive, got a_p = {a_p}, a_q = {a_q}"
        )));
    }
    let t = talenti_constant(p);
    let ts = p.crit_exp;
    Ok(d.measure.powf(2.0 / ts) / (2.0 * t * t)
        * (a_p * q_exp * (2.0 - p_exp) / (a_q * p_exp * (q_exp - 2.0))).powf(2.0 / (q_exp - p_exp)))
}

/// Subcritical coefficient threshold mu*: for f(t) = mu (t+)^{p-1} + (t+)^{q-1},
/// lambda* > 1 holds exactly when mu < mu*, so lambda = 1 is certified.
pub fn mu_star_subcritical(p: &FracParams, d: &DomainSpec, p_exp: f64, q_exp: f64) -> Result<f64> {
    check_subcritical_exponents(p, p_exp, q_exp)?;
    if !(p_exp > 1.0) {
        return Err(Error::domain(format!(
            "mu threshold requires p > 1, got p = {p_exp}"
        )));
    }
    let t = talenti_constant(p);
    let ts = p.crit_exp;
    let qm2 = q_exp - 2.0;
    Ok((2.0 * t * t * d.measure.powf((ts - 2.0) / ts)).powf((p_exp - q_exp) / qm2)
        * p_exp
        * q_exp.powf((2.0 - p_exp) / qm2)
        * ((2.0 - p_exp) / qm2).powf((2.0 - p_exp) / qm2)
        * (qm2 / (q_exp - p_exp)).powf((q_exp - p_exp) / qm2))
}

/// Critical-case lambda threshold at sublevel radius r, for the reaction
/// mu g(t) + (t+)^{2*_s - 1} with |g(t)| <= a_p |t|^{p-1}: the minimum of
/// the compactness branch and the concentration branch.
pub fn lambda_r_star(
    p: &FracParams,
    d: &DomainSpec,
    p_exp: f64,
    a_p: f64,
    mu: f64,
    r: f64,
) -> Result<f64> {
    p.require_subcritical_regime()?;
    if !(r > 0.0 && mu > 0.0) {
        return Err(Error::domain(format!(
            "need positive r and mu, got r = {r}, mu = {mu}"
        )));
    }
    if !(p_exp > 1.0 && p_exp < p.crit_exp) {
        return Err(Error::domain(format!(
            "need 1 < p < 2*_s = {}, got p = {p_exp}",
            p.crit_exp
        )));
    }
    if !(a_p > 0.0) {
        return Err(Error::domain(format!("need a_p > 0, got {a_p}")));
    }
    let t = talenti_constant(p);
    let ts = p.crit_exp;
    let n = p.n();
    let s = p.s;
    let branch1 = 1.0
        / (2.0f64.powf(ts / 2.0) * t.powf(ts) * r.powf((ts - 2.0) / 2.0) / ts
            + mu * 2.0f64.powf(p_exp / 2.0) * a_p * t.powf(p_exp)
                * d.measure.powf((ts - p_exp) / ts)
                * r.powf((p_exp - 2.0) / 2.0)
                / p_exp);
    let branch2 = (s / (2.0 * n * r)).powf(2.0 * s / (n - 2.0 * s)) / t.powf(ts);
    Ok(branch1.min(branch2))
}

/// The sublevel radius used by the critical-regime existence argument:
/// r = min{ [2*_s / (2^{(2*_s+2)/2} T^{2*_s})]^{2/(2*_s-2)}, s / (3 N T^{N/s}) }.
pub fn radius_critical(p: &FracParams) -> f64 {
    let t = talenti_constant(p);
    let ts = p.crit_exp;
    let n = p.n();
    let s = p.s;
    let b1 = (ts / (2.0f64.powf((ts + 2.0) / 2.0) * t.powf(ts))).powf(2.0 / (ts - 2.0));
    let b2 = s / (3.0 * n * t.powf(n / s));
    b1.min(b2)
}

/// Critical-case coefficient threshold mu*:
/// mu* = r_crit^{(2-p)/2} p / (2^{(p+2)/2} a_p T^p |Omega|^{(2*_s-p)/2*_s}).
pub fn mu_star_critical(p: &FracParams, d: &DomainSpec, p_exp: f64, a_p: f64) -> Result<f64> {
    p.require_subcritical_regime()?;
    if !(p_exp > 1.0 && p_exp < p.crit_exp) {
        return Err(Error::domain(format!(
            "need 1 < p < 2*_s = {}, got p = {p_exp}",
            p.crit_exp
        )));
    }
    if !(a_p > 0.0) {
        return Err(Error::domain(format!("need a_p > 0, got {a_p}")));
    }
    let t = talenti_constant(p);
    let ts = p.crit_exp;
    Ok(radius_critical(p).powf((2.0 - p_exp) / 2.0) * p_exp
        / (2.0f64.powf((p_exp + 2.0) / 2.0)
            * a_p
            * t.powf(p_exp)
            * d.measure.powf((ts - p_exp) / ts)))
}

/// Compactness level c* = s / (N T(N,s)^{N/s}): Palais-Smale sequences at
/// levels strictly below c* are precompact in the critical problem.
pub fn critical_level(p: &FracParams) -> f64 {
    p.s / (p.n() * talenti_constant(p).powf(p.n() / p.s))
}

/// Scale kappa of the smallness condition on the superquadraticity constant
/// K: admissible choices satisfy K * kappa > 1/lambda, where
/// kappa = s Gamma(N/2) Gamma(1+2s) Gamma((N+2s+2)/2) R^{2s}
///         / (pi^{N/2} Gamma(1+s)^2 Gamma(1-s) Gamma((N+4s+2)/2))
/// and R is the inscribed-ball radius.
pub fn k_condition_scale(p: &FracParams, inradius: f64) -> Result<f64> {
    if !(inradius > 0.0) {
        return Err(Error::domain(format!(
            "inradius must be positive, got {inradius}"
        )));
    }
    let n = p.n();
    let s = p.s;
    Ok(s * g(n / 2.0) * g(1.0 + 2.0 * s) * g((n + 2.0 * s + 2.0) / 2.0) * inradius.powf(2.0 * s)
        / (PI.powf(n / 2.0) * g(1.0 + s).powf(2.0) * g(1.0 - s) * g((n + 4.0 * s + 2.0) / 2.0)))
}

/// Scale delta for the seed test function ubar = delta * u_R: chosen at
/// 0.99 times the smaller of the two admissible bounds, so that both
/// Phi(ubar) < r and max ubar < eps hold with a strict floating-point margin.
pub fn testfn_scale(p: &FracParams, d: &DomainSpec, r: f64, k: f64, eps: f64) -> Result<f64> {
    if !(r > 0.0 && k > 0.0 && eps > 0.0) {
        return Err(Error::domain(format!(
            "need positive r, K, eps, got r = {r}, K = {k}, eps = {eps}"
        )));
    }
    let n = p.n();
    let s = p.s;
    let radius = d.inradius;
    let d1 = (4.0 * g(1.0 - s) * g((n + 2.0 * s + 2.0) / 2.0) * r
        / (s * g(n / 2.0) * radius.powf(n + 2.0 * s)))
    .sqrt();
    let d2 = 2.0 * PI.powf(n / 2.0) * g(1.0 + s) * g(1.0 - s) * eps
        / (s * g(n / 2.0) * radius.powf(2.0 * s));
    Ok(0.99 * d1.min(d2))
}

// ---------------------------------------------------------------------------
// Threshold bundle.
// ---------------------------------------------------------------------------

/// All closed-form constants of one problem instance. The subcritical trio
/// (lambda*, r, mu*) is present only when a subcritical exponent pair
/// (p, q) was supplied and is admissible.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdBundle {
    pub talenti: f64,
    pub torsion_amp: f64,
    pub lambda_star: Option<f64>,
    pub r_sub: Option<f64>,
    pub mu_star_sub: Option<f64>,
    pub r_crit: f64,
    pub lambda_r_star: f64,
    pub mu_star_crit: f64,
    pub c_star: f64,
    /// The mu at which `lambda_r_star` was evaluated (at r = r_crit).
    pub mu_used: f64,
}

/// Evaluate every threshold for the instance with reaction
/// a_p (t+)^{p-1} + a_q (t+)^{q-1} (subcritical part, if q is given) and
/// mu-weighted critical reaction mu (t+)^{p-1} + (t+)^{2*_s-1}.
/// If `mu` is None it defaults to half the critical threshold mu*.
pub fn threshold_bundle(
    p: &FracParams,
    d: &DomainSpec,
    p_exp: f64,
    a_p: f64,
    q_exp: Option<f64>,
    a_q: f64,
    mu: Option<f64>,
) -> Result<ThresholdBundle> {
    let talenti = talenti_constant(p);
    let torsion_amp = torsion_amplitude(p);
    let (lambda_star, r_sub, mu_star_sub) = match q_exp {
        Some(q) => (
            Some(lambda_star_subcritical(p, d, a_p, p_exp, a_q, q)?),
            Some(radius_subcritical(p, d, a_p, p_exp, a_q, q)?),
            Some(mu_star_subcritical(p, d, p_exp, q)?),
        ),
        None => (None, None, None),
    };
    let r_crit = radius_critical(p);
    let mu_star_crit = mu_star_critical(p, d, p_exp, a_p)?;
    let mu_used = mu.unwrap_or(0.5 * mu_star_crit);
    let lambda_r_star = lambda_r_star(p, d, p_exp, a_p, mu_used, r_crit)?;
    Ok(ThresholdBundle {
        talenti,
        torsion_amp,
        lambda_star,
        r_sub,
        mu_star_sub,
        r_crit,
        lambda_r_star,
        mu_star_crit,
        c_star: critical_level(p),
        mu_used,
    })
}
