//! Energy functionals and critical-point searches.
//!
//! The discrete energy is J(u) = h u^T L u / 2 - lambda h sum F(u_i); its
//! critical points are the discrete weak solutions. The module locates the
//! two predicted solutions: a local minimizer with negative energy inside a
//! sublevel ball of Phi, and a mountain-pass point with positive energy. In
//! the critical-exponent regime the second search runs on the translated
//! functional recentered at the minimizer, so that the saddle found there
//! yields a second solution strictly above the first.

use nalgebra::{DMatrix, DVector};

use crate::constants::{
    self, DomainSpec, FracParams, PowerReaction,
};
use crate::discretization::{
    quad_form, DiscreteField, FractionalOperator, Grid1D,
};
use crate::error::{Error, Result};

/// Full problem instance: parameters, domain, reaction, lambda, and the
/// assembled operator on its grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub params: FracParams,
    pub domain: DomainSpec,
    pub reaction: PowerReaction,
    pub lambda: f64,
    pub grid: Grid1D,
    pub operator: FractionalOperator,
}

impl ProblemSpec {
    pub fn new(
        params: FracParams,
        domain: DomainSpec,
        reaction: PowerReaction,
        lambda: f64,
        grid: Grid1D,
        operator: FractionalOperator,
    ) -> Result<Self> {
        if !operator.grid.matches(&grid) {
            return Err(Error::argument("operator grid does not match the problem grid"));
        }
        if (operator.s - params.s).abs() > 1e-14 {
            return Err(Error::argument(
                "operator was assembled for a different fractional order",
            ));
        }
        if !(lambda >= 0.0) {
            return Err(Error::domain(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        reaction.validate_growth(&params)?;
        Ok(ProblemSpec {
            params,
            domain,
            reaction,
            lambda,
            grid,
            operator,
        })
    }

    fn check_grid(&self, u: &DiscreteField) -> Result<()> {
        if !self.grid.matches(&u.grid) {
            return Err(Error::argument("field grid does not match the problem grid"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalPointKind {
    LocalMin,
    MountainPass,
}

/// Outcome of one critical-point search, carrying enough data for an
/// independent certificate (recompute the gradient from the stored field).
#[derive(Debug, Clone)]
pub struct CriticalPointReport {
    pub field: DiscreteField,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub kind: CriticalPointKind,
    pub min_value: f64,
    pub phi_value: f64,
    /// Whether the run parameters lie inside the certified threshold
    /// interval (lambda < lambda*, or mu < mu* in the critical branch).
    pub certified: bool,
}

/// A discrete path from 0 to a negative-energy endpoint, as used by the
/// descent-on-paths search.
#[derive(Debug, Clone)]
pub struct PathState {
    pub points: Vec<DiscreteField>,
    pub max_energy: f64,
    pub argmax_index: usize,
}

/// Evaluate the reaction and its primitive at a point.
pub fn reaction_eval(r: &PowerReaction, t: f64) -> (f64, f64) {
    (r.f(t), r.big_f(t))
}

// ---------------------------------------------------------------------------
// Energy landscapes.
//
// Both the plain energy J and the translated functional around a known
// solution share the quadratic part h v^T L v / 2; they differ only in the
// zero-order term. The searches below are written against this interface.
// ---------------------------------------------------------------------------

trait Landscape: Sync {
    fn h(&self) -> f64;
    fn matrix(&self) -> &DMatrix<f64>;
    /// Non-quadratic part N(v); the full value is h v^T L v / 2 + N(v).
    fn nonquad(&self, v: &DVector<f64>) -> f64;
    fn nonquad_grad(&self, v: &DVector<f64>) -> DVector<f64>;
    fn nonquad_hess_diag(&self, v: &DVector<f64>) -> DVector<f64>;

    fn apply_l(&self, v: &DVector<f64>) -> DVector<f64> {
        self.matrix() * v
    }
    fn quad(&self, v: &DVector<f64>) -> f64 {
        self.h() * v.dot(&self.apply_l(v))
    }
    fn value(&self, v: &DVector<f64>) -> f64 {
        0.5 * self.quad(v) + self.nonquad(v)
    }
    fn grad(&self, v: &DVector<f64>) -> DVector<f64> {
        self.h() * self.apply_l(v) + self.nonquad_grad(v)
    }
    fn hess(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut m = self.matrix() * self.h();
        let d = self.nonquad_hess_diag(v);
        for i in 0..d.len() {
            m[(i, i)] += d[i];
        }
        m
    }
}

struct PlainEnergy<'a> {
    op: &'a FractionalOperator,
    reaction: &'a PowerReaction,
    lambda: f64,
    h: f64,
}

impl<'a> Landscape for PlainEnergy<'a> {
    fn h(&self) -> f64 {
        self.h
    }
    fn matrix(&self) -> &DMatrix<f64> {
        &self.op.matrix
    }
    fn nonquad(&self, v: &DVector<f64>) -> f64 {
        -self.lambda * self.h * v.iter().map(|&t| self.reaction.big_f(t)).sum::<f64>()
    }
    fn nonquad_grad(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(v.len(), v.iter().map(|&t| -self.lambda * self.h * self.reaction.f(t)))
    }
    fn nonquad_hess_diag(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            v.len(),
            v.iter().map(|&t| -self.lambda * self.h * self.reaction.fprime(t)),
        )
    }
}

/// Translated functional around a fixed solution u: only the positive part
/// of the increment reacts, so nontrivial critical points sit strictly
/// above u.
struct TranslatedEnergy<'a> {
    op: &'a FractionalOperator,
    reaction: &'a PowerReaction,
    lambda: f64,
    h: f64,
    base: &'a DVector<f64>,
}

impl<'a> TranslatedEnergy<'a> {
    fn big_f_shift(&self, u: f64, t: f64) -> f64 {
        let tp = t.max(0.0);
        self.reaction.big_f(u + tp) - self.reaction.big_f(u) - self.reaction.f(u) * tp
    }
}

impl<'a> Landscape for TranslatedEnergy<'a> {
    fn h(&self) -> f64 {
        self.h
    }
    fn matrix(&self) -> &DMatrix<f64> {
        &self.op.matrix
    }
    fn nonquad(&self, v: &DVector<f64>) -> f64 {
        -self.lambda
            * self.h
            * v.iter()
                .zip(self.base.iter())
                .map(|(&t, &u)| self.big_f_shift(u, t))
                .sum::<f64>()
    }
    fn nonquad_grad(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            v.len(),
            v.iter().zip(self.base.iter()).map(|(&t, &u)| {
                if t > 0.0 {
                    -self.lambda * self.h * (self.reaction.f(u + t) - self.reaction.f(u))
                } else {
                    0.0
                }
            }),
        )
    }
    fn nonquad_hess_diag(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            v.len(),
            v.iter().zip(self.base.iter()).map(|(&t, &u)| {
                if t > 0.0 {
                    -self.lambda * self.h * self.reaction.fprime(u + t)
                } else {
                    0.0
                }
            }),
        )
    }
}

fn plain<'a>(ps: &'a ProblemSpec) -> PlainEnergy<'a> {
    PlainEnergy {
        op: &ps.operator,
        reaction: &ps.reaction,
        lambda: ps.lambda,
        h: ps.grid.h,
    }
}

// ---------------------------------------------------------------------------
// Public energy operations.
// ---------------------------------------------------------------------------

/// J(u) = h u^T L u / 2 - lambda h sum F(u_i).
pub fn energy(ps: &ProblemSpec, u: &DiscreteField) -> Result<f64> {
    ps.check_grid(u)?;
    Ok(plain(ps).value(&u.values))
}

/// Discrete gradient: node-wise h (L u)_i - lambda h f(u_i). Vanishes
/// exactly at discrete weak solutions.
pub fn energy_gradient(ps: &ProblemSpec, u: &DiscreteField) -> Result<DiscreteField> {
    ps.check_grid(u)?;
    Ok(DiscreteField {
        grid: u.grid.clone(),
        values: plain(ps).grad(&u.values),
    })
}

/// Quadratic part Phi(u) = h u^T L u / 2.
pub fn phi(ps: &ProblemSpec, u: &DiscreteField) -> Result<f64> {
    Ok(0.5 * quad_form(&ps.operator, u)?)
}

/// Value of the translated functional around `u_min` at increment `v`.
pub fn translated_energy(ps: &ProblemSpec, u_min: &DiscreteField, v: &DiscreteField) -> Result<f64> {
    ps.check_grid(u_min)?;
    ps.check_grid(v)?;
    let te = TranslatedEnergy {
        op: &ps.operator,
        reaction: &ps.reaction,
        lambda: ps.lambda,
        h: ps.grid.h,
        base: &u_min.values,
    };
    Ok(te.value(&v.values))
}

/// Gradient of the translated functional (for independent certificates of
/// the critical-branch saddle).
pub fn translated_gradient(
    ps: &ProblemSpec,
    u_min: &DiscreteField,
    v: &DiscreteField,
) -> Result<DiscreteField> {
    ps.check_grid(u_min)?;
    ps.check_grid(v)?;
    let te = TranslatedEnergy {
        op: &ps.operator,
        reaction: &ps.reaction,
        lambda: ps.lambda,
        h: ps.grid.h,
        base: &u_min.values,
    };
    Ok(DiscreteField {
        grid: v.grid.clone(),
        values: te.grad(&v.values),
    })
}

// ---------------------------------------------------------------------------
// Seeding.
// ---------------------------------------------------------------------------

/// Scaled torsion profile ubar = delta u_R with Phi(ubar) < r and
/// max ubar < eps. The superquadraticity constant K is taken just above the
/// smallness bound (10% margin) and eps as the largest t <= 1 at which
/// F(t) >= K t^2 holds on a sampled grid.
pub fn seed_minimizer(ps: &ProblemSpec, r: f64) -> Result<DiscreteField> {
    if !(r > 0.0) {
        return Err(Error::argument(format!("sublevel radius must be positive, got {r}")));
    }
    let kappa = constants::k_condition_scale(&ps.params, ps.domain.inradius)?;
    let k = 1.1 / (ps.lambda * kappa);
    let mut eps = None;
    for j in (0..2000).rev() {
        let t = 10f64.powf(-12.0 + 12.0 * j as f64 / 1999.0);
        if ps.reaction.big_f(t) >= k * t * t {
            eps = Some(t);
            break;
        }
    }
    let eps = eps.ok_or_else(|| {
        Error::argument(
            "infeasible bounds: F(t) >= K t^2 has no admissible t in (0, 1]; \
             the reaction is not superquadratic enough near zero for this lambda",
        )
    })?;
    let delta = constants::testfn_scale(&ps.params, &ps.domain, r, k, eps)?;
    let amp = constants::torsion_amplitude(&ps.params);
    let s = ps.params.s;
    let rad = ps.domain.inradius;
    let seed = DiscreteField::from_fn(ps.grid.clone(), |x| {
        delta * amp * (rad * rad - x * x).max(0.0).powf(s)
    });
    let phi_val = phi(ps, &seed)?;
    if phi_val >= r {
        return Err(Error::argument(format!(
            "infeasible bounds: seed energy {phi_val} is not below the sublevel radius {r}"
        )));
    }
    Ok(seed)
}

// ---------------------------------------------------------------------------
// Local minimization: gradient descent with Armijo backtracking, a
// sublevel-cap projection, and an opportunistic Newton polish once the
// gradient is small.
// ---------------------------------------------------------------------------

const GD_TOL: f64 = 1e-8;
const GD_MAXIT: usize = 100_000;

fn project_cap(land: &impl Landscape, v: DVector<f64>, cap: f64) -> DVector<f64> {
    let p = 0.5 * land.quad(&v);
    if p > cap {
        v * (cap / p).sqrt() * (1.0 - 1e-12)
    } else {
        v
    }
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn gradient_descent(
    land: &impl Landscape,
    start: &DVector<f64>,
    phi_cap: f64,
) -> (DVector<f64>, usize, bool) {
    let mut u = project_cap(land, start.clone(), phi_cap);
    let mut t = 1.0f64;
    for it in 0..GD_MAXIT {
        let g = land.grad(&u);
        let gn = sup_norm(&g);
        if gn <= GD_TOL {
            return (u, it, true);
        }
        // Newton polish: near a nondegenerate minimizer the Hessian step
        // contracts the gradient immediately, cutting thousands of
        // first-order iterations.
        if gn < 1e-4 && it % 10 == 0 {
            if let Some(d) = land.hess(&u).lu().solve(&(-&g)) {
                let un = &u + &d;
                if sup_norm(&land.grad(&un)) < 0.5 * gn {
                    u = un;
                    continue;
                }
            }
        }
        let j0 = land.value(&u);
        let gg = g.dot(&g);
        t = (t * 2.0).min(1e6);
        loop {
            let cand = project_cap(land, &u - t * &g, phi_cap);
            let jc = land.value(&cand);
            if jc <= j0 - 1e-4 * t * gg || t < 1e-18 {
                u = cand;
                break;
            }
            t *= 0.5;
        }
    }
    (u, GD_MAXIT, false)
}

/// Minimize the energy inside the sublevel ball Phi <= phi_cap, starting
/// from `seed`. Iterates leaving the ball are rescaled back toward the
/// origin along their ray.
pub fn find_local_minimizer(
    ps: &ProblemSpec,
    seed: &DiscreteField,
    phi_cap: f64,
) -> Result<CriticalPointReport> {
    ps.check_grid(seed)?;
    let land = plain(ps);
    if 0.5 * land.quad(&seed.values) >= phi_cap {
        return Err(Error::argument("seed lies outside the sublevel ball"));
    }
    let (u, iterations, converged) = gradient_descent(&land, &seed.values, phi_cap);
    let grad_norm = sup_norm(&land.grad(&u));
    let energy_val = land.value(&u);
    let phi_val = 0.5 * land.quad(&u);
    if !converged {
        return Err(Error::convergence(format!(
            "local minimizer search hit the iteration cap ({GD_MAXIT}); best iterate has \
             gradient sup-norm {grad_norm:.3e} and energy {energy_val:.6e}"
        )));
    }
    let min_value = u.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    Ok(CriticalPointReport {
        field: DiscreteField {
            grid: ps.grid.clone(),
            values: u,
        },
        energy: energy_val,
        grad_norm,
        iterations,
        kind: CriticalPointKind::LocalMin,
        min_value,
        phi_value: phi_val,
        certified: true,
    })
}

/// Doubling search along the ray through `w` for a point with energy below
/// -1. Fails with a coercivity diagnostic when the reaction has no
/// superquadratic term (the energy then grows along every ray).
pub fn find_negative_endpoint(
    ps: &ProblemSpec,
    w: &DiscreteField,
) -> Result<(f64, DiscreteField)> {
    ps.check_grid(w)?;
    if w.values.iter().any(|&x| x < 0.0) || w.values.iter().all(|&x| x == 0.0) {
        return Err(Error::argument(
            "endpoint direction must be nonnegative and nonzero",
        ));
    }
    if ps.reaction.max_exponent() <= 2.0 {
        return Err(Error::argument(
            "coercive energy: every reaction exponent is <= 2, so J(tau w) -> +infinity \
             along rays and no negative-energy endpoint exists",
        ));
    }
    let land = plain(ps);
    let mut tau = 1.0f64;
    for _ in 0..200 {
        if land.value(&(tau * &w.values)) < -1.0 {
            return Ok((
                tau,
                DiscreteField {
                    grid: w.grid.clone(),
                    values: tau * &w.values,
                },
            ));
        }
        tau *= 2.0;
    }
    Err(Error::convergence(
        "doubling search found no negative-energy point within 200 doublings",
    ))
}

// ---------------------------------------------------------------------------
// Mountain pass.
//
// Primary mechanism: descent on paths. Each interior point of a discrete
// path from 0 to the negative endpoint takes a damped gradient step
// (accepted only on an energy decrease), the path is re-parameterized by
// arc length every sweep, and the search monitors the path maximum. The
// path maximum converges to the saddle in well-resolved runs; when the
// barrier is much thinner than the path spacing the discrete path can slide
// past it ("tunneling": every interior sample ends up at nonpositive
// energy). The search therefore records the best positive-level maximum
// seen and, if plain path descent stalls or tunnels, switches to a
// peak-selection refinement: maximize along rays, descend the ray-peak
// level, which walks down the barrier ridge to the lowest saddle. A
// safeguarded Newton iteration finishes to certificate accuracy either way.
// ---------------------------------------------------------------------------

const MP_GTOL: f64 = 1e-6;
const MP_SWEEP_BUDGET: usize = 400;
const MP_STAGNATION: usize = 500;

fn reparam(path: &mut Vec<DVector<f64>>) {
    let m = path.len();
    let seg: Vec<f64> = (0..m - 1).map(|k| (&path[k + 1] - &path[k]).norm()).collect();
    let mut cum = vec![0.0f64; m];
    for k in 0..m - 1 {
        cum[k + 1] = cum[k] + seg[k];
    }
    let total = cum[m - 1];
    if total <= 0.0 {
        return;
    }
    let mut newp = Vec::with_capacity(m);
    newp.push(path[0].clone());
    for j in 1..m - 1 {
        let tv = total * j as f64 / (m as f64 - 1.0);
        let mut i = match cum.binary_search_by(|c| c.partial_cmp(&tv).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i = i.min(m - 2);
        let denom = (cum[i + 1] - cum[i]).max(1e-300);
        let a = (tv - cum[i]) / denom;
        newp.push(&path[i] * (1.0 - a) + &path[i + 1] * a);
    }
    newp.push(path[m - 1].clone());
    *path = newp;
}

/// Safeguarded Newton for a saddle: steps are accepted only if they shrink
/// the gradient, and the result is rejected when it collapses toward zero
/// or to nonpositive energy (the trivial critical point).
fn newton_saddle(
    land: &impl Landscape,
    start: &DVector<f64>,
    ref_norm: f64,
    gtol: f64,
) -> Option<(DVector<f64>, usize)> {
    let mut v = start.clone();
    for it in 0..200 {
        let g = land.grad(&v);
        let gn = sup_norm(&g);
        if gn <= gtol {
            if land.value(&v) > 0.0 && v.norm() > 0.2 * ref_norm {
                return Some((v, it));
            }
            return None;
        }
        let d = land.hess(&v).lu().solve(&(-&g))?;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..50 {
            let vn = &v + t * &d;
            let gnn = sup_norm(&land.grad(&vn));
            if gnn.is_finite() && gnn < gn {
                v = vn;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

/// Maximum of the landscape along the ray {tau w : tau > 0}: coarse
/// logarithmic bracketing followed by golden-section refinement. The
/// quadratic part is evaluated once per direction.
fn ray_peak(land: &impl Landscape, w: &DVector<f64>) -> (f64, f64) {
    let q = land.quad(w);
    let eval = |tau: f64| 0.5 * tau * tau * q + land.nonquad(&(tau * w));
    let mut best_tau = 1e-3;
    let mut best_val = f64::NEG_INFINITY;
    let mut taus = Vec::with_capacity(121);
    for j in 0..121 {
        let tau = 10f64.powf(-3.0 + 6.0 * j as f64 / 120.0);
        taus.push(tau);
        let val = eval(tau);
        if val > best_val {
            best_val = val;
            best_tau = tau;
        }
    }
    let k = taus.iter().position(|&t| t == best_tau).unwrap();
    let (mut a, mut b) = (taus[k.saturating_sub(1)], taus[(k + 1).min(120)]);
    let phi_ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi_ratio * (b - a);
    let mut d = a + phi_ratio * (b - a);
    for _ in 0..80 {
        if eval(c) > eval(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi_ratio * (b - a);
        d = a + phi_ratio * (b - a);
    }
    let tau = 0.5 * (a + b);
    (tau, eval(tau))
}

/// Peak-selection refinement: descend the map w -> max_ray J(tau w), which
/// strictly decreases the barrier level toward the lowest saddle.
fn minimax_refine(
    land: &impl Landscape,
    w0: &DVector<f64>,
    gtol: f64,
    maxit: usize,
) -> (DVector<f64>, usize, bool) {
    let mut w = w0 / w0.norm();
    let (mut tau, mut level) = ray_peak(land, &w);
    let mut step = 1e-2f64;
    for it in 0..maxit {
        let v = tau * &w;
        let g = land.grad(&v);
        if sup_norm(&g) <= gtol {
            return (v, it, true);
        }
        let mut t = (step * 2.0).min(1e3);
        let mut accepted = false;
        for _ in 0..60 {
            let wn = &v - t * &g;
            let nn = wn.norm();
            if nn > 1e-14 {
                let wn = wn / nn;
                let (taun, leveln) = ray_peak(land, &wn);
                if leveln.is_finite() && leveln < level - 1e-16 * level.abs().max(1.0) {
                    w = wn;
                    tau = taun;
                    level = leveln;
                    step = t;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return (tau * &w, it, false);
        }
    }
    (tau * &w, maxit, false)
}

/// The straight path tau -> tau * endpoint, with its energy maximum. Any
/// such candidate path bounds the mountain-pass level from above.
pub fn straight_path(
    ps: &ProblemSpec,
    endpoint: &DiscreteField,
    path_points: usize,
) -> Result<PathState> {
    ps.check_grid(endpoint)?;
    if path_points < 2 {
        return Err(Error::argument("a path needs at least 2 points"));
    }
    let land = plain(ps);
    let points: Vec<DiscreteField> = (0..path_points)
        .map(|k| DiscreteField {
            grid: ps.grid.clone(),
            values: &endpoint.values * (k as f64 / (path_points as f64 - 1.0)),
        })
        .collect();
    let (argmax_index, max_energy) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, land.value(&p.values)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    Ok(PathState {
        points,
        max_energy,
        argmax_index,
    })
}

struct MpOutcome {
    point: DVector<f64>,
    level: f64,
    iterations: usize,
}

fn mp_core(
    land: &impl Landscape,
    endpoint: &DVector<f64>,
    m: usize,
    gtol: f64,
) -> Result<MpOutcome> {
    let j_end = land.value(endpoint);
    if !(j_end < 0.0) {
        return Err(Error::argument(format!(
            "mountain-pass endpoint must have negative energy, got {j_end}"
        )));
    }
    let ep_norm = endpoint.norm();
    let mut path: Vec<DVector<f64>> = (0..m)
        .map(|k| endpoint * (k as f64 / (m as f64 - 1.0)))
        .collect();
    let initial_max = path
        .iter()
        .map(|p| land.value(p))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(initial_max > 0.0) {
        return Err(Error::argument(
            "no energy barrier along the initial path: mountain-pass geometry absent",
        ));
    }

    let mut steps = vec![1e-2f64; m];
    let mut last_level = f64::INFINITY;
    let mut stall = 0usize;
    let mut best_positive: Option<(DVector<f64>, f64)> = None;
    let mut iterations = 0usize;

    for sweep in 0..MP_SWEEP_BUDGET {
        iterations = sweep + 1;
        // Per-point step cap tied to the path resolution: a point may not
        // move farther than half the inter-point spacing in one sweep.
        let plen: f64 = (0..m - 1).map(|k| (&path[k + 1] - &path[k]).norm()).sum();
        let cap = (0.5 * plen / (m as f64 - 1.0)).max(1e-14);
        for k in 1..m - 1 {
            let g = land.grad(&path[k]);
            let gn = g.norm();
            if gn < 1e-16 {
                continue;
            }
            let j0 = land.value(&path[k]);
            let mut t = steps[k].min(cap / gn) * 2.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand = &path[k] - t * &g;
                let jc = land.value(&cand);
                if jc.is_finite() && jc < j0 {
                    path[k] = cand;
                    steps[k] = t;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                steps[k] = (steps[k] * 0.5).max(1e-18);
            }
        }
        reparam(&mut path);

        let levels: Vec<f64> = path.iter().map(|p| land.value(p)).collect();
        let (ka, &level) = levels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if level > 0.0 && ka > 0 && ka < m - 1 {
            let better = best_positive.as_ref().map_or(true, |(_, l)| level < *l);
            if better {
                best_positive = Some((path[ka].clone(), level));
            }
            let ga = sup_norm(&land.grad(&path[ka]));
            if ga <= gtol {
                return Ok(MpOutcome {
                    point: path[ka].clone(),
                    level,
                    iterations,
                });
            }
            // Periodic Newton attempt once the path has relaxed: near the
            // saddle the quadratic model converges in a handful of steps.
            if sweep >= 30 && sweep % 10 == 0 {
                if let Some((v, _)) = newton_saddle(land, &path[ka], ep_norm.min(path[ka].norm()), 1e-9)
                {
                    return Ok(MpOutcome {
                        level: land.value(&v),
                        point: v,
                        iterations,
                    });
                }
            }
        } else {
            // Tunneling: the sampled path has slipped past a barrier
            // thinner than its resolution. Path descent cannot recover;
            // hand over to the peak-selection refinement.
            break;
        }
        if (level - last_level).abs() < 1e-14 {
            stall += 1;
            if stall >= MP_STAGNATION {
                break;
            }
        } else {
            stall = 0;
        }
        last_level = level;
    }

    // Refinement phase: start from the best barrier point seen (or the
    // endpoint direction if the very first sweep already tunneled).
    let dir = best_positive
        .map(|(p, _)| p)
        .unwrap_or_else(|| endpoint.clone());
    let (v, extra, _) = minimax_refine(land, &dir, gtol, 5000);
    iterations += extra;
    let candidate = newton_saddle(land, &v, v.norm(), 1e-10).map(|(v, _)| v).unwrap_or(v);
    let grad_norm = sup_norm(&land.grad(&candidate));
    let level = land.value(&candidate);
    if grad_norm <= gtol && level > 0.0 {
        return Ok(MpOutcome {
            point: candidate,
            level,
            iterations,
        });
    }
    Err(Error::convergence(format!(
        "mountain-pass search stagnated: best level {level:.6e}, gradient sup-norm \
         {grad_norm:.3e} after {iterations} sweeps/refinement iterations"
    )))
}

/// Descent-on-paths mountain-pass search on the plain energy, from 0 to a
/// negative-energy endpoint.
pub fn mountain_pass(
    ps: &ProblemSpec,
    endpoint: &DiscreteField,
    path_points: usize,
) -> Result<CriticalPointReport> {
    ps.check_grid(endpoint)?;
    if path_points < 16 {
        return Err(Error::argument(format!(
            "need at least 16 path points, got {path_points}"
        )));
    }
    let land = plain(ps);
    let out = mp_core(&land, &endpoint.values, path_points, MP_GTOL)?;
    let grad_norm = sup_norm(&land.grad(&out.point));
    let phi_val = 0.5 * land.quad(&out.point);
    let min_value = out.point.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    Ok(CriticalPointReport {
        field: DiscreteField {
            grid: ps.grid.clone(),
            values: out.point,
        },
        energy: out.level,
        grad_norm,
        iterations: out.iterations,
        kind: CriticalPointKind::MountainPass,
        min_value,
        phi_value: phi_val,
        certified: true,
    })
}

// ---------------------------------------------------------------------------
// Bubble test field.
// ---------------------------------------------------------------------------

/// Truncated, normalized Aubin-Talenti bubble on the grid:
/// w = eta v_eps / ||eta v_eps||_{2*_s}, with a smooth cutoff eta supported
/// in the ball of radius `cutoff_r` about `x0` and identically 1 on half
/// that radius. The discrete critical norm equals 1 exactly after the
/// division.
pub fn bubble_field(
    grid: &Grid1D,
    s: f64,
    eps: f64,
    x0: f64,
    cutoff_r: f64,
) -> Result<DiscreteField> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::domain(format!(
            "bubble construction needs s in (0, 1/2) in one dimension, got {s}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::domain(format!("bubble width eps must be positive, got {eps}")));
    }
    if x0 - cutoff_r <= -grid.radius || x0 + cutoff_r >= grid.radius {
        return Err(Error::argument(format!(
            "cutoff ball [{:.3}, {:.3}] is not contained in the open interval (-{}, {})",
            x0 - cutoff_r,
            x0 + cutoff_r,
            grid.radius,
            grid.radius
        )));
    }
    let crit_exp = 2.0 / (1.0 - 2.0 * s);
    let expo = (1.0 - 2.0 * s) / 2.0;
    let smooth = |z: f64| if z > 1e-12 { (-1.0 / z).exp() } else { 0.0 };
    let raw = DiscreteField::from_fn(grid.clone(), |x| {
        let d = (x - x0).abs();
        if d >= cutoff_r {
            return 0.0;
        }
        let t = ((d - 0.5 * cutoff_r) / (0.5 * cutoff_r)).clamp(0.0, 1.0);
        let eta = smooth(1.0 - t) / (smooth(1.0 - t) + smooth(t));
        eta * eps.powf(expo) / (eps * eps + (x - x0) * (x - x0)).powf(expo)
    });
    let norm = crate::discretization::lp_norm(&raw, crit_exp)?;
    if norm <= 0.0 {
        return Err(Error::Numeric("bubble is identically zero on the grid".into()));
    }
    Ok(DiscreteField {
        grid: raw.grid,
        values: raw.values / norm,
    })
}

// ---------------------------------------------------------------------------
// Full experiment pipeline.
// ---------------------------------------------------------------------------

fn classify(ps: &ProblemSpec) -> Result<(f64, f64, Option<(f64, f64)>, Option<f64>)> {
    // Returns (a_p, p) for the sublinear term, the (a_q, q) superquadratic
    // subcritical term if present, and the critical coefficient if present.
    let mut low = None;
    let mut high = None;
    let mut crit = None;
    for t in &ps.reaction.terms {
        if (t.exponent - ps.params.crit_exp).abs() < 1e-9 {
            crit = Some(t.coeff);
        } else if t.exponent < 2.0 {
            low = Some((t.coeff, t.exponent));
        } else if t.exponent > 2.0 {
            high = Some((t.coeff, t.exponent));
        }
    }
    let (a_p, p_exp) = low.ok_or_else(|| {
        Error::argument("experiment requires a sublinear reaction term (exponent in (1,2))")
    })?;
    Ok((a_p, p_exp, high, crit))
}

/// Run the full two-solution pipeline: thresholds, seed, constrained local
/// minimization (negative energy), negative endpoint, mountain pass
/// (positive energy). In the critical regime the second search runs on the
/// translated functional around the minimizer u and returns w = u + v as
/// the second solution, which then dominates u node-wise.
pub fn two_solution_experiment(
    ps: &ProblemSpec,
) -> Result<(CriticalPointReport, CriticalPointReport)> {
    let (a_p, p_exp, high, crit) = classify(ps)?;

    if crit.is_some() {
        // Reaction mu (t+)^{p-1} + (t+)^{2*_s-1}: the sublinear coefficient
        // plays the role of mu in the critical thresholds.
        return critical_branch(ps, a_p, p_exp);
    }

    let (a_q, q_exp) = high.ok_or_else(|| {
        Error::argument(
            "experiment requires a superquadratic term (exponent in (2, 2*_s]) \
             for the mountain-pass geometry",
        )
    })?;

    let lambda_star =
        constants::lambda_star_subcritical(&ps.params, &ps.domain, a_p, p_exp, a_q, q_exp)?;
    let r = constants::radius_subcritical(&ps.params, &ps.domain, a_p, p_exp, a_q, q_exp)?;
    let certified = ps.lambda < lambda_star;

    let seed = seed_minimizer(ps, r)
        .map_err(|e| Error::convergence(format!("stage seed: {e}")))?;
    let mut min_report = find_local_minimizer(ps, &seed, r)
        .map_err(|e| Error::convergence(format!("stage local-min: {e}")))?;
    min_report.certified = certified;

    let rad = ps.domain.radius;
    let direction = DiscreteField::from_fn(ps.grid.clone(), |x| {
        let z = 1.0 - (x / rad) * (x / rad);
        z * z
    });
    let (_, endpoint) = find_negative_endpoint(ps, &direction)
        .map_err(|e| Error::convergence(format!("stage endpoint: {e}")))?;
    let mut mp_report = mountain_pass(ps, &endpoint, 33)
        .map_err(|e| Error::convergence(format!("stage mountain-pass: {e}")))?;
    mp_report.certified = certified;
    Ok((min_report, mp_report))
}

fn critical_branch(
    ps: &ProblemSpec,
    mu: f64,
    p_exp: f64,
) -> Result<(CriticalPointReport, CriticalPointReport)> {
    let r = constants::radius_critical(&ps.params);
    let mu_star = constants::mu_star_critical(&ps.params, &ps.domain, p_exp, 1.0)?;
    let lambda_r = constants::lambda_r_star(&ps.params, &ps.domain, p_exp, 1.0, mu, r)?;
    let certified = mu < mu_star && ps.lambda <= lambda_r;

    let seed = seed_minimizer(ps, r)
        .map_err(|e| Error::convergence(format!("stage seed: {e}")))?;
    let mut min_report = find_local_minimizer(ps, &seed, r)
        .map_err(|e| Error::convergence(format!("stage local-min: {e}")))?;
    min_report.certified = certified;

    let te = TranslatedEnergy {
        op: &ps.operator,
        reaction: &ps.reaction,
        lambda: ps.lambda,
        h: ps.grid.h,
        base: &min_report.field.values,
    };

    // Initial direction: a concentrated bubble, the profile that realizes
    // the optimal embedding constant and keeps the barrier level low.
    let bubble = bubble_field(&ps.grid, ps.params.s, 0.05 * ps.grid.radius, 0.0, 0.25 * ps.grid.radius)
        .map_err(|e| Error::convergence(format!("stage bubble: {e}")))?;
    let mut tau = 1.0f64;
    let mut endpoint = None;
    for _ in 0..200 {
        let cand = tau * &bubble.values;
        if te.value(&cand) < -1.0 {
            endpoint = Some(cand);
            break;
        }
        tau *= 2.0;
    }
    let endpoint = endpoint.ok_or_else(|| {
        Error::convergence("stage endpoint: translated energy is not unbounded below along the bubble ray")
    })?;

    let out = mp_core(&te, &endpoint, 33, MP_GTOL)
        .map_err(|e| Error::convergence(format!("stage mountain-pass: {e}")))?;
    let v = out.point;
    let grad_norm = sup_norm(&te.grad(&v));
    let w_values = &min_report.field.values + &v;
    let min_value = w_values.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let land = plain(ps);
    let phi_val = 0.5 * land.quad(&w_values);
    let mp_report = CriticalPointReport {
        field: DiscreteField {
            grid: ps.grid.clone(),
            values: w_values,
        },
        // The certified level is the one of the translated functional; it is
        // the quantity compared against the compactness threshold c*.
        energy: out.level,
        grad_norm,
        iterations: out.iterations,
        kind: CriticalPointKind::MountainPass,
        min_value,
        phi_value: phi_val,
        certified,
    };
    Ok((min_report, mp_report))
}
