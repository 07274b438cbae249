//! Energy landscape and critical-point searches: gradient consistency,
//! seed admissibility, the two-solution pipeline in both regimes, and the
//! structural inequalities behind the translated-functional argument.

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fraclab::constants::{
    lambda_star_subcritical, mu_star_critical, radius_critical, radius_subcritical,
    talenti_constant, DomainSpec, FracParams, PowerReaction,
};
use fraclab::discretization::{assemble_operator, build_grid, quad_form, DiscreteField};
use fraclab::variational::{
    bubble_field, energy, energy_gradient, find_local_minimizer, find_negative_endpoint,
    mountain_pass, phi, reaction_eval, seed_minimizer, straight_path, translated_energy,
    translated_gradient, two_solution_experiment, CriticalPointKind, ProblemSpec,
};

/// Subcritical instance: s = 0.4 on (-1,1), reaction t^{1/2} + t^2
/// (exponents p = 3/2, q = 3), lambda at the given fraction of lambda*.
fn subcritical(n: usize, lambda_frac: f64) -> ProblemSpec {
    let params = FracParams::new(1, 0.4).unwrap();
    let domain = DomainSpec::interval(1.0).unwrap();
    let grid = build_grid(1.0, n).unwrap();
    let op = assemble_operator(&grid, 0.4).unwrap();
    let reaction = PowerReaction::new(vec![(1.0, 1.5), (1.0, 3.0)]).unwrap();
    let ls = lambda_star_subcritical(&params, &domain, 1.0, 1.5, 1.0, 3.0).unwrap();
    ProblemSpec::new(params, domain, reaction, lambda_frac * ls, grid, op).unwrap()
}

/// Critical instance: s = 1/4 on (-1,1) (so 2* = 4), reaction
/// mu t^{1/2} + t^3 with mu at the given fraction of mu*, lambda = 1.
fn critical(n: usize, mu_frac: f64) -> ProblemSpec {
    let params = FracParams::new(1, 0.25).unwrap();
    let domain = DomainSpec::interval(1.0).unwrap();
    let grid = build_grid(1.0, n).unwrap();
    let op = assemble_operator(&grid, 0.25).unwrap();
    let mu = mu_frac * mu_star_critical(&params, &domain, 1.5, 1.0).unwrap();
    let reaction = PowerReaction::new(vec![(mu, 1.5), (1.0, 4.0)]).unwrap();
    ProblemSpec::new(params, domain, reaction, 1.0, grid, op).unwrap()
}

fn random_field(ps: &ProblemSpec, rng: &mut ChaCha8Rng, scale: f64) -> DiscreteField {
    DiscreteField::new(
        ps.grid.clone(),
        DVector::from_fn(ps.grid.n, |_, _| rng.random_range(-scale..scale)),
    )
    .unwrap()
}

fn sup(v: &DVector<f64>) -> f64 {
    v.amax()
}

// ---------------------------------------------------------------------------
// Energy and gradient.
// ---------------------------------------------------------------------------

#[test]
fn reaction_eval_positive_part() {
    let r = PowerReaction::new(vec![(2.0, 1.5), (1.0, 3.0)]).unwrap();
    assert_eq!(reaction_eval(&r, -0.5), (0.0, 0.0));
    let (f, big_f) = reaction_eval(&r, 1.0);
    assert!((f - 3.0).abs() < 1e-14);
    assert!((big_f - (2.0 / 1.5 + 1.0 / 3.0)).abs() < 1e-14);
}

#[test]
fn energy_vanishes_at_zero_and_is_quadratic_without_reaction() {
    let ps = subcritical(32, 0.5);
    let zero = DiscreteField::zeros(ps.grid.clone());
    assert_eq!(energy(&ps, &zero).unwrap(), 0.0);
    assert_eq!(phi(&ps, &zero).unwrap(), 0.0);

    // lambda = 0 switches the reaction off: J = Phi >= 0 on every field.
    let params = FracParams::new(1, 0.4).unwrap();
    let domain = DomainSpec::interval(1.0).unwrap();
    let grid = build_grid(1.0, 32).unwrap();
    let op = assemble_operator(&grid, 0.4).unwrap();
    let reaction = PowerReaction::new(vec![(1.0, 3.0)]).unwrap();
    let quad_ps = ProblemSpec::new(params, domain, reaction, 0.0, grid, op).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let u = random_field(&quad_ps, &mut rng, 2.0);
        let j = energy(&quad_ps, &u).unwrap();
        assert!((j - phi(&quad_ps, &u).unwrap()).abs() < 1e-12 * j.abs().max(1.0));
        assert!(j >= 0.0);
    }
}

#[test]
fn energy_diverges_along_superquadratic_rays() {
    let ps = subcritical(32, 0.5);
    let w = DiscreteField::from_fn(ps.grid.clone(), |x| 1.0 - x * x);
    let at = |tau: f64| {
        let scaled = DiscreteField::new(ps.grid.clone(), tau * &w.values).unwrap();
        energy(&ps, &scaled).unwrap()
    };
    // Past the barrier the cubic term dominates: the energy decreases along
    // the ray and is unbounded below.
    assert!(at(64.0) < at(32.0) && at(32.0) < at(16.0));
    assert!(at(64.0) < -1.0, "energy never went negative along the ray");
}

#[test]
fn gradient_matches_finite_differences() {
    let ps = subcritical(48, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_field(&ps, &mut rng, 1.0);
    let grad = energy_gradient(&ps, &u).unwrap();
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let i = rng.random_range(0..ps.grid.n);
        let mut up = u.values.clone();
        let mut dn = u.values.clone();
        up[i] += eps;
        dn[i] -= eps;
        let jp = energy(&ps, &DiscreteField::new(ps.grid.clone(), up).unwrap()).unwrap();
        let jm = energy(&ps, &DiscreteField::new(ps.grid.clone(), dn).unwrap()).unwrap();
        let fd = (jp - jm) / (2.0 * eps);
        worst = worst.max((fd - grad.values[i]).abs() / grad.values[i].abs().max(1.0));
    }
    assert!(worst < 1e-5, "worst finite-difference deviation {worst}");
}

// ---------------------------------------------------------------------------
// Seeding and the local minimizer.
// ---------------------------------------------------------------------------

#[test]
fn seed_lies_inside_the_sublevel_ball_with_negative_energy() {
    let ps = subcritical(64, 0.5);
    let r = radius_subcritical(&ps.params, &ps.domain, 1.0, 1.5, 1.0, 3.0).unwrap();
    let seed = seed_minimizer(&ps, r).unwrap();
    assert!(seed.values.min() > 0.0);
    assert!(phi(&ps, &seed).unwrap() < r);
    assert!(
        energy(&ps, &seed).unwrap() < 0.0,
        "seed must already have negative energy (the sublinear term dominates at small amplitude)"
    );
}

#[test]
fn local_minimizer_is_stationary_negative_and_positive_valued() {
    let ps = subcritical(64, 0.5);
    let r = radius_subcritical(&ps.params, &ps.domain, 1.0, 1.5, 1.0, 3.0).unwrap();
    let seed = seed_minimizer(&ps, r).unwrap();
    let rep = find_local_minimizer(&ps, &seed, r).unwrap();
    assert_eq!(rep.kind, CriticalPointKind::LocalMin);
    assert!(rep.energy < 0.0, "minimizer energy {} not negative", rep.energy);
    assert!(rep.min_value > 0.0, "minimizer not node-wise positive");
    assert!(rep.phi_value < r);
    // Independent certificate: recompute the gradient from the stored field.
    let grad = energy_gradient(&ps, &rep.field).unwrap();
    assert!(sup(&grad.values) <= 1e-7, "gradient sup {}", sup(&grad.values));

    // Second-difference probe: along random directions the energy curves
    // upward at the minimizer.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eps = 1e-4;
    for _ in 0..10 {
        let d = random_field(&ps, &mut rng, 1.0);
        let scale = eps / sup(&d.values);
        let up =
            DiscreteField::new(ps.grid.clone(), &rep.field.values + scale * &d.values).unwrap();
        let dn =
            DiscreteField::new(ps.grid.clone(), &rep.field.values - scale * &d.values).unwrap();
        let probe = energy(&ps, &up).unwrap() + energy(&ps, &dn).unwrap() - 2.0 * rep.energy;
        assert!(probe > -1e-10, "negative curvature {probe} at the minimizer");
    }
}

#[test]
fn minimizer_degenerates_as_lambda_vanishes() {
    // The sublinear well shrinks to the origin when lambda -> 0.
    let big = {
        let ps = subcritical(48, 0.5);
        let r = radius_subcritical(&ps.params, &ps.domain, 1.0, 1.5, 1.0, 3.0).unwrap();
        let seed = seed_minimizer(&ps, r).unwrap();
        find_local_minimizer(&ps, &seed, r).unwrap()
    };
    let small = {
        let ps = subcritical(48, 1e-3);
        let r = radius_subcritical(&ps.params, &ps.domain, 1.0, 1.5, 1.0, 3.0).unwrap();
        let seed = seed_minimizer(&ps, r).unwrap();
        find_local_minimizer(&ps, &seed, r).unwrap()
    };
    assert!(sup(&small.field.values) < 1e-2 * sup(&big.field.values));
}

// ---------------------------------------------------------------------------
// Mountain-pass geometry.
// ---------------------------------------------------------------------------

#[test]
fn negative_endpoint_exists_only_with_a_superquadratic_term() {
    let ps = subcritical(48, 0.5);
    let w = DiscreteField::from_fn(ps.grid.clone(), |x| (1.0 - x * x).powi(2));
    let (tau, endpoint) = find_negative_endpoint(&ps, &w).unwrap();
    assert!(tau >= 1.0);
    assert!(energy(&ps, &endpoint).unwrap() < -1.0);

    // Sublinear-only reaction: the energy is coercive, no endpoint exists.
    let params = FracParams::new(1, 0.4).unwrap();
    let domain = DomainSpec::interval(1.0).unwrap();
    let grid = build_grid(1.0, 48).unwrap();
    let op = assemble_operator(&grid, 0.4).unwrap();
    let reaction = PowerReaction::new(vec![(1.0, 1.5)]).unwrap();
    let coercive = ProblemSpec::new(params, domain, reaction, 1.0, grid, op).unwrap();
    let w2 = DiscreteField::from_fn(coercive.grid.clone(), |x| (1.0 - x * x).powi(2));
    let err = find_negative_endpoint(&coercive, &w2).unwrap_err();
    assert!(err.to_string().contains("coercive"), "unexpected error: {err}");
}

#[test]
fn mountain_pass_level_is_positive_and_below_the_straight_path() {
    let ps = subcritical(64, 0.5);
    let w = DiscreteField::from_fn(ps.grid.clone(), |x| (1.0 - x * x).powi(2));
    let (_, endpoint) = find_negative_endpoint(&ps, &w).unwrap();
    let straight = straight_path(&ps, &endpoint, 33).unwrap();
    let rep = mountain_pass(&ps, &endpoint, 33).unwrap();
    assert_eq!(rep.kind, CriticalPointKind::MountainPass);
    assert!(rep.energy > 0.0);
    assert!(
        rep.energy <= straight.max_energy + 1e-10,
        "descent produced a level {} above the straight-path bound {}",
        rep.energy,
        straight.max_energy
    );
    assert!(rep.min_value > 0.0, "mountain-pass point not positive");
    let grad = energy_gradient(&ps, &rep.field).unwrap();
    assert!(sup(&grad.values) <= 1e-6);
}

// ---------------------------------------------------------------------------
// Two-solution pipeline, subcritical.
// ---------------------------------------------------------------------------

#[test]
fn subcritical_experiment_produces_ordered_pair() {
    let ps = subcritical(64, 0.5);
    let (min_rep, mp_rep) = two_solution_experiment(&ps).unwrap();
    assert!(min_rep.certified && mp_rep.certified);
    assert!(min_rep.energy < 0.0 && mp_rep.energy > 0.0);
    assert!(min_rep.min_value > 0.0 && mp_rep.min_value > 0.0);
    // Genuinely distinct solutions.
    let diff = &mp_rep.field.values - &min_rep.field.values;
    let rel = diff.norm() / min_rep.field.values.norm();
    assert!(rel > 1e-2, "solutions nearly coincide: relative distance {rel}");
}

#[test]
fn experiment_requires_a_sublinear_term() {
    let params = FracParams::new(1, 0.4).unwrap();
    let domain = DomainSpec::interval(1.0).unwrap();
    let grid = build_grid(1.0, 32).unwrap();
    let op = assemble_operator(&grid, 0.4).unwrap();
    let reaction = PowerReaction::new(vec![(1.0, 3.0)]).unwrap();
    let ps = ProblemSpec::new(params, domain, reaction, 1.0, grid, op).unwrap();
    assert!(two_solution_experiment(&ps).is_err());
}

// ---------------------------------------------------------------------------
// Bubble field.
// ---------------------------------------------------------------------------

#[test]
fn bubble_is_normalized_symmetric_and_supported() {
    let grid = build_grid(1.0, 256).unwrap();
    let w = bubble_field(&grid, 0.25, 0.1, 0.0, 0.25).unwrap();
    // Exact unit critical norm by construction.
    let crit_exp = 4.0;
    let norm = fraclab::discretization::lp_norm(&w, crit_exp).unwrap();
    assert!((norm - 1.0).abs() < 1e-10);
    // Even symmetry about the center.
    for i in 0..grid.n {
        assert!((w.values[i] - w.values[grid.n - 1 - i]).abs() < 1e-12);
    }
    // Supported inside the cutoff ball.
    for (x, v) in grid.nodes.iter().zip(w.values.iter()) {
        if x.abs() >= 0.25 {
            assert_eq!(*v, 0.0);
        }
    }
    assert!(bubble_field(&grid, 0.6, 0.1, 0.0, 0.25).is_err()); // s >= 1/2
    assert!(bubble_field(&grid, 0.25, 0.1, 0.9, 0.25).is_err()); // cutoff leaves the domain
}

#[test]
fn bubble_energy_approaches_the_optimal_constant() {
    // The embedding ||w||_{2*} <= T [w] with unit critical norm bounds
    // h w^T L w below by 1/T^2; the concentrating bubbles approach that
    // bound from above.
    let s = 0.25;
    let params = FracParams::new(1, s).unwrap();
    let t2 = talenti_constant(&params).powi(-2);
    let grid = build_grid(1.0, 512).unwrap();
    let op = assemble_operator(&grid, s).unwrap();
    let q_wide = quad_form(&op, &bubble_field(&grid, s, 0.4, 0.0, 0.45).unwrap()).unwrap();
    let q_narrow = quad_form(&op, &bubble_field(&grid, s, 0.1, 0.0, 0.45).unwrap()).unwrap();
    assert!(q_narrow < q_wide, "narrower bubble did not lower the quotient");
    assert!(q_narrow > 0.9 * t2, "quotient {q_narrow} fell below the bound {t2}");
}

// ---------------------------------------------------------------------------
// Translated functional (critical regime).
// ---------------------------------------------------------------------------

fn critical_minimizer(ps: &ProblemSpec) -> DiscreteField {
    let r = radius_critical(&ps.params);
    let seed = seed_minimizer(ps, r).unwrap();
    find_local_minimizer(ps, &seed, r).unwrap().field
}

#[test]
fn translated_energy_at_zero_and_on_nonpositive_fields() {
    let ps = critical(64, 0.5);
    let u = critical_minimizer(&ps);
    let zero = DiscreteField::zeros(ps.grid.clone());
    assert_eq!(translated_energy(&ps, &u, &zero).unwrap(), 0.0);

    // On v <= 0 the positive-part reaction terms cancel and the translated
    // functional reduces to the pure quadratic Phi(v) >= 0.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let v = DiscreteField::new(
            ps.grid.clone(),
            DVector::from_fn(ps.grid.n, |_, _| -rng.random_range(0.0..1.0f64)),
        )
        .unwrap();
        let jt = translated_energy(&ps, &u, &v).unwrap();
        let ph = phi(&ps, &v).unwrap();
        assert!((jt - ph).abs() < 1e-10 * ph.max(1.0), "{jt} vs {ph}");
        assert!(jt >= 0.0);
    }
}

#[test]
fn translated_energy_dominates_the_energy_difference() {
    // The key inequality of the translated-functional method:
    // Jt(v) >= J(u + v+) - J(u) + Phi(v-), for the minimizer u and any v.
    let ps = critical(64, 0.5);
    let u = critical_minimizer(&ps);
    let ju = energy(&ps, &u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..100 {
        let scale = 10f64.powf(rng.random_range(-2.0..1.0));
        let v = random_field(&ps, &mut rng, scale);
        let _ = k;
        let jt = translated_energy(&ps, &u, &v).unwrap();
        let vplus = DiscreteField::new(ps.grid.clone(), v.values.map(|x| x.max(0.0))).unwrap();
        let vminus = DiscreteField::new(ps.grid.clone(), v.values.map(|x| x.min(0.0))).unwrap();
        let shifted =
            DiscreteField::new(ps.grid.clone(), &u.values + &vplus.values).unwrap();
        let rhs = energy(&ps, &shifted).unwrap() - ju + phi(&ps, &vminus).unwrap();
        let slack = 1e-8 + 1e-3 * jt.abs();
        assert!(jt + slack >= rhs, "inequality violated: {jt} < {rhs}");
    }
}

#[test]
fn quadratic_form_dominates_sign_decomposition() {
    // h v^T L v >= h v+^T L v+ + h v-^T L v-: splitting by sign can only
    // release nonlocal interaction energy.
    let ps = critical(64, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let v = random_field(&ps, &mut rng, 1.0);
        let vp = DiscreteField::new(ps.grid.clone(), v.values.map(|x| x.max(0.0))).unwrap();
        let vm = DiscreteField::new(ps.grid.clone(), v.values.map(|x| x.min(0.0))).unwrap();
        let full = quad_form(&ps.operator, &v).unwrap();
        let parts =
            quad_form(&ps.operator, &vp).unwrap() + quad_form(&ps.operator, &vm).unwrap();
        assert!(full + 1e-10 >= parts, "decomposition violated: {full} < {parts}");
    }
}

#[test]
fn translated_gradient_matches_finite_differences() {
    let ps = critical(48, 0.5);
    let u = critical_minimizer(&ps);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let v = random_field(&ps, &mut rng, 0.5);
    let grad = translated_gradient(&ps, &u, &v).unwrap();
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let i = rng.random_range(0..ps.grid.n);
        let mut up = v.values.clone();
        let mut dn = v.values.clone();
        up[i] += eps;
        dn[i] -= eps;
        let jp =
            translated_energy(&ps, &u, &DiscreteField::new(ps.grid.clone(), up).unwrap()).unwrap();
        let jm =
            translated_energy(&ps, &u, &DiscreteField::new(ps.grid.clone(), dn).unwrap()).unwrap();
        let fd = (jp - jm) / (2.0 * eps);
        worst = worst.max((fd - grad.values[i]).abs() / grad.values[i].abs().max(1.0));
    }
    assert!(worst < 1e-5, "worst finite-difference deviation {worst}");
}

// ---------------------------------------------------------------------------
// Critical-regime pipeline.
// ---------------------------------------------------------------------------

#[test]
fn critical_experiment_produces_dominating_second_solution() {
    let ps = critical(64, 0.5);
    let (min_rep, mp_rep) = two_solution_experiment(&ps).unwrap();
    assert!(min_rep.certified && mp_rep.certified);
    assert!(min_rep.energy < 0.0);
    assert!(mp_rep.energy > 0.0, "translated mountain-pass level not positive");
    // The second solution w = u + v dominates the first node-wise.
    let gap = &mp_rep.field.values - &min_rep.field.values;
    assert!(gap.min() > 0.0, "w does not dominate u node-wise");
    // Certificate: the translated gradient vanishes at v = w - u.
    let v = DiscreteField::new(ps.grid.clone(), gap).unwrap();
    let g = translated_gradient(&ps, &min_rep.field, &v).unwrap();
    assert!(sup(&g.values) <= 1e-6, "translated gradient sup {}", sup(&g.values));
}

#[test]
fn critical_minimizer_energy_is_monotone_in_mu() {
    // A larger sublinear coefficient deepens the well: evaluating the
    // mu_1-energy at the mu_2-minimizer (mu_2 > mu_1) cannot beat the
    // mu_2-energy at its own minimizer by more than the mu-difference term,
    // and the minimum values themselves decrease in mu.
    let ps1 = critical(48, 0.3);
    let ps2 = critical(48, 0.6);
    let u1 = critical_minimizer(&ps1);
    let u2 = critical_minimizer(&ps2);
    let j1 = energy(&ps1, &u1).unwrap();
    let j2 = energy(&ps2, &u2).unwrap();
    assert!(j2 <= j1 + 1e-8, "deeper well expected: J2 = {j2} > J1 = {j1}");
    // u1 is admissible for the mu_2-problem, so its mu_2-energy bounds j2.
    assert!(energy(&ps2, &u1).unwrap() + 1e-10 >= j2);
}
