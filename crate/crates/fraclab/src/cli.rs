//! Configuration-driven entry point.
//!
//! Five commands: `constants` (threshold tables), `torsion-check` (operator
//! validation against the exact torsion profile), `solve` and `sweep`
//! (two-solution experiments at one parameter value or over a range), and
//! `verify` (the bundled property suites). Configuration is plain
//! `key = value` text with `#` comments; outputs are CSV tables,
//! key-value reports, and an optional JSON mirror, all with 12 significant
//! digits and no locale-dependent formatting.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::{
    self, DomainKind, DomainSpec, FracParams, PowerReaction, ThresholdBundle,
};
use crate::discretization::{
    assemble_operator_with_factor, build_grid, lp_norm, quad_form, solve_torsion, DiscreteField,
};
use crate::error::{Error, Result};
use crate::variational::{
    energy, energy_gradient, two_solution_experiment, CriticalPointKind, ProblemSpec,
};

/// Which parameter a sweep ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Lambda,
    Mu,
}

/// Parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Option<String>,
    pub dim: u32,
    pub s: f64,
    pub radius: f64,
    pub measure: Option<f64>,
    pub p: f64,
    pub a_p: f64,
    pub q: Option<f64>,
    pub a_q: f64,
    pub critical: bool,
    pub lambda: Option<f64>,
    pub lambda_frac: Option<f64>,
    pub mu: Option<f64>,
    pub grid_n: usize,
    pub sweep: Option<(f64, f64, usize)>,
    pub sweep_param: SweepParam,
    pub sweep_frac: bool,
    pub path_points: usize,
    pub seed: u64,
    pub out: Option<String>,
    pub workers: Option<usize>,
    /// Leading factor of the discrete kernel; 2 is the correct convention.
    /// Exposed for the verification suite to demonstrate sensitivity.
    pub kernel_factor: f64,
}

const KNOWN_KEYS: &[&str] = &[
    "command", "N", "s", "R", "measure", "p", "a_p", "q", "a_q", "critical", "lambda",
    "lambda_frac", "mu", "n", "sweep_lo", "sweep_hi", "sweep_steps", "sweep_param", "sweep_frac",
    "path_points", "seed", "out", "workers", "kernel_factor",
];

/// Parse a `key = value` configuration. Every violated constraint is
/// reported, not just the first.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut errs: Vec<String> = Vec::new();
    let mut kv: Vec<(String, String)> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                if !KNOWN_KEYS.contains(&k.as_str()) {
                    errs.push(format!("line {}: unknown key '{}'", lineno + 1, k));
                    continue;
                }
                if !seen.insert(k.clone()) {
                    errs.push(format!("line {}: duplicate key '{}'", lineno + 1, k));
                    continue;
                }
                kv.push((k, v.trim().to_string()));
            }
            None => errs.push(format!(
                "line {}: expected 'key = value', got '{}'",
                lineno + 1,
                line
            )),
        }
    }

    let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    let mut parse_f64 = |key: &str| -> Option<f64> {
        get(key).and_then(|v| match v.parse::<f64>() {
            Ok(x) => Some(x),
            Err(_) => {
                errs.push(format!("key '{key}': cannot parse '{v}' as a number"));
                None
            }
        })
    };

    let dim_f = parse_f64("N");
    let s = parse_f64("s");
    let radius = parse_f64("R");
    let measure = parse_f64("measure");
    let p = parse_f64("p");
    let a_p = parse_f64("a_p");
    let q = parse_f64("q");
    let a_q = parse_f64("a_q");
    let lambda = parse_f64("lambda");
    let lambda_frac = parse_f64("lambda_frac");
    let mu = parse_f64("mu");
    let grid_n_f = parse_f64("n");
    let sweep_lo = parse_f64("sweep_lo");
    let sweep_hi = parse_f64("sweep_hi");
    let sweep_steps = parse_f64("sweep_steps");
    let path_points_f = parse_f64("path_points");
    let seed_f = parse_f64("seed");
    let workers_f = parse_f64("workers");
    let kernel_factor = parse_f64("kernel_factor").unwrap_or(2.0);

    let command = get("command");
    if let Some(cmd) = &command {
        if !["constants", "torsion-check", "solve", "sweep", "verify"].contains(&cmd.as_str()) {
            errs.push(format!("key 'command': unknown command '{cmd}'"));
        }
    }
    let critical = match get("critical").as_deref() {
        None => false,
        Some("true") | Some("1") => true,
        Some("false") | Some("0") => false,
        Some(v) => {
            errs.push(format!("key 'critical': expected true/false, got '{v}'"));
            false
        }
    };
    let sweep_frac = match get("sweep_frac").as_deref() {
        None => false,
        Some("true") | Some("1") => true,
        Some("false") | Some("0") => false,
        Some(v) => {
            errs.push(format!("key 'sweep_frac': expected true/false, got '{v}'"));
            false
        }
    };
    let sweep_param = match get("sweep_param").as_deref() {
        None => {
            if critical {
                SweepParam::Mu
            } else {
                SweepParam::Lambda
            }
        }
        Some("lambda") => SweepParam::Lambda,
        Some("mu") => SweepParam::Mu,
        Some(v) => {
            errs.push(format!("key 'sweep_param': expected lambda or mu, got '{v}'"));
            SweepParam::Lambda
        }
    };

    // Required basics.
    let dim = match dim_f {
        None => {
            errs.push("missing required key 'N'".into());
            0
        }
        Some(x) if x >= 1.0 && x.fract() == 0.0 => x as u32,
        Some(x) => {
            errs.push(format!("key 'N': must be a positive integer, got {x}"));
            0
        }
    };
    let s = match s {
        None => {
            errs.push("missing required key 's'".into());
            f64::NAN
        }
        Some(x) if x > 0.0 && x < 1.0 => x,
        Some(x) => {
            errs.push(format!("key 's': must lie in (0,1), got {x}"));
            f64::NAN
        }
    };
    let radius = radius.unwrap_or(1.0);
    if !(radius > 0.0) {
        errs.push(format!("key 'R': must be positive, got {radius}"));
    }
    if let Some(m) = measure {
        if !(m > 0.0) {
            errs.push(format!("key 'measure': must be positive, got {m}"));
        }
    }
    let grid_n = match grid_n_f {
        None => 256,
        Some(x) if (16.0..=1024.0).contains(&x) && x.fract() == 0.0 => x as usize,
        Some(x) => {
            errs.push(format!("key 'n': must be an integer in [16, 1024], got {x}"));
            256
        }
    };
    let path_points = match path_points_f {
        None => 33,
        Some(x) if x >= 16.0 && x.fract() == 0.0 => x as usize,
        Some(x) => {
            errs.push(format!("key 'path_points': must be an integer >= 16, got {x}"));
            33
        }
    };
    let seed = match seed_f {
        None => 42,
        Some(x) if x >= 0.0 && x.fract() == 0.0 => x as u64,
        Some(x) => {
            errs.push(format!("key 'seed': must be a nonnegative integer, got {x}"));
            42
        }
    };
    let workers = match workers_f {
        None => None,
        Some(x) if x >= 1.0 && x.fract() == 0.0 => Some(x as usize),
        Some(x) => {
            errs.push(format!("key 'workers': must be a positive integer, got {x}"));
            None
        }
    };
    if !(kernel_factor > 0.0) {
        errs.push(format!("key 'kernel_factor': must be positive, got {kernel_factor}"));
    }

    // Growth bound: exponents may not exceed the critical one.
    if dim >= 1 && s.is_finite() && (dim as f64) > 2.0 * s {
        let crit_exp = 2.0 * dim as f64 / (dim as f64 - 2.0 * s);
        if let Some(qv) = q {
            if qv > crit_exp + 1e-12 {
                errs.push(format!(
                    "key 'q': {qv} violates the growth bound q <= 2N/(N-2s) = {crit_exp}"
                ));
            }
        }
    }
    if let Some(pv) = p {
        if !(pv > 1.0) {
            errs.push(format!("key 'p': must exceed 1, got {pv}"));
        }
    }

    let sweep = match (sweep_lo, sweep_hi, sweep_steps) {
        (None, None, None) => None,
        (Some(lo), Some(hi), Some(st)) => {
            if !(lo < hi) {
                errs.push(format!("sweep range: need sweep_lo < sweep_hi, got {lo} >= {hi}"));
            }
            if !(st >= 2.0 && st.fract() == 0.0) {
                errs.push(format!("key 'sweep_steps': must be an integer >= 2, got {st}"));
                None
            } else {
                Some((lo, hi, st as usize))
            }
        }
        _ => {
            errs.push("sweep range: sweep_lo, sweep_hi, sweep_steps must be given together".into());
            None
        }
    };
    if command.as_deref() == Some("sweep") && sweep.is_none() {
        errs.push("command 'sweep' requires a sweep range (sweep_lo, sweep_hi, sweep_steps)".into());
    }

    if !errs.is_empty() {
        return Err(Error::Config(errs.join("\n")));
    }
    Ok(RunConfig {
        command,
        dim,
        s,
        radius,
        measure,
        p: p.unwrap_or(1.5),
        a_p: a_p.unwrap_or(1.0),
        q,
        a_q: a_q.unwrap_or(1.0),
        critical,
        lambda,
        lambda_frac,
        mu,
        grid_n,
        sweep,
        sweep_param,
        sweep_frac,
        path_points,
        seed,
        out: get("out"),
        workers,
        kernel_factor,
    })
}

fn fmt12(x: f64) -> String {
    format!("{:.11e}", x)
}

fn build_params(cfg: &RunConfig) -> Result<(FracParams, DomainSpec)> {
    let params = FracParams::new(cfg.dim, cfg.s)?;
    let domain = match cfg.measure {
        Some(m) => DomainSpec::with_measure(
            if cfg.dim == 1 {
                DomainKind::Interval
            } else {
                DomainKind::Ball
            },
            cfg.radius,
            m,
            cfg.radius,
        )?,
        None => {
            if cfg.dim == 1 {
                DomainSpec::interval(cfg.radius)?
            } else {
                DomainSpec::ball(cfg.dim, cfg.radius)?
            }
        }
    };
    Ok((params, domain))
}

fn build_reaction(cfg: &RunConfig, params: &FracParams, mu_override: Option<f64>) -> Result<PowerReaction> {
    if cfg.critical {
        let mu = mu_override.or(cfg.mu).unwrap_or(cfg.a_p);
        PowerReaction::new(vec![(mu, cfg.p), (1.0, params.crit_exp)])
    } else {
        let q = cfg.q.ok_or_else(|| {
            Error::Config("subcritical experiments require the key 'q'".into())
        })?;
        PowerReaction::new(vec![(cfg.a_p, cfg.p), (cfg.a_q, q)])
    }
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

/// Evaluate the full threshold bundle and format it as a two-column table.
pub fn run_constants(cfg: &RunConfig) -> Result<(ThresholdBundle, String)> {
    let (params, domain) = build_params(cfg)?;
    let bundle = constants::threshold_bundle(
        &params,
        &domain,
        cfg.p,
        cfg.a_p,
        cfg.q,
        cfg.a_q,
        cfg.mu,
    )?;
    let mut table = String::from("name,value\n");
    let mut row = |name: &str, val: f64| {
        let _ = writeln!(table, "{},{}", name, fmt12(val));
    };
    row("crit_exp", params.crit_exp);
    row("talenti", bundle.talenti);
    row("torsion_amp", bundle.torsion_amp);
    row("normalization", constants::normalization_constant(&params));
    if let (Some(ls), Some(rs), Some(ms)) = (bundle.lambda_star, bundle.r_sub, bundle.mu_star_sub) {
        row("lambda_star", ls);
        row("r_sub", rs);
        row("mu_star_sub", ms);
    }
    row("r_crit", bundle.r_crit);
    row("lambda_r_star", bundle.lambda_r_star);
    row("mu_star_crit", bundle.mu_star_crit);
    row("c_star", bundle.c_star);
    row("mu_used", bundle.mu_used);
    Ok((bundle, table))
}

// ---------------------------------------------------------------------------
// torsion-check
// ---------------------------------------------------------------------------

/// Solve the torsion problem on a refinement sequence, comparing node values
/// and discrete norms against the exact closed forms.
pub fn run_torsion_check(cfg: &RunConfig) -> Result<String> {
    if !(cfg.s > 0.0 && cfg.s < 1.0) {
        return Err(Error::domain(format!("s must lie in (0,1), got {}", cfg.s)));
    }
    let s = cfg.s;
    let radius = cfg.radius;
    let mut report = String::new();
    let theory_ok = 1.0 > 2.0 * s;
    if !theory_ok {
        let _ = writeln!(report, "note = N>2s violated; operator-only mode");
    }
    // Exact profile data (valid for every s in (0,1) in one dimension).
    let params_1d = FracParams::operator_only(1, s)?;
    let amp = constants::torsion_amplitude(&params_1d);
    let exact_l1 = amp
        * std::f64::consts::PI.sqrt()
        * constants::gamma_fn(1.0 + s)?
        * radius.powf(1.0 + 2.0 * s)
        / constants::gamma_fn((3.0 + 2.0 * s) / 2.0)?;
    let exact_semi_sq = exact_l1; // seminorm^2 = L^1 norm of the torsion profile

    let mut table = String::from("n,sup_error,l1_rel_error,seminorm_rel_error\n");
    let mut sup_errors = Vec::new();
    let mut sizes = Vec::new();
    let mut n = 64usize;
    while n <= cfg.grid_n {
        let grid = build_grid(radius, n)?;
        let op = assemble_operator_with_factor(&grid, s, cfg.kernel_factor)?;
        let u = solve_torsion(&op)?;
        let mut sup = 0.0f64;
        for (i, &x) in grid.nodes.iter().enumerate() {
            if x.abs() <= 0.5 * radius {
                let exact = amp * (radius * radius - x * x).powf(s);
                sup = sup.max((u.values[i] - exact).abs());
            }
        }
        let l1 = lp_norm(&u, 1.0)?;
        let semi_sq = quad_form(&op, &u)?;
        let l1_rel = (l1 - exact_l1).abs() / exact_l1;
        let semi_rel = (semi_sq - exact_semi_sq).abs() / exact_semi_sq;
        let _ = writeln!(
            table,
            "{},{},{},{}",
            n,
            fmt12(sup),
            fmt12(l1_rel),
            fmt12(semi_rel)
        );
        sup_errors.push(sup);
        sizes.push(n);
        n *= 2;
    }
    let _ = writeln!(report, "s = {}", fmt12(s));
    let _ = writeln!(report, "R = {}", fmt12(radius));
    let _ = writeln!(report, "exact_l1 = {}", fmt12(exact_l1));
    let _ = writeln!(report, "exact_seminorm_sq = {}", fmt12(exact_semi_sq));
    for w in sup_errors.windows(2) {
        let ratio = w[0] / w[1].max(1e-300);
        let _ = writeln!(report, "refinement_ratio = {}", fmt12(ratio));
    }
    report.push_str(&table);
    Ok(report)
}

// ---------------------------------------------------------------------------
// solve / sweep
// ---------------------------------------------------------------------------

struct Instance {
    ps: ProblemSpec,
    threshold: f64,
    param_value: f64,
    below: bool,
}

fn build_instance(cfg: &RunConfig, param_override: Option<f64>) -> Result<Instance> {
    let (params, domain) = build_params(cfg)?;
    let grid = build_grid(cfg.radius, cfg.grid_n)?;
    let op = assemble_operator_with_factor(&grid, cfg.s, cfg.kernel_factor)?;
    if cfg.critical {
        let mu_star = constants::mu_star_critical(&params, &domain, cfg.p, 1.0)?;
        let mu = param_override.or(cfg.mu).unwrap_or(0.5 * mu_star);
        let reaction = build_reaction(cfg, &params, Some(mu))?;
        let lambda = cfg.lambda.unwrap_or(1.0);
        let ps = ProblemSpec::new(params, domain, reaction, lambda, grid, op)?;
        Ok(Instance {
            ps,
            threshold: mu_star,
            param_value: mu,
            below: mu < mu_star,
        })
    } else {
        let q = cfg.q.ok_or_else(|| {
            Error::Config("subcritical experiments require the key 'q'".into())
        })?;
        let lambda_star =
            constants::lambda_star_subcritical(&params, &domain, cfg.a_p, cfg.p, cfg.a_q, q)?;
        let lambda = match (param_override, cfg.lambda, cfg.lambda_frac) {
            (Some(l), _, _) => l,
            (None, Some(l), _) => l,
            (None, None, Some(f)) => f * lambda_star,
            (None, None, None) => 0.5 * lambda_star,
        };
        let reaction = build_reaction(cfg, &params, None)?;
        let ps = ProblemSpec::new(params, domain, reaction, lambda, grid, op)?;
        Ok(Instance {
            ps,
            threshold: lambda_star,
            param_value: lambda,
            below: lambda < lambda_star,
        })
    }
}

/// Key-value report plus optional CSV field dumps for a single experiment.
pub fn run_solve(cfg: &RunConfig) -> Result<String> {
    let inst = build_instance(cfg, None)?;
    let mut report = String::new();
    let _ = writeln!(report, "mode = {}", if cfg.critical { "critical" } else { "subcritical" });
    let _ = writeln!(
        report,
        "{} = {}",
        if cfg.critical { "mu" } else { "lambda" },
        fmt12(inst.param_value)
    );
    let _ = writeln!(
        report,
        "{} = {}",
        if cfg.critical { "mu_star" } else { "lambda_star" },
        fmt12(inst.threshold)
    );
    let _ = writeln!(
        report,
        "threshold_status = {}",
        if inst.below { "below" } else { "outside-certified-interval" }
    );
    match two_solution_experiment(&inst.ps) {
        Ok((min_rep, mp_rep)) => {
            for (tag, rep) in [("min", &min_rep), ("mp", &mp_rep)] {
                let _ = writeln!(report, "{tag}_energy = {}", fmt12(rep.energy));
                let _ = writeln!(report, "{tag}_grad_norm = {}", fmt12(rep.grad_norm));
                let _ = writeln!(report, "{tag}_min_value = {}", fmt12(rep.min_value));
                let _ = writeln!(report, "{tag}_phi = {}", fmt12(rep.phi_value));
                let _ = writeln!(report, "{tag}_iterations = {}", rep.iterations);
            }
            debug_assert_eq!(min_rep.kind, CriticalPointKind::LocalMin);
            debug_assert_eq!(mp_rep.kind, CriticalPointKind::MountainPass);
            if cfg.critical {
                let c_star = constants::critical_level(&inst.ps.params);
                let _ = writeln!(report, "c_star = {}", fmt12(c_star));
                let _ = writeln!(report, "level_below_c_star = {}", mp_rep.energy < c_star);
                let ordered = mp_rep
                    .field
                    .values
                    .iter()
                    .zip(min_rep.field.values.iter())
                    .all(|(w, u)| w > u);
                let _ = writeln!(report, "nodewise_ordered = {ordered}");
            }
            let dist = (&mp_rep.field.values - &min_rep.field.values).norm()
                / min_rep.field.values.norm().max(1e-30);
            let _ = writeln!(report, "relative_distance = {}", fmt12(dist));
            let _ = writeln!(report, "status = ok");
            if let Some(out) = &cfg.out {
                std::fs::write(format!("{out}.min.csv"), min_rep.field.to_csv())?;
                std::fs::write(format!("{out}.mp.csv"), mp_rep.field.to_csv())?;
            }
            Ok(report)
        }
        Err(e) => {
            if inst.below {
                Err(Error::convergence(format!(
                    "certified point (parameter {} below threshold {}) failed: {e}",
                    fmt12(inst.param_value),
                    fmt12(inst.threshold)
                )))
            } else {
                let _ = writeln!(report, "status = failed ({e})");
                Ok(report)
            }
        }
    }
}

/// One CSV row per sweep point, ordered by parameter value. Returns the CSV
/// and whether every below-threshold point succeeded.
pub fn run_sweep(cfg: &RunConfig) -> Result<(String, bool)> {
    let (lo, hi, steps) = cfg
        .sweep
        .ok_or_else(|| Error::Config("command 'sweep' requires a sweep range".into()))?;
    // Threshold for fraction scaling.
    let probe = build_instance(cfg, None)?;
    let scale = if cfg.sweep_frac { probe.threshold } else { 1.0 };
    let values: Vec<f64> = (0..steps)
        .map(|i| scale * (lo + (hi - lo) * i as f64 / (steps as f64 - 1.0)))
        .collect();

    let run_point = |&val: &f64| -> (f64, bool, String) {
        match build_instance(cfg, Some(val)) {
            Ok(inst) => match two_solution_experiment(&inst.ps) {
                Ok((min_rep, mp_rep)) => {
                    let row = format!(
                        "{},{},{},{},{},{},ok",
                        fmt12(val),
                        fmt12(min_rep.energy),
                        fmt12(mp_rep.energy),
                        fmt12(min_rep.grad_norm),
                        fmt12(mp_rep.grad_norm),
                        inst.below
                    );
                    (val, true, row)
                }
                Err(e) => {
                    let row = format!(
                        "{},nan,nan,nan,nan,{},failed: {}",
                        fmt12(val),
                        inst.below,
                        e.to_string().replace(['\n', ','], ";")
                    );
                    (val, false, row)
                }
            },
            Err(e) => (
                val,
                false,
                format!(
                    "{},nan,nan,nan,nan,false,error: {}",
                    fmt12(val),
                    e.to_string().replace(['\n', ','], ";")
                ),
            ),
        }
    };

    let results: Vec<(f64, bool, String)> = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?
            .install(|| values.par_iter().map(run_point).collect()),
        None => values.par_iter().map(run_point).collect(),
    };

    let mut csv = String::from(
        "param,min_energy,mp_energy,min_grad_norm,mp_grad_norm,below_threshold,status\n",
    );
    let mut all_certified_ok = true;
    for (val, ok, row) in &results {
        if *val < probe.threshold && !ok {
            all_certified_ok = false;
        }
        csv.push_str(row);
        csv.push('\n');
    }
    Ok((csv, all_certified_ok))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Run the bundled property suites and return the pass/fail matrix plus the
/// overall verdict.
pub fn run_verify(cfg: &RunConfig) -> Result<(String, bool)> {
    let mut checks: Vec<Check> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Gamma recurrence on a logarithmic grid.
    {
        let mut worst = 0.0f64;
        for j in 0..200 {
            let x = 0.1 * (300.0f64).powf(j as f64 / 199.0);
            let lhs = constants::gamma_fn(x + 1.0)?;
            let rhs = x * constants::gamma_fn(x)?;
            worst = worst.max((lhs - rhs).abs() / lhs);
        }
        checks.push(check(
            "gamma-recurrence",
            worst <= 1e-12,
            format!("max relative deviation {}", fmt12(worst)),
        ));
    }

    // Torsion identity: seminorm^2 = L^1 norm.
    {
        let mut worst = 0.0f64;
        for dim in [1u32, 2, 3] {
            for j in 1..=9 {
                let s = 0.1 * j as f64;
                let p = FracParams::operator_only(dim, s)?;
                for radius in [0.5, 1.0, 2.0] {
                    let semi = constants::torsion_seminorm(&p, radius)?;
                    let l1 = constants::torsion_lp_norm(&p, radius, 1.0)?;
                    worst = worst.max((semi * semi - l1).abs() / l1);
                }
            }
        }
        checks.push(check(
            "torsion-identity",
            worst <= 1e-12,
            format!("max relative deviation {}", fmt12(worst)),
        ));
    }

    // lambda* homogeneity in the reaction coefficients.
    {
        let p = FracParams::new(1, 0.4)?;
        let d = DomainSpec::interval(1.0)?;
        let base = constants::lambda_star_subcritical(&p, &d, 1.0, 1.5, 1.0, 3.0)?;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let c = 10f64.powf(rng.random_range(-2.0..2.0));
            let scaled = constants::lambda_star_subcritical(&p, &d, c, 1.5, c, 3.0)?;
            worst = worst.max((scaled * c - base).abs() / base);
        }
        checks.push(check(
            "lambda-star-homogeneity",
            worst <= 1e-12,
            format!("max relative deviation {}", fmt12(worst)),
        ));
    }

    // Threshold equivalence: mu < mu* iff lambda*(a_p = mu) > 1.
    {
        let mut violations = 0usize;
        let mut tested = 0usize;
        while tested < 1000 {
            let dim = 1 + (rng.random_range(0..3u32));
            let s = rng.random_range(0.05..0.95);
            if dim as f64 <= 2.0 * s + 0.05 {
                continue;
            }
            let p = FracParams::new(dim, s)?;
            if p.crit_exp < 2.3 {
                continue;
            }
            let pe = rng.random_range(1.05..1.95);
            let qe = rng.random_range(2.05..(p.crit_exp - 0.05).min(6.0));
            if qe <= 2.05 {
                continue;
            }
            let radius = rng.random_range(0.5..2.0);
            let d = DomainSpec::interval(radius)?;
            let mu_star = constants::mu_star_subcritical(&p, &d, pe, qe)?;
            let mu = mu_star * 10f64.powf(rng.random_range(-2.0..2.0));
            if (mu - mu_star).abs() <= 1e-10 {
                continue;
            }
            let ls = constants::lambda_star_subcritical(&p, &d, mu, pe, 1.0, qe)?;
            if (ls - 1.0).abs() <= 1e-10 {
                continue;
            }
            if ((ls > 1.0) as i32) != ((mu < mu_star) as i32) {
                violations += 1;
            }
            tested += 1;
        }
        checks.push(check(
            "threshold-equivalence",
            violations == 0,
            format!("{violations} violations over {tested} tuples"),
        ));
    }

    // Critical bundle: lambda_r* > 1 below mu*.
    {
        let mut worst = f64::INFINITY;
        let mut ok = true;
        for _ in 0..200 {
            let s = rng.random_range(0.05..0.45);
            let p = FracParams::new(1, s)?;
            let pe = rng.random_range(1.05..(p.crit_exp - 0.1).min(4.0));
            let radius = rng.random_range(0.5..2.0);
            let d = DomainSpec::interval(radius)?;
            let r = constants::radius_critical(&p);
            let mu_star = constants::mu_star_critical(&p, &d, pe, 1.0)?;
            let mu = mu_star * rng.random_range(0.01..0.999);
            let lr = constants::lambda_r_star(&p, &d, pe, 1.0, mu, r)?;
            worst = worst.min(lr);
            if lr <= 1.0 {
                ok = false;
            }
        }
        checks.push(check(
            "critical-bundle",
            ok,
            format!("min lambda_r* = {}", fmt12(worst)),
        ));
    }

    // Torsion residual: discrete solve against the exact norms. This is the
    // check that detects a wrong kernel normalization.
    {
        let s = if cfg.s > 0.0 && cfg.s < 0.5 { cfg.s } else { 0.25 };
        let p = FracParams::new(1, s)?;
        let n = cfg.grid_n.min(256);
        let grid = build_grid(1.0, n)?;
        let op = assemble_operator_with_factor(&grid, s, cfg.kernel_factor)?;
        let u = solve_torsion(&op)?;
        let l1 = lp_norm(&u, 1.0)?;
        let exact = constants::torsion_lp_norm(&p, 1.0, 1.0)?;
        let rel = (l1 - exact).abs() / exact;
        checks.push(check(
            "torsion-residual",
            rel <= 0.02,
            format!("relative L1 error {} at n = {n}", fmt12(rel)),
        ));
    }

    // Discrete embedding with 2% slack.
    {
        let s = if cfg.s > 0.0 && cfg.s < 0.5 { cfg.s } else { 0.25 };
        let p = FracParams::new(1, s)?;
        let t = constants::talenti_constant(&p);
        let n = cfg.grid_n.min(256);
        let grid = build_grid(1.0, n)?;
        let op = assemble_operator_with_factor(&grid, s, 2.0)?;
        let mut worst = 0.0f64;
        for trial in 0..200 {
            let mut vals: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Alternate rough and smoothed fields.
            for _ in 0..(trial % 4) * 10 {
                let prev = vals.clone();
                for i in 0..n {
                    let l = if i > 0 { prev[i - 1] } else { 0.0 };
                    let r = if i + 1 < n { prev[i + 1] } else { 0.0 };
                    vals[i] = 0.25 * l + 0.5 * prev[i] + 0.25 * r;
                }
            }
            let u = DiscreteField::new(grid.clone(), nalgebra::DVector::from_vec(vals))?;
            let semi = quad_form(&op, &u)?.sqrt();
            for nu in [1.0, 2.0, 3.0, 4.0] {
                if nu > p.crit_exp + 1e-12 {
                    continue;
                }
                let lhs = lp_norm(&u, nu)?;
                let rhs =
                    t * (2.0f64).powf((p.crit_exp - nu) / (p.crit_exp * nu)) * semi;
                worst = worst.max(lhs / rhs);
            }
        }
        checks.push(check(
            "discrete-embedding",
            worst <= 1.02,
            format!("max norm ratio {}", fmt12(worst)),
        ));
    }

    // Gradient versus central finite differences.
    {
        let s = if cfg.s > 0.0 && cfg.s < 0.5 { cfg.s } else { 0.4 };
        let params = FracParams::new(1, s)?;
        let domain = DomainSpec::interval(1.0)?;
        let grid = build_grid(1.0, 64)?;
        let op = assemble_operator_with_factor(&grid, s, 2.0)?;
        let reaction = PowerReaction::new(vec![(1.0, 1.5), (1.0, 3.0)])?;
        let ps = ProblemSpec::new(params, domain, reaction, 1.0, grid.clone(), op)?;
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let u = DiscreteField::new(
                grid.clone(),
                nalgebra::DVector::from_iterator(64, (0..64).map(|_| rng.random_range(0.0..1.0))),
            )?;
            let v = DiscreteField::new(
                grid.clone(),
                nalgebra::DVector::from_iterator(64, (0..64).map(|_| rng.random_range(-1.0..1.0))),
            )?;
            let g = energy_gradient(&ps, &u)?;
            let lhs = g.values.dot(&v.values);
            let eps = 1e-6;
            let up = DiscreteField::new(grid.clone(), &u.values + eps * &v.values)?;
            let um = DiscreteField::new(grid.clone(), &u.values - eps * &v.values)?;
            let fd = (energy(&ps, &up)? - energy(&ps, &um)?) / (2.0 * eps);
            worst = worst.max((lhs - fd).abs() / (1.0 + lhs.abs()));
        }
        checks.push(check(
            "gradient-fd",
            worst <= 1e-5,
            format!("max relative deviation {}", fmt12(worst)),
        ));
    }

    let mut out = String::new();
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        let _ = writeln!(
            out,
            "{:24} {}  ({})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    let _ = writeln!(out, "overall = {}", if all_pass { "PASS" } else { "FAIL" });
    Ok((out, all_pass))
}
