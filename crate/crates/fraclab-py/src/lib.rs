//! Python bindings for the fraclab numerical laboratory.
//!
//! Exposes the closed-form constants, the discrete fractional Laplacian with
//! its torsion benchmark, and the two-solution experiment as a compiled
//! extension module `fraclab_py`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fraclab::constants::{self, DomainKind, DomainSpec, FracParams, PowerReaction};
use fraclab::discretization::{
    apply_operator, assemble_operator, build_grid, gagliardo_seminorm_sq, lp_norm, quad_form,
    solve_torsion, DiscreteField, FractionalOperator, Grid1D,
};
use fraclab::variational;

fn err(e: fraclab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(dim: u32, s: f64) -> PyResult<FracParams> {
    FracParams::new(dim, s).map_err(err)
}

fn params_relaxed(dim: u32, s: f64) -> PyResult<FracParams> {
    FracParams::operator_only(dim, s).map_err(err)
}

// ---------------------------------------------------------------------------
// Closed-form constants.
// ---------------------------------------------------------------------------

/// Critical Sobolev exponent 2N/(N-2s).
#[pyfunction]
fn critical_exponent(dim: u32, s: f64) -> PyResult<f64> {
    Ok(params(dim, s)?.crit_exp)
}

/// Best constant T(N,s) of the embedding ||u||_{2*} <= T [u].
#[pyfunction]
fn talenti_constant(dim: u32, s: f64) -> PyResult<f64> {
    Ok(constants::talenti_constant(&params(dim, s)?))
}

/// Amplitude of the exact torsion profile A (R^2 - |x|^2)_+^s.
#[pyfunction]
fn torsion_amplitude(dim: u32, s: f64) -> PyResult<f64> {
    Ok(constants::torsion_amplitude(&params_relaxed(dim, s)?))
}

/// Exact L^nu norm of the torsion profile on the ball of radius R.
#[pyfunction]
fn torsion_lp_norm(dim: u32, s: f64, radius: f64, nu: f64) -> PyResult<f64> {
    constants::torsion_lp_norm(&params_relaxed(dim, s)?, radius, nu).map_err(err)
}

/// Exact Gagliardo seminorm of the torsion profile.
#[pyfunction]
fn torsion_seminorm(dim: u32, s: f64, radius: f64) -> PyResult<f64> {
    constants::torsion_seminorm(&params_relaxed(dim, s)?, radius).map_err(err)
}

/// Compactness level c* = s / (N T^{N/s}).
#[pyfunction]
fn critical_level(dim: u32, s: f64) -> PyResult<f64> {
    Ok(constants::critical_level(&params(dim, s)?))
}

/// Every closed-form threshold of one instance, as a dict. The subcritical
/// trio (lambda_star, r_sub, mu_star_sub) is present when q is given.
#[pyfunction]
#[pyo3(signature = (dim, s, measure, p, a_p=1.0, q=None, a_q=1.0, mu=None, radius=1.0))]
#[allow(clippy::too_many_arguments)]
fn thresholds<'py>(
    py: Python<'py>,
    dim: u32,
    s: f64,
    measure: f64,
    p: f64,
    a_p: f64,
    q: Option<f64>,
    a_q: f64,
    mu: Option<f64>,
    radius: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let pr = params(dim, s)?;
    let kind = if dim == 1 {
        DomainKind::Interval
    } else {
        DomainKind::Ball
    };
    let d = DomainSpec::with_measure(kind, radius, measure, radius).map_err(err)?;
    let b = constants::threshold_bundle(&pr, &d, p, a_p, q, a_q, mu).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("crit_exp", pr.crit_exp)?;
    out.set_item("talenti", b.talenti)?;
    out.set_item("torsion_amp", b.torsion_amp)?;
    out.set_item("lambda_star", b.lambda_star)?;
    out.set_item("r_sub", b.r_sub)?;
    out.set_item("mu_star_sub", b.mu_star_sub)?;
    out.set_item("r_crit", b.r_crit)?;
    out.set_item("lambda_r_star", b.lambda_r_star)?;
    out.set_item("mu_star_crit", b.mu_star_crit)?;
    out.set_item("c_star", b.c_star)?;
    out.set_item("mu_used", b.mu_used)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Discrete operator.
// ---------------------------------------------------------------------------

/// Dense discrete fractional Laplacian on a uniform interval grid.
#[pyclass]
struct Operator {
    grid: Grid1D,
    op: FractionalOperator,
}

#[pymethods]
impl Operator {
    /// Assemble the operator for order s on (-radius, radius) with n
    /// interior nodes.
    #[new]
    #[pyo3(signature = (s, radius=1.0, n=256))]
    fn new(s: f64, radius: f64, n: usize) -> PyResult<Self> {
        let grid = build_grid(radius, n).map_err(err)?;
        let op = assemble_operator(&grid, s).map_err(err)?;
        Ok(Operator { grid, op })
    }

    /// Interior node coordinates.
    fn nodes(&self) -> Vec<f64> {
        self.grid.nodes.clone()
    }

    /// Grid spacing h = 2R/(n+1).
    #[getter]
    fn h(&self) -> f64 {
        self.grid.h
    }

    /// Apply the operator to node values.
    fn apply(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        let u = self.field(values)?;
        Ok(apply_operator(&self.op, &u)
            .map_err(err)?
            .values
            .iter()
            .copied()
            .collect())
    }

    /// Quadratic form h u^T L u (the discrete squared seminorm).
    fn quad_form(&self, values: Vec<f64>) -> PyResult<f64> {
        quad_form(&self.op, &self.field(values)?).map_err(err)
    }

    /// Independent Gagliardo-seminorm quadrature of the same field.
    fn gagliardo_sq(&self, values: Vec<f64>) -> PyResult<f64> {
        gagliardo_seminorm_sq(&self.field(values)?, self.op.s).map_err(err)
    }

    /// Discrete L^nu norm of node values.
    fn lp_norm(&self, values: Vec<f64>, nu: f64) -> PyResult<f64> {
        lp_norm(&self.field(values)?, nu).map_err(err)
    }

    /// Solve the discrete torsion problem L u = 1.
    fn solve_torsion(&self) -> PyResult<Vec<f64>> {
        Ok(solve_torsion(&self.op)
            .map_err(err)?
            .values
            .iter()
            .copied()
            .collect())
    }
}

impl Operator {
    fn field(&self, values: Vec<f64>) -> PyResult<DiscreteField> {
        DiscreteField::new(self.grid.clone(), nalgebra_vec(values)).map_err(err)
    }
}

fn nalgebra_vec(values: Vec<f64>) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_vec(values)
}

// ---------------------------------------------------------------------------
// Variational problem.
// ---------------------------------------------------------------------------

/// One problem instance (-Delta)^s u = lambda f(u) on (-radius, radius),
/// with f given as a list of (coefficient, exponent) power terms acting on
/// the positive part.
#[pyclass]
struct Problem {
    ps: variational::ProblemSpec,
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (s, lam, terms, radius=1.0, n=128))]
    fn new(s: f64, lam: f64, terms: Vec<(f64, f64)>, radius: f64, n: usize) -> PyResult<Self> {
        let p = params(1, s)?;
        let domain = DomainSpec::interval(radius).map_err(err)?;
        let grid = build_grid(radius, n).map_err(err)?;
        let op = assemble_operator(&grid, s).map_err(err)?;
        let reaction = PowerReaction::new(terms).map_err(err)?;
        let ps = variational::ProblemSpec::new(p, domain, reaction, lam, grid, op).map_err(err)?;
        Ok(Problem { ps })
    }

    /// Interior node coordinates.
    fn nodes(&self) -> Vec<f64> {
        self.ps.grid.nodes.clone()
    }

    /// Energy J(u) = h u^T L u / 2 - lambda h sum F(u_i).
    fn energy(&self, values: Vec<f64>) -> PyResult<f64> {
        let u = self.field(values)?;
        variational::energy(&self.ps, &u).map_err(err)
    }

    /// Node-wise energy gradient.
    fn gradient(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        let u = self.field(values)?;
        Ok(variational::energy_gradient(&self.ps, &u)
            .map_err(err)?
            .values
            .iter()
            .copied()
            .collect())
    }

    /// Run the two-solution experiment. Returns a dict per solution with
    /// the node values, energy, gradient sup-norm, and certification flag.
    fn two_solutions<'py>(&self, py: Python<'py>) -> PyResult<(Bound<'py, PyDict>, Bound<'py, PyDict>)> {
        let (a, b) = variational::two_solution_experiment(&self.ps).map_err(err)?;
        Ok((report_dict(py, &a)?, report_dict(py, &b)?))
    }
}

impl Problem {
    fn field(&self, values: Vec<f64>) -> PyResult<DiscreteField> {
        DiscreteField::new(self.ps.grid.clone(), nalgebra_vec(values)).map_err(err)
    }
}

fn report_dict<'py>(
    py: Python<'py>,
    rep: &variational::CriticalPointReport,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("values", rep.field.values.iter().copied().collect::<Vec<f64>>())?;
    out.set_item("energy", rep.energy)?;
    out.set_item("grad_norm", rep.grad_norm)?;
    out.set_item("iterations", rep.iterations)?;
    out.set_item(
        "kind",
        match rep.kind {
            variational::CriticalPointKind::LocalMin => "local_min",
            variational::CriticalPointKind::MountainPass => "mountain_pass",
        },
    )?;
    out.set_item("min_value", rep.min_value)?;
    out.set_item("phi", rep.phi_value)?;
    out.set_item("certified", rep.certified)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Module.
// ---------------------------------------------------------------------------

#[pymodule]
fn fraclab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(critical_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(talenti_constant, m)?)?;
    m.add_function(wrap_pyfunction!(torsion_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(torsion_lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(torsion_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(critical_level, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_class::<Operator>()?;
    m.add_class::<Problem>()?;
    Ok(())
}
