pub mod convergence_study;
pub mod deny_lions;
pub mod density_demo;
pub mod ellipticity_check;
pub mod growth_study;
pub mod regularity_study;
pub mod rhs_check;
pub mod solve;

use beppo::ellipticity::Tensor4;
use beppo::functionals::FunctionalSpec;
use beppo::quotient::HomogeneousClass;
use beppo::solver::{solve_constant, solve_variable_from, SolveReport};
use beppo::{grid, testfields, Field, Grid};
use clap::ValueEnum;

use crate::builtins;
use crate::config::{GridConfig, Manufactured, Source};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    DensityDemo,
    DenyLions,
    GrowthStudy,
    EllipticityCheck,
    RhsCheck,
    Solve,
    RegularityStudy,
    ConvergenceStudy,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DensityDemo => "density-demo",
            Experiment::DenyLions => "deny-lions",
            Experiment::GrowthStudy => "growth-study",
            Experiment::EllipticityCheck => "ellipticity-check",
            Experiment::RhsCheck => "rhs-check",
            Experiment::Solve => "solve",
            Experiment::RegularityStudy => "regularity-study",
            Experiment::ConvergenceStudy => "convergence-study",
        }
    }
}

/// One elliptic problem as named in a config.
pub struct Case<'a> {
    pub tensor: &'a str,
    pub rhs: &'a str,
    pub manufactured: Option<&'a Manufactured>,
}

pub struct Solved {
    pub tensor: Tensor4,
    pub rhs: Field,
    /// Manufactured solution as sampled, with its analytic gradient.
    pub exact: Option<(Field, Field)>,
    pub report: SolveReport,
}

impl Solved {
    /// `‖∂(u_h − u*)‖ / ‖∂u*‖`. `u*` is a reference, not an input, so it is
    /// neither quantized nor shifted.
    pub fn relative_error(&self) -> Result<Option<f64>> {
        let Some((u, du)) = &self.exact else {
            return Ok(None);
        };
        let diff = self.report.solution.rep().sub(u)?;
        let err = grid::lp_norm(&grid::gradient(&diff)?, 2.0)?;
        Ok(Some(err / grid::lp_norm(du, 2.0)?))
    }
}

pub fn case_grid(source: &Source, grid: &GridConfig, case: &Case) -> Result<Grid> {
    let m = builtins::tensor_components(source, "tensor", case.tensor, grid.d)?;
    grid.build(source, "grid", m)
}

/// Builds and solves one case. `manufactured` right-hand sides come from
/// `u*_j = a_j exp(−|x − c_j|²)` with the quadrature mean of `f` removed.
pub fn solve_case(
    source: &Source,
    grid: Grid,
    case: &Case,
    tol: f64,
    guess: Option<&HomogeneousClass>,
) -> Result<Solved> {
    let tensor = builtins::tensor(source, "tensor", case.tensor, grid)?;
    let (rhs, exact) = if case.rhs == "manufactured" {
        let Some(man) = case.manufactured else {
            return Err(source.error("rhs", "`manufactured` needs a `manufactured` block"));
        };
        man.check(source, "manufactured", grid.d())?;
        if man.amplitudes.len() != grid.m() {
            return Err(source.error(
                "amplitudes",
                format!("tensor has {} components, got {} amplitudes", grid.m(), man.amplitudes.len()),
            ));
        }
        if !tensor.is_constant() {
            return Err(source.error("rhs", "manufactured solutions need a constant tensor"));
        }
        let (u, f) = testfields::manufactured_rhs(grid, tensor.raw(), &man.amplitudes, &man.centers)?;
        let means: Vec<f64> = f.means().iter().map(|m| -m).collect();
        (f.shifted(&means), Some((u, manufactured_gradient(grid, man)?)))
    } else {
        (builtins::rhs(source, "rhs", case.rhs, grid)?, None)
    };
    let spec = FunctionalSpec::density(rhs.clone())?;
    let report = if tensor.is_constant() {
        solve_constant(&tensor, &spec)?
    } else {
        solve_variable_from(&tensor, &spec, tol, guess.map(HomogeneousClass::rep))?
    };
    Ok(Solved {
        tensor,
        rhs,
        exact,
        report,
    })
}

/// `∂_α u_j = −2 (x_α − c_{jα}) u_j` for the Gaussian manufactured solution.
fn manufactured_gradient(grid: Grid, man: &Manufactured) -> beppo::Result<Field> {
    let d = grid.d();
    Field::from_components(grid.with_components(grid.m() * d), |c, x| {
        let (j, a) = (c / d, c % d);
        let r2: f64 = x.iter().zip(&man.centers[j]).map(|(x, c)| (x - c) * (x - c)).sum();
        -2.0 * (x[a] - man.centers[j][a]) * man.amplitudes[j] * (-r2).exp()
    })
}

pub fn default_tol() -> f64 {
    beppo::solver::DEFAULT_TOL
}

/// Lower-case name of a serde enum value.
pub fn label<T: serde::Serialize>(value: T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}
