//! Analytic center of the LMI solution set: initialization, steepest ascent,
//! Newton steps in transformed coordinates and the outer driver.

mod driver;
mod init;
mod newton;
mod scalar;

pub use driver::{
    compute_analytic_center, compute_analytic_center_with, stationarity_systems,
    verify_center_spectrum, SpectrumReport, StationarityResiduals,
};
pub use init::{admissible_xi, init_geometric_mean, init_shifted_riccati, initialize, shifted_model};
pub use newton::{
    line_search_newton_alpha, newton_direction, steepest_ascent_step, AscentStep, NewtonStep,
};
pub use scalar::scalar_center_reference;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Newton,
    Ascent,
}

/// Step length used by Newton while the decrement is above the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    /// `1/(1 + λ)` with `λ = ⟨Δ̂, g⟩`.
    #[default]
    Decrement,
    /// `1/(1 + √λ)`, the classical self-concordant damping.
    RootDecrement,
}

/// Starting point strategy.
#[derive(Clone, Debug, PartialEq)]
pub enum InitStrategy {
    Identity,
    GeometricMean,
    ShiftedRiccati,
    Given(HermitianMatrix),
}

/// Which strategy actually produced the starting point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    GeometricMean,
    ShiftedRiccati,
    ArithmeticMean,
    ScaledIdentity,
    Given,
}

#[derive(Clone, Debug)]
pub struct CenterOptions {
    pub method: Method,
    pub tol_residual: f64,
    pub tol_decrement: f64,
    pub max_iter: usize,
    pub init: InitStrategy,
    pub damping_threshold: f64,
    pub damping: Damping,
    pub xi: Option<f64>,
}

impl Default for CenterOptions {
    fn default() -> Self {
        CenterOptions {
            method: Method::Newton,
            tol_residual: 1e-8,
            tol_decrement: 1e-10,
            max_iter: 200,
            init: InitStrategy::GeometricMean,
            damping_threshold: 0.25,
            damping: Damping::Decrement,
            xi: None,
        }
    }
}

impl CenterOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0 && self.tol_decrement > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.damping_threshold > 0.0 && self.damping_threshold < 1.0) {
            return Err(Error::InvalidArgument("damping threshold must lie in (0, 1)".into()));
        }
        if let Some(xi) = self.xi {
            if !(xi > 0.0 && xi.is_finite()) {
                return Err(Error::InvalidArgument("xi must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One row of the iteration trace, describing iterate `iter`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub barrier: f64,
    /// Newton decrement at this iterate (ascent: decrement along the ray).
    pub decrement: f64,
    /// `‖∇ ln det W‖_F` at this iterate.
    pub residual: f64,
    /// Step length that produced this iterate (0 for the start point).
    pub alpha: f64,
    pub wallclock_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct CenterResult {
    pub x_center: HermitianMatrix,
    pub barrier_value: f64,
    pub iterations: Vec<IterationRecord>,
    pub closed_loop_eigs: Vec<Complex64>,
    pub converged: bool,
    pub init: InitKind,
    pub spectrum: SpectrumReport,
}
