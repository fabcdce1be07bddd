use super::newton::interior;
use super::{CenterOptions, InitKind, InitStrategy};
use crate::error::{Error, Result};
use crate::hermitian::{hermitian_sqrt, CMatrix, HermitianMatrix};
use crate::lmi::lmi_matrix;
use crate::model::{GeneralizedWeight, StateSpaceModel, TimeDomain};
use crate::riccati::solve_extremal;

/// Model whose LMI satisfies `c·W_ξ(X) = W(X) − 2ξ·diag(X, I)` for a
/// positive constant `c`. Continuous: `{A + ξI, B, C, D − ξI}`. Discrete:
/// `A, B` scaled by `1/√(1 − 2ξ)`, `C, D − ξI` by `1/(1 − 2ξ)`.
pub fn shifted_model(model: &StateSpaceModel, xi: f64) -> Result<StateSpaceModel> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidArgument("xi must be positive".into()));
    }
    let n = model.n();
    let m = model.m();
    let id_n = CMatrix::identity(n, n);
    let id_m = CMatrix::identity(m, m);
    let (a, b, c, d) = match model.domain() {
        TimeDomain::Continuous => (
            model.a() + id_n * num_complex::Complex64::from(xi),
            model.b().clone(),
            model.c().clone(),
            model.d() - id_m * num_complex::Complex64::from(xi),
        ),
        TimeDomain::Discrete => {
            let s2 = 1.0 - 2.0 * xi;
            if s2 <= 0.0 {
                return Err(Error::XiTooLarge { xi });
            }
            let s = s2.sqrt();
            (
                model.a().unscale(s),
                model.b().unscale(s),
                model.c().unscale(s2),
                (model.d() - id_m * num_complex::Complex64::from(xi)).unscale(s2),
            )
        }
    };
    let shifted = StateSpaceModel::unchecked(a, b, c, d, model.domain())?;
    if shifted.r().min_eigenvalue() <= 0.0 {
        return Err(Error::XiTooLarge { xi });
    }
    Ok(shifted)
}

/// `λ_min W(X0) / (4·max(‖X0‖₂, 1))` for a strictly feasible `X0`. With this
/// value the shifted LMI is still strictly feasible at `X0`.
pub fn admissible_xi(model: &StateSpaceModel, x0: &HermitianMatrix) -> Result<f64> {
    let alpha = lmi_matrix(model, x0, None)?.min_eigenvalue();
    if alpha <= 0.0 {
        return Err(Error::Boundary { lambda_min: alpha });
    }
    Ok(alpha / (4.0 * x0.spectral_norm().max(1.0)))
}

/// Matrix geometric mean `X₋^{1/2}(X₋^{-1/2}X₊X₋^{-1/2})^{1/2}X₋^{1/2}` of
/// two positive definite matrices. Not necessarily interior for the LMI.
pub fn init_geometric_mean(x_min: &HermitianMatrix, x_max: &HermitianMatrix) -> Result<HermitianMatrix> {
    if x_min.dim() != x_max.dim() {
        return Err(Error::Shape("geometric mean of matrices of different size".into()));
    }
    let sq = hermitian_sqrt(x_min, true)?;
    let inv = sq.inv_root.expect("definite root carries its inverse");
    let mid = x_max.congruence(inv.matrix());
    let mid_root = hermitian_sqrt(&mid, true)?.root;
    Ok(mid_root.congruence(sq.root.matrix()))
}

/// Average of the extremal Riccati solutions of the shifted model. These
/// satisfy `W(X) ⪰ 2ξ·diag(X, I)` for the original model.
pub fn init_shifted_riccati(model: &StateSpaceModel, xi: f64) -> Result<HermitianMatrix> {
    let shifted = shifted_model(model, xi)?;
    let pair = match solve_extremal(&shifted) {
        Ok(p) => p,
        Err(Error::BoundarySpectrum { .. }) => return Err(Error::XiTooLarge { xi }),
        Err(e) => return Err(e),
    };
    let x = pair.x_min.add(&pair.x_max).scale(0.5);
    if interior(model, &x, None).is_none() {
        return Err(Error::XiTooLarge { xi });
    }
    Ok(x)
}

fn identity_probes(
    model: &StateSpaceModel,
    weight: Option<&GeneralizedWeight>,
) -> Option<HermitianMatrix> {
    let n = model.n();
    std::iter::once(0)
        .chain((1..=8).flat_map(|k| [k, -k]))
        .map(|k| HermitianMatrix::scaled_identity(n, 10f64.powi(k)))
        .find(|x| interior(model, x, weight).is_some())
}

/// Strictly feasible starting point chosen by `options.init`.
pub fn initialize(
    model: &StateSpaceModel,
    weight: Option<&GeneralizedWeight>,
    options: &CenterOptions,
) -> Result<(HermitianMatrix, InitKind)> {
    let r = match weight {
        Some(w) => w.r.clone(),
        None => model.r(),
    };
    if r.min_eigenvalue() <= 0.0 {
        return Err(Error::NotStrictlyPassive("R is not positive definite".into()));
    }
    let no_start = || Error::NotStrictlyPassive("no strictly feasible starting point found".into());
    if let InitStrategy::Given(x) = &options.init {
        if x.dim() != model.n() {
            return Err(Error::Shape("initial X does not match the model".into()));
        }
        return match interior(model, x, weight) {
            Some(_) => Ok((x.clone(), InitKind::Given)),
            None => Err(Error::Boundary {
                lambda_min: lmi_matrix(model, x, weight)?.min_eigenvalue(),
            }),
        };
    }
    // Riccati-based starts only describe the plain model weight.
    if weight.is_some() || options.init == InitStrategy::Identity {
        return identity_probes(model, weight)
            .map(|x| (x, InitKind::ScaledIdentity))
            .ok_or_else(no_start);
    }
    let pair = solve_extremal(model).ok();
    if options.init == InitStrategy::GeometricMean {
        if let Some(x) = pair.as_ref().and_then(|p| init_geometric_mean(&p.x_min, &p.x_max).ok()) {
            if interior(model, &x, None).is_some() {
                return Ok((x, InitKind::GeometricMean));
            }
        }
    }
    let mean = pair
        .as_ref()
        .map(|p| p.x_min.add(&p.x_max).scale(0.5))
        .filter(|x| interior(model, x, None).is_some());
    let probe = match mean {
        Some(x) => Some((x, InitKind::ArithmeticMean)),
        None => identity_probes(model, None).map(|x| (x, InitKind::ScaledIdentity)),
    };
    if let Some(xi) = options.xi {
        return Ok((init_shifted_riccati(model, xi)?, InitKind::ShiftedRiccati));
    }
    let Some((x0, kind)) = probe else {
        return Err(no_start());
    };
    let shifted = admissible_xi(model, &x0).and_then(|xi| init_shifted_riccati(model, xi));
    match shifted {
        Ok(x) => Ok((x, InitKind::ShiftedRiccati)),
        Err(_) => Ok((x0, kind)),
    }
}
