//! Cayley transforms between continuous- and discrete-time models.
//!
//! With `T = [√2(I − A)⁻¹, (I − A)⁻¹B; 0, I]` the map
//! `A' = (A − I)⁻¹(I + A)`, `B' = √2(A − I)⁻¹B` satisfies
//! `W'(X) = Tᴴ W(X) T` for every `X`, where the primed LMI uses the
//! transformed weight `Tᴴ [Q, Cwᴴ; Cw, R] T`. The map is an involution, so
//! the same formula serves both directions and `T_d = T_c⁻¹`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{checked_inverse, hermitian_part, CMatrix, HermitianMatrix};
use crate::lmi::eval_w;
use crate::model::{GeneralizedWeight, StateSpaceModel, TimeDomain};

/// A transformed model with its weight and the congruence factor.
#[derive(Clone, Debug)]
pub struct TransformedModel {
    pub model: StateSpaceModel,
    pub weight: GeneralizedWeight,
    pub t_factor: CMatrix,
    /// `|det T|²`.
    pub det_ratio: f64,
}

fn mobius(
    model: &StateSpaceModel,
    weight: Option<&GeneralizedWeight>,
    target: TimeDomain,
) -> Result<TransformedModel> {
    let n = model.n();
    let m = model.m();
    let id = CMatrix::identity(n, n);
    let ima = &id - model.a();
    let inv = checked_inverse(&ima).ok_or(Error::TransformPole)?;
    let s2 = Complex64::new(2f64.sqrt(), 0.0);
    // (A − I)⁻¹ = −(I − A)⁻¹.
    let a_new = -(&inv * (&id + model.a()));
    let b_new = -(&inv * model.b()) * s2;

    let mut t = CMatrix::identity(n + m, n + m);
    t.view_mut((0, 0), (n, n)).copy_from(&(&inv * s2));
    t.view_mut((0, n), (n, m)).copy_from(&(&inv * model.b()));

    let base = match weight {
        Some(w) => w.clone(),
        None => GeneralizedWeight::from_model(model),
    };
    let block = hermitian_part(&(t.adjoint() * base.block().matrix() * &t));
    let bm = block.matrix();
    let q = bm.view((0, 0), (n, n)).into_owned();
    let cw = bm.view((n, 0), (m, n)).into_owned();
    let r = bm.view((n, n), (m, m)).into_owned();
    // Only R = D + Dᴴ enters the LMI; keeping the skew part of D makes
    // round trips exact.
    let skew = (model.d() - model.d().adjoint()) * Complex64::new(0.5, 0.0);
    let d_new = &r * Complex64::new(0.5, 0.0) + skew;

    let det = ima.clone().lu().determinant();
    let det_ratio = 2f64.powi(n as i32) / det.norm_sqr();

    Ok(TransformedModel {
        model: StateSpaceModel::unchecked(a_new, b_new, cw.clone(), d_new, target)?,
        weight: GeneralizedWeight::new(q, cw, r)?,
        t_factor: t,
        det_ratio,
    })
}

/// Continuous to discrete. Fails with `TransformPole` if `1` is an
/// eigenvalue of `A_c`.
pub fn cayley_c2d(model: &StateSpaceModel, weight: Option<&GeneralizedWeight>) -> Result<TransformedModel> {
    if model.domain() != TimeDomain::Continuous {
        return Err(Error::InvalidArgument("cayley_c2d needs a continuous model".into()));
    }
    mobius(model, weight, TimeDomain::Discrete)
}

/// Discrete to continuous, the inverse of `cayley_c2d`. Fails with
/// `TransformPole` if `1` is an eigenvalue of `A_d`.
pub fn cayley_d2c(model: &StateSpaceModel, weight: Option<&GeneralizedWeight>) -> Result<TransformedModel> {
    if model.domain() != TimeDomain::Discrete {
        return Err(Error::InvalidArgument("cayley_d2c needs a discrete model".into()));
    }
    mobius(model, weight, TimeDomain::Continuous)
}

/// Transforms into the other domain.
pub fn transform(model: &StateSpaceModel, weight: Option<&GeneralizedWeight>) -> Result<TransformedModel> {
    match model.domain() {
        TimeDomain::Continuous => cayley_c2d(model, weight),
        TimeDomain::Discrete => cayley_d2c(model, weight),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierEquivalenceReport {
    /// `det W_d(X) / det W_c(X)`.
    pub ratio: f64,
    pub det_ratio: f64,
    pub relative_error: f64,
}

/// Compares `det W_d(X) / det W_c(X)` with `|det T_c|²` at a strictly
/// feasible `X`.
pub fn verify_barrier_equivalence(
    model: &StateSpaceModel,
    weight: Option<&GeneralizedWeight>,
    x: &HermitianMatrix,
) -> Result<BarrierEquivalenceReport> {
    let tm = cayley_c2d(model, weight)?;
    let ec = eval_w(model, x, weight)?;
    let ed = eval_w(&tm.model, x, Some(&tm.weight))?;
    if !ec.feasible_strict || !ed.feasible_strict {
        return Err(Error::Boundary {
            lambda_min: ec.w.min_eigenvalue(),
        });
    }
    let ratio = (ed.ln_det() - ec.ln_det()).exp();
    Ok(BarrierEquivalenceReport {
        ratio,
        det_ratio: tm.det_ratio,
        relative_error: (ratio - tm.det_ratio).abs() / tm.det_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRelationReport {
    /// `‖P_d − 2(I − A_c + B_cF_c)^{−H} P_c (I − A_c + B_cF_c)^{−1}‖_F / ‖P_d‖_F`.
    pub displayed_residual: f64,
    /// Same against the Schur complement of `T_Pᴴ diag(P_c, R_c) T_P`,
    /// `T_P = [I, 0; F_c, I]·T_c`.
    pub exact_residual: f64,
    pub pass: bool,
}

pub const RESIDUAL_RELATION_TOL: f64 = 1e-8;

/// Checks the relation between the continuous Riccati residual `P_c` and
/// the residual `P_d` of the transformed discrete LMI at the same `X`.
pub fn verify_residual_relation(
    model: &StateSpaceModel,
    weight: Option<&GeneralizedWeight>,
    x: &HermitianMatrix,
) -> Result<ResidualRelationReport> {
    let n = model.n();
    let m = model.m();
    let tm = cayley_c2d(model, weight)?;
    let ec = eval_w(model, x, weight)?;
    let ed = eval_w(&tm.model, x, Some(&tm.weight))?;
    let pd = ed.p.matrix();
    let scale = pd.norm().max(f64::MIN_POSITIVE);

    let k = CMatrix::identity(n, n) - model.a() + model.b() * &ec.f;
    let k_inv = checked_inverse(&k).ok_or(Error::TransformPole)?;
    let displayed = k_inv.adjoint() * ec.p.matrix() * &k_inv * Complex64::new(2.0, 0.0);

    let mut l = CMatrix::identity(n + m, n + m);
    l.view_mut((n, 0), (m, n)).copy_from(&ec.f);
    let tp = l * &tm.t_factor;
    let mut mid = CMatrix::zeros(n + m, n + m);
    mid.view_mut((0, 0), (n, n)).copy_from(ec.p.matrix());
    mid.view_mut((n, n), (m, m)).copy_from(ec.r0.matrix());
    let g = tp.adjoint() * mid * &tp;
    let g22 = g.view((n, n), (m, m)).into_owned();
    let g21 = g.view((n, 0), (m, n)).into_owned();
    let g22_inv = checked_inverse(&g22).ok_or(Error::R0Singular { min_abs_eig: 0.0 })?;
    let exact = g.view((0, 0), (n, n)).into_owned() - g21.adjoint() * g22_inv * g21;

    let displayed_residual = (pd - displayed).norm() / scale;
    Ok(ResidualRelationReport {
        displayed_residual,
        exact_residual: (pd - exact).norm() / scale,
        pass: displayed_residual <= RESIDUAL_RELATION_TOL,
    })
}
