//! Extremal solutions of the continuous and discrete algebraic Riccati
//! equations through ordered Schur decompositions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{checked_inverse, hermitian_part, CMatrix, HermitianMatrix};
use crate::lmi::eval_w;
use crate::model::{system_pencil_eval, StateSpaceModel, TimeDomain};
use crate::schur::{eigenvalues, ComplexSchur};

/// Relative distance to the stability boundary below which the spectrum is
/// treated as touching it.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Minimal and maximal Riccati solutions with their closed-loop spectra.
#[derive(Clone, Debug)]
pub struct ExtremalPair {
    pub x_min: HermitianMatrix,
    pub x_max: HermitianMatrix,
    pub spectrum_min: Vec<Complex64>,
    pub spectrum_max: Vec<Complex64>,
}

/// The Schur complement `P` of `W(X)` with the plain model weight.
pub fn riccati_residual(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(eval_w(model, x, None)?.p)
}

fn r_inverse(model: &StateSpaceModel) -> Result<CMatrix> {
    Ok(model.r().inverse()?.into_matrix())
}

/// `[A − BR⁻¹C, −BR⁻¹Bᴴ; CᴴR⁻¹C, −(A − BR⁻¹C)ᴴ]`.
pub fn hamiltonian(model: &StateSpaceModel) -> Result<CMatrix> {
    let n = model.n();
    let ri = r_inverse(model)?;
    let (a, b, c) = (model.a(), model.b(), model.c());
    let ac = a - b * &ri * c;
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&ac);
    h.view_mut((0, n), (n, n)).copy_from(&(-(b * &ri * b.adjoint())));
    h.view_mut((n, 0), (n, n)).copy_from(&(c.adjoint() * &ri * c));
    h.view_mut((n, n), (n, n)).copy_from(&(-ac.adjoint()));
    Ok(h)
}

/// The pencil `M − λL` with `L = [I, BR⁻¹Bᴴ; 0, Aᴴ − CᴴR⁻¹Bᴴ]` and
/// `M = [A − BR⁻¹C, 0; CᴴR⁻¹C, I]`.
pub fn symplectic_pencil(model: &StateSpaceModel) -> Result<(CMatrix, CMatrix)> {
    let n = model.n();
    let ri = r_inverse(model)?;
    let (a, b, c) = (model.a(), model.b(), model.c());
    let id = CMatrix::identity(n, n);
    let mut l = CMatrix::zeros(2 * n, 2 * n);
    l.view_mut((0, 0), (n, n)).copy_from(&id);
    l.view_mut((0, n), (n, n)).copy_from(&(b * &ri * b.adjoint()));
    l.view_mut((n, n), (n, n)).copy_from(&(a.adjoint() - c.adjoint() * &ri * b.adjoint()));
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(a - b * &ri * c));
    m.view_mut((n, 0), (n, n)).copy_from(&(c.adjoint() * &ri * c));
    m.view_mut((n, n), (n, n)).copy_from(&id);
    Ok((m, l))
}

/// `X = −U₂U₁⁻¹` from the first `n` Schur vectors, Hermitian-projected.
fn solution_from_subspace(q: &CMatrix, n: usize) -> Result<HermitianMatrix> {
    let u1 = q.view((0, 0), (n, n)).into_owned();
    let u2 = q.view((n, 0), (n, n)).into_owned();
    let sv = u1.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    let low = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    let rcond = if top == 0.0 { 0.0 } else { low / top };
    if rcond < 1e-12 {
        return Err(Error::Subspace { rcond });
    }
    let inv = checked_inverse(&u1).ok_or(Error::Subspace { rcond })?;
    Ok(hermitian_part(&(-(u2 * inv))))
}

/// Orders the spectrum of `k` by `Re μ < 0` and `Re μ > 0`, returning the two
/// candidate solutions (stable first).
fn split_solutions(k: &CMatrix, n: usize) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let schur = ComplexSchur::new(k)?;
    let scale = k.norm().max(1.0);
    let distance = schur
        .eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, z| a.min(z.re.abs()));
    if distance <= BOUNDARY_TOL * scale {
        return Err(Error::BoundarySpectrum { distance });
    }
    let mut stable = schur.clone();
    if stable.reorder(|z| z.re < 0.0) != n {
        return Err(Error::BoundarySpectrum { distance });
    }
    let mut anti = schur;
    anti.reorder(|z| z.re > 0.0);
    Ok((
        solution_from_subspace(&stable.q, n)?,
        solution_from_subspace(&anti.q, n)?,
    ))
}

fn label(model: &StateSpaceModel, x1: HermitianMatrix, x2: HermitianMatrix) -> Result<ExtremalPair> {
    // Extremal solutions of a real model are real; the complex Schur form
    // only leaves rounding noise in the imaginary parts.
    let (x1, x2) = if model.is_real() {
        (x1.real_part(), x2.real_part())
    } else {
        (x1, x2)
    };
    let (x_min, x_max) = if x2.sub(&x1).min_eigenvalue() >= x1.sub(&x2).min_eigenvalue() {
        (x1, x2)
    } else {
        (x2, x1)
    };
    let spectrum_min = eigenvalues(&eval_w(model, &x_min, None)?.a_f)?;
    let spectrum_max = eigenvalues(&eval_w(model, &x_max, None)?.a_f)?;
    Ok(ExtremalPair {
        x_min,
        x_max,
        spectrum_min,
        spectrum_max,
    })
}

pub fn solve_care_extremal(model: &StateSpaceModel) -> Result<ExtremalPair> {
    if model.domain() != TimeDomain::Continuous {
        return Err(Error::InvalidArgument("CARE needs a continuous model".into()));
    }
    let h = hamiltonian(model)?;
    let (x1, x2) = split_solutions(&h, model.n())?;
    label(model, x1, x2)
}

pub fn solve_dare_extremal(model: &StateSpaceModel) -> Result<ExtremalPair> {
    if model.domain() != TimeDomain::Discrete {
        return Err(Error::InvalidArgument("DARE needs a discrete model".into()));
    }
    let (m, l) = symplectic_pencil(model)?;
    // Cayley map μ = (λ − 1)/(λ + 1) sends the unit disk to the left half plane.
    let sum_inv = checked_inverse(&(&m + &l)).ok_or(Error::BoundarySpectrum { distance: 0.0 })?;
    let k = sum_inv * (&m - &l);
    let (x1, x2) = split_solutions(&k, model.n())?;
    label(model, x1, x2)
}

pub fn solve_extremal(model: &StateSpaceModel) -> Result<ExtremalPair> {
    match model.domain() {
        TimeDomain::Continuous => solve_care_extremal(model),
        TimeDomain::Discrete => solve_dare_extremal(model),
    }
}

/// Residuals of the Riccati invariant-subspace relations at `X`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SubspaceReport {
    /// `‖ℋU − UA_F‖` (continuous) or `‖MU − LUA_F‖` (discrete), `U = [I; −X]`.
    pub invariant_residual: f64,
    /// `‖NÛ − JÛA_F‖` for the system pencil `S(p) = N − pJ`, `Û = [−X; I; −F]`.
    pub extended_residual: f64,
    pub scale: f64,
    pub pass: bool,
}

pub fn verify_invariant_subspace(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<SubspaceReport> {
    let n = model.n();
    let m = model.m();
    let ev = eval_w(model, x, None)?;
    let af = &ev.a_f;
    let mut u = CMatrix::zeros(2 * n, n);
    u.view_mut((0, 0), (n, n)).copy_from(&CMatrix::identity(n, n));
    u.view_mut((n, 0), (n, n)).copy_from(&(-x.matrix()));
    let (invariant_residual, lhs_scale) = match model.domain() {
        TimeDomain::Continuous => {
            let h = hamiltonian(model)?;
            ((&h * &u - &u * af).norm(), h.norm())
        }
        TimeDomain::Discrete => {
            let (mm, l) = symplectic_pencil(model)?;
            ((&mm * &u - &l * &u * af).norm(), mm.norm() + l.norm())
        }
    };
    let zero = Complex64::new(0.0, 0.0);
    let s0 = system_pencil_eval(model, zero);
    let j = &s0 - system_pencil_eval(model, Complex64::new(1.0, 0.0));
    let mut uh = CMatrix::zeros(2 * n + m, n);
    uh.view_mut((0, 0), (n, n)).copy_from(&(-x.matrix()));
    uh.view_mut((n, 0), (n, n)).copy_from(&CMatrix::identity(n, n));
    uh.view_mut((2 * n, 0), (m, n)).copy_from(&(-&ev.f));
    let extended_residual = (&s0 * &uh - &j * &uh * af).norm();
    let scale = (1.0 + x.norm_fro()) * (1.0 + lhs_scale + s0.norm() + j.norm()) * (1.0 + af.norm());
    let pass = invariant_residual <= 1e-8 * scale && extended_residual <= 1e-8 * scale;
    Ok(SubspaceReport {
        invariant_residual,
        extended_residual,
        scale,
        pass,
    })
}
