use crate::error::{Error, Result};
use crate::hermitian::{
    hermitian_part, hermitian_sqrt, inner, solve_hermitian_operator, CMatrix, HermitianMatrix,
    HermitianOperator,
};
use crate::lmi::{eval_feasible, gradient_from, lmi_linear_part, LmiEvaluation};
use crate::model::{GeneralizedWeight, StateSpaceModel, TimeDomain};

/// Quantities at `X` in the coordinates `Δ = T Δ̂ T`, `T = P^{1/2}`.
pub(crate) struct Frame {
    pub ev: LmiEvaluation,
    pub t: HermitianMatrix,
    pub t_inv: HermitianMatrix,
    /// `T A_F T⁻¹`.
    pub a_hat: CMatrix,
    /// `T B R0⁻¹ Bᴴ T`.
    pub q_hat: CMatrix,
    /// Gradient of `ln det W` in hatted coordinates, `T G T`.
    pub g_hat: HermitianMatrix,
    pub domain: TimeDomain,
    pub real: bool,
}

/// Evaluation that is strictly feasible with a numerically definite `P`,
/// the condition the Newton frame needs.
pub(crate) fn interior(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Option<LmiEvaluation> {
    let ev = eval_feasible(model, x, weight).ok()?;
    hermitian_sqrt(&ev.p, true).ok()?;
    Some(ev)
}

impl Frame {
    pub fn new(
        model: &StateSpaceModel,
        x: &HermitianMatrix,
        weight: Option<&GeneralizedWeight>,
    ) -> Result<Self> {
        let ev = eval_feasible(model, x, weight)?;
        let sq = match hermitian_sqrt(&ev.p, true) {
            Ok(sq) => sq,
            Err(Error::NotPd { .. }) | Err(Error::NotPsd { .. }) => {
                return Err(Error::Boundary {
                    lambda_min: ev.w.min_eigenvalue(),
                })
            }
            Err(e) => return Err(e),
        };
        let t = sq.root;
        let t_inv = sq.inv_root.expect("definite root carries its inverse");
        let a_hat = t.matrix() * &ev.a_f * t_inv.matrix();
        let r0_inv = ev.r0.inverse()?;
        let bt = t.matrix() * model.b();
        let q_hat = hermitian_part(&(&bt * r0_inv.matrix() * bt.adjoint())).into_matrix();
        let n = model.n();
        let id = CMatrix::identity(n, n);
        let g_hat = match model.domain() {
            TimeDomain::Continuous => hermitian_part(&(-(&a_hat + a_hat.adjoint()))),
            TimeDomain::Discrete => hermitian_part(&(id - &q_hat - &a_hat * a_hat.adjoint())),
        };
        let real = model.is_real()
            && x.is_real()
            && weight.is_none_or(|w| {
                w.q.is_real() && w.r.is_real() && w.cw.iter().all(|z| z.im == 0.0)
            });
        Ok(Frame {
            ev,
            t,
            t_inv,
            a_hat,
            q_hat,
            g_hat,
            domain: model.domain(),
            real,
        })
    }

    /// Eigenvalues `μ` of `𝓛(Δ)` relative to `W(X)`, so that
    /// `ln det W(X + αΔ) − ln det W(X) = Σ ln(1 + αμ_i)`. Evaluated after the
    /// congruence `[T⁻¹, 0; −FT⁻¹, R0^{-1/2}]` that takes `W(X)` to about `I`,
    /// which keeps the change accurate where the two log-determinants agree
    /// to rounding.
    pub fn relative_spectrum(&self, model: &StateSpaceModel, dx: &HermitianMatrix) -> Result<Vec<f64>> {
        let n = model.n();
        let m = model.m();
        let ti = self.t_inv.matrix();
        let r0_isqrt = self.ev.r0.map_spectrum(|v| 1.0 / v.sqrt());
        let mut c = CMatrix::zeros(n + m, n + m);
        c.view_mut((0, 0), (n, n)).copy_from(ti);
        c.view_mut((n, 0), (m, n)).copy_from(&(-(&self.ev.f * ti)));
        c.view_mut((n, n), (m, m)).copy_from(r0_isqrt.matrix());
        let k0 = hermitian_part(&(c.adjoint() * self.ev.w.matrix() * &c));
        let lin = hermitian_part(&(c.adjoint() * lmi_linear_part(model, dx)?.matrix() * &c));
        let chol = k0
            .into_matrix()
            .cholesky()
            .ok_or(Error::NotPd { min_eig: 0.0 })?;
        let l = chol.l();
        let y = l
            .solve_lower_triangular(lin.matrix())
            .ok_or(Error::SingularOperator { condition: f64::INFINITY })?;
        let z = l
            .solve_lower_triangular(&y.adjoint())
            .ok_or(Error::SingularOperator { condition: f64::INFINITY })?;
        Ok(hermitian_part(&z).eigenvalues().iter().cloned().collect())
    }

    /// `(M_k, N_k)` with `H(Δ̂) = Σ M_k Δ̂ N_k`, the negative Hessian of
    /// `ln det W` in hatted coordinates.
    pub fn hessian_terms(&self) -> Vec<(CMatrix, CMatrix)> {
        let n = self.a_hat.nrows();
        let id = CMatrix::identity(n, n);
        let a = &self.a_hat;
        let ah = a.adjoint();
        let aah = a * &ah;
        match self.domain {
            TimeDomain::Continuous => vec![
                (a.clone(), a.clone()),
                (aah.clone(), id.clone()),
                (ah.clone(), ah.clone()),
                (id.clone(), aah),
                (self.q_hat.clone(), id.clone()),
                (id, self.q_hat.clone()),
            ],
            TimeDomain::Discrete => {
                let nn = aah + &self.q_hat;
                vec![(id.clone(), id), (-a, ah.clone()), (-ah, a.clone()), (nn.clone(), nn)]
            }
        }
    }

    pub fn hessian_apply(&self, d: &HermitianMatrix) -> HermitianMatrix {
        let m = d.matrix();
        let mut s = CMatrix::zeros(m.nrows(), m.ncols());
        for (l, r) in self.hessian_terms() {
            s += l * m * r;
        }
        hermitian_part(&s)
    }

    pub fn hessian_operator(&self) -> HermitianOperator {
        HermitianOperator::from_kronecker_terms(self.a_hat.nrows(), self.real, &self.hessian_terms())
    }

    pub fn to_hat(&self, dx: &HermitianMatrix) -> HermitianMatrix {
        hermitian_part(&(self.t_inv.matrix() * dx.matrix() * self.t_inv.matrix()))
    }

    pub fn from_hat(&self, dh: &HermitianMatrix) -> HermitianMatrix {
        hermitian_part(&(self.t.matrix() * dh.matrix() * self.t.matrix()))
    }

    /// Maximizer of the quadratic model `α⟨g, Δ̂⟩ − α²⟨H(Δ̂), Δ̂⟩/2`.
    pub fn model_alpha(&self, dh: &HermitianMatrix) -> Result<f64> {
        let scale = dh.norm_fro();
        if scale == 0.0 {
            return Ok(0.0);
        }
        let num = inner(&self.g_hat, dh);
        let den = inner(&self.hessian_apply(dh), dh);
        if !(den > 1e-300 * scale * scale) || !den.is_finite() {
            return Err(Error::DegenerateDirection);
        }
        let alpha = num / den;
        // The model value at α must not be below its value at 0.
        let gain = alpha * num - 0.5 * alpha * alpha * den;
        debug_assert!(gain >= -1e-12 * num.abs().max(1e-300));
        Ok(alpha)
    }
}

/// Halves `alpha` until `X + αΔ_X` is strictly interior. Returns 0 after 60
/// failed halvings.
pub(crate) fn cap_to_interior(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    dx: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
    mut alpha: f64,
) -> f64 {
    for _ in 0..=60 {
        if interior(model, &x.axpy(alpha, dx), weight).is_some() {
            return alpha;
        }
        alpha *= 0.5;
    }
    0.0
}

/// Result of `newton_direction`.
#[derive(Clone, Debug)]
pub struct NewtonStep {
    /// Direction in original coordinates, `T Δ̂ T`.
    pub delta_x: HermitianMatrix,
    /// Direction in hatted coordinates.
    pub delta_hat: HermitianMatrix,
    /// `⟨Δ̂, g⟩`.
    pub decrement: f64,
    /// Right-hand side `g` of the Newton equation.
    pub rhs: HermitianMatrix,
    /// The assembled operator `H`.
    pub operator: HermitianOperator,
}

pub(crate) fn newton_from_frame(frame: &Frame) -> Result<NewtonStep> {
    let operator = frame.hessian_operator();
    let delta_hat = match solve_hermitian_operator(&operator, &frame.g_hat) {
        Ok(d) => d,
        Err(Error::SingularOperator { condition }) => return Err(Error::SingularHessian { condition }),
        Err(e) => return Err(e),
    };
    let decrement = inner(&delta_hat, &frame.g_hat);
    Ok(NewtonStep {
        delta_x: frame.from_hat(&delta_hat),
        delta_hat,
        decrement,
        rhs: frame.g_hat.clone(),
        operator,
    })
}

/// Newton direction for maximizing `ln det W` at a strictly feasible `X`.
pub fn newton_direction(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<NewtonStep> {
    newton_from_frame(&Frame::new(model, x, weight)?)
}

/// Step length along a hatted direction `Δ̂`: the maximizer of the
/// second-order model of `ln det W`, then halved until `X + αTΔ̂T` stays
/// strictly feasible.
pub fn line_search_newton_alpha(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    delta_hat: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<f64> {
    let frame = Frame::new(model, x, weight)?;
    let alpha = frame.model_alpha(delta_hat)?;
    Ok(cap_to_interior(model, x, &frame.from_hat(delta_hat), weight, alpha))
}

/// Result of `steepest_ascent_step`.
#[derive(Clone, Debug)]
pub struct AscentStep {
    /// Unit Frobenius-norm gradient direction (zero at a stationary point).
    pub delta_x: HermitianMatrix,
    pub alpha: f64,
    /// `⟨g, Δ̂⟩² / ⟨H(Δ̂), Δ̂⟩`, the decrement restricted to the ray.
    pub ray_decrement: f64,
    pub residual: f64,
}

pub(crate) fn ascent_from_frame(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
    frame: &Frame,
) -> Result<AscentStep> {
    let g = gradient_from(model, &frame.ev)?;
    let residual = g.norm_fro();
    if residual == 0.0 {
        return Ok(AscentStep {
            delta_x: HermitianMatrix::zeros(x.dim()),
            alpha: 0.0,
            ray_decrement: 0.0,
            residual,
        });
    }
    let delta_x = g.scale(1.0 / residual);
    let dh = frame.to_hat(&delta_x);
    let alpha_model = frame.model_alpha(&dh)?;
    let ray_decrement = alpha_model * inner(&frame.g_hat, &dh);
    let alpha = cap_to_interior(model, x, &delta_x, weight, alpha_model);
    Ok(AscentStep {
        delta_x,
        alpha,
        ray_decrement,
        residual,
    })
}

/// Normalized gradient direction with its line-searched step length.
pub fn steepest_ascent_step(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<AscentStep> {
    let frame = Frame::new(model, x, weight)?;
    ascent_from_frame(model, x, weight, &frame)
}

/// `λ_min(W(X))`.
#[cfg(test)]
fn lambda_min_w(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<f64> {
    Ok(crate::lmi::lmi_matrix(model, x, weight)?.min_eigenvalue())
}
