//! The passivity LMI `W(X)`, its Schur factorization, the log-det barrier and
//! its gradient.


use crate::error::{Error, Result};
use crate::hermitian::{hermitian_part, CMatrix, HermitianMatrix};
use crate::model::{GeneralizedWeight, StateSpaceModel, TimeDomain};

/// `W(X)` together with `R0`, `F`, `P` and `A_F = A − BF`.
#[derive(Clone, Debug)]
pub struct LmiEvaluation {
    pub w: HermitianMatrix,
    pub r0: HermitianMatrix,
    pub f: CMatrix,
    pub p: HermitianMatrix,
    pub a_f: CMatrix,
    pub feasible_strict: bool,
    pub p_min_eig: f64,
    pub r0_min_eig: f64,
    p_eigs: Vec<f64>,
    r0_eigs: Vec<f64>,
}

impl LmiEvaluation {
    /// `ln det W = ln det P + ln det R0`, only meaningful when strictly feasible.
    pub fn ln_det(&self) -> f64 {
        self.p_eigs.iter().chain(self.r0_eigs.iter()).map(|v| v.ln()).sum()
    }
}

struct Blocks {
    w11: CMatrix,
    w21: CMatrix,
    w22: CMatrix,
}

fn check_x(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<()> {
    if x.dim() != model.n() {
        return Err(Error::Shape(format!(
            "X is {0}x{0} but the model has n = {1}",
            x.dim(),
            model.n()
        )));
    }
    Ok(())
}

fn blocks(model: &StateSpaceModel, x: &HermitianMatrix, weight: Option<&GeneralizedWeight>) -> Result<Blocks> {
    check_x(model, x)?;
    let n = model.n();
    let m = model.m();
    let (q, cw, r) = match weight {
        Some(w) => {
            if w.q.dim() != n || w.r.dim() != m {
                return Err(Error::Shape("weight does not match the model dimensions".into()));
            }
            (w.q.matrix().clone(), w.cw.clone(), w.r.matrix().clone())
        }
        None => (CMatrix::zeros(n, n), model.c().clone(), model.r().into_matrix()),
    };
    let a = model.a();
    let b = model.b();
    let xm = x.matrix();
    Ok(match model.domain() {
        TimeDomain::Continuous => {
            let xa = xm * a;
            Blocks {
                w11: q - &xa - xa.adjoint(),
                w21: cw - b.adjoint() * xm,
                w22: r,
            }
        }
        TimeDomain::Discrete => {
            let xa = xm * a;
            let xb = xm * b;
            Blocks {
                w11: q + xm - a.adjoint() * &xa,
                w21: cw - b.adjoint() * xa,
                w22: r - b.adjoint() * xb,
            }
        }
    })
}

fn assemble(bl: &Blocks) -> HermitianMatrix {
    let n = bl.w11.nrows();
    let m = bl.w22.nrows();
    let mut w = CMatrix::zeros(n + m, n + m);
    w.view_mut((0, 0), (n, n)).copy_from(&bl.w11);
    w.view_mut((n, 0), (m, n)).copy_from(&bl.w21);
    w.view_mut((0, n), (n, m)).copy_from(&bl.w21.adjoint());
    w.view_mut((n, n), (m, m)).copy_from(&bl.w22);
    hermitian_part(&w)
}

/// Continuous `[Q − XA − AᴴX, Cwᴴ − XB; Cw − BᴴX, R]`, discrete
/// `[Q + X − AᴴXA, Cwᴴ − AᴴXB; Cw − BᴴXA, R − BᴴXB]`. Without a weight
/// `Q = 0`, `Cw = C`, `R = D + Dᴴ`.
pub fn lmi_matrix(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<HermitianMatrix> {
    Ok(assemble(&blocks(model, x, weight)?))
}

/// The linear part `W(X) − W(0)`, formed without the constant block so that
/// small `X` keep full relative accuracy.
pub(crate) fn lmi_linear_part(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let n = model.n();
    let m = model.m();
    let zero = GeneralizedWeight {
        q: HermitianMatrix::zeros(n),
        cw: CMatrix::zeros(m, n),
        r: HermitianMatrix::zeros(m),
    };
    lmi_matrix(model, x, Some(&zero))
}

/// Evaluates `W(X)` and eliminates the `R0` block.
pub fn eval_w(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<LmiEvaluation> {
    let bl = blocks(model, x, weight)?;
    let w = assemble(&bl);
    let r0 = hermitian_part(&bl.w22);
    let (r0_vals, r0_vecs) = r0.eigh();
    let big = r0_vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let small = r0_vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if big == 0.0 || small <= 1e-13 * big {
        return Err(Error::R0Singular { min_abs_eig: small });
    }
    // R0⁻¹ from the eigendecomposition keeps the inverse Hermitian.
    let mut scaled = r0_vecs.clone();
    for (j, lam) in r0_vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / lam);
    }
    let r0_inv = scaled * r0_vecs.adjoint();
    let f = &r0_inv * &bl.w21;
    let p = hermitian_part(&(&bl.w11 - bl.w21.adjoint() * &f));
    let a_f = model.a() - model.b() * &f;
    let p_vals = p.eigenvalues();
    let p_min_eig = p_vals[0];
    let r0_min_eig = r0_vals[0];
    Ok(LmiEvaluation {
        w,
        r0,
        f,
        p,
        a_f,
        feasible_strict: p_min_eig > 0.0 && r0_min_eig > 0.0,
        p_min_eig,
        r0_min_eig,
        p_eigs: p_vals.iter().cloned().collect(),
        r0_eigs: r0_vals.iter().cloned().collect(),
    })
}

/// Strictly feasible evaluation or a boundary error carrying `λ_min(W)`.
pub(crate) fn eval_feasible(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<LmiEvaluation> {
    let ev = match eval_w(model, x, weight) {
        Ok(ev) => ev,
        Err(Error::R0Singular { .. }) => {
            let w = lmi_matrix(model, x, weight)?;
            return Err(Error::Boundary {
                lambda_min: w.min_eigenvalue(),
            });
        }
        Err(e) => return Err(e),
    };
    if !ev.feasible_strict {
        return Err(Error::Boundary {
            lambda_min: ev.w.min_eigenvalue(),
        });
    }
    Ok(ev)
}

/// `−ln det W(X)`.
pub fn barrier(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<f64> {
    Ok(-eval_feasible(model, x, weight)?.ln_det())
}

/// Gradient of `ln det W` from an existing strictly feasible evaluation.
pub(crate) fn gradient_from(model: &StateSpaceModel, ev: &LmiEvaluation) -> Result<HermitianMatrix> {
    let p_inv = ev.p.inverse()?;
    let pi = p_inv.matrix();
    let af = &ev.a_f;
    let g = match model.domain() {
        TimeDomain::Continuous => -(af * pi + pi * af.adjoint()),
        TimeDomain::Discrete => {
            let r0_inv = ev.r0.inverse()?;
            let b = model.b();
            -(af * pi * af.adjoint() - pi + b * r0_inv.matrix() * b.adjoint())
        }
    };
    Ok(hermitian_part(&g))
}

/// `G` with `d/dt ln det W(X + tΔ) = Re tr(GΔ)`.
pub fn gradient_log_det(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<HermitianMatrix> {
    let ev = eval_feasible(model, x, weight)?;
    gradient_from(model, &ev)
}

/// `‖G‖_F`.
pub fn stationarity_residual(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<f64> {
    Ok(gradient_log_det(model, x, weight)?.norm_fro())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::frobenius_real_inner;
    use crate::model::{random_passive_model, random_passive_model_complex};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn scalar_c() -> StateSpaceModel {
        StateSpaceModel::scalar(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap()
    }

    fn x1(v: f64) -> HermitianMatrix {
        HermitianMatrix::from_diagonal(&[v])
    }

    #[test]
    fn scalar_continuous_values() {
        let m = scalar_c();
        let ev = eval_w(&m, &x1(5.0), None).unwrap();
        let w = ev.w.matrix();
        assert_eq!(w[(0, 0)].re, 10.0);
        assert_eq!(w[(0, 1)].re, -4.0);
        assert_eq!(w[(1, 1)].re, 4.0);
        assert!((ev.ln_det() - 24f64.ln()).abs() < 1e-14);
        assert!((barrier(&m, &x1(5.0), None).unwrap() + 24f64.ln()).abs() < 1e-14);
        assert!(ev.feasible_strict);
        let g = gradient_log_det(&m, &x1(5.0), None).unwrap();
        assert!(g.norm_fro() < 1e-10);
        for dx in [-0.1, 0.1] {
            assert!(barrier(&m, &x1(5.0), None).unwrap() < barrier(&m, &x1(5.0 + dx), None).unwrap());
        }
        assert!(stationarity_residual(&m, &x1(5.5), None).unwrap() > 1e-3);
    }

    #[test]
    fn zero_x_gives_weight_block() {
        let m = scalar_c();
        let w = lmi_matrix(&m, &x1(0.0), None).unwrap();
        assert_eq!(w, GeneralizedWeight::from_model(&m).block());
    }

    #[test]
    fn gradient_at_zero_feedback_point() {
        // x = c/b gives F = 0, A_F = a, p = −2ax, G = −2a/p.
        let m = scalar_c();
        let ev = eval_w(&m, &x1(1.0), None).unwrap();
        assert!(ev.f.norm() < 1e-15);
        let g = gradient_log_det(&m, &x1(1.0), None).unwrap();
        let p = 2.0;
        assert!((g.matrix()[(0, 0)].re - 2.0 / p).abs() < 1e-14);
    }

    #[test]
    fn scalar_discrete_det() {
        let m = StateSpaceModel::scalar(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        let ev = eval_w(&m, &x1(0.875), None).unwrap();
        assert!((ev.ln_det().exp() - 0.703125).abs() < 1e-14);
        assert!(gradient_log_det(&m, &x1(0.875), None).unwrap().norm_fro() < 1e-10);
    }

    #[test]
    fn identity_weight_gives_zero_barrier() {
        // A = 0, Q = I, Cw = 0, R = I gives W = I for every X in continuous time.
        let n = 2;
        let m = StateSpaceModel::unchecked(
            CMatrix::zeros(n, n),
            CMatrix::zeros(n, 1),
            CMatrix::zeros(1, n),
            CMatrix::identity(1, 1),
            TimeDomain::Continuous,
        )
        .unwrap();
        let w = GeneralizedWeight::new(CMatrix::identity(n, n), CMatrix::zeros(1, n), CMatrix::identity(1, 1))
            .unwrap();
        let x = HermitianMatrix::from_diagonal(&[3.0, -1.0]);
        assert_eq!(barrier(&m, &x, Some(&w)).unwrap(), 0.0);
    }

    #[test]
    fn infeasible_point_reports_boundary() {
        let m = scalar_c();
        match barrier(&m, &x1(20.0), None) {
            Err(Error::Boundary { lambda_min }) => assert!(lambda_min < 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// `X = I + small random Hermitian` keeps generated models feasible.
    fn near_identity(n: usize, seed: u64, scale: f64, complex: bool) -> HermitianMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::from_fn(n, n, |_, _| {
            let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
            Complex64::new(rng.random_range(-1.0..1.0), im)
        });
        HermitianMatrix::identity(n).axpy(scale, &HermitianMatrix::new(m).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn factorization_identity(seed in 0u64..100_000, disc in any::<bool>(), complex in any::<bool>()) {
            let domain = if disc { TimeDomain::Discrete } else { TimeDomain::Continuous };
            let m = if complex {
                random_passive_model_complex(5, 2, seed, domain).unwrap()
            } else {
                random_passive_model(5, 2, seed, domain).unwrap()
            };
            let x = near_identity(5, seed + 1, 0.05, complex);
            let ev = eval_w(&m, &x, None).unwrap();
            let n = 5;
            let mut l = CMatrix::identity(7, 7);
            l.view_mut((n, 0), (2, n)).copy_from(&ev.f);
            let mut d = CMatrix::zeros(7, 7);
            d.view_mut((0, 0), (n, n)).copy_from(ev.p.matrix());
            d.view_mut((n, n), (2, 2)).copy_from(ev.r0.matrix());
            let rebuilt = l.adjoint() * d * &l;
            prop_assert!((&rebuilt - ev.w.matrix()).norm() <= 1e-10 * ev.w.norm_fro());
            if ev.feasible_strict {
                let direct = ev.w.matrix().clone().determinant().re;
                prop_assert!((ev.ln_det().exp() - direct).abs() <= 1e-8 * direct.abs());
            }
        }

        #[test]
        fn gradient_matches_finite_differences(seed in 0u64..100_000, disc in any::<bool>(), complex in any::<bool>()) {
            let domain = if disc { TimeDomain::Discrete } else { TimeDomain::Continuous };
            let m = if complex {
                random_passive_model_complex(5, 2, seed, domain).unwrap()
            } else {
                random_passive_model(5, 2, seed, domain).unwrap()
            };
            let x = near_identity(5, seed + 1, 0.05, complex);
            prop_assume!(eval_w(&m, &x, None).unwrap().feasible_strict);
            let delta = near_identity(5, seed + 2, 1.0, complex).axpy(-1.0, &HermitianMatrix::identity(5));
            let g = gradient_log_det(&m, &x, None).unwrap();
            let h = 1e-5 * x.norm_fro();
            let up = -barrier(&m, &x.axpy(h, &delta), None).unwrap();
            let down = -barrier(&m, &x.axpy(-h, &delta), None).unwrap();
            let fd = (up - down) / (2.0 * h);
            let an = frobenius_real_inner(g.matrix(), delta.matrix()).unwrap();
            prop_assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "fd {} analytic {}", fd, an);
        }
    }
}
