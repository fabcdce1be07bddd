//! State-space models, generalized weights, minimality and Popov functions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{hermitian_part, spectral_norm, to_complex, CMatrix, HermitianMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDomain {
    Continuous,
    Discrete,
}

/// `{A, B, C, D}` with `A` n×n, `B` n×m, `C` m×n, `D` m×m.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
    domain: TimeDomain,
}

fn numerical_rank(m: &CMatrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    let tol = (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * top;
    sv.iter().filter(|s| **s > tol).count()
}

fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl StateSpaceModel {
    /// Validates shapes, finiteness, full rank of `B` and `C`, and
    /// invertibility of `R = D + Dᴴ`.
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix, domain: TimeDomain) -> Result<Self> {
        let model = Self::unchecked(a, b, c, d, domain)?;
        let m = model.m();
        if numerical_rank(&model.b) < m {
            return Err(Error::InvalidModel("B does not have full column rank".into()));
        }
        if numerical_rank(&model.c) < m {
            return Err(Error::InvalidModel("C does not have full row rank".into()));
        }
        let r = model.r();
        let ev = r.eigenvalues();
        let big = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let small = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if small <= 1e-12 * big.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidModel("R = D + Dᴴ is singular".into()));
        }
        Ok(model)
    }

    /// Shape and finiteness checks only. Used for perturbed or intermediate
    /// models that need not satisfy the rank assumptions.
    pub fn unchecked(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix, domain: TimeDomain) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        if n == 0 || m == 0 {
            return Err(Error::Shape("n and m must be at least 1".into()));
        }
        if a.shape() != (n, n) || b.shape() != (n, m) || c.shape() != (m, n) || d.shape() != (m, m) {
            return Err(Error::Shape(format!(
                "inconsistent shapes A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !all_finite(mat) {
                return Err(Error::InvalidModel(format!("{name} has non-finite entries")));
            }
        }
        Ok(StateSpaceModel { a, b, c, d, domain })
    }

    pub fn from_real(
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        c: &DMatrix<f64>,
        d: &DMatrix<f64>,
        domain: TimeDomain,
    ) -> Result<Self> {
        Self::new(to_complex(a), to_complex(b), to_complex(c), to_complex(d), domain)
    }

    pub fn scalar(a: f64, b: f64, c: f64, d: f64, domain: TimeDomain) -> Result<Self> {
        let s = |v: f64| CMatrix::from_element(1, 1, Complex64::new(v, 0.0));
        Self::new(s(a), s(b), s(c), s(d), domain)
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn b(&self) -> &CMatrix {
        &self.b
    }
    pub fn c(&self) -> &CMatrix {
        &self.c
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }
    pub fn domain(&self) -> TimeDomain {
        self.domain
    }
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// `R = D + Dᴴ`.
    pub fn r(&self) -> HermitianMatrix {
        hermitian_part(&(&self.d * Complex64::new(2.0, 0.0)))
    }

    pub fn is_real(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|m| m.iter().all(|z| z.im == 0.0))
    }

    /// `T(p) = D + C (pI − A)⁻¹ B`.
    pub fn transfer(&self, p: Complex64) -> Result<CMatrix> {
        let n = self.n();
        let shifted = CMatrix::identity(n, n) * p - &self.a;
        let lu = shifted.clone().lu();
        let sv = shifted.svd(false, false).singular_values;
        let top = sv.iter().fold(0.0f64, |a, v| a.max(*v));
        let low = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        if low <= 1e-14 * top.max(1.0) {
            return Err(Error::Pole { point: p });
        }
        let x = lu.solve(&self.b).ok_or(Error::Pole { point: p })?;
        Ok(&self.d + &self.c * x)
    }
}

/// Constant block `[Q, Cwᴴ; Cw, R]` replacing the model-derived part of the LMI.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedWeight {
    pub q: HermitianMatrix,
    pub cw: CMatrix,
    pub r: HermitianMatrix,
}

impl GeneralizedWeight {
    /// Checks shapes and that `Q`, `R` are Hermitian to rounding, then projects.
    pub fn new(q: CMatrix, cw: CMatrix, r: CMatrix) -> Result<Self> {
        let n = q.nrows();
        let m = r.nrows();
        if q.shape() != (n, n) || r.shape() != (m, m) || cw.shape() != (m, n) {
            return Err(Error::Shape(format!(
                "weight blocks Q {:?}, C {:?}, R {:?}",
                q.shape(),
                cw.shape(),
                r.shape()
            )));
        }
        for (name, mat) in [("Q", &q), ("R", &r)] {
            let skew = (mat - mat.adjoint()).norm();
            if skew > 1e-12 * mat.norm().max(1.0) {
                return Err(Error::InvalidModel(format!("{name} is not Hermitian")));
            }
        }
        Ok(GeneralizedWeight {
            q: hermitian_part(&q),
            cw,
            r: hermitian_part(&r),
        })
    }

    /// `Q = 0`, `Cw = C`, `R = D + Dᴴ`.
    pub fn from_model(model: &StateSpaceModel) -> Self {
        GeneralizedWeight {
            q: HermitianMatrix::zeros(model.n()),
            cw: model.c.clone(),
            r: model.r(),
        }
    }

    /// The full `(n+m)×(n+m)` block.
    pub fn block(&self) -> HermitianMatrix {
        let n = self.q.dim();
        let m = self.r.dim();
        let mut w = CMatrix::zeros(n + m, n + m);
        w.view_mut((0, 0), (n, n)).copy_from(self.q.matrix());
        w.view_mut((n, 0), (m, n)).copy_from(&self.cw);
        w.view_mut((0, n), (n, m)).copy_from(&self.cw.adjoint());
        w.view_mut((n, n), (m, m)).copy_from(self.r.matrix());
        hermitian_part(&w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub controllable: bool,
    pub reconstructable: bool,
}

/// Dimension of the Krylov space `span[B, AB, …, A^{n−1}B]`, built with an
/// orthonormal basis so that powers of `A` do not swamp the rank test.
fn krylov_rank(a: &CMatrix, b: &CMatrix) -> usize {
    let n = a.nrows();
    let scale = spectral_norm(a).max(spectral_norm(b)).max(f64::MIN_POSITIVE);
    let tol = (n as f64) * f64::EPSILON * scale;
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    let mut block: Vec<nalgebra::DVector<Complex64>> =
        b.column_iter().map(|c| c.into_owned()).collect();
    let mut first = true;
    while !block.is_empty() && basis.len() < n {
        let mut fresh = Vec::new();
        for v0 in block {
            let mut v = if first { v0 } else { a * v0 };
            let before = v.norm();
            for _ in 0..2 {
                for u in basis.iter().chain(fresh.iter()) {
                    let proj = u.dotc(&v);
                    v -= u * proj;
                }
            }
            let nv = v.norm();
            let floor = if first { tol } else { tol.max(1e-10 * before) };
            if nv > floor {
                fresh.push(v / Complex64::new(nv, 0.0));
            }
        }
        first = false;
        basis.extend(fresh.iter().cloned());
        block = fresh;
    }
    basis.len().min(n)
}

/// Controllability of `(A, B)` and of `(Aᴴ, Cᴴ)`.
pub fn is_minimal(model: &StateSpaceModel) -> Result<MinimalityReport> {
    if model.n() > 100 {
        return Err(Error::InvalidArgument(
            "minimality check supports n <= 100".into(),
        ));
    }
    let n = model.n();
    Ok(MinimalityReport {
        controllable: krylov_rank(&model.a, &model.b) == n,
        reconstructable: krylov_rank(&model.a.adjoint(), &model.c.adjoint()) == n,
    })
}

/// Popov function at an arbitrary complex point:
/// continuous `T(s) + T(−s̄)ᴴ`, discrete `T(z) + T(1/z̄)ᴴ`.
pub fn popov_at(model: &StateSpaceModel, p: Complex64) -> Result<CMatrix> {
    let mirror = match model.domain {
        TimeDomain::Continuous => -p.conj(),
        TimeDomain::Discrete => {
            if p.norm() == 0.0 {
                return Err(Error::Pole { point: p });
            }
            Complex64::new(1.0, 0.0) / p.conj()
        }
    };
    Ok(model.transfer(p)? + model.transfer(mirror)?.adjoint())
}

/// `Φ(iω)` (continuous) or `Φ(e^{iω})` (discrete), Hermitian-projected.
pub fn popov_eval(model: &StateSpaceModel, freq: f64) -> Result<HermitianMatrix> {
    let p = match model.domain {
        TimeDomain::Continuous => Complex64::new(0.0, freq),
        TimeDomain::Discrete => Complex64::from_polar(1.0, freq),
    };
    Ok(hermitian_part(&popov_at(model, p)?))
}

/// `lim_{ω→∞} Φ_c(iω) = D + Dᴴ`; not defined for discrete models.
pub fn popov_at_infinity(model: &StateSpaceModel) -> Option<HermitianMatrix> {
    match model.domain {
        TimeDomain::Continuous => Some(model.r()),
        TimeDomain::Discrete => None,
    }
}

/// Extended system pencil: continuous
/// `[0, A−sI, B; Aᴴ+sI, 0, Cᴴ; Bᴴ, C, R]`, discrete
/// `[0, A−zI, B; zAᴴ−I, 0, Cᴴ; zBᴴ, C, R]`. Eliminating the leading 2n
/// block leaves the Popov function at the same point.
pub fn system_pencil_eval(model: &StateSpaceModel, p: Complex64) -> CMatrix {
    let n = model.n();
    let m = model.m();
    let id = CMatrix::identity(n, n);
    let mut s = CMatrix::zeros(2 * n + m, 2 * n + m);
    s.view_mut((0, n), (n, n)).copy_from(&(&model.a - &id * p));
    s.view_mut((0, 2 * n), (n, m)).copy_from(&model.b);
    s.view_mut((n, 2 * n), (n, m)).copy_from(&model.c.adjoint());
    s.view_mut((2 * n, n), (m, n)).copy_from(&model.c);
    s.view_mut((2 * n, 2 * n), (m, m)).copy_from(model.r().matrix());
    match model.domain {
        TimeDomain::Continuous => {
            s.view_mut((n, 0), (n, n)).copy_from(&(model.a.adjoint() + &id * p));
            s.view_mut((2 * n, 0), (m, n)).copy_from(&model.b.adjoint());
        }
        TimeDomain::Discrete => {
            s.view_mut((n, 0), (n, n)).copy_from(&(model.a.adjoint() * p - &id));
            s.view_mut((2 * n, 0), (m, n)).copy_from(&(model.b.adjoint() * p));
        }
    }
    s
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random minimal strictly passive real model for which `X = I` is strictly
/// feasible. Deterministic in `seed`.
pub fn random_passive_model(n: usize, m: usize, seed: u64, domain: TimeDomain) -> Result<StateSpaceModel> {
    random_model_impl(n, m, seed, domain, false)
}

/// Same construction with complex Gaussian entries.
pub fn random_passive_model_complex(
    n: usize,
    m: usize,
    seed: u64,
    domain: TimeDomain,
) -> Result<StateSpaceModel> {
    random_model_impl(n, m, seed, domain, true)
}

fn random_model_impl(
    n: usize,
    m: usize,
    seed: u64,
    domain: TimeDomain,
    complex: bool,
) -> Result<StateSpaceModel> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be at least 1".into()));
    }
    if m > n {
        return Err(Error::InvalidArgument("m must not exceed n".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rows, cols, rng: &mut ChaCha8Rng| {
        let re = to_complex(&gaussian(rows, cols, rng));
        if complex {
            let im = gaussian(rows, cols, rng).map(|x| Complex64::new(0.0, x));
            re + im
        } else {
            re
        }
    };
    for _ in 0..100 {
        let g = draw(n, n, &mut rng);
        let sym = spectral_norm(&(&g + g.adjoint()));
        let mut a = &g - CMatrix::identity(n, n) * Complex64::new(sym / 2.0 + 1.0, 0.0);
        let b = draw(n, m, &mut rng);
        let c = b.adjoint();
        let mut delta = 1.0;
        if domain == TimeDomain::Discrete {
            // Scaling by the spectral norm (not only the spectral radius)
            // keeps I − AᴴA ≻ 0, which X = I needs.
            let s = spectral_norm(&a) + 1.0;
            a /= Complex64::new(s, 0.0);
        }
        let id_m = CMatrix::identity(m, m);
        let candidate = loop {
            let d = &id_m * Complex64::new(delta, 0.0);
            let model = StateSpaceModel::new(a.clone(), b.clone(), c.clone(), d, domain)?;
            let w = crate::lmi::lmi_matrix(&model, &HermitianMatrix::identity(n), None)?;
            if w.min_eigenvalue() > 0.0 {
                break model;
            }
            delta *= 2.0;
            if delta > 1e12 {
                return Err(Error::InvalidModel("generator failed to reach feasibility".into()));
            }
        };
        let report = is_minimal(&candidate)?;
        if report.controllable && report.reconstructable {
            return Ok(candidate);
        }
    }
    Err(Error::InvalidModel("generator failed to produce a minimal model".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn real(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn construction_rejects_bad_shapes_and_rank() {
        let e = StateSpaceModel::from_real(
            &real(2, 2, &[0.0; 4]),
            &real(2, 1, &[1.0, 0.0]),
            &real(1, 1, &[1.0]),
            &real(1, 1, &[1.0]),
            TimeDomain::Continuous,
        );
        assert!(matches!(e, Err(Error::Shape(_))));
        let e = StateSpaceModel::scalar(-1.0, 0.0, 1.0, 1.0, TimeDomain::Continuous);
        assert!(matches!(e, Err(Error::InvalidModel(_))));
        let e = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 0.0, TimeDomain::Continuous);
        assert!(matches!(e, Err(Error::InvalidModel(_))));
        let e = StateSpaceModel::scalar(f64::NAN, 1.0, 1.0, 1.0, TimeDomain::Continuous);
        assert!(e.is_err());
    }

    #[test]
    fn minimality_examples() {
        let m = StateSpaceModel::scalar(0.0, 1.0, 1.0, 1.0, TimeDomain::Continuous).unwrap();
        assert_eq!(
            is_minimal(&m).unwrap(),
            MinimalityReport { controllable: true, reconstructable: true }
        );
        let m = StateSpaceModel::from_real(
            &real(2, 2, &[1.0, 0.0, 0.0, 2.0]),
            &real(2, 1, &[1.0, 0.0]),
            &real(1, 2, &[1.0, 0.0]),
            &real(1, 1, &[1.0]),
            TimeDomain::Continuous,
        )
        .unwrap();
        assert_eq!(
            is_minimal(&m).unwrap(),
            MinimalityReport { controllable: false, reconstructable: false }
        );
        let m = StateSpaceModel::from_real(
            &real(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            &real(2, 1, &[0.0, 1.0]),
            &real(1, 2, &[1.0, 0.0]),
            &real(1, 1, &[1.0]),
            TimeDomain::Continuous,
        )
        .unwrap();
        assert_eq!(
            is_minimal(&m).unwrap(),
            MinimalityReport { controllable: true, reconstructable: true }
        );
    }

    #[test]
    fn popov_scalar_values() {
        let m = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap();
        let phi = popov_eval(&m, 0.0).unwrap();
        assert!((phi.matrix()[(0, 0)].re - 6.0).abs() < 1e-14);
        // 2d − 2acb/(a² + ω²)
        let phi = popov_eval(&m, 3.0).unwrap();
        assert!((phi.matrix()[(0, 0)].re - (4.0 + 2.0 / 10.0)).abs() < 1e-14);
        assert_eq!(popov_at_infinity(&m).unwrap().matrix()[(0, 0)].re, 4.0);

        let m = StateSpaceModel::scalar(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        let phi = popov_eval(&m, 0.0).unwrap();
        assert!((phi.matrix()[(0, 0)].re - 3.0).abs() < 1e-14);
        assert!(popov_at_infinity(&m).is_none());
    }

    #[test]
    fn popov_reports_poles() {
        let m = StateSpaceModel::scalar(0.0, 1.0, 1.0, 1.0, TimeDomain::Continuous).unwrap();
        assert!(matches!(popov_eval(&m, 0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn pencil_scalar_values() {
        let m = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap();
        let s = system_pencil_eval(&m, c(0.0));
        let expect = to_complex(&real(3, 3, &[0.0, -1.0, 1.0, -1.0, 0.0, 1.0, 1.0, 1.0, 4.0]));
        assert_eq!(s, expect);
        let m = StateSpaceModel::scalar(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        let s = system_pencil_eval(&m, c(1.0));
        let expect = to_complex(&real(3, 3, &[0.0, -0.5, 1.0, -0.5, 0.0, 0.25, 1.0, 0.25, 2.0]));
        assert_eq!(s, expect);
    }

    fn schur_complement(s: &CMatrix, n: usize, m: usize) -> CMatrix {
        let s11 = s.view((0, 0), (2 * n, 2 * n)).into_owned();
        let s12 = s.view((0, 2 * n), (2 * n, m)).into_owned();
        let s21 = s.view((2 * n, 0), (m, 2 * n)).into_owned();
        let s22 = s.view((2 * n, 2 * n), (m, m)).into_owned();
        s22 - s21 * s11.lu().solve(&s12).unwrap()
    }

    #[test]
    fn generator_is_deterministic_and_feasible() {
        for domain in [TimeDomain::Continuous, TimeDomain::Discrete] {
            let a = random_passive_model(6, 2, 11, domain).unwrap();
            let b = random_passive_model(6, 2, 11, domain).unwrap();
            assert_eq!(a, b);
            let r = is_minimal(&a).unwrap();
            assert!(r.controllable && r.reconstructable);
            let w = crate::lmi::lmi_matrix(&a, &HermitianMatrix::identity(6), None).unwrap();
            assert!(w.min_eigenvalue() > 0.0);
        }
        let big = random_passive_model(30, 10, 7, TimeDomain::Continuous).unwrap();
        let w = crate::lmi::lmi_matrix(&big, &HermitianMatrix::identity(30), None).unwrap();
        assert!(w.min_eigenvalue() > 0.0);
    }

    #[test]
    fn weight_rejects_non_hermitian_q() {
        let q = to_complex(&real(2, 2, &[1.0, 2.0, 0.0, 1.0]));
        let r = to_complex(&real(1, 1, &[1.0]));
        let cw = to_complex(&real(1, 2, &[1.0, 0.0]));
        assert!(GeneralizedWeight::new(q, cw, r).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pencil_schur_complement_is_popov(seed in 0u64..10_000, w in -5.0f64..5.0, disc in any::<bool>()) {
            let domain = if disc { TimeDomain::Discrete } else { TimeDomain::Continuous };
            let m = random_passive_model_complex(4, 2, seed, domain).unwrap();
            // Off-axis points exercise the general identity.
            let p = match domain {
                TimeDomain::Continuous => Complex64::new(0.3, w),
                TimeDomain::Discrete => Complex64::from_polar(1.2, w),
            };
            let phi = popov_at(&m, p).unwrap();
            let sc = schur_complement(&system_pencil_eval(&m, p), 4, 2);
            prop_assert!((&sc - &phi).norm() <= 1e-10 * phi.norm());
        }

        #[test]
        fn popov_is_pd_for_generated_models(seed in 0u64..10_000, w in -20.0f64..20.0, disc in any::<bool>()) {
            let domain = if disc { TimeDomain::Discrete } else { TimeDomain::Continuous };
            let m = random_passive_model(5, 2, seed, domain).unwrap();
            let raw = popov_at(&m, match domain {
                TimeDomain::Continuous => Complex64::new(0.0, w),
                TimeDomain::Discrete => Complex64::from_polar(1.0, w),
            }).unwrap();
            prop_assert!((&raw - raw.adjoint()).norm() <= 1e-12 * raw.norm());
            prop_assert!(popov_eval(&m, w).unwrap().min_eigenvalue() > 0.0);
        }
    }
}
