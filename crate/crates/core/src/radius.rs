//! Lower bounds on the X-passivity radius and random perturbation probes.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{spectral_norm, CMatrix, HermitianMatrix, PSD_TOL};
use crate::lmi::lmi_matrix;
use crate::model::{StateSpaceModel, TimeDomain};

/// `λ_min(Y·W(X)·Y)` with the domain's scaling `Y`.
#[derive(Clone, Debug)]
pub struct RadiusBound {
    pub value: f64,
    pub scaling_y: HermitianMatrix,
    pub x_used: HermitianMatrix,
    pub domain: TimeDomain,
    /// True for the discrete bound, which is evaluated at `Δ = 0`.
    pub approximate: bool,
}

/// A structured perturbation `{ΔA, ΔB, ΔC, ΔD}` of a model.
#[derive(Clone, Debug)]
pub struct ModelPerturbation {
    pub da: CMatrix,
    pub db: CMatrix,
    pub dc: CMatrix,
    pub dd: CMatrix,
}

impl ModelPerturbation {
    pub fn zeros(n: usize, m: usize) -> Self {
        ModelPerturbation {
            da: CMatrix::zeros(n, n),
            db: CMatrix::zeros(n, m),
            dc: CMatrix::zeros(m, n),
            dd: CMatrix::zeros(m, m),
        }
    }

    fn scaled(&self, s: f64) -> Self {
        ModelPerturbation {
            da: self.da.scale(s),
            db: self.db.scale(s),
            dc: self.dc.scale(s),
            dd: self.dd.scale(s),
        }
    }

    /// `𝓜 + Δ` without minimality or rank checks.
    pub fn apply(&self, model: &StateSpaceModel) -> Result<StateSpaceModel> {
        StateSpaceModel::unchecked(
            model.a() + &self.da,
            model.b() + &self.db,
            model.c() + &self.dc,
            model.d() + &self.dd,
            model.domain(),
        )
    }
}

fn check_bound_x(w: &HermitianMatrix) -> Result<()> {
    let lmin = w.min_eigenvalue();
    if lmin < -PSD_TOL * w.spectral_norm().max(1.0) {
        return Err(Error::Boundary { lambda_min: lmin });
    }
    Ok(())
}

fn bound_from(
    w: HermitianMatrix,
    y: HermitianMatrix,
    x: &HermitianMatrix,
    domain: TimeDomain,
    approximate: bool,
) -> RadiusBound {
    let value = w.congruence(y.matrix()).min_eigenvalue().max(0.0);
    RadiusBound {
        value,
        scaling_y: y,
        x_used: x.clone(),
        domain,
        approximate,
    }
}

/// `Y_c = diag(I + X², I)^{-1/2}`, value `λ_min(Y_c W_c(X) Y_c)`. Boundary
/// points give a value near 0; clearly infeasible `X` is an error.
pub fn x_passivity_bound_continuous(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<RadiusBound> {
    if model.domain() != TimeDomain::Continuous {
        return Err(Error::InvalidArgument("continuous bound needs a continuous model".into()));
    }
    let w = lmi_matrix(model, x, None)?;
    check_bound_x(&w)?;
    let n = model.n();
    let m = model.m();
    let x2 = x.matrix() * x.matrix();
    let mut d = CMatrix::identity(n + m, n + m);
    let mut top = d.view_mut((0, 0), (n, n));
    top += x2;
    let y = HermitianMatrix::new(d)?.map_spectrum(|v| 1.0 / v.sqrt());
    Ok(bound_from(w, y, x, TimeDomain::Continuous, false))
}

/// `Z_d = −[X(A − I)/2, XB/2]`, `Y_d = (I + Z_dᴴZ_d)^{-1/2}`, value
/// `λ_min(Y_d W_d(X) Y_d)`. Flagged approximate.
pub fn x_passivity_bound_discrete(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<RadiusBound> {
    if model.domain() != TimeDomain::Discrete {
        return Err(Error::InvalidArgument("discrete bound needs a discrete model".into()));
    }
    let w = lmi_matrix(model, x, None)?;
    check_bound_x(&w)?;
    let n = model.n();
    let m = model.m();
    let half = Complex64::new(-0.5, 0.0);
    let mut z = CMatrix::zeros(n, n + m);
    z.view_mut((0, 0), (n, n))
        .copy_from(&(x.matrix() * (model.a() - CMatrix::identity(n, n)) * half));
    z.view_mut((0, n), (n, m)).copy_from(&(x.matrix() * model.b() * half));
    let g = CMatrix::identity(n + m, n + m) + z.adjoint() * &z;
    let y = HermitianMatrix::new(g)?.map_spectrum(|v| 1.0 / v.sqrt());
    Ok(bound_from(w, y, x, TimeDomain::Discrete, true))
}

pub fn x_passivity_bound(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<RadiusBound> {
    match model.domain() {
        TimeDomain::Continuous => x_passivity_bound_continuous(model, x),
        TimeDomain::Discrete => x_passivity_bound_discrete(model, x),
    }
}

/// Spectral norm of `[0, ΔA, ΔB; ΔAᴴ, 0, ΔCᴴ; ΔBᴴ, ΔC, ΔD + ΔDᴴ]`.
pub fn perturbation_norm(p: &ModelPerturbation) -> Result<f64> {
    let n = p.da.nrows();
    let m = p.dd.nrows();
    if p.da.shape() != (n, n) || p.db.shape() != (n, m) || p.dc.shape() != (m, n) || p.dd.shape() != (m, m) {
        return Err(Error::Shape("perturbation blocks have inconsistent shapes".into()));
    }
    let k = 2 * n + m;
    let mut big = CMatrix::zeros(k, k);
    big.view_mut((0, n), (n, n)).copy_from(&p.da);
    big.view_mut((0, 2 * n), (n, m)).copy_from(&p.db);
    big.view_mut((n, 0), (n, n)).copy_from(&p.da.adjoint());
    big.view_mut((n, 2 * n), (n, m)).copy_from(&p.dc.adjoint());
    big.view_mut((2 * n, 0), (m, n)).copy_from(&p.db.adjoint());
    big.view_mut((2 * n, n), (m, n)).copy_from(&p.dc);
    big.view_mut((2 * n, 2 * n), (m, m)).copy_from(&(&p.dd + p.dd.adjoint()));
    Ok(spectral_norm(&big))
}

/// Outcome of `probe_perturbations`.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub samples: usize,
    pub margin: f64,
    /// Perturbation norm every sample was scaled to.
    pub target_norm: f64,
    /// Samples with `λ_min(W(X, 𝓜 + Δ)) > 0`.
    pub passed: usize,
    pub min_lambda: f64,
    pub lambdas: Vec<f64>,
}

impl ProbeReport {
    pub fn pass_rate(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.passed as f64 / self.samples as f64
        }
    }
}

fn gaussian(rows: usize, cols: usize, complex: bool, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = if complex { StandardNormal.sample(rng) } else { 0.0 };
        Complex64::new(re, im)
    })
}

/// Random structured perturbation with entrywise Gaussian blocks.
pub fn random_perturbation(n: usize, m: usize, complex: bool, rng: &mut ChaCha8Rng) -> ModelPerturbation {
    ModelPerturbation {
        da: gaussian(n, n, complex, rng),
        db: gaussian(n, m, complex, rng),
        dc: gaussian(m, n, complex, rng),
        dd: gaussian(m, m, complex, rng),
    }
}

/// Draws `samples` Gaussian directions, scales each to perturbation norm
/// `margin·bound.value` and records `λ_min(W(X, 𝓜 + Δ))`.
pub fn probe_perturbations(
    model: &StateSpaceModel,
    bound: &RadiusBound,
    samples: usize,
    margin: f64,
    seed: u64,
) -> Result<ProbeReport> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidArgument("margin must be a non-negative number".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = margin * bound.value;
    let complex = !model.is_real() || !bound.x_used.is_real();
    let mut lambdas = Vec::with_capacity(samples);
    for _ in 0..samples {
        let dir = random_perturbation(model.n(), model.m(), complex, &mut rng);
        let norm = perturbation_norm(&dir)?;
        let delta = if norm > 0.0 { dir.scaled(target / norm) } else { dir };
        let perturbed = delta.apply(model)?;
        lambdas.push(lmi_matrix(&perturbed, &bound.x_used, None)?.min_eigenvalue());
    }
    let passed = lambdas.iter().filter(|l| **l > 0.0).count();
    let min_lambda = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ProbeReport {
        samples,
        margin,
        target_norm: target,
        passed,
        min_lambda,
        lambdas,
    })
}
