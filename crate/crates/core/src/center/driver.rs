use std::time::Instant;

use serde::Serialize;

use super::init::initialize;
use super::newton::{ascent_from_frame, cap_to_interior, interior, newton_from_frame, Frame};
use super::{CenterOptions, CenterResult, Damping, IterationRecord, Method};
use crate::error::{Error, Result};
use crate::hermitian::{spectral_norm, HermitianMatrix};
use crate::lmi::{eval_feasible, eval_w, gradient_from};
use crate::model::{GeneralizedWeight, StateSpaceModel, TimeDomain};
use crate::schur::eigenvalues;

/// Closed-loop spectrum test at a candidate center.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumReport {
    pub domain: TimeDomain,
    /// Continuous: `max |Re λ(A_F)|`. Discrete: `ρ(A_F)`.
    pub metric: f64,
    /// Continuous: `1e-6·‖A_F‖₂`. Discrete: `1 − 1e-10`.
    pub threshold: f64,
    /// Residual of the Lyapunov/Stein form of stationarity.
    pub stationarity: f64,
    pub pass: bool,
}

/// Residuals of the coupled stationarity system at `X`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StationarityResiduals {
    /// `‖R0·F − (C − BᴴX·)‖_F`.
    pub f: f64,
    /// `‖P − (Riccati form)‖_F`.
    pub x: f64,
    /// Continuous `‖PA_F + A_FᴴP‖_F`, discrete `‖A_FP⁻¹A_Fᴴ − P⁻¹ + BR0⁻¹Bᴴ‖_F`.
    pub p: f64,
    pub x_norm: f64,
}

/// Residuals of the stationarity conditions for the plain model weight.
pub fn stationarity_systems(model: &StateSpaceModel, x: &HermitianMatrix) -> Result<StationarityResiduals> {
    let ev = eval_feasible(model, x, None)?;
    let (a, b, c) = (model.a(), model.b(), model.c());
    let xm = x.matrix();
    let r0 = ev.r0.matrix();
    let f = &ev.f;
    let p = ev.p.matrix();
    let af = &ev.a_f;
    let frr = f.adjoint() * r0 * f;
    let (rf, rx, rp) = match model.domain() {
        TimeDomain::Continuous => {
            let rf = r0 * f - (c - b.adjoint() * xm);
            let rx = p - (-(xm * a) - a.adjoint() * xm - frr);
            let rp = p * af + af.adjoint() * p;
            (rf, rx, rp)
        }
        TimeDomain::Discrete => {
            let rf = r0 * f - (c - b.adjoint() * xm * a);
            let rx = p - (xm - a.adjoint() * xm * a - frr);
            let pi = ev.p.inverse()?;
            let r0i = ev.r0.inverse()?;
            let rp = af * pi.matrix() * af.adjoint() - pi.matrix() + b * r0i.matrix() * b.adjoint();
            (rf, rx, rp)
        }
    };
    Ok(StationarityResiduals {
        f: rf.norm(),
        x: rx.norm(),
        p: rp.norm(),
        x_norm: x.spectral_norm(),
    })
}

/// Checks that `A_F` at `X` has its spectrum on the imaginary axis
/// (continuous) or strictly inside the unit disk (discrete). Diagnostic only:
/// boundary points such as Riccati solutions are accepted, with an infinite
/// discrete stationarity residual when `P` is singular.
pub fn verify_center_spectrum(
    model: &StateSpaceModel,
    x: &HermitianMatrix,
    weight: Option<&GeneralizedWeight>,
) -> Result<SpectrumReport> {
    let ev = eval_w(model, x, weight)?;
    let eigs = eigenvalues(&ev.a_f)?;
    let (metric, threshold, stationarity) = match model.domain() {
        TimeDomain::Continuous => {
            let p = ev.p.matrix();
            let metric = eigs.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
            let pc = (p * &ev.a_f + ev.a_f.adjoint() * p).norm();
            (metric, 1e-6 * spectral_norm(&ev.a_f), pc)
        }
        TimeDomain::Discrete => {
            let metric = eigs.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            let pd = match (ev.p.inverse(), ev.r0.inverse()) {
                (Ok(pi), Ok(ri)) => {
                    let b = model.b();
                    (&ev.a_f * pi.matrix() * ev.a_f.adjoint() - pi.matrix() + b * ri.matrix() * b.adjoint()).norm()
                }
                _ => f64::INFINITY,
            };
            (metric, 1.0 - 1e-10, pd)
        }
    };
    let pass = match model.domain() {
        TimeDomain::Continuous => metric <= threshold,
        TimeDomain::Discrete => metric < threshold,
    };
    Ok(SpectrumReport {
        domain: model.domain(),
        metric,
        threshold,
        stationarity,
        pass,
    })
}

/// Analytic center with default options and the plain model weight.
pub fn compute_analytic_center(model: &StateSpaceModel) -> Result<CenterResult> {
    compute_analytic_center_with(model, None, &CenterOptions::default())
}

/// Maximizes `ln det W(X)` by damped Newton steps or steepest ascent.
/// Exhausting `max_iter` returns the last iterate with `converged = false`.
pub fn compute_analytic_center_with(
    model: &StateSpaceModel,
    weight: Option<&GeneralizedWeight>,
    options: &CenterOptions,
) -> Result<CenterResult> {
    options.validate()?;
    let clock = Instant::now();
    let (mut x, init) = initialize(model, weight, options)?;
    let mut records = Vec::new();
    let mut alpha_in = 0.0;
    let mut converged = false;
    let mut k = 0;
    let mut barrier = f64::NAN;
    loop {
        let frame = Frame::new(model, &x, weight)?;
        if k == 0 {
            barrier = -frame.ev.ln_det();
        }
        let g = gradient_from(model, &frame.ev)?;
        let residual = g.norm_fro();
        let (decrement, dx, alpha0) = match options.method {
            Method::Newton => {
                let step = newton_from_frame(&frame)?;
                let lam = step.decrement;
                let alpha = if lam >= options.damping_threshold {
                    match options.damping {
                        Damping::Decrement => 1.0 / (1.0 + lam),
                        Damping::RootDecrement => 1.0 / (1.0 + lam.sqrt()),
                    }
                } else {
                    1.0
                };
                (lam, step.delta_x, alpha)
            }
            Method::Ascent => {
                let step = ascent_from_frame(model, &x, weight, &frame)?;
                (step.ray_decrement, step.delta_x, step.alpha)
            }
        };
        records.push(IterationRecord {
            iter: k,
            barrier,
            decrement,
            residual,
            alpha: alpha_in,
            wallclock_seconds: clock.elapsed().as_secs_f64(),
        });
        if !decrement.is_finite() || !residual.is_finite() {
            return Err(Error::NoConvergence);
        }
        // A converged point must also satisfy the Lyapunov form
        // `PA_F + A_FᴴP = 0`, which `‖G‖` alone does not control when `P` is
        // large. Forming it as `P·G·P` would amplify rounding by `κ(P)`.
        let p_form = match model.domain() {
            TimeDomain::Continuous => {
                let p = frame.ev.p.matrix();
                (p * &frame.ev.a_f + frame.ev.a_f.adjoint() * p).norm()
            }
            TimeDomain::Discrete => 0.0,
        };
        let tol = options.tol_residual * (1.0 + x.spectral_norm());
        if residual.max(p_form) <= tol && decrement <= options.tol_decrement {
            converged = true;
            break;
        }
        if k >= options.max_iter {
            break;
        }
        let mu = frame.relative_spectrum(model, &dx)?;
        let Some((x_new, alpha, change)) = accept_step(model, weight, &x, &dx, &mu, alpha0) else {
            break;
        };
        barrier += change;
        x = x_new;
        alpha_in = alpha;
        k += 1;
    }
    let ev = eval_feasible(model, &x, weight)?;
    let closed_loop_eigs = eigenvalues(&ev.a_f)?;
    let spectrum = verify_center_spectrum(model, &x, weight)?;
    Ok(CenterResult {
        barrier_value: -ev.ln_det(),
        x_center: x,
        iterations: records,
        closed_loop_eigs,
        converged,
        init,
        spectrum,
    })
}

/// Caps `alpha` to the interior, then halves until the barrier strictly
/// decreases. The change is `−Σ ln(1 + αμ_i)` with `μ` from
/// `Frame::relative_spectrum`, which stays accurate below the rounding level
/// of the barrier itself. `None` once the step no longer moves `X` in
/// floating point.
fn accept_step(
    model: &StateSpaceModel,
    weight: Option<&GeneralizedWeight>,
    x: &HermitianMatrix,
    dx: &HermitianMatrix,
    mu: &[f64],
    alpha0: f64,
) -> Option<(HermitianMatrix, f64, f64)> {
    let mut alpha = cap_to_interior(model, x, dx, weight, alpha0);
    let floor = f64::EPSILON * x.norm_fro().max(f64::MIN_POSITIVE);
    let step_norm = dx.norm_fro();
    for _ in 0..60 {
        if alpha * step_norm <= floor {
            return None;
        }
        if mu.iter().all(|v| 1.0 + alpha * v > 0.0) {
            let change = -mu.iter().map(|v| (alpha * v).ln_1p()).sum::<f64>();
            if change < 0.0 {
                let cand = x.axpy(alpha, dx);
                if interior(model, &cand, weight).is_some() {
                    return Some((cand, alpha, change));
                }
            }
        }
        alpha *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::{scalar_center_reference, InitStrategy};
    use crate::model::random_passive_model;

    #[test]
    fn scalar_continuous_center() {
        let m = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap();
        let r = compute_analytic_center(&m).unwrap();
        assert!(r.converged);
        assert!((r.x_center.matrix()[(0, 0)].re - 5.0).abs() < 1e-8);
        assert!(((-r.barrier_value).exp() - 24.0).abs() < 1e-8 * 24.0);
        assert!(r.spectrum.pass);
    }

    #[test]
    fn scalar_discrete_center() {
        let m = StateSpaceModel::scalar(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        let r = compute_analytic_center(&m).unwrap();
        let (xr, det) = scalar_center_reference(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        assert!(r.converged);
        assert!((r.x_center.matrix()[(0, 0)].re - xr).abs() < 1e-8);
        assert!(((-r.barrier_value).exp() - det).abs() < 1e-8 * det);
    }

    #[test]
    fn riccati_solutions_are_not_central() {
        let m = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap();
        let pair = crate::riccati::solve_extremal(&m).unwrap();
        for x in [&pair.x_min, &pair.x_max] {
            let rep = verify_center_spectrum(&m, x, None).unwrap();
            assert!(!rep.pass && rep.metric > 1.0);
        }
        let d = StateSpaceModel::scalar(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        let pair = crate::riccati::solve_extremal(&d).unwrap();
        let rep = verify_center_spectrum(&d, &pair.x_min, None).unwrap();
        assert!(rep.metric < 1.0);
    }

    #[test]
    fn scalar_closed_loop_at_center() {
        // F = (c − b·x)/(2d) = −1 at x = 5, so a − bF = 0.
        let m = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap();
        let rep = verify_center_spectrum(&m, &HermitianMatrix::from_diagonal(&[5.0]), None).unwrap();
        assert!(rep.pass && rep.metric < 1e-14 && rep.stationarity < 1e-13);
        // Discrete: R0 = 2 − x, F = (c − b·x·a)/R0, |a − bF| < 1.
        let d = StateSpaceModel::scalar(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        let rep = verify_center_spectrum(&d, &HermitianMatrix::from_diagonal(&[0.875]), None).unwrap();
        let f: f64 = (0.25 - 0.875 * 0.5) / (2.0 - 0.875);
        assert!(rep.pass && (rep.metric - (0.5 - f).abs()).abs() < 1e-14);
    }

    #[test]
    fn iteration_budget_respected() {
        let m = StateSpaceModel::scalar(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap();
        let opts = CenterOptions {
            max_iter: 1,
            init: InitStrategy::Given(HermitianMatrix::from_diagonal(&[0.5])),
            ..CenterOptions::default()
        };
        let r = compute_analytic_center_with(&m, None, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations.len(), 2);
    }

    #[test]
    fn newton_and_ascent_agree() {
        // Square-input models keep the feasible set well conditioned, which
        // plain gradient ascent needs to finish within the budget.
        for (disc, seed) in [(false, 1u64), (true, 0)] {
            let domain = if disc { TimeDomain::Discrete } else { TimeDomain::Continuous };
            let m = random_passive_model(2, 2, seed, domain).unwrap();
            let n = compute_analytic_center(&m).unwrap();
            let opts = CenterOptions {
                method: Method::Ascent,
                max_iter: 5000,
                ..CenterOptions::default()
            };
            let a = compute_analytic_center_with(&m, None, &opts).unwrap();
            let diff = n.x_center.sub(&a.x_center).norm_fro();
            assert!(diff <= 1e-6 * n.x_center.norm_fro(), "{disc}: {diff}");
            for w in a.iterations.windows(2) {
                assert!(w[1].barrier <= w[0].barrier);
            }
        }
    }

    #[test]
    fn random_centers_are_stationary() {
        for (seed, disc) in [(1u64, false), (2, true), (3, false), (4, true)] {
            let domain = if disc { TimeDomain::Discrete } else { TimeDomain::Continuous };
            let m = random_passive_model(6, 2, seed, domain).unwrap();
            let r = compute_analytic_center(&m).unwrap();
            assert!(r.converged && r.spectrum.pass, "{seed}");
            let s = stationarity_systems(&m, &r.x_center).unwrap();
            let tol = 1e-8 * (1.0 + s.x_norm);
            assert!(s.f <= tol && s.x <= tol && s.p <= tol, "{seed}: {s:?}");
        }
    }
}
