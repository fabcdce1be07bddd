use crate::error::{Error, Result};
use crate::model::TimeDomain;

/// Closed-form analytic center `x_a` and `det W(x_a)` of a scalar model.
pub fn scalar_center_reference(a: f64, b: f64, c: f64, d: f64, domain: TimeDomain) -> Result<(f64, f64)> {
    if b == 0.0 {
        return Err(Error::InvalidScalarModel("b must be nonzero".into()));
    }
    let b2 = b * b;
    match domain {
        TimeDomain::Continuous => {
            if !(a < 0.0 && d > 0.0 && (d * a - c * b) / a > 0.0) {
                return Err(Error::InvalidScalarModel(
                    "continuous strict passivity needs a < 0, d > 0 and (da - cb)/a > 0".into(),
                ));
            }
            let x = c / b - 2.0 * a * d / b2;
            let det = 4.0 * (a * d / b2) * (a * d - b * c);
            Ok((x, det))
        }
        TimeDomain::Discrete => {
            let ok = a * a < 1.0
                && 2.0 * d + 2.0 * b * c / (1.0 - a) > 0.0
                && 2.0 * d - 2.0 * b * c / (1.0 + a) > 0.0;
            if !ok {
                return Err(Error::InvalidScalarModel(
                    "discrete strict passivity needs a² < 1 and a positive Popov function on the unit circle"
                        .into(),
                ));
            }
            let x = (d - a * a * d + a * b * c) / b2;
            let det = (a * a - 1.0) * (b * c - (a - 1.0) * d) * (b * c - (a + 1.0) * d) / b2;
            Ok((x, det))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::HermitianMatrix;
    use crate::lmi::{eval_w, stationarity_residual};
    use crate::model::StateSpaceModel;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let (x, det) = scalar_center_reference(-1.0, 1.0, 1.0, 2.0, TimeDomain::Continuous).unwrap();
        assert_eq!((x, det), (5.0, 24.0));
        let (x, det) = scalar_center_reference(0.5, 1.0, 0.25, 1.0, TimeDomain::Discrete).unwrap();
        assert!((x - 0.875).abs() < 1e-15 && (det - 0.703125).abs() < 1e-15);
        let (x, det) = scalar_center_reference(-1.0, 1.0, 0.0, 1.0, TimeDomain::Continuous).unwrap();
        assert_eq!((x, det), (2.0, 4.0));
    }

    #[test]
    fn rejects_non_passive_parameters() {
        for (a, b, c, d) in [(1.0, 1.0, 1.0, 1.0), (-1.0, 1.0, 1.0, -1.0), (-1.0, 0.0, 1.0, 1.0), (-1.0, 1.0, -3.0, 0.5)] {
            assert!(scalar_center_reference(a, b, c, d, TimeDomain::Continuous).is_err());
        }
        assert!(scalar_center_reference(1.5, 1.0, 0.1, 1.0, TimeDomain::Discrete).is_err());
        assert!(scalar_center_reference(0.5, 1.0, -2.0, 1.0, TimeDomain::Discrete).is_err());
    }

    proptest! {
        // The closed forms must agree with the LMI itself: stationary and
        // with the stated determinant.
        #[test]
        fn closed_forms_match_lmi(a in -3.0f64..-0.1, b in 0.2f64..3.0, c in -2.0f64..2.0, d in 0.1f64..3.0, disc in any::<bool>()) {
            let domain = if disc { TimeDomain::Discrete } else { TimeDomain::Continuous };
            let a = if disc { a / 3.5 } else { a };
            let Ok((x, det)) = scalar_center_reference(a, b, c, d, domain) else { return Ok(()); };
            let m = StateSpaceModel::scalar(a, b, c, d, domain).unwrap();
            let xm = HermitianMatrix::from_diagonal(&[x]);
            let ev = eval_w(&m, &xm, None).unwrap();
            prop_assert!(ev.feasible_strict);
            prop_assert!((ev.ln_det().exp() - det).abs() <= 1e-10 * det.abs());
            prop_assert!(stationarity_residual(&m, &xm, None).unwrap() <= 1e-9 * (1.0 + x.abs()));
        }
    }
}
