use crate::error::{Error, Result};

/// Problem parameters for the weighted extension energy.
///
/// The Dirichlet weight is `|y|^a` with `a = 1 - 2s`, `s` the fractional
/// order; `lambda_plus`/`lambda_minus` price the positive/negative phase of
/// the trace on the thin space, and `(kappa, alpha)` are the gauge constants
/// of the almost-minimality inequality `J(u) <= (1 + kappa r^alpha) J(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub s: f64,
    pub a: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl ProblemParams {
    /// Validates all bounds and derives `a = 1 - 2s` exactly.
    ///
    /// `lambda_minus = 0` encodes the one-phase reduction.
    pub fn new(
        s: f64,
        lambda_plus: f64,
        lambda_minus: f64,
        kappa: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) || !s.is_finite() {
            return Err(Error::domain("s", format!("{s} not in (0, 1)")));
        }
        if !(lambda_plus > 0.0) || !lambda_plus.is_finite() {
            return Err(Error::domain("lambda_plus", format!("{lambda_plus} not > 0")));
        }
        if !(lambda_minus >= 0.0) || !lambda_minus.is_finite() {
            return Err(Error::domain("lambda_minus", format!("{lambda_minus} not >= 0")));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::domain("kappa", format!("{kappa} not >= 0")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
            return Err(Error::domain("alpha", format!("{alpha} not in (0, 1]")));
        }
        let a = 1.0 - 2.0 * s;
        debug_assert!(a > -1.0 && a < 1.0);
        Ok(ProblemParams { s, a, lambda_plus, lambda_minus, kappa, alpha })
    }

    /// One-phase parameters with unit phase price and default gauge.
    pub fn one_phase(s: f64) -> Result<Self> {
        Self::new(s, 1.0, 0.0, 0.0, 0.5)
    }

    /// Returns a copy with a different positive-phase constant.
    pub fn with_lambda_plus(mut self, lambda_plus: f64) -> Self {
        self.lambda_plus = lambda_plus;
        self
    }

    pub fn with_lambda_minus(mut self, lambda_minus: f64) -> Self {
        self.lambda_minus = lambda_minus;
        self
    }

    pub fn with_gauge(mut self, kappa: f64, alpha: f64) -> Self {
        self.kappa = kappa;
        self.alpha = alpha;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_gives_laplace_weight() {
        let p = ProblemParams::new(0.5, 1.0, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(p.a, 0.0);
    }

    #[test]
    fn a_is_one_minus_two_s() {
        let p = ProblemParams::new(0.75, 1.0, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(p.a, -0.5);
    }

    #[test]
    fn s_out_of_range_names_field() {
        let err = ProblemParams::new(1.2, 1.0, 0.0, 0.0, 0.5).unwrap_err();
        match err {
            Error::Domain { field, .. } => assert_eq!(field, "s"),
            other => panic!("expected domain error, got {other}"),
        }
    }

    #[test]
    fn rejects_each_bad_field() {
        assert!(ProblemParams::new(0.5, 0.0, 0.0, 0.0, 0.5).is_err());
        assert!(ProblemParams::new(0.5, 1.0, -1.0, 0.0, 0.5).is_err());
        assert!(ProblemParams::new(0.5, 1.0, 0.0, -0.1, 0.5).is_err());
        assert!(ProblemParams::new(0.5, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ProblemParams::new(0.5, 1.0, 0.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn total_on_precondition_set() {
        // coarse sweep over the admissible box
        for is in 1..20 {
            let s = is as f64 / 20.0;
            for ia in 1..=10 {
                let alpha = ia as f64 / 10.0;
                let p = ProblemParams::new(s, 2.0, 0.3, 0.1, alpha).unwrap();
                assert!((p.a - (1.0 - 2.0 * s)).abs() == 0.0);
            }
        }
    }
}
