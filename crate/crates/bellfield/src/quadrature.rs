//! Adaptive Simpson integration with an explicit evaluation budget.
//!
//! The perturbative momentum integrals are smooth with Gaussian envelopes,
//! so adaptive Simpson with the usual Richardson acceptance test converges
//! fast; the budget turns a silently inaccurate result into a hard error
//! carrying the best estimate so far.

use serde::Serialize;

use crate::error::{Error, Result};

/// Integration controls.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Quadrature {
    /// Requested relative accuracy, measured against the integral scale.
    pub rel_tol: f64,
    /// Hard cap on integrand evaluations.
    pub max_evals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_evals: 200_000,
        }
    }
}

impl Quadrature {
    pub fn validated(self) -> Result<Self> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_evals < 33 {
            return Err(Error::InvalidParameter(format!(
                "max_evals must be at least 33, got {}",
                self.max_evals
            )));
        }
        Ok(self)
    }
}

/// A converged integral.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Sum of the per-interval Richardson error estimates.
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Worker<'a, F> {
    f: &'a F,
    evals: usize,
    budget: usize,
    error_estimate: f64,
}

impl<F: Fn(f64) -> f64> Worker<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        if self.evals >= self.budget {
            return Err(Error::Numerical("evaluation budget hit".into()));
        }
        self.evals += 1;
        let y = (self.f)(x);
        if !y.is_finite() {
            return Err(Error::Numerical(format!(
                "integrand returned {y} at x = {x}"
            )));
        }
        Ok(y)
    }

    /// Simpson on [a, b] with midpoint m, refined until the Richardson test
    /// passes or the depth floor is reached.
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: usize,
    ) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let refined = left + right;
        let correction = (refined - whole) / 15.0;
        if depth == 0 || correction.abs() <= eps {
            self.error_estimate += correction.abs();
            return Ok(refined + correction);
        }
        let l = self.refine(a, lm, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
        let r = self.refine(m, rm, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
        Ok(l + r)
    }
}

/// ∫_a^b f(x) dx by adaptive Simpson. A pilot pass over 16 panels sets the
/// absolute tolerance from `rel_tol` and the observed integral scale, so
/// integrals that cancel to zero still terminate.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &Quadrature,
) -> Result<QuadratureResult> {
    let opts = opts.validated()?;
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParameter(format!(
            "integration interval [{a}, {b}] must be finite and increasing"
        )));
    }
    let mut w = Worker {
        f: &f,
        evals: 0,
        budget: opts.max_evals,
        error_estimate: 0.0,
    };

    // Pilot: 16-panel composite Simpson fixes the scale and seeds the
    // midpoint values of the top-level panels.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let mut nodes = [0.0_f64; 2 * PANELS + 1];
    for (k, node) in nodes.iter_mut().enumerate() {
        *node = w.eval(a + 0.5 * h * k as f64)?;
    }
    let mut pilot = 0.0;
    let mut peak: f64 = 0.0;
    for k in 0..PANELS {
        pilot += h / 6.0 * (nodes[2 * k] + 4.0 * nodes[2 * k + 1] + nodes[2 * k + 2]);
    }
    for y in nodes {
        peak = peak.max(y.abs());
    }
    let scale = pilot.abs().max(peak * (b - a)).max(f64::MIN_POSITIVE);
    let eps = opts.rel_tol * scale / PANELS as f64;

    let mut value = 0.0;
    for k in 0..PANELS {
        let (xa, xb) = (a + h * k as f64, a + h * (k + 1) as f64);
        let xm = 0.5 * (xa + xb);
        let (fa, fm, fb) = (nodes[2 * k], nodes[2 * k + 1], nodes[2 * k + 2]);
        let whole = h / 6.0 * (fa + 4.0 * fm + fb);
        value += match w.refine(xa, xm, xb, fa, fm, fb, whole, eps, 48) {
            Ok(v) => v,
            Err(Error::Numerical(msg)) if msg.contains("budget") => {
                return Err(Error::QuadratureBudget {
                    rel_tol: opts.rel_tol,
                    budget: opts.max_evals,
                    estimate: pilot,
                });
            }
            Err(e) => return Err(e),
        };
    }

    Ok(QuadratureResult {
        value,
        error_estimate: w.error_estimate,
        evaluations: w.evals,
    })
}

/// Radial support cut for an integrand with Gaussian envelope
/// e^{−(p−center)²/(2 width²)}: everything outside [lo, hi] is below the
/// 1e−17 level even with polynomial prefactors of modest degree.
pub fn gaussian_support_cut(center: f64, width: f64) -> Result<(f64, f64)> {
    if !(width.is_finite() && width > 0.0) || !center.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian cut needs finite center and positive width, got ({center}, {width})"
        )));
    }
    let lo = (center - 9.0 * width - 2.0).max(0.0);
    let hi = center + 9.0 * width + 2.0;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact_to_tolerance() {
        let r = integrate(|x| x * x, 0.0, 1.0, &Quadrature::default()).unwrap();
        assert_relative_eq!(r.value, 1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn sine_lobe_and_full_period() {
        let opts = Quadrature::default();
        let lobe = integrate(f64::sin, 0.0, std::f64::consts::PI, &opts).unwrap();
        assert_relative_eq!(lobe.value, 2.0, epsilon = 1e-12);
        // The full period cancels to zero; the scale logic must still give a
        // finite tolerance.
        let period = integrate(f64::sin, 0.0, 2.0 * std::f64::consts::PI, &opts).unwrap();
        assert!(period.value.abs() < 1e-12);
    }

    #[test]
    fn normal_density_integrates_to_one() {
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let r = integrate(
            |x| norm * (-0.5 * x * x).exp(),
            -9.0,
            9.0,
            &Quadrature {
                rel_tol: 1e-12,
                max_evals: 500_000,
            },
        )
        .unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        assert!(r.error_estimate < 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_the_estimate() {
        let opts = Quadrature {
            rel_tol: 1e-14,
            max_evals: 40,
        };
        let err = integrate(|x| (50.0 * x).sin().abs(), 0.0, 1.0, &opts).unwrap_err();
        match err {
            Error::QuadratureBudget {
                budget, estimate, ..
            } => {
                assert_eq!(budget, 40);
                assert!(estimate.is_finite());
            }
            other => panic!("expected budget error, got {other}"),
        }
    }

    #[test]
    fn rejects_bad_intervals_and_tolerances() {
        let opts = Quadrature::default();
        assert!(integrate(|x| x, 1.0, 0.0, &opts).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, &opts).is_err());
        let bad = Quadrature {
            rel_tol: 0.0,
            max_evals: 100,
        };
        assert!(integrate(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let opts = Quadrature::default();
        assert!(integrate(|x| 1.0 / x, -1.0, 1.0, &opts).is_err());
    }

    #[test]
    fn support_cut_covers_the_envelope() {
        let (lo, hi) = gaussian_support_cut(0.0, 1.0).unwrap();
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 11.0);
        let (lo, hi) = gaussian_support_cut(3.0, 0.5).unwrap();
        assert!(lo < 3.0 && hi > 3.0);
        assert!(gaussian_support_cut(0.0, 0.0).is_err());
    }
}
