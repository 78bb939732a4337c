//! Univariate real polynomials with ascending coefficient storage.
//!
//! These are the parameter objects of the solution families: every family is
//! specified by one or more polynomials of a single variable (usually `t`).
//! Serialization is the bare coefficient array, e.g. `[1, 0, 2]` for
//! `1 + 2 s^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet3;

/// Default maximum degree accepted when building solution families.
pub const MAX_DEGREE: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly1 {
    /// Coefficients in ascending powers; empty means the zero polynomial.
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        Poly1 { coeffs: coeffs.into() }
    }

    pub fn zero() -> Self {
        Poly1 { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Poly1 { coeffs: vec![c] }
    }

    /// Degree counting trailing zeros as absent; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    /// Rejects degrees above `max` (defaults enforced by family builders).
    pub fn check_degree(&self, max: usize) -> Result<()> {
        let got = self.degree();
        if got > max {
            return Err(Error::DegreeOverflow { got, max });
        }
        Ok(())
    }

    /// Horner evaluation.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// Coefficient-wise derivative.
    pub fn deriv(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::zero();
        }
        Poly1 {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, &c)| n as f64 * c)
                .collect(),
        }
    }

    /// Horner evaluation on a jet argument; exact for polynomial inputs.
    pub fn eval_jet(&self, s: &Jet3) -> Jet3 {
        let mut acc = Jet3::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * *s + c;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_and_deriv() {
        let p = Poly1::new(vec![1.0, -2.0, 0.0, 3.0]); // 1 - 2s + 3s^3
        assert_abs_diff_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0, epsilon = 1e-15);
        let d = p.deriv(); // -2 + 9 s^2
        assert_abs_diff_eq!(d.eval(2.0), -2.0 + 36.0, epsilon = 1e-15);
        assert_eq!(p.degree(), 3);
        assert_eq!(Poly1::zero().degree(), 0);
        assert_eq!(Poly1::zero().deriv(), Poly1::zero());
        assert_eq!(Poly1::constant(5.0).deriv().eval(7.0), 0.0);
    }

    #[test]
    fn jet_eval_matches_derivatives() {
        let p = Poly1::new(vec![0.5, 1.0, -1.5, 0.25]);
        let t = Jet3::var(2, 1.3);
        let j = p.eval_jet(&t);
        assert_abs_diff_eq!(j.value(), p.eval(1.3), epsilon = 1e-14);
        assert_abs_diff_eq!(j.partial(0, 0, 1), p.deriv().eval(1.3), epsilon = 1e-14);
        assert_abs_diff_eq!(
            j.partial(0, 0, 2),
            p.deriv().deriv().eval(1.3),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(j.partial(1, 0, 0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn degree_cap() {
        let p = Poly1::new(vec![0.0; 12]);
        assert!(p.check_degree(8).is_ok()); // all zero: degree 0
        let mut c = vec![0.0; 12];
        c[9] = 1.0;
        assert!(Poly1::new(c).check_degree(8).is_err());
    }

    #[test]
    fn serde_is_bare_array() {
        let p = Poly1::new(vec![1.0, 0.0, 2.0]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[1.0,0.0,2.0]");
        let q: Poly1 = serde_json::from_str("[3, 4]").unwrap();
        assert_eq!(q.coeffs, vec![3.0, 4.0]);
    }
}
