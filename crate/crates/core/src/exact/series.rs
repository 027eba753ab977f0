//! Truncated formal power series in one variable over `ExactPoly` coefficients.
//!
//! A series of order N stores exactly N coefficients (powers 0..N-1); every
//! operation truncates to the minimum order of its operands, so no reported
//! coefficient is ever contaminated by missing tail terms.

use std::fmt;

use num_traits::One;

use super::poly::{ExactPoly, Var};
use super::rat::Rat;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSeries {
    var: Var,
    coeffs: Vec<ExactPoly>,
}

impl ExactSeries {
    /// Zero series of the given truncation order (exclusive).
    pub fn zero(var: Var, order: usize) -> Self {
        ExactSeries {
            var,
            coeffs: vec![ExactPoly::zero(); order],
        }
    }

    pub fn one(var: Var, order: usize) -> Self {
        let mut s = ExactSeries::zero(var, order);
        if order > 0 {
            s.coeffs[0] = ExactPoly::one();
        }
        s
    }

    /// Build from explicit coefficients. The coefficients must not involve
    /// the series variable.
    pub fn from_coeffs(var: Var, coeffs: Vec<ExactPoly>) -> Self {
        for c in &coeffs {
            assert!(
                c.is_free_of(var),
                "series coefficient involves the series variable {}",
                var.name()
            );
        }
        ExactSeries { var, coeffs }
    }

    /// Build from a closure giving the k-th coefficient.
    pub fn from_fn(var: Var, order: usize, f: impl Fn(usize) -> ExactPoly) -> Self {
        ExactSeries::from_coeffs(var, (0..order).map(f).collect())
    }

    /// Expand a polynomial in `var` as a series of the given order.
    /// Degrees at or beyond the order are an error (information loss).
    pub fn from_poly(var: Var, order: usize, p: &ExactPoly) -> Result<Self> {
        if (p.degree_in(var) as usize) >= order {
            return Err(Error::WindowOverflow(format!(
                "polynomial of degree {} in {} does not fit in series order {}",
                p.degree_in(var),
                var.name(),
                order
            )));
        }
        Ok(ExactSeries::from_fn(var, order, |k| {
            p.coeff_of(var, k as u16)
        }))
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of var^k. Panics beyond the truncation order: the caller
    /// is asking for information the series does not carry.
    pub fn coeff(&self, k: usize) -> &ExactPoly {
        assert!(
            k < self.order(),
            "coefficient {} requested at or beyond truncation order {}",
            k,
            self.order()
        );
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[ExactPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> ExactSeries {
        let order = order.min(self.order());
        ExactSeries {
            var: self.var,
            coeffs: self.coeffs[..order].to_vec(),
        }
    }

    fn common_order(&self, other: &ExactSeries) -> usize {
        assert_eq!(self.var, other.var, "series variable mismatch");
        self.order().min(other.order())
    }

    pub fn add(&self, other: &ExactSeries) -> ExactSeries {
        let n = self.common_order(other);
        ExactSeries {
            var: self.var,
            coeffs: (0..n).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect(),
        }
    }

    pub fn sub(&self, other: &ExactSeries) -> ExactSeries {
        let n = self.common_order(other);
        ExactSeries {
            var: self.var,
            coeffs: (0..n).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect(),
        }
    }

    pub fn neg(&self) -> ExactSeries {
        ExactSeries {
            var: self.var,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &ExactSeries) -> ExactSeries {
        let n = self.common_order(other);
        let mut coeffs = vec![ExactPoly::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        ExactSeries {
            var: self.var,
            coeffs,
        }
    }

    pub fn scale_poly(&self, c: &ExactPoly) -> ExactSeries {
        ExactSeries {
            var: self.var,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> ExactSeries {
        ExactSeries {
            var: self.var,
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// Multiply by var^k (shifting coefficients up, dropping the tail).
    pub fn shift_up(&self, k: usize) -> ExactSeries {
        let n = self.order();
        let mut coeffs = vec![ExactPoly::zero(); n];
        for i in 0..n.saturating_sub(k) {
            coeffs[i + k] = self.coeffs[i].clone();
        }
        ExactSeries {
            var: self.var,
            coeffs,
        }
    }

    /// Multiplicative inverse; requires the constant term to be an invertible
    /// rational constant.
    pub fn reciprocal(&self) -> Result<ExactSeries> {
        let n = self.order();
        if n == 0 {
            return Ok(self.clone());
        }
        let c0 = self.coeffs[0]
            .as_constant()
            .filter(|c| !num_traits::Zero::is_zero(c))
            .ok_or(Error::SeriesNotInvertible)?;
        let inv0 = Rat::one() / c0;
        let mut coeffs = vec![ExactPoly::zero(); n];
        coeffs[0] = ExactPoly::constant(inv0.clone());
        for k in 1..n {
            // b_k = -inv0 * sum_{j=1..=k} a_j b_{k-j}
            let mut s = ExactPoly::zero();
            for j in 1..=k {
                if self.coeffs[j].is_zero() {
                    continue;
                }
                s += &self.coeffs[j] * &coeffs[k - j];
            }
            coeffs[k] = s.scale(&-inv0.clone());
        }
        Ok(ExactSeries {
            var: self.var,
            coeffs,
        })
    }

    /// Composition self(inner); inner must have zero constant term.
    pub fn compose(&self, inner: &ExactSeries) -> Result<ExactSeries> {
        assert_eq!(self.var, inner.var, "series variable mismatch");
        let n = self.common_order(inner);
        if n > 0 && !inner.coeffs[0].is_zero() {
            return Err(Error::SeriesCompose);
        }
        // Horner from the top coefficient down.
        let inner = inner.truncate(n);
        let mut acc = ExactSeries::zero(self.var, n);
        for k in (0..n).rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] += &self.coeffs[k];
        }
        Ok(acc)
    }

    /// Substitute a variable inside every coefficient.
    pub fn substitute_coeffs(&self, v: Var, value: &ExactPoly) -> ExactSeries {
        assert!(v != self.var);
        ExactSeries {
            var: self.var,
            coeffs: self.coeffs.iter().map(|c| c.substitute(v, value)).collect(),
        }
    }

    /// Collapse to a polynomial (the truncation becomes implicit).
    pub fn to_poly(&self) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            out += c.mul_var_pow(self.var, k as u16);
        }
        out
    }
}

impl fmt::Display for ExactSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let body = if c.num_terms() > 1 {
                format!("({})", c)
            } else {
                format!("{}", c)
            };
            if k == 0 {
                parts.push(body);
            } else if k == 1 {
                parts.push(format!("{}*{}", body, self.var.name()));
            } else {
                parts.push(format!("{}*{}^{}", body, self.var.name(), k));
            }
        }
        if parts.is_empty() {
            parts.push("0".to_string());
        }
        write!(f, "{} + O({}^{})", parts.join(" + "), self.var.name(), self.order())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::{rat, rint};

    fn series_from_rats(var: Var, rats: &[Rat]) -> ExactSeries {
        ExactSeries::from_coeffs(
            var,
            rats.iter().map(|r| ExactPoly::constant(r.clone())).collect(),
        )
    }

    #[test]
    fn product_truncates_to_min_order() {
        // (1+z)(1-z) = 1 - z^2
        let a = series_from_rats(Var::Z, &[rint(1), rint(1), rint(0), rint(0)]);
        let b = series_from_rats(Var::Z, &[rint(1), rint(-1), rint(0), rint(0)]);
        let p = a.mul(&b);
        assert_eq!(p.coeff(0), &ExactPoly::one());
        assert_eq!(p.coeff(1), &ExactPoly::zero());
        assert_eq!(p.coeff(2), &ExactPoly::constant(rint(-1)));
        assert_eq!(p.coeff(3), &ExactPoly::zero());
        assert_eq!(a.truncate(2).mul(&b).order(), 2);
    }

    #[test]
    fn reciprocal_of_one_is_one() {
        let one = ExactSeries::one(Var::Z, 6);
        assert_eq!(one.reciprocal().unwrap(), one);
    }

    #[test]
    fn reciprocal_of_s_series() {
        // S(z) = 1 + z^2/24 + z^4/1920 + z^6/322560: reciprocal is the
        // beta generating series 1 - z^2/24 + 7 z^4/5760 - 31 z^6/967680.
        let s = series_from_rats(
            Var::Z,
            &[
                rint(1),
                rint(0),
                rat(1, 24),
                rint(0),
                rat(1, 1920),
                rint(0),
                rat(1, 322560),
                rint(0),
            ],
        );
        let r = s.reciprocal().unwrap();
        assert_eq!(r.coeff(0), &ExactPoly::one());
        assert_eq!(r.coeff(2), &ExactPoly::constant(rat(-1, 24)));
        assert_eq!(r.coeff(4), &ExactPoly::constant(rat(7, 5760)));
        assert_eq!(r.coeff(6), &ExactPoly::constant(rat(-31, 967680)));
        // reciprocal . mul gives back the truncated identity
        let id = s.mul(&r);
        assert_eq!(id, ExactSeries::one(Var::Z, 8));
    }

    #[test]
    fn non_invertible_constant_term() {
        let z = series_from_rats(Var::Z, &[rint(0), rint(1)]);
        assert_eq!(z.reciprocal(), Err(Error::SeriesNotInvertible));
    }

    #[test]
    fn compose_requires_zero_constant_term() {
        let f = series_from_rats(Var::Z, &[rint(1), rint(1), rint(1)]);
        let bad = series_from_rats(Var::Z, &[rint(1), rint(1), rint(0)]);
        assert_eq!(f.compose(&bad), Err(Error::SeriesCompose));
        // f(g) with g = 2z: 1 + 2z + 4z^2
        let g = series_from_rats(Var::Z, &[rint(0), rint(2), rint(0)]);
        let fg = f.compose(&g).unwrap();
        assert_eq!(fg.coeff(0), &ExactPoly::one());
        assert_eq!(fg.coeff(1), &ExactPoly::constant(rint(2)));
        assert_eq!(fg.coeff(2), &ExactPoly::constant(rint(4)));
    }
}
