//! Sparse multivariate polynomials over the rationals.
//!
//! Every polynomial in the library lives in the single ring
//! Q[h, eps2, U0, sigma, V0, z, rho], with the variable order fixed once and
//! for all so that serialized polynomials are canonical. `h` stands for
//! hbar^(1/2): half-integer powers of hbar never appear as fractional
//! exponents, they are even/odd powers of `h`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rat::{rat_display, rpow, Rat};
use crate::error::{Error, Result};

/// Number of variables in the global ring.
pub const NVARS: usize = 7;

/// Canonical variable order.
pub const VAR_NAMES: [&str; NVARS] = ["h", "eps2", "U0", "sigma", "V0", "z", "rho"];

/// A variable of the global polynomial ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// hbar^(1/2)
    H = 0,
    /// epsilon^2
    Eps2 = 1,
    U0 = 2,
    Sigma = 3,
    V0 = 4,
    Z = 5,
    Rho = 6,
}

impl Var {
    pub const ALL: [Var; NVARS] = [
        Var::H,
        Var::Eps2,
        Var::U0,
        Var::Sigma,
        Var::V0,
        Var::Z,
        Var::Rho,
    ];

    pub fn name(self) -> &'static str {
        VAR_NAMES[self as usize]
    }

    pub fn from_name(name: &str) -> Result<Var> {
        Var::ALL
            .iter()
            .copied()
            .find(|v| v.name() == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

/// Exponent vector; ordered lexicographically (array `Ord`).
pub type Exp = [u16; NVARS];

const ZERO_EXP: Exp = [0; NVARS];

/// Sparse multivariate polynomial with rational coefficients.
///
/// Invariant: no zero coefficient is ever stored, so `terms.is_empty()`
/// iff the polynomial is zero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactPoly {
    terms: BTreeMap<Exp, Rat>,
}

impl ExactPoly {
    // ---- Constructors ----

    pub fn zero() -> Self {
        ExactPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        ExactPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(ZERO_EXP, c);
        }
        ExactPoly { terms }
    }

    pub fn var(v: Var) -> Self {
        ExactPoly::monomial(Rat::one(), &[(v, 1)])
    }

    /// c * prod v_i^(e_i).
    pub fn monomial(c: Rat, powers: &[(Var, u16)]) -> Self {
        if c.is_zero() {
            return ExactPoly::zero();
        }
        let mut exp = ZERO_EXP;
        for &(v, e) in powers {
            exp[v as usize] += e;
        }
        let mut terms = BTreeMap::new();
        terms.insert(exp, c);
        ExactPoly { terms }
    }

    // ---- Predicates and views ----

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&ZERO_EXP).is_some_and(|c| c.is_one())
    }

    /// Some(c) iff the polynomial is the constant c.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&ZERO_EXP) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Rat)> {
        self.terms.iter()
    }

    /// Degree in one variable (zero polynomial reports 0).
    pub fn degree_in(&self, v: Var) -> u16 {
        self.terms
            .keys()
            .map(|e| e[v as usize])
            .max()
            .unwrap_or(0)
    }

    /// True if the variable does not occur.
    pub fn is_free_of(&self, v: Var) -> bool {
        self.terms.keys().all(|e| e[v as usize] == 0)
    }

    // ---- Term surgery ----

    fn insert_term(&mut self, exp: Exp, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_term(&mut self, c: Rat, powers: &[(Var, u16)]) {
        let mut exp = ZERO_EXP;
        for &(v, e) in powers {
            exp[v as usize] += e;
        }
        self.insert_term(exp, c);
    }

    // ---- Arithmetic ----

    pub fn scale(&self, c: &Rat) -> ExactPoly {
        if c.is_zero() {
            return ExactPoly::zero();
        }
        ExactPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, r)| (*e, r * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: usize) -> ExactPoly {
        let mut acc = ExactPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiply by v^e.
    pub fn mul_var_pow(&self, v: Var, e: u16) -> ExactPoly {
        ExactPoly {
            terms: self
                .terms
                .iter()
                .map(|(exp, c)| {
                    let mut exp = *exp;
                    exp[v as usize] += e;
                    (exp, c.clone())
                })
                .collect(),
        }
    }

    /// Divide by v^e; error unless every term carries at least v^e.
    pub fn div_var_pow(&self, v: Var, e: u16) -> Result<ExactPoly> {
        let mut terms = BTreeMap::new();
        for (exp, c) in &self.terms {
            if exp[v as usize] < e {
                return Err(crate::tripwire!(
                    "division by {}^{} is not exact on term with exponent {}",
                    v.name(),
                    e,
                    exp[v as usize]
                ));
            }
            let mut exp = *exp;
            exp[v as usize] -= e;
            terms.insert(exp, c.clone());
        }
        Ok(ExactPoly { terms })
    }

    /// Coefficient of v^k, as a polynomial in the remaining variables.
    pub fn coeff_of(&self, v: Var, k: u16) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (exp, c) in &self.terms {
            if exp[v as usize] == k {
                let mut e = *exp;
                e[v as usize] = 0;
                out.insert_term(e, c.clone());
            }
        }
        out
    }

    /// Substitute v by a polynomial.
    pub fn substitute(&self, v: Var, value: &ExactPoly) -> ExactPoly {
        let deg = self.degree_in(v);
        let mut powers: Vec<ExactPoly> = Vec::with_capacity(deg as usize + 1);
        powers.push(ExactPoly::one());
        for _ in 1..=deg {
            powers.push(&powers[powers.len() - 1] * value);
        }
        let mut out = ExactPoly::zero();
        for (exp, c) in &self.terms {
            let k = exp[v as usize];
            let mut e = *exp;
            e[v as usize] = 0;
            let base = ExactPoly {
                terms: BTreeMap::from([(e, c.clone())]),
            };
            out += &base * &powers[k as usize];
        }
        out
    }

    /// Substitute v by a rational value.
    pub fn evaluate(&self, v: Var, value: &Rat) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (exp, c) in &self.terms {
            let k = exp[v as usize] as usize;
            let mut e = *exp;
            e[v as usize] = 0;
            out.insert_term(e, c * rpow(value, k));
        }
        out
    }

    /// Partial derivative with respect to v.
    pub fn derivative(&self, v: Var) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (exp, c) in &self.terms {
            let k = exp[v as usize];
            if k == 0 {
                continue;
            }
            let mut e = *exp;
            e[v as usize] = k - 1;
            out.insert_term(e, c * Rat::from_integer(k.into()));
        }
        out
    }

    /// Exact division by a divisor regarded as univariate in `main`, whose
    /// leading coefficient in `main` must be a nonzero rational constant.
    /// Returns the quotient; error if the remainder is nonzero.
    pub fn div_exact_univar(&self, divisor: &ExactPoly, main: Var) -> Result<ExactPoly> {
        let d = divisor.degree_in(main);
        let lead = divisor
            .coeff_of(main, d)
            .as_constant()
            .filter(|c| !c.is_zero())
            .ok_or_else(|| {
                crate::tripwire!(
                    "div_exact_univar: leading coefficient in {} is not a nonzero constant",
                    main.name()
                )
            })?;
        let mut rem = self.clone();
        let mut quot = ExactPoly::zero();
        loop {
            let rdeg = rem.degree_in(main);
            if rem.is_zero() {
                return Ok(quot);
            }
            if rdeg < d {
                return Err(crate::tripwire!(
                    "div_exact_univar: nonzero remainder of degree {} in {}",
                    rdeg,
                    main.name()
                ));
            }
            let lead_rem = rem.coeff_of(main, rdeg);
            let factor = lead_rem.scale(&(Rat::one() / &lead)).mul_var_pow(main, rdeg - d);
            rem -= &factor * divisor;
            quot += factor;
            if rem.degree_in(main) == rdeg && !rem.coeff_of(main, rdeg).is_zero() {
                return Err(crate::tripwire!("div_exact_univar failed to reduce degree"));
            }
        }
    }

    /// Sum of |numerator| + |denominator| digit lengths; a cheap size proxy
    /// used only in diagnostics.
    pub fn size_hint(&self) -> usize {
        self.terms
            .values()
            .map(|c| c.numer().to_string().len() + c.denom().to_string().len())
            .sum()
    }

    // ---- Rendering ----

    fn render(&self, mul: &str, pow: impl Fn(&str, u16) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (exp, c) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    factors.push(pow(VAR_NAMES[i], e));
                }
            }
            let coeff_abs = c.abs();
            let sign = c.is_negative();
            let body = if factors.is_empty() {
                rat_display(&coeff_abs)
            } else if coeff_abs.is_one() {
                factors.join(mul)
            } else {
                format!("{}{}{}", rat_display(&coeff_abs), mul, factors.join(mul))
            };
            if out.is_empty() {
                if sign {
                    out.push('-');
                }
            } else if sign {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&body);
        }
        out
    }

    /// Plain-text rendering, e.g. `1 - 1/24*z^2`.
    pub fn to_text(&self) -> String {
        self.render("*", |name, e| {
            if e == 1 {
                name.to_string()
            } else {
                format!("{}^{}", name, e)
            }
        })
    }

    /// LaTeX rendering with `\hbar`, `\epsilon`, `\sigma`, `\rho`.
    pub fn to_latex(&self) -> String {
        fn latex_name(name: &str) -> &str {
            match name {
                "h" => r"\sqrt\hbar",
                "eps2" => r"\epsilon^2",
                "U0" => "U_0",
                "sigma" => r"\sigma",
                "V0" => "V_0",
                "z" => "z",
                "rho" => r"\rho",
                other => other,
            }
        }
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (exp, c) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in exp.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = VAR_NAMES[i];
                let body = match name {
                    // render powers of h as powers of hbar when even
                    "h" if e % 2 == 0 => {
                        if e == 2 {
                            r"\hbar".to_string()
                        } else {
                            format!(r"\hbar^{{{}}}", e / 2)
                        }
                    }
                    "eps2" => {
                        if e == 1 {
                            r"\epsilon^2".to_string()
                        } else {
                            format!(r"\epsilon^{{{}}}", 2 * e)
                        }
                    }
                    _ => {
                        if e == 1 {
                            latex_name(name).to_string()
                        } else {
                            format!("{}^{{{}}}", latex_name(name), e)
                        }
                    }
                };
                factors.push(body);
            }
            let coeff_abs = c.abs();
            let sign = c.is_negative();
            let coeff_str = if coeff_abs.denom().is_one() {
                format!("{}", coeff_abs.numer())
            } else {
                format!(r"\frac{{{}}}{{{}}}", coeff_abs.numer(), coeff_abs.denom())
            };
            let body = if factors.is_empty() {
                coeff_str
            } else if coeff_abs.is_one() {
                factors.join(" ")
            } else {
                format!("{} {}", coeff_str, factors.join(" "))
            };
            if out.is_empty() {
                if sign {
                    out.push('-');
                }
            } else if sign {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&body);
        }
        out
    }
}

impl fmt::Display for ExactPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

// ---- Operator impls (by reference, cloning only where needed) ----

impl AddAssign<ExactPoly> for ExactPoly {
    fn add_assign(&mut self, rhs: ExactPoly) {
        for (e, c) in rhs.terms {
            self.insert_term(e, c);
        }
    }
}

impl AddAssign<&ExactPoly> for ExactPoly {
    fn add_assign(&mut self, rhs: &ExactPoly) {
        for (e, c) in &rhs.terms {
            self.insert_term(*e, c.clone());
        }
    }
}

impl SubAssign<&ExactPoly> for ExactPoly {
    fn sub_assign(&mut self, rhs: &ExactPoly) {
        for (e, c) in &rhs.terms {
            self.insert_term(*e, -c.clone());
        }
    }
}

impl SubAssign<ExactPoly> for ExactPoly {
    fn sub_assign(&mut self, rhs: ExactPoly) {
        for (e, c) in rhs.terms {
            self.insert_term(e, -c);
        }
    }
}

impl Add for &ExactPoly {
    type Output = ExactPoly;
    fn add(self, rhs: &ExactPoly) -> ExactPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ExactPoly {
    type Output = ExactPoly;
    fn sub(self, rhs: &ExactPoly) -> ExactPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &ExactPoly {
    type Output = ExactPoly;
    fn neg(self) -> ExactPoly {
        ExactPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl Mul for &ExactPoly {
    type Output = ExactPoly;
    fn mul(self, rhs: &ExactPoly) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = *ea;
                for i in 0..NVARS {
                    e[i] += eb[i];
                }
                out.insert_term(e, ca * cb);
            }
        }
        out
    }
}

// ---- Canonical JSON encoding ----
//
// {"vars":["h",...],"terms":[{"exp":[...],"num":"...","den":"..."}]}
// with terms sorted lexicographically by exponent vector (the BTreeMap order).

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u16>,
    num: String,
    den: String,
}

impl Serialize for ExactPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ExactPoly", 2)?;
        st.serialize_field("vars", &VAR_NAMES)?;
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(e, c)| TermRepr {
                exp: e.to_vec(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect();
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ExactPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            vars: Vec<String>,
            terms: Vec<TermRepr>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if repr.vars != VAR_NAMES {
            return Err(D::Error::custom("unexpected variable list"));
        }
        let mut out = ExactPoly::zero();
        for t in repr.terms {
            if t.exp.len() != NVARS {
                return Err(D::Error::custom("bad exponent vector length"));
            }
            let mut exp = ZERO_EXP;
            exp.copy_from_slice(&t.exp);
            let num = t.num.parse().map_err(D::Error::custom)?;
            let den = t.den.parse().map_err(D::Error::custom)?;
            out.insert_term(exp, Rat::new(num, den));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::{rat, rint};

    fn sigma() -> ExactPoly {
        ExactPoly::var(Var::Sigma)
    }

    #[test]
    fn monomial_product() {
        // sigma * sigma = sigma^2
        let s2 = &sigma() * &sigma();
        assert_eq!(s2, ExactPoly::monomial(rint(1), &[(Var::Sigma, 2)]));
    }

    #[test]
    fn substitute_scaling_rule() {
        // eps2 -> -sigma*h applied to eps2*h gives -sigma*h^2... with h = hbar^(1/2),
        // eps2*hbar is eps2*h^2 and maps to -sigma*h^3.
        let expr = ExactPoly::monomial(rint(1), &[(Var::Eps2, 1), (Var::H, 2)]);
        let image = expr.substitute(
            Var::Eps2,
            &ExactPoly::monomial(rint(-1), &[(Var::Sigma, 1), (Var::H, 1)]),
        );
        assert_eq!(
            image,
            ExactPoly::monomial(rint(-1), &[(Var::Sigma, 1), (Var::H, 3)])
        );
    }

    #[test]
    fn evaluate_constant_term() {
        // 1 - z^2/24 at z = 0 is 1
        let mut p = ExactPoly::one();
        p.add_term(rat(-1, 24), &[(Var::Z, 2)]);
        assert_eq!(p.evaluate(Var::Z, &rint(0)), ExactPoly::one());
        // and at z = 2 it is 1 - 4/24 = 5/6
        assert_eq!(
            p.evaluate(Var::Z, &rint(2)),
            ExactPoly::constant(rat(5, 6))
        );
    }

    #[test]
    fn unknown_variable_is_an_error() {
        assert_eq!(
            Var::from_name("hbar"),
            Err(Error::UnknownVariable("hbar".into()))
        );
    }

    #[test]
    fn exact_univariate_division() {
        // (V0^2 - 1) / (V0 - 1) = V0 + 1
        let v0 = ExactPoly::var(Var::V0);
        let num = &(&v0 * &v0) - &ExactPoly::one();
        let den = &v0 - &ExactPoly::one();
        let q = num.div_exact_univar(&den, Var::V0).unwrap();
        assert_eq!(q, &v0 + &ExactPoly::one());
        // non-exact division trips
        assert!(ExactPoly::one().div_exact_univar(&den, Var::V0).is_err());
    }

    #[test]
    fn json_roundtrip_is_canonical() {
        let mut p = ExactPoly::one();
        p.add_term(rat(-7, 3), &[(Var::H, 2), (Var::Sigma, 1)]);
        p.add_term(rint(4), &[(Var::Rho, 3)]);
        let s1 = serde_json::to_string(&p).unwrap();
        let q: ExactPoly = serde_json::from_str(&s1).unwrap();
        assert_eq!(p, q);
        let s2 = serde_json::to_string(&q).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn derivative_in_u0() {
        // d/dU0 (U0^3/6) = U0^2/2
        let p = ExactPoly::monomial(rat(1, 6), &[(Var::U0, 3)]);
        assert_eq!(
            p.derivative(Var::U0),
            ExactPoly::monomial(rat(1, 2), &[(Var::U0, 2)])
        );
    }
}
