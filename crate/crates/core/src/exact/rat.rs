//! Arbitrary-precision rationals and small combinatorial helpers.
//!
//! `Rat` is `num_rational::BigRational`, which already maintains the two
//! invariants we rely on everywhere: lowest terms and positive denominator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Rational n/d from machine integers.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Rational from an integer.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rzero() -> Rat {
    Rat::zero()
}

pub fn rone() -> Rat {
    Rat::one()
}

/// n! as a rational.
pub fn factorial(n: usize) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

/// Binomial coefficient C(n, k) as a rational.
pub fn binomial(n: usize, k: usize) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
    }
    let mut den = BigInt::one();
    for i in 1..=k {
        den *= BigInt::from(i);
    }
    Rat::new(acc, den)
}

/// r^e for a non-negative machine exponent.
pub fn rpow(r: &Rat, e: usize) -> Rat {
    let mut acc = Rat::one();
    let mut base = r.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Bernoulli numbers B_0..B_n (B_1 = -1/2 convention), computed by the
/// defining recurrence sum_{j<=m} C(m+1, j) B_j = 0.
pub fn bernoulli_numbers(n: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
    b.push(Rat::one());
    for m in 1..=n {
        let mut s = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            s += binomial(m + 1, j) * bj;
        }
        b.push(-s / binomial(m + 1, m));
    }
    b
}

/// Serde helpers rendering rationals as canonical "p/q" strings.
pub mod serde_str {
    use super::{rat_display, Rat};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn parse(s: &str) -> Result<Rat, String> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = num.parse().map_err(|e| format!("{}", e))?;
        let den = den.parse().map_err(|e| format!("{}", e))?;
        Ok(Rat::new(num, den))
    }

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&rat_display(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        parse(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rat], ser: S) -> Result<S::Ok, S::Error> {
            let mut seq = ser.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&rat_display(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rat>, D::Error> {
            let strings = Vec::<String>::deserialize(de)?;
            strings
                .iter()
                .map(|s| parse(s).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod vec_vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Vec<Rat>], ser: S) -> Result<S::Ok, S::Error> {
            let mut seq = ser.serialize_seq(Some(v.len()))?;
            for row in v {
                let row: Vec<String> = row.iter().map(rat_display).collect();
                seq.serialize_element(&row)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Vec<Rat>>, D::Error> {
            let rows = Vec::<Vec<String>>::deserialize(de)?;
            rows.iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse(s).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }

    pub mod opt_pair {
        use super::*;

        pub fn serialize<S: Serializer>(
            v: &Option<(Rat, Rat)>,
            ser: S,
        ) -> Result<S::Ok, S::Error> {
            match v {
                None => ser.serialize_none(),
                Some((a, b)) => {
                    ser.serialize_some(&(rat_display(a), rat_display(b)))
                }
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            de: D,
        ) -> Result<Option<(Rat, Rat)>, D::Error> {
            let v = Option::<(String, String)>::deserialize(de)?;
            match v {
                None => Ok(None),
                Some((a, b)) => Ok(Some((
                    parse(&a).map_err(D::Error::custom)?,
                    parse(&b).map_err(D::Error::custom)?,
                ))),
            }
        }
    }
}

/// Render a rational as `p/q` (or just `p` for integers).
pub fn rat_display(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Signed rendering helper: (sign, magnitude string without sign).
pub fn rat_signed_display(r: &Rat) -> (bool, String) {
    (r.is_negative(), rat_display(&r.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_first_values() {
        let b = bernoulli_numbers(8);
        assert_eq!(b[0], rint(1));
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[3], rint(0));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
        assert_eq!(b[8], rat(-1, 30));
    }

    #[test]
    fn binomial_row() {
        assert_eq!(binomial(5, 2), rint(10));
        assert_eq!(binomial(5, 6), rint(0));
        assert_eq!(binomial(0, 0), rint(1));
    }

    #[test]
    fn pow_and_factorial() {
        assert_eq!(rpow(&rat(2, 3), 3), rat(8, 27));
        assert_eq!(factorial(6), rint(720));
    }
}
