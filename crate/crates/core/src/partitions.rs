//! Partitions, their statistics, and symmetric-group character data.
//!
//! Everything downstream indexes bases and eigenvalues by partitions, so the
//! enumeration order is fixed once (reverse lexicographic) and serialized with
//! all outputs.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::poly::{ExactPoly, Var};
use crate::exact::rat::{bernoulli_numbers, binomial, factorial, rat, rint, rpow, Rat};
use crate::exact::series::ExactSeries;

/// An integer partition: non-increasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts.retain(|&p| p > 0);
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiplicity of the part i.
    pub fn multiplicity(&self, part: u32) -> usize {
        self.0.iter().filter(|&&p| p == part).count()
    }

    /// Conjugate partition (transpose of the Young diagram).
    pub fn conjugate(&self) -> Partition {
        if self.0.is_empty() {
            return Partition::empty();
        }
        let max = self.0[0] as usize;
        let mut cols = vec![0u32; max];
        for &p in &self.0 {
            for c in cols.iter_mut().take(p as usize) {
                *c += 1;
            }
        }
        Partition(cols)
    }

    /// Frobenius coordinates (a_1..a_d | b_1..b_d) with a_i = lambda_i - i,
    /// b_i = lambda'_i - i, d the diagonal length.
    pub fn frobenius(&self) -> FrobeniusCoords {
        let conj = self.conjugate();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0.. {
            if i >= self.0.len() || (self.0[i] as usize) < i + 1 {
                break;
            }
            a.push(self.0[i] - (i as u32) - 1);
            b.push(conj.0[i] - (i as u32) - 1);
        }
        FrobeniusCoords { a, b }
    }

    /// Contents j - i over all cells (i, j) of the diagram, row by row.
    pub fn contents(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.weight());
        for (i, &p) in self.0.iter().enumerate() {
            for j in 0..p as i64 {
                out.push(j - i as i64);
            }
        }
        out
    }

    /// Power sum of the parts: sum_i lambda_i^e.
    pub fn part_power_sum(&self, e: u32) -> Rat {
        let mut s = Rat::zero();
        for &p in &self.0 {
            s += rpow(&rint(p as i64), e as usize);
        }
        s
    }

    /// z_lambda = prod_i m_i! i^{m_i}, the centralizer order of the class.
    pub fn z_factor(&self) -> Rat {
        let mut z = Rat::one();
        let mut i = 0;
        while i < self.0.len() {
            let part = self.0[i];
            let mut m = 0usize;
            while i < self.0.len() && self.0[i] == part {
                m += 1;
                i += 1;
            }
            z *= factorial(m);
            z *= rpow(&rint(part as i64), m);
        }
        z
    }

    /// |C_lambda| = |lambda|! / z_lambda (an integer).
    pub fn class_size(&self) -> Rat {
        factorial(self.weight()) / self.z_factor()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, ")")
    }
}

/// Frobenius coordinates of a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusCoords {
    /// Arm lengths a_i = lambda_i - i, strictly decreasing.
    pub a: Vec<u32>,
    /// Leg lengths b_i = lambda'_i - i, strictly decreasing.
    pub b: Vec<u32>,
}

impl FrobeniusCoords {
    pub fn diagonal_len(&self) -> usize {
        self.a.len()
    }
}

/// All partitions of k in reverse lexicographic order, e.g.
/// k = 4: (4), (3,1), (2,2), (2,1,1), (1,1,1,1).
pub fn enumerate_partitions(k: usize) -> Vec<Partition> {
    fn rec(remaining: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        let top = max_part.min(remaining);
        for first in (1..=top).rev() {
            prefix.push(first);
            rec(remaining - first, first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k as u32, k as u32, &mut Vec::new(), &mut out);
    out
}

/// Number of partitions of k.
pub fn partition_count(k: usize) -> usize {
    static CACHE: OnceLock<Mutex<Vec<usize>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![1]));
    let mut table = cache.lock().unwrap();
    while table.len() <= k {
        // Euler pentagonal recurrence
        let n = table.len() as i64;
        let mut total: i64 = 0;
        let mut j = 1i64;
        loop {
            let g1 = j * (3 * j - 1) / 2;
            let g2 = j * (3 * j + 1) / 2;
            if g1 > n {
                break;
            }
            let sign = if j % 2 == 1 { 1 } else { -1 };
            total += sign * table[(n - g1) as usize] as i64;
            if g2 <= n {
                total += sign * table[(n - g2) as usize] as i64;
            }
            j += 1;
        }
        table.push(total as usize);
    }
    table[k]
}

// ---- The partition statistics P_j, Q_j, beta_j ----

/// Truncated generating series (z/2)/sinh(z/2) = sum beta_j z^j, computed as
/// the series reciprocal of S(z) = sinh(z/2)/(z/2).
pub fn beta_series(order: usize) -> ExactSeries {
    s_series(order)
        .reciprocal()
        .expect("S(z) has constant term 1")
}

/// S(z) = sinh(z/2)/(z/2) = sum_n z^(2n) / ((2n+1)! 4^n), truncated.
pub fn s_series(order: usize) -> ExactSeries {
    ExactSeries::from_fn(Var::Z, order, |k| {
        if k % 2 != 0 {
            return ExactPoly::zero();
        }
        let n = k / 2;
        ExactPoly::constant(Rat::one() / (factorial(2 * n + 1) * rpow(&rint(4), n)))
    })
}

/// beta_j: coefficient of z^j in (z/2)/sinh(z/2). Cross-checked against the
/// closed form (1/2^(j-1) - 1) B_j / j! in the tests.
pub fn beta_coeff(j: usize) -> Rat {
    static CACHE: OnceLock<Mutex<Vec<Rat>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut table = cache.lock().unwrap();
    if j >= table.len() {
        let order = (j + 8).max(16);
        let series = beta_series(order);
        *table = series
            .coeffs()
            .iter()
            .map(|c| c.as_constant().expect("beta coefficients are rational"))
            .collect();
    }
    table[j].clone()
}

/// Closed form beta_j = (1/2^(j-1) - 1) B_j / j!, the independent route.
pub fn beta_coeff_closed_form(j: usize) -> Rat {
    let b = bernoulli_numbers(j);
    let half_pow = if j == 0 {
        rint(2)
    } else {
        Rat::one() / rpow(&rint(2), j - 1)
    };
    (half_pow - Rat::one()) * &b[j] / factorial(j)
}

/// P_j(lambda) = sum_i [(lambda_i - i + 1/2)^j - (-i + 1/2)^j]; the sum is
/// finite because terms with i > l(lambda) vanish.
pub fn p_function(j: usize, lambda: &Partition) -> Rat {
    let mut s = Rat::zero();
    for (i, &part) in lambda.parts().iter().enumerate() {
        let i1 = (i + 1) as i64;
        let x = rint(part as i64) - rint(i1) + rat(1, 2);
        let y = -rint(i1) + rat(1, 2);
        s += rpow(&x, j) - rpow(&y, j);
    }
    s
}

/// Q_0 = 1; Q_j(lambda) = P_{j-1}(lambda)/(j-1)! + beta_j for j >= 1.
pub fn q_function(j: usize, lambda: &Partition) -> Rat {
    if j == 0 {
        return Rat::one();
    }
    p_function(j - 1, lambda) / factorial(j - 1) + beta_coeff(j)
}

/// Faulhaber polynomial F_{m+1}(x) with sum_{l=1..N} l^m = F_{m+1}(N)/(m+1),
/// F_m(x) = sum_j (-1)^j C(m, j) B_j x^(m-j). Returned in the variable z.
pub fn faulhaber(m: usize) -> ExactPoly {
    let deg = m + 1;
    let b = bernoulli_numbers(deg);
    let mut out = ExactPoly::zero();
    for j in 0..deg {
        let sign = if j % 2 == 0 { Rat::one() } else { -Rat::one() };
        let c = sign * binomial(deg, j) * &b[j];
        if !c.is_zero() {
            out.add_term(c, &[(Var::Z, (deg - j) as u16)]);
        }
    }
    out
}

/// Evaluate sum_{l=1..n} l^m through the Faulhaber polynomial.
pub fn power_sum_via_faulhaber(m: usize, n: i64) -> Rat {
    assert!(n >= 0);
    let f = faulhaber(m);
    f.evaluate(Var::Z, &rint(n))
        .as_constant()
        .expect("Faulhaber evaluation is rational")
        / rint((m + 1) as i64)
}

// ---- Characters of the symmetric group ----

/// Irreducible character chi_lambda(C_mu) by the Murnaghan-Nakayama rule
/// (recursive border-strip removal, sign (-1)^height). Values are cached.
pub fn character(lambda: &Partition, mu: &Partition) -> Result<i64> {
    if lambda.weight() != mu.weight() {
        return Err(Error::WeightMismatch(lambda.weight(), mu.weight()));
    }
    Ok(mn_character(lambda.parts(), mu.parts()))
}

fn mn_character(lambda: &[u32], mu: &[u32]) -> i64 {
    if mu.is_empty() {
        return 1;
    }
    static CACHE: OnceLock<Mutex<HashMap<(Vec<u32>, Vec<u32>), i64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (lambda.to_vec(), mu.to_vec());
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return v;
    }
    let strip = mu[0] as i64;
    let rest = &mu[1..];
    // Work with beta numbers beta_i = lambda_i + (l - i); removing a border
    // strip of length t means replacing some beta_i by beta_i - t (which must
    // be non-negative and not already a beta number). The strip height is the
    // number of beta numbers strictly between beta_i - t and beta_i.
    let l = lambda.len();
    let betas: Vec<i64> = lambda
        .iter()
        .enumerate()
        .map(|(i, &p)| p as i64 + (l - 1 - i) as i64)
        .collect();
    let mut total = 0i64;
    for (i, &beta) in betas.iter().enumerate() {
        let target = beta - strip;
        if target < 0 || betas.contains(&target) {
            continue;
        }
        let height = betas
            .iter()
            .filter(|&&b| target < b && b < beta)
            .count();
        let sign = if height % 2 == 0 { 1 } else { -1 };
        let mut new_betas = betas.clone();
        new_betas[i] = target;
        new_betas.sort_unstable_by(|a, b| b.cmp(a));
        // convert back to a partition: lambda_j = beta_j - (l - j)
        let nu: Vec<u32> = new_betas
            .iter()
            .enumerate()
            .map(|(j, &b)| (b - (l - 1 - j) as i64) as u32)
            .filter(|&p| p > 0)
            .collect();
        total += sign * mn_character(&nu, rest);
    }
    cache.lock().unwrap().insert(key, total);
    total
}

/// Full character table of S_k: rows are irreducibles lambda, columns are
/// classes mu, both in the canonical partition order.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub k: usize,
    pub partitions: Vec<Partition>,
    /// values[i][j] = chi_{lambda_i}(C_{mu_j})
    pub values: Vec<Vec<i64>>,
}

impl CharacterTable {
    pub fn build(k: usize) -> Result<CharacterTable> {
        let partitions = enumerate_partitions(k);
        let mut values = Vec::with_capacity(partitions.len());
        for lam in &partitions {
            let mut row = Vec::with_capacity(partitions.len());
            for mu in &partitions {
                row.push(character(lam, mu)?);
            }
            // dimension (identity class is the all-ones partition, the last
            // column in reverse-lex order) must be positive
            if let Some(last) = row.last() {
                if *last <= 0 {
                    return Err(crate::tripwire!(
                        "character table of S_{}: non-positive dimension for {}",
                        k,
                        lam
                    ));
                }
            }
            values.push(row);
        }
        let table = CharacterTable {
            k,
            partitions,
            values,
        };
        table.check_orthogonality()?;
        Ok(table)
    }

    /// Row orthogonality: sum_mu |C_mu| chi_l(mu) chi_n(mu) = k! delta_{ln}.
    pub fn check_orthogonality(&self) -> Result<()> {
        let kfact = factorial(self.k);
        let sizes: Vec<Rat> = self.partitions.iter().map(|p| p.class_size()).collect();
        for (i, ri) in self.values.iter().enumerate() {
            for (j, rj) in self.values.iter().enumerate() {
                let mut s = Rat::zero();
                for (c, size) in sizes.iter().enumerate() {
                    s += size * rint(ri[c]) * rint(rj[c]);
                }
                let expect = if i == j { kfact.clone() } else { Rat::zero() };
                if s != expect {
                    return Err(crate::tripwire!(
                        "row orthogonality fails for ({}, {}) at k = {}",
                        self.partitions[i],
                        self.partitions[j],
                        self.k
                    ));
                }
            }
        }
        Ok(())
    }

    /// CSV dump: header row of classes, then one row per irreducible.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("lambda\\mu");
        for mu in &self.partitions {
            out.push(',');
            out.push_str(&format!("\"{}\"", mu));
        }
        out.push('\n');
        for (lam, row) in self.partitions.iter().zip(&self.values) {
            out.push_str(&format!("\"{}\"", lam));
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}
