//! Dense matrices over `ExactPoly`, the Berkowitz characteristic polynomial,
//! and exact linear solving over the fraction field.
//!
//! Weight-space dimensions never exceed p(10) = 42, so dense storage is the
//! right trade-off. The characteristic polynomial uses the division-free
//! Berkowitz iteration because the entries live in a polynomial ring.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{ExactPoly, Var};
use super::rat::Rat;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<ExactPoly>,
}

impl ExactMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            entries: vec![ExactPoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExactMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = ExactPoly::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExactPoly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ExactMatrix {
            rows,
            cols,
            entries,
        }
    }

    /// Diagonal matrix from entries.
    pub fn diagonal(diag: Vec<ExactPoly>) -> Self {
        let n = diag.len();
        let mut m = ExactMatrix::zero(n, n);
        for (i, d) in diag.into_iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> ExactMatrix {
        ExactMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map(&self, f: impl Fn(&ExactPoly) -> ExactPoly) -> ExactMatrix {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> ExactMatrix {
        self.map(|e| e.scale(c))
    }

    pub fn scale_poly(&self, p: &ExactPoly) -> ExactMatrix {
        self.map(|e| e * p)
    }

    /// True if the matrix is diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[ExactPoly]) -> Vec<ExactPoly> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in apply");
        (0..self.rows)
            .map(|i| {
                let mut s = ExactPoly::zero();
                for j in 0..self.cols {
                    if !self[(i, j)].is_zero() && !v[j].is_zero() {
                        s += &self[(i, j)] * &v[j];
                    }
                }
                s
            })
            .collect()
    }

    /// AB - BA for square matrices of equal size.
    pub fn commutator(&self, other: &ExactMatrix) -> ExactMatrix {
        &(self * other) - &(other * self)
    }

    /// Coefficient of v^k, entrywise.
    pub fn coeff_of(&self, v: Var, k: u16) -> ExactMatrix {
        self.map(|e| e.coeff_of(v, k))
    }

    /// Largest degree in v over all entries.
    pub fn degree_in(&self, v: Var) -> u16 {
        self.entries.iter().map(|e| e.degree_in(v)).max().unwrap_or(0)
    }

    /// Characteristic polynomial det(rho_var * I - M) by the division-free
    /// Berkowitz iteration. The result is monic of degree = dimension.
    pub fn charpoly(&self, rho_var: Var) -> Result<ExactPoly> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        // p holds descending-power coefficients of det(xI - leading minor).
        let mut p: Vec<ExactPoly> = vec![ExactPoly::one()];
        for r in 0..n {
            // c[0] = 1, c[1] = -a_rr, c[k] = -(R . M^(k-2) . S) for k >= 2,
            // where M is the leading r x r block, R the partial row, S the
            // partial column.
            let mut c: Vec<ExactPoly> = Vec::with_capacity(r + 2);
            c.push(ExactPoly::one());
            c.push(-&self[(r, r)]);
            if r > 0 {
                let mut v: Vec<ExactPoly> = (0..r).map(|i| self[(i, r)].clone()).collect();
                for _ in 0..r {
                    // dot R . v
                    let mut dot = ExactPoly::zero();
                    for j in 0..r {
                        if !self[(r, j)].is_zero() && !v[j].is_zero() {
                            dot += &self[(r, j)] * &v[j];
                        }
                    }
                    c.push(-&dot);
                    if c.len() == r + 2 {
                        break;
                    }
                    // v <- M v
                    let mut nv = vec![ExactPoly::zero(); r];
                    for i in 0..r {
                        for j in 0..r {
                            if !self[(i, j)].is_zero() && !v[j].is_zero() {
                                nv[i] += &self[(i, j)] * &v[j];
                            }
                        }
                    }
                    v = nv;
                }
            }
            // Toeplitz product: p_new[i] = sum_j c[i-j] p[j]
            let mut np = vec![ExactPoly::zero(); r + 2];
            for (j, pj) in p.iter().enumerate() {
                if pj.is_zero() {
                    continue;
                }
                for (k, ck) in c.iter().enumerate() {
                    if j + k < r + 2 && !ck.is_zero() {
                        np[j + k] += ck * pj;
                    }
                }
            }
            p = np;
        }
        let mut out = ExactPoly::zero();
        for (i, coeff) in p.iter().enumerate() {
            out += coeff.mul_var_pow(rho_var, (n - i) as u16);
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for ExactMatrix {
    type Output = ExactPoly;
    fn index(&self, (i, j): (usize, usize)) -> &ExactPoly {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactPoly {
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = ExactMatrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] += a * b;
                }
            }
        }
        out
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

// ---- General exact division (used by the fraction-field solver) ----

/// Exact multivariate division p / q; None if not exact.
pub fn div_exact(p: &ExactPoly, q: &ExactPoly) -> Option<ExactPoly> {
    if p.is_zero() {
        return Some(ExactPoly::zero());
    }
    if let Some(c) = q.as_constant() {
        if c.is_zero() {
            return None;
        }
        return Some(p.scale(&(Rat::one() / c)));
    }
    // Recurse on the first variable actually present in q.
    let v = Var::ALL.iter().copied().find(|&v| q.degree_in(v) > 0)?;
    let dq = q.degree_in(v);
    let lead_q = q.coeff_of(v, dq);
    let mut rem = p.clone();
    let mut quot = ExactPoly::zero();
    loop {
        if rem.is_zero() {
            return Some(quot);
        }
        let dr = rem.degree_in(v);
        if dr < dq {
            return None;
        }
        let lead_r = rem.coeff_of(v, dr);
        let c = div_exact(&lead_r, &lead_q)?;
        let t = c.mul_var_pow(v, dr - dq);
        rem -= &t * q;
        quot += t;
        if rem.degree_in(v) == dr && !rem.coeff_of(v, dr).is_zero() {
            return None;
        }
    }
}

// ---- Rational functions (fraction field of the polynomial ring) ----

/// A rational function num/den with nonzero denominator. No gcd reduction is
/// performed (out of scope); exact polynomial quotients are collapsed when
/// they happen to exist.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: ExactPoly,
    pub den: ExactPoly,
}

impl RatFunc {
    pub fn from_poly(p: ExactPoly) -> Self {
        RatFunc {
            num: p,
            den: ExactPoly::one(),
        }
    }

    pub fn new(num: ExactPoly, den: ExactPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFunc { num, den };
        r.tidy();
        r
    }

    fn tidy(&mut self) {
        if self.num.is_zero() {
            self.den = ExactPoly::one();
            return;
        }
        if let Some(q) = div_exact(&self.num, &self.den) {
            self.num = q;
            self.den = ExactPoly::one();
        } else if let Some(c) = self.den.as_constant() {
            self.num = self.num.scale(&(Rat::one() / c));
            self.den = ExactPoly::one();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Some(p) iff the value is a polynomial.
    pub fn as_poly(&self) -> Option<&ExactPoly> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(
            &(&self.num * &other.den) - &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(crate::tripwire!("division by zero rational function"));
        }
        Ok(RatFunc::new(
            &self.num * &other.den,
            &self.den * &other.num,
        ))
    }

    /// Equality by cross multiplication.
    pub fn equals(&self, other: &RatFunc) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Solve A x = b over the fraction field of the polynomial ring by Gaussian
/// elimination. The system may be overdetermined; it must have full column
/// rank, and every equation is verified exactly against the solution. An
/// inconsistent system reports the first violated row.
pub fn solve_linear(a: &ExactMatrix, b: &[ExactPoly]) -> Result<Vec<RatFunc>> {
    let m = a.rows();
    let n = a.cols();
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "solve_linear: {} rows but {} right-hand sides",
            m,
            b.len()
        )));
    }
    let mut aug: Vec<Vec<RatFunc>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| RatFunc::from_poly(a[(i, j)].clone()))
                .chain(std::iter::once(RatFunc::from_poly(b[i].clone())))
                .collect()
        })
        .collect();
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        // pick the structurally smallest nonzero pivot to keep entries tame
        let piv = (row..m)
            .filter(|&r| !aug[r][col].is_zero())
            .min_by_key(|&r| aug[r][col].num.size_hint() + aug[r][col].den.size_hint());
        let Some(piv) = piv else {
            return Err(Error::RankDeficient(format!(
                "column {} has no pivot",
                col
            )));
        };
        aug.swap(row, piv);
        for r in 0..m {
            if r == row || aug[r][col].is_zero() {
                continue;
            }
            let factor = aug[r][col].div(&aug[row][col])?;
            for c in col..=n {
                let delta = factor.mul(&aug[row][c]);
                aug[r][c] = aug[r][c].sub(&delta);
            }
        }
        pivot_rows.push(row);
        row += 1;
    }
    // Solutions from the pivot rows.
    let mut x: Vec<RatFunc> = Vec::with_capacity(n);
    for (col, &r) in pivot_rows.iter().enumerate() {
        x.push(aug[r][n].div(&aug[r][col])?);
    }
    // Every remaining (eliminated) row must now read 0 = 0.
    for (r, rowv) in aug.iter().enumerate() {
        if pivot_rows.contains(&r) {
            continue;
        }
        if !rowv[n].is_zero() {
            return Err(Error::InconsistentSystem { row: r });
        }
    }
    Ok(x)
}

/// Fast exact solver for systems with rational entries. Requires a unique
/// solution; verifies every equation and reports the first violated row.
pub fn solve_rational(a: &[Vec<Rat>], b: &[Rat]) -> Result<Vec<Rat>> {
    let m = a.len();
    assert_eq!(m, b.len());
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut v = row.clone();
            v.push(rhs.clone());
            v
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let Some(piv) = (row..m).find(|&r| !aug[r][col].is_zero()) else {
            return Err(Error::RankDeficient(format!(
                "column {} has no pivot",
                col
            )));
        };
        aug.swap(row, piv);
        let inv = Rat::one() / aug[row][col].clone();
        for c in col..=n {
            aug[row][c] = &aug[row][c] * &inv;
        }
        for r in 0..m {
            if r == row || aug[r][col].is_zero() {
                continue;
            }
            let f = aug[r][col].clone();
            for c in col..=n {
                let delta = &f * &aug[row][c];
                aug[r][c] = &aug[r][c] - &delta;
            }
        }
        pivots.push(row);
        row += 1;
    }
    let mut x = vec![Rat::zero(); n];
    for (col, &r) in pivots.iter().enumerate() {
        x[col] = aug[r][n].clone();
    }
    // verify against the original system
    for (r, (row_a, rhs)) in a.iter().zip(b).enumerate() {
        let mut s = Rat::zero();
        for (aij, xj) in row_a.iter().zip(&x) {
            s += aij * xj;
        }
        if &s != rhs {
            return Err(Error::InconsistentSystem { row: r });
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::{rat, rint};

    #[test]
    fn charpoly_involution() {
        let mut m = ExactMatrix::zero(2, 2);
        m[(0, 1)] = ExactPoly::one();
        m[(1, 0)] = ExactPoly::one();
        let p = m.charpoly(Var::Rho).unwrap();
        let mut expect = ExactPoly::monomial(rint(1), &[(Var::Rho, 2)]);
        expect += ExactPoly::constant(rint(-1));
        assert_eq!(p, expect);
    }

    #[test]
    fn charpoly_one_by_one() {
        let mut m = ExactMatrix::zero(1, 1);
        m[(0, 0)] = ExactPoly::var(Var::Sigma);
        let p = m.charpoly(Var::Rho).unwrap();
        let expect = &ExactPoly::var(Var::Rho) - &ExactPoly::var(Var::Sigma);
        assert_eq!(p, expect);
    }

    #[test]
    fn charpoly_vanishes_on_diagonal_eigenvalues() {
        let m = ExactMatrix::diagonal(vec![
            ExactPoly::constant(rint(2)),
            ExactPoly::constant(rat(-1, 3)),
            ExactPoly::constant(rint(5)),
        ]);
        let p = m.charpoly(Var::Rho).unwrap();
        for ev in [rint(2), rat(-1, 3), rint(5)] {
            assert!(p.evaluate(Var::Rho, &ev).is_zero());
        }
        assert!(!p.evaluate(Var::Rho, &rint(7)).is_zero());
    }

    #[test]
    fn charpoly_requires_square() {
        let m = ExactMatrix::zero(2, 3);
        assert!(matches!(
            m.charpoly(Var::Rho),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let a = ExactMatrix::identity(3);
        let b = vec![
            ExactPoly::var(Var::Sigma),
            ExactPoly::one(),
            ExactPoly::constant(rat(2, 7)),
        ];
        let x = solve_linear(&a, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert_eq!(xi.as_poly().unwrap(), bi);
        }
    }

    #[test]
    fn solve_scalar_equation() {
        // 2x = sigma -> x = sigma/2
        let mut a = ExactMatrix::zero(1, 1);
        a[(0, 0)] = ExactPoly::constant(rint(2));
        let x = solve_linear(&a, &[ExactPoly::var(Var::Sigma)]).unwrap();
        assert_eq!(
            x[0].as_poly().unwrap(),
            &ExactPoly::monomial(rat(1, 2), &[(Var::Sigma, 1)])
        );
    }

    #[test]
    fn solve_overdetermined_consistent_and_not() {
        // x + y = 3, x - y = 1, 2x = 4: consistent, x = 2, y = 1
        let mut a = ExactMatrix::zero(3, 2);
        a[(0, 0)] = ExactPoly::one();
        a[(0, 1)] = ExactPoly::one();
        a[(1, 0)] = ExactPoly::one();
        a[(1, 1)] = ExactPoly::constant(rint(-1));
        a[(2, 0)] = ExactPoly::constant(rint(2));
        let b = vec![
            ExactPoly::constant(rint(3)),
            ExactPoly::constant(rint(1)),
            ExactPoly::constant(rint(4)),
        ];
        let x = solve_linear(&a, &b).unwrap();
        assert_eq!(x[0].as_poly().unwrap(), &ExactPoly::constant(rint(2)));
        assert_eq!(x[1].as_poly().unwrap(), &ExactPoly::one());

        let b_bad = vec![
            ExactPoly::constant(rint(3)),
            ExactPoly::constant(rint(1)),
            ExactPoly::constant(rint(5)),
        ];
        assert!(matches!(
            solve_linear(&a, &b_bad),
            Err(Error::InconsistentSystem { .. })
        ));
    }

    #[test]
    fn div_exact_multivariate() {
        let h = ExactPoly::var(Var::H);
        let s = ExactPoly::var(Var::Sigma);
        let p = &(&h + &s) * &(&h - &s);
        assert_eq!(div_exact(&p, &(&h + &s)).unwrap(), &h - &s);
        assert!(div_exact(&p, &(&h + &ExactPoly::one())).is_none());
    }
}
