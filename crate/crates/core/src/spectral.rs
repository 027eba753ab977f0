//! The joint spectral problem: scaling to (sigma, V0), the nondegeneracy
//! search, the deformed-Schur order-by-order recursion, eigenvalue series,
//! spectral-curve characteristic polynomials, and the genus-conjecture
//! right-hand side.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::matrix::ExactMatrix;
use crate::exact::poly::{ExactPoly, Var};
use crate::exact::rat::{factorial, rint, rpow, Rat};
use crate::fock::{to_schur_basis, WeightBasis};
use crate::hamiltonians::HamiltonianChain;
use crate::partitions::{enumerate_partitions, q_function, Partition};

/// A Hamiltonian scaled to the single-parameter form: the matrix of
/// K_m = H_m / hbar^((m+2)/2) under q = sqrt(hbar) T, U0 = sqrt(hbar) V0,
/// eps^2 = -sigma sqrt(hbar).
#[derive(Clone, Debug)]
pub struct ScaledOperator {
    pub m: i64,
    pub k: usize,
    /// Schur-basis matrix; entries in Q[sigma, V0].
    pub matrix: ExactMatrix,
}

/// Scale a p = 0 block (monomial basis, entries in h, eps2, U0) to the
/// T-monomial basis. Homogeneity makes every entry h-free after the
/// substitutions; any residue is fatal.
pub fn scale_monomial(p0: &ExactMatrix, m: i64, k: usize, with_v0: bool) -> Result<ExactMatrix> {
    let basis = WeightBasis::new(k);
    let n = basis.dim();
    if p0.rows() != n || p0.cols() != n {
        return Err(Error::Dimension(format!(
            "scale: block is {}x{}, expected {} at weight {}",
            p0.rows(),
            p0.cols(),
            n,
            k
        )));
    }
    let minus_sigma_h = ExactPoly::monomial(rint(-1), &[(Var::Sigma, 1), (Var::H, 1)]);
    let u0_image = if with_v0 {
        ExactPoly::monomial(Rat::one(), &[(Var::H, 1), (Var::V0, 1)])
    } else {
        ExactPoly::zero()
    };
    let mut out = ExactMatrix::zero(n, n);
    for i in 0..n {
        let li = basis.elements[i].len() as i64;
        for j in 0..n {
            let e = &p0[(i, j)];
            if e.is_zero() {
                continue;
            }
            let lj = basis.elements[j].len() as i64;
            let subbed = e
                .substitute(Var::Eps2, &minus_sigma_h)
                .substitute(Var::U0, &u0_image);
            // K_(ij) = M_(ij) h^(l_i - l_j - (m+2)); the shift must cancel
            // every h exactly
            let shift = lj + m + 2 - li;
            let reduced = if shift >= 0 {
                subbed.div_var_pow(Var::H, shift as u16).map_err(|_| {
                    crate::tripwire!(
                        "scale: residual h dependence at entry ({}, {}) of K_{} on weight {}",
                        i,
                        j,
                        m,
                        k
                    )
                })?
            } else {
                subbed.mul_var_pow(Var::H, (-shift) as u16)
            };
            if !reduced.is_free_of(Var::H) {
                return Err(crate::tripwire!(
                    "scale: residual h dependence at entry ({}, {}) of K_{} on weight {}",
                    i,
                    j,
                    m,
                    k
                ));
            }
            out[(i, j)] = reduced;
        }
    }
    Ok(out)
}

/// Scale a record's p = 0 block at weight k and convert to the Schur basis.
pub fn scale(
    chain: &HamiltonianChain,
    m: i64,
    k: usize,
    with_v0: bool,
) -> Result<ScaledOperator> {
    let p0 = chain.record(m)?.p0_matrix(k)?;
    let mono = scale_monomial(&p0, m, k, with_v0)?;
    let matrix = to_schur_basis(&mono, k)?;
    if m == 1 && matrix.degree_in(Var::Sigma) > 1 {
        return Err(crate::tripwire!(
            "scale: K_1 has sigma-degree {} > 1",
            matrix.degree_in(Var::Sigma)
        ));
    }
    Ok(ScaledOperator { m, k, matrix })
}

/// Dispersionless eigenvalue F_m^[0](lambda; V0) =
/// sum_{j=0}^{m+2} V0^(m+2-j)/(m+2-j)! Q_j(lambda).
pub fn dispersionless_eigen(m: i64, lambda: &Partition) -> ExactPoly {
    let mut out = ExactPoly::zero();
    for j in 0..=(m + 2) as usize {
        let pow = (m + 2) as usize - j;
        let c = q_function(j, lambda) / factorial(pow);
        if !c.is_zero() {
            out.add_term(c, &[(Var::V0, pow as u16)]);
        }
    }
    out
}

/// Smallest m >= 0 whose dispersionless eigenvalue polynomials are pairwise
/// distinct on the weight-k partitions: for every pair lambda != mu some
/// j <= m+2 has Q_j(lambda) != Q_j(mu).
pub fn mstar_search(k: usize) -> Result<i64> {
    const LIMIT: i64 = 16;
    let partitions = enumerate_partitions(k);
    for m in 0..=LIMIT {
        let mut separated = true;
        let mut witness: Option<(usize, usize)> = None;
        for i in 0..partitions.len() {
            for j in (i + 1)..partitions.len() {
                let distinct = (0..=(m + 2) as usize).any(|jj| {
                    q_function(jj, &partitions[i]) != q_function(jj, &partitions[j])
                });
                if !distinct {
                    separated = false;
                    witness = Some((i, j));
                    break;
                }
            }
            if !separated {
                break;
            }
        }
        if separated {
            return Ok(m);
        }
        if m == LIMIT {
            let (i, j) = witness.unwrap();
            return Err(Error::MStarExhausted {
                weight: k,
                limit: LIMIT,
                lhs: partitions[i].to_string(),
                rhs: partitions[j].to_string(),
            });
        }
    }
    unreachable!()
}

/// A deformed Schur polynomial r_lambda(T; sigma) as a truncated sigma-series
/// of coefficient vectors in the Schur basis, together with eigenvalue series
/// per Hamiltonian index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeformedSchur {
    pub lambda: Partition,
    /// Coefficients r^[t] for t = 0..=order are stored.
    pub order: usize,
    /// coeffs[t][nu] = <r_lambda^[t], s_nu>; rational numbers (V0-free).
    #[serde(with = "crate::exact::rat::serde_str::vec_vec")]
    pub coeffs: Vec<Vec<Rat>>,
    /// eigen[m][t] = sigma^t coefficient of F_m(lambda; sigma, V0), in Q[V0].
    pub eigen: BTreeMap<i64, Vec<ExactPoly>>,
}

impl DeformedSchur {
    /// The series coefficient of s_nu in r_lambda at sigma-power t.
    pub fn coeff(&self, t: usize, nu_index: usize) -> &Rat {
        &self.coeffs[t][nu_index]
    }
}

/// Run the order-by-order recursion on weight k through sigma^order, using
/// the operator K_(m*) with full (sigma, V0) dependence, then attach
/// eigenvalue series for every index in `eigen_for`.
pub fn deformed_schur(
    chain: &HamiltonianChain,
    k: usize,
    order: usize,
    eigen_for: &[i64],
) -> Result<Vec<DeformedSchur>> {
    let partitions = enumerate_partitions(k);
    let n = partitions.len();
    let mstar = mstar_search(k)?;
    let kst = scale(chain, mstar.max(1), k, true)?;
    // sigma-order slices of K_(m*)
    let deg = kst.matrix.degree_in(Var::Sigma) as usize;
    let slices: Vec<ExactMatrix> = (0..=deg.max(order))
        .map(|j| {
            if j <= deg {
                kst.matrix.coeff_of(Var::Sigma, j as u16)
            } else {
                ExactMatrix::zero(n, n)
            }
        })
        .collect();
    // sanity: the sigma^0 slice is diagonal with the dispersionless eigenvalues
    let f0: Vec<ExactPoly> = partitions
        .iter()
        .map(|lam| dispersionless_eigen(mstar.max(1), lam))
        .collect();
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { f0[i].clone() } else { ExactPoly::zero() };
            if slices[0][(i, j)] != expect {
                return Err(crate::tripwire!(
                    "deformed_schur: sigma^0 slice of K_{} at weight {} is not the dispersionless diagonal",
                    mstar.max(1),
                    k
                ));
            }
        }
    }

    // r[t][lam][nu] and F[t][lam] (for m = m*)
    let mut r: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(order + 1);
    let mut f: Vec<Vec<ExactPoly>> = Vec::with_capacity(order + 1);
    let mut r0 = vec![vec![Rat::zero(); n]; n];
    for (i, row) in r0.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    r.push(r0);
    f.push(f0.clone());

    for t in 1..=order {
        let mut rt = vec![vec![Rat::zero(); n]; n];
        let mut ft = vec![ExactPoly::zero(); n];
        for lam in 0..n {
            // diagonal relation: F^[t](lambda) =
            //   sum_{j=1}^t sum_nu K[j]_(nu, lam) r^[t-j]_(lam, nu)
            let mut acc = ExactPoly::zero();
            for j in 1..=t {
                for nu in 0..n {
                    let c = &r[t - j][lam][nu];
                    if c.is_zero() || slices[j][(nu, lam)].is_zero() {
                        continue;
                    }
                    acc += slices[j][(nu, lam)].scale(c);
                }
            }
            ft[lam] = acc;
        }
        for lam in 0..n {
            for mu in 0..n {
                if mu == lam {
                    continue; // normalization keeps r^[t]_(lam, lam) = 0 for t >= 1
                }
                // off-diagonal relation:
                // (F0(lam) - F0(mu)) r^[t]_(lam, mu) =
                //   sum_{j=1}^t <K[j] s_mu, r^[t-j]_lam>
                //   - sum_{j=1}^{t-1} F^[j](lam) r^[t-j]_(lam, mu)
                let mut num = ExactPoly::zero();
                for j in 1..=t {
                    for nu in 0..n {
                        let c = &r[t - j][lam][nu];
                        if c.is_zero() || slices[j][(nu, mu)].is_zero() {
                            continue;
                        }
                        num += slices[j][(nu, mu)].scale(c);
                    }
                }
                for j in 1..t {
                    let c = &r[t - j][lam][mu];
                    if c.is_zero() || f[j][lam].is_zero() {
                        continue;
                    }
                    num -= f[j][lam].scale(c);
                }
                if num.is_zero() {
                    continue;
                }
                let gap = &f0[lam] - &f0[mu];
                if gap.is_zero() {
                    return Err(crate::tripwire!(
                        "deformed_schur: zero eigenvalue gap between {} and {} at weight {}",
                        partitions[lam],
                        partitions[mu],
                        k
                    ));
                }
                let quot = num.div_exact_univar(&gap, Var::V0).map_err(|_| {
                    crate::tripwire!(
                        "deformed_schur: non-exact gap division for ({}, {}) at order {}",
                        partitions[lam],
                        partitions[mu],
                        t
                    )
                })?;
                let c = quot.as_constant().ok_or_else(|| {
                    crate::tripwire!(
                        "deformed_schur: coefficient r^[{}]_({}, {}) has genuine V0 dependence",
                        t,
                        partitions[lam],
                        partitions[mu]
                    )
                })?;
                rt[lam][mu] = c;
            }
        }
        r.push(rt);
        f.push(ft);
    }

    // eigenvalue series for each requested index m:
    // F_m^[t](lambda) = sum_{j=0}^t sum_nu K_m[j]_(lam, nu) r^[t-j]_(lam, nu)
    let mut eigen_slices: BTreeMap<i64, Vec<ExactMatrix>> = BTreeMap::new();
    for &m in eigen_for {
        if m == -1 {
            // K_{-1} = V0 identity
            let mut v0 = ExactMatrix::zero(n, n);
            for i in 0..n {
                v0[(i, i)] = ExactPoly::var(Var::V0);
            }
            eigen_slices.insert(m, vec![v0]);
            continue;
        }
        let op = scale(chain, m, k, true)?;
        let d = op.matrix.degree_in(Var::Sigma) as usize;
        eigen_slices.insert(
            m,
            (0..=d).map(|j| op.matrix.coeff_of(Var::Sigma, j as u16)).collect(),
        );
    }

    let mut out = Vec::with_capacity(n);
    for lam in 0..n {
        let mut eigen = BTreeMap::new();
        for (&m, slices_m) in &eigen_slices {
            let mut series = Vec::with_capacity(order + 1);
            for t in 0..=order {
                let mut acc = ExactPoly::zero();
                for (j, slice) in slices_m.iter().enumerate().take(t + 1) {
                    for nu in 0..n {
                        let c = &r[t - j][lam][nu];
                        if c.is_zero() || slice[(lam, nu)].is_zero() {
                            continue;
                        }
                        acc += slice[(lam, nu)].scale(c);
                    }
                }
                series.push(acc);
            }
            eigen.insert(m, series);
        }
        out.push(DeformedSchur {
            lambda: partitions[lam].clone(),
            order,
            coeffs: (0..=order).map(|t| r[t][lam].clone()).collect(),
            eigen,
        });
    }
    Ok(out)
}

/// A weight-k spectral curve: det(rho - K_m(sigma)) at V0 = 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub k: usize,
    pub m: i64,
    /// Monic bivariate polynomial in (sigma, rho), rho-degree = p(k).
    pub poly: ExactPoly,
}

impl SpectralCurve {
    /// Coefficient table: (rho power, sigma power, coefficient) sorted.
    pub fn coefficient_table(&self) -> Vec<(u16, u16, Rat)> {
        let mut rows = Vec::new();
        for (exp, c) in self.poly.terms() {
            rows.push((exp[Var::Rho as usize], exp[Var::Sigma as usize], c.clone()));
        }
        rows.sort_by(|a, b| (b.0, a.1).cmp(&(a.0, b.1)));
        rows
    }
}

/// Characteristic polynomial of K_m(sigma) on the weight-k space at V0 = 0.
pub fn spectral_curve(chain: &HamiltonianChain, k: usize, m: i64) -> Result<SpectralCurve> {
    let op = scale(chain, m, k, false)?;
    let poly = op.matrix.charpoly(Var::Rho)?;
    // at sigma = 0 the rho-roots are exactly the dispersionless eigenvalues
    let at_zero = poly.evaluate(Var::Sigma, &Rat::zero());
    let mut product = ExactPoly::one();
    for lam in enumerate_partitions(k) {
        let ev = dispersionless_eigen(m, &lam).evaluate(Var::V0, &Rat::zero());
        product = &product * &(&ExactPoly::var(Var::Rho) - &ev);
    }
    if at_zero != product {
        return Err(crate::tripwire!(
            "spectral_curve: sigma = 0 roots differ from the dispersionless eigenvalues at k = {}, m = {}",
            k,
            m
        ));
    }
    Ok(SpectralCurve { k, m, poly })
}

/// Right-hand side of the genus conjecture:
/// (k-1) |P_k| + 1 - sum_{lambda in P_k} l(lambda).
pub fn conjecture_rhs(k: usize) -> Result<i64> {
    let partitions = enumerate_partitions(k);
    let count = partitions.len() as i64;
    let total_len: i64 = partitions.iter().map(|p| p.len() as i64).sum();
    Ok((k as i64 - 1) * count + 1 - total_len)
}

/// Report on the sigma -> infinity behaviour: the leading sigma-coefficient
/// of K_m in the monomial basis, which must be diagonal, with the reference
/// values sum_i lambda_i^(2m+1) and an affine fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SigmaInfinityReport {
    pub k: usize,
    pub m: i64,
    pub sigma_degree: u16,
    /// Diagonal entries of the leading coefficient matrix (monomial basis).
    #[serde(with = "crate::exact::rat::serde_str::vec")]
    pub diagonal: Vec<Rat>,
    /// Reference values sum_i lambda_i^(2m+1) per basis partition.
    #[serde(with = "crate::exact::rat::serde_str::vec")]
    pub reference: Vec<Rat>,
    /// (alpha, c) with diagonal = alpha * reference + c when the affine fit
    /// is exact across the whole weight space.
    #[serde(with = "crate::exact::rat::serde_str::opt_pair")]
    pub fit: Option<(Rat, Rat)>,
}

pub fn sigma_infinity_diag(chain: &HamiltonianChain, k: usize, m: i64) -> Result<SigmaInfinityReport> {
    let p0 = chain.record(m)?.p0_matrix(k)?;
    let mono = scale_monomial(&p0, m, k, false)?;
    let basis = WeightBasis::new(k);
    let degree = mono.degree_in(Var::Sigma);
    let reference: Vec<Rat> = basis
        .elements
        .iter()
        .map(|lam| {
            lam.parts()
                .iter()
                .map(|&p| rpow(&rint(p as i64), (2 * m + 1) as usize))
                .sum()
        })
        .collect();
    if degree == 0 {
        // K_0 has no sigma dependence at all; report a zero matrix
        return Ok(SigmaInfinityReport {
            k,
            m,
            sigma_degree: 0,
            diagonal: vec![Rat::zero(); basis.dim()],
            reference,
            fit: None,
        });
    }
    let lead = mono.coeff_of(Var::Sigma, degree);
    if !lead.is_diagonal() {
        return Err(crate::tripwire!(
            "sigma_infinity: leading sigma^{} matrix of K_{} at weight {} is not diagonal in the monomial basis",
            degree,
            m,
            k
        ));
    }
    let diagonal: Vec<Rat> = (0..basis.dim())
        .map(|i| {
            lead[(i, i)]
                .as_constant()
                .ok_or_else(|| crate::tripwire!("sigma_infinity: non-constant diagonal entry"))
        })
        .collect::<Result<_>>()?;
    // affine fit diagonal = alpha * reference + c from two distinct points,
    // verified across the space
    let mut fit = None;
    'outer: for i in 0..diagonal.len() {
        for j in (i + 1)..diagonal.len() {
            if reference[i] != reference[j] {
                let alpha = (&diagonal[i] - &diagonal[j]) / (&reference[i] - &reference[j]);
                let c = &diagonal[i] - &(&alpha * &reference[i]);
                if diagonal
                    .iter()
                    .zip(&reference)
                    .all(|(d, r)| d == &(&(&alpha * r) + &c))
                {
                    fit = Some((alpha, c));
                }
                break 'outer;
            }
        }
    }
    Ok(SigmaInfinityReport {
        k,
        m,
        sigma_degree: degree,
        diagonal,
        reference,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat;
    use crate::hamiltonians::build_chain;
    use std::sync::OnceLock;

    fn chain() -> &'static HamiltonianChain {
        static CHAIN: OnceLock<HamiltonianChain> = OnceLock::new();
        CHAIN.get_or_init(|| build_chain(3, 6, &[1, 2]).unwrap())
    }

    #[test]
    fn scaled_low_operators() {
        // K_{-1} = V0 identity
        let op = scale(chain(), -1, 3, true).unwrap();
        let n = WeightBasis::new(3).dim();
        let mut expect = ExactMatrix::zero(n, n);
        for i in 0..n {
            expect[(i, i)] = ExactPoly::var(Var::V0);
        }
        assert_eq!(op.matrix, expect);
        // K_0 diagonal with |lambda| - 1/24 + V0^2/2
        for k in 0..=4usize {
            let op = scale(chain(), 0, k, true).unwrap();
            let n = WeightBasis::new(k).dim();
            let mut expect = ExactMatrix::zero(n, n);
            for i in 0..n {
                let mut e = ExactPoly::constant(rint(k as i64) - rat(1, 24));
                e.add_term(rat(1, 2), &[(Var::V0, 2)]);
                expect[(i, i)] = e;
            }
            assert_eq!(op.matrix, expect, "K_0 at weight {}", k);
        }
    }

    #[test]
    fn k1_on_weight_two() {
        // hand-computed 2x2 in the Schur basis [(2), (1,1)] at V0 = 0:
        // [[1 + 1201 sigma/2880, -sigma/4], [-sigma/4, -1 + 1201 sigma/2880]]
        let op = scale(chain(), 1, 2, false).unwrap();
        let s = ExactPoly::var(Var::Sigma);
        let mut e00 = ExactPoly::one();
        e00 += s.scale(&rat(1201, 2880));
        let mut e11 = ExactPoly::constant(rint(-1));
        e11 += s.scale(&rat(1201, 2880));
        let off = s.scale(&rat(-1, 4));
        assert_eq!(op.matrix[(0, 0)], e00);
        assert_eq!(op.matrix[(1, 1)], e11);
        assert_eq!(op.matrix[(0, 1)], off);
        assert_eq!(op.matrix[(1, 0)], off);
    }

    #[test]
    fn dispersionless_eigen_examples() {
        // m = -1: V0 for every lambda
        assert_eq!(
            dispersionless_eigen(-1, &Partition::new(vec![3, 1])),
            ExactPoly::var(Var::V0)
        );
        // m = 0, lambda = (1): V0^2/2 + 1 - 1/24
        let mut expect = ExactPoly::monomial(rat(1, 2), &[(Var::V0, 2)]);
        expect += ExactPoly::constant(rint(1) - rat(1, 24));
        assert_eq!(dispersionless_eigen(0, &Partition::new(vec![1])), expect);
        // m = 1, empty: V0^3/6 - V0/24
        let mut expect = ExactPoly::monomial(rat(1, 6), &[(Var::V0, 3)]);
        expect.add_term(rat(-1, 24), &[(Var::V0, 1)]);
        assert_eq!(dispersionless_eigen(1, &Partition::empty()), expect);
    }

    #[test]
    fn mstar_values() {
        assert_eq!(mstar_search(0).unwrap(), 0);
        assert_eq!(mstar_search(1).unwrap(), 0);
        for k in 2..=5 {
            assert_eq!(mstar_search(k).unwrap(), 1, "k = {}", k);
        }
        assert_eq!(mstar_search(6).unwrap(), 2);
        // the weight-6 witness pair: P_2 agrees, P_3 does not; in terms of
        // content cubes the split is 27 vs 9
        let a = Partition::new(vec![4, 1, 1]);
        let b = Partition::new(vec![3, 3]);
        assert_eq!(
            crate::partitions::p_function(2, &a),
            crate::partitions::p_function(2, &b)
        );
        assert_ne!(
            crate::partitions::p_function(3, &a),
            crate::partitions::p_function(3, &b)
        );
        let cubes = |p: &Partition| p.contents().iter().map(|c| c.pow(3)).sum::<i64>();
        assert_eq!(cubes(&a), 27);
        assert_eq!(cubes(&b), 9);
    }

    #[test]
    fn deformed_schur_weight_two_series() {
        let all = deformed_schur(chain(), 2, 8, &[1]).unwrap();
        let basis = WeightBasis::new(2);
        let i11 = basis
            .index_of(&Partition::new(vec![1, 1]))
            .unwrap();
        let r2 = &all[0];
        assert_eq!(r2.lambda, Partition::new(vec![2]));
        // -sigma/8 + sigma^3/512 - sigma^5/16384 + 5 sigma^7/2097152
        assert_eq!(r2.coeffs[1][i11], rat(-1, 8));
        assert_eq!(r2.coeffs[3][i11], rat(1, 512));
        assert_eq!(r2.coeffs[5][i11], rat(-1, 16384));
        assert_eq!(r2.coeffs[7][i11], rat(5, 2097152));
        for t in [0, 2, 4, 6, 8] {
            assert_eq!(r2.coeffs[t][i11], rint(0), "even order {}", t);
        }
        // normalization: <r_lambda, s_lambda> = 1
        let i2 = basis.index_of(&Partition::new(vec![2])).unwrap();
        assert_eq!(r2.coeffs[0][i2], rint(1));
        for t in 1..=8 {
            assert_eq!(r2.coeffs[t][i2], rint(0));
        }
    }

    #[test]
    fn deformed_schur_weight_three_table() {
        let all = deformed_schur(chain(), 3, 4, &[1]).unwrap();
        let basis = WeightBasis::new(3);
        let i3 = basis.index_of(&Partition::new(vec![3])).unwrap();
        let i21 = basis.index_of(&Partition::new(vec![2, 1])).unwrap();
        let i111 = basis.index_of(&Partition::new(vec![1, 1, 1])).unwrap();
        // r_(3) row of the reference table
        let r3 = all.iter().find(|r| r.lambda == Partition::new(vec![3])).unwrap();
        assert_eq!(r3.coeffs[1][i21], rat(-2, 9));
        assert_eq!(r3.coeffs[2][i21], rat(1, 324));
        assert_eq!(r3.coeffs[3][i21], rat(43, 5832));
        assert_eq!(r3.coeffs[4][i21], rat(193, 559872));
        assert_eq!(r3.coeffs[1][i111], rat(5, 72));
        assert_eq!(r3.coeffs[2][i111], rat(2, 81));
        assert_eq!(r3.coeffs[3][i111], rat(-893, 373248));
        assert_eq!(r3.coeffs[4][i111], rat(-115, 69984));
        // r_(2,1) row
        let r21 = all
            .iter()
            .find(|r| r.lambda == Partition::new(vec![2, 1]))
            .unwrap();
        assert_eq!(r21.coeffs[1][i3], rat(2, 9));
        assert_eq!(r21.coeffs[2][i3], rat(1, 81));
        assert_eq!(r21.coeffs[3][i3], rat(-2, 729));
        assert_eq!(r21.coeffs[4][i3], rat(-1, 729));
        assert_eq!(r21.coeffs[1][i111], rat(-2, 9));
        assert_eq!(r21.coeffs[2][i111], rat(1, 81));
        assert_eq!(r21.coeffs[3][i111], rat(2, 729));
        assert_eq!(r21.coeffs[4][i111], rat(-1, 729));
    }

    #[test]
    fn deformed_schur_weight_four_table() {
        let all = deformed_schur(chain(), 4, 3, &[1]).unwrap();
        let basis = WeightBasis::new(4);
        let idx = |parts: &[u32]| basis.index_of(&Partition::new(parts.to_vec())).unwrap();
        let row = |parts: &[u32]| {
            all.iter()
                .find(|r| r.lambda == Partition::new(parts.to_vec()))
                .unwrap()
        };
        let r4 = row(&[4]);
        assert_eq!(r4.coeffs[1][idx(&[3, 1])], rat(-5, 16));
        assert_eq!(r4.coeffs[2][idx(&[3, 1])], rat(1, 192));
        assert_eq!(r4.coeffs[3][idx(&[3, 1])], rat(6055, 331776));
        assert_eq!(r4.coeffs[1][idx(&[2, 2])], rat(-5, 72));
        assert_eq!(r4.coeffs[2][idx(&[2, 2])], rat(59, 2592));
        assert_eq!(r4.coeffs[3][idx(&[2, 2])], rat(4715, 1492992));
        assert_eq!(r4.coeffs[1][idx(&[2, 1, 1])], rat(1, 8));
        assert_eq!(r4.coeffs[2][idx(&[2, 1, 1])], rat(37, 768));
        assert_eq!(r4.coeffs[3][idx(&[2, 1, 1])], rat(-727, 82944));
        assert_eq!(r4.coeffs[1][idx(&[1, 1, 1, 1])], rat(-7, 144));
        assert_eq!(r4.coeffs[2][idx(&[1, 1, 1, 1])], rat(-95, 2592));
        assert_eq!(r4.coeffs[3][idx(&[1, 1, 1, 1])], rat(-9119, 2985984));
        let r31 = row(&[3, 1]);
        assert_eq!(r31.coeffs[1][idx(&[4])], rat(5, 16));
        assert_eq!(r31.coeffs[2][idx(&[4])], rat(1, 32));
        assert_eq!(r31.coeffs[3][idx(&[4])], rat(-7, 4096));
        assert_eq!(r31.coeffs[1][idx(&[2, 2])], rat(-1, 8));
        assert_eq!(r31.coeffs[2][idx(&[2, 2])], rat(-1, 32));
        assert_eq!(r31.coeffs[3][idx(&[2, 2])], rat(-13, 2048));
        assert_eq!(r31.coeffs[1][idx(&[2, 1, 1])], rat(-5, 16));
        assert_eq!(r31.coeffs[2][idx(&[2, 1, 1])], rat(3, 64));
        assert_eq!(r31.coeffs[3][idx(&[2, 1, 1])], rat(35, 4096));
        assert_eq!(r31.coeffs[1][idx(&[1, 1, 1, 1])], rat(1, 8));
        assert_eq!(r31.coeffs[2][idx(&[1, 1, 1, 1])], rat(11, 256));
        assert_eq!(r31.coeffs[3][idx(&[1, 1, 1, 1])], rat(-7, 1024));
        let r22 = row(&[2, 2]);
        assert_eq!(r22.coeffs[1][idx(&[4])], rat(5, 72));
        assert_eq!(r22.coeffs[2][idx(&[4])], rat(37, 1296));
        assert_eq!(r22.coeffs[3][idx(&[4])], rat(-133, 46656));
        assert_eq!(r22.coeffs[1][idx(&[3, 1])], rat(1, 8));
        assert_eq!(r22.coeffs[2][idx(&[3, 1])], rat(-1, 48));
        assert_eq!(r22.coeffs[3][idx(&[3, 1])], rat(-31, 5184));
        assert_eq!(r22.coeffs[1][idx(&[2, 1, 1])], rat(-1, 8));
        assert_eq!(r22.coeffs[2][idx(&[2, 1, 1])], rat(-1, 48));
        assert_eq!(r22.coeffs[3][idx(&[2, 1, 1])], rat(31, 5184));
        assert_eq!(r22.coeffs[1][idx(&[1, 1, 1, 1])], rat(-5, 72));
        assert_eq!(r22.coeffs[2][idx(&[1, 1, 1, 1])], rat(37, 1296));
        assert_eq!(r22.coeffs[3][idx(&[1, 1, 1, 1])], rat(133, 46656));
    }

    #[test]
    fn weight_six_uses_m_star_two() {
        // the recursion operator at weight 6 is K_2; its sigma^0 slice must
        // be the dispersionless diagonal, which pins the backfilled vacuum
        // constant of h_2 (7 hbar^2/5760 plus eps-terms) against the
        // eigenvalue formula
        let all = deformed_schur(chain(), 6, 2, &[1, 2]).unwrap();
        assert_eq!(all.len(), 11);
        // orthogonality through sigma^2 for a degenerate-P2 pair
        let basis = WeightBasis::new(6);
        let a = all
            .iter()
            .find(|r| r.lambda == Partition::new(vec![4, 1, 1]))
            .unwrap();
        let b = all
            .iter()
            .find(|r| r.lambda == Partition::new(vec![3, 3]))
            .unwrap();
        for t in 0..=2usize {
            let mut dot = Rat::zero();
            for j in 0..=t {
                for nu in 0..basis.dim() {
                    dot += &a.coeffs[j][nu] * &b.coeffs[t - j][nu];
                }
            }
            assert_eq!(dot, Rat::zero(), "order {}", t);
        }
    }

    #[test]
    fn weight_two_order_one_system_via_solve_linear() {
        // the first deformed-Schur correction as a literal linear solve:
        // (F0((2)) - F0((1,1))) x = <K1^[1] s_(2), s_(1,1)> gives x = -1/8
        use crate::exact::matrix::solve_linear;
        let op = scale(chain(), 1, 2, true).unwrap();
        let slice = op.matrix.coeff_of(Var::Sigma, 1);
        let gap = &dispersionless_eigen(1, &Partition::new(vec![2]))
            - &dispersionless_eigen(1, &Partition::new(vec![1, 1]));
        let mut a = ExactMatrix::zero(1, 1);
        a[(0, 0)] = gap;
        let x = solve_linear(&a, &[slice[(1, 0)].clone()]).unwrap();
        assert_eq!(
            x[0].as_poly().unwrap(),
            &ExactPoly::constant(rat(-1, 8))
        );
    }

    #[test]
    fn eigen_series_reduce_to_dispersionless_at_sigma_zero() {
        for k in 0..=4usize {
            let all = deformed_schur(chain(), k, 3, &[-1, 0, 1, 2]).unwrap();
            for r in &all {
                for (&m, series) in &r.eigen {
                    assert_eq!(
                        series[0],
                        dispersionless_eigen(m, &r.lambda),
                        "m = {}, lambda = {}",
                        m,
                        r.lambda
                    );
                }
            }
        }
    }

    #[test]
    fn spectral_curve_examples() {
        // k = 1, m = 1: rho - 241 sigma / 2880
        let c = spectral_curve(chain(), 1, 1).unwrap();
        let mut expect = ExactPoly::var(Var::Rho);
        expect.add_term(rat(-241, 2880), &[(Var::Sigma, 1)]);
        assert_eq!(c.poly, expect);
        // k = 0, m = 1: rho - sigma/2880
        let c = spectral_curve(chain(), 0, 1).unwrap();
        let mut expect = ExactPoly::var(Var::Rho);
        expect.add_term(rat(-1, 2880), &[(Var::Sigma, 1)]);
        assert_eq!(c.poly, expect);
        // k = 2, m = 1: rho-discriminant proportional to 16 + sigma^2,
        // branch points at +-4i (complex conjugate, as self-adjointness
        // requires); the reference series expansion pins the + sign
        let c = spectral_curve(chain(), 2, 1).unwrap();
        assert_eq!(c.poly.degree_in(Var::Rho), 2);
        let b = c.poly.coeff_of(Var::Rho, 1);
        let c0 = c.poly.coeff_of(Var::Rho, 0);
        // disc = b^2 - 4c
        let disc = &(&b * &b) - &c0.scale(&rint(4));
        let mut expect = ExactPoly::constant(rint(4));
        expect.add_term(rat(1, 4), &[(Var::Sigma, 2)]);
        assert_eq!(disc, expect);
    }

    #[test]
    fn genus_rhs_table() {
        let expected = [0, 0, 0, 1, 4, 9, 21, 37, 69, 113, 187];
        for (k, &g) in expected.iter().enumerate() {
            assert_eq!(conjecture_rhs(k).unwrap(), g, "k = {}", k);
        }
    }

    #[test]
    fn sigma_infinity_m1() {
        // weight 1 has a single basis element: no two reference points, so
        // only the raw diagonal is reported
        let rep = sigma_infinity_diag(chain(), 1, 1).unwrap();
        assert_eq!(rep.diagonal, vec![rat(1, 12) + rat(1, 2880)]);
        assert!(rep.fit.is_none());
        for k in 2..=5usize {
            let rep = sigma_infinity_diag(chain(), k, 1).unwrap();
            assert_eq!(rep.sigma_degree, 1);
            // entries (1/12) sum lambda_i^3 + 1/2880
            let (alpha, c) = rep.fit.clone().expect("affine fit must be exact");
            assert_eq!(alpha, rat(1, 12));
            assert_eq!(c, rat(1, 2880));
        }
        // K_0 is sigma-independent
        let rep = sigma_infinity_diag(chain(), 3, 0).unwrap();
        assert_eq!(rep.sigma_degree, 0);
    }
}
