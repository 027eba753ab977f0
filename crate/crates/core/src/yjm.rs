//! Class algebra of the symmetric group, Young-Jucys-Murphy power sums, the
//! Frobenius map, and exact verification of the generating-function identity
//! relating them to the dispersionless Hamiltonians.
//!
//! Two routes are kept side by side: explicit group-algebra multiplication
//! (brute force over all k! permutations, k <= 6) and the content-eigenvalue
//! route through characters (any k). The brute force fixes the sign
//! convention: symmetric functions of the YJM elements act on the character
//! chi_lambda with eigenvalue f evaluated at the contents j - i (arms
//! positive), as the Frobenius-coordinate form of the appendix says; the
//! displayed "i - j" there is conjugate to it.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::matrix::ExactMatrix;
use crate::exact::poly::{ExactPoly, Var};
use crate::exact::rat::{factorial, rint, rpow, Rat};
use crate::exact::series::ExactSeries;
use crate::fock::WeightBasis;
use crate::hamiltonians::DispersionlessTower;
use crate::partitions::{
    character, enumerate_partitions, power_sum_via_faulhaber, s_series, Partition,
};
use crate::spectral::scale_monomial;

// ---- The symmetric group and its group algebra (brute force, k <= 6) ----

/// All elements of S_k with composition tables implied by index lookup.
pub struct SymmetricGroup {
    pub k: usize,
    pub elems: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

pub const BRUTE_FORCE_LIMIT: usize = 6;

impl SymmetricGroup {
    pub fn new(k: usize) -> Result<SymmetricGroup> {
        if k > BRUTE_FORCE_LIMIT {
            return Err(Error::Bounds(format!(
                "brute-force group algebra is capped at k = {}, got {}",
                BRUTE_FORCE_LIMIT, k
            )));
        }
        let mut elems = vec![Vec::new()];
        for i in 0..k {
            let mut next = Vec::new();
            for perm in &elems {
                for pos in 0..=i {
                    let mut p = perm.clone();
                    p.insert(pos, i as u8);
                    next.push(p);
                }
            }
            elems = next;
        }
        elems.sort();
        let index = elems
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        Ok(SymmetricGroup { k, elems, index })
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn index_of(&self, perm: &[u8]) -> usize {
        self.index[perm]
    }

    /// (a o b)(i) = a[b[i]].
    pub fn compose(&self, a: usize, b: usize) -> usize {
        let pa = &self.elems[a];
        let pb = &self.elems[b];
        let c: Vec<u8> = (0..self.k).map(|i| pa[pb[i] as usize]).collect();
        self.index[&c]
    }

    pub fn cycle_type(&self, a: usize) -> Partition {
        let perm = &self.elems[a];
        let mut seen = vec![false; self.k];
        let mut parts = Vec::new();
        for start in 0..self.k {
            if seen[start] {
                continue;
            }
            let mut len = 0u32;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = perm[cur] as usize;
                len += 1;
            }
            parts.push(len);
        }
        Partition::new(parts)
    }

    /// The transposition (i j), zero-based.
    pub fn transposition(&self, i: usize, j: usize) -> usize {
        let mut p: Vec<u8> = (0..self.k as u8).collect();
        p.swap(i, j);
        self.index[&p]
    }
}

/// A group-algebra element as a dense coefficient vector.
pub type GroupAlgebra = Vec<Rat>;

/// Multiply a sparse element (support list) by a dense one.
fn sparse_mul(
    group: &SymmetricGroup,
    sparse: &[(usize, Rat)],
    dense: &GroupAlgebra,
) -> GroupAlgebra {
    let mut out = vec![Rat::zero(); group.order()];
    for (b, coeff) in dense.iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        for (a, ca) in sparse {
            let c = group.compose(*a, b);
            out[c] += ca * coeff;
        }
    }
    out
}

fn dense_mul(group: &SymmetricGroup, a: &GroupAlgebra, b: &GroupAlgebra) -> GroupAlgebra {
    let mut out = vec![Rat::zero(); group.order()];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            out[group.compose(i, j)] += ca * cb;
        }
    }
    out
}

/// A central element expressed over the class-sum basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassAlgebraElement {
    pub k: usize,
    pub coeffs: BTreeMap<Partition, String>,
}

impl ClassAlgebraElement {
    fn from_dense(group: &SymmetricGroup, v: &GroupAlgebra) -> Result<ClassAlgebraElement> {
        let mut per_class: BTreeMap<Partition, Rat> = BTreeMap::new();
        for (i, c) in v.iter().enumerate() {
            let ty = group.cycle_type(i);
            match per_class.get(&ty) {
                None => {
                    per_class.insert(ty, c.clone());
                }
                Some(existing) => {
                    if existing != c {
                        return Err(crate::tripwire!(
                            "group-algebra element is not a class function (class {})",
                            ty
                        ));
                    }
                }
            }
        }
        Ok(ClassAlgebraElement {
            k: group.k,
            coeffs: per_class
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(p, c)| (p, crate::exact::rat::rat_display(&c)))
                .collect(),
        })
    }

    pub fn coeff(&self, class: &Partition) -> Rat {
        self.coeffs
            .get(class)
            .map(|s| crate::exact::rat::serde_str::parse(s).expect("stored rational"))
            .unwrap_or_else(Rat::zero)
    }
}

/// The YJM power sum J_1^m + ... + J_k^m by explicit group-algebra
/// multiplication (k <= 6). J_i^0 is the identity, so the m = 0 value is
/// k times the identity class. The result must be central.
pub fn yjm_powersum_brute(k: usize, m: usize) -> Result<ClassAlgebraElement> {
    let group = SymmetricGroup::new(k)?;
    let mut total = vec![Rat::zero(); group.order()];
    let identity: Vec<u8> = (0..k as u8).collect();
    let id_idx = group.index_of(&identity);
    for i in 0..k {
        // J_(i+1) = sum of transpositions (j, i) for j < i
        let sparse: Vec<(usize, Rat)> = (0..i)
            .map(|j| (group.transposition(j, i), Rat::one()))
            .collect();
        let mut v = vec![Rat::zero(); group.order()];
        v[id_idx] = Rat::one();
        for _ in 0..m {
            v = sparse_mul(&group, &sparse, &v);
        }
        for (t, c) in total.iter_mut().zip(v) {
            *t += c;
        }
    }
    let elt = ClassAlgebraElement::from_dense(&group, &total)?;
    // centrality: commutation with every class sum
    for class in enumerate_partitions(k) {
        let mut class_sum = vec![Rat::zero(); group.order()];
        for i in 0..group.order() {
            if group.cycle_type(i) == class {
                class_sum[i] = Rat::one();
            }
        }
        let left = dense_mul(&group, &total, &class_sum);
        let right = dense_mul(&group, &class_sum, &total);
        if left != right {
            return Err(crate::tripwire!(
                "YJM power sum p_{} fails to commute with the class sum {} in S_{}",
                m,
                class,
                k
            ));
        }
    }
    Ok(elt)
}

/// Content power sum: the eigenvalue of J_1^m + ... + J_k^m on the character
/// chi_lambda. Computed both directly over cells (contents j - i) and via
/// Frobenius coordinates with Faulhaber polynomials; a mismatch is fatal.
pub fn yjm_eigen(lambda: &Partition, m: usize) -> Result<Rat> {
    // route 1: cells
    let direct: Rat = lambda
        .contents()
        .iter()
        .map(|&c| {
            if m == 0 {
                Rat::one()
            } else {
                rpow(&rint(c), m)
            }
        })
        .sum();
    // route 2: Frobenius coordinates and Faulhaber sums:
    // sum_i [delta_(m,0) + sum_{l<=a_i} l^m + (-1)^m sum_{l<=b_i} l^m]
    let fc = lambda.frobenius();
    let mut via_frobenius = Rat::zero();
    let sign = if m % 2 == 0 { Rat::one() } else { -Rat::one() };
    for i in 0..fc.diagonal_len() {
        if m == 0 {
            via_frobenius += Rat::one();
        }
        via_frobenius += power_sum_via_faulhaber(m, fc.a[i] as i64);
        via_frobenius += &sign * power_sum_via_faulhaber(m, fc.b[i] as i64);
    }
    if direct != via_frobenius {
        return Err(crate::tripwire!(
            "yjm_eigen: cell and Frobenius routes disagree for {} at m = {}",
            lambda,
            m
        ));
    }
    Ok(direct)
}

/// Matrix of multiplication by J_1^m + ... + J_k^m on the class-sum basis,
/// via the eigenvalue route:
/// M[rho][nu] = (|C_nu|/k!) sum_lambda theta_lambda chi_lambda(nu) chi_lambda(rho).
pub fn yjm_multiplication_matrix(k: usize, m: usize) -> Result<Vec<Vec<Rat>>> {
    let partitions = enumerate_partitions(k);
    let n = partitions.len();
    let kfact = factorial(k);
    let thetas: Vec<Rat> = partitions
        .iter()
        .map(|lam| yjm_eigen(lam, m))
        .collect::<Result<_>>()?;
    let chi: Vec<Vec<i64>> = partitions
        .iter()
        .map(|lam| {
            partitions
                .iter()
                .map(|nu| character(lam, nu))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let mut out = vec![vec![Rat::zero(); n]; n];
    for (rho, row) in out.iter_mut().enumerate() {
        for (nu, entry) in row.iter_mut().enumerate() {
            let mut s = Rat::zero();
            for (lam, theta) in thetas.iter().enumerate() {
                if theta.is_zero() {
                    continue;
                }
                s += theta * rint(chi[lam][nu]) * rint(chi[lam][rho]);
            }
            *entry = s * partitions[nu].class_size() / &kfact;
        }
    }
    Ok(out)
}

/// The Frobenius map as a weight-space matrix: the class sum C_nu goes to
/// (|C_nu|/k!) T_nu, so conjugation by Phi is conjugation by this diagonal.
fn frobenius_diagonal(k: usize) -> Vec<Rat> {
    WeightBasis::new(k)
        .elements
        .iter()
        .map(|nu| nu.class_size() / factorial(k))
        .collect()
}

/// Defect report of the Appendix identity on the weight-k space through the
/// given z order (in the scaled form: V0 = U0/sqrt(hbar), matrices over
/// Q[V0], z-series coefficients).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropA1Report {
    pub k: usize,
    pub z_order: usize,
    /// Nonzero entries of LHS - RHS per z power: (z, row, col, value-text).
    pub defects: Vec<(usize, usize, usize, String)>,
}

impl PropA1Report {
    pub fn is_zero(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Assemble both sides of the identity
///   1 + sum_m z^(m+2) K_m^[0] =
///   e^(z V0) ( (z/2)/sinh(z/2) + z^2 S(z) sum_m z^m/m! Phi(p_m(J)) Phi^-1 )
/// on the weight-k space and report the defect through z^z_order.
pub fn verify_prop_a1(
    tower: &DispersionlessTower,
    k: usize,
    z_order: usize,
) -> Result<PropA1Report> {
    let order = z_order + 1; // include the z^z_order coefficient
    let n = WeightBasis::new(k).dim();

    // LHS: identity + scaled tower operators
    let mut lhs: Vec<ExactMatrix> = vec![ExactMatrix::zero(n, n); order];
    lhs[0] = ExactMatrix::identity(n);
    for m in -1..=(z_order as i64 - 2) {
        let power = (m + 2) as usize;
        if power >= order {
            break;
        }
        let scaled = scale_monomial(tower.op(m, k)?, m, k, true)?;
        lhs[power] = &lhs[power] + &scaled;
    }

    // RHS piece 1: beta series times identity
    let beta = s_series(order).reciprocal()?;
    let mut rhs: Vec<ExactMatrix> = beta
        .coeffs()
        .iter()
        .map(|c| ExactMatrix::identity(n).scale_poly(c))
        .collect();

    // RHS piece 2: z^2 S(z) sum_m z^m / m! Phi p_m(J) Phi^-1
    let phi = frobenius_diagonal(k);
    let mut sum_ops: Vec<ExactMatrix> = vec![ExactMatrix::zero(n, n); order];
    for m in 0..order.saturating_sub(2) {
        let mult = yjm_multiplication_matrix(k, m)?;
        // conjugate by the Frobenius diagonal: Phi M Phi^-1
        let mut conj = ExactMatrix::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                if mult[i][j].is_zero() {
                    continue;
                }
                conj[(i, j)] =
                    ExactPoly::constant(&phi[i] * &mult[i][j] / &phi[j]);
            }
        }
        let c = Rat::one() / factorial(m);
        sum_ops[m] = conj.scale(&c);
    }
    // multiply the matrix series by z^2 S(z)
    let s = s_series(order);
    let mut piece2: Vec<ExactMatrix> = vec![ExactMatrix::zero(n, n); order];
    for (i, op) in sum_ops.iter().enumerate() {
        if op.is_zero() {
            continue;
        }
        for j in 0..order {
            if i + j + 2 >= order {
                break;
            }
            let c = s.coeff(j);
            if c.is_zero() {
                continue;
            }
            piece2[i + j + 2] = &piece2[i + j + 2] + &op.scale_poly(c);
        }
    }
    for (r, p) in rhs.iter_mut().zip(&piece2) {
        *r = &*r + p;
    }

    // multiply by e^(z V0)
    let expv0 = ExactSeries::from_fn(Var::Z, order, |t| {
        ExactPoly::monomial(Rat::one() / factorial(t), &[(Var::V0, t as u16)])
    });
    let mut rhs_full: Vec<ExactMatrix> = vec![ExactMatrix::zero(n, n); order];
    for (i, op) in rhs.iter().enumerate() {
        if op.is_zero() {
            continue;
        }
        for j in 0..order - i {
            let c = expv0.coeff(j);
            if c.is_zero() {
                continue;
            }
            rhs_full[i + j] = &rhs_full[i + j] + &op.scale_poly(c);
        }
    }

    let mut defects = Vec::new();
    for z in 0..order {
        let diff = &lhs[z] - &rhs_full[z];
        for i in 0..n {
            for j in 0..n {
                if !diff[(i, j)].is_zero() {
                    defects.push((z, i, j, diff[(i, j)].to_text()));
                }
            }
        }
    }
    Ok(PropA1Report {
        k,
        z_order,
        defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat;
    use crate::fock::schur_vector;
    use crate::hamiltonians::dispersionless_tower;

    #[test]
    fn group_basics() {
        let g = SymmetricGroup::new(3).unwrap();
        assert_eq!(g.order(), 6);
        let t01 = g.transposition(0, 1);
        let t12 = g.transposition(1, 2);
        // (01)(12) has order 3
        let c = g.compose(t01, t12);
        assert_eq!(g.cycle_type(c), Partition::new(vec![3]));
        assert!(SymmetricGroup::new(7).is_err());
    }

    #[test]
    fn yjm_brute_small_cases() {
        // m = 1, k = 3: the class sum of transpositions with coefficient 1
        let z1 = yjm_powersum_brute(3, 1).unwrap();
        assert_eq!(z1.coeff(&Partition::new(vec![2, 1])), rint(1));
        assert_eq!(z1.coeff(&Partition::new(vec![3])), rint(0));
        assert_eq!(z1.coeff(&Partition::new(vec![1, 1, 1])), rint(0));
        // m = 0: k times the identity class
        for k in 1..=4 {
            let z0 = yjm_powersum_brute(k, 0).unwrap();
            assert_eq!(z0.coeff(&Partition::new(vec![1; k])), rint(k as i64));
            assert_eq!(z0.coeffs.len(), 1);
        }
        // m = 2, k = 3: J_2^2 + J_3^2 = identity + (identity + 3-cycles)
        let z2 = yjm_powersum_brute(3, 2).unwrap();
        assert_eq!(z2.coeff(&Partition::new(vec![1, 1, 1])), rint(3));
        assert_eq!(z2.coeff(&Partition::new(vec![3])), rint(1));
        assert_eq!(z2.coeff(&Partition::new(vec![2, 1])), rint(0));
    }

    #[test]
    fn eigen_convention_matches_brute_force() {
        // eigenvalue of a central element Z on the irreducible lambda:
        // sum_nu coeff_nu |C_nu| chi_lambda(nu) / dim(lambda)
        for k in 1..=5usize {
            let id = Partition::new(vec![1; k]);
            for m in 0..=4usize {
                let z = yjm_powersum_brute(k, m).unwrap();
                for lam in enumerate_partitions(k) {
                    let dim = rint(character(&lam, &id).unwrap());
                    let mut ev = Rat::zero();
                    for nu in enumerate_partitions(k) {
                        let c = z.coeff(&nu);
                        if c.is_zero() {
                            continue;
                        }
                        ev += c * nu.class_size() * rint(character(&lam, &nu).unwrap());
                    }
                    ev /= dim;
                    assert_eq!(
                        ev,
                        yjm_eigen(&lam, m).unwrap(),
                        "k = {}, m = {}, lambda = {}",
                        k,
                        m,
                        lam
                    );
                }
            }
        }
    }

    #[test]
    fn eigen_simple_values() {
        // single off-diagonal cell of (2) has content +1
        assert_eq!(yjm_eigen(&Partition::new(vec![2]), 1).unwrap(), rint(1));
        assert_eq!(yjm_eigen(&Partition::new(vec![1, 1]), 1).unwrap(), rint(-1));
        // self-conjugate partitions kill odd power sums
        for lam in [
            Partition::new(vec![1]),
            Partition::new(vec![2, 1]),
            Partition::new(vec![3, 2, 1]),
            Partition::new(vec![2, 2]),
        ] {
            if lam.conjugate() == lam {
                for m in [1, 3, 5] {
                    assert_eq!(yjm_eigen(&lam, m).unwrap(), rint(0), "{} m={}", lam, m);
                }
            }
        }
    }

    #[test]
    fn multiplication_matrix_agrees_with_brute_force() {
        for k in 1..=5usize {
            let group = SymmetricGroup::new(k).unwrap();
            let partitions = enumerate_partitions(k);
            for m in 0..=4usize {
                let fast = yjm_multiplication_matrix(k, m).unwrap();
                // brute force: multiply the dense power sum by each class sum
                let z = yjm_powersum_brute(k, m).unwrap();
                let mut dense = vec![Rat::zero(); group.order()];
                for (i, d) in dense.iter_mut().enumerate() {
                    *d = z.coeff(&group.cycle_type(i));
                }
                for (nu_idx, nu) in partitions.iter().enumerate() {
                    let mut class_sum = vec![Rat::zero(); group.order()];
                    for i in 0..group.order() {
                        if group.cycle_type(i) == *nu {
                            class_sum[i] = Rat::one();
                        }
                    }
                    let product = dense_mul(&group, &dense, &class_sum);
                    // read off the coefficient of each class sum
                    for (rho_idx, rho) in partitions.iter().enumerate() {
                        let rep = (0..group.order())
                            .find(|&i| group.cycle_type(i) == *rho)
                            .unwrap();
                        assert_eq!(
                            product[rep], fast[rho_idx][nu_idx],
                            "k={} m={} entry ({}, {})",
                            k, m, rho, nu
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_at_the_cap() {
        // k = 6 (720 elements) is the largest brute-force group; the power
        // sum must be central there and agree with the eigen route
        let z = yjm_powersum_brute(6, 3).unwrap();
        let fast = yjm_multiplication_matrix(6, 3).unwrap();
        let partitions = enumerate_partitions(6);
        // multiplication by z on the identity class sum reads off column of
        // the identity class: entries are the class coefficients themselves
        let id_idx = partitions
            .iter()
            .position(|p| *p == Partition::new(vec![1; 6]))
            .unwrap();
        for (rho_idx, rho) in partitions.iter().enumerate() {
            assert_eq!(
                fast[rho_idx][id_idx],
                z.coeff(rho),
                "class {} of S_6",
                rho
            );
        }
    }

    #[test]
    fn frobenius_sends_characters_to_schur() {
        // Phi(chi_lambda) = s_lambda(q/sqrt hbar): with chi_lambda as the
        // class-algebra element sum_nu chi(nu) C_nu, the image has T_nu
        // coefficient chi(nu) |C_nu| / k!
        for k in 1..=6usize {
            let basis = WeightBasis::new(k);
            for lam in &basis.elements {
                let schur = schur_vector(lam).unwrap();
                for (i, nu) in basis.elements.iter().enumerate() {
                    let image = rint(character(lam, nu).unwrap()) * nu.class_size()
                        / factorial(k);
                    assert_eq!(image, schur[i], "lambda = {}, nu = {}", lam, nu);
                }
            }
        }
    }

    #[test]
    fn auxiliary_exponential_identity() {
        // e^(z(a+1/2)) - e^(-z(b+1/2)) =
        //   2 sinh(z/2) [ (e^(az)-1)/(1-e^(-z)) + (e^(-bz)-1)/(1-e^z) + 1 ]
        // through z^10 for a, b in 0..=4
        let order = 11;
        let exp_series = |c: Rat| {
            ExactSeries::from_fn(Var::Z, order, |t| {
                ExactPoly::constant(rpow(&c, t) / factorial(t))
            })
        };
        for a in 0..=4i64 {
            for b in 0..=4i64 {
                let lhs = exp_series(rint(a) + rat(1, 2))
                    .sub(&exp_series(-(rint(b) + rat(1, 2))));
                // (e^(az) - 1)/z etc., then divide by (1 -+ e^(-+z))/z
                let num_a = ExactSeries::from_fn(Var::Z, order, |t| {
                    ExactPoly::constant(rpow(&rint(a), t + 1) / factorial(t + 1))
                });
                let den_a = ExactSeries::from_fn(Var::Z, order, |t| {
                    let sign = if t % 2 == 0 { rint(1) } else { rint(-1) };
                    ExactPoly::constant(sign / factorial(t + 1))
                });
                let num_b = ExactSeries::from_fn(Var::Z, order, |t| {
                    ExactPoly::constant(rpow(&rint(-b), t + 1) / factorial(t + 1))
                });
                let den_b = ExactSeries::from_fn(Var::Z, order, |t| {
                    ExactPoly::constant(-Rat::one() / factorial(t + 1))
                });
                let mut bracket = num_a.mul(&den_a.reciprocal().unwrap());
                bracket = bracket.add(&num_b.mul(&den_b.reciprocal().unwrap()));
                bracket = bracket.add(&ExactSeries::one(Var::Z, order));
                // 2 sinh(z/2) = z S(z)
                let rhs = bracket.mul(&s_series(order)).shift_up(1);
                assert_eq!(lhs, rhs, "a = {}, b = {}", a, b);
            }
        }
    }

    #[test]
    fn prop_a1_small_weights() {
        let tower = dispersionless_tower(4, 3).unwrap();
        for k in 0..=3usize {
            let report = verify_prop_a1(&tower, k, 6).unwrap();
            assert!(
                report.is_zero(),
                "defects at weight {}: {:?}",
                k,
                report.defects
            );
        }
    }
}
