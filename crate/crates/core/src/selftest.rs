//! The acceptance suite: every verification the artifact promises, run at
//! fixed bounds with exact (zero-tolerance) comparisons. Each criterion
//! reports pass/fail with a diagnostic; the CLI `selftest` subcommand and the
//! `acceptance` integration test both drive this module.

use std::time::Instant;

use num_traits::Zero;

use crate::error::Result;
use crate::exact::matrix::ExactMatrix;
use crate::exact::poly::{ExactPoly, Var};
use crate::exact::rat::{factorial, rat, rint, Rat};
use crate::fock::{inner_weights, schur_vector, WeightBasis};
use crate::hamiltonians::{
    build_chain, commute_check, dispersionless_tower, lenard_magri, DispersionlessTower,
    HamiltonianChain,
};
use crate::identities::{find_p2_pairs, verify_corollary, verify_lemma34};
use crate::partitions::{q_function, Partition};
use crate::spectral::{
    conjecture_rhs, deformed_schur, dispersionless_eigen, scale, sigma_infinity_diag,
    DeformedSchur,
};
use crate::yjm::verify_prop_a1;

pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct SelftestReport {
    pub results: Vec<CriterionResult>,
    pub elapsed_secs: f64,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    /// One line per criterion, `PASS`/`FAIL` first.
    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                let status = if r.passed { "PASS" } else { "FAIL" };
                if r.detail.is_empty() {
                    format!("{} criterion {:2} - {}", status, r.index, r.name)
                } else {
                    format!(
                        "{} criterion {:2} - {} ({})",
                        status, r.index, r.name, r.detail
                    )
                }
            })
            .collect()
    }
}

/// Shared expensive context for the suite.
pub struct SelftestContext {
    pub tower: DispersionlessTower,
    pub chain: HamiltonianChain,
}

pub const TOWER_MAX_M: i64 = 6;
pub const TOWER_MAX_WEIGHT: usize = 8;
pub const CHAIN_MAX_M: i64 = 3;
pub const CHAIN_WINDOW: usize = 6;

impl SelftestContext {
    pub fn build() -> Result<SelftestContext> {
        Ok(SelftestContext {
            tower: dispersionless_tower(TOWER_MAX_M, TOWER_MAX_WEIGHT)?,
            chain: build_chain(CHAIN_MAX_M, CHAIN_WINDOW, &[1, 2])?,
        })
    }
}

type Check = fn(&SelftestContext) -> std::result::Result<String, String>;

fn err_str<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---- criterion 1: Theorem reproduction (dispersionless eigenvalues) ----

fn dispersionless_eigen_unscaled(m: i64, lambda: &Partition) -> ExactPoly {
    // E_m^[0](lambda; hbar, U0) = sum_j h^j U0^(m+2-j) Q_j(lambda) / (m+2-j)!
    let mut out = ExactPoly::zero();
    for j in 0..=(m + 2) as usize {
        let pow = (m + 2) as usize - j;
        let c = q_function(j, lambda) / factorial(pow);
        if !c.is_zero() {
            out.add_term(c, &[(Var::H, j as u16), (Var::U0, pow as u16)]);
        }
    }
    out
}

fn criterion_1(ctx: &SelftestContext) -> std::result::Result<String, String> {
    let mut checked = 0usize;
    for k in 0..=TOWER_MAX_WEIGHT {
        let basis = WeightBasis::new(k);
        // Schur vectors live over the T basis; move the operators there too
        let mut t_ops = Vec::new();
        for m in -1..=TOWER_MAX_M {
            t_ops.push(err_str(crate::fock::to_t_basis(
                err_str(ctx.tower.op(m, k))?,
                k,
            ))?);
        }
        for lam in &basis.elements {
            let sv = err_str(schur_vector(lam))?;
            let vector: Vec<ExactPoly> = sv
                .iter()
                .map(|c| ExactPoly::constant(c.clone()))
                .collect();
            for m in -1..=TOWER_MAX_M {
                let op = &t_ops[(m + 1) as usize];
                let image = op.apply(&vector);
                let eigen = dispersionless_eigen_unscaled(m, lam);
                for (img, base) in image.iter().zip(&vector) {
                    if img != &(&eigen * base) {
                        return Err(format!(
                            "H_{}^[0] s_{} is not the dispersionless eigenvalue times s",
                            m, lam
                        ));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{} (lambda, m) eigen-pairs exact", checked))
}

// ---- criterion 2: reference deformed-Schur series ----

fn coeff_of(all: &[DeformedSchur], lambda: &[u32], t: usize, nu: &[u32], k: usize) -> Rat {
    let basis = WeightBasis::new(k);
    let r = all
        .iter()
        .find(|r| r.lambda == Partition::new(lambda.to_vec()))
        .expect("row present");
    r.coeffs[t][basis.index_of(&Partition::new(nu.to_vec())).unwrap()].clone()
}

fn criterion_2(ctx: &SelftestContext) -> std::result::Result<String, String> {
    let mut checked = 0usize;
    let mut expect = |got: Rat, want: Rat, what: &str| -> std::result::Result<(), String> {
        if got != want {
            return Err(format!("{}: got {}, expected {}", what, got, want));
        }
        checked += 1;
        Ok(())
    };
    // weight 2 through sigma^7
    let all = err_str(deformed_schur(&ctx.chain, 2, 8, &[]))?;
    let v = |t| coeff_of(&all, &[2], t, &[1, 1], 2);
    expect(v(1), rat(-1, 8), "r_(2) sigma^1")?;
    expect(v(3), rat(1, 512), "r_(2) sigma^3")?;
    expect(v(5), rat(-1, 16384), "r_(2) sigma^5")?;
    expect(v(7), rat(5, 2097152), "r_(2) sigma^7")?;
    for t in [0usize, 2, 4, 6, 8] {
        expect(v(t), rint(0), "r_(2) even order")?;
    }
    // weight 3 through sigma^4: every tabulated rational
    let all = err_str(deformed_schur(&ctx.chain, 3, 4, &[]))?;
    let table3: &[(&[u32], &[u32], usize, Rat)] = &[
        (&[3], &[2, 1], 1, rat(-2, 9)),
        (&[3], &[2, 1], 2, rat(1, 324)),
        (&[3], &[2, 1], 3, rat(43, 5832)),
        (&[3], &[2, 1], 4, rat(193, 559872)),
        (&[3], &[1, 1, 1], 1, rat(5, 72)),
        (&[3], &[1, 1, 1], 2, rat(2, 81)),
        (&[3], &[1, 1, 1], 3, rat(-893, 373248)),
        (&[3], &[1, 1, 1], 4, rat(-115, 69984)),
        (&[2, 1], &[3], 1, rat(2, 9)),
        (&[2, 1], &[3], 2, rat(1, 81)),
        (&[2, 1], &[3], 3, rat(-2, 729)),
        (&[2, 1], &[3], 4, rat(-1, 729)),
        (&[2, 1], &[1, 1, 1], 1, rat(-2, 9)),
        (&[2, 1], &[1, 1, 1], 2, rat(1, 81)),
        (&[2, 1], &[1, 1, 1], 3, rat(2, 729)),
        (&[2, 1], &[1, 1, 1], 4, rat(-1, 729)),
    ];
    for (lam, nu, t, want) in table3 {
        expect(
            coeff_of(&all, lam, *t, nu, 3),
            want.clone(),
            &format!("weight-3 table ({:?}, {:?}, {})", lam, nu, t),
        )?;
    }
    // weight 4 through sigma^3: every tabulated rational
    let all = err_str(deformed_schur(&ctx.chain, 4, 3, &[]))?;
    let table4: &[(&[u32], &[u32], usize, Rat)] = &[
        (&[4], &[3, 1], 1, rat(-5, 16)),
        (&[4], &[3, 1], 2, rat(1, 192)),
        (&[4], &[3, 1], 3, rat(6055, 331776)),
        (&[4], &[2, 2], 1, rat(-5, 72)),
        (&[4], &[2, 2], 2, rat(59, 2592)),
        (&[4], &[2, 2], 3, rat(4715, 1492992)),
        (&[4], &[2, 1, 1], 1, rat(1, 8)),
        (&[4], &[2, 1, 1], 2, rat(37, 768)),
        (&[4], &[2, 1, 1], 3, rat(-727, 82944)),
        (&[4], &[1, 1, 1, 1], 1, rat(-7, 144)),
        (&[4], &[1, 1, 1, 1], 2, rat(-95, 2592)),
        (&[4], &[1, 1, 1, 1], 3, rat(-9119, 2985984)),
        (&[3, 1], &[4], 1, rat(5, 16)),
        (&[3, 1], &[4], 2, rat(1, 32)),
        (&[3, 1], &[4], 3, rat(-7, 4096)),
        (&[3, 1], &[2, 2], 1, rat(-1, 8)),
        (&[3, 1], &[2, 2], 2, rat(-1, 32)),
        (&[3, 1], &[2, 2], 3, rat(-13, 2048)),
        (&[3, 1], &[2, 1, 1], 1, rat(-5, 16)),
        (&[3, 1], &[2, 1, 1], 2, rat(3, 64)),
        (&[3, 1], &[2, 1, 1], 3, rat(35, 4096)),
        (&[3, 1], &[1, 1, 1, 1], 1, rat(1, 8)),
        (&[3, 1], &[1, 1, 1, 1], 2, rat(11, 256)),
        (&[3, 1], &[1, 1, 1, 1], 3, rat(-7, 1024)),
        (&[2, 2], &[4], 1, rat(5, 72)),
        (&[2, 2], &[4], 2, rat(37, 1296)),
        (&[2, 2], &[4], 3, rat(-133, 46656)),
        (&[2, 2], &[3, 1], 1, rat(1, 8)),
        (&[2, 2], &[3, 1], 2, rat(-1, 48)),
        (&[2, 2], &[3, 1], 3, rat(-31, 5184)),
        (&[2, 2], &[2, 1, 1], 1, rat(-1, 8)),
        (&[2, 2], &[2, 1, 1], 2, rat(-1, 48)),
        (&[2, 2], &[2, 1, 1], 3, rat(31, 5184)),
        (&[2, 2], &[1, 1, 1, 1], 1, rat(-5, 72)),
        (&[2, 2], &[1, 1, 1, 1], 2, rat(37, 1296)),
        (&[2, 2], &[1, 1, 1, 1], 3, rat(133, 46656)),
    ];
    for (lam, nu, t, want) in table4 {
        expect(
            coeff_of(&all, lam, *t, nu, 4),
            want.clone(),
            &format!("weight-4 table ({:?}, {:?}, {})", lam, nu, t),
        )?;
    }
    Ok(format!("{} reference rationals reproduced", checked))
}

// ---- criterion 3: commutativity ----

fn criterion_3(ctx: &SelftestContext) -> std::result::Result<String, String> {
    let mut checked = 0usize;
    // dispersionless tower pairs
    for k in 0..=TOWER_MAX_WEIGHT {
        for m in -1..=TOWER_MAX_M {
            for n in (m + 1)..=TOWER_MAX_M {
                let a = err_str(ctx.tower.op(m, k).cloned())?;
                let b = err_str(ctx.tower.op(n, k).cloned())?;
                if !a.commutator(&b).is_zero() {
                    return Err(format!(
                        "[H_{}^[0], H_{}^[0]] != 0 on weight {}",
                        m, n, k
                    ));
                }
                checked += 1;
            }
        }
    }
    // full-eps pairs from the recursion records
    for (m, n) in [(1i64, 2i64), (1, 3), (2, 3)] {
        let bad = err_str(commute_check(
            err_str(ctx.chain.record(m))?,
            err_str(ctx.chain.record(n))?,
            CHAIN_WINDOW,
        ))?;
        if !bad.is_empty() {
            return Err(format!("[H_{}, H_{}] != 0 on weights {:?}", m, n, bad));
        }
        checked += 1;
    }
    Ok(format!("{} commutator pairs exactly zero", checked))
}

// ---- criterion 4: self-adjointness ----

fn criterion_4(ctx: &SelftestContext) -> std::result::Result<String, String> {
    let mut checked = 0usize;
    // p = 0 blocks of every constructed Hamiltonian: M^T W = W M
    for k in 0..=TOWER_MAX_WEIGHT {
        let w = ExactMatrix::diagonal(inner_weights(k));
        let mut ops: Vec<(String, ExactMatrix)> = Vec::new();
        for m in -1..=TOWER_MAX_M {
            ops.push((
                format!("H_{}^[0]", m),
                err_str(ctx.tower.op(m, k).cloned())?,
            ));
        }
        for m in -1..=CHAIN_MAX_M {
            ops.push((
                format!("H_{}", m),
                err_str(err_str(ctx.chain.record(m))?.p0_matrix(k))?,
            ));
        }
        for (name, op) in ops {
            if &op.transpose() * &w != &w * &op {
                return Err(format!("{} has nonzero adjoint defect on weight {}", name, k));
            }
            checked += 1;
        }
    }
    Ok(format!("{} operators self-adjoint on weights <= 8", checked))
}

// ---- criterion 5: classical limit ----

fn criterion_5(ctx: &SelftestContext) -> std::result::Result<String, String> {
    for m in 2..=3i64 {
        let rec = err_str(ctx.chain.record(m))?;
        let classical = rec.density.substitute_coeff(Var::H, &ExactPoly::zero());
        let lm = err_str(lenard_magri(m))?;
        let diff = classical.sub(&lm);
        if !diff.constant_term().is_zero() {
            return Err(format!("classical limit of h_{} carries a constant", m));
        }
        if diff.integrate_x().is_err() {
            return Err(format!(
                "hbar -> 0 of h_{} differs from the Lenard-Magri density by a non-derivative",
                m
            ));
        }
    }
    Ok("h_2, h_3 classical limits match Lenard-Magri mod d/dx".into())
}

// ---- criterion 6: genus table ----

fn criterion_6(_ctx: &SelftestContext) -> std::result::Result<String, String> {
    let expected: [i64; 11] = [0, 0, 0, 1, 4, 9, 21, 37, 69, 113, 187];
    for (k, &want) in expected.iter().enumerate() {
        let got = err_str(conjecture_rhs(k))?;
        if got != want {
            return Err(format!("genus RHS at k = {}: got {}, expected {}", k, got, want));
        }
    }
    Ok("row 0 0 0 1 4 9 21 37 69 113 187 reproduced".into())
}

// ---- criterion 7: vanishing identities ----

fn criterion_7(ctx: &SelftestContext) -> std::result::Result<String, String> {
    let pairs = err_str(find_p2_pairs(8))?;
    let canonical = pairs.iter().any(|p| {
        p.lambda == Partition::new(vec![4, 1, 1]) && p.mu == Partition::new(vec![3, 3])
    });
    let conjugate = pairs.iter().any(|p| {
        p.lambda == Partition::new(vec![3, 1, 1, 1]) && p.mu == Partition::new(vec![2, 2, 2])
    });
    if !canonical || !conjugate {
        return Err("expected weight-6 pairs are missing from the search".into());
    }
    for pair in &pairs {
        let v = err_str(verify_corollary(pair))?;
        if !v.is_zero() {
            return Err(format!(
                "character sum is {} for pair ({}, {})",
                v, pair.lambda, pair.mu
            ));
        }
        let w = err_str(verify_lemma34(&ctx.chain, pair, 1))?;
        if !w.is_zero() {
            return Err(format!(
                "eps^2 matrix element is {} for pair ({}, {})",
                w, pair.lambda, pair.mu
            ));
        }
    }
    Ok(format!("{} degenerate pairs vanish on both routes", pairs.len()))
}

// ---- criterion 8: the generating-function identity ----

fn criterion_8(ctx: &SelftestContext) -> std::result::Result<String, String> {
    for k in 0..=6usize {
        let report = err_str(verify_prop_a1(&ctx.tower, k, 8))?;
        if !report.is_zero() {
            return Err(format!(
                "weight {} has {} nonzero defect entries, first: {:?}",
                k,
                report.defects.len(),
                report.defects.first()
            ));
        }
    }
    Ok("zero defect through z^8 on weights <= 6, V0 symbolic".into())
}

// ---- criterion 9: property suites ----

fn criterion_9(ctx: &SelftestContext) -> std::result::Result<String, String> {
    let mut checked = 0usize;
    // orthogonality <r_lambda, r_mu> = 0 through sigma^6, weights <= 6
    // (V0-freeness of every r coefficient is enforced inside the recursion:
    // a V0-dependent coefficient is a fatal error on this code path)
    for k in 0..=6usize {
        let all = err_str(deformed_schur(&ctx.chain, k, 6, &[-1, 0, 1, 2, 3]))?;
        let n = all.len();
        for i in 0..n {
            for j in (i + 1)..n {
                for t in 0..=6usize {
                    let mut dot = Rat::zero();
                    for s in 0..=t {
                        for nu in 0..n {
                            dot += &all[i].coeffs[s][nu] * &all[j].coeffs[t - s][nu];
                        }
                    }
                    if !dot.is_zero() {
                        return Err(format!(
                            "<r_{}, r_{}> has sigma^{} coefficient {}",
                            all[i].lambda, all[j].lambda, t, dot
                        ));
                    }
                    checked += 1;
                }
            }
        }
        // joint eigenvector check: K_m r = F_m r as truncated series for
        // every constructed m, including m != m*
        for m in -1..=CHAIN_MAX_M {
            let op = err_str(scale(&ctx.chain, m, k, true))?;
            let deg = op.matrix.degree_in(Var::Sigma) as usize;
            let slices: Vec<ExactMatrix> = (0..=deg)
                .map(|j| op.matrix.coeff_of(Var::Sigma, j as u16))
                .collect();
            for r in &all {
                for t in 0..=6usize {
                    // (K r)^[t] - sum_j F^[j] r^[t-j] = 0
                    for row in 0..n {
                        let mut acc = ExactPoly::zero();
                        for (j, slice) in slices.iter().enumerate().take(t + 1) {
                            for nu in 0..n {
                                let c = &r.coeffs[t - j][nu];
                                if c.is_zero() || slice[(row, nu)].is_zero() {
                                    continue;
                                }
                                acc += slice[(row, nu)].scale(c);
                            }
                        }
                        for j in 0..=t {
                            let f = &r.eigen[&m][j];
                            let c = &r.coeffs[t - j][row];
                            if f.is_zero() || c.is_zero() {
                                continue;
                            }
                            acc -= f.scale(c);
                        }
                        if !acc.is_zero() {
                            return Err(format!(
                                "K_{} r_{} != F r at weight {}, order {}",
                                m, r.lambda, k, t
                            ));
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    // conjugation symmetry on weights <= 5 through sigma^5:
    // r^[t] of (lambda', mu') = (-1)^t r^[t] of (lambda, mu)
    for k in 0..=5usize {
        let all = err_str(deformed_schur(&ctx.chain, k, 5, &[]))?;
        let basis = WeightBasis::new(k);
        for r in &all {
            let conj_row = all
                .iter()
                .find(|s| s.lambda == r.lambda.conjugate())
                .expect("conjugate row");
            for (nu_idx, nu) in basis.elements.iter().enumerate() {
                let conj_idx = basis.index_of(&nu.conjugate()).unwrap();
                for t in 0..=5usize {
                    let sign = if t % 2 == 0 { rint(1) } else { rint(-1) };
                    if conj_row.coeffs[t][conj_idx] != r.coeffs[t][nu_idx].clone() * sign {
                        return Err(format!(
                            "conjugation symmetry fails for ({}, {}) at order {}",
                            r.lambda, nu, t
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    // the two construction routes agree at eps = 0: the recursion record's
    // p = 0 block equals the generating-series tower operator, including
    // the backfilled vacuum constant (7 hbar^2/5760 at m = 2)
    for m in -1..=CHAIN_MAX_M {
        for k in 0..=6usize {
            let rec = err_str(err_str(ctx.chain.record(m))?.p0_matrix(k))?;
            let disp = rec.coeff_of(Var::Eps2, 0);
            let tower = err_str(ctx.tower.op(m, k))?;
            if &disp != tower {
                return Err(format!(
                    "record H_{} at eps = 0 differs from the tower on weight {}",
                    m, k
                ));
            }
            checked += 1;
        }
    }
    // dU0 H_(m+1) = H_m on the p = 0 blocks
    for m in -1..CHAIN_MAX_M {
        for k in 0..=6usize {
            let upper = err_str(err_str(ctx.chain.record(m + 1))?.p0_matrix(k))?;
            let lower = err_str(err_str(ctx.chain.record(m))?.p0_matrix(k))?;
            if upper.map(|e| e.derivative(Var::U0)) != lower {
                return Err(format!(
                    "dU0 H_{} != H_{} at weight {}",
                    m + 1,
                    m,
                    k
                ));
            }
            checked += 1;
        }
    }
    // genus truncation H_m^[g] = 0 for g >= m+1 on constructed m <= 3
    for m in 0..=CHAIN_MAX_M {
        for k in 0..=6usize {
            let p0 = err_str(err_str(ctx.chain.record(m))?.p0_matrix(k))?;
            for g in (m as u16 + 1)..=p0.degree_in(Var::Eps2) {
                if !p0.coeff_of(Var::Eps2, g).is_zero() {
                    return Err(format!("H_{}^[{}] != 0 at weight {}", m, g, k));
                }
            }
            checked += 1;
        }
    }
    // sigma -> infinity: leading matrix diagonal in the monomial basis with
    // entries affine in sum lambda_i^3 for m = 1
    for k in 2..=6usize {
        let rep = err_str(sigma_infinity_diag(&ctx.chain, k, 1))?;
        match rep.fit {
            Some((alpha, c)) if alpha == rat(1, 12) && c == rat(1, 2880) => checked += 1,
            other => {
                return Err(format!(
                    "sigma-infinity fit at weight {} is {:?}, expected (1/12, 1/2880)",
                    k, other
                ))
            }
        }
    }
    // eigenvalue series at sigma = 0 match the closed dispersionless formula,
    // and the V0 dependence is chained: dV0 F_(m+1) = F_m termwise
    for k in 0..=4usize {
        let all = err_str(deformed_schur(&ctx.chain, k, 2, &[-1, 0, 1, 2, 3]))?;
        for r in &all {
            for (&m, series) in &r.eigen {
                if series[0] != dispersionless_eigen(m, &r.lambda) {
                    return Err(format!(
                        "F_{}(sigma = 0) differs from the closed formula at {}",
                        m, r.lambda
                    ));
                }
                checked += 1;
            }
            for m in -1..CHAIN_MAX_M {
                let upper = &r.eigen[&(m + 1)];
                let lower = &r.eigen[&m];
                for (t, (u, l)) in upper.iter().zip(lower).enumerate() {
                    if u.derivative(Var::V0) != *l {
                        return Err(format!(
                            "dV0 F_{} != F_{} at {} order {}",
                            m + 1,
                            m,
                            r.lambda,
                            t
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{} property instances exact", checked))
}

// ---- driver ----

const CRITERIA: [(&str, Check); 9] = [
    ("dispersionless eigenvalue theorem, |lambda| <= 8, m <= 6", criterion_1),
    ("reference deformed-Schur series reproduced", criterion_2),
    ("commutativity, tower m,n <= 6 and full-eps m,n <= 3", criterion_3),
    ("self-adjointness of all constructed Hamiltonians", criterion_4),
    ("classical Lenard-Magri limit of h_2, h_3", criterion_5),
    ("genus conjecture right-hand side, k <= 10", criterion_6),
    ("character vanishing identities, k <= 8", criterion_7),
    ("class-algebra generating identity through z^8, k <= 6", criterion_8),
    ("property suites (orthogonality, conjugation, gradings)", criterion_9),
];

/// Run the full acceptance suite. The wall-clock bound is itself the last
/// criterion.
pub fn run_selftest() -> Result<SelftestReport> {
    let start = Instant::now();
    let ctx = SelftestContext::build()?;
    let mut results = Vec::new();
    for (i, (name, check)) in CRITERIA.iter().enumerate() {
        let outcome = check(&ctx);
        results.push(CriterionResult {
            index: i + 1,
            name,
            passed: outcome.is_ok(),
            detail: match outcome {
                Ok(d) => d,
                Err(e) => e,
            },
        });
    }
    let elapsed = start.elapsed().as_secs_f64();
    results.push(CriterionResult {
        index: 10,
        name: "wall clock under 10 minutes",
        passed: elapsed < 600.0,
        detail: format!("{:.1}s", elapsed),
    });
    Ok(SelftestReport {
        results,
        elapsed_secs: elapsed,
    })
}
