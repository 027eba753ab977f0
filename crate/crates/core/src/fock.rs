//! The truncated bosonic Fock space: weight bases, the sesquilinear inner
//! product, Schur vectors, and exact quantization of differential-polynomial
//! densities into mode-p operator blocks.
//!
//! Quantization of a density monomial u_{j1 x} ... u_{jn x} at total Fourier
//! mode p is the finite normal-ordered sum over ordered mode tuples
//! (k_1,...,k_n) with sum p of (i k_1)^{j1} ... (i k_n)^{jn} :U_{k1}...U_{kn}:
//! where U_k acts as q_k (k > 0), U0 (k = 0), hbar k d/dq_{-k} times (-1)
//! (k < 0). The imaginary unit is tracked exactly and must cancel.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::matrix::ExactMatrix;
use crate::exact::poly::{ExactPoly, Var};
use crate::exact::rat::{factorial, rint, Rat};
use crate::partitions::{character, enumerate_partitions, Partition};

// ---- Weight bases ----

/// The monomial basis of the weight-k space: partitions of k in canonical
/// order, indexing q_lambda = q_{lambda_1} ... q_{lambda_l}.
#[derive(Clone, Debug)]
pub struct WeightBasis {
    pub k: usize,
    pub elements: Vec<Partition>,
    index: HashMap<Partition, usize>,
}

impl WeightBasis {
    pub fn new(k: usize) -> Arc<WeightBasis> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<WeightBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry(k)
            .or_insert_with(|| {
                let elements = enumerate_partitions(k);
                let index = elements
                    .iter()
                    .cloned()
                    .enumerate()
                    .map(|(i, p)| (p, i))
                    .collect();
                Arc::new(WeightBasis { k, elements, index })
            })
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }
}

// ---- Inner product ----

/// Diagonal weights of the sesquilinear form in the monomial basis:
/// <q_lambda, q_mu> = z_lambda hbar^(l(lambda)) delta, i.e. z_lambda h^(2l).
pub fn inner_weights(k: usize) -> Vec<ExactPoly> {
    WeightBasis::new(k)
        .elements
        .iter()
        .map(|lam| {
            ExactPoly::monomial(
                lam.z_factor(),
                &[(Var::H, 2 * lam.len() as u16)],
            )
        })
        .collect()
}

/// Same weights in the rescaled basis T_lambda = q_lambda / h^l(lambda):
/// <T_lambda, T_lambda> = z_lambda.
pub fn inner_weights_scaled(k: usize) -> Vec<Rat> {
    WeightBasis::new(k)
        .elements
        .iter()
        .map(|lam| lam.z_factor())
        .collect()
}

/// <f, g> for coefficient vectors over WeightBasis(k) in the monomial basis.
pub fn inner(f: &[ExactPoly], g: &[ExactPoly], k: usize) -> Result<ExactPoly> {
    let w = inner_weights(k);
    if f.len() != w.len() || g.len() != w.len() {
        return Err(Error::Dimension(format!(
            "inner: expected vectors of length {} at weight {}",
            w.len(),
            k
        )));
    }
    let mut s = ExactPoly::zero();
    for i in 0..w.len() {
        if f[i].is_zero() || g[i].is_zero() {
            continue;
        }
        s += &(&f[i] * &g[i]) * &w[i];
    }
    Ok(s)
}

// ---- Schur vectors ----

/// An element of the graded polynomial ring C[T_1, T_2, ...] supported on a
/// single weight, in T-monomial coordinates (T_k are the power sums).
pub type SymCoords = BTreeMap<Partition, Rat>;

fn sym_insert(m: &mut SymCoords, key: Partition, c: Rat) {
    if c.is_zero() {
        return;
    }
    match m.entry(key) {
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

fn sym_mul(a: &SymCoords, b: &SymCoords) -> SymCoords {
    let mut out = SymCoords::new();
    for (pa, ca) in a {
        for (pb, cb) in b {
            let mut parts = pa.parts().to_vec();
            parts.extend_from_slice(pb.parts());
            sym_insert(&mut out, Partition::new(parts), ca * cb);
        }
    }
    out
}

/// Complete homogeneous symmetric polynomial h_r in power-sum coordinates:
/// h_r = sum_{|mu| = r} T_mu / z_mu.
fn complete_homogeneous(r: i64) -> SymCoords {
    let mut out = SymCoords::new();
    if r < 0 {
        return out;
    }
    for mu in enumerate_partitions(r as usize) {
        let z = mu.z_factor();
        sym_insert(&mut out, mu, Rat::one() / z);
    }
    out
}

/// Schur polynomial by the Jacobi-Trudi determinant det(h_{lambda_i - i + j}).
fn schur_jacobi_trudi(lambda: &Partition) -> SymCoords {
    let l = lambda.len();
    if l == 0 {
        let mut out = SymCoords::new();
        sym_insert(&mut out, Partition::empty(), Rat::one());
        return out;
    }
    let entries: Vec<Vec<SymCoords>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    complete_homogeneous(lambda.parts()[i] as i64 - i as i64 + j as i64)
                })
                .collect()
        })
        .collect();
    // Laplace expansion along rows with memoization on column subsets.
    fn det(
        entries: &[Vec<SymCoords>],
        row: usize,
        cols: u32,
        memo: &mut HashMap<(usize, u32), SymCoords>,
    ) -> SymCoords {
        let l = entries.len();
        if row == l {
            let mut out = SymCoords::new();
            sym_insert(&mut out, Partition::empty(), Rat::one());
            return out;
        }
        if let Some(v) = memo.get(&(row, cols)) {
            return v.clone();
        }
        let mut out = SymCoords::new();
        let mut sign = Rat::one();
        for j in 0..l {
            if cols & (1 << j) != 0 {
                continue;
            }
            let e = &entries[row][j];
            if !e.is_empty() {
                let sub = det(entries, row + 1, cols | (1 << j), memo);
                let prod = sym_mul(e, &sub);
                for (k, c) in prod {
                    sym_insert(&mut out, k, c * &sign);
                }
            }
            sign = -sign;
        }
        memo.insert((row, cols), out.clone());
        out
    }
    det(&entries, 0, 0, &mut HashMap::new())
}

/// Schur polynomial via the character expansion
/// s_lambda = sum_nu |C_nu| chi_lambda(C_nu) / k! * T_nu.
fn schur_from_characters(lambda: &Partition) -> Result<SymCoords> {
    let k = lambda.weight();
    let kfact = factorial(k);
    let mut out = SymCoords::new();
    for nu in enumerate_partitions(k) {
        let chi = character(lambda, &nu)?;
        let c = nu.class_size() * rint(chi) / &kfact;
        sym_insert(&mut out, nu, c);
    }
    Ok(out)
}

/// Coefficients of s_lambda(q/sqrt(hbar)) over the monomial basis
/// {q_mu / hbar^(l(mu)/2)} = {T_mu} of weight |lambda|.
///
/// Computed both by Jacobi-Trudi and by the character formula; a mismatch is
/// a fatal tripwire.
pub fn schur_vector(lambda: &Partition) -> Result<Vec<Rat>> {
    let k = lambda.weight();
    let jt = schur_jacobi_trudi(lambda);
    let ch = schur_from_characters(lambda)?;
    if jt != ch {
        return Err(crate::tripwire!(
            "schur_vector: Jacobi-Trudi and character expansions disagree for {}",
            lambda
        ));
    }
    let basis = WeightBasis::new(k);
    let mut v = vec![Rat::zero(); basis.dim()];
    for (mu, c) in jt {
        let idx = basis
            .index_of(&mu)
            .ok_or_else(|| crate::tripwire!("schur_vector: weight drift at {}", mu))?;
        v[idx] = c;
    }
    Ok(v)
}

/// Columns are Schur vectors in the T-monomial basis (the change of basis
/// matrix from Schur coordinates to monomial coordinates).
pub fn schur_matrix(k: usize) -> Result<Arc<Vec<Vec<Rat>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Vec<Rat>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&k) {
        return Ok(m.clone());
    }
    let basis = WeightBasis::new(k);
    let n = basis.dim();
    let mut m = vec![vec![Rat::zero(); n]; n];
    for (j, lam) in basis.elements.iter().enumerate() {
        let v = schur_vector(lam)?;
        for (i, c) in v.into_iter().enumerate() {
            m[i][j] = c;
        }
    }
    let arc = Arc::new(m);
    cache.lock().unwrap().insert(k, arc.clone());
    Ok(arc)
}

/// Inverse change of basis: T_nu = sum_lambda chi_lambda(C_nu) s_lambda,
/// so the (lambda, nu) entry is chi_lambda(C_nu).
pub fn schur_matrix_inv(k: usize) -> Result<Arc<Vec<Vec<Rat>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Vec<Rat>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&k) {
        return Ok(m.clone());
    }
    let basis = WeightBasis::new(k);
    let n = basis.dim();
    let mut m = vec![vec![Rat::zero(); n]; n];
    for (i, lam) in basis.elements.iter().enumerate() {
        for (j, nu) in basis.elements.iter().enumerate() {
            m[i][j] = rint(character(lam, nu)?);
        }
    }
    let arc = Arc::new(m);
    cache.lock().unwrap().insert(k, arc.clone());
    Ok(arc)
}

/// Convert a weight-preserving matrix from the q-monomial basis to the
/// rescaled T-monomial basis (T_lambda = q_lambda / h^l): entry (mu, nu)
/// picks up h^(l(mu) - l(nu)). Negative shifts must divide exactly, which
/// the hbar from each annihilation operator guarantees.
pub fn to_t_basis(m: &ExactMatrix, k: usize) -> Result<ExactMatrix> {
    let basis = WeightBasis::new(k);
    let n = basis.dim();
    if m.rows() != n || m.cols() != n {
        return Err(Error::Dimension(format!(
            "to_t_basis: matrix is {}x{} but dim = {}",
            m.rows(),
            m.cols(),
            n
        )));
    }
    let mut out = ExactMatrix::zero(n, n);
    for i in 0..n {
        let li = basis.elements[i].len() as i64;
        for j in 0..n {
            if m[(i, j)].is_zero() {
                continue;
            }
            let shift = li - basis.elements[j].len() as i64;
            out[(i, j)] = if shift >= 0 {
                m[(i, j)].mul_var_pow(Var::H, shift as u16)
            } else {
                m[(i, j)].div_var_pow(Var::H, (-shift) as u16)?
            };
        }
    }
    Ok(out)
}

/// Conjugate a weight-preserving matrix from the T-monomial basis to the
/// Schur basis: S^-1 M S.
pub fn to_schur_basis(m: &ExactMatrix, k: usize) -> Result<ExactMatrix> {
    let s = schur_matrix(k)?;
    let sinv = schur_matrix_inv(k)?;
    let n = m.rows();
    if n != s.len() || m.cols() != n {
        return Err(Error::Dimension(format!(
            "to_schur_basis: matrix is {}x{} but dim = {}",
            m.rows(),
            m.cols(),
            s.len()
        )));
    }
    // tmp = M S
    let mut tmp = ExactMatrix::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ExactPoly::zero();
            for t in 0..n {
                if !m[(i, t)].is_zero() && !s[t][j].is_zero() {
                    acc += m[(i, t)].scale(&s[t][j]);
                }
            }
            tmp[(i, j)] = acc;
        }
    }
    // out = S^-1 tmp
    let mut out = ExactMatrix::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ExactPoly::zero();
            for t in 0..n {
                if !sinv[i][t].is_zero() && !tmp[(t, j)].is_zero() {
                    acc += tmp[(t, j)].scale(&sinv[i][t]);
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

// ---- Densities ----

/// A differential polynomial in u, u_x, u_xx, ...: a finite sum of monomials
/// u_{j1 x} ... u_{jn x} indexed by the multiset {j1 >= j2 >= ...} of
/// derivative orders, with ExactPoly coefficients (in h and eps2).
///
/// The empty multiset is the constant monomial.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Density {
    terms: BTreeMap<Vec<u8>, ExactPoly>,
}

// JSON form: a list of {"orders": [...], "coeff": {...}} in canonical order.
#[derive(Serialize, Deserialize)]
struct DensityTermRepr {
    orders: Vec<u8>,
    coeff: ExactPoly,
}

impl Serialize for Density {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<DensityTermRepr> = self
            .terms
            .iter()
            .map(|(k, v)| DensityTermRepr {
                orders: k.clone(),
                coeff: v.clone(),
            })
            .collect();
        terms.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Density {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<DensityTermRepr>::deserialize(deserializer)?;
        let mut out = Density::zero();
        for t in terms {
            out.add_monomial(&t.orders, t.coeff);
        }
        Ok(out)
    }
}

impl Density {
    pub fn zero() -> Self {
        Density::default()
    }

    /// Single monomial with the given derivative orders.
    pub fn monomial(orders: &[u8], coeff: ExactPoly) -> Self {
        let mut d = Density::zero();
        d.add_monomial(orders, coeff);
        d
    }

    /// The density u itself.
    pub fn u() -> Self {
        Density::monomial(&[0], ExactPoly::one())
    }

    pub fn add_monomial(&mut self, orders: &[u8], coeff: ExactPoly) {
        if coeff.is_zero() {
            return;
        }
        let mut key = orders.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &ExactPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of a monomial (orders in any order).
    pub fn coeff(&self, orders: &[u8]) -> ExactPoly {
        let mut key = orders.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        self.terms.get(&key).cloned().unwrap_or_else(ExactPoly::zero)
    }

    /// The constant (u-independent) part.
    pub fn constant_term(&self) -> ExactPoly {
        self.terms
            .get(&Vec::new())
            .cloned()
            .unwrap_or_else(ExactPoly::zero)
    }

    /// Drop the constant monomial.
    pub fn without_constant(&self) -> Density {
        let mut d = self.clone();
        d.terms.remove(&Vec::new());
        d
    }

    pub fn scale(&self, c: &Rat) -> Density {
        if c.is_zero() {
            return Density::zero();
        }
        Density {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.scale(c)))
                .collect(),
        }
    }

    pub fn scale_poly(&self, p: &ExactPoly) -> Density {
        if p.is_zero() {
            return Density::zero();
        }
        let mut out = Density::zero();
        for (k, v) in &self.terms {
            out.add_monomial(k, v * p);
        }
        out
    }

    pub fn add(&self, other: &Density) -> Density {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_monomial(k, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Density) -> Density {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_monomial(k, -v);
        }
        out
    }

    /// Product of differential polynomials (multiset union of orders).
    pub fn mul(&self, other: &Density) -> Density {
        let mut out = Density::zero();
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                out.add_monomial(&key, va * vb);
            }
        }
        out
    }

    /// Total x-derivative (Leibniz rule).
    pub fn dx(&self) -> Density {
        let mut out = Density::zero();
        for (key, c) in &self.terms {
            // bump each distinct order once, weighted by its multiplicity
            let mut i = 0;
            while i < key.len() {
                let val = key[i];
                let mut m = 0usize;
                while i < key.len() && key[i] == val {
                    m += 1;
                    i += 1;
                }
                let mut nk = key.clone();
                // replace one copy of `val` by `val + 1`
                let pos = nk.iter().position(|&x| x == val).unwrap();
                nk[pos] = val + 1;
                out.add_monomial(&nk, c.scale(&rint(m as i64)));
            }
        }
        out
    }

    /// Partial derivative with respect to u (the zeroth derivative variable).
    pub fn partial_u(&self) -> Density {
        let mut out = Density::zero();
        for (key, c) in &self.terms {
            let m = key.iter().filter(|&&x| x == 0).count();
            if m == 0 {
                continue;
            }
            let mut nk = key.clone();
            let pos = nk.iter().position(|&x| x == 0).unwrap();
            nk.remove(pos);
            out.add_monomial(&nk, c.scale(&rint(m as i64)));
        }
        out
    }

    /// Formal x-antiderivative. The input must be an exact x-derivative;
    /// otherwise an error is returned (used as a correctness tripwire and as
    /// the total-derivative test). The result has no constant term.
    pub fn integrate_x(&self) -> Result<Density> {
        let mut rem = self.clone();
        let mut out = Density::zero();
        while let Some((key, c)) = rem.terms.iter().next_back().map(|(k, v)| (k.clone(), v.clone()))
        {
            if key.is_empty() || key[0] == 0 {
                return Err(crate::tripwire!(
                    "integrate_x: leading monomial {:?} is not an exact derivative",
                    key
                ));
            }
            let jmax = key[0];
            if key.len() > 1 && key[1] == jmax {
                return Err(crate::tripwire!(
                    "integrate_x: repeated top derivative order {} cannot arise from an exact derivative",
                    jmax
                ));
            }
            let mut primed = key.clone();
            primed[0] = jmax - 1;
            primed.sort_unstable_by(|a, b| b.cmp(a));
            let mult = primed.iter().filter(|&&x| x == jmax - 1).count();
            let t = Density::monomial(&primed, c.scale(&(Rat::one() / rint(mult as i64))));
            rem = rem.sub(&t.dx());
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Substitute a parameter inside every coefficient.
    pub fn substitute_coeff(&self, v: Var, value: &ExactPoly) -> Density {
        let mut out = Density::zero();
        for (k, c) in &self.terms {
            out.add_monomial(k, c.substitute(v, value));
        }
        out
    }

    /// Largest power of eps2 over all coefficients.
    pub fn eps2_degree(&self) -> u16 {
        self.terms
            .values()
            .map(|c| c.degree_in(Var::Eps2))
            .max()
            .unwrap_or(0)
    }

    /// Check homogeneity: every term with u-degree n, eps2-power a, h-power
    /// 2b must satisfy n + a + 2b = degree, and the total derivative order
    /// must equal a term-wise budget <= 2(a + b). Returns an error naming the
    /// first violating monomial.
    pub fn check_homogeneity(&self, degree: i64) -> Result<()> {
        for (key, c) in &self.terms {
            let n = key.len() as i64;
            let dx_total: i64 = key.iter().map(|&x| x as i64).sum();
            for (exp, _) in c.terms() {
                let a = exp[Var::Eps2 as usize] as i64;
                let h = exp[Var::H as usize] as i64;
                if h % 2 != 0 {
                    return Err(crate::tripwire!(
                        "density has odd power of h in coefficient of {:?}",
                        key
                    ));
                }
                let b = h / 2;
                if n + a + 2 * b != degree {
                    return Err(crate::tripwire!(
                        "density monomial {:?} (a={}, b={}) violates homogeneity degree {}",
                        key,
                        a,
                        b,
                        degree
                    ));
                }
                if dx_total > 2 * (a + b) {
                    return Err(crate::tripwire!(
                        "density monomial {:?} has derivative order {} beyond 2(a+b) = {}",
                        key,
                        dx_total,
                        2 * (a + b)
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coeff = format!("{}", c);
            let needs_parens = c.num_terms() > 1;
            if needs_parens {
                write!(f, "({})", coeff)?;
            } else {
                write!(f, "{}", coeff)?;
            }
            for &j in key {
                if j == 0 {
                    write!(f, "*u")?;
                } else {
                    write!(f, "*u_{}x", j)?;
                }
            }
        }
        Ok(())
    }
}

// ---- Quantization ----

/// One mode-p block of a quantized density: an exact matrix mapping the
/// weight-d monomial basis to the weight-(d+p) monomial basis.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct OperatorBlock {
    pub p: i64,
    pub source_weight: usize,
    #[serde(default = "monomial_basis_tag")]
    pub basis: String,
    pub matrix: ExactMatrix,
}

fn monomial_basis_tag() -> String {
    "monomial".to_string()
}

impl Serialize for OperatorBlock {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("OperatorBlock", 4)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("source_weight", &self.source_weight)?;
        st.serialize_field("basis", &self.basis)?;
        st.serialize_field("matrix", &self.matrix)?;
        st.end()
    }
}

impl OperatorBlock {
    pub fn target_weight(&self) -> usize {
        (self.source_weight as i64 + self.p) as usize
    }
}

/// Quantize a density at Fourier mode p on source weight d.
/// For d + p < 0 the block is exactly zero (0-row matrix).
pub fn quantize_block(density: &Density, p: i64, d: usize) -> Result<OperatorBlock> {
    let target = d as i64 + p;
    let cols_basis = WeightBasis::new(d);
    if target < 0 {
        return Ok(OperatorBlock {
            p,
            source_weight: d,
            basis: monomial_basis_tag(),
            matrix: ExactMatrix::zero(0, cols_basis.dim()),
        });
    }
    let target = target as usize;
    let rows_basis = WeightBasis::new(target);
    let mut real = ExactMatrix::zero(rows_basis.dim(), cols_basis.dim());
    let mut imag = ExactMatrix::zero(rows_basis.dim(), cols_basis.dim());

    for (orders, coeff) in density.terms() {
        let n = orders.len();
        if n == 0 {
            // constant density: contributes only to the zero mode
            if p == 0 {
                for i in 0..cols_basis.dim() {
                    real[(i, i)] += coeff;
                }
            }
            continue;
        }
        let total_order: u32 = orders.iter().map(|&x| x as u32).sum();
        // group ordered mode tuples by (annihilation multiset, creation
        // multiset, zero count); the integer prefactor prod k_a^(j_a) sums
        // within each group
        let mut groups: HashMap<(Vec<u32>, Vec<u32>, usize), i128> = HashMap::new();
        let mut ann = Vec::new();
        let mut cre = Vec::new();
        dfs_modes(
            orders,
            0,
            0,
            d as i64,
            target as i64,
            p,
            1,
            &mut ann,
            &mut cre,
            0,
            &mut groups,
        );
        let sign_real = match total_order % 4 {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        };
        for ((a_parts, c_parts, zeros), factor) in groups {
            if factor == 0 {
                continue;
            }
            // operator scalar: coeff * factor * U0^zeros * hbar^(|A|) * prod A
            let mut scalar = Rat::from_integer(factor.into());
            for &a in &a_parts {
                scalar *= rint(a as i64);
            }
            let mut op = coeff.scale(&scalar);
            if zeros > 0 {
                op = op.mul_var_pow(Var::U0, zeros as u16);
            }
            if !a_parts.is_empty() {
                op = op.mul_var_pow(Var::H, 2 * a_parts.len() as u16);
            }
            let ann_partition = Partition::new(a_parts.clone());
            let cre_partition = Partition::new(c_parts.clone());
            for (col, lam) in cols_basis.elements.iter().enumerate() {
                let Some(mult) = remove_multiset(lam, &ann_partition) else {
                    continue;
                };
                let mut parts = Vec::with_capacity(
                    lam.len() - ann_partition.len() + cre_partition.len(),
                );
                parts.extend(remaining_parts(lam, &ann_partition));
                parts.extend_from_slice(cre_partition.parts());
                let mu = Partition::new(parts);
                let row = rows_basis
                    .index_of(&mu)
                    .ok_or_else(|| crate::tripwire!("quantize: weight drift at {}", mu))?;
                let contered = op.scale(&rint(mult));
                match sign_real {
                    Some(false) => real[(row, col)] += &contered,
                    Some(true) => real[(row, col)] -= &contered,
                    None => {
                        if total_order % 4 == 1 {
                            imag[(row, col)] += &contered;
                        } else {
                            imag[(row, col)] -= &contered;
                        }
                    }
                }
            }
        }
    }
    if !imag.is_zero() {
        return Err(crate::tripwire!(
            "quantize: nonvanishing imaginary part at p = {}, weight {} (odd x-parity density)",
            p,
            d
        ));
    }
    Ok(OperatorBlock {
        p,
        source_weight: d,
        basis: monomial_basis_tag(),
        matrix: real,
    })
}

/// Falling-factorial multiplicity of removing the multiset `ann` from `lam`;
/// None if `ann` is not contained in `lam`.
pub(crate) fn remove_multiset(lam: &Partition, ann: &Partition) -> Option<i64> {
    let mut mult = 1i64;
    let mut i = 0;
    let ann_parts = ann.parts();
    while i < ann_parts.len() {
        let val = ann_parts[i];
        let mut m = 0usize;
        while i < ann_parts.len() && ann_parts[i] == val {
            m += 1;
            i += 1;
        }
        let avail = lam.multiplicity(val);
        if avail < m {
            return None;
        }
        for t in 0..m {
            mult *= (avail - t) as i64;
        }
    }
    Some(mult)
}

/// Parts of lam with the multiset ann removed.
pub(crate) fn remaining_parts(lam: &Partition, ann: &Partition) -> Vec<u32> {
    let mut out = lam.parts().to_vec();
    for &a in ann.parts() {
        let pos = out.iter().position(|&x| x == a).unwrap();
        out.remove(pos);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs_modes(
    orders: &[u8],
    slot: usize,
    sum: i64,
    ann_budget: i64,
    cre_budget: i64,
    p: i64,
    factor: i128,
    ann: &mut Vec<u32>,
    cre: &mut Vec<u32>,
    zeros: usize,
    groups: &mut HashMap<(Vec<u32>, Vec<u32>, usize), i128>,
) {
    if slot == orders.len() {
        if sum == p {
            let mut a = ann.clone();
            let mut c = cre.clone();
            a.sort_unstable();
            c.sort_unstable();
            *groups.entry((a, c, zeros)).or_insert(0) += factor;
        }
        return;
    }
    // feasibility: the remaining slots can raise the sum by at most the
    // creation budget and lower it by at most the annihilation budget
    if sum + cre_budget < p || sum - ann_budget > p {
        return;
    }
    let j = orders[slot] as u32;
    for k in -ann_budget..=cre_budget {
        if k == 0 {
            if j > 0 {
                continue; // factor k^j vanishes
            }
            dfs_modes(
                orders,
                slot + 1,
                sum,
                ann_budget,
                cre_budget,
                p,
                factor,
                ann,
                cre,
                zeros + 1,
                groups,
            );
            continue;
        }
        let f = factor * (k as i128).pow(j);
        if k > 0 {
            cre.push(k as u32);
            dfs_modes(
                orders,
                slot + 1,
                sum + k,
                ann_budget,
                cre_budget - k,
                p,
                f,
                ann,
                cre,
                zeros,
                groups,
            );
            cre.pop();
        } else {
            ann.push((-k) as u32);
            dfs_modes(
                orders,
                slot + 1,
                sum + k,
                ann_budget + k,
                cre_budget,
                p,
                f,
                ann,
                cre,
                zeros,
                groups,
            );
            ann.pop();
        }
    }
}

/// Quantize a density at mode p on all source weights 0..=dmax.
pub fn quantize(density: &Density, p: i64, dmax: usize) -> Result<Vec<OperatorBlock>> {
    use rayon::prelude::*;
    (0..=dmax)
        .into_par_iter()
        .map(|d| quantize_block(density, p, d))
        .collect()
}

// ---- Adjointness ----

/// Defect of the adjoint pairing for a pair of blocks at modes p and -p:
/// M_p^T W_(d+p) - W_d M_(-p), which vanishes iff <A f, g> = <f, A g> holds
/// between the two weight spaces.
pub fn adjoint_defect(block_p: &OperatorBlock, block_mp: &OperatorBlock) -> Result<ExactMatrix> {
    let d = block_p.source_weight;
    let t = block_p.target_weight();
    if block_mp.source_weight != t || block_mp.target_weight() != d {
        return Err(Error::Dimension(format!(
            "adjoint_defect: blocks are not an adjoint pair (p={} from {}, p={} from {})",
            block_p.p, d, block_mp.p, block_mp.source_weight
        )));
    }
    let w_src = ExactMatrix::diagonal(inner_weights(d));
    let w_tgt = ExactMatrix::diagonal(inner_weights(t));
    let lhs = &block_p.matrix.transpose() * &w_tgt;
    let rhs = &w_src * &block_mp.matrix;
    Ok(&lhs - &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat;

    #[test]
    fn inner_product_examples() {
        // <q_2, q_2> = 2 hbar = 2 h^2
        let basis = WeightBasis::new(2);
        let idx = basis.index_of(&Partition::new(vec![2])).unwrap();
        let mut f = vec![ExactPoly::zero(); basis.dim()];
        f[idx] = ExactPoly::one();
        let ip = inner(&f, &f, 2).unwrap();
        assert_eq!(ip, ExactPoly::monomial(rint(2), &[(Var::H, 2)]));
        // <1, 1> = 1 at weight 0
        let one = vec![ExactPoly::one()];
        assert_eq!(inner(&one, &one, 0).unwrap(), ExactPoly::one());
    }

    #[test]
    fn schur_examples_from_low_weight() {
        // s_(2) = (T_1^2 + T_2)/2, s_(1,1) = (T_1^2 - T_2)/2
        let b2 = WeightBasis::new(2);
        let i2 = b2.index_of(&Partition::new(vec![2])).unwrap();
        let i11 = b2.index_of(&Partition::new(vec![1, 1])).unwrap();
        let s2 = schur_vector(&Partition::new(vec![2])).unwrap();
        assert_eq!(s2[i2], rat(1, 2));
        assert_eq!(s2[i11], rat(1, 2));
        let s11 = schur_vector(&Partition::new(vec![1, 1])).unwrap();
        assert_eq!(s11[i2], rat(-1, 2));
        assert_eq!(s11[i11], rat(1, 2));
        // s_(2,1) = (T_1^3 - T_3)/3
        let b3 = WeightBasis::new(3);
        let s21 = schur_vector(&Partition::new(vec![2, 1])).unwrap();
        assert_eq!(
            s21[b3.index_of(&Partition::new(vec![1, 1, 1])).unwrap()],
            rat(1, 3)
        );
        assert_eq!(
            s21[b3.index_of(&Partition::new(vec![3])).unwrap()],
            rat(-1, 3)
        );
        assert_eq!(
            s21[b3.index_of(&Partition::new(vec![2, 1])).unwrap()],
            rat(0, 1)
        );
    }

    #[test]
    fn schur_orthonormal_up_to_6() {
        for k in 0..=6 {
            let basis = WeightBasis::new(k);
            let vecs: Vec<Vec<Rat>> = basis
                .elements
                .iter()
                .map(|l| schur_vector(l).unwrap())
                .collect();
            let w = inner_weights_scaled(k);
            for (i, vi) in vecs.iter().enumerate() {
                for (j, vj) in vecs.iter().enumerate() {
                    let mut s = Rat::zero();
                    for t in 0..vi.len() {
                        s += &vi[t] * &vj[t] * &w[t];
                    }
                    let expect = if i == j { Rat::one() } else { Rat::zero() };
                    assert_eq!(s, expect, "k={} i={} j={}", k, i, j);
                }
            }
        }
    }

    #[test]
    fn schur_conjugation_sign() {
        // s_(lambda')(T) = (-1)^(|lambda|) s_lambda(-T): in T coordinates the
        // sign of the T_nu coefficient flips by (-1)^(|lambda| + l(nu)).
        for k in 1..=6 {
            let basis = WeightBasis::new(k);
            for lam in &basis.elements {
                let v = schur_vector(lam).unwrap();
                let vc = schur_vector(&lam.conjugate()).unwrap();
                for (i, nu) in basis.elements.iter().enumerate() {
                    let sign = if (k + nu.len()) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(vc[i], v[i].clone() * rint(sign));
                }
            }
        }
    }

    #[test]
    fn quantize_u_is_u0_identity_at_mode_zero() {
        let u = Density::u();
        for d in 0..=4 {
            let block = quantize_block(&u, 0, d).unwrap();
            let expect = ExactMatrix::identity(WeightBasis::new(d).dim())
                .scale_poly(&ExactPoly::var(Var::U0));
            assert_eq!(block.matrix, expect);
        }
    }

    #[test]
    fn quantize_u_at_positive_mode_is_creation() {
        // mode p of u is q_p: maps q_lambda to q_(lambda + p)
        let u = Density::u();
        let block = quantize_block(&u, 2, 2).unwrap();
        let src = WeightBasis::new(2);
        let tgt = WeightBasis::new(4);
        for (j, lam) in src.elements.iter().enumerate() {
            let mut parts = lam.parts().to_vec();
            parts.push(2);
            let mu = Partition::new(parts);
            let i = tgt.index_of(&mu).unwrap();
            assert_eq!(block.matrix[(i, j)], ExactPoly::one());
        }
    }

    #[test]
    fn quantize_h0_density_is_grading_operator() {
        // u^2/2 - hbar/24 at p = 0: hbar sum_k k q_k d/dq_k - hbar/24 + U0^2/2
        let mut h0 = Density::monomial(&[0, 0], ExactPoly::constant(rat(1, 2)));
        h0.add_monomial(&[], ExactPoly::monomial(rat(-1, 24), &[(Var::H, 2)]));
        for d in 0..=5 {
            let block = quantize_block(&h0, 0, d).unwrap();
            let dim = WeightBasis::new(d).dim();
            let mut expect = ExactMatrix::zero(dim, dim);
            for i in 0..dim {
                let mut e = ExactPoly::monomial(rint(d as i64), &[(Var::H, 2)]);
                e.add_term(rat(-1, 24), &[(Var::H, 2)]);
                e.add_term(rat(1, 2), &[(Var::U0, 2)]);
                expect[(i, i)] = e;
            }
            assert_eq!(block.matrix, expect, "weight {}", d);
        }
    }

    #[test]
    fn adjoint_pairing_of_creation_and_annihilation() {
        // mode 1 of u (creation q_1) against mode -1 of u (hbar d/dq_1):
        // the Lemma-style pairing <q_1 f, g> = <f, hbar d/dq_1 g>.
        let u = Density::u();
        for d in 0..=5 {
            let up = quantize_block(&u, 1, d).unwrap();
            let down = quantize_block(&u, -1, d + 1).unwrap();
            let defect = adjoint_defect(&up, &down).unwrap();
            assert!(defect.is_zero(), "weight {}", d);
        }
    }

    #[test]
    fn self_adjointness_of_real_density_blocks() {
        // u^2/2 at modes p and -p satisfies the adjoint relation exactly
        let h0 = Density::monomial(&[0, 0], ExactPoly::constant(rat(1, 2)));
        for d in 0..=5 {
            for p in 0..=3i64 {
                let up = quantize_block(&h0, p, d).unwrap();
                let down = quantize_block(&h0, -p, d + p as usize).unwrap();
                let defect = adjoint_defect(&up, &down).unwrap();
                assert!(defect.is_zero(), "d={} p={}", d, p);
            }
        }
    }

    #[test]
    fn density_calculus() {
        // d/dx(u^2/2) = u u_x
        let f = Density::monomial(&[0, 0], ExactPoly::constant(rat(1, 2)));
        assert_eq!(f.dx(), Density::monomial(&[0, 1], ExactPoly::one()));
        // partial_u(u^3/6) = u^2/2
        let c = Density::monomial(&[0, 0, 0], ExactPoly::constant(rat(1, 6)));
        assert_eq!(
            c.partial_u(),
            Density::monomial(&[0, 0], ExactPoly::constant(rat(1, 2)))
        );
        // integrate_x inverts dx on something nontrivial
        let g = Density::monomial(&[0, 1, 2], ExactPoly::one());
        assert_eq!(g.dx().integrate_x().unwrap(), g);
        // u_x^2 is not an exact derivative
        let ux2 = Density::monomial(&[1, 1], ExactPoly::one());
        assert!(ux2.integrate_x().is_err());
        // u u_xx + u_x^2 = d/dx(u u_x) is
        let mut exact = Density::monomial(&[0, 2], ExactPoly::one());
        exact.add_monomial(&[1, 1], ExactPoly::one());
        assert_eq!(
            exact.integrate_x().unwrap(),
            Density::monomial(&[0, 1], ExactPoly::one())
        );
    }

    #[test]
    fn block_json_mentions_basis() {
        let block = quantize_block(&Density::u(), 0, 1).unwrap();
        let s = serde_json::to_string(&block).unwrap();
        assert!(s.contains("\"basis\":\"monomial\""));
        assert!(s.contains("\"source_weight\":1"));
        let back: OperatorBlock = serde_json::from_str(&s).unwrap();
        assert_eq!(back, block);
    }
}
