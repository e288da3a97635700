//! The Duflo map, the contraction operator `exp(½ T_ab(∂) ι_aι_b)`, the
//! quantization map `Q : W → NW` and the verifiers built on them.
//!
//! Series in `x` are polynomials over the letters `0..n` (commuting). They
//! act on `W` or `S(g)` by `x_a ↦ ∂/∂v^a`. Every series is cut at the
//! polynomial degree of its input, which is exact because each correction
//! strictly lowers the `v`-degree.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{monomials_up_to, FreeSuper, Letter, Monomial, SuperAlgebra, Terms};
use crate::gdiff::{self, CheckRecord, OpKind, Space};
use crate::liealg::{build_odd_double, QuadraticLieAlgebra};
use crate::ncweil::{self, NcAlgebra, NcKind, NormalOrderedElement};
use crate::rational::{factorial, fmt_q, q, Q};
use crate::weil::{self, PolyKind, SuperPolynomial, WeilError};

/// Sign in front of `½ Σ T_ab(∂) ι_a ι_b`, with `ι_aι_b` acting as
/// `ι_a ∘ ι_b` and `T = f(ad)` in the column convention of
/// [`QuadraticLieAlgebra::ad_matrix`]. The opposite sign breaks the chain-map
/// check at degree 3 and the main-theorem check at degree 4 on so(3).
pub const CONTRACTION_SIGN: i64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DufloError {
    #[error("truncation {trunc} is below the input degree {degree}")]
    TruncationTooLow { trunc: usize, degree: usize },
    #[error("element is not basic")]
    NotBasic,
    #[error("supertrace of ad^{k} is nonzero: {value}")]
    SupertraceNonzero { k: usize, value: String },
    #[error(transparent)]
    Weil(#[from] WeilError),
}

/// `B_0 .. B_m` with `B_1 = -1/2`.
pub fn bernoulli(m: usize) -> Vec<Q> {
    let mut b = vec![Q::one()];
    for k in 1..=m {
        // Σ_{j<k+1} C(k+1, j) B_j = 0
        let mut s = Q::zero();
        let mut binom = Q::one();
        for (j, bj) in b.iter().enumerate() {
            s += &binom * bj;
            binom = binom * q((k + 1 - j) as i64) / q((j + 1) as i64);
        }
        b.push(-s / q((k + 1) as i64));
    }
    b
}

/// Coefficient of `tr(ad_x^{2k})` in `ln j^{1/2}(x)`: `B_2k / (4k (2k)!)`.
pub fn b2k(k: usize) -> Q {
    &bernoulli(2 * k)[2 * k] / (q(4 * k as i64) * factorial(2 * k))
}

/// Coefficient of `s^{2k-1}` in `f(s) = ½ coth(s/2) − 1/s`: `B_2k / (2k)!`.
pub fn t_coeff(k: usize) -> Q {
    &bernoulli(2 * k)[2 * k] / factorial(2 * k)
}

fn sym_alg(n: usize) -> FreeSuper {
    FreeSuper { n_even: n, n_odd: 0 }
}

type PolyMatrix = Vec<Vec<Terms>>;

/// `ad_x` with polynomial entries: `(ad_x)_ij = Σ_c x_c f(c, j, i)`.
fn ad_poly(g: &QuadraticLieAlgebra) -> PolyMatrix {
    let n = g.dim();
    let mut m = vec![vec![Terms::zero(); n]; n];
    for c in 0..n {
        for j in 0..n {
            for (i, v) in g.bracket(c, j) {
                m[*i][j].add_scaled(&Terms::letter(c as Letter), v);
            }
        }
    }
    m
}

fn poly_mat_mul(alg: &FreeSuper, a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let n = a.len();
    let mut out = vec![vec![Terms::zero(); n]; n];
    for (i, row) in a.iter().enumerate() {
        for (k, aik) in row.iter().enumerate().filter(|(_, t)| !t.is_zero()) {
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j].add_assign(&alg.mul(aik, &b[k][j]));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    JHalf,
    TExp,
}

/// A truncated series in `x`: the scalar `j^{1/2}(x)` or the matrix
/// `T(x) = f(ad_x)` feeding `exp(½ T_ab ι_aι_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeriesOperator {
    pub kind: SeriesKind,
    pub trunc: usize,
    pub dim: usize,
    pub scalar: Terms,
    pub matrix: PolyMatrix,
    pub sign: i64,
}

pub fn jhalf_operator(g: &QuadraticLieAlgebra, trunc: usize) -> TruncatedSeriesOperator {
    let n = g.dim();
    let alg = sym_alg(n);
    let ad = ad_poly(g);
    let ad2 = poly_mat_mul(&alg, &ad, &ad);
    let mut log = Terms::zero();
    let mut p = ad2.clone();
    for k in 1..=trunc / 2 {
        if k > 1 {
            p = poly_mat_mul(&alg, &p, &ad2);
        }
        let mut tr = Terms::zero();
        for (i, row) in p.iter().enumerate() {
            tr.add_assign(&row[i]);
        }
        log.add_scaled(&tr, &b2k(k));
    }
    let cut = |t: Terms| t.filter(|m| m.len() <= trunc);
    let mut out = Terms::one();
    let mut term = Terms::one();
    for m in 1..=trunc / 2 {
        term = cut(alg.mul(&term, &log)).scaled(&(Q::one() / q(m as i64)));
        out.add_assign(&term);
    }
    TruncatedSeriesOperator { kind: SeriesKind::JHalf, trunc, dim: n, scalar: out, matrix: Vec::new(), sign: 1 }
}

#[allow(non_snake_case)]
pub fn T_operator(g: &QuadraticLieAlgebra, trunc: usize) -> TruncatedSeriesOperator {
    T_operator_signed(g, trunc, CONTRACTION_SIGN)
}

#[allow(non_snake_case)]
pub fn T_operator_signed(g: &QuadraticLieAlgebra, trunc: usize, sign: i64) -> TruncatedSeriesOperator {
    let n = g.dim();
    let alg = sym_alg(n);
    let ad = ad_poly(g);
    let ad2 = poly_mat_mul(&alg, &ad, &ad);
    let mut t = vec![vec![Terms::zero(); n]; n];
    let mut p = ad;
    for k in 1..=trunc.div_ceil(2) {
        if k > 1 {
            p = poly_mat_mul(&alg, &p, &ad2);
        }
        let c = t_coeff(k);
        for (ti, pi) in t.iter_mut().zip(&p) {
            for (tij, pij) in ti.iter_mut().zip(pi) {
                tij.add_scaled(pij, &c);
            }
        }
    }
    TruncatedSeriesOperator { kind: SeriesKind::TExp, trunc, dim: n, scalar: Terms::one(), matrix: t, sign }
}

/// `P(∂_v)` applied to `p`, whose even letters `0..n` are the `v`'s.
pub fn apply_diff(poly: &Terms, p: &Terms) -> Terms {
    let mut out = Terms::zero();
    for (alpha, c) in poly.iter() {
        for (m, d) in p.iter() {
            if let Some((rest, k)) = differentiate(m, alpha) {
                out.add_term(rest, c * d * k);
            }
        }
    }
    out
}

fn differentiate(m: &Monomial, alpha: &Monomial) -> Option<(Monomial, Q)> {
    let mut rest = m.letters().to_vec();
    let mut coeff = Q::one();
    for &l in alpha.letters() {
        let pos = rest.iter().position(|&x| x == l)?;
        coeff *= q(rest.iter().filter(|&&x| x == l).count() as i64);
        rest.remove(pos);
    }
    Some((Monomial(rest), coeff))
}

pub fn poly_degree(t: &Terms) -> usize {
    t.iter().map(|(m, _)| m.len()).max().unwrap_or(0)
}

fn check_trunc(trunc: usize, t: &Terms) -> Result<(), DufloError> {
    let degree = poly_degree(t);
    if trunc < degree {
        return Err(DufloError::TruncationTooLow { trunc, degree });
    }
    Ok(())
}

pub fn apply_jhalf(op: &TruncatedSeriesOperator, p: &SuperPolynomial) -> Result<SuperPolynomial, DufloError> {
    if !matches!(p.kind(), PolyKind::W | PolyKind::Sym) || p.dim() != op.dim {
        return Err(WeilError::ContextMismatch("j^1/2 acts on W or S(g)".into()).into());
    }
    check_trunc(op.trunc, p.terms())?;
    Ok(SuperPolynomial::new(p.kind(), p.dim(), apply_diff(&op.scalar, p.terms())))
}

fn contraction_step(op: &TruncatedSeriesOperator, iota: &[crate::algebra::Derivation], alg: &FreeSuper, x: &Terms) -> Terms {
    let n = op.dim;
    let mut out = Terms::zero();
    for b in 0..n {
        let ib = iota[b].apply(alg, x);
        if ib.is_zero() {
            continue;
        }
        for a in 0..n {
            if op.matrix[a][b].is_zero() {
                continue;
            }
            let iab = iota[a].apply(alg, &ib);
            out.add_assign(&apply_diff(&op.matrix[a][b], &iab));
        }
    }
    out.scaled(&(Q::new(op.sign.into(), 2.into())))
}

#[allow(non_snake_case)]
pub fn apply_T(g: &QuadraticLieAlgebra, op: &TruncatedSeriesOperator, p: &SuperPolynomial) -> Result<SuperPolynomial, DufloError> {
    if p.kind() != PolyKind::W || p.dim() != op.dim {
        return Err(WeilError::ContextMismatch("the T operator acts on W".into()).into());
    }
    check_trunc(op.trunc, p.terms())?;
    Ok(SuperPolynomial::new(PolyKind::W, p.dim(), exp_contraction(g, op, p.terms())))
}

fn exp_contraction(g: &QuadraticLieAlgebra, op: &TruncatedSeriesOperator, x: &Terms) -> Terms {
    let n = g.dim();
    let alg = FreeSuper { n_even: n, n_odd: n };
    let iota: Vec<_> = (0..n).map(|a| gdiff::operator(g, Space::W, OpKind::Iota(a)).derivation).collect();
    let mut out = x.clone();
    let mut term = x.clone();
    for m in 1.. {
        term = contraction_step(op, &iota, &alg, &term).scaled(&(Q::one() / q(m)));
        if term.is_zero() {
            break;
        }
        out.add_assign(&term);
    }
    out
}

/// `Q = (χ ⊗ q) ∘ j^{1/2}(∂) ∘ exp(½ T_ab(∂) ι_aι_b)` with operators cached
/// per truncation.
pub struct Quantizer {
    g: QuadraticLieAlgebra,
    nw: NcAlgebra,
    sign: i64,
    ops: Mutex<HashMap<usize, (TruncatedSeriesOperator, TruncatedSeriesOperator)>>,
}

impl Quantizer {
    pub fn new(g: &QuadraticLieAlgebra) -> Result<Self, DufloError> {
        Self::with_sign(g, CONTRACTION_SIGN)
    }

    pub fn with_sign(g: &QuadraticLieAlgebra, sign: i64) -> Result<Self, DufloError> {
        Ok(Quantizer { g: g.clone(), nw: NcAlgebra::new(NcKind::NW, g)?, sign, ops: Mutex::new(HashMap::new()) })
    }

    pub fn nw(&self) -> &NcAlgebra {
        &self.nw
    }

    fn operators(&self, trunc: usize) -> (TruncatedSeriesOperator, TruncatedSeriesOperator) {
        let mut cache = self.ops.lock().expect("operator cache");
        cache
            .entry(trunc)
            .or_insert_with(|| (jhalf_operator(&self.g, trunc), T_operator_signed(&self.g, trunc, self.sign)))
            .clone()
    }

    /// `Q` on raw `W` terms, truncated at the input degree.
    pub fn quantize_terms(&self, x: &Terms) -> Terms {
        let (j, t) = self.operators(poly_degree(x));
        let y = exp_contraction(&self.g, &t, x);
        ncweil::chi_q_terms(&self.nw, &apply_diff(&j.scalar, &y))
    }

    pub fn quantize(&self, p: &SuperPolynomial, trunc: usize) -> Result<NormalOrderedElement, DufloError> {
        if p.kind() != PolyKind::W || p.dim() != self.g.dim() {
            return Err(WeilError::ContextMismatch("Q acts on W".into()).into());
        }
        check_trunc(trunc, p.terms())?;
        let (j, t) = self.operators(trunc);
        let y = exp_contraction(&self.g, &t, p.terms());
        Ok(self.nw.element(ncweil::chi_q_terms(&self.nw, &apply_diff(&j.scalar, &y))))
    }
}

pub fn quantization_q(g: &QuadraticLieAlgebra, p: &SuperPolynomial, trunc: usize) -> Result<NormalOrderedElement, DufloError> {
    Quantizer::new(g)?.quantize(p, trunc)
}

/// `Υ = χ ∘ j^{1/2}(∂)` from `S(g)` to `U(g)`.
pub fn duflo_map(g: &QuadraticLieAlgebra, p: &SuperPolynomial, trunc: usize) -> Result<NormalOrderedElement, DufloError> {
    if p.kind() != PolyKind::Sym {
        return Err(WeilError::ContextMismatch("the Duflo map acts on S(g) (generators e)".into()).into());
    }
    let ug = NcAlgebra::new(NcKind::Ug, g)?;
    let y = apply_jhalf(&jhalf_operator(g, trunc), p)?;
    Ok(ncweil::pbw_chi(&ug, &y)?)
}

/// `str(ad_x^k) = 0` on `T̃g[1]` as a polynomial identity in the coordinates of
/// `x`, for `1 ≤ k ≤ kmax`.
pub fn check_supertrace_identity(g: &QuadraticLieAlgebra, kmax: usize) -> Result<(), DufloError> {
    let s = build_odd_double(g);
    let dim = s.dim();
    let alg = sym_alg(dim);
    let mut ad = vec![vec![Terms::zero(); dim]; dim];
    for c in 0..dim {
        for j in 0..dim {
            for (i, v) in s.bracket(c, j) {
                ad[*i][j].add_scaled(&Terms::letter(c as Letter), v);
            }
        }
    }
    let mut p = ad.clone();
    for k in 1..=kmax {
        if k > 1 {
            p = poly_mat_mul(&alg, &p, &ad);
        }
        let mut st = Terms::zero();
        for (i, row) in p.iter().enumerate() {
            if s.is_odd(i) {
                st = &st - &row[i];
            } else {
                st.add_assign(&row[i]);
            }
        }
        if !st.is_zero() {
            return Err(DufloError::SupertraceNonzero { k, value: st.render(|l| format!("x{}", l + 1)) });
        }
    }
    Ok(())
}

/// The Duflo map of `T̃g[1]`: after checking that its `j^{1/2}` is trivial
/// up to `trunc`, this is plain super-symmetrization.
pub fn super_duflo(g: &QuadraticLieAlgebra, p: &SuperPolynomial, trunc: usize) -> Result<NormalOrderedElement, DufloError> {
    check_supertrace_identity(g, trunc)?;
    let utg = NcAlgebra::new(NcKind::UTg, g)?;
    Ok(ncweil::pbw_chi(&utg, p)?)
}

/// Runs `check` on every item on all cores; returns the first failure in
/// item order.
fn par_first_failure<T: Sync>(items: &[T], check: impl Fn(&T) -> Option<String> + Sync) -> Option<String> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().find_map(&check))).collect();
        handles.into_iter().find_map(|h| h.join().expect("worker panicked"))
    })
}

/// `Q(σ0(m)) = σ1(super_duflo(m))` for every `c`-free monomial of
/// `S(T̃g[1])`, one record per weighted degree.
pub fn verify_main_theorem(g: &QuadraticLieAlgebra, max_degree: usize) -> Result<Vec<CheckRecord>, DufloError> {
    verify_main_theorem_signed(g, max_degree, CONTRACTION_SIGN)
}

pub fn verify_main_theorem_signed(g: &QuadraticLieAlgebra, max_degree: usize, sign: i64) -> Result<Vec<CheckRecord>, DufloError> {
    let n = g.dim();
    let qz = Quantizer::with_sign(g, sign)?;
    let utg = NcAlgebra::new(NcKind::UTg, g)?;
    let s0 = weil::sigma0_morphism(g)?;
    let s1 = ncweil::shift_nc(g, -1);
    let w = weil::kind_algebra(PolyKind::W, n);
    check_supertrace_identity(g, max_degree)?;
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let monos: Vec<Monomial> = crate::algebra::monomials_of_weight(n + 1, n, d)
            .into_iter()
            .filter(|m| m.count(n as Letter) == 0)
            .collect();
        let fail = par_first_failure(&monos, |m| {
            let x = Terms::monomial(m.clone(), Q::one());
            let lhs = qz.quantize_terms(&s0.apply(&w, &x));
            let sym = ncweil::pbw_chi(&utg, &SuperPolynomial::new(PolyKind::STg, n, x.clone())).ok()?;
            let rhs = s1.apply(qz.nw(), sym.terms());
            (lhs != rhs).then(|| {
                let show = |t: &Terms| t.render(|l| NcKind::NW.letter_name(n, l));
                format!("m={} lhs={} rhs={}", x.render(|l| PolyKind::STg.letter_name(n, l)), show(&lhs), show(&rhs))
            })
        });
        out.push(CheckRecord::from_result("main", &format!("deg{d}"), fail.map_or(Ok(()), Err)));
    }
    Ok(out)
}

/// `Q ∘ op = op ∘ Q` for `op ∈ {d, ι_a, L_a}` on all `W` monomials.
pub fn verify_chain_map(g: &QuadraticLieAlgebra, max_degree: usize) -> Result<Vec<CheckRecord>, DufloError> {
    verify_chain_map_signed(g, max_degree, CONTRACTION_SIGN)
}

pub fn verify_chain_map_signed(g: &QuadraticLieAlgebra, max_degree: usize, sign: i64) -> Result<Vec<CheckRecord>, DufloError> {
    let n = g.dim();
    let qz = Quantizer::with_sign(g, sign)?;
    let w = FreeSuper { n_even: n, n_odd: n };
    let monos = monomials_up_to(n, n, max_degree);
    let mut ops = vec![("d".to_string(), OpKind::D)];
    ops.extend((0..n).map(|a| (format!("iota{}", a + 1), OpKind::Iota(a))));
    ops.extend((0..n).map(|a| (format!("L{}", a + 1), OpKind::L(a))));
    let mut out = Vec::new();
    for (name, op) in ops {
        let dw = gdiff::operator(g, Space::W, op).derivation;
        let dn = gdiff::operator(g, Space::NW, op).derivation;
        let fail = par_first_failure(&monos, |m| {
            let x = Terms::monomial(m.clone(), Q::one());
            let lhs = qz.quantize_terms(&dw.apply(&w, &x));
            let rhs = dn.apply(qz.nw(), &qz.quantize_terms(&x));
            (lhs != rhs).then(|| format!("on {}", gdiff::render_letters(Space::W, n, &x)))
        });
        out.push(CheckRecord::from_result("chainmap", &name, fail.map_or(Ok(()), Err)));
    }
    Ok(out)
}

/// `Q(p^m) = Q(p)^m` for a basic `p`.
pub fn verify_invariant_homomorphism(g: &QuadraticLieAlgebra, p: &SuperPolynomial, powers: &[usize]) -> Result<Vec<CheckRecord>, DufloError> {
    if p.kind() != PolyKind::W {
        return Err(WeilError::ContextMismatch("expected an element of W".into()).into());
    }
    let c = gdiff::classify(g, Space::W, p.terms()).map_err(|e| match e {
        gdiff::GdiffError::Weil(w) => DufloError::Weil(w),
        other => DufloError::Weil(WeilError::ContextMismatch(other.to_string())),
    })?;
    if !c.basic {
        return Err(DufloError::NotBasic);
    }
    let qz = Quantizer::new(g)?;
    let qp = qz.quantize_terms(p.terms());
    let w = p.algebra();
    let mut out = Vec::new();
    for &m in powers {
        let lhs = qz.quantize_terms(&w.pow(p.terms(), m));
        let rhs = qz.nw().pow(&qp, m);
        let r = if lhs == rhs { Ok(()) } else { Err(format!("Q(p^{m}) - Q(p)^{m} = {}", (&lhs - &rhs).render(|l| NcKind::NW.letter_name(g.dim(), l)))) };
        out.push(CheckRecord::from_result("corollary", &format!("power{m}"), r));
    }
    Ok(out)
}

/// `Q` restricted to `∧(θ)` is `chevalley_q` and restricted to `S(v)` is the
/// Duflo map; checked on bases up to `max_degree` (weighted).
pub fn verify_restrictions(g: &QuadraticLieAlgebra, max_degree: usize) -> Result<Vec<CheckRecord>, DufloError> {
    let n = g.dim();
    let qz = Quantizer::new(g)?;
    let cl = NcAlgebra::new(NcKind::Cl, g)?;
    let mut odd_res = Ok(());
    for m in monomials_up_to(0, n, n) {
        let shifted = Monomial(m.letters().iter().map(|&l| l + n as Letter).collect());
        let lhs = qz.quantize_terms(&Terms::monomial(shifted, Q::one()));
        let ext = SuperPolynomial::new(PolyKind::Ext, n, Terms::monomial(m.clone(), Q::one()));
        let rhs = ncweil::chevalley_q(&cl, &ext)?.into_terms().relabel(|l| l + n as Letter);
        if lhs != rhs {
            odd_res = Err(format!("on {}", ext));
            break;
        }
    }
    let mut even_res = Ok(());
    for m in monomials_up_to(n, 0, max_degree) {
        let x = Terms::monomial(m, Q::one());
        let lhs = qz.quantize_terms(&x);
        let sym = SuperPolynomial::new(PolyKind::Sym, n, x.clone());
        let rhs = duflo_map(g, &sym, poly_degree(&x))?.into_terms();
        if lhs != rhs {
            even_res = Err(format!("on {sym}"));
            break;
        }
    }
    Ok(vec![
        CheckRecord::from_result("restriction", "exterior_is_chevalley", odd_res),
        CheckRecord::from_result("restriction", "symmetric_is_duflo", even_res),
    ])
}

/// Rank of `Q` on each weighted slice of `W` up to `max_degree`. `Q` is a
/// bijection when every slice has full rank (it preserves the filtration,
/// so the image of the slice is compared against all `NW` monomials).
pub fn verify_bijective(g: &QuadraticLieAlgebra, max_degree: usize) -> Result<CheckRecord, DufloError> {
    let n = g.dim();
    let qz = Quantizer::new(g)?;
    let monos = monomials_up_to(n, n, max_degree);
    let mut index: HashMap<Monomial, usize> = HashMap::new();
    let mut cols = Vec::new();
    for m in &monos {
        let img = qz.quantize_terms(&Terms::monomial(m.clone(), Q::one()));
        let col: Vec<(usize, Q)> = img
            .iter()
            .map(|(mm, c)| {
                let next = index.len();
                (*index.entry(mm.clone()).or_insert(next), c.clone())
            })
            .collect();
        cols.push(col);
    }
    let mut rows = vec![vec![Q::zero(); monos.len()]; index.len()];
    for (j, col) in cols.iter().enumerate() {
        for (r, c) in col {
            rows[*r][j] = c.clone();
        }
    }
    let rank = crate::linalg::rank(&rows);
    let ok = rank == monos.len();
    Ok(CheckRecord {
        space: "Q".into(),
        relation: format!("bijective_deg{max_degree}"),
        ok,
        counterexample: (!ok).then(|| format!("rank {rank} < {}", monos.len())),
    })
}

pub fn describe_conventions() -> String {
    format!(
        "conventions: [x,e_b] = sum_a (ad_x)_ab e_a; iota_a iota_b = iota_a after iota_b; contraction sign {}",
        if CONTRACTION_SIGN > 0 { "+" } else { "-" }
    )
}

pub fn fmt_coeffs(xs: &[Q]) -> String {
    xs.iter().map(fmt_q).collect::<Vec<_>>().join(", ")
}
