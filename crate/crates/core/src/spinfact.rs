//! Numeric checks of the factorization of the spin representation
//! `ϱ : Cl(g) → End(∧g)` through `SO(W)`, `W = g ⊕ g*`.
//!
//! `∧(R^n)` uses the subset basis: bit `i` of the index marks `e_i`, and a
//! basis vector is the wedge of its generators in increasing order.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{Letter, Monomial, Terms};
use crate::duflo::{b2k, t_coeff};
use crate::liealg::QuadraticLieAlgebra;
use crate::rational::{to_f64, Q};

pub const MAX_DIM: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("dimension {n} exceeds the cap {MAX_DIM}")]
    DimensionCap { n: usize },
    #[error("det(C - I) = {det:e} is numerically zero")]
    SingularCMinusI { det: f64 },
    #[error("det(D) = {det:e} is numerically zero")]
    SingularD { det: f64 },
    #[error("C and D do not commute: residual {residual:e}")]
    NonCommuting { residual: f64 },
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtOp {
    /// `e_i ∧ ·`
    Wedge(usize),
    /// `ι_i`, contraction with the dual basis vector
    Contract(usize),
    /// `ϱ(ξ_i) = e_i ∧ · + ½ ι_i`
    Rho(usize),
}

type SparseVec = Vec<(usize, f64)>;

fn sign_below(s: usize, i: usize) -> f64 {
    if (s & ((1 << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn apply_op(op: ExtOp, v: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(v.len() * 2);
    for &(s, c) in v {
        match op {
            ExtOp::Wedge(i) if s & (1 << i) == 0 => out.push((s | 1 << i, c * sign_below(s, i))),
            ExtOp::Contract(i) if s & (1 << i) != 0 => out.push((s & !(1 << i), c * sign_below(s, i))),
            ExtOp::Rho(i) => {
                if s & (1 << i) == 0 {
                    out.push((s | 1 << i, c * sign_below(s, i)));
                } else {
                    out.push((s & !(1 << i), 0.5 * c * sign_below(s, i)));
                }
            }
            _ => {}
        }
    }
    out
}

/// Matrix on `∧(R^bits)` of `Σ c · op_1 ∘ … ∘ op_k` (rightmost applied first).
pub fn operator_matrix(bits: usize, words: &[(f64, Vec<ExtOp>)]) -> DMatrix<f64> {
    let dim = 1usize << bits;
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        for (c, word) in words {
            let mut v: SparseVec = vec![(s, *c)];
            for op in word.iter().rev() {
                v = apply_op(*op, &v);
                if v.is_empty() {
                    break;
                }
            }
            for (t, x) in v {
                m[(t, s)] += x;
            }
        }
    }
    m
}

fn check_dim(n: usize) -> Result<(), SpinError> {
    if n == 0 || n > MAX_DIM {
        return Err(SpinError::DimensionCap { n });
    }
    Ok(())
}

/// `ϱ(a)` for an exact Clifford element whose odd letters are `0..n`.
pub fn rho_matrix(n: usize, a: &Terms) -> Result<DMatrix<f64>, SpinError> {
    check_dim(n)?;
    let words: Vec<(f64, Vec<ExtOp>)> = a
        .iter()
        .map(|(m, c)| (to_f64(c), m.letters().iter().map(|&l| ExtOp::Rho(l as usize)).collect()))
        .collect();
    Ok(operator_matrix(n, &words))
}

pub fn vacuum(n: usize) -> DVector<f64> {
    let mut v = DVector::zeros(1 << n);
    v[0] = 1.0;
    v
}

/// `−Σ_{i<j} a_ij ξ_i ξ_j`. Its odd bracket with `ξ_b` is `Σ_j a_bj ξ_j`,
/// i.e. `Aᵀ e_b` in the column convention.
pub fn tau_inverse_so(a: &[Vec<Q>]) -> Result<Terms, SpinError> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(SpinError::DimensionMismatch("matrix is not square".into()));
    }
    let mut out = Terms::zero();
    for i in 0..n {
        if !a[i][i].is_zero() {
            return Err(SpinError::NotAntisymmetric);
        }
        for j in i + 1..n {
            if a[i][j] != -a[j][i].clone() {
                return Err(SpinError::NotAntisymmetric);
            }
            out.add_term(Monomial(vec![i as Letter, j as Letter]), -a[i][j].clone());
        }
    }
    Ok(out)
}

fn is_antisymmetric(a: &DMatrix<f64>, tol: f64) -> bool {
    a.is_square() && (a + a.transpose()).amax() <= tol
}

/// `Ĉ = exp(ϱ(Σ_{i<j} a_ij ξ_iξ_j))`, the spin element covering `exp(A)`.
pub fn spin_lift(a: &DMatrix<f64>) -> Result<DMatrix<f64>, SpinError> {
    let n = a.nrows();
    check_dim(n)?;
    if !is_antisymmetric(a, 1e-12) {
        return Err(SpinError::NotAntisymmetric);
    }
    let mut words = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            words.push((a[(i, j)], vec![ExtOp::Rho(i), ExtOp::Rho(j)]));
        }
    }
    Ok(operator_matrix(n, &words).exp())
}

/// `h(C) = [[½(C+I), C−I], [¼(C−I), ½(C+I)]]` on `g ⊕ g*`.
pub fn h_embed(c: &DMatrix<f64>) -> DMatrix<f64> {
    let n = c.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    let p = (c + &id) * 0.5;
    let q = c - &id;
    h.view_mut((0, 0), (n, n)).copy_from(&p);
    h.view_mut((0, n), (n, n)).copy_from(&q);
    h.view_mut((n, 0), (n, n)).copy_from(&(&q * 0.25));
    h.view_mut((n, n), (n, n)).copy_from(&p);
    h
}

/// Gram matrix of `B_W((x,α),(y,β)) = α(y) + β(x)`.
pub fn b_w_gram(n: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        g[(i, n + i)] = 1.0;
        g[(n + i, i)] = 1.0;
    }
    g
}

/// `κ(x, y) = (x + y, ½(x − y))`.
pub fn kappa(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut w = DVector::zeros(2 * n);
    w.rows_mut(0, n).copy_from(&(x + y));
    w.rows_mut(n, n).copy_from(&((x - y) * 0.5));
    w
}

/// `κ⁻¹(x, α) = (½x + α, ½x − α)`.
pub fn kappa_inverse(w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n = w.len() / 2;
    let x = w.rows(0, n).into_owned();
    let a = w.rows(n, n).into_owned();
    (&x * 0.5 + &a, &x * 0.5 - &a)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationResult {
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub e2: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub det_sqrt_r: f64,
    /// Max entrywise deviation of the reassembled block product from `h(C)`.
    pub reassembly_residual: f64,
}

fn invert(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().try_inverse().expect("checked invertible")
}

/// `E₁ = ½(C+I)/(C−I) − 1/D`, `E₂ = D⁻²((C−C⁻¹)/2 − D)`, `R = D/(I−C⁻¹)`.
pub fn factorize(c: &DMatrix<f64>, d: &DMatrix<f64>, tol: f64) -> Result<FactorizationResult, SpinError> {
    let n = c.nrows();
    if !c.is_square() || d.shape() != c.shape() {
        return Err(SpinError::DimensionMismatch("C and D must be square of equal size".into()));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let det_cm = (c - &id).determinant();
    if det_cm.abs() <= tol {
        return Err(SpinError::SingularCMinusI { det: det_cm });
    }
    let det_d = d.determinant();
    if det_d.abs() <= tol {
        return Err(SpinError::SingularD { det: det_d });
    }
    let comm = (c * d - d * c).amax();
    if comm > tol {
        return Err(SpinError::NonCommuting { residual: comm });
    }
    let ci = invert(c);
    let di = invert(d);
    let e1 = (c + &id) * 0.5 * invert(&(c - &id)) - &di;
    let e2 = &di * &di * ((c - &ci) * 0.5 - d);
    let r = d * invert(&(&id - &ci));
    let det_sqrt_r = r.determinant().abs().sqrt();
    let reassembly_residual = (reassemble(&e1, d, &e2, &r) - h_embed(c)).amax();
    Ok(FactorizationResult { c: c.clone(), d: d.clone(), e1, e2, r, det_sqrt_r, reassembly_residual })
}

/// `[[I,0],[E₁,I]] · [[I,D],[0,I]] · [[I,0],[E₂,I]] · [[R,0],[0,R⁻ᵀ]]`.
pub fn reassemble(e1: &DMatrix<f64>, d: &DMatrix<f64>, e2: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let zero = DMatrix::<f64>::zeros(n, n);
    let block = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, dd: &DMatrix<f64>| {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((0, n), (n, n)).copy_from(b);
        m.view_mut((n, 0), (n, n)).copy_from(c);
        m.view_mut((n, n), (n, n)).copy_from(dd);
        m
    };
    block(&id, &zero, e1, &id)
        * block(&id, d, &zero, &id)
        * block(&id, &zero, e2, &id)
        * block(r, &zero, &zero, &invert(r).transpose())
}

/// `exp(½ Σ E_ij ι_i ι_j)`.
fn contraction_exp(e: &DMatrix<f64>) -> DMatrix<f64> {
    let n = e.nrows();
    let mut words = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if e[(i, j)] != 0.0 {
                words.push((0.5 * e[(i, j)], vec![ExtOp::Contract(i), ExtOp::Contract(j)]));
            }
        }
    }
    operator_matrix(n, &words).exp()
}

/// `exp(½ Σ D_ij e_i ∧ e_j ∧ ·)`.
fn wedge_exp(d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let mut words = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if d[(i, j)] != 0.0 {
                words.push((0.5 * d[(i, j)], vec![ExtOp::Wedge(i), ExtOp::Wedge(j)]));
            }
        }
    }
    operator_matrix(n, &words).exp()
}

/// Extension of `R ∈ GL(n)` to an automorphism of `∧(R^n)`: entries are the
/// minors of `R` on (row subset, column subset).
pub fn exterior_automorphism(r: &DMatrix<f64>) -> DMatrix<f64> {
    let n = r.nrows();
    let dim = 1usize << n;
    let bits = |s: usize| (0..n).filter(|i| s & (1 << i) != 0).collect::<Vec<_>>();
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let cols = bits(s);
        for t in 0..dim {
            if t.count_ones() != s.count_ones() {
                continue;
            }
            m[(t, s)] = if cols.is_empty() {
                1.0
            } else {
                let rows = bits(t);
                DMatrix::from_fn(rows.len(), cols.len(), |i, j| r[(rows[i], cols[j])]).determinant()
            };
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinReport {
    pub n: usize,
    pub fac_residual: f64,
    pub symb_residual: f64,
    pub reassembly_residual: f64,
    pub covering_residual: f64,
    /// The branch of `|det|^{1/2}(R̂)` that makes the factorization hold.
    pub det_sign: f64,
    pub tol: f64,
}

impl SpinReport {
    pub fn ok(&self) -> bool {
        self.fac_residual <= self.tol
            && self.symb_residual <= self.tol
            && self.reassembly_residual <= self.tol
            && self.covering_residual <= self.tol
    }
}

/// `ϱ(Ĉ) = exp(ι_{γ(E₁)}) exp(λ(D)) exp(ι_{γ(E₂)}) R / |det|^{1/2}(R̂)` for
/// `C = exp(A)`, `D = A`, checked entrywise on the whole of `∧(R^n)`; also
/// its value on `1` and `Ĉ ϱ(ξ_b) Ĉ⁻¹ = ϱ(C ξ_b)`.
pub fn verify_spin_factorization(a: &DMatrix<f64>, tol: f64) -> Result<SpinReport, SpinError> {
    let n = a.nrows();
    check_dim(n)?;
    if !is_antisymmetric(a, 1e-12) {
        return Err(SpinError::NotAntisymmetric);
    }
    let c = a.clone().exp();
    let fr = factorize(&c, a, tol)?;
    let lhs = spin_lift(a)?;
    let g1 = contraction_exp(&fr.e1);
    let lam = wedge_exp(&fr.d);
    let g2 = contraction_exp(&fr.e2);
    let rauto = exterior_automorphism(&fr.r);
    let raw = &g1 * &lam * &g2 * &rauto;
    let (det_sign, fac_residual) = [1.0, -1.0]
        .into_iter()
        .map(|s| (s, (&lhs - &raw / (s * fr.det_sqrt_r)).amax()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("two candidates");
    let one = vacuum(n);
    let symb_residual = (&lhs * &one - &g1 * &lam * &one / (det_sign * fr.det_sqrt_r)).amax();
    let inv = lhs.clone().try_inverse().ok_or(SpinError::SingularD { det: 0.0 })?;
    let mut covering_residual: f64 = 0.0;
    for b in 0..n {
        let rb = operator_matrix(n, &[(1.0, vec![ExtOp::Rho(b)])]);
        let words: Vec<_> = (0..n).map(|i| (c[(i, b)], vec![ExtOp::Rho(i)])).collect();
        let expect = operator_matrix(n, &words);
        covering_residual = covering_residual.max((&lhs * rb * &inv - expect).amax());
    }
    Ok(SpinReport {
        n,
        fac_residual,
        symb_residual,
        reassembly_residual: fr.reassembly_residual,
        covering_residual,
        det_sign,
        tol,
    })
}

/// Factorization for odd `n`: the kernel line of `A` is rotated into the
/// last coordinate, where `C` acts trivially and the lift acts as a scalar,
/// and the factorization runs on the even-dimensional complement.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSpinReport {
    pub block: SpinReport,
    /// `‖ϱ(Ĉ) − ϱ'(Ĉ') ⊗ I‖` after the change of basis.
    pub split_residual: f64,
}

impl ExtendedSpinReport {
    pub fn ok(&self) -> bool {
        self.block.ok() && self.split_residual <= self.block.tol
    }
}

/// Orthogonal `Q` whose last column spans the kernel of antisymmetric `a`.
pub fn kernel_frame(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (imin, _) = svd.singular_values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).expect("n > 0");
    let k: DVector<f64> = vt.row(imin).transpose();
    let (p, _) = k.iter().enumerate().max_by(|x, y| x.1.abs().total_cmp(&y.1.abs())).expect("n > 0");
    let mut m = DMatrix::zeros(n, n);
    m.set_column(0, &k);
    for (col, j) in (0..n).filter(|&j| j != p).enumerate() {
        m[(j, col + 1)] = 1.0;
    }
    let qm = m.qr().q();
    DMatrix::from_fn(n, n, |i, j| qm[(i, (j + 1) % n)])
}

pub fn verify_spin_factorization_extended(a: &DMatrix<f64>, tol: f64) -> Result<ExtendedSpinReport, SpinError> {
    let n = a.nrows();
    check_dim(n)?;
    if n % 2 == 0 {
        return Err(SpinError::DimensionMismatch(format!("extension is for odd dimensions, got {n}")));
    }
    if !is_antisymmetric(a, 1e-12) {
        return Err(SpinError::NotAntisymmetric);
    }
    let qm = kernel_frame(a);
    let rot = qm.transpose() * a * &qm;
    let m = n - 1;
    let block = DMatrix::from_fn(m, m, |i, j| 0.5 * (rot[(i, j)] - rot[(j, i)]));
    let report = verify_spin_factorization(&block, tol)?;
    let full = spin_lift(&DMatrix::from_fn(n, n, |i, j| if i < m && j < m { block[(i, j)] } else { 0.0 }))?;
    let small = spin_lift(&block)?;
    // the extra generator is the top bit, so ϱ'(Ĉ') ⊗ I is block diagonal
    let half = 1usize << m;
    let kron = DMatrix::from_fn(2 * half, 2 * half, |i, j| if i / half == j / half { small[(i % half, j % half)] } else { 0.0 });
    let leak = (0..n).map(|i| rot[(i, m)].abs().max(rot[(m, i)].abs())).fold(0.0, f64::max);
    Ok(ExtendedSpinReport { block: report, split_residual: (full - kron).amax().max(leak) })
}

/// Seeded antisymmetric matrix with operator norm in `[0.5, 1]`.
pub fn random_antisymmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            a[(i, j)] = x;
            a[(j, i)] = -x;
        }
    }
    let op_norm = a.clone().singular_values().max().max(1e-300);
    let target: f64 = rng.random_range(0.5..1.0);
    a * (target / op_norm)
}

/// `Σ_k c_k X^k` summed for `k ≤ kmax`.
fn matrix_series(x: &DMatrix<f64>, coeffs: &[(usize, f64)]) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = DMatrix::zeros(n, n);
    let mut pow = DMatrix::<f64>::identity(n, n);
    let mut k = 0;
    for &(deg, c) in coeffs {
        while k < deg {
            pow = &pow * x;
            k += 1;
        }
        out += &pow * c;
    }
    out
}

const SERIES_TERMS: usize = 14;

/// `j^{1/2}(X) = exp(Σ_k b_2k tr X^{2k})`, numerically.
pub fn jhalf_numeric(x: &DMatrix<f64>) -> f64 {
    let x2 = x * x;
    let mut p = x2.clone();
    let mut log = 0.0;
    for k in 1..=SERIES_TERMS {
        if k > 1 {
            p = &p * &x2;
        }
        log += to_f64(&b2k(k)) * p.trace();
    }
    log.exp()
}

/// `f(X)` for `f(s) = ½coth(s/2) − 1/s`, numerically.
pub fn f_numeric(x: &DMatrix<f64>) -> DMatrix<f64> {
    let coeffs: Vec<(usize, f64)> = (1..=SERIES_TERMS).map(|k| (2 * k - 1, to_f64(&t_coeff(k)))).collect();
    matrix_series(x, &coeffs)
}

/// `(ad μ)_ij = Σ_c μ_c f(c, j, i)` as a float matrix.
pub fn ad_numeric(g: &QuadraticLieAlgebra, mu: &[f64]) -> DMatrix<f64> {
    let n = g.dim();
    DMatrix::from_fn(n, n, |i, j| (0..n).map(|c| mu[c] * to_f64(g.f(c, j, i))).sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BridgeReport {
    pub rank: usize,
    pub jhalf_factorization: f64,
    pub jhalf_series: f64,
    pub e1_deviation: f64,
    pub tol: f64,
}

impl BridgeReport {
    pub fn ok(&self) -> bool {
        (self.jhalf_factorization - self.jhalf_series).abs() <= self.tol && self.e1_deviation <= self.tol
    }
}

fn eval_poly(t: &Terms, x: &[f64]) -> f64 {
    t.iter().map(|(m, c)| to_f64(c) * m.letters().iter().map(|&l| x[l as usize]).product::<f64>()).sum()
}

/// Compares `1/|det|^{1/2}(R̂)` and `E₁` from the factorization at
/// `C = exp(ad μ)`, `D = ad μ` with the exact series `j^{1/2}` and `f(ad)`
/// truncated at `order` and evaluated at `μ`. Since `ad μ` is singular on a
/// semisimple algebra the factorization runs on the range of `ad μ`; the
/// kernel contributes `E₁ = 0` and `R = I`.
pub fn verify_duflo_bridge(g: &QuadraticLieAlgebra, mu: &[Q], order: usize, tol: f64) -> Result<BridgeReport, SpinError> {
    let n = g.dim();
    if mu.len() != n {
        return Err(SpinError::DimensionMismatch(format!("μ has length {} for dimension {n}", mu.len())));
    }
    check_dim(n)?;
    let mu_f: Vec<f64> = mu.iter().map(to_f64).collect();
    let ad = ad_numeric(g, &mu_f);
    let svd = ad.clone().svd(true, false);
    let u = svd.u.as_ref().expect("requested");
    let keep: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] > 1e-10).collect();
    let rank = keep.len();
    let (jf, e1_full) = if rank == 0 {
        (1.0, DMatrix::zeros(n, n))
    } else {
        let basis = DMatrix::from_fn(n, rank, |i, j| u[(i, keep[j])]);
        let d = basis.transpose() * &ad * &basis;
        let fr = factorize(&d.clone().exp(), &d, 1e-12)?;
        (1.0 / fr.det_sqrt_r, &basis * fr.e1 * basis.transpose())
    };
    let js = eval_poly(&crate::duflo::jhalf_operator(g, order).scalar, &mu_f);
    let t = crate::duflo::T_operator(g, order);
    let te = DMatrix::from_fn(n, n, |i, j| eval_poly(&t.matrix[i][j], &mu_f));
    Ok(BridgeReport { rank, jhalf_factorization: jf, jhalf_series: js, e1_deviation: (e1_full - te).amax(), tol })
}

/// `exp(M)·v` by a Taylor series on the vector.
fn exp_apply(apply: impl Fn(&DVector<f64>) -> DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = v.clone();
    let mut term = v.clone();
    for k in 1..200 {
        term = apply(&term) / k as f64;
        out += &term;
        if term.amax() < 1e-18 {
            break;
        }
    }
    out
}

fn apply_words(bits: usize, words: &[(f64, Vec<ExtOp>)], v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(1 << bits);
    for (s, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (c, word) in words {
            let mut sv: SparseVec = vec![(s, c * x)];
            for op in word.iter().rev() {
                sv = apply_op(*op, &sv);
                if sv.is_empty() {
                    break;
                }
            }
            for (t, y) in sv {
                out[t] += y;
            }
        }
    }
    out
}

/// `ϱ(exp_Cl(Y))·1 = j^{1/2}(μ) exp(½ T_ab(μ) ι_aι_b) exp_∧(Y)` with
/// `Y = −½ μ_a f_abc ξ_bξ_c + ν_a ξ_a`. The `ν_a` are odd parameters: they
/// are adjoined as `n` extra exterior generators, and `ν_a` enters as
/// `coeff · (extra generator a)`. Returns the max deviation.
pub fn verify_strong_factorization(g: &QuadraticLieAlgebra, mu: &[f64], nu: &[f64]) -> Result<f64, SpinError> {
    let n = g.dim();
    if mu.len() != n || nu.len() != n {
        return Err(SpinError::DimensionMismatch("μ and ν must match the dimension".into()));
    }
    check_dim(2 * n)?;
    let bits = 2 * n;
    let y = |lin: fn(usize) -> ExtOp| {
        let mut words = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let f = to_f64(g.f(a, b, c));
                    if f != 0.0 && mu[a] != 0.0 {
                        words.push((-0.5 * mu[a] * f, vec![lin(b), lin(c)]));
                    }
                }
            }
            if nu[a] != 0.0 {
                words.push((nu[a], vec![ExtOp::Wedge(n + a), lin(a)]));
            }
        }
        words
    };
    let y_cl = y(ExtOp::Rho);
    let y_ext = y(ExtOp::Wedge);
    let one = vacuum(bits);
    let lhs = exp_apply(|v| apply_words(bits, &y_cl, v), &one);
    let ad = ad_numeric(g, mu);
    let t = f_numeric(&ad);
    let mut k_words = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if t[(a, b)] != 0.0 {
                k_words.push((0.5 * t[(a, b)], vec![ExtOp::Contract(a), ExtOp::Contract(b)]));
            }
        }
    }
    let ext = exp_apply(|v| apply_words(bits, &y_ext, v), &one);
    let rhs = exp_apply(|v| apply_words(bits, &k_words, v), &ext) * jhalf_numeric(&ad);
    Ok((lhs - rhs).amax())
}
