//! Quadratic Lie algebras with exact rational structure constants.
//!
//! Indices are 0-based in the API and 1-based in algebra files and messages.
//! `f(a, b, c)` is the coefficient of `e_c` in `[e_a, e_b]`.

use std::path::Path;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{fmt_q, parse_rational, q, Q};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("conflicting bracket for [e{a},e{b}] coefficient of e{c}")]
    ConflictingBracket { a: usize, b: usize, c: usize },
    #[error("Jacobi identity fails at (a,b,c,d)=({a},{b},{c},{d}): residual {residual}")]
    JacobiViolation { a: usize, b: usize, c: usize, d: usize, residual: String },
    #[error("metric not ad-invariant at (a,b,c)=({a},{b},{c}): residual {residual}")]
    MetricNotInvariant { a: usize, b: usize, c: usize, residual: String },
    #[error("metric is singular")]
    MetricSingular,
    #[error("metric is not symmetric at ({a},{b})")]
    MetricNotSymmetric { a: usize, b: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

/// One bracket entry `[e_a, e_b] ∋ coeff · e_c` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub coeff: Q,
}

impl Bracket {
    pub fn new(a: usize, b: usize, c: usize, coeff: Q) -> Self {
        Bracket { a, b, c, coeff }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Identity,
    Matrix(Vec<Vec<Q>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticLieAlgebra {
    name: String,
    n: usize,
    f: Vec<Q>,
    /// Nonzero `(c, f(a,b,c))` for each ordered pair, indexed by `a*n+b`.
    nz: Vec<Vec<(usize, Q)>>,
    metric: Vec<Q>,
    metric_inv: Vec<Q>,
    orthonormal: bool,
}

impl QuadraticLieAlgebra {
    /// Builds and validates an algebra. Brackets give one orientation per
    /// pair; the antisymmetric partner is filled in automatically.
    pub fn new(name: &str, n: usize, brackets: &[Bracket], metric: Metric) -> Result<Self, LieError> {
        let zero = Q::zero();
        let mut f = vec![zero.clone(); n * n * n];
        let mut set = vec![false; n * n * n];
        let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        for br in brackets {
            for &i in &[br.a, br.b, br.c] {
                if i >= n {
                    return Err(LieError::IndexOutOfRange { index: i + 1, dim: n });
                }
            }
            if br.a == br.b {
                if br.coeff.is_zero() {
                    continue;
                }
                return Err(LieError::ConflictingBracket { a: br.a + 1, b: br.b + 1, c: br.c + 1 });
            }
            for (x, y, v) in [(br.a, br.b, br.coeff.clone()), (br.b, br.a, -br.coeff.clone())] {
                let k = idx(x, y, br.c);
                if set[k] && f[k] != v {
                    return Err(LieError::ConflictingBracket { a: br.a + 1, b: br.b + 1, c: br.c + 1 });
                }
                set[k] = true;
                f[k] = v;
            }
        }
        let metric = match metric {
            Metric::Identity => {
                let mut m = vec![zero.clone(); n * n];
                for a in 0..n {
                    m[a * n + a] = Q::one();
                }
                m
            }
            Metric::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(LieError::DimensionMismatch(format!("metric must be {n}x{n}")));
                }
                rows.into_iter().flatten().collect()
            }
        };
        for a in 0..n {
            for b in 0..a {
                if metric[a * n + b] != metric[b * n + a] {
                    return Err(LieError::MetricNotSymmetric { a: a + 1, b: b + 1 });
                }
            }
        }
        let metric_inv = invert(&metric, n).ok_or(LieError::MetricSingular)?;
        let orthonormal = (0..n).all(|a| {
            (0..n).all(|b| metric[a * n + b] == if a == b { Q::one() } else { Q::zero() })
        });
        let mut nz = vec![Vec::new(); n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = &f[idx(a, b, c)];
                    if !v.is_zero() {
                        nz[a * n + b].push((c, v.clone()));
                    }
                }
            }
        }
        let g = QuadraticLieAlgebra { name: name.to_string(), n, f, nz, metric, metric_inv, orthonormal };
        g.check_jacobi()?;
        g.check_invariance()?;
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn f(&self, a: usize, b: usize, c: usize) -> &Q {
        &self.f[(a * self.n + b) * self.n + c]
    }

    /// Nonzero terms of `[e_a, e_b]`.
    pub fn bracket(&self, a: usize, b: usize) -> &[(usize, Q)] {
        &self.nz[a * self.n + b]
    }

    pub fn metric(&self, a: usize, b: usize) -> &Q {
        &self.metric[a * self.n + b]
    }

    pub fn metric_inv(&self, a: usize, b: usize) -> &Q {
        &self.metric_inv[a * self.n + b]
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn is_diagonal_metric(&self) -> bool {
        let n = self.n;
        (0..n).all(|a| (0..n).all(|b| a == b || self.metric[a * n + b].is_zero()))
    }

    /// `(ad_x)_{ab}` with `[x, e_b] = Σ_a (ad_x)_{ab} e_a`.
    pub fn ad_matrix(&self, x: &[Q]) -> Vec<Vec<Q>> {
        let n = self.n;
        let mut m = vec![vec![Q::zero(); n]; n];
        for (c, xc) in x.iter().enumerate() {
            if xc.is_zero() {
                continue;
            }
            for b in 0..n {
                for (a, v) in self.bracket(c, b) {
                    m[*a][b] += xc * v;
                }
            }
        }
        m
    }

    fn check_jacobi(&self) -> Result<(), LieError> {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut res = vec![Q::zero(); n];
                    for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                        for (k, fk) in self.bracket(x, y) {
                            for (d, g) in self.bracket(*k, z) {
                                res[*d] += fk * g;
                            }
                        }
                    }
                    if let Some(d) = res.iter().position(|r| !r.is_zero()) {
                        return Err(LieError::JacobiViolation {
                            a: a + 1,
                            b: b + 1,
                            c: c + 1,
                            d: d + 1,
                            residual: fmt_q(&res[d]),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_invariance(&self) -> Result<(), LieError> {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = Q::zero();
                    for (k, v) in self.bracket(a, b) {
                        s += v * self.metric(*k, c);
                    }
                    for (k, v) in self.bracket(a, c) {
                        s += v * self.metric(b, *k);
                    }
                    if !s.is_zero() {
                        return Err(LieError::MetricNotInvariant {
                            a: a + 1,
                            b: b + 1,
                            c: c + 1,
                            residual: fmt_q(&s),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn so3() -> Self {
        let one = Q::one();
        let br = [
            Bracket::new(0, 1, 2, one.clone()),
            Bracket::new(1, 2, 0, one.clone()),
            Bracket::new(2, 0, 1, one),
        ];
        Self::new("so3", 3, &br, Metric::Identity).expect("so3 is valid")
    }

    pub fn abelian(n: usize) -> Self {
        Self::new(&format!("abelian{n}"), n, &[], Metric::Identity).expect("abelian is valid")
    }

    /// `so(4) ≅ so(3) ⊕ so(3)` with orthonormal metric.
    pub fn so4() -> Self {
        let one = Q::one();
        let mut br = Vec::new();
        for off in [0, 3] {
            br.push(Bracket::new(off, off + 1, off + 2, one.clone()));
            br.push(Bracket::new(off + 1, off + 2, off, one.clone()));
            br.push(Bracket::new(off + 2, off, off + 1, one.clone()));
        }
        Self::new("so4", 6, &br, Metric::Identity).expect("so4 is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self, LieError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LieError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Parses the key/value algebra format, e.g.
    ///
    /// ```text
    /// name = "so3"
    /// dim = 3
    /// brackets = [[1, 2, 3, "1"], [2, 3, 1, "1"], [3, 1, 2, "1"]]
    /// metric = "identity"
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, LieError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| LieError::Parse(e.to_string()))?;
        let name = table.get("name").and_then(|v| v.as_str()).unwrap_or("unnamed");
        let dim = table
            .get("dim")
            .and_then(|v| v.as_integer())
            .ok_or_else(|| LieError::Parse("missing integer `dim`".into()))?;
        if dim <= 0 {
            return Err(LieError::DimensionMismatch("dim must be positive".into()));
        }
        let n = dim as usize;
        let mut brackets = Vec::new();
        if let Some(list) = table.get("brackets") {
            let list = list.as_array().ok_or_else(|| LieError::Parse("`brackets` must be a list".into()))?;
            for entry in list {
                let e = entry
                    .as_array()
                    .filter(|e| e.len() == 4)
                    .ok_or_else(|| LieError::Parse("bracket entries are [a, b, c, \"p/q\"]".into()))?;
                let mut ix = [0usize; 3];
                for (k, slot) in ix.iter_mut().enumerate() {
                    let v = e[k].as_integer().ok_or_else(|| LieError::Parse("bracket indices must be integers".into()))?;
                    if v < 1 || v as usize > n {
                        return Err(LieError::IndexOutOfRange { index: v.max(0) as usize, dim: n });
                    }
                    *slot = v as usize - 1;
                }
                brackets.push(Bracket::new(ix[0], ix[1], ix[2], value_to_q(&e[3])?));
            }
        }
        let metric = match table.get("metric") {
            None => Metric::Identity,
            Some(toml::Value::String(s)) if s == "identity" => Metric::Identity,
            Some(toml::Value::Array(rows)) => {
                let mut m = Vec::new();
                for r in rows {
                    let r = r.as_array().ok_or_else(|| LieError::Parse("metric rows must be lists".into()))?;
                    m.push(r.iter().map(value_to_q).collect::<Result<Vec<_>, _>>()?);
                }
                Metric::Matrix(m)
            }
            Some(_) => return Err(LieError::Parse("`metric` must be \"identity\" or a matrix".into())),
        };
        Self::new(name, n, &brackets, metric)
    }
}

fn value_to_q(v: &toml::Value) -> Result<Q, LieError> {
    match v {
        toml::Value::String(s) => parse_rational(s).map_err(LieError::Parse),
        toml::Value::Integer(i) => Ok(q(*i)),
        toml::Value::Float(x) => Err(LieError::Parse(format!("float literal {x} is not allowed, use \"p/q\""))),
        other => Err(LieError::Parse(format!("expected a rational, found {other}"))),
    }
}

/// Gauss-Jordan inverse of a dense `n×n` rational matrix.
pub fn invert(m: &[Q], n: usize) -> Option<Vec<Q>> {
    let mut a: Vec<Vec<Q>> = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let k = a[r][col].clone();
                for j in 0..n {
                    let (x, y) = (a[col][j].clone(), inv[col][j].clone());
                    a[r][j] -= &k * x;
                    inv[r][j] -= &k * y;
                }
            }
        }
    }
    Some(inv.into_iter().flatten().collect())
}

/// A finite-dimensional super Lie algebra given by its bracket table on
/// generators. Generators are ordered even first, then odd, then central.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperLieAlgebra {
    pub even_dim: usize,
    pub odd_dim: usize,
    /// Index of the central generator, counted as even.
    pub central: Option<usize>,
    table: Vec<Vec<(usize, Q)>>,
}

impl SuperLieAlgebra {
    pub fn dim(&self) -> usize {
        self.even_dim + self.odd_dim + usize::from(self.central.is_some())
    }

    pub fn is_odd(&self, i: usize) -> bool {
        i >= self.even_dim && i < self.even_dim + self.odd_dim
    }

    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Q)] {
        &self.table[i * self.dim() + j]
    }

    fn bracket_vec(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim()];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                for (k, c) in self.bracket(i, j) {
                    out[*k] += xi * yj * c;
                }
            }
        }
        out
    }

    fn unit(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    /// First generator pair violating `[x,y] + (-1)^{|x||y|}[y,x] = 0`.
    pub fn check_super_antisymmetry(&self) -> Result<(), (usize, usize)> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let s = if self.is_odd(i) && self.is_odd(j) { q(1) } else { q(-1) };
                let a = self.bracket_vec(&self.unit(i), &self.unit(j));
                let b = self.bracket_vec(&self.unit(j), &self.unit(i));
                if a.iter().zip(&b).any(|(x, y)| !(x - &s * y).is_zero()) {
                    return Err((i, j));
                }
            }
        }
        Ok(())
    }

    /// First generator triple violating
    /// `[x,[y,z]] = [[x,y],z] + (-1)^{|x||y|}[y,[x,z]]`.
    pub fn check_super_jacobi(&self) -> Result<(), (usize, usize, usize)> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (self.unit(i), self.unit(j), self.unit(k));
                    let lhs = self.bracket_vec(&x, &self.bracket_vec(&y, &z));
                    let r1 = self.bracket_vec(&self.bracket_vec(&x, &y), &z);
                    let r2 = self.bracket_vec(&y, &self.bracket_vec(&x, &z));
                    let s = if self.is_odd(i) && self.is_odd(j) { q(-1) } else { q(1) };
                    if lhs.iter().zip(r1.iter().zip(&r2)).any(|(l, (a, b))| !(l - a - &s * b).is_zero()) {
                        return Err((i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    /// `(ad_x)_{ab}` with `[x, g_b] = Σ_a (ad_x)_{ab} g_a`.
    pub fn adjoint_matrix(&self, x: &[Q]) -> Result<Vec<Vec<Q>>, LieError> {
        let n = self.dim();
        if x.len() != n {
            return Err(LieError::DimensionMismatch(format!("vector of length {} for dimension {n}", x.len())));
        }
        let mut m = vec![vec![Q::zero(); n]; n];
        for b in 0..n {
            for (a, v) in self.bracket_vec(x, &self.unit(b)).into_iter().enumerate() {
                m[a][b] = v;
            }
        }
        Ok(m)
    }

    /// Supertraces of `ad_x^1 .. ad_x^kmax`, the central generator counted even.
    pub fn supertrace_powers(&self, x: &[Q], kmax: usize) -> Result<Vec<Q>, LieError> {
        let ad = self.adjoint_matrix(x)?;
        let mut p = ad.clone();
        let mut out = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            if k > 1 {
                p = mat_mul(&p, &ad);
            }
            let mut s = Q::zero();
            for (i, row) in p.iter().enumerate() {
                if self.is_odd(i) {
                    s -= &row[i];
                } else {
                    s += &row[i];
                }
            }
            out.push(s);
        }
        Ok(out)
    }
}

pub(crate) fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            let mut out = vec![Q::zero(); n];
            for (k, x) in row.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                for (o, y) in out.iter_mut().zip(&b[k]) {
                    if !y.is_zero() {
                        *o += x * y;
                    }
                }
            }
            out
        })
        .collect()
}

/// `T̃g[1]` on generators `e_1..e_n | ē_1..ē_n | c`:
/// `[e_a,e_b] = f_abc e_c`, `[e_a,ē_b] = f_abc ē_c`, `[ē_a,ē_b] = t_ab c`.
pub fn build_odd_double(g: &QuadraticLieAlgebra) -> SuperLieAlgebra {
    let n = g.dim();
    let dim = 2 * n + 1;
    let mut table = vec![Vec::new(); dim * dim];
    for a in 0..n {
        for b in 0..n {
            let br: Vec<(usize, Q)> = g.bracket(a, b).to_vec();
            table[a * dim + b] = br.clone();
            table[a * dim + n + b] = br.iter().map(|(c, v)| (n + c, v.clone())).collect();
            // [ē_b, e_a] = -[e_a, ē_b]
            table[(n + b) * dim + a] = br.iter().map(|(c, v)| (n + c, -v.clone())).collect();
            let t = g.metric(a, b);
            if !t.is_zero() {
                table[(n + a) * dim + n + b] = vec![(2 * n, t.clone())];
            }
        }
    }
    SuperLieAlgebra { even_dim: n, odd_dim: n, central: Some(2 * n), table }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn so3_is_epsilon() {
        let g = QuadraticLieAlgebra::so3();
        assert_eq!(*g.f(0, 1, 2), q(1));
        assert_eq!(*g.f(1, 0, 2), q(-1));
        assert_eq!(*g.f(2, 0, 1), q(1));
        assert!(g.f(0, 0, 1).is_zero());
    }

    #[test]
    fn ad_matrix_convention() {
        let g = QuadraticLieAlgebra::so3();
        let m = g.ad_matrix(&[q(0), q(0), q(1)]);
        // [e3, e2] = -e1 and [e3, e1] = e2
        assert_eq!(m[0][1], q(-1));
        assert_eq!(m[1][0], q(1));
        assert!(m[2][2].is_zero());
    }

    #[test]
    fn diagonal_cyclic_bracket_breaks_invariance() {
        let one = q(1);
        let br = [
            Bracket::new(0, 1, 2, one.clone()),
            Bracket::new(1, 2, 0, one.clone()),
            Bracket::new(2, 0, 1, -one),
        ];
        let err = QuadraticLieAlgebra::new("broken", 3, &br, Metric::Identity).unwrap_err();
        assert!(matches!(err, LieError::MetricNotInvariant { .. }), "{err}");
    }

    #[test]
    fn jacobi_counterexample_is_cited() {
        // [e1,e2]=e3, [e1,e3]=e1 gives [[e3,e1],e2] = -[e1,e2] = -e3 at (1,2,3).
        let br = [Bracket::new(0, 1, 2, q(1)), Bracket::new(0, 2, 0, q(1))];
        match QuadraticLieAlgebra::new("bad", 3, &br, Metric::Identity).unwrap_err() {
            LieError::JacobiViolation { a, b, c, d, .. } => {
                let mut abc = [a, b, c];
                abc.sort();
                assert_eq!(abc, [1, 2, 3]);
                assert!((1..=3).contains(&d));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn conflicting_duplicates_rejected() {
        let br = [Bracket::new(0, 1, 2, q(1)), Bracket::new(1, 0, 2, q(1))];
        assert!(matches!(
            QuadraticLieAlgebra::new("x", 3, &br, Metric::Identity),
            Err(LieError::ConflictingBracket { .. })
        ));
        let ok = [Bracket::new(0, 1, 2, q(1)), Bracket::new(1, 0, 2, q(-1))];
        let res = QuadraticLieAlgebra::new("x", 3, &ok, Metric::Identity);
        assert!(!matches!(res, Err(LieError::ConflictingBracket { .. })));
    }

    #[test]
    fn singular_metric_rejected() {
        let m = Metric::Matrix(vec![vec![q(1), q(1)], vec![q(1), q(1)]]);
        assert_eq!(QuadraticLieAlgebra::new("a", 2, &[], m), Err(LieError::MetricSingular));
    }

    #[test]
    fn toml_format_parses_and_rejects_floats() {
        let g = QuadraticLieAlgebra::from_toml(
            "name = \"so3\"\ndim = 3\nbrackets = [[1,2,3,\"1\"],[2,3,1,\"1\"],[3,1,2,\"1\"]]\nmetric = \"identity\"\n",
        )
        .unwrap();
        assert_eq!(g, QuadraticLieAlgebra::so3());
        let bad = QuadraticLieAlgebra::from_toml("dim = 1\nmetric = [[0.5]]\n");
        assert!(matches!(bad, Err(LieError::Parse(_))));
        let scaled = QuadraticLieAlgebra::from_toml("dim = 1\nmetric = [[\"1/2\"]]\n").unwrap();
        assert_eq!(*scaled.metric_inv(0, 0), q(2));
    }

    #[test]
    fn inverse_of_small_matrix() {
        let m = [q(2), q(1), q(1), q(1)];
        let inv = invert(&m, 2).unwrap();
        assert_eq!(inv, vec![q(1), q(-1), q(-1), q(2)]);
        let _ = qf(1, 2);
    }
    #[test]
    fn odd_double_is_super_lie() {
        for g in [QuadraticLieAlgebra::so3(), QuadraticLieAlgebra::abelian(1), QuadraticLieAlgebra::so4()] {
            let s = build_odd_double(&g);
            assert_eq!(s.check_super_antisymmetry(), Ok(()));
            assert_eq!(s.check_super_jacobi(), Ok(()));
        }
        let s = build_odd_double(&QuadraticLieAlgebra::abelian(1));
        assert_eq!(s.bracket(1, 1), &[(2, q(1))]);
        assert!(s.bracket(0, 1).is_empty());
    }

    #[test]
    fn super_ad_blocks_and_supertrace() {
        let s = build_odd_double(&QuadraticLieAlgebra::so3());
        // x = ē_1: [ē_1, e_b] lands in the odd block, [ē_1, ē_1] = c
        let mut x = vec![q(0); 7];
        x[3] = q(1);
        let m = s.adjoint_matrix(&x).unwrap();
        assert_eq!(m[6][3], q(1));
        assert_eq!(m[5][1], q(1)); // [ē1, e2] = f_12c ē_c = ē3
        let x: Vec<Q> = [1, 2, 0, 0, 0, 1, 0].iter().map(|&v| q(v)).collect();
        assert!(s.supertrace_powers(&x, 6).unwrap().iter().all(|v| v.is_zero()));
        assert!(s.adjoint_matrix(&[q(1)]).is_err());
    }
}
