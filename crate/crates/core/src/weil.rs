//! Graded-commutative polynomial algebras: the Weil algebra `W` (`v`, `th`),
//! its Koszul presentation `WK` (`vh`, `th`), the symmetric algebra of the
//! odd double `STg` (`e`, `eb`, `c`), the exterior algebra `Ext` (`eb`) and
//! the plain symmetric algebra `Sym` (`e`).

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{FreeSuper, Letter, Monomial, Morphism, SuperAlgebra, Terms};
use crate::expr::{eval_expr, parse_expr, ExprError};
use crate::liealg::QuadraticLieAlgebra;
use crate::rational::{q, qf, Q};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeilError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("element is not purely odd")]
    NotPurelyOdd,
    #[error("element is not purely even")]
    NotPurelyEven,
    #[error("operation needs an orthonormal metric")]
    NotOrthonormal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolyKind {
    W,
    WK,
    STg,
    Ext,
    Sym,
}

impl PolyKind {
    pub fn n_even(self, n: usize) -> usize {
        match self {
            PolyKind::W | PolyKind::WK | PolyKind::Sym => n,
            PolyKind::STg => n + 1,
            PolyKind::Ext => 0,
        }
    }

    pub fn n_odd(self, n: usize) -> usize {
        match self {
            PolyKind::Sym => 0,
            _ => n,
        }
    }

    pub fn letter_name(self, n: usize, l: Letter) -> String {
        let l = l as usize;
        let ne = self.n_even(n);
        if l < ne {
            match self {
                PolyKind::W => format!("v{}", l + 1),
                PolyKind::WK => format!("vh{}", l + 1),
                PolyKind::STg if l == n => "c".into(),
                _ => format!("e{}", l + 1),
            }
        } else {
            let i = l - ne + 1;
            match self {
                PolyKind::W | PolyKind::WK => format!("th{i}"),
                _ => format!("eb{i}"),
            }
        }
    }

    /// Letter for a parsed generator, with whether it is odd.
    fn resolve(self, n: usize, name: &str, index: usize, pos: usize) -> Result<(Letter, bool), ExprError> {
        let ne = self.n_even(n);
        let (base, odd, bound) = match (self, name) {
            (PolyKind::W, "v") | (PolyKind::WK, "vh") | (PolyKind::STg, "e") | (PolyKind::Sym, "e") => (0, false, n),
            (PolyKind::STg, "c") => (n, false, 1),
            (PolyKind::W | PolyKind::WK, "th") | (PolyKind::STg, "eb") | (PolyKind::Ext, "eb" | "th") => (ne, true, n),
            _ => return Err(ExprError::UnknownGenerator { name: name.into(), pos }),
        };
        if index == 0 || index > bound {
            return Err(ExprError::IndexOutOfRange { name: name.into(), index, pos });
        }
        Ok(((base + index - 1) as Letter, odd))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuperPolynomial {
    kind: PolyKind,
    n: usize,
    terms: Terms,
}

impl SuperPolynomial {
    pub fn new(kind: PolyKind, n: usize, terms: Terms) -> Self {
        SuperPolynomial { kind, n, terms }
    }

    pub fn zero(kind: PolyKind, n: usize) -> Self {
        Self::new(kind, n, Terms::zero())
    }

    pub fn one(kind: PolyKind, n: usize) -> Self {
        Self::new(kind, n, Terms::one())
    }

    pub fn parse(src: &str, kind: PolyKind, n: usize) -> Result<Self, WeilError> {
        let alg = kind_algebra(kind, n);
        let e = parse_expr(src)?;
        let resolve = |name: &str, index: usize, pos: usize| {
            let (l, odd) = kind.resolve(n, name, index, pos)?;
            Ok((Terms::letter(l), odd))
        };
        Ok(Self::new(kind, n, eval_expr(&e, &alg, &resolve)?))
    }

    pub fn kind(&self) -> PolyKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn into_terms(self) -> Terms {
        self.terms
    }

    pub fn algebra(&self) -> FreeSuper {
        kind_algebra(self.kind, self.n)
    }

    pub fn n_even(&self) -> usize {
        self.kind.n_even(self.n)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    fn check(&self, other: &Self) -> Result<(), WeilError> {
        if self.kind != other.kind || self.n != other.n {
            return Err(WeilError::ContextMismatch(format!(
                "{:?}({}) vs {:?}({})",
                self.kind, self.n, other.kind, other.n
            )));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, WeilError> {
        self.check(other)?;
        Ok(Self::new(self.kind, self.n, self.algebra().mul(&self.terms, &other.terms)))
    }

    pub fn add(&self, other: &Self) -> Result<Self, WeilError> {
        self.check(other)?;
        Ok(Self::new(self.kind, self.n, &self.terms + &other.terms))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, WeilError> {
        self.check(other)?;
        Ok(Self::new(self.kind, self.n, &self.terms - &other.terms))
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.kind, self.n, self.terms.scaled(c))
    }

    pub fn pow(&self, k: usize) -> Self {
        Self::new(self.kind, self.n, self.algebra().pow(&self.terms, k))
    }

    /// Weighted total degree (even generators 2, odd 1) of the top term.
    pub fn degree(&self) -> usize {
        self.terms.max_weight(self.n_even())
    }

    pub fn is_purely_odd(&self) -> bool {
        let ne = self.n_even();
        self.terms.iter().all(|(m, _)| m.even_count(ne) == 0)
    }

    pub fn is_purely_even(&self) -> bool {
        let ne = self.n_even();
        self.terms.iter().all(|(m, _)| m.odd_count(ne) == 0)
    }
}

impl fmt::Display for SuperPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (k, n) = (self.kind, self.n);
        f.write_str(&self.terms.render(|l| k.letter_name(n, l)))
    }
}

pub fn kind_algebra(kind: PolyKind, n: usize) -> FreeSuper {
    FreeSuper { n_even: kind.n_even(n), n_odd: kind.n_odd(n) }
}

fn expect_kind(p: &SuperPolynomial, g: &QuadraticLieAlgebra, kind: PolyKind) -> Result<(), WeilError> {
    if p.kind != kind || p.n != g.dim() {
        return Err(WeilError::ContextMismatch(format!("expected {kind:?}({}), got {:?}({})", g.dim(), p.kind, p.n)));
    }
    Ok(())
}

/// `Σ_{j,k} c · f(j,k,a) th_j th_k` as terms over letters with odd offset `off`.
fn quad_theta(g: &QuadraticLieAlgebra, a: usize, off: usize, c: &Q) -> Terms {
    let n = g.dim();
    let mut t = Terms::zero();
    for j in 0..n {
        for k in 0..n {
            let v = g.f(j, k, a);
            if v.is_zero() || j == k {
                continue;
            }
            let (lo, hi, s) = if j < k { (j, k, q(1)) } else { (k, j, q(-1)) };
            t.add_term(Monomial(vec![(off + lo) as Letter, (off + hi) as Letter]), v * c * s);
        }
    }
    t
}

/// `v̂^a ↦ v^a − ½ f^a_{jk} θ^j θ^k`, `θ ↦ θ`.
pub fn tau0_morphism(g: &QuadraticLieAlgebra) -> Morphism {
    shift_morphism(g, &qf(-1, 2))
}

/// `v^a ↦ v̂^a + ½ f^a_{jk} θ^j θ^k`.
pub fn tau0_inv_morphism(g: &QuadraticLieAlgebra) -> Morphism {
    shift_morphism(g, &qf(1, 2))
}

fn shift_morphism(g: &QuadraticLieAlgebra, c: &Q) -> Morphism {
    let n = g.dim();
    let mut images = Vec::with_capacity(2 * n);
    for a in 0..n {
        let mut t = Terms::letter(a as Letter);
        t.add_assign(&quad_theta(g, a, n, c));
        images.push(t);
    }
    for a in 0..n {
        images.push(Terms::letter((n + a) as Letter));
    }
    Morphism { images }
}

pub fn tau0(g: &QuadraticLieAlgebra, p: &SuperPolynomial) -> Result<SuperPolynomial, WeilError> {
    expect_kind(p, g, PolyKind::WK)?;
    let w = kind_algebra(PolyKind::W, g.dim());
    Ok(SuperPolynomial::new(PolyKind::W, g.dim(), tau0_morphism(g).apply(&w, &p.terms)))
}

pub fn tau0_inv(g: &QuadraticLieAlgebra, p: &SuperPolynomial) -> Result<SuperPolynomial, WeilError> {
    expect_kind(p, g, PolyKind::W)?;
    let wk = kind_algebra(PolyKind::WK, g.dim());
    Ok(SuperPolynomial::new(PolyKind::WK, g.dim(), tau0_inv_morphism(g).apply(&wk, &p.terms)))
}

/// `e_a ↦ v^a − ½ f_abc θ^b θ^c`, `ē_a ↦ θ^a`, `c ↦ 1`. Needs an orthonormal
/// metric to identify `g` with its dual.
pub fn sigma0_morphism(g: &QuadraticLieAlgebra) -> Result<Morphism, WeilError> {
    if !g.is_orthonormal() {
        return Err(WeilError::NotOrthonormal);
    }
    let n = g.dim();
    let mut images = Vec::with_capacity(2 * n + 1);
    for a in 0..n {
        let mut t = Terms::letter(a as Letter);
        for b in 0..n {
            for c in b + 1..n {
                let v = g.f(a, b, c);
                // f_abc θ^bθ^c + f_acb θ^cθ^b = 2 f_abc θ^bθ^c
                if !v.is_zero() {
                    t.add_term(Monomial(vec![(n + b) as Letter, (n + c) as Letter]), -v.clone());
                }
            }
        }
        images.push(t);
    }
    images.push(Terms::one());
    for a in 0..n {
        images.push(Terms::letter((n + a) as Letter));
    }
    Ok(Morphism { images })
}

pub fn sigma0(g: &QuadraticLieAlgebra, p: &SuperPolynomial) -> Result<SuperPolynomial, WeilError> {
    expect_kind(p, g, PolyKind::STg)?;
    let w = kind_algebra(PolyKind::W, g.dim());
    Ok(SuperPolynomial::new(PolyKind::W, g.dim(), sigma0_morphism(g)?.apply(&w, &p.terms)))
}

/// Sets `c = 1` and renames `e → v̂`, `ē → θ`.
pub fn stg_to_wk(g: &QuadraticLieAlgebra, p: &SuperPolynomial) -> Result<SuperPolynomial, WeilError> {
    expect_kind(p, g, PolyKind::STg)?;
    let n = g.dim();
    let mut images: Vec<Terms> = (0..n).map(|a| Terms::letter(a as Letter)).collect();
    images.push(Terms::one());
    images.extend((0..n).map(|a| Terms::letter((n + a) as Letter)));
    let wk = kind_algebra(PolyKind::WK, n);
    Ok(SuperPolynomial::new(PolyKind::WK, n, Morphism { images }.apply(&wk, &p.terms)))
}

/// Relabels a `WK` element as `W` without changing coefficients; the two
/// contexts share their letter layout.
pub fn relabel_kind(p: &SuperPolynomial, kind: PolyKind) -> SuperPolynomial {
    SuperPolynomial::new(kind, p.n, p.terms.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn so3() -> QuadraticLieAlgebra {
        QuadraticLieAlgebra::so3()
    }

    #[test]
    fn parse_and_print() {
        let p = SuperPolynomial::parse("2*v1^2*th3 - 1/2", PolyKind::W, 3).unwrap();
        assert_eq!(p.to_string(), "-1/2 + 2*v1^2*th3");
        assert_eq!(p.degree(), 5);
    }

    #[test]
    fn odd_generators_anticommute() {
        let a = SuperPolynomial::parse("th1*th2", PolyKind::W, 3).unwrap();
        let b = SuperPolynomial::parse("-th2*th1", PolyKind::W, 3).unwrap();
        assert_eq!(a, b);
        assert!(SuperPolynomial::parse("th1*th1", PolyKind::W, 3).unwrap().is_zero());
    }

    #[test]
    fn odd_power_rejected() {
        let e = SuperPolynomial::parse("(th1)^2", PolyKind::W, 3).unwrap_err();
        assert!(matches!(e, WeilError::Expr(ExprError::OddPower { power: 2, .. })));
    }

    #[test]
    fn index_and_generator_checks() {
        assert!(matches!(
            SuperPolynomial::parse("v4", PolyKind::W, 3),
            Err(WeilError::Expr(ExprError::IndexOutOfRange { .. }))
        ));
        assert!(matches!(
            SuperPolynomial::parse("u1", PolyKind::W, 3),
            Err(WeilError::Expr(ExprError::UnknownGenerator { .. }))
        ));
        assert!(SuperPolynomial::parse("c*e1*eb2", PolyKind::STg, 3).is_ok());
    }

    #[test]
    fn context_mismatch() {
        let a = SuperPolynomial::parse("v1", PolyKind::W, 3).unwrap();
        let b = SuperPolynomial::parse("vh1", PolyKind::WK, 3).unwrap();
        assert!(matches!(a.multiply(&b), Err(WeilError::ContextMismatch(_))));
    }

    #[test]
    fn tau0_on_so3_generator() {
        let vh1 = SuperPolynomial::parse("vh1", PolyKind::WK, 3).unwrap();
        let img = tau0(&so3(), &vh1).unwrap();
        assert_eq!(img, SuperPolynomial::parse("v1 - th2*th3", PolyKind::W, 3).unwrap());
        let back = tau0_inv(&so3(), &img).unwrap();
        assert_eq!(back, vh1);
    }

    #[test]
    fn sigma0_matches_tau0_after_renaming() {
        let g = so3();
        for src in ["e1", "e2*eb3", "c*e1*e2", "eb1*eb2*eb3", "e3^2 + c"] {
            let p = SuperPolynomial::parse(src, PolyKind::STg, 3).unwrap();
            let lhs = sigma0(&g, &p).unwrap();
            let rhs = tau0(&g, &stg_to_wk(&g, &p).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "{src}");
        }
    }

    #[test]
    fn quad_theta_coefficients() {
        let t = quad_theta(&so3(), 0, 3, &q(1));
        // f(2,3,1)θ2θ3 + f(3,2,1)θ3θ2 = 2θ2θ3
        assert_eq!(t, Terms::monomial(Monomial(vec![4, 5]), q(2)));
    }
}
