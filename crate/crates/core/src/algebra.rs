//! Sparse linear combinations of normal-ordered monomials and the generic
//! machinery (products, super-derivations, morphisms) shared by the
//! commutative and the noncommutative algebras.
//!
//! Generators are numbered by "letters": even letters come first, odd
//! letters follow. A monomial is the nondecreasing list of its letters with
//! every odd letter appearing at most once, read as the ordered product.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{fmt_q, q, Q};

pub type Letter = u16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub Vec<Letter>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, l: Letter) -> usize {
        self.0.iter().filter(|&&x| x == l).count()
    }

    /// Weighted degree: even letters weigh 2, odd letters 1.
    pub fn weight(&self, n_even: usize) -> usize {
        self.0.iter().map(|&l| if (l as usize) < n_even { 2 } else { 1 }).sum()
    }

    pub fn odd_count(&self, n_even: usize) -> usize {
        self.0.iter().filter(|&&l| l as usize >= n_even).count()
    }

    pub fn even_count(&self, n_even: usize) -> usize {
        self.len() - self.odd_count(n_even)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

/// A finite linear combination of monomials with nonzero rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Terms(BTreeMap<Monomial, Q>);

impl Terms {
    pub fn zero() -> Self {
        Terms(BTreeMap::new())
    }

    pub fn one() -> Self {
        Self::scalar(Q::one())
    }

    pub fn scalar(c: Q) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let mut t = Terms::zero();
        t.add_term(m, c);
        t
    }

    pub fn letter(l: Letter) -> Self {
        Self::monomial(Monomial(vec![l]), Q::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Terms, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.0 {
            self.add_term(m.clone(), v * c);
        }
    }

    pub fn add_assign(&mut self, other: &Terms) {
        for (m, v) in &other.0 {
            self.add_term(m.clone(), v.clone());
        }
    }

    pub fn scaled(&self, c: &Q) -> Terms {
        if c.is_zero() {
            return Terms::zero();
        }
        Terms(self.0.iter().map(|(m, v)| (m.clone(), v * c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.0.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.0.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant(&self) -> Q {
        self.coeff(&Monomial::one())
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Terms {
        Terms(self.0.iter().filter(|(m, _)| keep(m)).map(|(m, v)| (m.clone(), v.clone())).collect())
    }

    /// Replaces each letter through `f`; used to rename between contexts
    /// whose normal forms coincide.
    pub fn relabel(&self, f: impl Fn(Letter) -> Letter) -> Terms {
        let mut out = Terms::zero();
        for (m, v) in &self.0 {
            out.add_term(Monomial(m.0.iter().map(|&l| f(l)).collect()), v.clone());
        }
        out
    }

    pub fn max_weight(&self, n_even: usize) -> usize {
        self.0.keys().map(|m| m.weight(n_even)).max().unwrap_or(0)
    }

    /// Renders with generator names supplied by `name`.
    pub fn render(&self, name: impl Fn(Letter) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.0.iter().enumerate() {
            let neg = crate::rational::is_neg(c);
            let a = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let mut k = 0;
            while k < m.0.len() {
                let l = m.0[k];
                let mut e = 1;
                while k + e < m.0.len() && m.0[k + e] == l {
                    e += 1;
                }
                factors.push(if e == 1 { name(l) } else { format!("{}^{e}", name(l)) });
                k += e;
            }
            if factors.is_empty() {
                s.push_str(&fmt_q(&a));
            } else {
                if !a.is_one() {
                    let _ = write!(s, "{}*", fmt_q(&a));
                }
                s.push_str(&factors.join("*"));
            }
        }
        s
    }
}

impl Add for &Terms {
    type Output = Terms;
    fn add(self, rhs: &Terms) -> Terms {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub for &Terms {
    type Output = Terms;
    fn sub(self, rhs: &Terms) -> Terms {
        let mut out = self.clone();
        out.add_scaled(rhs, &q(-1));
        out
    }
}

impl Neg for &Terms {
    type Output = Terms;
    fn neg(self) -> Terms {
        self.scaled(&q(-1))
    }
}

/// An associative superalgebra presented on normal-ordered monomials.
pub trait SuperAlgebra {
    fn n_even(&self) -> usize;
    fn n_odd(&self) -> usize;

    /// Product of two normal-ordered monomials, rewritten to normal form.
    fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Terms;

    fn n_letters(&self) -> usize {
        self.n_even() + self.n_odd()
    }

    fn is_odd(&self, l: Letter) -> bool {
        l as usize >= self.n_even()
    }

    fn mul(&self, a: &Terms, b: &Terms) -> Terms {
        let mut out = Terms::zero();
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                let p = self.mul_monomials(ma, mb);
                out.add_scaled(&p, &(ca * cb));
            }
        }
        out
    }

    fn pow(&self, a: &Terms, k: usize) -> Terms {
        let mut out = Terms::one();
        for _ in 0..k {
            out = self.mul(&out, a);
        }
        out
    }

    /// Parity split `(even part, odd part)`.
    fn parity_split(&self, a: &Terms) -> (Terms, Terms) {
        let ne = self.n_even();
        (a.filter(|m| m.odd_count(ne) % 2 == 0), a.filter(|m| m.odd_count(ne) % 2 == 1))
    }

    /// Graded commutator `[a, b] = ab - (-1)^{|a||b|} ba`, extended bilinearly
    /// over parity components.
    fn supercommutator(&self, a: &Terms, b: &Terms) -> Terms {
        let (a0, a1) = self.parity_split(a);
        let (b0, b1) = self.parity_split(b);
        let mut out = Terms::zero();
        for (x, px) in [(&a0, 0), (&a1, 1)] {
            for (y, py) in [(&b0, 0), (&b1, 1)] {
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                out.add_assign(&self.mul(x, y));
                let s = if px * py == 1 { q(1) } else { q(-1) };
                out.add_scaled(&self.mul(y, x), &s);
            }
        }
        out
    }
}

/// Free graded-commutative algebra: polynomial in the even letters tensor
/// exterior in the odd letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeSuper {
    pub n_even: usize,
    pub n_odd: usize,
}

impl SuperAlgebra for FreeSuper {
    fn n_even(&self) -> usize {
        self.n_even
    }

    fn n_odd(&self) -> usize {
        self.n_odd
    }

    fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Terms {
        match free_product(a, b, self.n_even) {
            Some((m, neg)) => Terms::monomial(m, if neg { q(-1) } else { q(1) }),
            None => Terms::zero(),
        }
    }
}

/// Merges two sorted monomials; `None` if an odd letter repeats, otherwise
/// the product and whether the Koszul sign is negative.
pub fn free_product(a: &Monomial, b: &Monomial, n_even: usize) -> Option<(Monomial, bool)> {
    let ne = n_even as Letter;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut swaps = 0usize;
    // odd letters of `a` not yet emitted, for counting transpositions
    let mut a_odd_left = a.0.iter().filter(|&&l| l >= ne).count();
    while i < a.0.len() || j < b.0.len() {
        let take_a = j >= b.0.len() || (i < a.0.len() && a.0[i] <= b.0[j]);
        if take_a {
            if j < b.0.len() && a.0[i] == b.0[j] && a.0[i] >= ne {
                return None;
            }
            if a.0[i] >= ne {
                a_odd_left -= 1;
            }
            out.push(a.0[i]);
            i += 1;
        } else {
            if b.0[j] >= ne {
                swaps += a_odd_left;
            }
            out.push(b.0[j]);
            j += 1;
        }
    }
    Some((Monomial(out), swaps % 2 == 1))
}

/// A super-derivation given by its values on generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub odd: bool,
    pub images: Vec<Terms>,
}

impl Derivation {
    pub fn apply<A: SuperAlgebra + ?Sized>(&self, alg: &A, x: &Terms) -> Terms {
        let mut out = Terms::zero();
        for (m, c) in x.iter() {
            let ls = m.letters();
            let mut odd_before = 0usize;
            for i in 0..ls.len() {
                let img = &self.images[ls[i] as usize];
                if !img.is_zero() {
                    let prefix = Terms::monomial(Monomial(ls[..i].to_vec()), Q::one());
                    let suffix = Terms::monomial(Monomial(ls[i + 1..].to_vec()), Q::one());
                    let sign = if self.odd && odd_before % 2 == 1 { q(-1) } else { q(1) };
                    let t = alg.mul(&alg.mul(&prefix, img), &suffix);
                    out.add_scaled(&t, &(c * sign));
                }
                if alg.is_odd(ls[i]) {
                    odd_before += 1;
                }
            }
        }
        out
    }

    /// The graded commutator `[self, other]` evaluated on `x`.
    pub fn commutator_apply<A: SuperAlgebra + ?Sized>(&self, other: &Derivation, alg: &A, x: &Terms) -> Terms {
        let ab = self.apply(alg, &other.apply(alg, x));
        let ba = other.apply(alg, &self.apply(alg, x));
        let s = if self.odd && other.odd { q(1) } else { q(-1) };
        let mut out = ab;
        out.add_scaled(&ba, &s);
        out
    }

    pub fn scaled_sum(parts: &[(Q, &Derivation)], n_letters: usize, odd: bool) -> Derivation {
        let mut images = vec![Terms::zero(); n_letters];
        for (c, d) in parts {
            for (img, di) in images.iter_mut().zip(&d.images) {
                img.add_scaled(di, c);
            }
        }
        Derivation { odd, images }
    }
}

/// An algebra morphism given by the images of the source generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism {
    pub images: Vec<Terms>,
}

impl Morphism {
    pub fn apply<A: SuperAlgebra + ?Sized>(&self, target: &A, x: &Terms) -> Terms {
        let mut out = Terms::zero();
        for (m, c) in x.iter() {
            let mut acc = Terms::one();
            for &l in m.letters() {
                acc = target.mul(&acc, &self.images[l as usize]);
                if acc.is_zero() {
                    break;
                }
            }
            out.add_scaled(&acc, c);
        }
        out
    }
}

/// All normal monomials of weighted degree exactly `w`.
pub fn monomials_of_weight(n_even: usize, n_odd: usize, w: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for odd_k in (0..=n_odd.min(w)).filter(|k| (w - k) % 2 == 0) {
        let even_k = (w - odd_k) / 2;
        for ev in multisets(n_even, even_k) {
            for od in subsets(n_odd, odd_k) {
                let mut ls: Vec<Letter> = ev.iter().map(|&x| x as Letter).collect();
                ls.extend(od.iter().map(|&x| (x + n_even) as Letter));
                out.push(Monomial(ls));
            }
        }
    }
    out
}

pub fn monomials_up_to(n_even: usize, n_odd: usize, max_w: usize) -> Vec<Monomial> {
    (0..=max_w).flat_map(|w| monomials_of_weight(n_even, n_odd, w)).collect()
}

/// Nondecreasing sequences of length `k` from `0..n`.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let v = cur[i - 1] + 1;
        for x in &mut cur[i - 1..] {
            *x = v;
        }
    }
}

/// Strictly increasing sequences of length `k` from `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return vec![];
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(ls: &[Letter]) -> Monomial {
        Monomial(ls.to_vec())
    }

    #[test]
    fn free_product_signs() {
        // letters 0,1 even; 2,3 odd
        let alg = FreeSuper { n_even: 2, n_odd: 2 };
        assert_eq!(alg.mul_monomials(&m(&[3]), &m(&[2])), Terms::monomial(m(&[2, 3]), q(-1)));
        assert_eq!(alg.mul_monomials(&m(&[2]), &m(&[3])), Terms::monomial(m(&[2, 3]), q(1)));
        assert!(alg.mul_monomials(&m(&[2]), &m(&[0, 2])).is_zero());
        assert_eq!(alg.mul_monomials(&m(&[1, 3]), &m(&[0, 2])), Terms::monomial(m(&[0, 1, 2, 3]), q(-1)));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0).len(), 1);
        // weight 2 over 3 even and 3 odd letters: 3 linear evens + 3 odd pairs
        assert_eq!(monomials_of_weight(3, 3, 2).len(), 6);
    }

    #[test]
    fn odd_derivation_sign() {
        // d(th0 th1) with d th_i = 1: d = 1*th1 - th0*1
        let alg = FreeSuper { n_even: 0, n_odd: 2 };
        let d = Derivation { odd: true, images: vec![Terms::one(), Terms::one()] };
        let x = Terms::monomial(m(&[0, 1]), q(1));
        let expect = &Terms::letter(1) - &Terms::letter(0);
        assert_eq!(d.apply(&alg, &x), expect);
    }

    #[test]
    fn even_derivation_on_powers() {
        let alg = FreeSuper { n_even: 1, n_odd: 0 };
        let d = Derivation { odd: false, images: vec![Terms::one()] };
        let x = Terms::monomial(m(&[0, 0, 0]), q(1));
        assert_eq!(d.apply(&alg, &x), Terms::monomial(m(&[0, 0]), q(3)));
    }

    #[test]
    fn render_is_readable() {
        let t = &Terms::monomial(m(&[0, 0, 2]), q(-3)) + &Terms::scalar(crate::rational::qf(1, 2));
        assert_eq!(t.render(|l| format!("x{l}")), "1/2 - 3*x0^2*x2");
    }
}
