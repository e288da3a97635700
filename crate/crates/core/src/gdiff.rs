//! The operators `ι_a`, `L_a`, `d` on the four Weil-type algebras, the
//! relations they satisfy, Koszul acyclicity and basic-element tests.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{monomials_of_weight, monomials_up_to, Derivation, FreeSuper, Letter, Monomial, SuperAlgebra, Terms};
use crate::liealg::QuadraticLieAlgebra;
use crate::linalg;
use crate::ncweil::{NcAlgebra, NcKind};
use crate::rational::Q;
use crate::weil::{PolyKind, WeilError};

pub const DEFAULT_MAX_SLICE: usize = 20000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GdiffError {
    #[error("graded slice of degree {degree} has {size} monomials, above the cap {cap}")]
    DegreeTooLarge { degree: usize, size: usize, cap: usize },
    #[error(transparent)]
    Weil(#[from] WeilError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    W,
    WK,
    NW,
    NWK,
}

impl Space {
    pub const ALL: [Space; 4] = [Space::W, Space::WK, Space::NW, Space::NWK];

    pub fn name(self) -> &'static str {
        match self {
            Space::W => "W",
            Space::WK => "WK",
            Space::NW => "NW",
            Space::NWK => "NWK",
        }
    }

    pub fn parse(s: &str) -> Option<Space> {
        Space::ALL.into_iter().find(|sp| sp.name().eq_ignore_ascii_case(s))
    }

    pub fn poly_kind(self) -> Option<PolyKind> {
        match self {
            Space::W => Some(PolyKind::W),
            Space::WK => Some(PolyKind::WK),
            _ => None,
        }
    }
}

/// The algebra underlying a space, commutative or not.
#[derive(Debug, Clone)]
pub enum SpaceAlgebra {
    Free(FreeSuper),
    Nc(NcAlgebra),
}

impl SpaceAlgebra {
    pub fn new(g: &QuadraticLieAlgebra, space: Space) -> Result<Self, WeilError> {
        let n = g.dim();
        Ok(match space {
            Space::W | Space::WK => SpaceAlgebra::Free(FreeSuper { n_even: n, n_odd: n }),
            Space::NW => SpaceAlgebra::Nc(NcAlgebra::new(NcKind::NW, g)?),
            Space::NWK => SpaceAlgebra::Nc(NcAlgebra::new(NcKind::NWK, g)?),
        })
    }
}

impl SuperAlgebra for SpaceAlgebra {
    fn n_even(&self) -> usize {
        match self {
            SpaceAlgebra::Free(a) => a.n_even(),
            SpaceAlgebra::Nc(a) => a.n_even(),
        }
    }

    fn n_odd(&self) -> usize {
        match self {
            SpaceAlgebra::Free(a) => a.n_odd(),
            SpaceAlgebra::Nc(a) => a.n_odd(),
        }
    }

    fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Terms {
        match self {
            SpaceAlgebra::Free(x) => x.mul_monomials(a, b),
            SpaceAlgebra::Nc(x) => x.mul_monomials(a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Iota(usize),
    L(usize),
    D,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivationOperator {
    pub space: Space,
    pub op: OpKind,
    pub derivation: Derivation,
}

/// The operator tables. Letters: even generators `0..n`, odd `n..2n`.
pub fn operator(g: &QuadraticLieAlgebra, space: Space, op: OpKind) -> DerivationOperator {
    let n = g.dim();
    let ev = |k: usize| Terms::letter(k as Letter);
    let od = |k: usize| Terms::letter((n + k) as Letter);
    let mut images = vec![Terms::zero(); 2 * n];
    let upper = matches!(space, Space::W | Space::WK);
    match op {
        OpKind::L(a) => {
            for b in 0..n {
                // W, WK: L_a x^b = -f^b_{ak} x^k; NW, NWK: L_a x_b = f_abc x_c
                for k in 0..n {
                    let c = if upper { -g.f(a, k, b).clone() } else { g.f(a, b, k).clone() };
                    if !c.is_zero() {
                        images[b].add_scaled(&ev(k), &c);
                        images[n + b].add_scaled(&od(k), &c);
                    }
                }
            }
        }
        OpKind::Iota(a) => {
            images[n + a] = Terms::one();
            if matches!(space, Space::WK | Space::NWK) {
                for b in 0..n {
                    for k in 0..n {
                        let c = if upper { -g.f(a, k, b).clone() } else { g.f(a, b, k).clone() };
                        images[b].add_scaled(&od(k), &c);
                    }
                }
            }
        }
        OpKind::D => match space {
            Space::WK | Space::NWK => {
                for a in 0..n {
                    images[n + a] = ev(a);
                }
            }
            Space::W | Space::NW => {
                for a in 0..n {
                    let mut dv = Terms::zero();
                    let mut dth = ev(a);
                    for b in 0..n {
                        for c in 0..n {
                            // dv^a = -f^a_{bc} θ^b v^c, dθ^a = v^a - ½ f^a_{bc} θ^bθ^c
                            let f = if upper { g.f(b, c, a) } else { g.f(a, b, c) };
                            if f.is_zero() {
                                continue;
                            }
                            dv.add_term(Monomial(vec![c as Letter, (n + b) as Letter]), -f.clone());
                            if b < c {
                                dth.add_term(Monomial(vec![(n + b) as Letter, (n + c) as Letter]), -f.clone());
                            }
                        }
                    }
                    images[a] = dv;
                    images[n + a] = dth;
                }
            }
        },
    }
    let odd = !matches!(op, OpKind::L(_));
    DerivationOperator { space, op, derivation: Derivation { odd, images } }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub space: String,
    pub relation: String,
    pub ok: bool,
    pub counterexample: Option<String>,
}

impl CheckRecord {
    pub fn pass(space: &str, relation: &str) -> Self {
        CheckRecord { space: space.into(), relation: relation.into(), ok: true, counterexample: None }
    }

    pub fn from_result(space: &str, relation: &str, r: Result<(), String>) -> Self {
        CheckRecord { space: space.into(), relation: relation.into(), ok: r.is_ok(), counterexample: r.err() }
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CHECK {}.{}: {}", self.space, self.relation, if self.ok { "OK" } else { "FAIL" })?;
        if let Some(c) = &self.counterexample {
            write!(f, " detail={c}")?;
        }
        Ok(())
    }
}

pub fn render_letters(space: Space, n: usize, t: &Terms) -> String {
    t.render(|l| match space {
        Space::W => PolyKind::W.letter_name(n, l),
        Space::WK => PolyKind::WK.letter_name(n, l),
        Space::NW => NcKind::NW.letter_name(n, l),
        Space::NWK => NcKind::NWK.letter_name(n, l),
    })
}

/// Checks the six relations of the odd enlargement of `g` on every monomial
/// of weighted degree at most `max_degree` (generators included).
pub fn check_hat_g_relations(g: &QuadraticLieAlgebra, space: Space, max_degree: usize) -> Result<Vec<CheckRecord>, GdiffError> {
    let alg = SpaceAlgebra::new(g, space)?;
    let n = g.dim();
    let basis: Vec<Terms> = monomials_up_to(n, n, max_degree.max(1))
        .into_iter()
        .map(|m| Terms::monomial(m, Q::one()))
        .collect();
    let iota: Vec<Derivation> = (0..n).map(|a| operator(g, space, OpKind::Iota(a)).derivation).collect();
    let lie: Vec<Derivation> = (0..n).map(|a| operator(g, space, OpKind::L(a)).derivation).collect();
    let d = operator(g, space, OpKind::D).derivation;
    let show = |t: &Terms| render_letters(space, n, t);
    let ix = |a: usize| a + 1;

    let sweep = |name: &str, lhs: &dyn Fn(&Terms) -> Terms, rhs: &dyn Fn(&Terms) -> Terms| -> Result<(), String> {
        for x in &basis {
            let (l, r) = (lhs(x), rhs(x));
            if l != r {
                return Err(format!("{name} on {}: lhs={} rhs={}", show(x), show(&l), show(&r)));
            }
        }
        Ok(())
    };
    let combo = |ops: &[Derivation], a: usize, b: usize, odd: bool| -> Derivation {
        let parts: Vec<(Q, &Derivation)> = g.bracket(a, b).iter().map(|(c, v)| (v.clone(), &ops[*c])).collect();
        Derivation::scaled_sum(&parts, 2 * n, odd)
    };

    let mut out = Vec::new();
    let mut rel = |name: &str, mut check: Box<dyn FnMut() -> Result<(), String> + '_>| {
        out.push(CheckRecord::from_result(space.name(), name, check()));
    };
    rel("iota_iota", Box::new(|| {
        for a in 0..n {
            for b in 0..n {
                sweep(&format!("[i{},i{}]", ix(a), ix(b)), &|x| iota[a].commutator_apply(&iota[b], &alg, x), &|_| Terms::zero())?;
            }
        }
        Ok(())
    }));
    rel("L_iota", Box::new(|| {
        for a in 0..n {
            for b in 0..n {
                let r = combo(&iota, a, b, true);
                sweep(&format!("[L{},i{}]", ix(a), ix(b)), &|x| lie[a].commutator_apply(&iota[b], &alg, x), &|x| r.apply(&alg, x))?;
            }
        }
        Ok(())
    }));
    rel("L_L", Box::new(|| {
        for a in 0..n {
            for b in 0..n {
                let r = combo(&lie, a, b, false);
                sweep(&format!("[L{},L{}]", ix(a), ix(b)), &|x| lie[a].commutator_apply(&lie[b], &alg, x), &|x| r.apply(&alg, x))?;
            }
        }
        Ok(())
    }));
    rel("d_iota", Box::new(|| {
        for a in 0..n {
            sweep(&format!("[d,i{}]", ix(a)), &|x| d.commutator_apply(&iota[a], &alg, x), &|x| lie[a].apply(&alg, x))?;
        }
        Ok(())
    }));
    rel("d_L", Box::new(|| {
        for a in 0..n {
            sweep(&format!("[d,L{}]", ix(a)), &|x| d.commutator_apply(&lie[a], &alg, x), &|_| Terms::zero())?;
        }
        Ok(())
    }));
    rel("d_d", Box::new(|| sweep("d^2", &|x| d.apply(&alg, &d.apply(&alg, x)), &|_| Terms::zero())));
    Ok(out)
}

pub fn max_slice() -> usize {
    std::env::var("WEILFORGE_MAX_SLICE").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_MAX_SLICE)
}

/// Cohomology dimensions `H^0..H^max_degree` of `d` on a commutative space,
/// computed by exact ranks on graded slices.
pub fn cohomology(g: &QuadraticLieAlgebra, space: Space, max_degree: usize) -> Result<Vec<usize>, GdiffError> {
    if space.poly_kind().is_none() {
        return Err(WeilError::ContextMismatch("cohomology is computed on W or WK".into()).into());
    }
    let n = g.dim();
    let alg = FreeSuper { n_even: n, n_odd: n };
    let d = operator(g, space, OpKind::D).derivation;
    let cap = max_slice();
    let slices: Vec<Vec<Monomial>> = (0..=max_degree + 1).map(|k| monomials_of_weight(n, n, k)).collect();
    for (k, s) in slices.iter().enumerate() {
        if s.len() > cap {
            return Err(GdiffError::DegreeTooLarge { degree: k, size: s.len(), cap });
        }
    }
    // rank of d : slice k -> slice k+1
    let ranks: Vec<usize> = (0..=max_degree)
        .map(|k| {
            let target = &slices[k + 1];
            let index: std::collections::HashMap<&Monomial, usize> = target.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let mut rows = vec![vec![Q::zero(); slices[k].len()]; target.len()];
            for (j, m) in slices[k].iter().enumerate() {
                let img = d.apply(&alg, &Terms::monomial(m.clone(), Q::one()));
                for (mm, c) in img.iter() {
                    rows[index[mm]][j] = c.clone();
                }
            }
            linalg::rank(&rows)
        })
        .collect();
    Ok((0..=max_degree)
        .map(|k| slices[k].len() - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 })
        .collect())
}

pub fn verify_koszul_acyclicity(g: &QuadraticLieAlgebra, max_degree: usize) -> Result<CheckRecord, GdiffError> {
    let h = cohomology(g, Space::WK, max_degree)?;
    let ok = h.first() == Some(&1) && h.iter().skip(1).all(|&x| x == 0);
    let detail = format!("H={h:?}");
    Ok(CheckRecord { space: "WK".into(), relation: "acyclic".into(), ok, counterexample: (!ok).then_some(detail) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub horizontal: bool,
    pub invariant: bool,
    pub basic: bool,
}

pub fn classify(g: &QuadraticLieAlgebra, space: Space, x: &Terms) -> Result<Classification, GdiffError> {
    let alg = SpaceAlgebra::new(g, space)?;
    let n = g.dim();
    let horizontal = (0..n).all(|a| operator(g, space, OpKind::Iota(a)).derivation.apply(&alg, x).is_zero());
    let invariant = (0..n).all(|a| operator(g, space, OpKind::L(a)).derivation.apply(&alg, x).is_zero());
    Ok(Classification { horizontal, invariant, basic: horizontal && invariant })
}

/// `dω = θ^b L_b ω` for horizontal `ω` in `W`, checked on all pure-`v`
/// monomials of weighted degree at most `max_degree`.
pub fn check_d_on_horizontal(g: &QuadraticLieAlgebra, max_degree: usize) -> CheckRecord {
    let n = g.dim();
    let alg = FreeSuper { n_even: n, n_odd: n };
    let d = operator(g, Space::W, OpKind::D).derivation;
    let lie: Vec<Derivation> = (0..n).map(|a| operator(g, Space::W, OpKind::L(a)).derivation).collect();
    for m in monomials_up_to(n, 0, max_degree) {
        let w = Terms::monomial(m, Q::one());
        let lhs = d.apply(&alg, &w);
        let mut rhs = Terms::zero();
        for (b, lb) in lie.iter().enumerate() {
            rhs.add_assign(&alg.mul(&Terms::letter((n + b) as Letter), &lb.apply(&alg, &w)));
        }
        if lhs != rhs {
            let show = |t: &Terms| render_letters(Space::W, n, t);
            return CheckRecord::from_result("W", "d_horizontal", Err(format!("on {}: {} vs {}", show(&w), show(&lhs), show(&rhs))));
        }
    }
    CheckRecord::pass("W", "d_horizontal")
}

/// The structure maps `τ0 : WK → W` and `τ1 : NWK → NW` intertwine `ι`, `L`
/// and `d` on every monomial of weighted degree at most `max_degree`.
pub fn check_tau_intertwining(g: &QuadraticLieAlgebra, max_degree: usize) -> Result<Vec<CheckRecord>, GdiffError> {
    let n = g.dim();
    let mut out = Vec::new();
    for (src, dst, tau) in [
        (Space::WK, Space::W, crate::weil::tau0_morphism(g)),
        (Space::NWK, Space::NW, crate::ncweil::shift_nc(g, -1)),
    ] {
        let a_src = SpaceAlgebra::new(g, src)?;
        let a_dst = SpaceAlgebra::new(g, dst)?;
        let mut ops = vec![OpKind::D];
        ops.extend((0..n).map(OpKind::Iota));
        ops.extend((0..n).map(OpKind::L));
        let mut res = Ok(());
        'outer: for op in ops {
            let ds = operator(g, src, op).derivation;
            let dd = operator(g, dst, op).derivation;
            for m in monomials_up_to(n, n, max_degree) {
                let x = Terms::monomial(m, Q::one());
                let lhs = tau.apply(&a_dst, &ds.apply(&a_src, &x));
                let rhs = dd.apply(&a_dst, &tau.apply(&a_dst, &x));
                if lhs != rhs {
                    res = Err(format!("{op:?} on {}", render_letters(src, n, &x)));
                    break 'outer;
                }
            }
        }
        let name = if src == Space::WK { "tau0" } else { "tau1" };
        out.push(CheckRecord::from_result(dst.name(), &format!("{name}_intertwines"), res));
    }
    Ok(out)
}

/// Dimension of the basic subcomplex of `W` in weighted degree `≤ k`, and of
/// the `T̃g[1]`-invariants of `S(T̃g[1])/(c−1)` in the same filtration, each
/// computed as a kernel of stacked linear maps; also checks that `σ0` maps
/// the second kernel into the first.
pub fn compare_basic_and_invariant(g: &QuadraticLieAlgebra, k: usize) -> Result<CheckRecord, GdiffError> {
    let n = g.dim();
    let alg = FreeSuper { n_even: n, n_odd: n };
    let basis = monomials_up_to(n, n, k);
    let kernel_dim = |ops: &[Derivation]| -> (usize, Vec<Vec<Q>>) {
        let mut keys: Vec<(usize, Monomial)> = Vec::new();
        let mut cols: Vec<Vec<(usize, Q)>> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for m in &basis {
            let x = Terms::monomial(m.clone(), Q::one());
            let mut col = Vec::new();
            for (oi, op) in ops.iter().enumerate() {
                for (mm, c) in op.apply(&alg, &x).iter() {
                    let key = (oi, mm.clone());
                    let r = *index.entry(key.clone()).or_insert_with(|| {
                        keys.push(key);
                        keys.len() - 1
                    });
                    col.push((r, c.clone()));
                }
            }
            cols.push(col);
        }
        let mut rows = vec![vec![Q::zero(); basis.len()]; keys.len()];
        for (j, col) in cols.iter().enumerate() {
            for (r, c) in col {
                rows[*r][j] = c.clone();
            }
        }
        let ker = linalg::nullspace(&rows, basis.len());
        (ker.len(), ker)
    };
    let mut w_ops = Vec::new();
    for a in 0..n {
        w_ops.push(operator(g, Space::W, OpKind::Iota(a)).derivation);
        w_ops.push(operator(g, Space::W, OpKind::L(a)).derivation);
    }
    let (dim_w, _) = kernel_dim(&w_ops);
    // adjoint action of T̃g[1] on S(T̃g[1]) with c = 1, written on the WK
    // letters (e -> vh, eb -> th)
    let s_ops = stg_adjoint_on_wk(g);
    let (dim_s, ker_s) = kernel_dim(&s_ops);
    let tau = crate::weil::tau0_morphism(g);
    let mut mapped_ok = true;
    for v in &ker_s {
        let mut x = Terms::zero();
        for (m, c) in basis.iter().zip(v) {
            x.add_term(m.clone(), c.clone());
        }
        let img = tau.apply(&alg, &x);
        if !classify(g, Space::W, &img)?.basic {
            mapped_ok = false;
        }
    }
    let ok = dim_w == dim_s && mapped_ok;
    let detail = format!("basic={dim_w} invariant={dim_s} mapped_basic={mapped_ok}");
    Ok(CheckRecord { space: "W".into(), relation: format!("basic_vs_invariant_deg{k}"), ok, counterexample: (!ok).then_some(detail) })
}

/// `[e_a,·]` and `[ē_a,·]` acting on `S(T̃g[1])` after `c = 1`, identified
/// with the letters of `WK`. Orthonormal metric assumed for `[ē_a,ē_b] = δ_ab`.
fn stg_adjoint_on_wk(g: &QuadraticLieAlgebra) -> Vec<Derivation> {
    let n = g.dim();
    let mut out = Vec::new();
    for a in 0..n {
        let mut ad_e = vec![Terms::zero(); 2 * n];
        let mut ad_eb = vec![Terms::zero(); 2 * n];
        for b in 0..n {
            for (c, v) in g.bracket(a, b) {
                // [e_a, e_b] = f e_c, [e_a, ē_b] = f ē_c
                ad_e[b].add_term(Monomial(vec![*c as Letter]), v.clone());
                ad_e[n + b].add_term(Monomial(vec![(n + *c) as Letter]), v.clone());
            }
            for (c, v) in g.bracket(b, a) {
                // [ē_a, e_b] = -[e_b, ē_a] = -f_bac ē_c
                ad_eb[b].add_term(Monomial(vec![(n + *c) as Letter]), -v.clone());
            }
            ad_eb[n + b] = Terms::scalar(g.metric(a, b).clone());
        }
        out.push(Derivation { odd: false, images: ad_e });
        out.push(Derivation { odd: true, images: ad_eb });
    }
    out
}
