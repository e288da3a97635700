//! Property tests for the algebraic invariants of each module. Random
//! elements are drawn from a seeded generator so failures shrink to a seed.

use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weilforge::algebra::{monomials_up_to, FreeSuper, Letter, SuperAlgebra, Terms};
use weilforge::duflo::Quantizer;
use weilforge::gdiff::{self, OpKind, Space, SpaceAlgebra};
use weilforge::liealg::{build_odd_double, QuadraticLieAlgebra as G};
use weilforge::ncweil::{self, NcAlgebra, NcKind};
use weilforge::rational::{fmt_q, parse_rational, q, qf, Q};
use weilforge::spinfact;
use weilforge::weil::{self, PolyKind, SuperPolynomial};

fn coeff(rng: &mut ChaCha8Rng) -> Q {
    qf([1, -1, 2, -3, 5][rng.random_range(0..5)], rng.random_range(1..=4))
}

/// Random combination of free monomials; `parity` restricts the number of
/// odd letters mod 2.
fn random_terms(rng: &mut ChaCha8Rng, n_even: usize, n_odd: usize, max_w: usize, parity: Option<usize>) -> Terms {
    let monos: Vec<_> = monomials_up_to(n_even, n_odd, max_w)
        .into_iter()
        .filter(|m| parity.is_none_or(|p| m.odd_count(n_even) % 2 == p))
        .collect();
    let mut t = Terms::zero();
    for _ in 0..rng.random_range(1..4) {
        t.add_term(monos[rng.random_range(0..monos.len())].clone(), coeff(rng));
    }
    t
}

/// Random product of letters, normal-ordered inside `alg`.
fn random_word(alg: &NcAlgebra, rng: &mut ChaCha8Rng, max_len: usize) -> Terms {
    let letters: Vec<Letter> = (0..rng.random_range(0..=max_len)).map(|_| rng.random_range(0..alg.n_letters()) as Letter).collect();
    alg.word(&letters).scaled(&coeff(rng))
}

fn algebras() -> [G; 2] {
    [G::so3(), G::so4()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rationals_round_trip(num in -10_000i64..10_000, den in 1i64..10_000) {
        let x = qf(num, den);
        prop_assert_eq!(parse_rational(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn free_product_is_associative_and_supercommutative(seed in any::<u64>(), pa in 0usize..2, pb in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = FreeSuper { n_even: 3, n_odd: 3 };
        let a = random_terms(&mut rng, 3, 3, 4, Some(pa));
        let b = random_terms(&mut rng, 3, 3, 4, Some(pb));
        let c = random_terms(&mut rng, 3, 3, 4, None);
        prop_assert_eq!(w.mul(&w.mul(&a, &b), &c), w.mul(&a, &w.mul(&b, &c)));
        let sign = if pa * pb == 1 { q(-1) } else { q(1) };
        prop_assert_eq!(w.mul(&a, &b), w.mul(&b, &a).scaled(&sign));
    }

    #[test]
    fn tau0_round_trip(seed in any::<u64>(), which in 0usize..2) {
        let g = &algebras()[which];
        let n = g.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = SuperPolynomial::new(PolyKind::WK, n, random_terms(&mut rng, n, n, 5, None));
        let back = weil::tau0_inv(g, &weil::tau0(g, &p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn sigma0_is_multiplicative(seed in any::<u64>()) {
        let g = G::so3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mk = |rng: &mut ChaCha8Rng| SuperPolynomial::new(PolyKind::STg, 3, random_terms(rng, 4, 3, 4, None));
        let (a, b) = (mk(&mut rng), mk(&mut rng));
        let lhs = weil::sigma0(&g, &a.multiply(&b).unwrap()).unwrap();
        let rhs = weil::sigma0(&g, &a).unwrap().multiply(&weil::sigma0(&g, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn nc_products_are_associative(seed in any::<u64>(), kind in 0usize..5) {
        let g = G::so3();
        let kind = [NcKind::Cl, NcKind::Ug, NcKind::NW, NcKind::NWK, NcKind::UTg][kind];
        let alg = NcAlgebra::new(kind, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_word(&alg, &mut rng, 3), random_word(&alg, &mut rng, 3), random_word(&alg, &mut rng, 3));
        prop_assert_eq!(alg.mul(&alg.mul(&a, &b), &c), alg.mul(&a, &alg.mul(&b, &c)));
    }

    #[test]
    fn odd_bracket_matches_supercommutator(seed in any::<u64>()) {
        let g = G::so3();
        let cl = NcAlgebra::new(NcKind::Cl, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Degree-one elements against arbitrary ones: the range where the
        // closed formula applies.
        let x = cl.element(random_terms(&mut rng, 0, 3, 1, Some(1)));
        let yp = rng.random_range(0..2);
        let y = cl.element(random_terms(&mut rng, 0, 3, 3, Some(yp)));
        let xy = cl.multiply(&x, &y).unwrap();
        let yx = cl.multiply(&y, &x).unwrap();
        let expected = if yp == 1 { cl.element(xy.terms() + yx.terms()) } else { xy.sub(&yx) };
        prop_assert_eq!(cl.odd_bracket(&x, &y).unwrap(), expected);
    }

    #[test]
    fn symbol_inverts_chevalley_quantization(seed in any::<u64>(), which in 0usize..2) {
        let g = &algebras()[which];
        let n = g.dim();
        let cl = NcAlgebra::new(NcKind::Cl, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = SuperPolynomial::new(PolyKind::Ext, n, random_terms(&mut rng, 0, n, 4, None));
        prop_assert_eq!(ncweil::symbol(&cl, &ncweil::chevalley_q(&cl, &p).unwrap()).unwrap(), p);
    }

    #[test]
    fn tau1_round_trip_and_sigma1_multiplicative(seed in any::<u64>()) {
        let g = G::so3();
        let nw = NcAlgebra::new(NcKind::NW, &g).unwrap();
        let nwk = NcAlgebra::new(NcKind::NWK, &g).unwrap();
        let utg = NcAlgebra::new(NcKind::UTg, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = nwk.element(random_word(&nwk, &mut rng, 4));
        prop_assert_eq!(ncweil::tau1_inv(&nwk, &ncweil::tau1(&nw, &x).unwrap()).unwrap(), x);
        let (a, b) = (utg.element(random_word(&utg, &mut rng, 3)), utg.element(random_word(&utg, &mut rng, 3)));
        let lhs = ncweil::sigma1(&nw, &utg.multiply(&a, &b).unwrap()).unwrap();
        let rhs = nw.multiply(&ncweil::sigma1(&nw, &a).unwrap(), &ncweil::sigma1(&nw, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn operators_obey_super_leibniz(seed in any::<u64>(), sp in 0usize..4, px in 0usize..2) {
        let g = G::so3();
        let space = Space::ALL[sp];
        let alg = SpaceAlgebra::new(&g, space).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let op = [OpKind::D, OpKind::Iota(rng.random_range(0..3)), OpKind::L(rng.random_range(0..3))][rng.random_range(0..3)];
        let der = gdiff::operator(&g, space, op).derivation;
        let x = random_terms(&mut rng, 3, 3, 3, Some(px));
        let y = random_terms(&mut rng, 3, 3, 3, None);
        let lhs = der.apply(&alg, &alg.mul(&x, &y));
        let sign = if der.odd && px == 1 { q(-1) } else { q(1) };
        let mut rhs = alg.mul(&der.apply(&alg, &x), &y);
        rhs.add_scaled(&alg.mul(&x, &der.apply(&alg, &y)), &sign);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn quantization_commutes_with_operators(seed in any::<u64>()) {
        let g = G::so3();
        let qz = Quantizer::new(&g).unwrap();
        let w = FreeSuper { n_even: 3, n_odd: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let op = [OpKind::D, OpKind::Iota(rng.random_range(0..3)), OpKind::L(rng.random_range(0..3))][rng.random_range(0..3)];
        let x = random_terms(&mut rng, 3, 3, 4, None);
        let lhs = qz.quantize_terms(&gdiff::operator(&g, Space::W, op).derivation.apply(&w, &x));
        let rhs = gdiff::operator(&g, Space::NW, op).derivation.apply(qz.nw(), &qz.quantize_terms(&x));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn supertraces_vanish_on_the_odd_double(seed in any::<u64>(), which in 0usize..2) {
        let s = build_odd_double(&algebras()[which]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Q> = (0..s.dim()).map(|_| coeff(&mut rng)).collect();
        prop_assert!(s.supertrace_powers(&x, 6).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn spin_factorization_holds(seed in any::<u64>(), half in 1usize..4) {
        let a = spinfact::random_antisymmetric(2 * half, seed);
        let r = spinfact::verify_spin_factorization(&a, spinfact::DEFAULT_TOL).unwrap();
        prop_assert!(r.ok(), "{:?}", r);
    }
}
