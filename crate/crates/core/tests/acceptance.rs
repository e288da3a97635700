//! Acceptance suite: one line per criterion with its tolerance and timing.
//! Runs without the libtest harness so the report order is fixed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weilforge::algebra::{monomials_up_to, Letter, SuperAlgebra, Terms};
use weilforge::diagrams::{self, DiagramCombo, JacobiDiagram};
use weilforge::duflo;
use weilforge::gdiff::{self, CheckRecord, OpKind, Space};
use weilforge::liealg::{build_odd_double, LieError, QuadraticLieAlgebra as G};
use weilforge::ncweil::{self, NcAlgebra, NcKind};
use weilforge::rational::{factorial, q, qf, Q};
use weilforge::spinfact;
use weilforge::weil::{self, PolyKind, SuperPolynomial};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    tolerance: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn all_ok(records: &[CheckRecord]) -> Result<usize, String> {
    match records.iter().find(|r| !r.ok) {
        Some(r) => Err(r.to_string()),
        None => Ok(records.len()),
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c1_validation() -> Outcome {
    let cases = [("so3", G::so3()), ("abelian3", G::abelian(3)), ("so4", G::so4())];
    for (file, expected) in &cases {
        let g = G::from_file(&fixture(&format!("algebras/{file}.toml"))).map_err(err)?;
        ensure(g.dim() == expected.dim(), || format!("{file}: dimension {}", g.dim()))?;
        for a in 0..g.dim() {
            for b in 0..g.dim() {
                for c in 0..g.dim() {
                    ensure(g.f(a, b, c) == expected.f(a, b, c), || format!("{file}: f({a},{b},{c})"))?;
                }
            }
        }
    }
    match G::from_file(&fixture("algebras/broken_jacobi.toml")) {
        Err(LieError::JacobiViolation { a: 1, b: 2, c: 3, d: 3, .. }) => {}
        other => return Err(format!("broken_jacobi: {other:?}")),
    }
    match G::from_file(&fixture("algebras/broken_invariance.toml")) {
        Err(LieError::MetricNotInvariant { .. }) => {}
        other => return Err(format!("broken_invariance: {other:?}")),
    }
    Ok("3 algebras load; Jacobi counterexample (a,b,c,d)=(1,2,3,3)".into())
}

fn c2_hat_g() -> Outcome {
    let mut n = 0;
    for g in [G::so3(), G::so4()] {
        for sp in Space::ALL {
            n += all_ok(&gdiff::check_hat_g_relations(&g, sp, 4).map_err(err)?)?;
        }
    }
    Ok(format!("{n} relation records on W, WK, NW, NWK over so3 and so4"))
}

fn c3_acyclicity() -> Outcome {
    let g = G::so3();
    let h = gdiff::cohomology(&g, Space::WK, 6).map_err(err)?;
    ensure(h == [1, 0, 0, 0, 0, 0, 0], || format!("H = {h:?}"))?;
    all_ok(&[gdiff::verify_koszul_acyclicity(&g, 6).map_err(err)?])?;
    Ok(format!("H^0..H^6 = {h:?}"))
}

/// Letter of the odd double (even, odd, central) inside the STg layout
/// (even, central, odd).
fn double_to_stg(n: usize, i: usize) -> Letter {
    (if i < n {
        i
    } else if i < 2 * n {
        i + 1
    } else {
        n
    }) as Letter
}

fn c4_intertwining() -> Outcome {
    let mut count = 0;
    for g in [G::so3(), G::so4()] {
        let deg = if g.dim() == 3 { 5 } else { 3 };
        count += all_ok(&gdiff::check_tau_intertwining(&g, deg).map_err(err)?)?;
    }

    let g = G::so3();
    let n = g.dim();
    let w = weil::kind_algebra(PolyKind::W, n);
    let stg = weil::kind_algebra(PolyKind::STg, n);
    let s0 = weil::sigma0_morphism(&g).map_err(err)?;
    let gens = monomials_up_to(n + 1, n, 2);
    for x in &gens {
        for y in &gens {
            let (x, y) = (Terms::monomial(x.clone(), q(1)), Terms::monomial(y.clone(), q(1)));
            let lhs = s0.apply(&w, &stg.mul(&x, &y));
            let rhs = w.mul(&s0.apply(&w, &x), &s0.apply(&w, &y));
            ensure(lhs == rhs, || "sigma0 not multiplicative".into())?;
        }
    }

    let utg = NcAlgebra::new(NcKind::UTg, &g).map_err(err)?;
    let nw = NcAlgebra::new(NcKind::NW, &g).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let x = utg.element(random_word(&utg, &mut rng, 4));
        let y = utg.element(random_word(&utg, &mut rng, 4));
        let lhs = ncweil::sigma1(&nw, &utg.multiply(&x, &y).map_err(err)?).map_err(err)?;
        let sx = ncweil::sigma1(&nw, &x).map_err(err)?;
        let sy = ncweil::sigma1(&nw, &y).map_err(err)?;
        ensure(lhs == nw.multiply(&sx, &sy).map_err(err)?, || "sigma1 not multiplicative".into())?;
    }

    // [e_a, y] maps to L_a σ0(y); [ē_a, y] maps to ι_a σ0(y).
    let sup = build_odd_double(&g);
    for i in 0..2 * n {
        let op = if i < n { OpKind::L(i) } else { OpKind::Iota(i - n) };
        let der = gdiff::operator(&g, Space::W, op).derivation;
        for j in 0..sup.dim() {
            let mut br = Terms::zero();
            for (k, c) in sup.bracket(i, j) {
                br.add_scaled(&Terms::letter(double_to_stg(n, *k)), c);
            }
            let lhs = s0.apply(&w, &br);
            let rhs = der.apply(&w, &s0.apply(&w, &Terms::letter(double_to_stg(n, j))));
            ensure(lhs == rhs, || format!("lemma fails on generator pair ({}, {})", i + 1, j + 1))?;
        }
    }
    Ok(format!("{count} intertwining records; sigma0/sigma1 multiplicative; lemma on {} pairs", 2 * n * sup.dim()))
}

/// A random word of weighted degree at most `max_w`, rewritten to normal order.
fn random_word(alg: &NcAlgebra, rng: &mut ChaCha8Rng, max_w: usize) -> Terms {
    let (ne, no) = (alg.n_even(), alg.n_odd());
    let budget = rng.random_range(0..=max_w);
    let mut letters = Vec::new();
    let mut w = 0;
    while w < budget {
        let odd = no > 0 && (ne == 0 || budget - w == 1 || rng.random_bool(0.5));
        if odd {
            letters.push((ne + rng.random_range(0..no)) as Letter);
            w += 1;
        } else {
            letters.push(rng.random_range(0..ne) as Letter);
            w += 2;
        }
    }
    let c = qf([1, -1, 2, -3][rng.random_range(0..4)], rng.random_range(1..=3));
    alg.word(&letters).scaled(&c)
}

fn random_element(alg: &NcAlgebra, rng: &mut ChaCha8Rng, max_w: usize) -> Terms {
    let mut t = random_word(alg, rng, max_w);
    t.add_assign(&random_word(alg, rng, max_w));
    t
}

fn c5_round_trips() -> Outcome {
    let g = G::so3();
    let n = g.dim();
    let cl = NcAlgebra::new(NcKind::Cl, &g).map_err(err)?;
    let basis = monomials_up_to(0, n, n);
    for m in &basis {
        let e = SuperPolynomial::new(PolyKind::Ext, n, Terms::monomial(m.clone(), q(1)));
        let back = ncweil::symbol(&cl, &ncweil::chevalley_q(&cl, &e).map_err(err)?).map_err(err)?;
        ensure(back == e, || format!("symbol(q({e})) = {back}"))?;
        let c = cl.element(Terms::monomial(m.clone(), q(1)));
        let back = ncweil::chevalley_q(&cl, &ncweil::symbol(&cl, &c).map_err(err)?).map_err(err)?;
        ensure(back == c, || "q(symbol(x)) != x".into())?;
    }

    let nw = NcAlgebra::new(NcKind::NW, &g).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..500 {
        let (x, y, z) = (random_element(&nw, &mut rng, 5), random_element(&nw, &mut rng, 5), random_element(&nw, &mut rng, 5));
        let l = nw.mul(&nw.mul(&x, &y), &z);
        let r = nw.mul(&x, &nw.mul(&y, &z));
        ensure(l == r, || "NW product not associative".into())?;
    }
    Ok(format!("round trips on {} basis elements; 500 associativity triples", basis.len()))
}

fn c6_supertrace() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for g in [G::so3(), G::so4()] {
        let s = build_odd_double(&g);
        for _ in 0..100 {
            let x: Vec<Q> = (0..s.dim()).map(|_| qf(rng.random_range(-5..=5), rng.random_range(1..=4))).collect();
            let st = s.supertrace_powers(&x, 6).map_err(err)?;
            ensure(st.iter().all(Zero::is_zero), || format!("{}: str(ad^k) = {st:?}", g.name()))?;
        }
        duflo::check_supertrace_identity(&g, 6).map_err(err)?;
        // With j^{1/2} = 1 the super Duflo map is plain symmetrization.
        let p = SuperPolynomial::parse("e1*eb2*eb3 + e1^2", PolyKind::STg, g.dim()).map_err(err)?;
        let utg = NcAlgebra::new(NcKind::UTg, &g).map_err(err)?;
        ensure(duflo::super_duflo(&g, &p, 6).map_err(err)? == ncweil::pbw_chi(&utg, &p).map_err(err)?, || "super Duflo".into())?;
    }
    Ok("200 random x, k <= 6, plus symbolic identity".into())
}

fn c7_main_theorem() -> Outcome {
    let a = all_ok(&duflo::verify_main_theorem(&G::so3(), 4).map_err(err)?)?;
    let b = all_ok(&duflo::verify_main_theorem(&G::so4(), 3).map_err(err)?)?;
    Ok(format!("so3 degrees 0..4 ({a} records), so4 degrees 0..3 ({b} records)"))
}

fn c8_chain_map() -> Outcome {
    let k = all_ok(&duflo::verify_chain_map(&G::so3(), 4).map_err(err)?)?;
    Ok(format!("{k} operator records on W(so3) degree <= 4"))
}

/// Coefficient of `t^2` in `det((1 - e^{-ad(t e1)})/ad(t e1))^{1/2}` on so3,
/// from truncated exact power series.
fn jhalf_t2_oracle(g: &G) -> Q {
    let n = g.dim();
    let mut e1 = vec![Q::zero(); n];
    e1[0] = Q::one();
    let ad = g.ad_matrix(&e1);
    let order = 3;
    let mat_mul = |a: &Vec<Vec<Q>>, b: &Vec<Vec<Q>>| -> Vec<Vec<Q>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).fold(Q::zero(), |s, x| s + x)).collect()).collect()
    };
    // Entry (i,j) as a polynomial in t: coefficient of t^k is ((-ad)^k / (k+1)!)_ij.
    let mut series = vec![vec![vec![Q::zero(); order]; n]; n];
    let mut pow: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
    for k in 0..order {
        let scale = q(if k % 2 == 0 { 1 } else { -1 }) / factorial(k + 1);
        for i in 0..n {
            for j in 0..n {
                series[i][j][k] = &pow[i][j] * &scale;
            }
        }
        pow = mat_mul(&pow, &ad);
    }
    let pmul = |a: &[Q], b: &[Q]| -> Vec<Q> {
        let mut out = vec![Q::zero(); order];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if i + j < order {
                    out[i + j] += x * y;
                }
            }
        }
        out
    };
    // Leibniz determinant over permutations of 0..3.
    let mut det = vec![Q::zero(); order];
    for (perm, sign) in [([0, 1, 2], 1), ([1, 2, 0], 1), ([2, 0, 1], 1), ([0, 2, 1], -1), ([2, 1, 0], -1), ([1, 0, 2], -1)] {
        let prod = pmul(&pmul(&series[0][perm[0]], &series[1][perm[1]]), &series[2][perm[2]]);
        for k in 0..order {
            det[k] += &prod[k] * q(sign);
        }
    }
    assert!(det[0].is_one());
    // sqrt(1 + a t + b t^2) = 1 + a/2 t + (b/2 - a^2/8) t^2 + ...
    &det[2] / q(2) - &det[1] * &det[1] / q(8)
}

fn c9_corollary() -> Outcome {
    let g = G::so3();
    let p = SuperPolynomial::parse("v1^2 + v2^2 + v3^2", PolyKind::W, 3).map_err(err)?;
    all_ok(&duflo::verify_invariant_homomorphism(&g, &p, &[2, 3]).map_err(err)?)?;

    let ug = NcAlgebra::new(NcKind::Ug, &g).map_err(err)?;
    let c2 = SuperPolynomial::parse("e1^2 + e2^2 + e3^2", PolyKind::Sym, 3).map_err(err)?;
    let y1 = duflo::duflo_map(&g, &c2, 2).map_err(err)?;
    for m in 2..=3 {
        let lhs = duflo::duflo_map(&g, &c2.pow(m), 2 * m).map_err(err)?;
        let rhs = ug.element(ug.pow(y1.terms(), m));
        ensure(lhs == rhs, || format!("Upsilon(c2^{m}) != Upsilon(c2)^{m}"))?;
    }
    let diff = y1.sub(&ncweil::pbw_chi(&ug, &c2).map_err(err)?);
    // j^{1/2}(x) = 1 + c |x|^2 + ..., and Σ∂_a² applied to c2 gives 6.
    let expected = jhalf_t2_oracle(&g) * q(6);
    ensure(diff.terms() == &Terms::scalar(expected.clone()), || format!("difference {:?} vs oracle {expected}", diff.terms()))?;
    Ok(format!("Q(p^2), Q(p^3) multiplicative; Upsilon(c2) - chi(c2) = {expected}"))
}

fn c10_restrictions() -> Outcome {
    let k = all_ok(&duflo::verify_restrictions(&G::so3(), 8).map_err(err)?)?;
    Ok(format!("{k} restriction records (2^3 odd basis, even monomials of degree <= 4)"))
}

fn c11_spin() -> Outcome {
    let tol = 1e-8;
    let mut worst: f64 = 0.0;
    for n in [2, 4, 6] {
        for seed in 0..20 {
            let a = spinfact::random_antisymmetric(n, seed);
            ensure(a.clone().singular_values().max() <= 1.0 + 1e-12, || "|A| > 1".into())?;
            let r = spinfact::verify_spin_factorization(&a, tol).map_err(err)?;
            ensure(r.ok(), || format!("n={n} seed={seed}: {r:?}"))?;
            worst = worst.max(r.fac_residual).max(r.symb_residual);
        }
    }
    let g = G::so4();
    let mu = [qf(1, 5), qf(-1, 10), qf(3, 20), qf(1, 10), qf(1, 4), qf(-1, 5)];
    let b = spinfact::verify_duflo_bridge(&g, &mu, 8, 1e-6).map_err(err)?;
    ensure(b.ok(), || format!("bridge: {b:?}"))?;
    Ok(format!("60 matrices, worst residual {worst:.1e}; so4 bridge deviation {:.1e}", (b.jhalf_factorization - b.jhalf_series).abs().max(b.e1_deviation)))
}

fn diagram_corpus() -> Result<Vec<JacobiDiagram>, String> {
    let mut out = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(fixture("diagrams")).map_err(err)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(err)?;
    files.sort();
    for f in files {
        out.push(JacobiDiagram::from_file(&f).map_err(|e| format!("{}: {e}", f.display()))?);
    }
    for k in [2, 4] {
        out.push(diagrams::make_wheel(k).map_err(err)?);
    }
    out.push(JacobiDiagram::fork());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    out.push(diagrams::random_diagram(&mut rng, 3, 1));
    Ok(out)
}

fn c12_diagrams() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    for _ in 0..50 {
        let (l1, l2) = (rng.random_range(2..4), rng.random_range(2..4));
        let loops1 = rng.random_range(0..2);
        let d1 = diagrams::random_diagram(&mut rng, l1, loops1);
        let d2 = diagrams::random_diagram(&mut rng, l2, 0);
        let loops_c = rng.random_range(0..2);
        let c = diagrams::random_diagram(&mut rng, l1 + l2, loops_c);
        let one = DiagramCombo::from_diagram;
        all_ok(&[diagrams::duality_check(&one(c), &one(d1), &one(d2)).map_err(err)?])?;
    }

    let corpus = diagram_corpus()?;
    let mut relations = 0;
    for g in [G::so3(), G::so4()] {
        for d in &corpus {
            relations += all_ok(&diagrams::check_relations(&g, d).map_err(err)?)?;
        }
    }

    let g = G::so3();
    let mut series = 0;
    for d in corpus.iter().filter(|d| !d.is_based() && d.degree() <= 4) {
        let c = DiagramCombo::from_diagram(d.clone());
        all_ok(&[diagrams::check_omega_jhalf(&g, &c).map_err(err)?, diagrams::check_psi_t(&g, &c).map_err(err)?])?;
        series += 1;
    }

    let basic: Vec<DiagramCombo> = [DiagramCombo::one(), DiagramCombo::from_diagram(diagrams::make_wheel(2).map_err(err)?), DiagramCombo::from_diagram(diagrams::make_wheel(4).map_err(err)?)].into();
    let mut wheeling = 0;
    for (i, a) in basic.iter().enumerate() {
        for b in &basic[i..] {
            wheeling += all_ok(&[diagrams::wheeling_check(&g, a, b, 4).map_err(err)?])?;
            wheeling += all_ok(&diagrams::wheeling_tilde_check(&g, a, b, 4).map_err(err)?)?;
        }
    }
    let fork = DiagramCombo::from_diagram(JacobiDiagram::fork());
    wheeling += all_ok(&[diagrams::wheeling_check(&g, &fork, &basic[1], 4).map_err(err)?])?;
    Ok(format!("50 duality triples; {relations} relation records on {} diagrams; {series} series checks; {wheeling} wheeling records", corpus.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "algebra validation", tolerance: "exact", budget: Duration::from_secs(1), run: c1_validation },
        Criterion { name: "hat-g relations", tolerance: "exact", budget: Duration::from_secs(30), run: c2_hat_g },
        Criterion { name: "Koszul acyclicity", tolerance: "exact", budget: Duration::from_secs(60), run: c3_acyclicity },
        Criterion { name: "tau/sigma intertwining", tolerance: "exact", budget: Duration::from_secs(60), run: c4_intertwining },
        Criterion { name: "PBW/Clifford round trips", tolerance: "exact", budget: Duration::from_secs(60), run: c5_round_trips },
        Criterion { name: "supertrace vanishing", tolerance: "exact", budget: Duration::from_secs(60), run: c6_supertrace },
        Criterion { name: "main theorem", tolerance: "exact", budget: Duration::from_secs(300), run: c7_main_theorem },
        Criterion { name: "chain map", tolerance: "exact", budget: Duration::from_secs(60), run: c8_chain_map },
        Criterion { name: "homomorphism on basics", tolerance: "exact", budget: Duration::from_secs(60), run: c9_corollary },
        Criterion { name: "Q restrictions", tolerance: "exact", budget: Duration::from_secs(60), run: c10_restrictions },
        Criterion { name: "spin factorization", tolerance: "1e-8 (bridge 1e-6)", budget: Duration::from_secs(120), run: c11_spin },
        Criterion { name: "diagram calculus", tolerance: "exact", budget: Duration::from_secs(300), run: c12_diagrams },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|m| if elapsed <= c.budget { Ok(m) } else { Err(format!("over budget: {m}")) });
        let (tag, detail) = match &outcome {
            Ok(m) => ("PASS", m.clone()),
            Err(m) => {
                failed += 1;
                ("FAIL", m.clone())
            }
        };
        println!(
            "criterion {:>2} {:<26} {tag} [tol {}; {:.2?} of {:?}] {detail}",
            i + 1,
            c.name,
            c.tolerance,
            elapsed,
            c.budget
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
