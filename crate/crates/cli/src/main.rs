use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use weilforge::diagrams::{self, DiagramCombo, JacobiDiagram};
use weilforge::duflo;
use weilforge::gdiff::{self, CheckRecord, Space};
use weilforge::liealg::{LieError, QuadraticLieAlgebra};
use weilforge::spinfact;
use weilforge::weil::{PolyKind, SuperPolynomial};

/// Cap on every `--max-degree`/`--trunc`/`--kmax` argument.
const DEGREE_CAP: usize = 12;

#[derive(Parser)]
#[command(name = "weilforge", version, about = "Exact checks for Weil algebras, quantization, and wheeling")]
struct Cli {
    /// Emit one JSON record per line instead of text.
    #[arg(long, global = true)]
    structured: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Load an algebra file and report its invariants.
    Validate { algebra: PathBuf },
    /// Check the relations among d, ι_a, L_a on a space.
    GdiffCheck {
        algebra: PathBuf,
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Apply the quantization map to an element of W (letters v, th).
    Quantize {
        algebra: PathBuf,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Apply the Duflo map to an element of S(g) (letters e).
    Duflo {
        algebra: PathBuf,
        #[arg(long)]
        expr: String,
    },
    /// Compare Q with super-symmetrization on the odd double.
    VerifyMain {
        algebra: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Check that Q intertwines d, ι_a and L_a.
    VerifyChainmap {
        algebra: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Check Q(p^m) = Q(p)^m for a basic p.
    VerifyInvariants {
        algebra: PathBuf,
        #[arg(long)]
        expr: String,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        powers: Vec<usize>,
    },
    /// Cohomology of the Koszul complex W^K.
    Acyclicity {
        algebra: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_degree: usize,
    },
    /// Numeric factorization of the spin lift of exp(A) for a seeded A.
    SpinFactorize {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = spinfact::DEFAULT_TOL)]
        tol: f64,
        /// Rescale A to this operator norm.
        #[arg(long)]
        angle: Option<f64>,
        /// Allow odd dimensions by splitting off the kernel line of A.
        #[arg(long)]
        extend: bool,
    },
    /// Jacobi-diagram operations.
    Diagram {
        #[command(subcommand)]
        action: DiagramVerb,
    },
    /// Wheeling checks over a built-in diagram corpus.
    Wheeling {
        algebra: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        /// Check the odd-enlarged version over W̃ instead.
        #[arg(long)]
        tilde: bool,
    },
    /// Supertrace vanishing of powers of ad on the odd double.
    Supertrace {
        algebra: PathBuf,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
    },
}

#[derive(Subcommand)]
enum DiagramVerb {
    /// Evaluate a diagram file in an algebra.
    Eval { diagram: PathBuf, algebra: PathBuf },
    /// Relations and operator cross-checks for a diagram file.
    Check { diagram: PathBuf, algebra: PathBuf },
}

/// Input problems map to exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

struct Report {
    structured: bool,
    failed: bool,
}

impl Report {
    fn info(&self, key: &str, value: impl std::fmt::Display) {
        if self.structured {
            println!("{}", json!({"kind": "info", "key": key, "value": value.to_string()}));
        } else {
            println!("{key}: {value}");
        }
    }

    fn records(&mut self, mut rs: Vec<CheckRecord>) {
        rs.sort_by(|a, b| (&a.space, &a.relation).cmp(&(&b.space, &b.relation)));
        for r in rs {
            self.failed |= !r.ok;
            if self.structured {
                println!(
                    "{}",
                    json!({"kind": "check", "id": format!("{}.{}", r.space, r.relation), "ok": r.ok, "detail": r.counterexample})
                );
            } else {
                println!("{r}");
            }
        }
    }
}

fn load(path: &Path) -> Result<QuadraticLieAlgebra, InputError> {
    Ok(QuadraticLieAlgebra::from_file(path)?)
}

fn capped(name: &str, n: usize) -> Result<usize, InputError> {
    if n > DEGREE_CAP {
        return Err(InputError(format!("{name} {n} exceeds the cap {DEGREE_CAP}")));
    }
    Ok(n)
}

fn validate(rep: &mut Report, path: &Path) -> Result<(), InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    match QuadraticLieAlgebra::from_toml(&text) {
        Ok(g) => {
            let n = g.dim();
            let nonzero = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| !g.bracket(a, b).is_empty()).count();
            rep.info("algebra", g.name());
            rep.info("dim", n);
            rep.info("nonzero brackets", nonzero);
            rep.info("metric", if g.is_orthonormal() { "identity" } else { "general" });
            rep.records(vec![CheckRecord::pass("algebra", "valid")]);
            Ok(())
        }
        Err(e @ (LieError::JacobiViolation { .. } | LieError::MetricNotInvariant { .. } | LieError::MetricSingular | LieError::MetricNotSymmetric { .. })) => {
            let rel = match e {
                LieError::JacobiViolation { .. } => "jacobi",
                LieError::MetricNotInvariant { .. } => "invariance",
                _ => "metric",
            };
            rep.records(vec![CheckRecord::from_result("algebra", rel, Err(e.to_string()))]);
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn wheeling(rep: &mut Report, g: &QuadraticLieAlgebra, max_degree: usize, tilde: bool) -> Result<(), InputError> {
    let mut corpus: Vec<(String, DiagramCombo)> = vec![("empty".into(), DiagramCombo::one())];
    for k in (2..=max_degree).step_by(2) {
        corpus.push((format!("w{k}"), DiagramCombo::from_diagram(diagrams::make_wheel(k)?)));
    }
    if !tilde && max_degree >= 2 {
        corpus.push(("fork".into(), DiagramCombo::from_diagram(JacobiDiagram::fork())));
    }
    let mut out = Vec::new();
    for i in 0..corpus.len() {
        for j in i..corpus.len() {
            let ((na, a), (nb, b)) = (&corpus[i], &corpus[j]);
            let tag = |mut r: CheckRecord| {
                r.relation = format!("{}[{na},{nb}]", r.relation);
                r
            };
            if tilde {
                out.extend(diagrams::wheeling_tilde_check(g, a, b, max_degree)?.into_iter().map(tag));
            } else {
                out.push(tag(diagrams::wheeling_check(g, a, b, max_degree)?));
            }
        }
    }
    rep.records(out);
    Ok(())
}

fn run(cli: Cli) -> Result<bool, InputError> {
    let mut rep = Report { structured: cli.structured, failed: false };
    match cli.verb {
        Verb::Validate { algebra } => validate(&mut rep, &algebra)?,
        Verb::GdiffCheck { algebra, space, max_degree } => {
            let g = load(&algebra)?;
            let sp = Space::parse(&space).ok_or_else(|| InputError(format!("unknown space `{space}` (W, WK, NW, NWK)")))?;
            rep.records(gdiff::check_hat_g_relations(&g, sp, capped("max-degree", max_degree)?)?);
        }
        Verb::Quantize { algebra, expr, trunc } => {
            let g = load(&algebra)?;
            let p = SuperPolynomial::parse(&expr, PolyKind::W, g.dim())?;
            let trunc = capped("trunc", trunc.unwrap_or_else(|| duflo::poly_degree(p.terms())))?;
            let value = duflo::quantization_q(&g, &p, trunc)?;
            rep.info("conventions", conventions());
            rep.info("Q", value);
        }
        Verb::Duflo { algebra, expr } => {
            let g = load(&algebra)?;
            let p = SuperPolynomial::parse(&expr, PolyKind::Sym, g.dim())?;
            let trunc = capped("degree", duflo::poly_degree(p.terms()))?;
            rep.info("duflo", duflo::duflo_map(&g, &p, trunc)?);
        }
        Verb::VerifyMain { algebra, max_degree } => {
            let g = load(&algebra)?;
            let max_degree = capped("max-degree", max_degree)?;
            rep.info("conventions", conventions());
            rep.records(duflo::verify_main_theorem(&g, max_degree)?);
        }
        Verb::VerifyChainmap { algebra, max_degree } => {
            let g = load(&algebra)?;
            let max_degree = capped("max-degree", max_degree)?;
            rep.info("conventions", conventions());
            rep.records(duflo::verify_chain_map(&g, max_degree)?);
        }
        Verb::VerifyInvariants { algebra, expr, powers } => {
            let g = load(&algebra)?;
            let p = SuperPolynomial::parse(&expr, PolyKind::W, g.dim())?;
            if let Some(&m) = powers.iter().find(|&&m| m == 0 || m > DEGREE_CAP) {
                return Err(InputError(format!("power {m} must lie in 1..={DEGREE_CAP}")));
            }
            rep.records(duflo::verify_invariant_homomorphism(&g, &p, &powers)?);
        }
        Verb::Acyclicity { algebra, max_degree } => {
            let g = load(&algebra)?;
            let h = gdiff::cohomology(&g, Space::WK, capped("max-degree", max_degree)?)?;
            rep.info("cohomology dims", format!("{h:?}"));
            let ok = h.first() == Some(&1) && h.iter().skip(1).all(|&x| x == 0);
            rep.records(vec![CheckRecord::from_result("WK", "acyclic", if ok { Ok(()) } else { Err(format!("H={h:?}")) })]);
        }
        Verb::SpinFactorize { dim, seed, tol, angle, extend } => {
            if tol <= 0.0 || !tol.is_finite() {
                return Err(InputError("tolerance must be positive".into()));
            }
            if dim % 2 == 1 && !extend {
                return Err(InputError(format!("dimension {dim} is odd, so D = A is singular; pass --extend to split off its kernel")));
            }
            let mut a = spinfact::random_antisymmetric(dim, seed);
            if let Some(t) = angle {
                let norm = a.clone().singular_values().max();
                a *= t / norm;
            }
            let block = if dim % 2 == 1 {
                let r = spinfact::verify_spin_factorization_extended(&a, tol)?;
                rep.info("split residual", format!("{:.3e}", r.split_residual));
                rep.records(vec![CheckRecord::from_result("spin", "split", residual(r.split_residual, tol))]);
                r.block
            } else {
                spinfact::verify_spin_factorization(&a, tol)?
            };
            rep.info("dim", dim);
            rep.info("seed", seed);
            rep.info("det sign", if block.det_sign > 0.0 { "+1" } else { "-1" });
            rep.records(vec![
                CheckRecord::from_result("spin", "fac", residual(block.fac_residual, tol)),
                CheckRecord::from_result("spin", "symb", residual(block.symb_residual, tol)),
                CheckRecord::from_result("spin", "reassembly", residual(block.reassembly_residual, tol)),
                CheckRecord::from_result("spin", "covering", residual(block.covering_residual, tol)),
            ]);
        }
        Verb::Diagram { action: DiagramVerb::Eval { diagram, algebra } } => {
            let d = JacobiDiagram::from_file(&diagram)?;
            let g = load(&algebra)?;
            rep.info("diagram", &d);
            rep.info("degree", d.degree());
            rep.info("value", diagrams::evaluate(&DiagramCombo::from_diagram(d), &g)?);
        }
        Verb::Diagram { action: DiagramVerb::Check { diagram, algebra } } => {
            let d = JacobiDiagram::from_file(&diagram)?;
            let g = load(&algebra)?;
            let mut out = diagrams::check_relations(&g, &d)?;
            if !d.is_based() && !d.has_struts() {
                let c = DiagramCombo::from_diagram(d);
                out.push(diagrams::check_omega_jhalf(&g, &c)?);
                out.push(diagrams::check_psi_t(&g, &c)?);
                out.push(diagrams::check_gamma_chi(&g, &c)?);
                out.push(diagrams::check_phi_tilde_is_q(&g, &c)?);
            }
            rep.records(out);
        }
        Verb::Wheeling { algebra, max_degree, tilde } => {
            let g = load(&algebra)?;
            wheeling(&mut rep, &g, capped("max-degree", max_degree)?, tilde)?;
        }
        Verb::Supertrace { algebra, kmax } => {
            let g = load(&algebra)?;
            let kmax = capped("kmax", kmax)?;
            let r = match duflo::check_supertrace_identity(&g, kmax) {
                Ok(()) => Ok(()),
                Err(e @ duflo::DufloError::SupertraceNonzero { .. }) => Err(e.to_string()),
                Err(e) => return Err(e.into()),
            };
            rep.records(vec![CheckRecord::from_result("supertrace", &format!("k<={kmax}"), r)]);
        }
    }
    Ok(!rep.failed)
}

fn residual(r: f64, tol: f64) -> Result<(), String> {
    if r <= tol {
        Ok(())
    } else {
        Err(format!("residual {r:.3e} > tol {tol:.1e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn conventions() -> String {
    let s = duflo::describe_conventions();
    s.strip_prefix("conventions: ").map(str::to_owned).unwrap_or(s)
}
