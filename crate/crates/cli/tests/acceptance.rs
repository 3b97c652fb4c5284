//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime budget.
//! Exact fields throughout, so no numeric tolerance applies anywhere.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hecke_lab::field::{RationalFunctions, Rationals};
use hecke_lab::hecke::{builtin_permutation, builtin_standard, HeckeSymmetry};
use hecke_lab::invariants::{cayley_hamilton_defect, char_poly, eigen_relation_check, CentralSet, LMatrix};
use hecke_lab::ncalgebra::{ideal_component, re_relations, GradedIdeal, NCPoly, DEFAULT_COLUMN_CAP};
use hecke_lab::qscalar::{QScalar, Rat};
use hecke_lab::rmatrix::RMatrixFile;
use hecke_lab::tensor::TensorOperator;
use hecke_lab_cli::config::{BuiltinKind, Command, FieldStrategy, RunConfig, Source};
use hecke_lab_cli::report::{Report, Status};
use hecke_lab_cli::run;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const SEED: u64 = 20_260_101;
const RANDOM_X: usize = 10;
const SAMPLED_POINTS: usize = 5;

fn std_source(n: usize) -> Source {
    Source::Builtin { kind: BuiltinKind::Std, n }
}

fn perm_source(n: usize) -> Source {
    Source::Builtin { kind: BuiltinKind::Perm, n }
}

fn execute(command: Command, source: Source, field: FieldStrategy) -> Result<Report, String> {
    let mut cfg = RunConfig::new(command, source).with_field(field).with_seed(SEED);
    cfg.samples = RANDOM_X;
    run(&cfg).map_err(|e| e.to_string())
}

/// Every check carries `status` (with `points` when sampled) and at least one ran.
fn expect_all(report: &Report, status: Status, points: Option<usize>) -> Result<usize, String> {
    if report.checks.is_empty() {
        return Err(format!("{}: no checks ran", report.command));
    }
    for c in &report.checks {
        if c.status != status || c.points != points {
            return Err(format!(
                "{} on {}: `{}` is {} ({})",
                report.command,
                report.config.source,
                c.name,
                c.status.label(c.points),
                c.witness.clone().unwrap_or_default()
            ));
        }
    }
    Ok(report.checks.len())
}

fn count_prefix(report: &Report, prefix: &str) -> usize {
    report.checks.iter().filter(|c| c.name.starts_with(prefix)).count()
}

/// Separate budget for the symbolic N <= 3 part of the axiom criterion.
const SMALL_AXIOM_BUDGET: Duration = Duration::from_secs(10);

fn axioms() -> Outcome {
    let mut checks = 0;
    let start = Instant::now();
    for n in [2, 3] {
        checks += expect_all(&execute(Command::Validate, std_source(n), FieldStrategy::Symbolic)?, Status::Proved, None)?;
    }
    if start.elapsed() > SMALL_AXIOM_BUDGET {
        return Err(format!("N <= 3 took {:.2}s, budget {}s", start.elapsed().as_secs_f64(), SMALL_AXIOM_BUDGET.as_secs()));
    }
    let modular = FieldStrategy::Modular { prime: hecke_lab::field::DEFAULT_PRIME, points: SAMPLED_POINTS };
    let r4 = execute(Command::Validate, std_source(4), modular)?;
    checks += expect_all(&r4, Status::VerifiedAtKPoints, Some(SAMPLED_POINTS))?;
    Ok(format!("{checks} checks; std:4 at q in {{{}}}", r4.specializations.join(", ")))
}

fn rank() -> Outcome {
    for n in [2, 3] {
        let report = execute(Command::Rank, std_source(n), FieldStrategy::Symbolic)?;
        expect_all(&report, Status::Proved, None)?;
        let p = &report.values[0].values["rank"];
        if *p != serde_json::json!(n) {
            return Err(format!("std:{n} has rank {p}"));
        }
        for name in ["rank: Tr P^p = 1", "rank: Tr P^(p+1) = 0"] {
            report.check(name).ok_or_else(|| format!("missing `{name}`"))?;
        }
    }
    Ok("p = N for N = 2, 3".into())
}

fn identity_suite() -> Outcome {
    let mut checks = 0;
    for n in [2, 3] {
        let rank = execute(Command::Rank, std_source(n), FieldStrategy::Symbolic)?;
        let structure = execute(Command::Structure, std_source(n), FieldStrategy::Symbolic)?;
        checks += expect_all(&rank, Status::Proved, None)? + expect_all(&structure, Status::Proved, None)?;
        if count_prefix(&rank, "antisymmetrizer: ") < 4 {
            return Err(format!("std:{n}: antisymmetrizer properties missing"));
        }
        let sampled = structure.checks.iter().filter(|c| c.name.ends_with(&format!("[{RANDOM_X} samples]"))).count();
        if sampled < 3 {
            return Err(format!("std:{n}: only {sampled} randomized trace identities"));
        }
    }
    Ok(format!("{checks} exact checks, {RANDOM_X} random X per randomized identity"))
}

fn identity_pair(command: Command, prefix: &str) -> Outcome {
    let symbolic = execute(command, std_source(2), FieldStrategy::Symbolic)?;
    expect_all(&symbolic, Status::Proved, None)?;
    let sampled = execute(command, std_source(3), FieldStrategy::Sampled { points: SAMPLED_POINTS })?;
    expect_all(&sampled, Status::VerifiedAtKPoints, Some(SAMPLED_POINTS))?;
    Ok(format!(
        "N=2: {} proved; N=3: {} verified at q in {{{}}}",
        count_prefix(&symbolic, prefix),
        count_prefix(&sampled, prefix),
        sampled.specializations.join(", ")
    ))
}

fn charpoly() -> Outcome {
    let report = execute(Command::Charpoly, std_source(2), FieldStrategy::Symbolic)?;
    let n = expect_all(&report, Status::Proved, None)?;
    if count_prefix(&report, "charpoly: ") != 4 {
        return Err("expected three coefficient checks and one eigen check".into());
    }
    Ok(format!("{n} checks proved"))
}

type Std2 = (HeckeSymmetry<RationalFunctions>, CentralSet<RationalFunctions>, LMatrix<RationalFunctions>);

fn std2_symbolic() -> Result<Std2, String> {
    let f = RationalFunctions;
    let h = HeckeSymmetry::prepare(builtin_standard(&f, 2).map_err(|e| e.to_string())?, 8).map_err(|e| e.to_string())?;
    let data = h.trace_data().map_err(|e| e.to_string())?;
    let l = LMatrix::generators(&f, 2);
    let set = CentralSet::build(&h, &data, &l).map_err(|e| e.to_string())?;
    Ok((h, set, l))
}

fn centrality() -> Outcome {
    let (h, set, l) = std2_symbolic()?;
    let ideal = GradedIdeal::reflection_equation(&h, &[2, 3], DEFAULT_COLUMN_CAP).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for i in 1..=2 {
        for a in 0..2 {
            for b in 0..2 {
                let g = l.entry(a, b);
                for (name, x) in [("s", set.s(i)), ("sigma", set.sigma(i))] {
                    let m = ideal.contains(&x.commutator(&g)).map_err(|e| e.to_string())?;
                    if !m.member {
                        return Err(format!("[{name}({i}), L{}{}] not in the ideal", a + 1, b + 1));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} commutators in the ideal"))
}

/// Value of a polynomial in commuting variables `L_ab -> a[a][b]`.
fn evaluate(p: &NCPoly<Rationals>, a: &[Vec<Rat>]) -> Rat {
    let n = a.len();
    let mut total = Rat::from_integer(0.into());
    for (m, c) in p.terms() {
        let mut term = c.clone();
        for &g in m.letters() {
            term *= &a[g as usize / n][g as usize % n];
        }
        total += term;
    }
    total
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn determinant(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut det = Rat::from_integer(0.into());
    for p in permutations(n) {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
        let mut term = Rat::from_integer(if inversions % 2 == 0 { 1 } else { -1 }.into());
        for (i, &j) in p.iter().enumerate() {
            term *= &m[i][j];
        }
        det += term;
    }
    det
}

/// `e_k(A)` as the sum of principal `k x k` minors.
fn elementary(a: &[Vec<Rat>], k: usize) -> Rat {
    let n = a.len();
    let mut total = Rat::from_integer(0.into());
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let minor: Vec<Vec<Rat>> = idx.iter().map(|&i| idx.iter().map(|&j| a[i][j].clone()).collect()).collect();
        total += if k == 0 { Rat::from_integer(1.into()) } else { determinant(&minor) };
    }
    total
}

fn trace_power(a: &[Vec<Rat>], k: usize) -> Rat {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| Rat::from_integer(((i == j) as i64).into())).collect()).collect();
    for _ in 0..k {
        m = (0..n).map(|i| (0..n).map(|j| (0..n).map(|t| &m[i][t] * &a[t][j]).sum()).collect()).collect();
    }
    (0..n).map(|i| m[i][i].clone()).sum()
}

fn classical_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut compared = 0;
    for n in [2, 3] {
        for command in [Command::Newton, Command::CayleyHamilton] {
            let report = execute(command, perm_source(n), FieldStrategy::Symbolic)?;
            expect_all(&report, Status::Proved, None)?;
            if report.specializations != ["1"] {
                return Err(format!("perm:{n} ran at q = {:?}", report.specializations));
            }
        }
        let f = Rationals::classical();
        let h = HeckeSymmetry::prepare(builtin_permutation(&f, n).map_err(|e| e.to_string())?, 8).map_err(|e| e.to_string())?;
        let data = h.trace_data().map_err(|e| e.to_string())?;
        let l = LMatrix::generators(&f, n);
        let set = CentralSet::build(&h, &data, &l).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let a: Vec<Vec<Rat>> = (0..n)
                .map(|_| (0..n).map(|_| Rat::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into())).collect())
                .collect();
            for i in 1..=n {
                let (sigma, e) = (evaluate(set.sigma(i), &a), elementary(&a, i));
                let (s, tr) = (evaluate(set.s(i), &a), trace_power(&a, i));
                if sigma != e || s != tr {
                    return Err(format!("N={n}, i={i}: sigma = {sigma} vs e = {e}, s = {s} vs Tr A^i = {tr}"));
                }
                compared += 2;
            }
            let ch = cayley_hamilton_defect(&h, &set, &l);
            for (_, _, entry) in ch.entries() {
                let v = evaluate(entry, &a);
                if v != Rat::from_integer(0.into()) {
                    return Err(format!("N={n}: Cayley-Hamilton defect evaluates to {v}"));
                }
            }
        }
    }
    Ok(format!("{compared} exact comparisons against the brute-force oracle"))
}

fn negative_controls() -> Outcome {
    // perturbed R: a single entry bumped by one
    let f = RationalFunctions;
    let bump = TensorOperator::from_entries(&f, 2, 2, [(vec![0, 1], vec![1, 0], QScalar::one())]);
    let bad = builtin_standard(&f, 2).map_err(|e| e.to_string())?.add(&bump).map_err(|e| e.to_string())?;
    let dir = std::env::temp_dir().join(format!("hecke-lab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("perturbed.json");
    std::fs::write(&path, RMatrixFile::from_operator(&bad).map_err(|e| e.to_string())?.to_json()).map_err(|e| e.to_string())?;
    let mut failing = BTreeMap::new();
    for command in [Command::Newton, Command::CayleyHamilton, Command::Charpoly] {
        let report = execute(command, Source::File(path.clone()), FieldStrategy::Symbolic)?;
        failing.insert(command.name(), report.failed());
    }
    let _ = std::fs::remove_dir_all(&dir);
    if failing.values().any(|&k| k == 0) {
        return Err(format!("perturbed R passed: failures per command {failing:?}"));
    }

    // deleted relation: drop the first reduced basis relation of the quadratic component
    let (h, set, l) = std2_symbolic()?;
    let basis = ideal_component(&f, 2, &re_relations(&h), 2, DEFAULT_COLUMN_CAP).map_err(|e| e.to_string())?;
    let fewer: Vec<_> = (1..basis.rank()).map(|i| basis.row_poly(i)).collect();
    let ideal = GradedIdeal::new(&f, 2, &fewer, &[2], DEFAULT_COLUMN_CAP).map_err(|e| e.to_string())?;
    let ch_fails = cayley_hamilton_defect(&h, &set, &l).entries().filter(|(_, _, e)| !ideal.contains(e).unwrap().member).count();
    let data = h.trace_data().map_err(|e| e.to_string())?;
    let cp = char_poly(&h, &data.u, &data.v, &l).map_err(|e| e.to_string())?;
    let cp_holds = (0..=2).all(|k| {
        let s = set.sigma(2 - k);
        let expected = if k % 2 == 1 { s.neg() } else { s.clone() };
        ideal.contains(&cp.coeffs[k].sub(&expected)).unwrap().member
    }) && eigen_relation_check(&h, &cp, &ideal).map_err(|e| e.to_string())?.holds;
    if ch_fails == 0 || cp_holds {
        return Err(format!("deleted relation went unnoticed: {ch_fails} Cayley-Hamilton failures, charpoly holds = {cp_holds}"));
    }
    Ok(format!("perturbed R fails {failing:?}; deleted relation fails {ch_fails} Cayley-Hamilton entries and charpoly"))
}

fn determinism() -> Outcome {
    for (command, source) in [(Command::Structure, std_source(3)), (Command::Newton, std_source(3)), (Command::Charpoly, std_source(2))] {
        let field = FieldStrategy::auto(3);
        let a = execute(command, source.clone(), field.clone())?.to_json_without_timings();
        let b = execute(command, source.clone(), field)?.to_json_without_timings();
        if a != b {
            return Err(format!("{} on {source} differs between runs", command.name()));
        }
    }
    Ok("identical JSON for structure/newton on std:3 and charpoly on std:2".into())
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            title: "axioms (YBE, Hecke) for std:2,3 symbolic and std:4 modular",
            budget: Duration::from_secs(10 + 120),
            check: axioms,
        },
        Criterion { id: 2, title: "rank p = N with Tr P^p = 1 and Tr P^(p+1) = 0", budget: Duration::from_secs(60), check: rank },
        Criterion {
            id: 3,
            title: "antisymmetrizer and trace identity suite, N = 2, 3 exact",
            budget: Duration::from_secs(120),
            check: identity_suite,
        },
        Criterion {
            id: 4,
            title: "q-Newton relations modulo the RE ideal",
            budget: Duration::from_secs(30 + 600),
            check: || identity_pair(Command::Newton, "newton["),
        },
        Criterion {
            id: 5,
            title: "q-Cayley-Hamilton modulo the RE ideal",
            budget: Duration::from_secs(30 + 600),
            check: || identity_pair(Command::CayleyHamilton, "cayley-hamilton["),
        },
        Criterion {
            id: 6,
            title: "characteristic polynomial coefficients and eigen relation, N = 2",
            budget: Duration::from_secs(30),
            check: charpoly,
        },
        Criterion { id: 7, title: "centrality of s(i) and sigma(i), N = 2, i <= 2", budget: Duration::from_secs(30), check: centrality },
        Criterion {
            id: 8,
            title: "classical limit against a brute-force oracle, N = 2, 3",
            budget: Duration::from_secs(60),
            check: classical_limit,
        },
        Criterion {
            id: 9,
            title: "negative controls: perturbed R, deleted relation",
            budget: Duration::from_secs(60),
            check: negative_controls,
        },
        Criterion { id: 10, title: "determinism under a fixed seed", budget: Duration::from_secs(60), check: determinism },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("over budget; {d}")),
            Err(e) => ("FAIL", e),
        };
        if verdict == "FAIL" {
            failures += 1;
        }
        println!("criterion {:>2} {verdict}  {:>7.2}s / {:>4}s  {}: {detail}", c.id, elapsed.as_secs_f64(), c.budget.as_secs(), c.title);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
