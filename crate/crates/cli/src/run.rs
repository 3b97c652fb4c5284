//! Executes a command at every specialization of `q` and folds the results
//! into one report.

use std::collections::BTreeMap;
use std::time::Instant;

use hecke_lab::error::FileError;
use hecke_lab::field::{Field, PrimeField, RationalFunctions, Rationals};
use hecke_lab::hecke::{builtin_permutation, builtin_standard, HeckeSymmetry, IdentityCheck};
use hecke_lab::invariants::{cayley_hamilton_defect, char_poly, eigen_relation_check, newton_defect, CentralSet, LMatrix};
use hecke_lab::ncalgebra::{re_relations, GradedIdeal, NCPoly};
use hecke_lab::qscalar::Rat;
use hecke_lab::rmatrix::{FileQ, RMatrixFile};
use hecke_lab::tensor::{CoTensor, ContraTensor, TensorOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{BuiltinKind, Command, ConfigError, FieldStrategy, RunConfig, Source};
use crate::report::{CheckRecord, ConfigEcho, PointValues, Report, Status, SCHEMA_VERSION};

/// Problems with the input or configuration; these map to exit code 2.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Input(#[from] FileError),
    #[error("{0}")]
    Setup(String),
}

/// Longest residual text kept in a witness.
const WITNESS_CHARS: usize = 240;
/// Polynomials with more terms than this are not echoed as values.
const VALUE_TERMS: usize = 64;

enum Loaded {
    Builtin { kind: BuiltinKind, n: usize },
    File(RMatrixFile),
}

impl Loaded {
    fn dim(&self) -> usize {
        match self {
            Loaded::Builtin { n, .. } => *n,
            Loaded::File(f) => f.dim,
        }
    }

    fn operator<F: Field>(&self, field: &F) -> Result<TensorOperator<F>, String> {
        match self {
            Loaded::Builtin { kind: BuiltinKind::Std, n } => builtin_standard(field, *n).map_err(|e| e.to_string()),
            Loaded::Builtin { kind: BuiltinKind::Perm, n } => builtin_permutation(field, *n).map_err(|e| e.to_string()),
            Loaded::File(f) => f.operator(field).map_err(|e| e.to_string()),
        }
    }
}

/// Where the checks run.
enum Plan {
    Symbolic,
    /// A single rational `q` fixed by the input.
    Exact(Rat),
    Rational(Vec<Rat>),
    Modular {
        prime: u64,
        residues: Vec<u64>,
    },
}

impl Plan {
    fn describe(&self) -> String {
        match self {
            Plan::Symbolic => "symbolic".into(),
            Plan::Exact(q) => format!("exact:{q}"),
            Plan::Rational(qs) => format!("sampled:{}", qs.len()),
            Plan::Modular { prime, .. } => format!("modular:{prime}"),
        }
    }

    fn success_status(&self) -> (Status, Option<usize>) {
        match self {
            Plan::Symbolic | Plan::Exact(_) => (Status::Proved, None),
            Plan::Rational(qs) => (Status::VerifiedAtKPoints, Some(qs.len())),
            Plan::Modular { residues, .. } => (Status::VerifiedAtKPoints, Some(residues.len())),
        }
    }
}

/// Distinct reduced fractions `a/b` with `2 <= a, b <= 7`, `a != b`.
fn rational_candidates() -> Vec<Rat> {
    let mut out: Vec<Rat> = Vec::new();
    for a in 2i64..=7 {
        for b in 2i64..=7 {
            if a != b {
                let q = Rat::new(a.into(), b.into());
                if !out.contains(&q) {
                    out.push(q);
                }
            }
        }
    }
    out
}

fn plan(cfg: &RunConfig, loaded: &Loaded) -> Result<Plan, RunError> {
    if let Loaded::Builtin { kind: BuiltinKind::Perm, .. } = loaded {
        return Ok(Plan::Exact(Rat::from_integer(1.into())));
    }
    if let Loaded::File(RMatrixFile { q: FileQ::Value(q), .. }) = loaded {
        Rationals::new(q.clone()).map_err(|e| RunError::Setup(e.to_string()))?;
        return Ok(Plan::Exact(q.clone()));
    }
    let strategy = cfg.field.clone().unwrap_or_else(|| FieldStrategy::auto(loaded.dim()));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match strategy {
        FieldStrategy::Symbolic => Ok(Plan::Symbolic),
        FieldStrategy::Sampled { points } => {
            let mut pool = rational_candidates();
            let mut chosen = Vec::with_capacity(points);
            while chosen.len() < points && !pool.is_empty() {
                let q = pool.swap_remove(rng.gen_range(0..pool.len()));
                // values with a pole at q are skipped in favour of the next draw
                let ok = Rationals::new(q.clone()).ok().is_some_and(|f| loaded.operator(&f).is_ok());
                if ok {
                    chosen.push(q);
                }
            }
            if chosen.len() < points {
                return Err(RunError::Setup(format!("only {} admissible rational sample points, {points} requested", chosen.len())));
            }
            Ok(Plan::Rational(chosen))
        }
        FieldStrategy::Modular { prime, points } => {
            let mut residues = Vec::with_capacity(points);
            let order_bound = 2 * cfg.rank_bound.max(loaded.dim()) as u64;
            let mut attempts = 0;
            while residues.len() < points {
                attempts += 1;
                if attempts > 10_000 {
                    return Err(RunError::Setup(format!("could not draw {points} admissible residues mod {prime}")));
                }
                let q = rng.gen_range(2..=prime - 2);
                if residues.contains(&q) || PrimeField::small_order_of(prime, q, order_bound).is_some() {
                    continue;
                }
                let ok = PrimeField::new(prime, q).ok().is_some_and(|f| loaded.operator(&f).is_ok());
                if ok {
                    residues.push(q);
                }
            }
            Ok(Plan::Modular { prime, residues })
        }
    }
}

enum Outcome {
    Pass,
    Fail(String),
    Skip(String),
}

struct PointCheck {
    name: String,
    outcome: Outcome,
    ms: u64,
}

struct PointResult {
    label: String,
    checks: Vec<PointCheck>,
    values: BTreeMap<String, Value>,
}

/// Collects check outcomes at one point, timing each since the previous one.
struct Recorder {
    checks: Vec<PointCheck>,
    values: BTreeMap<String, Value>,
    lap: Instant,
}

/// Marker for "later checks depend on one that just failed".
struct Halt;

impl Recorder {
    fn new() -> Self {
        Recorder { checks: Vec::new(), values: BTreeMap::new(), lap: Instant::now() }
    }

    fn push(&mut self, name: impl Into<String>, outcome: Outcome) {
        let ms = self.lap.elapsed().as_millis() as u64;
        self.lap = Instant::now();
        self.checks.push(PointCheck { name: name.into(), outcome, ms });
    }

    fn check(&mut self, name: impl Into<String>, holds: bool, detail: impl FnOnce() -> String) {
        let outcome = if holds { Outcome::Pass } else { Outcome::Fail(truncate(detail())) };
        self.push(name, outcome);
    }

    fn identity(&mut self, prefix: &str, c: &IdentityCheck) {
        self.check(format!("{prefix}{}", c.name), c.holds, || c.detail.clone().unwrap_or_default());
    }

    fn fail(&mut self, name: impl Into<String>, detail: impl ToString) -> Halt {
        self.push(name, Outcome::Fail(truncate(detail.to_string())));
        Halt
    }

    fn value(&mut self, key: &str, v: Value) {
        self.values.insert(key.to_string(), v);
    }
}

fn truncate(mut s: String) -> String {
    if s.chars().count() > WITNESS_CHARS {
        s = s.chars().take(WITNESS_CHARS).collect::<String>() + " ...";
    }
    s
}

fn operator_json<F: Field>(op: &TensorOperator<F>) -> Value {
    let f = op.field();
    let n = op.dim();
    let k = op.arity();
    let idx = |flat: usize| -> Vec<usize> { hecke_lab::tensor::unflatten(n, k, flat).into_iter().map(|i| i + 1).collect() };
    Value::Array(op.entries().map(|(r, c, v)| json!({ "in": idx(r), "out": idx(c), "value": f.render(v) })).collect())
}

fn vector_json<F: Field>(field: &F, dim: usize, support: Vec<(Vec<usize>, F::Elem)>) -> Value {
    let _ = dim;
    Value::Array(
        support
            .into_iter()
            .map(|(m, v)| json!({ "index": m.iter().map(|i| i + 1).collect::<Vec<_>>(), "value": field.render(&v) }))
            .collect(),
    )
}

fn co_json<F: Field>(field: &F, u: &CoTensor<F>) -> Value {
    vector_json(field, u.dim(), u.support())
}

fn contra_json<F: Field>(field: &F, v: &ContraTensor<F>) -> Value {
    vector_json(field, v.dim(), v.support())
}

fn poly_value<F: Field>(p: &NCPoly<F>) -> Option<Value> {
    (p.len() <= VALUE_TERMS).then(|| Value::String(p.to_string()))
}

/// Ideal components built lazily per degree; resource limits become skips.
struct Ideals<F: Field> {
    by_degree: BTreeMap<usize, Result<GradedIdeal<F>, String>>,
}

impl<F: Field> Ideals<F> {
    fn build(h: &HeckeSymmetry<F>, degrees: impl IntoIterator<Item = usize>, cap: usize) -> Self {
        let rels = re_relations(h);
        let wanted: Vec<usize> = degrees.into_iter().filter(|&d| d >= 2).collect();
        let by_degree =
            wanted.par_iter().map(|&d| (d, GradedIdeal::new(h.field(), h.dim(), &rels, &[d], cap).map_err(|e| e.to_string()))).collect();
        Ideals { by_degree }
    }

    fn membership(&self, p: &NCPoly<F>) -> Outcome {
        if p.is_zero() {
            return Outcome::Pass;
        }
        let d = match p.homogeneous_degree() {
            Some(d) => d,
            None => return Outcome::Fail("defect is not homogeneous".into()),
        };
        if d < 2 {
            return Outcome::Fail(truncate(format!("nonzero defect of degree {d}: {p}")));
        }
        match self.by_degree.get(&d) {
            None => Outcome::Skip(format!("no ideal component for degree {d}")),
            Some(Err(e)) => Outcome::Skip(e.clone()),
            Some(Ok(ideal)) => match ideal.contains(p) {
                Ok(m) if m.member => Outcome::Pass,
                Ok(m) => Outcome::Fail(truncate(format!("residual modulo the degree-{d} ideal: {}", m.residual))),
                Err(e) => Outcome::Fail(e.to_string()),
            },
        }
    }
}

/// Arity-1 and arity-2 test operators with small integer entries.
fn random_operators<F: Field>(field: &F, n: usize, arity: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<TensorOperator<F>> {
    (0..count)
        .map(|_| {
            let size = n.pow(arity as u32);
            let mut entries = Vec::new();
            for r in 0..size {
                for c in 0..size {
                    if rng.gen_bool(0.5) {
                        let x: i64 = rng.gen_range(-3..=3);
                        if x != 0 {
                            entries.push((r, c, field.from_i64(x)));
                        }
                    }
                }
            }
            TensorOperator::from_flat_entries(field, n, arity, entries)
        })
        .collect()
}

fn pipeline<F: Field>(cfg: &RunConfig, r: TensorOperator<F>, rec: &mut Recorder) -> Result<(), Halt> {
    let f = r.field().clone();
    let axioms = HeckeSymmetry::axiom_checks(&r).map_err(|e| rec.fail("axiom: R acts on V⊗V", e))?;
    for c in &axioms {
        rec.identity("axiom: ", c);
    }
    if axioms.iter().any(|c| !c.holds) {
        return Err(Halt);
    }
    let h = HeckeSymmetry::validate(r).map_err(|e| rec.fail("axiom: validation", e))?;
    rec.value("lambda", Value::String(f.render(h.lambda())));
    let h = h.check_closed().map_err(|e| rec.fail("closed: (P R)^t1 is invertible", e))?;
    rec.push("closed: (P R)^t1 is invertible", Outcome::Pass);
    if cfg.command == Command::Validate {
        return Ok(());
    }

    let mut h = h;
    let p = h.detect_rank(cfg.rank_bound).map_err(|e| rec.fail("rank: P^(p+1) = 0 and P^p has rank one", e))?;
    rec.push("rank: P^(p+1) = 0 and P^p has rank one", Outcome::Pass);
    rec.value("rank", json!(p));

    match cfg.command {
        Command::Validate => Ok(()),
        Command::Rank => rank_checks(&h, p, rec),
        Command::Structure => structure_checks(cfg, &h, rec),
        Command::Newton | Command::CayleyHamilton | Command::Charpoly => invariant_checks(cfg, &h, p, rec),
    }
}

fn rank_checks<F: Field>(h: &HeckeSymmetry<F>, p: usize, rec: &mut Recorder) -> Result<(), Halt> {
    let f = h.field();
    let top = h.antisymmetrizer(p).map_err(|e| rec.fail("rank: Tr P^p = 1", e))?;
    let tr = top.trace_full();
    rec.check("rank: Tr P^p = 1", f.is_one(&tr), || format!("Tr P^p = {}", f.render(&tr)));
    let next = h.antisymmetrizer(p + 1).map_err(|e| rec.fail("rank: Tr P^(p+1) = 0", e))?;
    let tr = next.trace_full();
    rec.check("rank: Tr P^(p+1) = 0", f.is_zero(&tr), || format!("Tr P^(p+1) = {}", f.render(&tr)));
    let checks = h.antisymmetrizer_checks().map_err(|e| rec.fail("antisymmetrizer: identities", e))?;
    for c in &checks {
        rec.identity("antisymmetrizer: ", c);
    }
    Ok(())
}

fn structure_checks<F: Field>(cfg: &RunConfig, h: &HeckeSymmetry<F>, rec: &mut Recorder) -> Result<(), Halt> {
    let f = h.field();
    let data = h.trace_data().map_err(|e| rec.fail("trace: C, B, u, v exist", e))?;
    rec.push("trace: C, B, u, v exist", Outcome::Pass);
    rec.value("u", co_json(f, &data.u));
    rec.value("v", contra_json(f, &data.v));
    rec.value("C", operator_json(&data.c));
    rec.value("B", operator_json(&data.b));
    rec.value("Tr C", Value::String(f.render(&data.c.trace_full())));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let xs = random_operators(f, h.dim(), 1, cfg.samples, &mut rng);
    let xs12 = random_operators(f, h.dim(), 2, cfg.samples, &mut rng);
    let checks = h.trace_checks(&data, &xs, &xs12).map_err(|e| rec.fail("trace: identities", e))?;
    for c in &checks {
        rec.identity("trace: ", c);
    }
    Ok(())
}

fn invariant_checks<F: Field>(cfg: &RunConfig, h: &HeckeSymmetry<F>, p: usize, rec: &mut Recorder) -> Result<(), Halt> {
    let f = h.field();
    let data = h.trace_data().map_err(|e| rec.fail("trace: C, B, u, v exist", e))?;
    let l = LMatrix::generators(f, h.dim());
    let set = CentralSet::build(h, &data, &l).map_err(|e| rec.fail("central elements: construction", e))?;
    let ideals = Ideals::build(h, 2..=p, cfg.column_cap);
    match cfg.command {
        Command::Newton => {
            for i in 1..=p {
                let d = newton_defect(h, &set, i).map_err(|e| rec.fail(format!("newton[{i}]"), e))?;
                rec.push(format!("newton[{i}]"), ideals.membership(&d));
            }
            for i in 1..=p {
                for (key, poly) in [(format!("s({i})"), set.s(i)), (format!("sigma({i})"), set.sigma(i))] {
                    if let Some(v) = poly_value(poly) {
                        rec.value(&key, v);
                    }
                }
            }
        }
        Command::CayleyHamilton => {
            let ch = cayley_hamilton_defect(h, &set, &l);
            for a in 0..h.dim() {
                for b in 0..h.dim() {
                    let e = ch.get(&[a], &[b]);
                    rec.push(format!("cayley-hamilton[{},{}]", a + 1, b + 1), ideals.membership(&e));
                }
            }
        }
        Command::Charpoly => {
            let cp = char_poly(h, &data.u, &data.v, &l).map_err(|e| rec.fail("charpoly: construction", e))?;
            for k in 0..=p {
                let s = set.sigma(p - k);
                let expected = if k % 2 == 1 { s.neg() } else { s.clone() };
                let name = format!("charpoly: coefficient of x^{k} = (-1)^{k} sigma({})", p - k);
                rec.push(name, ideals.membership(&cp.coeffs[k].sub(&expected)));
                if let Some(v) = poly_value(&cp.coeffs[k]) {
                    rec.value(&format!("Delta x^{k}"), v);
                }
            }
            let name = "charpoly: (R_i + 1/q) w(x) = 0 for i < p";
            let degrees: Vec<usize> = (2..=p).collect();
            let missing: Vec<usize> = degrees.iter().copied().filter(|d| !matches!(ideals.by_degree.get(d), Some(Ok(_)))).collect();
            if !missing.is_empty() {
                rec.push(name, Outcome::Skip(format!("ideal components unavailable at degrees {missing:?}")));
            } else {
                let merged = GradedIdeal::new(f, h.dim(), &re_relations(h), &degrees, cfg.column_cap).map_err(|e| rec.fail(name, e))?;
                match eigen_relation_check(h, &cp, &merged) {
                    Ok(out) if out.holds => rec.push(name, Outcome::Pass),
                    Ok(out) => {
                        let (i, k) = out.first_failure.unwrap_or_default();
                        rec.push(name, Outcome::Fail(format!("fails for R_{i} on the x^{k} coefficient")))
                    }
                    Err(e) => return Err(rec.fail(name, e)),
                }
            }
        }
        _ => {}
    }
    Ok(())
}

fn run_point<F: Field>(cfg: &RunConfig, loaded: &Loaded, field: F, label: String) -> PointResult {
    let mut rec = Recorder::new();
    match loaded.operator(&field) {
        Ok(r) => {
            let _ = pipeline(cfg, r, &mut rec);
        }
        Err(e) => {
            rec.fail("input: R-matrix over the working field", e);
        }
    }
    PointResult { label, checks: rec.checks, values: rec.values }
}

fn load(source: &Source) -> Result<Loaded, RunError> {
    Ok(match source {
        Source::Builtin { kind, n } => Loaded::Builtin { kind: *kind, n: *n },
        Source::File(path) => Loaded::File(RMatrixFile::load(path)?),
    })
}

/// Runs one command. `Err` means the input or configuration was unusable.
pub fn run(cfg: &RunConfig) -> Result<Report, RunError> {
    let start = Instant::now();
    if cfg.rank_bound < 2 {
        return Err(ConfigError::Invalid(format!("rank bound must be at least 2, got {}", cfg.rank_bound)).into());
    }
    let loaded = load(&cfg.source)?;
    let plan = plan(cfg, &loaded)?;
    let results: Vec<PointResult> = match &plan {
        Plan::Symbolic => vec![run_point(cfg, &loaded, RationalFunctions, "q".into())],
        Plan::Exact(q) => {
            let field = Rationals::new(q.clone()).map_err(|e| RunError::Setup(e.to_string()))?;
            vec![run_point(cfg, &loaded, field, q.to_string())]
        }
        Plan::Rational(qs) => {
            qs.par_iter().map(|q| run_point(cfg, &loaded, Rationals::new(q.clone()).expect("screened"), q.to_string())).collect()
        }
        Plan::Modular { prime, residues } => {
            residues.par_iter().map(|&q| run_point(cfg, &loaded, PrimeField::new(*prime, q).expect("screened"), q.to_string())).collect()
        }
    };
    let (ok_status, points) = plan.success_status();
    // checks keep the order the pipeline first produced them in
    let mut merged: Vec<CheckRecord> = Vec::new();
    for pr in &results {
        for c in &pr.checks {
            let pos = match merged.iter().position(|r| r.name == c.name) {
                Some(pos) => pos,
                None => {
                    merged.push(CheckRecord { name: c.name.clone(), status: ok_status, points, witness: None, timing_ms: 0 });
                    merged.len() - 1
                }
            };
            let rec = &mut merged[pos];
            rec.timing_ms += c.ms;
            match &c.outcome {
                Outcome::Pass => {}
                Outcome::Fail(w) => {
                    if rec.status != Status::Failed {
                        rec.status = Status::Failed;
                        rec.points = None;
                        rec.witness = Some(format!("at q = {}: {w}", pr.label));
                    }
                }
                Outcome::Skip(w) => {
                    if rec.status != Status::Failed && rec.status != Status::Skipped {
                        rec.status = Status::Skipped;
                        rec.points = None;
                        rec.witness = Some(w.clone());
                    }
                }
            }
        }
    }
    Ok(Report {
        schema: SCHEMA_VERSION,
        tool: "hecke-lab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.name().into(),
        config: ConfigEcho {
            source: cfg.source.to_string(),
            field: plan.describe(),
            seed: cfg.seed,
            rank_bound: cfg.rank_bound,
            samples: cfg.samples,
        },
        specializations: results.iter().map(|r| r.label.clone()).collect(),
        checks: merged,
        values: results.into_iter().map(|r| PointValues { q: r.label, values: r.values }).collect(),
        timing_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_pool_is_reduced_and_distinct() {
        let pool = rational_candidates();
        assert!(pool.iter().all(|q| *q != Rat::from_integer(1.into())));
        let mut sorted = pool.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), pool.len());
        assert!(pool.contains(&Rat::new(3.into(), 2.into())));
        assert!(!pool.contains(&Rat::new(4.into(), 4.into())));
    }

    #[test]
    fn sampled_points_follow_the_seed() {
        let cfg = RunConfig::new(Command::Validate, "std:3".parse().unwrap()).with_field(FieldStrategy::Sampled { points: 5 });
        let loaded = load(&cfg.source).unwrap();
        let a = match plan(&cfg, &loaded).unwrap() {
            Plan::Rational(qs) => qs,
            _ => unreachable!(),
        };
        let b = match plan(&cfg, &loaded).unwrap() {
            Plan::Rational(qs) => qs,
            _ => unreachable!(),
        };
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        let too_many = cfg.clone().with_field(FieldStrategy::Sampled { points: 99 });
        assert!(plan(&too_many, &loaded).is_err());
    }

    #[test]
    fn standard_two_validates() {
        let cfg = RunConfig::new(Command::Validate, "std:2".parse().unwrap());
        let report = run(&cfg).unwrap();
        assert_eq!(report.exit_code(), 0);
        assert!(report.checks.iter().all(|c| c.status == Status::Proved));
        assert_eq!(report.checks.len(), 3);
    }
}
