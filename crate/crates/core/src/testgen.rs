//! Random and exhaustive testing of conjectures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::datadef::sample::{rng_from_seed, DEFAULT_UNIFORM_BOUND};
use crate::datadef::{minimal_type, Distribution, Restriction, Sampler, Selection};
use crate::eval::{evaluate, Binding};
use crate::term::Term;
use crate::value::{report_name, Symbol, Value};
use crate::world::{flatten_and, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMode {
    Random,
    Exhaustive,
    Mixed,
}

impl TestMode {
    pub fn from_name(s: &str) -> Option<TestMode> {
        match s {
            "random" => Some(TestMode::Random),
            "exhaustive" => Some(TestMode::Exhaustive),
            "mixed" => Some(TestMode::Mixed),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestConfig {
    pub trials: usize,
    pub mode: TestMode,
    pub dist: Distribution,
    pub seed: u64,
    /// Per-variable index bound for exhaustive enumeration.
    pub exhaustive_bound: u64,
    pub uniform_bound: u64,
    /// Hard ceiling on trials for any single goal.
    pub trial_cap: usize,
    /// Fixed seed for every proof attempt (see the session driver).
    pub deterministic: bool,
    pub show_counterexamples: usize,
    pub show_witnesses: usize,
    /// Resampling attempts when a value fails a residual restriction.
    pub rejection_attempts: usize,
}

pub const DEFAULT_SEED: u64 = 24;

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            trials: 100,
            mode: TestMode::Random,
            dist: Distribution::Geometric,
            seed: DEFAULT_SEED,
            exhaustive_bound: 8,
            uniform_bound: DEFAULT_UNIFORM_BOUND,
            trial_cap: 100_000,
            deterministic: true,
            show_counterexamples: 3,
            show_witnesses: 3,
            rejection_attempts: 20,
        }
    }
}

/// Unique counterexamples kept for lifting, beyond the displayed ones.
const STORED_COUNTEREXAMPLES: usize = 20;

/// Variable -> ordered restriction list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeAlist(pub BTreeMap<Symbol, Vec<Restriction>>);

impl TypeAlist {
    pub fn new() -> Self {
        TypeAlist(BTreeMap::new())
    }

    /// Appends a restriction, dropping duplicates and the uninformative
    /// `all` when something more specific is known.
    pub fn push(&mut self, v: &Symbol, r: Restriction) {
        let list = self.0.entry(v.clone()).or_default();
        if !list.contains(&r) {
            list.push(r);
        }
        if list.len() > 1 {
            list.retain(|x| !x.is_all());
        }
    }

    pub fn get(&self, v: &Symbol) -> &[Restriction] {
        self.0.get(v).map_or(&[], Vec::as_slice)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.0.keys()
    }

    /// Keeps only the given variables, adding `all` for missing ones.
    pub fn restrict_to(&self, vars: &BTreeSet<Symbol>) -> TypeAlist {
        let mut out = TypeAlist::new();
        for v in vars {
            match self.0.get(v) {
                Some(rs) if !rs.is_empty() => {
                    for r in rs {
                        out.push(v, r.clone());
                    }
                }
                _ => out.push(v, Restriction::all()),
            }
        }
        out
    }

    /// `((X . POS) (Y NAT INTEGER))`
    pub fn report(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, rs)| {
                let name = report_name(v);
                match rs.as_slice() {
                    [one] => format!("({name} . {})", one.report()),
                    many => {
                        let rs: Vec<String> = many.iter().map(Restriction::report).collect();
                        format!("({name} {})", rs.join(" "))
                    }
                }
            })
            .collect();
        format!("({})", parts.join(" "))
    }
}

impl Serialize for TypeAlist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, Vec<String>> = self
            .0
            .iter()
            .map(|(k, v)| (k.to_string(), v.iter().map(|r| r.to_string()).collect()))
            .collect();
        m.serialize(s)
    }
}

/// Hypotheses and conclusion of an implication.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conjecture {
    pub hyps: Vec<Term>,
    pub conclusion: Term,
}

impl Conjecture {
    /// Flattens `(implies (and h1 h2) (implies h3 c))` into `[h1 h2 h3] => c`.
    pub fn from_term(t: &Term) -> Conjecture {
        let mut hyps = Vec::new();
        let mut c = t.clone();
        while let Some([h, rest]) = c.call_of("implies") {
            flatten_and(h, &mut hyps);
            c = rest.clone();
        }
        Conjecture { hyps, conclusion: c }
    }

    /// Reads a clause: the last literal is the conclusion and the others
    /// are negated hypotheses.
    pub fn from_clause(lits: &[Term]) -> Conjecture {
        match lits.split_last() {
            None => Conjecture { hyps: Vec::new(), conclusion: Term::nil() },
            Some((last, rest)) => Conjecture { hyps: rest.iter().map(negate).collect(), conclusion: last.clone() },
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = self.conclusion.free_vars();
        for h in &self.hyps {
            h.collect_vars(&mut out);
        }
        out
    }

    pub fn to_term(&self) -> Term {
        match self.hyps.len() {
            0 => self.conclusion.clone(),
            _ => {
                let mut hs = self.hyps.clone();
                let last = hs.pop().unwrap();
                let h = hs.into_iter().rev().fold(last, |acc, h| Term::app("and", vec![h, acc]));
                Term::app("implies", vec![h, self.conclusion.clone()])
            }
        }
    }

    /// Evaluates hypotheses then conclusion; `None` means a hypothesis failed.
    pub fn check(&self, b: &Binding, world: &World) -> Result<Option<bool>, crate::error::EvalError> {
        for h in &self.hyps {
            if evaluate(h, b, world)?.is_nil() {
                return Ok(None);
            }
        }
        Ok(Some(evaluate(&self.conclusion, b, world)?.is_true()))
    }
}

pub fn negate(t: &Term) -> Term {
    match t.negated() {
        Some(x) => x.clone(),
        None => Term::not(t.clone()),
    }
}

/// Collects datatype and equality hypotheses; every other free variable
/// of the conjecture is unrestricted.
pub fn extract_restrictions(conj: &Conjecture, world: &World) -> TypeAlist {
    let mut alist = TypeAlist::new();
    for h in &conj.hyps {
        if let Term::App(f, args) = h {
            match args.as_slice() {
                [Term::Var(x)] => {
                    if let Some(t) = world.types().type_of_recognizer(f) {
                        alist.push(x, Restriction::Type(t));
                    }
                }
                [Term::Var(x), Term::Quote(v)] | [Term::Quote(v), Term::Var(x)] if f.as_str() == "equal" => {
                    alist.push(x, Restriction::Singleton(v.clone()));
                }
                _ => {}
            }
        }
    }
    for v in conj.free_vars() {
        if alist.get(&v).is_empty() {
            alist.push(&v, Restriction::all());
        }
    }
    alist
}

#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal: Option<String>,
    pub alist: TypeAlist,
    pub conjecture: Conjecture,
    pub seed: u64,
    pub mode: TestMode,
    pub dist: Distribution,
    pub exhaustive: bool,
    pub trials: usize,
    pub satisfied: usize,
    pub unique_satisfied: usize,
    pub counterexample_trials: usize,
    pub unique_counterexamples: usize,
    pub witness_trials: usize,
    pub unique_witnesses: usize,
    pub vacuous: usize,
    pub erroring: usize,
    pub errors: Vec<String>,
    pub counterexamples: Vec<Binding>,
    pub witnesses: Vec<Binding>,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub show_counterexamples: usize,
}

impl TestReport {
    pub fn falsified(&self) -> bool {
        self.unique_counterexamples > 0
    }

    /// Paper-style narrative.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match &self.goal {
            Some(g) => writeln!(out, "Random testing \"{g}\" with type alist {}", self.alist.report()),
            None => writeln!(out, "Random testing with type alist {}", self.alist.report()),
        }
        .unwrap();
        if !self.counterexamples.is_empty() {
            out.push_str("\nWe falsified the conjecture. Here are counterexamples:\n");
            for b in self.counterexamples.iter().take(self.show_counterexamples) {
                writeln!(out, " -- {}", b.report()).unwrap();
            }
        }
        if !self.witnesses.is_empty() {
            out.push_str("\nCases in which the conjecture is true include:\n");
            for b in &self.witnesses {
                writeln!(out, " -- {}", b.report()).unwrap();
            }
        }
        out.push('\n');
        out.push_str(&self.summary());
        out
    }

    pub fn summary(&self) -> String {
        let kind = if self.exhaustive { "exhaustive" } else { "random" };
        let mut out = String::new();
        if self.satisfied == 0 {
            writeln!(out, "We tried {} {kind} trials, none of which satisfied the hypotheses.", self.trials).unwrap();
        } else {
            writeln!(
                out,
                "We tried {} {kind} trials, {} ({} unique) of which satisfied the hypotheses.",
                self.trials, self.satisfied, self.unique_satisfied
            )
            .unwrap();
            let n = |k: usize| if k == 0 { "none".to_string() } else { k.to_string() };
            writeln!(
                out,
                "Of these, {} were counterexamples and {} were witnesses.",
                n(self.unique_counterexamples),
                n(self.unique_witnesses)
            )
            .unwrap();
        }
        if self.erroring > 0 {
            writeln!(out, "{} trials raised evaluation errors.", self.erroring).unwrap();
        }
        out
    }
}

/// Index tuples in `[0, bound)^k`, least significant position last.
fn exhaustive_indices(trial: usize, k: usize, bound: u64) -> Vec<u64> {
    let mut out = vec![0; k];
    let mut n = trial as u64;
    for slot in out.iter_mut().rev() {
        *slot = n % bound;
        n /= bound;
    }
    out
}

/// Runs the trials for `conj` with variables drawn per `alist`.
pub fn run_trials(conj: &Conjecture, alist: &TypeAlist, config: &TestConfig, world: &World) -> TestReport {
    let started = web_time_now();
    let vars: Vec<Symbol> = conj.free_vars().into_iter().collect();
    let alist = alist.restrict_to(&vars.iter().cloned().collect());
    let selections: Vec<Selection> = vars.iter().map(|v| minimal_type(world, alist.get(v))).collect();

    let bound = config.exhaustive_bound.max(1);
    let space = (bound as u128).checked_pow(vars.len() as u32).unwrap_or(u128::MAX);
    let requested = config.trials.min(config.trial_cap);
    let exhaustive = match config.mode {
        TestMode::Random => false,
        TestMode::Exhaustive => true,
        TestMode::Mixed => space <= requested as u128,
    };
    let trials = if exhaustive { (requested as u128).min(space) as usize } else { requested };

    let sampler = Sampler { dist: config.dist, uniform_bound: config.uniform_bound };
    let mut rng = rng_from_seed(config.seed);
    let mut report = TestReport {
        goal: None,
        alist: alist.clone(),
        conjecture: conj.clone(),
        seed: config.seed,
        mode: config.mode,
        dist: config.dist,
        exhaustive,
        trials,
        satisfied: 0,
        unique_satisfied: 0,
        counterexample_trials: 0,
        unique_counterexamples: 0,
        witness_trials: 0,
        unique_witnesses: 0,
        vacuous: 0,
        erroring: 0,
        errors: Vec::new(),
        counterexamples: Vec::new(),
        witnesses: Vec::new(),
        elapsed: Duration::ZERO,
        show_counterexamples: config.show_counterexamples,
    };
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let note_error = |report: &mut TestReport, e: String| {
        report.erroring += 1;
        if report.errors.len() < 3 && !report.errors.contains(&e) {
            report.errors.push(e);
        }
    };

    for trial in 0..trials {
        let mut binding = Binding::new();
        let mut failed = None;
        let idx = exhaustive.then(|| exhaustive_indices(trial, vars.len(), bound));
        for (i, (v, sel)) in vars.iter().zip(&selections).enumerate() {
            let value = match &idx {
                Some(ix) => sel.primary.enumerate(world, ix[i]),
                None => sample_selection(world, sel, &sampler, &mut rng, config.rejection_attempts),
            };
            match value {
                Ok(x) => binding.insert(v.clone(), x),
                Err(e) => {
                    failed = Some(e.to_string());
                    break;
                }
            }
        }
        if let Some(e) = failed {
            note_error(&mut report, e);
            continue;
        }
        match conj.check(&binding, world) {
            Err(e) => note_error(&mut report, e.to_string()),
            Ok(None) => report.vacuous += 1,
            Ok(Some(holds)) => {
                report.satisfied += 1;
                let fresh = seen.insert(binding.to_string());
                if fresh {
                    report.unique_satisfied += 1;
                }
                if holds {
                    report.witness_trials += 1;
                    if fresh {
                        report.unique_witnesses += 1;
                        if report.witnesses.len() < config.show_witnesses {
                            report.witnesses.push(binding);
                        }
                    }
                } else {
                    report.counterexample_trials += 1;
                    if fresh {
                        report.unique_counterexamples += 1;
                        if report.counterexamples.len() < config.show_counterexamples.max(STORED_COUNTEREXAMPLES) {
                            report.counterexamples.push(binding);
                        }
                    }
                }
            }
        }
    }
    report.elapsed = web_time_elapsed(started);
    report
}

fn sample_selection(
    world: &World,
    sel: &Selection,
    sampler: &Sampler,
    rng: &mut crate::datadef::TestRng,
    attempts: usize,
) -> Result<Value, crate::error::EvalError> {
    let mut last = sampler.sample(world, &sel.primary, rng)?;
    for _ in 0..attempts {
        let mut ok = true;
        for r in &sel.residual {
            if !r.recognize(world, &last)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(last);
        }
        last = sampler.sample(world, &sel.primary, rng)?;
    }
    Ok(last)
}

/// Seed for the `stream`-th independent test run under a session seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    use rand::Rng;
    let mut r = rng_from_seed(seed);
    r.set_stream(stream);
    r.random()
}

/// Extracts restrictions from the unsimplified conjecture and tests it.
pub fn top_level_test(form: &Term, config: &TestConfig, world: &World) -> TestReport {
    let conj = Conjecture::from_term(form);
    let alist = extract_restrictions(&conj, world);
    run_trials(&conj, &alist, config, world)
}

#[cfg(not(target_arch = "wasm32"))]
fn web_time_now() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(target_arch = "wasm32")]
fn web_time_now() -> Option<std::time::Instant> {
    None
}

fn web_time_elapsed(start: Option<std::time::Instant>) -> Duration {
    start.map_or(Duration::ZERO, |s| s.elapsed())
}
