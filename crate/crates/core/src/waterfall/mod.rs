//! The proof driver: goals flow through simplify, destructor elimination
//! and generalization; goals none of them change become checkpoints, which
//! are tested and whose counterexamples are lifted to the original goal.

pub mod clausify;
pub mod destructor;
pub mod generalize;
pub mod simplify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::datadef::sample::rng_from_seed;
use crate::datadef::{minimal_type, Sampler, TestRng};
use crate::eval::{evaluate, Binding};
use crate::hints::{
    apply_backtrack, fold_override_hints, select_hints, testing_override, BacktrackOutcome, ChildPreview,
    HintSettings, Process, UserHint,
};
use crate::history::{clause_vars, node_alist, History, HistoryNode, Image};
use crate::term::Term;
use crate::testgen::{derive_seed, extract_restrictions, run_trials, Conjecture, TestConfig, TestReport, TypeAlist};
use crate::value::{report_name, Symbol, Value};
use crate::world::World;

pub use clausify::{clausify, normalize};
pub use simplify::{simplify_clause, Simplified};

#[derive(Clone, Debug, PartialEq)]
pub struct WaterfallConfig {
    pub testing: TestConfig,
    pub backtrack: bool,
    pub rewrite_depth: usize,
    pub rewrite_budget: usize,
    /// Goals processed before the rest are pooled unexamined.
    pub max_goals: usize,
}

impl WaterfallConfig {
    pub fn from_world(world: &World) -> Self {
        let s = world.settings();
        WaterfallConfig {
            testing: s.testing.clone(),
            backtrack: true,
            rewrite_depth: s.rewrite_depth,
            rewrite_budget: s.rewrite_budget,
            max_goals: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofStatus {
    Proved,
    Failed,
}

/// One successful process application, kept or discarded by backtracking.
#[derive(Clone, Debug, Serialize)]
pub struct Application {
    pub goal: String,
    pub process: Process,
    pub children: Vec<String>,
    pub kept: bool,
    #[serde(skip)]
    pub parent_clause: Vec<Term>,
    #[serde(skip)]
    pub parent_alist: TypeAlist,
    /// Child clauses with each child variable expressed over the parent's.
    #[serde(skip)]
    pub child_clauses: Vec<(Vec<Term>, BTreeMap<Symbol, Term>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Discard {
    pub goal: String,
    pub process: Process,
    pub child: String,
    pub counterexample: Option<Binding>,
    pub do_not: Vec<Process>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftedCounterexample {
    pub binding: Binding,
    pub dont_care: BTreeSet<Symbol>,
    pub subgoal: Binding,
}

impl LiftedCounterexample {
    /// `(X (429 1 429))`, with don't-care variables shown as `?`.
    pub fn report(&self) -> String {
        let parts: Vec<String> = self
            .binding
            .iter()
            .map(|(k, v)| {
                let v = if self.dont_care.contains(k) { "?".to_string() } else { v.report().to_string() };
                format!("({} {v})", report_name(k))
            })
            .collect();
        match parts.len() {
            0 => "()".to_string(),
            1 => parts[0].clone(),
            n => format!("{} and {}", parts[..n - 1].join(", "), parts[n - 1]),
        }
    }
}

impl Serialize for LiftedCounterexample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LiftedCounterexample", 3)?;
        st.serialize_field("binding", &self.binding)?;
        st.serialize_field("dont_care", &self.dont_care)?;
        st.serialize_field("subgoal", &self.subgoal)?;
        st.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Checkpoint {
    pub id: String,
    pub clause: Vec<Term>,
    pub formula: Term,
    pub alist: TypeAlist,
    pub report: TestReport,
    /// Verified counterexamples to the original conjecture.
    pub lifted: Vec<LiftedCounterexample>,
    /// Lifts that failed verification.
    pub spurious: Vec<LiftedCounterexample>,
    /// Counterexamples that could not be lifted.
    pub local: Vec<Binding>,
    pub lift_failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofResult {
    pub formula: Term,
    pub status: ProofStatus,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub log: Vec<Application>,
    pub discarded: Vec<Discard>,
    pub counterexamples: Vec<LiftedCounterexample>,
    pub history: History,
    pub diagnostics: Vec<String>,
}

impl ProofResult {
    pub fn falsified(&self) -> bool {
        !self.counterexamples.is_empty()
    }
}

struct Pending {
    id: String,
    clause: Vec<Term>,
    inherited: HintSettings,
}

struct ChildSpec {
    clause: Vec<Term>,
    var_map: BTreeMap<Symbol, Image>,
    down: BTreeMap<Symbol, Term>,
    type_map: TypeAlist,
}

struct Seeds {
    base: u64,
    fixed: bool,
    next: u64,
}

impl Seeds {
    fn next(&mut self) -> u64 {
        if self.fixed {
            return self.base;
        }
        self.next += 1;
        derive_seed(self.base, self.next)
    }
}

fn split_primes(id: &str) -> (&str, usize) {
    match id.find('\'') {
        None => (id, 0),
        Some(i) => {
            let (base, tail) = id.split_at(i);
            let inner = tail.trim_matches('\'');
            let n = if inner.is_empty() { tail.len() } else { inner.parse().unwrap_or(tail.len()) };
            (base, n)
        }
    }
}

fn with_primes(base: &str, n: usize) -> String {
    match n {
        0 => base.to_string(),
        1..=3 => format!("{base}{}", "'".repeat(n)),
        _ => format!("{base}'{n}'"),
    }
}

/// `Goal` -> `Goal'`, `Subgoal 3'''` -> `Subgoal 3'4'`; several children
/// are numbered down to 1.
pub fn child_ids(parent: &str, n: usize) -> Vec<String> {
    let (base, primes) = split_primes(parent);
    if n == 1 {
        return vec![with_primes(base, primes + 1)];
    }
    let prefix = if base == "Goal" { "Subgoal ".to_string() } else { format!("{base}.") };
    (1..=n).rev().map(|i| format!("{prefix}{i}")).collect()
}

fn identity_maps(child: &[Term], parent_vars: &BTreeSet<Symbol>) -> (BTreeMap<Symbol, Image>, BTreeMap<Symbol, Term>) {
    let cv = clause_vars(child);
    let var_map = parent_vars
        .iter()
        .filter(|v| cv.contains(*v))
        .map(|v| (v.clone(), Image::Term(Term::Var(v.clone()))))
        .collect();
    let down = cv.iter().map(|v| (v.clone(), Term::Var(v.clone()))).collect();
    (var_map, down)
}

fn apply_process(
    process: Process,
    clause: &[Term],
    parent_alist: &TypeAlist,
    world: &World,
    config: &WaterfallConfig,
    diagnostics: &mut Vec<String>,
    goal: &str,
) -> Option<Vec<ChildSpec>> {
    let parent_vars = clause_vars(clause);
    let mut used = parent_vars.clone();
    match process {
        Process::Simplify => match simplify_clause(clause, world, config.rewrite_depth, config.rewrite_budget) {
            Simplified::Unchanged(why) => {
                if let Some(w) = why {
                    diagnostics.push(format!("{goal}: {w}; simplification left the goal unchanged"));
                }
                None
            }
            Simplified::Children(cs) => Some(
                cs.into_iter()
                    .map(|(c, subst)| {
                        let (mut var_map, down) = identity_maps(&c, &parent_vars);
                        for (v, t) in subst {
                            if parent_vars.contains(&v) {
                                var_map.insert(v, Image::Term(t));
                            }
                        }
                        ChildSpec { clause: c, var_map, down, type_map: TypeAlist::new() }
                    })
                    .collect(),
            ),
        },
        Process::EliminateDestructors => {
            let e = destructor::eliminate_destructors(clause, &mut used)?;
            let (mut var_map, mut down) = identity_maps(&e.clause, &parent_vars);
            var_map.insert(e.var.clone(), Image::Term(e.constructor()));
            let v = Term::Var(e.var.clone());
            down.insert(e.car.clone(), Term::app("car", vec![v.clone()]));
            down.insert(e.cdr.clone(), Term::app("cdr", vec![v]));
            let mut type_map = TypeAlist::new();
            for r in parent_alist.get(&e.var) {
                let (a, b) = destructor::component_restrictions(world, r);
                type_map.push(&e.car, a);
                type_map.push(&e.cdr, b);
            }
            Some(vec![ChildSpec { clause: e.clause, var_map, down, type_map }])
        }
        Process::Generalize => {
            let g = generalize::generalize(clause, world, &mut used)?;
            let (var_map, mut down) = identity_maps(&g.clause, &parent_vars);
            down.insert(g.var.clone(), g.replaced.clone());
            let mut type_map = TypeAlist::new();
            type_map.push(&g.var, crate::datadef::Restriction::all());
            Some(vec![ChildSpec { clause: g.clause, var_map, down, type_map }])
        }
    }
}

/// Attempts `top`, testing every checkpoint and lifting what testing finds.
pub fn run_waterfall(top: &Term, world: &World, hints: &[UserHint], config: &WaterfallConfig) -> ProofResult {
    let mut history = History::new();
    let root_alist = extract_restrictions(&Conjecture::from_term(top), world);
    let root = match clausify(top).as_slice() {
        [one] => one.clone(),
        _ => vec![top.clone()],
    };
    history.record_root("Goal", root.clone(), root_alist).expect("fresh history");
    let overrides = if config.backtrack { vec![testing_override()] } else { Vec::new() };
    let mut seeds = Seeds { base: config.testing.seed, fixed: config.testing.deterministic, next: 0 };

    let mut log = Vec::new();
    let mut discarded = Vec::new();
    let mut diagnostics = Vec::new();
    let mut pooled: Vec<(String, Option<usize>)> = Vec::new();
    let mut stack = vec![Pending { id: "Goal".to_string(), clause: root, inherited: HintSettings::default() }];
    let mut processed = 0;

    while let Some(goal) = stack.pop() {
        processed += 1;
        let user = select_hints(&goal.id, hints).extend(&goal.inherited);
        if processed > config.max_goals {
            if processed == config.max_goals + 1 {
                diagnostics.push(format!("goal limit {} reached; remaining goals were pooled", config.max_goals));
            }
            pooled.push((goal.id, user.trials));
            continue;
        }
        let node = history.get(&goal.id).expect("goal recorded").clone();
        let parent_alist = node_alist(world, &node);
        let mut settings = fold_override_hints(user.clone(), &overrides);
        let mut done = false;
        'retry: while !done {
            for process in Process::ALL {
                if settings.do_not.contains(&process) {
                    continue;
                }
                let Some(children) =
                    apply_process(process, &goal.clause, &parent_alist, world, config, &mut diagnostics, &goal.id)
                else {
                    continue;
                };
                let ids = child_ids(&goal.id, children.len());
                let nodes: Vec<HistoryNode> = children
                    .iter()
                    .zip(&ids)
                    .map(|(c, id)| {
                        history
                            .preview(world, &goal.id, id, process, c.clause.clone(), c.var_map.clone(), c.type_map.clone())
                            .expect("parent recorded")
                    })
                    .collect();
                let application = Application {
                    goal: goal.id.clone(),
                    process,
                    children: ids.clone(),
                    kept: true,
                    parent_clause: goal.clause.clone(),
                    parent_alist: parent_alist.clone(),
                    child_clauses: children.iter().map(|c| (c.clause.clone(), c.down.clone())).collect(),
                };
                if let Some(handler) = settings.backtrack {
                    let previews: Vec<ChildPreview> =
                        nodes.iter().map(|n| ChildPreview { clause: n.clause.clone(), alist: node_alist(world, n) }).collect();
                    let mut tcfg = config.testing.clone();
                    tcfg.seed = seeds.next();
                    let (outcome, report) = apply_backtrack(handler, process, &previews, &settings, world, &tcfg);
                    if let BacktrackOutcome::Redo(next) = outcome {
                        let next = settings.extend(&next);
                        discarded.push(Discard {
                            goal: goal.id.clone(),
                            process,
                            child: previews
                                .first()
                                .map(|p| Conjecture::from_clause(&p.clause).to_term().to_string())
                                .unwrap_or_default(),
                            counterexample: report.and_then(|r| r.counterexamples.first().cloned()),
                            do_not: next.do_not.iter().copied().collect(),
                        });
                        log.push(Application { kept: false, children: Vec::new(), ..application });
                        settings = next;
                        continue 'retry;
                    }
                }
                log.push(application);
                for n in nodes {
                    history.record(n).expect("fresh child id");
                }
                for (c, id) in children.into_iter().zip(ids).rev() {
                    stack.push(Pending { id, clause: c.clause, inherited: user.clone() });
                }
                done = true;
                continue 'retry;
            }
            pooled.push((goal.id.clone(), settings.trials));
            done = true;
        }
    }

    let mut checkpoints = Vec::new();
    let mut counterexamples: Vec<LiftedCounterexample> = Vec::new();
    for (id, trials) in pooled {
        let node = history.get(&id).expect("pooled goal recorded");
        let alist = node_alist(world, node);
        let conj = Conjecture::from_clause(&node.clause);
        let mut tcfg = config.testing.clone();
        tcfg.seed = seeds.next();
        if let Some(n) = trials {
            tcfg.trials = n;
        }
        let mut report = run_trials(&conj, &alist, &tcfg, world);
        report.goal = Some(id.clone());
        let mut cp = Checkpoint {
            id: id.clone(),
            clause: node.clause.clone(),
            formula: conj.to_term(),
            alist,
            report,
            lifted: Vec::new(),
            spurious: Vec::new(),
            local: Vec::new(),
            lift_failure: None,
        };
        let mut rng = rng_from_seed(tcfg.seed);
        for cex in cp.report.counterexamples.clone() {
            match lift_and_verify(&history, world, top, &id, &cex, &mut rng) {
                Ok((l, true)) => {
                    if !counterexamples.iter().any(|c| c.binding == l.binding) {
                        counterexamples.push(l.clone());
                    }
                    if !cp.lifted.iter().any(|c| c.binding == l.binding) {
                        cp.lifted.push(l);
                    }
                }
                Ok((l, false)) => cp.spurious.push(l),
                Err(e) => {
                    cp.lift_failure.get_or_insert(e);
                    cp.local.push(cex);
                }
            }
        }
        checkpoints.push(cp);
    }
    ProofResult {
        formula: top.clone(),
        status: if checkpoints.is_empty() { ProofStatus::Proved } else { ProofStatus::Failed },
        seed: config.testing.seed,
        checkpoints,
        log,
        discarded,
        counterexamples,
        history,
        diagnostics,
    }
}

fn sample_for(world: &World, history: &History, node_id: &str, var: &Symbol, rng: &mut TestRng) -> Value {
    let alist = history
        .get(node_id)
        .and_then(|n| n.parent.as_deref())
        .and_then(|p| history.get(p))
        .map(|p| node_alist(world, p))
        .unwrap_or_default();
    let sel = minimal_type(world, alist.get(var));
    Sampler::new(crate::datadef::Distribution::Geometric)
        .sample(world, &sel.primary, rng)
        .unwrap_or_else(|_| Value::nil())
}

const DONT_CARE_CHECKS: usize = 3;

/// Lifts a checkpoint counterexample and re-checks it on `top`; the flag
/// says whether it held up, including under other values for `?`s.
fn lift_and_verify(
    history: &History,
    world: &World,
    top: &Term,
    id: &str,
    cex: &Binding,
    rng: &mut TestRng,
) -> Result<(LiftedCounterexample, bool), String> {
    let lifted = history.lift(world, id, cex, |_, _| Value::nil()).map_err(|e| e.to_string())?;
    let falsifies = |b: &Binding| evaluate(top, b, world).is_ok_and(|v| v.is_nil());
    let mut ok = falsifies(&lifted.binding);
    if ok && lifted.used_dont_care {
        for _ in 0..DONT_CARE_CHECKS {
            let again = history
                .lift(world, id, cex, |node, v| sample_for(world, history, node, v, rng))
                .map_err(|e| e.to_string())?;
            if !falsifies(&again.binding) {
                ok = false;
                break;
            }
        }
    }
    Ok((LiftedCounterexample { binding: lifted.binding, dont_care: lifted.dont_care, subgoal: cex.clone() }, ok))
}

fn clause_holds(clause: &[Term], b: &Binding, world: &World) -> Result<bool, crate::error::EvalError> {
    for l in clause {
        if evaluate(l, b, world)?.is_true() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A binding under which every child holds but the parent does not.
#[derive(Clone, Debug, PartialEq)]
pub struct Unsound {
    pub goal: String,
    pub process: Process,
    pub binding: Binding,
}

/// Checks on `n` sampled parent bindings that the children of `app`
/// together imply its parent.
pub fn check_application(app: &Application, world: &World, n: usize, seed: u64) -> Result<(), Unsound> {
    let vars = clause_vars(&app.parent_clause);
    let sels: Vec<_> = vars.iter().map(|v| (v.clone(), minimal_type(world, app.parent_alist.get(v)))).collect();
    let sampler = Sampler::new(crate::datadef::Distribution::Geometric);
    let mut rng = rng_from_seed(seed);
    for _ in 0..n {
        let mut b = Binding::new();
        for (v, sel) in &sels {
            b.insert(v.clone(), sampler.sample(world, &sel.primary, &mut rng).unwrap_or_else(|_| Value::nil()));
        }
        let Ok(parent) = clause_holds(&app.parent_clause, &b, world) else { continue };
        if parent {
            continue;
        }
        let mut all_children = true;
        for (clause, down) in &app.child_clauses {
            let mut cb = Binding::new();
            let mut failed = false;
            for (v, t) in down {
                match evaluate(t, &b, world) {
                    Ok(x) => cb.insert(v.clone(), x),
                    Err(_) => failed = true,
                }
            }
            if failed || !clause_holds(clause, &cb, world).unwrap_or(false) {
                all_children = false;
                break;
            }
        }
        if all_children {
            return Err(Unsound { goal: app.goal.clone(), process: app.process, binding: b });
        }
    }
    Ok(())
}

impl ProofResult {
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "Proof attempt for {}", self.formula.report()).unwrap();
        out.push('\n');
        for a in &self.log {
            if !a.kept {
                writeln!(out, "{}: {} discarded after testing refuted its result.", a.goal, a.process).unwrap();
            } else if a.children.is_empty() {
                writeln!(out, "{}: {} proved the goal.", a.goal, a.process).unwrap();
            } else {
                writeln!(out, "{}: {} produced {}.", a.goal, a.process, join_and(&a.children)).unwrap();
            }
        }
        for d in &self.diagnostics {
            writeln!(out, "Note: {d}").unwrap();
        }
        for cp in &self.checkpoints {
            writeln!(out, "\nCheckpoint {}:\n{}\n", cp.id, cp.formula.report()).unwrap();
            let r = &cp.report;
            writeln!(out, "Random testing \"{}\" with type alist {}", cp.id, r.alist.report()).unwrap();
            if !cp.lifted.is_empty() {
                out.push_str("\nWe falsified the conjecture. Here are counterexamples:\n");
                for l in cp.lifted.iter().take(r.show_counterexamples) {
                    writeln!(out, " -- {}", l.report()).unwrap();
                }
            }
            if !cp.local.is_empty() {
                out.push_str("\nWe falsified this subgoal, but the counterexamples do not lift to the original conjecture:\n");
                for b in cp.local.iter().take(r.show_counterexamples) {
                    writeln!(out, " -- {}", b.report()).unwrap();
                }
                if let Some(e) = &cp.lift_failure {
                    writeln!(out, "({e})").unwrap();
                }
            }
            if !cp.spurious.is_empty() {
                out.push_str("\nSpurious lifts (falsify this subgoal but not the original conjecture):\n");
                for l in cp.spurious.iter().take(r.show_counterexamples) {
                    writeln!(out, " -- {}", l.report()).unwrap();
                }
            }
            if !r.witnesses.is_empty() {
                out.push_str("\nCases in which the conjecture is true include:\n");
                for b in &r.witnesses {
                    writeln!(out, " -- {}", b.report()).unwrap();
                }
            }
            out.push('\n');
            out.push_str(&r.summary());
        }
        out.push('\n');
        match self.status {
            ProofStatus::Proved => out.push_str("Q.E.D.\n"),
            ProofStatus::Failed => {
                let n = self.checkpoints.len();
                write!(out, "The proof failed with {n} checkpoint{}", if n == 1 { "" } else { "s" }).unwrap();
                match self.counterexamples.len() {
                    0 => out.push_str("; testing found no counterexample to the original conjecture.\n"),
                    k => writeln!(out, "; testing found {k} counterexample{} to the original conjecture.", if k == 1 { "" } else { "s" }).unwrap(),
                }
            }
        }
        out
    }
}

fn join_and(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}
