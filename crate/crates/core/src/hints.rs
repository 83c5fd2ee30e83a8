//! Hint selection, override folding and backtracking after a proof process.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::HintError;
use crate::sexp::{Sexp, SexpKind};
use crate::term::Term;
use crate::testgen::{run_trials, Conjecture, TestConfig, TestReport, TypeAlist};
use crate::value::Symbol;
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Simplify,
    EliminateDestructors,
    Generalize,
}

impl Process {
    pub const ALL: [Process; 3] = [Process::Simplify, Process::EliminateDestructors, Process::Generalize];

    pub fn name(self) -> &'static str {
        match self {
            Process::Simplify => "simplify",
            Process::EliminateDestructors => "eliminate-destructors",
            Process::Generalize => "generalize",
        }
    }

    pub fn from_name(s: &str) -> Option<Process> {
        Process::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Process {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Backtrack handlers a hint may name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Handler {
    TestGenCheckpoint,
    Ignore,
}

impl Handler {
    pub fn from_name(s: &str) -> Option<Handler> {
        match s {
            "test-gen-checkpoint" => Some(Handler::TestGenCheckpoint),
            "nil" | "ignore" => Some(Handler::Ignore),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct HintSettings {
    pub do_not: BTreeSet<Process>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backtrack: Option<Handler>,
    /// Settings carry over to descendant goals.
    pub replace: bool,
}

impl HintSettings {
    /// Union of two settings; `other` wins on scalar fields it sets.
    pub fn extend(&self, other: &HintSettings) -> HintSettings {
        HintSettings {
            do_not: self.do_not.union(&other.do_not).copied().collect(),
            trials: other.trials.or(self.trials),
            backtrack: other.backtrack.or(self.backtrack),
            replace: self.replace || other.replace,
        }
    }
}

/// A hint from a `thm` form, attached to one goal id.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserHint {
    pub goal: String,
    pub settings: HintSettings,
}

impl UserHint {
    /// Reads `("Goal" :do-not (generalize) :trials 50 :backtrack test-gen-checkpoint)`.
    pub fn from_sexp(s: &Sexp) -> Result<UserHint, HintError> {
        let bad = |m: &str| HintError::Malformed(m.to_string());
        let items = s.list().ok_or_else(|| bad("a hint must be a list"))?;
        let (head, rest) = items.split_first().ok_or_else(|| bad("empty hint"))?;
        let goal = match &head.kind {
            SexpKind::Str(g) => g.to_string(),
            _ => return Err(bad("a hint must start with a goal name string")),
        };
        if rest.len() % 2 != 0 {
            return Err(bad("hint keywords must come in pairs"));
        }
        let mut settings = HintSettings::default();
        for kv in rest.chunks(2) {
            let key = kv[0].symbol().filter(|_| kv[0].is_keyword()).ok_or_else(|| bad("expected a keyword"))?;
            let val = unquote(&kv[1]);
            match key {
                ":do-not" => {
                    let names: Vec<&Sexp> = match val.list() {
                        Some(l) => l.iter().collect(),
                        None => vec![val],
                    };
                    for n in names {
                        let name = n.symbol().ok_or_else(|| bad(":do-not expects process names"))?;
                        if name == "nil" {
                            continue;
                        }
                        let p = Process::from_name(name).ok_or_else(|| HintError::UnknownProcess(Symbol::new(name)))?;
                        settings.do_not.insert(p);
                    }
                }
                ":trials" => match &val.kind {
                    SexpKind::Num(r) if r.is_integer() && r.numer().sign() == num_bigint::Sign::Plus => {
                        settings.trials = Some(r.to_integer().try_into().map_err(|_| bad(":trials is too large"))?);
                    }
                    _ => return Err(bad(":trials expects a positive integer")),
                },
                ":backtrack" => {
                    let name = val.symbol().ok_or_else(|| bad(":backtrack expects a handler name"))?;
                    settings.backtrack =
                        Some(Handler::from_name(name).ok_or_else(|| HintError::UnknownHandler(Symbol::new(name)))?);
                }
                other => return Err(bad(&format!("unknown hint keyword {other}"))),
            }
        }
        Ok(UserHint { goal, settings })
    }
}

fn unquote(s: &Sexp) -> &Sexp {
    match s.list() {
        Some([q, x]) if q.symbol() == Some("quote") => x,
        _ => s,
    }
}

/// First hint naming this goal, else empty settings.
pub fn select_hints(goal_id: &str, hints: &[UserHint]) -> HintSettings {
    hints
        .iter()
        .find(|h| h.goal.eq_ignore_ascii_case(goal_id))
        .map(|h| h.settings.clone())
        .unwrap_or_default()
}

pub type Transformer = Arc<dyn Fn(HintSettings) -> HintSettings + Send + Sync>;

#[derive(Clone)]
pub struct OverrideHint {
    pub name: String,
    pub transform: Transformer,
}

impl fmt::Debug for OverrideHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OverrideHint({})", self.name)
    }
}

impl OverrideHint {
    pub fn new(name: &str, f: impl Fn(HintSettings) -> HintSettings + Send + Sync + 'static) -> Self {
        OverrideHint { name: name.to_string(), transform: Arc::new(f) }
    }
}

/// Left fold in registration order.
pub fn fold_override_hints(settings: HintSettings, overrides: &[OverrideHint]) -> HintSettings {
    overrides.iter().fold(settings, |s, o| (o.transform)(s))
}

/// Installs the testing backtrack handler on every goal, keeping whatever
/// the user asked for.
pub fn testing_override() -> OverrideHint {
    OverrideHint::new("testing", |mut s| {
        if s.backtrack.is_none() {
            s.backtrack = Some(Handler::TestGenCheckpoint);
        }
        s.replace = true;
        s
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum BacktrackOutcome {
    Keep,
    /// Discard the children and rerun the goal with these settings.
    Redo(HintSettings),
}

/// A child produced by a process, with the type alist it would carry.
#[derive(Clone, Debug)]
pub struct ChildPreview {
    pub clause: Vec<Term>,
    pub alist: TypeAlist,
}

/// Runs `handler` after `processor` produced `children` for a goal with
/// `settings`. The returned report is the test that informed the decision.
pub fn apply_backtrack(
    handler: Handler,
    processor: Process,
    children: &[ChildPreview],
    settings: &HintSettings,
    world: &World,
    config: &TestConfig,
) -> (BacktrackOutcome, Option<TestReport>) {
    match handler {
        Handler::Ignore => (BacktrackOutcome::Keep, None),
        Handler::TestGenCheckpoint => test_gen_checkpoint(processor, children, settings, world, config),
    }
}

/// Refutes generalizations: tests the first child of a `generalize` step
/// and asks for a redo without generalization when it is falsified.
pub fn test_gen_checkpoint(
    processor: Process,
    children: &[ChildPreview],
    settings: &HintSettings,
    world: &World,
    config: &TestConfig,
) -> (BacktrackOutcome, Option<TestReport>) {
    if processor != Process::Generalize {
        return (BacktrackOutcome::Keep, None);
    }
    let Some(child) = children.first() else {
        return (BacktrackOutcome::Keep, None);
    };
    let conj = Conjecture::from_clause(&child.clause);
    let mut cfg = config.clone();
    if let Some(n) = settings.trials {
        cfg.trials = n;
    }
    let report = run_trials(&conj, &child.alist, &cfg, world);
    if report.falsified() {
        let mut next = settings.clone();
        next.do_not.insert(Process::Generalize);
        (BacktrackOutcome::Redo(next), Some(report))
    } else {
        (BacktrackOutcome::Keep, Some(report))
    }
}
