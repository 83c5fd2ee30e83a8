//! Destructor elimination: trade `(car v)` and `(cdr v)` for fresh
//! variables when `v` is known to be a cons.

use std::collections::BTreeSet;

use crate::datadef::{BaseType, Restriction, TypeExpr};
use crate::term::Term;
use crate::value::Symbol;
use crate::world::World;

/// Lowest-numbered `base1`, `base2`, ... not yet used in the proof.
pub fn fresh_numbered(base: &str, used: &mut BTreeSet<Symbol>) -> Symbol {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|i| Symbol::new(&format!("{stem}{i}")))
        .find(|s| used.insert(s.clone()))
        .unwrap()
}

fn reduce(t: &Term) -> Term {
    let Term::App(f, args) = t else { return t.clone() };
    let args: Vec<Term> = args.iter().map(reduce).collect();
    match (f.as_str(), args.as_slice()) {
        ("car", [x]) => {
            if let Some([a, _]) = x.call_of("cons") {
                return a.clone();
            }
        }
        ("cdr", [x]) => {
            if let Some([_, b]) = x.call_of("cons") {
                return b.clone();
            }
        }
        ("consp", [x]) if x.call_of("cons").is_some() => return Term::t(),
        ("not", [x]) if x.is_quote() => return Term::Quote(crate::value::Value::bool(x.as_quote().unwrap().is_nil())),
        _ => {}
    }
    Term::App(f.clone(), args)
}

pub struct Elimination {
    pub clause: Vec<Term>,
    pub var: Symbol,
    pub car: Symbol,
    pub cdr: Symbol,
}

impl Elimination {
    pub fn constructor(&self) -> Term {
        Term::app("cons", vec![Term::Var(self.car.clone()), Term::Var(self.cdr.clone())])
    }
}

/// Picks the first hypothesis `(consp v)` whose variable is taken apart
/// somewhere in the clause and replaces `v` by `(cons v1 v2)`.
pub fn eliminate_destructors(clause: &[Term], used: &mut BTreeSet<Symbol>) -> Option<Elimination> {
    let var = clause.iter().find_map(|l| {
        let v = l.negated()?.call_of("consp")?.first()?.as_var()?;
        let taken_apart = clause.iter().any(|m| {
            m.subterms().iter().any(|s| {
                (s.call_of("car").is_some() || s.call_of("cdr").is_some())
                    && s.call_of("car").or(s.call_of("cdr")).and_then(|a| a[0].as_var()) == Some(v)
            })
        });
        taken_apart.then(|| v.clone())
    })?;
    let car = fresh_numbered(var.as_str(), used);
    let cdr = fresh_numbered(var.as_str(), used);
    let cons = Term::app("cons", vec![Term::Var(car.clone()), Term::Var(cdr.clone())]);
    let out: Vec<Term> = clause
        .iter()
        .map(|l| reduce(&l.substitute_one(&var, &cons)))
        .filter(|l| l.as_quote().is_none_or(|v| !v.is_nil()))
        .collect();
    Some(Elimination { clause: out, var, car, cdr })
}

/// Restrictions for the two halves of a value known to satisfy `r`.
pub fn component_restrictions(world: &World, r: &Restriction) -> (Restriction, Restriction) {
    let expr = match r.expr() {
        TypeExpr::Named(n) => match world.types().get(&n) {
            Some(e) => e.expr.clone(),
            None => return (Restriction::all(), Restriction::all()),
        },
        e => e,
    };
    match expr {
        TypeExpr::Cons(a, b) => (Restriction::from_expr(&a), Restriction::from_expr(&b)),
        TypeExpr::ListOf(e) => (Restriction::from_expr(&e), r.clone()),
        TypeExpr::Base(BaseType::ProperCons) | TypeExpr::Base(BaseType::TrueList) => {
            (Restriction::all(), Restriction::named("true-list"))
        }
        _ => (Restriction::all(), Restriction::all()),
    }
}
