//! Generalization: replace a repeated subterm by a fresh variable.

use std::collections::BTreeSet;

use crate::term::Term;
use crate::value::Symbol;
use crate::world::World;

use super::simplify::is_boolean;

const NAMES: [&str; 5] = ["n", "m", "k", "j", "i"];

pub fn fresh_name(used: &mut BTreeSet<Symbol>) -> Symbol {
    NAMES
        .iter()
        .map(|n| Symbol::new(n))
        .chain((1..).map(|i| Symbol::new(&format!("g{i}"))))
        .find(|s| used.insert(s.clone()))
        .unwrap()
}

fn candidate(world: &World, t: &Term) -> bool {
    match t {
        Term::App(f, _) => {
            !matches!(f.as_str(), "if" | "and" | "or" | "not" | "implies" | "equal")
                && !is_boolean(world, t)
                && !t.free_vars().is_empty()
        }
        _ => false,
    }
}

pub struct Generalization {
    pub clause: Vec<Term>,
    pub var: Symbol,
    pub replaced: Term,
}

/// The largest non-variable subterm occurring at least twice, ties going to
/// the leftmost.
pub fn generalize(clause: &[Term], world: &World, used: &mut BTreeSet<Symbol>) -> Option<Generalization> {
    let occurrences: Vec<&Term> = clause.iter().flat_map(|l| l.subterms()).filter(|s| candidate(world, s)).collect();
    let mut best: Option<&Term> = None;
    for (i, s) in occurrences.iter().enumerate() {
        if occurrences[..i].contains(s) || occurrences.iter().filter(|o| *o == s).count() < 2 {
            continue;
        }
        if best.is_none_or(|b| s.size() > b.size()) {
            best = Some(s);
        }
    }
    let replaced = best?.clone();
    let var = fresh_name(used);
    let v = Term::Var(var.clone());
    let out = clause.iter().map(|l| l.replace(&replaced, &v)).collect();
    Some(Generalization { clause: out, var, replaced })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn repeated_len_becomes_n() {
        let w = World::new();
        let mut used = BTreeSet::from([Symbol::new("x")]);
        let g = generalize(&[t("(not (true-listp x))"), t("(not (< (+ (len x) (len x)) 0))")], &w, &mut used).unwrap();
        assert_eq!(g.replaced, t("(len x)"));
        assert_eq!(g.clause[1], t("(not (< (+ n n) 0))"));
        assert_eq!(g.var, Symbol::new("n"));
    }

    #[test]
    fn distinct_subterms_are_left_alone() {
        let w = World::new();
        let mut used = BTreeSet::new();
        assert!(generalize(&[t("(equal (rev (rev x)) x)")], &w, &mut used).is_none());
    }

    #[test]
    fn largest_wins() {
        let w = World::new();
        let mut used = BTreeSet::from([Symbol::new("n")]);
        let g = generalize(&[t("(< (len (cdr x)) (len (cdr x)))"), t("(natp (cdr x))")], &w, &mut used).unwrap();
        assert_eq!(g.replaced, t("(len (cdr x))"));
        assert_eq!(g.var, Symbol::new("m"));
    }
}
