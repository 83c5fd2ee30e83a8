//! The simplify process: contextual rewriting of each literal under the
//! negation of the others, equality substitution and clause cleanup.

use std::collections::{BTreeMap, BTreeSet};

use crate::eval::{evaluate, Binding, Prim};
use crate::term::Term;
use crate::value::{Symbol, Value};
use crate::world::World;

use super::clausify::normalize;

/// Facts assumed while rewriting.
#[derive(Clone, Debug, Default)]
pub struct Context {
    truths: BTreeSet<Term>,
    falsehoods: BTreeSet<Term>,
}

impl Context {
    pub fn assume(&mut self, t: &Term) {
        if t.is_quote() {
            return;
        }
        if let Some(x) = t.negated() {
            self.deny(x);
        } else if let Some([a, b]) = t.call_of("and") {
            self.assume(a);
            self.assume(b);
        } else {
            self.truths.insert(t.clone());
        }
    }

    pub fn deny(&mut self, t: &Term) {
        if t.is_quote() {
            return;
        }
        if let Some(x) = t.negated() {
            self.assume(x);
        } else if let Some([a, b]) = t.call_of("or") {
            self.deny(a);
            self.deny(b);
        } else if let Some([a, b]) = t.call_of("implies") {
            self.assume(a);
            self.deny(b);
        } else {
            self.falsehoods.insert(t.clone());
        }
    }

    fn lookup(&self, t: &Term) -> Option<bool> {
        let flipped = match t.call_of("equal") {
            Some([a, b]) => Some(Term::app("equal", vec![b.clone(), a.clone()])),
            _ => None,
        };
        for c in std::iter::once(t).chain(flipped.as_ref()) {
            if self.truths.contains(c) {
                return Some(true);
            }
            if self.falsehoods.contains(c) {
                return Some(false);
            }
        }
        None
    }
}

/// Whether `t` always evaluates to `t` or `nil`.
pub fn is_boolean(world: &World, t: &Term) -> bool {
    match t {
        Term::Quote(v) => v.is_nil() || *v == Value::t(),
        Term::Var(_) => false,
        Term::App(f, _) => match Prim::from_name(f.as_str()) {
            Some(p) => matches!(
                p,
                Prim::Equal
                    | Prim::Not
                    | Prim::Implies
                    | Prim::Less
                    | Prim::Consp
                    | Prim::Natp
                    | Prim::Posp
                    | Prim::Negp
                    | Prim::Integerp
                    | Prim::Rationalp
                    | Prim::Booleanp
                    | Prim::Symbolp
                    | Prim::Stringp
                    | Prim::Characterp
                    | Prim::TrueListp
            ),
            None => world.types().type_of_recognizer(f).is_some(),
        },
    }
}

/// One-way matching of a rule pattern against a term.
pub fn match_pattern(pat: &Term, t: &Term, s: &mut BTreeMap<Symbol, Term>) -> bool {
    match (pat, t) {
        (Term::Var(v), _) => match s.get(v) {
            Some(bound) => bound == t,
            None => {
                s.insert(v.clone(), t.clone());
                true
            }
        },
        (Term::Quote(a), Term::Quote(b)) => a == b,
        (Term::App(f, ps), Term::App(g, ts)) => {
            f == g && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, x)| match_pattern(p, x, s))
        }
        _ => false,
    }
}

/// Local cons/equality identities that need no rules.
fn prim_simplify(t: Term) -> Term {
    let Term::App(f, args) = &t else { return t };
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
        ("equal", [a, b]) => {
            if a == b {
                return Term::t();
            }
            if a.is_quote() && !b.is_quote() {
                return Term::app("equal", vec![b.clone(), a.clone()]);
            }
            if let (Some(_), Term::Quote(v)) = (a.call_of("cons"), b) {
                if !v.is_cons() {
                    return Term::nil();
                }
            }
        }
        _ => {}
    }
    t
}

pub struct Rewriter<'w> {
    world: &'w World,
    max_depth: usize,
    budget: usize,
    /// Set when the depth bound or the step budget stopped a rewrite.
    pub exhausted: Option<String>,
}

impl<'w> Rewriter<'w> {
    pub fn new(world: &'w World, max_depth: usize, budget: usize) -> Self {
        Rewriter { world, max_depth, budget, exhausted: None }
    }

    fn spend(&mut self, depth: usize) -> bool {
        if depth >= self.max_depth {
            self.exhausted.get_or_insert_with(|| format!("rewrite depth {} reached", self.max_depth));
            return false;
        }
        if self.budget == 0 {
            self.exhausted.get_or_insert_with(|| "rewrite budget exhausted".to_string());
            return false;
        }
        self.budget -= 1;
        true
    }

    /// Rewrites `t` under `ctx`. With `iff` set only the truth value of the
    /// result has to be preserved.
    pub fn rewrite(&mut self, t: &Term, ctx: &Context, iff: bool, depth: usize) -> Term {
        let Term::App(f, args) = t else {
            return match ctx.lookup(t) {
                Some(false) => Term::nil(),
                Some(true) if iff => Term::t(),
                _ => t.clone(),
            };
        };
        match (f.as_str(), args.as_slice()) {
            ("if", [p, q, r]) => self.rewrite_if(p, q, r, ctx, iff, depth),
            ("and", [a, b]) => {
                let a = self.rewrite(a, ctx, true, depth);
                match a.as_quote() {
                    Some(v) if v.is_nil() => return Term::nil(),
                    Some(_) => return self.rewrite(b, ctx, iff, depth),
                    None => {}
                }
                let mut inner = ctx.clone();
                inner.assume(&a);
                let b = self.rewrite(b, &inner, iff, depth);
                match b.as_quote() {
                    Some(v) if v.is_nil() => Term::nil(),
                    Some(_) if iff => a,
                    _ => Term::app("and", vec![a, b]),
                }
            }
            ("or", [a, b]) => {
                let a = self.rewrite(a, ctx, iff, depth);
                match a.as_quote() {
                    Some(v) if v.is_nil() => return self.rewrite(b, ctx, iff, depth),
                    Some(_) => return a,
                    None => {}
                }
                let mut inner = ctx.clone();
                inner.deny(&a);
                let b = self.rewrite(b, &inner, iff, depth);
                match b.as_quote() {
                    Some(v) if v.is_nil() && (iff || is_boolean(self.world, &a)) => a,
                    Some(_) if iff && !b.as_quote().unwrap().is_nil() => Term::t(),
                    _ => Term::app("or", vec![a, b]),
                }
            }
            ("implies", [a, b]) => {
                let a = self.rewrite(a, ctx, true, depth);
                if a.as_quote().is_some_and(Value::is_nil) {
                    return Term::t();
                }
                let mut inner = ctx.clone();
                inner.assume(&a);
                let b = self.rewrite(b, &inner, true, depth);
                match (a.as_quote(), b.as_quote()) {
                    (_, Some(v)) if !v.is_nil() => Term::t(),
                    (Some(_), Some(_)) => Term::nil(),
                    (_, Some(_)) => self.rewrite(&Term::not(a), ctx, iff, depth),
                    _ => Term::app("implies", vec![a, b]),
                }
            }
            ("not", [a]) => {
                let a = self.rewrite(a, ctx, true, depth);
                if let Some(v) = a.as_quote() {
                    return Term::Quote(Value::bool(v.is_nil()));
                }
                match a.negated() {
                    Some(y) if iff || is_boolean(self.world, y) => y.clone(),
                    _ => Term::not(a),
                }
            }
            _ => {
                let args: Vec<Term> = args.iter().map(|a| self.rewrite(a, ctx, false, depth)).collect();
                let t = prim_simplify(Term::App(f.clone(), args));
                self.rewrite_call(t, ctx, iff, depth)
            }
        }
    }

    fn rewrite_if(&mut self, p: &Term, q: &Term, r: &Term, ctx: &Context, iff: bool, depth: usize) -> Term {
        let p = self.rewrite(p, ctx, true, depth);
        if let Some(v) = p.as_quote() {
            return if v.is_nil() { self.rewrite(r, ctx, iff, depth) } else { self.rewrite(q, ctx, iff, depth) };
        }
        let mut yes = ctx.clone();
        yes.assume(&p);
        let mut no = ctx.clone();
        no.deny(&p);
        let q = self.rewrite(q, &yes, iff, depth);
        let r = self.rewrite(r, &no, iff, depth);
        if q == r {
            return q;
        }
        let boolean = iff || is_boolean(self.world, &p);
        if boolean && q == Term::t() && r == Term::nil() {
            return p;
        }
        if q == Term::nil() && r == Term::t() {
            return self.rewrite(&Term::not(p), ctx, iff, depth);
        }
        Term::app("if", vec![p, q, r])
    }

    fn rewrite_call(&mut self, t: Term, ctx: &Context, iff: bool, depth: usize) -> Term {
        let Term::App(f, args) = &t else { return t };
        let boolean = iff || is_boolean(self.world, &t);
        match ctx.lookup(&t) {
            Some(false) => return Term::nil(),
            Some(true) if boolean => return Term::t(),
            _ => {}
        }
        if args.iter().all(Term::is_quote) {
            if let Ok(v) = evaluate(&t, &Binding::new(), self.world) {
                return Term::Quote(v);
            }
        }
        let world = self.world;
        for rule in world.rules() {
            if !rule.enabled || (rule.iff_only && !boolean) {
                continue;
            }
            let mut s = BTreeMap::new();
            if !match_pattern(&rule.lhs, &t, &mut s) {
                continue;
            }
            if !self.spend(depth) {
                return t;
            }
            let relieved = rule.hyps.iter().all(|h| {
                let h = h.substitute(&s);
                let r = self.rewrite(&h, ctx, true, depth + 1);
                r.as_quote().is_some_and(Value::is_true)
            });
            if relieved {
                return self.rewrite(&rule.rhs.substitute(&s), ctx, iff, depth + 1);
            }
        }
        if let Some(body) = world.expand_call(f, args) {
            if !self.spend(depth) {
                return t;
            }
            return self.rewrite(&body, ctx, iff, depth + 1);
        }
        t
    }
}

/// Result of simplifying one clause.
#[derive(Clone, Debug, PartialEq)]
pub enum Simplified {
    Unchanged(Option<String>),
    /// Each child with the substitutions applied on the way, as a map from
    /// eliminated parent variables to terms over the child's variables.
    Children(Vec<(Vec<Term>, BTreeMap<Symbol, Term>)>),
}

fn var_rank(v: &Symbol) -> (usize, &str) {
    (v.as_str().len(), v.as_str())
}

/// The hypothesis `(equal v term)` to eliminate next: variable-variable
/// equations first (dropping the later name), then constants, then terms.
fn find_substitution(lits: &[Term]) -> Option<(usize, Symbol, Term)> {
    let mut best: Option<(u8, usize, Symbol, Term)> = None;
    for (i, l) in lits.iter().enumerate() {
        let Some([a, b]) = l.negated().and_then(|x| x.call_of("equal")) else { continue };
        let cand = match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let (keep, drop) = if var_rank(x) <= var_rank(y) { (x, y) } else { (y, x) };
                Some((0, drop.clone(), Term::Var(keep.clone())))
            }
            (Term::Var(x), Term::Quote(_)) => Some((1, x.clone(), b.clone())),
            (Term::Quote(_), Term::Var(y)) => Some((1, y.clone(), a.clone())),
            (Term::Var(x), _) if !b.mentions(x) => Some((2, x.clone(), b.clone())),
            (_, Term::Var(y)) if !a.mentions(y) => Some((2, y.clone(), a.clone())),
            _ => None,
        };
        if let Some((rank, v, term)) = cand {
            if best.as_ref().is_none_or(|b| rank < b.0) {
                best = Some((rank, i, v, term));
            }
        }
    }
    best.map(|(_, i, v, t)| (i, v, t))
}

const MAX_PASSES: usize = 2000;

/// Runs the simplifier on a clause to a fixpoint.
pub fn simplify_clause(clause: &[Term], world: &World, max_depth: usize, budget: usize) -> Simplified {
    let mut rw = Rewriter::new(world, max_depth, budget);
    let mut work: Vec<(Vec<Term>, BTreeMap<Symbol, Term>)> = vec![(clause.to_vec(), BTreeMap::new())];
    let mut out = Vec::new();
    let mut passes = 0;
    while let Some((lits, subst)) = work.pop() {
        passes += 1;
        if passes > MAX_PASSES {
            return Simplified::Unchanged(Some("simplification did not reach a fixpoint".to_string()));
        }
        let parts = normalize(&lits);
        if parts.len() != 1 || parts[0] != lits {
            work.extend(parts.into_iter().rev().map(|p| (p, subst.clone())));
            continue;
        }
        let mut cur = lits;
        let mut changed = false;
        for i in 0..cur.len() {
            let mut ctx = Context::default();
            for (j, l) in cur.iter().enumerate() {
                if j != i {
                    ctx.deny(l);
                }
            }
            let new = rw.rewrite(&cur[i], &ctx, true, 0);
            if let Some(why) = rw.exhausted.take() {
                return Simplified::Unchanged(Some(why));
            }
            if new != cur[i] {
                cur[i] = new;
                changed = true;
            }
        }
        if changed {
            work.push((cur, subst));
            continue;
        }
        if let Some((i, v, term)) = find_substitution(&cur) {
            cur.remove(i);
            let cur: Vec<Term> = cur.iter().map(|l| l.substitute_one(&v, &term)).collect();
            let mut subst: BTreeMap<Symbol, Term> =
                subst.into_iter().map(|(k, t)| (k, t.substitute_one(&v, &term))).collect();
            subst.insert(v, term);
            work.push((cur, subst));
            continue;
        }
        out.push((cur, subst));
    }
    if out.len() == 1 && out[0].0 == clause && out[0].1.is_empty() {
        Simplified::Unchanged(None)
    } else {
        Simplified::Children(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn simp(w: &World, src: &str) -> Simplified {
        let cs = super::super::clausify::clausify(&t(src));
        assert_eq!(cs.len(), 1);
        simplify_clause(&cs[0], w, 8, 10_000)
    }

    #[test]
    fn complementary_literals_prove() {
        let w = World::new();
        let r = simplify_clause(&[t("p"), t("(not p)")], &w, 8, 100);
        assert_eq!(r, Simplified::Children(vec![]));
    }

    #[test]
    fn equality_hypothesis_is_substituted() {
        let w = World::new();
        assert_eq!(simp(&w, "(implies (equal x 42) (natp x))"), Simplified::Children(vec![]));
        match simp(&w, "(implies (and (equal x y) (natp y)) (natp (+ x 1)))") {
            Simplified::Children(cs) => {
                assert_eq!(cs.len(), 1);
                assert_eq!(cs[0].1[&Symbol::new("y")], t("x"));
                assert!(!cs[0].0.iter().any(|l| l.mentions(&Symbol::new("y"))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rules_fire_with_relieved_hypotheses() {
        let mut w = World::new();
        w.add_rule(Symbol::new("posp-natp"), &t("(implies (posp x) (natp x))"), true).unwrap();
        assert_eq!(simp(&w, "(implies (posp n) (natp n))"), Simplified::Children(vec![]));
        assert_eq!(simp(&w, "(implies (natp n) (posp n))"), Simplified::Unchanged(None));
    }

    #[test]
    fn cancellation_then_substitution() {
        let mut w = World::new();
        w.add_rule(Symbol::new("posp-rationalp"), &t("(implies (posp x) (rationalp x))"), true).unwrap();
        w.add_rule(Symbol::new("posp-not-zero"), &t("(implies (posp x) (not (equal x 0)))"), true).unwrap();
        w.add_rule(
            Symbol::new("cancel"),
            &t("(implies (and (rationalp x) (not (equal x 0))) (equal (equal x (* y x)) (equal y 1)))"),
            true,
        )
        .unwrap();
        match simp(&w, "(implies (and (posp a) (equal a (* b a))) (equal b 2))") {
            Simplified::Children(cs) => {
                assert_eq!(cs.len(), 1);
                assert_eq!(cs[0].1[&Symbol::new("b")], t("1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonrecursive_definitions_open_in_context() {
        let mut w = World::new();
        w.define_function(Symbol::new("big"), vec![Symbol::new("v")], t("(< 10 v)")).unwrap();
        w.define_function(Symbol::new("label"), vec![Symbol::new("v")], t("(if (big v) \"big\" \"small\")")).unwrap();
        assert_eq!(simp(&w, "(implies (big x) (equal (label x) \"big\"))"), Simplified::Children(vec![]));
    }

    #[test]
    fn budget_exhaustion_is_unchanged() {
        let mut w = World::new();
        w.add_rule(Symbol::new("comm"), &t("(equal (+ x y) (+ y x))"), true).unwrap();
        match simp(&w, "(equal (+ a b) c)") {
            Simplified::Unchanged(Some(_)) => {}
            other => panic!("{other:?}"),
        }
    }
}
