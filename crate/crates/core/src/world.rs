//! The logical database: definitions, rewrite rules, types and settings.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::datadef::{self, SubtypeGraph, TypeExpr, TypeTable};
use crate::error::{AdmitError, EvalError};
use crate::eval::Prim;
use crate::term::Term;
use crate::testgen::TestConfig;
use crate::value::{Symbol, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct FunDef {
    pub name: Symbol,
    pub formals: Vec<Symbol>,
    pub body: Term,
    pub recursive: bool,
}

/// Conditional rewrite rule `hyps -> (lhs = rhs)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub name: Symbol,
    pub hyps: Vec<Term>,
    pub lhs: Term,
    pub rhs: Term,
    pub enabled: bool,
    /// Rules stated as a bare predicate rewrite it to `t` only where
    /// truth value is all that matters.
    pub iff_only: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub depth_cap: usize,
    pub rewrite_depth: usize,
    pub rewrite_budget: usize,
    pub subtype_evidence: u64,
    pub testing: TestConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            depth_cap: 10_000,
            rewrite_depth: 8,
            rewrite_budget: 10_000,
            subtype_evidence: 1000,
            testing: TestConfig::default(),
        }
    }
}

/// Surface names the term reader expands away; defining them would
/// produce functions that can never be called.
const RESERVED: &[&str] = &[
    "quote", "cond", "list", "first", "second", "third", "fourth", "fifth", "rest", "null", "atom", "endp", "-",
    "/", ">", "<=", ">=", "=", "/=", "eq", "eql", "real/rationalp", "acl2-numberp",
];

fn is_cxr(name: &str) -> bool {
    name.len() >= 4
        && name.len() <= 6
        && name.starts_with('c')
        && name.ends_with('r')
        && name[1..name.len() - 1].bytes().all(|b| b == b'a' || b == b'd')
}

#[derive(Clone, Debug)]
pub struct World {
    functions: BTreeMap<Symbol, Arc<FunDef>>,
    rules: Vec<Arc<Rule>>,
    types: TypeTable,
    subtypes: SubtypeGraph,
    settings: Settings,
}

impl Default for World {
    fn default() -> Self {
        World::new()
    }
}

impl World {
    pub fn new() -> World {
        let types = TypeTable::with_base_types();
        let mut subtypes = SubtypeGraph::new();
        for e in types.entries() {
            subtypes.add_vertex(&e.name);
        }
        for (a, b) in [
            ("pos", "nat"),
            ("nat", "integer"),
            ("neg", "integer"),
            ("integer", "rational"),
            ("boolean", "symbol"),
            ("proper-cons", "true-list"),
        ] {
            subtypes.add_edge(&Symbol::new(a), &Symbol::new(b));
        }
        World { functions: BTreeMap::new(), rules: Vec::new(), types, subtypes, settings: Settings::default() }
    }

    pub fn function(&self, f: &Symbol) -> Option<&FunDef> {
        self.functions.get(f).map(|d| &**d)
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunDef> {
        self.functions.values().map(|d| &**d)
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().map(|r| &**r)
    }

    pub fn rule(&self, name: &Symbol) -> Option<&Rule> {
        self.rules().find(|r| &r.name == name)
    }

    pub fn types(&self) -> &TypeTable {
        &self.types
    }

    pub fn subtypes(&self) -> &SubtypeGraph {
        &self.subtypes
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn settings_mut(&mut self) -> &mut Settings {
        &mut self.settings
    }

    /// Whether `f` names something callable (or reserved surface syntax).
    pub fn is_function_name(&self, f: &Symbol) -> bool {
        self.arity(f).is_some() || RESERVED.contains(&f.as_str()) || is_cxr(f.as_str())
    }

    pub fn arity(&self, f: &Symbol) -> Option<usize> {
        if let Some(p) = Prim::from_name(f.as_str()) {
            return Some(p.arity());
        }
        if let Some(d) = self.functions.get(f) {
            return Some(d.formals.len());
        }
        if self.types.type_of_recognizer(f).is_some() || self.types.type_of_enumerator(f).is_some() {
            return Some(1);
        }
        None
    }

    /// Checks that `term` only calls known functions with the right arity
    /// and, when `vars` is given, only mentions those variables.
    pub fn check_term(
        &self,
        term: &Term,
        context: &Symbol,
        vars: Option<&BTreeSet<Symbol>>,
        self_call: Option<(&Symbol, usize)>,
    ) -> Result<(), AdmitError> {
        match term {
            Term::Var(v) => match vars {
                Some(vs) if !vs.contains(v) => {
                    Err(AdmitError::UnboundVariable { variable: v.clone(), context: context.clone() })
                }
                _ => Ok(()),
            },
            Term::Quote(_) => Ok(()),
            Term::App(f, args) => {
                let expected = match self_call {
                    Some((n, k)) if n == f => Some(k),
                    _ => self.arity(f),
                };
                let Some(expected) = expected else {
                    return Err(AdmitError::UnknownFunction { function: f.clone(), context: context.clone() });
                };
                if expected != args.len() {
                    return Err(AdmitError::Arity {
                        function: f.clone(),
                        expected,
                        got: args.len(),
                        context: context.clone(),
                    });
                }
                args.iter().try_for_each(|a| self.check_term(a, context, vars, self_call))
            }
        }
    }

    pub fn define_function(&mut self, name: Symbol, formals: Vec<Symbol>, body: Term) -> Result<(), AdmitError> {
        if self.is_function_name(&name) {
            return Err(AdmitError::Redefinition(name));
        }
        let mut seen = BTreeSet::new();
        for f in &formals {
            if f.is_constant() || !seen.insert(f.clone()) {
                return Err(AdmitError::BadRule { rule: name, message: format!("bad formal parameter {f}") });
            }
        }
        self.check_term(&body, &name, Some(&seen), Some((&name, formals.len())))?;
        let mut called = BTreeSet::new();
        body.function_symbols(&mut called);
        let recursive = called.contains(&name);
        self.functions.insert(name.clone(), Arc::new(FunDef { name, formals, body, recursive }));
        Ok(())
    }

    /// Admits a rewrite rule from a formula of the shape
    /// `(implies hyps (equal lhs rhs))`, `(implies hyps (not p))` or
    /// `(implies hyps p)`.
    pub fn add_rule(&mut self, name: Symbol, formula: &Term, enabled: bool) -> Result<(), AdmitError> {
        if self.rules.iter().any(|r| r.name == name) {
            return Err(AdmitError::Redefinition(name));
        }
        self.check_term(formula, &name, None, None)?;
        let bad = |msg: &str| AdmitError::BadRule { rule: name.clone(), message: msg.to_string() };
        let mut hyps = Vec::new();
        let mut concl = formula.clone();
        while let Some([h, c]) = concl.call_of("implies") {
            flatten_and(h, &mut hyps);
            concl = c.clone();
        }
        let (lhs, rhs, iff_only) = if let Some([l, r]) = concl.call_of("equal") {
            (l.clone(), r.clone(), false)
        } else if let Some(p) = concl.negated() {
            (p.clone(), Term::nil(), false)
        } else {
            (concl.clone(), Term::t(), true)
        };
        match &lhs {
            Term::App(f, _) if !Prim::from_name(f.as_str()).is_some_and(Prim::is_control) => {}
            _ => return Err(bad("left-hand side must be a function application")),
        }
        let bound = lhs.free_vars();
        if !rhs.free_vars().is_subset(&bound) || hyps.iter().any(|h| !h.free_vars().is_subset(&bound)) {
            return Err(bad("variables of the hypotheses and right-hand side must occur in the left-hand side"));
        }
        self.rules.push(Arc::new(Rule { name, hyps, lhs, rhs, enabled, iff_only }));
        Ok(())
    }

    pub fn set_rule_enabled(&mut self, name: &Symbol, enabled: bool) -> bool {
        match self.rules.iter_mut().find(|r| &r.name == name) {
            Some(r) => {
                Arc::make_mut(r).enabled = enabled;
                true
            }
            None => false,
        }
    }

    /// Registers a group of (possibly mutually recursive) data definitions.
    pub fn define_types(&mut self, group: Vec<(Symbol, TypeExpr)>) -> Result<(), AdmitError> {
        let prepared = datadef::prepare_group(self, &group)?;
        for e in prepared.entries {
            self.subtypes.add_vertex(&e.name);
            self.types.insert(e);
        }
        for (a, b) in prepared.edges {
            self.subtypes.add_edge(&a, &b);
        }
        Ok(())
    }

    /// Adds `sub -> sup` after checking the first enumerated values of
    /// `sub` against the recognizer of `sup` (unless `trust`).
    pub fn add_subtype_edge(&mut self, sub: &Symbol, sup: &Symbol, trust: bool) -> Result<(), AdmitError> {
        for t in [sub, sup] {
            if !self.types.contains(t) {
                return Err(AdmitError::UnknownType(t.clone()));
            }
        }
        if !trust {
            for index in 0..self.settings.subtype_evidence {
                let value = self.enumerate(sub, index)?;
                if !self.recognize(sup, &value)? {
                    return Err(AdmitError::SubtypeEvidence { sub: sub.clone(), sup: sup.clone(), index, value });
                }
            }
        }
        self.subtypes.add_edge(sub, sup);
        Ok(())
    }

    pub fn recognize(&self, ty: &Symbol, v: &Value) -> Result<bool, EvalError> {
        let e = self.types.get(ty).ok_or_else(|| EvalError::UnknownType(ty.clone()))?;
        datadef::recognize_expr(self, &e.expr, v)
    }

    pub fn enumerate(&self, ty: &Symbol, n: u64) -> Result<Value, EvalError> {
        let e = self.types.get(ty).ok_or_else(|| EvalError::UnknownType(ty.clone()))?;
        datadef::enumerate_expr(self, &e.expr, n)
    }

    /// One-step unfolding of a call to a non-recursive definition or to the
    /// recognizer of a non-recursive structural type.
    pub fn expand_call(&self, f: &Symbol, args: &[Term]) -> Option<Term> {
        if let Some(def) = self.function(f) {
            if def.recursive || def.formals.len() != args.len() {
                return None;
            }
            let map: BTreeMap<Symbol, Term> = def.formals.iter().cloned().zip(args.iter().cloned()).collect();
            return Some(def.body.substitute(&map));
        }
        if args.len() != 1 || Prim::from_name(f.as_str()).is_some() {
            return None;
        }
        let ty = self.types.type_of_recognizer(f)?;
        let entry = self.types.get(&ty)?;
        if entry.recursive {
            return None;
        }
        self.types.recognizer_term(&entry.expr, &args[0])
    }
}

pub fn flatten_and(t: &Term, out: &mut Vec<Term>) {
    match t.call_of("and") {
        Some([a, b]) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        _ if *t == Term::t() => {}
        _ => out.push(t.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, Binding};
    use crate::term::parse_term;

    fn defun(w: &mut World, name: &str, formals: &[&str], body: &str) -> Result<(), AdmitError> {
        w.define_function(
            Symbol::new(name),
            formals.iter().map(|f| Symbol::new(f)).collect(),
            parse_term(body).unwrap(),
        )
    }

    fn eval(w: &World, src: &str) -> Result<Value, EvalError> {
        evaluate(&parse_term(src).unwrap(), &Binding::new(), w)
    }

    #[test]
    fn identity_and_redefinition() {
        let mut w = World::new();
        defun(&mut w, "id", &["x"], "x").unwrap();
        assert_eq!(eval(&w, "(id 5)").unwrap(), Value::int(5));
        assert_eq!(defun(&mut w, "id", &["y"], "y"), Err(AdmitError::Redefinition(Symbol::new("id"))));
        assert!(defun(&mut w, "car", &["y"], "y").is_err());
        assert!(defun(&mut w, "natp", &["y"], "y").is_err());
    }

    #[test]
    fn body_checks() {
        let mut w = World::new();
        let e = defun(&mut w, "f", &["x"], "(g x)").unwrap_err();
        assert_eq!(e, AdmitError::UnknownFunction { function: Symbol::new("g"), context: Symbol::new("f") });
        let e = defun(&mut w, "f", &["x"], "(cons x y)").unwrap_err();
        assert!(matches!(e, AdmitError::UnboundVariable { .. }));
    }

    #[test]
    fn loop_hits_depth_cap() {
        let mut w = World::new();
        w.settings_mut().depth_cap = 500;
        defun(&mut w, "loop", &["x"], "(loop x)").unwrap();
        assert!(matches!(eval(&w, "(loop 1)"), Err(EvalError::DepthExceeded { .. })));
    }

    #[test]
    fn deep_recursion_within_cap() {
        let mut w = World::new();
        defun(&mut w, "count", &["n"], "(if (zp n) 0 (+ 1 (count (- n 1))))").unwrap_err();
        defun(&mut w, "count", &["n"], "(if (< 0 n) (+ 1 (count (- n 1))) 0)").unwrap();
        assert_eq!(eval(&w, "(count 9000)").unwrap(), Value::int(9000));
    }

    #[test]
    fn rule_shapes() {
        let mut w = World::new();
        w.add_rule(Symbol::new("r1"), &parse_term("(implies (posp x) (natp x))").unwrap(), true).unwrap();
        let r = w.rule(&Symbol::new("r1")).unwrap();
        assert!(r.iff_only);
        assert_eq!(r.hyps, vec![parse_term("(posp x)").unwrap()]);
        w.add_rule(Symbol::new("r2"), &parse_term("(equal (car (cons a b)) a)").unwrap(), true).unwrap();
        let e = w.add_rule(Symbol::new("r3"), &parse_term("(equal x (car x))").unwrap(), true).unwrap_err();
        assert!(matches!(e, AdmitError::BadRule { .. }));
        let e = w.add_rule(Symbol::new("r4"), &parse_term("(equal (car x) y)").unwrap(), true).unwrap_err();
        assert!(matches!(e, AdmitError::BadRule { .. }));
    }

    #[test]
    fn subtype_evidence() {
        let mut w = World::new();
        let e = w.add_subtype_edge(&Symbol::new("integer"), &Symbol::new("nat"), false).unwrap_err();
        assert_eq!(
            e,
            AdmitError::SubtypeEvidence {
                sub: Symbol::new("integer"),
                sup: Symbol::new("nat"),
                index: 1,
                value: Value::int(-1)
            }
        );
        w.add_subtype_edge(&Symbol::new("nat"), &Symbol::new("nat"), false).unwrap();
    }
}
