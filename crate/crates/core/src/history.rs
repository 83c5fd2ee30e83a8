//! Goal genealogy: how each goal's variables relate to its parent's, and
//! which type restrictions it carries.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{HistoryError, LiftError};
use crate::eval::{evaluate, Binding};
use crate::hints::Process;
use crate::term::Term;
use crate::testgen::{extract_restrictions, Conjecture, TypeAlist};
use crate::value::{Symbol, Value};
use crate::world::World;

/// What a parent variable becomes in the child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Image {
    Term(Term),
    /// Elided entirely; any value will do.
    DontCare,
}

impl Serialize for Image {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Image::Term(t) => s.serialize_str(&t.to_string()),
            Image::DontCare => s.serialize_str("?"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryNode {
    pub id: String,
    pub parent: Option<String>,
    pub process: Option<Process>,
    pub clause: Vec<Term>,
    /// Parent variable -> expression over this node's variables.
    pub var_map: BTreeMap<Symbol, Image>,
    /// Restrictions given by the process plus those inherited from the parent.
    pub type_map: TypeAlist,
    pub liftable: bool,
}

impl HistoryNode {
    pub fn vars(&self) -> BTreeSet<Symbol> {
        clause_vars(&self.clause)
    }
}

pub fn clause_vars(clause: &[Term]) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for l in clause {
        l.collect_vars(&mut out);
    }
    out
}

/// A binding lifted to some ancestor; `dont_care` names variables whose
/// value came entirely from a `?`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lifted {
    pub binding: Binding,
    pub dont_care: BTreeSet<Symbol>,
    /// Whether any `?` was instantiated along the way.
    pub used_dont_care: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct History {
    nodes: Vec<HistoryNode>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Option<&HistoryNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn nodes(&self) -> &[HistoryNode] {
        &self.nodes
    }

    fn push(&mut self, node: HistoryNode) -> Result<(), HistoryError> {
        if self.index.contains_key(&node.id) {
            return Err(HistoryError::DuplicateGoal(node.id));
        }
        self.index.insert(node.id.clone(), self.nodes.len());
        self.nodes.push(node);
        Ok(())
    }

    pub fn record_root(&mut self, id: &str, clause: Vec<Term>, type_map: TypeAlist) -> Result<(), HistoryError> {
        self.push(HistoryNode {
            id: id.to_string(),
            parent: None,
            process: None,
            clause,
            var_map: BTreeMap::new(),
            type_map,
            liftable: true,
        })
    }

    /// Builds, without storing, the node a child would get. Parent
    /// variables missing from `var_map` become `?`; restrictions of each
    /// parent variable flow to the child variable it maps to.
    pub fn preview(
        &self,
        world: &World,
        parent: &str,
        id: &str,
        process: Process,
        clause: Vec<Term>,
        mut var_map: BTreeMap<Symbol, Image>,
        type_map: TypeAlist,
    ) -> Result<HistoryNode, HistoryError> {
        let pnode = self.get(parent).ok_or_else(|| HistoryError::UnknownGoal(parent.to_string()))?;
        let palist = self.accumulated(world, parent)?;
        for v in pnode.vars() {
            var_map.entry(v).or_insert(Image::DontCare);
        }
        let child_vars = clause_vars(&clause);
        let mut merged = type_map;
        for (p, img) in &var_map {
            if let Image::Term(Term::Var(c)) = img {
                if child_vars.contains(c) {
                    for r in palist.get(p) {
                        merged.push(c, r.clone());
                    }
                }
            }
        }
        let merged = TypeAlist(merged.0.into_iter().filter(|(v, _)| child_vars.contains(v)).collect());
        Ok(HistoryNode {
            id: id.to_string(),
            parent: Some(parent.to_string()),
            process: Some(process),
            clause,
            var_map,
            type_map: merged,
            liftable: process != Process::Generalize,
        })
    }

    pub fn record(&mut self, node: HistoryNode) -> Result<(), HistoryError> {
        if let Some(p) = &node.parent {
            if self.get(p).is_none() {
                return Err(HistoryError::UnknownGoal(p.clone()));
            }
        }
        self.push(node)
    }

    /// Restrictions extracted from the goal itself, then inherited ones.
    pub fn accumulated(&self, world: &World, id: &str) -> Result<TypeAlist, HistoryError> {
        let node = self.get(id).ok_or_else(|| HistoryError::UnknownGoal(id.to_string()))?;
        Ok(node_alist(world, node))
    }

    /// Translates an assignment for `id`'s variables into one for the root.
    /// `dont_care(goal, var)` supplies values for `?` images, keyed by the
    /// goal whose parent variable was elided.
    pub fn lift(
        &self,
        world: &World,
        id: &str,
        assignment: &Binding,
        mut dont_care: impl FnMut(&str, &Symbol) -> Value,
    ) -> Result<Lifted, LiftError> {
        let mut node = self.get(id).ok_or_else(|| LiftError::UnknownGoal(id.to_string()))?;
        let mut cur = assignment.clone();
        let mut pure: BTreeSet<Symbol> = BTreeSet::new();
        let mut used = false;
        while let Some(pid) = &node.parent {
            if !node.liftable {
                return Err(LiftError::NonLiftable(node.id.clone()));
            }
            let mut next = Binding::new();
            let mut next_pure = BTreeSet::new();
            for (p, img) in &node.var_map {
                let value = match img {
                    Image::DontCare => {
                        used = true;
                        next_pure.insert(p.clone());
                        dont_care(&node.id, p)
                    }
                    Image::Term(t) => {
                        let mut env = cur.clone();
                        for v in t.free_vars() {
                            if env.get(&v).is_none() {
                                used = true;
                                env.insert(v.clone(), dont_care(&node.id, &v));
                                if t.as_var() == Some(&v) {
                                    next_pure.insert(p.clone());
                                }
                            } else if t.as_var() == Some(&v) && pure.contains(&v) {
                                next_pure.insert(p.clone());
                            }
                        }
                        evaluate(t, &env, world)?
                    }
                };
                next.insert(p.clone(), value);
            }
            cur = next;
            pure = next_pure;
            node = self.get(pid).ok_or_else(|| LiftError::UnknownGoal(pid.clone()))?;
        }
        Ok(Lifted { binding: cur, dont_care: pure, used_dont_care: used })
    }
}

pub fn node_alist(world: &World, node: &HistoryNode) -> TypeAlist {
    let own = extract_restrictions(&Conjecture::from_clause(&node.clause), world);
    let mut out = TypeAlist::new();
    for (v, rs) in &own.0 {
        for r in rs {
            if !r.is_all() {
                out.push(v, r.clone());
            }
        }
    }
    for (v, rs) in &node.type_map.0 {
        for r in rs {
            out.push(v, r.clone());
        }
    }
    out.restrict_to(&node.vars())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datadef::Restriction;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn s(x: &str) -> Symbol {
        Symbol::new(x)
    }

    fn img(x: &str) -> Image {
        Image::Term(t(x))
    }

    #[test]
    fn destructor_chain_lifts() {
        let w = World::new();
        let mut h = History::new();
        h.record_root("Goal", vec![t("(not (consp x))"), t("(equal (car x) 1)")], TypeAlist::new()).unwrap();
        let n = h
            .preview(
                &w,
                "Goal",
                "Goal'",
                Process::EliminateDestructors,
                vec![t("(equal x1 1)"), t("(equal x2 x2)")],
                BTreeMap::from([(s("x"), img("(cons x1 x2)"))]),
                TypeAlist::new(),
            )
            .unwrap();
        h.record(n).unwrap();
        let b = Binding::from_iter([(s("x1"), Value::int(429)), (s("x2"), Value::nil())]);
        let l = h.lift(&w, "Goal'", &b, |_, _| Value::nil()).unwrap();
        assert_eq!(l.binding.report(), "(X (429))");
        assert!(!l.used_dont_care);
        let root = h.lift(&w, "Goal", &Binding::from_iter([(s("x"), Value::int(3))]), |_, _| Value::nil()).unwrap();
        assert_eq!(root.binding.report(), "(X 3)");
    }

    #[test]
    fn elided_variable_is_dont_care() {
        let w = World::new();
        let mut h = History::new();
        h.record_root("Goal", vec![t("(not (equal x x))"), t("(natp y)")], TypeAlist::new()).unwrap();
        let n = h
            .preview(&w, "Goal", "Goal'", Process::Simplify, vec![t("(natp y)")], BTreeMap::from([(s("y"), img("y"))]), TypeAlist::new())
            .unwrap();
        assert_eq!(n.var_map[&s("x")], Image::DontCare);
        h.record(n).unwrap();
        let l = h.lift(&w, "Goal'", &Binding::from_iter([(s("y"), Value::int(-1))]), |_, _| Value::int(7)).unwrap();
        assert_eq!(l.binding.report(), "(X 7) and (Y -1)");
        assert_eq!(l.dont_care, BTreeSet::from([s("x")]));
    }

    #[test]
    fn generalize_edges_block_lifting() {
        let w = World::new();
        let mut h = History::new();
        h.record_root("Goal", vec![t("(not (< (+ (len x) (len x)) 0))")], TypeAlist::new()).unwrap();
        let n = h
            .preview(&w, "Goal", "Goal'", Process::Generalize, vec![t("(not (< (+ n n) 0))")], BTreeMap::new(), TypeAlist::new())
            .unwrap();
        assert!(!n.liftable);
        h.record(n).unwrap();
        let err = h.lift(&w, "Goal'", &Binding::from_iter([(s("n"), Value::int(-1))]), |_, _| Value::nil());
        assert!(matches!(err, Err(LiftError::NonLiftable(_))));
        let dup = h.preview(&w, "Goal", "Goal'", Process::Simplify, vec![], BTreeMap::new(), TypeAlist::new()).unwrap();
        assert!(matches!(h.record(dup), Err(HistoryError::DuplicateGoal(_))));
    }

    #[test]
    fn restrictions_are_inherited() {
        let w = World::new();
        let mut h = History::new();
        h.record_root("Goal", vec![t("(not (posp x5))"), t("(not (natp x1))"), t("(equal x1 x5)")], TypeAlist::new()).unwrap();
        let n = h
            .preview(
                &w,
                "Goal",
                "Goal'",
                Process::Simplify,
                vec![t("(equal x1 (* 2 x1))")],
                BTreeMap::from([(s("x1"), img("x1")), (s("x5"), img("x1"))]),
                TypeAlist::new(),
            )
            .unwrap();
        h.record(n).unwrap();
        let a = h.accumulated(&w, "Goal'").unwrap();
        assert_eq!(a.get(&s("x1")), [Restriction::named("nat"), Restriction::named("pos")]);
        assert_eq!(h.accumulated(&w, "Goal").unwrap().report(), "((X1 . NAT) (X5 . POS))");
    }
}
