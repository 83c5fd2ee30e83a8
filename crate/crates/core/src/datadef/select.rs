//! Type restrictions on a variable and selection of the one to sample.

use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;
use crate::value::{report_name, Symbol, Value};
use crate::world::World;

use super::{enumerate_expr, recognize_expr, TypeExpr};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Restriction {
    /// A registered type.
    Type(Symbol),
    /// Exactly one value, from an equality hypothesis.
    Singleton(Value),
    /// A structural type with no registered name, e.g. the element type of
    /// an inline `(listof (list nat nat))`.
    Anon(Arc<TypeExpr>),
}

impl Restriction {
    pub fn all() -> Restriction {
        Restriction::Type(Symbol::new("all"))
    }

    pub fn named(name: &str) -> Restriction {
        Restriction::Type(Symbol::new(name))
    }

    pub fn is_all(&self) -> bool {
        matches!(self, Restriction::Type(t) if t.as_str() == "all")
    }

    /// Wraps a type expression, preferring the named or singleton forms.
    pub fn from_expr(e: &TypeExpr) -> Restriction {
        match e {
            TypeExpr::Named(n) => Restriction::Type(n.clone()),
            TypeExpr::Base(b) => Restriction::named(b.name()),
            TypeExpr::Singleton(v) => Restriction::Singleton(v.clone()),
            other => Restriction::Anon(Arc::new(other.clone())),
        }
    }

    /// Structural view of this restriction.
    pub fn expr(&self) -> TypeExpr {
        match self {
            Restriction::Type(t) => match super::BaseType::from_name(t.as_str()) {
                Some(b) => TypeExpr::Base(b),
                None => TypeExpr::Named(t.clone()),
            },
            Restriction::Singleton(v) => TypeExpr::Singleton(v.clone()),
            Restriction::Anon(e) => (**e).clone(),
        }
    }

    pub fn recognize(&self, world: &World, v: &Value) -> Result<bool, EvalError> {
        match self {
            Restriction::Type(t) => world.recognize(t, v),
            Restriction::Singleton(x) => Ok(x == v),
            Restriction::Anon(e) => recognize_expr(world, e, v),
        }
    }

    pub fn enumerate(&self, world: &World, n: u64) -> Result<Value, EvalError> {
        match self {
            Restriction::Type(t) => world.enumerate(t, n),
            Restriction::Singleton(v) => Ok(v.clone()),
            Restriction::Anon(e) => enumerate_expr(world, e, n),
        }
    }

    /// Report spelling: `POS`, `'42`, `(LISTOF INTEGER)`.
    pub fn report(&self) -> String {
        match self {
            Restriction::Type(t) => report_name(t),
            Restriction::Singleton(v) => {
                if matches!(v, Value::Num(_) | Value::Str(_) | Value::Char(_)) {
                    v.report().to_string()
                } else {
                    format!("'{}", v.report())
                }
            }
            Restriction::Anon(e) => e.report().to_string(),
        }
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::Type(t) => write!(f, "{t}"),
            Restriction::Singleton(v) => write!(f, "'{v}"),
            Restriction::Anon(e) => write!(f, "{e}"),
        }
    }
}

impl serde::Serialize for Restriction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub primary: Restriction,
    /// Further recognizers a sampled value must pass.
    pub residual: Vec<Restriction>,
}

fn contained(world: &World, a: &Restriction, b: &Restriction) -> bool {
    if b.is_all() || a == b {
        return true;
    }
    match (a, b) {
        (Restriction::Singleton(v), _) => b.recognize(world, v).unwrap_or(false),
        (Restriction::Type(x), Restriction::Type(y)) => world.subtypes().is_subtype(x, y),
        _ => false,
    }
}

/// Picks the restriction to sample from: a singleton if there is one,
/// else a restriction contained in all others, else the first one with
/// the rest kept as rejection filters.
pub fn minimal_type(world: &World, restrictions: &[Restriction]) -> Selection {
    if let Some(s) = restrictions.iter().find(|r| matches!(r, Restriction::Singleton(_))) {
        return Selection { primary: s.clone(), residual: Vec::new() };
    }
    let mut rs: Vec<Restriction> = Vec::new();
    for r in restrictions {
        if !rs.contains(r) {
            rs.push(r.clone());
        }
    }
    if rs.len() > 1 {
        rs.retain(|r| !r.is_all());
    }
    let Some(first) = rs.first().cloned() else {
        return Selection { primary: Restriction::all(), residual: Vec::new() };
    };
    let candidates: Vec<&Restriction> = rs
        .iter()
        .filter(|c| rs.iter().all(|o| contained(world, c, o)))
        .collect();
    if let Some(best) = candidates.iter().min_by_key(|c| c.to_string()) {
        return Selection { primary: (*best).clone(), residual: Vec::new() };
    }
    let residual = rs[1..]
        .iter()
        .filter(|o| !contained(world, &first, o))
        .cloned()
        .collect();
    Selection { primary: first, residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: &str) -> Restriction {
        Restriction::named(n)
    }

    #[test]
    fn nat_below_integer() {
        let w = World::new();
        let s = minimal_type(&w, &[r("integer"), r("nat")]);
        assert_eq!(s.primary, r("nat"));
        assert!(s.residual.is_empty());
    }

    #[test]
    fn incomparable_falls_back_to_first() {
        let w = World::new();
        let s = minimal_type(&w, &[r("string"), r("integer")]);
        assert_eq!(s.primary, r("string"));
        assert_eq!(s.residual, vec![r("integer")]);
    }

    #[test]
    fn singleton_wins() {
        let w = World::new();
        let s = minimal_type(&w, &[r("nat"), Restriction::Singleton(Value::int(42))]);
        assert_eq!(s.primary, Restriction::Singleton(Value::int(42)));
        assert_eq!(minimal_type(&w, &[r("all")]).primary, r("all"));
        assert_eq!(minimal_type(&w, &[r("all"), r("pos")]).primary, r("pos"));
    }

    #[test]
    fn report_spelling() {
        assert_eq!(r("pos").report(), "POS");
        assert_eq!(Restriction::Singleton(Value::int(42)).report(), "42");
        assert_eq!(Restriction::Singleton(Value::sym("red")).report(), "'RED");
    }
}
