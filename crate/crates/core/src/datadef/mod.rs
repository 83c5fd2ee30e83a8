//! Data definitions: type expressions compiled into recognizers and
//! surjective enumerators, plus the subtype graph and sampling.

pub mod encoding;
pub mod sample;
pub mod select;
pub mod subtype;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{AdmitError, EvalError, SyntaxError};
use crate::eval::{self, Prim};
use crate::sexp::{Sexp, SexpKind};
use crate::term::Term;
use crate::value::{Symbol, Value};
use crate::world::World;

pub use sample::{Distribution, Sampler, TestRng};
pub use select::{minimal_type, Restriction, Selection};
pub use subtype::SubtypeGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    All,
    Nat,
    Pos,
    Neg,
    Integer,
    Rational,
    Boolean,
    Symbol,
    String,
    Character,
    TrueList,
    ProperCons,
}

impl BaseType {
    pub const ALL: [BaseType; 12] = [
        BaseType::All,
        BaseType::Nat,
        BaseType::Pos,
        BaseType::Neg,
        BaseType::Integer,
        BaseType::Rational,
        BaseType::Boolean,
        BaseType::Symbol,
        BaseType::String,
        BaseType::Character,
        BaseType::TrueList,
        BaseType::ProperCons,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseType::All => "all",
            BaseType::Nat => "nat",
            BaseType::Pos => "pos",
            BaseType::Neg => "neg",
            BaseType::Integer => "integer",
            BaseType::Rational => "rational",
            BaseType::Boolean => "boolean",
            BaseType::Symbol => "symbol",
            BaseType::String => "string",
            BaseType::Character => "character",
            BaseType::TrueList => "true-list",
            BaseType::ProperCons => "proper-cons",
        }
    }

    pub fn from_name(name: &str) -> Option<BaseType> {
        BaseType::ALL.iter().copied().find(|b| b.name() == name)
    }

    /// The built-in predicate deciding membership, when there is one.
    pub fn prim(self) -> Option<Prim> {
        Some(match self {
            BaseType::Nat => Prim::Natp,
            BaseType::Pos => Prim::Posp,
            BaseType::Neg => Prim::Negp,
            BaseType::Integer => Prim::Integerp,
            BaseType::Rational => Prim::Rationalp,
            BaseType::Boolean => Prim::Booleanp,
            BaseType::Symbol => Prim::Symbolp,
            BaseType::String => Prim::Stringp,
            BaseType::Character => Prim::Characterp,
            BaseType::TrueList => Prim::TrueListp,
            BaseType::All | BaseType::ProperCons => return None,
        })
    }

    pub fn contains(self, v: &Value) -> bool {
        match self {
            BaseType::All => true,
            BaseType::ProperCons => v.is_cons() && v.is_true_list(),
            b => b.prim().unwrap().apply(std::slice::from_ref(v)).is_true(),
        }
    }

    pub fn nth(self, n: u64) -> Value {
        use encoding::*;
        match self {
            BaseType::Nat => Value::big_int(BigInt::from(n)),
            BaseType::Pos => Value::big_int(BigInt::from(n) + 1),
            BaseType::Neg => Value::big_int(-(BigInt::from(n) + BigInt::from(1))),
            BaseType::Integer => Value::big_int(zigzag(n)),
            BaseType::Rational => {
                let (i, j) = unpair(n);
                Value::Num(BigRational::new(zigzag(i), BigInt::from(j) + 1))
            }
            BaseType::Boolean => Value::bool(n % 2 == 0),
            BaseType::Character => Value::Char(character(n)),
            BaseType::String => {
                let s: String = list_indices(n).into_iter().map(character).collect();
                Value::string(&s)
            }
            BaseType::Symbol => nth_symbol(n),
            BaseType::All => {
                const BRANCHES: [BaseType; 5] = [
                    BaseType::Integer,
                    BaseType::Symbol,
                    BaseType::String,
                    BaseType::Character,
                    BaseType::Rational,
                ];
                let (k, m) = (n % 7, n / 7);
                match k {
                    0..=4 => BRANCHES[k as usize].nth(m),
                    5 => BaseType::TrueList.nth(m),
                    _ => {
                        let (i, j) = unpair(m);
                        Value::cons(BaseType::All.nth(i), BaseType::All.nth(j))
                    }
                }
            }
            BaseType::TrueList => Value::list(
                list_indices(n)
                    .into_iter()
                    .map(|i| BaseType::All.nth(i))
                    .collect::<Vec<_>>(),
            ),
            BaseType::ProperCons => {
                let (i, j) = unpair(n);
                Value::cons(BaseType::All.nth(i), BaseType::TrueList.nth(j))
            }
        }
    }
}

fn nth_symbol(n: u64) -> Value {
    use encoding::*;
    if n < SYMBOL_ALPHABET.len() as u64 {
        return Value::sym(SYMBOL_ALPHABET[n as usize]);
    }
    let name: String = list_indices(n - SYMBOL_ALPHABET.len() as u64)
        .into_iter()
        .map(character)
        .collect();
    Value::sym(&name)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Base(BaseType),
    Enum(Vec<Value>),
    OneOf(Vec<TypeExpr>),
    Cons(Box<TypeExpr>, Box<TypeExpr>),
    ListOf(Box<TypeExpr>),
    Set(Box<TypeExpr>),
    Record(Symbol, Vec<(Symbol, TypeExpr)>),
    Named(Symbol),
    Singleton(Value),
    Custom { recognizer: Symbol, enumerator: Symbol },
}

impl TypeExpr {
    fn visit_named(&self, f: &mut impl FnMut(&Symbol)) {
        match self {
            TypeExpr::Named(n) => f(n),
            TypeExpr::OneOf(bs) => bs.iter().for_each(|b| b.visit_named(f)),
            TypeExpr::Cons(a, b) => {
                a.visit_named(f);
                b.visit_named(f);
            }
            TypeExpr::ListOf(e) | TypeExpr::Set(e) => e.visit_named(f),
            TypeExpr::Record(_, fields) => fields.iter().for_each(|(_, t)| t.visit_named(f)),
            _ => {}
        }
    }

    /// Named references reachable without going under a constructor.
    fn unguarded_names(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            TypeExpr::Named(n) => {
                out.insert(n.clone());
            }
            TypeExpr::OneOf(bs) => bs.iter().for_each(|b| b.unguarded_names(out)),
            _ => {}
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, report: bool) -> fmt::Result {
        let kw = |s: &str| if report { s.to_uppercase() } else { s.to_string() };
        let name = |s: &Symbol| if report { crate::value::report_name(s) } else { s.to_string() };
        match self {
            TypeExpr::Base(b) => f.write_str(&kw(b.name())),
            TypeExpr::Named(n) => f.write_str(&name(n)),
            TypeExpr::Singleton(v) if report => write!(f, "'{}", v.report()),
            TypeExpr::Enum(vs) if report => write!(f, "(ENUM '{})", Value::list(vs.clone()).report()),
            TypeExpr::Singleton(v) => write!(f, "'{v}"),
            TypeExpr::Enum(vs) => write!(f, "(enum '{})", Value::list(vs.clone())),
            TypeExpr::OneOf(bs) => {
                write!(f, "({}", kw("oneof"))?;
                for b in bs {
                    f.write_str(" ")?;
                    b.write(f, report)?;
                }
                f.write_str(")")
            }
            TypeExpr::Cons(a, b) => {
                write!(f, "({} ", kw("cons"))?;
                a.write(f, report)?;
                f.write_str(" ")?;
                b.write(f, report)?;
                f.write_str(")")
            }
            TypeExpr::ListOf(e) | TypeExpr::Set(e) => {
                let head = if matches!(self, TypeExpr::ListOf(_)) { "listof" } else { "set" };
                write!(f, "({} ", kw(head))?;
                e.write(f, report)?;
                f.write_str(")")
            }
            TypeExpr::Record(n, fields) => {
                write!(f, "({}", name(n))?;
                for (field, t) in fields {
                    write!(f, " ({} . ", name(field))?;
                    t.write(f, report)?;
                    f.write_str(")")?;
                }
                f.write_str(")")
            }
            TypeExpr::Custom { recognizer, enumerator } => {
                write!(f, "({} {} {})", kw("custom"), name(recognizer), name(enumerator))
            }
        }
    }

    pub fn report(&self) -> TypeExprReport<'_> {
        TypeExprReport(self)
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}

pub struct TypeExprReport<'a>(&'a TypeExpr);

impl fmt::Display for TypeExprReport<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write(f, true)
    }
}

fn syntax(s: &Sexp, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::new(s.pos, msg)
}

/// Reads a type expression. `owner` names the enclosing definition, used
/// for `(record ...)` bodies.
pub fn parse_type_expr(s: &Sexp, owner: Option<&str>) -> Result<TypeExpr, SyntaxError> {
    match &s.kind {
        SexpKind::Num(_) | SexpKind::Str(_) | SexpKind::Char(_) => Ok(TypeExpr::Singleton(s.to_value())),
        SexpKind::Sym { name, barred } => {
            if !barred {
                if let Some(b) = BaseType::from_name(name) {
                    return Ok(TypeExpr::Base(b));
                }
            }
            let sym = Symbol::new(name);
            if sym.is_constant() {
                Ok(TypeExpr::Singleton(Value::Sym(sym)))
            } else {
                Ok(TypeExpr::Named(sym))
            }
        }
        SexpKind::Dotted(..) => Err(syntax(s, "dotted pair is not a type expression")),
        SexpKind::List(items) => {
            let Some(first) = items.first() else {
                return Ok(TypeExpr::Singleton(Value::nil()));
            };
            let head = first
                .symbol()
                .ok_or_else(|| syntax(s, "type constructor must be a symbol"))?;
            let args = &items[1..];
            let arity = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(syntax(s, format!("{head} expects {n} argument(s), got {}", args.len())))
                }
            };
            let sub = |x: &Sexp| parse_type_expr(x, owner);
            match head {
                "quote" => {
                    arity(1)?;
                    Ok(TypeExpr::Singleton(args[0].to_value()))
                }
                "enum" => {
                    arity(1)?;
                    let data = match args[0].list() {
                        Some([q, d]) if q.symbol() == Some("quote") => d.to_value(),
                        _ => args[0].to_value(),
                    };
                    if !data.is_true_list() {
                        return Err(syntax(s, "enum expects a list of values"));
                    }
                    let mut seen = BTreeSet::new();
                    let vals: Vec<Value> = data.list_items().into_iter().filter(|v| seen.insert(v.clone())).collect();
                    if vals.is_empty() {
                        return Err(syntax(s, "enum of no values"));
                    }
                    Ok(TypeExpr::Enum(vals))
                }
                "oneof" => {
                    if args.is_empty() {
                        return Err(syntax(s, "oneof needs at least one branch"));
                    }
                    Ok(TypeExpr::OneOf(args.iter().map(sub).collect::<Result<_, _>>()?))
                }
                "cons" => {
                    arity(2)?;
                    Ok(TypeExpr::Cons(Box::new(sub(&args[0])?), Box::new(sub(&args[1])?)))
                }
                "list" => {
                    let parts: Vec<TypeExpr> = args.iter().map(sub).collect::<Result<_, _>>()?;
                    Ok(parts
                        .into_iter()
                        .rev()
                        .fold(TypeExpr::Singleton(Value::nil()), |acc, t| TypeExpr::Cons(Box::new(t), Box::new(acc))))
                }
                "listof" => {
                    arity(1)?;
                    Ok(TypeExpr::ListOf(Box::new(sub(&args[0])?)))
                }
                "set" => {
                    arity(1)?;
                    Ok(TypeExpr::Set(Box::new(sub(&args[0])?)))
                }
                "custom" => {
                    arity(2)?;
                    let name = |x: &Sexp| {
                        x.symbol()
                            .map(Symbol::new)
                            .ok_or_else(|| syntax(x, "custom expects function names"))
                    };
                    Ok(TypeExpr::Custom { recognizer: name(&args[0])?, enumerator: name(&args[1])? })
                }
                "record" => {
                    let owner = owner.ok_or_else(|| syntax(s, "record needs an enclosing defdata name"))?;
                    Ok(TypeExpr::Record(Symbol::new(owner), parse_fields(s, args, owner)?))
                }
                _ if !args.is_empty() && args.iter().all(|a| matches!(a.kind, SexpKind::Dotted(..))) => {
                    Ok(TypeExpr::Record(Symbol::new(head), parse_fields(s, args, head)?))
                }
                _ => Err(syntax(s, format!("unknown type constructor {head}"))),
            }
        }
    }
}

fn parse_fields(s: &Sexp, args: &[Sexp], owner: &str) -> Result<Vec<(Symbol, TypeExpr)>, SyntaxError> {
    if args.is_empty() {
        return Err(syntax(s, "record needs at least one field"));
    }
    let mut seen = BTreeSet::new();
    let mut fields = Vec::new();
    for a in args {
        match &a.kind {
            SexpKind::Dotted(head, tail) if head.len() == 1 && head[0].symbol().is_some() => {
                let name = Symbol::new(head[0].symbol().unwrap());
                if !seen.insert(name.clone()) {
                    return Err(syntax(a, format!("duplicate field {name}")));
                }
                fields.push((name, parse_type_expr(tail, Some(owner))?));
            }
            _ => return Err(syntax(a, "record field must look like (name . type)")),
        }
    }
    Ok(fields)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "size")]
pub enum TypeKind {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Debug)]
pub struct TypeEntry {
    pub name: Symbol,
    pub expr: TypeExpr,
    pub recognizer: Symbol,
    pub enumerator: Symbol,
    pub kind: TypeKind,
    pub recursive: bool,
}

impl TypeEntry {
    pub fn recognizer_name(name: &Symbol) -> Symbol {
        match BaseType::from_name(name.as_str()).and_then(BaseType::prim) {
            Some(p) => Symbol::new(p.name()),
            None => Symbol::new(&format!("{name}p")),
        }
    }

    pub fn enumerator_name(name: &Symbol) -> Symbol {
        Symbol::new(&format!("nth-{name}"))
    }

    /// Every value of a finite type, in enumeration order.
    pub fn extent(&self, world: &World) -> Option<Vec<Value>> {
        match self.kind {
            TypeKind::Finite(n) => (0..n as u64).map(|i| world.enumerate(&self.name, i).ok()).collect(),
            TypeKind::Infinite => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TypeTable {
    entries: BTreeMap<Symbol, Arc<TypeEntry>>,
    by_recognizer: BTreeMap<Symbol, Symbol>,
    by_enumerator: BTreeMap<Symbol, Symbol>,
}

impl TypeTable {
    pub fn with_base_types() -> TypeTable {
        let mut t = TypeTable::default();
        for b in BaseType::ALL {
            let name = Symbol::new(b.name());
            let kind = if b == BaseType::Boolean { TypeKind::Finite(2) } else { TypeKind::Infinite };
            t.insert(TypeEntry {
                recognizer: TypeEntry::recognizer_name(&name),
                enumerator: TypeEntry::enumerator_name(&name),
                name,
                expr: TypeExpr::Base(b),
                kind,
                recursive: false,
            });
        }
        t
    }

    pub fn get(&self, name: &Symbol) -> Option<&TypeEntry> {
        self.entries.get(name).map(|e| &**e)
    }

    pub fn contains(&self, name: &Symbol) -> bool {
        self.entries.contains_key(name)
    }

    pub fn entries(&self) -> impl Iterator<Item = &TypeEntry> {
        self.entries.values().map(|e| &**e)
    }

    pub fn type_of_recognizer(&self, f: &Symbol) -> Option<Symbol> {
        self.by_recognizer.get(f).cloned()
    }

    pub fn type_of_enumerator(&self, f: &Symbol) -> Option<Symbol> {
        self.by_enumerator.get(f).cloned()
    }

    pub(crate) fn insert(&mut self, e: TypeEntry) {
        self.by_recognizer.insert(e.recognizer.clone(), e.name.clone());
        self.by_enumerator.insert(e.enumerator.clone(), e.name.clone());
        self.entries.insert(e.name.clone(), Arc::new(e));
    }

    /// Follows alias chains (`(defdata foo bar)`) to a structural expression.
    pub fn resolve<'a>(&'a self, mut expr: &'a TypeExpr) -> &'a TypeExpr {
        let mut hops = 0;
        while let TypeExpr::Named(n) = expr {
            match self.get(n) {
                Some(e) if hops < 64 => expr = &e.expr,
                _ => break,
            }
            hops += 1;
        }
        expr
    }

    /// Recognizer of `expr` applied to `x`, unfolded one level when the
    /// structure is simple enough for the rewriter to reason about.
    pub fn recognizer_term(&self, expr: &TypeExpr, x: &Term) -> Option<Term> {
        let call = |e: &TypeExpr, arg: Term| -> Option<Term> {
            match e {
                TypeExpr::Named(n) => Some(Term::App(self.get(n)?.recognizer.clone(), vec![arg])),
                other => self.recognizer_term(other, &arg),
            }
        };
        match expr {
            TypeExpr::Base(BaseType::All) => Some(Term::t()),
            TypeExpr::Base(BaseType::ProperCons) => Some(Term::app(
                "and",
                vec![Term::app("consp", vec![x.clone()]), Term::app("true-listp", vec![x.clone()])],
            )),
            TypeExpr::Base(b) => Some(Term::app(b.prim()?.name(), vec![x.clone()])),
            TypeExpr::Singleton(v) => Some(Term::app("equal", vec![x.clone(), Term::Quote(v.clone())])),
            TypeExpr::Enum(vs) => Some(or_chain(
                vs.iter()
                    .map(|v| Term::app("equal", vec![x.clone(), Term::Quote(v.clone())]))
                    .collect(),
            )),
            TypeExpr::OneOf(bs) => Some(or_chain(bs.iter().map(|b| call(b, x.clone())).collect::<Option<_>>()?)),
            TypeExpr::Cons(a, b) => {
                let car = call(a, Term::app("car", vec![x.clone()]))?;
                let cdr = call(b, Term::app("cdr", vec![x.clone()]))?;
                Some(Term::app(
                    "and",
                    vec![Term::app("consp", vec![x.clone()]), Term::app("and", vec![car, cdr])],
                ))
            }
            TypeExpr::Named(_) => call(expr, x.clone()),
            TypeExpr::ListOf(_) | TypeExpr::Set(_) | TypeExpr::Record(..) | TypeExpr::Custom { .. } => None,
        }
    }
}

fn or_chain(mut ts: Vec<Term>) -> Term {
    match ts.len() {
        0 => Term::nil(),
        1 => ts.pop().unwrap(),
        _ => {
            let last = ts.pop().unwrap();
            ts.into_iter().rev().fold(last, |acc, t| Term::app("or", vec![t, acc]))
        }
    }
}

pub fn recognize_expr(world: &World, expr: &TypeExpr, v: &Value) -> Result<bool, EvalError> {
    match expr {
        TypeExpr::Base(b) => Ok(b.contains(v)),
        TypeExpr::Enum(vs) => Ok(vs.contains(v)),
        TypeExpr::Singleton(x) => Ok(x == v),
        TypeExpr::OneOf(bs) => {
            for b in bs {
                if recognize_expr(world, b, v)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        TypeExpr::Cons(a, b) => match v {
            Value::Cons(x, y) => Ok(recognize_expr(world, a, x)? && recognize_expr(world, b, y)?),
            _ => Ok(false),
        },
        TypeExpr::ListOf(e) => {
            if !v.is_true_list() {
                return Ok(false);
            }
            for item in v.list_items() {
                if !recognize_expr(world, e, &item)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        TypeExpr::Set(e) => {
            if !v.is_true_list() {
                return Ok(false);
            }
            let items = v.list_items();
            if items.windows(2).any(|w| w[0] >= w[1]) {
                return Ok(false);
            }
            for item in &items {
                if !recognize_expr(world, e, item)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        TypeExpr::Record(name, fields) => {
            if !v.is_true_list() || v.car() != Value::Sym(name.clone()) {
                return Ok(false);
            }
            let items = v.cdr().list_items();
            if items.len() != fields.len() {
                return Ok(false);
            }
            for ((field, t), item) in fields.iter().zip(&items) {
                if item.car() != Value::Sym(field.clone()) || !item.is_cons() {
                    return Ok(false);
                }
                if !recognize_expr(world, t, &item.cdr())? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        TypeExpr::Named(n) => eval::with_stack(|| world.recognize(n, v)),
        TypeExpr::Custom { recognizer, .. } => {
            Ok(eval::call_function(world, recognizer, vec![v.clone()])?.is_true())
        }
    }
}

/// Decodes `n` into `k` component indices by repeated unpairing.
fn tuple_indices(mut n: u64, k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    for _ in 1..k {
        let (i, rest) = encoding::unpair(n);
        out.push(i);
        n = rest;
    }
    if k > 0 {
        out.push(n);
    }
    out
}

pub fn enumerate_expr(world: &World, expr: &TypeExpr, n: u64) -> Result<Value, EvalError> {
    match expr {
        TypeExpr::Base(b) => Ok(b.nth(n)),
        TypeExpr::Enum(vs) => Ok(vs[(n % vs.len() as u64) as usize].clone()),
        TypeExpr::Singleton(v) => Ok(v.clone()),
        TypeExpr::OneOf(bs) => {
            let k = bs.len() as u64;
            enumerate_expr(world, &bs[(n % k) as usize], n / k)
        }
        TypeExpr::Cons(a, b) => {
            let (i, j) = encoding::unpair(n);
            Ok(Value::cons(enumerate_expr(world, a, i)?, enumerate_expr(world, b, j)?))
        }
        TypeExpr::ListOf(e) => {
            let items = encoding::list_indices(n)
                .into_iter()
                .map(|i| enumerate_expr(world, e, i))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::list(items))
        }
        TypeExpr::Set(e) => {
            let items = encoding::list_indices(n)
                .into_iter()
                .map(|i| enumerate_expr(world, e, i))
                .collect::<Result<BTreeSet<_>, _>>()?;
            Ok(Value::list(items.into_iter().collect::<Vec<_>>()))
        }
        TypeExpr::Record(name, fields) => {
            let idx = tuple_indices(n, fields.len());
            let mut items = vec![Value::Sym(name.clone())];
            for ((field, t), i) in fields.iter().zip(idx) {
                items.push(Value::cons(Value::Sym(field.clone()), enumerate_expr(world, t, i)?));
            }
            Ok(Value::list(items))
        }
        TypeExpr::Named(name) => eval::with_stack(|| world.enumerate(name, n)),
        TypeExpr::Custom { enumerator, .. } => {
            eval::call_function(world, enumerator, vec![Value::big_int(BigInt::from(n))])
        }
    }
}

/// A validated group of definitions ready to enter the world.
pub(crate) struct Prepared {
    pub entries: Vec<TypeEntry>,
    pub edges: Vec<(Symbol, Symbol)>,
}

fn ill(name: &Symbol, message: impl Into<String>) -> AdmitError {
    AdmitError::IllFormedType { name: name.clone(), message: message.into() }
}

/// Checks a (possibly mutually recursive) group of definitions.
pub(crate) fn prepare_group(world: &World, group: &[(Symbol, TypeExpr)]) -> Result<Prepared, AdmitError> {
    let names: BTreeSet<Symbol> = group.iter().map(|(n, _)| n.clone()).collect();
    if names.len() != group.len() {
        let mut seen = BTreeSet::new();
        let dup = group.iter().find(|(n, _)| !seen.insert(n.clone())).unwrap();
        return Err(AdmitError::Redefinition(dup.0.clone()));
    }
    for (name, expr) in group {
        if world.types().contains(name) {
            return Err(AdmitError::Redefinition(name.clone()));
        }
        for f in [TypeEntry::recognizer_name(name), TypeEntry::enumerator_name(name)] {
            if world.is_function_name(&f) {
                return Err(AdmitError::Redefinition(f));
            }
        }
        let mut missing = None;
        expr.visit_named(&mut |n| {
            if missing.is_none() && !names.contains(n) && !world.types().contains(n) {
                missing = Some(n.clone());
            }
        });
        if let Some(m) = missing {
            return Err(AdmitError::UnknownType(m));
        }
        check_custom(world, name, expr)?;
    }

    // Unguarded cycles (a = (oneof b ...), b = (oneof a ...)) would make the
    // recognizer loop without consuming structure.
    let unguarded: BTreeMap<&Symbol, BTreeSet<Symbol>> = group
        .iter()
        .map(|(n, e)| {
            let mut out = BTreeSet::new();
            e.unguarded_names(&mut out);
            out.retain(|m| names.contains(m));
            (n, out)
        })
        .collect();
    for (n, _) in group {
        if reaches(&unguarded, n, n) {
            return Err(ill(n, "recursive reference is not under a constructor"));
        }
    }

    // Least fixpoint of "index 0 decodes without looping".
    let mut productive: BTreeSet<Symbol> = BTreeSet::new();
    loop {
        let before = productive.len();
        for (n, e) in group {
            if !productive.contains(n) && index_zero_terminates(e, &names, &productive) {
                productive.insert(n.clone());
            }
        }
        if productive.len() == before {
            break;
        }
    }
    if let Some((n, _)) = group.iter().find(|(n, _)| !productive.contains(n)) {
        return Err(AdmitError::NoBaseCase(n.clone()));
    }

    let all_refs: BTreeMap<&Symbol, BTreeSet<Symbol>> = group
        .iter()
        .map(|(n, e)| {
            let mut out = BTreeSet::new();
            e.visit_named(&mut |m| {
                if names.contains(m) {
                    out.insert(m.clone());
                }
            });
            (n, out)
        })
        .collect();

    let mut entries = Vec::new();
    let mut edges = Vec::new();
    for (name, expr) in group {
        let expr = order_branches(expr, &names, &productive);
        let recursive = reaches(&all_refs, name, name);
        let kind = finite_kind(world, &expr, &names);
        edges.extend(syntactic_edges(world, name, &expr));
        entries.push(TypeEntry {
            recognizer: TypeEntry::recognizer_name(name),
            enumerator: TypeEntry::enumerator_name(name),
            name: name.clone(),
            expr,
            kind,
            recursive,
        });
    }
    Ok(Prepared { entries, edges })
}

fn check_custom(world: &World, owner: &Symbol, expr: &TypeExpr) -> Result<(), AdmitError> {
    match expr {
        TypeExpr::Custom { recognizer, enumerator } => {
            for f in [recognizer, enumerator] {
                match world.arity(f) {
                    Some(1) => {}
                    Some(n) => {
                        return Err(AdmitError::Arity { function: f.clone(), expected: 1, got: n, context: owner.clone() })
                    }
                    None => return Err(AdmitError::UnknownFunction { function: f.clone(), context: owner.clone() }),
                }
            }
            Ok(())
        }
        TypeExpr::OneOf(bs) => bs.iter().try_for_each(|b| check_custom(world, owner, b)),
        TypeExpr::Cons(a, b) => {
            check_custom(world, owner, a)?;
            check_custom(world, owner, b)
        }
        TypeExpr::ListOf(e) | TypeExpr::Set(e) => check_custom(world, owner, e),
        TypeExpr::Record(_, fields) => fields.iter().try_for_each(|(_, t)| check_custom(world, owner, t)),
        _ => Ok(()),
    }
}

fn reaches(graph: &BTreeMap<&Symbol, BTreeSet<Symbol>>, from: &Symbol, to: &Symbol) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<Symbol> = graph.get(from).map(|s| s.iter().cloned().collect()).unwrap_or_default();
    while let Some(n) = stack.pop() {
        if &n == to {
            return true;
        }
        if seen.insert(n.clone()) {
            if let Some(next) = graph.get(&n) {
                stack.extend(next.iter().cloned());
            }
        }
    }
    false
}

fn index_zero_terminates(e: &TypeExpr, group: &BTreeSet<Symbol>, known: &BTreeSet<Symbol>) -> bool {
    match e {
        TypeExpr::Named(n) => !group.contains(n) || known.contains(n),
        TypeExpr::OneOf(bs) => bs.iter().any(|b| index_zero_terminates(b, group, known)),
        TypeExpr::Cons(a, b) => index_zero_terminates(a, group, known) && index_zero_terminates(b, group, known),
        TypeExpr::Record(_, fields) => fields.iter().all(|(_, t)| index_zero_terminates(t, group, known)),
        _ => true,
    }
}

/// Moves base-case branches of every `oneof` to the front so index 0
/// always decodes through a terminating branch.
fn order_branches(e: &TypeExpr, group: &BTreeSet<Symbol>, known: &BTreeSet<Symbol>) -> TypeExpr {
    let rec = |x: &TypeExpr| order_branches(x, group, known);
    match e {
        TypeExpr::OneOf(bs) => {
            let none = BTreeSet::new();
            let mut bs: Vec<TypeExpr> = bs.iter().map(rec).collect();
            bs.sort_by_key(|b| {
                if index_zero_terminates(b, group, &none) {
                    0
                } else if index_zero_terminates(b, group, known) {
                    1
                } else {
                    2
                }
            });
            TypeExpr::OneOf(bs)
        }
        TypeExpr::Cons(a, b) => TypeExpr::Cons(Box::new(rec(a)), Box::new(rec(b))),
        TypeExpr::ListOf(x) => TypeExpr::ListOf(Box::new(rec(x))),
        TypeExpr::Set(x) => TypeExpr::Set(Box::new(rec(x))),
        TypeExpr::Record(n, fields) => TypeExpr::Record(n.clone(), fields.iter().map(|(f, t)| (f.clone(), rec(t))).collect()),
        other => other.clone(),
    }
}

fn finite_kind(world: &World, e: &TypeExpr, group: &BTreeSet<Symbol>) -> TypeKind {
    match e {
        TypeExpr::Enum(vs) => TypeKind::Finite(vs.len()),
        TypeExpr::Singleton(_) => TypeKind::Finite(1),
        TypeExpr::Base(BaseType::Boolean) => TypeKind::Finite(2),
        TypeExpr::Named(n) if !group.contains(n) => world.types().get(n).map_or(TypeKind::Infinite, |t| t.kind),
        _ => TypeKind::Infinite,
    }
}

fn syntactic_edges(world: &World, name: &Symbol, e: &TypeExpr) -> Vec<(Symbol, Symbol)> {
    let mut out = Vec::new();
    match e {
        TypeExpr::ListOf(_) | TypeExpr::Set(_) => out.push((name.clone(), Symbol::new("true-list"))),
        TypeExpr::Base(b) => {
            out.push((name.clone(), Symbol::new(b.name())));
            out.push((Symbol::new(b.name()), name.clone()));
        }
        TypeExpr::Named(n) => {
            out.push((name.clone(), n.clone()));
            out.push((n.clone(), name.clone()));
        }
        TypeExpr::Enum(_) | TypeExpr::Singleton(_) => {
            let vals = match e {
                TypeExpr::Enum(vs) => vs.clone(),
                TypeExpr::Singleton(v) => vec![v.clone()],
                _ => unreachable!(),
            };
            for b in BaseType::ALL {
                if b != BaseType::All && vals.iter().all(|v| b.contains(v)) {
                    out.push((name.clone(), Symbol::new(b.name())));
                }
            }
        }
        TypeExpr::OneOf(bs) => {
            for b in bs {
                match b {
                    TypeExpr::Named(n) if n != name && world.types().contains(n) => out.push((n.clone(), name.clone())),
                    TypeExpr::Base(t) => out.push((Symbol::new(t.name()), name.clone())),
                    _ => {}
                }
            }
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::read_one;

    fn ty(src: &str) -> TypeExpr {
        parse_type_expr(&read_one(src).unwrap(), Some("r")).unwrap()
    }

    fn world_with(defs: &[(&str, &str)]) -> World {
        let mut w = World::new();
        let group: Vec<(Symbol, TypeExpr)> = defs
            .iter()
            .map(|(n, e)| (Symbol::new(n), parse_type_expr(&read_one(e).unwrap(), Some(n)).unwrap()))
            .collect();
        w.define_types(group).unwrap();
        w
    }

    #[test]
    fn parses_table_one_forms() {
        assert_eq!(ty("(enum '(red green blue))").to_string(), "(enum '(red green blue))");
        assert_eq!(ty("(list nat pos neg)"), ty("(cons nat (cons pos (cons neg nil)))"));
        assert!(matches!(ty("(record (valid . boolean) (addr . nat))"), TypeExpr::Record(..)));
        assert!(matches!(
            ty("(oneof 'Leaf (Node (id . symbol) (left . tree)))"),
            TypeExpr::OneOf(ref bs) if matches!(bs[1], TypeExpr::Record(..))
        ));
        assert!(parse_type_expr(&read_one("(frob nat)").unwrap(), None).is_err());
    }

    #[test]
    fn base_encodings() {
        assert_eq!(BaseType::Nat.nth(7), Value::int(7));
        assert_eq!(BaseType::Integer.nth(2), Value::int(1));
        assert_eq!(BaseType::Pos.nth(0), Value::int(1));
        assert_eq!(BaseType::Neg.nth(0), Value::int(-1));
        assert_eq!(BaseType::Boolean.nth(0), Value::t());
        assert_eq!(BaseType::Boolean.nth(3), Value::nil());
        assert_eq!(BaseType::Character.nth(62), Value::Char('a'));
        assert_eq!(BaseType::TrueList.nth(0), Value::nil());
    }

    #[test]
    fn loi_and_triple() {
        let w = world_with(&[("loi", "(listof integer)")]);
        let loi = Symbol::new("loi");
        assert_eq!(w.enumerate(&loi, 0).unwrap(), Value::nil());
        let v = crate::sexp::read_one("(-1 -23 -42 7 13)").unwrap().to_value();
        assert!(w.recognize(&loi, &v).unwrap());
        let w = world_with(&[("triple", "(list pos pos pos)")]);
        let triple = Symbol::new("triple");
        let v = crate::sexp::read_one("(429 1 429)").unwrap().to_value();
        assert!(w.recognize(&triple, &v).unwrap());
        assert!(!w.recognize(&triple, &Value::list([Value::int(1), Value::int(2)])).unwrap());
        assert!(!w.recognize(&triple, &Value::list([Value::int(1), Value::int(0), Value::int(2)])).unwrap());
    }

    #[test]
    fn mutually_recursive_group() {
        let w = world_with(&[("sexp", "(oneof symbol integer slist)"), ("slist", "(oneof nil (cons sexp slist))")]);
        let slist = Symbol::new("slist");
        assert!(w.types().get(&slist).unwrap().recursive);
        for n in 0..300 {
            let v = w.enumerate(&slist, n).unwrap();
            assert!(w.recognize(&slist, &v).unwrap(), "{v}");
        }
    }

    #[test]
    fn recursive_record_tree() {
        let w = world_with(&[("tree", "(oneof 'Leaf (Node (id . symbol) (left . tree) (right . tree)))")]);
        let tree = Symbol::new("tree");
        assert_eq!(w.enumerate(&tree, 0).unwrap(), Value::sym("Leaf"));
        let v = w.enumerate(&tree, 1).unwrap();
        assert_eq!(v.to_string(), "(Node (id) (left . Leaf) (right . Leaf))");
        assert!(w.recognize(&tree, &v).unwrap());
    }

    #[test]
    fn missing_base_case_is_rejected() {
        let mut w = World::new();
        let e = ty("(cons nat bad)");
        let err = w.define_types(vec![(Symbol::new("bad"), e)]).unwrap_err();
        assert_eq!(err, AdmitError::NoBaseCase(Symbol::new("bad")));
        let err = w
            .define_types(vec![(Symbol::new("a"), ty("(oneof b nat)")), (Symbol::new("b"), ty("(oneof a nil)"))])
            .unwrap_err();
        assert!(matches!(err, AdmitError::IllFormedType { .. }));
        let err = w.define_types(vec![(Symbol::new("c"), ty("(listof nope)"))]).unwrap_err();
        assert_eq!(err, AdmitError::UnknownType(Symbol::new("nope")));
    }

    #[test]
    fn base_case_branch_moves_first() {
        let w = world_with(&[("lst", "(oneof (cons nat lst) nil)")]);
        let e = &w.types().get(&Symbol::new("lst")).unwrap().expr;
        assert!(matches!(e, TypeExpr::OneOf(bs) if bs[0] == TypeExpr::Singleton(Value::nil())));
    }

    #[test]
    fn recognizer_unfolding() {
        let w = world_with(&[("triple", "(list pos pos pos)")]);
        let e = w.types().get(&Symbol::new("triple")).unwrap().expr.clone();
        let t = w.types().recognizer_term(&e, &Term::var("x")).unwrap();
        assert_eq!(
            t.to_string(),
            "(and (consp x) (and (posp (car x)) (and (consp (cdr x)) (and (posp (car (cdr x))) \
             (and (consp (cdr (cdr x))) (and (posp (car (cdr (cdr x)))) (equal (cdr (cdr (cdr x))) nil)))))))"
        );
    }
}
