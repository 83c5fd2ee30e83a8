//! Evaluator for terms under a variable binding.
//!
//! Built-ins are total: selectors of atoms yield `nil`, arithmetic treats
//! non-numbers as `0`, and division by zero yields `0`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::EvalError;
use crate::term::Term;
use crate::value::{Symbol, Value};
use crate::world::World;

/// Assignment of values to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding(pub BTreeMap<Symbol, Value>);

impl Binding {
    pub fn new() -> Self {
        Binding(BTreeMap::new())
    }

    pub fn insert(&mut self, v: Symbol, val: Value) {
        self.0.insert(v, val);
    }

    pub fn get(&self, v: &Symbol) -> Option<&Value> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Paper-style listing: `(A 1/7), (B 2/11) and (C 2/9)`.
    pub fn report(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| format!("({} {})", crate::value::report_name(k), v.report()))
            .collect();
        match parts.len() {
            0 => "()".to_string(),
            1 => parts[0].clone(),
            n => format!("{} and {}", parts[..n - 1].join(", "), parts[n - 1]),
        }
    }

    /// Reads the canonical `((x v) ...)` form back.
    pub fn parse(src: &str) -> Result<Binding, crate::error::SyntaxError> {
        let s = crate::sexp::read_one(src)?;
        let items = s
            .list()
            .ok_or_else(|| crate::error::SyntaxError::new(s.pos, "binding must be a list"))?;
        let mut b = Binding::new();
        for item in items {
            match item.list() {
                Some([k, v]) if k.symbol().is_some() => {
                    b.insert(Symbol::new(k.symbol().unwrap()), v.to_value());
                }
                _ => return Err(crate::error::SyntaxError::new(item.pos, "expected (variable value)")),
            }
        }
        Ok(b)
    }
}

impl fmt::Display for Binding {
    /// Canonical form `((x 0) (y "ba"))`; also the deduplication key.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({k} {v})")?;
        }
        f.write_str(")")
    }
}

impl serde::Serialize for Binding {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromIterator<(Symbol, Value)> for Binding {
    fn from_iter<I: IntoIterator<Item = (Symbol, Value)>>(iter: I) -> Self {
        Binding(iter.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Cons,
    Car,
    Cdr,
    Consp,
    Equal,
    If,
    Not,
    Implies,
    And,
    Or,
    Plus,
    Times,
    Negate,
    Reciprocal,
    Less,
    Expt,
    Len,
    Append,
    Natp,
    Posp,
    Negp,
    Integerp,
    Rationalp,
    Booleanp,
    Symbolp,
    Stringp,
    Characterp,
    TrueListp,
}

impl Prim {
    pub const ALL: [Prim; 28] = [
        Prim::Cons,
        Prim::Car,
        Prim::Cdr,
        Prim::Consp,
        Prim::Equal,
        Prim::If,
        Prim::Not,
        Prim::Implies,
        Prim::And,
        Prim::Or,
        Prim::Plus,
        Prim::Times,
        Prim::Negate,
        Prim::Reciprocal,
        Prim::Less,
        Prim::Expt,
        Prim::Len,
        Prim::Append,
        Prim::Natp,
        Prim::Posp,
        Prim::Negp,
        Prim::Integerp,
        Prim::Rationalp,
        Prim::Booleanp,
        Prim::Symbolp,
        Prim::Stringp,
        Prim::Characterp,
        Prim::TrueListp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Prim::Cons => "cons",
            Prim::Car => "car",
            Prim::Cdr => "cdr",
            Prim::Consp => "consp",
            Prim::Equal => "equal",
            Prim::If => "if",
            Prim::Not => "not",
            Prim::Implies => "implies",
            Prim::And => "and",
            Prim::Or => "or",
            Prim::Plus => "+",
            Prim::Times => "*",
            Prim::Negate => "unary--",
            Prim::Reciprocal => "unary-/",
            Prim::Less => "<",
            Prim::Expt => "expt",
            Prim::Len => "len",
            Prim::Append => "append",
            Prim::Natp => "natp",
            Prim::Posp => "posp",
            Prim::Negp => "negp",
            Prim::Integerp => "integerp",
            Prim::Rationalp => "rationalp",
            Prim::Booleanp => "booleanp",
            Prim::Symbolp => "symbolp",
            Prim::Stringp => "stringp",
            Prim::Characterp => "characterp",
            Prim::TrueListp => "true-listp",
        }
    }

    pub fn from_name(name: &str) -> Option<Prim> {
        Prim::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Prim::If => 3,
            Prim::Cons | Prim::Equal | Prim::Implies | Prim::And | Prim::Or => 2,
            Prim::Plus | Prim::Times | Prim::Less | Prim::Expt | Prim::Append => 2,
            _ => 1,
        }
    }

    /// Whether arguments are evaluated lazily.
    pub fn is_control(self) -> bool {
        matches!(self, Prim::If | Prim::Implies | Prim::And | Prim::Or)
    }

    /// Applies a strict primitive to already evaluated arguments.
    pub fn apply(self, args: &[Value]) -> Value {
        let num = |i: usize| fix(&args[i]);
        match self {
            Prim::Cons => Value::cons(args[0].clone(), args[1].clone()),
            Prim::Car => args[0].car(),
            Prim::Cdr => args[0].cdr(),
            Prim::Consp => Value::bool(args[0].is_cons()),
            Prim::Equal => Value::bool(args[0] == args[1]),
            Prim::If => {
                if args[0].is_true() {
                    args[1].clone()
                } else {
                    args[2].clone()
                }
            }
            Prim::Not => Value::bool(args[0].is_nil()),
            Prim::Implies => Value::bool(args[0].is_nil() || args[1].is_true()),
            Prim::And => {
                if args[0].is_true() {
                    args[1].clone()
                } else {
                    Value::nil()
                }
            }
            Prim::Or => {
                if args[0].is_true() {
                    args[0].clone()
                } else {
                    args[1].clone()
                }
            }
            Prim::Plus => Value::Num(num(0) + num(1)),
            Prim::Times => Value::Num(num(0) * num(1)),
            Prim::Negate => Value::Num(-num(0)),
            Prim::Reciprocal => {
                let r = num(0);
                if r.is_zero() {
                    Value::int(0)
                } else {
                    Value::Num(r.recip())
                }
            }
            Prim::Less => Value::bool(num(0) < num(1)),
            Prim::Expt => expt(&num(0), &args[1]),
            Prim::Len => Value::int(args[0].len() as i64),
            Prim::Append => {
                let items = args[0].list_items();
                items
                    .into_iter()
                    .rev()
                    .fold(args[1].clone(), |acc, v| Value::cons(v, acc))
            }
            Prim::Natp => Value::bool(matches!(&args[0], Value::Num(r) if r.is_integer() && !r.is_negative())),
            Prim::Posp => Value::bool(matches!(&args[0], Value::Num(r) if r.is_integer() && r.is_positive())),
            Prim::Negp => Value::bool(matches!(&args[0], Value::Num(r) if r.is_integer() && r.is_negative())),
            Prim::Integerp => Value::bool(args[0].is_integer()),
            Prim::Rationalp => Value::bool(matches!(args[0], Value::Num(_))),
            Prim::Booleanp => Value::bool(args[0].is_nil() || args[0] == Value::t()),
            Prim::Symbolp => Value::bool(matches!(args[0], Value::Sym(_))),
            Prim::Stringp => Value::bool(matches!(args[0], Value::Str(_))),
            Prim::Characterp => Value::bool(matches!(args[0], Value::Char(_))),
            Prim::TrueListp => Value::bool(args[0].is_true_list()),
        }
    }
}

/// Numeric view of a value: non-numbers count as zero.
pub fn fix(v: &Value) -> BigRational {
    match v {
        Value::Num(r) => r.clone(),
        _ => BigRational::zero(),
    }
}

fn expt(base: &BigRational, exponent: &Value) -> Value {
    let e = match exponent {
        Value::Num(r) if r.is_integer() => r.to_integer(),
        _ => BigInt::zero(),
    };
    if e.is_zero() {
        return Value::int(1);
    }
    if base.is_zero() {
        return Value::int(0);
    }
    let mag = e.abs().to_u64().unwrap_or(u64::MAX);
    let mut result = BigRational::one();
    let mut acc = base.clone();
    let mut k = mag;
    while k > 0 {
        if k & 1 == 1 {
            result *= &acc;
        }
        k >>= 1;
        if k > 0 {
            acc = &acc * &acc;
        }
    }
    if e.is_negative() {
        result = result.recip();
    }
    Value::Num(result)
}

/// Evaluates `term` under `binding`.
pub fn evaluate(term: &Term, binding: &Binding, world: &World) -> Result<Value, EvalError> {
    Evaluator { world, depth: 0 }.eval(term, &binding.0)
}

struct Evaluator<'w> {
    world: &'w World,
    depth: usize,
}

/// Calls `f` (a user function, recognizer, enumerator or strict
/// primitive) on already evaluated arguments.
pub fn call_function(world: &World, f: &Symbol, args: Vec<Value>) -> Result<Value, EvalError> {
    let mut ev = Evaluator { world, depth: 0 };
    if let Some(p) = Prim::from_name(f.as_str()) {
        if args.len() != p.arity() {
            return Err(EvalError::Arity { function: f.clone(), expected: p.arity(), got: args.len() });
        }
        return Ok(p.apply(&args));
    }
    ev.call(f, args)
}

#[cfg(not(target_arch = "wasm32"))]
pub(crate) fn with_stack<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, f)
}

#[cfg(target_arch = "wasm32")]
pub(crate) fn with_stack<R>(f: impl FnOnce() -> R) -> R {
    f()
}

impl<'w> Evaluator<'w> {
    fn eval(&mut self, term: &Term, env: &BTreeMap<Symbol, Value>) -> Result<Value, EvalError> {
        match term {
            Term::Var(v) => env.get(v).cloned().ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Quote(v) => Ok(v.clone()),
            Term::App(f, args) => {
                if let Some(p) = Prim::from_name(f.as_str()) {
                    if args.len() != p.arity() {
                        return Err(EvalError::Arity { function: f.clone(), expected: p.arity(), got: args.len() });
                    }
                    return self.eval_prim(p, args, env);
                }
                let vals = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.call(f, vals)
            }
        }
    }

    fn eval_prim(&mut self, p: Prim, args: &[Term], env: &BTreeMap<Symbol, Value>) -> Result<Value, EvalError> {
        match p {
            Prim::If => {
                if self.eval(&args[0], env)?.is_true() {
                    self.eval(&args[1], env)
                } else {
                    self.eval(&args[2], env)
                }
            }
            Prim::And => {
                if self.eval(&args[0], env)?.is_true() {
                    self.eval(&args[1], env)
                } else {
                    Ok(Value::nil())
                }
            }
            Prim::Or => {
                let a = self.eval(&args[0], env)?;
                if a.is_true() {
                    Ok(a)
                } else {
                    self.eval(&args[1], env)
                }
            }
            Prim::Implies => {
                if self.eval(&args[0], env)?.is_nil() {
                    Ok(Value::t())
                } else {
                    Ok(Value::bool(self.eval(&args[1], env)?.is_true()))
                }
            }
            _ => {
                let vals = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(p.apply(&vals))
            }
        }
    }

    fn call(&mut self, f: &Symbol, args: Vec<Value>) -> Result<Value, EvalError> {
        let world = self.world;
        if let Some(def) = world.function(f) {
            if def.formals.len() != args.len() {
                return Err(EvalError::Arity { function: f.clone(), expected: def.formals.len(), got: args.len() });
            }
            let cap = self.world.settings().depth_cap;
            if self.depth >= cap {
                return Err(EvalError::DepthExceeded { function: f.clone(), depth: cap });
            }
            let env: BTreeMap<Symbol, Value> = def.formals.iter().cloned().zip(args).collect();
            self.depth += 1;
            let r = with_stack(|| self.eval(&def.body, &env));
            self.depth -= 1;
            return r;
        }
        if args.len() == 1 {
            if let Some(ty) = self.world.types().type_of_recognizer(f) {
                return self.world.recognize(&ty, &args[0]).map(Value::bool);
            }
            if let Some(ty) = self.world.types().type_of_enumerator(f) {
                let idx = match &args[0] {
                    Value::Num(r) if r.is_integer() && !r.is_negative() => r.to_integer().to_u64().unwrap_or(u64::MAX),
                    _ => 0,
                };
                return self.world.enumerate(&ty, idx);
            }
        }
        Err(EvalError::UndefinedFunction(f.clone()))
    }
}
