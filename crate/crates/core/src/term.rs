//! Terms of the first-order functional language and their translation from
//! surface s-expressions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::SyntaxError;
use crate::sexp::{self, Sexp, SexpKind};
use crate::value::{Symbol, Value};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Quote(Value),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::new(name))
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(Symbol::new(f), args)
    }

    pub fn nil() -> Term {
        Term::Quote(Value::nil())
    }

    pub fn t() -> Term {
        Term::Quote(Value::t())
    }

    pub fn not(t: Term) -> Term {
        Term::app("not", vec![t])
    }

    pub fn is_quote(&self) -> bool {
        matches!(self, Term::Quote(_))
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_quote(&self) -> Option<&Value> {
        match self {
            Term::Quote(v) => Some(v),
            _ => None,
        }
    }

    /// The function symbol and arguments when this is an application of `f`.
    pub fn call_of(&self, f: &str) -> Option<&[Term]> {
        match self {
            Term::App(g, args) if g.as_str() == f => Some(args),
            _ => None,
        }
    }

    /// Argument of `(not x)`.
    pub fn negated(&self) -> Option<&Term> {
        self.call_of("not").and_then(|a| a.first())
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Quote(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn mentions(&self, v: &Symbol) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Quote(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.mentions(v)),
        }
    }

    pub fn contains(&self, sub: &Term) -> bool {
        self == sub
            || match self {
                Term::App(_, args) => args.iter().any(|a| a.contains(sub)),
                _ => false,
            }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn substitute(&self, map: &BTreeMap<Symbol, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Quote(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect()),
        }
    }

    pub fn substitute_one(&self, v: &Symbol, by: &Term) -> Term {
        let mut map = BTreeMap::new();
        map.insert(v.clone(), by.clone());
        self.substitute(&map)
    }

    /// Replaces every occurrence of `from` (compared structurally) by `to`.
    pub fn replace(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.replace(from, to)).collect()),
            _ => self.clone(),
        }
    }

    /// Pre-order traversal of all subterms, including `self`.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            if let Term::App(_, args) = t {
                stack.extend(args.iter().rev());
            }
        }
        out
    }

    pub fn function_symbols(&self, out: &mut BTreeSet<Symbol>) {
        if let Term::App(f, args) = self {
            out.insert(f.clone());
            args.iter().for_each(|a| a.function_symbols(out));
        }
    }

    /// Printer that upcases plain symbols for report text.
    pub fn report(&self) -> TermReport<'_> {
        TermReport(self)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn self_evaluating(v: &Value) -> bool {
    match v {
        Value::Num(_) | Value::Str(_) | Value::Char(_) => true,
        Value::Sym(s) => s.is_constant(),
        Value::Cons(..) => false,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, report: bool) -> fmt::Result {
    match t {
        Term::Var(v) if report => write!(f, "{}", Value::Sym(v.clone()).report()),
        Term::Var(v) => write!(f, "{v}"),
        Term::Quote(v) => {
            if !self_evaluating(v) {
                f.write_str("'")?;
            }
            if report {
                write!(f, "{}", v.report())
            } else {
                write!(f, "{v}")
            }
        }
        Term::App(g, args) => {
            f.write_str("(")?;
            if report {
                write!(f, "{}", Value::Sym(g.clone()).report())?;
            } else {
                write!(f, "{g}")?;
            }
            for a in args {
                f.write_str(" ")?;
                write_term(f, a, report)?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, false)
    }
}

pub struct TermReport<'a>(&'a Term);

impl fmt::Display for TermReport<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.0, true)
    }
}

impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parses the text of a single term.
pub fn parse_term(src: &str) -> Result<Term, SyntaxError> {
    term_from_sexp(&sexp::read_one(src)?)
}

fn err(s: &Sexp, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::new(s.pos, msg)
}

fn expect_args<'a>(s: &'a Sexp, items: &'a [Sexp], n: usize) -> Result<&'a [Sexp], SyntaxError> {
    let args = &items[1..];
    if args.len() != n {
        let head = items[0].symbol().unwrap_or("?");
        return Err(err(s, format!("{head} expects {n} argument(s), got {}", args.len())));
    }
    Ok(args)
}

fn fold_right(f: &str, mut args: Vec<Term>, unit: Term) -> Term {
    match args.len() {
        0 => unit,
        1 => args.pop().unwrap(),
        _ => {
            let last = args.pop().unwrap();
            args.into_iter().rev().fold(last, |acc, a| Term::app(f, vec![a, acc]))
        }
    }
}

/// `c[ad]+r` accessor expansion: `cadr` becomes `(car (cdr x))`.
fn cxr_path(name: &str) -> Option<&str> {
    let inner = name.strip_prefix('c')?.strip_suffix('r')?;
    if inner.len() >= 2 && inner.len() <= 4 && inner.bytes().all(|b| b == b'a' || b == b'd') {
        Some(inner)
    } else {
        None
    }
}

fn nth_accessor(name: &str) -> Option<usize> {
    ["first", "second", "third", "fourth", "fifth"].iter().position(|n| *n == name)
}

/// Translates surface syntax into a term, expanding the macro-like forms
/// (`list`, `cond`, n-ary arithmetic, comparison variants, accessors).
pub fn term_from_sexp(s: &Sexp) -> Result<Term, SyntaxError> {
    match &s.kind {
        SexpKind::Num(_) | SexpKind::Str(_) | SexpKind::Char(_) => Ok(Term::Quote(s.to_value())),
        SexpKind::Sym { name, .. } => {
            let sym = Symbol::new(name);
            if sym.is_constant() {
                Ok(Term::Quote(Value::Sym(sym)))
            } else {
                Ok(Term::Var(sym))
            }
        }
        SexpKind::Dotted(..) => Err(err(s, "dotted pair is not a term")),
        SexpKind::List(items) => {
            let Some(first) = items.first() else {
                return Ok(Term::nil());
            };
            let Some(head) = first.symbol() else {
                return Err(err(s, "application head must be a symbol"));
            };
            let head = head.to_string();
            if head == "quote" {
                let args = expect_args(s, items, 1)?;
                return Ok(Term::Quote(args[0].to_value()));
            }
            if head == "cond" {
                return cond_from_sexp(&items[1..]);
            }
            let args: Vec<Term> = items[1..].iter().map(term_from_sexp).collect::<Result<_, _>>()?;
            let unary = |name: &str, args: Vec<Term>| -> Result<Term, SyntaxError> {
                if args.len() != 1 {
                    return Err(err(s, format!("{head} expects 1 argument(s), got {}", args.len())));
                }
                Ok(Term::app(name, args))
            };
            let binary = |args: &[Term]| -> Result<(Term, Term), SyntaxError> {
                if args.len() != 2 {
                    return Err(err(s, format!("{head} expects 2 argument(s), got {}", args.len())));
                }
                Ok((args[0].clone(), args[1].clone()))
            };
            if let Some(path) = cxr_path(&head) {
                if args.len() != 1 {
                    return Err(err(s, format!("{head} expects 1 argument(s), got {}", args.len())));
                }
                let arg = args.into_iter().next().unwrap();
                return Ok(path.bytes().rev().fold(arg, |acc, b| {
                    Term::app(if b == b'a' { "car" } else { "cdr" }, vec![acc])
                }));
            }
            if let Some(k) = nth_accessor(&head) {
                if args.len() != 1 {
                    return Err(err(s, format!("{head} expects 1 argument(s), got {}", args.len())));
                }
                let arg = args.into_iter().next().unwrap();
                let tail = (0..k).fold(arg, |acc, _| Term::app("cdr", vec![acc]));
                return Ok(Term::app("car", vec![tail]));
            }
            let t = match head.as_str() {
                "list" => args
                    .into_iter()
                    .rev()
                    .fold(Term::nil(), |acc, a| Term::app("cons", vec![a, acc])),
                "and" => fold_right("and", args, Term::t()),
                "or" => fold_right("or", args, Term::nil()),
                "append" => fold_right("append", args, Term::nil()),
                "+" => match args.len() {
                    1 => Term::app("+", vec![Term::Quote(Value::int(0)), args[0].clone()]),
                    _ => fold_right("+", args, Term::Quote(Value::int(0))),
                },
                "*" => match args.len() {
                    1 => Term::app("*", vec![Term::Quote(Value::int(1)), args[0].clone()]),
                    _ => fold_right("*", args, Term::Quote(Value::int(1))),
                },
                "-" => match args.len() {
                    0 => return Err(err(s, "- expects at least 1 argument")),
                    1 => Term::app("unary--", args),
                    _ => {
                        let mut it = args.into_iter();
                        let first = it.next().unwrap();
                        it.fold(first, |acc, a| Term::app("+", vec![acc, Term::app("unary--", vec![a])]))
                    }
                },
                "/" => match args.len() {
                    0 => return Err(err(s, "/ expects at least 1 argument")),
                    1 => Term::app("unary-/", args),
                    _ => {
                        let mut it = args.into_iter();
                        let first = it.next().unwrap();
                        it.fold(first, |acc, a| Term::app("*", vec![acc, Term::app("unary-/", vec![a])]))
                    }
                },
                ">" => {
                    let (a, b) = binary(&args)?;
                    Term::app("<", vec![b, a])
                }
                "<=" => {
                    let (a, b) = binary(&args)?;
                    Term::not(Term::app("<", vec![b, a]))
                }
                ">=" => {
                    let (a, b) = binary(&args)?;
                    Term::not(Term::app("<", vec![a, b]))
                }
                "=" | "eq" | "eql" => {
                    let (a, b) = binary(&args)?;
                    Term::app("equal", vec![a, b])
                }
                "/=" => {
                    let (a, b) = binary(&args)?;
                    Term::not(Term::app("equal", vec![a, b]))
                }
                "atom" | "endp" => Term::not(unary("consp", args)?),
                "null" => unary("not", args)?,
                "rest" => unary("cdr", args)?,
                "real/rationalp" | "acl2-numberp" => unary("rationalp", args)?,
                _ => Term::App(Symbol::new(&head), args),
            };
            check_builtin_arity(&t, s)?;
            Ok(t)
        }
    }
}

fn cond_from_sexp(clauses: &[Sexp]) -> Result<Term, SyntaxError> {
    let Some((first, rest)) = clauses.split_first() else {
        return Ok(Term::nil());
    };
    let parts = first
        .list()
        .filter(|l| !l.is_empty() && l.len() <= 2)
        .ok_or_else(|| err(first, "cond clause must be (test) or (test value)"))?;
    let test = term_from_sexp(&parts[0])?;
    let else_branch = cond_from_sexp(rest)?;
    Ok(match parts.get(1) {
        Some(v) => {
            let value = term_from_sexp(v)?;
            if test == Term::t() {
                value
            } else {
                Term::app("if", vec![test, value, else_branch])
            }
        }
        None => Term::app("or", vec![test, else_branch]),
    })
}

fn check_builtin_arity(t: &Term, s: &Sexp) -> Result<(), SyntaxError> {
    if let Term::App(f, args) = t {
        if let Some(p) = crate::eval::Prim::from_name(f.as_str()) {
            if p.arity() != args.len() {
                return Err(err(s, format!("{f} expects {} argument(s), got {}", p.arity(), args.len())));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(src: &str) -> Vec<String> {
        parse_term(src).unwrap().free_vars().iter().map(|s| s.as_str().to_string()).collect()
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(vars("(equal (rev (rev x)) x)"), ["x"]);
        assert!(vars("(quote (a b c))").is_empty());
        assert_eq!(vars("(implies (posp n) (< m n))"), ["m", "n"]);
    }

    #[test]
    fn accessors_and_arithmetic_desugar() {
        assert_eq!(parse_term("(third v)").unwrap().to_string(), "(car (cdr (cdr v)))");
        assert_eq!(parse_term("(cadr v)").unwrap().to_string(), "(car (cdr v))");
        assert_eq!(parse_term("(> a 256)").unwrap().to_string(), "(< 256 a)");
        assert_eq!(parse_term("(- a 1)").unwrap().to_string(), "(+ a (unary-- 1))");
        assert_eq!(parse_term("(+ a b c)").unwrap().to_string(), "(+ a (+ b c))");
        assert_eq!(parse_term("(list 1 x)").unwrap().to_string(), "(cons 1 (cons x nil))");
        assert_eq!(parse_term("'(a b)").unwrap().to_string(), "'(a b)");
    }

    #[test]
    fn cond_becomes_nested_if() {
        let t = parse_term("(cond ((equal a b) 1) ((consp a) 2) (t 3))").unwrap();
        assert_eq!(t.to_string(), "(if (equal a b) 1 (if (consp a) 2 3))");
    }

    #[test]
    fn builtin_arity_is_checked() {
        assert!(parse_term("(car a b)").is_err());
        assert!(parse_term("(if a b)").is_err());
    }
}
