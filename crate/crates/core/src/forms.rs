//! Top-level forms of a source file.

use std::fmt;

use crate::datadef::{parse_type_expr, Distribution, TypeExpr};
use crate::error::SyntaxError;
use crate::hints::UserHint;
use crate::sexp::{read_all, Pos, Sexp, SexpKind};
use crate::term::{term_from_sexp, Term};
use crate::testgen::TestMode;
use crate::value::Symbol;

#[derive(Clone, Debug, PartialEq)]
pub enum TestingOption {
    Trials(usize),
    Mode(TestMode),
    Distribution(Distribution),
    UniformBound(u64),
    ExhaustiveBound(u64),
    SubtypeEvidence(u64),
    Seed(u64),
    Deterministic(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FormKind {
    Defun { name: Symbol, formals: Vec<Symbol>, body: Term },
    /// One definition, or a mutually recursive group.
    Defdata(Vec<(Symbol, TypeExpr)>),
    DefdataSubtype { sub: Symbol, sup: Symbol, trust: bool },
    Defrule { name: Symbol, formula: Term, enabled: bool },
    Thm { formula: Term, hints: Vec<UserHint> },
    /// `test?` and `top-level-test?`.
    Test { formula: Term },
    SetTesting(Vec<TestingOption>),
    Include(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub kind: FormKind,
    pub source: Sexp,
}

impl Form {
    pub fn pos(&self) -> Pos {
        self.source.pos
    }

    pub fn head(&self) -> &str {
        self.source.head().unwrap_or("")
    }

    /// The defined name, for forms that define one.
    pub fn name(&self) -> Option<String> {
        match &self.kind {
            FormKind::Defun { name, .. } | FormKind::Defrule { name, .. } => Some(name.to_string()),
            FormKind::Defdata(group) => {
                Some(group.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>().join(" "))
            }
            FormKind::DefdataSubtype { sub, sup, .. } => Some(format!("{sub} {sup}")),
            FormKind::Include(p) => Some(p.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)
    }
}

fn err(s: &Sexp, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::new(s.pos, msg)
}

fn symbol(s: &Sexp, what: &str) -> Result<Symbol, SyntaxError> {
    match s.symbol() {
        Some(n) if !n.starts_with(':') => Ok(Symbol::new(n)),
        _ => Err(err(s, format!("expected {what}"))),
    }
}

fn unquote(s: &Sexp) -> &Sexp {
    match s.list() {
        Some([q, x]) if q.symbol() == Some("quote") => x,
        _ => s,
    }
}

/// Splits trailing `:key value` pairs off `args`.
fn keywords<'a>(form: &Sexp, args: &'a [Sexp]) -> Result<(&'a [Sexp], Vec<(&'a str, &'a Sexp)>), SyntaxError> {
    let split = args.iter().position(Sexp::is_keyword).unwrap_or(args.len());
    let (pos, kw) = args.split_at(split);
    if kw.len() % 2 != 0 {
        return Err(err(form, "keyword arguments must come in pairs"));
    }
    let mut out = Vec::new();
    for pair in kw.chunks(2) {
        let key = pair[0]
            .symbol()
            .filter(|_| pair[0].is_keyword())
            .ok_or_else(|| err(&pair[0], "expected a keyword"))?;
        out.push((key, &pair[1]));
    }
    Ok((pos, out))
}

fn arity(form: &Sexp, head: &str, args: &[Sexp], n: usize) -> Result<(), SyntaxError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(err(form, format!("{head} expects {n} argument(s), got {}", args.len())))
    }
}

fn flag(s: &Sexp) -> Result<bool, SyntaxError> {
    match unquote(s).symbol() {
        Some("t") => Ok(true),
        Some("nil") => Ok(false),
        _ => Err(err(s, "expected t or nil")),
    }
}

fn natural(s: &Sexp) -> Result<u64, SyntaxError> {
    match &s.kind {
        SexpKind::Num(r) if r.is_integer() => {
            u64::try_from(r.to_integer()).map_err(|_| err(s, "expected a natural number"))
        }
        _ => Err(err(s, "expected a natural number")),
    }
}

fn testing_option(key: &str, v: &Sexp) -> Result<TestingOption, SyntaxError> {
    let name = || unquote(v).symbol().unwrap_or("");
    Ok(match key {
        ":trials" => TestingOption::Trials(natural(v)? as usize),
        ":mode" => TestingOption::Mode(TestMode::from_name(name()).ok_or_else(|| err(v, "unknown testing mode"))?),
        ":distribution" => TestingOption::Distribution(
            Distribution::from_name(name()).ok_or_else(|| err(v, "unknown distribution"))?,
        ),
        ":uniform-bound" => TestingOption::UniformBound(natural(v)?.max(1)),
        ":exhaustive-bound" => TestingOption::ExhaustiveBound(natural(v)?.max(1)),
        ":subtype-evidence" => TestingOption::SubtypeEvidence(natural(v)?),
        ":seed" => TestingOption::Seed(natural(v)?),
        ":deterministic" => TestingOption::Deterministic(flag(v)?),
        _ => return Err(err(v, format!("unknown testing option {key}"))),
    })
}

fn defdata_entry(name: &Sexp, body: &Sexp) -> Result<(Symbol, TypeExpr), SyntaxError> {
    let n = symbol(name, "a type name")?;
    Ok((n.clone(), parse_type_expr(body, Some(n.as_str()))?))
}

pub fn parse_form(s: &Sexp) -> Result<Form, SyntaxError> {
    let items = s.list().ok_or_else(|| err(s, "top-level form must be a list"))?;
    let head = s.head().ok_or_else(|| err(s, "top-level form must start with a symbol"))?;
    let args = &items[1..];
    let kind = match head {
        "defun" => {
            arity(s, head, args, 3)?;
            let name = symbol(&args[0], "a function name")?;
            let formals = args[1]
                .list()
                .ok_or_else(|| err(&args[1], "expected a formal parameter list"))?
                .iter()
                .map(|f| symbol(f, "a formal parameter"))
                .collect::<Result<_, _>>()?;
            FormKind::Defun { name, formals, body: term_from_sexp(&args[2])? }
        }
        "defdata" => match args {
            [name, body] if name.symbol().is_some() => FormKind::Defdata(vec![defdata_entry(name, body)?]),
            [] => return Err(err(s, "defdata expects a name and a type")),
            group => {
                let mut out = Vec::new();
                for g in group {
                    match g.list() {
                        Some([name, body]) => out.push(defdata_entry(name, body)?),
                        _ => return Err(err(g, "expected (name type) in a defdata group")),
                    }
                }
                FormKind::Defdata(out)
            }
        },
        "defdata-subtype" => {
            let (pos, kw) = keywords(s, args)?;
            arity(s, head, pos, 2)?;
            let mut trust = false;
            for (k, v) in kw {
                match k {
                    ":trust" => trust = flag(v)?,
                    _ => return Err(err(v, format!("unknown defdata-subtype option {k}"))),
                }
            }
            FormKind::DefdataSubtype { sub: symbol(&pos[0], "a type name")?, sup: symbol(&pos[1], "a type name")?, trust }
        }
        "defrule" => {
            let (pos, kw) = keywords(s, args)?;
            arity(s, head, pos, 2)?;
            let mut enabled = true;
            for (k, v) in kw {
                match k {
                    ":disabled" => enabled = !flag(v)?,
                    _ => return Err(err(v, format!("unknown defrule option {k}"))),
                }
            }
            FormKind::Defrule { name: symbol(&pos[0], "a rule name")?, formula: term_from_sexp(&pos[1])?, enabled }
        }
        "thm" => {
            let (pos, kw) = keywords(s, args)?;
            arity(s, head, pos, 1)?;
            let mut hints = Vec::new();
            for (k, v) in kw {
                match k {
                    ":hints" => {
                        let list = unquote(v).list().ok_or_else(|| err(v, ":hints expects a list"))?;
                        for h in list {
                            hints.push(UserHint::from_sexp(h).map_err(|e| err(h, e.to_string()))?);
                        }
                    }
                    _ => return Err(err(v, format!("unknown thm option {k}"))),
                }
            }
            FormKind::Thm { formula: term_from_sexp(&pos[0])?, hints }
        }
        "test?" | "top-level-test?" => {
            arity(s, head, args, 1)?;
            FormKind::Test { formula: term_from_sexp(&args[0])? }
        }
        "set-testing" => {
            let (pos, kw) = keywords(s, args)?;
            if let Some(x) = pos.first() {
                return Err(err(x, "set-testing takes only keyword options"));
            }
            FormKind::SetTesting(kw.into_iter().map(|(k, v)| testing_option(k, v)).collect::<Result<_, _>>()?)
        }
        "include" => {
            arity(s, head, args, 1)?;
            match &args[0].kind {
                SexpKind::Str(p) => FormKind::Include(p.clone()),
                _ => return Err(err(&args[0], "include expects a path string")),
            }
        }
        _ => return Err(err(s, format!("unknown top-level form {head}"))),
    };
    Ok(Form { kind, source: s.clone() })
}

pub fn parse_forms(src: &str) -> Result<Vec<Form>, SyntaxError> {
    read_all(src)?.iter().map(parse_form).collect()
}
