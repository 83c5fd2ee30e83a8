//! The reduced value universe: exact rationals, symbols, characters,
//! strings and cons pairs.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Serialize, Serializer};

/// A case-sensitive interned-by-value name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_keyword(&self) -> bool {
        self.0.starts_with(':') && self.0.len() > 1
    }

    /// True for the two self-evaluating boolean symbols and for keywords.
    pub fn is_constant(&self) -> bool {
        matches!(&*self.0, "t" | "nil") || self.is_keyword()
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbol(f, &self.0)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Num(BigRational),
    Sym(Symbol),
    Char(char),
    Str(Arc<str>),
    Cons(Arc<Value>, Arc<Value>),
}

impl Value {
    pub fn nil() -> Value {
        Value::Sym(Symbol::new("nil"))
    }

    pub fn t() -> Value {
        Value::Sym(Symbol::new("t"))
    }

    pub fn bool(b: bool) -> Value {
        if b {
            Value::t()
        } else {
            Value::nil()
        }
    }

    pub fn int(i: i64) -> Value {
        Value::Num(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn big_int(i: BigInt) -> Value {
        Value::Num(BigRational::from_integer(i))
    }

    /// Panics when `den` is zero.
    pub fn rat(num: i64, den: i64) -> Value {
        Value::Num(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn sym(name: &str) -> Value {
        Value::Sym(Symbol::new(name))
    }

    pub fn string(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }

    pub fn cons(car: Value, cdr: Value) -> Value {
        Value::Cons(Arc::new(car), Arc::new(cdr))
    }

    pub fn list<I>(items: I) -> Value
    where
        I: IntoIterator<Item = Value>,
        I::IntoIter: DoubleEndedIterator,
    {
        items
            .into_iter()
            .rev()
            .fold(Value::nil(), |acc, v| Value::cons(v, acc))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Value::Sym(s) if s.as_str() == "nil")
    }

    pub fn is_true(&self) -> bool {
        !self.is_nil()
    }

    pub fn is_cons(&self) -> bool {
        matches!(self, Value::Cons(..))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Value::Num(r) if r.is_integer())
    }

    pub fn car(&self) -> Value {
        match self {
            Value::Cons(a, _) => (**a).clone(),
            _ => Value::nil(),
        }
    }

    pub fn cdr(&self) -> Value {
        match self {
            Value::Cons(_, d) => (**d).clone(),
            _ => Value::nil(),
        }
    }

    /// Elements of the cons chain, ignoring whatever terminates it.
    pub fn list_items(&self) -> Vec<Value> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Value::Cons(a, d) = cur {
            out.push((**a).clone());
            cur = d;
        }
        out
    }

    pub fn is_true_list(&self) -> bool {
        let mut cur = self;
        loop {
            match cur {
                Value::Cons(_, d) => cur = d,
                other => return other.is_nil(),
            }
        }
    }

    pub fn len(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let Value::Cons(_, d) = cur {
            n += 1;
            cur = d;
        }
        n
    }

    /// Printer that upcases plain symbols, used when echoing report text.
    pub fn report(&self) -> ReportStyle<'_> {
        ReportStyle(self)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_value(f, self, false)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub struct ReportStyle<'a>(&'a Value);

impl fmt::Display for ReportStyle<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_value(f, self.0, true)
    }
}

fn write_value(f: &mut fmt::Formatter<'_>, v: &Value, report: bool) -> fmt::Result {
    match v {
        Value::Num(r) => write_rational(f, r),
        Value::Sym(s) if report => write_report_symbol(f, s.as_str()),
        Value::Sym(s) => write_symbol(f, s.as_str()),
        Value::Char(c) => write_char(f, *c),
        Value::Str(s) => write_string(f, s),
        Value::Cons(..) => {
            f.write_str("(")?;
            let mut cur = v;
            let mut first = true;
            loop {
                match cur {
                    Value::Cons(a, d) => {
                        if !first {
                            f.write_str(" ")?;
                        }
                        first = false;
                        write_value(f, a, report)?;
                        cur = d;
                    }
                    tail if tail.is_nil() => break,
                    tail => {
                        f.write_str(" . ")?;
                        write_value(f, tail, report)?;
                        break;
                    }
                }
            }
            f.write_str(")")
        }
    }
}

pub fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_char(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    match c {
        ' ' => f.write_str("#\\Space"),
        '\n' => f.write_str("#\\Newline"),
        '\t' => f.write_str("#\\Tab"),
        c => write!(f, "#\\{c}"),
    }
}

fn write_string(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

const SYMBOL_PUNCT: &str = "-+*/<>=!?_&%$.:~^@";

/// Whether a symbol name reads back as the same symbol without bars.
pub fn is_plain_symbol_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || SYMBOL_PUNCT.contains(c))
        && crate::sexp::parse_number(name).is_none()
}

fn write_symbol(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_symbol_name(name) {
        f.write_str(name)
    } else {
        write_barred(f, name)
    }
}

fn write_barred(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    f.write_str("|")?;
    for c in name.chars() {
        if c == '|' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("|")
}

fn write_report_symbol(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_symbol_name(name) && !name.chars().any(char::is_uppercase) {
        f.write_str(&name.to_uppercase())
    } else {
        write_barred(f, name)
    }
}

/// Canonical report spelling of a variable or type name (`x1` prints `X1`).
pub fn report_name(s: &Symbol) -> String {
    format!("{}", Value::Sym(s.clone()).report())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_normalized() {
        assert_eq!(Value::rat(2, 4), Value::rat(1, 2));
        assert_eq!(Value::rat(3, -6).to_string(), "-1/2");
        assert_eq!(Value::rat(4, 2).to_string(), "2");
    }

    #[test]
    fn list_printing() {
        let v = Value::list([Value::int(23), Value::int(-1), Value::int(0)]);
        assert_eq!(v.to_string(), "(23 -1 0)");
        let dotted = Value::cons(Value::sym("a"), Value::int(1));
        assert_eq!(dotted.to_string(), "(a . 1)");
        assert!(Value::nil().is_true_list());
        assert!(!dotted.is_true_list());
    }

    #[test]
    fn report_style_upcases_plain_symbols() {
        let v = Value::list([Value::sym("u"), Value::sym("H")]);
        assert_eq!(v.report().to_string(), "(U |H|)");
        assert_eq!(Value::nil().report().to_string(), "NIL");
        assert_eq!(Value::string("ba").report().to_string(), "\"ba\"");
    }

    #[test]
    fn odd_symbols_are_barred() {
        assert_eq!(Value::sym("12").to_string(), "|12|");
        assert_eq!(Value::sym("a b").to_string(), "|a b|");
        assert_eq!(Value::sym("").to_string(), "||");
    }
}
