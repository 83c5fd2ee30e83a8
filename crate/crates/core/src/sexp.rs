//! S-expression reader with line/column positions.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::SyntaxError;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SexpKind {
    Num(BigRational),
    /// `barred` symbols were written `|...|` and are never reinterpreted.
    Sym { name: String, barred: bool },
    Str(String),
    Char(char),
    List(Vec<Sexp>),
    Dotted(Vec<Sexp>, Box<Sexp>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub pos: Pos,
}

impl Sexp {
    pub fn symbol(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Sym { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            _ => None,
        }
    }

    /// Head symbol of a list form.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::symbol)
    }

    pub fn is_keyword(&self) -> bool {
        self.symbol().is_some_and(|s| s.starts_with(':') && s.len() > 1)
    }

    /// Reads this expression as quoted data.
    pub fn to_value(&self) -> Value {
        match &self.kind {
            SexpKind::Num(r) => Value::Num(r.clone()),
            SexpKind::Sym { name, .. } => Value::sym(name),
            SexpKind::Str(s) => Value::string(s),
            SexpKind::Char(c) => Value::Char(*c),
            SexpKind::List(items) => Value::list(items.iter().map(Sexp::to_value).collect::<Vec<_>>()),
            SexpKind::Dotted(items, tail) => items
                .iter()
                .rev()
                .fold(tail.to_value(), |acc, s| Value::cons(s.to_value(), acc)),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Sym { name, barred: true } => {
                f.write_str("|")?;
                for c in name.chars() {
                    if c == '|' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("|")
            }
            SexpKind::Sym { name, .. } => f.write_str(name),
            SexpKind::Num(_) | SexpKind::Str(_) | SexpKind::Char(_) => write!(f, "{}", self.to_value()),
            SexpKind::List(items) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            SexpKind::Dotted(items, tail) => {
                f.write_str("(")?;
                for x in items {
                    write!(f, "{x} ")?;
                }
                write!(f, ". {tail})")
            }
        }
    }
}

/// Parses `123`, `-4`, `+7`, `2/3`, `-10/4`.
pub fn parse_number(tok: &str) -> Option<BigRational> {
    let (sign, body) = match tok.as_bytes().first()? {
        b'-' => (-1, &tok[1..]),
        b'+' => (1, &tok[1..]),
        _ => (1, tok),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => {
            if !digits(n) || !digits(d) {
                return None;
            }
            (n.parse::<BigInt>().ok()?, d.parse::<BigInt>().ok()?)
        }
        None => {
            if !digits(body) {
                return None;
            }
            (body.parse::<BigInt>().ok()?, BigInt::from(1))
        }
    };
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num * sign, den))
}

pub fn read_all(src: &str) -> Result<Vec<Sexp>, SyntaxError> {
    match read_prefix(src) {
        (out, None) => Ok(out),
        (_, Some(e)) => Err(e),
    }
}

/// Every expression before the first syntax error, and that error.
pub fn read_prefix(src: &str) -> (Vec<Sexp>, Option<SyntaxError>) {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    loop {
        r.skip_ws();
        if r.peek().is_none() {
            return (out, None);
        }
        match r.read() {
            Ok(s) => out.push(s),
            Err(e) => return (out, Some(e)),
        }
    }
}

/// Reads exactly one expression (surrounding whitespace allowed).
pub fn read_one(src: &str) -> Result<Sexp, SyntaxError> {
    let mut all = read_all(src)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(SyntaxError::new(Pos { line: 1, col: 1 }, "expected an expression")),
        _ => Err(SyntaxError::new(all[1].pos, "unexpected trailing input")),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { chars: src.chars().peekable(), line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, SyntaxError> {
        self.skip_ws();
        let pos = self.pos();
        let c = self
            .peek()
            .ok_or_else(|| SyntaxError::new(pos, "unexpected end of input"))?;
        match c {
            '(' => {
                self.bump();
                self.read_list(pos)
            }
            ')' => Err(SyntaxError::new(pos, "unbalanced ')'")),
            '\'' => {
                self.bump();
                let inner = self.read()?;
                let quote = Sexp { kind: SexpKind::Sym { name: "quote".into(), barred: false }, pos };
                Ok(Sexp { kind: SexpKind::List(vec![quote, inner]), pos })
            }
            '"' => {
                self.bump();
                self.read_string(pos)
            }
            '#' => {
                self.bump();
                self.read_char(pos)
            }
            _ => self.read_atom(pos),
        }
    }

    fn read_list(&mut self, open: Pos) -> Result<Sexp, SyntaxError> {
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(SyntaxError::new(open, "unbalanced '(': missing ')'")),
                Some(')') => {
                    self.bump();
                    return Ok(Sexp { kind: SexpKind::List(items), pos: open });
                }
                Some(_) => {
                    let item = self.read()?;
                    if item.symbol() == Some(".") && matches!(item.kind, SexpKind::Sym { barred: false, .. }) {
                        if items.is_empty() {
                            return Err(SyntaxError::new(item.pos, "misplaced '.'"));
                        }
                        let tail = self.read()?;
                        self.skip_ws();
                        match self.bump() {
                            Some(')') => {
                                return Ok(Sexp { kind: SexpKind::Dotted(items, Box::new(tail)), pos: open })
                            }
                            _ => return Err(SyntaxError::new(item.pos, "expected ')' after dotted tail")),
                        }
                    }
                    items.push(item);
                }
            }
        }
    }

    fn read_string(&mut self, pos: Pos) -> Result<Sexp, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(SyntaxError::new(pos, "unterminated string")),
                Some('"') => return Ok(Sexp { kind: SexpKind::Str(s), pos }),
                Some('\\') => match self.bump() {
                    Some(c) => s.push(c),
                    None => return Err(SyntaxError::new(pos, "unterminated string")),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn read_char(&mut self, pos: Pos) -> Result<Sexp, SyntaxError> {
        if self.bump() != Some('\\') {
            return Err(SyntaxError::new(pos, "expected '\\' after '#'"));
        }
        let first = self
            .bump()
            .ok_or_else(|| SyntaxError::new(pos, "unterminated character literal"))?;
        let mut name = String::from(first);
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let c = if name.chars().count() == 1 {
            first
        } else {
            match name.to_ascii_lowercase().as_str() {
                "space" => ' ',
                "newline" => '\n',
                "tab" => '\t',
                _ => return Err(SyntaxError::new(pos, format!("unknown character name #\\{name}"))),
            }
        };
        Ok(Sexp { kind: SexpKind::Char(c), pos })
    }

    fn read_atom(&mut self, pos: Pos) -> Result<Sexp, SyntaxError> {
        let mut tok = String::new();
        let mut barred = false;
        while let Some(c) = self.peek() {
            if c == '|' {
                barred = true;
                self.bump();
                loop {
                    match self.bump() {
                        None => return Err(SyntaxError::new(pos, "unterminated |symbol|")),
                        Some('|') => break,
                        Some('\\') => {
                            if let Some(c) = self.bump() {
                                tok.push(c)
                            }
                        }
                        Some(c) => tok.push(c),
                    }
                }
            } else if c.is_whitespace() || matches!(c, '(' | ')' | '\'' | '"' | ';') {
                break;
            } else {
                tok.push(c);
                self.bump();
            }
        }
        if !barred {
            if let Some(r) = parse_number(&tok) {
                return Ok(Sexp { kind: SexpKind::Num(r), pos });
            }
        }
        Ok(Sexp { kind: SexpKind::Sym { name: tok, barred }, pos })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let forms = read_all("; comment\n(defdata loi (listof integer))\n  (f 'x)").unwrap();
        assert_eq!(forms.len(), 2);
        assert_eq!(forms[0].pos, Pos { line: 2, col: 1 });
        assert_eq!(forms[1].pos, Pos { line: 3, col: 3 });
        assert_eq!(forms[1].to_value().to_string(), "(f (quote x))");
    }

    #[test]
    fn literals() {
        let v = read_one("(1/7 -3 \"ba\" #\\a #\\Space |h| (a . b))").unwrap().to_value();
        assert_eq!(v.to_string(), "(1/7 -3 \"ba\" #\\a #\\Space h (a . b))");
        assert_eq!(parse_number("6/4"), Some(BigRational::new(3.into(), 2.into())));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("-"), None);
    }

    #[test]
    fn unbalanced_parens_report_position() {
        let e = read_all("(a (b c)").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 1 });
        let e = read_all("\n  )").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 3 });
    }
}
