//! Lisp-style reader shared by the domain, problem, and grounded-format parsers.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExprKind {
    /// Lower-cased identifier, including `?variables` and operator symbols.
    Symbol(String),
    /// `:keyword`, stored lower-cased with the leading colon.
    Keyword(String),
    Number(BigRational),
    List(Vec<SExpr>),
}

#[derive(Debug, Clone)]
pub struct SExpr {
    pub kind: SExprKind,
    pub loc: Loc,
}

/// Structural equality ignores source locations.
impl PartialEq for SExpr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl SExpr {
    pub fn symbol(name: &str) -> Self {
        SExpr { kind: SExprKind::Symbol(name.to_string()), loc: Loc::default() }
    }

    pub fn list(items: Vec<SExpr>) -> Self {
        SExpr { kind: SExprKind::List(items), loc: Loc::default() }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match &self.kind {
            SExprKind::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_keyword(&self) -> Option<&str> {
        match &self.kind {
            SExprKind::Keyword(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match &self.kind {
            SExprKind::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<&BigRational> {
        match &self.kind {
            SExprKind::Number(n) => Some(n),
            _ => None,
        }
    }

    /// First element of a list when it is a symbol, e.g. `and` in `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(SExpr::as_symbol)
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SExprKind::Symbol(s) | SExprKind::Keyword(s) => f.write_str(s),
            SExprKind::Number(n) => write_rational(f, n),
            SExprKind::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Terminating decimals print in decimal notation so re-reading is exact; any
/// other ratio falls back to `(/ n d)`.
fn write_rational(f: &mut fmt::Formatter<'_>, n: &BigRational) -> fmt::Result {
    if n.is_integer() {
        return write!(f, "{}", n.numer());
    }
    let ten = BigInt::from(10);
    let mut scale: BigInt = One::one();
    for digits in 1..=64usize {
        scale *= &ten;
        if (&scale % n.denom()).is_zero() {
            let scaled = n.numer() * (&scale / n.denom());
            let sign = if scaled < BigInt::zero() { "-" } else { "" };
            let magnitude = scaled.magnitude().to_string();
            let padded = format!("{magnitude:0>width$}", width = digits + 1);
            let (int_part, frac_part) = padded.split_at(padded.len() - digits);
            return write!(f, "{sign}{int_part}.{frac_part}");
        }
    }
    write!(f, "(/ {} {})", n.numer(), n.denom())
}

fn parse_number(text: &str) -> Option<BigRational> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if digits.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut numer: BigInt = Zero::zero();
    let ten = BigInt::from(10);
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer * &ten + BigInt::from(c.to_digit(10).unwrap());
    }
    let mut denom: BigInt = One::one();
    for _ in 0..frac_part.len() {
        denom *= &ten;
    }
    if negative {
        numer = -numer;
    }
    Some(BigRational::new(numer, denom))
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')' || c == ';'
}

/// Reads every top-level expression in `text`. Comments run from `;` to end of line.
pub fn tokenize(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut stack: Vec<(Loc, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 0u32);

    while let Some(c) = chars.next() {
        if c == '\n' {
            line += 1;
            col = 0;
            continue;
        }
        col += 1;
        let here = Loc { line, col };
        match c {
            c if c.is_whitespace() => {}
            ';' => {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => stack.push((here, Vec::new())),
            ')' => {
                let (loc, items) = stack.pop().ok_or_else(|| ParseError::at(here, "unexpected ')'"))?;
                let node = SExpr { kind: SExprKind::List(items), loc };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(node),
                    None => top.push(node),
                }
            }
            _ => {
                let mut word = String::new();
                word.push(c);
                while let Some(&n) = chars.peek() {
                    if is_delimiter(n) {
                        break;
                    }
                    word.push(n);
                    chars.next();
                    col += 1;
                }
                let word = word.to_lowercase();
                let kind = if let Some(n) = parse_number(&word) {
                    SExprKind::Number(n)
                } else if word.starts_with(':') {
                    SExprKind::Keyword(word)
                } else {
                    SExprKind::Symbol(word)
                };
                let node = SExpr { kind, loc: here };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
    if let Some((loc, _)) = stack.pop() {
        return Err(ParseError::at(loc, "unbalanced '(' never closed"));
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_numeric_assignment() {
        let exprs = tokenize("(= (fuel plane) 750)").unwrap();
        assert_eq!(exprs.len(), 1);
        let items = exprs[0].as_list().unwrap();
        assert_eq!(items[0].as_symbol(), Some("="));
        let inner = items[1].as_list().unwrap();
        assert_eq!(inner[0].as_symbol(), Some("fuel"));
        assert_eq!(inner[1].as_symbol(), Some("plane"));
        assert_eq!(items[2].as_number(), Some(&BigRational::from_integer(750.into())));
    }

    #[test]
    fn empty_input_is_empty() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  ; just a comment\n").unwrap().is_empty());
    }

    #[test]
    fn unbalanced_reports_innermost_open() {
        let err = tokenize("((").unwrap_err();
        assert_eq!(err.loc, Some(Loc { line: 1, col: 2 }));
        let err = tokenize("(a))").unwrap_err();
        assert_eq!(err.loc, Some(Loc { line: 1, col: 4 }));
    }

    #[test]
    fn decimals_are_exact() {
        let exprs = tokenize("12.5 -0.25 .5").unwrap();
        let nums: Vec<_> = exprs.iter().map(|e| e.as_number().unwrap().clone()).collect();
        assert_eq!(nums[0], BigRational::new(25.into(), 2.into()));
        assert_eq!(nums[1], BigRational::new((-1).into(), 4.into()));
        assert_eq!(nums[2], BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn symbols_fold_case_and_keywords_split() {
        let exprs = tokenize("(:Requirements :TYPING Foo ?X)").unwrap();
        let items = exprs[0].as_list().unwrap();
        assert_eq!(items[0].as_keyword(), Some(":requirements"));
        assert_eq!(items[1].as_keyword(), Some(":typing"));
        assert_eq!(items[2].as_symbol(), Some("foo"));
        assert_eq!(items[3].as_symbol(), Some("?x"));
    }

    #[test]
    fn tracks_lines_and_columns() {
        let exprs = tokenize("\n  (a\n   b)").unwrap();
        assert_eq!(exprs[0].loc, Loc { line: 2, col: 3 });
        let items = exprs[0].as_list().unwrap();
        assert_eq!(items[1].loc, Loc { line: 3, col: 4 });
    }

    fn arb_sexpr() -> impl Strategy<Value = SExpr> {
        let leaf = prop_oneof![
            "[a-z][a-z0-9-]{0,6}".prop_map(|s| SExpr::symbol(&s)),
            "[a-z]{1,5}".prop_map(|s| SExpr { kind: SExprKind::Keyword(format!(":{s}")), loc: Loc::default() }),
            (-100_000i64..100_000, 0u32..4).prop_map(|(n, e)| SExpr {
                kind: SExprKind::Number(BigRational::new(n.into(), BigInt::from(10).pow(e))),
                loc: Loc::default()
            }),
        ];
        leaf.prop_recursive(4, 32, 6, |inner| prop::collection::vec(inner, 0..6).prop_map(SExpr::list))
    }

    proptest! {
        #[test]
        fn print_then_read_is_identity(e in arb_sexpr()) {
            let text = e.to_string();
            let back = tokenize(&text).unwrap();
            prop_assert_eq!(back.len(), 1);
            prop_assert_eq!(&back[0], &e);
        }
    }
}
