//! Text front end: tokenizer and recursive-descent parser for the expression
//! grammar, vector-field lists, and the catalog file format.
//!
//! Grammar: variables `x1..x<n>`, direction atoms `d1..d<n>` (vector fields
//! only), integer and rational literals `p/q`, operators `+ - * ^` with `^`
//! tightest then unary minus then `*` then additive, functions
//! `sin cos tan sec` applied to a single variable, bare identifiers as
//! parameter symbols. Whitespace is insignificant; `#` starts a line comment
//! in files.

use crate::symexpr::{rat_int, Expr, Rat, Ratio};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(Rat),
    /// `x<k>` coordinate variable.
    Var(u32),
    /// `d<k>` direction atom.
    Dir(u32),
    /// One of `sin cos tan sec`.
    Func(Func),
    /// Bare identifier: a parameter symbol.
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Semicolon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: usize,
    pub lexeme: String,
}

/// Parse failure with byte position and what was expected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at position {pos}{}", expected_suffix(.expected))]
pub struct ParseDiagnostic {
    pub message: String,
    pub pos: usize,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

impl ParseDiagnostic {
    fn new(message: impl Into<String>, pos: usize) -> Self {
        ParseDiagnostic {
            message: message.into(),
            pos,
            expected: Vec::new(),
        }
    }

    fn expecting(message: impl Into<String>, pos: usize, expected: &[&str]) -> Self {
        ParseDiagnostic {
            message: message.into(),
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            '+' => {
                i += 1;
                TokenKind::Plus
            }
            '-' => {
                i += 1;
                TokenKind::Minus
            }
            '*' => {
                i += 1;
                TokenKind::Star
            }
            '^' => {
                i += 1;
                TokenKind::Caret
            }
            '(' => {
                i += 1;
                TokenKind::LParen
            }
            ')' => {
                i += 1;
                TokenKind::RParen
            }
            ';' => {
                i += 1;
                TokenKind::Semicolon
            }
            '0'..='9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let p: i64 = text[i..j].parse().map_err(|_| {
                    ParseDiagnostic::new("integer literal too large", i)
                })?;
                // maximal munch: p/q is a single rational literal
                let mut k = j;
                while k < bytes.len() && (bytes[k] as char).is_whitespace() {
                    k += 1;
                }
                if k < bytes.len() && bytes[k] == b'/' {
                    let mut q0 = k + 1;
                    while q0 < bytes.len() && (bytes[q0] as char).is_whitespace() {
                        q0 += 1;
                    }
                    let mut q1 = q0;
                    while q1 < bytes.len() && bytes[q1].is_ascii_digit() {
                        q1 += 1;
                    }
                    if q1 == q0 {
                        return Err(ParseDiagnostic::expecting(
                            "malformed rational literal",
                            k,
                            &["denominator digits"],
                        ));
                    }
                    let q: i64 = text[q0..q1].parse().map_err(|_| {
                        ParseDiagnostic::new("integer literal too large", q0)
                    })?;
                    if q == 0 {
                        return Err(ParseDiagnostic::new("zero denominator in literal", q0));
                    }
                    i = q1;
                    out.push(Token {
                        kind: TokenKind::Number(Rat::new(p.into(), q.into())),
                        pos: start,
                        lexeme: text[start..i].to_string(),
                    });
                    continue;
                }
                i = j;
                TokenKind::Number(rat_int(p))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &text[i..j];
                i = j;
                ident_kind(word, start)?
            }
            other => {
                return Err(ParseDiagnostic::new(
                    format!("illegal character `{other}`"),
                    i,
                ))
            }
        };
        out.push(Token {
            kind,
            pos: start,
            lexeme: text[start..i].to_string(),
        });
    }
    Ok(out)
}

fn ident_kind(word: &str, pos: usize) -> Result<TokenKind, ParseDiagnostic> {
    match word {
        "sin" => return Ok(TokenKind::Func(Func::Sin)),
        "cos" => return Ok(TokenKind::Func(Func::Cos)),
        "tan" => return Ok(TokenKind::Func(Func::Tan)),
        "sec" => return Ok(TokenKind::Func(Func::Sec)),
        _ => {}
    }
    for (prefix, is_dir) in [("x", false), ("d", true)] {
        if let Some(digits) = word.strip_prefix(prefix) {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let idx: u32 = digits.parse().map_err(|_| {
                    ParseDiagnostic::new("variable index too large", pos)
                })?;
                if idx == 0 {
                    return Err(ParseDiagnostic::new(
                        format!("index 0 not allowed in `{word}`"),
                        pos,
                    ));
                }
                return Ok(if is_dir {
                    TokenKind::Dir(idx)
                } else {
                    TokenKind::Var(idx)
                });
            }
        }
    }
    Ok(TokenKind::Ident(word.to_string()))
}

/// Value flowing through the parser: a scalar plus linear direction parts.
///
/// Scalar expressions must end with empty `dirs`; vector fields must end
/// with a zero scalar part.
#[derive(Debug, Clone)]
struct Value {
    scalar: Expr,
    dirs: BTreeMap<u32, Expr>,
}

impl Value {
    fn scalar(e: Expr) -> Self {
        Value {
            scalar: e,
            dirs: BTreeMap::new(),
        }
    }

    fn dir(k: u32) -> Self {
        let mut dirs = BTreeMap::new();
        dirs.insert(k, Expr::one());
        Value {
            scalar: Expr::zero(),
            dirs,
        }
    }

    fn add(mut self, other: Value) -> Value {
        self.scalar = self.scalar.add(&other.scalar);
        for (k, e) in other.dirs {
            let entry = self.dirs.entry(k).or_insert_with(Expr::zero);
            *entry = entry.add(&e);
        }
        self.dirs.retain(|_, e| !e.is_zero());
        self
    }

    fn neg(mut self) -> Value {
        self.scalar = self.scalar.neg();
        for e in self.dirs.values_mut() {
            *e = e.neg();
        }
        self
    }

    fn mul(self, other: Value, pos: usize) -> Result<Value, ParseDiagnostic> {
        if !self.dirs.is_empty() && !other.dirs.is_empty() {
            return Err(ParseDiagnostic::new(
                "product of two direction terms",
                pos,
            ));
        }
        let (s, mut d) = if self.dirs.is_empty() {
            (self, other)
        } else {
            (other, self)
        };
        for e in d.dirs.values_mut() {
            *e = e.mul(&s.scalar);
        }
        d.scalar = d.scalar.mul(&s.scalar);
        d.dirs.retain(|_, e| !e.is_zero());
        Ok(d)
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
    allow_dirs: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn additive(&mut self) -> Result<Value, ParseDiagnostic> {
        let mut v = self.term()?;
        while let Some(t) = self.peek() {
            match t.kind {
                TokenKind::Plus => {
                    self.bump();
                    v = v.add(self.term()?);
                }
                TokenKind::Minus => {
                    self.bump();
                    v = v.add(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<Value, ParseDiagnostic> {
        let mut v = self.unary()?;
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Star)) {
            let pos = self.here();
            self.bump();
            v = v.mul(self.unary()?, pos)?;
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<Value, ParseDiagnostic> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Minus)) {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Value, ParseDiagnostic> {
        let base = self.atom()?;
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Caret)) {
            let pos = self.here();
            self.bump();
            let exp_tok = self.bump().cloned().ok_or_else(|| {
                ParseDiagnostic::expecting("missing exponent", pos, &["integer literal"])
            })?;
            let TokenKind::Number(n) = &exp_tok.kind else {
                return Err(ParseDiagnostic::expecting(
                    "exponent must be an integer literal",
                    exp_tok.pos,
                    &["integer literal"],
                ));
            };
            if !n.is_integer() {
                return Err(ParseDiagnostic::new(
                    "exponent must be an integer",
                    exp_tok.pos,
                ));
            }
            let k: u32 = n.to_integer().try_into().map_err(|_| {
                ParseDiagnostic::new("exponent must be a small non-negative integer", exp_tok.pos)
            })?;
            if !base.dirs.is_empty() {
                return Err(ParseDiagnostic::new("direction atom raised to a power", pos));
            }
            return Ok(Value::scalar(base.scalar.pow(k)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Value, ParseDiagnostic> {
        let pos = self.here();
        let Some(tok) = self.bump().cloned() else {
            return Err(ParseDiagnostic::expecting(
                "unexpected end of input",
                pos,
                &["expression"],
            ));
        };
        match tok.kind {
            TokenKind::Number(n) => Ok(Value::scalar(Expr::constant(n))),
            TokenKind::Var(v) => Ok(Value::scalar(Expr::var(v))),
            TokenKind::Ident(name) => Ok(Value::scalar(Expr::param(&name))),
            TokenKind::Dir(k) => {
                if !self.allow_dirs {
                    Err(ParseDiagnostic::new(
                        format!("direction atom `d{k}` not allowed in a scalar expression"),
                        tok.pos,
                    ))
                } else {
                    Ok(Value::dir(k))
                }
            }
            TokenKind::Func(f) => {
                let lp = self.bump().cloned();
                if !matches!(lp.as_ref().map(|t| &t.kind), Some(TokenKind::LParen)) {
                    return Err(ParseDiagnostic::expecting(
                        "function application requires parentheses",
                        lp.map_or(self.end, |t| t.pos),
                        &["("],
                    ));
                }
                let arg = self.bump().cloned();
                let Some(TokenKind::Var(v)) = arg.as_ref().map(|t| t.kind.clone()) else {
                    return Err(ParseDiagnostic::expecting(
                        "function argument must be a single variable",
                        arg.map_or(self.end, |t| t.pos),
                        &["x<k>"],
                    ));
                };
                let rp = self.bump().cloned();
                if !matches!(rp.as_ref().map(|t| &t.kind), Some(TokenKind::RParen)) {
                    return Err(ParseDiagnostic::expecting(
                        "unclosed function application",
                        rp.map_or(self.end, |t| t.pos),
                        &[")"],
                    ));
                }
                Ok(Value::scalar(match f {
                    Func::Sin => Expr::sin(v),
                    Func::Cos => Expr::cos(v),
                    Func::Tan => Expr::tan(v),
                    Func::Sec => Expr::sec(v),
                }))
            }
            TokenKind::LParen => {
                let v = self.additive()?;
                let rp = self.bump().cloned();
                if !matches!(rp.as_ref().map(|t| &t.kind), Some(TokenKind::RParen)) {
                    return Err(ParseDiagnostic::expecting(
                        "unclosed parenthesis",
                        rp.map_or(self.end, |t| t.pos),
                        &[")"],
                    ));
                }
                Ok(v)
            }
            other => Err(ParseDiagnostic::expecting(
                format!("unexpected token `{:?}`", other),
                tok.pos,
                &["expression"],
            )),
        }
    }
}

/// Parse a scalar expression; variable indices must not exceed `n` when
/// `n > 0` (pass 0 to skip the bound check).
pub fn parse_expr(text: &str, n: u32) -> Result<Expr, ParseDiagnostic> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
        allow_dirs: false,
    };
    let v = p.additive()?;
    if let Some(t) = p.peek() {
        return Err(ParseDiagnostic::new(
            format!("trailing input `{}`", t.lexeme),
            t.pos,
        ));
    }
    if n > 0 {
        let max = v.scalar.max_var();
        if max > n {
            return Err(ParseDiagnostic::new(
                format!("variable x{max} out of range (n = {n})"),
                0,
            ));
        }
    }
    Ok(v.scalar)
}

/// Parsed vector field as sparse direction components.
#[derive(Debug, Clone)]
pub struct FieldComponents {
    pub comps: BTreeMap<u32, Expr>,
}

impl FieldComponents {
    pub fn max_index(&self) -> u32 {
        let dir = self.comps.keys().max().copied().unwrap_or(0);
        let var = self
            .comps
            .values()
            .map(|e| e.max_var())
            .max()
            .unwrap_or(0);
        dir.max(var)
    }
}

/// Parse one vector field: semicolon-separated components, each an additive
/// combination of `<expr>*d<k>` terms.
pub fn parse_field(text: &str) -> Result<FieldComponents, ParseDiagnostic> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseDiagnostic::new("empty vector field", 0));
    }
    // split on top-level semicolons; empty chunks are diagnostics
    let mut chunks: Vec<&[Token]> = Vec::new();
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.kind == TokenKind::Semicolon {
            chunks.push(&tokens[start..i]);
            start = i + 1;
        }
    }
    chunks.push(&tokens[start..]);
    let mut total = Value::scalar(Expr::zero());
    for chunk in chunks {
        if chunk.is_empty() {
            return Err(ParseDiagnostic::new("empty component between semicolons", 0));
        }
        let mut p = Parser {
            tokens: chunk,
            pos: 0,
            end: text.len(),
            allow_dirs: true,
        };
        let v = p.additive()?;
        if let Some(t) = p.peek() {
            return Err(ParseDiagnostic::new(
                format!("trailing input `{}`", t.lexeme),
                t.pos,
            ));
        }
        total = total.add(v);
    }
    if !total.scalar.is_zero() {
        return Err(ParseDiagnostic::new(
            format!("term without a direction atom: {}", total.scalar),
            0,
        ));
    }
    Ok(FieldComponents { comps: total.dirs })
}

/// Parse a newline-separated list of vector fields; `#` lines are comments.
///
/// All fields share a common `n`, inferred as the maximal index seen unless
/// `n_override > 0`.
pub fn parse_field_list(
    text: &str,
    n_override: u32,
) -> Result<Vec<crate::liefield::VectorField>, ParseDiagnostic> {
    let mut parsed = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        parsed.push(parse_field(line)?);
    }
    if parsed.is_empty() {
        return Err(ParseDiagnostic::new("no vector fields in input", 0));
    }
    let inferred = parsed.iter().map(|f| f.max_index()).max().unwrap_or(1).max(1);
    let n = if n_override > 0 { n_override } else { inferred };
    if n < inferred {
        return Err(ParseDiagnostic::new(
            format!("override n = {n} below highest index {inferred}"),
            0,
        ));
    }
    Ok(parsed
        .into_iter()
        .map(|f| {
            let coeffs = (1..=n)
                .map(|a| {
                    f.comps
                        .get(&a)
                        .map(|e| Ratio::from_expr(e.clone()))
                        .unwrap_or_else(Ratio::zero)
                })
                .collect();
            crate::liefield::VectorField::new(n, coeffs).expect("consistent by construction")
        })
        .collect())
}

impl fmt::Display for FieldComponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0*d1");
        }
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|(k, e)| {
                if e.is_one() {
                    format!("d{k}")
                } else {
                    format!("({e})*d{k}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::rat;

    #[test]
    fn tokenize_examples() {
        let ts = tokenize("x12").unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].kind, TokenKind::Var(12));

        let ts = tokenize("sin(x1)^2").unwrap();
        let kinds: Vec<_> = ts.iter().map(|t| t.kind.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Func(Func::Sin),
                TokenKind::LParen,
                TokenKind::Var(1),
                TokenKind::RParen,
                TokenKind::Caret,
                TokenKind::Number(rat_int(2)),
            ]
        );

        let err = tokenize("x1 $ x2").unwrap_err();
        assert_eq!(err.pos, 3);
    }

    #[test]
    fn rational_literal() {
        let e = parse_expr("1/2*x1", 0).unwrap();
        assert_eq!(e, Expr::var(1).scale(&rat(1, 2)));
    }

    #[test]
    fn parse_expr_examples() {
        let e = parse_expr("x1^2 + 2*x1*x2", 0).unwrap();
        assert_eq!(e.num_terms(), 2);

        let e = parse_expr("-sin(x1)*tan(x2)", 0).unwrap();
        assert_eq!(e, Expr::sin(1).mul(&Expr::tan(2)).neg());

        let e = parse_expr("sin(x1)^2 + cos(x1)^2 - 1", 0).unwrap();
        assert!(e.is_zero());
    }

    #[test]
    fn variable_out_of_range() {
        assert!(parse_expr("x3", 2).is_err());
        assert!(parse_expr("x3", 3).is_ok());
    }

    #[test]
    fn precedence_and_unary_minus() {
        // ^ binds tighter than unary minus: -x1^2 = -(x1^2)
        let e = parse_expr("-x1^2", 0).unwrap();
        assert_eq!(e, Expr::var(1).pow(2).neg());
        // * then additive
        let e = parse_expr("1 + 2*x1^2", 0).unwrap();
        assert_eq!(
            e,
            Expr::one().add(&Expr::var(1).pow(2).scale(&rat_int(2)))
        );
    }

    #[test]
    fn parenthesized_power() {
        let e = parse_expr("(x1+x2)^2", 0).unwrap();
        let want = Expr::var(1).add(&Expr::var(2)).pow(2);
        assert_eq!(e, want);
    }

    #[test]
    fn parameter_symbols() {
        let e = parse_expr("c*x3 + alpha", 0).unwrap();
        let want = Expr::param("c").mul(&Expr::var(3)).add(&Expr::param("alpha"));
        assert_eq!(e, want);
    }

    #[test]
    fn field_basics() {
        let f = parse_field("d1").unwrap();
        assert_eq!(f.comps.len(), 1);
        assert!(f.comps[&1].is_one());

        let f = parse_field("-sin(x1)*tan(x2)*d1 - cos(x1)*d2").unwrap();
        assert_eq!(f.comps[&1], Expr::sin(1).mul(&Expr::tan(2)).neg());
        assert_eq!(f.comps[&2], Expr::cos(1).neg());

        let f = parse_field("x1*d1 + x2*d2; x2*d3").unwrap();
        assert_eq!(f.comps.len(), 3);
    }

    #[test]
    fn field_errors() {
        assert!(parse_field("x2*d1;; d2").is_err());
        assert!(parse_field("d1*d2").is_err());
        assert!(parse_field("x1*d1 + 5").is_err());
        assert!(parse_field("d1^2").is_err());
    }

    #[test]
    fn field_list_inference() {
        let fields = parse_field_list(
            "# comment\nd1\nx1*d1 + x2*d2\nx1^2*d1 + 2*x1*x2*d2 + x2*d3\n",
            0,
        )
        .unwrap();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[0].n(), 3);
    }

    #[test]
    fn display_round_trip() {
        let texts = [
            "x1^2*d1 + 2*x1*x2*d2 + x2*d3",
            "-sin(x1)*tan(x2)*d1 - cos(x1)*d2 + sin(x1)*sec(x2)*d3",
        ];
        for t in texts {
            let f = parse_field(t).unwrap();
            let f2 = parse_field(&f.to_string()).unwrap();
            assert_eq!(f.comps, f2.comps, "round trip failed for {t}");
        }
    }

    #[test]
    fn no_panic_on_garbage() {
        for garbage in ["^^^", "((((", "sin", "sin(", "sin(x1", "x1^^2", "1/0", "x0", "*"] {
            let _ = parse_expr(garbage, 0);
            let _ = parse_field(garbage);
        }
    }
}
