//! S-expression reader with byte spans, the lexical layer under the theory
//! file format. Comments run from `;` to end of line.

use std::fmt;

use num_bigint::BigInt;

/// A contiguous region of the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    /// 1-based line and column of `start`.
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn point(offset: usize, line: u32, col: u32) -> Span {
        Span { start: offset, end: offset, line, col }
    }

    pub fn merge(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end,
            line: self.line,
            col: self.col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SexpKind {
    Atom(String),
    Str(String),
    Int(BigInt),
    List(Vec<Sexp>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub span: Span,
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(s) => Some(s),
            _ => None,
        }
    }

    pub fn string(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn int(&self) -> Option<&BigInt> {
        match &self.kind {
            SexpKind::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn describe(&self) -> &'static str {
        match &self.kind {
            SexpKind::Atom(_) => "a name",
            SexpKind::Str(_) => "a string",
            SexpKind::Int(_) => "an integer",
            SexpKind::List(_) => "a list",
        }
    }
}

/// Malformed input, with the span of the offending text and a description of
/// what was expected there.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> ParseError {
        ParseError { span, message: message.into() }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Reader<'a> {
        Reader { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn here(&self) -> Span {
        Span::point(self.pos, self.line, self.col)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn read_sexp(&mut self) -> Result<Sexp, ParseError> {
        self.skip_trivia();
        let start = self.here();
        match self.peek() {
            None => Err(ParseError::new(start, "unexpected end of input")),
            Some(b'(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => {
                            return Err(ParseError::new(
                                self.here(),
                                "unclosed '(': expected ')'",
                            ))
                        }
                        Some(b')') => {
                            self.bump();
                            let mut span = start;
                            span.end = self.pos;
                            return Ok(Sexp { kind: SexpKind::List(items), span });
                        }
                        Some(_) => items.push(self.read_sexp()?),
                    }
                }
            }
            Some(b')') => Err(ParseError::new(start, "unexpected ')'")),
            Some(b'"') => {
                self.bump();
                let mut out = String::new();
                loop {
                    match self.bump() {
                        None => {
                            return Err(ParseError::new(start, "unterminated string literal"))
                        }
                        Some(b'"') => break,
                        Some(b'\\') => match self.bump() {
                            Some(b'"') => out.push('"'),
                            Some(b'\\') => out.push('\\'),
                            _ => {
                                return Err(ParseError::new(
                                    self.here(),
                                    "unknown escape in string literal",
                                ))
                            }
                        },
                        Some(b) => out.push(b as char),
                    }
                }
                let mut span = start;
                span.end = self.pos;
                Ok(Sexp { kind: SexpKind::Str(out), span })
            }
            Some(_) => {
                let from = self.pos;
                while let Some(b) = self.peek() {
                    if b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b'"' | b';') {
                        break;
                    }
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[from..self.pos])
                    .expect("atom bytes are ascii-checked");
                let mut span = start;
                span.end = self.pos;
                let kind = match text.parse::<BigInt>() {
                    Ok(n) if text.chars().any(|c| c.is_ascii_digit()) => SexpKind::Int(n),
                    _ => SexpKind::Atom(text.to_string()),
                };
                Ok(Sexp { kind, span })
            }
        }
    }
}

/// Reads exactly one s-expression; trailing input is an error.
pub fn read_one(src: &str) -> Result<Sexp, ParseError> {
    let mut r = Reader::new(src);
    r.skip_trivia();
    if r.peek().is_none() {
        return Err(ParseError::new(r.here(), "expected (theory ...)"));
    }
    let sexp = r.read_sexp()?;
    r.skip_trivia();
    if r.peek().is_some() {
        return Err(ParseError::new(
            r.here(),
            "expected end of file after the (theory ...) form",
        ));
    }
    Ok(sexp)
}
