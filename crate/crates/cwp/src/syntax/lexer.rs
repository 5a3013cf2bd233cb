//! Shared lexer for the modeling language, scenario files, and the
//! canonical triple text format.

use std::fmt;

use thiserror::Error;

use crate::term::DateTime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `prefix:local`
    Name(String),
    /// `?x`, stored without the question mark.
    Variable(String),
    Str(String),
    Int(i64),
    Bool(bool),
    DateTime(DateTime),
    /// `<...>` after a prefix declaration.
    Iri(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Dot,
    DotDot,
    Comma,
    Arrow,
    Star,
    AndAnd,
    OrOr,
    Bang,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{}`", s),
            Tok::Name(s) => write!(f, "`{}`", s),
            Tok::Variable(s) => write!(f, "`?{}`", s),
            Tok::Str(s) => write!(f, "\"{}\"", s),
            Tok::Int(i) => write!(f, "{}", i),
            Tok::Bool(b) => write!(f, "{}", b),
            Tok::DateTime(dt) => write!(f, "{}", dt),
            Tok::Iri(s) => write!(f, "<{}>", s),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Star => f.write_str("`*`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// A token with its 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

pub fn lex(text: &str) -> Result<Vec<Spanned>, LexError> {
    let mut lexer = Lexer {
        src: text.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let spanned = lexer.next_token()?;
        let done = spanned.tok == Tok::Eof;
        out.push(spanned);
        if done {
            return Ok(out);
        }
    }
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'-'
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.src.get(self.pos + offset).copied()
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

    fn error(&self, line: u32, col: u32, message: impl Into<String>) -> LexError {
        LexError {
            line,
            col,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Result<Spanned, LexError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let spanned = |tok| Spanned { tok, line, col };
        let b = match self.peek() {
            None => return Ok(spanned(Tok::Eof)),
            Some(b) => b,
        };
        match b {
            b'{' => {
                self.bump();
                Ok(spanned(Tok::LBrace))
            }
            b'}' => {
                self.bump();
                Ok(spanned(Tok::RBrace))
            }
            b'(' => {
                self.bump();
                Ok(spanned(Tok::LParen))
            }
            b')' => {
                self.bump();
                Ok(spanned(Tok::RParen))
            }
            b'[' => {
                self.bump();
                Ok(spanned(Tok::LBracket))
            }
            b']' => {
                self.bump();
                Ok(spanned(Tok::RBracket))
            }
            b',' => {
                self.bump();
                Ok(spanned(Tok::Comma))
            }
            b'*' => {
                self.bump();
                Ok(spanned(Tok::Star))
            }
            b':' => {
                self.bump();
                Ok(spanned(Tok::Colon))
            }
            b'.' => {
                self.bump();
                if self.peek() == Some(b'.') {
                    self.bump();
                    Ok(spanned(Tok::DotDot))
                } else {
                    Ok(spanned(Tok::Dot))
                }
            }
            b'&' => {
                self.bump();
                if self.peek() == Some(b'&') {
                    self.bump();
                    Ok(spanned(Tok::AndAnd))
                } else {
                    Err(self.error(line, col, "expected `&&`"))
                }
            }
            b'|' => {
                self.bump();
                if self.peek() == Some(b'|') {
                    self.bump();
                    Ok(spanned(Tok::OrOr))
                } else {
                    Err(self.error(line, col, "expected `||`"))
                }
            }
            b'!' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Ok(spanned(Tok::Ne))
                } else {
                    Ok(spanned(Tok::Bang))
                }
            }
            b'=' => {
                self.bump();
                Ok(spanned(Tok::Eq))
            }
            b'<' => self.lt_or_iri(line, col),
            b'>' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Ok(spanned(Tok::Ge))
                } else {
                    Ok(spanned(Tok::Gt))
                }
            }
            b'?' => {
                self.bump();
                let name = self.scan_ident_text();
                if name.is_empty() {
                    return Err(self.error(line, col, "expected a variable name after `?`"));
                }
                Ok(spanned(Tok::Variable(name)))
            }
            b'"' => self.string_or_datetime(line, col),
            b'-' => {
                if self.peek_at(1) == Some(b'>') {
                    self.bump();
                    self.bump();
                    Ok(spanned(Tok::Arrow))
                } else if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                    self.number(line, col)
                } else {
                    Err(self.error(line, col, "unexpected `-`"))
                }
            }
            b if b.is_ascii_digit() => self.number_or_datetime(line, col),
            b if is_ident_start(b) => self.ident_or_name(line, col),
            other => Err(self.error(line, col, format!("unexpected character `{}`", other as char))),
        }
    }

    fn lt_or_iri(&mut self, line: u32, col: u32) -> Result<Spanned, LexError> {
        // `<` starts an IRI only when letters follow and a `>` closes it
        // before any whitespace; otherwise it is a comparison.
        if self.peek_at(1).is_some_and(|b| b.is_ascii_alphabetic()) {
            let mut offset = 1;
            loop {
                match self.peek_at(offset) {
                    Some(b'>') => {
                        self.bump(); // <
                        let mut iri = String::new();
                        loop {
                            let b = self.bump().expect("scanned ahead");
                            if b == b'>' {
                                break;
                            }
                            if b != b'<' {
                                iri.push(b as char);
                            }
                        }
                        return Ok(Spanned {
                            tok: Tok::Iri(iri),
                            line,
                            col,
                        });
                    }
                    Some(b' ') | Some(b'\t') | Some(b'\n') | Some(b'\r') | None => break,
                    Some(_) => offset += 1,
                }
            }
        }
        self.bump();
        if self.peek() == Some(b'=') {
            self.bump();
            Ok(Spanned { tok: Tok::Le, line, col })
        } else {
            Ok(Spanned { tok: Tok::Lt, line, col })
        }
    }

    fn scan_ident_text(&mut self) -> String {
        let mut out = String::new();
        while let Some(b) = self.peek() {
            if b == b'-' && self.peek_at(1) == Some(b'>') {
                break;
            }
            if is_ident_char(b) {
                out.push(self.bump().expect("peeked") as char);
            } else {
                break;
            }
        }
        // Trailing primes belong to the identifier (T3', T9').
        while self.peek() == Some(b'\'') {
            self.bump();
            out.push('\'');
        }
        out
    }

    fn ident_or_name(&mut self, line: u32, col: u32) -> Result<Spanned, LexError> {
        let first = self.scan_ident_text();
        // `prefix:local` forms a single name token when the colon is
        // immediately followed by an identifier.
        if self.peek() == Some(b':') && self.peek_at(1).is_some_and(is_ident_start) {
            self.bump();
            let local = self.scan_ident_text();
            return Ok(Spanned {
                tok: Tok::Name(format!("{}:{}", first, local)),
                line,
                col,
            });
        }
        let tok = match first.as_str() {
            "true" => Tok::Bool(true),
            "false" => Tok::Bool(false),
            _ => Tok::Ident(first),
        };
        Ok(Spanned { tok, line, col })
    }

    fn number(&mut self, line: u32, col: u32) -> Result<Spanned, LexError> {
        let mut text = String::new();
        if self.peek() == Some(b'-') {
            self.bump();
            text.push('-');
        }
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            text.push(self.bump().expect("peeked") as char);
        }
        let value: i64 = text
            .parse()
            .map_err(|_| self.error(line, col, format!("integer literal out of range: {}", text)))?;
        Ok(Spanned {
            tok: Tok::Int(value),
            line,
            col,
        })
    }

    /// A digit can open a bare dateTime (`2016-01-05T09:00:00`) or an
    /// integer.
    fn number_or_datetime(&mut self, line: u32, col: u32) -> Result<Spanned, LexError> {
        if self.looks_like_datetime() {
            let mut text = String::with_capacity(19);
            for _ in 0..19 {
                text.push(self.bump().expect("checked length") as char);
            }
            let dt = DateTime::parse(&text)
                .map_err(|e| self.error(line, col, e.to_string()))?;
            return Ok(Spanned {
                tok: Tok::DateTime(dt),
                line,
                col,
            });
        }
        self.number(line, col)
    }

    fn looks_like_datetime(&self) -> bool {
        // YYYY-MM-DDThh:mm:ss, fixed width 19.
        let shape = b"dddd-dd-ddTdd:dd:dd";
        for (i, want) in shape.iter().enumerate() {
            let got = match self.peek_at(i) {
                Some(b) => b,
                None => return false,
            };
            let ok = match want {
                b'd' => got.is_ascii_digit(),
                other => got == *other,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn string_or_datetime(&mut self, line: u32, col: u32) -> Result<Spanned, LexError> {
        self.bump(); // opening quote
        let mut out = String::new();
        loop {
            let b = self
                .bump()
                .ok_or_else(|| self.error(line, col, "unterminated string literal"))?;
            match b {
                b'"' => break,
                b'\\' => {
                    let esc = self
                        .bump()
                        .ok_or_else(|| self.error(line, col, "unterminated escape"))?;
                    match esc {
                        b'"' => out.push('"'),
                        b'\\' => out.push('\\'),
                        b'n' => out.push('\n'),
                        b'r' => out.push('\r'),
                        b't' => out.push('\t'),
                        other => {
                            return Err(self.error(
                                self.line,
                                self.col,
                                format!("unknown escape `\\{}`", other as char),
                            ))
                        }
                    }
                }
                b'\n' => return Err(self.error(line, col, "unterminated string literal")),
                other if other < 0x80 => out.push(other as char),
                other => {
                    // Re-assemble the UTF-8 sequence.
                    let mut bytes = vec![other];
                    while self.peek().is_some_and(|b| (0x80..0xC0).contains(&b)) {
                        bytes.push(self.bump().expect("peeked"));
                    }
                    match std::str::from_utf8(&bytes) {
                        Ok(s) => out.push_str(s),
                        Err(_) => return Err(self.error(line, col, "invalid UTF-8 in string")),
                    }
                }
            }
        }
        // `"...."^^dateTime` is a dateTime literal.
        if self.peek() == Some(b'^') && self.peek_at(1) == Some(b'^') {
            self.bump();
            self.bump();
            let tag = self.scan_ident_text();
            if tag != "dateTime" {
                return Err(self.error(line, col, format!("unknown literal tag `^^{}`", tag)));
            }
            let dt = DateTime::parse(&out).map_err(|e| self.error(line, col, e.to_string()))?;
            return Ok(Spanned {
                tok: Tok::DateTime(dt),
                line,
                col,
            });
        }
        Ok(Spanned {
            tok: Tok::Str(out),
            line,
            col,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        lex(text).unwrap().into_iter().map(|s| s.tok).collect()
    }

    #[test]
    fn names_variables_and_idents() {
        assert_eq!(
            toks("?this casemanager:gender male"),
            vec![
                Tok::Variable("this".into()),
                Tok::Name("casemanager:gender".into()),
                Tok::Ident("male".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn prefix_declaration_splits_colon() {
        assert_eq!(
            toks("prefix casemanager: <http://example.org/cm#>"),
            vec![
                Tok::Ident("prefix".into()),
                Tok::Ident("casemanager".into()),
                Tok::Colon,
                Tok::Iri("http://example.org/cm#".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn filters_and_comparison() {
        assert_eq!(
            toks("FILTER ((?g != \"male\") && (?appdate < now()))"),
            vec![
                Tok::Ident("FILTER".into()),
                Tok::LParen,
                Tok::LParen,
                Tok::Variable("g".into()),
                Tok::Ne,
                Tok::Str("male".into()),
                Tok::RParen,
                Tok::AndAnd,
                Tok::LParen,
                Tok::Variable("appdate".into()),
                Tok::Lt,
                Tok::Ident("now".into()),
                Tok::LParen,
                Tok::RParen,
                Tok::RParen,
                Tok::RParen,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn datetimes_bare_and_tagged() {
        let dt = DateTime::parse("2016-01-05T09:00:00").unwrap();
        assert_eq!(toks("2016-01-05T09:00:00"), vec![Tok::DateTime(dt), Tok::Eof]);
        assert_eq!(
            toks("\"2016-01-05T09:00:00\"^^dateTime"),
            vec![Tok::DateTime(dt), Tok::Eof]
        );
    }

    #[test]
    fn numbers_and_multiplicities() {
        assert_eq!(
            toks("[0..*] [1] -3 12"),
            vec![
                Tok::LBracket,
                Tok::Int(0),
                Tok::DotDot,
                Tok::Star,
                Tok::RBracket,
                Tok::LBracket,
                Tok::Int(1),
                Tok::RBracket,
                Tok::Int(-3),
                Tok::Int(12),
                Tok::Eof
            ]
        );
        assert!(lex("99999999999999999999").is_err());
    }

    #[test]
    fn primed_rule_ids_and_arrows() {
        assert_eq!(
            toks("T9' \"A\" -> \"B\""),
            vec![
                Tok::Ident("T9'".into()),
                Tok::Str("A".into()),
                Tok::Arrow,
                Tok::Str("B".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let spanned = lex("# heading\nrule T0").unwrap();
        assert_eq!(spanned[0].tok, Tok::Ident("rule".into()));
        assert_eq!((spanned[0].line, spanned[0].col), (2, 1));
        assert_eq!((spanned[1].line, spanned[1].col), (2, 6));
    }

    #[test]
    fn string_escapes_round_trip() {
        assert_eq!(
            toks(r#""a\"b\\c\nd""#),
            vec![Tok::Str("a\"b\\c\nd".into()), Tok::Eof]
        );
    }
}
