//! Parser for the canonical triple text format: one
//! `<subject> <predicate> <object> .` statement per line, names as
//! `prefix:local`, literals as `"text"`, `12`, `true`/`false`, or
//! `"2016-01-05T09:00:00"^^dateTime`.

use crate::store::TripleStore;
use crate::term::{Name, Term, Triple};

use super::lexer::{lex, Tok};
use super::model_text::Parser;
use super::SyntaxError;

pub fn parse_triples(text: &str) -> Result<TripleStore, Vec<SyntaxError>> {
    let tokens = match lex(text) {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![SyntaxError {
                line: e.line,
                col: e.col,
                message: e.message,
            }])
        }
    };
    let mut parser = Parser::new(tokens);
    let mut store = TripleStore::new();
    while !parser.at_eof() {
        let triple = statement(&mut parser).map_err(|e| vec![e])?;
        // Duplicate lines are set-idempotent.
        store.add(triple).expect("statement terms are ground");
    }
    Ok(store)
}

fn statement(p: &mut Parser) -> Result<Triple, SyntaxError> {
    let subject = Term::Name(p.name("a subject name")?);
    let predicate = match p.peek() {
        Tok::Ident(s) if s == "a" => {
            p.advance();
            Term::Name(Name::type_pred())
        }
        _ => Term::Name(p.name("a predicate name or `a`")?),
    };
    let object = match p.peek().clone() {
        Tok::Name(s) => {
            p.advance();
            Term::name(s)
        }
        _ => Term::Literal(p.literal("an object (name or literal)")?),
    };
    p.expect(Tok::Dot, "`.` after the statement")?;
    Ok(Triple {
        subject,
        predicate,
        object,
    })
}
