//! Parser for scenario files.
//!
//! Events, one after another:
//!
//! ```text
//! at <dateTime>
//! create <name> : <Class> { <prop> <value> ... }
//! set <name> <prop> <value>
//! clear <name> <prop>
//! run
//! expect <name> state "<label>"
//! check-constraints [<id> ...]
//! ```
//!
//! Values are names or literals; `set` on a max-one property replaces
//! the prior value. Timestamps never decrease and names are created
//! before use; both are checked here.

use std::collections::BTreeSet;

use crate::scenario::{Scenario, ScenarioEvent};
use crate::term::{DateTime, Name, Term};

use super::lexer::{lex, Tok};
use super::model_text::Parser;
use super::SyntaxError;

pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<SyntaxError>> {
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
    let mut events = Vec::new();
    loop {
        if parser.at_eof() {
            break;
        }
        events.push(event(&mut parser).map_err(|e| vec![e])?);
    }
    let scenario = Scenario { events };
    let errors = validate(&scenario);
    if errors.is_empty() {
        Ok(scenario)
    } else {
        Err(errors)
    }
}

const EVENT_KEYWORDS: [&str; 7] = ["at", "create", "set", "clear", "run", "expect", "check-constraints"];

fn event(p: &mut Parser) -> Result<ScenarioEvent, SyntaxError> {
    if p.at_keyword("at") {
        p.keyword("at")?;
        let dt = datetime(p)?;
        return Ok(ScenarioEvent::At(dt));
    }
    if p.at_keyword("create") {
        p.keyword("create")?;
        let name = p.name("an instance name")?;
        p.expect(Tok::Colon, "`:`")?;
        let class = p.name("a class name")?;
        p.expect(Tok::LBrace, "`{`")?;
        let mut props = Vec::new();
        while p.peek() != &Tok::RBrace {
            let prop = p.name("a property name")?;
            let value = value(p)?;
            props.push((prop, value));
        }
        p.expect(Tok::RBrace, "`}`")?;
        return Ok(ScenarioEvent::Create { name, class, props });
    }
    if p.at_keyword("set") {
        p.keyword("set")?;
        let name = p.name("an instance name")?;
        let prop = p.name("a property name")?;
        let v = value(p)?;
        return Ok(ScenarioEvent::Set { name, prop, value: v });
    }
    if p.at_keyword("clear") {
        p.keyword("clear")?;
        let name = p.name("an instance name")?;
        let prop = p.name("a property name")?;
        return Ok(ScenarioEvent::Clear { name, prop });
    }
    if p.at_keyword("run") {
        p.keyword("run")?;
        return Ok(ScenarioEvent::Run);
    }
    if p.at_keyword("expect") {
        p.keyword("expect")?;
        let name = p.name("an instance name")?;
        p.keyword("state")?;
        let label = p.string("a state label")?;
        return Ok(ScenarioEvent::ExpectState { name, label });
    }
    if p.at_keyword("check-constraints") {
        p.keyword("check-constraints")?;
        let mut expected = Vec::new();
        while let Tok::Ident(id) = p.peek() {
            if EVENT_KEYWORDS.contains(&id.as_str()) {
                break;
            }
            expected.push(p.ident("a constraint id")?);
        }
        return Ok(ScenarioEvent::CheckConstraints { expected });
    }
    Err(p.err("an event (at, create, set, clear, run, expect, check-constraints)"))
}

fn datetime(p: &mut Parser) -> Result<DateTime, SyntaxError> {
    match p.peek() {
        Tok::DateTime(dt) => {
            let dt = *dt;
            p.advance();
            Ok(dt)
        }
        _ => Err(p.err("a dateTime")),
    }
}

fn value(p: &mut Parser) -> Result<Term, SyntaxError> {
    match p.peek().clone() {
        Tok::Name(s) => {
            p.advance();
            Ok(Term::name(s))
        }
        Tok::Str(s) => {
            p.advance();
            Ok(Term::str(s))
        }
        Tok::Int(i) => {
            p.advance();
            Ok(Term::int(i))
        }
        Tok::Bool(b) => {
            p.advance();
            Ok(Term::bool(b))
        }
        Tok::DateTime(dt) => {
            p.advance();
            Ok(Term::datetime(dt))
        }
        _ => Err(p.err("a value (name or literal)")),
    }
}

fn validate(scenario: &Scenario) -> Vec<SyntaxError> {
    let mut errors = Vec::new();
    let mut report = |message: String| {
        errors.push(SyntaxError {
            line: 1,
            col: 1,
            message,
        })
    };
    let mut created: BTreeSet<&Name> = BTreeSet::new();
    let mut last_at: Option<DateTime> = None;
    for event in &scenario.events {
        match event {
            ScenarioEvent::At(dt) => {
                if let Some(prev) = last_at {
                    if *dt < prev {
                        report(format!("timestamps must be non-decreasing: {} after {}", dt, prev));
                    }
                }
                last_at = Some(*dt);
            }
            ScenarioEvent::Create { name, props, .. } => {
                if !created.insert(name) {
                    report(format!("{} is created twice", name));
                }
                for (_, value) in props {
                    if let Term::Name(ref_name) = value {
                        if !created.contains(ref_name) {
                            report(format!("{} references {} before it is created", name, ref_name));
                        }
                    }
                }
            }
            ScenarioEvent::Set { name, value, .. } => {
                if !created.contains(name) {
                    report(format!("set on {} before it is created", name));
                }
                if let Term::Name(ref_name) = value {
                    if !created.contains(ref_name) {
                        report(format!("set references {} before it is created", ref_name));
                    }
                }
            }
            ScenarioEvent::Clear { name, .. } => {
                if !created.contains(name) {
                    report(format!("clear on {} before it is created", name));
                }
            }
            ScenarioEvent::ExpectState { name, .. } => {
                if !created.contains(name) {
                    report(format!("expect on {} before it is created", name));
                }
            }
            ScenarioEvent::Run | ScenarioEvent::CheckConstraints { .. } => {}
        }
    }
    errors
}
