//! Parser and canonical printer for the modeling language: prefixes,
//! options, classes, associations, value partitions, constraints,
//! constructors, transition rules, machine declarations, and property
//! mutability. `parse_model(print_model(m)) == m`.

use std::collections::BTreeSet;

use crate::machine::{DomainValue, Mutability, StateMachineDecl, TransitionDecl};
use crate::model::WorkModel;
use crate::pattern::{
    CompareOp, FilterExpr, FilterOperand, GraphPattern, GroupKind,
};
use crate::rules::{AskConstraint, Constructor, TransitionRule};
use crate::schema::{
    AssociationDecl, AssociationKind, AttributeDecl, ClassDecl, Multiplicity, PartWholeStrategy,
    PartitionValue, RangeTag, ValuePartition, ValuePartitionStrategy,
};
use crate::term::{escape_str, Literal, Name, Term, Triple};

use super::lexer::{lex, Spanned, Tok};
use super::SyntaxError;

pub fn parse_model(text: &str) -> Result<WorkModel, Vec<SyntaxError>> {
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
    let model = parser.model().map_err(|e| vec![e])?;
    let errors = validate(&model, &parser.positions);
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(errors)
    }
}

pub(super) struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    /// Start positions of declarations, keyed like `rule T0`, for
    /// positioned semantic errors.
    positions: Vec<(String, (u32, u32))>,
}

impl Parser {
    pub(super) fn new(tokens: Vec<Spanned>) -> Self {
        Parser {
            tokens,
            pos: 0,
            positions: Vec::new(),
        }
    }

    pub(super) fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_spanned(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    pub(super) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(super) fn advance(&mut self) -> Spanned {
        let s = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        s
    }

    pub(super) fn err(&self, expected: impl Into<String>) -> SyntaxError {
        let s = self.peek_spanned();
        SyntaxError {
            line: s.line,
            col: s.col,
            message: format!("expected {}, found {}", expected.into(), s.tok),
        }
    }

    pub(super) fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == &tok {
            self.advance();
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    /// Accepts the given contextual keyword.
    pub(super) fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.advance();
                Ok(())
            }
            _ => Err(self.err(format!("`{}`", kw))),
        }
    }

    pub(super) fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub(super) fn name(&mut self, what: &str) -> Result<Name, SyntaxError> {
        match self.peek() {
            Tok::Name(_) => match self.advance().tok {
                Tok::Name(s) => Ok(Name::new(s)),
                _ => unreachable!(),
            },
            _ => Err(self.err(what)),
        }
    }

    pub(super) fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Ident(_) => match self.advance().tok {
                Tok::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.err(what)),
        }
    }

    pub(super) fn string(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Str(_) => match self.advance().tok {
                Tok::Str(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.err(what)),
        }
    }

    pub(super) fn literal(&mut self, what: &str) -> Result<Literal, SyntaxError> {
        let lit = match self.peek() {
            Tok::Str(s) => Literal::str(s),
            Tok::Int(i) => Literal::Int(*i),
            Tok::Bool(b) => Literal::Bool(*b),
            Tok::DateTime(dt) => Literal::DateTime(*dt),
            _ => return Err(self.err(what)),
        };
        self.advance();
        Ok(lit)
    }

    fn model(&mut self) -> Result<WorkModel, SyntaxError> {
        let mut model = WorkModel::default();
        while !self.at_eof() {
            match self.peek() {
                Tok::Ident(kw) => match kw.as_str() {
                    "prefix" => self.prefix_decl(&mut model)?,
                    "options" => self.options_decl(&mut model)?,
                    "abstract" | "class" => self.class_decl(&mut model)?,
                    "assoc" => self.assoc_decl(&mut model)?,
                    "partition" => self.partition_decl(&mut model)?,
                    "constraint" => self.constraint_decl(&mut model)?,
                    "constructor" => self.constructor_decl(&mut model)?,
                    "rule" => self.rule_decl(&mut model)?,
                    "machine" => self.machine_decl(&mut model)?,
                    "mutability" => self.mutability_decl(&mut model)?,
                    _ => return Err(self.err("a declaration keyword")),
                },
                _ => return Err(self.err("a declaration keyword")),
            }
        }
        Ok(model)
    }

    fn prefix_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("prefix")?;
        let prefix = self.ident("a prefix name")?;
        self.expect(Tok::Colon, "`:`")?;
        let iri = match self.peek() {
            Tok::Iri(_) => match self.advance().tok {
                Tok::Iri(s) => s,
                _ => unreachable!(),
            },
            _ => return Err(self.err("a namespace IRI in angle brackets")),
        };
        model.prefixes.push((prefix, iri));
        Ok(())
    }

    fn options_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("options")?;
        self.expect(Tok::LBrace, "`{`")?;
        while self.peek() != &Tok::RBrace {
            if self.eat_keyword("value-partition") {
                let which = self.ident("a value-partition strategy")?;
                model.options.value_partition = match which.as_str() {
                    "disjoint-individuals" => ValuePartitionStrategy::DisjointIndividuals,
                    "disjoint-subclasses" => ValuePartitionStrategy::DisjointSubclasses,
                    _ => return Err(self.err("`disjoint-individuals` or `disjoint-subclasses`")),
                };
            } else if self.eat_keyword("part-whole") {
                let which = self.ident("a part-whole strategy")?;
                model.options.part_whole = match which.as_str() {
                    "per-association" => PartWholeStrategy::PerAssociation,
                    "single-haspart" => PartWholeStrategy::SingleHasPart,
                    _ => return Err(self.err("`per-association` or `single-haspart`")),
                };
            } else {
                return Err(self.err("`value-partition` or `part-whole`"));
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(())
    }

    fn class_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        let is_abstract = self.eat_keyword("abstract");
        self.keyword("class")?;
        let name = self.name("a class name")?;
        self.positions
            .push((format!("class {}", name), position_of(self)));
        if self.eat_keyword("extends") {
            loop {
                let sup = self.name("a superclass name")?;
                model.class_model.class_generalizations.push((name.clone(), sup));
                if self.peek() == &Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        model.class_model.classes.push(ClassDecl {
            name: name.clone(),
            is_abstract,
        });
        self.expect(Tok::LBrace, "`{`")?;
        while self.peek() != &Tok::RBrace {
            self.keyword("attr")?;
            let attr_name = self.name("an attribute name")?;
            self.expect(Tok::Colon, "`:`")?;
            let dt_text = self.ident("a datatype")?;
            let datatype = RangeTag::parse(&dt_text).ok_or_else(|| SyntaxError {
                line: self.peek_spanned().line,
                col: self.peek_spanned().col,
                message: format!(
                    "unknown datatype `{}` on attribute {} (expected string, integer, boolean, or dateTime)",
                    dt_text, attr_name
                ),
            })?;
            let multiplicity = if self.peek() == &Tok::LBracket {
                self.multiplicity()?
            } else {
                Multiplicity::OPTIONAL
            };
            let default = if self.peek() == &Tok::Eq {
                self.advance();
                Some(self.literal("a default literal")?)
            } else {
                None
            };
            model.class_model.attributes.push(AttributeDecl {
                owner: name.clone(),
                name: attr_name,
                datatype,
                multiplicity,
                default,
            });
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(())
    }

    fn multiplicity(&mut self) -> Result<Multiplicity, SyntaxError> {
        self.expect(Tok::LBracket, "`[`")?;
        if self.peek() == &Tok::Star {
            self.advance();
            self.expect(Tok::RBracket, "`]`")?;
            return Ok(Multiplicity::MANY);
        }
        let min = match self.peek() {
            Tok::Int(i) if *i >= 0 => {
                let v = *i as u32;
                self.advance();
                v
            }
            _ => return Err(self.err("a lower bound")),
        };
        let mult = if self.peek() == &Tok::DotDot {
            self.advance();
            match self.peek() {
                Tok::Star => {
                    self.advance();
                    Multiplicity { min, max: None }
                }
                Tok::Int(i) if *i >= 0 => {
                    let max = *i as u32;
                    self.advance();
                    Multiplicity { min, max: Some(max) }
                }
                _ => return Err(self.err("an upper bound or `*`")),
            }
        } else {
            Multiplicity { min, max: Some(min) }
        };
        self.expect(Tok::RBracket, "`]`")?;
        if !mult.is_valid() {
            return Err(self.err("a multiplicity with min <= max"));
        }
        Ok(mult)
    }

    fn assoc_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("assoc")?;
        let name = self.name("an association name")?;
        self.positions
            .push((format!("assoc {}", name), position_of(self)));
        self.expect(Tok::Colon, "`:`")?;
        let source = self.name("the source class")?;
        let source_mult = if self.peek() == &Tok::LBracket {
            self.multiplicity()?
        } else {
            Multiplicity::MANY
        };
        self.expect(Tok::Arrow, "`->`")?;
        let target_mult = if self.peek() == &Tok::LBracket {
            self.multiplicity()?
        } else {
            Multiplicity::MANY
        };
        let target = self.name("the target class")?;
        let mut decl = AssociationDecl {
            name,
            source,
            target,
            kind: AssociationKind::Plain,
            source_mult,
            target_mult,
            ordered: false,
            unique: true,
            inverse: None,
            extends: None,
        };
        self.expect(Tok::LBrace, "`{`")?;
        while self.peek() != &Tok::RBrace {
            if self.eat_keyword("kind") {
                let kind = self.ident("an association kind")?;
                decl.kind = match kind.as_str() {
                    "plain" => AssociationKind::Plain,
                    "aggregation" => AssociationKind::Aggregation,
                    "composition" => AssociationKind::Composition,
                    _ => return Err(self.err("`plain`, `aggregation`, or `composition`")),
                };
            } else if self.eat_keyword("inverse") {
                decl.inverse = Some(self.name("an inverse property name")?);
            } else if self.eat_keyword("ordered") {
                decl.ordered = true;
            } else if self.eat_keyword("nonunique") {
                decl.unique = false;
            } else if self.eat_keyword("extends") {
                decl.extends = Some(self.name("an association name")?);
            } else {
                return Err(self.err("`kind`, `inverse`, `ordered`, `nonunique`, or `extends`"));
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        model.class_model.associations.push(decl);
        Ok(())
    }

    fn partition_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("partition")?;
        let attribute = self.name("an attribute name")?;
        self.positions
            .push((format!("partition {}", attribute), position_of(self)));
        self.keyword("of")?;
        let owner = self.name("the owning class")?;
        let values = self.partition_values()?;
        model.class_model.value_partitions.push(ValuePartition {
            owner,
            attribute,
            values,
        });
        Ok(())
    }

    fn partition_values(&mut self) -> Result<Vec<PartitionValue>, SyntaxError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut values = Vec::new();
        while self.peek() != &Tok::RBrace {
            let text = self.string("a partition value")?;
            let children = if self.peek() == &Tok::LBrace {
                self.partition_values()?
            } else {
                Vec::new()
            };
            values.push(PartitionValue { text, children });
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(values)
    }

    fn constraint_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("constraint")?;
        let id = self.ident("a constraint id")?;
        self.positions
            .push((format!("constraint {}", id), position_of(self)));
        self.keyword("on")?;
        let attached_class = self.name("a class name")?;
        self.keyword("message")?;
        let message = self.string("a message string")?;
        self.expect(Tok::LBrace, "`{`")?;
        self.keyword("ASK")?;
        self.keyword("WHERE")?;
        let body = self.braced_pattern()?;
        self.expect(Tok::RBrace, "`}`")?;
        model.constraints.push(AskConstraint {
            id,
            attached_class,
            message,
            body,
        });
        Ok(())
    }

    fn constructor_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("constructor")?;
        self.positions.push(("constructor".into(), position_of(self)));
        self.keyword("on")?;
        let attached_class = self.name("a class name")?;
        self.expect(Tok::LBrace, "`{`")?;
        self.keyword("CONSTRUCT")?;
        let template = self.braced_template()?;
        self.keyword("WHERE")?;
        let where_ = self.braced_pattern()?;
        self.expect(Tok::RBrace, "`}`")?;
        model.constructors.push(Constructor {
            attached_class,
            template,
            where_,
        });
        Ok(())
    }

    fn rule_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("rule")?;
        let id = self.ident("a rule id")?;
        self.positions.push((format!("rule {}", id), position_of(self)));
        self.keyword("on")?;
        let attached_class = self.name("a class name")?;
        self.expect(Tok::LBrace, "`{`")?;
        self.keyword("DELETE")?;
        let delete = self.braced_template()?;
        self.keyword("INSERT")?;
        let insert = self.braced_template()?;
        self.keyword("WHERE")?;
        let where_ = self.braced_pattern()?;
        self.expect(Tok::RBrace, "`}`")?;
        model.rules.push(TransitionRule {
            id,
            attached_class,
            delete,
            insert,
            where_,
        });
        Ok(())
    }

    fn machine_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("machine")?;
        self.positions.push(("machine".into(), position_of(self)));
        self.keyword("on")?;
        let subject = self.name("a class name")?;
        self.keyword("via")?;
        let state_property = self.name("the state property")?;
        let mut decl = StateMachineDecl {
            subject,
            state_property,
            states: Vec::new(),
            initial: String::new(),
            finals: BTreeSet::new(),
            transitions: Vec::new(),
        };
        self.expect(Tok::LBrace, "`{`")?;
        while self.peek() != &Tok::RBrace {
            if self.eat_keyword("states") {
                while let Tok::Str(_) = self.peek() {
                    decl.states.push(self.string("a state label")?);
                }
            } else if self.eat_keyword("initial") {
                decl.initial = self.string("a state label")?;
            } else if self.eat_keyword("final") {
                while let Tok::Str(_) = self.peek() {
                    decl.finals.insert(self.string("a state label")?);
                }
            } else if self.eat_keyword("transition") {
                let id = self.ident("a transition id")?;
                self.expect(Tok::Colon, "`:`")?;
                let source = self.string("the source state")?;
                self.expect(Tok::Arrow, "`->`")?;
                let target = self.string("the target state")?;
                let applies_to = if self.eat_keyword("when") {
                    Some(self.name("a class name")?)
                } else {
                    None
                };
                decl.transitions.push(TransitionDecl {
                    id,
                    source,
                    target,
                    applies_to,
                });
            } else {
                return Err(self.err("`states`, `initial`, `final`, or `transition`"));
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        model.machines.push(decl);
        Ok(())
    }

    fn mutability_decl(&mut self, model: &mut WorkModel) -> Result<(), SyntaxError> {
        self.keyword("mutability")?;
        self.positions.push(("mutability".into(), position_of(self)));
        self.expect(Tok::LBrace, "`{`")?;
        while self.peek() != &Tok::RBrace {
            let class = if self.eat_keyword("immutable") {
                Mutability::Immutable
            } else if self.eat_keyword("environment") {
                Mutability::Environment
            } else if self.eat_keyword("rule-owned") {
                Mutability::RuleOwned
            } else {
                return Err(self.err("`immutable`, `environment`, or `rule-owned`"));
            };
            let prop = self.name("a property name")?;
            let mut domain = Vec::new();
            if class != Mutability::RuleOwned {
                self.keyword("domain")?;
                self.expect(Tok::LBrace, "`{`")?;
                while self.peek() != &Tok::RBrace {
                    domain.push(self.domain_value()?);
                }
                self.expect(Tok::RBrace, "`}`")?;
            }
            if model.mutability.entries.contains_key(&prop) {
                return Err(self.err(format!("a single mutability class for {}", prop)));
            }
            model.mutability.entries.insert(prop, (class, domain));
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(())
    }

    fn domain_value(&mut self) -> Result<DomainValue, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let v = match s.as_str() {
                    "absent" => DomainValue::Absent,
                    "present" => DomainValue::Present,
                    "past" => DomainValue::Past,
                    "future" => DomainValue::Future,
                    _ => return Err(self.err("`absent`, `present`, `past`, `future`, or a literal")),
                };
                self.advance();
                Ok(v)
            }
            _ => Ok(DomainValue::Lit(self.literal("a domain value")?)),
        }
    }

    fn braced_template(&mut self) -> Result<Vec<Triple>, SyntaxError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        while self.peek() != &Tok::RBrace {
            out.push(self.triple_atom()?);
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(out)
    }

    pub(super) fn braced_pattern(&mut self) -> Result<GraphPattern, SyntaxError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut pattern = GraphPattern::default();
        loop {
            match self.peek() {
                Tok::RBrace => break,
                Tok::Ident(kw) if kw == "FILTER" => {
                    self.advance();
                    self.expect(Tok::LParen, "`(`")?;
                    let expr = self.filter_expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    if self.peek() == &Tok::Dot {
                        self.advance();
                    }
                    pattern.filters.push(expr);
                }
                Tok::Ident(kw) if kw == "EXISTS" => {
                    self.advance();
                    let group = self.braced_pattern()?;
                    if self.peek() == &Tok::Dot {
                        self.advance();
                    }
                    pattern.groups.push((GroupKind::Exists, group));
                }
                Tok::Ident(kw) if kw == "NOT" => {
                    self.advance();
                    self.keyword("EXISTS")?;
                    let group = self.braced_pattern()?;
                    if self.peek() == &Tok::Dot {
                        self.advance();
                    }
                    pattern.groups.push((GroupKind::NotExists, group));
                }
                _ => pattern.atoms.push(self.triple_atom()?),
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(pattern)
    }

    fn triple_atom(&mut self) -> Result<Triple, SyntaxError> {
        let subject = match self.peek().clone() {
            Tok::Name(s) => {
                self.advance();
                Term::name(s)
            }
            Tok::Variable(v) => {
                self.advance();
                Term::var(v)
            }
            _ => return Err(self.err("a subject (name or variable)")),
        };
        let predicate = match self.peek().clone() {
            Tok::Name(s) => {
                self.advance();
                Term::name(s)
            }
            Tok::Ident(s) if s == "a" => {
                self.advance();
                Term::Name(Name::type_pred())
            }
            _ => return Err(self.err("a predicate (name or `a`)")),
        };
        let object = match self.peek().clone() {
            Tok::Name(s) => {
                self.advance();
                Term::name(s)
            }
            Tok::Variable(v) => {
                self.advance();
                Term::var(v)
            }
            _ => Term::Literal(self.literal("an object (name, variable, or literal)")?),
        };
        self.expect(Tok::Dot, "`.` after the triple")?;
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    fn filter_expr(&mut self) -> Result<FilterExpr, SyntaxError> {
        let mut left = self.filter_and()?;
        while self.peek() == &Tok::OrOr {
            self.advance();
            let right = self.filter_and()?;
            left = FilterExpr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn filter_and(&mut self) -> Result<FilterExpr, SyntaxError> {
        let mut left = self.filter_primary()?;
        while self.peek() == &Tok::AndAnd {
            self.advance();
            let right = self.filter_primary()?;
            left = FilterExpr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn filter_primary(&mut self) -> Result<FilterExpr, SyntaxError> {
        match self.peek() {
            Tok::Bang => {
                self.advance();
                Ok(FilterExpr::Not(Box::new(self.filter_primary()?)))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.filter_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => {
                let left = self.filter_operand()?;
                let op = match self.peek() {
                    Tok::Eq => CompareOp::Eq,
                    Tok::Ne => CompareOp::Ne,
                    Tok::Lt => CompareOp::Lt,
                    Tok::Gt => CompareOp::Gt,
                    Tok::Le => CompareOp::Le,
                    Tok::Ge => CompareOp::Ge,
                    _ => return Err(self.err("a comparison operator")),
                };
                self.advance();
                let right = self.filter_operand()?;
                Ok(FilterExpr::Compare(op, left, right))
            }
        }
    }

    fn filter_operand(&mut self) -> Result<FilterOperand, SyntaxError> {
        match self.peek().clone() {
            Tok::Variable(v) => {
                self.advance();
                Ok(FilterOperand::Term(Term::var(v)))
            }
            Tok::Name(s) => {
                self.advance();
                Ok(FilterOperand::Term(Term::name(s)))
            }
            Tok::Ident(s) if s == "now" => {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(FilterOperand::Now)
            }
            _ => Ok(FilterOperand::Term(Term::Literal(
                self.literal("a filter operand")?,
            ))),
        }
    }
}

fn position_of(parser: &Parser) -> (u32, u32) {
    let s = &parser.tokens[parser.pos.saturating_sub(1)];
    (s.line, s.col)
}

// ---------------------------------------------------------------------
// Semantic validation: prefixes, cross-references, pattern binding.
// ---------------------------------------------------------------------

struct Validator<'m> {
    model: &'m WorkModel,
    positions: &'m [(String, (u32, u32))],
    errors: Vec<SyntaxError>,
}

fn validate(model: &WorkModel, positions: &[(String, (u32, u32))]) -> Vec<SyntaxError> {
    let mut v = Validator {
        model,
        positions,
        errors: Vec::new(),
    };
    v.run();
    v.errors
}

impl<'m> Validator<'m> {
    fn position(&self, key: &str) -> (u32, u32) {
        self.positions
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, p)| *p)
            .unwrap_or((1, 1))
    }

    fn report(&mut self, key: &str, message: String) {
        let (line, col) = self.position(key);
        self.errors.push(SyntaxError { line, col, message });
    }

    fn run(&mut self) {
        let declared_prefixes: BTreeSet<&str> =
            self.model.prefixes.iter().map(|(p, _)| p.as_str()).collect();
        let classes: BTreeSet<&Name> =
            self.model.class_model.classes.iter().map(|c| &c.name).collect();
        let mut properties: BTreeSet<Name> = self
            .model
            .class_model
            .attributes
            .iter()
            .map(|a| a.name.clone())
            .collect();
        for assoc in &self.model.class_model.associations {
            properties.insert(assoc.name.clone());
            if let Some(inv) = &assoc.inverse {
                properties.insert(inv.clone());
            }
        }

        // Every name must carry a declared prefix.
        let mut names: Vec<(String, Name)> = Vec::new();
        self.collect_names(&mut names);
        for (key, name) in &names {
            if name.is_type_pred() {
                continue;
            }
            match name.prefix() {
                Some(p) if declared_prefixes.contains(p) => {}
                Some(p) => self.report(key, format!("undeclared prefix `{}` in {}", p, name)),
                None => self.report(key, format!("name {} has no namespace prefix", name)),
            }
        }

        // Duplicate ids.
        let mut seen = BTreeSet::new();
        for c in &self.model.constraints {
            if !seen.insert(&c.id) {
                self.report(
                    &format!("constraint {}", c.id),
                    format!("duplicate constraint id `{}`", c.id),
                );
            }
        }
        let mut seen = BTreeSet::new();
        for r in &self.model.rules {
            if !seen.insert(&r.id) {
                self.report(&format!("rule {}", r.id), format!("duplicate rule id `{}`", r.id));
            }
        }

        // Cross references.
        for (sub, sup) in &self.model.class_model.class_generalizations {
            if !classes.contains(sup) {
                self.report(
                    &format!("class {}", sub),
                    format!("{} extends undeclared class {}", sub, sup),
                );
            }
        }
        for assoc in &self.model.class_model.associations {
            let key = format!("assoc {}", assoc.name);
            for end in [&assoc.source, &assoc.target] {
                if !classes.contains(end) {
                    self.report(&key, format!("association end {} is not a declared class", end));
                }
            }
            if let Some(sup) = &assoc.extends {
                if !properties.contains(sup) {
                    self.report(&key, format!("extends undeclared association {}", sup));
                }
            }
        }
        for p in &self.model.class_model.value_partitions {
            let key = format!("partition {}", p.attribute);
            if !classes.contains(&p.owner) {
                self.report(&key, format!("partition owner {} is not a declared class", p.owner));
            }
            let owned = self
                .model
                .class_model
                .attributes
                .iter()
                .any(|a| a.name == p.attribute && a.owner == p.owner);
            if !owned {
                self.report(
                    &key,
                    format!("{} is not a declared attribute of {}", p.attribute, p.owner),
                );
            }
        }
        for c in &self.model.constraints {
            let key = format!("constraint {}", c.id);
            if !classes.contains(&c.attached_class) {
                self.report(&key, format!("attached to undeclared class {}", c.attached_class));
            }
            self.check_pattern(&key, &c.body, &[]);
        }
        for c in &self.model.constructors {
            let key = "constructor".to_string();
            if !classes.contains(&c.attached_class) {
                self.report(&key, format!("attached to undeclared class {}", c.attached_class));
            }
            self.check_pattern(&key, &c.where_, &[]);
            self.check_template(&key, "CONSTRUCT", &c.template, &c.where_);
        }
        for r in &self.model.rules {
            let key = format!("rule {}", r.id);
            if !classes.contains(&r.attached_class) {
                self.report(&key, format!("attached to undeclared class {}", r.attached_class));
            }
            self.check_pattern(&key, &r.where_, &[]);
            self.check_template(&key, "DELETE", &r.delete, &r.where_);
            self.check_template(&key, "INSERT", &r.insert, &r.where_);
        }
        for m in &self.model.machines {
            let key = "machine".to_string();
            if !classes.contains(&m.subject) {
                self.report(&key, format!("subject {} is not a declared class", m.subject));
            }
            if !properties.contains(&m.state_property) {
                self.report(
                    &key,
                    format!("state property {} is not declared", m.state_property),
                );
            }
            let states: BTreeSet<&String> = m.states.iter().collect();
            if states.len() != m.states.len() {
                self.report(&key, "duplicate state labels".into());
            }
            if !states.contains(&m.initial) {
                self.report(&key, format!("initial state \"{}\" is not declared", m.initial));
            }
            for f in &m.finals {
                if !states.contains(f) {
                    self.report(&key, format!("final state \"{}\" is not declared", f));
                }
            }
            let mut ids = BTreeSet::new();
            for t in &m.transitions {
                if !ids.insert(&t.id) {
                    self.report(&key, format!("duplicate transition id `{}`", t.id));
                }
                for s in [&t.source, &t.target] {
                    if !states.contains(s) {
                        self.report(
                            &key,
                            format!("transition {} uses undeclared state \"{}\"", t.id, s),
                        );
                    }
                }
                if let Some(c) = &t.applies_to {
                    if !classes.contains(c) {
                        self.report(&key, format!("transition {} names undeclared class {}", t.id, c));
                    }
                }
            }
        }
        for prop in self.model.mutability.entries.keys() {
            if !properties.contains(prop) {
                self.report(
                    "mutability",
                    format!("mutability entry for undeclared property {}", prop),
                );
            }
        }
    }

    fn check_pattern(&mut self, key: &str, pattern: &GraphPattern, extra: &[&str]) {
        // `?this` is bound by attachment before the body runs.
        let mut outer: Vec<std::sync::Arc<str>> = vec![std::sync::Arc::from("this")];
        outer.extend(extra.iter().map(|s| std::sync::Arc::from(*s)));
        if let Err(e) = pattern.check_well_formed(&outer) {
            self.report(key, e.to_string());
        }
    }

    fn check_template(
        &mut self,
        key: &str,
        clause: &str,
        template: &[Triple],
        where_: &GraphPattern,
    ) {
        let mut bound: BTreeSet<std::sync::Arc<str>> = where_.atom_variables().into_iter().collect();
        bound.insert(std::sync::Arc::from("this"));
        for atom in template {
            for term in atom.terms() {
                if let Term::Variable(v) = term {
                    if !bound.contains(v) {
                        self.report(
                            key,
                            format!("{} references ?{} which the WHERE pattern does not bind", clause, v),
                        );
                    }
                }
            }
        }
    }

    fn collect_names(&self, out: &mut Vec<(String, Name)>) {
        let m = &self.model;
        for c in &m.class_model.classes {
            out.push((format!("class {}", c.name), c.name.clone()));
        }
        for (sub, sup) in &m.class_model.class_generalizations {
            out.push((format!("class {}", sub), sup.clone()));
        }
        for a in &m.class_model.attributes {
            out.push((format!("class {}", a.owner), a.name.clone()));
        }
        for a in &m.class_model.associations {
            let key = format!("assoc {}", a.name);
            out.push((key.clone(), a.name.clone()));
            out.push((key.clone(), a.source.clone()));
            out.push((key.clone(), a.target.clone()));
            if let Some(inv) = &a.inverse {
                out.push((key.clone(), inv.clone()));
            }
            if let Some(sup) = &a.extends {
                out.push((key, sup.clone()));
            }
        }
        for p in &m.class_model.value_partitions {
            let key = format!("partition {}", p.attribute);
            out.push((key.clone(), p.owner.clone()));
            out.push((key, p.attribute.clone()));
        }
        for c in &m.constraints {
            let key = format!("constraint {}", c.id);
            out.push((key.clone(), c.attached_class.clone()));
            collect_pattern_names(&c.body, &key, out);
        }
        for c in &m.constructors {
            let key = "constructor".to_string();
            out.push((key.clone(), c.attached_class.clone()));
            collect_pattern_names(&c.where_, &key, out);
            collect_template_names(&c.template, &key, out);
        }
        for r in &m.rules {
            let key = format!("rule {}", r.id);
            out.push((key.clone(), r.attached_class.clone()));
            collect_pattern_names(&r.where_, &key, out);
            collect_template_names(&r.delete, &key, out);
            collect_template_names(&r.insert, &key, out);
        }
        for machine in &m.machines {
            out.push(("machine".into(), machine.subject.clone()));
            out.push(("machine".into(), machine.state_property.clone()));
            for t in &machine.transitions {
                if let Some(c) = &t.applies_to {
                    out.push(("machine".into(), c.clone()));
                }
            }
        }
        for prop in m.mutability.entries.keys() {
            out.push(("mutability".into(), prop.clone()));
        }
    }
}

fn collect_pattern_names(pattern: &GraphPattern, key: &str, out: &mut Vec<(String, Name)>) {
    collect_template_names(&pattern.atoms, key, out);
    for (_, g) in &pattern.groups {
        collect_pattern_names(g, key, out);
    }
}

fn collect_template_names(atoms: &[Triple], key: &str, out: &mut Vec<(String, Name)>) {
    for atom in atoms {
        for term in atom.terms() {
            if let Term::Name(n) = term {
                out.push((key.to_string(), n.clone()));
            }
        }
    }
}

// ---------------------------------------------------------------------
// Canonical printer.
// ---------------------------------------------------------------------

pub fn print_model(model: &WorkModel) -> String {
    let mut out = String::new();
    for (prefix, iri) in &model.prefixes {
        out.push_str(&format!("prefix {}: <{}>\n", prefix, iri));
    }
    out.push('\n');
    out.push_str("options {\n");
    out.push_str(&format!(
        "  value-partition {}\n",
        match model.options.value_partition {
            ValuePartitionStrategy::DisjointIndividuals => "disjoint-individuals",
            ValuePartitionStrategy::DisjointSubclasses => "disjoint-subclasses",
        }
    ));
    out.push_str(&format!(
        "  part-whole {}\n",
        match model.options.part_whole {
            PartWholeStrategy::PerAssociation => "per-association",
            PartWholeStrategy::SingleHasPart => "single-haspart",
        }
    ));
    out.push_str("}\n");

    for class in &model.class_model.classes {
        out.push('\n');
        if class.is_abstract {
            out.push_str("abstract ");
        }
        out.push_str(&format!("class {}", class.name));
        let supers: Vec<String> = model
            .class_model
            .class_generalizations
            .iter()
            .filter(|(sub, _)| sub == &class.name)
            .map(|(_, sup)| sup.to_string())
            .collect();
        if !supers.is_empty() {
            out.push_str(&format!(" extends {}", supers.join(", ")));
        }
        out.push_str(" {\n");
        for attr in model
            .class_model
            .attributes
            .iter()
            .filter(|a| a.owner == class.name)
        {
            out.push_str(&format!(
                "  attr {} : {} {}",
                attr.name, attr.datatype, attr.multiplicity
            ));
            if let Some(default) = &attr.default {
                out.push_str(&format!(" = {}", default.canonical()));
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }

    for assoc in &model.class_model.associations {
        out.push('\n');
        out.push_str(&format!(
            "assoc {} : {} {} -> {} {} {{\n",
            assoc.name, assoc.source, assoc.source_mult, assoc.target_mult, assoc.target
        ));
        let kind = match assoc.kind {
            AssociationKind::Plain => "plain",
            AssociationKind::Aggregation => "aggregation",
            AssociationKind::Composition => "composition",
        };
        out.push_str(&format!("  kind {}\n", kind));
        if let Some(inv) = &assoc.inverse {
            out.push_str(&format!("  inverse {}\n", inv));
        }
        if assoc.ordered {
            out.push_str("  ordered\n");
        }
        if !assoc.unique {
            out.push_str("  nonunique\n");
        }
        if let Some(sup) = &assoc.extends {
            out.push_str(&format!("  extends {}\n", sup));
        }
        out.push_str("}\n");
    }

    for p in &model.class_model.value_partitions {
        out.push('\n');
        out.push_str(&format!("partition {} of {} {{\n", p.attribute, p.owner));
        print_partition_values(&p.values, 1, &mut out);
        out.push_str("}\n");
    }

    for c in &model.constraints {
        out.push('\n');
        out.push_str(&format!(
            "constraint {} on {} message \"{}\" {{\n  ASK WHERE {{\n",
            c.id,
            c.attached_class,
            escape_str(&c.message)
        ));
        print_pattern(&c.body, 2, &mut out);
        out.push_str("  }\n}\n");
    }

    for c in &model.constructors {
        out.push('\n');
        out.push_str(&format!("constructor on {} {{\n  CONSTRUCT {{\n", c.attached_class));
        print_template(&c.template, 2, &mut out);
        out.push_str("  }\n  WHERE {\n");
        print_pattern(&c.where_, 2, &mut out);
        out.push_str("  }\n}\n");
    }

    for r in &model.rules {
        out.push('\n');
        out.push_str(&format!("rule {} on {} {{\n  DELETE {{\n", r.id, r.attached_class));
        print_template(&r.delete, 2, &mut out);
        out.push_str("  }\n  INSERT {\n");
        print_template(&r.insert, 2, &mut out);
        out.push_str("  }\n  WHERE {\n");
        print_pattern(&r.where_, 2, &mut out);
        out.push_str("  }\n}\n");
    }

    for m in &model.machines {
        out.push('\n');
        out.push_str(&format!("machine on {} via {} {{\n", m.subject, m.state_property));
        out.push_str("  states");
        for s in &m.states {
            out.push_str(&format!(" \"{}\"", escape_str(s)));
        }
        out.push('\n');
        out.push_str(&format!("  initial \"{}\"\n", escape_str(&m.initial)));
        if !m.finals.is_empty() {
            out.push_str("  final");
            for f in &m.finals {
                out.push_str(&format!(" \"{}\"", escape_str(f)));
            }
            out.push('\n');
        }
        for t in &m.transitions {
            out.push_str(&format!(
                "  transition {} : \"{}\" -> \"{}\"",
                t.id,
                escape_str(&t.source),
                escape_str(&t.target)
            ));
            if let Some(c) = &t.applies_to {
                out.push_str(&format!(" when {}", c));
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }

    if !model.mutability.entries.is_empty() {
        out.push('\n');
        out.push_str("mutability {\n");
        for (prop, (class, domain)) in model.mutability.entries.iter() {
            out.push_str(&format!("  {} {}", class.as_str(), prop));
            if *class != Mutability::RuleOwned {
                out.push_str(" domain {");
                for v in domain {
                    out.push_str(&format!(" {}", print_domain_value(v)));
                }
                out.push_str(" }");
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }

    out
}

fn print_domain_value(v: &DomainValue) -> String {
    match v {
        DomainValue::Absent => "absent".into(),
        DomainValue::Present => "present".into(),
        DomainValue::Past => "past".into(),
        DomainValue::Future => "future".into(),
        DomainValue::Lit(l) => l.canonical(),
    }
}

fn print_partition_values(values: &[PartitionValue], depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    for v in values {
        out.push_str(&format!("{}\"{}\"", indent, escape_str(&v.text)));
        if v.children.is_empty() {
            out.push('\n');
        } else {
            out.push_str(" {\n");
            print_partition_values(&v.children, depth + 1, out);
            out.push_str(&format!("{}}}\n", indent));
        }
    }
}

fn print_template(atoms: &[Triple], depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    for atom in atoms {
        out.push_str(&format!("{}{} .\n", indent, atom.canonical()));
    }
}

fn print_pattern(pattern: &GraphPattern, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    print_template(&pattern.atoms, depth, out);
    for f in &pattern.filters {
        out.push_str(&format!("{}FILTER ({}) .\n", indent, print_filter(f)));
    }
    for (kind, group) in &pattern.groups {
        let kw = match kind {
            GroupKind::Exists => "EXISTS",
            GroupKind::NotExists => "NOT EXISTS",
        };
        out.push_str(&format!("{}{} {{\n", indent, kw));
        print_pattern(group, depth + 1, out);
        out.push_str(&format!("{}}} .\n", indent));
    }
}

fn print_filter(expr: &FilterExpr) -> String {
    match expr {
        FilterExpr::Compare(op, l, r) => {
            format!("{} {} {}", print_operand(l), op.symbol(), print_operand(r))
        }
        FilterExpr::And(a, b) => format!("({}) && ({})", print_filter(a), print_filter(b)),
        FilterExpr::Or(a, b) => format!("({}) || ({})", print_filter(a), print_filter(b)),
        FilterExpr::Not(e) => format!("!({})", print_filter(e)),
    }
}

fn print_operand(op: &FilterOperand) -> String {
    match op {
        FilterOperand::Now => "now()".into(),
        FilterOperand::Term(t) => t.canonical(),
    }
}
