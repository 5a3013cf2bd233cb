//! Terms and triples: the ground vocabulary of the semantic fact base.
//!
//! Names follow the unique name assumption: two names denote the same
//! individual exactly when their prefixed identifiers are byte-equal.
//! Literals are tagged (string, integer, boolean, dateTime) and never
//! compare equal across tags. Variables (`?x`) are only legal inside
//! patterns and templates, never in stored data.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use chrono::NaiveDateTime;
use thiserror::Error;

/// Text of the distinguished type predicate.
pub const TYPE_PRED: &str = "a";

/// A prefixed identifier such as `casemanager:Order`, or the bare type
/// keyword `a`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(text: impl AsRef<str>) -> Self {
        Name(Arc::from(text.as_ref()))
    }

    /// The distinguished type predicate, printed as `a`.
    pub fn type_pred() -> Self {
        Name::new(TYPE_PRED)
    }

    pub fn is_type_pred(&self) -> bool {
        &*self.0 == TYPE_PRED
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Prefix part of the identifier, if any.
    pub fn prefix(&self) -> Option<&str> {
        self.0.split_once(':').map(|(p, _)| p)
    }

    /// Local part after the prefix (the whole text when unprefixed).
    pub fn local(&self) -> &str {
        self.0.split_once(':').map_or(&self.0, |(_, l)| l)
    }
}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({})", self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// A dateTime with second precision and no timezone.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DateTime(NaiveDateTime);

pub const DATETIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

impl DateTime {
    pub fn parse(text: &str) -> Result<Self, TermError> {
        NaiveDateTime::parse_from_str(text, DATETIME_FORMAT)
            .map(DateTime)
            .map_err(|_| TermError::BadDateTime(text.to_string()))
    }

    pub fn inner(&self) -> NaiveDateTime {
        self.0
    }

    pub fn from_inner(dt: NaiveDateTime) -> Self {
        DateTime(dt)
    }

    /// Shift by whole days; saturates silently only in tests that never
    /// approach the representable range.
    pub fn plus_days(&self, days: i64) -> Self {
        DateTime(self.0 + chrono::Duration::days(days))
    }
}

impl fmt::Display for DateTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(DATETIME_FORMAT))
    }
}

impl fmt::Debug for DateTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DateTime({})", self)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("not a valid dateTime (expected YYYY-MM-DDThh:mm:ss): {0}")]
    BadDateTime(String),
    #[error("integer literal out of range: {0}")]
    IntOutOfRange(String),
}

/// A tagged literal value. Different tags never compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Str(Arc<str>),
    Int(i64),
    Bool(bool),
    DateTime(DateTime),
}

impl Literal {
    pub fn str(s: impl AsRef<str>) -> Self {
        Literal::Str(Arc::from(s.as_ref()))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Literal::Str(_) => "string",
            Literal::Int(_) => "integer",
            Literal::Bool(_) => "boolean",
            Literal::DateTime(_) => "dateTime",
        }
    }

    /// Canonical external form, e.g. `"Initial"`, `12`, `true`,
    /// `"2016-01-05T09:00:00"^^dateTime`.
    pub fn canonical(&self) -> String {
        match self {
            Literal::Str(s) => format!("\"{}\"", escape_str(s)),
            Literal::Int(i) => i.to_string(),
            Literal::Bool(b) => b.to_string(),
            Literal::DateTime(dt) => format!("\"{}\"^^dateTime", dt),
        }
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        use Literal::*;
        match (self, other) {
            // Same-tag fast paths agree with canonical text order: escaped
            // string compare matches raw compare only when control characters
            // are escaped, so strings go through the escape iterator.
            (Str(a), Str(b)) => escaped_chars(a).cmp(escaped_chars(b)),
            (Int(a), Int(b)) => a.to_string().cmp(&b.to_string()),
            (Bool(a), Bool(b)) => a.cmp(b),
            (DateTime(a), DateTime(b)) => a.cmp(b),
            _ => self.canonical().cmp(&other.canonical()),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Literal({})", self.canonical())
    }
}

/// A term: a name, a literal, or (in patterns only) a variable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Name(Name),
    Literal(Literal),
    Variable(Arc<str>),
}

impl Term {
    pub fn name(text: impl AsRef<str>) -> Self {
        Term::Name(Name::new(text))
    }

    pub fn var(name: impl AsRef<str>) -> Self {
        Term::Variable(Arc::from(name.as_ref()))
    }

    pub fn str(s: impl AsRef<str>) -> Self {
        Term::Literal(Literal::str(s))
    }

    pub fn int(i: i64) -> Self {
        Term::Literal(Literal::Int(i))
    }

    pub fn bool(b: bool) -> Self {
        Term::Literal(Literal::Bool(b))
    }

    pub fn datetime(dt: DateTime) -> Self {
        Term::Literal(Literal::DateTime(dt))
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn is_name(&self) -> bool {
        matches!(self, Term::Name(_))
    }

    pub fn as_name(&self) -> Option<&Name> {
        match self {
            Term::Name(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }

    /// Canonical text; the total order on terms is the order of this text.
    pub fn canonical(&self) -> String {
        match self {
            Term::Name(n) => n.as_str().to_string(),
            Term::Literal(l) => l.canonical(),
            Term::Variable(v) => format!("?{}", v),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        use Term::*;
        match (self, other) {
            (Name(a), Name(b)) => a.cmp(b),
            (Literal(a), Literal(b)) => a.cmp(b),
            (Variable(a), Variable(b)) => a.cmp(b),
            _ => self.canonical().cmp(&other.canonical()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({})", self.canonical())
    }
}

impl From<Name> for Term {
    fn from(n: Name) -> Self {
        Term::Name(n)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

/// A subject-predicate-object statement. Ground triples have a Name
/// subject and predicate and a Name or Literal object; patterns may put
/// variables in the subject and object positions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Term>, predicate: impl Into<Term>, object: impl Into<Term>) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn is_ground(&self) -> bool {
        !self.subject.is_variable() && !self.predicate.is_variable() && !self.object.is_variable()
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Canonical one-line external form, without the trailing ` .`.
    pub fn canonical(&self) -> String {
        format!(
            "{} {} {}",
            self.subject.canonical(),
            self.predicate.canonical(),
            self.object.canonical()
        )
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} .", self.canonical())
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Triple({})", self.canonical())
    }
}

pub fn escape_str(s: &str) -> String {
    escaped_chars(s).collect()
}

fn escaped_chars(s: &str) -> impl Iterator<Item = char> + '_ {
    s.chars().flat_map(|c| {
        let (a, b) = match c {
            '"' => ('\\', Some('"')),
            '\\' => ('\\', Some('\\')),
            '\n' => ('\\', Some('n')),
            '\r' => ('\\', Some('r')),
            '\t' => ('\\', Some('t')),
            other => (other, None),
        };
        std::iter::once(a).chain(b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_tags_never_equal() {
        assert_ne!(Literal::str("1"), Literal::Int(1));
        assert_ne!(Literal::Bool(true), Literal::str("true"));
        let dt = DateTime::parse("2016-01-05T09:00:00").unwrap();
        assert_ne!(Literal::DateTime(dt), Literal::str("2016-01-05T09:00:00"));
    }

    #[test]
    fn names_equal_by_bytes() {
        assert_eq!(Name::new("casemanager:Order"), Name::new("casemanager:Order"));
        assert_ne!(Name::new("casemanager:Order"), Name::new("other:Order"));
    }

    #[test]
    fn datetime_round_trip_and_order() {
        let a = DateTime::parse("2016-01-05T09:00:00").unwrap();
        let b = DateTime::parse("2016-01-20T00:00:00").unwrap();
        assert!(a < b);
        assert_eq!(a.to_string(), "2016-01-05T09:00:00");
        assert!(DateTime::parse("2016-01-05").is_err());
        assert!(DateTime::parse("2016-01-05T09:00:00Z").is_err());
    }

    #[test]
    fn term_order_follows_canonical_text() {
        // Canonical text of 12 is "12", of 3 is "3": "12" sorts first.
        assert!(Term::int(12) < Term::int(3));
        // A quoted string sorts before an unquoted name ('"' < letters).
        assert!(Term::str("zzz") < Term::name("casemanager:a"));
        let mut terms = [Term::name("b:b"), Term::int(12), Term::str("x"), Term::int(3)];
        terms.sort();
        let canon: Vec<String> = terms.iter().map(Term::canonical).collect();
        let mut by_text = canon.clone();
        by_text.sort();
        assert_eq!(canon, by_text);
    }

    #[test]
    fn string_escapes() {
        assert_eq!(Literal::str("a\"b\\c\nd").canonical(), "\"a\\\"b\\\\c\\nd\"");
        // Escaped comparison matches canonical text comparison.
        let a = Literal::str("a\nz");
        let b = Literal::str("a z");
        assert_eq!(a.cmp(&b), a.canonical().cmp(&b.canonical()));
    }

    #[test]
    fn local_and_prefix() {
        let n = Name::new("casemanager:hasOrder");
        assert_eq!(n.prefix(), Some("casemanager"));
        assert_eq!(n.local(), "hasOrder");
        assert_eq!(Name::type_pred().local(), "a");
        assert!(Name::type_pred().is_type_pred());
    }
}
