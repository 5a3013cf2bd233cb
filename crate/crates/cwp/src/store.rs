//! An indexed, duplicate-free triple store with closed-world semantics,
//! deterministic iteration order, and a canonical text serialization.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::term::{Name, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("triple contains a variable and cannot be stored: {0}")]
    VariableInData(Triple),
    #[error("subject and predicate of a stored triple must be names: {0}")]
    MalformedTriple(Triple),
}

/// Content digest of a store; equal stores produce equal digests
/// regardless of insertion order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StoreDigest(pub [u8; 32]);

impl fmt::Display for StoreDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{:02x}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for StoreDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StoreDigest({})", self)
    }
}

/// Mutable set of ground triples with subject, predicate, and object
/// indexes. Single-writer: clone the store to share it across threads.
#[derive(Clone, Default)]
pub struct TripleStore {
    triples: BTreeSet<Triple>,
    by_subject: HashMap<Name, BTreeSet<Triple>>,
    by_predicate: HashMap<Name, BTreeSet<Triple>>,
    by_object: HashMap<Term, BTreeSet<Triple>>,
    revision: u64,
}

impl TripleStore {
    pub fn new() -> Self {
        TripleStore::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Monotonically increasing change counter; bumped once per actual
    /// insertion or removal.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Inserts a triple. Returns true iff the store changed.
    pub fn add(&mut self, t: Triple) -> Result<bool, StoreError> {
        if !t.is_ground() {
            return Err(StoreError::VariableInData(t));
        }
        let (s, p) = match (&t.subject, &t.predicate) {
            (Term::Name(s), Term::Name(p)) => (s.clone(), p.clone()),
            _ => return Err(StoreError::MalformedTriple(t)),
        };
        if !self.triples.insert(t.clone()) {
            return Ok(false);
        }
        self.by_subject.entry(s).or_default().insert(t.clone());
        self.by_predicate.entry(p).or_default().insert(t.clone());
        self.by_object.entry(t.object.clone()).or_default().insert(t);
        self.revision += 1;
        Ok(true)
    }

    /// Removes a triple. Returns true iff it was present.
    pub fn remove(&mut self, t: &Triple) -> bool {
        if !self.triples.remove(t) {
            return false;
        }
        if let Term::Name(s) = &t.subject {
            if let Some(set) = self.by_subject.get_mut(s) {
                set.remove(t);
                if set.is_empty() {
                    self.by_subject.remove(s);
                }
            }
        }
        if let Term::Name(p) = &t.predicate {
            if let Some(set) = self.by_predicate.get_mut(p) {
                set.remove(t);
                if set.is_empty() {
                    self.by_predicate.remove(p);
                }
            }
        }
        if let Some(set) = self.by_object.get_mut(&t.object) {
            set.remove(t);
            if set.is_empty() {
                self.by_object.remove(&t.object);
            }
        }
        self.revision += 1;
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    /// All triples in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Triples matching the given constant positions, in canonical order.
    /// `None` positions match anything.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&Name>,
        predicate: Option<&Name>,
        object: Option<&Term>,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        static EMPTY: BTreeSet<Triple> = BTreeSet::new();
        let base: &BTreeSet<Triple> = match (subject, predicate, object) {
            (Some(s), _, _) => self.by_subject.get(s).unwrap_or(&EMPTY),
            (None, _, Some(o)) => self.by_object.get(o).unwrap_or(&EMPTY),
            (None, Some(p), None) => self.by_predicate.get(p).unwrap_or(&EMPTY),
            (None, None, None) => &self.triples,
        };
        let p_want = predicate.cloned();
        let o_want = object.cloned();
        Box::new(base.iter().filter(move |t| {
            if let Some(p) = &p_want {
                if t.predicate.as_name() != Some(p) {
                    return false;
                }
            }
            if let Some(o) = &o_want {
                if &t.object != o {
                    return false;
                }
            }
            true
        }))
    }

    /// Subjects of `(x, a, class)` triples, sorted.
    pub fn instances_of(&self, class: &Name) -> Vec<Name> {
        self.matching(None, Some(&Name::type_pred()), Some(&Term::Name(class.clone())))
            .filter_map(|t| t.subject.as_name().cloned())
            .collect()
    }

    /// All distinct terms appearing in any position, in canonical order.
    pub fn term_universe(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            for term in t.terms() {
                out.insert(term.clone());
            }
        }
        out
    }

    /// Canonical serialization: one sorted line per triple, `.`-terminated.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(&t.canonical());
            out.push_str(" .\n");
        }
        out
    }

    /// Order-independent content digest.
    pub fn digest(&self) -> StoreDigest {
        let mut hasher = Sha256::new();
        for t in &self.triples {
            hasher.update(t.canonical().as_bytes());
            hasher.update(b"\n");
        }
        StoreDigest(hasher.finalize().into())
    }
}

impl PartialEq for TripleStore {
    fn eq(&self, other: &Self) -> bool {
        // Revision is bookkeeping, not content.
        self.triples == other.triples
    }
}

impl Eq for TripleStore {}

impl fmt::Debug for TripleStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TripleStore[{} triples, rev {}]", self.len(), self.revision)?;
        for t in &self.triples {
            writeln!(f, "  {}", t)?;
        }
        Ok(())
    }
}

impl FromIterator<Triple> for TripleStore {
    /// Panics on non-ground triples; intended for literal test data.
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut s = TripleStore::new();
        for t in iter {
            s.add(t).expect("ground triple");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    fn t(s: &str, p: &str, o: Term) -> Triple {
        Triple::new(Term::name(s), Term::name(p), o)
    }

    #[test]
    fn add_is_set_insertion() {
        let mut store = TripleStore::new();
        let triple = t("casemanager:o1", "a", Term::name("casemanager:Order"));
        assert!(store.add(triple.clone()).unwrap());
        assert_eq!(store.len(), 1);
        assert!(!store.add(triple).unwrap());
        assert_eq!(store.len(), 1);
        assert_eq!(store.revision(), 1);
    }

    #[test]
    fn variables_are_rejected() {
        let mut store = TripleStore::new();
        let bad = Triple::new(Term::var("x"), Term::name("p"), Term::int(1));
        assert!(matches!(store.add(bad), Err(StoreError::VariableInData(_))));
        let bad2 = Triple::new(Term::str("s"), Term::name("p"), Term::int(1));
        assert!(matches!(store.add(bad2), Err(StoreError::MalformedTriple(_))));
    }

    #[test]
    fn remove_semantics() {
        let mut store = TripleStore::new();
        let triple = t("casemanager:o1", "casemanager:state", Term::str("Initial"));
        assert!(!store.remove(&triple));
        store.add(triple.clone()).unwrap();
        assert!(store.remove(&triple));
        assert!(store.is_empty());
    }

    #[test]
    fn revision_counts_every_change() {
        let mut store = TripleStore::new();
        let triple = t("casemanager:o1", "casemanager:state", Term::str("Initial"));
        store.add(triple.clone()).unwrap();
        store.remove(&triple);
        store.add(triple.clone()).unwrap();
        assert_eq!(store.revision(), 3);
        let single: TripleStore = [triple].into_iter().collect();
        assert_eq!(store, single);
    }

    #[test]
    fn digest_is_order_independent() {
        let a = t("x:s1", "x:p", Term::int(1));
        let b = t("x:s2", "x:p", Term::int(2));
        let s1: TripleStore = [a.clone(), b.clone()].into_iter().collect();
        let s2: TripleStore = [b, a.clone()].into_iter().collect();
        assert_eq!(s1.digest(), s2.digest());
        let s3: TripleStore = [a].into_iter().collect();
        assert_ne!(s1.digest(), s3.digest());
    }

    #[test]
    fn serialize_is_sorted_lines() {
        let s: TripleStore = [
            t("x:s2", "x:p", Term::int(2)),
            t("x:s1", "x:p", Term::str("Initial")),
        ]
        .into_iter()
        .collect();
        assert_eq!(s.serialize(), "x:s1 x:p \"Initial\" .\nx:s2 x:p 2 .\n");
        assert_eq!(TripleStore::new().serialize(), "");
    }

    #[test]
    fn matching_uses_all_positions() {
        let s: TripleStore = [
            t("x:s1", "x:p", Term::int(1)),
            t("x:s1", "x:q", Term::int(2)),
            t("x:s2", "x:p", Term::int(1)),
        ]
        .into_iter()
        .collect();
        assert_eq!(s.matching(Some(&Name::new("x:s1")), None, None).count(), 2);
        assert_eq!(s.matching(None, Some(&Name::new("x:p")), None).count(), 2);
        assert_eq!(s.matching(None, None, Some(&Term::int(1))).count(), 2);
        assert_eq!(
            s.matching(Some(&Name::new("x:s2")), Some(&Name::new("x:p")), Some(&Term::int(1)))
                .count(),
            1
        );
        assert_eq!(s.matching(None, None, None).count(), 3);
    }
}
