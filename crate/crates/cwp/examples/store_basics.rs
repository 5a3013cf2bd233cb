//! Terms, triples, and the indexed store: set semantics, deterministic
//! serialization, and order-independent digests.
//!
//!     cargo run --example store_basics

use cwp::syntax::parse_triples;
use cwp::{Term, Triple, TripleStore};

fn main() {
    let mut store = TripleStore::new();
    let state = Triple::new(
        Term::name("casemanager:o1"),
        Term::name("casemanager:state"),
        Term::str("Initial"),
    );
    let typed = Triple::new(
        Term::name("casemanager:o1"),
        Term::name("a"),
        Term::name("casemanager:Order"),
    );

    assert!(store.add(typed).unwrap());
    assert!(store.add(state.clone()).unwrap());
    // Inserting an existing triple is a no-op and does not bump the
    // revision counter.
    assert!(!store.add(state.clone()).unwrap());
    println!("store has {} triples at revision {}", store.len(), store.revision());

    // Canonical text: one sorted line per triple.
    print!("{}", store.serialize());

    // The digest depends on content only, not on insertion order.
    let mut triples: Vec<Triple> = store.iter().cloned().collect();
    triples.reverse();
    let reordered: TripleStore = triples.into_iter().collect();
    assert_eq!(store.digest(), reordered.digest());
    println!("digest {}", store.digest());

    // Round-trip through the text format.
    let parsed = parse_triples(&store.serialize()).unwrap();
    assert_eq!(parsed, store);

    store.remove(&state);
    println!("after remove: {} triples, revision {}", store.len(), store.revision());
}
