use crate::engine::matching::{apply, solutions, LiteralIndex, Subst};
use crate::syntax::schema::kind_of;
use crate::syntax::{Atom, Literal, PredicateKind, Program, Rule};

/// Vocabulary facts of a program, for resolving rule heads.
pub(crate) struct VocabularyIndex(LiteralIndex);

impl VocabularyIndex {
    pub(crate) fn new(p: &Program) -> Self {
        let mut index = LiteralIndex::default();
        for f in &p.facts {
            if kind_of(&f.atom().predicate) == Some(PredicateKind::Vocabulary) {
                index.insert(f.atom().clone(), f.literal.strong);
            }
        }
        VocabularyIndex(index)
    }
}

/// Head instances of `r` obtained by solving its positive vocabulary
/// literals; variables bound elsewhere stay in place.
pub(crate) fn vocabulary_instances(r: &Rule, vocab: &VocabularyIndex) -> Vec<Atom> {
    let lits: Vec<&Literal> = r
        .literals()
        .filter(|l| !l.naf && kind_of(l.predicate()) == Some(PredicateKind::Vocabulary))
        .collect();
    let mut subs = Vec::new();
    solutions(&lits, &vocab.0, Subst::new(), &mut subs);
    let mut heads: Vec<Atom> = subs.iter().map(|s| apply(&r.head.atom, s)).collect();
    heads.sort();
    heads.dedup();
    heads
}
