//! The diagnostic knowledge base: loading, cross-reference checks, the
//! diagnosis taxonomy and generated negative rules.

mod generate;
mod taxonomy;
mod vocab;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::engine::{stratify, EngineError};
use crate::questionnaire::{Question, Topic};
use crate::syntax::schema::{history_predicates, kind_of};
use crate::syntax::{
    parse_program, validate_schema, Atom, Diagnostic, Fact, ParseError, PredicateKind, Program,
    Rule, Term,
};

pub use generate::{
    build_polythetic_rules, generate_negative_rules, propagation_rules, ThresholdError,
    CRITERION_PREDICATES,
};
use vocab::{vocabulary_instances, VocabularyIndex};

pub use taxonomy::{compare_ids, Taxonomy, TaxonomyError, TaxonomyNode};

const SHIPPED: [(&str, &str); 4] = [
    ("schema.kb", include_str!("../../kb/schema.kb")),
    ("rules.kb", include_str!("../../kb/rules.kb")),
    ("propagation.kb", generate::PROPAGATION_SOURCE),
    ("questions.kb", include_str!("../../kb/questions.kb")),
];
const SHIPPED_MANIFEST: &str = include_str!("../../kb/manifest.toml");

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file}:{source}")]
    Parse { file: String, source: ParseError },
    #[error("schema errors:\n{}", join_lines(.0))]
    Schema(Vec<Diagnostic>),
    #[error("{file}: invalid manifest: {message}")]
    Manifest { file: String, message: String },
    #[error("identifier {id} declared twice")]
    DuplicateId { id: String },
    #[error("{context} refers to unknown identifier {id}")]
    Dangling { context: String, id: String },
    #[error("isA({child}, {parent}) relates identifiers of different kinds")]
    MixedIsA { child: String, parent: String },
    #[error("diagnosis taxonomy has a cycle through {}", .0.join(", "))]
    TaxonomyCycle(Vec<String>),
    #[error("diagnosis {id} has several parents: {}", parents.join(", "))]
    MultipleParents { id: String, parents: Vec<String> },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("topic {topic}: {reason}")]
    Topic { topic: String, reason: String },
    #[error("{dependency}: {reason}")]
    BadDependency { dependency: String, reason: String },
}

fn join_lines(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

/// Version and question wording shipped alongside the rules.
#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub version: String,
    #[serde(default)]
    pub templates: BTreeMap<String, String>,
}

impl Manifest {
    pub fn parse(file: &str, text: &str) -> Result<Self, KbError> {
        toml::from_str(text).map_err(|e| KbError::Manifest {
            file: file.to_string(),
            message: e.to_string(),
        })
    }
}

impl Default for Manifest {
    fn default() -> Self {
        let shipped = Manifest::parse("manifest.toml", SHIPPED_MANIFEST).expect("shipped manifest");
        Manifest {
            version: "unversioned".to_string(),
            templates: shipped.templates,
        }
    }
}

/// A criterion's dependence on a question.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dependency {
    pub diagnosis: String,
    pub letter: String,
    pub question: Question,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    program: Program,
    questions: Program,
    taxonomy: Taxonomy,
    asserted: BTreeSet<String>,
    manifest: Manifest,
    generated: Vec<Rule>,
    warnings: Vec<String>,
    symptoms: BTreeMap<String, String>,
    symptom_ids: BTreeMap<String, String>,
    attributes: BTreeMap<String, String>,
    dependencies: Vec<Dependency>,
}

struct Names {
    diagnoses: BTreeMap<String, String>,
    symptoms: BTreeMap<String, String>,
    attributes: BTreeMap<String, String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum IdKind {
    Diagnosis,
    Symptom,
    Attribute,
}

impl Names {
    fn kind(&self, id: &str) -> Option<IdKind> {
        if self.diagnoses.contains_key(id) {
            Some(IdKind::Diagnosis)
        } else if self.symptoms.contains_key(id) {
            Some(IdKind::Symptom)
        } else if self.attributes.contains_key(id) {
            Some(IdKind::Attribute)
        } else {
            None
        }
    }
}

fn collect_names(program: &Program) -> Result<Names, KbError> {
    let mut names = Names {
        diagnoses: BTreeMap::new(),
        symptoms: BTreeMap::new(),
        attributes: BTreeMap::new(),
    };
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for f in &program.facts {
        let slot = match f.atom().predicate.as_str() {
            "ichdDiagnosis" => 0,
            "ichdSymptom" => 1,
            "ichdAttribute" => 2,
            _ => continue,
        };
        if f.literal.strong {
            continue;
        }
        let id = f.atom().args[0].plain();
        let name = f.atom().args[1].plain();
        match seen.get(&id) {
            Some(prev) if *prev == (slot, name.clone()) => continue,
            Some(_) => return Err(KbError::DuplicateId { id }),
            None => {}
        }
        seen.insert(id.clone(), (slot, name.clone()));
        let map = match slot {
            0 => &mut names.diagnoses,
            1 => &mut names.symptoms,
            _ => &mut names.attributes,
        };
        map.insert(id, name);
    }
    Ok(names)
}

fn binary_facts<'a>(program: &'a Program, predicate: &'a str) -> impl Iterator<Item = (String, String)> + 'a {
    program
        .facts
        .iter()
        .filter(move |f| f.atom().predicate == predicate && !f.literal.strong)
        .map(|f| (f.atom().args[0].plain(), f.atom().args[1].plain()))
}

/// Whether two head patterns may denote the same ground atom.
fn may_unify(a: &Atom, b: &Atom) -> bool {
    a.predicate == b.predicate
        && a.args.len() == b.args.len()
        && a.args
            .iter()
            .zip(&b.args)
            .all(|(x, y)| x.is_var() || y.is_var() || x == y)
}

impl KnowledgeBase {
    /// The knowledge base compiled into the library.
    pub fn shipped() -> Self {
        let sources: Vec<(String, String)> = SHIPPED
            .iter()
            .map(|(n, t)| (n.to_string(), t.to_string()))
            .collect();
        let manifest = Manifest::parse("manifest.toml", SHIPPED_MANIFEST).expect("shipped manifest");
        KnowledgeBase::from_sources(&sources, manifest).expect("shipped knowledge base is valid")
    }

    /// Loads `.kb` files; a `.toml` path is read as the manifest.
    pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<Self, KbError> {
        let mut sources = Vec::new();
        let mut manifest = None;
        for p in paths {
            let p = p.as_ref();
            let text = fs::read_to_string(p).map_err(|source| KbError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            let name = p.display().to_string();
            if p.extension().is_some_and(|e| e == "toml") {
                manifest = Some(Manifest::parse(&name, &text)?);
            } else {
                sources.push((name, text));
            }
        }
        KnowledgeBase::from_sources(&sources, manifest.unwrap_or_default())
    }

    /// Loads every `.kb` file of a directory, in name order, plus its
    /// `manifest.toml` when present.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, KbError> {
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir).map_err(|source| KbError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|e| e == "kb")
                    || p.file_name().is_some_and(|n| n == "manifest.toml")
            })
            .collect();
        paths.sort();
        KnowledgeBase::load(&paths)
    }

    pub fn from_sources(sources: &[(String, String)], manifest: Manifest) -> Result<Self, KbError> {
        let mut all = Program::new();
        for (file, text) in sources {
            let p = parse_program(text).map_err(|source| KbError::Parse {
                file: file.clone(),
                source,
            })?;
            all.extend(p);
        }
        let diagnostics = validate_schema(&all);
        let mut warnings: Vec<String> = diagnostics
            .iter()
            .filter(|d| !d.is_error())
            .map(|d| d.to_string())
            .collect();
        let errors: Vec<Diagnostic> = diagnostics.into_iter().filter(|d| d.is_error()).collect();
        if !errors.is_empty() {
            return Err(KbError::Schema(errors));
        }

        let is_question = |a: &Atom| kind_of(&a.predicate) == Some(PredicateKind::Questionnaire);
        let mut program = Program::new();
        let mut questions = Program::new();
        for f in all.facts {
            if is_question(f.atom()) {
                questions.facts.push(f);
            } else {
                program.facts.push(f);
            }
        }
        for r in all.rules {
            if is_question(&r.head.atom) {
                questions.rules.push(r);
            } else {
                program.rules.push(r);
            }
        }

        let names = collect_names(&program)?;
        for rel in ["sameAs", "mutuallyExclusive"] {
            for (a, b) in binary_facts(&program, rel) {
                for id in [&a, &b] {
                    if !names.attributes.contains_key(id) {
                        return Err(KbError::Dangling {
                            context: format!("{rel}({a}, {b})"),
                            id: id.clone(),
                        });
                    }
                }
            }
        }
        let mut edges = Vec::new();
        for (child, parent) in binary_facts(&program, "isA") {
            let kinds = [names.kind(&child), names.kind(&parent)];
            for (id, k) in [(&child, kinds[0]), (&parent, kinds[1])] {
                if k.is_none() {
                    return Err(KbError::Dangling {
                        context: format!("isA({child}, {parent})"),
                        id: id.clone(),
                    });
                }
            }
            if kinds[0] != kinds[1] {
                return Err(KbError::MixedIsA { child, parent });
            }
            if kinds[0] == Some(IdKind::Diagnosis) {
                edges.push((child, parent));
            }
        }
        let taxonomy = Taxonomy::build(&names.diagnoses, &edges).map_err(|e| match e {
            TaxonomyError::Cycle(ids) => KbError::TaxonomyCycle(ids),
            TaxonomyError::MultipleParents { id, parents } => {
                KbError::MultipleParents { id, parents }
            }
        })?;

        let mut asserted = BTreeSet::new();
        for f in &program.facts {
            if f.atom().predicate == "diagnosis" && !f.literal.strong {
                let id = f.atom().args[0].plain();
                if !taxonomy.contains(&id) {
                    return Err(KbError::Dangling {
                        context: format!("fact {f}"),
                        id,
                    });
                }
                asserted.insert(id);
            }
        }
        for root in taxonomy.roots() {
            if !asserted.contains(&root.id) {
                warnings.push(format!(
                    "diagnosis {} has no parent and is not asserted; its criteria never become relevant",
                    root.id
                ));
            }
        }

        let vocab = VocabularyIndex::new(&program);
        let (generated, mut gen_warnings) = derive_negatives(&program, &vocab);
        warnings.append(&mut gen_warnings);
        program.rules.extend(generated.iter().cloned());
        stratify(&program)?;

        let criterion_heads: Vec<Atom> = program
            .rules
            .iter()
            .filter(|r| r.head.predicate() == "criterion" && !r.head.strong)
            .flat_map(|r| vocabulary_instances(r, &vocab))
            .collect();

        let mut kb = KnowledgeBase {
            symptom_ids: names
                .symptoms
                .iter()
                .map(|(id, name)| (name.clone(), id.clone()))
                .collect(),
            symptoms: names.symptoms,
            attributes: names.attributes,
            program,
            questions,
            taxonomy,
            asserted,
            manifest,
            generated,
            warnings,
            dependencies: Vec::new(),
        };
        kb.dependencies = kb.check_questions(&criterion_heads)?;
        Ok(kb)
    }

    fn check_questions(&self, criterion_heads: &[Atom]) -> Result<Vec<Dependency>, KbError> {
        let mut declared: BTreeMap<Topic, bool> = BTreeMap::new();
        for f in &self.questions.facts {
            if f.atom().predicate != "topic" {
                continue;
            }
            let name = f.atom().args[0].plain();
            let topic = Topic::from_name(&name).ok_or_else(|| KbError::Topic {
                topic: name.clone(),
                reason: "unknown topic".into(),
            })?;
            let dependent = match f.atom().args[1].plain().as_str() {
                "dependent" => true,
                "independent" => false,
                other => {
                    return Err(KbError::Topic {
                        topic: name,
                        reason: format!("dependence must be dependent or independent, not {other}"),
                    })
                }
            };
            if dependent != topic.is_dependent() {
                return Err(KbError::Topic {
                    topic: name,
                    reason: "declared with the wrong dependence".into(),
                });
            }
            declared.insert(topic, dependent);
        }

        let mut deps = Vec::new();
        for f in &self.questions.facts {
            if f.atom().predicate != "criterionDependsOn" {
                continue;
            }
            let bad = |reason: String| KbError::BadDependency {
                dependency: f.to_string(),
                reason,
            };
            let args = &f.atom().args;
            let diagnosis = args[0].plain();
            if !self.taxonomy.contains(&diagnosis) {
                return Err(bad(format!("unknown diagnosis {diagnosis}")));
            }
            let criterion = Atom::new("criterion", vec![args[0].clone(), args[1].clone()]);
            if !criterion_heads.iter().any(|h| may_unify(h, &criterion)) {
                return Err(bad(format!("no rule derives {criterion}")));
            }
            let topic_name = args[4].plain();
            let topic = Topic::from_name(&topic_name)
                .ok_or_else(|| bad(format!("unknown topic {topic_name}")))?;
            if !declared.contains_key(&topic) {
                return Err(bad(format!("topic {topic_name} is not declared")));
            }
            let (x, y) = (&args[2], &args[3]);
            match topic {
                Topic::Symptom => {
                    if !self.symptoms.contains_key(&x.plain()) || !matches!(x, Term::Symbol(_)) {
                        return Err(bad(format!("{x} is not a symptom id")));
                    }
                }
                Topic::Exam | Topic::ReportedCriterion => {}
                _ => {
                    if !self.symptom_ids.contains_key(&x.plain()) {
                        return Err(bad(format!("{x} is not a symptom name")));
                    }
                }
            }
            if topic == Topic::Attribute && !self.attributes.contains_key(&y.plain()) {
                return Err(bad(format!("{y} is not an attribute id")));
            }
            if topic.numeric().is_some() && !y.as_int().is_some_and(|v| v >= 0) {
                return Err(bad(format!("{y} is not a non-negative integer")));
            }
            deps.push(Dependency {
                diagnosis,
                letter: args[1].plain(),
                question: Question::new(x.clone(), y.clone(), topic),
            });
        }
        Ok(deps)
    }

    /// Diagnostic rules and vocabulary, including generated negative rules.
    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Topic declarations and criterion dependencies.
    pub fn questions(&self) -> &Program {
        &self.questions
    }

    pub fn generated_rules(&self) -> &[Rule] {
        &self.generated
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn version(&self) -> &str {
        &self.manifest.version
    }

    pub fn is_asserted(&self, id: &str) -> bool {
        self.asserted.contains(id)
    }

    /// Diagnoses to be determined: every taxonomy node except those asserted
    /// by facts, in taxonomy order.
    pub fn diagnoses(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.taxonomy.iter().filter(|n| !self.asserted.contains(&n.id))
    }

    pub fn diagnosis_count(&self) -> usize {
        self.diagnoses().count()
    }

    pub fn symptom_name(&self, id: &str) -> Option<&str> {
        self.symptoms.get(id).map(String::as_str)
    }

    pub fn symptom_id(&self, name: &str) -> Option<&str> {
        self.symptom_ids.get(name).map(String::as_str)
    }

    pub fn attribute_name(&self, id: &str) -> Option<&str> {
        self.attributes.get(id).map(String::as_str)
    }

    pub fn dependencies(&self) -> &[Dependency] {
        &self.dependencies
    }

    /// Every distinct question some criterion depends on, sorted.
    pub fn possible_questions(&self) -> Vec<Question> {
        let set: BTreeSet<Question> = self.dependencies.iter().map(|d| d.question.clone()).collect();
        set.into_iter().collect()
    }

    /// Looks up a question from its textual parts; the value is matched
    /// against the declared question's value by its plain text.
    pub fn find_question(&self, subject: &str, value: &str, topic: Topic) -> Option<Question> {
        self.dependencies
            .iter()
            .map(|d| &d.question)
            .find(|q| q.topic == topic && q.subject.plain() == subject && q.value.plain() == value)
            .cloned()
    }

    /// History facts asserted by answering `q` with `polarity`.
    pub fn answer_facts(&self, q: &Question, polarity: bool) -> Option<Fact> {
        let args = match q.topic {
            Topic::Symptom => vec![q.subject.clone()],
            Topic::Exam => vec![q.subject.clone(), q.value.clone()],
            Topic::ReportedCriterion => vec![q.subject.clone()],
            _ => {
                let id = self.symptom_id(&q.subject.plain())?;
                vec![Term::symbol(id), q.value.clone()]
            }
        };
        let atom = Atom::new(q.topic.predicate(), args);
        Some(if polarity {
            Fact::positive(atom)
        } else {
            Fact::strong(atom)
        })
    }

    /// Question wording from the manifest templates.
    pub fn question_text(&self, q: &Question) -> String {
        let label = match q.topic {
            Topic::Attribute => self
                .attribute_name(&q.value.plain())
                .map(str::to_string)
                .unwrap_or_else(|| q.value.plain()),
            _ => q.value.plain(),
        };
        match self.manifest.templates.get(q.topic.name()) {
            Some(t) => t
                .replace("{subject}", &q.subject.plain())
                .replace("{value}", &q.value.plain())
                .replace("{label}", &label),
            None => format!("{}: {} / {}?", q.topic, q.subject.plain(), label),
        }
    }
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.diagnosis, self.letter, self.question)
    }
}

/// Negative rules for positive criterion and subcriterion rules whose head
/// has neither a written negative rule nor a second positive rule.
fn derive_negatives(program: &Program, vocab: &VocabularyIndex) -> (Vec<Rule>, Vec<String>) {
    let history: BTreeSet<&str> = history_predicates().collect();
    let criterion_rules: Vec<&Rule> = program
        .rules
        .iter()
        .filter(|r| CRITERION_PREDICATES.contains(&r.head.predicate()))
        .collect();
    let keys: Vec<Vec<Atom>> = criterion_rules
        .iter()
        .map(|r| vocabulary_instances(r, vocab))
        .collect();
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for (i, r) in criterion_rules.iter().enumerate() {
        if r.head.strong {
            continue;
        }
        let overlaps = |strong: bool| {
            criterion_rules.iter().enumerate().any(|(j, other)| {
                j != i
                    && other.head.strong == strong
                    && keys[i]
                        .iter()
                        .any(|a| keys[j].iter().any(|b| may_unify(a, b)))
            })
        };
        if overlaps(true) {
            continue;
        }
        if overlaps(false) {
            warnings.push(format!(
                "{}: head {} has several rules; write its negative rules by hand",
                r.pos, r.head
            ));
            continue;
        }
        let generated = generate_negative_rules(r, &history);
        if generated.is_empty() {
            warnings.push(format!(
                "{}: no history literal in `{r}`; no negative rule generated",
                r.pos
            ));
        }
        out.extend(generated);
    }
    (out, warnings)
}
