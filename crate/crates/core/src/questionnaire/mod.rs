//! Adaptive questionnaire over the knowledge base: diagnostic status,
//! candidate questions, simulated answers and maximin selection.

mod closure;
mod question;
mod wire;

use std::cmp::Reverse;
use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{CompiledProgram, EngineError, GroundModel, TruthValue};
use crate::knowledge::KnowledgeBase;
use crate::syntax::{parse_program, Atom, Fact, Term};
use closure::{BoundsConflict, NumericDomain};

pub use question::*;
pub use wire::{AnswerRecord, RecordError, WireValue};

/// Candidate generation: a question is possible when some criterion depends
/// on it, relevant while such a criterion is open under a confirmed parent
/// diagnosis, and askable when relevant and, for dependent topics, its
/// symptom is present.
pub const QUESTION_RULES: &str = r#"
possible(X, Y, T) :- criterionDependsOn(D, L, X, Y, T).
relevant(X, Y, T) :- criterionDependsOn(D, L, X, Y, T), not criterion(D, L),
    not -diagnosis(D), isA(D, P), diagnosis(P).
askable(X, Y, T) :- possible(X, Y, T), relevant(X, Y, T), topic(T, independent).
askable(N, Y, T) :- possible(N, Y, T), relevant(N, Y, T), topic(T, dependent),
    ichdSymptom(Id, N), symptom(Id).
"#;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuestionnaireError {
    #[error("question {0} is not part of the knowledge base")]
    UnknownQuestion(Question),
    #[error(transparent)]
    Duplicate(#[from] DuplicateAnswer),
    #[error("inconsistent answers: {}", answers.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("; "))]
    Inconsistent {
        answers: Vec<Answer>,
        atom: Option<Atom>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Partition of the diagnoses into compatible, not compatible and
/// undetermined, in taxonomy order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticStatus {
    pub compatible: Vec<String>,
    pub not_compatible: Vec<String>,
    pub undetermined: Vec<String>,
}

impl DiagnosticStatus {
    pub fn determined_count(&self) -> usize {
        self.compatible.len() + self.not_compatible.len()
    }

    pub fn state_of(&self, id: &str) -> TruthValue {
        if self.compatible.iter().any(|d| d == id) {
            TruthValue::True
        } else if self.not_compatible.iter().any(|d| d == id) {
            TruthValue::StrongFalse
        } else {
            TruthValue::Unknown
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateScore {
    #[serde(skip)]
    pub question: Question,
    pub d_yes: usize,
    pub d_no: usize,
    pub score: usize,
}

impl CandidateScore {
    pub fn new(question: Question, d_yes: usize, d_no: usize) -> Self {
        CandidateScore {
            question,
            d_yes,
            d_no,
            score: d_yes.min(d_no),
        }
    }

    /// Selection order: higher score, then higher best case, then the
    /// smaller question.
    fn key(&self) -> (usize, usize, Reverse<&Question>) {
        (self.score, self.d_yes.max(self.d_no), Reverse(&self.question))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextStep {
    Ask(CandidateScore),
    Completed,
    Stuck,
}

/// Status and next step for a history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub status: DiagnosticStatus,
    pub candidates: Vec<Question>,
    pub next: NextStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Completed,
    Stuck,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub question: Question,
    pub score: CandidateScore,
    pub answer: bool,
    pub candidates: usize,
    pub newly_compatible: Vec<String>,
    pub newly_not_compatible: Vec<String>,
    pub status: DiagnosticStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub outcome: Outcome,
    pub status: DiagnosticStatus,
    pub history: History,
    pub transcript: Vec<StepRecord>,
}

impl RunReport {
    /// Number of answers after which some diagnosis was first compatible.
    pub fn first_compatible_length(&self) -> Option<usize> {
        self.transcript
            .iter()
            .position(|s| !s.status.compatible.is_empty())
            .map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {source}")]
pub struct RunError {
    pub step: usize,
    pub source: QuestionnaireError,
}

/// The questionnaire for one knowledge base, with its programs compiled.
#[derive(Debug, Clone)]
pub struct Questionnaire {
    kb: KnowledgeBase,
    status_program: CompiledProgram,
    question_program: CompiledProgram,
    numeric: NumericDomain,
    questions: Vec<Question>,
    diagnoses: Vec<(String, Atom)>,
}

enum Failure {
    Engine(EngineError),
    Bounds,
}

impl Questionnaire {
    pub fn new(kb: KnowledgeBase) -> Result<Self, QuestionnaireError> {
        let questions = kb.possible_questions();
        let numeric = NumericDomain::new(&kb, &questions);
        let mut domain = numeric.facts();
        for q in &questions {
            for polarity in [true, false] {
                domain.push(
                    kb.answer_facts(q, polarity)
                        .ok_or_else(|| QuestionnaireError::UnknownQuestion(q.clone()))?,
                );
            }
        }
        let status_program = CompiledProgram::compile(kb.program(), &domain)?;
        let mut full = kb.program().clone();
        full.extend(kb.questions().clone());
        full.extend(parse_program(QUESTION_RULES).expect("question rules parse"));
        let question_program = CompiledProgram::compile(&full, &domain)?;
        let diagnoses = kb
            .diagnoses()
            .map(|n| {
                let atom = Atom::new("diagnosis", vec![Term::symbol(&n.id)]);
                (n.id.clone(), atom)
            })
            .collect();
        Ok(Questionnaire {
            kb,
            status_program,
            question_program,
            numeric,
            questions,
            diagnoses,
        })
    }

    pub fn shipped() -> Self {
        Questionnaire::new(KnowledgeBase::shipped()).expect("shipped questionnaire compiles")
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    /// Every question some criterion depends on.
    pub fn possible_questions(&self) -> &[Question] {
        &self.questions
    }

    /// Resolves a question given by its textual parts.
    pub fn resolve(&self, subject: &str, value: &str, topic: Topic) -> Option<Question> {
        self.kb.find_question(subject, value, topic)
    }

    /// The fact asserted by an answer.
    pub fn answer_to_facts(&self, answer: &Answer) -> Result<Vec<Fact>, QuestionnaireError> {
        if !self.questions.contains(&answer.question) {
            return Err(QuestionnaireError::UnknownQuestion(answer.question.clone()));
        }
        self.kb
            .answer_facts(&answer.question, answer.polarity)
            .map(|f| vec![f])
            .ok_or_else(|| QuestionnaireError::UnknownQuestion(answer.question.clone()))
    }

    /// Answer facts plus the numeric bounds they entail.
    fn facts_of<'a>(&self, answers: impl Iterator<Item = &'a Answer>) -> Result<Vec<Fact>, Failure> {
        let mut facts = Vec::new();
        let mut numeric = Vec::new();
        for a in answers {
            let fact = self
                .kb
                .answer_facts(&a.question, a.polarity)
                .expect("answers are validated");
            if let (Some(_), Some(v)) = (a.question.topic.numeric(), a.question.value.as_int()) {
                let symptom = fact.atom().args[0].plain();
                numeric.push((symptom, a.question.topic, v, a.polarity));
            }
            facts.push(fact);
        }
        let closure = self
            .numeric
            .closure(numeric.iter().map(|(s, t, v, p)| (s.as_str(), *t, *v, *p)))
            .map_err(|_: BoundsConflict| Failure::Bounds)?;
        facts.extend(closure);
        Ok(facts)
    }

    fn validate(&self, h: &History) -> Result<(), QuestionnaireError> {
        let mut seen = BTreeSet::new();
        for a in h.entries() {
            if !self.questions.contains(&a.question) {
                return Err(QuestionnaireError::UnknownQuestion(a.question.clone()));
            }
            if !seen.insert(&a.question) {
                return Err(DuplicateAnswer(a.question.clone()).into());
            }
        }
        Ok(())
    }

    fn evaluate<'p>(
        &self,
        program: &'p CompiledProgram,
        answers: &[Answer],
    ) -> Result<GroundModel<'p>, Failure> {
        let facts = self.facts_of(answers.iter())?;
        program.evaluate(&facts).map_err(Failure::Engine)
    }

    /// Evaluates the question program on a history, reporting a minimal set
    /// of conflicting answers on inconsistency.
    fn model(&self, h: &History) -> Result<GroundModel<'_>, QuestionnaireError> {
        self.validate(h)?;
        match self.evaluate(&self.question_program, h.entries()) {
            Ok(m) => Ok(m),
            Err(Failure::Engine(EngineError::Inconsistent { .. })) | Err(Failure::Bounds) => {
                Err(self.conflict(h))
            }
            Err(Failure::Engine(e)) => Err(e.into()),
        }
    }

    fn consistent(&self, answers: &[Answer]) -> Result<(), Option<Atom>> {
        match self.evaluate(&self.status_program, answers) {
            Ok(_) => Ok(()),
            Err(Failure::Engine(EngineError::Inconsistent { atom })) => Err(Some(atom)),
            Err(Failure::Bounds) => Err(None),
            Err(Failure::Engine(_)) => Ok(()),
        }
    }

    /// Shrinks an inconsistent history to a minimal inconsistent subset by
    /// dropping each answer whose removal keeps the rest inconsistent.
    fn conflict(&self, h: &History) -> QuestionnaireError {
        let mut kept: Vec<Answer> = h.entries().to_vec();
        let mut i = 0;
        while i < kept.len() {
            let mut trial = kept.clone();
            trial.remove(i);
            if self.consistent(&trial).is_err() {
                kept = trial;
            } else {
                i += 1;
            }
        }
        let atom = self.consistent(&kept).err().flatten();
        QuestionnaireError::Inconsistent {
            answers: kept,
            atom,
        }
    }

    fn status_from(&self, m: &GroundModel<'_>) -> DiagnosticStatus {
        let mut s = DiagnosticStatus::default();
        for (id, atom) in &self.diagnoses {
            match m.get(atom) {
                TruthValue::True => s.compatible.push(id.clone()),
                TruthValue::StrongFalse => s.not_compatible.push(id.clone()),
                TruthValue::Unknown => s.undetermined.push(id.clone()),
            }
        }
        s
    }

    fn determined_in(&self, m: &GroundModel<'_>) -> usize {
        self.diagnoses
            .iter()
            .filter(|(_, a)| m.get(a).is_determined())
            .count()
    }

    pub fn current_status(&self, h: &History) -> Result<DiagnosticStatus, QuestionnaireError> {
        Ok(self.status_from(&self.model(h)?))
    }

    fn candidates_in(&self, m: &GroundModel<'_>, h: &History) -> Vec<Question> {
        self.questions
            .iter()
            .filter(|q| {
                let askable = Atom::new(
                    "askable",
                    vec![q.subject.clone(), q.value.clone(), Term::symbol(q.topic.name())],
                );
                m.get(&askable) == TruthValue::True
                    && !h.contains(q)
                    && !m
                        .get(self.kb.answer_facts(q, true).expect("known question").atom())
                        .is_determined()
            })
            .cloned()
            .collect()
    }

    /// Relevant, unanswered questions whose answer is not already entailed.
    pub fn candidate_questions(&self, h: &History) -> Result<Vec<Question>, QuestionnaireError> {
        let m = self.model(h)?;
        Ok(self.candidates_in(&m, h))
    }

    /// Determined diagnosis count after a hypothetical answer; a
    /// contradicting answer counts as determining nothing new.
    pub fn simulate_answer(
        &self,
        h: &History,
        q: &Question,
        polarity: bool,
    ) -> Result<usize, QuestionnaireError> {
        let m = self.model(h)?;
        Ok(self.simulate_in(h, self.determined_in(&m), q, polarity))
    }

    fn simulate_in(&self, h: &History, current: usize, q: &Question, polarity: bool) -> usize {
        let mut answers = h.entries().to_vec();
        answers.push(Answer::simulated(q.clone(), polarity));
        match self.evaluate(&self.status_program, &answers) {
            Ok(m) => self.determined_in(&m),
            Err(_) => current,
        }
    }

    /// Scores of every candidate, in candidate order.
    pub fn scores(&self, h: &History) -> Result<Vec<CandidateScore>, QuestionnaireError> {
        let m = self.model(h)?;
        let current = self.determined_in(&m);
        let candidates = self.candidates_in(&m, h);
        Ok(self.score_all(h, current, &candidates))
    }

    fn score_all(&self, h: &History, current: usize, candidates: &[Question]) -> Vec<CandidateScore> {
        candidates
            .par_iter()
            .map(|q| {
                let d_yes = self.simulate_in(h, current, q, true);
                let d_no = self.simulate_in(h, current, q, false);
                CandidateScore::new(q.clone(), d_yes, d_no)
            })
            .collect()
    }

    /// Status and the next question by maximin determined count.
    pub fn assess(&self, h: &History) -> Result<Assessment, QuestionnaireError> {
        let m = self.model(h)?;
        let status = self.status_from(&m);
        let candidates = self.candidates_in(&m, h);
        let next = if status.undetermined.is_empty() {
            NextStep::Completed
        } else if candidates.is_empty() {
            NextStep::Stuck
        } else {
            let current = status.determined_count();
            let scores = self.score_all(h, current, &candidates);
            let best = scores
                .into_iter()
                .max_by(|a, b| a.key().cmp(&b.key()))
                .expect("non-empty candidates");
            NextStep::Ask(best)
        };
        Ok(Assessment {
            status,
            candidates,
            next,
        })
    }

    pub fn select_next(&self, h: &History) -> Result<NextStep, QuestionnaireError> {
        Ok(self.assess(h)?.next)
    }

    /// Asks questions until every diagnosis is determined, no question is
    /// left, or the oracle gives no answer.
    pub fn run<F>(&self, mut oracle: F) -> Result<RunReport, RunError>
    where
        F: FnMut(&Question) -> Option<bool>,
    {
        self.run_from(History::new(), &mut oracle)
    }

    /// Continues a questionnaire from an existing history.
    pub fn run_from<F>(&self, mut history: History, oracle: &mut F) -> Result<RunReport, RunError>
    where
        F: FnMut(&Question) -> Option<bool>,
    {
        let mut transcript = Vec::new();
        loop {
            let step = history.len();
            let assessment = self
                .assess(&history)
                .map_err(|source| RunError { step, source })?;
            let score = match assessment.next {
                NextStep::Completed | NextStep::Stuck => {
                    let outcome = if assessment.next == NextStep::Completed {
                        Outcome::Completed
                    } else {
                        Outcome::Stuck
                    };
                    return Ok(RunReport {
                        outcome,
                        status: assessment.status,
                        history,
                        transcript,
                    });
                }
                NextStep::Ask(score) => score,
            };
            let Some(answer) = oracle(&score.question) else {
                return Ok(RunReport {
                    outcome: Outcome::Aborted,
                    status: assessment.status,
                    history,
                    transcript,
                });
            };
            history
                .push(Answer::real(score.question.clone(), answer))
                .map_err(|e| RunError {
                    step,
                    source: e.into(),
                })?;
            let status = self
                .current_status(&history)
                .map_err(|source| RunError { step, source })?;
            let before = &assessment.status;
            transcript.push(StepRecord {
                question: score.question.clone(),
                score,
                answer,
                candidates: assessment.candidates.len(),
                newly_compatible: newly(&before.compatible, &status.compatible),
                newly_not_compatible: newly(&before.not_compatible, &status.not_compatible),
                status,
            });
        }
    }
}

fn newly(before: &[String], after: &[String]) -> Vec<String> {
    after.iter().filter(|d| !before.contains(d)).cloned().collect()
}
