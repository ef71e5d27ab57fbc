//! Terminal front-ends: interactive questionnaire, knowledge-base checks,
//! negative-rule preview and the random-answer simulation harness.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ichd_core::knowledge::KnowledgeBase;
use ichd_core::questionnaire::{
    Answer, AnswerRecord, DiagnosticStatus, History, NextStep, Outcome, Question, Questionnaire,
};
use ichd_core::simulation::{simulate, to_csv, SimulationConfig, SimulationStats};
use ichd_core::syntax::{print_program, Program};

#[derive(Debug, Parser)]
#[command(name = "ichd", about = "Primary headache diagnosis questionnaire")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs the questionnaire in the terminal, reading y/n answers.
    Ask {
        #[arg(long)]
        kb_dir: Option<PathBuf>,
        /// Answers file to replay before reading from the terminal.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Writes the final answers to this file.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Runs seeded random-answer questionnaires and reports length statistics.
    Simulate {
        #[arg(long)]
        kb_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-run CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Probability of answering yes.
        #[arg(long, default_value_t = 0.5)]
        yes_prob: f64,
    },
    /// Validates a knowledge base.
    Check {
        #[arg(long)]
        kb_dir: Option<PathBuf>,
    },
    /// Prints the generated negative rules.
    GenNeg {
        #[arg(long)]
        kb_dir: Option<PathBuf>,
    },
}

/// The answers file format, shared with the HTTP service request body.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswersFile {
    pub answers: Vec<AnswerRecord>,
}

pub fn load_kb(dir: Option<&Path>) -> anyhow::Result<KnowledgeBase> {
    match dir {
        Some(d) => KnowledgeBase::load_dir(d)
            .with_context(|| format!("loading knowledge base from {}", d.display())),
        None => Ok(KnowledgeBase::shipped()),
    }
}

/// Runs a command; returns the process exit code.
pub fn run(
    cli: Cli,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<i32> {
    match cli.command {
        Command::Ask {
            kb_dir,
            replay,
            save,
        } => {
            let q = Questionnaire::new(load_kb(kb_dir.as_deref())?)?;
            let replay = match replay {
                Some(p) => read_answers(&p)?,
                None => AnswersFile::default(),
            };
            let history = ask(&q, &replay.answers, input, out)?;
            if let Some(p) = save {
                let file = AnswersFile {
                    answers: history.entries().iter().map(AnswerRecord::of).collect(),
                };
                fs::write(&p, serde_json::to_string_pretty(&file)? + "\n")
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(0)
        }
        Command::Simulate {
            kb_dir,
            runs,
            seed,
            out: path,
            yes_prob,
        } => {
            let q = Questionnaire::new(load_kb(kb_dir.as_deref())?)?;
            let config = SimulationConfig {
                runs: runs as usize,
                seed,
                yes_prob,
            };
            let sim = simulate(&q, &config)?;
            if let Some(p) = path {
                fs::write(&p, to_csv(&sim.records)).with_context(|| format!("writing {}", p.display()))?;
            }
            writeln!(out, "candidate questions: {}", q.possible_questions().len())?;
            write!(out, "{}", SimulationStats::from_records(&sim.records).report())?;
            Ok(0)
        }
        Command::Check { kb_dir } => check(kb_dir.as_deref(), out, err),
        Command::GenNeg { kb_dir } => {
            let kb = load_kb(kb_dir.as_deref())?;
            for w in kb.warnings() {
                writeln!(out, "% warning: {w}")?;
            }
            let p = Program {
                facts: Vec::new(),
                rules: kb.generated_rules().to_vec(),
            };
            write!(out, "{}", print_program(&p))?;
            Ok(0)
        }
    }
}

fn read_answers(p: &Path) -> anyhow::Result<AnswersFile> {
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
}

fn check(dir: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let kb = match load_kb(dir) {
        Ok(kb) => kb,
        Err(e) => {
            writeln!(err, "error: {e:#}")?;
            return Ok(1);
        }
    };
    for w in kb.warnings() {
        writeln!(err, "warning: {w}")?;
    }
    let q = match Questionnaire::new(kb) {
        Ok(q) => q,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(1);
        }
    };
    let kb = q.kb();
    writeln!(out, "knowledge base {}: ok", kb.version())?;
    writeln!(out, "diagnoses: {}", kb.diagnosis_count())?;
    writeln!(out, "rules: {} ({} generated)", kb.program().rules.len(), kb.generated_rules().len())?;
    writeln!(out, "questions: {}", q.possible_questions().len())?;
    Ok(0)
}

fn names<'a>(kb: &'a KnowledgeBase, ids: &'a [String]) -> impl Iterator<Item = String> + 'a {
    ids.iter().map(move |id| {
        let name = kb.taxonomy().get(id).map_or("", |n| n.name.as_str());
        format!("{id} {name}")
    })
}

fn print_status(kb: &KnowledgeBase, s: &DiagnosticStatus, out: &mut dyn Write) -> std::io::Result<()> {
    for (label, ids) in [
        ("compatible", &s.compatible),
        ("not compatible", &s.not_compatible),
        ("undetermined", &s.undetermined),
    ] {
        writeln!(out, "{label}:")?;
        for line in names(kb, ids) {
            writeln!(out, "  {line}")?;
        }
    }
    Ok(())
}

fn read_answer(input: &mut dyn BufRead, out: &mut dyn Write) -> anyhow::Result<Option<bool>> {
    loop {
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        match line.trim().to_ascii_lowercase().as_str() {
            "y" | "yes" => return Ok(Some(true)),
            "n" | "no" => return Ok(Some(false)),
            _ => writeln!(out, "please answer y or n")?,
        }
    }
}

/// The interactive loop. Replayed answers are used for the questions they
/// cover; every other question is read from `input`.
pub fn ask(
    q: &Questionnaire,
    replay: &[AnswerRecord],
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> anyhow::Result<History> {
    let replayed = q.history_of(replay)?;
    q.current_status(&replayed)
        .context("replayed answers are inconsistent")?;
    let known: BTreeMap<&Question, bool> = replayed
        .entries()
        .iter()
        .map(|a| (&a.question, a.polarity))
        .collect();
    let kb = q.kb();
    let mut history = History::new();
    let outcome = loop {
        let assessment = q.assess(&history)?;
        let score = match assessment.next {
            NextStep::Completed => break Outcome::Completed,
            NextStep::Stuck => break Outcome::Stuck,
            NextStep::Ask(s) => s,
        };
        writeln!(out, "Q{}. {} [y/n]", history.len() + 1, kb.question_text(&score.question))?;
        let answer = match known.get(&score.question) {
            Some(&a) => Some(a),
            None => read_answer(input, out)?,
        };
        let Some(answer) = answer else {
            break Outcome::Aborted;
        };
        writeln!(out, "answer: {}", if answer { "yes" } else { "no" })?;
        history.push(Answer::real(score.question, answer))?;
        let after = q.current_status(&history)?;
        for (label, before, now) in [
            ("compatible", &assessment.status.compatible, &after.compatible),
            ("not compatible", &assessment.status.not_compatible, &after.not_compatible),
        ] {
            let fresh: Vec<String> = now.iter().filter(|d| !before.contains(d)).cloned().collect();
            for line in names(kb, &fresh) {
                writeln!(out, "  now {label}: {line}")?;
            }
        }
    };
    let status = q.current_status(&history)?;
    let summary = match outcome {
        Outcome::Completed => "completed",
        Outcome::Stuck => "stuck, no relevant question left",
        Outcome::Aborted if status.determined_count() == 0 => "aborted, all undetermined",
        Outcome::Aborted => "aborted",
    };
    writeln!(out, "\noutcome: {summary} after {} answers", history.len())?;
    print_status(kb, &status, out)?;
    Ok(history)
}
