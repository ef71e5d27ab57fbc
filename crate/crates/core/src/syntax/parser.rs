use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::ast::{
    Aggregate, Atom, BodyElem, Comparator, Fact, Literal, Pos, Program, Rule, SafetyViolation,
    Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: predicate {predicate} used with arity {found}, previously {expected}")]
    Arity {
        pos: Pos,
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: unsafe rule: {detail}")]
    Unsafe { pos: Pos, detail: String },
    #[error("{pos}: rule head cannot carry `not`")]
    NafHead { pos: Pos },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Arity { pos, .. }
            | ParseError::Unsafe { pos, .. }
            | ParseError::NafHead { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    If,
    Minus,
    Not,
    Count,
    Cmp(Comparator),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Str(_) => "quoted text".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::If => "`:-`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Not => "`not`".into(),
            Tok::Count => "`#count`".into(),
            Tok::Cmp(c) => format!("`{}`", c.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn err(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos,
            message: message.into(),
        }
    }

    fn word(&mut self, allow_dots: bool) -> String {
        let start = self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len());
        let mut end = start;
        while let Some(&(i, c)) = self.chars.peek() {
            let take = is_word(c)
                || (allow_dots && c == '.' && self.peek_second().is_some_and(is_word));
            if !take {
                break;
            }
            end = i + c.len_utf8();
            self.bump();
        }
        self.src[start..end].to_string()
    }

    fn next(&mut self) -> Result<(Tok, Pos), ParseError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, pos));
        };
        let tok = match c {
            '(' | ')' | '{' | '}' | ',' | '.' => {
                self.bump();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                }
            }
            ':' => {
                self.bump();
                if self.peek() == Some('-') {
                    self.bump();
                    Tok::If
                } else {
                    Tok::Colon
                }
            }
            '-' => {
                self.bump();
                Tok::Minus
            }
            '<' | '>' => {
                self.bump();
                let eq = self.peek() == Some('=');
                if eq {
                    self.bump();
                }
                Tok::Cmp(match (c, eq) {
                    ('<', false) => Comparator::Lt,
                    ('<', true) => Comparator::Le,
                    ('>', false) => Comparator::Gt,
                    _ => Comparator::Ge,
                })
            }
            '=' => {
                self.bump();
                Tok::Cmp(Comparator::Eq)
            }
            '!' => {
                self.bump();
                if self.peek() != Some('=') {
                    return Err(Self::err(pos, "expected `!=`"));
                }
                self.bump();
                Tok::Cmp(Comparator::Ne)
            }
            '#' => {
                self.bump();
                let w = self.word(false);
                if w != "count" {
                    return Err(Self::err(pos, format!("unsupported aggregate `#{w}`")));
                }
                Tok::Count
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(Self::err(pos, "unterminated quoted text")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => s.push('\n'),
                            Some(c @ ('"' | '\\')) => s.push(c),
                            _ => return Err(Self::err(pos, "invalid escape in quoted text")),
                        },
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                let w = self.word(false);
                let n = w
                    .parse::<i64>()
                    .map_err(|_| Self::err(pos, format!("invalid integer `{w}`")))?;
                Tok::Int(n)
            }
            c if c.is_uppercase() || c == '_' => Tok::Var(self.word(false)),
            c if c.is_lowercase() => {
                let w = self.word(true);
                if w == "not" {
                    Tok::Not
                } else {
                    Tok::Ident(w)
                }
            }
            c => return Err(Self::err(pos, format!("unexpected character `{c}`"))),
        };
        Ok((tok, pos))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: Pos,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, pos) = lexer.next()?;
        Ok(Parser { lexer, tok, pos })
    }

    fn advance(&mut self) -> Result<Tok, ParseError> {
        let (tok, pos) = self.lexer.next()?;
        self.pos = pos;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos,
            message: format!("expected {wanted}, found {}", self.tok.describe()),
        })
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.tok == tok {
            self.advance()?;
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let term = match &self.tok {
            Tok::Ident(s) => Term::Symbol(s.clone()),
            Tok::Var(s) => Term::Var(s.clone()),
            Tok::Int(i) => Term::Int(*i),
            Tok::Str(s) => Term::Text(s.clone()),
            Tok::Minus => {
                self.advance()?;
                return match self.tok {
                    Tok::Int(i) => {
                        self.advance()?;
                        Ok(Term::Int(-i))
                    }
                    _ => self.unexpected("integer after `-`"),
                };
            }
            _ => return self.unexpected("term"),
        };
        self.advance()?;
        Ok(term)
    }

    fn terms(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut out = vec![self.term()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            out.push(self.term()?);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let Tok::Ident(name) = &self.tok else {
            return self.unexpected("predicate name");
        };
        let name = name.clone();
        self.advance()?;
        let mut args = Vec::new();
        if self.tok == Tok::LParen {
            self.advance()?;
            args = self.terms()?;
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Atom::new(name, args))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let naf = if self.tok == Tok::Not {
            self.advance()?;
            true
        } else {
            false
        };
        let strong = if self.tok == Tok::Minus {
            self.advance()?;
            true
        } else {
            false
        };
        let atom = self.atom()?;
        Ok(Literal { atom, strong, naf })
    }

    fn aggregate(&mut self) -> Result<Aggregate, ParseError> {
        self.expect(Tok::Count, "`#count`")?;
        self.expect(Tok::LBrace, "`{`")?;
        let template = self.terms()?;
        self.expect(Tok::Colon, "`:`")?;
        let mut conditions = vec![self.literal()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            conditions.push(self.literal()?);
        }
        self.expect(Tok::RBrace, "`}`")?;
        let Tok::Cmp(comparator) = self.tok else {
            return self.unexpected("comparison operator");
        };
        self.advance()?;
        let bound = self.term()?;
        Ok(Aggregate {
            template,
            conditions,
            comparator,
            bound,
        })
    }

    fn body_elem(&mut self) -> Result<BodyElem, ParseError> {
        if self.tok == Tok::Count {
            Ok(BodyElem::Aggregate(self.aggregate()?))
        } else {
            Ok(BodyElem::Literal(self.literal()?))
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let pos = self.pos;
        let head = self.literal()?;
        if head.naf {
            return Err(ParseError::NafHead { pos });
        }
        match self.tok {
            Tok::Dot => {
                self.advance()?;
                if !head.atom.is_ground() {
                    return Err(ParseError::Unsafe {
                        pos,
                        detail: format!("fact {head} contains variables"),
                    });
                }
                Ok(Statement::Fact(Fact { literal: head, pos }))
            }
            Tok::If => {
                self.advance()?;
                let mut body = vec![self.body_elem()?];
                while self.tok == Tok::Comma {
                    self.advance()?;
                    body.push(self.body_elem()?);
                }
                self.expect(Tok::Dot, "`,` or `.`")?;
                let mut rule = Rule { head, body, pos };
                name_anonymous_vars(&mut rule);
                match rule.check_safety() {
                    Ok(()) => Ok(Statement::Rule(rule)),
                    Err(SafetyViolation::NafHead) => Err(ParseError::NafHead { pos }),
                    Err(v) => Err(ParseError::Unsafe {
                        pos,
                        detail: v.to_string(),
                    }),
                }
            }
            _ => self.unexpected("`.` or `:-`"),
        }
    }
}

enum Statement {
    Fact(Fact),
    Rule(Rule),
}

/// Replaces every bare `_` with a fresh variable distinct from all others in
/// the rule, numbered in order of occurrence.
fn name_anonymous_vars(rule: &mut Rule) {
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut all_terms: Vec<&mut Term> = Vec::new();
    all_terms.extend(rule.head.atom.args.iter_mut());
    for b in rule.body.iter_mut() {
        match b {
            BodyElem::Literal(l) => all_terms.extend(l.atom.args.iter_mut()),
            BodyElem::Aggregate(a) => {
                all_terms.extend(a.template.iter_mut());
                for c in a.conditions.iter_mut() {
                    all_terms.extend(c.atom.args.iter_mut());
                }
                all_terms.push(&mut a.bound);
            }
        }
    }
    for t in all_terms.iter() {
        if let Term::Var(v) = &**t {
            used.insert(v.clone());
        }
    }
    let mut next = 1;
    for t in all_terms {
        if matches!(t, Term::Var(v) if v == "_") {
            let name = loop {
                let candidate = format!("_{next}");
                next += 1;
                if !used.contains(&candidate) {
                    break candidate;
                }
            };
            *t = Term::Var(name);
        }
    }
}

/// Parses knowledge-base text. Every predicate must keep one arity across the
/// whole source and every rule must be safe.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut parser = Parser::new(source)?;
    let mut program = Program::new();
    let mut arities: HashMap<String, usize> = HashMap::new();
    while parser.tok != Tok::Eof {
        let stmt = parser.statement()?;
        let (atoms, pos): (Vec<&Atom>, Pos) = match &stmt {
            Statement::Fact(f) => (vec![f.atom()], f.pos),
            Statement::Rule(r) => {
                let mut v = vec![&r.head.atom];
                for b in &r.body {
                    match b {
                        BodyElem::Literal(l) => v.push(&l.atom),
                        BodyElem::Aggregate(a) => v.extend(a.conditions.iter().map(|c| &c.atom)),
                    }
                }
                (v, r.pos)
            }
        };
        for atom in atoms {
            let expected = *arities
                .entry(atom.predicate.clone())
                .or_insert(atom.arity());
            if expected != atom.arity() {
                return Err(ParseError::Arity {
                    pos,
                    predicate: atom.predicate.clone(),
                    expected,
                    found: atom.arity(),
                });
            }
        }
        match stmt {
            Statement::Fact(f) => program.facts.push(f),
            Statement::Rule(r) => program.rules.push(r),
        }
    }
    Ok(program)
}

/// Parses a single rule or fact-shaped rule (`head :- body.`).
pub fn parse_rule(source: &str) -> Result<Rule, ParseError> {
    let program = parse_program(source)?;
    match (program.rules.len(), program.facts.len()) {
        (1, 0) => Ok(program.rules.into_iter().next().unwrap()),
        _ => Err(ParseError::Syntax {
            pos: Pos::new(1, 1),
            message: "expected exactly one rule".into(),
        }),
    }
}
