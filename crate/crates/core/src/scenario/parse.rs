//! Line-oriented scenario DSL and the act/operator library format.
//!
//! Scenario files hold one command per line; `{ ... }` blocks may span
//! lines. `#` starts a comment. Symbols follow the term lexicon:
//! lowercase-initial constants, uppercase-initial variables.

use crate::acts::{ActClass, ActInstance, ActLibrary, ActSchema};
use crate::formula::AttitudeFormula;
use crate::plan::{Literal, Operator};
use crate::store::{AttitudeType, StereotypeMember, TriState};
use crate::term::{Proposition, Symbol, Term, TermError};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {line}, column {column}: expected {expected}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
}

/// Which store a command addresses and the belief chain inside it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path {
    pub owner: Symbol,
    pub hops: Vec<Symbol>,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.owner)?;
        for h in &self.hops {
            write!(f, " > {h}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerformSide {
    Speaker,
    Hearer,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShowFormat {
    Ascii,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioCommand {
    DeclareAgent { name: Symbol },
    Assert { path: Path, at: AttitudeType, formula: AttitudeFormula },
    Retract { path: Path, at: AttitudeType, formula: AttitudeFormula },
    Stereotype { name: Symbol, members: Vec<StereotypeMember> },
    Trust { path: Path, agent: Symbol },
    Topic { path: Path, at: AttitudeType, topic: Symbol },
    AscribeDefault { path: Path, target: Symbol, prop: Proposition },
    AscribeStereotypes { path: Path, target: Symbol },
    AscribeAccept { path: Path, source: Symbol, prop: Proposition },
    AscribeOnDemand { path: Path, prop: Proposition },
    Perform { side: PerformSide, act: ActInstance },
    Simulate { path: Path, goals: Vec<Proposition> },
    Recognize { path: Path, observed: Term },
    Show { path: Option<Path>, format: Option<ShowFormat> },
    Expect { path: Path, at: AttitudeType, formula: AttitudeFormula, expected: TriState },
    LoadLibrary { file: String },
    SetMaxDepth { depth: usize },
}

impl fmt::Display for ScenarioCommand {
    /// The command's canonical line form; parsing it back yields the same
    /// command.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioCommand::DeclareAgent { name } => write!(f, "agent {name}"),
            ScenarioCommand::Assert { path, at, formula } => {
                write!(f, "{} {path}: {formula}", at.keyword())
            }
            ScenarioCommand::Retract { path, at, formula } => {
                write!(f, "retract {} {path}: {formula}", at.keyword())
            }
            ScenarioCommand::Stereotype { name, members } => {
                write!(f, "stereotype {name} {{ ")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    let word = match m.space {
                        AttitudeType::Goal => "goal",
                        _ => "believe",
                    };
                    write!(f, "{word} {}", m.prop)?;
                }
                write!(f, " }}")
            }
            ScenarioCommand::Trust { path, agent } => write!(f, "trust {path}: {agent}"),
            ScenarioCommand::Topic { path, at, topic } => {
                write!(f, "topic {path} {}: {topic}", at.keyword())
            }
            ScenarioCommand::AscribeDefault { path, target, prop } => {
                write!(f, "ascribe default {path} to {target}: {prop}")
            }
            ScenarioCommand::AscribeStereotypes { path, target } => {
                write!(f, "ascribe stereotypes {path} to {target}")
            }
            ScenarioCommand::AscribeAccept { path, source, prop } => {
                write!(f, "ascribe accept {path} from {source}: {prop}")
            }
            ScenarioCommand::AscribeOnDemand { path, prop } => {
                write!(f, "ascribe on-demand {path}: {prop}")
            }
            ScenarioCommand::Perform { side, act } => {
                let side = match side {
                    PerformSide::Speaker => "speaker",
                    PerformSide::Hearer => "hearer",
                    PerformSide::Both => "both",
                };
                write!(f, "perform {side} {act}")
            }
            ScenarioCommand::Simulate { path, goals } => {
                write!(f, "simulate {path} achieving {{ ")?;
                for (i, g) in goals.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, " }}")
            }
            ScenarioCommand::Recognize { path, observed } => {
                write!(f, "recognize {path} observing {observed}")
            }
            ScenarioCommand::Show { path, format } => {
                write!(f, "show")?;
                if let Some(p) = path {
                    write!(f, " {p}")?;
                }
                match format {
                    Some(ShowFormat::Ascii) => write!(f, " ascii")?,
                    Some(ShowFormat::Json) => write!(f, " json")?,
                    None => {}
                }
                Ok(())
            }
            ScenarioCommand::Expect { path, at, formula, expected } => {
                write!(f, "expect {path} {} {formula} is {expected}", at.keyword())
            }
            ScenarioCommand::LoadLibrary { file } => write!(f, "library {file}"),
            ScenarioCommand::SetMaxDepth { depth } => write!(f, "max-depth {depth}"),
        }
    }
}

/// A parsed act/operator library file.
#[derive(Debug, Clone, Default)]
pub struct ParsedLibrary {
    pub acts: ActLibrary,
    pub operators: Vec<Operator>,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line_base: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line_base: usize) -> Cursor<'a> {
        Cursor { text, pos: 0, line_base }
    }

    fn location(&self) -> (usize, usize) {
        let before = &self.text[..self.pos];
        let line = self.line_base + before.matches('\n').count();
        let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
        (line, column)
    }

    fn err(&self, expected: impl Into<String>) -> ParseError {
        let (line, column) = self.location();
        ParseError { line, column, expected: expected.into() }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn peek_word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '-'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            None
        } else {
            Some(&rest[..end])
        }
    }

    fn word(&mut self, what: &str) -> Result<&'a str, ParseError> {
        match self.peek_word() {
            Some(w) => {
                self.pos += w.len();
                Ok(w)
            }
            None => Err(self.err(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek_word() {
            Some(w) if w == kw => {
                self.pos += w.len();
                Ok(())
            }
            _ => Err(self.err(format!("'{kw}'"))),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        match self.peek_word() {
            Some(w) if w == kw => {
                self.pos += w.len();
                true
            }
            _ => false,
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("'{c}'")))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    /// Lowercase-initial symbol.
    fn constant(&mut self, what: &str) -> Result<Symbol, ParseError> {
        self.skip_ws();
        let save = self.pos;
        let w = self.word(what)?;
        if w.chars().next().is_some_and(|c| c.is_ascii_lowercase()) {
            Ok(w.to_string())
        } else {
            self.pos = save;
            Err(self.err(format!("{what} (lowercase-initial symbol)")))
        }
    }

    fn term(&mut self, what: &str) -> Result<Term, ParseError> {
        self.skip_ws();
        let save = self.pos;
        match Term::parse_prefix(self.rest()) {
            Ok((t, used)) => {
                self.pos += used;
                Ok(t)
            }
            Err(TermError::Parse { offset, .. }) => {
                self.pos = save + offset;
                Err(self.err(what))
            }
            Err(_) => Err(self.err(what)),
        }
    }

    fn proposition(&mut self, what: &str) -> Result<Proposition, ParseError> {
        Ok(Proposition::from_term(self.term(what)?))
    }

    fn formula(&mut self, what: &str) -> Result<AttitudeFormula, ParseError> {
        Ok(AttitudeFormula::from_term(self.term(what)?))
    }

    fn path(&mut self) -> Result<Path, ParseError> {
        let owner = self.constant("store name")?;
        let mut hops = Vec::new();
        while self.eat_punct('>') {
            hops.push(self.constant("agent name")?);
        }
        Ok(Path { owner, hops })
    }

    fn attitude_word(&mut self) -> Result<AttitudeType, ParseError> {
        let save = self.pos;
        let w = self.word("believe, goal or intend")?;
        match AttitudeType::from_keyword(w) {
            Some(at) => Ok(at),
            None => {
                self.pos = save;
                Err(self.err("believe, goal or intend"))
            }
        }
    }

    /// `{ item; item; ... }` bodies, items parsed by the callback.
    fn braced_list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        self.punct('{')?;
        let mut out = Vec::new();
        loop {
            if self.eat_punct('}') {
                return Ok(out);
            }
            if self.at_end() {
                return Err(self.err("'}'"));
            }
            out.push(item(self)?);
            if !self.eat_punct(';') {
                self.punct('}')?;
                return Ok(out);
            }
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Groups source lines into logical commands, joining lines until braces
/// balance. Returns (1-based starting line, text) pairs.
fn logical_lines(text: &str) -> Result<Vec<(usize, String)>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    let mut depth: i32 = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() && pending.is_none() {
            continue;
        }
        let opens = line.matches('{').count() as i32;
        let closes = line.matches('}').count() as i32;
        match pending.as_mut() {
            None => {
                depth = opens - closes;
                pending = Some((idx + 1, line.to_string()));
            }
            Some((_, buf)) => {
                buf.push('\n');
                buf.push_str(line);
                depth += opens - closes;
            }
        }
        if depth <= 0 {
            if let Some((start, buf)) = pending.take() {
                if !buf.trim().is_empty() {
                    out.push((start, buf));
                }
            }
            depth = 0;
        }
    }
    if let Some((start, _)) = pending {
        return Err(ParseError { line: start, column: 1, expected: "'}'".into() });
    }
    Ok(out)
}

/// Parses a scenario file into commands. The first error aborts with its
/// location; no input panics.
pub fn parse_scenario(text: &str) -> Result<Vec<ScenarioCommand>, ParseError> {
    let mut out = Vec::new();
    for (line_no, logical) in logical_lines(text)? {
        let mut c = Cursor::new(&logical, line_no);
        let command = parse_command(&mut c)?;
        if !c.at_end() {
            return Err(c.err("end of command"));
        }
        out.push(command);
    }
    Ok(out)
}

fn parse_command(c: &mut Cursor) -> Result<ScenarioCommand, ParseError> {
    let save = c.pos;
    let head = c.word("command")?;
    match head {
        "agent" => Ok(ScenarioCommand::DeclareAgent { name: c.constant("agent name")? }),
        "believe" | "goal" | "intend" => {
            let at = AttitudeType::from_keyword(head).expect("matched keyword");
            let path = c.path()?;
            c.punct(':')?;
            let formula = c.formula("attitude formula")?;
            Ok(ScenarioCommand::Assert { path, at, formula })
        }
        "retract" => {
            let at = c.attitude_word()?;
            let path = c.path()?;
            c.punct(':')?;
            let formula = c.formula("attitude formula")?;
            Ok(ScenarioCommand::Retract { path, at, formula })
        }
        "stereotype" => {
            let name = c.constant("stereotype name")?;
            let members = c.braced_list(|c| {
                let space = if c.eat_keyword("goal") {
                    AttitudeType::Goal
                } else {
                    c.eat_keyword("believe");
                    AttitudeType::Belief
                };
                let prop = c.proposition("proposition")?;
                Ok(StereotypeMember { space, prop })
            })?;
            Ok(ScenarioCommand::Stereotype { name, members })
        }
        "trust" => {
            let path = c.path()?;
            c.punct(':')?;
            let agent = c.constant("agent name")?;
            Ok(ScenarioCommand::Trust { path, agent })
        }
        "topic" => {
            let path = c.path()?;
            let at = c.attitude_word()?;
            c.punct(':')?;
            let topic = c.constant("topic label")?;
            Ok(ScenarioCommand::Topic { path, at, topic })
        }
        "ascribe" => {
            let kind = c.word("default, stereotypes, accept or on-demand")?;
            match kind {
                "default" => {
                    let path = c.path()?;
                    c.keyword("to")?;
                    let target = c.constant("target agent")?;
                    c.punct(':')?;
                    let prop = c.proposition("proposition")?;
                    Ok(ScenarioCommand::AscribeDefault { path, target, prop })
                }
                "stereotypes" => {
                    let path = c.path()?;
                    c.keyword("to")?;
                    let target = c.constant("target agent")?;
                    Ok(ScenarioCommand::AscribeStereotypes { path, target })
                }
                "accept" => {
                    let path = c.path()?;
                    c.keyword("from")?;
                    let source = c.constant("source agent")?;
                    c.punct(':')?;
                    let prop = c.proposition("proposition")?;
                    Ok(ScenarioCommand::AscribeAccept { path, source, prop })
                }
                "on-demand" => {
                    let path = c.path()?;
                    c.punct(':')?;
                    let prop = c.proposition("proposition")?;
                    Ok(ScenarioCommand::AscribeOnDemand { path, prop })
                }
                _ => {
                    c.pos = save;
                    Err(c.err("ascribe default|stereotypes|accept|on-demand"))
                }
            }
        }
        "perform" => {
            let side = match c.peek_word() {
                Some("speaker") => {
                    c.keyword("speaker")?;
                    PerformSide::Speaker
                }
                Some("hearer") => {
                    c.keyword("hearer")?;
                    PerformSide::Hearer
                }
                Some("both") => {
                    c.keyword("both")?;
                    PerformSide::Both
                }
                _ => PerformSide::Both,
            };
            let term = c.term("act instance")?;
            let act = ActInstance::from_term(&term)
                .map_err(|e| c.err(format!("act instance ({e})")))?;
            Ok(ScenarioCommand::Perform { side, act })
        }
        "simulate" => {
            let path = c.path()?;
            c.keyword("achieving")?;
            let goals =
                c.braced_list(|c| c.proposition("proposition"))?;
            Ok(ScenarioCommand::Simulate { path, goals })
        }
        "recognize" => {
            let path = c.path()?;
            c.keyword("observing")?;
            let observed = c.term("observed instance")?;
            Ok(ScenarioCommand::Recognize { path, observed })
        }
        "show" => {
            let mut path = None;
            let mut format = None;
            if let Some(w) = c.peek_word() {
                match w {
                    "ascii" => {
                        c.keyword("ascii")?;
                        format = Some(ShowFormat::Ascii);
                    }
                    "json" => {
                        c.keyword("json")?;
                        format = Some(ShowFormat::Json);
                    }
                    _ => {
                        path = Some(c.path()?);
                        if let Some(w2) = c.peek_word() {
                            match w2 {
                                "ascii" => {
                                    c.keyword("ascii")?;
                                    format = Some(ShowFormat::Ascii);
                                }
                                "json" => {
                                    c.keyword("json")?;
                                    format = Some(ShowFormat::Json);
                                }
                                _ => return Err(c.err("ascii or json")),
                            }
                        }
                    }
                }
            }
            Ok(ScenarioCommand::Show { path, format })
        }
        "expect" => {
            let path = c.path()?;
            let at = c.attitude_word()?;
            let formula = c.formula("attitude formula")?;
            c.keyword("is")?;
            let verdict = c.word("holds, contrary or unknown")?;
            let expected = match verdict {
                "holds" => TriState::Holds,
                "contrary" => TriState::Contrary,
                "unknown" => TriState::Unknown,
                _ => return Err(c.err("holds, contrary or unknown")),
            };
            Ok(ScenarioCommand::Expect { path, at, formula, expected })
        }
        "library" => {
            c.skip_ws();
            let rest = c.rest().trim();
            if rest.is_empty() {
                return Err(c.err("library file path"));
            }
            let file = rest.trim_matches('"').to_string();
            c.pos = c.text.len();
            Ok(ScenarioCommand::LoadLibrary { file })
        }
        "max-depth" => {
            let w = c.word("depth")?;
            let depth = w
                .parse::<usize>()
                .map_err(|_| c.err("a depth number"))?;
            Ok(ScenarioCommand::SetMaxDepth { depth })
        }
        _ => {
            c.pos = save;
            Err(c.err("a command keyword"))
        }
    }
}

/// Parses an act/operator library file.
pub fn parse_library(text: &str) -> Result<ParsedLibrary, ParseError> {
    let stripped: String = text
        .lines()
        .map(strip_comment)
        .collect::<Vec<_>>()
        .join("\n");
    let mut c = Cursor::new(&stripped, 1);
    let mut lib = ParsedLibrary::default();
    loop {
        if c.at_end() {
            return Ok(lib);
        }
        let save = c.pos;
        let head = c.word("'act' or 'operator'")?;
        match head {
            "act" => {
                let schema = parse_act(&mut c)?;
                let (line, column) = c.location();
                lib.acts.define(schema).map_err(|e| ParseError {
                    line,
                    column,
                    expected: format!("a well-formed act ({e})"),
                })?;
            }
            "operator" => {
                let op = parse_operator(&mut c)?;
                let (line, column) = c.location();
                op.validate().map_err(|e| ParseError {
                    line,
                    column,
                    expected: format!("a well-formed operator ({e})"),
                })?;
                lib.operators.retain(|o| o.name != op.name);
                lib.operators.push(op);
            }
            _ => {
                c.pos = save;
                return Err(c.err("'act' or 'operator'"));
            }
        }
    }
}

fn parse_act(c: &mut Cursor) -> Result<ActSchema, ParseError> {
    let name = c.constant("act name")?;
    c.keyword("class")?;
    let class_word = c.word("question, answer, request or inform")?;
    let class = ActClass::from_keyword(class_word)
        .ok_or_else(|| c.err("question, answer, request or inform"))?;
    let parent = if c.eat_keyword("isa") { Some(c.constant("parent act")?) } else { None };
    c.keyword("pre")?;
    let own_preconditions =
        c.braced_list(|c| c.formula("attitude formula"))?;
    Ok(ActSchema { name, class, parent, own_preconditions })
}

fn parse_operator(c: &mut Cursor) -> Result<Operator, ParseError> {
    let name = c.constant("operator name")?;
    c.punct('(')?;
    let mut params = Vec::new();
    if !c.eat_punct(')') {
        loop {
            params.push(c.term("parameter")?);
            if c.eat_punct(')') {
                break;
            }
            c.punct(',')?;
        }
    }
    let mut preconditions = Vec::new();
    let mut add = Vec::new();
    let mut del = Vec::new();
    loop {
        if c.eat_keyword("pre") {
            preconditions =
                c.braced_list(|c| Ok(Literal::from_term(c.term("literal")?)))?;
        } else if c.eat_keyword("add") {
            add = c.braced_list(|c| c.term("effect"))?;
        } else if c.eat_keyword("del") {
            del = c.braced_list(|c| c.term("effect"))?;
        } else {
            break;
        }
    }
    Ok(Operator { name, params, preconditions, add, del, neq: vec![], mental: false })
}
