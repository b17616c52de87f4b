//! The `.shm` program text format.
//!
//! ```text
//! program  := (line NEWLINE)* ;
//! line     := INDEX ":" choice ("|" choice)* comment? ;
//! choice   := weight? instr ;
//! weight   := "[" INT ("/" INT)? "]" ;
//! instr    := "INC" INT | "DEC" INT "," INT ;
//! comment  := "#" <any chars to end of line> ;
//! ```
//!
//! Line indices must run 0, 1, 2, ... in order. Blank and comment-only lines
//! are skipped. A line either annotates every choice with a weight or none;
//! unannotated lines get uniform weights.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::machine::{Instruction, Program, ProgramLine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}: weights sum to {sum}, not 1")]
    WeightSum { line: usize, sum: BigRational },
    #[error("{line}: some but not all choices carry a weight")]
    MixedAnnotation { line: usize },
    #[error("{line}: program line has no instructions")]
    EmptyLine { line: usize },
}

impl ParseError {
    /// 1-based source line the error refers to.
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::WeightSum { line, .. }
            | ParseError::MixedAnnotation { line }
            | ParseError::EmptyLine { line } => *line,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Deterministic,
    NonDeterministic,
    Probabilistic,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Deterministic => "deterministic",
            Mode::NonDeterministic => "non-deterministic",
            Mode::Probabilistic => "probabilistic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceProgram {
    pub text: String,
    pub program: Program,
    pub mode: Mode,
}

pub fn parse_program(text: &str) -> Result<SourceProgram, ParseError> {
    let mut lines = Vec::new();
    let mut annotated_any = false;
    for (row, raw) in text.lines().enumerate() {
        let mut cursor = Cursor::new(raw, row + 1);
        cursor.skip_ws();
        if cursor.at_end() {
            continue;
        }
        let parsed = cursor.line(lines.len())?;
        annotated_any |= parsed.annotated;
        lines.push(parsed.line);
    }
    let program = Program::new(lines);
    let mode = if annotated_any {
        Mode::Probabilistic
    } else if program.is_deterministic() {
        Mode::Deterministic
    } else {
        Mode::NonDeterministic
    };
    Ok(SourceProgram {
        text: text.to_owned(),
        program,
        mode,
    })
}

/// Canonical text for a program. Weights are written only on lines with
/// several choices or a non-unit weight.
pub fn format_program(program: &Program) -> String {
    let mut out = String::new();
    for (index, line) in program.lines().iter().enumerate() {
        let annotate = line.width() > 1 || !line.choices()[0].weight.is_one();
        let _ = write!(out, "{index}:");
        for (i, choice) in line.choices().iter().enumerate() {
            out.push_str(if i == 0 { " " } else { " | " });
            if annotate {
                let _ = write!(out, "[{}] ", choice.weight);
            }
            let _ = write!(out, "{}", choice.instruction);
        }
        out.push('\n');
    }
    out
}

struct ParsedLine {
    line: ProgramLine,
    annotated: bool,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    row: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, row: usize) -> Self {
        Self { text, pos: 0, row }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    /// Whitespace and comments are both skipped; a comment runs to the end.
    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
        if trimmed.starts_with('#') {
            self.pos = self.text.len();
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: self.row,
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            self.error(format!("expected '{c}'"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.rest().len());
        if len == 0 {
            return self.error("expected an integer");
        }
        let s = &self.rest()[..len];
        self.pos += len;
        Ok(s)
    }

    fn natural(&mut self) -> Result<usize, ParseError> {
        let start = self.pos;
        let s = self.digits()?;
        s.parse().or_else(|_| {
            self.pos = start;
            self.skip_ws();
            self.error("integer too large")
        })
    }

    fn big(&mut self) -> Result<BigInt, ParseError> {
        Ok(self.digits()?.parse().expect("ascii digits"))
    }

    fn keyword(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(self.rest().len());
        let word = &self.rest()[..len];
        match word {
            "INC" | "DEC" => {
                self.pos += len;
                Ok(word)
            }
            _ => self.error("expected INC or DEC"),
        }
    }

    fn weight(&mut self) -> Result<Option<BigRational>, ParseError> {
        if !self.eat('[') {
            return Ok(None);
        }
        let numerator = self.big()?;
        let denominator = if self.eat('/') {
            let at = self.pos;
            let d = self.big()?;
            if d.is_zero() {
                self.pos = at;
                self.skip_ws();
                return self.error("zero denominator");
            }
            d
        } else {
            BigInt::one()
        };
        self.expect(']')?;
        Ok(Some(BigRational::new(numerator, denominator)))
    }

    fn instruction(&mut self) -> Result<Instruction, ParseError> {
        match self.keyword()? {
            "INC" => Ok(Instruction::Inc(self.natural()?)),
            _ => {
                let register = self.natural()?;
                self.expect(',')?;
                let target = self.natural()?;
                Ok(Instruction::Dec(register, target))
            }
        }
    }

    fn line(&mut self, expected_index: usize) -> Result<ParsedLine, ParseError> {
        let index = self.natural()?;
        if index != expected_index {
            let start = self.text.len() - self.text.trim_start().len();
            self.pos = start;
            return self.error(format!("expected line index {expected_index}, found {index}"));
        }
        self.expect(':')?;
        self.skip_ws();
        if self.at_end() {
            return Err(ParseError::EmptyLine { line: self.row });
        }
        let mut choices = Vec::new();
        loop {
            let weight = self.weight()?;
            let instruction = self.instruction()?;
            choices.push((instruction, weight));
            if !self.eat('|') {
                break;
            }
        }
        self.skip_ws();
        if !self.at_end() {
            return self.error("unexpected trailing input");
        }

        let annotated = choices.iter().filter(|(_, w)| w.is_some()).count();
        if annotated != 0 && annotated != choices.len() {
            return Err(ParseError::MixedAnnotation { line: self.row });
        }
        let line = if annotated == 0 {
            ProgramLine::uniform(choices.into_iter().map(|(i, _)| i).collect())
        } else {
            let weighted: Vec<_> = choices
                .into_iter()
                .map(|(i, w)| (i, w.expect("all annotated")))
                .collect();
            let sum: BigRational = weighted.iter().map(|(_, w)| w).sum();
            if !sum.is_one() {
                return Err(ParseError::WeightSum { line: self.row, sum });
            }
            ProgramLine::new(weighted)
        }
        .expect("at least one choice parsed");
        Ok(ParsedLine {
            line,
            annotated: annotated != 0,
        })
    }
}
