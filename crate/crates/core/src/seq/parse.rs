//! Line-oriented pulse-program parser.
//!
//! ```text
//! program     = { line } ;
//! line        = [ instruction ] [ "#" comment ] newline ;
//! instruction = "pulse" channel angle axis
//!             | "delay" expr
//!             | "cp" expr
//!             | "dhh" ( "delta" | "sigma" ) { "t=" expr | ( "sigma=" | "delta=" ) expr }
//!             | "grad" [ "diagonal" | "coherence" ]
//!             | "pps"
//!             | "acquire" channel integer [ "dwell=" expr ] ;
//! channel     = "H" | "C" ;
//! angle       = [ "-" ] number ;               (* degrees *)
//! axis        = "x" | "y" | "-x" | "-y" ;
//! expr        = term { ( "+" | "-" ) term } ;
//! term        = unary { ( "*" | "/" ) unary } ;
//! unary       = "-" unary | primary ;
//! primary     = number [ "J" ] | "J" | "pi" | "sqrt" "(" expr ")" | "(" expr ")" ;
//! ```
//!
//! Durations are seconds and frequencies are Hz; `J` is the coupling in Hz.
//! `dhh delta` takes `sigma=` (Σ), `dhh sigma` takes `delta=` (Δ).

use std::fmt;

use thiserror::Error;

use super::ast::{CrushModel, Expr, Instruction, PulseProgram};
use crate::dynamics::{DhhMode, PhaseAxis};
use crate::states::Spin;
use crate::system::SpinSystem;

pub const DEFAULT_DWELL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax { expected: Vec<String>, found: String },
    Semantic(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "syntax error: expected {}, found {}", expected.join(" or "), found)
            }
            ParseErrorKind::Semantic(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Sym(c) => write!(f, "`{c}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    /// 1-based column of the first character.
    col: usize,
    /// column one past the last character.
    end: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch == '#' {
            break;
        }
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| ParseError {
                line: line_no,
                column: start + 1,
                kind: ParseErrorKind::Syntax {
                    expected: vec!["number".into()],
                    found: format!("`{text}`"),
                },
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                col: start + 1,
                end: i + 1,
            });
        } else if ch.is_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                col: start + 1,
                end: i + 1,
            });
        } else if "()*/+-=".contains(ch) {
            i += 1;
            out.push(Token {
                tok: Tok::Sym(ch),
                col: start + 1,
                end: i + 1,
            });
        } else {
            return Err(ParseError {
                line: line_no,
                column: start + 1,
                kind: ParseErrorKind::Syntax {
                    expected: vec!["instruction token".into()],
                    found: format!("`{ch}`"),
                },
            });
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    line_len: usize,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn column(&self) -> usize {
        self.peek().map(|t| t.col).unwrap_or(self.line_len + 1)
    }

    fn found(&self) -> String {
        self.peek().map(|t| t.tok.to_string()).unwrap_or_else(|| "end of line".into())
    }

    fn syntax<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.line,
            column: self.column(),
            kind: ParseErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: self.found(),
            },
        })
    }

    fn semantic<T>(&self, column: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.line,
            column,
            kind: ParseErrorKind::Semantic(msg.into()),
        })
    }

    fn word(&mut self, expected: &[&str]) -> Result<(&'a str, usize), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Word(w), col, .. }) => {
                self.pos += 1;
                Ok((w.as_str(), *col))
            }
            _ => self.syntax(expected),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if let Some(Token { tok: Tok::Sym(s), .. }) = self.peek() {
            if *s == c {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.syntax(&[&format!("`{c}`")])
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn channel(&mut self) -> Result<Spin, ParseError> {
        let (w, col) = self.word(&["channel (H or C)"])?;
        match w {
            "H" | "1H" => Ok(Spin::One),
            "C" | "13C" => Ok(Spin::Two),
            other => self.semantic(col, format!("unknown channel `{other}` (expected H or C)")),
        }
    }

    fn signed_number(&mut self, what: &str) -> Result<f64, ParseError> {
        let neg = self.eat_sym('-');
        match self.peek() {
            Some(Token { tok: Tok::Num(x), .. }) => {
                self.pos += 1;
                Ok(if neg { -x } else { *x })
            }
            _ => self.syntax(&[what]),
        }
    }

    fn axis(&mut self) -> Result<PhaseAxis, ParseError> {
        let col = self.column();
        let neg = self.eat_sym('-');
        let (w, _) = self.word(&["axis (x, y, -x, -y)"])?;
        let text = if neg { format!("-{w}") } else { w.to_string() };
        match PhaseAxis::parse(&text) {
            Some(a) => Ok(a),
            None => self.semantic(col, format!("unknown pulse axis `{text}`")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_sym('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_sym('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_sym('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_sym('-') {
            return Ok(match self.unary()? {
                Expr::Num(x) => Expr::Num(-x),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        const EXPECTED: [&str; 5] = ["number", "`J`", "`pi`", "`sqrt`", "`(`"];
        let Some(tok) = self.peek() else {
            return self.syntax(&EXPECTED);
        };
        match &tok.tok {
            Tok::Num(x) => {
                self.pos += 1;
                // `5J` is implicit multiplication when the symbol is adjacent.
                if let Some(Token { tok: Tok::Word(w), col, .. }) = self.peek() {
                    if w == "J" && *col == tok.end {
                        self.pos += 1;
                        return Ok(Expr::Mul(Box::new(Expr::Num(*x)), Box::new(Expr::J)));
                    }
                }
                Ok(Expr::Num(*x))
            }
            Tok::Word(w) if w == "J" => {
                self.pos += 1;
                Ok(Expr::J)
            }
            Tok::Word(w) if w == "pi" => {
                self.pos += 1;
                Ok(Expr::Pi)
            }
            Tok::Word(w) if w == "sqrt" => {
                self.pos += 1;
                self.expect_sym('(')?;
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            _ => self.syntax(&EXPECTED),
        }
    }

    fn duration(&mut self, j_hz: f64) -> Result<Expr, ParseError> {
        let col = self.column();
        let e = self.expr()?;
        let v = e.eval(j_hz);
        if !v.is_finite() {
            return self.semantic(col, format!("duration `{e}` is not finite"));
        }
        if v < 0.0 {
            return self.semantic(col, format!("negative duration `{e}` ({v} s)"));
        }
        Ok(e)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.syntax(&["end of line"])
        }
    }

    fn instruction(&mut self, j_hz: f64) -> Result<Instruction, ParseError> {
        const KEYWORDS: [&str; 7] = ["pulse", "delay", "cp", "dhh", "grad", "pps", "acquire"];
        let (kw, col) = self.word(&KEYWORDS)?;
        let ins = match kw {
            "pulse" => {
                let spin = self.channel()?;
                let angle_deg = self.signed_number("pulse angle in degrees")?;
                let axis = self.axis()?;
                Instruction::Pulse { spin, angle_deg, axis }
            }
            "delay" => Instruction::Delay { t: self.duration(j_hz)? },
            "cp" => Instruction::Cp { t: self.duration(j_hz)? },
            "dhh" => {
                let (m, _) = self.word(&["`delta`", "`sigma`"])?;
                let mode = match m {
                    "delta" => DhhMode::Delta,
                    "sigma" => DhhMode::Sigma,
                    _ => {
                        self.pos -= 1;
                        return self.syntax(&["`delta`", "`sigma`"]);
                    }
                };
                let free_key = match mode {
                    DhhMode::Delta => "sigma",
                    DhhMode::Sigma => "delta",
                };
                let mut t = None;
                let mut free_param = None;
                while !self.at_end() {
                    let key_col = self.column();
                    let (key, _) = self.word(&["`t=`", &format!("`{free_key}=`")])?;
                    self.expect_sym('=')?;
                    if key == "t" && t.is_none() {
                        t = Some(self.duration(j_hz)?);
                    } else if key == free_key && free_param.is_none() {
                        free_param = Some(self.expr()?);
                    } else if key == "t" || key == free_key {
                        return self.semantic(key_col, format!("duplicate `{key}=`"));
                    } else {
                        return self.semantic(
                            key_col,
                            format!("`dhh {}` does not accept `{key}=` (expected `t=` or `{free_key}=`)", mode.label()),
                        );
                    }
                }
                Instruction::Dhh { mode, t, free_param }
            }
            "grad" => {
                let model = if self.at_end() {
                    CrushModel::Diagonal
                } else {
                    match self.word(&["`diagonal`", "`coherence`"])?.0 {
                        "diagonal" => CrushModel::Diagonal,
                        "coherence" => CrushModel::CoherenceOrder,
                        _ => {
                            self.pos -= 1;
                            return self.syntax(&["`diagonal`", "`coherence`"]);
                        }
                    }
                };
                Instruction::Gradient { model }
            }
            "pps" => Instruction::PpsPrepare,
            "acquire" => {
                let spin = self.channel()?;
                let pcol = self.column();
                let points = match self.peek() {
                    Some(Token { tok: Tok::Num(x), .. }) => {
                        self.pos += 1;
                        *x
                    }
                    _ => return self.syntax(&["number of points"]),
                };
                if points.fract() != 0.0 || !(2.0..=1e8).contains(&points) {
                    return self.semantic(pcol, format!("acquisition needs an integer ≥ 2 points, got {points}"));
                }
                let dwell = if self.at_end() {
                    Expr::Num(DEFAULT_DWELL)
                } else {
                    let (key, kcol) = self.word(&["`dwell=`"])?;
                    if key != "dwell" {
                        return self.semantic(kcol, format!("`acquire` does not accept `{key}=`"));
                    }
                    self.expect_sym('=')?;
                    let dcol = self.column();
                    let d = self.duration(j_hz)?;
                    if d.eval(j_hz) <= 0.0 {
                        return self.semantic(dcol, "dwell must be positive");
                    }
                    d
                };
                Instruction::AcquireFid {
                    spin,
                    points: points as usize,
                    dwell,
                }
            }
            other => {
                return self.semantic(col, format!("unknown instruction `{other}`"));
            }
        };
        self.finish()?;
        Ok(ins)
    }
}

/// Parses with the default spin system's coupling used for duration sign checks.
pub fn parse(text: &str) -> Result<PulseProgram, ParseError> {
    parse_named("program", text, &SpinSystem::default())
}

/// Parses a program; durations are checked for sign against `sys.j_hz()`.
pub fn parse_named(name: &str, text: &str, sys: &SpinSystem) -> Result<PulseProgram, ParseError> {
    let j_hz = sys.j_hz();
    let mut instructions = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = lex(line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks: &toks,
            pos: 0,
            line: line_no,
            line_len: line.chars().count(),
        };
        instructions.push(p.instruction(j_hz)?);
    }
    Ok(PulseProgram::new(name, instructions))
}
