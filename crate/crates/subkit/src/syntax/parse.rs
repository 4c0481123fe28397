//! Recursive-descent parser for terms, inequalities, and conditions.

use super::{CAtom, Clause, Condition, Inequality, LTerm, Quant, QuantKind, Restrictor, Term};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bot,
    Top,
    Neg,
    Sim,
    Prec,
    Succ,
    Forall,
    Exists,
    Arrow,    // ->
    CoArrow,  // >-
    AndOp,    // /\
    OrOp,     // \/
    Leq,      // <=
    LeqOr,    // <=or
    LeqAnd,   // <=and
    LeqCoimp, // <=coimp
    GeqImp,   // >=imp
    Implies,  // ==>
    Amp,      // &
    Dot,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Bot => "bot",
            Tok::Top => "top",
            Tok::Neg => "neg",
            Tok::Sim => "sim",
            Tok::Prec => "prec",
            Tok::Succ => "succ",
            Tok::Forall => "forall",
            Tok::Exists => "exists",
            Tok::Arrow => "->",
            Tok::CoArrow => ">-",
            Tok::AndOp => "/\\",
            Tok::OrOp => "\\/",
            Tok::Leq => "<=",
            Tok::LeqOr => "<=or",
            Tok::LeqAnd => "<=and",
            Tok::LeqCoimp => "<=coimp",
            Tok::GeqImp => ">=imp",
            Tok::Implies => "==>",
            Tok::Amp => "&",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

/// Syntax error with source position and the tokens that would have been
/// accepted at that point.
#[derive(Debug, Clone, Error)]
#[error("parse error at {line}:{col}: found {found}, expected {}", expected.join(" | "))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub found: String,
    pub expected: Vec<String>,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err(&self, found: String, expected: &[&str]) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn ident_run(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'&' => {
                    self.bump();
                    Tok::Amp
                }
                b'/' => {
                    self.bump();
                    if self.peek() == Some(b'\\') {
                        self.bump();
                        Tok::AndOp
                    } else {
                        return Err(self.err("/".into(), &["/\\"]));
                    }
                }
                b'\\' => {
                    self.bump();
                    if self.peek() == Some(b'/') {
                        self.bump();
                        Tok::OrOp
                    } else {
                        return Err(self.err("\\".into(), &["\\/"]));
                    }
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.err("-".into(), &["->"]));
                    }
                }
                b'>' => {
                    self.bump();
                    match self.peek() {
                        Some(b'-') => {
                            self.bump();
                            Tok::CoArrow
                        }
                        Some(b'=') => {
                            self.bump();
                            let run = self.ident_run();
                            if run == "imp" {
                                Tok::GeqImp
                            } else {
                                return Err(self.err(format!(">={run}"), &[">=imp"]));
                            }
                        }
                        _ => return Err(self.err(">".into(), &[">-", ">=imp"])),
                    }
                }
                b'=' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        if self.peek() == Some(b'>') {
                            self.bump();
                            Tok::Implies
                        } else {
                            return Err(self.err("==".into(), &["==>"]));
                        }
                    } else {
                        return Err(self.err("=".into(), &["==>"]));
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() != Some(b'=') {
                        return Err(self.err("<".into(), &["<="]));
                    }
                    self.bump();
                    // A restrictor name glued directly to `<=` forms a
                    // compound token; anything else is plain `<=`.
                    let save = (self.pos, self.line, self.col);
                    let run = self.ident_run();
                    match run.as_str() {
                        "or" => Tok::LeqOr,
                        "and" => Tok::LeqAnd,
                        "coimp" => Tok::LeqCoimp,
                        _ => {
                            (self.pos, self.line, self.col) = save;
                            Tok::Leq
                        }
                    }
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let run = self.ident_run();
                    match run.as_str() {
                        "bot" => Tok::Bot,
                        "top" => Tok::Top,
                        "neg" => Tok::Neg,
                        "sim" => Tok::Sim,
                        "prec" => Tok::Prec,
                        "succ" => Tok::Succ,
                        "forall" => Tok::Forall,
                        "exists" => Tok::Exists,
                        _ => Tok::Ident(run),
                    }
                }
                other => {
                    return Err(self.err(
                        format!("{}", other as char),
                        &["term", "condition"],
                    ))
                }
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: Lexer::new(src).tokens()?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, line, col) = &self.toks[self.pos];
        ParseError {
            line: *line,
            col: *col,
            found: tok.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, want: Tok, label: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn ident(&mut self, label: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&[label])),
        }
    }

    // term := arrow-chain over disjunctions; chains of one arrow kind
    // associate to the right, mixing `->` and `>-` needs parentheses.
    fn term(&mut self) -> Result<Term, ParseError> {
        let first = self.disj()?;
        let mut parts = vec![first];
        let mut ops: Vec<Tok> = Vec::new();
        while matches!(self.peek(), Tok::Arrow | Tok::CoArrow) {
            ops.push(self.bump());
            parts.push(self.disj()?);
        }
        if ops.is_empty() {
            return Ok(parts.pop().unwrap());
        }
        if ops.iter().any(|o| *o != ops[0]) {
            return Err(self.error(&["parentheses (mixed -> and >- at one level)"]));
        }
        let mut acc = parts.pop().unwrap();
        while let Some(lhs) = parts.pop() {
            acc = match ops[0] {
                Tok::Arrow => Term::imp(lhs, acc),
                _ => Term::coimp(lhs, acc),
            };
        }
        Ok(acc)
    }

    fn disj(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.conj()?;
        while *self.peek() == Tok::OrOp {
            self.bump();
            acc = Term::or(acc, self.conj()?);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::AndOp {
            self.bump();
            acc = Term::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Neg => {
                self.bump();
                Ok(Term::neg(self.unary()?))
            }
            Tok::Sim => {
                self.bump();
                Ok(Term::sim(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Bot => {
                self.bump();
                Ok(Term::Bot)
            }
            Tok::Top => {
                self.bump();
                Ok(Term::Top)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Term::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, ")")?;
                Ok(t)
            }
            _ => Err(self.error(&["bot", "top", "identifier", "("])),
        }
    }

    // Lattice terms for condition atoms: no slanted connectives.
    fn lterm(&mut self) -> Result<LTerm, ParseError> {
        let t = self.ldisj()?;
        if matches!(self.peek(), Tok::Arrow | Tok::CoArrow) {
            return Err(self.error(&["<=", "prec (slanted connectives are not allowed in conditions)"]));
        }
        Ok(t)
    }

    fn ldisj(&mut self) -> Result<LTerm, ParseError> {
        let mut acc = self.lconj()?;
        while *self.peek() == Tok::OrOp {
            self.bump();
            acc = LTerm::or(acc, self.lconj()?);
        }
        Ok(acc)
    }

    fn lconj(&mut self) -> Result<LTerm, ParseError> {
        let mut acc = self.lprimary()?;
        while *self.peek() == Tok::AndOp {
            self.bump();
            acc = LTerm::and(acc, self.lprimary()?);
        }
        Ok(acc)
    }

    fn lprimary(&mut self) -> Result<LTerm, ParseError> {
        match self.peek().clone() {
            Tok::Bot => {
                self.bump();
                Ok(LTerm::Bot)
            }
            Tok::Top => {
                self.bump();
                Ok(LTerm::Top)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(LTerm::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ldisj()?;
                self.expect(Tok::RParen, ")")?;
                Ok(t)
            }
            Tok::Neg | Tok::Sim => {
                Err(self.error(&["lattice term (slanted connectives are not allowed in conditions)"]))
            }
            _ => Err(self.error(&["bot", "top", "identifier", "("])),
        }
    }

    fn catom(&mut self) -> Result<CAtom, ParseError> {
        let lhs = self.lterm()?;
        match self.peek() {
            Tok::Leq => {
                self.bump();
                Ok(CAtom::Leq(lhs, self.lterm()?))
            }
            Tok::Prec => {
                self.bump();
                Ok(CAtom::Prec(lhs, self.lterm()?))
            }
            _ => Err(self.error(&["<=", "prec"])),
        }
    }

    fn cconj(&mut self) -> Result<Vec<CAtom>, ParseError> {
        let mut atoms = vec![self.catom()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            atoms.push(self.catom()?);
        }
        Ok(atoms)
    }

    fn quant(&mut self) -> Result<Quant, ParseError> {
        let kind = match self.bump() {
            Tok::Forall => QuantKind::Forall,
            Tok::Exists => QuantKind::Exists,
            _ => unreachable!("caller checked"),
        };
        let v1 = self.ident("bound variable")?;
        let mut vars = vec![v1];
        let restr = match self.peek().clone() {
            Tok::Prec => {
                self.bump();
                Some(Restrictor::Prec(self.ident("restricting variable")?))
            }
            Tok::Succ => {
                self.bump();
                Some(Restrictor::Succ(self.ident("restricting variable")?))
            }
            Tok::LeqOr | Tok::LeqAnd | Tok::LeqCoimp | Tok::GeqImp => {
                let t = self.bump();
                self.expect(Tok::LParen, "(")?;
                let v2 = self.ident("second bound variable")?;
                self.expect(Tok::Comma, ",")?;
                let x = self.ident("restricting variable")?;
                self.expect(Tok::RParen, ")")?;
                vars.push(v2);
                Some(match t {
                    Tok::LeqOr => Restrictor::LeqOr(x),
                    Tok::LeqAnd => Restrictor::LeqAnd(x),
                    Tok::LeqCoimp => Restrictor::LeqCoimp(x),
                    _ => Restrictor::GeqImp(x),
                })
            }
            _ => None,
        };
        self.expect(Tok::Dot, ".")?;
        Ok(Quant { kind, vars, restr })
    }

    fn condition(&mut self) -> Result<Condition, ParseError> {
        let mut prefix = Vec::new();
        while matches!(self.peek(), Tok::Forall | Tok::Exists) {
            prefix.push(self.quant()?);
        }
        let ante = self.cconj()?;
        let cons = if *self.peek() == Tok::Implies {
            self.bump();
            let mut qs = Vec::new();
            while matches!(self.peek(), Tok::Forall | Tok::Exists) {
                qs.push(self.quant()?);
            }
            Some((qs, self.cconj()?))
        } else {
            None
        };
        Ok(Condition { prefix, clause: Clause { ante, cons } })
    }

    fn eof(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.eof()?;
    Ok(t)
}

pub fn parse_inequality(src: &str) -> Result<Inequality, ParseError> {
    let mut p = Parser::new(src)?;
    let lhs = p.term()?;
    p.expect(Tok::Leq, "<=")?;
    let rhs = p.term()?;
    p.eof()?;
    Ok(Inequality::new(lhs, rhs))
}

pub fn parse_condition(src: &str) -> Result<Condition, ParseError> {
    let mut p = Parser::new(src)?;
    let c = p.condition()?;
    p.eof()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_transitivity_of_implication() {
        let ineq = parse_inequality(r"(a -> b) /\ (b -> c) <= a -> c").unwrap();
        assert_eq!(
            ineq.lhs,
            Term::and(
                Term::imp(Term::var("a"), Term::var("b")),
                Term::imp(Term::var("b"), Term::var("c"))
            )
        );
        assert_eq!(ineq.rhs, Term::imp(Term::var("a"), Term::var("c")));
    }

    #[test]
    fn parses_dichotomy_inequality() {
        let ineq = parse_inequality(r"top <= (a -> b) \/ (b -> a)").unwrap();
        assert_eq!(ineq.lhs, Term::Top);
        assert_eq!(
            ineq.rhs,
            Term::or(
                Term::imp(Term::var("a"), Term::var("b")),
                Term::imp(Term::var("b"), Term::var("a"))
            )
        );
    }

    #[test]
    fn parses_negated_top() {
        let ineq = parse_inequality("neg top <= bot").unwrap();
        assert_eq!(ineq.lhs, Term::neg(Term::Top));
        assert_eq!(ineq.rhs, Term::Bot);
    }

    #[test]
    fn arrow_chains_are_right_associative() {
        assert_eq!(
            parse_term("a -> b -> c").unwrap(),
            Term::imp(Term::var("a"), Term::imp(Term::var("b"), Term::var("c")))
        );
        assert!(parse_term("a -> b >- c").is_err());
        assert!(parse_term("a -> (b >- c)").is_ok());
    }

    #[test]
    fn precedence_of_connectives() {
        assert_eq!(
            parse_term(r"neg a /\ b").unwrap(),
            Term::and(Term::neg(Term::var("a")), Term::var("b"))
        );
        assert_eq!(
            parse_term(r"a /\ b \/ c").unwrap(),
            Term::or(Term::and(Term::var("a"), Term::var("b")), Term::var("c"))
        );
        assert_eq!(
            parse_term(r"a \/ b -> c").unwrap(),
            Term::imp(Term::or(Term::var("a"), Term::var("b")), Term::var("c"))
        );
    }

    #[test]
    fn parses_conditions() {
        let c = parse_condition("forall a. forall b. a prec b & b prec c ==> a prec c").unwrap();
        assert_eq!(c.prefix.len(), 2);
        assert_eq!(c.clause.ante.len(), 2);
        let (qs, cons) = c.clause.cons.as_ref().unwrap();
        assert!(qs.is_empty());
        assert_eq!(cons.len(), 1);
        assert_eq!(c.free_vars(), vec!["c".to_string()]);
    }

    #[test]
    fn parses_restricted_quantifiers() {
        let c = parse_condition("forall b succ a. b prec c ==> a prec c").unwrap();
        assert_eq!(c.prefix[0].restr, Some(Restrictor::Succ("a".into())));
        let c = parse_condition("d /\\ a prec b \\/ c ==> exists e <=or(f, d). e /\\ a prec b & a /\\ f prec c").unwrap();
        let (qs, _) = c.clause.cons.as_ref().unwrap();
        assert_eq!(qs[0].vars, vec!["e".to_string(), "f".to_string()]);
        assert_eq!(qs[0].restr, Some(Restrictor::LeqOr("d".into())));
    }

    #[test]
    fn compound_restrictor_tokens_need_contiguity() {
        // `<= or` with a space is a comparison against a variable named `or`.
        let c = parse_condition("x <= or_else").unwrap();
        assert_eq!(
            c.clause.ante[0],
            CAtom::Leq(LTerm::var("x"), LTerm::var("or_else"))
        );
    }

    #[test]
    fn rejects_slanted_connectives_in_conditions() {
        let err = parse_condition("a -> b <= c").unwrap_err();
        assert!(err.expected.iter().any(|e| e.contains("slanted") || e.contains("<=")), "{err}");
        assert!(parse_condition("neg a <= b").is_err());
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let err = parse_inequality("a <= ").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col >= 5);
        assert!(!err.expected.is_empty());
        let err = parse_inequality("(a <= b").unwrap_err();
        assert!(err.expected.iter().any(|e| e == ")" || e == "<="), "{err:?}");
    }
}
