//! Text grammars: nets, types, differential terms and resource terms.
//!
//! Net grammar (ASCII, `#` line comments):
//!   variables `[a-z][a-z0-9]*` (the words w, cw, d, cd, c, cc, box, tens,
//!   par are reserved), covariable `~x`; trees `s tens t`, `s par t`, `w`,
//!   `cw`, `d(t)`, `cd(t)`, `c(s,t)`, `cc(s,t)`, `box{NET}(t1,...,tn)`,
//!   annotations `w:?a` / `cw:!a`; cut `<s|t>`; simple net
//!   `([t1,...,tk] ; <s|t>, ...)`; net `coef * simple + ...` with a rational
//!   `coef` like `2/3` (omitted coefficient = 1); `0` is the zero net.
//!
//! Type grammar: `a`, `~a`, `A tens B`, `A par B`, `!A`, `?A`.
//!
//! Term grammars: `\x. M`, `(M) R`, `D M . N` for differential terms;
//!   `\x. s`, `<s>[t1,...,tn]` for resource terms; combinations as in nets.

use crate::algebra::Scalar;
use crate::resource::{DComb, DTerm, RComb, RTerm};
use crate::syntax::{Cut, Net, ProofTree, SimpleNet, Var};
use crate::typing::LType;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    UpperD,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Pipe,
    Comma,
    Semi,
    Colon,
    Star,
    Plus,
    Minus,
    Slash,
    Tilde,
    Bang,
    Quest,
    Dot,
    Backslash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{}", s),
            Tok::Int(s) => write!(f, "{}", s),
            Tok::UpperD => write!(f, "D"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::Lt => write!(f, "<"),
            Tok::Gt => write!(f, ">"),
            Tok::Pipe => write!(f, "|"),
            Tok::Comma => write!(f, ","),
            Tok::Semi => write!(f, ";"),
            Tok::Colon => write!(f, ":"),
            Tok::Star => write!(f, "*"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Slash => write!(f, "/"),
            Tok::Tilde => write!(f, "~"),
            Tok::Bang => write!(f, "!"),
            Tok::Quest => write!(f, "?"),
            Tok::Dot => write!(f, "."),
            Tok::Backslash => write!(f, "\\"),
        }
    }
}

struct Lexer;

impl Lexer {
    fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        let mut line = 1usize;
        let mut col = 1usize;
        let mut chars = text.chars().peekable();
        while let Some(&ch) = chars.peek() {
            let start_col = col;
            match ch {
                '#' => {
                    for c in chars.by_ref() {
                        if c == '\n' {
                            line += 1;
                            col = 1;
                            break;
                        }
                    }
                    continue;
                }
                '\n' => {
                    chars.next();
                    line += 1;
                    col = 1;
                    continue;
                }
                c if c.is_whitespace() => {
                    chars.next();
                    col += 1;
                    continue;
                }
                c if c.is_ascii_lowercase() => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_lowercase() || c.is_ascii_digit() {
                            s.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Ident(s), line, start_col));
                    continue;
                }
                c if c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            s.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Int(s), line, start_col));
                    continue;
                }
                'D' => {
                    chars.next();
                    col += 1;
                    out.push((Tok::UpperD, line, start_col));
                    continue;
                }
                _ => {}
            }
            let tok = match ch {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '|' => Tok::Pipe,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '*' => Tok::Star,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '/' => Tok::Slash,
                '~' => Tok::Tilde,
                '!' => Tok::Bang,
                '?' => Tok::Quest,
                '.' => Tok::Dot,
                '\\' => Tok::Backslash,
                other => {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("unexpected character {:?}", other),
                    })
                }
            };
            chars.next();
            col += 1;
            out.push((tok, line, start_col));
        }
        Ok(out)
    }
}

const RESERVED: &[&str] = &["w", "cw", "d", "cd", "c", "cc", "box", "tens", "par"];

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: Lexer::lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or_else(|| {
                self.toks
                    .last()
                    .map(|(_, l, c)| (*l, *c + 1))
                    .unwrap_or((1, 1))
            })
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.fail(format!("expected `{}`, found `{}`", tok, t))
            }
            None => self.fail(format!("expected `{}`, found end of input", tok)),
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => {
                let msg = format!("expected identifier, found {:?}", other);
                self.fail(msg)
            }
        }
    }

    fn var_name(&mut self) -> Result<String, ParseError> {
        let s = self.ident()?;
        if RESERVED.contains(&s.as_str()) {
            self.pos -= 1;
            return self.fail(format!("`{}` is reserved and cannot name a variable", s));
        }
        Ok(s)
    }

    // -- rationals -----------------------------------------------------------

    fn coefficient(&mut self) -> Result<Scalar, ParseError> {
        let neg = self.eat(Tok::Minus);
        let num = match self.next() {
            Some(Tok::Int(s)) => s,
            other => return self.fail(format!("expected integer, found {:?}", other)),
        };
        let mut text = String::new();
        if neg {
            text.push('-');
        }
        text.push_str(&num);
        if self.eat(Tok::Slash) {
            match self.next() {
                Some(Tok::Int(s)) => {
                    text.push('/');
                    text.push_str(&s);
                }
                other => return self.fail(format!("expected denominator, found {:?}", other)),
            }
        }
        match Scalar::parse(&text) {
            Some(s) => Ok(s),
            None => self.fail(format!("bad rational `{}`", text)),
        }
    }

    // -- types ---------------------------------------------------------------

    fn type_atom(&mut self) -> Result<LType, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                let name = self.var_name()?;
                Ok(LType::coatom(&name))
            }
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(LType::excl(self.type_atom()?))
            }
            Some(Tok::Quest) => {
                self.pos += 1;
                Ok(LType::int(self.type_atom()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.ltype()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(_)) => {
                let name = self.var_name()?;
                Ok(LType::atom(&name))
            }
            other => {
                let msg = format!("expected a type, found {:?}", other);
                self.fail(msg)
            }
        }
    }

    fn ltype(&mut self) -> Result<LType, ParseError> {
        let lhs = self.type_atom()?;
        match self.peek() {
            Some(Tok::Ident(s)) if s == "tens" || s == "par" => {
                let op = s.clone();
                self.pos += 1;
                let rhs = self.type_atom()?;
                if let Some(Tok::Ident(s2)) = self.peek() {
                    if s2 == "tens" || s2 == "par" {
                        return self.fail("ambiguous type; parenthesize nested tens/par");
                    }
                }
                Ok(if op == "tens" {
                    LType::tens(lhs, rhs)
                } else {
                    LType::par(lhs, rhs)
                })
            }
            _ => Ok(lhs),
        }
    }

    // -- trees, cuts, nets -----------------------------------------------------

    fn tree_atom(&mut self) -> Result<ProofTree, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                let name = self.var_name()?;
                Ok(ProofTree::Var(Var::co_of(name)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.tree()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                match s.as_str() {
                    "w" | "cw" => {
                        let ann = if self.eat(Tok::Colon) {
                            Some(self.ltype()?)
                        } else {
                            None
                        };
                        Ok(if s == "w" {
                            ProofTree::Weak(ann)
                        } else {
                            ProofTree::Coweak(ann)
                        })
                    }
                    "d" | "cd" => {
                        self.expect(Tok::LParen)?;
                        let t = self.tree()?;
                        self.expect(Tok::RParen)?;
                        Ok(if s == "d" {
                            ProofTree::der(t)
                        } else {
                            ProofTree::coder(t)
                        })
                    }
                    "c" | "cc" => {
                        self.expect(Tok::LParen)?;
                        let l = self.tree()?;
                        self.expect(Tok::Comma)?;
                        let r = self.tree()?;
                        self.expect(Tok::RParen)?;
                        Ok(if s == "c" {
                            ProofTree::contr(l, r)
                        } else {
                            ProofTree::cocontr(l, r)
                        })
                    }
                    "box" => {
                        self.expect(Tok::LBrace)?;
                        let content = self.net()?;
                        self.expect(Tok::RBrace)?;
                        self.expect(Tok::LParen)?;
                        let mut args = Vec::new();
                        if self.peek() != Some(&Tok::RParen) {
                            loop {
                                args.push(self.tree()?);
                                if !self.eat(Tok::Comma) {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RParen)?;
                        let content = if content.is_zero() {
                            Net::zero(args.len() + 1)
                        } else {
                            content
                        };
                        match ProofTree::box_(content, args) {
                            Ok(t) => Ok(t),
                            Err(e) => self.fail(e.to_string()),
                        }
                    }
                    "tens" | "par" => self.fail(format!("`{}` is not a tree", s)),
                    name => Ok(ProofTree::Var(Var::plain(name))),
                }
            }
            other => {
                let msg = format!("expected a tree, found {:?}", other);
                self.fail(msg)
            }
        }
    }

    fn tree(&mut self) -> Result<ProofTree, ParseError> {
        let lhs = self.tree_atom()?;
        match self.peek() {
            Some(Tok::Ident(s)) if s == "tens" || s == "par" => {
                let op = s.clone();
                self.pos += 1;
                let rhs = self.tree_atom()?;
                if let Some(Tok::Ident(s2)) = self.peek() {
                    if s2 == "tens" || s2 == "par" {
                        return self.fail("ambiguous tree; parenthesize nested tens/par");
                    }
                }
                Ok(if op == "tens" {
                    ProofTree::tens(lhs, rhs)
                } else {
                    ProofTree::par(lhs, rhs)
                })
            }
            _ => Ok(lhs),
        }
    }

    fn cut(&mut self) -> Result<Cut, ParseError> {
        self.expect(Tok::Lt)?;
        let l = self.tree()?;
        self.expect(Tok::Pipe)?;
        let r = self.tree()?;
        self.expect(Tok::Gt)?;
        match Cut::new(l, r) {
            Ok(c) => Ok(c),
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn simple_net(&mut self) -> Result<SimpleNet, ParseError> {
        self.expect(Tok::LParen)?;
        let mut trees = Vec::new();
        if self.eat(Tok::LBracket) {
            if self.peek() != Some(&Tok::RBracket) {
                loop {
                    trees.push(self.tree()?);
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RBracket)?;
        }
        self.expect(Tok::Semi)?;
        let mut cuts = Vec::new();
        if self.peek() == Some(&Tok::Lt) {
            loop {
                cuts.push(self.cut()?);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        match SimpleNet::new(trees, cuts) {
            Ok(p) => Ok(p),
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn net(&mut self) -> Result<Net, ParseError> {
        // `0` alone is the zero net (width resolved by the caller's context)
        if let Some(Tok::Int(s)) = self.peek() {
            if s == "0" && !matches!(self.peek2(), Some(Tok::Star) | Some(Tok::Slash)) {
                self.pos += 1;
                return Ok(Net::zero(0));
            }
        }
        let mut terms: Vec<(Scalar, SimpleNet)> = Vec::new();
        loop {
            let coeff = match self.peek() {
                Some(Tok::Int(_)) | Some(Tok::Minus) => {
                    let c = self.coefficient()?;
                    self.expect(Tok::Star)?;
                    c
                }
                _ => Scalar::one(),
            };
            let p = self.simple_net()?;
            terms.push((coeff, p));
            if !self.eat(Tok::Plus) {
                break;
            }
        }
        let width = terms[0].1.width();
        match Net::from_terms(width, terms) {
            Ok(n) => Ok(n),
            Err(e) => self.fail(e.to_string()),
        }
    }

    // -- differential terms ----------------------------------------------------

    fn dterm_atom(&mut self) -> Result<DComb, ParseError> {
        match self.peek() {
            Some(Tok::Backslash) => {
                self.pos += 1;
                let x = self.var_name()?;
                self.expect(Tok::Dot)?;
                let body = self.dcomb_inner()?;
                Ok(DTerm::abs_comb(&x, &body))
            }
            Some(Tok::UpperD) => {
                self.pos += 1;
                let m = self.dterm_atom()?;
                self.expect(Tok::Dot)?;
                let n = self.dterm_atom()?;
                Ok(DTerm::dapp_comb(&m, &n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.dcomb_inner()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(_)) => {
                let x = self.var_name()?;
                Ok(DComb::singleton(DTerm::Var(x)))
            }
            other => {
                let msg = format!("expected a term, found {:?}", other);
                self.fail(msg)
            }
        }
    }

    fn dterm_app(&mut self) -> Result<DComb, ParseError> {
        let mut head = self.dterm_atom()?;
        loop {
            match self.peek() {
                Some(Tok::Backslash) | Some(Tok::UpperD) | Some(Tok::LParen)
                | Some(Tok::Ident(_)) => {
                    let arg = self.dterm_atom()?;
                    head = DTerm::app_comb(&head, &arg);
                }
                _ => break,
            }
        }
        Ok(head)
    }

    fn dcomb_inner(&mut self) -> Result<DComb, ParseError> {
        if let Some(Tok::Int(s)) = self.peek() {
            if s == "0" && !matches!(self.peek2(), Some(Tok::Star) | Some(Tok::Slash)) {
                self.pos += 1;
                return Ok(DComb::zero());
            }
        }
        let mut acc = DComb::zero();
        loop {
            let coeff = match self.peek() {
                Some(Tok::Int(_)) | Some(Tok::Minus) => {
                    let c = self.coefficient()?;
                    self.expect(Tok::Star)?;
                    c
                }
                _ => Scalar::one(),
            };
            let term = self.dterm_app()?;
            acc = acc.add(&term.scale(&coeff));
            if !self.eat(Tok::Plus) {
                break;
            }
        }
        Ok(acc)
    }

    // -- resource terms ----------------------------------------------------------

    fn rterm_atom(&mut self) -> Result<RComb, ParseError> {
        match self.peek() {
            Some(Tok::Backslash) => {
                self.pos += 1;
                let x = self.var_name()?;
                self.expect(Tok::Dot)?;
                let body = self.rcomb_inner()?;
                Ok(RTerm::abs_comb(&x, &body))
            }
            Some(Tok::Lt) => {
                self.pos += 1;
                let head = self.rcomb_inner()?;
                self.expect(Tok::Gt)?;
                self.expect(Tok::LBracket)?;
                let mut slots = Vec::new();
                if self.peek() != Some(&Tok::RBracket) {
                    loop {
                        slots.push(self.rcomb_inner()?);
                        if !self.eat(Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(RTerm::bapp_comb(&head, &slots))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.rcomb_inner()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(_)) => {
                let x = self.var_name()?;
                Ok(RComb::singleton(RTerm::Var(x)))
            }
            other => {
                let msg = format!("expected a resource term, found {:?}", other);
                self.fail(msg)
            }
        }
    }

    fn rcomb_inner(&mut self) -> Result<RComb, ParseError> {
        if let Some(Tok::Int(s)) = self.peek() {
            if s == "0" && !matches!(self.peek2(), Some(Tok::Star) | Some(Tok::Slash)) {
                self.pos += 1;
                return Ok(RComb::zero());
            }
        }
        let mut acc = RComb::zero();
        loop {
            let coeff = match self.peek() {
                Some(Tok::Int(_)) | Some(Tok::Minus) => {
                    let c = self.coefficient()?;
                    self.expect(Tok::Star)?;
                    c
                }
                _ => Scalar::one(),
            };
            let term = self.rterm_atom()?;
            acc = acc.add(&term.scale(&coeff));
            if !self.eat(Tok::Plus) {
                break;
            }
        }
        Ok(acc)
    }

    fn finish<T>(self, value: T) -> Result<T, ParseError> {
        if self.at_end() {
            Ok(value)
        } else {
            self.fail("trailing input")
        }
    }
}

pub fn parse_net(text: &str) -> Result<Net, ParseError> {
    let mut p = Parser::new(text)?;
    let n = p.net()?;
    p.finish(n)
}

pub fn parse_type(text: &str) -> Result<LType, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.ltype()?;
    p.finish(t)
}

/// Comma-separated list of types (a sequent).
pub fn parse_type_list(text: &str) -> Result<Vec<LType>, ParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let mut p = Parser::new(text)?;
    let mut out = vec![p.ltype()?];
    while p.eat(Tok::Comma) {
        out.push(p.ltype()?);
    }
    p.finish(out)
}

pub fn parse_dterm(text: &str) -> Result<DComb, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.dcomb_inner()?;
    p.finish(t)
}

pub fn parse_rterm(text: &str) -> Result<RComb, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.rcomb_inner()?;
    p.finish(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Scalar;

    #[test]
    fn parse_axiom() {
        let n = parse_net("([x, ~x] ;)").unwrap();
        assert_eq!(n.width(), 2);
        assert_eq!(n.support_len(), 1);
    }

    #[test]
    fn parse_weighted_sum() {
        let n = parse_net("2/3 * ([w] ;) + 1/3 * ([cw] ;)").unwrap();
        assert_eq!(n.width(), 1);
        assert_eq!(n.support_len(), 2);
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_net("([x tens y").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col > 1);
    }

    #[test]
    fn parse_cut_and_annotations() {
        let n = parse_net("(; <w:?a | cw>)").unwrap();
        assert_eq!(n.width(), 0);
        let p = n.support().next().unwrap().0;
        assert_eq!(p.cuts().len(), 1);
    }

    #[test]
    fn parse_box_with_zero_content() {
        let n = parse_net("([box{0}(x, y)] ;)").unwrap();
        let p = n.support().next().unwrap().0;
        match &p.trees()[0] {
            crate::syntax::ProofTree::Box_ { arity, content, .. } => {
                assert_eq!(*arity, 2);
                assert!(content.is_zero());
                assert_eq!(content.width(), 3);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn comments_and_negative_coefficients() {
        let n = parse_net("# a weighted net\n-1 * ([w:?a] ;)").unwrap();
        let (_, c) = n.support().next().unwrap();
        assert_eq!(c, &Scalar::from_int(-1));
    }

    #[test]
    fn reserved_words_do_not_name_variables() {
        assert!(parse_net("([box] ;)").is_err());
        let err = parse_net("([~w] ;)").unwrap_err();
        assert!(err.message.contains("reserved"));
    }

    #[test]
    fn parse_types() {
        assert_eq!(parse_type("!a").unwrap(), LType::excl(LType::atom("a")));
        assert_eq!(
            parse_type("a tens ~b").unwrap(),
            LType::tens(LType::atom("a"), LType::coatom("b"))
        );
        assert_eq!(
            parse_type("?(a par b)").unwrap(),
            LType::int(LType::par(LType::atom("a"), LType::atom("b")))
        );
        assert!(parse_type("a tens b tens c").is_err());
        assert_eq!(
            parse_type_list("a, ~a, !b").unwrap().len(),
            3
        );
    }
}
