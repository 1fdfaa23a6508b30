//! Lexer and recursive-descent parser for the program and formula grammars.
//!
//! Grammar:
//!
//! ```text
//! program := decl* stmt
//! decl    := ("high"|"low"|"out"|"local") ident ("," ident)* ";"
//! stmt    := ident ":=" formula
//!          | "if" formula "then" "{" stmt "}" "else" "{" stmt "}"
//!          | "skip"
//!          | stmt ";" stmt
//! formula := "true" | "false" | ident | "!" formula
//!          | formula "&" formula | formula "|" formula
//!          | formula "==" formula | formula "=>" formula
//!          | "(" formula ")"
//! ```
//!
//! Precedence `!` > `&` > `|` > `==` > `=>`; `=>` is right-associative,
//! `==`, `&`, `|` associate to the left. Sequencing folds to the right.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::lang::ast::{Formula, ProgramUnit, Stmt};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    KwTrue,
    KwFalse,
    KwIf,
    KwThen,
    KwElse,
    KwSkip,
    KwHigh,
    KwLow,
    KwOut,
    KwLocal,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Assign,
    Bang,
    Amp,
    Pipe,
    EqEq,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::KwTrue => "`true`".into(),
            Tok::KwFalse => "`false`".into(),
            Tok::KwIf => "`if`".into(),
            Tok::KwThen => "`then`".into(),
            Tok::KwElse => "`else`".into(),
            Tok::KwSkip => "`skip`".into(),
            Tok::KwHigh => "`high`".into(),
            Tok::KwLow => "`low`".into(),
            Tok::KwOut => "`out`".into(),
            Tok::KwLocal => "`local`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    loop {
        let (tline, tcol) = (line, col);
        let c = match chars.next() {
            None => {
                out.push(Spanned { tok: Tok::Eof, line, col });
                return Ok(out);
            }
            Some(c) => c,
        };
        let mut advance = |n: usize| col += n;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                continue;
            }
            ' ' | '\t' | '\r' => {
                advance(1);
                continue;
            }
            '(' => {
                advance(1);
                Tok::LParen
            }
            ')' => {
                advance(1);
                Tok::RParen
            }
            '{' => {
                advance(1);
                Tok::LBrace
            }
            '}' => {
                advance(1);
                Tok::RBrace
            }
            ';' => {
                advance(1);
                Tok::Semi
            }
            ',' => {
                advance(1);
                Tok::Comma
            }
            '!' => {
                advance(1);
                Tok::Bang
            }
            '&' => {
                advance(1);
                Tok::Amp
            }
            '|' => {
                advance(1);
                Tok::Pipe
            }
            ':' => {
                if chars.peek() == Some(&'=') {
                    chars.next();
                    advance(2);
                    Tok::Assign
                } else {
                    return Err(Error::Syntax {
                        line: tline,
                        col: tcol,
                        msg: "expected `:=`".into(),
                    });
                }
            }
            '=' => match chars.peek() {
                Some('=') => {
                    chars.next();
                    advance(2);
                    Tok::EqEq
                }
                Some('>') => {
                    chars.next();
                    advance(2);
                    Tok::Arrow
                }
                _ => {
                    return Err(Error::Syntax {
                        line: tline,
                        col: tcol,
                        msg: "expected `==` or `=>`".into(),
                    });
                }
            },
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                word.push(c);
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' || n == '\'' {
                        word.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                advance(word.len());
                match word.as_str() {
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    "if" => Tok::KwIf,
                    "then" => Tok::KwThen,
                    "else" => Tok::KwElse,
                    "skip" => Tok::KwSkip,
                    "high" => Tok::KwHigh,
                    "low" => Tok::KwLow,
                    "out" => Tok::KwOut,
                    "local" => Tok::KwLocal,
                    _ => Tok::Ident(word),
                }
            }
            other => {
                return Err(Error::Syntax {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        };
        out.push(Spanned { tok, line: tline, col: tcol });
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Declared variable set while parsing a program body; `None` for
    /// standalone formulas, which carry no declaration context.
    declared: Option<BTreeSet<String>>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> &Spanned {
        let s = &self.toks[self.pos];
        if s.tok != Tok::Eof {
            self.pos += 1;
        }
        s
    }

    fn eat(&mut self, want: &Tok) -> Result<()> {
        let here = self.peek();
        if &here.tok == want {
            self.next();
            Ok(())
        } else {
            Err(Error::Syntax {
                line: here.line,
                col: here.col,
                msg: format!("expected {}, found {}", want.describe(), here.tok.describe()),
            })
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        let here = self.peek();
        Error::Syntax { line: here.line, col: here.col, msg: msg.into() }
    }

    fn check_declared(&self, name: &str, line: usize, col: usize) -> Result<()> {
        match &self.declared {
            Some(set) if !set.contains(name) => Err(Error::UndeclaredVariable {
                name: name.to_string(),
                line,
                col,
            }),
            _ => Ok(()),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        self.implication()
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.iff_chain()?;
        if self.peek().tok == Tok::Arrow {
            self.next();
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn iff_chain(&mut self) -> Result<Formula> {
        let mut lhs = self.or_chain()?;
        while self.peek().tok == Tok::EqEq {
            self.next();
            let rhs = self.or_chain()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn or_chain(&mut self) -> Result<Formula> {
        let mut lhs = self.and_chain()?;
        while self.peek().tok == Tok::Pipe {
            self.next();
            let rhs = self.and_chain()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_chain(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.next();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.peek().tok == Tok::Bang {
            self.next();
            Ok(Formula::not(self.unary()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let (line, col) = (self.peek().line, self.peek().col);
        match self.peek().tok.clone() {
            Tok::KwTrue => {
                self.next();
                Ok(Formula::tt())
            }
            Tok::KwFalse => {
                self.next();
                Ok(Formula::ff())
            }
            Tok::Ident(name) => {
                self.next();
                self.check_declared(&name, line, col)?;
                Ok(Formula::var(name))
            }
            Tok::LParen => {
                self.next();
                let f = self.formula()?;
                self.eat(&Tok::RParen)?;
                Ok(f)
            }
            other => Err(Error::Syntax {
                line,
                col,
                msg: format!("expected a formula, found {}", other.describe()),
            }),
        }
    }

    fn stmt_seq(&mut self) -> Result<Stmt> {
        let mut items = vec![self.stmt_one()?];
        while self.peek().tok == Tok::Semi {
            self.next();
            items.push(self.stmt_one()?);
        }
        Ok(Stmt::seq_all(items))
    }

    fn stmt_one(&mut self) -> Result<Stmt> {
        let (line, col) = (self.peek().line, self.peek().col);
        match self.peek().tok.clone() {
            Tok::KwSkip => {
                self.next();
                Ok(Stmt::Skip)
            }
            Tok::KwIf => {
                self.next();
                let cond = self.formula()?;
                self.eat(&Tok::KwThen)?;
                self.eat(&Tok::LBrace)?;
                let then_branch = self.stmt_seq()?;
                self.eat(&Tok::RBrace)?;
                self.eat(&Tok::KwElse)?;
                self.eat(&Tok::LBrace)?;
                let else_branch = self.stmt_seq()?;
                self.eat(&Tok::RBrace)?;
                Ok(Stmt::if_else(cond, then_branch, else_branch))
            }
            Tok::Ident(name) => {
                self.next();
                self.check_declared(&name, line, col)?;
                self.eat(&Tok::Assign)?;
                let rhs = self.formula()?;
                Ok(Stmt::Assign(name, rhs))
            }
            other => Err(Error::Syntax {
                line,
                col,
                msg: format!("expected a statement, found {}", other.describe()),
            }),
        }
    }

    fn decls(&mut self) -> Result<(Vec<String>, Vec<String>, Vec<String>, Vec<String>)> {
        let mut high = Vec::new();
        let mut low = Vec::new();
        let mut out = Vec::new();
        let mut local = Vec::new();
        let mut kinds: BTreeMap<String, BTreeSet<&'static str>> = BTreeMap::new();
        loop {
            let kind = match self.peek().tok {
                Tok::KwHigh => "high",
                Tok::KwLow => "low",
                Tok::KwOut => "out",
                Tok::KwLocal => "local",
                _ => break,
            };
            self.next();
            loop {
                let (line, col) = (self.peek().line, self.peek().col);
                let name = match self.peek().tok.clone() {
                    Tok::Ident(n) => {
                        self.next();
                        n
                    }
                    other => {
                        return Err(Error::Syntax {
                            line,
                            col,
                            msg: format!("expected an identifier, found {}", other.describe()),
                        });
                    }
                };
                let set = kinds.entry(name.clone()).or_default();
                let fresh = set.insert(kind);
                let allowed = fresh
                    && (set.len() == 1
                        || (set.len() == 2
                            && set.contains("out")
                            && (set.contains("high") || set.contains("low"))));
                if !allowed {
                    return Err(Error::DuplicateDeclaration { name });
                }
                match kind {
                    "high" => high.push(name),
                    "low" => low.push(name),
                    "out" => out.push(name),
                    _ => local.push(name),
                }
                match self.peek().tok {
                    Tok::Comma => {
                        self.next();
                    }
                    _ => {
                        self.eat(&Tok::Semi)?;
                        break;
                    }
                }
            }
        }
        Ok((high, low, out, local))
    }
}

/// Parses a standalone formula (no declaration checking).
pub fn parse_formula(src: &str) -> Result<Formula> {
    let mut p = Parser { toks: lex(src)?, pos: 0, declared: None };
    let f = p.formula()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.err_here(format!(
            "expected end of input, found {}",
            p.peek().tok.describe()
        )));
    }
    Ok(f)
}

/// Parses a full program: declarations followed by one statement sequence.
pub fn parse_program(src: &str) -> Result<ProgramUnit> {
    let mut p = Parser { toks: lex(src)?, pos: 0, declared: None };
    let (high, low, out, local) = p.decls()?;
    p.declared = Some(
        high.iter()
            .chain(&low)
            .chain(&out)
            .chain(&local)
            .cloned()
            .collect(),
    );
    let body = p.stmt_seq()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.err_here(format!(
            "expected end of input, found {}",
            p.peek().tok.describe()
        )));
    }
    ProgramUnit::new(high, low, out, local, body)
}
