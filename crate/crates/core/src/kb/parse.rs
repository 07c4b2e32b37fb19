//! Concrete syntax for knowledge-base files.
//!
//! ```text
//! % line comment
//! const c1, c2.
//! ontology:
//!   a & (b -> c).
//!   ~f.
//! rules:
//!   K b <- K a.
//!   K d <- K c, not e.
//!   K e.                % fact; `K e <- .` is equivalent
//!   p(X) <- K q(X), not r(X).
//! ```
//!
//! Atoms are `[a-z][A-Za-z0-9_]*`, optionally with parenthesized arguments;
//! variables are `[A-Z][A-Za-z0-9_]*` and may only appear in rules. The `K`
//! before the head may be omitted. Ontology formulas use `~`, `&`, `|`, `->`
//! (binding in that order, implication right-associative) and must be ground.

use std::collections::HashMap;
use std::fmt;

use crate::ontology::Formula;

use super::KbError;

/// A rule term: a constant or a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(String),
}

/// A possibly non-ground predicate atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredAtom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl PredAtom {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    /// Interned ground name: `pred` or `pred(c1,c2)`.
    pub fn ground_name(&self) -> String {
        if self.args.is_empty() {
            self.pred.clone()
        } else {
            let args: Vec<&str> = self
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => c.as_str(),
                    Term::Var(v) => v.as_str(),
                })
                .collect();
            format!("{}({})", self.pred, args.join(","))
        }
    }
}

impl fmt::Display for PredAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ground_name())
    }
}

/// A parsed, possibly non-ground rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRule {
    pub head: PredAtom,
    pub body_pos: Vec<PredAtom>,
    pub body_neg: Vec<PredAtom>,
}

/// Parse result: ontology formulas (ground), rules, declared constants.
#[derive(Debug, Clone, Default)]
pub struct RawKb {
    pub consts: Vec<String>,
    pub ontology: Vec<Formula>,
    pub rules: Vec<RawRule>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    Dot,
    Comma,
    LParen,
    RParen,
    Colon,
    Arrow,     // ->
    RuleArrow, // <-
    Amp,
    Pipe,
    Tilde,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::RuleArrow => write!(f, "`<-`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Tilde => write!(f, "`~`"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

fn lex(text: &str) -> Result<Vec<Spanned>, KbError> {
    let mut lx = Lexer { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        // Skip whitespace and comments.
        loop {
            match lx.chars.peek() {
                Some('%') => {
                    while let Some(&c) = lx.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        lx.bump();
                    }
                }
                Some(&c) if c.is_whitespace() => {
                    lx.bump();
                }
                _ => break,
            }
        }
        let (line, col) = (lx.line, lx.col);
        let Some(&c) = lx.chars.peek() else { break };
        let tok = match c {
            '.' => {
                lx.bump();
                Tok::Dot
            }
            ',' => {
                lx.bump();
                Tok::Comma
            }
            '(' => {
                lx.bump();
                Tok::LParen
            }
            ')' => {
                lx.bump();
                Tok::RParen
            }
            ':' => {
                lx.bump();
                Tok::Colon
            }
            '&' => {
                lx.bump();
                Tok::Amp
            }
            '|' => {
                lx.bump();
                Tok::Pipe
            }
            '~' => {
                lx.bump();
                Tok::Tilde
            }
            '-' => {
                lx.bump();
                if lx.chars.peek() == Some(&'>') {
                    lx.bump();
                    Tok::Arrow
                } else {
                    return Err(syntax(line, col, "expected `->`".into()));
                }
            }
            '<' => {
                lx.bump();
                if lx.chars.peek() == Some(&'-') {
                    lx.bump();
                    Tok::RuleArrow
                } else {
                    return Err(syntax(line, col, "expected `<-`".into()));
                }
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&c) = lx.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                if s.chars().next().unwrap().is_ascii_lowercase() {
                    Tok::Lower(s)
                } else {
                    Tok::Upper(s)
                }
            }
            other => {
                return Err(syntax(line, col, format!("unexpected character `{other}`")));
            }
        };
        out.push((tok, line, col));
    }
    Ok(out)
}

impl Lexer<'_> {
    fn bump(&mut self) {
        if let Some(c) = self.chars.next() {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }
}

fn syntax(line: usize, col: usize, msg: String) -> KbError {
    KbError::Syntax { line, col, msg }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Predicate name → arity, across ontology and rules.
    arity: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn next(&mut self) -> Result<Tok, KbError> {
        let (l, c) = self.here();
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _, _)| t.clone())
            .ok_or_else(|| syntax(l, c, "unexpected end of input".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &Tok) -> Result<(), KbError> {
        let (l, c) = self.here();
        let got = self.next()?;
        if &got == want {
            Ok(())
        } else {
            Err(syntax(l, c, format!("expected {want}, found {got}")))
        }
    }

    fn expect_lower(&mut self, what: &str) -> Result<String, KbError> {
        let (l, c) = self.here();
        match self.next()? {
            Tok::Lower(s) => Ok(s),
            got => Err(syntax(l, c, format!("expected {what}, found {got}"))),
        }
    }

    fn check_arity(&mut self, pred: &str, arity: usize, l: usize, c: usize) -> Result<(), KbError> {
        match self.arity.get(pred) {
            Some(&known) if known != arity => Err(syntax(
                l,
                c,
                format!("predicate `{pred}` used with arity {arity}, previously {known}"),
            )),
            Some(_) => Ok(()),
            None => {
                self.arity.insert(pred.to_string(), arity);
                Ok(())
            }
        }
    }

    /// Atom in a rule: constants and variables allowed as arguments.
    fn rule_atom(&mut self) -> Result<PredAtom, KbError> {
        let (l, c) = self.here();
        let pred = self.expect_lower("an atom")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.next()?;
            loop {
                let (al, ac) = self.here();
                match self.next()? {
                    Tok::Lower(s) => args.push(Term::Const(s)),
                    Tok::Upper(s) => args.push(Term::Var(s)),
                    got => {
                        return Err(syntax(al, ac, format!("expected a term, found {got}")));
                    }
                }
                match self.next()? {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    got => {
                        let (l2, c2) = self.here();
                        return Err(syntax(l2, c2, format!("expected `,` or `)`, found {got}")));
                    }
                }
            }
        }
        self.check_arity(&pred, args.len(), l, c)?;
        Ok(PredAtom { pred, args })
    }

    /// Atom in an ontology formula: must be ground.
    fn ground_atom(&mut self) -> Result<PredAtom, KbError> {
        let (l, c) = self.here();
        let atom = self.rule_atom()?;
        if !atom.is_ground() {
            return Err(syntax(l, c, "ontology formulas must be ground".into()));
        }
        Ok(atom)
    }

    fn formula(&mut self) -> Result<Formula, KbError> {
        let lhs = self.formula_or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.next()?;
            let rhs = self.formula()?; // right-associative
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn formula_or(&mut self) -> Result<Formula, KbError> {
        let mut f = self.formula_and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.next()?;
            f = Formula::or(f, self.formula_and()?);
        }
        Ok(f)
    }

    fn formula_and(&mut self) -> Result<Formula, KbError> {
        let mut f = self.formula_unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.next()?;
            f = Formula::and(f, self.formula_unary()?);
        }
        Ok(f)
    }

    fn formula_unary(&mut self) -> Result<Formula, KbError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.next()?;
                Ok(Formula::not(self.formula_unary()?))
            }
            Some(Tok::LParen) => {
                self.next()?;
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            _ => Ok(Formula::atom(self.ground_atom()?.ground_name())),
        }
    }

    fn rule(&mut self) -> Result<RawRule, KbError> {
        // Optional `K` before the head.
        if self.peek() == Some(&Tok::Upper("K".to_string())) {
            self.next()?;
        }
        let head = self.rule_atom()?;
        let mut body_pos = Vec::new();
        let mut body_neg = Vec::new();
        match self.next()? {
            Tok::Dot => {}
            Tok::RuleArrow => {
                if self.peek() == Some(&Tok::Dot) {
                    self.next()?; // empty body: a fact
                } else {
                    loop {
                        match self.peek() {
                            Some(Tok::Upper(k)) if k == "K" => {
                                self.next()?;
                                body_pos.push(self.rule_atom()?);
                            }
                            Some(Tok::Lower(n)) if n == "not" => {
                                self.next()?;
                                body_neg.push(self.rule_atom()?);
                            }
                            _ => body_pos.push(self.rule_atom()?),
                        }
                        match self.next()? {
                            Tok::Comma => continue,
                            Tok::Dot => break,
                            got => {
                                let (l, c) = self.here();
                                return Err(syntax(
                                    l,
                                    c,
                                    format!("expected `,` or `.`, found {got}"),
                                ));
                            }
                        }
                    }
                }
            }
            got => {
                let (l, c) = self.here();
                return Err(syntax(l, c, format!("expected `.` or `<-`, found {got}")));
            }
        }
        Ok(RawRule { head, body_pos, body_neg })
    }
}

/// Parses KB source text into its pre-grounding form.
pub fn parse_kb(text: &str) -> Result<RawKb, KbError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, arity: HashMap::new() };
    let mut kb = RawKb::default();
    let mut seen_ontology = false;
    let mut seen_rules = false;

    while p.peek().is_some() {
        let (l, c) = p.here();
        match p.peek() {
            Some(Tok::Lower(s)) if s == "const" => {
                p.next()?;
                loop {
                    let name = p.expect_lower("a constant name")?;
                    if kb.consts.contains(&name) {
                        return Err(syntax(l, c, format!("duplicate constant `{name}`")));
                    }
                    kb.consts.push(name);
                    match p.next()? {
                        Tok::Comma => continue,
                        Tok::Dot => break,
                        got => {
                            let (l2, c2) = p.here();
                            return Err(syntax(l2, c2, format!("expected `,` or `.`, found {got}")));
                        }
                    }
                }
            }
            Some(Tok::Lower(s)) if s == "ontology" && p.peek2() == Some(&Tok::Colon) => {
                if seen_ontology {
                    return Err(syntax(l, c, "duplicate `ontology:` section".into()));
                }
                if seen_rules {
                    return Err(syntax(l, c, "`ontology:` must precede `rules:`".into()));
                }
                seen_ontology = true;
                p.next()?;
                p.next()?;
                loop {
                    match p.peek() {
                        None => break,
                        Some(Tok::Lower(s))
                            if (s == "rules" || s == "ontology")
                                && p.peek2() == Some(&Tok::Colon) =>
                        {
                            break
                        }
                        _ => {
                            let f = p.formula()?;
                            p.expect(&Tok::Dot)?;
                            kb.ontology.push(f);
                        }
                    }
                }
            }
            Some(Tok::Lower(s)) if s == "rules" && p.peek2() == Some(&Tok::Colon) => {
                if seen_rules {
                    return Err(syntax(l, c, "duplicate `rules:` section".into()));
                }
                seen_rules = true;
                p.next()?;
                p.next()?;
                while p.peek().is_some() {
                    kb.rules.push(p.rule()?);
                }
            }
            Some(got) => {
                let got = got.clone();
                return Err(syntax(
                    l,
                    c,
                    format!("expected `const`, `ontology:` or `rules:`, found {got}"),
                ));
            }
            None => break,
        }
    }
    Ok(kb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let kb = parse_kb(
            "% header\nconst c1, c2.\nontology:\n a & (b -> c). % inline\n ~f.\nrules:\n K b <- K a.\n d <- K c, not e.\n K e.\n f <- .\n",
        )
        .unwrap();
        assert_eq!(kb.consts, vec!["c1", "c2"]);
        assert_eq!(kb.ontology.len(), 2);
        assert_eq!(kb.rules.len(), 4);
        assert_eq!(kb.rules[1].head.pred, "d");
        assert_eq!(kb.rules[1].body_pos.len(), 1);
        assert_eq!(kb.rules[1].body_neg.len(), 1);
        assert!(kb.rules[2].body_pos.is_empty() && kb.rules[2].body_neg.is_empty());
        assert!(kb.rules[3].body_pos.is_empty() && kb.rules[3].body_neg.is_empty());
    }

    #[test]
    fn empty_rules_section() {
        let kb = parse_kb("rules:\n").unwrap();
        assert!(kb.rules.is_empty());
    }

    #[test]
    fn precedence_tilde_amp_pipe_arrow() {
        let kb = parse_kb("ontology:\n ~a & b | c -> d.\n").unwrap();
        // (((~a & b) | c) -> d)
        let f = &kb.ontology[0];
        assert_eq!(f.to_string(), "(((~a & b) | c) -> d)");
    }

    #[test]
    fn implication_right_associative() {
        let kb = parse_kb("ontology:\n a -> b -> c.\n").unwrap();
        assert_eq!(kb.ontology[0].to_string(), "(a -> (b -> c))");
    }

    #[test]
    fn variables_allowed_in_rules_only() {
        let kb = parse_kb("rules:\n p(X) <- K q(X), not r(a).\n").unwrap();
        assert_eq!(kb.rules[0].head.args, vec![Term::Var("X".to_string())]);
        let err = parse_kb("ontology:\n p(X).\n").unwrap_err();
        assert!(err.to_string().contains("ground"));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_kb("rules:\n K a <-\n").unwrap_err();
        let KbError::Syntax { line, .. } = err else { panic!("expected syntax error") };
        assert_eq!(line, 2);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err = parse_kb("rules:\n p(a) <- K p.\n").unwrap_err();
        assert!(err.to_string().contains("arity"));
    }

    #[test]
    fn duplicate_const_rejected() {
        let err = parse_kb("const a, a.\nrules:\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn duplicate_section_rejected() {
        let err = parse_kb("rules:\n").and_then(|_| parse_kb("ontology:\n a.\nontology:\n b.\n"));
        assert!(err.unwrap_err().to_string().contains("duplicate"));
    }
}
