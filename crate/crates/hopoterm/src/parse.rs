//! Text format for rewrite systems and ordering-constraint problems.
//!
//! A file is a sequence of sections, each introduced by an uppercase
//! keyword: `SETTING`, `SORTS`, `SIG`, `VARS`, `RULES`, `CONSTRAINTS`.
//! Declarations, rules, and constraints are one per line. `#` starts a
//! comment unless it directly continues an identifier, so marked symbols
//! like `append#` stay ordinary names. Types use `=>`, rules use `->`, and
//! constraints use `>` (strict), `>=` (weak), or `>?` (orient if possible,
//! dependency-pair settings only). A `!` before a `SIG` entry declares a
//! subterm constant, which the dynamic dependency-pair setting may use on
//! constraint right-hand sides.
//!
//! ```text
//! SORTS
//!   nat list
//! SIG
//!   nil  : list
//!   cons : [nat * list] => list
//! VARS
//!   n : nat
//! RULES
//!   cons(n, nil) -> nil
//! ```

use crate::term::{
    self, Afs, Rule, Signature, SimpleType, Term, TypeDeclaration, Violation,
};
use crate::Setting;
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.pos.line, self.pos.col, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenKind {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Star,
    Backslash,
    Bang,
    FatArrow,
    RuleArrow,
    Strict,
    Weak,
    Oriented,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Ident(n) => format!("`{n}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Dot => "`.`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Backslash => "`\\`".into(),
            TokenKind::Bang => "`!`".into(),
            TokenKind::FatArrow => "`=>`".into(),
            TokenKind::RuleArrow => "`->`".into(),
            TokenKind::Strict => "`>`".into(),
            TokenKind::Weak => "`>=`".into(),
            TokenKind::Oriented => "`>?`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '#'
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;
    macro_rules! bump {
        () => {{
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            // Not preceded by an identifier character (that case is eaten
            // inside the identifier loop), so this is a comment.
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        if is_ident_start(c) {
            let mut name = String::new();
            name.push(bump!());
            loop {
                match chars.peek() {
                    Some(&c) if is_ident_continue(c) => name.push(bump!()),
                    Some(&'-') => {
                        // A dash continues the identifier only when an
                        // alphanumeric character follows; otherwise it
                        // belongs to a `->` token.
                        let mut look = chars.clone();
                        look.next();
                        match look.peek() {
                            Some(&c2) if c2.is_alphanumeric() => {
                                name.push(bump!());
                                name.push(bump!());
                            }
                            _ => break,
                        }
                    }
                    _ => break,
                }
            }
            tokens.push(Token { kind: TokenKind::Ident(name), pos });
            continue;
        }
        let kind = match c {
            '(' => {
                bump!();
                TokenKind::LParen
            }
            ')' => {
                bump!();
                TokenKind::RParen
            }
            '[' => {
                bump!();
                TokenKind::LBracket
            }
            ']' => {
                bump!();
                TokenKind::RBracket
            }
            ',' => {
                bump!();
                TokenKind::Comma
            }
            ':' => {
                bump!();
                TokenKind::Colon
            }
            '.' => {
                bump!();
                TokenKind::Dot
            }
            '*' => {
                bump!();
                TokenKind::Star
            }
            '\\' => {
                bump!();
                TokenKind::Backslash
            }
            '!' => {
                bump!();
                TokenKind::Bang
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    TokenKind::FatArrow
                } else {
                    return Err(ParseError::new(pos, "expected `=>` after `=`"));
                }
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    TokenKind::RuleArrow
                } else {
                    return Err(ParseError::new(pos, "expected `->` after `-`"));
                }
            }
            '>' => {
                bump!();
                match chars.peek() {
                    Some(&'=') => {
                        bump!();
                        TokenKind::Weak
                    }
                    Some(&'?') => {
                        bump!();
                        TokenKind::Oriented
                    }
                    _ => TokenKind::Strict,
                }
            }
            other => {
                return Err(ParseError::new(
                    pos,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        tokens.push(Token { kind, pos });
    }
    Ok(tokens)
}

/// How a constraint asks to be oriented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Must decrease strictly.
    Strict,
    /// Must not increase.
    Weak,
    /// Weak at least; the solver is free to make it strict.
    Oriented,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Strict => ">",
            Relation::Weak => ">=",
            Relation::Oriented => ">?",
        }
    }
}

/// One line of a `CONSTRAINTS` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderRequirement {
    pub lhs: Term,
    pub rhs: Term,
    pub relation: Relation,
}

/// An ordering problem: orient the constraints under the given setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintProblem {
    pub setting: Setting,
    pub signature: Signature,
    pub requirements: Vec<OrderRequirement>,
    /// Symbols declared with `!`, interpreted as the zero function and only
    /// allowed on constraint right-hand sides.
    pub subterm_constants: BTreeSet<String>,
}

/// Either kind of input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    System(Afs),
    Problem(ConstraintProblem),
}

const SECTION_NAMES: [&str; 6] =
    ["SETTING", "SORTS", "SIG", "VARS", "RULES", "CONSTRAINTS"];

fn section_name(tok: &Token) -> Option<&str> {
    match &tok.kind {
        TokenKind::Ident(n) if SECTION_NAMES.contains(&n.as_str()) => Some(n),
        _ => None,
    }
}

#[derive(Debug, Default)]
struct RawProblem {
    setting: Option<Setting>,
    signature: Signature,
    vars: BTreeMap<String, SimpleType>,
    sym_pos: BTreeMap<String, Pos>,
    rules: Vec<(Rule, Pos)>,
    requirements: Vec<(OrderRequirement, Pos)>,
    subterm_constants: BTreeSet<String>,
    has_rules_section: bool,
    has_constraints_section: bool,
}

struct Cursor<'a> {
    tokens: &'a [Token],
    i: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.i)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.i);
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn end_pos(&self) -> Pos {
        self.tokens
            .last()
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn at_section(&self) -> bool {
        self.peek().map_or(false, |t| section_name(t).is_some())
    }

    /// Consumes and returns all tokens on the current line (used for
    /// one-entry-per-line sections).
    fn take_line(&mut self) -> &'a [Token] {
        let start = self.i;
        let line = self.tokens[start].pos.line;
        while self
            .peek()
            .map_or(false, |t| t.pos.line == line)
        {
            self.i += 1;
        }
        &self.tokens[start..self.i]
    }
}

fn expect_ident(cur: &mut Cursor, what: &str) -> Result<(String, Pos), ParseError> {
    match cur.next() {
        Some(Token { kind: TokenKind::Ident(n), pos }) => Ok((n.clone(), *pos)),
        Some(t) => Err(ParseError::new(
            t.pos,
            format!("expected {what}, found {}", t.kind.describe()),
        )),
        None => Err(ParseError::new(cur.end_pos(), format!("expected {what}"))),
    }
}

fn expect_kind(cur: &mut Cursor, kind: &TokenKind, what: &str) -> Result<Pos, ParseError> {
    match cur.next() {
        Some(t) if t.kind == *kind => Ok(t.pos),
        Some(t) => Err(ParseError::new(
            t.pos,
            format!("expected {what}, found {}", t.kind.describe()),
        )),
        None => Err(ParseError::new(cur.end_pos(), format!("expected {what}"))),
    }
}

fn parse_type(cur: &mut Cursor) -> Result<SimpleType, ParseError> {
    let head = match cur.next() {
        Some(Token { kind: TokenKind::Ident(n), .. }) => SimpleType::base(n.clone()),
        Some(Token { kind: TokenKind::LParen, .. }) => {
            let inner = parse_type(cur)?;
            expect_kind(cur, &TokenKind::RParen, "`)`")?;
            inner
        }
        Some(t) => {
            return Err(ParseError::new(
                t.pos,
                format!("expected a type, found {}", t.kind.describe()),
            ))
        }
        None => return Err(ParseError::new(cur.end_pos(), "expected a type")),
    };
    if matches!(cur.peek(), Some(t) if t.kind == TokenKind::FatArrow) {
        cur.next();
        let rest = parse_type(cur)?;
        Ok(SimpleType::arrow(head, rest))
    } else {
        Ok(head)
    }
}

fn parse_declaration(cur: &mut Cursor) -> Result<TypeDeclaration, ParseError> {
    if matches!(cur.peek(), Some(t) if t.kind == TokenKind::LBracket) {
        cur.next();
        let mut inputs = vec![parse_type(cur)?];
        while matches!(cur.peek(), Some(t) if t.kind == TokenKind::Star) {
            cur.next();
            inputs.push(parse_type(cur)?);
        }
        expect_kind(cur, &TokenKind::RBracket, "`]`")?;
        expect_kind(cur, &TokenKind::FatArrow, "`=>`")?;
        let output = parse_type(cur)?;
        Ok(TypeDeclaration { inputs, output })
    } else {
        let output = parse_type(cur)?;
        Ok(TypeDeclaration { inputs: Vec::new(), output })
    }
}

struct TermParser<'a> {
    cur: Cursor<'a>,
    signature: &'a Signature,
    vars: &'a BTreeMap<String, SimpleType>,
    binders: Vec<(String, SimpleType)>,
}

impl<'a> TermParser<'a> {
    fn parse_term(&mut self) -> Result<Term, ParseError> {
        if matches!(self.cur.peek(), Some(t) if t.kind == TokenKind::Backslash) {
            return self.parse_lambda();
        }
        let mut acc = match self.parse_atom()? {
            Some(t) => t,
            None => {
                let pos = self
                    .cur
                    .peek()
                    .map(|t| t.pos)
                    .unwrap_or_else(|| self.cur.end_pos());
                return Err(ParseError::new(pos, "expected a term"));
            }
        };
        loop {
            if matches!(self.cur.peek(), Some(t) if t.kind == TokenKind::Backslash) {
                let arg = self.parse_lambda()?;
                acc = Term::app(acc, arg);
                break;
            }
            match self.parse_atom()? {
                Some(arg) => acc = Term::app(acc, arg),
                None => break,
            }
        }
        Ok(acc)
    }

    fn parse_lambda(&mut self) -> Result<Term, ParseError> {
        expect_kind(&mut self.cur, &TokenKind::Backslash, "`\\`")?;
        let (name, _) = expect_ident(&mut self.cur, "a binder name")?;
        expect_kind(&mut self.cur, &TokenKind::Colon, "`:`")?;
        let ty = parse_type(&mut self.cur)?;
        expect_kind(&mut self.cur, &TokenKind::Dot, "`.`")?;
        self.binders.push((name.clone(), ty.clone()));
        let body = self.parse_term()?;
        self.binders.pop();
        Ok(Term::abs(name, ty, body))
    }

    /// Parses one application atom; `None` when the next token cannot start
    /// one.
    fn parse_atom(&mut self) -> Result<Option<Term>, ParseError> {
        let tok = match self.cur.peek() {
            Some(t) => t,
            None => return Ok(None),
        };
        match &tok.kind {
            TokenKind::LParen => {
                self.cur.next();
                let inner = self.parse_term()?;
                expect_kind(&mut self.cur, &TokenKind::RParen, "`)`")?;
                Ok(Some(inner))
            }
            TokenKind::Ident(name) => {
                let pos = tok.pos;
                let name = name.clone();
                self.cur.next();
                if let Some((_, ty)) =
                    self.binders.iter().rev().find(|(b, _)| *b == name)
                {
                    return Ok(Some(Term::var(name, ty.clone())));
                }
                if let Some(ty) = self.vars.get(&name) {
                    return Ok(Some(Term::var(name, ty.clone())));
                }
                if let Some(decl) = self.signature.declaration(&name) {
                    let arity = decl.arity();
                    if arity == 0 {
                        return Ok(Some(Term::funapp(name, Vec::new())));
                    }
                    if !matches!(self.cur.peek(), Some(t) if t.kind == TokenKind::LParen)
                    {
                        return Err(ParseError::new(
                            pos,
                            format!(
                                "symbol `{name}` takes {arity} argument(s) and must \
                                 be written `{name}(...)`"
                            ),
                        ));
                    }
                    self.cur.next();
                    let mut args = vec![self.parse_term()?];
                    while matches!(self.cur.peek(), Some(t) if t.kind == TokenKind::Comma)
                    {
                        self.cur.next();
                        args.push(self.parse_term()?);
                    }
                    expect_kind(&mut self.cur, &TokenKind::RParen, "`)` or `,`")?;
                    if args.len() != arity {
                        return Err(ParseError::new(
                            pos,
                            format!(
                                "symbol `{name}` takes {arity} argument(s), found {}",
                                args.len()
                            ),
                        ));
                    }
                    return Ok(Some(Term::funapp(name, args)));
                }
                Err(ParseError::new(
                    pos,
                    format!("unknown name `{name}` (not a declared symbol or variable)"),
                ))
            }
            _ => Ok(None),
        }
    }
}

fn parse_entry_term(
    tokens: &[Token],
    split: usize,
    raw: &RawProblem,
) -> Result<(Term, Pos), ParseError> {
    let pos = tokens[0].pos;
    let mut parser = TermParser {
        cur: Cursor { tokens: &tokens[..split], i: 0 },
        signature: &raw.signature,
        vars: &raw.vars,
        binders: Vec::new(),
    };
    let term = parser.parse_term()?;
    if let Some(extra) = parser.cur.peek() {
        return Err(ParseError::new(
            extra.pos,
            format!("unexpected {} after term", extra.kind.describe()),
        ));
    }
    Ok((term, pos))
}

fn parse_raw(text: &str) -> Result<RawProblem, ParseError> {
    let tokens = lex(text)?;
    let mut cur = Cursor { tokens: &tokens, i: 0 };
    let mut raw = RawProblem::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    while let Some(tok) = cur.peek() {
        let name = match section_name(tok) {
            Some(n) => n.to_string(),
            None => {
                return Err(ParseError::new(
                    tok.pos,
                    format!(
                        "expected a section keyword ({}), found {}",
                        SECTION_NAMES.join(", "),
                        tok.kind.describe()
                    ),
                ))
            }
        };
        let header_pos = tok.pos;
        if !seen.insert(name.clone()) {
            return Err(ParseError::new(
                header_pos,
                format!("duplicate section `{name}`"),
            ));
        }
        cur.next();
        match name.as_str() {
            "SETTING" => {
                let (value, pos) = expect_ident(&mut cur, "a setting name")?;
                let setting = value
                    .parse::<Setting>()
                    .map_err(|e| ParseError::new(pos, e))?;
                raw.setting = Some(setting);
            }
            "SORTS" => {
                while !cur.at_section() {
                    match cur.next() {
                        Some(Token { kind: TokenKind::Ident(n), pos }) => {
                            if !raw.signature.base_types.insert(n.clone()) {
                                return Err(ParseError::new(
                                    *pos,
                                    format!("duplicate sort `{n}`"),
                                ));
                            }
                        }
                        Some(t) => {
                            return Err(ParseError::new(
                                t.pos,
                                format!("expected a sort name, found {}", t.kind.describe()),
                            ))
                        }
                        None => break,
                    }
                }
            }
            "SIG" => {
                while !cur.at_section() && cur.peek().is_some() {
                    let line = cur.take_line();
                    let mut lc = Cursor { tokens: line, i: 0 };
                    let subterm =
                        if matches!(lc.peek(), Some(t) if t.kind == TokenKind::Bang) {
                            lc.next();
                            true
                        } else {
                            false
                        };
                    let (sym, pos) = expect_ident(&mut lc, "a symbol name")?;
                    expect_kind(&mut lc, &TokenKind::Colon, "`:`")?;
                    let decl = parse_declaration(&mut lc)?;
                    if let Some(extra) = lc.peek() {
                        return Err(ParseError::new(
                            extra.pos,
                            format!(
                                "unexpected {} after declaration",
                                extra.kind.describe()
                            ),
                        ));
                    }
                    if raw.signature.symbols.contains_key(&sym) {
                        return Err(ParseError::new(
                            pos,
                            format!("duplicate symbol `{sym}`"),
                        ));
                    }
                    raw.signature.add_symbol(sym.clone(), decl);
                    raw.sym_pos.insert(sym.clone(), pos);
                    if subterm {
                        raw.subterm_constants.insert(sym);
                    }
                }
            }
            "VARS" => {
                while !cur.at_section() && cur.peek().is_some() {
                    let line = cur.take_line();
                    let mut lc = Cursor { tokens: line, i: 0 };
                    let (name, pos) = expect_ident(&mut lc, "a variable name")?;
                    expect_kind(&mut lc, &TokenKind::Colon, "`:`")?;
                    let ty = parse_type(&mut lc)?;
                    if let Some(extra) = lc.peek() {
                        return Err(ParseError::new(
                            extra.pos,
                            format!(
                                "unexpected {} after declaration",
                                extra.kind.describe()
                            ),
                        ));
                    }
                    if raw.vars.contains_key(&name) {
                        return Err(ParseError::new(
                            pos,
                            format!("duplicate variable `{name}`"),
                        ));
                    }
                    if raw.signature.symbols.contains_key(&name) {
                        return Err(ParseError::new(
                            pos,
                            format!("`{name}` is already a function symbol"),
                        ));
                    }
                    raw.vars.insert(name, ty);
                }
            }
            "RULES" => {
                raw.has_rules_section = true;
                while !cur.at_section() && cur.peek().is_some() {
                    let line = cur.take_line();
                    let split = line
                        .iter()
                        .position(|t| t.kind == TokenKind::RuleArrow)
                        .ok_or_else(|| {
                            ParseError::new(
                                line[0].pos,
                                "expected `->` in rule (each rule must fit on one line)",
                            )
                        })?;
                    let (lhs, pos) = parse_entry_term(line, split, &raw)?;
                    let (rhs, _) = parse_entry_term(&line[split + 1..], line.len() - split - 1, &raw)?;
                    raw.rules.push((Rule { lhs, rhs }, pos));
                }
            }
            "CONSTRAINTS" => {
                raw.has_constraints_section = true;
                while !cur.at_section() && cur.peek().is_some() {
                    let line = cur.take_line();
                    let split = line.iter().position(|t| {
                        matches!(
                            t.kind,
                            TokenKind::Strict | TokenKind::Weak | TokenKind::Oriented
                        )
                    });
                    let split = split.ok_or_else(|| {
                        ParseError::new(
                            line[0].pos,
                            "expected `>`, `>=`, or `>?` in constraint (each \
                             constraint must fit on one line)",
                        )
                    })?;
                    let relation = match line[split].kind {
                        TokenKind::Strict => Relation::Strict,
                        TokenKind::Weak => Relation::Weak,
                        TokenKind::Oriented => Relation::Oriented,
                        _ => unreachable!(),
                    };
                    let (lhs, pos) = parse_entry_term(line, split, &raw)?;
                    let (rhs, _) = parse_entry_term(&line[split + 1..], line.len() - split - 1, &raw)?;
                    raw.requirements
                        .push((OrderRequirement { lhs, rhs, relation }, pos));
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(raw)
}

fn typecheck_pair(
    lhs: &Term,
    rhs: &Term,
    sig: &Signature,
    pos: Pos,
    what: &str,
) -> Result<(), ParseError> {
    let lt = term::type_of(lhs, sig)
        .map_err(|e| ParseError::new(pos, format!("left side of {what}: {e}")))?;
    let rt = term::type_of(rhs, sig)
        .map_err(|e| ParseError::new(pos, format!("right side of {what}: {e}")))?;
    if lt != rt {
        return Err(ParseError::new(
            pos,
            format!("{what} relates a term of type {lt} to a term of type {rt}"),
        ));
    }
    Ok(())
}

fn violation_error(raw: &RawProblem, violation: &Violation) -> ParseError {
    let pos = match violation {
        Violation::NotSecondOrder { symbol, .. }
        | Violation::UndeclaredSort { symbol, .. } => raw
            .sym_pos
            .get(symbol)
            .copied()
            .unwrap_or(Pos { line: 1, col: 1 }),
        Violation::NamespaceClash { rule, .. }
        | Violation::ConflictingVariable { rule, .. }
        | Violation::IllTyped { rule, .. }
        | Violation::SidesDiffer { rule, .. }
        | Violation::FreshRhsVariable { rule, .. }
        | Violation::IllFormedLhs { rule, .. }
        | Violation::AppliedVariable { rule, .. }
        | Violation::BetaRedex { rule, .. } => raw
            .rules
            .get(*rule)
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 1, col: 1 }),
    };
    ParseError::new(pos, violation.to_string())
}

/// Parses a plain rewrite system: `SORTS`, `SIG`, `VARS`, `RULES`. The
/// result is fully validated.
pub fn parse_afs(text: &str) -> Result<Afs, ParseError> {
    let raw = parse_raw(text)?;
    if raw.has_constraints_section {
        return Err(ParseError::new(
            Pos { line: 1, col: 1 },
            "a rewrite system must not have a CONSTRAINTS section",
        ));
    }
    if let Some(setting) = raw.setting {
        if setting != Setting::RuleRemoval {
            return Err(ParseError::new(
                Pos { line: 1, col: 1 },
                format!("setting `{setting}` needs a CONSTRAINTS section, not RULES"),
            ));
        }
    }
    if !raw.subterm_constants.is_empty() {
        let name = raw.subterm_constants.iter().next().unwrap();
        let pos = raw.sym_pos.get(name).copied().unwrap_or(Pos { line: 1, col: 1 });
        return Err(ParseError::new(
            pos,
            "subterm constants are only allowed in the dynamic dependency-pair setting",
        ));
    }
    let afs = Afs {
        signature: raw.signature.clone(),
        rules: raw.rules.iter().map(|(r, _)| r.clone()).collect(),
    };
    let report = term::validate(&afs);
    if let Some(v) = report.violations.first() {
        let mut err = violation_error(&raw, v);
        if report.violations.len() > 1 {
            err.message = report
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
        }
        return Err(err);
    }
    Ok(afs)
}

/// Parses an ordering problem: a signature plus a `CONSTRAINTS` section,
/// with an optional `SETTING` (rule removal by default).
pub fn parse_constraint_problem(text: &str) -> Result<ConstraintProblem, ParseError> {
    let raw = parse_raw(text)?;
    if raw.has_rules_section {
        return Err(ParseError::new(
            Pos { line: 1, col: 1 },
            "an ordering problem must use CONSTRAINTS, not RULES",
        ));
    }
    if !raw.has_constraints_section {
        return Err(ParseError::new(
            Pos { line: 1, col: 1 },
            "missing CONSTRAINTS section",
        ));
    }
    let setting = raw.setting.unwrap_or(Setting::RuleRemoval);
    if !raw.subterm_constants.is_empty() && setting != Setting::DynamicDp {
        let name = raw.subterm_constants.iter().next().unwrap();
        let pos = raw.sym_pos.get(name).copied().unwrap_or(Pos { line: 1, col: 1 });
        return Err(ParseError::new(
            pos,
            "subterm constants are only allowed in the dynamic dependency-pair setting",
        ));
    }
    for (sym, decl) in &raw.signature.symbols {
        let order = decl.order();
        if order > 2 {
            let pos = raw.sym_pos.get(sym).copied().unwrap_or(Pos { line: 1, col: 1 });
            return Err(ParseError::new(
                pos,
                format!("symbol `{sym}` has order {order}, at most 2 is supported"),
            ));
        }
        let mut sorts = decl.output.sorts();
        for input in &decl.inputs {
            sorts.extend(input.sorts());
        }
        for sort in &sorts {
            if !raw.signature.base_types.contains(sort) {
                let pos =
                    raw.sym_pos.get(sym).copied().unwrap_or(Pos { line: 1, col: 1 });
                return Err(ParseError::new(
                    pos,
                    format!("symbol `{sym}` uses undeclared sort `{sort}`"),
                ));
            }
        }
    }
    for (req, pos) in &raw.requirements {
        if req.relation == Relation::Oriented && !setting.is_dp() {
            return Err(ParseError::new(
                *pos,
                "`>?` constraints need a dependency-pair setting",
            ));
        }
        typecheck_pair(&req.lhs, &req.rhs, &raw.signature, *pos, "constraint")?;
        for c in &raw.subterm_constants {
            if term_mentions_symbol(&req.lhs, c) {
                return Err(ParseError::new(
                    *pos,
                    format!("subterm constant `{c}` may only appear on the right"),
                ));
            }
        }
    }
    Ok(ConstraintProblem {
        setting,
        signature: raw.signature,
        requirements: raw.requirements.into_iter().map(|(r, _)| r).collect(),
        subterm_constants: raw.subterm_constants,
    })
}

fn term_mentions_symbol(term: &Term, symbol: &str) -> bool {
    match term {
        Term::Var(..) | Term::Bound(_) => false,
        Term::App(f, a) => {
            term_mentions_symbol(f, symbol) || term_mentions_symbol(a, symbol)
        }
        Term::Abs(_, _, body) => term_mentions_symbol(body, symbol),
        Term::FunApp(f, args) => {
            f == symbol || args.iter().any(|a| term_mentions_symbol(a, symbol))
        }
    }
}

/// Parses either kind of input, deciding by the sections present.
pub fn parse_input(text: &str) -> Result<Input, ParseError> {
    let raw = parse_raw(text)?;
    let is_problem = raw.has_constraints_section
        || raw.setting.map_or(false, |s| s.is_dp());
    if is_problem {
        parse_constraint_problem(text).map(Input::Problem)
    } else {
        parse_afs(text).map(Input::System)
    }
}

fn print_signature(out: &mut String, sig: &Signature, subterm: &BTreeSet<String>) {
    out.push_str("SORTS\n");
    for sort in &sig.base_types {
        out.push_str("  ");
        out.push_str(sort);
        out.push('\n');
    }
    out.push_str("\nSIG\n");
    for (name, decl) in &sig.symbols {
        out.push_str("  ");
        if subterm.contains(name) {
            out.push('!');
        }
        out.push_str(name);
        out.push_str(" : ");
        out.push_str(&decl.to_string());
        out.push('\n');
    }
}

fn print_vars(out: &mut String, vars: &BTreeMap<String, SimpleType>) {
    if vars.is_empty() {
        return;
    }
    out.push_str("\nVARS\n");
    for (name, ty) in vars {
        out.push_str("  ");
        out.push_str(name);
        out.push_str(" : ");
        out.push_str(&ty.to_string());
        out.push('\n');
    }
}

fn collect_vars(pairs: &[(&Term, &Term)]) -> BTreeMap<String, SimpleType> {
    let mut vars = BTreeMap::new();
    for (lhs, rhs) in pairs {
        vars.extend(lhs.free_vars());
        vars.extend(rhs.free_vars());
    }
    vars
}

/// Renders a rewrite system in the input format; `parse_afs` accepts the
/// result and yields back an equal system.
pub fn print_afs(afs: &Afs) -> String {
    let mut out = String::new();
    print_signature(&mut out, &afs.signature, &BTreeSet::new());
    let pairs: Vec<(&Term, &Term)> =
        afs.rules.iter().map(|r| (&r.lhs, &r.rhs)).collect();
    print_vars(&mut out, &collect_vars(&pairs));
    out.push_str("\nRULES\n");
    for rule in &afs.rules {
        out.push_str(&format!("  {} -> {}\n", rule.lhs, rule.rhs));
    }
    out
}

/// Renders an ordering problem in the input format; `parse_constraint_problem`
/// accepts the result and yields back an equal problem.
pub fn print_problem(problem: &ConstraintProblem) -> String {
    let mut out = String::new();
    out.push_str(&format!("SETTING\n  {}\n\n", problem.setting));
    print_signature(&mut out, &problem.signature, &problem.subterm_constants);
    let pairs: Vec<(&Term, &Term)> = problem
        .requirements
        .iter()
        .map(|r| (&r.lhs, &r.rhs))
        .collect();
    print_vars(&mut out, &collect_vars(&pairs));
    out.push_str("\nCONSTRAINTS\n");
    for req in &problem.requirements {
        out.push_str(&format!(
            "  {} {} {}\n",
            req.lhs,
            req.relation.symbol(),
            req.rhs
        ));
    }
    out
}
