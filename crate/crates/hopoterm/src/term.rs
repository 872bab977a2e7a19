//! Simply-typed terms over a first-class signature.
//!
//! Terms mix named free variables with de Bruijn indices for bound
//! variables, so term equality is alpha-equivalence for free. Binders keep
//! a display hint that equality ignores. Function symbols carry a fixed
//! arity and are always fully applied at their `FunApp` node; application
//! of functional values is a separate `App` node.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// A simple type: a base sort or an arrow between simple types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimpleType {
    Base(String),
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn base(name: impl Into<String>) -> Self {
        SimpleType::Base(name.into())
    }

    pub fn arrow(from: SimpleType, to: SimpleType) -> Self {
        SimpleType::Arrow(Box::new(from), Box::new(to))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, SimpleType::Base(_))
    }

    /// Order of the type: base sorts have order 0, an arrow has the order
    /// max(order(from) + 1, order(to)).
    pub fn order(&self) -> usize {
        match self {
            SimpleType::Base(_) => 0,
            SimpleType::Arrow(from, to) => (from.order() + 1).max(to.order()),
        }
    }

    /// Splits `s1 => ... => sk => out` into (`[s1..sk]`, `out`) with `out` a
    /// base sort.
    pub fn uncurry(&self) -> (Vec<&SimpleType>, &SimpleType) {
        let mut args = Vec::new();
        let mut cur = self;
        while let SimpleType::Arrow(from, to) = cur {
            args.push(from.as_ref());
            cur = to.as_ref();
        }
        (args, cur)
    }

    /// All base sort names mentioned in the type.
    pub fn sorts(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_sorts(&mut out);
        out
    }

    fn collect_sorts(&self, out: &mut BTreeSet<String>) {
        match self {
            SimpleType::Base(name) => {
                out.insert(name.clone());
            }
            SimpleType::Arrow(from, to) => {
                from.collect_sorts(out);
                to.collect_sorts(out);
            }
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base(name) => write!(f, "{name}"),
            SimpleType::Arrow(from, to) => {
                match from.as_ref() {
                    SimpleType::Base(b) => write!(f, "{b}")?,
                    arrow => write!(f, "({arrow})")?,
                }
                write!(f, " => {to}")
            }
        }
    }
}

/// Type of a function symbol: input types inside the brackets plus an
/// output type that may itself be an arrow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDeclaration {
    pub inputs: Vec<SimpleType>,
    pub output: SimpleType,
}

impl TypeDeclaration {
    pub fn new(inputs: Vec<SimpleType>, output: SimpleType) -> Self {
        TypeDeclaration { inputs, output }
    }

    pub fn constant(output: SimpleType) -> Self {
        TypeDeclaration { inputs: Vec::new(), output }
    }

    /// Number of arguments the symbol takes at its `FunApp` node.
    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Order of the declaration: max over the inputs' orders plus one, and
    /// the output's order.
    pub fn order(&self) -> usize {
        let from_inputs = self.inputs.iter().map(|t| t.order() + 1).max().unwrap_or(0);
        from_inputs.max(self.output.order())
    }

    /// Input types followed by the uncurried output arrow: the full list of
    /// argument positions a symbol interpretation binds.
    pub fn extended_inputs(&self) -> Vec<SimpleType> {
        let mut all = self.inputs.clone();
        let (extra, _) = self.output.uncurry();
        all.extend(extra.into_iter().cloned());
        all
    }

    /// Base sort reached after consuming every argument position.
    pub fn final_output(&self) -> &SimpleType {
        self.output.uncurry().1
    }
}

impl fmt::Display for TypeDeclaration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inputs.is_empty() {
            return write!(f, "{}", self.output);
        }
        write!(f, "[")?;
        for (i, ty) in self.inputs.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "{ty}")?;
        }
        write!(f, "] => {}", self.output)
    }
}

/// A term. `Var` is a named free variable carrying its type; `Bound` is a
/// de Bruijn index pointing at an enclosing `Abs`. `FunApp` applies a
/// function symbol to exactly its declared arity; further arguments go
/// through `App`.
#[derive(Debug, Clone)]
pub enum Term {
    Var(String, SimpleType),
    Bound(usize),
    App(Box<Term>, Box<Term>),
    Abs(String, SimpleType, Box<Term>),
    FunApp(String, Vec<Term>),
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Var(a, ta), Term::Var(b, tb)) => a == b && ta == tb,
            (Term::Bound(a), Term::Bound(b)) => a == b,
            (Term::App(f, a), Term::App(g, b)) => f == g && a == b,
            // binder hints are display-only; equality is alpha-equivalence
            (Term::Abs(_, ta, ba), Term::Abs(_, tb, bb)) => ta == tb && ba == bb,
            (Term::FunApp(f, xs), Term::FunApp(g, ys)) => f == g && xs == ys,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Term {
    pub fn var(name: impl Into<String>, ty: SimpleType) -> Self {
        Term::Var(name.into(), ty)
    }

    pub fn app(fun: Term, arg: Term) -> Self {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn funapp(symbol: impl Into<String>, args: Vec<Term>) -> Self {
        Term::FunApp(symbol.into(), args)
    }

    /// Builds an abstraction binding every free occurrence of `name` in
    /// `body`.
    pub fn abs(name: impl Into<String>, ty: SimpleType, body: Term) -> Self {
        let name = name.into();
        let bound = body.bind(&name, 0);
        Term::Abs(name, ty, Box::new(bound))
    }

    fn bind(&self, name: &str, depth: usize) -> Term {
        match self {
            Term::Var(n, _) if n == name => Term::Bound(depth),
            Term::Var(..) | Term::Bound(_) => self.clone(),
            Term::App(f, a) => Term::app(f.bind(name, depth), a.bind(name, depth)),
            Term::Abs(hint, ty, body) => {
                Term::Abs(hint.clone(), ty.clone(), Box::new(body.bind(name, depth + 1)))
            }
            Term::FunApp(f, args) => {
                Term::FunApp(f.clone(), args.iter().map(|a| a.bind(name, depth)).collect())
            }
        }
    }

    /// Replaces `Bound(depth)` by `value` inside an abstraction body.
    pub fn open(&self, value: &Term) -> Term {
        self.open_at(0, value)
    }

    fn open_at(&self, depth: usize, value: &Term) -> Term {
        match self {
            Term::Bound(i) if *i == depth => value.clone(),
            Term::Var(..) | Term::Bound(_) => self.clone(),
            Term::App(f, a) => Term::app(f.open_at(depth, value), a.open_at(depth, value)),
            Term::Abs(hint, ty, body) => Term::Abs(
                hint.clone(),
                ty.clone(),
                Box::new(body.open_at(depth + 1, value)),
            ),
            Term::FunApp(f, args) => Term::FunApp(
                f.clone(),
                args.iter().map(|a| a.open_at(depth, value)).collect(),
            ),
        }
    }

    /// Named free variables with their annotated types. With conflicting
    /// annotations the first one encountered wins; `validate` reports the
    /// conflict.
    pub fn free_vars(&self) -> BTreeMap<String, SimpleType> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeMap<String, SimpleType>) {
        match self {
            Term::Var(n, ty) => {
                out.entry(n.clone()).or_insert_with(|| ty.clone());
            }
            Term::Bound(_) => {}
            Term::App(f, a) => {
                f.collect_free(out);
                a.collect_free(out);
            }
            Term::Abs(_, _, body) => body.collect_free(out),
            Term::FunApp(_, args) => {
                for a in args {
                    a.collect_free(out);
                }
            }
        }
    }

    /// True when some subterm is a beta redex `(\x. s) t`.
    pub fn has_beta_redex(&self) -> bool {
        match self {
            Term::Var(..) | Term::Bound(_) => false,
            Term::App(f, a) => {
                matches!(f.as_ref(), Term::Abs(..)) || f.has_beta_redex() || a.has_beta_redex()
            }
            Term::Abs(_, _, body) => body.has_beta_redex(),
            Term::FunApp(_, args) => args.iter().any(|a| a.has_beta_redex()),
        }
    }

    /// Peels applications: `f(s1..sn) t1 ... tk` gives the head and
    /// `[t1..tk]` left to right.
    pub fn strip_apps(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f.as_ref();
        }
        args.reverse();
        (cur, args)
    }
}

fn freshen(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut candidate = format!("{base}'");
    while used.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

struct TermPrinter<'a> {
    binders: Vec<String>,
    used: BTreeSet<String>,
    out: &'a mut String,
}

impl<'a> TermPrinter<'a> {
    fn print(&mut self, term: &Term, arg_position: bool) {
        match term {
            Term::Var(n, _) => self.out.push_str(n),
            Term::Bound(i) => {
                let name = self
                    .binders
                    .get(self.binders.len().wrapping_sub(i + 1))
                    .cloned()
                    .unwrap_or_else(|| format!("_{i}"));
                self.out.push_str(&name);
            }
            Term::App(..) => {
                if arg_position {
                    self.out.push('(');
                }
                let (head, args) = term.strip_apps();
                self.print(head, true);
                for a in args {
                    self.out.push(' ');
                    self.print(a, true);
                }
                if arg_position {
                    self.out.push(')');
                }
            }
            Term::Abs(hint, ty, body) => {
                if arg_position {
                    self.out.push('(');
                }
                let name = freshen(hint, &self.used);
                self.out.push('\\');
                self.out.push_str(&name);
                self.out.push_str(&format!(":{ty}. "));
                self.used.insert(name.clone());
                self.binders.push(name.clone());
                self.print(body, false);
                self.binders.pop();
                self.used.remove(&name);
                if arg_position {
                    self.out.push(')');
                }
            }
            Term::FunApp(f, args) => {
                self.out.push_str(f);
                if !args.is_empty() {
                    self.out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            self.out.push_str(", ");
                        }
                        self.print(a, false);
                    }
                    self.out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let used: BTreeSet<String> = self.free_vars().into_keys().collect();
        let mut printer = TermPrinter { binders: Vec::new(), used, out: &mut out };
        printer.print(self, false);
        write!(f, "{out}")
    }
}

/// Declared sorts and function symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub base_types: BTreeSet<String>,
    pub symbols: BTreeMap<String, TypeDeclaration>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn add_sort(&mut self, name: impl Into<String>) {
        self.base_types.insert(name.into());
    }

    pub fn add_symbol(&mut self, name: impl Into<String>, decl: TypeDeclaration) {
        self.symbols.insert(name.into(), decl);
    }

    pub fn declaration(&self, name: &str) -> Option<&TypeDeclaration> {
        self.symbols.get(name)
    }
}

/// A rewrite rule `lhs -> rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

/// An algebraic functional system: a signature plus rewrite rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Afs {
    pub signature: Signature,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    UnknownSymbol { symbol: String, context: String },
    UnknownVariable { name: String, context: String },
    ArityMismatch { symbol: String, expected: usize, found: usize, context: String },
    TypeMismatch { expected: String, found: String, context: String },
    DanglingIndex { index: usize, context: String },
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::UnknownSymbol { symbol, context } => {
                write!(f, "unknown symbol `{symbol}` in `{context}`")
            }
            TypeError::UnknownVariable { name, context } => {
                write!(f, "unknown variable `{name}` in `{context}`")
            }
            TypeError::ArityMismatch { symbol, expected, found, context } => write!(
                f,
                "symbol `{symbol}` takes {expected} argument(s), got {found} in `{context}`"
            ),
            TypeError::TypeMismatch { expected, found, context } => {
                write!(f, "expected type `{expected}`, found `{found}` in `{context}`")
            }
            TypeError::DanglingIndex { index, context } => {
                write!(f, "dangling bound variable #{index} in `{context}`")
            }
        }
    }
}

impl std::error::Error for TypeError {}

fn check(
    term: &Term,
    sig: &Signature,
    env: &HashMap<String, SimpleType>,
    stack: &mut Vec<SimpleType>,
) -> Result<SimpleType, TypeError> {
    match term {
        Term::Var(name, ty) => match env.get(name) {
            None => Err(TypeError::UnknownVariable { name: name.clone(), context: term.to_string() }),
            Some(expected) if expected == ty => Ok(ty.clone()),
            Some(expected) => Err(TypeError::TypeMismatch {
                expected: expected.to_string(),
                found: ty.to_string(),
                context: term.to_string(),
            }),
        },
        Term::Bound(i) => match stack.len().checked_sub(i + 1).and_then(|k| stack.get(k)) {
            Some(ty) => Ok(ty.clone()),
            None => Err(TypeError::DanglingIndex { index: *i, context: term.to_string() }),
        },
        Term::App(fun, arg) => {
            let fun_ty = check(fun, sig, env, stack)?;
            let arg_ty = check(arg, sig, env, stack)?;
            match fun_ty {
                SimpleType::Arrow(from, to) if *from == arg_ty => Ok(*to),
                SimpleType::Arrow(from, _) => Err(TypeError::TypeMismatch {
                    expected: from.to_string(),
                    found: arg_ty.to_string(),
                    context: term.to_string(),
                }),
                other => Err(TypeError::TypeMismatch {
                    expected: format!("{arg_ty} => _"),
                    found: other.to_string(),
                    context: term.to_string(),
                }),
            }
        }
        Term::Abs(_, ty, body) => {
            stack.push(ty.clone());
            let body_ty = check(body, sig, env, stack)?;
            stack.pop();
            Ok(SimpleType::arrow(ty.clone(), body_ty))
        }
        Term::FunApp(symbol, args) => {
            let decl = sig.declaration(symbol).ok_or_else(|| TypeError::UnknownSymbol {
                symbol: symbol.clone(),
                context: term.to_string(),
            })?;
            if decl.arity() != args.len() {
                return Err(TypeError::ArityMismatch {
                    symbol: symbol.clone(),
                    expected: decl.arity(),
                    found: args.len(),
                    context: term.to_string(),
                });
            }
            for (arg, expected) in args.iter().zip(&decl.inputs) {
                let found = check(arg, sig, env, stack)?;
                if &found != expected {
                    return Err(TypeError::TypeMismatch {
                        expected: expected.to_string(),
                        found: found.to_string(),
                        context: term.to_string(),
                    });
                }
            }
            Ok(decl.output.clone())
        }
    }
}

/// Type of `term` under `env`; every free variable must appear in `env`
/// with a matching annotation.
pub fn typecheck(
    term: &Term,
    sig: &Signature,
    env: &HashMap<String, SimpleType>,
) -> Result<SimpleType, TypeError> {
    check(term, sig, env, &mut Vec::new())
}

/// Type of `term` trusting the variable annotations it carries.
pub fn type_of(term: &Term, sig: &Signature) -> Result<SimpleType, TypeError> {
    let env: HashMap<String, SimpleType> = term.free_vars().into_iter().collect();
    check(term, sig, &env, &mut Vec::new())
}

/// Capture-avoiding substitution of free variables. Each replacement must
/// have the type the variable is annotated with.
pub fn substitute(
    term: &Term,
    subst: &BTreeMap<String, Term>,
    sig: &Signature,
) -> Result<Term, TypeError> {
    for (name, replacement) in subst {
        if let Some((_, annotated)) = term
            .free_vars()
            .into_iter()
            .find(|(n, _)| n == name)
        {
            let found = type_of(replacement, sig)?;
            if found != annotated {
                return Err(TypeError::TypeMismatch {
                    expected: annotated.to_string(),
                    found: found.to_string(),
                    context: format!("substituting `{replacement}` for `{name}`"),
                });
            }
        }
    }
    Ok(apply_subst(term, subst))
}

fn apply_subst(term: &Term, subst: &BTreeMap<String, Term>) -> Term {
    match term {
        Term::Var(name, _) => match subst.get(name) {
            Some(replacement) => replacement.clone(),
            None => term.clone(),
        },
        Term::Bound(_) => term.clone(),
        Term::App(f, a) => Term::app(apply_subst(f, subst), apply_subst(a, subst)),
        Term::Abs(hint, ty, body) => {
            Term::Abs(hint.clone(), ty.clone(), Box::new(apply_subst(body, subst)))
        }
        Term::FunApp(f, args) => {
            Term::FunApp(f.clone(), args.iter().map(|a| apply_subst(a, subst)).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotSecondOrder { symbol: String, order: usize },
    UndeclaredSort { symbol: String, sort: String },
    NamespaceClash { rule: usize, name: String },
    ConflictingVariable { rule: usize, name: String },
    IllTyped { rule: usize, error: TypeError },
    SidesDiffer { rule: usize, lhs: String, rhs: String },
    FreshRhsVariable { rule: usize, name: String },
    IllFormedLhs { rule: usize, detail: String },
    AppliedVariable { rule: usize, name: String },
    BetaRedex { rule: usize, side: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSecondOrder { symbol, order } => {
                write!(f, "symbol `{symbol}` has order {order}, at most 2 is supported")
            }
            Violation::UndeclaredSort { symbol, sort } => {
                write!(f, "symbol `{symbol}` uses undeclared sort `{sort}`")
            }
            Violation::NamespaceClash { rule, name } => {
                write!(f, "rule {}: `{name}` is both a variable and a symbol", rule + 1)
            }
            Violation::ConflictingVariable { rule, name } => {
                write!(f, "rule {}: variable `{name}` used at two different types", rule + 1)
            }
            Violation::IllTyped { rule, error } => write!(f, "rule {}: {error}", rule + 1),
            Violation::SidesDiffer { rule, lhs, rhs } => {
                write!(f, "rule {}: left side has type {lhs}, right side {rhs}", rule + 1)
            }
            Violation::FreshRhsVariable { rule, name } => {
                write!(f, "rule {}: variable `{name}` occurs only on the right side", rule + 1)
            }
            Violation::IllFormedLhs { rule, detail } => {
                write!(f, "rule {}: left side is not a symbol pattern: {detail}", rule + 1)
            }
            Violation::AppliedVariable { rule, name } => {
                write!(f, "rule {}: left side applies the free variable `{name}`", rule + 1)
            }
            Violation::BetaRedex { rule, side } => {
                write!(f, "rule {}: {side} side contains a beta redex", rule + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn collect_applied_vars(term: &Term, out: &mut BTreeSet<String>) {
    match term {
        Term::Var(..) | Term::Bound(_) => {}
        Term::App(f, a) => {
            if let Term::Var(name, _) = f.as_ref() {
                out.insert(name.clone());
            }
            collect_applied_vars(f, out);
            collect_applied_vars(a, out);
        }
        Term::Abs(_, _, body) => collect_applied_vars(body, out),
        Term::FunApp(_, args) => {
            for a in args {
                collect_applied_vars(a, out);
            }
        }
    }
}

fn conflicting_vars(terms: &[&Term]) -> (HashMap<String, SimpleType>, BTreeSet<String>) {
    let mut env: HashMap<String, SimpleType> = HashMap::new();
    let mut conflicts = BTreeSet::new();
    fn walk(
        term: &Term,
        env: &mut HashMap<String, SimpleType>,
        conflicts: &mut BTreeSet<String>,
    ) {
        match term {
            Term::Var(name, ty) => match env.get(name) {
                None => {
                    env.insert(name.clone(), ty.clone());
                }
                Some(prev) if prev != ty => {
                    conflicts.insert(name.clone());
                }
                Some(_) => {}
            },
            Term::Bound(_) => {}
            Term::App(f, a) => {
                walk(f, env, conflicts);
                walk(a, env, conflicts);
            }
            Term::Abs(_, _, body) => walk(body, env, conflicts),
            Term::FunApp(_, args) => {
                for a in args {
                    walk(a, env, conflicts);
                }
            }
        }
    }
    for t in terms {
        walk(t, &mut env, &mut conflicts);
    }
    (env, conflicts)
}

/// Checks every rule and declaration, reporting all violations instead of
/// stopping at the first.
pub fn validate(afs: &Afs) -> ValidationReport {
    let mut report = ValidationReport::default();
    let sig = &afs.signature;

    for (name, decl) in &sig.symbols {
        let order = decl.order();
        if order > 2 {
            report
                .violations
                .push(Violation::NotSecondOrder { symbol: name.clone(), order });
        }
        let mut sorts = BTreeSet::new();
        for input in &decl.inputs {
            sorts.extend(input.sorts());
        }
        sorts.extend(decl.output.sorts());
        for sort in sorts {
            if !sig.base_types.contains(&sort) {
                report
                    .violations
                    .push(Violation::UndeclaredSort { symbol: name.clone(), sort });
            }
        }
    }

    for (index, rule) in afs.rules.iter().enumerate() {
        let (env, conflicts) = conflicting_vars(&[&rule.lhs, &rule.rhs]);
        for name in conflicts {
            report
                .violations
                .push(Violation::ConflictingVariable { rule: index, name });
        }
        for name in env.keys() {
            if sig.symbols.contains_key(name) {
                report
                    .violations
                    .push(Violation::NamespaceClash { rule: index, name: name.clone() });
            }
        }

        let lhs_ty = match typecheck(&rule.lhs, sig, &env) {
            Ok(ty) => Some(ty),
            Err(error) => {
                report.violations.push(Violation::IllTyped { rule: index, error });
                None
            }
        };
        let rhs_ty = match typecheck(&rule.rhs, sig, &env) {
            Ok(ty) => Some(ty),
            Err(error) => {
                report.violations.push(Violation::IllTyped { rule: index, error });
                None
            }
        };
        if let (Some(l), Some(r)) = (&lhs_ty, &rhs_ty) {
            if l != r {
                report.violations.push(Violation::SidesDiffer {
                    rule: index,
                    lhs: l.to_string(),
                    rhs: r.to_string(),
                });
            }
        }

        let lhs_vars = rule.lhs.free_vars();
        for name in rule.rhs.free_vars().keys() {
            if !lhs_vars.contains_key(name) {
                report
                    .violations
                    .push(Violation::FreshRhsVariable { rule: index, name: name.clone() });
            }
        }

        let (head, _) = rule.lhs.strip_apps();
        if !matches!(head, Term::FunApp(..)) {
            report.violations.push(Violation::IllFormedLhs {
                rule: index,
                detail: format!("head `{head}` is not a function symbol"),
            });
        }
        let mut applied = BTreeSet::new();
        collect_applied_vars(&rule.lhs, &mut applied);
        for name in applied {
            report
                .violations
                .push(Violation::AppliedVariable { rule: index, name });
        }

        if rule.lhs.has_beta_redex() {
            report
                .violations
                .push(Violation::BetaRedex { rule: index, side: "left".into() });
        }
        if rule.rhs.has_beta_redex() {
            report
                .violations
                .push(Violation::BetaRedex { rule: index, side: "right".into() });
        }
    }

    report
}
