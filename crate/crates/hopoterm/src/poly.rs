//! Polynomials over the naturals with unknown coefficients.
//!
//! A polynomial is a sum of monomials `c * a1*..*ak * t1*..*tm` where the
//! `ai` are parameters (unknowns the solver assigns) and the `ti` are atoms:
//! term variables, applications `F(p1,..,pk)` of a functional variable, or
//! binary `max(p, q)`. Polynomials are kept in canonical form at all times:
//! monomials sorted, like terms merged, zero monomials dropped. `LambdaPoly`
//! adds a binder list on top, giving weakly monotonic functions by
//! construction since no subtraction exists.
//!
//! Coefficient arithmetic is checked; an overflow aborts with a panic
//! rather than wrapping silently, since a wrapped coefficient would make
//! the whole proof unsound.

use crate::term::SimpleType;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub type Nat = u64;

pub fn nat_add(a: Nat, b: Nat) -> Nat {
    a.checked_add(b)
        .unwrap_or_else(|| panic!("natural overflow in {a} + {b}"))
}

pub fn nat_mul(a: Nat, b: Nat) -> Nat {
    a.checked_mul(b)
        .unwrap_or_else(|| panic!("natural overflow in {a} * {b}"))
}

pub fn nat_pow(a: Nat, exp: u32) -> Nat {
    a.checked_pow(exp)
        .unwrap_or_else(|| panic!("natural overflow in {a}^{exp}"))
}

/// What a parameter stands for, which also fixes its search bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamKind {
    /// Shape coefficient, searched in `0..=max_coefficient`.
    Coefficient,
    /// 0/1 marker deciding whether a constraint is strict.
    StrictnessBit,
    /// Fresh unknown introduced while splitting function applications.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub u32);

/// Arena for parameters: owns names and kinds, hands out dense ids.
#[derive(Debug, Clone, Default)]
pub struct ParamPool {
    names: Vec<String>,
    kinds: Vec<ParamKind>,
    next_coefficient: u32,
    next_bit: u32,
    next_family: u32,
}

impl ParamPool {
    pub fn new() -> Self {
        ParamPool::default()
    }

    pub fn fresh_named(&mut self, name: impl Into<String>, kind: ParamKind) -> ParamId {
        let id = ParamId(self.names.len() as u32);
        self.names.push(name.into());
        self.kinds.push(kind);
        id
    }

    /// Next coefficient parameter, named `a1`, `a2`, ...
    pub fn fresh_coefficient(&mut self) -> ParamId {
        self.next_coefficient += 1;
        let name = format!("a{}", self.next_coefficient);
        self.fresh_named(name, ParamKind::Coefficient)
    }

    /// Next strictness bit, named `o1`, `o2`, ...
    pub fn fresh_bit(&mut self) -> ParamId {
        self.next_bit += 1;
        let name = format!("o{}", self.next_bit);
        self.fresh_named(name, ParamKind::StrictnessBit)
    }

    /// Prefix for the next family of split parameters: `e`, then `k`, then
    /// `e3`, `e4`, ...
    pub fn fresh_family(&mut self) -> String {
        self.next_family += 1;
        match self.next_family {
            1 => "e".to_string(),
            2 => "k".to_string(),
            n => format!("e{n}"),
        }
    }

    pub fn fresh_split(&mut self, family: &str, row: usize, col: usize) -> ParamId {
        self.fresh_named(format!("{family}_{{{row},{col}}}"), ParamKind::Split)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn kind(&self, id: ParamId) -> ParamKind {
        self.kinds[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        (0..self.names.len() as u32).map(ParamId)
    }

    /// Upper search bound for a parameter given the configured coefficient
    /// bound.
    pub fn bound(&self, id: ParamId, max_coefficient: Nat) -> Nat {
        match self.kind(id) {
            ParamKind::StrictnessBit => 1,
            _ => max_coefficient,
        }
    }
}

/// Argument of a functional-variable application: a plain polynomial for a
/// base-typed position or a function for a functional one. Functional
/// arguments only occur for symbols whose trailing arguments are themselves
/// functions, which second-order systems permit but rarely use.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PolyArg {
    Base(Poly),
    Fun(LambdaPoly),
}

impl PolyArg {
    pub fn into_value(self) -> Value {
        match self {
            PolyArg::Base(p) => Value::Base(p),
            PolyArg::Fun(f) => Value::Fun(f),
        }
    }

    pub fn from_value(v: Value) -> Self {
        match v {
            Value::Base(p) => PolyArg::Base(p),
            Value::Fun(f) => PolyArg::Fun(f),
        }
    }
}

/// Multiplicative factor that is not a parameter. The variant order is the
/// canonical atom order: term variables, then applications, then max.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Var(String),
    FunApp(String, Vec<PolyArg>),
    Max(Box<Poly>, Box<Poly>),
}

/// Monomial: coefficient times parameters times atoms. Field order is the
/// comparison order used to sort a polynomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    pub atoms: Vec<Atom>,
    pub params: Vec<ParamId>,
    pub coeff: Nat,
}

impl Monomial {
    pub fn new(coeff: Nat, mut params: Vec<ParamId>, mut atoms: Vec<Atom>) -> Self {
        params.sort();
        atoms.sort();
        Monomial { atoms, params, coeff }
    }

    pub fn constant(coeff: Nat) -> Self {
        Monomial::new(coeff, Vec::new(), Vec::new())
    }

    fn key(&self) -> (&[Atom], &[ParamId]) {
        (&self.atoms, &self.params)
    }

    /// True when the monomial is a product of parameters and a constant.
    pub fn is_ground(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut params = self.params.clone();
        params.extend(other.params.iter().copied());
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Monomial::new(nat_mul(self.coeff, other.coeff), params, atoms)
    }
}

/// Canonical sum of monomials.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Poly {
    monomials: Vec<Monomial>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(n: Nat) -> Self {
        Poly::from_monomials(vec![Monomial::constant(n)])
    }

    pub fn one() -> Self {
        Poly::constant(1)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Poly::atom(Atom::Var(name.into()))
    }

    pub fn param(id: ParamId) -> Self {
        Poly::from_monomials(vec![Monomial::new(1, vec![id], Vec::new())])
    }

    pub fn atom(atom: Atom) -> Self {
        Poly::from_monomials(vec![Monomial::new(1, Vec::new(), vec![atom])])
    }

    /// Binary max as a polynomial. `max(p, p)` collapses to `p` and a zero
    /// side collapses to the other side.
    pub fn max_of(left: Poly, right: Poly) -> Poly {
        if left == right || right.is_zero() {
            return left;
        }
        if left.is_zero() {
            return right;
        }
        Poly::atom(Atom::Max(Box::new(left), Box::new(right)))
    }

    /// Normalizes: sorts by monomial key, merges like terms, drops zeros.
    pub fn from_monomials(mut monomials: Vec<Monomial>) -> Poly {
        monomials.retain(|m| m.coeff != 0);
        monomials.sort();
        let mut merged: Vec<Monomial> = Vec::with_capacity(monomials.len());
        for m in monomials {
            match merged.last_mut() {
                Some(last) if last.key() == m.key() => {
                    last.coeff = nat_add(last.coeff, m.coeff);
                }
                _ => merged.push(m),
            }
        }
        merged.retain(|m| m.coeff != 0);
        Poly { monomials: merged }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn as_constant(&self) -> Option<Nat> {
        match self.monomials.as_slice() {
            [] => Some(0),
            [m] if m.params.is_empty() && m.atoms.is_empty() => Some(m.coeff),
            _ => None,
        }
    }

    /// True when no atom occurs anywhere, so the value depends only on
    /// parameters.
    pub fn is_ground(&self) -> bool {
        self.monomials.iter().all(|m| m.is_ground())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut all = self.monomials.clone();
        all.extend(other.monomials.iter().cloned());
        Poly::from_monomials(all)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut all = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                all.push(a.mul(b));
            }
        }
        Poly::from_monomials(all)
    }

    pub fn scale(&self, factor: Nat) -> Poly {
        self.mul(&Poly::constant(factor))
    }

    pub fn has_max(&self) -> bool {
        self.monomials
            .iter()
            .any(|m| m.atoms.iter().any(|a| matches!(a, Atom::Max(..))))
    }

    /// Names free in the polynomial: term variables and functional-variable
    /// heads, looking through max atoms and application arguments.
    pub fn free_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        for m in &self.monomials {
            for atom in &m.atoms {
                collect_atom_free(atom, out);
            }
        }
    }

    pub fn params_used(&self) -> BTreeSet<ParamId> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<ParamId>) {
        for m in &self.monomials {
            out.extend(m.params.iter().copied());
            for atom in &m.atoms {
                collect_atom_params(atom, out);
            }
        }
    }

    /// Substitutes values for parameters; parameters missing from the map
    /// stay symbolic.
    pub fn subst_params(&self, values: &HashMap<ParamId, Nat>) -> Poly {
        let mut result = Vec::with_capacity(self.monomials.len());
        for m in &self.monomials {
            let mut coeff = m.coeff;
            let mut params = Vec::with_capacity(m.params.len());
            for p in &m.params {
                match values.get(p) {
                    Some(v) => coeff = nat_mul(coeff, *v),
                    None => params.push(*p),
                }
            }
            let atoms = m
                .atoms
                .iter()
                .map(|a| subst_atom_params(a, values))
                .collect();
            result.push(Monomial::new(coeff, params, atoms));
        }
        Poly::from_monomials(result)
    }

    /// Substitutes values for free names. Term variables take base values,
    /// functional heads take function values; an application of a
    /// substituted head is beta-reduced on the spot.
    pub fn subst_vars(&self, values: &HashMap<String, Value>) -> Poly {
        if values.is_empty() {
            return self.clone();
        }
        let mut acc = Poly::zero();
        for m in &self.monomials {
            let mut prod =
                Poly::from_monomials(vec![Monomial::new(m.coeff, m.params.clone(), Vec::new())]);
            for atom in &m.atoms {
                let factor = subst_atom_vars(atom, values);
                prod = prod.mul(&factor);
            }
            acc = acc.add(&prod);
        }
        acc
    }

    /// Numeric value of the polynomial under a full assignment.
    pub fn eval_numeric(&self, assignment: &Assignment) -> Result<Nat, EvalError> {
        self.subst_params(&assignment.params)
            .subst_vars(&assignment.vars)
            .fold_closed()
    }

    /// Folds a closed polynomial (no parameters, no variables) to a number.
    pub fn fold_closed(&self) -> Result<Nat, EvalError> {
        let mut total: Nat = 0;
        for m in &self.monomials {
            if let Some(p) = m.params.first() {
                return Err(EvalError::MissingParam(*p));
            }
            let mut value = m.coeff;
            for atom in &m.atoms {
                match atom {
                    Atom::Var(name) => return Err(EvalError::MissingVar(name.clone())),
                    Atom::FunApp(name, _) => return Err(EvalError::MissingVar(name.clone())),
                    Atom::Max(l, r) => {
                        let lv = l.fold_closed()?;
                        let rv = r.fold_closed()?;
                        value = nat_mul(value, lv.max(rv));
                    }
                }
            }
            total = nat_add(total, value);
        }
        Ok(total)
    }

    pub fn display<'a>(&'a self, pool: &'a ParamPool) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, pool }
    }
}

fn collect_atom_free(atom: &Atom, out: &mut BTreeSet<String>) {
    match atom {
        Atom::Var(n) => {
            out.insert(n.clone());
        }
        Atom::FunApp(head, args) => {
            out.insert(head.clone());
            for arg in args {
                match arg {
                    PolyArg::Base(p) => p.collect_free(out),
                    PolyArg::Fun(f) => {
                        let mut inner = f.body.free_names();
                        for (b, _) in &f.binders {
                            inner.remove(b);
                        }
                        out.extend(inner);
                    }
                }
            }
        }
        Atom::Max(l, r) => {
            l.collect_free(out);
            r.collect_free(out);
        }
    }
}

fn collect_atom_params(atom: &Atom, out: &mut BTreeSet<ParamId>) {
    match atom {
        Atom::Var(_) => {}
        Atom::FunApp(_, args) => {
            for arg in args {
                match arg {
                    PolyArg::Base(p) => p.collect_params(out),
                    PolyArg::Fun(f) => f.body.collect_params(out),
                }
            }
        }
        Atom::Max(l, r) => {
            l.collect_params(out);
            r.collect_params(out);
        }
    }
}

fn subst_atom_params(atom: &Atom, values: &HashMap<ParamId, Nat>) -> Atom {
    match atom {
        Atom::Var(_) => atom.clone(),
        Atom::FunApp(head, args) => Atom::FunApp(
            head.clone(),
            args.iter()
                .map(|a| match a {
                    PolyArg::Base(p) => PolyArg::Base(p.subst_params(values)),
                    PolyArg::Fun(f) => PolyArg::Fun(LambdaPoly {
                        binders: f.binders.clone(),
                        body: f.body.subst_params(values),
                    }),
                })
                .collect(),
        ),
        Atom::Max(l, r) => Atom::Max(
            Box::new(l.subst_params(values)),
            Box::new(r.subst_params(values)),
        ),
    }
}

fn subst_atom_vars(atom: &Atom, values: &HashMap<String, Value>) -> Poly {
    match atom {
        Atom::Var(name) => match values.get(name) {
            Some(Value::Base(p)) => p.clone(),
            Some(Value::Fun(_)) => {
                panic!("term variable `{name}` substituted with a function value")
            }
            None => Poly::atom(atom.clone()),
        },
        Atom::FunApp(head, args) => {
            let new_args: Vec<PolyArg> = args
                .iter()
                .map(|a| match a {
                    PolyArg::Base(p) => PolyArg::Base(p.subst_vars(values)),
                    PolyArg::Fun(f) => PolyArg::Fun(f.subst_vars_inner(values)),
                })
                .collect();
            match values.get(head) {
                Some(Value::Fun(f)) => {
                    let vals: Vec<Value> =
                        new_args.into_iter().map(PolyArg::into_value).collect();
                    match apply_lambda(f, &vals) {
                        Ok(Value::Base(p)) => p,
                        Ok(Value::Fun(_)) => {
                            panic!("application of `{head}` did not reach a base value")
                        }
                        Err(e) => panic!("application of `{head}` failed: {e}"),
                    }
                }
                Some(Value::Base(_)) => {
                    panic!("functional variable `{head}` substituted with a base value")
                }
                None => Poly::atom(Atom::FunApp(head.clone(), new_args)),
            }
        }
        Atom::Max(l, r) => Poly::max_of(l.subst_vars(values), r.subst_vars(values)),
    }
}

/// A function built from a polynomial body and a binder list. Binder names
/// are significant for display but get renamed on demand to avoid capture.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LambdaPoly {
    pub binders: Vec<(String, SimpleType)>,
    pub body: Poly,
}

impl LambdaPoly {
    pub fn new(binders: Vec<(String, SimpleType)>, body: Poly) -> Self {
        LambdaPoly { binders, body }
    }

    /// Constant function ignoring all binders.
    pub fn constant_fn(binders: Vec<(String, SimpleType)>, value: Nat) -> Self {
        LambdaPoly { binders, body: Poly::constant(value) }
    }

    pub fn free_names(&self) -> BTreeSet<String> {
        let mut names = self.body.free_names();
        for (b, _) in &self.binders {
            names.remove(b);
        }
        names
    }

    /// Substitution below the binders: shadowed names are left alone and
    /// binders capturing an incoming free name are renamed first.
    fn subst_vars_inner(&self, values: &HashMap<String, Value>) -> LambdaPoly {
        let mut inner: HashMap<String, Value> = values
            .iter()
            .filter(|(k, _)| !self.binders.iter().any(|(b, _)| b == *k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if inner.is_empty() {
            return self.clone();
        }
        let mut incoming: BTreeSet<String> = BTreeSet::new();
        for v in inner.values() {
            incoming.extend(v.free_names());
        }
        let mut used: BTreeSet<String> = incoming.clone();
        used.extend(self.body.free_names());
        used.extend(self.binders.iter().map(|(b, _)| b.clone()));
        let mut binders = self.binders.clone();
        for (name, ty) in binders.iter_mut() {
            if incoming.contains(name) {
                let fresh = fresh_name(name, &used);
                used.insert(fresh.clone());
                inner.insert(name.clone(), Value::var_value(&fresh, ty));
                *name = fresh;
            }
        }
        LambdaPoly { binders, body: self.body.subst_vars(&inner) }
    }

    pub fn display<'a>(&'a self, pool: &'a ParamPool) -> LambdaPolyDisplay<'a> {
        LambdaPolyDisplay { lambda: self, pool }
    }
}

/// Result of interpreting a term: a polynomial for base type, a function
/// for arrow type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Base(Poly),
    Fun(LambdaPoly),
}

impl Value {
    pub fn constant(n: Nat) -> Self {
        Value::Base(Poly::constant(n))
    }

    /// Symbolic value of a free variable of the given type: a variable atom
    /// when base, the eta-expansion `\y1..yk. F(y1,..,yk)` when functional.
    pub fn var_value(name: &str, ty: &SimpleType) -> Value {
        if ty.is_base() {
            return Value::Base(Poly::var(name));
        }
        let (arg_tys, _) = ty.uncurry();
        let binders: Vec<(String, SimpleType)> = arg_tys
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("{name}_x{}", i + 1), (*t).clone()))
            .collect();
        let args: Vec<PolyArg> = binders
            .iter()
            .map(|(b, t)| {
                if t.is_base() {
                    PolyArg::Base(Poly::var(b))
                } else {
                    match Value::var_value(b, t) {
                        Value::Fun(f) => PolyArg::Fun(f),
                        Value::Base(_) => unreachable!(),
                    }
                }
            })
            .collect();
        Value::Fun(LambdaPoly::new(
            binders,
            Poly::atom(Atom::FunApp(name.to_string(), args)),
        ))
    }

    /// The all-zero value of a type: the zero polynomial or the constant
    /// zero function.
    pub fn zero_of(ty: &SimpleType) -> Value {
        if ty.is_base() {
            return Value::Base(Poly::zero());
        }
        let (arg_tys, _) = ty.uncurry();
        let binders = arg_tys
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("z{}", i + 1), (*t).clone()))
            .collect();
        Value::Fun(LambdaPoly::new(binders, Poly::zero()))
    }

    pub fn free_names(&self) -> BTreeSet<String> {
        match self {
            Value::Base(p) => p.free_names(),
            Value::Fun(f) => f.free_names(),
        }
    }

    /// Lowest value the term can contribute: the polynomial itself when
    /// base, the function applied to all-zero arguments when functional.
    pub fn lowest(&self) -> Poly {
        match self {
            Value::Base(p) => p.clone(),
            Value::Fun(f) => {
                let zeros: Vec<Value> = f
                    .binders
                    .iter()
                    .map(|(_, ty)| Value::zero_of(ty))
                    .collect();
                match apply_lambda(f, &zeros) {
                    Ok(Value::Base(p)) => p,
                    _ => panic!("lowest value of a function did not reach base type"),
                }
            }
        }
    }

    pub fn subst_params(&self, values: &HashMap<ParamId, Nat>) -> Value {
        match self {
            Value::Base(p) => Value::Base(p.subst_params(values)),
            Value::Fun(f) => Value::Fun(LambdaPoly {
                binders: f.binders.clone(),
                body: f.body.subst_params(values),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    ArityOverflow { expected: usize, found: usize },
    KindMismatch { binder: String },
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::ArityOverflow { expected, found } => {
                write!(f, "function of {expected} argument(s) applied to {found}")
            }
            PolyError::KindMismatch { binder } => {
                write!(f, "argument for binder `{binder}` has the wrong kind")
            }
        }
    }
}

impl std::error::Error for PolyError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    MissingParam(ParamId),
    MissingVar(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::MissingParam(p) => write!(f, "parameter #{} has no value", p.0),
            EvalError::MissingVar(n) => write!(f, "variable `{n}` has no value"),
        }
    }
}

impl std::error::Error for EvalError {}

fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut candidate = format!("{base}'");
    while used.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Beta-reduction of a `LambdaPoly`: substitutes `args` for the first
/// binders, renaming any remaining binder that would capture a free name of
/// an argument. Fewer arguments than binders gives back a function.
pub fn apply_lambda(f: &LambdaPoly, args: &[Value]) -> Result<Value, PolyError> {
    if args.len() > f.binders.len() {
        return Err(PolyError::ArityOverflow {
            expected: f.binders.len(),
            found: args.len(),
        });
    }
    let mut map: HashMap<String, Value> = HashMap::new();
    for ((name, ty), value) in f.binders.iter().zip(args) {
        let ok = match value {
            Value::Base(_) => ty.is_base(),
            Value::Fun(_) => !ty.is_base(),
        };
        if !ok {
            return Err(PolyError::KindMismatch { binder: name.clone() });
        }
        map.insert(name.clone(), value.clone());
    }
    let mut incoming: BTreeSet<String> = BTreeSet::new();
    for v in args {
        incoming.extend(v.free_names());
    }
    let mut remaining: Vec<(String, SimpleType)> = f.binders[args.len()..].to_vec();
    let mut used: BTreeSet<String> = incoming.clone();
    used.extend(f.body.free_names());
    used.extend(f.binders.iter().map(|(b, _)| b.clone()));
    for (name, ty) in remaining.iter_mut() {
        if incoming.contains(name) {
            let fresh = fresh_name(name, &used);
            used.insert(fresh.clone());
            map.insert(name.clone(), Value::var_value(&fresh, ty));
            *name = fresh;
        }
    }
    let body = f.body.subst_vars(&map);
    if remaining.is_empty() {
        Ok(Value::Base(body))
    } else {
        Ok(Value::Fun(LambdaPoly { binders: remaining, body }))
    }
}

/// Full numeric assignment: parameter values plus variable values. Term
/// variables map to base values, functional variables to functions whose
/// coefficients are all known.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    pub params: HashMap<ParamId, Nat>,
    pub vars: HashMap<String, Value>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn set_param(&mut self, id: ParamId, value: Nat) {
        self.params.insert(id, value);
    }

    pub fn set_var(&mut self, name: impl Into<String>, value: Value) {
        self.vars.insert(name.into(), value);
    }

    pub fn set_num(&mut self, name: impl Into<String>, value: Nat) {
        self.vars.insert(name.into(), Value::constant(value));
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    pool: &'a ParamPool,
}

fn write_monomial(
    f: &mut fmt::Formatter<'_>,
    m: &Monomial,
    pool: &ParamPool,
) -> fmt::Result {
    let mut parts: Vec<String> = Vec::new();
    if m.coeff != 1 || (m.params.is_empty() && m.atoms.is_empty()) {
        parts.push(m.coeff.to_string());
    }
    for p in &m.params {
        parts.push(pool.name(*p).to_string());
    }
    for atom in &m.atoms {
        parts.push(atom_string(atom, pool));
    }
    write!(f, "{}", parts.join("*"))
}

fn atom_string(atom: &Atom, pool: &ParamPool) -> String {
    match atom {
        Atom::Var(n) => n.clone(),
        Atom::FunApp(head, args) => {
            let rendered: Vec<String> = args
                .iter()
                .map(|a| match a {
                    PolyArg::Base(p) => format!("{}", p.display(pool)),
                    PolyArg::Fun(l) => format!("{}", l.display(pool)),
                })
                .collect();
            format!("{head}({})", rendered.join(", "))
        }
        Atom::Max(l, r) => {
            format!("max({}, {})", l.display(pool), r.display(pool))
        }
    }
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.monomials.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.poly.monomials.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write_monomial(f, m, self.pool)?;
        }
        Ok(())
    }
}

pub struct LambdaPolyDisplay<'a> {
    lambda: &'a LambdaPoly,
    pool: &'a ParamPool,
}

fn binder_rank(m: &Monomial, binders: &[(String, SimpleType)]) -> (usize, usize) {
    fn atom_rank(atom: &Atom, binders: &[(String, SimpleType)], best: &mut Option<usize>) {
        let idx_of = |name: &str| binders.iter().position(|(b, _)| b == name);
        match atom {
            Atom::Var(n) => {
                if let Some(i) = idx_of(n) {
                    *best = Some(best.map_or(i, |b| b.max(i)));
                }
            }
            Atom::FunApp(head, args) => {
                if let Some(i) = idx_of(head) {
                    *best = Some(best.map_or(i, |b| b.max(i)));
                }
                for arg in args {
                    if let PolyArg::Base(p) = arg {
                        for mm in p.monomials() {
                            for a in &mm.atoms {
                                atom_rank(a, binders, best);
                            }
                        }
                    }
                }
            }
            Atom::Max(l, r) => {
                for side in [l, r] {
                    for mm in side.monomials() {
                        for a in &mm.atoms {
                            atom_rank(a, binders, best);
                        }
                    }
                }
            }
        }
    }
    let mut best: Option<usize> = None;
    for atom in &m.atoms {
        atom_rank(atom, binders, &mut best);
    }
    (best.unwrap_or(usize::MAX), m.atoms.len())
}

impl fmt::Display for LambdaPolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .lambda
            .binders
            .iter()
            .map(|(b, _)| b.as_str())
            .collect();
        if !names.is_empty() {
            write!(f, "Lam[{}]. ", names.join(" "))?;
        }
        if self.lambda.body.monomials.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<&Monomial> = self.lambda.body.monomials.iter().collect();
        ordered.sort_by_key(|m| binder_rank(m, &self.lambda.binders));
        for (i, m) in ordered.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write_monomial(f, m, self.pool)?;
        }
        Ok(())
    }
}
