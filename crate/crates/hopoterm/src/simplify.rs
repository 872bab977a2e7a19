//! Constraint simplification: turns inequalities between polynomials with
//! term variables and functional-variable applications into ground
//! inequalities over parameters only.
//!
//! Seven clause transformations run over a worklist, each replacing one
//! constraint by finitely many smaller ones (per [`measure`]): splitting
//! `max`, trivial cancellation, splitting right-hand sums against zero,
//! grouping monomials by a variable, dividing out a common factor, matching
//! equal-spine function applications argumentwise, and abstracting sums of
//! applications of one functional variable with fresh parameters. Each step
//! is sound: any parameter valuation satisfying the outputs satisfies the
//! input. The converse can fail; a constraint no clause handles is
//! reported as stuck and the caller degrades to MAYBE.

use crate::poly::{
    apply_lambda, Atom, LambdaPoly, Monomial, Nat, ParamId, ParamPool, Poly,
    PolyArg, Value,
};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Whether a constraint must hold strictly, weakly, or strictly exactly
/// when its bit parameter is assigned 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Always,
    Never,
    Bit(ParamId),
}

/// A requirement `lhs ≥ rhs + δ` where δ is 1, 0, or a bit parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingConstraint {
    pub lhs: Poly,
    pub rhs: Poly,
    pub strictness: Strictness,
}

impl OrderingConstraint {
    pub fn weak(lhs: Poly, rhs: Poly) -> Self {
        OrderingConstraint { lhs, rhs, strictness: Strictness::Never }
    }

    pub fn strict(lhs: Poly, rhs: Poly) -> Self {
        OrderingConstraint { lhs, rhs, strictness: Strictness::Always }
    }

    /// Folds the strictness into the right-hand side, leaving a plain
    /// inequality.
    pub fn materialize(&self) -> Inequality {
        let rhs = match self.strictness {
            Strictness::Always => self.rhs.add(&Poly::one()),
            Strictness::Never => self.rhs.clone(),
            Strictness::Bit(o) => self.rhs.add(&Poly::param(o)),
        };
        Inequality { lhs: self.lhs.clone(), rhs }
    }
}

/// A plain inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub lhs: Poly,
    pub rhs: Poly,
}

impl Inequality {
    pub fn new(lhs: Poly, rhs: Poly) -> Self {
        Inequality { lhs, rhs }
    }

    pub fn is_ground(&self) -> bool {
        self.lhs.is_ground() && self.rhs.is_ground()
    }

    pub fn render(&self, pool: &ParamPool) -> String {
        format!("{} >= {}", self.lhs.display(pool), self.rhs.display(pool))
    }
}

/// Ground inequality: parameters and constants only, no term variables,
/// applications, or max atoms.
pub type ParamConstraint = Inequality;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoOrientable;

impl std::fmt::Display for NoOrientable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no constraint is eligible for strict orientation")
    }
}

impl std::error::Error for NoOrientable {}

/// Fresh strictness bits for `count` constraints plus the requirement that
/// at least one of them is 1.
#[derive(Debug, Clone)]
pub struct BitAssignment {
    pub bits: Vec<ParamId>,
    pub sum: OrderingConstraint,
}

pub fn make_strictness_bits(
    count: usize,
    pool: &mut ParamPool,
) -> Result<BitAssignment, NoOrientable> {
    if count == 0 {
        return Err(NoOrientable);
    }
    let bits: Vec<ParamId> = (0..count).map(|_| pool.fresh_bit()).collect();
    let mut sum = Poly::zero();
    for b in &bits {
        sum = sum.add(&Poly::param(*b));
    }
    Ok(BitAssignment {
        bits,
        sum: OrderingConstraint::weak(sum, Poly::one()),
    })
}

fn poly_max_count(p: &Poly) -> usize {
    let mut n = 0;
    for m in p.monomials() {
        for atom in &m.atoms {
            n += atom_max_count(atom);
        }
    }
    n
}

fn atom_max_count(atom: &Atom) -> usize {
    match atom {
        Atom::Var(_) => 0,
        Atom::FunApp(_, args) => args
            .iter()
            .map(|a| match a {
                PolyArg::Base(p) => poly_max_count(p),
                PolyArg::Fun(f) => poly_max_count(&f.body),
            })
            .sum(),
        Atom::Max(l, r) => 1 + poly_max_count(l) + poly_max_count(r),
    }
}

fn poly_occurrences(p: &Poly) -> usize {
    let mut n = 0;
    for m in p.monomials() {
        for atom in &m.atoms {
            n += atom_occurrences(atom);
        }
    }
    n
}

fn atom_occurrences(atom: &Atom) -> usize {
    match atom {
        Atom::Var(_) => 1,
        Atom::FunApp(_, args) => {
            1 + args
                .iter()
                .map(|a| match a {
                    PolyArg::Base(p) => poly_occurrences(p),
                    PolyArg::Fun(f) => poly_occurrences(&f.body),
                })
                .sum::<usize>()
        }
        Atom::Max(l, r) => poly_occurrences(l) + poly_occurrences(r),
    }
}

/// Termination measure for the pipeline: (max atoms, variable and
/// application occurrences, monomial count), compared lexicographically.
/// Every clause replaces a constraint by constraints with strictly smaller
/// measure.
pub fn measure(c: &Inequality) -> [usize; 3] {
    [
        poly_max_count(&c.lhs) + poly_max_count(&c.rhs),
        poly_occurrences(&c.lhs) + poly_occurrences(&c.rhs),
        c.lhs.monomials().len() + c.rhs.monomials().len(),
    ]
}

/// Clause: trivial simplifications. Cancels monomials common to both
/// sides and drops constraints of the shape `p ≥ 0`. Returns `None` when
/// nothing changes.
pub fn clause_trivial(c: &Inequality) -> Option<Vec<Inequality>> {
    if c.rhs.is_zero() {
        return Some(Vec::new());
    }
    let mut lhs: Vec<Monomial> = c.lhs.monomials().to_vec();
    let mut rhs: Vec<Monomial> = Vec::new();
    let mut changed = false;
    for r in c.rhs.monomials() {
        match lhs
            .iter_mut()
            .find(|l| l.atoms == r.atoms && l.params == r.params && l.coeff > 0)
        {
            Some(l) => {
                let cancel = l.coeff.min(r.coeff);
                l.coeff -= cancel;
                changed = true;
                if r.coeff > cancel {
                    let mut rest = r.clone();
                    rest.coeff -= cancel;
                    rhs.push(rest);
                }
            }
            None => rhs.push(r.clone()),
        }
    }
    if !changed {
        return None;
    }
    let rhs = Poly::from_monomials(rhs);
    if rhs.is_zero() {
        return Some(Vec::new());
    }
    Some(vec![Inequality::new(Poly::from_monomials(lhs), rhs)])
}

/// Clause: splitting against zero. `0 ≥ p1 + … + pk` becomes one
/// constraint per monomial.
pub fn clause_zero_split(c: &Inequality) -> Option<Vec<Inequality>> {
    if !c.lhs.is_zero() || c.rhs.monomials().len() < 2 {
        return None;
    }
    Some(
        c.rhs
            .monomials()
            .iter()
            .map(|m| Inequality::new(Poly::zero(), Poly::from_monomials(vec![m.clone()])))
            .collect(),
    )
}

fn find_innermost_max(p: &Poly) -> Option<Atom> {
    for m in p.monomials() {
        for atom in &m.atoms {
            if let Some(found) = atom_innermost_max(atom) {
                return Some(found);
            }
        }
    }
    None
}

fn atom_innermost_max(atom: &Atom) -> Option<Atom> {
    match atom {
        Atom::Var(_) => None,
        Atom::FunApp(_, args) => {
            for a in args {
                let inner = match a {
                    PolyArg::Base(p) => find_innermost_max(p),
                    PolyArg::Fun(f) => find_innermost_max(&f.body),
                };
                if inner.is_some() {
                    return inner;
                }
            }
            None
        }
        Atom::Max(l, r) => find_innermost_max(l)
            .or_else(|| find_innermost_max(r))
            .or_else(|| Some(atom.clone())),
    }
}

fn replace_atom(p: &Poly, target: &Atom, replacement: &Poly) -> Poly {
    let mut acc = Poly::zero();
    for m in p.monomials() {
        let mut prod =
            Poly::from_monomials(vec![Monomial::new(m.coeff, m.params.clone(), Vec::new())]);
        for atom in &m.atoms {
            let factor = if atom == target {
                replacement.clone()
            } else {
                Poly::atom(replace_in_atom(atom, target, replacement))
            };
            prod = prod.mul(&factor);
        }
        acc = acc.add(&prod);
    }
    acc
}

fn replace_in_atom(atom: &Atom, target: &Atom, replacement: &Poly) -> Atom {
    match atom {
        Atom::Var(_) => atom.clone(),
        Atom::FunApp(head, args) => Atom::FunApp(
            head.clone(),
            args.iter()
                .map(|a| match a {
                    PolyArg::Base(p) => PolyArg::Base(replace_atom(p, target, replacement)),
                    PolyArg::Fun(f) => PolyArg::Fun(LambdaPoly::new(
                        f.binders.clone(),
                        replace_atom(&f.body, target, replacement),
                    )),
                })
                .collect(),
        ),
        Atom::Max(l, r) => Atom::Max(
            Box::new(replace_atom(l, target, replacement)),
            Box::new(replace_atom(r, target, replacement)),
        ),
    }
}

/// Clause: max elimination. Picks an innermost max atom on the right and
/// replaces the constraint by one version per branch.
pub fn clause_max_split(c: &Inequality) -> Option<Vec<Inequality>> {
    let target = find_innermost_max(&c.rhs)?;
    let (left, right) = match &target {
        Atom::Max(l, r) => (l.as_ref().clone(), r.as_ref().clone()),
        _ => unreachable!(),
    };
    Some(vec![
        Inequality::new(c.lhs.clone(), replace_atom(&c.rhs, &target, &left)),
        Inequality::new(c.lhs.clone(), replace_atom(&c.rhs, &target, &right)),
    ])
}

/// Top-level names of a monomial: term variables and application heads.
fn monomial_names(m: &Monomial) -> BTreeSet<(bool, String)> {
    let mut out = BTreeSet::new();
    for atom in &m.atoms {
        match atom {
            Atom::Var(n) => {
                out.insert((false, n.clone()));
            }
            Atom::FunApp(head, _) => {
                out.insert((true, head.clone()));
            }
            Atom::Max(l, r) => {
                // Max should be gone before grouping; treat it as owning
                // every name inside so a split never separates its parts.
                for side in [l, r] {
                    for mm in side.monomials() {
                        out.extend(monomial_names(mm));
                    }
                }
            }
        }
    }
    out
}

/// Clause: grouping. Picks the smallest name occurring in some but not all
/// monomials and splits both sides into the monomials with it and those
/// without.
pub fn clause_group_split(c: &Inequality) -> Option<Vec<Inequality>> {
    let all: Vec<&Monomial> =
        c.lhs.monomials().iter().chain(c.rhs.monomials()).collect();
    let total = all.len();
    if total < 2 {
        return None;
    }
    let mut counts: BTreeMap<(bool, String), usize> = BTreeMap::new();
    for m in &all {
        for name in monomial_names(m) {
            *counts.entry(name).or_insert(0) += 1;
        }
    }
    // (false, _) sorts before (true, _): term variables take precedence
    // over application heads.
    let chosen = counts
        .into_iter()
        .find(|(_, cnt)| *cnt > 0 && *cnt < total)
        .map(|(name, _)| name)?;
    let split = |p: &Poly| -> (Poly, Poly) {
        let (with, without): (Vec<Monomial>, Vec<Monomial>) = p
            .monomials()
            .iter()
            .cloned()
            .partition(|m| monomial_names(m).contains(&chosen));
        (Poly::from_monomials(with), Poly::from_monomials(without))
    };
    let (lw, lo) = split(&c.lhs);
    let (rw, ro) = split(&c.rhs);
    Some(vec![Inequality::new(lw, rw), Inequality::new(lo, ro)])
}

fn remove_one_atom(m: &Monomial, target: &Atom) -> Monomial {
    let mut atoms = m.atoms.clone();
    if let Some(idx) = atoms.iter().position(|a| a == target) {
        atoms.remove(idx);
    }
    Monomial::new(m.coeff, m.params.clone(), atoms)
}

/// Clause: dividing out. When every monomial on both sides shares a common
/// factor (a term variable, or failing that an identical application atom),
/// one occurrence of it is removed everywhere. A zero side is vacuously
/// divisible.
pub fn clause_divide(c: &Inequality) -> Option<Vec<Inequality>> {
    let all: Vec<&Monomial> =
        c.lhs.monomials().iter().chain(c.rhs.monomials()).collect();
    if all.is_empty() {
        return None;
    }
    let candidates: BTreeSet<&Atom> = all[0]
        .atoms
        .iter()
        .filter(|a| !matches!(a, Atom::Max(..)))
        .collect();
    let common = |target: &Atom| all.iter().all(|m| m.atoms.contains(target));
    let chosen: &Atom = candidates
        .iter()
        .copied()
        .find(|&a| matches!(a, Atom::Var(_)) && common(a))
        .or_else(|| {
            candidates
                .iter()
                .copied()
                .find(|&a| matches!(a, Atom::FunApp(..)) && common(a))
        })?;
    let divide = |p: &Poly| {
        Poly::from_monomials(
            p.monomials()
                .iter()
                .map(|m| remove_one_atom(m, chosen))
                .collect(),
        )
    };
    Some(vec![Inequality::new(divide(&c.lhs), divide(&c.rhs))])
}

struct MonomialParts<'a> {
    scalar: Monomial,
    apps: Vec<(&'a String, &'a Vec<PolyArg>)>,
}

fn split_monomial(m: &Monomial) -> Option<MonomialParts<'_>> {
    let mut scalar_atoms = Vec::new();
    let mut apps = Vec::new();
    for atom in &m.atoms {
        match atom {
            Atom::Var(_) => scalar_atoms.push(atom.clone()),
            Atom::FunApp(head, args) => apps.push((head, args)),
            Atom::Max(..) => return None,
        }
    }
    Some(MonomialParts {
        scalar: Monomial::new(m.coeff, m.params.clone(), scalar_atoms),
        apps,
    })
}

fn fresh_var_names(count: usize, used: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut i = 1;
    while out.len() < count {
        let candidate = format!("w{i}");
        if !used.contains(&candidate) {
            out.push(candidate);
        }
        i += 1;
    }
    out
}

/// Compares two application arguments, reducing functional arguments to
/// base polynomials by applying both to shared fresh variables.
fn arg_pair(p: &PolyArg, q: &PolyArg, used: &BTreeSet<String>) -> Option<(Poly, Poly)> {
    match (p, q) {
        (PolyArg::Base(a), PolyArg::Base(b)) => Some((a.clone(), b.clone())),
        (PolyArg::Fun(a), PolyArg::Fun(b)) => {
            if a.binders.len() != b.binders.len() {
                return None;
            }
            let names = fresh_var_names(a.binders.len(), used);
            let args: Vec<Value> = names
                .iter()
                .zip(&a.binders)
                .map(|(n, (_, ty))| Value::var_value(n, ty))
                .collect();
            let pa = match apply_lambda(a, &args) {
                Ok(Value::Base(p)) => p,
                _ => return None,
            };
            let qa = match apply_lambda(b, &args) {
                Ok(Value::Base(p)) => p,
                _ => return None,
            };
            Some((pa, qa))
        }
        _ => None,
    }
}

/// Clause: argumentwise matching. `s·F(p⃗)·G(r⃗) ≥ s·F(q⃗)·G(u⃗)` with the
/// same scalar `s` and the same application spine on both sides becomes the
/// argument comparisons `s·p_i ≥ s·q_i`.
pub fn clause_funapp_match(c: &Inequality) -> Option<Vec<Inequality>> {
    let (lm, rm) = match (c.lhs.monomials(), c.rhs.monomials()) {
        ([l], [r]) => (l, r),
        _ => return None,
    };
    let lp = split_monomial(lm)?;
    let rp = split_monomial(rm)?;
    if lp.scalar != rp.scalar || lp.apps.is_empty() || lp.apps.len() != rp.apps.len() {
        return None;
    }
    let mut used: BTreeSet<String> = c.lhs.free_names();
    used.extend(c.rhs.free_names());
    let scalar = Poly::from_monomials(vec![lp.scalar.clone()]);
    let mut out = Vec::new();
    for ((lhead, largs), (rhead, rargs)) in lp.apps.iter().zip(&rp.apps) {
        if lhead != rhead || largs.len() != rargs.len() {
            return None;
        }
        for (p, q) in largs.iter().zip(rargs.iter()) {
            let (pv, qv) = arg_pair(p, q, &used)?;
            out.push(Inequality::new(scalar.mul(&pv), scalar.mul(&qv)));
        }
    }
    Some(out)
}

/// Shape required by the abstraction clause: `scalar · F(args)` with a
/// ground scalar, the same head everywhere.
fn abstract_row(m: &Monomial) -> Option<(Monomial, &String, &Vec<PolyArg>)> {
    match m.atoms.as_slice() {
        [Atom::FunApp(head, args)] => Some((
            Monomial::new(m.coeff, m.params.clone(), Vec::new()),
            head,
            args,
        )),
        _ => None,
    }
}

/// Clause: abstraction. `Σ r_i·F(p⃗_i) ≥ Σ s_j·F(q⃗_j)` becomes, with fresh
/// parameters e_{i,j}: row constraints r_i ≥ Σ_j e_{i,j}, column
/// constraints Σ_i e_{i,j} ≥ s_j, and argument comparisons
/// e_{i,j}·p_{i,l} ≥ e_{i,j}·q_{j,l}. With `single_row_shortcut` and one
/// left monomial, e_{1,j} is fixed to s_j instead of being fresh.
pub fn clause_funapp_abstract(
    c: &Inequality,
    pool: &mut ParamPool,
    single_row_shortcut: bool,
) -> Option<Vec<Inequality>> {
    if c.lhs.monomials().is_empty() || c.rhs.monomials().is_empty() {
        return None;
    }
    let rows: Option<Vec<_>> = c.lhs.monomials().iter().map(abstract_row).collect();
    let cols: Option<Vec<_>> = c.rhs.monomials().iter().map(abstract_row).collect();
    let (rows, cols) = (rows?, cols?);
    let head = rows[0].1;
    let arity = rows[0].2.len();
    if !rows
        .iter()
        .chain(cols.iter())
        .all(|(_, h, a)| *h == head && a.len() == arity)
    {
        return None;
    }
    let mut used: BTreeSet<String> = c.lhs.free_names();
    used.extend(c.rhs.free_names());
    let mono_poly = |m: &Monomial| Poly::from_monomials(vec![m.clone()]);
    let mut out = Vec::new();
    if rows.len() == 1 && single_row_shortcut {
        // One row: e_{1,j} = s_j satisfies the column constraints exactly.
        let r1 = mono_poly(&rows[0].0);
        let mut col_sum = Poly::zero();
        for (s, _, _) in &cols {
            col_sum = col_sum.add(&mono_poly(s));
        }
        out.push(Inequality::new(r1, col_sum));
        for (s, _, qargs) in &cols {
            let sp = mono_poly(s);
            for (p, q) in rows[0].2.iter().zip(qargs.iter()) {
                let (pv, qv) = arg_pair(p, q, &used)?;
                out.push(Inequality::new(sp.mul(&pv), sp.mul(&qv)));
            }
        }
        return Some(out);
    }
    let family = pool.fresh_family();
    let mut params = vec![Vec::with_capacity(cols.len()); rows.len()];
    for (i, row_params) in params.iter_mut().enumerate() {
        for j in 0..cols.len() {
            row_params.push(pool.fresh_split(&family, i + 1, j + 1));
        }
    }
    for (i, (r, _, _)) in rows.iter().enumerate() {
        let mut sum = Poly::zero();
        for e in &params[i] {
            sum = sum.add(&Poly::param(*e));
        }
        out.push(Inequality::new(mono_poly(r), sum));
    }
    for (j, (s, _, _)) in cols.iter().enumerate() {
        let mut sum = Poly::zero();
        for row_params in &params {
            sum = sum.add(&Poly::param(row_params[j]));
        }
        out.push(Inequality::new(sum, mono_poly(s)));
    }
    for (i, (_, _, pargs)) in rows.iter().enumerate() {
        for (j, (_, _, qargs)) in cols.iter().enumerate() {
            let e = Poly::param(params[i][j]);
            for (p, q) in pargs.iter().zip(qargs.iter()) {
                let (pv, qv) = arg_pair(p, q, &used)?;
                out.push(Inequality::new(e.mul(&pv), e.mul(&qv)));
            }
        }
    }
    Some(out)
}

#[derive(Debug, Clone)]
pub struct SimplifyConfig {
    /// Enables the one-row shortcut of the abstraction clause. Off by
    /// default: the fresh-parameter route matches the reference
    /// derivations, and the shortcut only trims the search space.
    pub single_row_shortcut: bool,
    /// Records a [`TraceStep`] per applied clause.
    pub trace: bool,
}

impl Default for SimplifyConfig {
    fn default() -> Self {
        SimplifyConfig { single_row_shortcut: false, trace: false }
    }
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub clause: &'static str,
    pub consumed: String,
    pub consumed_measure: [usize; 3],
    pub produced: Vec<String>,
    pub produced_measures: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Default)]
pub struct Simplified {
    pub ground: Vec<ParamConstraint>,
    pub fixings: HashMap<ParamId, Nat>,
    pub stuck: Vec<Inequality>,
    pub trace: Vec<TraceStep>,
}

impl Simplified {
    pub fn is_complete(&self) -> bool {
        self.stuck.is_empty()
    }
}

/// A ground `0 ≥ monomial` over exactly one distinct parameter forces that
/// parameter to 0.
fn zero_fixing(c: &Inequality) -> Option<ParamId> {
    if !c.lhs.is_zero() {
        return None;
    }
    match c.rhs.monomials() {
        [m] if m.atoms.is_empty() && !m.params.is_empty() => {
            let first = m.params[0];
            if m.params.iter().all(|p| *p == first) {
                Some(first)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Runs the pipeline to a fixpoint. Ground results land in `ground`,
/// parameters forced to zero land in `fixings` (and are substituted away
/// everywhere), and constraints no clause can handle land in `stuck`.
pub fn simplify_to_ground(
    constraints: Vec<OrderingConstraint>,
    pool: &mut ParamPool,
    config: &SimplifyConfig,
) -> Simplified {
    let mut queue: VecDeque<Inequality> =
        constraints.iter().map(|c| c.materialize()).collect();
    let mut result = Simplified::default();
    while let Some(c) = queue.pop_front() {
        if poly_max_count(&c.lhs) > 0 {
            // Interpretation never puts max on the left of a constraint; a
            // breach is soft-reported rather than silently mishandled.
            result.stuck.push(c);
            continue;
        }
        let before = measure(&c);
        let mut applied: Option<(&'static str, Vec<Inequality>)> = None;
        for clause in [
            "max-split",
            "trivial",
            "zero-split",
            "group-split",
            "divide",
            "funapp-match",
            "funapp-abstract",
        ] {
            let out = match clause {
                "max-split" => clause_max_split(&c),
                "trivial" => clause_trivial(&c),
                "zero-split" => clause_zero_split(&c),
                "group-split" => clause_group_split(&c),
                "divide" => clause_divide(&c),
                "funapp-match" => clause_funapp_match(&c),
                "funapp-abstract" => {
                    clause_funapp_abstract(&c, pool, config.single_row_shortcut)
                }
                _ => unreachable!(),
            };
            if let Some(children) = out {
                applied = Some((clause, children));
                break;
            }
        }
        match applied {
            Some((clause, children)) => {
                if config.trace {
                    result.trace.push(TraceStep {
                        clause,
                        consumed: c.render(pool),
                        consumed_measure: before,
                        produced: children.iter().map(|x| x.render(pool)).collect(),
                        produced_measures: children.iter().map(measure).collect(),
                    });
                }
                queue.extend(children);
            }
            None if c.is_ground() => {
                if let Some(param) = zero_fixing(&c) {
                    if config.trace {
                        result.trace.push(TraceStep {
                            clause: "fix",
                            consumed: c.render(pool),
                            consumed_measure: before,
                            produced: vec![format!("{} := 0", pool.name(param))],
                            produced_measures: Vec::new(),
                        });
                    }
                    result.fixings.insert(param, 0);
                    propagate_fixing(param, &mut queue, &mut result);
                } else {
                    result.ground.push(c);
                }
            }
            None => result.stuck.push(c),
        }
    }
    result
}

/// Substitutes a just-fixed parameter through every live constraint.
/// Ground and stuck constraints that change get another trip through the
/// pipeline, since the substitution may unlock further clauses.
fn propagate_fixing(
    param: ParamId,
    queue: &mut VecDeque<Inequality>,
    result: &mut Simplified,
) {
    let mut values = HashMap::new();
    values.insert(param, 0);
    let subst = |c: &Inequality| Inequality {
        lhs: c.lhs.subst_params(&values),
        rhs: c.rhs.subst_params(&values),
    };
    for item in queue.iter_mut() {
        let new = subst(item);
        if new != *item {
            *item = new;
        }
    }
    let mut keep_ground = Vec::new();
    for c in result.ground.drain(..) {
        let new = subst(&c);
        if new == c {
            keep_ground.push(c);
        } else {
            queue.push_back(new);
        }
    }
    result.ground = keep_ground;
    let mut keep_stuck = Vec::new();
    for c in result.stuck.drain(..) {
        let new = subst(&c);
        if new == c {
            keep_stuck.push(c);
        } else {
            queue.push_back(new);
        }
    }
    result.stuck = keep_stuck;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Atom, EvalError};

    fn funapp(head: &str, args: Vec<Poly>) -> Poly {
        Poly::atom(Atom::FunApp(
            head.to_string(),
            args.into_iter().map(PolyArg::Base).collect(),
        ))
    }

    fn ineq(lhs: Poly, rhs: Poly) -> Inequality {
        Inequality::new(lhs, rhs)
    }

    #[test]
    fn materialize_folds_strictness() {
        let mut pool = ParamPool::new();
        let o = pool.fresh_bit();
        let x = Poly::var("x");
        let strict = OrderingConstraint::strict(x.clone(), Poly::zero());
        assert_eq!(strict.materialize().rhs, Poly::one());
        let bit = OrderingConstraint {
            lhs: x.clone(),
            rhs: Poly::zero(),
            strictness: Strictness::Bit(o),
        };
        assert_eq!(bit.materialize().rhs, Poly::param(o));
        let weak = OrderingConstraint::weak(x.clone(), Poly::one());
        assert_eq!(weak.materialize().rhs, Poly::one());
    }

    #[test]
    fn trivial_cancels_common_monomials() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        // 3*F(n) >= F(n) + a1*n  becomes  2*F(n) >= a1*n
        let fn_ = funapp("F", vec![Poly::var("n")]);
        let c = ineq(
            fn_.scale(3),
            fn_.add(&Poly::param(a1).mul(&Poly::var("n"))),
        );
        let out = clause_trivial(&c).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].lhs, fn_.scale(2));
        assert_eq!(out[0].rhs, Poly::param(a1).mul(&Poly::var("n")));
    }

    #[test]
    fn trivial_drops_identical_sides_and_zero_rhs() {
        let mut pool = ParamPool::new();
        let a2 = pool.fresh_coefficient();
        let p = Poly::param(a2).mul(&Poly::var("t"));
        assert_eq!(clause_trivial(&ineq(p.clone(), p.clone())), Some(vec![]));
        assert_eq!(clause_trivial(&ineq(p.clone(), Poly::zero())), Some(vec![]));
        assert_eq!(clause_trivial(&ineq(Poly::var("x"), Poly::var("y"))), None);
    }

    #[test]
    fn zero_split_separates_monomials() {
        let mut pool = ParamPool::new();
        let a7 = pool.fresh_coefficient();
        // 0 >= 2 + a7*m
        let c = ineq(
            Poly::zero(),
            Poly::constant(2).add(&Poly::param(a7).mul(&Poly::var("m"))),
        );
        let out = clause_zero_split(&c).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|x| x.lhs.is_zero()));
        assert!(out.iter().any(|x| x.rhs == Poly::constant(2)));
    }

    #[test]
    fn max_split_replaces_each_branch() {
        let fx = funapp("F", vec![Poly::var("t")]);
        let t = Poly::var("t");
        let c = ineq(Poly::var("p"), Poly::max_of(fx.clone(), t.clone()));
        let out = clause_max_split(&c).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].rhs, fx);
        assert_eq!(out[1].rhs, t);
    }

    #[test]
    fn nested_max_resolves_innermost_first() {
        let a = Poly::var("a");
        let b = Poly::var("b");
        let cc = Poly::var("c");
        let nested = Poly::max_of(Poly::max_of(a.clone(), b.clone()), cc.clone());
        let mut frontier = vec![ineq(Poly::var("p"), nested)];
        let mut leaves = BTreeSet::new();
        while let Some(c) = frontier.pop() {
            match clause_max_split(&c) {
                Some(children) => frontier.extend(children),
                None => {
                    leaves.insert(format!("{}", c.rhs.display(&ParamPool::new())));
                }
            }
        }
        assert_eq!(
            leaves,
            ["a", "b", "c"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn group_split_partitions_by_smallest_variable() {
        let mut pool = ParamPool::new();
        let a2 = pool.fresh_coefficient();
        let a7 = pool.fresh_coefficient();
        // 3*n*m + a2*F(n) >= 2 + a7*m + F(n): the smallest splitting
        // variable is m (n occurs only with m; m in two of five monomials).
        let lhs = Poly::var("n").mul(&Poly::var("m")).scale(3).add(
            &Poly::param(a2).mul(&funapp("F", vec![Poly::var("n")])),
        );
        let rhs = Poly::constant(2)
            .add(&Poly::param(a7).mul(&Poly::var("m")))
            .add(&funapp("F", vec![Poly::var("n")]));
        let out = clause_group_split(&ineq(lhs, rhs)).unwrap();
        assert_eq!(out.len(), 2);
        // m-group: 3*n*m >= a7*m; rest: a2*F(n) >= 2 + F(n)
        assert_eq!(out[0].lhs.monomials().len(), 1);
        assert_eq!(out[0].rhs.monomials().len(), 1);
        assert_eq!(out[1].rhs.monomials().len(), 2);
    }

    #[test]
    fn group_split_needs_a_partial_variable() {
        let c = ineq(Poly::var("n"), Poly::var("n").scale(2));
        assert_eq!(clause_group_split(&c), None);
    }

    #[test]
    fn divide_removes_common_variable_factor() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        let a3 = pool.fresh_coefficient();
        // a1*n + n*n*f(a3, n) >= n + a3*n  becomes  a1 + n*f(a3, n) >= 1 + a3
        let n = Poly::var("n");
        let f = funapp("f", vec![Poly::param(a3), n.clone()]);
        let lhs = Poly::param(a1).mul(&n).add(&n.mul(&n).mul(&f));
        let rhs = n.add(&Poly::param(a3).mul(&n));
        let out = clause_divide(&ineq(lhs, rhs)).unwrap();
        assert_eq!(out.len(), 1);
        let expected_lhs = Poly::param(a1).add(&n.mul(&f));
        let expected_rhs = Poly::one().add(&Poly::param(a3));
        assert_eq!(out[0].lhs, expected_lhs);
        assert_eq!(out[0].rhs, expected_rhs);
    }

    #[test]
    fn divide_handles_application_factors() {
        let mut pool = ParamPool::new();
        let a5 = pool.fresh_coefficient();
        // 0 >= a5*F(q): F(q) can be divided out even though it is not a
        // variable, since its value ranges over the naturals.
        let c = ineq(
            Poly::zero(),
            Poly::param(a5).mul(&funapp("F", vec![Poly::var("q")])),
        );
        let out = clause_divide(&c).unwrap();
        assert_eq!(out[0].rhs, Poly::param(a5));
        assert!(out[0].lhs.is_zero());
    }

    #[test]
    fn funapp_match_compares_arguments() {
        let mut pool = ParamPool::new();
        let e = pool.fresh_named("e", crate::poly::ParamKind::Split);
        let big = Poly::var("h").add(&Poly::var("t")).add(&Poly::one());
        let c = ineq(
            Poly::param(e).mul(&funapp("F", vec![big.clone()])),
            Poly::param(e).mul(&funapp("F", vec![Poly::var("h")])),
        );
        let out = clause_funapp_match(&c).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].lhs, Poly::param(e).mul(&big));
        assert_eq!(out[0].rhs, Poly::param(e).mul(&Poly::var("h")));
    }

    #[test]
    fn funapp_match_requires_identical_scalars() {
        let c = ineq(
            Poly::var("n").mul(&funapp("F", vec![Poly::var("a")])),
            funapp("F", vec![Poly::var("b")]),
        );
        assert_eq!(clause_funapp_match(&c), None);
    }

    #[test]
    fn funapp_abstract_builds_transfer_parameters() {
        let mut pool = ParamPool::new();
        let a2 = pool.fresh_coefficient();
        let a6 = pool.fresh_coefficient();
        let big = Poly::var("t").add(&Poly::one());
        // a2*a6*F(t+1) >= a6*F(t)
        let c = ineq(
            Poly::param(a2).mul(&Poly::param(a6)).mul(&funapp("F", vec![big.clone()])),
            Poly::param(a6).mul(&funapp("F", vec![Poly::var("t")])),
        );
        let out = clause_funapp_abstract(&c, &mut pool, false).unwrap();
        // row, column, and one argument comparison
        assert_eq!(out.len(), 3);
        let e = out[0].rhs.clone();
        assert_eq!(out[0].lhs, Poly::param(a2).mul(&Poly::param(a6)));
        assert_eq!(out[1].lhs, e);
        assert_eq!(out[1].rhs, Poly::param(a6));
        assert_eq!(out[2].lhs, e.mul(&big));
        assert_eq!(out[2].rhs, e.mul(&Poly::var("t")));
        assert_eq!(pool.name(out[0].rhs.params_used().iter().next().copied().unwrap()), "e_{1,1}");
    }

    #[test]
    fn funapp_abstract_shortcut_skips_fresh_parameters() {
        let mut pool = ParamPool::new();
        let a2 = pool.fresh_coefficient();
        let a6 = pool.fresh_coefficient();
        let before = pool.len();
        let big = Poly::var("t").add(&Poly::one());
        let c = ineq(
            Poly::param(a2).mul(&funapp("F", vec![big.clone()])),
            Poly::param(a6).mul(&funapp("F", vec![Poly::var("t")])),
        );
        let out = clause_funapp_abstract(&c, &mut pool, true).unwrap();
        assert_eq!(pool.len(), before);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].lhs, Poly::param(a2));
        assert_eq!(out[0].rhs, Poly::param(a6));
        assert_eq!(out[1].lhs, Poly::param(a6).mul(&big));
        assert_eq!(out[1].rhs, Poly::param(a6).mul(&Poly::var("t")));
    }

    #[test]
    fn pipeline_fixes_and_propagates_zero_parameters() {
        let mut pool = ParamPool::new();
        let a3 = pool.fresh_coefficient();
        let a4 = pool.fresh_coefficient();
        let a5 = pool.fresh_coefficient();
        let constraints = vec![
            OrderingConstraint::weak(
                Poly::zero(),
                Poly::param(a5).mul(&Poly::var("m")),
            ),
            OrderingConstraint::weak(
                Poly::param(a4),
                Poly::param(a5).add(&Poly::param(a3)),
            ),
        ];
        let out = simplify_to_ground(constraints, &mut pool, &SimplifyConfig::default());
        assert!(out.stuck.is_empty());
        assert_eq!(out.fixings.get(&a5), Some(&0));
        assert_eq!(out.ground.len(), 1);
        assert_eq!(out.ground[0].lhs, Poly::param(a4));
        assert_eq!(out.ground[0].rhs, Poly::param(a3));
    }

    #[test]
    fn incompleteness_witness_leaves_unsatisfiable_residue() {
        // F(n)*n >= F(1)*n is valid for every weakly monotonic F, but the
        // clauses reduce it to 0 >= 1.
        let n = Poly::var("n");
        let c = OrderingConstraint::weak(
            funapp("F", vec![n.clone()]).mul(&n),
            funapp("F", vec![Poly::one()]).mul(&n),
        );
        let mut pool = ParamPool::new();
        let out = simplify_to_ground(vec![c], &mut pool, &SimplifyConfig::default());
        assert!(out.stuck.is_empty());
        assert_eq!(out.ground.len(), 1);
        assert!(out.ground[0].lhs.is_zero());
        assert_eq!(out.ground[0].rhs, Poly::one());
    }

    #[test]
    fn every_trace_step_decreases_the_measure() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        let a2 = pool.fresh_coefficient();
        let n = Poly::var("n");
        let m = Poly::var("m");
        let f_of = |p: Poly| funapp("F", vec![p]);
        let constraints = vec![
            OrderingConstraint::strict(
                Poly::param(a1).mul(&n).add(&f_of(n.add(&m))).add(&n.mul(&f_of(n.clone()))),
                Poly::param(a2)
                    .mul(&m)
                    .add(&Poly::max_of(f_of(m.clone()), m.clone()))
                    .add(&f_of(n.clone()).mul(&n)),
            ),
            OrderingConstraint::weak(
                f_of(n.add(&Poly::one())).scale(2),
                f_of(n.clone()).add(&f_of(Poly::one())),
            ),
        ];
        let config = SimplifyConfig { trace: true, ..SimplifyConfig::default() };
        let out = simplify_to_ground(constraints, &mut pool, &config);
        assert!(!out.trace.is_empty());
        for step in &out.trace {
            for produced in &step.produced_measures {
                assert!(
                    produced < &step.consumed_measure,
                    "{}: {:?} -> {:?} ({} => {:?})",
                    step.clause,
                    step.consumed_measure,
                    produced,
                    step.consumed,
                    step.produced
                );
            }
        }
    }

    #[test]
    fn ground_output_is_really_ground() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        let n = Poly::var("n");
        let constraints = vec![OrderingConstraint::strict(
            Poly::param(a1).mul(&n).add(&Poly::param(a1)),
            n.clone(),
        )];
        let out = simplify_to_ground(constraints, &mut pool, &SimplifyConfig::default());
        assert!(out.stuck.is_empty());
        for c in &out.ground {
            assert!(c.is_ground(), "{:?}", c);
            assert_eq!(c.lhs.eval_numeric(&Default::default()), Err(EvalError::MissingParam(a1)));
        }
    }

    #[test]
    fn strictness_bits_sum_to_at_least_one() {
        let mut pool = ParamPool::new();
        let out = make_strictness_bits(2, &mut pool).unwrap();
        assert_eq!(out.bits.len(), 2);
        assert_eq!(
            out.sum.lhs,
            Poly::param(out.bits[0]).add(&Poly::param(out.bits[1]))
        );
        assert_eq!(out.sum.rhs, Poly::one());
        assert!(make_strictness_bits(0, &mut pool).is_err());
    }

    #[test]
    fn stuck_constraints_are_reported_not_dropped() {
        // 2*F(x)*G(x) >= F(y)*G(y): scalars differ, both heads occur in
        // every monomial, and no atom is common to both sides, so no
        // clause applies.
        let c = OrderingConstraint::weak(
            funapp("F", vec![Poly::var("x")])
                .mul(&funapp("G", vec![Poly::var("x")]))
                .scale(2),
            funapp("F", vec![Poly::var("y")]).mul(&funapp("G", vec![Poly::var("y")])),
        );
        let mut pool = ParamPool::new();
        let out = simplify_to_ground(vec![c], &mut pool, &SimplifyConfig::default());
        assert!(!out.is_complete());
        assert_eq!(out.stuck.len(), 1);
    }
}
