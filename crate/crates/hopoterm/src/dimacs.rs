//! DIMACS CNF export of ground constraint systems, for use with external
//! SAT solvers.
//!
//! Every parameter becomes a little-endian bit vector of exactly
//! ceil(log2(bound+1)) variables (width capped at 16; larger bounds are
//! rejected). Polynomial arithmetic is encoded with ripple-carry adders
//! and shift-add multipliers, comparisons with a standard less-than chain,
//! all Tseitin-transformed. A sidecar map records which CNF variable holds
//! which bit of which parameter so models can be decoded back into
//! valuations.

use crate::poly::{Nat, ParamId, ParamPool, Poly};
use crate::simplify::ParamConstraint;
use crate::solve::Valuation;
use std::collections::HashMap;
use std::fmt::Write as _;

pub const MAX_BITS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DimacsError {
    /// The value bound of a parameter needs more than [`MAX_BITS`] bits.
    BoundTooLarge { param: String, bound: Nat },
}

impl std::fmt::Display for DimacsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DimacsError::BoundTooLarge { param, bound } => write!(
                f,
                "parameter {param} has bound {bound}, which exceeds the {MAX_BITS}-bit encoding limit"
            ),
        }
    }
}

impl std::error::Error for DimacsError {}

/// The rendered CNF plus its variable map.
#[derive(Debug, Clone)]
pub struct DimacsFile {
    pub cnf: String,
    /// One line per parameter bit: `<name> <bitIndex> <cnfVar>`.
    pub map: String,
    pub variables: u32,
    pub clauses: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bit {
    Const(bool),
    Lit(i32),
}

impl Bit {
    fn negate(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Lit(l) => Bit::Lit(-l),
        }
    }
}

#[derive(Default)]
struct Builder {
    clauses: Vec<Vec<i32>>,
    next: i32,
}

impl Builder {
    fn fresh(&mut self) -> i32 {
        self.next += 1;
        self.next
    }

    fn clause(&mut self, lits: Vec<i32>) {
        self.clauses.push(lits);
    }

    fn and(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(false), _) | (_, Bit::Const(false)) => Bit::Const(false),
            (Bit::Const(true), x) | (x, Bit::Const(true)) => x,
            (Bit::Lit(a), Bit::Lit(b)) => {
                let t = self.fresh();
                self.clause(vec![-a, -b, t]);
                self.clause(vec![a, -t]);
                self.clause(vec![b, -t]);
                Bit::Lit(t)
            }
        }
    }

    fn or(&mut self, a: Bit, b: Bit) -> Bit {
        self.and(a.negate(), b.negate()).negate()
    }

    fn xor(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(false), x) | (x, Bit::Const(false)) => x,
            (Bit::Const(true), x) | (x, Bit::Const(true)) => x.negate(),
            (Bit::Lit(a), Bit::Lit(b)) => {
                let t = self.fresh();
                self.clause(vec![-a, -b, -t]);
                self.clause(vec![a, b, -t]);
                self.clause(vec![a, -b, t]);
                self.clause(vec![-a, b, t]);
                Bit::Lit(t)
            }
        }
    }

    /// Ripple-carry addition; the result is one bit wider than the wider
    /// input.
    fn add(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let width = a.len().max(b.len());
        let get = |v: &[Bit], i: usize| v.get(i).copied().unwrap_or(Bit::Const(false));
        let mut out = Vec::with_capacity(width + 1);
        let mut carry = Bit::Const(false);
        for i in 0..width {
            let (x, y) = (get(a, i), get(b, i));
            let xy = self.xor(x, y);
            out.push(self.xor(xy, carry));
            let and_xy = self.and(x, y);
            let and_c = self.and(xy, carry);
            carry = self.or(and_xy, and_c);
        }
        out.push(carry);
        out
    }

    /// Shift-add multiplication with exact output width.
    fn mul(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let mut acc: Vec<Bit> = Vec::new();
        for (shift, &bj) in b.iter().enumerate() {
            if bj == Bit::Const(false) {
                continue;
            }
            let mut partial: Vec<Bit> = vec![Bit::Const(false); shift];
            for &ai in a {
                partial.push(self.and(ai, bj));
            }
            acc = if acc.is_empty() { partial } else { self.add(&acc, &partial) };
        }
        acc
    }

    fn number(&self, mut n: Nat) -> Vec<Bit> {
        let mut out = Vec::new();
        while n > 0 {
            out.push(Bit::Const(n & 1 == 1));
            n >>= 1;
        }
        out
    }

    /// A bit that is true exactly when `a < b` (unsigned).
    fn less_than(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let width = a.len().max(b.len());
        let get = |v: &[Bit], i: usize| v.get(i).copied().unwrap_or(Bit::Const(false));
        let mut lt = Bit::Const(false);
        for i in 0..width {
            let (x, y) = (get(a, i), get(b, i));
            // lt' = (¬x ∧ y) ∨ (x ≡ y) ∧ lt
            let strictly = self.and(x.negate(), y);
            let same = self.xor(x, y).negate();
            let keep = self.and(same, lt);
            lt = self.or(strictly, keep);
        }
        lt
    }

    fn assert_false(&mut self, bit: Bit) {
        match bit {
            Bit::Const(false) => {}
            Bit::Const(true) => self.clause(Vec::new()),
            Bit::Lit(l) => self.clause(vec![-l]),
        }
    }

    fn poly_bits(&mut self, p: &Poly, params: &HashMap<ParamId, Vec<Bit>>) -> Vec<Bit> {
        let mut acc: Vec<Bit> = Vec::new();
        for m in p.monomials() {
            assert!(m.atoms.is_empty(), "CNF encoding needs ground constraints");
            let mut term = self.number(m.coeff);
            for param in &m.params {
                term = self.mul(&term, &params[param]);
            }
            acc = if acc.is_empty() { term } else { self.add(&acc, &term) };
        }
        acc
    }
}

fn width_for(bound: Nat) -> u32 {
    64 - bound.leading_zeros()
}

/// Encodes a ground constraint system as CNF, one bit vector per
/// parameter, bounded exactly as the native solver would bound it.
pub fn encode_dimacs(
    constraints: &[ParamConstraint],
    pool: &ParamPool,
    max_coefficient: Nat,
) -> Result<DimacsFile, DimacsError> {
    let mut params: Vec<ParamId> = constraints
        .iter()
        .flat_map(|c| {
            c.lhs.params_used().into_iter().chain(c.rhs.params_used())
        })
        .collect();
    params.sort();
    params.dedup();

    let mut builder = Builder::default();
    let mut bits: HashMap<ParamId, Vec<Bit>> = HashMap::new();
    let mut map = String::new();
    for &param in &params {
        let bound = pool.bound(param, max_coefficient);
        let width = width_for(bound);
        if width > MAX_BITS {
            return Err(DimacsError::BoundTooLarge {
                param: pool.name(param).to_string(),
                bound,
            });
        }
        let vector: Vec<Bit> = (0..width)
            .map(|i| {
                let v = builder.fresh();
                let _ = writeln!(map, "{} {} {}", pool.name(param), i, v);
                Bit::Lit(v)
            })
            .collect();
        // Exclude the values between the bound and the top of the range.
        if width > 0 && (1u64 << width) - 1 > bound {
            let limit = builder.number(bound);
            let over = builder.less_than(&limit, &vector);
            builder.assert_false(over);
        }
        bits.insert(param, vector);
    }
    for c in constraints {
        let lhs = builder.poly_bits(&c.lhs, &bits);
        let rhs = builder.poly_bits(&c.rhs, &bits);
        let lt = builder.less_than(&lhs, &rhs);
        builder.assert_false(lt);
    }

    let mut cnf = String::new();
    let _ = writeln!(cnf, "p cnf {} {}", builder.next, builder.clauses.len());
    for clause in &builder.clauses {
        for lit in clause {
            let _ = write!(cnf, "{lit} ");
        }
        let _ = writeln!(cnf, "0");
    }
    Ok(DimacsFile {
        cnf,
        map,
        variables: builder.next as u32,
        clauses: builder.clauses.len(),
    })
}

/// Reads a solver model (whitespace-separated literals, `v ` prefixes and
/// a trailing 0 allowed) back into a valuation using the sidecar map.
pub fn decode_model(map: &str, model: &str, pool: &ParamPool) -> Valuation {
    let mut true_vars: Vec<i32> = Vec::new();
    for token in model.split_whitespace() {
        if token == "v" || token == "s" || token == "SATISFIABLE" {
            continue;
        }
        if let Ok(lit) = token.parse::<i32>() {
            if lit > 0 {
                true_vars.push(lit);
            }
        }
    }
    let by_name: HashMap<&str, ParamId> =
        pool.ids().map(|id| (pool.name(id), id)).collect();
    let mut valuation = Valuation::new();
    for line in map.lines() {
        let mut fields = line.split_whitespace();
        let (Some(name), Some(bit), Some(var)) =
            (fields.next(), fields.next(), fields.next())
        else {
            continue;
        };
        let (Ok(bit), Ok(var)) = (bit.parse::<u32>(), var.parse::<i32>()) else {
            continue;
        };
        let Some(&id) = by_name.get(name) else { continue };
        let current = valuation.get(id).unwrap_or(0);
        if true_vars.contains(&var) {
            valuation.set(id, current + (1u64 << bit));
        } else {
            valuation.set(id, current);
        }
    }
    valuation
}
