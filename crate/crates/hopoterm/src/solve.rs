//! Bounded search for parameter valuations satisfying ground constraints.
//!
//! Parameters range over 0..=bound (1 for strictness bits, the configured
//! maximum for coefficients). The solver runs a depth-first search over
//! assignments in a fixed order, maintaining a value interval for every
//! parameter. At each node the intervals are narrowed to a fixpoint: a
//! parameter value survives only if the constraints stay individually
//! satisfiable with it, so forced values propagate without branching and
//! conflicts cut the branch early. The search is deterministic: same
//! input, same valuation.

use crate::poly::{nat_add, nat_mul, Nat, ParamId, ParamKind, ParamPool, Poly};
use crate::simplify::ParamConstraint;
use std::collections::{HashMap, HashSet};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Inclusive upper bound for coefficient parameters.
    pub max_coefficient: Nat,
    /// Absolute deadline; the search aborts with `Timeout` once past it.
    pub deadline: Option<Instant>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_coefficient: 3, deadline: None }
    }
}

/// A (partial) assignment of naturals to parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    pub values: HashMap<ParamId, Nat>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn get(&self, id: ParamId) -> Option<Nat> {
        self.values.get(&id).copied()
    }

    pub fn set(&mut self, id: ParamId, value: Nat) {
        self.values.insert(id, value);
    }

    /// The value of a parameter that may have been dropped during
    /// simplification; anything unconstrained might as well be 0.
    pub fn value_or_zero(&self, id: ParamId) -> Nat {
        self.get(id).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveError {
    Unsat,
    Timeout,
}

impl std::fmt::Display for SolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveError::Unsat => write!(f, "no valuation within the bounds"),
            SolveError::Timeout => write!(f, "search deadline exceeded"),
        }
    }
}

impl std::error::Error for SolveError {}

fn eval_ground(p: &Poly, v: &Valuation) -> Option<Nat> {
    let mut total: Nat = 0;
    for m in p.monomials() {
        if !m.atoms.is_empty() {
            return None;
        }
        let mut prod = m.coeff;
        for param in &m.params {
            prod = nat_mul(prod, v.get(*param)?);
        }
        total = nat_add(total, prod);
    }
    Some(total)
}

/// Checks a valuation against constraints. Extra assignments are fine;
/// missing ones (or non-ground constraints) make the check fail.
pub fn verify(constraints: &[ParamConstraint], valuation: &Valuation) -> bool {
    constraints.iter().all(|c| {
        match (eval_ground(&c.lhs, valuation), eval_ground(&c.rhs, valuation)) {
            (Some(l), Some(r)) => l >= r,
            _ => false,
        }
    })
}

/// Per-parameter value intervals; a parameter is decided when lo == hi.
#[derive(Clone)]
struct Domains {
    lo: HashMap<ParamId, Nat>,
    hi: HashMap<ParamId, Nat>,
}

struct Search<'a> {
    constraints: &'a [ParamConstraint],
    /// Distinct parameters of each constraint, parallel to `constraints`.
    constraint_params: Vec<Vec<ParamId>>,
    params: Vec<ParamId>,
    bits: HashSet<ParamId>,
    deadline: Option<Instant>,
    steps: u64,
}

impl Search<'_> {
    /// Largest (upper = true) or smallest value a side can take within the
    /// domains, optionally with one parameter pinned to a fixed value.
    /// Parameters only occur positively, so using hi (lo) everywhere gives
    /// the exact extreme.
    fn extreme(
        &self,
        p: &Poly,
        d: &Domains,
        upper: bool,
        pin: Option<(ParamId, Nat)>,
    ) -> Nat {
        let mut total: Nat = 0;
        for m in p.monomials() {
            let mut prod = m.coeff;
            for param in &m.params {
                let v = match pin {
                    Some((pinned, value)) if pinned == *param => value,
                    _ if upper => d.hi[param],
                    _ => d.lo[param],
                };
                if v == 0 {
                    prod = 0;
                    break;
                }
                prod = nat_mul(prod, v);
            }
            total = nat_add(total, prod);
        }
        total
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps % 1024 == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    return Err(SolveError::Timeout);
                }
            }
        }
        Ok(())
    }

    /// Shrinks every parameter's interval to the values that keep each
    /// constraint individually satisfiable, to a fixpoint. Returns false
    /// on a conflict (some constraint can no longer hold).
    fn propagate(&mut self, d: &mut Domains) -> Result<bool, SolveError> {
        loop {
            let mut changed = false;
            for (ci, c) in self.constraints.iter().enumerate() {
                self.tick()?;
                if self.extreme(&c.lhs, d, true, None)
                    < self.extreme(&c.rhs, d, false, None)
                {
                    return Ok(false);
                }
                for pi in 0..self.constraint_params[ci].len() {
                    let param = self.constraint_params[ci][pi];
                    let (lo, hi) = (d.lo[&param], d.hi[&param]);
                    if lo == hi {
                        continue;
                    }
                    // The constraint is monotone in the parameter on each
                    // side separately, but not in their difference, so
                    // test every candidate value.
                    let mut new_lo = None;
                    let mut new_hi = None;
                    for x in lo..=hi {
                        let pin = Some((param, x));
                        if self.extreme(&c.lhs, d, true, pin)
                            >= self.extreme(&c.rhs, d, false, pin)
                        {
                            if new_lo.is_none() {
                                new_lo = Some(x);
                            }
                            new_hi = Some(x);
                        }
                    }
                    let (Some(new_lo), Some(new_hi)) = (new_lo, new_hi) else {
                        return Ok(false);
                    };
                    if new_lo > lo {
                        d.lo.insert(param, new_lo);
                        changed = true;
                    }
                    if new_hi < hi {
                        d.hi.insert(param, new_hi);
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(true);
            }
        }
    }

    fn dfs(&mut self, mut d: Domains) -> Result<Option<Valuation>, SolveError> {
        self.tick()?;
        if !self.propagate(&mut d)? {
            return Ok(None);
        }
        let undecided = self
            .params
            .iter()
            .copied()
            .find(|p| d.lo[p] < d.hi[p]);
        let Some(param) = undecided else {
            // All intervals are single values, and propagation checked
            // every constraint exactly at those values.
            let values = self.params.iter().map(|p| (*p, d.lo[p])).collect();
            return Ok(Some(Valuation { values }));
        };
        // Strictness bits are tried at 1 first: a strictly oriented
        // constraint is progress, so prefer valuations that maximize it.
        let range = d.lo[&param]..=d.hi[&param];
        let values: Vec<Nat> = if self.bits.contains(&param) {
            range.rev().collect()
        } else {
            range.collect()
        };
        for value in values {
            let mut child = d.clone();
            child.lo.insert(param, value);
            child.hi.insert(param, value);
            if let Some(found) = self.dfs(child)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
}

/// Finds a valuation of every parameter occurring in `constraints` that
/// satisfies all of them, or reports that none exists within the bounds.
///
/// Constraints must be ground (the simplification pipeline guarantees
/// this for its `ground` output).
pub fn solve(
    constraints: &[ParamConstraint],
    pool: &ParamPool,
    config: &SolverConfig,
) -> Result<Valuation, SolveError> {
    for c in constraints {
        assert!(
            c.is_ground(),
            "solver input must be ground: {} >= {}",
            c.lhs.display(pool),
            c.rhs.display(pool)
        );
    }
    if let Some(deadline) = config.deadline {
        if Instant::now() >= deadline {
            return Err(SolveError::Timeout);
        }
    }
    let mut occurrences: HashMap<ParamId, usize> = HashMap::new();
    let mut constraint_params: Vec<Vec<ParamId>> = Vec::with_capacity(constraints.len());
    for c in constraints {
        let mut seen = Vec::new();
        for side in [&c.lhs, &c.rhs] {
            for m in side.monomials() {
                for param in &m.params {
                    *occurrences.entry(*param).or_insert(0) += 1;
                    if !seen.contains(param) {
                        seen.push(*param);
                    }
                }
            }
        }
        constraint_params.push(seen);
    }
    let mut params: Vec<ParamId> = occurrences.keys().copied().collect();
    // Strictness bits first (their domain is binary and they gate whole
    // branches), then the parameters that occur most.
    params.sort_by_key(|id| {
        let bit = match pool.kind(*id) {
            ParamKind::StrictnessBit => 0,
            _ => 1,
        };
        (bit, std::cmp::Reverse(occurrences[id]), id.0)
    });
    let domains = Domains {
        lo: params.iter().map(|id| (*id, 0)).collect(),
        hi: params
            .iter()
            .map(|id| (*id, pool.bound(*id, config.max_coefficient)))
            .collect(),
    };
    let bits: HashSet<ParamId> = params
        .iter()
        .filter(|id| pool.kind(**id) == ParamKind::StrictnessBit)
        .copied()
        .collect();
    let mut search = Search {
        constraints,
        constraint_params,
        params,
        bits,
        deadline: config.deadline,
        steps: 0,
    };
    match search.dfs(domains)? {
        Some(valuation) => {
            assert!(
                verify(constraints, &valuation),
                "solver produced a valuation its own verifier rejects"
            );
            Ok(valuation)
        }
        None => Err(SolveError::Unsat),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ParamPool;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::time::Duration;

    fn ineq(lhs: Poly, rhs: Poly) -> ParamConstraint {
        ParamConstraint::new(lhs, rhs)
    }

    #[test]
    fn finds_the_first_valuation_in_order() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        let a2 = pool.fresh_coefficient();
        let constraints = vec![ineq(
            Poly::param(a1).add(&Poly::param(a2)),
            Poly::constant(2),
        )];
        let v = solve(&constraints, &pool, &SolverConfig::default()).unwrap();
        assert_eq!(v.get(a1), Some(0));
        assert_eq!(v.get(a2), Some(2));
    }

    #[test]
    fn empty_system_is_trivially_satisfiable() {
        let pool = ParamPool::new();
        let v = solve(&[], &pool, &SolverConfig::default()).unwrap();
        assert!(v.values.is_empty());
    }

    #[test]
    fn reports_unsat_within_bounds() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        let constraints = vec![ineq(Poly::param(a1), Poly::constant(4))];
        assert_eq!(
            solve(&constraints, &pool, &SolverConfig::default()),
            Err(SolveError::Unsat)
        );
        let impossible = vec![ineq(Poly::zero(), Poly::one())];
        assert_eq!(
            solve(&impossible, &pool, &SolverConfig::default()),
            Err(SolveError::Unsat)
        );
    }

    #[test]
    fn solves_nonlinear_products() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        let a2 = pool.fresh_coefficient();
        let constraints = vec![ineq(
            Poly::param(a1).mul(&Poly::param(a2)),
            Poly::constant(9),
        )];
        let v = solve(&constraints, &pool, &SolverConfig::default()).unwrap();
        assert_eq!((v.get(a1), v.get(a2)), (Some(3), Some(3)));
    }

    #[test]
    fn strictness_bits_stay_binary() {
        let mut pool = ParamPool::new();
        let o1 = pool.fresh_bit();
        let sat = vec![ineq(Poly::param(o1), Poly::one())];
        let v = solve(&sat, &pool, &SolverConfig::default()).unwrap();
        assert_eq!(v.get(o1), Some(1));
        let unsat = vec![ineq(Poly::param(o1), Poly::constant(2))];
        assert_eq!(
            solve(&unsat, &pool, &SolverConfig::default()),
            Err(SolveError::Unsat)
        );
    }

    #[test]
    fn verify_tolerates_extra_assignments() {
        let mut pool = ParamPool::new();
        let a1 = pool.fresh_coefficient();
        let a2 = pool.fresh_coefficient();
        let constraints = vec![ineq(Poly::param(a1), Poly::one())];
        let mut v = Valuation::new();
        v.set(a1, 2);
        v.set(a2, 7);
        assert!(verify(&constraints, &v));
        let mut missing = Valuation::new();
        missing.set(a2, 1);
        assert!(!verify(&constraints, &missing));
    }

    #[test]
    fn expired_deadline_times_out() {
        let mut pool = ParamPool::new();
        let params: Vec<_> = (0..12).map(|_| pool.fresh_coefficient()).collect();
        // A system with a large search space and no solution near the
        // start of the order.
        let mut constraints = Vec::new();
        let mut sum = Poly::zero();
        for p in &params {
            sum = sum.add(&Poly::param(*p));
        }
        constraints.push(ineq(sum, Poly::constant(36)));
        for pair in params.chunks(2) {
            constraints.push(ineq(
                Poly::param(pair[0]).mul(&Poly::param(pair[1])),
                Poly::constant(9),
            ));
        }
        let config = SolverConfig {
            deadline: Some(Instant::now() - Duration::from_secs(1)),
            ..SolverConfig::default()
        };
        assert_eq!(solve(&constraints, &pool, &config), Err(SolveError::Timeout));
    }

    fn random_system(
        rng: &mut ChaCha8Rng,
        pool: &mut ParamPool,
    ) -> (Vec<ParamConstraint>, Vec<ParamId>) {
        let param_count = rng.gen_range(1..=6);
        let params: Vec<ParamId> = (0..param_count)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    pool.fresh_bit()
                } else {
                    pool.fresh_coefficient()
                }
            })
            .collect();
        let poly = |rng: &mut ChaCha8Rng, params: &[ParamId]| {
            let monomials = rng.gen_range(0..=3);
            let mut p = Poly::zero();
            for _ in 0..monomials {
                let mut m = Poly::constant(rng.gen_range(1..=2));
                for _ in 0..rng.gen_range(0..=2) {
                    let id = params[rng.gen_range(0..params.len())];
                    m = m.mul(&Poly::param(id));
                }
                p = p.add(&m);
            }
            p
        };
        let count = rng.gen_range(1..=4);
        let constraints = (0..count)
            .map(|_| ineq(poly(rng, &params), poly(rng, &params)))
            .collect();
        (constraints, params)
    }

    fn brute_force(
        constraints: &[ParamConstraint],
        params: &[ParamId],
        pool: &ParamPool,
        bound: Nat,
    ) -> Option<Valuation> {
        let bounds: Vec<Nat> = params.iter().map(|p| pool.bound(*p, bound)).collect();
        let mut current = vec![0u64; params.len()];
        loop {
            let mut v = Valuation::new();
            for (p, val) in params.iter().zip(&current) {
                v.set(*p, *val);
            }
            if verify(constraints, &v) {
                return Some(v);
            }
            let mut i = 0;
            loop {
                if i == current.len() {
                    return None;
                }
                if current[i] < bounds[i] {
                    current[i] += 1;
                    break;
                }
                current[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn agrees_with_brute_force_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(415);
        for _ in 0..50 {
            let mut pool = ParamPool::new();
            let (constraints, params) = random_system(&mut rng, &mut pool);
            let config = SolverConfig { max_coefficient: 2, ..SolverConfig::default() };
            let solved = solve(&constraints, &pool, &config);
            let brute = brute_force(&constraints, &params, &pool, 2);
            match (solved, brute) {
                (Ok(v), Some(_)) => assert!(verify(&constraints, &v)),
                (Err(SolveError::Unsat), None) => {}
                (s, b) => panic!("solver {s:?} disagrees with brute force {b:?}"),
            }
        }
    }
}
