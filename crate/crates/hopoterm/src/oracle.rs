//! Randomized numeric checking of polynomial inequalities.
//!
//! Before the prover reports success, every claimed orientation is
//! re-evaluated at many random points: base variables get small random
//! naturals, functional variables get random weakly monotonic functions
//! (built from sums, products, max, and constants, so monotonicity holds
//! by construction). A single counterexample refutes the orientation; the
//! check is a tripwire against bugs anywhere in the pipeline, not a proof.

use crate::poly::{Assignment, Atom, LambdaPoly, Nat, ParamId, Poly, Value};
use crate::term::SimpleType;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};

/// A small random natural, biased toward the boundary values 0 and 1.
pub fn random_base_value(rng: &mut ChaCha8Rng) -> Nat {
    match rng.gen_range(0..8u32) {
        0 | 1 => 0,
        2 | 3 => 1,
        n => n as Nat,
    }
}

/// A random weakly monotonic function of `arity` base arguments: a
/// polynomial with nonnegative coefficients, optionally wrapped in a max
/// with another such polynomial.
pub fn random_monotone_fn(arity: usize, rng: &mut ChaCha8Rng) -> LambdaPoly {
    let binders: Vec<(String, SimpleType)> = (1..=arity)
        .map(|i| (format!("z{i}"), SimpleType::base("n")))
        .collect();
    let small_poly = |rng: &mut ChaCha8Rng| {
        let mut p = Poly::constant(rng.gen_range(0..=2));
        for _ in 0..rng.gen_range(1..=3) {
            let mut term = Poly::constant(rng.gen_range(0..=2));
            if arity > 0 {
                for _ in 0..rng.gen_range(0..=2u32) {
                    let z = rng.gen_range(1..=arity);
                    term = term.mul(&Poly::var(format!("z{z}")));
                }
            }
            p = p.add(&term);
        }
        p
    };
    let mut body = small_poly(rng);
    if arity > 0 && rng.gen_bool(0.3) {
        body = Poly::max_of(body, small_poly(rng));
    }
    LambdaPoly::new(binders, body)
}

fn collect_var_arities(p: &Poly, out: &mut BTreeMap<String, usize>) {
    for m in p.monomials() {
        for atom in &m.atoms {
            collect_atom(atom, out);
        }
    }
}

fn collect_atom(atom: &Atom, out: &mut BTreeMap<String, usize>) {
    match atom {
        Atom::Var(n) => {
            out.entry(n.clone()).or_insert(0);
        }
        Atom::FunApp(head, args) => {
            out.insert(head.clone(), args.len());
            for arg in args {
                match arg {
                    crate::poly::PolyArg::Base(p) => collect_var_arities(p, out),
                    crate::poly::PolyArg::Fun(f) => collect_var_arities(&f.body, out),
                }
            }
        }
        Atom::Max(l, r) => {
            collect_var_arities(l, out);
            collect_var_arities(r, out);
        }
    }
}

/// Random values for every free name of the given polynomials; arities are
/// inferred from how each name is used.
pub fn random_values_for(
    polys: &[&Poly],
    rng: &mut ChaCha8Rng,
) -> HashMap<String, Value> {
    let mut arities = BTreeMap::new();
    for p in polys {
        collect_var_arities(p, &mut arities);
    }
    arities
        .into_iter()
        .map(|(name, arity)| {
            let value = if arity == 0 {
                Value::constant(random_base_value(rng))
            } else {
                Value::Fun(random_monotone_fn(arity, rng))
            };
            (name, value)
        })
        .collect()
}

/// Evaluates `lhs ≥ rhs + delta` at `samples` random points under the
/// given parameter valuation. Any evaluation error counts as a failure.
pub fn check_samples(
    lhs: &Poly,
    rhs: &Poly,
    delta: Nat,
    params: &HashMap<ParamId, Nat>,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> bool {
    let l0 = lhs.subst_params(params);
    let r0 = rhs.subst_params(params);
    for _ in 0..samples {
        let mut assignment = Assignment::default();
        assignment.vars = random_values_for(&[&l0, &r0], rng);
        let (Ok(l), Ok(r)) = (
            l0.eval_numeric(&assignment),
            r0.eval_numeric(&assignment),
        ) else {
            return false;
        };
        if l < r + delta {
            return false;
        }
    }
    true
}
