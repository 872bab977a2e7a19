//! Proof search: ties interpretation, simplification, and solving into
//! termination proofs and constraint orientations.
//!
//! Rule removal iterates rounds: each round searches one interpretation
//! that weakly orients every remaining rule and strictly orients at least
//! one (chosen by binary strictness parameters), then removes the strictly
//! oriented rules. Constraint problems are oriented in a single shot.
//! Before anything is reported as success, every orientation is re-checked
//! symbolically and by randomized numeric evaluation; a proof is only ever
//! printed if all checks agree.

use crate::interp::{build_interpretation, rule_constraint, Interpretation};
use crate::oracle::check_samples;
use crate::parse::{ConstraintProblem, Relation};
use crate::poly::{LambdaPoly, Nat, ParamId, ParamPool};
use crate::simplify::{
    make_strictness_bits, simplify_to_ground, OrderingConstraint, Simplified,
    SimplifyConfig, Strictness,
};
use crate::solve::{solve, SolveError, SolverConfig};
use crate::term::Afs;
use crate::Setting;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Yes,
    Maybe,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Yes => write!(f, "YES"),
            Verdict::Maybe => write!(f, "MAYBE"),
        }
    }
}

/// Where satisfiability of the ground system is decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Internal,
    /// Export the ground systems as DIMACS files into this directory and
    /// stop; no external solver is invoked.
    DimacsDir(String),
}

#[derive(Debug, Clone)]
pub struct ProverConfig {
    pub max_coefficient: Nat,
    pub timeout: Duration,
    /// Random evaluations per orientation in the pre-report check.
    pub samples: usize,
    pub seed: u64,
    pub backend: Backend,
    /// Collect a rendering of every simplification step.
    pub trace: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            max_coefficient: 3,
            timeout: Duration::from_secs(60),
            samples: 500,
            seed: 0x5eed,
            backend: Backend::Internal,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolInterpretation {
    pub symbol: String,
    pub interpretation: String,
}

/// One successful search step: the interpretation found and what it
/// oriented strictly.
#[derive(Debug, Clone, Serialize)]
pub struct Round {
    pub index: usize,
    pub fallback: bool,
    pub interpretations: Vec<SymbolInterpretation>,
    pub strict: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProofOutcome {
    pub verdict: Verdict,
    pub mode: String,
    pub setting: Setting,
    pub rounds: Vec<Round>,
    /// Rules or requirements left unhandled when the verdict is MAYBE.
    pub remaining: Vec<String>,
    pub timed_out: bool,
    pub notes: Vec<String>,
    /// Simplification traces, one rendered line per step (only collected
    /// with `ProverConfig::trace`).
    #[serde(skip)]
    pub dumps: Vec<String>,
}

impl ProofOutcome {
    fn new(mode: &str, setting: Setting) -> Self {
        ProofOutcome {
            verdict: Verdict::Maybe,
            mode: mode.to_string(),
            setting,
            rounds: Vec::new(),
            remaining: Vec::new(),
            timed_out: false,
            notes: Vec::new(),
            dumps: Vec::new(),
        }
    }

    /// The textual proof. Deterministic: identical runs render
    /// byte-identical output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match (self.verdict, self.rounds.is_empty(), self.mode.as_str()) {
            (Verdict::Yes, true, _) => {
                out.push_str("YES (no rules)\n");
                return out;
            }
            (Verdict::Yes, false, "rule-removal") => {
                out.push_str("YES\n");
                out.push_str(
                    "Termination proof by polynomial interpretation (rule removal).\n",
                );
            }
            (Verdict::Yes, false, _) => {
                out.push_str("YES\n");
                out.push_str(&format!(
                    "Constraint problem oriented ({}).\n",
                    self.setting
                ));
            }
            (Verdict::Maybe, _, _) => {
                out.push_str("MAYBE\n");
                if self.timed_out {
                    out.push_str("Search aborted: timeout.\n");
                } else {
                    out.push_str(
                        "No interpretation within the search bounds orients the system.\n",
                    );
                }
            }
        }
        for round in &self.rounds {
            out.push('\n');
            if self.mode == "rule-removal" {
                out.push_str(&format!(
                    "Round {} ({} shapes):\n",
                    round.index,
                    if round.fallback { "fallback" } else { "default" }
                ));
            } else {
                out.push_str("Interpretation:\n");
            }
            for si in &round.interpretations {
                out.push_str(&format!("  J({}) = {}\n", si.symbol, si.interpretation));
            }
            let label = if self.mode == "rule-removal" {
                "Removed:"
            } else {
                "Strict:"
            };
            out.push_str(&format!("  {label}\n"));
            for r in &round.strict {
                out.push_str(&format!("    {r}\n"));
            }
        }
        if !self.remaining.is_empty() {
            out.push_str("\nRemaining:\n");
            for r in &self.remaining {
                out.push_str(&format!("  {r}\n"));
            }
        }
        if !self.notes.is_empty() {
            out.push_str("\nNotes:\n");
            for n in &self.notes {
                out.push_str(&format!("  {n}\n"));
            }
        }
        out
    }
}

/// Everything solved in one shape attempt.
struct Attempt {
    valuation: HashMap<ParamId, Nat>,
    pool: ParamPool,
    interp: Interpretation,
}

enum AttemptError {
    /// This shape family cannot orient the system; try another.
    NoSolution(Vec<String>),
    Timeout,
    /// The systems were exported instead of solved.
    Exported(Vec<String>),
}

fn render_trace(label: &str, simplified: &Simplified, pool: &ParamPool) -> Vec<String> {
    let mut out = Vec::new();
    out.push(format!("-- {label}"));
    for step in &simplified.trace {
        out.push(format!("[{}] {}", step.clause, step.consumed));
        for p in &step.produced {
            out.push(format!("    => {p}"));
        }
    }
    for c in &simplified.ground {
        out.push(format!("ground: {}", c.render(pool)));
    }
    for c in &simplified.stuck {
        out.push(format!("stuck: {}", c.render(pool)));
    }
    out
}

fn export_dimacs(
    dir: &str,
    label: &str,
    ground: &[crate::simplify::ParamConstraint],
    pool: &ParamPool,
    config: &ProverConfig,
) -> Vec<String> {
    let mut notes = Vec::new();
    match crate::dimacs::encode_dimacs(ground, pool, config.max_coefficient) {
        Ok(file) => {
            if let Err(e) = std::fs::create_dir_all(dir) {
                notes.push(format!("could not create {dir}: {e}"));
                return notes;
            }
            let cnf_path = format!("{dir}/{label}.cnf");
            let map_path = format!("{dir}/{label}.map");
            match std::fs::write(&cnf_path, &file.cnf) {
                Ok(()) => notes.push(format!(
                    "wrote {cnf_path} ({} variables, {} clauses)",
                    file.variables, file.clauses
                )),
                Err(e) => notes.push(format!("could not write {cnf_path}: {e}")),
            }
            match std::fs::write(&map_path, &file.map) {
                Ok(()) => notes.push(format!("wrote {map_path}")),
                Err(e) => notes.push(format!("could not write {map_path}: {e}")),
            }
        }
        Err(e) => notes.push(format!("{label}: CNF export failed: {e}")),
    }
    notes
}

/// Builds constraints for one shape family, simplifies, and solves.
fn attempt(
    constraints: Vec<OrderingConstraint>,
    mut pool: ParamPool,
    interp: Interpretation,
    label: &str,
    deadline: Instant,
    config: &ProverConfig,
    dumps: &mut Vec<String>,
) -> Result<Attempt, AttemptError> {
    let simplify_config = SimplifyConfig { trace: config.trace, ..Default::default() };
    let simplified = simplify_to_ground(constraints, &mut pool, &simplify_config);
    if config.trace {
        dumps.extend(render_trace(label, &simplified, &pool));
    }
    if !simplified.is_complete() {
        let notes = simplified
            .stuck
            .iter()
            .map(|c| format!("{label}: stuck constraint: {}", c.render(&pool)))
            .collect();
        return Err(AttemptError::NoSolution(notes));
    }
    if let Backend::DimacsDir(dir) = &config.backend {
        return Err(AttemptError::Exported(export_dimacs(
            dir,
            label,
            &simplified.ground,
            &pool,
            config,
        )));
    }
    let solver_config = SolverConfig {
        max_coefficient: config.max_coefficient,
        deadline: Some(deadline),
    };
    match solve(&simplified.ground, &pool, &solver_config) {
        Ok(valuation) => {
            // Full valuation: solver values, then pipeline fixings, then 0
            // for parameters that dropped out entirely.
            let mut full: HashMap<ParamId, Nat> = HashMap::new();
            for id in pool.ids() {
                full.insert(id, 0);
            }
            for (id, v) in &simplified.fixings {
                full.insert(*id, *v);
            }
            for (id, v) in &valuation.values {
                full.insert(*id, *v);
            }
            Ok(Attempt { valuation: full, pool, interp })
        }
        Err(SolveError::Unsat) => {
            Err(AttemptError::NoSolution(vec![format!(
                "{label}: no valuation within coefficient bound {}",
                config.max_coefficient
            )]))
        }
        Err(SolveError::Timeout) => Err(AttemptError::Timeout),
    }
}

/// Re-checks one solved constraint: symbolically (substituting the
/// valuation and simplifying to closed inequalities) and numerically
/// (random evaluation). Both must agree that it holds.
fn orientation_holds(
    constraint: &OrderingConstraint,
    strict: bool,
    valuation: &HashMap<ParamId, Nat>,
    deadline: Instant,
    config: &ProverConfig,
    rng: &mut ChaCha8Rng,
) -> bool {
    let lhs = constraint.lhs.subst_params(valuation);
    let rhs = constraint.rhs.subst_params(valuation);
    let check = if strict {
        OrderingConstraint::strict(lhs, rhs)
    } else {
        OrderingConstraint::weak(lhs, rhs)
    };
    // The substituted sides are parameter-free, so the only parameters in
    // the residual system are the ones simplification introduces while
    // abstracting function applications. Any value one of those may need
    // is bounded by the constants of the system itself.
    let mut pool = ParamPool::new();
    let simplified =
        simplify_to_ground(vec![check], &mut pool, &SimplifyConfig::default());
    if !simplified.is_complete() {
        return false;
    }
    let mut bound = config.max_coefficient;
    for c in &simplified.ground {
        for side in [&c.lhs, &c.rhs] {
            for m in side.monomials() {
                bound = bound.max(m.coeff);
            }
        }
    }
    let solver_config =
        SolverConfig { max_coefficient: bound, deadline: Some(deadline) };
    if solve(&simplified.ground, &pool, &solver_config).is_err() {
        return false;
    }
    check_samples(
        &constraint.lhs,
        &constraint.rhs,
        if strict { 1 } else { 0 },
        valuation,
        config.samples,
        rng,
    )
}

fn render_interpretations(
    interp: &Interpretation,
    valuation: &HashMap<ParamId, Nat>,
    pool: &ParamPool,
) -> Vec<SymbolInterpretation> {
    interp
        .per_symbol
        .iter()
        .map(|(symbol, lp)| {
            let fixed = LambdaPoly::new(lp.binders.clone(), lp.body.subst_params(valuation));
            SymbolInterpretation {
                symbol: symbol.clone(),
                interpretation: format!("{}", fixed.display(pool)),
            }
        })
        .collect()
}

/// Proves termination of an algebraic functional system by iterated rule
/// removal with polynomial interpretations.
pub fn prove_rule_removal(afs: &Afs, config: &ProverConfig) -> ProofOutcome {
    let mut outcome = ProofOutcome::new("rule-removal", Setting::RuleRemoval);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let deadline = Instant::now() + config.timeout;
    let mut rules = afs.rules.clone();
    if rules.is_empty() {
        outcome.verdict = Verdict::Yes;
        return outcome;
    }
    let mut round_index = 0;
    'rounds: while !rules.is_empty() {
        round_index += 1;
        let mut shape_notes: Vec<String> = Vec::new();
        for fallback in [false, true] {
            if Instant::now() >= deadline {
                outcome.timed_out = true;
                break 'rounds;
            }
            let label = format!(
                "round {round_index} {} shapes",
                if fallback { "fallback" } else { "default" }
            );
            let mut pool = ParamPool::new();
            let interp = match build_interpretation(
                &afs.signature,
                &BTreeSet::new(),
                Setting::RuleRemoval,
                fallback,
                &mut pool,
            ) {
                Ok(i) => i,
                Err(e) => {
                    shape_notes.push(format!("{label}: {e}"));
                    continue;
                }
            };
            let bits = match make_strictness_bits(rules.len(), &mut pool) {
                Ok(b) => b,
                Err(e) => {
                    shape_notes.push(format!("{label}: {e}"));
                    continue;
                }
            };
            let mut constraints = Vec::with_capacity(rules.len() + 1);
            let mut build_failed = false;
            for (rule, bit) in rules.iter().zip(&bits.bits) {
                match rule_constraint(
                    &rule.lhs,
                    &rule.rhs,
                    &interp,
                    Strictness::Bit(*bit),
                    &HashMap::new(),
                ) {
                    Ok(c) => constraints.push(c),
                    Err(e) => {
                        shape_notes.push(format!("{label}: {e}"));
                        build_failed = true;
                        break;
                    }
                }
            }
            if build_failed {
                continue;
            }
            let rule_constraints = constraints.clone();
            constraints.push(bits.sum.clone());
            constraints.extend(interp.side_ordering_constraints());
            match attempt(
                constraints,
                pool,
                interp,
                &label,
                deadline,
                config,
                &mut outcome.dumps,
            ) {
                Ok(found) => {
                    let mut strict_rules = Vec::new();
                    let mut gates_ok = true;
                    for (i, bit) in bits.bits.iter().enumerate() {
                        let strict = found.valuation.get(bit) == Some(&1);
                        if !orientation_holds(
                            &rule_constraints[i],
                            strict,
                            &found.valuation,
                            deadline,
                            config,
                            &mut rng,
                        ) {
                            shape_notes.push(format!(
                                "{label}: post-check rejected the orientation of {} -> {}",
                                rules[i].lhs, rules[i].rhs
                            ));
                            gates_ok = false;
                            break;
                        }
                        if strict {
                            strict_rules.push(i);
                        }
                    }
                    if !gates_ok || strict_rules.is_empty() {
                        continue;
                    }
                    outcome.rounds.push(Round {
                        index: round_index,
                        fallback,
                        interpretations: render_interpretations(
                            &found.interp,
                            &found.valuation,
                            &found.pool,
                        ),
                        strict: strict_rules
                            .iter()
                            .map(|&i| format!("{} -> {}", rules[i].lhs, rules[i].rhs))
                            .collect(),
                    });
                    let keep: Vec<_> = rules
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !strict_rules.contains(i))
                        .map(|(_, r)| r.clone())
                        .collect();
                    rules = keep;
                    continue 'rounds;
                }
                Err(AttemptError::NoSolution(notes)) => {
                    shape_notes.extend(notes);
                }
                Err(AttemptError::Timeout) => {
                    outcome.timed_out = true;
                    break 'rounds;
                }
                Err(AttemptError::Exported(notes)) => {
                    outcome.notes.extend(notes);
                    outcome.notes.push(
                        "ground systems exported; rerun with the internal backend to search for a proof"
                            .to_string(),
                    );
                    break 'rounds;
                }
            }
        }
        // Neither shape family made progress.
        outcome.notes.extend(shape_notes);
        break;
    }
    if rules.is_empty() {
        outcome.verdict = Verdict::Yes;
    } else {
        outcome.remaining = rules
            .iter()
            .map(|r| format!("{} -> {}", r.lhs, r.rhs))
            .collect();
    }
    outcome
}

/// Orients a constraint problem in a single search: every requirement must
/// be satisfied, `>?` requirements via strictness bits of which at least
/// one must be strict.
pub fn orient(problem: &ConstraintProblem, config: &ProverConfig) -> ProofOutcome {
    let mut outcome = ProofOutcome::new("orient", problem.setting);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let deadline = Instant::now() + config.timeout;
    if problem.requirements.is_empty() {
        outcome.verdict = Verdict::Yes;
        return outcome;
    }
    let oriented_count = problem
        .requirements
        .iter()
        .filter(|r| r.relation == Relation::Oriented)
        .count();
    let mut shape_notes = Vec::new();
    for fallback in [false, true] {
        if Instant::now() >= deadline {
            outcome.timed_out = true;
            break;
        }
        let label = format!(
            "{} shapes",
            if fallback { "fallback" } else { "default" }
        );
        let mut pool = ParamPool::new();
        let interp = match build_interpretation(
            &problem.signature,
            &problem.subterm_constants,
            problem.setting,
            fallback,
            &mut pool,
        ) {
            Ok(i) => i,
            Err(e) => {
                shape_notes.push(format!("{label}: {e}"));
                continue;
            }
        };
        let bits = if oriented_count > 0 {
            match make_strictness_bits(oriented_count, &mut pool) {
                Ok(b) => Some(b),
                Err(e) => {
                    shape_notes.push(format!("{label}: {e}"));
                    continue;
                }
            }
        } else {
            None
        };
        let mut bit_iter = bits.iter().flat_map(|b| b.bits.iter()).copied();
        let mut constraints = Vec::new();
        let mut requirement_info: Vec<(Strictness, usize)> = Vec::new();
        let mut build_failed = false;
        for (i, req) in problem.requirements.iter().enumerate() {
            let strictness = match req.relation {
                Relation::Strict => Strictness::Always,
                Relation::Weak => Strictness::Never,
                Relation::Oriented => Strictness::Bit(
                    bit_iter.next().expect("one bit per oriented requirement"),
                ),
            };
            match rule_constraint(&req.lhs, &req.rhs, &interp, strictness, &HashMap::new())
            {
                Ok(c) => {
                    requirement_info.push((strictness, i));
                    constraints.push(c);
                }
                Err(e) => {
                    shape_notes.push(format!("{label}: requirement {}: {e}", i + 1));
                    build_failed = true;
                    break;
                }
            }
        }
        if build_failed {
            continue;
        }
        let requirement_constraints = constraints.clone();
        if let Some(b) = &bits {
            constraints.push(b.sum.clone());
        }
        constraints.extend(interp.side_ordering_constraints());
        match attempt(
            constraints,
            pool,
            interp,
            &label,
            deadline,
            config,
            &mut outcome.dumps,
        ) {
            Ok(found) => {
                let mut strict_reqs = Vec::new();
                let mut gates_ok = true;
                for (k, (strictness, idx)) in requirement_info.iter().enumerate() {
                    let strict = match strictness {
                        Strictness::Always => true,
                        Strictness::Never => false,
                        Strictness::Bit(o) => found.valuation.get(o) == Some(&1),
                    };
                    if !orientation_holds(
                        &requirement_constraints[k],
                        strict,
                        &found.valuation,
                        deadline,
                        config,
                        &mut rng,
                    ) {
                        let req = &problem.requirements[*idx];
                        shape_notes.push(format!(
                            "{label}: post-check rejected {} {} {}",
                            req.lhs,
                            req.relation.symbol(),
                            req.rhs
                        ));
                        gates_ok = false;
                        break;
                    }
                    if strict {
                        strict_reqs.push(*idx);
                    }
                }
                if !gates_ok {
                    continue;
                }
                outcome.verdict = Verdict::Yes;
                outcome.rounds.push(Round {
                    index: 1,
                    fallback,
                    interpretations: render_interpretations(
                        &found.interp,
                        &found.valuation,
                        &found.pool,
                    ),
                    strict: strict_reqs
                        .iter()
                        .map(|&i| {
                            let req = &problem.requirements[i];
                            format!("{} {} {}", req.lhs, req.relation.symbol(), req.rhs)
                        })
                        .collect(),
                });
                return outcome;
            }
            Err(AttemptError::NoSolution(notes)) => {
                shape_notes.extend(notes);
            }
            Err(AttemptError::Timeout) => {
                outcome.timed_out = true;
                break;
            }
            Err(AttemptError::Exported(notes)) => {
                outcome.notes.extend(notes);
                outcome.notes.push(
                    "ground systems exported; rerun with the internal backend to search for a proof"
                        .to_string(),
                );
                break;
            }
        }
    }
    outcome.notes.extend(shape_notes);
    outcome.remaining = problem
        .requirements
        .iter()
        .map(|r| format!("{} {} {}", r.lhs, r.relation.symbol(), r.rhs))
        .collect();
    outcome
}
