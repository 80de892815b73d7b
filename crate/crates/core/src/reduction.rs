//! Reduction from 1-in-3-SAT to congruence-distance computation.
//!
//! Every variable owns one axis of `R^k`. A clause `Ψ` over variables `I`
//! becomes a 9-state gadget: six states `±6e_i` against `6e_i` that pin the
//! matrix to sign flips on `I`, and three states encoding the implicit
//! conjunctions `γ_j = l_j − Σ_{i≠j} l_i` against three copies of `e_I`.
//! Under any orthogonal `M` a gadget costs at least `36 + 4√2`, with equality
//! exactly at sign matrices whose induced assignment is a 1-in-3 model of
//! `Ψ`. Appending the negated series removes any benefit from translation.

use std::fmt::Write as _;

use serde::Serialize;

use crate::congruence::{
    boolean_minimum, congruence_distance_upper, flipped_distance, SolverConfig, BOOLEAN_K_MAX,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::series::TimeSeries;

/// Minimum per-clause cost `36 + 4√2` without translation.
pub const CLAUSE_MINIMUM: f64 = 36.0 + 4.0 * std::f64::consts::SQRT_2;
/// Per-clause cost `72 + 8√2` of the mirrored series.
pub const MIRRORED_CLAUSE_MINIMUM: f64 = 2.0 * CLAUSE_MINIMUM;
/// Absolute tolerance when matching the boolean minimum against its target.
pub const TARGET_TOL: f64 = 1e-6;
/// Largest variable count for assignment enumeration.
pub const BRUTE_FORCE_K_MAX: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Literal {
    /// Zero-based variable index (`V_{var+1}`).
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal {
            var,
            positive: true,
        }
    }

    pub fn neg(var: usize) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    /// Truth value under an assignment mask (bit `var` set means true).
    #[inline]
    pub fn holds(self, assignment: u64) -> bool {
        (assignment >> self.var & 1 == 1) == self.positive
    }

    /// `θ(L)`: `+1` for a positive literal, `−1` for a negated one.
    fn sign(self) -> f64 {
        if self.positive {
            1.0
        } else {
            -1.0
        }
    }
}

/// Disjunction of three literals over distinct variables, kept sorted by
/// variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Clause([Literal; 3]);

impl Clause {
    pub fn new(mut literals: [Literal; 3]) -> Result<Self> {
        literals.sort();
        if literals[0].var == literals[1].var || literals[1].var == literals[2].var {
            return Err(Error::input(format!(
                "clause repeats a variable: {literals:?}"
            )));
        }
        Ok(Clause(literals))
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.0
    }

    /// Number of satisfied literals under `assignment`.
    #[inline]
    pub fn satisfied(&self, assignment: u64) -> usize {
        self.0.iter().filter(|l| l.holds(assignment)).count()
    }
}

/// Conjunction of 3-clauses over variables `0..num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::input("formula needs at least one clause"));
        }
        if let Some(l) = clauses
            .iter()
            .flat_map(|c| c.0.iter())
            .find(|l| l.var >= num_vars)
        {
            return Err(Error::input(format!(
                "variable {} out of range for {num_vars} variables",
                l.var + 1
            )));
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Exactly one literal true in every clause.
    pub fn is_one_in_three_model(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| c.satisfied(assignment) == 1)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c.0 {
                let v = (l.var + 1) as i64;
                let _ = write!(out, "{} ", if l.positive { v } else { -v });
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Parses DIMACS CNF restricted to clauses of three distinct variables.
/// Comment lines (`c …`) are skipped; a `%` line ends the input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(line_no, "duplicate header"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad variable count {v:?}")))?;
                    let c = c
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad clause count {c:?}")))?;
                    header = Some((v, c));
                }
                _ => return Err(Error::parse(line_no, format!("malformed header {line:?}"))),
            }
            continue;
        }
        let (num_vars, _) =
            header.ok_or_else(|| Error::parse(line_no, "clause before `p cnf` header"))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad literal {tok:?}")))?;
            if lit != 0 {
                if lit.unsigned_abs() as usize > num_vars {
                    return Err(Error::parse(
                        line_no,
                        format!("literal {lit} exceeds {num_vars} variables"),
                    ));
                }
                pending.push(lit);
                continue;
            }
            if pending.len() != 3 {
                return Err(Error::parse(
                    line_no,
                    format!("clause has {} literals, expected 3", pending.len()),
                ));
            }
            let lits = [0, 1, 2].map(|i| {
                let l = pending[i];
                Literal {
                    var: l.unsigned_abs() as usize - 1,
                    positive: l > 0,
                }
            });
            let clause = Clause::new(lits).map_err(|_| {
                Error::parse(line_no, format!("clause {pending:?} repeats a variable"))
            })?;
            clauses.push(clause);
            pending.clear();
        }
    }

    let (num_vars, declared) =
        header.ok_or_else(|| Error::parse(last_line.max(1), "missing `p cnf` header"))?;
    if !pending.is_empty() {
        return Err(Error::parse(last_line, "unterminated clause (missing 0)"));
    }
    if declared != clauses.len() {
        return Err(Error::parse(
            last_line,
            format!(
                "header declares {declared} clauses, found {}",
                clauses.len()
            ),
        ));
    }
    CnfFormula::new(num_vars, clauses).map_err(|e| Error::parse(last_line, e.to_string()))
}

/// The 9-state series pair of one clause.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseGadget {
    /// `⊗_{i∈I} (6e_i, −6e_i)`.
    pub s_prime: TimeSeries,
    /// `⊗_{i∈I} (6e_i, 6e_i)`.
    pub t_prime: TimeSeries,
    /// `(γ_j)_{j∈I}` with `γ_j = l_j − Σ_{i∈I∖{j}} l_i`.
    pub s_clause: TimeSeries,
    /// `(e_I, e_I, e_I)`.
    pub t_clause: TimeSeries,
}

impl ClauseGadget {
    /// `S'_Ψ × S_Ψ`.
    pub fn s(&self) -> TimeSeries {
        self.s_prime.concat(&self.s_clause).expect("same dimension")
    }

    /// `T'_Ψ × T_Ψ`.
    pub fn t(&self) -> TimeSeries {
        self.t_prime.concat(&self.t_clause).expect("same dimension")
    }
}

pub fn embed_clause(clause: &Clause, k: usize) -> Result<ClauseGadget> {
    if let Some(l) = clause.0.iter().find(|l| l.var >= k) {
        return Err(Error::input(format!(
            "clause variable {} out of range for k = {k}",
            l.var + 1
        )));
    }
    let axis = |i: usize, scale: f64| {
        let mut e = vec![0.0; k];
        e[i] = scale;
        e
    };
    let lits = clause.0;
    let mut s_prime = Vec::with_capacity(6);
    let mut t_prime = Vec::with_capacity(6);
    for l in lits {
        s_prime.push(axis(l.var, 6.0));
        s_prime.push(axis(l.var, -6.0));
        t_prime.push(axis(l.var, 6.0));
        t_prime.push(axis(l.var, 6.0));
    }
    let s_clause: Vec<Vec<f64>> = lits
        .iter()
        .map(|lj| {
            let mut g = vec![0.0; k];
            for li in lits {
                let sign = if li.var == lj.var { 1.0 } else { -1.0 };
                g[li.var] = sign * li.sign();
            }
            g
        })
        .collect();
    let mut e_i = vec![0.0; k];
    for l in lits {
        e_i[l.var] = 1.0;
    }
    Ok(ClauseGadget {
        s_prime: TimeSeries::new(&s_prime)?,
        t_prime: TimeSeries::new(&t_prime)?,
        s_clause: TimeSeries::new(&s_clause)?,
        t_clause: TimeSeries::new(&[e_i.clone(), e_i.clone(), e_i])?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionInstance {
    pub formula: CnfFormula,
    /// Concatenated clause gadgets `S_Φ`.
    pub s_plain: TimeSeries,
    /// Concatenated clause gadgets `T_Φ`.
    pub t_plain: TimeSeries,
    /// `S_Φ × −S_Φ`.
    pub s_series: TimeSeries,
    /// `T_Φ × −T_Φ`.
    pub t_series: TimeSeries,
    /// `m·(72 + 8√2)`.
    pub target: f64,
    /// `m·(36 + 4√2)`.
    pub half_target: f64,
}

pub fn build_reduction(formula: &CnfFormula) -> ReductionInstance {
    let k = formula.num_vars;
    let mut s = Vec::with_capacity(9 * k * formula.clauses.len());
    let mut t = Vec::with_capacity(s.capacity());
    for clause in &formula.clauses {
        let g = embed_clause(clause, k).expect("formula invariants hold");
        s.extend_from_slice(g.s().as_flat());
        t.extend_from_slice(g.t().as_flat());
    }
    let s_plain = TimeSeries::from_flat(k, s).expect("non-empty");
    let t_plain = TimeSeries::from_flat(k, t).expect("non-empty");
    let m = formula.clauses.len() as f64;
    ReductionInstance {
        formula: formula.clone(),
        s_series: s_plain.mirrored(),
        t_series: t_plain.mirrored(),
        s_plain,
        t_plain,
        target: m * MIRRORED_CLAUSE_MINIMUM,
        half_target: m * CLAUSE_MINIMUM,
    }
}

/// Assignment for a sign matrix: `V_i` is true iff axis `i` is not flipped.
pub fn assignment_from_flips(flips: u64, k: usize) -> Vec<bool> {
    (0..k).map(|i| flips >> i & 1 == 0).collect()
}

/// Inverse of [`assignment_from_flips`].
pub fn flips_from_assignment(assignment: &[bool]) -> u64 {
    assignment
        .iter()
        .enumerate()
        .filter(|(_, &v)| !v)
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

fn mask_to_assignment(mask: u64, k: usize) -> Vec<bool> {
    (0..k).map(|i| mask >> i & 1 == 1).collect()
}

/// Searches assignments in increasing order of `Σ α(V_i)·2^(i−1)`, so the
/// first model found favours setting low-index variables.
pub fn brute_force_one_in_three(formula: &CnfFormula) -> Result<Option<Vec<bool>>> {
    brute_force_one_in_three_with(formula, Execution::default())
}

pub fn brute_force_one_in_three_with(
    formula: &CnfFormula,
    exec: Execution,
) -> Result<Option<Vec<bool>>> {
    let k = formula.num_vars;
    if k > BRUTE_FORCE_K_MAX {
        return Err(Error::capability(format!(
            "assignment enumeration limited to {BRUTE_FORCE_K_MAX} variables, got {k}"
        )));
    }
    Ok(
        exec::find_first(exec, 1u64 << k, |a| formula.is_one_in_three_model(a))
            .map(|a| mask_to_assignment(a, k)),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub num_vars: usize,
    pub num_clauses: usize,
    /// Minimum of `d_1(S_Φ, M·T_Φ)` over all sign matrices.
    pub boolean_minimum: f64,
    pub half_target: f64,
    pub target: f64,
    /// `|boolean_minimum − half_target| ≤ 1e−6`.
    pub matches: bool,
    pub satisfiable: bool,
    /// First 1-in-3 model found by enumeration.
    pub model: Option<Vec<bool>>,
    /// Flip mask of the minimizing sign matrix.
    pub witness_flips: u64,
    /// Assignment induced by the minimizing sign matrix.
    pub witness_assignment: Vec<bool>,
    /// `d_1(S̄_Φ, M*·T̄_Φ)`, equal to twice the boolean minimum.
    pub mirrored_value: f64,
    /// Upper bound from the iterative solver on the mirrored pair, if run.
    pub spot_check_value: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Also run the iterative solver over the full orthogonal group and check
    /// it never undercuts the target.
    pub spot_check: Option<SolverConfig>,
    pub exec: Execution,
}

/// Checks the reduction's equivalence on one formula by exhaustive search.
pub fn verify_reduction(instance: &ReductionInstance) -> Result<VerificationReport> {
    verify_reduction_with(instance, &VerifyOptions::default())
}

pub fn verify_reduction_with(
    instance: &ReductionInstance,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let formula = &instance.formula;
    let k = formula.num_vars;
    if k > BOOLEAN_K_MAX {
        return Err(Error::capability(format!(
            "verification limited to k <= {BOOLEAN_K_MAX}, got {k}"
        )));
    }
    let fail = |message: String| Error::Verification {
        message,
        counterexample: Some(formula.to_dimacs()),
    };

    let (b, flips) = boolean_minimum(&instance.s_plain, &instance.t_plain, opts.exec)?;
    if b < instance.half_target - TARGET_TOL {
        return Err(fail(format!(
            "boolean minimum {b} below the lower bound {}",
            instance.half_target
        )));
    }
    let matches = (b - instance.half_target).abs() <= TARGET_TOL;
    let model = brute_force_one_in_three_with(formula, opts.exec)?;
    if matches != model.is_some() {
        return Err(fail(format!(
            "boolean minimum {b} (match = {matches}) disagrees with 1-in-3 satisfiability ({})",
            model.is_some()
        )));
    }
    let witness_assignment = assignment_from_flips(flips, k);
    if matches && !formula.is_one_in_three_model(!flips & ((1u64 << k) - 1)) {
        return Err(fail(
            "minimizing sign matrix does not induce a 1-in-3 model".into(),
        ));
    }

    let mirrored_value = flipped_distance(&instance.s_series, &instance.t_series, flips);
    if (mirrored_value - 2.0 * b).abs() > 1e-9 {
        return Err(fail(format!(
            "mirrored value {mirrored_value} differs from twice the minimum {}",
            2.0 * b
        )));
    }

    let spot_check_value = match &opts.spot_check {
        Some(cfg) => {
            let r = congruence_distance_upper(&instance.s_series, &instance.t_series, 1.0, cfg)?;
            if r.value < instance.target - TARGET_TOL {
                return Err(fail(format!(
                    "iterative solver reached {} below the target {}",
                    r.value, instance.target
                )));
            }
            Some(r.value)
        }
        None => None,
    };

    Ok(VerificationReport {
        num_vars: k,
        num_clauses: formula.clauses.len(),
        boolean_minimum: b,
        half_target: instance.half_target,
        target: instance.target,
        matches,
        satisfiable: model.is_some(),
        model,
        witness_flips: flips,
        witness_assignment,
        mirrored_value,
        spot_check_value,
    })
}
