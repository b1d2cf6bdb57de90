//! Constructive ambiguity-witness search for total associative operations,
//! output-length bound measurement, and the finite lower-bound demo.
//!
//! The core driver realizes the inductive argument that no total
//! associative function is O(1)-to-one: from a level-k witness it draws
//! k²+k+1 fresh strings, and either some product escapes the known factor
//! set (growing the witness by one factor on the same side) or the
//! pigeonhole principle hands over an element hit by at least k+1 of the
//! fresh strings (an opposite-side witness). Both branches also extend a
//! short factor chain whose iterated product is the witness image.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::ambiguity::{preimage_census, BinaryOp, OpError};
use crate::strings::BitString;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Condition (a): factors appear on the left of some preimage pair.
    Left,
    /// Condition (b): factors appear on the right.
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// A constructive high-ambiguity witness: `factors.len()` distinct strings,
/// each different from `image`, that occur on `side` of a preimage pair of
/// `image`, with the pair completed by the matching partner. `chain` is a
/// factor chain whose iterated product equals `image`.
#[derive(Clone, Debug)]
pub struct AmbiguityWitness {
    pub image: BitString,
    pub side: Side,
    pub factors: Vec<BitString>,
    pub partners: Vec<BitString>,
    pub chain: Vec<BitString>,
}

impl AmbiguityWitness {
    /// One JSON object per witness, bitstrings in literal format.
    pub fn to_json(&self) -> String {
        let lits = |v: &[BitString]| v.iter().map(BitString::literal).collect::<Vec<_>>();
        json!({
            "t": self.image.literal(),
            "side": self.side.label(),
            "factors": lits(&self.factors),
            "partners": lits(&self.partners),
            "chain": lits(&self.chain),
        })
        .to_string()
    }
}

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("operation failed an associativity spot-check: {0}")]
    NotAssociative(String),
    #[error("operation is not declared associative")]
    NotDeclared,
    #[error("search budget exhausted: {message}")]
    Budget { message: String, best: Option<Box<AmbiguityWitness>> },
    #[error(transparent)]
    Op(#[from] OpError),
}

/// Applies `op` while charging a shared application budget.
struct BudgetedOp<'a> {
    op: &'a dyn BinaryOp,
    remaining: u64,
}

impl<'a> BudgetedOp<'a> {
    fn apply(&mut self, a: &BitString, b: &BitString) -> Result<BitString, ProbeError> {
        if self.remaining == 0 {
            return Err(ProbeError::Budget {
                message: "operation application budget exhausted".into(),
                best: None,
            });
        }
        self.remaining -= 1;
        Ok(self.op.apply(a, b)?)
    }
}

fn random_string(rng: &mut ChaCha8Rng, max_len: usize) -> BitString {
    let len = rng.gen_range(0..=max_len);
    let mut s = BitString::empty();
    for _ in 0..len {
        s.push_bit(u8::from(rng.gen_bool(0.5)));
    }
    s
}

/// Spot-checks associativity on 32 seeded random triples; a refusal gate,
/// not a proof.
pub fn spot_check_associativity(op: &dyn BinaryOp) -> Result<(), ProbeError> {
    if !op.is_associative() {
        return Err(ProbeError::NotDeclared);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..32 {
        let a = random_string(&mut rng, 6);
        let b = random_string(&mut rng, 6);
        let c = random_string(&mut rng, 6);
        let lhs = op.apply(&op.apply(&a, &b)?, &c)?;
        let rhs = op.apply(&a, &op.apply(&b, &c)?)?;
        if lhs != rhs {
            return Err(ProbeError::NotAssociative(format!(
                "({a} op {b}) op {c} = {lhs} but {a} op ({b} op {c}) = {rhs}"
            )));
        }
    }
    Ok(())
}

/// Iterated product of a nonempty chain (parenthesization is immaterial for
/// the associative ops this module accepts).
pub fn chain_product(op: &dyn BinaryOp, chain: &[BitString]) -> Result<BitString, OpError> {
    let mut acc = chain[0].clone();
    for s in &chain[1..] {
        acc = op.apply(&acc, s)?;
    }
    Ok(acc)
}

/// Structural re-verification of a witness; `Err` names the violation.
pub fn check_witness(op: &dyn BinaryOp, w: &AmbiguityWitness) -> Result<(), String> {
    if w.factors.len() != w.partners.len() {
        return Err("factor/partner arity mismatch".into());
    }
    let distinct: BTreeSet<&BitString> = w.factors.iter().collect();
    if distinct.len() != w.factors.len() {
        return Err("factors are not distinct".into());
    }
    for (x, y) in w.factors.iter().zip(&w.partners) {
        if *x == w.image {
            return Err(format!("factor {x} equals the image"));
        }
        let applied = match w.side {
            Side::Left => op.apply(x, y),
            Side::Right => op.apply(y, x),
        }
        .map_err(|e| e.to_string())?;
        if applied != w.image {
            return Err(format!(
                "pair ({x},{y}) re-applies to {applied}, expected image {}",
                w.image
            ));
        }
    }
    if w.chain.is_empty() {
        return Err("empty factor chain".into());
    }
    let prod = chain_product(op, &w.chain).map_err(|e| e.to_string())?;
    if prod != w.image {
        return Err(format!("chain product {prod} differs from image {}", w.image));
    }
    Ok(())
}

/// Streams the shortlex-shortest strings outside `excluded`.
fn fresh_strings(excluded: &BTreeSet<BitString>) -> impl Iterator<Item = BitString> + '_ {
    (0u64..).map(BitString::from_rank_u64).filter(move |s| !excluded.contains(s))
}

fn base_witness(
    op: &mut BudgetedOp<'_>,
    x: BitString,
    y: BitString,
) -> Result<AmbiguityWitness, ProbeError> {
    debug_assert_ne!(x, y);
    let t = op.apply(&x, &y)?;
    let chain = vec![x.clone(), y.clone()];
    if x != t {
        Ok(AmbiguityWitness { image: t, side: Side::Left, factors: vec![x], partners: vec![y], chain })
    } else {
        // x = t forces y ≠ t, because x ≠ y
        Ok(AmbiguityWitness { image: t, side: Side::Right, factors: vec![y], partners: vec![x], chain })
    }
}

/// One induction step: grows the witness either by the escape branch (same
/// side, one more factor) or the pigeonhole branch (opposite side, at least
/// k+1 factors).
fn grow(op: &mut BudgetedOp<'_>, w: AmbiguityWitness) -> Result<AmbiguityWitness, ProbeError> {
    let k = w.factors.len();
    let mut excluded: BTreeSet<BitString> = w.factors.iter().cloned().collect();
    excluded.insert(w.image.clone());

    // the escape branch usually fires within the first few draws, so the
    // fresh strings are streamed rather than materialized up front
    let mut fresh = Vec::new();
    let mut products = Vec::new();
    for s in fresh_strings(&excluded).take(k * k + k + 1) {
        let u = match w.side {
            Side::Left => op.apply(&w.image, &s)?,
            Side::Right => op.apply(&s, &w.image)?,
        };
        if !excluded.contains(&u) {
            // escape branch: every old factor x_j still reaches u through
            // the rebalanced pair, and the old image joins the factor set
            let mut factors = Vec::with_capacity(k + 1);
            let mut partners = Vec::with_capacity(k + 1);
            for (x, y) in w.factors.iter().zip(&w.partners) {
                factors.push(x.clone());
                partners.push(match w.side {
                    Side::Left => op.apply(y, &s)?,
                    Side::Right => op.apply(&s, y)?,
                });
            }
            factors.push(w.image.clone());
            partners.push(s.clone());
            let mut chain = w.chain.clone();
            match w.side {
                Side::Left => chain.push(s),
                Side::Right => chain.insert(0, s),
            }
            return Ok(AmbiguityWitness { image: u, side: w.side, factors, partners, chain });
        }
        fresh.push(s);
        products.push(u);
    }

    // pigeonhole branch: every product landed in the k+1 excluded strings,
    // so some t' absorbs at least k+1 distinct fresh strings
    let target = excluded
        .iter()
        .find(|t| products.iter().filter(|u| u == t).count() >= k + 1)
        .expect("pigeonhole over k^2+k+1 draws into k+1 cells")
        .clone();
    let mut factors = Vec::new();
    let mut partners = Vec::new();
    let mut hit = None;
    for (s, u) in fresh.iter().zip(&products) {
        if *u == target {
            factors.push(s.clone());
            partners.push(w.image.clone());
            hit.get_or_insert_with(|| s.clone());
        }
    }
    let mut chain = w.chain.clone();
    match w.side {
        Side::Left => chain.push(hit.unwrap()),
        Side::Right => chain.insert(0, hit.unwrap()),
    }
    Ok(AmbiguityWitness { image: target, side: w.side.flip(), factors, partners, chain })
}

fn trivial_witness(op: &mut BudgetedOp<'_>) -> Result<AmbiguityWitness, ProbeError> {
    let _ = op;
    Ok(AmbiguityWitness {
        image: BitString::empty(),
        side: Side::Left,
        factors: Vec::new(),
        partners: Vec::new(),
        chain: vec![BitString::empty()],
    })
}

fn search(
    op: &dyn BinaryOp,
    k: usize,
    base: (BitString, BitString),
    budget: u64,
) -> Result<AmbiguityWitness, ProbeError> {
    spot_check_associativity(op)?;
    let mut bop = BudgetedOp { op, remaining: budget };
    if k == 0 {
        return trivial_witness(&mut bop);
    }
    let mut w = base_witness(&mut bop, base.0, base.1)?;
    while w.factors.len() < k {
        w = match grow(&mut bop, w.clone()) {
            Ok(next) => next,
            Err(ProbeError::Budget { message, .. }) => {
                return Err(ProbeError::Budget { message, best: Some(Box::new(w)) })
            }
            Err(e) => return Err(e),
        };
    }
    check_witness(op, &w).map_err(ProbeError::NotAssociative)?;
    Ok(w)
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

/// Level-k ambiguity witness, base pair (ε, "0").
pub fn find_witness(op: &dyn BinaryOp, k: usize, budget: u64) -> Result<AmbiguityWitness, ProbeError> {
    search(op, k, (BitString::empty(), "0".parse().unwrap()), budget)
}

/// Level-k witness with the short-chain base (ε, "00"); chain factors stay
/// within the length window [2, ⌈2·log₂(k+1)⌉] and the chain has at most
/// k+1 elements.
pub fn find_short_witness(
    op: &dyn BinaryOp,
    k: usize,
    budget: u64,
) -> Result<AmbiguityWitness, ProbeError> {
    search(op, k, (BitString::empty(), "00".parse().unwrap()), budget)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Structure holds and a complete census confirms the preimage count.
    Pass { census_count: usize },
    /// Structure holds but the census cannot cover the image.
    PassUnverifiedCount,
    Fail { reason: String },
}

/// Recomputes the chain product, re-applies every pair, and cross-checks
/// the factor count against a brute-force census at `max_rank`.
pub fn verify_witness(op: &dyn BinaryOp, w: &AmbiguityWitness, max_rank: u64) -> Verdict {
    if let Err(reason) = check_witness(op, w) {
        return Verdict::Fail { reason };
    }
    let census = match preimage_census(op, max_rank, u64::MAX) {
        Ok(c) => c,
        Err(_) => return Verdict::PassUnverifiedCount,
    };
    match census.reports.get(&w.image) {
        Some(report) if report.complete => {
            if report.count() >= w.factors.len() {
                Verdict::Pass { census_count: report.count() }
            } else {
                Verdict::Fail {
                    reason: format!(
                        "census finds only {} preimage pairs for {}, witness claims {} factors",
                        report.count(),
                        w.image,
                        w.factors.len()
                    ),
                }
            }
        }
        _ => Verdict::PassUnverifiedCount,
    }
}

/// Declared output-length bound parameters: |op(s₁,s₂)| < max(|s₁|,|s₂|)^i
/// whenever max(|s₁|,|s₂|) > m.
#[derive(Debug, Clone, Copy)]
pub struct LengthBoundParams {
    pub m: usize,
    pub i: u32,
}

/// j = max(i+1, 1 + ⌈log₂ max{|op(x,y)| : |x|,|y| ≤ m}⌉), brute-forced over
/// the finite box.
pub fn derive_j(op: &dyn BinaryOp, params: LengthBoundParams) -> Result<u32, OpError> {
    let mut max_out = 0usize;
    let inputs: Vec<BitString> = crate::strings::strings_up_to_len(params.m).collect();
    for x in &inputs {
        for y in &inputs {
            max_out = max_out.max(op.apply(x, y)?.len());
        }
    }
    let log_term = 1 + ceil_log2(max_out.max(1) as u64);
    Ok((params.i + 1).max(log_term))
}

/// ⌈log₂ n⌉ for n ≥ 1.
fn ceil_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    64 - (n - 1).leading_zeros()
}

#[derive(Debug, Clone)]
pub struct BoundViolation {
    pub k: usize,
    pub tuple: Vec<BitString>,
    pub product_len: usize,
    pub allowed_exclusive: String,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub params: LengthBoundParams,
    pub j: u32,
    pub k_max: usize,
    pub samples_per_k: usize,
    pub samples_run: usize,
    pub violations: Vec<BoundViolation>,
}

/// Random parenthesization of a k-fold product.
fn random_product(
    op: &dyn BinaryOp,
    tuple: &[BitString],
    rng: &mut ChaCha8Rng,
) -> Result<BitString, OpError> {
    if tuple.len() == 1 {
        return Ok(tuple[0].clone());
    }
    let split = rng.gen_range(1..tuple.len());
    let left = random_product(op, &tuple[..split], rng)?;
    let right = random_product(op, &tuple[split..], rng)?;
    op.apply(&left, &right)
}

/// Checks |s₁ op ⋯ op s_k| < max(2, |s₁|,…,|s_k|)^(j^⌈log₂ k⌉) on sampled
/// tuples under random parenthesizations.
pub fn measure_output_bound(
    op: &dyn BinaryOp,
    params: LengthBoundParams,
    k_max: usize,
    samples: usize,
    seed: u64,
) -> Result<BoundReport, OpError> {
    let j = derive_j(op, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut samples_run = 0;
    for k in 2..=k_max.max(2) {
        for _ in 0..samples {
            let tuple: Vec<BitString> =
                (0..k).map(|_| random_string(&mut rng, 2 * params.m + 6)).collect();
            let prod = random_product(op, &tuple, &mut rng)?;
            samples_run += 1;
            let base = tuple.iter().map(BitString::len).max().unwrap().max(2) as u128;
            let exp = u128::from(j).pow(ceil_log2(k as u64));
            // bound = base^exp; compare in log space first to dodge overflow
            let log_bound = (exp as f64) * (base as f64).log2();
            let holds = if log_bound > 100.0 {
                // products at desk scale are far below 2^100 characters
                true
            } else {
                (prod.len() as u128) < base.pow(exp as u32)
            };
            if !holds {
                violations.push(BoundViolation {
                    k,
                    tuple,
                    product_len: prod.len(),
                    allowed_exclusive: format!("{base}^{exp}"),
                });
            }
        }
    }
    Ok(BoundReport { params, j, k_max, samples_per_k: samples, samples_run, violations })
}

/// Inversion target f(q) = ⌈2·log₂ q⌉ ^ (l ^ ⌈log₂ q⌉), saturating at
/// u128::MAX (far beyond any image length this demo produces).
fn f_of(q: u64, l: u64) -> u128 {
    let base = if q.is_power_of_two() {
        u128::from(2 * ceil_log2(q))
    } else {
        // log₂ q is irrational here, so the f64 ceiling is exact
        (2.0 * (q as f64).log2()).ceil() as u128
    };
    if base <= 1 {
        return base;
    }
    let exp = u128::from(l).saturating_pow(ceil_log2(q));
    let mut acc: u128 = 1;
    for _ in 0..exp.min(200) {
        acc = acc.saturating_mul(base);
        if acc == u128::MAX {
            return acc;
        }
    }
    if exp > 200 {
        u128::MAX
    } else {
        acc
    }
}

/// g(m) = max{q ≥ 1 : f(q) ≤ m}.
pub fn g_inverse(m: u64, l: u64) -> u64 {
    let mut q = 1u64;
    while f_of(q + 1, l) <= u128::from(m) {
        q += 1;
    }
    q
}

#[derive(Debug)]
pub struct LowerBoundDemo {
    pub n: usize,
    pub j: u32,
    pub l: u64,
    pub k: usize,
    pub witness: AmbiguityWitness,
    pub image_len: usize,
    pub factor_count: usize,
    pub g_of_len: u64,
}

/// Finite-instance run of the ambiguity lower-bound argument: computes
/// n = 8 + max census preimage count over images of length ≤ N, sets
/// l = j², finds a short witness for k = n−1, and reports the comparison
/// against g(|image|). The ratio is informational — no pass/fail.
pub fn lower_bound_demo(
    op: &dyn BinaryOp,
    params: LengthBoundParams,
    n_cap: usize,
    budget: u64,
) -> Result<LowerBoundDemo, ProbeError> {
    // census wide enough that every image of length ≤ n_cap is complete
    let len_bound = op
        .preimage_len_bound(n_cap)
        .ok_or_else(|| OpError::Other("operation lacks a preimage length bound".into()))?;
    let max_rank = (1u64 << (len_bound + 1)) - 2;
    let census = preimage_census(op, max_rank, u64::MAX).map_err(|e| match e {
        crate::ambiguity::CensusError::Op(e) => ProbeError::Op(e),
        other => ProbeError::Op(OpError::Other(other.to_string())),
    })?;
    let max_count = census
        .reports
        .iter()
        .filter(|(image, report)| image.len() <= n_cap && report.complete)
        .map(|(_, report)| report.count())
        .max()
        .unwrap_or(0);
    let n = 8 + max_count;
    let j = derive_j(op, params)?;
    let l = u64::from(j) * u64::from(j);
    let k = n - 1;
    let witness = find_short_witness(op, k, budget)?;
    let image_len = witness.image.len();
    let factor_count = witness.factors.len();
    Ok(LowerBoundDemo {
        n,
        j,
        l,
        k,
        witness,
        image_len,
        factor_count,
        g_of_len: g_inverse(image_len as u64, l),
    })
}
