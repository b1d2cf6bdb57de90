//! Ambiguity bounds, brute-force preimage censuses, and growth profiling
//! for arbitrary total binary operations on bitstrings.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use thiserror::Error;

use crate::strings::{strings_up_to_rank, BitString};

/// A named, nondecreasing bound h : N → N used both as the ambiguity cap of
/// an h(n)-to-one check and as the diagonalization bound g of the factor
/// machine.
#[derive(Clone)]
pub struct AmbiguityBound {
    name: String,
    eval: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    unbounded: bool,
}

impl AmbiguityBound {
    pub fn new(
        name: impl Into<String>,
        unbounded: bool,
        eval: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        AmbiguityBound { name: name.into(), eval: Arc::new(eval), unbounded }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn evaluate(&self, n: u64) -> u64 {
        (self.eval)(n)
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    /// g(n) = n.
    pub fn linear() -> Self {
        AmbiguityBound::new("linear", true, |n| n)
    }

    /// g(n) = ⌈log₂(n+2)⌉.
    pub fn log2() -> Self {
        AmbiguityBound::new("log2", true, |n| {
            let v = n + 2;
            64 - (v - 1).leading_zeros() as u64
        })
    }

    /// g(n) = ⌈√n⌉.
    pub fn sqrt() -> Self {
        AmbiguityBound::new("sqrt", true, |n| {
            let r = (n as f64).sqrt() as u64;
            // correct the float guess exactly
            let mut r = r.saturating_sub(1);
            while r * r < n {
                r += 1;
            }
            r
        })
    }

    pub fn constant(c: u64) -> Self {
        AmbiguityBound::new(format!("const{c}"), false, move |_| c)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(Self::linear()),
            "log2" => Some(Self::log2()),
            "sqrt" => Some(Self::sqrt()),
            other => other.strip_prefix("const").and_then(|c| c.parse().ok()).map(Self::constant),
        }
    }
}

impl fmt::Debug for AmbiguityBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AmbiguityBound({})", self.name)
    }
}

#[derive(Debug, Error)]
pub enum OpError {
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("nontermination ceiling reached: {0}")]
    Nontermination(String),
    #[error("{0}")]
    Other(String),
}

/// A total binary operation on bitstrings, with optional declared
/// properties consumed by the oracles.
pub trait BinaryOp {
    fn name(&self) -> &str;

    fn apply(&self, a: &BitString, b: &BitString) -> Result<BitString, OpError>;

    /// Declared associativity. The probing procedures refuse ops that do
    /// not declare it (and spot-check the claim before trusting it).
    fn is_associative(&self) -> bool {
        false
    }

    /// When `Some`, every preimage component of an image of length `n` has
    /// length at most the returned value. Census reports for an image are
    /// flagged complete only when this bound fits inside the search bound.
    fn preimage_len_bound(&self, _output_len: usize) -> Option<usize> {
        None
    }
}

/// String concatenation. Every split of an image is a preimage, so an image
/// of length m has exactly m+1 preimages.
pub struct Concat;

impl BinaryOp for Concat {
    fn name(&self) -> &str {
        "concat"
    }
    fn apply(&self, a: &BitString, b: &BitString) -> Result<BitString, OpError> {
        Ok(a.concat(b))
    }
    fn is_associative(&self) -> bool {
        true
    }
    fn preimage_len_bound(&self, output_len: usize) -> Option<usize> {
        Some(output_len)
    }
}

/// Shortlex maximum of the two arguments.
pub struct ShortlexMax;

impl BinaryOp for ShortlexMax {
    fn name(&self) -> &str {
        "max"
    }
    fn apply(&self, a: &BitString, b: &BitString) -> Result<BitString, OpError> {
        Ok(if a >= b { a.clone() } else { b.clone() })
    }
    fn is_associative(&self) -> bool {
        true
    }
    // Preimages (a,b) of y satisfy max(a,b)=y, so components never exceed y
    // in shortlex order but CAN be shorter or equal in length; the other
    // component is unconstrained below y. Since shortlex rank ≤ rank(y)
    // bounds length by |y|, the bound |y| is sound.
    fn preimage_len_bound(&self, output_len: usize) -> Option<usize> {
        Some(output_len)
    }
}

/// Left projection (x,y) → x. Associative, with unbounded preimage sets:
/// census reports can never be complete.
pub struct LeftProjection;

impl BinaryOp for LeftProjection {
    fn name(&self) -> &str {
        "proj"
    }
    fn apply(&self, a: &BitString, _b: &BitString) -> Result<BitString, OpError> {
        Ok(a.clone())
    }
    fn is_associative(&self) -> bool {
        true
    }
}

/// Evidence for one image element: all preimage pairs found within the
/// search bound, re-verified on construction.
#[derive(Debug, Clone)]
pub struct PreimageReport {
    pub image: BitString,
    pub preimages: Vec<(BitString, BitString)>,
    pub search_bound: u64,
    pub complete: bool,
}

impl PreimageReport {
    pub fn count(&self) -> usize {
        self.preimages.len()
    }
}

/// A full census over all input pairs with both ranks ≤ the search bound.
#[derive(Debug)]
pub struct Census {
    pub reports: BTreeMap<BitString, PreimageReport>,
    pub max_rank: u64,
}

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("census budget exceeded: {pairs} pairs requested, budget {budget}")]
    Budget { pairs: u64, budget: u64, partial: Census },
    #[error("operation failed during census: {0}")]
    Op(#[from] OpError),
}

/// Largest length L such that every string of length ≤ L has rank ≤ max_rank.
pub fn covered_length(max_rank: u64) -> usize {
    // strings of length ≤ L occupy ranks 0 ..= 2^(L+1) - 2
    let mut l = 0usize;
    while (1u128 << (l + 2)) - 2 <= max_rank as u128 {
        l += 1;
    }
    l
}

/// Evaluates `op` on every pair (x,y) with rank(x), rank(y) ≤ max_rank and
/// groups the results by output. `pair_budget` caps the enumeration size.
pub fn preimage_census(
    op: &dyn BinaryOp,
    max_rank: u64,
    pair_budget: u64,
) -> Result<Census, CensusError> {
    let side = max_rank + 1;
    let pairs = side.saturating_mul(side);
    if pairs > pair_budget {
        return Err(CensusError::Budget {
            pairs,
            budget: pair_budget,
            partial: Census { reports: BTreeMap::new(), max_rank },
        });
    }
    let inputs: Vec<BitString> = strings_up_to_rank(max_rank).collect();
    let covered = covered_length(max_rank);
    let mut reports: BTreeMap<BitString, PreimageReport> = BTreeMap::new();
    for x in &inputs {
        for y in &inputs {
            let img = op.apply(x, y)?;
            let report = reports.entry(img.clone()).or_insert_with(|| PreimageReport {
                image: img.clone(),
                preimages: Vec::new(),
                search_bound: max_rank,
                complete: match op.preimage_len_bound(img.len()) {
                    Some(b) => b <= covered,
                    None => false,
                },
            });
            report.preimages.push((x.clone(), y.clone()));
        }
    }
    // census soundness: re-apply every recorded preimage
    for report in reports.values() {
        for (x, y) in &report.preimages {
            debug_assert_eq!(&op.apply(x, y)?, &report.image);
        }
    }
    Ok(Census { reports, max_rank })
}

/// PASS/FAIL verdict of an h(n)-to-one check over the complete reports of a
/// census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HVerdict {
    Pass,
    Fail { image: BitString, count: usize, allowed: u64 },
}

pub fn check_h_to_one(census: &Census, h: &AmbiguityBound) -> HVerdict {
    // BTreeMap iterates in shortlex order, so the first hit is the
    // smallest-rank counterexample.
    for (image, report) in &census.reports {
        if !report.complete {
            continue;
        }
        let allowed = h.evaluate(image.len() as u64);
        if report.count() as u64 > allowed {
            return HVerdict::Fail { image: image.clone(), count: report.count(), allowed };
        }
    }
    HVerdict::Pass
}

/// One row of an ambiguity profile: the maximum preimage count observed at
/// one output length, with a witnessing image.
#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub output: BitString,
    pub length: usize,
    pub count: usize,
    pub complete: bool,
}

pub fn ambiguity_profile(census: &Census) -> Vec<ProfileRow> {
    let mut by_len: BTreeMap<usize, ProfileRow> = BTreeMap::new();
    for (image, report) in &census.reports {
        let row = by_len.entry(image.len()).or_insert_with(|| ProfileRow {
            output: image.clone(),
            length: image.len(),
            count: report.count(),
            complete: report.complete,
        });
        if report.count() > row.count {
            row.output = image.clone();
            row.count = report.count();
            row.complete = report.complete;
        }
    }
    by_len.into_values().collect()
}

pub fn write_census_csv(census: &Census, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "output,length,count,complete")?;
    for (image, report) in &census.reports {
        writeln!(w, "{},{},{},{}", image.literal(), image.len(), report.count(), report.complete)?;
    }
    Ok(())
}

pub fn write_profile_csv(rows: &[ProfileRow], w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "output,length,count,complete")?;
    for row in rows {
        writeln!(w, "{},{},{},{}", row.output.literal(), row.length, row.count, row.complete)?;
    }
    Ok(())
}
