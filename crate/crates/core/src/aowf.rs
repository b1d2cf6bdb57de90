//! A strong, total associative one-way-style function σ = α ∘ (β × β) built
//! over a pluggable witness relation.
//!
//! γ acts as a one-way gate: it collapses a valid ⟨instance, witness⟩ code
//! to a tagged instance and passes everything else through with a 0 tag.
//! β wraps γ with a three-way case split on the first character, and α
//! splices two β images so that the case split remains recoverable from the
//! output. The preimage structure of the composite is tightly bounded,
//! which is what the ambiguity census checks exploit.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ambiguity::{AmbiguityBound, BinaryOp, OpError};
use crate::strings::{pair_decode, strings_up_to_len, BitString};

/// Hard ceiling for brute-force witness / preimage enumerations.
const MAX_BRUTE_LEN: usize = 26;

#[derive(Debug, Error)]
pub enum AowfError {
    #[error("brute-force budget exceeded: {0}")]
    Budget(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// A polynomial-time verifiable witness relation with exact-length
/// witnesses and a bounded witness count.
#[derive(Clone)]
pub struct WitnessRelation {
    name: String,
    verify: Arc<dyn Fn(&BitString, &BitString) -> bool + Send + Sync>,
    rho: Arc<dyn Fn(usize) -> usize + Send + Sync>,
    f: AmbiguityBound,
}

impl fmt::Debug for WitnessRelation {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "WitnessRelation({})", self.name)
    }
}

impl WitnessRelation {
    pub fn new(
        name: &str,
        verify: Arc<dyn Fn(&BitString, &BitString) -> bool + Send + Sync>,
        rho: Arc<dyn Fn(usize) -> usize + Send + Sync>,
        f: AmbiguityBound,
    ) -> Self {
        WitnessRelation { name: name.to_string(), verify, rho, f }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Witness length for instances of length n; strictly above n.
    pub fn rho(&self, n: usize) -> usize {
        (self.rho)(n)
    }

    pub fn verify(&self, x: &BitString, w: &BitString) -> bool {
        w.len() == self.rho(x.len()) && (self.verify)(x, w)
    }

    pub fn witness_cap(&self) -> &AmbiguityBound {
        &self.f
    }

    /// Unique-witness relation: x has the single witness x·"1" exactly when
    /// x contains an odd number of 1s.
    pub fn parity_up() -> Self {
        WitnessRelation::new(
            "parity-up",
            Arc::new(|x: &BitString, w: &BitString| {
                let odd = x.bits().iter().filter(|&&b| b == 1).count() % 2 == 1;
                odd && w.bits()[..x.len()] == *x.bits() && w.bit(x.len()) == Some(1)
            }),
            Arc::new(|n| n + 1),
            AmbiguityBound::constant(1),
        )
    }

    /// Few-witness relation: witnesses are x·i for the 2-bit suffixes i in
    /// {00,01,10} with value(i) < (ones(x) mod 3) + 1; between 1 and 3
    /// witnesses for every x.
    pub fn mod3_few() -> Self {
        WitnessRelation::new(
            "mod3-few",
            Arc::new(|x: &BitString, w: &BitString| {
                if w.bits()[..x.len()] != *x.bits() {
                    return false;
                }
                let i = 2 * u64::from(w.bits()[x.len()]) + u64::from(w.bits()[x.len() + 1]);
                let ones = x.bits().iter().filter(|&&b| b == 1).count() as u64;
                i < (ones % 3) + 1
            }),
            Arc::new(|n| n + 2),
            AmbiguityBound::constant(3),
        )
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "parity-up" => Some(WitnessRelation::parity_up()),
            "mod3-few" => Some(WitnessRelation::mod3_few()),
            _ => None,
        }
    }
}

/// Exhaustive witness set of x: all w of length ρ(|x|) accepted by the
/// relation.
pub fn wit(rel: &WitnessRelation, x: &BitString) -> Result<BTreeSet<BitString>, AowfError> {
    let wl = rel.rho(x.len());
    if wl > MAX_BRUTE_LEN {
        return Err(AowfError::Budget(format!(
            "witness length {wl} exceeds the brute-force ceiling {MAX_BRUTE_LEN}"
        )));
    }
    let mut out = BTreeSet::new();
    for w in strings_up_to_len(wl) {
        if w.len() == wl && rel.verify(x, &w) {
            out.insert(w);
        }
    }
    assert!(
        out.len() as u64 <= rel.witness_cap().evaluate(x.len() as u64),
        "witness count for {x} exceeds the declared cap f"
    );
    Ok(out)
}

/// γ(d): decode d as ⟨x,w⟩; a valid witness pair collapses to "1"·x,
/// anything else passes through as "0"·d.
pub fn gamma(rel: &WitnessRelation, d: &BitString) -> BitString {
    let (x, w) = pair_decode(d);
    if rel.verify(&x, &w) {
        x.prepend_bit(1)
    } else {
        d.prepend_bit(0)
    }
}

/// β(c): three-way case split on the first character of c.
pub fn beta(rel: &WitnessRelation, c: &BitString) -> BitString {
    match c.bit(0) {
        None => "111".parse().unwrap(),
        Some(1) => gamma(rel, &c.suffix_from(1)).prepend_bit(0),
        Some(_) => c.suffix_from(3).prepend_bit(0).prepend_bit(0),
    }
}

/// α(a,b) = "0"·(b₁·a₂)·(a₁·b₂)·a₍₃₊₎·b₍₃₊₎ with bitwise AND as the scalar
/// product; defined for |a|,|b| ≥ 2.
pub fn alpha(a: &BitString, b: &BitString) -> Result<BitString, AowfError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AowfError::Domain(format!(
            "alpha needs operands of length >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut out = BitString::empty();
    out.push_bit(0);
    out.push_bit(b.bit(0).unwrap() & a.bit(1).unwrap());
    out.push_bit(a.bit(0).unwrap() & b.bit(1).unwrap());
    let mut out = out.concat(&a.suffix_from(2));
    out = out.concat(&b.suffix_from(2));
    Ok(out)
}

/// The composite total associative function over a witness relation.
#[derive(Clone, Debug)]
pub struct SigmaAowf {
    relation: WitnessRelation,
    op_name: String,
}

impl SigmaAowf {
    pub fn new(relation: WitnessRelation) -> Self {
        let op_name = format!("aowf:{}", relation.name());
        SigmaAowf { relation, op_name }
    }

    pub fn relation(&self) -> &WitnessRelation {
        &self.relation
    }

    /// σ(s,t) = α(β(s), β(t)); total, since β images always have length ≥ 2.
    pub fn sigma(&self, s: &BitString, t: &BitString) -> BitString {
        let bs = beta(&self.relation, s);
        let bt = beta(&self.relation, t);
        alpha(&bs, &bt).expect("beta images have length >= 2")
    }
}

impl BinaryOp for SigmaAowf {
    fn name(&self) -> &str {
        &self.op_name
    }

    fn apply(&self, a: &BitString, b: &BitString) -> Result<BitString, OpError> {
        Ok(self.sigma(a, b))
    }

    fn is_associative(&self) -> bool {
        true
    }

    /// Sound length bound for preimage components of an image of length n.
    ///
    /// A component s contributes β(s) of length ≤ n−1. In the pass-through
    /// cases |s| ≤ |β(s)| + 1 ≤ n. In the witness case s = "1"·⟨x,w⟩ with
    /// |x| = |β(s)| − 2 ≤ n−3 and |w| = ρ(|x|), and the pair code length is
    /// at most 2|w| + 4.
    fn preimage_len_bound(&self, output_len: usize) -> Option<usize> {
        let m = output_len.saturating_sub(3);
        Some(output_len.max(2 * self.relation.rho(m) + 5))
    }
}

/// β-preimage class of a component, read off the first two characters of
/// its β image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BetaClass {
    /// β image "11…": the empty-string case.
    Epsilon,
    /// β image "01…": a collapsed valid witness pair.
    Witness,
    /// β image "00…": the pass-through set Z.
    Z,
}

impl BetaClass {
    pub fn of_beta_image(e: &BitString) -> BetaClass {
        match (e.bit(0), e.bit(1)) {
            (Some(1), Some(1)) => BetaClass::Epsilon,
            (Some(0), Some(1)) => BetaClass::Witness,
            (Some(0), Some(0)) => BetaClass::Z,
            _ => unreachable!("beta images start with 11, 01 or 00"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BetaClass::Epsilon => "E",
            BetaClass::Witness => "W",
            BetaClass::Z => "Z",
        }
    }
}

/// All c with |c| ≤ len_cap and β(c) = e.
pub fn beta_preimages(
    rel: &WitnessRelation,
    e: &BitString,
    len_cap: usize,
) -> Result<BTreeSet<BitString>, AowfError> {
    if len_cap > MAX_BRUTE_LEN {
        return Err(AowfError::Budget(format!(
            "length cap {len_cap} exceeds the brute-force ceiling {MAX_BRUTE_LEN}"
        )));
    }
    Ok(strings_up_to_len(len_cap).filter(|c| beta(rel, c) == *e).collect())
}

/// One classified preimage pair of a σ image.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClassifiedPreimage {
    pub s: BitString,
    pub t: BitString,
    pub s_class: BetaClass,
    pub t_class: BetaClass,
}

#[derive(Clone, Debug)]
pub struct CaseTableReport {
    pub image: BitString,
    pub preimages: Vec<ClassifiedPreimage>,
    pub len_cap: usize,
}

/// Class pairs admissible for an image with marker bits (y₂, y₃).
pub fn admissible_classes(y2: u8, y3: u8) -> &'static [(BetaClass, BetaClass)] {
    use BetaClass::{Epsilon as E, Witness as W, Z};
    match (y2, y3) {
        (0, 0) => &[(Z, Z), (Z, W), (W, Z), (W, W), (Z, E), (E, Z)],
        (1, 0) => &[(W, E)],
        (0, 1) => &[(E, W)],
        _ => &[(E, E)],
    }
}

/// Enumerates all preimage pairs of y up to the component length cap and
/// classifies each against the admissible class table; errors if any pair
/// falls outside its row.
pub fn case_table_check(
    aowf: &SigmaAowf,
    y: &BitString,
    len_cap: usize,
) -> Result<CaseTableReport, AowfError> {
    if y.bit(0) != Some(0) || y.len() < 3 {
        return Err(AowfError::Domain(format!(
            "case table applies to images starting with 0 of length >= 3, got {y}"
        )));
    }
    if len_cap > MAX_BRUTE_LEN / 2 {
        return Err(AowfError::Budget(format!(
            "component length cap {len_cap} exceeds the pairwise brute-force ceiling"
        )));
    }
    let (y2, y3) = (y.bit(1).unwrap(), y.bit(2).unwrap());
    let admissible = admissible_classes(y2, y3);
    let mut preimages = Vec::new();
    let components: Vec<BitString> = strings_up_to_len(len_cap).collect();
    for s in &components {
        for t in &components {
            if aowf.sigma(s, t) != *y {
                continue;
            }
            let s_class = BetaClass::of_beta_image(&beta(aowf.relation(), s));
            let t_class = BetaClass::of_beta_image(&beta(aowf.relation(), t));
            if !admissible.contains(&(s_class, t_class)) {
                return Err(AowfError::Domain(format!(
                    "preimage ({s},{t}) of {y} classifies as ({},{}) which matches no table row",
                    s_class.label(),
                    t_class.label()
                )));
            }
            preimages.push(ClassifiedPreimage { s: s.clone(), t: t.clone(), s_class, t_class });
        }
    }
    Ok(CaseTableReport { image: y.clone(), preimages, len_cap })
}
