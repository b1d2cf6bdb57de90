//! Operation selectors: one string name per built-in binary operation,
//! including adapters that expose the factor-table machine and the
//! witness-relation sigma as `BinaryOp` implementations.

use std::cell::{RefCell, RefMut};

use crate::ambiguity::{AmbiguityBound, BinaryOp, Concat, LeftProjection, OpError, ShortlexMax};
use crate::aowf::{SigmaAowf, WitnessRelation};
use crate::gconstruct::{GError, GMachine};
use crate::strings::BitString;

/// The factor-table machine as a `BinaryOp`. Evaluation replays the shared
/// table, so the wrapper owns the machine behind a `RefCell`.
pub struct GFunOp {
    name: String,
    machine: RefCell<GMachine>,
}

impl GFunOp {
    pub fn new(g: AmbiguityBound) -> Self {
        let name = format!("gfun:{}", g.name());
        GFunOp { name, machine: RefCell::new(GMachine::new(g)) }
    }

    pub fn with_limits(g: AmbiguityBound, budget: u64, max_product_len: u64) -> Self {
        let name = format!("gfun:{}", g.name());
        GFunOp { name, machine: RefCell::new(GMachine::with_limits(g, budget, max_product_len)) }
    }

    /// Direct access to the underlying machine (table dumps, prfact, ...).
    pub fn machine(&self) -> RefMut<'_, GMachine> {
        self.machine.borrow_mut()
    }
}

fn map_gerr(e: GError) -> OpError {
    match e {
        GError::Budget(m) => OpError::Budget(m),
        GError::Nontermination(m) => OpError::Nontermination(m),
        other => OpError::Other(other.to_string()),
    }
}

impl BinaryOp for GFunOp {
    fn name(&self) -> &str {
        &self.name
    }

    fn apply(&self, a: &BitString, b: &BitString) -> Result<BitString, OpError> {
        self.machine.borrow_mut().eval(a, b).map_err(map_gerr)
    }

    fn is_associative(&self) -> bool {
        true
    }
    // no preimage_len_bound: factor components of an image are not length-
    // bounded by the image, so census reports stay flagged incomplete
}

/// Parses an operation selector: `concat`, `max`, `proj`, `gfun:<g-name>`,
/// or `aowf:<relation-name>`. Rejects unknown selectors before any work.
pub fn parse_op(selector: &str) -> Result<Box<dyn BinaryOp>, String> {
    match selector {
        "concat" => Ok(Box::new(Concat)),
        "max" => Ok(Box::new(ShortlexMax)),
        "proj" => Ok(Box::new(LeftProjection)),
        other => {
            if let Some(g_name) = other.strip_prefix("gfun:") {
                let g = AmbiguityBound::by_name(g_name)
                    .ok_or_else(|| format!("unknown growth bound `{g_name}`"))?;
                Ok(Box::new(GFunOp::new(g)))
            } else if let Some(rel_name) = other.strip_prefix("aowf:") {
                let rel = WitnessRelation::by_name(rel_name)
                    .ok_or_else(|| format!("unknown witness relation `{rel_name}`"))?;
                Ok(Box::new(SigmaAowf::new(rel)))
            } else {
                Err(format!(
                    "unknown operation `{other}` (expected concat, max, proj, gfun:<g>, aowf:<relation>)"
                ))
            }
        }
    }
}
