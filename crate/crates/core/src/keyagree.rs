//! Minimal two-party key-agreement demonstration over any declared
//! associative operation. Alice holds x, Bob holds z, y is public; the
//! exchanged messages are op(x,y) and op(y,z), and both sides derive the
//! same key because op(x, op(y,z)) = op(op(x,y), z).
//!
//! No channel simulation, no adversary: the demo exists to exercise
//! associativity end to end.

use crate::ambiguity::{BinaryOp, OpError};
use crate::strings::BitString;

/// Everything a wire observer would see, plus both derived keys. The
/// transcript never contains the secrets x or z themselves.
#[derive(Debug, Clone)]
pub struct SessionTranscript {
    pub op_name: String,
    pub public_y: BitString,
    /// Alice's message op(x, y).
    pub alice_msg: BitString,
    /// Bob's message op(y, z).
    pub bob_msg: BitString,
    pub alice_key: BitString,
    pub bob_key: BitString,
}

impl SessionTranscript {
    pub fn keys_agree(&self) -> bool {
        self.alice_key == self.bob_key
    }

    /// Printable transcript: public value, both messages, both keys.
    pub fn render(&self) -> String {
        format!(
            "op: {}\npublic y: {}\nalice -> bob: {}\nbob -> alice: {}\nalice key: {}\nbob key: {}\nkeys agree: {}\n",
            self.op_name,
            self.public_y.literal(),
            self.alice_msg.literal(),
            self.bob_msg.literal(),
            self.alice_key.literal(),
            self.bob_key.literal(),
            self.keys_agree(),
        )
    }
}

/// Runs one session: Alice computes op(x, op(y,z)), Bob computes
/// op(op(x,y), z). The keys are equal whenever op is associative.
pub fn run_session(
    op: &dyn BinaryOp,
    x: &BitString,
    y: &BitString,
    z: &BitString,
) -> Result<SessionTranscript, OpError> {
    let alice_msg = op.apply(x, y)?;
    let bob_msg = op.apply(y, z)?;
    let alice_key = op.apply(x, &bob_msg)?;
    let bob_key = op.apply(&alice_msg, z)?;
    Ok(SessionTranscript {
        op_name: op.name().to_string(),
        public_y: y.clone(),
        alice_msg,
        bob_msg,
        alice_key,
        bob_key,
    })
}
