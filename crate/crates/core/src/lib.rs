//! Workbench for total associative functions on bitstrings.
//!
//! The library provides exact shortlex / pairing / multiset codecs, a
//! brute-force ambiguity census, a deterministic factor-table machine
//! realizing g(n)-to-one total commutative associative functions, a strong
//! total associative one-way function built from witness relations,
//! constructive low-ambiguity witness search, and an associativity-based
//! key-agreement demo.

pub mod ambiguity;
pub mod aowf;
pub mod gconstruct;
pub mod keyagree;
pub mod ops;
pub mod prober;
pub mod strings;
