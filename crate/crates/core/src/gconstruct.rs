//! A g(n)-to-one, total, commutative, associative function built from a
//! shared append-only factor table with deterministic replay.
//!
//! The machine processes input pairs in Cantor order of their shortlex
//! ranks. Each pair (a,b) resolves the factor multisets of both components
//! (keying unseen strings as their own singleton factorization), takes the
//! multiset union, and either looks up the string already assigned to that
//! union or assigns the shortlex-least unkeyed string y with
//! g(|y|) > 2^‖A‖ − 2. Replaying the pair stream from scratch always
//! rebuilds the identical table, so the table after pair r is a pure
//! function of (g, r).
//!
//! The table is stored compactly because it grows to tens of millions of
//! entries when replay runs to the half-billion-pair range: multiset
//! elements live in a chunked u64 arena, entries are parallel vectors
//! indexed by append order, interning uses a hand-rolled open-addressing
//! set over the arena, and the key→entry index used only by point queries
//! is built lazily on first out-of-range lookup.

use std::collections::{BTreeMap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};
use std::mem;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::ambiguity::AmbiguityBound;
use crate::strings::{multiset_encode, pair_rank_u64, BitString, MultisetOfStrings};

const NONE_ID: u32 = u32::MAX;
/// Empty slot in the intern table.
const EMPTY_SLOT: u64 = u64::MAX;
/// Sentinel in the per-entry key vector meaning "key held in `big_keys`".
const BIG_KEY: u64 = u64::MAX;
/// Arena chunk size: 2^22 u64 words = 32 MiB, so growing never reallocates
/// more than one chunk at a time.
const CHUNK_BITS: u32 = 22;
const CHUNK_LEN: usize = 1 << CHUNK_BITS;

#[derive(Debug, Error)]
pub enum GError {
    #[error("rank budget exceeded: {0}")]
    Budget(String),
    #[error("nontermination ceiling reached: {0}")]
    Nontermination(String),
    #[error("the empty multiset has no product")]
    EmptyMultiset,
}

/// One row of the machine's table, in append order.
#[derive(Debug, Clone)]
pub struct TableEntry {
    pub index: usize,
    pub key: BitString,
    pub value: MultisetOfStrings,
    pub is_product: bool,
}

/// Multiply-rotate hash over the element ranks of a multiset.
fn hash_elems(elems: &[u64]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3u64 ^ (elems.len() as u64);
    for &e in elems {
        h = (h.rotate_left(5) ^ e).wrapping_mul(0x517c_c1b7_2722_0a95);
    }
    h ^= h >> 29;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 32)
}

#[derive(Default)]
struct FxMix(u64);

impl Hasher for FxMix {
    fn finish(&self) -> u64 {
        let mut h = self.0;
        h ^= h >> 29;
        h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^ (h >> 32)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(u64::from(b));
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = (self.0.rotate_left(5) ^ n).wrapping_mul(0x517c_c1b7_2722_0a95);
    }

    fn write_u32(&mut self, n: u32) {
        self.write_u64(u64::from(n));
    }

    fn write_usize(&mut self, n: usize) {
        self.write_u64(n as u64);
    }

    fn write_u8(&mut self, n: u8) {
        self.write_u64(u64::from(n));
    }
}

type FastState = BuildHasherDefault<FxMix>;

/// Chunked append-only store for multiset element ranks. A multiset never
/// spans a chunk boundary, so slices come straight out of one chunk.
#[derive(Default)]
struct Arena {
    chunks: Vec<Vec<u64>>,
}

impl Arena {
    fn append(&mut self, elems: &[u64]) -> u32 {
        debug_assert!(elems.len() <= CHUNK_LEN);
        if self.chunks.last().map_or(true, |c| c.len() + elems.len() > CHUNK_LEN) {
            assert!(
                self.chunks.len() < (1 << (32 - CHUNK_BITS)),
                "arena exhausted the 32-bit offset space"
            );
            self.chunks.push(Vec::with_capacity(CHUNK_LEN));
        }
        let chunk_idx = self.chunks.len() - 1;
        let chunk = &mut self.chunks[chunk_idx];
        let local = chunk.len();
        chunk.extend_from_slice(elems);
        ((chunk_idx as u32) << CHUNK_BITS) | (local as u32)
    }

    fn slice(&self, start: u32, len: u8) -> &[u64] {
        let chunk = &self.chunks[(start >> CHUNK_BITS) as usize];
        let local = (start & ((1 << CHUNK_BITS) - 1)) as usize;
        &chunk[local..local + len as usize]
    }

    fn total_len(&self) -> usize {
        self.chunks.iter().map(Vec::len).sum()
    }
}

pub struct GMachine {
    g: AmbiguityBound,
    /// Maximum admissible pair-code rank (inclusive).
    budget: u64,
    /// Ceiling on product key length before the shortlex search is declared
    /// divergent (a bounded g violates the machine's contract).
    max_product_len: u64,
    cursor: u64,
    diag: u64,
    off: u64,
    /// Largest component rank replay can ever reach under `budget`; ranks up
    /// to this bound stay eligible for the dense index.
    diag_cap: u64,

    // ---- the table, parallel-indexed by entry id (== append order) ----
    arena: Arena,
    /// Packed per-entry record: bits 0..32 arena start, 32..40 multiset
    /// cardinality, 40..64 saturating replayed-pair hit count. Packing the
    /// hit counter next to the slice metadata keeps the per-step counter
    /// bump on an already-loaded cache line.
    meta: Vec<u64>,
    /// Key rank per entry; `BIG_KEY` redirects to `big_keys`.
    key_rank: Vec<u64>,
    big_keys: HashMap<u32, BigUint>,

    /// Open-addressing intern set over entry ids, hashed by element slice;
    /// each slot carries 16 hash tag bits to skip most arena compares.
    slots: Vec<u64>,
    slot_mask: u64,

    /// rank → entry id for ranks below the current replay frontier.
    dense: Vec<u32>,
    /// Keyed ranks ≥ dense.len() but ≤ diag_cap, awaiting dense growth.
    pending: BTreeMap<u64, u32>,
    /// Lazily built full key → entry index for point queries outside the
    /// dense range; maintained incrementally once built.
    key_index: Option<HashMap<u64, u32, FastState>>,

    /// Disjoint, non-touching closed intervals of keyed ranks.
    keyed_intervals: BTreeMap<BigUint, BigUint>,
    min_len_cache: HashMap<usize, u64>,
    scratch: Vec<u64>,
}

impl GMachine {
    pub fn new(g: AmbiguityBound) -> Self {
        GMachine::with_limits(g, 1 << 30, 1 << 20)
    }

    pub fn with_limits(g: AmbiguityBound, budget: u64, max_product_len: u64) -> Self {
        // largest diagonal d with T(d) ≤ budget, plus slack
        let diag_cap = ((((8.0 * budget as f64) + 1.0).sqrt() - 1.0) / 2.0) as u64 + 2;
        GMachine {
            g,
            budget,
            max_product_len,
            cursor: 0,
            diag: 0,
            off: 0,
            diag_cap,
            arena: Arena::default(),
            meta: Vec::new(),
            key_rank: Vec::new(),
            big_keys: HashMap::new(),
            slots: vec![EMPTY_SLOT; 1 << 16],
            slot_mask: (1 << 16) - 1,
            dense: Vec::new(),
            pending: BTreeMap::new(),
            key_index: None,
            keyed_intervals: BTreeMap::new(),
            min_len_cache: HashMap::new(),
            scratch: Vec::new(),
        }
    }

    pub fn bound(&self) -> &AmbiguityBound {
        &self.g
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn table_len(&self) -> usize {
        self.meta.len()
    }

    fn ms_slice(&self, id: u32) -> &[u64] {
        let meta = self.meta[id as usize];
        self.arena.slice(meta as u32, (meta >> 32) as u8)
    }

    fn hits_of(&self, id: u32) -> u64 {
        self.meta[id as usize] >> 40
    }

    fn bump_hits(&mut self, id: u32) {
        let meta = &mut self.meta[id as usize];
        if *meta >> 40 != 0xff_ffff {
            *meta += 1 << 40;
        }
    }

    // ---- intern set ----

    fn lookup_ms(&self, elems: &[u64]) -> Option<u32> {
        let hash = hash_elems(elems);
        let tag = hash >> 48;
        let mut pos = hash & self.slot_mask;
        loop {
            let slot = self.slots[pos as usize];
            if slot == EMPTY_SLOT {
                return None;
            }
            if slot >> 48 == tag {
                let id = slot as u32;
                if self.ms_slice(id) == elems {
                    return Some(id);
                }
            }
            pos = (pos + 1) & self.slot_mask;
        }
    }

    fn insert_slot(&mut self, id: u32) {
        let hash = hash_elems(self.ms_slice(id));
        let mut pos = hash & self.slot_mask;
        while self.slots[pos as usize] != EMPTY_SLOT {
            pos = (pos + 1) & self.slot_mask;
        }
        self.slots[pos as usize] = (hash >> 48 << 48) | u64::from(id);
    }

    fn maybe_grow_slots(&mut self) {
        // keep load factor under 0.6
        if (self.table_len() as u64) * 5 < (self.slots.len() as u64) * 3 {
            return;
        }
        let new_len = self.slots.len() * 2;
        self.slots = vec![EMPTY_SLOT; new_len];
        self.slot_mask = new_len as u64 - 1;
        for id in 0..self.table_len() as u32 {
            self.insert_slot(id);
        }
    }

    // ---- keyed-rank interval set ----

    /// Least keyed-set-free rank ≥ `from`.
    fn least_free(&self, from: &BigUint) -> BigUint {
        if let Some((_, end)) = self.keyed_intervals.range(..=from.clone()).next_back() {
            if end >= from {
                return end + BigUint::one();
            }
        }
        from.clone()
    }

    fn mark_keyed(&mut self, r: &BigUint) {
        let mut start = r.clone();
        let mut end = r.clone();
        if let Some((s, e)) = self.keyed_intervals.range(..=r.clone()).next_back() {
            debug_assert!(e < r, "rank already keyed");
            if e + BigUint::one() == *r {
                start = s.clone();
            }
        }
        let next = r + BigUint::one();
        if let Some(e) = self.keyed_intervals.remove(&next) {
            end = e;
        }
        self.keyed_intervals.insert(start, end);
    }

    // ---- entry construction ----

    /// Appends entry (key, elems). The caller guarantees `elems` is not yet
    /// a table value, which keeps the table value-injective (Claim 1) with
    /// entry ids doubling as multiset ids.
    fn append_entry(&mut self, key: BigUint, elems: &[u64]) -> u32 {
        debug_assert!(elems.windows(2).all(|w| w[0] <= w[1]));
        assert!(self.lookup_ms(elems).is_none(), "table value-injectivity violated on append");
        let id = self.table_len() as u32;
        let start = self.arena.append(elems);
        self.meta.push(u64::from(start) | ((elems.len() as u64) << 32));
        self.mark_keyed(&key);
        match key.to_u64().filter(|&r| r != BIG_KEY) {
            Some(r) => {
                self.key_rank.push(r);
                if (r as usize) < self.dense.len() {
                    self.dense[r as usize] = id;
                } else if r <= self.diag_cap {
                    self.pending.insert(r, id);
                }
                if let Some(index) = self.key_index.as_mut() {
                    index.insert(r, id);
                }
            }
            None => {
                // keys past the machine word never re-enter replay; point
                // queries on them walk `big_keys` directly
                self.key_rank.push(BIG_KEY);
                self.big_keys.insert(id, key);
            }
        }
        self.insert_slot(id);
        self.maybe_grow_slots();
        id
    }

    fn ensure_dense(&mut self, upto: u64) {
        let need = (upto + 1) as usize;
        if self.dense.len() >= need {
            return;
        }
        self.dense.resize(need, NONE_ID);
        while let Some((&r, _)) = self.pending.first_key_value() {
            if (r as usize) >= need {
                break;
            }
            let (r, id) = self.pending.pop_first().unwrap();
            self.dense[r as usize] = id;
        }
    }

    /// Factor id for a rank already below the replay frontier (hot path).
    fn factor_id(&mut self, r: u64) -> u32 {
        let id = self.dense[r as usize];
        if id != NONE_ID {
            return id;
        }
        // fresh string: keyed as its own singleton
        self.append_entry(BigUint::from(r), &[r])
    }

    /// Least key length L with g(L) > 2^size − 2.
    fn min_len_for_size(&mut self, size: usize) -> Result<u64, GError> {
        if let Some(&l) = self.min_len_cache.get(&size) {
            return Ok(l);
        }
        if size >= 64 {
            return Err(GError::Nontermination(format!(
                "multiset of cardinality {size} exceeds the supported 2^k-2 threshold range"
            )));
        }
        let threshold = (1u128 << size) - 2;
        let mut l = 0u64;
        while u128::from(self.g.evaluate(l)) <= threshold {
            l += 1;
            if l > self.max_product_len {
                return Err(GError::Nontermination(format!(
                    "g={} never exceeds 2^{} - 2 below the length ceiling {}",
                    self.g.name(),
                    size,
                    self.max_product_len
                )));
            }
        }
        self.min_len_cache.insert(size, l);
        Ok(l)
    }

    /// Shortlex-least unkeyed rank eligible for a product of the given
    /// multiset cardinality.
    fn alloc_slot(&mut self, size: usize) -> Result<BigUint, GError> {
        let min_len = self.min_len_for_size(size)?;
        // first rank of length L is 2^L - 1
        let start = (BigUint::one() << min_len) - BigUint::one();
        Ok(self.least_free(&start))
    }

    // ---- replay ----

    /// Processes the pair at the current cursor; returns the product's
    /// entry id.
    fn step(&mut self) -> Result<u32, GError> {
        let m = self.diag - self.off;
        let n = self.off;
        let fa = self.factor_id(m);
        let fb = self.factor_id(n);
        let mut buf = mem::take(&mut self.scratch);
        buf.clear();
        merge_sorted(self.ms_slice(fa), self.ms_slice(fb), &mut buf);
        let id = match self.lookup_ms(&buf) {
            Some(id) => id,
            None => match self.alloc_slot(buf.len()) {
                Ok(key) => self.append_entry(key, &buf),
                Err(e) => {
                    self.scratch = buf;
                    return Err(e);
                }
            },
        };
        self.bump_hits(id);
        self.scratch = buf;
        self.cursor += 1;
        if self.off == self.diag {
            self.diag += 1;
            self.off = 0;
        } else {
            self.off += 1;
        }
        Ok(id)
    }

    /// Replays up to and including the pair with code rank `target`.
    fn replay_to_inclusive(&mut self, target: u64) -> Result<u32, GError> {
        debug_assert!(self.cursor <= target);
        let mut last = 0;
        while self.cursor <= target {
            self.ensure_dense(self.diag);
            last = self.step()?;
        }
        Ok(last)
    }

    /// Replays forward until exactly `cursor` pairs have been processed.
    pub fn advance_to(&mut self, cursor: u64) -> Result<(), GError> {
        if cursor > self.budget {
            return Err(GError::Budget(format!("cursor {cursor} exceeds budget {}", self.budget)));
        }
        if cursor > self.cursor {
            self.replay_to_inclusive(cursor - 1)?;
        }
        Ok(())
    }

    // ---- lookups ----

    fn key_of(&self, id: u32) -> BitString {
        match self.key_rank[id as usize] {
            BIG_KEY => BitString::from_rank(&self.big_keys[&id]),
            r => BitString::from_rank_u64(r),
        }
    }

    fn ms_to_multiset(&self, id: u32) -> MultisetOfStrings {
        MultisetOfStrings::from_elements(
            self.ms_slice(id).iter().map(|&r| BitString::from_rank_u64(r)).collect(),
        )
    }

    /// Full rank → entry lookup for point queries; builds the lazy index on
    /// the first query past the dense/pending structures.
    fn lookup_rank_full(&mut self, r: u64) -> Option<u32> {
        if let Some(&id) = self.dense.get(r as usize) {
            if id != NONE_ID {
                return Some(id);
            }
            // ranks inside the dense frontier are authoritative
            return None;
        }
        if let Some(&id) = self.pending.get(&r) {
            return Some(id);
        }
        if self.key_index.is_none() {
            let mut index: HashMap<u64, u32, FastState> = HashMap::default();
            for (id, &kr) in self.key_rank.iter().enumerate() {
                if kr != BIG_KEY {
                    index.insert(kr, id as u32);
                }
            }
            self.key_index = Some(index);
        }
        self.key_index.as_ref().unwrap().get(&r).copied()
    }

    fn rank_in_budget(&self, s: &BitString) -> Result<u64, GError> {
        s.rank_u64().ok_or_else(|| {
            GError::Budget(format!("rank of a length-{} string exceeds the machine word", s.len()))
        })
    }

    /// Entry id for a key too long for a machine-word rank, if any. Big
    /// keys are rare (a handful per replay), so a scan suffices.
    fn lookup_big_key(&self, s: &BitString) -> Option<u32> {
        let rank = s.rank();
        self.big_keys.iter().find(|&(_, k)| *k == rank).map(|(&id, _)| id)
    }

    // ---- public operations ----

    /// σ(a,b): replays every pair with smaller pair-code rank first, then
    /// returns the product of the union of both factor multisets.
    pub fn eval(&mut self, a: &BitString, b: &BitString) -> Result<BitString, GError> {
        let ra = self.rank_in_budget(a)?;
        let rb = self.rank_in_budget(b)?;
        let p = pair_rank_u64(ra, rb)
            .ok_or_else(|| GError::Budget("pair-code rank overflows the machine word".into()))?;
        if p > self.budget {
            return Err(GError::Budget(format!(
                "pair-code rank {p} exceeds budget {}",
                self.budget
            )));
        }
        if p < self.cursor {
            // already replayed: both components are keyed below the replay
            // frontier and the union is an interned value
            let fa = self.dense[ra as usize];
            let fb = self.dense[rb as usize];
            debug_assert!(fa != NONE_ID && fb != NONE_ID);
            let mut buf = mem::take(&mut self.scratch);
            buf.clear();
            merge_sorted(self.ms_slice(fa), self.ms_slice(fb), &mut buf);
            let id = self.lookup_ms(&buf).expect("replayed pair has a product");
            self.scratch = buf;
            Ok(self.key_of(id))
        } else {
            let id = self.replay_to_inclusive(p)?;
            Ok(self.key_of(id))
        }
    }

    /// getFactors: the keyed factorization of s, keying s as its own
    /// singleton when absent. Mutates the table outside the replay stream,
    /// exactly like the construction's subroutine.
    pub fn get_factors(&mut self, s: &BitString) -> Result<MultisetOfStrings, GError> {
        if s.rank_u64().is_none() {
            // beyond machine-word ranks only product keys can be known
            if let Some(id) = self.lookup_big_key(s) {
                return Ok(self.ms_to_multiset(id));
            }
            return self.rank_in_budget(s).map(|_| unreachable!());
        }
        let r = self.rank_in_budget(s)?;
        if let Some(id) = self.lookup_rank_full(r) {
            return Ok(self.ms_to_multiset(id));
        }
        let id = self.append_entry(BigUint::from(r), &[r]);
        Ok(self.ms_to_multiset(id))
    }

    /// getProduct: the string assigned to multiset A, assigning a fresh one
    /// when absent.
    pub fn get_product(&mut self, a: &MultisetOfStrings) -> Result<BitString, GError> {
        if a.is_empty() {
            return Err(GError::EmptyMultiset);
        }
        let mut elems = Vec::with_capacity(a.len());
        for e in a.elements() {
            elems.push(e.rank_u64().ok_or_else(|| {
                GError::Budget(format!("multiset element of length {} is out of range", e.len()))
            })?);
        }
        // shortlex order on strings is rank order, so the elements arrive sorted
        if let Some(id) = self.lookup_ms(&elems) {
            return Ok(self.key_of(id));
        }
        let key = self.alloc_slot(elems.len())?;
        let id = self.append_entry(key, &elems);
        Ok(self.key_of(id))
    }

    /// prFact(s): replays at least until the pair (s, ε) has been processed
    /// (forcing s to be keyed), then returns the table value of s. Returns
    /// immediately when s is already keyed, since values never change.
    pub fn prfact(&mut self, s: &BitString) -> Result<MultisetOfStrings, GError> {
        if s.rank_u64().is_none() {
            if let Some(id) = self.lookup_big_key(s) {
                return Ok(self.ms_to_multiset(id));
            }
            return self.rank_in_budget(s).map(|_| unreachable!());
        }
        let r = self.rank_in_budget(s)?;
        if let Some(id) = self.lookup_rank_full(r) {
            return Ok(self.ms_to_multiset(id));
        }
        let p = pair_rank_u64(r, 0)
            .ok_or_else(|| GError::Budget("pair-code rank overflows the machine word".into()))?;
        if p > self.budget {
            return Err(GError::Budget(format!(
                "replaying to pair (s, ε) needs rank {p}, budget {}",
                self.budget
            )));
        }
        self.replay_to_inclusive(p)?;
        let id = self.lookup_rank_full(r).expect("pair (s, ε) keys s");
        Ok(self.ms_to_multiset(id))
    }

    /// Product key length that a multiset of the given cardinality would be
    /// assigned (at minimum); used for growth warnings.
    pub fn min_product_len(&mut self, size: usize) -> Result<u64, GError> {
        self.min_len_for_size(size)
    }

    fn is_product(&self, id: u32) -> bool {
        let elems = self.ms_slice(id);
        !(elems.len() == 1 && self.key_rank[id as usize] == elems[0])
    }

    pub fn table(&self) -> impl Iterator<Item = TableEntry> + '_ {
        (0..self.table_len() as u32).map(|id| TableEntry {
            index: id as usize,
            key: self.key_of(id),
            value: self.ms_to_multiset(id),
            is_product: self.is_product(id),
        })
    }

    /// Golden-test dump: one line per entry,
    /// `<rank-order>,<key>,<multiset_encode(value)>`.
    pub fn dump_table(&self) -> String {
        let mut out = String::new();
        for entry in self.table() {
            let encoded = multiset_encode(&entry.value).expect("table values are nonempty");
            out.push_str(&format!(
                "{},{},{}\n",
                entry.index,
                entry.key.literal(),
                encoded.literal()
            ));
        }
        out
    }

    /// Per-product statistics over the replayed pair stream: (key, multiset
    /// cardinality, number of replayed pairs producing this image).
    pub fn product_stats(&self) -> Vec<(BitString, usize, u64)> {
        (0..self.table_len() as u32)
            .filter(|&id| self.is_product(id))
            .map(|id| (self.key_of(id), self.ms_slice(id).len(), self.hits_of(id)))
            .collect()
    }

    /// Internal structure sizes, for capacity tuning.
    pub fn debug_sizes(&self) -> String {
        format!(
            "entries={} elem_total={} slots={} dense={} pending={} intervals={}",
            self.table_len(),
            self.arena.total_len(),
            self.slots.len(),
            self.dense.len(),
            self.pending.len(),
            self.keyed_intervals.len()
        )
    }
}

fn merge_sorted(a: &[u64], b: &[u64], out: &mut Vec<u64>) {
    out.reserve(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}
