use assoc_lab::ambiguity::AmbiguityBound;
use assoc_lab::gconstruct::GMachine;
use std::time::Instant;

fn main() {
    let target: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(537_000_000);
    let mut m = GMachine::with_limits(AmbiguityBound::linear(), u64::MAX, 1 << 20);
    let t0 = Instant::now();
    let mut next = 1_000_000u64;
    while next < target {
        m.advance_to(next).unwrap();
        println!("cursor={} entries={} stats={} elapsed={:?}", m.cursor(), m.table_len(), m.debug_sizes(), t0.elapsed());
        next *= 2;
    }
    m.advance_to(target).unwrap();
    println!("cursor={} entries={} stats={} elapsed={:?}", m.cursor(), m.table_len(), m.debug_sizes(), t0.elapsed());
}
