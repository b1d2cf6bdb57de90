//! Command-line workbench for total associative functions on bitstrings.
//!
//! Exit status contract: 0 for success / PASS verdicts, 1 for FAIL
//! verdicts, 2 for budget exhaustion and usage errors. The empty string is
//! spelled `@e` everywhere (arguments, CSV, reports). All randomness flows
//! from `--seed`, so identical configurations produce byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use assoc_lab::ambiguity::{
    ambiguity_profile, check_h_to_one, preimage_census, write_census_csv, write_profile_csv,
    AmbiguityBound, BinaryOp, Census, CensusError, HVerdict, OpError,
};
use assoc_lab::aowf::{case_table_check, AowfError, SigmaAowf, WitnessRelation};
use assoc_lab::keyagree::run_session;
use assoc_lab::ops::{parse_op, GFunOp};
use assoc_lab::prober::{
    find_short_witness, lower_bound_demo, measure_output_bound, verify_witness, LengthBoundParams,
    ProbeError, Verdict, DEFAULT_SEARCH_BUDGET,
};
use assoc_lab::strings::BitString;

const EXIT_FAIL: u8 = 1;
const EXIT_BUDGET: u8 = 2;

/// Product keys longer than this trigger a growth warning for gfun ops.
const GROWTH_WARN_LEN: u64 = 1 << 16;

#[derive(Parser)]
#[command(
    name = "assoc-lab",
    about = "Workbench for total associative functions on bitstrings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply an operation to two bitstrings (spell the empty string @e)
    Eval {
        /// Operation selector: concat | max | proj | gfun:<g> | aowf:<relation>
        #[arg(long)]
        op: String,
        a: BitString,
        b: BitString,
        /// For gfun ops: also dump the factor table
        #[arg(long)]
        dump_table: bool,
        /// Write the output here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force preimage census over all pairs of rank <= max-rank (CSV)
    Census {
        #[arg(long)]
        op: String,
        #[arg(long)]
        max_rank: u64,
        /// Cap on the number of enumerated pairs
        #[arg(long, default_value_t = 100_000_000)]
        pair_budget: u64,
        /// Check the census against an ambiguity bound (linear | log2 | sqrt | const<c>)
        #[arg(long)]
        h_bound: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum preimage count per output length (CSV)
    Profile {
        #[arg(long)]
        op: String,
        #[arg(long)]
        max_rank: u64,
        #[arg(long, default_value_t = 100_000_000)]
        pair_budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classified preimage case table for one image of a witness-relation op (CSV)
    Cases {
        /// Witness relation name: parity-up | mod3-few
        #[arg(long)]
        relation: String,
        image: BitString,
        /// Component length cap for the brute-force scan
        #[arg(long, default_value_t = 6)]
        len_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a short high-ambiguity witness and verify it against a census
    Probe {
        #[arg(long)]
        op: String,
        /// Required number of distinct one-sided factors
        #[arg(long)]
        k: usize,
        /// Census rank bound for the count cross-check
        #[arg(long, default_value_t = 510)]
        max_rank: u64,
        /// Cap on operation applications during the search
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the iterated-product output-length bound; optionally run the
    /// finite ambiguity lower-bound demo
    Bound {
        #[arg(long)]
        op: String,
        /// Declared bound threshold m (|op(x,y)| < max(|x|,|y|)^i above it)
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Declared bound exponent i
        #[arg(long, default_value_t = 2)]
        i: u32,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        /// Sampled tuples per k
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run the lower-bound demo over images of length <= this cap
        #[arg(long)]
        n_cap: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-party key-agreement demo: secrets x and z, public y
    Keyagree {
        #[arg(long)]
        op: String,
        x: BitString,
        y: BitString,
        z: BitString,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {path:?}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Maps an operation error to the process exit code it deserves.
fn op_error_exit(e: &OpError) -> u8 {
    match e {
        OpError::Budget(_) | OpError::Nontermination(_) => EXIT_BUDGET,
        OpError::Other(_) => EXIT_FAIL,
    }
}

fn run_census(
    op: &dyn BinaryOp,
    max_rank: u64,
    pair_budget: u64,
) -> Result<Census, (String, u8)> {
    preimage_census(op, max_rank, pair_budget).map_err(|e| match e {
        CensusError::Budget { .. } => (e.to_string(), EXIT_BUDGET),
        CensusError::Op(ref op_err) => {
            let code = op_error_exit(op_err);
            (e.to_string(), code)
        }
    })
}

fn cmd_eval(
    selector: &str,
    a: &BitString,
    b: &BitString,
    dump_table: bool,
    out: &Option<PathBuf>,
) -> Result<(), (String, u8)> {
    if dump_table && !selector.starts_with("gfun:") {
        return Err(("--dump-table applies only to gfun operations".into(), EXIT_BUDGET));
    }
    if let Some(g_name) = selector.strip_prefix("gfun:") {
        let g = AmbiguityBound::by_name(g_name)
            .ok_or_else(|| (format!("unknown growth bound `{g_name}`"), EXIT_BUDGET))?;
        let op = GFunOp::new(g);
        let result =
            op.apply(a, b).map_err(|e| (e.to_string(), op_error_exit(&e)))?;
        // growth warning: slowly growing g forces long product keys
        {
            let mut m = op.machine();
            if let (Ok(fa), Ok(fb)) = (m.prfact(a), m.prfact(b)) {
                let size = fa.union(&fb).len();
                if let Ok(l) = m.min_product_len(size) {
                    if l > GROWTH_WARN_LEN {
                        eprintln!(
                            "warning: a factor multiset of size {size} forces product length {l} (> {GROWTH_WARN_LEN})"
                        );
                    }
                }
            }
        }
        let mut text = format!("{result}\n");
        if dump_table {
            text.push_str(&op.machine().dump_table());
        }
        emit(out, &text).map_err(|m| (m, EXIT_BUDGET))?;
        return Ok(());
    }
    let op = parse_op(selector).map_err(|m| (m, EXIT_BUDGET))?;
    let result = op.apply(a, b).map_err(|e| (e.to_string(), op_error_exit(&e)))?;
    emit(out, &format!("{result}\n")).map_err(|m| (m, EXIT_BUDGET))?;
    Ok(())
}

fn cmd_census(
    selector: &str,
    max_rank: u64,
    pair_budget: u64,
    h_bound: &Option<String>,
    out: &Option<PathBuf>,
) -> Result<u8, (String, u8)> {
    let op = parse_op(selector).map_err(|m| (m, EXIT_BUDGET))?;
    let census = run_census(op.as_ref(), max_rank, pair_budget)?;
    let mut buf = Vec::new();
    write_census_csv(&census, &mut buf).expect("in-memory write");
    emit(out, &String::from_utf8(buf).expect("csv is utf-8")).map_err(|m| (m, EXIT_BUDGET))?;
    if let Some(name) = h_bound {
        let h = AmbiguityBound::by_name(name)
            .ok_or_else(|| (format!("unknown ambiguity bound `{name}`"), EXIT_BUDGET))?;
        match check_h_to_one(&census, &h) {
            HVerdict::Pass => println!("PASS: every complete image is {name}(n)-to-one"),
            HVerdict::Fail { image, count, allowed } => {
                println!(
                    "FAIL: image {image} has {count} preimages, bound {name} allows {allowed}"
                );
                return Ok(EXIT_FAIL);
            }
        }
    }
    Ok(0)
}

fn cmd_profile(
    selector: &str,
    max_rank: u64,
    pair_budget: u64,
    out: &Option<PathBuf>,
) -> Result<(), (String, u8)> {
    let op = parse_op(selector).map_err(|m| (m, EXIT_BUDGET))?;
    let census = run_census(op.as_ref(), max_rank, pair_budget)?;
    let rows = ambiguity_profile(&census);
    let mut buf = Vec::new();
    write_profile_csv(&rows, &mut buf).expect("in-memory write");
    emit(out, &String::from_utf8(buf).expect("csv is utf-8")).map_err(|m| (m, EXIT_BUDGET))
}

fn cmd_cases(
    relation: &str,
    image: &BitString,
    len_cap: usize,
    out: &Option<PathBuf>,
) -> Result<(), (String, u8)> {
    let rel = WitnessRelation::by_name(relation)
        .ok_or_else(|| (format!("unknown witness relation `{relation}`"), EXIT_BUDGET))?;
    let op = SigmaAowf::new(rel);
    let report = case_table_check(&op, image, len_cap).map_err(|e| match e {
        AowfError::Budget(_) => (e.to_string(), EXIT_BUDGET),
        AowfError::Domain(_) => (e.to_string(), EXIT_FAIL),
    })?;
    let mut text = String::from("output,s,t,case\n");
    for p in &report.preimages {
        let _ = writeln!(
            text,
            "{},{},{},{}{}",
            report.image.literal(),
            p.s.literal(),
            p.t.literal(),
            p.s_class.label(),
            p.t_class.label()
        );
    }
    emit(out, &text).map_err(|m| (m, EXIT_BUDGET))
}

fn probe_error(e: ProbeError) -> (String, u8) {
    match e {
        ProbeError::Budget { .. } => (e.to_string(), EXIT_BUDGET),
        ProbeError::Op(ref op_err) => {
            let code = op_error_exit(op_err);
            (e.to_string(), code)
        }
        ProbeError::NotAssociative(_) | ProbeError::NotDeclared => (e.to_string(), EXIT_FAIL),
    }
}

fn cmd_probe(
    selector: &str,
    k: usize,
    max_rank: u64,
    budget: u64,
    out: &Option<PathBuf>,
) -> Result<u8, (String, u8)> {
    let op = parse_op(selector).map_err(|m| (m, EXIT_BUDGET))?;
    let witness = find_short_witness(op.as_ref(), k, budget).map_err(probe_error)?;
    emit(out, &format!("{}\n", witness.to_json())).map_err(|m| (m, EXIT_BUDGET))?;
    match verify_witness(op.as_ref(), &witness, max_rank) {
        Verdict::Pass { census_count } => {
            println!(
                "PASS: image {} has {} factors on the {} side; census count {census_count}",
                witness.image,
                witness.factors.len(),
                witness.side.label()
            );
            Ok(0)
        }
        Verdict::PassUnverifiedCount => {
            println!(
                "PASS (count unverified): image {} has {} factors; census at rank {max_rank} cannot cover it",
                witness.image,
                witness.factors.len()
            );
            Ok(0)
        }
        Verdict::Fail { reason } => {
            println!("FAIL: {reason}");
            Ok(EXIT_FAIL)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    selector: &str,
    m: usize,
    i: u32,
    k_max: usize,
    samples: usize,
    seed: u64,
    n_cap: Option<usize>,
    budget: u64,
    out: &Option<PathBuf>,
) -> Result<u8, (String, u8)> {
    let op = parse_op(selector).map_err(|m| (m, EXIT_BUDGET))?;
    let params = LengthBoundParams { m, i };
    let report = measure_output_bound(op.as_ref(), params, k_max, samples, seed)
        .map_err(|e| (e.to_string(), op_error_exit(&e)))?;
    let mut text = format!(
        "op: {}\nm: {m}\ni: {i}\nj: {}\nsamples: {}\nviolations: {}\n",
        op.name(),
        report.j,
        report.samples_run,
        report.violations.len()
    );
    for v in &report.violations {
        let tuple: Vec<String> = v.tuple.iter().map(BitString::literal).collect();
        let _ = writeln!(
            text,
            "violation at k={}: |product|={} not below {} for ({})",
            v.k,
            v.product_len,
            v.allowed_exclusive,
            tuple.join(",")
        );
    }
    let mut code = 0;
    if report.violations.is_empty() {
        text.push_str("PASS: all sampled products respect the length bound\n");
    } else {
        text.push_str("FAIL: sampled products violate the length bound\n");
        code = EXIT_FAIL;
    }
    if let Some(n_cap) = n_cap {
        let demo = lower_bound_demo(op.as_ref(), params, n_cap, budget).map_err(probe_error)?;
        let _ = writeln!(
            text,
            "lower-bound demo: n={} l={} k={} image_len={} factors={} g(image_len)={} ratio={:.2}",
            demo.n,
            demo.l,
            demo.k,
            demo.image_len,
            demo.factor_count,
            demo.g_of_len,
            demo.factor_count as f64 / demo.g_of_len as f64
        );
        let _ = writeln!(text, "witness: {}", demo.witness.to_json());
    }
    emit(out, &text).map_err(|m| (m, EXIT_BUDGET))?;
    Ok(code)
}

fn cmd_keyagree(
    selector: &str,
    x: &BitString,
    y: &BitString,
    z: &BitString,
    out: &Option<PathBuf>,
) -> Result<u8, (String, u8)> {
    let op = parse_op(selector).map_err(|m| (m, EXIT_BUDGET))?;
    let transcript =
        run_session(op.as_ref(), x, y, z).map_err(|e| (e.to_string(), op_error_exit(&e)))?;
    emit(out, &transcript.render()).map_err(|m| (m, EXIT_BUDGET))?;
    Ok(if transcript.keys_agree() { 0 } else { EXIT_FAIL })
}

fn run(cli: Cli) -> Result<u8, (String, u8)> {
    match &cli.command {
        Command::Eval { op, a, b, dump_table, out } => {
            cmd_eval(op, a, b, *dump_table, out).map(|()| 0)
        }
        Command::Census { op, max_rank, pair_budget, h_bound, out } => {
            cmd_census(op, *max_rank, *pair_budget, h_bound, out)
        }
        Command::Profile { op, max_rank, pair_budget, out } => {
            cmd_profile(op, *max_rank, *pair_budget, out).map(|()| 0)
        }
        Command::Cases { relation, image, len_cap, out } => {
            cmd_cases(relation, image, *len_cap, out).map(|()| 0)
        }
        Command::Probe { op, k, max_rank, budget, out } => {
            cmd_probe(op, *k, *max_rank, *budget, out)
        }
        Command::Bound { op, m, i, k_max, samples, seed, n_cap, budget, out } => {
            cmd_bound(op, *m, *i, *k_max, *samples, *seed, *n_cap, *budget, out)
        }
        Command::Keyagree { op, x, y, z, out } => cmd_keyagree(op, x, y, z, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((message, code)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
