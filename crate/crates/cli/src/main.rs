//! `mukai` - scenario-driven CLI over the lattice calculus.
//!
//! Subcommands: `validate`, `normalize`, `pair`, `graph`, `path`. Scenario
//! files carry the lattice data; see the `fixtures/` directory for worked
//! examples. Exit codes: 0 success, 1 validation/certificate failure,
//! 2 bad input or arguments, 3 search-bound exhaustion.

mod scenario;

use clap::{Parser, Subcommand};
use mukai_core::ssgraph::{build_graph, find_isogeny_path, FieldSpec, Fp2};
use mukai_core::{Error as CoreError, SearchLimits};
use scenario::Scenario;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mukai",
    version,
    about = "Exact Mukai-lattice calculus for abelian surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Variant {
    Full,
    PrimeSplit,
    Pullback,
    Supersingular,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the lattice, word and cover sections of a scenario file.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a normalization variant and emit the result trace as JSON.
    Normalize {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        variant: Variant,
        /// Comma-separated primes (prime-split needs two, pullback and
        /// supersingular use the first as auxiliary prime).
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        /// Seed for a random word when the scenario has none.
        #[arg(long)]
        seed: Option<u64>,
        /// Render a human-readable table instead of JSON.
        #[arg(long, conflicts_with = "json")]
        table: bool,
        /// Emit JSON (the default).
        #[arg(long)]
        json: bool,
    },
    /// Mukai pairing of two vectors under the scenario lattice.
    Pair {
        scenario: PathBuf,
        /// First vector as comma-separated coordinates r,l1,..,l_rho,chi.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v: Vec<i64>,
        /// Second vector, same encoding.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<i64>,
    },
    /// Build the supersingular ell-isogeny graph for a prime p.
    Graph {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long, conflicts_with = "json")]
        table: bool,
        /// Emit JSON (the default).
        #[arg(long)]
        json: bool,
    },
    /// Shortest isogeny path between two j-invariants ("c0,c1" encoding).
    Path {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
}

fn search_limits() -> SearchLimits {
    match std::env::var("MUKAI_SEARCH_BOUND_SCALE") {
        Ok(s) => match s.parse::<u64>() {
            Ok(n) if n >= 1 => SearchLimits::new(n),
            _ => {
                eprintln!("warning: ignoring invalid MUKAI_SEARCH_BOUND_SCALE={s}");
                SearchLimits::default()
            }
        },
        Err(_) => SearchLimits::default(),
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_SEARCH_BOUND: u8 = 3;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn error_exit(e: &CoreError) -> u8 {
    match e {
        CoreError::SearchBound { .. } => EXIT_SEARCH_BOUND,
        CoreError::DimensionMismatch { .. }
        | CoreError::Invalid(_)
        | CoreError::Precondition(_)
        | CoreError::Serde(_) => EXIT_BAD_INPUT,
        CoreError::Inconsistent(_) => EXIT_FAIL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario, json } => cmd_validate(&scenario, json),
        Command::Normalize {
            scenario,
            variant,
            primes,
            seed,
            table,
            json: _,
        } => cmd_normalize(&scenario, variant, &primes, seed, table),
        Command::Pair { scenario, v, w } => cmd_pair(&scenario, &v, &w),
        Command::Graph {
            p,
            ell,
            table,
            json: _,
        } => cmd_graph(p, ell, table),
        Command::Path { p, ell, from, to } => cmd_path(p, ell, &from, &to),
    }
}

fn cmd_validate(path: &Path, json: bool) -> ExitCode {
    let sc = match Scenario::load(path) {
        Ok(sc) => sc,
        Err(e) => return fail(EXIT_BAD_INPUT, e),
    };
    let report = sc.validate();
    if json {
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else {
        for line in &report.checks {
            println!("{}", line);
        }
        println!("{}", if report.valid { "valid" } else { "INVALID" });
    }
    if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn cmd_normalize(
    path: &Path,
    variant: Variant,
    primes: &[u64],
    seed: Option<u64>,
    table: bool,
) -> ExitCode {
    let sc = match Scenario::load(path) {
        Ok(sc) => sc,
        Err(e) => return fail(EXIT_BAD_INPUT, e),
    };
    let limits = search_limits();
    let result = match sc.run_normalize(variant_key(variant), primes, seed, limits) {
        Ok(r) => r,
        Err(scenario::RunError::Core(e)) => return fail(error_exit(&e), e),
        Err(scenario::RunError::Usage(msg)) => return fail(EXIT_BAD_INPUT, msg),
    };
    if table {
        print_result_table(&result);
    } else {
        println!(
            "{}",
            serde_json::to_string(&result).expect("result serializes")
        );
    }
    if result.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn variant_key(v: Variant) -> &'static str {
    match v {
        Variant::Full => "full",
        Variant::PrimeSplit => "prime-split",
        Variant::Pullback => "pullback",
        Variant::Supersingular => "supersingular",
    }
}

fn print_result_table(result: &mukai_core::NormalizationResult) {
    println!(
        "final vector: r = {}, l = ({}), chi = {}",
        result.final_vector.r,
        result
            .final_vector
            .l
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", "),
        result.final_vector.chi
    );
    println!("dual parity:  {}", u8::from(result.dual_parity));
    println!("word length:  {}", result.word.len());
    println!(
        "search stats: n = {}, d = {}, loops = {}",
        result.stats.n, result.stats.d, result.stats.loops
    );
    for entry in &result.certificate {
        println!(
            "  [{}] {} {}",
            if entry.pass { "pass" } else { "FAIL" },
            entry.name,
            entry.witness
        );
    }
}

fn cmd_pair(path: &Path, v: &[i64], w: &[i64]) -> ExitCode {
    let sc = match Scenario::load(path) {
        Ok(sc) => sc,
        Err(e) => return fail(EXIT_BAD_INPUT, e),
    };
    match sc.pair(v, w) {
        Ok(out) => {
            println!(
                "{}",
                serde_json::to_string(&out).expect("pairing serializes")
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(error_exit(&e), e),
    }
}

fn parse_j(fs: &FieldSpec, text: &str) -> Result<Fp2, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected j as \"c0,c1\", got {text:?}"));
    }
    let c0: i64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| format!("bad c0: {e}"))?;
    let c1: i64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| format!("bad c1: {e}"))?;
    let p = fs.p as i64;
    Ok(fs.elem(c0.rem_euclid(p) as u64, c1.rem_euclid(p) as u64))
}

fn check_graph_args(p: u64, ell: u64) -> Result<FieldSpec, String> {
    if ell != 2 && ell != 3 {
        return Err(format!("ell = {ell} unsupported (2 or 3)"));
    }
    if p <= 3 || ell == p {
        return Err(format!("p = {p} must be a prime > 3 different from ell"));
    }
    FieldSpec::canonical(p).map_err(|e| e.to_string())
}

fn cmd_graph(p: u64, ell: u64, table: bool) -> ExitCode {
    let fs = match check_graph_args(p, ell) {
        Ok(fs) => fs,
        Err(e) => return fail(EXIT_BAD_INPUT, e),
    };
    match build_graph(&fs, ell) {
        Ok(g) => {
            if table {
                println!(
                    "p = {}, ell = {}, {} vertices",
                    g.p,
                    g.ell,
                    g.vertices.len()
                );
                for (i, row) in g.adjacency.iter().enumerate() {
                    let j = g.vertices[i];
                    let ns: Vec<String> = row
                        .iter()
                        .map(|&k| format!("({},{})", g.vertices[k].c0, g.vertices[k].c1))
                        .collect();
                    println!("  ({},{}) -> {}", j.c0, j.c1, ns.join(" "));
                }
            } else {
                println!("{}", serde_json::to_string(&g).expect("graph serializes"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_FAIL, e),
    }
}

fn cmd_path(p: u64, ell: u64, from: &str, to: &str) -> ExitCode {
    let fs = match check_graph_args(p, ell) {
        Ok(fs) => fs,
        Err(e) => return fail(EXIT_BAD_INPUT, e),
    };
    let (src, dst) = match (parse_j(&fs, from), parse_j(&fs, to)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(EXIT_BAD_INPUT, e),
    };
    match find_isogeny_path(&fs, ell, src, dst) {
        Ok(path) => {
            println!("{}", serde_json::to_string(&path).expect("path serializes"));
            ExitCode::SUCCESS
        }
        Err(e @ CoreError::Precondition(_)) => fail(EXIT_BAD_INPUT, e),
        Err(e) => fail(EXIT_FAIL, e),
    }
}
