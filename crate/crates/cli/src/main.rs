//! `robustfin`: arbitrage, efficient sets and superhedging prices on finite
//! scenario markets, with exact certificates in every report.

mod commands;
mod load;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use commands::Report;
use load::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeSel {
    Omega,
    OmegaStar,
    QuasiSure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Parser)]
#[command(name = "robustfin", version, about = "Model-independent arbitrage and superhedging on finite scenario markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
}

#[derive(clap::Args)]
struct MarketArgs {
    /// Market JSON file, or the name of a bundled fixture.
    #[arg(long)]
    market: String,
    #[arg(long)]
    priors: Option<String>,
    #[arg(long, value_enum, default_value = "omega")]
    scope: ScopeSel,
    /// JSON array of arrays of path ids.
    #[arg(long)]
    class_sets: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Every arbitrage notion on the scope, plus the prior-based ones when priors are given.
    Arbitrage(MarketArgs),
    /// The efficient set with its removal reasons and martingale witness.
    EfficientSet(MarketArgs),
    /// Fundamental theorem statements and their equivalence.
    Ftap(MarketArgs),
    /// Superhedging price of a claim.
    Price {
        #[command(flatten)]
        m: MarketArgs,
        #[arg(long)]
        claim: String,
    },
    /// The five-term superhedging duality chain.
    DualityChain {
        #[command(flatten)]
        m: MarketArgs,
        #[arg(long)]
        claim: String,
    },
    /// Extension of the efficient-set price to the scope, with its assumption checks.
    Extension {
        #[command(flatten)]
        m: MarketArgs,
        #[arg(long)]
        claim: String,
        /// JSON array of `{"path", "parents"}` closure points.
        #[arg(long)]
        limit_points: Option<String>,
    },
    /// One-period polyhedral market: SA, USA, supermartingale measures, prices.
    Poly {
        #[arg(long)]
        market: String,
        /// JSON `{"name", "pieces": [{"a", "b"}]}`, one affine piece per cell.
        #[arg(long)]
        claim: Option<String>,
    },
    /// Replays a bundled worked example.
    Examples {
        #[arg(long)]
        name: String,
    },
    /// Re-checks every certificate in a JSON report without re-solving.
    Verify {
        #[arg(long)]
        report: String,
    },
    /// Consistency sweep over seeded random instances.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

fn need<'a>(x: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    x.as_deref().ok_or_else(|| CliError::Input(format!("this command requires {flag}")))
}

fn run(cmd: &Command) -> Result<Report, CliError> {
    let ctx = |a: &MarketArgs| -> Result<_, CliError> {
        let m = load::market(&a.market)?;
        let p = a.priors.as_deref().map(|f| load::priors(&m, f)).transpose()?;
        let cs = a.class_sets.as_deref().map(|f| load::class_sets(&m, f)).transpose()?;
        Ok((m, p, cs))
    };
    match cmd {
        Command::Arbitrage(a) => {
            let (m, p, cs) = ctx(a)?;
            commands::arbitrage(&m, a.scope, p.as_ref(), cs.as_deref())
        }
        Command::EfficientSet(a) => {
            let (m, p, _) = ctx(a)?;
            commands::efficient_set(&m, a.scope, p.as_ref())
        }
        Command::Ftap(a) => {
            need(&a.priors, "--priors")?;
            let (m, p, cs) = ctx(a)?;
            commands::ftap(&m, p.as_ref().expect("checked"), cs.as_deref())
        }
        Command::Price { m: a, claim } => {
            let (m, p, _) = ctx(a)?;
            let c = load::claim(&m, claim)?;
            commands::price(&m, a.scope, p.as_ref(), &c)
        }
        Command::DualityChain { m: a, claim } => {
            need(&a.priors, "--priors")?;
            let (m, p, _) = ctx(a)?;
            let c = load::claim(&m, claim)?;
            commands::duality(&m, p.as_ref().expect("checked"), &c)
        }
        Command::Extension { m: a, claim, limit_points } => {
            let (m, p, _) = ctx(a)?;
            let c = load::claim(&m, claim)?;
            let limits = limit_points.as_deref().map(|f| load::limit_points(&m, f)).transpose()?.unwrap_or_default();
            commands::extension(&m, a.scope, p.as_ref(), &c, &limits)
        }
        Command::Poly { market, claim } => {
            let pm = load::poly_market(market)?;
            let c = claim.as_deref().map(load::poly_claim).transpose()?;
            commands::poly(&pm, c.as_ref().map(|c| (c.name.as_str(), c.pieces.as_slice())))
        }
        Command::Examples { name } => commands::example(name),
        Command::Verify { report } => Ok(commands::verify(&load::parse::<Value>(report)?)),
        Command::Random { seed, count } => commands::random_suite(*seed, *count),
    }
}

/// Keys holding LPs and certificates, summarized rather than expanded in tables.
const BULKY: &[&str] = &["absence", "certificate", "certificates", "lp", "outcome", "table", "aggregation", "scheme", "nodes"];

fn table(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                match x {
                    Value::Array(xs) if BULKY.contains(&k.as_str()) => out.push_str(&format!("{key:<48} [{} entries]\n", xs.len())),
                    Value::Object(_) if BULKY.contains(&k.as_str()) => out.push_str(&format!("{key:<48} {{..}}\n")),
                    _ => table(x, &key, out),
                }
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = xs.iter().map(scalar).collect();
            out.push_str(&format!("{prefix:<48} [{}]\n", items.join(", ")));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                table(x, &format!("{prefix}[{i}]"), out);
            }
        }
        x => out.push_str(&format!("{prefix:<48} {}\n", scalar(x))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        x => x.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap reports usage errors with code 2, which is reserved here.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli.command) {
        Ok(r) => {
            let text = match cli.format {
                Format::Json => format!("{}\n", r.value),
                Format::Table => {
                    let mut s = String::new();
                    table(&r.value, "", &mut s);
                    s
                }
            };
            // A closed pipe downstream is not an analysis failure.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            if r.problems.is_empty() {
                ExitCode::SUCCESS
            } else {
                for p in &r.problems {
                    eprintln!("internal inconsistency: {p}");
                }
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
