//! Reading input files, with bundled fixtures as a fallback.

use std::error::Error as StdError;
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use robustfin_core::efficient_set::LimitPoint;
use robustfin_core::exactlp::LpError;
use robustfin_core::fixtures;
use robustfin_core::market::{Market, MarketData, PathSet};
use robustfin_core::oneperiod_poly::{AffinePiece, PolyError, PolyMarket};
use robustfin_core::priors::{PriorSet, PriorsFile};
use robustfin_core::superhedge::Claim;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 1.
    Input(String),
    /// Exit code 2.
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Internal(m) => write!(f, "internal inconsistency: {m}"),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

/// Library errors are input errors unless an LP failure or a failed
/// cross-check sits in the chain.
pub fn lib<E: StdError + 'static>(e: E) -> CliError {
    let mut cur: Option<&(dyn StdError + 'static)> = Some(&e);
    while let Some(err) = cur {
        if err.downcast_ref::<LpError>().is_some() || matches!(err.downcast_ref::<PolyError>(), Some(PolyError::InternalInconsistency(_))) {
            return CliError::Internal(e.to_string());
        }
        cur = err.source();
    }
    CliError::Input(e.to_string())
}

const BUNDLED: &[(&str, &str)] = &[
    ("binom", fixtures::BINOM),
    ("gap", fixtures::GAP),
    ("ex35", fixtures::EX35),
    ("inta", fixtures::INTA),
    ("binom-omega-priors", fixtures::BINOM_OMEGA_PRIORS),
    ("gap-omega-priors", fixtures::GAP_OMEGA_PRIORS),
    ("gap-12-priors", fixtures::GAP_12_PRIORS),
    ("inta-priors", fixtures::INTA_PRIORS),
    ("gap-zero-indicator", fixtures::GAP_ZERO_INDICATOR),
    ("binom-call", fixtures::BINOM_CALL),
    ("ex35-claim", fixtures::EX35_CLAIM),
    ("sausa", fixtures::SAUSA),
    ("ex31", fixtures::EX31),
];

/// File contents, or a bundled fixture when no such file exists and the
/// name (without `.json`) matches one.
fn read(path: &str) -> Result<String, CliError> {
    if Path::new(path).exists() {
        return std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")));
    }
    let stem = path.strip_suffix(".json").unwrap_or(path);
    BUNDLED
        .iter()
        .find(|(name, _)| *name == stem)
        .map(|(_, src)| src.to_string())
        .ok_or_else(|| CliError::Input(format!("{path}: no such file or bundled fixture")))
}

pub fn parse<T: DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => CliError::Input(format!("schema error in {path}: {e}")),
            _ => CliError::Input(format!("parse error at {path}:{}:{}: {e}", e.line(), e.column())),
        }
    })
}

pub fn market(path: &str) -> Result<Market, CliError> {
    let data: MarketData = parse(path)?;
    Market::new(data).map_err(|e| CliError::Input(format!("schema error in {path}: {e}")))
}

pub fn priors(m: &Market, path: &str) -> Result<PriorSet, CliError> {
    let file: PriorsFile = parse(path)?;
    PriorSet::from_records(m, &file).map_err(|e| CliError::Input(format!("schema error in {path}: {e}")))
}

pub fn claim(m: &Market, path: &str) -> Result<Claim, CliError> {
    let c: Claim = parse(path)?;
    if c.g.len() != m.num_paths() {
        return Err(CliError::Input(format!("schema error in {path}: field `g` has {} entries, market has {} paths", c.g.len(), m.num_paths())));
    }
    Ok(c)
}

/// Class-𝒮 sets: an array of arrays of path ids.
pub fn class_sets(m: &Market, path: &str) -> Result<Vec<PathSet>, CliError> {
    let raw: Vec<Vec<String>> = parse(path)?;
    raw.iter().map(|ids| m.set_from_ids(ids).map_err(|e| CliError::Input(format!("schema error in {path}: {e}")))).collect()
}

#[derive(Deserialize)]
struct LimitRecord {
    path: String,
    parents: Vec<String>,
}

/// Limit points: `[{"path": id, "parents": [ids]}]`.
pub fn limit_points(m: &Market, path: &str) -> Result<Vec<LimitPoint>, CliError> {
    let raw: Vec<LimitRecord> = parse(path)?;
    let bad = |e: robustfin_core::MarketError| CliError::Input(format!("schema error in {path}: {e}"));
    raw.iter().map(|r| Ok(LimitPoint { path: m.path_index(&r.path).map_err(bad)?, parents: m.set_from_ids(&r.parents).map_err(bad)? })).collect()
}

pub fn poly_market(path: &str) -> Result<PolyMarket, CliError> {
    let pm: PolyMarket = parse(path)?;
    pm.validate().map_err(|e| CliError::Input(format!("schema error in {path}: {e}")))?;
    Ok(pm)
}

/// A claim affine on each cell of a polyhedral market.
#[derive(Deserialize)]
pub struct PolyClaim {
    pub name: String,
    pub pieces: Vec<AffinePiece>,
}

pub fn poly_claim(path: &str) -> Result<PolyClaim, CliError> {
    parse(path)
}
