//! Exact-arithmetic analysis of robust finite path-space markets.
//!
//! Arbitrage detection across the usual taxonomy, efficient scenario sets,
//! calibrated martingale measures, and pathwise or quasi-sure superhedging
//! with verifiable duals. All numbers are exact rationals ([`Rat`]); every
//! LP answer carries a certificate checkable by [`exactlp::check_certificate`].

pub mod arbitrage;
pub mod efficient_set;
pub mod exactlp;
pub mod fixtures;
pub mod linalg;
pub mod market;
pub(crate) mod model;
pub mod oneperiod_poly;
pub mod priors;
pub mod random;
pub mod rat;
pub mod superhedge;

pub use arbitrage::{ArbitrageError, ArbitrageVerdict, Notion};
pub use efficient_set::{EfficientSet, LimitPoint};
pub use exactlp::{check_certificate, solve, LinearProgram, LpOutcome, LpStatus};
pub use market::{Market, MarketData, MarketError, Measure, NodeRef, PathSet, Strategy};
pub use oneperiod_poly::{PolyMarket, PolyVerdict};
pub use priors::{PriorSet, PriorsFile};
pub use rat::{ExtRat, Rat};
pub use superhedge::{Claim, SuperhedgeResult};
