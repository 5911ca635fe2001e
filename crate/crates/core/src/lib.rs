//! Incomplete-market valuation of single-name credit default swap portfolios.
//!
//! Illiquid CDS maturities cannot be replicated by the handful of contracts that
//! trade on the liquid market, so they carry a range of fair prices rather than a
//! single one. This crate computes:
//!
//! - the cost-minimizing static superhedge of a portfolio, solved as a linear
//!   program over default-time/recovery paths ([`hedge`]);
//! - closed-form single-instrument ("vanilla") hedge bounds ([`vanilla`]);
//! - fair-price ranges, bid/ask quotes and capital-at-risk figures ([`valuation`]);
//! - the probability density of the hedged position's present value
//!   ([`distribution`]);
//! - random-portfolio risk-reduction studies and bound sweeps ([`study`]).
//!
//! All quantities are per unit notional and stored as decimals (0.1808, not 18.08%).

// `!(x > 0.0)` style checks deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod distribution;
pub mod error;
pub mod hedge;
pub mod lp;
pub mod market;
pub mod payoff;
pub mod quadrature;
pub mod study;
pub mod valuation;
pub mod vanilla;

pub use config::Config;
pub use distribution::{BinningConfig, DensityEstimate, DiscreteSpectrum};
pub use error::{Error, Result};
pub use hedge::{Discretization, HedgeOutcome, HedgeProblem, HedgeSolution, Side};
pub use market::{DiscountCurve, LiquidMarket, PhysicalMeasure, RecoveryLaw, TenorGrid};
pub use payoff::{HedgedPosition, Path, PayoffModel, Portfolio, QuarterCoefficients};
pub use study::{CdfEstimate, StudyConfig, TrialRecord, Variant};
pub use valuation::{BidAskRange, QuadratureConfig, ValuationResult};
pub use vanilla::VanillaBound;
