//! Fair prices, bid/ask ranges, capital at risk and rates of return.
//!
//! Expectations are taken under the physical measure. Because a position is
//! affine in the recovery rate at fixed default time, its mean only needs the
//! mean recovery; other functionals integrate over recovery numerically.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hedge::{
    hedge_single, optimize_hedge, Discretization, HedgeProblem, HedgeSolution, Side,
};
use crate::market::{
    DiscountCurve, LiquidMarket, PhysicalMeasure, RecoveryDensity, RecoveryLaw, TenorGrid,
};
use crate::payoff::{HedgedPosition, PayoffModel};
use crate::quadrature::GaussLegendre;

/// Default-time quadrature per quarter and recovery quadrature on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub nodes_per_quarter: usize,
    pub recovery_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes_per_quarter: 16,
            recovery_nodes: 64,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_quarter < 2 || self.recovery_nodes < 2 {
            return Err(Error::Config(
                "quadrature needs at least 2 nodes per quarter and per recovery interval".into(),
            ));
        }
        Ok(())
    }
}

/// Default-time nodes `(quarter, tau, probability weight)`; each quarter's
/// weights are rescaled to sum to its exact default probability.
fn default_time_nodes(
    model: &PayoffModel,
    measure: &PhysicalMeasure,
    quad: &QuadratureConfig,
) -> Vec<(usize, f64, f64)> {
    let gl = GaussLegendre::new(quad.nodes_per_quarter);
    let grid = model.grid();
    let h = measure.hazard();
    let mut nodes = Vec::with_capacity(grid.n_quarters() * gl.len());
    for k in 1..=grid.n_quarters() {
        let (a, b) = (grid.time(k - 1), grid.time(k));
        let raw: Vec<(f64, f64)> = gl
            .mapped(a, b)
            .map(|(t, w)| (t, w * h * (-h * t).exp()))
            .collect();
        let approx: f64 = raw.iter().map(|r| r.1).sum();
        let exact = measure.interval_probability(a, b);
        nodes.extend(raw.into_iter().map(|(t, w)| (k, t, w * exact / approx)));
    }
    nodes
}

/// `E[Delta]` under the physical measure.
pub fn expected_payoff(
    model: &PayoffModel,
    position: &HedgedPosition,
    measure: &PhysicalMeasure,
    quad: &QuadratureConfig,
) -> Result<f64> {
    quad.validate()?;
    let coeffs = model.coefficients(position)?;
    let mean_loss_fraction = 1.0 - measure.mean_recovery();
    let r = model.curve().rate();
    let mut total = 0.0;
    for (k, tau, weight) in default_time_nodes(model, measure, quad) {
        let (a, b, g) = coeffs.quarter(k);
        let start = model.grid().time(k - 1);
        total += weight * (a + (b * (tau - start) + mean_loss_fraction * g) * (-r * tau).exp());
    }
    Ok(total + measure.survival(model.grid().horizon()) * coeffs.survival_value())
}

/// `E[f(Delta)]` with numerical integration over the recovery rate.
pub fn expectation_of(
    model: &PayoffModel,
    position: &HedgedPosition,
    measure: &PhysicalMeasure,
    quad: &QuadratureConfig,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    quad.validate()?;
    let coeffs = model.coefficients(position)?;
    let recovery_nodes: Vec<(f64, f64)> = match measure.recovery() {
        RecoveryLaw::Constant(rho) => vec![(rho, 1.0)],
        RecoveryLaw::TruncatedNormal { .. } => GaussLegendre::new(quad.recovery_nodes)
            .mapped(0.0, 1.0)
            .map(|(rho, w)| match measure.recovery_density(rho) {
                Ok(RecoveryDensity::Value(d)) => (rho, w * d),
                _ => (rho, 0.0),
            })
            .collect(),
    };
    let mut total = 0.0;
    for (k, tau, weight) in default_time_nodes(model, measure, quad) {
        let inner: f64 = recovery_nodes
            .iter()
            .map(|&(rho, w)| w * f(coeffs.evaluate(k, tau, rho)))
            .sum();
        total += weight * inner;
    }
    Ok(total + measure.survival(model.grid().horizon()) * f(coeffs.survival_value()))
}

/// `lambda = 1 / (1 + R)`.
pub fn lambda_from_return(target_return: f64) -> Result<f64> {
    if !(target_return > -1.0) || !target_return.is_finite() {
        return Err(Error::domain("target_return", target_return, "R > -1"));
    }
    Ok(1.0 / (1.0 + target_return))
}

/// `R = 1 / lambda - 1`.
pub fn expected_return(lambda: f64) -> f64 {
    1.0 / lambda - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FairPrice {
    pub value: f64,
    /// `lambda <= 0`: the buyer locks in an arbitrage at this price.
    pub arbitrage: bool,
}

/// `FP(lambda) = V_GLB + lambda * E[Delta]`.
pub fn fair_price(glb: f64, lambda: f64, expected_payoff: f64) -> FairPrice {
    FairPrice {
        value: glb + lambda * expected_payoff,
        arbitrage: lambda <= 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealizedReturn {
    /// `Psi = Delta - lambda E[Delta]`.
    pub pnl: f64,
    /// `R_T = Psi / (lambda E[Delta])`.
    pub rate: f64,
}

pub fn realized_return(
    model: &PayoffModel,
    position: &HedgedPosition,
    lambda: f64,
    expected_payoff: f64,
    tau: f64,
    rho: f64,
) -> Result<RealizedReturn> {
    if !(lambda > 0.0) {
        return Err(Error::domain("lambda", lambda, "lambda > 0"));
    }
    let capital = lambda * expected_payoff;
    if capital == 0.0 {
        return Err(Error::UndefinedReturn);
    }
    let value = model.position_value(position, tau, rho)?;
    let pnl = value - capital;
    Ok(RealizedReturn {
        pnl,
        rate: pnl / capital,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationResult {
    pub expected_payoff: f64,
    /// `V_GLB = -V`.
    pub glb: f64,
    pub lambda: f64,
    pub fair_price: FairPrice,
    /// Capital at risk `L_max = lambda E[Delta]`.
    pub max_loss: f64,
    pub expected_return: f64,
}

impl ValuationResult {
    pub fn new(glb: f64, lambda: f64, expected_payoff: f64) -> Self {
        Self {
            expected_payoff,
            glb,
            lambda,
            fair_price: fair_price(glb, lambda, expected_payoff),
            max_loss: lambda * expected_payoff,
            expected_return: expected_return(lambda),
        }
    }
}

/// Hedges `problem` and values the hedged position at `lambda`.
pub fn value_portfolio(
    problem: &HedgeProblem,
    measure: &PhysicalMeasure,
    lambda: f64,
    quad: &QuadratureConfig,
) -> Result<(HedgeSolution, ValuationResult)> {
    let solution = optimize_hedge(problem)?.into_solution()?;
    let mean = expected_payoff(&problem.payoff_model(), &solution.position, measure, quad)?;
    let result = ValuationResult::new(-solution.cost, lambda, mean);
    Ok((solution, result))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BidAskRange {
    pub maturity_index: usize,
    /// `u_{S,0}`.
    pub lub_ask: f64,
    /// `u_{L,0}`.
    pub glb_bid: f64,
    /// `E[Delta_S]`, `E[Delta_L]` of the short- and long-side hedged positions.
    pub expected_short: f64,
    pub expected_long: f64,
    pub lambda_short: f64,
    pub lambda_long: f64,
    /// `u_S(lambda_S)`.
    pub ask: f64,
    /// `u_L(lambda_L)`.
    pub bid: f64,
}

impl BidAskRange {
    pub fn ask_at(&self, lambda_short: f64) -> f64 {
        self.lub_ask - lambda_short * self.expected_short
    }

    pub fn bid_at(&self, lambda_long: f64) -> f64 {
        self.glb_bid + lambda_long * self.expected_long
    }
}

#[allow(clippy::too_many_arguments)]
pub fn bid_ask_range(
    market: &LiquidMarket,
    grid: &TenorGrid,
    curve: &DiscountCurve,
    measure: &PhysicalMeasure,
    m: usize,
    lambda_short: f64,
    lambda_long: f64,
    quad: &QuadratureConfig,
) -> Result<BidAskRange> {
    for (name, l) in [("lambda_short", lambda_short), ("lambda_long", lambda_long)] {
        if !(l > 0.0) {
            return Err(Error::domain(name, l, "lambda > 0"));
        }
    }
    let model = PayoffModel::new(grid.clone(), *curve, market.spread());
    let d = Discretization::default();
    let short = hedge_single(market, grid, curve, m, Side::ShortProtection, d)?;
    let long = hedge_single(market, grid, curve, m, Side::LongProtection, d)?;
    let expected_short = expected_payoff(&model, &short.position, measure, quad)?;
    let expected_long = expected_payoff(&model, &long.position, measure, quad)?;
    let mut range = BidAskRange {
        maturity_index: m,
        lub_ask: short.cost,
        glb_bid: -long.cost,
        expected_short,
        expected_long,
        lambda_short,
        lambda_long,
        ask: 0.0,
        bid: 0.0,
    };
    range.ask = range.ask_at(lambda_short);
    range.bid = range.bid_at(lambda_long);
    Ok(range)
}
