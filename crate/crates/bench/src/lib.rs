//! Shared fixtures for the benchmarks.

use cdsbound::hedge::{optimize_hedge, HedgeProblem};
use cdsbound::study::{paper_example_portfolio, random_portfolio};
use cdsbound::{DiscountCurve, HedgedPosition, LiquidMarket, PayoffModel, TenorGrid};

/// Superhedge problem for the example portfolio on the full reference market.
pub fn example_problem() -> HedgeProblem {
    HedgeProblem::new(
        paper_example_portfolio(),
        LiquidMarket::default(),
        TenorGrid::default(),
        DiscountCurve::default(),
    )
}

/// Problem for a random trial portfolio on `market`.
pub fn trial_problem(trial: u64, market: LiquidMarket) -> HedgeProblem {
    HedgeProblem::new(
        random_portfolio(42, trial, 21),
        market,
        TenorGrid::default(),
        DiscountCurve::default(),
    )
}

/// Payoff model and optimally hedged example position.
pub fn hedged_example() -> (PayoffModel, HedgedPosition) {
    let problem = example_problem();
    let position = optimize_hedge(&problem)
        .expect("fixture hedges")
        .into_solution()
        .expect("fixture is bounded")
        .position;
    (problem.payoff_model(), position)
}
