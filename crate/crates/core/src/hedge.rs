//! Cost-minimizing static superhedge of a CDS portfolio.
//!
//! The hedge adds liquid contracts `alpha~` and cash `beta` to an existing
//! portfolio so that the combined payoff is non-negative on every path, at the
//! least upfront cost `V = beta + sum_m u_m alpha~_m`. The continuum of paths is
//! sampled on a per-quarter grid to get a linear program, and the exact
//! per-quarter minimum of the candidate position then either certifies the
//! solution or supplies a violated path that is added as a new row.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpOutcome};
use crate::market::{DiscountCurve, LiquidMarket, TenorGrid};
use crate::payoff::{HedgedPosition, Path, PayoffModel, Portfolio, QuarterCoefficients};

/// Tolerance below which a path counts as binding.
pub const BINDING_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub interior_points_per_quarter: usize,
    pub refinement_tolerance: f64,
    pub max_refinement_rounds: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            interior_points_per_quarter: 8,
            refinement_tolerance: 1e-9,
            max_refinement_rounds: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HedgeProblem {
    pub old_portfolio: Portfolio,
    /// Cash already held alongside the old portfolio.
    pub old_cash: f64,
    pub market: LiquidMarket,
    pub grid: TenorGrid,
    pub curve: DiscountCurve,
    pub discretization: Discretization,
}

impl HedgeProblem {
    pub fn new(
        old_portfolio: Portfolio,
        market: LiquidMarket,
        grid: TenorGrid,
        curve: DiscountCurve,
    ) -> Self {
        Self {
            old_portfolio,
            old_cash: 0.0,
            market,
            grid,
            curve,
            discretization: Discretization::default(),
        }
    }

    pub fn with_discretization(mut self, discretization: Discretization) -> Self {
        self.discretization = discretization;
        self
    }

    pub fn with_old_cash(mut self, cash: f64) -> Self {
        self.old_cash = cash;
        self
    }

    pub fn payoff_model(&self) -> PayoffModel {
        PayoffModel::new(self.grid.clone(), self.curve, self.market.spread())
    }

    fn validate(&self) -> Result<()> {
        self.market.validate_for(&self.grid)?;
        if self.old_portfolio.len() != self.grid.n_quarters() {
            return Err(Error::Config(format!(
                "portfolio has {} notionals but the grid has {} quarters",
                self.old_portfolio.len(),
                self.grid.n_quarters()
            )));
        }
        if self.discretization.refinement_tolerance <= 0.0 {
            return Err(Error::Config(
                "refinement tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeSolution {
    /// `(maturity index, alpha~)` for every liquid maturity.
    pub hedge_notionals: Vec<(usize, f64)>,
    pub cash: f64,
    /// `V = cash + sum u_m alpha~_m`.
    pub cost: f64,
    /// Paths where the hedged position is zero within [`BINDING_TOLERANCE`].
    pub binding_paths: Vec<Path>,
    /// `max(0, -min Delta)` over the continuum of paths.
    pub max_violation: f64,
    /// Cutting-plane rounds used after the initial solve.
    pub refinement_rounds: usize,
    /// Old portfolio plus hedge: the hedged position `Delta`.
    pub position: HedgedPosition,
}

impl HedgeSolution {
    pub fn notional(&self, m: usize) -> f64 {
        self.hedge_notionals
            .iter()
            .find(|(k, _)| *k == m)
            .map_or(0.0, |h| h.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HedgeOutcome {
    Optimal(HedgeSolution),
    /// The quotes admit an arbitrage; `ray` is `(beta, alpha~...)` of a
    /// costless-in-the-limit non-negative position with negative cost.
    Unbounded {
        ray: Vec<f64>,
    },
}

impl HedgeOutcome {
    pub fn into_solution(self) -> Result<HedgeSolution> {
        match self {
            HedgeOutcome::Optimal(s) => Ok(s),
            HedgeOutcome::Unbounded { .. } => Err(Error::Unbounded),
        }
    }
}

/// Row of the program for one path: coefficients on `(beta, alpha~...)` and the
/// right-hand side `-Delta_old(path)`.
fn path_row(
    model: &PayoffModel,
    liquid: &[usize],
    old: &QuarterCoefficients,
    path: Path,
) -> (Vec<f64>, f64) {
    let mut row = Vec::with_capacity(liquid.len() + 1);
    row.push(1.0);
    row.extend(liquid.iter().map(|&m| model.cds_on_path(m, path)));
    (row, -old.evaluate_path(path))
}

/// Sampled paths: right limit of `T_{k-1}`, `T_k` and equally spaced interior
/// points in every quarter, each at `rho = 0` and `rho = 1`, then survival.
pub fn sample_paths(grid: &TenorGrid, interior_points: usize) -> Vec<Path> {
    let mut paths = Vec::new();
    for k in 1..=grid.n_quarters() {
        let (a, b) = (grid.time(k - 1), grid.time(k));
        let step = (b - a) / (interior_points + 1) as f64;
        let taus = std::iter::once(a)
            .chain((1..=interior_points).map(|j| a + step * j as f64))
            .chain(std::iter::once(b));
        for tau in taus {
            for rho in [0.0, 1.0] {
                paths.push(Path::Default {
                    quarter: k,
                    tau,
                    rho,
                });
            }
        }
    }
    paths.push(Path::Survival);
    paths
}

/// Sampled program: variables `(beta, alpha~_p)` for each liquid quote.
pub fn build_constraints(problem: &HedgeProblem) -> Result<LinearProgram> {
    problem.validate()?;
    let model = problem.payoff_model();
    let old = model.coefficients(&HedgedPosition::new(
        problem.old_portfolio.clone(),
        problem.old_cash,
    ))?;
    let liquid: Vec<usize> = problem.market.indices().collect();
    let mut objective = vec![1.0];
    objective.extend(problem.market.quotes().iter().map(|q| q.1));
    let mut lp = LinearProgram::new(objective);
    for path in sample_paths(
        &problem.grid,
        problem.discretization.interior_points_per_quarter,
    ) {
        let (row, rhs) = path_row(&model, &liquid, &old, path);
        lp.push_row(row, rhs);
    }
    Ok(lp)
}

fn hedged_position(
    problem: &HedgeProblem,
    liquid: &[usize],
    x: &[f64],
    with_old: bool,
) -> HedgedPosition {
    let mut portfolio = if with_old {
        problem.old_portfolio.clone()
    } else {
        Portfolio::zeros(problem.grid.n_quarters())
    };
    for (m, a) in liquid.iter().zip(&x[1..]) {
        portfolio.add(*m, *a);
    }
    let cash = x[0] + if with_old { problem.old_cash } else { 0.0 };
    HedgedPosition::new(portfolio, cash)
}

/// Every quarter/recovery candidate whose interval minimum is (numerically) zero.
fn binding_paths(coeffs: &QuarterCoefficients) -> Vec<Path> {
    let mut paths = Vec::new();
    for k in 1..=coeffs.n_quarters() {
        for rho in [0.0, 1.0] {
            let (v, tau) = coeffs.interval_minimum(k, rho);
            if v.abs() <= BINDING_TOLERANCE {
                paths.push(Path::Default {
                    quarter: k,
                    tau,
                    rho,
                });
            }
        }
    }
    if coeffs.survival_value().abs() <= BINDING_TOLERANCE {
        paths.push(Path::Survival);
    }
    paths
}

/// Solves the superhedge program with cutting-plane refinement.
pub fn optimize_hedge(problem: &HedgeProblem) -> Result<HedgeOutcome> {
    let mut lp = build_constraints(problem)?;
    let model = problem.payoff_model();
    let old = model.coefficients(&HedgedPosition::new(
        problem.old_portfolio.clone(),
        problem.old_cash,
    ))?;
    let liquid: Vec<usize> = problem.market.indices().collect();
    let tolerance = problem.discretization.refinement_tolerance;
    let mut residual = f64::INFINITY;

    for round in 0..=problem.discretization.max_refinement_rounds {
        match solve_lp(&lp)? {
            LpOutcome::Unbounded { ray } => {
                // A ray of the sampled program may still dip below zero between samples.
                let direction = hedged_position(problem, &liquid, &ray, false);
                let scale = ray.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
                let (min, path) = model.path_minimum(&direction)?;
                if min >= -tolerance * scale {
                    return Ok(HedgeOutcome::Unbounded { ray });
                }
                residual = -min / scale;
                let (row, rhs) = path_row(&model, &liquid, &old, path);
                lp.push_row(row, rhs);
            }
            LpOutcome::Optimal { x, .. } => {
                let mut position = hedged_position(problem, &liquid, &x, true);
                let (min, path) = model.path_minimum(&position)?;
                if min < -tolerance {
                    residual = -min;
                    let (row, rhs) = path_row(&model, &liquid, &old, path);
                    lp.push_row(row, rhs);
                    continue;
                }
                // The optimum binds somewhere; shift cash so the exact minimum is zero.
                let cash = x[0] - min;
                position.cash -= min;
                let coeffs = model.coefficients(&position)?;
                let (after, _) = coeffs.global_extremum(crate::payoff::Extremum::Min);
                let hedge_notionals: Vec<(usize, f64)> =
                    liquid.iter().copied().zip(x[1..].iter().copied()).collect();
                let cost = cash
                    + problem
                        .market
                        .quotes()
                        .iter()
                        .zip(&hedge_notionals)
                        .map(|((_, u), (_, a))| u * a)
                        .sum::<f64>();
                return Ok(HedgeOutcome::Optimal(HedgeSolution {
                    hedge_notionals,
                    cash,
                    cost,
                    binding_paths: binding_paths(&coeffs),
                    max_violation: (-after).max(0.0),
                    refinement_rounds: round,
                    position,
                }));
            }
        }
    }
    Err(Error::Convergence {
        rounds: problem.discretization.max_refinement_rounds,
        residual,
    })
}

/// Which side of a unit contract the hedge is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Old position is short protection (`alpha^Old = -1`): yields the ask bound.
    ShortProtection,
    /// Old position is long protection (`alpha^Old = +1`): yields the bid bound.
    LongProtection,
}

impl Side {
    pub fn notional(self) -> f64 {
        match self {
            Side::ShortProtection => -1.0,
            Side::LongProtection => 1.0,
        }
    }
}

/// Optimal superhedge of a unit contract of maturity `m` on `side`.
pub fn hedge_single(
    market: &LiquidMarket,
    grid: &TenorGrid,
    curve: &DiscountCurve,
    m: usize,
    side: Side,
    discretization: Discretization,
) -> Result<HedgeSolution> {
    let old = Portfolio::single(grid.n_quarters(), m, side.notional())?;
    let problem = HedgeProblem::new(old, market.clone(), grid.clone(), *curve)
        .with_discretization(discretization);
    optimize_hedge(&problem)?.into_solution()
}

/// `(u_{L,0}, u_{S,0})`: greatest lower bound on bids and least upper bound on asks.
pub fn no_arbitrage_bounds(
    market: &LiquidMarket,
    grid: &TenorGrid,
    curve: &DiscountCurve,
    m: usize,
) -> Result<(f64, f64)> {
    let d = Discretization::default();
    let ask = hedge_single(market, grid, curve, m, Side::ShortProtection, d)?.cost;
    let bid = -hedge_single(market, grid, curve, m, Side::LongProtection, d)?.cost;
    Ok((bid, ask))
}
