//! Random-portfolio risk-reduction studies and bound sweeps.
//!
//! Per-trial portfolios come from ChaCha20 seeded with the master seed through
//! `SeedableRng::seed_from_u64`, with the trial index selecting the stream, so
//! any single trial can be replayed from `(master_seed, trial_index)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hedge::{hedge_single, optimize_hedge, Discretization, HedgeProblem, Side};
use crate::market::{
    interpolated_upfront, DiscountCurve, LiquidMarket, PhysicalMeasure, TenorGrid,
};
use crate::payoff::Portfolio;
use crate::valuation::{expected_payoff, QuadratureConfig};
use crate::vanilla::{vanilla_ask_bound, vanilla_bid_bound};

/// Randomly generated starting portfolio used as the worked example for densities.
pub const EXAMPLE_NOTIONALS: [f64; 21] = [
    0.2190, 0.9513, 0.0744, 0.3669, 0.2543, -0.2179, 0.7840, 0.3894, 0.1945, 0.6885, 0.7642,
    -0.9360, -0.8572, 0.5786, -0.1819, 0.7254, 0.1285, -0.8874, -0.0712, -0.7650, 0.0290,
];

pub fn paper_example_portfolio() -> Portfolio {
    Portfolio::new(EXAMPLE_NOTIONALS.to_vec()).expect("fixture is finite")
}

/// Illiquid maturities reported in the bounds comparison table.
pub const REFERENCE_MATURITIES: [usize; 6] = [10, 11, 12, 14, 15, 16];

/// Which maturities trade on the liquid market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Quarters 5, 9, 13, 17, 21.
    A,
    /// Quarters 5, 13, 21 (1, 3 and 5 years).
    B,
    /// Quarter 21 only.
    C,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::A, Variant::B, Variant::C];

    pub fn maturities(self) -> &'static [usize] {
        match self {
            Variant::A => &[5, 9, 13, 17, 21],
            Variant::B => &[5, 13, 21],
            Variant::C => &[21],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
        }
    }

    /// `full` restricted to this variant's maturities.
    pub fn market(self, full: &LiquidMarket) -> LiquidMarket {
        full.restricted_to(self.maturities())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            _ => Err(Error::Config(format!(
                "unknown market variant {s:?} (expected a, b or c)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub variant: Variant,
    pub n_trials: u64,
    pub master_seed: u64,
    pub lambda: f64,
    /// Full quote set; each variant restricts it.
    pub market: LiquidMarket,
    pub grid: TenorGrid,
    pub curve: DiscountCurve,
    pub measure: PhysicalMeasure,
    pub quadrature: QuadratureConfig,
    pub discretization: Discretization,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            variant: Variant::A,
            n_trials: 1000,
            master_seed: 42,
            lambda: 0.8,
            market: LiquidMarket::default(),
            grid: TenorGrid::default(),
            curve: DiscountCurve::default(),
            measure: PhysicalMeasure::default(),
            quadrature: QuadratureConfig::default(),
            discretization: Discretization::default(),
        }
    }
}

impl StudyConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("a study needs at least one trial".into()));
        }
        self.market.validate_for(&self.grid)
    }
}

/// Uniform `[-1, 1]` notionals for one trial.
pub fn random_portfolio(master_seed: u64, trial_index: u64, n: usize) -> Portfolio {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    let notionals = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Portfolio::new(notionals).expect("uniform draws are finite")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub portfolio: Vec<f64>,
    /// `L_max` of the fully hedged position.
    pub lmax_hedged: f64,
    /// `L_max` when only cash may be used.
    pub lmax_unhedged: f64,
    pub ratio: f64,
}

/// Empirical distribution of the `L_max` ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfEstimate {
    sorted: Vec<f64>,
}

impl CdfEstimate {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| v.is_nan()) {
            return Err(Error::Config(
                "an empirical CDF needs at least one non-NaN value".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of values `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    pub fn median(&self) -> f64 {
        let n = self.sorted.len();
        if n % 2 == 1 {
            self.sorted[n / 2]
        } else {
            0.5 * (self.sorted[n / 2 - 1] + self.sorted[n / 2])
        }
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub variant: Variant,
    pub master_seed: u64,
    pub lambda: f64,
    pub records: Vec<TrialRecord>,
    pub cdf: CdfEstimate,
}

/// `lambda * E[Delta]` of the optimal superhedge of `portfolio` on `market`.
fn max_loss(config: &StudyConfig, portfolio: &Portfolio, market: &LiquidMarket) -> Result<f64> {
    let problem = HedgeProblem::new(
        portfolio.clone(),
        market.clone(),
        config.grid.clone(),
        config.curve,
    )
    .with_discretization(config.discretization);
    let solution = optimize_hedge(&problem)?.into_solution()?;
    let mean = expected_payoff(
        &problem.payoff_model(),
        &solution.position,
        &config.measure,
        &config.quadrature,
    )?;
    Ok(config.lambda * mean)
}

/// Runs the study for `config.variant`.
pub fn lmax_ratio_study(config: &StudyConfig) -> Result<StudyResult> {
    let mut results = comparative_study(config, &[config.variant])?;
    Ok(results.remove(0))
}

/// Runs several variants on the same portfolio sequence. The unhedged
/// benchmark does not depend on the variant and is computed once per trial.
pub fn comparative_study(config: &StudyConfig, variants: &[Variant]) -> Result<Vec<StudyResult>> {
    config.validate()?;
    let n = config.grid.n_quarters();
    let markets: Vec<LiquidMarket> = variants.iter().map(|v| v.market(&config.market)).collect();
    let empty = config.market.without_quotes();
    let seed = config.master_seed;
    let per_trial: Vec<(Vec<f64>, f64, Vec<f64>)> = (0..config.n_trials)
        .into_par_iter()
        .map(|index| {
            let portfolio = random_portfolio(seed, index, n);
            let run = || -> Result<(f64, Vec<f64>)> {
                let unhedged = max_loss(config, &portfolio, &empty)?;
                let hedged = markets
                    .iter()
                    .map(|market| max_loss(config, &portfolio, market))
                    .collect::<Result<Vec<f64>>>()?;
                Ok((unhedged, hedged))
            };
            let (unhedged, hedged) = run().map_err(|e| Error::Trial {
                index,
                seed,
                source: Box::new(e),
            })?;
            Ok((portfolio.notionals().to_vec(), unhedged, hedged))
        })
        .collect::<Result<Vec<_>>>()?;

    variants
        .iter()
        .enumerate()
        .map(|(v, &variant)| {
            let records: Vec<TrialRecord> = per_trial
                .iter()
                .enumerate()
                .map(|(index, (portfolio, unhedged, hedged))| TrialRecord {
                    trial_index: index as u64,
                    portfolio: portfolio.clone(),
                    lmax_hedged: hedged[v],
                    lmax_unhedged: *unhedged,
                    ratio: hedged[v] / unhedged,
                })
                .collect();
            let cdf = CdfEstimate::new(records.iter().map(|r| r.ratio).collect())?;
            Ok(StudyResult {
                variant,
                master_seed: seed,
                lambda: config.lambda,
                records,
                cdf,
            })
        })
        .collect()
}

/// One maturity of the bounds sweep. Absent entries are not computable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsRow {
    pub m: usize,
    pub opt_ask: f64,
    pub opt_bid: f64,
    pub van_ask: Option<f64>,
    pub van_bid: f64,
    /// Upfront interpolated linearly in the maturity index between quotes.
    pub interpolated: Option<f64>,
}

impl BoundsRow {
    /// `(u_S - u_Int) / (u_Int - u_L)`.
    pub fn asymmetry(&self) -> Option<f64> {
        self.interpolated
            .map(|u| (self.opt_ask - u) / (u - self.opt_bid))
    }
}

/// Optimal and vanilla bounds for every maturity of the grid.
pub fn bounds_sweep(
    market: &LiquidMarket,
    grid: &TenorGrid,
    curve: &DiscountCurve,
    discretization: Discretization,
) -> Result<Vec<BoundsRow>> {
    market.validate_for(grid)?;
    (1..=grid.n_quarters())
        .into_par_iter()
        .map(|m| {
            let ask = hedge_single(
                market,
                grid,
                curve,
                m,
                Side::ShortProtection,
                discretization,
            )?;
            let bid = hedge_single(market, grid, curve, m, Side::LongProtection, discretization)?;
            let van_ask = match vanilla_ask_bound(market, grid, curve, m) {
                Ok(b) => Some(b.bound),
                Err(Error::NotComputable(_)) => None,
                Err(e) => return Err(e),
            };
            let interpolated = match interpolated_upfront(market, grid, m) {
                Ok(u) => Some(u),
                Err(Error::InterpolationRange { .. }) | Err(Error::NoMarket) => None,
                Err(e) => return Err(e),
            };
            Ok(BoundsRow {
                m,
                opt_ask: ask.cost,
                opt_bid: -bid.cost,
                van_ask,
                van_bid: vanilla_bid_bound(market, grid, curve, m)?.bound,
                interpolated,
            })
        })
        .collect()
}
