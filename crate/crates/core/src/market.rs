//! Tenor grid, discounting, liquid-market quotes and the physical measure.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const QUARTER: f64 = 0.25;

/// Quarterly premium dates `T_0 = 0 < T_1 < ... < T_N`.
///
/// Only the first period may be shorter than a quarter; every later period is
/// exactly 0.25 years.
#[derive(Debug, Clone, PartialEq)]
pub struct TenorGrid {
    times: Vec<f64>,
}

impl TenorGrid {
    pub fn new(n_quarters: usize, first_period: f64) -> Result<Self> {
        if n_quarters == 0 {
            return Err(Error::Config(
                "the tenor grid needs at least one quarter".into(),
            ));
        }
        if !(first_period > 0.0 && first_period <= QUARTER) {
            return Err(Error::domain(
                "first_period",
                first_period,
                "0 < T_1 - T_0 <= 0.25",
            ));
        }
        let times = (0..=n_quarters)
            .map(|k| match k {
                0 => 0.0,
                k => first_period + QUARTER * (k - 1) as f64,
            })
            .collect();
        Ok(Self { times })
    }

    /// Number of premium dates `N`.
    pub fn n_quarters(&self) -> usize {
        self.times.len() - 1
    }

    /// `T_k` for `k = 0..=N`.
    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// `T_1..T_N`.
    pub fn payment_times(&self) -> &[f64] {
        &self.times[1..]
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    /// Final premium date `T_N`.
    pub fn horizon(&self) -> f64 {
        self.times[self.n_quarters()]
    }

    /// The quarter `k` with `tau` in `(T_{k-1}, T_k]`, or `None` past the horizon.
    pub fn quarter_of(&self, tau: f64) -> Option<usize> {
        if tau <= 0.0 || tau > self.horizon() {
            return None;
        }
        // First k with T_k >= tau.
        Some(self.times.partition_point(|&t| t < tau))
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n_quarters() {
            Err(Error::IndexOutOfRange {
                index: k,
                max: self.n_quarters(),
            })
        } else {
            Ok(())
        }
    }
}

impl Default for TenorGrid {
    fn default() -> Self {
        Self::new(21, QUARTER).expect("default grid is valid")
    }
}

/// Flat continuously compounded risk-free curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountCurve {
    rate: f64,
}

impl DiscountCurve {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::domain("rate", rate, "r >= 0"));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn factor(&self, t: f64) -> f64 {
        (-self.rate * t).exp()
    }
}

impl Default for DiscountCurve {
    fn default() -> Self {
        Self { rate: 0.02 }
    }
}

/// Running spread plus upfront quotes for the few liquid maturities.
#[derive(Debug, Clone, PartialEq)]
pub struct LiquidMarket {
    spread: f64,
    quotes: Vec<(usize, f64)>,
}

impl LiquidMarket {
    /// `quotes` maps a maturity index to the upfront price per unit notional.
    pub fn new(spread: f64, mut quotes: Vec<(usize, f64)>) -> Result<Self> {
        if !(spread.is_finite() && spread >= 0.0) {
            return Err(Error::domain("spread", spread, "w >= 0"));
        }
        quotes.sort_by_key(|q| q.0);
        for pair in quotes.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Config(format!(
                    "maturity {} is quoted twice",
                    pair[0].0
                )));
            }
        }
        if let Some(&(m, u)) = quotes.iter().find(|(m, u)| *m == 0 || !u.is_finite()) {
            return Err(Error::Config(format!("invalid quote ({m}, {u})")));
        }
        Ok(Self { spread, quotes })
    }

    /// A market with the running spread but no liquid contracts.
    pub fn empty(spread: f64) -> Result<Self> {
        Self::new(spread, Vec::new())
    }

    /// Checks every quoted index against the grid.
    pub fn validate_for(&self, grid: &TenorGrid) -> Result<()> {
        for &(m, _) in &self.quotes {
            grid.check_index(m)?;
        }
        Ok(())
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn quotes(&self) -> &[(usize, f64)] {
        &self.quotes
    }

    pub fn is_empty(&self) -> bool {
        self.quotes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.quotes.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.quotes.iter().map(|q| q.0)
    }

    pub fn quote(&self, m: usize) -> Option<f64> {
        self.quotes
            .binary_search_by_key(&m, |q| q.0)
            .ok()
            .map(|i| self.quotes[i].1)
    }

    pub fn is_liquid(&self, m: usize) -> bool {
        self.quote(m).is_some()
    }

    /// Keeps only the quotes at `indices`; indices without a quote are ignored.
    pub fn restricted_to(&self, indices: &[usize]) -> Self {
        Self {
            spread: self.spread,
            quotes: self
                .quotes
                .iter()
                .copied()
                .filter(|(m, _)| indices.contains(m))
                .collect(),
        }
    }

    /// Same spread, no liquid contracts.
    pub fn without_quotes(&self) -> Self {
        Self {
            spread: self.spread,
            quotes: Vec::new(),
        }
    }
}

impl Default for LiquidMarket {
    /// 500 bp running spread and the 1–5 year upfront quotes.
    fn default() -> Self {
        Self::new(
            0.05,
            vec![
                (5, 0.0525),
                (9, 0.1247),
                (13, 0.1808),
                (17, 0.2156),
                (21, 0.2405),
            ],
        )
        .expect("default market is valid")
    }
}

/// Linear interpolation of upfront prices in the maturity index.
///
/// No extrapolation: indices outside the quoted range are an error.
pub fn interpolated_upfront(market: &LiquidMarket, grid: &TenorGrid, m: usize) -> Result<f64> {
    grid.check_index(m)?;
    let quotes = market.quotes();
    let (first, last) = match (quotes.first(), quotes.last()) {
        (Some(f), Some(l)) => (f.0, l.0),
        _ => return Err(Error::NoMarket),
    };
    if m < first || m > last {
        return Err(Error::InterpolationRange {
            index: m,
            first,
            last,
        });
    }
    let upper = quotes.partition_point(|q| q.0 < m);
    let (m_hi, u_hi) = quotes[upper];
    if m_hi == m {
        return Ok(u_hi);
    }
    let (m_lo, u_lo) = quotes[upper - 1];
    let frac = (m - m_lo) as f64 / (m_hi - m_lo) as f64;
    Ok(u_lo + frac * (u_hi - u_lo))
}

/// Law of the recovery rate on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryLaw {
    /// Normal density restricted to `[0, 1]` and renormalized.
    TruncatedNormal {
        mu: f64,
        sigma: f64,
    },
    Constant(f64),
}

/// Value of the recovery density at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecoveryDensity {
    Value(f64),
    /// Unit point mass; no finite density exists.
    Atom {
        at: f64,
    },
}

/// Real-world law of `(tau, rho)`: constant hazard rate and independent recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalMeasure {
    hazard: f64,
    recovery: RecoveryLaw,
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn standard_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Hazard rate matching a one-year default probability, `h = -ln(1 - pd1)`.
pub fn hazard_from_pd1(pd1: f64) -> Result<f64> {
    if !(pd1 > 0.0 && pd1 < 1.0) {
        return Err(Error::domain("pd1", pd1, "0 < pd1 < 1"));
    }
    Ok(-(-pd1).ln_1p())
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::domain("rho", rho, "0 <= rho <= 1"))
    }
}

impl PhysicalMeasure {
    pub fn new(hazard: f64, recovery: RecoveryLaw) -> Result<Self> {
        if !(hazard > 0.0 && hazard.is_finite()) {
            return Err(Error::domain("hazard", hazard, "h > 0"));
        }
        match recovery {
            RecoveryLaw::TruncatedNormal { mu, sigma } => {
                if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
                    return Err(Error::domain("sigma", sigma, "sigma > 0"));
                }
            }
            RecoveryLaw::Constant(rho) => check_rho(rho)?,
        }
        Ok(Self { hazard, recovery })
    }

    pub fn hazard(&self) -> f64 {
        self.hazard
    }

    pub fn recovery(&self) -> RecoveryLaw {
        self.recovery
    }

    pub fn with_recovery(&self, recovery: RecoveryLaw) -> Result<Self> {
        Self::new(self.hazard, recovery)
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.hazard * t).exp()
    }

    /// Probability of default in quarter `k`, `exp(-h T_{k-1}) - exp(-h T_k)`.
    pub fn default_interval_probability(&self, grid: &TenorGrid, k: usize) -> Result<f64> {
        grid.check_index(k)?;
        Ok(self.interval_probability(grid.time(k - 1), grid.time(k)))
    }

    /// Probability of default in `(a, b]`.
    pub fn interval_probability(&self, a: f64, b: f64) -> f64 {
        // exp(-ha) (1 - exp(-h(b-a))) keeps precision for short intervals.
        -self.survival(a) * (-self.hazard * (b - a)).exp_m1()
    }

    /// Standard-normal mass of `[0, 1]` for the truncated-normal law.
    pub fn normalization(&self) -> Option<f64> {
        match self.recovery {
            RecoveryLaw::TruncatedNormal { mu, sigma } => {
                let (a, b) = (-mu / sigma, (1.0 - mu) / sigma);
                Some(standard_normal_cdf(b) - standard_normal_cdf(a))
            }
            RecoveryLaw::Constant(_) => None,
        }
    }

    pub fn recovery_density(&self, rho: f64) -> Result<RecoveryDensity> {
        check_rho(rho)?;
        Ok(match self.recovery {
            RecoveryLaw::TruncatedNormal { mu, sigma } => {
                let z = self.normalization().unwrap_or(1.0);
                RecoveryDensity::Value(standard_normal_pdf((rho - mu) / sigma) / (sigma * z))
            }
            RecoveryLaw::Constant(at) => RecoveryDensity::Atom { at },
        })
    }

    /// `P(rho <= x)`, clamped outside `[0, 1]`.
    pub fn recovery_cdf(&self, x: f64) -> f64 {
        match self.recovery {
            RecoveryLaw::TruncatedNormal { mu, sigma } => {
                if x <= 0.0 {
                    return 0.0;
                }
                if x >= 1.0 {
                    return 1.0;
                }
                let lo = standard_normal_cdf(-mu / sigma);
                let z = self.normalization().unwrap_or(1.0);
                ((standard_normal_cdf((x - mu) / sigma) - lo) / z).clamp(0.0, 1.0)
            }
            RecoveryLaw::Constant(at) => {
                if x >= at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `E[rho; a < rho <= b]`, the first moment restricted to `(a, b]`.
    pub fn recovery_partial_mean(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(0.0), b.min(1.0));
        if a >= b {
            return 0.0;
        }
        match self.recovery {
            RecoveryLaw::TruncatedNormal { mu, sigma } => {
                let z = self.normalization().unwrap_or(1.0);
                let (za, zb) = ((a - mu) / sigma, (b - mu) / sigma);
                let mass = (standard_normal_cdf(zb) - standard_normal_cdf(za)) / z;
                mu * mass + sigma * (standard_normal_pdf(za) - standard_normal_pdf(zb)) / z
            }
            RecoveryLaw::Constant(at) => {
                if at > a && at <= b {
                    at
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean_recovery(&self) -> f64 {
        match self.recovery {
            RecoveryLaw::TruncatedNormal { .. } => self.recovery_partial_mean(0.0, 1.0),
            RecoveryLaw::Constant(at) => at,
        }
    }
}

impl Default for PhysicalMeasure {
    /// 30% one-year default probability; recovery ~ N(0.15, 0.16) on [0, 1].
    fn default() -> Self {
        Self::new(
            hazard_from_pd1(0.30).expect("valid pd1"),
            RecoveryLaw::TruncatedNormal {
                mu: 0.15,
                sigma: 0.16,
            },
        )
        .expect("default measure is valid")
    }
}
