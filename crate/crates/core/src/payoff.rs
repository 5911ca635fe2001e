//! Discounted payoff streams of single CDSs, portfolios and hedged positions.
//!
//! Sign convention: a positive notional is long protection (pays the running
//! spread, receives `1 - rho` on default). All values are present values per
//! unit notional along a path `(tau, rho)`.
//!
//! Within a quarter `(T_{k-1}, T_k]` every position collapses to
//!
//! ```text
//! Delta(tau, rho) = A_k + (B_k (tau - T_{k-1}) + (1 - rho) G_k) exp(-r tau)
//! ```
//!
//! ([`QuarterCoefficients`]), which gives closed-form extrema per quarter and
//! is shared by constraint generation and verification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{DiscountCurve, TenorGrid};

/// Net notional per maturity index, `alpha_1..alpha_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Portfolio {
    notionals: Vec<f64>,
}

impl Portfolio {
    pub fn new(notionals: Vec<f64>) -> Result<Self> {
        if let Some(bad) = notionals.iter().find(|a| !a.is_finite()) {
            return Err(Error::Config(format!("non-finite notional {bad}")));
        }
        Ok(Self { notionals })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            notionals: vec![0.0; n],
        }
    }

    /// A single contract of maturity `m` (1-based).
    pub fn single(n: usize, m: usize, notional: f64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::IndexOutOfRange { index: m, max: n });
        }
        let mut p = Self::zeros(n);
        p.notionals[m - 1] = notional;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.notionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notionals.iter().all(|&a| a == 0.0)
    }

    /// Notional of maturity `m` (1-based).
    pub fn get(&self, m: usize) -> f64 {
        self.notionals[m - 1]
    }

    pub fn add(&mut self, m: usize, notional: f64) {
        self.notionals[m - 1] += notional;
    }

    pub fn notionals(&self) -> &[f64] {
        &self.notionals
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            notionals: self.notionals.iter().map(|a| a * factor).collect(),
        }
    }
}

/// Portfolio plus a cash deposit `beta`: `Delta = beta + sum_m alpha_m Delta_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgedPosition {
    pub portfolio: Portfolio,
    pub cash: f64,
}

impl HedgedPosition {
    pub fn new(portfolio: Portfolio, cash: f64) -> Self {
        Self { portfolio, cash }
    }
}

/// A default-time/recovery path.
///
/// `Default { quarter: k, tau, .. }` has `tau` in `[T_{k-1}, T_k]` and is
/// evaluated on quarter `k`'s branch, so `tau = T_{k-1}` denotes the right limit
/// `T_{k-1} + 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Path {
    Default {
        quarter: usize,
        tau: f64,
        rho: f64,
    },
    /// No default before the last maturity.
    Survival,
}

/// Grid, curve and spread with precomputed discount factors and accruals.
#[derive(Debug, Clone)]
pub struct PayoffModel {
    grid: TenorGrid,
    curve: DiscountCurve,
    spread: f64,
    /// `S_k = sum_{j <= k} (T_j - T_{j-1}) d_j`, so `S_m = T_{m,0}`.
    cumulative_accrual: Vec<f64>,
}

impl PayoffModel {
    pub fn new(grid: TenorGrid, curve: DiscountCurve, spread: f64) -> Self {
        let n = grid.n_quarters();
        let mut cumulative_accrual = Vec::with_capacity(n + 1);
        cumulative_accrual.push(0.0);
        for k in 1..=n {
            let period = grid.time(k) - grid.time(k - 1);
            cumulative_accrual
                .push(cumulative_accrual[k - 1] + period * curve.factor(grid.time(k)));
        }
        Self {
            grid,
            curve,
            spread,
            cumulative_accrual,
        }
    }

    pub fn grid(&self) -> &TenorGrid {
        &self.grid
    }

    pub fn curve(&self) -> &DiscountCurve {
        &self.curve
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn n_quarters(&self) -> usize {
        self.grid.n_quarters()
    }

    /// `T_{m,0}`: the discounted accrual of a contract that survives to maturity.
    pub fn full_accrual(&self, m: usize) -> f64 {
        self.cumulative_accrual[m]
    }

    /// Discounted premium accrual `T_m(tau)` of the maturity-`m` contract.
    pub fn accrual(&self, m: usize, tau: f64) -> Result<f64> {
        self.grid.check_index(m)?;
        if !(tau > 0.0) {
            return Err(Error::domain("tau", tau, "tau > 0"));
        }
        match self.grid.quarter_of(tau) {
            Some(k) if k <= m => Ok(self.cumulative_accrual[k - 1]
                + (tau - self.grid.time(k - 1)) * self.curve.factor(tau)),
            _ => Ok(self.cumulative_accrual[m]),
        }
    }

    /// `Delta_m(tau, rho) = -w T_m(tau) + (1 - rho) d(tau) 1{tau <= T_m}`.
    pub fn cds_payoff(&self, m: usize, tau: f64, rho: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain("rho", rho, "0 <= rho <= 1"));
        }
        let premium = -self.spread * self.accrual(m, tau)?;
        let loss = if tau <= self.grid.time(m) {
            (1.0 - rho) * self.curve.factor(tau)
        } else {
            0.0
        };
        Ok(premium + loss)
    }

    /// Unit long contract of maturity `m` on quarter `k`'s branch at `tau`.
    ///
    /// `k = N + 1` is the survival path. No range checks.
    pub(crate) fn cds_on_quarter(&self, m: usize, k: usize, tau: f64, rho: f64) -> f64 {
        if k > m {
            return -self.spread * self.cumulative_accrual[m];
        }
        let d = self.curve.factor(tau);
        -self.spread * (self.cumulative_accrual[k - 1] + (tau - self.grid.time(k - 1)) * d)
            + (1.0 - rho) * d
    }

    /// Unit long contract of maturity `m` along `path`.
    pub fn cds_on_path(&self, m: usize, path: Path) -> f64 {
        match path {
            Path::Default { quarter, tau, rho } => self.cds_on_quarter(m, quarter, tau, rho),
            Path::Survival => -self.spread * self.cumulative_accrual[m],
        }
    }

    fn check_len(&self, portfolio: &Portfolio) -> Result<()> {
        if portfolio.len() != self.n_quarters() {
            return Err(Error::Config(format!(
                "portfolio has {} notionals but the grid has {} quarters",
                portfolio.len(),
                self.n_quarters()
            )));
        }
        Ok(())
    }

    /// `beta + sum_m alpha_m Delta_m(tau, rho)` by direct summation.
    pub fn position_value(&self, position: &HedgedPosition, tau: f64, rho: f64) -> Result<f64> {
        self.check_len(&position.portfolio)?;
        let mut value = position.cash;
        for (i, &alpha) in position.portfolio.notionals().iter().enumerate() {
            if alpha != 0.0 {
                value += alpha * self.cds_payoff(i + 1, tau, rho)?;
            }
        }
        Ok(value)
    }

    /// Value when no default occurs before the last maturity.
    pub fn survival_value(&self, position: &HedgedPosition) -> f64 {
        position.cash
            - self.spread
                * position
                    .portfolio
                    .notionals()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * self.cumulative_accrual[i + 1])
                    .sum::<f64>()
    }

    pub fn coefficients(&self, position: &HedgedPosition) -> Result<QuarterCoefficients> {
        self.check_len(&position.portfolio)?;
        Ok(QuarterCoefficients::build(self, position))
    }

    /// Exact global minimum of the position over all paths.
    pub fn path_minimum(&self, position: &HedgedPosition) -> Result<(f64, Path)> {
        Ok(self.coefficients(position)?.global_extremum(Extremum::Min))
    }

    /// Exact global maximum of the position over all paths.
    pub fn path_maximum(&self, position: &HedgedPosition) -> Result<(f64, Path)> {
        Ok(self.coefficients(position)?.global_extremum(Extremum::Max))
    }
}

/// Per-quarter affine-exponential form of a position.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterCoefficients {
    rate: f64,
    /// `T_0..T_N`.
    times: Vec<f64>,
    /// Index `k - 1` holds quarter `k`.
    constant: Vec<f64>,
    slope: Vec<f64>,
    loss_base: Vec<f64>,
    survival: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Extremum::Min => candidate < incumbent,
            Extremum::Max => candidate > incumbent,
        }
    }
}

impl QuarterCoefficients {
    fn build(model: &PayoffModel, position: &HedgedPosition) -> Self {
        let n = model.n_quarters();
        let w = model.spread;
        let alpha = position.portfolio.notionals();
        let mut constant = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        let mut loss_base = Vec::with_capacity(n);

        // G_k = sum_{m >= k} alpha_m, built from the back.
        let mut tail = vec![0.0; n + 2];
        for m in (1..=n).rev() {
            tail[m] = tail[m + 1] + alpha[m - 1];
        }
        // sum_{m < k} alpha_m T_{m,0}, built from the front.
        let mut matured = 0.0;
        for k in 1..=n {
            let g = tail[k];
            constant.push(position.cash - w * matured - w * model.cumulative_accrual[k - 1] * g);
            slope.push(-w * g);
            loss_base.push(g);
            matured += alpha[k - 1] * model.cumulative_accrual[k];
        }
        Self {
            rate: model.curve.rate(),
            times: (0..=n).map(|k| model.grid.time(k)).collect(),
            constant,
            slope,
            loss_base,
            survival: position.cash - w * matured,
        }
    }

    pub fn n_quarters(&self) -> usize {
        self.constant.len()
    }

    /// `(A_k, B_k, G_k)` for quarter `k`.
    pub fn quarter(&self, k: usize) -> (f64, f64, f64) {
        (
            self.constant[k - 1],
            self.slope[k - 1],
            self.loss_base[k - 1],
        )
    }

    pub fn survival_value(&self) -> f64 {
        self.survival
    }

    /// Value on quarter `k`'s branch; `tau = T_{k-1}` gives the right limit.
    pub fn evaluate(&self, k: usize, tau: f64, rho: f64) -> f64 {
        let (a, b, g) = self.quarter(k);
        a + (b * (tau - self.times[k - 1]) + (1.0 - rho) * g) * (-self.rate * tau).exp()
    }

    pub fn evaluate_path(&self, path: Path) -> f64 {
        match path {
            Path::Default { quarter, tau, rho } => self.evaluate(quarter, tau, rho),
            Path::Survival => self.survival,
        }
    }

    /// Value at `tau > 0`, locating the quarter; past the horizon gives the survival value.
    pub fn value_at(&self, tau: f64, rho: f64) -> f64 {
        let horizon = self.times[self.n_quarters()];
        if tau > horizon {
            return self.survival;
        }
        let k = self.times.partition_point(|&t| t < tau).max(1);
        self.evaluate(k, tau, rho)
    }

    /// Minimum over `tau` in `(T_{k-1}, T_k]` at fixed `rho`, as `(value, argmin tau)`.
    ///
    /// The argmin `T_{k-1}` stands for the right limit (an infimum).
    pub fn interval_minimum(&self, k: usize, rho: f64) -> (f64, f64) {
        self.interval_extremum(k, rho, Extremum::Min)
    }

    pub fn interval_maximum(&self, k: usize, rho: f64) -> (f64, f64) {
        self.interval_extremum(k, rho, Extremum::Max)
    }

    fn interval_extremum(&self, k: usize, rho: f64, which: Extremum) -> (f64, f64) {
        let (start, end) = (self.times[k - 1], self.times[k]);
        let (_, b, g) = self.quarter(k);
        let c = (1.0 - rho) * g;
        let mut best = (self.evaluate(k, start, rho), start);
        let mut consider = |tau: f64| {
            let v = self.evaluate(k, tau, rho);
            if which.better(v, best.0) {
                best = (v, tau);
            }
        };
        consider(end);
        // g'(tau) = exp(-r tau) (B - r (B (tau - T_{k-1}) + C)) vanishes once.
        if b != 0.0 && self.rate > 0.0 {
            let stationary = start + 1.0 / self.rate - c / b;
            if stationary > start && stationary < end {
                consider(stationary);
            }
        }
        best
    }

    /// Affine in `rho`, so only `rho` in `{0, 1}` matters.
    pub fn global_extremum(&self, which: Extremum) -> (f64, Path) {
        let mut best = (self.survival, Path::Survival);
        for k in 1..=self.n_quarters() {
            for rho in [0.0, 1.0] {
                let (v, tau) = self.interval_extremum(k, rho, which);
                if which.better(v, best.0) {
                    best = (
                        v,
                        Path::Default {
                            quarter: k,
                            tau,
                            rho,
                        },
                    );
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> PayoffModel {
        PayoffModel::new(TenorGrid::default(), DiscountCurve::default(), 0.05)
    }

    /// alpha^Old of the worked example portfolio.
    fn example_portfolio() -> Portfolio {
        Portfolio::new(vec![
            0.2190, 0.9513, 0.0744, 0.3669, 0.2543, -0.2179, 0.7840, 0.3894, 0.1945, 0.6885,
            0.7642, -0.9360, -0.8572, 0.5786, -0.1819, 0.7254, 0.1285, -0.8874, -0.0712, -0.7650,
            0.0290,
        ])
        .unwrap()
    }

    #[test]
    fn accrual_examples() {
        let m = model();
        let oracle: f64 = (1..=4).map(|k| 0.25 * (-0.005 * k as f64).exp()).sum();
        assert!((m.accrual(4, 1.5).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.987593).abs() < 5e-7);
        assert!((m.accrual(7, 0.25).unwrap() - 0.248753).abs() < 5e-7);
        assert!((m.accrual(1, 0.25).unwrap() - 0.25 * (-0.005f64).exp()).abs() < 1e-15);

        let flat = PayoffModel::new(TenorGrid::default(), DiscountCurve::new(0.0).unwrap(), 0.05);
        for k in 1..=21 {
            assert_eq!(flat.accrual(k, 10.0).unwrap(), 0.25 * k as f64);
        }
        assert!(m.accrual(3, 0.0).is_err());
        assert!(m.accrual(22, 1.0).is_err());
    }

    #[test]
    fn accrual_is_monotone_and_saturates() {
        let m = model();
        for maturity in [1, 5, 13, 21] {
            let mut prev = 0.0;
            for i in 1..=600 {
                let tau = i as f64 * 0.01;
                let a = m.accrual(maturity, tau).unwrap();
                assert!(a >= prev - 1e-15);
                if tau > m.grid().time(maturity) {
                    assert_eq!(a, m.full_accrual(maturity));
                }
                prev = a;
            }
        }
    }

    #[test]
    fn cds_payoff_examples() {
        let m = model();
        let direct = -0.05 * 0.1 * (-0.002f64).exp() + 0.6 * (-0.002f64).exp();
        let v = m.cds_payoff(21, 0.1, 0.4).unwrap();
        assert!((v - direct).abs() < 1e-15);
        assert!((v - 0.593811).abs() < 5e-7);

        // Pure premium leg at full recovery.
        let v = m.cds_payoff(9, 1.3, 1.0).unwrap();
        assert!((v + 0.05 * m.accrual(9, 1.3).unwrap()).abs() < 1e-15);

        let survival: f64 = (1..=21).map(|k| 0.25 * (-0.005 * k as f64).exp()).sum();
        let v = m.cds_payoff(21, 6.0, 0.3).unwrap();
        assert!((v + 0.05 * survival).abs() < 1e-15);
        assert!((v + 0.248567).abs() < 1e-6);
        assert!(m.cds_payoff(21, 1.0, 1.01).is_err());
    }

    #[test]
    fn loss_jump_at_maturity() {
        let m = model();
        let eps = 1e-9;
        for maturity in [1, 8, 21] {
            let t = m.grid().time(maturity);
            for rho in [0.0, 0.3, 0.9] {
                let jump = m.cds_payoff(maturity, t, rho).unwrap()
                    - m.cds_payoff(maturity, t + eps, rho).unwrap();
                assert!((jump - (1.0 - rho) * (-0.02 * t).exp()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn empty_and_single_positions() {
        let m = model();
        let cash_only = HedgedPosition::new(Portfolio::zeros(21), 0.7);
        for (tau, rho) in [(0.1, 0.0), (3.3, 0.5), (9.0, 1.0)] {
            assert_eq!(m.position_value(&cash_only, tau, rho).unwrap(), 0.7);
        }
        let long = HedgedPosition::new(Portfolio::single(21, 21, 1.0).unwrap(), 0.0);
        assert!((m.position_value(&long, 6.0, 0.2).unwrap() + 0.248567).abs() < 1e-6);
        let short = HedgedPosition::new(Portfolio::zeros(20), 0.0);
        assert!(m.position_value(&short, 1.0, 0.5).is_err());
    }

    #[test]
    fn interval_minimum_examples() {
        // Flat position.
        let m = model();
        let c = m
            .coefficients(&HedgedPosition::new(Portfolio::zeros(21), 0.4))
            .unwrap();
        let (v, _) = c.interval_minimum(3, 0.5);
        assert_eq!(v, 0.4);

        // B = -1, C = 0.5 at T_{k-1} = 1, r = 0.02: tau* = 1 + 50 + 0.5 lies past the quarter.
        let coeffs = QuarterCoefficients {
            rate: 0.02,
            times: vec![0.75, 1.0, 1.25],
            constant: vec![0.0, 0.0],
            slope: vec![0.0, -1.0],
            loss_base: vec![0.0, 0.5],
            survival: 0.0,
        };
        let (v, tau) = coeffs.interval_minimum(2, 0.0);
        assert_eq!(tau, 1.25);
        assert!((v - (-0.25 + 0.5) * (-0.025f64).exp()).abs() < 1e-15);

        // Single long 21-quarter contract: worst path is survival.
        let long = HedgedPosition::new(Portfolio::single(21, 21, 1.0).unwrap(), 0.0);
        let (v, path) = m.path_minimum(&long).unwrap();
        assert!((v + 0.05 * m.full_accrual(21)).abs() < 1e-15);
        assert!(matches!(
            path,
            Path::Survival | Path::Default { rho: 1.0, .. }
        ));
    }

    #[test]
    fn interior_stationary_point_is_found() {
        // Large C/B pulls tau* inside the quarter; compare with a dense scan.
        let coeffs = QuarterCoefficients {
            rate: 0.5,
            times: vec![0.0, 1.0],
            constant: vec![0.1],
            slope: vec![1.0],
            loss_base: vec![1.5],
            survival: 0.0,
        };
        let (v, tau) = coeffs.interval_maximum(1, 0.0);
        assert!(tau > 0.0 && tau < 1.0);
        let scan = (0..=100_000)
            .map(|i| coeffs.evaluate(1, i as f64 * 1e-5, 0.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v - scan).abs() < 1e-9);
        assert!(v >= scan);
    }

    #[test]
    fn path_extrema_of_cash_and_example() {
        let m = model();
        let (v, _) = m
            .path_minimum(&HedgedPosition::new(Portfolio::zeros(21), 1.0))
            .unwrap();
        assert_eq!(v, 1.0);
        let (v, _) = m
            .path_minimum(&HedgedPosition::new(example_portfolio(), 0.0))
            .unwrap();
        assert!(v < 0.0);
    }

    /// Dense scan of ~10,000 tau points (uniform within each quarter, endpoints
    /// and right limits included) at rho in {0, 1}, by direct evaluation.
    fn brute_force_minimum(m: &PayoffModel, position: &HedgedPosition) -> f64 {
        let per_quarter = 10_000 / m.n_quarters();
        let mut best = m
            .position_value(position, m.grid().horizon() + 1.0, 0.0)
            .unwrap();
        for k in 1..=m.n_quarters() {
            let (a, b) = (m.grid().time(k - 1) + 1e-12, m.grid().time(k));
            for i in 0..per_quarter {
                let tau = a + (b - a) * i as f64 / (per_quarter - 1) as f64;
                for rho in [0.0, 1.0] {
                    best = best.min(m.position_value(position, tau, rho).unwrap());
                }
            }
        }
        best
    }

    fn portfolio_strategy() -> impl Strategy<Value = (Vec<f64>, f64)> {
        (prop::collection::vec(-1.0f64..1.0, 21), -1.0f64..1.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn affine_in_recovery((alphas, cash) in portfolio_strategy(),
                              paths in prop::collection::vec((0.001f64..6.0, 0.0f64..=1.0), 1000)) {
            let m = model();
            let position = HedgedPosition::new(Portfolio::new(alphas).unwrap(), cash);
            for (tau, rho) in paths {
                let v = m.position_value(&position, tau, rho).unwrap();
                let v0 = m.position_value(&position, tau, 0.0).unwrap();
                let v1 = m.position_value(&position, tau, 1.0).unwrap();
                let residual = v - (v1 + (1.0 - rho) * (v0 - v1));
                prop_assert!(residual.abs() <= 1e-14, "residual {residual}");
            }
        }

        #[test]
        fn coefficients_match_direct_evaluation((alphas, cash) in portfolio_strategy(),
                                                 paths in prop::collection::vec((0.001f64..6.0, 0.0f64..=1.0), 200)) {
            let m = model();
            let position = HedgedPosition::new(Portfolio::new(alphas).unwrap(), cash);
            let coeffs = m.coefficients(&position).unwrap();
            for (tau, rho) in paths {
                let direct = m.position_value(&position, tau, rho).unwrap();
                prop_assert!((coeffs.value_at(tau, rho) - direct).abs() <= 1e-12);
            }
        }

        #[test]
        fn path_minimum_matches_brute_force((alphas, cash) in portfolio_strategy()) {
            let m = model();
            let position = HedgedPosition::new(Portfolio::new(alphas).unwrap(), cash);
            let (exact, path) = m.path_minimum(&position).unwrap();
            let scan = brute_force_minimum(&m, &position);
            prop_assert!(exact <= scan + 1e-12);
            prop_assert!((exact - scan).abs() <= 1e-6, "exact {exact} scan {scan}");
            let coeffs = m.coefficients(&position).unwrap();
            prop_assert!((coeffs.evaluate_path(path) - exact).abs() < 1e-15);
        }
    }
}
