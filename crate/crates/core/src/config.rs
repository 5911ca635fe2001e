//! TOML configuration. Every field is optional and defaults to the reference
//! parameter set. Prices (`spread`, quote upfronts) are given in percent of
//! notional; everything else is a plain decimal.
//!
//! ```toml
//! [grid]
//! n_quarters = 21
//! first_period = 0.25
//!
//! [curve]
//! rate = 0.02
//!
//! [market]
//! spread = 5.0
//! quotes = [[5, 5.25], [9, 12.47], [13, 18.08], [17, 21.56], [21, 24.05]]
//!
//! [measure]
//! pd1 = 0.30                               # or: hazard = 0.3567
//! recovery = { normal = { mu = 0.15, sigma = 0.16 } }   # or: { constant = 0.4 }
//!
//! [valuation]
//! lambda = 0.8                             # or: target_return = 0.25
//!
//! [study]
//! variant = "a"
//! trials = 1000
//! seed = 42
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distribution::BinningConfig;
use crate::error::{Error, Result};
use crate::hedge::Discretization;
use crate::market::{
    hazard_from_pd1, DiscountCurve, LiquidMarket, PhysicalMeasure, RecoveryLaw, TenorGrid,
};
use crate::study::{StudyConfig, Variant};
use crate::valuation::{lambda_from_return, QuadratureConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_quarters: usize,
    pub first_period: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_quarters: 21,
            first_period: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSection {
    pub rate: f64,
}

impl Default for CurveSection {
    fn default() -> Self {
        Self { rate: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketSection {
    /// Running spread, percent per year.
    pub spread: f64,
    /// `(quarter, upfront in percent)`.
    pub quotes: Vec<(usize, f64)>,
}

impl Default for MarketSection {
    fn default() -> Self {
        Self {
            spread: 5.0,
            quotes: vec![(5, 5.25), (9, 12.47), (13, 18.08), (17, 21.56), (21, 24.05)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RecoverySection {
    Normal { mu: f64, sigma: f64 },
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    /// One-year default probability.
    pub pd1: Option<f64>,
    pub hazard: Option<f64>,
    pub recovery: RecoverySection,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self {
            pd1: None,
            hazard: None,
            recovery: RecoverySection::Normal {
                mu: 0.15,
                sigma: 0.16,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValuationSection {
    pub lambda: Option<f64>,
    pub target_return: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub variant: Variant,
    pub trials: u64,
    pub seed: u64,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            variant: Variant::A,
            trials: 1000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub nodes_per_quarter: usize,
    pub recovery_nodes: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        Self {
            nodes_per_quarter: q.nodes_per_quarter,
            recovery_nodes: q.recovery_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinningSection {
    pub bins: usize,
    pub padding: f64,
    pub nodes_per_quarter: usize,
}

impl Default for BinningSection {
    fn default() -> Self {
        let b = BinningConfig::default();
        Self {
            bins: b.bins,
            padding: b.padding,
            nodes_per_quarter: b.nodes_per_quarter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationSection {
    pub interior_points_per_quarter: usize,
    pub refinement_tolerance: f64,
    pub max_refinement_rounds: usize,
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        let d = Discretization::default();
        Self {
            interior_points_per_quarter: d.interior_points_per_quarter,
            refinement_tolerance: d.refinement_tolerance,
            max_refinement_rounds: d.max_refinement_rounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub curve: CurveSection,
    pub market: MarketSection,
    pub measure: MeasureSection,
    pub valuation: ValuationSection,
    pub study: StudySection,
    pub quadrature: QuadratureSection,
    pub binning: BinningSection,
    pub discretization: DiscretizationSection,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Canonical serialization of the full resolved configuration.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks every section by building the typed objects.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.market()?.validate_for(&grid)?;
        self.curve()?;
        self.measure()?;
        self.lambda()?;
        self.quadrature().validate()?;
        if self.study.trials == 0 {
            return Err(Error::Config("study.trials must be at least 1".into()));
        }
        let b = self.binning();
        if b.bins == 0 || b.nodes_per_quarter == 0 || !(b.padding > 0.0) {
            return Err(Error::Config(
                "binning needs at least one bin, one node and positive padding".into(),
            ));
        }
        let d = self.discretization();
        if !(d.refinement_tolerance >= 0.0) || d.max_refinement_rounds == 0 {
            return Err(Error::Config(
                "discretization needs a non-negative tolerance and at least one round".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TenorGrid> {
        TenorGrid::new(self.grid.n_quarters, self.grid.first_period)
    }

    pub fn curve(&self) -> Result<DiscountCurve> {
        DiscountCurve::new(self.curve.rate)
    }

    /// Liquid market with prices converted from percent to decimals.
    pub fn market(&self) -> Result<LiquidMarket> {
        LiquidMarket::new(
            percent_to_decimal(self.market.spread),
            self.market
                .quotes
                .iter()
                .map(|&(m, u)| (m, percent_to_decimal(u)))
                .collect(),
        )
    }

    pub fn measure(&self) -> Result<PhysicalMeasure> {
        let hazard = match (self.measure.pd1, self.measure.hazard) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "measure: give either pd1 or hazard, not both".into(),
                ))
            }
            (Some(pd1), None) => hazard_from_pd1(pd1)?,
            (None, Some(h)) => h,
            (None, None) => hazard_from_pd1(0.30)?,
        };
        let recovery = match self.measure.recovery {
            RecoverySection::Normal { mu, sigma } => RecoveryLaw::TruncatedNormal { mu, sigma },
            RecoverySection::Constant(rho) => RecoveryLaw::Constant(rho),
        };
        PhysicalMeasure::new(hazard, recovery)
    }

    /// `lambda`, directly or from a target rate of return.
    pub fn lambda(&self) -> Result<f64> {
        match (self.valuation.lambda, self.valuation.target_return) {
            (Some(_), Some(_)) => Err(Error::Config(
                "valuation: give either lambda or target_return, not both".into(),
            )),
            (Some(l), None) if l.is_finite() => Ok(l),
            (Some(l), None) => Err(Error::Config(format!(
                "valuation.lambda = {l} is not finite"
            ))),
            (None, Some(r)) => lambda_from_return(r),
            (None, None) => Ok(0.8),
        }
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            nodes_per_quarter: self.quadrature.nodes_per_quarter,
            recovery_nodes: self.quadrature.recovery_nodes,
        }
    }

    pub fn binning(&self) -> BinningConfig {
        BinningConfig {
            bins: self.binning.bins,
            padding: self.binning.padding,
            nodes_per_quarter: self.binning.nodes_per_quarter,
        }
    }

    pub fn discretization(&self) -> Discretization {
        Discretization {
            interior_points_per_quarter: self.discretization.interior_points_per_quarter,
            refinement_tolerance: self.discretization.refinement_tolerance,
            max_refinement_rounds: self.discretization.max_refinement_rounds,
        }
    }

    pub fn study_config(&self) -> Result<StudyConfig> {
        Ok(StudyConfig {
            variant: self.study.variant,
            n_trials: self.study.trials,
            master_seed: self.study.seed,
            lambda: self.lambda()?,
            market: self.market()?,
            grid: self.grid()?,
            curve: self.curve()?,
            measure: self.measure()?,
            quadrature: self.quadrature(),
            discretization: self.discretization(),
        })
    }
}

/// `x / 100` rounded as the decimal literal would be, so `24.05` maps to `0.2405`.
pub fn percent_to_decimal(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x}e-2").parse().expect("finite float round-trips")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_parameters() {
        let config = Config::from_toml_str("").unwrap();
        assert_eq!(config.grid().unwrap(), TenorGrid::default());
        assert_eq!(config.curve().unwrap(), DiscountCurve::default());
        assert_eq!(config.market().unwrap(), LiquidMarket::default());
        let measure = config.measure().unwrap();
        let reference = PhysicalMeasure::default();
        assert!((measure.hazard() - reference.hazard()).abs() < 1e-15);
        assert_eq!(measure.recovery(), reference.recovery());
        assert_eq!(config.lambda().unwrap(), 0.8);
        assert_eq!(config.study_config().unwrap().n_trials, 1000);
    }

    #[test]
    fn documented_example_parses() {
        let text = "
            [grid]
            n_quarters = 21
            first_period = 0.25
            [curve]
            rate = 0.02
            [market]
            spread = 5.0
            quotes = [[5, 5.25], [21, 24.05]]
            [measure]
            hazard = 0.35
            recovery = { constant = 0.4 }
            [valuation]
            target_return = 0.25
            [study]
            variant = \"c\"
            trials = 10
            seed = 7
        ";
        let config = Config::from_toml_str(text).unwrap();
        assert_eq!(
            config.market().unwrap().quotes(),
            &[(5, 0.0525), (21, 0.2405)]
        );
        assert_eq!(
            config.measure().unwrap().recovery(),
            RecoveryLaw::Constant(0.4)
        );
        assert!((config.lambda().unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(config.study.variant, Variant::C);
        let reparsed = Config::from_toml_str(&config.to_toml_string()).unwrap();
        assert_eq!(reparsed, config);
    }

    #[test]
    fn percent_conversion_is_decimal_exact() {
        assert_eq!(percent_to_decimal(24.05), 0.2405);
        assert_eq!(percent_to_decimal(21.56), 0.2156);
        assert_eq!(percent_to_decimal(-0.5), -0.005);
        assert_eq!(percent_to_decimal(1e-300), 1e-302);
    }

    #[test]
    fn invalid_files_are_config_errors() {
        for text in [
            "[grid]\nn_quarters = 0",
            "[market]\nquotes = [[22, 5.0]]",
            "[measure]\npd1 = 0.3\nhazard = 0.3",
            "[measure]\npd1 = 1.5",
            "[valuation]\nlambda = 0.8\ntarget_return = 0.1",
            "[study]\ntrials = 0",
            "[study]\nvariant = \"z\"",
            "[unknown]\nx = 1",
            "[quadrature]\nnodes_per_quarter = 1",
            "not toml",
        ] {
            let err = Config::from_toml_str(text).unwrap_err();
            assert!(err.is_configuration(), "{text}: {err}");
        }
    }
}
