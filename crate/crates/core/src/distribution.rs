//! Probability law of the realized present value of a position.
//!
//! With random recovery the law has a continuous part, built quarter by quarter
//! by pushing the recovery distribution through the affine map
//! `rho -> Delta(tau, rho)`, plus an atom at the survival value. With constant
//! recovery it collapses to (approximately) one line per quarter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{PhysicalMeasure, RecoveryLaw};
use crate::payoff::{HedgedPosition, PayoffModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningConfig {
    pub bins: usize,
    /// Absolute padding added below the minimum and above the maximum value.
    pub padding: f64,
    /// Uniform default-time sub-intervals per quarter.
    pub nodes_per_quarter: usize,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self {
            bins: 400,
            padding: 0.01,
            nodes_per_quarter: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

/// Histogram of the continuous part plus point masses.
///
/// Bin masses are probabilities per bin, not densities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub bin_edges: Vec<f64>,
    pub bin_masses: Vec<f64>,
    /// Conditional mean of the value inside each bin (bin midpoint if empty).
    pub bin_means: Vec<f64>,
    pub atoms: Vec<Atom>,
    /// Exact infimum and supremum of the value over all paths.
    pub support: (f64, f64),
}

impl DensityEstimate {
    pub fn n_bins(&self) -> usize {
        self.bin_masses.len()
    }

    pub fn continuous_mass(&self) -> f64 {
        self.bin_masses.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.continuous_mass() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        let continuous: f64 = self
            .bin_masses
            .iter()
            .zip(&self.bin_means)
            .map(|(m, v)| m * v)
            .sum();
        continuous + self.atoms.iter().map(|a| a.mass * a.value).sum::<f64>()
    }

    /// The same law translated by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            bin_edges: self.bin_edges.iter().map(|e| e + offset).collect(),
            bin_masses: self.bin_masses.clone(),
            bin_means: self.bin_means.iter().map(|v| v + offset).collect(),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    value: a.value + offset,
                    mass: a.mass,
                })
                .collect(),
            support: (self.support.0 + offset, self.support.1 + offset),
        }
    }

    /// Probability of `[a, b]`: atoms at the endpoints count, partially
    /// covered bins contribute linearly.
    pub fn probability_between(&self, a: f64, b: f64) -> Result<f64> {
        if a > b || a.is_nan() || b.is_nan() {
            return Err(Error::domain("a", a, "a <= b"));
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|atom| atom.value >= a && atom.value <= b)
            .map(|atom| atom.mass)
            .sum();
        let mut continuous = 0.0;
        for (i, &mass) in self.bin_masses.iter().enumerate() {
            let (lo, hi) = (self.bin_edges[i], self.bin_edges[i + 1]);
            let overlap = b.min(hi) - a.max(lo);
            if overlap > 0.0 && mass > 0.0 {
                continuous += mass * overlap / (hi - lo);
            }
        }
        Ok(atoms + continuous)
    }
}

/// Density of `Delta` under a random-recovery measure.
pub fn payoff_density(
    model: &PayoffModel,
    position: &HedgedPosition,
    measure: &PhysicalMeasure,
    binning: &BinningConfig,
) -> Result<DensityEstimate> {
    if let RecoveryLaw::Constant(_) = measure.recovery() {
        return Err(Error::WrongRecoveryLaw(
            "constant recovery has a discrete law; use constant_recovery_spectrum",
        ));
    }
    if binning.bins == 0 || binning.nodes_per_quarter == 0 || !(binning.padding > 0.0) {
        return Err(Error::Config(
            "binning needs at least one bin, one node and positive padding".into(),
        ));
    }
    let coeffs = model.coefficients(position)?;
    let (lowest, _) = model.path_minimum(position)?;
    let (highest, _) = model.path_maximum(position)?;
    let lo = lowest - binning.padding;
    let hi = highest + binning.padding;
    let n_bins = binning.bins;
    let width = (hi - lo) / n_bins as f64;
    let bin_edges: Vec<f64> = (0..=n_bins).map(|i| lo + width * i as f64).collect();
    let bin_of = |v: f64| (((v - lo) / width).floor().max(0.0) as usize).min(n_bins - 1);

    let mut masses = vec![0.0; n_bins];
    let mut moments = vec![0.0; n_bins];
    let grid = model.grid();
    let steps = binning.nodes_per_quarter;
    for k in 1..=grid.n_quarters() {
        let (a, b) = (grid.time(k - 1), grid.time(k));
        let step = (b - a) / steps as f64;
        for j in 0..steps {
            let (t0, t1) = (a + step * j as f64, a + step * (j + 1) as f64);
            let p = measure.interval_probability(t0, t1);
            let tau = 0.5 * (t0 + t1);
            let at_zero = coeffs.evaluate(k, tau, 0.0);
            let at_one = coeffs.evaluate(k, tau, 1.0);
            // Delta(rho) = at_zero - rho * slope.
            let slope = at_zero - at_one;
            if slope.abs() <= 1e-15 * (1.0 + at_zero.abs()) {
                let i = bin_of(at_one);
                masses[i] += p;
                moments[i] += p * at_one;
                continue;
            }
            let (first, last) = (bin_of(at_zero.min(at_one)), bin_of(at_zero.max(at_one)));
            // rho at each edge, with the recovery CDF and first partial moment there.
            let edge_state = |e: f64| {
                let rho = ((at_zero - e) / slope).clamp(0.0, 1.0);
                (
                    measure.recovery_cdf(rho),
                    measure.recovery_partial_mean(0.0, rho),
                )
            };
            let mut prev = edge_state(bin_edges[first]);
            for i in first..=last {
                let next = edge_state(bin_edges[i + 1]);
                // Increasing value means decreasing rho when slope > 0.
                let (mass, rho_moment) = if slope > 0.0 {
                    (prev.0 - next.0, prev.1 - next.1)
                } else {
                    (next.0 - prev.0, next.1 - prev.1)
                };
                if mass > 0.0 {
                    masses[i] += p * mass;
                    moments[i] += p * (at_zero * mass - slope * rho_moment);
                }
                prev = next;
            }
        }
    }

    let bin_means = masses
        .iter()
        .zip(&moments)
        .enumerate()
        .map(|(i, (&m, &mo))| {
            if m > 0.0 {
                mo / m
            } else {
                0.5 * (bin_edges[i] + bin_edges[i + 1])
            }
        })
        .collect();
    Ok(DensityEstimate {
        bin_edges,
        bin_masses: masses,
        bin_means,
        atoms: vec![Atom {
            value: coeffs.survival_value(),
            mass: measure.survival(grid.horizon()),
        }],
        support: (lowest, highest),
    })
}

/// Density of the profit and loss `Psi = Delta - lambda E[Delta]`.
pub fn pnl_density(
    density: &DensityEstimate,
    lambda: f64,
    expected_payoff: f64,
) -> DensityEstimate {
    density.shifted(-lambda * expected_payoff)
}

/// Probability that the value lies in `[a, b]`.
pub fn cdf_query(density: &DensityEstimate, a: f64, b: f64) -> Result<f64> {
    density.probability_between(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumLine {
    pub quarter: usize,
    /// `Delta_k`, midpoint of the quarter's right-limit start and end values.
    pub value: f64,
    /// `P_k`.
    pub probability: f64,
}

/// Discrete approximation of the law under constant recovery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSpectrum {
    pub lines: Vec<SpectrumLine>,
    pub survival: Atom,
}

impl DiscreteSpectrum {
    pub fn total_probability(&self) -> f64 {
        self.lines.iter().map(|l| l.probability).sum::<f64>() + self.survival.mass
    }
}

pub fn constant_recovery_spectrum(
    model: &PayoffModel,
    position: &HedgedPosition,
    measure: &PhysicalMeasure,
) -> Result<DiscreteSpectrum> {
    let RecoveryLaw::Constant(rho) = measure.recovery() else {
        return Err(Error::WrongRecoveryLaw(
            "the discrete spectrum needs a constant recovery rate",
        ));
    };
    let coeffs = model.coefficients(position)?;
    let grid = model.grid();
    let lines = (1..=grid.n_quarters())
        .map(|k| SpectrumLine {
            quarter: k,
            value: 0.5
                * (coeffs.evaluate(k, grid.time(k - 1), rho)
                    + coeffs.evaluate(k, grid.time(k), rho)),
            probability: measure.interval_probability(grid.time(k - 1), grid.time(k)),
        })
        .collect();
    Ok(DiscreteSpectrum {
        lines,
        survival: Atom {
            value: coeffs.survival_value(),
            mass: measure.survival(grid.horizon()),
        },
    })
}
