//! Closed-form bounds from the single-instrument ("vanilla") hedge.
//!
//! A short-protection contract of maturity `M` is hedged by buying unit
//! protection at the nearest liquid maturity `M+ >= M` and holding cash for the
//! extra premiums between `T_M` and `T_{M+}`. The long side mirrors this with
//! the nearest liquid maturity `M- <= M`, or with cash alone when no shorter
//! liquid contract exists.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hedge::Side;
use crate::market::{DiscountCurve, LiquidMarket, TenorGrid};
use crate::payoff::PayoffModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanillaBound {
    pub maturity_index: usize,
    pub side: Side,
    /// `M+` for the ask side, `M-` for the bid side; absent in the cash-only case.
    pub bracketing_liquid: Option<usize>,
    /// `V_S(M)` or `V_L(M)`.
    pub hedge_cost: f64,
    /// `u_{S,0} = V_S` or `u_{L,0} = -V_L`.
    pub bound: f64,
}

/// `(M-, M+)`: nearest liquid maturities at or below and at or above `m`.
pub fn bracketing_maturities(market: &LiquidMarket, m: usize) -> (Option<usize>, Option<usize>) {
    let below = market.indices().filter(|&k| k <= m).last();
    let above = market.indices().find(|&k| k >= m);
    (below, above)
}

fn model(market: &LiquidMarket, grid: &TenorGrid, curve: &DiscountCurve) -> PayoffModel {
    PayoffModel::new(grid.clone(), *curve, market.spread())
}

/// `V_S(M) = u(M+) + w (T_{M+,0} - T_{M,0})`.
pub fn vanilla_ask_bound(
    market: &LiquidMarket,
    grid: &TenorGrid,
    curve: &DiscountCurve,
    m: usize,
) -> Result<VanillaBound> {
    grid.check_index(m)?;
    let (_, above) = bracketing_maturities(market, m);
    let Some(plus) = above else {
        return Err(Error::NotComputable(format!(
            "no liquid maturity at or above {m}: the vanilla ask bound needs one"
        )));
    };
    let model = model(market, grid, curve);
    let upfront = market.quote(plus).expect("bracket is quoted");
    let cost = upfront + market.spread() * (model.full_accrual(plus) - model.full_accrual(m));
    Ok(VanillaBound {
        maturity_index: m,
        side: Side::ShortProtection,
        bracketing_liquid: Some(plus),
        hedge_cost: cost,
        bound: cost,
    })
}

/// `V_L(M) = -u(M-) + w (T_{M,0} - T_{M-,0})`, or `w T_{M,0}` without a shorter
/// liquid maturity.
pub fn vanilla_bid_bound(
    market: &LiquidMarket,
    grid: &TenorGrid,
    curve: &DiscountCurve,
    m: usize,
) -> Result<VanillaBound> {
    grid.check_index(m)?;
    let model = model(market, grid, curve);
    let w = market.spread();
    let (below, _) = bracketing_maturities(market, m);
    let cost = match below {
        Some(minus) => {
            let upfront = market.quote(minus).expect("bracket is quoted");
            -upfront + w * (model.full_accrual(m) - model.full_accrual(minus))
        }
        None => w * model.full_accrual(m),
    };
    Ok(VanillaBound {
        maturity_index: m,
        side: Side::LongProtection,
        bracketing_liquid: below,
        hedge_cost: cost,
        bound: -cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (LiquidMarket, TenorGrid, DiscountCurve) {
        (
            LiquidMarket::default(),
            TenorGrid::default(),
            DiscountCurve::default(),
        )
    }

    #[test]
    fn brackets() {
        let market = LiquidMarket::default();
        assert_eq!(bracketing_maturities(&market, 14), (Some(13), Some(17)));
        assert_eq!(bracketing_maturities(&market, 3), (None, Some(5)));
        assert_eq!(bracketing_maturities(&market, 13), (Some(13), Some(13)));
        assert_eq!(
            bracketing_maturities(&market.without_quotes(), 13),
            (None, None)
        );
    }

    #[test]
    fn ask_examples() {
        let (market, grid, curve) = setup();
        let b = vanilla_ask_bound(&market, &grid, &curve, 14).unwrap();
        let extra = 0.05 * 0.25 * ((-0.075f64).exp() + (-0.08f64).exp() + (-0.085f64).exp());
        assert!((b.bound - (0.2156 + extra)).abs() < 1e-15);
        assert!((b.bound - 0.2502).abs() < 1e-4);
        assert_eq!(b.bracketing_liquid, Some(17));
        let b = vanilla_ask_bound(&market, &grid, &curve, 16).unwrap();
        assert!((b.bound - 0.2271).abs() < 1e-4);
        let b = vanilla_ask_bound(&market, &grid, &curve, 17).unwrap();
        assert_eq!(b.bound, 0.2156);
        let short = market.restricted_to(&[5, 9]);
        assert!(matches!(
            vanilla_ask_bound(&short, &grid, &curve, 12),
            Err(Error::NotComputable(_))
        ));
    }

    #[test]
    fn bid_examples() {
        let (market, grid, curve) = setup();
        let b = vanilla_bid_bound(&market, &grid, &curve, 14).unwrap();
        assert!((b.bound - (0.1808 - 0.05 * 0.25 * (-0.07f64).exp())).abs() < 1e-15);
        assert!((b.bound - 0.1691).abs() < 1e-4);
        let b = vanilla_bid_bound(&market, &grid, &curve, 12).unwrap();
        assert!((b.bound - 0.0892).abs() < 1e-4);
        let b = vanilla_bid_bound(&market, &grid, &curve, 4).unwrap();
        let accrual: f64 = (1..=4).map(|k| 0.25 * (-0.005 * k as f64).exp()).sum();
        assert!((b.bound + 0.05 * accrual).abs() < 1e-15);
        assert!((b.bound + 0.04938).abs() < 1e-5);
        assert_eq!(b.bracketing_liquid, None);
    }

    #[test]
    fn liquid_points_and_monotone_ask() {
        let (market, grid, curve) = setup();
        for &(m, u) in market.quotes() {
            assert_eq!(
                vanilla_ask_bound(&market, &grid, &curve, m).unwrap().bound,
                u
            );
            assert_eq!(
                vanilla_bid_bound(&market, &grid, &curve, m).unwrap().bound,
                u
            );
        }
        // Within a bracket the ask bound grows as the maturity moves away from M+.
        for (lo, hi) in [(6, 9), (10, 13), (14, 17), (18, 21)] {
            let asks: Vec<f64> = (lo..=hi)
                .map(|m| vanilla_ask_bound(&market, &grid, &curve, m).unwrap().bound)
                .collect();
            assert!(asks.windows(2).all(|w| w[0] > w[1]));
        }
    }
}
