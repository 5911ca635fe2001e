//! Property tests over random portfolios and configurations.

use cdsbound::distribution::{cdf_query, payoff_density, BinningConfig};
use cdsbound::hedge::{no_arbitrage_bounds, optimize_hedge, HedgeProblem};
use cdsbound::market::interpolated_upfront;
use cdsbound::study::{random_portfolio, CdfEstimate};
use cdsbound::valuation::{bid_ask_range, expected_payoff, fair_price, QuadratureConfig};
use cdsbound::vanilla::{vanilla_ask_bound, vanilla_bid_bound};
use cdsbound::{
    DiscountCurve, HedgedPosition, LiquidMarket, PayoffModel, PhysicalMeasure, Portfolio, TenorGrid,
};
use proptest::prelude::*;

fn setup() -> (LiquidMarket, TenorGrid, DiscountCurve) {
    (
        LiquidMarket::default(),
        TenorGrid::default(),
        DiscountCurve::default(),
    )
}

fn notionals() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 21)
}

fn hedge(old: &Portfolio, market: &LiquidMarket) -> (f64, HedgedPosition) {
    let (_, grid, curve) = setup();
    let solution = optimize_hedge(&HedgeProblem::new(old.clone(), market.clone(), grid, curve))
        .unwrap()
        .into_solution()
        .unwrap();
    (solution.cost, solution.position)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hedged_positions_bind_at_zero_and_have_nonnegative_mean(alpha in notionals()) {
        let (market, grid, curve) = setup();
        let model = PayoffModel::new(grid, curve, market.spread());
        let (_, position) = hedge(&Portfolio::new(alpha).unwrap(), &market);
        let (minimum, _) = model.path_minimum(&position).unwrap();
        prop_assert!(minimum.abs() <= 1e-7);
        let mean = expected_payoff(&model, &position, &PhysicalMeasure::default(), &QuadratureConfig::default()).unwrap();
        prop_assert!(mean >= 0.0);
    }

    #[test]
    fn cost_is_homogeneous_and_shifts_with_cash(alpha in notionals(), factor in 0.1f64..5.0, cash in -1.0f64..1.0) {
        let (market, grid, curve) = setup();
        let old = Portfolio::new(alpha).unwrap();
        let (base, _) = hedge(&old, &market);
        let (scaled, _) = hedge(&old.scaled(factor), &market);
        prop_assert!((scaled - factor * base).abs() <= 1e-9 * (1.0 + factor));
        let problem = HedgeProblem::new(old, market, grid, curve).with_old_cash(cash);
        let shifted = optimize_hedge(&problem).unwrap().into_solution().unwrap().cost;
        prop_assert!((shifted - (base - cash)).abs() <= 1e-9);
    }

    #[test]
    fn more_instruments_never_cost_more(alpha in notionals()) {
        let (market, _, _) = setup();
        let old = Portfolio::new(alpha).unwrap();
        let (a, _) = hedge(&old, &market);
        let (b, _) = hedge(&old, &market.restricted_to(&[5, 13, 21]));
        let (c, _) = hedge(&old, &market.restricted_to(&[21]));
        let (u, _) = hedge(&old, &market.without_quotes());
        prop_assert!(a <= b + 1e-9 && b <= c + 1e-9 && c <= u + 1e-9);
    }

    #[test]
    fn density_is_normalized_for_any_binning(alpha in notionals(), cash in -1.0f64..1.0, bins in 1usize..800, nodes in 1usize..80) {
        let (market, grid, curve) = setup();
        let model = PayoffModel::new(grid, curve, market.spread());
        let position = HedgedPosition::new(Portfolio::new(alpha).unwrap(), cash);
        let binning = BinningConfig { bins, padding: 0.01, nodes_per_quarter: nodes };
        let density = payoff_density(&model, &position, &PhysicalMeasure::default(), &binning).unwrap();
        prop_assert!((density.total_mass() - 1.0).abs() <= 1e-6);
        prop_assert!(density.bin_masses.iter().all(|&p| p >= 0.0));
        let (lo, hi) = density.support;
        prop_assert!((cdf_query(&density, lo - 0.02, hi + 0.02).unwrap() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn fair_price_grows_with_lambda(glb in -1.0f64..1.0, mean in 1e-6f64..2.0, l1 in 0.01f64..2.0, dl in 1e-3f64..1.0) {
        prop_assert!(fair_price(glb, l1, mean).value < fair_price(glb, l1 + dl, mean).value);
    }

    #[test]
    fn empirical_cdf_is_monotone(values in prop::collection::vec(-2.0f64..2.0, 1..200), xs in prop::collection::vec(-3.0f64..3.0, 2..20)) {
        let cdf = CdfEstimate::new(values).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        prop_assert!(xs.windows(2).all(|w| cdf.cdf(w[0]) <= cdf.cdf(w[1])));
        prop_assert_eq!(cdf.cdf(-3.0), 0.0);
        prop_assert_eq!(cdf.cdf(3.0), 1.0);
    }

    #[test]
    fn portfolios_replay_bit_for_bit(seed in any::<u64>(), index in any::<u64>()) {
        let a = random_portfolio(seed, index, 21);
        let b = random_portfolio(seed, index, 21);
        prop_assert!(a.notionals().iter().zip(b.notionals()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.notionals().iter().all(|x| (-1.0..=1.0).contains(x)));
    }
}

#[test]
fn optimizer_dominates_vanilla_and_respects_duality() {
    let (market, grid, curve) = setup();
    for m in 1..=21 {
        let (bid, ask) = no_arbitrage_bounds(&market, &grid, &curve, m).unwrap();
        assert!(bid <= ask + 1e-9, "m = {m}");
        if let Ok(v) = vanilla_ask_bound(&market, &grid, &curve, m) {
            assert!(ask <= v.bound + 1e-12, "m = {m}");
        }
        assert!(
            bid >= vanilla_bid_bound(&market, &grid, &curve, m).unwrap().bound - 1e-12,
            "m = {m}"
        );
        if market.is_liquid(m) {
            assert!((ask - interpolated_upfront(&market, &grid, m).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn quotes_move_inside_the_bounds_as_lambda_grows() {
    let (market, grid, curve) = setup();
    let measure = PhysicalMeasure::default();
    let quad = QuadratureConfig::default();
    let range = bid_ask_range(&market, &grid, &curve, &measure, 14, 0.8, 0.8, &quad).unwrap();
    assert!(range.expected_short > 0.0 && range.expected_long > 0.0);
    assert!(range.ask < range.lub_ask && range.bid > range.glb_bid);
    assert!(range.lub_ask < 0.2371);
    let mut last = (f64::INFINITY, f64::NEG_INFINITY);
    for lambda in [0.1, 0.4, 0.8, 1.2] {
        let (ask, bid) = (range.ask_at(lambda), range.bid_at(lambda));
        assert!(ask < last.0 && bid > last.1);
        last = (ask, bid);
    }
    // A replicable maturity has no residual payoff on either side.
    let liquid = bid_ask_range(&market, &grid, &curve, &measure, 13, 0.8, 0.8, &quad).unwrap();
    assert!((liquid.ask - 0.1808).abs() < 1e-9 && (liquid.bid - 0.1808).abs() < 1e-9);
}
