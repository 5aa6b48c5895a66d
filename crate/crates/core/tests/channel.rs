use proptest::prelude::*;
use uecn_core::channel::{self, InterferenceState};
use uecn_core::math;
use uecn_core::model::{distance, ChannelParams, LinkTable, LinkType, Point3};
use uecn_core::rng::{self, StreamTag};

fn params() -> ChannelParams {
    ChannelParams::default()
}

// Thorp's formula evaluated term by term at 20 kHz: f² = 400.
#[test]
fn thorp_at_twenty_khz_by_hand() {
    let hand: f64 = 0.11 * 400.0 / 401.0 + 44.0 * 400.0 / 4500.0 + 2.75e-4 * 400.0 + 0.003;
    assert!((hand - 4.1338).abs() < 1e-3);
    assert!((channel::thorp_phi_db(20.0) - hand).abs() < 1e-12);
}

#[test]
fn acoustic_loss_at_one_km() {
    // 1.5 · 10 · log10(1000) = 45 dB spreading plus one km of absorption.
    let hand = 45.0 + 4.1338;
    assert!((channel::pl_ua(1000.0, 20.0, 1.5) - 49.13).abs() < 0.01);
    assert!((channel::pl_ua(1000.0, 20.0, 1.5) - hand).abs() < 1e-3);
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

#[test]
fn q_function_matches_integrated_density() {
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for &x in &[0.0, 0.5, 1.0, 2.0, 3.0] {
        let oracle = 0.5 - simpson(pdf, 0.0, x, 2000);
        assert!((channel::q_function(x) - oracle).abs() < 1e-9, "x = {x}");
    }
    assert!((channel::q_function(1.0) - 0.158655).abs() < 1e-6);
}

#[test]
fn db_round_trip_over_twelve_decades() {
    for k in -60..=60 {
        let x = 10f64.powf(k as f64 / 10.0);
        let back = math::db_to_linear(math::linear_to_db(x));
        assert!((back / x - 1.0).abs() < 1e-12, "x = {x}");
    }
}

fn slope(f: impl Fn(f64) -> f64, d: f64) -> f64 {
    let h = 1e-4 * d;
    (f(d + h) - f(d - h)) / (2.0 * h)
}

#[test]
fn loss_and_gain_slopes_on_random_parameterizations() {
    let mut r = rng::stream(42, StreamTag::Fuzz, 0);
    let mut violations = 0;
    for _ in 0..100 {
        let mut p = params();
        p.c_lambda = 0.02 + rng::unit(&mut r) * 0.5;
        p.kappa = 1.0 + rng::unit(&mut r);
        p.iota = 1e-3 + rng::unit(&mut r) * 4.0;
        let f_khz = 1.0 + rng::unit(&mut r) * 99.0;
        let f_rf = 1e3 + rng::unit(&mut r) * 1e7;
        let cos = math::cos(p.theta0) + rng::unit(&mut r) * (1.0 - math::cos(p.theta0));
        for _ in 0..10 {
            let d = 1.0 + rng::unit(&mut r) * 999.0;
            if slope(|x| channel::ul_gain(x, cos, &p), d) >= 0.0 {
                violations += 1;
            }
            if slope(|x| channel::pl_ua(x, f_khz, p.kappa), d) <= 0.0 {
                violations += 1;
            }
            if slope(|x| channel::pl_rf(x, f_rf, &p), d) <= 0.0 {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

fn random_point(r: &mut rng::StreamRng, side: f64) -> Point3 {
    Point3::new(rng::unit(r) * side, rng::unit(r) * side, -rng::unit(r) * side / 2.0)
}

// Exhaustive oracle: among feasible power-controlled links, the highest
// capacity, then least energy per bit, then UL before RF before UA.
fn oracle_best(src: &Point3, dst: &Point3, links: &LinkTable, p: &ChannelParams) -> Option<LinkType> {
    let rank = |t: LinkType| match t {
        LinkType::Ul => 0,
        LinkType::Rf => 1,
        LinkType::Ua => 2,
    };
    let mut cands: Vec<_> = LinkType::ALL
        .iter()
        .map(|&t| channel::controlled_budget(t, src, dst, 0.0, links, p))
        .filter(|b| b.feasible)
        .collect();
    cands.sort_by(|a, b| {
        b.capacity
            .total_cmp(&a.capacity)
            .then((a.tx_power / a.capacity).total_cmp(&(b.tx_power / b.capacity)))
            .then(rank(a.link).cmp(&rank(b.link)))
    });
    cands.first().map(|b| b.link)
}

#[test]
fn best_link_matches_exhaustive_choice() {
    let links = LinkTable::default();
    let p = params();
    let none = InterferenceState::none();
    let mut r = rng::stream(7, StreamTag::Fuzz, 1);
    let mut closed = 0;
    for i in 0..1000 {
        let side = if i % 2 == 0 { 60.0 } else { 600.0 };
        let a = random_point(&mut r, side);
        let b = random_point(&mut r, side);
        let got = channel::best_link(&a, &b, &none, &links, &p).ok().map(|b| b.link);
        assert_eq!(got, oracle_best(&a, &b, &links, &p), "{a:?} -> {b:?}");
        closed += got.is_some() as usize;
    }
    assert!(closed > 500);
}

proptest! {
    #[test]
    fn capacity_falls_with_interference(tx in 1e-6f64..5.0, loss in 0.0f64..150.0, i1 in 0.0f64..1e-9, di in 0.0f64..1e-9) {
        let p = params();
        let spec = LinkTable::default().ua;
        let lo = channel::capacity(tx, loss, i1 + di, &spec, &p);
        let hi = channel::capacity(tx, loss, i1, &spec, &p);
        prop_assert!(lo <= hi);
    }

    #[test]
    fn capacity_rises_with_power(tx in 1e-6f64..5.0, dtx in 0.0f64..5.0, loss in 0.0f64..150.0) {
        let p = params();
        let spec = LinkTable::default().rf;
        prop_assert!(channel::capacity(tx + dtx, loss, 0.0, &spec, &p) >= channel::capacity(tx, loss, 0.0, &spec, &p));
    }

    #[test]
    fn outage_is_a_probability_falling_in_power(e1 in -200.0f64..0.0, de in 0.0f64..50.0) {
        let p = params();
        let weak = channel::outage_prob(10f64.powf(e1 / 10.0), &p);
        let strong = channel::outage_prob(10f64.powf((e1 + de) / 10.0), &p);
        prop_assert!((0.0..=1.0).contains(&weak));
        prop_assert!((0.0..=1.0).contains(&strong));
        prop_assert!(strong <= weak);
    }

    #[test]
    fn controlled_budget_meets_threshold_with_margin(
        ax in 0.0f64..100.0, ay in 0.0f64..100.0, az in -50.0f64..0.0,
        bx in 0.0f64..100.0, by in 0.0f64..100.0, bz in -50.0f64..0.0,
    ) {
        let p = params();
        let links = LinkTable::default();
        let a = Point3::new(ax, ay, az);
        let b = Point3::new(bx, by, bz);
        for t in LinkType::ALL {
            let bud = channel::controlled_budget(t, &a, &b, 0.0, &links, &p);
            prop_assert_eq!(bud.distance, distance(&a, &b));
            if bud.feasible {
                prop_assert!(bud.tx_power <= links.get(t).max_power_w);
                let target = p.p_min * math::db_to_linear(p.fade_margin_db);
                prop_assert!((bud.rx_power / target - 1.0).abs() < 1e-9);
            } else {
                prop_assert_eq!(bud.capacity, 0.0);
                prop_assert_eq!(bud.outage, 1.0);
            }
        }
    }
}
