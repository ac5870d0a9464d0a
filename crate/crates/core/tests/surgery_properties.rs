use std::sync::Arc as Shared;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use edge_surgery::angle::{strictly_between, Arc};
use edge_surgery::lamination::{angles_of_period, colanding, conjugate_periodic_angle};
use edge_surgery::surgery::{
    tune_angle, tune_config, validate_config, Side, Strip, Vertex, THETA_LABELS,
};
use edge_surgery::{Angle, AngleMap, EdgeConfig, SurgeryHomeo, TuningWord};

fn angle(n: i64, d: i64) -> Angle {
    Angle::new(n, d).unwrap()
}

fn fig2_angles() -> [Angle; 8] {
    [
        angle(11, 56),
        angle(199, 1008),
        angle(103, 504),
        angle(23, 112),
        angle(29, 112),
        angle(131, 504),
        angle(269, 1008),
        angle(15, 56),
    ]
}

fn fig2() -> EdgeConfig {
    validate_config(fig2_angles()).unwrap()
}

/// The complex-conjugate edge: angles `1 - θ` in reversed order.
fn mirrored() -> EdgeConfig {
    let mut theta = fig2_angles().map(|t| t.conjugate());
    theta.reverse();
    validate_config(theta).unwrap()
}

fn homeo() -> &'static SurgeryHomeo {
    use std::sync::OnceLock;
    static H: OnceLock<SurgeryHomeo> = OnceLock::new();
    H.get_or_init(|| SurgeryHomeo::new(fig2()).unwrap())
}

fn fraction(max_den: u64) -> impl Strategy<Value = Angle> {
    (1u64..=max_den).prop_flat_map(|d| (0..d, Just(d)).prop_map(|(n, d)| Angle::new(n, d).unwrap()))
}

/// A rational strictly inside `arc`, at fraction `k / m` of its length.
fn point_in(arc: &Arc, k: u64, m: u64) -> Angle {
    let offset = arc.length() * BigRational::new(BigInt::from(k), BigInt::from(m));
    arc.start.add(&Angle::from_ratio(offset))
}

fn in_edge_arcs() -> impl Strategy<Value = Angle> {
    (0usize..2, 2u64..=90).prop_flat_map(|(side, m)| {
        (1..m).prop_map(move |k| point_in(&fig2().edge_arcs()[side], k, m))
    })
}

/// Whether the doubling orbit of `t` ever meets the closed V or W arcs.
fn orbit_meets_strips(cfg: &EdgeConfig, t: &Angle) -> bool {
    let strips: Vec<Arc> = [Strip::V, Strip::W]
        .into_iter()
        .flat_map(|s| cfg.strip_arcs(s))
        .map(|a| Arc::closed(a.start, a.end))
        .collect();
    let class = t.orbit_class();
    class.orbit[..class.preperiod + class.period]
        .iter()
        .any(|x| strips.iter().any(|a| a.contains(x)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn conjugacy_identity_and_inverse(t in fraction(10_000)) {
        let h = homeo();
        let ht = h.conjugacy(&t).unwrap();
        let g = h.forward_map().eval(&t);
        prop_assert_eq!(h.conjugacy(&g).unwrap(), ht.double());
        prop_assert_eq!(h.inverse_conjugacy(&ht).unwrap(), t.clone());
        let back = h.map_angle(&h.map_angle(&t, 1).unwrap(), -1).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn type_is_preserved(t in fraction(10_000)) {
        let image = homeo().map_angle(&t, 1).unwrap();
        prop_assert_eq!(image.is_periodic(), t.is_periodic(), "{} -> {}", t, image);
    }

    #[test]
    fn identity_where_the_orbit_avoids_the_strips(t in fraction(2_000)) {
        let h = homeo();
        if !orbit_meets_strips(h.config(), &t) {
            prop_assert_eq!(h.conjugacy(&t).unwrap(), t.clone());
            prop_assert_eq!(h.map_angle(&t, 3).unwrap(), t);
        }
    }

    #[test]
    fn cyclic_order_is_preserved(a in in_edge_arcs(), b in in_edge_arcs(), c in in_edge_arcs()) {
        prop_assume!(a != b && b != c && a != c);
        let h = homeo();
        let (ha, hb, hc) = (
            h.map_angle(&a, 1).unwrap(),
            h.map_angle(&b, 1).unwrap(),
            h.map_angle(&c, 1).unwrap(),
        );
        prop_assert_eq!(strictly_between(&a, &b, &c), strictly_between(&ha, &hb, &hc));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inverse_power_cancels(t in in_edge_arcs(), n in 1i64..4) {
        let h = Shared::new(SurgeryHomeo::new(fig2()).unwrap());
        let there = AngleMap::power(h.clone(), n);
        let round = there.inverse().after(there);
        prop_assert_eq!(round.apply(&t).unwrap(), t);
    }

    #[test]
    fn disjoint_supports_commute(t in in_edge_arcs(), flip in any::<bool>()) {
        let h1 = AngleMap::power(Shared::new(SurgeryHomeo::new(fig2()).unwrap()), 1);
        let h2 = AngleMap::power(Shared::new(SurgeryHomeo::new(mirrored()).unwrap()), 1);
        prop_assert!(h1.supports_disjoint(&h2));
        let t = if flip { t.conjugate() } else { t };
        let ab = h1.clone().after(h2.clone()).apply(&t).unwrap();
        let ba = h2.after(h1).apply(&t).unwrap();
        prop_assert_eq!(ab, ba);
    }
}

#[test]
fn vertices_are_fixed() {
    let h = homeo();
    for i in [1, 4] {
        for side in [Side::Minus, Side::Plus] {
            let t = h.config().theta(i, side).clone();
            for n in [-3, -1, 1, 3] {
                assert_eq!(h.map_angle(&t, n).unwrap(), t);
            }
        }
    }
}

#[test]
fn mirrored_config_mirrors_the_map() {
    let cfg = mirrored();
    assert_eq!(
        (cfg.k_v, cfg.k_w, cfg.k_tilde_v, cfg.k_tilde_w),
        (7, 4, 4, 7)
    );
    let h = SurgeryHomeo::new(cfg).unwrap();
    for t in [angle(199, 1008), angle(25, 127), angle(1, 5)] {
        let image = homeo().map_angle(&t, 1).unwrap();
        assert_eq!(h.map_angle(&t.conjugate(), 1).unwrap(), image.conjugate());
    }
}

#[test]
fn periodic_leaves_map_to_leaves() {
    let h = homeo();
    let cfg = h.config();
    let mut checked = 0;
    for p in 2..=10 {
        for t in angles_of_period(p) {
            let s = conjugate_periodic_angle(&t).unwrap();
            if t > s || !cfg.in_edge_arcs(&t) || !cfg.in_edge_arcs(&s) {
                continue;
            }
            let (ht, hs) = (h.map_angle(&t, 1).unwrap(), h.map_angle(&s, 1).unwrap());
            assert!(colanding(&ht, &hs).unwrap(), "{t} {s} -> {ht} {hs}");
            let (bt, bs) = (h.map_angle(&t, -1).unwrap(), h.map_angle(&s, -1).unwrap());
            assert!(colanding(&bt, &bs).unwrap(), "{t} {s} <- {bt} {bs}");
            checked += 1;
        }
    }
    assert!(checked >= 5, "only {checked} leaves in the edge arcs");
}

#[test]
fn preperiodic_classes_map_to_classes() {
    let h = homeo();
    let cfg = h.config();
    let mut inside = Vec::new();
    for l in 1..=7u32 {
        for p in 1..=(11 - l) {
            let den = (1i64 << l) * ((1i64 << p) - 1);
            for k in 0..den {
                let t = angle(k, den);
                if t.preperiod() == l as u64 && t.period() == p as u64 && cfg.in_edge_arcs(&t) {
                    inside.push(t);
                }
            }
        }
    }
    let mut pairs = 0;
    for i in 0..inside.len() {
        for j in i + 1..inside.len() {
            if colanding(&inside[i], &inside[j]).unwrap() {
                let (a, b) = (
                    h.map_angle(&inside[i], 1).unwrap(),
                    h.map_angle(&inside[j], 1).unwrap(),
                );
                assert!(colanding(&a, &b).unwrap(), "{} {}", inside[i], inside[j]);
                pairs += 1;
            }
        }
    }
    assert!(pairs >= 3, "only {pairs} co-landing pairs sampled");
}

#[test]
fn domains_accumulate_at_the_vertices() {
    let h = homeo();
    let domains = h.fundamental_domains(8).unwrap();
    assert_eq!(domains.len(), 17);
    let zero = &domains[8];
    assert_eq!(
        (zero.minus.clone(), zero.plus.clone()),
        (angle(199, 1008), angle(269, 1008))
    );
    assert_eq!(
        (domains[9].minus.clone(), domains[9].plus.clone()),
        (angle(103, 504), angle(131, 504))
    );
    let b = (angle(23, 112), angle(29, 112));
    for w in domains.windows(2) {
        assert!(strictly_between(&w[0].minus, &w[1].minus, &b.0));
        assert!(strictly_between(&b.1, &w[1].plus, &w[0].plus));
    }
}

fn as_f64(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Near `Θ1-` the samples measure `H`; near `Θ4-` they are read backwards
/// to measure `H^-1`, whose exponent there is `α_w`.
#[test]
fn holder_exponents_stay_in_range() {
    let h = homeo();
    let data = h.holder_data();
    let small_gap = 1e-4f64.ln();
    for (vertex, alpha) in [(Vertex::Outer, data.alpha_v), (Vertex::Inner, data.alpha_w)] {
        let lower = as_f64(alpha) - 0.1;
        let samples = h.scaling_exponents(vertex, 12).unwrap();
        let mut checked = 0;
        for s in samples {
            let (gap, exponent) = match vertex {
                Vertex::Outer => (s.ln_gap, s.exponent),
                Vertex::Inner => (s.ln_image_gap, 1.0 / s.exponent),
            };
            if gap < small_gap {
                assert!(
                    (lower..=1.0).contains(&exponent),
                    "{vertex:?} n = {}: {exponent}",
                    s.n
                );
                checked += 1;
            }
        }
        assert!(checked >= 10);
    }
}

#[test]
fn tuned_config_validates() {
    let word = TuningWord::parse("01", "10").unwrap();
    let cfg = fig2();
    let tuned = tune_config(&word, &cfg).unwrap();
    assert_eq!(
        (tuned.k_v, tuned.k_w, tuned.k_tilde_v, tuned.k_tilde_w),
        (14, 8, 8, 14)
    );
    assert_eq!((tuned.sigma_v, tuned.sigma_w), (cfg.sigma_v, cfg.sigma_w));
    for (i, label) in THETA_LABELS.iter().enumerate() {
        let e = cfg.thetas()[i].to_expansion();
        let t = tuned.thetas()[i].to_expansion();
        assert_eq!(
            t.preperiod_word,
            word.substitute(&e.preperiod_word),
            "{label}"
        );
        assert_eq!(t.period_word, word.substitute(&e.period_word), "{label}");
    }
    assert_eq!(tuned.thetas()[0], angle(1423, 4032));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Tuning commutes with doubling up to the period: `2^p τ(x) = τ(2x)`.
    #[test]
    fn tuning_intertwines_doubling(t in fraction(2_000)) {
        let word = TuningWord::parse("01", "10").unwrap();
        let tuned = tune_angle(&word, &t);
        prop_assert_eq!(tuned.double_n(word.period() as u64), tune_angle(&word, &t.double()));
    }

    #[test]
    fn tuning_preserves_order(a in fraction(2_000), b in fraction(2_000)) {
        prop_assume!(a < b);
        let word = TuningWord::parse("011", "100").unwrap();
        prop_assert!(tune_angle(&word, &a) < tune_angle(&word, &b));
    }
}
