use std::f64::consts::{FRAC_PI_4, PI};

use proptest::prelude::*;
use swing_roa::certificate::{certify, Certifier, EpsChoice};
use swing_roa::roa::{init_frequencies, region_stats, scan, EpsPolicy, ScanMode, ScanSpec};
use swing_roa::{RandomSpec, State, SwingSystem, WeightedGraph};

fn pair(m: [f64; 2], d: [f64; 2], p: [f64; 2]) -> SwingSystem {
    SwingSystem::new(
        m.to_vec(),
        d.to_vec(),
        p.to_vec(),
        WeightedGraph::pair(0.2).unwrap(),
    )
    .unwrap()
}

#[test]
fn report_fields_are_consistent() {
    let s = RandomSpec::default()
        .instance(3, &[(FRAC_PI_4, EpsChoice::Auto)])
        .unwrap()
        .system;
    let x0 = init_frequencies(&s, &[1.0, 1.05]);
    let r = certify(&s, &x0, FRAC_PI_4, EpsChoice::Auto).unwrap();
    assert!(r.passed());
    let (lo, hi, eps) = (r.eps_lo.unwrap(), r.eps_hi.unwrap(), r.eps.unwrap());
    assert!(lo < eps && eps < hi);
    assert!((eps - (lo + 0.01 * (hi - lo))).abs() < 1e-15);
    assert_eq!(
        r.lhs_h3.unwrap(),
        r.energy_term.unwrap().max(r.forcing_term.unwrap())
    );
    assert!((r.margin.unwrap() - (r.rhs_h3.unwrap() - r.lhs_h3.unwrap())).abs() < 1e-15);
    assert!(r.c_ell_tilde.unwrap() < r.c_ell.unwrap());
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["eps_policy"], "auto");
}

#[test]
fn forcing_at_threshold_boundary() {
    let base = pair([0.12, 0.13], [0.33, 0.36], [0.0, 0.0]);
    let cert = Certifier::new(&base, 0.6, EpsChoice::Auto).unwrap();
    let t = cert.forcing_threshold().unwrap();
    let rest = State::zeros(2);
    // zero-sum direction (d2, -d1)/|.| keeps the drift at zero
    let dir = [0.36, -0.33];
    let len = (0.36f64.powi(2) + 0.33f64.powi(2)).sqrt();
    for (scale, expect) in [(0.99, true), (1.01, false)] {
        let p = [dir[0] / len * t * scale, dir[1] / len * t * scale];
        let s = base.with_power(p.to_vec()).unwrap();
        let r = certify(&s, &rest, 0.6, EpsChoice::Auto).unwrap();
        assert_eq!(r.h3_pass, expect, "scale {scale}");
    }
}

#[test]
fn exchange_symmetric_region_is_symmetric() {
    let s = pair([0.12, 0.12], [0.35, 0.35], [0.0, 0.0]);
    let spec = ScanSpec {
        resolution: 30,
        d0_list: vec![0.5, 1.0],
        ..ScanSpec::default()
    };
    let map = scan(&s, &spec, ScanMode::Cert).unwrap();
    for k in 0..2 {
        assert!(map.certified_count(k) > 0);
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(map.cell(i, j).certified[k], map.cell(j, i).certified[k]);
            }
        }
    }
}

#[test]
fn fixed_eps_regions_grow_with_d0() {
    let s = RandomSpec::default().instance(11, &[]).unwrap().system;
    let d0s: Vec<f64> = (1..=8).map(|k| k as f64 * PI / 19.0).collect();
    let eps = Certifier::new(&s, d0s[7], EpsChoice::Auto)
        .unwrap()
        .eps()
        .unwrap();
    let spec = ScanSpec {
        resolution: 40,
        d0_list: d0s,
        eps_policy: EpsPolicy::Explicit(vec![eps]),
        ..ScanSpec::default()
    };
    let map = scan(&s, &spec, ScanMode::Cert).unwrap();
    let stats = region_stats(&map);
    assert!(stats.combos.iter().all(|c| c.admissible));
    assert!(
        stats.nesting_violations.is_empty(),
        "{:?}",
        stats.nesting_violations
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verdict_is_invariant_under_common_phase_shift(
        seed in 0u64..50,
        theta in proptest::array::uniform2(0.0f64..PI),
        shift in -10.0f64..10.0,
    ) {
        let s = RandomSpec::default().instance(seed, &[(FRAC_PI_4, EpsChoice::Auto)]).unwrap().system;
        let cert = Certifier::new(&s, FRAC_PI_4, EpsChoice::Auto).unwrap();
        let x = init_frequencies(&s, &theta);
        let y = State::new(x.theta.iter().map(|t| t + shift).collect(), x.omega.clone());
        let (a, b) = (cert.check(&x), cert.check(&y));
        prop_assert_eq!(a.h3_pass, b.h3_pass);
        prop_assert!((a.e_tilde_0.unwrap() - b.e_tilde_0.unwrap()).abs() < 1e-10);
        prop_assert_eq!(cert.passes(&x), a.h3_pass);
    }

    #[test]
    fn larger_forcing_never_helps(
        seed in 0u64..50,
        theta in proptest::array::uniform2(0.0f64..PI),
        scale in 1.0f64..40.0,
    ) {
        let inst = RandomSpec::default().instance(seed, &[(FRAC_PI_4, EpsChoice::Auto)]).unwrap();
        let s = inst.system;
        let louder = s.with_power(s.power().iter().map(|p| p * scale).collect()).unwrap();
        let x = init_frequencies(&louder, &theta);
        let quiet = certify(&s, &x, FRAC_PI_4, EpsChoice::Auto).unwrap();
        let loud = certify(&louder, &x, FRAC_PI_4, EpsChoice::Auto).unwrap();
        prop_assert!(loud.forcing_term.unwrap() >= quiet.forcing_term.unwrap());
        prop_assert!(!loud.h3_pass || quiet.h3_pass);
    }
}
