use externalization_core::equilibrium::{g_hat_at, phi_bar};
use externalization_core::mc::{ks_distance, sample_rebel_resources, simulate, SimConfig};
use externalization_core::{ActionProfile, Curve, ModelParams, MonotoneFunction, PowerFamilyW, PowerFamilyZ};
use proptest::prelude::*;

fn power_z() -> impl Strategy<Value = PowerFamilyZ> {
    (0.2f64..5.0, 0.05f64..=1.0).prop_map(|(gbar, beta)| PowerFamilyZ::new(gbar, beta).unwrap())
}

fn power_w() -> impl Strategy<Value = PowerFamilyW> {
    (0.2f64..5.0, 0.05f64..=1.0).prop_map(|(a, gamma)| PowerFamilyW::new(a, gamma).unwrap())
}

/// Linear families that satisfy all three assumptions, at a random point.
fn admissible() -> impl Strategy<Value = ModelParams> {
    (0.5f64..=2.0, 0.0f64..1.0, 0.05f64..0.95, 0.01f64..0.5, 0.0f64..=1.0, 0.001f64..0.999).prop_map(
        |(gbar, s, u, dc, phi, t)| {
            let a = gbar * (2.0 + 3.0 * (1.0 - s));
            let l = gbar * (1.0 - gbar / a) + u * gbar * gbar / a;
            ModelParams {
                z: Curve::PowerZ(PowerFamilyZ::new(gbar, 1.0).unwrap()),
                w: Curve::PowerW(PowerFamilyW::new(a, 1.0).unwrap()),
                l,
                c: l / gbar + dc,
                phi,
                g: l + (gbar - l) * t,
            }
        },
    )
}

proptest! {
    #[test]
    fn eval_is_clamped_and_monotone(z in power_z(), w in power_w(), x in -10.0f64..10.0, dx in 0.0f64..1.0) {
        for (f, up) in [(Curve::PowerZ(z), true), (Curve::PowerW(w), false)] {
            let (a, b) = (f.eval(x), f.eval(x + dx));
            prop_assert!((0.0..=1.0).contains(&a));
            if up { prop_assert!(b >= a) } else { prop_assert!(b <= a) }
        }
    }

    #[test]
    fn inverse_round_trips(z in power_z(), w in power_w(), u in 0.0f64..=1.0) {
        prop_assert!((z.eval(z.inverse(u).unwrap()) - u).abs() < 1e-10);
        // W^-1(u) sits within a u^(1/gamma) fraction of `a`; past ~1e-5 that
        // distance is below what f64 resolves near `a`
        prop_assume!(u.powf(1.0 / w.gamma()) >= 1e-5);
        prop_assert!((w.eval(w.inverse(u).unwrap()) - u).abs() < 1e-10);
    }

    #[test]
    fn derivative_matches_central_difference(z in power_z(), w in power_w(), t in 0.05f64..0.95) {
        for f in [Curve::PowerZ(z), Curve::PowerW(w)] {
            let (lo, hi) = f.interior();
            let x = lo + (hi - lo) * t;
            let h = 1e-6 * (hi - lo);
            let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            let d = f.deriv(x).unwrap();
            prop_assert!((d - fd).abs() <= 1e-5 * d.abs().max(1e-3), "{d} vs {fd}");
        }
    }

    #[test]
    fn second_differences_show_concavity(z in power_z(), w in power_w(), t in 0.05f64..0.95) {
        for f in [Curve::PowerZ(z), Curve::PowerW(w)] {
            let (lo, hi) = f.interior();
            let x = lo + (hi - lo) * t;
            let h = 1e-3 * (hi - lo);
            let second = f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h);
            prop_assert!(second <= 1e-12);
        }
    }

    #[test]
    fn tolerance_gap_is_a_payoff_difference(p in admissible()) {
        let m = p.validate().unwrap();
        let t = m.payoff_table();
        prop_assert!((m.tolerance_gap() - (t[ActionProfile::PA].pi - t[ActionProfile::AA].pi)).abs() < 1e-12);
    }

    #[test]
    fn cost_exceeds_any_damage_gain(p in admissible(), t in 0.0f64..=1.0) {
        let m = p.validate().unwrap();
        let x = (m.gbar() - m.l()) * t;
        prop_assert!(m.c() > m.z().eval(x + m.l()) - m.z().eval(x));
    }

    #[test]
    fn assumption_two_bounds_the_ratio(p in admissible(), t in 0.01f64..0.99) {
        let m = p.validate().unwrap();
        let r = m.check_assumptions().unwrap();
        let g = m.l() + (m.gbar() - m.l()) * t;
        let (z, w) = (m.z(), m.w());
        let lhs = 1.0 + w.eval(g) / z.eval(g) * z.deriv(g).unwrap() / w.deriv(g).unwrap();
        prop_assert!(lhs <= 1.0 + r.a2_value + 1e-12);
    }

    #[test]
    fn tolerance_gap_sign_follows_threshold(p in admissible()) {
        let m = p.validate().unwrap();
        let pb = phi_bar(&m).unwrap();
        prop_assume!(pb < m.phi() && m.phi() < 1.0);
        let gh = g_hat_at(&m, m.phi()).unwrap();
        prop_assume!((m.g() - gh).abs() > 1e-8);
        prop_assert_eq!(m.tolerance_gap() > 0.0, m.g() > gh);
    }
}

#[test]
fn standard_error_shrinks_with_root_n() {
    let m = ModelParams {
        z: Curve::PowerZ(PowerFamilyZ::new(1.0, 1.0).unwrap()),
        w: Curve::PowerW(PowerFamilyW::new(3.0, 1.0).unwrap()),
        l: 0.7,
        c: 0.8,
        phi: 0.0,
        g: 0.9,
    }
    .validate()
    .unwrap();
    let se = |n| {
        let cfg = SimConfig::new(m.clone(), n, 5, ActionProfile::AA).unwrap();
        simulate(&cfg).gov_payoff.std_error
    };
    let mut prev = se(25_000);
    for n in [50_000, 100_000, 200_000] {
        let cur = se(n);
        let ratio = prev / cur;
        assert!((ratio - 2f64.sqrt()).abs() < 0.05, "n = {n}: ratio {ratio}");
        prev = cur;
    }
}

#[test]
fn rebel_draws_follow_z() {
    let m = ModelParams {
        z: Curve::PowerZ(PowerFamilyZ::new(1.5, 0.5).unwrap()),
        w: Curve::PowerW(PowerFamilyW::new(4.0, 0.7).unwrap()),
        l: 0.9,
        c: 1.0,
        phi: 0.3,
        g: 1.2,
    }
    .validate()
    .unwrap();
    for n in [1_000u64, 10_000, 100_000] {
        let cfg = SimConfig::new(m.clone(), n, 11, ActionProfile::PP).unwrap();
        let d = ks_distance(&sample_rebel_resources(&cfg), m.z());
        assert!(d < 2.0 / (n as f64).sqrt(), "n = {n}: {d}");
    }
}

#[test]
fn inverse_round_trips_on_a_grid() {
    let fams = [
        Curve::PowerZ(PowerFamilyZ::new(1.0, 1.0).unwrap()),
        Curve::PowerZ(PowerFamilyZ::new(1.0, 0.5).unwrap()),
        Curve::PowerW(PowerFamilyW::new(3.0, 1.0).unwrap()),
        Curve::PowerW(PowerFamilyW::new(3.0, 0.5).unwrap()),
    ];
    for f in &fams {
        for i in 1..=1000 {
            let u = i as f64 / 1001.0;
            let back = f.eval(f.inverse(u).unwrap());
            assert!((back - u).abs() < 1e-10, "{f:?} u = {u}: {back}");
        }
    }
}
