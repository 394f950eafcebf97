use std::collections::BTreeMap;

use proptest::prelude::*;

use kg_virial::config::{parse_config, ExperimentConfig};
use kg_virial::grid::{Grid, State};
use kg_virial::integrator::leapfrog_step;
use kg_virial::model::{make_model, CATALOG};
use kg_virial::scenario::{identity_residuals, random_odd_field, Lcg};
use kg_virial::virial::{bsharp, cross_term, h_loc, sf_ratio, to_w, VirialConfig};

fn grid() -> Grid {
    Grid::half_line(40.0, 3999).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 5)
        .prop_filter("nonzero", |c| c.iter().any(|v| v.abs() > 1e-3))
}

fn catalog_model() -> impl Strategy<Value = &'static str> {
    prop::sample::select(
        CATALOG
            .iter()
            .copied()
            .filter(|n| *n != "custom-poly")
            .collect::<Vec<_>>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nonlinearity_is_odd(name in catalog_model(), u in -3.0f64..3.0) {
        let m = make_model(name, &BTreeMap::new()).unwrap();
        prop_assert_eq!(m.f(-u), -m.f(u));
        prop_assert_eq!(m.antiderivative(-u), m.antiderivative(u));
    }

    #[test]
    fn antiderivative_derivative_is_f(name in catalog_model(), u in -2.0f64..2.0) {
        let m = make_model(name, &BTreeMap::new()).unwrap();
        let h = 1e-4;
        let fd = (m.antiderivative(u + h) - m.antiderivative(u - h)) / (2.0 * h);
        prop_assert!((fd - m.f(u)).abs() < 1e-6 * (1.0 + m.f(u).abs()));
    }

    #[test]
    fn custom_poly_is_odd(c3 in -2.0f64..2.0, c5 in -2.0f64..2.0, m in -2.0f64..0.0, u in -1.0f64..1.0) {
        let params: BTreeMap<String, f64> =
            [("c3".to_string(), c3), ("c5".to_string(), c5), ("m".to_string(), m)].into();
        let model = make_model("custom-poly", &params).unwrap();
        prop_assert_eq!(model.m, m);
        prop_assert!((model.f(u) - (c3 * u.powi(3) + c5 * u.powi(5))).abs() < 1e-14);
        prop_assert_eq!(model.f(-u), -model.f(u));
    }

    #[test]
    fn sf_ratio_is_scale_invariant(c in coeffs(), scale in 0.01f64..100.0, q in 0.5f64..4.0) {
        let g = grid();
        let cfg = VirialConfig::new(10.0).unwrap();
        let u = random_odd_field(&g, &c);
        let v: Vec<f64> = u.iter().map(|x| x * scale).collect();
        let (a, b) = (sf_ratio(&g, &u, cfg, q).unwrap(), sf_ratio(&g, &v, cfg, q).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn cross_term_bounded_by_local_energy(a in coeffs(), b in coeffs()) {
        let g = grid();
        let s = State::new(&g, random_odd_field(&g, &a), random_odd_field(&g, &b), 0.0).unwrap();
        prop_assert!(cross_term(&g, &s).abs() <= 0.5 * h_loc(&g, &s) + 1e-15);
    }

    #[test]
    fn transform_identity_and_coercivity(a in coeffs(), b in coeffs(), lambda in 2.0f64..20.0) {
        let g = Grid::half_line(80.0, 7999).unwrap();
        let cfg = VirialConfig::new(lambda).unwrap();
        let r = identity_residuals(&g, cfg, &random_odd_field(&g, &a), &random_odd_field(&g, &b));
        prop_assert!(r.bsharp < 1e-4);
        prop_assert!(r.antisymmetry < 1e-4);
        prop_assert!(r.h_split < 1e-12);
        prop_assert!(r.coercivity >= 0.75 - 1e-3);
    }

    #[test]
    fn bsharp_is_quadratic(c in coeffs(), s in -5.0f64..5.0) {
        let g = grid();
        let cfg = VirialConfig::new(10.0).unwrap();
        let w = to_w(&g, &random_odd_field(&g, &c), cfg);
        let sw: Vec<f64> = w.iter().map(|v| v * s).collect();
        let (a, b) = (bsharp(&g, &w, cfg), bsharp(&g, &sw, cfg));
        prop_assert!((b - s * s * a).abs() <= 1e-10 * b.abs().max(a.abs()));
    }

    #[test]
    fn leapfrog_is_time_reversible(c in coeffs(), name in catalog_model()) {
        let g = Grid::half_line(20.0, 399).unwrap();
        let model = make_model(name, &BTreeMap::new()).unwrap();
        let u1: Vec<f64> = random_odd_field(&g, &c).iter().map(|v| 0.1 * v).collect();
        let s0 = State::new(&g, u1, vec![0.0; g.len()], 0.0).unwrap();
        let mut s = s0.clone();
        for _ in 0..50 {
            leapfrog_step(&mut s, &model, &g, 0.01);
        }
        s.u2.iter_mut().for_each(|v| *v = -*v);
        for _ in 0..50 {
            leapfrog_step(&mut s, &model, &g, 0.01);
        }
        for (a, b) in s.u1.iter().zip(&s0.u1) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn describe_round_trips(eps in 0.001f64..0.1, sigma in 0.5f64..4.0, n in 16usize..5000, every in 1usize..100) {
        let text = format!(
            "scenario=decay\nmodel=phi6\nepsilon={eps}\nsigma={sigma}\nN={n}\nrecord_every={every}"
        );
        let cfg: ExperimentConfig = parse_config(&text).unwrap();
        let back = parse_config(&cfg.describe()).unwrap();
        prop_assert_eq!(back.describe(), cfg.describe());
        prop_assert_eq!(back.epsilon, eps);
    }

    #[test]
    fn lcg_is_reproducible(seed in any::<u64>()) {
        let (mut a, mut b) = (Lcg::new(seed), Lcg::new(seed));
        for _ in 0..10 {
            let x = a.next_signed();
            prop_assert!((-1.0..1.0).contains(&x));
            prop_assert_eq!(x, b.next_signed());
        }
    }
}
