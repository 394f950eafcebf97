//! Discrete functionals against independent quadrature and closed forms.

use std::collections::BTreeMap;

use kg_virial::exact::{
    breather_exact, breather_state, linear_standing_wave, standing_wave_energy,
    standing_wave_frequency, BreatherParams,
};
use kg_virial::grid::{energy_norm, l2_norm, Grid, State};
use kg_virial::integrator::{cfl_dt, evolve, run, RunSettings};
use kg_virial::model::{energy, eval_f, make_model};
use kg_virial::scenario::make_initial_data;
use kg_virial::virial::{
    bilinear_b, bsharp, cross_term, h_loc, sf_ratio, time_derivative, virial_i, weighted_norms,
    VirialConfig,
};
use kg_virial::{parse_config, Scenario};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Full-line integral of an even integrand.
fn even_integral(f: impl Fn(f64) -> f64, length: f64) -> f64 {
    2.0 * simpson(f, 0.0, length, 100_000)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn g(x: f64) -> f64 {
    x * (-x * x).exp()
}

fn dg(x: f64) -> f64 {
    (1.0 - 2.0 * x * x) * (-x * x).exp()
}

fn fine_grid() -> Grid {
    Grid::half_line(10.0, 19_999).unwrap()
}

fn state(grid: &Grid, u1: impl Fn(f64) -> f64, u2: impl Fn(f64) -> f64) -> State {
    State::new(grid, grid.sample(u1), grid.sample(u2), 0.0).unwrap()
}

fn vc(lambda: f64) -> VirialConfig {
    VirialConfig::new(lambda).unwrap()
}

#[test]
fn virial_i_matches_simpson() {
    let grid = fine_grid();
    let lambda = 10.0;
    let s = state(&grid, g, |x| x * (-x * x / 2.0).exp());
    let oracle = even_integral(
        |x| {
            let psi = lambda * (x / lambda).tanh();
            let dpsi = sech(x / lambda).powi(2);
            (psi * dg(x) + 0.5 * dpsi * g(x)) * x * (-x * x / 2.0).exp()
        },
        10.0,
    );
    assert!(rel(virial_i(&grid, &s, vc(lambda)), oracle) < 1e-6);
}

#[test]
fn virial_i_vanishes_on_the_diagonal() {
    let grid = fine_grid();
    let s = state(&grid, g, g);
    let scale = virial_i(
        &grid,
        &state(&grid, g, |x| x * (-x * x / 2.0).exp()),
        vc(10.0),
    );
    assert!(virial_i(&grid, &s, vc(10.0)).abs() < 1e-6 * scale.abs());
}

#[test]
fn bilinear_b_matches_simpson() {
    let grid = fine_grid();
    let oracle = even_integral(
        |x| {
            let (s, t) = (sech(x), x.tanh());
            s * s * dg(x).powi(2) - 0.25 * 2.0 * s * s * (3.0 * t * t - 1.0) * g(x).powi(2)
        },
        10.0,
    );
    assert!(rel(bilinear_b(&grid, &grid.sample(g), vc(1.0)), oracle) < 1e-6);
}

#[test]
fn bsharp_matches_simpson() {
    let grid = fine_grid();
    let oracle = even_integral(
        |x| dg(x).powi(2) - 0.5 * sech(x).powi(2) * g(x).powi(2),
        10.0,
    );
    assert!(rel(bsharp(&grid, &grid.sample(g), vc(1.0)), oracle) < 1e-6);
}

#[test]
fn weighted_norms_match_simpson() {
    let grid = fine_grid();
    let s = state(&grid, g, |_| 0.0);
    let (h1, l2) = weighted_norms(&grid, &s);
    let oracle = even_integral(|x| sech(x) * (dg(x).powi(2) + g(x).powi(2)), 10.0);
    assert!(rel(h1, oracle) < 1e-6);
    assert_eq!(l2, 0.0);
    assert!(rel(h_loc(&grid, &s), oracle) < 1e-6);
}

#[test]
fn cross_term_matches_simpson() {
    let grid = fine_grid();
    let s = state(&grid, g, g);
    let oracle = even_integral(|x| sech(x) * g(x) * g(x), 10.0);
    assert!(rel(cross_term(&grid, &s), oracle) < 1e-6);
}

#[test]
fn sf_ratio_matches_simpson() {
    let grid = fine_grid();
    let lambda = 10.0;
    let num = even_integral(|x| sech(x / lambda).powi(2) * g(x).powi(4), 10.0);
    let grad = even_integral(
        |x| {
            let z = sech(x / lambda);
            (z * (dg(x) - (x / lambda).tanh() / lambda * g(x))).powi(2)
        },
        10.0,
    );
    let sup = g(std::f64::consts::FRAC_1_SQRT_2);
    let oracle = num / (sup * sup * grad);
    let got = sf_ratio(&grid, &grid.sample(g), vc(lambda), 2.0).unwrap();
    assert!(rel(got, oracle) < 1e-5, "{got} vs {oracle}");
}

#[test]
fn kinetic_energy_of_gaussian_moment() {
    let grid = Grid::half_line(40.0, 3999).unwrap();
    let model = make_model("linear-kg", &BTreeMap::new()).unwrap();
    let s = state(&grid, |_| 0.0, g);
    // ½ ∫ x² e^{-2x²} = √π / (4 · 2^{3/2})
    let exact = std::f64::consts::PI.sqrt() / (4.0 * 2f64.powf(1.5));
    assert!(rel(energy(&s, &model, &grid).unwrap(), exact) < 1e-10);
}

#[test]
fn breather_energy_is_sixteen_beta() {
    let sg = make_model("sine-gordon", &BTreeMap::new()).unwrap();
    let e = |beta: f64| {
        let grid = Grid::full_line(40.0 / beta, 39_999).unwrap();
        let p = BreatherParams::new(beta).unwrap();
        energy(&breather_state(&p, 0.0, &grid).unwrap(), &sg, &grid).unwrap()
    };
    assert!(rel(e(0.6), 16.0 * 0.6) < 1e-5);
    let base = e(0.1) / 0.1;
    for beta in [0.2, 0.4] {
        assert!(rel(e(beta) / beta, base) < 0.05);
    }
}

#[test]
fn breather_residual_is_second_order() {
    let p = BreatherParams::new(0.5).unwrap();
    let (t, h) = (0.7, 1e-3);
    let residual = |n: usize| {
        let grid = Grid::full_line(60.0, n).unwrap();
        let b = |t: f64| grid.sample(|x| breather_exact(&p, t, x));
        let (prev, now, next) = (b(t - h), b(t), b(t + h));
        let mut lap = vec![0.0; grid.len()];
        grid.laplacian_into(&now, &mut lap);
        let r: Vec<f64> = (0..grid.len())
            .map(|j| (next[j] - 2.0 * now[j] + prev[j]) / (h * h) - lap[j] + now[j].sin())
            .collect();
        l2_norm(&grid, &r)
    };
    let ratio = residual(1199) / residual(2399);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn standing_wave_energy_closed_form() {
    let grid = Grid::half_line(20.0, 1999).unwrap();
    let model = make_model("linear-kg", &BTreeMap::new()).unwrap();
    for (n, t) in [(1, 0.0), (3, 0.4), (5, 2.0)] {
        let s = linear_standing_wave(n, &grid, t).unwrap();
        let e = energy(&s, &model, &grid).unwrap();
        assert!(rel(e, standing_wave_energy(n, 20.0)) < 1e-4);
    }
}

#[test]
fn standing_wave_one_period_second_order() {
    let model = make_model("linear-kg", &BTreeMap::new()).unwrap();
    let omega = standing_wave_frequency(3, 20.0);
    let period = 2.0 * std::f64::consts::PI / omega;
    let error = |n: usize, steps: usize| {
        let grid = Grid::half_line(20.0, n).unwrap();
        let s0 = linear_standing_wave(3, &grid, 0.0).unwrap();
        let s = evolve(&s0, &model, &grid, period / steps as f64, steps).unwrap();
        let d1: Vec<f64> = s.u1.iter().zip(&s0.u1).map(|(a, b)| a - b).collect();
        let d2: Vec<f64> = s.u2.iter().zip(&s0.u2).map(|(a, b)| a - b).collect();
        // u₁ sits at a phase extremum after a full period, so its error is
        // quadratic in the phase error; u₂ carries the leading term
        l2_norm(&grid, &d1).hypot(l2_norm(&grid, &d2))
    };
    // dt fine enough that the spatial error dominates; at a fixed dt/dx the
    // temporal and spatial dispersion errors partly cancel
    let ratio = error(99, 4000) / error(199, 4000);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn cfl_step_is_stable_for_many_steps() {
    let grid = Grid::half_line(80.0, 7999).unwrap();
    let model = make_model("linear-kg", &BTreeMap::new()).unwrap();
    let dt = cfl_dt(&grid, &model, 0.4).unwrap();
    assert!((dt - 0.4 * 2.0 / 40_001f64.sqrt()).abs() < 1e-15);
    let s0 = state(&grid, |x| 0.05 * x * (-x * x / 4.0).exp(), |_| 0.0);
    let e0 = energy(&s0, &model, &grid).unwrap();
    let s = evolve(&s0, &model, &grid, dt, 100_000).unwrap();
    assert!(s.is_finite());
    assert!(rel(energy(&s, &model, &grid).unwrap(), e0) < 1e-4);
}

#[test]
fn initial_data_is_normalized() {
    for family in ["gauss-odd-displacement", "gauss-odd-velocity"] {
        let text = format!("scenario=decay\nmodel=sine-gordon\ndata_family={family}\nN=1999");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.scenario, Scenario::Decay);
        let grid = Grid::half_line(cfg.length, cfg.n).unwrap();
        let s = make_initial_data(&cfg, &grid).unwrap();
        assert!(rel(energy_norm(&grid, &s), cfg.epsilon) < 1e-10);
        let model = make_model("sine-gordon", &BTreeMap::new()).unwrap();
        let e = energy(&s, &model, &grid).unwrap();
        let eps2 = cfg.epsilon * cfg.epsilon;
        assert!(e > 0.1 * eps2 && e < eps2, "energy {e}");
    }
}

#[test]
fn breather_local_energy_recurs_after_one_period() {
    let p = BreatherParams::new(0.5).unwrap();
    let grid = Grid::full_line(40.0, 7999).unwrap();
    let model = make_model("sine-gordon", &BTreeMap::new()).unwrap();
    let s0 = breather_state(&p, 0.0, &grid).unwrap();
    let steps = 1900;
    let s = evolve(&s0, &model, &grid, p.period() / steps as f64, steps).unwrap();
    assert!(rel(h_loc(&grid, &s), h_loc(&grid, &s0)) < 1e-2);
}

#[test]
fn local_energy_derivative_matches_analytic() {
    let grid = Grid::half_line(40.0, 3999).unwrap();
    let model = make_model("sine-gordon", &BTreeMap::new()).unwrap();
    let s0 = state(&grid, |x| 0.05 * x * (-x * x / 4.0).exp(), |_| 0.0);
    let dt = cfl_dt(&grid, &model, 0.4).unwrap();
    let settings = RunSettings::new(dt, 20.0, 10).unwrap();
    let recs = run(&s0, &model, &grid, &settings, vc(10.0)).unwrap();
    let ts: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let hs: Vec<f64> = recs.iter().map(|r| r.h).collect();
    let scale = recs
        .iter()
        .map(|r| r.dh_dt_analytic.abs())
        .fold(0.0, f64::max);
    let worst = time_derivative(&ts, &hs)
        .iter()
        .zip(&recs)
        .map(|(d, r)| (d - r.dh_dt_analytic).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3 * scale, "{worst} vs {scale}");
}

#[test]
fn catalog_examples() {
    let phi4 = make_model("phi4", &BTreeMap::new()).unwrap();
    assert_eq!(eval_f(&phi4, 0.5), -0.125);
    let sg = make_model("sine-gordon", &BTreeMap::new()).unwrap();
    for u in [0.3, 1.0, 2.5] {
        assert!((sg.m * u + eval_f(&sg, u) + u.sin()).abs() < 1e-15);
    }
}
