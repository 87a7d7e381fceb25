use pulse_cns::diagnostics::{
    effective_flux, elliptic_residual_with, energies, freq_split_low, grad_a_evolution_residual, inequality_monitor,
    material_derivative, potential_energy, pressure_deviation, record, state_from_fns, DiagnosticsOptions,
};
use pulse_cns::field::VectorField;
use pulse_cns::spectral::{l2_sq, l2_sq_vector, lp_norm_scalar};
use pulse_cns::verify::random_state;
use pulse_cns::{Grid, PulseParams, ScalarField, State};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn params(gamma: f64) -> PulseParams {
    PulseParams { gamma, ..Default::default() }
}

fn constant(grid: Grid, rho: f64) -> State {
    state_from_fns(grid, 0.0, |_, _, _| rho, |_, _, _| [0.0; 3]).unwrap()
}

#[test]
fn potential_energy_closed_forms() {
    let g = Grid::new(8, 1.0).unwrap();
    assert_eq!(potential_energy(&State::equilibrium(g), 1.4).unwrap(), 0.0);
    assert!((potential_energy(&constant(g, 1.5), 2.0).unwrap() - 0.25).abs() < 1e-14);
    let want = 2.0 * 2f64.ln() - 1.0;
    assert!((potential_energy(&constant(g, 2.0), 1.0).unwrap() - 0.3862944).abs() < 1e-7);
    assert!((potential_energy(&constant(g, 2.0), 1.0).unwrap() - want).abs() < 1e-14);
}

#[test]
fn potential_energy_rejects_nonpositive_density() {
    let g = Grid::new(8, 1.0).unwrap();
    let mut s = State::equilibrium(g);
    s.rho.values_mut()[3] = -0.1;
    assert!(potential_energy(&s, 1.0).is_err());
    // the constructor refuses it too
    assert!(state_from_fns(g, 0.0, |x, _, _| if x < 0.5 { 1.0 } else { -0.1 }, |_, _, _| [0.0; 3]).is_err());
}

#[test]
fn effective_flux_examples() {
    let g = Grid::new(8, 1.0).unwrap();
    let f = effective_flux(&State::equilibrium(g), &params(1.0));
    assert!(f.values().iter().all(|v| *v == 0.0));
    for gamma in [1.0, 1.4, 3.0] {
        let f = effective_flux(&constant(g, 2f64.powf(1.0 / gamma)), &params(gamma));
        assert!(f.values().iter().all(|v| (v + 1.0).abs() < 1e-14), "gamma {gamma}");
    }
}

#[test]
fn material_derivative_of_shear_mode() {
    let g = Grid::new(16, 2.0).unwrap();
    let k = 2.0 * PI / 2.0;
    let amp = 0.7;
    for gamma in [1.0, 1.4, 2.0] {
        let s = state_from_fns(g, 0.0, |_, _, _| 1.0, |x, _, _| [amp * (k * x).sin(), 0.0, 0.0]).unwrap();
        let ud = material_derivative(&s, &params(gamma)).unwrap();
        let want = ScalarField::from_fn(g, |x, _, _| -amp * k * k * (k * x).sin());
        let c = ud.components();
        for (got, w) in c[0].values().iter().zip(want.values()) {
            assert!((got - w).abs() < 1e-12);
        }
        assert!(c[1].values().iter().chain(c[2].values()).all(|v| v.abs() < 1e-14));
    }
}

#[test]
fn elliptic_residual_sees_perturbed_udot() {
    let g = Grid::new(16, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = random_state(g, 3, &mut rng);
    let p = params(1.4);
    let ud = material_derivative(&s, &p).unwrap();
    assert!(elliptic_residual_with(&s, &p, &ud).unwrap() < 1e-10);
    let noise = random_state(g, 3, &mut rng).u;
    let scale = 1e-3 * (l2_sq_vector(&ud) / l2_sq_vector(&noise)).sqrt();
    let perturbed = VectorField::new(
        [0, 1, 2].map(|i| ud.components()[i].zip_map(&noise.components()[i], |a, b| a + scale * b).unwrap()),
    )
    .unwrap();
    let r = elliptic_residual_with(&s, &p, &perturbed).unwrap();
    assert!(r > 1e-4 && r < 1e-1, "residual {r}");
}

#[test]
fn equilibrium_diagnostics_vanish() {
    let g = Grid::new(16, 1.0).unwrap();
    let s = State::equilibrium(g);
    let r = record(&s, &params(1.0), &DiagnosticsOptions::default()).unwrap();
    for v in [r.h_rho, r.e1, r.e2, r.e, r.d, r.linf_a, r.l2_f, r.l2_curl_u, r.l2_rho_udot, r.freq_split_low] {
        assert_eq!(v, 0.0);
    }
    assert_eq!(r.elliptic_residual, 0.0);
    assert!((r.mass - 1.0).abs() < 1e-15);
    for (name, lhs, rhs) in &r.ineq_margins {
        assert!(lhs <= rhs, "{name}");
    }
}

#[test]
fn energies_of_single_shear_mode() {
    let g = Grid::new(16, 1.0).unwrap();
    let k = 2.0 * PI;
    let amp = 0.3;
    let s = state_from_fns(g, 0.0, |_, _, _| 1.0, |_, y, _| [amp * (k * y).sin(), 0.0, 0.0]).unwrap();
    let e = energies(&s, &params(1.0), 1.0).unwrap();
    // ||u||^2 = amp^2/2, ||curl u||^2 = amp^2 k^2 / 2, udot = -k^2 u
    let u2 = 0.5 * amp * amp;
    assert!((e.e1 - (u2 + 0.5 * k * k * u2)).abs() < 1e-10 * e.e1);
    let e2 = k.powi(4) * u2;
    assert!((e.e2 - e2).abs() < 1e-10 * e2);
    assert!((e.e - (e.e1 + e2 / 4.0)).abs() < 1e-10 * e.e);
    let d = 0.25 * k * k * u2 + 0.25 * k.powi(4) * u2 + 0.25 * k.powi(6) * u2;
    assert!((e.d - d).abs() < 1e-10 * d);
}

#[test]
fn freq_split_of_one_low_mode() {
    let g = Grid::new(16, 1.0).unwrap();
    let eps = 0.01;
    let s = state_from_fns(g, 0.0, |x, _, _| 1.0 + eps * (2.0 * PI * x).cos(), |_, _, _| [0.0; 3]).unwrap();
    let gamma = 1.4;
    // energy eps^2 / 2 split across k = +-1
    let want = gamma * 0.5 * eps * eps;
    assert!((freq_split_low(&s, gamma, 7.0).unwrap() - want).abs() < 1e-14);
    assert!(freq_split_low(&s, gamma, 6.0).unwrap() < 1e-30);
    assert!(freq_split_low(&s, gamma, 0.0).is_err());
}

#[test]
fn interpolation_bound_for_constant_a() {
    let g = Grid::new(8, 1.0).unwrap();
    let s = constant(g, 2.0);
    let m = inequality_monitor(&s, &params(1.0), 10.0 / 3.0).unwrap();
    let r2p3 = m.iter().find(|m| m.name == "l3interp_R2_p3").unwrap();
    assert!((r2p3.lhs - 1.0).abs() < 1e-14);
    let rhs = 16.0 * (2.0 * 2f64.ln() - 1.0) + 0.125;
    assert!((r2p3.rhs - rhs).abs() < 1e-12);
    assert!((r2p3.rhs - 6.306).abs() < 1e-3);
    assert!(m.iter().filter(|m| m.hard).all(|m| m.holds()));
}

#[test]
fn grad_a_residual_needs_three_snapshots() {
    let g = Grid::new(8, 1.0).unwrap();
    let s = State::equilibrium(g);
    assert!(grad_a_evolution_residual(&[s.clone(), s], &params(1.0), 2.0).is_err());
}

#[test]
fn grad_a_residual_on_equilibrium_series() {
    let g = Grid::new(8, 1.0).unwrap();
    let series: Vec<State> = (0..4)
        .map(|i| {
            let mut s = State::equilibrium(g);
            s.t = i as f64 * 0.1;
            s
        })
        .collect();
    for r in grad_a_evolution_residual(&series, &params(1.0), 2.0).unwrap() {
        assert_eq!(r.absolute, 0.0);
    }
}

/// rho(t, x) = 1 + eps cos(k (x - c t)) transported by the uniform flow u = (c, 0, 0)
/// solves the continuity equation exactly.
fn transported(g: Grid, t: f64) -> State {
    let (eps, c, k) = (0.2, 0.8, 2.0 * PI);
    state_from_fns(g, t, |x, _, _| 1.0 + eps * (k * (x - c * t)).cos(), |_, _, _| [c, 0.0, 0.0]).unwrap()
}

#[test]
fn grad_a_residual_converges_for_transported_density() {
    let g = Grid::new(16, 1.0).unwrap();
    let residual = |dt: f64| {
        let series: Vec<State> = (0..3).map(|i| transported(g, 0.3 + i as f64 * dt)).collect();
        grad_a_evolution_residual(&series, &params(1.0), 2.0).unwrap()[0].absolute
    };
    let (r1, r2) = (residual(1e-4), residual(5e-5));
    assert!(r1 <= 1e-6, "{r1}");
    let ratio = r1 / r2;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn pressure_deviation_dominates_density_deviation() {
    let g = Grid::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for gamma in [1.0, 1.4, 2.0, 3.0] {
        let rho = ScalarField::from_values(g, (0..g.len()).map(|_| rng.gen_range(0.2..5.0)).collect()).unwrap();
        let a = pressure_deviation(&rho, gamma);
        for (r, a) in rho.values().iter().zip(a.values()) {
            assert!((r - 1.0).abs() <= a.abs() * (1.0 + 1e-15));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn freq_split_is_monotone_in_radius(seed in 0u64..1000, r in 0.5f64..60.0, dr in 0.0f64..30.0, t in 0.0f64..4.0) {
        let g = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_state(g, 2, &mut rng);
        s.t = t;
        let lo = freq_split_low(&s, 1.4, r).unwrap();
        let hi = freq_split_low(&s, 1.4, r + dr).unwrap();
        prop_assert!(lo <= hi);
    }

    #[test]
    fn potential_energy_is_nonnegative(seed in 0u64..1000, gamma in 1.0f64..3.0) {
        let g = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(g, 2, &mut rng);
        prop_assert!(potential_energy(&s, gamma).unwrap() >= 0.0);
    }

    #[test]
    fn energies_order(seed in 0u64..1000, gamma in 1.0f64..3.0, c1 in 0.1f64..10.0) {
        let g = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(g, 2, &mut rng);
        let e = energies(&s, &params(gamma), c1).unwrap();
        prop_assert!(e.e >= e.e1 && e.d >= 0.0 && e.e1 >= 0.0);
    }

    #[test]
    fn interpolation_bound_holds_on_random_states(seed in 0u64..1000, gamma in 1.0f64..3.0) {
        let g = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(g, 2, &mut rng);
        for m in inequality_monitor(&s, &params(gamma), 10.0 / 3.0).unwrap() {
            if m.hard {
                prop_assert!(m.holds(), "{} lhs {} rhs {}", m.name, m.lhs, m.rhs);
            }
        }
    }
}

#[test]
fn l2_norm_helpers_agree() {
    let g = Grid::new(16, 1.0).unwrap();
    let f = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
    assert!((l2_sq(&f) - 0.5).abs() < 1e-14);
    assert!((lp_norm_scalar(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
}
