use proptest::prelude::*;
use pulse_cns::checkpoint::{decode, encode};
use pulse_cns::config::RunConfig;
use pulse_cns::envelope::{envelope_schedule, envelope_value, toy_model, toy_model_ode, Phase};
use pulse_cns::fit::{fit_decay, DecayModel};
use pulse_cns::spectral::{curl, div, l2_sq, laplacian};
use pulse_cns::verify::random_state;
use pulse_cns::{Grid, PulseParams, ScalarField, Spectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(g: Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state(g, 3, &mut rng).rho.map(|v| v - 1.0)
}

#[test]
fn toy_tends_to_reciprocal_gamma_t() {
    for (delta, alpha, gamma) in [(0.125, 0.5, 1.0), (2f64.powf(-15.0), 1.0, 1.4)] {
        let t = 1e6 * f64::powf(delta, alpha);
        let f = toy_model(delta, alpha, gamma, t);
        assert!((gamma * t * f - 1.0).abs() < 1e-4);
    }
}

#[test]
fn toy_ode_agrees_with_closed_form() {
    let times: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
    let ode = toy_model_ode(0.125, 0.5, 1.4, &times).unwrap();
    for (t, v) in times.iter().zip(&ode) {
        let exact = toy_model(0.125, 0.5, 1.4, *t);
        assert!((v / exact - 1.0).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn fit_examples() {
    let ts: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
    let pow: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 3.0 * t.powi(-2))).collect();
    let r = fit_decay(&pow, (0.25, 10.0), DecayModel::Power).unwrap();
    assert!((r.exponent + 2.0).abs() < 1e-10 && r.r_squared > 1.0 - 1e-12);

    let rec: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 1.0 / (0.1 + t))).collect();
    let r = fit_decay(&rec, (0.0, 10.0), DecayModel::Reciprocal).unwrap();
    assert!((r.intercept - 0.1).abs() < 1e-10 && (r.exponent - 1.0).abs() < 1e-10);

    let (delta, alpha, gamma) = (0.125, 0.5, 1.4);
    let toy: Vec<(f64, f64)> = ts.iter().map(|&t| (t, toy_model(delta, alpha, gamma, t))).collect();
    let r = fit_decay(&toy, (0.0, 10.0), DecayModel::Reciprocal).unwrap();
    assert!((r.intercept - f64::powf(delta, alpha)).abs() < 1e-8);
    assert!((r.exponent - gamma).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toy_is_decreasing_and_convex(
        e in 0.5f64..20.0, alpha in 0.1f64..1.5, gamma in 1.0f64..3.0, t in 0.0f64..10.0, h in 1e-3f64..1.0,
    ) {
        let delta = (-e).exp2();
        let f = |t| toy_model(delta, alpha, gamma, t);
        prop_assert!(f(t + h) < f(t));
        prop_assert!(f(t) + f(t + 2.0 * h) >= 2.0 * f(t + h) * (1.0 - 1e-12));
    }

    #[test]
    fn schedule_is_ordered(e in 16.0f64..30.0, alpha in 0.8f64..1.2, gamma in 1.0f64..2.0) {
        let delta = (-e / alpha).exp2();
        let s = envelope_schedule(delta, alpha, gamma, 0.1).unwrap();
        prop_assert!(s.in_regime);
        prop_assert!(s.t.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.t0 < s.t1 && s.t1 < s.t2);
        prop_assert!((s.t[s.intervals()] - s.t0).abs() <= 1e-12 * s.t0);
    }

    #[test]
    fn envelope_is_nonincreasing_within_intervals(e in 16.0f64..24.0, gamma in 1.0f64..2.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let s = envelope_schedule((-e).exp2(), 1.0, gamma, 0.1).unwrap();
        let j = 1 + ((u * s.intervals() as f64) as usize).min(s.intervals() - 1);
        let (a, b) = (s.t[j - 1], s.t[j]);
        let (lo, hi) = (a + (b - a) * u.min(v), a + (b - a) * u.max(v));
        let (x, y) = (envelope_value(&s, lo), envelope_value(&s, hi));
        prop_assert!(matches!(x.phase, Phase::Collapse(_)));
        prop_assert!(y.value <= x.value * (1.0 + 1e-12));
    }

    #[test]
    fn laplacian_is_homogeneous(seed in any::<u64>(), c in -5.0f64..5.0) {
        let g = Grid::new(8, 1.0).unwrap();
        let f = field(g, seed);
        let lhs = laplacian(&f.scale(c));
        let rhs = laplacian(&f).scale(c);
        let err = lhs.values().iter().zip(rhs.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10 * (1.0 + c.abs()) * 4e3);
    }

    #[test]
    fn parseval_holds(seed in any::<u64>()) {
        let g = Grid::new(8, 1.0).unwrap();
        let f = field(g, seed);
        let spec = Spectrum::of(&f);
        let total: f64 = spec.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.volume();
        prop_assert!((total - l2_sq(&f)).abs() <= 1e-12 * l2_sq(&f).max(1e-300));
    }

    #[test]
    fn div_curl_is_zero(seed in any::<u64>()) {
        let g = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(g, 3, &mut rng).u;
        let d = div(&curl(&u));
        prop_assert!(d.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn checkpoint_round_trips(seed in any::<u64>(), gamma in 1.0f64..3.0, mu in 0.01f64..2.0, lambda in 0.0f64..1.0) {
        let g = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(g, 1, &mut rng);
        let p = PulseParams { gamma, mu, lambda, ..Default::default() };
        let bytes = encode(&s, &p);
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back.state, &s);
        prop_assert_eq!((back.gamma, back.mu, back.lambda), (gamma, mu, lambda));
        prop_assert_eq!(encode(&back.state, &p), bytes);
    }

    #[test]
    fn config_round_trips(
        n in prop::sample::select(vec![8usize, 16, 32]),
        delta in 0.01f64..0.2, alpha in 0.1f64..1.5, gamma in 1.0f64..3.0,
        t_end in 0.0f64..2.0, every in 0usize..500,
    ) {
        let mut c = RunConfig::default();
        c.grid = Grid::new(n, 1.0).unwrap();
        c.pulse.delta = delta;
        c.pulse.alpha = alpha;
        c.pulse.gamma = gamma;
        c.solver.t_end = t_end;
        c.solver.diagnostics_every = every;
        let back = RunConfig::parse(&c.to_text()).unwrap();
        prop_assert_eq!(back, c);
    }
}
