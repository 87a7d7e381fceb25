use pulse_cns::diagnostics::effective_flux;
use pulse_cns::pulse::{build_pulse, derived_initials, profile};
use pulse_cns::{Error, Grid, PulseParams};

#[test]
fn zero_amplitudes_give_equilibrium() {
    let g = Grid::new(16, 1.0).unwrap();
    let p = PulseParams { phi_amp: 0.0, v_amp: 0.0, ..Default::default() };
    let s = build_pulse(&p, g).unwrap();
    assert!(s.rho.values().iter().all(|&v| v == 1.0));
    assert!(s.u.components().iter().flat_map(|c| c.values()).all(|&v| v == 0.0));
    assert_eq!(s.t, 0.0);
}

#[test]
fn center_value_and_peak_of_a0() {
    let g = Grid::new(32, 1.0).unwrap();
    for (gamma, alpha) in [(1.0, 0.5), (1.4, 0.5), (2.0, 1.0)] {
        let p = PulseParams { gamma, alpha, ..Default::default() };
        let s = build_pulse(&p, g).unwrap();
        let c = g.n() / 2;
        let center = s.rho.values()[g.index(c, c, c)];
        let want = (1.0 + p.delta.powf(-alpha)).powf(1.0 / gamma);
        assert!((center / want - 1.0).abs() < 1e-12, "gamma {gamma}: {center} vs {want}");
        let d = derived_initials(&s, &p).unwrap();
        assert!((d.a0_linf - p.amplitude()).abs() < 1e-10 * p.amplitude());
    }
}

#[test]
fn profile_peaks_at_one() {
    let g = Grid::new(32, 1.0).unwrap();
    let phi = profile(g, 0.125);
    assert!((phi.max() - 1.0).abs() < 1e-15);
    assert!(phi.min() > 0.0);
}

#[test]
fn effective_flux_is_constant_without_swirl() {
    let g = Grid::new(32, 1.0).unwrap();
    let p = PulseParams { v_amp: 0.0, ..Default::default() };
    let s = build_pulse(&p, g).unwrap();
    let mean_phi = profile(g, p.delta).mean();
    let f = effective_flux(&s, &p);
    let shift = p.amplitude() * mean_phi;
    let worst = f.values().iter().map(|v| (v + shift).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst:e}");
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn initial_norms_scale_with_delta() {
    let g = Grid::new(64, 1.0).unwrap();
    let alpha = 1.0;
    let deltas = [0.125, 0.0625, 0.03125];
    let (mut l6, mut l2, mut curl) = (vec![], vec![], vec![]);
    for &delta in &deltas {
        let p = PulseParams { delta, alpha, ..Default::default() };
        let d = derived_initials(&build_pulse(&p, g).unwrap(), &p).unwrap();
        l6.push(d.a0_l6.powi(2));
        l2.push(d.a0_l2.powi(2));
        curl.push(d.curl_u0_l2.powi(2));
    }
    let close = |got: f64, want: f64| (got - want).abs() <= 0.15f64.max(0.1 * want.abs());
    let s6 = slope(&deltas, &l6);
    let s2 = slope(&deltas, &l2);
    let sc = slope(&deltas, &curl);
    assert!(close(s6, 1.0 - 2.0 * alpha), "L6 slope {s6}");
    assert!(close(s2, 3.0 - 2.0 * alpha), "L2 slope {s2}");
    assert!(close(sc, 3.0 - alpha), "curl slope {sc}");
}

#[test]
fn wide_pulse_is_rejected() {
    let g = Grid::new(16, 1.0).unwrap();
    let p = PulseParams { delta: 0.5, ..Default::default() };
    match build_pulse(&p, g) {
        Err(Error::PulseTooWide { tail, limit }) => assert!(tail > limit),
        other => panic!("expected PulseTooWide, got {other:?}"),
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let g = Grid::new(16, 1.0).unwrap();
    for p in [
        PulseParams { gamma: 0.5, ..Default::default() },
        PulseParams { mu: 0.0, ..Default::default() },
        PulseParams { delta: 0.0, ..Default::default() },
        PulseParams { alpha: f64::NAN, ..Default::default() },
    ] {
        assert!(matches!(build_pulse(&p, g), Err(Error::InvalidArgument(_))), "{p:?}");
    }
}
