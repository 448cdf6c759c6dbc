use num_complex::Complex64;

use super::scenarios::{decoherence_scenario, random_observable, random_state, Profile};
use super::*;
use crate::Error;

fn grid() -> OmegaGrid {
    OmegaGrid::new(20.0, 401).unwrap()
}

#[test]
fn singular_only_mean_values_are_constant() {
    let (rho, obs) = decoherence_scenario(Profile::Gaussian { sigma: 0.5 }, 1.0, grid(), 0.3).unwrap();
    let rho = weak_limit(&rho);
    let v0 = mean_value(&rho, &obs, 0.0).unwrap();
    for t in [10.0, 100.0] {
        assert_eq!(mean_value(&rho, &obs, t).unwrap(), v0);
    }
    assert!((v0.singular.re - 10.0).abs() < 1e-9);
}

#[test]
fn gaussian_envelope_matches_analytic_decay() {
    let sigma = 0.5;
    let profile = Profile::Gaussian { sigma };
    let (rho, obs) = decoherence_scenario(profile, 1.0, grid(), 0.3).unwrap();
    let pairing = Pairing::new(&rho, &obs).unwrap();
    let r0 = pairing.regular_unchecked(0.0).norm();
    let mut t = 0.0;
    while profile.envelope(t, 1.0) >= 1e-3 {
        let r = pairing.mean_value(t).unwrap().regular.norm() / r0;
        let e = profile.envelope(t, 1.0);
        assert!((r - e).abs() <= 0.02 * e, "t={t}: {r} vs {e}");
        t += 0.05;
    }
}

#[test]
fn unresolved_times_are_rejected() {
    let (rho, obs) = decoherence_scenario(Profile::Gaussian { sigma: 0.5 }, 1.0, grid(), 0.3).unwrap();
    let horizon = resolution_horizon(rho.kernels());
    assert!(mean_value(&rho, &obs, 0.99 * horizon).is_ok());
    assert!(matches!(mean_value(&rho, &obs, 1.01 * horizon), Err(Error::Unresolved { .. })));
}

#[test]
fn mean_value_matches_double_sum() {
    let g = OmegaGrid::new(3.0, 64).unwrap();
    let hbar = 0.7;
    let rho = random_state(g, vec![0, 1], 2, hbar, 11).unwrap();
    let obs = random_observable(g, vec![0, 1], 2, hbar, 12).unwrap();
    let (r, o) = (rho.kernels(), obs.kernels());
    let w = g.nodes();
    let h = g.spacing();
    let wt = |i: usize| if i == 0 || i == g.count - 1 { 0.5 * h } else { h };
    for t in [0.0, 0.4, -1.1] {
        let mut expect = Complex64::default();
        for c in 0..2 {
            for i in 0..g.count {
                for a in 0..2 {
                    for b in 0..2 {
                        expect += wt(i) * r.singular_at(c, i, a, b).conj() * o.singular_at(c, i, a, b);
                        for j in 0..g.count {
                            let phase = Complex64::from_polar(1.0, (w[i] - w[j]) * t / hbar);
                            expect += wt(i) * wt(j) * r.regular_at(c, i, j, a, b).conj() * phase * o.regular_at(c, i, j, a, b);
                        }
                    }
                }
            }
        }
        let got = mean_value(&rho, &obs, t).unwrap().total();
        assert!((got - expect).norm() < 1e-10 * expect.norm().max(1.0), "{got} vs {expect}");
    }
}

#[test]
fn weak_limit_is_reached_after_decay() {
    let sigma = 0.5;
    let amplitude = 0.3;
    let (rho, obs) = decoherence_scenario(Profile::Gaussian { sigma }, 1.0, grid(), amplitude).unwrap();
    let r0 = Pairing::new(&rho, &obs).unwrap().regular_unchecked(0.0).norm();
    let t = (2.0 * (r0 / 1e-3f64).ln()).sqrt() / sigma * 1.01;
    let full = mean_value(&rho, &obs, t).unwrap().total();
    let limit = mean_value(&weak_limit(&rho), &obs, t).unwrap().total();
    assert!((full - limit).norm() < 1e-3);
}

#[test]
fn decoherence_times_match_profiles() {
    let g = OmegaGrid::new(60.0, 1201).unwrap();
    let theta = 1e-2;
    for profile in [Profile::Gaussian { sigma: 0.5 }, Profile::Gaussian { sigma: 5.0 }, Profile::Lorentzian { gamma: 0.5 }] {
        let (rho, obs) = decoherence_scenario(profile, 1.0, g, 0.2).unwrap();
        let td = decoherence_time(&rho, &obs, theta).unwrap().time;
        let exact = profile.decoherence_time(theta, 1.0);
        assert!((td - exact).abs() < 0.05 * exact, "{profile:?}: {td} vs {exact}");
    }
}

#[test]
fn non_decaying_regular_part_is_reported() {
    let (rho, obs) = decoherence_scenario(Profile::Gaussian { sigma: 0.01 }, 1.0, grid(), 0.3).unwrap();
    assert!(matches!(decoherence_time(&rho, &obs, 1e-2), Err(Error::NoDecay { .. })));
    let (rho, obs) = decoherence_scenario(Profile::Gaussian { sigma: 0.5 }, 1.0, grid(), 0.0).unwrap();
    assert!(matches!(decoherence_time(&rho, &obs, 1e-2), Err(Error::NoRegularPart)));
}

fn max_diff(a: &VanHoveState, b: &VanHoveState) -> f64 {
    let (x, y) = (a.kernels(), b.kernels());
    x.singular.iter().zip(&y.singular).chain(x.regular.iter().zip(&y.regular)).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

#[test]
fn evolution_is_a_unitary_group() {
    let g = OmegaGrid::new(2.0, 32).unwrap();
    let rho = random_state(g, vec![0], 2, 1.0, 5).unwrap();
    let obs = random_observable(g, vec![0], 2, 1.0, 6).unwrap();
    assert!(max_diff(&evolve(&evolve(&rho, 0.8), -0.8), &rho) < 1e-14);
    assert!(max_diff(&evolve(&evolve(&rho, 0.3), 0.5), &evolve(&rho, 0.8)) < 1e-13);
    let norm = |s: &VanHoveState| s.kernels().regular.iter().map(|z| z.norm_sqr()).sum::<f64>();
    assert!((norm(&evolve(&rho, 0.7)) - norm(&rho)).abs() < 1e-12 * norm(&rho));
    let a = mean_value(&evolve(&rho, 0.6), &obs, 0.0).unwrap().total();
    let b = mean_value(&rho, &obs, 0.6).unwrap().total();
    assert!((a - b).norm() < 1e-12);
    assert_eq!(weak_limit(&evolve(&rho, 0.6)), weak_limit(&rho));
}

#[test]
fn pointer_basis_of_symmetric_block() {
    let g = OmegaGrid::new(1.0, 3).unwrap();
    let (a, b) = (0.3, 0.1);
    let k = Kernels::from_fns(g, vec![0], 2, 1.0, |_, _, m, mp| Complex64::new(if m == mp { a } else { b }, 0.0), |_, _, _, _, _| Complex64::default()).unwrap();
    let scale = k.total_probability().re;
    let mut k = k;
    k.singular.iter_mut().for_each(|z| *z /= scale);
    let rho = VanHoveState::new(k).unwrap();
    let pb = pointer_basis(&rho).unwrap();
    let u = pb.transform.unitary(0, 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let expect = [[s, s], [s, -s]];
    for r in 0..2 {
        for c in 0..2 {
            assert!((u[(r, c)] - Complex64::new(expect[r][c], 0.0)).norm() < 1e-12);
        }
    }
    let ks = pb.state.kernels();
    assert!((ks.singular_at(0, 1, 0, 0).re - (a + b) / scale).abs() < 1e-12);
    assert!((ks.singular_at(0, 1, 1, 1).re - (a - b) / scale).abs() < 1e-12);
    assert!(pb.degenerate.is_empty());
}

#[test]
fn pointer_basis_reconstructs_random_states() {
    let g = OmegaGrid::new(2.0, 64).unwrap();
    for m in 1..=4 {
        let rho = random_state(g, vec![0, 3], m, 1.0, 40 + m as u64).unwrap();
        let pb = pointer_basis(&rho).unwrap();
        assert!(pb.transform.unitarity_defect() < 1e-10);
        assert!(max_diff(&pb.transform.reconstruct(&pb.state), &rho) < 1e-10);
        let ks = pb.state.kernels();
        for i in 0..g.count {
            for a in 1..m {
                assert!(ks.singular_at(0, i, a - 1, a - 1).re >= ks.singular_at(0, i, a, a).re);
            }
        }
    }
}

#[test]
fn pointer_basis_rejects_non_hermitian_blocks() {
    let g = OmegaGrid::new(1.0, 3).unwrap();
    let k = Kernels::from_fns(g, vec![0], 2, 1.0, |_, _, m, mp| Complex64::new(0.5 + (m as f64) - 0.3 * (mp as f64), 0.0), |_, _, _, _, _| Complex64::default()).unwrap();
    let rho = VanHoveState::new_unchecked(k);
    assert!(matches!(pointer_basis(&rho), Err(Error::NotHermitian(_))));
}

#[test]
fn m_trace_matches_reduced_expectations() {
    let g = OmegaGrid::new(2.0, 16).unwrap();
    let (r_dim, m_dim) = (2, 3);
    let rho = random_state(g, vec![0, 1], r_dim * m_dim, 1.0, 9).unwrap();
    let reduced = m_trace(&rho, r_dim, m_dim).unwrap();
    // Oracle: an observable acting as A on r and identity on m has the same
    // mean value in the full and the reduced description.
    let a = random_observable(g, vec![0], r_dim, 1.0, 10).unwrap();
    let ak = a.kernels();
    let lifted = Kernels::from_fns(
        g,
        vec![0, 1],
        r_dim * m_dim,
        1.0,
        |_, w, x, y| if x % m_dim == y % m_dim { ak.singular_at(0, (w / g.spacing()).round() as usize, x / m_dim, y / m_dim) } else { Complex64::default() },
        |_, w, wp, x, y| {
            let (i, j) = ((w / g.spacing()).round() as usize, (wp / g.spacing()).round() as usize);
            if x % m_dim == y % m_dim {
                ak.regular_at(0, i, j, x / m_dim, y / m_dim)
            } else {
                Complex64::default()
            }
        },
    )
    .unwrap();
    let lifted = VanHoveObservable::new(lifted).unwrap();
    for t in [0.0, 0.5] {
        let full = mean_value(&rho, &lifted, t).unwrap().total();
        let red = mean_value(&reduced, &a, t).unwrap().total();
        assert!((full - red).norm() < 1e-12 * full.norm().max(1.0));
    }
    assert!((reduced.kernels().total_probability() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(max_diff(&m_trace(&weak_limit(&rho), r_dim, m_dim).unwrap(), &weak_limit(&reduced)) < 1e-15);
    assert!(m_trace(&rho, 4, 2).is_err());
}

#[test]
fn invalid_states_are_rejected() {
    let g = OmegaGrid::new(1.0, 5).unwrap();
    let k = Kernels::from_fns(g, vec![0], 1, 1.0, |_, _, _, _| Complex64::new(2.0, 0.0), |_, _, _, _, _| Complex64::default()).unwrap();
    assert!(matches!(VanHoveState::new(k), Err(Error::KernelInvariant(_))));
    let k = Kernels::from_fns(g, vec![0], 1, 1.0, |_, _, _, _| Complex64::new(1.0, 0.0), |_, w, wp, _, _| Complex64::new(0.0, w - wp + 0.1)).unwrap();
    assert!(matches!(VanHoveState::new(k), Err(Error::KernelInvariant(_))));
}

#[test]
fn kernel_json_round_trip() {
    let g = OmegaGrid::new(2.0, 8).unwrap();
    let rho = random_state(g, vec![0, 2], 2, 0.5, 1).unwrap();
    let back = io::kernels_from_json(&io::kernels_to_json(rho.kernels()).unwrap()).unwrap();
    assert_eq!(&back, rho.kernels());
}
