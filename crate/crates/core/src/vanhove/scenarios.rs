//! Ready-made kernels: decaying regular parts with known envelopes, and
//! random kernels for cross-checks.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{Kernels, OmegaGrid, VanHoveObservable, VanHoveState};
use crate::error::{invalid, Result};
use crate::numeric::stream_rng;

/// Shape of the regular kernel along `nu = w - w'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-nu^2 / 2 sigma^2)`; envelope `exp(-sigma^2 t^2 / 2 hbar^2)`.
    Gaussian { sigma: f64 },
    /// `1 / (gamma^2 + nu^2)`; envelope `exp(-gamma |t| / hbar)`.
    Lorentzian { gamma: f64 },
}

impl Profile {
    pub fn kernel(&self, nu: f64) -> f64 {
        match *self {
            Profile::Gaussian { sigma } => (-nu * nu / (2.0 * sigma * sigma)).exp(),
            Profile::Lorentzian { gamma } => 1.0 / (gamma * gamma + nu * nu),
        }
    }

    /// Analytic `|R(t)| / |R(0)|`.
    pub fn envelope(&self, t: f64, hbar: f64) -> f64 {
        match *self {
            Profile::Gaussian { sigma } => (-sigma * sigma * t * t / (2.0 * hbar * hbar)).exp(),
            Profile::Lorentzian { gamma } => (-gamma * t.abs() / hbar).exp(),
        }
    }

    /// Analytic time at which the envelope reaches `threshold`.
    pub fn decoherence_time(&self, threshold: f64, hbar: f64) -> f64 {
        let l = (1.0 / threshold).ln();
        match *self {
            Profile::Gaussian { sigma } => hbar / sigma * (2.0 * l).sqrt(),
            Profile::Lorentzian { gamma } => hbar / gamma * l,
        }
    }

    fn width(&self) -> f64 {
        match *self {
            Profile::Gaussian { sigma } => sigma,
            Profile::Lorentzian { gamma } => gamma,
        }
    }
}

/// A state whose regular kernel is `amplitude * g(nu) h(wbar)` with `h` a
/// Gaussian centred in the grid, paired with the observable `O(w) = w`,
/// `O(w, w') = 1`. The regular contribution to `<O>(t)` is then the Fourier
/// transform of `g`, times a constant.
pub fn decoherence_scenario(profile: Profile, hbar: f64, grid: OmegaGrid, amplitude: f64) -> Result<(VanHoveState, VanHoveObservable)> {
    if !(profile.width() > 0.0) {
        return Err(invalid("profile width must be positive"));
    }
    let centre = 0.5 * grid.omega_max;
    let spread = grid.omega_max / 20.0;
    let h = |wbar: f64| (-(wbar - centre).powi(2) / (2.0 * spread * spread)).exp();
    let bump = |w: f64| (-(w - centre).powi(2) / (2.0 * spread * spread)).exp();
    let norm: f64 = grid.nodes().iter().zip(grid.weights()).map(|(w, wt)| bump(*w) * wt).sum();
    let state = Kernels::from_fns(
        grid,
        vec![0],
        1,
        hbar,
        |_, w, _, _| Complex64::new(bump(w) / norm, 0.0),
        |_, w, wp, _, _| Complex64::new(amplitude * profile.kernel(w - wp) * h(0.5 * (w + wp)), 0.0),
    )?;
    let obs = Kernels::from_fns(grid, vec![0], 1, hbar, |_, w, _, _| Complex64::new(w, 0.0), |_, _, _, _, _| Complex64::new(1.0, 0.0))?;
    Ok((VanHoveState::new(state)?, VanHoveObservable::new(obs)?))
}

fn random_kernels(grid: OmegaGrid, charts: Vec<usize>, m_dim: usize, hbar: f64, seed: u64, positive: bool) -> Result<Kernels> {
    let mut rng = stream_rng(seed, 0);
    let mut k = Kernels::zeros(grid, charts, m_dim, hbar)?;
    let (n, m) = (grid.count, m_dim);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    for c in 0..k.n_charts() {
        for i in 0..n {
            let x: Vec<Complex64> = (0..m * m).map(|_| draw(&mut rng)).collect();
            for a in 0..m {
                for b in 0..m {
                    let v = if positive {
                        (0..m).map(|l| x[a * m + l] * x[b * m + l].conj()).sum()
                    } else {
                        0.5 * (x[a * m + b] + x[b * m + a].conj())
                    };
                    let idx = k.s_index(c, i, a, b);
                    k.singular[idx] = v;
                }
            }
        }
        let raw: Vec<Complex64> = (0..n * n * m * m).map(|_| draw(&mut rng)).collect();
        let at = |i: usize, j: usize, a: usize, b: usize| raw[((i * n + j) * m + a) * m + b];
        for i in 0..n {
            for j in 0..n {
                for a in 0..m {
                    for b in 0..m {
                        let idx = k.r_index(c, i, j, a, b);
                        k.regular[idx] = 0.5 * (at(i, j, a, b) + at(j, i, b, a).conj());
                    }
                }
            }
        }
    }
    Ok(k)
}

/// Random valid state: positive singular blocks, Hermitian regular kernel,
/// unit total probability.
pub fn random_state(grid: OmegaGrid, charts: Vec<usize>, m_dim: usize, hbar: f64, seed: u64) -> Result<VanHoveState> {
    let mut k = random_kernels(grid, charts, m_dim, hbar, seed, true)?;
    let p = k.total_probability().re;
    k.singular.iter_mut().for_each(|z| *z /= p);
    k.regular.iter_mut().for_each(|z| *z /= p);
    VanHoveState::new(k)
}

/// Random self-adjoint observable.
pub fn random_observable(grid: OmegaGrid, charts: Vec<usize>, m_dim: usize, hbar: f64, seed: u64) -> Result<VanHoveObservable> {
    VanHoveObservable::new(random_kernels(grid, charts, m_dim, hbar, seed, false)?)
}
