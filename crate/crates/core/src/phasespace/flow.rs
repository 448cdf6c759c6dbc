use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::function::PhaseFunction;
use super::grid::SymplecticForm;
use super::poly::Polynomial;
use crate::error::{invalid, Error, Result};

/// A Hamiltonian that can be evaluated and differentiated pointwise.
pub trait Hamiltonian: Sync {
    /// Phase-space dimension `2(N+1)`.
    fn dim(&self) -> usize;
    fn energy(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()>;
    /// True if the Hamiltonian splits as `T(p) + V(q)`.
    fn separable(&self) -> bool;

    fn vector_field(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut g = vec![0.0; x.len()];
        self.gradient(x, &mut g)?;
        SymplecticForm::canonical(x.len() / 2).vector_field(&g, out);
        Ok(())
    }
}

/// Polynomial compiled for fast real evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .map(|(e, c)| (c.re, e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32)).collect()))
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.iter().map(|&(i, k)| x[i].powi(k)).product::<f64>()).sum()
    }
}

/// Hamiltonian given by a real polynomial.
#[derive(Debug, Clone)]
pub struct PolynomialHamiltonian {
    value: CompiledPoly,
    grad: Vec<CompiledPoly>,
    separable: bool,
    dim: usize,
}

impl PolynomialHamiltonian {
    pub fn new(p: &Polynomial) -> Self {
        Self {
            value: CompiledPoly::new(p),
            grad: (0..p.nvars()).map(|k| CompiledPoly::new(&p.derivative(k))).collect(),
            separable: p.is_separable(),
            dim: p.nvars(),
        }
    }
}

impl Hamiltonian for PolynomialHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }
    fn energy(&self, x: &[f64]) -> Result<f64> {
        Ok(self.value.eval(x))
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()> {
        for (g, p) in grad.iter_mut().zip(&self.grad) {
            *g = p.eval(x);
        }
        Ok(())
    }
    fn separable(&self) -> bool {
        self.separable
    }
}

/// Hamiltonian sampled on a grid; gradients by finite differences and
/// multilinear interpolation. Leaving the grid is an error.
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    value: PhaseFunction,
    grad: Vec<PhaseFunction>,
    separable: bool,
}

impl GridHamiltonian {
    pub fn new(h: &PhaseFunction, separable: bool) -> Result<Self> {
        let grad = (0..h.grid().ndim()).map(|k| h.derivative(k)).collect::<Result<_>>()?;
        Ok(Self { value: h.clone().without_exact(), grad, separable })
    }
}

fn outside(x: &[f64]) -> Error {
    Error::ExitedDomain { time: f64::NAN, state: x.to_vec() }
}

impl Hamiltonian for GridHamiltonian {
    fn dim(&self) -> usize {
        self.value.grid().ndim()
    }
    fn energy(&self, x: &[f64]) -> Result<f64> {
        self.value.interpolate(x).map(|z| z.re).ok_or_else(|| outside(x))
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()> {
        for (g, f) in grad.iter_mut().zip(&self.grad) {
            *g = f.interpolate(x).ok_or_else(|| outside(x))?.re;
        }
        Ok(())
    }
    fn separable(&self) -> bool {
        self.separable
    }
}

/// Builds the natural pointwise Hamiltonian for a phase function.
pub fn hamiltonian_of(h: &PhaseFunction) -> Result<Box<dyn Hamiltonian>> {
    if !h.grid().ndim().is_multiple_of(2) {
        return Err(invalid("Hamiltonian needs an even-dimensional grid"));
    }
    Ok(match h.exact() {
        Some(p) => Box::new(PolynomialHamiltonian::new(p)),
        None => Box::new(GridHamiltonian::new(h, true)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrator {
    /// Dormand-Prince 5(4) with error control.
    Adaptive { tol: f64 },
    /// Fixed-step splitting: order 2 is Strang (kick-drift-kick), order 4 is
    /// the triple-jump composition of Strang steps.
    Symplectic { order: u8 },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Adaptive { tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    /// Largest `|H(t) - H(0)| / max(|H(0)|, 1e-300)`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs().max(1e-300)
    }
}

/// Integrates Hamilton's equations from `start` to `t_end >= 0`.
///
/// For the adaptive integrator `dt` is the initial and largest step; for
/// splitting integrators it is the fixed step (the last step is shortened to
/// land on `t_end`).
pub fn hamilton_flow<H: Hamiltonian + ?Sized>(h: &H, start: &[f64], t_end: f64, dt: f64, integrator: Integrator) -> Result<Trajectory> {
    hamilton_flow_sampled(h, start, t_end, dt, integrator, 1)
}

/// Like [`hamilton_flow`] but records only every `every`-th step (and the end point).
pub fn hamilton_flow_sampled<H: Hamiltonian + ?Sized>(
    h: &H,
    start: &[f64],
    t_end: f64,
    dt: f64,
    integrator: Integrator,
    every: usize,
) -> Result<Trajectory> {
    if start.len() != h.dim() {
        return Err(invalid(format!("start has {} coordinates, Hamiltonian expects {}", start.len(), h.dim())));
    }
    if !(t_end >= 0.0) || !(dt > 0.0) || !t_end.is_finite() {
        return Err(invalid("need t_end >= 0 and dt > 0"));
    }
    let every = every.max(1);
    let stamp = |e: Error, t: f64| match e {
        Error::ExitedDomain { state, .. } => Error::ExitedDomain { time: t, state },
        other => other,
    };
    let mut traj = Trajectory { times: vec![0.0], states: vec![start.to_vec()], energy: vec![h.energy(start).map_err(|e| stamp(e, 0.0))?] };
    if t_end == 0.0 {
        return Ok(traj);
    }
    let mut step_no = 0usize;
    match integrator {
        Integrator::Adaptive { tol } => {
            let f = |x: &[f64], out: &mut [f64]| h.vector_field(x, out);
            let mut last_t = 0.0;
            let mut pending: Option<(f64, Vec<f64>)> = None;
            let mut err = None;
            integrate_adaptive(f, start, t_end, tol, dt, dt, |t, y| {
                step_no += 1;
                last_t = t;
                if step_no.is_multiple_of(every) {
                    match h.energy(y) {
                        Ok(e) => {
                            traj.times.push(t);
                            traj.states.push(y.to_vec());
                            traj.energy.push(e);
                            pending = None;
                        }
                        Err(e) => {
                            err = Some(stamp(e, t));
                            return ControlFlow::Break(());
                        }
                    }
                } else {
                    pending = Some((t, y.to_vec()));
                }
                ControlFlow::Continue(())
            })
            .map_err(|e| stamp(e, last_t))?;
            if let Some(e) = err {
                return Err(e);
            }
            if let Some((t, y)) = pending {
                traj.energy.push(h.energy(&y)?);
                traj.times.push(t);
                traj.states.push(y);
            }
        }
        Integrator::Symplectic { order } => {
            if !h.separable() {
                return Err(invalid("splitting integrators need a separable Hamiltonian T(p) + V(q)"));
            }
            let weights: Vec<f64> = match order {
                2 => vec![1.0],
                4 => {
                    let c = 2f64.powf(1.0 / 3.0);
                    let w1 = 1.0 / (2.0 - c);
                    vec![w1, -c * w1, w1]
                }
                _ => return Err(invalid(format!("unsupported splitting order {order}"))),
            };
            let n_steps = (t_end / dt).ceil().max(1.0) as usize;
            let mut y = start.to_vec();
            let mut grad = vec![0.0; y.len()];
            for k in 0..n_steps {
                let t0 = k as f64 * dt;
                let step = (t_end - t0).min(dt);
                for w in &weights {
                    strang_step(h, &mut y, w * step, &mut grad).map_err(|e| stamp(e, t0))?;
                }
                let t = if k + 1 == n_steps { t_end } else { t0 + step };
                if (k + 1) % every == 0 || k + 1 == n_steps {
                    traj.times.push(t);
                    traj.energy.push(h.energy(&y).map_err(|e| stamp(e, t))?);
                    traj.states.push(y.clone());
                }
            }
        }
    }
    Ok(traj)
}

/// One kick-drift-kick step for a separable Hamiltonian.
pub fn strang_step<H: Hamiltonian + ?Sized>(h: &H, y: &mut [f64], dt: f64, grad: &mut [f64]) -> Result<()> {
    let n = y.len() / 2;
    h.gradient(y, grad)?;
    for j in 0..n {
        y[n + j] -= 0.5 * dt * grad[j];
    }
    h.gradient(y, grad)?;
    for j in 0..n {
        y[j] += dt * grad[n + j];
    }
    h.gradient(y, grad)?;
    for j in 0..n {
        y[n + j] -= 0.5 * dt * grad[j];
    }
    Ok(())
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince 5(4) step; returns the fifth-order solution and the
/// scaled error norm.
pub fn dp45_step<F>(f: &F, y: &[f64], h: f64, tol: f64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    f(y, &mut k[0])?;
    let stages: [&[f64]; 5] = [&[A21], &[A31, A32], &[A41, A42, A43], &[A51, A52, A53, A54], &[A61, A62, A63, A64, A65]];
    for (s, a) in stages.iter().enumerate() {
        for i in 0..n {
            tmp[i] = y[i] + h * a.iter().enumerate().map(|(j, aj)| aj * k[j][i]).sum::<f64>();
        }
        f(&tmp, &mut k[s + 1])?;
    }
    let y5: Vec<f64> = (0..n).map(|i| y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i])).collect();
    f(&y5, &mut k[6])?;
    let mut err: f64 = 0.0;
    for i in 0..n {
        let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
        err = err.max((e / sc).abs());
    }
    Ok((y5, err))
}

/// Adaptive integration of an autonomous system from `t = 0` to `t_end`
/// (either sign). `on_step` sees every accepted step and may stop early.
pub fn integrate_adaptive<F, S>(f: F, y0: &[f64], t_end: f64, tol: f64, h0: f64, h_max: f64, mut on_step: S) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
    S: FnMut(f64, &[f64]) -> ControlFlow<()>,
{
    let dir = t_end.signum();
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut h = h0.abs().min(h_max.abs()).min(t_end.abs());
    while dir * (t_end - t) > 0.0 {
        let remaining = (t_end - t).abs();
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        if step < 1e-14 * (1.0 + t.abs()) && !last {
            return Err(Error::StepUnderflow { time: t, step });
        }
        let (y_new, err) = dp45_step(&f, &y, dir * step, tol)?;
        if !err.is_finite() {
            h = 0.2 * step;
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + dir * step };
            y = y_new;
            if on_step(t, &y).is_break() {
                break;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (step * factor).min(h_max.abs());
        if err > 1.0 && h < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepUnderflow { time: t, step: h });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> PolynomialHamiltonian {
        let q = Polynomial::q(1, 0);
        let p = Polynomial::p(1, 0);
        PolynomialHamiltonian::new(&(&q.pow(2) + &p.pow(2)).scale(0.5))
    }

    #[test]
    fn free_particle_is_exact() {
        let h = PolynomialHamiltonian::new(&Polynomial::p(1, 0).pow(2).scale(0.5));
        let tr = hamilton_flow(&h, &[0.3, 1.5], 2.0, 0.1, Integrator::Symplectic { order: 2 }).unwrap();
        let end = tr.last();
        assert!((end[0] - 3.3).abs() < 1e-13 && (end[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let h = oscillator();
        let tp = 2.0 * std::f64::consts::PI;
        let tr = hamilton_flow(&h, &[1.0, 0.0], tp, 1e-3, Integrator::Symplectic { order: 4 }).unwrap();
        let end = tr.last();
        assert!((end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8, "{end:?}");
        let tr = hamilton_flow(&h, &[1.0, 0.0], tp, 0.1, Integrator::Adaptive { tol: 1e-11 }).unwrap();
        let end = tr.last();
        assert!((end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8, "{end:?}");
    }

    #[test]
    fn non_separable_splitting_is_rejected() {
        let h = PolynomialHamiltonian::new(&(&Polynomial::q(1, 0) * &Polynomial::p(1, 0)));
        assert!(hamilton_flow(&h, &[1.0, 0.0], 1.0, 0.1, Integrator::Symplectic { order: 2 }).is_err());
    }

    #[test]
    fn leaving_a_grid_reports_the_exit_time() {
        use crate::phasespace::{Axis, PhaseGrid};
        let g = PhaseGrid::new(vec![Axis::new(-1.0, 1.0, 21), Axis::new(-2.0, 2.0, 21)]).unwrap();
        let hf = PhaseFunction::from_real_fn(g, |x| 0.5 * x[1] * x[1]);
        let h = hamiltonian_of(&hf).unwrap();
        match hamilton_flow(h.as_ref(), &[0.0, 1.0], 5.0, 0.01, Integrator::Symplectic { order: 2 }) {
            Err(Error::ExitedDomain { time, .. }) => assert!((time - 1.0).abs() < 0.02, "{time}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
