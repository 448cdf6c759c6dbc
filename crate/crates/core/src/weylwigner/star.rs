use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::phasespace::{AxisBox, DerivativeScheme, PhaseFunction, Polynomial};

/// Highest expansion order used for grid-sampled inputs.
pub const MAX_GRID_ORDER: usize = 6;
/// Expansion order used when none is requested.
pub const DEFAULT_ORDER: usize = 6;

/// One term `coef * d^left f * d^right g` of a bidifferential operator.
pub type BidiffTerm = (f64, Vec<u32>, Vec<u32>);

/// Expansion of `P^n`, where `P = sum_j (d_qj (x) d_pj - d_pj (x) d_qj)`.
pub fn bidifferential_power(n_dof: usize, n: usize) -> Vec<BidiffTerm> {
    let dim = 2 * n_dof;
    let mut terms: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
    terms.insert((vec![0; dim], vec![0; dim]), 1.0);
    for _ in 0..n {
        let mut next: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
        for ((l, r), c) in &terms {
            for j in 0..n_dof {
                let (qj, pj) = (j, n_dof + j);
                let mut l1 = l.clone();
                let mut r1 = r.clone();
                l1[qj] += 1;
                r1[pj] += 1;
                *next.entry((l1, r1)).or_insert(0.0) += c;
                let mut l2 = l.clone();
                let mut r2 = r.clone();
                l2[pj] += 1;
                r2[qj] += 1;
                *next.entry((l2, r2)).or_insert(0.0) -= c;
            }
        }
        next.retain(|_, c| *c != 0.0);
        terms = next;
    }
    terms.into_iter().map(|((l, r), c)| (c, l, r)).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exact Moyal star product of polynomials (the series terminates).
pub fn star_product_poly(f: &Polynomial, g: &Polynomial, hbar: f64) -> Polynomial {
    let n_max = f.degree().min(g.degree());
    let mut out = Polynomial::zero(f.nvars());
    for n in 0..=n_max {
        let c = Complex64::new(0.0, hbar / 2.0).powu(n as u32) / factorial(n);
        for (coef, l, r) in bidifferential_power(f.n_dof(), n) {
            out = &out + &(&f.partial(&l) * &g.partial(&r)).scale(c * coef);
        }
    }
    out
}

/// Exact Moyal bracket of polynomials, `(2/hbar) sin((hbar/2) P)`.
pub fn moyal_bracket_poly(f: &Polynomial, g: &Polynomial, hbar: f64) -> Polynomial {
    let n_max = f.degree().min(g.degree());
    let mut out = Polynomial::zero(f.nvars());
    for n in (1..=n_max).step_by(2) {
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * (2.0 / hbar) * (hbar / 2.0).powi(n as i32) / factorial(n);
        for (coef, l, r) in bidifferential_power(f.n_dof(), n) {
            out = &out + &(&f.partial(&l) * &g.partial(&r)).scale(c * coef);
        }
    }
    out
}

/// Result of a star product or Moyal bracket on a grid.
#[derive(Debug, Clone)]
pub struct StarProduct {
    pub function: PhaseFunction,
    /// Expansion order actually used.
    pub order: usize,
    /// True when both inputs were polynomials and the result is exact.
    pub exact: bool,
    /// Region where grid derivatives are trusted (the central 80% box).
    pub trusted: AxisBox,
}

struct DerivativeCache<'a> {
    f: &'a PhaseFunction,
    cache: BTreeMap<Vec<u32>, PhaseFunction>,
}

impl<'a> DerivativeCache<'a> {
    fn new(f: &'a PhaseFunction) -> Self {
        Self { f, cache: BTreeMap::new() }
    }

    fn get(&mut self, orders: &[u32]) -> Result<PhaseFunction> {
        if let Some(v) = self.cache.get(orders) {
            return Ok(v.clone());
        }
        let v = self.f.partial(orders, DerivativeScheme::Spectral)?;
        self.cache.insert(orders.to_vec(), v.clone());
        Ok(v)
    }
}

fn series_on_grid(f: &PhaseFunction, g: &PhaseFunction, orders: &[(usize, Complex64)]) -> Result<PhaseFunction> {
    let n_dof = f.grid().ndim() / 2;
    let mut fd = DerivativeCache::new(f);
    let mut gd = DerivativeCache::new(g);
    let mut acc = vec![Complex64::new(0.0, 0.0); f.grid().len()];
    for &(n, c) in orders {
        for (coef, l, r) in bidifferential_power(n_dof, n) {
            let a = fd.get(&l)?;
            let b = gd.get(&r)?;
            let w = c * coef;
            for ((o, x), y) in acc.iter_mut().zip(a.values()).zip(b.values()) {
                *o += w * x * y;
            }
        }
    }
    PhaseFunction::from_values(f.grid().clone(), acc)
}

fn clamp_order(order: usize) -> usize {
    if order > MAX_GRID_ORDER {
        log::warn!("star expansion order {order} exceeds grid derivative accuracy, clamping to {MAX_GRID_ORDER}");
        MAX_GRID_ORDER
    } else {
        order
    }
}

fn check_inputs(f: &PhaseFunction, g: &PhaseFunction, hbar: f64) -> Result<()> {
    f.grid().check_same(g.grid())?;
    if !f.grid().ndim().is_multiple_of(2) {
        return Err(invalid("phase space must have an even number of axes"));
    }
    if !(hbar > 0.0) {
        return Err(invalid("hbar must be positive"));
    }
    Ok(())
}

/// Moyal star product `f * g = f exp((i hbar / 2) P) g`.
///
/// Polynomial inputs use the exact terminating series. Grid inputs use the
/// series truncated at `order` (clamped to [`MAX_GRID_ORDER`]) with spectral
/// derivatives on periodic axes and finite differences elsewhere.
pub fn star_product(f: &PhaseFunction, g: &PhaseFunction, order: usize, hbar: f64) -> Result<StarProduct> {
    check_inputs(f, g, hbar)?;
    let trusted = f.grid().bounds().interior(0.8);
    if let (Some(a), Some(b)) = (f.exact(), g.exact()) {
        let p = star_product_poly(a, b, hbar);
        let order = a.degree().min(b.degree());
        return Ok(StarProduct { function: PhaseFunction::from_polynomial(f.grid().clone(), p)?, order, exact: true, trusted });
    }
    let order = clamp_order(order);
    let coeffs: Vec<(usize, Complex64)> = (0..=order).map(|n| (n, Complex64::new(0.0, hbar / 2.0).powu(n as u32) / factorial(n))).collect();
    Ok(StarProduct { function: series_on_grid(f, g, &coeffs)?, order, exact: false, trusted })
}

/// Moyal bracket `(f * g - g * f) / (i hbar)`, computed directly from the
/// odd terms of the series.
pub fn moyal_bracket(f: &PhaseFunction, g: &PhaseFunction, order: usize, hbar: f64) -> Result<StarProduct> {
    check_inputs(f, g, hbar)?;
    let trusted = f.grid().bounds().interior(0.8);
    if let (Some(a), Some(b)) = (f.exact(), g.exact()) {
        let p = moyal_bracket_poly(a, b, hbar);
        let order = a.degree().min(b.degree());
        return Ok(StarProduct { function: PhaseFunction::from_polynomial(f.grid().clone(), p)?, order, exact: true, trusted });
    }
    let order = clamp_order(order);
    let coeffs: Vec<(usize, Complex64)> = (1..=order)
        .step_by(2)
        .map(|n| {
            let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            (n, Complex64::new(sign * (2.0 / hbar) * (hbar / 2.0).powi(n as i32) / factorial(n), 0.0))
        })
        .collect();
    Ok(StarProduct { function: series_on_grid(f, g, &coeffs)?, order, exact: false, trusted })
}
