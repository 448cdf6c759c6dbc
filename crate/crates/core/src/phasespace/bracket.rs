use super::function::PhaseFunction;
use super::poly::Polynomial;
use crate::error::{invalid, Result};

/// Exact Poisson bracket `{f, g} = sum_j (df/dq_j dg/dp_j - df/dp_j dg/dq_j)`.
pub fn poisson_bracket_poly(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let n = f.n_dof();
    let mut out = Polynomial::zero(f.nvars());
    for j in 0..n {
        out = &out + &(&f.derivative(j) * &g.derivative(n + j));
        out = &out - &(&f.derivative(n + j) * &g.derivative(j));
    }
    out
}

/// Poisson bracket of two phase functions on a shared grid.
///
/// Exact when both carry a polynomial form; otherwise second-order finite
/// differences (one-sided at open edges, wrapped on periodic axes).
pub fn poisson_bracket(f: &PhaseFunction, g: &PhaseFunction) -> Result<PhaseFunction> {
    f.grid().check_same(g.grid())?;
    let d = f.grid().ndim();
    if !d.is_multiple_of(2) {
        return Err(invalid("phase space must have an even number of axes"));
    }
    if let (Some(a), Some(b)) = (f.exact(), g.exact()) {
        return PhaseFunction::from_polynomial(f.grid().clone(), poisson_bracket_poly(a, b));
    }
    let n = d / 2;
    let mut acc: Option<PhaseFunction> = None;
    for j in 0..n {
        let term = f.derivative(j)?.mul(&g.derivative(n + j)?)?.sub(&f.derivative(n + j)?.mul(&g.derivative(j)?)?)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.expect("at least one degree of freedom").without_exact())
}
