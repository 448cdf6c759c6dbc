use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::{OperatorMatrix, PositionBasis};
use crate::error::{invalid, Error, Result};
use crate::phasespace::Polynomial;

/// Default limit on the degree accepted by [`weyl_quantize`].
pub const DEFAULT_MAX_DEGREE: usize = 8;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weyl quantization of a one-degree-of-freedom polynomial `f(q, p)`.
///
/// Each monomial `q^a p^b` becomes the average over all orderings of `a`
/// position and `b` momentum factors.
pub fn weyl_quantize(f: &Polynomial, basis: PositionBasis, hbar: f64, max_degree: usize) -> Result<OperatorMatrix> {
    if f.nvars() != 2 {
        return Err(invalid("operator lattices carry a single degree of freedom; polynomial must be in (q, p)"));
    }
    let deg = f.degree();
    if deg > max_degree {
        return Err(Error::DegreeTooHigh { degree: deg, limit: max_degree });
    }
    let q = OperatorMatrix::position(basis, hbar)?;
    let p = OperatorMatrix::momentum(basis, hbar)?;
    let (qm, pm) = (q.matrix(), p.matrix());
    let d = basis.dim;
    // words[a][b] = sum of all words with a copies of q and b copies of p,
    // built from the first letter: W(a,b) = q W(a-1,b) + p W(a,b-1).
    let mut words: Vec<Vec<DMatrix<Complex64>>> = vec![vec![DMatrix::zeros(d, d); deg + 1]; deg + 1];
    for n in 0..=deg {
        for a in 0..=n {
            let b = n - a;
            words[a][b] = if n == 0 {
                DMatrix::identity(d, d)
            } else {
                let mut w = DMatrix::zeros(d, d);
                if a > 0 {
                    w += qm * &words[a - 1][b];
                }
                if b > 0 {
                    w += pm * &words[a][b - 1];
                }
                w
            };
        }
    }
    let mut out = DMatrix::zeros(d, d);
    for (e, c) in f.terms() {
        let (a, b) = (e[0] as usize, e[1] as usize);
        out += &words[a][b] * (c / binomial(a + b, a));
    }
    OperatorMatrix::new(out, basis, hbar)
}
