use num_complex::Complex64;

use super::kernel::{Kernels, VanHoveState};
use crate::error::{invalid, Result};

/// Partial trace over charts and the `m` factor of a composite `(r, m)` index.
///
/// The multiplicity index must be ordered r-major (`index = r * m_dim + m`).
/// The result lives on a single chart (id 0) with multiplicity `r_dim`:
/// `rho(w)_{r r'} = sum_{chart, m} rho(w)_{(r m), (r' m)}`, and likewise
/// for the regular kernel.
pub fn m_trace(rho: &VanHoveState, r_dim: usize, m_dim: usize) -> Result<VanHoveState> {
    let k = rho.kernels();
    if r_dim == 0 || m_dim == 0 || r_dim * m_dim != k.m_dim {
        return Err(invalid(format!("factorization {r_dim} x {m_dim} does not match multiplicity {}", k.m_dim)));
    }
    let n = k.grid.count;
    let mut out = Kernels::zeros(k.grid, vec![0], r_dim, k.hbar)?;
    for c in 0..k.n_charts() {
        for i in 0..n {
            for r in 0..r_dim {
                for rp in 0..r_dim {
                    let mut s = Complex64::default();
                    for m in 0..m_dim {
                        s += k.singular_at(c, i, r * m_dim + m, rp * m_dim + m);
                    }
                    let idx = out.s_index(0, i, r, rp);
                    out.singular[idx] += s;
                    for j in 0..n {
                        let mut s = Complex64::default();
                        for m in 0..m_dim {
                            s += k.regular_at(c, i, j, r * m_dim + m, rp * m_dim + m);
                        }
                        let idx = out.r_index(0, i, j, r, rp);
                        out.regular[idx] += s;
                    }
                }
            }
        }
    }
    Ok(VanHoveState::new_unchecked(out))
}
