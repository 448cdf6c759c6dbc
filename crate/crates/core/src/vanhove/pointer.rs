use nalgebra::DMatrix;
use num_complex::Complex64;

use super::kernel::{Kernels, VanHoveState};
use crate::error::{Error, Result};

/// Per-chart, per-energy unitaries `U(w)` diagonalising the singular kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerTransform {
    /// Indexed `[chart * count + w]`.
    pub unitaries: Vec<DMatrix<Complex64>>,
    pub count: usize,
}

impl PointerTransform {
    pub fn unitary(&self, chart: usize, w: usize) -> &DMatrix<Complex64> {
        &self.unitaries[chart * self.count + w]
    }

    /// Largest entry of `U^dagger U - I` over all blocks.
    pub fn unitarity_defect(&self) -> f64 {
        self.unitaries
            .iter()
            .map(|u| {
                let d = u.adjoint() * u - DMatrix::identity(u.nrows(), u.ncols());
                d.iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Maps pointer-basis kernels back: `U rho U^dagger` and `U(w) rho U(w')^dagger`.
    pub fn reconstruct(&self, pointer: &VanHoveState) -> VanHoveState {
        VanHoveState::new_unchecked(self.conjugate(pointer.kernels(), false))
    }

    fn conjugate(&self, k: &Kernels, inverse: bool) -> Kernels {
        let mut out = k.clone();
        let (n, m) = (k.grid.count, k.m_dim);
        let block = |v: &[Complex64]| DMatrix::from_row_slice(m, m, v);
        let apply = |u: &DMatrix<Complex64>, x: DMatrix<Complex64>, v: &DMatrix<Complex64>| {
            if inverse {
                u.adjoint() * x * v
            } else {
                u * x * v.adjoint()
            }
        };
        for c in 0..k.n_charts() {
            for i in 0..n {
                let ui = self.unitary(c, i);
                let s = k.s_index(c, i, 0, 0);
                let b = apply(ui, block(&k.singular[s..s + m * m]), ui);
                write_block(&mut out.singular[s..s + m * m], &b);
                for j in 0..n {
                    let uj = self.unitary(c, j);
                    let r = k.r_index(c, i, j, 0, 0);
                    let b = apply(ui, block(&k.regular[r..r + m * m]), uj);
                    write_block(&mut out.regular[r..r + m * m], &b);
                }
            }
        }
        out
    }
}

fn write_block(dst: &mut [Complex64], b: &DMatrix<Complex64>) {
    let m = b.nrows();
    for a in 0..m {
        for c in 0..m {
            dst[a * m + c] = b[(a, c)];
        }
    }
}

/// Output of [`pointer_basis`].
#[derive(Debug, Clone)]
pub struct PointerBasis {
    pub transform: PointerTransform,
    /// State with diagonal singular part (eigenvalues in descending order).
    pub state: VanHoveState,
    /// `(chart, w)` blocks with (near-)degenerate eigenvalues, where the
    /// eigenvectors are not unique.
    pub degenerate: Vec<(usize, usize)>,
}

/// Tolerance on the Hermiticity of singular blocks.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Diagonalises the singular kernel energy by energy.
///
/// Eigenvalues are sorted descending; each eigenvector is rotated so that its
/// first component of largest magnitude is real and positive. The regular
/// kernel is transformed with `U(w)^dagger rho(w,w') U(w')`.
pub fn pointer_basis(rho: &VanHoveState) -> Result<PointerBasis> {
    let k = rho.kernels();
    let (n, m) = (k.grid.count, k.m_dim);
    let mut unitaries = Vec::with_capacity(k.n_charts() * n);
    let mut degenerate = Vec::new();
    for c in 0..k.n_charts() {
        for i in 0..n {
            let s = k.s_index(c, i, 0, 0);
            let block = DMatrix::from_row_slice(m, m, &k.singular[s..s + m * m]);
            let defect = (&block - block.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
            let herm = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = herm.symmetric_eigen();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
            let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
            for w in order.windows(2) {
                if (eig.eigenvalues[w[0]] - eig.eigenvalues[w[1]]).abs() <= 1e-10 * scale.max(1.0) {
                    degenerate.push((c, i));
                    break;
                }
            }
            let mut u = DMatrix::zeros(m, m);
            for (col, &src) in order.iter().enumerate() {
                let v = eig.eigenvectors.column(src);
                let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let lead = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied().unwrap_or(Complex64::new(1.0, 0.0));
                let phase = lead.conj() / lead.norm();
                for r in 0..m {
                    u[(r, col)] = v[r] * phase;
                }
            }
            unitaries.push(u);
        }
    }
    let transform = PointerTransform { unitaries, count: n };
    let mut out = transform.conjugate(k, true);
    // The singular blocks are diagonal by construction; remove rounding residue.
    for c in 0..k.n_charts() {
        for i in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let idx = out.s_index(c, i, a, b);
                    out.singular[idx] = if a == b { Complex64::new(out.singular[idx].re, 0.0) } else { Complex64::default() };
                }
            }
        }
    }
    Ok(PointerBasis { transform, state: VanHoveState::new_unchecked(out), degenerate })
}
