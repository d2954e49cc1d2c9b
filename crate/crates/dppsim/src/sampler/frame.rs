//! Orthonormal frame bookkeeping for sequential projection sampling.
//!
//! Each drawn point contributes one unit vector (the normalized residual of
//! the eigenfunction vector at that point against the span of its
//! predecessors). Eigenfunction vectors are radially localized, so the frame
//! vectors are stored sparsely: sorted coordinate indices plus values.
//! Orthogonalization runs through a dense scratch accumulator, which makes
//! a full two-pass modified Gram-Schmidt cost O(Σ nnz(e_k)) per point with
//! no merge allocations.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Residual norm below which a new direction is considered numerically
/// dependent on the frame and the draw is abandoned.
const DEPENDENT_TOL: f64 = 1e-12;

/// A sparse complex vector with strictly increasing coordinate indices.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseVec {
    pub pos: Vec<u32>,
    pub val: Vec<Complex64>,
}

impl SparseVec {
    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.pos.len()
    }
}

/// Dense scratch accumulator with touched-index tracking.
#[derive(Debug, Clone)]
struct Accumulator {
    val: Vec<Complex64>,
    touched: Vec<u32>,
    active: Vec<bool>,
}

impl Accumulator {
    fn new(dim: usize) -> Self {
        Accumulator {
            val: vec![Complex64::ZERO; dim],
            touched: Vec::new(),
            active: vec![false; dim],
        }
    }

    fn clear(&mut self) {
        for &p in &self.touched {
            self.val[p as usize] = Complex64::ZERO;
            self.active[p as usize] = false;
        }
        self.touched.clear();
    }

    #[inline]
    fn add(&mut self, pos: u32, v: Complex64) {
        let i = pos as usize;
        if !self.active[i] {
            self.active[i] = true;
            self.touched.push(pos);
        }
        self.val[i] += v;
    }

    fn norm_sq(&self) -> f64 {
        self.touched
            .iter()
            .map(|&p| self.val[p as usize].norm_sqr())
            .sum()
    }

    /// Extracts the touched entries with `|v| > drop_tol` as a sorted
    /// sparse vector scaled by `scale`.
    fn gather(&mut self, drop_tol: f64, scale: f64) -> SparseVec {
        self.touched.sort_unstable();
        let mut out = SparseVec::default();
        out.pos.reserve(self.touched.len());
        out.val.reserve(self.touched.len());
        for &p in &self.touched {
            let v = self.val[p as usize];
            if v.norm() > drop_tol {
                out.pos.push(p);
                out.val.push(v * scale);
            }
        }
        out
    }
}

/// The orthonormal vectors produced by a (possibly partial) projection draw.
///
/// Vector `k` lives in the coordinate space of the active index set (one
/// coordinate per active index, in increasing index order). The conditional
/// density after `k` accepted points is the squared norm of the
/// eigenfunction vector minus its squared projection onto the first `k`
/// frame vectors, divided by the number of points still to come.
#[derive(Debug, Clone)]
pub struct ProjectionFrame {
    dim: usize,
    drop_tol: f64,
    vectors: Vec<SparseVec>,
    scratch: Accumulator,
}

impl ProjectionFrame {
    pub(crate) fn new(dim: usize, drop_tol: f64) -> Self {
        ProjectionFrame {
            dim,
            drop_tol,
            vectors: Vec::new(),
            scratch: Accumulator::new(dim),
        }
    }

    /// Number of vectors accumulated so far.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Dimension of the ambient coordinate space (the active set size).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `⟨phi, e_k⟩` for a dense coefficient vector `phi`.
    pub fn coefficient(&self, k: usize, phi: &[Complex64]) -> Complex64 {
        debug_assert_eq!(phi.len(), self.dim);
        let e = &self.vectors[k];
        let mut acc = Complex64::ZERO;
        for (&p, &v) in e.pos.iter().zip(&e.val) {
            acc += phi[p as usize] * v.conj();
        }
        acc
    }

    /// Largest deviation of the Gram matrix from the identity. Diagnostic;
    /// O(len² · nnz).
    pub fn gram_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.vectors.len() {
            for b in a..self.vectors.len() {
                let mut acc = Complex64::ZERO;
                let (ea, eb) = (&self.vectors[a], &self.vectors[b]);
                let (mut i, mut j) = (0, 0);
                while i < ea.pos.len() && j < eb.pos.len() {
                    match ea.pos[i].cmp(&eb.pos[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            acc += ea.val[i] * eb.val[j].conj();
                            i += 1;
                            j += 1;
                        }
                    }
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Orthogonalizes `phi` against the current frame, appends the
    /// normalized residual, and returns it by reference.
    ///
    /// Runs modified Gram-Schmidt twice; the second pass scrubs the
    /// first-order cancellation error so the Gram defect stays at the
    /// rounding level even after thousands of vectors.
    pub(crate) fn orthogonalize_and_push(&mut self, phi: &SparseVec) -> Result<&SparseVec> {
        if phi.pos.is_empty() {
            return Err(Error::Degenerate(
                "empty eigenfunction vector passed to the frame".into(),
            ));
        }
        let acc = &mut self.scratch;
        acc.clear();
        for (&p, &v) in phi.pos.iter().zip(&phi.val) {
            acc.add(p, v);
        }
        // Support interval of the accumulator; a frame vector whose support
        // lies entirely outside it has an exactly zero inner product with
        // the residual and can be skipped. Subtraction widens the interval.
        let mut cur_lo = phi.pos[0];
        let mut cur_hi = *phi.pos.last().unwrap();
        for _pass in 0..2 {
            for e in &self.vectors {
                let first = e.pos[0];
                let last = *e.pos.last().unwrap();
                if last < cur_lo || first > cur_hi {
                    continue;
                }
                let mut c = Complex64::ZERO;
                for (&p, &v) in e.pos.iter().zip(&e.val) {
                    c += acc.val[p as usize] * v.conj();
                }
                if c == Complex64::ZERO {
                    continue;
                }
                for (&p, &v) in e.pos.iter().zip(&e.val) {
                    acc.add(p, -c * v);
                }
                cur_lo = cur_lo.min(first);
                cur_hi = cur_hi.max(last);
            }
        }
        let norm = acc.norm_sq().sqrt();
        if !(norm > DEPENDENT_TOL) {
            return Err(Error::Degenerate(format!(
                "residual norm {norm:.3e} after orthogonalizing against {} vectors",
                self.vectors.len()
            )));
        }
        // Threshold in raw units so the drop tolerance applies to the
        // normalized vector.
        let e = acc.gather(self.drop_tol * norm, 1.0 / norm);
        if e.pos.is_empty() {
            return Err(Error::Degenerate(format!(
                "residual of norm {norm:.3e} left no entries above the drop tolerance"
            )));
        }
        self.vectors.push(e);
        Ok(self.vectors.last().unwrap())
    }
}
