//! Liouvillian superoperator, steady-state solver and the time-evolution
//! oracle used to cross-check it.
//!
//! Vectorization is column stacking: `vec(ρ)[k·D + i] = ρ[i, k]`, so that
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

mod evolve;
mod steady;

pub use evolve::{time_evolve, time_evolve_with_stats, EvolveStats};
pub use steady::{steady_state, SolverStats, SteadyStateReport, STEADY_RESIDUAL_TOL, TAIL_TOL};

use faer::sparse::{SparseColMat, SparseColMatRef, Triplet};
use faer::{c64, Mat, MatRef};

use crate::model::LindbladModel;
use crate::operator::{SpaceDescriptor, ZERO};

/// Sparse generator `L` of `d vec(ρ)/dt = L vec(ρ)`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    space: SpaceDescriptor,
    hilbert_dim: usize,
    superop: SparseColMat<usize, c64>,
    pub(crate) dissipative: bool,
}

impl Liouvillian {
    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    /// Hilbert-space dimension `D`; the superoperator is `D² × D²`.
    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn superop(&self) -> SparseColMatRef<'_, usize, c64> {
        self.superop.as_ref()
    }

    pub fn nnz(&self) -> usize {
        self.superop.val().len()
    }

    /// `out = L x`.
    pub fn apply(&self, x: &[c64], out: &mut [c64]) {
        csc_matvec(self.superop.as_ref(), x, out);
    }

    /// `devec(L vec(ρ))`.
    pub fn apply_to(&self, rho: MatRef<'_, c64>) -> Mat<c64> {
        let x = vectorize(rho);
        let mut y = vec![ZERO; x.len()];
        self.apply(&x, &mut y);
        devectorize(&y, self.hilbert_dim)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        self.superop.to_dense()
    }

    /// Maximum absolute row sum; bounds the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        let n = self.superop.nrows();
        let mut rows = vec![0.0f64; n];
        let m = self.superop.as_ref();
        let (col_ptr, row_idx, val) = (m.col_ptr(), m.row_idx(), m.val());
        for j in 0..m.ncols() {
            for p in col_ptr[j]..col_ptr[j + 1] {
                rows[row_idx[p]] += val[p].norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// Effective non-Hermitian Hamiltonian `H − i Σ rate·c†c`.
fn effective_hamiltonian(model: &LindbladModel) -> Mat<c64> {
    let mut heff = model.hamiltonian().matrix().to_owned();
    for ch in model.channels() {
        if ch.rate == 0.0 {
            continue;
        }
        let c = ch.operator.matrix();
        let cdc = c.adjoint() * c;
        let s = c64::new(0.0, -ch.rate);
        heff += Mat::from_fn(cdc.nrows(), cdc.ncols(), |i, j| cdc[(i, j)] * s);
    }
    heff
}

fn nonzeros(m: MatRef<'_, c64>) -> Vec<(usize, usize, c64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// `L = −i(I⊗H − Hᵀ⊗I) + Σ rate·(2 c̄⊗c − I⊗c†c − (c†c)ᵀ⊗I)`, assembled sparsely.
pub fn build_liouvillian(model: &LindbladModel) -> Liouvillian {
    let d = model.space().total_dim();
    let heff = effective_hamiltonian(model);
    let heff_nz = nonzeros(heff.as_ref());
    let minus_i = c64::new(0.0, -1.0);
    let plus_i = c64::new(0.0, 1.0);

    let mut triplets: Vec<Triplet<usize, usize, c64>> = Vec::new();
    // −i Heff ρ  →  −i (I ⊗ Heff)
    for &(i, j, v) in &heff_nz {
        for k in 0..d {
            triplets.push(Triplet::new(k * d + i, k * d + j, minus_i * v));
        }
    }
    // +i ρ Heff†  →  +i (conj(Heff) ⊗ I)
    for &(k, l, v) in &heff_nz {
        for i in 0..d {
            triplets.push(Triplet::new(k * d + i, l * d + i, plus_i * v.conj()));
        }
    }
    // 2·rate·c ρ c†  →  2·rate (c̄ ⊗ c)
    for ch in model.channels() {
        if ch.rate == 0.0 {
            continue;
        }
        let c_nz = nonzeros(ch.operator.matrix());
        for &(k, l, u) in &c_nz {
            for &(i, j, v) in &c_nz {
                triplets.push(Triplet::new(k * d + i, l * d + j, u.conj() * v * (2.0 * ch.rate)));
            }
        }
    }
    let superop = SparseColMat::try_new_from_triplets(d * d, d * d, &triplets)
        .expect("Liouvillian triplets are in range");
    Liouvillian {
        space: model.space().clone(),
        hilbert_dim: d,
        superop,
        dissipative: model.is_dissipative(),
    }
}

/// Dense reference assembly by explicit Kronecker products.
pub fn build_liouvillian_dense(model: &LindbladModel) -> Mat<c64> {
    let d = model.space().total_dim();
    let id = Mat::<c64>::identity(d, d);
    let h = model.hamiltonian().matrix();
    let minus_i = c64::new(0.0, -1.0);
    let mut l = scaled(&(kron(id.as_ref(), h) - kron(h.transpose(), id.as_ref())), minus_i);
    for ch in model.channels() {
        let c = ch.operator.matrix();
        let cdc = c.adjoint() * c;
        let c_bar = Mat::from_fn(d, d, |i, j| c[(i, j)].conj());
        let jump = kron(c_bar.as_ref(), c);
        let term = scaled(&jump, c64::new(2.0, 0.0)) - kron(id.as_ref(), cdc.as_ref()) - kron(cdc.transpose(), id.as_ref());
        l += scaled(&term, c64::new(ch.rate, 0.0));
    }
    l
}

fn scaled(m: &Mat<c64>, s: c64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let (na, nb) = (a.nrows(), b.nrows());
    Mat::from_fn(na * nb, na * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)])
}

/// Column-stacking vectorization.
pub fn vectorize(m: MatRef<'_, c64>) -> Vec<c64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vectorize`] for a `d × d` matrix.
pub fn devectorize(v: &[c64], d: usize) -> Mat<c64> {
    assert_eq!(v.len(), d * d, "vector length is not d²");
    Mat::from_fn(d, d, |i, j| v[j * d + i])
}

pub(crate) fn csc_matvec(m: SparseColMatRef<'_, usize, c64>, x: &[c64], out: &mut [c64]) {
    assert_eq!(x.len(), m.ncols());
    assert_eq!(out.len(), m.nrows());
    out.fill(ZERO);
    let (col_ptr, row_idx, val) = (m.col_ptr(), m.row_idx(), m.val());
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        for p in col_ptr[j]..col_ptr[j + 1] {
            out[row_idx[p]] += val[p] * xj;
        }
    }
}
