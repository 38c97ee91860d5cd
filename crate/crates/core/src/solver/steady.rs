use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Col, Mat};

use super::{csc_matvec, devectorize, Liouvillian};
use crate::error::{Error, Result};
use crate::operator::{hermiticity_error, DensityMatrix, PSD_TOL, ZERO};

/// Bound on `‖L vec(ρ)‖_∞` for an accepted steady state.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;
/// Population of the top three Fock levels above which a result is truncation-suspect.
pub const TAIL_TOL: f64 = 1e-6;
/// Asymmetry of the raw solution that separates roundoff from solver failure.
const ASYMMETRY_TOL: f64 = 1e-8;
/// Estimated condition number of the bordered system beyond which it is treated as singular.
const SINGULAR_CONDITION: f64 = 1e13;
/// Largest superoperator dimension for which the null space is counted densely.
const DENSE_NULLITY_LIMIT: usize = 1024;
const MAX_REFINEMENT_STEPS: usize = 3;

#[derive(Clone, Debug)]
pub struct SolverStats {
    pub method: &'static str,
    pub superop_dim: usize,
    pub nnz: usize,
    pub refinement_steps: usize,
    pub initial_residual: f64,
    pub condition_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖_∞` of the returned (Hermitized) state.
    pub residual: f64,
    /// `Σ P_n` over the three highest Fock levels of the last slot.
    pub tail_population: f64,
    pub truncation_suspect: bool,
    pub stats: SolverStats,
}

/// Bordered sparse system: the `ρ₀₀` equation is replaced by `Tr ρ = 1`.
fn bordered(l: &Liouvillian) -> SparseColMat<usize, c64> {
    let d = l.hilbert_dim();
    let m = l.superop();
    let (col_ptr, row_idx, val) = (m.col_ptr(), m.row_idx(), m.val());
    let mut triplets = Vec::with_capacity(val.len() + d);
    for j in 0..m.ncols() {
        for p in col_ptr[j]..col_ptr[j + 1] {
            if row_idx[p] != 0 {
                triplets.push(Triplet::new(row_idx[p], j, val[p]));
            }
        }
    }
    for i in 0..d {
        triplets.push(Triplet::new(0, i * d + i, c64::new(1.0, 0.0)));
    }
    SparseColMat::try_new_from_triplets(d * d, d * d, &triplets).expect("bordered system in range")
}

fn col_to_vec(c: &Col<c64>) -> Vec<c64> {
    c.iter().copied().collect()
}

fn inf_norm_vec(v: &[c64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Deterministic probe vector with O(1) entries.
fn probe_vector(n: usize) -> Col<c64> {
    Col::from_fn(n, |i| {
        let t = i as f64;
        c64::new((0.7 * t + 0.3).sin(), (1.3 * t + 0.1).cos())
    })
}

/// Count numerically-zero singular values of `L` when small enough to do densely.
fn dense_nullity(l: &Liouvillian) -> Option<usize> {
    let n = l.hilbert_dim() * l.hilbert_dim();
    if n > DENSE_NULLITY_LIMIT {
        return None;
    }
    let sv = l.to_dense().singular_values().ok()?;
    let top = sv.first().copied().unwrap_or(0.0);
    Some(sv.iter().filter(|&&s| s <= 1e-10 * top.max(1.0)).count())
}

fn degenerate(l: &Liouvillian) -> Error {
    Error::DegenerateSteadyState {
        nullity: dense_nullity(l),
    }
}

/// Population of the three highest Fock levels of the last slot.
pub(crate) fn tail_population(rho: &DensityMatrix) -> f64 {
    let dims = rho.space().dims();
    let cav = *dims.last().expect("non-empty space");
    let n_max = cav - 1;
    let first = n_max.saturating_sub(2);
    let mut tail = 0.0;
    for i in 0..rho.dim() {
        if i % cav >= first {
            tail += rho.get(i, i).re;
        }
    }
    tail
}

/// Trace-one null vector of `L` by a bordered sparse LU solve with iterative refinement.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateReport> {
    if !l.dissipative {
        return Err(Error::invalid("steady state needs at least one decay channel with positive rate"));
    }
    let d = l.hilbert_dim();
    let n = d * d;
    let a = bordered(l);
    let lu = a.sp_lu().map_err(|_| degenerate(l))?;

    let mut rhs = Col::<c64>::zeros(n);
    rhs[0] = c64::new(1.0, 0.0);
    let mut x = lu.solve(&rhs);
    if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(degenerate(l));
    }

    // a near-singular bordered system means more than one steady state
    let probe = probe_vector(n);
    let y = lu.solve(&probe);
    let y_norm = y.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let a_norm = {
        let mut rows = vec![0.0f64; n];
        let (cp, ri, v) = (a.col_ptr(), a.row_idx(), a.val());
        for j in 0..n {
            for p in cp[j]..cp[j + 1] {
                rows[ri[p]] += v[p].norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    };
    let condition_estimate = a_norm * y_norm / inf_norm_vec(&col_to_vec(&probe));
    if !condition_estimate.is_finite() || condition_estimate > SINGULAR_CONDITION {
        return Err(degenerate(l));
    }

    let mut ax = vec![ZERO; n];
    let bordered_residual = |x: &Col<c64>, ax: &mut Vec<c64>| -> (Col<c64>, f64) {
        csc_matvec(a.as_ref(), &col_to_vec(x), ax);
        let r = Col::from_fn(n, |i| rhs[i] - ax[i]);
        let norm = inf_norm_vec(&col_to_vec(&r));
        (r, norm)
    };
    let (mut r, initial_residual) = bordered_residual(&x, &mut ax);
    let mut refinement_steps = 0;
    loop {
        let dx = lu.solve(&r);
        x += &dx;
        refinement_steps += 1;
        let (r_new, norm) = bordered_residual(&x, &mut ax);
        r = r_new;
        if norm <= 0.1 * STEADY_RESIDUAL_TOL || refinement_steps >= MAX_REFINEMENT_STEPS {
            break;
        }
    }

    let raw = devectorize(&col_to_vec(&x), d);
    let asymmetry = hermiticity_error(raw.as_ref());
    if asymmetry > ASYMMETRY_TOL {
        return Err(Error::AsymmetricSolution { asymmetry });
    }
    let trace: f64 = (0..d).map(|i| raw[(i, i)].re).sum();
    let herm = Mat::from_fn(d, d, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * (0.5 / trace));
    let rho = DensityMatrix::from_raw(l.space().clone(), herm);

    let residual = {
        let v = super::vectorize(rho.matrix());
        let mut out = vec![ZERO; n];
        l.apply(&v, &mut out);
        inf_norm_vec(&out)
    };
    if !(residual <= STEADY_RESIDUAL_TOL) {
        return Err(Error::ConvergenceFailure { residual });
    }
    let min_eig = rho.min_eigenvalue()?;
    if min_eig < -PSD_TOL {
        return Err(Error::InvalidState(format!(
            "steady state has eigenvalue {min_eig:e} below -{PSD_TOL:e}"
        )));
    }
    let tail = tail_population(&rho);
    Ok(SteadyStateReport {
        rho,
        residual,
        tail_population: tail,
        truncation_suspect: tail > TAIL_TOL,
        stats: SolverStats {
            method: "sparse-lu-bordered",
            superop_dim: n,
            nnz: l.nnz(),
            refinement_steps,
            initial_residual,
            condition_estimate,
        },
    })
}
