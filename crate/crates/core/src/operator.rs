//! Dense operator algebra over truncated composite Hilbert spaces.
//!
//! The canonical ordering for the two-qubit system is
//! `qubit1 ⊗ qubit2 ⊗ cavity`, with qubit basis `(g, e)` and the Fock basis
//! ascending. Composite indices are lexicographic with the last slot fastest.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Tolerances of the density-matrix contract.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// Ordered subsystem dimensions of a composite space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    dims: Vec<usize>,
}

impl SpaceDescriptor {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::invalid("space needs at least one subsystem"));
        }
        if dims.contains(&0) {
            return Err(Error::invalid(format!("zero subsystem dimension in {dims:?}")));
        }
        Ok(Self { dims })
    }

    /// `[2, 2, n_max + 1]`: qubit 1, qubit 2, cavity.
    pub fn two_qubits_cavity(n_max: usize) -> Self {
        Self {
            dims: vec![2, 2, n_max + 1],
        }
    }

    /// `[2, n_max + 1]`: one qubit and the cavity.
    pub fn qubit_cavity(n_max: usize) -> Self {
        Self {
            dims: vec![2, n_max + 1],
        }
    }

    /// `[n_max + 1]`: the bare cavity.
    pub fn cavity(n_max: usize) -> Self {
        Self {
            dims: vec![n_max + 1],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_slots(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Split a composite index into per-slot indices.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in self.dims.iter().enumerate().rev() {
            out[slot] = index % d;
            index /= d;
        }
        out
    }

    /// Inverse of [`SpaceDescriptor::digits`].
    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&k, &d)| acc * d + k)
    }

    pub(crate) fn ensure_same(&self, other: &SpaceDescriptor) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join("x"))
    }
}

/// A complex square matrix acting on a [`SpaceDescriptor`].
#[derive(Clone, Debug)]
pub struct Operator {
    space: SpaceDescriptor,
    data: Mat<c64>,
}

impl Operator {
    pub fn from_mat(space: SpaceDescriptor, data: Mat<c64>) -> Result<Self> {
        let d = space.total_dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, space {space} needs {d}x{d}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { space, data })
    }

    pub fn zeros(space: SpaceDescriptor) -> Self {
        let d = space.total_dim();
        Self {
            space,
            data: Mat::zeros(d, d),
        }
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        let d = space.total_dim();
        Self {
            space,
            data: Mat::identity(d, d),
        }
    }

    /// Diagonal operator from real entries.
    pub fn diagonal(space: SpaceDescriptor, diag: &[f64]) -> Result<Self> {
        let d = space.total_dim();
        if diag.len() != d {
            return Err(Error::invalid(format!("{} diagonal entries for dimension {d}", diag.len())));
        }
        let data = Mat::from_fn(d, d, |i, j| if i == j { c64::new(diag[i], 0.0) } else { ZERO });
        Ok(Self { space, data })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.data[(row, col)]
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            data: self.data.adjoint().to_owned(),
        }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }

    pub fn scale(&self, s: c64) -> Operator {
        Operator {
            space: self.space.clone(),
            data: Mat::from_fn(self.dim(), self.dim(), |i, j| self.data[(i, j)] * s),
        }
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(self.data.as_ref())
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.space, other.space, "operators on different spaces");
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((self.data[(i, j)] - other.data[(i, j)]).norm());
            }
        }
        m
    }

    /// `max |A - A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(self.data.as_ref())
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        self * other - other * self
    }

    /// Kronecker product `self ⊗ other`; the result's dims are concatenated.
    pub fn kron(&self, other: &Operator) -> Operator {
        let mut dims = self.space.dims.clone();
        dims.extend_from_slice(&other.space.dims);
        let (na, nb) = (self.dim(), other.dim());
        let mut data = Mat::<c64>::zeros(na * nb, na * nb);
        for ja in 0..na {
            for ia in 0..na {
                let s = self.data[(ia, ja)];
                if s == ZERO {
                    continue;
                }
                for jb in 0..nb {
                    for ib in 0..nb {
                        data[(ia * nb + ib, ja * nb + jb)] = s * other.data[(ib, jb)];
                    }
                }
            }
        }
        Operator {
            space: SpaceDescriptor { dims },
            data,
        }
    }

    /// Sorted eigenvalues of a Hermitian operator.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(self.data.as_ref())
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn nonzeros(&self) -> Vec<(usize, usize, c64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for j in 0..d {
            for i in 0..d {
                let v = self.data[(i, j)];
                if v != ZERO {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// `Tr(self · rho)`.
    pub fn expect(&self, rho: &DensityMatrix) -> Result<c64> {
        self.space.ensure_same(&rho.space)?;
        Ok(trace_of_product(self.data.as_ref(), rho.data.as_ref()))
    }
}

/// `a` on `n_max + 1` Fock levels: `a[n-1, n] = √n`.
pub fn fock_annihilation(n_max: usize) -> Result<Operator> {
    if n_max < 1 {
        return Err(Error::invalid("Fock truncation n_max must be at least 1"));
    }
    let d = n_max + 1;
    let data = Mat::from_fn(d, d, |i, j| {
        if j == i + 1 {
            c64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    Ok(Operator {
        space: SpaceDescriptor::cavity(n_max),
        data,
    })
}

/// `a†a = diag(0, 1, …, n_max)`.
pub fn number_operator(n_max: usize) -> Result<Operator> {
    let a = fock_annihilation(n_max)?;
    Ok(&a.dagger() * &a)
}

/// `σ₋ = |g⟩⟨e|` in the `(g, e)` basis.
pub fn qubit_lowering() -> Operator {
    let mut data = Mat::<c64>::zeros(2, 2);
    data[(0, 1)] = ONE;
    Operator {
        space: SpaceDescriptor { dims: vec![2] },
        data,
    }
}

/// Kronecker product of the operators in list order.
pub fn tensor(ops: &[Operator]) -> Result<Operator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::invalid("tensor of an empty operator list"))?;
    Ok(rest.iter().fold(first.clone(), |acc, op| acc.kron(op)))
}

/// Place `op` on `slot` of `space`, identity elsewhere.
pub fn embed(op: &Operator, slot: usize, space: &SpaceDescriptor) -> Result<Operator> {
    let dims = space.dims();
    if slot >= dims.len() {
        return Err(Error::invalid(format!("slot {slot} out of range for {space}")));
    }
    if op.dim() != dims[slot] {
        return Err(Error::invalid(format!(
            "operator dimension {} does not match slot {slot} of {space}",
            op.dim()
        )));
    }
    let factors: Vec<Operator> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if k == slot {
                op.clone()
            } else {
                Operator::identity(SpaceDescriptor { dims: vec![d] })
            }
        })
        .collect();
    let mut out = tensor(&factors)?;
    // op may carry a multi-slot space of the same total size
    out.space = space.clone();
    Ok(out)
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        Operator {
            space: self.space.clone(),
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        Operator {
            space: self.space.clone(),
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators on different spaces");
        Operator {
            space: self.space.clone(),
            data: &self.data * &rhs.data,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(c64::new(rhs, 0.0))
    }
}

impl Mul<c64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: c64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(c64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Operator {
            type Output = Operator;
            fn $m(self, rhs: Operator) -> Operator {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Operator> for Operator {
            type Output = Operator;
            fn $m(self, rhs: &Operator) -> Operator {
                (&self).$m(rhs)
            }
        }
        impl $tr<Operator> for &Operator {
            type Output = Operator;
            fn $m(self, rhs: Operator) -> Operator {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        (&self) * rhs
    }
}

/// A Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: SpaceDescriptor,
    data: Mat<c64>,
}

impl DensityMatrix {
    /// Validates the density-matrix contract.
    pub fn new(space: SpaceDescriptor, data: Mat<c64>) -> Result<Self> {
        let op = Operator::from_mat(space, data)?;
        let herm = op.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (max |ρ-ρ†| = {herm:e})")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = DensityMatrix {
            space: op.space,
            data: op.data,
        };
        let min_eig = rho.min_eigenvalue()?;
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    /// Construct without validation; callers guarantee the contract.
    pub(crate) fn from_raw(space: SpaceDescriptor, data: Mat<c64>) -> Self {
        debug_assert_eq!(data.nrows(), space.total_dim());
        DensityMatrix { space, data }
    }

    /// `|ψ⟩⟨ψ|` from an (unnormalized) state vector.
    pub fn from_ket(space: SpaceDescriptor, ket: &[c64]) -> Result<Self> {
        let d = space.total_dim();
        if ket.len() != d {
            return Err(Error::invalid(format!("ket of length {} for dimension {d}", ket.len())));
        }
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::invalid("ket has zero or non-finite norm"));
        }
        let data = Mat::from_fn(d, d, |i, j| ket[i] * ket[j].conj() / norm2);
        Ok(DensityMatrix { space, data })
    }

    /// Pure basis state `|index⟩⟨index|`.
    pub fn basis(space: SpaceDescriptor, index: usize) -> Result<Self> {
        let d = space.total_dim();
        if index >= d {
            return Err(Error::invalid(format!("basis index {index} out of range {d}")));
        }
        let data = Mat::from_fn(d, d, |i, j| if i == index && j == index { ONE } else { ZERO });
        Ok(DensityMatrix { space, data })
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(space: SpaceDescriptor, probs: &[f64]) -> Result<Self> {
        let op = Operator::diagonal(space, probs)?;
        DensityMatrix::new(op.space, op.data)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.data[(row, col)]
    }

    pub fn to_operator(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(self.data.as_ref())
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(self.data.as_ref())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let op = self.to_operator().kron(&other.to_operator());
        DensityMatrix {
            space: op.space,
            data: op.data,
        }
    }

    /// `U ρ U†`; the caller supplies a unitary.
    pub fn transform(&self, unitary: &Operator) -> Result<DensityMatrix> {
        self.space.ensure_same(unitary.space())?;
        let data = unitary.matrix() * &self.data * unitary.matrix().adjoint();
        Ok(DensityMatrix {
            space: self.space.clone(),
            data,
        })
    }

    /// Reduced state on the slots in `keep` (kept in ascending slot order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::invalid("partial trace needs at least one kept slot"));
        }
        let n_slots = self.space.n_slots();
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&s| s >= n_slots) {
            return Err(Error::invalid(format!("slot {bad} out of range for {}", self.space)));
        }
        let traced: Vec<usize> = (0..n_slots).filter(|s| !kept.contains(s)).collect();
        let dims = self.space.dims();
        let kept_space = SpaceDescriptor {
            dims: kept.iter().map(|&s| dims[s]).collect(),
        };
        let traced_space = SpaceDescriptor {
            dims: traced.iter().map(|&s| dims[s]).collect(),
        };
        let d = self.dim();
        let split: Vec<(usize, usize)> = (0..d)
            .map(|i| {
                let digits = self.space.digits(i);
                let k: Vec<usize> = kept.iter().map(|&s| digits[s]).collect();
                let t: Vec<usize> = traced.iter().map(|&s| digits[s]).collect();
                let ti = if t.is_empty() { 0 } else { traced_space.index_of(&t) };
                (kept_space.index_of(&k), ti)
            })
            .collect();
        let dk = kept_space.total_dim();
        let mut out = Mat::<c64>::zeros(dk, dk);
        for j in 0..d {
            let (kj, tj) = split[j];
            for i in 0..d {
                let (ki, ti) = split[i];
                if ti == tj {
                    out[(ki, kj)] += self.data[(i, j)];
                }
            }
        }
        Ok(DensityMatrix {
            space: kept_space,
            data: out,
        })
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        let diff = &self.data - &other.data;
        let eig = hermitian_eigenvalues(diff.as_ref())?;
        Ok(0.5 * eig.iter().map(|x| x.abs()).sum::<f64>())
    }
}

pub(crate) fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

pub(crate) fn hermiticity_error(m: MatRef<'_, c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows().saturating_sub(1)) {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

pub(crate) fn hermitian_eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    // symmetrize so that roundoff-level asymmetry does not depend on the side read
    let n = m.nrows();
    let h = Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue decomposition failed: {e:?}")))
}

/// `Tr(A·B)` without forming the product.
pub(crate) fn trace_of_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let d = a.nrows();
    let mut acc = ZERO;
    for k in 0..d {
        for i in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}
