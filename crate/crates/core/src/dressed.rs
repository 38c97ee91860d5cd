//! Dressed-state structure of the undriven out-phase system at resonance.
//!
//! In the collective basis `|±⟩ = (|eg⟩ ± |ge⟩)/√2` the out-phase coupling
//! `g(a†σ₋¹ − a†σ₋² + h.c.)` becomes `√2 g (a†D₋ + aD₋†)` with
//! `D_± = (σ₋¹ ± σ₋²)/√2`: the symmetric state `|+⟩` never exchanges photons
//! with the cavity. Each excitation manifold `n` is spanned by
//! `|gg,n⟩, |−,n−1⟩, |ee,n−2⟩, |+,n−1⟩`; all eigen-structure here is computed
//! numerically from the assembled Hamiltonian and compared with the closed
//! form `E = ±√(4n−2) g`.

use std::f64::consts::SQRT_2;
use std::fmt;

use faer::{c64, Mat, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_two_qubit_model, interaction_hamiltonian, ModelParams, QUBIT1_SLOT, QUBIT2_SLOT};
use crate::operator::{qubit_lowering, embed, Operator, SpaceDescriptor, ZERO};

const SPECTRUM_TOL: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-12;

/// Two-qubit collective state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Collective {
    GG,
    Plus,
    Minus,
    EE,
}

impl Collective {
    /// Amplitudes over the bare qubit pairs `(gg, ge, eg, ee)`.
    fn amplitudes(self) -> [f64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Collective::GG => [1.0, 0.0, 0.0, 0.0],
            Collective::Plus => [0.0, h, h, 0.0],
            Collective::Minus => [0.0, -h, h, 0.0],
            Collective::EE => [0.0, 0.0, 0.0, 1.0],
        }
    }
}

impl fmt::Display for Collective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Collective::GG => "gg",
            Collective::Plus => "+",
            Collective::Minus => "-",
            Collective::EE => "ee",
        })
    }
}

/// `|q, n⟩`: a collective qubit state with `n` cavity photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisState {
    pub qubits: Collective,
    pub photons: usize,
}

impl BasisState {
    pub fn new(qubits: Collective, photons: usize) -> Self {
        BasisState { qubits, photons }
    }

    /// Ket on `[2, 2, n_max + 1]`.
    pub fn ket(&self, n_max: usize) -> Result<Vec<c64>> {
        if self.photons > n_max {
            return Err(Error::invalid(format!("{self} lies above n_max = {n_max}")));
        }
        let space = SpaceDescriptor::two_qubits_cavity(n_max);
        let mut ket = vec![ZERO; space.total_dim()];
        for (pair, &amp) in self.qubits.amplitudes().iter().enumerate() {
            if amp != 0.0 {
                ket[space.index_of(&[pair / 2, pair % 2, self.photons])] = c64::new(amp, 0.0);
            }
        }
        Ok(ket)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}>", self.qubits, self.photons)
    }
}

/// `D_± = (σ₋¹ ± σ₋²)/√2` on `[2, 2, n_max + 1]`.
pub fn collective_lowering(n_max: usize) -> Result<(Operator, Operator)> {
    let space = SpaceDescriptor::two_qubits_cavity(n_max);
    let s1 = embed(&qubit_lowering(), QUBIT1_SLOT, &space)?;
    let s2 = embed(&qubit_lowering(), QUBIT2_SLOT, &space)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(((&s1 + &s2) * h, (&s1 - &s2) * h))
}

fn matrix_element(op: &Operator, bra: &[c64], ket: &[c64]) -> c64 {
    let m = op.matrix();
    let mut acc = ZERO;
    for (i, b) in bra.iter().enumerate() {
        if *b == ZERO {
            continue;
        }
        for (j, k) in ket.iter().enumerate() {
            if *k != ZERO {
                acc += b.conj() * m[(i, j)] * k;
            }
        }
    }
    acc
}

/// Manifold eigenvalues in units of `g`, ascending.
pub fn closed_form_eigenvalues(n: usize) -> Vec<f64> {
    let e = ((4 * n) as f64 - 2.0).sqrt();
    if n == 1 {
        vec![-e, 0.0, e]
    } else {
        vec![-e, 0.0, 0.0, e]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldSpectrum {
    pub n: usize,
    pub g: f64,
    pub basis: Vec<BasisState>,
    /// Ascending, in units of `g`.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k][b]` is the coefficient of `basis[b]` in eigenvector `k`.
    #[serde(serialize_with = "serialize_vectors")]
    pub eigenvectors: Vec<Vec<c64>>,
    pub labels: Vec<&'static str>,
}

fn serialize_vectors<S: serde::Serializer>(v: &[Vec<c64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<Vec<[f64; 2]>> = v.iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect();
    pairs.serialize(s)
}

/// Diagonalise the `n`-excitation block of the resonant, undriven out-phase Hamiltonian.
///
/// The degenerate zero-energy pair is split into the decoupled `|+, n−1⟩`
/// (`Ψ0`) and its orthogonal complement (`Φ0`). Each eigenvector is phased
/// so its first non-negligible coefficient is real and positive.
pub fn manifold_spectrum(n: usize, g: f64) -> Result<ManifoldSpectrum> {
    if n < 1 {
        return Err(Error::invalid("excitation number must be at least 1"));
    }
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::invalid(format!("coupling g = {g} must be finite and positive")));
    }
    let p = ModelParams::out_phase(0.0, 0.0, g, 0.0, n);
    let h = interaction_hamiltonian(&p)?;
    let mut basis = vec![BasisState::new(Collective::GG, n), BasisState::new(Collective::Minus, n - 1)];
    if n >= 2 {
        basis.push(BasisState::new(Collective::EE, n - 2));
    }
    basis.push(BasisState::new(Collective::Plus, n - 1));
    let kets: Vec<Vec<c64>> = basis.iter().map(|b| b.ket(n)).collect::<Result<_>>()?;
    let size = basis.len();
    let block = Mat::from_fn(size, size, |i, j| matrix_element(&h, &kets[i], &kets[j]));

    // the span must be invariant: H maps it into itself
    let weight_inside: f64 = (0..size)
        .map(|j| (0..size).map(|i| block[(i, j)].norm_sqr()).sum::<f64>())
        .sum();
    let weight_total: f64 = kets
        .iter()
        .map(|k| {
            let m = h.matrix();
            (0..k.len())
                .map(|i| k.iter().enumerate().fold(ZERO, |acc, (j, v)| acc + m[(i, j)] * v).norm_sqr())
                .sum::<f64>()
        })
        .sum();
    if (weight_total - weight_inside).abs() > SPECTRUM_TOL * g * g {
        return Err(Error::Numerical(format!("manifold {n} is not invariant under H")));
    }

    let eig = block
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("manifold eigendecomposition: {e:?}")))?;
    let values: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re / g).collect();
    let u = eig.U();
    let mut vectors: Vec<Vec<c64>> = (0..size).map(|k| (0..size).map(|b| u[(b, k)]).collect()).collect();

    let expected = closed_form_eigenvalues(n);
    let scale = expected.last().copied().unwrap_or(1.0);
    for (got, want) in values.iter().zip(&expected) {
        if (got - want).abs() > SPECTRUM_TOL * scale {
            return Err(Error::Numerical(format!(
                "manifold {n}: eigenvalue {got} g differs from closed form {want} g"
            )));
        }
    }

    let plus = size - 1;
    if (0..size).any(|i| block[(i, plus)].norm() > ORTHONORMAL_TOL * g) {
        return Err(Error::Numerical(format!("|+,{}> couples to the cavity", n - 1)));
    }
    let labels = if n == 1 {
        vec!["Psi-", "Psi0", "Psi+"]
    } else {
        // zero pair sits at sorted positions 1 and 2
        let mut e_plus = vec![ZERO; size];
        e_plus[plus] = c64::new(1.0, 0.0);
        let complement = [1, 2]
            .iter()
            .map(|&k| {
                let v = &vectors[k];
                let overlap = v[plus];
                v.iter().zip(&e_plus).map(|(a, b)| a - overlap * b).collect::<Vec<_>>()
            })
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .expect("two zero modes");
        let len = norm(&complement);
        vectors[1] = complement.iter().map(|z| z / len).collect();
        vectors[2] = e_plus;
        vec!["Psi-", "Phi0", "Psi0", "Psi+"]
    };
    for v in vectors.iter_mut() {
        fix_phase(v);
    }
    for a in 0..size {
        for b in 0..size {
            let dot = vectors[a].iter().zip(&vectors[b]).fold(ZERO, |acc, (x, y)| acc + x.conj() * y);
            let want = if a == b { 1.0 } else { 0.0 };
            if (dot - c64::new(want, 0.0)).norm() > ORTHONORMAL_TOL {
                return Err(Error::Numerical(format!("manifold {n}: eigenvectors not orthonormal")));
            }
        }
    }
    Ok(ManifoldSpectrum {
        n,
        g,
        basis,
        eigenvalues: values,
        eigenvectors: vectors,
        labels,
    })
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn fix_phase(v: &mut [c64]) {
    if let Some(first) = v.iter().copied().find(|z| z.norm() > 1e-9) {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

impl fmt::Display for ManifoldSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "manifold n = {} (energies in units of g = {})", self.n, self.g)?;
        write!(f, "{:<6} {:>12}", "state", "E/g")?;
        for b in &self.basis {
            write!(f, " {:>12}", b.to_string())?;
        }
        writeln!(f)?;
        for ((label, e), v) in self.labels.iter().zip(&self.eigenvalues).zip(&self.eigenvectors) {
            write!(f, "{label:<6} {e:>12.8}")?;
            for z in v {
                write!(f, " {:>12.8}", z.re)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// One transition matrix element `⟨to|H|from⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct PathwayElement {
    pub from: BasisState,
    pub to: BasisState,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

impl PathwayElement {
    pub fn amplitude(&self) -> c64 {
        c64::new(self.amplitude_re, self.amplitude_im)
    }
}

impl fmt::Display for PathwayElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>8} -> {:<8} {:>+14.10} {:>+14.10}i  |.| = {:.10}",
            self.from.to_string(),
            self.to.to_string(),
            self.amplitude_re,
            self.amplitude_im,
            self.amplitude().norm()
        )
    }
}

/// Matrix elements of the full Hamiltonian along
/// `|gg,n⟩ → |+,n⟩ → |ee,n⟩ → |−,n+1⟩ → |gg,n+2⟩`.
pub fn pathway_amplitudes(n: usize, p: &ModelParams) -> Result<Vec<PathwayElement>> {
    if !p.is_out_phase() {
        return Err(Error::invalid("pathway ladder is defined for the out-phase preset (g1 = -g2)"));
    }
    if n + 2 > p.n_max {
        return Err(Error::invalid(format!(
            "photon index {n} needs n_max >= {}, got {}",
            n + 2,
            p.n_max
        )));
    }
    let model = build_two_qubit_model(p)?;
    let h = model.hamiltonian();
    let steps = [
        (BasisState::new(Collective::GG, n), BasisState::new(Collective::Plus, n)),
        (BasisState::new(Collective::Plus, n), BasisState::new(Collective::EE, n)),
        (BasisState::new(Collective::EE, n), BasisState::new(Collective::Minus, n + 1)),
        (BasisState::new(Collective::Minus, n + 1), BasisState::new(Collective::GG, n + 2)),
    ];
    steps
        .iter()
        .map(|&(from, to)| {
            let z = matrix_element(h, &to.ket(p.n_max)?, &from.ket(p.n_max)?);
            Ok(PathwayElement {
                from,
                to,
                amplitude_re: z.re,
                amplitude_im: z.im,
            })
        })
        .collect()
}

/// `|⟨gg,1|H_int|+,0⟩| = |g1 + g2|/√2`, read from the assembled interaction term.
pub fn interference_check(p: &ModelParams) -> Result<f64> {
    let p = p.with_n_max(p.n_max.max(1));
    let h = interaction_hamiltonian(&p)?;
    let bra = BasisState::new(Collective::GG, 1).ket(p.n_max)?;
    let ket = BasisState::new(Collective::Plus, 0).ket(p.n_max)?;
    Ok(matrix_element(&h, &bra, &ket).norm())
}

/// `√2 η`, the drive element into and out of `|+⟩`.
pub fn drive_element(eta: f64) -> f64 {
    SQRT_2 * eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TwoQubitOperators;

    #[test]
    fn first_manifolds_match_closed_form() {
        let m = manifold_spectrum(1, 10.0).unwrap();
        assert_eq!(m.labels, ["Psi-", "Psi0", "Psi+"]);
        assert!((m.eigenvalues[0] + SQRT_2).abs() < 1e-12);
        let m = manifold_spectrum(2, 10.0).unwrap();
        assert!((m.eigenvalues[3] - 6f64.sqrt()).abs() < 1e-12);
        assert!(m.eigenvalues[1].abs() < 1e-12 && m.eigenvalues[2].abs() < 1e-12);
    }

    #[test]
    fn zero_mode_of_third_manifold() {
        let m = manifold_spectrum(3, 10.0).unwrap();
        let phi = &m.eigenvectors[1];
        // (|gg,3⟩, |ee,1⟩) ∝ (√2, √3), no |−⟩ or |+⟩ weight
        assert!(phi[1].norm() < 1e-12 && phi[3].norm() < 1e-12);
        assert!((phi[0].re / phi[2].re - (2f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(m.eigenvectors[2], vec![ZERO, ZERO, ZERO, c64::new(1.0, 0.0)]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(manifold_spectrum(0, 10.0).is_err());
        assert!(manifold_spectrum(2, 0.0).is_err());
        let p = ModelParams::out_phase(0.0, 0.5, 10.0, 0.5, 4);
        assert!(pathway_amplitudes(3, &p).is_err());
        assert!(pathway_amplitudes(0, &ModelParams::in_phase(0.0, 0.5, 10.0, 0.5, 4)).is_err());
    }

    #[test]
    fn collective_rewrite_of_out_phase_coupling() {
        let p = ModelParams::out_phase(0.0, 0.0, 3.0, 0.5, 4);
        let h = interaction_hamiltonian(&p).unwrap();
        let (_, dm) = collective_lowering(4).unwrap();
        let a = TwoQubitOperators::new(4).unwrap().a;
        let rewrite = (&a.dagger() * &dm + &a * &dm.dagger()) * (SQRT_2 * 3.0);
        assert!(h.max_abs_diff(&rewrite) < 1e-14);
    }

    #[test]
    fn symmetric_state_decouples_in_every_photon_sector() {
        let p = ModelParams::out_phase(0.0, 0.0, 10.0, 0.5, 6);
        let h = interaction_hamiltonian(&p).unwrap();
        for m in 0..=6 {
            let ket = BasisState::new(Collective::Plus, m).ket(6).unwrap();
            let m_h = h.matrix();
            for i in 0..h.dim() {
                let col = ket.iter().enumerate().fold(ZERO, |acc, (j, v)| acc + m_h[(i, j)] * v);
                assert!(col.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn pathway_elements_are_hermitian_pairs() {
        let p = ModelParams::out_phase(1.5, 0.7, 10.0, 0.5, 6);
        let h = build_two_qubit_model(&p).unwrap();
        for e in pathway_amplitudes(2, &p).unwrap() {
            let back = matrix_element(h.hamiltonian(), &e.from.ket(6).unwrap(), &e.to.ket(6).unwrap());
            assert!((back - e.amplitude().conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn interference_scales_with_coupling_sum() {
        let p = ModelParams {
            g2: 4.0,
            ..ModelParams::out_phase(0.0, 0.0, 10.0, 0.5, 2)
        };
        assert!((interference_check(&p).unwrap() - 14.0 / SQRT_2).abs() < 1e-12);
    }
}
