//! Hamiltonian and collapse channels for two coherently driven qubits in a
//! single-mode cavity, plus the single-qubit reference systems.
//!
//! All rates and frequencies are in units of the qubit decay rate γ (γ = 1 by
//! default). Each channel `(c, rate)` contributes
//! `rate · (2cρc† − ρc†c − c†cρ)` to dρ/dt, so an undriven cavity loses
//! photons at `2κ`.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    embed, fock_annihilation, qubit_lowering, DensityMatrix, Operator, SpaceDescriptor,
};

/// Slot layout of the two-qubit space.
pub const QUBIT1_SLOT: usize = 0;
pub const QUBIT2_SLOT: usize = 1;
pub const CAVITY_SLOT: usize = 2;

/// Relative sign of the two qubit-cavity couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CouplingPhase {
    /// `g1 = −g2 = g`: qubits at a crest and a trough of the standing wave.
    #[default]
    Out,
    /// `g1 = g2 = g`.
    In,
}

impl std::str::FromStr for CouplingPhase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out" => Ok(CouplingPhase::Out),
            "in" => Ok(CouplingPhase::In),
            other => Err(Error::invalid(format!("unknown phase {other:?} (expected out|in)"))),
        }
    }
}

impl std::fmt::Display for CouplingPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingPhase::Out => "out",
            CouplingPhase::In => "in",
        })
    }
}

/// Physical parameters, in units of γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta_a: f64,
    pub delta_c: f64,
    pub g1: f64,
    pub g2: f64,
    pub eta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub n_max: usize,
}

impl ModelParams {
    /// Equal detunings `Δa = Δc = Δ`, couplings set by `phase`, γ = 1.
    pub fn preset(phase: CouplingPhase, delta: f64, eta: f64, g: f64, kappa: f64, n_max: usize) -> Self {
        let g2 = match phase {
            CouplingPhase::Out => -g,
            CouplingPhase::In => g,
        };
        ModelParams {
            delta_a: delta,
            delta_c: delta,
            g1: g,
            g2,
            eta,
            kappa,
            gamma: 1.0,
            n_max,
        }
    }

    pub fn out_phase(delta: f64, eta: f64, g: f64, kappa: f64, n_max: usize) -> Self {
        Self::preset(CouplingPhase::Out, delta, eta, g, kappa, n_max)
    }

    pub fn in_phase(delta: f64, eta: f64, g: f64, kappa: f64, n_max: usize) -> Self {
        Self::preset(CouplingPhase::In, delta, eta, g, kappa, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.delta_a,
            self.delta_c,
            self.g1,
            self.g2,
            self.eta,
            self.kappa,
            self.gamma,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("model parameters must be finite"));
        }
        if self.kappa < 0.0 {
            return Err(Error::invalid(format!("kappa = {} must be >= 0", self.kappa)));
        }
        if self.gamma <= 0.0 {
            return Err(Error::invalid(format!("gamma = {} must be > 0", self.gamma)));
        }
        if self.n_max < 1 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        Ok(())
    }

    pub fn is_out_phase(&self) -> bool {
        self.g1 == -self.g2
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        ModelParams { n_max, ..self.clone() }
    }
}

/// A collapse operator and its (non-negative) rate.
#[derive(Clone, Debug)]
pub struct CollapseChannel {
    pub operator: Operator,
    pub rate: f64,
}

/// Hamiltonian plus dissipative channels of a master equation.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    hamiltonian: Operator,
    channels: Vec<CollapseChannel>,
}

impl LindbladModel {
    pub const HERMITIAN_TOL: f64 = 1e-12;

    pub fn new(hamiltonian: Operator, channels: Vec<CollapseChannel>) -> Result<Self> {
        let herm = hamiltonian.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::invalid(format!("Hamiltonian not Hermitian ({herm:e})")));
        }
        for ch in &channels {
            hamiltonian.space().ensure_same(ch.operator.space())?;
            if !(ch.rate >= 0.0) || !ch.rate.is_finite() {
                return Err(Error::invalid(format!("channel rate {} must be >= 0", ch.rate)));
            }
        }
        Ok(LindbladModel {
            hamiltonian,
            channels,
        })
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[CollapseChannel] {
        &self.channels
    }

    pub fn space(&self) -> &SpaceDescriptor {
        self.hamiltonian.space()
    }

    /// True when at least one channel has a positive rate.
    pub fn is_dissipative(&self) -> bool {
        self.channels.iter().any(|c| c.rate > 0.0)
    }
}

/// Cavity and qubit lowering operators embedded in the two-qubit space.
pub struct TwoQubitOperators {
    pub a: Operator,
    pub sm1: Operator,
    pub sm2: Operator,
}

impl TwoQubitOperators {
    pub fn new(n_max: usize) -> Result<Self> {
        let space = SpaceDescriptor::two_qubits_cavity(n_max);
        let sm = qubit_lowering();
        Ok(TwoQubitOperators {
            a: embed(&fock_annihilation(n_max)?, CAVITY_SLOT, &space)?,
            sm1: embed(&sm, QUBIT1_SLOT, &space)?,
            sm2: embed(&sm, QUBIT2_SLOT, &space)?,
        })
    }
}

/// `Σ_i g_i (a†σ₋ⁱ + aσ₊ⁱ)` on the two-qubit space.
pub fn interaction_hamiltonian(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    let ops = TwoQubitOperators::new(p.n_max)?;
    let ad = ops.a.dagger();
    let term = |sm: &Operator, g: f64| (&ad * sm + &ops.a * &sm.dagger()) * g;
    Ok(term(&ops.sm1, p.g1) + term(&ops.sm2, p.g2))
}

/// Two qubits + cavity on `[2, 2, n_max + 1]` with channels `[(a, κ), (σ₋¹, γ), (σ₋², γ)]`.
pub fn build_two_qubit_model(p: &ModelParams) -> Result<LindbladModel> {
    p.validate()?;
    let ops = TwoQubitOperators::new(p.n_max)?;
    let ad = ops.a.dagger();
    let mut h = &(&ad * &ops.a) * p.delta_c;
    for (sm, g) in [(&ops.sm1, p.g1), (&ops.sm2, p.g2)] {
        let sp = sm.dagger();
        h = h + (&sp * sm) * p.delta_a;
        h = h + (&ad * sm + &ops.a * &sp) * g;
        h = h + (sm + &sp) * p.eta;
    }
    LindbladModel::new(
        h,
        vec![
            CollapseChannel {
                operator: ops.a,
                rate: p.kappa,
            },
            CollapseChannel {
                operator: ops.sm1,
                rate: p.gamma,
            },
            CollapseChannel {
                operator: ops.sm2,
                rate: p.gamma,
            },
        ],
    )
}

/// One qubit (coupling `g1` or `g2`) + cavity on `[2, n_max + 1]`, driven at `η`.
pub fn build_single_qubit_model(p: &ModelParams, which: usize) -> Result<LindbladModel> {
    p.validate()?;
    let g = match which {
        1 => p.g1,
        2 => p.g2,
        other => return Err(Error::invalid(format!("qubit index {other} not in {{1, 2}}"))),
    };
    let space = SpaceDescriptor::qubit_cavity(p.n_max);
    let a = embed(&fock_annihilation(p.n_max)?, 1, &space)?;
    let sm = embed(&qubit_lowering(), 0, &space)?;
    let ad = a.dagger();
    let sp = sm.dagger();
    let h = (&ad * &a) * p.delta_c
        + (&sp * &sm) * p.delta_a
        + (&ad * &sm + &a * &sp) * g
        + (&sm + &sp) * p.eta;
    LindbladModel::new(
        h,
        vec![
            CollapseChannel {
                operator: a,
                rate: p.kappa,
            },
            CollapseChannel {
                operator: sm,
                rate: p.gamma,
            },
        ],
    )
}

/// Probability mass the coherent state `|α⟩` puts above `n_max`.
pub fn coherent_tail_mass(alpha: c64, n_max: usize) -> f64 {
    let x = alpha.norm_sqr();
    // Poisson(x) upper tail, summed until terms stop contributing
    let mut term = (-x).exp();
    for n in 1..=n_max {
        term *= x / n as f64;
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        term *= x / n as f64;
        tail += term;
        if term < 1e-30 * tail.max(1e-300) || n > n_max + 10_000 {
            break;
        }
        n += 1;
    }
    tail
}

/// Truncated, renormalized coherent state `|α⟩⟨α|` on the cavity space.
pub fn coherent_state(alpha: c64, n_max: usize) -> Result<DensityMatrix> {
    if n_max < 1 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let tail_mass = coherent_tail_mass(alpha, n_max);
    if tail_mass > 1e-10 {
        return Err(Error::TruncationTooSmall { n_max, tail_mass });
    }
    let mut ket = Vec::with_capacity(n_max + 1);
    let mut amp = c64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=n_max {
        if n > 0 {
            amp = amp * alpha / (n as f64).sqrt();
        }
        ket.push(amp);
    }
    DensityMatrix::from_ket(SpaceDescriptor::cavity(n_max), &ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::number_operator;

    /// Composite index of |q1 q2, n⟩ with q = 0 (g) or 1 (e).
    fn idx(q1: usize, q2: usize, n: usize, n_max: usize) -> usize {
        SpaceDescriptor::two_qubits_cavity(n_max).index_of(&[q1, q2, n])
    }

    #[test]
    fn undriven_uncoupled_hamiltonian_is_diagonal() {
        let p = ModelParams {
            delta_a: 0.7,
            delta_c: -1.3,
            g1: 0.0,
            g2: 0.0,
            eta: 0.0,
            kappa: 0.5,
            gamma: 1.0,
            n_max: 4,
        };
        let m = build_two_qubit_model(&p).unwrap();
        let h = m.hamiltonian();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(h.get(i, j).norm(), 0.0);
                }
            }
            let d = SpaceDescriptor::two_qubits_cavity(4).digits(i);
            let expected = p.delta_c * d[2] as f64 + p.delta_a * (d[0] + d[1]) as f64;
            assert!((h.get(i, i).re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn out_phase_coupling_elements() {
        let n_max = 5;
        let p = ModelParams::out_phase(0.0, 0.0, 10.0, 0.5, n_max);
        let m = build_two_qubit_model(&p).unwrap();
        let h = m.hamiltonian();
        // ⟨gg,1|H|eg,0⟩ = g1, ⟨gg,1|H|ge,0⟩ = g2
        assert!((h.get(idx(0, 0, 1, n_max), idx(1, 0, 0, n_max)).re - 10.0).abs() < 1e-14);
        assert!((h.get(idx(0, 0, 1, n_max), idx(0, 1, 0, n_max)).re + 10.0).abs() < 1e-14);
        assert_eq!(h.hermiticity_error(), 0.0);
        assert_eq!(m.channels().len(), 3);
        assert_eq!(m.channels()[0].rate, 0.5);
    }

    #[test]
    fn drive_elements() {
        let n_max = 3;
        let p = ModelParams::out_phase(0.0, 0.8, 10.0, 0.5, n_max);
        let h = build_two_qubit_model(&p).unwrap().hamiltonian().clone();
        assert!((h.get(idx(1, 0, 2, n_max), idx(0, 0, 2, n_max)).re - 0.8).abs() < 1e-14);
        assert!((h.get(idx(1, 1, 2, n_max), idx(0, 1, 2, n_max)).re - 0.8).abs() < 1e-14);
    }

    #[test]
    fn single_qubit_sign_is_a_gauge() {
        let p = ModelParams::out_phase(1.5, 0.9, 10.0, 0.5, 8);
        let e1 = build_single_qubit_model(&p, 1).unwrap().hamiltonian().hermitian_eigenvalues().unwrap();
        let e2 = build_single_qubit_model(&p, 2).unwrap().hamiltonian().hermitian_eigenvalues().unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(matches!(build_single_qubit_model(&p, 3), Err(Error::InvalidArgument(_))));
        assert_eq!(build_single_qubit_model(&p, 1).unwrap().hamiltonian().hermiticity_error(), 0.0);
    }

    #[test]
    fn global_coupling_sign_flip_preserves_spectrum() {
        let p = ModelParams {
            delta_a: 0.4,
            delta_c: -0.3,
            g1: 3.0,
            g2: -2.0,
            eta: 1.1,
            kappa: 0.5,
            gamma: 1.0,
            n_max: 6,
        };
        let q = ModelParams { g1: -p.g1, g2: -p.g2, ..p.clone() };
        let e1 = build_two_qubit_model(&p).unwrap().hamiltonian().hermitian_eigenvalues().unwrap();
        let e2 = build_two_qubit_model(&q).unwrap().hamiltonian().hermitian_eigenvalues().unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn undriven_hamiltonian_conserves_excitations() {
        let p = ModelParams {
            delta_a: 0.4,
            delta_c: -0.3,
            g1: 3.0,
            g2: -3.0,
            eta: 0.0,
            kappa: 0.5,
            gamma: 1.0,
            n_max: 6,
        };
        let m = build_two_qubit_model(&p).unwrap();
        let ops = TwoQubitOperators::new(p.n_max).unwrap();
        let n_exc = &ops.a.dagger() * &ops.a + &ops.sm1.dagger() * &ops.sm1 + &ops.sm2.dagger() * &ops.sm2;
        assert!(m.hamiltonian().commutator(&n_exc).max_abs() < 1e-12);
    }

    #[test]
    fn channels_annihilate_ground_vacuum() {
        let p = ModelParams::out_phase(0.0, 1.0, 10.0, 0.5, 4);
        let m = build_two_qubit_model(&p).unwrap();
        for ch in m.channels() {
            for i in 0..ch.operator.dim() {
                assert_eq!(ch.operator.get(i, 0).norm(), 0.0);
            }
        }
    }

    #[test]
    fn parameter_validation() {
        let mut p = ModelParams::out_phase(0.0, 1.0, 10.0, 0.5, 4);
        p.kappa = -0.1;
        assert!(build_two_qubit_model(&p).is_err());
        p.kappa = 0.5;
        p.gamma = 0.0;
        assert!(build_two_qubit_model(&p).is_err());
        p.gamma = 1.0;
        p.n_max = 0;
        assert!(build_two_qubit_model(&p).is_err());
        assert!("sideways".parse::<CouplingPhase>().is_err());
        assert_eq!("in".parse::<CouplingPhase>().unwrap(), CouplingPhase::In);
    }

    #[test]
    fn coherent_state_calibration() {
        let vac = coherent_state(c64::new(0.0, 0.0), 20).unwrap();
        assert!((vac.get(0, 0).re - 1.0).abs() < 1e-15);

        let rho = coherent_state(c64::new(0.5, 0.0), 20).unwrap();
        let n = number_operator(20).unwrap().expect(&rho).unwrap();
        assert!((n.re - 0.25).abs() < 1e-10);

        // Poisson(1) table, computed independently of the amplitude recursion
        let rho = coherent_state(c64::new(0.0, 1.0), 20).unwrap();
        let mut factorial = 1.0;
        for k in 0..=20usize {
            if k > 0 {
                factorial *= k as f64;
            }
            let poisson = (-1.0f64).exp() / factorial;
            assert!((rho.get(k, k).re - poisson).abs() < 1e-9, "n = {k}");
        }

        assert!(matches!(
            coherent_state(c64::new(3.0, 0.0), 5),
            Err(Error::TruncationTooSmall { .. })
        ));
    }
}
