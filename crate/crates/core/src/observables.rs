//! Figures of merit of the cavity field.
//!
//! Quadratures are `X_θ = (a e^{−iθ} + a† e^{iθ})/√2`, so the vacuum variance
//! is 1/2 and `S_θ = Var(X_θ) − 1/2`. Phase-space coordinates follow
//! `α = (x + iy)/√2`: the `x` axis is `X_0`, the `y` axis is `X_{π/2}`, and the
//! Wigner function is normalised by `∫ W d²α = ∫ W dx dy / 2 = 1`.

use std::f64::consts::{FRAC_2_PI, PI};

use faer::{c64, Mat, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_single_qubit_model, build_two_qubit_model, ModelParams};
use crate::operator::{DensityMatrix, ZERO};
use crate::parallel::map_indexed;
use crate::solver::{build_liouvillian, steady_state, SteadyStateReport};

/// Probabilities above this magnitude below zero are a contract violation, not roundoff.
const NEGATIVE_PROBABILITY_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-9;
/// `|⟨a⟩|` below which the coherent amplitude is treated as zero.
const ZERO_AMPLITUDE: f64 = 1e-12;
const THETA_GRID: usize = 720;
/// Angles this close below π are reported as 0.
const ANGLE_SNAP: f64 = 1e-12;
/// Smallest single-qubit photon number for which the radiance witness is defined.
const WITNESS_FLOOR: f64 = 1e-14;
/// Allowed disagreement between the two single-qubit references when `|g1| = |g2|`.
const SINGLE_QUBIT_AGREEMENT: f64 = 1e-9;
pub const DEFAULT_KLYSHKO_FLOOR: f64 = 1e-12;
/// Boundary magnitude, relative to the peak, above which a Wigner grid is flagged.
const WIGNER_BOUNDARY_FRACTION: f64 = 1e-3;

/// Cavity photon-number distribution `P_n`, `n = 0..=N_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhotonDistribution {
    p: Vec<f64>,
}

impl PhotonDistribution {
    /// Validate and clamp a probability list: tiny negatives become 0.
    pub fn from_probabilities(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid("empty photon distribution"));
        }
        if let Some((n, &v)) = p
            .iter()
            .enumerate()
            .find(|(_, &v)| !v.is_finite() || v < -NEGATIVE_PROBABILITY_TOL)
        {
            return Err(Error::InvalidState(format!("P_{n} = {v:e}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!("photon distribution sums to {total}")));
        }
        Ok(Self {
            p: p.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, &p)| n as f64 * p).sum()
    }
}

/// `P_n = ⟨n| Tr_qubits ρ |n⟩`, reading the cavity from the last slot.
pub fn photon_distribution(rho: &DensityMatrix) -> Result<PhotonDistribution> {
    let cav = *rho.space().dims().last().expect("non-empty space");
    let mut p = vec![0.0; cav];
    for i in 0..rho.dim() {
        p[i % cav] += rho.get(i, i).re;
    }
    PhotonDistribution::from_probabilities(p)
}

/// `⟨a†a⟩`, `⟨a⟩` and `⟨a²⟩` of the cavity field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureMoments {
    pub n: f64,
    pub a: c64,
    pub a2: c64,
}

impl QuadratureMoments {
    pub fn of(rho: &DensityMatrix) -> Self {
        let cav = *rho.space().dims().last().expect("non-empty space");
        let blocks = rho.dim() / cav;
        let (mut n, mut a, mut a2) = (0.0, ZERO, ZERO);
        for b in 0..blocks {
            let base = b * cav;
            for k in 0..cav {
                let kf = k as f64;
                n += kf * rho.get(base + k, base + k).re;
                if k >= 1 {
                    a += rho.get(base + k, base + k - 1) * kf.sqrt();
                }
                if k >= 2 {
                    a2 += rho.get(base + k, base + k - 2) * (kf * (kf - 1.0)).sqrt();
                }
            }
        }
        QuadratureMoments { n, a, a2 }
    }

    /// `S_θ = ⟨a†a⟩ + Re(e^{−2iθ}⟨a²⟩) − 2[Re(e^{−iθ}⟨a⟩)]²`.
    pub fn s_theta(&self, theta: f64) -> f64 {
        let r1 = (c64::cis(-theta) * self.a).re;
        self.n + (c64::cis(-2.0 * theta) * self.a2).re - 2.0 * r1 * r1
    }

    pub fn min_squeezing(&self) -> SqueezingResult {
        let step = PI / THETA_GRID as f64;
        let grid: Vec<f64> = (0..THETA_GRID).map(|k| k as f64 * step).collect();
        let curve: Vec<f64> = grid.iter().map(|&t| self.s_theta(t)).collect();

        let (s_min, theta_s) = if self.a.norm() <= ZERO_AMPLITUDE {
            let theta = if self.a2.norm() <= ZERO_AMPLITUDE {
                0.0
            } else {
                canonical_angle(0.5 * (self.a2.arg() + PI))
            };
            (self.n - self.a2.norm(), theta)
        } else {
            // first minimum wins, so ties go to the smaller angle
            let mut best = 0;
            for k in 1..THETA_GRID {
                if curve[k] < curve[best] {
                    best = k;
                }
            }
            let theta = canonical_angle(refine_minimum(|t| self.s_theta(t), grid[best], step));
            let s = self.s_theta(theta);
            if s <= curve[best] {
                (s, theta)
            } else {
                (curve[best], grid[best])
            }
        };
        SqueezingResult {
            s_min,
            theta_s,
            s_of_theta: grid.into_iter().zip(curve).collect(),
        }
    }
}

/// Fold an angle into `[0, π)`, sending values within roundoff of π to 0.
fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if PI - t < ANGLE_SNAP {
        0.0
    } else {
        t
    }
}

/// Re-centre a three-point parabola on its vertex until the shift vanishes.
///
/// The stencil half-width stays at half a grid step: for `S_θ`, which is
/// even about its minimum, each pass shrinks the offset by a factor of order
/// `h²`, while a finite `h` keeps the value differences well above roundoff.
fn refine_minimum(f: impl Fn(f64) -> f64, start: f64, step: f64) -> f64 {
    let h = 0.5 * step;
    let mut c = start;
    for _ in 0..20 {
        let (fl, fc, fr) = (f(c - h), f(c), f(c + h));
        let curvature = fl - 2.0 * fc + fr;
        if !(curvature > 0.0) {
            break;
        }
        let offset = (0.5 * h * (fl - fr) / curvature).clamp(-2.0 * h, 2.0 * h);
        c += offset;
        if offset.abs() <= 1e-15 {
            break;
        }
    }
    c
}

/// `S_θ` of a state.
pub fn squeezing_parameter(rho: &DensityMatrix, theta: f64) -> f64 {
    QuadratureMoments::of(rho).s_theta(theta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezingResult {
    pub s_min: f64,
    /// Minimising angle in `[0, π)`.
    pub theta_s: f64,
    /// `(θ, S_θ)` on the uniform 720-point grid over `[0, π)`.
    pub s_of_theta: Vec<(f64, f64)>,
}

/// Global minimum of `S_θ` over `[0, π)`.
pub fn min_squeezing(rho: &DensityMatrix) -> SqueezingResult {
    QuadratureMoments::of(rho).min_squeezing()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KlyshkoResult {
    /// `(n, K_n)` for `n = 1..N_max−1`; `None` where `P_n` is below the floor.
    pub k: Vec<(usize, Option<f64>)>,
}

impl KlyshkoResult {
    pub fn get(&self, n: usize) -> Option<f64> {
        self.k.iter().find(|(m, _)| *m == n).and_then(|(_, k)| *k)
    }
}

/// `K_n = (n+1) P_{n−1} P_{n+1} / (n P_n²)`, undefined where `P_n < floor`.
pub fn klyshko(pdist: &PhotonDistribution, floor: f64) -> KlyshkoResult {
    let p = pdist.probabilities();
    let k = (1..p.len().saturating_sub(1))
        .map(|n| {
            let value = (p[n] >= floor && p[n] > 0.0).then(|| {
                let nf = n as f64;
                (nf + 1.0) * p[n - 1] * p[n + 1] / (nf * p[n] * p[n])
            });
            (n, value)
        })
        .collect();
    KlyshkoResult { k }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadianceWitness {
    pub r: f64,
    pub nbar_2q: f64,
    pub nbar_1q: [f64; 2],
}

impl RadianceWitness {
    /// `R = (n₂ − Σ n₁,ᵢ) / Σ n₁,ᵢ`.
    ///
    /// When `|g1| = |g2|` the two single-qubit references describe the same
    /// physics and must agree.
    pub fn from_photon_numbers(nbar_2q: f64, nbar_1q: [f64; 2], p: &ModelParams) -> Result<Self> {
        if p.g1.abs() == p.g2.abs() {
            let diff = (nbar_1q[0] - nbar_1q[1]).abs();
            if diff > SINGLE_QUBIT_AGREEMENT * nbar_1q[0].abs().max(1.0) {
                return Err(Error::SymmetryViolation(format!(
                    "single-qubit photon numbers {} and {} differ for |g1| = |g2|",
                    nbar_1q[0], nbar_1q[1]
                )));
            }
        }
        let denominator = nbar_1q[0] + nbar_1q[1];
        if !(denominator >= WITNESS_FLOOR) {
            return Err(Error::UndefinedWitness { denominator });
        }
        Ok(RadianceWitness {
            r: (nbar_2q - denominator) / denominator,
            nbar_2q,
            nbar_1q,
        })
    }
}

/// Steady-state photon numbers of the two single-qubit reference systems.
pub fn single_qubit_photon_numbers(p: &ModelParams) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (slot, which) in out.iter_mut().zip([1, 2]) {
        let rep = steady_state(&build_liouvillian(&build_single_qubit_model(p, which)?))?;
        *slot = QuadratureMoments::of(&rep.rho).n;
    }
    Ok(out)
}

/// Radiance witness from three steady-state solves.
pub fn radiance_witness(p: &ModelParams) -> Result<RadianceWitness> {
    let rep = two_qubit_steady_state(p)?;
    let nbar_2q = QuadratureMoments::of(&rep.rho).n;
    RadianceWitness::from_photon_numbers(nbar_2q, single_qubit_photon_numbers(p)?, p)
}

pub fn two_qubit_steady_state(p: &ModelParams) -> Result<SteadyStateReport> {
    steady_state(&build_liouvillian(&build_two_qubit_model(p)?))
}

/// Reduced cavity state (last slot).
pub fn cavity_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.partial_trace(&[rho.space().n_slots() - 1])
}

/// Uniform rectangular sample grid in `(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct WignerAxes {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl WignerAxes {
    /// `[−extent, extent]²` with `points` samples per axis.
    pub fn square(extent: f64, points: usize) -> Self {
        WignerAxes {
            x_min: -extent,
            x_max: extent,
            nx: points,
            y_min: -extent,
            y_max: extent,
            ny: points,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.nx < 2 || self.ny < 2 || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::invalid(format!("bad Wigner axes {self:?}")));
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect()
    }
}

pub const WIGNER_CONVENTION: &str =
    "W(alpha) = (2/pi) Tr[rho D(alpha) P D(-alpha)], P = (-1)^(a^dag a), alpha = (x + i y)/sqrt(2), integral of W dx dy / 2 = 1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major over `y`: `w[j * x.len() + i] = W(x_i, y_j)`.
    pub w: Vec<f64>,
    pub convention: &'static str,
    /// The boundary of the grid carries more than 1e-3 of the peak magnitude.
    pub grid_too_small: bool,
    /// Largest imaginary part discarded from the parity trace.
    pub max_imag: f64,
}

/// Second moments of a Wigner grid, measured with the `d²α` weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WignerMoments {
    pub mean: [f64; 2],
    /// `[[Var x, Cov], [Cov, Var y]]`.
    pub covariance: [[f64; 2]; 2],
    /// Direction of the minor axis, in `[0, π)`.
    pub minor_angle: f64,
    pub minor_variance: f64,
    pub major_variance: f64,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.w[j * self.x.len() + i]
    }

    fn weights(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let (nx, ny) = (self.x.len(), self.y.len());
        let dx = (self.x[nx - 1] - self.x[0]) / (nx - 1) as f64;
        let dy = (self.y[ny - 1] - self.y[0]) / (ny - 1) as f64;
        (0..ny).flat_map(move |j| {
            (0..nx).map(move |i| {
                // trapezoid weights, with d²α = dx dy / 2
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
                (self.x[i], self.y[j], wx * wy * dx * dy * 0.5 * self.w[j * nx + i])
            })
        })
    }

    /// `∫ W d²α` over the grid.
    pub fn integral(&self) -> f64 {
        self.weights().map(|(_, _, m)| m).sum()
    }

    pub fn moments(&self) -> WignerMoments {
        let (mut m0, mut mx, mut my) = (0.0, 0.0, 0.0);
        for (x, y, m) in self.weights() {
            m0 += m;
            mx += m * x;
            my += m * y;
        }
        let (cx, cy) = (mx / m0, my / m0);
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for (x, y, m) in self.weights() {
            let (u, v) = (x - cx, y - cy);
            sxx += m * u * u;
            sxy += m * u * v;
            syy += m * v * v;
        }
        let (sxx, sxy, syy) = (sxx / m0, sxy / m0, syy / m0);
        let half_trace = 0.5 * (sxx + syy);
        let radius = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
        // the major axis sits at half the angle of (sxx − syy, 2 sxy)
        let major_angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        WignerMoments {
            mean: [cx, cy],
            covariance: [[sxx, sxy], [sxy, syy]],
            minor_angle: canonical_angle(major_angle + 0.5 * PI),
            minor_variance: half_trace - radius,
            major_variance: half_trace + radius,
        }
    }
}

/// Padding of the displacement basis beyond the state's truncation.
fn padded_dimension(n_max: usize, beta_max: f64) -> usize {
    let reach = beta_max + ((n_max + 1) as f64).sqrt() + 6.0;
    (n_max + 1).max((reach * reach).ceil() as usize + 10)
}

/// Wigner function of a cavity-only state on a rectangular grid.
///
/// `D(β)` is built from the eigendecomposition of `a + a†` in a padded Fock
/// space: with `β = i r e^{iφ}`, `D(β) = e^{iφ a†a} e^{ir(a+a†)} e^{−iφ a†a}`.
pub fn wigner(rho_cavity: &DensityMatrix, axes: &WignerAxes) -> Result<WignerGrid> {
    axes.validate()?;
    if rho_cavity.space().n_slots() != 1 {
        return Err(Error::invalid(format!(
            "Wigner function needs a cavity-only state, got space {}",
            rho_cavity.space()
        )));
    }
    let dim = rho_cavity.dim();
    let x = WignerAxes::axis(axes.x_min, axes.x_max, axes.nx);
    let y = WignerAxes::axis(axes.y_min, axes.y_max, axes.ny);
    let corner = |u: f64, v: f64| u * u + v * v;
    let r2_max = [
        corner(axes.x_min, axes.y_min),
        corner(axes.x_min, axes.y_max),
        corner(axes.x_max, axes.y_min),
        corner(axes.x_max, axes.y_max),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    // |β| = |2α| = √2 · √(x² + y²)
    let beta_max = (2.0 * r2_max).sqrt();
    let pad = padded_dimension(dim - 1, beta_max);

    let quadrature = Mat::<f64>::from_fn(pad, pad, |i, j| {
        if i + 1 == j {
            (j as f64).sqrt()
        } else if j + 1 == i {
            (i as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = quadrature
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("quadrature eigendecomposition: {e:?}")))?;
    let v = eig.U();
    let lambda: Vec<f64> = eig.S().column_vector().iter().copied().collect();

    // C[Δ][k] = Σ_{n−m=Δ} ρ_mn (−1)^m V_nk V_mk, with Δ offset by dim−1
    let n_delta = 2 * dim - 1;
    let mut c = vec![ZERO; n_delta * pad];
    for m in 0..dim {
        let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
        for n in 0..dim {
            let rho_mn = rho_cavity.get(m, n) * parity;
            if rho_mn == ZERO {
                continue;
            }
            let row = &mut c[(n + dim - 1 - m) * pad..(n + dim - m) * pad];
            for (k, slot) in row.iter_mut().enumerate() {
                *slot += rho_mn * (v[(n, k)] * v[(m, k)]);
            }
        }
    }

    let nx = x.len();
    let rows: Vec<(Vec<f64>, f64)> = map_indexed(y.len(), |j| {
        let mut row = Vec::with_capacity(nx);
        let mut max_imag: f64 = 0.0;
        let mut phases = vec![ZERO; n_delta];
        let mut mk = vec![ZERO; pad];
        for &xi in &x {
            let beta = c64::new(xi, y[j]) * std::f64::consts::SQRT_2;
            let r = beta.norm();
            let phi = if r > 0.0 { beta.arg() - 0.5 * PI } else { 0.0 };
            let step = c64::cis(phi);
            let mut ph = c64::cis(-phi * (dim - 1) as f64);
            for slot in phases.iter_mut() {
                *slot = ph;
                ph *= step;
            }
            mk.iter_mut().for_each(|z| *z = ZERO);
            for (delta, &e) in phases.iter().enumerate() {
                let cd = &c[delta * pad..(delta + 1) * pad];
                for (z, &cv) in mk.iter_mut().zip(cd) {
                    *z += cv * e;
                }
            }
            let trace: c64 = mk
                .iter()
                .zip(&lambda)
                .map(|(&m, &l)| m * c64::cis(r * l))
                .fold(ZERO, |acc, z| acc + z);
            max_imag = max_imag.max(trace.im.abs() * FRAC_2_PI);
            row.push(trace.re * FRAC_2_PI);
        }
        (row, max_imag)
    });

    let mut w = Vec::with_capacity(nx * y.len());
    let mut max_imag: f64 = 0.0;
    for (row, imag) in rows {
        w.extend(row);
        max_imag = max_imag.max(imag);
    }
    let ny = y.len();
    let peak = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary = (0..nx)
        .flat_map(|i| [w[i], w[(ny - 1) * nx + i]])
        .chain((0..ny).flat_map(|j| [w[j * nx], w[j * nx + nx - 1]]))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(WignerGrid {
        x,
        y,
        w,
        convention: WIGNER_CONVENTION,
        grid_too_small: boundary > WIGNER_BOUNDARY_FRACTION * peak,
        max_imag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::coherent_state;
    use crate::operator::SpaceDescriptor;

    fn fock(n: usize, n_max: usize) -> DensityMatrix {
        DensityMatrix::basis(SpaceDescriptor::cavity(n_max), n).unwrap()
    }

    fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
        let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
        if n == 0 {
            return l0;
        }
        for k in 1..n {
            let kf = k as f64;
            let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
            l0 = l1;
            l1 = l2;
        }
        l1
    }

    #[test]
    fn vacuum_and_fock_distributions() {
        let p = photon_distribution(&fock(0, 5)).unwrap();
        assert_eq!(p.probabilities()[0], 1.0);
        let p = photon_distribution(&fock(3, 5)).unwrap();
        assert_eq!(p.mean(), 3.0);
    }

    #[test]
    fn distribution_rejects_unnormalized_input() {
        assert!(PhotonDistribution::from_probabilities(vec![0.5, 0.4]).is_err());
        assert!(PhotonDistribution::from_probabilities(vec![1.1, -0.1]).is_err());
        let p = PhotonDistribution::from_probabilities(vec![1.0 + 5e-11, -5e-11]).unwrap();
        assert_eq!(p.probabilities()[1], 0.0);
    }

    #[test]
    fn fock_one_has_unit_squeezing_parameter() {
        let rho = fock(1, 4);
        for k in 0..8 {
            assert!((squeezing_parameter(&rho, k as f64 * 0.4) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn vacuum_minimum_breaks_tie_at_zero() {
        let s = min_squeezing(&fock(0, 4));
        assert_eq!(s.s_min, 0.0);
        assert_eq!(s.theta_s, 0.0);
        assert_eq!(s.s_of_theta.len(), THETA_GRID);
    }

    #[test]
    fn general_path_matches_closed_form() {
        // S_θ = n − |A|² + Re(e^{−2iθ}(⟨a²⟩ − A²)) so the minimum is n − |A|² − |⟨a²⟩ − A²|
        let m = QuadratureMoments {
            n: 1.3,
            a: c64::new(0.4, -0.7),
            a2: c64::new(-0.2, 0.9),
        };
        let b = m.a2 - m.a * m.a;
        let expected = m.n - m.a.norm_sqr() - b.norm();
        let s = m.min_squeezing();
        assert!((s.s_min - expected).abs() < 1e-12);
        let theta = (0.5 * (b.arg() + PI)).rem_euclid(PI);
        assert!((s.theta_s - theta).abs() < 1e-10);
    }

    #[test]
    fn klyshko_marks_empty_levels_undefined() {
        let p = PhotonDistribution::from_probabilities(vec![0.6, 0.0, 0.3, 0.0, 0.1, 0.0]).unwrap();
        let k = klyshko(&p, DEFAULT_KLYSHKO_FLOOR);
        assert_eq!(k.k.len(), 4);
        assert_eq!(k.get(1), None);
        assert_eq!(k.get(2), Some(0.0));
        assert_eq!(k.get(3), None);
        assert_eq!(k.get(4), Some(0.0));
    }

    #[test]
    fn witness_definition() {
        let p = ModelParams::out_phase(0.0, 1.0, 10.0, 0.5, 5);
        let w = RadianceWitness::from_photon_numbers(0.4, [0.1, 0.1], &p).unwrap();
        assert!((w.r - 1.0).abs() < 1e-15);
        assert!(matches!(
            RadianceWitness::from_photon_numbers(0.4, [0.0, 0.0], &p),
            Err(Error::UndefinedWitness { .. })
        ));
        assert!(matches!(
            RadianceWitness::from_photon_numbers(0.4, [0.1, 0.2], &p),
            Err(Error::SymmetryViolation(_))
        ));
    }

    #[test]
    fn unpumped_witness_is_undefined() {
        let p = ModelParams::out_phase(0.0, 0.0, 10.0, 0.5, 3);
        assert!(matches!(radiance_witness(&p), Err(Error::UndefinedWitness { .. })));
    }

    #[test]
    fn fock_wigner_matches_laguerre_form() {
        let n_max = 6;
        let axes = WignerAxes::square(3.0, 13);
        for n in 0..=4 {
            let grid = wigner(&fock(n, n_max), &axes).unwrap();
            for (j, &y) in grid.y.iter().enumerate() {
                for (i, &x) in grid.x.iter().enumerate() {
                    let a2 = 0.5 * (x * x + y * y);
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let exact = FRAC_2_PI * sign * (-2.0 * a2).exp() * laguerre(n, 0.0, 4.0 * a2);
                    assert!((grid.at(i, j) - exact).abs() < 1e-10, "n={n} x={x} y={y}");
                }
            }
            assert!(grid.max_imag < 1e-12);
        }
    }

    #[test]
    fn coherent_wigner_is_a_displaced_gaussian() {
        let alpha = c64::new(0.8, -0.5);
        let rho = coherent_state(alpha, 25).unwrap();
        let grid = wigner(&rho, &WignerAxes::square(3.5, 15)).unwrap();
        for (j, &y) in grid.y.iter().enumerate() {
            for (i, &x) in grid.x.iter().enumerate() {
                let d = c64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2 - alpha;
                let exact = FRAC_2_PI * (-2.0 * d.norm_sqr()).exp();
                assert!((grid.at(i, j) - exact).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn vacuum_grid_moments() {
        let grid = wigner(&fock(0, 3), &WignerAxes::square(6.0, 121)).unwrap();
        assert!(!grid.grid_too_small);
        assert!((grid.integral() - 1.0).abs() < 1e-9);
        let m = grid.moments();
        assert!((m.covariance[0][0] - 0.5).abs() < 1e-9);
        assert!(m.covariance[0][1].abs() < 1e-12);
    }

    #[test]
    fn small_grid_is_flagged() {
        let grid = wigner(&fock(0, 3), &WignerAxes::square(1.0, 11)).unwrap();
        assert!(grid.grid_too_small);
    }

    #[test]
    fn wigner_rejects_composite_state() {
        let rho = DensityMatrix::basis(SpaceDescriptor::two_qubits_cavity(2), 0).unwrap();
        assert!(wigner(&rho, &WignerAxes::square(2.0, 5)).is_err());
        assert!(wigner(&fock(0, 2), &WignerAxes::square(2.0, 1)).is_err());
    }
}
