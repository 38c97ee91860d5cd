use faer::c64;

use super::{build_liouvillian, devectorize, vectorize};
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operator::{DensityMatrix, HERMITIAN_TOL, PSD_TOL, TRACE_TOL, ZERO};

/// RK4 is stable for `dt·ρ(L) ≲ 2.78`; the infinity norm bounds `ρ(L)`.
const STABILITY_LIMIT: f64 = 2.5;
const MAX_CONSECUTIVE_REJECTIONS: usize = 8;
/// Full eigenvalue check cadence; trace, Hermiticity and diagonal signs are checked every step.
const PSD_CHECK_INTERVAL: usize = 25;

#[derive(Clone, Debug, Default)]
pub struct EvolveStats {
    pub steps: usize,
    pub rejections: usize,
    pub dt_used: f64,
}

struct Rk4Workspace {
    k1: Vec<c64>,
    k2: Vec<c64>,
    k3: Vec<c64>,
    k4: Vec<c64>,
    tmp: Vec<c64>,
}

/// Integrate `dvec(ρ)/dt = L vec(ρ)` from `rho0` to `t_final` (units of 1/γ)
/// with classical fourth-order Runge–Kutta. `dt` is an upper bound on the
/// step; it is reduced to the stability limit of `L` when needed.
pub fn time_evolve(model: &LindbladModel, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    time_evolve_with_stats(model, rho0, t_final, dt).map(|(rho, _)| rho)
}

pub fn time_evolve_with_stats(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<(DensityMatrix, EvolveStats)> {
    model.space().ensure_same(rho0.space())?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::invalid(format!("t_final = {t_final} must be finite and >= 0")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt = {dt} must be finite and > 0")));
    }
    let l = build_liouvillian(model);
    let d = l.hilbert_dim();
    let n = d * d;
    let norm = l.inf_norm();
    let mut h = if norm > 0.0 { dt.min(STABILITY_LIMIT / norm) } else { dt };

    let mut x = vectorize(rho0.matrix());
    let mut ws = Rk4Workspace {
        k1: vec![ZERO; n],
        k2: vec![ZERO; n],
        k3: vec![ZERO; n],
        k4: vec![ZERO; n],
        tmp: vec![ZERO; n],
    };
    let mut stats = EvolveStats::default();
    let mut t = 0.0;
    let mut consecutive = 0;
    let mut since_psd = 0;

    while t < t_final {
        let remaining = t_final - t;
        // land exactly on t_final without a sliver step
        let steps_left = (remaining / h).ceil().max(1.0);
        let step = remaining / steps_left;

        rk4_step(&l, &x, step, &mut ws);
        let candidate = &ws.tmp;
        since_psd += 1;
        let full_check = since_psd >= PSD_CHECK_INTERVAL || remaining - step <= 0.0;
        if contracts_hold(candidate, d, full_check)? {
            x.copy_from_slice(candidate);
            t += step;
            stats.steps += 1;
            consecutive = 0;
            if full_check {
                since_psd = 0;
            }
        } else {
            stats.rejections += 1;
            consecutive += 1;
            h = step * 0.5;
            if consecutive >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::Stiffness {
                    time: t,
                    dt: h,
                    rejections: consecutive,
                });
            }
        }
    }
    stats.dt_used = h;
    let raw = devectorize(&x, d);
    let rho = DensityMatrix::new(rho0.space().clone(), raw)?;
    Ok((rho, stats))
}

fn rk4_step(l: &super::Liouvillian, x: &[c64], h: f64, ws: &mut Rk4Workspace) {
    let n = x.len();
    l.apply(x, &mut ws.k1);
    for i in 0..n {
        ws.tmp[i] = x[i] + ws.k1[i] * (0.5 * h);
    }
    l.apply(&ws.tmp, &mut ws.k2);
    for i in 0..n {
        ws.tmp[i] = x[i] + ws.k2[i] * (0.5 * h);
    }
    l.apply(&ws.tmp, &mut ws.k3);
    for i in 0..n {
        ws.tmp[i] = x[i] + ws.k3[i] * h;
    }
    l.apply(&ws.tmp, &mut ws.k4);
    for i in 0..n {
        ws.tmp[i] = x[i] + (ws.k1[i] + (ws.k2[i] + ws.k3[i]) * 2.0 + ws.k4[i]) * (h / 6.0);
    }
}

fn contracts_hold(x: &[c64], d: usize, full: bool) -> Result<bool> {
    if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Ok(false);
    }
    let mut trace = ZERO;
    for i in 0..d {
        let diag = x[i * d + i];
        if diag.re < -PSD_TOL {
            return Ok(false);
        }
        trace += diag;
    }
    if (trace - c64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Ok(false);
    }
    for j in 0..d {
        for i in 0..j {
            if (x[j * d + i] - x[i * d + j].conj()).norm() > HERMITIAN_TOL {
                return Ok(false);
            }
        }
    }
    if full {
        let m = devectorize(x, d);
        let min = crate::operator::hermitian_eigenvalues(m.as_ref())?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -PSD_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
