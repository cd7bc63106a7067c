//! Partition function, time evolution, noise and composition bounds.

use super::SimulationReport;
use crate::encodings::Encoding;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{
    c, eigvalsh, eye, max_abs_diff, op_norm, partial_trace_keep, projector_range, trace,
    trace_norm, Mat, C64,
};
use crate::hamcore::{embed, Spectrum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PartitionMode {
    /// Compare Z_{H′} with (p+q)·Z_H.
    Trace,
    /// Additionally compare the Gibbs energy through the Gibbs measurement map.
    Gibbs,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub beta: f64,
    pub relative_error: f64,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_energy_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimePoint {
    pub t: f64,
    /// ‖e^{−iH′t}ρ′e^{iH′t} − E_state(e^{−iHt}ρe^{iHt})‖₁.
    pub trace_distance: f64,
    /// ‖F(e^{−iH′t}ρ′e^{iH′t}) − e^{−iHt}F(ρ′)e^{iHt}‖₁.
    pub f_distance: f64,
    /// 2εt + 4η.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseReport {
    /// 1 − tr[P_{≤Δ} N′(ρ′)].
    pub delta_leak: f64,
    /// ‖N′(ρ′) − E(1)N′(ρ′)E(1)‖₁.
    pub distance: f64,
    /// √(δ(4 − 3δ)) + 8η.
    pub bound: f64,
    /// ‖E(1)N′(ρ′)E(1) − E_state(N(ρ))‖₁.
    pub strong_distance: f64,
    /// Number of original sites each induced Kraus operator acts on.
    pub induced_support: Vec<usize>,
    #[serde(skip)]
    pub induced_kraus: Vec<Mat>,
}

/// Budget of a composed simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    pub delta: f64,
    pub eta: f64,
    pub eps: f64,
}

fn log_sum_exp(vals: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = vals.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// |Z_{H′}(β) − (p+q)Z_H(β)| / ((p+q)Z_H(β)) against
/// d′e^{−βΔ}/((p+q)·d·e^{−β‖H‖}) + (e^{εβ} − 1), where d, d′ are the full dimensions.
pub fn partition_check(
    h: &Mat,
    sim: &Spectrum,
    e: &Encoding,
    delta: f64,
    beta: f64,
    eps: f64,
    mode: PartitionMode,
) -> Result<PartitionReport> {
    let lh = eigvalsh(h);
    let copies = (e.p + e.q) as f64;
    let ln_z = log_sum_exp(lh.iter().map(|l| -beta * l));
    let ln_zp = log_sum_exp(sim.eigenvalues.iter().map(|l| -beta * l));
    let ratio = (ln_zp - ln_z - copies.ln()).exp();
    let relative_error = (ratio - 1.0).abs();
    let norm_h = lh.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let d = lh.len() as f64;
    let dp = sim.dim() as f64;
    let shell = (dp.ln() - beta * delta - copies.ln() - d.ln() + beta * norm_h).exp();
    let bound = shell + ((eps * beta).exp() - 1.0);
    let gibbs_energy_error = match mode {
        PartitionMode::Trace => None,
        PartitionMode::Gibbs => {
            let a = e.emeas_gibbs(h)?;
            let shift = sim.eigenvalues.first().copied().unwrap_or(0.0);
            let weights: Vec<C64> = sim
                .eigenvalues
                .iter()
                .map(|l| c((-beta * (l - shift)).exp()))
                .collect();
            let zp: f64 = weights.iter().map(|w| w.re).sum();
            let mut rho_p = sim.eigenvectors.clone();
            for (j, w) in weights.iter().enumerate() {
                rho_p.column_mut(j).scale_mut(w.re / zp);
            }
            let rho_p = rho_p * sim.eigenvectors.adjoint();
            let sim_energy = trace(&(&a * rho_p)).re;
            let hs = lh[0];
            let z: f64 = lh.iter().map(|l| (-beta * (l - hs)).exp()).sum();
            let energy: f64 = lh.iter().map(|l| l * (-beta * (l - hs)).exp()).sum::<f64>() / z;
            Some((sim_energy - energy).abs())
        }
    };
    Ok(PartitionReport {
        beta,
        relative_error,
        bound,
        gibbs_energy_error,
    })
}

fn evolve(spec: &Spectrum, t: f64) -> Mat {
    let mut scaled = spec.eigenvectors.clone();
    for (j, &l) in spec.eigenvalues.iter().enumerate() {
        let z = C64::from_polar(1.0, -l * t);
        scaled.column_mut(j).iter_mut().for_each(|x| *x *= z);
    }
    scaled * spec.eigenvectors.adjoint()
}

/// Trace distances of simulated against encoded evolution of ρ, with ρ′ = E_state(ρ) for the
/// default ancilla state.
pub fn time_evolution_check(
    h: &Mat,
    sim: &Spectrum,
    e: &Encoding,
    rho: &Mat,
    times: &[f64],
    eps: f64,
    eta: f64,
) -> Result<Vec<TimePoint>> {
    let sigma = e.default_ancilla_state();
    let rho_p = e.estate(rho, &sigma)?;
    let target = crate::hamcore::diagonalize(h)?;
    let (f0, _) = e.fb_maps(&rho_p)?;
    let mut out = vec![];
    for &t in times {
        let up = evolve(sim, t);
        let u = evolve(&target, t);
        let lhs = &up * &rho_p * up.adjoint();
        let rhs = e.estate(&(&u * rho * u.adjoint()), &sigma)?;
        let (f, _) = e.fb_maps(&lhs)?;
        out.push(TimePoint {
            t,
            trace_distance: trace_norm(&(&lhs - rhs)),
            f_distance: trace_norm(&(f - &u * &f0 * u.adjoint())),
            bound: 2.0 * eps * t + 4.0 * eta,
        });
    }
    Ok(out)
}

/// Pushes a simulator-side channel through a local encoding with rank(P) = 1. `kraus` are
/// full simulator-space operators, `p_low` the simulator's low-energy projector.
pub fn noise_roundtrip(
    e: &Encoding,
    p_low: &Mat,
    kraus: &[Mat],
    rho: &Mat,
    eta: f64,
) -> Result<NoiseReport> {
    let loc = e.locality.as_ref().ok_or(Error::NotLocalEncoding)?;
    if e.p != 1 {
        return Err(Error::RankPNotOne(e.p));
    }
    let d = e.dim_out();
    let mut tp = Mat::zeros(d, d);
    for k in kraus {
        if k.shape() != (d, d) {
            return Err(Error::DimMismatch("Kraus operator size".into()));
        }
        tp += k.adjoint() * k;
    }
    if max_abs_diff(&tp, &eye(d)) > 1e-9 {
        return Err(Error::Invalid(
            "Kraus operators are not trace preserving".into(),
        ));
    }
    let psi = projector_range(&e.proj_p);
    let w = &e.v * crate::hamcore::linalg::kron(&eye(e.dim_in), &psi);
    let sigma = &psi * psi.adjoint();
    let rho_p = e.estate(rho, &sigma)?;
    let mut out_p = Mat::zeros(d, d);
    for k in kraus {
        out_p += k * &rho_p * k.adjoint();
    }
    let induced: Vec<Mat> = kraus.iter().map(|k| w.adjoint() * k * &w).collect();
    let mut n_rho = Mat::zeros(e.dim_in, e.dim_in);
    for nk in &induced {
        n_rho += nk * rho * nk.adjoint();
    }
    let e1 = e.encoded_projector();
    let projected = &e1 * &out_p * &e1;
    let strong_distance = trace_norm(&(&projected - e.estate(&n_rho, &sigma)?));
    let delta_leak = (1.0 - trace(&(p_low * &out_p)).re).max(0.0);
    let distance = trace_norm(&(&out_p - &projected));
    let bound = (delta_leak * (4.0 - 3.0 * delta_leak)).max(0.0).sqrt() + 8.0 * eta;
    let dims = vec![loc.d_in; loc.n_in];
    let induced_support = induced.iter().map(|nk| support_size(nk, &dims)).collect();
    Ok(NoiseReport {
        delta_leak,
        distance,
        bound,
        strong_distance,
        induced_support,
        induced_kraus: induced,
    })
}

/// Number of tensor factors an operator acts on nontrivially.
pub fn support_size(m: &Mat, dims: &[usize]) -> usize {
    let n = dims.len();
    let scale = 1.0 + op_norm(m);
    (0..n)
        .filter(|&s| {
            let rest: Vec<usize> = (0..n).filter(|&k| k != s).collect();
            let reduced = partial_trace_keep(m, dims, &rest) / c(dims[s] as f64);
            let rebuilt = embed(&reduced, &rest, n, dims[s]);
            max_abs_diff(&rebuilt, m) > 1e-9 * scale
        })
        .count()
}

/// Budget of "A simulates C" from "A simulates B" (`r_ab`) and "B simulates C" (`r_bc`),
/// with c₁ = 2√2 in the correction terms.
pub fn compose_budget(
    r_ab: &SimulationReport,
    r_bc: &SimulationReport,
    norm_c: f64,
) -> Result<Budget> {
    let (eps_a, eta_a) = (r_ab.eps_measured, r_ab.eta_measured);
    let (eps_b, eta_b, delta_b) = (r_bc.eps_measured, r_bc.eta_measured, r_bc.delta);
    if eps_a > norm_c || eps_b > norm_c {
        return Err(Error::BudgetViolation(format!(
            "ε_A = {eps_a}, ε_B = {eps_b} exceed ‖C‖ = {norm_c}"
        )));
    }
    if delta_b < norm_c + 2.0 * eps_a + eps_b {
        return Err(Error::BudgetViolation(format!(
            "Δ_B = {delta_b} is below ‖C‖ + 2ε_A + ε_B"
        )));
    }
    let c1 = 2.0 * std::f64::consts::SQRT_2;
    let denom = delta_b - norm_c + eps_b;
    Ok(Budget {
        delta: delta_b - eps_a,
        eta: eta_a + eta_b + c1 * eps_a / denom,
        eps: eps_a + eps_b + c1 * eps_a * norm_c / denom,
    })
}
