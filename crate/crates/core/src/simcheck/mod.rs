//! Certification of (Δ, η, ε)-simulations and the guarantees that follow from them.

mod bounds;

pub use bounds::{
    compose_budget, noise_roundtrip, partition_check, time_evolution_check, Budget, NoiseReport,
    PartitionMode, PartitionReport, TimePoint,
};

use crate::config::Config;
use crate::encodings::Encoding;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{c, eigvalsh, eye, op_norm, polar_unitary, projector_rank, Mat};
use crate::hamcore::{diagonalize_with, low_energy_projector, Hamiltonian, Spectrum};
use serde::Serialize;

/// Outcome of checking H′ against E(H) below a cutoff. Field order is the serialization
/// order.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub delta: f64,
    pub eta_measured: f64,
    /// √2·‖P_{≤Δ} − E(1)‖, the alignment bound on η.
    pub eta_bound: f64,
    /// ‖H′_{≤Δ} − Ẽ(H)‖ in operator norm.
    pub eps_measured: f64,
    /// For target eigenvalue i, the largest |λ_i(H) − λ_j(H′)| over its block of p+q
    /// simulator eigenvalues.
    pub per_eigenvalue_errors: Vec<f64>,
    pub max_eigenvalue_error: f64,
    pub low_rank: usize,
    pub requested_eta: Option<f64>,
    pub requested_eps: Option<f64>,
    pub partition: Option<PartitionReport>,
    pub time_evolution: Vec<TimePoint>,
    pub noise: Option<NoiseReport>,
    pub pass: bool,
}

impl SimulationReport {
    /// Sets the requested (η, ε) and recomputes `pass`.
    pub fn judge(mut self, eta: f64, eps: f64) -> Self {
        self.requested_eta = Some(eta);
        self.requested_eps = Some(eps);
        self.refresh();
        self
    }

    /// `pass` from the requested tolerances and every attached downstream bound.
    pub fn refresh(&mut self) {
        let mut ok = self.eta_measured.is_finite() && self.eps_measured.is_finite();
        if let Some(eta) = self.requested_eta {
            ok &= self.eta_measured <= eta;
        }
        if let Some(eps) = self.requested_eps {
            ok &= self.eps_measured <= eps && self.max_eigenvalue_error <= eps;
        }
        if let Some(p) = &self.partition {
            ok &= p.relative_error <= p.bound;
        }
        ok &= self
            .time_evolution
            .iter()
            .all(|t| t.trace_distance <= t.bound && t.f_distance <= t.bound);
        if let Some(n) = &self.noise {
            ok &= n.distance <= n.bound;
        }
        self.pass = ok;
    }

    /// Key-value text, one field per line, in declaration order.
    pub fn to_text(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                out.push_str(&format!("{k}: {v}\n"));
            }
        }
        out
    }
}

/// Encoding whose isometry has been rotated onto the low-energy subspace.
#[derive(Debug, Clone)]
pub struct Aligned {
    pub encoding: Encoding,
    /// ‖P_{≤Δ} − E(1)‖.
    pub distance: f64,
    /// ‖Ṽ − V‖.
    pub eta: f64,
    /// √2 · distance.
    pub bound: f64,
}

/// Ṽ = U·V with U the unitary polar factor of P·E(1) + (1 − P)(1 − E(1)), which carries the
/// encoded subspace onto the range of `p_low`.
pub fn align_isometry(e: &Encoding, p_low: &Mat) -> Result<Aligned> {
    let d = e.dim_out();
    if p_low.shape() != (d, d) {
        return Err(Error::DimMismatch(
            "projector does not match the simulator space".into(),
        ));
    }
    let e1 = e.encoded_projector();
    let low = projector_rank(p_low);
    let enc = e.dim_in * (e.p + e.q);
    if low != enc {
        return Err(Error::RankMismatch { low, encoded: enc });
    }
    let distance = op_norm(&(p_low - &e1));
    if distance >= 1.0 - 1e-12 {
        return Err(Error::TooFar(distance));
    }
    let one = eye(d);
    let a = p_low * &e1 + (&one - p_low) * (&one - &e1);
    let u = polar_unitary(&a);
    let v_new = &u * &e.v;
    let eta = op_norm(&(&v_new - &e.v));
    let mut aligned = e.clone();
    aligned.v = v_new;
    Ok(Aligned {
        encoding: aligned,
        distance,
        eta,
        bound: std::f64::consts::SQRT_2 * distance,
    })
}

/// Assembles both Hamiltonians and runs [`verify_dense`].
pub fn verify_simulation(
    h: &Hamiltonian,
    h_sim: &Hamiltonian,
    e: &Encoding,
    delta: f64,
) -> Result<SimulationReport> {
    let cfg = Config::from_env();
    let hm = h.assemble_capped(cfg.dim_cap)?;
    let hp = h_sim.assemble_capped(cfg.dim_cap)?;
    verify_dense(&hm, &hp, e, delta, &cfg)
}

/// Measures η and ε for H′ against the encoding of H below the cutoff Δ.
pub fn verify_dense(
    h: &Mat,
    h_sim: &Mat,
    e: &Encoding,
    delta: f64,
    cfg: &Config,
) -> Result<SimulationReport> {
    let spec = diagonalize_with(h_sim, cfg)?;
    verify_with_spectrum(h, &spec, e, delta)
}

/// As [`verify_dense`] with the simulator spectrum already computed.
pub fn verify_with_spectrum(
    h: &Mat,
    spec: &Spectrum,
    e: &Encoding,
    delta: f64,
) -> Result<SimulationReport> {
    if h.nrows() != e.dim_in || spec.dim() != e.dim_out() {
        return Err(Error::DimMismatch(format!(
            "encoding maps {} → {}, Hamiltonians have {} and {}",
            e.dim_in,
            e.dim_out(),
            h.nrows(),
            spec.dim()
        )));
    }
    let copies = e.p + e.q;
    let expected = e.dim_in * copies;
    let low = spec.count_below(delta);
    if low != expected {
        return Err(Error::SubspaceMismatch { low, expected });
    }
    let p_low = low_energy_projector(spec, delta)?;
    let aligned = align_isometry(e, &p_low)?;
    // H′ restricted below the cutoff, rebuilt from the low eigenpairs to avoid the O(Δ)
    // rounding of a dense product
    let vl = spec.low_vectors(delta);
    let mut scaled = vl.clone();
    for j in 0..low {
        scaled.column_mut(j).scale_mut(spec.eigenvalues[j]);
    }
    let h_low = &scaled * vl.adjoint();
    let eps = op_norm(&(&h_low - aligned.encoding.apply(h)?));
    let target = eigvalsh(h);
    let sim_low = &spec.eigenvalues[..low];
    let per: Vec<f64> = target
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            sim_low[i * copies..(i + 1) * copies]
                .iter()
                .fold(0.0, |m: f64, &x| m.max((x - l).abs()))
        })
        .collect();
    let max_err = per.iter().fold(0.0, |m: f64, &x| m.max(x));
    let mut report = SimulationReport {
        delta,
        eta_measured: aligned.eta,
        eta_bound: aligned.bound,
        eps_measured: eps,
        per_eigenvalue_errors: per,
        max_eigenvalue_error: max_err,
        low_rank: low,
        requested_eta: None,
        requested_eps: None,
        partition: None,
        time_evolution: vec![],
        noise: None,
        pass: false,
    };
    report.refresh();
    Ok(report)
}

/// Downstream checks to run on a verified pair.
#[derive(Debug, Clone, Default)]
pub struct Downstream {
    /// Inverse temperature for the partition-function check.
    pub beta: Option<f64>,
    pub times: Vec<f64>,
    /// Initial target state for the time evolution; a fixed seeded density matrix if None.
    pub rho: Option<Mat>,
    /// Depolarizing channel (simulator qubit, probability) for the noise check.
    pub noise: Option<(usize, f64)>,
}

/// Kraus operators of single-qubit depolarizing noise with probability `p` on `site`.
pub fn depolarizing(site: usize, n: usize, p: f64) -> Vec<Mat> {
    use crate::hamcore::{embed, Pauli};
    let id = embed(&(eye(2) * c((1.0 - 0.75 * p).sqrt())), &[site], n, 2);
    let mut out = vec![id];
    for l in [Pauli::X, Pauli::Y, Pauli::Z] {
        out.push(embed(&(l.matrix() * c((0.25 * p).sqrt())), &[site], n, 2));
    }
    out
}

/// Runs the checks in `opts` against the pair behind `report`, using its measured η and ε,
/// and re-judges it.
pub fn attach_downstream(
    mut report: SimulationReport,
    h: &Mat,
    spec: &Spectrum,
    e: &Encoding,
    opts: &Downstream,
) -> Result<SimulationReport> {
    let (eps, eta, delta) = (report.eps_measured, report.eta_measured, report.delta);
    if let Some(beta) = opts.beta {
        report.partition = Some(partition_check(
            h,
            spec,
            e,
            delta,
            beta,
            eps,
            PartitionMode::Trace,
        )?);
    }
    let rho = match &opts.rho {
        Some(r) => r.clone(),
        None => {
            crate::hamcore::random::random_density(e.dim_in, &mut crate::hamcore::random::seeded(0))
        }
    };
    if !opts.times.is_empty() {
        report.time_evolution = time_evolution_check(h, spec, e, &rho, &opts.times, eps, eta)?;
    }
    if let Some((site, p)) = opts.noise {
        let n = e.locality.as_ref().ok_or(Error::NotLocalEncoding)?.n_out;
        let p_low = low_energy_projector(spec, delta)?;
        report.noise = Some(noise_roundtrip(
            e,
            &p_low,
            &depolarizing(site, n, p),
            &rho,
            eta,
        )?);
    }
    report.refresh();
    Ok(report)
}
