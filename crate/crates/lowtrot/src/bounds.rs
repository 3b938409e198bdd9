//! Closed-form analytic bounds: high-energy leakage, effective cutoffs Δ',
//! the low-energy product-formula error bound, and Trotter-number planning.
//!
//! The bound catalogue is numbered here, and the numbering is used throughout
//! the crate (record docs, sweep presets, planner fields). Conventions, all
//! logs natural: `λ = 1/(2Jdk)`, `α = eJ`, `α' = κα`.
//!
//! - **Lemma 1** (layer leakage): `‖Π_{>Λ'} e^{-isH_l} Π_{≤Λ}‖ ≤
//!   e^{-λ(Λ'-Λ)} (e^{α|s|M} - 1)`, built from the moment bound
//!   `‖Π_{>Λ'} (H_l)^n Π_{≤Λ}‖ ≤ (eMJ)^n e^{-λ(Λ'-Λ)}`.
//! - **Lemma 2** (effective layers): the band-truncated layer step
//!   `e^{-isH̄_l}` differs from the exact one, sandwiched between energy
//!   projectors, by at most the Lemma-1 leakage — or three times it in the
//!   projected variant.
//! - **Corollaries 1–4** (ladder chain): on a Λ ladder with per-rung leakage
//!   budget δ, the four step-comparison inequalities are bounded by
//!   δ, δ, 3δ, 5δ.
//! - **Theorem 1** (low-energy step error): `‖(U(s) - W_p(s))Π_{≤Δ}‖ ≤
//!   γ̃ (L Δ'(s) |s|)^{p+1}`, with the effective cutoff (for `J|s| ≤ 1`)
//!
//!   `Δ'(s) = Δ + α'|s|ML/λ + (q/λ)ln q + (q/λ)(p+1)ln(1/(J|s|))`,
//!
//!   equivalently `Δ + β₁J·ln(β₂/(J|s|)) + (≤ β₃)J²N|s|` with
//!   `β₁ = 2qdk(p+1)`, `β₂ = q^{1/(p+1)}`, `β₃ = 2ekd²κ`; the β form
//!   dominates exactly when `ML ≤ dN`.
//! - **Theorem 2** (planner): inverts Theorem 1 into the largest admissible
//!   step `s_star` via four sufficient conditions s₁–s₄ (s₄ through the
//!   function `f(z) = (ln(1/z))^{p+1} z^p`), then self-certifies the result.
//!
//! γ̃ defaults to 1 and is a user-tunable scaling proxy — the lemmas and
//! corollaries are constant-free, the Theorem-1 bound is not.

use serde::{Deserialize, Serialize};

use crate::hamiltonian::{HamiltonianSpec, SystemParams};
use crate::{Error, Result};

const E: f64 = std::f64::consts::E;

/// Inputs shared by Δ', the error bound, and the planner.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundInputs {
    pub params: SystemParams,
    /// Product-formula order.
    pub p: u32,
    /// Initial-state energy cutoff Δ (shifted convention).
    pub delta: f64,
    /// Step size.
    pub s: f64,
    /// Total evolution time.
    pub t: f64,
    /// Target total error ε.
    pub eps: f64,
    /// Leakage budget δ.
    pub delta_leak: f64,
    /// Product-formula constant γ̃ (scaling proxy; default 1).
    pub gamma_tilde: f64,
}

impl BoundInputs {
    pub fn new(params: SystemParams, p: u32) -> Self {
        Self {
            params,
            p,
            delta: 0.0,
            s: 0.1,
            t: 1.0,
            eps: 1e-3,
            delta_leak: 0.1,
            gamma_tilde: 1.0,
        }
    }
}

/// λ = 1/(2Jdk), the leakage suppression rate.
pub fn lambda_rate(params: &SystemParams) -> f64 {
    1.0 / (2.0 * params.j * params.d as f64 * params.k as f64)
}

/// α = eJ.
pub fn alpha_rate(params: &SystemParams) -> f64 {
    E * params.j
}

/// α' = κα.
pub fn alpha_prime(params: &SystemParams) -> f64 {
    params.kappa * alpha_rate(params)
}

fn check_band(lo: f64, hi: f64) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput("non-finite energy band".into()));
    }
    // Small negative slack: shifted spectra sit at 0 up to roundoff.
    if lo < -1e-6 {
        return Err(Error::InvalidInput(format!(
            "Λ = {lo} < 0 (bounds assume the shifted convention H ≥ 0)"
        )));
    }
    if hi < lo {
        return Err(Error::InvalidInput(format!("Λ' = {hi} < Λ = {lo}")));
    }
    Ok(())
}

fn check_structural(params: &SystemParams) -> Result<()> {
    if params.j <= 0.0 || params.d == 0 || params.k == 0 || params.m == 0 || params.l == 0 {
        return Err(Error::InvalidInput(
            "bounds need positive J, d, k, M, L".into(),
        ));
    }
    Ok(())
}

/// Lemma-1 leakage bound `e^{-λ(Λ'-Λ)} (e^{α|s|M} - 1)` for one layer step.
pub fn leakage_bound(lo: f64, hi: f64, s: f64, params: &SystemParams) -> Result<f64> {
    check_band(lo, hi)?;
    check_structural(params)?;
    let lam = lambda_rate(params);
    let alpha = alpha_rate(params);
    Ok((-lam * (hi - lo)).exp() * ((alpha * s.abs() * params.m as f64).exp_m1()))
}

/// Moment bound `(eMJ)^n e^{-λ(Λ'-Λ)}` on `‖Π_{>Λ'} (H_l)^n Π_{≤Λ}‖`.
pub fn moment_leakage_bound(n: u32, lo: f64, hi: f64, params: &SystemParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("moment order n must be ≥ 1".into()));
    }
    check_band(lo, hi)?;
    check_structural(params)?;
    let lam = lambda_rate(params);
    Ok((E * params.m as f64 * params.j).powi(n as i32) * (-lam * (hi - lo)).exp())
}

/// Which Lemma-2 inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectiveLeakageKind {
    /// `‖Π_{≤Λ'} (e^{-isH̄_l} - e^{-isH_l}) Π_{≤Λ}‖`.
    Sandwiched,
    /// `‖(e^{-isH̄_l} - e^{-isH_l}) Π_{≤Λ}‖` — 3× the sandwiched bound.
    Projected,
}

/// Lemma-2 bound for the effective-vs-exact layer step difference.
pub fn effective_leakage_bound(
    lo: f64,
    hi: f64,
    s: f64,
    params: &SystemParams,
    kind: EffectiveLeakageKind,
) -> Result<f64> {
    let base = leakage_bound(lo, hi, s, params)?;
    Ok(match kind {
        EffectiveLeakageKind::Sandwiched => base,
        EffectiveLeakageKind::Projected => 3.0 * base,
    })
}

/// Corollary 1–4 right-hand sides: δ, δ, 3δ, 5δ.
pub fn corollary_bound(which: u8, delta_leak: f64) -> Result<f64> {
    if !(delta_leak > 0.0) {
        return Err(Error::InvalidInput(format!(
            "leakage budget δ must be > 0, got {delta_leak}"
        )));
    }
    let factor = match which {
        1 | 2 => 1.0,
        3 => 3.0,
        4 => 5.0,
        other => {
            return Err(Error::InvalidInput(format!(
                "corollary index {other} not in 1..=4"
            )))
        }
    };
    Ok(factor * delta_leak)
}

/// Effective cutoff in both algebraic forms, plus the β constants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaPrime {
    /// `Δ + α'|s|ML/λ + (q/λ)ln q + (q/λ)(p+1)ln(1/(J|s|))`.
    pub exact: f64,
    /// `Δ + β₁J·ln(β₂/(J|s|)) + β₃J²N|s|` with the β₃ upper bound.
    pub beta_form: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

fn check_bound_inputs(inputs: &BoundInputs) -> Result<f64> {
    check_structural(&inputs.params)?;
    if inputs.p < 1 {
        return Err(Error::InvalidInput("order p must be ≥ 1".into()));
    }
    if inputs.params.q < 2 {
        return Err(Error::InvalidInput(format!(
            "schedule length q = {} must be ≥ 2 (attach a schedule to params)",
            inputs.params.q
        )));
    }
    if inputs.params.kappa < 1.0 - 1e-12 {
        return Err(Error::InvalidInput(format!(
            "κ = {} must be ≥ 1",
            inputs.params.kappa
        )));
    }
    if inputs.delta < 0.0 {
        return Err(Error::InvalidInput(format!(
            "Δ = {} must be ≥ 0 in the shifted convention",
            inputs.delta
        )));
    }
    let js = inputs.params.j * inputs.s.abs();
    if js <= 0.0 {
        return Err(Error::InvalidInput("J|s| must be > 0".into()));
    }
    if js > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "J|s| = {js} exceeds 1 (the error bound requires J|s| ≤ 1)"
        )));
    }
    Ok(js)
}

/// Evaluate Δ'(s) for the given inputs. Requires `0 < J|s| ≤ 1` and `q ≥ 2`.
pub fn delta_prime(inputs: &BoundInputs) -> Result<DeltaPrime> {
    let js = check_bound_inputs(inputs)?;
    let p = &inputs.params;
    let lam = lambda_rate(p);
    let ap = alpha_prime(p);
    let (q, ml) = (p.q as f64, (p.m * p.l) as f64);
    let pp1 = (inputs.p + 1) as f64;
    let exact = inputs.delta
        + ap * inputs.s.abs() * ml / lam
        + q / lam * q.ln()
        + q / lam * pp1 * (1.0 / js).ln();
    let beta1 = 2.0 * q * (p.d * p.k) as f64 * pp1;
    let beta2 = q.powf(1.0 / pp1);
    let beta3 = 2.0 * E * p.k as f64 * (p.d * p.d) as f64 * p.kappa;
    let beta_form = inputs.delta
        + beta1 * p.j * (beta2 / js).ln()
        + beta3 * p.j * p.j * p.n as f64 * inputs.s.abs();
    Ok(DeltaPrime {
        exact,
        beta_form,
        beta1,
        beta2,
        beta3,
    })
}

/// Theorem-1 error bound for one step, with diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem1Bound {
    /// `γ̃ (L Δ'(s) |s|)^{p+1}` — scaling proxy unless γ̃ is calibrated.
    pub error: f64,
    /// The leakage budget the Δ' choice realizes: `δ(Δ') = (J|s|)^{p+1}`.
    pub delta_of_dp: f64,
    pub delta_prime: DeltaPrime,
}

pub fn theorem1_error_bound(inputs: &BoundInputs) -> Result<Theorem1Bound> {
    let dp = delta_prime(inputs)?;
    let js = inputs.params.j * inputs.s.abs();
    let pp1 = (inputs.p + 1) as i32;
    let error = inputs.gamma_tilde
        * (inputs.params.l as f64 * dp.exact * inputs.s.abs()).powi(pp1);
    Ok(Theorem1Bound {
        error,
        delta_of_dp: js.powi(pp1),
        delta_prime: dp,
    })
}

/// Diagnostics of `f(z) = (ln(1/z))^{p+1} z^p` used by step condition s₄.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FDiagnostics {
    /// Stationary point `z_M = e^{-(p+1)/p}`; f increases on `[0, z_M]`.
    pub z_m: f64,
    /// `f(z_M) = ((1+1/p)/e)^{p+1} ≤ 4/e²`.
    pub f_max: f64,
    /// Analytic admissible step `z₁' = X^{1/p}/(e² ln(e²/X))^{(p+1)/p}`,
    /// present only when the condition binds.
    pub z1_prime: Option<f64>,
    /// False when `X ≥ f_max`: then `f(z) ≤ X` holds for every z ∈ [0,1].
    pub binding: bool,
}

/// Evaluate `f(z)`.
pub fn f_of_z(p: u32, z: f64) -> f64 {
    (1.0 / z).ln().powi(p as i32 + 1) * z.powi(p as i32)
}

pub fn f_diagnostics(p: u32, x: f64) -> Result<FDiagnostics> {
    if p < 1 {
        return Err(Error::InvalidInput("order p must be ≥ 1".into()));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "f-threshold X must be positive and finite, got {x}"
        )));
    }
    let pf = p as f64;
    let z_m = (-(pf + 1.0) / pf).exp();
    let f_max = ((1.0 + 1.0 / pf) / E).powf(pf + 1.0);
    let binding = x < f_max;
    let z1_prime = binding.then(|| {
        x.powf(1.0 / pf) / (E * E * (E * E / x).ln()).powf((pf + 1.0) / pf)
    });
    Ok(FDiagnostics {
        z_m,
        f_max,
        z1_prime,
        binding,
    })
}

/// Which constraint fixed the planner's step size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    JsCap,
    S1,
    S2,
    S3,
    S4,
}

/// The four sufficient step conditions; `None` means non-binding.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepConstraints {
    /// From the Δ term; non-binding at Δ = 0.
    pub s1: Option<f64>,
    /// From the α'|s|ML/λ term (drives the N-scaling).
    pub s2: f64,
    /// From the (q/λ)ln q term.
    pub s3: f64,
    /// From the logarithmic term via f(z); non-binding when X ≥ f_max.
    pub s4: Option<f64>,
}

/// Self-check: the chosen step plugged back into the error-per-step
/// condition `γ̃ (L Δ'(s*) s*)^{p+1} ≤ ε s*/(2t)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Certificate {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Planner output.
#[derive(Debug, Clone, Serialize)]
pub struct PlanResult {
    /// Trotter number `r = ceil(t/s_star)` (kept as f64: it can exceed
    /// integer range in scaling studies).
    pub r: f64,
    /// Un-ceiled `t/s_star`, the quantity regressions should use.
    pub r_real: f64,
    pub s_star: f64,
    pub binding: Binding,
    pub pieces: StepConstraints,
    pub certificate: Certificate,
    /// Comparison Trotter number r̃ of the prior (norm-based) bound, when a
    /// concrete Hamiltonian is available.
    pub r_prior: Option<f64>,
    pub norms: Option<HamiltonianNorms>,
}

/// Theorem-2 planner: largest admissible step `s_star = min(1/J, s₁..s₄)`
/// and the resulting Trotter number, self-certified.
pub fn trotter_number(inputs: &BoundInputs) -> Result<PlanResult> {
    check_structural(&inputs.params)?;
    if !(inputs.t > 0.0) || !inputs.t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "total time t must be > 0, got {}",
            inputs.t
        )));
    }
    if !(inputs.eps > 0.0 && inputs.eps <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "target error ε must be in (0,1], got {}",
            inputs.eps
        )));
    }
    if !(inputs.gamma_tilde > 0.0) {
        return Err(Error::InvalidInput("γ̃ must be > 0".into()));
    }
    if inputs.params.q < 2 {
        return Err(Error::InvalidInput(format!(
            "schedule length q = {} must be ≥ 2",
            inputs.params.q
        )));
    }
    if inputs.delta < 0.0 {
        return Err(Error::InvalidInput("Δ must be ≥ 0".into()));
    }
    let p = &inputs.params;
    let pf = inputs.p as f64;
    let (lf, mf, qf) = (p.l as f64, p.m as f64, p.q as f64);
    let lam = lambda_rate(p);
    let ap = alpha_prime(p);
    let a = inputs.eps / (2.0 * inputs.gamma_tilde * inputs.t);

    let s1 = (inputs.delta > 0.0)
        .then(|| a.powf(1.0 / pf) / (4.0 * lf * inputs.delta).powf(1.0 + 1.0 / pf));
    let s2 = a.powf(1.0 / (2.0 * pf + 1.0))
        * (lam / (4.0 * ap * mf * lf * lf)).powf((pf + 1.0) / (2.0 * pf + 1.0));
    let s3 = a.powf(1.0 / pf) * (lam / (4.0 * lf * qf * qf.ln())).powf(1.0 + 1.0 / pf);
    let x = a * (lam / (4.0 * lf * qf * (pf + 1.0))).powf(pf + 1.0) * p.j.powf(pf);
    let fd = f_diagnostics(inputs.p, x)?;
    let s4 = fd.z1_prime.map(|z| z / p.j);

    let mut s_star = 1.0 / p.j;
    let mut binding = Binding::JsCap;
    for (cand, which) in [
        (s1, Binding::S1),
        (Some(s2), Binding::S2),
        (Some(s3), Binding::S3),
        (s4, Binding::S4),
    ] {
        if let Some(v) = cand {
            if v < s_star {
                s_star = v;
                binding = which;
            }
        }
    }
    if !(s_star > 0.0) || !s_star.is_finite() {
        return Err(Error::InvalidInput(format!(
            "planner step collapsed to {s_star} (inputs out of float range)"
        )));
    }
    let r_real = inputs.t / s_star;
    let r = r_real.ceil();

    let cert_inputs = BoundInputs {
        s: s_star,
        ..*inputs
    };
    let dp = delta_prime(&cert_inputs)?;
    let lhs = inputs.gamma_tilde * (lf * dp.exact * s_star).powf(pf + 1.0);
    let rhs = inputs.eps * s_star / (2.0 * inputs.t);
    let certificate = Certificate {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 1e-9),
    };
    Ok(PlanResult {
        r,
        r_real,
        s_star,
        binding,
        pieces: StepConstraints { s1, s2, s3, s4 },
        certificate,
        r_prior: None,
        norms: None,
    })
}

/// Grouped-mode Trotter number (the Δ+J grouping of the main-text bound,
/// constant-1 convention):
/// `r' = (t(Δ+J))^{1+1/p}/ε^{1/p} + (tJ√N)^{1+1/(2p+1)}/ε^{1/(2p+1)}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroupedPlan {
    pub r_grouped: f64,
    /// The (t(Δ+J))-driven term.
    pub term_gap: f64,
    /// The (tJ√N)-driven term.
    pub term_sqrt_n: f64,
}

pub fn grouped_trotter_number(inputs: &BoundInputs) -> Result<GroupedPlan> {
    check_structural(&inputs.params)?;
    if !(inputs.t > 0.0) || !(inputs.eps > 0.0 && inputs.eps <= 1.0) {
        return Err(Error::InvalidInput(
            "grouped planner needs t > 0 and ε ∈ (0,1]".into(),
        ));
    }
    if inputs.delta < 0.0 {
        return Err(Error::InvalidInput("Δ must be ≥ 0".into()));
    }
    let pf = inputs.p as f64;
    let term_gap = (inputs.t * (inputs.delta + inputs.params.j)).powf(1.0 + 1.0 / pf)
        / inputs.eps.powf(1.0 / pf);
    let term_sqrt_n = (inputs.t * inputs.params.j * (inputs.params.n as f64).sqrt())
        .powf(1.0 + 1.0 / (2.0 * pf + 1.0))
        / inputs.eps.powf(1.0 / (2.0 * pf + 1.0));
    Ok(GroupedPlan {
        r_grouped: (term_gap + term_sqrt_n).ceil(),
        term_gap,
        term_sqrt_n,
    })
}

/// `‖H‖₁ = Σ_i ‖h_i‖` and `‖H‖_{ind-1} = max_site Σ_{i ∋ site} ‖h_i‖`
/// (post-shift norms, consistent with the J convention).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HamiltonianNorms {
    pub one_norm: f64,
    pub induced_one_norm: f64,
}

pub fn hamiltonian_norms(spec: &HamiltonianSpec) -> Result<HamiltonianNorms> {
    let mut one_norm = 0.0;
    let mut per_site = vec![0.0f64; spec.n_sites];
    for t in &spec.terms {
        let s = t.strength()?;
        one_norm += s;
        for &site in &t.sites {
            per_site[site] += s;
        }
    }
    let induced_one_norm = per_site.iter().copied().fold(0.0, f64::max);
    let p = &spec.params;
    if induced_one_norm > p.d as f64 * p.j + 1e-9 {
        return Err(Error::InvalidInput(format!(
            "‖H‖_ind-1 = {induced_one_norm} exceeds dJ = {} (inconsistent spec)",
            p.d as f64 * p.j
        )));
    }
    if one_norm > (p.m * p.l) as f64 * p.j + 1e-9 {
        return Err(Error::InvalidInput(format!(
            "‖H‖₁ = {one_norm} exceeds JML = {} (inconsistent spec)",
            (p.m * p.l) as f64 * p.j
        )));
    }
    Ok(HamiltonianNorms {
        one_norm,
        induced_one_norm,
    })
}

/// Prior norm-based comparison bound (constant-1 convention, scaling proxy):
/// `r̃ = ceil(t^{1+1/p} / ε^{1/p} · ‖H‖_{ind-1} · ‖H‖₁^{1/p})`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PriorPlan {
    pub r_tilde: f64,
    pub norms: HamiltonianNorms,
}

pub fn prior_trotter_number(
    spec: &HamiltonianSpec,
    t: f64,
    eps: f64,
    p: u32,
) -> Result<PriorPlan> {
    if !(t > 0.0) || !(eps > 0.0 && eps <= 1.0) || p < 1 {
        return Err(Error::InvalidInput(
            "prior planner needs t > 0, ε ∈ (0,1], p ≥ 1".into(),
        ));
    }
    let norms = hamiltonian_norms(spec)?;
    let pf = p as f64;
    let r_tilde = (t.powf(1.0 + 1.0 / pf) / eps.powf(1.0 / pf)
        * norms.induced_one_norm
        * norms.one_norm.powf(1.0 / pf))
    .ceil();
    Ok(PriorPlan { r_tilde, norms })
}
