//! Product-formula schedules and their application as operator products.
//!
//! A schedule of order `p` is an ordered list of steps `(l_j, c_j)`, meaning
//! step `j` applies `exp(-i c_j s H_{l_j})`; the formula is the product
//! `W_p(s) = step_q ⋯ step_1` (step 1 acts first). Layer indices are
//! 0-based. Lie (`p = 1`), Strang (`p = 2`, palindromic, `q = 2L-1`) and the
//! even-order Suzuki recursion
//! `S_{2m}(s) = S_{2m-2}(u_m s)² S_{2m-2}((1-4u_m)s) S_{2m-2}(u_m s)²` with
//! `u_m = 1/(4 - 4^{1/(2m-1)})` are built in; step counts stay within
//! `q ≤ 5^p L` and weights `Σ_j |c_j|` within `c^p L`, `c ≈ 2.32`.
//!
//! Four application variants: exact layers; effective layers
//! `H̄_l = Π_{≤Δ'} H_l Π_{≤Δ'}` (giving `W̄`); projector ladders interleaving
//! `Π_{≤Λ_j}` after each step (giving `W^Λ`); and both at once (`W̄^Λ`). The
//! ladder uses the minimal admissible rung spacing
//! `Λ_j - Λ_{j-1} = (α |s_j| M + ln(q/δ))/λ` with `α = eJ`, `λ = 1/(2Jdk)`,
//! starting from `Λ_0 = Δ`.

use serde::{Deserialize, Serialize};

use crate::hamiltonian::SystemParams;
use crate::linalg::{expm_i, identity, CMat, EigenSystem, HermitianOperator};
use crate::spectral::{effective, projector_le, EnergyProjector};
use crate::{tol, Error, Result};

/// Ordered product-formula schedule; see the module docs for conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    p: u32,
    /// Intended layer count L (every layer 0..L-1 appears in the steps).
    layers: usize,
    steps: Vec<(usize, f64)>,
}

impl Schedule {
    /// Validates and wraps a raw step list: every layer in `0..layers` must
    /// have coefficients summing to 1 (first-order consistency), and step
    /// layer indices must be in range.
    pub fn new(p: u32, layers: usize, steps: Vec<(usize, f64)>) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidInput("order p must be ≥ 1".into()));
        }
        if layers == 0 || steps.is_empty() {
            return Err(Error::InvalidInput("empty schedule".into()));
        }
        let mut sums = vec![0.0f64; layers];
        for &(l, c) in &steps {
            if l >= layers {
                return Err(Error::InvalidInput(format!(
                    "step layer {l} out of range for {layers} layers"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput("non-finite step coefficient".into()));
            }
            sums[l] += c;
        }
        for (l, sum) in sums.iter().enumerate() {
            if (sum - 1.0).abs() > tol::SCHEDULE_CONSISTENCY * steps.len() as f64 {
                return Err(Error::InvalidInput(format!(
                    "layer {l} coefficients sum to {sum}, expected 1 (first-order consistency)"
                )));
            }
        }
        Ok(Self { p, layers, steps })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn num_layers(&self) -> usize {
        self.layers
    }

    pub fn steps(&self) -> &[(usize, f64)] {
        &self.steps
    }

    /// Step count q.
    pub fn q(&self) -> usize {
        self.steps.len()
    }

    /// Σ_j |c_j|, so the total evolved time is `weight · |s|`.
    pub fn weight(&self) -> f64 {
        self.steps.iter().map(|&(_, c)| c.abs()).sum()
    }

    /// κ = weight / L ≥ 1, the schedule's weight constant.
    pub fn kappa(&self) -> f64 {
        self.weight() / self.layers as f64
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ScheduleJson {
            p: self.p,
            steps: self.steps.clone(),
            weight: self.weight(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parse the JSON interchange form. The order p is caller-asserted (not
    /// verified symbolically); first-order consistency and the recorded
    /// weight are checked.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ScheduleJson = serde_json::from_str(s)?;
        let layers = doc
            .steps
            .iter()
            .map(|&(l, _)| l + 1)
            .max()
            .ok_or_else(|| Error::InvalidInput("schedule with no steps".into()))?;
        let sched = Schedule::new(doc.p, layers, doc.steps)?;
        if (sched.weight() - doc.weight).abs() > 1e-9 * (1.0 + doc.weight.abs()) {
            return Err(Error::InvalidInput(format!(
                "recorded weight {} disagrees with Σ|c_j| = {}",
                doc.weight,
                sched.weight()
            )));
        }
        Ok(sched)
    }
}

#[derive(Serialize, Deserialize)]
struct ScheduleJson {
    p: u32,
    steps: Vec<(usize, f64)>,
    weight: f64,
}

/// Trotter–Suzuki schedule of order `p` over `l` layers: Lie for `p = 1`,
/// palindromic Strang for `p = 2`, five-fold recursion for even `p ≥ 4`.
/// Odd `p > 1` has no standard construction and is rejected.
pub fn suzuki_schedule(p: u32, l: usize) -> Result<Schedule> {
    if l == 0 {
        return Err(Error::InvalidInput("need at least one layer".into()));
    }
    match p {
        0 => Err(Error::InvalidInput("order p must be ≥ 1".into())),
        1 => Schedule::new(1, l, (0..l).map(|i| (i, 1.0)).collect()),
        2 => Schedule::new(2, l, strang_steps(l, 1.0)),
        p if p % 2 == 1 => Err(Error::InvalidInput(format!(
            "odd order p = {p} > 1 has no Suzuki construction (use an even order)"
        ))),
        p => {
            let mut steps = strang_steps(l, 1.0);
            let mut order = 2;
            while order < p {
                let m = order / 2 + 1; // going from 2m-2 to 2m
                let u = 1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * m as f64 - 1.0)));
                let v = 1.0 - 4.0 * u;
                let mut next = Vec::with_capacity(5 * steps.len());
                for &factor in &[u, u, v, u, u] {
                    for &(layer, c) in &steps {
                        next.push((layer, c * factor));
                    }
                }
                steps = merge_adjacent(next);
                order += 2;
            }
            Schedule::new(p, l, steps)
        }
    }
}

fn strang_steps(l: usize, scale: f64) -> Vec<(usize, f64)> {
    if l == 1 {
        return vec![(0, scale)];
    }
    let mut steps = Vec::with_capacity(2 * l - 1);
    for i in 0..l - 1 {
        steps.push((i, 0.5 * scale));
    }
    steps.push((l - 1, scale));
    for i in (0..l - 1).rev() {
        steps.push((i, 0.5 * scale));
    }
    steps
}

fn merge_adjacent(steps: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(steps.len());
    for (layer, c) in steps {
        match out.last_mut() {
            Some((last_layer, last_c)) if *last_layer == layer => *last_c += c,
            _ => out.push((layer, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

/// Ascending energy thresholds `Λ_0 = Δ ≤ Λ_1 ≤ … ≤ Λ_q` interleaved into a
/// projected product formula, with leakage budget δ.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaLadder {
    rungs: Vec<f64>,
    delta: f64,
}

impl LambdaLadder {
    /// `Λ_0 ..= Λ_q` (length q+1).
    pub fn rungs(&self) -> &[f64] {
        &self.rungs
    }

    pub fn base(&self) -> f64 {
        self.rungs[0]
    }

    /// Λ_q, the top rung; an effective cutoff must satisfy Δ' ≥ Λ_q.
    pub fn top(&self) -> f64 {
        *self.rungs.last().unwrap()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn q(&self) -> usize {
        self.rungs.len() - 1
    }
}

/// Minimal admissible ladder for a schedule at step size `s`:
/// `Λ_0 = Δ` and `Λ_j - Λ_{j-1} = (α |c_j s| M + ln(q/δ))/λ` (equality — the
/// tightest ladder the leakage bound permits), with `α = eJ`,
/// `λ = 1/(2Jdk)`. The top rung works out to
/// `Λ_q = Δ + (α·weight·|s|·M + q·ln(q/δ))/λ`.
pub fn ladder(
    delta_cap: f64,
    sched: &Schedule,
    s: f64,
    delta_leak: f64,
    params: &SystemParams,
) -> Result<LambdaLadder> {
    if !(delta_leak > 0.0) || !delta_leak.is_finite() {
        return Err(Error::InvalidInput(format!(
            "leakage budget δ must be > 0, got {delta_leak}"
        )));
    }
    if !s.is_finite() || !delta_cap.is_finite() {
        return Err(Error::InvalidInput("non-finite ladder inputs".into()));
    }
    if params.j <= 0.0 || params.d == 0 || params.k == 0 {
        return Err(Error::InvalidInput(
            "ladder needs positive J, d, k".into(),
        ));
    }
    let q = sched.q();
    let lambda = 1.0 / (2.0 * params.j * params.d as f64 * params.k as f64);
    let alpha = std::f64::consts::E * params.j;
    let log_term = (q as f64 / delta_leak).ln();
    let mut rungs = Vec::with_capacity(q + 1);
    rungs.push(delta_cap);
    for &(_, c) in sched.steps() {
        let inc = (alpha * (c * s).abs() * params.m as f64 + log_term) / lambda;
        rungs.push(rungs.last().unwrap() + inc);
    }
    Ok(LambdaLadder {
        rungs,
        delta: delta_leak,
    })
}

/// How to realize each schedule step.
#[derive(Debug, Clone, Copy)]
pub enum Variant<'a> {
    /// `W_p(s)`: exact layer exponentials.
    Exact,
    /// `W̄_p(s)`: every exponent uses the effective layer at cutoff Δ'.
    Effective {
        h_eigs: &'a EigenSystem,
        delta_prime: f64,
    },
    /// `W^Λ_p(s)`: projector `Π_{≤Λ_j}` after the j-th exact step.
    Projected {
        h_eigs: &'a EigenSystem,
        ladder: &'a LambdaLadder,
    },
    /// `W̄^Λ_p(s)`: projectors and effective layers together.
    ProjectedEffective {
        h_eigs: &'a EigenSystem,
        ladder: &'a LambdaLadder,
        delta_prime: f64,
    },
}

/// Apply a schedule at step size `s` over the given layer operators.
/// Returns a dense operator: unitary for the exact/effective variants, a
/// contraction for the projected ones.
pub fn apply_formula(
    sched: &Schedule,
    s: f64,
    layers: &[HermitianOperator],
    variant: Variant<'_>,
) -> Result<CMat> {
    if layers.len() < sched.num_layers() {
        return Err(Error::InvalidInput(format!(
            "schedule addresses {} layers but {} provided",
            sched.num_layers(),
            layers.len()
        )));
    }
    let dim = layers
        .first()
        .ok_or_else(|| Error::InvalidInput("no layers".into()))?
        .dim();
    if layers.iter().any(|h| h.dim() != dim) {
        return Err(Error::InvalidInput("layer dimensions differ".into()));
    }

    // Validate variant combinations and prepare shared pieces.
    let (eff_layers, rung_projectors): (Option<Vec<HermitianOperator>>, Option<Vec<EnergyProjector>>) =
        match variant {
            Variant::Exact => (None, None),
            Variant::Effective { h_eigs, delta_prime } => (
                Some(effective_layers(sched, layers, h_eigs, delta_prime)?),
                None,
            ),
            Variant::Projected { h_eigs, ladder } => {
                check_ladder(sched, ladder)?;
                (None, Some(ladder_projectors(h_eigs, ladder)))
            }
            Variant::ProjectedEffective {
                h_eigs,
                ladder,
                delta_prime,
            } => {
                check_ladder(sched, ladder)?;
                if delta_prime < ladder.top() - tol::TIE {
                    return Err(Error::InvalidInput(format!(
                        "effective cutoff Δ' = {delta_prime} below ladder top Λ_q = {}",
                        ladder.top()
                    )));
                }
                (
                    Some(effective_layers(sched, layers, h_eigs, delta_prime)?),
                    Some(ladder_projectors(h_eigs, ladder)),
                )
            }
        };

    let mut acc = identity(dim);
    for (j, &(layer, c)) in sched.steps().iter().enumerate() {
        let generator = match &eff_layers {
            Some(eff) => &eff[layer],
            None => &layers[layer],
        };
        let u = expm_i(generator, c * s)?;
        acc = u.matrix().dot(&acc);
        if let Some(pis) = &rung_projectors {
            // Rung j+1 follows step j+1 (rung 0 is the base Λ_0 = Δ).
            acc = pis[j].matrix().dot(&acc);
        }
    }
    Ok(acc)
}

fn check_ladder(sched: &Schedule, ladder: &LambdaLadder) -> Result<()> {
    if ladder.q() != sched.q() {
        return Err(Error::InvalidInput(format!(
            "ladder has {} rungs above base but schedule has q = {} steps",
            ladder.q(),
            sched.q()
        )));
    }
    Ok(())
}

fn ladder_projectors(h_eigs: &EigenSystem, ladder: &LambdaLadder) -> Vec<EnergyProjector> {
    ladder.rungs()[1..]
        .iter()
        .map(|&lam| projector_le(h_eigs, lam))
        .collect()
}

fn effective_layers(
    sched: &Schedule,
    layers: &[HermitianOperator],
    h_eigs: &EigenSystem,
    delta_prime: f64,
) -> Result<Vec<HermitianOperator>> {
    let mut out: Vec<Option<HermitianOperator>> = vec![None; layers.len()];
    for &(layer, _) in sched.steps() {
        if out[layer].is_none() {
            let eff = effective(&layers[layer], h_eigs, delta_prime)?;
            out[layer] = Some(eff.operator().clone());
        }
    }
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(i, o)| o.unwrap_or_else(|| layers[i].clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble_dense, model_gallery, Which};
    use crate::linalg::{dagger, max_abs, spectral_norm, sub, UnitaryOperator};
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn heisenberg_layers(n: usize) -> (Vec<HermitianOperator>, HermitianOperator, SystemParams) {
        let spec = model_gallery("heisenberg_chain", n, &BTreeMap::new()).unwrap();
        let layers: Vec<_> = (0..spec.layers.len())
            .map(|l| assemble_dense(&spec, Which::Layer(l)).unwrap())
            .collect();
        let h = assemble_dense(&spec, Which::Full).unwrap();
        (layers, h, spec.params)
    }

    #[test]
    fn lie_schedule_l2() {
        let s = suzuki_schedule(1, 2).unwrap();
        assert_eq!(s.steps(), &[(0, 1.0), (1, 1.0)]);
        assert_eq!(s.q(), 2);
        assert_abs_diff_eq!(s.weight(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.kappa(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn strang_schedule_l2_and_l3() {
        let s2 = suzuki_schedule(2, 2).unwrap();
        assert_eq!(s2.steps(), &[(0, 0.5), (1, 1.0), (0, 0.5)]);
        assert_eq!(s2.q(), 3);
        assert_abs_diff_eq!(s2.weight(), 2.0, epsilon = 1e-15);
        let s3 = suzuki_schedule(2, 3).unwrap();
        assert_eq!(s3.q(), 5); // 2L-1
        assert_eq!(
            s3.steps(),
            &[(0, 0.5), (1, 0.5), (2, 1.0), (1, 0.5), (0, 0.5)]
        );
    }

    #[test]
    fn suzuki_p4_within_exponential_budgets() {
        let s = suzuki_schedule(4, 2).unwrap();
        assert!(s.q() <= 50, "q = {} exceeds 5^p L = 50", s.q());
        assert!(
            s.weight() <= 2.32f64.powi(2) * 2.0,
            "weight {} exceeds c^p L",
            s.weight()
        );
        assert!(s.kappa() >= 1.0);
    }

    #[test]
    fn suzuki_rejects_odd_orders_above_one() {
        assert!(suzuki_schedule(3, 2).is_err());
        assert!(suzuki_schedule(5, 2).is_err());
        assert!(suzuki_schedule(0, 2).is_err());
    }

    #[test]
    fn layer_sums_are_one() {
        for p in [1, 2, 4, 6] {
            for l in [1, 2, 3] {
                let s = suzuki_schedule(p, l).unwrap();
                let mut sums = vec![0.0; l];
                for &(layer, c) in s.steps() {
                    sums[layer] += c;
                }
                for (layer, sum) in sums.iter().enumerate() {
                    assert_abs_diff_eq!(*sum, 1.0, epsilon = 1e-12,);
                    let _ = layer;
                }
            }
        }
    }

    #[test]
    fn palindromic_schedules_invert_under_sign_flip() {
        let (layers, _, _) = heisenberg_layers(4);
        for p in [2, 4] {
            let sched = suzuki_schedule(p, layers.len()).unwrap();
            let w_pos = apply_formula(&sched, 0.3, &layers, Variant::Exact).unwrap();
            let w_neg = apply_formula(&sched, -0.3, &layers, Variant::Exact).unwrap();
            let resid = max_abs(&sub(&w_neg, &dagger(&w_pos)).unwrap());
            assert!(resid <= 1e-10, "palindrome residual {resid} at p = {p}");
        }
    }

    #[test]
    fn exact_variant_is_unitary() {
        let (layers, _, _) = heisenberg_layers(4);
        let sched = suzuki_schedule(2, layers.len()).unwrap();
        let w = apply_formula(&sched, 0.2, &layers, Variant::Exact).unwrap();
        assert!(UnitaryOperator::new(w).is_ok());
    }

    #[test]
    fn zero_step_gives_identity_for_all_variants() {
        let (layers, h, params) = heisenberg_layers(4);
        let e = h.eigensystem().unwrap();
        let sched = suzuki_schedule(2, layers.len()).unwrap();
        let top = e.max_value() + 1.0;
        // Trivial ladder: flat at an energy above the spectrum (δ = q zeroes
        // the log term), so every projector is the identity.
        let lad = ladder(top, &sched, 0.0, sched.q() as f64, &params).unwrap();
        assert!(lad.rungs().iter().all(|&r| (r - top).abs() < 1e-12));
        let variants = [
            Variant::Exact,
            Variant::Effective {
                h_eigs: e,
                delta_prime: top,
            },
            Variant::Projected {
                h_eigs: e,
                ladder: &lad,
            },
            Variant::ProjectedEffective {
                h_eigs: e,
                ladder: &lad,
                delta_prime: top,
            },
        ];
        for v in variants {
            let w = apply_formula(&sched, 0.0, &layers, v).unwrap();
            assert!(max_abs(&(&w - &identity(16))) <= 1e-12);
        }
    }

    #[test]
    fn single_layer_exact_equals_full_exponential() {
        // L=1: all exponents commute, so W_p(s) = e^{-isH} for every p.
        let spec = model_gallery("heisenberg_chain", 2, &BTreeMap::new()).unwrap();
        let h = assemble_dense(&spec, Which::Full).unwrap();
        let layers = vec![assemble_dense(&spec, Which::Layer(0)).unwrap()];
        let u = crate::linalg::expm_i(&h, 0.7).unwrap();
        for p in [1, 2, 4] {
            let sched = suzuki_schedule(p, 1).unwrap();
            let w = apply_formula(&sched, 0.7, &layers, Variant::Exact).unwrap();
            let resid = spectral_norm(&sub(&w, u.matrix()).unwrap()).unwrap();
            assert!(resid <= 1e-10, "L=1 residual {resid} at p = {p}");
        }
    }

    #[test]
    fn ladder_uniform_spacing_for_lie() {
        let (_, _, params) = heisenberg_layers(4);
        let sched = suzuki_schedule(1, 2).unwrap();
        let lad = ladder(1.0, &sched, 0.05, 0.1, &params).unwrap();
        let incs: Vec<f64> = lad.rungs().windows(2).map(|w| w[1] - w[0]).collect();
        assert_abs_diff_eq!(incs[0], incs[1], epsilon = 1e-12);
        assert!(incs[0] > 0.0);
        assert_eq!(lad.base(), 1.0);
    }

    #[test]
    fn ladder_hand_value() {
        // J=1, d=2, k=2, M=2, q=2, δ=0.01, |s_j|=0.1:
        // spacing = (e·0.1·2 + ln 200) / λ with λ = 1/8.
        let params = SystemParams {
            n: 4,
            k: 2,
            d: 2,
            j: 1.0,
            m: 2,
            l: 2,
            q: 0,
            kappa: 1.0,
        };
        let sched = suzuki_schedule(1, 2).unwrap();
        let lad = ladder(0.0, &sched, 0.1, 0.01, &params).unwrap();
        let expected = 8.0 * (0.2 * std::f64::consts::E + 200f64.ln());
        assert_abs_diff_eq!(lad.rungs()[1] - lad.rungs()[0], expected, epsilon = 1e-10);
        assert_abs_diff_eq!(lad.rungs()[2] - lad.rungs()[1], expected, epsilon = 1e-10);
        // Λ_q = Δ + (α·weight·|s|·M + q·ln(q/δ))/λ.
        let top = 0.0
            + (std::f64::consts::E * sched.weight() * 0.1 * 2.0 + 2.0 * 200f64.ln()) * 8.0;
        assert_abs_diff_eq!(lad.top(), top, epsilon = 1e-10);
    }

    #[test]
    fn ladder_rejects_nonpositive_delta() {
        let (_, _, params) = heisenberg_layers(4);
        let sched = suzuki_schedule(1, 2).unwrap();
        assert!(ladder(0.0, &sched, 0.05, 0.0, &params).is_err());
        assert!(ladder(0.0, &sched, 0.05, -0.1, &params).is_err());
    }

    #[test]
    fn projected_variant_matches_manual_telescoping() {
        let (layers, h, params) = heisenberg_layers(4);
        let e = h.eigensystem().unwrap();
        let sched = suzuki_schedule(2, layers.len()).unwrap();
        let s = 0.08;
        // Real in-spectrum ladder (small increments via large δ≈q keeps the
        // rungs inside the spectral range so the projectors are nontrivial).
        let lad = LambdaLadder {
            rungs: vec![2.0, 2.5, 3.0, 3.5],
            delta: 0.5,
        };
        let w = apply_formula(
            &sched,
            s,
            &layers,
            Variant::Projected {
                h_eigs: e,
                ladder: &lad,
            },
        )
        .unwrap();
        let mut manual = identity(16);
        for (j, &(layer, c)) in sched.steps().iter().enumerate() {
            let u = crate::linalg::expm_i(&layers[layer], c * s).unwrap();
            manual = u.matrix().dot(&manual);
            manual = projector_le(e, lad.rungs()[j + 1]).matrix().dot(&manual);
        }
        assert!(max_abs(&sub(&w, &manual).unwrap()) <= 1e-13);
        // Contraction property.
        assert!(spectral_norm(&w).unwrap() <= 1.0 + 1e-10);
        let _ = params;
    }

    #[test]
    fn effective_cutoff_below_ladder_top_rejected() {
        let (layers, h, params) = heisenberg_layers(4);
        let e = h.eigensystem().unwrap();
        let sched = suzuki_schedule(1, layers.len()).unwrap();
        let lad = ladder(1.0, &sched, 0.05, 0.3, &params).unwrap();
        let err = apply_formula(
            &sched,
            0.05,
            &layers,
            Variant::ProjectedEffective {
                h_eigs: e,
                ladder: &lad,
                delta_prime: lad.top() - 1.0,
            },
        );
        assert!(err.is_err());
    }

    #[test]
    fn ladder_length_mismatch_rejected() {
        let (layers, h, _) = heisenberg_layers(4);
        let e = h.eigensystem().unwrap();
        let sched = suzuki_schedule(2, layers.len()).unwrap(); // q = 3
        let lad = LambdaLadder {
            rungs: vec![1.0, 2.0],
            delta: 0.5,
        };
        assert!(apply_formula(
            &sched,
            0.1,
            &layers,
            Variant::Projected {
                h_eigs: e,
                ladder: &lad,
            },
        )
        .is_err());
    }

    #[test]
    fn schedule_json_roundtrip_and_validation() {
        let s = suzuki_schedule(2, 3).unwrap();
        let json = s.to_json().unwrap();
        let back = Schedule::from_json(&json).unwrap();
        assert_eq!(back, s);

        let hand = r#"{"p":1,"steps":[[0,1.0],[1,1.0]],"weight":2.0}"#;
        let parsed = Schedule::from_json(hand).unwrap();
        assert_eq!(parsed.steps(), &[(0, 1.0), (1, 1.0)]);

        let bad_weight = r#"{"p":1,"steps":[[0,1.0],[1,1.0]],"weight":3.0}"#;
        assert!(Schedule::from_json(bad_weight).is_err());

        let bad_sum = r#"{"p":1,"steps":[[0,0.5],[1,1.0]],"weight":1.5}"#;
        assert!(Schedule::from_json(bad_sum).is_err());
    }

    #[test]
    fn effective_variant_uses_truncated_layers() {
        let (layers, h, _) = heisenberg_layers(4);
        let e = h.eigensystem().unwrap();
        let sched = suzuki_schedule(1, layers.len()).unwrap();
        let dp = e.max_value() + 1.0;
        // Δ' beyond the spectrum: effective = exact.
        let w_eff = apply_formula(
            &sched,
            0.3,
            &layers,
            Variant::Effective {
                h_eigs: e,
                delta_prime: dp,
            },
        )
        .unwrap();
        let w = apply_formula(&sched, 0.3, &layers, Variant::Exact).unwrap();
        assert!(max_abs(&sub(&w_eff, &w).unwrap()) <= 1e-9);
    }
}
