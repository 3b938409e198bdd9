//! Energy projectors, effective (band-truncated) operators, and seeded
//! low-energy state sampling.
//!
//! Given the spectrum of `H`, `Π_{≤Λ}` projects onto eigenstates with energy
//! at most `Λ` (closed threshold, with a small tie tolerance), and
//! `Π_{>Λ'} = I - Π_{≤Λ'}` is built by exact complement. The effective
//! operator of `X` at cutoff `Δ'` is `X̄ = Π_{≤Δ'} X Π_{≤Δ'}`; for `X = H ≥ 0`
//! its norm is the largest retained eigenvalue, at most `Δ'`, and the exact
//! identity `(e^{-isH} - e^{-isH̄}) Π_{≤Δ} = 0` holds for every `Δ' ≥ Δ`.
//!
//! Projectors are materialized densely: downstream quantities are norms
//! `‖Π A Π‖` and dense kernels handle them uniformly at these dimensions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{identity, C64, CMat, CVec, EigenSystem, HermitianOperator};
use crate::{tol, Error, Result};

/// Which side of the threshold a projector keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    AtOrBelow,
    Above,
}

/// Spectral projector of a fixed Hermitian operator at an energy threshold.
#[derive(Debug, Clone)]
pub struct EnergyProjector {
    threshold: f64,
    band: Band,
    matrix: CMat,
    rank: usize,
}

impl EnergyProjector {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `I - Π`, with the band label flipped.
    pub fn complement(&self) -> EnergyProjector {
        EnergyProjector {
            threshold: self.threshold,
            band: match self.band {
                Band::AtOrBelow => Band::Above,
                Band::Above => Band::AtOrBelow,
            },
            matrix: identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }
}

fn below(lam: f64, threshold: f64) -> bool {
    lam <= threshold + tol::TIE
}

/// `Π_{≤Λ}`: projector onto eigenstates with energy at most `Λ` (tie
/// tolerance 1e-9 on the closed threshold).
pub fn projector_le(eigs: &EigenSystem, lambda: f64) -> EnergyProjector {
    let rank = eigs.values().iter().filter(|&&v| below(v, lambda)).count();
    let matrix = if rank == eigs.dim() {
        identity(eigs.dim())
    } else if rank == 0 {
        CMat::zeros((eigs.dim(), eigs.dim()))
    } else {
        eigs.apply_function(|v| {
            if below(v, lambda) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    EnergyProjector {
        threshold: lambda,
        band: Band::AtOrBelow,
        matrix,
        rank,
    }
}

/// `Π_{>Λ'} = I - Π_{≤Λ'}`, exact complement.
pub fn projector_gt(eigs: &EigenSystem, lambda: f64) -> EnergyProjector {
    projector_le(eigs, lambda).complement()
}

/// Band-truncated operator `X̄ = Π_{≤Δ'} X Π_{≤Δ'}` (projector from the
/// spectrum of the defining `H`, which need not be `X` itself).
#[derive(Debug, Clone)]
pub struct EffectiveOperator {
    cutoff: f64,
    op: HermitianOperator,
}

impl EffectiveOperator {
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }
}

/// Build `X̄ = Π_{≤Δ'} X Π_{≤Δ'}`. The product is symmetrized before
/// wrapping, which removes the roundoff asymmetry of the two matmuls.
pub fn effective(
    x: &HermitianOperator,
    h_eigs: &EigenSystem,
    delta_prime: f64,
) -> Result<EffectiveOperator> {
    if !(delta_prime >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "effective cutoff Δ' must be ≥ 0, got {delta_prime}"
        )));
    }
    if x.dim() != h_eigs.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("{}", x.dim()),
            right: format!("{}", h_eigs.dim()),
        });
    }
    let pi = projector_le(h_eigs, delta_prime);
    let truncated = pi.matrix().dot(x.matrix()).dot(pi.matrix());
    Ok(EffectiveOperator {
        cutoff: delta_prime,
        op: HermitianOperator::new_symmetrized(truncated)?,
    })
}

/// Haar-uniform state in the span of eigenstates with energy ≤ Δ,
/// deterministic per seed: Gaussian coefficients from seeded ChaCha,
/// normalized.
pub fn sample_low_energy_state(eigs: &EigenSystem, delta: f64, seed: u64) -> Result<CVec> {
    let sel: Vec<usize> = (0..eigs.dim())
        .filter(|&i| below(eigs.values()[i], delta))
        .collect();
    if sel.is_empty() {
        return Err(Error::EmptyBand { threshold: delta });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut psi = CVec::zeros(eigs.dim());
    for &i in &sel {
        let re: f64 = normal.sample(&mut rng);
        let im: f64 = normal.sample(&mut rng);
        let c = C64::new(re, im);
        psi.scaled_add(c, &eigs.vectors().column(i));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::InvalidInput(
            "sampled state collapsed to zero (astronomically unlikely)".into(),
        ));
    }
    Ok(psi.mapv(|z| z / C64::new(norm, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble_dense, model_gallery, Which};
    use crate::linalg::{dagger, expm_i, matmul, max_abs, spectral_norm, sub};
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn heisenberg4() -> (HermitianOperator, f64) {
        let spec = model_gallery("heisenberg_chain", 4, &BTreeMap::new()).unwrap();
        let h = assemble_dense(&spec, Which::Full).unwrap();
        let shift = spec.shifts.total;
        (h, shift)
    }

    #[test]
    fn le_above_max_is_identity() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let pi = projector_le(e, e.max_value() + 1.0);
        assert_eq!(pi.rank(), 16);
        assert!(max_abs(&(pi.matrix() - &identity(16))) <= 1e-12);
    }

    #[test]
    fn le_below_min_is_zero() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let pi = projector_le(e, e.min_value() - 1.0);
        assert_eq!(pi.rank(), 0);
        assert_abs_diff_eq!(max_abs(pi.matrix()), 0.0, epsilon = 0.0);
    }

    #[test]
    fn heisenberg_ground_rank_matches_degeneracy() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let e0 = e.min_value();
        let degeneracy = e.values().iter().filter(|&&v| v - e0 <= tol::TIE).count();
        let pi = projector_le(e, e0 + tol::TIE);
        assert_eq!(pi.rank(), degeneracy);
        assert_eq!(degeneracy, 1); // open-chain singlet ground state
    }

    #[test]
    fn projector_invariants() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let dimf = 16.0;
        let hnorm = h.spectral_norm().unwrap();
        for frac in [0.15, 0.4, 0.8] {
            let lam = e.min_value() + frac * (e.max_value() - e.min_value());
            let pi = projector_le(e, lam);
            let m = pi.matrix();
            let idem = max_abs(&(m.dot(m) - m));
            assert!(idem <= 1e-10 * dimf, "Π² residual {idem}");
            assert!(max_abs(&(&dagger(m) - m)) <= 1e-12);
            let comm = max_abs(&(m.dot(h.matrix()) - h.matrix().dot(m)));
            assert!(comm <= 1e-9 * dimf * hnorm, "[Π,H] residual {comm}");
        }
    }

    #[test]
    fn complement_and_orthogonality() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let mid = 0.5 * (e.min_value() + e.max_value());
        let le = projector_le(e, mid);
        let gt = projector_gt(e, mid);
        // Exact complement, entrywise.
        assert_abs_diff_eq!(
            max_abs(&(&identity(16) - &(le.matrix() + gt.matrix()))),
            0.0,
            epsilon = 0.0
        );
        assert_eq!(le.rank() + gt.rank(), 16);
        // Π_{≤Λ} Π_{>Λ'} = 0 for Λ' ≥ Λ.
        let gt_higher = projector_gt(e, mid + 0.5);
        let prod = matmul(le.matrix(), gt_higher.matrix()).unwrap();
        assert!(spectral_norm(&prod).unwrap() <= 1e-11);
    }

    #[test]
    fn projector_nesting() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let lo = projector_le(e, e.min_value() + 0.8);
        let hi = projector_le(e, e.min_value() + 2.0);
        let prod = matmul(lo.matrix(), hi.matrix()).unwrap();
        assert!(max_abs(&(&prod - lo.matrix())) <= 1e-10);
    }

    #[test]
    fn effective_full_cutoff_is_identity_truncation() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let eff = effective(&h, e, e.max_value() + 1.0).unwrap();
        assert!(max_abs(&sub(eff.matrix(), h.matrix()).unwrap()) <= 1e-10);
    }

    #[test]
    fn effective_truncation_norm_is_largest_retained() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        // Cut inside a genuine spectral gap: ‖H̄‖ = largest retained ≤ Δ'.
        let i = (8..15)
            .find(|&i| e.values()[i + 1] - e.values()[i] > 0.05)
            .expect("no gap in upper spectrum");
        let cut = 0.5 * (e.values()[i] + e.values()[i + 1]);
        let eff = effective(&h, e, cut).unwrap();
        let norm = eff.operator().spectral_norm().unwrap();
        assert_abs_diff_eq!(norm, e.values()[i], epsilon = 1e-9);
        assert!(norm <= cut);
    }

    #[test]
    fn effective_layers_bounded_by_cutoff() {
        let spec = model_gallery("heisenberg_chain", 4, &BTreeMap::new()).unwrap();
        let h = assemble_dense(&spec, Which::Full).unwrap();
        let e = h.eigensystem().unwrap();
        for frac in [0.3, 0.6, 0.9] {
            let cut = e.min_value() + frac * (e.max_value() - e.min_value());
            let mut sum = CMat::zeros((16, 16));
            for l in 0..spec.layers.len() {
                let hl = assemble_dense(&spec, Which::Layer(l)).unwrap();
                let eff = effective(&hl, e, cut).unwrap();
                assert!(
                    eff.operator().spectral_norm().unwrap() <= cut + 1e-9,
                    "‖H̄_l‖ exceeds Δ' = {cut}"
                );
                sum = &sum + eff.matrix();
            }
            // Σ_l H̄_l = H̄.
            let eff_full = effective(&h, e, cut).unwrap();
            assert!(max_abs(&(&sum - eff_full.matrix())) <= 1e-10);
        }
    }

    #[test]
    fn effective_rejects_negative_cutoff() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        assert!(effective(&h, e, -1.0).is_err());
    }

    #[test]
    fn sample_rank_one_gives_ground_state() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let psi = sample_low_energy_state(e, e.min_value() + tol::TIE, 42).unwrap();
        let overlap: C64 = e
            .vectors()
            .column(0)
            .iter()
            .zip(psi.iter())
            .map(|(v, p)| v.conj() * p)
            .sum();
        assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn sample_norm_and_residual_over_seeds() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let delta = e.min_value() + 1.0;
        let pi = projector_le(e, delta);
        let complement = pi.complement();
        for seed in 0..50 {
            let psi = sample_low_energy_state(e, delta, seed).unwrap();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            let out = complement.matrix().dot(&psi);
            let leak = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(leak <= 1e-10, "projection residual {leak} at seed {seed}");
        }
    }

    #[test]
    fn sample_deterministic_per_seed() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let a = sample_low_energy_state(e, 2.0, 7).unwrap();
        let b = sample_low_energy_state(e, 2.0, 7).unwrap();
        let c = sample_low_energy_state(e, 2.0, 8).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().zip(c.iter()).any(|(x, y)| x != y));
    }

    #[test]
    fn sample_empty_band_errors() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        assert!(matches!(
            sample_low_energy_state(e, e.min_value() - 1.0, 1),
            Err(Error::EmptyBand { .. })
        ));
    }

    #[test]
    fn evolution_preserves_low_energy_subspace() {
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let pi = projector_le(e, e.min_value() + 1.5);
        let u = expm_i(&h, 0.3).unwrap();
        let upi = u.matrix().dot(pi.matrix());
        let piupi = pi.matrix().dot(&upi);
        assert!(spectral_norm(&(&upi - &piupi)).unwrap() <= 1e-10 * 16.0);
    }

    #[test]
    fn effective_evolution_identity() {
        // ‖(e^{-isH} - e^{-isH̄}) Π_{≤Δ}‖ ≤ 1e-9 for every Δ' ≥ Δ.
        let (h, _) = heisenberg4();
        let e = h.eigensystem().unwrap();
        let delta = e.min_value() + 1.0;
        let pi = projector_le(e, delta);
        let u = expm_i(&h, 0.4).unwrap();
        let hnorm = h.spectral_norm().unwrap();
        for dp in [delta, delta + 0.7, hnorm + 1.0] {
            let eff = effective(&h, e, dp).unwrap();
            let ubar = expm_i(eff.operator(), 0.4).unwrap();
            let diff = sub(u.matrix(), ubar.matrix()).unwrap();
            let resid = spectral_norm(&diff.dot(pi.matrix())).unwrap();
            assert!(resid <= 1e-9, "identity residual {resid} at Δ' = {dp}");
        }
    }
}
