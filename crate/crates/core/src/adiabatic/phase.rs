//! Literal phase-estimation simulation with a `b`-qubit eigenvalue register.
//!
//! The joint state is stored as `2^b` system-sized branches, one per
//! register value. Estimation applies Hadamards, controlled powers
//! `U^{2^j}` with `U = e^{-iHτ}`, and an inverse QFT along the register.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::linalg::{DenseHermitian, StateVector, C64, DEFAULT_DEGENERACY_TOL, ZERO};
use crate::seeding::Rng;

/// Largest register width the simulator will allocate.
pub const MAX_ANCILLA_BITS: u32 = 16;

/// Phase estimation for a Hamiltonian with groundvalue 0.
pub struct PhaseEstimator {
    bits: u32,
    scale: f64,
    gap: f64,
    powers: Vec<DMatrix<C64>>,
    inverse_powers: Vec<DMatrix<C64>>,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PhaseEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseEstimator")
            .field("bits", &self.bits)
            .field("scale", &self.scale)
            .field("gap", &self.gap)
            .finish()
    }
}

/// `⌈log₂(8Λ/Δ)⌉`, the narrowest register whose eigenvalue grid resolves `Δ/4`.
pub fn default_ancilla_bits(scale: f64, gap: f64) -> u32 {
    (8.0 * scale / gap).log2().ceil().max(1.0) as u32
}

impl PhaseEstimator {
    /// Requires groundvalue 0; `bits = None` picks [`default_ancilla_bits`].
    pub fn new(h: &DenseHermitian, bits: Option<u32>) -> Result<Self> {
        let eig = h.eigen();
        if eig.dim() < 2 {
            return Err(invalid("phase estimation needs dimension at least 2"));
        }
        let e0 = eig.eigenvalues[0];
        let top = *eig.eigenvalues.last().expect("nonempty");
        if e0.abs() > 1e-9 * top.abs().max(1.0) {
            return Err(invalid(format!("groundvalue must be 0, found {e0:e}")));
        }
        let gap = eig.gap();
        if gap < DEFAULT_DEGENERACY_TOL {
            return Err(Error::DegenerateGroundstate { gap, tolerance: DEFAULT_DEGENERACY_TOL });
        }
        let scale = top.max(gap);
        let bits = bits.unwrap_or_else(|| default_ancilla_bits(scale, gap));
        if bits == 0 || bits > MAX_ANCILLA_BITS {
            return Err(invalid(format!("ancilla count {bits} outside 1..={MAX_ANCILLA_BITS}")));
        }
        let resolution = 2.0 * scale / (1u64 << bits) as f64;
        if resolution > gap / 4.0 {
            return Err(Error::InsufficientPrecision { resolution, required: gap / 4.0 });
        }
        // τ maps [0, Λ] onto phases in [-1/2, 0]
        let tau = std::f64::consts::PI / scale;
        let powers: Vec<_> = (0..bits)
            .map(|j| {
                let t = tau * (1u64 << j) as f64;
                eig.map_eigenvalues(|l| C64::from_polar(1.0, -l * t))
            })
            .collect();
        let inverse_powers = powers.iter().map(|u| u.adjoint()).collect();
        let mut planner = FftPlanner::new();
        let len = 1usize << bits;
        Ok(Self {
            bits,
            scale,
            gap,
            powers,
            inverse_powers,
            forward: planner.plan_fft_forward(len),
            backward: planner.plan_fft_inverse(len),
        })
    }

    /// Shifts `h` by its groundvalue first.
    pub fn shifted(h: &DenseHermitian, bits: Option<u32>) -> Result<Self> {
        let e0 = h.eigen().eigenvalues[0];
        Self::new(&h.shifted(-e0), bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Eigenvalue spacing of the register grid, `2Λ/2^b`.
    pub fn resolution(&self) -> f64 {
        2.0 * self.scale / (1u64 << self.bits) as f64
    }

    /// Eigenvalue read off register value `y`.
    pub fn eigenvalue_estimate(&self, y: usize) -> f64 {
        let len = 1usize << self.bits;
        let phase = if y < len / 2 { y as f64 / len as f64 } else { y as f64 / len as f64 - 1.0 };
        -phase * 2.0 * self.scale
    }

    /// Flag bit: 0 iff the estimate lies within `Δ/2` of the groundvalue.
    pub fn flag(&self, y: usize) -> u8 {
        u8::from(self.eigenvalue_estimate(y).abs() >= self.gap / 2.0)
    }

    /// `V(|0⟩|ψ⟩)` as register-indexed branches.
    fn estimate(&self, psi: &DVector<C64>) -> Vec<DVector<C64>> {
        let len = 1usize << self.bits;
        let amp = 1.0 / (len as f64).sqrt();
        let mut branches: Vec<DVector<C64>> = (0..len).map(|_| psi * C64::new(amp, 0.0)).collect();
        for (j, u) in self.powers.iter().enumerate() {
            for (k, b) in branches.iter_mut().enumerate() {
                if k >> j & 1 == 1 {
                    *b = u * &*b;
                }
            }
        }
        self.transform(&mut branches, &*self.forward);
        branches
    }

    /// Ancilla-zero component of `V†(branches)`.
    fn uncompute(&self, mut branches: Vec<DVector<C64>>) -> DVector<C64> {
        self.transform(&mut branches, &*self.backward);
        for (j, u) in self.inverse_powers.iter().enumerate() {
            for (k, b) in branches.iter_mut().enumerate() {
                if k >> j & 1 == 1 {
                    *b = u * &*b;
                }
            }
        }
        let len = branches.len();
        let amp = C64::new(1.0 / (len as f64).sqrt(), 0.0);
        let mut out = DVector::from_element(branches[0].len(), ZERO);
        for b in &branches {
            out += b;
        }
        out * amp
    }

    /// Unitary DFT along the register index, one system coordinate at a time.
    fn transform(&self, branches: &mut [DVector<C64>], fft: &dyn Fft<f64>) {
        let len = branches.len();
        let norm = 1.0 / (len as f64).sqrt();
        let dim = branches[0].len();
        let mut column = vec![ZERO; len];
        for r in 0..dim {
            for (k, b) in branches.iter().enumerate() {
                column[k] = b[r];
            }
            fft.process(&mut column);
            for (k, b) in branches.iter_mut().enumerate() {
                b[r] = column[k] * norm;
            }
        }
    }

    /// Outcome-0 probability and the unnormalized post-measurement states
    /// for both flag values.
    pub fn branch_states(&self, psi: &StateVector) -> Result<(f64, DVector<C64>, DVector<C64>)> {
        if psi.dim() != self.powers[0].nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.powers[0].nrows(),
                found: psi.dim(),
            });
        }
        let reg = self.estimate(psi.amplitudes());
        let dim = psi.dim();
        let mut ground = Vec::with_capacity(reg.len());
        let mut excited = Vec::with_capacity(reg.len());
        let mut p0 = 0.0;
        for (y, b) in reg.into_iter().enumerate() {
            if self.flag(y) == 0 {
                p0 += b.norm_squared();
                ground.push(b);
                excited.push(DVector::from_element(dim, ZERO));
            } else {
                ground.push(DVector::from_element(dim, ZERO));
                excited.push(b);
            }
        }
        Ok((p0, self.uncompute(ground), self.uncompute(excited)))
    }

    /// Measures the flag bit and returns it with the normalized post-state.
    pub fn measure(&self, psi: &StateVector, rng: &mut Rng) -> Result<(u8, StateVector)> {
        let (p0, ground, excited) = self.branch_states(psi)?;
        let u: f64 = rng.gen();
        if u < p0 {
            Ok((0, StateVector::normalized(ground)?))
        } else {
            Ok((1, StateVector::normalized(excited)?))
        }
    }

    /// Estimate, multiply by `e^{-it·flag}`, un-estimate; returns the
    /// ancilla-zero component (unnormalized, norm ≤ 1).
    pub fn apply_flag_phase(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut reg = self.estimate(psi);
        let phase = C64::from_polar(1.0, -t);
        for (y, b) in reg.iter_mut().enumerate() {
            if self.flag(y) == 1 {
                *b *= phase;
            }
        }
        self.uncompute(reg)
    }
}

/// One phase-estimation measurement of `H` on `ψ`.
pub fn phase_estimation_project(
    h: &DenseHermitian,
    psi: &StateVector,
    bits: Option<u32>,
    rng: &mut Rng,
) -> Result<(u8, StateVector)> {
    PhaseEstimator::new(h, bits)?.measure(psi, rng)
}

/// Approximate `e^{-itΠ}` with `Π = I - |α(H)⟩⟨α(H)|`, built from phase estimation.
#[derive(Debug)]
pub struct ProjectorSimulation {
    estimator: PhaseEstimator,
    t: f64,
}

impl ProjectorSimulation {
    pub fn apply(&self, psi: &StateVector) -> Result<DVector<C64>> {
        if psi.dim() != self.estimator.powers[0].nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.estimator.powers[0].nrows(),
                found: psi.dim(),
            });
        }
        if self.t == 0.0 {
            return Ok(psi.amplitudes().clone());
        }
        Ok(self.estimator.apply_flag_phase(psi.amplitudes(), self.t))
    }

    pub fn bits(&self) -> u32 {
        self.estimator.bits
    }
}

pub fn projector_hamiltonian_sim(
    h: &DenseHermitian,
    t: f64,
    bits: Option<u32>,
) -> Result<ProjectorSimulation> {
    Ok(ProjectorSimulation { estimator: PhaseEstimator::new(h, bits)?, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ground_state, matrix_exponential, random_hermitian, random_state};
    use crate::seeding::rng_from_seed;

    fn shifted_random(dim: usize, seed: u64) -> DenseHermitian {
        let h = random_hermitian(dim, &mut rng_from_seed(seed));
        let e0 = h.eigen().eigenvalues[0];
        h.shifted(-e0)
    }

    #[test]
    fn eigenstate_inputs() {
        let h = shifted_random(4, 5);
        let pe = PhaseEstimator::new(&h, Some(10)).unwrap();
        let eig = h.eigen();
        let (p0, post, _) = pe.branch_states(&eig.eigenvector(0)).unwrap();
        assert!(p0 >= 1.0 - 1e-12);
        let post = StateVector::normalized(post).unwrap();
        assert!(post.fidelity(&eig.eigenvector(0)).unwrap() > 1.0 - 1e-12);
        let leakage = 1.0 / (1u64 << pe.bits()) as f64;
        for k in 1..4 {
            let (p0, _, _) = pe.branch_states(&eig.eigenvector(k)).unwrap();
            assert!(p0 <= 0.05 + leakage, "k={k} p0={p0}");
        }
    }

    #[test]
    fn projector_statistics_match_exact() {
        let mut rng = rng_from_seed(6);
        let alpha = random_state(4, &mut rng);
        let h = DenseHermitian::projector_complement(&alpha);
        // build ψ with |⟨α|ψ⟩|² = 0.64
        let perp = {
            let r = random_state(4, &mut rng);
            let c = alpha.overlap(&r).unwrap();
            StateVector::normalized(r.amplitudes() - alpha.amplitudes() * c).unwrap()
        };
        let psi = StateVector::normalized(
            alpha.amplitudes() * C64::new(0.8, 0.0) + perp.amplitudes() * C64::new(0.6, 0.0),
        )
        .unwrap();
        let pe = PhaseEstimator::new(&h, None).unwrap();
        let (p0, ground, excited) = pe.branch_states(&psi).unwrap();
        assert!((p0 - 0.64).abs() < 1e-10);
        let g = StateVector::normalized(ground).unwrap();
        assert!(g.fidelity(&alpha).unwrap() > 1.0 - 1e-10);
        let e = StateVector::normalized(excited).unwrap();
        assert!(e.fidelity(&perp).unwrap() > 1.0 - 1e-10);

        let shots = 10_000;
        let mut zeros = 0;
        for _ in 0..shots {
            if pe.measure(&psi, &mut rng).unwrap().0 == 0 {
                zeros += 1;
            }
        }
        let sigma = (0.64 * 0.36 / shots as f64).sqrt();
        assert!((zeros as f64 / shots as f64 - 0.64).abs() < 3.0 * sigma);
    }

    #[test]
    fn precision_contract() {
        let h = DenseHermitian::diagonal(&[0.0, 0.01, 1.0, 1.0]);
        assert!(matches!(
            PhaseEstimator::new(&h, Some(4)),
            Err(Error::InsufficientPrecision { .. })
        ));
        assert!(PhaseEstimator::new(&h, None).is_ok());
        assert!(PhaseEstimator::new(&DenseHermitian::diagonal(&[1.0, 2.0]), None).is_err());
    }

    #[test]
    fn projector_simulation_examples() {
        let mut rng = rng_from_seed(7);
        let alpha = random_state(8, &mut rng);
        let h = DenseHermitian::projector_complement(&alpha);
        let psi = random_state(8, &mut rng);
        let id = projector_hamiltonian_sim(&h, 0.0, Some(8)).unwrap().apply(&psi).unwrap();
        assert!((id - psi.amplitudes()).norm() < 1e-12);

        let sim = projector_hamiltonian_sim(&h, 0.7, Some(8)).unwrap();
        let fixed = sim.apply(&alpha).unwrap();
        assert!((fixed - alpha.amplitudes()).norm() < 1e-10);

        let (_, g) = ground_state(&h, 1e-10).unwrap();
        let exact = matrix_exponential(&DenseHermitian::projector_complement(&g), 0.7).unwrap();
        let want = exact.apply(&psi).unwrap();
        let got = sim.apply(&psi).unwrap();
        assert!((got - want.amplitudes()).norm() < 0.02);
    }

    #[test]
    fn general_spectrum_phase_simulation() {
        let h = shifted_random(4, 8);
        let sim = projector_hamiltonian_sim(&h, 1.3, Some(10)).unwrap();
        let (_, g) = ground_state(&h, 1e-10).unwrap();
        let exact = matrix_exponential(&DenseHermitian::projector_complement(&g), 1.3).unwrap();
        let psi = random_state(4, &mut rng_from_seed(9));
        let got = sim.apply(&psi).unwrap();
        assert!((got - exact.apply(&psi).unwrap().amplitudes()).norm() < 0.1);
    }
}
