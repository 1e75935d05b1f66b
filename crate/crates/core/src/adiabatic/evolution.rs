use nalgebra::DMatrix;
use rand::Rng as _;

use super::path::{check_adiabatic_condition, HamiltonianPath, Schedule};
use super::phase::PhaseEstimator;
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    ground_from_eigen, ground_state, spectral_norm, DenseHermitian, StateVector, C64,
    DEFAULT_DEGENERACY_TOL,
};
use crate::seeding::Rng;

/// Largest allowed `1 - |⟨α(H(0))|ψ0⟩|` for an initial state.
pub const INITIAL_STATE_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EvolutionReport {
    pub final_state: StateVector,
    /// All-success probability of the measurement sequence; 1 for unitary evolution.
    pub success_probability: f64,
    /// Per-step squared overlap with the instantaneous groundstate (or, in
    /// Zeno mode, the probability of the step's success outcome).
    pub per_step_overlaps: Vec<f64>,
    pub steps: usize,
    /// `|⟨α(H(1))|final⟩|²`.
    pub final_fidelity: f64,
    /// Outcome of one literally sampled measurement sequence (Zeno mode only).
    pub sampled_success: Option<bool>,
    pub warnings: Vec<String>,
}

fn check_initial(path: &HamiltonianPath, psi0: &StateVector) -> Result<StateVector> {
    if psi0.dim() != path.dim() {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: psi0.dim() });
    }
    let (_, g0) = ground_state(&path.evaluate(0.0), DEFAULT_DEGENERACY_TOL)?;
    let overlap = g0.overlap(psi0)?.norm();
    if 1.0 - overlap > INITIAL_STATE_TOL {
        return Err(invalid(format!(
            "initial state is not the groundstate of H(0) (overlap {overlap})"
        )));
    }
    Ok(g0)
}

/// Applies `∏_j e^{-i·T·H(s_j)·Δs}` over midpoints `s_j = (j + ½)Δs`, with
/// `Δs ≈ δ/T` rounded so the grid covers `[0, 1]` exactly.
pub fn evolve_discretized(
    path: &HamiltonianPath,
    schedule: &Schedule,
    delta: f64,
    psi0: &StateVector,
) -> Result<EvolutionReport> {
    if !(delta > 0.0) {
        return Err(invalid("time step must be positive"));
    }
    check_initial(path, psi0)?;
    let t = schedule.total_time;
    let steps = (t / delta).ceil().max(1.0) as usize;
    let ds = 1.0 / steps as f64;
    let mut warnings = Vec::new();
    let grid = (steps + 1).clamp(2, 257);
    match check_adiabatic_condition(path, schedule, grid) {
        Ok(r) if r.margin < 1.0 => warnings.push(format!(
            "adiabatic condition fails: T·ε = {:.4e} < {:.4e} (margin {:.3})",
            r.budget, r.worst_ratio, r.margin
        )),
        Ok(_) => {}
        Err(e) => warnings.push(format!("adiabatic condition not checked: {e}")),
    }

    let mut psi = psi0.amplitudes().clone();
    let mut overlaps = Vec::with_capacity(steps);
    for j in 0..steps {
        let s = (j as f64 + 0.5) * ds;
        let eig = path.evaluate(s).eigen();
        let u = eig.map_eigenvalues(|l| C64::from_polar(1.0, -l * t * ds));
        psi = u * psi;
        let g = eig.eigenvectors.column(0);
        overlaps.push(g.dotc(&psi).norm_sqr());
    }
    let final_state = StateVector::normalized(psi)?;
    let (_, g1) = ground_state(&path.evaluate(1.0), DEFAULT_DEGENERACY_TOL)?;
    Ok(EvolutionReport {
        final_fidelity: g1.fidelity(&final_state)?,
        final_state,
        success_probability: 1.0,
        per_step_overlaps: overlaps,
        steps,
        sampled_success: None,
        warnings,
    })
}

/// How each Zeno measurement is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionBackend {
    /// Projector onto the groundstate from an eigendecomposition.
    Exact,
    /// Phase estimation of the groundvalue-shifted `H(s_j)`.
    PhaseEstimation { bits: Option<u32> },
}

/// Groundstates of `H(j/R)` for `j = 0..=R`.
#[derive(Clone, Debug)]
pub struct ZenoGrid {
    pub groundstates: Vec<StateVector>,
    /// `Δ(H(j/R))` per grid point.
    pub gaps: Vec<f64>,
    /// `‖H((j+1)/R) - H(j/R)‖` per step.
    pub increments: Vec<f64>,
}

impl ZenoGrid {
    pub fn new(path: &HamiltonianPath, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(invalid("Zeno evolution needs at least one step"));
        }
        let mut groundstates = Vec::with_capacity(steps + 1);
        let mut gaps = Vec::with_capacity(steps + 1);
        let mut increments = Vec::with_capacity(steps);
        let mut prev: Option<DenseHermitian> = None;
        for j in 0..=steps {
            let h = path.evaluate(j as f64 / steps as f64);
            let eig = h.eigen();
            let (_, g) = ground_from_eigen(&eig, DEFAULT_DEGENERACY_TOL)?;
            groundstates.push(g);
            gaps.push(if eig.dim() >= 2 { eig.gap() } else { f64::INFINITY });
            if let Some(p) = &prev {
                increments.push(spectral_norm(h.sub(p)?.matrix()));
            }
            prev = Some(h);
        }
        Ok(Self { groundstates, gaps, increments })
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    /// `|⟨α(H(j/R))|α(H((j+1)/R))⟩|²` per step.
    pub fn step_overlaps(&self) -> Vec<f64> {
        self.groundstates
            .windows(2)
            .map(|w| w[0].fidelity(&w[1]).expect("same dimension"))
            .collect()
    }

    /// Exact all-success probability of the exact-projector sequence.
    pub fn closed_form_success(&self) -> f64 {
        self.step_overlaps().iter().product()
    }

    /// `∏_j max(0, 1 - 4η_j²/Δ_j²)²`, the lower bound implied by the
    /// groundstate perturbation inequality applied step by step.
    pub fn perturbative_lower_bound(&self) -> f64 {
        self.increments
            .iter()
            .enumerate()
            .map(|(j, &eta)| {
                let gap = self.gaps[j].min(self.gaps[j + 1]);
                (1.0 - 4.0 * eta * eta / (gap * gap)).max(0.0).powi(2)
            })
            .product()
    }

    /// `R·max_j η_j`, the path speed `η_max`.
    pub fn eta_max(&self) -> f64 {
        self.steps() as f64 * self.increments.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Steps needed for failure probability `ε` under the `O(η²/(RΔ²))` law
/// with constant `c`: `R = ⌈c·η²/(Δ²·ε)⌉`.
pub fn zeno_steps_for(eta_max: f64, min_gap: f64, accuracy: f64, c: f64) -> Result<usize> {
    if !(accuracy > 0.0 && min_gap > 0.0) {
        return Err(invalid("accuracy and gap must be positive"));
    }
    Ok((c * eta_max * eta_max / (min_gap * min_gap * accuracy)).ceil().max(1.0) as usize)
}

/// `R` successive groundstate measurements at `s = j/R`, `j = 1..=R`.
///
/// The report carries the success-branch probabilities and state; one
/// measurement sequence is also sampled with `rng`.
pub fn zeno_evolve(
    path: &HamiltonianPath,
    steps: usize,
    psi0: &StateVector,
    backend: ProjectionBackend,
    rng: &mut Rng,
) -> Result<EvolutionReport> {
    check_initial(path, psi0)?;
    if steps == 0 {
        return Err(invalid("Zeno evolution needs at least one step"));
    }
    let mut psi = psi0.clone();
    let mut overlaps = Vec::with_capacity(steps);
    let mut success = 1.0;
    let mut sampled = true;
    let mut last_ground = None;
    for j in 1..=steps {
        let h = path.evaluate(j as f64 / steps as f64);
        let (p, post) = match backend {
            ProjectionBackend::Exact => {
                let (_, g) = ground_state(&h, DEFAULT_DEGENERACY_TOL)?;
                let c = g.overlap(&psi)?;
                let p = c.norm_sqr();
                let post = if p > 0.0 {
                    StateVector::normalized(g.amplitudes() * (c / c.norm()))?
                } else {
                    g.clone()
                };
                last_ground = Some(g);
                (p, post)
            }
            ProjectionBackend::PhaseEstimation { bits } => {
                let pe = PhaseEstimator::shifted(&h, bits)?;
                let (p, ground, _) = pe.branch_states(&psi)?;
                if p <= 0.0 {
                    return Err(Error::EmptySubspace(format!("step {j} has zero success mass")));
                }
                (p, StateVector::normalized(ground)?)
            }
        };
        overlaps.push(p.clamp(0.0, 1.0));
        success *= p;
        if sampled {
            sampled = rng.gen::<f64>() < p;
        }
        psi = post;
    }
    let g1 = match last_ground {
        Some(g) => g,
        None => ground_state(&path.evaluate(1.0), DEFAULT_DEGENERACY_TOL)?.1,
    };
    Ok(EvolutionReport {
        final_fidelity: g1.fidelity(&psi)?,
        final_state: psi,
        success_probability: success.clamp(0.0, 1.0),
        per_step_overlaps: overlaps,
        steps,
        sampled_success: Some(sampled),
        warnings: Vec::new(),
    })
}

/// Unconditioned exact-projector Zeno evolution: every step applies the
/// two-outcome channel `ρ ↦ PρP + (I-P)ρ(I-P)` with `P` the groundstate
/// projector of `H(j/R)`, keeping failed branches in the mixture.
pub fn zeno_density_evolve(
    path: &HamiltonianPath,
    steps: usize,
    psi0: &StateVector,
) -> Result<DMatrix<C64>> {
    check_initial(path, psi0)?;
    let grid = ZenoGrid::new(path, steps)?;
    let a = psi0.amplitudes();
    let mut rho = a * a.adjoint();
    for g in &grid.groundstates[1..] {
        let g = g.amplitudes();
        let v = &rho * g;
        let w = g.adjoint() * &rho;
        let p = g.dotc(&v);
        // PρP + (I-P)ρ(I-P) = ρ - Pρ - ρP + 2PρP; keeping Pρ = g·(g†ρ) as
        // its own product stops rounding from breaking Hermiticity
        rho -= g * w + &v * g.adjoint();
        rho += g * g.adjoint() * (p * 2.0);
    }
    Ok(rho)
}

/// `⟨φ|ρ|φ⟩`.
pub fn mixed_fidelity(rho: &DMatrix<C64>, phi: &StateVector) -> Result<f64> {
    if rho.nrows() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: phi.dim() });
    }
    let a = phi.amplitudes();
    Ok(a.dotc(&(rho * a)).re.clamp(0.0, 1.0))
}

/// Number of all-success runs out of `runs`, sampling each step's outcome
/// with the given success probabilities and stopping at the first failure.
pub fn sample_all_success(step_probabilities: &[f64], runs: usize, rng: &mut Rng) -> usize {
    (0..runs)
        .filter(|_| step_probabilities.iter().all(|&p| rng.gen::<f64>() < p))
        .count()
}

/// `|⟨α(H)|α(J)⟩|` against `1 - 4‖H-J‖²/Δ²` with `Δ` the smaller gap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationBound {
    pub overlap: f64,
    pub bound: f64,
    pub eta: f64,
    pub gap: f64,
}

impl PerturbationBound {
    /// Allows `1e-12` of rounding slack on the overlap.
    pub fn holds(&self) -> bool {
        self.overlap >= self.bound - 1e-12
    }
}

pub fn groundstate_perturbation_bound(
    h: &DenseHermitian,
    j: &DenseHermitian,
) -> Result<PerturbationBound> {
    if h.dim() != j.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: j.dim() });
    }
    let eh = h.eigen();
    let ej = j.eigen();
    let (_, ah) = ground_from_eigen(&eh, DEFAULT_DEGENERACY_TOL)?;
    let (_, aj) = ground_from_eigen(&ej, DEFAULT_DEGENERACY_TOL)?;
    let gap = if eh.dim() >= 2 { eh.gap().min(ej.gap()) } else { f64::INFINITY };
    let eta = spectral_norm(h.sub(j)?.matrix());
    Ok(PerturbationBound {
        overlap: ah.overlap(&aj)?.norm(),
        bound: 1.0 - 4.0 * eta * eta / (gap * gap),
        eta,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::path::{jagged_path, linear_path};
    use crate::linalg::{random_hermitian, random_state};
    use crate::seeding::rng_from_seed;

    fn projector_path(overlap: f64) -> HamiltonianPath {
        let a = StateVector::from_real(&[1.0, 0.0]).unwrap();
        let b = StateVector::from_real(&[overlap, (1.0 - overlap * overlap).sqrt()]).unwrap();
        linear_path(
            &DenseHermitian::projector_complement(&a),
            &DenseHermitian::projector_complement(&b),
        )
        .unwrap()
    }

    #[test]
    fn constant_path_is_stationary() {
        let a = random_state(4, &mut rng_from_seed(1));
        let p = jagged_path(std::slice::from_ref(&a)).unwrap();
        let r = evolve_discretized(&p, &Schedule::new(5.0, 0.1).unwrap(), 0.1, &a).unwrap();
        assert!(r.final_state.fidelity(&a).unwrap() > 1.0 - 1e-12);
        let z = zeno_evolve(&p, 17, &a, ProjectionBackend::Exact, &mut rng_from_seed(2)).unwrap();
        assert!((z.success_probability - 1.0).abs() < 1e-12);
        assert_eq!(z.sampled_success, Some(true));
    }

    #[test]
    fn discretized_projector_path() {
        let p = projector_path(0.9);
        let cond = check_adiabatic_condition(&p, &Schedule::new(1.0, 0.01).unwrap(), 101).unwrap();
        let sched = Schedule::satisfying(&cond, 0.01).unwrap();
        let psi0 = StateVector::basis(2, 0);
        let r = evolve_discretized(&p, &sched, 0.05, &psi0).unwrap();
        assert!(r.final_fidelity >= 0.99, "{}", r.final_fidelity);
        assert!(r.warnings.is_empty());

        let short = evolve_discretized(&p, &Schedule::new(0.5, 0.01).unwrap(), 0.05, &psi0).unwrap();
        assert_eq!(short.warnings.len(), 1);
        let mut last = 0.0;
        for t in [0.5, 2.0, 8.0, 32.0] {
            let f = evolve_discretized(&p, &Schedule::new(t, 0.01).unwrap(), 0.01 * t, &psi0)
                .unwrap()
                .final_fidelity;
            assert!(f >= last - 1e-3, "T={t}: {f} < {last}");
            last = f;
        }
        assert!(evolve_discretized(&p, &sched, 0.05, &StateVector::basis(2, 1)).is_err());
    }

    #[test]
    fn zeno_matches_closed_form() {
        let mut rng = rng_from_seed(3);
        let states: Vec<_> = (0..3).map(|_| random_state(4, &mut rng)).collect();
        let p = jagged_path(&states).unwrap();
        let grid = ZenoGrid::new(&p, 100).unwrap();
        let r = zeno_evolve(&p, 100, &states[0], ProjectionBackend::Exact, &mut rng).unwrap();
        assert!((r.success_probability - grid.closed_form_success()).abs() < 1e-12);
        assert!(r.final_state.fidelity(&states[2]).unwrap() > 1.0 - 1e-12);
        assert!(grid.perturbative_lower_bound() <= grid.closed_form_success() + 1e-12);
    }

    #[test]
    fn zeno_phase_estimation_backend() {
        let mut rng = rng_from_seed(4);
        let states: Vec<_> = (0..2).map(|_| random_state(2, &mut rng)).collect();
        let p = jagged_path(&states).unwrap();
        let exact = zeno_evolve(&p, 40, &states[0], ProjectionBackend::Exact, &mut rng).unwrap();
        let pe = zeno_evolve(
            &p,
            40,
            &states[0],
            ProjectionBackend::PhaseEstimation { bits: Some(9) },
            &mut rng,
        )
        .unwrap();
        assert!((pe.success_probability - exact.success_probability).abs() < 0.05);
        assert!(pe.final_fidelity > 0.95);
    }

    #[test]
    fn failure_mass_scales_inversely() {
        let p = projector_path(0.7);
        let f = |r| 1.0 - ZenoGrid::new(&p, r).unwrap().closed_form_success();
        let ratio = f(200) / f(400);
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn perturbation_bound_examples() {
        let mut rng = rng_from_seed(5);
        let h = random_hermitian(4, &mut rng);
        let same = groundstate_perturbation_bound(&h, &h).unwrap();
        assert!((same.overlap - 1.0).abs() < 1e-12 && same.bound == 1.0);
        let j = h.add(&random_hermitian(4, &mut rng).scaled(1e-6)).unwrap();
        let b = groundstate_perturbation_bound(&h, &j).unwrap();
        assert!(b.overlap >= 1.0 - 1e-8);
        for _ in 0..200 {
            let h = random_hermitian(4, &mut rng);
            let scale = rng.gen_range(0.0..0.5);
            let j = h.add(&random_hermitian(4, &mut rng).scaled(scale)).unwrap();
            assert!(groundstate_perturbation_bound(&h, &j).unwrap().holds());
        }
    }

    #[test]
    fn sampled_frequency_tracks_product() {
        let probs = vec![0.99; 20];
        let exact: f64 = probs.iter().product();
        let runs = 10_000;
        let hits = sample_all_success(&probs, runs, &mut rng_from_seed(6));
        let sigma = (exact * (1.0 - exact) / runs as f64).sqrt();
        assert!((hits as f64 / runs as f64 - exact).abs() < 3.0 * sigma);
    }

    #[test]
    fn mixture_keeps_failed_branches() {
        let path = projector_path(0.3);
        let psi0 = StateVector::basis(2, 0);
        for r in [1, 10, 400] {
            let rho = zeno_density_evolve(&path, r, &psi0).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!((&rho - rho.adjoint()).norm() < 1e-12);
            let grid = ZenoGrid::new(&path, r).unwrap();
            let f = mixed_fidelity(&rho, &grid.groundstates[r]).unwrap();
            // failed branches can fall back into the groundstate later
            assert!(f >= grid.closed_form_success() - 1e-12);
        }
        // one step: fidelity is the plain overlap squared
        let rho = zeno_density_evolve(&path, 1, &psi0).unwrap();
        let g1 = ZenoGrid::new(&path, 1).unwrap().groundstates[1].clone();
        assert!((mixed_fidelity(&rho, &g1).unwrap() - 0.09).abs() < 1e-12);
    }
}
