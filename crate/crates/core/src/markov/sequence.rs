use super::chain::{pi_state, second_gap, stationary, MarkovChain, StationaryDistribution};
use crate::adiabatic::{
    evolve_discretized, jagged_path, zeno_evolve, EvolutionReport, ProjectionBackend, Schedule,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::StateVector;
use crate::seeding::Rng;

/// Chains on a common state space with a bound on consecutive variation.
#[derive(Clone, Debug)]
pub struct ChainSequence {
    pub chains: Vec<MarkovChain>,
    /// Largest allowed `‖π_t - π_{t+1}‖`.
    pub max_variation: f64,
    pub warnings: Vec<String>,
}

impl ChainSequence {
    pub fn new(chains: Vec<MarkovChain>, max_variation: f64) -> Result<Self> {
        let first = chains.first().ok_or_else(|| invalid("chain sequence is empty"))?;
        if let Some(c) = chains.iter().find(|c| c.dim() != first.dim()) {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: c.dim() });
        }
        if !(max_variation > 0.0 && max_variation <= 1.0) {
            return Err(invalid("variation threshold must lie in (0, 1]"));
        }
        Ok(Self { chains, max_variation, warnings: Vec::new() })
    }

    /// Threshold `1 - 1/n^c`.
    pub fn with_exponent(chains: Vec<MarkovChain>, n: f64, c: f64) -> Result<Self> {
        Self::new(chains, 1.0 - n.powf(-c))
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn stationaries(&self) -> Result<Vec<StationaryDistribution>> {
        self.chains.iter().map(stationary).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlowVariationReport {
    pub variations: Vec<f64>,
    pub fidelities: Vec<f64>,
    /// `⟨π_t|π_{t+1}⟩`; equals the fidelity for real nonnegative amplitudes.
    pub overlaps: Vec<f64>,
    /// Second-eigenvalue gap of every chain.
    pub second_gaps: Vec<f64>,
    /// Steps whose variation exceeds the threshold.
    pub violations: Vec<usize>,
    /// `⟨π_t|π_{t+1}⟩ ≥ 1 - ‖π_t - π_{t+1}‖` on every step.
    pub fidelity_bound_holds: bool,
}

impl SlowVariationReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty() && self.fidelity_bound_holds
    }
}

pub fn check_slowly_varying(seq: &ChainSequence) -> Result<SlowVariationReport> {
    let pis = seq.stationaries()?;
    let states: Vec<StateVector> = pis.iter().map(pi_state).collect();
    let mut report = SlowVariationReport {
        variations: Vec::new(),
        fidelities: Vec::new(),
        overlaps: Vec::new(),
        second_gaps: seq.chains.iter().map(second_gap).collect::<Result<_>>()?,
        violations: Vec::new(),
        fidelity_bound_holds: true,
    };
    for t in 0..pis.len().saturating_sub(1) {
        let v = pis[t].variation(&pis[t + 1]);
        let overlap = states[t].overlap(&states[t + 1])?.norm();
        if v > seq.max_variation {
            report.violations.push(t);
        }
        if overlap < 1.0 - v - 1e-12 {
            report.fidelity_bound_holds = false;
        }
        report.variations.push(v);
        report.fidelities.push(pis[t].fidelity(&pis[t + 1]));
        report.overlaps.push(overlap);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QsampleMode {
    Zeno { steps: usize, backend: ProjectionBackend },
    Schrodinger { total_time: f64, delta: f64 },
}

#[derive(Clone, Debug)]
pub struct QsampleReport {
    pub evolution: EvolutionReport,
    /// Exact `|π_T⟩`.
    pub target: StateVector,
    /// `|⟨π_T|final⟩|²`.
    pub fidelity: f64,
    pub variation: SlowVariationReport,
}

/// Jagged path through the groundstates `|π_t⟩`, followed by the chosen
/// evolution from `seed`.
pub fn qsample_sequence(
    seq: &ChainSequence,
    seed: &StateVector,
    mode: QsampleMode,
    rng: &mut Rng,
) -> Result<QsampleReport> {
    let variation = check_slowly_varying(seq)?;
    if !variation.passes() {
        return Err(invalid(format!(
            "sequence is not slowly varying (steps {:?} exceed {})",
            variation.violations, seq.max_variation
        )));
    }
    let states: Vec<StateVector> = seq.stationaries()?.iter().map(pi_state).collect();
    let path = jagged_path(&states)?;
    let evolution = match mode {
        QsampleMode::Zeno { steps, backend } => zeno_evolve(&path, steps, seed, backend, rng)?,
        QsampleMode::Schrodinger { total_time, delta } => {
            evolve_discretized(&path, &Schedule::new(total_time, 0.01)?, delta, seed)?
        }
    };
    let target = states.last().expect("nonempty sequence").clone();
    Ok(QsampleReport {
        fidelity: target.fidelity(&evolution.final_state)?,
        evolution,
        target,
        variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::ZenoGrid;
    use crate::markov::chain::{metropolis_chain, NeighborGraph};
    use crate::seeding::rng_from_seed;

    fn interpolation(weights: &[[f64; 8]]) -> ChainSequence {
        let g = NeighborGraph::path(8);
        let chains = weights.iter().map(|w| metropolis_chain(w, &g).unwrap()).collect();
        ChainSequence::new(chains, 0.5).unwrap()
    }

    #[test]
    fn constant_and_disjoint_sequences() {
        let c = metropolis_chain(&[1.0, 2.0, 3.0], &NeighborGraph::path(3)).unwrap();
        let seq = ChainSequence::new(vec![c.clone(), c.clone()], 0.5).unwrap();
        let r = check_slowly_varying(&seq).unwrap();
        assert!(r.variations[0] < 1e-12 && (r.overlaps[0] - 1.0).abs() < 1e-12);

        let p = StationaryDistribution::new(vec![1.0, 0.0]).unwrap();
        let q = StationaryDistribution::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(p.variation(&q), 1.0);
        assert_eq!(pi_state(&p).overlap(&pi_state(&q)).unwrap().norm(), 0.0);
    }

    #[test]
    fn single_chain_returns_seed() {
        let c = metropolis_chain(&[1.0, 2.0, 3.0, 4.0], &NeighborGraph::path(4)).unwrap();
        let seq = ChainSequence::new(vec![c.clone()], 0.5).unwrap();
        let seed = pi_state(&stationary(&c).unwrap());
        let mode = QsampleMode::Zeno { steps: 10, backend: ProjectionBackend::Exact };
        let r = qsample_sequence(&seq, &seed, mode, &mut rng_from_seed(1)).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_chain_interpolation() {
        let seq = interpolation(&[
            [1.0; 8],
            [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5],
            [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        ]);
        let pis = seq.stationaries().unwrap();
        let seed = pi_state(&pis[0]);
        let mode = QsampleMode::Zeno { steps: 500, backend: ProjectionBackend::Exact };
        let r = qsample_sequence(&seq, &seed, mode, &mut rng_from_seed(2)).unwrap();
        assert!(r.fidelity >= 0.99);
        let states: Vec<_> = pis.iter().map(pi_state).collect();
        let grid = ZenoGrid::new(&jagged_path(&states).unwrap(), 500).unwrap();
        assert!((grid.closed_form_success() - r.evolution.success_probability).abs() < 1e-12);

        let schro = QsampleMode::Schrodinger { total_time: 400.0, delta: 0.5 };
        let r = qsample_sequence(&seq, &seed, schro, &mut rng_from_seed(3)).unwrap();
        assert!(r.fidelity >= 0.99, "{}", r.fidelity);
    }

    #[test]
    fn rejects_fast_sequences_and_bad_seeds() {
        let mut sharp = [1e-6; 8];
        sharp[7] = 1.0;
        let seq = interpolation(&[[1.0; 8], sharp]);
        let seed = pi_state(&seq.stationaries().unwrap()[0]);
        let mode = QsampleMode::Zeno { steps: 10, backend: ProjectionBackend::Exact };
        assert!(qsample_sequence(&seq, &seed, mode, &mut rng_from_seed(4)).is_err());

        let ok = interpolation(&[[1.0; 8]]);
        let wrong = StateVector::basis(8, 3);
        assert!(qsample_sequence(&ok, &wrong, mode, &mut rng_from_seed(5)).is_err());
    }
}
