//! Perfect and near-perfect matchings of `K_{n,n}`, their annealed
//! Metropolis chains, and the seed-state register procedure.

use std::collections::HashMap;
use std::fmt::Write as _;

use itertools::Itertools;
use nalgebra::DVector;
use rand::Rng as _;

use super::chain::{metropolis_chain, NeighborGraph};
use super::sequence::ChainSequence;
use crate::error::{invalid, Error, Result};
use crate::linalg::{StateVector, C64, ZERO};
use crate::seeding::Rng;

/// Largest side size enumerated.
pub const MAX_MATCHING_SIDE: usize = 4;

/// Edges `(left, right)` sorted by left vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    edges: Vec<(usize, usize)>,
}

impl Matching {
    fn new(mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        Self { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Unmatched `(left, right)` pair of a near-perfect matching on side `n`.
    fn holes(&self, n: usize) -> Option<(usize, usize)> {
        if self.edges.len() + 1 != n {
            return None;
        }
        let u = (0..n).find(|&u| self.edges.iter().all(|e| e.0 != u))?;
        let v = (0..n).find(|&v| self.edges.iter().all(|e| e.1 != v))?;
        Some((u, v))
    }

    fn replaced(&self, old: (usize, usize), new: (usize, usize)) -> Self {
        Self::new(self.edges.iter().map(|&e| if e == old { new } else { e }).collect())
    }
}

/// Matchings of sizes `n` and `n - 1` in `K_{n,n}` with a target subgraph.
///
/// Perfect matchings come first in lexicographic permutation order, then
/// near-perfect ones ordered by left hole and then by assignment.
#[derive(Clone, Debug)]
pub struct MatchingSpace {
    n: usize,
    target: Vec<Vec<bool>>,
    states: Vec<Matching>,
    perfect: usize,
    index: HashMap<Matching, usize>,
}

pub fn matchings_space(n: usize, target_edges: &[(usize, usize)]) -> Result<MatchingSpace> {
    if n == 0 || n > MAX_MATCHING_SIDE {
        return Err(invalid(format!("side size {n} outside 1..={MAX_MATCHING_SIDE}")));
    }
    let mut target = vec![vec![false; n]; n];
    for &(u, v) in target_edges {
        if u >= n || v >= n {
            return Err(invalid(format!("edge ({u}, {v}) outside K_{n},{n}")));
        }
        target[u][v] = true;
    }
    let mut states: Vec<Matching> = (0..n)
        .permutations(n)
        .map(|p| Matching::new(p.into_iter().enumerate().collect()))
        .collect();
    let perfect = states.len();
    for hole in 0..n {
        let lefts: Vec<usize> = (0..n).filter(|&u| u != hole).collect();
        for rights in (0..n).permutations(n - 1) {
            states.push(Matching::new(lefts.iter().copied().zip(rights).collect()));
        }
    }
    let index = states.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect();
    Ok(MatchingSpace { n, target, states, perfect, index })
}

/// All `n²` edges of `K_{n,n}`.
pub fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).cartesian_product(0..n).collect()
}

impl MatchingSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Power-of-two embedding dimension.
    pub fn dim(&self) -> usize {
        self.len().next_power_of_two()
    }

    pub fn states(&self) -> &[Matching] {
        &self.states
    }

    pub fn perfect_count(&self) -> usize {
        self.perfect
    }

    pub fn is_perfect(&self, k: usize) -> bool {
        k < self.perfect
    }

    pub fn index_of(&self, m: &Matching) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn target_edges(&self) -> Vec<(usize, usize)> {
        complete_edges(self.n).into_iter().filter(|&(u, v)| self.target[u][v]).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.target.iter().all(|r| r.iter().all(|&b| b))
    }

    /// Edges of state `k` outside the target graph.
    pub fn non_target_edges(&self, k: usize) -> usize {
        self.states[k].edges.iter().filter(|&&(u, v)| !self.target[u][v]).count()
    }

    /// Perfect matchings using only target edges.
    pub fn target_perfect(&self) -> Vec<usize> {
        (0..self.perfect).filter(|&k| self.non_target_edges(k) == 0).collect()
    }

    /// Single-edge remove, add and slide moves (a symmetric relation).
    pub fn neighbor_graph(&self) -> NeighborGraph {
        let n = self.n;
        let mut adjacency = vec![Vec::new(); self.len()];
        for (k, m) in self.states.iter().enumerate() {
            if let Some((u, v)) = m.holes(n) {
                let mut moves = vec![Matching::new(
                    m.edges.iter().copied().chain(std::iter::once((u, v))).collect(),
                )];
                for &(z, w) in &m.edges {
                    moves.push(m.replaced((z, w), (u, w)));
                    moves.push(m.replaced((z, w), (z, v)));
                }
                adjacency[k].extend(moves.iter().map(|mv| self.index[mv]));
            } else {
                for &e in &m.edges {
                    let smaller = Matching::new(m.edges.iter().copied().filter(|&x| x != e).collect());
                    adjacency[k].push(self.index[&smaller]);
                }
            }
        }
        NeighborGraph::new(adjacency).expect("matching moves are symmetric")
    }

    /// `n^{[near-perfect]}·λ^{#non-target edges}` per state.
    pub fn weights(&self, lambda: f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let near = if self.is_perfect(k) { 1.0 } else { self.n as f64 };
                near * lambda.powi(self.non_target_edges(k) as i32)
            })
            .collect()
    }

    /// Uniform superposition over the target graph's perfect matchings.
    pub fn uniform_target_perfect(&self) -> Result<StateVector> {
        let ks = self.target_perfect();
        if ks.is_empty() {
            return Err(Error::EmptySubspace("target graph has no perfect matching".into()));
        }
        let mut amps = DVector::from_element(self.dim(), ZERO);
        let a = C64::new(1.0 / (ks.len() as f64).sqrt(), 0.0);
        for k in ks {
            amps[k] = a;
        }
        Ok(StateVector::new(amps).expect("unit by construction"))
    }
}

/// The seed `Σ_m |m⟩ + √n Σ_{m'} |m'⟩` (normalized), produced by
/// simulating the register procedure:
/// 1. uniform superposition over perfect matchings,
/// 2. an ancilla in `|0⟩ + √n Σ_{i=1}^{n} |i⟩`,
/// 3. `|m, i⟩ ↦ |m - e_i, 0⟩` for `i ≥ 1`, where `e_i` is the edge at left
///    vertex `i - 1`.
pub fn matchings_seed_qsample(n: usize) -> Result<StateVector> {
    let space = matchings_space(n, &complete_edges(n))?;
    let anc = n + 1;
    let mut joint = DVector::from_element(space.len() * anc, ZERO);
    let perm_amp = 1.0 / (space.perfect as f64).sqrt();
    let anc_norm = (1.0 + (n * n) as f64).sqrt();
    for k in 0..space.perfect {
        joint[k * anc] = C64::new(perm_amp / anc_norm, 0.0);
        for i in 1..anc {
            joint[k * anc + i] = C64::new(perm_amp * (n as f64).sqrt() / anc_norm, 0.0);
        }
    }
    // step 3 is a permutation of the joint basis on the populated support
    let mut mapped = DVector::from_element(joint.len(), ZERO);
    for (src, amp) in joint.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let (k, i) = (src / anc, src % anc);
        let dst = if i == 0 {
            src
        } else {
            let m = &space.states[k];
            let smaller = Matching::new(m.edges.iter().copied().filter(|e| e.0 != i - 1).collect());
            space.index[&smaller] * anc
        };
        if mapped[dst] != ZERO {
            return Err(invalid("register map is not injective"));
        }
        mapped[dst] = *amp;
    }
    let mut amps = DVector::from_element(space.dim(), ZERO);
    for k in 0..space.len() {
        amps[k] = mapped[k * anc];
    }
    let leftover: f64 = (0..mapped.len())
        .filter(|j| j % anc != 0)
        .map(|j| mapped[j].norm_sqr())
        .sum();
    debug_assert!(leftover < 1e-14, "ancilla not returned to |0⟩");
    StateVector::new(amps)
}

/// Metropolis chains for `λ_k = ratio^k`, `k = 0..=steps`, on the
/// matchings space; a complete target gives a constant sequence.
pub fn anneal_weights_sequence(
    space: &MatchingSpace,
    steps: usize,
    ratio: f64,
    max_variation: f64,
) -> Result<ChainSequence> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(invalid("activity ratio must lie in (0, 1)"));
    }
    let graph = space.neighbor_graph();
    let chains = (0..=steps)
        .map(|k| metropolis_chain(&space.weights(ratio.powi(k as i32)), &graph))
        .collect::<Result<Vec<_>>>()?;
    let mut seq = ChainSequence::new(chains, max_variation)?;
    if space.target_perfect().is_empty() {
        seq.warnings.push(
            "target graph has no perfect matching; the final distribution degenerates".into(),
        );
    }
    Ok(seq)
}

#[derive(Clone, Debug)]
pub struct PerfectProjection {
    pub success: bool,
    pub post_state: StateVector,
    pub probability: f64,
}

/// Two-outcome measurement onto the span of the target graph's perfect
/// matchings (all perfect matchings when the target is complete).
pub fn project_perfect(
    state: &StateVector,
    space: &MatchingSpace,
    rng: &mut Rng,
) -> Result<PerfectProjection> {
    if state.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: state.dim() });
    }
    let inside = space.target_perfect();
    if inside.is_empty() {
        return Err(Error::EmptySubspace("target graph has no perfect matching".into()));
    }
    let mut hit = DVector::from_element(state.dim(), ZERO);
    for &k in &inside {
        hit[k] = state.amplitudes()[k];
    }
    let probability = hit.norm_squared().min(1.0);
    let success = rng.gen::<f64>() < probability;
    let post = if success { hit } else { state.amplitudes() - hit };
    Ok(PerfectProjection { success, post_state: StateVector::normalized(post)?, probability })
}

/// `u v` lines; `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = || Error::Parse { line: lineno + 1, message: format!("expected `u v`, found `{line}`") };
        let (u, v) = line.split_whitespace().collect_tuple().ok_or_else(err)?;
        edges.push((u.parse().map_err(|_| err())?, v.parse().map_err(|_| err())?));
    }
    Ok(edges)
}

pub fn format_edge_list(edges: &[(usize, usize)]) -> String {
    let mut out = String::new();
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::chain::{pi_state, stationary};
    use crate::markov::sequence::check_slowly_varying;
    use crate::seeding::rng_from_seed;

    #[test]
    fn enumeration_counts() {
        for (n, perfect, near) in [(1, 1, 1), (2, 2, 4), (3, 6, 18), (4, 24, 96)] {
            let s = matchings_space(n, &complete_edges(n)).unwrap();
            assert_eq!(s.perfect_count(), perfect);
            assert_eq!(s.len() - perfect, near);
            for (k, m) in s.states().iter().enumerate() {
                let want = if s.is_perfect(k) { n } else { n - 1 };
                assert_eq!(m.len(), want);
                let lefts: std::collections::HashSet<_> = m.edges().iter().map(|e| e.0).collect();
                let rights: std::collections::HashSet<_> = m.edges().iter().map(|e| e.1).collect();
                assert_eq!(lefts.len(), m.len());
                assert_eq!(rights.len(), m.len());
            }
        }
        let one = matchings_space(1, &[(0, 0)]).unwrap();
        assert!(one.states()[1].is_empty());
        assert!(matchings_space(5, &[]).is_err());
    }

    fn direct_seed(n: usize) -> StateVector {
        let s = matchings_space(n, &complete_edges(n)).unwrap();
        let mut amps = DVector::from_element(s.dim(), ZERO);
        for k in 0..s.len() {
            amps[k] = C64::new(if s.is_perfect(k) { 1.0 } else { (n as f64).sqrt() }, 0.0);
        }
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn seed_matches_direct_construction() {
        for n in 1..=4 {
            let seed = matchings_seed_qsample(n).unwrap();
            assert!(seed.max_abs_diff(&direct_seed(n)) < 1e-10);
        }
        let seed = matchings_seed_qsample(2).unwrap();
        let space = matchings_space(2, &complete_edges(2)).unwrap();
        let r = project_perfect(&seed, &space, &mut rng_from_seed(1)).unwrap();
        assert!((r.probability - 0.2).abs() < 1e-12);
    }

    #[test]
    fn seed_is_uniform_weight_stationary_state() {
        let space = matchings_space(3, &complete_edges(3)).unwrap();
        let c = metropolis_chain(&space.weights(1.0), &space.neighbor_graph()).unwrap();
        let pi = stationary(&c).unwrap();
        assert!(pi_state(&pi).max_abs_diff(&matchings_seed_qsample(3).unwrap()) < 1e-9);
    }

    #[test]
    fn annealing_examples() {
        let complete = matchings_space(2, &complete_edges(2)).unwrap();
        let seq = anneal_weights_sequence(&complete, 5, 0.7, 0.5).unwrap();
        let r = check_slowly_varying(&seq).unwrap();
        assert!(r.variations.iter().all(|&v| v < 1e-12));

        let space = matchings_space(2, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        let seq = anneal_weights_sequence(&space, 20, 0.7, 0.5).unwrap();
        let r = check_slowly_varying(&seq).unwrap();
        assert!(r.passes());
        assert!(r.variations.iter().all(|&v| v <= 0.5));
        assert!(r.overlaps.iter().all(|&o| o >= 0.5));
        let pi = stationary(seq.chains.last().unwrap()).unwrap();
        let lambda = 0.7f64.powi(20);
        let bad: f64 = (0..space.len()).filter(|&k| space.non_target_edges(k) > 0).map(|k| pi.pi[k]).sum();
        // one non-target state per unit of λ against at least the two target states
        assert!(bad <= 4.0 * lambda / (1.0 + lambda), "{bad}");

        let empty = matchings_space(2, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(anneal_weights_sequence(&empty, 3, 0.7, 0.5).unwrap().warnings.len(), 1);
    }

    #[test]
    fn projection_examples() {
        let space = matchings_space(2, &complete_edges(2)).unwrap();
        let on_perfect = space.uniform_target_perfect().unwrap();
        let r = project_perfect(&on_perfect, &space, &mut rng_from_seed(2)).unwrap();
        assert!((r.probability - 1.0).abs() < 1e-12 && r.success);
        let none = matchings_space(2, &[(0, 0)]).unwrap();
        assert!(matches!(
            project_perfect(&on_perfect, &none, &mut rng_from_seed(3)),
            Err(Error::EmptySubspace(_))
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let edges = vec![(0, 1), (2, 0)];
        assert_eq!(parse_edge_list(&format_edge_list(&edges)).unwrap(), edges);
        assert!(parse_edge_list("0\n").is_err());
        assert!(parse_edge_list("0 1 2\n").is_err());
    }
}
