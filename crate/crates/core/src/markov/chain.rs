use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_gap, DenseHermitian, StateVector, C64, ZERO};

/// Row-sum and nonnegativity tolerance for transition matrices.
pub const STOCHASTIC_TOL: f64 = 1e-10;
/// Largest detailed-balance residual accepted by [`chain_hamiltonian`].
pub const REVERSIBILITY_TOL: f64 = 1e-8;

type RatioFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// A row-stochastic chain on `0..N`, optionally carrying a `π_i/π_j` oracle.
#[derive(Clone)]
pub struct MarkovChain {
    transition: DMatrix<f64>,
    ratio: Option<RatioFn>,
}

impl std::fmt::Debug for MarkovChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MarkovChain")
            .field("transition", &self.transition)
            .field("has_ratio", &self.ratio.is_some())
            .finish()
    }
}

impl MarkovChain {
    pub fn new(transition: DMatrix<f64>) -> Result<Self> {
        let n = transition.nrows();
        if n == 0 || transition.ncols() != n {
            return Err(invalid("transition matrix must be square and nonempty"));
        }
        for i in 0..n {
            let row = transition.row(i);
            if let Some(j) = (0..n).find(|&j| !(row[j] >= -STOCHASTIC_TOL)) {
                return Err(invalid(format!("negative transition probability at ({i}, {j})")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(invalid(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { transition, ratio: None })
    }

    /// Attaches a stationary-ratio oracle `(i, j) ↦ π_i/π_j`.
    pub fn with_ratio(mut self, ratio: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        self.ratio = Some(Arc::new(ratio));
        self
    }

    pub fn dim(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.transition[(i, j)]
    }

    pub fn pi_ratio(&self, i: usize, j: usize) -> Option<f64> {
        self.ratio.as_ref().map(|r| r(i, j))
    }

    /// `max_{i,j} |π_i M[i,j] - π_j M[j,i]|`.
    pub fn reversibility_residual(&self, pi: &StationaryDistribution) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let r = pi.pi[i] * self.transition[(i, j)] - pi.pi[j] * self.transition[(j, i)];
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Rows of whitespace-separated probabilities; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|w| {
                    w.parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("invalid probability `{w}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("row has {} entries, expected {n}", r.len()),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            let row: Vec<String> = self.transition.row(i).iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// A probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() || pi.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("distribution entries must be nonnegative"));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("distribution sums to {sum}")));
        }
        Ok(Self { pi })
    }

    /// Normalizes positive weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(invalid("weights must have positive sum"));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// `½ Σ|p_i - q_i|`.
    pub fn variation(&self, other: &Self) -> f64 {
        0.5 * self.pi.iter().zip(&other.pi).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// `Σ √(p_i q_i)`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.pi.iter().zip(&other.pi).map(|(a, b)| (a * b).sqrt()).sum()
    }
}

/// Left eigenvector for eigenvalue 1, by a direct linear solve.
pub fn stationary(chain: &MarkovChain) -> Result<StationaryDistribution> {
    let n = chain.dim();
    let mut a = chain.transition.transpose() - DMatrix::<f64>::identity(n, n);
    let sv = a.clone().singular_values();
    let scale = sv.max().max(1.0);
    let multiplicity = sv.iter().filter(|&&s| s < 1e-10 * scale * n as f64).count();
    if multiplicity > 1 {
        return Err(Error::NotErgodic { multiplicity });
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = a.lu().solve(&rhs).ok_or(Error::NotErgodic { multiplicity: 2 })?;
    let pi: Vec<f64> = x.iter().map(|&p| p.max(0.0)).collect();
    StationaryDistribution::from_weights(&pi)
}

/// `H_M = I - Diag(√π)·M·Diag(1/√π)`.
pub fn chain_hamiltonian(chain: &MarkovChain, pi: &StationaryDistribution) -> Result<DenseHermitian> {
    let n = chain.dim();
    if pi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pi.len() });
    }
    let residual = chain.reversibility_residual(pi);
    if residual > REVERSIBILITY_TOL {
        return Err(Error::NotReversible { residual });
    }
    if pi.pi.iter().any(|&p| p <= 0.0) {
        return Err(invalid("stationary distribution must be strictly positive"));
    }
    let sq: Vec<f64> = pi.pi.iter().map(|p| p.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let conj = sq[i] * chain.transition[(i, j)] / sq[j];
        let mirror = sq[j] * chain.transition[(j, i)] / sq[i];
        let id = if i == j { 1.0 } else { 0.0 };
        id - 0.5 * (conj + mirror)
    });
    DenseHermitian::from_real_symmetric(&m)
}

/// `H ⊕ I` on the next power-of-two dimension; padding coordinates sit at
/// eigenvalue 1, above the groundvalue 0.
pub fn padded_hamiltonian(h: &DenseHermitian) -> DenseHermitian {
    let n = h.dim();
    let dim = n.next_power_of_two();
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    m.view_mut((0, 0), (n, n)).copy_from(h.matrix());
    for k in n..dim {
        m[(k, k)] = C64::new(1.0, 0.0);
    }
    DenseHermitian::new(m).expect("block sum of Hermitian matrices")
}

/// `Δ(H_M) = 1 - λ₂(M)`.
pub fn second_gap(chain: &MarkovChain) -> Result<f64> {
    let pi = stationary(chain)?;
    spectral_gap(&chain_hamiltonian(chain, &pi)?)
}

/// `Σ √π_i |i⟩`, zero-padded to a power-of-two dimension.
pub fn pi_state(pi: &StationaryDistribution) -> StateVector {
    let amps: Vec<f64> = pi.pi.iter().map(|p| p.sqrt()).collect();
    let s = StateVector::normalized(nalgebra::DVector::from_iterator(
        amps.len(),
        amps.iter().map(|&a| C64::new(a, 0.0)),
    ))
    .expect("distribution has positive mass");
    s.padded(pi.len().next_power_of_two()).expect("padding grows the dimension")
}

/// Symmetric adjacency lists without self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn new(mut adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let n = adjacency.len();
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        for (i, list) in adjacency.iter().enumerate() {
            for &j in list {
                if j >= n || j == i {
                    return Err(invalid(format!("bad neighbor {j} of {i}")));
                }
                if adjacency[j].binary_search(&i).is_err() {
                    return Err(invalid(format!("neighbor relation {i} → {j} is not symmetric")));
                }
            }
        }
        Ok(Self { adjacency })
    }

    pub fn path(n: usize) -> Self {
        let adjacency = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        Self { adjacency }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Lazy Metropolis chain with `π ∝ weights`.
///
/// Each neighbor is proposed with probability `1/d_max` (symmetric even on
/// irregular graphs) and accepted with `min(1, w_j/w_i)`; the remainder
/// stays put, and the result is mixed half-and-half with the identity.
pub fn metropolis_chain(weights: &[f64], graph: &NeighborGraph) -> Result<MarkovChain> {
    let n = weights.len();
    if graph.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: graph.len() });
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(invalid("Metropolis weights must be positive"));
    }
    if !graph.is_connected() {
        return Err(Error::DisconnectedProposal);
    }
    let d = graph.max_degree().max(1) as f64;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut moved = 0.0;
        for &j in graph.neighbors(i) {
            let p = 0.5 * (weights[j] / weights[i]).min(1.0) / d;
            m[(i, j)] = p;
            moved += p;
        }
        m[(i, i)] = 1.0 - moved;
    }
    let w: Vec<f64> = weights.to_vec();
    Ok(MarkovChain::new(m)?.with_ratio(move |i, j| w[i] / w[j]))
}

/// Random reversible chain from symmetric conductances `S` with a
/// connected backbone: `M_ij = S_ij / Σ_k S_ik`. Also returns
/// `π_i ∝ Σ_k S_ik`, known from the construction.
pub fn random_reversible_chain<R: rand::Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<(MarkovChain, Vec<f64>)> {
    if n == 0 {
        return Err(invalid("chain needs at least one state"));
    }
    let mut s = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = rng.gen_range(0.1..1.0);
        if i + 1 < n {
            let w = rng.gen_range(0.1..1.0);
            s[(i, i + 1)] = w;
            s[(i + 1, i)] = w;
        }
        for j in (i + 2)..n {
            if rng.gen_bool(0.2) {
                let w = rng.gen_range(0.0..1.0);
                s[(i, j)] = w;
                s[(j, i)] = w;
            }
        }
    }
    let rows: Vec<f64> = (0..n).map(|i| s.row(i).sum()).collect();
    let total: f64 = rows.iter().sum();
    let chain = MarkovChain::new(DMatrix::from_fn(n, n, |i, j| s[(i, j)] / rows[i]))?;
    Ok((chain, rows.iter().map(|r| r / total).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ground_state, DEFAULT_DEGENERACY_TOL};

    fn two_state() -> MarkovChain {
        MarkovChain::new(DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8])).unwrap()
    }

    #[test]
    fn stationary_examples() {
        let pi = stationary(&two_state()).unwrap();
        assert!((pi.pi[0] - 2.0 / 3.0).abs() < 1e-12);
        let sym = MarkovChain::new(DMatrix::from_row_slice(
            3,
            3,
            &[0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5],
        ))
        .unwrap();
        for p in stationary(&sym).unwrap().pi {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        let split = MarkovChain::new(DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(stationary(&split), Err(Error::NotErgodic { multiplicity: 2 })));
    }

    #[test]
    fn rejects_nonstochastic() {
        assert!(MarkovChain::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5])).is_err());
        assert!(MarkovChain::new(DMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.5, 0.5])).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let c = two_state();
        let pi = stationary(&c).unwrap();
        let h = chain_hamiltonian(&c, &pi).unwrap();
        let (e0, g) = ground_state(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(e0.abs() < 1e-12);
        assert!((g.amplitudes()[0].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((second_gap(&c).unwrap() - 0.3).abs() < 1e-12);

        let uniform = MarkovChain::new(DMatrix::from_element(4, 4, 0.25)).unwrap();
        assert!((second_gap(&uniform).unwrap() - 1.0).abs() < 1e-12);
        let upi = stationary(&uniform).unwrap();
        let hu = chain_hamiltonian(&uniform, &upi).unwrap();
        let want = DMatrix::<f64>::identity(4, 4) - uniform.transition();
        for i in 0..4 {
            for j in 0..4 {
                assert!((hu.entry(i, j).re - want[(i, j)]).abs() < 1e-15);
            }
        }

        let cyc = MarkovChain::new(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        ))
        .unwrap();
        let cpi = stationary(&cyc).unwrap();
        assert!(matches!(chain_hamiltonian(&cyc, &cpi), Err(Error::NotReversible { .. })));
    }

    #[test]
    fn pi_state_examples() {
        let point = StationaryDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        let s = pi_state(&point);
        assert_eq!(s.dim(), 4);
        assert!((s.probability(2) - 1.0).abs() < 1e-15);
        let u = pi_state(&StationaryDistribution::new(vec![0.25; 4]).unwrap());
        assert!(u.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn metropolis_examples() {
        let weights = [1.0, 2.0, 3.0, 2.0, 1.0];
        let g = NeighborGraph::path(5);
        let c = metropolis_chain(&weights, &g).unwrap();
        let pi = stationary(&c).unwrap();
        for (p, w) in pi.pi.iter().zip(weights) {
            assert!((p - w / 9.0).abs() < 1e-9);
        }
        assert!(c.reversibility_residual(&pi) < 1e-12);
        assert_eq!(c.pi_ratio(2, 0), Some(3.0));

        let flat = metropolis_chain(&[1.0; 5], &g).unwrap();
        assert!((flat.transition() - flat.transition().transpose()).norm() < 1e-15);

        let broken = NeighborGraph::new(vec![vec![1], vec![0], vec![]]).unwrap();
        assert!(matches!(
            metropolis_chain(&[1.0; 3], &broken),
            Err(Error::DisconnectedProposal)
        ));
        assert!(NeighborGraph::new(vec![vec![1], vec![]]).is_err());
    }

    #[test]
    fn padding_keeps_groundstate() {
        let c = metropolis_chain(&[1.0, 2.0, 3.0], &NeighborGraph::path(3)).unwrap();
        let pi = stationary(&c).unwrap();
        let h = padded_hamiltonian(&chain_hamiltonian(&c, &pi).unwrap());
        assert_eq!(h.dim(), 4);
        let (_, g) = ground_state(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(g.max_abs_diff(&pi_state(&pi)) < 1e-10);
    }

    #[test]
    fn text_round_trip() {
        let c = two_state();
        let back = MarkovChain::parse(&c.format()).unwrap();
        assert_eq!(back.transition(), c.transition());
        assert!(MarkovChain::parse("0.5 0.5\n1\n").is_err());
    }
}
