//! Row-sparse Hamiltonians and their simulation.
//!
//! A Hamiltonian is presented through a [`RowOracle`] listing the nonzero
//! entries of each row. [`decompose`] colors every entry by
//! `(k, i mod k, j mod k, rindex, cindex)`, where `k` is the smallest modulus
//! separating the row and column indices and `rindex`/`cindex` are the
//! 1-based positions of the entry in its row and column lists. Each color
//! class is 2×2 combinatorially block diagonal, so its exponential is a
//! product of independent 2×2 rotations ([`BlockPiece::apply_exponential`]).
//! [`simulate_sparse`] recombines the pieces with the symmetric product
//! `[e^{-iδH_1}···e^{-iδH_M}]·[e^{-iδH_M}···e^{-iδH_1}]`.

mod io;

pub use io::{format_coordinate_list, parse_coordinate_list};

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{matrix_exponential, spectral_norm, DenseHermitian, StateVector, C64, ZERO};

/// Enumerates the nonzero entries of a Hermitian matrix row by row.
pub trait RowOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// `(column, value)` for every nonzero in row `i`, sorted by column.
    fn row(&self, i: usize) -> Vec<(usize, C64)>;
}

/// Row oracle backed by precomputed row lists.
#[derive(Clone, Debug)]
pub struct RowTable {
    rows: Vec<Vec<(usize, C64)>>,
}

impl RowTable {
    pub fn new(mut rows: Vec<Vec<(usize, C64)>>) -> Self {
        for r in rows.iter_mut() {
            r.retain(|(_, v)| *v != ZERO);
            r.sort_by_key(|(j, _)| *j);
        }
        Self { rows }
    }

    pub fn from_dense(h: &DenseHermitian) -> Self {
        let n = h.dim();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let v = h.entry(i, j);
                        (v != ZERO).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }
}

impl RowOracle for RowTable {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn row(&self, i: usize) -> Vec<(usize, C64)> {
        self.rows[i].clone()
    }
}

/// A row-sparse Hamiltonian on `qubits` qubits with at most `sparsity`
/// nonzeros per row and spectral norm at most `norm_bound`.
#[derive(Clone)]
pub struct SparseHamiltonian {
    oracle: Arc<dyn RowOracle>,
    qubits: u32,
    sparsity: usize,
    norm_bound: f64,
}

impl std::fmt::Debug for SparseHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseHamiltonian")
            .field("qubits", &self.qubits)
            .field("sparsity", &self.sparsity)
            .field("norm_bound", &self.norm_bound)
            .finish()
    }
}

impl SparseHamiltonian {
    /// Wraps an oracle, validating row lengths and the norm bound by
    /// materializing (desk scale).
    pub fn new(oracle: Arc<dyn RowOracle>, sparsity: usize, norm_bound: f64) -> Result<Self> {
        let dim = oracle.dim();
        if !dim.is_power_of_two() || dim > crate::linalg::MAX_DIM {
            return Err(invalid(format!("oracle dimension {dim} must be a power of two ≤ 4096")));
        }
        let h = Self {
            qubits: dim.trailing_zeros(),
            oracle,
            sparsity,
            norm_bound,
        };
        for i in 0..dim {
            let len = h.oracle.row(i).len();
            if len > sparsity {
                return Err(Error::InconsistentOracle {
                    row: i,
                    col: 0,
                    reason: format!("{len} nonzeros exceeds declared sparsity {sparsity}"),
                });
            }
        }
        let dense = h.materialize()?;
        let norm = dense.norm();
        if norm > norm_bound * (1.0 + 1e-12) + 1e-12 {
            return Err(invalid(format!("‖H‖ = {norm} exceeds declared bound {norm_bound}")));
        }
        Ok(h)
    }

    /// Sparsity and norm bound taken from the matrix itself.
    pub fn from_dense(h: &DenseHermitian) -> Result<Self> {
        let sparsity = (0..h.dim()).map(|i| h.row_nonzeros(i)).max().unwrap_or(0).max(1);
        let norm = h.norm();
        Self::new(Arc::new(RowTable::from_dense(h)), sparsity, norm)
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn row(&self, i: usize) -> Vec<(usize, C64)> {
        self.oracle.row(i)
    }

    /// Dense matrix, checking the oracle's symmetric consistency.
    pub fn materialize(&self) -> Result<DenseHermitian> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for i in 0..n {
            for (j, v) in self.oracle.row(i) {
                m[(i, j)] = v;
            }
        }
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * (1.0 + m[(i, j)].norm()) {
                    return Err(Error::InconsistentOracle {
                        row: i,
                        col: j,
                        reason: "entry and its reflection are not conjugate".into(),
                    });
                }
            }
        }
        Ok(DenseHermitian::from_raw(m))
    }

    /// Upper end of the separating-modulus range, `n²` (at least 2).
    pub fn modulus_limit(&self) -> usize {
        ((self.qubits as usize).pow(2)).max(2)
    }
}

/// Color of a matrix entry: `(k, i mod k, j mod k, rindex, cindex)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryColor {
    pub modulus: usize,
    pub i_mod: usize,
    pub j_mod: usize,
    pub rindex: usize,
    pub cindex: usize,
}

/// 1-based position of `col` among the nonzeros of `row_list`, 0 if absent.
fn position(row_list: &[(usize, C64)], col: usize) -> usize {
    row_list
        .iter()
        .position(|(j, _)| *j == col)
        .map(|p| p + 1)
        .unwrap_or(0)
}

fn separating_modulus(i: usize, j: usize, limit: usize) -> Result<usize> {
    if i == j {
        return Ok(1);
    }
    (2..=limit)
        .find(|k| i % k != j % k)
        .ok_or(Error::NoSeparatingModulus { i, j, limit })
}

fn color_with_rows(
    i: usize,
    j: usize,
    row_i: &[(usize, C64)],
    row_j: &[(usize, C64)],
    limit: usize,
) -> Result<EntryColor> {
    // lower-diagonal entries take the color of their reflection
    let (a, b, row_a, row_b) = if i <= j { (i, j, row_i, row_j) } else { (j, i, row_j, row_i) };
    let modulus = separating_modulus(a, b, limit)?;
    let rindex = position(row_a, b);
    // column b of a Hermitian matrix has the nonzero pattern of row b
    let cindex = if rindex == 0 { 0 } else { position(row_b, a) };
    Ok(EntryColor {
        modulus,
        i_mod: a % modulus,
        j_mod: b % modulus,
        rindex,
        cindex,
    })
}

/// Color of entry `(i, j)`.
pub fn color_entry(h: &SparseHamiltonian, i: usize, j: usize) -> Result<EntryColor> {
    let n = h.dim();
    if i >= n || j >= n {
        return Err(invalid(format!("entry ({i}, {j}) outside dimension {n}")));
    }
    let ri = h.row(i);
    let rj = if i == j { ri.clone() } else { h.row(j) };
    color_with_rows(i, j, &ri, &rj, h.modulus_limit())
}

/// One block of a 2×2 combinatorially block-diagonal piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Block {
    /// The 1×1 block `(value)` on `|index⟩`.
    Diagonal { index: usize, value: f64 },
    /// The 2×2 block `[[0, value], [value*, 0]]` on `span{|row⟩, |col⟩}`, `row < col`.
    OffDiagonal { row: usize, col: usize, value: C64 },
}

impl Block {
    pub fn magnitude(&self) -> f64 {
        match *self {
            Block::Diagonal { value, .. } => value.abs(),
            Block::OffDiagonal { value, .. } => value.norm(),
        }
    }

    fn indices(&self) -> (usize, Option<usize>) {
        match *self {
            Block::Diagonal { index, .. } => (index, None),
            Block::OffDiagonal { row, col, .. } => (row, Some(col)),
        }
    }
}

/// All entries of one color.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPiece {
    pub color: EntryColor,
    pub blocks: Vec<Block>,
}

impl BlockPiece {
    /// Spectral norm: the largest block magnitude.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(Block::magnitude).fold(0.0, f64::max)
    }

    /// True when no index is touched by two blocks.
    pub fn is_block_disjoint(&self, dim: usize) -> bool {
        let mut used = vec![false; dim];
        for b in &self.blocks {
            let (a, c) = b.indices();
            for idx in std::iter::once(a).chain(c) {
                if idx >= dim || used[idx] {
                    return false;
                }
                used[idx] = true;
            }
        }
        true
    }

    pub fn to_dense(&self, dim: usize) -> DenseHermitian {
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for b in &self.blocks {
            match *b {
                Block::Diagonal { index, value } => m[(index, index)] = C64::new(value, 0.0),
                Block::OffDiagonal { row, col, value } => {
                    m[(row, col)] = value;
                    m[(col, row)] = value.conj();
                }
            }
        }
        DenseHermitian::from_raw(m)
    }

    /// Applies `e^{-i t P}` in place.
    pub fn apply_exponential(&self, t: f64, amps: &mut [C64]) {
        for b in &self.blocks {
            match *b {
                Block::Diagonal { index, value } => {
                    amps[index] *= C64::from_polar(1.0, -value * t);
                }
                Block::OffDiagonal { row, col, value } => {
                    let r = value.norm();
                    let (s, c) = (r * t).sin_cos();
                    let phase = value / r;
                    let minus_i_sin = C64::new(0.0, -s);
                    let (x, y) = (amps[row], amps[col]);
                    amps[row] = x * c + minus_i_sin * phase * y;
                    amps[col] = minus_i_sin * phase.conj() * x + y * c;
                }
            }
        }
    }
}

/// `e^{-i t P}|psi⟩`.
pub fn piece_exponential(piece: &BlockPiece, t: f64, psi: &StateVector) -> StateVector {
    let mut amps = psi.amplitudes().clone();
    piece.apply_exponential(t, amps.as_mut_slice());
    StateVector::from_raw(amps)
}

/// Splits `H` into one piece per color, in color order.
pub fn decompose(h: &SparseHamiltonian) -> Result<Vec<BlockPiece>> {
    let n = h.dim();
    if n > crate::linalg::MAX_DIM {
        return Err(invalid("decomposition is limited to dimension 4096"));
    }
    let rows: Vec<Vec<(usize, C64)>> = (0..n).map(|i| h.row(i)).collect();
    let limit = h.modulus_limit();
    let mut classes: BTreeMap<EntryColor, Vec<Block>> = BTreeMap::new();
    for i in 0..n {
        for &(j, v) in &rows[i] {
            if j >= n {
                return Err(Error::InconsistentOracle {
                    row: i,
                    col: j,
                    reason: "column out of range".into(),
                });
            }
            let mirror = rows[j].iter().find(|(c, _)| *c == i).map(|(_, w)| *w);
            match mirror {
                Some(w) if (w - v.conj()).norm() <= 1e-12 * (1.0 + v.norm()) => {}
                _ => {
                    return Err(Error::InconsistentOracle {
                        row: i,
                        col: j,
                        reason: "missing or non-conjugate reflected entry".into(),
                    })
                }
            }
            if j < i {
                continue;
            }
            let color = color_with_rows(i, j, &rows[i], &rows[j], limit)?;
            let block = if i == j {
                if v.im.abs() > 1e-12 * (1.0 + v.norm()) {
                    return Err(Error::InconsistentOracle {
                        row: i,
                        col: i,
                        reason: "diagonal entry is not real".into(),
                    });
                }
                Block::Diagonal { index: i, value: v.re }
            } else {
                Block::OffDiagonal { row: i, col: j, value: v }
            };
            classes.entry(color).or_default().push(block);
        }
    }
    Ok(classes
        .into_iter()
        .map(|(color, blocks)| BlockPiece { color, blocks })
        .collect())
}

/// Upper bound `(D+1)²·n⁶` on the number of colors.
pub fn color_bound(h: &SparseHamiltonian) -> u128 {
    let d = h.sparsity() as u128 + 1;
    let n = (h.qubits() as u128).max(1);
    d * d * n.pow(6)
}

/// One symmetric product `U_δ` applied in place.
pub fn trotter_step(pieces: &[BlockPiece], delta: f64, amps: &mut [C64]) {
    for p in pieces {
        p.apply_exponential(delta, amps);
    }
    for p in pieces.iter().rev() {
        p.apply_exponential(delta, amps);
    }
}

/// `U_δ^steps` as a reusable action.
#[derive(Clone, Debug)]
pub struct TrotterEvolution {
    pub pieces: Vec<BlockPiece>,
    pub delta: f64,
    pub steps: u64,
    dim: usize,
}

impl TrotterEvolution {
    pub fn new(pieces: Vec<BlockPiece>, dim: usize, delta: f64, steps: u64) -> Self {
        Self { pieces, delta, steps, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply_in_place(&self, amps: &mut [C64]) {
        for _ in 0..self.steps {
            trotter_step(&self.pieces, self.delta, amps);
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi.dim() });
        }
        let mut amps = psi.amplitudes().clone();
        self.apply_in_place(amps.as_mut_slice());
        Ok(StateVector::from_raw(amps))
    }

    /// Dense matrix of the action, column by column.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let n = self.dim;
        let mut m = DMatrix::from_element(n, n, ZERO);
        let mut col = vec![ZERO; n];
        for k in 0..n {
            col.iter_mut().for_each(|c| *c = ZERO);
            col[k] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut col);
            for (r, c) in col.iter().enumerate() {
                m[(r, k)] = *c;
            }
        }
        m
    }
}

/// Steps used for time `t` at step size `δ`: `⌊t / 2δ⌋`.
pub fn trotter_steps(t: f64, delta: f64) -> u64 {
    // guard against t/2δ landing a hair below an integer
    let ratio = t / (2.0 * delta);
    (ratio + 1e-9 * ratio.max(1.0)).floor() as u64
}

/// `‖U_δ^{⌊t/2δ⌋} − e^{-itH}‖` against the exact exponential.
pub fn trotter_error(
    pieces: &[BlockPiece],
    exact: &DMatrix<C64>,
    t: f64,
    delta: f64,
) -> f64 {
    let evo = TrotterEvolution::new(pieces.to_vec(), exact.nrows(), delta, trotter_steps(t, delta));
    spectral_norm(&(evo.to_matrix() - exact))
}

/// Options for [`simulate_sparse`].
#[derive(Clone, Copy, Debug)]
pub struct SimulationOptions {
    /// Largest total number of Trotter steps tried during calibration.
    pub step_budget: u64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { step_budget: 1 << 16 }
    }
}

/// Simulation of `e^{-itH}` to accuracy `alpha`.
///
/// The constant hidden in the Trotter bound is calibrated on the instance
/// itself: starting from a single step, `δ` is halved until the measured
/// spectral error against the exact exponential is at most `alpha / 2`.
pub fn simulate_sparse(
    h: &SparseHamiltonian,
    t: f64,
    alpha: f64,
    options: SimulationOptions,
) -> Result<SparseSimulation> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("accuracy {alpha} must lie in (0, 1)")));
    }
    if !(t >= 0.0) {
        return Err(invalid("evolution time must be nonnegative"));
    }
    let pieces = decompose(h)?;
    let dim = h.dim();
    if t == 0.0 {
        return Ok(SparseSimulation {
            evolution: TrotterEvolution::new(pieces, dim, 0.0, 0),
            measured_error: 0.0,
        });
    }
    let exact = matrix_exponential(&h.materialize()?, t)?;
    let mut steps: u64 = 1;
    loop {
        if steps > options.step_budget {
            return Err(Error::StepBudgetExceeded { requested: steps, budget: options.step_budget });
        }
        let delta = t / (2.0 * steps as f64);
        let evolution = TrotterEvolution::new(pieces.clone(), dim, delta, steps);
        let measured_error = spectral_norm(&(evolution.to_matrix() - exact.matrix()));
        if measured_error <= alpha / 2.0 {
            return Ok(SparseSimulation { evolution, measured_error });
        }
        steps *= 2;
    }
}

/// Result of [`simulate_sparse`].
#[derive(Clone, Debug)]
pub struct SparseSimulation {
    pub evolution: TrotterEvolution,
    /// Calibration error `‖Û − e^{-itH}‖`.
    pub measured_error: f64,
}

impl SparseSimulation {
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.evolution.apply(psi)
    }

    pub fn delta(&self) -> f64 {
        self.evolution.delta
    }
}
