//! Exact dense complex linear algebra.
//!
//! Everything here is computed by full eigendecomposition, which is the
//! ground truth all other modules are checked against. Dimensions are
//! bounded by [`MAX_DIM`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Largest matrix dimension accepted by the dense routines.
pub const MAX_DIM: usize = 4096;

/// Default tolerance for declaring a groundstate degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

const NORM_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-9;
const PHASE_THRESHOLD: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A unit-norm complex amplitude vector.
///
/// The dimension is normally `2^n` for `n` qubits; unpadded Markov chain
/// groundstates are the exception, so any positive dimension is accepted
/// and [`StateVector::qubits`] reports `None` when it is not a power of two.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within 1e-9).
    pub fn new(amps: impl Into<DVector<C64>>) -> Result<Self> {
        let amps = amps.into();
        if amps.is_empty() {
            return Err(invalid("state vector must have positive dimension"));
        }
        let norm_sqr = amps.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: impl Into<DVector<C64>>) -> Result<Self> {
        let amps = amps.into();
        let norm = amps.norm();
        if amps.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { amps: amps / C64::new(norm, 0.0) })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| C64::new(v, 0.0)),
        ))
    }

    pub(crate) fn from_raw(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range {dim}");
        let mut amps = DVector::from_element(dim, ZERO);
        amps[index] = ONE;
        Self { amps }
    }

    pub fn uniform(dim: usize) -> Self {
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self { amps: DVector::from_element(dim, a) }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Qubit count when the dimension is a power of two.
    pub fn qubits(&self) -> Option<u32> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros())
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.amps
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        state_overlap(self, other)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Fixes the global phase so the first nonzero amplitude is real positive.
    pub fn with_canonical_phase(mut self) -> Self {
        canonicalize_phase(self.amps.as_mut_slice());
        self
    }

    /// Embeds into a larger space with zero amplitudes on the new coordinates.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        let mut amps = DVector::from_element(dim, ZERO);
        amps.rows_mut(0, self.dim()).copy_from(&self.amps);
        Ok(Self { amps })
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `⟨psi|phi⟩`.
pub fn state_overlap(psi: &StateVector, phi: &StateVector) -> Result<C64> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), found: phi.dim() });
    }
    Ok(psi.amps.dotc(&phi.amps))
}

fn canonicalize_phase(v: &mut [C64]) {
    if let Some(first) = v.iter().copied().find(|c| c.norm() > PHASE_THRESHOLD) {
        let phase = first.conj() / first.norm();
        for c in v.iter_mut() {
            *c *= phase;
        }
    }
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_residual(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A Hermitian operator stored densely (ħ = 1, energy units).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHermitian {
    m: DMatrix<C64>,
}

impl DenseHermitian {
    /// Accepts a square matrix whose Hermiticity residual is within 1e-12
    /// (relative to its largest entry) and symmetrizes it exactly.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    pub fn with_tolerance(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(invalid(format!(
                "Hamiltonian must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let residual = hermitian_residual(&m);
        if residual > tol * scale {
            return Err(Error::NotHermitian { residual });
        }
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { m: sym })
    }

    pub fn from_real_symmetric(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::from_element(dim, dim, ZERO) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { m }
    }

    /// `I - |psi⟩⟨psi|`, the projection onto the complement of `psi`.
    pub fn projector_complement(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let n = a.len();
        let mut m = DMatrix::identity(n, n) - a * a.adjoint();
        for i in 0..n {
            m[(i, i)].im = 0.0;
        }
        // exact structural Hermiticity
        for i in 0..n {
            for j in (i + 1)..n {
                m[(j, i)] = m[(i, j)].conj();
            }
        }
        Self { m }
    }

    pub(crate) fn from_raw(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// `(1 - s)·self + s·other`.
    pub fn lerp(&self, other: &Self, s: f64) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            m: &self.m * C64::new(1.0 - s, 0.0) + &other.m * C64::new(s, 0.0),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { m: &self.m - &other.m })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { m: &self.m * C64::new(factor, 0.0) }
    }

    pub fn shifted(&self, energy: f64) -> Self {
        let mut m = self.m.clone();
        for i in 0..self.dim() {
            m[(i, i)] += C64::new(energy, 0.0);
        }
        Self { m }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.m * v
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn row_nonzeros(&self, i: usize) -> usize {
        self.m.row(i).iter().filter(|c| **c != ZERO).count()
    }

    /// Spectral norm, the largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        let e = self.eigen();
        e.eigenvalues
            .first()
            .map(|l| l.abs())
            .unwrap_or(0.0)
            .max(e.eigenvalues.last().map(|l| l.abs()).unwrap_or(0.0))
    }

    pub fn eigen(&self) -> SpectralDecomposition {
        SpectralDecomposition::of(self)
    }
}

/// Ascending eigenvalues with orthonormal, phase-fixed eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    fn of(h: &DenseHermitian) -> Self {
        let eig = h.m.clone().symmetric_eigen();
        let n = h.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut eigenvectors = DMatrix::from_element(n, n, ZERO);
        for (col, &k) in order.iter().enumerate() {
            let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
            canonicalize_phase(&mut v);
            for (row, c) in v.into_iter().enumerate() {
                eigenvectors[(row, col)] = c;
            }
        }
        Self { eigenvalues, eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_raw(self.eigenvectors.column(k).into_owned())
    }

    /// `λ₂ - λ₁`.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    /// `V·diag(f(λ))·V†`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let fk = f(l);
            for r in 0..scaled.nrows() {
                scaled[(r, k)] *= fk;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        self.map_eigenvalues(|l| C64::new(l, 0.0))
    }
}

/// A unitary operator stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<C64>,
}

impl UnitaryMatrix {
    /// Accepts a square matrix with `U†U = I` within 1e-9.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid("unitary must be square"));
        }
        let n = m.nrows();
        let residual = spectral_norm(&(m.adjoint() * &m - DMatrix::<C64>::identity(n, n)));
        if residual > UNITARY_TOL {
            return Err(invalid(format!("matrix is not unitary (residual {residual:e})")));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_raw(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        Ok(StateVector::from_raw(&self.m * psi.amplitudes()))
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { m: &self.m * &other.m })
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self { m: self.m.adjoint() }
    }

    /// Spectral-norm distance `‖self - other‖`.
    pub fn distance(&self, other: &DMatrix<C64>) -> f64 {
        spectral_norm(&(&self.m - other))
    }

    /// Largest deviation of `U†U` from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        spectral_norm(&(self.m.adjoint() * &self.m - DMatrix::<C64>::identity(n, n)))
    }
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `e^{-iHt} = V·diag(e^{-iλt})·V†`.
pub fn matrix_exponential(h: &DenseHermitian, t: f64) -> Result<UnitaryMatrix> {
    if h.dim() > MAX_DIM {
        return Err(invalid(format!("dimension {} exceeds {MAX_DIM}", h.dim())));
    }
    let eig = h.eigen();
    Ok(UnitaryMatrix::from_raw(
        eig.map_eigenvalues(|l| C64::from_polar(1.0, -l * t)),
    ))
}

/// `λ₂ - λ₁`.
pub fn spectral_gap(h: &DenseHermitian) -> Result<f64> {
    if h.dim() < 2 {
        return Err(invalid("spectral gap needs dimension at least 2"));
    }
    Ok(h.eigen().gap())
}

/// Groundvalue and phase-fixed groundstate; errors when the gap is below
/// `degeneracy_tol`.
pub fn ground_state(h: &DenseHermitian, degeneracy_tol: f64) -> Result<(f64, StateVector)> {
    let eig = h.eigen();
    ground_from_eigen(&eig, degeneracy_tol)
}

pub(crate) fn ground_from_eigen(
    eig: &SpectralDecomposition,
    degeneracy_tol: f64,
) -> Result<(f64, StateVector)> {
    if eig.dim() >= 2 {
        let gap = eig.gap();
        if gap < degeneracy_tol {
            return Err(Error::DegenerateGroundstate { gap, tolerance: degeneracy_tol });
        }
    }
    Ok((eig.eigenvalues[0], eig.eigenvector(0)))
}

/// Deterministic random Hermitian matrix on `n` qubits with at most
/// `sparsity` nonzeros per row, rescaled to spectral norm `norm_bound`.
pub fn random_sparse_hermitian(
    n: u32,
    sparsity: usize,
    norm_bound: f64,
    seed: u64,
) -> Result<DenseHermitian> {
    if sparsity == 0 {
        return Err(invalid("row sparsity must be at least 1"));
    }
    if !(norm_bound > 0.0) {
        return Err(invalid("norm bound must be positive"));
    }
    if n > 12 {
        return Err(invalid(format!("{n} qubits exceeds the dense limit of 12")));
    }
    let dim = 1usize << n;
    if sparsity > dim {
        return Err(invalid(format!("sparsity {sparsity} exceeds dimension {dim}")));
    }
    let mut rng = crate::seeding::rng_from_seed(seed);
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    let mut degree = vec![0usize; dim];
    for i in 0..dim {
        for _ in 0..sparsity {
            let j = rng.gen_range(0..dim);
            if m[(i, j)] != ZERO || degree[i] >= sparsity {
                continue;
            }
            if i == j {
                m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
                degree[i] += 1;
            } else if degree[j] < sparsity {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    if m.iter().all(|c| *c == ZERO) {
        m[(0, 0)] = ONE;
    }
    let h = DenseHermitian { m };
    let norm = h.norm();
    Ok(h.scaled(norm_bound / norm))
}

/// Random (not Haar) unit state: uniform real and imaginary parts, normalized.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        if v.norm() > 1e-6 {
            return StateVector::normalized(v).expect("nonzero");
        }
    }
}

/// Random dense Hermitian matrix with entries in the unit box.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseHermitian {
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for i in 0..dim {
        m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..dim {
            let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    DenseHermitian { m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Power iteration on `A†A`, independent of the SVD path.
    fn power_iteration_norm(a: &DMatrix<C64>) -> f64 {
        let ata = a.adjoint() * a;
        let mut v = DVector::from_fn(a.ncols(), |i, _| C64::new(1.0 + i as f64 * 0.37, 0.1));
        let mut est = 0.0;
        for _ in 0..5000 {
            let w = &ata * &v;
            est = w.norm() / v.norm();
            v = &w / C64::new(w.norm(), 0.0);
        }
        est.sqrt()
    }

    fn taylor_exponential(h: &DenseHermitian, t: f64, terms: usize) -> DMatrix<C64> {
        let n = h.dim();
        let a = h.matrix() * C64::new(0.0, -t);
        let mut term = DMatrix::<C64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * &a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn spectral_norm_examples() {
        assert!(close(spectral_norm(&DMatrix::identity(4, 4)), 1.0, 1e-12));
        let d = DenseHermitian::diagonal(&[3.0, -5.0]);
        assert!(close(spectral_norm(d.matrix()), 5.0, 1e-12));
        assert!(close(d.norm(), 5.0, 1e-12));
        let mut rng = rng_from_seed(8);
        let h = random_hermitian(8, &mut rng);
        let svd = spectral_norm(h.matrix());
        let eig = h.norm();
        let pow = power_iteration_norm(h.matrix());
        assert!(close(svd, eig, 1e-10));
        assert!(close(svd, pow, 1e-8), "{svd} vs {pow}");
    }

    #[test]
    fn exponential_examples() {
        let z = DenseHermitian::zeros(3);
        let u = matrix_exponential(&z, 1.3).unwrap();
        assert!(u.distance(&DMatrix::identity(3, 3)) < 1e-14);

        let d = DenseHermitian::diagonal(&[1.0, -1.0]);
        let u = matrix_exponential(&d, PI).unwrap();
        assert!(u.distance(&(-DMatrix::<C64>::identity(2, 2))) < 1e-12);

        let mut rng = rng_from_seed(4);
        let h = random_hermitian(4, &mut rng);
        let u = matrix_exponential(&h, 0.7).unwrap();
        let taylor = taylor_exponential(&h, 0.7, 20);
        assert!(u.distance(&taylor) < 1e-8);
        assert!(u.unitarity_residual() < 1e-9);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::from_element(2, 2, ZERO);
        m[(0, 1)] = ONE;
        assert!(matches!(DenseHermitian::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn gap_examples() {
        let p = DenseHermitian::projector_complement(&StateVector::basis(4, 0));
        assert!(close(spectral_gap(&p).unwrap(), 1.0, 1e-12));

        let mut rng = rng_from_seed(11);
        let a = random_state(4, &mut rng);
        let b = random_state(4, &mut rng);
        let h = DenseHermitian::projector_complement(&a)
            .lerp(&DenseHermitian::projector_complement(&b), 0.5)
            .unwrap();
        let overlap = a.overlap(&b).unwrap().norm();
        assert!(close(spectral_gap(&h).unwrap(), overlap, 1e-10));

        // 3-state chain Hamiltonian [[1,-1,0],[-1,2,-1],[0,-1,1]] / 2 has
        // characteristic polynomial roots 0, 1/2, 3/2.
        let m = DMatrix::from_row_slice(3, 3, &[0.5, -0.5, 0.0, -0.5, 1.0, -0.5, 0.0, -0.5, 0.5]);
        let h = DenseHermitian::from_real_symmetric(&m).unwrap();
        assert!(close(spectral_gap(&h).unwrap(), 0.5, 1e-12));
    }

    #[test]
    fn ground_state_examples() {
        let (e, v) = ground_state(&DenseHermitian::diagonal(&[0.0, 5.0, 7.0]), 1e-10).unwrap();
        assert_eq!(e, 0.0);
        assert!(v.max_abs_diff(&StateVector::basis(3, 0)) < 1e-12);

        let mut rng = rng_from_seed(3);
        let pi = random_state(8, &mut rng).with_canonical_phase();
        let (e, v) = ground_state(&DenseHermitian::projector_complement(&pi), 1e-10).unwrap();
        assert!(e.abs() < 1e-12);
        assert!(v.max_abs_diff(&pi) < 1e-10);

        let degenerate = DenseHermitian::diagonal(&[1.0, 1.0, 2.0]);
        assert!(matches!(
            ground_state(&degenerate, 1e-10),
            Err(Error::DegenerateGroundstate { .. })
        ));
    }

    #[test]
    fn overlap_examples() {
        let plus = StateVector::from_real(&[1.0, 1.0]).unwrap();
        let zero = StateVector::basis(2, 0);
        assert!(close(plus.overlap(&plus).unwrap().re, 1.0, 1e-15));
        assert_eq!(zero.overlap(&StateVector::basis(2, 1)).unwrap(), ZERO);
        assert!(close(plus.overlap(&zero).unwrap().re, FRAC_1_SQRT_2, 1e-15));
        assert!(matches!(
            zero.overlap(&StateVector::basis(4, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_sparse_examples() {
        let a = random_sparse_hermitian(1, 2, 1.0, 7).unwrap();
        let b = random_sparse_hermitian(1, 2, 1.0, 7).unwrap();
        assert_eq!(a, b);
        for seed in 0..20 {
            let h = random_sparse_hermitian(4, 3, 2.0, seed).unwrap();
            for i in 0..h.dim() {
                assert!(h.row_nonzeros(i) <= 3);
            }
            assert!(spectral_norm(h.matrix()) <= 2.0 + 1e-9);
        }
        assert!(random_sparse_hermitian(2, 5, 1.0, 0).is_err());
        assert!(random_sparse_hermitian(2, 0, 1.0, 0).is_err());
        assert!(random_sparse_hermitian(2, 1, 0.0, 0).is_err());
    }

    #[test]
    fn norm_facts_on_random_instances() {
        let mut rng = rng_from_seed(50);
        for _ in 0..50 {
            let dim = rng.gen_range(2..9);
            let a = random_hermitian(dim, &mut rng);
            let b = random_hermitian(dim, &mut rng);
            let na = spectral_norm(a.matrix());
            let nb = spectral_norm(b.matrix());
            assert!(na <= (dim * dim) as f64 * a.max_abs_entry() + 1e-12);
            assert!(spectral_norm(&(a.matrix() * b.matrix())) <= na * nb + 1e-10);
        }
    }

    #[test]
    fn exponential_group_law_and_ground_residual() {
        let mut rng = rng_from_seed(9);
        for _ in 0..10 {
            let h = random_hermitian(6, &mut rng);
            let (s, t) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let us = matrix_exponential(&h, s).unwrap();
            let ut = matrix_exponential(&h, t).unwrap();
            let ust = matrix_exponential(&h, s + t).unwrap();
            assert!(us.compose(&ut).unwrap().distance(ust.matrix()) < 1e-8);

            let eig = h.eigen();
            let recon = spectral_norm(&(eig.reconstruct() - h.matrix()));
            assert!(recon <= 1e-8 * 6.0);
            let vtv = eig.eigenvectors.adjoint() * &eig.eigenvectors;
            assert!(spectral_norm(&(vtv - DMatrix::<C64>::identity(6, 6))) < 1e-9);

            let (e, v) = ground_state(&h, 1e-10).unwrap();
            let resid = (h.apply(v.amplitudes()) - v.amplitudes() * C64::new(e, 0.0)).norm();
            assert!(resid <= 1e-8 * h.norm());
        }
    }
}
