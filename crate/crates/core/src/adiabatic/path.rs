use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_norm, DenseHermitian, StateVector, DEFAULT_DEGENERACY_TOL};

/// Finite-difference step for `‖dH/ds‖`.
pub const DERIVATIVE_STEP: f64 = 1e-5;

type PathFn = Arc<dyn Fn(f64) -> DenseHermitian + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Linear {
        start: DenseHermitian,
        end: DenseHermitian,
    },
    Jagged {
        states: Vec<StateVector>,
        projectors: Vec<DenseHermitian>,
    },
    Custom {
        dim: usize,
        eval: PathFn,
    },
}

/// A continuous map `s ∈ [0, 1] → H(s)` with finitely many points where
/// the derivative may fail.
#[derive(Clone)]
pub struct HamiltonianPath {
    shape: Shape,
    breakpoints: Vec<f64>,
    norm_bound: f64,
    label: String,
}

impl std::fmt::Debug for HamiltonianPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianPath")
            .field("label", &self.label)
            .field("dim", &self.dim())
            .field("breakpoints", &self.breakpoints)
            .field("norm_bound", &self.norm_bound)
            .finish()
    }
}

impl HamiltonianPath {
    /// Arbitrary path from a closure; the caller vouches for continuity.
    pub fn from_fn(
        dim: usize,
        eval: impl Fn(f64) -> DenseHermitian + Send + Sync + 'static,
        breakpoints: Vec<f64>,
        norm_bound: f64,
        label: impl Into<String>,
    ) -> Self {
        Self {
            shape: Shape::Custom { dim, eval: Arc::new(eval) },
            breakpoints,
            norm_bound,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Linear { start, .. } => start.dim(),
            Shape::Jagged { projectors, .. } => projectors[0].dim(),
            Shape::Custom { dim, .. } => *dim,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Target states of a jagged path, in order.
    pub fn jagged_states(&self) -> Option<&[StateVector]> {
        match &self.shape {
            Shape::Jagged { states, .. } => Some(states),
            _ => None,
        }
    }

    /// Number of linear segments of a jagged path.
    pub fn segments(&self) -> usize {
        match &self.shape {
            Shape::Jagged { projectors, .. } => projectors.len().saturating_sub(1),
            _ => 1,
        }
    }

    /// `H(s)`, with `s` clamped to `[0, 1]`.
    pub fn evaluate(&self, s: f64) -> DenseHermitian {
        let s = s.clamp(0.0, 1.0);
        match &self.shape {
            Shape::Linear { start, end } => start.lerp(end, s).expect("same dimension"),
            Shape::Jagged { projectors, .. } => {
                let m = projectors.len() - 1;
                if m == 0 {
                    return projectors[0].clone();
                }
                let x = s * m as f64;
                let seg = (x.floor() as usize).min(m - 1);
                let eta = x - seg as f64;
                projectors[seg]
                    .lerp(&projectors[seg + 1], eta)
                    .expect("same dimension")
            }
            Shape::Custom { eval, .. } => eval(s),
        }
    }

    fn near_breakpoint(&self, s: f64, radius: f64) -> bool {
        self.breakpoints.iter().any(|b| (s - b).abs() < radius)
    }

    /// Central-difference estimate of `‖dH/ds‖`, or `None` within one step
    /// of a breakpoint or the interval ends.
    pub fn derivative_norm(&self, s: f64) -> Option<f64> {
        let h = DERIVATIVE_STEP;
        if s - h < 0.0 || s + h > 1.0 || self.near_breakpoint(s, h) {
            return None;
        }
        let diff = self.evaluate(s + h).sub(&self.evaluate(s - h)).expect("same dimension");
        Some(spectral_norm(diff.matrix()) / (2.0 * h))
    }

    /// Largest `‖H(s + h) - H(s)‖` over a uniform grid, a continuity spot check.
    pub fn max_jump(&self, grid: usize, h: f64) -> f64 {
        (0..grid)
            .map(|k| {
                let s = k as f64 / grid as f64;
                let d = self.evaluate(s + h).sub(&self.evaluate(s)).expect("same dimension");
                spectral_norm(d.matrix())
            })
            .fold(0.0, f64::max)
    }
}

/// `s ↦ (1 - s)·H0 + s·H1`.
pub fn linear_path(h0: &DenseHermitian, h1: &DenseHermitian) -> Result<HamiltonianPath> {
    if h0.dim() != h1.dim() {
        return Err(Error::DimensionMismatch { expected: h0.dim(), found: h1.dim() });
    }
    let norm_bound = h0.norm().max(h1.norm());
    Ok(HamiltonianPath {
        shape: Shape::Linear { start: h0.clone(), end: h1.clone() },
        breakpoints: Vec::new(),
        norm_bound,
        label: "linear".into(),
    })
}

/// Piecewise-linear path through the projectors `I - |α_j⟩⟨α_j|`, with
/// segment `j` spanning `s ∈ [j/m, (j+1)/m]`.
pub fn jagged_path(states: &[StateVector]) -> Result<HamiltonianPath> {
    let first = states.first().ok_or_else(|| invalid("jagged path needs at least one state"))?;
    for (j, w) in states.windows(2).enumerate() {
        if w[1].dim() != first.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: w[1].dim() });
        }
        if w[0].overlap(&w[1])?.norm() <= DEFAULT_DEGENERACY_TOL {
            return Err(Error::DisconnectedPath { index: j, next: j + 1 });
        }
    }
    let m = states.len() - 1;
    let breakpoints = (1..m).map(|j| j as f64 / m as f64).collect();
    Ok(HamiltonianPath {
        shape: Shape::Jagged {
            projectors: states.iter().map(DenseHermitian::projector_complement).collect(),
            states: states.to_vec(),
        },
        breakpoints,
        norm_bound: 1.0,
        label: "jagged".into(),
    })
}

/// Closed-form gap of `(1-η)(I-|α⟩⟨α|) + η(I-|β⟩⟨β|)` for `|⟨α|β⟩| = overlap`:
/// `√(1 - 4(1-η)η|b|²)` with `|b|² = 1 - overlap²`.
pub fn projector_pair_gap(overlap: f64, eta: f64) -> f64 {
    let b2 = (1.0 - overlap * overlap).max(0.0);
    (1.0 - 4.0 * (1.0 - eta) * eta * b2).max(0.0).sqrt()
}

/// Minimum over `η ∈ [0, 1]` of the projector-pair gap, `|⟨α|β⟩|`.
pub fn segment_min_gap(alpha: &StateVector, beta: &StateVector) -> Result<f64> {
    for s in [alpha, beta] {
        let n2 = s.amplitudes().norm_squared();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
    }
    Ok(alpha.overlap(beta)?.norm())
}

/// Total rescaled evolution time `T` and target accuracy `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub total_time: f64,
    pub accuracy: f64,
}

impl Schedule {
    pub fn new(total_time: f64, accuracy: f64) -> Result<Self> {
        if !(total_time > 0.0 && accuracy > 0.0) {
            return Err(invalid("schedule needs T > 0 and ε > 0"));
        }
        Ok(Self { total_time, accuracy })
    }

    /// Smallest `T` with `T·ε ≥ worst_ratio`.
    pub fn satisfying(report: &ConditionReport, accuracy: f64) -> Result<Self> {
        Self::new(report.worst_ratio.max(f64::MIN_POSITIVE) / accuracy, accuracy)
    }
}

/// Outcome of [`check_adiabatic_condition`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    /// `max_s ‖dH/ds‖ / Δ(H(s))²` over the differentiable grid points.
    pub worst_ratio: f64,
    pub worst_s: f64,
    pub max_derivative: f64,
    pub min_gap: f64,
    /// `T·ε`.
    pub budget: f64,
    pub holds: bool,
    /// `T·ε / worst_ratio` (infinite for a constant path).
    pub margin: f64,
}

/// Checks `T·ε ≥ ‖dH/ds‖ / Δ²` on a uniform grid of `grid` points.
pub fn check_adiabatic_condition(
    path: &HamiltonianPath,
    schedule: &Schedule,
    grid: usize,
) -> Result<ConditionReport> {
    if grid < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    let mut worst_ratio: f64 = 0.0;
    let mut worst_s = 0.0;
    let mut max_derivative: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for k in 0..grid {
        let s = k as f64 / (grid - 1) as f64;
        let gap = path.evaluate(s).eigen().gap();
        if gap < DEFAULT_DEGENERACY_TOL {
            return Err(Error::DegenerateGroundstate { gap, tolerance: DEFAULT_DEGENERACY_TOL });
        }
        min_gap = min_gap.min(gap);
        // nudge the interval ends inward so they still get a derivative sample
        let probe = s.clamp(2.0 * DERIVATIVE_STEP, 1.0 - 2.0 * DERIVATIVE_STEP);
        if let Some(d) = path.derivative_norm(probe) {
            max_derivative = max_derivative.max(d);
            let ratio = d / (gap * gap);
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_s = s;
            }
        }
    }
    let budget = schedule.total_time * schedule.accuracy;
    Ok(ConditionReport {
        worst_ratio,
        worst_s,
        max_derivative,
        min_gap,
        budget,
        holds: budget >= worst_ratio,
        margin: if worst_ratio > 0.0 { budget / worst_ratio } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_state, spectral_gap};
    use crate::seeding::rng_from_seed;

    #[test]
    fn linear_path_examples() {
        let mut rng = rng_from_seed(1);
        let a = random_state(4, &mut rng);
        let b = random_state(4, &mut rng);
        let h0 = DenseHermitian::projector_complement(&a);
        let h1 = DenseHermitian::projector_complement(&b);
        let p = linear_path(&h0, &h1).unwrap();
        let close = |a: &DenseHermitian, b: &DenseHermitian| (a.matrix() - b.matrix()).norm() < 1e-14;
        assert!(close(&p.evaluate(0.0), &h0));
        assert!(close(&p.evaluate(1.0), &h1));
        let constant = linear_path(&h0, &h0).unwrap();
        assert!(close(&constant.evaluate(0.37), &h0));
        // midpoint gap: direct eigendecomposition against |⟨α|β⟩|
        let gap = spectral_gap(&p.evaluate(0.5)).unwrap();
        assert!((gap - a.overlap(&b).unwrap().norm()).abs() < 1e-10);
        assert!(linear_path(&h0, &DenseHermitian::identity(2)).is_err());
    }

    /// Eigenvalues of the explicit 2×2 block
    /// `[[η|a|²+(1-η), η a b*], [η a* b, η|b|²]]` from its trace and determinant.
    fn explicit_block_gap(a: f64, eta: f64) -> f64 {
        let b = (1.0 - a * a).sqrt();
        let (p, q, r) = (eta * a * a + (1.0 - eta), eta * a * b, eta * b * b);
        let tr = p + r;
        let det = p * r - q * q;
        (tr * tr - 4.0 * det).sqrt()
    }

    #[test]
    fn segment_gap_examples() {
        let mut rng = rng_from_seed(2);
        let a = random_state(3, &mut rng);
        assert!((segment_min_gap(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let e0 = StateVector::basis(2, 0);
        let e1 = StateVector::basis(2, 1);
        assert_eq!(segment_min_gap(&e0, &e1).unwrap(), 0.0);

        let g = explicit_block_gap(0.8, 0.3);
        assert!((g - 0.8352).abs() < 1e-4, "{g}");
        assert!((projector_pair_gap(0.8, 0.3) - g).abs() < 1e-12);
        assert!(g >= 0.8);
    }

    #[test]
    fn jagged_path_examples() {
        let mut rng = rng_from_seed(3);
        let a = random_state(4, &mut rng);
        let single = jagged_path(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.evaluate(0.8), DenseHermitian::projector_complement(&a));

        let b = random_state(4, &mut rng);
        let overlap = a.overlap(&b).unwrap().norm();
        let two = jagged_path(&[a.clone(), b.clone()]).unwrap();
        let min = (0..=100)
            .map(|k| spectral_gap(&two.evaluate(k as f64 / 100.0)).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((min - overlap).abs() < 1e-9);

        let c = random_state(4, &mut rng);
        let three = jagged_path(&[a.clone(), b.clone(), c.clone()]).unwrap();
        assert_eq!(three.breakpoints(), &[0.5]);
        let floor = overlap.min(b.overlap(&c).unwrap().norm());
        for k in 0..=200 {
            assert!(spectral_gap(&three.evaluate(k as f64 / 200.0)).unwrap() >= floor - 1e-9);
        }
        let e0 = StateVector::basis(2, 0);
        let e1 = StateVector::basis(2, 1);
        assert!(matches!(jagged_path(&[e0, e1]), Err(Error::DisconnectedPath { .. })));
    }

    #[test]
    fn adiabatic_condition_examples() {
        let h = DenseHermitian::projector_complement(&StateVector::basis(2, 0));
        let constant = linear_path(&h, &h).unwrap();
        let r = check_adiabatic_condition(&constant, &Schedule::new(1e-3, 1e-3).unwrap(), 11)
            .unwrap();
        assert_eq!(r.max_derivative, 0.0);
        assert!(r.holds);

        let a = StateVector::from_real(&[1.0, 0.0]).unwrap();
        let b = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let h0 = DenseHermitian::projector_complement(&a);
        let h1 = DenseHermitian::projector_complement(&b);
        let p = linear_path(&h0, &h1).unwrap();
        let analytic = spectral_norm(h1.sub(&h0).unwrap().matrix());
        for s in [0.1, 0.4, 0.9] {
            assert!((p.derivative_norm(s).unwrap() - analytic).abs() < 1e-8);
        }
        let sched = Schedule::new(1.0, 0.01).unwrap();
        let r = check_adiabatic_condition(&p, &sched, 50).unwrap();
        assert!(!r.holds);
        assert!((r.min_gap - 0.6).abs() < 1e-3);
        let fixed = Schedule::satisfying(&r, 0.01).unwrap();
        assert!(check_adiabatic_condition(&p, &fixed, 50).unwrap().holds);
        assert!(check_adiabatic_condition(&p, &sched, 1).is_err());
    }

    #[test]
    fn continuity_spot_check() {
        let mut rng = rng_from_seed(4);
        let states: Vec<_> = (0..4).map(|_| random_state(4, &mut rng)).collect();
        let p = jagged_path(&states).unwrap();
        assert!(p.max_jump(100, 1e-7) < 1e-5);
    }
}
