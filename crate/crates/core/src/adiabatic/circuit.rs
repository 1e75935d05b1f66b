//! Circuits over {Hadamard, Not, Toffoli} and their compilation into
//! jagged adiabatic paths. Qubit `q` is bit `q` of a basis index.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::path::{jagged_path, HamiltonianPath};
use crate::error::{invalid, Error, Result};
use crate::linalg::{StateVector, UnitaryMatrix, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Hadamard,
    Not,
    Toffoli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Hadamard(usize),
    Not(usize),
    Toffoli(usize, usize, usize),
    SqrtHadamard(usize),
    SqrtNot(usize),
    SqrtToffoli(usize, usize, usize),
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
// ((1+i)I + (1-i)g)/2 has diagonal (1+i)/2 and off-diagonal (1-i)/2 for g = X
const SQ_DIAG: C64 = C64::new(0.5, 0.5);
const SQ_OFF: C64 = C64::new(0.5, -0.5);

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Hadamard(_) | Gate::SqrtHadamard(_) => GateKind::Hadamard,
            Gate::Not(_) | Gate::SqrtNot(_) => GateKind::Not,
            Gate::Toffoli(..) | Gate::SqrtToffoli(..) => GateKind::Toffoli,
        }
    }

    pub fn is_sqrt(&self) -> bool {
        matches!(self, Gate::SqrtHadamard(_) | Gate::SqrtNot(_) | Gate::SqrtToffoli(..))
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Hadamard(q) | Gate::Not(q) | Gate::SqrtHadamard(q) | Gate::SqrtNot(q) => vec![q],
            Gate::Toffoli(a, b, c) | Gate::SqrtToffoli(a, b, c) => vec![a, b, c],
        }
    }

    /// The square-root counterpart; `None` for gates that already are one.
    pub fn sqrt(&self) -> Option<Gate> {
        match *self {
            Gate::Hadamard(q) => Some(Gate::SqrtHadamard(q)),
            Gate::Not(q) => Some(Gate::SqrtNot(q)),
            Gate::Toffoli(a, b, c) => Some(Gate::SqrtToffoli(a, b, c)),
            _ => None,
        }
    }

    /// 2×2 action on the target qubit, `[[a, b], [c, d]]` row-major.
    fn local(&self, inverse: bool) -> [C64; 4] {
        let h = C64::new(H, 0.0);
        let (d, o) = if inverse { (SQ_DIAG.conj(), SQ_OFF.conj()) } else { (SQ_DIAG, SQ_OFF) };
        match self {
            Gate::Hadamard(_) => [h, h, h, -h],
            Gate::Not(_) | Gate::Toffoli(..) => [ZERO, ONE, ONE, ZERO],
            Gate::SqrtNot(_) | Gate::SqrtToffoli(..) => [d, o, o, d],
            Gate::SqrtHadamard(_) => {
                // ((1+i)I + (1-i)H)/2, or its adjoint
                let (p, m) = if inverse {
                    (C64::new(0.5, -0.5), C64::new(0.5, 0.5))
                } else {
                    (C64::new(0.5, 0.5), C64::new(0.5, -0.5))
                };
                [p + m * h, m * h, m * h, p - m * h]
            }
        }
    }

    fn target_and_mask(&self) -> (usize, usize) {
        match *self {
            Gate::Hadamard(q) | Gate::Not(q) | Gate::SqrtHadamard(q) | Gate::SqrtNot(q) => (q, 0),
            Gate::Toffoli(a, b, c) | Gate::SqrtToffoli(a, b, c) => (c, (1 << a) | (1 << b)),
        }
    }

    fn act(&self, amps: &mut [C64], inverse: bool) {
        let [a, b, c, d] = self.local(inverse);
        let (target, mask) = self.target_and_mask();
        let bit = 1usize << target;
        for i in 0..amps.len() {
            if i & bit != 0 || i & mask != mask {
                continue;
            }
            let (x, y) = (amps[i], amps[i | bit]);
            amps[i] = a * x + b * y;
            amps[i | bit] = c * x + d * y;
        }
    }

    pub fn apply(&self, amps: &mut [C64]) {
        self.act(amps, false);
    }

    pub fn apply_inverse(&self, amps: &mut [C64]) {
        self.act(amps, true);
    }

    fn name(&self) -> &'static str {
        match self {
            Gate::Hadamard(_) => "H",
            Gate::Not(_) => "X",
            Gate::Toffoli(..) => "CCX",
            Gate::SqrtHadamard(_) => "SQRTH",
            Gate::SqrtNot(_) => "SQRTX",
            Gate::SqrtToffoli(..) => "SQRTCCX",
        }
    }
}

/// `√g` with eigenvalue `1 ↦ 1` and `-1 ↦ i`: `((1+i)I + (1-i)g)/2`.
/// The Toffoli matrix acts on qubits (0, 1, 2) with qubit 2 as target.
pub fn sqrt_gate(kind: GateKind) -> UnitaryMatrix {
    let (gate, dim) = match kind {
        GateKind::Hadamard => (Gate::SqrtHadamard(0), 2),
        GateKind::Not => (Gate::SqrtNot(0), 2),
        GateKind::Toffoli => (Gate::SqrtToffoli(0, 1, 2), 8),
    };
    UnitaryMatrix::from_raw(gate_matrix(gate, dim))
}

/// Dense matrix of `g` on `dim` basis states.
pub fn gate_matrix(g: Gate, dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    let mut col = vec![ZERO; dim];
    for k in 0..dim {
        col.iter_mut().for_each(|c| *c = ZERO);
        col[k] = ONE;
        g.apply(&mut col);
        for (r, c) in col.iter().enumerate() {
            m[(r, k)] = *c;
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSequence {
    qubits: usize,
    gates: Vec<Gate>,
}

/// Circuits wider than this are rejected (dense simulation limit).
pub const MAX_CIRCUIT_QUBITS: usize = 12;

impl GateSequence {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if qubits == 0 || qubits > MAX_CIRCUIT_QUBITS {
            return Err(invalid(format!("qubit count {qubits} outside 1..={MAX_CIRCUIT_QUBITS}")));
        }
        for (k, g) in gates.iter().enumerate() {
            let qs = g.qubits();
            if let Some(q) = qs.iter().find(|&&q| q >= qubits) {
                return Err(invalid(format!("gate {k} uses qubit {q} of {qubits}")));
            }
            if qs.len() == 3 && (qs[0] == qs[1] || qs[0] == qs[2] || qs[1] == qs[2]) {
                return Err(invalid(format!("gate {k} repeats a qubit")));
            }
        }
        Ok(Self { qubits, gates })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Each gate `g` replaced by `√g √g`; errors on gates outside the
    /// three-gate set.
    pub fn doubled(&self) -> Result<Self> {
        let mut gates = Vec::with_capacity(2 * self.gates.len());
        for (k, g) in self.gates.iter().enumerate() {
            let s = g.sqrt().ok_or_else(|| {
                invalid(format!("gate {k} ({}) is not in the universal set", g.name()))
            })?;
            gates.extend([s, s]);
        }
        Ok(Self { qubits: self.qubits, gates })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.apply_prefix(self.gates.len(), psi)
    }

    /// Applies the first `j` gates.
    pub fn apply_prefix(&self, j: usize, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        let mut amps = psi.amplitudes().clone();
        for g in &self.gates[..j] {
            g.apply(amps.as_mut_slice());
        }
        Ok(StateVector::from_raw(amps))
    }

    /// Line-oriented text: optional `qubits N`, then `H q`, `X q`,
    /// `CCX a b c` (and `SQRTH`, `SQRTX`, `SQRTCCX`). `#` starts a comment.
    /// Without a `qubits` line the width is one more than the largest index.
    pub fn parse(text: &str) -> Result<Self> {
        let mut qubits = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            let mut words = line.split_whitespace();
            let op = words.next().expect("nonempty line").to_ascii_uppercase();
            let args: Vec<usize> = words
                .map(|w| w.parse().map_err(|_| err(format!("invalid qubit index `{w}`"))))
                .collect::<Result<_>>()?;
            let arity = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("`{op}` takes {n} argument(s), found {}", args.len())))
                }
            };
            let gate = match op.as_str() {
                "QUBITS" => {
                    arity(1)?;
                    qubits = Some(args[0]);
                    continue;
                }
                "H" => arity(1).map(|_| Gate::Hadamard(args[0]))?,
                "X" => arity(1).map(|_| Gate::Not(args[0]))?,
                "CCX" => arity(3).map(|_| Gate::Toffoli(args[0], args[1], args[2]))?,
                "SQRTH" => arity(1).map(|_| Gate::SqrtHadamard(args[0]))?,
                "SQRTX" => arity(1).map(|_| Gate::SqrtNot(args[0]))?,
                "SQRTCCX" => arity(3).map(|_| Gate::SqrtToffoli(args[0], args[1], args[2]))?,
                other => return Err(err(format!("unknown gate `{other}`"))),
            };
            gates.push(gate);
        }
        let width = qubits.unwrap_or_else(|| {
            gates.iter().flat_map(|g| g.qubits()).max().map_or(1, |q| q + 1)
        });
        Self::new(width, gates)
    }

    pub fn format(&self) -> String {
        let mut out = format!("qubits {}\n", self.qubits);
        for g in &self.gates {
            let args: Vec<String> = g.qubits().iter().map(|q| q.to_string()).collect();
            let _ = writeln!(out, "{} {}", g.name(), args.join(" "));
        }
        out
    }
}

/// Basis index of `|x, 0…0⟩` with `x[i]` on qubit `i`.
pub fn input_index(qubits: usize, x: &[bool]) -> Result<usize> {
    if x.len() > qubits {
        return Err(invalid(format!("{} input bits exceed {qubits} qubits", x.len())));
    }
    Ok(x.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| 1 << i).sum())
}

/// `α_x(j)` for `j = 0..=M′`: states after each prefix of the doubled circuit.
pub fn prefix_states(gates: &GateSequence, x: &[bool]) -> Result<Vec<StateVector>> {
    let doubled = gates.doubled()?;
    let mut amps = StateVector::basis(gates.dim(), input_index(gates.qubits, x)?).into_inner();
    let mut states = vec![StateVector::from_raw(amps.clone())];
    for g in doubled.gates() {
        g.apply(amps.as_mut_slice());
        states.push(StateVector::from_raw(amps.clone()));
    }
    Ok(states)
}

/// Jagged path through `I - |α_x(j)⟩⟨α_x(j)|` over the doubled circuit.
pub fn compile_circuit(gates: &GateSequence, x: &[bool]) -> Result<HamiltonianPath> {
    let states = prefix_states(gates, x)?;
    jagged_path(&states)
}

/// `e^{-iδ(I - |α_x(j)⟩⟨α_x(j)|)}` realized as: undo the first `j` gates of
/// the doubled circuit, apply `e^{-iδ}` to every basis state except
/// `|x, 0…0⟩`, redo the first `j` gates.
#[derive(Clone, Debug)]
pub struct StepHandle {
    doubled: GateSequence,
    input: usize,
    step: usize,
    delta: f64,
}

impl StepHandle {
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.doubled.dim() {
            return Err(Error::DimensionMismatch { expected: self.doubled.dim(), found: psi.dim() });
        }
        let mut amps = psi.amplitudes().clone();
        let prefix = &self.doubled.gates()[..self.step];
        for g in prefix.iter().rev() {
            g.apply_inverse(amps.as_mut_slice());
        }
        let phase = C64::from_polar(1.0, -self.delta);
        for (i, a) in amps.iter_mut().enumerate() {
            if i != self.input {
                *a *= phase;
            }
        }
        for g in prefix {
            g.apply(amps.as_mut_slice());
        }
        Ok(StateVector::from_raw(amps))
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let dim = self.doubled.dim();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for k in 0..dim {
            let col = self.apply(&StateVector::basis(dim, k)).expect("dimension matches");
            m.set_column(k, col.amplitudes());
        }
        m
    }
}

pub fn simulatable_handle_for_step(
    gates: &GateSequence,
    x: &[bool],
    j: usize,
    delta: f64,
) -> Result<StepHandle> {
    let doubled = gates.doubled()?;
    if j > doubled.len() {
        return Err(invalid(format!("step {j} exceeds {} doubled gates", doubled.len())));
    }
    Ok(StepHandle { input: input_index(gates.qubits, x)?, doubled, step: j, delta })
}

/// Random circuit of `1..=max_gates` gates drawn uniformly from
/// Hadamard, NOT and Toffoli (the latter only with three or more qubits).
pub fn random_circuit<R: rand::Rng + ?Sized>(
    qubits: usize,
    max_gates: usize,
    rng: &mut R,
) -> Result<GateSequence> {
    if qubits == 0 || max_gates == 0 {
        return Err(invalid("random circuit needs a qubit and a gate"));
    }
    let kinds = if qubits >= 3 { 3 } else { 2 };
    let len = rng.gen_range(1..=max_gates);
    let gates = (0..len)
        .map(|_| match rng.gen_range(0..kinds) {
            0 => Gate::Hadamard(rng.gen_range(0..qubits)),
            1 => Gate::Not(rng.gen_range(0..qubits)),
            _ => {
                let picked = rand::seq::index::sample(rng, qubits, 3);
                Gate::Toffoli(picked.index(0), picked.index(1), picked.index(2))
            }
        })
        .collect();
    GateSequence::new(qubits, gates)
}
