use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::linalg::{StateVector, C64, ZERO};

/// Largest input domain enumerated exhaustively (`2^22`).
pub const MAX_DOMAIN: u64 = 1 << 22;
/// Largest output width for [`qsample_exact`].
pub const MAX_QSAMPLE_BITS: u32 = 12;

type EvalFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

/// A deterministic map from `0..input_count` to `m`-bit outputs, sampled
/// on uniformly random inputs.
#[derive(Clone)]
pub struct ClassicalCircuit {
    input_count: u64,
    output_bits: u32,
    eval: EvalFn,
}

impl std::fmt::Debug for ClassicalCircuit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassicalCircuit")
            .field("input_count", &self.input_count)
            .field("output_bits", &self.output_bits)
            .finish()
    }
}

impl ClassicalCircuit {
    /// Inputs are all `n`-bit strings.
    pub fn from_bits(
        input_bits: u32,
        output_bits: u32,
        eval: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if input_bits >= 64 {
            return Err(invalid("input width must be below 64 bits"));
        }
        Self::over_domain(1u64 << input_bits, output_bits, eval)
    }

    /// Inputs are `0..input_count`, e.g. `Z_n`.
    pub fn over_domain(
        input_count: u64,
        output_bits: u32,
        eval: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if input_count == 0 {
            return Err(invalid("circuit domain is empty"));
        }
        if output_bits == 0 || output_bits >= 64 {
            return Err(invalid("output width must lie in 1..64"));
        }
        Ok(Self { input_count, output_bits, eval: Arc::new(eval) })
    }

    /// Lines `input_bits output_bits` in binary, most significant bit
    /// first; every input of the common width must appear exactly once.
    pub fn from_truth_table(text: &str) -> Result<Self> {
        let mut rows: BTreeMap<u64, u64> = BTreeMap::new();
        let mut widths: Option<(usize, usize)> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [input, output] = fields[..] else {
                return Err(err("expected `input_bits output_bits`".into()));
            };
            let w = (input.len(), output.len());
            if *widths.get_or_insert(w) != w {
                return Err(err("inconsistent bit widths".into()));
            }
            if w.0 >= 32 || w.1 == 0 || w.1 >= 64 {
                return Err(err("unsupported bit width".into()));
            }
            let parse = |s: &str| {
                u64::from_str_radix(s, 2).map_err(|_| err(format!("`{s}` is not a bit string")))
            };
            let (x, z) = (parse(input)?, parse(output)?);
            if rows.insert(x, z).is_some() {
                return Err(err(format!("input `{input}` listed twice")));
            }
        }
        let (n, m) = widths.ok_or_else(|| invalid("truth table is empty"))?;
        if rows.len() as u64 != 1u64 << n {
            return Err(invalid(format!("truth table covers {} of {} inputs", rows.len(), 1u64 << n)));
        }
        let table: Vec<u64> = rows.into_values().collect();
        Self::from_bits(n as u32, m as u32, move |x| table[x as usize])
    }

    pub fn input_count(&self) -> u64 {
        self.input_count
    }

    pub fn output_bits(&self) -> u32 {
        self.output_bits
    }

    pub fn eval(&self, x: u64) -> u64 {
        (self.eval)(x)
    }
}

/// Exact output histogram: `counts[z]` inputs map to `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputDistribution {
    pub output_bits: u32,
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
}

impl OutputDistribution {
    /// Builds from explicit counts over `m`-bit outcomes.
    pub fn from_counts(output_bits: u32, counts: BTreeMap<u64, u64>) -> Result<Self> {
        let counts: BTreeMap<u64, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let total = counts.values().sum();
        if total == 0 {
            return Err(invalid("distribution has no mass"));
        }
        if output_bits < 64 && counts.keys().any(|&z| z >> output_bits != 0) {
            return Err(invalid("outcome exceeds the output width"));
        }
        Ok(Self { output_bits, counts, total })
    }

    pub fn probability(&self, z: u64) -> f64 {
        self.counts.get(&z).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.keys().copied()
    }
}

pub fn distribution_of(c: &ClassicalCircuit) -> Result<OutputDistribution> {
    if c.input_count > MAX_DOMAIN {
        return Err(invalid(format!("domain {} exceeds {MAX_DOMAIN}", c.input_count)));
    }
    let mut counts = BTreeMap::new();
    for x in 0..c.input_count {
        let z = c.eval(x);
        if z >> c.output_bits != 0 {
            return Err(invalid(format!("output {z} of input {x} exceeds {} bits", c.output_bits)));
        }
        *counts.entry(z).or_insert(0) += 1;
    }
    OutputDistribution::from_counts(c.output_bits, counts)
}

pub(crate) fn qsample_with_limit(c: &ClassicalCircuit, max_bits: u32) -> Result<StateVector> {
    if c.output_bits > max_bits {
        return Err(invalid(format!("{} output bits exceed {max_bits}", c.output_bits)));
    }
    let d = distribution_of(c)?;
    let mut amps = DVector::from_element(1usize << c.output_bits, ZERO);
    for (&z, &n) in &d.counts {
        amps[z as usize] = C64::new((n as f64 / d.total as f64).sqrt(), 0.0);
    }
    StateVector::normalized(amps)
}

/// `Σ_z √D_C(z) |z⟩`.
pub fn qsample_exact(c: &ClassicalCircuit) -> Result<StateVector> {
    qsample_with_limit(c, MAX_QSAMPLE_BITS)
}

fn check_widths(p: &OutputDistribution, q: &OutputDistribution) -> Result<()> {
    if p.output_bits != q.output_bits {
        return Err(Error::DimensionMismatch {
            expected: p.output_bits as usize,
            found: q.output_bits as usize,
        });
    }
    Ok(())
}

/// `F(p, q) = Σ √(p(z) q(z))`.
pub fn fidelity(p: &OutputDistribution, q: &OutputDistribution) -> Result<f64> {
    check_widths(p, q)?;
    let cross: f64 = p
        .counts
        .iter()
        .filter_map(|(z, &a)| q.counts.get(z).map(|&b| ((a as f64) * (b as f64)).sqrt()))
        .sum();
    Ok((cross / ((p.total as f64) * (q.total as f64)).sqrt()).min(1.0))
}

/// `½ Σ |p(z) - q(z)|`, accumulated exactly in integers.
pub fn variation(p: &OutputDistribution, q: &OutputDistribution) -> Result<f64> {
    check_widths(p, q)?;
    let (tp, tq) = (p.total as u128, q.total as u128);
    let mut diff: u128 = 0;
    for z in p.counts.keys().chain(q.counts.keys().filter(|z| !p.counts.contains_key(z))) {
        let a = *p.counts.get(z).unwrap_or(&0) as u128 * tq;
        let b = *q.counts.get(z).unwrap_or(&0) as u128 * tp;
        diff += a.abs_diff(b);
    }
    Ok(diff as f64 / (2.0 * tp as f64 * tq as f64))
}
