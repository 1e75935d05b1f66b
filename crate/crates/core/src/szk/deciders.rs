use rand::Rng as _;

use super::distribution::{
    distribution_of, qsample_exact, qsample_with_limit, variation, ClassicalCircuit,
};
use super::numbers::{
    discrete_log_brute, factor_semiprime, gcd, is_generator, is_prime,
    is_quadratic_residue_brute, mod_mul, mod_pow,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::StateVector;
use crate::seeding::Rng;

/// Outcome-0 probability of the Hadamard test on `(|0,v⟩ + |1,w⟩)/√2`:
/// the squared norm of the flag-0 branch `(v + w)/2`.
pub fn hadamard_test_probability(v: &StateVector, w: &StateVector) -> Result<f64> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), found: w.dim() });
    }
    let branch = (v.amplitudes() + w.amplitudes()) * crate::C64::new(0.5, 0.0);
    Ok(branch.norm_squared().clamp(0.0, 1.0))
}

/// Empirical frequency of outcome 0 over `shots` simulated Hadamard tests.
pub fn hadamard_test(v: &StateVector, w: &StateVector, shots: u64, rng: &mut Rng) -> Result<f64> {
    if shots == 0 {
        return Err(invalid("Hadamard test needs at least one shot"));
    }
    let p0 = hadamard_test_probability(v, w)?;
    let zeros = (0..shots).filter(|_| rng.gen::<f64>() < p0).count();
    Ok(zeros as f64 / shots as f64)
}

/// Outcome-0 probability ceiling on far instances (variation ≥ ¾):
/// `(1 + √(1 - (3/4)²))/2 ≈ 0.831`.
pub fn sd_far_ceiling() -> f64 {
    (1.0 + (1.0 - 0.75f64 * 0.75).sqrt()) / 2.0
}

/// Outcome-0 probability floor on close instances (variation ≤ ¼): `1 - ¼/2`.
pub const SD_CLOSE_FLOOR: f64 = 0.875;

pub fn sd_threshold() -> f64 {
    (sd_far_ceiling() + SD_CLOSE_FLOOR) / 2.0
}

/// Hoeffding repetition count `⌈ln(1/δ) / (2g²)⌉` for a margin `g`.
pub fn shots_for(delta: f64, margin: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("failure bound must lie in (0, 1)"));
    }
    Ok(((1.0 / delta).ln() / (2.0 * margin * margin)).ceil() as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdDecision {
    /// `true` means "far" (variation ≥ ¾).
    pub far: bool,
    pub frequency: f64,
    pub shots: u64,
    pub threshold: f64,
    pub exact_variation: f64,
    /// Exact variation lies strictly between ¼ and ¾.
    pub promise_violated: bool,
}

pub fn sd_decider(
    c0: &ClassicalCircuit,
    c1: &ClassicalCircuit,
    delta: f64,
    rng: &mut Rng,
) -> Result<SdDecision> {
    let v = qsample_exact(c0)?;
    let w = qsample_exact(c1)?;
    let exact_variation = variation(&distribution_of(c0)?, &distribution_of(c1)?)?;
    let threshold = sd_threshold();
    let shots = shots_for(delta, (SD_CLOSE_FLOOR - sd_far_ceiling()) / 2.0)?;
    let frequency = hadamard_test(&v, &w, shots, rng)?;
    Ok(SdDecision {
        far: frequency < threshold,
        frequency,
        shots,
        threshold,
        exact_variation,
        promise_violated: exact_variation > 0.25 && exact_variation < 0.75,
    })
}

/// Identity on `0..domain` against a copy that agrees on the first
/// `shared` inputs and is shifted out of range elsewhere; variation
/// `1 - shared/domain`.
pub fn shifted_pair(domain: u64, shared: u64) -> Result<(ClassicalCircuit, ClassicalCircuit)> {
    if shared > domain {
        return Err(invalid("shared inputs exceed the domain"));
    }
    let bits = 64 - (2 * domain - 1).leading_zeros();
    let c0 = ClassicalCircuit::over_domain(domain, bits, |x| x)?;
    let c1 = ClassicalCircuit::over_domain(domain, bits, move |x| if x < shared { x } else { x + domain })?;
    Ok((c0, c1))
}

/// Largest prime accepted by the discrete-log builders.
pub const MAX_MODULUS: u64 = 1 << 16;

fn log2_floor(p: u64) -> u32 {
    63 - p.leading_zeros()
}

/// Exponent windows: `(start, len)` of the reference and query states.
fn dlp_windows(p: u64, x: u64) -> ((u64, u64), (u64, u64)) {
    let l = log2_floor(p);
    ((p.div_ceil(2) + 1, 1 << (l - 1)), (x, 1 << (l - 3)))
}

fn window_overlap(p: u64, a: (u64, u64), b: (u64, u64)) -> f64 {
    let order = p - 1;
    let set: std::collections::HashSet<u64> = (0..a.1).map(|i| (a.0 + i) % order).collect();
    let common = (0..b.1).filter(|i| set.contains(&((b.0 + i) % order))).count();
    common as f64 / ((a.1 * b.1) as f64).sqrt()
}

/// Promise windows for `DLP_{1/6}`: `[1, ⌊p/6⌋]` and `[⌈p/2⌉+1, ⌈p/2⌉+⌊p/6⌋]`.
pub fn dlp_promise_ranges(p: u64) -> ((u64, u64), (u64, u64)) {
    let half = p.div_ceil(2);
    ((1, p / 6), (half + 1, half + p / 6))
}

#[derive(Clone, Debug)]
pub struct DlpStates {
    /// `|C_{g^{⌈p/2⌉+1}, ⌊log p⌋-1}⟩`.
    pub reference: StateVector,
    /// `|C_{y, ⌊log p⌋-3}⟩`.
    pub query: StateVector,
}

fn check_dlp(p: u64, g: u64, y: u64) -> Result<()> {
    if !is_prime(p) || p > MAX_MODULUS || p < 17 {
        return Err(invalid(format!("{p} is not a prime in 17..={MAX_MODULUS}")));
    }
    if !is_generator(g, p) {
        return Err(invalid(format!("{g} does not generate Z_{p}^*")));
    }
    if y == 0 || y >= p {
        return Err(invalid(format!("{y} is not a unit modulo {p}")));
    }
    Ok(())
}

/// Circuit `i ↦ a·g^i mod p` on `i ∈ 0..2^k`.
pub fn power_circuit(p: u64, g: u64, a: u64, k: u32) -> Result<ClassicalCircuit> {
    if p < 2 {
        return Err(invalid("modulus must be at least 2"));
    }
    let bits = 64 - (p - 1).leading_zeros();
    ClassicalCircuit::from_bits(k, bits, move |i| mod_mul(a, mod_pow(g, i, p), p))
}

pub fn dlp_states(p: u64, g: u64, y: u64) -> Result<DlpStates> {
    check_dlp(p, g, y)?;
    let l = log2_floor(p);
    let a = mod_pow(g, p.div_ceil(2) + 1, p);
    Ok(DlpStates {
        reference: qsample_with_limit(&power_circuit(p, g, a, l - 1)?, 16)?,
        query: qsample_with_limit(&power_circuit(p, g, y, l - 3)?, 16)?,
    })
}

/// Smallest reference/query overlap over exponents in the high promise window.
pub fn dlp_overlap_min(p: u64) -> f64 {
    let (_, (lo, hi)) = dlp_promise_ranges(p);
    (lo..=hi)
        .map(|x| {
            let (a, b) = dlp_windows(p, x);
            window_overlap(p, a, b)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DlpDecision {
    /// `true` means `log_g y` lies in the upper promise window.
    pub high: bool,
    pub frequency: f64,
    pub threshold: f64,
    pub overlap_min: f64,
    /// Brute-force `log_g y`.
    pub referee_log: u64,
    pub promise_violated: bool,
}

pub fn dlp_decider(p: u64, g: u64, y: u64, shots: u64, rng: &mut Rng) -> Result<DlpDecision> {
    let states = dlp_states(p, g, y)?;
    let overlap_min = dlp_overlap_min(p);
    let threshold = (0.5 + (1.0 + overlap_min) / 2.0) / 2.0;
    let frequency = hadamard_test(&states.reference, &states.query, shots, rng)?;
    let referee_log = discrete_log_brute(g, y, p).expect("generator reaches every unit");
    let ((l0, l1), (h0, h1)) = dlp_promise_ranges(p);
    let inside = (l0..=l1).contains(&referee_log) || (h0..=h1).contains(&referee_log);
    Ok(DlpDecision {
        high: frequency > threshold,
        frequency,
        threshold,
        overlap_min,
        referee_log,
        promise_violated: !inside,
    })
}

#[derive(Clone, Debug)]
pub struct QrStates {
    /// `|C_1⟩` with `C_a(r) = r²·a mod n` on `r ∈ Z_n`.
    pub one: StateVector,
    pub query: StateVector,
    pub factors: (u64, u64),
}

/// Circuit `r ↦ r²·a mod n` on `r ∈ Z_n`.
pub fn square_circuit(nn: u64, a: u64) -> Result<ClassicalCircuit> {
    if nn < 2 {
        return Err(invalid("modulus must be at least 2"));
    }
    let bits = 64 - (nn - 1).leading_zeros();
    ClassicalCircuit::over_domain(nn, bits, move |r| mod_mul(mod_mul(r, r, nn), a, nn))
}

pub fn qr_states(nn: u64, x: u64) -> Result<QrStates> {
    if nn > MAX_MODULUS {
        return Err(invalid(format!("modulus {nn} exceeds {MAX_MODULUS}")));
    }
    let factors = factor_semiprime(nn)
        .ok_or_else(|| invalid(format!("{nn} is not a product of two distinct odd primes")))?;
    if x == 0 || x >= nn || gcd(x, nn) != 1 {
        return Err(invalid(format!("{x} is not a unit modulo {nn}")));
    }
    Ok(QrStates {
        one: qsample_with_limit(&square_circuit(nn, 1)?, 16)?,
        query: qsample_with_limit(&square_circuit(nn, x)?, 16)?,
        factors,
    })
}

/// Overlap ceiling for non-residues: both distributions put mass
/// `(p+q-1)/pq` on non-units and nothing else in common, so Cauchy–Schwarz
/// bounds the fidelity by that mass.
pub fn qr_overlap_bound(p: u64, q: u64) -> f64 {
    (p + q - 1) as f64 / (p * q) as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct QrDecision {
    pub residue: bool,
    pub frequency: f64,
    pub threshold: f64,
    pub overlap_bound: f64,
    /// Brute-force residuosity.
    pub referee: bool,
}

pub fn qr_decider(nn: u64, x: u64, shots: u64, rng: &mut Rng) -> Result<QrDecision> {
    let states = qr_states(nn, x)?;
    let (p, q) = states.factors;
    let overlap_bound = qr_overlap_bound(p, q);
    let threshold = (1.0 + (1.0 + overlap_bound) / 2.0) / 2.0;
    let frequency = hadamard_test(&states.one, &states.query, shots, rng)?;
    Ok(QrDecision {
        residue: frequency > threshold,
        frequency,
        threshold,
        overlap_bound,
        referee: is_quadratic_residue_brute(x, nn),
    })
}

/// A promise problem instance, validated against its preconditions.
#[derive(Clone, Debug)]
pub enum PromiseInstance {
    Sd { c0: ClassicalCircuit, c1: ClassicalCircuit, alpha: f64, beta: f64 },
    Dlp { p: u64, g: u64, y: u64 },
    Qr { n: u64, x: u64 },
}

impl PromiseInstance {
    pub fn validate(&self) -> Result<()> {
        match self {
            PromiseInstance::Sd { c0, c1, alpha, beta } => {
                if !(0.0 <= *beta && beta < alpha && *alpha <= 1.0) {
                    return Err(invalid("SD needs 0 ≤ β < α ≤ 1"));
                }
                if c0.output_bits() != c1.output_bits() {
                    return Err(Error::DimensionMismatch {
                        expected: c0.output_bits() as usize,
                        found: c1.output_bits() as usize,
                    });
                }
                Ok(())
            }
            PromiseInstance::Dlp { p, g, y } => check_dlp(*p, *g, *y),
            PromiseInstance::Qr { n, x } => qr_states(*n, *x).map(|_| ()),
        }
    }
}
