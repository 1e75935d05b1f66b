use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use rand::Rng as _;

use qgen_core::adiabatic::{
    check_adiabatic_condition, compile_circuit, evolve_discretized, groundstate_perturbation_bound,
    linear_path, mixed_fidelity, random_circuit, sample_all_success, zeno_density_evolve,
    zeno_evolve, GateSequence, HamiltonianPath,
    ProjectionBackend, Schedule, ZenoGrid,
};
use qgen_core::linalg::{
    ground_state, matrix_exponential, random_hermitian, random_sparse_hermitian, random_state,
    spectral_gap, DEFAULT_DEGENERACY_TOL,
};
use qgen_core::markov::{
    anneal_weights_sequence, chain_hamiltonian, complete_edges, matchings_seed_qsample,
    matchings_space, parse_edge_list, pi_state, project_perfect, qsample_sequence,
    random_reversible_chain, stationary, MarkovChain, QsampleMode,
};
use qgen_core::seeding::rng_for;
use qgen_core::sparse::{
    color_bound, decompose, parse_coordinate_list, simulate_sparse, trotter_error, RowTable,
    SimulationOptions, SparseHamiltonian,
};
use qgen_core::szk::numbers::{find_generator, mod_pow, units};
use qgen_core::szk::{
    dlp_decider, dlp_promise_ranges, power_circuit, qr_decider, sd_decider, shifted_pair,
    square_circuit, ClassicalCircuit,
};
use qgen_core::{DenseHermitian, Rng, StateVector, C64};

use crate::config::{Backend, CommandKind, ExperimentConfig};
use crate::report::{Assertion, Series};

pub const DEFAULT_SEED: u64 = 42;

/// A bad configuration or unreadable input, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

fn input_err(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Results accumulated by one command.
#[derive(Default)]
pub struct Outputs {
    pub scalars: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Series>,
    pub assertions: Vec<Assertion>,
    pub warnings: Vec<String>,
}

impl Outputs {
    fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.to_owned(), value);
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.to_owned(), passed, detail: detail.into() });
    }
}

struct Ctx<'a> {
    cfg: &'a mut ExperimentConfig,
    out: Outputs,
    seed: u64,
}

impl Ctx<'_> {
    fn rng(&self, label: &str) -> Rng {
        rng_for(self.seed, label)
    }
}

/// Runs `command`, filling unset config fields with the defaults it used.
pub fn run(command: CommandKind, cfg: &mut ExperimentConfig) -> Result<Outputs> {
    let seed = *cfg.seed.get_or_insert(DEFAULT_SEED);
    let mut ctx = Ctx { cfg, out: Outputs::default(), seed };
    match command {
        CommandKind::DecomposeCheck => decompose_check(&mut ctx),
        CommandKind::TrotterSweep => trotter_sweep(&mut ctx),
        CommandKind::GapFormula => gap_formula(&mut ctx),
        CommandKind::ZenoRun => zeno_run(&mut ctx),
        CommandKind::AdiabaticRun => adiabatic_run(&mut ctx),
        CommandKind::CompileCircuit => compile_check(&mut ctx),
        CommandKind::ZenBound => zen_bound(&mut ctx),
        CommandKind::MarkovSpectrum => markov_spectrum(&mut ctx),
        CommandKind::MatchingsQsample => matchings_qsample(&mut ctx),
        CommandKind::SzkSd => szk_sd(&mut ctx),
        CommandKind::SzkDlp => szk_dlp(&mut ctx),
        CommandKind::SzkQr => szk_qr(&mut ctx),
    }?;
    Ok(ctx.out)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<DenseHermitian> {
    parse_coordinate_list(&read(path)?).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn read_gates(path: Option<&Path>) -> Result<GateSequence> {
    match path {
        Some(p) => GateSequence::parse(&read(p)?).map_err(|e| input_err(format!("{}: {e}", p.display()))),
        None => default_circuit(),
    }
}

/// Two-qubit circuit used when no gate file is given.
pub fn default_circuit() -> Result<GateSequence> {
    Ok(GateSequence::parse("qubits 2\nH 0\nH 1\nX 0\nH 0\n")?)
}

fn parse_input(text: Option<&str>, qubits: usize) -> Result<Vec<bool>> {
    let Some(text) = text else { return Ok(vec![false; qubits]) };
    if text.len() != qubits {
        return Err(input_err(format!("input `{text}` must have {qubits} bits")));
    }
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(input_err(format!("input `{text}` is not a bit string"))),
        })
        .collect()
}

fn backend(cfg: &mut ExperimentConfig) -> ProjectionBackend {
    match *cfg.backend.get_or_insert(Backend::Exact) {
        Backend::Exact => ProjectionBackend::Exact,
        Backend::PhaseEstimation => ProjectionBackend::PhaseEstimation { bits: cfg.bits },
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(input_err(format!("{name} must be positive, got {v}")))
    }
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn decompose_check(ctx: &mut Ctx) -> Result<()> {
    let mut instances: Vec<(DenseHermitian, SparseHamiltonian)> = Vec::new();
    if let Some(path) = ctx.cfg.matrix_file.clone() {
        let h = read_matrix(&path)?;
        let sh = SparseHamiltonian::from_dense(&h)?;
        instances.push((h, sh));
    } else {
        let count = *ctx.cfg.instances.get_or_insert(50);
        let lambda = positive("lambda", *ctx.cfg.lambda.get_or_insert(1.0))?;
        let mut rng = ctx.rng("decompose-check");
        for _ in 0..count {
            // unset n or D are drawn per instance
            let n = ctx.cfg.n.unwrap_or_else(|| rng.gen_range(3..=6));
            let d = ctx.cfg.sparsity.unwrap_or_else(|| rng.gen_range(2..=6));
            let h = random_sparse_hermitian(n, d, lambda, rng.gen()).map_err(|e| input_err(e.to_string()))?;
            let sh = SparseHamiltonian::new(Arc::new(RowTable::from_dense(&h)), d, lambda)?;
            instances.push((h, sh));
        }
    }
    let mut exact = true;
    let mut disjoint = true;
    let mut within_bound = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut max_pieces = 0usize;
    let mut series = Series::new(&["instance", "qubits", "sparsity", "pieces", "color_bound", "max_piece_norm", "norm"]);
    for (k, (h, sh)) in instances.iter().enumerate() {
        let pieces = decompose(sh)?;
        let dim = h.dim();
        let mut sum = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for p in &pieces {
            disjoint &= p.is_block_disjoint(dim);
            sum += p.to_dense(dim).matrix();
        }
        exact &= &sum == h.matrix();
        let bound = color_bound(sh);
        within_bound &= pieces.len() as u128 <= bound;
        max_pieces = max_pieces.max(pieces.len());
        let norm = h.norm();
        let max_piece = pieces.iter().map(|p| p.norm()).fold(0.0, f64::max);
        worst_excess = worst_excess.max(max_piece - norm);
        series.push(vec![
            k as f64,
            sh.qubits() as f64,
            sh.sparsity() as f64,
            pieces.len() as f64,
            bound as f64,
            max_piece,
            norm,
        ]);
    }
    let out = &mut ctx.out;
    out.scalar("instances", instances.len() as f64);
    out.scalar("max_pieces", max_pieces as f64);
    out.scalar("max_piece_norm_excess", worst_excess);
    out.check("sum_of_pieces_is_exact", exact, "Σ H_m = H entrywise");
    out.check("pieces_block_disjoint", disjoint, "every piece is a disjoint union of 2×2 blocks");
    out.check("piece_count_within_color_bound", within_bound, "pieces ≤ (D+1)²n⁶");
    out.check("piece_norms_bounded", worst_excess <= 1e-12, format!("max ‖H_m‖ - ‖H‖ = {worst_excess:e} ≤ 1e-12"));
    out.series.insert("pieces".into(), series);
    Ok(())
}

fn trotter_sweep(ctx: &mut Ctx) -> Result<()> {
    let n = *ctx.cfg.n.get_or_insert(5);
    let d = *ctx.cfg.sparsity.get_or_insert(4);
    let lambda = positive("lambda", *ctx.cfg.lambda.get_or_insert(1.0))?;
    let t = positive("t", *ctx.cfg.t.get_or_insert(1.0))?;
    let alpha = positive("alpha", *ctx.cfg.alpha.get_or_insert(1e-3))?;
    let points = (*ctx.cfg.points.get_or_insert(6)).max(2);
    let (h, sh) = match ctx.cfg.matrix_file.clone() {
        Some(path) => {
            let h = read_matrix(&path)?;
            let sh = SparseHamiltonian::from_dense(&h)?;
            (h, sh)
        }
        None => {
            let h = random_sparse_hermitian(n, d, lambda, ctx.rng("trotter-sweep").gen())
                .map_err(|e| input_err(e.to_string()))?;
            let sh = SparseHamiltonian::new(Arc::new(RowTable::from_dense(&h)), d, lambda)?;
            (h, sh)
        }
    };
    let pieces = decompose(&sh)?;
    let exact = matrix_exponential(&h, t)?;
    let m = pieces.len() as f64;
    let nb = sh.norm_bound();
    let mut series = Series::new(&["delta", "measured_error", "bound"]);
    let (mut deltas, mut errors) = (Vec::new(), Vec::new());
    for k in 0..points {
        let delta = t / (2.0 * (1u64 << (k + 2)) as f64);
        let err = trotter_error(&pieces, exact.matrix(), t, delta);
        // leading-order shape with unit constants
        let bound = m * nb * delta + m * nb.powi(3) * t * delta * delta;
        series.push(vec![delta, err, bound]);
        deltas.push(delta);
        errors.push(err);
    }
    let slope = loglog_slope(&deltas, &errors);
    let sim = simulate_sparse(&sh, t, alpha, SimulationOptions::default())?;
    let out = &mut ctx.out;
    out.scalar("pieces", m);
    out.scalar("loglog_slope", slope);
    out.scalar("simulation_error", sim.measured_error);
    out.scalar("simulation_delta", sim.delta());
    out.check("error_decreases_at_least_linearly", slope >= 0.9, format!("slope {slope:.4} ≥ 0.9"));
    out.check(
        "simulation_meets_accuracy",
        sim.measured_error <= alpha,
        format!("‖Û - e^(-itH)‖ = {:e} ≤ {alpha:e}", sim.measured_error),
    );
    out.series.insert("trotter".into(), series);
    Ok(())
}

fn gap_formula(ctx: &mut Ctx) -> Result<()> {
    let count = *ctx.cfg.instances.get_or_insert(100);
    let points = (*ctx.cfg.points.get_or_insert(101)).max(3);
    let mut rng = ctx.rng("gap-formula");
    let mut worst_formula: f64 = 0.0;
    let mut worst_min: f64 = 0.0;
    let mut argmin_ok = true;
    let mut series = Series::new(&["eta", "gap", "formula"]);
    for k in 0..count {
        let dim = match ctx.cfg.n {
            Some(q) => 1usize << q,
            None => rng.gen_range(2..=8),
        };
        let alpha = random_state(dim, &mut rng);
        let beta = random_state(dim, &mut rng);
        let a = alpha.overlap(&beta)?.norm();
        let h0 = DenseHermitian::projector_complement(&alpha);
        let h1 = DenseHermitian::projector_complement(&beta);
        let eta: f64 = rng.gen();
        let formula = |eta: f64| (1.0 - 4.0 * (1.0 - eta) * eta * (1.0 - a * a)).sqrt();
        worst_formula = worst_formula.max((spectral_gap(&h0.lerp(&h1, eta)?)? - formula(eta)).abs());
        // odd point counts put η = ½ on the grid
        let mid = (points - 1) / 2;
        let etas: Vec<f64> = (0..points).map(|j| j as f64 / (points - 1) as f64).collect();
        let mut gaps = Vec::with_capacity(points);
        for &e in &etas {
            gaps.push(spectral_gap(&h0.lerp(&h1, e)?)?);
        }
        let vmin = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        if points % 2 == 1 {
            argmin_ok &= (gaps[mid] - vmin).abs() <= 1e-9;
            worst_min = worst_min.max((gaps[mid] - a).abs());
        }
        if k == 0 {
            for (e, g) in etas.iter().zip(&gaps) {
                series.push(vec![*e, *g, formula(*e)]);
            }
        }
    }
    let out = &mut ctx.out;
    out.scalar("max_formula_deviation", worst_formula);
    out.scalar("max_midpoint_deviation", worst_min);
    out.check("gap_matches_formula", worst_formula <= 1e-9, format!("max deviation {worst_formula:e} ≤ 1e-9"));
    out.check("minimum_at_midpoint", argmin_ok, "grid minimum sits at η = ½");
    out.check("midpoint_gap_is_overlap", worst_min <= 1e-9, format!("|Δ(½) - |⟨α|β⟩|| ≤ {worst_min:e}"));
    out.series.insert("gap".into(), series);
    Ok(())
}

fn zeno_run(ctx: &mut Ctx) -> Result<()> {
    let circuit = read_gates(ctx.cfg.gate_file.as_deref())?;
    let x = parse_input(ctx.cfg.input.as_deref(), circuit.qubits())?;
    let rs = ctx.cfg.zeno_steps.get_or_insert_with(|| vec![250, 500, 1000, 2000]).clone();
    if rs.is_empty() || rs.contains(&0) {
        return Err(input_err("zeno_steps must be nonempty and positive"));
    }
    let runs = *ctx.cfg.runs.get_or_insert(10_000);
    let backend = backend(ctx.cfg);
    let path = compile_circuit(&circuit, &x)?;
    let psi0 = path.jagged_states().expect("compiled paths are jagged")[0].clone();
    let want = circuit.apply(&StateVector::basis(circuit.dim(), qgen_core::adiabatic::input_index(circuit.qubits(), &x)?))?;
    let mut mc_rng = ctx.rng("zeno-run/monte-carlo");
    let mut evo_rng = ctx.rng("zeno-run/evolve");
    let mut series = Series::new(&[
        "R",
        "failure",
        "perturbative_failure_bound",
        "mc_failure",
        "conditional_fidelity",
        "unconditioned_fidelity",
    ]);
    let mut worst_z: f64 = 0.0;
    let mut fails = Vec::new();
    for &r in &rs {
        let grid = ZenoGrid::new(&path, r)?;
        let probs = grid.step_overlaps();
        let success = grid.closed_form_success();
        let hits = sample_all_success(&probs, runs, &mut mc_rng);
        let freq = hits as f64 / runs.max(1) as f64;
        let sigma = (success * (1.0 - success) / runs.max(1) as f64).sqrt().max(1e-12);
        worst_z = worst_z.max((freq - success).abs() / sigma);
        let report = zeno_evolve(&path, r, &psi0, backend, &mut evo_rng)?;
        let fid = report.final_state.fidelity(&want)?;
        let mixed = mixed_fidelity(&zeno_density_evolve(&path, r, &psi0)?, &want)?;
        series.push(vec![r as f64, 1.0 - success, 1.0 - grid.perturbative_lower_bound(), 1.0 - freq, fid, mixed]);
        fails.push((r, 1.0 - success));
    }
    let mut order = fails.clone();
    order.sort_by_key(|&(r, _)| r);
    let monotone = order.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15);
    let num: f64 = fails.iter().map(|&(r, f)| f / r as f64).sum();
    let den: f64 = fails.iter().map(|&(r, _)| 1.0 / (r as f64).powi(2)).sum();
    let c = num / den;
    let band = fails.iter().all(|&(r, f)| (0.5..=2.0).contains(&(f * r as f64 / c)));
    let out = &mut ctx.out;
    out.scalar("fit_constant", c);
    out.scalar("worst_monte_carlo_z", worst_z);
    out.check("failure_nonincreasing_in_r", monotone, "failure mass falls as R grows");
    out.check("failure_within_factor_two_of_fit", band, format!("1 - P within [½, 2]·C/R, C = {c:.4}"));
    if runs > 0 {
        out.check("monte_carlo_within_3_sigma", worst_z <= 3.0, format!("worst |z| = {worst_z:.3}"));
    }
    out.series.insert("zeno".into(), series);
    Ok(())
}

fn adiabatic_path(ctx: &mut Ctx) -> Result<(HamiltonianPath, Option<StateVector>)> {
    match (ctx.cfg.matrix_file.clone(), ctx.cfg.final_matrix_file.clone()) {
        (Some(a), Some(b)) => {
            let h0 = read_matrix(&a)?;
            let h1 = read_matrix(&b)?;
            Ok((linear_path(&h0, &h1).map_err(|e| input_err(e.to_string()))?, None))
        }
        (None, None) => {
            let circuit = read_gates(ctx.cfg.gate_file.as_deref())?;
            let x = parse_input(ctx.cfg.input.as_deref(), circuit.qubits())?;
            let index = qgen_core::adiabatic::input_index(circuit.qubits(), &x)?;
            let want = circuit.apply(&StateVector::basis(circuit.dim(), index))?;
            Ok((compile_circuit(&circuit, &x)?, Some(want)))
        }
        _ => Err(input_err("a linear path needs both matrix_file and final_matrix_file")),
    }
}

fn adiabatic_run(ctx: &mut Ctx) -> Result<()> {
    let (path, circuit_output) = adiabatic_path(ctx)?;
    let eps = positive("eps", *ctx.cfg.eps.get_or_insert(0.1))?;
    let delta = positive("delta", *ctx.cfg.delta.get_or_insert(0.05))?;
    let probe = check_adiabatic_condition(&path, &Schedule::new(1.0, eps)?, 257)?;
    let schedule = match ctx.cfg.total_time {
        Some(t) => Schedule::new(positive("total_time", t)?, eps)?,
        None => Schedule::satisfying(&probe, eps)?,
    };
    ctx.cfg.total_time = Some(schedule.total_time);
    let (_, g0) = ground_state(&path.evaluate(0.0), DEFAULT_DEGENERACY_TOL)?;
    let report = evolve_discretized(&path, &schedule, delta, &g0)?;
    let condition = check_adiabatic_condition(&path, &schedule, 257)?;
    let mut series = Series::new(&["s", "groundstate_overlap"]);
    let stride = (report.steps / 1000).max(1);
    for (j, o) in report.per_step_overlaps.iter().enumerate().step_by(stride) {
        series.push(vec![(j as f64 + 0.5) / report.steps as f64, *o]);
    }
    let out = &mut ctx.out;
    out.warnings.extend(report.warnings.iter().cloned());
    out.scalar("total_time", schedule.total_time);
    out.scalar("steps", report.steps as f64);
    out.scalar("min_gap", condition.min_gap);
    out.scalar("worst_ratio", condition.worst_ratio);
    out.scalar("final_fidelity", report.final_fidelity);
    out.check("adiabatic_condition_holds", condition.holds, format!("margin {:.4}", condition.margin));
    out.check(
        "final_fidelity_within_accuracy",
        report.final_fidelity >= 1.0 - eps,
        format!("|⟨α(1)|ψ(T)⟩|² = {:.6} ≥ 1 - ε", report.final_fidelity),
    );
    if let Some(want) = circuit_output {
        let fid = want.fidelity(&report.final_state)?;
        out.scalar("circuit_output_fidelity", fid);
    }
    out.series.insert("overlaps".into(), series);
    Ok(())
}

fn compile_check(ctx: &mut Ctx) -> Result<()> {
    let r = *ctx.cfg.zeno_steps.get_or_insert_with(|| vec![2000]).first().ok_or_else(|| input_err("zeno_steps is empty"))?;
    let backend = backend(ctx.cfg);
    let mut rng = ctx.rng("compile-circuit");
    let circuits: Vec<(GateSequence, Vec<bool>)> = match ctx.cfg.gate_file.clone() {
        Some(p) => {
            let c = read_gates(Some(&p))?;
            let x = parse_input(ctx.cfg.input.as_deref(), c.qubits())?;
            vec![(c, x)]
        }
        None => {
            let count = *ctx.cfg.instances.get_or_insert(10);
            let qubits = *ctx.cfg.n.get_or_insert(3) as usize;
            (0..count)
                .map(|_| {
                    let c = random_circuit(qubits, 6, &mut rng)?;
                    let x = (0..qubits).map(|_| rng.gen()).collect();
                    Ok((c, x))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut min_overlap = f64::INFINITY;
    let mut min_gap = f64::INFINITY;
    let mut min_fid = f64::INFINITY;
    let mut min_mixed = f64::INFINITY;
    let mut series = Series::new(&[
        "circuit",
        "gates",
        "segments",
        "min_overlap",
        "min_gap",
        "conditional_fidelity",
        "unconditioned_fidelity",
    ]);
    for (k, (c, x)) in circuits.iter().enumerate() {
        let path = compile_circuit(c, x)?;
        let states = path.jagged_states().expect("compiled paths are jagged");
        let mut ov = f64::INFINITY;
        for w in states.windows(2) {
            ov = ov.min(w[0].overlap(&w[1])?.norm());
        }
        let samples = 40 * path.segments();
        let mut gap = f64::INFINITY;
        for j in 0..=samples {
            gap = gap.min(spectral_gap(&path.evaluate(j as f64 / samples as f64))?);
        }
        let want = c.apply(&StateVector::basis(c.dim(), qgen_core::adiabatic::input_index(c.qubits(), x)?))?;
        let report = zeno_evolve(&path, r, &states[0], backend, &mut rng)?;
        let fid = report.final_state.fidelity(&want)?;
        let mixed = mixed_fidelity(&zeno_density_evolve(&path, r, &states[0])?, &want)?;
        min_mixed = min_mixed.min(mixed);
        series.push(vec![k as f64, c.len() as f64, path.segments() as f64, ov, gap, fid, mixed]);
        min_overlap = min_overlap.min(ov);
        min_gap = min_gap.min(gap);
        min_fid = min_fid.min(fid);
    }
    let out = &mut ctx.out;
    out.scalar("min_overlap", min_overlap);
    out.scalar("min_gap", min_gap);
    out.scalar("min_zeno_fidelity", min_fid);
    // informational: the mixture over all measurement outcomes
    out.scalar("min_unconditioned_fidelity", min_mixed);
    out.check("overlaps_at_least_inverse_sqrt2", min_overlap >= FRAC_1_SQRT_2 - 1e-12, format!("{min_overlap:.9}"));
    out.check("gaps_at_least_inverse_sqrt2", min_gap >= FRAC_1_SQRT_2 - 1e-9, format!("{min_gap:.9}"));
    out.check("zeno_reaches_circuit_output", min_fid >= 0.99, format!("fidelity {min_fid:.6} ≥ 0.99"));
    out.series.insert("circuits".into(), series);
    Ok(())
}

fn zen_bound(ctx: &mut Ctx) -> Result<()> {
    let count = *ctx.cfg.instances.get_or_insert(200);
    let mut rng = ctx.rng("zen-bound");
    let mut violations = 0;
    let mut skipped = 0;
    let mut series = Series::new(&["eta_over_gap", "overlap", "bound"]);
    for _ in 0..count {
        let dim = match ctx.cfg.n {
            Some(q) => 1usize << q,
            None => rng.gen_range(2..=8),
        };
        let h = random_hermitian(dim, &mut rng);
        let scale = 10f64.powf(rng.gen_range(-6.0..0.0));
        let j = h.add(&random_hermitian(dim, &mut rng).scaled(scale))?;
        match groundstate_perturbation_bound(&h, &j) {
            Ok(b) => {
                violations += usize::from(!b.holds());
                series.push(vec![b.eta / b.gap, b.overlap, b.bound]);
            }
            Err(_) => skipped += 1,
        }
    }
    let out = &mut ctx.out;
    out.scalar("violations", violations as f64);
    out.scalar("skipped_degenerate", skipped as f64);
    out.check("overlap_bound_holds", violations == 0, format!("{violations} violations"));
    out.series.insert("perturbation".into(), series);
    Ok(())
}

fn markov_spectrum(ctx: &mut Ctx) -> Result<()> {
    let mut chains: Vec<MarkovChain> = Vec::new();
    if let Some(path) = ctx.cfg.chain_file.clone() {
        chains.push(MarkovChain::parse(&read(&path)?).map_err(|e| input_err(format!("{}: {e}", path.display())))?);
    } else {
        let count = *ctx.cfg.instances.get_or_insert(50);
        let mut rng = ctx.rng("markov-spectrum");
        for _ in 0..count {
            let n = ctx.cfg.n.map(|n| n as usize).unwrap_or_else(|| rng.gen_range(2..=32));
            chains.push(random_reversible_chain(n, &mut rng).map_err(|e| input_err(e.to_string()))?.0);
        }
    }
    let mut worst_spectrum: f64 = 0.0;
    let mut worst_ground: f64 = 0.0;
    let mut series = Series::new(&["index", "hamiltonian_eigenvalue", "one_minus_chain_eigenvalue"]);
    for (k, chain) in chains.iter().enumerate() {
        let pi = stationary(chain)?;
        let h = chain_hamiltonian(chain, &pi)?;
        let from_h = h.eigen().eigenvalues;
        let mut from_m: Vec<f64> = chain.transition().complex_eigenvalues().iter().map(|l| 1.0 - l.re).collect();
        from_m.sort_by(f64::total_cmp);
        for (j, (a, b)) in from_h.iter().zip(&from_m).enumerate() {
            worst_spectrum = worst_spectrum.max((a - b).abs());
            if k == 0 {
                series.push(vec![j as f64, *a, *b]);
            }
        }
        let (_, g) = ground_state(&h, DEFAULT_DEGENERACY_TOL)?;
        let sqrt_pi = pi_state(&pi);
        for (amp, want) in g.amplitudes().iter().zip(sqrt_pi.amplitudes().iter()) {
            worst_ground = worst_ground.max((amp - want).norm());
        }
    }
    let out = &mut ctx.out;
    out.scalar("chains", chains.len() as f64);
    out.scalar("max_spectrum_deviation", worst_spectrum);
    out.scalar("max_groundstate_deviation", worst_ground);
    out.check("spectrum_is_one_minus_chain_spectrum", worst_spectrum <= 1e-9, format!("{worst_spectrum:e} ≤ 1e-9"));
    out.check("groundstate_is_sqrt_pi", worst_ground <= 1e-8, format!("{worst_ground:e} ≤ 1e-8"));
    out.series.insert("spectrum".into(), series);
    Ok(())
}

fn matchings_qsample(ctx: &mut Ctx) -> Result<()> {
    let n = *ctx.cfg.n.get_or_insert(2) as usize;
    let steps = *ctx.cfg.steps.get_or_insert(20);
    let ratio = positive("ratio", *ctx.cfg.ratio.get_or_insert(0.7))?;
    let max_variation = positive("max_variation", *ctx.cfg.max_variation.get_or_insert(0.5))?;
    let r = *ctx.cfg.zeno_steps.get_or_insert_with(|| vec![2000]).first().ok_or_else(|| input_err("zeno_steps is empty"))?;
    let backend = backend(ctx.cfg);
    let edges = match ctx.cfg.edge_file.clone() {
        Some(p) => parse_edge_list(&read(&p)?).map_err(|e| input_err(format!("{}: {e}", p.display())))?,
        None => complete_edges(n).into_iter().filter(|&e| e != (0, n - 1)).collect(),
    };
    let space = matchings_space(n, &edges).map_err(|e| input_err(e.to_string()))?;
    let full = matchings_space(n, &complete_edges(n))?;
    let seed = matchings_seed_qsample(n)?;
    let mut rng = ctx.rng("matchings-qsample");
    let seed_probability = project_perfect(&seed, &full, &mut rng)?.probability;

    let seq = anneal_weights_sequence(&space, steps, ratio, max_variation)?;
    let mode = QsampleMode::Zeno { steps: r, backend };
    let report = qsample_sequence(&seq, &seed, mode, &mut rng)?;
    let mut proj = project_perfect(&report.evolution.final_state, &space, &mut rng)?;
    let mut attempts = 1;
    // a failed shot means re-preparing; retry on the same prepared state
    while !proj.success && attempts < 64 {
        proj = project_perfect(&report.evolution.final_state, &space, &mut rng)?;
        attempts += 1;
    }
    let uniform = space.uniform_target_perfect()?;
    let deviation = proj.post_state.clone().with_canonical_phase().max_abs_diff(&uniform);

    let v = &report.variation;
    let mut series = Series::new(&["step", "variation", "overlap", "second_gap"]);
    for (j, (var, ov)) in v.variations.iter().zip(&v.overlaps).enumerate() {
        series.push(vec![j as f64, *var, *ov, v.second_gaps.get(j + 1).copied().unwrap_or(f64::NAN)]);
    }
    let out = &mut ctx.out;
    out.scalar("states", space.len() as f64);
    out.scalar("seed_perfect_probability", seed_probability);
    out.scalar("final_fidelity", report.fidelity);
    out.scalar("perfect_projection_probability", proj.probability);
    out.scalar("projection_attempts", attempts as f64);
    out.scalar("projected_deviation", deviation);
    if n == 2 {
        out.check(
            "seed_projection_probability",
            (seed_probability - 0.2).abs() <= 1e-9,
            format!("{seed_probability:.12} = 0.2 ± 1e-9"),
        );
    }
    out.check("sequence_slowly_varying", v.passes(), format!("violations at {:?}", v.violations));
    out.check("qsample_fidelity", report.fidelity >= 0.99, format!("{:.6} ≥ 0.99", report.fidelity));
    out.check(
        "projection_is_uniform_over_perfect_matchings",
        proj.success && deviation <= 1e-6,
        format!("success {}, deviation {deviation:e} ≤ 1e-6", proj.success),
    );
    out.series.insert("sequence".into(), series);
    Ok(())
}

fn parse_circuit(text: &str) -> Result<ClassicalCircuit> {
    let fields: Vec<&str> = text.split(':').collect();
    let nums = |k: usize| -> Result<Vec<u64>> {
        if fields.len() != k + 1 {
            bail!(input_err(format!("built-in `{text}` needs {k} parameters")));
        }
        fields[1..]
            .iter()
            .map(|f| f.parse::<u64>().map_err(|_| input_err(format!("`{f}` in `{text}` is not a number"))))
            .collect()
    };
    let built = match fields[0] {
        "shifted" => {
            let v = nums(3)?;
            let (c0, c1) = shifted_pair(v[0], v[1])?;
            match v[2] {
                0 => c0,
                1 => c1,
                _ => return Err(input_err("shifted:D:S:W picks W = 0 or 1")),
            }
        }
        "dlp" => {
            let v = nums(4)?;
            let k = u32::try_from(v[3]).map_err(|_| input_err("window exponent too large"))?;
            power_circuit(v[0], v[1], v[2], k)?
        }
        "qr" => {
            let v = nums(2)?;
            square_circuit(v[0], v[1])?
        }
        _ => {
            let path = Path::new(text);
            return ClassicalCircuit::from_truth_table(&read(path)?)
                .map_err(|e| input_err(format!("{text}: {e}")));
        }
    };
    Ok(built)
}

fn szk_sd(ctx: &mut Ctx) -> Result<()> {
    let c0 = parse_circuit(ctx.cfg.circuit0.get_or_insert_with(|| "shifted:10:2:0".into()))?;
    let c1 = parse_circuit(ctx.cfg.circuit1.get_or_insert_with(|| "shifted:10:2:1".into()))?;
    if c0.output_bits() != c1.output_bits() {
        return Err(input_err("circuits must share an output width"));
    }
    let delta = positive("delta", *ctx.cfg.delta.get_or_insert(0.01))?;
    let trials = (*ctx.cfg.instances.get_or_insert(1)).max(1);
    let mut last = None;
    let mut fars = 0;
    let mut series = Series::new(&["trial", "frequency", "far"]);
    for k in 0..trials {
        let mut rng = ctx.rng(&format!("szk-sd/trial-{k}"));
        let d = sd_decider(&c0, &c1, delta, &mut rng)?;
        fars += usize::from(d.far);
        series.push(vec![k as f64, d.frequency, f64::from(u8::from(d.far))]);
        last = Some(d);
    }
    let d = last.expect("at least one trial");
    let out = &mut ctx.out;
    out.scalar("exact_variation", d.exact_variation);
    out.scalar("threshold", d.threshold);
    out.scalar("shots", d.shots as f64);
    out.scalar("frequency", d.frequency);
    out.scalar("far_fraction", fars as f64 / trials as f64);
    if d.promise_violated {
        out.warnings.push(format!("variation {} lies inside the promise gap", d.exact_variation));
    } else {
        let want_far = d.exact_variation >= 0.75;
        let errors = if want_far { trials - fars } else { fars };
        // one trial must be right; a battery may err at rate δ
        let allowed = if trials == 1 { 0 } else { (delta * trials as f64).ceil() as usize };
        out.check(
            "decision_matches_promise",
            errors <= allowed,
            format!("{errors} of {trials} trials decided {} wrongly (allowed {allowed})", if want_far { "far" } else { "close" }),
        );
    }
    out.series.insert("trials".into(), series);
    Ok(())
}

fn szk_dlp(ctx: &mut Ctx) -> Result<()> {
    let p = *ctx.cfg.p.get_or_insert(251);
    let g = match ctx.cfg.g {
        Some(g) => g,
        None => *ctx.cfg.g.insert(find_generator(p).ok_or_else(|| input_err(format!("{p} has no generator")))?),
    };
    let shots = *ctx.cfg.shots.get_or_insert(400);
    let mut rng = ctx.rng("szk-dlp");
    let queries: Vec<u64> = match ctx.cfg.y {
        Some(y) => vec![y],
        None => {
            let count = *ctx.cfg.instances.get_or_insert(50);
            let ((l0, l1), (h0, h1)) = dlp_promise_ranges(p);
            (0..count)
                .map(|_| {
                    let x = if rng.gen() { rng.gen_range(l0..=l1) } else { rng.gen_range(h0..=h1) };
                    mod_pow(g, x, p)
                })
                .collect()
        }
    };
    let ((_, _), (h0, h1)) = dlp_promise_ranges(p);
    let mut mismatches = 0;
    let mut violations = 0;
    let mut series = Series::new(&["y", "referee_log", "frequency", "high"]);
    let mut threshold = f64::NAN;
    for &y in &queries {
        let d = dlp_decider(p, g, y, shots, &mut rng).map_err(|e| input_err(e.to_string()))?;
        threshold = d.threshold;
        if d.promise_violated {
            violations += 1;
        } else if d.high != (h0..=h1).contains(&d.referee_log) {
            mismatches += 1;
        }
        series.push(vec![y as f64, d.referee_log as f64, d.frequency, f64::from(u8::from(d.high))]);
    }
    let out = &mut ctx.out;
    out.scalar("threshold", threshold);
    out.scalar("instances", queries.len() as f64);
    out.scalar("mismatches", mismatches as f64);
    out.scalar("promise_violations", violations as f64);
    if violations > 0 {
        out.warnings.push(format!("{violations} queries lie outside both promise windows"));
    }
    out.check("decisions_match_referee", mismatches == 0, format!("{mismatches} mismatches"));
    out.series.insert("queries".into(), series);
    Ok(())
}

fn szk_qr(ctx: &mut Ctx) -> Result<()> {
    let moduli = ctx.cfg.moduli.get_or_insert_with(|| vec![15, 21, 33]).clone();
    let shots = *ctx.cfg.shots.get_or_insert(1000);
    let mut rng = ctx.rng("szk-qr");
    let mut mismatches = 0;
    let mut checked = 0;
    let mut series = Series::new(&["modulus", "x", "frequency", "residue", "referee"]);
    for &nn in &moduli {
        let xs = match ctx.cfg.x {
            Some(x) => vec![x],
            None => units(nn),
        };
        for x in xs {
            let d = qr_decider(nn, x, shots, &mut rng).map_err(|e| input_err(e.to_string()))?;
            checked += 1;
            mismatches += usize::from(d.residue != d.referee);
            series.push(vec![
                nn as f64,
                x as f64,
                d.frequency,
                f64::from(u8::from(d.residue)),
                f64::from(u8::from(d.referee)),
            ]);
        }
    }
    let out = &mut ctx.out;
    out.scalar("checked", checked as f64);
    out.scalar("mismatches", mismatches as f64);
    out.check("decisions_match_referee", mismatches == 0, format!("{mismatches} of {checked} mismatched"));
    out.series.insert("units".into(), series);
    Ok(())
}
