//! Invariant suites run by `validate` and by the acceptance target.
//!
//! Each suite owns a ChaCha stream derived from the run seed and its own
//! name, so results do not depend on how suites are spread over threads.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{self, EvolveConfig};
use crate::functionals;
use crate::grid::{norm_sq, Field, Grid};
use crate::ground_state::{self, GroundState, OmegaMode, SolverOptions};
use crate::initial::gaussian;
use crate::model::Model;
use crate::potentials::{self, PotentialSpec};
use crate::threshold::{self, s_c, ThresholdInputs};

pub const SUITE_NAMES: &[&str] = &["pohozaev", "sharp_constant", "threshold_algebra", "kato", "conservation", "virial"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteSettings {
    /// Points per axis for the ground-state and conservation runs.
    pub n: usize,
    pub trials: usize,
    pub kato_pairs: usize,
    pub threshold_tuples: usize,
    pub seed: u64,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings { n: 64, trials: 100, kato_pairs: 50, threshold_tuples: 50, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub rows: Vec<CheckRow>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, check: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.check == check)
    }

    fn push(&mut self, check: &str, value: f64, tolerance: f64, pass: bool, detail: impl Into<String>) {
        self.rows.push(CheckRow {
            suite: self.name.clone(),
            check: check.into(),
            value,
            tolerance,
            pass,
            detail: detail.into(),
        });
    }

    /// Passes when `value <= tolerance` (NaN fails).
    fn at_most(&mut self, check: &str, value: f64, tolerance: f64, detail: impl Into<String>) {
        self.push(check, value, tolerance, value <= tolerance, detail);
    }
}

fn rng_for(seed: u64, suite: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in suite.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Lazily solved `V = 0`, `gamma = 2.5`, `omega = 1` ground state on an
/// `n^3` grid over `[-8, 8)^3`, shared by the suites that need it.
pub struct SuiteContext {
    settings: SuiteSettings,
    reference: OnceLock<std::result::Result<(Model, GroundState), String>>,
}

pub const SUITE_GAMMA: f64 = 2.5;
pub const SUITE_HALF_LEN: f64 = 8.0;

impl SuiteContext {
    pub fn new(settings: SuiteSettings) -> Self {
        SuiteContext { settings, reference: OnceLock::new() }
    }

    pub fn settings(&self) -> &SuiteSettings {
        &self.settings
    }

    pub fn reference(&self) -> Result<&(Model, GroundState)> {
        self.reference
            .get_or_init(|| {
                let solve = || -> Result<(Model, GroundState)> {
                    let grid = Grid::new(3, self.settings.n, SUITE_HALF_LEN)?;
                    let model = Model::new(grid, SUITE_GAMMA, PotentialSpec::Zero)?;
                    let gs = ground_state::solve_ground_state(
                        &model,
                        OmegaMode::Fixed { omega: 1.0 },
                        &SolverOptions::default(),
                    )?;
                    Ok((model, gs))
                };
                solve().map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Solver(e.clone()))
    }
}

pub fn run_suite(name: &str, ctx: &SuiteContext) -> Result<SuiteReport> {
    let report = match name {
        "pohozaev" => pohozaev(ctx),
        "sharp_constant" => sharp_constant(ctx),
        "threshold_algebra" => threshold_algebra(ctx),
        "kato" => kato(ctx),
        "conservation" => conservation(ctx),
        "virial" => virial(ctx),
        other => return Err(Error::Config(vec![format!("unknown suite `{other}`")])),
    };
    report.map_err(|e| e.in_phase("validate"))
}

/// Runs `names` (all suites when empty) on up to `threads` worker threads.
/// Reports come back in [`SUITE_NAMES`] order.
pub fn run_suites(names: &[String], settings: SuiteSettings, threads: usize) -> Result<Vec<SuiteReport>> {
    let selected: Vec<&str> = SUITE_NAMES
        .iter()
        .copied()
        .filter(|s| names.is_empty() || names.iter().any(|n| n == s))
        .collect();
    let ctx = SuiteContext::new(settings);
    let threads = threads.max(1);
    if threads == 1 {
        return selected.iter().map(|s| run_suite(s, &ctx)).collect();
    }
    let mut slots: Vec<Option<Result<SuiteReport>>> = (0..selected.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> =
            (0..threads).map(|t| (0..selected.len()).filter(|i| i % threads == t).collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                let ctx = &ctx;
                let selected = &selected;
                scope.spawn(move || idx.into_iter().map(|i| (i, run_suite(selected[i], ctx))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("suite thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every suite ran")).collect()
}

fn pohozaev(ctx: &SuiteContext) -> Result<SuiteReport> {
    let mut r = SuiteReport { name: "pohozaev".into(), rows: Vec::new() };
    let (_, gs) = ctx.reference()?;
    let s = &gs.snapshot;
    let g = SUITE_GAMMA;
    r.push(
        "converged",
        gs.fixed_point_residual,
        SolverOptions::default().accept_tol,
        gs.converged,
        format!("{} iterations", gs.iterations),
    );
    let hv_expected = g / (4.0 - g);
    let p_expected = 4.0 / (4.0 - g);
    let hv_rel = (s.hv_sq / s.mass - hv_expected).abs() / hv_expected;
    let p_rel = (s.p_value / s.mass - p_expected).abs() / p_expected;
    r.at_most("kinetic_over_mass", hv_rel, 1e-4, format!("hv/M = {:.10} vs {hv_expected:.10}", s.hv_sq / s.mass));
    r.at_most("interaction_over_mass", p_rel, 1e-4, format!("P/M = {:.10} vs {p_expected:.10}", s.p_value / s.mass));
    // With V = 0, E = (gamma - 2) P / 8, i.e. P = 16 E at gamma = 2.5.
    let factor = 8.0 / (g - 2.0);
    let pe_rel = (s.p_value - factor * s.energy).abs() / s.p_value;
    r.at_most(
        "interaction_energy_ratio",
        pe_rel,
        1e-4,
        format!("P = {:.10}, {factor} E = {:.10}", s.p_value, factor * s.energy),
    );
    Ok(r)
}

/// A smooth random trial: either the profile plus a random Gaussian
/// perturbation, or a random mixture of up to three complex Gaussians.
fn random_trial(rng: &mut ChaCha8Rng, q: &Field, perturb: bool) -> Field {
    let grid = *q.grid();
    let bump = |rng: &mut ChaCha8Rng| {
        let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
        let w: f64 = rng.gen_range(0.5..2.5);
        let a = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let chirp: f64 = rng.gen_range(-0.2..0.2);
        (c, w, a, chirp)
    };
    let count = if perturb { 1 } else { rng.gen_range(1..=3) };
    let terms: Vec<_> = (0..count).map(|_| bump(rng)).collect();
    let eps: f64 = if perturb { rng.gen_range(-0.3..0.3) } else { 1.0 };
    let mix = Field::from_fn(grid, |x| {
        let mut v = Complex64::new(0.0, 0.0);
        for (c, w, a, chirp) in &terms {
            let d2: f64 = x.iter().zip(c).map(|(p, q)| (p - q) * (p - q)).sum();
            v += a * Complex64::from_polar((-d2 / (2.0 * w * w)).exp(), chirp * d2);
        }
        v * eps
    });
    if !perturb {
        return mix;
    }
    let values = q.values().iter().zip(mix.values()).map(|(a, b)| a + b).collect();
    Field::from_values(grid, values).expect("same grid")
}

fn sharp_constant(ctx: &SuiteContext) -> Result<SuiteReport> {
    let mut r = SuiteReport { name: "sharp_constant".into(), rows: Vec::new() };
    let (model, gs) = ctx.reference()?;
    let q = gs.profile();
    let w0 = functionals::weinstein(model, q)?;
    let mut rng = rng_for(ctx.settings.seed, "sharp_constant");
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for k in 0..ctx.settings.trials {
        let trial = random_trial(&mut rng, q, k % 2 == 0);
        let w = functionals::weinstein(model, &trial)?;
        let excess = (w - w0) / w0;
        if excess > 1e-6 {
            violations += 1;
        }
        worst = worst.max(excess);
    }
    r.at_most(
        "weinstein_maximal",
        worst,
        1e-6,
        format!("{} trials, {violations} above W(Q) = {w0:.10}", ctx.settings.trials),
    );
    let closed = ground_state::closed_form_c_q(gs.snapshot.mass, gs.omega, SUITE_GAMMA);
    let rel = (closed - gs.c_q).abs() / gs.c_q;
    r.at_most("closed_form_constant", rel, 1e-4, format!("C_Q = {:.10}, closed form {closed:.10}", gs.c_q));
    Ok(r)
}

fn random_threshold_inputs(rng: &mut ChaCha8Rng) -> ThresholdInputs {
    let g = rng.gen_range(2.1..3.9);
    let m = rng.gen_range(0.3..5.0);
    let c = rng.gen_range(0.3..3.0);
    let me: f64 = rng.gen_range(0.3..3.0);
    let s = s_c(g);
    let e = (me * ground_state::threshold_product(c, g) / f64::powf(m, 1.0 - s)).powf(1.0 / s);
    ThresholdInputs::new(e, m, c, g).expect("sampled inside the domain")
}

fn threshold_algebra(ctx: &SuiteContext) -> Result<SuiteReport> {
    let mut r = SuiteReport { name: "threshold_algebra".into(), rows: Vec::new() };
    let mut rng = rng_for(ctx.settings.seed, "threshold_algebra");
    let (mut slope, mut value, mut exact, mut printed) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..ctx.settings.threshold_tuples {
        let p = random_threshold_inputs(&mut rng);
        let x0 = threshold::x0_solve(&p)?;
        let slope_scale = 1.0 / (4.0 * (p.gamma - 2.0));
        slope = slope.max(threshold::f_prime(x0, &p)?.abs() / slope_scale);
        let fx = threshold::f_eval(x0, &p)?;
        value = value.max((fx - x0 / 8.0).abs() / (x0.abs() / 8.0).max(p.energy));
        let (e, pr) = threshold::threshold_identity_residuals(&p)?;
        exact = exact.max(e.abs());
        printed = printed.max(pr.abs());
    }
    let n = ctx.settings.threshold_tuples;
    r.at_most("critical_point", slope, 1e-10, format!("max |f'(x0)| relative over {n} tuples"));
    r.at_most("critical_value", value, 1e-10, format!("max |f(x0) - x0/8| relative over {n} tuples"));
    r.at_most(
        "threshold_identity",
        printed,
        1e-10,
        format!("max |ME (1 - x0/16E) - 1| over {n} tuples"),
    );
    r.at_most(
        "threshold_identity_power_form",
        exact,
        1e-10,
        format!("max |ME (1 - x0/16E)^s - 1| over {n} tuples"),
    );
    Ok(r)
}

fn random_potential(rng: &mut ChaCha8Rng) -> PotentialSpec {
    let a = rng.gen_range(-1.5..1.5);
    match rng.gen_range(0..3) {
        0 => PotentialSpec::GaussianBump { a, sigma: rng.gen_range(0.5..2.0) },
        1 => PotentialSpec::InversePoly { a, k: rng.gen_range(1.5..3.0) },
        _ => PotentialSpec::SmoothCompactBump { a, radius: rng.gen_range(1.0..3.0) },
    }
}

fn kato(ctx: &SuiteContext) -> Result<SuiteReport> {
    let mut r = SuiteReport { name: "kato".into(), rows: Vec::new() };
    let ball_grid = Grid::new(3, 64, 4.0)?;
    let mut worst_ball = 0.0f64;
    let mut detail = Vec::new();
    for (a, radius) in [(1.0, 1.0), (-3.0, 1.0), (2.0, 1.5)] {
        let k = potentials::kato_norm(&PotentialSpec::BallIndicator { a, radius }, &ball_grid)?;
        let exact = f64::abs(a) * radius * radius / 2.0;
        worst_ball = worst_ball.max((k - exact).abs() / exact);
        detail.push(format!("a={a} R={radius}: {k:.5} vs {exact:.5}"));
    }
    r.at_most("ball_indicator", worst_ball, 1e-2, detail.join("; "));

    let grid = Grid::new(3, 32, 8.0)?;
    let mut rng = rng_for(ctx.settings.seed, "kato");
    let (mut lower, mut upper, mut bound) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..ctx.settings.kato_pairs {
        let spec = random_potential(&mut rng);
        let v = spec.eval_v(&grid)?;
        let k_all = potentials::kato_norm_of_samples(&v)?;
        let k_neg = potentials::kato_norm_of_samples(&v.map(|x| x.min(0.0)))?;
        let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let w: f64 = rng.gen_range(0.6..2.0);
        let chirp: f64 = rng.gen_range(-0.3..0.3);
        let u = Field::from_fn(grid, |x| {
            let d2: f64 = x.iter().zip(&c).map(|(p, q)| (p - q) * (p - q)).sum();
            Complex64::from_polar((-d2 / (2.0 * w * w)).exp(), chirp * d2)
        });
        let grad = crate::spectral::SpectralOps::new(grid).grad_norm_sq(&u);
        let vu = functionals::weighted_density_integral(&v, &u);
        let abs_vu = functionals::weighted_density_integral(&v.map(f64::abs), &u);
        let hv = grad + vu;
        lower = lower.max(((1.0 - k_neg) * grad - hv) / grad);
        upper = upper.max((hv - (1.0 + k_all) * grad) / grad);
        bound = bound.max((abs_vu - k_all * grad) / grad);
    }
    let n = ctx.settings.kato_pairs;
    r.at_most("sandwich_lower", lower, 1e-2, format!("max ((1 - K(V-)) |grad u|^2 - hv) / |grad u|^2 over {n} pairs"));
    r.at_most("sandwich_upper", upper, 1e-2, format!("max (hv - (1 + K(V)) |grad u|^2) / |grad u|^2 over {n} pairs"));
    r.at_most("kato_inequality", bound, 1e-2, format!("max (int |V||u|^2 - K(V) |grad u|^2) / |grad u|^2 over {n} pairs"));
    Ok(r)
}

/// The smooth `V != 0` run shared by the conservation and virial suites.
fn smooth_model(n: usize) -> Result<(Model, Field)> {
    let grid = Grid::new(3, n, SUITE_HALF_LEN)?;
    let model = Model::new(grid, SUITE_GAMMA, PotentialSpec::GaussianBump { a: 0.5, sigma: 1.5 })?;
    let u0 = gaussian(grid, 0.35, 1.0, 0.0);
    Ok((model, u0))
}

pub const ENERGY_LADDER: [f64; 4] = [0.01, 0.005, 0.0025, 0.00125];

fn conservation(ctx: &SuiteContext) -> Result<SuiteReport> {
    let mut r = SuiteReport { name: "conservation".into(), rows: Vec::new() };
    let (model, u0) = smooth_model(ctx.settings.n)?;
    let cfg = EvolveConfig { dt0: 0.005, t_max: 1.0, adaptive: false, record_stride: 10, ..Default::default() };
    let rec = evolve::evolve(&model, &u0, &cfg)?;
    let drift = rec.max_mass_drift() / cfg.t_max;
    r.at_most("mass_drift_per_time", drift, 1e-10, format!("{} steps of {}", rec.accepted_steps, cfg.dt0));

    let e0 = functionals::energy(&model, &u0)?;
    let t = 0.4;
    let drifts: Vec<f64> = ENERGY_LADDER
        .iter()
        .map(|&dt| {
            let steps = (t / dt).round() as usize;
            let u = evolve::propagate_fixed(&model, &u0, dt, steps)?;
            Ok((functionals::energy(&model, &u)? - e0).abs())
        })
        .collect::<Result<_>>()?;
    let orders: Vec<f64> = drifts.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let worst = orders.iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
    r.push(
        "energy_order",
        worst,
        0.2,
        orders.iter().all(|o| (1.8..=2.2).contains(o)),
        format!("orders {orders:.3?} from drifts {:?} at dt {ENERGY_LADDER:?}", drifts.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()),
    );
    Ok(r)
}

fn virial(ctx: &SuiteContext) -> Result<SuiteReport> {
    let mut r = SuiteReport { name: "virial".into(), rows: Vec::new() };
    // Every step is recorded, so this run uses a coarser grid.
    let (model, u0) = smooth_model(32)?;
    let u0 = u0.with_phase(|x| 0.05 * norm_sq(&x));
    let cfg = EvolveConfig { dt0: 1e-3, t_max: 0.5, adaptive: false, record_stride: 1, ..Default::default() };
    let rec = evolve::evolve(&model, &u0, &cfg)?;
    let vc = evolve::virial_consistency(&rec)?;
    r.at_most("first_derivative", vc.first, 1e-4, format!("{} snapshots at dt {}", rec.snapshots.len(), cfg.dt0));
    r.at_most("second_derivative", vc.second, 1e-3, format!("{} snapshots at dt {}", rec.snapshots.len(), cfg.dt0));

    let (model, gs) = ctx.reference()?;
    let q = gs.profile();
    let g = gaussian(*model.grid(), 0.5, 1.3, 0.0);
    let mut worst = f64::INFINITY;
    for k in 0..=20 {
        let lambda = -0.5 + 0.05 * k as f64;
        for base in [q, &g] {
            let u = base.with_phase(|x| lambda * norm_sq(&x));
            let s = functionals::snapshot(model, &u, 0.0)?;
            let gap = functionals::cauchy_schwarz_gap_of(&s, model.gamma(), gs.c_q);
            worst = worst.min(gap / (s.variance_i * s.hv_sq));
        }
    }
    r.push(
        "cauchy_schwarz_gap",
        worst,
        -1e-8,
        worst >= -1e-8,
        "min gap / (I hv) over chirps -0.5..0.5 of Q and a Gaussian",
    );
    Ok(r)
}
