//! Run orchestration: one directory of artifacts per run.
//!
//! | mode | artifacts |
//! |------|-----------|
//! | groundstate | `ground_state.bin`, `ground_state.json` |
//! | classify | `reference.json`, `classification.json` |
//! | evolve | `trajectory.csv`, `evolution.json` |
//! | pipeline | all of the above plus `comparison.csv`, `comparison.json` |
//! | validate | `validate.csv`, `validate.json` |
//!
//! Every directory also holds `resolved_config.json` and `manifest.json`.
//! No artifact records wall-clock time, so reruns with the same
//! configuration, seed and thread count are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::evolve::{self, EvolveConfig, MonotonicityReport, Termination, TrajectoryRecord, VirialConsistency};
use crate::grid::Field;
use crate::ground_state::{self, GroundState, OmegaMode};
use crate::initial::build_initial;
use crate::io::{self, write_json};
use crate::model::Model;
use crate::potentials::{self, PotentialSpec};
use crate::suites::{self, SuiteReport, SuiteSettings};
use crate::threshold::{self, Branch, DichotomyReport, Reference, Verdict};

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Overrides `out` from the configuration.
    pub out: Option<PathBuf>,
    pub threads: usize,
    /// Overrides `seed` from the configuration.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out: None, threads: 1, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Consistent,
    Inconsistent,
    Indeterminate,
}

/// Verdict against observed dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub verdict: String,
    pub termination: String,
    pub end_time: f64,
    pub final_grad_ratio: f64,
    /// Largest `M^{1-s} P^{s}` along the run over the ground-state value.
    pub max_product_ratio: f64,
    pub product_below_reference: bool,
    pub z_second_negative_fraction: Option<f64>,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub snapshots: usize,
    pub max_mass_drift: f64,
    pub final_grad_ratio: f64,
    pub virial_consistency: Option<VirialConsistency>,
    pub monotonicity: MonotonicityReport,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub mode: Mode,
    pub dir: PathBuf,
    pub ground_state: Option<GroundState>,
    pub reference: Option<Reference>,
    pub classification: Option<DichotomyReport>,
    pub record: Option<TrajectoryRecord>,
    pub comparison: Option<Comparison>,
    pub suites: Vec<SuiteReport>,
}

impl RunOutcome {
    fn new(mode: Mode, dir: PathBuf) -> Self {
        RunOutcome {
            mode,
            dir,
            ground_state: None,
            reference: None,
            classification: None,
            record: None,
            comparison: None,
            suites: Vec::new(),
        }
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> Vec<String> {
        let mut out = vec![format!("mode {} -> {}", self.mode.name(), self.dir.display())];
        if let Some(gs) = &self.ground_state {
            out.push(format!(
                "ground state: omega {:.8}, mass {:.8}, C_Q {:.8}, residual {:.2e}, {} iterations",
                gs.omega, gs.snapshot.mass, gs.c_q, gs.fixed_point_residual, gs.iterations
            ));
        }
        if let Some(c) = &self.classification {
            out.push(format!(
                "verdict {}: ME {}, virial condition lhs {:.6}, product {:.6} vs {:.6}",
                c.verdict.label(),
                c.me.map_or("undefined".into(), |m| format!("{m:.6}")),
                c.virial_condition.lhs,
                c.mp_value,
                c.mp_reference
            ));
        }
        if let Some(r) = &self.record {
            out.push(format!(
                "evolution: {} at t = {:.6} after {} steps",
                r.termination.label(),
                r.termination.time(),
                r.accepted_steps
            ));
        }
        if let Some(c) = &self.comparison {
            out.push(format!("comparison: {:?}", c.agreement).to_lowercase());
        }
        for s in &self.suites {
            for r in &s.rows {
                out.push(format!(
                    "{:<5} {:<18} {:<30} {:>12.4e} (tol {:.1e})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.suite,
                    r.check,
                    r.value,
                    r.tolerance
                ));
            }
        }
        out
    }
}

/// Removes the artifacts of a previous run so the new manifest covers
/// exactly what this run wrote. Refuses to touch unrelated files.
fn prepare_dir(dir: &Path) -> Result<()> {
    if !dir.exists() {
        fs::create_dir_all(dir)?;
        return Ok(());
    }
    if fs::read_dir(dir)?.next().is_none() {
        return Ok(());
    }
    let manifest = dir.join(io::MANIFEST_NAME);
    if !manifest.is_file() {
        return Err(Error::Config(vec![format!(
            "output directory {} is not empty and holds no manifest; refusing to overwrite",
            dir.display()
        )]));
    }
    let m: io::Manifest = serde_json::from_str(&fs::read_to_string(&manifest)?)?;
    for e in &m.files {
        let p = dir.join(&e.path);
        if p.is_file() {
            fs::remove_file(p)?;
        }
    }
    fs::remove_file(manifest)?;
    let plot = dir.join(io::PLOT_DIR);
    if plot.is_dir() && fs::read_dir(&plot)?.next().is_none() {
        fs::remove_dir(plot)?;
    }
    Ok(())
}

pub fn input_hash(cfg: &RunConfig, threads: usize) -> Result<String> {
    let mut text = serde_json::to_string(cfg)?;
    text.push_str(&format!("|threads={threads}"));
    Ok(io::sha256_hex(text.as_bytes()))
}

fn out_dir(cfg: &RunConfig, opts: &RunOptions) -> PathBuf {
    opts.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("runs").join(cfg.mode.name()))
}

/// Executes the configured mode and writes its artifacts.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let dir = out_dir(&cfg, opts);
    prepare_dir(&dir)?;
    write_json(&dir.join("resolved_config.json"), &cfg)?;
    let mut outcome = RunOutcome::new(cfg.mode, dir.clone());
    match cfg.mode {
        Mode::Groundstate => run_groundstate(&cfg, &dir, &mut outcome)?,
        Mode::Classify => {
            run_classify(&cfg, &dir, &mut outcome)?;
        }
        Mode::Evolve => run_evolve(&cfg, &dir, &mut outcome)?,
        Mode::Pipeline => run_pipeline(&cfg, &dir, &mut outcome)?,
        Mode::Validate => run_validate(&cfg, opts.threads, &dir, &mut outcome)?,
    }
    io::write_manifest(&dir, &input_hash(&cfg, opts.threads)?)?;
    Ok(outcome)
}

fn build_model(cfg: &RunConfig) -> Result<Model> {
    Model::new(cfg.grid()?, cfg.gamma, cfg.potential.clone()).map_err(|e| e.in_phase("setup"))
}

#[derive(Serialize)]
struct GroundStateArtifact<'a> {
    ground_state: &'a GroundState,
    threshold_product: f64,
    mass_energy_product: f64,
    mass_interaction_product: f64,
    radial_deviation: f64,
    admissibility: &'a potentials::AdmissibilityReport,
}

fn write_ground_state(dir: &Path, stem: &str, model: &Model, gs: &GroundState) -> Result<()> {
    io::write_ground_state_dump(&dir.join(format!("{stem}.bin")), gs.profile(), model.gamma(), gs.omega, model.potential())?;
    let admissibility = potentials::check_admissible(model.potential(), model.grid())?;
    let s = threshold::s_c(model.gamma());
    let artifact = GroundStateArtifact {
        ground_state: gs,
        threshold_product: ground_state::threshold_product(gs.c_q, model.gamma()),
        mass_energy_product: gs.snapshot.mass.powf(1.0 - s) * gs.snapshot.energy.powf(s),
        mass_interaction_product: gs.mass_interaction_product(model.gamma()),
        radial_deviation: ground_state::radial_deviation(gs.profile()),
        admissibility: &admissibility,
    };
    write_json(&dir.join(format!("{stem}.json")), &artifact)
}

fn run_groundstate(cfg: &RunConfig, dir: &Path, outcome: &mut RunOutcome) -> Result<()> {
    let model = build_model(cfg)?;
    let gs = ground_state::solve_ground_state(&model, cfg.ground_state.omega_mode(), &cfg.ground_state.solver)
        .and_then(GroundState::require_converged)
        .map_err(|e| e.in_phase("ground_state"))?;
    write_ground_state(dir, "ground_state", &model, &gs)?;
    outcome.ground_state = Some(gs);
    Ok(())
}

/// The ground state normalizing the threshold: the potential-free profile
/// at unit frequency when `V_- = 0`, otherwise the self-consistent profile
/// for the run's potential.
fn reference_ground_state(cfg: &RunConfig, model: &Model) -> Result<(Branch, GroundState)> {
    let branch = Branch::for_model(model);
    let gs = match branch {
        Branch::Free => {
            let free = model.with_potential(PotentialSpec::Zero)?;
            ground_state::solve_ground_state(&free, OmegaMode::Fixed { omega: 1.0 }, &cfg.ground_state.solver)
        }
        Branch::Potential => ground_state::solve_ground_state(
            model,
            OmegaMode::SelfConsistent { initial: cfg.ground_state.omega },
            &cfg.ground_state.solver,
        ),
    }
    .and_then(GroundState::require_converged)
    .map_err(|e| e.in_phase("ground_state"))?;
    Ok((branch, gs))
}

struct Prepared {
    model: Model,
    reference: Reference,
    u0: Field,
}

fn prepare(cfg: &RunConfig, dir: &Path, outcome: &mut RunOutcome) -> Result<Prepared> {
    let model = build_model(cfg)?;
    let spec = cfg.initial.as_ref().ok_or_else(|| Error::Config(vec!["missing [initial]".into()]))?;
    let (branch, gs) = reference_ground_state(cfg, &model)?;
    let reference = Reference::from_ground_state(&gs, branch, model.gamma());
    let ref_model = if branch == Branch::Free { model.with_potential(PotentialSpec::Zero)? } else { model.clone() };
    write_ground_state(dir, "reference", &ref_model, &gs)?;
    let u0 = build_initial(&model, spec, Some(gs.profile())).map_err(|e| e.in_phase("initial"))?;
    outcome.ground_state = Some(gs);
    outcome.reference = Some(reference);
    Ok(Prepared { model, reference, u0 })
}

fn run_classify(cfg: &RunConfig, dir: &Path, outcome: &mut RunOutcome) -> Result<Prepared> {
    let p = prepare(cfg, dir, outcome)?;
    let report = threshold::classify(&p.model, &p.u0, &p.reference).map_err(|e| e.in_phase("classify"))?;
    write_json(&dir.join("classification.json"), &report)?;
    outcome.classification = Some(report);
    Ok(p)
}

fn evolve_and_write(
    model: &Model,
    u0: &Field,
    ecfg: &EvolveConfig,
    f_x0: Option<f64>,
    dir: &Path,
) -> Result<TrajectoryRecord> {
    let record = evolve::evolve(model, u0, ecfg).map_err(|e| e.in_phase("evolve"))?;
    io::write_trajectory_csv(&dir.join(io::TRAJECTORY_NAME), &record, model.gamma())?;
    let summary = EvolutionSummary {
        termination: record.termination,
        accepted_steps: record.accepted_steps,
        rejected_steps: record.rejected_steps,
        snapshots: record.snapshots.len(),
        max_mass_drift: record.max_mass_drift(),
        final_grad_ratio: record.grad_ratios().last().copied().unwrap_or(1.0),
        virial_consistency: evolve::virial_consistency(&record).ok(),
        monotonicity: evolve::monotonicity_probe(&record, f_x0),
    };
    write_json(&dir.join("evolution.json"), &summary)?;
    Ok(record)
}

fn run_evolve(cfg: &RunConfig, dir: &Path, outcome: &mut RunOutcome) -> Result<()> {
    let model = build_model(cfg)?;
    let spec = cfg.initial.as_ref().ok_or_else(|| Error::Config(vec!["missing [initial]".into()]))?;
    let reference = if spec.needs_ground_state() {
        let (_, gs) = reference_ground_state(cfg, &model)?;
        let q = gs.profile().clone();
        outcome.ground_state = Some(gs);
        Some(q)
    } else {
        None
    };
    let u0 = build_initial(&model, spec, reference.as_ref()).map_err(|e| e.in_phase("initial"))?;
    let ecfg = cfg.evolve.as_ref().ok_or_else(|| Error::Config(vec!["missing [evolve]".into()]))?;
    outcome.record = Some(evolve_and_write(&model, &u0, ecfg, None, dir)?);
    Ok(())
}

/// Matches the verdict with the run: blow-up verdicts need a detected
/// blow-up; a global verdict needs a completed run with the monitored
/// product strictly below the ground-state value throughout.
pub fn compare(report: &DichotomyReport, record: &TrajectoryRecord, gamma: f64) -> Comparison {
    let ratios: Vec<f64> =
        record.snapshots.iter().map(|s| s.mass_interaction_product(gamma) / report.mp_reference).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let below = ratios.iter().all(|r| *r < 1.0);
    let mono = evolve::monotonicity_probe(record, report.f_x0);
    let agreement = match (&report.verdict, &record.termination) {
        (Verdict::Indeterminate { .. }, _) | (_, Termination::ResolutionExhausted { .. }) => Agreement::Indeterminate,
        (Verdict::BlowUp | Verdict::BlowUpByConvexity, Termination::BlowupDetected { .. }) => Agreement::Consistent,
        (Verdict::Global, Termination::Completed { .. }) if below => Agreement::Consistent,
        _ => Agreement::Inconsistent,
    };
    Comparison {
        verdict: report.verdict.label().into(),
        termination: record.termination.label().into(),
        end_time: record.termination.time(),
        final_grad_ratio: record.grad_ratios().last().copied().unwrap_or(1.0),
        max_product_ratio: max_ratio,
        product_below_reference: below,
        z_second_negative_fraction: mono.z_second_negative_fraction,
        agreement,
    }
}

fn run_pipeline(cfg: &RunConfig, dir: &Path, outcome: &mut RunOutcome) -> Result<()> {
    let p = run_classify(cfg, dir, outcome)?;
    let report = outcome.classification.as_ref().expect("classified");
    let ecfg = cfg.evolve.as_ref().ok_or_else(|| Error::Config(vec!["missing [evolve]".into()]))?;
    let record = evolve_and_write(&p.model, &p.u0, ecfg, report.f_x0, dir)?;
    let cmp = compare(report, &record, p.model.gamma());
    let agreement = serde_json::to_value(&cmp.agreement)?;
    let csv = format!(
        "verdict,termination,end_time,final_grad_ratio,max_product_ratio,z_second_negative_fraction,agreement\n{},{},{:e},{:e},{:e},{},{}\n",
        cmp.verdict,
        cmp.termination,
        cmp.end_time,
        cmp.final_grad_ratio,
        cmp.max_product_ratio,
        cmp.z_second_negative_fraction.map_or(String::new(), |f| format!("{f:e}")),
        agreement.as_str().expect("string enum")
    );
    fs::write(dir.join("comparison.csv"), csv)?;
    write_json(&dir.join("comparison.json"), &cmp)?;
    outcome.record = Some(record);
    outcome.comparison = Some(cmp);
    Ok(())
}

fn run_validate(cfg: &RunConfig, threads: usize, dir: &Path, outcome: &mut RunOutcome) -> Result<()> {
    let settings = SuiteSettings {
        n: cfg.grid.n,
        trials: cfg.validate.trials,
        kato_pairs: cfg.validate.kato_pairs,
        threshold_tuples: cfg.validate.threshold_tuples,
        seed: cfg.seed,
    };
    let reports = suites::run_suites(&cfg.validate.suites, settings, threads)?;
    let mut csv = String::from("suite,check,pass,value,tolerance,detail\n");
    for r in reports.iter().flat_map(|s| &s.rows) {
        csv.push_str(&format!(
            "{},{},{},{:e},{:e},\"{}\"\n",
            r.suite,
            r.check,
            if r.pass { "pass" } else { "fail" },
            r.value,
            r.tolerance,
            r.detail.replace('"', "'")
        ));
    }
    fs::write(dir.join("validate.csv"), csv)?;
    write_json(&dir.join("validate.json"), &reports)?;
    outcome.suites = reports;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    #[test]
    fn refuses_to_clobber_foreign_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("notes.txt"), "mine").unwrap();
        let cfg = parse_config_str("mode = \"validate\"\n[validate]\nsuites = [\"threshold_algebra\"]\n").unwrap();
        let opts = RunOptions { out: Some(dir.path().to_path_buf()), ..Default::default() };
        assert!(run(&cfg, &opts).is_err());
        assert_eq!(fs::read_to_string(dir.path().join("notes.txt")).unwrap(), "mine");
    }

    #[test]
    fn rerun_replaces_previous_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config_str("mode = \"validate\"\n[validate]\nsuites = [\"threshold_algebra\"]\n").unwrap();
        let opts = RunOptions { out: Some(dir.path().join("run")), ..Default::default() };
        run(&cfg, &opts).unwrap();
        let first = fs::read(dir.path().join("run/manifest.json")).unwrap();
        run(&cfg, &opts).unwrap();
        assert_eq!(first, fs::read(dir.path().join("run/manifest.json")).unwrap());
        assert!(io::verify_manifest(&dir.path().join("run")).unwrap().is_empty());
    }

    #[test]
    fn seed_override_changes_the_input_hash() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config_str("mode = \"validate\"\nseed = 1\n[validate]\nsuites = [\"threshold_algebra\"]\n").unwrap();
        let a = RunOptions { out: Some(dir.path().join("a")), ..Default::default() };
        let b = RunOptions { out: Some(dir.path().join("b")), seed: Some(2), ..Default::default() };
        run(&cfg, &a).unwrap();
        run(&cfg, &b).unwrap();
        let read = |p: &str| serde_json::from_str::<io::Manifest>(&fs::read_to_string(dir.path().join(p)).unwrap()).unwrap();
        assert_ne!(read("a/manifest.json").input_hash, read("b/manifest.json").input_hash);
    }
}
