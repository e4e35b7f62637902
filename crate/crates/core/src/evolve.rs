//! Time integration by Strang splitting:
//! half kinetic step, exact phase step `u <- u exp(i dt (-V + |x|^{-gamma} * |u|^2))`,
//! half kinetic step. Both sub-flows are unitary.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, FunctionalSnapshot};
use crate::grid::Field;
use crate::model::Model;

/// Fraction of the spectrum (by radius) watched for resolution loss.
pub const TAIL_BAND: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub dt0: f64,
    pub t_max: f64,
    /// Relative L2 step-doubling error allowed per step.
    pub tol_step: f64,
    pub blowup_grad_factor: f64,
    pub blowup_tail_frac: f64,
    pub record_stride: usize,
    /// Fixed steps of `dt0` when false.
    pub adaptive: bool,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt0: 1e-2,
            t_max: 1.0,
            tol_step: 1e-6,
            blowup_grad_factor: 20.0,
            blowup_tail_frac: 0.1,
            record_stride: 1,
            adaptive: true,
            dt_min: 1e-12,
            dt_max: 0.1,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            bad.push(format!("dt0 = {} must be positive", self.dt0));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            bad.push(format!("t_max = {} must be positive", self.t_max));
        }
        if !(self.tol_step > 0.0) {
            bad.push(format!("tol_step = {} must be positive", self.tol_step));
        }
        if !(self.blowup_grad_factor > 1.0) {
            bad.push(format!("blowup_grad_factor = {} must exceed 1", self.blowup_grad_factor));
        }
        if !(self.blowup_tail_frac > 0.0 && self.blowup_tail_frac <= 1.0) {
            bad.push(format!("blowup_tail_frac = {} must lie in (0, 1]", self.blowup_tail_frac));
        }
        if self.record_stride == 0 {
            bad.push("record_stride must be at least 1".into());
        }
        if !(self.dt_min > 0.0 && self.dt_max >= self.dt_min) {
            bad.push(format!("need 0 < dt_min <= dt_max (got {} and {})", self.dt_min, self.dt_max));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed { t: f64 },
    BlowupDetected { t: f64, grad_ratio: f64, tail_fraction: f64 },
    ResolutionExhausted { t: f64, dt: f64 },
}

impl Termination {
    pub fn time(&self) -> f64 {
        match *self {
            Termination::Completed { t } | Termination::BlowupDetected { t, .. } | Termination::ResolutionExhausted { t, .. } => t,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed { .. } => "completed",
            Termination::BlowupDetected { .. } => "blowup_detected",
            Termination::ResolutionExhausted { .. } => "resolution_exhausted",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub config: EvolveConfig,
    pub snapshots: Vec<FunctionalSnapshot>,
    /// `sqrt(I)`; the stored variance is `z * z`.
    pub z_series: Vec<f64>,
    /// Spectral tail fraction at each snapshot.
    pub tail_series: Vec<f64>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    #[serde(skip)]
    pub final_field: Option<Field>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// `||grad u(t)|| / ||grad u(0)||` at each snapshot.
    pub fn grad_ratios(&self) -> Vec<f64> {
        let g0 = self.snapshots.first().map_or(1.0, |s| s.grad_sq);
        self.snapshots.iter().map(|s| (s.grad_sq / g0).sqrt()).collect()
    }

    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.snapshots[0].mass;
        self.snapshots.iter().map(|s| (s.mass - m0).abs() / m0).fold(0.0, f64::max)
    }
}

/// Split-step propagator with cached kinetic multipliers.
pub struct Propagator<'a> {
    model: &'a Model,
    cache: RefCell<Vec<(u64, Vec<Complex64>)>>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a Model) -> Self {
        Propagator { model, cache: RefCell::new(Vec::new()) }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Applies `exp(-i |xi|^2 tau)` in place.
    fn kinetic(&self, data: &mut [Complex64], tau: f64) {
        let ops = self.model.ops();
        ops.forward_in_place(data);
        let key = tau.to_bits();
        let mut cache = self.cache.borrow_mut();
        let pos = match cache.iter().position(|(k, _)| *k == key) {
            Some(p) => p,
            None => {
                if cache.len() >= 4 {
                    cache.remove(0);
                }
                let m = ops.frequency_sq().iter().map(|&k2| Complex64::from_polar(1.0, -k2 * tau)).collect();
                cache.push((key, m));
                cache.len() - 1
            }
        };
        for (z, m) in data.iter_mut().zip(&cache[pos].1) {
            *z *= m;
        }
        drop(cache);
        ops.inverse_in_place(data);
    }

    /// `u <- u exp(i dt (-V + coupling |x|^{-gamma} * |u|^2))`.
    fn phase(&self, u: &mut Field, dt: f64) -> Result<()> {
        let model = self.model;
        let interacting = model.coupling() != 0.0;
        if !interacting && !model.has_potential() {
            return Ok(());
        }
        let phi = if interacting {
            Some(model.kernel().convolve(&u.density())?)
        } else {
            None
        };
        let v = model.v().values();
        let c = model.coupling();
        for (i, z) in u.values_mut().iter_mut().enumerate() {
            let mut theta = -v[i];
            if let Some(phi) = &phi {
                theta += c * phi.values()[i];
            }
            *z *= Complex64::from_polar(1.0, dt * theta);
        }
        Ok(())
    }

    /// One Strang step; `dt` may be negative.
    pub fn step(&self, u: &Field, dt: f64) -> Result<Field> {
        self.model.grid().check_same(u.grid(), "strang_step")?;
        let mut out = u.clone();
        self.kinetic(out.values_mut(), dt / 2.0);
        self.phase(&mut out, dt)?;
        self.kinetic(out.values_mut(), dt / 2.0);
        Ok(out)
    }
}

/// One Strang step of the equation on `model`.
pub fn strang_step(model: &Model, u: &Field, dt: f64) -> Result<Field> {
    Propagator::new(model).step(u, dt)
}

/// `steps` fixed steps of size `dt` (negative `dt` runs backwards).
pub fn propagate_fixed(model: &Model, u: &Field, dt: f64, steps: usize) -> Result<Field> {
    let prop = Propagator::new(model);
    let mut u = u.clone();
    for _ in 0..steps {
        u = prop.step(&u, dt)?;
    }
    Ok(u)
}

/// Blow-up criterion on one state: gradient growth or spectral tail mass.
pub fn detect_blowup(grad_ratio: f64, tail_fraction: f64, cfg: &EvolveConfig) -> bool {
    grad_ratio >= cfg.blowup_grad_factor || tail_fraction >= cfg.blowup_tail_frac
}

/// Criterion applied to the last recorded snapshot.
pub fn detect_blowup_in(record: &TrajectoryRecord) -> bool {
    let (Some(ratio), Some(tail)) = (record.grad_ratios().last().copied(), record.tail_series.last().copied()) else {
        return false;
    };
    detect_blowup(ratio, tail, &record.config)
}

struct Monitor {
    grad_ratio: f64,
    tail: f64,
}

fn monitor(model: &Model, u: &Field, grad0: f64) -> Monitor {
    let ops = model.ops();
    let spec = ops.forward(u);
    let g = ops.grad_norm_sq_from_spectrum(&spec);
    Monitor { grad_ratio: (g / grad0).sqrt(), tail: ops.tail_fraction(&spec, TAIL_BAND) }
}

fn record_snapshot(record: &mut TrajectoryRecord, model: &Model, u: &Field, t: f64, tail: f64) -> Result<()> {
    let mut s = functionals::snapshot(model, u, t)?;
    let z = s.variance_i.sqrt();
    s.variance_i = z * z;
    record.snapshots.push(s);
    record.z_series.push(z);
    record.tail_series.push(tail);
    Ok(())
}

/// Integrates from `u0` until `t_max`, blow-up detection, or step-size
/// underflow.
pub fn evolve(model: &Model, u0: &Field, cfg: &EvolveConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    model.grid().check_same(u0.grid(), "evolve")?;
    let prop = Propagator::new(model);
    let grad0 = model.ops().grad_norm_sq(u0);
    if !(grad0 > 0.0) {
        return Err(Error::domain("evolve", "initial data has zero gradient norm"));
    }
    let mut record = TrajectoryRecord {
        config: *cfg,
        snapshots: Vec::new(),
        z_series: Vec::new(),
        tail_series: Vec::new(),
        termination: Termination::Completed { t: 0.0 },
        accepted_steps: 0,
        rejected_steps: 0,
        final_field: None,
    };
    let m0 = monitor(model, u0, grad0);
    record_snapshot(&mut record, model, u0, 0.0, m0.tail)?;
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut dt = cfg.dt0.min(cfg.dt_max);
    let mut since_record = 0;
    let end = loop {
        let remaining = cfg.t_max - t;
        if remaining <= 1e-12 * cfg.t_max {
            break Termination::Completed { t };
        }
        let h = dt.min(remaining);
        let next = if cfg.adaptive {
            let full = prop.step(&u, h)?;
            let half = prop.step(&prop.step(&u, h / 2.0)?, h / 2.0)?;
            let err = full.relative_distance(&half);
            if !(err <= cfg.tol_step) {
                record.rejected_steps += 1;
                dt = h * 0.5;
                if dt < cfg.dt_min {
                    break Termination::ResolutionExhausted { t, dt };
                }
                continue;
            }
            if err < cfg.tol_step / 4.0 && h == dt {
                dt = (dt * 1.2).min(cfg.dt_max);
            }
            half
        } else {
            prop.step(&u, h)?
        };
        u = next;
        t = if h == remaining { cfg.t_max } else { t + h };
        record.accepted_steps += 1;
        since_record += 1;
        let m = monitor(model, &u, grad0);
        let blown = detect_blowup(m.grad_ratio, m.tail, cfg);
        let done = cfg.t_max - t <= 1e-12 * cfg.t_max;
        if since_record >= cfg.record_stride || blown || done {
            record_snapshot(&mut record, model, &u, t, m.tail)?;
            since_record = 0;
        }
        if blown {
            break Termination::BlowupDetected { t, grad_ratio: m.grad_ratio, tail_fraction: m.tail };
        }
    };
    if let Termination::ResolutionExhausted { t, .. } = end {
        if record.snapshots.last().map(|s| s.time) != Some(t) {
            let m = monitor(model, &u, grad0);
            record_snapshot(&mut record, model, &u, t, m.tail)?;
        }
    }
    record.termination = end;
    record.final_field = Some(u);
    Ok(record)
}

/// Three-point derivatives on a non-uniform mesh at interior node `i`.
fn nonuniform_derivatives(t: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let h0 = t[i] - t[i - 1];
    let h1 = t[i + 1] - t[i];
    let d1 = -h1 / (h0 * (h0 + h1)) * y[i - 1] + (h1 - h0) / (h0 * h1) * y[i] + h0 / (h1 * (h0 + h1)) * y[i + 1];
    let d2 = 2.0 * (y[i - 1] / (h0 * (h0 + h1)) - y[i] / (h0 * h1) + y[i + 1] / (h1 * (h0 + h1)));
    (d1, d2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialConsistency {
    /// Max over interior snapshots of `|D I - I'| / max|I'|`.
    pub first: f64,
    /// Max over interior snapshots of `|D^2 I - I''| / max|I''|`.
    pub second: f64,
}

/// Finite differences of the recorded variance against the recorded
/// virial derivatives.
pub fn virial_consistency(record: &TrajectoryRecord) -> Result<VirialConsistency> {
    let n = record.snapshots.len();
    if n < 5 {
        return Err(Error::domain("virial_consistency", format!("need at least 5 snapshots, got {n}")));
    }
    let t = record.times();
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("virial_consistency", "snapshot times are not strictly increasing"));
    }
    let y: Vec<f64> = record.snapshots.iter().map(|s| s.variance_i).collect();
    let scale1 = record.snapshots.iter().map(|s| s.virial_i1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let scale2 = record.snapshots.iter().map(|s| s.virial_i2.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for i in 1..n - 1 {
        let (d1, d2) = nonuniform_derivatives(&t, &y, i);
        first = first.max((d1 - record.snapshots[i].virial_i1).abs() / scale1);
        second = second.max((d2 - record.snapshots[i].virial_i2).abs() / scale2);
    }
    Ok(VirialConsistency { first, second })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub interior_points: usize,
    /// Fraction of interior snapshots with finite-difference `z'' < 0`.
    pub z_second_negative_fraction: Option<f64>,
    pub min_z_prime: Option<f64>,
    /// Minimum of `z'` after the first tenth of the run.
    pub min_z_prime_after_transient: Option<f64>,
    /// `2 sqrt(f(x0))`, when supplied.
    pub z_prime_bound: Option<f64>,
    /// Time at which a linear fit of the late `z'` drives `z` to zero.
    pub collapse_time_estimate: Option<f64>,
}

/// Empirical sign of `z''` and lower bound of `z'` along a run. `f_x0` is
/// `f(x0)` of the initial data when defined.
pub fn monotonicity_probe(record: &TrajectoryRecord, f_x0: Option<f64>) -> MonotonicityReport {
    let n = record.snapshots.len();
    let bound = f_x0.filter(|f| *f >= 0.0).map(|f| 2.0 * f.sqrt());
    let interacting = record.snapshots.iter().any(|s| s.p_value != 0.0);
    if n < 3 || !interacting {
        return MonotonicityReport {
            interior_points: 0,
            z_second_negative_fraction: None,
            min_z_prime: None,
            min_z_prime_after_transient: None,
            z_prime_bound: bound,
            collapse_time_estimate: None,
        };
    }
    let t = record.times();
    let z = &record.z_series;
    let mut negative = 0;
    let mut zp = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let (d1, d2) = nonuniform_derivatives(&t, z, i);
        if d2 < 0.0 {
            negative += 1;
        }
        zp.push((t[i], d1));
    }
    let t_end = t[n - 1];
    let min_all = zp.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let late: Vec<f64> = zp.iter().filter(|p| p.0 >= 0.1 * t_end).map(|p| p.1).collect();
    let min_late = late.iter().copied().fold(f64::INFINITY, f64::min);
    MonotonicityReport {
        interior_points: n - 2,
        z_second_negative_fraction: Some(negative as f64 / (n - 2) as f64),
        min_z_prime: Some(min_all),
        min_z_prime_after_transient: (!late.is_empty()).then_some(min_late),
        z_prime_bound: bound,
        collapse_time_estimate: collapse_estimate(&zp, t_end, z[n - 1]),
    }
}

/// Fits `z' = a + b t` over the last quarter of the samples and returns the
/// first `T > t_end` with `z(T) = 0`.
fn collapse_estimate(zp: &[(f64, f64)], t_end: f64, z_end: f64) -> Option<f64> {
    let k = (zp.len() / 4).max(2);
    if zp.len() < k {
        return None;
    }
    let tail = &zp[zp.len() - k..];
    let nk = k as f64;
    let mt = tail.iter().map(|p| p.0).sum::<f64>() / nk;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / nk;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mt;
    // z(T) = z_end + a (T - t_end) + b/2 (T^2 - t_end^2); solve in tau = T - t_end.
    let qa = b / 2.0;
    let qb = a + b * t_end;
    let qc = z_end;
    let roots: Vec<f64> = if qa.abs() < 1e-300 {
        if qb < 0.0 { vec![-qc / qb] } else { vec![] }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            vec![]
        } else {
            let sq = disc.sqrt();
            vec![(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
        }
    };
    roots.into_iter().filter(|tau| *tau > 0.0).fold(None, |best: Option<f64>, tau| Some(best.map_or(tau, |b| b.min(tau)))).map(|tau| t_end + tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norm_sq, Grid};
    use crate::potentials::PotentialSpec;

    fn model(n: usize, l: f64, v: PotentialSpec) -> Model {
        Model::new(Grid::new(3, n, l).unwrap(), 2.5, v).unwrap()
    }

    fn gaussian(grid: Grid, amp: f64, w: f64) -> Field {
        Field::from_real_fn(grid, |x| amp * (-norm_sq(&x) / (2.0 * w * w)).exp())
    }

    #[test]
    fn free_gaussian_matches_analytic_spreading() {
        // u0 = exp(i k.x - |x|^2/2) evolves under i u_t + Delta u = 0 to
        // (1 + 2it)^{-3/2} exp(-|x - 2kt|^2 / (2(1 + 2it)) + i k.x - i|k|^2 t).
        let m = model(64, 14.0, PotentialSpec::Zero).without_interaction();
        let k = [0.5, 0.0, 0.0];
        let g = *m.grid();
        let u0 = Field::from_fn(g, |x| {
            Complex64::from_polar((-norm_sq(&x) / 2.0).exp(), k[0] * x[0])
        });
        let t = 1.0;
        let u = propagate_fixed(&m, &u0, 0.25, 4).unwrap();
        let exact = Field::from_fn(g, |x| {
            let a = Complex64::new(1.0, 2.0 * t);
            let shifted = (x[0] - 2.0 * k[0] * t).powi(2) + x[1] * x[1] + x[2] * x[2];
            a.powf(-1.5) * (-shifted / (2.0 * a) + Complex64::new(0.0, k[0] * x[0] - k[0] * k[0] * t)).exp()
        });
        let err = u.relative_distance(&exact);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn step_conserves_mass() {
        let m = model(32, 8.0, PotentialSpec::GaussianBump { a: 0.5, sigma: 1.5 });
        let u0 = gaussian(*m.grid(), 1.2, 1.0).with_phase(|x| 0.3 * x[0]);
        let u1 = strang_step(&m, &u0, 0.05).unwrap();
        let (m0, m1) = (u0.l2_norm_sq(), u1.l2_norm_sq());
        assert!((m1 - m0).abs() <= 1e-13 * m0, "{}", (m1 - m0) / m0);
    }

    #[test]
    fn time_reversal_recovers_data() {
        let m = model(32, 8.0, PotentialSpec::GaussianBump { a: -0.4, sigma: 1.2 });
        let u0 = gaussian(*m.grid(), 1.0, 1.2).with_phase(|x| 0.2 * x[1]);
        let fwd = propagate_fixed(&m, &u0, 0.02, 25).unwrap();
        let back = propagate_fixed(&m, &fwd, -0.02, 25).unwrap();
        let err = back.relative_distance(&u0);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn energy_error_is_second_order() {
        let m = model(32, 8.0, PotentialSpec::GaussianBump { a: 0.5, sigma: 1.5 });
        let u0 = gaussian(*m.grid(), 0.35, 1.0);
        let e0 = functionals::energy(&m, &u0).unwrap();
        let t = 0.4;
        let drift: Vec<f64> = [0.01, 0.005, 0.0025, 0.00125]
            .iter()
            .map(|&dt| {
                let steps = (t / dt as f64).round() as usize;
                let u = propagate_fixed(&m, &u0, dt, steps).unwrap();
                (functionals::energy(&m, &u).unwrap() - e0).abs()
            })
            .collect();
        for w in drift.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.8..=2.2).contains(&order), "order {order} from {drift:?}");
        }
    }

    #[test]
    fn free_flow_has_constant_second_virial() {
        let m = model(32, 10.0, PotentialSpec::Zero).without_interaction();
        let u0 = gaussian(*m.grid(), 1.0, 1.0).with_phase(|x| -0.1 * norm_sq(&x));
        let cfg = EvolveConfig { dt0: 0.05, t_max: 0.5, adaptive: false, ..Default::default() };
        let rec = evolve(&m, &u0, &cfg).unwrap();
        assert!(matches!(rec.termination, Termination::Completed { .. }));
        for s in &rec.snapshots {
            assert!((s.virial_i2 - 8.0 * s.grad_sq).abs() <= 1e-12 * s.virial_i2);
            assert!((s.grad_sq - rec.snapshots[0].grad_sq).abs() <= 1e-10 * s.grad_sq);
        }
        let vc = virial_consistency(&rec).unwrap();
        assert!(vc.second < 1e-8, "{vc:?}");
        assert!(!detect_blowup_in(&rec));
        assert!(monotonicity_probe(&rec, Some(1.0)).z_second_negative_fraction.is_none());
    }

    #[test]
    fn shuffled_record_is_rejected() {
        let m = model(16, 8.0, PotentialSpec::Zero).without_interaction();
        let u0 = gaussian(*m.grid(), 1.0, 1.0);
        let cfg = EvolveConfig { dt0: 0.05, t_max: 0.3, adaptive: false, ..Default::default() };
        let mut rec = evolve(&m, &u0, &cfg).unwrap();
        assert!(virial_consistency(&rec).is_ok());
        rec.snapshots.swap(1, 3);
        assert!(virial_consistency(&rec).is_err());
        rec.snapshots.truncate(4);
        assert!(virial_consistency(&rec).is_err());
    }

    #[test]
    fn stored_variance_is_z_squared() {
        let m = model(16, 8.0, PotentialSpec::Zero);
        let u0 = gaussian(*m.grid(), 0.5, 1.0);
        let cfg = EvolveConfig { dt0: 0.05, t_max: 0.2, ..Default::default() };
        let rec = evolve(&m, &u0, &cfg).unwrap();
        for (s, z) in rec.snapshots.iter().zip(&rec.z_series) {
            assert_eq!(s.variance_i.to_bits(), (z * z).to_bits());
        }
        assert!(rec.snapshots.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn config_violations_are_collected() {
        let cfg = EvolveConfig { dt0: -1.0, blowup_grad_factor: 0.5, record_stride: 0, ..Default::default() };
        match cfg.validate() {
            Err(Error::Config(v)) => assert_eq!(v.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collapse_estimate_of_linear_decay() {
        // z' = -1 constant with z(2) = 1: zero at t = 3.
        let zp: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 * 0.1, -1.0)).collect();
        let t = collapse_estimate(&zp, 2.0, 1.0).unwrap();
        assert!((t - 3.0).abs() < 1e-12);
        let rising: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 * 0.1, 0.5)).collect();
        assert!(collapse_estimate(&rising, 2.0, 1.0).is_none());
    }
}
