//! Ground states of `(-Delta + V + omega^2) Q = (|x|^{-gamma} * Q^2) Q`.
//!
//! The profile is found by Petviashvili iteration
//! `u <- M(u)^{3/2} L^{-1} N(u)` with `L = -Delta + V + omega^2`,
//! `N(u) = (|x|^{-gamma} * u^2) u` and `M(u) = <L u, u> / <N(u), u>`.
//! `L^{-1}` is a Fourier multiplier when `V = 0` and a preconditioned
//! conjugate-gradient solve otherwise. In self-consistent mode an outer loop
//! relaxes `omega^2` towards `(4 - gamma) hv / (gamma M)`, accelerated by
//! secant steps.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, FunctionalSnapshot};
use crate::grid::{norm_sq, Field, Grid};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OmegaMode {
    Fixed { omega: f64 },
    /// Starts from `initial` and iterates `omega^2` to self-consistency.
    SelfConsistent { initial: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop once the fixed-point residual falls below this.
    pub tol: f64,
    /// Residual required to report convergence.
    pub accept_tol: f64,
    pub inner_tol: f64,
    pub max_inner: usize,
    pub omega_tol: f64,
    pub relaxation: f64,
    pub max_outer: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 2000,
            tol: 1e-10,
            accept_tol: 1e-8,
            inner_tol: 1e-11,
            max_inner: 1000,
            omega_tol: 1e-8,
            relaxation: 0.5,
            max_outer: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    #[serde(skip)]
    pub profile: Option<Field>,
    pub omega: f64,
    pub snapshot: FunctionalSnapshot,
    pub c_gn: f64,
    pub c_q: f64,
    /// Closed-form `C_Q` from the mass; only when the weighted virial
    /// integral vanishes (zero potential or self-consistent frequency).
    pub c_q_closed_form: Option<f64>,
    pub pohozaev_residuals: (f64, f64),
    pub fixed_point_residual: f64,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    pub omega_history: Vec<f64>,
}

impl GroundState {
    pub fn profile(&self) -> &Field {
        self.profile.as_ref().expect("ground state carries its profile")
    }

    /// Converts a non-converged result into an error carrying its history.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            return Ok(self);
        }
        let tail: Vec<String> =
            self.residual_history.iter().rev().take(5).rev().map(|r| format!("{r:.3e}")).collect();
        Err(Error::Solver(format!(
            "ground state did not converge after {} iterations ({} outer); last residuals [{}], omega history {:?}",
            self.iterations,
            self.outer_iterations,
            tail.join(", "),
            self.omega_history.iter().rev().take(5).rev().collect::<Vec<_>>()
        )))
    }

    /// `M^{1-s} P^{s}` of the profile.
    pub fn mass_interaction_product(&self, gamma: f64) -> f64 {
        self.snapshot.mass_interaction_product(gamma)
    }
}

/// `L = -Delta + V + omega^2` and its inverse.
struct LinearOperator<'a> {
    model: &'a Model,
    omega_sq: f64,
}

impl LinearOperator<'_> {
    fn apply(&self, u: &Field) -> Field {
        let ops = self.model.ops();
        let k2 = ops.frequency_sq();
        let w2 = self.omega_sq;
        let mut out = ops.multiply(u, |slot| Complex64::new(k2[slot] + w2, 0.0));
        if self.model.has_potential() {
            for ((o, z), v) in out.values_mut().iter_mut().zip(u.values()).zip(self.model.v().values()) {
                *o += v * z;
            }
        }
        out
    }

    /// `(-Delta + omega^2)^{-1}`.
    fn precondition(&self, r: &Field) -> Field {
        let ops = self.model.ops();
        let k2 = ops.frequency_sq();
        let w2 = self.omega_sq;
        ops.multiply(r, |slot| Complex64::new(1.0 / (k2[slot] + w2), 0.0))
    }

    /// Returns `L^{-1} b` and the number of inner iterations.
    fn solve(&self, b: &Field, guess: Option<&Field>, tol: f64, max_iter: usize) -> Result<(Field, usize)> {
        let x0 = self.precondition(b);
        if !self.model.has_potential() {
            return Ok((x0, 0));
        }
        let mut x = guess.cloned().unwrap_or(x0);
        let mut r = sub(b, &self.apply(&x));
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            return Ok((Field::zeros(*b.grid()), 0));
        }
        let mut z = self.precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for it in 0..max_iter {
            if dot(&r, &r).sqrt() <= tol * b_norm {
                return Ok((x, it));
            }
            let ap = self.apply(&p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::Solver(format!(
                    "operator -Delta + V + omega^2 is not positive (p.Ap = {pap:.3e}); omega^2 = {} is below the spectrum",
                    self.omega_sq
                )));
            }
            let alpha = rz / pap;
            axpy(&mut x, alpha, &p);
            axpy(&mut r, -alpha, &ap);
            z = self.precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.values_mut().iter_mut().zip(z.values()) {
                *pi = zi + beta * *pi;
            }
        }
        if dot(&r, &r).sqrt() <= tol * b_norm * 10.0 {
            return Ok((x, max_iter));
        }
        Err(Error::Solver(format!("inner solve stalled after {max_iter} iterations")))
    }
}

fn dot(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x.conj() * y).re).sum::<f64>() * a.grid().cell_volume()
}

fn sub(a: &Field, b: &Field) -> Field {
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    Field::from_values(*a.grid(), values).expect("same grid")
}

fn axpy(y: &mut Field, a: f64, x: &Field) {
    for (yi, xi) in y.values_mut().iter_mut().zip(x.values()) {
        *yi += a * xi;
    }
}

/// `(|x|^{-gamma} * |u|^2) u`.
fn nonlinear_term(model: &Model, u: &Field) -> Result<Field> {
    let phi = functionals::riesz_potential(model, u)?;
    let values = u.values().iter().zip(phi.values()).map(|(z, p)| z * p).collect();
    Field::from_values(*u.grid(), values)
}

/// `||L Q - N(Q)|| / ||Q||`.
pub fn fixed_point_residual(model: &Model, q: &Field, omega: f64) -> Result<f64> {
    let op = LinearOperator { model, omega_sq: omega * omega };
    let lq = op.apply(q);
    let nq = nonlinear_term(model, q)?;
    Ok((dot(&sub(&lq, &nq), &sub(&lq, &nq)) / dot(q, q)).sqrt())
}

/// Unit-mass Gaussian `exp(-omega^2 |x|^2 / 2)`.
pub fn initial_guess(grid: Grid, omega: f64) -> Field {
    let g = Field::from_real_fn(grid, |x| (-omega * omega * norm_sq(&x) / 2.0).exp());
    let m = g.l2_norm_sq();
    g.scaled(Complex64::new(1.0 / m.sqrt(), 0.0))
}

struct FixedOutcome {
    profile: Field,
    iterations: usize,
    residual: f64,
    history: Vec<f64>,
}

fn petviashvili(model: &Model, omega: f64, start: Field, opts: &SolverOptions) -> Result<FixedOutcome> {
    let op = LinearOperator { model, omega_sq: omega * omega };
    let mut u = start;
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut inner_guess: Option<Field> = None;
    let mut best: Option<(f64, Field)> = None;
    for it in 0..opts.max_iter {
        let nu = nonlinear_term(model, &u)?;
        let lu = op.apply(&u);
        let num = dot(&lu, &u);
        let den = dot(&nu, &u);
        if !(den > 0.0 && num > 0.0) || !num.is_finite() {
            return Err(Error::Solver(format!(
                "Petviashvili iterate collapsed at step {it} (<Lu,u> = {num:.3e}, <N(u),u> = {den:.3e})"
            )));
        }
        // Relative to `||L u||` so the stopping rule does not depend on omega.
        residual = (dot(&sub(&lu, &nu), &sub(&lu, &nu)) / dot(&lu, &lu)).sqrt();
        history.push(residual);
        if residual <= opts.tol {
            return Ok(FixedOutcome { profile: u, iterations: it, residual, history });
        }
        // A saddle (e.g. a profile sitting on a repulsive bump) is reached and
        // then left along its unstable direction; return the closest approach.
        if best.as_ref().map_or(true, |(r, _)| residual < *r) {
            best = Some((residual, u.clone()));
        } else if let Some((r, _)) = &best {
            if *r <= opts.accept_tol && residual > 100.0 * r {
                let (r, profile) = best.take().expect("best iterate");
                return Ok(FixedOutcome { profile, iterations: it, residual: r, history });
            }
        }
        let stab = (num / den).powf(1.5);
        let (w, _) = op.solve(&nu, inner_guess.as_ref(), opts.inner_tol, opts.max_inner)?;
        u = w.scaled(Complex64::new(stab, 0.0));
        inner_guess = Some(w);
        if u.l2_norm_sq() < 1e-300 {
            return Err(Error::Solver(format!("Petviashvili iterate vanished at step {it}")));
        }
    }
    match best {
        Some((r, profile)) if r < residual => Ok(FixedOutcome { profile, iterations: opts.max_iter, residual: r, history }),
        _ => Ok(FixedOutcome { profile: u, iterations: opts.max_iter, residual, history }),
    }
}

/// Rotates by a constant phase so that `int Q` is real and positive.
/// Rotates to positive total and drops the round-off imaginary part.
fn sign_fix(u: &Field) -> Field {
    let total = u.integrate();
    let rotated = if total.norm() == 0.0 { u.clone() } else { u.scaled(total.conj() / total.norm()) };
    let values = rotated.values().iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    Field::from_values(*u.grid(), values).expect("same grid")
}

pub fn solve_ground_state(model: &Model, mode: OmegaMode, opts: &SolverOptions) -> Result<GroundState> {
    let grid = *model.grid();
    match mode {
        OmegaMode::Fixed { omega } => {
            if !(omega > 0.0 && omega.is_finite()) {
                return Err(Error::domain("solve_ground_state", format!("omega = {omega} must be positive")));
            }
            let out = petviashvili(model, omega, initial_guess(grid, omega), opts)?;
            finish(model, omega, out, 0, vec![omega], true, opts)
        }
        OmegaMode::SelfConsistent { initial } => {
            if !(initial > 0.0 && initial.is_finite()) {
                return Err(Error::domain("solve_ground_state", format!("initial omega = {initial} must be positive")));
            }
            let mut omega_sq = initial * initial;
            let mut start = initial_guess(grid, initial);
            let mut history = Vec::new();
            let mut total_iters = 0;
            let mut omega_ok = false;
            let mut last = None;
            let mut prev: Option<(f64, f64)> = None;
            let mut bracket: Option<((f64, f64), (f64, f64))> = None;
            for outer in 0..opts.max_outer {
                let omega = omega_sq.sqrt();
                history.push(omega);
                let out = petviashvili(model, omega, start.clone(), opts)?;
                total_iters += out.iterations;
                let q = &out.profile;
                let target = (4.0 - model.gamma()) * functionals::hv_norm_sq(model, q)? / (model.gamma() * q.l2_norm_sq());
                if !(target > 0.0) {
                    return Err(Error::Solver(format!(
                        "self-consistent frequency became nonpositive (target omega^2 = {target:.3e}) at outer step {outer}"
                    )));
                }
                // Relaxed or secant steps on `g = target - omega^2` until the sign
                // of `g` changes, then Illinois false position on the bracket.
                let g = target - omega_sq;
                let mut next = omega_sq + opts.relaxation * g;
                if let Some((w_prev, g_prev)) = prev {
                    if g_prev.signum() != g.signum() {
                        bracket = Some(((w_prev, g_prev), (omega_sq, g)));
                    } else if let Some(((a, ga), (b, gb))) = bracket {
                        // Same side as the previous point: keep the other end, halving its weight.
                        let (keep, kg) = if ga.signum() == g.signum() { (b, gb) } else { (a, ga) };
                        bracket = Some(((keep, kg * 0.5), (omega_sq, g)));
                    }
                    if let Some(((a, ga), (b, gb))) = bracket {
                        next = (a * gb - b * ga) / (gb - ga);
                    } else {
                        let secant = omega_sq - g * (omega_sq - w_prev) / (g - g_prev);
                        if secant.is_finite() && secant > 0.5 * omega_sq && secant < 2.0 * omega_sq {
                            next = secant;
                        }
                    }
                }
                prev = Some((omega_sq, g));
                let change = (next - omega_sq).abs() / omega_sq;
                start = out.profile.clone();
                last = Some((omega, out, outer + 1));
                if change <= opts.omega_tol {
                    omega_ok = true;
                    break;
                }
                omega_sq = next;
            }
            let (omega, out, outers) = last.expect("at least one outer step");
            let mut out = out;
            out.iterations = total_iters;
            finish(model, omega, out, outers, history, omega_ok, opts)
        }
    }
}

fn finish(
    model: &Model,
    omega: f64,
    out: FixedOutcome,
    outer_iterations: usize,
    omega_history: Vec<f64>,
    omega_ok: bool,
    opts: &SolverOptions,
) -> Result<GroundState> {
    let profile = sign_fix(&out.profile);
    let snapshot = functionals::snapshot(model, &profile, 0.0)?;
    let residuals = pohozaev_residuals_of(&snapshot, omega, model.gamma());
    let (c_gn, c_q) = sharp_constants_of(&snapshot, model.gamma());
    let weighted = snapshot.e_term / 4.0;
    let vanishing = !model.has_potential() || weighted.abs() <= 1e-3 * snapshot.hv_sq;
    let c_q_closed_form = vanishing.then(|| closed_form_c_q(snapshot.mass, omega, model.gamma()));
    let fixed_point_residual = fixed_point_residual(model, &profile, omega)?;
    Ok(GroundState {
        profile: Some(profile),
        omega,
        snapshot,
        c_gn,
        c_q,
        c_q_closed_form,
        pohozaev_residuals: residuals,
        fixed_point_residual,
        iterations: out.iterations,
        outer_iterations,
        converged: omega_ok && fixed_point_residual <= opts.accept_tol && out.residual.is_finite(),
        residual_history: out.history,
        omega_history,
    })
}

/// Relative residuals of
/// `hv = (gamma w^2 M + 2 e') / (4 - gamma)` and `P = (4 w^2 M + 2 e') / (4 - gamma)`
/// with `e' = int (2V + x.grad V) Q^2`.
pub fn pohozaev_residuals(model: &Model, q: &Field, omega: f64) -> Result<(f64, f64)> {
    let s = functionals::snapshot(model, q, 0.0)?;
    Ok(pohozaev_residuals_of(&s, omega, model.gamma()))
}

pub fn pohozaev_residuals_of(s: &FunctionalSnapshot, omega: f64, gamma: f64) -> (f64, f64) {
    let w2 = omega * omega;
    let e1 = s.e_term / 4.0;
    let hv_pred = (gamma * w2 * s.mass + 2.0 * e1) / (4.0 - gamma);
    let p_pred = (4.0 * w2 * s.mass + 2.0 * e1) / (4.0 - gamma);
    ((s.hv_sq - hv_pred).abs() / s.hv_sq.abs(), (s.p_value - p_pred).abs() / s.p_value.abs())
}

/// `(C_GN, C_Q) = (W(Q), W(Q)^{2/gamma})`.
pub fn sharp_constants(model: &Model, q: &Field) -> Result<(f64, f64)> {
    let c_gn = functionals::weinstein(model, q)?;
    Ok((c_gn, c_gn.powf(2.0 / model.gamma())))
}

fn sharp_constants_of(s: &FunctionalSnapshot, gamma: f64) -> (f64, f64) {
    let c_gn = s.p_value / (s.hv_sq.powf(gamma / 2.0) * s.mass.powf((4.0 - gamma) / 2.0));
    (c_gn, c_gn.powf(2.0 / gamma))
}

/// `C_Q = 4^{2/gamma} (4-gamma)^{(gamma-2)/gamma} omega^{(4-2gamma)/gamma} / (gamma M^{2/gamma})`,
/// which follows from the Pohozaev identities with vanishing potential term.
pub fn closed_form_c_q(mass: f64, omega: f64, gamma: f64) -> f64 {
    4f64.powf(2.0 / gamma) * (4.0 - gamma).powf((gamma - 2.0) / gamma) * omega.powf((4.0 - 2.0 * gamma) / gamma)
        / (gamma * mass.powf(2.0 / gamma))
}

/// `M(Q)^{1-s} E(Q)^{s}` for the sharp constant `C_Q`, with `s = (gamma-2)/2`.
/// Independent of `omega` and of the mass normalization.
pub fn threshold_product(c_q: f64, gamma: f64) -> f64 {
    let s = (gamma - 2.0) / 2.0;
    4.0 * s.powf(s) * gamma.powf(-gamma / 2.0) * c_q.powf(-gamma / 2.0)
}

/// Relative L2 distance between a profile and its radial interpolant built
/// from the samples along the first axis, over nodes with `|x| < L`.
pub fn radial_deviation(q: &Field) -> f64 {
    radial_deviation_within(q, q.grid().half_len())
}

/// As [`radial_deviation`], restricted to nodes with `|x| < radius`.
pub fn radial_deviation_within(q: &Field, radius: f64) -> f64 {
    let grid = *q.grid();
    let n = grid.n();
    let dim = grid.dim();
    let centre = n / 2;
    let line: Vec<Complex64> = (0..n)
        .map(|i| {
            let mut idx = [centre; 3];
            idx[0] = i;
            let flat = idx[..dim].iter().fold(0, |acc, &k| acc * n + k);
            q.values()[flat]
        })
        .collect();
    // Trig coefficients of the axis line.
    let mut coeffs = line.clone();
    let plan = crate::fft::FftNd::new(1, n);
    plan.forward(&mut coeffs);
    let l = grid.half_len();
    let interp = |r: f64| -> Complex64 {
        let s = r + l;
        let mut acc = Complex64::new(0.0, 0.0);
        for (slot, c) in coeffs.iter().enumerate() {
            let k = crate::grid::signed_index(slot, n);
            let xi = std::f64::consts::PI * k as f64 / l;
            if slot == n / 2 {
                acc += c * (xi * s).cos();
            } else {
                acc += c * Complex64::from_polar(1.0, xi * s);
            }
        }
        acc / n as f64
    };
    let h = grid.spacing();
    let max_q = dim * (n / 2) * (n / 2);
    let mut cache: Vec<Option<Complex64>> = vec![None; max_q + 1];
    let mut num = 0.0;
    let mut den = 0.0;
    for (flat, z) in q.values().iter().enumerate() {
        let idx = grid.unflatten(flat);
        let qi: usize = idx[..dim].iter().map(|&i| (i as i64 - centre as i64).pow(2) as usize).sum();
        let r = h * (qi as f64).sqrt();
        if r >= radius.min(l) {
            continue;
        }
        let val = *cache[qi].get_or_insert_with(|| interp(r));
        num += (z - val).norm_sqr();
        den += z.norm_sqr();
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;
    use std::sync::OnceLock;

    fn reference() -> &'static (Model, GroundState) {
        static CELL: OnceLock<(Model, GroundState)> = OnceLock::new();
        CELL.get_or_init(|| {
            let grid = Grid::new(3, 64, 8.0).unwrap();
            let model = Model::new(grid, 2.5, PotentialSpec::Zero).unwrap();
            let gs = solve_ground_state(&model, OmegaMode::Fixed { omega: 1.0 }, &SolverOptions::default()).unwrap();
            (model, gs)
        })
    }

    #[test]
    fn ground_state_satisfies_pohozaev() {
        let (_, gs) = reference();
        assert!(gs.converged, "residual {}", gs.fixed_point_residual);
        let s = gs.snapshot;
        // hv = gamma M / (4 - gamma) and P = 4 M / (4 - gamma) at omega = 1.
        assert!((s.hv_sq / s.mass - 5.0 / 3.0).abs() < 1e-4);
        assert!((s.p_value / s.mass - 8.0 / 3.0).abs() < 1e-4);
        assert!(gs.pohozaev_residuals.0 < 1e-4 && gs.pohozaev_residuals.1 < 1e-4);
        // E = hv/2 - P/4 = P/16 at omega = 1.
        assert!((s.energy - s.p_value / 16.0).abs() < 1e-4 * s.energy);
    }

    #[test]
    fn profile_is_real_and_positive_at_centre() {
        let (_, gs) = reference();
        let q = gs.profile();
        let peak = q.max_abs();
        assert!(q.values().iter().all(|z| z.im.abs() < 1e-10 * peak));
        assert!(q.integrate().re > 0.0);
    }

    #[test]
    fn perturbation_is_detected() {
        let (model, gs) = reference();
        let q = gs.profile();
        let noisy = Field::from_values(
            *q.grid(),
            q.values()
                .iter()
                .enumerate()
                .map(|(i, z)| z * (1.0 + 0.1 * ((i as f64 * 0.7123).sin())))
                .collect(),
        )
        .unwrap();
        let (r1, r2) = pohozaev_residuals(model, &noisy, gs.omega).unwrap();
        assert!(r1.max(r2) >= 1e-2, "{r1} {r2}");
    }

    #[test]
    fn constants_are_consistent() {
        let (model, gs) = reference();
        assert!((gs.c_q.powf(2.5) - gs.c_gn.powi(2)).abs() < 1e-12 * gs.c_gn.powi(2));
        let (c_gn2, _) = sharp_constants(model, &gs.profile().scaled(Complex64::new(2.0, 0.0))).unwrap();
        assert!((c_gn2 - gs.c_gn).abs() < 1e-12 * gs.c_gn);
        let closed = gs.c_q_closed_form.unwrap();
        assert!((closed - gs.c_q).abs() < 1e-5 * gs.c_q);
    }

    #[test]
    fn threshold_product_matches_profile() {
        // M^{1-s} E^{s} of the solved profile against the closed form in C_Q.
        let (_, gs) = reference();
        let s = (2.5 - 2.0) / 2.0;
        let direct = gs.snapshot.mass.powf(1.0 - s) * gs.snapshot.energy.powf(s);
        let closed = threshold_product(gs.c_q, 2.5);
        assert!((direct - closed).abs() < 1e-5 * direct, "{direct} vs {closed}");
    }

    #[test]
    fn pcg_inverse_matches_multiplier_for_zero_potential() {
        // A potential that is zero numerically forces the CG path through
        // the same operator as the multiplier.
        let grid = Grid::new(3, 16, 5.0).unwrap();
        let model = Model::new(grid, 2.5, PotentialSpec::GaussianBump { a: 0.5, sigma: 1.0 }).unwrap();
        let op = LinearOperator { model: &model, omega_sq: 1.3 };
        let b = initial_guess(grid, 1.0);
        let (x, iters) = op.solve(&b, None, 1e-12, 500).unwrap();
        assert!(iters > 0);
        let back = op.apply(&x);
        assert!(back.relative_distance(&b) < 1e-11);
    }

    #[test]
    fn profile_is_radial_in_the_core() {
        let (_, gs) = reference();
        let dev = radial_deviation_within(gs.profile(), 4.0);
        assert!(dev < 1e-4, "{dev}");
    }

    #[test]
    fn weinstein_is_maximal_at_profile() {
        let (model, gs) = reference();
        let q = gs.profile();
        let w0 = functionals::weinstein(model, q).unwrap();
        let bumps: [([f64; 3], f64); 4] =
            [([1.0, 0.0, 0.0], 1.0), ([0.0, -0.5, 0.5], 0.7), ([0.3, 0.3, -0.8], 1.5), ([0.0, 0.0, 0.0], 2.0)];
        for (centre, width) in bumps {
            let eta = Field::from_real_fn(*q.grid(), |x| {
                let d2: f64 = x.iter().zip(centre).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * width * width)).exp()
            });
            for eps in [0.05, -0.05] {
                let values = q.values().iter().zip(eta.values()).map(|(a, b)| a + eps * b).collect();
                let w = functionals::weinstein(model, &Field::from_values(*q.grid(), values).unwrap()).unwrap();
                assert!(w < w0, "W increased under perturbation: {w} > {w0}");
            }
        }
    }

    #[test]
    fn weinstein_value_is_frequency_independent() {
        // Q_2(x) = 2^{5/4} Q(2x); the half-size box keeps the sampling identical.
        let (_, gs) = reference();
        let grid = Grid::new(3, 64, 4.0).unwrap();
        let model = Model::new(grid, 2.5, PotentialSpec::Zero).unwrap();
        let gs2 = solve_ground_state(&model, OmegaMode::Fixed { omega: 2.0 }, &SolverOptions::default()).unwrap();
        assert!(gs2.converged);
        assert!((gs2.c_gn - gs.c_gn).abs() < 1e-5 * gs.c_gn, "{} vs {}", gs2.c_gn, gs.c_gn);
        let ratio = gs2.snapshot.mass / gs.snapshot.mass;
        assert!((ratio - 2f64.powf(-0.5)).abs() < 1e-5, "{ratio}");
    }
}
