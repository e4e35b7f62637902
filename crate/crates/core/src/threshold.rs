//! Mass-energy threshold algebra and the blow-up / global-existence
//! classifiers.
//!
//! With `s = (gamma - 2)/2` and `A = 1 / (C_Q M^{(4-gamma)/gamma})` the
//! comparison function is
//! `f(x) = 2 gamma E/(gamma-2) - x/(4(gamma-2)) - A ((16E - x)/(2(gamma-2)))^{2/gamma}`
//! on `x <= 16E`. It decreases up to its critical point `x0` and
//! `f(x0) = x0/8`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, FunctionalSnapshot};
use crate::grid::Field;
use crate::ground_state::{threshold_product, GroundState};
use crate::model::Model;
use crate::potentials::{self, AdmissibilityReport, SignClass};

/// Relative slack under which a strict inequality is not considered satisfied.
pub const STRICT_MARGIN: f64 = 1e-8;
/// Outer-shell variance fraction accepted as finite variance.
pub const SIGMA_TOL: f64 = 1e-6;
/// Width of the outer shell, as a fraction of the half box.
pub const SIGMA_SHELL: f64 = 0.1;

/// `(gamma - 2)/2`; zero at the mass-critical boundary `gamma = 2`.
pub fn s_c(gamma: f64) -> f64 {
    (gamma - 2.0) / 2.0
}

/// Inputs of the comparison function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInputs {
    pub energy: f64,
    pub mass: f64,
    pub c_q: f64,
    pub gamma: f64,
}

impl ThresholdInputs {
    pub fn new(energy: f64, mass: f64, c_q: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 2.0 && gamma < 4.0) {
            return Err(Error::domain("threshold", format!("gamma = {gamma} outside (2, 4)")));
        }
        if !(mass > 0.0 && c_q > 0.0) || !energy.is_finite() {
            return Err(Error::domain(
                "threshold",
                format!("need M > 0, C_Q > 0 and finite E (M = {mass}, C_Q = {c_q}, E = {energy})"),
            ));
        }
        Ok(ThresholdInputs { energy, mass, c_q, gamma })
    }

    fn a_coeff(&self) -> f64 {
        1.0 / (self.c_q * self.mass.powf((4.0 - self.gamma) / self.gamma))
    }

    pub fn x_max(&self) -> f64 {
        16.0 * self.energy
    }
}

pub fn f_eval(x: f64, p: &ThresholdInputs) -> Result<f64> {
    let g = p.gamma;
    let room = p.x_max() - x;
    if room < 0.0 {
        return Err(Error::domain("f_eval", format!("x = {x} exceeds 16E = {}", p.x_max())));
    }
    Ok(2.0 * g / (g - 2.0) * p.energy - x / (4.0 * (g - 2.0))
        - p.a_coeff() * (room / (2.0 * (g - 2.0))).powf(2.0 / g))
}

/// `f'(x)`, defined for `x < 16E`.
pub fn f_prime(x: f64, p: &ThresholdInputs) -> Result<f64> {
    let g = p.gamma;
    let room = p.x_max() - x;
    if room <= 0.0 {
        return Err(Error::domain("f_prime", format!("x = {x} is not below 16E = {}", p.x_max())));
    }
    Ok(-1.0 / (4.0 * (g - 2.0)) + p.a_coeff() * (2.0 / g) * (2.0 * (g - 2.0)).powf(-2.0 / g) * room.powf(2.0 / g - 1.0))
}

/// Critical point of `f`: `16E - x0 = K^{gamma/(2-gamma)}` with
/// `K = gamma (2(gamma-2))^{2/gamma} / (8 (gamma-2) A)`.
pub fn x0_solve(p: &ThresholdInputs) -> Result<f64> {
    let g = p.gamma;
    let k = g * (2.0 * (g - 2.0)).powf(2.0 / g) / (8.0 * (g - 2.0) * p.a_coeff());
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain("x0_solve", format!("nonpositive radicand K = {k:e} for {p:?}")));
    }
    Ok(p.x_max() - k.powf(g / (2.0 - g)))
}

/// `M^{1-s} E^{s}` against the ground-state value implied by `C_Q`.
pub fn me_from_constant(p: &ThresholdInputs) -> Option<f64> {
    if p.energy <= 0.0 {
        return None;
    }
    let s = s_c(p.gamma);
    Some(p.mass.powf(1.0 - s) * p.energy.powf(s) / threshold_product(p.c_q, p.gamma))
}

/// Residuals of the two ways of writing the threshold identity at `x0`:
/// `(M/M_Q)^{1-s} ((E - x0/16)/E_Q)^{s} - 1` and `ME (1 - x0/(16E)) - 1`.
/// The first vanishes identically; the second only when `ME = 1`.
pub fn threshold_identity_residuals(p: &ThresholdInputs) -> Result<(f64, f64)> {
    let x0 = x0_solve(p)?;
    let s = s_c(p.gamma);
    let base = threshold_product(p.c_q, p.gamma);
    let exact = p.mass.powf(1.0 - s) * (p.energy - x0 / 16.0).powf(s) / base - 1.0;
    let me = me_from_constant(p)
        .ok_or_else(|| Error::domain("threshold_identity_residuals", "E <= 0 leaves ME undefined"))?;
    Ok((exact, me * (1.0 - x0 / (16.0 * p.energy)) - 1.0))
}

/// Which ground state normalizes the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `V_- = 0`: the potential-free ground state `Q` at unit frequency.
    Free,
    /// `V_- != 0`: the self-consistent maximizer for the potential.
    Potential,
}

impl Branch {
    pub fn for_model(model: &Model) -> Branch {
        let v = model.v().values();
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if v.iter().all(|&x| x >= -potentials::DEFAULT_SIGN_TOL * scale) {
            Branch::Free
        } else {
            Branch::Potential
        }
    }
}

/// Ground-state scalars entering the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub branch: Branch,
    pub gamma: f64,
    pub mass: f64,
    pub energy: f64,
    pub p_value: f64,
    pub hv_sq: f64,
    pub grad_sq: f64,
    pub c_q: f64,
}

impl Reference {
    pub fn from_ground_state(gs: &GroundState, branch: Branch, gamma: f64) -> Self {
        let s = &gs.snapshot;
        Reference {
            branch,
            gamma,
            mass: s.mass,
            energy: s.energy,
            p_value: s.p_value,
            hv_sq: s.hv_sq,
            grad_sq: s.grad_sq,
            c_q: gs.c_q,
        }
    }

    /// `M(Q)^{1-s} E(Q)^{s}`.
    pub fn me_base(&self) -> f64 {
        let s = s_c(self.gamma);
        self.mass.powf(1.0 - s) * self.energy.powf(s)
    }

    /// `M(Q)^{1-s} P(Q)^{s}`.
    pub fn mp_base(&self) -> f64 {
        let s = s_c(self.gamma);
        self.mass.powf(1.0 - s) * self.p_value.powf(s)
    }
}

/// Mass-energy ratio; `None` when `E <= 0`, where the fractional power is
/// undefined.
pub fn me_ratio(u0: &FunctionalSnapshot, reference: &Reference) -> Option<f64> {
    if u0.energy <= 0.0 {
        return None;
    }
    let s = s_c(reference.gamma);
    Some(u0.mass.powf(1.0 - s) * u0.energy.powf(s) / reference.me_base())
}

/// One hypothesis with its signed margin (positive when satisfied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub holds: bool,
    pub margin: f64,
    pub scale: f64,
}

impl Check {
    /// `margin > STRICT_MARGIN * scale`.
    fn strict(margin: f64, scale: f64) -> Self {
        Check { holds: margin > STRICT_MARGIN * scale, margin, scale }
    }

    /// `margin >= -STRICT_MARGIN * scale`.
    fn loose(margin: f64, scale: f64) -> Self {
        Check { holds: margin >= -STRICT_MARGIN * scale, margin, scale }
    }
}

/// The virial threshold condition on the initial data.
///
/// Evaluated as `ME^{1/s} (1 - I'(0)^2 / (32 E I(0))) <= 1`, which is
/// equivalent to `z'(0)^2 >= x0/2` with `z = sqrt(I)`. The form with `ME`
/// to the first power is reported in `literal_lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialCondition {
    pub holds: bool,
    pub lhs: f64,
    /// `lhs - 1`; nonpositive when the condition holds.
    pub margin: f64,
    pub literal_lhs: f64,
    pub literal_holds: bool,
    pub z_prime_sq: f64,
    pub x0_half: f64,
    /// The `z'` form agrees with `holds`.
    pub forms_agree: bool,
    pub note: Option<String>,
}

impl VirialCondition {
    fn degenerate(note: String) -> Self {
        VirialCondition {
            holds: false,
            lhs: f64::NAN,
            margin: f64::NAN,
            literal_lhs: f64::NAN,
            literal_holds: false,
            z_prime_sq: f64::NAN,
            x0_half: f64::NAN,
            forms_agree: true,
            note: Some(note),
        }
    }
}

pub fn check_virial_condition(u0: &FunctionalSnapshot, reference: &Reference) -> Result<VirialCondition> {
    let Some(me) = me_ratio(u0, reference) else {
        return Ok(VirialCondition::degenerate(format!("E = {:e} <= 0: ME undefined", u0.energy)));
    };
    if u0.variance_i <= 0.0 {
        return Ok(VirialCondition::degenerate("I(0) = 0: degenerate variance".into()));
    }
    let g = reference.gamma;
    let s = s_c(g);
    let (i, i1, e) = (u0.variance_i, u0.virial_i1, u0.energy);
    let factor = 1.0 - i1 * i1 / (32.0 * e * i);
    let lhs = me.powf(1.0 / s) * factor;
    let literal_lhs = me * factor;
    let inputs = ThresholdInputs::new(e, u0.mass, reference.c_q, g)?;
    let x0 = x0_solve(&inputs)?;
    let z_prime_sq = i1 * i1 / (4.0 * i);
    let holds = lhs - 1.0 <= STRICT_MARGIN;
    let z_holds = z_prime_sq - x0 / 2.0 >= -STRICT_MARGIN * (16.0 * e);
    // Near the boundary the two forms may straddle it; agreement is only
    // demanded outside the tolerance band.
    let band = (lhs - 1.0).abs() <= 1e-6;
    Ok(VirialCondition {
        holds,
        lhs,
        margin: lhs - 1.0,
        literal_lhs,
        literal_holds: literal_lhs - 1.0 <= STRICT_MARGIN,
        z_prime_sq,
        x0_half: x0 / 2.0,
        forms_agree: band || holds == z_holds,
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    BlowUp,
    Global,
    /// Negative energy and `2V + x.grad V >= 0`: `I'' < 16E < 0`.
    BlowUpByConvexity,
    Indeterminate { failed: Vec<String> },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::BlowUp => "blow_up",
            Verdict::Global => "global",
            Verdict::BlowUpByConvexity => "blow_up_by_convexity",
            Verdict::Indeterminate { .. } => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "prediction", rename_all = "snake_case")]
pub enum SubthresholdVerdict {
    GlobalScattersPredicted { product_margin: f64, heuristic: bool },
    BlowUpPredicted { product_margin: f64, heuristic: bool },
    NotApplicable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub s_c: f64,
    pub branch: Branch,
    pub mass: f64,
    pub energy: f64,
    pub p_value: f64,
    pub hv_sq: f64,
    pub me: Option<f64>,
    pub x0: Option<f64>,
    pub f_x0: Option<f64>,
    pub i0: f64,
    pub i1_0: f64,
    pub me_above_one: Check,
    pub virial_condition: VirialCondition,
    pub i1_nonpositive: Check,
    pub i1_nonnegative: Check,
    pub weight_sign: SignClass,
    pub weight_approximate: bool,
    pub mp_value: f64,
    pub mp_reference: f64,
    pub mp_above: Check,
    pub mp_below: Check,
    pub variance_shell_fraction: f64,
    pub finite_variance: bool,
    pub admissibility: AdmissibilityReport,
    pub verdict: Verdict,
    pub subthreshold: SubthresholdVerdict,
    pub notes: Vec<String>,
}

/// Evaluates every hypothesis of the dichotomy for `u0`.
pub fn classify(model: &Model, u0: &Field, reference: &Reference) -> Result<DichotomyReport> {
    let admissibility = potentials::check_admissible(model.potential(), model.grid())?;
    let snap = functionals::snapshot(model, u0, 0.0)?;
    classify_with(model, u0, &snap, reference, admissibility)
}

/// As [`classify`], with a precomputed snapshot and admissibility report.
pub fn classify_with(
    model: &Model,
    u0: &Field,
    snap: &FunctionalSnapshot,
    reference: &Reference,
    admissibility: AdmissibilityReport,
) -> Result<DichotomyReport> {
    let gamma = model.gamma();
    if (gamma - reference.gamma).abs() > 1e-14 {
        return Err(Error::domain("classify", format!("reference solved for gamma = {}", reference.gamma)));
    }
    let mut notes = Vec::new();
    let expected = Branch::for_model(model);
    if expected != reference.branch {
        notes.push(format!("reference ground state is on the {:?} branch but V calls for {:?}", reference.branch, expected));
    }
    let s = s_c(gamma);
    let me = me_ratio(snap, reference);
    let inputs = ThresholdInputs::new(snap.energy, snap.mass, reference.c_q, gamma)?;
    let (x0, f_x0) = if snap.energy > 0.0 {
        let x0 = x0_solve(&inputs)?;
        (Some(x0), Some(f_eval(x0, &inputs)?))
    } else {
        (None, None)
    };
    let me_above_one = match me {
        Some(v) => Check::strict(v - 1.0, 1.0),
        None => Check { holds: false, margin: f64::NAN, scale: 1.0 },
    };
    let virial_condition = check_virial_condition(snap, reference)?;
    // |I'| <= 4 sqrt(I) ||grad u|| bounds the scale of the first derivative.
    let i1_scale = 4.0 * (snap.variance_i * snap.grad_sq).sqrt();
    let i1_nonpositive = Check::loose(-snap.virial_i1, i1_scale);
    let i1_nonnegative = Check::loose(snap.virial_i1, i1_scale);
    let weight = model.virial_weight();
    let weight_sign = potentials::sign_of_samples(weight.field.values(), potentials::DEFAULT_SIGN_TOL);
    let mp_value = snap.mass.powf(1.0 - s) * snap.p_value.powf(s);
    let mp_reference = reference.mp_base();
    let mp_above = Check::strict(mp_value - mp_reference, mp_reference);
    let mp_below = Check::strict(mp_reference - mp_value, mp_reference);
    let variance_shell_fraction = u0.outer_shell_variance_fraction(SIGMA_SHELL);
    let finite_variance = variance_shell_fraction < SIGMA_TOL;

    let mut common = Vec::new();
    if !admissibility.admissible {
        common.push("potential admissible".to_string());
    }
    if !finite_variance {
        common.push(format!("finite variance (outer-shell fraction {variance_shell_fraction:.3e})"));
    }
    if expected != reference.branch {
        common.push("reference branch".to_string());
    }

    let verdict = if snap.energy < 0.0 {
        let mut failed = common.clone();
        if !weight_sign.is_nonneg() {
            failed.push("2V + x.grad V >= 0".into());
        }
        if failed.is_empty() {
            Verdict::BlowUpByConvexity
        } else {
            failed.insert(0, "E > 0".into());
            Verdict::Indeterminate { failed }
        }
    } else {
        let mut shared = common;
        if !me_above_one.holds {
            shared.push("ME > 1".into());
        }
        if !virial_condition.holds {
            shared.push("virial threshold condition".into());
        }
        let mut blow = shared.clone();
        if !i1_nonpositive.holds {
            blow.push("I'(0) <= 0".into());
        }
        if !weight_sign.is_nonneg() {
            blow.push("2V + x.grad V >= 0".into());
        }
        if !mp_above.holds {
            blow.push("M^{1-s} P^{s} above ground state".into());
        }
        let mut global = shared;
        if !i1_nonnegative.holds {
            global.push("I'(0) >= 0".into());
        }
        if !weight_sign.is_nonpos() {
            global.push("2V + x.grad V <= 0".into());
        }
        if !mp_below.holds {
            global.push("M^{1-s} P^{s} below ground state".into());
        }
        if blow.is_empty() {
            Verdict::BlowUp
        } else if global.is_empty() {
            Verdict::Global
        } else {
            let mut failed: Vec<String> = blow.iter().map(|f| format!("blow-up: {f}")).collect();
            failed.extend(global.iter().map(|f| format!("global: {f}")));
            Verdict::Indeterminate { failed }
        }
    };
    if weight.approximate {
        notes.push("2V + x.grad V sampled without its surface term".into());
    }
    if me.is_none() {
        notes.push(format!("E = {:e} <= 0: ME undefined", snap.energy));
    }
    let weight_nonneg_v = Branch::for_model(model) == Branch::Free;
    let subthreshold = classify_subthreshold_of(snap, reference, me, weight_nonneg_v, model.grid().dim(), gamma);
    Ok(DichotomyReport {
        s_c: s,
        branch: reference.branch,
        mass: snap.mass,
        energy: snap.energy,
        p_value: snap.p_value,
        hv_sq: snap.hv_sq,
        me,
        x0,
        f_x0,
        i0: snap.variance_i,
        i1_0: snap.virial_i1,
        me_above_one,
        virial_condition,
        i1_nonpositive,
        i1_nonnegative,
        weight_sign,
        weight_approximate: weight.approximate,
        mp_value,
        mp_reference,
        mp_above,
        mp_below,
        variance_shell_fraction,
        finite_variance,
        admissibility,
        verdict,
        subthreshold,
        notes,
    })
}

/// Below-threshold prediction from `||u0||_{H_V} ||u0||` against
/// `||grad Q|| ||Q||`. The statement this mirrors is proved for
/// `(gamma, d) = (3, 5)`; elsewhere the result is flagged heuristic.
pub fn classify_subthreshold(model: &Model, u0: &Field, reference: &Reference) -> Result<SubthresholdVerdict> {
    let snap = functionals::snapshot(model, u0, 0.0)?;
    let me = me_ratio(&snap, reference);
    let v_nonneg = Branch::for_model(model) == Branch::Free;
    Ok(classify_subthreshold_of(&snap, reference, me, v_nonneg, model.grid().dim(), model.gamma()))
}

fn classify_subthreshold_of(
    snap: &FunctionalSnapshot,
    reference: &Reference,
    me: Option<f64>,
    v_nonneg: bool,
    dim: usize,
    gamma: f64,
) -> SubthresholdVerdict {
    let Some(me) = me else {
        return SubthresholdVerdict::NotApplicable { reason: "E <= 0".into() };
    };
    if me >= 1.0 {
        return SubthresholdVerdict::NotApplicable { reason: format!("ME = {me:.6} >= 1") };
    }
    if !v_nonneg {
        return SubthresholdVerdict::NotApplicable { reason: "V is not nonnegative".into() };
    }
    if reference.branch != Branch::Free {
        return SubthresholdVerdict::NotApplicable { reason: "needs the potential-free ground state".into() };
    }
    let heuristic = !(dim == 5 && (gamma - 3.0).abs() < 1e-12);
    let lhs = snap.hv_sq * snap.mass;
    let rhs = reference.grad_sq * reference.mass;
    let product_margin = (rhs - lhs) / rhs;
    if product_margin > STRICT_MARGIN {
        SubthresholdVerdict::GlobalScattersPredicted { product_margin, heuristic }
    } else if product_margin < -STRICT_MARGIN {
        SubthresholdVerdict::BlowUpPredicted { product_margin, heuristic }
    } else {
        SubthresholdVerdict::NotApplicable { reason: "product equals the ground-state value".into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(e: f64, m: f64, c: f64, g: f64) -> ThresholdInputs {
        ThresholdInputs::new(e, m, c, g).unwrap()
    }

    #[test]
    fn critical_index() {
        assert_eq!(s_c(3.0), 0.5);
        assert_eq!(s_c(2.5), 0.25);
        assert_eq!(s_c(2.0), 0.0);
    }

    #[test]
    fn f_at_right_end_is_two_e() {
        let p = inputs(0.7, 1.3, 1.1, 2.5);
        assert!((f_eval(16.0 * 0.7, &p).unwrap() - 1.4).abs() < 1e-14);
        assert!(f_eval(16.0 * 0.7 + 1e-9, &p).is_err());
        assert!(f_prime(16.0 * 0.7, &p).is_err());
    }

    #[test]
    fn me_is_one_at_threshold_product() {
        // M^{1-s} E^{s} equal to the ground-state value puts x0 at 0.
        let g = 2.5;
        let c_q = 1.107;
        let m: f64 = 2.0;
        let s = s_c(g);
        let e = (threshold_product(c_q, g) / m.powf(1.0 - s)).powf(1.0 / s);
        let p = inputs(e, m, c_q, g);
        assert!((me_from_constant(&p).unwrap() - 1.0).abs() < 1e-12);
        assert!(x0_solve(&p).unwrap().abs() < 1e-10 * 16.0 * e);
    }

    #[test]
    fn printed_identity_differs_from_the_exact_one() {
        let p = inputs(0.9, 1.2, 1.107, 2.5);
        let (exact, printed) = threshold_identity_residuals(&p).unwrap();
        assert!(exact.abs() < 1e-12);
        assert!(printed.abs() > 1e-2);
    }

    #[test]
    fn me_undefined_for_nonpositive_energy() {
        let p = inputs(0.0, 1.0, 1.0, 2.5);
        assert!(me_from_constant(&p).is_none());
        let r = Reference {
            branch: Branch::Free,
            gamma: 2.5,
            mass: 1.0,
            energy: 0.2,
            p_value: 3.2,
            hv_sq: 1.7,
            grad_sq: 1.7,
            c_q: 1.1,
        };
        let snap = FunctionalSnapshot {
            time: 0.0,
            mass: 1.0,
            energy: -0.1,
            p_value: 1.0,
            hv_sq: 0.3,
            grad_sq: 0.3,
            variance_i: 1.0,
            virial_i1: 0.0,
            virial_i2: 0.0,
            e_term: 0.0,
            approximate: false,
        };
        assert!(me_ratio(&snap, &r).is_none());
        let c = check_virial_condition(&snap, &r).unwrap();
        assert!(!c.holds && c.note.is_some());
    }

    /// Tuples with the mass-energy ratio in `[0.3, 3]`, where `x0` is of the
    /// order of `16E`.
    pub(crate) fn arb_inputs() -> impl Strategy<Value = ThresholdInputs> {
        (2.1f64..3.9, 0.3f64..5.0, 0.3f64..3.0, 0.3f64..3.0).prop_map(|(g, m, c, me)| {
            let s = s_c(g);
            let e = (me * threshold_product(c, g) / m.powf(1.0 - s)).powf(1.0 / s);
            ThresholdInputs::new(e, m, c, g).unwrap()
        })
    }

    proptest! {
        #[test]
        fn x0_is_the_critical_point(p in arb_inputs()) {
            let x0 = x0_solve(&p).unwrap();
            let d = f_prime(x0, &p).unwrap();
            let slope_scale = 1.0 / (4.0 * (p.gamma - 2.0));
            prop_assert!(d.abs() <= 1e-10 * slope_scale, "f'(x0) = {}", d);
            let fx = f_eval(x0, &p).unwrap();
            prop_assert!((fx - x0 / 8.0).abs() <= 1e-10 * (x0.abs() / 8.0).max(p.energy), "{} vs {}", fx, x0 / 8.0);
        }

        #[test]
        fn me_above_one_iff_x0_positive(p in arb_inputs()) {
            let me = me_from_constant(&p).unwrap();
            let x0 = x0_solve(&p).unwrap();
            let tol = 1e-8 * 16.0 * p.energy;
            if x0.abs() > tol {
                prop_assert_eq!(me > 1.0, x0 > 0.0);
            }
            let (exact, _) = threshold_identity_residuals(&p).unwrap();
            prop_assert!(exact.abs() < 1e-10);
        }

        #[test]
        fn f_decreases_below_x0(p in arb_inputs(), t in 0.01f64..5.0) {
            let x0 = x0_solve(&p).unwrap();
            let span = (16.0 * p.energy - x0).max(1e-3);
            let x = x0 - t * span;
            let h = 1e-6 * span;
            let fd = (f_eval(x + h, &p).unwrap() - f_eval(x - h, &p).unwrap()) / (2.0 * h);
            prop_assert!(fd < 0.0);
            prop_assert!(f_prime(x, &p).unwrap() < 0.0);
        }
    }
}
