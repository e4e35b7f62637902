use std::sync::OnceLock;

use nlh::grid::norm_sq;
use nlh::ground_state::{solve_ground_state, GroundState, OmegaMode, SolverOptions};
use nlh::threshold::{classify, Branch, Reference, Verdict};
use nlh::{Field, Grid, Model, PotentialSpec};
use proptest::prelude::*;
use rustfft::num_complex::Complex64;

fn setup() -> &'static (Model, GroundState, Reference) {
    static CELL: OnceLock<(Model, GroundState, Reference)> = OnceLock::new();
    CELL.get_or_init(|| {
        let model = Model::new(Grid::new(3, 32, 12.0).unwrap(), 2.5, PotentialSpec::Zero).unwrap();
        let gs = solve_ground_state(&model, OmegaMode::Fixed { omega: 1.0 }, &SolverOptions::default()).unwrap();
        assert!(gs.converged);
        let r = Reference::from_ground_state(&gs, Branch::Free, 2.5);
        (model, gs, r)
    })
}

fn data(c: f64, chirp: f64) -> Field {
    let (_, gs, _) = setup();
    gs.profile().scaled(Complex64::new(c, 0.0)).with_phase(|x| chirp * norm_sq(&x))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn verdict_is_gauge_invariant(c in 0.8f64..1.2, chirp in -0.3f64..0.3, theta in 0.0f64..std::f64::consts::TAU) {
        let (model, _, reference) = setup();
        let u = data(c, chirp);
        let rotated = u.scaled(Complex64::from_polar(1.0, theta));
        let a = classify(model, &u, reference).unwrap();
        let b = classify(model, &rotated, reference).unwrap();
        prop_assert_eq!(&a.verdict, &b.verdict);
        prop_assert!(rel(a.energy, b.energy) < 1e-12);
        prop_assert!(rel(a.mp_value, b.mp_value) < 1e-12);
        prop_assert!((a.i1_0 - b.i1_0).abs() <= 1e-12 * a.i1_0.abs().max(a.i0));
        prop_assert!(rel(a.virial_condition.lhs, b.virial_condition.lhs) < 1e-10);
    }

    #[test]
    fn verdicts_are_exclusive_and_justified(c in 0.8f64..1.2, chirp in -0.3f64..0.3) {
        let (model, _, reference) = setup();
        let r = classify(model, &data(c, chirp), reference).unwrap();
        prop_assert!(!(r.mp_above.holds && r.mp_below.holds));
        prop_assert!(!(r.i1_nonpositive.holds && r.i1_nonnegative.holds) || r.i1_0.abs() <= 1e-8 * r.i1_nonpositive.scale);
        match r.verdict {
            Verdict::BlowUp => {
                prop_assert!(r.me_above_one.holds && r.virial_condition.holds);
                prop_assert!(r.i1_nonpositive.holds && r.mp_above.holds);
            }
            Verdict::Global => {
                prop_assert!(r.me_above_one.holds && r.virial_condition.holds);
                prop_assert!(r.i1_nonnegative.holds && r.mp_below.holds);
            }
            Verdict::BlowUpByConvexity => prop_assert!(r.energy < 0.0),
            Verdict::Indeterminate { ref failed } => prop_assert!(!failed.is_empty()),
        }
    }
}

#[test]
fn outward_chirp_below_and_inward_chirp_above_are_classified() {
    // The shell-variance test needs the profile resolved on a 64^3 grid.
    let model = Model::new(Grid::new(3, 64, 12.0).unwrap(), 2.5, PotentialSpec::Zero).unwrap();
    let gs = solve_ground_state(&model, OmegaMode::Fixed { omega: 1.0 }, &SolverOptions::default()).unwrap();
    let reference = Reference::from_ground_state(&gs, Branch::Free, 2.5);
    let at = |c: f64, chirp: f64| gs.profile().scaled(Complex64::new(c, 0.0)).with_phase(|x| chirp * norm_sq(&x));
    let blow = classify(&model, &at(1.05, -0.1), &reference).unwrap();
    let glob = classify(&model, &at(0.95, 0.1), &reference).unwrap();
    assert_eq!(blow.verdict, Verdict::BlowUp, "{:?}", blow.verdict);
    assert_eq!(glob.verdict, Verdict::Global, "{:?}", glob.verdict);
}

#[test]
fn ground_state_itself_is_on_the_threshold() {
    let (model, gs, reference) = setup();
    let r = classify(model, gs.profile(), reference).unwrap();
    assert!((r.me.unwrap() - 1.0).abs() < 1e-10);
    assert!(!r.me_above_one.holds);
    assert!(matches!(r.verdict, Verdict::Indeterminate { .. }));
}
