mod support;

use permeaflow::experiments::{CaseKind, CaseSpec};
use permeaflow::scheme::Stepper;

#[test]
fn one_step_matches_monolithic_reference() {
    let dt = 1e-3;
    let spec = CaseSpec::new(CaseKind::Convergence2D { h: 1.0 / 32.0, dt }).unwrap();
    let cfg = spec.solver_config();
    let mut stepper = Stepper::new(spec.initial_state().unwrap().grid(), spec.params, cfg, spec.bc).unwrap();
    let mut s = spec.initial_state().unwrap();
    for _ in 0..2 {
        s = stepper.advance(&s).unwrap().0;
    }
    assert!(s.p.max_abs() > 0.0);
    let reference = support::oracle_step(&s, &spec.params, dt);
    let (next, _) = stepper.advance(&s).unwrap();
    for (name, d) in support::compare(&next, &reference) {
        assert!(d <= 1e-8, "{name}: relative difference {d:.3e}");
    }
}
