use permeaflow::experiments::CaseKind;
use permeaflow::io::{parse_config, render_config};
use permeaflow::Error;
use proptest::prelude::*;

#[test]
fn every_case_round_trips_with_defaults() {
    for name in CaseKind::ALL_NAMES {
        let cfg = parse_config(&format!("[{name}]\n")).unwrap();
        let echoed = render_config(&cfg);
        assert_eq!(parse_config(&echoed).unwrap(), cfg, "{name}:\n{echoed}");
        assert_eq!(render_config(&parse_config(&echoed).unwrap()), echoed);
    }
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let cfg = parse_config("# header\n\n[TwoInterface1D]\n  # note\nK = 0.5  # inline\n").unwrap();
    assert_eq!(cfg.case.params.k, 0.5);
}

#[test]
fn invalid_values_name_line_and_key() {
    let cases = [
        ("[ShearDrop]\nM = 0\n", 2, "m"),
        ("[ShearDrop]\n\ndt = abc\n", 3, "dt"),
        ("[Convergence2D]\nh = 1/63.5\n", 2, "h"),
    ];
    for (text, line, key) in cases {
        match parse_config(text) {
            Err(Error::Parse { line: l, key: k, .. }) => {
                assert_eq!((l, k.as_str()), (line, key), "{text}");
            }
            other => panic!("{text}: expected a parse error, got {other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn echoed_config_reproduces_itself(
        case in 0usize..CaseKind::ALL_NAMES.len(),
        re in 1e-3f64..1e4,
        ca in 1e-3f64..1e2,
        pe in 1e-3f64..1e3,
        m in 1e-5f64..1.0,
        s in 0.0f64..8.0,
        end in 1e-3f64..10.0,
        lin_tol in 1e-14f64..1e-6,
        seed in any::<u64>(),
    ) {
        let name = CaseKind::ALL_NAMES[case];
        let text = format!(
            "[{name}]\nRe = {re}\nCa = {ca}\nPe = {pe}\nM = {m}\ns = {s}\nend_time = {end}\nlin_tol = {lin_tol}\nseed = {seed}\n"
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.case.params.re, re);
        prop_assert_eq!(cfg.solver.lin_tol, lin_tol);
        let again = parse_config(&render_config(&cfg)).unwrap();
        prop_assert_eq!(again, cfg);
    }
}
