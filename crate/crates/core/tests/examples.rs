use varlp::experiments::{golden_reference, reproduce_example, EXAMPLE_IDS};
use varlp::Verdict;

fn expected(id: &str) -> (Verdict, &'static [&'static str]) {
    match id {
        "ex-1.2" => (Verdict::Fails, &["ratio(81) / ratio(9) >= 8"]),
        "rmk-1.8b" => (
            Verdict::Fails,
            &[
                "omega: admissible kappa exists",
                "omega.kappa3: partial modulars stabilize",
            ],
        ),
        "ex-1.6" | "ex-1.9b" | "rmk-1.8a" => (Verdict::Fails, &[]),
        _ => (Verdict::Holds, &[]),
    }
}

#[test]
fn every_example_matches_its_golden_table() {
    for id in EXAMPLE_IDS {
        let rep = reproduce_example(id).unwrap();
        let golden = golden_reference(id).unwrap_or_else(|| panic!("{id}: no golden table"));
        rep.compare_golden(golden).unwrap_or_else(|e| panic!("{id}: {e}"));
        let (verdict, failing) = expected(id);
        assert_eq!(rep.verdict, verdict, "{id}");
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, failing, "{id}");
        assert_eq!(rep.exit_code(), verdict.exit_code(), "{id}");
    }
}

#[test]
fn reruns_are_identical() {
    for id in ["ex-1.2", "rmk-1.8a"] {
        let a = serde_json::to_string(&reproduce_example(id).unwrap()).unwrap();
        let b = serde_json::to_string(&reproduce_example(id).unwrap()).unwrap();
        assert_eq!(a, b, "{id}");
    }
}

#[test]
fn unknown_id_lists_the_known_ones() {
    let err = reproduce_example("ex-2.0").unwrap_err().to_string();
    assert!(EXAMPLE_IDS.iter().all(|id| err.contains(id)), "{err}");
}
