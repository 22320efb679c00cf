use esl_verify::{checks, find};

#[test]
fn ids_are_unique_and_findable() {
    let ids: Vec<_> = checks().iter().map(|c| c.id).collect();
    assert_eq!(ids.len(), 14);
    for id in &ids {
        assert_eq!(ids.iter().filter(|x| *x == id).count(), 1);
        assert_eq!(find(id).unwrap().id, *id);
    }
    assert!(find("nope").is_none());
}

#[test]
fn tightened_tolerance_fails() {
    for id in ["spinor-parameters", "gibbs-identity", "rk4-order", "continuation-sign"] {
        let check = find(id).unwrap();
        assert!(check.run(1.0).passed(), "{id} at nominal tolerance");
        let strict = check.run(1e9);
        assert!(!strict.passed(), "{id} survived tightening");
        assert!(strict.to_string().starts_with("FAIL"));
    }
}
