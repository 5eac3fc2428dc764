use zslab::verify::{registry, run_check, run_suite};
use zslab::{Params, Status, SuiteConfig};

const CHEAP: &[&str] = &["carlitz", "lem23", "lemAP", "dist_theorem", "daleth_bound", "cgp_distance", "closed_forms", "c5_shapes", "cf_vs_bruteforce"];

fn strip(mut r: zslab::CheckReport) -> zslab::CheckReport {
    r.elapsed_ms = 0;
    r
}

#[test]
fn results_do_not_depend_on_parallelism() {
    let include: Vec<String> = CHEAP.iter().map(|s| s.to_string()).collect();
    let one = run_suite(&SuiteConfig { include: include.clone(), jobs: 1, ..Default::default() }).unwrap();
    let many = run_suite(&SuiteConfig { include, jobs: 4, ..Default::default() }).unwrap();
    let a: Vec<String> = one.into_iter().map(|r| serde_json::to_string(&strip(r)).unwrap()).collect();
    let b: Vec<String> = many.into_iter().map(|r| serde_json::to_string(&strip(r)).unwrap()).collect();
    assert_eq!(a, b);
    assert_eq!(a.len(), CHEAP.len());
}

#[test]
fn documented_outcomes() {
    let cfg = SuiteConfig { jobs: 1, ..Default::default() };
    let r = run_check("carlitz", &Params::new().with("group", "C2"), &cfg).unwrap();
    assert_eq!(r.status, Status::Pass);
    let r = run_check("prop3u", &Params::new().with("group", "C2^2xC4"), &cfg).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert!(r.summary.contains("3 ∉ U"));
    let r = run_check("lemAP", &Params::new().with("n", 3).with("k", 2), &cfg).unwrap();
    assert!(r.witnesses.iter().any(|w| w.contains("{4,5,6}")));
}

#[test]
fn every_check_fails_loudly_when_tampered() {
    for name in CHEAP {
        let cfg = SuiteConfig { jobs: 1, tamper: Some(name.to_string()), ..Default::default() };
        let r = run_check(name, &Params::new(), &cfg).unwrap();
        assert_eq!(r.status, Status::Fail, "{name}");
        assert!(!r.witnesses.is_empty());
        assert!(r.reproduce.iter().all(|c| c.starts_with("zslab ")), "{name}: {:?}", r.reproduce);
    }
}

#[test]
fn small_bounds_are_inconclusive_not_failures() {
    let cfg = SuiteConfig { jobs: 1, ..Default::default() };
    let r = run_check("dist_theorem", &Params::new().with("group", "C6").with("bound", 6), &cfg).unwrap();
    assert_eq!(r.status, Status::InconclusiveBound, "{r:?}");
    assert!(!r.reproduce.is_empty());
}

#[test]
fn registry_names_are_unique() {
    let names: std::collections::BTreeSet<_> = registry().iter().map(|r| r.0).collect();
    assert_eq!(names.len(), registry().len());
}
