use gauss_sphere::report::suite::{run_suite, Profile, SuiteOptions};
use gauss_sphere::series::CoefficientSource;

#[test]
fn quick_profile_passes_and_printed_form_fails() {
    let good = run_suite(SuiteOptions::default());
    for i in &good.invariants {
        assert!(i.passed, "{} {}", i.name, i.detail);
    }
    assert!(good.passed);
    let json = serde_json::to_value(&good).unwrap();
    assert_eq!(json["criteria"].as_array().unwrap().len(), 10);

    let bad = run_suite(SuiteOptions {
        profile: Profile::Quick,
        source: CoefficientSource::PrintedClosedForm,
    });
    assert!(!bad.passed);
    let c4 = bad.criteria.iter().find(|c| c.id == 4).unwrap();
    assert!(!c4.passed);
    assert!(c4.detail["failures"].as_array().unwrap().iter().any(|f| f["k"] == 3));
}
