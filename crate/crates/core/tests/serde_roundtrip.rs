use dimer::bifurcation::{critical_xi, find_fixed_points, FixedPoint};
use dimer::dynamics::{integrate, Trajectory};
use dimer::fluctuation::{predict, FluctuationReport, Variant};
use dimer::quantum::{build, ground_state, QuantumGroundReport};
use dimer::{ModelParams, PhasePoint};
use proptest::prelude::*;

fn round_trip<T>(value: &T) -> T
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    serde_json::from_str(&serde_json::to_string(value).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_points_round_trip(xi in -4.0..4.0f64, delta in -0.5..0.5f64) {
        let fps = find_fixed_points(xi, delta).unwrap();
        let back: Vec<FixedPoint> = round_trip(&fps);
        prop_assert_eq!(back, fps);
    }

    #[test]
    fn model_params_round_trip(n in 1usize..5000, g in 0.01..10.0f64, gb in -1.0..1.0f64, t in -1.0..1.0f64) {
        let p = ModelParams::new(n, g, gb, t).unwrap();
        prop_assert_eq!(round_trip(&p), p);
    }

    #[test]
    fn fluctuation_reports_round_trip(xi in 0.0..4.0f64, n in 10usize..1000) {
        let p = ModelParams::from_reduced(n, xi, 0.0).unwrap();
        let s = *find_fixed_points(xi, 0.0).unwrap().iter().find(|f| f.branch == dimer::bifurcation::Branch::S).unwrap();
        let r = predict(&s, &p, Variant::Generic).unwrap();
        let back: FluctuationReport = round_trip(&r);
        prop_assert_eq!(back, r);
    }
}

#[test]
fn larger_reports_round_trip() {
    let c = critical_xi(0.1).unwrap();
    assert_eq!(round_trip(&c), c);

    let traj = integrate(PhasePoint::new(0.3, 0.2).unwrap(), 1.0, 0.1, 5.0, 0.02).unwrap();
    let back: Trajectory = round_trip(&traj);
    assert_eq!(back, traj);

    let p = ModelParams::from_reduced(60, 1.5, 0.0).unwrap();
    let g = ground_state(&build(&p).unwrap()).unwrap();
    let back: QuantumGroundReport = round_trip(&g);
    assert_eq!(back, g);
}
