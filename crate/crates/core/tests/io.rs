mod common;

use common::*;
use fr_core::io::{
    read_data_matrix, read_trajectory, to_json_string, write_data_matrix, write_trajectory, RecoveryReportJson,
    SamplingSpec, SystemSpec,
};
use fr_core::{canonical_dual, iterate, recover_two_sample, sample, spectral_radius, DataMatrixF64, SubspaceF64};
use proptest::prelude::*;
use std::fs::File;

#[test]
fn trajectory_and_data_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fr_core::random_instance::<f64>(3, 5, 4, 0.6, 2).unwrap();
    let states = iterate(&inst.system, 7).unwrap();
    let data = sample(&states, &inst.sampling).unwrap();

    let tpath = dir.path().join("trajectory.csv");
    let dpath = dir.path().join("data.csv");
    write_trajectory(&states, File::create(&tpath).unwrap()).unwrap();
    write_data_matrix(&data, File::create(&dpath).unwrap()).unwrap();

    let states_back = read_trajectory::<f64, _>(File::open(&tpath).unwrap()).unwrap();
    let data_back: DataMatrixF64 = read_data_matrix(File::open(&dpath).unwrap()).unwrap();
    assert_eq!(states_back, states);
    assert_eq!(data_back, data);

    let text = std::fs::read_to_string(&dpath).unwrap();
    assert!(text.starts_with("n,j,re,im\n"));
    assert_eq!(text.lines().count(), 1 + 7 * 4);
}

#[test]
fn duplicate_entries_rejected() {
    let text = "n,j,re,im\n0,0,1,0\n0,0,2,0\n";
    assert!(read_data_matrix::<f64, _>(text.as_bytes()).is_err());
}

#[test]
fn malformed_number_rejected() {
    let text = "n,j,re,im\n0,0,one,0\n";
    assert!(read_data_matrix::<f64, _>(text.as_bytes()).is_err());
}

#[test]
fn dense_system_spec_builds_exactly() {
    let spec: SystemSpec = serde_json::from_str(
        r#"{
            "dim": 2,
            "A": {"kind": "dense", "rows": [[0.5, [0.0, 0.1]], [0, 0.25]]},
            "W": {"basis": [[1, 0]]},
            "w": [2, 0],
            "x0": [[0, 1], 1]
        }"#,
    )
    .unwrap();
    let sys = spec.build::<f64>().unwrap();
    assert_eq!(sys.operator().matrix()[(0, 1)], fr_core::cx(0.0, 0.1));
    assert_eq!(sys.space().rank(), 1);
    assert_eq!(sys.initial().as_slice()[0], fr_core::cx(0.0, 1.0));
}

#[test]
fn source_outside_subspace_rejected() {
    let spec: SystemSpec = serde_json::from_str(
        r#"{"dim": 2, "A": {"kind": "zero"}, "W": {"basis": [[1, 0]]}, "w": [0, 1]}"#,
    )
    .unwrap();
    assert!(spec.build::<f64>().is_err());
}

#[test]
fn wrong_length_vector_rejected() {
    let spec: SystemSpec = serde_json::from_str(r#"{"dim": 3, "A": {"kind": "identity"}, "w": [1, 0]}"#).unwrap();
    assert!(spec.build::<f64>().is_err());
}

#[test]
fn random_contraction_is_seeded() {
    let spec: SystemSpec =
        serde_json::from_str(r#"{"dim": 6, "A": {"kind": "random_contraction", "rho": 0.4}, "seed": 9}"#).unwrap();
    let a = spec.build::<f64>().unwrap();
    let b = spec.build::<f64>().unwrap();
    assert_eq!(a.operator().matrix(), b.operator().matrix());
    assert_eq!(a.source(), b.source());
    assert!((spectral_radius(a.operator()).unwrap() - 0.4).abs() < 1e-6);
    let c = spec.build_with_seed::<f64>(10).unwrap();
    assert_ne!(a.operator().matrix(), c.operator().matrix());
}

#[test]
fn sampling_specs() {
    let ortho: SamplingSpec = serde_json::from_str(r#"{"kind": "orthonormal"}"#).unwrap();
    assert_eq!(ortho.build::<f64>(3, 0).unwrap().len(), 3);
    let scaled: SamplingSpec = serde_json::from_str(r#"{"kind": "scaled_basis"}"#).unwrap();
    let g = scaled.build::<f64>(4, 0).unwrap();
    assert!((g.get(3).norm() - 0.25).abs() < 1e-15);
    let random: SamplingSpec = serde_json::from_str(r#"{"kind": "random", "count": 5}"#).unwrap();
    assert_eq!(random.build::<f64>(3, 1).unwrap(), random.build::<f64>(3, 1).unwrap());
    let explicit: SamplingSpec = serde_json::from_str(r#"{"kind": "vectors", "vectors": [[1, 0], [[0, 1], 1]]}"#).unwrap();
    assert_eq!(explicit.build::<f64>(2, 0).unwrap().len(), 2);
    assert!(explicit.build::<f64>(3, 0).is_err());
}

#[test]
fn report_json_round_trips_at_full_precision() {
    let mut r = rng(4);
    let a = random_operator_with_norm(&mut r, 4, 0.8);
    let g = fr_core::VectorSystemF64::from_columns(&random_matrix(&mut r, 4, 6)).unwrap();
    let dual = canonical_dual(&g, &SubspaceF64::full(4)).unwrap();
    let sys = fr_core::DiscreteSystemF64::new(a, SubspaceF64::full(4), random_vec(&mut r, 4), random_vec(&mut r, 4)).unwrap();
    let d = sample(&iterate(&sys, 2).unwrap(), &g).unwrap();
    let rep = recover_two_sample(d.row(0), d.row(1), sys.operator(), &g, &dual).unwrap().with_truth(sys.source());
    let json = RecoveryReportJson::from(&rep);
    let text = to_json_string(&json).unwrap();
    let back: RecoveryReportJson = serde_json::from_str(&text).unwrap();
    assert_eq!(back, json);
    assert_eq!(back.residual, rep.residual);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..6, j in 1usize..6) {
        let mut r = rng(seed);
        let d = DataMatrixF64::from_rows((0..n).map(|_| random_dvec(&mut r, j) * fr_core::C64::new(1e3, 0.0)).collect()).unwrap();
        let mut buf = Vec::new();
        write_data_matrix(&d, &mut buf).unwrap();
        let back: DataMatrixF64 = read_data_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(back, d);
    }
}
