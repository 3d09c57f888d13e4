//! Recovery of a constant source term `w` in `x_{n+1} = A x_n + w` from
//! time-space samples `⟨x_n, g_j⟩`.
//!
//! The state space is a finite truncation of `ℓ²` with complex entries. The
//! inner product is linear in its first argument.
//!
//! ```
//! use fr_core::{recover_two_sample, DiscreteSystemF64, HOperatorF64, HVectorF64, SubspaceF64, VectorSystemF64};
//!
//! let a = HOperatorF64::diagonal_real(&[0.5, 0.25]).unwrap();
//! let w = HVectorF64::from_real(&[1.0, -1.0]).unwrap();
//! let x0 = HVectorF64::from_real(&[3.0, 2.0]).unwrap();
//! let sys = DiscreteSystemF64::new(a.clone(), SubspaceF64::full(2), w.clone(), x0).unwrap();
//!
//! let g = VectorSystemF64::orthonormal_basis(2);
//! let states = fr_core::iterate(&sys, 2).unwrap();
//! let d = fr_core::sample(&states, &g).unwrap();
//! let report = recover_two_sample(d.row(0), d.row(1), &a, &g, &g).unwrap();
//! assert!(report.w_hat.distance(&w) < 1e-12);
//! ```

pub mod dynamics;
pub mod error;
pub mod frames;
pub mod hilbert;
pub mod io;
pub mod measurement;
pub mod recovery;
pub mod scalar;
pub mod scenarios;

pub use dynamics::{
    attraction_profile, check_stationarity, closed_form, evolve_continuous, expm, iterate, iterate_time_varying, run,
    sample, stationary_adjoint_system, stationary_map, stationary_map_for, stationary_matrix, ContinuousSystem,
    DiscreteSystem, GeneralSystem, LinearDynamics, MultiStepSystem, StationaryMap, Trajectory,
};
pub use error::{Error, Result};
pub use frames::{
    bessel_bound, canonical_dual, coefficient_matrix, expansion_residual, frame_bounds_on, reconstruction_residual,
    recoverability_system, top_bessel_direction, FrameBounds, VectorSystem,
};
pub use hilbert::{geometric_sum, project, resolvent_at_one, spectral_radius, HOperator, HVector, Resolvent, Subspace};
pub use measurement::{
    argmax_row, is_strong, limit_synthesis, linfty_ratio, norm_finite, norm_sup, norms_report, operator_norm_ratio,
    row_maximizer, row_synthesis, tail_window, DataMatrix, NormsReport, StrongTest, DEFAULT_CAUCHY_EPS,
};
pub use recovery::{
    estimate_stability, observed_decay_rate, recover_continuous, recover_from_pair, recover_general_form,
    recover_infinite, recover_infinite_for_system, recover_pair_averaged, recover_time_varying, recover_two_sample,
    recovery_matrix, sample_curve, DifferenceScheme, FnRecovery, FrameRecovery, InfiniteHorizonRecovery,
    LinearRecovery, RecoveryMethod, RecoveryReport, ResidualKind, SampledCurve, DEFAULT_MAX_ROWS,
};
pub use scalar::{cx, modulus, re, Real};
pub use scenarios::{
    build_adversarial, build_unstable, default_lambdas, random_instance, restricted_min_singular_value,
    verify_impossibility, AdversarialInstance, ImpossibilityReport, RandomInstance, UnstableInstance,
    UnstableRecovery,
};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;

pub type HVectorF64 = HVector<f64>;
pub type HOperatorF64 = HOperator<f64>;
pub type SubspaceF64 = Subspace<f64>;
pub type VectorSystemF64 = VectorSystem<f64>;
pub type DataMatrixF64 = DataMatrix<f64>;
pub type DiscreteSystemF64 = DiscreteSystem<f64>;
pub type ContinuousSystemF64 = ContinuousSystem<f64>;
pub type RecoveryReportF64 = RecoveryReport<f64>;

pub type HVectorF32 = HVector<f32>;
pub type HOperatorF32 = HOperator<f32>;
pub type SubspaceF32 = Subspace<f32>;
pub type VectorSystemF32 = VectorSystem<f32>;
pub type DataMatrixF32 = DataMatrix<f32>;
pub type DiscreteSystemF32 = DiscreteSystem<f32>;
pub type ContinuousSystemF32 = ContinuousSystem<f32>;
pub type RecoveryReportF32 = RecoveryReport<f32>;
