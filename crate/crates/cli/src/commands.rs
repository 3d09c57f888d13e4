//! Subcommand bodies. Each returns what should be printed; files named in
//! the config are written as a side effect.

use crate::config::{Config, ScenarioConfig};
use crate::error::CliError;
use fr_core::io::{
    read_data_matrix, to_json_string, write_data_matrix, write_trajectory, OperatorSpec, RecoveryReportJson,
    SamplingSpec, SubspaceSpec, SystemSpec,
};
use fr_core::{
    bessel_bound, build_adversarial, build_unstable, canonical_dual, estimate_stability, frame_bounds_on, iterate,
    norms_report, random_instance, recover_continuous, recover_general_form, recover_infinite_for_system,
    recover_time_varying, sample, sample_curve, spectral_radius, stationary_adjoint_system, verify_impossibility,
    ContinuousSystemF64, DataMatrixF64, DiscreteSystemF64, FrameBounds, InfiniteHorizonRecovery, LinearRecovery,
    RecoveryMethod, RecoveryReportF64, SubspaceF64, VectorSystemF64,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::path::Path;

pub const VERDICT_FINITE: &str = "recoverable-finite";
pub const VERDICT_INFINITE: &str = "recoverable-infinite";
pub const VERDICT_FAILS: &str = "necessary-condition-fails";

const DEFAULT_STEP: f64 = 1e-3;

pub enum Rendered {
    Json(Value),
    /// Raw CSV for stdout.
    Csv(String),
}

/// The system and sampling an invocation works on.
pub struct Experiment {
    pub system: DiscreteSystemF64,
    pub sampling: VectorSystemF64,
    /// Truncation of a sampling family whose lower frame bound tends to zero
    /// with the dimension, so no finite truncation certifies a frame.
    pub degenerate_family: bool,
    pub default_horizon: usize,
}

pub fn experiment(cfg: &Config) -> Result<Experiment, CliError> {
    let seed = cfg.seed();
    let Some(scenario) = &cfg.scenario else {
        let spec = cfg.system.as_ref().ok_or_else(|| CliError::config("config needs either a system or a scenario"))?;
        let system = spec.build_with_seed::<f64>(seed)?;
        let sampling = cfg.sampling.clone().unwrap_or(SamplingSpec::Orthonormal).build(system.dim(), seed)?;
        return Ok(Experiment { system, sampling, degenerate_family: false, default_horizon: 2 });
    };
    if cfg.system.is_some() || cfg.sampling.is_some() {
        return Err(CliError::config("a scenario defines its own system and sampling; drop system/sampling"));
    }
    match scenario {
        ScenarioConfig::Adversarial { horizon, lambdas, c, dim } => {
            let inst = build_adversarial::<f64>(*horizon, lambdas.as_deref(), c.to_complex(), dim.unwrap_or(horizon + 3))?;
            Ok(Experiment {
                system: inst.system(),
                sampling: inst.sampling(),
                degenerate_family: false,
                default_horizon: horizon + 1,
            })
        }
        ScenarioConfig::Unstable { dim } => {
            let inst = build_unstable::<f64>(*dim)?;
            let base = unstable_source(*dim, seed)?;
            Ok(Experiment {
                system: inst.system(base.initial().clone(), base.source().clone())?,
                sampling: inst.sampling,
                degenerate_family: true,
                default_horizon: 2,
            })
        }
        ScenarioConfig::Random { dim, count, rho, subspace_dim } => {
            let inst = random_instance::<f64>(seed, *dim, *count, *rho, subspace_dim.unwrap_or(*dim))?;
            Ok(Experiment { system: inst.system, sampling: inst.sampling, degenerate_family: false, default_horizon: 2 })
        }
    }
}

/// Seeded source and zero start for the identity dynamics.
fn unstable_source(dim: usize, seed: u64) -> Result<DiscreteSystemF64, CliError> {
    let spec = SystemSpec {
        dim,
        operator: OperatorSpec::Identity,
        space: SubspaceSpec::default(),
        w: None,
        x0: None,
        seed: None,
    };
    Ok(spec.build_with_seed::<f64>(seed)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub subspace_rank: usize,
    pub is_frame: bool,
}

impl From<FrameBounds<f64>> for Bounds {
    fn from(b: FrameBounds<f64>) -> Self {
        Self { lower: b.lower, upper: b.upper, subspace_rank: b.subspace_rank, is_frame: b.is_frame() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub dim: usize,
    pub sampling_count: usize,
    pub spectral_radius: f64,
    pub bessel_bound: f64,
    /// Bounds of `G` on the whole space.
    pub frame_bounds_space: Bounds,
    /// Bounds of `G` on `W`.
    pub frame_bounds_subspace: Bounds,
    /// Bounds of `{P_W (I − A*)⁻¹ g_j}` on `W`; absent when `1 ∈ σ(A)`.
    pub stationary_system_bounds: Option<Bounds>,
    pub lower_bound_vanishes_with_dim: bool,
    pub verdicts: Vec<&'static str>,
}

impl Analysis {
    pub fn finite(&self) -> bool {
        self.verdicts.contains(&VERDICT_FINITE)
    }

    pub fn infinite(&self) -> bool {
        self.verdicts.contains(&VERDICT_INFINITE)
    }
}

pub fn analysis(e: &Experiment) -> Result<Analysis, CliError> {
    let sys = &e.system;
    let d = sys.dim();
    let rho = spectral_radius(sys.operator())?;
    let space = Bounds::from(frame_bounds_on(&e.sampling, &SubspaceF64::full(d))?);
    let sub = Bounds::from(frame_bounds_on(&e.sampling, sys.space())?);
    let stationary = match stationary_adjoint_system(sys, &e.sampling) {
        Ok(adj) => Some(Bounds::from(frame_bounds_on(&adj, sys.space())?)),
        Err(fr_core::Error::IllConditionedResolvent { .. }) => None,
        Err(err) => return Err(err.into()),
    };
    let mut verdicts = Vec::new();
    if space.is_frame && !e.degenerate_family {
        verdicts.push(VERDICT_FINITE);
    }
    if rho < 1.0 && stationary.as_ref().is_some_and(|b| b.is_frame) {
        verdicts.push(VERDICT_INFINITE);
    }
    if verdicts.is_empty() {
        verdicts.push(VERDICT_FAILS);
    }
    Ok(Analysis {
        dim: d,
        sampling_count: e.sampling.len(),
        spectral_radius: rho,
        bessel_bound: bessel_bound(&e.sampling),
        frame_bounds_space: space,
        frame_bounds_subspace: sub,
        stationary_system_bounds: stationary,
        lower_bound_vanishes_with_dim: e.degenerate_family,
        verdicts,
    })
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|err| CliError::config(format!("cannot write {}: {err}", path.display())))
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("plain data serializes")
}

fn write_report(cfg: &Config, value: &Value) -> Result<(), CliError> {
    if let Some(path) = &cfg.output.report {
        let text = to_json_string(value)?;
        std::fs::write(path, text + "\n")
            .map_err(|err| CliError::config(format!("cannot write {}: {err}", path.display())))?;
    }
    Ok(())
}

fn simulate_rows(e: &Experiment, rows: usize) -> Result<DataMatrixF64, CliError> {
    Ok(sample(&iterate(&e.system, rows)?, &e.sampling)?)
}

/// Data from `cfg.data` when given, otherwise simulated. The flag says
/// whether the true source is known.
fn data_matrix(cfg: &Config, e: &Experiment) -> Result<(DataMatrixF64, bool), CliError> {
    match &cfg.data {
        Some(path) => {
            let file = File::open(path).map_err(|err| CliError::config(format!("cannot open {}: {err}", path.display())))?;
            let d: DataMatrixF64 = read_data_matrix(file)?;
            if d.col_count() != e.sampling.len() {
                return Err(CliError::config(format!(
                    "data has {} columns but the sampling system has {} vectors",
                    d.col_count(),
                    e.sampling.len()
                )));
            }
            Ok((d, false))
        }
        None => Ok((simulate_rows(e, cfg.horizon.unwrap_or(e.default_horizon))?, true)),
    }
}

pub fn simulate(cfg: &Config) -> Result<Rendered, CliError> {
    let e = experiment(cfg)?;
    let rows = cfg.horizon.unwrap_or(e.default_horizon);
    let states = iterate(&e.system, rows)?;
    let data = sample(&states, &e.sampling)?;
    let out = &cfg.output;
    if out.trajectory.is_none() && out.data.is_none() {
        let mut buf = Vec::new();
        write_data_matrix(&data, &mut buf)?;
        return Ok(Rendered::Csv(String::from_utf8(buf).expect("CSV is UTF-8")));
    }
    if let Some(path) = &out.trajectory {
        write_trajectory(&states, create(path)?)?;
    }
    if let Some(path) = &out.data {
        write_data_matrix(&data, create(path)?)?;
    }
    let value = json!({
        "rows": rows,
        "dim": e.system.dim(),
        "sampling_count": e.sampling.len(),
        "trajectory": out.trajectory.as_ref().map(|p| p.display().to_string()),
        "data": out.data.as_ref().map(|p| p.display().to_string()),
    });
    write_report(cfg, &value)?;
    Ok(Rendered::Json(value))
}

pub fn analyze(cfg: &Config) -> Result<Rendered, CliError> {
    let e = experiment(cfg)?;
    let value = to_value(&analysis(&e)?);
    write_report(cfg, &value)?;
    Ok(Rendered::Json(value))
}

fn guard(method: RecoveryMethod, a: &Analysis) -> Result<(), CliError> {
    match method {
        RecoveryMethod::InfiniteHorizon if !a.infinite() => Err(CliError::recoverability(
            "recoverability condition fails: {P_W (I - A*)^-1 g_j} is not a frame for W with spectral radius below 1, \
             so no stable recovery map exists (pass --force to attempt anyway)",
        )),
        RecoveryMethod::InfiniteHorizon => Ok(()),
        _ if !a.finite() => Err(CliError::recoverability(
            "recoverability condition fails: the sampling vectors are not a frame for the whole space, \
             which finite-sample recovery requires (pass --force to attempt anyway)",
        )),
        _ => Ok(()),
    }
}

fn full_dual(e: &Experiment) -> Result<VectorSystemF64, CliError> {
    Ok(canonical_dual(&e.sampling, &SubspaceF64::full(e.system.dim()))?)
}

fn finish(rep: RecoveryReportF64, truth: Option<&fr_core::HVectorF64>) -> RecoveryReportF64 {
    match truth {
        Some(w) => rep.with_truth(w),
        None => rep,
    }
}

pub fn recover(cfg: &Config, force: bool) -> Result<Rendered, CliError> {
    let e = experiment(cfg)?;
    let method = cfg.recovery.method;
    if !force {
        guard(method, &analysis(&e)?)?;
    }
    let sys = &e.system;
    let eps = cfg.recovery.eps;
    let value = match method {
        RecoveryMethod::TwoSample => {
            let (d, known) = data_matrix(cfg, &e)?;
            let rep = recover_general_form(&d, sys.operator(), &e.sampling, &full_dual(&e)?)?;
            to_value(&RecoveryReportJson::from(&finish(rep, known.then(|| sys.source()))))
        }
        RecoveryMethod::InfiniteHorizon => {
            let rep = if cfg.data.is_some() || cfg.horizon.is_some() {
                let (d, known) = data_matrix(cfg, &e)?;
                let rep = InfiniteHorizonRecovery::for_dynamics(sys, &e.sampling)?.recover(&d, eps)?;
                finish(rep, known.then(|| sys.source()))
            } else {
                let rep = recover_infinite_for_system(sys, &e.sampling, Some(eps), Some(cfg.recovery.n_max))?;
                rep.with_truth(sys.source())
            };
            to_value(&RecoveryReportJson::from(&rep))
        }
        RecoveryMethod::TimeVarying => {
            let (d, known) = data_matrix(cfg, &e)?;
            let reps = recover_time_varying(&d, sys.operator(), &e.sampling, &full_dual(&e)?)?;
            let reps: Vec<_> = reps
                .into_iter()
                .map(|r| RecoveryReportJson::from(&finish(r, known.then(|| sys.source()))))
                .collect();
            json!({ "method": method, "reports": reps })
        }
        RecoveryMethod::Continuous => {
            if cfg.data.is_some() {
                return Err(CliError::config("continuous recovery samples the flow itself; drop the data file"));
            }
            let h = cfg.recovery.h.unwrap_or(DEFAULT_STEP);
            let times = cfg.t_grid.clone().unwrap_or_else(|| vec![-h, 0.0, h]);
            let flow = ContinuousSystemF64::new(sys.operator().clone(), sys.source().clone(), sys.initial().clone(), vec![0.0])?;
            let curve = sample_curve(&flow, &e.sampling, &times)?;
            let rep = recover_continuous(&curve, sys.operator(), &e.sampling, &full_dual(&e)?, h, cfg.recovery.scheme)?;
            to_value(&RecoveryReportJson::from(&rep.with_truth(sys.source())))
        }
    };
    write_report(cfg, &value)?;
    Ok(Rendered::Json(value))
}

pub fn norms(cfg: &Config) -> Result<Rendered, CliError> {
    let e = experiment(cfg)?;
    let (d, _) = data_matrix(cfg, &e)?;
    let value = to_value(&norms_report(&d, cfg.recovery.eps)?);
    write_report(cfg, &value)?;
    Ok(Rendered::Json(value))
}

pub fn scenario(cfg: &Config) -> Result<Rendered, CliError> {
    let scenario = cfg.scenario.as_ref().ok_or_else(|| CliError::config("the scenario command needs a scenario"))?;
    let seed = cfg.seed();
    let value = match scenario {
        ScenarioConfig::Adversarial { horizon, lambdas, c, dim } => {
            let inst = build_adversarial::<f64>(*horizon, lambdas.as_deref(), c.to_complex(), dim.unwrap_or(horizon + 3))?;
            let rep = verify_impossibility(&inst)?;
            let mut value = to_value(&rep);
            value["condition"] = json!(inst.condition);
            value["kind"] = json!("adversarial");
            if !rep.passed {
                write_report(cfg, &value)?;
                return Err(CliError::numerical(format!(
                    "impossibility checks did not all pass: {}",
                    to_json_string(&value)?
                )));
            }
            value
        }
        ScenarioConfig::Unstable { dim } => {
            let inst = build_unstable::<f64>(*dim)?;
            let base = unstable_source(*dim, seed)?;
            let sys = inst.system(base.initial().clone(), base.source().clone())?;
            let data = sample(&iterate(&sys, 2)?, &inst.sampling)?;
            let residual = inst.recovery.recover_map(&data)?.distance(sys.source());
            let estimate: f64 = estimate_stability(&inst.recovery, 2, *dim, 4, seed)?;
            let bounds = frame_bounds_on(&inst.sampling, &SubspaceF64::full(*dim))?;
            json!({
                "kind": "unstable",
                "dim": dim,
                "residual": residual,
                "stability_estimate": estimate,
                "bessel_bound": bounds.upper,
                "frame_lower_bound": bounds.lower,
            })
        }
        ScenarioConfig::Random { dim, count, rho, subspace_dim } => {
            let inst = random_instance::<f64>(seed, *dim, *count, *rho, subspace_dim.unwrap_or(*dim))?;
            json!({
                "kind": "random",
                "seed": seed,
                "dim": dim,
                "sampling_count": count,
                "spectral_radius": spectral_radius(inst.system.operator())?,
                "frame_condition": inst.frame_condition,
                "full_frame": inst.full_frame,
                "stationary_system_bounds": Bounds::from(inst.adjoint_bounds),
            })
        }
    };
    write_report(cfg, &value)?;
    Ok(Rendered::Json(value))
}
