//! Acceptance suite: one PASS/FAIL line per criterion, with wall time
//! checked against each criterion's budget. Exits nonzero on any FAIL.

mod common;

use common::*;
use fr_core::{
    argmax_row, bessel_bound, build_adversarial, build_unstable, canonical_dual, closed_form, cx, estimate_stability,
    is_strong, iterate, linfty_ratio, norm_sup, operator_norm_ratio, random_instance, recover_continuous,
    recover_two_sample, restricted_min_singular_value, row_maximizer, sample, sample_curve, verify_impossibility,
    ContinuousSystemF64, DMatrix, DataMatrixF64, DifferenceScheme, DiscreteSystemF64, InfiniteHorizonRecovery,
    LinearRecovery, SubspaceF64, VectorSystemF64, C64,
};
use std::time::{Duration, Instant};

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < budget;
    let pass = out.ok && in_time;
    println!(
        "{} [{id}] {name}: {} ({:.3} s, budget {:.0} s{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { ", over budget" },
    );
    pass
}

fn data_rows(d: &DataMatrixF64) -> Vec<Vec<C64>> {
    d.rows().iter().map(|r| r.iter().copied().collect()).collect()
}

fn operator_norm_law() -> Outcome {
    let mut worst_attain = 0.0f64;
    let mut exceeded = 0usize;
    for seed in 0..50u64 {
        let mut r = rng(1000 + seed);
        let n = 1 + (seed % 7) as usize;
        let j = 1 + (seed % 5) as usize * 2;
        let d = DataMatrixF64::from_rows((0..n).map(|_| random_dvec(&mut r, j)).collect()).unwrap();
        let sup = norm_sup(&d);
        // oracle: largest row norm by hand
        let oracle = d.rows().iter().map(|row| naive_norm(row.as_slice())).fold(0.0, f64::max);
        let x = row_maximizer(&d, argmax_row(&d));
        let attained = linfty_ratio(&d, &x).unwrap();
        worst_attain = worst_attain.max((attained - oracle).abs() / oracle).max((sup - oracle).abs() / oracle);
        for _ in 0..1000 {
            let probe = random_dvec(&mut r, j);
            if linfty_ratio(&d, &probe).unwrap() > sup * (1.0 + 1e-9) {
                exceeded += 1;
            }
        }
    }
    Outcome {
        ok: worst_attain < 1e-10 && exceeded == 0,
        detail: format!("worst relative gap {worst_attain:.2e}, probes above sup {exceeded}"),
    }
}

fn synthesis_norm_exactness() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let mut r = rng(2000 + seed);
        let d = 3 + (seed % 6) as usize;
        let j = 2 + (seed % 9) as usize;
        let g = VectorSystemF64::from_columns(&random_matrix(&mut r, d, j)).unwrap();
        let ratio = operator_norm_ratio(&g, 64, seed).unwrap();
        // oracle: top singular value of the synthesis matrix
        let want = spectral_norm(g.synthesis_matrix());
        worst = worst.max((ratio - want).abs() / want);
        worst = worst.max((bessel_bound(&g).sqrt() - want).abs() / want);
    }
    Outcome { ok: worst < 1e-8, detail: format!("worst relative error {worst:.2e}") }
}

fn two_sample_recovery() -> Outcome {
    let (d, j) = (32, 64);
    let mut worst_res = 0.0f64;
    let mut worst_x0 = 0.0f64;
    for seed in 0..20u64 {
        let mut r = rng(3000 + seed);
        let a = random_operator_with_norm(&mut r, d, 0.5 + 0.05 * seed as f64);
        let g = VectorSystemF64::from_columns(&random_matrix(&mut r, d, j)).unwrap();
        let dual = canonical_dual(&g, &SubspaceF64::full(d)).unwrap();
        let w = random_vec(&mut r, d);
        let mut estimates = Vec::new();
        for _ in 0..2 {
            let sys = DiscreteSystemF64::new(a.clone(), SubspaceF64::full(d), w.clone(), random_vec(&mut r, d)).unwrap();
            let data = sample(&iterate(&sys, 2).unwrap(), &g).unwrap();
            let rep = recover_two_sample(data.row(0), data.row(1), &a, &g, &dual).unwrap();
            worst_res = worst_res.max(rep.w_hat.distance(&w) / w.norm());
            estimates.push(rep.w_hat);
        }
        worst_x0 = worst_x0.max(estimates[0].distance(&estimates[1]) / w.norm());
    }
    Outcome {
        ok: worst_res < 1e-9 && worst_x0 < 1e-10,
        detail: format!("worst residual {worst_res:.2e}, worst x0 spread {worst_x0:.2e}"),
    }
}

fn infinite_horizon_recovery() -> Outcome {
    let mut accepted = 0usize;
    let mut worst_res = 0.0f64;
    let mut worst_rate = 0.0f64;
    let mut seed = 4000u64;
    while accepted < 20 && seed < 4200 {
        let inst = random_instance::<f64>(seed, 32, 6, 0.5, 4).unwrap();
        seed += 1;
        if !inst.frame_condition {
            continue;
        }
        accepted += 1;
        let rec = InfiniteHorizonRecovery::for_dynamics(&inst.system, &inst.sampling).unwrap();
        let data = sample(&iterate(&inst.system, 60).unwrap(), &inst.sampling).unwrap();
        let rep = match rec.recover(&data, 1e-10) {
            Ok(rep) => rep.with_truth(inst.system.source()),
            Err(e) => return Outcome { ok: false, detail: format!("seed {}: {e}", seed - 1) },
        };
        worst_res = worst_res.max(rep.residual);
        let rate = rep.decay_rate().unwrap_or(f64::NAN);
        worst_rate = worst_rate.max((rate - 0.5).abs());
    }
    Outcome {
        ok: accepted == 20 && worst_res < 1e-7 && worst_rate <= 0.05,
        detail: format!("{accepted} instances, worst residual {worst_res:.2e}, worst |rate - 0.5| {worst_rate:.3}"),
    }
}

fn finite_sample_impossibility() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [2usize, 3, 5] {
        let inst = build_adversarial::<f64>(n, None, cx(1.0, 0.0), n + 3).unwrap();
        let rep = verify_impossibility(&inst).unwrap();
        // oracle: hand simulation of the first N samples
        let a = DMatrix::from_diagonal(&fr_core::DVector::from_iterator(inst.dim, inst.lambdas.iter().map(|&l| cx(l, 0.0))));
        let states = naive_trajectory(&a, inst.x0.as_slice(), inst.w.scaled(inst.c).as_slice(), n);
        let lead = naive_samples(&states, &[inst.g.as_slice().to_vec()])
            .iter()
            .map(|row| row[0].norm())
            .fold(0.0, f64::max)
            / inst.g.norm();
        let sigma = restricted_min_singular_value(&inst.operator(), &inst.sampling(), &inst.space(), n).unwrap();
        let pass = lead < 1e-10 && rep.leading_max < 1e-10 && sigma < 1e-8 && rep.recovery_residual < 1e-7;
        ok &= pass;
        lines.push(format!("N={n}: lead {lead:.1e}, sigma {sigma:.1e}, residual {:.1e}", rep.recovery_residual));
    }
    Outcome { ok, detail: lines.join("; ") }
}

fn unstable_recovery() -> Outcome {
    let mut ok = true;
    let mut est = Vec::new();
    let mut worst_res = 0.0f64;
    for d in [8usize, 32, 128] {
        let inst = build_unstable::<f64>(d).unwrap();
        let mut r = rng(6000 + d as u64);
        let w = random_vec(&mut r, d);
        let sys = inst.system(random_vec(&mut r, d), w.clone()).unwrap();
        let data = sample(&iterate(&sys, 2).unwrap(), &inst.sampling).unwrap();
        let res = inst.recovery.recover_map(&data).unwrap().distance(&w);
        worst_res = worst_res.max(res);
        let e: f64 = estimate_stability(&inst.recovery, 2, d, 4, d as u64).unwrap();
        ok &= res < 1e-10 && e >= d as f64 * (1.0 - 1e-6);
        est.push(e);
    }
    let ratio = est[1] / est[0];
    ok &= (ratio - 4.0).abs() < 1e-6;
    Outcome {
        ok,
        detail: format!(
            "worst residual {worst_res:.1e}, estimates {:.6}/{:.6}/{:.6}, 8->32 ratio {ratio:.9}",
            est[0], est[1], est[2]
        ),
    }
}

fn continuous_order() -> Outcome {
    let mut ratios = Vec::new();
    for seed in 0..10u64 {
        let mut r = rng(7000 + seed);
        let d = 6;
        let a = random_operator_with_norm(&mut r, d, 1.0);
        let g = VectorSystemF64::from_columns(&random_matrix(&mut r, d, 9)).unwrap();
        let dual = canonical_dual(&g, &SubspaceF64::full(d)).unwrap();
        let sys = ContinuousSystemF64::new(a.clone(), random_vec(&mut r, d), random_vec(&mut r, d), vec![0.0]).unwrap();
        let err = |h: f64| {
            let curve = sample_curve(&sys, &g, &[-h, 0.0, h]).unwrap();
            let rep = recover_continuous(&curve, &a, &g, &dual, h, Some(DifferenceScheme::Central)).unwrap();
            rep.w_hat.distance(sys.source())
        };
        ratios.push(err(1e-2) / err(5e-3));
    }
    let worst = ratios.iter().map(|q| (q - 4.0).abs()).fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    Outcome { ok: worst <= 0.5, detail: format!("ratios in [{lo:.3}, {hi:.3}]") }
}

fn oracle_equivalence() -> Outcome {
    let mut count = 0usize;
    let mut worst = 0.0f64;
    for seed in 0..30u64 {
        let mut r = rng(8000 + seed);
        let d = 8;
        let a = random_operator_with_norm(&mut r, d, 0.4 + 0.04 * seed as f64);
        let g = VectorSystemF64::from_columns(&random_matrix(&mut r, d, 12)).unwrap();
        let dual = canonical_dual(&g, &SubspaceF64::full(d)).unwrap();
        let sys = DiscreteSystemF64::new(a.clone(), SubspaceF64::full(d), random_vec(&mut r, d), random_vec(&mut r, d)).unwrap();
        let data = sample(&iterate(&sys, 2).unwrap(), &g).unwrap();
        let rep = recover_two_sample(data.row(0), data.row(1), &a, &g, &dual).unwrap();
        let ls = least_squares_source(a.matrix(), &columns(g.synthesis_matrix()), &DMatrix::identity(d, d), &data_rows(&data));
        worst = worst.max((rep.w_hat.coords() - ls).norm());
        count += 1;
    }
    let mut seed = 8100u64;
    let mut infinite = 0usize;
    while infinite < 20 && seed < 8300 {
        let d = 3 + (seed % 3) as usize;
        let j = 2 + (seed % 2) as usize;
        let k = 1 + (seed % 2) as usize;
        let inst = random_instance::<f64>(seed, d, j, 0.5, k).unwrap();
        seed += 1;
        if !inst.frame_condition {
            continue;
        }
        let data = sample(&iterate(&inst.system, 80).unwrap(), &inst.sampling).unwrap();
        let rec = InfiniteHorizonRecovery::for_dynamics(&inst.system, &inst.sampling).unwrap();
        let rep = rec.recover(&data, 1e-10).unwrap();
        let ls = least_squares_source(
            inst.system.operator().matrix(),
            &columns(inst.sampling.synthesis_matrix()),
            inst.system.space().basis_matrix(),
            &data_rows(&data),
        );
        worst = worst.max((rep.w_hat.coords() - ls).norm());
        infinite += 1;
    }
    count += infinite;
    Outcome { ok: count >= 50 && worst < 1e-8, detail: format!("{count} instances, worst distance {worst:.2e}") }
}

fn dynamics_consistency() -> Outcome {
    let mut worst = 0.0f64;
    let mut strong_failures = 0usize;
    for seed in 0..20u64 {
        let d = 4 + (seed % 5) as usize * 4;
        let rho = 0.3 + 0.03 * seed as f64;
        let inst = random_instance::<f64>(9000 + seed, d, 3, rho, 2).unwrap();
        let sys = &inst.system;
        let states = iterate(sys, 30).unwrap();
        for (n, x) in states.iter().enumerate() {
            let c = closed_form(sys, n as u32).unwrap();
            worst = worst.max(x.distance(&c) / x.norm().max(1e-300));
        }
        // tail window starts at 3/4 of the rows, so settle to 1e-12 by then
        let horizon = (2.0 * (1e-12f64).ln() / (rho + 0.05).ln()).ceil() as usize;
        let data = sample(&iterate(sys, horizon).unwrap(), &inst.sampling).unwrap();
        let scale = 1.0 + norm_sup(&data);
        if !is_strong(&data, 1e-10 * scale).unwrap().strong {
            strong_failures += 1;
        }
    }
    Outcome {
        ok: worst < 1e-9 && strong_failures == 0,
        detail: format!("worst relative gap {worst:.2e}, not strong {strong_failures}"),
    }
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        check(1, "operator-norm law", s(1), operator_norm_law),
        check(2, "synthesis norm exactness", s(1), synthesis_norm_exactness),
        check(3, "two-sample recovery", s(2), two_sample_recovery),
        check(4, "infinite-horizon recovery", s(5), infinite_horizon_recovery),
        check(5, "finite-sample impossibility", s(2), finite_sample_impossibility),
        check(6, "unstable recovery", s(2), unstable_recovery),
        check(7, "continuous recovery order", s(2), continuous_order),
        check(8, "oracle equivalence", s(10), oracle_equivalence),
        check(9, "dynamics consistency", s(2), dynamics_consistency),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
