//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p gwb-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gwb_core::consistency::{
    is_non_increasing, run_consistency, ApproximationSchedule, MeasureSampler, Population, Target,
};
use gwb_core::random::{
    dirichlet, lift_1d, measure_1d, particle_state, signed_family, signed_weights, weighted_steps, weighted_steps_on,
};
use gwb_core::{
    argmin_certificate, barycenter, barycenter_quantile, distance_l2, evolve, extrapolation_identity,
    first_collision_time, gauss_dirac_params, lower_bound, project_envelope, project_pava, solve_w2, stability_gap,
    w2_1d, weighted_quantile_sum, DiscreteMeasure1D, DiscreteMeasureRd, GaussianParams, SignedFamily,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn counterexample_energies() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_gwb"))
        .args(["counterexample", "--samples", "500", "--seed", "1"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let field = |k: &str| report[k].as_f64().ok_or_else(|| format!("missing {k}"));
    let (eta, s_eta, diag) = (field("eta_energy")?, field("s_eta_energy")?, field("diagonal_min")?);
    ensure((eta - 1.0).abs() <= 1e-9, || format!("E(eta) = {eta}"))?;
    ensure((s_eta - 1.0).abs() <= 1e-9, || format!("E(S#eta) = {s_eta}"))?;
    ensure(diag >= 2.0 - 1e-9, || format!("diagonal minimum {diag}"))?;
    ensure(report["s_eta_atoms"] != serde_json::json!([[0.0, 1.0], [0.0, -1.0]]), || "S#eta equals eta".into())?;
    Ok(format!("E(eta) = {eta}, E(S#eta) = {s_eta}, diagonal min over 500 = {diag:.6}"))
}

fn gauss_dirac_collapse() -> Outcome {
    let g1 = GaussianParams::new(1.0, 2.0).map_err(|e| e.to_string())?;
    let g2 = GaussianParams::new(0.0, 1.0).map_err(|e| e.to_string())?;
    let p = gauss_dirac_params(&g1, &g2).map_err(|e| e.to_string())?;
    ensure(p.lambda_bar == 0.5 && p.z_bar == -1.0, || format!("params ({}, {})", p.lambda_bar, p.z_bar))?;
    let bary = barycenter(&p.family(&g1, &g2, 2000).map_err(|e| e.to_string())?);
    let gap = w2_1d(&bary, &DiscreteMeasure1D::dirac(-1.0));
    ensure(gap <= 0.05, || format!("W2 to delta_-1 = {gap}"))?;
    Ok(format!("(lambda, z) = (0.5, -1) exactly, W2 at m = 2000 is {gap:.3e}"))
}

fn one_d_characterization() -> Outcome {
    let mut r = rng(3);
    let mut monotone = 0;
    for i in 0..200 {
        let family = signed_family(&mut r, 6, 6, 5.0);
        let q = barycenter_quantile(&family).to_step_quantile();
        ensure(argmin_certificate(&family, &q, 500, 1.0, i), || format!("certificate failed on family {i}"))?;
        let raw = weighted_quantile_sum(&family);
        if raw.is_monotone() {
            monotone += 1;
            ensure(barycenter_quantile(&family) == raw, || format!("projection changed monotone sum {i}"))?;
        }
    }
    // Nonnegative weights always give a monotone sum; check that subset too.
    for i in 0..200 {
        let n = r.random_range(1..=6);
        let w = dirichlet(&mut r, n);
        let family = SignedFamily::discrete(w.into_iter().map(|w| (w, measure_1d(&mut r, 6, 5.0))).collect())
            .map_err(|e| e.to_string())?;
        let raw = weighted_quantile_sum(&family);
        ensure(raw.is_monotone() && barycenter_quantile(&family) == raw, || format!("positive family {i}"))?;
    }
    Ok(format!("200 certificates x 500 perturbations; {monotone} signed + 200 positive monotone sums unchanged"))
}

fn stability() -> Outcome {
    let mut r = rng(4);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..1000 {
        let n = r.random_range(2..=6);
        let w = signed_weights(&mut r, n);
        let a: Vec<DiscreteMeasure1D> = (0..n).map(|_| measure_1d(&mut r, 6, 5.0)).collect();
        let b: Vec<DiscreteMeasure1D> = (0..n).map(|_| measure_1d(&mut r, 6, 5.0)).collect();
        let g = stability_gap(&a, &b, &w).map_err(|e| e.to_string())?;
        ensure(g.lhs <= g.rhs + 1e-12, || format!("instance {i}: {} > {}", g.lhs, g.rhs))?;
        worst = worst.max(g.lhs - g.rhs);
    }
    Ok(format!("1000 instances, max lhs - rhs = {worst:.3e}"))
}

fn coercivity() -> Outcome {
    let mut r = rng(5);
    let mut tightest = f64::INFINITY;
    for i in 0..1000 {
        let family = signed_family(&mut r, 6, 6, 5.0);
        let mu = measure_1d(&mut r, 8, 20.0);
        let b = lower_bound(&family, &mu);
        ensure(b.lhs >= b.rhs, || format!("pair {i}: {} < {}", b.lhs, b.rhs))?;
        tightest = tightest.min(b.lhs - b.rhs);
    }
    Ok(format!("1000 pairs, min E - bound = {tightest:.3}"))
}

fn isotonic_oracles() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let f = weighted_steps(&mut r, 60);
        let (p, e) = (project_pava(&f), project_envelope(&f));
        let diff = p.values().iter().zip(e.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(diff <= 1e-10, || format!("input {i}: pava and envelope differ by {diff}"))?;
        worst = worst.max(diff);
        ensure(project_pava(&p) == p, || format!("input {i}: not idempotent"))?;
        let g = weighted_steps_on(&mut r, f.weights().to_vec());
        let before = distance_l2(&f, &g).map_err(|e| e.to_string())?;
        let after = distance_l2(&p, &project_pava(&g)).map_err(|e| e.to_string())?;
        ensure(after <= before + 1e-12, || format!("input {i}: expanded {before} -> {after}"))?;
    }
    Ok(format!("1000 inputs, max |pava - envelope| = {worst:.3e}; idempotent and non-expansive"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn transport_cross_oracles() -> Outcome {
    let mut r = rng(7);
    let mut worst_1d: f64 = 0.0;
    for i in 0..500 {
        let a = measure_1d(&mut r, 20, 10.0);
        let b = measure_1d(&mut r, 20, 10.0);
        let (la, lb) = (lift_1d(&a), lift_1d(&b));
        let t = solve_w2(&la, &lb).map_err(|e| e.to_string())?;
        ensure(t.is_certified(&la, &lb), || format!("1d pair {i}: plan not certified"))?;
        let diff = (t.cost - w2_1d(&a, &b).powi(2)).abs();
        ensure(diff <= 1e-9, || format!("1d pair {i}: simplex {} vs quantile {}", t.cost, w2_1d(&a, &b).powi(2)))?;
        worst_1d = worst_1d.max(diff);
    }
    let mut worst_bf: f64 = 0.0;
    for i in 0..200 {
        let n = r.random_range(1..=5);
        let dim = r.random_range(1..=3);
        let mut cloud =
            || -> Vec<Vec<f64>> { (0..n).map(|_| (0..dim).map(|_| r.random_range(-3.0..3.0)).collect()).collect() };
        let (xs, ys) = (cloud(), cloud());
        let best = permutations(n)
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(i, &j)| xs[i].iter().zip(&ys[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                    .sum::<f64>()
                    / n as f64
            })
            .fold(f64::INFINITY, f64::min);
        let a = DiscreteMeasureRd::uniform(dim, xs).map_err(|e| e.to_string())?;
        let b = DiscreteMeasureRd::uniform(dim, ys).map_err(|e| e.to_string())?;
        let t = solve_w2(&a, &b).map_err(|e| e.to_string())?;
        ensure(t.is_certified(&a, &b), || format!("tiny instance {i}: plan not certified"))?;
        let diff = (t.cost - best).abs();
        ensure(diff <= 1e-10, || format!("tiny instance {i}: simplex {} vs brute force {best}", t.cost))?;
        worst_bf = worst_bf.max(diff);
    }
    Ok(format!(
        "500 1d pairs (max diff {worst_1d:.1e}), 200 brute-force cases (max diff {worst_bf:.1e}), all certified"
    ))
}

fn sticky_particles() -> Outcome {
    let head_on = gwb_core::sticky::ParticleState::new(vec![-1.0, 1.0], vec![1.0, -1.0], vec![0.5, 0.5])
        .map_err(|e| e.to_string())?;
    for t in [1.0, 1.0 + 1e-9, 1.5, 2.0, 3.7, 10.0, 1e6] {
        let rho = evolve(&head_on, t).map_err(|e| e.to_string())?;
        ensure(rho.atoms() == [0.0] && rho.masses() == [1.0], || format!("t = {t}: {rho}"))?;
    }
    let mut r = rng(8);
    let mut worst_gap: f64 = 0.0;
    let mut worst_cons: f64 = 0.0;
    for i in 0..500 {
        let state = particle_state(&mut r, 2, 15);
        let tc = first_collision_time(&state);
        let s = if tc.is_finite() { tc * r.random_range(0.05..=1.0) } else { r.random_range(0.1..2.0) };
        let t = s * r.random_range(1.1..8.0);
        let (lhs, rhs) = extrapolation_identity(&state, s, t).map_err(|e| e.to_string())?;
        let gap = w2_1d(&lhs, &rhs);
        ensure(gap <= 1e-10, || format!("state {i}: extrapolation gap {gap}"))?;
        worst_gap = worst_gap.max(gap);
        for tt in [0.0, s, t] {
            let rho = evolve(&state, tt).map_err(|e| e.to_string())?;
            let dm = (rho.total_mass() - 1.0).abs();
            let dp = (rho.mean() - state.center_of_mass(tt)).abs();
            ensure(dm <= 1e-12 && dp <= 1e-12, || format!("state {i}, t = {tt}: mass {dm}, momentum {dp}"))?;
            worst_cons = worst_cons.max(dm).max(dp);
        }
    }
    Ok(format!("head-on collapse exact; 500 states, max gap {worst_gap:.1e}, max conservation error {worst_cons:.1e}"))
}

/// Bounded-support positive and negative parts with `λ⁺ − λ⁻ = 1`.
fn consistency_population() -> Population {
    Population {
        positive_mass: 1.5,
        positive: MeasureSampler::Spread {
            center_mean: 1.0,
            center_std: 0.5,
            min_half_width: 0.5,
            max_half_width: 1.5,
            min_atoms: 2,
            max_atoms: 5,
        },
        negative_mass: 0.5,
        negative: Some(MeasureSampler::Spread {
            center_mean: 0.0,
            center_std: 0.3,
            min_half_width: 0.2,
            max_half_width: 0.6,
            min_atoms: 2,
            max_atoms: 4,
        }),
    }
}

fn consistency_trend() -> Outcome {
    let population = consistency_population();
    let bound = population.moment_bound();
    let schedule =
        ApproximationSchedule::new(vec![4, 16, 64, 256, 1024], (0..10).collect(), Target::Population(population))
            .map_err(|e| e.to_string())?;
    let report = run_consistency(&schedule).map_err(|e| e.to_string())?;
    let energy: Vec<f64> = report.median_energy_gaps().into_iter().map(|(_, g)| g).collect();
    let w2: Vec<f64> = report.median_w2_gaps().into_iter().map(|(_, g)| g).collect();
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    ensure(is_non_increasing(&energy), || format!("median energy gaps [{}]", fmt(&energy)))?;
    ensure(is_non_increasing(&w2), || format!("median W2 gaps [{}]", fmt(&w2)))?;
    ensure(report.max_moment() <= 2.0 * bound, || format!("moment {} above twice {bound}", report.max_moment()))?;
    Ok(format!("median |e_k - e| [{}], median W2 [{}]", fmt(&energy), fmt(&w2)))
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "counterexample energies", limit: Duration::from_secs(10), check: counterexample_energies },
        Criterion { name: "gaussian/dirac collapse", limit: Duration::from_secs(5), check: gauss_dirac_collapse },
        Criterion { name: "1d characterization", limit: Duration::from_secs(60), check: one_d_characterization },
        Criterion { name: "stability", limit: Duration::from_secs(30), check: stability },
        Criterion { name: "coercivity", limit: Duration::from_secs(30), check: coercivity },
        Criterion { name: "isotonic oracles", limit: Duration::from_secs(10), check: isotonic_oracles },
        Criterion { name: "transport cross-oracles", limit: Duration::from_secs(60), check: transport_cross_oracles },
        Criterion { name: "sticky particles", limit: Duration::from_secs(30), check: sticky_particles },
        Criterion { name: "consistency trend", limit: Duration::from_secs(300), check: consistency_trend },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] criterion {} ({}): {detail} [{elapsed:.2?}]", i + 1, c.name),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {} ({}): {why} [{elapsed:.2?}]", i + 1, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
