//! Acceptance criteria, one printed line per criterion.
//!
//! Runs without the libtest harness so the lines always show:
//! `cargo test -p besq-core --test acceptance`.

use std::time::{Duration, Instant};

use besq_core::analysis::{drift_regression_ep, integrated_bracket, realized_covariation};
use besq_core::constructions::build_non_unique;
use besq_core::domain::classify_strong_uniqueness;
use besq_core::linalg::SymmetricMatrixState;
use besq_core::sde::rng::component;
use besq_core::sde::{
    simulate_particles, simulate_polys, simulate_wishart, EventKind, PathRecord, RngSpec, SimulationGrid,
    ZeroBoundary,
};
use besq_core::sympoly::{
    bracket_direct, bracket_matrix_closed, comb_identity, drift_closed, drift_direct, elementary_all,
    identity_simple_brack, roots_from_polys,
};
use besq_core::{ParticleConfig, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    let in_time = took <= limit;
    out.pass &= in_time;
    println!(
        "criterion {id}: {} | {} | {:.2}s (limit {}s)",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    out
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn params(p: usize, alpha: f64) -> SystemParams {
    SystemParams::new(p, alpha).unwrap()
}

fn cfg(x: &[f64]) -> ParticleConfig {
    ParticleConfig::from_unsorted(x.to_vec()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn exact_algebra() -> Outcome {
    let mut comb_bad = Vec::new();
    for j in 1..=25u32 {
        for n in 0..j {
            let (l, r) = comb_identity(j, n).unwrap();
            if l != r {
                comb_bad.push((j, n));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20_251_019);
    let (mut w_brack, mut w_drift, mut w_bracket) = (0.0f64, 0.0f64, 0.0f64);
    for p in 2..=8usize {
        for _ in 0..500 {
            let x = cfg(&(0..p).map(|_| rng.random_range(0.0..5.0)).collect::<Vec<_>>());
            let alpha = rng.random_range(0.0..10.0);
            let e = elementary_all(&x);
            let s = bracket_matrix_closed(&e);
            for n in 1..=p {
                w_drift = w_drift.max(rel(drift_direct(&x, n, alpha).unwrap(), drift_closed(&e, n, alpha).unwrap()));
                for m in n..=p {
                    let (l, r) = identity_simple_brack(&x, n, m).unwrap();
                    w_brack = w_brack.max(rel(l, r));
                    w_bracket = w_bracket.max(rel(bracket_direct(&x, n, m).unwrap(), s.get(n, m)));
                }
            }
        }
    }
    Outcome {
        pass: comb_bad.is_empty() && w_brack <= 1e-10 && w_drift <= 1e-10 && w_bracket <= 1e-10,
        detail: format!(
            "combinatorial identity mismatches {}; max rel err: product identity {w_brack:.1e}, drift {w_drift:.1e}, bracket {w_bracket:.1e} (tol 1e-10)",
            comb_bad.len()
        ),
    }
}

fn spread(rng: &mut ChaCha8Rng, p: usize, lo: f64, hi: f64) -> ParticleConfig {
    loop {
        let x = cfg(&(0..p).map(|_| rng.random_range(lo..hi)).collect::<Vec<_>>());
        if x.as_slice().windows(2).all(|w| w[1] - w[0] >= 0.1) {
            return x;
        }
    }
}

fn max_root_error(x: &ParticleConfig) -> f64 {
    let back = roots_from_polys(&elementary_all(x)).unwrap();
    back.as_slice().iter().zip(x.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..1000 {
        let p = rng.random_range(1..=8);
        let err = max_root_error(&spread(&mut rng, p, -5.0, 5.0));
        worst = worst.max(err);
        bad += usize::from(err > 1e-8);
    }
    // Same check on starts shifted away from the origin, where the
    // coefficients are larger and clustered roots lose more digits.
    let mut shifted_bad = 0;
    let mut shifted_worst = 0.0f64;
    for _ in 0..1000 {
        let p = rng.random_range(1..=8);
        let err = max_root_error(&spread(&mut rng, p, 0.0, 10.0));
        shifted_worst = shifted_worst.max(err);
        shifted_bad += usize::from(err > 1e-8);
    }
    Outcome {
        pass: bad == 0,
        detail: format!(
            "x iid U[-5,5]: {bad}/1000 above 1e-8, max err {worst:.1e}; info, x iid U[0,10]: {shifted_bad}/1000 above 1e-8, max err {shifted_worst:.1e}"
        ),
    }
}

/// `(mean, se)` of `e_1` and `e_2` at the horizon for each representation.
struct MomentRuns {
    particles: [(f64, f64); 2],
    polys: [(f64, f64); 2],
    wishart: [(f64, f64); 2],
}

fn moment_runs() -> MomentRuns {
    let pa = params(2, 3.0);
    let x0 = cfg(&[1.0, 2.0]);
    let grid = SimulationGrid::new(0.5, 1e-3).unwrap();
    let reps = 10_000u32;
    let collect = |f: &(dyn Fn(u32) -> PathRecord + Sync)| -> [(f64, f64); 2] {
        let finals: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let path = f(r);
                assert!(path.completed());
                let e = path.polys(path.len() - 1);
                (e.get(1), e.get(2))
            })
            .collect();
        let e1: Vec<f64> = finals.iter().map(|v| v.0).collect();
        let e2: Vec<f64> = finals.iter().map(|v| v.1).collect();
        [mean_se(&e1), mean_se(&e2)]
    };
    let particles =
        collect(&|r| simulate_particles(&pa, &x0, &grid, &RngSpec::new(31, r, component::PARTICLES)).unwrap());
    let e0 = elementary_all(&x0);
    let polys = collect(&|r| simulate_polys(&pa, &e0, &grid, &RngSpec::new(31, r, component::POLYS)).unwrap());
    let y0 = SymmetricMatrixState::diag(&[1.0, 2.0]);
    let wishart = collect(&|r| simulate_wishart(&pa, &y0, &grid, &RngSpec::new(31, r, component::WISHART)).unwrap());
    MomentRuns { particles, polys, wishart }
}

fn moments(runs: &MomentRuns) -> Outcome {
    // E e1 = 3 + 6t and E e2 = 2 + 6t + 6t^2 at t = 0.5
    let exact = [6.0, 6.5];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, est) in [("particles", runs.particles), ("polys", runs.polys), ("wishart", runs.wishart)] {
        let z: Vec<f64> = (0..2).map(|k| (est[k].0 - exact[k]) / est[k].1).collect();
        pass &= z.iter().all(|z| z.abs() <= 3.0);
        parts.push(format!(
            "{name} e1 {:.4}±{:.4} (z {:+.2}), e2 {:.4}±{:.4} (z {:+.2})",
            est[0].0, est[0].1, z[0], est[1].0, est[1].1, z[1]
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn agreement(runs: &MomentRuns) -> Outcome {
    let e1 = [("particles", runs.particles[0]), ("polys", runs.polys[0]), ("wishart", runs.wishart[0])];
    let mut pass = true;
    let mut parts = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (e1[i].1, e1[j].1);
            let z = (a.0 - b.0) / (a.1 * a.1 + b.1 * b.1).sqrt();
            pass &= z.abs() <= 3.0;
            parts.push(format!("{}-{} z {:+.2}", e1[i].0, e1[j].0, z));
        }
    }
    Outcome { pass, detail: format!("E e1 pairwise: {}", parts.join(", ")) }
}

struct SignCounts {
    x1_negative: usize,
    x2_negative: usize,
    x1_hit_zero: usize,
}

fn sign_counts(alpha: f64, boundary: ZeroBoundary, paths: u32) -> SignCounts {
    let pa = params(2, alpha);
    let x0 = cfg(&[0.5, 1.0]);
    let grid = SimulationGrid::new(20.0, 1e-3).unwrap().with_boundary(boundary);
    let threshold = -10.0 * grid.tol_zero;
    let flags: Vec<(bool, bool, bool)> = (0..paths)
        .into_par_iter()
        .map(|r| {
            let path = simulate_particles(&pa, &x0, &grid, &RngSpec::new(5, r, component::PARTICLES)).unwrap();
            let below = |i: usize| path.states.iter().any(|s| s[i] < threshold);
            let hit = path.events_of(|k| *k == EventKind::HitZero { particle: 1 }).next().is_some();
            (below(0), below(1), hit)
        })
        .collect();
    SignCounts {
        x1_negative: flags.iter().filter(|f| f.0).count(),
        x2_negative: flags.iter().filter(|f| f.1).count(),
        x1_hit_zero: flags.iter().filter(|f| f.2).count(),
    }
}

fn sign_structure() -> (Outcome, String) {
    let n = 2000;
    let half = sign_counts(0.5, ZeroBoundary::LocalDimension, n);
    let one = sign_counts(1.0, ZeroBoundary::LocalDimension, n);
    let frac = |c: usize| c as f64 / n as f64;
    let pass = frac(half.x2_negative) <= 0.01
        && frac(half.x1_negative) >= 0.90
        && frac(one.x1_negative) <= 0.01
        && frac(one.x1_hit_zero) >= 0.90;
    let out = Outcome {
        pass,
        detail: format!(
            "alpha 0.5: X2 below {:.4}, X1 below {:.4}; alpha 1: X1 below {:.4}, X1 hit zero {:.4}",
            frac(half.x2_negative),
            frac(half.x1_negative),
            frac(one.x1_negative),
            frac(one.x1_hit_zero)
        ),
    };
    // Same run with the zero boundary left to the plain scheme, for the record.
    let m = 500;
    let free = sign_counts(1.0, ZeroBoundary::Free, m);
    let info = format!(
        "info: plain Euler at zero, alpha 1, {m} paths: X1 below {:.4}, X1 hit zero {:.4}",
        free.x1_negative as f64 / m as f64,
        free.x1_hit_zero as f64 / m as f64
    );
    (out, info)
}

fn non_uniqueness() -> Outcome {
    let pa = params(3, 1.0);
    let x0 = cfg(&[0.0, 0.0, 1.0]);
    let grid = SimulationGrid::new(1.0, 1e-3).unwrap();
    let classified_unique = classify_strong_uniqueness(&pa, &x0);
    let pinned = build_non_unique(&pa, &x0, &grid, &RngSpec::new(8, 0, 0)).unwrap();
    let zero_block = pinned.completed() && pinned.states.iter().all(|s| s[0] == 0.0 && s[1] == 0.0);
    let threshold = 10.0 * grid.tol_coll;
    let separated = (0..500u32)
        .into_par_iter()
        .filter(|&r| {
            let path = simulate_particles(&pa, &x0, &grid, &RngSpec::new(8, r, component::PARTICLES)).unwrap();
            path.min_gap(0.1, 1.0) > threshold
        })
        .count();
    let frac = separated as f64 / 500.0;
    Outcome {
        pass: !classified_unique && zero_block && frac >= 0.95,
        detail: format!(
            "unique_strong {classified_unique}; zero-block path keeps X1 = X2 = 0: {zero_block}; particle paths separated on [0.1, 1]: {frac:.4}"
        ),
    }
}

fn drift_regression() -> Outcome {
    let pa = params(2, 3.0);
    let x0 = cfg(&[1.0, 2.0]);
    let grid = SimulationGrid::new(0.5, 1e-3).unwrap();
    let paths: Vec<PathRecord> = (0..200u32)
        .into_par_iter()
        .map(|r| simulate_particles(&pa, &x0, &grid, &RngSpec::new(17, r, component::PARTICLES)).unwrap())
        .collect();
    let s = drift_regression_ep(&paths, &pa).unwrap();
    Outcome {
        pass: s.contains(2.0),
        detail: format!("c = {:.4} ± {:.4}, CI [{:.4}, {:.4}] vs 2.0", s.estimate, s.std_error, s.ci95.0, s.ci95.1),
    }
}

fn bracket_paths() -> Outcome {
    let pa = params(3, 4.0);
    let x0 = cfg(&[1.0, 2.0, 3.0]);
    let grid = SimulationGrid::new(0.1, 1e-4).unwrap();
    let paths: Vec<PathRecord> = (0..50u32)
        .into_par_iter()
        .map(|r| simulate_particles(&pa, &x0, &grid, &RngSpec::new(23, r, component::PARTICLES)).unwrap())
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        for m in n..=3 {
            let realized: f64 = paths.iter().map(|p| realized_covariation(p, n, m)).sum::<f64>() / 50.0;
            let closed: f64 = paths.iter().map(|p| integrated_bracket(p, n, m)).sum::<f64>() / 50.0;
            let r = (realized - closed).abs() / closed.abs();
            pass &= r <= 0.15;
            parts.push(format!("({n},{m}) {:.1}%", 100.0 * r));
        }
    }
    Outcome { pass, detail: format!("relative gap: {}", parts.join(", ")) }
}

/// Uniqueness exactly as the theorem states it: fails only when `|alpha|`
/// is in `{0, ..., p-2}` and both rank conditions hold, with negative
/// `alpha` handled on the mirrored start.
fn theorem_oracle(p: usize, alpha: i64, x: &[f64]) -> bool {
    if alpha.unsigned_abs() as usize > p - 2 {
        return true;
    }
    let mirrored: Vec<f64>;
    let (a, x) = if alpha < 0 {
        mirrored = x.iter().rev().map(|v| -v).collect();
        (-alpha as usize, mirrored.as_slice())
    } else {
        (alpha as usize, x)
    };
    let n_star = (0..=p).find(|n| 2 * n == p + a || 2 * n == p + a + 1).unwrap();
    let plus = x.iter().filter(|v| **v > 0.0).count();
    let minus = x.iter().filter(|v| **v < 0.0).count();
    plus > n_star || minus > p - n_star
}

struct ClassificationCheck {
    cases: usize,
    oracle_mismatches: usize,
    reflection_breaks: Vec<(usize, i64)>,
}

fn classification_check() -> ClassificationCheck {
    let mut out = ClassificationCheck { cases: 0, oracle_mismatches: 0, reflection_breaks: Vec::new() };
    for p in 2..=6usize {
        for alpha in -(p as i64 - 2)..=(p as i64 - 2) {
            for code in 0..3usize.pow(p as u32) {
                let mut x: Vec<f64> = (0..p).map(|i| (code / 3usize.pow(i as u32) % 3) as f64 - 1.0).collect();
                x.sort_by(f64::total_cmp);
                let start = cfg(&x);
                let got = classify_strong_uniqueness(&params(p, alpha as f64), &start);
                out.cases += 1;
                out.oracle_mismatches += usize::from(got != theorem_oracle(p, alpha, &x));
                let mirrored = classify_strong_uniqueness(&params(p, -alpha as f64), &start.reflected());
                if got != mirrored {
                    out.reflection_breaks.push((p, alpha));
                }
            }
        }
    }
    out
}

fn classification(check: &ClassificationCheck) -> Outcome {
    let mut cells: Vec<String> = check.reflection_breaks.iter().map(|(p, a)| format!("p={p} alpha={a}")).collect();
    cells.dedup();
    Outcome {
        pass: check.oracle_mismatches == 0 && check.reflection_breaks.is_empty(),
        detail: format!(
            "{} cases, oracle mismatches {}; reflection breaks {} (in {})",
            check.cases,
            check.oracle_mismatches,
            check.reflection_breaks.len(),
            if cells.is_empty() { "none".to_string() } else { cells.join(", ") }
        ),
    }
}

fn main() {
    let mut failed = Vec::new();
    let mut note = |id: u32, o: Outcome| {
        if !o.pass {
            failed.push(id);
        }
    };
    note(1, report(1, secs(30), exact_algebra));
    note(2, report(2, secs(10), round_trip));
    // both criteria share the simulated paths; criterion 3 pays for them
    let mut runs = None;
    note(3, report(3, secs(300), || moments(runs.insert(moment_runs()))));
    let runs = runs.unwrap();
    note(4, report(4, secs(300), || agreement(&runs)));
    let mut info = String::new();
    note(5, report(5, secs(600), || {
        let (o, i) = sign_structure();
        info = i;
        o
    }));
    println!("           {info}");
    note(6, report(6, secs(120), non_uniqueness));
    note(7, report(7, secs(60), drift_regression));
    note(8, report(8, secs(120), bracket_paths));
    let mut check = None;
    note(9, report(9, secs(5), || {
        let c = classification_check();
        let o = classification(&c);
        check = Some(c);
        o
    }));

    // Criterion 9 cannot hold as written: at alpha = 0 with odd p the
    // theorem's split n* = (p+1)/2 is not symmetric under reflection, so the
    // literal statement and reflection invariance disagree. Everything else
    // must pass, and the breaks must be confined to exactly those cells.
    let check = check.unwrap();
    assert_eq!(check.oracle_mismatches, 0);
    assert!(check.reflection_breaks.iter().all(|&(p, a)| a == 0 && p % 2 == 1));
    failed.retain(|&id| id != 9);
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
