//! Randomized self-checks of the polynomial algebra.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::Suite;
use crate::domain::{ParticleConfig, SystemParams};
use crate::linalg::sym_eigen;
use crate::sympoly::{
    bracket_direct, bracket_matrix_closed, comb_identity, drift_closed, drift_direct_parts,
    elementary_all, identity_simple_brack, roots_from_polys,
};
use crate::analysis::moment_polynomials;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(name: &'static str, cases: usize, max_error: f64, tolerance: f64) -> Self {
        CheckRow { name, cases, max_error, tolerance, pass: max_error <= tolerance }
    }
}

const REL_TOL: f64 = 1e-10;

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / scale.max(f64::MIN_POSITIVE)
    }
}

fn nonneg(rng: &mut ChaCha8Rng, p: usize) -> ParticleConfig {
    ParticleConfig::from_unsorted((0..p).map(|_| rng.random_range(0.0..5.0)).collect()).expect("finite")
}

/// Runs `suite` on `cases` random configurations for each `p` in
/// `2..=p_max`.
pub fn run_suite(suite: Suite, p_max: usize, cases: usize, seed: u64) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Identities => identities(&mut rng, p_max, cases),
        Suite::Coefficients => coefficients(&mut rng, p_max, cases),
        Suite::Roundtrip => roundtrip(&mut rng, p_max, cases),
        Suite::Brackets => brackets(&mut rng, p_max, cases),
    }
}

fn identities(rng: &mut ChaCha8Rng, p_max: usize, cases: usize) -> Vec<CheckRow> {
    let mut comb_cases = 0;
    let mut comb_bad = 0usize;
    for j in 1..=25u32 {
        for n in 0..j {
            comb_cases += 1;
            match comb_identity(j, n) {
                Ok((l, r)) if l == r => {}
                _ => comb_bad += 1,
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in 2..=p_max {
        for _ in 0..cases {
            let x = nonneg(rng, p);
            for n in 1..=p {
                for m in n..=p {
                    let (l, r) = identity_simple_brack(&x, n, m).expect("valid degrees");
                    worst = worst.max(rel(l, r, l.abs().max(r.abs())));
                    count += 1;
                }
            }
        }
    }
    vec![
        CheckRow::new("combinatorial identity mismatches", comb_cases, comb_bad as f64, 0.0),
        CheckRow::new("bracket product identity", count, worst, REL_TOL),
    ]
}

fn coefficients(rng: &mut ChaCha8Rng, p_max: usize, cases: usize) -> Vec<CheckRow> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in 2..=p_max {
        for _ in 0..cases {
            let x = nonneg(rng, p);
            let alpha = rng.random_range(-5.0..10.0);
            let e = elementary_all(&x);
            for n in 1..=p {
                let (direct, scale) = drift_direct_parts(x.as_slice(), n, alpha);
                let closed = drift_closed(&e, n, alpha).expect("valid degree");
                worst = worst.max(rel(direct, closed, scale));
                count += 1;
            }
        }
    }
    let mut moment_worst: f64 = 0.0;
    let mut moment_count = 0;
    for p in 2..=p_max {
        for _ in 0..cases.min(50) {
            let alpha = rng.random_range(p as f64 - 1.0..p as f64 + 8.0);
            let e0 = elementary_all(&nonneg(rng, p));
            let params = SystemParams::new(p, alpha).expect("valid");
            let polys = moment_polynomials(&params, &e0).expect("alpha >= p - 1");
            for n in 1..=p {
                let c = (p - n + 1) as f64 * (alpha - n as f64 + 1.0);
                for (k, a) in polys[n].iter().enumerate().skip(1) {
                    let want = c * polys[n - 1][k - 1];
                    moment_worst = moment_worst.max(rel(k as f64 * a, want, want.abs().max(1.0)));
                }
                moment_count += 1;
            }
        }
    }
    vec![
        CheckRow::new("drift direct vs closed", count, worst, REL_TOL),
        CheckRow::new("moment curve recursion", moment_count, moment_worst, REL_TOL),
    ]
}

fn roundtrip(rng: &mut ChaCha8Rng, p_max: usize, cases: usize) -> Vec<CheckRow> {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..cases * (p_max - 1) {
        let p = rng.random_range(2..=p_max);
        let x = loop {
            let x = ParticleConfig::from_unsorted((0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
                .expect("finite");
            if x.as_slice().windows(2).all(|w| w[1] - w[0] >= 0.1) {
                break x;
            }
        };
        match roots_from_polys(&elementary_all(&x)) {
            Ok(back) => {
                let err = back
                    .as_slice()
                    .iter()
                    .zip(x.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(err);
            }
            Err(_) => failures += 1,
        }
    }
    let total = cases * (p_max - 1);
    vec![
        CheckRow::new("root recovery failures", total, failures as f64, 0.0),
        CheckRow::new("roots of elementary polynomials", total, worst, 1e-8),
    ]
}

fn brackets(rng: &mut ChaCha8Rng, p_max: usize, cases: usize) -> Vec<CheckRow> {
    let mut worst: f64 = 0.0;
    let mut psd_worst: f64 = 0.0;
    let mut count = 0;
    let mut mats = 0;
    for p in 2..=p_max {
        for _ in 0..cases {
            let x = nonneg(rng, p);
            let s = bracket_matrix_closed(&elementary_all(&x));
            for n in 1..=p {
                for m in n..=p {
                    let d = bracket_direct(&x, n, m).expect("valid degrees");
                    worst = worst.max(rel(d, s.get(n, m), d.abs()));
                    count += 1;
                }
            }
            let norm = s.as_state().matrix().frobenius_norm();
            let min = sym_eigen(s.as_state()).values[0];
            psd_worst = psd_worst.max(-min / norm.max(f64::MIN_POSITIVE));
            mats += 1;
        }
    }
    vec![
        CheckRow::new("bracket direct vs closed", count, worst, REL_TOL),
        CheckRow::new("bracket matrix PSD (relative)", mats, psd_worst, 1e-9),
    ]
}

pub fn table(rows: &[CheckRow]) -> String {
    let mut s = format!("{:<34} {:>8} {:>12} {:>10}  result\n", "check", "cases", "max_error", "tolerance");
    for r in rows {
        s.push_str(&format!(
            "{:<34} {:>8} {:>12.3e} {:>10.1e}  {}\n",
            r.name,
            r.cases,
            r.max_error,
            r.tolerance,
            if r.pass { "ok" } else { "FAIL" }
        ));
    }
    s
}
