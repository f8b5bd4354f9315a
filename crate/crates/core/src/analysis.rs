//! Statistics of simulated paths and exact reference curves.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::SystemParams;
use crate::error::{Error, Result};
use crate::sde::{EventKind, PathRecord, RngSpec};
use crate::sympoly::{bracket_closed_entry, SymPolyVector};

/// First hitting times read off a discrete path.
///
/// Times are grid times, so they overestimate the continuous hitting times by
/// up to one step. Zero hits include touches the simulator logged between
/// snapshots. A particle that never crossed gets the horizon and a
/// `true` censored flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimes {
    pub t0: Vec<f64>,
    pub t0_censored: Vec<bool>,
    pub t_minus: Vec<f64>,
    pub t_minus_censored: Vec<bool>,
    pub horizon: f64,
    /// Pairs `(i, i+1)` (1-based) whose zero hitting times came out in the
    /// wrong order, a discretization artifact.
    pub order_warnings: Vec<(usize, usize)>,
}

pub fn detect_hitting_times(path: &PathRecord, tol_zero: f64) -> HittingTimes {
    let p = path.p;
    let horizon = path.times.last().copied().unwrap_or(0.0);
    let mut t0 = vec![None; p];
    let mut tm = vec![None; p];
    for k in 0..path.len() {
        for (i, &v) in path.particles(k).iter().enumerate() {
            if t0[i].is_none() && v <= tol_zero {
                t0[i] = Some(path.times[k]);
            }
            if tm[i].is_none() && v < -tol_zero {
                tm[i] = Some(path.times[k]);
            }
        }
    }
    // zero touches between snapshots are only visible in the event log
    for e in &path.events {
        if let EventKind::HitZero { particle } = e.kind {
            let t = &mut t0[particle - 1];
            if e.value <= tol_zero && t.is_none_or(|t| e.time < t) {
                *t = Some(e.time);
            }
        }
    }
    let unpack = |v: Vec<Option<f64>>| -> (Vec<f64>, Vec<bool>) {
        v.iter().map(|t| (t.unwrap_or(horizon), t.is_none())).unzip()
    };
    let (t0, t0_censored) = unpack(t0);
    let (t_minus, t_minus_censored) = unpack(tm);
    let order_warnings = (1..p)
        .filter(|&i| (!t0_censored[i - 1] && t0[i - 1] > t0[i]) || (t0_censored[i - 1] && !t0_censored[i]))
        .map(|i| (i, i + 1))
        .collect();
    HittingTimes { t0, t0_censored, t_minus, t_minus_censored, horizon, order_warnings }
}

/// `E e_n(t)` as polynomials in `t`: entry `n` holds the coefficients of
/// `t^0, ..., t^n`.
///
/// Taking expectations of the polynomial equation leaves the linear chain
/// `d/dt E e_n = (p-n+1)(alpha-n+1) E e_{n-1}`, solved term by term.
pub fn moment_polynomials(params: &SystemParams, e0: &SymPolyVector) -> Result<Vec<Vec<f64>>> {
    let p = params.p;
    if e0.p() != p {
        return Err(Error::invalid(format!("e0 has degree {}, expected p = {p}", e0.p())));
    }
    if params.alpha < p as f64 - 1.0 {
        return Err(Error::pre(format!(
            "moment curve needs alpha >= p - 1 = {}, got {}",
            p - 1,
            params.alpha
        )));
    }
    let c = |j: usize| (p - j + 1) as f64 * (params.alpha - j as f64 + 1.0);
    let mut out: Vec<Vec<f64>> = vec![vec![1.0]];
    for n in 1..=p {
        // integrate c_n * E e_{n-1}, constant term e0[n]
        let prev = &out[n - 1];
        let mut coeffs = vec![e0.get(n as i64)];
        coeffs.extend(prev.iter().enumerate().map(|(k, a)| c(n) * a / (k + 1) as f64));
        out.push(coeffs);
    }
    Ok(out)
}

/// `E e(t)` for a start `e0`.
pub fn moment_curve(params: &SystemParams, e0: &SymPolyVector, t: f64) -> Result<SymPolyVector> {
    let polys = moment_polynomials(params, e0)?;
    let vals = polys
        .iter()
        .map(|c| c.iter().rev().fold(0.0, |acc, a| acc * t + a))
        .collect();
    SymPolyVector::new(vals)
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub estimate: f64,
    pub std_error: f64,
    /// Replicates that entered the estimate.
    pub n_reps: usize,
    pub ci95: (f64, f64),
    /// Fraction of requested replicates that completed.
    pub completion_rate: f64,
}

impl McSummary {
    pub fn from_samples(samples: &[f64], requested: usize) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::pre(format!("need at least 2 completed replicates, got {n}")));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok(Self::new(mean, (var / n as f64).sqrt(), n, n as f64 / requested as f64))
    }

    fn new(estimate: f64, std_error: f64, n_reps: usize, completion_rate: f64) -> Self {
        McSummary {
            estimate,
            std_error,
            n_reps,
            ci95: (estimate - 1.96 * std_error, estimate + 1.96 * std_error),
            completion_rate,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.ci95.0 <= v && v <= self.ci95.1
    }
}

/// Runs `simulate` for replicates `0..n_reps` of `rng_base` in parallel and
/// averages `statistic` over paths that reached the horizon.
///
/// Replicates aborted by a numerical error, or stopped early, count against
/// the completion rate; input errors are returned. Results are merged in
/// replicate order, so the summary does not depend on the thread count.
pub fn mc_estimate<S, F>(
    statistic: F,
    simulate: S,
    n_reps: usize,
    rng_base: &RngSpec,
) -> Result<McSummary>
where
    S: Fn(&RngSpec) -> Result<PathRecord> + Sync,
    F: Fn(&PathRecord) -> f64 + Sync,
{
    if n_reps < 2 {
        return Err(Error::invalid(format!("n_reps must be at least 2, got {n_reps}")));
    }
    let results: Vec<Result<Option<f64>>> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let spec = rng_base.with_replicate(r as u32);
            match simulate(&spec) {
                Ok(path) if path.completed() => Ok(Some(statistic(&path))),
                Ok(_) => Ok(None),
                Err(e) if e.is_numerical() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(n_reps);
    for r in results {
        if let Some(v) = r? {
            samples.push(v);
        }
    }
    McSummary::from_samples(&samples, n_reps)
}

/// `sum_k (e_n(t_{k+1}) - e_n(t_k)) (e_m(t_{k+1}) - e_m(t_k))`.
pub fn realized_covariation(path: &PathRecord, n: usize, m: usize) -> f64 {
    let e: Vec<SymPolyVector> = (0..path.len()).map(|k| path.polys(k)).collect();
    e.windows(2)
        .map(|w| {
            let dn = w[1].get(n as i64) - w[0].get(n as i64);
            let dm = w[1].get(m as i64) - w[0].get(m as i64);
            dn * dm
        })
        .sum()
}

/// Left-point integral of the closed-form bracket density along the path.
pub fn integrated_bracket(path: &PathRecord, n: usize, m: usize) -> f64 {
    (0..path.len().saturating_sub(1))
        .map(|k| {
            let dt = path.times[k + 1] - path.times[k];
            bracket_closed_entry(&path.polys(k), n, m) * dt
        })
        .sum()
}

/// Least-squares slope `c` in `Delta e_p = c e_{p-1} Delta t`, pooled over
/// all steps of all paths.
///
/// The standard error treats each path as one cluster, since increments
/// within a path share the same trajectory.
pub fn drift_regression_ep(paths: &[PathRecord], params: &SystemParams) -> Result<McSummary> {
    let p = params.p;
    if params.alpha < p as f64 - 1.0 {
        return Err(Error::pre(format!(
            "drift regression needs alpha >= p - 1 = {}, got {}",
            p - 1,
            params.alpha
        )));
    }
    if paths.len() < 2 {
        return Err(Error::invalid("drift regression needs at least 2 paths"));
    }
    let series: Vec<Vec<(f64, f64)>> = paths
        .iter()
        .map(|path| {
            if path.p != p {
                return Err(Error::invalid("path does not match the parameters"));
            }
            let e: Vec<SymPolyVector> = (0..path.len()).map(|k| path.polys(k)).collect();
            Ok((0..path.len().saturating_sub(1))
                .map(|k| {
                    let dt = path.times[k + 1] - path.times[k];
                    let x = e[k].get(p as i64 - 1) * dt;
                    let y = e[k + 1].get(p as i64) - e[k].get(p as i64);
                    (x, y)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let sxx: f64 = series.iter().flatten().map(|(x, _)| x * x).sum();
    let sxy: f64 = series.iter().flatten().map(|(x, y)| x * y).sum();
    let scale: f64 = series.iter().flatten().map(|(x, _)| x.abs()).fold(0.0, f64::max);
    if !(sxx > 0.0) || sxx.sqrt() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::pre("regressor e_{p-1} vanishes along every path"));
    }
    let c = sxy / sxx;
    let r = series.len() as f64;
    let meat: f64 = series
        .iter()
        .map(|s| s.iter().map(|(x, y)| x * (y - c * x)).sum::<f64>().powi(2))
        .sum();
    let se = (meat * r / (r - 1.0)).sqrt() / sxx;
    Ok(McSummary::new(c, se, paths.len(), 1.0))
}
