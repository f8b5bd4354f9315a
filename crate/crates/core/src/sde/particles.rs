//! Euler–Maruyama for the ordered particle system.
//!
//! The pairwise term `(|x_i| + |x_j|) / (x_i - x_j)` is evaluated as follows:
//! - separated pair (`|x_i - x_j| > tol_coll`): as written;
//! - coincident pair away from zero: dropped (the collision indicator);
//! - coincident pair at zero: `-1` for the lower index, `+1` for the upper,
//!   the value the ratio takes on every configuration with `x_i <= 0 <= x_j`.
//!   This lets a block of zero particles split the way the non-colliding
//!   solution does instead of freezing.

use super::path::{EventLog, PathRecord, SimulationGrid, StateKind, ZeroBoundary};
use super::rng::{NoiseSource, RngSpec};
use crate::domain::{ParticleConfig, SystemParams};
use crate::error::{Error, Result};

/// Stepper settings taken from a [`SimulationGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub tol_coll: f64,
    pub boundary: ZeroBoundary,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            tol_coll: SimulationGrid::DEFAULT_TOL_COLL,
            boundary: ZeroBoundary::LocalDimension,
        }
    }
}

impl From<&SimulationGrid> for StepOptions {
    fn from(g: &SimulationGrid) -> Self {
        StepOptions { tol_coll: g.tol_coll, boundary: g.boundary }
    }
}

/// `(|x_i| + |x_j|) / (x_i - x_j)` with the collision conventions above.
pub fn pair_ratio(x: &[f64], i: usize, j: usize, tol_coll: f64) -> f64 {
    let d = x[i] - x[j];
    if d.abs() > tol_coll {
        (x[i].abs() + x[j].abs()) / d
    } else if x[i].abs() <= tol_coll && x[j].abs() <= tol_coll {
        if i < j {
            -1.0
        } else {
            1.0
        }
    } else {
        0.0
    }
}

/// Drift of every particle.
pub fn particle_drift(x: &[f64], alpha: f64, tol_coll: f64, out: &mut [f64]) {
    let p = x.len();
    out.fill(alpha);
    for i in 0..p {
        for j in (i + 1)..p {
            let r = pair_ratio(x, i, j, tol_coll);
            out[i] += r;
            // ratio(j, i) = -ratio(i, j) in every branch
            out[j] -= r;
        }
    }
}

/// Drift increment over `h` with each separated pair moved by the exact
/// solution of its two-body repulsion `g' = 2 (|x_i| + |x_j|) / g` instead of
/// the Euler increment. Used once the substep cap stops the step from
/// shrinking with the gap: the Euler increment grows like `1/g`, this one
/// stays below `sqrt((|x_i| + |x_j|) h)`.
fn bounded_drift_increment(x: &[f64], alpha: f64, h: f64, tol_coll: f64, out: &mut [f64]) {
    let p = x.len();
    out.fill(alpha * h);
    for i in 0..p {
        for j in (i + 1)..p {
            let g = x[j] - x[i];
            // moves x_i by -d and x_j by +d (for x_i < x_j); the two-body
            // motion is exact: the gap grows linearly across zero, and as a
            // square root with |x_i| + |x_j| conserved on one side of it
            let d = if g.abs() > tol_coll && x[i] * x[j] <= 0.0 {
                h * g.signum()
            } else if g.abs() > tol_coll {
                let s = x[i].abs() + x[j].abs();
                0.5 * ((g * g + 4.0 * s * h).sqrt() - g.abs()) * g.signum()
            } else {
                -pair_ratio(x, i, j, tol_coll) * h
            };
            out[i] -= d;
            out[j] += d;
        }
    }
}

/// Drift particle `i` would have if it sat at zero with the others fixed.
pub fn drift_at_zero(x: &[f64], i: usize, alpha: f64, tol_coll: f64) -> f64 {
    let mut d = alpha;
    for (j, &xj) in x.iter().enumerate() {
        if j == i {
            continue;
        }
        d += if xj.abs() <= tol_coll {
            if j > i {
                -1.0
            } else {
                1.0
            }
        } else {
            -xj.signum()
        };
    }
    d
}

/// One explicit Euler–Maruyama step of size `dt`; `noise` holds standard
/// normals (Brownian increments divided by `sqrt(dt)`). The result is sorted.
pub fn step_particles(
    x: &ParticleConfig,
    params: &SystemParams,
    dt: f64,
    noise: &[f64],
    opts: &StepOptions,
) -> Result<ParticleConfig> {
    let xs = x.as_slice();
    if xs.len() != params.p || noise.len() != params.p {
        return Err(Error::invalid(format!(
            "state length {} and noise length {} must equal p = {}",
            xs.len(),
            noise.len(),
            params.p
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    let mut out = vec![0.0; xs.len()];
    let mut drift = vec![0.0; xs.len()];
    step_in_place(xs, params.alpha, dt, noise, opts, false, &mut drift, &mut out, &mut Vec::new());
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: f64::NAN, what: format!("particle value {v}") });
    }
    Ok(ParticleConfig::from_sorted_unchecked(out))
}

#[allow(clippy::too_many_arguments)]
fn step_in_place(
    x: &[f64],
    alpha: f64,
    dt: f64,
    noise: &[f64],
    opts: &StepOptions,
    bounded: bool,
    drift: &mut [f64],
    out: &mut [f64],
    crossed: &mut Vec<f64>,
) {
    if bounded {
        bounded_drift_increment(x, alpha, dt, opts.tol_coll, drift);
    } else {
        particle_drift(x, alpha, opts.tol_coll, drift);
        drift.iter_mut().for_each(|d| *d *= dt);
    }
    let sdt = dt.sqrt();
    for i in 0..x.len() {
        let prop = x[i] + 2.0 * x[i].abs().sqrt() * sdt * noise[i] + drift[i];
        out[i] = match opts.boundary {
            ZeroBoundary::Free => prop,
            ZeroBoundary::LocalDimension => {
                let crosses_down = x[i] > 0.0 && prop < 0.0;
                let crosses_up = x[i] < 0.0 && prop > 0.0;
                if !(crosses_down || crosses_up) {
                    prop
                } else {
                    let d0 = drift_at_zero(x, i, alpha, opts.tol_coll);
                    // Positive side: BESQ(d0) near zero. Negative side: -BESQ(-d0).
                    let dim = if crosses_down { d0 } else { -d0 };
                    let v = if dim < 0.0 {
                        prop
                    } else if dim > 0.0 {
                        -prop
                    } else {
                        0.0
                    };
                    // A reflected step never shows up near zero in a snapshot,
                    // so record the touch. From dimension 2 on zero is polar
                    // and the crossing is a discretization artifact.
                    if dim < 2.0 {
                        crossed.push(v);
                    }
                    v
                }
            }
        };
    }
    out.sort_by(f64::total_cmp);
}

/// Simulates the particle system on the grid.
///
/// Inside a base step the step size is halved (at most `substep_cap`
/// substeps) until it is at most `g^2 / (p (1 + |alpha|))^2`, `g` being the
/// smallest neighbour gap at the start of the substep. When the cap stops
/// the halving, the substep runs at the floor size with each pair's
/// repulsion integrated exactly, which keeps a near-collision from throwing
/// the pair apart.
pub fn simulate_particles(
    params: &SystemParams,
    x0: &ParticleConfig,
    grid: &SimulationGrid,
    rng: &RngSpec,
) -> Result<PathRecord> {
    let p = params.p;
    if x0.len() != p {
        return Err(Error::invalid(format!("x0 length {} != p {}", x0.len(), p)));
    }
    let opts = StepOptions::from(grid);
    let mut noise_src = NoiseSource::new(rng);
    let mut path = PathRecord::new(StateKind::Particles, p, grid.t_end);
    let mut log = EventLog::new(p, grid);
    let rate = (p as f64 * (1.0 + params.alpha.abs())).powi(2);
    let max_halvings = grid.max_halvings();

    let mut x = x0.as_slice().to_vec();
    let mut next = vec![0.0; p];
    let mut drift = vec![0.0; p];
    let mut noise = vec![0.0; p];
    let mut crossed = Vec::new();
    let mut touched = vec![false; p];
    let mut exhausted = 0u64;
    let mut first_exhausted = None;

    path.times.push(0.0);
    path.states.push(x.clone());
    log.observe(0.0, &x, &mut path.events);

    for k in 0..grid.steps() {
        let t0 = grid.time(k);
        let t1 = grid.time(k + 1);
        let h = t1 - t0;
        let mut done = 0.0;
        let mut flagged = false;
        while done < h * (1.0 - 1e-12) {
            let gap = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let limit = gap * gap / rate;
            let mut hh = h;
            let mut halvings = 0;
            while hh > limit && halvings < max_halvings {
                hh *= 0.5;
                halvings += 1;
            }
            if hh > limit && !flagged {
                flagged = true;
                exhausted += 1;
                first_exhausted.get_or_insert(t0);
            }
            let hh = hh.min(h - done);
            noise_src.fill(&mut noise);
            crossed.clear();
            step_in_place(&x, params.alpha, hh, &noise, &opts, hh > limit, &mut drift, &mut next, &mut crossed);
            if let Some(v) = next.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite { time: t0 + done, what: format!("particle value {v}") });
            }
            for v in &crossed {
                if let Some(i) = next.iter().position(|w| w == v) {
                    touched[i] = true;
                }
            }
            std::mem::swap(&mut x, &mut next);
            done += hh;
        }
        path.times.push(t1);
        path.states.push(x.clone());
        for (i, t) in touched.iter_mut().enumerate() {
            if std::mem::take(t) {
                log.touched_zero(t1, i, &mut path.events);
            }
        }
        log.observe(t1, &x, &mut path.events);
    }
    if let Some(t) = first_exhausted {
        path.events.push(super::path::Event {
            kind: super::path::EventKind::SubstepCapExhausted,
            time: t,
            value: exhausted as f64,
        });
    }
    Ok(path)
}
