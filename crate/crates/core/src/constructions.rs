//! Explicit solutions assembled from independent non-negative subsystems.
//!
//! All three constructions need `alpha in {0, ..., p-2}`:
//! - [`simulate_glued`] negates and reverses a non-negative system below the
//!   split at `p - n*` and stacks a second non-negative system on top;
//! - [`build_non_unique`] keeps a block of particles pinned at zero between a
//!   negated bottom block and a positive top block, which is a solution
//!   exactly when the drift seen by the zero block cancels;
//! - [`build_pinned_nonnegative`] pins the bottom `p - alpha` particles at
//!   zero and runs the rest as an `alpha`-particle system of index `p`.

use serde::Serialize;

use crate::domain::{classify_strong_uniqueness, n_star, ranks, ParticleConfig, SystemParams};
use crate::error::{Error, Result};
use crate::sde::rng::component;
use crate::sde::{
    simulate_particles, EventKind, EventLog, PathRecord, RngSpec, SimulationGrid, StateKind,
};

fn degenerate_alpha(params: &SystemParams) -> Result<usize> {
    params.alpha_in_degenerate_range().ok_or_else(|| {
        Error::pre(format!(
            "construction needs integer alpha in {{0, ..., p-2}}, got p = {}, alpha = {}",
            params.p, params.alpha
        ))
    })
}

fn check_len(params: &SystemParams, x0: &ParticleConfig) -> Result<()> {
    if x0.len() != params.p {
        return Err(Error::invalid(format!("x0 length {} != p {}", x0.len(), params.p)));
    }
    Ok(())
}

/// Split of a degenerate start into a negated bottom system and a top system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GluePlan {
    pub p: usize,
    pub alpha: usize,
    pub p_minus: usize,
    pub alpha_minus: usize,
    pub p_plus: usize,
    pub alpha_plus: usize,
    /// Number of particles below the split, `p - n*`.
    pub split: usize,
    /// Start of the bottom system: `z0[i] = -x0[p_minus - 1 - i]`.
    pub z0: ParticleConfig,
    /// Start of the top system, the top `n*` entries of `x0`.
    pub y0: ParticleConfig,
}

pub fn plan_glue(params: &SystemParams, x0: &ParticleConfig) -> Result<GluePlan> {
    check_len(params, x0)?;
    let alpha = degenerate_alpha(params)?;
    let p = params.p;
    let ns = n_star(p, alpha as i64)?;
    let rk = ranks(x0);
    if rk.plus > ns || rk.minus > p - ns {
        return Err(Error::pre(format!(
            "gluing needs rk+ <= n* = {ns} and rk- <= p - n* = {}, got rk+ = {}, rk- = {}",
            p - ns,
            rk.plus,
            rk.minus
        )));
    }
    let split = p - ns;
    let xs = x0.as_slice();
    let z0 = ParticleConfig::new(xs[..split].iter().rev().map(|v| -v).collect())?;
    let y0 = ParticleConfig::new(xs[split..].to_vec())?;
    debug_assert!(z0[0] >= 0.0 && y0[0] >= 0.0);
    Ok(GluePlan {
        p,
        alpha,
        p_minus: split,
        alpha_minus: ns - alpha,
        p_plus: ns,
        alpha_plus: alpha + p - ns,
        split,
        z0,
        y0,
    })
}

/// Runs both halves of a [`GluePlan`] on independent streams and assembles
/// `X = (-Z reversed, Y)`.
///
/// Every snapshot is checked to keep the bottom block at or below zero and
/// the top block at or above zero, which is what makes the cross-block
/// interaction collapse to `-1`.
pub fn simulate_glued(plan: &GluePlan, grid: &SimulationGrid, rng: &RngSpec) -> Result<PathRecord> {
    let neg = simulate_particles(
        &SystemParams::new(plan.p_minus, plan.alpha_minus as f64)?,
        &plan.z0,
        grid,
        &rng.with_component(component::GLUED_NEGATIVE),
    )?;
    let pos = simulate_particles(
        &SystemParams::new(plan.p_plus, plan.alpha_plus as f64)?,
        &plan.y0,
        grid,
        &rng.with_component(component::GLUED_POSITIVE),
    )?;
    let path = assemble(plan.p, grid, Some(&neg), 0, Some(&pos))?;
    for (k, x) in path.states.iter().enumerate() {
        let (lo, hi) = x.split_at(plan.split);
        let (a, b) = (lo[lo.len() - 1], hi[0]);
        if a > 0.0 || b < 0.0 {
            return Err(Error::Construction {
                time: path.times[k],
                what: format!("blocks crossed zero: X_{} = {a}, X_{} = {b}", plan.split, plan.split + 1),
            });
        }
        if (a != 0.0 || b != 0.0) && (a.abs() + b.abs()) / (a - b) != -1.0 {
            return Err(Error::Construction {
                time: path.times[k],
                what: "cross-block interaction differs from -1".into(),
            });
        }
    }
    Ok(path)
}

/// Stacks `-reverse(neg)`, `zeros` exact zeros and `pos` into one path.
fn assemble(
    p: usize,
    grid: &SimulationGrid,
    neg: Option<&PathRecord>,
    zeros: usize,
    pos: Option<&PathRecord>,
) -> Result<PathRecord> {
    let reference = neg.or(pos);
    let times: Vec<f64> = match reference {
        Some(r) => r.times.clone(),
        None => (0..=grid.steps()).map(|k| grid.time(k)).collect(),
    };
    let mut path = PathRecord::new(StateKind::Particles, p, grid.t_end);
    let mut log = EventLog::new(p, grid);
    for (k, &t) in times.iter().enumerate() {
        let mut x = Vec::with_capacity(p);
        if let Some(n) = neg {
            x.extend(n.states[k].iter().rev().map(|v| -v));
        }
        x.extend(std::iter::repeat_n(0.0, zeros));
        if let Some(q) = pos {
            x.extend_from_slice(&q.states[k]);
        }
        if x.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Construction { time: t, what: format!("assembled state out of order: {x:?}") });
        }
        path.times.push(t);
        log.observe(t, &x, &mut path.events);
        path.states.push(x);
    }
    for sub in neg.into_iter().chain(pos) {
        path.events
            .extend(sub.events_of(|k| *k == EventKind::SubstepCapExhausted).copied());
    }
    Ok(path)
}

/// Layout of a solution with `m` particles held at zero.
///
/// Bottom to top: `l` particles given by a negated system of index
/// `alpha_minus`, `m` zeros, `n` particles of a system of index `alpha_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZeroBlockPlan {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub alpha_plus: usize,
    pub alpha_minus: usize,
}

impl ZeroBlockPlan {
    /// Drift felt by a particle at zero: `alpha - n + l`.
    pub fn zero_drift(&self, alpha: usize) -> i64 {
        alpha as i64 - self.n as i64 + self.l as i64
    }
}

/// All zero-block layouts for `(p, alpha)`, ordered by increasing `m` and
/// then decreasing `n`.
pub fn zero_block_plans(p: usize, alpha: usize) -> Result<Vec<ZeroBlockPlan>> {
    let ns = n_star(p, alpha as i64)?;
    let mut plans: Vec<ZeroBlockPlan> = (0..p - ns)
        .filter_map(|l| {
            let n = alpha + l;
            (n < ns && n + l < p).then(|| ZeroBlockPlan {
                n,
                l,
                m: p - n - l,
                alpha_plus: alpha + p - n,
                alpha_minus: p - l - alpha,
            })
        })
        .collect();
    plans.sort_by_key(|z| (z.m, std::cmp::Reverse(z.n)));
    Ok(plans)
}

/// Picks the first plan from [`zero_block_plans`] that can host `x0`: its
/// positive entries fit in the top block and its negative ones in the bottom.
pub fn plan_zero_block(params: &SystemParams, x0: &ParticleConfig) -> Result<ZeroBlockPlan> {
    check_len(params, x0)?;
    let alpha = degenerate_alpha(params)?;
    if classify_strong_uniqueness(params, x0) {
        return Err(Error::pre("the start has a unique strong solution, no zero-block solution exists"));
    }
    let rk = ranks(x0);
    zero_block_plans(params.p, alpha)?
        .into_iter()
        .find(|z| rk.plus <= z.n && rk.minus <= z.l)
        .ok_or_else(|| {
            Error::pre(format!(
                "no zero-block layout holds rk+ = {} positive and rk- = {} negative entries",
                rk.plus, rk.minus
            ))
        })
}

/// A solution from `x0` that keeps `m >= 1` particles at zero for all time.
pub fn build_non_unique(
    params: &SystemParams,
    x0: &ParticleConfig,
    grid: &SimulationGrid,
    rng: &RngSpec,
) -> Result<PathRecord> {
    let plan = plan_zero_block(params, x0)?;
    let alpha = degenerate_alpha(params)?;
    if plan.zero_drift(alpha) != 0 {
        return Err(Error::Construction {
            time: 0.0,
            what: format!("zero block feels drift {}", plan.zero_drift(alpha)),
        });
    }
    let xs = x0.as_slice();
    let neg = if plan.l > 0 {
        let z0 = ParticleConfig::new(xs[..plan.l].iter().rev().map(|v| -v).collect())?;
        Some(simulate_particles(
            &SystemParams::new(plan.l, plan.alpha_minus as f64)?,
            &z0,
            grid,
            &rng.with_component(component::ZERO_BLOCK_NEGATIVE),
        )?)
    } else {
        None
    };
    let pos = if plan.n > 0 {
        let y0 = ParticleConfig::new(xs[params.p - plan.n..].to_vec())?;
        Some(simulate_particles(
            &SystemParams::new(plan.n, plan.alpha_plus as f64)?,
            &y0,
            grid,
            &rng.with_component(component::ZERO_BLOCK_POSITIVE),
        )?)
    } else {
        None
    };
    assemble(params.p, grid, neg.as_ref(), plan.m, pos.as_ref())
}

/// The non-negative solution with the bottom `p - alpha` particles at zero.
pub fn build_pinned_nonnegative(
    params: &SystemParams,
    x0: &ParticleConfig,
    grid: &SimulationGrid,
    rng: &RngSpec,
) -> Result<PathRecord> {
    check_len(params, x0)?;
    let alpha = degenerate_alpha(params)?;
    if x0[0] < 0.0 {
        return Err(Error::pre(format!("pinned construction needs x0 >= 0, got x_1 = {}", x0[0])));
    }
    let rk = ranks(x0).total;
    if rk > alpha {
        return Err(Error::pre(format!("pinned construction needs rk <= alpha = {alpha}, got rk = {rk}")));
    }
    let top = if alpha > 0 {
        let y0 = ParticleConfig::new(x0.as_slice()[params.p - alpha..].to_vec())?;
        Some(simulate_particles(
            &SystemParams::new(alpha, params.p as f64)?,
            &y0,
            grid,
            &rng.with_component(component::PINNED),
        )?)
    } else {
        None
    };
    assemble(params.p, grid, None, params.p - alpha, top.as_ref())
}
