//! Euler–Maruyama for the elementary symmetric polynomials of a non-negative
//! start, with correlated noise from the closed-form bracket matrix.

use super::path::{Event, EventKind, EventLog, PathRecord, SimulationGrid, StateKind, ZeroBoundary};
use super::rng::{NoiseSource, RngSpec};
use crate::domain::SystemParams;
use crate::error::{Error, Result};
use crate::linalg::psd_factor;
use crate::sympoly::{
    bracket_matrix_closed, drift_closed_unchecked, elementary_of, real_roots, SymPolyVector,
    ROOT_RESIDUAL_TOL,
};

/// Each snapshot stores `(e_1, ..., e_p)` in `states` and the recovered
/// particles in `mapped`.
///
/// A step that takes the smallest recovered particle below zero is treated
/// like the particle scheme treats a crossing: with
/// [`ZeroBoundary::LocalDimension`] it is reflected (or clamped to zero when
/// `alpha = p - 1`) as long as `alpha >= p - 1`. Otherwise integration stops
/// at the first step whose smallest particle is below `-tol_zero`, logged as
/// [`EventKind::Exit`]. When the
/// polynomial leaves the real-rooted set the state is replaced by the
/// polynomial of the projected roots and the residual is logged.
pub fn simulate_polys(
    params: &SystemParams,
    e0: &SymPolyVector,
    grid: &SimulationGrid,
    rng: &RngSpec,
) -> Result<PathRecord> {
    let p = params.p;
    if e0.p() != p {
        return Err(Error::invalid(format!("e0 has degree {}, expected p = {p}", e0.p())));
    }
    let start = real_roots(e0)?;
    if start.residual > ROOT_RESIDUAL_TOL {
        return Err(Error::pre(format!(
            "e0 is not real-rooted (residual {:e})",
            start.residual
        )));
    }
    if start.roots[0] < -grid.tol_zero {
        return Err(Error::pre(format!(
            "polynomial simulation needs non-negative particles, smallest root is {}",
            start.roots[0]
        )));
    }

    let mut noise = NoiseSource::new(rng);
    let mut path = PathRecord::new(StateKind::Polys, p, grid.t_end);
    let mut log = EventLog::new(p, grid);
    let mut e = e0.clone();
    let mut z = vec![0.0; p];

    path.times.push(0.0);
    path.states.push(e.tail().to_vec());
    path.mapped.push(start.roots.as_slice().to_vec());
    log.observe(0.0, start.roots.as_slice(), &mut path.events);

    for k in 0..grid.steps() {
        let t1 = grid.time(k + 1);
        let h = t1 - grid.time(k);
        let bracket = bracket_matrix_closed(&e);
        let l = psd_factor(bracket.as_state())?;
        noise.fill(&mut z);
        let sdt = h.sqrt();
        let mut next = e.clone();
        for n in 1..=p {
            let diffusion: f64 = (0..p).map(|j| l[(n - 1, j)] * z[j]).sum();
            next.tail_mut()[n - 1] += diffusion * sdt + drift_closed_unchecked(&e, n, params.alpha) * h;
        }
        let fit = real_roots(&next).map_err(|err| match err {
            Error::NonFinite { what, .. } => Error::NonFinite { time: t1, what },
            other => other,
        })?;
        if fit.projected {
            path.events.push(Event { kind: EventKind::ProjectionResidual, time: t1, value: fit.residual });
            let back = elementary_of(fit.roots.as_slice());
            next = SymPolyVector::new(back).expect("e_0 = 1");
        }
        let mut roots = fit.roots.into_vec();
        if roots[0] < 0.0 && grid.boundary == ZeroBoundary::LocalDimension {
            // Every other particle is non-negative, so the lowest one sees
            // dimension alpha - (p - 1) at zero; only a negative dimension
            // lets it through.
            let dim = params.alpha - (p as f64 - 1.0);
            if dim >= 0.0 {
                for r in roots.iter_mut().filter(|r| **r < 0.0) {
                    *r = if dim > 0.0 { -*r } else { 0.0 };
                }
                roots.sort_by(f64::total_cmp);
                next = SymPolyVector::new(elementary_of(&roots)).expect("e_0 = 1");
            }
        }
        e = next;
        path.times.push(t1);
        path.states.push(e.tail().to_vec());
        log.observe(t1, &roots, &mut path.events);
        let exited = roots[0] < -grid.tol_zero;
        path.mapped.push(roots);
        if exited {
            path.events.push(Event { kind: EventKind::Exit, time: t1, value: path.mapped[path.len() - 1][0] });
            break;
        }
    }
    Ok(path)
}
