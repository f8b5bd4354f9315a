//! Euler–Maruyama for the matrix equation
//! `dY = sqrt(|Y|) dW + dW^T sqrt(|Y|) + alpha I dt`.

use super::path::{EventLog, PathRecord, SimulationGrid, StateKind};
use super::rng::{NoiseSource, RngSpec};
use crate::domain::SystemParams;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix, SymmetricMatrixState};

/// Each snapshot stores the sorted eigenvalues in `states` and the matrix in
/// `matrices`.
pub fn simulate_wishart(
    params: &SystemParams,
    y0: &SymmetricMatrixState,
    grid: &SimulationGrid,
    rng: &RngSpec,
) -> Result<PathRecord> {
    let p = params.p;
    if y0.dim() != p {
        return Err(Error::invalid(format!("Y0 is {}x{}, expected p = {p}", y0.dim(), y0.dim())));
    }
    let mut noise = NoiseSource::new(rng);
    let mut path = PathRecord::new(StateKind::Eigenvalues, p, grid.t_end);
    let mut log = EventLog::new(p, grid);
    let mut g = Matrix::zeros(p);

    let mut y = y0.clone();
    let mut eig = sym_eigen(&y);
    path.times.push(0.0);
    path.states.push(eig.values.clone());
    path.matrices.push(y.clone());
    log.observe(0.0, &eig.values, &mut path.events);

    for k in 0..grid.steps() {
        let t1 = grid.time(k + 1);
        let h = t1 - grid.time(k);
        let sq: Vec<f64> = eig.values.iter().map(|l| l.abs().sqrt()).collect();
        let s = eig.vectors.congruence_diag(&sq);
        noise.fill(g.as_mut_slice());
        let sg = s.matmul(&g);
        let sdt = h.sqrt();
        let mut next = y.matrix().clone();
        for i in 0..p {
            for j in 0..p {
                next[(i, j)] += sdt * (sg[(i, j)] + sg[(j, i)]);
            }
            next[(i, i)] += params.alpha * h;
        }
        if let Some(v) = next.as_slice().iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t1, what: format!("matrix entry {v}") });
        }
        y = SymmetricMatrixState::new(next);
        eig = sym_eigen(&y);
        path.times.push(t1);
        path.states.push(eig.values.clone());
        path.matrices.push(y.clone());
        log.observe(t1, &eig.values, &mut path.events);
    }
    Ok(path)
}
