use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrixState;
use crate::sympoly::{elementary_of, SymPolyVector};

/// How the particle stepper treats a proposal that crosses zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroBoundary {
    /// Compare against the local dimension at zero: a particle may only
    /// cross when the drift it would have at zero points across. Otherwise
    /// the proposal is reflected, or held at zero when that drift vanishes.
    LocalDimension,
    /// Plain Euler–Maruyama, crossings are never corrected.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationGrid {
    pub t_end: f64,
    pub dt: f64,
    /// Max number of substeps per base step (rounded down to a power of 2).
    pub substep_cap: u32,
    pub tol_coll: f64,
    pub tol_zero: f64,
    pub boundary: ZeroBoundary,
}

impl SimulationGrid {
    pub const DEFAULT_SUBSTEP_CAP: u32 = 1024;
    pub const DEFAULT_TOL_COLL: f64 = 1e-12;
    pub const DEFAULT_TOL_ZERO: f64 = 1e-9;

    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        SimulationGrid {
            t_end,
            dt,
            substep_cap: Self::DEFAULT_SUBSTEP_CAP,
            tol_coll: Self::DEFAULT_TOL_COLL,
            tol_zero: Self::DEFAULT_TOL_ZERO,
            boundary: ZeroBoundary::LocalDimension,
        }
        .validated()
    }

    pub fn with_tol_zero(mut self, tol: f64) -> Result<Self> {
        self.tol_zero = tol;
        self.validated()
    }

    pub fn with_tol_coll(mut self, tol: f64) -> Result<Self> {
        self.tol_coll = tol;
        self.validated()
    }

    pub fn with_substep_cap(mut self, cap: u32) -> Result<Self> {
        self.substep_cap = cap;
        self.validated()
    }

    pub fn with_boundary(mut self, boundary: ZeroBoundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validated(self) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.t_end) {
            return Err(Error::invalid(format!("horizon must be > 0, got {}", self.t_end)));
        }
        if !positive(self.dt) {
            return Err(Error::invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.substep_cap < 1 {
            return Err(Error::invalid("substep_cap must be >= 1"));
        }
        if !positive(self.tol_coll) || !positive(self.tol_zero) {
            return Err(Error::invalid("tolerances must be > 0"));
        }
        Ok(self)
    }

    /// Number of base steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() <= 1e-9 * self.t_end {
            n as usize
        } else {
            (self.t_end / self.dt).ceil() as usize
        }
    }

    /// Time of grid point `k`.
    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps() {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }

    pub(crate) fn max_halvings(&self) -> u32 {
        31 - self.substep_cap.leading_zeros()
    }
}

/// What the primary `states` of a path hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    /// Ordered particle positions.
    Particles,
    /// `(e_1, ..., e_p)`; `mapped` holds the recovered particles.
    Polys,
    /// Ordered eigenvalues; `matrices` holds the matrix states.
    Eigenvalues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// First recorded time with `X_i <= tol_zero`, or end of the first base
    /// step in which the particle crossed zero (1-based particle).
    HitZero { particle: usize },
    /// First recorded time with `X_i < -tol_zero`.
    WentNegative { particle: usize },
    /// First recorded time with `|X_j - X_i| <= tol_coll`.
    Collision { i: usize, j: usize },
    /// Root recovery left the real-rooted set; `value` is the residual.
    ProjectionResidual,
    /// The adaptive substep rule wanted more than `substep_cap` substeps;
    /// `value` counts base steps where it happened.
    SubstepCapExhausted,
    /// Polynomial integration stopped because a recovered particle went
    /// below `-tol_zero`.
    Exit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    #[serde(flatten)]
    pub kind: EventKind,
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub kind: StateKind,
    pub p: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Particles recovered from polynomial states (`Polys` only).
    pub mapped: Vec<Vec<f64>>,
    /// Matrix states (`Eigenvalues` only).
    pub matrices: Vec<SymmetricMatrixState>,
    pub events: Vec<Event>,
    /// Horizon requested from the grid; a path that stopped early ends
    /// before it.
    pub t_end: f64,
}

impl PathRecord {
    pub(crate) fn new(kind: StateKind, p: usize, t_end: f64) -> Self {
        PathRecord {
            kind,
            p,
            times: Vec::new(),
            states: Vec::new(),
            mapped: Vec::new(),
            matrices: Vec::new(),
            events: Vec::new(),
            t_end,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Whether the path reached the grid horizon.
    pub fn completed(&self) -> bool {
        self.times.last().is_some_and(|&t| (t - self.t_end).abs() <= 1e-9 * self.t_end.max(1.0))
    }

    /// Particle snapshot `k` in whatever representation the path holds.
    pub fn particles(&self, k: usize) -> &[f64] {
        match self.kind {
            StateKind::Polys => &self.mapped[k],
            _ => &self.states[k],
        }
    }

    /// `(e_0, ..., e_p)` at snapshot `k`.
    pub fn polys(&self, k: usize) -> SymPolyVector {
        match self.kind {
            StateKind::Polys => SymPolyVector::from_tail(&self.states[k]),
            _ => SymPolyVector::new(elementary_of(&self.states[k])).expect("e_0 = 1"),
        }
    }

    pub fn last_particles(&self) -> &[f64] {
        self.particles(self.len() - 1)
    }

    pub fn events_of(&self, pred: impl Fn(&EventKind) -> bool) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| pred(&e.kind))
    }

    /// Smallest value of particle `i` (0-based) over snapshots with
    /// `t in [from, to]`.
    pub fn min_particle(&self, i: usize, from: f64, to: f64) -> f64 {
        (0..self.len())
            .filter(|&k| self.times[k] >= from && self.times[k] <= to)
            .map(|k| self.particles(k)[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest neighbour gap over snapshots with `t in [from, to]`.
    pub fn min_gap(&self, from: f64, to: f64) -> f64 {
        (0..self.len())
            .filter(|&k| self.times[k] >= from && self.times[k] <= to)
            .flat_map(|k| {
                let x = self.particles(k);
                x.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// First-occurrence event bookkeeping shared by the simulators.
#[derive(Debug, Clone)]
pub(crate) struct EventLog {
    hit_zero: Vec<bool>,
    went_negative: Vec<bool>,
    collided: Vec<bool>,
    tol_zero: f64,
    tol_coll: f64,
}

impl EventLog {
    pub(crate) fn new(p: usize, grid: &SimulationGrid) -> Self {
        EventLog {
            hit_zero: vec![false; p],
            went_negative: vec![false; p],
            collided: vec![false; p.saturating_sub(1)],
            tol_zero: grid.tol_zero,
            tol_coll: grid.tol_coll,
        }
    }

    /// Particle `i` (0-based) reached zero between snapshots without ending
    /// up near it.
    pub(crate) fn touched_zero(&mut self, t: f64, i: usize, events: &mut Vec<Event>) {
        if !self.hit_zero[i] {
            self.hit_zero[i] = true;
            events.push(Event { kind: EventKind::HitZero { particle: i + 1 }, time: t, value: 0.0 });
        }
    }

    pub(crate) fn observe(&mut self, t: f64, x: &[f64], events: &mut Vec<Event>) {
        for (i, &v) in x.iter().enumerate() {
            if !self.hit_zero[i] && v <= self.tol_zero {
                self.hit_zero[i] = true;
                events.push(Event { kind: EventKind::HitZero { particle: i + 1 }, time: t, value: v });
            }
            if !self.went_negative[i] && v < -self.tol_zero {
                self.went_negative[i] = true;
                events.push(Event { kind: EventKind::WentNegative { particle: i + 1 }, time: t, value: v });
            }
        }
        for (i, w) in x.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if !self.collided[i] && gap <= self.tol_coll {
                self.collided[i] = true;
                events.push(Event { kind: EventKind::Collision { i: i + 1, j: i + 2 }, time: t, value: gap });
            }
        }
    }
}
