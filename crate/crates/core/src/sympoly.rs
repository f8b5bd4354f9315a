//! Elementary and incomplete symmetric polynomials of the particles.
//!
//! Covers the closed-form drift and covariation of `(e_1, ..., e_p)`, the
//! direct incomplete-polynomial forms they are checked against, and the
//! inverse map from polynomial coordinates back to ordered particles.
//!
//! Indices `n`, `m` are degrees (1-based, as in `e_n`); particle indices in
//! `excluded` sets are 0-based positions into the particle slice.

use num_bigint::BigInt;
use serde::Serialize;

use crate::domain::ParticleConfig;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricMatrixState};

/// `(e_0, e_1, ..., e_p)` with `e_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SymPolyVector(Vec<f64>);

impl SymPolyVector {
    /// Takes `(e_1, ..., e_p)` and prepends `e_0 = 1`.
    pub fn from_tail(tail: &[f64]) -> Self {
        let mut e = Vec::with_capacity(tail.len() + 1);
        e.push(1.0);
        e.extend_from_slice(tail);
        SymPolyVector(e)
    }

    /// Takes the full vector; `e[0]` must be exactly 1.
    pub fn new(e: Vec<f64>) -> Result<Self> {
        if e.len() < 2 {
            return Err(Error::invalid("symmetric polynomial vector needs p >= 1"));
        }
        if e[0] != 1.0 {
            return Err(Error::invalid(format!("e_0 must be 1, got {}", e[0])));
        }
        Ok(SymPolyVector(e))
    }

    pub fn p(&self) -> usize {
        self.0.len() - 1
    }

    /// `e_r`, zero outside `0..=p`.
    pub fn get(&self, r: i64) -> f64 {
        if r < 0 || r as usize > self.p() {
            0.0
        } else {
            self.0[r as usize]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `(e_1, ..., e_p)`.
    pub fn tail(&self) -> &[f64] {
        &self.0[1..]
    }

    pub(crate) fn tail_mut(&mut self) -> &mut [f64] {
        &mut self.0[1..]
    }
}

/// Elementary symmetric polynomials by expanding `prod (t + x_i)` one factor
/// at a time.
pub fn elementary_all(x: &ParticleConfig) -> SymPolyVector {
    SymPolyVector(elementary_of(x.as_slice()))
}

pub(crate) fn elementary_of(x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    for (i, &xi) in x.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += xi * e[k - 1];
        }
    }
    e
}

/// `e_n` over the variables whose positions are not in `excluded`.
pub fn incomplete(x: &ParticleConfig, n: usize, excluded: &[usize]) -> f64 {
    incomplete_of(x.as_slice(), n, excluded)
}

fn incomplete_of(x: &[f64], n: usize, excluded: &[usize]) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let rest: Vec<f64> = x
        .iter()
        .enumerate()
        .filter(|(i, _)| !excluded.contains(i))
        .map(|(_, &v)| v)
        .collect();
    if n > rest.len() {
        return 0.0;
    }
    elementary_of(&rest)[n]
}

fn check_degree(n: usize, p: usize) -> Result<()> {
    if n == 0 || n > p {
        return Err(Error::pre(format!("degree must be in 1..={p}, got {n}")));
    }
    Ok(())
}

/// Drift rate of `e_n(X)` from incomplete-polynomial sums, absolute values
/// kept as printed so any sign pattern is accepted.
pub fn drift_direct(x: &ParticleConfig, n: usize, alpha: f64) -> Result<f64> {
    let xs = x.as_slice();
    let p = xs.len();
    check_degree(n, p)?;
    Ok(drift_direct_parts(xs, n, alpha).0)
}

/// Returns the drift and the sum of absolute values of its terms.
pub(crate) fn drift_direct_parts(xs: &[f64], n: usize, alpha: f64) -> (f64, f64) {
    let p = xs.len();
    let mut first = 0.0;
    for i in 0..p {
        first += incomplete_of(xs, n - 1, &[i]);
    }
    let mut second = 0.0;
    let mut scale = (alpha * first).abs();
    if n >= 2 {
        for i in 0..p {
            for j in (i + 1)..p {
                let term = (xs[i].abs() + xs[j].abs()) * incomplete_of(xs, n - 2, &[i, j]);
                second += term;
                scale += term.abs();
            }
        }
    }
    (alpha * first - second, scale)
}

/// `(p - n + 1)(alpha - n + 1) e_{n-1}`.
pub fn drift_closed(e: &SymPolyVector, n: usize, alpha: f64) -> Result<f64> {
    let p = e.p();
    check_degree(n, p)?;
    Ok(drift_closed_unchecked(e, n, alpha))
}

pub(crate) fn drift_closed_unchecked(e: &SymPolyVector, n: usize, alpha: f64) -> f64 {
    let p = e.p() as f64;
    let nf = n as f64;
    (p - nf + 1.0) * (alpha - nf + 1.0) * e.get(n as i64 - 1)
}

/// Squared diffusion coefficient of `e_n`: `4 sum_k (2k-1) e_{n-k} e_{n+k-1}`.
pub fn diffusion_sq_closed(e: &SymPolyVector, n: usize) -> Result<f64> {
    check_degree(n, e.p())?;
    Ok(bracket_closed_entry(e, n, n))
}

/// Number of terms that can be non-zero in the closed bracket sum for
/// `n <= m`.
pub fn bracket_terms(p: usize, n: usize, m: usize) -> usize {
    n.min(p + 1 - m)
}

/// `4 sum_{k=1}^{K} (m - n + 2k - 1) e_{n-k} e_{m+k-1}` for `n <= m`,
/// truncated at `K = min(n, p + 1 - m)`.
pub(crate) fn bracket_closed_entry(e: &SymPolyVector, n: usize, m: usize) -> f64 {
    let (n, m) = if n <= m { (n, m) } else { (m, n) };
    let big_k = bracket_terms(e.p(), n, m);
    4.0 * closed_bracket_sum(e, n, m, big_k)
}

/// The bracket sum without the factor 4, over `k = 1..=upper`.
pub(crate) fn closed_bracket_sum(e: &SymPolyVector, n: usize, m: usize, upper: usize) -> f64 {
    let (n, m) = (n as i64, m as i64);
    (1..=upper as i64)
        .map(|k| (m - n + 2 * k - 1) as f64 * e.get(n - k) * e.get(m + k - 1))
        .sum()
}

/// Closed-form covariation rates of `(e_1, ..., e_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketMatrix(SymmetricMatrixState);

impl BracketMatrix {
    /// Entry for degrees `n, m` (1-based).
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.0.get(n - 1, m - 1)
    }

    pub fn as_state(&self) -> &SymmetricMatrixState {
        &self.0
    }
}

pub fn bracket_matrix_closed(e: &SymPolyVector) -> BracketMatrix {
    let p = e.p();
    let mut m = Matrix::zeros(p);
    for n in 1..=p {
        for k in n..=p {
            let v = bracket_closed_entry(e, n, k);
            m[(n - 1, k - 1)] = v;
            m[(k - 1, n - 1)] = v;
        }
    }
    BracketMatrix(SymmetricMatrixState::new(m))
}

/// `4 sum_i |x_i| e_{n-1}^{(i)} e_{m-1}^{(i)}`.
pub fn bracket_direct(x: &ParticleConfig, n: usize, m: usize) -> Result<f64> {
    let xs = x.as_slice();
    check_degree(n, xs.len())?;
    check_degree(m, xs.len())?;
    Ok(4.0
        * (0..xs.len())
            .map(|i| xs[i].abs() * incomplete_of(xs, n - 1, &[i]) * incomplete_of(xs, m - 1, &[i]))
            .sum::<f64>())
}

/// Both sides of
/// `sum_i x_i e_{n-1}^{(i)} e_{m-1}^{(i)} = sum_k (m-n+2k-1) e_{n-k} e_{m+k-1}`
/// for non-negative particles and `1 <= n <= m <= p`.
pub fn identity_simple_brack(x: &ParticleConfig, n: usize, m: usize) -> Result<(f64, f64)> {
    let xs = x.as_slice();
    let p = xs.len();
    if !(1 <= n && n <= m && m <= p) {
        return Err(Error::pre(format!("need 1 <= n <= m <= p, got n={n} m={m} p={p}")));
    }
    if let Some(v) = xs.iter().find(|&&v| v < 0.0) {
        return Err(Error::pre(format!("identity needs non-negative particles, got {v}")));
    }
    let lhs = (0..p)
        .map(|i| xs[i] * incomplete_of(xs, n - 1, &[i]) * incomplete_of(xs, m - 1, &[i]))
        .sum();
    let e = elementary_all(x);
    let rhs = closed_bracket_sum(&e, n, m, p);
    Ok((lhs, rhs))
}

/// Both sides of `sum_{r=0}^{N} (j - 2r) C(j, r) = (N + 1) C(j, N + 1)` for
/// `0 <= N <= j - 1`, in exact integers.
pub fn comb_identity(j: u32, big_n: u32) -> Result<(BigInt, BigInt)> {
    if j == 0 || big_n >= j {
        return Err(Error::pre(format!("need j >= 1 and 0 <= N <= j-1, got j={j} N={big_n}")));
    }
    let mut lhs = BigInt::from(0);
    for r in 0..=big_n {
        lhs += (BigInt::from(j) - BigInt::from(2 * r as u64)) * binomial(j, r);
    }
    let rhs = BigInt::from(big_n + 1) * binomial(j, big_n + 1);
    Ok((lhs, rhs))
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Coefficient residual above which a polynomial is declared non-real-rooted.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// Ordered real roots recovered from polynomial coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RootFit {
    pub roots: ParticleConfig,
    /// `max_k |e_k(roots) - e_k| / e_k(|roots|)`.
    pub residual: f64,
    /// Set when some root had to be placed at a critical point because no
    /// sign change was found, i.e. the input sat off the real-rooted set.
    pub projected: bool,
}

/// Inverse of [`elementary_all`] on real-rooted inputs.
///
/// Fails when the best real fit leaves a coefficient residual above
/// [`ROOT_RESIDUAL_TOL`].
pub fn roots_from_polys(e: &SymPolyVector) -> Result<ParticleConfig> {
    let fit = real_roots(e)?;
    if fit.residual > ROOT_RESIDUAL_TOL {
        return Err(Error::NotRealRooted { residual: fit.residual });
    }
    Ok(fit.roots)
}

/// Best real approximation to the roots of
/// `t^p - e_1 t^{p-1} + e_2 t^{p-2} - ... + (-1)^p e_p`.
///
/// Roots are isolated between consecutive critical points (the roots of the
/// derivative, found recursively) and refined by bisection with Newton
/// steps. An interval without a sign change contributes the critical point
/// with the smaller residual, which is the real part of a conjugate pair
/// near a double root.
pub fn real_roots(e: &SymPolyVector) -> Result<RootFit> {
    if let Some(v) = e.as_slice().iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: f64::NAN, what: format!("polynomial coefficient {v}") });
    }
    let p = e.p();
    let coeffs: Vec<f64> = (0..=p)
        .map(|k| if k % 2 == 0 { e.get(k as i64) } else { -e.get(k as i64) })
        .collect();
    let mut projected = false;
    let mut roots = monic_real_roots(&coeffs, &mut projected);
    roots.sort_by(f64::total_cmp);

    let back = elementary_of(&roots);
    let abs_roots: Vec<f64> = roots.iter().map(|r| r.abs()).collect();
    let scale = elementary_of(&abs_roots);
    let mut residual: f64 = 0.0;
    for k in 1..=p {
        let s = scale[k].max(e.get(k as i64).abs());
        let diff = (back[k] - e.get(k as i64)).abs();
        let r = if s > 0.0 { diff / s } else { diff };
        residual = residual.max(r);
    }
    Ok(RootFit {
        roots: ParticleConfig::from_sorted_unchecked(roots),
        residual,
        projected,
    })
}

/// Roots of the monic polynomial with descending coefficients `c` (`c[0] = 1`).
fn monic_real_roots(c: &[f64], projected: &mut bool) -> Vec<f64> {
    let deg = c.len() - 1;
    match deg {
        0 => return Vec::new(),
        1 => return vec![-c[1]],
        _ => {}
    }
    // Derivative, rescaled to be monic.
    let d: Vec<f64> = (0..deg)
        .map(|k| c[k] * (deg - k) as f64 / deg as f64)
        .collect();
    let mut crit = monic_real_roots(&d, projected);
    crit.sort_by(f64::total_cmp);

    let bound = 1.0 + c[1..].iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut edges = Vec::with_capacity(deg + 1);
    edges.push(-bound);
    edges.extend(crit.iter().map(|v| v.clamp(-bound, bound)));
    edges.push(bound);

    let mut roots = Vec::with_capacity(deg);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, _) = horner(c, lo);
        let (fhi, _) = horner(c, hi);
        if flo == 0.0 {
            roots.push(lo);
        } else if fhi == 0.0 {
            roots.push(hi);
        } else if flo.signum() != fhi.signum() {
            roots.push(bracketed_root(c, lo, hi, flo));
        } else {
            // No sign change: the roots in this gap left the real line, or a
            // double root sits at the edge and rounding hid the sign.
            let (glo, ghi) = (flo.abs(), fhi.abs());
            let pick = if glo <= ghi { lo } else { hi };
            let (_, err) = horner(c, pick);
            if glo.min(ghi) > 8.0 * err {
                *projected = true;
            }
            roots.push(pick);
        }
    }
    roots
}

/// Safeguarded Newton inside a sign-change bracket.
fn bracketed_root(c: &[f64], mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let lo_negative = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, _) = horner(c, x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let dfx = derivative_at(c, x);
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Compensated Horner evaluation; returns the value and a bound on its
/// rounding error.
fn horner(c: &[f64], x: f64) -> (f64, f64) {
    let mut s = c[0];
    let mut comp = 0.0;
    let mut abs_acc = c[0].abs();
    for &ck in &c[1..] {
        let (prod, perr) = two_prod(s, x);
        let (sum, serr) = two_sum(prod, ck);
        s = sum;
        comp = comp * x + (perr + serr);
        abs_acc = abs_acc * x.abs() + ck.abs();
    }
    let value = s + comp;
    (value, 4.0 * f64::EPSILON * f64::EPSILON * abs_acc * c.len() as f64 + f64::EPSILON * value.abs())
}

fn derivative_at(c: &[f64], x: f64) -> f64 {
    let deg = c.len() - 1;
    let mut acc = 0.0;
    for (k, &ck) in c[..deg].iter().enumerate() {
        acc = acc * x + ck * (deg - k) as f64;
    }
    acc
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}
