//! Core types and the exact classification of start points.
//!
//! Everything here is deterministic and works on exact values: ranks compare
//! against zero without tolerance, and integer-valued `alpha` is detected by
//! an exact integrality test.

use serde::Serialize;

use crate::error::{Error, Result};

/// Particle count `p` and drift dimension `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    pub p: usize,
    pub alpha: f64,
}

impl SystemParams {
    pub fn new(p: usize, alpha: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("p must be at least 1"));
        }
        if !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
        }
        Ok(SystemParams { p, alpha })
    }

    /// `alpha` as an integer when it is exactly integral.
    pub fn alpha_integer(&self) -> Option<i64> {
        exact_integer(self.alpha)
    }

    /// `alpha` as an index in `{0, ..., p-2}`, the degenerate range where
    /// uniqueness can fail.
    pub fn alpha_in_degenerate_range(&self) -> Option<usize> {
        match self.alpha_integer() {
            Some(a) if a >= 0 && (a as usize) + 2 <= self.p => Some(a as usize),
            _ => None,
        }
    }
}

pub(crate) fn exact_integer(v: f64) -> Option<i64> {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 {
        Some(v as i64)
    } else {
        None
    }
}

/// Weakly increasing vector of particle positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ParticleConfig(Vec<f64>);

impl ParticleConfig {
    /// Accepts an already ordered, finite, non-empty vector.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("particle configuration is empty"));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite particle position {v}")));
        }
        if x.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid(format!(
                "particle positions must be weakly increasing, got {x:?}"
            )));
        }
        Ok(ParticleConfig(x))
    }

    /// Sorts the input first.
    pub fn from_unsorted(mut x: Vec<f64>) -> Result<Self> {
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite particle position {v}")));
        }
        x.sort_by(f64::total_cmp);
        Self::new(x)
    }

    pub(crate) fn from_sorted_unchecked(x: Vec<f64>) -> Self {
        debug_assert!(x.windows(2).all(|w| w[0] <= w[1]));
        ParticleConfig(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(x_1, ..., x_p) -> (-x_p, ..., -x_1)`.
    pub fn reflected(&self) -> Self {
        ParticleConfig(self.0.iter().rev().map(|v| -v).collect())
    }
}

impl std::ops::Index<usize> for ParticleConfig {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Counts of strictly positive, strictly negative and non-zero entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ranks {
    pub plus: usize,
    pub minus: usize,
    pub total: usize,
}

pub fn ranks(x: &ParticleConfig) -> Ranks {
    let plus = x.as_slice().iter().filter(|&&v| v > 0.0).count();
    let minus = x.as_slice().iter().filter(|&&v| v < 0.0).count();
    Ranks { plus, minus, total: plus + minus }
}

/// The splitting index `n*` with `2 n* in {p + alpha, p + alpha + 1}`.
///
/// Defined only for `alpha in {0, ..., p-2}`.
pub fn n_star(p: usize, alpha: i64) -> Result<usize> {
    if alpha < 0 || (alpha as usize) + 2 > p {
        return Err(Error::pre(format!(
            "n* needs alpha in {{0, ..., p-2}}, got p = {p}, alpha = {alpha}"
        )));
    }
    Ok((p + alpha as usize).div_ceil(2))
}

fn check_len(params: &SystemParams, x: &ParticleConfig) -> Result<()> {
    if x.len() != params.p {
        return Err(Error::invalid(format!(
            "x0 length {} != p {}",
            x.len(),
            params.p
        )));
    }
    Ok(())
}

/// Whether the ordered system has a unique strong solution from `x`.
///
/// Negative integer `alpha` with `|alpha| <= p-2` is reduced to the positive
/// case through `(alpha, x) -> (-alpha, reflected x)`.
pub fn classify_strong_uniqueness(params: &SystemParams, x: &ParticleConfig) -> bool {
    let p = params.p;
    let Some(a) = params.alpha_integer() else {
        return true;
    };
    if a.unsigned_abs() as usize + 2 > p {
        return true;
    }
    let (alpha, rk) = if a >= 0 {
        (a, ranks(x))
    } else {
        (-a, ranks(&x.reflected()))
    };
    let ns = n_star(p, alpha).expect("alpha checked to be in range");
    rk.plus > ns || rk.minus > p - ns
}

/// Whether a unique strong non-negative solution exists from `x` (`x_1 >= 0`).
pub fn classify_nonnegative_solution(params: &SystemParams, x: &ParticleConfig) -> Result<bool> {
    check_len(params, x)?;
    if x[0] < 0.0 {
        return Err(Error::pre(format!(
            "non-negative solutions need x_1 >= 0, got {}",
            x[0]
        )));
    }
    if params.alpha >= params.p as f64 - 1.0 {
        return Ok(true);
    }
    Ok(match params.alpha_in_degenerate_range() {
        Some(a) => ranks(x).total <= a,
        None => false,
    })
}

/// Which particles of the non-colliding system from a non-negative start
/// reach zero and which enter the negative half-line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructurePrediction {
    pub n: i64,
    pub hits_zero: Vec<bool>,
    pub goes_negative: Vec<bool>,
}

pub fn structure_prediction(params: &SystemParams) -> Result<StructurePrediction> {
    let p = params.p as f64;
    if params.alpha >= p + 1.0 {
        return Err(Error::pre(format!(
            "structure prediction needs alpha < p + 1, got alpha = {}",
            params.alpha
        )));
    }
    let n = ((p + 1.0 - params.alpha) / 2.0).ceil() as i64;
    let hits_zero = (1..=params.p)
        .map(|i| p + 3.0 - params.alpha > 2.0 * i as f64)
        .collect();
    let goes_negative = (1..=params.p)
        .map(|i| p + 1.0 - params.alpha > 2.0 * i as f64)
        .collect();
    Ok(StructurePrediction { n, hits_zero, goes_negative })
}

/// Everything the classification results say about `(params, x)`.
///
/// Fields that do not apply are `None` (serialized as `null`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub p: usize,
    pub alpha: f64,
    pub n_star: Option<usize>,
    pub rk_plus: usize,
    pub rk_minus: usize,
    pub rk: usize,
    pub unique_strong: bool,
    /// Set when `alpha` is a negative integer in the degenerate range and the
    /// verdict was obtained on the reflected instance.
    pub reflected: bool,
    pub nonneg_exists: Option<bool>,
    pub structure_n: Option<i64>,
    pub hits_zero: Option<Vec<bool>>,
    pub goes_negative: Option<Vec<bool>>,
}

pub fn classify(params: &SystemParams, x: &ParticleConfig) -> Result<ClassificationReport> {
    check_len(params, x)?;
    let rk = ranks(x);
    let abs_alpha = params
        .alpha_integer()
        .filter(|a| a.unsigned_abs() as usize + 2 <= params.p)
        .map(|a| a.abs());
    let reflected = params.alpha_integer().is_some_and(|a| a < 0) && abs_alpha.is_some();
    let n_star = abs_alpha.map(|a| n_star(params.p, a).expect("range checked"));
    let nonneg_start = x[0] >= 0.0;
    let nonneg_exists = if nonneg_start {
        Some(classify_nonnegative_solution(params, x)?)
    } else {
        None
    };
    let structure = if nonneg_start && params.alpha < params.p as f64 + 1.0 {
        Some(structure_prediction(params)?)
    } else {
        None
    };
    Ok(ClassificationReport {
        p: params.p,
        alpha: params.alpha,
        n_star,
        rk_plus: rk.plus,
        rk_minus: rk.minus,
        rk: rk.total,
        unique_strong: classify_strong_uniqueness(params, x),
        reflected,
        nonneg_exists,
        structure_n: structure.as_ref().map(|s| s.n),
        hits_zero: structure.as_ref().map(|s| s.hits_zero.clone()),
        goes_negative: structure.map(|s| s.goes_negative),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(x: &[f64]) -> ParticleConfig {
        ParticleConfig::new(x.to_vec()).unwrap()
    }

    fn params(p: usize, alpha: f64) -> SystemParams {
        SystemParams::new(p, alpha).unwrap()
    }

    #[test]
    fn n_star_examples() {
        assert_eq!(n_star(4, 2).unwrap(), 3);
        assert_eq!(n_star(5, 0).unwrap(), 3);
        assert_eq!(n_star(2, 0).unwrap(), 1);
    }

    #[test]
    fn n_star_rejects_out_of_range() {
        assert!(n_star(3, 2).is_err());
        assert!(n_star(3, -1).is_err());
        assert!(n_star(1, 0).is_err());
    }

    #[test]
    fn n_star_bounds() {
        for p in 2..40usize {
            for a in 0..=(p as i64 - 2) {
                let ns = n_star(p, a).unwrap();
                let two = 2 * ns as i64;
                assert!(two == p as i64 + a || two == p as i64 + a + 1);
                assert!(a as usize <= ns && ns < p, "p={p} a={a} n*={ns}");
            }
        }
    }

    #[test]
    fn ranks_examples() {
        assert_eq!(
            ranks(&cfg(&[-1.0, 0.0, 2.0, 3.0])),
            Ranks { plus: 2, minus: 1, total: 3 }
        );
        assert_eq!(ranks(&cfg(&[0.0, 0.0, 0.0])), Ranks { plus: 0, minus: 0, total: 0 });
        assert_eq!(ranks(&cfg(&[1.0, 2.0, 3.0])), Ranks { plus: 3, minus: 0, total: 3 });
    }

    #[test]
    fn ranks_use_exact_zero() {
        assert_eq!(ranks(&cfg(&[-1e-300, 0.0, 1e-300])).total, 2);
    }

    #[test]
    fn strong_uniqueness_examples() {
        assert!(classify_strong_uniqueness(&params(3, 1.0), &cfg(&[1.0, 2.0, 3.0])));
        assert!(!classify_strong_uniqueness(&params(3, 1.0), &cfg(&[0.0, 0.0, 1.0])));
        assert!(classify_strong_uniqueness(&params(3, 2.5), &cfg(&[0.0, 0.0, 0.0])));
    }

    #[test]
    fn non_integer_alpha_is_always_unique() {
        assert!(classify_strong_uniqueness(&params(4, 0.5), &cfg(&[0.0; 4])));
        assert!(classify_strong_uniqueness(&params(4, -1.5), &cfg(&[0.0; 4])));
    }

    #[test]
    fn negative_alpha_uses_reflection() {
        // p = 3, alpha = -1: reflected instance is alpha = 1 with rk+ and rk- swapped.
        assert!(!classify_strong_uniqueness(&params(3, -1.0), &cfg(&[-1.0, 0.0, 0.0])));
        assert!(classify_strong_uniqueness(&params(3, -1.0), &cfg(&[-3.0, -2.0, -1.0])));
        let report = classify(&params(3, -1.0), &cfg(&[-1.0, 0.0, 0.0])).unwrap();
        assert!(report.reflected);
        assert_eq!(report.n_star, Some(2));
    }

    #[test]
    fn nonnegative_examples() {
        assert!(classify_nonnegative_solution(&params(3, 3.0), &cfg(&[0.0, 1.0, 5.0])).unwrap());
        assert!(classify_nonnegative_solution(&params(3, 1.0), &cfg(&[0.0, 0.0, 2.0])).unwrap());
        assert!(!classify_nonnegative_solution(&params(3, 1.0), &cfg(&[0.0, 1.0, 2.0])).unwrap());
    }

    #[test]
    fn nonnegative_rejects_negative_start() {
        assert!(matches!(
            classify_nonnegative_solution(&params(3, 1.0), &cfg(&[-1.0, 0.0, 2.0])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn nonnegative_one_particle_is_alpha_sign() {
        for alpha in [-2.0, -0.5, 0.0, 0.5, 3.0] {
            for x in [0.0, 1.0, 7.5] {
                let got = classify_nonnegative_solution(&params(1, alpha), &cfg(&[x])).unwrap();
                assert_eq!(got, alpha >= 0.0, "alpha={alpha} x={x}");
            }
        }
    }

    #[test]
    fn structure_examples() {
        let s = structure_prediction(&params(3, 0.0)).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.hits_zero, vec![true, true, false]);
        assert_eq!(s.goes_negative, vec![true, false, false]);

        let s = structure_prediction(&params(2, 1.5)).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!(s.hits_zero, vec![true, false]);
        assert_eq!(s.goes_negative, vec![false, false]);

        let s = structure_prediction(&params(2, 1.0)).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!(s.hits_zero, vec![true, false]);
        assert_eq!(s.goes_negative, vec![false, false]);
    }

    #[test]
    fn structure_rejects_large_alpha() {
        assert!(structure_prediction(&params(2, 3.0)).is_err());
        assert!(structure_prediction(&params(2, 2.999)).is_ok());
    }

    #[test]
    fn structure_flags_agree_with_n() {
        for p in 1..10usize {
            for k in -40..(4 * p as i64 + 4) {
                let alpha = k as f64 / 4.0;
                let Ok(s) = structure_prediction(&params(p, alpha)) else {
                    continue;
                };
                for i in 1..=p {
                    assert_eq!(s.hits_zero[i - 1], (i as i64) <= s.n, "p={p} a={alpha} i={i}");
                    assert_eq!(s.goes_negative[i - 1], (i as i64) <= s.n - 1);
                }
            }
        }
    }

    #[test]
    fn report_serializes_stable_keys() {
        let r = classify(&params(3, 1.0), &cfg(&[1.0, 2.0, 3.0])).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "n_star",
            "rk_plus",
            "rk_minus",
            "rk",
            "unique_strong",
            "nonneg_exists",
            "structure_n",
            "hits_zero",
            "goes_negative",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["unique_strong"], true);
    }

    #[test]
    fn config_validation() {
        assert!(ParticleConfig::new(vec![2.0, 1.0]).is_err());
        assert!(ParticleConfig::new(vec![]).is_err());
        assert!(ParticleConfig::new(vec![f64::NAN]).is_err());
        assert_eq!(
            ParticleConfig::from_unsorted(vec![2.0, -1.0]).unwrap().as_slice(),
            &[-1.0, 2.0]
        );
        assert!(SystemParams::new(0, 1.0).is_err());
    }

    #[test]
    fn alpha_zero_odd_p_is_not_reflection_symmetric() {
        let x = ParticleConfig::new(vec![-1.0, -1.0, 0.0]).unwrap();
        assert!(classify_strong_uniqueness(&params(3, 0.0), &x));
        assert!(!classify_strong_uniqueness(&params(3, 0.0), &x.reflected()));
    }

    fn arb_case() -> impl Strategy<Value = (usize, i64, Vec<f64>)> {
        (2usize..8).prop_flat_map(|p| {
            (
                Just(p),
                -(p as i64 - 2)..=(p as i64 - 2),
                proptest::collection::vec(prop_oneof![Just(-1.0), Just(0.0), Just(2.0)], p),
            )
        })
    }

    proptest! {
        #[test]
        fn reflection_invariance((p, a, x) in arb_case()) {
            // at alpha = 0 with odd p the two sides use different n* splits
            prop_assume!(a != 0 || p % 2 == 0);
            let x = ParticleConfig::from_unsorted(x).unwrap();
            let lhs = classify_strong_uniqueness(&params(p, a as f64), &x);
            let rhs = classify_strong_uniqueness(&params(p, -(a as f64)), &x.reflected());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn hits_zero_implied_by_goes_negative(p in 1usize..12, alpha in -20.0f64..12.0) {
            if let Ok(s) = structure_prediction(&params(p, alpha)) {
                for i in 0..p {
                    prop_assert!(!s.goes_negative[i] || s.hits_zero[i]);
                    if i > 0 {
                        prop_assert!(s.hits_zero[i - 1] >= s.hits_zero[i]);
                        prop_assert!(s.goes_negative[i - 1] >= s.goes_negative[i]);
                    }
                }
            }
        }
    }
}
