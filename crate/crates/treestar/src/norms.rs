//! Operator norms at finite levels.
//!
//! The norm of an element is the supremum of its level norms, and the level
//! norms are nondecreasing, so profiles over n = 0..N approximate it from
//! below. Each level norm is the top singular value of the sparse level
//! matrix, found by power iteration on x*x with a fixed seed; runs are
//! deterministic.

use crate::action::LevelError;
use crate::algebra::AlgebraElement;
use crate::automaton::Automaton;
use crate::defaults;
use crate::levelrep::{rho_level, LevelMatrix};
use nalgebra::{Complex, DMatrix};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// False when the iteration hit its cap; `value` is then the best
    /// estimate reached, a lower bound up to the last correction.
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NormProfile {
    pub entries: Vec<(u32, NormEstimate)>,
}

impl NormProfile {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, e)| e.value).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|(_, e)| e.converged)
    }
}

pub fn operator_norm_level(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
    tol: f64,
) -> Result<NormEstimate, LevelError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let m = rho_level(aut, x, n)?;
    Ok(matrix_norm(&m, tol))
}

pub fn norm_profile(
    aut: &Automaton,
    x: &AlgebraElement,
    max_level: u32,
    tol: f64,
) -> Result<NormProfile, LevelError> {
    let mut entries = Vec::with_capacity(max_level as usize + 1);
    for n in 0..=max_level {
        entries.push((n, operator_norm_level(aut, x, n, tol)?));
    }
    Ok(NormProfile { entries })
}

/// Top singular value of a sparse level matrix by power iteration on the
/// Gram operator, geometric-tail stopping.
pub fn matrix_norm(m: &LevelMatrix, tol: f64) -> NormEstimate {
    let a = m.float_rows();
    let ah = m.adjoint().float_rows();
    let dim = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(defaults::POWER_SEED);
    let mut v: Vec<Complex<f64>> = (0..dim)
        .map(|_| Complex::new(unit_f64(&mut rng), unit_f64(&mut rng)))
        .collect();
    if !normalize(&mut v) {
        return NormEstimate {
            value: 0.0,
            converged: true,
            iterations: 0,
        };
    }
    let mut lambda_prev = f64::NAN;
    let mut delta_prev = f64::NAN;
    let mut flat_streak = 0u32;
    for k in 1..=defaults::POWER_MAX_ITERS {
        let w = matvec(&a, &v);
        // Rayleigh quotient of x*x at the unit vector v
        let lambda: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        if lambda == 0.0 {
            return NormEstimate {
                value: 0.0,
                converged: true,
                iterations: k,
            };
        }
        let mut u = matvec(&ah, &w);
        if !normalize(&mut u) {
            return NormEstimate {
                value: lambda.sqrt(),
                converged: true,
                iterations: k,
            };
        }
        v = u;
        if lambda_prev.is_finite() {
            let delta = (lambda - lambda_prev).abs();
            if delta <= f64::EPSILON * lambda {
                flat_streak += 1;
            } else {
                flat_streak = 0;
            }
            // the Rayleigh iterates converge geometrically; extrapolate the
            // tail from the last two increments
            let tail = if delta_prev.is_finite() && delta_prev > 0.0 {
                let r = (delta / delta_prev).clamp(0.0, 0.999);
                delta * r / (1.0 - r)
            } else {
                f64::INFINITY
            };
            let done = flat_streak >= 2 || (k >= 4 && delta + tail <= tol * lambda);
            if done {
                return NormEstimate {
                    value: lambda.sqrt(),
                    converged: true,
                    iterations: k,
                };
            }
            delta_prev = delta;
        }
        lambda_prev = lambda;
    }
    NormEstimate {
        value: lambda_prev.max(0.0).sqrt(),
        converged: false,
        iterations: defaults::POWER_MAX_ITERS,
    }
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() as f64) / (u64::MAX as f64) * 2.0 - 1.0
}

fn matvec(rows: &[Vec<(usize, Complex<f64>)>], v: &[Complex<f64>]) -> Vec<Complex<f64>> {
    rows.iter()
        .map(|row| row.iter().map(|(j, c)| c * v[*j]).sum())
        .collect()
}

fn normalize(v: &mut [Complex<f64>]) -> bool {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    for z in v.iter_mut() {
        *z /= norm;
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct JordanFixture {
    pub k: usize,
    pub norm: f64,
    pub inverse_norm: f64,
    pub norm_bound: f64,
    pub inverse_norm_bound: f64,
    /// Exact: the matrix is unitriangular, so its spectrum is {1}.
    pub spectrum: Vec<f64>,
}

/// The upper-bidiagonal counterexample family: ones on the diagonal, minus
/// ones above it. Its norm stays below 2 while the inverse norm grows like
/// the square root of the dimension, although the spectrum is {1} at every
/// size; spectra of non-normal elements do not control norms.
pub fn jordan_fixture(k: usize) -> JordanFixture {
    assert!(k >= 1, "dimension must be positive");
    let a = DMatrix::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            1.0
        } else if j == i + 1 {
            -1.0
        } else {
            0.0
        }
    });
    // inverse of I - N over a nilpotent shift: the full upper-triangular of
    // ones
    let a_inv = DMatrix::<f64>::from_fn(k, k, |i, j| if j >= i { 1.0 } else { 0.0 });
    JordanFixture {
        k,
        norm: top_singular_value(&a),
        inverse_norm: top_singular_value(&a_inv),
        norm_bound: 2.0,
        inverse_norm_bound: (k as f64).sqrt(),
        spectrum: vec![1.0],
    }
}

fn top_singular_value(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use approx::assert_abs_diff_eq;

    fn odo() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "a"
output = [2, 1]
sections = ["a", "1"]
"#,
        )
        .unwrap()
    }

    fn subfix() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "t"
output = [2, 1]
sections = ["1", "1"]

[[states]]
name = "s"
output = [1, 2]
sections = ["t", "1"]
"#,
        )
        .unwrap()
    }

    /// Independent oracle: the level matrix of the odometer generator is the
    /// cyclic shift, so eigenvalues of i(a - a^-1) are -2 sin(2 pi k / 2^n).
    fn circulant_norm(n: u32) -> f64 {
        let m = 1u64 << n;
        (0..m)
            .map(|k| (2.0 * (2.0 * std::f64::consts::PI * k as f64 / m as f64).sin()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_words_have_norm_one() {
        let aut = subfix();
        let x = parse_expression(&aut, "s*t").unwrap();
        for n in 0..=5 {
            let e = operator_norm_level(&aut, &x, n, 1e-10).unwrap();
            assert!(e.converged);
            assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn involution_plus_one_has_norm_two() {
        let aut = subfix();
        let x = parse_expression(&aut, "1 + s").unwrap();
        let e = operator_norm_level(&aut, &x, 3, 1e-10).unwrap();
        assert!(e.converged);
        assert_abs_diff_eq!(e.value, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn odometer_commutator_matches_the_circulant_oracle() {
        let aut = odo();
        let x = parse_expression(&aut, "i*(a - a^-1)").unwrap();
        for n in 0..=6 {
            let e = operator_norm_level(&aut, &x, n, 1e-10).unwrap();
            assert!(e.converged, "level {n}");
            assert_abs_diff_eq!(e.value, circulant_norm(n), epsilon = 1e-8);
        }
    }

    #[test]
    fn profiles_are_nondecreasing() {
        let aut = odo();
        for text in ["i*(a - a^-1)", "a + a^-1", "1 + a + a^-1"] {
            let x = parse_expression(&aut, text).unwrap();
            let profile = norm_profile(&aut, &x, 6, 1e-10).unwrap();
            assert!(profile.all_converged());
            let vals = profile.values();
            for w in vals.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "profile dipped: {vals:?}");
            }
        }
    }

    #[test]
    fn zero_element_has_zero_profile() {
        let aut = subfix();
        let x = parse_expression(&aut, "s - s").unwrap();
        let profile = norm_profile(&aut, &x, 4, 1e-10).unwrap();
        assert!(profile.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn jordan_family_bounds() {
        for k in [1usize, 4, 16, 64] {
            let f = jordan_fixture(k);
            assert!(f.norm <= f.norm_bound + 1e-9, "k={k} norm {}", f.norm);
            assert!(
                f.inverse_norm >= f.inverse_norm_bound - 1e-9,
                "k={k} inverse norm {}",
                f.inverse_norm
            );
            assert_eq!(f.spectrum, vec![1.0]);
        }
        let f1 = jordan_fixture(1);
        assert_abs_diff_eq!(f1.norm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f1.inverse_norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_oracle_agrees_with_power_iteration() {
        let aut = subfix();
        let x = parse_expression(&aut, "(1 + i)*s + t - 1/2*s*t").unwrap();
        let m = rho_level(&aut, &x, 3).unwrap();
        let e = matrix_norm(&m, 1e-12);
        let dense = m.to_dense();
        let sv = dense.svd(false, false).singular_values;
        let top = sv.iter().cloned().fold(0.0, f64::max);
        assert!(e.converged);
        assert_abs_diff_eq!(e.value, top, epsilon = 1e-8);
    }
}
