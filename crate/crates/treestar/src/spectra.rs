//! Level spectra and their unions.
//!
//! For a normal element the spectrum is approximated from inside by the
//! union of its level spectra, so the union report is the honest object;
//! non-normal elements get an error rather than a misleading union. Dense
//! levels are solved exactly sized (hermitian solver when the element is
//! symbolically self-adjoint, complex Schur otherwise); past the dense cap
//! only the extremal eigenvalues of self-adjoint elements are estimated.

use crate::action::LevelError;
use crate::algebra::AlgebraElement;
use crate::automaton::Automaton;
use crate::defaults;
use crate::levelrep::rho_level;
use crate::norms::operator_norm_level;
use crate::scalar::GaussianRational;
use nalgebra::Complex;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumMethod {
    #[serde(rename = "dense-schur")]
    DenseSchur,
    #[serde(rename = "hermitian-dense")]
    HermitianDense,
    #[serde(rename = "iterative-extremal")]
    IterativeExtremal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub level: u32,
    pub method: SpectrumMethod,
    /// Eigenvalue multiset: (value, multiplicity), sorted by real then
    /// imaginary part. Dense methods account for every eigenvalue, so the
    /// multiplicities add up to the dimension.
    pub eigenvalues: Vec<(Complex<f64>, usize)>,
}

impl SpectrumReport {
    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|(_, m)| m).sum()
    }

    pub fn points(&self) -> Vec<Complex<f64>> {
        self.eigenvalues.iter().map(|(z, _)| *z).collect()
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SpectrumError {
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DenseCapExceeded { dim: u64, cap: usize },
    #[error("element is not self-adjoint; the iterative path needs x = star(x)")]
    NotSelfAdjoint,
    #[error("element is not normal: commutator residual {residual:.3e} at the probe level")]
    NotNormal { residual: f64 },
    #[error(transparent)]
    Level(#[from] LevelError),
}

pub fn spectrum_level(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
) -> Result<SpectrumReport, SpectrumError> {
    let dim = aut
        .level_size(n)
        .ok_or(LevelError::TooLarge {
            d: aut.alphabet(),
            n,
            cap: aut.level_cap,
        })?;
    if dim as usize > defaults::DENSE_CAP {
        return extremal_spectrum(aut, x, n);
    }
    let m = rho_level(aut, x, n)?;
    if x.is_self_adjoint(aut) {
        let eig = m.to_dense().symmetric_eigen();
        let points: Vec<Complex<f64>> = eig
            .eigenvalues
            .iter()
            .map(|&l| Complex::new(l, 0.0))
            .collect();
        Ok(SpectrumReport {
            level: n,
            method: SpectrumMethod::HermitianDense,
            eigenvalues: cluster_points(points, defaults::EIGEN_DEDUP_TOL),
        })
    } else {
        let (_, t) = m.to_dense().schur().unpack();
        let points: Vec<Complex<f64>> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
        Ok(SpectrumReport {
            level: n,
            method: SpectrumMethod::DenseSchur,
            eigenvalues: cluster_points(points, defaults::EIGEN_DEDUP_TOL),
        })
    }
}

/// Past the dense cap: the two extremal eigenvalues of a self-adjoint
/// element, obtained from norms of shifted copies.
fn extremal_spectrum(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
) -> Result<SpectrumReport, SpectrumError> {
    if !x.is_self_adjoint(aut) {
        return Err(SpectrumError::NotSelfAdjoint);
    }
    let radius = operator_norm_level(aut, x, n, defaults::POWER_TOL)?.value;
    let c = BigRational::from_float(radius * 1.01 + 1.0).expect("finite norm");
    let shift = AlgebraElement::scalar(GaussianRational::from_rational(c.clone()));
    let c_f = c.to_f64().unwrap();
    // x + c >= 0, so its norm is lambda_max + c; same for c - x
    let upper =
        operator_norm_level(aut, &x.add(&shift, aut), n, defaults::POWER_TOL)?.value - c_f;
    let lower =
        c_f - operator_norm_level(aut, &shift.sub(x, aut), n, defaults::POWER_TOL)?.value;
    let mut points = vec![Complex::new(lower, 0.0)];
    if upper != lower {
        points.push(Complex::new(upper, 0.0));
    }
    Ok(SpectrumReport {
        level: n,
        method: SpectrumMethod::IterativeExtremal,
        eigenvalues: points.into_iter().map(|z| (z, 1)).collect(),
    })
}

pub fn spectrum_union(
    aut: &Automaton,
    x: &AlgebraElement,
    max_level: u32,
    merge_tol: f64,
) -> Result<SpectrumReport, SpectrumError> {
    // normality probe at the deepest level, numeric tolerance on an exact
    // commutator
    let a = rho_level(aut, x, max_level)?;
    let ah = a.adjoint();
    let comm = ah.mul(&a).sub(&a.mul(&ah));
    let residual = comm.frobenius_sq().to_f64().unwrap_or(f64::NAN).sqrt();
    // NaN (overflowed exact residual) must also refuse
    if residual.is_nan() || residual > defaults::NORMALITY_TOL {
        return Err(SpectrumError::NotNormal { residual });
    }
    let mut points = Vec::new();
    let mut method = SpectrumMethod::HermitianDense;
    for n in 0..=max_level {
        let report = spectrum_level(aut, x, n)?;
        if report.method == SpectrumMethod::DenseSchur {
            method = SpectrumMethod::DenseSchur;
        }
        for (z, m) in report.eigenvalues {
            for _ in 0..m {
                points.push(z);
            }
        }
    }
    Ok(SpectrumReport {
        level: max_level,
        method,
        eigenvalues: cluster_points(points, merge_tol),
    })
}

/// Grid clustering: points sharing a merge_tol-sized grid cell merge into
/// their centroid, with the cell count as multiplicity.
fn cluster_points(mut points: Vec<Complex<f64>>, tol: f64) -> Vec<(Complex<f64>, usize)> {
    points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("finite"));
    if tol <= 0.0 {
        return points.into_iter().map(|z| (z, 1)).collect();
    }
    let mut cells: HashMap<(i64, i64), (Complex<f64>, usize)> = HashMap::new();
    for z in points {
        let key = ((z.re / tol).round() as i64, (z.im / tol).round() as i64);
        let cell = cells.entry(key).or_insert((Complex::new(0.0, 0.0), 0));
        cell.0 += z;
        cell.1 += 1;
    }
    let mut out: Vec<(Complex<f64>, usize)> = cells
        .into_values()
        .map(|(sum, count)| (sum / count as f64, count))
        .collect();
    out.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).expect("finite"));
    out
}
