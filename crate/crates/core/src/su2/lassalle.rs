//! Haar averages `F(k) = ∫ f(k·g) dμ(g)` of PSH functions of the matrix
//! entries, sampled along geodesics `k(t) = k₀·exp(itX)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::haar::HaarQuadrature;
use super::orbit::{check_su2, geodesic_point};
use super::{frobenius_sq, Mat2};
use crate::convexity::{ConvexityReport, Margins};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LassalleFunction {
    /// `log ‖M‖_F²`; right-U(2)-invariant.
    FrobeniusLog,
    /// `log(|M₁₁|² + |M₁₂|²)`; also right-U(2)-invariant (row norms).
    FirstRowLog,
    /// `log(|M₁₁|² + |M₂₁|²)`; not right-invariant.
    FirstColumnLog,
}

impl LassalleFunction {
    pub const ALL: [LassalleFunction; 3] =
        [LassalleFunction::FrobeniusLog, LassalleFunction::FirstRowLog, LassalleFunction::FirstColumnLog];

    pub fn name(self) -> &'static str {
        match self {
            LassalleFunction::FrobeniusLog => "frobenius_log",
            LassalleFunction::FirstRowLog => "first_row_log",
            LassalleFunction::FirstColumnLog => "first_column_log",
        }
    }

    pub fn eval(self, m: &Mat2) -> f64 {
        match self {
            LassalleFunction::FrobeniusLog => frobenius_sq(m).ln(),
            LassalleFunction::FirstRowLog => (m[(0, 0)].norm_sqr() + m[(0, 1)].norm_sqr()).ln(),
            LassalleFunction::FirstColumnLog => (m[(0, 0)].norm_sqr() + m[(1, 0)].norm_sqr()).ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassalleProfile {
    pub function: LassalleFunction,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub report: ConvexityReport,
}

/// `F(k(t))` on `ts`; `x = 0` gives the constant path `k₀`.
pub fn lassalle_average(
    function: LassalleFunction,
    k0: &Mat2,
    x: &Mat2,
    ts: &[f64],
    quad: &HaarQuadrature,
) -> Result<LassalleProfile> {
    if x.iter().any(|z| z.norm() > 0.0) {
        check_su2(x)?;
    }
    if ts.len() < 3 || ts.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("t grid needs at least 3 finite points"));
    }
    let values: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            let k = geodesic_point(k0, x, t);
            let scale = frobenius_sq(&k);
            if !(k.determinant().norm() > 1e-14 * scale) {
                return Err(Error::SingularMatrix { t });
            }
            Ok(quad.integrate(|g| function.eval(&(k * g.matrix()))))
        })
        .collect::<Result<_>>()?;
    let report = ConvexityReport::from_profile(function.name(), ts, &values, Margins::default())?;
    Ok(LassalleProfile { function, ts: ts.to_vec(), values, report })
}
