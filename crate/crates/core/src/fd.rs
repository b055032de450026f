//! Central finite differences of scalar functions with per-axis steps.
//!
//! The function may fail (e.g. a stencil point leaves the Kähler domain);
//! the first failure is returned.

use nalgebra::{DMatrix, DVector};

use crate::defaults;
use crate::error::{Error, Result};

/// Step rule `hᵢ = base·(1 + |xᵢ|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRule {
    pub base: f64,
    /// Combine steps `h` and `h/2` as `(4·A(h/2) − A(h))/3`.
    pub richardson: bool,
    /// Largest admissible `base`.
    pub max_base: f64,
}

impl Default for StepRule {
    fn default() -> Self {
        Self { base: defaults::FD_STEP_BASE, richardson: false, max_base: defaults::FD_MAX_STEP }
    }
}

impl StepRule {
    pub fn with_base(base: f64) -> Self {
        Self { base, ..Self::default() }
    }

    pub fn richardson(self) -> Self {
        Self { richardson: true, ..self }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { base: self.base * factor, ..self }
    }

    pub fn steps(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !(self.base.is_finite() && self.base > 0.0) {
            return Err(Error::invalid(format!("finite-difference step must be positive, got {}", self.base)));
        }
        if self.base > self.max_base {
            return Err(Error::StencilTooWide { step: self.base, bound: self.max_base });
        }
        Ok(x.iter().map(|v| self.base * (1.0 + v.abs())).collect())
    }
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

pub fn central_gradient<F>(mut f: F, x: &[f64], h: &[f64]) -> Result<DVector<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let up = f(&shifted(x, &[(i, h[i])]))?;
        let down = f(&shifted(x, &[(i, -h[i])]))?;
        g[i] = (up - down) / (2.0 * h[i]);
    }
    Ok(g)
}

/// Symmetric central-difference Hessian.
pub fn central_hessian<F>(mut f: F, x: &[f64], h: &[f64]) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x.len();
    let f0 = f(x)?;
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let up = f(&shifted(x, &[(i, h[i])]))?;
        let down = f(&shifted(x, &[(i, -h[i])]))?;
        hess[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let pp = f(&shifted(x, &[(i, h[i]), (j, h[j])]))?;
            let pm = f(&shifted(x, &[(i, h[i]), (j, -h[j])]))?;
            let mp = f(&shifted(x, &[(i, -h[i]), (j, h[j])]))?;
            let mm = f(&shifted(x, &[(i, -h[i]), (j, -h[j])]))?;
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

pub fn gradient<F>(mut f: F, x: &[f64], rule: &StepRule) -> Result<DVector<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let h = rule.steps(x)?;
    let coarse = central_gradient(&mut f, x, &h)?;
    if !rule.richardson {
        return Ok(coarse);
    }
    let half: Vec<f64> = h.iter().map(|v| 0.5 * v).collect();
    let fine = central_gradient(&mut f, x, &half)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

pub fn hessian<F>(mut f: F, x: &[f64], rule: &StepRule) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let h = rule.steps(x)?;
    let coarse = central_hessian(&mut f, x, &h)?;
    if !rule.richardson {
        return Ok(coarse);
    }
    let half: Vec<f64> = h.iter().map(|v| 0.5 * v).collect();
    let fine = central_hessian(&mut f, x, &half)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}
