//! Product quadrature for the normalized Haar measure on SU(2).
//!
//! In ZYZ Euler angles the Haar probability measure is
//! `sin θ dθ dφ dψ / 16π²` on `[0, 2π) × [0, π] × [0, 4π)`. The rule is
//! Gauss–Legendre in `cos θ` and the periodic trapezoidal rule in `φ` and
//! `ψ`; it integrates every matrix coefficient of the spin-j
//! representations exactly for j below the resolution.

use std::ops::{Add, Div, Mul};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Su2Element;
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[−1, 1]` (weights sum to 2).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_psi: usize,
}

impl Resolution {
    pub fn doubled(self) -> Self {
        Self { n_theta: 2 * self.n_theta, n_phi: 2 * self.n_phi, n_psi: 2 * self.n_psi }
    }
}

impl From<(usize, usize, usize)> for Resolution {
    fn from((n_theta, n_phi, n_psi): (usize, usize, usize)) -> Self {
        Self { n_theta, n_phi, n_psi }
    }
}

#[derive(Debug, Clone)]
pub struct HaarQuadrature {
    resolution: Resolution,
    /// Normalized Gauss–Legendre weights in `cos θ` (sum 1).
    theta_weights: Vec<f64>,
    /// Row-major `(θ, φ, ψ)`, ψ fastest.
    nodes: Vec<Su2Element>,
    weights: Vec<f64>,
}

pub fn build_haar_quadrature(n_theta: usize, n_phi: usize, n_psi: usize) -> Result<HaarQuadrature> {
    if n_theta < 4 || n_phi < 4 || n_psi < 4 {
        return Err(Error::invalid(format!(
            "Haar quadrature resolution too small: ({n_theta}, {n_phi}, {n_psi}), need ≥ 4 each"
        )));
    }
    let (u, w) = gauss_legendre(n_theta);
    let total: f64 = w.iter().sum();
    let theta_weights: Vec<f64> = w.iter().map(|v| v / total).collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut nodes = Vec::with_capacity(n_theta * n_phi * n_psi);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (ui, wi) in u.iter().zip(&theta_weights) {
        let theta = ui.clamp(-1.0, 1.0).acos();
        for j in 0..n_phi {
            let phi = two_pi * j as f64 / n_phi as f64;
            for k in 0..n_psi {
                let psi = 2.0 * two_pi * k as f64 / n_psi as f64;
                nodes.push(Su2Element::from_euler(phi, theta, psi));
                weights.push(wi / (n_phi * n_psi) as f64);
            }
        }
    }
    Ok(HaarQuadrature {
        resolution: Resolution { n_theta, n_phi, n_psi },
        theta_weights,
        nodes,
        weights,
    })
}

impl HaarQuadrature {
    pub fn with_resolution(r: Resolution) -> Result<Self> {
        build_haar_quadrature(r.n_theta, r.n_phi, r.n_psi)
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn nodes(&self) -> &[Su2Element] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f dμ`.
    ///
    /// Summed as nested means (ψ, then φ, then the θ rule), one θ-row per
    /// task with an ordered final reduction, so results are bit-reproducible
    /// and constants integrate exactly.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: Copy + Send + Add<Output = T> + Mul<f64, Output = T> + Div<f64, Output = T>,
        F: Fn(&Su2Element) -> T + Sync,
    {
        let row = self.resolution.n_phi * self.resolution.n_psi;
        let n_psi = self.resolution.n_psi;
        let row_means: Vec<T> = self
            .nodes
            .par_chunks(row)
            .map(|chunk| {
                let mut outer: Option<T> = None;
                for block in chunk.chunks(n_psi) {
                    let mut inner = f(&block[0]);
                    for g in &block[1..] {
                        inner = inner + f(g);
                    }
                    let m = inner / n_psi as f64;
                    outer = Some(match outer {
                        None => m,
                        Some(acc) => acc + m,
                    });
                }
                outer.unwrap() / self.resolution.n_phi as f64
            })
            .collect();
        let mut acc = row_means[0] * self.theta_weights[0];
        let mut wsum = self.theta_weights[0];
        for (m, w) in row_means.iter().zip(&self.theta_weights).skip(1) {
            acc = acc + *m * *w;
            wsum += w;
        }
        acc / wsum
    }
}
