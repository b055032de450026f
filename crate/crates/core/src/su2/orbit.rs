//! J-volume and Riemannian volume of right SU(2)-orbits in `CP^3`.
//!
//! Volumes are Haar averages of the orbit densities, i.e. they use the
//! normalized measure of SU(2) and carry no PU(2) covering factor.

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::haar::{HaarQuadrature, Resolution};
use super::{c, expm, inner, is_skew_hermitian, Mat2, ProjectivePoint, Su2LieBasis, C64};
use crate::convexity::{ConvexityReport, Margins};
use crate::error::{Error, Result};

/// Hermitian Gram matrix `h(uⱼ, uₖ)` of the fundamental tangent vectors
/// `uₖ = p·Xₖ` under the Fubini–Study form
/// `h(u, v) = (λ/2)(⟨u,v⟩⟨p,p⟩ − ⟨u,p⟩⟨p,v⟩)/⟨p,p⟩²`.
pub fn fs_tangent_gram(p: &ProjectivePoint, basis: &Su2LieBasis, lambda: f64) -> Matrix3<C64> {
    let m = p.matrix();
    let pp = inner(m, m);
    let u: [Mat2; 3] = [m * basis.x[0], m * basis.x[1], m * basis.x[2]];
    let up: [C64; 3] = [inner(&u[0], m), inner(&u[1], m), inner(&u[2], m)];
    let scale = 0.5 * lambda / (pp.re * pp.re);
    Matrix3::from_fn(|j, k| (inner(&u[j], &u[k]) * pp - up[j] * up[k].conj()) * scale)
}

/// `√det h(uⱼ, uₖ)`.
pub fn jvol_density(p: &ProjectivePoint, basis: &Su2LieBasis, lambda: f64) -> f64 {
    fs_tangent_gram(p, basis, lambda).determinant().re.max(0.0).sqrt()
}

/// `√det Re h(uⱼ, uₖ)`.
pub fn riemannian_density(p: &ProjectivePoint, basis: &Su2LieBasis, lambda: f64) -> f64 {
    fs_tangent_gram(p, basis, lambda).map(|z| z.re).determinant().max(0.0).sqrt()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("Fubini–Study scale must be positive, got {lambda}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitVolumes {
    pub vol_j: f64,
    pub vol: f64,
    /// Relative standard deviation of the J-density over the orbit nodes.
    pub density_rel_stddev: f64,
}

pub fn orbit_volumes(
    p: &ProjectivePoint,
    basis: &Su2LieBasis,
    lambda: f64,
    quad: &HaarQuadrature,
) -> Result<OrbitVolumes> {
    check_lambda(lambda)?;
    let vol_j = quad.integrate(|g| jvol_density(&p.right_mul(g), basis, lambda));
    let vol = quad.integrate(|g| riemannian_density(&p.right_mul(g), basis, lambda));
    let var = quad.integrate(|g| (jvol_density(&p.right_mul(g), basis, lambda) - vol_j).powi(2));
    let density_rel_stddev = if vol_j > 0.0 { var.sqrt() / vol_j } else { 0.0 };
    Ok(OrbitVolumes { vol_j, vol, density_rel_stddev })
}

/// `n` equally spaced points on `[t_min, t_max]` with exact endpoints.
pub fn uniform_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_max > t_min) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::invalid(format!("bad grid [{t_min}, {t_max}] with {n} points")));
    }
    let h = (t_max - t_min) / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { t_max } else { t_min + h * i as f64 }).collect())
}

fn check_uniform(ts: &[f64], min_points: usize) -> Result<()> {
    if ts.len() < min_points {
        return Err(Error::invalid(format!("t grid needs at least {min_points} points, got {}", ts.len())));
    }
    let h = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    let uniform = h > 0.0
        && ts.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0));
    if !uniform {
        return Err(Error::invalid("t grid must be increasing and uniform"));
    }
    Ok(())
}

/// Checks that `x` lies in su(2) and is nonzero.
pub fn check_su2(x: &Mat2) -> Result<()> {
    let trace = x[(0, 0)] + x[(1, 1)];
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::invalid("generator must be nonzero"));
    }
    if !is_skew_hermitian(x, 1e-12 * norm) || trace.norm() > 1e-12 * norm {
        return Err(Error::invalid("generator must be skew-Hermitian and trace-free"));
    }
    Ok(())
}

/// `k₀·exp(itX)`.
pub fn geodesic_point(k0: &Mat2, x: &Mat2, t: f64) -> Mat2 {
    k0 * expm(&(x * c(0.0, t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: f64,
    pub vol_j: f64,
    pub vol: f64,
    pub defect: f64,
    /// Second difference of `−log vol_J`; absent at the endpoints.
    pub second_diff_neg_log_vol_j: Option<f64>,
    pub density_rel_stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicProfile {
    pub rows: Vec<ProfileRow>,
    pub argmax_t: f64,
    pub defect_at_argmax: f64,
    pub max_density_rel_stddev: f64,
    pub lambda: f64,
    pub resolution: Resolution,
    /// Convexity of `−log vol_J` along the grid.
    pub convexity: ConvexityReport,
}

pub fn geodesic_profile(
    x: &Mat2,
    ts: &[f64],
    lambda: f64,
    quad: &HaarQuadrature,
    k0: Option<&Mat2>,
) -> Result<GeodesicProfile> {
    check_su2(x)?;
    check_uniform(ts, 5)?;
    check_lambda(lambda)?;
    let k0 = k0.copied().unwrap_or_else(Mat2::identity);
    let scale = k0.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if !(k0.determinant().norm() > 1e-14 * scale) {
        return Err(Error::SingularMatrix { t: 0.0 });
    }
    let basis = Su2LieBasis::default();
    let volumes: Vec<OrbitVolumes> = ts
        .par_iter()
        .map(|&t| {
            let p = ProjectivePoint::new(geodesic_point(&k0, x, t))?;
            orbit_volumes(&p, &basis, lambda, quad)
        })
        .collect::<Result<_>>()?;
    let neg_log: Vec<f64> = volumes.iter().map(|v| -v.vol_j.ln()).collect();
    let convexity = ConvexityReport::from_profile("neg_log_vol_j", ts, &neg_log, Margins::default())?;
    let h = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    let rows: Vec<ProfileRow> = ts
        .iter()
        .zip(&volumes)
        .enumerate()
        .map(|(i, (&t, v))| ProfileRow {
            t,
            vol_j: v.vol_j,
            vol: v.vol,
            defect: v.vol - v.vol_j,
            second_diff_neg_log_vol_j: (i > 0 && i + 1 < ts.len())
                .then(|| (neg_log[i + 1] - 2.0 * neg_log[i] + neg_log[i - 1]) / (h * h)),
            density_rel_stddev: v.density_rel_stddev,
        })
        .collect();
    let best = rows
        .iter()
        .fold(&rows[0], |b, r| if r.vol_j > b.vol_j { r } else { b });
    Ok(GeodesicProfile {
        argmax_t: best.t,
        defect_at_argmax: best.defect,
        max_density_rel_stddev: rows.iter().map(|r| r.density_rel_stddev).fold(0.0, f64::max),
        lambda,
        resolution: quad.resolution(),
        convexity,
        rows,
    })
}

pub fn write_geodesic_csv<W: std::io::Write>(out: W, profile: &GeodesicProfile) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["t", "vol_J", "vol", "defect", "second_diff_neg_log_volJ"])?;
    for r in &profile.rows {
        let sd = r.second_diff_neg_log_vol_j.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.t.to_string(),
            r.vol_j.to_string(),
            r.vol.to_string(),
            r.defect.to_string(),
            sd,
        ])?;
    }
    w.flush()
}
