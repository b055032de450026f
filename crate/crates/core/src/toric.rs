//! Orbit volume, Ricci form and moment map of a toric potential.
//!
//! With `H(x) = det Hess F(x)` the torus orbit over `x` has volume
//! `(2π)^n·sqrt(H(x))` and the Ricci form is the quadratic form
//! `R(x) = −Hess_x log H(x)`. Both use the unit normalization between
//! `Hess F` and the Hermitian Gram matrix of the fundamental fields, which
//! leaves every sign, convexity and argmax statement unchanged.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::fd::{self, StepRule};
use crate::potential::ToricPotential;
use crate::region::GridRegion;

/// `log det A` for symmetric positive-definite `A`, via Cholesky.
pub(crate) fn log_det_spd(a: DMatrix<f64>) -> Option<f64> {
    if a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let chol = a.cholesky()?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        acc += d.ln();
    }
    Some(2.0 * acc)
}

/// `log H(x) = log det Hess F(x)`.
pub fn log_h(p: &ToricPotential, x: &[f64]) -> Result<f64> {
    let hess = p.hess(x)?;
    log_det_spd(hess).ok_or_else(|| Error::NotKaehler { point: x.to_vec() })
}

/// `log Vol(x) = ½·log H(x) + n·log 2π`.
pub fn orbit_log_volume(p: &ToricPotential, x: &[f64]) -> Result<f64> {
    Ok(0.5 * log_h(p, x)? + p.dim() as f64 * (2.0 * PI).ln())
}

/// Spectral condition number of `Hess F(x)`.
pub fn hessian_condition(p: &ToricPotential, x: &[f64]) -> Result<f64> {
    let eig = p.hess(x)?.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    Ok(if lo > 0.0 { hi / lo } else { f64::INFINITY })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicciSample {
    pub x: Vec<f64>,
    /// `−Hess log H`, symmetrized.
    pub form: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut eig: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Ricci quadratic form at `x` by central differences of the exact `log H`.
pub fn ricci_form(p: &ToricPotential, x: &[f64], rule: &StepRule) -> Result<RicciSample> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: x.len() });
    }
    let hess_log_h = fd::hessian(|y| log_h(p, y), x, rule)?;
    let form = -(&hess_log_h + hess_log_h.transpose()) * 0.5;
    let eigenvalues = sorted_eigenvalues(&form);
    Ok(RicciSample { x: x.to_vec(), form, eigenvalues })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RicciVerdict {
    PositiveDefinite,
    NegativeDefinite,
    Zero,
    Indefinite,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEigen {
    pub x: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciClassification {
    pub verdict: RicciVerdict,
    /// Relative threshold as requested.
    pub tau: f64,
    /// Absolute threshold actually applied: `tau·(1 + max |R entry|)`.
    pub threshold: f64,
    pub region: GridRegion,
    /// Node with the smallest eigenvalue.
    pub min_witness: NodeEigen,
    /// Node with the largest eigenvalue.
    pub max_witness: NodeEigen,
    pub nodes: Vec<NodeEigen>,
}

/// Classifies the sign of the Ricci form over every node of `region`.
///
/// `tau` defaults to [`defaults::RICCI_TAU`]; eigenvalues within
/// `tau·(1 + max |R entry|)` of zero count as zero.
pub fn classify_ricci(
    p: &ToricPotential,
    region: &GridRegion,
    tau: Option<f64>,
    rule: &StepRule,
) -> Result<RicciClassification> {
    region.validate()?;
    if region.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: region.dim() });
    }
    let tau = tau.unwrap_or(defaults::RICCI_TAU);
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    let samples: Vec<RicciSample> = (0..region.len())
        .into_par_iter()
        .map(|i| ricci_form(p, &region.node(i), rule))
        .collect::<Result<_>>()?;

    let max_entry = samples.iter().map(|s| s.form.amax()).fold(0.0, f64::max);
    let threshold = tau * (1.0 + max_entry);
    let nodes: Vec<NodeEigen> = samples
        .into_iter()
        .map(|s| NodeEigen {
            min_eigenvalue: s.eigenvalues[0],
            max_eigenvalue: *s.eigenvalues.last().unwrap(),
            x: s.x,
        })
        .collect();

    let verdict = ricci_verdict(&nodes, threshold);

    let min_witness = nodes
        .iter()
        .min_by(|a, b| a.min_eigenvalue.total_cmp(&b.min_eigenvalue))
        .cloned()
        .unwrap();
    let max_witness = nodes
        .iter()
        .max_by(|a, b| a.max_eigenvalue.total_cmp(&b.max_eigenvalue))
        .cloned()
        .unwrap();
    Ok(RicciClassification {
        verdict,
        tau,
        threshold,
        region: region.clone(),
        min_witness,
        max_witness,
        nodes,
    })
}

/// Verdict from per-node extreme eigenvalues and an absolute threshold.
pub fn ricci_verdict(nodes: &[NodeEigen], threshold: f64) -> RicciVerdict {
    let all = |pred: &dyn Fn(&NodeEigen) -> bool| nodes.iter().all(pred);
    if all(&|e| e.min_eigenvalue > threshold) {
        RicciVerdict::PositiveDefinite
    } else if all(&|e| e.max_eigenvalue < -threshold) {
        RicciVerdict::NegativeDefinite
    } else if all(&|e| e.min_eigenvalue.abs() <= threshold && e.max_eigenvalue.abs() <= threshold) {
        RicciVerdict::Zero
    } else if nodes
        .iter()
        .any(|e| e.min_eigenvalue < -threshold && e.max_eigenvalue > threshold)
    {
        RicciVerdict::Indefinite
    } else {
        RicciVerdict::Mixed
    }
}

/// Moment map `μ(x) = ∇F(x)`; its Jacobian `Hess F` must be nonsingular.
pub fn moment_map(p: &ToricPotential, x: &[f64]) -> Result<DVector<f64>> {
    let hess = p.hess(x)?;
    if log_det_spd(hess).is_none() {
        return Err(Error::SubmersionFailure { point: x.to_vec() });
    }
    p.grad(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fs(n: usize) -> ToricPotential {
        ToricPotential::fubini_study(n, 1.0).unwrap()
    }

    #[test]
    fn log_h_examples() {
        assert_eq!(log_h(&ToricPotential::flat(3).unwrap(), &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let v = log_h(&ToricPotential::separable_exp(2).unwrap(), &[0.4, -1.3]).unwrap();
        assert_relative_eq!(v, 0.4 - 1.3, epsilon = 1e-14);
        assert_relative_eq!(log_h(&fs(1), &[0.0]).unwrap(), 0.5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn orbit_log_volume_examples() {
        let two_pi = (2.0 * PI).ln();
        assert_eq!(orbit_log_volume(&ToricPotential::flat(1).unwrap(), &[5.0]).unwrap(), two_pi);
        let v = orbit_log_volume(&ToricPotential::separable_exp(1).unwrap(), &[0.8]).unwrap();
        assert_relative_eq!(v, 0.4 + two_pi, epsilon = 1e-14);
        let v = orbit_log_volume(&fs(1), &[0.0]).unwrap();
        assert_relative_eq!(v, 0.5 * 0.5f64.ln() + two_pi, epsilon = 1e-14);
    }

    #[test]
    fn ricci_spot_values() {
        let rule = StepRule::default();
        let r = ricci_form(&ToricPotential::separable_exp(2).unwrap(), &[0.3, -0.7], &rule).unwrap();
        assert!(r.form.amax() < 1e-8, "{}", r.form);
        let r = ricci_form(&ToricPotential::separable_cosh(1).unwrap(), &[0.0], &rule).unwrap();
        assert!((r.form[(0, 0)] + 4.0).abs() < 1e-6);
        let r = ricci_form(&fs(1), &[0.0], &rule).unwrap();
        assert!((r.form[(0, 0)] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn ricci_rejects_wide_stencil() {
        let rule = StepRule::with_base(1.0);
        assert!(matches!(
            ricci_form(&fs(1), &[0.0], &rule),
            Err(Error::StencilTooWide { .. })
        ));
    }

    #[test]
    fn fubini_study_is_einstein() {
        // R = 2(n+1)/λ · Hess F for the Fubini–Study potential
        let rule = StepRule::default();
        for (n, lambda) in [(2, 1.0), (3, 0.5)] {
            let p = ToricPotential::fubini_study(n, lambda).unwrap();
            let x = vec![0.3; n];
            let r = ricci_form(&p, &x, &rule).unwrap();
            let expected = p.hess(&x).unwrap() * (2.0 * (n as f64 + 1.0) / lambda);
            assert!((r.form - expected).amax() < 1e-6);
        }
    }

    #[test]
    fn classification_examples() {
        let rule = StepRule::default();
        let c = classify_ricci(
            &ToricPotential::separable_cosh(2).unwrap(),
            &GridRegion::cube(2, -2.0, 2.0, 9).unwrap(),
            Some(1e-6),
            &rule,
        )
        .unwrap();
        assert_eq!(c.verdict, RicciVerdict::NegativeDefinite);
        // worst node sits on the boundary, where −4 sech²(4) is closest to zero
        assert!((c.max_witness.max_eigenvalue + 4.0 / 4f64.cosh().powi(2)).abs() < 1e-6);

        let c = classify_ricci(&fs(2), &GridRegion::cube(2, -3.0, 3.0, 13).unwrap(), Some(1e-6), &rule)
            .unwrap();
        assert_eq!(c.verdict, RicciVerdict::PositiveDefinite);

        let c = classify_ricci(
            &ToricPotential::flat(2).unwrap(),
            &GridRegion::cube(2, -5.0, 5.0, 4).unwrap(),
            Some(1e-6),
            &rule,
        )
        .unwrap();
        assert_eq!(c.verdict, RicciVerdict::Zero);
    }

    #[test]
    fn mixed_verdict_on_sign_changing_potential() {
        // FS + cosh/20: Ricci positive near the origin, negative far out
        let damped = ToricPotential::scale(0.05, ToricPotential::separable_cosh(1).unwrap()).unwrap();
        let p = ToricPotential::sum(vec![fs(1), damped]).unwrap();
        let c = classify_ricci(&p, &GridRegion::cube(1, -3.0, 3.0, 61).unwrap(), None, &StepRule::default())
            .unwrap();
        assert_eq!(c.verdict, RicciVerdict::Mixed);
    }

    #[test]
    fn verdict_rules() {
        let node = |lo: f64, hi: f64| NodeEigen { x: vec![0.0], min_eigenvalue: lo, max_eigenvalue: hi };
        let t = 1e-6;
        assert_eq!(ricci_verdict(&[node(1.0, 2.0), node(0.1, 0.2)], t), RicciVerdict::PositiveDefinite);
        assert_eq!(ricci_verdict(&[node(-2.0, -1.0)], t), RicciVerdict::NegativeDefinite);
        assert_eq!(ricci_verdict(&[node(-1e-7, 1e-7), node(0.0, 0.0)], t), RicciVerdict::Zero);
        assert_eq!(ricci_verdict(&[node(1.0, 2.0), node(-1.0, 1.0)], t), RicciVerdict::Indefinite);
        assert_eq!(ricci_verdict(&[node(1.0, 2.0), node(-2.0, -1.0)], t), RicciVerdict::Mixed);
        assert_eq!(ricci_verdict(&[node(0.0, 1.0)], t), RicciVerdict::Mixed);
    }

    #[test]
    fn moment_map_examples() {
        let m = moment_map(&fs(2), &[0.0, 0.0]).unwrap();
        assert_relative_eq!(m[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m[1], 1.0 / 3.0, epsilon = 1e-15);
        let m = moment_map(&ToricPotential::flat(2).unwrap(), &[0.5, -4.0]).unwrap();
        assert_eq!(m.as_slice(), &[0.5, -4.0]);
        let m = moment_map(&fs(1), &[-20.0]).unwrap();
        assert!(m[0] > 0.0 && m[0] < 1e-15 + 5e-18);
    }

    #[test]
    fn moment_map_submersion_failure() {
        // far enough out the FS Hessian underflows to zero
        assert!(matches!(
            moment_map(&fs(1), &[-800.0]),
            Err(Error::SubmersionFailure { .. })
        ));
        assert!(matches!(log_h(&fs(1), &[-800.0]), Err(Error::NotKaehler { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn fubini_study_moment_image_in_open_simplex(x in proptest::collection::vec(-15.0f64..15.0, 1..=4)) {
            let m = moment_map(&fs(x.len()), &x).unwrap();
            prop_assert!(m.iter().all(|v| *v > 0.0));
            prop_assert!(m.sum() < 1.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn log_volume_permutation_invariance(x in proptest::collection::vec(-3.0f64..3.0, 3), rot in 0usize..3) {
            let mut y = x.clone();
            y.rotate_left(rot);
            for p in [fs(3), ToricPotential::separable_cosh(3).unwrap(), ToricPotential::separable_exp(3).unwrap()] {
                prop_assert!(p.is_permutation_symmetric());
                let a = orbit_log_volume(&p, &x).unwrap();
                let b = orbit_log_volume(&p, &y).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{}: {a} vs {b}", p);
            }
        }

        #[test]
        fn richardson_agrees_with_plain(x in proptest::collection::vec(-1.5f64..1.5, 1..=3)) {
            for p in [fs(x.len()), ToricPotential::separable_cosh(x.len()).unwrap()] {
                let plain = ricci_form(&p, &x, &StepRule::default()).unwrap().form;
                let rich = ricci_form(&p, &x, &StepRule::default().richardson()).unwrap().form;
                let scale = plain.amax();
                prop_assert!((plain - rich).amax() <= 1e-5 * scale);
            }
        }
    }
}
