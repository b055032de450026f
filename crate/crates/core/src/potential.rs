//! Torus-invariant Kähler potentials in logarithmic holomorphic coordinates.
//!
//! A point of the open orbit `(C*)^n` is written `exp(x + iθ)` with
//! `x ∈ R^n`; a torus-invariant potential depends on `x` only. Every
//! potential here has closed-form value, gradient and Hessian. The Hermitian
//! Gram matrix of the torus fundamental fields equals `Hess F(x)` (the
//! proportionality constant is fixed to 1), so `Hess F` positive definite is
//! the Kähler condition on the dense orbit.
//!
//! Built-ins:
//!
//! * `Flat`: `F(x) = ½‖x‖²`
//! * `FubiniStudy(λ)`: `F(x) = (λ/2)·log(1 + Σ e^{2xᵢ})`, i.e. `CP^n`
//!   restricted to its open torus orbit
//! * `SeparableCosh`: `F(x) = Σ cosh(2xᵢ)/4` (Ricci negative)
//! * `SeparableExp`: `F(x) = Σ e^{xᵢ}` (Ricci flat)
//!
//! plus `Sum` and positive `Scale` combinators.
//!
//! JSON form (`kind` tag, unknown keys rejected):
//!
//! ```json
//! {"kind": "flat", "n": 2}
//! {"kind": "fubini_study", "n": 2, "lambda": 1.0}
//! {"kind": "separable_cosh", "n": 2}
//! {"kind": "separable_exp", "n": 2}
//! {"kind": "sum", "terms": [ ... ]}
//! {"kind": "scale", "lambda": 2.0, "term": { ... }}
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Flat,
    FubiniStudy { lambda: f64 },
    SeparableCosh,
    SeparableExp,
    Sum(Vec<ToricPotential>),
    Scale { lambda: f64, term: Box<ToricPotential> },
}

/// Immutable potential descriptor of fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialDescriptor", into = "PotentialDescriptor")]
pub struct ToricPotential {
    dim: usize,
    kind: PotentialKind,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("potential dimension must be positive"));
    }
    Ok(())
}

fn check_scale(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("scale must be positive and finite, got {lambda}")));
    }
    Ok(())
}

impl ToricPotential {
    pub fn flat(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { dim: n, kind: PotentialKind::Flat })
    }

    pub fn fubini_study(n: usize, lambda: f64) -> Result<Self> {
        check_dim(n)?;
        check_scale(lambda)?;
        Ok(Self { dim: n, kind: PotentialKind::FubiniStudy { lambda } })
    }

    pub fn separable_cosh(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { dim: n, kind: PotentialKind::SeparableCosh })
    }

    pub fn separable_exp(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { dim: n, kind: PotentialKind::SeparableExp })
    }

    pub fn sum(terms: Vec<ToricPotential>) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or_else(|| Error::invalid("sum needs at least one term"))?
            .dim;
        if let Some(bad) = terms.iter().find(|t| t.dim != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim });
        }
        Ok(Self { dim, kind: PotentialKind::Sum(terms) })
    }

    pub fn scale(lambda: f64, term: ToricPotential) -> Result<Self> {
        check_scale(lambda)?;
        Ok(Self { dim: term.dim, kind: PotentialKind::Scale { lambda, term: Box::new(term) } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Short human-readable name, e.g. `fubini_study(n=2, λ=1)`.
    pub fn label(&self) -> String {
        match &self.kind {
            PotentialKind::Flat => format!("flat(n={})", self.dim),
            PotentialKind::FubiniStudy { lambda } => {
                format!("fubini_study(n={}, λ={})", self.dim, lambda)
            }
            PotentialKind::SeparableCosh => format!("separable_cosh(n={})", self.dim),
            PotentialKind::SeparableExp => format!("separable_exp(n={})", self.dim),
            PotentialKind::Sum(terms) => {
                let inner: Vec<String> = terms.iter().map(|t| t.label()).collect();
                format!("sum[{}]", inner.join(" + "))
            }
            PotentialKind::Scale { lambda, term } => format!("{}·{}", lambda, term.label()),
        }
    }

    /// True when the potential is invariant under every coordinate permutation.
    pub fn is_permutation_symmetric(&self) -> bool {
        match &self.kind {
            PotentialKind::Sum(terms) => terms.iter().all(|t| t.is_permutation_symmetric()),
            PotentialKind::Scale { term, .. } => term.is_permutation_symmetric(),
            _ => true,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub fn grad(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check(x)?;
        Ok(self.grad_unchecked(x))
    }

    pub fn hess(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(self.hess_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Flat => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            PotentialKind::FubiniStudy { lambda } => 0.5 * lambda * FsWeights::new(x).log_partition,
            PotentialKind::SeparableCosh => x.iter().map(|v| (2.0 * v).cosh() / 4.0).sum(),
            PotentialKind::SeparableExp => x.iter().map(|v| v.exp()).sum(),
            PotentialKind::Sum(terms) => terms.iter().map(|t| t.eval_unchecked(x)).sum(),
            PotentialKind::Scale { lambda, term } => lambda * term.eval_unchecked(x),
        }
    }

    fn grad_unchecked(&self, x: &[f64]) -> DVector<f64> {
        let n = self.dim;
        match &self.kind {
            PotentialKind::Flat => DVector::from_column_slice(x),
            PotentialKind::FubiniStudy { lambda } => {
                let w = FsWeights::new(x);
                DVector::from_iterator(n, w.s.iter().map(|s| lambda * s))
            }
            PotentialKind::SeparableCosh => {
                DVector::from_iterator(n, x.iter().map(|v| (2.0 * v).sinh() / 2.0))
            }
            PotentialKind::SeparableExp => DVector::from_iterator(n, x.iter().map(|v| v.exp())),
            PotentialKind::Sum(terms) => terms
                .iter()
                .fold(DVector::zeros(n), |acc, t| acc + t.grad_unchecked(x)),
            PotentialKind::Scale { lambda, term } => term.grad_unchecked(x) * *lambda,
        }
    }

    fn hess_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        match &self.kind {
            PotentialKind::Flat => DMatrix::identity(n, n),
            PotentialKind::FubiniStudy { lambda } => {
                let w = FsWeights::new(x);
                let total: f64 = w.s0 + w.s.iter().sum::<f64>();
                DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        // s_i (1 - s_i) written without the cancelling subtraction
                        2.0 * lambda * w.s[i] * (total - w.s[i])
                    } else {
                        -2.0 * lambda * (w.s[i] * w.s[j])
                    }
                })
            }
            PotentialKind::SeparableCosh => {
                DMatrix::from_diagonal(&DVector::from_iterator(n, x.iter().map(|v| (2.0 * v).cosh())))
            }
            PotentialKind::SeparableExp => {
                DMatrix::from_diagonal(&DVector::from_iterator(n, x.iter().map(|v| v.exp())))
            }
            PotentialKind::Sum(terms) => terms
                .iter()
                .fold(DMatrix::zeros(n, n), |acc, t| acc + t.hess_unchecked(x)),
            PotentialKind::Scale { lambda, term } => term.hess_unchecked(x) * *lambda,
        }
    }
}

/// Softmax weights of the logits `(0, 2x₁, …, 2xₙ)`.
struct FsWeights {
    s0: f64,
    s: Vec<f64>,
    /// `log(1 + Σ e^{2xᵢ})`
    log_partition: f64,
}

impl FsWeights {
    fn new(x: &[f64]) -> Self {
        let shift = x.iter().fold(0.0_f64, |m, v| m.max(2.0 * v));
        let e0 = (-shift).exp();
        let e: Vec<f64> = x.iter().map(|v| (2.0 * v - shift).exp()).collect();
        let tail: f64 = e.iter().sum();
        let z = e0 + tail;
        let log_partition = if shift == 0.0 { tail.ln_1p() } else { shift + z.ln() };
        Self { s0: e0 / z, s: e.iter().map(|v| v / z).collect(), log_partition }
    }
}

/// Serialized form of [`ToricPotential`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialDescriptor {
    Flat {
        n: usize,
    },
    FubiniStudy {
        n: usize,
        #[serde(default = "one")]
        lambda: f64,
    },
    SeparableCosh {
        n: usize,
    },
    SeparableExp {
        n: usize,
    },
    Sum {
        terms: Vec<PotentialDescriptor>,
    },
    Scale {
        lambda: f64,
        term: Box<PotentialDescriptor>,
    },
}

fn one() -> f64 {
    1.0
}

impl TryFrom<PotentialDescriptor> for ToricPotential {
    type Error = Error;

    fn try_from(desc: PotentialDescriptor) -> Result<Self> {
        match desc {
            PotentialDescriptor::Flat { n } => Self::flat(n),
            PotentialDescriptor::FubiniStudy { n, lambda } => Self::fubini_study(n, lambda),
            PotentialDescriptor::SeparableCosh { n } => Self::separable_cosh(n),
            PotentialDescriptor::SeparableExp { n } => Self::separable_exp(n),
            PotentialDescriptor::Sum { terms } => {
                Self::sum(terms.into_iter().map(Self::try_from).collect::<Result<_>>()?)
            }
            PotentialDescriptor::Scale { lambda, term } => Self::scale(lambda, Self::try_from(*term)?),
        }
    }
}

impl From<ToricPotential> for PotentialDescriptor {
    fn from(p: ToricPotential) -> Self {
        let n = p.dim;
        match p.kind {
            PotentialKind::Flat => PotentialDescriptor::Flat { n },
            PotentialKind::FubiniStudy { lambda } => PotentialDescriptor::FubiniStudy { n, lambda },
            PotentialKind::SeparableCosh => PotentialDescriptor::SeparableCosh { n },
            PotentialKind::SeparableExp => PotentialDescriptor::SeparableExp { n },
            PotentialKind::Sum(terms) => {
                PotentialDescriptor::Sum { terms: terms.into_iter().map(Into::into).collect() }
            }
            PotentialKind::Scale { lambda, term } => {
                PotentialDescriptor::Scale { lambda, term: Box::new((*term).into()) }
            }
        }
    }
}

impl std::fmt::Display for ToricPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}
