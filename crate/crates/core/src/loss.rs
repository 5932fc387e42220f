//! The five margin-based training losses and their partial derivatives.
//!
//! Every loss maps a `(f_pos, f_neg)` score pair (plus a slack value where
//! applicable) to a scalar value together with exact derivatives with respect
//! to `f_pos`, `f_neg`, and the slack. The trainer chains these through the
//! scorer's gradients, so the derivative conventions here are load-bearing:
//! hinge derivative is 1 for a strictly positive argument and 0 at the kink.
//!
//! * `mrl` — plain margin ranking: `[f_pos + γ − f_neg]₊`. Invariant under a
//!   common shift of both scores, which is exactly the failure mode the
//!   bounded losses address.
//! * `rs_loss` — margin ranking plus an upper bound on positive scores:
//!   `+ λ[f_pos − γ₁]₊`.
//! * `sm_loss` — soft margin with a per-triple slack `ξᵢ` that lets false
//!   negatives slide inside the margin:
//!   `λξᵢ² + λ₊[f_pos − γ₁]₊ + λ₋[γ₂ − f_neg − ξᵢ]₊`.
//! * `aml_contraction` — adaptive margin around center γ, slack penalized
//!   quadratically so the margin shrinks from its initial width:
//!   `λξ² + λ₊[f_pos − γ + ξ]₊ + λ₋[−f_neg + γ + ξ]₊`.
//! * `aml_expansion` — same hinge terms, but the slack is driven away from
//!   zero by a Gaussian-kernel objective so the margin widens from zero:
//!   `λe^{−σξ²} + λ₊[f_pos − γ + ξ]₊ + λ₋[−f_neg + γ + ξ]₊`.
//!
//! The slack enters the hinge terms linearly and is not sign-constrained; the
//! regularizers are even in ξ, so the reported margin width is `2|ξ|`.

use crate::error::{Error, Result};

/// Which loss to train with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Margin ranking loss.
    Mrl,
    /// Limit-based ranking loss (bounded positive scores).
    Rs,
    /// Soft margin with per-triple slack.
    Sm,
    /// Adaptive margin, contraction form.
    AmlContraction,
    /// Adaptive margin, expansion (correntropy) form.
    AmlExpansion,
}

impl LossKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::Mrl => "mrl",
            LossKind::Rs => "rs",
            LossKind::Sm => "sm",
            LossKind::AmlContraction => "aml-con",
            LossKind::AmlExpansion => "aml-exp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mrl" => Ok(LossKind::Mrl),
            "rs" => Ok(LossKind::Rs),
            "sm" => Ok(LossKind::Sm),
            "aml-con" => Ok(LossKind::AmlContraction),
            "aml-exp" => Ok(LossKind::AmlExpansion),
            other => Err(Error::Config(format!(
                "unknown loss {other:?} (expected mrl|rs|sm|aml-exp|aml-con)"
            ))),
        }
    }

    /// Does this loss carry a per-triple slack vector?
    pub fn per_triple_slack(&self) -> bool {
        matches!(self, LossKind::Sm)
    }

    /// Does this loss learn the shared slack scalar?
    pub fn learns_shared_slack(&self) -> bool {
        matches!(self, LossKind::AmlContraction | LossKind::AmlExpansion)
    }
}

/// Loss choice plus every hyperparameter any of the five kinds can use.
/// Fields not used by `kind` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Margin (MRL) or margin center (AML).
    pub gamma: f64,
    /// Upper bound on positive scores (RS, SM).
    pub gamma1: f64,
    /// Lower bound on negative scores (SM).
    pub gamma2: f64,
    /// Weight of the slack regularizer (RS bound term weight).
    pub lambda: f64,
    /// Weight of the positive-side hinge (SM, AML).
    pub lambda_pos: f64,
    /// Weight of the negative-side hinge (SM, AML).
    pub lambda_neg: f64,
    /// Gaussian kernel width (AML expansion).
    pub sigma: f64,
    /// Initial slack for the contraction form.
    pub m: f64,
}

impl LossSpec {
    /// A spec with the reference hyperparameters: γ=15, λ=λ₊=λ₋=1, σ=1,
    /// M=γ/2, and (γ₁, γ₂) = (γ−0.1, γ+0.1).
    pub fn new(kind: LossKind) -> Self {
        let gamma = 15.0;
        let (gamma1, gamma2) = margin_bounds(gamma, 0.1);
        LossSpec {
            kind,
            gamma,
            gamma1,
            gamma2,
            lambda: 1.0,
            lambda_pos: 1.0,
            lambda_neg: 1.0,
            sigma: 1.0,
            m: gamma / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("sigma", self.sigma),
            ("lambda", self.lambda),
            ("lambda_pos", self.lambda_pos),
            ("lambda_neg", self.lambda_neg),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.kind == LossKind::Sm && self.gamma2 < self.gamma1 {
            return Err(Error::Config(format!(
                "gamma2 ({}) must be >= gamma1 ({}) for the soft margin loss",
                self.gamma2, self.gamma1
            )));
        }
        Ok(())
    }

    /// Evaluate the configured loss on one score pair. `xi` is the shared
    /// slack for the adaptive losses, the triple's own slack for soft margin,
    /// and ignored by MRL/RS.
    pub fn eval(&self, f_pos: f64, f_neg: f64, xi: f64) -> LossOut {
        match self.kind {
            LossKind::Mrl => mrl(f_pos, f_neg, self),
            LossKind::Rs => rs_loss(f_pos, f_neg, self),
            LossKind::Sm => sm_loss(f_pos, f_neg, xi, self),
            LossKind::AmlContraction => aml_contraction(f_pos, f_neg, xi, self),
            LossKind::AmlExpansion => aml_expansion(f_pos, f_neg, xi, self),
        }
    }
}

/// Loss value and partial derivatives for one positive/negative score pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOut {
    pub value: f64,
    pub d_f_pos: f64,
    pub d_f_neg: f64,
    pub d_xi: f64,
}

/// `[x]₊ = max(0, x)`.
#[inline]
pub fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

/// Hinge derivative: 1 for x > 0, 0 otherwise (kink included).
#[inline]
fn active(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Margin ranking loss `[f_pos + γ − f_neg]₊`.
pub fn mrl(f_pos: f64, f_neg: f64, spec: &LossSpec) -> LossOut {
    debug_assert_eq!(spec.kind, LossKind::Mrl);
    let arg = f_pos + spec.gamma - f_neg;
    let a = active(arg);
    LossOut { value: hinge(arg), d_f_pos: a, d_f_neg: -a, d_xi: 0.0 }
}

/// Limit-based ranking loss `[f_pos + γ − f_neg]₊ + λ[f_pos − γ₁]₊`.
pub fn rs_loss(f_pos: f64, f_neg: f64, spec: &LossSpec) -> LossOut {
    debug_assert_eq!(spec.kind, LossKind::Rs);
    let rank_arg = f_pos + spec.gamma - f_neg;
    let bound_arg = f_pos - spec.gamma1;
    let rank_a = active(rank_arg);
    LossOut {
        value: hinge(rank_arg) + spec.lambda * hinge(bound_arg),
        d_f_pos: rank_a + spec.lambda * active(bound_arg),
        d_f_neg: -rank_a,
        d_xi: 0.0,
    }
}

/// Soft margin loss `λξᵢ² + λ₊[f_pos − γ₁]₊ + λ₋[γ₂ − f_neg − ξᵢ]₊` where
/// `ξᵢ` is the slack of this pair's positive triple.
pub fn sm_loss(f_pos: f64, f_neg: f64, xi_i: f64, spec: &LossSpec) -> LossOut {
    debug_assert_eq!(spec.kind, LossKind::Sm);
    let pos_arg = f_pos - spec.gamma1;
    let neg_arg = spec.gamma2 - f_neg - xi_i;
    let neg_a = active(neg_arg);
    LossOut {
        value: spec.lambda * xi_i * xi_i
            + spec.lambda_pos * hinge(pos_arg)
            + spec.lambda_neg * hinge(neg_arg),
        d_f_pos: spec.lambda_pos * active(pos_arg),
        d_f_neg: -spec.lambda_neg * neg_a,
        d_xi: 2.0 * spec.lambda * xi_i - spec.lambda_neg * neg_a,
    }
}

/// Contraction form of the adaptive margin loss:
/// `λξ² + λ₊[f_pos − γ + ξ]₊ + λ₋[−f_neg + γ + ξ]₊`.
pub fn aml_contraction(f_pos: f64, f_neg: f64, xi: f64, spec: &LossSpec) -> LossOut {
    debug_assert_eq!(spec.kind, LossKind::AmlContraction);
    let pos_arg = f_pos - spec.gamma + xi;
    let neg_arg = -f_neg + spec.gamma + xi;
    let pos_a = active(pos_arg);
    let neg_a = active(neg_arg);
    LossOut {
        value: spec.lambda * xi * xi
            + spec.lambda_pos * hinge(pos_arg)
            + spec.lambda_neg * hinge(neg_arg),
        d_f_pos: spec.lambda_pos * pos_a,
        d_f_neg: -spec.lambda_neg * neg_a,
        d_xi: 2.0 * spec.lambda * xi + spec.lambda_pos * pos_a + spec.lambda_neg * neg_a,
    }
}

/// Expansion form of the adaptive margin loss:
/// `λe^{−σξ²} + λ₊[f_pos − γ + ξ]₊ + λ₋[−f_neg + γ + ξ]₊`.
pub fn aml_expansion(f_pos: f64, f_neg: f64, xi: f64, spec: &LossSpec) -> LossOut {
    debug_assert_eq!(spec.kind, LossKind::AmlExpansion);
    let pos_arg = f_pos - spec.gamma + xi;
    let neg_arg = -f_neg + spec.gamma + xi;
    let pos_a = active(pos_arg);
    let neg_a = active(neg_arg);
    let kernel = (-spec.sigma * xi * xi).exp();
    LossOut {
        value: spec.lambda * kernel
            + spec.lambda_pos * hinge(pos_arg)
            + spec.lambda_neg * hinge(neg_arg),
        d_f_pos: spec.lambda_pos * pos_a,
        d_f_neg: -spec.lambda_neg * neg_a,
        d_xi: -2.0 * spec.lambda * spec.sigma * xi * kernel
            + spec.lambda_pos * pos_a
            + spec.lambda_neg * neg_a,
    }
}

/// The margin interval implied by a center γ and slack ξ: `(γ − ξ, γ + ξ)`.
/// Its width is exactly 2ξ.
pub fn margin_bounds(gamma: f64, xi: f64) -> (f64, f64) {
    (gamma - xi, gamma + xi)
}

/// Sum the configured loss over aligned positive/negative score lists.
/// `xi_of(i)` supplies the slack seen by pair `i` (per-triple for soft
/// margin, the shared scalar otherwise).
pub fn batch_loss(
    spec: &LossSpec,
    pos_scores: &[f64],
    neg_scores: &[f64],
    xi_of: impl Fn(usize) -> f64,
) -> Result<(f64, Vec<LossOut>)> {
    if pos_scores.len() != neg_scores.len() {
        return Err(Error::Data(format!(
            "batch_loss: {} positive scores vs {} negative scores",
            pos_scores.len(),
            neg_scores.len()
        )));
    }
    let mut total = 0.0;
    let mut outs = Vec::with_capacity(pos_scores.len());
    for (i, (&fp, &fn_)) in pos_scores.iter().zip(neg_scores).enumerate() {
        let out = spec.eval(fp, fn_, xi_of(i));
        total += out.value;
        outs.push(out);
    }
    Ok((total, outs))
}
