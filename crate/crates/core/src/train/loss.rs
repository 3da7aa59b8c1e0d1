//! The three task losses and their weighted sum. Log arguments are clamped
//! at 1e-12, so every loss is finite for probabilities in `[0, 1]`.

const LOG_FLOOR: f64 = 1e-12;

#[inline]
fn safe_ln(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

/// Cross-entropy of a two-class probability pair against a hard label:
/// `-ln p[y]`.
pub fn loss_cls(p: [f64; 2], y_true: usize) -> f64 {
    debug_assert!(y_true < 2);
    -safe_ln(p[y_true])
}

/// Soft-label binary cross-entropy for one token.
pub fn bce(p: f64, y: f64) -> f64 {
    -(y * safe_ln(p) + (1.0 - y) * safe_ln(1.0 - p))
}

/// Mean BCE over all patch tokens (tiles and global pooled together).
pub fn loss_tfl(token_probs: &[f64], token_labels: &[f64]) -> f64 {
    assert_eq!(token_probs.len(), token_labels.len(), "probs/labels count mismatch");
    if token_probs.is_empty() {
        return 0.0;
    }
    let total: f64 = token_probs
        .iter()
        .zip(token_labels)
        .map(|(&p, &y)| bce(p, y))
        .sum();
    total / token_probs.len() as f64
}

/// Squared error between normalized quality factors.
pub fn loss_qfe(q_pred: f64, q_true: f64) -> f64 {
    (q_pred - q_true) * (q_pred - q_true)
}

/// Relative weights of the three losses; the default reproduces the plain
/// unweighted sum. Zeroing a weight ablates that task.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub cls: f64,
    pub tfl: f64,
    pub qfe: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { cls: 1.0, tfl: 1.0, qfe: 1.0 }
    }
}

impl LossWeights {
    pub fn ablate_tfl() -> Self {
        Self { tfl: 0.0, ..Default::default() }
    }

    pub fn ablate_qfe() -> Self {
        Self { qfe: 0.0, ..Default::default() }
    }

    pub fn cls_only() -> Self {
        Self { cls: 1.0, tfl: 0.0, qfe: 0.0 }
    }
}

/// Weighted sum, fixed order cls + tfl + qfe.
pub fn loss_all(components: [f64; 3], weights: LossWeights) -> f64 {
    weights.cls * components[0] + weights.tfl * components[1] + weights.qfe * components[2]
}
