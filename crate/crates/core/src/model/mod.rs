//! The dual-path detector: a small ViT backbone shared between the global
//! view and all tiles, a trainable refinement stage, a permutation-invariant
//! tile aggregator fed through a learnable output token, and three heads
//! (real/fake classifier, token-wise forgery localization, JPEG quality
//! regression). Forward and backward passes are hand-written in `f64` with
//! exact analytic gradients.

mod backward;
mod forward;
mod tensor;

pub use backward::{backward_full, backward_sample, LossBreakdown, SampleTarget};
pub use forward::{
    classify, forward_full, local_aggregate, qfe_head, tfl_head, vit_forward, ForwardOutput,
    SampleInput, TokenSequence,
};
pub use tensor::Tensor;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("token sequence must not be empty")]
    EmptySequence,
    #[error("loss is not finite")]
    NonFiniteLoss,
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub image_size: usize,
    pub patch_size: usize,
    pub embed_dim: usize,
    pub backbone_depth: usize,
    pub refiner_depth: usize,
    pub aggregator_depth: usize,
    pub heads: usize,
    pub backbone_frozen: bool,
}

impl ModelConfig {
    /// Desk-scale default: 64px inputs, 8px patches, 64-dim embeddings.
    pub fn desk() -> Self {
        Self {
            image_size: 64,
            patch_size: 8,
            embed_dim: 64,
            backbone_depth: 2,
            refiner_depth: 1,
            aggregator_depth: 1,
            heads: 4,
            backbone_frozen: false,
        }
    }

    /// 224px configuration with 16px patches (not exercised in CI).
    pub fn standard224() -> Self {
        Self {
            image_size: 224,
            patch_size: 16,
            embed_dim: 128,
            backbone_depth: 4,
            refiner_depth: 1,
            aggregator_depth: 1,
            heads: 8,
            backbone_frozen: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_size == 0 || self.patch_size == 0 || self.image_size % self.patch_size != 0 {
            return Err(ModelError::ShapeMismatch(format!(
                "image size {} not divisible by patch size {}",
                self.image_size, self.patch_size
            )));
        }
        if self.embed_dim == 0 || self.heads == 0 || self.embed_dim % self.heads != 0 {
            return Err(ModelError::ShapeMismatch(format!(
                "embed dim {} not divisible by {} heads",
                self.embed_dim, self.heads
            )));
        }
        Ok(())
    }

    /// Patch-grid side length.
    pub fn grid(&self) -> usize {
        self.image_size / self.patch_size
    }

    /// Patch tokens per image (without CLS).
    pub fn n_patches(&self) -> usize {
        self.grid() * self.grid()
    }

    /// Sequence length including CLS.
    pub fn n_tokens(&self) -> usize {
        self.n_patches() + 1
    }

    /// Flattened patch length (patch pixels x 3 channels).
    pub fn patch_dim(&self) -> usize {
        self.patch_size * self.patch_size * 3
    }

    pub fn mlp_hidden(&self) -> usize {
        4 * self.embed_dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams {
    pub gamma: Tensor,
    pub beta: Tensor,
}

impl LayerNormParams {
    fn identity(dim: usize) -> Self {
        let mut gamma = Tensor::zeros(&[dim]);
        gamma.fill(1.0);
        Self { gamma, beta: Tensor::zeros(&[dim]) }
    }

    fn zeros(dim: usize) -> Self {
        Self { gamma: Tensor::zeros(&[dim]), beta: Tensor::zeros(&[dim]) }
    }
}

/// One pre-norm transformer block: LN, multi-head self-attention with
/// residual, LN, GELU MLP with residual.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub ln1: LayerNormParams,
    pub qkv_weight: Tensor,
    pub qkv_bias: Tensor,
    pub proj_weight: Tensor,
    pub proj_bias: Tensor,
    pub ln2: LayerNormParams,
    pub fc1_weight: Tensor,
    pub fc1_bias: Tensor,
    pub fc2_weight: Tensor,
    pub fc2_bias: Tensor,
}

impl BlockParams {
    fn zeros(dim: usize, hidden: usize, ln_identity: bool) -> Self {
        let ln = if ln_identity {
            LayerNormParams::identity(dim)
        } else {
            LayerNormParams::zeros(dim)
        };
        Self {
            ln1: ln.clone(),
            qkv_weight: Tensor::zeros(&[3 * dim, dim]),
            qkv_bias: Tensor::zeros(&[3 * dim]),
            proj_weight: Tensor::zeros(&[dim, dim]),
            proj_bias: Tensor::zeros(&[dim]),
            ln2: ln,
            fc1_weight: Tensor::zeros(&[hidden, dim]),
            fc1_bias: Tensor::zeros(&[hidden]),
            fc2_weight: Tensor::zeros(&[dim, hidden]),
            fc2_bias: Tensor::zeros(&[dim]),
        }
    }
}

/// Every trainable tensor of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub patch_embed_weight: Tensor,
    pub patch_embed_bias: Tensor,
    pub pos_embed: Tensor,
    pub cls_token: Tensor,
    pub backbone: Vec<BlockParams>,
    pub refiner: Vec<BlockParams>,
    pub final_ln: LayerNormParams,
    pub t_out: Tensor,
    pub aggregator: Vec<BlockParams>,
    pub agg_final_ln: LayerNormParams,
    pub cls_fc1_weight: Tensor,
    pub cls_fc1_bias: Tensor,
    pub cls_fc2_weight: Tensor,
    pub cls_fc2_bias: Tensor,
    pub tfl_weight: Tensor,
    pub tfl_bias: Tensor,
    pub qfe_fc1_weight: Tensor,
    pub qfe_fc1_bias: Tensor,
    pub qfe_fc2_weight: Tensor,
    pub qfe_fc2_bias: Tensor,
}

impl ModelParams {
    /// All-zero parameters with LayerNorm scales at 1 (the "zero-weight"
    /// configuration where every block acts as the identity).
    pub fn zeros(cfg: &ModelConfig) -> Self {
        Self::build(cfg, true)
    }

    fn build(cfg: &ModelConfig, ln_identity: bool) -> Self {
        let d = cfg.embed_dim;
        let hidden = cfg.mlp_hidden();
        let ln = |_: ()| {
            if ln_identity {
                LayerNormParams::identity(d)
            } else {
                LayerNormParams::zeros(d)
            }
        };
        Self {
            patch_embed_weight: Tensor::zeros(&[d, cfg.patch_dim()]),
            patch_embed_bias: Tensor::zeros(&[d]),
            pos_embed: Tensor::zeros(&[cfg.n_tokens(), d]),
            cls_token: Tensor::zeros(&[d]),
            backbone: (0..cfg.backbone_depth)
                .map(|_| BlockParams::zeros(d, hidden, ln_identity))
                .collect(),
            refiner: (0..cfg.refiner_depth)
                .map(|_| BlockParams::zeros(d, hidden, ln_identity))
                .collect(),
            final_ln: ln(()),
            t_out: Tensor::zeros(&[d]),
            aggregator: (0..cfg.aggregator_depth)
                .map(|_| BlockParams::zeros(d, hidden, ln_identity))
                .collect(),
            agg_final_ln: ln(()),
            cls_fc1_weight: Tensor::zeros(&[d, 2 * d]),
            cls_fc1_bias: Tensor::zeros(&[d]),
            cls_fc2_weight: Tensor::zeros(&[2, d]),
            cls_fc2_bias: Tensor::zeros(&[2]),
            tfl_weight: Tensor::zeros(&[d]),
            tfl_bias: Tensor::zeros(&[1]),
            qfe_fc1_weight: Tensor::zeros(&[d, d]),
            qfe_fc1_bias: Tensor::zeros(&[d]),
            qfe_fc2_weight: Tensor::zeros(&[1, d]),
            qfe_fc2_bias: Tensor::zeros(&[1]),
        }
    }

    /// Gradient-shaped container: zero everywhere including LayerNorm scales.
    pub fn zeros_like_grads(cfg: &ModelConfig) -> Self {
        Self::build(cfg, false)
    }

    /// Truncated-normal (std 0.02, clipped at 2 std) initialization for
    /// embedding/attention/MLP weights; zero biases and output token;
    /// identity LayerNorms. Deterministic given `seed`.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Self {
        let mut params = Self::zeros(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |t: &mut Tensor| {
            for v in t.data_mut() {
                *v = trunc_normal(&mut rng, 0.02);
            }
        };
        fill(&mut params.patch_embed_weight);
        fill(&mut params.pos_embed);
        fill(&mut params.cls_token);
        for block in params
            .backbone
            .iter_mut()
            .chain(params.refiner.iter_mut())
            .chain(params.aggregator.iter_mut())
        {
            fill(&mut block.qkv_weight);
            fill(&mut block.proj_weight);
            fill(&mut block.fc1_weight);
            fill(&mut block.fc2_weight);
        }
        fill(&mut params.cls_fc1_weight);
        fill(&mut params.cls_fc2_weight);
        fill(&mut params.tfl_weight);
        fill(&mut params.qfe_fc1_weight);
        fill(&mut params.qfe_fc2_weight);
        // t_out stays zero: attention from a zero query is uniform, which is
        // the right starting point for an order-free aggregator.
        params
    }

    /// Named views of every tensor, in a fixed order shared with
    /// [`Self::tensors_mut`]. Names are stable; the checkpoint format and the
    /// optimizer rely on them.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        out.push(("vit.patch_embed.weight".into(), &self.patch_embed_weight));
        out.push(("vit.patch_embed.bias".into(), &self.patch_embed_bias));
        out.push(("vit.pos_embed".into(), &self.pos_embed));
        out.push(("vit.cls_token".into(), &self.cls_token));
        for (group, blocks) in [("vit.backbone", &self.backbone), ("vit.refiner", &self.refiner), ("agg.blocks", &self.aggregator)] {
            for (i, b) in blocks.iter().enumerate() {
                out.push((format!("{group}.{i}.ln1.gamma"), &b.ln1.gamma));
                out.push((format!("{group}.{i}.ln1.beta"), &b.ln1.beta));
                out.push((format!("{group}.{i}.attn.qkv.weight"), &b.qkv_weight));
                out.push((format!("{group}.{i}.attn.qkv.bias"), &b.qkv_bias));
                out.push((format!("{group}.{i}.attn.proj.weight"), &b.proj_weight));
                out.push((format!("{group}.{i}.attn.proj.bias"), &b.proj_bias));
                out.push((format!("{group}.{i}.ln2.gamma"), &b.ln2.gamma));
                out.push((format!("{group}.{i}.ln2.beta"), &b.ln2.beta));
                out.push((format!("{group}.{i}.mlp.fc1.weight"), &b.fc1_weight));
                out.push((format!("{group}.{i}.mlp.fc1.bias"), &b.fc1_bias));
                out.push((format!("{group}.{i}.mlp.fc2.weight"), &b.fc2_weight));
                out.push((format!("{group}.{i}.mlp.fc2.bias"), &b.fc2_bias));
            }
        }
        out.push(("vit.final_ln.gamma".into(), &self.final_ln.gamma));
        out.push(("vit.final_ln.beta".into(), &self.final_ln.beta));
        out.push(("agg.t_out".into(), &self.t_out));
        out.push(("agg.final_ln.gamma".into(), &self.agg_final_ln.gamma));
        out.push(("agg.final_ln.beta".into(), &self.agg_final_ln.beta));
        out.push(("head.cls.fc1.weight".into(), &self.cls_fc1_weight));
        out.push(("head.cls.fc1.bias".into(), &self.cls_fc1_bias));
        out.push(("head.cls.fc2.weight".into(), &self.cls_fc2_weight));
        out.push(("head.cls.fc2.bias".into(), &self.cls_fc2_bias));
        out.push(("head.tfl.weight".into(), &self.tfl_weight));
        out.push(("head.tfl.bias".into(), &self.tfl_bias));
        out.push(("head.qfe.fc1.weight".into(), &self.qfe_fc1_weight));
        out.push(("head.qfe.fc1.bias".into(), &self.qfe_fc1_bias));
        out.push(("head.qfe.fc2.weight".into(), &self.qfe_fc2_weight));
        out.push(("head.qfe.fc2.bias".into(), &self.qfe_fc2_bias));
        out
    }

    /// Mutable tensor views in the same order as [`Self::named_tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        out.push(&mut self.patch_embed_weight);
        out.push(&mut self.patch_embed_bias);
        out.push(&mut self.pos_embed);
        out.push(&mut self.cls_token);
        for blocks in [&mut self.backbone, &mut self.refiner, &mut self.aggregator] {
            for b in blocks.iter_mut() {
                out.push(&mut b.ln1.gamma);
                out.push(&mut b.ln1.beta);
                out.push(&mut b.qkv_weight);
                out.push(&mut b.qkv_bias);
                out.push(&mut b.proj_weight);
                out.push(&mut b.proj_bias);
                out.push(&mut b.ln2.gamma);
                out.push(&mut b.ln2.beta);
                out.push(&mut b.fc1_weight);
                out.push(&mut b.fc1_bias);
                out.push(&mut b.fc2_weight);
                out.push(&mut b.fc2_bias);
            }
        }
        out.push(&mut self.final_ln.gamma);
        out.push(&mut self.final_ln.beta);
        out.push(&mut self.t_out);
        out.push(&mut self.agg_final_ln.gamma);
        out.push(&mut self.agg_final_ln.beta);
        out.push(&mut self.cls_fc1_weight);
        out.push(&mut self.cls_fc1_bias);
        out.push(&mut self.cls_fc2_weight);
        out.push(&mut self.cls_fc2_bias);
        out.push(&mut self.tfl_weight);
        out.push(&mut self.tfl_bias);
        out.push(&mut self.qfe_fc1_weight);
        out.push(&mut self.qfe_fc1_bias);
        out.push(&mut self.qfe_fc2_weight);
        out.push(&mut self.qfe_fc2_bias);
        out
    }

    pub fn names(&self) -> Vec<String> {
        self.named_tensors().into_iter().map(|(n, _)| n).collect()
    }

    /// True for tensors that belong to the (freezable) backbone group:
    /// patch embedding, positional embeddings, CLS token, backbone blocks.
    pub fn is_backbone_tensor(name: &str) -> bool {
        name.starts_with("vit.patch_embed")
            || name.starts_with("vit.pos_embed")
            || name.starts_with("vit.cls_token")
            || name.starts_with("vit.backbone.")
    }

    /// Adds `other` scaled by `alpha` into `self` (tensor-wise).
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        let theirs = other.named_tensors();
        for (mine, (_, t)) in self.tensors_mut().into_iter().zip(theirs) {
            for (a, b) in mine.data_mut().iter_mut().zip(t.data()) {
                *a += alpha * b;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.named_tensors().iter().all(|(_, t)| t.iter_finite())
    }

    pub fn total_len(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

fn trunc_normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    // Box-Muller with rejection outside two standard deviations.
    loop {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        if z.abs() <= 2.0 {
            return z * std;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ModelConfig::desk().validate().is_ok());
        assert!(ModelConfig::standard224().validate().is_ok());
        let bad = ModelConfig { patch_size: 7, ..ModelConfig::desk() };
        assert!(bad.validate().is_err());
        let bad = ModelConfig { heads: 5, ..ModelConfig::desk() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let cfg = ModelConfig::desk();
        let a = ModelParams::init(&cfg, 3);
        let b = ModelParams::init(&cfg, 3);
        assert_eq!(a, b);
        for (_, t) in a.named_tensors() {
            for &v in t.data() {
                assert!(v.abs() <= 1.0, "init value {v} out of expected range");
            }
        }
        assert!(a.t_out.data().iter().all(|&v| v == 0.0));
        assert!(a.patch_embed_bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn named_and_mut_tensor_orders_agree() {
        let cfg = ModelConfig::desk();
        let mut params = ModelParams::init(&cfg, 1);
        let names = params.names();
        let shapes: Vec<Vec<usize>> = params
            .named_tensors()
            .iter()
            .map(|(_, t)| t.shape().to_vec())
            .collect();
        let mut_shapes: Vec<Vec<usize>> = params
            .tensors_mut()
            .iter()
            .map(|t| t.shape().to_vec())
            .collect();
        assert_eq!(shapes, mut_shapes);
        assert_eq!(names.len(), shapes.len());
        // Fixed families all present.
        for prefix in ["vit.patch_embed", "vit.backbone.0", "vit.refiner.0", "agg.blocks.0", "head.cls", "head.tfl", "head.qfe"] {
            assert!(names.iter().any(|n| n.starts_with(prefix)), "missing {prefix}");
        }
    }

    #[test]
    fn backbone_tensor_classification() {
        assert!(ModelParams::is_backbone_tensor("vit.patch_embed.weight"));
        assert!(ModelParams::is_backbone_tensor("vit.backbone.1.attn.qkv.weight"));
        assert!(!ModelParams::is_backbone_tensor("vit.refiner.0.attn.qkv.weight"));
        assert!(!ModelParams::is_backbone_tensor("vit.final_ln.gamma"));
        assert!(!ModelParams::is_backbone_tensor("agg.t_out"));
    }
}
