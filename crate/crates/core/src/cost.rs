//! Exact multiplication and parameter accounting for attention blocks.
//!
//! Conventions: a linear layer on `T` tokens costs `T * C_in * C_out`
//! multiplications; each attention product costs `T * M^2 * d` per head.
//! One multiply-accumulate counts as one FLOP and softmax is not counted.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::attention::{msa_forward, AttentionConfig, AttentionWeights};
use crate::compressed::{compressed_forward, CompressedVariant, CompressedWeights};
use crate::dense::{normal_matrix, seeded_rng, MulCounter, Tensor3};
use crate::error::{arg_err, Error, Result};
use crate::transform::{dct_matrix, kept_count, truncate};

/// Which attention block is being costed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostVariant {
    Vanilla,
    Naive,
    Simplified,
}

impl CostVariant {
    pub const ALL: [CostVariant; 3] = [Self::Vanilla, Self::Naive, Self::Simplified];

    pub fn compressed(self) -> Option<CompressedVariant> {
        match self {
            Self::Vanilla => None,
            Self::Naive => Some(CompressedVariant::Naive),
            Self::Simplified => Some(CompressedVariant::Simplified),
        }
    }
}

impl fmt::Display for CostVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Vanilla => "vanilla",
            Self::Naive => "naive",
            Self::Simplified => "simplified",
        })
    }
}

impl FromStr for CostVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vanilla" => Ok(Self::Vanilla),
            "naive" => Ok(Self::Naive),
            "simplified" | "fused" => Ok(Self::Simplified),
            other => arg_err("variant", format!("unknown variant `{other}`")),
        }
    }
}

/// Geometry of one attention block. `t` is the total token count `N * M^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub t: usize,
    pub c: usize,
    pub m: usize,
    pub p: usize,
}

impl BlockShape {
    pub fn new(t: usize, c: usize, m: usize, p: usize) -> Result<Self> {
        let s = Self { t, c, m, p };
        s.validate()?;
        Ok(s)
    }

    /// Shape of `n` windows of side `m`.
    pub fn windows(n: usize, m: usize, c: usize, p: usize) -> Result<Self> {
        Self::new(n * m * m, c, m, p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return arg_err("t", "token count must be positive");
        }
        if self.m == 0 {
            return arg_err("m", "window side must be positive");
        }
        if self.c == 0 || self.p == 0 || self.c % self.p != 0 {
            return arg_err("p", format!("{} heads do not divide {} channels", self.p, self.c));
        }
        Ok(())
    }

    /// Width of the attention computation: `C` for vanilla, `kept` otherwise.
    pub fn width(&self, variant: CostVariant, tau: f64) -> Result<usize> {
        self.validate()?;
        let width = match variant {
            CostVariant::Vanilla => self.c,
            _ => kept_count(self.c, tau)?,
        };
        if width % self.p != 0 {
            return arg_err(
                "p",
                format!("{} heads do not divide {width} kept coefficients", self.p),
            );
        }
        Ok(width)
    }
}

/// Per-operation multiplication counts of one block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub dct: u64,
    pub qkv: u64,
    pub attn_scores: u64,
    pub attn_values: u64,
    pub idct: u64,
    pub out_proj: u64,
    pub total: u64,
}

impl CostBreakdown {
    fn finish(mut self) -> Self {
        self.total =
            self.dct + self.qkv + self.attn_scores + self.attn_values + self.idct + self.out_proj;
        self
    }

    fn times(self, k: u64) -> Self {
        Self {
            dct: self.dct * k,
            qkv: self.qkv * k,
            attn_scores: self.attn_scores * k,
            attn_values: self.attn_values * k,
            idct: self.idct * k,
            out_proj: self.out_proj * k,
            total: self.total * k,
        }
    }
}

/// Trainable parameter counts of one block. `W_O` is always `C x C`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamBreakdown {
    pub qkv_weights: u64,
    pub qkv_biases: u64,
    pub out_weight: u64,
    pub out_bias: u64,
    pub bias_tables: u64,
    pub total: u64,
}

impl ParamBreakdown {
    fn times(self, k: u64) -> Self {
        Self {
            qkv_weights: self.qkv_weights * k,
            qkv_biases: self.qkv_biases * k,
            out_weight: self.out_weight * k,
            out_bias: self.out_bias * k,
            bias_tables: self.bias_tables * k,
            total: self.total * k,
        }
    }
}

/// Closed-form multiplication count of one block.
pub fn block_mults(shape: BlockShape, variant: CostVariant, tau: f64) -> Result<CostBreakdown> {
    let k = shape.width(variant, tau)? as u64;
    let (t, c, m2) = (shape.t as u64, shape.c as u64, (shape.m * shape.m) as u64);
    let mut b = CostBreakdown {
        qkv: 3 * t * k * k,
        attn_scores: t * m2 * k,
        attn_values: t * m2 * k,
        ..Default::default()
    };
    match variant {
        CostVariant::Vanilla => b.out_proj = t * c * c,
        CostVariant::Naive => {
            b.dct = t * c * k;
            b.idct = t * k * c;
            b.out_proj = t * c * c;
        }
        CostVariant::Simplified => {
            b.dct = t * c * k;
            b.out_proj = t * k * c;
        }
    }
    Ok(b.finish())
}

/// Closed-form parameter count of one block.
pub fn block_params(c: usize, m: usize, p: usize, variant: CostVariant, tau: f64) -> Result<ParamBreakdown> {
    let shape = BlockShape::new(1, c, m, p)?;
    let k = shape.width(variant, tau)? as u64;
    let (c, side) = (c as u64, (2 * m - 1) as u64);
    let qkv_weights = 3 * k * k;
    let qkv_biases = 3 * k;
    let out_weight = c * c;
    let out_bias = c;
    let bias_tables = p as u64 * side * side;
    Ok(ParamBreakdown {
        qkv_weights,
        qkv_biases,
        out_weight,
        out_bias,
        bias_tables,
        total: qkv_weights + qkv_biases + out_weight + out_bias + bias_tables,
    })
}

/// Multiplications recorded by [`MulCounter`] during an actual forward pass
/// of a randomly initialised block. `shape.t` must be a multiple of `M^2`.
pub fn measured_block_mults(shape: BlockShape, variant: CostVariant, tau: f64, seed: u64) -> Result<u64> {
    let width = shape.width(variant, tau)?;
    let m2 = shape.m * shape.m;
    if shape.t % m2 != 0 {
        return arg_err("t", format!("{} tokens do not tile windows of {m2}", shape.t));
    }
    let cfg = AttentionConfig::new(shape.t / m2, shape.m, shape.c, shape.p)?;
    let mut rng = seeded_rng(seed);
    let x = Tensor3::from_token_matrix(cfg.n, m2, normal_matrix::<f64>(shape.t, shape.c, 1.0, &mut rng))?;
    let mut counter = MulCounter::new();
    match variant.compressed() {
        None => {
            let w = AttentionWeights::<f64>::init(&cfg, seed)?;
            msa_forward(&x, &w, &cfg, Some(&mut counter))?;
        }
        Some(cv) => {
            let trunc = truncate(&dct_matrix::<f64>(shape.c)?, tau)?;
            let cw = CompressedWeights::<f64>::init(shape.c, width, shape.p, shape.m, seed)?;
            compressed_forward(&x, &cw, &cfg, &trunc, cv, Some(&mut counter))?;
        }
    }
    Ok(counter.total())
}

/// One stage of a hierarchical model: `depth` identical blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub name: String,
    pub tokens: usize,
    pub channels: usize,
    pub heads: usize,
    pub depth: usize,
}

/// Stages plus a shared window side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub window: usize,
    pub stages: Vec<StageSpec>,
}

const SWIN_TOKENS: [usize; 4] = [3136, 784, 196, 49];
const SWIN_CHANNELS: [usize; 4] = [96, 192, 384, 768];
const SWIN_HEADS: [usize; 4] = [3, 6, 12, 24];

impl ModelSpec {
    fn swin(name: &str, depths: [usize; 4]) -> Self {
        let stages = (0..4)
            .map(|i| StageSpec {
                name: format!("stage{}", i + 1),
                tokens: SWIN_TOKENS[i],
                channels: SWIN_CHANNELS[i],
                heads: SWIN_HEADS[i],
                depth: depths[i],
            })
            .collect();
        Self {
            name: name.to_string(),
            window: 7,
            stages,
        }
    }

    pub fn swin_t() -> Self {
        Self::swin("swin-t", [2, 2, 6, 2])
    }

    pub fn swin_s() -> Self {
        Self::swin("swin-s", [2, 2, 18, 2])
    }

    /// `swin-t` or `swin-s` (case-insensitive).
    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "swin-t" => Ok(Self::swin_t()),
            "swin-s" => Ok(Self::swin_s()),
            other => Err(Error::ModelSpec(format!("unknown model `{other}`"))),
        }
    }

    /// Parses the plain-text format:
    ///
    /// ```text
    /// # comment
    /// name = tiny
    /// window = 7
    /// stage = 3136 96 3 2   # tokens channels heads depth
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::from("custom");
        let mut window = None;
        let mut stages = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::ModelSpec(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            let value = value.trim();
            match key.trim() {
                "name" => name = value.to_string(),
                "window" => {
                    window = Some(value.parse::<usize>().map_err(|_| bad("window must be an integer"))?)
                }
                "stage" => {
                    let nums = value
                        .split_whitespace()
                        .map(|v| v.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("stage fields must be integers"))?;
                    let [tokens, channels, heads, depth] = nums[..] else {
                        return Err(bad("stage needs: tokens channels heads depth"));
                    };
                    stages.push(StageSpec {
                        name: format!("stage{}", stages.len() + 1),
                        tokens,
                        channels,
                        heads,
                        depth,
                    });
                }
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let spec = Self {
            name,
            window: window.ok_or_else(|| Error::ModelSpec("missing `window`".into()))?,
            stages,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A built-in name, or else a path to a spec file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Ok(spec) = Self::builtin(name_or_path) {
            return Ok(spec);
        }
        let path = Path::new(name_or_path);
        if !path.is_file() {
            return Err(Error::ModelSpec(format!(
                "`{name_or_path}` is neither a built-in model nor a readable file"
            )));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ModelSpec(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::ModelSpec("no stages".into()));
        }
        for s in &self.stages {
            BlockShape::new(s.tokens, s.channels, self.window, s.heads)
                .map_err(|e| Error::ModelSpec(format!("{}: {e}", s.name)))?;
        }
        Ok(())
    }
}

/// Costs of one stage for the requested variant (all `depth` blocks).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageCost {
    pub name: String,
    pub depth: usize,
    pub shape: BlockShape,
    pub kept: usize,
    pub block: CostBreakdown,
    pub mults: CostBreakdown,
    pub params: ParamBreakdown,
    pub vanilla_mults: u64,
    pub vanilla_params: u64,
}

/// Whole-model accounting. Deltas are vanilla minus the requested variant
/// and may be negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelTotals {
    pub model: String,
    pub tau: f64,
    pub variant: CostVariant,
    pub stages: Vec<StageCost>,
    pub vanilla_params: u64,
    pub params: u64,
    pub vanilla_mults: u64,
    pub mults: u64,
    pub param_delta: i64,
    pub mult_delta: i64,
}

pub fn model_totals(spec: &ModelSpec, tau: f64, variant: CostVariant) -> Result<ModelTotals> {
    spec.validate()?;
    let mut out = ModelTotals {
        model: spec.name.clone(),
        tau,
        variant,
        stages: Vec::with_capacity(spec.stages.len()),
        vanilla_params: 0,
        params: 0,
        vanilla_mults: 0,
        mults: 0,
        param_delta: 0,
        mult_delta: 0,
    };
    for s in &spec.stages {
        let shape = BlockShape::new(s.tokens, s.channels, spec.window, s.heads)?;
        let depth = s.depth as u64;
        let block = block_mults(shape, variant, tau)?;
        let vanilla = block_mults(shape, CostVariant::Vanilla, tau)?;
        let params = block_params(s.channels, spec.window, s.heads, variant, tau)?;
        let vparams = block_params(s.channels, spec.window, s.heads, CostVariant::Vanilla, tau)?;
        let stage = StageCost {
            name: s.name.clone(),
            depth: s.depth,
            shape,
            kept: shape.width(variant, tau)?,
            block,
            mults: block.times(depth),
            params: params.times(depth),
            vanilla_mults: vanilla.total * depth,
            vanilla_params: vparams.total * depth,
        };
        out.vanilla_params += stage.vanilla_params;
        out.params += stage.params.total;
        out.vanilla_mults += stage.vanilla_mults;
        out.mults += stage.mults.total;
        out.stages.push(stage);
    }
    out.param_delta = out.vanilla_params as i64 - out.params as i64;
    out.mult_delta = out.vanilla_mults as i64 - out.mults as i64;
    Ok(out)
}

/// Which way of producing compressed Q, K, V is cheaper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionWinner {
    Separate,
    Fused,
    Tie,
}

/// `T C^2` coefficients of a shared DCT followed by three `kept x kept`
/// projections (`tau + 3 tau^2`) versus folding the DCT into each of the
/// three projections (`3 tau`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionComparison {
    pub tau: Ratio<i64>,
    pub separate: Ratio<i64>,
    pub fused: Ratio<i64>,
    pub winner: FusionWinner,
}

pub fn fusion_break_even(tau: Ratio<i64>) -> Result<FusionComparison> {
    if tau <= Ratio::zero() || tau > Ratio::one() {
        return arg_err("tau", format!("{tau} is outside (0, 1]"));
    }
    let three = Ratio::from_integer(3);
    let separate = tau + three * tau * tau;
    let fused = three * tau;
    let winner = match separate.cmp(&fused) {
        std::cmp::Ordering::Less => FusionWinner::Separate,
        std::cmp::Ordering::Greater => FusionWinner::Fused,
        std::cmp::Ordering::Equal => FusionWinner::Tie,
    };
    Ok(FusionComparison {
        tau,
        separate,
        fused,
        winner,
    })
}

/// [`fusion_break_even`] for a decimal ratio, converted to the nearest
/// fraction with a denominator of at most 10^6.
pub fn fusion_break_even_f64(tau: f64) -> Result<FusionComparison> {
    if !tau.is_finite() {
        return arg_err("tau", "must be finite");
    }
    let r = Ratio::approximate_float(tau)
        .ok_or(Error::InvalidArgument {
            name: "tau",
            detail: format!("{tau} has no rational approximation"),
        })?;
    fusion_break_even(limit_denominator(r, 1_000_000))
}

// Best rational approximation with bounded denominator (continued fractions).
fn limit_denominator(r: Ratio<i64>, max_den: i64) -> Ratio<i64> {
    if *r.denom() <= max_den {
        return r;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let (mut n, mut d) = (*r.numer(), *r.denom());
    loop {
        let a = n.div_euclid(d);
        let q2 = q0 + a * q1;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p0 + a * p1, q2);
        (n, d) = (d, n - a * d);
        if d == 0 {
            break;
        }
    }
    let k = (max_den - q0) / q1;
    let b1 = Ratio::new(p0 + k * p1, q0 + k * q1);
    let b2 = Ratio::new(p1, q1);
    if (b2 - r).abs() <= (b1 - r).abs() {
        b2
    } else {
        b1
    }
}
