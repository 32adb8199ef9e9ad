//! Sentence encoders: token embeddings pass through a highway layer,
//! then are either summed and projected (CBOW), run through a GRU
//! (final state), or run through two GRUs in opposite directions
//! (final states concatenated).

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingTable;
use crate::optim::{ParamId, ParamStore};
use crate::rng::Rng;
use crate::tape::{NodeId, Tape};
use crate::tensor::{Scalar, ShapeError, Tensor};
use crate::text::EmptySentence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Cbow,
    Gru,
    Bigru,
}

impl EncoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Cbow => "cbow",
            EncoderKind::Gru => "gru",
            EncoderKind::Bigru => "bigru",
        }
    }
}

impl core::str::FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cbow" => Ok(EncoderKind::Cbow),
            "gru" => Ok(EncoderKind::Gru),
            "bigru" => Ok(EncoderKind::Bigru),
            other => Err(alloc::format!("unknown encoder kind '{other}'")),
        }
    }
}

/// Encoder dimensions. `d_h` is the hidden width: the CBOW projection
/// target, the GRU state size, or the per-direction BiGRU state size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub kind: EncoderKind,
    pub d_emb: usize,
    pub d_h: usize,
}

impl EncoderConfig {
    /// Paper-scale defaults: 300-dim embeddings; 1024-dim CBOW and GRU
    /// outputs; 512 per BiGRU direction (1024 concatenated).
    pub fn defaults(kind: EncoderKind) -> Self {
        let d_h = match kind {
            EncoderKind::Cbow | EncoderKind::Gru => 1024,
            EncoderKind::Bigru => 512,
        };
        EncoderConfig {
            kind,
            d_emb: 300,
            d_h,
        }
    }

    /// Dimension of every sentence encoding this encoder produces.
    pub fn output_dim(&self) -> usize {
        match self.kind {
            EncoderKind::Cbow | EncoderKind::Gru => self.d_h,
            EncoderKind::Bigru => 2 * self.d_h,
        }
    }
}

/// Where token vectors come from: a frozen pretrained matrix, or a
/// trainable parameter.
#[derive(Clone, Debug)]
pub enum EmbeddingSlot<S> {
    Frozen(Tensor<S>),
    Trainable(ParamId),
}

impl<S: Scalar> EmbeddingSlot<S> {
    pub fn is_trainable(&self) -> bool {
        matches!(self, EmbeddingSlot::Trainable(_))
    }

    pub fn dim(&self, store: &ParamStore<S>) -> usize {
        match self {
            EmbeddingSlot::Frozen(t) => t.cols(),
            EmbeddingSlot::Trainable(id) => store.value(*id).cols(),
        }
    }

    pub fn vocab_size(&self, store: &ParamStore<S>) -> usize {
        match self {
            EmbeddingSlot::Frozen(t) => t.rows(),
            EmbeddingSlot::Trainable(id) => store.value(*id).rows(),
        }
    }

    fn token_node(&self, tape: &mut Tape<'_, S>, id: u32) -> NodeId {
        match self {
            EmbeddingSlot::Frozen(t) => {
                let d = t.cols();
                let row = &t.data()[id as usize * d..(id as usize + 1) * d];
                let tensor = Tensor::from_vec(&[1, d], row.to_vec()).expect("row is 1xd");
                tape.constant(tensor)
            }
            EmbeddingSlot::Trainable(pid) => tape.param_row(*pid, id as usize),
        }
    }
}

/// Gated residual transform applied to each token embedding.
#[derive(Clone, Copy, Debug)]
pub struct HighwayParams {
    pub w_h: ParamId,
    pub w_g: ParamId,
    pub b_h: ParamId,
    pub b_g: ParamId,
}

/// One GRU direction.
#[derive(Clone, Copy, Debug)]
pub struct GruParams {
    pub w_z: ParamId,
    pub w_r: ParamId,
    pub w_c: ParamId,
    pub u_z: ParamId,
    pub u_r: ParamId,
    pub u_c: ParamId,
    pub b_z: ParamId,
    pub b_r: ParamId,
    pub b_c: ParamId,
}

/// CBOW output projection.
#[derive(Clone, Copy, Debug)]
pub struct ProjectionParams {
    pub w: ParamId,
    pub b: ParamId,
}

#[derive(Clone, Debug)]
pub enum EncoderBody {
    Cbow(ProjectionParams),
    Gru(GruParams),
    Bigru { fwd: GruParams, bwd: GruParams },
}

/// All encoder parameters plus the embedding slot.
#[derive(Clone, Debug)]
pub struct EncoderParams<S> {
    pub config: EncoderConfig,
    pub embedding: EmbeddingSlot<S>,
    pub highway: HighwayParams,
    pub body: EncoderBody,
}

/// Glorot-uniform matrix: bounds ±√(6 / (fan_in + fan_out)).
fn glorot<S: Scalar>(
    store: &mut ParamStore<S>,
    name: String,
    rows: usize,
    cols: usize,
    rng: &mut Rng,
) -> ParamId {
    let limit = libm::sqrt(6.0 / (rows + cols) as f64);
    let data: Vec<S> = (0..rows * cols)
        .map(|_| S::from_f64(rng.next_range(-limit, limit)))
        .collect();
    store.add(
        name,
        Tensor::from_vec(&[rows, cols], data).expect("sized above"),
    )
}

fn zero_bias<S: Scalar>(store: &mut ParamStore<S>, name: String, d: usize) -> ParamId {
    store.add(name, Tensor::zeros(&[1, d]))
}

impl HighwayParams {
    pub fn init<S: Scalar>(store: &mut ParamStore<S>, d: usize, rng: &mut Rng) -> Self {
        HighwayParams {
            w_h: glorot(store, "highway.w_h".into(), d, d, rng),
            w_g: glorot(store, "highway.w_g".into(), d, d, rng),
            b_h: zero_bias(store, "highway.b_h".into(), d),
            b_g: zero_bias(store, "highway.b_g".into(), d),
        }
    }
}

impl GruParams {
    pub fn init<S: Scalar>(
        store: &mut ParamStore<S>,
        prefix: &str,
        d_in: usize,
        d_h: usize,
        rng: &mut Rng,
    ) -> Self {
        let name = |suffix: &str| alloc::format!("{prefix}.{suffix}");
        GruParams {
            w_z: glorot(store, name("w_z"), d_in, d_h, rng),
            w_r: glorot(store, name("w_r"), d_in, d_h, rng),
            w_c: glorot(store, name("w_c"), d_in, d_h, rng),
            u_z: glorot(store, name("u_z"), d_h, d_h, rng),
            u_r: glorot(store, name("u_r"), d_h, d_h, rng),
            u_c: glorot(store, name("u_c"), d_h, d_h, rng),
            b_z: zero_bias(store, name("b_z"), d_h),
            b_r: zero_bias(store, name("b_r"), d_h),
            b_c: zero_bias(store, name("b_c"), d_h),
        }
    }
}

impl<S: Scalar> EncoderParams<S> {
    /// Registers all encoder parameters. A pretrained table fixes
    /// `d_emb`; without one the embedding matrix is trainable,
    /// initialized uniform(-0.1, 0.1).
    pub fn init(
        store: &mut ParamStore<S>,
        config: EncoderConfig,
        vocab_size: usize,
        pretrained: Option<EmbeddingTable<S>>,
        rng: &mut Rng,
    ) -> Result<Self, ShapeError> {
        let embedding = match pretrained {
            Some(table) => {
                if table.vocab_size() != vocab_size || table.dim() != config.d_emb {
                    return Err(ShapeError {
                        op: "encoder_init",
                        lhs: table.matrix.shape().to_vec(),
                        rhs: alloc::vec![vocab_size, config.d_emb],
                    });
                }
                if table.trainable {
                    EmbeddingSlot::Trainable(store.add("embedding", table.matrix))
                } else {
                    EmbeddingSlot::Frozen(table.matrix)
                }
            }
            None => {
                let data: Vec<S> = (0..vocab_size * config.d_emb)
                    .map(|_| S::from_f64(rng.next_range(-0.1, 0.1)))
                    .collect();
                let matrix =
                    Tensor::from_vec(&[vocab_size, config.d_emb], data).expect("sized above");
                EmbeddingSlot::Trainable(store.add("embedding", matrix))
            }
        };

        let highway = HighwayParams::init(store, config.d_emb, rng);
        let body = match config.kind {
            EncoderKind::Cbow => EncoderBody::Cbow(ProjectionParams {
                w: glorot(store, "proj.w".into(), config.d_emb, config.d_h, rng),
                b: zero_bias(store, "proj.b".into(), config.d_h),
            }),
            EncoderKind::Gru => {
                EncoderBody::Gru(GruParams::init(store, "gru", config.d_emb, config.d_h, rng))
            }
            EncoderKind::Bigru => EncoderBody::Bigru {
                fwd: GruParams::init(store, "gru_fwd", config.d_emb, config.d_h, rng),
                bwd: GruParams::init(store, "gru_bwd", config.d_emb, config.d_h, rng),
            },
        };

        Ok(EncoderParams {
            config,
            embedding,
            highway,
            body,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim()
    }
}

/// y = g ⊙ h + (1 − g) ⊙ x with g = σ(x·W_g + b_g), h = tanh(x·W_h + b_h).
pub fn highway_forward<S: Scalar>(
    tape: &mut Tape<'_, S>,
    hw: &HighwayParams,
    x: NodeId,
) -> Result<NodeId, ShapeError> {
    let w_g = tape.param(hw.w_g);
    let b_g = tape.param(hw.b_g);
    let w_h = tape.param(hw.w_h);
    let b_h = tape.param(hw.b_h);

    let xg = tape.matmul(x, w_g)?;
    let xg = tape.add(xg, b_g)?;
    let g = tape.sigmoid(xg);

    let xh = tape.matmul(x, w_h)?;
    let xh = tape.add(xh, b_h)?;
    let h = tape.tanh(xh);

    // g⊙h + (1−g)⊙x, written as (x − g⊙x) + g⊙h
    let gx = tape.mul(g, x)?;
    let carry = tape.sub(x, gx)?;
    let gh = tape.mul(g, h)?;
    tape.add(carry, gh)
}

/// One GRU step:
/// z = σ(x·W_z + h·U_z + b_z), r = σ(x·W_r + h·U_r + b_r),
/// c = tanh(x·W_c + (r⊙h)·U_c + b_c), h' = (1 − z) ⊙ h + z ⊙ c.
pub fn gru_step<S: Scalar>(
    tape: &mut Tape<'_, S>,
    gru: &GruParams,
    x: NodeId,
    h: NodeId,
) -> Result<NodeId, ShapeError> {
    let gate = |tape: &mut Tape<'_, S>, w, u, b, x, h| -> Result<NodeId, ShapeError> {
        let w = tape.param(w);
        let u = tape.param(u);
        let b = tape.param(b);
        let xw = tape.matmul(x, w)?;
        let hu = tape.matmul(h, u)?;
        let sum = tape.add(xw, hu)?;
        tape.add(sum, b)
    };

    let z_pre = gate(tape, gru.w_z, gru.u_z, gru.b_z, x, h)?;
    let z = tape.sigmoid(z_pre);
    let r_pre = gate(tape, gru.w_r, gru.u_r, gru.b_r, x, h)?;
    let r = tape.sigmoid(r_pre);

    let rh = tape.mul(r, h)?;
    let c_pre = gate(tape, gru.w_c, gru.u_c, gru.b_c, x, rh)?;
    let c = tape.tanh(c_pre);

    // (1−z)⊙h + z⊙c, written as (h − z⊙h) + z⊙c
    let zh = tape.mul(z, h)?;
    let keep = tape.sub(h, zh)?;
    let zc = tape.mul(z, c)?;
    tape.add(keep, zc)
}

fn run_gru<S: Scalar>(
    tape: &mut Tape<'_, S>,
    enc: &EncoderParams<S>,
    gru: &GruParams,
    ids: impl Iterator<Item = u32>,
) -> Result<NodeId, ShapeError> {
    let mut h = tape.zeros(&[1, enc.config.d_h]);
    for id in ids {
        let x = enc.embedding.token_node(tape, id);
        let x = highway_forward(tape, &enc.highway, x)?;
        h = gru_step(tape, gru, x, h)?;
    }
    Ok(h)
}

/// Encodes a token-id sequence into a `[1, D]` node, where D is the
/// encoder's output dimension.
pub fn encode_sentence<S: Scalar>(
    tape: &mut Tape<'_, S>,
    enc: &EncoderParams<S>,
    ids: &[u32],
) -> Result<NodeId, EncodeError> {
    if ids.is_empty() {
        return Err(EncodeError::Empty(EmptySentence));
    }
    let out = match &enc.body {
        EncoderBody::Cbow(proj) => {
            let mut sum: Option<NodeId> = None;
            for &id in ids {
                let x = enc.embedding.token_node(tape, id);
                let x = highway_forward(tape, &enc.highway, x)?;
                sum = Some(match sum {
                    None => x,
                    Some(acc) => tape.add(acc, x)?,
                });
            }
            let sum = sum.expect("ids nonempty");
            let w = tape.param(proj.w);
            let b = tape.param(proj.b);
            let projected = tape.matmul(sum, w)?;
            tape.add(projected, b)?
        }
        EncoderBody::Gru(gru) => run_gru(tape, enc, gru, ids.iter().copied())?,
        EncoderBody::Bigru { fwd, bwd } => {
            let forward = run_gru(tape, enc, fwd, ids.iter().copied())?;
            let backward = run_gru(tape, enc, bwd, ids.iter().rev().copied())?;
            tape.concat(&[forward, backward])
        }
    };
    Ok(out)
}

/// Sentence encoding failed: no tokens, or inconsistent parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EncodeError {
    Empty(EmptySentence),
    Shape(ShapeError),
}

impl From<EmptySentence> for EncodeError {
    fn from(e: EmptySentence) -> Self {
        EncodeError::Empty(e)
    }
}

impl From<ShapeError> for EncodeError {
    fn from(e: ShapeError) -> Self {
        EncodeError::Shape(e)
    }
}

impl core::fmt::Display for EncodeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EncodeError::Empty(e) => write!(f, "{e}"),
            EncodeError::Shape(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EncodeError {}
