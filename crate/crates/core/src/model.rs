//! The joint model: one shared sentence encoder plus three task heads,
//! all registered in a single parameter store.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::discourse::{ConjunctionExample, NextExample, OrderExample, CATEGORY_COUNT};
use crate::embed::EmbeddingTable;
use crate::encoder::{encode_sentence, EncodeError, EncoderConfig, EncoderParams};
use crate::heads::{
    next_scores, pair_logits, CardinalityError, NextHead, NextScoreError, PairHead,
};
use crate::optim::ParamStore;
use crate::rng::{derive_seed, Rng};
use crate::tape::{NodeId, Tape};
use crate::tensor::{IndexError, Scalar, ShapeError};
use crate::text::EmptySentence;
use crate::vocab::Vocabulary;

pub const ORDER_CLASSES: usize = 2;

/// Everything needed to rebuild a model's parameter layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub encoder: EncoderConfig,
    pub vocab_size: usize,
    pub trainable_embeddings: bool,
}

#[derive(Clone, Debug)]
pub struct Model<S> {
    pub store: ParamStore<S>,
    pub encoder: EncoderParams<S>,
    pub order_head: PairHead,
    pub conjunction_head: PairHead,
    pub next_head: NextHead,
    pub vocab: Vocabulary,
}

/// A task loss could not be built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelError {
    Empty(EmptySentence),
    Shape(ShapeError),
    Index(IndexError),
    Cardinality(CardinalityError),
}

impl From<EncodeError> for ModelError {
    fn from(e: EncodeError) -> Self {
        match e {
            EncodeError::Empty(e) => ModelError::Empty(e),
            EncodeError::Shape(e) => ModelError::Shape(e),
        }
    }
}

impl From<ShapeError> for ModelError {
    fn from(e: ShapeError) -> Self {
        ModelError::Shape(e)
    }
}

impl From<IndexError> for ModelError {
    fn from(e: IndexError) -> Self {
        ModelError::Index(e)
    }
}

impl From<NextScoreError> for ModelError {
    fn from(e: NextScoreError) -> Self {
        match e {
            NextScoreError::Cardinality(e) => ModelError::Cardinality(e),
            NextScoreError::Shape(e) => ModelError::Shape(e),
        }
    }
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::Empty(e) => write!(f, "{e}"),
            ModelError::Shape(e) => write!(f, "{e}"),
            ModelError::Index(e) => write!(f, "{e}"),
            ModelError::Cardinality(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Order example with tokens mapped to vocabulary ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedOrder {
    pub s0: Vec<u32>,
    pub s1: Vec<u32>,
    pub swapped: bool,
}

impl EncodedOrder {
    pub fn from_example(ex: &OrderExample, vocab: &Vocabulary) -> Self {
        EncodedOrder {
            s0: vocab.encode(&ex.s0),
            s1: vocab.encode(&ex.s1),
            swapped: ex.swapped,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedConjunction {
    pub s0: Vec<u32>,
    pub s1: Vec<u32>,
    pub category: usize,
}

impl EncodedConjunction {
    pub fn from_example(ex: &ConjunctionExample, vocab: &Vocabulary) -> Self {
        EncodedConjunction {
            s0: vocab.encode(&ex.s0),
            s1: vocab.encode(&ex.s1),
            category: ex.category.index(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedNext {
    pub context: [Vec<u32>; 3],
    pub candidates: Vec<Vec<u32>>,
    pub answer: usize,
}

impl EncodedNext {
    pub fn from_example(ex: &NextExample, vocab: &Vocabulary) -> Option<Self> {
        if !ex.is_well_formed() {
            return None;
        }
        let mut context = ex.context.iter().map(|s| vocab.encode(s));
        Some(EncodedNext {
            context: [
                context.next().unwrap(),
                context.next().unwrap(),
                context.next().unwrap(),
            ],
            candidates: ex.candidates.iter().map(|s| vocab.encode(s)).collect(),
            answer: ex.answer as usize,
        })
    }
}

impl<S: Scalar> Model<S> {
    /// Builds a fresh model. Heads start at zero; encoder weights are
    /// initialized from a stream derived from `seed`.
    pub fn new(
        config: EncoderConfig,
        vocab: Vocabulary,
        pretrained: Option<EmbeddingTable<S>>,
        seed: u64,
    ) -> Result<Self, ShapeError> {
        let mut store = ParamStore::new();
        let mut rng = Rng::new(derive_seed(seed, &[b"init"]));
        let encoder =
            EncoderParams::init(&mut store, config, vocab.len(), pretrained, &mut rng)?;
        let d = config.output_dim();
        let order_head = PairHead::init_zero(&mut store, "order", ORDER_CLASSES, d);
        let conjunction_head =
            PairHead::init_zero(&mut store, "conjunction", CATEGORY_COUNT, d);
        let next_head = NextHead::init_zero(&mut store, d);
        Ok(Model {
            store,
            encoder,
            order_head,
            conjunction_head,
            next_head,
            vocab,
        })
    }

    pub fn config(&self) -> ModelConfig {
        ModelConfig {
            encoder: self.encoder.config,
            vocab_size: self.vocab.len(),
            trainable_embeddings: self.encoder.embedding.is_trainable(),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    /// Encodes a token-id sequence to a plain vector (no gradients).
    pub fn encode_ids(&self, ids: &[u32]) -> Result<Vec<S>, ModelError> {
        let mut tape = Tape::new(&self.store);
        let node = encode_sentence(&mut tape, &self.encoder, ids)?;
        Ok(tape.data_of(node).to_vec())
    }

    pub fn order_logits(
        &self,
        tape: &mut Tape<'_, S>,
        ex: &EncodedOrder,
    ) -> Result<NodeId, ModelError> {
        let a = encode_sentence(tape, &self.encoder, &ex.s0)?;
        let b = encode_sentence(tape, &self.encoder, &ex.s1)?;
        Ok(pair_logits(tape, &self.order_head, a, b)?)
    }

    pub fn order_loss(
        &self,
        tape: &mut Tape<'_, S>,
        ex: &EncodedOrder,
    ) -> Result<NodeId, ModelError> {
        let logits = self.order_logits(tape, ex)?;
        Ok(tape.softmax_cross_entropy(logits, ex.swapped as usize)?)
    }

    pub fn conjunction_logits(
        &self,
        tape: &mut Tape<'_, S>,
        ex: &EncodedConjunction,
    ) -> Result<NodeId, ModelError> {
        let a = encode_sentence(tape, &self.encoder, &ex.s0)?;
        let b = encode_sentence(tape, &self.encoder, &ex.s1)?;
        Ok(pair_logits(tape, &self.conjunction_head, a, b)?)
    }

    pub fn conjunction_loss(
        &self,
        tape: &mut Tape<'_, S>,
        ex: &EncodedConjunction,
    ) -> Result<NodeId, ModelError> {
        let logits = self.conjunction_logits(tape, ex)?;
        Ok(tape.softmax_cross_entropy(logits, ex.category)?)
    }

    pub fn next_logits(
        &self,
        tape: &mut Tape<'_, S>,
        ex: &EncodedNext,
    ) -> Result<NodeId, ModelError> {
        let ctx: Vec<NodeId> = ex
            .context
            .iter()
            .map(|ids| encode_sentence(tape, &self.encoder, ids))
            .collect::<Result<_, _>>()?;
        let context = tape.concat(&ctx);
        let cands: Vec<NodeId> = ex
            .candidates
            .iter()
            .map(|ids| encode_sentence(tape, &self.encoder, ids))
            .collect::<Result<_, _>>()?;
        Ok(next_scores(tape, &self.next_head, context, &cands)?)
    }

    pub fn next_loss(
        &self,
        tape: &mut Tape<'_, S>,
        ex: &EncodedNext,
    ) -> Result<NodeId, ModelError> {
        let logits = self.next_logits(tape, ex)?;
        Ok(tape.softmax_cross_entropy(logits, ex.answer)?)
    }

    pub fn predict_order(&self, ex: &EncodedOrder) -> Result<bool, ModelError> {
        let mut tape = Tape::new(&self.store);
        let logits = self.order_logits(&mut tape, ex)?;
        Ok(argmax(tape.data_of(logits)) == 1)
    }

    pub fn predict_conjunction(&self, ex: &EncodedConjunction) -> Result<usize, ModelError> {
        let mut tape = Tape::new(&self.store);
        let logits = self.conjunction_logits(&mut tape, ex)?;
        Ok(argmax(tape.data_of(logits)))
    }

    pub fn predict_next(&self, ex: &EncodedNext) -> Result<usize, ModelError> {
        let mut tape = Tape::new(&self.store);
        let logits = self.next_logits(&mut tape, ex)?;
        Ok(argmax(tape.data_of(logits)))
    }
}

/// Index of the maximum value; ties go to the lowest index.
pub fn argmax<S: Scalar>(values: &[S]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::EncoderKind;
    use crate::optim::{gradient_check, GRAD_CHECK_STEP};
    use crate::text::Sentence;

    fn tiny_vocab() -> Vocabulary {
        let sentences: Vec<Sentence> = ["alpha beta gamma delta", "beta gamma", "epsilon"]
            .iter()
            .map(|t| crate::text::tokenize(t).unwrap())
            .collect();
        Vocabulary::build(&sentences, 1)
    }

    fn tiny_model(kind: EncoderKind, seed: u64) -> Model<f64> {
        let config = EncoderConfig {
            kind,
            d_emb: 3,
            d_h: if kind == EncoderKind::Bigru { 2 } else { 4 },
        };
        Model::new(config, tiny_vocab(), None, seed).unwrap()
    }

    fn order_ex() -> EncodedOrder {
        EncodedOrder {
            s0: vec![1, 2],
            s1: vec![3, 4, 5],
            swapped: true,
        }
    }

    fn conj_ex() -> EncodedConjunction {
        EncodedConjunction {
            s0: vec![1, 2, 3],
            s1: vec![4],
            category: 6,
        }
    }

    fn next_ex() -> EncodedNext {
        EncodedNext {
            context: [vec![1], vec![2, 3], vec![4]],
            candidates: vec![vec![5], vec![1, 2], vec![3], vec![4, 5], vec![2]],
            answer: 2,
        }
    }

    #[test]
    fn zero_initialized_heads_start_at_ln_k() {
        for kind in [EncoderKind::Cbow, EncoderKind::Gru, EncoderKind::Bigru] {
            let model = tiny_model(kind, 5);
            let mut tape = Tape::new(&model.store);
            let order = model.order_loss(&mut tape, &order_ex()).unwrap();
            assert!((tape.scalar_value(order) - 2.0f64.ln()).abs() < 1e-6);
            let conj = model.conjunction_loss(&mut tape, &conj_ex()).unwrap();
            assert!((tape.scalar_value(conj) - 9.0f64.ln()).abs() < 1e-6);
            let next = model.next_loss(&mut tape, &next_ex()).unwrap();
            assert!((tape.scalar_value(next) - 5.0f64.ln()).abs() < 1e-6);
        }
    }

    #[test]
    fn all_task_losses_pass_gradient_check() {
        // Randomize every parameter (heads included) so the check walks
        // a generic point, then verify each task loss end to end.
        for seed in 0..5 {
            let mut model = tiny_model(EncoderKind::Bigru, seed);
            let mut rng = Rng::new(derive_seed(seed, &[b"randomize"]));
            for id in model.store.ids().collect::<Vec<_>>() {
                let len = model.store.value(id).len();
                let data: Vec<f64> = (0..len).map(|_| rng.next_range(-0.5, 0.5)).collect();
                model
                    .store
                    .param_mut(id)
                    .value
                    .data_mut()
                    .copy_from_slice(&data);
            }
            let (order, conj, next) = (order_ex(), conj_ex(), next_ex());

            let mut check = |f: &dyn Fn(&Model<f64>, &mut Tape<'_, f64>) -> NodeId| {
                // Rebuild a model view borrowing the mutated store.
                let report = {
                    let encoder = model.encoder.clone();
                    let order_head = model.order_head.clone();
                    let conjunction_head = model.conjunction_head.clone();
                    let next_head = model.next_head.clone();
                    let vocab = model.vocab.clone();
                    gradient_check(
                        &mut model.store,
                        |s| {
                            let view = Model {
                                store: s.clone(),
                                encoder: encoder.clone(),
                                order_head: order_head.clone(),
                                conjunction_head: conjunction_head.clone(),
                                next_head: next_head.clone(),
                                vocab: vocab.clone(),
                            };
                            let mut tape = Tape::new(&view.store);
                            let loss = f(&view, &mut tape);
                            (tape.scalar_value(loss), tape.backward(loss))
                        },
                        GRAD_CHECK_STEP,
                    )
                };
                assert!(
                    report.max_rel_err < 1e-4,
                    "seed {seed}: {} at {}[{}]",
                    report.max_rel_err,
                    report.worst_param,
                    report.worst_coord
                );
            };

            check(&|m, tape| m.order_loss(tape, &order).unwrap());
            check(&|m, tape| m.conjunction_loss(tape, &conj).unwrap());
            check(&|m, tape| m.next_loss(tape, &next).unwrap());
        }
    }

    #[test]
    fn predictions_are_argmax() {
        let model = tiny_model(EncoderKind::Gru, 9);
        let ex = order_ex();
        let mut tape = Tape::new(&model.store);
        let logits = model.order_logits(&mut tape, &ex).unwrap();
        let data = tape.data_of(logits);
        let want = data[1] > data[0];
        assert_eq!(model.predict_order(&ex).unwrap(), want);
    }

    #[test]
    fn argmax_ties_take_lowest_index() {
        assert_eq!(argmax(&[0.0f64, 0.0, 0.0]), 0);
        assert_eq!(argmax(&[1.0f64, 3.0, 3.0]), 1);
    }

    #[test]
    fn empty_sentence_in_example_is_rejected() {
        let model = tiny_model(EncoderKind::Cbow, 1);
        let ex = EncodedOrder {
            s0: vec![],
            s1: vec![1],
            swapped: false,
        };
        let mut tape = Tape::new(&model.store);
        assert!(matches!(
            model.order_loss(&mut tape, &ex),
            Err(ModelError::Empty(_))
        ));
    }
}
