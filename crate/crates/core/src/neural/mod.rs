//! Neural text classifiers on a small reverse-mode differentiation core.

mod gradcheck;
mod layers;
mod model;
mod params;
mod tape;
mod train;
mod vocab;

pub use gradcheck::{grad_check, GradCheck, DEFAULT_EPS, REL_FLOOR};
pub use layers::{bce_loss, conv_feature_map, lstm_step, max_over_time_pool, ConvFilter, LstmCell};
pub use model::{Architecture, Checkpoint, Model, ModelConfig, ModelKind, CHECKPOINT_VERSION, EMBEDDING_INIT};
pub use params::{Grads, Param, ParamId, ParamStore};
pub use tape::{Activation, NodeId, Tape, PROB_CLAMP};
pub use train::{train, EpochRecord, Example, Optimizer, OptimizerKind, TrainReport, TrainingConfig, ADAGRAD_EPS};
pub use vocab::{Vocab, DEFAULT_SEQ_LEN, PAD, PAD_TOKEN, UNK, UNK_TOKEN};
