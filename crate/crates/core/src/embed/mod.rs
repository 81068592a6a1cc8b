//! ComplEx link predictor: embedding table, training, and score calibration.

mod calibrate;
mod loss;
mod table;
mod train;

pub use calibrate::CalibratedScorer;
pub use loss::{
    log_sigmoid, loss_by_name, sigmoid, CrossEntropyLoss, LogSigmoidLoss, Loss, LossEval, MarginLoss,
    LOSS_NAMES,
};
pub use table::{EmbeddingTable, EMBEDDING_MAGIC};
pub use train::{
    batch_objective, train, train_with_progress, Example, Gradient, Init, Params, TrainConfig,
    TrainReport,
};
