//! Stacked LSTM regressor: forward pass, backpropagation through time,
//! Adam, the training loop and model files.

mod adam;
mod cell;
mod io;
mod network;
mod params;
mod train;

pub use adam::{clip_global_norm, AdamState};
pub use cell::{cell_step, GateCache, LstmState};
pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use network::{draw_mask, ForwardCache, LayerCache, LstmModel, Window, MAX_DROPOUT};
pub use params::{Gate, LstmLayerParams, Parameters};
pub use train::{mse_loss, train, TrainConfig, TrainReport};
