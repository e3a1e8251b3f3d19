//! Demand data: containers, preprocessing, windowing, correlation analysis and
//! a synthetic multimodal generator.

mod demand;
mod pearson;
mod prep;
mod scaler;
mod synth;
mod window;

pub use demand::DemandMatrix;
pub use pearson::{pearson, pearson_matrix, Correlations, Histogram};
pub use prep::{filter_stations, split, Split, SplitFractions};
pub use scaler::MinMaxScaler;
pub use synth::{synth_generate, SynthConfig};
pub use window::{make_windows, WindowBatch};
