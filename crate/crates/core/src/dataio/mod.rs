//! File formats, model persistence and synthetic dataset generators.

mod csv_io;
mod model_file;
mod synth;
mod wav;

pub use csv_io::{format_csv_matrix, parse_csv_matrix, read_csv_matrix, write_csv_matrix};
pub use model_file::{load_model, model_from_json, model_to_json, save_model, ModelFile, MODEL_FORMAT, MODEL_VERSION};
pub use synth::{synth_emg, synth_spectra, SpectraSpec, SyntheticEmg, SyntheticMixture, SyntheticSpec};
pub use wav::{quantize, read_wav, write_wav};
