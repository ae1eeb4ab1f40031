//! Function graphs: series, fractal interpolation systems and their Markovian
//! generalization, with the expanding dynamics and the natural projection.

mod affine;
mod data;
mod markov;
mod series;

pub use affine::AffineMap2;
pub use data::{build_phi_from_data, fif_maps, DataSet, PiecewisePhi, VerticalScalings};
pub use markov::{MarkovFif, Projection};
pub use series::{eval_series, sample_series, self_similarity_residual, Phi, SeriesSpec};
