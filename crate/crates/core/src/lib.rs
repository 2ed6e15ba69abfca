pub mod block;
pub mod codec;
pub mod config;
pub mod entropy;
pub mod error;
pub mod flow;
pub mod group;
pub mod marker;
pub mod matching;
pub mod measure;
pub mod perturb;
pub mod pipeline;
pub mod source;
pub mod suite;
pub mod tiling;
pub mod verdict;

pub use error::{Error, Result};
