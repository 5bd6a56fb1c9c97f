//! Explicit tree decompositions of blow-up complete graphs and their
//! near-complete relatives, with an independent certificate verifier.

pub mod blowup;
pub mod cn_oracle;
pub mod complements;
pub mod decomposition;
pub mod error;
pub mod group;
pub mod hall;
pub mod matching;
pub mod rainbow;
pub mod sample;
pub mod seed;
pub mod split;
pub mod target;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
