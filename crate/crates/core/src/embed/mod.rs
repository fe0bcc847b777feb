//! Representations `N → M_k(ℂ)`, trace-approximating embeddings, and unitary
//! conjugacy between representations and between microstates.

mod conjugacy;
mod embedding;
mod representation;

pub use conjugacy::{
    align_microstates, alignment_permutation, check_witness, conjugate_representations, Alignment, Conjugacy,
    WitnessCheck,
};
pub use embedding::{apportion, build_embedding, EmbeddingReport};
pub use representation::{representation_multiplicities, Representation};
