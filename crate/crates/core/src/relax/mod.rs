//! Upper bounds for the relaxed line-tension density and its large-Burgers-vector asymptote.

mod asymptotic;
mod envelope;
mod split;

pub use asymptotic::AsymptoticDensity;
pub use envelope::{facet_envelope, facet_envelope_value, FacetEnvelope, FacetWitness, PrelogTable};
pub use split::{psi_infinity, psi_rel_upper, split_search, RelaxParams, Relaxer, SplitDecomposition, SplitPart};
