//! Concern index construction from grouped relative-search-volume series.
//!
//! Each query group holds up to five terms, one of which is the shared
//! benchmark. A term's relative frequency index is its series scaled by the
//! benchmark's maximum over the group window:
//!
//! ```text
//! FI_i(t) = 100 * S_i(t) / max_t S_benchmark(t)
//! ```
//!
//! The index is the sum of all non-benchmark FI series, normalized so that
//! its sample maximum is 100.

mod build;
mod vocabulary;

pub use build::{aggregate_index, build_cci, rescale_group, ConcernIndex, QueryGroup, TermSeries, SCALE_TOLERANCE};
pub use vocabulary::{partition_vocabulary, QueryTerm, QueryVocabulary, CATEGORY_COUNT, MAX_GROUP_SIZE};
