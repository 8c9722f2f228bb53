//! Information leakage of repeated observations through a discrete channel.
//!
//! Given a prior over secrets `X` and a channel `Q(y|x)`, this crate computes
//! Sibson mutual information of any order `alpha` in `[1, inf]`, the exact
//! leakage of `n` conditionally i.i.d. observations (aggregated over type
//! classes), and the exponential rate at which that leakage approaches its
//! ceiling `H_{1/alpha}(X)`. The rate is compared against the smallest
//! Chernoff information between two channel rows.
//!
//! All logarithms are base 2.
//!
//! ```
//! use sibson_leakage::{composed_sibson_mi, Channel, Distribution, LeakageOrder, Scenario};
//!
//! let scenario = Scenario::new(
//!     Distribution::uniform(2).unwrap(),
//!     Channel::binary_symmetric(0.25).unwrap(),
//! )
//! .unwrap();
//! let one = composed_sibson_mi(&scenario, LeakageOrder::Infinity, 1).unwrap();
//! assert!((one - 1.5_f64.log2()).abs() < 1e-12);
//! ```

pub mod cli;
pub mod composition;
pub mod error;
pub mod exponent;
pub mod logspace;
pub mod measures;
pub mod prob;
mod simplex;

pub use composition::{
    composed_sibson_mi, d_n_star, enumerate_types, log_type_class_prob, rank_rows_by_divergence,
    Composer, DnStarResult, TypeClass,
};
pub use error::{Error, Result};
pub use exponent::{
    fit_exponent, gap_series, lemma1_infimum, min_pairwise_chernoff, verify_lemma1, ExponentFit,
    GapPoint, Lemma1Report, PairwiseChernoff,
};
pub use measures::{
    chernoff_information, kl_divergence, renyi_entropy, shannon_entropy, sibson_mi,
    tilted_distribution, ChernoffResult,
};
pub use prob::{quotient_channel, Channel, Distribution, LeakageOrder, Quotient, Scenario};
