//! Goodness-of-fit machinery and the seeded verification campaigns.

mod campaigns;
mod report;
mod stats;

pub use campaigns::*;
pub use report::{parse_samples_csv, Artifact, CampaignOutcome, Check, Direction, VerificationReport};
pub use stats::{empirical_char_fn, kolmogorov_survival, ks_one_sample, ks_two_sample, Ecdf, KsResult};
