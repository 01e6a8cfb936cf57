//! Closed-form performance expressions for selective-combining DF relaying.

mod branch;
mod exppoly;
mod mixture;

pub use branch::{branch_cdf, branch_pdf, outage_at, outage_probability, BranchDistribution};
pub use mixture::{
    avg_capacity, mgf, sc_pdf_mixture, sc_pdf_mixture_for_branch, sc_pdf_mixture_for_config, sep_from_mgf,
    sep_mpsk, ExpPolyMixture, ExpPolyTerm, MixtureOrigin, DEFAULT_TERM_CAP, DENSITY_TOLERANCE,
};
