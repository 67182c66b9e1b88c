//! Discrete Bayesian networks: BIC hill-climbing structure search, smoothed
//! parameter estimation and exact inference.

mod dag;
mod inference;
mod net;
mod score;
mod search;

pub use dag::Dag;
pub use inference::Posterior;
pub use net::{fit_cpts, BayesNet, Cpt, ROW_TOLERANCE};
pub use score::{bic_score, family_log_likelihood, family_parameters, family_score, ScoreCache};
pub use search::{
    learn_structure, learn_structure_traced, Move, MoveKind, SearchTrace, StructureConfig,
};
