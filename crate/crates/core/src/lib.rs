pub mod baselines;
pub mod bayes;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod preprocess;
pub mod schema;
pub mod service;
pub mod suggest;
pub mod synthetic;
pub mod table;

pub use error::{Error, Result};
