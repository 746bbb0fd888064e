pub mod error;
pub mod linalg;
pub mod prox;
pub mod rates;
pub mod splitting;
pub mod admm;
pub mod metric;
pub mod worstcase;
pub mod bench;

pub use error::{Error, Result};
