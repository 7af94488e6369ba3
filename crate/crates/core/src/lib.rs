pub mod approx;
pub mod error;
pub mod linprog;
pub mod mdp;
pub mod oracle;
pub mod reductions;
pub mod robust;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Instance = mdp::MdpInstance<f64>;
pub type Indexed = mdp::IndexedMdp<f64>;
pub type Report = robust::RobustReport<f64>;
