//! Algebraic model container and exchange formats.

mod lp_format;
mod model;
mod mps;
mod varindex;

pub use lp_format::write_lp;
pub use model::{
    model_stats, ConId, Constraint, Model, ModelStats, Sense, VarId, VarKind, Variable,
    MAX_NAME_LEN,
};
pub use mps::{read_mps, write_mps};
pub use varindex::{Role, VarIndex};
