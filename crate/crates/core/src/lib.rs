//! Learning DAG structure from observational data by solving a penalized
//! least-squares problem and projecting the result onto the space of DAGs
//! through a curl-free (gradient) flow.
//!
//! A DAG is represented as `W o relu(grad p)` with `W` skew-symmetric and
//! `p` a node potential. See [`nocurl::nocurl_run`] for the learner.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod dag;
pub mod error;
pub mod flow;
pub mod lbfgs;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod nocurl;
pub mod objective;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use flow::{DagParams, EdgeFlow, Potential, TriangleFlow};
pub use matrix::DenseMatrix;
pub use nocurl::{nocurl_run, notears_baseline, LearnResult, Method, NoCurlConfig, Variant};
pub use objective::{Dataset, HKind};
