//! Single-view, multi-view and semi-supervised multi-view linear SVMs,
//! together with the PAC-Bayes generalization bounds evaluated on them.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`]: dense matrices, Cholesky solves, log-determinants.
//! * [`qp`]: a deterministic box-constrained convex QP solver.
//! * [`trainers`]: SVM, MvSVM and SMvSVM duals and weight recovery.
//! * [`bounds`]: stochastic error, KL inversion and the eleven bounds.
//! * [`data`]: synthetic two-view data, file I/O, scaling and splits.
//! * [`experiment`]: cross-validated experiment protocol and reports.

pub mod bounds;
pub mod data;
pub mod experiment;
pub mod linalg;
pub mod qp;
pub mod trainers;

pub use bounds::{BoundConfig, BoundName, BoundReport};
pub use data::{LabeledSample, TwoViewDataset, TwoViewSample};
pub use experiment::{Algorithm, ExperimentConfig, ExperimentReport};
pub use linalg::{Kernel, KernelMatrix, Matrix};
pub use qp::{QpProblem, QpSolution, SolverOptions};
pub use trainers::{LinearWeights, View};
