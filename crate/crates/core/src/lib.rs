//! Numerical laboratory for iterative Markovian fitting of finite-state
//! Schrödinger bridges.
//!
//! The crate builds reference Markov processes on dense trajectory tensors,
//! runs the alternating Markov/reciprocal projection iteration against a
//! ground-truth bridge computed by an independent oracle, and certifies the
//! inequalities behind the iteration's exponential convergence: mass floors,
//! projection-norm domination on constraint subspaces, per-step divergence
//! decrease, and the contraction bound itself.
//!
//! Batch workloads (random-trial certificates, experiment sweeps) run
//! data-parallel through [`exec`] when the `parallel` feature (default) is
//! enabled; results are independent of the thread count.

pub mod error;
pub mod exec;
pub mod imf;
pub mod linalg;
pub mod oracle;
pub mod process;
pub mod space;
pub mod subspace;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use imf::{
    markov_projection, reciprocal_projection, run_imf, ImfConfig, ImfOutcome, IterationTrace,
};
pub use oracle::{
    brute_force_opt, lift_static, solve_bridge, solve_static, OracleSolution, SinkhornConfig,
};
pub use process::{
    bridge_conditional, build_markov_joint, independent_coupling, init_p0, sample_instance,
    BridgeConditional, Coupling, GeneratorSpec, Instance, MarginalPair, MarkovSpec,
};
pub use space::StateSpaceSpec;
pub use subspace::{build_constraint_operator, ConstraintOperator, SubspaceId, SubspaceOps};
pub use tensor::{kl_divergence, JointDistribution, Marginal, SignedMeasure};
pub use verify::{compute_constants, CertificateReport, Check, RateConstants};
