//! Adversarial instances with closed-form saddles, used as hard benchmarks
//! and as solver-correctness oracles.

mod audit;
mod chain;
mod separable;

pub use audit::{support_len, zero_chain_audit, AuditReport, ChainViolation};
pub use chain::{build_hard_chain, chain_constants, hard_chain_saddle, HardChainInstance};
pub use separable::{build_separable, separable_saddle, SeparableHardInstance};
