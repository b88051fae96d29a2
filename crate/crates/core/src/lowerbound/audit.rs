//! Zero-chain bookkeeping: a block's iterates can only reach one more
//! coordinate per query of that block's component.

use super::chain::HardChainInstance;
use crate::error::{Error, Result};
use crate::solvers::ChainStep;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainViolation {
    /// Index into the audited step list.
    pub step: usize,
    pub block: usize,
    /// Nonzero prefix length of the offending block.
    pub support: usize,
    /// Queries of that block's component so far.
    pub queries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub steps_checked: usize,
    pub first_violation: Option<ChainViolation>,
    /// Largest support reached in any block.
    pub max_support: usize,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Nonzero prefix length: index of the last nonzero entry plus one.
pub fn support_len(v: &[f64]) -> usize {
    v.iter().rposition(|&t| t != 0.0).map_or(0, |j| j + 1)
}

/// Check that no block's support exceeds its query count at any step.
///
/// The first step must be the origin.
pub fn zero_chain_audit(inst: &HardChainInstance, steps: &[ChainStep]) -> Result<AuditReport> {
    let (n, d) = (inst.n, inst.d);
    if let Some(first) = steps.first() {
        if first.point.x.len() != n * d || first.point.y.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected_x: n * d,
                expected_y: n * d,
                got_x: first.point.x.len(),
                got_y: first.point.y.len(),
            });
        }
        if first
            .point
            .x
            .iter()
            .chain(&first.point.y)
            .any(|&v| v != 0.0)
        {
            return Err(Error::invalid(
                "zero-chain audit needs a run started at the origin",
            ));
        }
    }
    let mut k = vec![0usize; n];
    let mut max_support = 0;
    for (t, step) in steps.iter().enumerate() {
        for &i in &step.queries {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            k[i] += 1;
        }
        for block in 0..n {
            let r = block * d..(block + 1) * d;
            let support = support_len(&step.point.x[r.clone()]).max(support_len(&step.point.y[r]));
            max_support = max_support.max(support);
            if support > k[block] {
                return Ok(AuditReport {
                    steps_checked: t + 1,
                    first_violation: Some(ChainViolation {
                        step: t,
                        block,
                        support,
                        queries: k[block],
                    }),
                    max_support,
                });
            }
        }
    }
    Ok(AuditReport {
        steps_checked: steps.len(),
        first_violation: None,
        max_support,
    })
}
