//! Block algebras `M_{k₁} ⊕ … ⊕ M_{k_r}` with their normalized central trace,
//! and the cross-ratio identities in the commutative and tracial cases.
//!
//! Both identities carry the factor two: `log cr = 2|Log|`.

use serde::{Deserialize, Serialize};

use crate::bundle::coro_sides;
use crate::cross_ratio::cr;
use crate::disk::{log_at, require_distinct, DiskPoint};
use crate::error::{Error, Result};
use crate::matrix::{fun_calc, op_norm, polar, ComplexMatrix, Tolerances, C64};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockAlgebra {
    block_dims: Vec<usize>,
}

impl BlockAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::BlockPatternViolation { blocks: block_dims });
        }
        Ok(BlockAlgebra { block_dims })
    }

    /// All blocks `1×1`: the diagonal algebra.
    pub fn diagonal(n: usize) -> Self {
        BlockAlgebra {
            block_dims: vec![1; n],
        }
    }

    pub fn full(n: usize) -> Self {
        BlockAlgebra {
            block_dims: vec![n],
        }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn n(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// `(offset, size)` of each block.
    pub fn ranges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.block_dims.iter().scan(0, |off, &k| {
            let start = *off;
            *off += k;
            Some((start, k))
        })
    }

    fn block_of(&self) -> Vec<usize> {
        self.ranges()
            .enumerate()
            .flat_map(|(b, (_, k))| std::iter::repeat_n(b, k))
            .collect()
    }

    /// Largest entry outside the diagonal blocks.
    pub fn leakage(&self, x: &ComplexMatrix) -> Result<f64> {
        if x.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.n(),
            });
        }
        let owner = self.block_of();
        let mut worst = 0.0f64;
        for i in 0..x.n() {
            for j in 0..x.n() {
                if owner[i] != owner[j] {
                    worst = worst.max(x.get(i, j).norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn require_member(&self, x: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
        if self.leakage(x)? > tol.eps_check {
            return Err(Error::BlockPatternViolation {
                blocks: self.block_dims.clone(),
            });
        }
        Ok(())
    }
}

/// JSON form `{"blocks": [dims], "data": matrix}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockElement {
    pub blocks: Vec<usize>,
    pub data: ComplexMatrix,
}

impl BlockElement {
    pub fn into_parts(self, tol: &Tolerances) -> Result<(BlockAlgebra, ComplexMatrix)> {
        let alg = BlockAlgebra::new(self.blocks)?;
        alg.require_member(&self.data, tol)?;
        Ok((alg, self.data))
    }
}

/// Conditional expectation onto the center, `tr(1) = 1` on every block.
#[derive(Debug, Clone)]
pub struct CentralTrace {
    pub algebra: BlockAlgebra,
}

impl CentralTrace {
    pub fn new(algebra: BlockAlgebra) -> Self {
        CentralTrace { algebra }
    }

    pub fn apply(&self, x: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
        central_trace(&self.algebra, x, tol)
    }
}

pub fn central_trace(alg: &BlockAlgebra, x: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    alg.require_member(x, tol)?;
    let mut diag = Vec::with_capacity(alg.n());
    for (off, k) in alg.ranges() {
        let s: C64 = (off..off + k).map(|i| x.get(i, i)).sum();
        let avg = s / k as f64;
        diag.extend(std::iter::repeat_n(avg, k));
    }
    Ok(ComplexMatrix::from_diag(&diag))
}

/// Residual of `2|Log_{z0} z1| = log cr(z0, z1)` in the diagonal algebra.
pub fn verify_commutative(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<f64> {
    for z in [z0, z1] {
        let residual = z.matrix().off_diagonal_max();
        if residual > tol.eps_check {
            return Err(Error::NotDiagonal { residual });
        }
    }
    require_distinct(z0, z1, tol)?;
    let log = log_at(z0, z1, tol)?;
    let lhs = polar(&log, tol).modulus.scale(2.0);
    let rhs = fun_calc(&cr(z0, z1, tol)?.coefficient, f64::ln, tol)?;
    Ok(op_norm(&(lhs - rhs)))
}

/// Residual of `tr(mod_{z0} Log_{z0} z1) = tr(log cr(z0, z1)_{z0})`,
/// both sides central.
pub fn verify_tracial(
    alg: &BlockAlgebra,
    z0: &DiskPoint,
    z1: &DiskPoint,
    tol: &Tolerances,
) -> Result<f64> {
    alg.require_member(z0.matrix(), tol)?;
    alg.require_member(z1.matrix(), tol)?;
    let s = coro_sides(z0, z1, tol)?;
    let lhs = central_trace(alg, &s.modulus, tol)?;
    let rhs = central_trace(alg, &fun_calc(&s.cross_ratio, f64::ln, tol)?, tol)?;
    Ok(op_norm(&(lhs - rhs)))
}
