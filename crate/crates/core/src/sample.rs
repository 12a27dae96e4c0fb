//! Seeded random instances.
//!
//! Every instance draws from its own ChaCha8 stream: the key comes from
//! `seed_from_u64(seed)` and the stream number is the instance index, so
//! instances are independent of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::disk::DiskPoint;
use crate::error::Result;
use crate::matrix::{herm_eig, op_norm, ComplexMatrix, Tolerances, C64};
use crate::pair::{borel_element, BlockMatrix, BorelParams};
use crate::trace::BlockAlgebra;

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Entries i.i.d. `N(0, 1) + i N(0, 1)`.
pub fn gaussian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut d = vec![C64::new(0.0, 0.0); n * n];
    for v in &mut d {
        *v = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    ComplexMatrix::from_dense(nalgebra::DMatrix::from_row_slice(n, n, &d))
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian(rng, n);
    (&g + g.adjoint()).scale(0.5)
}

/// `exp(iH)` for a Gaussian Hermitian `H`.
pub fn unitary(rng: &mut impl Rng, n: usize, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = herm_eig(&hermitian(rng, n), tol)?;
    Ok(eig.map_complex(|l| C64::from_polar(1.0, l)))
}

/// Anti-Hermitian with operator norm uniform in `[0, max_norm)`.
pub fn anti_hermitian(rng: &mut impl Rng, n: usize, max_norm: f64) -> ComplexMatrix {
    let h = hermitian(rng, n);
    let target = max_norm * rng.random::<f64>();
    let norm = op_norm(&h);
    if norm == 0.0 {
        return ComplexMatrix::zeros(n);
    }
    h.scale_c(C64::new(0.0, target / norm))
}

/// `z` with operator norm uniform in `(0, norm_cap]`.
pub fn disk_point(rng: &mut impl Rng, n: usize, norm_cap: f64, tol: &Tolerances) -> Result<DiskPoint> {
    let g = gaussian(rng, n);
    let target = norm_cap * (1.0 - rng.random::<f64>());
    DiskPoint::new(g.scale(target / op_norm(&g)), tol)
}

/// `U diag(s) V` with singular values uniform in `[lo, hi]`.
pub fn with_singular_values(
    rng: &mut impl Rng,
    n: usize,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let u = unitary(rng, n, tol)?;
    let v = unitary(rng, n, tol)?;
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    Ok(u * ComplexMatrix::from_real_diag(&s) * v)
}

/// Disk point with every singular value in `[lo, hi]`; invertible for `lo > 0`.
pub fn invertible_disk_point(
    rng: &mut impl Rng,
    n: usize,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<DiskPoint> {
    DiskPoint::new(with_singular_values(rng, n, lo, hi, tol)?, tol)
}

/// Diagonal disk point with complex entries of modulus below `norm_cap`.
pub fn diagonal_disk_point(
    rng: &mut impl Rng,
    n: usize,
    norm_cap: f64,
    tol: &Tolerances,
) -> Result<DiskPoint> {
    let d: Vec<C64> = (0..n)
        .map(|_| C64::from_polar(norm_cap * rng.random::<f64>(), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    DiskPoint::new(ComplexMatrix::from_diag(&d), tol)
}

/// Gaussian element of the block algebra, unnormalized.
pub fn block_gaussian(rng: &mut impl Rng, alg: &BlockAlgebra) -> ComplexMatrix {
    let n = alg.n();
    let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
    for (off, k) in alg.ranges() {
        let g = gaussian(rng, k);
        m.view_mut((off, off), (k, k)).copy_from(g.as_dense());
    }
    ComplexMatrix::from_dense(m)
}

/// Block-diagonal disk point with operator norm uniform in `(0, norm_cap]`.
pub fn block_disk_point(
    rng: &mut impl Rng,
    alg: &BlockAlgebra,
    norm_cap: f64,
    tol: &Tolerances,
) -> Result<DiskPoint> {
    let g = block_gaussian(rng, alg);
    let target = norm_cap * (1.0 - rng.random::<f64>());
    DiskPoint::new(g.scale(target / op_norm(&g)), tol)
}

/// Borel parameters with `cond(g) ≤ 10` and `‖x‖ ≤ 1`.
pub fn borel_params(rng: &mut impl Rng, n: usize, tol: &Tolerances) -> Result<BorelParams> {
    let root10 = 10f64.sqrt();
    let g = with_singular_values(rng, n, 1.0 / root10, root10, tol)?;
    let x = anti_hermitian(rng, n, 1.0);
    BorelParams::new(g, x, tol)
}

/// `borel_element(p) · diag(u₁, u₂)`.
pub fn theta_unitary(rng: &mut impl Rng, n: usize, tol: &Tolerances) -> Result<BlockMatrix> {
    let b = borel_element(&borel_params(rng, n, tol)?, tol)?;
    let d = BlockMatrix::diag(unitary(rng, n, tol)?, unitary(rng, n, tol)?);
    Ok(&b * &d)
}
