//! The module `A²` over `A = M_n(C)`, its two inner products, and the
//! group `U(θ)` of block matrices preserving the indefinite one.

use std::ops::Mul;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::matrix::{
    fun_calc, hermitian_defect, inverse, is_positive_invertible, op_norm, ComplexMatrix,
    Tolerances, C64,
};

/// Element `(x1, x2)` of `A²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairJson")]
pub struct PairVector {
    pub x1: ComplexMatrix,
    pub x2: ComplexMatrix,
}

#[derive(Deserialize)]
struct PairJson {
    x1: ComplexMatrix,
    x2: ComplexMatrix,
}

impl TryFrom<PairJson> for PairVector {
    type Error = Error;
    fn try_from(p: PairJson) -> Result<Self> {
        PairVector::new(p.x1, p.x2)
    }
}

impl PairVector {
    pub fn new(x1: ComplexMatrix, x2: ComplexMatrix) -> Result<Self> {
        x1.check_same_dim(&x2)?;
        Ok(PairVector { x1, x2 })
    }

    pub fn e1(n: usize) -> Self {
        PairVector {
            x1: ComplexMatrix::identity(n),
            x2: ComplexMatrix::zeros(n),
        }
    }

    pub fn e2(n: usize) -> Self {
        PairVector {
            x1: ComplexMatrix::zeros(n),
            x2: ComplexMatrix::identity(n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        PairVector {
            x1: ComplexMatrix::zeros(n),
            x2: ComplexMatrix::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.x1.n()
    }

    /// Right module action `x·a = (x1 a, x2 a)`.
    pub fn mul_right(&self, a: &ComplexMatrix) -> PairVector {
        PairVector {
            x1: &self.x1 * a,
            x2: &self.x2 * a,
        }
    }

    pub fn sub(&self, other: &PairVector) -> PairVector {
        PairVector {
            x1: &self.x1 - &other.x1,
            x2: &self.x2 - &other.x2,
        }
    }

    pub fn add(&self, other: &PairVector) -> PairVector {
        PairVector {
            x1: &self.x1 + &other.x1,
            x2: &self.x2 + &other.x2,
        }
    }

    /// Module norm `‖⟨x,x⟩‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        op_norm(&(self.x1.adjoint() * &self.x1 + self.x2.adjoint() * &self.x2)).sqrt()
    }

    /// Stacks the pair into a `2n × n` column.
    pub(crate) fn to_column(&self) -> DMatrix<C64> {
        let n = self.n();
        let mut out = DMatrix::zeros(2 * n, n);
        out.view_mut((0, 0), (n, n)).copy_from(self.x1.as_dense());
        out.view_mut((n, 0), (n, n)).copy_from(self.x2.as_dense());
        out
    }

    pub(crate) fn from_column(c: &DMatrix<C64>) -> Self {
        let n = c.ncols();
        PairVector {
            x1: ComplexMatrix::from_dense(c.view((0, 0), (n, n)).into_owned()),
            x2: ComplexMatrix::from_dense(c.view((n, 0), (n, n)).into_owned()),
        }
    }
}

/// Element of `M_2(A)`, stored by blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockJson")]
pub struct BlockMatrix {
    pub g11: ComplexMatrix,
    pub g12: ComplexMatrix,
    pub g21: ComplexMatrix,
    pub g22: ComplexMatrix,
}

#[derive(Deserialize)]
struct BlockJson {
    g11: ComplexMatrix,
    g12: ComplexMatrix,
    g21: ComplexMatrix,
    g22: ComplexMatrix,
}

impl TryFrom<BlockJson> for BlockMatrix {
    type Error = Error;
    fn try_from(b: BlockJson) -> Result<Self> {
        BlockMatrix::new(b.g11, b.g12, b.g21, b.g22)
    }
}

impl BlockMatrix {
    pub fn new(
        g11: ComplexMatrix,
        g12: ComplexMatrix,
        g21: ComplexMatrix,
        g22: ComplexMatrix,
    ) -> Result<Self> {
        g11.check_same_dim(&g12)?;
        g11.check_same_dim(&g21)?;
        g11.check_same_dim(&g22)?;
        Ok(BlockMatrix { g11, g12, g21, g22 })
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(ComplexMatrix::identity(n), ComplexMatrix::identity(n))
    }

    /// The signature matrix `ρ = diag(1, −1)`.
    pub fn rho(n: usize) -> Self {
        Self::diag(ComplexMatrix::identity(n), -ComplexMatrix::identity(n))
    }

    pub fn diag(d1: ComplexMatrix, d2: ComplexMatrix) -> Self {
        let n = d1.n();
        BlockMatrix {
            g11: d1,
            g12: ComplexMatrix::zeros(n),
            g21: ComplexMatrix::zeros(n),
            g22: d2,
        }
    }

    /// `[[0, a*], [a, 0]]`, the generator of the geodesic one-parameter group.
    pub fn codiagonal(a: &ComplexMatrix) -> Self {
        let n = a.n();
        BlockMatrix {
            g11: ComplexMatrix::zeros(n),
            g12: a.adjoint(),
            g21: a.clone(),
            g22: ComplexMatrix::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.g11.n()
    }

    pub fn adjoint(&self) -> Self {
        BlockMatrix {
            g11: self.g11.adjoint(),
            g12: self.g21.adjoint(),
            g21: self.g12.adjoint(),
            g22: self.g22.adjoint(),
        }
    }

    pub fn apply(&self, x: &PairVector) -> PairVector {
        PairVector {
            x1: &self.g11 * &x.x1 + &self.g12 * &x.x2,
            x2: &self.g21 * &x.x1 + &self.g22 * &x.x2,
        }
    }

    pub fn sub(&self, o: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            g11: &self.g11 - &o.g11,
            g12: &self.g12 - &o.g12,
            g21: &self.g21 - &o.g21,
            g22: &self.g22 - &o.g22,
        }
    }

    pub fn add(&self, o: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            g11: &self.g11 + &o.g11,
            g12: &self.g12 + &o.g12,
            g21: &self.g21 + &o.g21,
            g22: &self.g22 + &o.g22,
        }
    }

    pub fn scale(&self, s: f64) -> BlockMatrix {
        BlockMatrix {
            g11: self.g11.scale(s),
            g12: self.g12.scale(s),
            g21: self.g21.scale(s),
            g22: self.g22.scale(s),
        }
    }

    /// The `2n × 2n` matrix.
    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(self.g11.as_dense());
        m.view_mut((0, n), (n, n)).copy_from(self.g12.as_dense());
        m.view_mut((n, 0), (n, n)).copy_from(self.g21.as_dense());
        m.view_mut((n, n), (n, n)).copy_from(self.g22.as_dense());
        ComplexMatrix::from_dense(m)
    }

    /// Splits a `2n × 2n` matrix into blocks.
    pub fn from_dense(m: &ComplexMatrix) -> Result<Self> {
        let two_n = m.n();
        if !two_n.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: two_n + 1,
                found: two_n,
            });
        }
        let n = two_n / 2;
        let d = m.as_dense();
        let blk = |r, c| ComplexMatrix::from_dense(d.view((r, c), (n, n)).into_owned());
        Ok(BlockMatrix {
            g11: blk(0, 0),
            g12: blk(0, n),
            g21: blk(n, 0),
            g22: blk(n, n),
        })
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(&self.to_dense())
    }
}

impl Mul<&BlockMatrix> for &BlockMatrix {
    type Output = BlockMatrix;
    fn mul(self, r: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            g11: &self.g11 * &r.g11 + &self.g12 * &r.g21,
            g12: &self.g11 * &r.g12 + &self.g12 * &r.g22,
            g21: &self.g21 * &r.g11 + &self.g22 * &r.g21,
            g22: &self.g21 * &r.g12 + &self.g22 * &r.g22,
        }
    }
}

fn check_pair_dims(x: &PairVector, y: &PairVector) -> Result<()> {
    x.x1.check_same_dim(&y.x1)
}

/// Hilbertian product `⟨x,y⟩ = x1*y1 + x2*y2`.
pub fn inner(x: &PairVector, y: &PairVector) -> Result<ComplexMatrix> {
    check_pair_dims(x, y)?;
    Ok(x.x1.adjoint() * &y.x1 + x.x2.adjoint() * &y.x2)
}

/// Indefinite product `θ(x,y) = x1*y1 − x2*y2 = ⟨x, ρy⟩`.
pub fn theta(x: &PairVector, y: &PairVector) -> Result<ComplexMatrix> {
    check_pair_dims(x, y)?;
    Ok(x.x1.adjoint() * &y.x1 - x.x2.adjoint() * &y.x2)
}

/// `⟨x,x⟩` positive invertible.
pub fn is_regular(x: &PairVector, tol: &Tolerances) -> bool {
    is_positive_invertible(&(x.x1.adjoint() * &x.x1 + x.x2.adjoint() * &x.x2), tol)
}

/// `‖g*ρg − ρ‖`.
pub fn theta_unitary_residual(g: &BlockMatrix) -> f64 {
    let rho = BlockMatrix::rho(g.n());
    (&(&g.adjoint() * &rho) * g).sub(&rho).op_norm()
}

pub fn is_theta_unitary(g: &BlockMatrix, tol: &Tolerances) -> bool {
    theta_unitary_residual(g) <= tol.eps_check && inverse(&g.to_dense(), tol).is_ok()
}

pub(crate) fn require_theta_unitary(g: &BlockMatrix, tol: &Tolerances) -> Result<()> {
    let residual = theta_unitary_residual(g);
    if residual > tol.eps_check {
        return Err(Error::NotThetaUnitary { residual });
    }
    Ok(())
}

/// `g⁻¹ = ρ g* ρ` for `g ∈ U(θ)`.
pub fn theta_unitary_inverse(g: &BlockMatrix, tol: &Tolerances) -> Result<BlockMatrix> {
    require_theta_unitary(g, tol)?;
    Ok(BlockMatrix {
        g11: g.g11.adjoint(),
        g12: -g.g21.adjoint(),
        g21: -g.g12.adjoint(),
        g22: g.g22.adjoint(),
    })
}

/// Parameters `(g, x)` of the Borel subgroup: `g` invertible, `x` anti-Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelParams {
    pub g: ComplexMatrix,
    pub x: ComplexMatrix,
}

impl BorelParams {
    pub fn new(g: ComplexMatrix, x: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        g.check_same_dim(&x)?;
        inverse(&g, tol).map_err(|_| Error::SingularG)?;
        let residual = op_norm(&(&x + x.adjoint()));
        if residual > tol.eps_check {
            return Err(Error::NotAntiHermitian { residual });
        }
        Ok(BorelParams { g, x })
    }
}

/// `[[ (g+ĝ)/2 − ĝx, (g−ĝ)/2 − ĝx ], [ (g−ĝ)/2 + ĝx, (g+ĝ)/2 + ĝx ]]`
/// with `ĝ = (g*)⁻¹`.
pub fn borel_element(p: &BorelParams, tol: &Tolerances) -> Result<BlockMatrix> {
    let ghat = inverse(&p.g.adjoint(), tol).map_err(|_| Error::SingularG)?;
    let plus = (&p.g + &ghat).scale(0.5);
    let minus = (&p.g - &ghat).scale(0.5);
    let gx = &ghat * &p.x;
    Ok(BlockMatrix {
        g11: &plus - &gx,
        g12: &minus - &gx,
        g21: &minus + &gx,
        g22: &plus + &gx,
    })
}

/// Inverse of [`borel_element`]: the four blocks sum to `2g`, and `x` is
/// read off `g21 = (g−ĝ)/2 + ĝx`.
pub fn borel_factor(gt: &BlockMatrix, tol: &Tolerances) -> Result<BorelParams> {
    let sum = &(&gt.g11 + &gt.g12) + &(&gt.g21 + &gt.g22);
    let g = sum.scale(0.5);
    let ghat = inverse(&g.adjoint(), tol).map_err(|_| Error::NotBorel {
        residual: f64::INFINITY,
    })?;
    let x_raw = g.adjoint() * (&gt.g21 - (&g - &ghat).scale(0.5));
    // project onto anti-Hermitian matrices; the reconstruction test below
    // rejects anything this hides
    let x = (&x_raw - x_raw.adjoint()).scale(0.5);
    let params = BorelParams { g, x };
    let rebuilt = borel_element(&params, tol)?;
    let residual = rebuilt.sub(gt).op_norm();
    if residual > tol.eps_check {
        return Err(Error::NotBorel { residual });
    }
    Ok(params)
}

/// `(1 − z*z)^{-1/2}` for a disk point.
pub(crate) fn defect_inv_sqrt(z: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = z.n();
    let d = ComplexMatrix::identity(n) - z.adjoint() * z;
    fun_calc(&d, |t| 1.0 / t.sqrt(), tol)
}

/// `(1 − z*z)^{1/2}`.
pub(crate) fn defect_sqrt(z: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = z.n();
    let d = ComplexMatrix::identity(n) - z.adjoint() * z;
    fun_calc(&d, |t| t.max(0.0).sqrt(), tol)
}

/// The Borel element `g̃_z` with `g̃_z·0 = z`.
pub fn g_z(z: &DiskPoint, tol: &Tolerances) -> Result<BlockMatrix> {
    let z = z.matrix();
    let n = z.n();
    let one = ComplexMatrix::identity(n);
    let c = defect_inv_sqrt(z, tol)?;
    let inv_one_plus_zs = inverse(&(&one + z.adjoint()), tol)?;
    let zp1 = z + &one;
    Ok(BlockMatrix {
        g11: c.clone(),
        g12: &inv_one_plus_zs * z.adjoint() * &zp1 * &c,
        g21: z * &c,
        g22: &inv_one_plus_zs * &zp1 * &c,
    })
}

/// Closed form of `g̃_z⁻¹`:
/// `diag(c, c)·[[1+z, −z*(1+z)], [−(1+z*)z, 1+z*]]·diag((1+z)⁻¹, (1+z)⁻¹)`.
pub fn g_z_inverse(z: &DiskPoint, tol: &Tolerances) -> Result<BlockMatrix> {
    let z = z.matrix();
    let n = z.n();
    let one = ComplexMatrix::identity(n);
    let c = defect_inv_sqrt(z, tol)?;
    let zp1 = z + &one;
    let zsp1 = z.adjoint() + &one;
    let inv = inverse(&zp1, tol)?;
    Ok(BlockMatrix {
        g11: &c * &zp1 * &inv,
        g12: -(&c * z.adjoint() * &zp1 * &inv),
        g21: -(&c * &zsp1 * z * &inv),
        g22: &c * &zsp1 * &inv,
    })
}

/// Anti-Hermitian Borel parameter of `g̃_z`:
/// `x = ½ (1−z*z)^{-1/2} (z − z*) (1−z*z)^{-1/2}`, returned exactly
/// anti-Hermitian in floating point.
pub fn g_z_borel_x(z: &DiskPoint, tol: &Tolerances) -> Result<ComplexMatrix> {
    let c = defect_inv_sqrt(z.matrix(), tol)?;
    let y = (&c * (z.matrix() - z.matrix().adjoint()) * &c).scale(0.5);
    Ok((&y - y.adjoint()).scale(0.5))
}

/// `‖A + A*‖`, zero for anti-Hermitian input.
pub fn anti_hermitian_defect(a: &ComplexMatrix) -> f64 {
    hermitian_defect(&a.scale_c(C64::new(0.0, 1.0)))
}
