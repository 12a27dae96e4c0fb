//! The operator disk `D = {z : ‖z‖ < 1}`, its Möbius action, geodesics,
//! exponential and logarithm maps, invariant distance and boundary limits.
//!
//! All functions of `|z|` and `|α|` go through the spectral kernel of
//! [`crate::matrix`]; the partial isometry `ω` is applied on the left.
//! The power series for the geodesic velocity is kept only as a test oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{
    eig_of_hermitian_part, fun_calc, inverse, min_singular_value, op_norm, polar, ComplexMatrix,
    HermitianEig, PolarDecomposition, Tolerances,
};
use crate::pair::{defect_inv_sqrt, defect_sqrt, g_z, g_z_inverse, require_theta_unitary, BlockMatrix};

/// A point of the open unit disk. The norm bound is checked with margin
/// `eps_check`: `‖z‖ ≤ 1 − eps_check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiskPoint(ComplexMatrix);

impl DiskPoint {
    pub fn new(z: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let norm = op_norm(&z);
        if !z.is_finite() || norm > 1.0 - tol.eps_check {
            return Err(Error::NotInDisk { norm });
        }
        Ok(DiskPoint(z))
    }

    pub fn origin(n: usize) -> Self {
        DiskPoint(ComplexMatrix::zeros(n))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.0)
    }
}

/// A point of the boundary `‖a‖ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BoundaryPoint(ComplexMatrix);

impl BoundaryPoint {
    pub fn new(a: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let norm = op_norm(&a);
        if (norm - 1.0).abs() > tol.eps_check {
            return Err(Error::NotBoundary { norm });
        }
        Ok(BoundaryPoint(a))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// `(g21 + g22 a)(g11 + g12 a)⁻¹` without any membership checks.
pub(crate) fn fractional_linear(
    g: &BlockMatrix,
    a: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let den = &g.g11 + &g.g12 * a;
    if min_singular_value(&den) <= tol.eps_rank {
        return Err(Error::SingularDenominator);
    }
    let inv = inverse(&den, tol).map_err(|_| Error::SingularDenominator)?;
    Ok((&g.g21 + &g.g22 * a) * inv)
}

/// Möbius action `g·z = (g21 + g22 z)(g11 + g12 z)⁻¹` of `U(θ)` on `D`.
pub fn mobius(g: &BlockMatrix, z: &DiskPoint, tol: &Tolerances) -> Result<DiskPoint> {
    require_theta_unitary(g, tol)?;
    z.matrix().check_same_dim(&g.g11)?;
    DiskPoint::new(fractional_linear(g, z.matrix(), tol)?, tol)
}

/// Velocity at `t = 0` of the geodesic from `0` to `z`:
/// `α = ω·½(log(1+|z|) − log(1−|z|))`.
pub fn alpha_of(z: &DiskPoint, tol: &Tolerances) -> ComplexMatrix {
    polar(z.matrix(), tol).apply(f64::atanh)
}

/// The geodesic `δ(t) = ω tanh(t|α|)` with `δ(0) = 0`, `δ(1) = z`.
#[derive(Debug, Clone)]
pub struct GeodesicThroughOrigin {
    pub alpha: ComplexMatrix,
    pub omega: ComplexMatrix,
    pub modulus_alpha: ComplexMatrix,
    modulus_eig: HermitianEig,
}

impl GeodesicThroughOrigin {
    fn from_polar(alpha: ComplexMatrix, p: PolarDecomposition) -> Self {
        GeodesicThroughOrigin {
            alpha,
            omega: p.omega,
            modulus_alpha: p.modulus,
            modulus_eig: p.modulus_eig,
        }
    }

    pub fn sample(&self, t: f64) -> ComplexMatrix {
        &self.omega * self.modulus_eig.map(|s| (t * s).tanh())
    }

    /// Smallest eigenvalue of `|α|`.
    pub fn lambda_min(&self) -> f64 {
        self.modulus_eig.min()
    }

    pub fn n(&self) -> usize {
        self.alpha.n()
    }
}

pub fn geodesic_origin(z: &DiskPoint, tol: &Tolerances) -> GeodesicThroughOrigin {
    let alpha = alpha_of(z, tol);
    let p = polar(&alpha, tol);
    GeodesicThroughOrigin::from_polar(alpha, p)
}

/// Geodesic through two points, `t ↦ g̃_{z0}·δ(t)` where `δ` is the
/// geodesic from `0` to `g̃_{z0}⁻¹·z1`.
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub translate: BlockMatrix,
    pub base: GeodesicThroughOrigin,
    tol: Tolerances,
}

impl Geodesic {
    /// Point at time `t`. The action is well defined on the whole open
    /// disk, so this only fails on numerical breakdown.
    pub fn sample(&self, t: f64) -> Result<ComplexMatrix> {
        fractional_linear(&self.translate, &self.base.sample(t), &self.tol)
    }
}

pub fn geodesic(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<Geodesic> {
    z0.matrix().check_same_dim(z1.matrix())?;
    let translate = g_z(z0, tol)?;
    let w = mobius(&g_z_inverse(z0, tol)?, z1, tol)?;
    Ok(Geodesic {
        translate,
        base: geodesic_origin(&w, tol),
        tol: *tol,
    })
}

/// `Exp₀(α) = ω tanh(|α|)`.
pub fn exp0(alpha: &ComplexMatrix, tol: &Tolerances) -> Result<DiskPoint> {
    DiskPoint::new(polar(alpha, tol).apply(f64::tanh), tol)
}

/// `Log₀(z) = ½ ω log((1+|z|)(1−|z|)⁻¹)`, the same matrix as [`alpha_of`].
pub fn log0(z: &DiskPoint, tol: &Tolerances) -> ComplexMatrix {
    alpha_of(z, tol)
}

/// Tangent vector at `z0` pointing to `z1`, expressed at the origin
/// after translating by `g̃_{z0}⁻¹`.
pub fn log_at(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<ComplexMatrix> {
    let w = mobius(&g_z_inverse(z0, tol)?, z1, tol)?;
    Ok(log0(&w, tol))
}

/// Inverse of [`log_at`].
pub fn exp_at(z0: &DiskPoint, v: &ComplexMatrix, tol: &Tolerances) -> Result<DiskPoint> {
    z0.matrix().check_same_dim(v)?;
    mobius(&g_z(z0, tol)?, &exp0(v, tol)?, tol)
}

/// `g̃_{z1}⁻¹·z2` through the closed form
/// `(1−z1*z1)^{-1/2}(1+z1*)(1+z1)⁻¹(z2−z1)(1−z1*z2)⁻¹(1−z1*z1)^{1/2}`.
pub fn translate_to_origin(z1: &DiskPoint, z2: &DiskPoint, tol: &Tolerances) -> Result<DiskPoint> {
    let (a, b) = (z1.matrix(), z2.matrix());
    a.check_same_dim(b)?;
    let one = ComplexMatrix::identity(a.n());
    let c_inv = defect_inv_sqrt(a, tol)?;
    let c = defect_sqrt(a, tol)?;
    let w = c_inv
        * (&one + a.adjoint())
        * inverse(&(&one + a), tol)?
        * (b - a)
        * inverse(&(&one - a.adjoint() * b), tol)?
        * c;
    DiskPoint::new(w, tol)
}

/// `d(0, z) = ½ log((1+‖z‖)/(1−‖z‖))`.
pub fn dist_from_origin(z: &DiskPoint) -> f64 {
    z.norm().atanh()
}

/// Invariant Finsler distance `d(z1, z2) = d(0, g̃_{z1}⁻¹·z2)`.
pub fn dist(z1: &DiskPoint, z2: &DiskPoint, tol: &Tolerances) -> Result<f64> {
    Ok(dist_from_origin(&translate_to_origin(z1, z2, tol)?))
}

pub(crate) fn require_distinct(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<()> {
    z0.matrix().check_same_dim(z1.matrix())?;
    if op_norm(&(z0.matrix() - z1.matrix())) <= tol.eps_check {
        return Err(Error::CoincidentPoints);
    }
    Ok(())
}

/// Limits of the geodesic through `z0`, `z1` at `t → −∞` and `t → +∞`:
/// `g̃_{z0}·(∓ω₀)` with `ω₀` the polar isometry of the velocity of the
/// untranslated geodesic.
pub fn limit_points(
    z0: &DiskPoint,
    z1: &DiskPoint,
    tol: &Tolerances,
) -> Result<(BoundaryPoint, BoundaryPoint)> {
    require_distinct(z0, z1, tol)?;
    let geo = geodesic(z0, z1, tol)?;
    let omega = &geo.base.omega;
    let minus = BoundaryPoint::new(-omega, tol)?;
    let plus = BoundaryPoint::new(omega.clone(), tol)?;
    Ok((
        boundary_action(&geo.translate, &minus, tol)?,
        boundary_action(&geo.translate, &plus, tol)?,
    ))
}

/// Action of `U(θ)` on the boundary `‖a‖ = 1`, same fractional formula.
pub fn boundary_action(
    g: &BlockMatrix,
    a: &BoundaryPoint,
    tol: &Tolerances,
) -> Result<BoundaryPoint> {
    require_theta_unitary(g, tol)?;
    a.matrix().check_same_dim(&g.g11)?;
    BoundaryPoint::new(fractional_linear(g, a.matrix(), tol)?, tol)
}

/// Embedding of `D` into the positive invertible elements of `M_2(A)`.
pub fn phi_d(a: &DiskPoint, tol: &Tolerances) -> Result<BlockMatrix> {
    let a = a.matrix();
    let one = ComplexMatrix::identity(a.n());
    let r = inverse(&(&one - a.adjoint() * a), tol)?;
    let two_r = r.scale(2.0);
    Ok(BlockMatrix {
        g11: &two_r - &one,
        g12: -(&two_r * a.adjoint()),
        g21: -(a * &two_r),
        g22: a * &two_r * a.adjoint() + &one,
    })
}

/// Factorization `1 − a*a = h q h` with `h` positive invertible and `q`
/// the support projection of the defect `1 − a*a`.
pub fn boundary_defect_factor(
    a: &BoundaryPoint,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let a = a.matrix();
    let one = ComplexMatrix::identity(a.n());
    let defect = &one - a.adjoint() * a;
    let eig = eig_of_hermitian_part(&defect);
    let q = eig.map(|l| if l > tol.eps_rank { 1.0 } else { 0.0 });
    let h = fun_calc(&(&defect + (&one - &q)), |t| t.max(0.0).sqrt(), tol)?;
    Ok((h, q))
}
