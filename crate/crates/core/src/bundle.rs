//! The coefficient bundle: `Γ`-valued inner products of tangent vectors,
//! the θ-modulus of `Log`, and transport of endomorphisms along geodesics
//! by conjugation with `e^{±M}`, `M = [[0, α*], [α, 0]]`.

use crate::cross_ratio::{cr, cr0, Endo};
use crate::disk::{alpha_of, dist, mobius, require_distinct, DiskPoint};
use crate::error::{Error, Result};
use crate::line::{finsler_norm, lift, q_projection, KPoint, Line, QProjection, TangentVec};
use crate::matrix::{fun_calc, op_norm, polar, sqrt_psd, ComplexMatrix, Tolerances};
use crate::pair::{g_z, g_z_inverse, theta, theta_unitary_inverse, BlockMatrix, PairVector};

/// Tangent vector to `Q_ρ` at `q`: θ-symmetric and codiagonal for `q`.
#[derive(Debug, Clone)]
pub struct QTangent {
    pub at: QProjection,
    pub x: BlockMatrix,
}

impl QTangent {
    pub fn new(at: QProjection, x: BlockMatrix, tol: &Tolerances) -> Result<Self> {
        let rho = BlockMatrix::rho(x.n());
        let sym = (&(&rho * &x.adjoint()) * &rho).sub(&x).op_norm();
        let q = &at.p;
        let codiag = (q * &x).add(&(&x * q)).sub(&x).op_norm();
        let residual = sym.max(codiag);
        if residual > tol.eps_check {
            return Err(Error::NotTangent { residual });
        }
        Ok(QTangent { at, x })
    }
}

/// `[M, q₀] = [[0, −α*], [α, 0]]`, the tangent vector at `q₀` whose
/// geodesic is `t ↦ e^{tM} q₀ e^{−tM}`.
pub fn origin_tangent(alpha: &ComplexMatrix) -> BlockMatrix {
    BlockMatrix {
        g11: ComplexMatrix::zeros(alpha.n()),
        g12: -alpha.adjoint(),
        g21: alpha.clone(),
        g22: ComplexMatrix::zeros(alpha.n()),
    }
}

/// `κ_x(X) = X x`, required θ-orthogonal to `x`.
pub fn kappa(x: &KPoint, big_x: &BlockMatrix) -> Result<PairVector> {
    let k = big_x.apply(x.vector());
    let residual = op_norm(&theta(x.vector(), &k)?);
    // scale-aware gate: X need not be small
    if residual > Tolerances::default().eps_check * (1.0 + big_x.op_norm()) {
        return Err(Error::NotTangent { residual });
    }
    Ok(k)
}

/// `⟨X, Y⟩_x = −θ(Xx, Yx)` as an endomorphism of `[x]`.
pub fn gamma_inner(big_x: &BlockMatrix, big_y: &BlockMatrix, x: &KPoint) -> Result<Endo> {
    let kx = kappa(x, big_x)?;
    let ky = kappa(x, big_y)?;
    Endo::new(Line::from_kpoint(x.clone()), -theta(&kx, &ky)?)
}

/// The θ-modulus of `Log₀(z)` at `ℓ₀`: `log((1+|z|)(1−|z|)⁻¹) = 2|α|`.
pub fn mod0_log(z: &DiskPoint, tol: &Tolerances) -> Result<Endo> {
    let p = polar(z.matrix(), tol);
    let coefficient = p.modulus_eig.map(|t| ((1.0 + t) / (1.0 - t)).ln());
    Endo::new(Line::from_point(&DiskPoint::origin(z.n()), tol)?, coefficient)
}

/// `e^{sM}` for `M = [[0, α*], [α, 0]]`.
fn exp_codiagonal(alpha: &ComplexMatrix, s: f64, tol: &Tolerances) -> Result<BlockMatrix> {
    let m = BlockMatrix::codiagonal(alpha).to_dense();
    BlockMatrix::from_dense(&fun_calc(&m, |t| (s * t).exp(), tol)?)
}

/// Reads the coefficient of `phi` at `e₁`: `phi(e₁) = e₁·c`.
fn coefficient_at_e1(phi: &BlockMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    if op_norm(&phi.g21) > tol.eps_check * (1.0 + phi.op_norm()) {
        return Err(Error::BaseMismatch);
    }
    Ok(phi.g11.clone())
}

/// `e^{−M} φ e^{M}`, an endomorphism of `ℓ₀`, since `e^{M} e₁ = lift(z)`.
pub fn transport_to_origin(z: &DiskPoint, e: &Endo, tol: &Tolerances) -> Result<Endo> {
    if e.line.n() != z.n() || !e.line.same_as(&Line::from_point(z, tol)?, tol)? {
        return Err(Error::BaseMismatch);
    }
    let alpha = alpha_of(z, tol);
    let phi0 = &(&exp_codiagonal(&alpha, -1.0, tol)? * &e.to_block()) * &exp_codiagonal(&alpha, 1.0, tol)?;
    Endo::new(
        Line::from_point(&DiskPoint::origin(z.n()), tol)?,
        coefficient_at_e1(&phi0, tol)?,
    )
}

/// `‖e^{mod₀(Log₀ z)} − cr(0, z)₀‖`.
pub fn verify_el_teo(z: &DiskPoint, tol: &Tolerances) -> Result<f64> {
    let m = mod0_log(z, tol)?;
    let lhs = fun_calc(&m.coefficient, f64::exp, tol)?;
    let rhs = transport_to_origin(z, &cr0(z, tol)?, tol)?;
    Ok(op_norm(&(lhs - rhs.coefficient)))
}

/// Both sides of the identity at `z0`, stated in the basis `lift(z0)`.
#[derive(Debug, Clone)]
pub struct CoroSides {
    /// `mod_{z0}(Log_{z0} z1)`, from the `Γ` inner product of the tangent
    /// vector `g̃ [M, q₀] g̃⁻¹` at `q_{z0}`.
    pub modulus: ComplexMatrix,
    /// `cr(z0, z1)` transported to `ℓ_{z0}`.
    pub cross_ratio: ComplexMatrix,
    /// `‖Log_{z0}(z1)‖_{z0}` from the Finsler norm.
    pub log_norm: f64,
}

pub fn coro_sides(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<CoroSides> {
    require_distinct(z0, z1, tol)?;
    let g = g_z(z0, tol)?;
    let ginv = g_z_inverse(z0, tol)?;
    let w = mobius(&ginv, z1, tol)?;
    let alpha = alpha_of(&w, tol);

    let base = lift(z0, tol)?;
    let tangent = &(&g * &origin_tangent(&alpha)) * &ginv;
    QTangent::new(q_projection(&Line::from_kpoint(base.clone()), tol)?, tangent.clone(), tol)?;
    let sq = gamma_inner(&tangent, &tangent, &base)?;
    let modulus = sqrt_psd(&sq.coefficient, tol)?.scale(2.0);

    let kx = kappa(&base, &tangent)?;
    let log_norm = finsler_norm(&TangentVec::new(Line::from_kpoint(base.clone()), kx, tol)?, tol)?;

    // e^{∓M} conjugated into the frame at z0
    let fwd = &(&g * &exp_codiagonal(&alpha, 1.0, tol)?) * &ginv;
    let back = &(&g * &exp_codiagonal(&alpha, -1.0, tol)?) * &ginv;
    let phi = &(&back * &cr(z0, z1, tol)?.to_block()) * &fwd;
    let in_frame = &(&theta_unitary_inverse(&g, tol)? * &phi) * &g;
    let cross_ratio = coefficient_at_e1(&in_frame, tol)?;

    Ok(CoroSides {
        modulus,
        cross_ratio,
        log_norm,
    })
}

/// Residual of `mod_{z0}(Log_{z0} z1) = log cr(z0, z1)_{z0}` plus that of
/// `2‖Log_{z0} z1‖_{z0} = ‖log cr(z0, z1)_{z0}‖`.
pub fn verify_coro(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<f64> {
    let s = coro_sides(z0, z1, tol)?;
    let identity = op_norm(&(fun_calc(&s.modulus, f64::exp, tol)? - &s.cross_ratio));
    let log_cr = fun_calc(&s.cross_ratio, f64::ln, tol)?;
    let norm = (2.0 * s.log_norm - op_norm(&log_cr)).abs();
    let norm_dist = (s.log_norm - dist(z0, z1, tol)?).abs();
    Ok(identity + norm + norm_dist)
}
