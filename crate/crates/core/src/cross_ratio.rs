//! Cross ratios as endomorphisms of rank-one submodules.
//!
//! An [`Endo`] stores a line together with the matrix of the endomorphism
//! in the line's `K_θ` generator: `φ(x b) = x a b`. Rotating the generator
//! `x → xu` replaces `a` by `u*au`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::disk::{mobius, require_distinct, DiskPoint};
use crate::error::{Error, Result};
use crate::line::{KPoint, Line};
use crate::matrix::{
    fun_calc, inverse, min_singular_value, op_norm, polar, pseudo_inverse_dense, ComplexMatrix,
    Tolerances, C64,
};
use crate::pair::{g_z, g_z_inverse, require_theta_unitary, theta, BlockMatrix, PairVector};

#[derive(Debug, Clone)]
pub struct Endo {
    pub line: Line,
    pub coefficient: ComplexMatrix,
}

impl Endo {
    pub fn new(line: Line, coefficient: ComplexMatrix) -> Result<Self> {
        coefficient.check_same_dim(&line.generator().vector().x1)?;
        Ok(Endo { line, coefficient })
    }

    pub fn identity(line: Line) -> Self {
        let n = line.n();
        Endo {
            line,
            coefficient: ComplexMatrix::identity(n),
        }
    }

    /// Coefficient with respect to another `K_θ` generator of the same line.
    pub fn coefficient_in(&self, basis: &KPoint, tol: &Tolerances) -> Result<ComplexMatrix> {
        let u = self.line.fiber_unitary(basis, tol)?;
        Ok(u.adjoint() * &self.coefficient * &u)
    }

    /// The same endomorphism restated in the generator `basis`.
    pub fn rebase(&self, basis: KPoint, tol: &Tolerances) -> Result<Endo> {
        let coefficient = self.coefficient_in(&basis, tol)?;
        Ok(Endo {
            line: Line::from_kpoint(basis),
            coefficient,
        })
    }

    /// `y ↦ x a θ(x, y)` on `A²`, which restricts to the endomorphism on the
    /// line and vanishes on its θ-complement.
    pub fn to_block(&self) -> BlockMatrix {
        let x = self.line.generator().vector();
        let xa1 = &x.x1 * &self.coefficient;
        let xa2 = &x.x2 * &self.coefficient;
        BlockMatrix {
            g11: &xa1 * x.x1.adjoint(),
            g12: -(&xa1 * x.x2.adjoint()),
            g21: &xa2 * x.x1.adjoint(),
            g22: -(&xa2 * x.x2.adjoint()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EndoJson {
    line: Line,
    coefficient: ComplexMatrix,
    basis: String,
}

impl Serialize for Endo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EndoJson {
            line: self.line.clone(),
            coefficient: self.coefficient.clone(),
            basis: "K_theta".into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Endo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = EndoJson::deserialize(d)?;
        if j.basis != "K_theta" {
            return Err(serde::de::Error::custom(format!("unsupported basis {:?}", j.basis)));
        }
        Endo::new(j.line, j.coefficient).map_err(serde::de::Error::custom)
    }
}

/// `(1+|z|)(1−|z|)⁻¹` as a function of `|z|`.
fn cr0_coefficient(z: &DiskPoint, tol: &Tolerances) -> Result<ComplexMatrix> {
    let p = polar(z.matrix(), tol);
    Ok(p.modulus_eig.map(|t| (1.0 + t) / (1.0 - t)))
}

/// `cr(0, z)` on `ℓ_z`. The coefficient commutes with `(1−z*z)^{-1/2}`, so
/// it is the same in the bases `(1, z)` and `lift(z)`.
pub fn cr0(z: &DiskPoint, tol: &Tolerances) -> Result<Endo> {
    Endo::new(Line::from_point(z, tol)?, cr0_coefficient(z, tol)?)
}

/// `cr(z0, z1) = g̃ cr(0, g̃⁻¹z1) g̃⁻¹` with `g̃ = g̃_{z0}`, stated in `lift(z1)`.
pub fn cr(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<Endo> {
    require_distinct(z0, z1, tol)?;
    let w = mobius(&g_z_inverse(z0, tol)?, z1, tol)?;
    conjugated_cr(&g_z(z0, tol)?, &w, z1, tol)
}

/// `cr(z0, z1)` through an arbitrary θ-unitary `g` with `g·0 = z0`.
pub fn cr_via(g: &BlockMatrix, z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<Endo> {
    require_distinct(z0, z1, tol)?;
    require_theta_unitary(g, tol)?;
    let origin = mobius(g, &DiskPoint::origin(z0.n()), tol)?;
    if op_norm(&(origin.matrix() - z0.matrix())) > tol.eps_check {
        return Err(Error::BaseMismatch);
    }
    let ginv = crate::pair::theta_unitary_inverse(g, tol)?;
    let w = mobius(&ginv, z1, tol)?;
    conjugated_cr(g, &w, z1, tol)
}

fn conjugated_cr(g: &BlockMatrix, w: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> Result<Endo> {
    let a = cr0_coefficient(w, tol)?;
    let moved = KPoint::new(g.apply(crate::line::lift(w, tol)?.vector()), tol)?;
    Endo::new(Line::from_kpoint(moved), a)?.rebase(crate::line::lift(z1, tol)?, tol)
}

/// Operator norm of the coefficient in a `K_θ` generator.
pub fn endo_norm(e: &Endo) -> f64 {
    op_norm(&e.coefficient)
}

/// Four lines with generators `(1, a_i)`, `‖a_i‖ ≤ 1`; boundary lines
/// allowed. Distinctness is not enforced: degenerate tuples surface as
/// [`Error::NoSolution`] in [`cross_ratio_set`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourLines {
    pub a: [ComplexMatrix; 4],
}

impl FourLines {
    pub fn new(a: [ComplexMatrix; 4], tol: &Tolerances) -> Result<Self> {
        for m in &a[1..] {
            m.check_same_dim(&a[0])?;
        }
        for m in &a {
            let norm = op_norm(m);
            if !m.is_finite() || norm > 1.0 + tol.eps_check {
                return Err(Error::NotInDisk { norm });
            }
        }
        Ok(FourLines { a })
    }

    pub fn n(&self) -> usize {
        self.a[0].n()
    }

    fn generator(&self, i: usize) -> PairVector {
        PairVector {
            x1: ComplexMatrix::identity(self.n()),
            x2: self.a[i].clone(),
        }
    }
}

/// `(ℓ_{−ω}, ℓ_0, ℓ_z, ℓ_{+ω})` with `ω` the polar isometry of `z`.
pub fn geodesic_tuple(z: &DiskPoint, tol: &Tolerances) -> Result<FourLines> {
    let omega = polar(z.matrix(), tol).omega;
    FourLines::new(
        [
            -&omega,
            ComplexMatrix::zeros(z.n()),
            z.matrix().clone(),
            omega,
        ],
        tol,
    )
}

/// Solves `v = t·λ + p·μ` for `(λ, μ)`.
fn decompose(
    t: &PairVector,
    p: &PairVector,
    v: &PairVector,
    tol: &Tolerances,
    allow_nonunique: bool,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = t.n();
    let mut sys = DMatrix::<C64>::zeros(2 * n, 2 * n);
    sys.view_mut((0, 0), (2 * n, n)).copy_from(&t.to_column());
    sys.view_mut((0, n), (2 * n, n)).copy_from(&p.to_column());
    let rhs = v.to_column();
    let sigma_min = min_singular_value(&ComplexMatrix::from_dense(sys.clone()));
    let sol = if sigma_min > tol.eps_rank {
        sys.clone().lu().solve(&rhs).ok_or_else(|| Error::NoSolution {
            reason: "LU factorization failed".into(),
        })?
    } else if allow_nonunique {
        pseudo_inverse_dense(&sys, tol.eps_rank) * &rhs
    } else {
        return Err(Error::NoSolution {
            reason: format!("system is rank deficient (σ_min = {sigma_min:e})"),
        });
    };
    let residual = (&sys * &sol - &rhs).norm();
    if residual > tol.eps_check * (1.0 + v.norm()) {
        return Err(Error::NoSolution {
            reason: "system is inconsistent".into(),
        });
    }
    let parts = PairVector::from_column(&sol);
    Ok((parts.x1, parts.x2))
}

/// The endomorphism of `ℓ3` obtained by projecting onto `ℓ2` parallel to
/// `ℓ1` and back onto `ℓ3` parallel to `ℓ4`. `ℓ3` must lie in the disk.
pub fn cross_ratio_set(f: &FourLines, tol: &Tolerances, allow_nonunique: bool) -> Result<Endo> {
    let [x1, x2, x3, x4] = [0, 1, 2, 3].map(|i| f.generator(i));
    let (lambda, _) = decompose(&x2, &x1, &x3, tol, allow_nonunique)?;
    let (gamma, _) = decompose(&x3, &x4, &x2.mul_right(&lambda), tol, allow_nonunique)?;
    // (1, a3) = lift·s⁻¹ with s = θ(x3,x3)^{-1/2}
    let s = fun_calc(&theta(&x3, &x3)?, |t| 1.0 / t.sqrt(), tol)?;
    let coefficient = inverse(&s, tol)? * gamma * &s;
    Endo::new(Line::from_generator(&x3, tol)?, coefficient)
}
