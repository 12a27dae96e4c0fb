//! Rank-one submodules of `A²`: the hyperboloid `K_θ`, its projection onto
//! the disk, θ-orthogonal complements, the projections `q` of `Q_ρ`, and
//! the Finsler norm on tangent vectors.

use serde::{Deserialize, Serialize};

use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::matrix::{
    eig_of_hermitian_part, fun_calc, inverse, is_positive_invertible, min_singular_value, op_norm,
    ComplexMatrix, Tolerances,
};
use crate::pair::{defect_inv_sqrt, inner, theta, BlockMatrix, PairVector};

/// A point of `K_θ`: `θ(x,x) = 1` and `x1` invertible.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct KPoint(PairVector);

impl KPoint {
    pub fn new(x: PairVector, tol: &Tolerances) -> Result<Self> {
        let n = x.n();
        if min_singular_value(&x.x1) <= tol.eps_rank {
            return Err(Error::SingularFirstComponent);
        }
        let residual = op_norm(&(theta(&x, &x)? - ComplexMatrix::identity(n)));
        if residual > tol.eps_check {
            return Err(Error::NotHyperbolic);
        }
        Ok(KPoint(x))
    }

    pub fn vector(&self) -> &PairVector {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    /// `x·u` for a unitary `u`; stays on `K_θ`.
    pub fn rotate(&self, u: &ComplexMatrix, tol: &Tolerances) -> Result<KPoint> {
        KPoint::new(self.0.mul_right(u), tol)
    }
}

/// Hyperbolic rank-one submodule, stored by a θ-normalized generator.
/// The generator is defined up to right multiplication by a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    generator: KPoint,
}

impl Line {
    /// `ℓ_z = [(1, z)]` with generator `lift(z)`.
    pub fn from_point(z: &DiskPoint, tol: &Tolerances) -> Result<Self> {
        Ok(Line {
            generator: lift(z, tol)?,
        })
    }

    pub fn from_kpoint(x: KPoint) -> Self {
        Line { generator: x }
    }

    /// The line spanned by a hyperbolic vector; the generator is rescaled
    /// to `x·θ(x,x)^{-1/2}`.
    pub fn from_generator(x: &PairVector, tol: &Tolerances) -> Result<Self> {
        if !is_hyperbolic(x, tol) {
            return Err(Error::NotHyperbolic);
        }
        let s = fun_calc(&theta(x, x)?, |t| 1.0 / t.sqrt(), tol)?;
        Ok(Line {
            generator: KPoint::new(x.mul_right(&s), tol)?,
        })
    }

    pub fn generator(&self) -> &KPoint {
        &self.generator
    }

    pub fn n(&self) -> usize {
        self.generator.n()
    }

    /// The disk point `x2 x1⁻¹`, a complete invariant of the line.
    pub fn point(&self, tol: &Tolerances) -> Result<DiskPoint> {
        project(self.generator.vector(), tol)
    }

    pub fn same_as(&self, other: &Line, tol: &Tolerances) -> Result<bool> {
        if self.n() != other.n() {
            return Ok(false);
        }
        let a = self.point(tol)?;
        let b = other.point(tol)?;
        Ok(op_norm(&(a.matrix() - b.matrix())) <= tol.eps_check)
    }

    /// The unitary `u` with `other.generator = self.generator · u`.
    pub fn fiber_unitary(&self, other: &KPoint, tol: &Tolerances) -> Result<ComplexMatrix> {
        let x = self.generator.vector();
        Ok(inverse(&x.x1, tol)? * &other.vector().x1)
    }
}

/// JSON form `{"z": matrix, "generator": pair?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineJson {
    pub z: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<PairVector>,
}

impl LineJson {
    pub fn into_line(self, tol: &Tolerances) -> Result<Line> {
        let z = DiskPoint::new(self.z, tol)?;
        match self.generator {
            None => Line::from_point(&z, tol),
            Some(x) => {
                let line = Line::from_kpoint(KPoint::new(x, tol)?);
                let p = line.point(tol)?;
                if op_norm(&(p.matrix() - z.matrix())) > tol.eps_check {
                    return Err(Error::Parse("generator does not span the given point".into()));
                }
                Ok(line)
            }
        }
    }
}

impl Serialize for Line {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tol = Tolerances::default();
        let z = self.point(&tol).map_err(serde::ser::Error::custom)?;
        LineJson {
            z: z.into_matrix(),
            generator: Some(self.generator.vector().clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Line {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        LineJson::deserialize(d)?
            .into_line(&Tolerances::default())
            .map_err(serde::de::Error::custom)
    }
}

/// Tangent vector at a line, represented in its θ-orthogonal complement.
#[derive(Debug, Clone)]
pub struct TangentVec {
    pub at: Line,
    pub v: PairVector,
}

impl TangentVec {
    pub fn new(at: Line, v: PairVector, tol: &Tolerances) -> Result<Self> {
        let residual = op_norm(&theta(at.generator.vector(), &v)?);
        if residual > tol.eps_check {
            return Err(Error::NotTangent { residual });
        }
        Ok(TangentVec { at, v })
    }
}

/// A projection of `Q_ρ`: idempotent, θ-selfadjoint, with `ρ(2p − 1)`
/// positive invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct QProjection {
    pub p: BlockMatrix,
}

/// Residuals of the three `Q_ρ` conditions.
#[derive(Debug, Clone, Copy)]
pub struct QResiduals {
    pub idempotency: f64,
    pub theta_selfadjoint: f64,
    pub rho_reflection_min_eig: f64,
}

impl QProjection {
    pub fn new(p: BlockMatrix, tol: &Tolerances) -> Result<Self> {
        let r = Self::residuals(&p);
        if r.idempotency > tol.eps_check
            || r.theta_selfadjoint > tol.eps_check
            || r.rho_reflection_min_eig <= tol.eps_rank
        {
            return Err(Error::NotHyperbolic);
        }
        Ok(QProjection { p })
    }

    pub fn residuals(p: &BlockMatrix) -> QResiduals {
        let n = p.n();
        let rho = BlockMatrix::rho(n);
        let idempotency = (p * p).sub(p).op_norm();
        let theta_adj = &(&rho * &p.adjoint()) * &rho;
        let theta_selfadjoint = theta_adj.sub(p).op_norm();
        let eps = p.scale(2.0).sub(&BlockMatrix::identity(n));
        let re = (&rho * &eps).to_dense();
        let herm_defect = op_norm(&(&re - re.adjoint()));
        let min_eig = eig_of_hermitian_part(&re).min() - herm_defect;
        QResiduals {
            idempotency,
            theta_selfadjoint,
            rho_reflection_min_eig: min_eig,
        }
    }
}

/// Global section `z ↦ ((1−z*z)^{-1/2}, z(1−z*z)^{-1/2})` of `K_θ → D`.
pub fn lift(z: &DiskPoint, tol: &Tolerances) -> Result<KPoint> {
    let c = defect_inv_sqrt(z.matrix(), tol)?;
    KPoint::new(
        PairVector {
            x2: z.matrix() * &c,
            x1: c,
        },
        tol,
    )
}

/// `x ↦ x2 x1⁻¹`.
pub fn project(x: &PairVector, tol: &Tolerances) -> Result<DiskPoint> {
    if min_singular_value(&x.x1) <= tol.eps_rank {
        return Err(Error::SingularFirstComponent);
    }
    let inv = inverse(&x.x1, tol).map_err(|_| Error::SingularFirstComponent)?;
    DiskPoint::new(&x.x2 * inv, tol)
}

/// Generator `y₀ = ((x1*)⁻¹x2*, 1)` of the θ-orthogonal complement of `[x]`.
pub fn ortho_theta_generator(x: &KPoint, tol: &Tolerances) -> Result<PairVector> {
    let v = x.vector();
    Ok(PairVector {
        x1: inverse(&v.x1.adjoint(), tol)? * v.x2.adjoint(),
        x2: ComplexMatrix::identity(v.n()),
    })
}

/// The θ-orthogonal projection onto `ℓ`: `p(y) = x·θ(x, y)`.
pub fn q_projection(l: &Line, tol: &Tolerances) -> Result<QProjection> {
    let x = l.generator.vector();
    let p = BlockMatrix {
        g11: &x.x1 * x.x1.adjoint(),
        g12: -(&x.x1 * x.x2.adjoint()),
        g21: &x.x2 * x.x1.adjoint(),
        g22: -(&x.x2 * x.x2.adjoint()),
    };
    QProjection::new(p, tol)
}

/// `|V|_ℓ = ‖θ(v,v)‖^{1/2}`.
pub fn finsler_norm(v: &TangentVec, tol: &Tolerances) -> Result<f64> {
    let residual = op_norm(&theta(v.at.generator.vector(), &v.v)?);
    if residual > tol.eps_check {
        return Err(Error::NotTangent { residual });
    }
    Ok(op_norm(&-theta(&v.v, &v.v)?).sqrt())
}

/// `θ(x,x)` positive invertible and `x1` invertible.
pub fn is_hyperbolic(x: &PairVector, tol: &Tolerances) -> bool {
    match theta(x, x) {
        Ok(t) => is_positive_invertible(&t, tol) && min_singular_value(&x.x1) > tol.eps_rank,
        Err(_) => false,
    }
}

/// Looks for `b` with `⟨xb, xb⟩` a projection, taking `b = (c⁺)^{1/2}` for
/// `c = ⟨x,x⟩`. Returns whether the projection property holds, and `b`.
pub fn rank_one_projection_criterion(
    x: &PairVector,
    tol: &Tolerances,
) -> Result<(bool, ComplexMatrix)> {
    let c = inner(x, x)?;
    let eig = eig_of_hermitian_part(&c);
    if eig.max() <= tol.eps_rank {
        return Err(Error::ZeroVector);
    }
    let b = eig.map(|l| if l > tol.eps_rank { 1.0 / l.sqrt() } else { 0.0 });
    let xb = x.mul_right(&b);
    let e = inner(&xb, &xb)?;
    let holds = op_norm(&(&e * &e - &e)) <= tol.eps_check && op_norm(&(&e - e.adjoint())) <= tol.eps_check;
    Ok((holds, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pt(x: f64) -> DiskPoint {
        DiskPoint::new(ComplexMatrix::scalar(x), &tol()).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        op_norm(&(a - b)) <= eps
    }

    fn sample_z() -> DiskPoint {
        DiskPoint::new(
            ComplexMatrix::from_parts(
                &[vec![0.2, -0.1], vec![0.3, 0.1]],
                &[vec![0.1, 0.2], vec![0.0, -0.3]],
            )
            .unwrap(),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn lift_examples() {
        let t = tol();
        let x = lift(&DiskPoint::origin(2), &t).unwrap();
        assert_eq!(x.vector(), &PairVector::e1(2));
        let x = lift(&pt(0.5), &t).unwrap();
        assert!((x.vector().x1.get(0, 0).re - 1.154_700_538_379_251_5).abs() < 1e-15);
        assert!((x.vector().x2.get(0, 0).re - 0.577_350_269_189_625_8).abs() < 1e-15);
        let x = lift(&sample_z(), &t).unwrap();
        let th = theta(x.vector(), x.vector()).unwrap();
        assert!(close(&th, &ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn project_examples() {
        let t = tol();
        assert!(close(project(&PairVector::e1(2), &t).unwrap().matrix(), &ComplexMatrix::zeros(2), 0.0));
        let x = lift(&pt(0.5), &t).unwrap();
        assert!((project(x.vector(), &t).unwrap().matrix().get(0, 0).re - 0.5).abs() < 1e-15);
        // θ(x,x) = 3 so x is off the hyperboloid, yet it projects fine
        let x = PairVector::new(ComplexMatrix::identity(2).scale(2.0), ComplexMatrix::identity(2)).unwrap();
        assert!(close(project(&x, &t).unwrap().matrix(), &ComplexMatrix::identity(2).scale(0.5), 1e-15));
        assert!(matches!(project(&PairVector::e2(2), &t), Err(Error::SingularFirstComponent)));
    }

    #[test]
    fn projection_is_invariant_under_right_multiplication() {
        let t = tol();
        let x = lift(&sample_z(), &t).unwrap();
        let a = ComplexMatrix::from_parts(&[vec![2.0, 1.0], vec![0.0, 1.0]], &[vec![0.0, 0.5], vec![1.0, 0.0]]).unwrap();
        let p1 = project(x.vector(), &t).unwrap();
        let p2 = project(&x.vector().mul_right(&a), &t).unwrap();
        assert!(close(p1.matrix(), p2.matrix(), 1e-14));
    }

    #[test]
    fn orthocomplement_examples() {
        let t = tol();
        let y = ortho_theta_generator(&lift(&DiskPoint::origin(2), &t).unwrap(), &t).unwrap();
        assert_eq!(y, PairVector::e2(2));
        assert_eq!(theta(&y, &y).unwrap(), -ComplexMatrix::identity(2));

        let y = ortho_theta_generator(&lift(&pt(0.5), &t).unwrap(), &t).unwrap();
        assert!((y.x1.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((theta(&y, &y).unwrap().get(0, 0).re + 0.75).abs() < 1e-15);

        let x = lift(&sample_z(), &t).unwrap();
        let y = ortho_theta_generator(&x, &t).unwrap();
        assert!(op_norm(&theta(x.vector(), &y).unwrap()) < 1e-14);
        let neg = -theta(&y, &y).unwrap();
        assert!(is_positive_invertible(&neg, &t));
    }

    #[test]
    fn q_projection_examples() {
        let t = tol();
        let q = q_projection(&Line::from_point(&DiskPoint::origin(2), &t).unwrap(), &t).unwrap();
        let want = BlockMatrix::diag(ComplexMatrix::identity(2), ComplexMatrix::zeros(2));
        assert_eq!(q.p, want);

        let q = q_projection(&Line::from_point(&pt(0.5), &t).unwrap(), &t).unwrap();
        let s = |x: f64| ComplexMatrix::scalar(x / 0.75);
        let want = BlockMatrix::new(s(1.0), s(-0.5), s(0.5), s(-0.25)).unwrap();
        assert!(q.p.sub(&want).op_norm() < 1e-15);

        let l = Line::from_point(&sample_z(), &t).unwrap();
        let q = q_projection(&l, &t).unwrap();
        let r = QProjection::residuals(&q.p);
        assert!(r.idempotency < 1e-13);
        assert!(r.theta_selfadjoint < 1e-13);
        assert!(r.rho_reflection_min_eig > 0.0);
        let gen = l.generator().vector();
        assert!(op_norm(&(q.p.apply(gen).sub(gen)).x1) < 1e-13);
    }

    #[test]
    fn finsler_examples() {
        let t = tol();
        let l0 = Line::from_point(&DiskPoint::origin(2), &t).unwrap();
        let v = TangentVec::new(l0.clone(), PairVector::zeros(2), &t).unwrap();
        assert_eq!(finsler_norm(&v, &t).unwrap(), 0.0);

        let a = ComplexMatrix::from_parts(&[vec![0.3, 0.1], vec![-0.2, 0.4]], &[vec![0.0, 0.2], vec![0.1, 0.0]]).unwrap();
        let v = TangentVec::new(l0.clone(), PairVector::e2(2).mul_right(&a), &t).unwrap();
        assert!((finsler_norm(&v, &t).unwrap() - op_norm(&a)).abs() < 1e-15);

        assert!(matches!(
            TangentVec::new(l0, PairVector::e1(2), &t),
            Err(Error::NotTangent { .. })
        ));
    }

    #[test]
    fn finsler_is_generator_independent() {
        let t = tol();
        let x = lift(&sample_z(), &t).unwrap();
        let u = ComplexMatrix::from_parts(&[vec![0.6, 0.0], vec![0.0, 0.0]], &[vec![0.0, 0.8], vec![0.8, 0.0]]).unwrap();
        let u = &u + &ComplexMatrix::from_diag(&[C64::new(0.0, 0.0), C64::new(0.6, 0.0)]);
        assert!(close(&(u.adjoint() * &u), &ComplexMatrix::identity(2), 1e-15));
        let y0 = ortho_theta_generator(&x, &t).unwrap();
        let a = ComplexMatrix::from_real_rows(&[vec![0.5, 0.1], vec![0.0, -0.3]]).unwrap();
        let v = y0.mul_right(&a);
        let n1 = finsler_norm(&TangentVec::new(Line::from_kpoint(x.clone()), v.clone(), &t).unwrap(), &t).unwrap();
        let xu = x.rotate(&u, &t).unwrap();
        let n2 = finsler_norm(&TangentVec::new(Line::from_kpoint(xu), v.mul_right(&u), &t).unwrap(), &t).unwrap();
        assert!((n1 - n2).abs() < 1e-10);
    }

    #[test]
    fn hyperbolic_membership() {
        let t = tol();
        assert!(is_hyperbolic(&PairVector::e1(2), &t));
        assert!(!is_hyperbolic(&PairVector::e2(2), &t));
        let z = sample_z().into_matrix();
        assert!(is_hyperbolic(&PairVector::new(ComplexMatrix::identity(2), z).unwrap(), &t));
        let u = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(!is_hyperbolic(&PairVector::new(ComplexMatrix::identity(2), u).unwrap(), &t));
    }

    #[test]
    fn rank_one_criterion_examples() {
        let t = tol();
        let (ok, b) = rank_one_projection_criterion(&PairVector::e1(2), &t).unwrap();
        assert!(ok);
        assert!(close(&b, &ComplexMatrix::identity(2), 1e-15));

        let x = PairVector::new(ComplexMatrix::scalar(2.0), ComplexMatrix::scalar(0.0)).unwrap();
        let (ok, b) = rank_one_projection_criterion(&x, &t).unwrap();
        assert!(ok);
        assert!((b.get(0, 0).re - 0.5).abs() < 1e-15);

        let p = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let x = PairVector::new(p.clone(), ComplexMatrix::zeros(2)).unwrap();
        let (ok, b) = rank_one_projection_criterion(&x, &t).unwrap();
        assert!(ok);
        let xb = x.mul_right(&b);
        assert!(close(&inner(&xb, &xb).unwrap(), &p, 1e-15));

        assert!(matches!(
            rank_one_projection_criterion(&PairVector::zeros(2), &t),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn line_equality_and_json() {
        let t = tol();
        let z = sample_z();
        let l = Line::from_point(&z, &t).unwrap();
        let g = l.generator().vector().mul_right(&ComplexMatrix::identity(2).scale(3.0));
        let l2 = Line::from_generator(&g, &t).unwrap();
        assert!(l.same_as(&l2, &t).unwrap());
        assert!(!l.same_as(&Line::from_point(&DiskPoint::origin(2), &t).unwrap(), &t).unwrap());

        let s = serde_json::to_string(&l).unwrap();
        let back: Line = serde_json::from_str(&s).unwrap();
        assert!(back.same_as(&l, &t).unwrap());

        let only_z = format!(r#"{{"z":{}}}"#, serde_json::to_string(z.matrix()).unwrap());
        let back: Line = serde_json::from_str(&only_z).unwrap();
        assert!(back.same_as(&l, &t).unwrap());
    }
}
