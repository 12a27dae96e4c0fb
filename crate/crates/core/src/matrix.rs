//! Dense complex matrices and the spectral kernel.
//!
//! Every matrix function in the crate (square roots, `tanh`, `log`, the
//! modulus `|z|` and the polar factor) is computed from one primitive,
//! [`herm_eig`]: the eigendecomposition of a Hermitian matrix. Singular
//! values of a general `z` come from `herm_eig(z*z)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Numerical slack used throughout.
///
/// `eps_rank` is the singular-value cutoff below which a direction counts
/// as kernel. `eps_check` bounds the residual of every verified identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_rank: f64,
    pub eps_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_rank: 1e-10,
            eps_check: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(eps_rank: f64, eps_check: f64) -> Result<Self> {
        let ok = |e: f64| e > 0.0 && e < 1.0;
        if !ok(eps_rank) || !ok(eps_check) {
            return Err(Error::InvalidTolerances(format!(
                "need 0 < eps_rank, eps_check < 1 (got {eps_rank}, {eps_check})"
            )));
        }
        Ok(Tolerances {
            eps_rank,
            eps_check,
        })
    }
}

/// A dense `n × n` complex matrix, `n ≥ 1`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        ComplexMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        ComplexMatrix(DMatrix::identity(n, n))
    }

    /// `1 × 1` matrix holding a real scalar.
    pub fn scalar(x: f64) -> Self {
        ComplexMatrix(DMatrix::from_element(1, 1, C64::new(x, 0.0)))
    }

    pub fn from_diag(d: &[C64]) -> Self {
        assert!(!d.is_empty(), "matrix dimension must be positive");
        let n = d.len();
        ComplexMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                d[i]
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let d: Vec<C64> = d.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if n == 0 {
            return Err(Error::Parse("matrix must have at least one row".into()));
        }
        if im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: im.len(),
            });
        }
        for row in re.iter().chain(im.iter()) {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parse("matrix entries must be finite".into()));
            }
        }
        Ok(ComplexMatrix(DMatrix::from_fn(n, n, |i, j| {
            C64::new(re[i][j], im[i][j])
        })))
    }

    /// Real matrix from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let zeros: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        Self::from_parts(rows, &zeros)
    }

    /// Wraps a square `nalgebra` matrix.
    pub fn from_dense(m: DMatrix<C64>) -> Self {
        assert!(m.is_square() && m.nrows() >= 1, "matrix must be square");
        ComplexMatrix(m)
    }

    pub fn as_dense(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dense(self) -> DMatrix<C64> {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix(self.0.map(|x| x * s))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        ComplexMatrix(self.0.map(|x| x * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()).map(|x| x * 0.5))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus off the diagonal.
    pub fn off_diagonal_max(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.0[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n()).map(|i| self.0[(i, i)]).collect()
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(())
    }

    /// Row-major `(re, im)` parts.
    pub fn to_parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.n();
        let re = (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)].re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)].im).collect())
            .collect();
        (re, im)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

/// On-disk form: `{"n": int, "re": [[..]], "im": [[..]]}`, row major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (re, im) = self.to_parts();
        MatrixJson { n: self.n(), re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.n != raw.re.len() {
            return Err(serde::de::Error::custom(format!(
                "declared n = {} but {} rows given",
                raw.n,
                raw.re.len()
            )));
        }
        ComplexMatrix::from_parts(&raw.re, &raw.im).map_err(serde::de::Error::custom)
    }
}

/// Eigendecomposition `A = V·diag(λ)·V*` of a Hermitian matrix,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V·diag(f(λ))·V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        self.map_complex(|x| C64::new(f(x), 0.0))
    }

    /// `V·diag(f(λ))·V*` for a complex-valued `f`. The result is normal but
    /// not Hermitian in general (e.g. `exp(iA)` is unitary).
    pub fn map_complex(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = self.eigenvectors.as_dense();
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }
}

/// Eigendecomposition of the Hermitian part, no precondition check.
pub(crate) fn eig_of_hermitian_part(a: &ComplexMatrix) -> HermitianEig {
    let h = a.hermitian_part().0;
    let n = h.nrows();
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    HermitianEig {
        eigenvalues,
        eigenvectors: ComplexMatrix(eigenvectors),
    }
}

/// `‖A − A*‖` in operator norm.
pub fn hermitian_defect(a: &ComplexMatrix) -> f64 {
    op_norm(&(a - a.adjoint()))
}

pub fn herm_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    let residual = hermitian_defect(a);
    if residual > tol.eps_check {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eig_of_hermitian_part(a))
}

/// Applies a real function to a Hermitian matrix through its spectrum.
///
/// Fails with `DomainError` when `f` is not finite at some eigenvalue.
pub fn fun_calc(
    a: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let eig = herm_eig(a, tol)?;
    fun_calc_eig(&eig, f)
}

pub(crate) fn fun_calc_eig(eig: &HermitianEig, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    for &lam in &eig.eigenvalues {
        if !f(lam).is_finite() {
            return Err(Error::DomainError { eigenvalue: lam });
        }
    }
    Ok(eig.map(f))
}

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// `[-eps_check, 0)` are rounding noise and are clamped to zero.
pub fn sqrt_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = herm_eig(a, tol)?;
    if eig.min() < -tol.eps_check {
        return Err(Error::DomainError {
            eigenvalue: eig.min(),
        });
    }
    Ok(eig.map(|x| x.max(0.0).sqrt()))
}

/// Polar decomposition `z = ω·|z|`.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub omega: ComplexMatrix,
    pub modulus: ComplexMatrix,
    pub rank: usize,
    /// Spectral data of `|z|`: eigenvalues are the singular values of `z`.
    pub modulus_eig: HermitianEig,
}

impl PolarDecomposition {
    /// `ω*ω`, the support projection of `|z|`.
    pub fn initial_projection(&self) -> ComplexMatrix {
        self.omega.adjoint() * &self.omega
    }

    /// `ω·f(|z|)`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        &self.omega * self.modulus_eig.map(f)
    }
}

/// Polar decomposition from `herm_eig(z*z)`. Singular values at or below
/// `eps_rank` are treated as kernel; `ω` vanishes there. Total: `z = 0`
/// gives `ω = 0`.
pub fn polar(z: &ComplexMatrix, tol: &Tolerances) -> PolarDecomposition {
    let gram = eig_of_hermitian_part(&(z.adjoint() * z));
    let sv: Vec<f64> = gram.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let modulus_eig = HermitianEig {
        eigenvalues: sv.clone(),
        eigenvectors: gram.eigenvectors.clone(),
    };
    let modulus = modulus_eig.reconstruct();
    let pinv = modulus_eig.map(|s| if s > tol.eps_rank { 1.0 / s } else { 0.0 });
    let omega = z * pinv;
    let rank = sv.iter().filter(|&&s| s > tol.eps_rank).count();
    PolarDecomposition {
        omega,
        modulus,
        rank,
        modulus_eig,
    }
}

/// Singular values of `z`, ascending.
pub fn singular_values(z: &ComplexMatrix) -> Vec<f64> {
    eig_of_hermitian_part(&(z.adjoint() * z))
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect()
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    *singular_values(a).last().expect("non-empty spectrum")
}

pub fn min_singular_value(a: &ComplexMatrix) -> f64 {
    singular_values(a)[0]
}

pub fn inverse(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let sigma_min = min_singular_value(a);
    if sigma_min <= tol.eps_rank {
        return Err(Error::Singular { sigma_min });
    }
    a.0.clone()
        .try_inverse()
        .map(ComplexMatrix)
        .ok_or(Error::Singular { sigma_min })
}

/// Hermitian within `eps_check` and smallest eigenvalue above `eps_rank`.
pub fn is_positive_invertible(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    match herm_eig(a, tol) {
        Ok(eig) => eig.min() > tol.eps_rank,
        Err(_) => false,
    }
}

/// Moore–Penrose pseudo-inverse of a general (possibly rectangular) dense
/// matrix, singular values at or below `eps_rank` dropped.
pub(crate) fn pseudo_inverse_dense(a: &DMatrix<C64>, eps_rank: f64) -> DMatrix<C64> {
    let gram = ComplexMatrix(a.adjoint() * a);
    let eig = eig_of_hermitian_part(&gram);
    let inv_sq = eig.map(|l| {
        let s = l.max(0.0).sqrt();
        if s > eps_rank {
            1.0 / l
        } else {
            0.0
        }
    });
    inv_sq.0 * a.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        op_norm(&(a - b)) <= eps
    }

    #[test]
    fn eig_of_identity_and_diagonal() {
        let e = herm_eig(&ComplexMatrix::identity(2), &tol()).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        assert!(close(&e.reconstruct(), &ComplexMatrix::identity(2), 1e-14));

        let e = herm_eig(&ComplexMatrix::from_real_diag(&[3.0, -1.0]), &tol()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_of_swap() {
        // characteristic polynomial λ² − 1
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = herm_eig(&a, &tol()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v = &e.eigenvectors;
        assert!(close(&(v.adjoint() * v), &ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            herm_eig(&a, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn functional_calculus_examples() {
        let t = tol();
        let exp0 = fun_calc(&ComplexMatrix::zeros(3), f64::exp, &t).unwrap();
        assert!(close(&exp0, &ComplexMatrix::identity(3), 1e-15));

        // tanh(ln 3) = (3 − 1/3)/(3 + 1/3) = 0.8
        let a = ComplexMatrix::from_real_diag(&[3f64.ln()]);
        let th = fun_calc(&a, f64::tanh, &t).unwrap();
        assert!((th.get(0, 0).re - 0.8).abs() < 1e-15);

        let swap = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sq = fun_calc(&swap, |x| x * x, &t).unwrap();
        assert!(close(&sq, &ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn log_outside_domain() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(
            fun_calc(&a, f64::ln, &tol()),
            Err(Error::DomainError { .. })
        ));
        let a = ComplexMatrix::from_real_diag(&[1.0, -2.0]);
        assert!(matches!(
            fun_calc(&a, f64::ln, &tol()),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn polar_examples() {
        let t = tol();
        let p = polar(&ComplexMatrix::scalar(0.5), &t);
        assert!((p.omega.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!((p.modulus.get(0, 0).re - 0.5).abs() < 1e-15);
        assert_eq!(p.rank, 1);

        let p = polar(&ComplexMatrix::zeros(2), &t);
        assert_eq!(p.rank, 0);
        assert!(close(&p.omega, &ComplexMatrix::zeros(2), 0.0));
        assert!(close(&p.modulus, &ComplexMatrix::zeros(2), 0.0));

        let p = polar(&ComplexMatrix::from_real_diag(&[0.5, 0.0]), &t);
        assert_eq!(p.rank, 1);
        assert!(close(&p.omega, &ComplexMatrix::from_real_diag(&[1.0, 0.0]), 1e-14));
        assert!(close(&p.modulus, &ComplexMatrix::from_real_diag(&[0.5, 0.0]), 1e-14));
    }

    #[test]
    fn norms() {
        assert!((op_norm(&ComplexMatrix::identity(3)) - 1.0).abs() < 1e-15);
        assert!((op_norm(&ComplexMatrix::from_real_diag(&[0.5, -0.8])) - 0.8).abs() < 1e-15);
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!((op_norm(&a) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_and_positivity() {
        let t = tol();
        let a = ComplexMatrix::from_real_diag(&[2.0, 4.0]);
        let inv = inverse(&a, &t).unwrap();
        assert!(close(&inv, &ComplexMatrix::from_real_diag(&[0.5, 0.25]), 1e-15));
        assert!(is_positive_invertible(&a, &t));

        let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(inverse(&nil, &t), Err(Error::Singular { .. })));
        assert!(!is_positive_invertible(&nil, &t));

        assert!(is_positive_invertible(
            &ComplexMatrix::from_real_diag(&[0.5, 0.5]),
            &t
        ));
    }

    #[test]
    fn tolerances_validated() {
        assert!(Tolerances::new(1e-10, 1e-8).is_ok());
        assert!(Tolerances::new(0.0, 1e-8).is_err());
        assert!(Tolerances::new(1e-10, 1.0).is_err());
    }

    #[test]
    fn json_shape() {
        let m = ComplexMatrix::from_diag(&[C64::new(0.5, -0.25), C64::new(0.0, 1.0)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"n":2,"re":[[0.5,0.0],[0.0,0.0]],"im":[[-0.25,0.0],[0.0,1.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);

        let bad = r#"{"n":3,"re":[[1.0]],"im":[[0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
        let ragged = r#"{"n":2,"re":[[1.0,0.0],[0.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(ragged).is_err());
    }
}
