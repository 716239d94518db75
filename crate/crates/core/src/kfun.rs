//! The functional `K(A) = |[A,A*]|^2 / (|A|^4 - |tr A^2|^2)`, its first
//! variation along adjoint moves, and related scalar checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KReport {
    /// `None` when the point lies in Z.
    pub k_value: Option<f64>,
    /// `|[A,A*]|^2`.
    pub numerator: f64,
    /// `|A|^4 - |tr A^2|^2`.
    pub denominator: f64,
    /// `numerator / |A|^4`; coincides with K on nilpotent matrices.
    pub k0: f64,
    pub norm: f64,
    pub in_z: bool,
    pub in_w: bool,
}

impl KReport {
    pub fn k(&self) -> Result<f64> {
        self.k_value.ok_or(Error::InZ { ratio: self.z_ratio() })
    }

    /// `denominator / |A|^4`, in `[0, 1]`.
    pub fn z_ratio(&self) -> f64 {
        self.denominator / self.norm.powi(4)
    }
}

/// Numerator, denominator and `|A|^2`, with the denominator computed as
/// `|A|^2 |A* - proj_A A*|^2` to avoid cancellation near Z.
pub(crate) fn k_parts(a: &ComplexMatrix) -> (f64, f64, f64, ComplexMatrix) {
    let astar = a.star();
    let comm = a.bracket(&astar);
    let num = comm.norm_sqr();
    let n2 = a.norm_sqr();
    let proj = astar.inner_with(a) / n2;
    let resid = &astar - &a.scale(proj);
    let den = n2 * resid.norm_sqr();
    (num, den, n2, comm)
}

pub fn k_functional(a: &ComplexMatrix) -> Result<KReport> {
    k_functional_with(a, &Tolerances::default())
}

pub fn k_functional_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<KReport> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n2 = a.norm_sqr();
    if n2 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let (num, den, n2, _) = k_parts(a);
    let n4 = n2 * n2;
    let in_z = den <= tol.z * n4;
    let in_w = num.sqrt() <= tol.w * n2;
    Ok(KReport {
        k_value: (!in_z).then(|| num / den),
        numerator: num,
        denominator: den,
        k0: num / n4,
        norm: n2.sqrt(),
        in_z,
        in_w,
    })
}

/// `G(A) = (|A|^4 - |tr A^2|^2) [A*,[A,[A*,A]]] - |[A,A*]|^2 |A|^2 [A*,A]`.
///
/// Moving along `A_t = exp(-tM) A exp(tM)` gives
/// `dK/dt = 4 Re<M, G> / denominator^2`.
pub fn variation_gradient(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(gradient_parts(a, tol)?.1)
}

/// `(K, G, denominator)`; errors when `a` lies in Z.
pub(crate) fn gradient_parts(a: &ComplexMatrix, tol: &Tolerances) -> Result<(f64, ComplexMatrix, f64)> {
    if a.norm_sqr() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let (num, den, n2, comm) = k_parts(a);
    if den <= tol.z * n2 * n2 {
        return Err(Error::InZ { ratio: den / (n2 * n2) });
    }
    let astar = a.star();
    // [A*,A] = -[A,A*]
    let h = -comm;
    let inner = a.bracket(&h);
    let first = astar.bracket(&inner).scale_real(den);
    let second = h.scale_real(num * n2);
    Ok((num / den, &first - &second, den))
}

/// Steepest-descent direction `M = -G(A)`.
pub fn k_gradient_direction(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(-variation_gradient(a, &Tolerances::default())?)
}

/// `|G(A)| / |A|^8`; G is homogeneous of degree 8, so this is invariant
/// under `A -> cA`.
pub fn critical_residual(a: &ComplexMatrix) -> Result<f64> {
    critical_residual_with(a, &Tolerances::default())
}

pub fn critical_residual_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let g = variation_gradient(a, tol)?;
    Ok(g.norm() / a.norm().powi(8))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NessReport {
    /// Real least-squares coefficient of `[[A*,A],A] = aA`.
    pub a: f64,
    /// `|[[A*,A],A] - aA|`, including any imaginary part of the projection.
    pub residual: f64,
    /// `residual / |A|^3`.
    pub relative_residual: f64,
    pub satisfied: bool,
}

/// Ness criterion for nilpotent critical points, with `H = [A*,A]`:
/// `[H, A] = aA` and `a < 0`. The adjoint equation `[H, A*] = -aA*` follows
/// automatically for real `a`.
pub fn ness_residual(a: &ComplexMatrix) -> Result<NessReport> {
    ness_residual_with(a, &Tolerances::default())
}

pub fn ness_residual_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<NessReport> {
    let n2 = a.norm_sqr();
    if n2 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let h = a.star().bracket(a);
    let q = h.bracket(a);
    let coef = q.inner_with(a).re / n2;
    let residual = (&q - &a.scale_real(coef)).norm();
    let relative_residual = residual / n2.powf(1.5);
    Ok(NessReport {
        a: coef,
        residual,
        relative_residual,
        satisfied: relative_residual <= tol.ness && coef < 0.0,
    })
}

fn herm(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// `|X1|^2|X2|^2|X3|^2 + 2Re(<X1,X2><X2,X3><X3,X1>) - sum_cyclic |Xi|^2 |<Xj,Xk>|^2`,
/// the determinant of the Gram matrix; non-negative with equality iff the
/// vectors are linearly dependent.
pub fn wedge_defect(x1: &[C64], x2: &[C64], x3: &[C64]) -> Result<f64> {
    if x1.len() != x2.len() {
        return Err(Error::DimensionMismatch { left: x1.len(), right: x2.len() });
    }
    if x1.len() != x3.len() {
        return Err(Error::DimensionMismatch { left: x1.len(), right: x3.len() });
    }
    let n1 = herm(x1, x1).re;
    let n2 = herm(x2, x2).re;
    let n3 = herm(x3, x3).re;
    let g12 = herm(x1, x2);
    let g23 = herm(x2, x3);
    let g31 = herm(x3, x1);
    let triple = (g12 * g23 * g31).re;
    Ok(n1 * n2 * n3 + 2.0 * triple
        - n1 * g23.norm_sqr()
        - n2 * g31.norm_sqr()
        - n3 * g12.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureConvention {
    /// `kappa = -K / (2n)`.
    PerDimension,
    /// `kappa = -K / 2`, metric `<A,B> = 2 tr(AB)`.
    TraceForm,
}

pub fn curvature(a: &ComplexMatrix, convention: CurvatureConvention) -> Result<f64> {
    let k = k_functional(a)?.k()?;
    Ok(match convention {
        CurvatureConvention::PerDimension => -k / (2.0 * a.dim() as f64),
        CurvatureConvention::TraceForm => -k / 2.0,
    })
}
