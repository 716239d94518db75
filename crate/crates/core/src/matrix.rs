//! Dense complex matrices and the Hermitian structure `<X,Y> = tr(X Y*)`.
//!
//! Storage, SVD, Schur and the exponential come from nalgebra; this module
//! fixes the conventions (Frobenius norm, conjugate-linear second slot) that
//! the rest of the crate relies on.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { data: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: DMatrix::identity(n, n) }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { data: DMatrix::from_fn(n, n, f) }
    }

    /// Wraps a nalgebra matrix; rejects non-square or 1x1 input.
    pub fn from_dmatrix(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() < 2 {
            return Err(Error::BadShape { rows: data.nrows(), cols: data.ncols() });
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::BadShape {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let e: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&e)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[(i, j)] = v;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm, `sqrt(<X,X>)`.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { data: &self.data * c }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { data: &self.data * C64::new(c, 0.0) }
    }

    /// Conjugate transpose.
    pub fn star(&self) -> Self {
        Self { data: self.data.adjoint() }
    }

    /// `tr(self * other^*)`; dimensions must agree.
    pub fn inner_with(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data.iter().zip(other.data.iter()).map(|(x, y)| x * y.conj()).sum()
    }

    /// `self * other - other * self`; dimensions must agree.
    pub fn bracket(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self { data: &self.data * &other.data - &other.data * &self.data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self { data: &self.data * &other.data }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.data.clone().try_inverse().map(|data| Self { data })
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.data.clone().singular_values().iter().copied().collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Rejects matrices whose trace exceeds `tol.trace * ||A||_F`.
    pub fn check_trace_free(&self, tol: &Tolerances) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        let trace_abs = self.trace().norm();
        let bound = tol.trace * self.norm();
        if trace_abs > bound {
            return Err(Error::NotTraceFree { trace_abs, bound });
        }
        Ok(())
    }

    /// True when `A - (tr A / n) I` vanishes to rounding.
    pub fn is_scalar(&self) -> bool {
        let n = self.dim();
        let mean = self.trace() / n as f64;
        let dev = self.sub_scalar(mean).norm();
        dev <= 1e-14 * self.norm().max(f64::MIN_POSITIVE)
    }

    /// `self - c I`.
    pub fn sub_scalar(&self, c: C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim() {
            out.data[(i, i)] -= c;
        }
        out
    }

    /// Characteristic polynomial coefficients of `det(zI - A)`, leading 1 first.
    pub fn char_poly(&self) -> Vec<C64> {
        // Faddeev-LeVerrier; fine at desk scale.
        let n = self.dim();
        let mut coeffs = vec![ONE];
        let mut m = Self::zeros(n);
        let id = Self::identity(n);
        for k in 1..=n {
            let prev = *coeffs.last().unwrap();
            m = self.matmul(&m) + id.scale(prev);
            let ck = -self.matmul(&m).trace() / k as f64;
            coeffs.push(ck);
        }
        coeffs
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> Self {
        Self { data: self.data + rhs.data }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix { data: &self.data + &rhs.data }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> Self {
        Self { data: self.data - rhs.data }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix { data: &self.data - &rhs.data }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> Self {
        Self { data: -self.data }
    }
}

fn same_dim(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    Ok(())
}

/// Hermitian inner product `tr(X Y*)`.
pub fn inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
    same_dim(x, y)?;
    Ok(x.inner_with(y))
}

pub fn commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_dim(x, y)?;
    Ok(x.bracket(y))
}

pub fn adjoint_star(x: &ComplexMatrix) -> ComplexMatrix {
    x.star()
}

pub fn matrix_exp(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !b.is_finite() {
        return Err(Error::NonFinite);
    }
    let out = ComplexMatrix { data: b.data.clone().exp() };
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// Count of singular values above `tol_rel * sigma_max`.
pub fn numerical_rank(x: &ComplexMatrix, tol_rel: f64) -> usize {
    let sv = x.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol_rel * smax).count()
}

/// Count of singular values above an absolute threshold.
pub fn rank_above(x: &ComplexMatrix, threshold: f64) -> usize {
    x.singular_values().iter().filter(|&&s| s > threshold).count()
}

pub fn eigenvalues(x: &ComplexMatrix) -> Result<Vec<C64>> {
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = x.dim();
    let diag = |m: DMatrix<C64>| -> Option<Vec<C64>> {
        let (_, t) = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)?.unpack();
        Some((0..n).map(|i| t[(i, i)]).collect())
    };
    if let Some(ev) = diag(x.data.clone()) {
        return Ok(ev);
    }
    // shifted QR can stall on symmetric patterns such as e_3 + e_3*; a fixed
    // unitary change of basis breaks the symmetry
    for stream in 0..4 {
        let u = crate::sample::random_unitary(&mut crate::sample::rng_for(0x5eed, stream), n);
        let y = u.matmul(x).matmul(&u.star());
        if let Some(ev) = diag(y.data) {
            return Ok(ev);
        }
    }
    Err(Error::EigenSolver)
}

/// Matrix wire format: `{"n": int, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let re = (0..n).map(|i| (0..n).map(|j| m.get(i, j).re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m.get(i, j).im).collect()).collect();
        Self { n, re, im }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.n;
        let shape_ok = j.re.len() == n
            && j.im.len() == n
            && j.re.iter().chain(j.im.iter()).all(|r| r.len() == n);
        if !shape_ok || n < 2 {
            return Err(Error::BadShape { rows: j.re.len(), cols: n });
        }
        Ok(Self::from_fn(n, |r, c| C64::new(j.re[r][c], j.im[r][c])))
    }
}

impl ComplexMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixJson::from(self)).expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: MatrixJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::try_from(j)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_matrix, rng_for};

    fn e2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
    }

    fn e3() -> ComplexMatrix {
        let r = 2f64.sqrt();
        ComplexMatrix::from_real_rows(&[
            vec![0.0, r, 0.0],
            vec![0.0, 0.0, r],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn inner_examples() {
        let z = ComplexMatrix::zeros(2);
        assert_eq!(inner(&z, &e2()).unwrap(), ZERO);
        assert_eq!(inner(&e2(), &e2()).unwrap(), ONE);
        // sum of r_k^2 = sum k(n-k) = 2 + 2
        let direct: f64 = (1..3).map(|k| (k * (3 - k)) as f64).sum();
        assert!((inner(&e3(), &e3()).unwrap().re - direct).abs() < 1e-12);
        assert!((direct - 4.0).abs() < 1e-15);
    }

    #[test]
    fn inner_dimension_mismatch() {
        let err = inner(&ComplexMatrix::zeros(2), &ComplexMatrix::zeros(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
        assert!(commutator(&ComplexMatrix::zeros(2), &ComplexMatrix::zeros(3)).is_err());
    }

    #[test]
    fn commutator_examples() {
        let c = commutator(&e2(), &e2().star()).unwrap();
        assert_eq!(c, ComplexMatrix::real_diag(&[1.0, -1.0]));
        assert_eq!(commutator(&e3(), &e3()).unwrap(), ComplexMatrix::zeros(3));
        let c3 = commutator(&e3(), &e3().star()).unwrap();
        assert!(c3.max_abs_diff(&ComplexMatrix::real_diag(&[2.0, 0.0, -2.0])) < 1e-14);
    }

    #[test]
    fn adjoint_examples() {
        let d = ComplexMatrix::diag(&[C64::new(0.0, 1.0), C64::new(0.0, -1.0)]);
        assert_eq!(adjoint_star(&d), ComplexMatrix::diag(&[C64::new(0.0, -1.0), C64::new(0.0, 1.0)]));
        let et = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(adjoint_star(&e2()), et);
        let mut rng = rng_for(1, 0);
        let x = random_matrix(&mut rng, 4);
        assert_eq!(adjoint_star(&adjoint_star(&x)), x);
    }

    #[test]
    fn exp_examples() {
        let z = matrix_exp(&ComplexMatrix::zeros(3)).unwrap();
        assert!(z.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        let a = 0.7;
        let d = matrix_exp(&ComplexMatrix::real_diag(&[a, -a])).unwrap();
        assert!(d.max_abs_diff(&ComplexMatrix::real_diag(&[a.exp(), (-a).exp()])) < 1e-13);
        let t = 1.3;
        let n = matrix_exp(&e2().scale_real(t)).unwrap();
        let want = ComplexMatrix::from_real_rows(&[vec![1.0, t], vec![0.0, 1.0]]).unwrap();
        assert!(n.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn exp_rejects_non_finite() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, C64::new(f64::NAN, 0.0));
        assert_eq!(matrix_exp(&m).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn exp_first_order() {
        let mut rng = rng_for(2, 0);
        let b = random_matrix(&mut rng, 3);
        let b = b.scale_real(1.0 / b.norm());
        for &h in &[1e-2, 1e-3] {
            let bh = b.scale_real(h);
            let lin = ComplexMatrix::identity(3) + bh.clone();
            let err = (&matrix_exp(&bh).unwrap() - &lin).norm();
            assert!(err < h * h, "h={h}: {err}");
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&e3(), 1e-9), 2);
        assert_eq!(numerical_rank(&ComplexMatrix::real_diag(&[1.0, 1.0, -2.0]), 1e-9), 3);
        let mut j = ComplexMatrix::zeros(3);
        j.set(1, 0, ONE);
        j.set(2, 1, ONE);
        assert_eq!(numerical_rank(&j.pow(2), 1e-9), 1);
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3), 1e-9), 0);
    }

    #[test]
    fn eigenvalue_examples() {
        let mut ev = eigenvalues(&ComplexMatrix::real_diag(&[2.0, 0.0, -2.0])).unwrap();
        ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
        for (got, want) in ev.iter().zip([2.0, 0.0, -2.0]) {
            assert!((got - C64::new(want, 0.0)).norm() < 1e-12);
        }
        let m = e3() + e3().star();
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
        for (got, want) in ev.iter().zip([2.0, 0.0, -2.0]) {
            assert!((got - C64::new(want, 0.0)).norm() < 1e-12);
        }
        for z in eigenvalues(&e3()).unwrap() {
            assert!(z.norm() < 1e-7);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        let mut rng = rng_for(3, 0);
        let x = random_matrix(&mut rng, 6);
        let s: C64 = eigenvalues(&x).unwrap().iter().sum();
        assert!((s - x.trace()).norm() < 1e-10 * x.norm());
    }

    #[test]
    fn trace_free_check() {
        let tol = Tolerances::default();
        assert!(ComplexMatrix::real_diag(&[2.0, 0.0, -2.0]).check_trace_free(&tol).is_ok());
        let err = ComplexMatrix::real_diag(&[1.0, 1.0, -1.0]).check_trace_free(&tol).unwrap_err();
        assert!(matches!(err, Error::NotTraceFree { trace_abs, .. } if (trace_abs - 1.0).abs() < 1e-15));
    }

    #[test]
    fn char_poly_of_diag() {
        // (z-1)(z+1)z = z^3 - z
        let p = ComplexMatrix::real_diag(&[1.0, -1.0, 0.0]).char_poly();
        let want = [1.0, 0.0, -1.0, 0.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - C64::new(b, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = rng_for(4, 0);
        let x = random_matrix(&mut rng, 3);
        let back = ComplexMatrix::from_json(&x.to_json()).unwrap();
        assert_eq!(back, x);
        assert!(ComplexMatrix::from_json(r#"{"n":2,"re":[[1,2]],"im":[[0,0]]}"#).is_err());
    }
}
