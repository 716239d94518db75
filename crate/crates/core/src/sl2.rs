//! Standard sl(2,C)-triples of type `pi` and elements `aE + bE~ + cX` in them.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::partition::{c_constant, Partition};

/// Block-diagonal `(E, E~, X)` with blocks `e_k`, `e~_k`, `x_k` in partition order.
#[derive(Debug, Clone, Serialize)]
pub struct StandardTriple {
    pub partition: Partition,
    pub e: ComplexMatrix,
    pub etilde: ComplexMatrix,
    pub x: ComplexMatrix,
}

/// Coefficients of `a E + b E~ + c X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sl2Element {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

impl Sl2Element {
    pub fn new(a: C64, b: C64, c: C64) -> Self {
        Self { a, b, c }
    }

    /// `4|a c~ - b~ c|^2 + (|a|^2 - |b|^2)^2`, the Z-defining quantity up to `|E|^4`.
    pub fn z_quantity(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        let cross = a * c.conj() - b.conj() * c;
        4.0 * cross.norm_sqr() + (a.norm_sqr() - b.norm_sqr()).powi(2)
    }

    /// `(|a|^2 + |b|^2 + 2|c|^2)^2`, i.e. `|A|^4 / |E|^4`.
    pub fn norm4_quantity(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + 2.0 * self.c.norm_sqr()).powi(2)
    }

    /// Closed-form Z test, relative to `|A|^4`.
    pub fn in_z(&self, tol: f64) -> bool {
        self.z_quantity() <= tol * self.norm4_quantity()
    }

    /// The embedded element is nilpotent iff `c^2 + ab = 0`.
    pub fn is_nilpotent(&self, tol: f64) -> bool {
        (self.c * self.c + self.a * self.b).norm() <= tol * (self.norm4_quantity().sqrt())
    }
}

/// `e_k`: superdiagonal `r_j = sqrt(j (k - j))`.
pub fn e_block(k: usize) -> Vec<f64> {
    (1..k).map(|j| ((j * (k - j)) as f64).sqrt()).collect()
}

pub fn build_standard_triple(partition: &Partition) -> StandardTriple {
    let n = partition.n() as usize;
    let mut e = ComplexMatrix::zeros(n);
    let mut x = ComplexMatrix::zeros(n);
    let mut offset = 0;
    for &k in partition.parts() {
        let k = k as usize;
        for (j, r) in e_block(k).into_iter().enumerate() {
            e.set(offset + j, offset + j + 1, C64::new(r, 0.0));
        }
        for i in 0..k {
            x.set(offset + i, offset + i, C64::new((k as f64) - 1.0 - 2.0 * i as f64, 0.0));
        }
        offset += k;
    }
    let etilde = e.star();
    StandardTriple { partition: partition.clone(), e, etilde, x }
}

/// `e_n`, the principal nilpotent of the irreducible block.
pub fn principal_e(n: usize) -> ComplexMatrix {
    build_standard_triple(&Partition::principal(n as u32)).e
}

/// `x_n = diag(n-1, n-3, ..., 1-n)`.
pub fn principal_x(n: usize) -> ComplexMatrix {
    build_standard_triple(&Partition::principal(n as u32)).x
}

impl StandardTriple {
    pub fn embed(&self, el: Sl2Element) -> ComplexMatrix {
        self.e.scale(el.a) + self.etilde.scale(el.b) + self.x.scale(el.c)
    }
}

pub fn embed_element(t: &StandardTriple, a: C64, b: C64, c: C64) -> ComplexMatrix {
    t.embed(Sl2Element::new(a, b, c))
}

/// Closed-form value of K on the standard sl(2) of type `pi`: `C_pi` off Z.
pub fn k_on_standard(el: Sl2Element, partition: &Partition, z_tol: f64) -> Result<Rational64> {
    let c = c_constant(partition)?;
    if el.in_z(z_tol) {
        let ratio = el.z_quantity() / el.norm4_quantity().max(f64::MIN_POSITIVE);
        return Err(Error::InZ { ratio });
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{eigenvalues, ONE, ZERO};

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn triple_examples() {
        let t = build_standard_triple(&p("2"));
        assert_eq!(t.e, ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap());
        let t3 = build_standard_triple(&p("3"));
        let r = 2f64.sqrt();
        assert!((t3.e.get(0, 1).re - r).abs() < 1e-15);
        assert!((t3.e.get(1, 2).re - r).abs() < 1e-15);
        let t11 = build_standard_triple(&p("1,1"));
        assert_eq!(t11.e, ComplexMatrix::zeros(2));
        assert!(k_on_standard(Sl2Element::new(ONE, ZERO, ZERO), &p("1,1"), 1e-10).is_err());
    }

    #[test]
    fn triple_relations() {
        for n in 2..=7 {
            for q in Partition::nontrivial(n) {
                let t = build_standard_triple(&q);
                assert!(t.e.bracket(&t.etilde).max_abs_diff(&t.x) < 1e-12, "{q}");
                assert!(t.x.bracket(&t.e).max_abs_diff(&t.e.scale_real(2.0)) < 1e-12);
                assert!(t.x.bracket(&t.etilde).max_abs_diff(&t.etilde.scale_real(-2.0)) < 1e-12);
                assert_eq!(t.x.star(), t.x);
                let want = 2.0 / crate::partition::rational_to_f64(c_constant(&q).unwrap());
                assert!((t.e.norm_sqr() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn embed_examples() {
        let q = p("3,1");
        let t = build_standard_triple(&q);
        assert_eq!(embed_element(&t, ONE, ZERO, ZERO), t.e);

        let qq = C64::new(0.3, -1.2);
        let t4 = build_standard_triple(&p("4"));
        let higgs = embed_element(&t4, qq, ONE, ZERO);
        assert!(higgs.max_abs_diff(&(t4.etilde.clone() + t4.e.scale(qq))) < 1e-15);

        let x = embed_element(&t, ZERO, ZERO, ONE);
        let mut ev: Vec<f64> = eigenvalues(&x).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut want = crate::partition::lambda_sequence(&q).sorted_desc();
        want.sort_by(|a, b| b.cmp(a));
        for (g, w) in ev.iter().zip(want) {
            assert!((g - w as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn k_on_standard_examples() {
        let v = k_on_standard(Sl2Element::new(ONE, ZERO, ZERO), &p("3"), 1e-10).unwrap();
        assert_eq!(v, Rational64::new(1, 2));
        let err = k_on_standard(Sl2Element::new(ONE, ONE, ZERO), &p("2"), 1e-10).unwrap_err();
        assert!(matches!(err, Error::InZ { .. }));
        // X^pi is real diagonal, so it sits in Z
        let err = k_on_standard(Sl2Element::new(ZERO, ZERO, ONE), &p("2,1"), 1e-10).unwrap_err();
        assert!(matches!(err, Error::InZ { .. }));
        let v = k_on_standard(Sl2Element::new(ONE, ZERO, ONE), &p("2,1"), 1e-10).unwrap();
        assert_eq!(v, Rational64::new(2, 1));
    }
}
