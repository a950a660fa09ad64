//! Small fixed-size matrix helpers for the 2-torus fiber metric.

use serde::{Deserialize, Serialize};

/// Symmetric 2x2 matrix, stored as (xx, xy, yy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Sym2 { xx: a, xy: 0.0, yy: b }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2 { xx: self.yy / d, xy: -self.xy / d, yy: self.xx / d }
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2 { xx: self.xx * s, xy: self.xy * s, yy: self.yy * s }
    }

    pub fn add(&self, other: &Sym2) -> Sym2 {
        Sym2 { xx: self.xx + other.xx, xy: self.xy + other.xy, yy: self.yy + other.yy }
    }

    pub fn sub(&self, other: &Sym2) -> Sym2 {
        Sym2 { xx: self.xx - other.xx, xy: self.xy - other.xy, yy: self.yy - other.yy }
    }

    /// Quadratic form v^T A v.
    pub fn quad_form(&self, v: (f64, f64)) -> f64 {
        self.xx * v.0 * v.0 + 2.0 * self.xy * v.0 * v.1 + self.yy * v.1 * v.1
    }

    /// tr(A B) for symmetric A, B.
    pub fn trace_product(&self, b: &Sym2) -> f64 {
        self.xx * b.xx + 2.0 * self.xy * b.xy + self.yy * b.yy
    }

    /// tr(A^{-1} B A^{-1} C) for symmetric A, B, C; A invertible.
    pub fn trace_sandwich(&self, b: &Sym2, c: &Sym2) -> f64 {
        let ai = self.inverse();
        // tr((ai b)(ai c)) with general (non-symmetric) products.
        let p = Mat2::from_sym(&ai).mul_sym(b);
        let q = Mat2::from_sym(&ai).mul_sym(c);
        p.mul(&q).trace()
    }

    /// Congruence transform B^T A B.
    pub fn congruence(&self, b: &Mat2) -> Sym2 {
        let ab = Mat2::from_sym(self).mul(b);
        let r = b.transpose().mul(&ab);
        Sym2 { xx: r.a, xy: 0.5 * (r.b + r.c), yy: r.d }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }
}

/// General 2x2 matrix [[a, b], [c, d]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_sym(s: &Sym2) -> Self {
        Mat2 { a: s.xx, b: s.xy, c: s.xy, d: s.yy }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2 { a: self.a, b: self.c, c: self.b, d: self.d }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn mul_sym(&self, s: &Sym2) -> Mat2 {
        self.mul(&Mat2::from_sym(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym2_inverse_roundtrip() {
        let a = Sym2::new(2.0, 0.5, 3.0);
        let ai = a.inverse();
        let p = Mat2::from_sym(&a).mul_sym(&ai);
        assert!((p.a - 1.0).abs() < 1e-15);
        assert!(p.b.abs() < 1e-15);
        assert!((p.d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_sandwich_matches_explicit() {
        let a = Sym2::new(1.3, 0.2, 0.9);
        let b = Sym2::new(0.4, -0.1, 1.1);
        let c = Sym2::new(2.0, 0.3, 0.5);
        let ai = Mat2::from_sym(&a.inverse());
        let explicit = ai.mul_sym(&b).mul(&ai.mul_sym(&c)).trace();
        assert!((a.trace_sandwich(&b, &c) - explicit).abs() < 1e-14);
    }

    #[test]
    fn congruence_is_bt_a_b() {
        let a = Sym2::new(1.0, 0.25, 2.0);
        let b = Mat2::new(1.0, 2.0, 0.0, 1.0);
        let r = a.congruence(&b);
        // det(B^T A B) = det(A) det(B)^2
        assert!((r.det() - a.det() * b.det() * b.det()).abs() < 1e-14);
    }
}
