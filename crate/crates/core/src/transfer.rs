//! Complex 2×2 matrices carrying a separate logarithmic scale.
//!
//! The represented matrix is `exp(log_scale) · m`. After every product the
//! stored elements are renormalized so the largest modulus lies in
//! [0.5, 2], which keeps long chain products inside binary64 range even where
//! the physical matrix grows like exp(N·L·Im K).

use num_complex::Complex64;

use crate::error::{Error, Result};

const BAND_LO: f64 = 0.5;
const BAND_HI: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: [[Complex64; 2]; 2],
    pub log_scale: f64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
            log_scale: 0.0,
        }
    }

    /// Wraps raw elements and normalizes them.
    pub fn from_elements(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let mut out = Self { m, log_scale: 0.0 };
        out.normalize()?;
        Ok(out)
    }

    fn max_modulus(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Rescales the stored elements into the [0.5, 2] band if they have left it.
    pub fn normalize(&mut self) -> Result<()> {
        let peak = self.max_modulus();
        if !peak.is_finite() {
            return Err(Error::SingularElement(
                "non-finite transfer-matrix element".into(),
            ));
        }
        if peak == 0.0 {
            return Err(Error::SingularElement("zero transfer matrix".into()));
        }
        if !(BAND_LO..=BAND_HI).contains(&peak) {
            let inv = peak.recip();
            for z in self.m.iter_mut().flatten() {
                *z *= inv;
            }
            self.log_scale += peak.ln();
        }
        Ok(())
    }

    /// `self · rhs`, renormalized.
    pub fn mul(&self, rhs: &TransferMatrix) -> Result<TransferMatrix> {
        let a = &self.m;
        let b = &rhs.m;
        let m = [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ];
        let mut out = TransferMatrix {
            m,
            log_scale: self.log_scale + rhs.log_scale,
        };
        out.normalize()?;
        Ok(out)
    }

    /// Element (i, j) of the represented matrix; may overflow for large scales.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j] * self.log_scale.exp()
    }

    /// Determinant of the stored (scaled) elements; the represented
    /// determinant is this times exp(2·log_scale).
    pub fn stored_det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Complex logarithm of the represented determinant.
    pub fn log_det(&self) -> Complex64 {
        self.stored_det().ln() + 2.0 * self.log_scale
    }

    pub fn stored_trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Eigenvalues of the represented matrix.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let scale = self.log_scale.exp();
        let tr = self.stored_trace() * scale;
        let det = self.stored_det() * scale * scale;
        let disc = (tr * tr - 4.0 * det).sqrt();
        // avoid cancellation in the smaller root
        let big = if (tr + disc).norm() >= (tr - disc).norm() {
            0.5 * (tr + disc)
        } else {
            0.5 * (tr - disc)
        };
        if big.norm() == 0.0 {
            return [big, big];
        }
        [big, det / big]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_neutral() {
        let a = TransferMatrix::from_elements([
            [c(3.0, 1.0), c(0.5, 0.0)],
            [c(0.0, -2.0), c(1.0, 1.0)],
        ])
        .unwrap();
        let p = a.mul(&TransferMatrix::identity()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.element(i, j) - a.element(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn long_products_do_not_overflow() {
        let grow = TransferMatrix::from_elements([
            [c(3.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0 / 3.0, 0.0)],
        ])
        .unwrap();
        let mut acc = TransferMatrix::identity();
        for _ in 0..2000 {
            acc = acc.mul(&grow).unwrap();
        }
        assert!((acc.log_scale - 2000.0 * 3f64.ln()).abs() < 1e-9);
        assert!((acc.m[0][0] - 1.0).norm() < 1e-9);
        assert!(acc.m[1][1].norm() < 1e-300);
    }

    #[test]
    fn zero_matrix_is_singular() {
        let z = c(0.0, 0.0);
        assert!(TransferMatrix::from_elements([[z, z], [z, z]]).is_err());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = TransferMatrix::from_elements([
            [c(0.0, 1.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        let ev = m.eigenvalues();
        assert!((ev[0] * ev[1] - 1.0).norm() < 1e-15);
        assert!((ev[0] + ev[1]).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn normalized_band_and_value_preserved(
            re in proptest::collection::vec(-1e6f64..1e6, 8),
            k in -200i32..200,
        ) {
            let factor = 10f64.powi(k / 10);
            let raw = [
                [c(re[0], re[1]) * factor, c(re[2], re[3]) * factor],
                [c(re[4], re[5]) * factor, c(re[6], re[7]) * factor],
            ];
            prop_assume!(raw.iter().flatten().any(|z| z.norm() > 0.0));
            let m = TransferMatrix::from_elements(raw).unwrap();
            let peak = m.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!((0.5..=2.0).contains(&peak));
            for (i, row) in raw.iter().enumerate() {
                for (j, &z) in row.iter().enumerate() {
                    let back = m.element(i, j);
                    prop_assert!((back - z).norm() <= 1e-12 * z.norm().max(peak * m.log_scale.exp()));
                }
            }
        }
    }
}
