//! Small numeric helpers shared across modules.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unnormalized sinc, `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        // Taylor: 1 - x^2/6 keeps full precision near the removable point.
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can return TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(TAU - d)
}

/// Argument of `z` in `[0, 2π)`. Zero maps to 0.
pub fn arg_2pi(z: Complex64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        wrap_phase(z.arg())
    }
}

/// Composite Simpson rule for a complex integrand on `[a, b]`.
///
/// `panels` is rounded up to the next even number.
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn new(h11: Complex64, h12: Complex64, h21: Complex64, h22: Complex64) -> Self {
        Mat2([[h11, h12], [h21, h22]])
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    pub fn from_real(h: [[f64; 2]; 2]) -> Self {
        Mat2::new(
            Complex64::new(h[0][0], 0.0),
            Complex64::new(h[0][1], 0.0),
            Complex64::new(h[1][0], 0.0),
            Complex64::new(h[1][1], 0.0),
        )
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Mat2 {
        let m = self.0;
        Mat2::new(m[0][0] * c, m[0][1] * c, m[1][0] * c, m[1][1] * c)
    }

    pub fn transpose(&self) -> Mat2 {
        let m = self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn mul_vec(&self, x: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.0;
        [
            m[0][0] * x[0] + m[0][1] * x[1],
            m[1][0] * x[0] + m[1][1] * x[1],
        ]
    }

    /// Checked inverse; fails when `|det| < 1e-12 · ‖H‖²`.
    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if !(det.norm() >= 1e-12 * self.norm_sqr()) || det.norm() == 0.0 {
            return Err(Error::SingularChannel { det: det.norm() });
        }
        let m = self.0;
        let inv = det.inv();
        Ok(Mat2::new(
            m[1][1] * inv,
            -m[0][1] * inv,
            -m[1][0] * inv,
            m[0][0] * inv,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(PI)).abs() < 1e-15);
        assert!((sinc(PI / 2.0) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrap_and_distance() {
        assert!((wrap_phase(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(wrap_phase(TAU), 0.0);
        assert!((circular_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((circular_distance(0.0, PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| Complex64::new(x * x * x, 1.0), 0.0, 2.0, 2);
        assert!((v.re - 4.0).abs() < 1e-14);
        assert!((v.im - 2.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_roundtrip_and_singular() {
        let h = Mat2::new(
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.3, 0.2),
            Complex64::new(0.7, -1.1),
            Complex64::new(0.4, 0.9),
        );
        let inv = h.inverse().unwrap();
        let x = [Complex64::new(0.3, -0.2), Complex64::new(-1.0, 0.25)];
        let back = inv.mul_vec(h.mul_vec(x));
        assert!((back[0] - x[0]).norm() < 1e-12);
        assert!((back[1] - x[1]).norm() < 1e-12);

        let s = Mat2::from_real([[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(s.inverse(), Err(Error::SingularChannel { .. })));
    }
}
