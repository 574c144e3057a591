//! Real 2×2 matrices: closed-form spectra, singular values, and the matrix
//! exponential.
//!
//! Everything here is specialised to two dimensions. Eigenvalues come from the
//! sign-aware quadratic formula, singular values from the rotation-invariant
//! split into conformal and anti-conformal parts, and `exp(Mt)` from a
//! rank-one correction of a scalar exponential.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// Real 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Matrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Matrix2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22)
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    /// `(M + Mᵀ) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let off = 0.5 * (self.a12 + self.a21);
        Self::new(self.a11, off, off, self.a22)
    }

    /// Largest eigenvalue of the Hermitian part, i.e. the initial growth rate
    /// of `‖exp(Mt)‖` in the 2-norm.
    pub fn numerical_abscissa(&self) -> f64 {
        let mean = 0.5 * (self.a11 + self.a22);
        let half_gap = 0.5 * (self.a11 - self.a22);
        let off = 0.5 * (self.a12 + self.a21);
        mean + half_gap.hypot(off)
    }

    /// Singular values `(σ_max, σ_min)`.
    ///
    /// Splits `M` into a scaled rotation and a scaled reflection; the
    /// singular values are the sum and difference of their magnitudes, which
    /// avoids the cancellation in `‖M‖_F² ± sqrt(‖M‖_F⁴ − 4 det²)`.
    pub fn singular_values(&self) -> (f64, f64) {
        let e = 0.5 * (self.a11 + self.a22);
        let f = 0.5 * (self.a11 - self.a22);
        let g = 0.5 * (self.a21 + self.a12);
        let h = 0.5 * (self.a21 - self.a12);
        let q = e.hypot(h);
        let r = f.hypot(g);
        (q + r, (q - r).abs())
    }

    /// Spectral norm (largest singular value).
    pub fn norm2(&self) -> f64 {
        self.singular_values().0
    }

    /// `(a11 − a22)² + 4 a12 a21`, the discriminant of the characteristic
    /// polynomial written without the trace² − 4 det cancellation.
    pub fn discriminant(&self) -> f64 {
        let d = self.a11 - self.a22;
        d * d + 4.0 * self.a12 * self.a21
    }

    /// `‖M Mᵀ − Mᵀ M‖_F`, zero exactly for normal matrices.
    pub fn commutator_norm(&self) -> f64 {
        (*self * self.transpose() - self.transpose() * *self).frobenius_norm()
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Self::new(
            self.a22 / d,
            -self.a12 / d,
            -self.a21 / d,
            self.a11 / d,
        ))
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * x[0] + self.a12 * x[1],
            self.a21 * x[0] + self.a22 * x[1],
        ]
    }

    /// Eigenvalues ordered by real part, then imaginary part (descending).
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half_trace = 0.5 * self.trace();
        let disc = self.discriminant();
        if disc >= 0.0 {
            let r = 0.5 * disc.sqrt();
            // Large-magnitude root first; the small one from det / large.
            let big = if half_trace >= 0.0 {
                half_trace + r
            } else {
                half_trace - r
            };
            let small = if big != 0.0 { self.det() / big } else { 0.0 };
            let (hi, lo) = if big >= small {
                (big, small)
            } else {
                (small, big)
            };
            (Complex64::new(hi, 0.0), Complex64::new(lo, 0.0))
        } else {
            let w = 0.5 * (-disc).sqrt();
            (
                Complex64::new(half_trace, w),
                Complex64::new(half_trace, -w),
            )
        }
    }

    /// Spectral abscissa `max Re λ`.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues().0.re
    }

    /// Eigen-decomposition; see [`Eigen2`].
    pub fn eigen(&self) -> Eigen2 {
        Eigen2::of(self)
    }

    /// Matrix exponential `exp(M t)`, picking the closed form unless the
    /// eigenvalues nearly coalesce, where the Padé route is used instead.
    pub fn exp(&self, t: f64) -> Matrix2 {
        let scale = self.frobenius_norm();
        if self.discriminant().abs() > NEAR_DEFECTIVE * scale * scale {
            self.exp_closed_form(t)
        } else {
            self.exp_pade(t)
        }
    }

    /// Closed-form `exp(M t)`.
    ///
    /// Real spectrum: `exp(Mt) = e^{λ₊t} (I + φ(t) (M − λ₊I))` with
    /// `φ = −expm1(−Σt)/Σ`, `Σ = λ₊ − λ₋ ≥ 0`, which stays finite for any `t`
    /// and reduces to the Jordan form when `Σ = 0`. Complex spectrum:
    /// `e^{st} (cos ωt I + sin(ωt)/ω (M − sI))`.
    pub fn exp_closed_form(&self, t: f64) -> Matrix2 {
        let disc = self.discriminant();
        if disc >= 0.0 {
            let (lp, lm) = self.eigenvalues();
            let (lp, lm) = (lp.re, lm.re);
            let sigma = lp - lm;
            let x = sigma * t;
            let phi = if x < 1e-8 {
                t * (1.0 - 0.5 * x)
            } else {
                -(-x).exp_m1() / sigma
            };
            let n = *self - Matrix2::identity().scale(lp);
            (Matrix2::identity() + n.scale(phi)).scale((lp * t).exp())
        } else {
            let s = 0.5 * self.trace();
            let w = 0.5 * (-disc).sqrt();
            let wt = w * t;
            let sinc_t = if wt.abs() < 1e-8 {
                t * (1.0 - wt * wt / 6.0)
            } else {
                wt.sin() / w
            };
            let n = *self - Matrix2::identity().scale(s);
            (Matrix2::identity().scale(wt.cos()) + n.scale(sinc_t)).scale((s * t).exp())
        }
    }

    /// `exp(M t)` by scaling and squaring with the diagonal (6,6) Padé
    /// approximant.
    pub fn exp_pade(&self, t: f64) -> Matrix2 {
        let a = self.scale(t);
        let norm_inf = (a.a11.abs() + a.a12.abs()).max(a.a21.abs() + a.a22.abs());
        let squarings = if norm_inf > 0.5 {
            (norm_inf / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let a = a.scale(0.5f64.powi(squarings));
        let mut num = Matrix2::zero();
        let mut den = Matrix2::zero();
        let mut power = Matrix2::identity();
        for (k, &c) in PADE6.iter().enumerate() {
            num = num + power.scale(c);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            den = den + power.scale(sign * c);
            power = power * a;
        }
        let mut x = den
            .inverse()
            .expect("Padé denominator is nonsingular for ‖A‖ ≤ 1/2")
            * num;
        for _ in 0..squarings {
            x = x * x;
        }
        x
    }
}

/// Relative discriminant below which the eigenvalues are treated as coalesced
/// by [`Matrix2::exp`].
const NEAR_DEFECTIVE: f64 = 1e-10;

/// Relative discriminant below which the eigenvector basis is declared
/// unavailable.
pub const DEFECTIVE_TOL: f64 = 1e-12;

/// Coefficients of the degree-6 diagonal Padé approximant to `exp`.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        )
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

/// Complex 2-vector.
pub type CVec2 = [Complex64; 2];

/// Eigenvalues and (when available) unit eigenvectors of a real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2 {
    /// Eigenvalue with the larger real part (larger imaginary part on ties).
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `(v₊, v₋)`; `None` when the matrix is (numerically) defective.
    pub vectors: Option<(CVec2, CVec2)>,
    /// `M Mᵀ = Mᵀ M` holds exactly in floating point.
    pub normal: bool,
}

impl Eigen2 {
    pub fn of(m: &Matrix2) -> Self {
        let (lambda_plus, lambda_minus) = m.eigenvalues();
        let scale = m.frobenius_norm();
        let degenerate = m.discriminant().abs() < DEFECTIVE_TOL * scale * scale;
        let vectors = if degenerate {
            // A scalar matrix is degenerate but not defective.
            (m.a12 == 0.0 && m.a21 == 0.0).then(|| {
                let one = Complex64::new(1.0, 0.0);
                let zero = Complex64::new(0.0, 0.0);
                ([one, zero], [zero, one])
            })
        } else {
            Some((eigvec(m, lambda_plus), eigvec(m, lambda_minus)))
        };
        Self {
            lambda_plus,
            lambda_minus,
            vectors,
            normal: m.commutator_norm() == 0.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.vectors.is_none()
    }

    pub fn is_real(&self) -> bool {
        self.lambda_plus.im == 0.0 && self.lambda_minus.im == 0.0
    }

    /// `|⟨v₊^⊥, v₋⟩| = |det[v₊ v₋]|` for unit eigenvectors: 1 for orthogonal
    /// eigenvectors, 0 when they are parallel. Exactly 1 for normal matrices.
    pub fn non_normality(&self) -> Option<f64> {
        let (vp, vm) = self.vectors?;
        if self.normal {
            return Some(1.0);
        }
        Some((vp[0] * vm[1] - vp[1] * vm[0]).norm().min(1.0))
    }

    /// 2-norm condition number of the eigenvector matrix `[v₊ v₋]`.
    pub fn condition_number(&self) -> Option<f64> {
        let (vp, vm) = self.vectors?;
        let fro2 = vp[0].norm_sqr() + vp[1].norm_sqr() + vm[0].norm_sqr() + vm[1].norm_sqr();
        let det = (vp[0] * vm[1] - vp[1] * vm[0]).norm();
        if det == 0.0 {
            return Some(f64::INFINITY);
        }
        let smax2 = 0.5 * (fro2 + (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt());
        let smax = smax2.sqrt();
        Some(smax / (det / smax))
    }
}

fn eigvec(m: &Matrix2, lambda: Complex64) -> CVec2 {
    // Two null-vector candidates for (M − λI); keep the better conditioned.
    let c1 = [Complex64::new(m.a12, 0.0), lambda - m.a11];
    let c2 = [lambda - m.a22, Complex64::new(m.a21, 0.0)];
    let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
    let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
    let (v, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    if n == 0.0 {
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    let inv = 1.0 / n.sqrt();
    [v[0] * inv, v[1] * inv]
}

/// Smallest singular value of the complex matrix `z I − M`.
pub fn resolvent_smin(m: &Matrix2, z: Complex64) -> f64 {
    let b11 = z - m.a11;
    let b22 = z - m.a22;
    let b12 = Complex64::new(-m.a12, 0.0);
    let b21 = Complex64::new(-m.a21, 0.0);
    let fro2 = b11.norm_sqr() + b22.norm_sqr() + b12.norm_sqr() + b21.norm_sqr();
    let det = (b11 * b22 - b12 * b21).norm();
    let root = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax2 = 0.5 * (fro2 + root);
    if smax2 == 0.0 {
        return 0.0;
    }
    det / smax2.sqrt()
}
