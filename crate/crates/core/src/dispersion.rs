//! Per-wavenumber linear operator `J_k = J0 − k² L`, its spectrum, the
//! polynomials `h = det J_k` and `h̃ = det H(J_k)`, and the instability and
//! reactivity thresholds they induce.

use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use crate::model::{j0_reactivity, kinetic_stability, ModelParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `a x² + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quadratic {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// Abscissa of the vertex, `−b / 2a`.
    pub fn vertex(&self) -> f64 {
        -self.b / (2.0 * self.a)
    }

    /// Real roots in ascending order, by the cancellation-free formula.
    pub fn real_roots(&self) -> Option<(f64, f64)> {
        if self.a == 0.0 {
            return None;
        }
        let disc = self.discriminant();
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let t = -0.5 * (self.b + self.b.signum() * sq);
        let (r1, r2) = if t != 0.0 {
            (t / self.a, self.c / t)
        } else {
            // b = 0 and disc = 0: double root at zero.
            (0.0, 0.0)
        };
        Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
    }

    /// `{x > 0 : q(x) < 0}`.
    pub fn negative_set(&self) -> ReactiveSet {
        let mut set = ReactiveSet::default();
        if self.a == 0.0 {
            if self.b == 0.0 {
                if self.c < 0.0 {
                    set.push(0.0, f64::INFINITY);
                }
            } else {
                let root = -self.c / self.b;
                if self.b > 0.0 {
                    set.push(0.0, root);
                } else {
                    set.push(root.max(0.0), f64::INFINITY);
                }
            }
            return set;
        }
        match self.real_roots() {
            Some((r1, r2)) if r1 < r2 => {
                if self.a > 0.0 {
                    set.push(r1.max(0.0), r2);
                } else {
                    set.push(0.0, r1);
                    set.push(r2.max(0.0), f64::INFINITY);
                }
            }
            Some((r, _)) if self.a < 0.0 => {
                set.push(0.0, r);
                set.push(r.max(0.0), f64::INFINITY);
            }
            None if self.a < 0.0 => set.push(0.0, f64::INFINITY),
            _ => {}
        }
        set
    }
}

/// Open interval `(lo, hi)`; `hi` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Union of at most two disjoint open intervals of `k² > 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReactiveSet {
    pub intervals: Vec<Interval>,
}

impl ReactiveSet {
    fn push(&mut self, lo: f64, hi: f64) {
        if hi > lo {
            self.intervals.push(Interval { lo, hi });
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, k2: f64) -> bool {
        self.intervals.iter().any(|iv| k2 > iv.lo && k2 < iv.hi)
    }

    /// Closure membership, used for selected wavenumbers on a boundary.
    pub fn closure_contains(&self, k2: f64, tol: f64) -> bool {
        self.intervals
            .iter()
            .any(|iv| k2 >= iv.lo - tol && k2 <= iv.hi + tol)
    }
}

impl std::fmt::Display for ReactiveSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "({}, {})", iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

/// Linearisation of the transport-reaction system about `P0`:
/// `J_k = J0 − k² [[D_u, −χ], [0, D_v]]` with `χ = β ℓ(u0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linearization {
    pub j0: Matrix2,
    pub d_u: f64,
    pub d_v: f64,
    /// Chemotactic strength `β ℓ(u0)`.
    pub chemo: f64,
}

impl Linearization {
    pub fn of(params: &ModelParams) -> Result<Self> {
        let j0 = params.jacobian0()?;
        Ok(Self {
            j0,
            d_u: params.d_u,
            d_v: params.d_v,
            chemo: params.beta * params.ell_at_equilibrium()?,
        })
    }

    pub fn jk(&self, k2: f64) -> Result<Matrix2> {
        if !(k2 >= 0.0) {
            return Err(Error::domain("k2", format!("must be >= 0, got {k2}")));
        }
        let j = &self.j0;
        Ok(Matrix2::new(
            j.a11 - k2 * self.d_u,
            j.a12 + k2 * self.chemo,
            j.a21,
            j.a22 - k2 * self.d_v,
        ))
    }

    /// `D_u g_v + D_v f_u`.
    pub fn a(&self) -> f64 {
        self.d_u * self.j0.a22 + self.d_v * self.j0.a11
    }

    /// `h(k²) = det J_k`.
    pub fn h(&self) -> Quadratic {
        let j = &self.j0;
        Quadratic {
            a: self.d_u * self.d_v,
            b: -(self.a() + self.chemo * j.a21),
            c: j.det(),
        }
    }

    /// `h̃(k²) = det H(J_k) = h − ((f_v − g_u + χ k²)/2)²`.
    pub fn h_tilde(&self) -> Quadratic {
        let j = &self.j0;
        let s = j.a12 + j.a21;
        Quadratic {
            a: self.d_u * self.d_v - self.chemo * self.chemo / 4.0,
            b: -(self.a() + s * self.chemo / 2.0),
            c: j.a11 * j.a22 - s * s / 4.0,
        }
    }

    /// Vertex of `h`: `(D_u g_v + D_v f_u + χ g_u) / (2 D_u D_v)`.
    pub fn k_min(&self) -> f64 {
        self.h().vertex()
    }

    /// Non-normality `δ(k²)` from the closed form
    /// `sqrt(|X² + 4 g_u Y| / (X² + (g_u + Y)²))`, `X = f_u − g_v + k²(D_v − D_u)`,
    /// `Y = f_v + k² χ`.
    ///
    /// The closed form assumes a real spectrum; complex spectra fall back to
    /// the eigenvector inner product.
    pub fn non_normality(&self, k2: f64) -> Result<f64> {
        let jk = self.jk(k2)?;
        let eig = jk.eigen();
        if eig.is_degenerate() {
            return Err(Error::Degenerate(format!("J_k is defective at k² = {k2}")));
        }
        let x = jk.a11 - jk.a22;
        let y = jk.a12;
        let g_u = jk.a21;
        let disc = x * x + 4.0 * g_u * y;
        if disc <= 0.0 || g_u == 0.0 {
            return Ok(eig.non_normality().expect("eigenvectors available"));
        }
        let den = x * x + (g_u + y) * (g_u + y);
        Ok((disc.abs() / den).sqrt().min(1.0))
    }

    pub fn point(&self, k2: f64) -> Result<DispersionPoint> {
        let jk = self.jk(k2)?;
        let eig = jk.eigen();
        let delta = if eig.is_degenerate() {
            None
        } else {
            Some(self.non_normality(k2)?)
        };
        let h = self.h().eval(k2);
        Ok(DispersionPoint {
            k2,
            h,
            h_tilde: self.h_tilde().eval(k2),
            lambda_plus: eig.lambda_plus,
            lambda_minus: eig.lambda_minus,
            delta,
            unstable: h < 0.0,
            reactive: jk.numerical_abscissa() > 0.0,
        })
    }
}

/// Per-wavenumber record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k2: f64,
    pub h: f64,
    pub h_tilde: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `None` when `J_k` is defective.
    pub delta: Option<f64>,
    pub unstable: bool,
    pub reactive: bool,
}

pub fn jk(params: &ModelParams, k2: f64) -> Result<Matrix2> {
    Linearization::of(params)?.jk(k2)
}

/// `(h(k²), h̃(k²))`.
pub fn h_values(params: &ModelParams, k2: f64) -> Result<(f64, f64)> {
    if !(k2 >= 0.0) {
        return Err(Error::domain("k2", format!("must be >= 0, got {k2}")));
    }
    let lin = Linearization::of(params)?;
    Ok((lin.h().eval(k2), lin.h_tilde().eval(k2)))
}

pub fn non_normality(params: &ModelParams, k2: f64) -> Result<f64> {
    Linearization::of(params)?.non_normality(k2)
}

pub fn dispersion_point(params: &ModelParams, k2: f64) -> Result<DispersionPoint> {
    Linearization::of(params)?.point(k2)
}

/// Asymptotic (Turing) instability thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuringSummary {
    /// Critical chemotactic sensitivity.
    pub beta_c: f64,
    /// `(D_u g_v + D_v f_u + χ g_u)² − 4 D_u D_v det J0`.
    pub discriminant: f64,
    /// Unstable band `(k₁², k₂²)` where `h < 0`.
    pub band: Option<(f64, f64)>,
}

/// `β_c = sqrt(q)/(k1 sqrt(c)) (D_u k2 + D_v k1 + 2 D_v sqrt(cq) + sqrt(8 D_u D_v k2 sqrt(cq)))`.
pub fn beta_critical(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let p = params;
    let root_cq = (p.c * p.q).sqrt();
    Ok(p.q.sqrt() / (p.k1 * p.c.sqrt())
        * (p.d_u * p.k2
            + p.d_v * p.k1
            + 2.0 * p.d_v * root_cq
            + (8.0 * p.d_u * p.d_v * p.k2 * root_cq).sqrt()))
}

/// Sensitivity above which chemotaxis alone makes some wavenumbers reactive:
/// `|β ℓ(u0)| = 2 sqrt(D_u D_v)`, i.e. `β = 2 sqrt(D_u D_v q / c)` for `ℓ(u) = u`.
pub fn case1_beta_threshold(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    Ok(2.0 * (params.d_u * params.d_v).sqrt() / params.ell_at_equilibrium()?)
}

pub fn turing_summary(params: &ModelParams) -> Result<TuringSummary> {
    let lin = Linearization::of(params)?;
    if !kinetic_stability(&lin.j0) {
        return Err(Error::domain("J0", "kinetics are not stable"));
    }
    let h = lin.h();
    let discriminant = h.discriminant();
    let band = if discriminant > 0.0 && -h.b > 0.0 {
        h.real_roots()
    } else {
        None
    };
    Ok(TuringSummary {
        beta_c: beta_critical(params)?,
        discriminant,
        band,
    })
}

/// Which branch of the reactivity classification applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReactivityCase {
    /// `|β ℓ(u0)| > 2 sqrt(D_u D_v)`: chemotaxis alone drives reactivity.
    Case1,
    /// Weak chemotaxis, reactive kinetics.
    Case2,
    /// Weak chemotaxis, non-reactive kinetics, balanced by transport.
    Case3,
    NotReactive,
}

impl std::fmt::Display for ReactivityCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ReactivityCase::Case1 => "Case1",
            ReactivityCase::Case2 => "Case2",
            ReactivityCase::Case3 => "Case3",
            ReactivityCase::NotReactive => "NotReactive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactivityReport {
    pub case: ReactivityCase,
    /// `{k² > 0 : h̃(k²) < 0}`.
    pub reactive_set: ReactiveSet,
    /// Root of `h̃` paired with `−sqrt(Δ̃)` in the numerator.
    pub k_tilde_m: Option<f64>,
    /// Root of `h̃` paired with `+sqrt(Δ̃)` in the numerator.
    pub k_tilde_p: Option<f64>,
    pub discriminant_tilde: f64,
    /// `D_u g_v + D_v f_u`.
    pub a: f64,
    /// `sqrt(D_u D_v)`.
    pub a1: f64,
    /// `sqrt(det J0)`.
    pub a2: f64,
    /// `|f_v − g_u|`.
    pub a3: f64,
}

/// Roots of `h̃` labelled as `(k̃_m, k̃_p)`.
fn tilde_roots(ht: &Quadratic) -> (Option<f64>, Option<f64>) {
    if ht.a == 0.0 {
        // Linear: the single root is the limit of k̃_m as the leading
        // coefficient vanishes with b < 0 (the reactive case).
        return if ht.b != 0.0 {
            (Some(-ht.c / ht.b), None)
        } else {
            (None, None)
        };
    }
    match ht.real_roots() {
        Some((r1, r2)) => {
            // k̃_{m,p} = (−b ∓ sqrt(Δ̃)) / (2a): ascending for a > 0, swapped for a < 0.
            if ht.a > 0.0 {
                (Some(r1), Some(r2))
            } else {
                (Some(r2), Some(r1))
            }
        }
        None => (None, None),
    }
}

pub fn classify_reactivity(params: &ModelParams) -> Result<ReactivityReport> {
    let lin = Linearization::of(params)?;
    classify_linearization(&lin)
}

/// Reactivity classification for an arbitrary stable `J0` and transport.
pub fn classify_linearization(lin: &Linearization) -> Result<ReactivityReport> {
    let j = &lin.j0;
    if !kinetic_stability(j) {
        return Err(Error::domain("J0", "kinetics are not stable"));
    }
    let a = lin.a();
    let a1 = (lin.d_u * lin.d_v).sqrt();
    let a2 = j.det().sqrt();
    let a3 = (j.a12 - j.a21).abs();
    let chemo = lin.chemo.abs();
    let s = j.a12 + j.a21;
    let ht = lin.h_tilde();

    let case = if chemo > 2.0 * a1 {
        ReactivityCase::Case1
    } else if j0_reactivity(j)? {
        ReactivityCase::Case2
    } else {
        let lower = (a1 * a1 - chemo * chemo / 4.0).max(0.0).sqrt()
            * (4.0 * a2 * a2 - a3 * a3).max(0.0).sqrt()
            - s * lin.chemo / 2.0;
        if lower < a && a < 0.0 {
            ReactivityCase::Case3
        } else {
            ReactivityCase::NotReactive
        }
    };
    let (k_tilde_m, k_tilde_p) = tilde_roots(&ht);
    Ok(ReactivityReport {
        case,
        reactive_set: ht.negative_set(),
        k_tilde_m,
        k_tilde_p,
        discriminant_tilde: ht.discriminant(),
        a,
        a1,
        a2,
        a3,
    })
}

/// Wavenumber at which the return time is longest within the reactive
/// range: the vertex of `h` clipped to the reactive set, per case.
///
/// Returns `None` when no wavenumber is reactive.
pub fn select_k2(params: &ModelParams) -> Result<Option<f64>> {
    let lin = Linearization::of(params)?;
    let report = classify_linearization(&lin)?;
    Ok(select_k2_from(&lin, &report))
}

pub fn select_k2_from(lin: &Linearization, report: &ReactivityReport) -> Option<f64> {
    let k_min = lin.k_min();
    let (km, kp) = (report.k_tilde_m, report.k_tilde_p);
    match report.case {
        ReactivityCase::NotReactive => None,
        ReactivityCase::Case1 => {
            let (Some(km), Some(kp)) = (km, kp) else {
                // Δ̃ < 0 (or the linear boundary case): reactive everywhere.
                return Some(k_min.max(0.0));
            };
            if kp > 0.0 && km > 0.0 {
                if kp <= k_min && k_min <= km {
                    // Vertex sits in the non-reactive gap: snap to the nearer
                    // root, preferring k̃_p on a tie.
                    if (k_min - kp).abs() <= (k_min - km).abs() {
                        Some(kp)
                    } else {
                        Some(km)
                    }
                } else {
                    Some(k_min.max(0.0))
                }
            } else if kp < 0.0 && km > 0.0 {
                Some(k_min.max(km))
            } else {
                Some(k_min.max(0.0))
            }
        }
        ReactivityCase::Case2 => {
            let kp = kp.or(km)?;
            Some(k_min.min(kp).max(0.0))
        }
        ReactivityCase::Case3 => {
            let (km, kp) = (km?, kp?);
            Some(km.max(kp).min(k_min.max(km)))
        }
    }
}
