//! Transient growth of `exp(M t)` for stable 2×2 operators: the amplification
//! envelope `ρ(t) = ‖exp(Mt)‖₂`, its closed-form estimates `χ(t)` and `χ*`,
//! return times, ε-pseudospectral abscissae and the Kreiss constant.

use crate::error::{Error, Result};
use crate::matrix::{resolvent_smin, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Sampled amplification envelope.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnvelopeSeries {
    pub times: Vec<f64>,
    /// `ρ(t)`.
    pub values: Vec<f64>,
    /// `χ(t)`; `NaN` when the eigenbasis is unavailable.
    pub chi_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub max_rho: f64,
    pub t_at_max: f64,
    /// Time taken, after the peak, for `ρ` to fall back to 1. `None` when `ρ`
    /// never exceeds 1 or when the window ends first (see `truncated`).
    pub return_time: Option<f64>,
    /// Absolute time of that crossing.
    pub return_crossing: Option<f64>,
    /// `ρ` was still above 1 at the end of the window.
    pub truncated: bool,
    pub chi_star: Option<f64>,
    pub t_star: Option<f64>,
    pub kreiss: f64,
}

/// `exp(M t)`.
pub fn matrix_exponential(m: &Matrix2, t: f64) -> Result<Matrix2> {
    if !(t >= 0.0) {
        return Err(Error::domain("t", format!("must be >= 0, got {t}")));
    }
    Ok(m.exp(t))
}

/// `ρ(t) = ‖exp(M t)‖₂`.
pub fn rho(m: &Matrix2, t: f64) -> f64 {
    m.exp(t).norm2()
}

/// Peak estimate `χ*` and its time `t*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub chi_star: f64,
    pub t_star: f64,
}

/// Closed-form estimate of the envelope maximum from the spectrum and the
/// non-normality `δ`.
///
/// Real pair `λ₋ < λ₊ < 0`: `χ* = δ⁻¹ (λ₋/λ₊)^{λ₊/Σ} (1 − λ₊/λ₋)` at
/// `t* = ln(λ₋/λ₊)/Σ`. Complex pair: the maximum of
/// `2 δ⁻¹ e^{Re λ t} |sin(Im λ t)|`, reached at `t* = atan(−Im λ/Re λ)/Im λ`.
pub fn chi_estimate(
    lambda_plus: Complex64,
    lambda_minus: Complex64,
    delta: f64,
) -> Result<ChiEstimate> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(
            "delta",
            format!("must lie in (0, 1], got {delta}"),
        ));
    }
    if !(lambda_plus.re < 0.0) {
        return Err(Error::Unstable {
            abscissa: lambda_plus.re,
        });
    }
    if lambda_plus.im == 0.0 && lambda_minus.im == 0.0 {
        let (lp, lm) = (lambda_plus.re, lambda_minus.re);
        if lp == lm {
            return Err(Error::Degenerate("coincident eigenvalues".into()));
        }
        let sigma = lp - lm;
        let log_ratio = (lm / lp).ln();
        let chi_star = (lp / sigma * log_ratio).exp() * (1.0 - lp / lm) / delta;
        Ok(ChiEstimate {
            chi_star,
            t_star: log_ratio / sigma,
        })
    } else {
        let im = lambda_plus.im.abs();
        let re = lambda_plus.re;
        let t_star = (-im / re).atan() / im;
        Ok(ChiEstimate {
            chi_star: 2.0 / delta * (re * t_star).exp() * (im * t_star).sin().abs(),
            t_star,
        })
    }
}

/// `χ(t)`, the eigen-based approximation of `ρ(t)`.
pub fn chi_at(lambda_plus: Complex64, lambda_minus: Complex64, delta: f64, t: f64) -> f64 {
    if lambda_plus.im == 0.0 && lambda_minus.im == 0.0 {
        ((lambda_plus.re * t).exp() - (lambda_minus.re * t).exp()) / delta
    } else {
        let im = lambda_plus.im.abs();
        (lambda_minus.re * t).exp() * ((1.0 - (-2.0 * delta * im * t).exp()) / delta + 1.0)
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation of `f` on `[a, b]`.
fn golden_max(mut a: f64, mut b: f64, rel_tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a) <= rel_tol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Default window for the envelope: ten e-folding times of the slowest mode.
pub fn default_t_max(m: &Matrix2) -> f64 {
    10.0 / m.spectral_abscissa().abs()
}

/// Samples `ρ(t)` on a hybrid grid, locates its peak and the return to 1.
///
/// The grid has 64 log-spaced points up to `τ = min(1, t_max, 10/‖M‖)` and
/// `n − 64` (at least 64) linearly spaced points on `[τ, t_max]`. The peak is
/// refined by golden section between the neighbours of the sampled maximum
/// and the return crossing by bisection.
pub fn amplification_envelope(
    m: &Matrix2,
    t_max: f64,
    n: usize,
) -> Result<(EnvelopeSeries, EnvelopeSummary)> {
    let abscissa = m.spectral_abscissa();
    if !(abscissa < 0.0) {
        return Err(Error::Unstable { abscissa });
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain(
            "t_max",
            format!("must be finite and > 0, got {t_max}"),
        ));
    }
    if n < 64 {
        return Err(Error::domain(
            "n",
            format!("need at least 64 samples, got {n}"),
        ));
    }

    let tau = 1.0f64.min(t_max).min(10.0 / m.norm2());
    let t_lo = 1e-4 * tau;
    let mut times = Vec::with_capacity(n + 1);
    times.push(0.0);
    let n_log = 64;
    for i in 0..n_log {
        let s = i as f64 / (n_log - 1) as f64;
        times.push(t_lo * (tau / t_lo).powf(s));
    }
    let n_lin = (n - n_log).max(64);
    for i in 1..=n_lin {
        times.push(tau + (t_max - tau) * i as f64 / n_lin as f64);
    }

    let eig = m.eigen();
    let delta = eig.non_normality();
    let values: Vec<f64> = times.iter().map(|&t| rho(m, t)).collect();
    let chi_values = times
        .iter()
        .map(|&t| match delta {
            Some(d) if d > 0.0 => chi_at(eig.lambda_plus, eig.lambda_minus, d, t),
            _ => f64::NAN,
        })
        .collect();

    let (imax, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    let (t_at_max, max_rho) = if imax == 0 {
        (0.0, 1.0)
    } else {
        let lo = times[imax - 1];
        let hi = times[(imax + 1).min(times.len() - 1)];
        let (t, v) = golden_max(lo, hi, 1e-12, |t| rho(m, t));
        if v >= values[imax] {
            (t, v)
        } else {
            (times[imax], values[imax])
        }
    };

    let mut return_crossing = None;
    let mut truncated = false;
    if max_rho > 1.0 + 1e-12 {
        match (imax + 1..times.len()).find(|&i| values[i] <= 1.0) {
            Some(i) => {
                let mut a = times[i - 1].max(t_at_max);
                let mut b = times[i];
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if rho(m, mid) > 1.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                return_crossing = Some(0.5 * (a + b));
            }
            None => truncated = true,
        }
    }

    let chi = match delta {
        Some(d) if d > 0.0 => chi_estimate(eig.lambda_plus, eig.lambda_minus, d).ok(),
        _ => None,
    };
    let summary = EnvelopeSummary {
        max_rho,
        t_at_max,
        return_time: return_crossing.map(|t| t - t_at_max),
        return_crossing,
        truncated,
        chi_star: chi.map(|c| c.chi_star),
        t_star: chi.map(|c| c.t_star),
        kreiss: kreiss_constant(m)?,
    };
    Ok((
        EnvelopeSeries {
            times,
            values,
            chi_values,
        },
        summary,
    ))
}

/// `min_y s_min((x + iy) I − M)` over `0 ≤ y ≤ y_max`.
///
/// The objective is even in `y` for real `M`. A 64-point scan seeds
/// golden-section refinements around its three best local minima.
fn min_smin_on_vertical(m: &Matrix2, x: f64, y_max: f64, hints: &[f64]) -> f64 {
    const N: usize = 64;
    let f = |y: f64| resolvent_smin(m, Complex64::new(x, y));
    let ys: Vec<f64> = (0..=N).map(|i| y_max * i as f64 / N as f64).collect();
    let vals: Vec<f64> = ys.iter().map(|&y| f(y)).collect();
    let mut best = vals.iter().copied().fold(f64::INFINITY, f64::min);

    let mut minima: Vec<usize> = (0..=N)
        .filter(|&i| {
            let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
            let right = if i == N { f64::INFINITY } else { vals[i + 1] };
            vals[i] <= left && vals[i] <= right
        })
        .collect();
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let step = y_max / N as f64;
    let mut brackets: Vec<(f64, f64)> = minima
        .iter()
        .take(3)
        .map(|&i| ((ys[i] - step).max(0.0), (ys[i] + step).min(y_max)))
        .collect();
    for &h in hints {
        if h > 0.0 && h < y_max {
            brackets.push(((h - step).max(0.0), (h + step).min(y_max)));
        }
    }
    for (a, b) in brackets {
        let (_, v) = golden_max(a, b, 1e-13, |y| -f(y));
        best = best.min(-v);
    }
    best
}

/// ε-pseudospectral abscissa `max{Re z : s_min(zI − M) ≤ ε}`.
///
/// Scans real parts downward from `ω(M) + ε` (beyond which the resolvent
/// norm is below `1/ε`) to `Re λ₊`, then bisects the rightmost crossing of
/// `min_y s_min(x + iy) = ε`.
pub fn pseudo_abscissa(m: &Matrix2, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(
            "epsilon",
            format!("must be finite and > 0, got {epsilon}"),
        ));
    }
    let (lp, _) = m.eigenvalues();
    let x_lo = lp.re;
    let x_hi = m.numerical_abscissa().max(x_lo) + epsilon;
    let y_max = m.norm2() + 10.0 * epsilon;
    let hints = [lp.im.abs()];
    let phi = |x: f64| min_smin_on_vertical(m, x, y_max, &hints) - epsilon;

    const SCAN: usize = 48;
    let mut upper = x_hi;
    let mut lower = x_lo;
    for i in 1..=SCAN {
        let x = x_hi - (x_hi - x_lo) * i as f64 / SCAN as f64;
        if phi(x) <= 0.0 {
            lower = x;
            break;
        }
        upper = x;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lower + upper);
        if mid <= lower || mid >= upper || upper - lower < 1e-14 * (1.0 + mid.abs()) {
            break;
        }
        if phi(mid) <= 0.0 {
            lower = mid;
        } else {
            upper = mid;
        }
    }
    Ok(0.5 * (lower + upper))
}

/// Maximiser of `α_ε / ε` over the search window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KreissSearch {
    /// `max α_ε/ε` inside the window.
    pub ratio: f64,
    pub epsilon: f64,
}

/// Maximises `α_ε/ε` over `log ε ∈ [log(1e-6 s), log s]`, `s = max(1, ‖M‖₂)`,
/// by a 40-point scan followed by golden section in `log ε`.
pub fn kreiss_search(m: &Matrix2) -> Result<KreissSearch> {
    let abscissa = m.spectral_abscissa();
    if !(abscissa < 0.0) {
        return Err(Error::Unstable { abscissa });
    }
    let s = m.norm2().max(1.0);
    let (lo, hi) = ((1e-6 * s).ln(), s.ln());
    let ratio = |log_eps: f64| {
        let eps = log_eps.exp();
        pseudo_abscissa(m, eps)
            .map(|a| a / eps)
            .unwrap_or(f64::NEG_INFINITY)
    };
    const N: usize = 40;
    let grid: Vec<f64> = (0..=N)
        .map(|i| lo + (hi - lo) * i as f64 / N as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&g| ratio(g)).collect();
    let (imax, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    let a = grid[imax.saturating_sub(1)];
    let b = grid[(imax + 1).min(N)];
    let (x, v) = golden_max(a, b, 1e-6, ratio);
    let (x, v) = if v >= vals[imax] {
        (x, v)
    } else {
        (grid[imax], vals[imax])
    };
    Ok(KreissSearch {
        ratio: v,
        epsilon: x.exp(),
    })
}

/// Kreiss constant `sup_ε α_ε/ε`.
///
/// The supremum is never below 1 (its limit as `ε → ∞`), so window maxima
/// under 1 are reported as 1.
pub fn kreiss_constant(m: &Matrix2) -> Result<f64> {
    Ok(kreiss_search(m)?.ratio.max(1.0))
}
