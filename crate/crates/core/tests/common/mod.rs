//! Randomised invariants shared by the property suite and the acceptance
//! runner. Each check runs `cases` draws and reports the first failure.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use reactlab::dispersion::{classify_linearization, select_k2_from, Linearization, ReactivityCase};
use reactlab::matrix::Matrix2;
use reactlab::pde::{initialize, Boundary, ImexSolver, SimConfig};
use reactlab::scanner::{self, Axis, Region, ScanConfig, Spacing};
use reactlab::transient::{chi_estimate, rho};
use reactlab::{Execution, ModelParams};

pub type Check = fn(u32, bool) -> Result<(), String>;

fn runner(cases: u32, deterministic: bool) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    if deterministic {
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
    } else {
        TestRunner::new(config)
    }
}

fn run<S: Strategy>(
    cases: u32,
    deterministic: bool,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases, deterministic)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.05..2.0f64,
        0.05..2.0f64,
        0.0..3.0f64,
        0.05..2.0f64,
        0.05..2.0f64,
        1e-3..0.5f64,
        0.05..2.0f64,
    )
        .prop_map(|(d_u, d_v, beta, k1, k2, q, c)| ModelParams {
            d_u,
            d_v,
            beta,
            k1,
            k2,
            q,
            c,
            ..ModelParams::default()
        })
}

/// Stable, clearly diagonalisable 2×2 matrices, real or complex spectrum.
pub fn stable_matrix() -> impl Strategy<Value = Matrix2> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
        .prop_map(|(a, b, c, d)| Matrix2::new(a, b, c, d))
        .prop_filter("stable and non-defective", |m| {
            m.spectral_abscissa() < -1e-3
                && m.discriminant().abs() > 1e-4 * m.frobenius_norm().powi(2)
        })
}

/// `h(k²) < 0` implies `h̃(k²) < 0`.
pub fn unstable_implies_reactive(cases: u32, det: bool) -> Result<(), String> {
    run(cases, det, (params(), 0.0..50.0f64), |(p, k2)| {
        let lin = Linearization::of(&p).unwrap();
        let (h, ht) = (lin.h().eval(k2), lin.h_tilde().eval(k2));
        if h < 0.0 {
            prop_assert!(ht < 0.0, "h = {h}, h̃ = {ht}");
        }
        Ok(())
    })
}

/// `e^{Re λ₊ t} ≤ ρ(t) ≤ μ(V) e^{Re λ₊ t}` up to a relative 1e-9.
pub fn sandwich(m: &Matrix2, s: f64) -> Result<(), TestCaseError> {
    let eig = m.eigen();
    prop_assume!(!eig.is_degenerate());
    let mu = eig.condition_number().unwrap();
    let a = eig.lambda_plus.re;
    let t = s * 20.0 / a.abs().max(1e-2);
    let r = rho(m, t);
    let lower = (a * t).exp();
    prop_assert!(r >= lower * (1.0 - 1e-9), "ρ({t}) = {r} < {lower}");
    prop_assert!(
        r <= mu * lower * (1.0 + 1e-9),
        "ρ({t}) = {r} > μ e^(at) = {}",
        mu * lower
    );
    Ok(())
}

pub fn envelope_sandwich(cases: u32, det: bool) -> Result<(), String> {
    run(
        cases,
        det,
        (params(), 0.0..50.0f64, 0.0..1.0f64),
        |(p, k2, s)| {
            let m = Linearization::of(&p).unwrap().jk(k2).unwrap();
            prop_assume!(m.spectral_abscissa() < 0.0);
            sandwich(&m, s)
        },
    )?;
    run(cases, det, (stable_matrix(), 0.0..1.0f64), |(m, s)| {
        sandwich(&m, s)
    })
}

/// Right derivative of `ρ` at 0 equals the numerical abscissa within 1e-4.
pub fn initial_slope(cases: u32, det: bool) -> Result<(), String> {
    run(cases, det, stable_matrix(), |m| {
        let gap = m.hermitian_part().discriminant().max(0.0).sqrt();
        prop_assume!(gap > 1e-3 * m.frobenius_norm());
        let h = 1e-4 / m.norm2();
        let d = |t: f64| (rho(&m, t) - 1.0) / t;
        let slope = 2.0 * d(h / 2.0) - d(h);
        prop_assert!(
            (slope - m.numerical_abscissa()).abs() < 1e-4,
            "{slope} vs {}",
            m.numerical_abscissa()
        );
        Ok(())
    })
}

/// `δ ∈ (0, 1]`, the closed form agrees with the eigenvectors, and `δ = 1`
/// exactly for normal matrices.
pub fn non_normality_range(cases: u32, det: bool) -> Result<(), String> {
    run(cases, det, (params(), 0.0..1e4f64), |(p, k2)| {
        let lin = Linearization::of(&p).unwrap();
        if let Ok(delta) = lin.non_normality(k2) {
            prop_assert!(delta > 0.0 && delta <= 1.0, "{delta}");
            let generic = lin.jk(k2).unwrap().eigen().non_normality().unwrap();
            prop_assert!(
                (delta - generic).abs() < 1e-6 * (1.0 + 1.0 / delta),
                "{delta} vs {generic}"
            );
        }
        Ok(())
    })?;
    let normal = (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, any::<bool>());
    run(cases, det, normal, |(a, b, c, symmetric)| {
        let m = if symmetric {
            Matrix2::new(a, b, b, c)
        } else {
            Matrix2::new(a, b, -b, a)
        };
        let eig = m.eigen();
        prop_assume!(!eig.is_degenerate());
        prop_assert_eq!(eig.non_normality(), Some(1.0));
        Ok(())
    })
}

/// On the real branch `χ*` never exceeds the envelope at `t*`.
pub fn chi_star_below_envelope(cases: u32, det: bool) -> Result<(), String> {
    run(cases, det, (params(), 0.0..100.0f64), |(p, k2)| {
        let lin = Linearization::of(&p).unwrap();
        let m = lin.jk(k2).unwrap();
        let eig = m.eigen();
        prop_assume!(eig.is_real() && eig.lambda_plus.re < 0.0);
        let Ok(delta) = lin.non_normality(k2) else {
            return Ok(());
        };
        let Ok(est) = chi_estimate(eig.lambda_plus, eig.lambda_minus, delta) else {
            return Ok(());
        };
        let r = rho(&m, est.t_star);
        prop_assert!(
            est.chi_star <= r + 1e-6,
            "χ* = {} ρ(t*) = {r}",
            est.chi_star
        );
        Ok(())
    })
}

pub fn exponential_semigroup(cases: u32, det: bool) -> Result<(), String> {
    run(
        cases,
        det,
        (stable_matrix(), 0.0..5.0f64, 0.0..5.0f64),
        |(m, t, s)| {
            let lhs = m.exp(t) * m.exp(s);
            let rhs = m.exp(t + s);
            prop_assert!((lhs - rhs).max_abs() < 1e-10 * (1.0 + rhs.max_abs()));
            Ok(())
        },
    )
}

/// Scanner regions agree with the reactive set and with `β_c`; the selected
/// wavenumber lies in the closure of the reactive set.
pub fn regions_consistent(cases: u32, det: bool) -> Result<(), String> {
    run(cases, det, params(), |p| {
        let lin = Linearization::of(&p).unwrap();
        let report = classify_linearization(&lin).unwrap();
        let ht = lin.h_tilde();
        let sampled_reactive = (0..=4000).any(|i| ht.eval(1e-3 * (i * i) as f64 / 40.0) < 0.0);
        if sampled_reactive {
            prop_assert!(report.case != ReactivityCase::NotReactive, "{report:?}");
        }
        if let Some(k2) = select_k2_from(&lin, &report) {
            prop_assert!(k2 >= 0.0);
            let value = ht.eval(k2);
            prop_assert!(
                value <= 1e-9 * (1.0 + ht.a.abs() * k2 * k2),
                "h̃({k2}) = {value}"
            );
        }
        let row = scanner::classify_point(p.q, p.beta, &p).unwrap();
        prop_assert_eq!(
            row.region == Region::TuringUnstable,
            p.beta >= row.beta_c - scanner::BETA_C_TIE
        );
        if row.region == Region::StableReactive {
            prop_assert!(!report.reactive_set.is_empty());
        }
        Ok(())
    })
}

/// Diffusion plus chemotaxis conserves `Σu` and `Σv` to 1e-12 per step.
pub fn transport_mass(cases: u32, det: bool) -> Result<(), String> {
    let strategy = (
        (0.0..3.0f64, 0.05..2.0f64, 0.05..2.0f64),
        4usize..24,
        1usize..=2,
        any::<bool>(),
        any::<u64>(),
        0.0..1.0f64,
    );
    run(
        cases,
        det,
        strategy,
        |((beta, d_u, d_v), nx, dim, neumann, seed, eta)| {
            let p = ModelParams {
                beta,
                d_u,
                d_v,
                ..ModelParams::default()
            };
            let bc = if neumann {
                Boundary::Neumann
            } else {
                Boundary::Periodic
            };
            let cfg = SimConfig {
                dim,
                nx,
                bc,
                seed,
                eta,
                length: 0.2 * nx as f64,
                dt: 1e-3,
                t_final: 1.0,
                ..SimConfig::default()
            };
            let mut grid = initialize(&p, &cfg).unwrap();
            let mut solver = ImexSolver::new(&p, &cfg).unwrap().transport_only();
            for _ in 0..3 {
                let (mu, mv) = (grid.u.iter().sum::<f64>(), grid.v.iter().sum::<f64>());
                solver.step(&mut grid, 0.0).unwrap();
                let (nu, nv) = (grid.u.iter().sum::<f64>(), grid.v.iter().sum::<f64>());
                prop_assert!((nu - mu).abs() <= 1e-12 * mu.abs(), "Σu {mu} -> {nu}");
                prop_assert!((nv - mv).abs() <= 1e-12 * mv.abs(), "Σv {mv} -> {nv}");
            }
            Ok(())
        },
    )
}

fn csv(rows: &[scanner::ScanRow]) -> Vec<u8> {
    let mut out = Vec::new();
    scanner::write_csv(rows, &mut out).unwrap();
    out
}

/// Scan CSV is byte-identical for 1, 4 and all available workers.
pub fn scan_worker_independence(cases: u32, det: bool) -> Result<(), String> {
    let strategy = (
        0.005..0.05f64,
        0.01..0.1f64,
        0.3..2.0f64,
        2usize..12,
        2usize..12,
        any::<bool>(),
    );
    run(cases, det, strategy, |(q_lo, q_span, b_hi, nq, nb, log)| {
        let mut cfg = ScanConfig::new(
            Axis::new(q_lo, q_lo + q_span, nq),
            Axis::new(0.05, b_hi, nb),
            ModelParams::default(),
        );
        cfg.spacing = if log { Spacing::Log } else { Spacing::Linear };
        let reference = csv(&scanner::scan_with(&cfg, Execution::Sequential).unwrap());
        let available = std::thread::available_parallelism().map_or(1, |n| n.get());
        for threads in [1, 4, available] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let rows = pool
                .install(|| scanner::scan_with(&cfg, Execution::Parallel))
                .unwrap();
            prop_assert_eq!(&csv(&rows), &reference, "{} workers", threads);
        }
        Ok(())
    })
}
