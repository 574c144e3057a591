//! Finite-difference simulation of the full MOMOS system on a uniform grid in
//! one or two dimensions.
//!
//! Each step is IMEX: reactions and the conservative chemotaxis flux are
//! explicit, diffusion is backward Euler. The implicit solve diagonalises the
//! discrete Laplacian, by FFT for periodic boundaries and by the DCT-II/III
//! pair (even reflection about the walls) for Neumann boundaries.

use crate::dispersion::Linearization;
use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use crate::model::ModelParams;
use crate::par::{self, Execution};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rustdct::{DctPlanner, TransformType2And3};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Neumann,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(Error::config(
                "bc",
                format!("expected periodic or neumann, got {other:?}"),
            )),
        }
    }
}

/// Run-time settings of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Spatial dimension, 1 or 2.
    pub dim: usize,
    /// Side length of the domain.
    #[serde(rename = "L")]
    pub length: f64,
    /// Cells per side.
    pub nx: usize,
    pub dt: f64,
    /// Final time.
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Standard deviation of the initial perturbation.
    pub eta: f64,
    pub bc: Boundary,
    pub seed: u64,
    /// Steps between recorded samples of `E(u)`.
    pub snapshot_every: usize,
    /// Relative amplitude of the reference cosine that sets the pattern
    /// threshold (see [`pattern_threshold`]).
    pub pattern_amplitude: f64,
}

impl Default for SimConfig {
    /// Square of side 15 with `h = 0.2`, `dt = 0.01` and `T = 500`.
    fn default() -> Self {
        Self {
            dim: 2,
            length: 15.0,
            nx: 75,
            dt: 0.01,
            t_final: 500.0,
            eta: 1e-3,
            bc: Boundary::Periodic,
            seed: 1,
            snapshot_every: 100,
            pattern_amplitude: 0.01,
        }
    }
}

/// Largest relative amplification the discrete step may add to a mode whose
/// semi-discrete dynamics are stable.
const AMPLIFICATION_TOL: f64 = 1e-12;
const VON_NEUMANN_SAMPLES: usize = 4096;

impl SimConfig {
    pub fn h(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Checks the configuration on its own.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.dim, 1 | 2) {
            return Err(Error::config(
                "dim",
                format!("must be 1 or 2, got {}", self.dim),
            ));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::config(
                "L",
                format!("must be finite and > 0, got {}", self.length),
            ));
        }
        if self.nx < 4 {
            return Err(Error::config(
                "nx",
                format!("need at least 4 cells, got {}", self.nx),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(
                "dt",
                format!("must be finite and > 0, got {}", self.dt),
            ));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return Err(Error::config(
                "T",
                format!("must be finite and >= dt, got {}", self.t_final),
            ));
        }
        let steps = self.steps() as f64;
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::config("T", "must be an integer multiple of dt"));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::config(
                "eta",
                format!("must be finite and >= 0, got {}", self.eta),
            ));
        }
        if self.snapshot_every == 0 {
            return Err(Error::config("snapshot_every", "must be >= 1"));
        }
        if !(self.pattern_amplitude.is_finite() && self.pattern_amplitude > 0.0) {
            return Err(Error::config("pattern_amplitude", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Checks the configuration against the model: besides [`Self::validate`],
    /// the linearised step must not amplify any grid mode that the
    /// semi-discrete system damps.
    ///
    /// For a mode with discrete Laplacian symbol `κ` the step acts on
    /// `(û, v̂)` as `G = diag(1/(1 + dt D κ)) (I + dt (J0 + κ β ℓ(u0) E12))`,
    /// and the semi-discrete operator is `J0 − κ diag(D) + κ β ℓ(u0) E12`.
    pub fn validate_for(&self, params: &ModelParams) -> Result<()> {
        self.validate()?;
        params.validate()?;
        let lin = Linearization::of(params)?;
        let kappa_max = self.dim as f64 * 4.0 / (self.h() * self.h());
        for i in 0..=VON_NEUMANN_SAMPLES {
            let kappa = kappa_max * i as f64 / VON_NEUMANN_SAMPLES as f64;
            let semi = lin.jk(kappa)?;
            if semi.spectral_abscissa() >= 0.0 {
                continue;
            }
            let g = step_amplification(&lin, kappa, self.dt);
            let radius = g.eigenvalues().0.norm().max(g.eigenvalues().1.norm());
            if radius > 1.0 + AMPLIFICATION_TOL {
                return Err(Error::config(
                    "dt",
                    format!(
                        "time step {} amplifies a damped mode (κ = {kappa:.4}, |G| = {radius:.6}); reduce dt or refine less",
                        self.dt
                    ),
                ));
            }
        }
        Ok(())
    }

    /// `h²/(8 max(D_u, D_v))`: a conservative explicit-diffusion bound, kept
    /// for reference. The implicit diffusion does not need it.
    pub fn explicit_reference_bound(&self, params: &ModelParams) -> f64 {
        self.h() * self.h() / (4.0 * params.d_u.max(params.d_v) * 2.0)
    }
}

/// Linearised one-step map for a mode with Laplacian symbol `κ`.
pub fn step_amplification(lin: &Linearization, kappa: f64, dt: f64) -> Matrix2 {
    let explicit = Matrix2::identity()
        + Matrix2::new(
            lin.j0.a11,
            lin.j0.a12 + kappa * lin.chemo,
            lin.j0.a21,
            lin.j0.a22,
        )
        .scale(dt);
    let iu = 1.0 / (1.0 + dt * lin.d_u * kappa);
    let iv = 1.0 / (1.0 + dt * lin.d_v * kappa);
    Matrix2::new(
        iu * explicit.a11,
        iu * explicit.a12,
        iv * explicit.a21,
        iv * explicit.a22,
    )
}

/// Cell values of `u` and `v`, row-major (`x` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub dim: usize,
    pub nx: usize,
    pub length: f64,
    pub bc: Boundary,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldGrid {
    pub fn uniform(cfg: &SimConfig, u: f64, v: f64) -> Self {
        let n = cfg.nx.pow(cfg.dim as u32);
        Self {
            dim: cfg.dim,
            nx: cfg.nx,
            length: cfg.length,
            bc: cfg.bc,
            u: vec![u; n],
            v: vec![v; n],
        }
    }

    pub fn h(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn cells(&self) -> usize {
        self.u.len()
    }

    /// Area (or length) of the domain.
    pub fn measure(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// Largest `|u|`; `NaN` if any entry is `NaN`.
    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m: f64, x| {
            if x.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(x.abs())
            }
        })
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Centre coordinate of cell `i` along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h()
    }
}

/// Homogeneous equilibrium plus i.i.d. `N(0, η²)` noise per cell, drawn for
/// `u` first and then for `v`.
pub fn initialize(params: &ModelParams, cfg: &SimConfig) -> Result<FieldGrid> {
    initialize_stream(params, cfg, 0)
}

/// As [`initialize`], drawing from stream `stream` of the seeded generator so
/// that batch jobs get independent noise.
pub fn initialize_stream(params: &ModelParams, cfg: &SimConfig, stream: u64) -> Result<FieldGrid> {
    cfg.validate()?;
    let eq = params.equilibrium()?;
    let mut grid = FieldGrid::uniform(cfg, eq.u0, eq.v0);
    if cfg.eta > 0.0 {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        let normal = Normal::new(0.0, cfg.eta).map_err(|e| Error::config("eta", e.to_string()))?;
        for x in grid.u.iter_mut().chain(grid.v.iter_mut()) {
            *x += normal.sample(&mut rng);
        }
    }
    Ok(grid)
}

/// `E(u) = (∫ |∇u|²)^{1/2}`, from forward differences across every cell face
/// (wrap-around faces included for periodic grids, wall faces carry no
/// gradient for Neumann grids), each weighted by the cell measure.
pub fn heterogeneity(grid: &FieldGrid) -> f64 {
    let n = grid.nx;
    let h = grid.h();
    let periodic = grid.bc == Boundary::Periodic;
    let row_sum = |row: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n - 1 {
            let d = row[i + 1] - row[i];
            s += d * d;
        }
        if periodic {
            let d = row[0] - row[n - 1];
            s += d * d;
        }
        s
    };
    let mut sum = 0.0;
    match grid.dim {
        1 => sum += row_sum(&grid.u),
        _ => {
            for row in grid.u.chunks_exact(n) {
                sum += row_sum(row);
            }
            for j in 0..n {
                let next = if j + 1 < n {
                    j + 1
                } else if periodic {
                    0
                } else {
                    continue;
                };
                let (a, b) = (
                    &grid.u[j * n..(j + 1) * n],
                    &grid.u[next * n..(next + 1) * n],
                );
                sum += a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>();
            }
        }
    }
    (sum / (h * h) * h.powi(grid.dim as i32)).sqrt()
}

/// `E` of `u0 (1 + a cos(k_c x))` over the domain, `a·u0·k_c·sqrt(|Ω|/2)`,
/// where `k_c² = max(k_min, (2π/L)²)` is the least damped wavenumber that
/// fits the domain. A final state above this is counted as patterned.
pub fn pattern_threshold(params: &ModelParams, cfg: &SimConfig) -> Result<f64> {
    let eq = params.equilibrium()?;
    let lin = Linearization::of(params)?;
    let k_lowest = 2.0 * std::f64::consts::PI / cfg.length;
    let kc = lin.k_min().max(k_lowest * k_lowest).sqrt();
    let measure = cfg.length.powi(cfg.dim as i32);
    Ok(cfg.pattern_amplitude * eq.u0 * kc * (measure / 2.0).sqrt())
}

enum Transform {
    Periodic {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        scratch: Vec<Complex64>,
    },
    Neumann {
        dct: Arc<dyn TransformType2And3<f64>>,
        scratch: Vec<f64>,
    },
}

/// Time stepper with preplanned transforms and work buffers.
pub struct ImexSolver {
    params: ModelParams,
    dim: usize,
    nx: usize,
    h: f64,
    dt: f64,
    bc: Boundary,
    exec: Execution,
    reactions: bool,
    /// `1/(1 + dt D κ)` for each transform coefficient, `u` then `v`.
    inv_u: Vec<f64>,
    inv_v: Vec<f64>,
    transform: Transform,
    packed: Vec<Complex64>,
    work_u: Vec<f64>,
    work_v: Vec<f64>,
}

impl ImexSolver {
    pub fn new(params: &ModelParams, cfg: &SimConfig) -> Result<Self> {
        cfg.validate_for(params)?;
        let n = cfg.nx;
        let h = cfg.h();
        let symbol: Vec<f64> = (0..n)
            .map(|m| {
                let angle = match cfg.bc {
                    Boundary::Periodic => std::f64::consts::PI * m as f64 / n as f64,
                    Boundary::Neumann => std::f64::consts::PI * m as f64 / (2 * n) as f64,
                };
                4.0 / (h * h) * angle.sin().powi(2)
            })
            .collect();
        let kappa: Vec<f64> = match cfg.dim {
            1 => symbol.clone(),
            _ => (0..n * n)
                .map(|idx| symbol[idx / n] + symbol[idx % n])
                .collect(),
        };
        let inv = |d: f64| {
            kappa
                .iter()
                .map(|k| 1.0 / (1.0 + cfg.dt * d * k))
                .collect::<Vec<_>>()
        };
        let transform = match cfg.bc {
            Boundary::Periodic => {
                let mut planner = FftPlanner::new();
                let forward = planner.plan_fft_forward(n);
                let inverse = planner.plan_fft_inverse(n);
                let len = forward
                    .get_inplace_scratch_len()
                    .max(inverse.get_inplace_scratch_len());
                Transform::Periodic {
                    forward,
                    inverse,
                    scratch: vec![Complex64::default(); len],
                }
            }
            Boundary::Neumann => {
                let dct = DctPlanner::new().plan_dct2(n);
                let len = dct.get_scratch_len();
                Transform::Neumann {
                    dct,
                    scratch: vec![0.0; len],
                }
            }
        };
        let cells = kappa.len();
        Ok(Self {
            params: *params,
            dim: cfg.dim,
            nx: n,
            h,
            dt: cfg.dt,
            bc: cfg.bc,
            exec: Execution::default(),
            reactions: true,
            inv_u: inv(params.d_u),
            inv_v: inv(params.d_v),
            transform,
            packed: vec![Complex64::default(); cells],
            work_u: vec![0.0; cells],
            work_v: vec![0.0; cells],
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Drops the reaction terms, leaving diffusion and chemotaxis only.
    pub fn transport_only(mut self) -> Self {
        self.reactions = false;
        self
    }

    /// Advances `grid` by one step. Fails with [`Error::BlowUp`] (reporting
    /// `time + dt`) when a non-finite value appears.
    pub fn step(&mut self, grid: &mut FieldGrid, time: f64) -> Result<()> {
        if grid.dim != self.dim || grid.nx != self.nx || grid.bc != self.bc {
            return Err(Error::config(
                "grid",
                "grid does not match the solver configuration",
            ));
        }
        self.explicit_part(grid);
        match self.bc {
            Boundary::Periodic => self.implicit_periodic(grid),
            Boundary::Neumann => self.implicit_neumann(grid),
        }
        if !grid.is_finite() {
            return Err(Error::BlowUp {
                time: time + self.dt,
                max_abs_u: grid.max_abs_u(),
            });
        }
        Ok(())
    }

    /// Writes `u + dt(−β∇·(ℓ(u)∇v) + f)` and `v + dt g` into `packed`.
    fn explicit_part(&mut self, grid: &FieldGrid) {
        let n = self.nx;
        let (dim, h, dt, periodic, reactions) = (
            self.dim,
            self.h,
            self.dt,
            self.bc == Boundary::Periodic,
            self.reactions,
        );
        let p = self.params;
        let (u, v) = (&grid.u, &grid.v);
        // Flux across the face between cells a and b (b on the positive side).
        let flux = |a: usize, b: usize| {
            p.beta * 0.5 * (p.ell.eval(u[a]) + p.ell.eval(u[b])) * (v[b] - v[a]) / h
        };
        // Indices of the negative and positive neighbours along an axis, or
        // None at a Neumann wall.
        let neighbours = |i: usize| -> (Option<usize>, Option<usize>) {
            let lo = if i > 0 {
                Some(i - 1)
            } else if periodic {
                Some(n - 1)
            } else {
                None
            };
            let hi = if i + 1 < n {
                Some(i + 1)
            } else if periodic {
                Some(0)
            } else {
                None
            };
            (lo, hi)
        };
        let rows = if dim == 1 { 1 } else { n };
        let rows_per_task = rows.div_ceil(par::workers().max(1)).max(1);
        par::for_each_chunk(
            &mut self.packed,
            rows_per_task * n,
            self.exec,
            |chunk_idx, out| {
                for (offset, cell) in out.iter_mut().enumerate() {
                    let idx = chunk_idx * rows_per_task * n + offset;
                    let (i, j) = (idx % n, idx / n);
                    let mut div = 0.0;
                    let (lo, hi) = neighbours(i);
                    let right = hi.map_or(0.0, |hi| flux(idx, j * n + hi));
                    let left = lo.map_or(0.0, |lo| flux(j * n + lo, idx));
                    div += right - left;
                    if dim == 2 {
                        let (lo, hi) = neighbours(j);
                        let up = hi.map_or(0.0, |hi| flux(idx, hi * n + i));
                        let down = lo.map_or(0.0, |lo| flux(lo * n + i, idx));
                        div += up - down;
                    }
                    let (ui, vi) = (u[idx], v[idx]);
                    let mut du = -div / h;
                    let mut dv = 0.0;
                    if reactions {
                        du += p.f(ui, vi);
                        dv += p.g(ui, vi);
                    }
                    *cell = Complex64::new(ui + dt * du, vi + dt * dv);
                }
            },
        );
    }

    fn implicit_periodic(&mut self, grid: &mut FieldGrid) {
        let Transform::Periodic {
            forward,
            inverse,
            scratch,
        } = &mut self.transform
        else {
            unreachable!("periodic solver without an FFT plan");
        };
        let n = self.nx;
        let exec = self.exec;
        let buf = &mut self.packed;
        fft_rows(forward.as_ref(), buf, n, exec, scratch);
        if self.dim == 2 {
            transpose(buf, n);
            fft_rows(forward.as_ref(), buf, n, exec, scratch);
        }
        // With z = u + i v and real even multipliers a (for u) and b (for v):
        // â = (Z_k + conj Z_{-k})/2, so a·û + i b·v̂ = ((a+b)/2) Z_k + ((a−b)/2) conj Z_{-k}.
        let same = self.inv_u == self.inv_v;
        let neg = |m: usize| if m == 0 { 0 } else { n - m };
        let mirror = |idx: usize| -> usize {
            if self.dim == 1 {
                neg(idx)
            } else {
                neg(idx / n) * n + neg(idx % n)
            }
        };
        let scale = 1.0 / buf.len() as f64;
        for idx in 0..buf.len() {
            let m = mirror(idx);
            if same {
                buf[idx] *= self.inv_u[idx] * scale;
                continue;
            }
            if m < idx {
                continue;
            }
            let (zk, zm) = (buf[idx], buf[m]);
            let (sum_k, diff_k) = (
                0.5 * (self.inv_u[idx] + self.inv_v[idx]),
                0.5 * (self.inv_u[idx] - self.inv_v[idx]),
            );
            let (sum_m, diff_m) = (
                0.5 * (self.inv_u[m] + self.inv_v[m]),
                0.5 * (self.inv_u[m] - self.inv_v[m]),
            );
            buf[idx] = (zk * sum_k + zm.conj() * diff_k) * scale;
            if m != idx {
                buf[m] = (zm * sum_m + zk.conj() * diff_m) * scale;
            }
        }
        fft_rows(inverse.as_ref(), buf, n, exec, scratch);
        if self.dim == 2 {
            transpose(buf, n);
            fft_rows(inverse.as_ref(), buf, n, exec, scratch);
        }
        for ((z, u), v) in buf.iter().zip(grid.u.iter_mut()).zip(grid.v.iter_mut()) {
            *u = z.re;
            *v = z.im;
        }
    }

    fn implicit_neumann(&mut self, grid: &mut FieldGrid) {
        let Transform::Neumann { dct, scratch } = &mut self.transform else {
            unreachable!("Neumann solver without a DCT plan");
        };
        let n = self.nx;
        for (k, z) in self.packed.iter().enumerate() {
            self.work_u[k] = z.re;
            self.work_v[k] = z.im;
        }
        // DCT-III after DCT-II returns the input scaled by n/2 per axis.
        let scale = (2.0 / n as f64).powi(self.dim as i32);
        for (buf, inv) in [
            (&mut self.work_u, &self.inv_u),
            (&mut self.work_v, &self.inv_v),
        ] {
            dct_rows(dct.as_ref(), buf, n, self.exec, scratch, false);
            if self.dim == 2 {
                transpose(buf, n);
                dct_rows(dct.as_ref(), buf, n, self.exec, scratch, false);
            }
            for (x, m) in buf.iter_mut().zip(inv.iter()) {
                *x *= m * scale;
            }
            dct_rows(dct.as_ref(), buf, n, self.exec, scratch, true);
            if self.dim == 2 {
                transpose(buf, n);
                dct_rows(dct.as_ref(), buf, n, self.exec, scratch, true);
            }
        }
        grid.u.copy_from_slice(&self.work_u);
        grid.v.copy_from_slice(&self.work_v);
    }
}

fn fft_rows(
    fft: &dyn Fft<f64>,
    buf: &mut [Complex64],
    n: usize,
    exec: Execution,
    scratch: &mut [Complex64],
) {
    let rows = buf.len() / n;
    if exec.is_parallel() && rows > 1 {
        let per_task = rows.div_ceil(par::workers()).max(1);
        par::for_each_chunk(buf, per_task * n, exec, |_, chunk| {
            let mut local = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(chunk, &mut local);
        });
    } else {
        fft.process_with_scratch(buf, scratch);
    }
}

fn dct_rows(
    dct: &dyn TransformType2And3<f64>,
    buf: &mut [f64],
    n: usize,
    exec: Execution,
    scratch: &mut [f64],
    inverse: bool,
) {
    let run = |chunk: &mut [f64], scratch: &mut [f64]| {
        for row in chunk.chunks_exact_mut(n) {
            if inverse {
                dct.process_dct3_with_scratch(row, scratch);
            } else {
                dct.process_dct2_with_scratch(row, scratch);
            }
        }
    };
    let rows = buf.len() / n;
    if exec.is_parallel() && rows > 1 {
        let per_task = rows.div_ceil(par::workers()).max(1);
        par::for_each_chunk(buf, per_task * n, exec, |_, chunk| {
            let mut local = vec![0.0; dct.get_scratch_len()];
            run(chunk, &mut local);
        });
    } else {
        run(buf, scratch);
    }
}

fn transpose<T: Copy>(buf: &mut [T], n: usize) {
    for j in 0..n {
        for i in j + 1..n {
            buf.swap(j * n + i, i * n + j);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Patterned,
    Homogeneous,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Patterned => "Patterned",
            Verdict::Homogeneous => "Homogeneous",
            Verdict::Undecided => "Undecided",
        })
    }
}

/// Behaviour of `E` over the final tenth of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauStats {
    pub window_start: f64,
    pub samples: usize,
    pub mean: f64,
    /// Least-squares slope of `E` against time.
    pub slope: f64,
    /// `slope / mean`, per unit time.
    pub relative_slope: f64,
}

/// Largest `|relative slope|` of `E` for which a run counts as settled.
pub const PLATEAU_TOL: f64 = 1e-3;

/// Lowest value of `u` seen and when it first fell below `−1e-8·u0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativity {
    pub min_u: f64,
    pub first_violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// `(t, E(u))` at every recorded sample, including `t = 0` and `T`.
    pub e_series: Vec<(f64, f64)>,
    pub final_fields: FieldGrid,
    pub verdict: Verdict,
    pub plateau: PlateauStats,
    pub threshold: f64,
    /// `E` after ten steps from the initial noise, reported for reference.
    pub relaxed_noise_e: f64,
    pub negativity: Negativity,
}

impl SimResult {
    pub fn final_e(&self) -> f64 {
        self.e_series.last().map_or(0.0, |&(_, e)| e)
    }
}

pub fn plateau_stats(series: &[(f64, f64)], t_final: f64) -> PlateauStats {
    let window_start = 0.9 * t_final;
    let window: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window_start - 1e-9)
        .collect();
    let k = window.len() as f64;
    let mean = window.iter().map(|&(_, e)| e).sum::<f64>() / k;
    let slope = if window.len() < 2 {
        f64::NAN
    } else {
        let tm = window.iter().map(|&(t, _)| t).sum::<f64>() / k;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(t, e) in &window {
            sxy += (t - tm) * (e - mean);
            sxx += (t - tm) * (t - tm);
        }
        sxy / sxx
    };
    PlateauStats {
        window_start,
        samples: window.len(),
        mean,
        slope,
        relative_slope: if mean > 0.0 { slope / mean } else { 0.0 },
    }
}

/// Homogeneous when the final `E` is at most the threshold; patterned when
/// it is above and `E` has settled; undecided otherwise.
pub fn verdict(final_e: f64, threshold: f64, plateau: &PlateauStats) -> Verdict {
    if final_e <= threshold {
        Verdict::Homogeneous
    } else if plateau.relative_slope.abs() < PLATEAU_TOL {
        Verdict::Patterned
    } else {
        Verdict::Undecided
    }
}

/// Integrates from seeded random initial data to `T`.
pub fn run(params: &ModelParams, cfg: &SimConfig) -> Result<SimResult> {
    let init = initialize(params, cfg)?;
    run_from(params, cfg, init, Execution::default(), |_, _, _| {})
}

/// Integrates from `init`, calling `observe(step, t, grid)` at every sample.
pub fn run_from(
    params: &ModelParams,
    cfg: &SimConfig,
    init: FieldGrid,
    exec: Execution,
    mut observe: impl FnMut(usize, f64, &FieldGrid),
) -> Result<SimResult> {
    let mut solver = ImexSolver::new(params, cfg)?.with_execution(exec);
    let threshold = pattern_threshold(params, cfg)?;
    let u0 = params.equilibrium()?.u0;
    let steps = cfg.steps();
    let mut grid = init;
    let mut e_series = vec![(0.0, heterogeneity(&grid))];
    observe(0, 0.0, &grid);
    let mut negativity = Negativity {
        min_u: grid.min_u(),
        first_violation: None,
    };
    let mut relaxed_noise_e = f64::NAN;
    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * cfg.dt;
        solver.step(&mut grid, t_prev)?;
        let t = step as f64 * cfg.dt;
        let min_u = grid.min_u();
        negativity.min_u = negativity.min_u.min(min_u);
        if negativity.first_violation.is_none() && min_u < -1e-8 * u0 {
            negativity.first_violation = Some(t);
        }
        if step == 10 {
            relaxed_noise_e = heterogeneity(&grid);
        }
        if step % cfg.snapshot_every == 0 || step == steps {
            e_series.push((t, heterogeneity(&grid)));
            observe(step, t, &grid);
        }
    }
    let plateau = plateau_stats(&e_series, cfg.t_final);
    let final_e = e_series.last().map_or(0.0, |&(_, e)| e);
    Ok(SimResult {
        verdict: verdict(final_e, threshold, &plateau),
        e_series,
        final_fields: grid,
        plateau,
        threshold,
        relaxed_noise_e,
        negativity,
    })
}

/// One simulation in a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimJob {
    pub params: ModelParams,
    pub config: SimConfig,
}

/// Runs independent simulations; job `i` draws its noise from stream `i` of
/// its seed. Jobs are spread over workers and each runs sequentially inside.
pub fn run_batch(jobs: &[SimJob], exec: Execution) -> Vec<Result<SimResult>> {
    par::map_indices(jobs.len(), exec, |i| {
        let job = &jobs[i];
        let init = initialize_stream(&job.params, &job.config, i as u64)?;
        run_from(
            &job.params,
            &job.config,
            init,
            Execution::Sequential,
            |_, _, _| {},
        )
    })
}

/// Writes the portable snapshot: one ASCII line `dim nx L field_count`, then
/// `u` and `v` as row-major little-endian `f64`.
pub fn write_snapshot<W: Write>(grid: &FieldGrid, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {} {} 2", grid.dim, grid.nx, grid.length)?;
    for x in grid.u.iter().chain(&grid.v) {
        out.write_all(&x.to_le_bytes())?;
    }
    out.flush()
}

/// Reads a snapshot written by [`write_snapshot`]. The boundary condition is
/// not stored and must be supplied.
pub fn read_snapshot<R: BufRead>(mut input: R, bc: Boundary) -> Result<FieldGrid> {
    let bad = |reason: String| Error::config("snapshot", reason);
    let mut header = String::new();
    input
        .read_line(&mut header)
        .map_err(|e| bad(e.to_string()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [dim, nx, length, fields] = parts.as_slice() else {
        return Err(bad(format!("malformed header {header:?}")));
    };
    let dim: usize = dim.parse().map_err(|_| bad(format!("bad dim {dim:?}")))?;
    let nx: usize = nx.parse().map_err(|_| bad(format!("bad nx {nx:?}")))?;
    let length: f64 = length
        .parse()
        .map_err(|_| bad(format!("bad L {length:?}")))?;
    let fields: usize = fields
        .parse()
        .map_err(|_| bad(format!("bad field count {fields:?}")))?;
    if !matches!(dim, 1 | 2) || fields != 2 {
        return Err(bad(format!("unsupported layout dim={dim} fields={fields}")));
    }
    let cells = nx.pow(dim as u32);
    let mut bytes = vec![0u8; 2 * cells * 8];
    input
        .read_exact(&mut bytes)
        .map_err(|e| bad(e.to_string()))?;
    let mut values = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")));
    let u: Vec<f64> = values.by_ref().take(cells).collect();
    let v: Vec<f64> = values.collect();
    Ok(FieldGrid {
        dim,
        nx,
        length,
        bc,
        u,
        v,
    })
}
