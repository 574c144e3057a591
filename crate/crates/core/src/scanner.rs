//! Classification of the `(q, β)` plane: Turing-unstable, stable but
//! reactive, or stable and non-reactive, with the peak-amplification estimate
//! `χ*` and the return-time proxy `ln(1/h(k²))` at the selected wavenumber.

use crate::dispersion::{
    classify_linearization, select_k2_from, turing_summary, Linearization, ReactivityCase,
};
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::model::ModelParams;
use crate::par::{map_indices, Execution};
use crate::transient::chi_estimate;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Points with `β ≥ β_c − BETA_C_TIE` count as Turing-unstable.
pub const BETA_C_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Grid along one parameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    fn validate(&self, key: &'static str, spacing: Spacing) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::config(
                key,
                format!("need at least 2 steps, got {}", self.steps),
            ));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::config(
                key,
                format!("need finite min < max, got {} .. {}", self.min, self.max),
            ));
        }
        if spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::config(key, "log spacing needs a positive minimum"));
        }
        Ok(())
    }

    /// The `i`-th grid value; endpoints are exact.
    pub fn value(&self, i: usize, spacing: Spacing) -> f64 {
        let last = self.steps - 1;
        if i == 0 {
            return self.min;
        }
        if i == last {
            return self.max;
        }
        let s = i as f64 / last as f64;
        match spacing {
            Spacing::Linear => self.min + (self.max - self.min) * s,
            Spacing::Log => self.min * (self.max / self.min).powf(s),
        }
    }

    pub fn values(&self, spacing: Spacing) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i, spacing)).collect()
    }
}

/// Empirical markers of long-lived transients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Flag when `χ*` exceeds this.
    pub chi_star: f64,
    /// Flag when `ln(1/h(k²))` exceeds this.
    pub log_inv_h: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            chi_star: 1.5,
            log_inv_h: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub q: Axis,
    pub beta: Axis,
    /// Template for the remaining parameters; its `q` and `β` are ignored.
    pub fixed: ModelParams,
    pub spacing: Spacing,
    pub thresholds: Thresholds,
}

impl ScanConfig {
    pub fn new(q: Axis, beta: Axis, fixed: ModelParams) -> Self {
        Self {
            q,
            beta,
            fixed,
            spacing: Spacing::Linear,
            thresholds: Thresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.q.validate("q", self.spacing)?;
        self.beta.validate("beta", self.spacing)?;
        if self.beta.min < 0.0 {
            return Err(Error::config("beta", "must be >= 0"));
        }
        if self.q.min <= 0.0 {
            return Err(Error::config("q", "must be > 0"));
        }
        self.fixed.with_q_beta(self.q.min, self.beta.min).validate()
    }

    pub fn len(&self) -> usize {
        self.q.steps * self.beta.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    TuringUnstable,
    StableReactive,
    StableNonReactive,
}

impl Region {
    pub const ALL: [Region; 3] = [
        Region::TuringUnstable,
        Region::StableReactive,
        Region::StableNonReactive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::TuringUnstable => "TuringUnstable",
            Region::StableReactive => "StableReactive",
            Region::StableNonReactive => "StableNonReactive",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub q: f64,
    pub beta: f64,
    pub region: Region,
    pub beta_c: f64,
    pub case: ReactivityCase,
    /// Selected wavenumber (stable-reactive points only).
    pub k2: Option<f64>,
    pub chi_star: Option<f64>,
    /// `ln(1/h(k²))`, present only when `h(k²) > 0`.
    pub log_inv_h: Option<f64>,
    pub flag_chi: bool,
    pub flag_h: bool,
}

/// Classifies one point with the default thresholds.
pub fn classify_point(q: f64, beta: f64, fixed: &ModelParams) -> Result<ScanRow> {
    classify_point_with(q, beta, fixed, &Thresholds::default())
}

pub fn classify_point_with(
    q: f64,
    beta: f64,
    fixed: &ModelParams,
    thresholds: &Thresholds,
) -> Result<ScanRow> {
    let params = fixed.with_q_beta(q, beta);
    let turing = turing_summary(&params)?;
    let lin = Linearization::of(&params)?;
    let report = classify_linearization(&lin)?;
    let mut row = ScanRow {
        q,
        beta,
        region: Region::StableNonReactive,
        beta_c: turing.beta_c,
        case: report.case,
        k2: None,
        chi_star: None,
        log_inv_h: None,
        flag_chi: false,
        flag_h: false,
    };
    if beta >= turing.beta_c - BETA_C_TIE {
        row.region = Region::TuringUnstable;
        return Ok(row);
    }
    if report.case == ReactivityCase::NotReactive {
        return Ok(row);
    }
    row.region = Region::StableReactive;
    let Some(k2) = select_k2_from(&lin, &report) else {
        return Ok(row);
    };
    row.k2 = Some(k2);

    let jk = lin.jk(k2)?;
    let eig = jk.eigen();
    // A defective J_k has no eigenbasis; leave χ* empty rather than fail the sweep.
    if let Ok(delta) = lin.non_normality(k2) {
        if let Ok(est) = chi_estimate(eig.lambda_plus, eig.lambda_minus, delta) {
            row.chi_star = Some(est.chi_star);
        }
    }
    let h = lin.h().eval(k2);
    if h > 0.0 {
        row.log_inv_h = Some(-h.ln());
    }
    row.flag_chi = row.chi_star.is_some_and(|c| c > thresholds.chi_star);
    row.flag_h = row.log_inv_h.is_some_and(|l| l > thresholds.log_inv_h);
    Ok(row)
}

/// Classifies every grid point, `β` varying fastest. The output does not
/// depend on the execution mode or the number of workers.
pub fn scan(config: &ScanConfig) -> Result<Vec<ScanRow>> {
    scan_with(config, Execution::default())
}

pub fn scan_with(config: &ScanConfig, exec: Execution) -> Result<Vec<ScanRow>> {
    config.validate()?;
    let nb = config.beta.steps;
    map_indices(config.len(), exec, |idx| {
        let q = config.q.value(idx / nb, config.spacing);
        let beta = config.beta.value(idx % nb, config.spacing);
        classify_point_with(q, beta, &config.fixed, &config.thresholds)
    })
    .into_iter()
    .collect()
}

pub const CSV_HEADER: &str = "q,beta,region,k2,chi_star,log_inv_h,flag_chi,flag_h";

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

/// One CSV record, without the trailing newline. Missing values are empty.
pub fn csv_record(row: &ScanRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        sig9(row.q),
        sig9(row.beta),
        row.region,
        opt(row.k2),
        opt(row.chi_star),
        opt(row.log_inv_h),
        row.flag_chi as u8,
        row.flag_h as u8,
    )
}

pub fn write_csv<W: Write>(rows: &[ScanRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", csv_record(row))?;
    }
    Ok(())
}

/// Number of rows per region, in [`Region::ALL`] order.
pub fn region_counts(rows: &[ScanRow]) -> [(Region, usize); 3] {
    Region::ALL.map(|r| (r, rows.iter().filter(|row| row.region == r).count()))
}
