//! Concentric-ball quantities: energy `D`, boundary mass `H`, the Almgren
//! frequency and its truncated form, the Weiss family and the
//! epiperimetric check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ball_energy, sphere_mass, BallSpec, Grid, GridFunction};
use crate::rescale::{homogeneous_replacement, rescale_field, RescaleKind, RescaleSpec};
use crate::solver::{signorini_replacement, SolveOptions};

/// `H` below this multiple of `scale^2` is treated as zero.
pub const DEGENERACY_FLOOR: f64 = 1e-14;
/// Default slack for monotonicity checks, relative to the field scale.
pub const MONOTONICITY_SLACK: f64 = 1e-3;
/// Minimum number of ladder rungs for `frequency_limit`.
pub const MIN_LIMIT_RUNGS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeissParams {
    pub dim: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub kappa0: f64,
    /// Effective admissible radius, `min(configured, (2b)^{-1/α})`.
    pub t0: f64,
}

impl WeissParams {
    pub fn new(dim: usize, alpha: f64, kappa: f64, kappa0: f64, t0: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::param(format!("alpha {alpha} outside (0, 2)")));
        }
        if !(kappa0 >= 2.0 && kappa0.is_finite()) {
            return Err(Error::param(format!("kappa0 {kappa0} below 2")));
        }
        if !(kappa > 0.0 && kappa < kappa0) {
            return Err(Error::param(format!("kappa {kappa} outside (0, kappa0)")));
        }
        if !(t0 > 0.0) {
            return Err(Error::param(format!("t0 {t0} must be positive")));
        }
        let mut p = Self {
            dim,
            alpha,
            kappa,
            kappa0,
            t0,
        };
        p.t0 = t0.min((2.0 * p.b()).powf(-1.0 / alpha));
        Ok(p)
    }

    pub fn a(&self) -> f64 {
        (self.dim as f64 + 2.0 * self.kappa - 2.0) / self.alpha
    }

    pub fn b(&self) -> f64 {
        (self.dim as f64 + 2.0 * self.kappa0) / self.alpha
    }

    /// Same gauge and truncation with another homogeneity.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.dim, self.alpha, kappa, self.kappa0, self.t0)
    }

    /// `1 - b r^α`.
    pub fn correction(&self, r: f64) -> f64 {
        1.0 - self.b() * r.powf(self.alpha)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r > self.t0 * (1.0 + 1e-12) {
            return Err(Error::param(format!("radius {r} above t0 = {}", self.t0)));
        }
        Ok(())
    }
}

/// Exponents quoted for reference; only `beta` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityParams {
    pub alpha: f64,
    pub gauge_constant: f64,
    pub beta: f64,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
}

impl RegularityParams {
    pub fn new(dim: usize, alpha: f64, gauge_constant: f64) -> Self {
        Self {
            alpha,
            gauge_constant,
            beta: alpha / (4.0 * (2.0 * dim as f64 + alpha)),
            delta: None,
            gamma: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self.gamma = Some(delta / (delta + 2.0));
        self
    }
}

fn degeneracy_floor(u: &GridFunction) -> f64 {
    DEGENERACY_FLOOR * u.scale().powi(2)
}

/// `(D, H)` on the ball.
pub fn energy_and_mass(u: &GridFunction, ball: &BallSpec) -> Result<(f64, f64)> {
    Ok((ball_energy(u, ball)?, sphere_mass(u, ball)?))
}

/// `frequency`: `N = r D / H`.
pub fn frequency(u: &GridFunction, ball: &BallSpec) -> Result<f64> {
    let (d, h) = energy_and_mass(u, ball)?;
    if h <= degeneracy_floor(u) {
        return Err(Error::DegenerateBoundaryMass {
            radius: ball.radius(),
        });
    }
    Ok(ball.radius() * d / h)
}

/// `min(N / (1 - b r^α), κ₀)`.
pub fn truncate(n: f64, r: f64, params: &WeissParams) -> f64 {
    let c = params.correction(r);
    if c <= 0.0 {
        return params.kappa0;
    }
    (n / c).min(params.kappa0)
}

/// `truncated_frequency`: `N̂_{κ₀}`.
pub fn truncated_frequency(u: &GridFunction, ball: &BallSpec, params: &WeissParams) -> Result<f64> {
    params.check_radius(ball.radius())?;
    Ok(truncate(frequency(u, ball)?, ball.radius(), params))
}

/// `W_κ` from `D` and `H`.
pub fn weiss_from(d: f64, h: f64, t: f64, params: &WeissParams) -> f64 {
    let n = params.dim as f64;
    let k = params.kappa;
    (params.a() * t.powf(params.alpha)).exp() / t.powf(n + 2.0 * k - 2.0)
        * (d - k * params.correction(t) * h / t)
}

/// `weiss`: `W_κ(t)` with the exponential and `(1 - b t^α)` corrections.
pub fn weiss(u: &GridFunction, ball: &BallSpec, params: &WeissParams) -> Result<f64> {
    params.check_radius(ball.radius())?;
    let (d, h) = energy_and_mass(u, ball)?;
    Ok(weiss_from(d, h, ball.radius(), params))
}

/// `weiss0`: `D(1) - κ H(1)` on the unit ball at the origin.
pub fn weiss0(w: &GridFunction, kappa: f64) -> Result<f64> {
    let ball = BallSpec::origin(w.grid().dim(), 1.0)?;
    let (d, h) = energy_and_mass(w, &ball)?;
    Ok(d - kappa * h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub r: f64,
    pub h: f64,
    pub d: f64,
    pub n: f64,
    pub ntilde: f64,
    pub nhat: f64,
    /// One entry per profile κ.
    pub weiss: Vec<f64>,
    pub m: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    pub kappas: Vec<f64>,
    pub rows: Vec<ProfileRow>,
}

/// Column suffix for a homogeneity: `1.5 -> 1p5`.
pub fn kappa_label(kappa: f64) -> String {
    format!("{kappa}").replace('.', "p")
}

fn parse_kappa_label(label: &str) -> Result<f64> {
    label
        .replace('p', ".")
        .parse()
        .map_err(|_| Error::parse(format!("bad kappa label {label:?}")))
}

impl FrequencyProfile {
    pub fn header(&self) -> String {
        let mut cols = vec!["r", "H", "D", "N", "Ntilde", "Nhat"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        cols.extend(self.kappas.iter().map(|k| format!("W_{}", kappa_label(*k))));
        cols.extend(self.kappas.iter().map(|k| format!("m_{}", kappa_label(*k))));
        cols.push("degenerate".into());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            let mut fields: Vec<String> = [row.r, row.h, row.d, row.n, row.ntilde, row.nhat]
                .iter()
                .chain(&row.weiss)
                .chain(&row.m)
                .map(|v| v.to_string())
                .collect();
            fields.push(row.degenerate.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse("empty profile CSV"))?;
        let cols: Vec<&str> = header.split(',').collect();
        let fixed = ["r", "H", "D", "N", "Ntilde", "Nhat"];
        if cols.len() < fixed.len() + 1
            || cols[..fixed.len()] != fixed
            || cols.last() != Some(&"degenerate")
        {
            return Err(Error::parse("unexpected profile CSV header"));
        }
        let middle = &cols[fixed.len()..cols.len() - 1];
        if !middle.len().is_multiple_of(2) {
            return Err(Error::parse("unbalanced W/m columns"));
        }
        let nk = middle.len() / 2;
        let mut kappas = Vec::with_capacity(nk);
        for (w, m) in middle[..nk].iter().zip(&middle[nk..]) {
            let kw = w
                .strip_prefix("W_")
                .ok_or_else(|| Error::parse(format!("expected W_ column, got {w:?}")))?;
            let km = m
                .strip_prefix("m_")
                .ok_or_else(|| Error::parse(format!("expected m_ column, got {m:?}")))?;
            if kw != km {
                return Err(Error::parse("W and m columns disagree"));
            }
            kappas.push(parse_kappa_label(kw)?);
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(Error::parse(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    f.len(),
                    cols.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::parse(format!("bad number {s:?} in row {}", lineno + 2)))
            };
            let nums = f[..f.len() - 1]
                .iter()
                .map(|s| num(s))
                .collect::<Result<Vec<_>>>()?;
            let degenerate = match *f.last().unwrap() {
                "true" => true,
                "false" => false,
                other => return Err(Error::parse(format!("bad flag {other:?}"))),
            };
            rows.push(ProfileRow {
                r: nums[0],
                h: nums[1],
                d: nums[2],
                n: nums[3],
                ntilde: nums[4],
                nhat: nums[5],
                weiss: nums[6..6 + nk].to_vec(),
                m: nums[6 + nk..].to_vec(),
                degenerate,
            });
        }
        Ok(Self { kappas, rows })
    }

    pub fn column_nhat(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.nhat).collect()
    }

    pub fn column_weiss(&self, kappa: f64) -> Option<Vec<f64>> {
        let i = self.kappas.iter().position(|k| *k == kappa)?;
        Some(self.rows.iter().map(|r| r.weiss[i]).collect())
    }
}

/// `profile`: all concentric-ball quantities on the given radii. Radii
/// below `4h` and radii with `H` under the floor are flagged degenerate;
/// radii beyond `t0` carry `NaN` in the gauge-corrected columns.
pub fn profile(
    u: &GridFunction,
    center: &[f64],
    radii: &[f64],
    params: &WeissParams,
    kappas: &[f64],
) -> Result<FrequencyProfile> {
    if radii.is_empty() {
        return Err(Error::param("profile needs at least one radius"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("profile radii must be strictly increasing"));
    }
    let grid = u.grid();
    let min_r = crate::grid::MIN_RADIUS_CELLS * grid.spacing();
    let wparams = kappas
        .iter()
        .map(|k| params.with_kappa(*k))
        .collect::<Result<Vec<_>>>()?;
    let floor = degeneracy_floor(u);
    let n = grid.dim() as f64;
    let rows = radii
        .par_iter()
        .map(|&r| -> Result<ProfileRow> {
            let nan_row = |h: f64, d: f64| ProfileRow {
                r,
                h,
                d,
                n: f64::NAN,
                ntilde: f64::NAN,
                nhat: f64::NAN,
                weiss: vec![f64::NAN; kappas.len()],
                m: vec![f64::NAN; kappas.len()],
                degenerate: true,
            };
            if r < min_r * (1.0 - 1e-12) {
                return Ok(nan_row(f64::NAN, f64::NAN));
            }
            let ball = BallSpec::new(center, r)?;
            let (d, h) = energy_and_mass(u, &ball)?;
            let in_range = r <= params.t0 * (1.0 + 1e-12);
            let weiss = wparams
                .iter()
                .map(|p| if in_range { weiss_from(d, h, r, p) } else { f64::NAN })
                .collect();
            if h <= floor {
                return Ok(ProfileRow {
                    weiss,
                    ..nan_row(h, d)
                });
            }
            let freq = r * d / h;
            let (ntilde, nhat) = if in_range {
                (freq / params.correction(r), truncate(freq, r, params))
            } else {
                (f64::NAN, f64::NAN)
            };
            let m = kappas
                .iter()
                .map(|k| (h / r.powf(n + 2.0 * k - 1.0)).sqrt())
                .collect();
            Ok(ProfileRow {
                r,
                h,
                d,
                n: freq,
                ntilde,
                nhat,
                weiss,
                m,
                degenerate: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyProfile {
        kappas: kappas.to_vec(),
        rows,
    })
}

/// Geometric ladder `r_max 2^{-k}` down to `4h`, returned increasing.
/// `r_max` is `t0` capped by the largest admissible ball at `center`.
pub fn limit_ladder(grid: &Grid, center: &[f64], params: &WeissParams) -> Vec<f64> {
    let h = grid.spacing();
    let reach = (0..grid.dim() - 1).fold(0.0f64, |m, k| m.max(center[k].abs()));
    let r_max = params
        .t0
        .min(grid.extent() - crate::grid::BALL_MARGIN_CELLS * h - reach);
    let floor = crate::grid::MIN_RADIUS_CELLS * h * (1.0 - 1e-12);
    let mut radii = Vec::new();
    let mut r = r_max;
    while r >= floor {
        radii.push(r);
        r *= 0.5;
    }
    radii.reverse();
    radii
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLimit {
    pub value: f64,
    /// RMS residual of the extrapolation fit.
    pub quality: f64,
    pub radii: Vec<f64>,
    pub nhat: Vec<f64>,
}

/// `frequency_limit`: `N̂(0+)` from a dyadic ladder. The gauge correction
/// is removed on rungs where it is not truncated, the plain frequency is
/// fitted linearly in `r^α`, and the intercept is truncated at `κ₀`.
pub fn frequency_limit(u: &GridFunction, center: &[f64], params: &WeissParams) -> Result<FrequencyLimit> {
    let radii = limit_ladder(u.grid(), center, params);
    if radii.len() < MIN_LIMIT_RUNGS {
        return Err(Error::param(format!(
            "only {} admissible radii below t0; need {MIN_LIMIT_RUNGS}",
            radii.len()
        )));
    }
    let prof = profile(u, center, &radii, params, &[])?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut truncated = Vec::new();
    for row in &prof.rows {
        if row.degenerate {
            continue;
        }
        if row.nhat < params.kappa0 {
            xs.push(row.r.powf(params.alpha));
            ys.push(row.nhat * params.correction(row.r));
        } else {
            truncated.push(row.r);
        }
    }
    if prof.rows.iter().all(|r| r.degenerate) {
        return Err(Error::DegenerateBoundaryMass { radius: radii[0] });
    }
    let (value, quality) = if xs.len() >= 2 {
        let (slope, intercept) = linear_fit(&xs, &ys);
        let rms = (xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum::<f64>()
            / xs.len() as f64)
            .sqrt();
        (intercept.min(params.kappa0), rms)
    } else if xs.len() == 1 {
        (ys[0].min(params.kappa0), 0.0)
    } else {
        // every rung truncated
        (params.kappa0, 0.0)
    };
    Ok(FrequencyLimit {
        value,
        quality,
        nhat: prof.rows.iter().map(|r| r.nhat).collect(),
        radii,
    })
}

/// Least-squares `(slope, intercept)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthQuantity {
    H,
    D,
}

/// `growth_slope`: log-log slope of `H(r)` or `D(r)`.
pub fn growth_slope(u: &GridFunction, center: &[f64], radii: &[f64], which: GrowthQuantity) -> Result<f64> {
    if radii.len() < 4 {
        return Err(Error::param("growth_slope needs at least 4 radii"));
    }
    let floor = degeneracy_floor(u);
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = BallSpec::new(center, r)?;
        let (d, h) = energy_and_mass(u, &ball)?;
        if h <= floor {
            return Err(Error::DegenerateBoundaryMass { radius: r });
        }
        let v = match which {
            GrowthQuantity::H => h,
            GrowthQuantity::D => d,
        };
        xs.push(r.ln());
        ys.push(v.ln());
    }
    Ok(linear_fit(&xs, &ys).0)
}

/// Epiperimetric constant for `κ = 3/2`.
pub fn eta(dim: usize) -> f64 {
    1.0 / (2.0 * dim as f64 + 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpiperimetricReport {
    /// `W⁰(v)` for the constrained minimizer.
    pub lhs: f64,
    /// `(1 - η) W⁰(w)` for the homogeneous extension.
    pub rhs: f64,
    pub weiss_w: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `epiperimetric_check`: rescales `u` on `ball` to the unit ball at
/// `resolution`, extends the trace 3/2-homogeneously to `w`, solves for
/// the constrained minimizer `v` with the same trace, and compares.
pub fn epiperimetric_check(
    u: &GridFunction,
    ball: &BallSpec,
    eta: f64,
    resolution: usize,
    opts: &SolveOptions,
) -> Result<EpiperimetricReport> {
    const KAPPA: f64 = 1.5;
    let dim = u.grid().dim();
    let spec = RescaleSpec {
        kind: RescaleKind::Homogeneous(KAPPA),
        center: ball.center().to_vec(),
        radius: ball.radius(),
        resolution,
        extent: 1.0,
    };
    let scaled = rescale_field(u, &spec)?;
    let unit = BallSpec::origin(dim, 1.0)?;
    let w = homogeneous_replacement(&scaled, &unit, KAPPA)?;
    let v = signorini_replacement(&w, &unit, opts)?;
    let weiss_w = weiss0(&w, KAPPA)?;
    let weiss_v = weiss0(&v, KAPPA)?;
    let rhs = (1.0 - eta) * weiss_w;
    let tolerance = MONOTONICITY_SLACK * w.scale();
    Ok(EpiperimetricReport {
        lhs: weiss_v,
        rhs,
        weiss_w,
        tolerance,
        pass: weiss_v <= rhs + tolerance,
    })
}
