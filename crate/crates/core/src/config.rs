//! Experiment configuration read from a single JSON file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::freeboundary::ClassifyThresholds;
use crate::functionals::WeissParams;
use crate::grid::{Grid, GridFunction};
use crate::io::read_field;
use crate::solver::{
    solve_drift, solve_signorini, solve_weighted, BoundaryData, CoefficientField, SolveDiagnostics,
    SolveOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub resolution: usize,
    #[serde(default = "one")]
    pub extent: f64,
}

fn one() -> f64 {
    1.0
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.resolution, self.extent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    #[default]
    Signorini,
    Drift,
    Weighted,
}

/// Exactly one of `exact` or `field`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundaryConfig {
    /// Library name such as `regular32:a=1,nu=30deg`.
    Exact(String),
    /// Path to a field dump whose outer-boundary values are used.
    Field(PathBuf),
}

/// `a(x) = base · (1 + amplitude · Π_k cos(frequency · π · x_k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    pub base: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            base: 1.0,
            amplitude: 0.0,
            frequency: 1.0,
        }
    }
}

impl WeightConfig {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let wave: f64 = x
            .iter()
            .map(|&xi| (self.frequency * std::f64::consts::PI * xi).cos())
            .product();
        self.base * (1.0 + self.amplitude * wave)
    }
}

/// Which field the analysis commands operate on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSource {
    /// Solve the configured problem first.
    #[default]
    Solve,
    /// Sample the exact boundary solution on the grid.
    Exact,
    /// Load a field dump.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupConfig {
    pub kappa: f64,
    /// Decreasing radii; empty picks `t0 · 2^{-k}` down to `16h`.
    pub ladder: Vec<f64>,
    pub resolution: usize,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            kappa: 1.5,
            ladder: Vec::new(),
            resolution: 65,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Thin-plane points.
    pub centers: Vec<Vec<f64>>,
    /// Increasing radii; empty picks 12 geometric radii in `[4h, t0]`.
    pub radii: Vec<f64>,
    pub alpha: f64,
    pub kappa0: f64,
    pub kappas: Vec<f64>,
    pub t0: f64,
    pub thresholds: ClassifyThresholds,
    pub blowup: BlowupConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            centers: Vec::new(),
            radii: Vec::new(),
            alpha: 1.9,
            kappa0: 4.0,
            kappas: vec![1.5, 2.0],
            t0: 1.0,
            thresholds: ClassifyThresholds::default(),
            blowup: BlowupConfig::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn params(&self, dim: usize) -> Result<WeissParams> {
        WeissParams::new(dim, self.alpha, 1.5, self.kappa0, self.t0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub problem: Problem,
    pub boundary: BoundaryConfig,
    /// Constant drift vector for `problem = drift`.
    #[serde(default)]
    pub drift: Option<Vec<f64>>,
    /// Coefficient for `problem = weighted`.
    #[serde(default)]
    pub coefficient: Option<WeightConfig>,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub field: FieldSource,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    /// Output directory; the command line flag takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses and validates. Errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::parse(format!("config key `{path}`: {}", e.into_inner()))
        })?;
        de.end().map_err(|e| Error::parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let BoundaryConfig::Field(p) = &mut cfg.boundary {
            *p = base.join(&*p);
        }
        if let FieldSource::File(p) = &mut cfg.field {
            *p = base.join(&*p);
        }
        cfg.check_files()?;
        Ok(cfg)
    }

    fn check_files(&self) -> Result<()> {
        let mut paths = Vec::new();
        if let BoundaryConfig::Field(p) = &self.boundary {
            paths.push(p);
        }
        if let FieldSource::File(p) = &self.field {
            paths.push(p);
        }
        for p in paths {
            for f in [crate::io::header_path(p), crate::io::payload_path(p)] {
                if !f.exists() {
                    return Err(Error::param(format!("referenced file {} does not exist", f.display())));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let key = |k: &str, e: Error| Error::param(format!("`{k}`: {e}"));
        let grid = self.grid.build().map_err(|e| key("grid", e))?;
        let dim = grid.dim();
        if let BoundaryConfig::Exact(name) = &self.boundary {
            ExactSolution::parse(name, dim).map_err(|e| key("boundary.exact", e))?;
        }
        if self.field == FieldSource::Exact && !matches!(self.boundary, BoundaryConfig::Exact(_)) {
            return Err(Error::param("`field`: \"exact\" needs an exact boundary"));
        }
        match self.problem {
            Problem::Drift => match &self.drift {
                Some(b) if b.len() == dim && b.iter().all(|v| v.is_finite()) => {}
                _ => return Err(Error::param(format!("`drift`: expected {dim} finite components"))),
            },
            Problem::Weighted => {
                let w = self.coefficient.unwrap_or_default();
                let ok = [w.base, w.amplitude, w.frequency].iter().all(|v| v.is_finite())
                    && w.base > 0.0
                    && w.amplitude.abs() < 1.0;
                if !ok {
                    return Err(Error::param("`coefficient`: need base > 0 and |amplitude| < 1"));
                }
            }
            Problem::Signorini => {}
        }
        self.solver.validate().map_err(|e| key("solver", e))?;
        let a = &self.analysis;
        a.params(dim).map_err(|e| key("analysis", e))?;
        if a.kappas.is_empty() || a.kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::param("`analysis.kappas`: need positive values"));
        }
        for (i, c) in a.centers.iter().enumerate() {
            if c.len() != dim || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("`analysis.centers[{i}]`: expected {dim} finite coordinates")));
            }
            if c[dim - 1] != 0.0 {
                return Err(Error::param(format!("`analysis.centers[{i}]`: centers must lie on the thin plane")));
            }
        }
        if a.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || a.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("`analysis.radii`: must be positive and strictly increasing"));
        }
        let b = &a.blowup;
        if !(b.kappa.is_finite() && b.kappa > 0.0) || b.resolution < crate::grid::MIN_RESOLUTION || b.resolution.is_multiple_of(2) {
            return Err(Error::param("`analysis.blowup`: need kappa > 0 and an odd resolution >= 17"));
        }
        if !b.ladder.is_empty() && (b.ladder.len() < 3 || b.ladder.windows(2).any(|w| w[1] >= w[0])) {
            return Err(Error::param("`analysis.blowup.ladder`: need at least 3 strictly decreasing radii"));
        }
        let t = &a.thresholds;
        if !(t.gap > 0.0 && t.singular_density >= 0.0 && t.max_quality > 0.0) {
            return Err(Error::param("`analysis.thresholds`: need positive bands"));
        }
        Ok(())
    }

    pub fn exact_solution(&self) -> Result<Option<ExactSolution>> {
        match &self.boundary {
            BoundaryConfig::Exact(name) => ExactSolution::parse(name, self.grid.dim).map(Some),
            BoundaryConfig::Field(_) => Ok(None),
        }
    }

    pub fn boundary_data(&self, grid: &Grid) -> Result<BoundaryData> {
        match &self.boundary {
            BoundaryConfig::Exact(name) => BoundaryData::from_exact(grid, &ExactSolution::parse(name, grid.dim())?),
            BoundaryConfig::Field(path) => {
                let f = read_field(path)?;
                if f.grid() != grid {
                    return Err(Error::param("boundary field grid differs from the configured grid"));
                }
                BoundaryData::from_field(&f)
            }
        }
    }

    /// Runs the configured solve. `NonConvergence` keeps its field.
    pub fn solve(&self) -> Result<(GridFunction, SolveDiagnostics)> {
        let grid = self.grid.build()?;
        let bd = self.boundary_data(&grid)?;
        match self.problem {
            Problem::Signorini => solve_signorini(&grid, &bd, &self.solver),
            Problem::Drift => {
                let b = self.drift.as_deref().ok_or_else(|| Error::param("missing drift"))?;
                let coeff = CoefficientField::constant_drift(&grid, b)?;
                solve_drift(&grid, &bd, &coeff, &self.solver)
            }
            Problem::Weighted => {
                let w = self.coefficient.unwrap_or_default();
                let coeff = CoefficientField::weighted(&grid, |x| w.evaluate(x))?;
                solve_weighted(&grid, &bd, &coeff, &self.solver)
            }
        }
    }

    /// The field the analysis commands operate on.
    pub fn analysis_field(&self) -> Result<GridFunction> {
        match &self.field {
            FieldSource::Solve => self.solve().map(|(u, _)| u),
            FieldSource::Exact => {
                let grid = self.grid.build()?;
                let sol = self
                    .exact_solution()?
                    .ok_or_else(|| Error::param("field \"exact\" needs an exact boundary"))?;
                sol.sample(&grid)
            }
            FieldSource::File(path) => read_field(path),
        }
    }

    /// Configured radii, or 12 geometric radii in `[4h, t0]`.
    pub fn radii(&self, grid: &Grid, params: &WeissParams) -> Result<Vec<f64>> {
        if !self.analysis.radii.is_empty() {
            return Ok(self.analysis.radii.clone());
        }
        let lo = crate::grid::MIN_RADIUS_CELLS * grid.spacing();
        if lo >= params.t0 {
            return Err(Error::InvalidParameter(format!(
                "grid too coarse for default radii: four-cell floor {lo} exceeds t0 = {}; set `analysis.radii`",
                params.t0
            )));
        }
        Ok(geometric_ladder(lo, params.t0, 12))
    }
}

/// `count` geometric points from `lo` to `hi`, increasing.
pub fn geometric_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "grid": {"dim": 2, "resolution": 33},
        "boundary": {"exact": "regular32:a=1,nu=0deg"}
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.problem, Problem::Signorini);
        assert_eq!(cfg.grid.extent, 1.0);
        assert_eq!(cfg.analysis.kappas, vec![1.5, 2.0]);
        assert_eq!(cfg.field, FieldSource::Solve);
    }

    #[test]
    fn errors_name_the_key() {
        let bad = r#"{"grid": {"dim": 2, "resolution": "big"}, "boundary": {"exact": "constant"}}"#;
        let msg = ExperimentConfig::from_json(bad).unwrap_err().to_string();
        assert!(msg.contains("grid.resolution"), "{msg}");
        let bad = r#"{"grid": {"dim": 2, "resolution": 33}, "boundary": {"exact": "constant"}, "solvr": {}}"#;
        let msg = ExperimentConfig::from_json(bad).unwrap_err().to_string();
        assert!(msg.contains("solvr"), "{msg}");
        let bad = r#"{"grid": {"dim": 2, "resolution": 32}, "boundary": {"exact": "constant"}}"#;
        let msg = ExperimentConfig::from_json(bad).unwrap_err().to_string();
        assert!(msg.contains("grid"), "{msg}");
    }

    #[test]
    fn centers_must_be_thin() {
        let bad = r#"{"grid": {"dim": 2, "resolution": 33}, "boundary": {"exact": "constant"},
            "analysis": {"centers": [[0.0, 0.1]]}}"#;
        let msg = ExperimentConfig::from_json(bad).unwrap_err().to_string();
        assert!(msg.contains("thin plane"), "{msg}");
    }

    #[test]
    fn drift_needs_vector() {
        let bad = r#"{"grid": {"dim": 2, "resolution": 33}, "boundary": {"exact": "constant"}, "problem": "drift"}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
        let ok = r#"{"grid": {"dim": 2, "resolution": 33}, "boundary": {"exact": "constant"},
            "problem": "drift", "drift": [0.5, 0.0]}"#;
        let cfg = ExperimentConfig::from_json(ok).unwrap();
        let (u, d) = cfg.solve().unwrap();
        assert!(d.converged);
        assert!(u.values().iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn ladder_endpoints() {
        let l = geometric_ladder(0.01, 0.16, 5);
        assert!((l[0] - 0.01).abs() < 1e-15 && (l[4] - 0.16).abs() < 1e-15);
        assert!((l[2] - 0.04).abs() < 1e-12);
    }
}
