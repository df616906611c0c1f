//! Projected successive over-relaxation for the discrete Signorini problem
//! and its unconstrained, drift and weighted variants.
//!
//! Unknowns are the upper-half nodes off the outer boundary, thin plane
//! included. A thin-plane node couples to its upper neighbour with double
//! weight, which is the even reflection of the lower neighbour. With the
//! constraint active, thin-plane updates are projected onto `u >= 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::grid::{gradient, BallSpec, Grid, GridFunction};

/// Boundary values below this fraction of the field scale (in magnitude)
/// on the thin plane are treated as roundoff and clamped to zero.
const ADMISSIBILITY_ROUNDOFF: f64 = 1e-12;
/// Sweeps between full residual evaluations once the running correction
/// is below tolerance.
const CHECK_INTERVAL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    Lexicographic,
    #[default]
    RedBlack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Over-relaxation factor in (0, 2); `None` picks the optimal factor
    /// of the unconstrained Laplacian on the solve region.
    pub relaxation: Option<f64>,
    /// Relative to the boundary-data scale.
    pub tol_residual: f64,
    /// Relative to the boundary-data scale.
    pub tol_complementarity: f64,
    /// `None` means `200 * resolution`.
    pub max_sweeps: Option<usize>,
    pub ordering: Ordering,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            relaxation: None,
            tol_residual: 1e-8,
            tol_complementarity: 1e-8,
            max_sweeps: None,
            ordering: Ordering::RedBlack,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.relaxation {
            if !(w > 0.0 && w < 2.0) {
                return Err(Error::param(format!("relaxation {w} outside (0, 2)")));
            }
        }
        if !(self.tol_residual > 0.0 && self.tol_complementarity > 0.0) {
            return Err(Error::param("tolerances must be positive"));
        }
        if self.max_sweeps == Some(0) {
            return Err(Error::param("max_sweeps must be at least 1"));
        }
        Ok(())
    }

    fn sweep_budget(&self, grid: &Grid) -> usize {
        self.max_sweeps.unwrap_or(200 * grid.resolution())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub sweeps_used: usize,
    /// Max-norm of the (projected) Gauss–Seidel correction, i.e. the
    /// discrete Laplacian scaled by `h^2 / 2n`.
    pub final_residual: f64,
    /// Max over thin nodes of the sign violation of `min(u, -∂u)` plus the
    /// scaled product `|u ∂u|`, with `∂u` in the same correction units.
    pub final_complementarity: f64,
    pub converged: bool,
    pub peclet_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySource {
    ExactSolution(String),
    FieldTrace,
}

/// Dirichlet values on the outer boundary of the half domain. Stored as a
/// full node array; only outer-boundary entries are read.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    grid: Grid,
    values: Vec<f64>,
    source: BoundarySource,
}

impl BoundaryData {
    pub fn from_exact(grid: &Grid, sol: &ExactSolution) -> Result<Self> {
        let f = sol.sample(grid)?;
        Self::build(f, BoundarySource::ExactSolution(sol.to_string()))
    }

    /// Trace of an existing field; its interior values seed the solve.
    pub fn from_field(field: &GridFunction) -> Result<Self> {
        Self::build(field.clone(), BoundarySource::FieldTrace)
    }

    fn build(field: GridFunction, source: BoundarySource) -> Result<Self> {
        let grid = *field.grid();
        let mut values = field.into_values();
        let scale = boundary_scale(&grid, &values);
        for idx in 0..grid.thin_count() {
            if !grid.is_outer_boundary(idx) {
                continue;
            }
            let v = values[idx];
            if v < -ADMISSIBILITY_ROUNDOFF * scale {
                return Err(Error::InadmissibleBoundary(format!(
                    "thin-plane boundary value {v} at node {idx} is negative"
                )));
            }
            if v < 0.0 {
                values[idx] = 0.0;
            }
        }
        Ok(Self {
            grid,
            values,
            source,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn source(&self) -> &BoundarySource {
        &self.source
    }

    pub fn scale(&self) -> f64 {
        boundary_scale(&self.grid, &self.values)
    }
}

fn boundary_scale(grid: &Grid, values: &[f64]) -> f64 {
    let s = (0..grid.node_count())
        .filter(|&i| grid.is_outer_boundary(i))
        .fold(0.0f64, |m, i| m.max(values[i].abs()));
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Per-node drift vectors or diffusion coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    /// `dim` components per node.
    Drift { grid: Grid, components: Vec<f64> },
    /// Scalar `a(x) >= a_min > 0` per node.
    Weighted { grid: Grid, a: Vec<f64> },
}

impl CoefficientField {
    pub fn drift(grid: &Grid, b: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let d = grid.dim();
        let mut components = Vec::with_capacity(grid.node_count() * d);
        for idx in 0..grid.node_count() {
            let x = grid.coord(idx);
            let v = b(&x[..d]);
            if v.len() != d || v.iter().any(|c| !c.is_finite()) {
                return Err(Error::param(format!("invalid drift at node {idx}")));
            }
            components.extend(v);
        }
        Ok(CoefficientField::Drift {
            grid: *grid,
            components,
        })
    }

    pub fn constant_drift(grid: &Grid, b: &[f64]) -> Result<Self> {
        Self::drift(grid, |_| b.to_vec())
    }

    pub fn weighted(grid: &Grid, a: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.node_count())
            .map(|idx| {
                let x = grid.coord(idx);
                a(&x[..grid.dim()])
            })
            .collect();
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param("diffusion coefficient must be positive and finite"));
        }
        Ok(CoefficientField::Weighted {
            grid: *grid,
            a: values,
        })
    }

    fn grid(&self) -> &Grid {
        match self {
            CoefficientField::Drift { grid, .. } | CoefficientField::Weighted { grid, .. } => grid,
        }
    }
}

#[derive(Clone, Copy)]
struct NodeStencil {
    index: usize,
    neighbors: [usize; 6],
    weights: [f64; 6],
    inv_diag: f64,
    thin: bool,
}

/// Builds stencils for the active nodes. `coeff` selects the operator.
fn assemble(
    grid: &Grid,
    active: &[usize],
    coeff: Option<&CoefficientField>,
) -> (Vec<NodeStencil>, bool) {
    let d = grid.dim();
    let h = grid.spacing();
    let mut peclet = false;
    let stencils = active
        .iter()
        .map(|&idx| {
            let m = grid.multi_index(idx);
            let thin = grid.is_thin(idx);
            let mut neighbors = [idx; 6];
            let mut weights = [0.0; 6];
            for k in 0..d {
                let s = grid.stride(k);
                let plus = idx + s;
                let minus = if k + 1 == d && m[k] == 0 { plus } else { idx - s };
                neighbors[2 * k] = minus;
                neighbors[2 * k + 1] = plus;
                let (wm, wp) = match coeff {
                    None => (1.0, 1.0),
                    Some(CoefficientField::Weighted { a, .. }) => {
                        let face = |j: usize| 2.0 * a[idx] * a[j] / (a[idx] + a[j]);
                        (face(minus), face(plus))
                    }
                    Some(CoefficientField::Drift { components, .. }) => {
                        // mirrored neighbour makes the normal drift term vanish
                        let b = if k + 1 == d && m[k] == 0 {
                            0.0
                        } else {
                            components[idx * d + k]
                        };
                        let cell_peclet = b.abs() * h / 2.0;
                        if cell_peclet <= 1.0 {
                            (1.0 + b * h / 2.0, 1.0 - b * h / 2.0)
                        } else {
                            peclet = true;
                            if b > 0.0 {
                                (1.0 + b * h, 1.0)
                            } else {
                                (1.0, 1.0 - b * h)
                            }
                        }
                    }
                };
                weights[2 * k] = wm;
                weights[2 * k + 1] = wp;
            }
            let diag: f64 = weights[..2 * d].iter().sum();
            NodeStencil {
                index: idx,
                neighbors,
                weights,
                inv_diag: 1.0 / diag,
                thin,
            }
        })
        .collect();
    (stencils, peclet)
}

#[inline]
fn gs_value(s: &NodeStencil, u: &[f64], d: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..2 * d {
        acc += s.weights[k] * u[s.neighbors[k]];
    }
    acc * s.inv_diag
}

/// Optimal SOR factor for the Laplacian on a region `cells` wide.
pub fn optimal_relaxation(cells: f64) -> f64 {
    2.0 / (1.0 + (PI / cells.max(2.0)).sin())
}

struct Relaxation<'a> {
    grid: &'a Grid,
    stencils: Vec<NodeStencil>,
    order: Vec<usize>,
    project: bool,
    peclet: bool,
}

impl<'a> Relaxation<'a> {
    fn new(
        grid: &'a Grid,
        active: &[usize],
        coeff: Option<&CoefficientField>,
        project: bool,
        ordering: Ordering,
    ) -> Self {
        let (stencils, peclet) = assemble(grid, active, coeff);
        let mut order: Vec<usize> = (0..stencils.len()).collect();
        if ordering == Ordering::RedBlack {
            let parity = |i: &usize| {
                let m = grid.multi_index(stencils[*i].index);
                (m[0] + m[1] + m[2]) % 2
            };
            order.sort_by_key(parity);
        }
        Self {
            grid,
            stencils,
            order,
            project,
            peclet,
        }
    }

    /// Residual and complementarity measures at the current iterate.
    fn measure(&self, u: &[f64], scale: f64) -> (f64, f64) {
        let d = self.grid.dim();
        let mut residual = 0.0f64;
        let mut comp = 0.0f64;
        for s in &self.stencils {
            let g = gs_value(s, u, d);
            let v = u[s.index];
            let target = if self.project && s.thin { g.max(0.0) } else { g };
            residual = residual.max((target - v).abs());
            if self.project && s.thin {
                let flux = g - v;
                let sign = (-v.min(-flux)).max(0.0);
                comp = comp.max(sign + (v * flux).abs() / scale);
            }
        }
        (residual, comp)
    }

    fn run(&self, u: &mut [f64], opts: &SolveOptions, omega: f64, scale: f64) -> SolveDiagnostics {
        let d = self.grid.dim();
        let budget = opts.sweep_budget(self.grid);
        let tol_r = opts.tol_residual * scale;
        let tol_c = opts.tol_complementarity * scale;
        let mut since_check = CHECK_INTERVAL;
        let mut sweeps = 0;
        let mut converged = false;
        if self.stencils.is_empty() {
            converged = true;
        }
        while !converged && sweeps < budget {
            sweeps += 1;
            let mut max_corr = 0.0f64;
            for &i in &self.order {
                let s = &self.stencils[i];
                let g = gs_value(s, u, d);
                let old = u[s.index];
                let mut new = old + omega * (g - old);
                if self.project && s.thin {
                    new = new.max(0.0);
                    max_corr = max_corr.max((g.max(0.0) - old).abs());
                } else {
                    max_corr = max_corr.max((g - old).abs());
                }
                u[s.index] = new;
            }
            since_check += 1;
            if max_corr <= tol_r && since_check >= CHECK_INTERVAL {
                since_check = 0;
                let (r, c) = self.measure(u, scale);
                converged = r <= tol_r && c <= tol_c;
            }
        }
        let (final_residual, final_complementarity) = self.measure(u, scale);
        SolveDiagnostics {
            sweeps_used: sweeps,
            final_residual,
            final_complementarity,
            converged: final_residual <= tol_r && final_complementarity <= tol_c,
            peclet_warning: self.peclet,
        }
    }
}

fn interior_nodes(grid: &Grid) -> Vec<usize> {
    (0..grid.node_count())
        .filter(|&i| !grid.is_outer_boundary(i))
        .collect()
}

fn solve_full(
    grid: &Grid,
    boundary: &BoundaryData,
    coeff: Option<&CoefficientField>,
    project: bool,
    opts: &SolveOptions,
) -> Result<(GridFunction, SolveDiagnostics)> {
    opts.validate()?;
    if boundary.grid() != grid {
        return Err(Error::InadmissibleBoundary(
            "boundary data defined on a different grid".into(),
        ));
    }
    if let Some(c) = coeff {
        if c.grid() != grid {
            return Err(Error::param("coefficient field defined on a different grid"));
        }
    }
    let scale = boundary.scale();
    let active = interior_nodes(grid);
    let mut u = boundary.values.clone();
    if boundary.source != BoundarySource::FieldTrace {
        for &i in &active {
            u[i] = 0.0;
        }
    }
    if project {
        for &i in &active {
            if grid.is_thin(i) {
                u[i] = u[i].max(0.0);
            }
        }
    }
    let omega = opts
        .relaxation
        .unwrap_or_else(|| optimal_relaxation((grid.resolution() - 1) as f64));
    let relax = Relaxation::new(grid, &active, coeff, project, opts.ordering);
    let diagnostics = relax.run(&mut u, opts, omega, scale);
    let field = GridFunction::from_values(*grid, u)?;
    if diagnostics.converged {
        Ok((field, diagnostics))
    } else {
        Err(Error::NonConvergence {
            diagnostics,
            field: Box::new(field),
        })
    }
}

/// `solve_signorini`.
pub fn solve_signorini(
    grid: &Grid,
    boundary: &BoundaryData,
    opts: &SolveOptions,
) -> Result<(GridFunction, SolveDiagnostics)> {
    solve_full(grid, boundary, None, true, opts)
}

/// `solve_harmonic`: same stencil without the thin-plane constraint.
pub fn solve_harmonic(
    grid: &Grid,
    boundary: &BoundaryData,
    opts: &SolveOptions,
) -> Result<(GridFunction, SolveDiagnostics)> {
    solve_full(grid, boundary, None, false, opts)
}

/// `solve_drift`: `-Δu + b·∇u = 0` off the plane with the Signorini
/// constraint on it. Central convection, upwind where the cell Péclet
/// number exceeds one.
pub fn solve_drift(
    grid: &Grid,
    boundary: &BoundaryData,
    drift: &CoefficientField,
    opts: &SolveOptions,
) -> Result<(GridFunction, SolveDiagnostics)> {
    if !matches!(drift, CoefficientField::Drift { .. }) {
        return Err(Error::param("solve_drift needs a drift field"));
    }
    solve_full(grid, boundary, Some(drift), true, opts)
}

/// `solve_weighted`: minimizer of `∫ a|∇u|^2` over the constraint set, with
/// harmonic-mean face coefficients.
pub fn solve_weighted(
    grid: &Grid,
    boundary: &BoundaryData,
    coeff: &CoefficientField,
    opts: &SolveOptions,
) -> Result<(GridFunction, SolveDiagnostics)> {
    if !matches!(coeff, CoefficientField::Weighted { .. }) {
        return Err(Error::param("solve_weighted needs a coefficient field"));
    }
    solve_full(grid, boundary, Some(coeff), true, opts)
}

/// Upper-half nodes strictly inside the ball.
fn ball_nodes(grid: &Grid, ball: &BallSpec) -> Vec<usize> {
    let d = grid.dim();
    (0..grid.node_count())
        .filter(|&i| {
            let x = grid.coord(i);
            !grid.is_outer_boundary(i) && ball.contains(&x[..d])
        })
        .collect()
}

fn replace_in_ball(
    u: &GridFunction,
    ball: &BallSpec,
    project: bool,
    opts: &SolveOptions,
) -> Result<GridFunction> {
    opts.validate()?;
    let grid = u.grid();
    grid.check_ball(ball)?;
    let active = ball_nodes(grid, ball);
    let mut values = u.values().to_vec();
    if project {
        for &i in &active {
            if grid.is_thin(i) {
                values[i] = values[i].max(0.0);
            }
        }
    }
    let scale = u.scale();
    let omega = opts
        .relaxation
        .unwrap_or_else(|| optimal_relaxation(2.0 * ball.radius() / grid.spacing()));
    let relax = Relaxation::new(grid, &active, None, project, opts.ordering);
    let diagnostics = relax.run(&mut values, opts, omega, scale);
    let field = GridFunction::from_values(*grid, values)?;
    if diagnostics.converged {
        Ok(field)
    } else {
        Err(Error::NonConvergence {
            diagnostics,
            field: Box::new(field),
        })
    }
}

/// `signorini_replacement`: constrained minimizer inside the ball with the
/// field's own values on the discrete shell.
pub fn signorini_replacement(
    u: &GridFunction,
    ball: &BallSpec,
    opts: &SolveOptions,
) -> Result<GridFunction> {
    replace_in_ball(u, ball, true, opts)
}

/// Discrete harmonic replacement inside the ball.
pub fn harmonic_replacement(
    u: &GridFunction,
    ball: &BallSpec,
    opts: &SolveOptions,
) -> Result<GridFunction> {
    replace_in_ball(u, ball, false, opts)
}

/// Discrete Dirichlet energy of the edges touching nodes strictly inside
/// the ball, counted over the full (reflected) domain. This is the energy
/// the replacement solvers minimize.
pub fn stencil_energy(u: &GridFunction, ball: &BallSpec) -> Result<f64> {
    let grid = u.grid();
    grid.check_ball(ball)?;
    let mut active = vec![false; grid.node_count()];
    for i in ball_nodes(grid, ball) {
        active[i] = true;
    }
    Ok(edge_energy(u, |i| active[i]))
}

/// Discrete Dirichlet energy of the whole domain.
pub fn total_energy(u: &GridFunction) -> f64 {
    edge_energy(u, |_| true)
}

fn edge_energy(u: &GridFunction, active: impl Fn(usize) -> bool) -> f64 {
    let grid = u.grid();
    let d = grid.dim();
    let shape = grid.shape();
    let v = u.values();
    let mut acc = 0.0;
    for i in 0..grid.node_count() {
        let m = grid.multi_index(i);
        for k in 0..d {
            if m[k] + 1 >= shape[k] {
                continue;
            }
            let j = i + grid.stride(k);
            if !(active(i) || active(j)) {
                continue;
            }
            let on_plane = k + 1 < d && m[d - 1] == 0;
            let w = if on_plane { 1.0 } else { 2.0 };
            acc += w * (v[i] - v[j]).powi(2);
        }
    }
    acc * grid.spacing().powi(d as i32 - 2)
}

/// `ρ(r) = J(u) / J(signorini_replacement(u)) - 1` with `J` the stencil
/// energy on the ball.
pub fn almost_minimality_ratio(u: &GridFunction, ball: &BallSpec, opts: &SolveOptions) -> Result<f64> {
    let v = signorini_replacement(u, ball, opts)?;
    let ju = stencil_energy(u, ball)?;
    let jv = stencil_energy(&v, ball)?;
    Ok(ju / jv - 1.0)
}

/// Complementarity measures over thin-plane nodes, with `∂_{x_n}^+ u` from
/// the one-sided gradient stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityReport {
    /// `max |u ∂u| / scale^2`.
    pub product: f64,
    /// `max(-u, 0) / scale`.
    pub constraint: f64,
    /// `max(∂u, 0) / scale`.
    pub sign: f64,
    pub headline: f64,
}

/// `verify_complementarity` over the thin nodes inside `region` (the whole
/// plane when `None`).
pub fn verify_complementarity(u: &GridFunction, region: Option<&BallSpec>) -> ComplementarityReport {
    let grid = u.grid();
    let d = grid.dim();
    let grad = gradient(u);
    let scale = u.scale();
    let mut product = 0.0f64;
    let mut constraint = 0.0f64;
    let mut sign = 0.0f64;
    for i in 0..grid.thin_count() {
        if let Some(ball) = region {
            let x = grid.coord(i);
            if !ball.contains(&x[..d]) {
                continue;
            }
        }
        let v = u.values()[i];
        let dn = grad.at_node(i)[d - 1];
        product = product.max((v * dn).abs() / (scale * scale));
        constraint = constraint.max((-v).max(0.0) / scale);
        sign = sign.max(dn.max(0.0) / scale);
    }
    ComplementarityReport {
        product,
        constraint,
        sign,
        headline: product.max(constraint).max(sign),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{full_contact, qpoly, regular32};
    use crate::grid::{ball_energy, make_grid, sample};

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = make_grid(2, 33, 1.0).unwrap();
        let bd = BoundaryData::from_exact(&g, &crate::exact::constant(2, 1.0).unwrap()).unwrap();
        let (u, diag) = solve_signorini(&g, &bd, &opts()).unwrap();
        assert!(diag.converged);
        assert!(u.values().iter().all(|v| (v - 1.0).abs() < 1e-7));
    }

    #[test]
    fn full_contact_solution() {
        let g = make_grid(2, 33, 1.0).unwrap();
        let sol = full_contact(2, 1.0).unwrap();
        let bd = BoundaryData::from_exact(&g, &sol).unwrap();
        let (u, diag) = solve_signorini(&g, &bd, &opts()).unwrap();
        assert!(diag.converged);
        for i in 0..g.node_count() {
            let x = g.coord(i);
            assert!((u.values()[i] + x[1]).abs() < 1e-7);
        }
        assert!(u.thin_trace().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn harmonic_quadratic_reproduced() {
        let g = make_grid(2, 33, 1.0).unwrap();
        let q = qpoly(2, 2, &[1.0]).unwrap();
        let bd = BoundaryData::from_exact(&g, &q).unwrap();
        let (u, _) = solve_harmonic(&g, &bd, &opts()).unwrap();
        let exact = q.sample(&g).unwrap();
        let err = u
            .values()
            .iter()
            .zip(exact.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-6, "{err}");
        let zero = BoundaryData::from_exact(&g, &crate::exact::constant(2, 0.0).unwrap()).unwrap();
        let (z, _) = solve_harmonic(&g, &zero, &opts()).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn harmonic_goes_negative_where_signorini_contacts() {
        let g = make_grid(2, 33, 1.0).unwrap();
        let sol = regular32(2, 1.0, &[1.0]).unwrap();
        let bd = BoundaryData::from_exact(&g, &sol).unwrap();
        let (hu, _) = solve_harmonic(&g, &bd, &opts()).unwrap();
        let (su, _) = solve_signorini(&g, &bd, &opts()).unwrap();
        let mut negative = 0;
        for i in 0..g.thin_count() {
            let x = g.coord(i)[0];
            if x < -0.1 && x > -0.9 {
                assert!(su.values()[i] >= 0.0);
                if hu.values()[i] < 0.0 {
                    negative += 1;
                }
            }
        }
        assert!(negative > 5);
    }

    #[test]
    fn inadmissible_boundary_rejected() {
        let g = make_grid(2, 17, 1.0).unwrap();
        let f = sample(|x| x[0], &g).unwrap();
        assert!(matches!(
            BoundaryData::from_field(&f),
            Err(Error::InadmissibleBoundary(_))
        ));
    }

    #[test]
    fn budget_exhaustion_reports_diagnostics() {
        let g = make_grid(2, 33, 1.0).unwrap();
        let sol = regular32(2, 1.0, &[1.0]).unwrap();
        let bd = BoundaryData::from_exact(&g, &sol).unwrap();
        let o = SolveOptions {
            max_sweeps: Some(1),
            ..opts()
        };
        match solve_signorini(&g, &bd, &o) {
            Err(Error::NonConvergence { diagnostics, .. }) => {
                assert_eq!(diagnostics.sweeps_used, 1);
                assert!(!diagnostics.converged);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_drift_and_unit_weight_match_signorini_bitwise() {
        let g = make_grid(2, 33, 1.0).unwrap();
        let sol = regular32(2, 1.0, &[1.0]).unwrap();
        let bd = BoundaryData::from_exact(&g, &sol).unwrap();
        let (s, _) = solve_signorini(&g, &bd, &opts()).unwrap();
        let zero = CoefficientField::constant_drift(&g, &[0.0, 0.0]).unwrap();
        let (dr, _) = solve_drift(&g, &bd, &zero, &opts()).unwrap();
        assert_eq!(s.values(), dr.values());
        let one = CoefficientField::weighted(&g, |_| 1.0).unwrap();
        let two = CoefficientField::weighted(&g, |_| 2.0).unwrap();
        let (w1, _) = solve_weighted(&g, &bd, &one, &opts()).unwrap();
        let (w2, _) = solve_weighted(&g, &bd, &two, &opts()).unwrap();
        assert_eq!(s.values(), w1.values());
        assert_eq!(w1.values(), w2.values());
    }

    #[test]
    fn replacement_fixed_point_and_energy_decrease() {
        let g = make_grid(2, 65, 1.0).unwrap();
        let sol = regular32(2, 1.0, &[1.0]).unwrap();
        let bd = BoundaryData::from_exact(&g, &sol).unwrap();
        let (u, _) = solve_signorini(&g, &bd, &opts()).unwrap();
        let ball = BallSpec::origin(2, 0.5).unwrap();
        let v = signorini_replacement(&u, &ball, &opts()).unwrap();
        let diff = u
            .values()
            .iter()
            .zip(v.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-6, "{diff}");

        let bump = sample(
            |x| {
                let r2 = (x[0] - 0.1).powi(2) + (x[1] - 0.25).powi(2);
                sol.evaluate(x) + if r2 < 0.01 { 0.2 * (1.0 - r2 / 0.01).powi(2) } else { 0.0 }
            },
            &g,
        )
        .unwrap();
        let w = signorini_replacement(&bump, &ball, &opts()).unwrap();
        assert!(ball_energy(&w, &ball).unwrap() < ball_energy(&bump, &ball).unwrap());
        // outside the ball nothing moves
        for i in 0..g.node_count() {
            let x = g.coord(i);
            if x[0] * x[0] + x[1] * x[1] >= 0.25 {
                assert_eq!(w.values()[i], bump.values()[i]);
            }
        }
        let c = sample(|_| 0.7, &g).unwrap();
        let cv = signorini_replacement(&c, &ball, &opts()).unwrap();
        assert!(cv.values().iter().all(|v| (v - 0.7).abs() < 1e-8));
    }

    #[test]
    fn constraint_raises_replacement_energy() {
        let g = make_grid(2, 65, 1.0).unwrap();
        let sol = regular32(2, 1.0, &[1.0]).unwrap();
        let u = sol.sample(&g).unwrap();
        let ball = BallSpec::origin(2, 0.5).unwrap();
        let s = signorini_replacement(&u, &ball, &opts()).unwrap();
        let h = harmonic_replacement(&u, &ball, &opts()).unwrap();
        let es = stencil_energy(&s, &ball).unwrap();
        let eh = stencil_energy(&h, &ball).unwrap();
        assert!(es >= eh - 1e-9);
    }

    #[test]
    fn complementarity_of_simple_fields() {
        let g = make_grid(2, 65, 1.0).unwrap();
        let one = sample(|_| 1.0, &g).unwrap();
        assert_eq!(verify_complementarity(&one, None).headline, 0.0);
        let fc = full_contact(2, 1.0).unwrap().sample(&g).unwrap();
        assert!(verify_complementarity(&fc, None).headline < 1e-14);
    }
}
