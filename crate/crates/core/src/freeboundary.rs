//! Coincidence set and free boundary on the thin plane, point
//! classification by the frequency gap, graph fits of the regular set and
//! singular-point dimensions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{frequency_limit, limit_ladder, WeissParams};
use crate::grid::{dist2, GridFunction, MIN_RADIUS_CELLS};
use crate::rescale::{blowup, fit_regular_profile, fit_singular_polynomial, BlowupFit, FitKind, SphereSamples};

/// Trace values at or below this multiple of the scale count as exact
/// contact for density and crossing searches.
pub const CONTACT_ROUNDOFF: f64 = 1e-12;
/// Furthest a refined free-boundary point may move from the first
/// non-contact node, in cells.
const MAX_EXTRAPOLATION_CELLS: f64 = 3.0;
/// Sub-samples per cell edge for the density measure.
const DENSITY_SUBSAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum ThresholdPolicy {
    /// `τ = c_τ · scale · h^{3/2}`.
    Scaled { c_tau: f64 },
    Absolute { tau: f64 },
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Scaled { c_tau: 1.0 }
    }
}

impl ThresholdPolicy {
    pub fn tau(&self, u: &GridFunction) -> f64 {
        match *self {
            ThresholdPolicy::Scaled { c_tau } => c_tau * u.scale() * u.grid().spacing().powf(1.5),
            ThresholdPolicy::Absolute { tau } => tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundarySet {
    dim: usize,
    lambda_mask: Vec<bool>,
    gamma_points: Vec<Vec<f64>>,
    refined_points: Vec<Vec<f64>>,
    threshold: f64,
    field: GridFunction,
}

impl FreeBoundarySet {
    pub fn lambda_mask(&self) -> &[bool] {
        &self.lambda_mask
    }

    /// Midpoints of thin-plane edges where the mask changes.
    pub fn gamma_points(&self) -> &[Vec<f64>] {
        &self.gamma_points
    }

    /// Same edges, located by extrapolating `u^{2/3}` from the
    /// non-contact side.
    pub fn refined_points(&self) -> &[Vec<f64>] {
        &self.refined_points
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn contact_count(&self) -> usize {
        self.lambda_mask.iter().filter(|&&b| b).count()
    }

    /// Refined gamma point nearest to `x`.
    pub fn nearest_gamma(&self, x: &[f64]) -> Option<&[f64]> {
        self.refined_points
            .iter()
            .min_by(|a, b| dist2(a, x).total_cmp(&dist2(b, x)))
            .map(|v| v.as_slice())
    }
}

/// `coincidence_set`: contact mask `u <= τ` on thin nodes and free-boundary
/// points on the mask transitions.
pub fn coincidence_set(u: &GridFunction, policy: ThresholdPolicy) -> FreeBoundarySet {
    let grid = u.grid();
    let dim = grid.dim();
    let tau = policy.tau(u);
    let h = grid.spacing();
    let trace = u.thin_trace();
    let lambda_mask: Vec<bool> = trace.iter().map(|&v| v <= tau).collect();
    let roundoff = CONTACT_ROUNDOFF * u.scale();
    let shape = grid.shape();
    let mut gamma_points = Vec::new();
    let mut refined_points = Vec::new();
    for i in 0..grid.thin_count() {
        let m = grid.multi_index(i);
        for k in 0..dim - 1 {
            if m[k] + 1 >= shape[k] {
                continue;
            }
            let s = grid.stride(k);
            let j = i + s;
            if lambda_mask[i] == lambda_mask[j] {
                continue;
            }
            let xi = grid.coord(i);
            let mut mid = xi[..dim].to_vec();
            mid[k] += 0.5 * h;
            gamma_points.push(mid.clone());
            // free neighbour f1 and the next free node f2 beyond it
            let (c, f1, dir) = if lambda_mask[i] { (i, j, 1.0) } else { (j, i, -1.0) };
            let f1m = grid.multi_index(f1);
            let f2 = if dir > 0.0 {
                (f1m[k] + 1 < shape[k]).then(|| f1 + s)
            } else {
                (f1m[k] > 0).then(|| f1 - s)
            };
            let mut refined = mid;
            if let Some(f2) = f2.filter(|&f2| !lambda_mask[f2]) {
                let s1 = trace[f1].max(0.0).powf(2.0 / 3.0);
                let s2 = trace[f2].max(0.0).powf(2.0 / 3.0);
                if s2 > s1 {
                    // a thresholded contact node with a nonzero value may
                    // lie past the true boundary
                    let reach = if trace[c] <= roundoff { 1.0 } else { MAX_EXTRAPOLATION_CELLS };
                    let back = (s1 / (s2 - s1)).min(reach) * h;
                    let xf = grid.coord(f1)[k];
                    refined[k] = xf - dir * back;
                }
            }
            refined_points.push(refined);
        }
    }
    FreeBoundarySet {
        dim,
        lambda_mask,
        gamma_points,
        refined_points,
        threshold: tau,
        field: u.clone(),
    }
}

/// `coincidence_density`: measure of `{trace <= roundoff}` inside the thin
/// disk `B'_r(x_0)` over `|B'_r|`, with the trace interpolated between
/// nodes.
pub fn coincidence_density(fb: &FreeBoundarySet, center: &[f64], r: f64) -> Result<f64> {
    let u = &fb.field;
    let grid = u.grid();
    let dim = fb.dim;
    if center.len() != dim || center[dim - 1] != 0.0 {
        return Err(Error::InadmissibleBall("density centre must lie on the thin plane".into()));
    }
    let ball = crate::grid::BallSpec::new(center, r)?;
    grid.check_ball(&ball)?;
    let eps = CONTACT_ROUNDOFF * u.scale();
    let step = (grid.spacing() / DENSITY_SUBSAMPLES as f64).min(r / 64.0);
    let count = (2.0 * r / step).ceil() as usize;
    let step = 2.0 * r / count as f64;
    let mut inside = 0usize;
    let mut contact = 0usize;
    let at = |a: usize| -r + (a as f64 + 0.5) * step;
    if dim == 2 {
        for a in 0..count {
            let x = center[0] + at(a);
            inside += 1;
            if u.interp([x, 0.0, 0.0]) <= eps {
                contact += 1;
            }
        }
    } else {
        for a in 0..count {
            for b in 0..count {
                let (dx, dy) = (at(a), at(b));
                if dx * dx + dy * dy >= r * r {
                    continue;
                }
                inside += 1;
                if u.interp([center[0] + dx, center[1] + dy, 0.0]) <= eps {
                    contact += 1;
                }
            }
        }
    }
    Ok(contact as f64 / inside as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyThresholds {
    pub policy: ThresholdPolicy,
    pub gap: f64,
    pub singular_density: f64,
    /// Extrapolation RMS above which the verdict is unresolved.
    pub max_quality: f64,
    /// Resolution of rescaled blowup grids.
    pub blowup_resolution: usize,
    /// Smallest blowup rung in units of `h`.
    pub blowup_min_cells: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self {
            policy: ThresholdPolicy::default(),
            gap: 0.15,
            singular_density: 0.1,
            max_quality: 0.05,
            blowup_resolution: 65,
            blowup_min_cells: 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "kappa", rename_all = "lowercase")]
pub enum Verdict {
    Regular,
    Singular(u32),
    Other(f64),
    Unresolved,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Regular => write!(f, "regular"),
            Verdict::Singular(k) => write!(f, "singular({k})"),
            Verdict::Other(k) => write!(f, "other({k})"),
            Verdict::Unresolved => write!(f, "unresolved"),
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = |p: &str| {
            s.strip_prefix(p)
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| Error::parse(format!("bad verdict {s:?}")))
        };
        match s {
            "regular" => Ok(Verdict::Regular),
            "unresolved" => Ok(Verdict::Unresolved),
            _ if s.starts_with("singular(") => inner("singular(")?
                .parse()
                .map(Verdict::Singular)
                .map_err(|_| Error::parse(format!("bad verdict {s:?}"))),
            _ if s.starts_with("other(") => inner("other(")?
                .parse()
                .map(Verdict::Other)
                .map_err(|_| Error::parse(format!("bad verdict {s:?}"))),
            _ => Err(Error::parse(format!("bad verdict {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub requested: Vec<f64>,
    /// Point actually analysed after snapping.
    pub point: Vec<f64>,
    pub verdict: Verdict,
    pub nhat_limit: f64,
    pub quality: f64,
    /// Density at the smallest ladder radius.
    pub density: f64,
    /// Densities along the ladder, increasing radius.
    pub density_ladder: Vec<(f64, f64)>,
    pub fit: Option<BlowupFit>,
    pub notes: Vec<String>,
}

/// Keeps `x0` when the trace there is below the contact threshold, otherwise
/// moves it to the nearest refined free-boundary point.
pub fn snap_to_free_boundary(u: &GridFunction, x0: &[f64], policy: ThresholdPolicy) -> Vec<f64> {
    snap(u, &coincidence_set(u, policy), x0).0
}

fn snap(u: &GridFunction, fb: &FreeBoundarySet, x0: &[f64]) -> (Vec<f64>, Option<String>) {
    let dim = u.grid().dim();
    let mut point = [0.0; 3];
    point[..dim].copy_from_slice(&x0[..dim]);
    if u.interp(point) <= fb.threshold() {
        (x0.to_vec(), None)
    } else if let Some(g) = fb.nearest_gamma(x0) {
        (g.to_vec(), Some(format!("snapped from {x0:?} to {g:?}")))
    } else {
        (x0.to_vec(), Some("no free-boundary points; analysed in place".into()))
    }
}

/// `classify_point`.
pub fn classify_point(
    u: &GridFunction,
    x0: &[f64],
    params: &WeissParams,
    thresholds: &ClassifyThresholds,
) -> Result<Classification> {
    let grid = u.grid();
    let dim = grid.dim();
    if x0.len() != dim || x0[dim - 1] != 0.0 {
        return Err(Error::param("classification point must lie on the thin plane"));
    }
    let fb = coincidence_set(u, thresholds.policy);
    let (point, note) = snap(u, &fb, x0);
    let mut notes: Vec<String> = note.into_iter().collect();
    let limit = frequency_limit(u, &point, params)?;
    let density_ladder = limit
        .radii
        .iter()
        .map(|&r| Ok((r, coincidence_density(&fb, &point, r)?)))
        .collect::<Result<Vec<_>>>()?;
    let density = density_ladder[0].1;
    let nl = limit.value;
    let even = (nl / 2.0).round() * 2.0;
    let verdict = if limit.quality > thresholds.max_quality {
        notes.push(format!("extrapolation quality {:.3e} too poor", limit.quality));
        Verdict::Unresolved
    } else if (nl - 1.5).abs() <= thresholds.gap {
        Verdict::Regular
    } else if even >= 2.0
        && (nl - even).abs() <= thresholds.gap
        && even < params.kappa0
        && density <= thresholds.singular_density
    {
        Verdict::Singular(even as u32)
    } else if nl >= 2.0 - thresholds.gap {
        Verdict::Other(nl)
    } else {
        Verdict::Unresolved
    };
    let h = grid.spacing();
    let fit = match verdict {
        Verdict::Regular => Some(fit_regular_profile(&finest_samples(
            u, &point, 1.5, &limit.radii, params, thresholds, h,
        )?)?),
        Verdict::Singular(k) => Some(fit_singular_polynomial(
            &finest_samples(u, &point, k as f64, &limit.radii, params, thresholds, h)?,
            k,
        )?),
        _ => None,
    };
    Ok(Classification {
        requested: x0.to_vec(),
        point,
        verdict,
        nhat_limit: nl,
        quality: limit.quality,
        density,
        density_ladder,
        fit,
        notes,
    })
}

/// Unit-sphere samples of the finest usable blowup rung.
fn finest_samples(
    u: &GridFunction,
    point: &[f64],
    kappa: f64,
    radii: &[f64],
    params: &WeissParams,
    thresholds: &ClassifyThresholds,
    h: f64,
) -> Result<SphereSamples> {
    let mut ladder: Vec<f64> = radii
        .iter()
        .rev()
        .copied()
        .filter(|&r| r >= thresholds.blowup_min_cells * h * (1.0 - 1e-12))
        .collect();
    if ladder.len() < 3 {
        ladder = radii.iter().rev().take(3).copied().collect();
    }
    let res = blowup(u, point, kappa, &ladder, params, thresholds.blowup_resolution)?;
    Ok(SphereSamples::from_field(res.limit_estimate()))
}

/// Flat record of a classification as written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRow {
    pub point: Vec<f64>,
    pub verdict: Verdict,
    pub nhat_limit: f64,
    pub quality: f64,
    pub density: f64,
    pub residual: f64,
}

impl From<&Classification> for ClassificationRow {
    fn from(c: &Classification) -> Self {
        Self {
            point: c.point.clone(),
            verdict: c.verdict,
            nhat_limit: c.nhat_limit,
            quality: c.quality,
            density: c.density,
            residual: c.fit.as_ref().map_or(f64::NAN, |f| f.residual),
        }
    }
}

pub fn classification_header(dim: usize) -> String {
    let mut cols: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    cols.extend(["verdict", "nhat_limit", "quality", "density", "residual"].map(String::from));
    cols.join(",")
}

pub fn classifications_to_csv(dim: usize, rows: &[ClassificationRow]) -> String {
    let mut out = classification_header(dim);
    out.push('\n');
    for r in rows {
        let mut f: Vec<String> = r.point.iter().map(|v| v.to_string()).collect();
        f.push(r.verdict.to_string());
        f.extend([r.nhat_limit, r.quality, r.density, r.residual].map(|v| v.to_string()));
        out.push_str(&f.join(","));
        out.push('\n');
    }
    out
}

pub fn classifications_from_csv(text: &str) -> Result<Vec<ClassificationRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse("empty classification CSV"))?;
    let dim = match header {
        h if h == classification_header(2) => 2,
        h if h == classification_header(3) => 3,
        _ => return Err(Error::parse("unexpected classification CSV header")),
    };
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != dim + 5 {
            return Err(Error::parse(format!("classification row has {} fields", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(format!("bad number {s:?}")));
        let point = f[..dim].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        rows.push(ClassificationRow {
            point,
            verdict: f[dim].parse()?,
            nhat_limit: num(f[dim + 1])?,
            quality: num(f[dim + 2])?,
            density: num(f[dim + 3])?,
            residual: num(f[dim + 4])?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderRow {
    pub gamma: f64,
    /// Lower edge of the dyadic distance class.
    pub distance: f64,
    pub max_quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFit {
    /// Tangential coordinate along the rotated `e_1`.
    pub slices: Vec<f64>,
    /// Graph values along the seed normal.
    pub g: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub normals: Vec<Vec<f64>>,
    pub holder: Vec<HolderRow>,
}

/// `regular_graph_fit`: free boundary near a regular seed as a graph over
/// the direction orthogonal to the seed normal (3D); in 2D the graph is
/// the seed point itself.
pub fn regular_graph_fit(
    u: &GridFunction,
    seed: &Classification,
    window: f64,
    gammas: &[f64],
) -> Result<GraphFit> {
    let nu = match (&seed.verdict, seed.fit.as_ref().map(|f| &f.kind)) {
        (Verdict::Regular, Some(FitKind::Regular { nu, .. })) => nu.clone(),
        _ => return Err(Error::NotRegularSeed),
    };
    let grid = u.grid();
    let dim = grid.dim();
    let x0 = &seed.point;
    if dim == 2 {
        return Ok(GraphFit {
            slices: vec![0.0],
            g: vec![0.0],
            points: vec![x0.clone()],
            normals: vec![nu],
            holder: Vec::new(),
        });
    }
    let h = grid.spacing();
    let eps = CONTACT_ROUNDOFF * u.scale();
    let perp = [-nu[1], nu[0]];
    let trace_at = |s: f64, t: f64| {
        u.interp([
            x0[0] + s * perp[0] + t * nu[0],
            x0[1] + s * perp[1] + t * nu[1],
            0.0,
        ])
    };
    let steps = (window / h).floor() as i64;
    let fine = h / 4.0;
    let fit_r = 8.0 * h;
    let mut slices = Vec::new();
    let mut g = Vec::new();
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for j in -steps..=steps {
        let s = j as f64 * h;
        let n = (2.0 * window / fine).ceil() as i64;
        let mut crossing = None;
        let mut prev_t = -window;
        let mut prev_contact = trace_at(s, prev_t) <= eps;
        for k in 1..=n {
            let t = -window + k as f64 * fine;
            let contact = trace_at(s, t) <= eps;
            if prev_contact && !contact {
                let (mut lo, mut hi) = (prev_t, t);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if trace_at(s, mid) <= eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                crossing = Some(refine_crossing(&trace_at, s, 0.5 * (lo + hi), h));
                break;
            }
            prev_t = t;
            prev_contact = contact;
        }
        let Some(t) = crossing else { continue };
        let p = vec![x0[0] + s * perp[0] + t * nu[0], x0[1] + s * perp[1] + t * nu[1], 0.0];
        let samples = SphereSamples::from_ball(u, &p, fit_r, 1.5);
        let normal = match fit_regular_profile(&samples) {
            Ok(BlowupFit {
                kind: FitKind::Regular { nu, .. },
                ..
            }) => nu,
            _ => continue,
        };
        slices.push(s);
        g.push(t);
        points.push(p);
        normals.push(normal);
    }
    if slices.is_empty() {
        return Err(Error::NoCrossingInWindow);
    }
    let mut holder = Vec::new();
    for &gamma in gammas {
        let mut classes: Vec<(f64, f64)> = Vec::new();
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                let d = dist2(&points[a], &points[b]).sqrt();
                if d == 0.0 {
                    continue;
                }
                let dn = dist2(&normals[a], &normals[b]).sqrt();
                let q = dn / d.powf(gamma);
                let class = h * 2f64.powf((d / h).log2().floor());
                match classes.iter_mut().find(|(c, _)| (*c - class).abs() < 1e-12 * class) {
                    Some(entry) => entry.1 = entry.1.max(q),
                    None => classes.push((class, q)),
                }
            }
        }
        classes.sort_by(|a, b| a.0.total_cmp(&b.0));
        holder.extend(classes.into_iter().map(|(distance, max_quotient)| HolderRow {
            gamma,
            distance,
            max_quotient,
        }));
    }
    Ok(GraphFit {
        slices,
        g,
        points,
        normals,
        holder,
    })
}

/// Moves a rough crossing to the zero of a linear fit of `u^{2/3}` sampled
/// two to five cells into the non-contact side, where interpolation no
/// longer mixes in contact nodes.
fn refine_crossing(trace_at: &impl Fn(f64, f64) -> f64, s: f64, t: f64, h: f64) -> f64 {
    let ts: Vec<f64> = (0..7).map(|k| t + (2.0 + 0.5 * k as f64) * h).collect();
    let ys: Vec<f64> = ts.iter().map(|&x| trace_at(s, x).max(0.0).powf(2.0 / 3.0)).collect();
    let (slope, intercept) = crate::functionals::linear_fit(&ts, &ys);
    if slope > 0.0 {
        let root = -intercept / slope;
        if (root - t).abs() <= 2.0 * h {
            return root;
        }
    }
    t
}

/// `singular_dimension`: `(n-1) - rank` of the map `ξ ↦ ξ·∇_{x'} q`.
/// The sign flag of the fit is not consulted; the rank is a property of
/// the polynomial alone.
pub fn singular_dimension(fit: &BlowupFit) -> Result<usize> {
    if !matches!(fit.kind, FitKind::Singular { .. }) {
        return Err(Error::NotSingularFit);
    }
    let q = fit.polynomial().ok_or(Error::NotSingularFit)?;
    let tangential = q.dim() - 1;
    let derivs: Vec<_> = (0..tangential).map(|k| q.derivative(k)).collect();
    let mut monomials: Vec<[u32; 3]> = derivs.iter().flat_map(|d| d.terms().map(|(e, _)| *e)).collect();
    monomials.sort();
    monomials.dedup();
    if monomials.is_empty() {
        return Ok(tangential);
    }
    let m = DMatrix::from_fn(monomials.len(), tangential, |i, j| {
        derivs[j]
            .terms()
            .find(|(e, _)| **e == monomials[i])
            .map_or(0.0, |(_, c)| *c)
    });
    let sv = m.singular_values();
    let cutoff = 1e-8 * q.max_coefficient();
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    Ok(tangential - rank)
}

/// Smallest radius used by classification ladders.
pub fn min_ladder_radius(u: &GridFunction, center: &[f64], params: &WeissParams) -> f64 {
    limit_ladder(u.grid(), center, params)
        .first()
        .copied()
        .unwrap_or(MIN_RADIUS_CELLS * u.grid().spacing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{constant, full_contact, qpoly, regular32, regular32_angle};
    use crate::grid::make_grid;

    #[test]
    fn exact_profile_mask_and_density() {
        let g = make_grid(2, 129, 1.0).unwrap();
        let u = regular32(2, 1.0, &[1.0]).unwrap().sample(&g).unwrap();
        let fb = coincidence_set(&u, ThresholdPolicy::default());
        for i in 0..g.thin_count() {
            let x = g.coord(i)[0];
            if x <= 0.0 {
                assert!(fb.lambda_mask()[i]);
            }
        }
        assert_eq!(fb.gamma_points().len(), 1);
        assert!(fb.refined_points()[0][0].abs() <= g.spacing());
        let d = coincidence_density(&fb, &[0.0, 0.0], 0.2).unwrap();
        assert!((d - 0.5).abs() <= 2.0 * g.spacing() / 0.2);
    }

    #[test]
    fn trivial_masks() {
        let g = make_grid(2, 129, 1.0).unwrap();
        let one = constant(2, 1.0).unwrap().sample(&g).unwrap();
        let fb = coincidence_set(&one, ThresholdPolicy::default());
        assert_eq!(fb.contact_count(), 0);
        assert!(fb.gamma_points().is_empty());
        let fc = full_contact(2, 1.0).unwrap().sample(&g).unwrap();
        let fb = coincidence_set(&fc, ThresholdPolicy::default());
        assert_eq!(coincidence_density(&fb, &[0.0, 0.0], 0.3).unwrap(), 1.0);
        let q = qpoly(2, 2, &[1.0]).unwrap().sample(&g).unwrap();
        let fb = coincidence_set(&q, ThresholdPolicy::default());
        assert!(coincidence_density(&fb, &[0.0, 0.0], 0.1).unwrap() < 0.01);
    }

    #[test]
    fn verdict_round_trip() {
        for v in [Verdict::Regular, Verdict::Singular(2), Verdict::Other(2.25), Verdict::Unresolved] {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
        }
        assert!("singular(x)".parse::<Verdict>().is_err());
    }

    #[test]
    fn singular_dimensions() {
        let cases = [(vec![1.0], 0), (vec![1.0, 0.0, 0.0], 1), (vec![0.0, 0.0, 1.0], 0)];
        for (coeffs, expect) in cases {
            let fit = BlowupFit {
                kind: FitKind::Singular {
                    kappa: 2,
                    coeffs,
                    lambda: 1.0,
                    normalized: vec![],
                    not_in_q: false,
                },
                residual: 0.0,
            };
            assert_eq!(singular_dimension(&fit).unwrap(), expect);
        }
        let reg = BlowupFit {
            kind: FitKind::Regular { a: 1.0, nu: vec![1.0] },
            residual: 0.0,
        };
        assert!(matches!(singular_dimension(&reg), Err(Error::NotSingularFit)));
    }

    #[test]
    fn graph_of_rotated_profile() {
        let g = make_grid(3, 65, 1.0).unwrap();
        let sol = regular32_angle(3, 1.0, std::f64::consts::PI / 6.0).unwrap();
        let u = sol.sample(&g).unwrap();
        let seed = Classification {
            requested: vec![0.0; 3],
            point: vec![0.0; 3],
            verdict: Verdict::Regular,
            nhat_limit: 1.5,
            quality: 0.0,
            density: 0.5,
            density_ladder: vec![],
            fit: Some(BlowupFit {
                kind: FitKind::Regular {
                    a: 1.0,
                    nu: vec![(std::f64::consts::PI / 6.0).cos(), 0.5],
                },
                residual: 0.0,
            }),
            notes: vec![],
        };
        let fit = regular_graph_fit(&u, &seed, 0.25, &[0.5]).unwrap();
        assert!(fit.g.len() > 10);
        assert!(fit.g.iter().all(|t| t.abs() <= g.spacing()), "{:?}", fit.g);
    }
}
