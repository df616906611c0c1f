//! Rescalings about thin-plane points, the homogeneous replacement,
//! blowup ladders and profile fits on the unit sphere.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact::thin_sphere_min;
use crate::functionals::WeissParams;
use crate::grid::{sample, sphere_mass, BallSpec, Grid, GridFunction};
use crate::poly::{combine, singular_basis, Polynomial};
use crate::quadrature::SphereRule;

/// Sphere mass below which a field counts as zero for fitting.
const FIT_MASS_FLOOR: f64 = 1e-24;
/// Candidates for the tangential angle in 3D.
const NU_CANDIDATES: usize = 64;
/// Rotation convergence threshold relative to the finest rung's
/// `(∫_{∂B_1} u^2)^{1/2}`.
pub const ROTATION_THRESHOLD: f64 = 0.02;
/// Nonnegativity tolerance on the thin sphere, relative to `λ`.
pub const NONNEG_TOLERANCE: f64 = 1e-8;

/// `phi`: `e^{-(κb/α) r^α} r^κ`.
pub fn phi(kappa: f64, r: f64, params: &WeissParams) -> f64 {
    phi_raw(kappa, r, params.alpha, params.b())
}

fn phi_raw(kappa: f64, r: f64, alpha: f64, b: f64) -> f64 {
    (-(kappa * b / alpha) * r.powf(alpha)).exp() * r.powf(kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RescaleKind {
    /// Divide by `(H(r)/r^{n-1})^{1/2}`.
    Almgren,
    /// Divide by `r^κ`.
    Homogeneous(f64),
    /// Divide by `φ_κ(r)`.
    AlmostHomogeneous { kappa: f64, alpha: f64, b: f64 },
}

impl RescaleKind {
    pub fn almost_homogeneous(kappa: f64, params: &WeissParams) -> Self {
        RescaleKind::AlmostHomogeneous {
            kappa,
            alpha: params.alpha,
            b: params.b(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleSpec {
    pub kind: RescaleKind,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Resolution of the target grid.
    pub resolution: usize,
    /// Radius of the ball the target grid must cover.
    pub extent: f64,
}

impl RescaleSpec {
    pub fn unit(kind: RescaleKind, center: &[f64], radius: f64, resolution: usize) -> Self {
        Self {
            kind,
            center: center.to_vec(),
            radius,
            resolution,
            extent: 1.0,
        }
    }
}

/// Divisor for the rescaling.
pub fn normalizer(u: &GridFunction, spec: &RescaleSpec) -> Result<f64> {
    let dim = u.grid().dim();
    let r = spec.radius;
    Ok(match spec.kind {
        RescaleKind::Almgren => {
            let h = sphere_mass(u, &BallSpec::new(&spec.center, r)?)?;
            if h <= crate::functionals::DEGENERACY_FLOOR * u.scale().powi(2) {
                return Err(Error::DegenerateBoundaryMass { radius: r });
            }
            (h / r.powi(dim as i32 - 1)).sqrt()
        }
        RescaleKind::Homogeneous(k) => r.powf(k),
        RescaleKind::AlmostHomogeneous { kappa, alpha, b } => {
            let p = phi_raw(kappa, r, alpha, b);
            if !(p > 0.0) {
                return Err(Error::param("phi(r) must be positive"));
            }
            p
        }
    })
}

/// `rescale_field`: `x ↦ u(r x + x_0) / normalizer` on a grid covering
/// `B_extent(0)`.
pub fn rescale_field(u: &GridFunction, spec: &RescaleSpec) -> Result<GridFunction> {
    let src = u.grid();
    let dim = src.dim();
    if spec.center.len() != dim || spec.center[dim - 1] != 0.0 {
        return Err(Error::param("rescaling centre must be a thin-plane point"));
    }
    if !(spec.radius > 0.0 && spec.extent > 0.0) {
        return Err(Error::param("rescaling radius and extent must be positive"));
    }
    let target = Grid::covering_ball(dim, spec.resolution, spec.extent)?;
    let half = spec.radius * target.extent();
    let reach = (0..dim - 1).fold(half, |m, k| m.max(spec.center[k].abs() + half));
    if reach > src.extent() * (1.0 + 1e-12) {
        return Err(Error::DomainExceeded(format!(
            "rescaled cube reaches {reach}, source extent is {}",
            src.extent()
        )));
    }
    let div = normalizer(u, spec)?;
    let c = &spec.center;
    let r = spec.radius;
    sample(
        |y| {
            let mut x = [0.0; 3];
            for k in 0..dim {
                x[k] = c[k] + r * y[k];
            }
            u.interp(x) / div
        },
        &target,
    )
}

/// `homogeneous_replacement`: `w(x) = (|x-c|/t)^κ u(c + t (x-c)/|x-c|)` on
/// the grid of `u`.
pub fn homogeneous_replacement(u: &GridFunction, ball: &BallSpec, kappa: f64) -> Result<GridFunction> {
    let grid = u.grid();
    grid.check_ball(ball)?;
    let dim = grid.dim();
    let c = ball.center();
    let t = ball.radius();
    sample(
        |x| {
            let rho = (0..dim).map(|k| (x[k] - c[k]).powi(2)).sum::<f64>().sqrt();
            if rho == 0.0 {
                return 0.0;
            }
            let mut p = [0.0; 3];
            for k in 0..dim {
                p[k] = c[k] + t * (x[k] - c[k]) / rho;
            }
            (rho / t).powf(kappa) * u.interp(p)
        },
        grid,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupResult {
    pub center: Vec<f64>,
    pub kappa: f64,
    /// Strictly decreasing radii.
    pub ladder: Vec<f64>,
    /// `∫_{∂B_1} |u_{t_j} - u_{t_{j+1}}|` for consecutive rungs.
    pub rotation_metrics: Vec<f64>,
    /// `φ(r)` over the Almgren normalizer at each rung.
    pub mu: Vec<f64>,
    pub threshold: f64,
    pub converged: bool,
    #[serde(skip)]
    pub fields: Vec<GridFunction>,
}

impl BlowupResult {
    /// Finest-rung field.
    pub fn limit_estimate(&self) -> &GridFunction {
        self.fields.last().expect("blowup has at least three rungs")
    }
}

/// `blowup`: almost-homogeneous rescalings along `ladder` with rotation
/// metrics between consecutive rungs.
pub fn blowup(
    u: &GridFunction,
    center: &[f64],
    kappa: f64,
    ladder: &[f64],
    params: &WeissParams,
    resolution: usize,
) -> Result<BlowupResult> {
    if ladder.len() < 3 {
        return Err(Error::param("blowup needs at least 3 rungs"));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("blowup ladder must be strictly decreasing"));
    }
    let kind = RescaleKind::almost_homogeneous(kappa, params);
    let rungs = ladder
        .par_iter()
        .map(|&r| -> Result<(GridFunction, f64)> {
            let spec = RescaleSpec::unit(kind, center, r, resolution);
            let f = rescale_field(u, &spec)?;
            let almgren = normalizer(
                u,
                &RescaleSpec {
                    kind: RescaleKind::Almgren,
                    ..spec.clone()
                },
            )
            .unwrap_or(f64::NAN);
            Ok((f, phi(kappa, r, params) / almgren))
        })
        .collect::<Result<Vec<_>>>()?;
    let (fields, mu): (Vec<_>, Vec<_>) = rungs.into_iter().unzip();
    let dim = u.grid().dim();
    let rule = SphereRule::standard(dim);
    let origin = [0.0; 3];
    let traces: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| rule.scaled_points(&origin, 1.0).map(|p| f.interp(p)).collect())
        .collect();
    let rotation_metrics = traces
        .windows(2)
        .map(|w| rule.integrate_even(1.0, w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs())))
        .collect::<Vec<_>>();
    let finest_mass = rule.integrate_even(1.0, traces.last().unwrap().iter().map(|v| v * v));
    let threshold = ROTATION_THRESHOLD * finest_mass.sqrt();
    let converged = *rotation_metrics.last().unwrap() <= threshold;
    Ok(BlowupResult {
        center: center.to_vec(),
        kappa,
        ladder: ladder.to_vec(),
        rotation_metrics,
        mu,
        threshold,
        converged,
        fields,
    })
}

/// Values of a field at the nodes of a hemisphere rule on the unit sphere.
#[derive(Debug, Clone)]
pub struct SphereSamples {
    rule: SphereRule,
    values: Vec<f64>,
}

impl SphereSamples {
    pub fn from_fn(dim: usize, f: impl Fn(&[f64]) -> f64) -> Self {
        let rule = SphereRule::standard(dim);
        let values = rule.points().iter().map(|p| f(&p[..dim])).collect();
        Self { rule, values }
    }

    /// Unit sphere about the origin of a rescaled field.
    pub fn from_field(w: &GridFunction) -> Self {
        Self::from_ball(w, &vec![0.0; w.grid().dim()], 1.0, 0.0)
    }

    /// `u(c + r p) / r^κ`.
    pub fn from_ball(u: &GridFunction, center: &[f64], r: f64, kappa: f64) -> Self {
        let dim = u.grid().dim();
        let rule = SphereRule::standard(dim);
        let s = r.powf(kappa);
        let values = rule
            .scaled_points(center, r)
            .map(|x| u.interp(x) / s)
            .collect();
        Self { rule, values }
    }

    pub fn dim(&self) -> usize {
        self.rule.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.rule
            .weights()
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    /// `∫_{∂B_1} f^2`.
    pub fn mass(&self) -> f64 {
        2.0 * self.inner(&self.values, &self.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitKind {
    Regular {
        a: f64,
        nu: Vec<f64>,
    },
    Singular {
        kappa: u32,
        coeffs: Vec<f64>,
        lambda: f64,
        normalized: Vec<f64>,
        not_in_q: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub kind: FitKind,
    /// Relative L² misfit on the unit sphere.
    pub residual: f64,
}

impl BlowupFit {
    pub fn dim(&self) -> usize {
        match &self.kind {
            FitKind::Regular { nu, .. } => nu.len() + 1,
            FitKind::Singular { coeffs, .. } => {
                if coeffs.len() == 1 {
                    2
                } else {
                    3
                }
            }
        }
    }

    /// The fitted polynomial of a singular fit.
    pub fn polynomial(&self) -> Option<Polynomial> {
        match &self.kind {
            FitKind::Singular { kappa, coeffs, .. } => {
                let basis = singular_basis(self.dim(), *kappa).ok()?;
                Some(combine(&basis, coeffs))
            }
            FitKind::Regular { .. } => None,
        }
    }
}

/// `Re(x'·ν + i|x_n|)^{3/2}` at a unit-sphere point.
fn regular_shape(p: &[f64], nu: &[f64]) -> f64 {
    let d = p.len();
    let s: f64 = (0..d - 1).map(|k| p[k] * nu[k]).sum();
    let y = p[d - 1].abs();
    let rho = s.hypot(y);
    rho.powf(1.5) * (1.5 * y.atan2(s)).cos()
}

struct RegularObjective<'a> {
    samples: &'a SphereSamples,
    dim: usize,
}

impl RegularObjective<'_> {
    fn nu(&self, angle: f64) -> Vec<f64> {
        if self.dim == 2 {
            vec![angle.cos().signum()]
        } else {
            vec![angle.cos(), angle.sin()]
        }
    }

    fn shape(&self, nu: &[f64]) -> Vec<f64> {
        self.samples
            .rule
            .points()
            .iter()
            .map(|p| regular_shape(&p[..self.dim], nu))
            .collect()
    }

    /// Projection coefficient `<w, φ>/|φ|` (signed) at the angle.
    fn score(&self, angle: f64) -> f64 {
        let phi = self.shape(&self.nu(angle));
        self.samples.inner(&self.samples.values, &phi) / self.samples.inner(&phi, &phi).sqrt()
    }
}

/// `fit_regular_profile`: best `a Re(x'·ν + i|x_n|)^{3/2}` with `a > 0`.
pub fn fit_regular_profile(samples: &SphereSamples) -> Result<BlowupFit> {
    let mass = samples.mass();
    if !(mass > FIT_MASS_FLOOR) {
        return Err(Error::DegenerateField);
    }
    let dim = samples.dim();
    let obj = RegularObjective { samples, dim };
    let angle = if dim == 2 {
        if obj.score(0.0) >= obj.score(PI) {
            0.0
        } else {
            PI
        }
    } else {
        let step = 2.0 * PI / NU_CANDIDATES as f64;
        let (mut best, mut best_score) = (0.0, f64::NEG_INFINITY);
        for k in 0..NU_CANDIDATES {
            let t = k as f64 * step;
            let s = obj.score(t);
            if s > best_score {
                best = t;
                best_score = s;
            }
        }
        refine_angle(&obj, best, step)
    };
    let nu = obj.nu(angle);
    let phi = obj.shape(&nu);
    let a = (samples.inner(&samples.values, &phi) / samples.inner(&phi, &phi)).max(0.0);
    let misfit: Vec<f64> = samples.values.iter().zip(&phi).map(|(w, p)| w - a * p).collect();
    let residual = (samples.inner(&misfit, &misfit) / samples.inner(&samples.values, &samples.values)).sqrt();
    let nu = if dim == 2 { vec![nu[0]] } else { nu };
    Ok(BlowupFit {
        kind: FitKind::Regular { a, nu },
        residual,
    })
}

/// Golden-section search on `[x - step, x + step]`, then Newton steps on
/// the derivative of the score.
fn refine_angle(obj: &RegularObjective, x: f64, step: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (x - step, x + step);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (obj.score(c), obj.score(d));
    while hi - lo > 1e-6 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = obj.score(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = obj.score(d);
        }
    }
    let mut t = 0.5 * (lo + hi);
    let delta = 1e-5;
    for _ in 0..4 {
        let (fm, f0, fp) = (obj.score(t - delta), obj.score(t), obj.score(t + delta));
        let d1 = (fp - fm) / (2.0 * delta);
        let d2 = (fp - 2.0 * f0 + fm) / (delta * delta);
        if d2 >= 0.0 {
            break;
        }
        let stepn = -d1 / d2;
        if stepn.abs() > 1e-4 {
            break;
        }
        t += stepn;
        if stepn.abs() < 1e-13 {
            break;
        }
    }
    t.rem_euclid(2.0 * PI)
}

/// `fit_singular_polynomial`: least squares over the even harmonic
/// degree-κ basis.
pub fn fit_singular_polynomial(samples: &SphereSamples, kappa: u32) -> Result<BlowupFit> {
    let dim = samples.dim();
    let basis = singular_basis(dim, kappa)?;
    let mass = samples.mass();
    if !(mass > FIT_MASS_FLOOR) {
        return Err(Error::DegenerateField);
    }
    let pts = samples.rule.points();
    let wts = samples.rule.weights();
    let m = pts.len();
    let a = DMatrix::from_fn(m, basis.len(), |i, j| wts[i].sqrt() * basis[j].eval(&pts[i][..dim]));
    let y = DVector::from_iterator(m, (0..m).map(|i| wts[i].sqrt() * samples.values[i]));
    let svd = a.clone().svd(true, true);
    let coeffs = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::param(format!("least squares failed: {e}")))?;
    let misfit = &a * &coeffs - &y;
    let residual = misfit.norm() / y.norm();
    let coeffs: Vec<f64> = coeffs.iter().copied().collect();
    let q = combine(&basis, &coeffs);
    let q_vals: Vec<f64> = pts.iter().map(|p| q.eval(&p[..dim])).collect();
    let lambda = (2.0 * samples.inner(&q_vals, &q_vals)).sqrt();
    let not_in_q = q.is_zero() || thin_sphere_min(&q) < -NONNEG_TOLERANCE * lambda;
    let normalized = coeffs
        .iter()
        .map(|c| if lambda > 0.0 { c / lambda } else { 0.0 })
        .collect();
    Ok(BlowupFit {
        kind: FitKind::Singular {
            kappa,
            coeffs,
            lambda,
            normalized,
            not_in_q,
        },
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qpoly, regular32, regular32_angle};
    use crate::functionals::frequency;
    use crate::grid::{ball_energy, make_grid, sphere_tangential_energy};

    #[test]
    fn phi_values() {
        let p = WeissParams::new(2, 0.5, 1.5, 2.0, 1.0).unwrap();
        let v = phi(1.5, 0.01, &p);
        assert!((v - (-3.6f64).exp() * 1e-3).abs() < 1e-15);
        assert!((v - 2.732e-5).abs() < 1e-8);
        // φ' = κ φ (1 - b r^α) / r
        for r in [0.001, 0.01, 0.02] {
            let d = 1e-7 * r;
            let fd = (phi(1.5, r + d, &p) - phi(1.5, r - d, &p)) / (2.0 * d);
            let an = 1.5 * phi(1.5, r, &p) * p.correction(r) / r;
            assert!((fd - an).abs() <= 1e-6 * an.abs());
        }
        assert!((phi_raw(1.5, 1e-14, 0.5, 12.0) / 1e-14f64.powf(1.5) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn homogeneous_rescaling_is_scale_free() {
        let g = make_grid(2, 257, 1.0).unwrap();
        let q = qpoly(2, 2, &[1.0]).unwrap();
        let u = q.sample(&g).unwrap();
        let a = rescale_field(&u, &RescaleSpec::unit(RescaleKind::Homogeneous(2.0), &[0.0, 0.0], 0.2, 65)).unwrap();
        let b = rescale_field(&u, &RescaleSpec::unit(RescaleKind::Homogeneous(2.0), &[0.0, 0.0], 0.4, 65)).unwrap();
        let diff = a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff < 1e-3, "{diff}");
        assert!(matches!(
            rescale_field(&u, &RescaleSpec::unit(RescaleKind::Homogeneous(2.0), &[0.5, 0.0], 0.8, 65)),
            Err(Error::DomainExceeded(_))
        ));
    }

    #[test]
    fn almgren_normalization_and_covariance() {
        let g = make_grid(2, 257, 1.0).unwrap();
        let u = regular32(2, 1.0, &[1.0]).unwrap().sample(&g).unwrap();
        let r = 0.3;
        let ua = rescale_field(&u, &RescaleSpec::unit(RescaleKind::Almgren, &[0.0, 0.0], r, 257)).unwrap();
        let m = sphere_mass(&ua, &BallSpec::origin(2, 1.0).unwrap()).unwrap();
        assert!((m - 1.0).abs() < 1e-3, "{m}");
        let rho = 0.5;
        let n1 = frequency(&ua, &BallSpec::origin(2, rho).unwrap()).unwrap();
        let n2 = frequency(&u, &BallSpec::origin(2, rho * r).unwrap()).unwrap();
        assert!((n1 - n2).abs() < 1e-2, "{n1} {n2}");
    }

    #[test]
    fn homogeneous_replacement_energy_identity() {
        let g = make_grid(2, 257, 1.0).unwrap();
        let u = sample(|x| 1.0 + x[0] + 0.5 * x[0] * x[0] - 0.5 * x[1] * x[1], &g).unwrap();
        let ball = BallSpec::origin(2, 0.5).unwrap();
        let w = homogeneous_replacement(&u, &ball, 1.5).unwrap();
        let lhs = ball_energy(&w, &ball).unwrap();
        let rhs = 0.5 / (2.0 + 3.0 - 2.0) * sphere_tangential_energy(&u, &ball, 1.5).unwrap();
        assert!((lhs - rhs).abs() < 0.02 * rhs, "{lhs} {rhs}");
        let c = sample(|_| 3.0, &g).unwrap();
        let wc = homogeneous_replacement(&c, &ball, 2.0).unwrap();
        for i in 0..g.node_count() {
            let x = g.coord(i);
            let e = 3.0 * (x[0] * x[0] + x[1] * x[1]) / 0.25;
            assert!((wc.values()[i] - e).abs() < 1e-9 * e.max(1.0));
        }
    }

    #[test]
    fn regular_fit_recovers_profile_3d() {
        let sol = regular32_angle(3, 2.0, PI / 6.0).unwrap();
        let s = SphereSamples::from_fn(3, |x| sol.evaluate(x));
        let fit = fit_regular_profile(&s).unwrap();
        let FitKind::Regular { a, nu } = &fit.kind else {
            panic!()
        };
        assert!((a - 2.0).abs() < 1e-6, "{a}");
        let ang = nu[1].atan2(nu[0]);
        assert!((ang - PI / 6.0).abs() < 1e-4, "{ang}");
        assert!(fit.residual < 1e-8, "{}", fit.residual);
    }

    #[test]
    fn fits_reject_the_other_class() {
        let q = qpoly(2, 2, &[1.0]).unwrap();
        let s = SphereSamples::from_fn(2, |x| q.evaluate(x));
        assert!(fit_regular_profile(&s).unwrap().residual >= 0.2);
        let fit = fit_singular_polynomial(&s, 2).unwrap();
        let FitKind::Singular { coeffs, lambda, not_in_q, .. } = &fit.kind else {
            panic!()
        };
        assert!((coeffs[0] - 1.0).abs() < 1e-10);
        assert!((lambda - PI.sqrt()).abs() < 0.01 * PI.sqrt());
        assert!(!not_in_q);
        let u = regular32(2, 1.0, &[1.0]).unwrap();
        let s = SphereSamples::from_fn(2, |x| u.evaluate(x));
        assert!(fit_singular_polynomial(&s, 2).unwrap().residual >= 0.2);
        let neg = SphereSamples::from_fn(2, |x| -q.evaluate(x));
        let FitKind::Singular { not_in_q, .. } = fit_singular_polynomial(&neg, 2).unwrap().kind else {
            panic!()
        };
        assert!(not_in_q);
        let zero = SphereSamples::from_fn(2, |_| 0.0);
        assert!(matches!(fit_regular_profile(&zero), Err(Error::DegenerateField)));
    }

    #[test]
    fn blowup_of_exact_polynomial_converges() {
        let g = make_grid(2, 257, 1.0).unwrap();
        let u = qpoly(2, 2, &[1.0]).unwrap().sample(&g).unwrap();
        let p = WeissParams::new(2, 1.9, 2.0, 4.0, 1.0).unwrap();
        let ladder = [0.2, 0.1, 0.05];
        let res = blowup(&u, &[0.0, 0.0], 2.0, &ladder, &p, 129).unwrap();
        assert_eq!(res.rotation_metrics.len(), 2);
        // u(rx)/φ(r) = e^{c r^α} q(x), and ∫_{∂B_1} |q| = 4
        let c = 2.0 * p.b() / p.alpha;
        for (j, m) in res.rotation_metrics.iter().enumerate() {
            let e = |t: f64| (c * t.powf(p.alpha)).exp();
            let expect = (e(ladder[j]) - e(ladder[j + 1])).abs() * 4.0;
            assert!((m - expect).abs() < 0.01 * expect.max(0.1), "{m} {expect}");
        }
        assert!(res.rotation_metrics[1] < res.rotation_metrics[0]);
    }
}
