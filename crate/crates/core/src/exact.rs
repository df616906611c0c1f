//! Closed-form Signorini solutions and reference integrals computed
//! directly from them.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample, Grid, GridFunction};
use crate::poly::{combine, singular_basis, Polynomial};
use crate::quadrature::{gauss_legendre_on, SphereRule};

/// Minimum reference orders: angular points in 2D, latitudes x longitudes
/// in 3D.
pub const ORACLE_ORDER_2D: usize = 2048;
pub const ORACLE_ORDER_3D: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactKind {
    /// `a Re(x'·ν + i|x_n|)^{3/2}`.
    Regular32 { a: f64, nu: Vec<f64> },
    /// Even harmonic degree-κ polynomial over the tabulated basis.
    QPoly { kappa: u32, coeffs: Vec<f64> },
    Constant { c: f64 },
    /// `-c |x_n|`: contact on the whole thin plane.
    FullContact { c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    dim: usize,
    kind: ExactKind,
    poly: Option<Polynomial>,
}

/// `regular32(a, ν)`.
pub fn regular32(dim: usize, a: f64, nu: &[f64]) -> Result<ExactSolution> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::param(format!("regular amplitude must be positive, got {a}")));
    }
    let norm = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nu.len() != dim - 1 || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitNormal);
    }
    Ok(ExactSolution {
        dim,
        kind: ExactKind::Regular32 {
            a,
            nu: nu.to_vec(),
        },
        poly: None,
    })
}

/// Regular profile with `ν = (cos ψ, sin ψ)` in 3D, `±e_1` in 2D.
pub fn regular32_angle(dim: usize, a: f64, angle: f64) -> Result<ExactSolution> {
    let nu = if dim == 2 {
        let c = angle.cos();
        if (c.abs() - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitNormal);
        }
        vec![c.signum()]
    } else {
        vec![angle.cos(), angle.sin()]
    };
    regular32(dim, a, &nu)
}

/// `qpoly(κ, coeffs)`.
pub fn qpoly(dim: usize, kappa: u32, coeffs: &[f64]) -> Result<ExactSolution> {
    let basis = singular_basis(dim, kappa)?;
    if coeffs.len() != basis.len() {
        return Err(Error::param(format!(
            "expected {} coefficients for degree {kappa} in {dim}D, got {}",
            basis.len(),
            coeffs.len()
        )));
    }
    let poly = combine(&basis, coeffs);
    if poly.is_zero() || thin_sphere_min(&poly) < -1e-12 * poly.max_coefficient() {
        return Err(Error::NotInQ);
    }
    Ok(ExactSolution {
        dim,
        kind: ExactKind::QPoly {
            kappa,
            coeffs: coeffs.to_vec(),
        },
        poly: Some(poly),
    })
}

pub fn constant(dim: usize, c: f64) -> Result<ExactSolution> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::param("constant solution must be nonnegative"));
    }
    Ok(ExactSolution {
        dim,
        kind: ExactKind::Constant { c },
        poly: None,
    })
}

pub fn full_contact(dim: usize, c: f64) -> Result<ExactSolution> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param("full-contact slope must be positive"));
    }
    Ok(ExactSolution {
        dim,
        kind: ExactKind::FullContact { c },
        poly: None,
    })
}

/// Minimum of a polynomial over the thin unit sphere `{|x'| = 1, x_n = 0}`.
pub(crate) fn thin_sphere_min(p: &Polynomial) -> f64 {
    match p.dim() {
        2 => p.eval(&[1.0, 0.0]).min(p.eval(&[-1.0, 0.0])),
        _ => (0..720)
            .map(|k| {
                let t = k as f64 * PI / 360.0;
                p.eval(&[t.cos(), t.sin(), 0.0])
            })
            .fold(f64::INFINITY, f64::min),
    }
}

impl ExactSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ExactKind {
        &self.kind
    }

    /// Degree of homogeneity.
    pub fn homogeneity(&self) -> f64 {
        match &self.kind {
            ExactKind::Regular32 { .. } => 1.5,
            ExactKind::QPoly { kappa, .. } => *kappa as f64,
            ExactKind::Constant { .. } => 0.0,
            ExactKind::FullContact { .. } => 1.0,
        }
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        self.poly.as_ref()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        match &self.kind {
            ExactKind::Regular32 { a, nu } => {
                let s: f64 = nu.iter().zip(x).map(|(v, xk)| v * xk).sum();
                let y = x[n - 1].abs();
                let rho = s.hypot(y);
                a * rho.powf(1.5) * (1.5 * y.atan2(s)).cos()
            }
            ExactKind::QPoly { .. } => self.poly.as_ref().map_or(0.0, |p| p.eval(x)),
            ExactKind::Constant { c } => *c,
            ExactKind::FullContact { c } => -c * x[n - 1].abs(),
        }
    }

    /// Analytic gradient; on the thin plane the `x_n` component is the
    /// one-sided limit from above.
    pub fn gradient(&self, x: &[f64]) -> [f64; 3] {
        let n = self.dim;
        let sign = if x[n - 1] < 0.0 { -1.0 } else { 1.0 };
        let mut g = [0.0; 3];
        match &self.kind {
            ExactKind::Regular32 { a, nu } => {
                let s: f64 = nu.iter().zip(x).map(|(v, xk)| v * xk).sum();
                let z = Complex64::new(s, x[n - 1].abs());
                let d = 1.5 * a * z.sqrt();
                for k in 0..n - 1 {
                    g[k] = d.re * nu[k];
                }
                g[n - 1] = -d.im * sign;
            }
            ExactKind::QPoly { .. } => {
                if let Some(p) = &self.poly {
                    g = p.gradient(x);
                }
            }
            ExactKind::Constant { .. } => {}
            ExactKind::FullContact { c } => g[n - 1] = -c * sign,
        }
        g
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        if grid.dim() != self.dim {
            return Err(Error::param(format!(
                "{}D solution sampled on a {}D grid",
                self.dim,
                grid.dim()
            )));
        }
        sample(|x| self.evaluate(x), grid)
    }

    /// Parses a library name such as `regular32:a=1,nu=30deg`,
    /// `qpoly2d:1`, `qpoly3d:k=4:1,0,0,0,0`, `constant:c=2` or
    /// `fullcontact:c=1`.
    pub fn parse(name: &str, dim: usize) -> Result<Self> {
        let name = name.trim();
        let (head, rest) = name.split_once(':').unwrap_or((name, ""));
        match head {
            "regular32" => {
                let mut a = 1.0;
                let mut angle = 0.0;
                for part in rest.split(',').filter(|p| !p.is_empty()) {
                    let (key, value) = part
                        .split_once('=')
                        .ok_or_else(|| Error::parse(format!("expected key=value in `{part}`")))?;
                    match key.trim() {
                        "a" => a = parse_number(value)?,
                        "nu" => angle = parse_angle(value)?,
                        other => return Err(Error::parse(format!("unknown key `{other}`"))),
                    }
                }
                regular32_angle(dim, a, angle)
            }
            "qpoly2d" | "qpoly3d" => {
                let named_dim = if head == "qpoly2d" { 2 } else { 3 };
                if named_dim != dim {
                    return Err(Error::parse(format!("`{head}` used on a {dim}D grid")));
                }
                let (kappa, coeffs) = match rest.strip_prefix("k=") {
                    Some(r) => {
                        let (k, c) = r
                            .split_once(':')
                            .ok_or_else(|| Error::parse("expected k=<degree>:<coeffs>"))?;
                        let k: u32 = k
                            .trim()
                            .parse()
                            .map_err(|_| Error::parse(format!("bad degree `{k}`")))?;
                        (k, c)
                    }
                    None => (2, rest),
                };
                let coeffs = coeffs
                    .split(',')
                    .map(parse_number)
                    .collect::<Result<Vec<_>>>()?;
                qpoly(dim, kappa, &coeffs)
            }
            "constant" | "fullcontact" => {
                let value = rest.strip_prefix("c=").unwrap_or(rest);
                let c = if value.is_empty() {
                    1.0
                } else {
                    parse_number(value)?
                };
                if head == "constant" {
                    constant(dim, c)
                } else {
                    full_contact(dim, c)
                }
            }
            other => Err(Error::parse(format!("unknown exact solution `{other}`"))),
        }
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::parse(format!("bad number `{s}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(format!("non-finite number `{s}`")))
    }
}

fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    match s.strip_suffix("deg") {
        Some(d) => Ok(parse_number(d)?.to_radians()),
        None => parse_number(s),
    }
}

impl fmt::Display for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExactKind::Regular32 { a, nu } => {
                let angle = if self.dim == 2 {
                    if nu[0] > 0.0 {
                        0.0
                    } else {
                        180.0
                    }
                } else {
                    nu[1].atan2(nu[0]).to_degrees()
                };
                write!(f, "regular32:a={a},nu={angle}deg")
            }
            ExactKind::QPoly { kappa, coeffs } => {
                let c: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                if *kappa == 2 {
                    write!(f, "qpoly{}d:{}", self.dim, c.join(","))
                } else {
                    write!(f, "qpoly{}d:k={kappa}:{}", self.dim, c.join(","))
                }
            }
            ExactKind::Constant { c } => write!(f, "constant:c={c}"),
            ExactKind::FullContact { c } => write!(f, "fullcontact:c={c}"),
        }
    }
}

/// `oracle_sphere_mass`: `∫_{∂B_r(0)} u^2` by direct evaluation.
pub fn oracle_sphere_mass(sol: &ExactSolution, r: f64, order: usize) -> Result<f64> {
    let min = if sol.dim == 2 {
        ORACLE_ORDER_2D
    } else {
        ORACLE_ORDER_3D
    };
    if order < min {
        return Err(Error::param(format!("oracle order {order} below {min}")));
    }
    let rule = SphereRule::reference(sol.dim, order);
    let origin = [0.0; 3];
    let samples = rule
        .scaled_points(&origin, r)
        .map(|x| sol.evaluate(&x[..sol.dim]).powi(2))
        .collect::<Vec<_>>();
    Ok(rule.integrate_even(r, samples))
}

/// `oracle_ball_energy`: `∫_{B_r(0)} |∇u|^2` from the homogeneity identity
/// `D(r) = κ r^{n+2κ-2} H(1)`.
pub fn oracle_ball_energy(sol: &ExactSolution, r: f64, order: usize) -> Result<f64> {
    let kappa = sol.homogeneity();
    let n = sol.dim as f64;
    let mass = oracle_sphere_mass(sol, 1.0, order)?;
    Ok(kappa * r.powf(n + 2.0 * kappa - 2.0) * mass)
}

/// Radial-shell quadrature of `∫_{B_r(0)} |∇u|^2` with analytic gradients;
/// independent of the homogeneity identity.
pub fn shell_ball_energy(sol: &ExactSolution, r: f64) -> f64 {
    let rule = match sol.dim {
        2 => SphereRule::circle_gauss(512),
        _ => SphereRule::lat_long(64, 128),
    };
    let origin = [0.0; 3];
    gauss_legendre_on(64, 0.0, r)
        .into_iter()
        .map(|(s, w)| {
            let samples = rule
                .scaled_points(&origin, s)
                .map(|x| {
                    let g = sol.gradient(&x[..sol.dim]);
                    g.iter().map(|v| v * v).sum::<f64>()
                })
                .collect::<Vec<_>>();
            w * rule.integrate_even(s, samples)
        })
        .sum()
}
