//! Fixed quadrature rules: Gauss–Legendre on intervals and hemisphere rules
//! for sphere integrals of even fields.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

/// Quadrature on the closed upper unit hemisphere `{|p| = 1, p_n >= 0}`.
///
/// Weights sum to half the unit sphere measure; integrals of fields that
/// are even in `x_n` are twice the hemisphere sum.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

/// Angular resolution of the grid-facing sphere rules.
pub const CIRCLE_ANGLES: usize = 256;
pub const SPHERE_LATITUDES: usize = 64;
pub const SPHERE_LONGITUDES: usize = 128;

impl SphereRule {
    /// Uniform midpoint rule in 2D, latitude–longitude rule in 3D.
    pub fn standard(dim: usize) -> Self {
        match dim {
            2 => Self::circle_midpoint(CIRCLE_ANGLES),
            _ => Self::lat_long(SPHERE_LATITUDES, SPHERE_LONGITUDES),
        }
    }

    /// High-order rule for reference integrals evaluated directly on
    /// closed-form fields.
    pub fn reference(dim: usize, order: usize) -> Self {
        match dim {
            2 => Self::circle_gauss(order / 2),
            _ => Self::lat_long(order / 4, order / 2),
        }
    }

    pub fn circle_midpoint(angles: usize) -> Self {
        let dt = PI / angles as f64;
        let points = (0..angles)
            .map(|k| {
                let t = (k as f64 + 0.5) * dt;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        Self {
            dim: 2,
            points,
            weights: vec![dt; angles],
        }
    }

    pub fn circle_gauss(order: usize) -> Self {
        let (points, weights) = gauss_legendre_on(order, 0.0, PI)
            .into_iter()
            .map(|(t, w)| ([t.cos(), t.sin(), 0.0], w))
            .unzip();
        Self {
            dim: 2,
            points,
            weights,
        }
    }

    /// Gauss–Legendre in `cos` of the polar angle (measured from the
    /// `x_n` axis) times a uniform periodic rule in longitude.
    pub fn lat_long(latitudes: usize, longitudes: usize) -> Self {
        let dphi = 2.0 * PI / longitudes as f64;
        let mut points = Vec::with_capacity(latitudes * longitudes);
        let mut weights = Vec::with_capacity(latitudes * longitudes);
        for (z, wz) in gauss_legendre_on(latitudes, 0.0, 1.0) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..longitudes {
                let phi = (j as f64 + 0.5) * dphi;
                points.push([s * phi.cos(), s * phi.sin(), z]);
                weights.push(wz * dphi);
            }
        }
        Self {
            dim: 3,
            points,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Unit vectors with `p[dim - 1] >= 0`.
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_{∂B_r(c)} f` for `f` even in `x_n`, from samples at
    /// `c + r p_k`.
    pub fn integrate_even(&self, radius: f64, samples: impl IntoIterator<Item = f64>) -> f64 {
        let sum: f64 = self
            .weights
            .iter()
            .zip(samples)
            .map(|(w, s)| w * s)
            .sum();
        2.0 * radius.powi(self.dim as i32 - 1) * sum
    }

    /// Physical points `c + r p_k`.
    pub fn scaled_points<'a>(
        &'a self,
        center: &'a [f64],
        radius: f64,
    ) -> impl Iterator<Item = [f64; 3]> + 'a {
        self.points.iter().map(move |p| {
            let mut x = [0.0; 3];
            for (k, xk) in x.iter_mut().enumerate().take(self.dim) {
                *xk = center[k] + radius * p[k];
            }
            x
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre_on(8, 0.0, 2.0);
        // exact up to degree 15
        let integral: f64 = rule.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!((integral - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hemisphere_weights_sum_to_half_measure() {
        let c = SphereRule::standard(2);
        assert!((c.weights().iter().sum::<f64>() - PI).abs() < 1e-12);
        let s = SphereRule::standard(3);
        assert!((s.weights().iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        assert!(s.points().iter().all(|p| p[2] > 0.0));
    }

    #[test]
    fn sphere_area_of_radius_two() {
        let s = SphereRule::standard(3);
        let area = s.integrate_even(2.0, std::iter::repeat_n(1.0, s.len()));
        assert!((area - 16.0 * PI).abs() < 1e-10);
    }
}
