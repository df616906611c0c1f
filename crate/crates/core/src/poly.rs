//! Homogeneous polynomials in up to three variables and the bases of even,
//! harmonic, degree-κ polynomials used for singular blowups.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Even degrees for which singular bases are tabulated.
pub const SUPPORTED_SINGULAR_DEGREES: [u32; 2] = [2, 4];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<[u32; 3], f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(dim: usize, exps: [u32; 3], coef: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(exps, coef);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &f64)> {
        self.terms.iter()
    }

    fn add_term(&mut self, exps: [u32; 3], coef: f64) {
        if coef == 0.0 {
            return;
        }
        let e = self.terms.entry(exps).or_insert(0.0);
        *e += coef;
        if *e == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn add_scaled(&mut self, other: &Polynomial, s: f64) {
        for (e, c) in &other.terms {
            self.add_term(*e, s * c);
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut p = Self::zero(self.dim);
        p.add_scaled(self, s);
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * (0..self.dim)
                    .map(|k| x[k].powi(e[k] as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut p = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut f = *e;
                f[axis] -= 1;
                p.add_term(f, c * e[axis] as f64);
            }
        }
        p
    }

    pub fn gradient(&self, x: &[f64]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (k, gk) in g.iter_mut().enumerate().take(self.dim) {
            *gk = self.derivative(k).eval(x);
        }
        g
    }

    /// Laplacian in the tangential variables `x_1..x_{n-1}`.
    pub fn tangential_laplacian(&self) -> Self {
        let mut p = Self::zero(self.dim);
        for k in 0..self.dim - 1 {
            p.add_scaled(&self.derivative(k).derivative(k), 1.0);
        }
        p
    }

    pub fn laplacian(&self) -> Self {
        let mut p = self.tangential_laplacian();
        let n = self.dim - 1;
        p.add_scaled(&self.derivative(n).derivative(n), 1.0);
        p
    }

    fn times_normal_power(&self, power: u32) -> Self {
        let mut p = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut f = *e;
            f[self.dim - 1] += power;
            p.add_term(f, *c);
        }
        p
    }

    /// Largest absolute coefficient.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The unique even-in-`x_n` harmonic polynomial whose thin-plane trace is
/// `trace`: `Σ_k (-1)^k x_n^{2k} Δ'^k trace / (2k)!`.
pub fn harmonic_even_extension(trace: &Polynomial) -> Polynomial {
    let mut out = trace.clone();
    let mut lap = trace.clone();
    let mut factorial = 1.0;
    let mut k = 1u32;
    loop {
        lap = lap.tangential_laplacian();
        if lap.is_zero() {
            break;
        }
        factorial *= (2 * k - 1) as f64 * (2 * k) as f64;
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        out.add_scaled(&lap.times_normal_power(2 * k), sign / factorial);
        k += 1;
    }
    out
}

/// Trace monomials for the singular basis, in table order.
fn trace_exponents(dim: usize, degree: u32) -> Vec<[u32; 3]> {
    match dim {
        2 => vec![[degree, 0, 0]],
        _ => {
            let mut v = vec![[degree, 0, 0], [0, degree, 0]];
            for k in 1..degree {
                v.push([degree - k, k, 0]);
            }
            v
        }
    }
}

/// Basis of homogeneous degree-κ polynomials that are harmonic and even in
/// `x_n`. For κ = 2 in 3D this is `{x1²−x3², x2²−x3², x1x2}`.
pub fn singular_basis(dim: usize, degree: u32) -> Result<Vec<Polynomial>> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    if !SUPPORTED_SINGULAR_DEGREES.contains(&degree) {
        return Err(Error::param(format!(
            "singular degree {degree} not tabulated (supported: 2, 4)"
        )));
    }
    Ok(trace_exponents(dim, degree)
        .into_iter()
        .map(|e| harmonic_even_extension(&Polynomial::monomial(dim, e, 1.0)))
        .collect())
}

/// Linear combination of basis polynomials.
pub fn combine(basis: &[Polynomial], coeffs: &[f64]) -> Polynomial {
    let mut p = Polynomial::zero(basis.first().map_or(2, |b| b.dim));
    for (b, c) in basis.iter().zip(coeffs) {
        p.add_scaled(b, *c);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bases_match_table() {
        let b2 = singular_basis(2, 2).unwrap();
        assert_eq!(b2.len(), 1);
        assert!((b2[0].eval(&[0.3, 0.7]) - (0.09 - 0.49)).abs() < 1e-15);
        let b3 = singular_basis(3, 2).unwrap();
        let x = [0.3, -0.2, 0.5];
        let expect = [0.09 - 0.25, 0.04 - 0.25, -0.06];
        for (p, e) in b3.iter().zip(expect) {
            assert!((p.eval(&x) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn quartic_basis_is_harmonic_and_even() {
        for dim in [2, 3] {
            for p in singular_basis(dim, 4).unwrap() {
                assert!(p.laplacian().is_zero(), "{p:?}");
                assert!(p.terms().all(|(e, _)| e[dim - 1] % 2 == 0));
                assert!(p.terms().all(|(e, _)| e.iter().sum::<u32>() == 4));
            }
        }
        let q = &singular_basis(2, 4).unwrap()[0];
        // Re (x + iy)^4
        let (x, y) = (0.4f64, 0.9f64);
        assert!((q.eval(&[x, y]) - (x.powi(4) - 6.0 * x * x * y * y + y.powi(4))).abs() < 1e-14);
    }

    #[test]
    fn unsupported_degree_rejected() {
        assert!(singular_basis(2, 3).is_err());
        assert!(singular_basis(2, 6).is_err());
    }
}
