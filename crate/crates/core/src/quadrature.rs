//! Product Gauss-Legendre x trapezoid rules on the sphere and on products of spheres.
//!
//! A grid of order `L` uses `ceil((L+1)/2)` Gauss-Legendre nodes in `cos(theta)`
//! and `L+1` equispaced azimuths, which integrates every spherical harmonic of
//! degree `<= L` exactly. Integrals are evaluated as a parallel map followed by
//! a pairwise reduction over the canonical node order, so the result does not
//! depend on the number of worker threads.

use std::ops::{Add, Mul};

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::UnitDirection;
use crate::linalg::Vec3;
use crate::scalar::{from_usize, lit, Real};
use crate::summation::pairwise_sum;

pub const MAX_GRID_ORDER: u32 = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n == 0 {
        return Err(Error::invalid("Gauss-Legendre rule needs at least one node"));
    }
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = from_usize::<T>(n);
    let eps = T::epsilon();
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let k = from_usize::<T>(i) + lit(0.75);
        let mut x = (T::PI() * k / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        let mut converged = false;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= eps * lit(4.0) {
                converged = true;
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "gauss_legendre",
                detail: format!("Newton iteration for root {i} of P_{n}"),
            });
        }
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = from_usize::<T>(k);
        let p2 = ((kf + kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = from_usize::<T>(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// One quadrature node: direction, its Cartesian form, and weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNode<T> {
    pub direction: UnitDirection<T>,
    pub cartesian: Vec3<T>,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid<T> {
    order: u32,
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<GridNode<T>>,
}

impl<T: Real> SphereGrid<T> {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[GridNode<T>] {
        &self.nodes
    }

    pub fn weight_sum(&self) -> T {
        pairwise_sum(&self.nodes.iter().map(|n| n.weight).collect::<Vec<_>>())
    }
}

/// Builds the product grid of band limit `order` (1..=64).
pub fn build_sphere_grid<T: Real>(order: u32) -> Result<SphereGrid<T>> {
    if !(1..=MAX_GRID_ORDER).contains(&order) {
        return Err(Error::invalid(format!(
            "sphere grid order must be in 1..={MAX_GRID_ORDER}, got {order}"
        )));
    }
    let n_theta = (order as usize + 2) / 2;
    let n_phi = order as usize + 1;
    let (xs, ws) = gauss_legendre::<T>(n_theta)?;
    let dphi = T::TAU() / from_usize(n_phi);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    for (&x, &w) in xs.iter().zip(&ws) {
        let theta = x.max(-T::one()).min(T::one()).acos();
        for j in 0..n_phi {
            let direction = UnitDirection::new(theta, dphi * from_usize(j))?;
            nodes.push(GridNode {
                direction,
                cartesian: direction.to_cartesian(),
                weight: w * dphi,
            });
        }
    }
    Ok(SphereGrid { order, n_theta, n_phi, nodes })
}

/// `sum_i w_i f(d_i)` with deterministic pairwise accumulation.
pub fn integrate_s2<T, V, F>(grid: &SphereGrid<T>, f: F) -> V
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Mul<T, Output = V> + Send,
    F: Fn(&GridNode<T>) -> V + Sync,
{
    let terms: Vec<V> = grid.nodes.par_iter().map(|n| f(n) * n.weight).collect();
    pairwise_sum(&terms)
}

/// Tensor-product quadrature over 2 to 4 spheres. The integrand receives the
/// node of each sphere in order. Nodes are streamed; only one grid's worth of
/// partial sums is held per nesting level.
pub fn integrate_product<T, F>(grids: &[&SphereGrid<T>], f: F) -> Result<T>
where
    T: Real,
    F: Fn(&[&GridNode<T>]) -> T + Sync,
{
    if !(2..=4).contains(&grids.len()) {
        return Err(Error::invalid(format!(
            "product quadrature supports 2 to 4 spheres, got {}",
            grids.len()
        )));
    }
    let outer: Vec<T> = grids[0]
        .nodes
        .par_iter()
        .map(|n0| {
            let mut stack: Vec<&GridNode<T>> = Vec::with_capacity(grids.len());
            stack.push(n0);
            nested_sum(&grids[1..], &mut stack, &f) * n0.weight
        })
        .collect();
    Ok(pairwise_sum(&outer))
}

fn nested_sum<'a, T, F>(grids: &[&'a SphereGrid<T>], stack: &mut Vec<&'a GridNode<T>>, f: &F) -> T
where
    T: Real,
    F: Fn(&[&GridNode<T>]) -> T,
{
    let Some((first, rest)) = grids.split_first() else {
        return f(stack);
    };
    let mut terms = Vec::with_capacity(first.len());
    for node in &first.nodes {
        stack.push(node);
        terms.push(nested_sum(rest, stack, f) * node.weight);
        stack.pop();
    }
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{spherical_harmonic, SphericalHarmonicIndex};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_known_rule() {
        let (x, w) = gauss_legendre::<f64>(3).unwrap();
        let r = (0.6f64).sqrt();
        assert!((x[0] + r).abs() < 1e-15 && x[1] == 0.0 && (x[2] - r).abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15 && (w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        for n in 1..=33usize {
            let (x, w) = gauss_legendre::<f64>(n).unwrap();
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn order_range() {
        assert!(build_sphere_grid::<f64>(0).is_err());
        assert!(build_sphere_grid::<f64>(65).is_err());
        let g = build_sphere_grid::<f64>(64).unwrap();
        assert_eq!(g.len(), 33 * 65);
    }

    #[test]
    fn weights_sum_to_four_pi() {
        for l in 1..=64 {
            let g = build_sphere_grid::<f64>(l).unwrap();
            assert!((g.weight_sum() - 4.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_on_low_order_grid() {
        let g = build_sphere_grid::<f64>(2).unwrap();
        assert!((integrate_s2(&g, |_| 1.0) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn y32_mean_and_norm() {
        let g = build_sphere_grid::<f64>(6).unwrap();
        let idx = SphericalHarmonicIndex::new(3, 2).unwrap();
        let mean: Complex64 = integrate_s2(&g, |n| spherical_harmonic(idx, &n.direction));
        assert!(mean.norm() < 1e-13);
        let norm = integrate_s2(&g, |n| spherical_harmonic(idx, &n.direction).norm_sqr());
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_constant_and_odd() {
        let g = build_sphere_grid::<f64>(4).unwrap();
        let c = integrate_product(&[&g, &g], |_| 1.0).unwrap();
        assert!((c - 16.0 * PI * PI).abs() < 1e-12);
        let odd = integrate_product(&[&g, &g], |n| n[0].cartesian.dot(&n[1].cartesian)).unwrap();
        assert!(odd.abs() < 1e-13);
    }

    #[test]
    fn product_arity_guard() {
        let g = build_sphere_grid::<f64>(2).unwrap();
        assert!(integrate_product(&[&g], |_| 1.0).is_err());
        assert!(integrate_product(&[&g, &g, &g, &g, &g], |_| 1.0).is_err());
        let four = integrate_product(&[&g, &g, &g, &g], |_| 1.0).unwrap();
        assert!((four / (4.0 * PI).powi(4) - 1.0).abs() < 1e-13);
    }
}
