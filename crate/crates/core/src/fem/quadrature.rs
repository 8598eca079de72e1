//! Gauss–Legendre rules on the reference cell `[0, 1]`.

/// Quadrature rule on `[0, 1]`; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// The `n`-point Gauss–Legendre rule, exact for degree `2n − 1`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    /// Smallest Gauss–Legendre rule that integrates every polynomial of
    /// degree `max_poly_degree` exactly.
    pub fn exact_for(max_poly_degree: usize) -> Self {
        Self::gauss_legendre(points_for_degree(max_poly_degree))
    }

    pub fn n_points(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = hi - lo;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(lo + h * x))
            .sum::<f64>()
            * h
    }
}

/// Number of Gauss points needed for exactness at `degree`.
pub fn points_for_degree(degree: usize) -> usize {
    (degree + 2) / 2
}

/// Alias kept for the operation name used throughout the crate.
pub fn quadrature_for(max_poly_degree: usize) -> QuadratureRule {
    QuadratureRule::exact_for(max_poly_degree)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(quadrature_for(3).n_points(), 2);
        assert_eq!(quadrature_for(9).n_points(), 5);
        assert_eq!(quadrature_for(0).n_points(), 1);
        assert_eq!(quadrature_for(1).n_points(), 1);
        assert_eq!(quadrature_for(2).n_points(), 2);
    }

    #[test]
    fn x_squared_two_points() {
        let q = quadrature_for(3);
        let v = q.integrate(0.0, 1.0, |x| x * x);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        for n in 1..=12 {
            let q = QuadratureRule::gauss_legendre(n);
            let s: f64 = q.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "n = {n}");
            assert!(q.weights().iter().all(|&w| w > 0.0));
            assert!(q.nodes().windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn exact_monomials() {
        for n in 1..=10 {
            let q = QuadratureRule::gauss_legendre(n);
            for k in 0..2 * n {
                let v = q.integrate(0.0, 1.0, |x| x.powi(k as i32));
                let exact = 1.0 / (k as f64 + 1.0);
                assert!((v - exact).abs() < 1e-14, "n = {n} k = {k}");
            }
        }
    }
}
