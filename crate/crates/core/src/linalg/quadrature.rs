use crate::error::{Error, Result};

/// Gauss–Legendre rule on the reference interval `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.order() - 1
    }

    /// Points and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

/// Evaluates the Legendre polynomial `P_n` and its derivative at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Standard `n`-point Gauss–Legendre rule, computed by Newton iteration on the
/// roots of `P_n` from Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Gauss-Legendre rule needs at least one point".into(),
        ));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
        let (_, dp) = legendre(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn monomial_integral(k: usize) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    #[test]
    fn zero_points_is_rejected() {
        assert!(matches!(gauss_legendre(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn midpoint_rule() {
        let q = gauss_legendre(1).unwrap();
        assert_eq!(q.points, vec![0.0]);
        assert_eq!(q.weights, vec![2.0]);
    }

    #[test]
    fn two_point_closed_form() {
        let q = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(q.points[0], -r, epsilon = 1e-15);
        assert_abs_diff_eq!(q.points[1], r, epsilon = 1e-15);
        assert_abs_diff_eq!(q.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn five_points_integrate_x8() {
        let q = gauss_legendre(5).unwrap();
        let s: f64 = q.points.iter().zip(&q.weights).map(|(x, w)| w * x.powi(8)).sum();
        assert_abs_diff_eq!(s, 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn exactness_up_to_declared_degree() {
        for n in 1..=14 {
            let q = gauss_legendre(n).unwrap();
            let wsum: f64 = q.weights.iter().sum();
            assert_abs_diff_eq!(wsum, 2.0, epsilon = 1e-14);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for k in 0..=q.exactness() {
                let s: f64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let exact = monomial_integral(k);
                assert!(
                    (s - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                    "n={n} k={k}: {s} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn mapped_rule_integrates_on_interval() {
        let q = gauss_legendre(3).unwrap();
        let s: f64 = q.mapped(1.0, 3.0).map(|(x, w)| w * x * x).sum();
        assert_abs_diff_eq!(s, 26.0 / 3.0, epsilon = 1e-13);
    }
}
