//! Small quadrature kit: Gauss-Legendre rules, adaptive Simpson, and the
//! angular rule used to integrate radial power laws over a centred square.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 1 { x } else { p1 };
            let p_prev = if order == 1 { 1.0 } else { p0 };
            dp = n * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Angular rule over `[0, 2π)` with Gauss-Legendre panels on each octant, so the
/// kinks of the square's radial function fall on panel edges.
#[derive(Clone, Debug)]
pub struct SquareAngularRule {
    /// Angles θ_i.
    pub angles: Vec<f64>,
    /// Quadrature weights for dθ.
    pub weights: Vec<f64>,
    /// Radial extent of the unit half-width square, `1 / max(|cos θ|, |sin θ|)`.
    pub extents: Vec<f64>,
}

impl SquareAngularRule {
    pub fn new(points_per_octant: usize) -> Self {
        let (x, w) = gauss_legendre(points_per_octant);
        let half = PI / 8.0;
        let mut rule = Self { angles: Vec::new(), weights: Vec::new(), extents: Vec::new() };
        for octant in 0..8 {
            let mid = (2 * octant + 1) as f64 * half;
            for (xi, wi) in x.iter().zip(&w) {
                let theta = mid + half * xi;
                rule.angles.push(theta);
                rule.weights.push(half * wi);
                rule.extents.push(1.0 / theta.cos().abs().max(theta.sin().abs()));
            }
        }
        rule
    }

    /// `∫_{[-a,a]²} g(θ) |z|^{β-2} dz = ∫ g(θ) (a R(θ))^β / β dθ` for tabulated `g(θ_i)`.
    pub fn power_integral(&self, samples: &[f64], half_width: f64, beta: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.extents)
            .zip(samples)
            .map(|((w, r), g)| w * g * power_over_exponent(half_width * r, beta))
            .sum()
    }
}

/// `r^β / β` evaluated without overflow trouble for small `β`.
pub(crate) fn power_over_exponent(r: f64, beta: f64) -> f64 {
    (beta * r.ln()).exp() / beta
}
