use std::f64::consts::PI;

use num_complex::Complex64;

use super::FeastError;

/// Rational filter r_N(x) = w_N + sum_k w_k / (z_k - x) from the trapezoidal
/// rule on the circle |z - y| = gamma with nodes rotated by phi.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFilter {
    pub y: f64,
    pub gamma: f64,
    pub n: usize,
    pub phi: f64,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Constant term, zero for this filter.
    pub w_n: Complex64,
}

/// Nodes z_k = y + gamma e^{i(2 pi k / N + phi)} with phi = +-pi/N and
/// weights w_k = gamma e^{i(2 pi k / N + phi)} / N. For even N this is the
/// Butterworth filter 1 / (1 + ((x - y) / gamma)^N) on the real axis.
pub fn build_filter(y: f64, gamma: f64, n: usize, phi_sign: i32) -> Result<RationalFilter, FeastError> {
    if !(gamma > 0.0 && gamma.is_finite()) || !y.is_finite() {
        return Err(FeastError::InvalidFilter(format!("need finite y and gamma > 0, got y = {y}, gamma = {gamma}")));
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(FeastError::InvalidFilter(format!("node count must be even and at least 2, got {n}")));
    }
    if phi_sign != 1 && phi_sign != -1 {
        return Err(FeastError::InvalidFilter(format!("phi sign must be +1 or -1, got {phi_sign}")));
    }
    let phi = phi_sign as f64 * PI / n as f64;
    let (mut nodes, mut weights) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let e = Complex64::from_polar(gamma, 2.0 * PI * k as f64 / n as f64 + phi);
        nodes.push(e + y);
        weights.push(e / n as f64);
    }
    Ok(RationalFilter {
        y,
        gamma,
        n,
        phi,
        nodes,
        weights,
        w_n: Complex64::new(0.0, 0.0),
    })
}

impl RationalFilter {
    /// Partial-fraction evaluation of r_N(x).
    pub fn eval(&self, x: f64) -> Complex64 {
        self.w_n
            + self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(z, w)| w / (z - x))
                .sum::<Complex64>()
    }

    /// Closed form 1 / (1 + ((x - y) / gamma)^N).
    pub fn butterworth(&self, x: f64) -> f64 {
        1.0 / (1.0 + ((x - self.y) / self.gamma).powi(self.n as i32))
    }

    /// W = sum |w_k| including the constant term.
    pub fn weight_sum(&self) -> f64 {
        self.w_n.norm() + self.weights.iter().map(|w| w.norm()).sum::<f64>()
    }

    /// Whether x lies strictly inside the interval (y - gamma, y + gamma).
    pub fn contains(&self, x: f64) -> bool {
        (x - self.y).abs() < self.gamma
    }
}

pub fn eval_filter(filter: &RationalFilter, x: f64) -> Complex64 {
    filter.eval(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDiagnostics {
    pub w: f64,
    pub kappa_hat: f64,
}

/// W and the contraction factor sup_O |r_N| / inf_I |r_N| for
/// I = [y - gamma, y + gamma] and O = {|x - y| >= (1 + delta) gamma},
/// both estimated by dense sampling.
pub fn filter_diagnostics(filter: &RationalFilter, y: f64, gamma: f64, delta: f64) -> Result<FilterDiagnostics, FeastError> {
    if !(delta > 0.0) {
        return Err(FeastError::InvalidFilter(format!("separation delta must be positive, got {delta}")));
    }
    const SAMPLES: usize = 10_000;
    let inf_inside = (0..=SAMPLES)
        .map(|k| filter.eval(y - gamma + 2.0 * gamma * k as f64 / SAMPLES as f64).norm())
        .fold(f64::INFINITY, f64::min);
    // geometric bracket from the near boundary out to 1e4 times it, both sides
    let near = (1.0 + delta) * gamma;
    let sup_outside = (0..=SAMPLES)
        .flat_map(|k| {
            let d = near * 1e4f64.powf(k as f64 / SAMPLES as f64);
            [y - d, y + d]
        })
        .map(|x| filter.eval(x).norm())
        .fold(0.0, f64::max);
    Ok(FilterDiagnostics {
        w: filter.weight_sum(),
        kappa_hat: sup_outside / inf_inside,
    })
}
