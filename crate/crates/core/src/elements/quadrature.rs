use super::ElementsError;

/// Highest polynomial degree for which [`quadrature`] builds a rule.
pub const MAX_QUADRATURE_DEGREE: usize = 60;

/// Rule on the reference triangle (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Barycentric coordinates (1 - x - y, x, y).
    pub points: Vec<[f64; 3]>,
    /// Sum to the reference area 1/2.
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates (x, y) of point k.
    pub fn xy(&self, k: usize) -> [f64; 2] {
        [self.points[k][1], self.points[k][2]]
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| w * f(b[1], b[2]))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on [0, 1], exact to degree 2n - 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                dp = legendre_with_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1], ascending
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Triangle rule integrating all polynomials of total degree <= `deg`.
pub fn quadrature(deg: usize) -> Result<QuadratureRule, ElementsError> {
    if deg > MAX_QUADRATURE_DEGREE {
        return Err(ElementsError::UnsupportedQuadrature {
            degree: deg,
            max: MAX_QUADRATURE_DEGREE,
        });
    }
    if deg <= 1 {
        return Ok(QuadratureRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![0.5],
            exactness_degree: 1,
        });
    }
    if deg == 2 {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        return Ok(QuadratureRule {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 6.0; 3],
            exactness_degree: 2,
        });
    }
    // collapsed (Duffy) tensor Gauss rule: x = u, y = v (1 - u), Jacobian 1 - u
    let n = (deg + 3) / 2;
    let (t, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = t[i];
            let y = t[j] * (1.0 - x);
            points.push([1.0 - x - y, x, y]);
            weights.push(w[i] * w[j] * (1.0 - x));
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        exactness_degree: 2 * n - 2,
    })
}
