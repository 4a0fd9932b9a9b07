use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Analytic,
    Literature,
    Tabulated,
}

/// sin(k1 pi x) sin(k2 pi y) on the unit square, eigenvalue (k1^2 + k2^2) pi^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquareMode {
    pub k1: u32,
    pub k2: u32,
}

impl SquareMode {
    pub fn eigenvalue(&self) -> f64 {
        ((self.k1 * self.k1 + self.k2 * self.k2) as f64) * PI * PI
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        (self.k1 as f64 * PI * x).sin() * (self.k2 as f64 * PI * y).sin()
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (a, b) = (self.k1 as f64 * PI, self.k2 as f64 * PI);
        [a * (a * x).cos() * (b * y).sin(), b * (a * x).sin() * (b * y).cos()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSpectrum {
    /// Ascending, repeated according to multiplicity.
    pub values: Vec<f64>,
    pub eigenfunctions: Option<Vec<SquareMode>>,
    pub source: SpectrumSource,
}

/// Lowest cluster {2 pi^2, 5 pi^2, 5 pi^2} of the Dirichlet Laplacian on (0,1)^2.
pub fn reference_square() -> ReferenceSpectrum {
    let modes = vec![SquareMode { k1: 1, k2: 1 }, SquareMode { k1: 1, k2: 2 }, SquareMode { k1: 2, k2: 1 }];
    ReferenceSpectrum {
        values: modes.iter().map(SquareMode::eigenvalue).collect(),
        eigenfunctions: Some(modes),
        source: SpectrumSource::Analytic,
    }
}

/// First three Dirichlet eigenvalues of (0,2)^2 minus [1,2]^2.
pub fn reference_lshape() -> ReferenceSpectrum {
    ReferenceSpectrum {
        values: vec![9.6397238, 15.197252, 2.0 * PI * PI],
        eigenfunctions: None,
        source: SpectrumSource::Literature,
    }
}

/// Scaled propagation constants r_clad^2 beta_l^2 of the six guided modes of
/// the step-index fiber described by [`FiberParameters::default`].
pub fn reference_fiber() -> ReferenceSpectrum {
    ReferenceSpectrum {
        values: vec![
            2932065.0334243,
            2932475.1036310,
            2932475.1036310,
            2934248.1978369,
            2934248.1978369,
            2935689.8561775,
        ],
        eigenfunctions: None,
        source: SpectrumSource::Tabulated,
    }
}

/// Step-index fiber data (SI units). After scaling to the unit disc the mode
/// equation becomes (-Laplace - nu) u = -lambda_hat u with
/// nu = (k n r_clad)^2 per region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParameters {
    pub wavelength: f64,
    pub n_core: f64,
    pub n_clad: f64,
    pub r_core: f64,
    pub r_clad: f64,
}

impl Default for FiberParameters {
    fn default() -> Self {
        let r_core = 1.25e-5;
        Self {
            wavelength: 1.064e-6,
            n_core: 1.45097,
            n_clad: 1.44973,
            r_core,
            r_clad: 16.0 * r_core,
        }
    }
}

impl FiberParameters {
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn nu_core(&self) -> f64 {
        (self.wavenumber() * self.n_core * self.r_clad).powi(2)
    }

    pub fn nu_clad(&self) -> f64 {
        (self.wavenumber() * self.n_clad * self.r_clad).powi(2)
    }

    /// Core radius on the unit disc.
    pub fn r_interface(&self) -> f64 {
        self.r_core / self.r_clad
    }

    /// Interval (nu_clad, nu_core) that contains every scaled guided
    /// propagation constant.
    pub fn guided_interval(&self) -> (f64, f64) {
        (self.nu_clad(), self.nu_core())
    }
}
