use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use feast_dpg::analysis::FiberParameters;
use feast_dpg::dpg::{LinearSolver, Reaction};
use feast_dpg::feast::FeastOptions;
use feast_dpg::mesh::{CLADDING_TAG, CORE_TAG};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::StudyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Square,
    Lshape,
    DiscFiber,
    ExternalMesh,
}

/// A single degree or a list of degrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degrees {
    One(usize),
    Many(Vec<usize>),
}

impl Degrees {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Degrees::One(p) => vec![*p],
            Degrees::Many(ps) => ps.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub y: f64,
    pub gamma: f64,
    /// Number of quadrature nodes.
    pub n: usize,
    #[serde(default = "default_phi_sign")]
    pub phi_sign: i32,
}

fn default_phi_sign() -> i32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverConfig {
    Direct,
    Cg { tol: f64, max_iter: usize },
}

impl From<SolverConfig> for LinearSolver {
    fn from(s: SolverConfig) -> Self {
        match s {
            SolverConfig::Direct => LinearSolver::Direct,
            SolverConfig::Cg { tol, max_iter } => LinearSolver::ConjugateGradient { tol, max_iter },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeastConfig {
    /// Subspace dimension; defaults to the reference cluster size plus 4.
    pub m0: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    /// Change below which the subspace is cut down to the inside Ritz
    /// vectors (0 disables).
    pub truncate_tol: f64,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for FeastConfig {
    fn default() -> Self {
        Self {
            m0: None,
            tol: 1e-12,
            max_iter: 100,
            truncate_tol: 1e-6,
            seed: 0,
            solver: SolverConfig::Direct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscConfig {
    /// Edges on the outer circle of the level-0 mesh.
    pub n_boundary: usize,
    /// Ratio of outer to core element size.
    pub grading: f64,
}

impl Default for DiscConfig {
    fn default() -> Self {
        Self {
            n_boundary: 16,
            grading: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    /// Wall-clock timings; these vary between runs, so they are only
    /// written when requested.
    pub timings: Option<PathBuf>,
    /// Fill the CSV `seconds` column (makes the CSV run dependent).
    pub seconds_in_csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv: PathBuf::from("study.csv"),
            metadata: PathBuf::from("metadata.json"),
            timings: None,
            seconds_in_csv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub domain: Domain,
    /// Mesh file for `external_mesh`.
    #[serde(default)]
    pub mesh: Option<PathBuf>,
    pub p: Degrees,
    #[serde(default = "default_dp")]
    pub dp: usize,
    /// Number of mesh levels; level 0 is the coarse mesh.
    pub refinements: usize,
    /// Squares per unit length of the level-0 square and L-shape meshes.
    #[serde(default = "default_coarse_n")]
    pub coarse_n: usize,
    #[serde(default)]
    pub disc: DiscConfig,
    /// Contour on the reported spectral axis; for the fiber this is the
    /// propagation-constant axis. Defaults per domain.
    #[serde(default)]
    pub contour: Option<ContourConfig>,
    /// Reaction coefficient per region tag; unlisted tags get 0.
    #[serde(default)]
    pub nu: Option<BTreeMap<u32, f64>>,
    #[serde(default)]
    pub feast: FeastConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_dp() -> usize {
    1
}

fn default_coarse_n() -> usize {
    4
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        serde_json::from_str(text).map_err(|e| StudyError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, StudyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StudyError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn square() -> Self {
        Self::from_json(include_str!("../configs/square.json")).expect("bundled config")
    }

    pub fn lshape() -> Self {
        Self::from_json(include_str!("../configs/lshape.json")).expect("bundled config")
    }

    pub fn fiber() -> Self {
        Self::from_json(include_str!("../configs/fiber.json")).expect("bundled config")
    }

    /// Whether eigenvalues are reported as lambda_hat = -lambda, the
    /// convention for guided modes.
    pub fn negated_spectrum(&self) -> bool {
        self.domain == Domain::DiscFiber
    }

    /// Checks invariants and fills every defaulted field so the result
    /// fully describes the run.
    pub fn resolve(&self) -> Result<Self, StudyError> {
        let bad = |msg: String| Err(StudyError::Config(msg));
        let mut c = self.clone();
        if c.refinements < 1 {
            return bad("refinements must be at least 1".into());
        }
        let ps = c.p.to_vec();
        if ps.is_empty() || ps.contains(&0) {
            return bad(format!("degrees must be positive, got {ps:?}"));
        }
        if c.coarse_n == 0 {
            return bad("coarse_n must be positive".into());
        }
        match c.domain {
            Domain::ExternalMesh if c.mesh.is_none() => return bad("external_mesh needs a mesh path".into()),
            Domain::ExternalMesh => {}
            _ if c.mesh.is_some() => return bad("a mesh path is only valid with external_mesh".into()),
            _ => {}
        }
        if c.domain == Domain::DiscFiber {
            if ps.len() != 1 {
                return bad(format!("the fiber study takes a single degree, got {ps:?}"));
            }
            let fp = FiberParameters::default();
            match &c.nu {
                Some(nu) if nu.len() != 2 || !nu.contains_key(&CORE_TAG) || !nu.contains_key(&CLADDING_TAG) => {
                    return bad(format!("the fiber needs reaction values for exactly tags {CORE_TAG} and {CLADDING_TAG}"));
                }
                Some(_) => {}
                None => c.nu = Some(BTreeMap::from([(CORE_TAG, fp.nu_core()), (CLADDING_TAG, fp.nu_clad())])),
            }
            if c.contour.is_none() {
                let nu = c.nu.as_ref().expect("set above");
                let (lo, hi) = (nu[&CLADDING_TAG], nu[&CORE_TAG]);
                c.contour = Some(ContourConfig {
                    y: 0.5 * (lo + hi),
                    gamma: 0.5 * (hi - lo),
                    n: 16,
                    phi_sign: 1,
                });
            }
        }
        if c.contour.is_none() {
            c.contour = match c.domain {
                Domain::Square => Some(ContourConfig { y: 20.0, gamma: 45.0, n: 8, phi_sign: 1 }),
                Domain::Lshape => Some(ContourConfig { y: 15.0, gamma: 8.0, n: 8, phi_sign: 1 }),
                _ => return bad("a contour is required for this domain".into()),
            };
        }
        let contour = c.contour.expect("set above");
        if !(contour.gamma > 0.0) {
            return bad(format!("contour radius must be positive, got {}", contour.gamma));
        }
        if contour.n < 2 || !contour.n.is_multiple_of(2) || contour.phi_sign.abs() != 1 {
            return bad(format!("contour needs an even node count >= 2 and phi_sign +-1, got {contour:?}"));
        }
        if c.nu.is_none() {
            c.nu = Some(BTreeMap::new());
        }
        if c.feast.m0.is_none() {
            let expected = match c.domain {
                Domain::Square | Domain::Lshape => 3,
                Domain::DiscFiber => 6,
                Domain::ExternalMesh => 4,
            };
            c.feast.m0 = Some(expected + 4);
        }
        if c.feast.m0 == Some(0) || !(c.feast.tol >= 0.0) || c.feast.max_iter == 0 || !(c.feast.truncate_tol >= 0.0) {
            return bad(format!("invalid feast settings {:?}", c.feast));
        }
        Ok(c)
    }

    /// SHA-256 of the canonical JSON form; identifies the run in every
    /// output row.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn reaction(&self) -> Reaction {
        Reaction::from_pairs(self.nu.iter().flatten().map(|(&t, &v)| (t, v)))
    }

    pub fn feast_options(&self) -> FeastOptions {
        FeastOptions {
            m0: self.feast.m0.unwrap_or(7),
            tol: self.feast.tol,
            max_iter: self.feast.max_iter,
            truncate_tol: self.feast.truncate_tol,
            seed: self.feast.seed,
            solver: self.feast.solver.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_resolve() {
        for c in [StudyConfig::square(), StudyConfig::lshape(), StudyConfig::fiber()] {
            let r = c.resolve().unwrap();
            assert!(r.contour.is_some() && r.feast.m0.is_some());
            assert_eq!(r.resolve().unwrap(), r);
        }
    }

    #[test]
    fn fiber_contour_spans_guided_interval() {
        let r = StudyConfig::fiber().resolve().unwrap();
        let c = r.contour.unwrap();
        let (lo, hi) = FiberParameters::default().guided_interval();
        assert!((c.y - c.gamma - lo).abs() < 1e-6 && (c.y + c.gamma - hi).abs() < 1e-6);
        assert_eq!(c.n, 16);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = StudyConfig::square();
        c.refinements = 0;
        assert!(c.resolve().is_err());
        let mut c = StudyConfig::square();
        c.contour = Some(ContourConfig { y: 0.0, gamma: -1.0, n: 8, phi_sign: 1 });
        assert!(c.resolve().is_err());
        let mut c = StudyConfig::fiber();
        c.nu = Some(BTreeMap::from([(1, 1.0)]));
        assert!(c.resolve().is_err());
        assert!(StudyConfig::from_json(r#"{"domain": "square", "p": 1, "refinements": 2, "bogus": 1}"#).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = StudyConfig::square().resolve().unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.feast.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
