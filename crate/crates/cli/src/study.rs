use std::sync::Arc;
use std::time::Instant;

use feast_dpg::analysis::{
    eigenspace_distance, hausdorff, interpolate, reference_fiber, reference_lshape, reference_square,
    FiberParameters, ReferenceSpectrum,
};
use feast_dpg::dpg::{assemble_trial_forms, DpgAssembler};
use feast_dpg::elements::build_system;
use feast_dpg::feast::{build_filter, feast_iterate_with, RationalFilter};
use feast_dpg::mesh::{
    make_disc_fiber, make_lshape, make_unit_square, read_mesh_file, refine_uniform, Mesh, CORE_TAG,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::{Domain, StudyConfig};
use crate::{SolveError, StudyError};

/// Outcome of one FEAST run at one (p, level).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub p: usize,
    pub level: usize,
    /// Nominal mesh size; for the fiber the largest core edge.
    pub h: f64,
    pub n_trial: usize,
    pub n_condensed: usize,
    /// Ritz values inside the contour on the reported axis, ascending.
    pub values: Vec<f64>,
    /// Error against each reference value, paired in ascending order
    /// (relative for the fiber, absolute otherwise).
    pub errors: Vec<Option<f64>>,
    pub hausdorff: Option<f64>,
    /// Eigenspace error proxy (square only).
    pub d_h: Option<f64>,
    pub iterations: usize,
    pub final_change: f64,
    /// Largest relative Ritz change per iteration.
    pub changes: Vec<f64>,
    pub seconds: f64,
    pub factor_seconds: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    /// Resolved configuration.
    pub config: StudyConfig,
    pub config_hash: String,
    pub reference: Option<ReferenceSpectrum>,
    pub filter: RationalFilter,
    pub rows: Vec<LevelResult>,
}

pub fn reference_for(domain: Domain) -> Option<ReferenceSpectrum> {
    match domain {
        Domain::Square => Some(reference_square()),
        Domain::Lshape => Some(reference_lshape()),
        Domain::DiscFiber => Some(reference_fiber()),
        Domain::ExternalMesh => None,
    }
}

/// Filter on the axis of the form a; the fiber contour is given on the
/// negated axis.
pub fn solver_filter(config: &StudyConfig) -> Result<RationalFilter, StudyError> {
    let c = config.contour.ok_or_else(|| StudyError::Config("unresolved contour".into()))?;
    let y = if config.negated_spectrum() { -c.y } else { c.y };
    build_filter(y, c.gamma, c.n, c.phi_sign).map_err(|e| StudyError::Config(e.to_string()))
}

fn base_mesh(config: &StudyConfig) -> Result<Mesh, StudyError> {
    let level0 = |e: feast_dpg::mesh::MeshError| StudyError::Solve {
        p: 0,
        level: 0,
        source: SolveError::Mesh(e),
    };
    match config.domain {
        Domain::Square => make_unit_square(config.coarse_n).map_err(level0),
        Domain::Lshape => make_lshape(config.coarse_n).map_err(level0),
        Domain::DiscFiber => make_disc_fiber(
            config.disc.n_boundary,
            FiberParameters::default().r_interface(),
            config.disc.grading,
        )
        .map_err(|e| StudyError::Config(format!("disc mesh: {e}"))),
        Domain::ExternalMesh => {
            let path = config.mesh.as_ref().ok_or_else(|| StudyError::Config("missing mesh path".into()))?;
            read_mesh_file(path).map_err(|e| StudyError::Config(format!("{}: {e}", path.display())))
        }
    }
}

/// Meshes for levels 0..count, each a uniform refinement of the previous.
pub fn mesh_levels(config: &StudyConfig, count: usize) -> Result<Vec<Arc<Mesh>>, StudyError> {
    let mut meshes = vec![Arc::new(base_mesh(config)?)];
    for level in 1..count {
        let next = refine_uniform(&meshes[level - 1]).map_err(|e| StudyError::Solve {
            p: 0,
            level,
            source: SolveError::Mesh(e),
        })?;
        meshes.push(Arc::new(next));
    }
    Ok(meshes)
}

fn nominal_h(config: &StudyConfig, mesh: &Mesh, level: usize) -> f64 {
    match config.domain {
        Domain::Square | Domain::Lshape => 1.0 / (config.coarse_n as f64 * (1u64 << level) as f64),
        Domain::DiscFiber => mesh.h_max_tagged(CORE_TAG),
        Domain::ExternalMesh => mesh.h_max(),
    }
}

/// One FEAST run for degree p on the given level mesh.
pub fn run_level(config: &StudyConfig, mesh: Arc<Mesh>, p: usize, level: usize) -> Result<LevelResult, StudyError> {
    let start = Instant::now();
    let wrap = |source: SolveError| StudyError::Solve { p, level, source };
    let filter = solver_filter(config)?;
    let h = nominal_h(config, &mesh, level);
    let system = Arc::new(build_system(mesh, p, config.dp).map_err(|e| wrap(e.into()))?);
    let reaction = config.reaction();
    let assembler = DpgAssembler::new(system.clone(), reaction.clone()).map_err(|e| wrap(e.into()))?;
    let cluster = feast_iterate_with(&assembler, &filter, &config.feast_options()).map_err(|e| wrap(e.into()))?;

    let mut values = cluster.ritz_values.clone();
    if config.negated_spectrum() {
        values = values.iter().rev().map(|v| -v).collect();
    }
    let reference = reference_for(config.domain);
    let (errors, hd) = match &reference {
        Some(r) => {
            let errors = r
                .values
                .iter()
                .enumerate()
                .map(|(i, exact)| {
                    values.get(i).map(|v| match config.domain {
                        Domain::DiscFiber => (exact - v).abs() / v.abs(),
                        _ => (exact - v).abs(),
                    })
                })
                .collect();
            (errors, hausdorff(&values, &r.values).ok())
        }
        None => (Vec::new(), None),
    };

    let d_h = match (&reference, config.domain) {
        (Some(r), Domain::Square) if !values.is_empty() => {
            let modes = r.eigenfunctions.as_ref().expect("square modes");
            let columns: Vec<Vec<f64>> = modes.iter().map(|m| interpolate(&system, |x, y| m.value(x, y))).collect();
            let exact = DMatrix::from_fn(system.n_trial(), columns.len(), |i, j| Complex64::new(columns[j][i], 0.0));
            let metric = assemble_trial_forms(&system, &reaction).stiffness;
            Some(eigenspace_distance(&cluster.vectors, &exact, &metric).map_err(|e| wrap(e.into()))?)
        }
        _ => None,
    };

    Ok(LevelResult {
        p,
        level,
        h,
        n_trial: system.n_trial(),
        n_condensed: assembler.n_condensed(),
        values,
        errors,
        hausdorff: hd,
        d_h,
        iterations: cluster.iterations(),
        final_change: cluster.final_change(),
        changes: cluster.history.iter().map(|r| r.max_change).collect(),
        seconds: start.elapsed().as_secs_f64(),
        factor_seconds: cluster.factor_seconds,
    })
}

/// Sweeps every degree over every level. Rows are ordered by p, then level.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport, StudyError> {
    let config = config.resolve()?;
    let meshes = mesh_levels(&config, config.refinements)?;
    let mut rows = Vec::new();
    for p in config.p.to_vec() {
        for (level, mesh) in meshes.iter().enumerate() {
            rows.push(run_level(&config, mesh.clone(), p, level)?);
        }
    }
    Ok(StudyReport {
        config_hash: config.hash(),
        reference: reference_for(config.domain),
        filter: solver_filter(&config)?,
        config,
        rows,
    })
}

/// A single FEAST run at the given level and degree.
pub fn solve_once(config: &StudyConfig, level: usize, p: usize) -> Result<LevelResult, StudyError> {
    let config = config.resolve()?;
    let meshes = mesh_levels(&config, level + 1)?;
    run_level(&config, meshes[level].clone(), p, level)
}
