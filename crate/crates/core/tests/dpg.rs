use std::f64::consts::PI;
use std::sync::Arc;

use feast_dpg::analysis::{fitted_rate, h1_seminorm_error, interpolate};
use feast_dpg::dpg::{assemble_dpg, error_indicator, DpgAssembler, LinearSolver, Reaction};
use feast_dpg::elements::{build_system, FeSystem, DIRICHLET};
use feast_dpg::mesh::{make_disc_fiber, make_lshape, make_unit_square, refine_uniform, Mesh};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn system(mesh: Mesh, p: usize, dp: usize) -> Arc<FeSystem> {
    Arc::new(build_system(Arc::new(mesh), p, dp).unwrap())
}

fn random_f(n: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Global test Gram G, coupling B (test x condensed) and load map
/// L (test x trial) assembled without static condensation.
fn global_blocks(
    asm: &DpgAssembler,
    z: Complex64,
    reaction: &Reaction,
) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let sys = asm.system();
    let mesh = sys.mesh();
    let nv = sys.test_block_dim();
    let (n_test, n_trial, n_cond) = (sys.n_test(), sys.n_trial(), asm.n_condensed());
    let mut g = DMatrix::zeros(n_test, n_test);
    let mut b = DMatrix::zeros(n_test, n_cond);
    let mut l = DMatrix::zeros(n_test, n_trial);
    for t in 0..mesh.num_triangles() {
        let blocks = asm.local_blocks(t);
        let bk = blocks.coupling(z + reaction.value(mesh.tags()[t]));
        let off = t * nv;
        for i in 0..nv {
            for j in 0..nv {
                g[(off + i, off + j)] = c(blocks.gram[(i, j)], 0.0);
            }
        }
        let nu = sys.local_trial_dim();
        for (k, &d) in sys.trial_dofs(t).iter().enumerate() {
            if d == DIRICHLET {
                continue;
            }
            for i in 0..nv {
                b[(off + i, d)] += bk[(i, k)];
                l[(off + i, d)] += c(blocks.mass[(i, k)], 0.0);
            }
        }
        for e in 0..3 {
            for j in 0..sys.p() {
                let col = n_trial + sys.flux_dof(t, e, j);
                for i in 0..nv {
                    b[(off + i, col)] += bk[(i, nu + e * sys.p() + j)];
                }
            }
        }
    }
    (g, b, l)
}

#[test]
fn static_condensation_matches_saddle_point_solve() {
    for p in [2, 3] {
        let sys = system(make_unit_square(1).unwrap(), p, 3);
        let reaction = Reaction::from_pairs([(0, 0.7)]);
        let z = c(3.0, 2.0);
        let asm = DpgAssembler::new(sys.clone(), reaction.clone()).unwrap();
        let op = asm.operator(z, LinearSolver::Direct).unwrap();
        let f = random_f(sys.n_trial(), 1, 11 + p as u64);
        let sol = &op.solve(&f).unwrap()[0];

        let (g, b, l) = global_blocks(&asm, z, &reaction);
        let (nt, nc) = (g.nrows(), b.ncols());
        let mut k = DMatrix::zeros(nt + nc, nt + nc);
        k.view_mut((0, 0), (nt, nt)).copy_from(&g);
        k.view_mut((0, nt), (nt, nc)).copy_from(&b);
        k.view_mut((nt, 0), (nc, nt)).copy_from(&b.adjoint());
        let mut rhs = DVector::zeros(nt + nc);
        rhs.rows_mut(0, nt).copy_from(&(&l * f.column(0)));
        let full = k.lu().solve(&rhs).unwrap();

        let x: Vec<Complex64> = sol.u.iter().chain(&sol.q).copied().collect();
        let scale = full.camax();
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - full[nt + i]).norm() <= 1e-10 * scale, "p={p} dof {i}");
        }
        let nv = sys.test_block_dim();
        for t in 0..2 {
            let eps = full.rows(t * nv, nv);
            let gk = g.view((t * nv, t * nv), (nv, nv));
            let norm = (eps.adjoint() * gk * eps)[(0, 0)].re.sqrt();
            assert!((norm - sol.eps_norms[t]).abs() <= 1e-10 * (1.0 + norm), "p={p} element {t}");
        }
    }
}

#[test]
fn condensed_matrix_is_hermitian_for_complex_shifts() {
    let meshes = [
        refine_uniform(&make_unit_square(2).unwrap()).unwrap(),
        make_disc_fiber(16, 0.3, 2.0).unwrap(),
    ];
    for mesh in meshes {
        let tags = mesh.region_tags();
        let sys = system(mesh, 2, 3);
        let reaction = Reaction::from_pairs(tags.iter().map(|&t| (t, 1.5 * t as f64)));
        let asm = DpgAssembler::new(sys, reaction).unwrap();
        for z in [c(20.0, 45.0), c(-3.0, 0.5), c(1e3, -7.0)] {
            let a = asm.condensed_matrix(z);
            assert!(a.hermitian_defect() <= 1e-12 * a.max_abs());
        }
    }
}

#[test]
fn two_triangle_dimensions_and_left_shift() {
    let sys = system(make_unit_square(1).unwrap(), 1, 3);
    let op = assemble_dpg(sys, c(-1.0, 0.0), Reaction::zero()).unwrap();
    assert_eq!(op.condensed().nrows(), 5);
    let sys = system(make_lshape(2).unwrap(), 2, 1);
    assert!(assemble_dpg(sys, c(-1.0, 0.0), Reaction::zero()).is_ok());
}

#[test]
fn zero_source_gives_zero_solution() {
    let sys = system(make_unit_square(3).unwrap(), 2, 3);
    let op = assemble_dpg(sys.clone(), c(5.0, 1.0), Reaction::zero()).unwrap();
    let sol = &op.solve(&DMatrix::zeros(sys.n_trial(), 1)).unwrap()[0];
    assert!(sol.u.iter().chain(&sol.q).all(|v| v.norm() == 0.0));
    assert_eq!(error_indicator(sol).1, 0.0);
}

#[test]
fn residual_is_orthogonal_to_trial_space() {
    let sys = system(make_unit_square(2).unwrap(), 2, 3);
    let z = c(7.0, -3.0);
    let reaction = Reaction::zero();
    let asm = DpgAssembler::new(sys.clone(), reaction.clone()).unwrap();
    let op = asm.operator(z, LinearSolver::Direct).unwrap();
    let f = random_f(sys.n_trial(), 1, 3);
    let sol = &op.solve(&f).unwrap()[0];
    let (g, b, l) = global_blocks(&asm, z, &reaction);
    let x = DVector::from_iterator(asm.n_condensed(), sol.u.iter().chain(&sol.q).copied());
    let lf = &l * f.column(0);
    let eps = g.clone().lu().solve(&(&lf - &b * &x)).unwrap();
    let second = b.adjoint() * &eps;
    let scale = b.adjoint().camax() * eps.camax().max(lf.camax());
    assert!(second.camax() <= 1e-9 * scale, "{}", second.camax() / scale);
}

fn manufactured(p: usize, n: usize, z: Complex64) -> (f64, f64) {
    let sys = system(make_unit_square(n).unwrap(), p, 3);
    let lam = 2.0 * PI * PI;
    let exact = |x: f64, y: f64| 2.0 * (PI * x).sin() * (PI * y).sin();
    let grad = |x: f64, y: f64| {
        [2.0 * PI * (PI * x).cos() * (PI * y).sin(), 2.0 * PI * (PI * x).sin() * (PI * y).cos()]
    };
    let fi = interpolate(&sys, exact);
    let f = DMatrix::from_iterator(fi.len(), 1, fi.iter().map(|&v| (z - lam) * v));
    let op = assemble_dpg(sys.clone(), z, Reaction::zero()).unwrap();
    let sol = &op.solve(&f).unwrap()[0];
    (h1_seminorm_error(&sys, &sol.u, grad), error_indicator(sol).1)
}

#[test]
fn manufactured_resolvent_converges_at_rate_p() {
    for p in 1..=3 {
        let ns = [4, 8, 16];
        let mut errs = Vec::new();
        let mut indicators = Vec::new();
        for &n in &ns {
            let (e, ind) = manufactured(p, n, c(0.0, 0.0));
            errs.push(e);
            indicators.push(ind);
        }
        let h: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let rate = fitted_rate(&h, &errs).unwrap();
        assert!((rate - p as f64).abs() <= 0.3, "p={p}: rate {rate}, errors {errs:?}");
        assert!(indicators.windows(2).all(|w| w[1] < w[0]), "p={p}: {indicators:?}");
    }
}

#[test]
fn indicator_is_phase_invariant() {
    let sys = system(make_unit_square(4).unwrap(), 2, 1);
    let op = assemble_dpg(sys.clone(), c(10.0, 30.0), Reaction::zero()).unwrap();
    let f = random_f(sys.n_trial(), 1, 5);
    let rotated = &f * Complex64::from_polar(1.0, 0.83);
    let a = &op.solve(&f).unwrap()[0];
    let b = &op.solve(&rotated).unwrap()[0];
    for (x, y) in a.eps_norms.iter().zip(&b.eps_norms) {
        assert!((x - y).abs() <= 1e-12 * (1.0 + x));
    }
}

#[test]
fn conjugate_gradient_path_agrees_with_direct() {
    let sys = system(make_unit_square(4).unwrap(), 2, 1);
    let asm = DpgAssembler::new(sys.clone(), Reaction::zero()).unwrap();
    let z = c(20.0, 17.0);
    let direct = asm.operator(z, LinearSolver::Direct).unwrap();
    let cg = asm
        .operator(z, LinearSolver::ConjugateGradient { tol: 1e-13, max_iter: 20_000 })
        .unwrap();
    let f = random_f(sys.n_trial(), 2, 8);
    let a = direct.apply_resolvent(&f).unwrap();
    let b = cg.apply_resolvent(&f).unwrap();
    assert!((&a - &b).camax() <= 1e-8 * a.camax());
}
