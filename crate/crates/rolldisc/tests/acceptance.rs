//! End-to-end acceptance gate: one test per published claim the crate
//! is built around, at the stated tolerances. Each test prints a single
//! summary line with the measured quantity (visible under
//! `--nocapture`); pass/fail is the usual assertion outcome.

use rolldisc::exact::{self, rat_int, Rat};
use rolldisc::lie;
use rolldisc::models::{
    self, heis_inv, heis_mul, HeisenbergElement,
};
use rolldisc::nilgeo::{constants_from_initial, cut_point, cut_time, eval_state, VerticalConstants};
use rolldisc::numeric;
use rolldisc::solver::{
    conserved_diagnostics, integrate_rkf45, ExtremalState, SolverOptions, SystemKind,
};
use rolldisc::symmetry::{
    closed_flow, invariant_metric_space_dim, pushforward_field, symmetry_field, verify_symmetry,
    ClosedFlow, PointTransformation, Structure,
};
use rolldisc::tanaka::{
    bundled_symbol_input, match_to_reference, prolong, prolong_step, GradedAlgebraState,
};
use rolldisc::vecfield::{
    jacobi_determinant, lie_bracket_fd, sample_points, VectorField, DEFAULT_FD_STEP, DEFAULT_SEED,
};
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn example1() -> [f64; 3] {
    [0.5, 3.0_f64.sqrt() / 2.0, 2.0]
}

fn example2() -> [f64; 3] {
    [0.5, 3.0_f64.sqrt() / 2.0, 20.0]
}

#[test]
fn criterion_01_frame_jacobi_determinant_is_one() {
    let frame4 = models::disc4_full_frame();
    let mut worst = 0.0_f64;
    for p in sample_points(4, 100, DEFAULT_SEED) {
        let det = jacobi_determinant(&frame4, &p).unwrap();
        worst = worst.max((det - 1.0).abs());
    }
    let mut frame3 = models::disc_frame();
    frame3.push(models::disc_bracket());
    for p in sample_points(3, 100, DEFAULT_SEED) {
        let det = jacobi_determinant(&frame3, &p).unwrap();
        worst = worst.max((det - 1.0).abs());
    }
    println!("criterion 01: max |det - 1| = {worst:.3e} over 100 points in each chart");
    assert!(worst <= 1e-9);
}

#[test]
fn criterion_02_numeric_structure_constants_match_the_tables() {
    // Express each finite-difference bracket in the frame basis and
    // compare the coefficients entry by entry with the exact tables.
    let cases: Vec<(Vec<VectorField>, lie::StructureConstants)> = vec![
        (
            {
                let mut f = models::disc_frame();
                f.push(models::disc_bracket());
                f
            },
            lie::disc_algebra(),
        ),
        (models::disc4_full_frame(), lie::disc4_algebra()),
        (
            {
                let mut f = models::car_fixed_phi_frame(1.0);
                f.push(models::car_fixed_phi_bracket(1.0));
                f
            },
            lie::car_fixed_phi_algebra(),
        ),
        (models::heis_full_frame(), lie::heisenberg_algebra()),
    ];
    let mut worst = 0.0_f64;
    for (frame, algebra) in &cases {
        let dim = frame[0].dim();
        for p in sample_points(dim, 5, DEFAULT_SEED) {
            for i in 0..frame.len() {
                for j in i + 1..frame.len() {
                    let fd = lie_bracket_fd(&frame[i], &frame[j], &p, DEFAULT_FD_STEP).unwrap();
                    let rows: Vec<Vec<f64>> = (0..dim)
                        .map(|r| frame.iter().map(|f| f.at(&p)[r]).collect())
                        .collect();
                    let (coeffs, residual) = numeric::lstsq(&rows, &fd).unwrap();
                    assert!(residual <= 1e-6, "bracket escapes the frame span");
                    for (k, c) in coeffs.iter().enumerate() {
                        let want = algebra.bracket_f64(
                            &unit(frame.len(), i),
                            &unit(frame.len(), j),
                        )[k];
                        worst = worst.max((c - want).abs());
                    }
                }
            }
        }
    }
    // Series queries: the disc algebra is solvable but not nilpotent;
    // the Heisenberg algebra is both.
    let k = lie::disc_algebra();
    assert_eq!((k.is_solvable(), k.is_nilpotent()), (true, false));
    let m = lie::heisenberg_algebra();
    assert_eq!((m.is_solvable(), m.is_nilpotent()), (true, true));
    println!("criterion 02: max structure-constant error = {worst:.3e}");
    assert!(worst <= 1e-6);
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

#[test]
fn criterion_03_closed_form_solves_the_nilpotent_system() {
    let mut worst = 0.0_f64;
    let mut check = |h: [f64; 3]| {
        let c = constants_from_initial(h);
        let c1 = match c {
            VerticalConstants::Generic { c1, .. } => c1,
            VerticalConstants::Degenerate { .. } => panic!("test draws non-degenerate data"),
        };
        let t_end = 2.0 * PI / c1.abs();
        let fd = 1e-6;
        for i in 0..100 {
            let t = t_end * f64::from(i) / 99.0;
            let plus = eval_state(&c, t + fd).to_array();
            let minus = eval_state(&c, t - fd).to_array();
            let want = rolldisc::solver::rhs_nilpotent(&eval_state(&c, t));
            for d in 0..6 {
                let dot = (plus[d] - minus[d]) / (2.0 * fd);
                worst = worst.max((dot - want[d]).abs());
            }
        }
    };
    check(example1());
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut drawn = 0;
    while drawn < 20 {
        let h: [f64; 3] = [
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-2.0..=2.0),
        ];
        if h[2].abs() < 0.2 {
            continue;
        }
        check(h);
        drawn += 1;
    }
    println!("criterion 03: max derivative residual = {worst:.3e} over 21 constant sets");
    assert!(worst <= 1e-6);
}

#[test]
fn criterion_04_conserved_quantities_stay_flat() {
    let s0 = ExtremalState::from_covector(example1()[0], example1()[1], example1()[2]);
    let opts = SolverOptions::default();
    let orig = integrate_rkf45(SystemKind::Original.rhs(), &s0, PI, &opts).unwrap();
    let d_orig = conserved_diagnostics(&orig, SystemKind::Original);
    let nil = integrate_rkf45(SystemKind::Nilpotent.rhs(), &s0, PI, &opts).unwrap();
    let d_nil = conserved_diagnostics(&nil, SystemKind::Nilpotent);
    println!(
        "criterion 04: |dH| = {:.3e}, |d(h3^2 - h1^2)| = {:.3e}, |dh3| = {:.3e}",
        d_orig.max_hamiltonian_drift,
        d_orig.max_invariant_drift.unwrap(),
        d_nil.max_invariant_drift.unwrap(),
    );
    assert!(d_orig.max_hamiltonian_drift <= 1e-8);
    assert!(d_orig.max_invariant_drift.unwrap() <= 1e-8);
    assert!(d_nil.max_invariant_drift.unwrap() <= 1e-10);
}

#[test]
fn criterion_05_halving_the_horizon_at_least_halves_the_gap() {
    let h = example2();
    let gap = |t_end: f64| -> f64 {
        let c = constants_from_initial(h);
        let s0 = ExtremalState::from_covector(h[0], h[1], h[2]);
        let opts = SolverOptions {
            grid: Some(201),
            ..SolverOptions::default()
        };
        let traj = integrate_rkf45(SystemKind::Original.rhs(), &s0, t_end, &opts).unwrap();
        let mut sup = 0.0_f64;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let closed = eval_state(&c, *t);
            sup = sup
                .max((s.x - closed.x).abs())
                .max((s.y - closed.y).abs())
                .max((s.theta - closed.theta).abs());
        }
        sup
    };
    let gaps: Vec<f64> = [PI / 5.0, PI / 10.0, PI / 20.0].iter().map(|&t| gap(t)).collect();
    println!(
        "criterion 05: sup gaps = {:.3e} (pi/5), {:.3e} (pi/10), {:.3e} (pi/20)",
        gaps[0], gaps[1], gaps[2]
    );
    assert!(gaps[1] <= gaps[0] / 2.0);
    assert!(gaps[2] <= gaps[1] / 2.0);
}

#[test]
fn criterion_06_root_search_finds_the_cut_point() {
    let c = constants_from_initial(example1());
    let f = |t: f64| -> f64 {
        let s = eval_state(&c, t);
        s.x * s.x + s.theta * s.theta
    };
    // Coarse scan past the start to the first shallow local minimum,
    // then golden-section refinement.
    let step = 1e-3;
    let mut t = 0.2;
    let mut bracket = None;
    while t < 2.0 * PI {
        let (a, b, cc) = (f(t - step), f(t), f(t + step));
        if b <= a && b <= cc && b < 1e-2 {
            bracket = Some((t - step, t + step));
            break;
        }
        t += step;
    }
    let (mut lo, mut hi) = bracket.expect("scan crosses the first return");
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t_star = 0.5 * (lo + hi);
    let y_star = eval_state(&c, t_star).y;
    println!(
        "criterion 06: t* = {t_star:.12} (err {:.3e}), y(t*) = {y_star:.12} (err {:.3e})",
        (t_star - PI).abs(),
        (y_star - PI / 4.0).abs()
    );
    assert!((t_star - PI).abs() <= 1e-6);
    assert!((y_star - PI / 4.0).abs() <= 1e-6);
    // The closed-form prediction agrees with the search.
    assert!((cut_time(&c).unwrap() - PI).abs() <= 1e-12);
    let p = cut_point(&c).unwrap();
    assert!((p[0]).abs() <= 1e-12 && (p[1] - PI / 4.0).abs() <= 1e-12 && p[2].abs() <= 1e-12);
}

#[test]
fn criterion_07_symmetry_residuals_split_as_predicted() {
    let pts = sample_points(3, 50, DEFAULT_SEED);
    let mut worst_pass = 0.0_f64;
    for k in 0..=3 {
        let r = verify_symmetry(&symmetry_field(k), Structure::FlatMetric, &pts).unwrap();
        worst_pass = worst_pass.max(r.max_residual);
        assert!(
            r.max_residual <= 1e-8,
            "t{k} must preserve the flat metric, residual {:.3e}",
            r.max_residual
        );
    }
    for k in 1..=8 {
        let r = verify_symmetry(&symmetry_field(k), Structure::Splitting, &pts).unwrap();
        worst_pass = worst_pass.max(r.max_residual);
        assert!(
            r.max_residual <= 1e-8,
            "t{k} must preserve the splitting, residual {:.3e}",
            r.max_residual
        );
    }
    let mut weakest_fail = f64::INFINITY;
    for k in 4..=8 {
        let r = verify_symmetry(&symmetry_field(k), Structure::FlatMetric, &pts).unwrap();
        weakest_fail = weakest_fail.min(r.max_residual);
        assert!(
            r.max_residual > 1e-2,
            "t{k} must break the flat metric, residual {:.3e}",
            r.max_residual
        );
    }
    println!(
        "criterion 07: max passing residual = {worst_pass:.3e}, \
         min breaking residual = {weakest_fail:.3e}"
    );
}

#[test]
fn criterion_08_rotated_geodesics_still_solve_the_system() {
    let c = constants_from_initial(example1());
    let c1 = 2.0;
    let mut worst = 0.0_f64;
    for s in [0.3, 1.0, 2.0] {
        let map = closed_flow(&ClosedFlow::Rotation, s);
        let gamma = |t: f64| -> Vec<f64> {
            let st = eval_state(&c, t);
            map.apply(&[st.x, st.y, st.theta]).expect("rotation is total")
        };
        // Fixed endpoints: the flow vanishes at the origin and at the
        // first return point.
        let start = gamma(0.0);
        let end = gamma(PI);
        for d in 0..3 {
            assert!(start[d].abs() <= 1e-9);
        }
        assert!(end[0].abs() <= 1e-9);
        assert!((end[1] - PI / 4.0).abs() <= 1e-9);
        assert!(end[2].abs() <= 1e-9);
        // Second-order form of the geodesic equations along the curve.
        let fd = 2e-4;
        for i in 1..=25 {
            let t = PI * f64::from(i) / 26.0;
            let pm = gamma(t - fd);
            let p0 = gamma(t);
            let pp = gamma(t + fd);
            let dd = |d: usize| (pp[d] - 2.0 * p0[d] + pm[d]) / (fd * fd);
            let d1 = |d: usize| (pp[d] - pm[d]) / (2.0 * fd);
            let r1 = dd(2) + c1 * d1(0);
            let r2 = dd(0) - c1 * d1(2);
            let r3 = d1(1) - p0[2] * d1(0);
            worst = worst.max(r1.abs()).max(r2.abs()).max(r3.abs());
        }
    }
    println!("criterion 08: max ODE residual along rotated curves = {worst:.3e}");
    assert!(worst <= 1e-6);
}

#[test]
fn criterion_09_projective_pushforward_has_the_predicted_factors() {
    let s = 1.0;
    let map = closed_flow(&ClosedFlow::Projective, s);
    let frame = models::heis_frame();
    let push1 = pushforward_field(&map, &frame[0], DEFAULT_FD_STEP);
    let push2 = pushforward_field(&map, &frame[1], DEFAULT_FD_STEP);
    let mut worst = 0.0_f64;
    for p in sample_points(3, 20, DEFAULT_SEED) {
        let w = s * p[2] - 2.0;
        let got1 = push1.at(&p);
        let want1: Vec<f64> = frame[0].at(&p).iter().map(|v| v * w * w / 4.0).collect();
        let got2 = push2.at(&p);
        let want2: Vec<f64> = frame[1].at(&p).iter().map(|v| v * (-2.0 / w)).collect();
        for d in 0..3 {
            worst = worst.max((got1[d] - want1[d]).abs());
            worst = worst.max((got2[d] - want2[d]).abs());
        }
    }
    println!("criterion 09: max pushforward factor error = {worst:.3e} at 20 points");
    assert!(worst <= 1e-6);
}

#[test]
fn criterion_10_prolongation_reaches_the_reference_algebra() {
    let input = bundled_symbol_input();
    let result = prolong(&input, 6).unwrap();
    assert_eq!(
        result.dims_by_degree,
        vec![(-2, 1), (-1, 2), (0, 2), (1, 2), (2, 1)]
    );
    let algebra = result.algebra.expect("prolongation terminates");
    assert_eq!(algebra.dim(), 8);
    let killing_det = exact::det(&algebra.killing_form());
    assert!(!killing_det.is_zero());
    let matched = match_to_reference(&algebra, &lie::contact_symmetry_algebra()).unwrap();
    assert!(matched.verified, "exact change of basis onto the reference table");
    // The degree-3 piece is empty.
    let mut state = GradedAlgebraState::from_structure(&input).unwrap();
    assert_eq!(prolong_step(&mut state).unwrap(), 2);
    assert_eq!(prolong_step(&mut state).unwrap(), 1);
    assert_eq!(prolong_step(&mut state).unwrap(), 0);
    println!(
        "criterion 10: dims (1,2,2,2,1), Killing det = {killing_det}, \
         basis match verified, degree-3 step = 0"
    );
}

#[test]
fn criterion_11_no_invariant_metric_exact_kernel_is_zero() {
    // Unknowns (b11, b12, b22) of a symmetric B; each isotropy matrix a
    // contributes the three independent entries of aB + Ba^t = 0.
    let a1 = [[-1_i64, 0], [0, -1]];
    let a2 = [[1_i64, 0], [0, -1]];
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for a in [a1, a2] {
        let (a11, a12, a21, a22) = (a[0][0], a[0][1], a[1][0], a[1][1]);
        rows.push(vec![rat_int(2 * a11), rat_int(2 * a21), rat_int(0)]);
        rows.push(vec![rat_int(a12), rat_int(a11 + a22), rat_int(a21)]);
        rows.push(vec![rat_int(0), rat_int(2 * a12), rat_int(2 * a22)]);
    }
    let kernel = exact::kernel_basis(&rows, 3);
    assert!(kernel.is_empty(), "only B = 0 commutes with both actions");
    // Float route agrees.
    let af1 = [[-1.0, 0.0], [0.0, -1.0]];
    let af2 = [[1.0, 0.0], [0.0, -1.0]];
    assert_eq!(invariant_metric_space_dim(&[af1, af2]), 0);
    println!("criterion 11: exact kernel dimension = 0");
}

#[test]
fn criterion_12_group_law_holds_and_left_translation_preserves_the_frame() {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let draw = |rng: &mut ChaCha8Rng| {
        HeisenbergElement::new(
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-2.0..=2.0),
        )
    };
    let mut worst_assoc = 0.0_f64;
    for _ in 0..1000 {
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let left = heis_mul(a, heis_mul(b, c)).to_point();
        let right = heis_mul(heis_mul(a, b), c).to_point();
        for d in 0..3 {
            worst_assoc = worst_assoc.max((left[d] - right[d]).abs());
        }
    }
    assert!(worst_assoc <= 1e-12);

    let mut worst_push = 0.0_f64;
    let pts = sample_points(3, 20, DEFAULT_SEED);
    for _ in 0..3 {
        let g = draw(&mut rng);
        let ginv = heis_inv(g);
        let translate = PointTransformation::new(
            "L_g",
            3,
            move |p: &[f64]| Some(heis_mul(g, HeisenbergElement::from_point(p)).to_point()),
            move |p: &[f64]| Some(heis_mul(ginv, HeisenbergElement::from_point(p)).to_point()),
        );
        for field in models::heis_full_frame() {
            let pushed = pushforward_field(&translate, &field, DEFAULT_FD_STEP);
            for p in &pts {
                let got = pushed.at(p);
                let want = field.at(p);
                for d in 0..3 {
                    worst_push = worst_push.max((got[d] - want[d]).abs());
                }
            }
        }
    }
    println!(
        "criterion 12: max associativity defect = {worst_assoc:.3e}, \
         max left-invariance residual = {worst_push:.3e}"
    );
    assert!(worst_push <= 1e-6);
}
