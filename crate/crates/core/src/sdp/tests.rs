use super::*;
use crate::groebner::buchberger;
use crate::model::{build_fstar, build_ideal_sos, GraphClassParams};
use crate::MonomialOrder;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(a: usize, b: usize, c: usize, d: usize) -> (GroebnerBasis, Polynomial) {
    let params = GraphClassParams::new(a, b, c, d).unwrap();
    let gb = buchberger(&build_ideal_sos(params), MonomialOrder::Grevlex).unwrap();
    (gb, build_fstar(params))
}

/// Basis indices of `1`, `x_gh` and `x_gh x_gh'`.
fn grouped_mask(problem_basis: &[Monomial], vars: &VarTable) -> MonomialMask {
    let vertex: u64 = vars.vertex_indices().iter().fold(0, |a, &i| a | 1 << i);
    let retained = problem_basis
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            let s = m.support_mask().unwrap();
            if s & !vertex != 0 || s.count_ones() > 2 {
                return false;
            }
            let gs: Vec<usize> = m
                .exponents()
                .map(|(i, _)| match vars.var(i) {
                    crate::algebra::Var::Vertex { g, .. } => g,
                    _ => unreachable!(),
                })
                .collect();
            gs.windows(2).all(|w| w[0] == w[1])
        })
        .map(|(i, _)| i)
        .collect();
    MonomialMask::new(retained)
}

fn tiny_problem(rhs: i64) -> SdpProblem {
    let params = GraphClassParams::new(1, 1, 1, 1).unwrap();
    let vars = Arc::new(VarTable::new(params));
    SdpProblem::from_parts(
        vars,
        0,
        vec![Monomial::one()],
        vec![Constraint {
            monomial: Monomial::one(),
            entries: vec![(0, 0, Rat::from(1))],
            rhs: Rat::from(rhs),
        }],
        Vec::new(),
    )
    .unwrap()
}

#[test]
fn dimensions_at_three_two() {
    let (gb, f) = setup(3, 2, 3, 2);
    let p1 = build_sdp(&gb, &f, 1, None, &Objective::Zero).unwrap();
    assert_eq!((p1.p(), p1.num_constraints()), (12, 67));
    let p2 = build_sdp(&gb, &f, 2, None, &Objective::Zero).unwrap();
    assert_eq!((p2.p(), p2.num_constraints()), (67, 359));
    let mask = grouped_mask(p2.basis(), gb.vars());
    assert_eq!(mask.len(), 19);
    let p3 = build_sdp(&gb, &f, 2, Some(&mask), &Objective::Zero).unwrap();
    assert_eq!((p3.p(), p3.num_constraints()), (19, 99));
    assert!(p1.warnings().is_empty() && p3.warnings().is_empty());
}

#[test]
fn constraints_match_target_and_products() {
    let (gb, f) = setup(3, 2, 3, 2);
    let problem = build_sdp(&gb, &f, 1, None, &Objective::Zero).unwrap();
    let nf = gb.normal_form(&f).unwrap();
    for c in problem.constraints() {
        assert_eq!(c.rhs, nf.coefficient(&c.monomial));
        assert!(c.entries.iter().all(|&(i, j, _)| i <= j));
    }
    // every target monomial has a row
    for (m, _) in nf.terms() {
        assert!(problem.constraints().iter().any(|c| &c.monomial == m));
    }
    // vᵀQv reduces to Σ_t ⟨A_t, Q⟩ t for a symmetric integer Q
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = problem.p();
    let mut q = vec![vec![Rat::zero(); p]; p];
    for i in 0..p {
        for j in i..p {
            let v = Rat::from(rng.gen_range(-3i64..=3));
            q[i][j] = v.clone();
            q[j][i] = v;
        }
    }
    let lhs = gb
        .normal_form(&problem.gram_polynomial(&q).unwrap())
        .unwrap();
    let qf = DMatrix::from_fn(p, p, |i, j| q[i][j].to_f64());
    for (t, c) in problem.constraints().iter().enumerate() {
        assert_eq!(
            lhs.coefficient(&c.monomial).to_f64(),
            problem.constraint_value(t, &qf)
        );
    }
}

#[test]
fn mask_file_round_trip() {
    let (gb, f) = setup(3, 2, 3, 2);
    let problem = build_sdp(&gb, &f, 2, None, &Objective::Zero).unwrap();
    let mask = grouped_mask(problem.basis(), gb.vars());
    let text = mask.to_text(problem.basis(), gb.vars());
    assert_eq!(
        MonomialMask::parse(&text, problem.basis(), gb.vars()).unwrap(),
        mask
    );
    assert!(matches!(
        build_sdp(
            &gb,
            &f,
            2,
            Some(&MonomialMask::new(vec![500])),
            &Objective::Zero
        ),
        Err(SdpError::MaskOutOfRange(500, 67))
    ));
}

#[test]
fn excluded_target_monomial_warns() {
    let (gb, f) = setup(3, 2, 3, 2);
    let problem = build_sdp(
        &gb,
        &f,
        1,
        Some(&MonomialMask::new(vec![0])),
        &Objective::Zero,
    )
    .unwrap();
    assert!(!problem.warnings().is_empty());
    let sol = solve(&problem, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Infeasible);
}

#[test]
fn custom_objective_file() {
    let (gb, _) = setup(3, 2, 3, 2);
    let text = "# weights\nx[0,0] x[0,0] 2\n1 x[0,1] -1/2\n";
    let obj = Objective::parse_custom(text, gb.vars()).unwrap();
    let Objective::Custom(entries) = &obj else {
        panic!()
    };
    assert_eq!(entries.len(), 2);
    let back =
        Objective::parse_custom(&Objective::custom_to_text(entries, gb.vars()), gb.vars()).unwrap();
    assert_eq!(back, obj);
}

#[test]
fn tiny_feasible_and_infeasible() {
    let sol = solve(&tiny_problem(3), &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Feasible);
    assert!((sol.x[(0, 0)] - 3.0).abs() < 1e-7);
    let problem = tiny_problem(-1);
    let sol = solve(&problem, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Infeasible);
    let w = sol.witness.unwrap();
    assert!(w.check(&problem, 1e-8));
    assert!(w.y[0] < 0.0);
}

#[test]
fn inconsistent_rows_give_exact_ray() {
    let params = GraphClassParams::new(1, 1, 1, 1).unwrap();
    let vars = Arc::new(VarTable::new(params));
    let row = |rhs: i64| Constraint {
        monomial: Monomial::one(),
        entries: vec![(0, 1, Rat::from(2))],
        rhs: Rat::from(rhs),
    };
    let problem = SdpProblem::from_parts(
        vars,
        1,
        vec![Monomial::var(0), Monomial::one()],
        vec![row(1), row(2)],
        Vec::new(),
    )
    .unwrap();
    let sol = solve(&problem, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Infeasible);
    let w = sol.witness.unwrap();
    assert_eq!(w.exact.as_deref(), Some(&[Rat::from(-1), Rat::from(1)][..]));
    assert!(w.check(&problem, 0.0));
}

#[test]
fn iteration_cap_is_indeterminate() {
    let settings = SolverSettings {
        tol: 1e-8,
        max_iter: 1,
    };
    let sol = solve(&tiny_problem(3), &settings).unwrap();
    assert_eq!(sol.status, SdpStatus::Indeterminate);
}

#[test]
fn jacobi_matches_reference_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [1usize, 2, 5, 12] {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &b + b.transpose();
        let (values, vectors) = jacobi_eigen(&a).unwrap();
        let mut reference: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in values.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-10);
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values));
        assert!((&vectors * d * vectors.transpose() - &a).amax() < 1e-10);
    }
}

#[test]
fn factor_of_identity_and_low_rank() {
    let f = spectral_factor(&DMatrix::identity(3, 3), DEFAULT_EIG_TOL).unwrap();
    assert_eq!(f.rank(), 3);
    assert!(f.reconstruction_error(&DMatrix::identity(3, 3)) < 1e-12);
    let v = nalgebra::DVector::from_vec(vec![1.0, 2.0, 0.0, -1.0]);
    let x = &v * v.transpose();
    let f = spectral_factor(&x, DEFAULT_EIG_TOL).unwrap();
    assert_eq!(f.rank(), 1);
    assert!(f.reconstruction_error(&x) < 1e-12);
    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(matches!(
        spectral_factor(&bad, DEFAULT_EIG_TOL),
        Err(SdpError::Indefinite(_))
    ));
}

#[test]
fn suggest_mask_drops_zero_columns() {
    let basis = vec![Monomial::var(0), Monomial::var(1), Monomial::one()];
    let factor = SpectralFactor {
        s: DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]),
        eigenvalues: vec![1.0],
        threshold: 0.0,
    };
    assert_eq!(
        suggest_mask(&factor, DEFAULT_COL_TOL, &basis).retained(),
        &[0, 2]
    );
    let factor = SpectralFactor {
        s: DMatrix::from_row_slice(1, 3, &[1.0, 0.5, -0.5]),
        eigenvalues: vec![1.0],
        threshold: 0.0,
    };
    assert_eq!(
        suggest_mask(&factor, DEFAULT_COL_TOL, &basis),
        MonomialMask::full(3)
    );
}

#[test]
fn heatmap_files() {
    let dir = tempfile::tempdir().unwrap();
    let one = SpectralFactor {
        s: DMatrix::from_element(1, 1, 2.5),
        eigenvalues: vec![6.25],
        threshold: 0.0,
    };
    let (csv_path, pgm_path) =
        export_heatmap(&one, &["1".into()], &dir.path().join("one")).unwrap();
    let back = read_matrix_csv(&csv_path, true).unwrap();
    assert_eq!(back, DMatrix::from_element(1, 1, 2.5));
    assert!(fs_text(&pgm_path).ends_with("128\n"));

    let zero = SpectralFactor {
        s: DMatrix::zeros(2, 3),
        eigenvalues: vec![],
        threshold: 0.0,
    };
    let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let (_, pgm) = export_heatmap(&zero, &names, &dir.path().join("zero")).unwrap();
    let pgm_text = fs_text(&pgm);
    let pixels: Vec<&str> = pgm_text
        .lines()
        .skip(4)
        .flat_map(str::split_whitespace)
        .collect();
    assert_eq!(pixels, vec!["128"; 6]);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = DMatrix::from_fn(4, 19, |_, _| rng.gen_range(-1.0..1.0));
    let names: Vec<String> = (0..19).map(|i| format!("x[{i},0]")).collect();
    let (csv_path, _) = export_heatmap(
        &SpectralFactor {
            s: s.clone(),
            eigenvalues: vec![],
            threshold: 0.0,
        },
        &names,
        &dir.path().join("big"),
    )
    .unwrap();
    let text = fs_text(&csv_path);
    assert_eq!(text.lines().count(), 5);
    assert_eq!(read_matrix_csv(&csv_path, true).unwrap(), s);
}

fn fs_text(p: &std::path::Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sdpa_round_trip() {
    let (gb, f) = setup(3, 2, 3, 2);
    let problem = build_sdp(&gb, &f, 1, None, &Objective::TraceMin).unwrap();
    let data = import_sdpa(&export_sdpa(&problem)).unwrap();
    assert_eq!(data.num_constraints(), 67);
    assert_eq!(data.block_sizes, vec![12]);
    assert_eq!(data.matrix(0), -DMatrix::<f64>::identity(12, 12));
    for (t, c) in problem.constraints().iter().enumerate() {
        assert_eq!(data.c[t], c.rhs.to_f64());
        let a = data.matrix(t + 1);
        let x = DMatrix::from_fn(12, 12, |i, j| {
            (i * 12 + j) as f64 + if i == j { 0.5 } else { 0.0 }
        });
        let sx = (&x + x.transpose()) * 0.5;
        assert!((a.dot(&sx) - problem.constraint_value(t, &sx)).abs() < 1e-9);
    }
}
