use super::*;
use crate::certify::{inner_product_residual, psd_witness, verify_certificate, verify_gram};
use crate::model::build_fstar;
use nalgebra::DMatrix;

fn params(a: usize, b: usize, c: usize, d: usize) -> GraphClassParams {
    GraphClassParams::new(a, b, c, d).unwrap()
}

fn gb_for(p: GraphClassParams) -> GroebnerBasis {
    buchberger(&build_ideal_sos(p), MonomialOrder::Grevlex).unwrap()
}

fn r2(a: i64, b: i64) -> QuadExt {
    sqrt2(Rat::from(a), Rat::from(b))
}

#[test]
fn ids_parse_and_print() {
    for id in [
        FamilyId::Thm46,
        FamilyId::Thm51,
        FamilyId::Thm52,
        FamilyId::Conj54(3),
    ] {
        assert_eq!(id.to_string().parse::<FamilyId>().unwrap(), id);
    }
    assert_eq!("CONJ54-4".parse::<FamilyId>().unwrap(), FamilyId::Conj54(4));
    assert!("thm99".parse::<FamilyId>().is_err());
    assert!("conj54".parse::<FamilyId>().is_err());
}

#[test]
fn domains() {
    assert!(FamilyId::Thm46.check_domain(params(3, 2, 3, 2)).is_ok());
    assert!(FamilyId::Thm46.check_domain(params(2, 1, 3, 2)).is_err());
    assert!(FamilyId::Thm51.check_domain(params(2, 2, 3, 2)).is_ok());
    assert!(FamilyId::Thm51.check_domain(params(2, 2, 3, 1)).is_err());
    assert!(FamilyId::Thm52.check_domain(params(2, 2, 4, 2)).is_ok());
    assert!(FamilyId::Thm52.check_domain(params(2, 2, 3, 1)).is_err());
    assert!(FamilyId::Conj54(3).check_domain(params(2, 2, 5, 2)).is_ok());
    assert!(FamilyId::Conj54(3)
        .check_domain(params(2, 2, 5, 3))
        .is_err());
    assert!(matches!(
        ansatz_conj54(2, params(2, 2, 4, 2), 99),
        Err(FamilyError::Domain { .. })
    ));
    assert!(matches!(
        cert_thm52(params(3, 2, 4, 2)),
        Err(FamilyError::Domain { .. })
    ));
    assert!(matches!(
        family_certificate(FamilyId::Conj54(3), params(2, 2, 5, 2)),
        Err(FamilyError::NoClosedForm(_))
    ));
}

#[test]
fn thm51_summands() {
    let p = params(2, 2, 3, 2);
    let cert = cert_thm51(p).unwrap();
    let vars = Arc::new(VarTable::new(p));
    let expected = [
        "x[0,0] + x[0,1] + x[0,2] - 2",
        "x[1,0] + x[1,1] + x[1,2] - 2",
    ];
    for (s, e) in cert.summands().iter().zip(expected) {
        assert_eq!(*s, Polynomial::parse(vars.clone(), e).unwrap());
    }
    assert_eq!(cert_thm51(params(4, 4, 5, 4)).unwrap().len(), 4);
    assert!(cert.summands().iter().all(|s| s.degree() == 1));
}

#[test]
fn thm52_coefficients_at_four() {
    let (a, b, g) = thm52_coefficients(4);
    assert_eq!(a, r2(8, 3));
    assert_eq!(b, r2(-5, -2));
    assert_eq!(g, r2(2, 1));
}

#[test]
fn system_52_residuals() {
    let z = QuadExt::zero();
    let res = check_system_52(&z, &z, &z, 4).unwrap();
    assert_eq!(res, [QuadExt::from(2), QuadExt::from(-1), QuadExt::zero()]);
    for n in 4..=12 {
        let (a, b, g) = thm52_coefficients(n);
        let res = check_system_52(&a, &b, &g, n as i64).unwrap();
        assert!(res.iter().all(Zero::is_zero), "n_H={n}: {res:?}");
    }
    // α off by one leaves the first two equations unsatisfied
    let (a, b, g) = thm52_coefficients(5);
    let res = check_system_52(&(a + QuadExt::one()), &b, &g, 5).unwrap();
    assert!(!res[0].is_zero() && !res[1].is_zero());
}

#[test]
fn thm46_shape() {
    let (a, b, g) = thm46_coefficients(3);
    assert_eq!(a, r2(0, 2));
    assert_eq!(b, sqrt2(Rat::zero(), q(-2, 3)));
    assert_eq!(g, sqrt2(Rat::zero(), q(1, 3)));
    let cert = cert_thm46(params(4, 3, 3, 2)).unwrap();
    assert_eq!(cert.len(), 5);
    assert!(cert.summands().iter().all(|s| s.degree() == 2));
}

#[test]
fn thm46_inner_products() {
    for n in 3..=5 {
        let res = inner_product_residual(&thm46_vectors(n), &thm46_targets(n)).unwrap();
        assert!(res.is_zero(), "n_G={n}: {res}");
    }
    // ⟨b_g, b_g'⟩ is 8/9; 8/3 leaves a residual
    let mut targets = thm46_targets(3);
    let slot = targets
        .iter_mut()
        .find(|((u, w), _)| u == "b0" && w == "b1")
        .unwrap();
    slot.1 = QuadExt::rational(q(8, 3));
    let res = inner_product_residual(&thm46_vectors(3), &targets).unwrap();
    assert_eq!(res, QuadExt::rational(q(16, 9)));
}

/// The guessed 7×7 matrix over `[1, E_1(g), E_2(g)]` at `n_G = 3`, printed to
/// three decimals.
fn guessed_x() -> DMatrix<f64> {
    #[rustfmt::skip]
    let rows = [
        8.000, -2.667, -2.667, -2.667, 1.333, 1.333, 1.333,
        -2.667, 1.000, 0.889, 0.889, -0.667, -0.444, -0.444,
        -2.667, 0.889, 1.000, 0.889, -0.444, -0.667, -0.444,
        -2.667, 0.889, 0.889, 1.000, -0.444, -0.444, -0.667,
        1.333, -0.667, -0.444, -0.445, 0.667, 0.222, 0.222,
        1.333, -0.444, -0.667, -0.445, 0.222, 0.667, 0.222,
        1.333, -0.444, -0.444, -0.667, 0.222, 0.222, 0.667,
    ];
    DMatrix::from_row_slice(7, 7, &rows)
}

#[test]
fn guessed_matrix_rounds_to_thm46_gram() {
    let q = round_gram(&guessed_x(), 99);
    assert_eq!(q, grouped_gram(&thm46_coefficient_rows(3)).unwrap());
    let w = psd_witness(&q).unwrap();
    assert_eq!(w.rank(), 4);

    let p = params(3, 2, 3, 2);
    let gb = gb_for(p);
    let f = build_fstar(p);
    let gram = GramCertificate::new(thm46_grouped_basis(gb.vars()), q).unwrap();
    assert!(verify_gram(&gram, &gb, &f));
    let polys = gram_to_polys(&gram, 2).unwrap();
    assert_eq!(polys.len(), 4);
    assert!(verify_certificate(&polys, &gb, &f));
}

#[test]
fn closed_forms_verify() {
    let p = params(3, 2, 3, 2);
    let gb = gb_for(p);
    assert!(verify_certificate(
        &cert_thm46(p).unwrap(),
        &gb,
        &build_fstar(p)
    ));

    let p = params(2, 2, 3, 2);
    let gb = gb_for(p);
    let f = build_fstar(p);
    let cert = cert_thm51(p).unwrap();
    assert!(verify_certificate(&cert, &gb, &f));
    // α = −k_H shifted by +1
    let shifted: Vec<Polynomial<QuadExt>> = cert
        .summands()
        .iter()
        .map(|s| s.checked_add(&Polynomial::one(s.vars().clone())).unwrap())
        .collect();
    assert!(!verify_certificate(
        &PolyCertificate::new(shifted, 1).unwrap(),
        &gb,
        &f
    ));

    let p = params(2, 2, 4, 2);
    let gb = gb_for(p);
    let f = build_fstar(p);
    assert!(verify_certificate(&cert_thm52(p).unwrap(), &gb, &f));
    let vars = gb.vars().clone();
    let (a, b, g) = thm52_coefficients(4);
    let one = Polynomial::one(vars.clone());
    let perturbed: Vec<Polynomial<QuadExt>> = (0..2)
        .map(|row| {
            let (e1, e2) = (row_sum(&vars, row, 1), row_sum(&vars, row, 2));
            combine(
                &vars,
                &[
                    (a.clone() + QuadExt::one(), &one),
                    (b.clone(), &e1),
                    (g.clone(), &e2),
                ],
            )
            .unwrap()
        })
        .collect();
    assert!(!verify_certificate(
        &PolyCertificate::new(perturbed, 2).unwrap(),
        &gb,
        &f
    ));
}

#[test]
fn row_sums_count_subsets() {
    let vars = Arc::new(VarTable::new(params(2, 2, 5, 2)));
    let sizes: Vec<usize> = (0..=3).map(|k| row_sum(&vars, 1, k).len()).collect();
    assert_eq!(sizes, vec![1, 5, 10, 10]);
    let copies = ansatz_copies(&vars, 3);
    assert_eq!((copies.len(), copies[0].len()), (2, 4));
}

#[test]
fn grouped_sdp_at_thm46() {
    // the grouped problem at (3,2,3,2) contains the exact Gram matrix
    let p = params(3, 2, 3, 2);
    let gb = gb_for(p);
    let f = build_fstar(p);
    let basis = thm46_grouped_basis(gb.vars());
    let problem = grouped_sdp(&gb, &f, &[basis], 2, Vec::new()).unwrap();
    assert_eq!(problem.p(), 7);
    let x = crate::certify::to_f64_matrix(&grouped_gram(&thm46_coefficient_rows(3)).unwrap());
    assert!(problem.max_residual(&x) < 1e-12);
    let sol = solve(&problem, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Feasible);
}

#[test]
fn ansatz_small_instance_verifies() {
    let p = params(2, 2, 4, 1);
    let gb = gb_for(p);
    let copies = ansatz_copies(gb.vars(), 3);
    let kernel = ansatz_kernel(&gb, &copies);
    assert!(!kernel.is_empty());
    assert!(kernel.iter().all(|k| k.len() == 4 && k[0].is_one()));
    let out = ansatz_conj54_with(&gb, 3, 99, &SolverSettings::default()).unwrap();
    let report = out.report();
    assert_eq!((report.groups_per_row, report.basis_len), (4, 4));
    assert_eq!(report.status, SdpStatus::Feasible);
    assert!(
        report.rounded && report.projected && report.verified,
        "{report:?}"
    );
    let AnsatzOutcome::Candidate { gram, .. } = out else {
        panic!("no candidate")
    };
    assert!(verify_gram(&gram, &gb, &build_fstar(p)));
    // the kernel vectors are annihilated by the rounded Y
    let y: Vec<Vec<Rat>> = gram.q()[..4].iter().map(|r| r[..4].to_vec()).collect();
    for k in &kernel {
        for row in &y {
            assert!(row.iter().zip(k).map(|(a, b)| a * b).sum::<Rat>().is_zero());
        }
    }
}

#[test]
fn block_diagonal_layout() {
    let y = vec![vec![Rat::one(), q(1, 2)], vec![q(1, 2), Rat::one()]];
    let b = block_diagonal(&y, 2);
    assert_eq!(b.len(), 4);
    assert_eq!(b[2][3], q(1, 2));
    assert!(b[0][2].is_zero() && b[1][3].is_zero());
}
