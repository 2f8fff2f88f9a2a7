use super::*;
use crate::groebner::{buchberger, reduced_monomials};
use crate::model::{build_fstar, build_ideal_sos, GraphClassParams};
use crate::MonomialOrder;
use num_traits::One;
use proptest::prelude::*;

fn setup(a: usize, b: usize, c: usize, d: usize) -> (GroebnerBasis, Polynomial) {
    let params = GraphClassParams::new(a, b, c, d).unwrap();
    let gb = buchberger(&build_ideal_sos(params), MonomialOrder::Grevlex).unwrap();
    (gb, build_fstar(params))
}

fn q(v: Rat) -> QuadExt {
    QuadExt::rational(v)
}

fn monomial_basis(gb: &GroebnerBasis, ell: u32) -> Vec<Polynomial> {
    reduced_monomials(gb, ell)
        .unwrap()
        .into_iter()
        .map(|m| Polynomial::monomial(gb.vars().clone(), m, Rat::one()))
        .collect()
}

/// `Σ c cᵀ` over the given coefficient vectors.
fn outer_sum(vectors: &[Vec<Rat>]) -> RatMatrix {
    let n = vectors[0].len();
    let mut out = vec![vec![Rat::zero(); n]; n];
    for v in vectors {
        for i in 0..n {
            for j in 0..n {
                out[i][j] += &(&v[i] * &v[j]);
            }
        }
    }
    out
}

/// Gram matrix of `s_g = Σ_h x_gh − k_H` at (2,2,3,2) over `[x.., 1]`.
fn linear_gram(gb: &GroebnerBasis) -> (Vec<Polynomial>, RatMatrix) {
    let basis = monomial_basis(gb, 1);
    let vars = gb.vars();
    let vectors: Vec<Vec<Rat>> = (0..2)
        .map(|g| {
            basis
                .iter()
                .map(|b| {
                    let m = &b.terms()[0].0;
                    if m.is_one() {
                        Rat::from(-2)
                    } else if (0..3).any(|h| *m == crate::Monomial::var(vars.vertex(g, h))) {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    let q = outer_sum(&vectors);
    (basis, q)
}

#[test]
fn identity_gram_gives_basis_squares() {
    let (gb, _) = setup(1, 1, 1, 1);
    let vars = gb.vars().clone();
    let basis = vec![
        Polynomial::one(vars.clone()),
        Polynomial::var(vars.clone(), 0),
    ];
    let cert = GramCertificate::new(
        basis.clone(),
        vec![vec![Rat::one(), Rat::zero()], vec![Rat::zero(), Rat::one()]],
    )
    .unwrap();
    let polys = gram_to_polys(&cert, 1).unwrap();
    assert_eq!(
        polys.summands(),
        &[basis[0].to_quadext(), basis[1].to_quadext()]
    );
}

#[test]
fn irrational_pivot() {
    let (gb, _) = setup(1, 1, 1, 1);
    let x = Polynomial::var(gb.vars().clone(), 0);
    let cert = GramCertificate::new(vec![x.clone()], vec![vec![Rat::from(2)]]).unwrap();
    let polys = gram_to_polys(&cert, 1).unwrap();
    let expected = x
        .to_quadext()
        .map_coeffs(|c| c.checked_mul(&QuadExt::sqrt(2).unwrap()).unwrap());
    assert_eq!(polys.summands(), &[expected]);
    assert_eq!(polys.discriminants(), vec![2]);
    let (rational, parts) = polys.sum_of_squares(gb.vars()).unwrap();
    assert_eq!(
        rational,
        x.checked_mul(&x).unwrap().scale(&Rat::from(2)).unwrap()
    );
    assert!(parts.is_empty());
}

#[test]
fn empty_certificate_when_target_in_ideal() {
    let (gb, f) = setup(1, 1, 1, 1);
    let empty = PolyCertificate::new(Vec::new(), 0).unwrap();
    assert!(verify_certificate(&empty, &gb, &f));
}

#[test]
fn linear_gram_verifies_and_rejects_scaling() {
    let (gb, f) = setup(2, 2, 3, 2);
    let (basis, q) = linear_gram(&gb);
    let cert = GramCertificate::new(basis.clone(), q.clone()).unwrap();
    assert!(verify_gram(&cert, &gb, &f));
    let polys = gram_to_polys(&cert, 1).unwrap();
    assert_eq!(polys.len(), 2);
    assert!(verify_certificate(&polys, &gb, &f));

    let doubled: RatMatrix = q
        .iter()
        .map(|row| row.iter().map(|v| v * &Rat::from(2)).collect())
        .collect();
    let cert2 = GramCertificate::new(basis.clone(), doubled).unwrap();
    assert!(!verify_gram(&cert2, &gb, &f));
    assert!(!gram_residual(&cert2, &gb, &f).unwrap().is_zero());

    let zero = GramCertificate::new(
        basis.clone(),
        vec![vec![Rat::zero(); basis.len()]; basis.len()],
    )
    .unwrap();
    assert!(!verify_gram(&zero, &gb, &f));
}

#[test]
fn residual_reports_perturbation() {
    let (gb, f) = setup(2, 2, 3, 2);
    let (basis, q) = linear_gram(&gb);
    let polys = gram_to_polys(&GramCertificate::new(basis, q).unwrap(), 1).unwrap();
    let mut summands = polys.summands().to_vec();
    // shift the constant of the first square by +1
    let one = Polynomial::<QuadExt>::one(gb.vars().clone());
    summands[0] = summands[0].checked_add(&one).unwrap();
    let bad = PolyCertificate::new(summands, 1).unwrap();
    assert!(!verify_certificate(&bad, &gb, &f));
    let res = certificate_residual(&bad, &gb, &f).unwrap();
    assert!(!res.is_zero());
    assert_ne!(res.head(3), "0");
}

#[test]
fn irrational_parts_must_cancel() {
    let (gb, f) = setup(2, 2, 3, 2);
    let vars = gb.vars().clone();
    let x = Polynomial::var(vars.clone(), vars.vertex(0, 0)).to_quadext();
    let root = Polynomial::constant(vars.clone(), QuadExt::sqrt(2).unwrap());
    // (x + √2)² = x² + 2 + 2√2 x leaves a √2 part
    let cert = PolyCertificate::new(vec![x.checked_add(&root).unwrap()], 1).unwrap();
    let res = certificate_residual(&cert, &gb, &f).unwrap();
    assert!(res.irrational.contains_key(&2));
    assert!(!verify_certificate(&cert, &gb, &f));
}

#[test]
fn degree_bound_enforced() {
    let (gb, _) = setup(2, 2, 3, 2);
    let vars = gb.vars().clone();
    let x = Polynomial::var(vars.clone(), 0).to_quadext();
    let x2 = x
        .checked_mul(&Polynomial::var(vars, 1).to_quadext())
        .unwrap();
    assert!(matches!(
        PolyCertificate::new(vec![x2], 1),
        Err(CertifyError::DegreeBound(0, 2, 1))
    ));
}

#[test]
fn indefinite_gram_is_reported() {
    let (gb, f) = setup(1, 1, 1, 1);
    let vars = gb.vars().clone();
    let basis = vec![Polynomial::one(vars.clone()), Polynomial::var(vars, 0)];
    let cert = GramCertificate::new(
        basis,
        vec![
            vec![Rat::one(), Rat::from(2)],
            vec![Rat::from(2), Rat::one()],
        ],
    )
    .unwrap();
    assert_eq!(cert.witness().unwrap_err().pivot, Rat::from(-3));
    assert!(!verify_gram(&cert, &gb, &f));
    assert!(matches!(
        gram_to_polys(&cert, 1),
        Err(CertifyError::NotPsd(_))
    ));
    assert!(GramCertificate::new(Vec::new(), vec![vec![Rat::one()]]).is_err());
}

#[test]
fn inner_product_examples() {
    let zero = vec![q(Rat::zero()); 4];
    let target = vec![(("a".to_string(), "a".to_string()), q(Rat::from(8)))];
    let vectors = vec![("a".to_string(), zero)];
    assert_eq!(
        inner_product_residual(&vectors, &target).unwrap(),
        q(Rat::from(8))
    );
    assert_eq!(
        inner_product_residual(&vectors, &[]).unwrap(),
        QuadExt::zero()
    );
    let short = vec![
        ("a".to_string(), vec![q(Rat::one())]),
        ("b".to_string(), vec![]),
    ];
    let t = vec![(("a".to_string(), "b".to_string()), QuadExt::zero())];
    assert!(matches!(
        inner_product_residual(&short, &t),
        Err(CertifyError::Dimension(_))
    ));
    let t = vec![(("a".to_string(), "c".to_string()), QuadExt::zero())];
    assert!(matches!(
        inner_product_residual(&short, &t),
        Err(CertifyError::UnknownVector(_))
    ));
}

#[test]
fn inner_product_takes_exact_absolute_maximum() {
    let s2 = QuadExt::sqrt(2).unwrap();
    // residuals −√2 and 1 + ... ; |−√2| > 1
    let vectors = vec![
        ("u".to_string(), vec![s2.clone()]),
        ("v".to_string(), vec![q(Rat::one())]),
    ];
    let targets = vec![
        (
            ("u".to_string(), "v".to_string()),
            s2.checked_mul(&q(Rat::from(2))).unwrap(),
        ),
        (("v".to_string(), "v".to_string()), QuadExt::zero()),
    ];
    assert_eq!(inner_product_residual(&vectors, &targets).unwrap(), s2);
    assert_eq!(
        sign(&QuadExt::new(Rat::from(3), Rat::from(-2), 2).unwrap()),
        Ordering::Greater
    );
    assert_eq!(
        sign(&QuadExt::new(Rat::from(-3), Rat::from(2), 3).unwrap()),
        Ordering::Greater
    );
    assert_eq!(
        sign(&QuadExt::new(Rat::from(1), Rat::from(-1), 2).unwrap()),
        Ordering::Less
    );
}

#[test]
fn certificate_files_round_trip() {
    let (gb, _) = setup(2, 2, 3, 2);
    let params = gb.params();
    let (basis, qm) = linear_gram(&gb);
    let cert = GramCertificate::new(basis, qm).unwrap();
    let (p2, back) = parse_gram_certificate(&gram_certificate_text(&cert, params)).unwrap();
    assert_eq!(p2, params);
    assert_eq!(back.q(), cert.q());
    assert_eq!(back.basis(), cert.basis());

    let x = Polynomial::var(gb.vars().clone(), 0).to_quadext();
    let s = x.map_coeffs(|c| {
        c.checked_mul(&QuadExt::new(Rat::from(2), Rat::one(), 2).unwrap())
            .unwrap()
    });
    let poly = PolyCertificate::new(vec![s, x], 1).unwrap();
    let text = poly_certificate_text(&poly, params);
    assert!(text.starts_with("# sos certificate params=2,2,3,2 ell=1 summands=2 d=2\n"));
    let (_, back) = parse_poly_certificate(&text).unwrap();
    assert_eq!(back, poly);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.txt");
    write_poly_certificate(&path, &poly, params).unwrap();
    assert_eq!(
        parse_poly_certificate(&std::fs::read_to_string(&path).unwrap())
            .unwrap()
            .1,
        poly
    );
    assert!(parse_poly_certificate(
        "# sos certificate params=2,2,3,2 ell=1 summands=3 d=1\nx[0,0]\n"
    )
    .is_err());
}

fn small_rat() -> impl Strategy<Value = Rat> {
    (-4i64..=4, 1i64..=4).prop_map(|(n, d)| Rat::new(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gram_and_square_forms_agree(
        vecs in proptest::collection::vec(proptest::collection::vec(small_rat(), 5), 1..4),
        ridge in 0i64..=6,
        shift in -2i64..=2,
    ) {
        let (gb, _) = setup(2, 2, 3, 2);
        let basis: Vec<Polynomial> = monomial_basis(&gb, 1).into_iter().take(5).collect();
        // low-rank part plus a ridge, which makes most pivots irrational
        let mut qm = outer_sum(&vecs);
        for (i, row) in qm.iter_mut().enumerate() {
            row[i] += &Rat::new(ridge, 3);
        }
        let cert = GramCertificate::new(basis, qm).unwrap();
        let exact = gb.normal_form(&cert.polynomial(gb.vars()).unwrap()).unwrap();
        let target = exact.checked_add(&Polynomial::constant(gb.vars().clone(), Rat::from(shift))).unwrap();
        let polys = gram_to_polys(&cert, 1).unwrap();
        prop_assert_eq!(verify_gram(&cert, &gb, &target), verify_certificate(&polys, &gb, &target));
        prop_assert_eq!(verify_gram(&cert, &gb, &target), shift == 0);
    }
}
