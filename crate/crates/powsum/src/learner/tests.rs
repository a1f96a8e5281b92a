use std::sync::Arc;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::algebra::matrix::rank_of_rows;
use crate::algebra::{Matrix, PrimeField, UniPoly};
use crate::blackbox::{express_in_basis, random_point, Combination, Opaque};
use crate::multipoly::{monomial_enumeration, Monomial, MonomialKind};

type F = PrimeField<2>;

fn fp() -> F {
    PrimeField::new(&"170141183460469231731687303715884105727".parse::<BigUint>().unwrap()).unwrap()
}

fn random_circuit(f: &F, n: usize, t: usize, m: usize, s: usize, rng: &mut ChaCha20Rng) -> PowerSumCircuit<F> {
    let terms = (0..s).map(|_| (f.random(rng), SparsePoly::random_homogeneous(f, n, t, rng))).collect();
    PowerSumCircuit::new(f, n, t, m, terms).unwrap()
}

fn proportional(f: &F, a: &SparsePoly<F>, b: &SparsePoly<F>) -> bool {
    let monos = monomial_enumeration(a.nvars(), a.degree().unwrap_or(0) as usize, MonomialKind::All);
    let x = a.coeff_vector(&monos);
    let y = b.coeff_vector(&monos);
    rank_of_rows(f, &[x, y]) == 1
}

/// Rank of the coefficient vectors of a list of polynomials.
fn symbolic_rank(f: &F, polys: &[SparsePoly<F>]) -> usize {
    let n = polys[0].nvars();
    let deg = polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0) as usize;
    let monos = monomial_enumeration(n, deg, MonomialKind::All);
    rank_of_rows(f, &polys.iter().map(|p| p.coeff_vector(&monos)).collect::<Vec<_>>())
}

fn all_partials(p: &SparsePoly<F>, k: usize) -> Vec<SparsePoly<F>> {
    monomial_enumeration(p.nvars(), k, MonomialKind::All)
        .iter()
        .map(|a| p.partial_derivative(a).unwrap())
        .collect()
}

#[test]
fn dim_u_matches_symbolic_rank() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(91);
    let c = random_circuit(&f, 9, 2, 4, 2, &mut rng);
    let params = Params { n0: 4, m0: 2, k: 1 };
    let (l, _) = draw_maps(&f, 9, &params, &mut rng);
    let u = compute_u(c.oracle(), &l, 1, &mut rng).unwrap();
    let sym: Vec<_> = all_partials(&c.expand(), 1).iter().map(|p| p.compose_affine(&l).unwrap()).collect();
    assert_eq!(u.basis.dim(), symbolic_rank(&f, &sym));
    assert_eq!(u.basis.dim(), params.expected_dim_u(2, 2));
}

#[test]
fn dim_u_small_cases() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(92);
    // A power of a linear form has a one-dimensional space of projected partials.
    let lin = SparsePoly::linear_form(&f, &f.random_vec(&mut rng, 5));
    let c = PowerSumCircuit::new(&f, 5, 1, 6, vec![(f.one(), lin)]).unwrap();
    let l = Matrix::random(&f, 5, 3, &mut rng);
    assert_eq!(compute_u(c.oracle(), &l, 2, &mut rng).unwrap().basis.dim(), 1);
    // k = 0 leaves just the projection of f.
    let c = random_circuit(&f, 5, 2, 3, 2, &mut rng);
    assert_eq!(compute_u(c.oracle(), &l, 0, &mut rng).unwrap().basis.dim(), 1);
}

#[test]
fn gcd_kernel_and_quotients() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(93);
    let c = random_circuit(&f, 8, 2, 4, 2, &mut rng);
    let params = Params { n0: 4, m0: 2, k: 1 };
    let (l, _) = draw_maps(&f, 8, &params, &mut rng);
    let u = compute_u(c.oracle(), &l, 1, &mut rng).unwrap();
    let (v, check) = multi_gcd(&u, 1, 2, &mut rng).unwrap();
    assert!(check.passed);
    assert_eq!(v.dim(), 2);
    // z_0 g and z_1 g lie back in U for every V element g.
    for var in 0..2 {
        let times: BlackBox<F> = Arc::new(crate::blackbox::ClosureBox::new(&f, 4, 6, {
            let el = v.elements.clone();
            move |z: &[<F as Field>::Elem]| {
                let fld = el.field().clone();
                fld.mul(&z[var], &el.eval(z)[0])
            }
        }));
        assert!(express_in_basis(&times, &u.basis, &mut rng).unwrap().is_some());
    }
    // The V span is the span of the projected G_i^e.
    let gs: Vec<_> = c.terms.iter().map(|(_, q)| q.compose_affine(&l).unwrap().pow(3)).collect();
    for g in &gs {
        let gb: BlackBox<F> = Arc::new(crate::blackbox::PolyBox::new(g.clone()));
        assert!(express_in_basis(&gb, &v, &mut rng).unwrap().is_some());
    }
}

#[test]
fn dim_w_matches_symbolic_rank() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(94);
    let c = random_circuit(&f, 8, 2, 4, 2, &mut rng);
    let params = Params { n0: 4, m0: 2, k: 1 };
    let (l, p) = draw_maps(&f, 8, &params, &mut rng);
    let u = compute_u(c.oracle(), &l, 1, &mut rng).unwrap();
    let (v, _) = multi_gcd(&u, 1, 2, &mut rng).unwrap();
    let (_, w) = compute_w(&v, &p, 1, &mut rng).unwrap();
    let mut sym = Vec::new();
    for (_, q) in &c.terms {
        let g = q.compose_affine(&l).unwrap().pow(3);
        sym.extend(all_partials(&g, 1).iter().map(|d| d.compose_affine(&p).unwrap()));
    }
    assert_eq!(w.dim(), symbolic_rank(&f, &sym));
    assert_eq!(w.dim(), params.expected_dim_w(2, 2));
}

#[test]
fn components_are_projected_powers_and_match_white_box() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(95);
    let c = random_circuit(&f, 18, 2, 4, 3, &mut rng);
    let params = select_parameters(18, 8, 2, 3).unwrap().chosen;
    let (l, p) = draw_maps(&f, 18, &params, &mut rng);
    let st = run_pipeline(&c.oracle(), 2, 4, 3, &params, &l, &p, true, &mut rng).unwrap();
    assert!(st.checks.iter().all(|c| c.passed));
    let pts: Vec<_> = (0..5).map(|_| random_point(&f, params.n0, &mut rng)).collect();
    let truth: Vec<Vec<_>> = c
        .terms
        .iter()
        .map(|(_, q)| {
            let g = q.compose_affine(&l).unwrap().pow(st.e as u32);
            pts.iter().map(|z| g.evaluate(z).unwrap()).collect()
        })
        .collect();
    // Ground-truth permutation from white-box bookkeeping.
    let mut ground = Vec::new();
    for comp in &st.components.components {
        let vals: Vec<_> = pts.iter().map(|z| comp.v.eval(z)[0]).collect();
        let hits: Vec<usize> = (0..3).filter(|&i| rank_of_rows(&f, &[truth[i].clone(), vals.clone()]) == 1).collect();
        assert_eq!(hits.len(), 1);
        ground.push(hits[0]);
    }
    // A rerun with the first column of L moved matches the same way.
    let mut l2 = l.clone();
    for i in 0..18 {
        l2.set(i, 0, f.random(&mut rng));
    }
    let rerun = run_pipeline(&c.oracle(), 2, 4, 3, &params, &l2, &p, true, &mut rng).unwrap();
    let mut rerun_truth = Vec::new();
    for comp in &rerun.components.components {
        let g: Vec<_> = c.terms.iter().map(|(_, q)| q.compose_affine(&l2).unwrap().pow(st.e as u32)).collect();
        let vals: Vec<_> = pts.iter().map(|z| comp.v.eval(z)[0]).collect();
        rerun_truth.push(
            (0..3)
                .find(|&i| {
                    let tv: Vec<_> = pts.iter().map(|z| g[i].evaluate(z).unwrap()).collect();
                    rank_of_rows(&f, &[tv, vals.clone()]) == 1
                })
                .unwrap(),
        );
    }
    let mp = MatchPoints::draw(&st.components, params.n0, 17, &mut rng);
    let (perm, _) = match_runs(&mp, &rerun.components).unwrap();
    for (i, &j) in perm.iter().enumerate() {
        assert_eq!(ground[i], rerun_truth[j]);
    }
    // Matching a run against itself gives the identity with ratio one.
    let (perm, ratios) = match_runs(&mp, &st.components).unwrap();
    assert_eq!(perm, vec![0, 1, 2]);
    assert!(ratios.iter().all(|r| f.is_one(r)));
}

#[test]
fn query_power_single_term() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(96);
    let c = random_circuit(&f, 5, 2, 3, 1, &mut rng);
    let params = select_parameters(5, 6, 2, 1).unwrap().chosen;
    let (l, p) = draw_maps(&f, 5, &params, &mut rng);
    let st = run_pipeline(&c.oracle(), 2, 3, 1, &params, &l, &p, true, &mut rng).unwrap();
    let oracle = c.oracle();
    let mut rec = Recovery::new(&oracle, 2, 3, 1, &st, 13, true, &mut rng);
    let q = &c.terms[0].1;
    let e = st.e as u64;
    let mut scale = None;
    for _ in 0..10 {
        let a = random_point(&f, 5, &mut rng);
        let got = rec.query_power(0, &a, &mut rng).unwrap();
        let ratio = f.div(&got, &f.pow(&q.evaluate(&a).unwrap(), e)).unwrap();
        assert_eq!(*scale.get_or_insert(ratio), ratio);
    }
    let zero = vec![f.zero(); 5];
    assert!(f.is_zero(&rec.query_power(0, &zero, &mut rng).unwrap()));
    let a = random_point(&f, 5, &mut rng);
    let first = rec.query_power(0, &a, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
    let second = rec.query_power(0, &a, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
    assert_eq!(first, second);
}

#[test]
fn normalized_root_examples() {
    let f = fp();
    // (1 + 3y + y^2)^2 scaled by 7.
    let h = UniPoly::from_i64s(&f, &[1, 3, 1]);
    let p = h.pow(2).scale(&f.from_i64(7));
    assert_eq!(normalized_root(&p, 2, 2).unwrap(), h);
    let not_square = UniPoly::from_i64s(&f, &[1, 1, 0, 0, 1]);
    assert!(normalized_root(&not_square, 2, 2).is_err());
}

#[test]
fn final_coefficients_examples() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(97);
    let q = SparsePoly::random_homogeneous(&f, 4, 2, &mut rng);
    let c = PowerSumCircuit::new(&f, 4, 2, 3, vec![(f.from_i64(5), q.clone())]).unwrap();
    assert_eq!(final_coefficients(&c.oracle(), &[q], 3, &mut rng).unwrap(), vec![f.from_i64(5)]);
    let c = random_circuit(&f, 4, 2, 3, 3, &mut rng);
    let qs: Vec<_> = c.terms.iter().map(|(_, q)| q.clone()).collect();
    let us = final_coefficients(&c.oracle(), &qs, 3, &mut rng).unwrap();
    let mut rev = qs.clone();
    rev.reverse();
    let mut urev = final_coefficients(&c.oracle(), &rev, 3, &mut rng).unwrap();
    urev.reverse();
    assert_eq!(us, urev);
    assert_eq!(us, c.terms.iter().map(|(c, _)| *c).collect::<Vec<_>>());
}

fn check_recovery(c: &PowerSumCircuit<F>, model: &LearnedModel<F>, rng: &mut ChaCha20Rng) {
    let f = c.field();
    assert_eq!(model.qs.len(), c.s());
    for (_, q) in &c.terms {
        assert_eq!(model.qs.iter().filter(|r| proportional(f, q, r)).count(), 1);
    }
    for q in &model.qs {
        assert!(q.is_homogeneous());
        assert_eq!(q.degree(), Some(c.t as u32));
    }
    let learned = model.to_circuit(c.n, c.t, c.m).unwrap();
    for _ in 0..50 {
        let x = random_point(f, c.n, rng);
        assert_eq!(learned.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
    }
}

#[test]
fn learns_a_single_power() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(98);
    let c = random_circuit(&f, 5, 2, 3, 1, &mut rng);
    let model = learn(c.oracle(), 6, 2, 1, &LearnerConfig { seed: 3, ..Default::default() }).unwrap();
    check_recovery(&c, &model, &mut rng);
}

#[test]
fn learns_a_random_two_term_instance() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let c = random_circuit(&f, 8, 2, 4, 2, &mut rng);
    let model = learn(c.oracle(), 8, 2, 2, &LearnerConfig { seed: 4, ..Default::default() }).unwrap();
    check_recovery(&c, &model, &mut rng);
    assert_eq!(model.report.params, Params { n0: 4, m0: 2, k: 1 });
}

#[test]
fn opaque_and_native_oracles_give_identical_runs() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(100);
    let c = random_circuit(&f, 4, 2, 3, 1, &mut rng);
    let cfg = LearnerConfig { seed: 5, ..Default::default() };
    let native = learn(c.oracle(), 6, 2, 1, &cfg).unwrap();
    let opaque = learn(Arc::new(Opaque::new(c.oracle())), 6, 2, 1, &cfg).unwrap();
    assert_eq!(native.qs, opaque.qs);
    assert_eq!(native.us, opaque.us);
}

#[test]
fn duplicate_terms_are_reported_as_degenerate() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let q = SparsePoly::random_homogeneous(&f, 8, 2, &mut rng);
    let c = PowerSumCircuit::new(&f, 8, 2, 4, vec![(f.one(), q.clone()), (f.from_i64(2), q)]).unwrap();
    let cfg = LearnerConfig { seed: 6, retries: 2, ..Default::default() };
    match learn(c.oracle(), 8, 2, 2, &cfg) {
        Err(Error::Degenerate(r)) => {
            assert_eq!(r.condition, 1);
            assert!(r.measured < r.expected);
        }
        other => panic!("expected a degeneracy report, got {:?}", other.map(|m| m.report)),
    }
}

#[test]
fn explicit_parameters_are_validated() {
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(102);
    let c = random_circuit(&f, 5, 2, 3, 1, &mut rng);
    let bad = LearnerConfig { mode: ParamMode::Explicit(Params { n0: 1, m0: 1, k: 1 }), ..Default::default() };
    assert!(matches!(learn(c.oracle(), 6, 2, 1, &bad), Err(Error::InvalidInput(_))));
    let bad_k = LearnerConfig { mode: ParamMode::Explicit(Params { n0: 3, m0: 1, k: 3 }), ..Default::default() };
    assert!(matches!(learn(c.oracle(), 6, 2, 1, &bad_k), Err(Error::InvalidInput(_))));
    let small = PrimeField::<1>::new(&BigUint::from(11u64)).unwrap();
    let q = SparsePoly::var(&small, 2, 0);
    let c = PowerSumCircuit::new(&small, 2, 1, 6, vec![(small.one(), q)]).unwrap();
    assert!(matches!(learn(c.oracle(), 6, 1, 1, &LearnerConfig::default()), Err(Error::InvalidField(_))));
}

#[test]
fn combination_of_reference_components_recovers_v() {
    // Recombining the components spans the whole V basis.
    let f = fp();
    let mut rng = ChaCha20Rng::seed_from_u64(103);
    let c = random_circuit(&f, 8, 2, 4, 2, &mut rng);
    let params = select_parameters(8, 8, 2, 2).unwrap().chosen;
    let (l, p) = draw_maps(&f, 8, &params, &mut rng);
    let st = run_pipeline(&c.oracle(), 2, 4, 2, &params, &l, &p, true, &mut rng).unwrap();
    let x = st.components.split.eigenvectors.transpose();
    let union = crate::blackbox::span_basis(
        Arc::new(Combination::new(st.v_basis.elements.clone(), x).unwrap()),
        &mut rng,
    )
    .unwrap();
    assert!(express_in_basis(&st.v_basis.elements, &union, &mut rng).unwrap().is_some());
    let _ = Monomial::one(1);
}
