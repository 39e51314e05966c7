use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use qfa_lab::analysis::{basis_distribution, decompose_nonhalting, invariant_core, split_state, tv_distance, verify_invariance};
use qfa_lab::constructions::{complement_qfa, probabilistic_union, separating_line, union_weights, Point};
use qfa_lab::linalg::{self, CMatrix};
use qfa_lab::qfa::{QfaDefinition, QfaParts, StateVector};
use qfa_lab::random::{nearby_unit_state, random_qfa, random_unit_vector, random_unitary};
use qfa_lab::word::{corpus_size, generate_corpus, length_lex_cmp, Alphabet};

fn qfa_from_seed(seed: u64, states: usize, letters: usize) -> QfaDefinition {
    random_qfa(states, letters, &mut StdRng::seed_from_u64(seed))
}

/// Six states: `u0, u1` are mixed among themselves by every letter, `v0, v1`
/// mix with the halting states `acc, rej`.
fn with_unitary_block(seed: u64) -> QfaDefinition {
    let mut rng = StdRng::seed_from_u64(seed);
    let letter = |rng: &mut StdRng| {
        let mut full = CMatrix::zeros(6, 6);
        full.view_mut((0, 0), (2, 2)).copy_from(&random_unitary(2, rng));
        full.view_mut((2, 2), (4, 4)).copy_from(&random_unitary(4, rng));
        full
    };
    QfaDefinition::from_parts(QfaParts {
        states: ["u0", "u1", "v0", "v1", "acc", "rej"].map(String::from).to_vec(),
        alphabet: Alphabet::new(["a", "b"]).unwrap(),
        start: "u0".into(),
        accept: vec!["acc".into()],
        reject: vec!["rej".into()],
        left_end: random_unitary(6, &mut rng),
        right_end: random_unitary(6, &mut rng),
        letters: vec![letter(&mut rng), letter(&mut rng)],
    })
    .unwrap()
}

fn word_strategy(letters: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..letters, 0..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probability_is_conserved(seed in any::<u64>(), states in 3usize..=8, word in word_strategy(2)) {
        let q = qfa_from_seed(seed, states, 2);
        let t = q.run_word(&word).unwrap();
        let (mut acc, mut rej) = (0.0, 0.0);
        for e in &t.events {
            acc += e.accepted;
            rej += e.rejected;
            prop_assert!((acc + rej + e.remaining - 1.0).abs() < 1e-9);
        }
        prop_assert!((t.accepted + t.rejected + t.undecided() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn projected_operators_compose(seed in any::<u64>(), u in word_strategy(2), v in word_strategy(2)) {
        let q = qfa_from_seed(seed, 6, 2);
        let psi = q.project_nonhalting(&StateVector::from_vector(random_unit_vector(6, &mut StdRng::seed_from_u64(seed ^ 1))));
        let uv: Vec<usize> = u.iter().chain(&v).copied().collect();
        let whole = q.apply_projected_letters(&psi, &uv).unwrap();
        let parts = q.apply_projected_letters(&q.apply_projected_letters(&psi, &u).unwrap(), &v).unwrap();
        prop_assert!(whole.distance(&parts) < 1e-10);
    }

    #[test]
    fn complement_swaps_answers(seed in any::<u64>(), word in word_strategy(3)) {
        let q = qfa_from_seed(seed, 5, 3);
        let c = complement_qfa(&q);
        let (a, b) = (q.run_word(&word).unwrap(), c.run_word(&word).unwrap());
        prop_assert!((a.accepted - b.rejected).abs() < 1e-12);
        prop_assert!((a.rejected - b.accepted).abs() < 1e-12);
    }

    #[test]
    fn union_is_the_weighted_mixture(seed in any::<u64>(), p1 in 0.76f64..=1.0, p2 in 0.76f64..=1.0, word in word_strategy(2)) {
        let a = qfa_from_seed(seed, 5, 2);
        let b = qfa_from_seed(seed.wrapping_add(1), 4, 2);
        let w = union_weights(p1, p2).unwrap();
        let u = probabilistic_union(&a, p1, &b, p2).unwrap();
        prop_assert!(linalg::unitarity_defect(u.operator(qfa_lab::qfa::Symbol::LeftEnd).unwrap().matrix()) < 1e-10);
        let expected = w.alpha1 * a.run_word(&word).unwrap().accepted
            + w.alpha2 * b.run_word(&word).unwrap().accepted
            + w.alpha3;
        prop_assert!((u.run_word(&word).unwrap().accepted - expected).abs() < 1e-9);
    }

    #[test]
    fn weights_are_a_distribution(p1 in 0.5001f64..=1.0, p2 in 0.5001f64..=1.0) {
        let w = union_weights(p1, p2).unwrap();
        prop_assert!((w.alpha1 + w.alpha2 + w.alpha3 - 1.0).abs() < 1e-12);
        prop_assert!(w.alpha1 >= 0.0 && w.alpha2 >= 0.0 && w.alpha3 >= 0.0);
        let margin = 3.0 - 1.0 / p1 - 1.0 / p2;
        if margin.abs() > 1e-9 {
            prop_assert_eq!(w.guaranteed_p > 0.5, w.hypothesis_holds);
        }
    }

    #[test]
    fn split_is_orthogonal(seed in any::<u64>()) {
        let q = with_unitary_block(seed);
        let d = decompose_nonhalting(&q);
        prop_assert!(d.e1.dim() >= 2);
        let mut rng = StdRng::seed_from_u64(seed);
        let psi = q.project_nonhalting(&StateVector::from_vector(random_unit_vector(6, &mut rng)));
        let (first, second) = split_state(&d, &psi).unwrap();
        prop_assert!(first.inner(&second).norm() < 1e-10);
        prop_assert!((&first + &second).distance(&psi) < 1e-12);
        prop_assert!(d.e1.project(&first).distance(&first) < 1e-10);
        prop_assert!(d.e1.project(&second).norm() < 1e-10);
    }

    #[test]
    fn e1_is_invariant_and_a_fixed_point(seed in any::<u64>()) {
        let q = with_unitary_block(seed);
        let d = decompose_nonhalting(&q);
        prop_assert!(d.e1.orthonormality_defect() < 1e-10);
        prop_assert!(d.e2.orthonormality_defect() < 1e-10);
        prop_assert_eq!(d.e1.dim() + d.e2.dim(), 4);
        prop_assert!(verify_invariance(&q, &d, 5).passed());
        let (again, _, steps) = invariant_core(&q, &d.e1);
        prop_assert_eq!(again.dim(), d.e1.dim());
        prop_assert_eq!(steps, 1);
        prop_assert!((again.projector() - d.e1.projector()).iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn decomposition_of_generic_automata_is_consistent(seed in any::<u64>(), states in 3usize..=7) {
        let q = qfa_from_seed(seed, states, 2);
        let d = decompose_nonhalting(&q);
        prop_assert_eq!(d.e1.dim() + d.e2.dim(), q.nonhalting_indices().len());
        prop_assert!(d.e1.halting_leakage() < 1e-12 && d.e2.halting_leakage() < 1e-10);
        prop_assert!(d.iterations_used <= q.nonhalting_indices().len().max(1));
        prop_assert!(verify_invariance(&q, &d, 4).passed());
    }

    #[test]
    fn total_variation_is_below_twice_the_distance(seed in any::<u64>(), dim in 1usize..=10, eps in 1e-4f64..0.5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let psi = StateVector::from_vector(random_unit_vector(dim, &mut rng));
        let phi = nearby_unit_state(&psi, eps, &mut rng);
        let delta = tv_distance(&basis_distribution(&psi), &basis_distribution(&phi)).unwrap();
        prop_assert!(delta <= 2.0 * psi.distance(&phi) + 1e-15);
        prop_assert!(delta < 2.0 * eps);
    }

    #[test]
    fn separating_line_has_the_hull_distance_margin(
        below in proptest::collection::vec((0.0f64..0.45, 0.0f64..0.45), 1..8),
        above in proptest::collection::vec((0.55f64..1.0, 0.55f64..1.0), 1..8),
    ) {
        let b: Vec<Point> = below.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let a: Vec<Point> = above.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let line = separating_line(&b, &a).unwrap().expect("boxes are apart");
        for &p in &b {
            prop_assert!(line.eval(p) <= -line.margin + 1e-12);
        }
        for &p in &a {
            prop_assert!(line.eval(p) >= line.margin - 1e-12);
        }
        prop_assert!((2.0 * line.margin - hull_distance(&b, &a)).abs() < 1e-9);
    }
}

fn point_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) };
    ((p.x - a.x - t * dx).powi(2) + (p.y - a.y - t * dy).powi(2)).sqrt()
}

/// Distance between disjoint convex hulls: the minimum over points of one
/// set and segments between points of the other.
fn hull_distance(s: &[Point], t: &[Point]) -> f64 {
    let one_way = |s: &[Point], t: &[Point]| {
        s.iter()
            .flat_map(|&p| t.iter().flat_map(move |&a| t.iter().map(move |&b| point_segment(p, a, b))))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(s, t).min(one_way(t, s))
}

#[test]
fn corpus_order_is_strict_length_lex() {
    for size in 1..=3 {
        for max_len in 0..=6 {
            let words: Vec<_> = generate_corpus(size, max_len).collect();
            assert_eq!(words.len(), corpus_size(size, max_len));
            assert!(words.windows(2).all(|w| length_lex_cmp(&w[0], &w[1]).is_lt()));
        }
    }
    assert_eq!(corpus_size(2, 12), 8191);
    let small: Vec<_> = generate_corpus(2, 2).collect();
    assert_eq!(small, vec![vec![], vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    assert_eq!(generate_corpus(1, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
}
