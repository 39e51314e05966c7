//! Concrete automata and closure constructions.
//!
//! [`build_k2`] and [`build_k3`] recognize `L2` and `L3` with probability
//! 2/3. [`complement_qfa`] swaps the halting sets. [`probabilistic_union`]
//! runs two automata side by side plus an always-accepting branch, weighted
//! so that the union of the two languages is recognized with probability
//! `2 p1 p2 / (p1 + p2 + p1 p2)` whenever `1/p1 + 1/p2 < 3`.

mod geometry;

pub use geometry::{
    convex_hull, probability_points, separating_line, union_regions, Point, ProbabilityPoint, RejectionProfile,
    SeparatingLine,
};

use crate::linalg::{self, CMatrix, CVector};
use crate::qfa::{validate_qfa, QfaDefinition, QfaParts, Symbol};
use crate::word::Alphabet;
use crate::{Error, Result};

fn k23_parts(start: &str) -> QfaParts {
    let s13 = (1.0f64 / 3.0).sqrt();
    let s23 = (2.0f64 / 3.0).sqrt();
    let s12 = 0.5f64.sqrt();
    let left_end = linalg::from_real_rows(&[
        &[s23, s13, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[s13, -s23, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, -s23, s13, 0.0, 0.0, 0.0, 0.0],
        // sends q4 to √(2/3)|q4⟩ + √(1/3)|q3⟩
        &[0.0, 0.0, s13, s23, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ]);
    let a = linalg::from_real_rows(&[
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ]);
    let b = linalg::from_real_rows(&[
        &[0.0, 0.0, 0.0, 0.0, s12, s12, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        &[s12, 0.0, 0.0, 0.0, 0.5, -0.5, 0.0, 0.0],
        &[s12, 0.0, 0.0, 0.0, -0.5, 0.5, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ]);
    let right_end = linalg::from_real_rows(&[
        &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ]);
    QfaParts {
        states: (1..=8).map(|i| format!("q{i}")).collect(),
        alphabet: Alphabet::new(["a", "b"]).expect("two distinct letters"),
        start: start.to_string(),
        accept: vec!["q5".into(), "q8".into()],
        reject: vec!["q6".into(), "q7".into()],
        left_end,
        right_end,
        letters: vec![a, b],
    }
}

/// Eight-state QFA recognizing `L2` with probability 2/3; starts in `q1`.
pub fn build_k2() -> QfaDefinition {
    QfaDefinition::from_parts(k23_parts("q1")).expect("fixture is well formed")
}

/// [`build_k2`] started in `q4`; recognizes `L3 = a L2` with probability 2/3.
pub fn build_k3() -> QfaDefinition {
    QfaDefinition::from_parts(k23_parts("q4")).expect("fixture is well formed")
}

/// Reversible automaton for "even number of `a`" over `{a, b}`: two
/// non-halting parity states, permuted by `a` and sent to the accepting or
/// rejecting state by `$`. Recognizes its language with probability 1.
pub fn build_even_a() -> QfaDefinition {
    let swap = linalg::from_real_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ]);
    // even -> acc, odd -> rej, and back
    let end = linalg::from_real_rows(&[
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
    ]);
    QfaDefinition::from_parts(QfaParts {
        states: ["even", "odd", "acc", "rej"].map(String::from).to_vec(),
        alphabet: Alphabet::new(["a", "b"]).expect("two distinct letters"),
        start: "even".into(),
        accept: vec!["acc".into()],
        reject: vec!["rej".into()],
        left_end: CMatrix::identity(4, 4),
        right_end: end,
        letters: vec![swap, CMatrix::identity(4, 4)],
    })
    .expect("fixture is well formed")
}

/// Same automaton with accepting and rejecting states exchanged; acceptance
/// and rejection probabilities swap on every word.
pub fn complement_qfa(qfa: &QfaDefinition) -> QfaDefinition {
    qfa.with_swapped_halting()
}

/// Mixture weights for the probabilistic union of two automata recognizing
/// their languages with probabilities `p1` and `p2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionWeights {
    /// Weight of the first automaton, `p2 / D`.
    pub alpha1: f64,
    /// Weight of the second automaton, `p1 / D`.
    pub alpha2: f64,
    /// Weight of the always-accepting branch, `p1 p2 / D`.
    pub alpha3: f64,
    /// `2 p1 p2 / D`, with `D = p1 + p2 + p1 p2`.
    pub guaranteed_p: f64,
    /// Whether `1/p1 + 1/p2 < 3`, equivalently `guaranteed_p > 1/2`.
    pub hypothesis_holds: bool,
}

pub fn union_weights(p1: f64, p2: f64) -> Result<UnionWeights> {
    for p in [p1, p2] {
        if !(p > 0.5 && p <= 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
    }
    // dividing through by p1 p2 keeps the limit case p1 = p2 = 2/3 at exactly 1/2
    let (r1, r2) = (1.0 / p1, 1.0 / p2);
    let denom = r1 + r2 + 1.0;
    Ok(UnionWeights {
        alpha1: r1 / denom,
        alpha2: r2 / denom,
        alpha3: 1.0 / denom,
        guaranteed_p: 2.0 / denom,
        hypothesis_holds: r1 + r2 < 3.0,
    })
}

/// Direct-sum automaton realizing the weighted mixture of `first`, `second`
/// and an always-accepting branch.
///
/// States are `1.<q>` for the first automaton, `2.<q>` for the second, and
/// a dedicated accepting state `accept`. The left endmarker sends the start
/// state `1.<q0>` to `√α1·V¹_κ|q0⟩ ⊕ √α2·V²_κ|q0'⟩ ⊕ √α3·|accept⟩`; every
/// other operator acts blockwise. Hence, for every word,
/// `p_acc = α1·p¹_acc + α2·p²_acc + α3`.
pub fn probabilistic_union(
    first: &QfaDefinition,
    p1: f64,
    second: &QfaDefinition,
    p2: f64,
) -> Result<QfaDefinition> {
    let weights = union_weights(p1, p2)?;
    if !weights.hypothesis_holds {
        return Err(Error::UnionHypothesis(1.0 / p1 + 1.0 / p2));
    }
    for qfa in [first, second] {
        let report = validate_qfa(qfa);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
    }
    let map = first.alphabet().mapping_to(second.alphabet())?;
    let (n1, n2) = (first.dim(), second.dim());
    let n = n1 + n2 + 1;
    let one = CMatrix::identity(1, 1);
    let op = |q: &QfaDefinition, s: Symbol| q.operator(s).expect("symbol exists").matrix().clone();

    let blockwise = |s1: Symbol, s2: Symbol| linalg::block_diagonal(&[&op(first, s1), &op(second, s2), &one]);
    let letters = (0..first.alphabet().len())
        .map(|l| blockwise(Symbol::Letter(l), Symbol::Letter(map[l])))
        .collect();
    let right_end = blockwise(Symbol::RightEnd, Symbol::RightEnd);

    // W = diag(V¹_κ, V²_κ, 1); V_κ = W·R with R|start⟩ = √α1|q0⟩ ⊕ √α2|q0'⟩ ⊕ √α3|accept⟩
    let w = blockwise(Symbol::LeftEnd, Symbol::LeftEnd);
    let mut routed = CVector::zeros(n);
    routed[first.start()] = linalg::real(weights.alpha1.sqrt());
    routed[n1 + second.start()] = linalg::real(weights.alpha2.sqrt());
    routed[n - 1] = linalg::real(weights.alpha3.sqrt());
    let r = linalg::complete_to_unitary(&routed, first.start());
    let left_end = w * r;

    let p1s = first.to_parts();
    let p2s = second.to_parts();
    let prefixed = |p: &str, names: &[String]| names.iter().map(|s| format!("{p}.{s}")).collect::<Vec<_>>();
    let mut states = prefixed("1", &p1s.states);
    states.extend(prefixed("2", &p2s.states));
    states.push("accept".into());
    let mut accept = prefixed("1", &p1s.accept);
    accept.extend(prefixed("2", &p2s.accept));
    accept.push("accept".into());
    let mut reject = prefixed("1", &p1s.reject);
    reject.extend(prefixed("2", &p2s.reject));

    QfaDefinition::from_parts(QfaParts {
        states,
        alphabet: first.alphabet().clone(),
        start: format!("1.{}", p1s.start),
        accept,
        reject,
        left_end,
        right_end,
        letters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfa::StateVector;

    const TOL: f64 = 1e-12;

    #[test]
    fn k2_k3_validate() {
        for q in [build_k2(), build_k3(), build_even_a()] {
            let r = validate_qfa(&q);
            assert!(r.is_valid(), "{r}");
            assert!(r.warnings.is_empty(), "{r}");
        }
    }

    #[test]
    fn k3_accepts_a() {
        let t = build_k3().run_str("a").unwrap();
        assert!((t.accepted - 2.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn left_endmarker_routes_q4_to_psi4() {
        let k3 = build_k3();
        let step = k3.step_letter(&k3.initial_state(), Symbol::LeftEnd).unwrap();
        let psi4 = StateVector::from_real(&[0.0, 0.0, (1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt(), 0.0, 0.0, 0.0, 0.0]);
        assert!(step.next.distance(&psi4) < TOL);
    }

    #[test]
    fn complement_mirrors_k2() {
        let c = complement_qfa(&build_k2());
        let t = c.run_str("").unwrap();
        assert!((t.rejected - 2.0 / 3.0).abs() < TOL);
        assert_eq!(complement_qfa(&c), build_k2());
    }

    #[test]
    fn complement_keeps_ties() {
        // √½ on both halting states after $
        let s = 0.5f64.sqrt();
        let tie = QfaDefinition::from_parts(QfaParts {
            states: ["p", "acc", "rej"].map(String::from).to_vec(),
            alphabet: Alphabet::new(["a"]).unwrap(),
            start: "p".into(),
            accept: vec!["acc".into()],
            reject: vec!["rej".into()],
            left_end: CMatrix::identity(3, 3),
            right_end: linalg::from_real_rows(&[&[0.0, s, s], &[s, 0.5, -0.5], &[s, -0.5, 0.5]]),
            letters: vec![CMatrix::identity(3, 3)],
        })
        .unwrap();
        assert!(validate_qfa(&tie).is_valid());
        let d = |q: &QfaDefinition| q.run_str("a").unwrap().decision(1e-9);
        assert_eq!(d(&tie), crate::qfa::Decision::Tie);
        assert_eq!(d(&complement_qfa(&tie)), crate::qfa::Decision::Tie);
    }

    #[test]
    fn weights_examples() {
        let w = union_weights(1.0, 1.0).unwrap();
        for a in [w.alpha1, w.alpha2, w.alpha3] {
            assert!((a - 1.0 / 3.0).abs() < TOL);
        }
        assert!((w.guaranteed_p - 2.0 / 3.0).abs() < TOL);

        let w = union_weights(1.0, 2.0 / 3.0).unwrap();
        assert!((w.guaranteed_p - 4.0 / 7.0).abs() < TOL);
        assert!(w.hypothesis_holds);
        assert!((w.alpha1 - 2.0 / 7.0).abs() < TOL);
        assert!((w.alpha2 - 3.0 / 7.0).abs() < TOL);
        assert!((w.alpha3 - 2.0 / 7.0).abs() < TOL);

        let w = union_weights(2.0 / 3.0, 2.0 / 3.0).unwrap();
        assert_eq!(w.guaranteed_p, 0.5);
        assert!(!w.hypothesis_holds);
    }

    #[test]
    fn weights_reject_bad_probabilities() {
        assert!(union_weights(0.5, 0.9).is_err());
        assert!(union_weights(0.9, 1.1).is_err());
        assert!(union_weights(f64::NAN, 0.9).is_err());
    }

    #[test]
    fn union_rejects_limit_case() {
        let k2 = build_k2();
        assert!(matches!(
            probabilistic_union(&k2, 2.0 / 3.0, &build_k3(), 2.0 / 3.0),
            Err(Error::UnionHypothesis(_))
        ));
    }

    #[test]
    fn union_is_valid_and_mixes() {
        let u = probabilistic_union(&build_even_a(), 1.0, &build_k2(), 2.0 / 3.0).unwrap();
        let r = validate_qfa(&u);
        assert!(r.is_valid(), "{r}");
        assert_eq!(u.dim(), 4 + 8 + 1);
        let w = union_weights(1.0, 2.0 / 3.0).unwrap();
        let t = u.run_str("").unwrap();
        // ε is in both languages, accepted by the parts with 1 and 2/3
        assert!((t.accepted - 6.0 / 7.0).abs() < 1e-12);
        let t = u.run_str("aab").unwrap();
        let e = build_even_a().run_str("aab").unwrap().accepted;
        let k = build_k2().run_str("aab").unwrap().accepted;
        assert!((t.accepted - (w.alpha1 * e + w.alpha2 * k + w.alpha3)).abs() < 1e-12);
    }
}
