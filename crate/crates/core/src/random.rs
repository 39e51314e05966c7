//! Random states, unitaries and automata for fuzzing and sampled estimates.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector};
use crate::qfa::{QfaDefinition, QfaParts, StateVector};
use crate::word::{Alphabet, Word};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform point on the unit sphere of `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian(rng));
        let n = linalg::norm_sqr(&v).sqrt();
        if n > 1e-12 {
            return v / linalg::real(n);
        }
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random QFA with `states` states (at least 3), one accepting, one
/// rejecting and the rest non-halting (a random extra halting state is
/// added when there are more than four states), and Haar-random operators.
pub fn random_qfa<R: Rng + ?Sized>(states: usize, letters: usize, rng: &mut R) -> QfaDefinition {
    assert!(states >= 3, "need room for accepting, rejecting and non-halting states");
    let names: Vec<String> = (0..states).map(|i| format!("s{i}")).collect();
    let mut accept = vec![names[states - 1].clone()];
    let mut reject = vec![names[states - 2].clone()];
    if states > 4 && rng.random_bool(0.5) {
        if rng.random_bool(0.5) {
            accept.push(names[states - 3].clone());
        } else {
            reject.push(names[states - 3].clone());
        }
    }
    let alphabet = Alphabet::new((0..letters).map(|i| char::from(b'a' + i as u8).to_string()))
        .expect("distinct letters");
    QfaDefinition::from_parts(QfaParts {
        states: names.clone(),
        alphabet,
        start: names[0].clone(),
        accept,
        reject,
        left_end: random_unitary(states, rng),
        right_end: random_unitary(states, rng),
        letters: (0..letters).map(|_| random_unitary(states, rng)).collect(),
    })
    .expect("well formed")
}

pub fn random_word<R: Rng + ?Sized>(letters: usize, max_len: usize, rng: &mut R) -> Word {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| rng.random_range(0..letters)).collect()
}

/// Random state `φ` with `‖φ‖ = 1` and `‖ψ − φ‖ < eps` for unit `ψ`.
pub fn nearby_unit_state<R: Rng + ?Sized>(psi: &StateVector, eps: f64, rng: &mut R) -> StateVector {
    loop {
        let dir = random_unit_vector(psi.len(), rng);
        let step = eps * rng.random::<f64>();
        let moved = psi.amplitudes() + dir * linalg::real(step);
        let n = linalg::norm_sqr(&moved).sqrt();
        let phi = StateVector::from_vector(moved / linalg::real(n));
        if phi.distance(psi) < eps {
            return phi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = StdRng::seed_from_u64(7);
        for dim in 1..=8 {
            assert!(linalg::unitarity_defect(&random_unitary(dim, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn random_qfa_validates() {
        let mut rng = StdRng::seed_from_u64(11);
        for n in 3..=8 {
            let q = random_qfa(n, 2, &mut rng);
            assert!(crate::qfa::validate_qfa(&q).is_valid());
            assert!(!q.nonhalting_indices().is_empty());
        }
    }

    #[test]
    fn nearby_state_is_close() {
        let mut rng = StdRng::seed_from_u64(3);
        let psi = StateVector::from_vector(random_unit_vector(5, &mut rng));
        for _ in 0..100 {
            let phi = nearby_unit_state(&psi, 0.01, &mut rng);
            assert!(phi.distance(&psi) < 0.01);
            assert!((phi.norm() - 1.0).abs() < 1e-12);
        }
    }
}
