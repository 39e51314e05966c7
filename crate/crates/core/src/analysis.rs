//! Structure of the non-halting space.
//!
//! `E1` is the largest subspace of `E_non` that every letter keeps inside
//! `E_non`; on it the projected operators `V′_σ` act unitarily. Its
//! orthogonal complement `E2` (within `E_non`) is also invariant under every
//! `V′_σ`, and every vector of `E2` can be driven to arbitrarily small norm
//! by a suitable word. This module computes the decomposition by the
//! fixed-point recurrence `E^{j+1} = E^j ∩ ⋂_σ V_σ⁻¹(E^j)`, checks the
//! invariance claims exhaustively on short words, and searches for
//! norm-vanishing words.
//!
//! It also hosts the total-variation bound: states at distance `< ε` induce
//! measurement distributions at total variation `Σ|p_i − r_i| < 2ε`.

use rand::Rng;

use crate::linalg::{self, CMatrix, CVector};
use crate::qfa::{QfaDefinition, StateKind, StateVector, Symbol};
use crate::random::{nearby_unit_state, random_unit_vector};
use crate::word::Word;
use crate::{Error, Result, DEFAULT_TOLERANCE};

/// Singular values below this count as zero when intersecting subspaces.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Fine-grained (per basis state) and coarse (accept/reject/continue)
/// measurement statistics of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub per_state: Vec<f64>,
    pub accept: f64,
    pub reject: f64,
    pub non_halting: f64,
}

pub fn basis_distribution(psi: &StateVector) -> Vec<f64> {
    psi.amplitudes().iter().map(|z| z.norm_sqr()).collect()
}

pub fn measurement_distribution(qfa: &QfaDefinition, psi: &StateVector) -> Result<Distribution> {
    if psi.len() != qfa.dim() {
        return Err(Error::DimensionMismatch { expected: qfa.dim(), actual: psi.len() });
    }
    let per_state = basis_distribution(psi);
    let mut d = Distribution { per_state, accept: 0.0, reject: 0.0, non_halting: 0.0 };
    for (i, p) in d.per_state.iter().enumerate() {
        match qfa.kind(i) {
            StateKind::Accepting => d.accept += p,
            StateKind::Rejecting => d.reject += p,
            StateKind::NonHalting => d.non_halting += p,
        }
    }
    Ok(d)
}

/// `Σ_i |p_i − r_i|` (not halved; ranges over `[0, 2]` for distributions).
pub fn tv_distance(p: &[f64], r: &[f64]) -> Result<f64> {
    if p.len() != r.len() {
        return Err(Error::SizeMismatch(p.len(), r.len()));
    }
    Ok(p.iter().zip(r).map(|(a, b)| (a - b).abs()).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvCheck {
    pub trials: usize,
    pub eps: f64,
    /// Largest observed `Δ / ε`; the bound says this stays below 2.
    pub max_ratio: f64,
    pub violations: usize,
}

/// Samples `trials` pairs of unit states `ψ, φ` (dimension 2..=8) with
/// `‖ψ − φ‖ < eps` and compares the total variation of their per-state
/// measurement distributions against `2·eps`.
pub fn tv_lemma_check<R: Rng + ?Sized>(trials: usize, eps: f64, rng: &mut R) -> Result<TvCheck> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let mut check = TvCheck { trials, eps, max_ratio: 0.0, violations: 0 };
    for _ in 0..trials {
        let dim = rng.random_range(2..=8);
        let psi = StateVector::from_vector(random_unit_vector(dim, rng));
        let phi = nearby_unit_state(&psi, eps, rng);
        let delta = tv_distance(&basis_distribution(&psi), &basis_distribution(&phi))?;
        check.max_ratio = check.max_ratio.max(delta / eps);
        if delta >= 2.0 * eps {
            check.violations += 1;
        }
    }
    Ok(check)
}

/// Orthonormal basis of a subspace of `E_non`, stored as the columns of a
/// `|Q| × k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: CMatrix,
    nonhalting: Vec<bool>,
}

impl SubspaceBasis {
    pub fn new(basis: CMatrix, nonhalting: Vec<bool>) -> Result<Self> {
        if basis.nrows() != nonhalting.len() {
            return Err(Error::DimensionMismatch { expected: nonhalting.len(), actual: basis.nrows() });
        }
        Ok(SubspaceBasis { basis, nonhalting })
    }

    /// The whole non-halting space, spanned by its coordinate vectors.
    pub fn nonhalting_space(qfa: &QfaDefinition) -> Self {
        let idx = qfa.nonhalting_indices();
        let mut basis = CMatrix::zeros(qfa.dim(), idx.len());
        for (j, &i) in idx.iter().enumerate() {
            basis[(i, j)] = linalg::ONE;
        }
        SubspaceBasis { basis, nonhalting: qfa.nonhalting_mask() }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<StateVector> {
        self.basis.column_iter().map(|c| StateVector::from_vector(c.into_owned())).collect()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn project(&self, psi: &StateVector) -> StateVector {
        StateVector::from_vector(&self.basis * (self.basis.adjoint() * psi.amplitudes()))
    }

    /// `‖B†B − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.basis.adjoint() * &self.basis;
        (g - CMatrix::identity(self.dim(), self.dim())).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest amplitude magnitude on halting coordinates.
    pub fn halting_leakage(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, &non) in self.nonhalting.iter().enumerate() {
            if !non {
                for z in self.basis.row(i).iter() {
                    worst = worst.max(z.norm());
                }
            }
        }
        worst
    }

    /// Replaces one basis vector (used to build deliberately broken bases).
    pub fn with_vector(&self, index: usize, v: &StateVector) -> SubspaceBasis {
        let mut b = self.basis.clone();
        b.set_column(index, v.amplitudes());
        SubspaceBasis { basis: b, nonhalting: self.nonhalting.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub e1: SubspaceBasis,
    pub e2: SubspaceBasis,
    /// Number of refinement steps performed.
    pub iterations_used: usize,
    /// `dim E^0, dim E^1, …` up to the fixed point.
    pub dimensions: Vec<usize>,
}

/// Projected letter operators `V′_σ = Π_non V_σ`.
fn projected_letters(qfa: &QfaDefinition) -> Vec<CMatrix> {
    let mask = qfa.nonhalting_mask();
    (0..qfa.alphabet().len())
        .map(|l| {
            let mut m = qfa.operator(Symbol::Letter(l)).expect("letter exists").matrix().clone();
            for (i, &non) in mask.iter().enumerate() {
                if !non {
                    m.row_mut(i).fill(linalg::ZERO);
                }
            }
            m
        })
        .collect()
}

/// Largest subspace of `start` mapped into itself by every letter unitary,
/// computed by the refinement `E^{j+1} = {ψ ∈ E^j : V_σ ψ ∈ E^j ∀σ}`.
/// Returns the fixed point, the dimension log and the number of steps.
pub fn invariant_core(qfa: &QfaDefinition, start: &SubspaceBasis) -> (SubspaceBasis, Vec<usize>, usize) {
    let n = qfa.dim();
    let letters: Vec<&CMatrix> = (0..qfa.alphabet().len())
        .map(|l| qfa.operator(Symbol::Letter(l)).expect("letter exists").matrix())
        .collect();
    let mut current = start.basis.clone();
    let mut dims = vec![current.ncols()];
    let mut steps = 0;
    let limit = start.dim();
    while steps < limit.max(1) && current.ncols() > 0 {
        let k = current.ncols();
        let complement = CMatrix::identity(n, n) - &current * current.adjoint();
        let mut stacked = CMatrix::zeros(letters.len() * n, k);
        for (s, v) in letters.iter().enumerate() {
            stacked.view_mut((s * n, 0), (n, k)).copy_from(&(&complement * (*v * &current)));
        }
        let coeffs = linalg::null_space(&stacked, RANK_THRESHOLD);
        let next = if coeffs.ncols() == 0 { CMatrix::zeros(n, 0) } else { &current * coeffs };
        steps += 1;
        dims.push(next.ncols());
        let stable = next.ncols() == k;
        current = next;
        if stable {
            break;
        }
    }
    // clear rounding noise on halting coordinates
    for (i, &non) in start.nonhalting.iter().enumerate() {
        if !non {
            current.row_mut(i).fill(linalg::ZERO);
        }
    }
    (SubspaceBasis { basis: current, nonhalting: start.nonhalting.clone() }, dims, steps)
}

pub fn decompose_nonhalting(qfa: &QfaDefinition) -> DecompositionReport {
    let space = SubspaceBasis::nonhalting_space(qfa);
    let (e1, dimensions, iterations_used) = invariant_core(qfa, &space);

    // E2 = E_non ⊖ E1, in coordinates of E_non
    let e2 = if e1.dim() == 0 {
        space.clone()
    } else {
        let coeffs = linalg::null_space(&(e1.basis.adjoint() * &space.basis), RANK_THRESHOLD);
        SubspaceBasis {
            basis: if coeffs.ncols() == 0 {
                CMatrix::zeros(qfa.dim(), 0)
            } else {
                &space.basis * coeffs
            },
            nonhalting: space.nonhalting.clone(),
        }
    };
    DecompositionReport { e1, e2, iterations_used, dimensions }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub words_checked: usize,
    /// `max |‖V′_w e‖ − 1|` over E1 basis vectors `e`.
    pub max_norm_defect: f64,
    pub worst_norm_word: Option<Word>,
    /// `max ‖P_E1 V′_w e‖` over E2 basis vectors `e`.
    pub max_leakage: f64,
    pub worst_leak_word: Option<Word>,
    pub tolerance: f64,
}

impl InvarianceReport {
    pub fn norm_preserved(&self) -> bool {
        self.max_norm_defect <= self.tolerance
    }

    pub fn e2_invariant(&self) -> bool {
        self.max_leakage <= self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.norm_preserved() && self.e2_invariant()
    }
}

/// Exhaustively checks, for every nonempty word `|w| <= max_len`, that
/// `V′_w` preserves the norm of each E1 basis vector and keeps each E2
/// basis vector orthogonal to E1.
pub fn verify_invariance(qfa: &QfaDefinition, report: &DecompositionReport, max_len: usize) -> InvarianceReport {
    let letters = projected_letters(qfa);
    let e1_adj = report.e1.basis.adjoint();
    let mut out = InvarianceReport {
        words_checked: 0,
        max_norm_defect: 0.0,
        worst_norm_word: None,
        max_leakage: 0.0,
        worst_leak_word: None,
        tolerance: DEFAULT_TOLERANCE,
    };
    let mut word = Vec::new();
    fn walk(
        letters: &[CMatrix],
        e1_adj: &CMatrix,
        m1: &CMatrix,
        m2: &CMatrix,
        word: &mut Word,
        max_len: usize,
        out: &mut InvarianceReport,
    ) {
        if !word.is_empty() {
            out.words_checked += 1;
            for c in m1.column_iter() {
                let d = (linalg::norm_sqr(&c.into_owned()).sqrt() - 1.0).abs();
                if d > out.max_norm_defect {
                    out.max_norm_defect = d;
                    out.worst_norm_word = Some(word.clone());
                }
            }
            if e1_adj.nrows() > 0 {
                let leak = e1_adj * m2;
                for c in leak.column_iter() {
                    let l = linalg::norm_sqr(&c.into_owned()).sqrt();
                    if l > out.max_leakage {
                        out.max_leakage = l;
                        out.worst_leak_word = Some(word.clone());
                    }
                }
            }
        }
        if word.len() == max_len {
            return;
        }
        for (l, v) in letters.iter().enumerate() {
            word.push(l);
            walk(letters, e1_adj, &(v * m1), &(v * m2), word, max_len, out);
            word.pop();
        }
    }
    walk(&letters, &e1_adj, &report.e1.basis, &report.e2.basis, &mut word, max_len, &mut out);
    out
}

fn check_nonhalting_support(report: &DecompositionReport, psi: &StateVector) -> Result<()> {
    let mask = &report.e1.nonhalting;
    if psi.len() != mask.len() {
        return Err(Error::DimensionMismatch { expected: mask.len(), actual: psi.len() });
    }
    let outside = psi.norm_sqr() - psi.mass_where(mask);
    if outside > DEFAULT_TOLERANCE {
        return Err(Error::SupportOutsideNonHalting(outside));
    }
    Ok(())
}

/// Splits `ψ = ψ_I + ψ_II` with `ψ_I ∈ E1` and `ψ_II ∈ E2`.
pub fn split_state(report: &DecompositionReport, psi: &StateVector) -> Result<(StateVector, StateVector)> {
    check_nonhalting_support(report, psi)?;
    let first = report.e1.project(psi);
    let second = psi - &first;
    Ok((first, second))
}

/// All words of exactly `len` letters with their images under `V′_w`, in
/// lexicographic order.
fn images_at_length(letters: &[CMatrix], start: &CVector, len: usize) -> Vec<(Word, CVector)> {
    let mut level = vec![(Vec::new(), start.clone())];
    for _ in 0..len {
        let mut next = Vec::with_capacity(level.len() * letters.len());
        for (w, v) in &level {
            for (l, m) in letters.iter().enumerate() {
                let mut w2 = w.clone();
                w2.push(l);
                next.push((w2, m * v));
            }
        }
        level = next;
    }
    level
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionEstimate {
    /// Largest observed `M_ψ = min_{|w| = n} ‖V′_w ψ‖`; a lower bound on the
    /// supremum over the unit ball of E2.
    pub s_est: f64,
    pub state: StateVector,
    pub word: Word,
    pub candidates: usize,
}

/// Estimates `S = sup_{ψ ∈ E2, ‖ψ‖ ≤ 1} min_{|w| = n} ‖V′_w ψ‖`, with
/// `n = |Q_non|`, over the E2 basis vectors plus `samples` random unit
/// vectors of E2. The result is a sampled lower bound, not the exact sup.
pub fn contraction_estimate<R: Rng + ?Sized>(
    qfa: &QfaDefinition,
    report: &DecompositionReport,
    samples: usize,
    rng: &mut R,
) -> Result<ContractionEstimate> {
    if report.e2.dim() == 0 {
        return Err(Error::EmptyE2);
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let letters = projected_letters(qfa);
    let n = qfa.nonhalting_indices().len();
    let mut candidates: Vec<CVector> = report.e2.basis.column_iter().map(|c| c.into_owned()).collect();
    for _ in 0..samples {
        let coeffs = random_unit_vector(report.e2.dim(), rng);
        candidates.push(&report.e2.basis * coeffs);
    }
    let mut best: Option<ContractionEstimate> = None;
    for psi in &candidates {
        let (word, m) = images_at_length(&letters, psi, n)
            .into_iter()
            .map(|(w, v)| (w, linalg::norm_sqr(&v).sqrt()))
            .fold((Vec::new(), f64::INFINITY), |acc, (w, v)| if v < acc.1 { (w, v) } else { acc });
        if best.as_ref().is_none_or(|b| m > b.s_est) {
            best = Some(ContractionEstimate {
                s_est: m,
                state: StateVector::from_vector(psi.clone()),
                word,
                candidates: 0,
            });
        }
    }
    let mut est = best.expect("at least one candidate");
    est.candidates = candidates.len();
    Ok(est)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VanishingWord {
    pub word: Word,
    /// `‖V′_w ψ‖` for the returned word.
    pub norm: f64,
    pub rounds: usize,
}

/// Finds `w` with `‖V′_w ψ‖ < delta` for `ψ ∈ E2`.
///
/// Each round first looks for the shortest (then lexicographically first)
/// word of length `<= n` that already reaches `delta`; failing that, it
/// appends the length-`n` block leaving the least norm. A round that keeps
/// more than `1 − 1e-6` of the norm is an error, and the number of rounds is
/// capped at `1 + ⌈log(delta/‖ψ‖) / log r⌉` for the weakest contraction
/// ratio `r` seen so far.
pub fn vanish_word_search(
    qfa: &QfaDefinition,
    report: &DecompositionReport,
    psi: &StateVector,
    delta: f64,
) -> Result<VanishingWord> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    check_nonhalting_support(report, psi)?;
    let initial = psi.norm();
    if initial > 1.0 + DEFAULT_TOLERANCE {
        return Err(Error::InvalidParameter(format!("state norm {initial} exceeds 1")));
    }
    let e1_part = report.e1.project(psi).norm();
    if e1_part > 10.0 * RANK_THRESHOLD {
        return Err(Error::NotInE2(e1_part));
    }
    if initial < delta {
        return Ok(VanishingWord { word: Vec::new(), norm: initial, rounds: 0 });
    }

    let letters = projected_letters(qfa);
    let n = qfa.nonhalting_indices().len().max(1);
    let mut word = Vec::new();
    let mut current = psi.amplitudes().clone();
    let mut current_norm = initial;
    let mut weakest: f64 = 0.0;
    let mut cap = usize::MAX;
    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > cap {
            return Err(Error::IterationCap(cap));
        }
        let mut level = vec![(Vec::<usize>::new(), current.clone())];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * letters.len());
            for (w, v) in &level {
                for (l, m) in letters.iter().enumerate() {
                    let mut w2 = w.clone();
                    w2.push(l);
                    let img = m * v;
                    let norm = linalg::norm_sqr(&img).sqrt();
                    if norm < delta {
                        word.extend(w2);
                        return Ok(VanishingWord { word, norm, rounds });
                    }
                    next.push((w2, img));
                }
            }
            level = next;
        }
        let (block, image, norm) = level
            .into_iter()
            .map(|(w, v)| {
                let norm = linalg::norm_sqr(&v).sqrt();
                (w, v, norm)
            })
            .fold(None::<(Word, CVector, f64)>, |acc, c| match acc {
                Some(a) if a.2 <= c.2 => Some(a),
                _ => Some(c),
            })
            .expect("alphabet is nonempty");
        let ratio = norm / current_norm;
        if ratio > 1.0 - 1e-6 {
            return Err(Error::NonContracting { ratio });
        }
        weakest = weakest.max(ratio);
        if weakest > 0.0 {
            let needed = ((delta / initial).ln() / weakest.ln()).ceil().max(0.0);
            cap = 1 + needed as usize;
        }
        word.extend(block);
        current = image;
        current_norm = norm;
    }
}
