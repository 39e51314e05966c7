//! Measure-many one-way quantum finite automata.
//!
//! Reading a symbol is two steps: the symbol's unitary is applied to the
//! current superposition, then the result is measured against the
//! accepting, rejecting and non-halting subspaces. Accepting and rejecting
//! mass is accumulated; the computation continues with the (unrenormalized)
//! non-halting component. A word `w` is processed as `κ w $`.
//!
//! Operators act on column vectors: applying `V` to the `j`-th basis state
//! yields column `j` of the matrix.

use std::fmt;

use num_complex::Complex64;

use crate::dfa::DfaDefinition;
use crate::linalg::{self, CMatrix, CVector};
use crate::word::{generate_corpus, length_lex_cmp, Alphabet, Word};
use crate::{Error, Result, DEFAULT_TOLERANCE};

/// A symbol of the working alphabet: an input letter or one of the endmarkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    LeftEnd,
    RightEnd,
    Letter(usize),
}

impl Symbol {
    pub fn display(&self, alphabet: &Alphabet) -> String {
        match self {
            Symbol::LeftEnd => "κ".to_string(),
            Symbol::RightEnd => "$".to_string(),
            Symbol::Letter(i) if *i < alphabet.len() => alphabet.name(*i).to_string(),
            Symbol::Letter(i) => format!("#{i}"),
        }
    }
}

/// Superposition over the automaton's basis states. Not necessarily
/// normalized: after projections the squared norm lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector(CVector::zeros(dim))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = linalg::ONE;
        StateVector(v)
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        StateVector(CVector::from_vec(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        StateVector(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| linalg::real(x)),
        ))
    }

    pub fn from_vector(v: CVector) -> Self {
        StateVector(v)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        linalg::norm_sqr(&(&self.0 - &other.0)).sqrt()
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn scaled(&self, factor: f64) -> StateVector {
        StateVector(&self.0 * linalg::real(factor))
    }

    /// Squared-magnitude mass on the indices selected by `mask`.
    pub fn mass_where(&self, mask: &[bool]) -> f64 {
        self.0
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(z, _)| z.norm_sqr())
            .sum()
    }
}

impl std::ops::Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        StateVector(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        StateVector(&self.0 - &rhs.0)
    }
}

/// Square complex matrix attached to one symbol of the working alphabet.
/// Unitarity is checked by [`validate_qfa`], not on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(CMatrix);

impl UnitaryOperator {
    pub fn new(matrix: CMatrix) -> Self {
        UnitaryOperator(matrix)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        UnitaryOperator(linalg::from_real_rows(rows))
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryOperator(CMatrix::identity(dim, dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `max |(U^†U − I)_{ij}|`.
    pub fn defect(&self) -> f64 {
        linalg::unitarity_defect(&self.0)
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector(&self.0 * &psi.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Accepting,
    Rejecting,
    NonHalting,
}

/// Raw components of a QFA, by state name.
#[derive(Debug, Clone)]
pub struct QfaParts {
    pub states: Vec<String>,
    pub alphabet: Alphabet,
    pub start: String,
    pub accept: Vec<String>,
    pub reject: Vec<String>,
    pub left_end: CMatrix,
    pub right_end: CMatrix,
    /// One operator per letter, in alphabet order.
    pub letters: Vec<CMatrix>,
}

/// The tuple `(Q, Σ, V, q0, Q_acc, Q_rej)` plus the endmarker operators.
#[derive(Debug, Clone, PartialEq)]
pub struct QfaDefinition {
    states: Vec<String>,
    alphabet: Alphabet,
    start: usize,
    accepting: Vec<bool>,
    rejecting: Vec<bool>,
    left_end: UnitaryOperator,
    right_end: UnitaryOperator,
    letters: Vec<UnitaryOperator>,
}

fn index_of(states: &[String], name: &str) -> Result<usize> {
    states
        .iter()
        .position(|s| s == name)
        .ok_or_else(|| Error::UnknownState(name.to_string()))
}

impl QfaDefinition {
    /// Checks structure (names, dimensions); unitarity and disjointness of
    /// the halting sets are left to [`validate_qfa`].
    pub fn from_parts(parts: QfaParts) -> Result<Self> {
        let n = parts.states.len();
        if n == 0 {
            return Err(Error::InvalidAutomaton("no states".into()));
        }
        for (i, s) in parts.states.iter().enumerate() {
            if parts.states[..i].contains(s) {
                return Err(Error::InvalidAutomaton(format!("duplicate state `{s}`")));
            }
        }
        if parts.letters.len() != parts.alphabet.len() {
            return Err(Error::InvalidAutomaton(format!(
                "{} letter operators for {} letters",
                parts.letters.len(),
                parts.alphabet.len()
            )));
        }
        for m in [&parts.left_end, &parts.right_end].into_iter().chain(&parts.letters) {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: if m.nrows() != n { m.nrows() } else { m.ncols() },
                });
            }
        }
        let start = index_of(&parts.states, &parts.start)?;
        let mut accepting = vec![false; n];
        for s in &parts.accept {
            accepting[index_of(&parts.states, s)?] = true;
        }
        let mut rejecting = vec![false; n];
        for s in &parts.reject {
            rejecting[index_of(&parts.states, s)?] = true;
        }
        Ok(QfaDefinition {
            states: parts.states,
            alphabet: parts.alphabet,
            start,
            accepting,
            rejecting,
            left_end: UnitaryOperator(parts.left_end),
            right_end: UnitaryOperator(parts.right_end),
            letters: parts.letters.into_iter().map(UnitaryOperator).collect(),
        })
    }

    pub fn to_parts(&self) -> QfaParts {
        let names = |mask: &[bool]| {
            self.states
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(s, _)| s.clone())
                .collect()
        };
        QfaParts {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            start: self.states[self.start].clone(),
            accept: names(&self.accepting),
            reject: names(&self.rejecting),
            left_end: self.left_end.0.clone(),
            right_end: self.right_end.0.clone(),
            letters: self.letters.iter().map(|u| u.0.clone()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        index_of(&self.states, name)
    }

    pub fn accepting_mask(&self) -> &[bool] {
        &self.accepting
    }

    pub fn rejecting_mask(&self) -> &[bool] {
        &self.rejecting
    }

    pub fn nonhalting_mask(&self) -> Vec<bool> {
        (0..self.dim()).map(|i| self.kind(i) == StateKind::NonHalting).collect()
    }

    pub fn nonhalting_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.kind(i) == StateKind::NonHalting).collect()
    }

    pub fn kind(&self, state: usize) -> StateKind {
        if self.accepting[state] {
            StateKind::Accepting
        } else if self.rejecting[state] {
            StateKind::Rejecting
        } else {
            StateKind::NonHalting
        }
    }

    pub fn operator(&self, symbol: Symbol) -> Result<&UnitaryOperator> {
        match symbol {
            Symbol::LeftEnd => Ok(&self.left_end),
            Symbol::RightEnd => Ok(&self.right_end),
            Symbol::Letter(i) => self.letters.get(i).ok_or(Error::LetterOutOfRange {
                index: i,
                size: self.alphabet.len(),
            }),
        }
    }

    /// Every operator paired with its display name (`kappa`, `dollar`, letters).
    pub fn operators(&self) -> Vec<(String, &UnitaryOperator)> {
        let mut ops = vec![
            ("kappa".to_string(), &self.left_end),
            ("dollar".to_string(), &self.right_end),
        ];
        for (i, u) in self.letters.iter().enumerate() {
            ops.push((self.alphabet.name(i).to_string(), u));
        }
        ops
    }

    /// The same automaton with accepting and rejecting states exchanged.
    pub fn with_swapped_halting(&self) -> QfaDefinition {
        QfaDefinition {
            accepting: self.rejecting.clone(),
            rejecting: self.accepting.clone(),
            ..self.clone()
        }
    }

    pub fn with_start(mut self, start: usize) -> QfaDefinition {
        self.start = start;
        self
    }

    pub fn initial_state(&self) -> StateVector {
        StateVector::basis(self.dim(), self.start)
    }

    fn check_dim(&self, psi: &StateVector) -> Result<()> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.len(),
            });
        }
        Ok(())
    }

    /// Zeroes every halting coordinate.
    pub fn project_nonhalting(&self, psi: &StateVector) -> StateVector {
        let mut v = psi.0.clone();
        for (i, z) in v.iter_mut().enumerate() {
            if self.kind(i) != StateKind::NonHalting {
                *z = linalg::ZERO;
            }
        }
        StateVector(v)
    }

    /// Applies the symbol's unitary, then measures.
    pub fn step_letter(&self, psi: &StateVector, symbol: Symbol) -> Result<Step> {
        self.check_dim(psi)?;
        let image = self.operator(symbol)?.apply(psi);
        Ok(Step {
            accepted: image.mass_where(&self.accepting),
            rejected: image.mass_where(&self.rejecting),
            next: self.project_nonhalting(&image),
        })
    }

    /// `V′_{a_n} ⋯ V′_{a_1} ψ`.
    pub fn apply_projected_word(&self, psi: &StateVector, word: &[Symbol]) -> Result<StateVector> {
        self.check_dim(psi)?;
        let mut state = psi.clone();
        for &symbol in word {
            state = self.project_nonhalting(&self.operator(symbol)?.apply(&state));
        }
        Ok(state)
    }

    /// [`apply_projected_word`](Self::apply_projected_word) over input letters only.
    pub fn apply_projected_letters(&self, psi: &StateVector, word: &[usize]) -> Result<StateVector> {
        let symbols: Vec<Symbol> = word.iter().map(|&i| Symbol::Letter(i)).collect();
        self.apply_projected_word(psi, &symbols)
    }

    /// Probability that reading `$` from `psi` accepts.
    pub fn endmarker_acceptance(&self, psi: &StateVector) -> Result<f64> {
        self.check_dim(psi)?;
        let outside = psi.norm_sqr() - psi.mass_where(&self.nonhalting_mask());
        if outside > DEFAULT_TOLERANCE {
            return Err(Error::SupportOutsideNonHalting(outside));
        }
        Ok(self.step_letter(psi, Symbol::RightEnd)?.accepted)
    }

    /// Processes `κ w $` from the start state.
    pub fn run_word(&self, word: &[usize]) -> Result<RunTrace> {
        self.alphabet.check(word)?;
        let symbols = std::iter::once(Symbol::LeftEnd)
            .chain(word.iter().map(|&i| Symbol::Letter(i)))
            .chain(std::iter::once(Symbol::RightEnd));
        let mut trace = RunTrace {
            accepted: 0.0,
            rejected: 0.0,
            state: self.initial_state(),
            events: Vec::with_capacity(word.len() + 2),
        };
        for symbol in symbols {
            let step = self.step_letter(&trace.state, symbol)?;
            trace.accepted += step.accepted;
            trace.rejected += step.rejected;
            trace.state = step.next;
            trace.events.push(StepEvent {
                symbol,
                accepted: step.accepted,
                rejected: step.rejected,
                remaining: trace.state.norm_sqr(),
            });
        }
        Ok(trace)
    }

    pub fn run_str(&self, word: &str) -> Result<RunTrace> {
        self.run_word(&self.alphabet.parse(word)?)
    }

    /// Depth-first scan of every word with `|w| <= max_len`, sharing prefix
    /// computations. `visit` receives the word and its final outcome.
    pub fn scan_words(&self, max_len: usize, mut visit: impl FnMut(&[usize], Outcome)) {
        let start = self
            .step_letter(&self.initial_state(), Symbol::LeftEnd)
            .expect("initial state has the automaton's dimension");
        let mut word = Vec::with_capacity(max_len);
        self.scan_rec(&mut word, &start.next, start.accepted, start.rejected, max_len, &mut visit);
    }

    fn scan_rec(
        &self,
        word: &mut Word,
        state: &StateVector,
        accepted: f64,
        rejected: f64,
        max_len: usize,
        visit: &mut impl FnMut(&[usize], Outcome),
    ) {
        let end = self
            .step_letter(state, Symbol::RightEnd)
            .expect("dimensions are consistent");
        visit(
            word,
            Outcome {
                accepted: accepted + end.accepted,
                rejected: rejected + end.rejected,
                undecided: end.next.norm_sqr(),
            },
        );
        if word.len() == max_len {
            return;
        }
        for letter in 0..self.alphabet.len() {
            let step = self
                .step_letter(state, Symbol::Letter(letter))
                .expect("dimensions are consistent");
            word.push(letter);
            self.scan_rec(
                word,
                &step.next,
                accepted + step.accepted,
                rejected + step.rejected,
                max_len,
                visit,
            );
            word.pop();
        }
    }

    /// Outcomes for every word `|w| <= max_len`, in length-lexicographic order.
    pub fn word_outcomes(&self, max_len: usize) -> Vec<(Word, Outcome)> {
        let mut all = Vec::new();
        self.scan_words(max_len, |w, o| all.push((w.to_vec(), o)));
        all.sort_by(|a, b| length_lex_cmp(&a.0, &b.0));
        all
    }
}

/// Result of reading one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: StateVector,
    pub accepted: f64,
    pub rejected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvent {
    pub symbol: Symbol,
    pub accepted: f64,
    pub rejected: f64,
    /// Squared norm of the surviving non-halting state after this symbol.
    pub remaining: f64,
}

/// Final acceptance/rejection probabilities of one word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub accepted: f64,
    pub rejected: f64,
    pub undecided: f64,
}

impl Outcome {
    pub fn decision(&self, tolerance: f64) -> Decision {
        classify(self.accepted, self.rejected, tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
    Tie,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
            Decision::Tie => "tie",
        })
    }
}

fn classify(accepted: f64, rejected: f64, tolerance: f64) -> Decision {
    if accepted > rejected + tolerance {
        Decision::Accept
    } else if rejected > accepted + tolerance {
        Decision::Reject
    } else {
        Decision::Tie
    }
}

/// Full record of a run of `κ w $`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub accepted: f64,
    pub rejected: f64,
    /// Surviving non-halting state after `$`.
    pub state: StateVector,
    pub events: Vec<StepEvent>,
}

impl RunTrace {
    pub fn undecided(&self) -> f64 {
        self.state.norm_sqr()
    }

    pub fn decision(&self, tolerance: f64) -> Decision {
        classify(self.accepted, self.rejected, tolerance)
    }

    pub fn outcome(&self) -> Outcome {
        Outcome {
            accepted: self.accepted,
            rejected: self.rejected,
            undecided: self.undecided(),
        }
    }
}

/// Worst correct-decision probability over a word corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Margin {
    pub probability: f64,
    pub worst_word: Word,
    pub words_checked: usize,
}

/// Minimum over `|w| <= max_len` of the probability of the correct answer
/// (acceptance for members of the oracle's language, rejection otherwise).
/// Values within `1e-12` of each other count as ties and go to the shortest,
/// then lexicographically first, word.
pub fn recognition_margin(qfa: &QfaDefinition, oracle: &DfaDefinition, max_len: usize) -> Result<Margin> {
    let map = qfa.alphabet().mapping_to(oracle.alphabet())?;
    let mut best: Option<Margin> = None;
    let mut count = 0usize;
    let mut translated = Vec::with_capacity(max_len);
    qfa.scan_words(max_len, |w, outcome| {
        count += 1;
        translated.clear();
        translated.extend(w.iter().map(|&i| map[i]));
        let member = oracle.accepts(&translated).expect("letters mapped");
        let p = if member { outcome.accepted } else { outcome.rejected };
        let better = match &best {
            None => true,
            Some(b) => {
                p < b.probability - 1e-12
                    || ((p - b.probability).abs() <= 1e-12
                        && length_lex_cmp(w, &b.worst_word).is_lt())
            }
        };
        if better {
            best = Some(Margin {
                probability: p,
                worst_word: w.to_vec(),
                words_checked: 0,
            });
        }
    });
    let mut margin = best.expect("the empty word is always scanned");
    margin.words_checked = count;
    Ok(margin)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonUnitary { operator: String, defect: f64 },
    OverlappingHaltingSets(Vec<String>),
    UnknownState(String),
    MissingOperator(String),
    BadDimension { operator: String, rows: usize, cols: usize, expected: usize },
    ReservedLetter(String),
    Structure(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonUnitary { operator, defect } => {
                write!(f, "operator `{operator}` is not unitary: ‖U†U − I‖_max = {defect:.3e}")
            }
            Violation::OverlappingHaltingSets(s) => {
                write!(f, "states both accepting and rejecting: {}", s.join(", "))
            }
            Violation::UnknownState(s) => write!(f, "unknown state `{s}`"),
            Violation::MissingOperator(s) => write!(f, "missing operator `{s}`"),
            Violation::BadDimension { operator, rows, cols, expected } => write!(
                f,
                "operator `{operator}` is {rows}x{cols}, expected {expected}x{expected}"
            ),
            Violation::ReservedLetter(s) => write!(f, "letter `{s}` collides with an endmarker"),
            Violation::Structure(s) => f.write_str(s),
        }
    }
}

/// Outcome of [`validate_qfa`]; valid iff there are no violations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "valid")?;
        }
        for v in &self.violations {
            writeln!(f, "error: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Words up to this length are sampled for residual non-halting mass.
const RESIDUAL_SAMPLE_LEN: usize = 4;

pub fn validate_qfa(qfa: &QfaDefinition) -> ValidationReport {
    validate_qfa_with(qfa, DEFAULT_TOLERANCE)
}

pub fn validate_qfa_with(qfa: &QfaDefinition, tolerance: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (name, u) in qfa.operators() {
        let defect = u.defect();
        if defect > tolerance {
            report.violations.push(Violation::NonUnitary { operator: name, defect });
        }
    }
    let overlap: Vec<String> = (0..qfa.dim())
        .filter(|&i| qfa.accepting[i] && qfa.rejecting[i])
        .map(|i| qfa.states[i].clone())
        .collect();
    if !overlap.is_empty() {
        report.violations.push(Violation::OverlappingHaltingSets(overlap));
    }
    for l in qfa.alphabet.letters() {
        if matches!(l.as_str(), "kappa" | "dollar" | "κ" | "$") {
            report.violations.push(Violation::ReservedLetter(l.clone()));
        }
    }
    if qfa.nonhalting_indices().is_empty() {
        report.warnings.push("degenerate: no non-halting states".into());
    }
    if report.is_valid() {
        let mut worst: Option<(Word, f64)> = None;
        for w in generate_corpus(qfa.alphabet.len(), RESIDUAL_SAMPLE_LEN) {
            let residual = qfa.run_word(&w).expect("valid word").undecided();
            if residual > tolerance && worst.as_ref().is_none_or(|(_, r)| residual > *r) {
                worst = Some((w, residual));
            }
        }
        if let Some((w, r)) = worst {
            report.warnings.push(format!(
                "non-halting mass {r:.3e} survives the right endmarker (word {})",
                qfa.alphabet.format(&w)
            ));
        }
    }
    report
}
