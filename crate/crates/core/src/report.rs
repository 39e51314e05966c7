//! The golden-check report: every headline number recomputed from the
//! bundled fixtures and compared against its expected value.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::analysis::{contraction_estimate, decompose_nonhalting, tv_lemma_check, vanish_word_search, verify_invariance};
use crate::constructions::{probabilistic_union, union_weights};
use crate::dfa::{build_even_a_dfa, BooleanOp, DfaDefinition};
use crate::io::parse_automaton_unchecked;
use crate::qfa::{recognition_margin, QfaDefinition};
use crate::random::{random_qfa, random_word};
use crate::word::generate_corpus;
use crate::{Error, Result, DEFAULT_TOLERANCE};

/// Tolerance for single-word probabilities.
pub const GOLDEN_TOLERANCE: f64 = 1e-12;
/// Tolerance for comparing computed subspaces.
pub const SUBSPACE_TOLERANCE: f64 = 1e-8;
/// Environment variable overriding [`DEFAULT_TOLERANCE`].
pub const TOLERANCE_VAR: &str = "QFA_LAB_TOL";

/// Reads [`TOLERANCE_VAR`], falling back to [`DEFAULT_TOLERANCE`].
pub fn tolerance_from_env() -> Result<f64> {
    match std::env::var(TOLERANCE_VAR) {
        Err(_) => Ok(DEFAULT_TOLERANCE),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Error::InvalidParameter(format!("{TOLERANCE_VAR}={s} is not a positive number"))),
        },
    }
}

/// Nearest fraction `p/q` with `q <= 100` lying within `1e-9` of `x`,
/// preferring the smallest denominator.
pub fn small_fraction(x: f64) -> Option<(i64, i64)> {
    (1..=100i64).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() <= 1e-9).then_some((p as i64, q))
    })
}

/// Twelve significant digits, followed by the small fraction when there is one.
pub fn format_probability(x: f64) -> String {
    let decimal = if x == 0.0 {
        "0".to_string()
    } else if x.abs() < 1e-4 {
        format!("{x:.11e}").replace(".00000000000e", "e")
    } else {
        let digits = (11 - x.abs().log10().floor() as i32).max(0) as usize;
        let s = format!("{x:.digits$}");
        if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s }
    };
    match small_fraction(x) {
        Some((p, q)) if q > 1 => format!("{decimal} ({p}/{q})"),
        _ => decimal,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Number(f64),
    AtLeast(f64),
    AtMost(f64),
    Flag(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => f.write_str(&format_probability(*x)),
            Value::AtLeast(x) => write!(f, ">= {}", format_probability(*x)),
            Value::AtMost(x) => write!(f, "<= {}", format_probability(*x)),
            Value::Flag(b) => write!(f, "{b}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub criterion: u8,
    pub claim: String,
    pub expected: Value,
    pub computed: Value,
    pub tolerance: f64,
    pub pass: bool,
    /// Wall time of the whole criterion this row belongs to.
    pub seconds: f64,
}

impl ReportRow {
    fn new(criterion: u8, claim: impl Into<String>, expected: Value, computed: Value, tolerance: f64) -> Self {
        let pass = match (&expected, &computed) {
            (Value::Number(e), Value::Number(c)) => (e - c).abs() <= tolerance,
            (Value::AtLeast(e), Value::Number(c)) => *c >= e - tolerance,
            (Value::AtMost(e), Value::Number(c)) => *c <= e + tolerance,
            (e, c) => e == c,
        };
        ReportRow { criterion, claim: claim.into(), expected, computed, tolerance, pass, seconds: 0.0 }
    }

    pub fn number(criterion: u8, claim: impl Into<String>, expected: f64, computed: f64, tolerance: f64) -> Self {
        Self::new(criterion, claim, Value::Number(expected), Value::Number(computed), tolerance)
    }

    pub fn at_least(criterion: u8, claim: impl Into<String>, bound: f64, computed: f64, tolerance: f64) -> Self {
        Self::new(criterion, claim, Value::AtLeast(bound), Value::Number(computed), tolerance)
    }

    pub fn at_most(criterion: u8, claim: impl Into<String>, bound: f64, computed: f64, tolerance: f64) -> Self {
        Self::new(criterion, claim, Value::AtMost(bound), Value::Number(computed), tolerance)
    }

    pub fn flag(criterion: u8, claim: impl Into<String>, expected: bool, computed: bool) -> Self {
        Self::new(criterion, claim, Value::Flag(expected), Value::Flag(computed), 0.0)
    }

    pub fn text(criterion: u8, claim: impl Into<String>, expected: &str, computed: &str) -> Self {
        Self::new(criterion, claim, Value::Text(expected.into()), Value::Text(computed.into()), 0.0)
    }

    fn failed(criterion: u8, claim: impl Into<String>, error: &Error) -> Self {
        Self::new(criterion, claim, Value::Text("no error".into()), Value::Text(format!("error: {error}")), 0.0)
    }
}

/// The automata the report runs on.
#[derive(Debug, Clone)]
pub struct Fixtures {
    pub k2: QfaDefinition,
    pub k3: QfaDefinition,
    pub even_a: QfaDefinition,
    pub g1: DfaDefinition,
    pub g2: DfaDefinition,
    pub g3: DfaDefinition,
}

pub const FIXTURE_FILES: [&str; 6] = ["k2.qfa", "k3.qfa", "even_a.qfa", "g1.dfa", "g2.dfa", "g3.dfa"];

const BUNDLED: [&str; 6] = [
    include_str!("../fixtures/k2.qfa"),
    include_str!("../fixtures/k3.qfa"),
    include_str!("../fixtures/even_a.qfa"),
    include_str!("../fixtures/g1.dfa"),
    include_str!("../fixtures/g2.dfa"),
    include_str!("../fixtures/g3.dfa"),
];

impl Fixtures {
    fn from_texts(texts: [&str; 6]) -> Result<Self> {
        // loaded without the unitarity check so that a broken fixture shows
        // up as a failing row rather than an early exit
        let q = |i: usize| parse_automaton_unchecked(texts[i])?.into_qfa();
        let d = |i: usize| parse_automaton_unchecked(texts[i])?.into_dfa();
        Ok(Fixtures { k2: q(0)?, k3: q(1)?, even_a: q(2)?, g1: d(3)?, g2: d(4)?, g3: d(5)? })
    }

    /// The copies compiled into the binary.
    pub fn bundled() -> Self {
        Self::from_texts(BUNDLED).expect("bundled fixtures parse")
    }

    /// Reads `k2.qfa`, `k3.qfa`, `even_a.qfa`, `g1.dfa`, `g2.dfa` and `g3.dfa` from `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut texts = Vec::with_capacity(6);
        for name in FIXTURE_FILES {
            let path = dir.as_ref().join(name);
            texts.push(std::fs::read_to_string(&path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?);
        }
        Self::from_texts(std::array::from_fn(|i| texts[i].as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOptions {
    /// Word length for the recognition scans of K2 and K3.
    pub max_len: usize,
    pub union_len: usize,
    pub closure_len: usize,
    pub invariance_len: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub tv_trials: usize,
    pub fuzz_automata: usize,
    pub fuzz_words: usize,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            max_len: 12,
            union_len: 10,
            closure_len: 15,
            invariance_len: 8,
            tolerance: DEFAULT_TOLERANCE,
            seed: 20240601,
            tv_trials: 1000,
            fuzz_automata: 200,
            fuzz_words: 50,
        }
    }
}

fn timed(rows: &mut Vec<ReportRow>, f: impl FnOnce(&mut Vec<ReportRow>)) {
    let start = rows.len();
    let t = Instant::now();
    f(rows);
    let secs = t.elapsed().as_secs_f64();
    for r in &mut rows[start..] {
        r.seconds = secs;
    }
}

fn unitarity_row(criterion: u8, name: &str, qfa: &QfaDefinition, tol: f64) -> ReportRow {
    let defect = qfa.operators().iter().map(|(_, u)| u.defect()).fold(0.0, f64::max);
    ReportRow::number(criterion, format!("{name} operators unitary (max |U†U - I|)"), 0.0, defect, tol)
}

fn recognition_rows(c: u8, name: &str, qfa: &QfaDefinition, oracle: &DfaDefinition, o: &ReproduceOptions) -> Vec<ReportRow> {
    let mut rows = vec![unitarity_row(c, name, qfa, o.tolerance)];
    match recognition_margin(qfa, oracle, o.max_len) {
        Ok(m) => rows.push(ReportRow::number(
            c,
            format!("{name}: worst correct-decision probability over {} words", m.words_checked),
            2.0 / 3.0,
            m.probability,
            o.tolerance,
        )),
        Err(e) => rows.push(ReportRow::failed(c, format!("{name} recognition"), &e)),
    }
    rows
}

fn golden_rows(k2: &QfaDefinition) -> Vec<ReportRow> {
    [("", true), ("a", false), ("b", false), ("ba", true), ("ab", false)]
        .into_iter()
        .map(|(w, accept)| {
            let label = if w.is_empty() { "ε" } else { w };
            let claim = format!("K2 {} \"{label}\"", if accept { "accepts" } else { "rejects" });
            match k2.run_str(w) {
                Ok(t) => ReportRow::number(3, claim, 2.0 / 3.0, if accept { t.accepted } else { t.rejected }, GOLDEN_TOLERANCE),
                Err(e) => ReportRow::failed(3, claim, &e),
            }
        })
        .collect()
}

fn closure_rows(f: &Fixtures, o: &ReproduceOptions) -> Result<Vec<ReportRow>> {
    let union = f.g2.combine(&f.g3, BooleanOp::Union)?;
    let sym = f.g2.combine(&f.g3, BooleanOp::SymmetricDifference)?;
    let inter = f.g2.combine(&f.g3, BooleanOp::Intersection)?;
    let inter_min = inter.minimize();
    let inter_empty = (0..inter_min.num_states()).all(|q| !inter_min.is_accepting(q));
    let mut exhaustive = (true, true, true);
    let mut count = 0usize;
    for w in generate_corpus(f.g1.alphabet().len(), o.closure_len) {
        count += 1;
        let (a, b, g) = (f.g2.accepts(&w)?, f.g3.accepts(&w)?, f.g1.accepts(&w)?);
        exhaustive.0 &= (a || b) == g;
        exhaustive.1 &= (a != b) == g;
        exhaustive.2 &= !(a && b);
    }
    Ok(vec![
        ReportRow::flag(4, "minimize(G2 ∪ G3) ≡ G1", true, union.minimize().equivalent(&f.g1)?.equivalent),
        ReportRow::flag(4, "minimize(G2 Δ G3) ≡ G1", true, sym.minimize().equivalent(&f.g1)?.equivalent),
        ReportRow::flag(4, "L(G2) ∩ L(G3) = ∅ (product)", true, inter_empty),
        ReportRow::flag(4, format!("G2 ∪ G3 agrees with G1 on {count} words"), true, exhaustive.0),
        ReportRow::flag(4, format!("G2 Δ G3 agrees with G1 on {count} words"), true, exhaustive.1),
        ReportRow::flag(4, format!("no word among {count} is in both L(G2) and L(G3)"), true, exhaustive.2),
    ])
}

fn pattern_rows(name: &str, dfa: &DfaDefinition, expect_x: Option<&str>) -> Vec<ReportRow> {
    let r = dfa.check_t12();
    let c = r.conditions();
    let mut rows = vec![
        ReportRow::flag(5, format!("{name}: conditions 1-4 witnessed"), true, c[..4].iter().all(|&b| b)),
        ReportRow::flag(5, format!("{name}: condition 5 witnessed"), false, c[4]),
        ReportRow::flag(5, format!("{name}: witnesses replay on the minimal automaton"), true, r.replay()),
    ];
    if let Some(x) = expect_x {
        let got = r.pattern.as_ref().map_or("-".to_string(), |w| r.minimal.alphabet().format(&w.x));
        rows.push(ReportRow::text(5, format!("{name}: pattern word x"), x, &got));
    }
    rows
}

fn union_rows(f: &Fixtures, o: &ReproduceOptions) -> Result<Vec<ReportRow>> {
    let mut rows = vec![unitarity_row(6, "even-a QFA", &f.even_a, o.tolerance)];
    let even_dfa = build_even_a_dfa();
    let k1 = recognition_margin(&f.even_a, &even_dfa, o.union_len)?;
    rows.push(ReportRow::number(6, format!("even-a QFA recognition over {} words", k1.words_checked), 1.0, k1.probability, 0.0));
    let w = union_weights(1.0, 2.0 / 3.0)?;
    rows.push(ReportRow::number(6, "guaranteed probability for p1 = 1, p2 = 2/3", 4.0 / 7.0, w.guaranteed_p, o.tolerance));
    let union = probabilistic_union(&f.even_a, 1.0, &f.k2, 2.0 / 3.0)?;
    let oracle = even_dfa.combine(&f.g2, BooleanOp::Union)?;
    let m = recognition_margin(&union, &oracle, o.union_len)?;
    rows.push(ReportRow::at_least(
        6,
        format!("union automaton recognition over {} words", m.words_checked),
        4.0 / 7.0,
        m.probability,
        o.tolerance,
    ));
    let (u, a, b) = (union.word_outcomes(o.union_len), f.even_a.word_outcomes(o.union_len), f.k2.word_outcomes(o.union_len));
    let deviation = u
        .iter()
        .zip(&a)
        .zip(&b)
        .map(|(((_, pu), (_, pa)), (_, pb))| {
            (pu.accepted - (w.alpha1 * pa.accepted + w.alpha2 * pb.accepted + w.alpha3)).abs()
        })
        .fold(0.0, f64::max);
    rows.push(ReportRow::number(6, "mixture law max deviation", 0.0, deviation, o.tolerance));
    Ok(rows)
}

fn limit_rows() -> Result<Vec<ReportRow>> {
    let w = union_weights(2.0 / 3.0, 2.0 / 3.0)?;
    Ok(vec![
        ReportRow::number(7, "guaranteed probability for p1 = p2 = 2/3", 0.5, w.guaranteed_p, 0.0),
        ReportRow::flag(7, "1/p1 + 1/p2 < 3 at p1 = p2 = 2/3", false, w.hypothesis_holds),
    ])
}

fn decomposition_rows(k2: &QfaDefinition, o: &ReproduceOptions) -> Vec<ReportRow> {
    let d = decompose_nonhalting(k2);
    let mut target = crate::linalg::CMatrix::zeros(k2.dim(), k2.dim());
    for name in ["q2", "q3"] {
        if let Ok(i) = k2.state_index(name) {
            target[(i, i)] = crate::linalg::ONE;
        }
    }
    let gap = (d.e1.projector() - target).iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    let inv = verify_invariance(k2, &d, o.invariance_len);
    vec![
        ReportRow::number(8, "dim E1", 2.0, d.e1.dim() as f64, 0.0),
        ReportRow::number(8, "E1 = span{q2, q3} (max projector difference)", 0.0, gap, SUBSPACE_TOLERANCE),
        ReportRow::at_most(8, "refinement iterations", 4.0, d.iterations_used as f64, 0.0),
        ReportRow::number(
            8,
            format!("norm preserved on E1 over {} words", inv.words_checked),
            0.0,
            inv.max_norm_defect,
            o.tolerance,
        ),
        ReportRow::number(8, format!("E2 leakage into E1 over {} words", inv.words_checked), 0.0, inv.max_leakage, o.tolerance),
    ]
}

fn tv_rows(o: &ReproduceOptions, rng: &mut StdRng) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for eps in [0.001, 0.01, 0.1] {
        let c = tv_lemma_check(o.tv_trials, eps, rng)?;
        rows.push(ReportRow::number(
            9,
            format!("pairs with Δ >= 2ε among {} at ε = {eps} (max Δ/ε = {:.4})", c.trials, c.max_ratio),
            0.0,
            c.violations as f64,
            0.0,
        ));
    }
    Ok(rows)
}

fn conservation_rows(o: &ReproduceOptions, rng: &mut StdRng) -> Result<Vec<ReportRow>> {
    let mut worst = 0.0f64;
    let mut prefixes = 0usize;
    for _ in 0..o.fuzz_automata {
        let states = rng.random_range(4..=8);
        let letters = rng.random_range(1..=3);
        let q = random_qfa(states, letters, rng);
        for _ in 0..o.fuzz_words {
            let w = random_word(letters, 16, rng);
            let trace = q.run_word(&w)?;
            let (mut acc, mut rej) = (0.0, 0.0);
            for e in &trace.events {
                acc += e.accepted;
                rej += e.rejected;
                worst = worst.max((acc + rej + e.remaining - 1.0).abs());
                prefixes += 1;
            }
        }
    }
    Ok(vec![ReportRow::number(
        10,
        format!("max |p_acc + p_rej + p_undecided - 1| over {prefixes} prefixes"),
        0.0,
        worst,
        o.tolerance,
    )])
}

fn contraction_rows(k2: &QfaDefinition, o: &ReproduceOptions, rng: &mut StdRng) -> Result<Vec<ReportRow>> {
    let d = decompose_nonhalting(k2);
    let est = contraction_estimate(k2, &d, 64, rng)?;
    let mut rows = vec![ReportRow::number(11, "sampled contraction bound S_est", 0.0, est.s_est, o.tolerance)];
    for (i, v) in d.e2.vectors().iter().enumerate() {
        let found = vanish_word_search(k2, &d, v, 1e-9)?;
        rows.push(ReportRow::at_most(11, format!("E2 basis vector {}: vanishing word length", i + 1), 4.0, found.word.len() as f64, 0.0));
        rows.push(ReportRow::at_most(11, format!("E2 basis vector {}: surviving norm", i + 1), 1e-9, found.norm, 0.0));
    }
    Ok(rows)
}

fn or_error(c: u8, claim: &str, r: Result<Vec<ReportRow>>) -> Vec<ReportRow> {
    r.unwrap_or_else(|e| vec![ReportRow::failed(c, claim, &e)])
}

/// Runs every check and returns one row per comparison.
pub fn reproduce_paper(f: &Fixtures, o: &ReproduceOptions) -> Vec<ReportRow> {
    let mut rng = StdRng::seed_from_u64(o.seed);
    let mut rows = Vec::new();
    timed(&mut rows, |r| r.extend(recognition_rows(1, "K2", &f.k2, &f.g2, o)));
    timed(&mut rows, |r| r.extend(recognition_rows(2, "K3", &f.k3, &f.g3, o)));
    timed(&mut rows, |r| r.extend(golden_rows(&f.k2)));
    timed(&mut rows, |r| r.extend(or_error(4, "closure checks", closure_rows(f, o))));
    timed(&mut rows, |r| {
        r.extend(pattern_rows("G1", &f.g1, Some("b")));
        r.extend(pattern_rows("G2", &f.g2, None));
    });
    timed(&mut rows, |r| r.extend(or_error(6, "union construction", union_rows(f, o))));
    timed(&mut rows, |r| r.extend(or_error(7, "limit case", limit_rows())));
    timed(&mut rows, |r| r.extend(decomposition_rows(&f.k2, o)));
    timed(&mut rows, |r| r.extend(or_error(9, "total variation bound", tv_rows(o, &mut rng))));
    timed(&mut rows, |r| r.extend(or_error(10, "conservation", conservation_rows(o, &mut rng))));
    timed(&mut rows, |r| r.extend(or_error(11, "contraction", contraction_rows(&f.k2, o, &mut rng))));
    rows
}

pub fn all_pass(rows: &[ReportRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

pub fn format_table(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.criterion.to_string(),
                r.claim.clone(),
                r.expected.to_string(),
                r.computed.to_string(),
                if r.pass { "PASS".into() } else { "FAIL".into() },
            ]
        })
        .collect();
    let header = ["#", "claim", "expected", "computed", "result"];
    let width = |k: usize| cells.iter().map(|c| c[k].chars().count()).chain([header[k].len()]).max().unwrap_or(0);
    let widths: Vec<usize> = (0..5).map(width).collect();
    let mut out = String::new();
    let mut line = |c: [&str; 5]| {
        let mut s = String::new();
        for (k, cell) in c.iter().enumerate() {
            let pad = widths[k] - cell.chars().count();
            s.push_str(cell);
            if k < 4 {
                s.push_str(&" ".repeat(pad + 2));
            }
        }
        let _ = writeln!(out, "{}", s.trim_end());
    };
    line(header);
    for c in &cells {
        line([&c[0], &c[1], &c[2], &c[3], &c[4]]);
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let _ = writeln!(out, "{} rows, {} failed", rows.len(), failed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(small_fraction(2.0 / 3.0), Some((2, 3)));
        assert_eq!(small_fraction(4.0 / 7.0), Some((4, 7)));
        assert_eq!(small_fraction(0.5), Some((1, 2)));
        assert_eq!(small_fraction(std::f64::consts::PI - 3.0), None);
        assert_eq!(format_probability(2.0 / 3.0), "0.666666666667 (2/3)");
        assert_eq!(format_probability(0.5), "0.5 (1/2)");
        assert_eq!(format_probability(1.0), "1");
        assert_eq!(format_probability(0.0), "0");
    }

    #[test]
    fn row_comparisons() {
        assert!(ReportRow::number(1, "x", 2.0 / 3.0, 0.6666666667, 1e-9).pass);
        assert!(!ReportRow::number(1, "x", 2.0 / 3.0, 0.6667, 1e-9).pass);
        assert!(ReportRow::at_least(6, "x", 4.0 / 7.0, 0.6, 1e-9).pass);
        assert!(!ReportRow::at_most(11, "x", 4.0, 5.0, 0.0).pass);
        assert!(!ReportRow::flag(4, "x", true, false).pass);
    }

    #[test]
    fn bundled_fixtures_match_builders() {
        let f = Fixtures::bundled();
        assert_eq!(f.k2, crate::constructions::build_k2());
        assert_eq!(f.k3, crate::constructions::build_k3());
        assert_eq!(f.even_a, crate::constructions::build_even_a());
        assert_eq!(f.g1, crate::dfa::build_g1());
        assert_eq!(f.g2, crate::dfa::build_g2());
        assert_eq!(f.g3, crate::dfa::build_g3());
        assert!(crate::qfa::validate_qfa(&f.k2).is_valid());
    }
}
