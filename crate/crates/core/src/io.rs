//! JSON automaton files and point CSVs.
//!
//! A QFA file:
//!
//! ```json
//! {"type": "qfa", "states": ["q1", "acc", "rej"], "alphabet": ["a"],
//!  "start": "q1", "accept": ["acc"], "reject": ["rej"],
//!  "operators": {"kappa": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "dollar": ..., "a": ...}}
//! ```
//!
//! Matrices are row-major; an entry is a real number or `[re, im]`.
//! A DFA file carries `"type": "dfa"` and a nested
//! `"delta": {state: {letter: state}}` table instead of operators.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructions::ProbabilityPoint;
use crate::dfa::DfaDefinition;
use crate::linalg::CMatrix;
use crate::qfa::{validate_qfa, QfaDefinition, QfaParts, ValidationReport, Violation};
use crate::word::{Alphabet, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Automaton {
    Qfa(QfaDefinition),
    Dfa(DfaDefinition),
}

impl Automaton {
    pub fn into_qfa(self) -> Result<QfaDefinition> {
        match self {
            Automaton::Qfa(q) => Ok(q),
            Automaton::Dfa(_) => Err(Error::InvalidAutomaton("expected a QFA, found a DFA".into())),
        }
    }

    pub fn into_dfa(self) -> Result<DfaDefinition> {
        match self {
            Automaton::Dfa(d) => Ok(d),
            Automaton::Qfa(_) => Err(Error::InvalidAutomaton("expected a DFA, found a QFA".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QfaFile {
    states: Vec<String>,
    alphabet: Vec<String>,
    start: String,
    accept: Vec<String>,
    reject: Vec<String>,
    operators: BTreeMap<String, Vec<Vec<Entry>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DfaFile {
    states: Vec<String>,
    alphabet: Vec<String>,
    start: String,
    accept: Vec<String>,
    delta: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum AutomatonFile {
    Qfa(QfaFile),
    Dfa(DfaFile),
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

fn to_matrix(name: &str, rows: &[Vec<Entry>], n: usize, report: &mut ValidationReport) -> Option<CMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        report.violations.push(Violation::BadDimension {
            operator: name.to_string(),
            rows: rows.len(),
            cols: if rows.iter().all(|r| r.len() == cols) { cols } else { usize::MAX },
            expected: n,
        });
        return None;
    }
    Some(CMatrix::from_fn(n, n, |i, j| match rows[i][j] {
        Entry::Real(x) => Complex64::new(x, 0.0),
        Entry::Complex([re, im]) => Complex64::new(re, im),
    }))
}

fn qfa_from_file(f: QfaFile, check: bool) -> Result<QfaDefinition> {
    let alphabet = Alphabet::new(f.alphabet.iter().cloned())?;
    let n = f.states.len();
    let mut report = ValidationReport::default();
    for name in f.accept.iter().chain(&f.reject).chain(std::iter::once(&f.start)) {
        if !f.states.contains(name) {
            report.violations.push(Violation::UnknownState(name.clone()));
        }
    }
    let mut take = |name: &str| match f.operators.get(name) {
        Some(rows) => to_matrix(name, rows, n, &mut report),
        None => {
            report.violations.push(Violation::MissingOperator(name.to_string()));
            None
        }
    };
    let left_end = take("kappa");
    let right_end = take("dollar");
    let letters: Vec<Option<CMatrix>> = alphabet.letters().iter().map(|l| take(l)).collect();
    for key in f.operators.keys() {
        if key != "kappa" && key != "dollar" && alphabet.index_of(key).is_none() {
            report.violations.push(Violation::Structure(format!("operator `{key}` names no letter")));
        }
    }
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let qfa = QfaDefinition::from_parts(QfaParts {
        states: f.states,
        alphabet,
        start: f.start,
        accept: f.accept,
        reject: f.reject,
        left_end: left_end.expect("checked"),
        right_end: right_end.expect("checked"),
        letters: letters.into_iter().map(|m| m.expect("checked")).collect(),
    })?;
    let report = validate_qfa(&qfa);
    if check && !report.is_valid() {
        return Err(Error::Validation(report));
    }
    Ok(qfa)
}

fn dfa_from_file(f: DfaFile) -> Result<DfaDefinition> {
    let alphabet = Alphabet::new(f.alphabet.iter().cloned())?;
    let idx = |s: &str| f.states.iter().position(|t| t == s).ok_or_else(|| Error::UnknownState(s.into()));
    let mut delta = Vec::with_capacity(f.states.len());
    for s in &f.states {
        let row = f
            .delta
            .get(s)
            .ok_or_else(|| Error::InvalidAutomaton(format!("no transitions for state `{s}`")))?;
        let mut targets = Vec::with_capacity(alphabet.len());
        for l in alphabet.letters() {
            let t = row
                .get(l)
                .ok_or_else(|| Error::InvalidAutomaton(format!("no transition from `{s}` on `{l}`")))?;
            targets.push(idx(t)?);
        }
        if let Some(extra) = row.keys().find(|k| alphabet.index_of(k).is_none()) {
            return Err(Error::UnknownLetter(extra.clone()));
        }
        delta.push(targets);
    }
    if let Some(extra) = f.delta.keys().find(|k| !f.states.contains(k)) {
        return Err(Error::UnknownState(extra.clone()));
    }
    let mut accepting = vec![false; f.states.len()];
    for s in &f.accept {
        accepting[idx(s)?] = true;
    }
    let start = idx(&f.start)?;
    DfaDefinition::new(f.states, alphabet, start, accepting, delta)
}

fn parse_with(text: &str, check: bool) -> Result<Automaton> {
    match serde_json::from_str::<AutomatonFile>(text).map_err(json_error)? {
        AutomatonFile::Qfa(f) => qfa_from_file(f, check).map(Automaton::Qfa),
        AutomatonFile::Dfa(f) => dfa_from_file(f).map(Automaton::Dfa),
    }
}

/// Parses and validates an automaton from JSON text.
pub fn parse_automaton(text: &str) -> Result<Automaton> {
    parse_with(text, true)
}

/// Like [`parse_automaton`] but only checks structure (names, operator
/// presence, dimensions), so non-unitary operators survive loading.
pub fn parse_automaton_unchecked(text: &str) -> Result<Automaton> {
    parse_with(text, false)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn load_automaton(path: impl AsRef<Path>) -> Result<Automaton> {
    parse_automaton(&read(path.as_ref())?)
}

pub fn load_automaton_unchecked(path: impl AsRef<Path>) -> Result<Automaton> {
    parse_automaton_unchecked(&read(path.as_ref())?)
}

pub fn load_qfa(path: impl AsRef<Path>) -> Result<QfaDefinition> {
    load_automaton(path)?.into_qfa()
}

pub fn load_dfa(path: impl AsRef<Path>) -> Result<DfaDefinition> {
    load_automaton(path)?.into_dfa()
}

fn to_rows(m: &CMatrix) -> Vec<Vec<Entry>> {
    m.row_iter()
        .map(|r| {
            r.iter()
                .map(|z| if z.im == 0.0 { Entry::Real(z.re) } else { Entry::Complex([z.re, z.im]) })
                .collect()
        })
        .collect()
}

fn qfa_file(qfa: &QfaDefinition) -> QfaFile {
    let parts = qfa.to_parts();
    let mut operators = BTreeMap::new();
    operators.insert("kappa".to_string(), to_rows(&parts.left_end));
    operators.insert("dollar".to_string(), to_rows(&parts.right_end));
    for (l, m) in parts.alphabet.letters().iter().zip(&parts.letters) {
        operators.insert(l.clone(), to_rows(m));
    }
    QfaFile {
        states: parts.states,
        alphabet: parts.alphabet.letters().to_vec(),
        start: parts.start,
        accept: parts.accept,
        reject: parts.reject,
        operators,
    }
}

fn dfa_file(dfa: &DfaDefinition) -> DfaFile {
    let names = dfa.states();
    let delta = (0..dfa.num_states())
        .map(|q| {
            let row = dfa
                .alphabet()
                .letters()
                .iter()
                .enumerate()
                .map(|(l, name)| (name.clone(), names[dfa.next(q, l)].clone()))
                .collect();
            (names[q].clone(), row)
        })
        .collect();
    DfaFile {
        states: names.to_vec(),
        alphabet: dfa.alphabet().letters().to_vec(),
        start: names[dfa.start()].clone(),
        accept: (0..dfa.num_states()).filter(|&q| dfa.is_accepting(q)).map(|q| names[q].clone()).collect(),
        delta,
    }
}

pub fn to_json(automaton: &Automaton) -> String {
    let file = match automaton {
        Automaton::Qfa(q) => AutomatonFile::Qfa(qfa_file(q)),
        Automaton::Dfa(d) => AutomatonFile::Dfa(dfa_file(d)),
    };
    let value = serde_json::to_value(&file).expect("plain data serializes");
    let mut out = String::new();
    write_compact_rows(&value, 0, &mut out);
    out
}

/// Pretty JSON that keeps arrays of scalars (matrix rows, state lists) on one line.
fn write_compact_rows(v: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value;
    let scalar = |v: &Value| !v.is_array() && !v.is_object();
    let inline = |items: &[Value]| {
        items.iter().all(|x| match x {
            Value::Array(pair) => pair.len() == 2 && pair.iter().all(scalar),
            other => scalar(other),
        })
    };
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) if !inline(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write_compact_rows(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_compact_rows(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("value serializes").replace(',', ", ")),
    }
}

pub fn save_automaton(automaton: &Automaton, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json(automaton);
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// `word,x,y,member` with a header line.
pub fn points_to_csv(points: &[ProbabilityPoint], alphabet: &Alphabet) -> String {
    let mut out = String::from("word,x,y,member\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", alphabet.format(&p.word), p.x, p.y, p.member);
    }
    out
}

/// Reads the format written by [`points_to_csv`].
pub fn parse_points_csv(text: &str, alphabet: &Alphabet) -> Result<Vec<ProbabilityPoint>> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("word")) {
            continue;
        }
        let err = |column: usize, message: String| Error::Parse { line: i + 1, column, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(err(1, format!("expected 4 fields, found {}", fields.len())));
        }
        let word: Word = alphabet.parse(fields[0])?;
        let num = |k: usize| fields[k].trim().parse::<f64>().map_err(|e| err(k + 1, e.to_string()));
        let member = match fields[3].trim() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(err(4, format!("expected a boolean, found `{other}`"))),
        };
        points.push(ProbabilityPoint { word, x: num(1)?, y: num(2)?, member });
    }
    Ok(points)
}

pub fn load_points_csv(path: impl AsRef<Path>, alphabet: &Alphabet) -> Result<Vec<ProbabilityPoint>> {
    parse_points_csv(&read(path.as_ref())?, alphabet)
}
