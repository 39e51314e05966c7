//! Total deterministic finite automata: acceptance, minimization, Boolean
//! product constructions, equivalence with shortest counterexamples, and the
//! `q1 –x→ q2 –x→ q2` forbidden-pattern search on the minimal automaton.

use std::collections::VecDeque;
use std::fmt;

use crate::word::{Alphabet, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfaDefinition {
    states: Vec<String>,
    alphabet: Alphabet,
    start: usize,
    accepting: Vec<bool>,
    /// `delta[state][letter]`
    delta: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Intersection,
    SymmetricDifference,
    Difference,
}

impl BooleanOp {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BooleanOp::Union => a || b,
            BooleanOp::Intersection => a && b,
            BooleanOp::SymmetricDifference => a != b,
            BooleanOp::Difference => a && !b,
        }
    }
}

impl DfaDefinition {
    pub fn new(
        states: Vec<String>,
        alphabet: Alphabet,
        start: usize,
        accepting: Vec<bool>,
        delta: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = states.len();
        if start >= n {
            return Err(Error::InvalidAutomaton(format!("start index {start} out of range")));
        }
        if accepting.len() != n || delta.len() != n {
            return Err(Error::InvalidAutomaton("per-state tables have the wrong length".into()));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::InvalidAutomaton(format!("duplicate state `{s}`")));
            }
        }
        for (q, row) in delta.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(Error::InvalidAutomaton(format!(
                    "transition function not total at state `{}`",
                    states[q]
                )));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::InvalidAutomaton(format!("transition target {t} out of range")));
            }
        }
        Ok(DfaDefinition { states, alphabet, start, accepting, delta })
    }

    /// Builds from named transitions `(from, letter, to)`.
    pub fn from_table(
        states: &[&str],
        alphabet: &[&str],
        start: &str,
        accepting: &[&str],
        transitions: &[(&str, &str, &str)],
    ) -> Result<Self> {
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let alphabet = Alphabet::new(alphabet.iter().copied())?;
        let idx = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::UnknownState(s.to_string()))
        };
        let mut delta = vec![vec![usize::MAX; alphabet.len()]; names.len()];
        for &(from, letter, to) in transitions {
            let l = alphabet
                .index_of(letter)
                .ok_or_else(|| Error::UnknownLetter(letter.to_string()))?;
            delta[idx(from)?][l] = idx(to)?;
        }
        let mut acc = vec![false; names.len()];
        for s in accepting {
            acc[idx(s)?] = true;
        }
        let start = idx(start)?;
        DfaDefinition::new(names, alphabet, start, acc, delta)
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

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn next(&self, state: usize, letter: usize) -> usize {
        self.delta[state][letter]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn run_from(&self, state: usize, word: &[usize]) -> Result<usize> {
        self.alphabet.check(word)?;
        Ok(word.iter().fold(state, |q, &l| self.delta[q][l]))
    }

    pub fn accepts(&self, word: &[usize]) -> Result<bool> {
        Ok(self.accepting[self.run_from(self.start, word)?])
    }

    pub fn accepts_str(&self, word: &str) -> Result<bool> {
        self.accepts(&self.alphabet.parse(word)?)
    }

    pub fn with_start(&self, start: usize) -> DfaDefinition {
        DfaDefinition { start, ..self.clone() }
    }

    pub fn complement(&self) -> DfaDefinition {
        DfaDefinition {
            accepting: self.accepting.iter().map(|a| !a).collect(),
            ..self.clone()
        }
    }

    /// States reachable from `from` (including itself), as a mask.
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            for &t in &self.delta[q] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Shortest, then lexicographically first, word leading from `from` to `to`.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Word> {
        let n = self.states.len();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            if q == to {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, l)) = parent[cur] {
                    word.push(l);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for (l, &t) in self.delta[q].iter().enumerate() {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, l));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Minimal equivalent DFA: unreachable states are dropped and
    /// indistinguishable states merged by Moore partition refinement. Each
    /// merged class keeps the name of its first member.
    pub fn minimize(&self) -> DfaDefinition {
        let reach = self.reachable_from(self.start);
        let live: Vec<usize> = (0..self.states.len()).filter(|&q| reach[q]).collect();

        // class[q] for live q; refine until the number of classes is stable
        let mut class = vec![usize::MAX; self.states.len()];
        for &q in &live {
            class[q] = usize::from(self.accepting[q]);
        }
        let mut count = 0;
        loop {
            let mut signatures: Vec<(usize, Vec<usize>)> = Vec::new();
            let mut next = vec![usize::MAX; self.states.len()];
            for &q in &live {
                let sig = (class[q], self.delta[q].iter().map(|&t| class[t]).collect::<Vec<_>>());
                let id = match signatures.iter().position(|s| *s == sig) {
                    Some(id) => id,
                    None => {
                        signatures.push(sig);
                        signatures.len() - 1
                    }
                };
                next[q] = id;
            }
            class = next;
            if signatures.len() == count {
                break;
            }
            count = signatures.len();
        }

        let mut representative = vec![usize::MAX; count];
        for &q in &live {
            if representative[class[q]] == usize::MAX {
                representative[class[q]] = q;
            }
        }
        let states = representative.iter().map(|&q| self.states[q].clone()).collect();
        let accepting = representative.iter().map(|&q| self.accepting[q]).collect();
        let delta = representative
            .iter()
            .map(|&q| self.delta[q].iter().map(|&t| class[t]).collect())
            .collect();
        DfaDefinition::new(states, self.alphabet.clone(), class[self.start], accepting, delta)
            .expect("quotient of a valid DFA is valid")
    }

    /// Product automaton over the reachable state pairs.
    pub fn combine(&self, other: &DfaDefinition, op: BooleanOp) -> Result<DfaDefinition> {
        let map = self.alphabet.mapping_to(&other.alphabet)?;
        let mut pairs = vec![(self.start, other.start)];
        let mut index = std::collections::HashMap::from([((self.start, other.start), 0usize)]);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            let mut row = Vec::with_capacity(map.len());
            for (l, &m) in map.iter().enumerate() {
                let target = (self.delta[p][l], other.delta[q][m]);
                let id = *index.entry(target).or_insert_with(|| {
                    pairs.push(target);
                    pairs.len() - 1
                });
                row.push(id);
            }
            delta.push(row);
            i += 1;
        }
        let states = pairs
            .iter()
            .map(|&(p, q)| format!("({},{})", self.states[p], other.states[q]))
            .collect();
        let accepting = pairs
            .iter()
            .map(|&(p, q)| op.apply(self.accepting[p], other.accepting[q]))
            .collect();
        DfaDefinition::new(states, self.alphabet.clone(), 0, accepting, delta)
    }

    /// Language equivalence by BFS over the synchronized pair graph; on
    /// difference returns a shortest, then lexicographically first,
    /// distinguishing word (in this automaton's letter order).
    pub fn equivalent(&self, other: &DfaDefinition) -> Result<Equivalence> {
        let map = self.alphabet.mapping_to(&other.alphabet)?;
        let m = other.states.len();
        let key = |p: usize, q: usize| p * m + q;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.states.len() * m];
        let mut seen = vec![false; self.states.len() * m];
        let start = (self.start, other.start);
        seen[key(start.0, start.1)] = true;
        let mut queue = VecDeque::from([start]);
        while let Some((p, q)) = queue.pop_front() {
            if self.accepting[p] != other.accepting[q] {
                let mut word = Vec::new();
                let mut cur = key(p, q);
                while let Some((prev, l)) = parent[cur] {
                    word.push(l);
                    cur = prev;
                }
                word.reverse();
                return Ok(Equivalence { equivalent: false, counterexample: Some(word) });
            }
            for (l, &ml) in map.iter().enumerate() {
                let (np, nq) = (self.delta[p][l], other.delta[q][ml]);
                let k = key(np, nq);
                if !seen[k] {
                    seen[k] = true;
                    parent[k] = Some((key(p, q), l));
                    queue.push_back((np, nq));
                }
            }
        }
        Ok(Equivalence { equivalent: true, counterexample: None })
    }

    /// Searches the minimal automaton for the forbidden pattern.
    pub fn check_t12(&self) -> T12Report {
        check_t12(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub counterexample: Option<Word>,
}

/// States `q1 ≠ q2` and a word `x` with `δ(q1,x) = q2 = δ(q2,x)`, `q2`
/// neither all-accepting nor all-rejecting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternWitness {
    pub q1: String,
    pub q2: String,
    pub x: Word,
}

/// Result of the forbidden-pattern search. `cycle_back` is a word `y` with
/// `δ(q2,y) = q1` for the reported pair, when one exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct T12Report {
    pub minimal: DfaDefinition,
    pub pattern: Option<PatternWitness>,
    pub cycle_back: Option<Word>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T12Verdict {
    /// No pair satisfies the first four conditions.
    NoPattern,
    /// Conditions 1–4 hold: not recognizable with probability `7/9 + ε`.
    BoundedAtSevenNinths,
    /// Conditions 1–5 hold: not recognizable by any MM-QFA.
    NotRecognizable,
}

impl T12Report {
    /// Per-condition verdicts 1..=5 for the reported pair.
    pub fn conditions(&self) -> [bool; 5] {
        let p = self.pattern.is_some();
        [p, p, p, p, p && self.cycle_back.is_some()]
    }

    pub fn verdict(&self) -> T12Verdict {
        match (&self.pattern, &self.cycle_back) {
            (None, _) => T12Verdict::NoPattern,
            (Some(_), None) => T12Verdict::BoundedAtSevenNinths,
            (Some(_), Some(_)) => T12Verdict::NotRecognizable,
        }
    }

    /// Replays the witnesses against the minimal automaton.
    pub fn replay(&self) -> bool {
        let Some(w) = &self.pattern else {
            return self.cycle_back.is_none();
        };
        let dfa = &self.minimal;
        let (Some(q1), Some(q2)) = (dfa.state_index(&w.q1), dfa.state_index(&w.q2)) else {
            return false;
        };
        let (all_acc, all_rej) = dfa.absorbing_flags();
        let pattern_ok = q1 != q2
            && dfa.run_from(q1, &w.x).ok() == Some(q2)
            && dfa.run_from(q2, &w.x).ok() == Some(q2)
            && !all_acc[q2]
            && !all_rej[q2];
        let back_ok = match &self.cycle_back {
            Some(y) => dfa.run_from(q2, y).ok() == Some(q1),
            None => true,
        };
        pattern_ok && back_ok
    }

    pub fn format_table(&self) -> String {
        let a = self.minimal.alphabet();
        let mut out = String::new();
        out.push_str(&format!(
            "minimal automaton: {} states, start {}\n",
            self.minimal.num_states(),
            self.minimal.states()[self.minimal.start()]
        ));
        out.push_str("condition  holds  witness\n");
        let (pair, x) = match &self.pattern {
            Some(w) => (format!("q1={}, q2={}", w.q1, w.q2), format!("x={}", a.format(&w.x))),
            None => ("-".into(), "-".into()),
        };
        let held = self.conditions();
        let witnesses = [
            pair.clone(),
            x.clone(),
            x,
            if self.pattern.is_some() { "q2 mixed".into() } else { "-".into() },
            self.cycle_back
                .as_ref()
                .map_or("-".into(), |y| format!("y={}", a.format(y))),
        ];
        for (i, (h, w)) in held.iter().zip(witnesses).enumerate() {
            out.push_str(&format!("{:<10} {:<6} {}\n", i + 1, if *h { "yes" } else { "no" }, w));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict()));
        out
    }
}

impl fmt::Display for T12Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            T12Verdict::NoPattern => "no forbidden pattern found",
            T12Verdict::BoundedAtSevenNinths => {
                "conditions 1-4 hold: not recognizable with probability 7/9+e"
            }
            T12Verdict::NotRecognizable => "conditions 1-5 hold: not recognizable by any 1-way QFA",
        })
    }
}

impl DfaDefinition {
    /// `(all_accepting, all_rejecting)` per state: every state reachable from
    /// it, itself included, is accepting (resp. rejecting).
    pub fn absorbing_flags(&self) -> (Vec<bool>, Vec<bool>) {
        (0..self.states.len())
            .map(|q| {
                let reach = self.reachable_from(q);
                let members = || (0..self.states.len()).filter(|&r| reach[r]);
                (
                    members().all(|r| self.accepting[r]),
                    members().all(|r| !self.accepting[r]),
                )
            })
            .unzip()
    }

    /// Shortest, then lexicographically first, `x` with `δ(p,x) = r` and
    /// `δ(r,x) = r`, by BFS from `(p, r)` to `(r, r)` in the pair graph.
    fn synchronizing_word(&self, p: usize, r: usize) -> Option<Word> {
        let n = self.states.len();
        let key = |a: usize, b: usize| a * n + b;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n * n];
        let mut seen = vec![false; n * n];
        seen[key(p, r)] = true;
        let mut queue = VecDeque::from([(p, r)]);
        while let Some((a, b)) = queue.pop_front() {
            if a == r && b == r {
                let mut word = Vec::new();
                let mut cur = key(a, b);
                while let Some((prev, l)) = parent[cur] {
                    word.push(l);
                    cur = prev;
                }
                word.reverse();
                return Some(word);
            }
            for l in 0..self.alphabet.len() {
                let (na, nb) = (self.delta[a][l], self.delta[b][l]);
                if !seen[key(na, nb)] {
                    seen[key(na, nb)] = true;
                    parent[key(na, nb)] = Some((key(a, b), l));
                    queue.push_back((na, nb));
                }
            }
        }
        None
    }
}

/// Minimizes, then scans ordered pairs. A pair that also admits the cycle
/// back (`δ(q2,y) = q1`) is preferred; otherwise the pair with the shortest
/// `x` is reported. Ties break on `(x, q1, q2)` in length-lex/index order.
pub fn check_t12(dfa: &DfaDefinition) -> T12Report {
    let minimal = dfa.minimize();
    let (all_acc, all_rej) = minimal.absorbing_flags();
    let n = minimal.num_states();
    let mut best_1_4: Option<(Word, usize, usize)> = None;
    let mut best_1_5: Option<(Word, usize, usize, Word)> = None;
    let better = |x: &Word, cand: Option<&Word>| match cand {
        None => true,
        Some(c) => crate::word::length_lex_cmp(x, c).is_lt(),
    };
    for q1 in 0..n {
        for q2 in 0..n {
            if q1 == q2 || all_acc[q2] || all_rej[q2] {
                continue;
            }
            let Some(x) = minimal.synchronizing_word(q1, q2) else {
                continue;
            };
            if let Some(y) = minimal.shortest_path(q2, q1) {
                if better(&x, best_1_5.as_ref().map(|b| &b.0)) {
                    best_1_5 = Some((x.clone(), q1, q2, y));
                }
            }
            if better(&x, best_1_4.as_ref().map(|b| &b.0)) {
                best_1_4 = Some((x, q1, q2));
            }
        }
    }
    let name = |q: usize| minimal.states()[q].clone();
    let (pattern, cycle_back) = match (best_1_5, best_1_4) {
        (Some((x, q1, q2, y)), _) => (
            Some(PatternWitness { q1: name(q1), q2: name(q2), x }),
            Some(y),
        ),
        (None, Some((x, q1, q2))) => (Some(PatternWitness { q1: name(q1), q2: name(q2), x }), None),
        (None, None) => (None, None),
    };
    T12Report { minimal, pattern, cycle_back }
}

/// `L1`: any number of `a`, then, after the first `b` (if any), an odd
/// number of `a`.
pub fn build_g1() -> DfaDefinition {
    DfaDefinition::from_table(
        &["q1", "q2", "q3"],
        &["a", "b"],
        "q1",
        &["q1", "q3"],
        &[
            ("q1", "a", "q1"),
            ("q1", "b", "q2"),
            ("q2", "a", "q3"),
            ("q2", "b", "q2"),
            ("q3", "a", "q2"),
            ("q3", "b", "q3"),
        ],
    )
    .expect("fixture is well formed")
}

fn g23(start: &str) -> DfaDefinition {
    DfaDefinition::from_table(
        &["q1", "q2", "q3", "q4", "q5"],
        &["a", "b"],
        start,
        &["q1", "q3"],
        &[
            ("q1", "a", "q4"),
            ("q1", "b", "q2"),
            ("q2", "a", "q3"),
            ("q2", "b", "q2"),
            ("q3", "a", "q2"),
            ("q3", "b", "q3"),
            ("q4", "a", "q1"),
            ("q4", "b", "q5"),
            ("q5", "a", "q5"),
            ("q5", "b", "q5"),
        ],
    )
    .expect("fixture is well formed")
}

/// `L2`: an even number of leading `a`, then an odd number of `a` after the
/// first `b`.
pub fn build_g2() -> DfaDefinition {
    g23("q1")
}

/// `L3 = a L2`: same transition structure as [`build_g2`], started in `q4`.
pub fn build_g3() -> DfaDefinition {
    g23("q4")
}

/// Minimal DFA of `a1* a2* … an*` over `{a1, …, an}`. State `s{i}` means
/// letters `a{i+1}..an` may still follow; `sink` absorbs out-of-order input.
/// For `n = 1` the sink is unreachable and omitted.
pub fn build_ln(n: usize) -> Result<DfaDefinition> {
    if n < 1 {
        return Err(Error::InvalidParameter("L_n needs n >= 1".into()));
    }
    let letters: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let alphabet = Alphabet::new(letters)?;
    let with_sink = n > 1;
    let sink = n;
    let mut states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut delta: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).map(|j| if j >= i { j } else { sink }).collect())
        .collect();
    let mut accepting = vec![true; n];
    if with_sink {
        states.push("sink".into());
        delta.push(vec![sink; n]);
        accepting.push(false);
    }
    DfaDefinition::new(states, alphabet, 0, accepting, delta)
}

/// Words over `{a, b}` with an even number of `a`.
pub fn build_even_a_dfa() -> DfaDefinition {
    DfaDefinition::from_table(
        &["even", "odd"],
        &["a", "b"],
        "even",
        &["even"],
        &[("even", "a", "odd"), ("even", "b", "even"), ("odd", "a", "even"), ("odd", "b", "odd")],
    )
    .expect("well formed")
}
