#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use qfa_lab::dfa::DfaDefinition;

/// Every state map `Q -> Q` induced by a word of length `<= max_len`, with
/// the shortest such word, found by BFS over the transition monoid.
pub fn transition_monoid(dfa: &DfaDefinition, max_len: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = dfa.num_states();
    let identity: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::from([identity.clone()]);
    let mut out = vec![(identity.clone(), Vec::new())];
    let mut queue = VecDeque::from([(identity, Vec::<usize>::new())]);
    while let Some((f, w)) = queue.pop_front() {
        if w.len() == max_len {
            continue;
        }
        for l in 0..dfa.alphabet().len() {
            let g: Vec<usize> = f.iter().map(|&q| dfa.next(q, l)).collect();
            if seen.insert(g.clone()) {
                let mut w2 = w.clone();
                w2.push(l);
                out.push((g.clone(), w2.clone()));
                queue.push_back((g, w2));
            }
        }
    }
    out
}

/// `(all_accepting, all_rejecting)` from the monoid: images of `q` under
/// every map are exactly the states reachable from `q`.
pub fn absorbing(dfa: &DfaDefinition, monoid: &[(Vec<usize>, Vec<usize>)], q: usize) -> (bool, bool) {
    let acc: Vec<bool> = monoid.iter().map(|(f, _)| dfa.is_accepting(f[q])).collect();
    (acc.iter().all(|&a| a), acc.iter().all(|&a| !a))
}

/// Brute-force pattern search: `(pattern_exists, pattern_with_cycle_back_exists)`.
pub fn pattern_by_monoid(dfa: &DfaDefinition) -> (bool, bool) {
    let n = dfa.num_states();
    let monoid = transition_monoid(dfa, n * n);
    let mut pattern = false;
    let mut cycle = false;
    for q1 in 0..n {
        for q2 in 0..n {
            if q1 == q2 {
                continue;
            }
            let (all_acc, all_rej) = absorbing(dfa, &monoid, q2);
            if all_acc || all_rej {
                continue;
            }
            if monoid.iter().any(|(f, w)| !w.is_empty() && f[q1] == q2 && f[q2] == q2) {
                pattern = true;
                if monoid.iter().any(|(f, _)| f[q2] == q1) {
                    cycle = true;
                }
            }
        }
    }
    (pattern, cycle)
}
