//! Acceptance suite: one PASS/FAIL line per criterion, each with its own
//! tolerance and time budget. Runs without the libtest harness so the lines
//! are always printed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qfa_lab::analysis::{contraction_estimate, decompose_nonhalting, tv_lemma_check, vanish_word_search, verify_invariance};
use qfa_lab::constructions::{build_even_a, build_k2, build_k3, probabilistic_union, union_weights};
use qfa_lab::dfa::{build_even_a_dfa, build_g1, build_g2, build_g3, BooleanOp, DfaDefinition};
use qfa_lab::qfa::{recognition_margin, QfaDefinition};
use qfa_lab::random::{random_qfa, random_word};
use qfa_lab::word::generate_corpus;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;
type Criterion = (u8, &'static str, Duration, Box<dyn Fn() -> Check>);

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn recognition(qfa: &QfaDefinition, oracle: &DfaDefinition) -> Check {
    let m = recognition_margin(qfa, oracle, 12).map_err(|e| e.to_string())?;
    ensure(
        m.words_checked == 8191 && (m.probability - 2.0 / 3.0).abs() <= 1e-9,
        format!("min correct-decision probability {:.12} over {} words", m.probability, m.words_checked),
    )
}

fn criterion_3() -> Check {
    let k2 = build_k2();
    let mut worst = 0.0f64;
    for (w, accept) in [("", true), ("a", false), ("b", false), ("ba", true), ("ab", false)] {
        let t = k2.run_str(w).map_err(|e| e.to_string())?;
        let p = if accept { t.accepted } else { t.rejected };
        worst = worst.max((p - 2.0 / 3.0).abs());
    }
    ensure(worst <= 1e-12, format!("max deviation from 2/3: {worst:.3e}"))
}

fn criterion_4() -> Check {
    let (g1, g2, g3) = (build_g1(), build_g2(), build_g3());
    let e = |r: qfa_lab::Result<DfaDefinition>| r.map_err(|e| e.to_string());
    let union = e(g2.combine(&g3, BooleanOp::Union))?.minimize();
    let sym = e(g2.combine(&g3, BooleanOp::SymmetricDifference))?.minimize();
    let inter = e(g2.combine(&g3, BooleanOp::Intersection))?.minimize();
    let u_eq = union.equivalent(&g1).map_err(|e| e.to_string())?.equivalent;
    let s_eq = sym.equivalent(&g1).map_err(|e| e.to_string())?.equivalent;
    let empty = (0..inter.num_states()).all(|q| !inter.is_accepting(q));
    let mut words = 0;
    let mut agree = true;
    for w in generate_corpus(2, 15) {
        words += 1;
        let (a, b, g) = (g2.accepts(&w).unwrap(), g3.accepts(&w).unwrap(), g1.accepts(&w).unwrap());
        agree &= (a || b) == g && (a != b) == g && !(a && b);
    }
    ensure(
        u_eq && s_eq && empty && agree && words == 65535,
        format!("union≡G1 {u_eq}, symdiff≡G1 {s_eq}, disjoint {empty}, {words} words agree {agree}"),
    )
}

fn criterion_5() -> Check {
    let g1 = build_g1().check_t12();
    let g2 = build_g2().check_t12();
    let x = g1.pattern.as_ref().map(|w| g1.minimal.alphabet().format(&w.x)).unwrap_or_default();
    let expected = [true, true, true, true, false];
    let brute1 = common::pattern_by_monoid(&build_g1().minimize());
    let brute2 = common::pattern_by_monoid(&build_g2().minimize());
    ensure(
        g1.conditions() == expected
            && g2.conditions() == expected
            && x == "b"
            && g1.replay()
            && g2.replay()
            && brute1 == (true, false)
            && brute2 == (true, false),
        format!(
            "G1 {:?} x={x}, G2 {:?}, exhaustive G1 {brute1:?} G2 {brute2:?}",
            g1.conditions(),
            g2.conditions()
        ),
    )
}

fn criterion_6() -> Check {
    let e = |x: qfa_lab::Error| x.to_string();
    let k1 = build_even_a();
    let k2 = build_k2();
    let k1_margin = recognition_margin(&k1, &build_even_a_dfa(), 10).map_err(e)?;
    let w = union_weights(1.0, 2.0 / 3.0).map_err(e)?;
    let union = probabilistic_union(&k1, 1.0, &k2, 2.0 / 3.0).map_err(e)?;
    let oracle = build_even_a_dfa().combine(&build_g2(), BooleanOp::Union).map_err(e)?;
    let m = recognition_margin(&union, &oracle, 10).map_err(e)?;
    let mut law = 0.0f64;
    for w_ in generate_corpus(2, 10) {
        let pu = union.run_word(&w_).map_err(e)?.accepted;
        let p1 = k1.run_word(&w_).map_err(e)?.accepted;
        let p2 = k2.run_word(&w_).map_err(e)?.accepted;
        law = law.max((pu - (w.alpha1 * p1 + w.alpha2 * p2 + w.alpha3)).abs());
    }
    ensure(
        k1_margin.probability == 1.0
            && (w.guaranteed_p - 4.0 / 7.0).abs() <= 1e-12
            && m.probability >= 4.0 / 7.0 - 1e-9
            && law <= 1e-9,
        format!(
            "K1 margin {}, union margin {:.12} (guaranteed {:.12}), mixture deviation {law:.3e}",
            k1_margin.probability, m.probability, w.guaranteed_p
        ),
    )
}

fn criterion_7() -> Check {
    let w = union_weights(2.0 / 3.0, 2.0 / 3.0).map_err(|e| e.to_string())?;
    ensure(
        w.guaranteed_p == 0.5 && !w.hypothesis_holds,
        format!("guaranteed_p = {}, hypothesis holds: {}", w.guaranteed_p, w.hypothesis_holds),
    )
}

fn criterion_8() -> Check {
    let k2 = build_k2();
    let d = decompose_nonhalting(&k2);
    let p = d.e1.projector();
    let mut gap = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            let target = if i == j && (i == 1 || i == 2) { 1.0 } else { 0.0 };
            gap = gap.max((p[(i, j)].re - target).abs()).max(p[(i, j)].im.abs());
        }
    }
    let inv = verify_invariance(&k2, &d, 8);
    ensure(
        d.e1.dim() == 2
            && gap <= 1e-8
            && d.iterations_used <= 4
            && inv.max_norm_defect <= 1e-9
            && inv.max_leakage <= 1e-9,
        format!(
            "dim E1 {}, projector gap {gap:.1e}, iterations {}, norm defect {:.1e}, leakage {:.1e} over {} words",
            d.e1.dim(),
            d.iterations_used,
            inv.max_norm_defect,
            inv.max_leakage,
            inv.words_checked
        ),
    )
}

fn criterion_9() -> Check {
    let mut rng = StdRng::seed_from_u64(9);
    let mut total = 0;
    let mut ratio = 0.0f64;
    for eps in [0.001, 0.01, 0.1] {
        let c = tv_lemma_check(1000, eps, &mut rng).map_err(|e| e.to_string())?;
        total += c.violations;
        ratio = ratio.max(c.max_ratio);
    }
    ensure(total == 0, format!("{total} violations in 3000 pairs, max Δ/ε {ratio:.4}"))
}

fn criterion_10() -> Check {
    let mut rng = StdRng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let states = rng.random_range(4..=8);
        let letters = rng.random_range(1..=3);
        let q = random_qfa(states, letters, &mut rng);
        for _ in 0..50 {
            let w = random_word(letters, 16, &mut rng);
            let t = q.run_word(&w).map_err(|e| e.to_string())?;
            let (mut acc, mut rej) = (0.0, 0.0);
            for ev in &t.events {
                acc += ev.accepted;
                rej += ev.rejected;
                worst = worst.max((acc + rej + ev.remaining - 1.0).abs());
            }
        }
    }
    ensure(worst <= 1e-9, format!("max conservation defect {worst:.3e} over 10000 runs"))
}

fn criterion_11() -> Check {
    let k2 = build_k2();
    let d = decompose_nonhalting(&k2);
    let mut rng = StdRng::seed_from_u64(11);
    let est = contraction_estimate(&k2, &d, 64, &mut rng).map_err(|e| e.to_string())?;
    let mut longest = 0;
    let mut worst = 0.0f64;
    for v in d.e2.vectors() {
        let found = vanish_word_search(&k2, &d, &v, 1e-9).map_err(|e| e.to_string())?;
        longest = longest.max(found.word.len());
        worst = worst.max(found.norm);
    }
    ensure(
        est.s_est == 0.0 && longest <= 4 && worst < 1e-9 && d.e2.dim() > 0,
        format!("S_est {}, longest vanishing word {longest}, max surviving norm {worst:.1e}", est.s_est),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: Vec<Criterion> = vec![
        (1, "K2 recognizes L(G2) with probability 2/3", secs(5), Box::new(|| recognition(&build_k2(), &build_g2()))),
        (2, "K3 recognizes L(G3) with probability 2/3", secs(5), Box::new(|| recognition(&build_k3(), &build_g3()))),
        (3, "golden word probabilities of K2", secs(5), Box::new(criterion_3)),
        (4, "G2 ∪ G3 = G2 Δ G3 = G1 and L(G2) ∩ L(G3) = ∅", secs(5), Box::new(criterion_4)),
        (5, "forbidden pattern on G1 and G2", secs(5), Box::new(criterion_5)),
        (6, "weighted union reaches 4/7", secs(10), Box::new(criterion_6)),
        (7, "limit case p1 = p2 = 2/3", secs(5), Box::new(criterion_7)),
        (8, "E1/E2 decomposition of K2", secs(5), Box::new(criterion_8)),
        (9, "total variation below 2ε", secs(2), Box::new(criterion_9)),
        (10, "probability conservation on random automata", secs(10), Box::new(criterion_10)),
        (11, "E2 of K2 vanishes within 4 letters", secs(2), Box::new(criterion_11)),
    ];
    let mut failures = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) => (took <= budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {}: {name} ({:.3}s of {}s) {detail}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
