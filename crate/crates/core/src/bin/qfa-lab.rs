use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::json;

use qfa_lab::analysis::{decompose_nonhalting, tv_lemma_check, verify_invariance};
use qfa_lab::constructions::{
    probabilistic_union, probability_points, separating_line, union_regions, union_weights, Point,
    RejectionProfile,
};
use qfa_lab::io::{load_dfa, load_points_csv, load_qfa, points_to_csv, save_automaton, Automaton};
use qfa_lab::qfa::{recognition_margin, validate_qfa_with};
use qfa_lab::report::{all_pass, format_probability, format_table, reproduce_paper, Fixtures, ReproduceOptions};
use qfa_lab::word::Alphabet;

#[derive(Parser)]
#[command(name = "qfa-lab", version, about = "Measure-many quantum finite automata toolkit")]
struct Cli {
    /// Emit machine-readable JSON instead of text tables.
    #[arg(long, global = true)]
    json: bool,
    /// Comparison tolerance.
    #[arg(long, global = true, env = "QFA_LAB_TOL", default_value_t = 1e-9, value_parser = positive)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one word and show the probabilities after each symbol.
    Simulate { qfa: PathBuf, word: String },
    /// Worst-case probability of the correct answer against a DFA oracle.
    Verify {
        qfa: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// Fail unless the worst case reaches this probability.
        #[arg(long, value_parser = probability)]
        p: Option<f64>,
    },
    /// Search the minimal automaton for the forbidden pattern.
    CheckT12 { dfa: PathBuf },
    /// Split the non-halting space into E1 and E2.
    Decompose {
        qfa: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
    /// Build the weighted union of two automata.
    UnionBuild {
        #[arg(long)]
        k1: PathBuf,
        #[arg(long, value_parser = probability)]
        p1: f64,
        #[arg(long)]
        k2: PathBuf,
        #[arg(long, value_parser = probability)]
        p2: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Maximum-margin line between members and non-members.
    Separability {
        /// CSV with columns word,x,y,member.
        #[arg(long, conflicts_with_all = ["p1", "p2"])]
        points: Option<PathBuf>,
        #[arg(long, default_value = "a,b")]
        alphabet: String,
        /// Use the region corners for these recognition probabilities instead.
        #[arg(long, value_parser = probability, requires = "p2")]
        p1: Option<f64>,
        #[arg(long, value_parser = probability, requires = "p1")]
        p2: Option<f64>,
        /// Assume every word is rejected with probability at most p_i.
        #[arg(long)]
        exact: bool,
    },
    /// Sample the total-variation bound for nearby states.
    TvCheck {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Emit acceptance-probability points of two automata as CSV.
    Points {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recompute every headline result and print a pass/fail table.
    ReproducePaper {
        /// Directory with k2.qfa, k3.qfa, even_a.qfa, g1.dfa, g2.dfa, g3.dfa.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Accepts decimals and fractions such as `2/3`.
fn probability(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            n / d
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(format!("`{s}` is not in [0, 1]"))
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn run(cli: Cli) -> Result<bool> {
    let tol = cli.tol;
    match cli.command {
        Command::Simulate { qfa, word } => {
            let q = load_qfa(&qfa)?;
            let trace = q.run_str(&word)?;
            if cli.json {
                let steps: Vec<_> = trace
                    .events
                    .iter()
                    .map(|e| {
                        json!({"symbol": e.symbol.display(q.alphabet()), "accepted": e.accepted,
                               "rejected": e.rejected, "remaining": e.remaining})
                    })
                    .collect();
                print_json(&json!({"word": word, "steps": steps, "accepted": trace.accepted,
                    "rejected": trace.rejected, "undecided": trace.undecided(),
                    "decision": trace.decision(tol).to_string()}));
            } else {
                println!("{:<8} {:>16} {:>16} {:>16}", "symbol", "accepted", "rejected", "remaining");
                for e in &trace.events {
                    println!(
                        "{:<8} {:>16.12} {:>16.12} {:>16.12}",
                        e.symbol.display(q.alphabet()),
                        e.accepted,
                        e.rejected,
                        e.remaining
                    );
                }
                println!("accept    {}", format_probability(trace.accepted));
                println!("reject    {}", format_probability(trace.rejected));
                println!("undecided {}", format_probability(trace.undecided()));
                println!("decision  {}", trace.decision(tol));
            }
            Ok(true)
        }
        Command::Verify { qfa, oracle, max_len, p } => {
            let q = load_qfa(&qfa)?;
            let d = load_dfa(&oracle)?;
            let m = recognition_margin(&q, &d, max_len)?;
            let ok = p.is_none_or(|p| m.probability >= p - tol);
            let worst = q.alphabet().format(&m.worst_word);
            if cli.json {
                print_json(&json!({"probability": m.probability, "worst_word": worst,
                    "words_checked": m.words_checked, "pass": ok}));
            } else {
                println!("words checked      {}", m.words_checked);
                println!("worst probability  {}", format_probability(m.probability));
                println!("worst word         {worst}");
                if let Some(p) = p {
                    println!("required           {}  {}", format_probability(p), if ok { "PASS" } else { "FAIL" });
                }
            }
            Ok(ok)
        }
        Command::CheckT12 { dfa } => {
            let d = load_dfa(&dfa)?;
            let r = d.check_t12();
            if cli.json {
                let a = r.minimal.alphabet();
                print_json(&json!({
                    "minimal_states": r.minimal.num_states(),
                    "conditions": r.conditions(),
                    "q1": r.pattern.as_ref().map(|w| w.q1.clone()),
                    "q2": r.pattern.as_ref().map(|w| w.q2.clone()),
                    "x": r.pattern.as_ref().map(|w| a.format(&w.x)),
                    "y": r.cycle_back.as_ref().map(|y| a.format(y)),
                    "verdict": r.verdict().to_string(),
                }));
            } else {
                print!("{}", r.format_table());
            }
            Ok(true)
        }
        Command::Decompose { qfa, max_len } => {
            let q = load_qfa(&qfa)?;
            let d = decompose_nonhalting(&q);
            let inv = verify_invariance(&q, &d, max_len);
            let vectors = |b: &qfa_lab::analysis::SubspaceBasis| -> Vec<Vec<[f64; 2]>> {
                b.vectors().iter().map(|v| v.amplitudes().iter().map(|z| [z.re, z.im]).collect()).collect()
            };
            if cli.json {
                print_json(&json!({
                    "dim_e1": d.e1.dim(), "dim_e2": d.e2.dim(),
                    "dimensions": d.dimensions, "iterations_used": d.iterations_used,
                    "e1": vectors(&d.e1), "e2": vectors(&d.e2),
                    "words_checked": inv.words_checked,
                    "max_norm_defect": inv.max_norm_defect, "max_leakage": inv.max_leakage,
                    "pass": inv.passed(),
                }));
            } else {
                println!("states        {}", q.states().join(" "));
                println!("dim E1        {}", d.e1.dim());
                println!("dim E2        {}", d.e2.dim());
                println!("dimensions    {:?}", d.dimensions);
                println!("iterations    {}", d.iterations_used);
                for (name, basis) in [("E1", &d.e1), ("E2", &d.e2)] {
                    for (i, v) in basis.vectors().iter().enumerate() {
                        let coords: Vec<String> = v
                            .amplitudes()
                            .iter()
                            .map(|z| {
                                if z.im.abs() < 1e-12 {
                                    format!("{:.6}", z.re)
                                } else {
                                    format!("{:.6}{:+.6}i", z.re, z.im)
                                }
                            })
                            .collect();
                        println!("{name}[{}]       ({})", i + 1, coords.join(", "));
                    }
                }
                println!("words checked {} (|w| <= {max_len})", inv.words_checked);
                println!("norm defect   {:.3e}", inv.max_norm_defect);
                println!("E2 leakage    {:.3e}", inv.max_leakage);
            }
            Ok(inv.passed())
        }
        Command::UnionBuild { k1, p1, k2, p2, output } => {
            let a = load_qfa(&k1)?;
            let b = load_qfa(&k2)?;
            let w = union_weights(p1, p2)?;
            let u = probabilistic_union(&a, p1, &b, p2)?;
            let report = validate_qfa_with(&u, tol);
            save_automaton(&Automaton::Qfa(u), &output)?;
            if cli.json {
                print_json(&json!({"alpha1": w.alpha1, "alpha2": w.alpha2, "alpha3": w.alpha3,
                    "guaranteed_p": w.guaranteed_p, "output": output.display().to_string()}));
            } else {
                println!("alpha1        {}", format_probability(w.alpha1));
                println!("alpha2        {}", format_probability(w.alpha2));
                println!("alpha3        {}", format_probability(w.alpha3));
                println!("guaranteed p  {}", format_probability(w.guaranteed_p));
                print!("validation    {report}");
                println!("written to    {}", output.display());
            }
            Ok(true)
        }
        Command::Separability { points, alphabet, p1, p2, exact } => {
            let (below, above) = match (points, p1, p2) {
                (Some(path), _, _) => {
                    let alphabet = Alphabet::new(alphabet.split(',').map(str::trim))?;
                    let pts = load_points_csv(&path, &alphabet)?;
                    let pick = |m: bool| pts.iter().filter(|p| p.member == m).map(|p| Point::new(p.x, p.y)).collect::<Vec<_>>();
                    (pick(false), pick(true))
                }
                (None, Some(p1), Some(p2)) => {
                    let profile = if exact { RejectionProfile::Exact } else { RejectionProfile::Unrestricted };
                    union_regions(p1, p2, profile)
                }
                _ => bail!("give either --points or both --p1 and --p2"),
            };
            let line = separating_line(&below, &above)?;
            if cli.json {
                print_json(&match line {
                    Some(l) => json!({"separable": true, "a": l.a, "b": l.b, "c": l.c, "margin": l.margin}),
                    None => json!({"separable": false}),
                });
            } else {
                match line {
                    Some(l) => println!("separable: {:.9} x + {:.9} y = {:.9}, margin {:.9}", l.a, l.b, l.c, l.margin),
                    None => println!("not strictly separable"),
                }
            }
            Ok(true)
        }
        Command::TvCheck { trials, eps, seed } => {
            let mut rng = StdRng::seed_from_u64(seed);
            let c = tv_lemma_check(trials, eps, &mut rng)?;
            if cli.json {
                print_json(&json!({"trials": c.trials, "eps": c.eps, "max_ratio": c.max_ratio,
                    "violations": c.violations}));
            } else {
                println!("trials      {}", c.trials);
                println!("eps         {}", c.eps);
                println!("max Δ/ε     {:.6}", c.max_ratio);
                println!("violations  {}", c.violations);
            }
            Ok(c.violations == 0)
        }
        Command::Points { first, second, oracle, max_len, output } => {
            let a = load_qfa(&first)?;
            let b = load_qfa(&second)?;
            let d = load_dfa(&oracle)?;
            let pts = probability_points(&a, &b, &d, max_len)?;
            let csv = points_to_csv(&pts, a.alphabet());
            match output {
                Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(true)
        }
        Command::ReproducePaper { fixtures, max_len, seed } => {
            let f = match fixtures {
                Some(dir) => Fixtures::from_dir(&dir)?,
                None => Fixtures::bundled(),
            };
            let mut opts = ReproduceOptions { max_len, tolerance: tol, ..ReproduceOptions::default() };
            if let Some(s) = seed {
                opts.seed = s;
            }
            let rows = reproduce_paper(&f, &opts);
            if cli.json {
                print_json(&serde_json::to_value(&rows)?);
            } else {
                print!("{}", format_table(&rows));
            }
            Ok(all_pass(&rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
