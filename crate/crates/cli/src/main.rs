//! Command-line surface over the treeclone library: automaton algebra,
//! syntactic truncations, definability checks, and pseudovariety queries.
//!
//! Exit codes: 0 success or positive verdict, 1 negative verdict,
//! 2 usage or parse error, 3 inconclusive at the given caps.

use std::collections::BTreeSet;
use std::fs;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use treeclone::algebra::{equivalent, BoolOp, Dfta, RecLang};
use treeclone::corpus::{
    boolean_alphabet, build_exists, build_modcount, build_next, build_path,
    build_reference_preclone, build_root1, RefPreclone,
};
use treeclone::deciders::{check_ef_with, check_ex, check_fosucc, Verdict, DEFAULT_PERM_MAX};
use treeclone::preclone::{default_rank_cap, syntactic_pgpair, PgPairTrunc, Transf};
use treeclone::psv::{
    divides, member_generated, Certificate, DivisionOutcome, PsvMembership, SearchLimits,
};
use treeclone::terms::{parse_tree, print_tree, Tree, TreeTuple};

#[derive(Parser)]
#[command(
    name = "treeclone",
    version,
    about = "tree automata, their preclones, and definability checks"
)]
struct Cli {
    /// Emit the result as a JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timings in the output (off by default so repeated
    /// runs are byte-identical).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RankCap {
    /// Rank cap for truncations; defaults to max(2, max letter arity).
    #[arg(long)]
    max_rank: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoolVerb {
    Union,
    Intersection,
    Difference,
    Complement,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Ex,
    Ef,
    Fosucc,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuotientSide {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitKind {
    Automaton,
    Preclone,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize an automaton and print its canonical form.
    Min { automaton: String },
    /// Evaluate a ground tree to its state.
    Eval { automaton: String, tree: String },
    /// Test membership of a ground tree in the automaton's language.
    Member { automaton: String, tree: String },
    /// Boolean combinations of automata over a common alphabet.
    Bool {
        op: BoolVerb,
        a: String,
        b: Option<String>,
    },
    /// Language equality of two automata over a common alphabet.
    Equal { a: String, b: String },
    /// Print the truncated syntactic pg-pair of the automaton's language.
    Synt {
        automaton: String,
        #[command(flatten)]
        cap: RankCap,
    },
    /// Quotient of the automaton's rank-0 language by a context.
    Quotient {
        side: QuotientSide,
        automaton: String,
        /// The context: one rank-(k1+1+k2) tree for left, the tuple
        /// components (ground trees) for right.
        terms: Vec<String>,
        #[arg(long, default_value_t = 0)]
        k1: usize,
        #[arg(long, default_value_t = 0)]
        k2: usize,
    },
    /// Decide definability of the automaton's language.
    Check {
        kind: CheckKind,
        automaton: String,
        #[command(flatten)]
        cap: RankCap,
        /// Refuse permutation clauses above this letter arity.
        #[arg(long, default_value_t = DEFAULT_PERM_MAX)]
        perm_max: usize,
        /// Also print the raw tables of witness elements.
        #[arg(long)]
        verbose: bool,
    },
    /// Does the syntactic pg-pair of T divide the m-th power of that of S?
    Divide {
        t: String,
        s: String,
        #[arg(long, default_value_t = 1)]
        power: usize,
        #[command(flatten)]
        cap: RankCap,
        #[arg(long, default_value_t = 2_000_000)]
        max_assignments: u64,
    },
    /// Membership of T in the pseudovariety generated by S, by iterative
    /// deepening on the power.
    PsvMember {
        t: String,
        s: String,
        #[arg(long, default_value_t = 4)]
        max_power: usize,
        #[command(flatten)]
        cap: RankCap,
        #[arg(long, default_value_t = 2_000_000)]
        max_assignments: u64,
    },
    /// Emit a built-in automaton or reference preclone.
    Corpus {
        /// exists | modcount <p> <r> | path | next | root1 |
        /// t_exists | t_p <p> | t_pq <p> <q> | t_path
        name: String,
        params: Vec<usize>,
        #[arg(long, value_enum, default_value_t = EmitKind::Automaton)]
        emit: EmitKind,
        /// Arities of the Boolean alphabet, comma separated.
        #[arg(long, default_value = "0,2")]
        arities: String,
        #[command(flatten)]
        cap: RankCap,
    },
}

struct Failure {
    message: String,
    code: u8,
}

impl From<treeclone::Error> for Failure {
    fn from(e: treeclone::Error) -> Failure {
        Failure {
            message: e.to_string(),
            code: 2,
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        message: message.into(),
        code: 2,
    }
}

struct Report {
    text: String,
    json: Value,
    exit: u8,
}

fn load_automaton(path: &str) -> Result<Dfta, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {}", path, e)))?;
    Ok(Dfta::parse(&text, path)?)
}

fn table_string(t: &Transf) -> String {
    let entries: Vec<String> = t.table.iter().map(u32::to_string).collect();
    format!("[{}]", entries.join(" "))
}

fn verdict_report(kind: &str, v: &Verdict, verbose: bool, inputs: &[&str]) -> Report {
    let mut text = format!("{}: {}\n", kind, if v.answer { "yes" } else { "no" });
    if let (Some(id), Some(w)) = (v.condition_id, &v.witness) {
        let parts: Vec<String> = w
            .parts
            .iter()
            .map(|p| {
                if verbose {
                    format!(
                        "{}={}{}",
                        p.role,
                        print_tree(&p.term),
                        table_string(&p.transf)
                    )
                } else {
                    format!("{}={}", p.role, print_tree(&p.term))
                }
            })
            .collect();
        text.push_str(&format!(
            "condition={} witness: {} lhs={} rhs={}\n",
            id,
            parts.join(" "),
            table_string(&w.lhs),
            table_string(&w.rhs)
        ));
    }
    let witness_json = v.witness.as_ref().map(|w| {
        json!({
            "parts": w.parts.iter().map(|p| json!({
                "role": p.role,
                "term": print_tree(&p.term),
                "table": p.transf.table,
            })).collect::<Vec<_>>(),
            "lhs": w.lhs.table,
            "rhs": w.rhs.table,
        })
    });
    let json = json!({
        "verb": format!("check {}", kind.to_lowercase()),
        "inputs": inputs,
        "caps": { "max_rank": v.caps.rank_cap, "perm_max": v.caps.perm_max },
        "verdict": if v.answer { "yes" } else { "no" },
        "condition": v.condition_id,
        "clauses": v.clauses.iter().map(|(id, ok)| json!({"id": id, "ok": ok})).collect::<Vec<_>>(),
        "witness": witness_json,
    });
    Report {
        text,
        json,
        exit: u8::from(!v.answer),
    }
}

fn certificate_lines(
    t: &PgPairTrunc,
    s: &treeclone::preclone::PrecloneTrunc,
    cert: &Certificate,
) -> Vec<String> {
    t.preclone
        .generators
        .iter()
        .zip(cert.assignment.iter())
        .map(|(g, tuple)| {
            let images: Vec<String> = tuple
                .iter()
                .map(|&i| print_tree(&s.generators[i].witness))
                .collect();
            format!("{} \u{21a6} ({})", print_tree(&g.witness), images.join(","))
        })
        .collect()
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Min { automaton } => {
            let a = load_automaton(automaton)?;
            let min = a.minimize();
            let text = min.to_string();
            let json = json!({
                "verb": "min",
                "inputs": [automaton],
                "caps": {},
                "verdict": { "states": min.state_count() },
                "automaton": text,
            });
            Ok(Report {
                text,
                json,
                exit: 0,
            })
        }
        Command::Eval { automaton, tree } => {
            let a = load_automaton(automaton)?;
            let t = parse_tree(tree, a.alphabet())?;
            let q = a.evaluate(&t)?;
            let name = a.state_name(q).to_owned();
            Ok(Report {
                text: format!("eval: {}\n", name),
                json: json!({
                    "verb": "eval",
                    "inputs": [automaton, tree],
                    "caps": {},
                    "verdict": name,
                }),
                exit: 0,
            })
        }
        Command::Member { automaton, tree } => {
            let a = load_automaton(automaton)?;
            let t = parse_tree(tree, a.alphabet())?;
            let yes = a.accepts(&t)?;
            Ok(Report {
                text: format!("member: {}\n", if yes { "yes" } else { "no" }),
                json: json!({
                    "verb": "member",
                    "inputs": [automaton, tree],
                    "caps": {},
                    "verdict": if yes { "yes" } else { "no" },
                }),
                exit: u8::from(!yes),
            })
        }
        Command::Bool { op, a, b } => {
            let left = load_automaton(a)?;
            let combined = match op {
                BoolVerb::Complement => {
                    if b.is_some() {
                        return Err(usage("complement takes a single automaton"));
                    }
                    left.complement()
                }
                other => {
                    let b = b
                        .as_ref()
                        .ok_or_else(|| usage("this operation needs two automata"))?;
                    let right = load_automaton(b)?;
                    let op = match other {
                        BoolVerb::Union => BoolOp::Union,
                        BoolVerb::Intersection => BoolOp::Intersection,
                        BoolVerb::Difference => BoolOp::Difference,
                        BoolVerb::Complement => unreachable!(),
                    };
                    Dfta::boolean_op(op, &left, &right)?
                }
            };
            let text = combined.to_string();
            let json = json!({
                "verb": "bool",
                "inputs": [a, b],
                "caps": {},
                "verdict": { "states": combined.state_count() },
                "automaton": text,
            });
            Ok(Report {
                text,
                json,
                exit: 0,
            })
        }
        Command::Equal { a, b } => {
            let x = load_automaton(a)?;
            let y = load_automaton(b)?;
            let eq = equivalent(&x, &y)?;
            Ok(Report {
                text: format!("equal: {}\n", if eq { "yes" } else { "no" }),
                json: json!({
                    "verb": "equal",
                    "inputs": [a, b],
                    "caps": {},
                    "verdict": if eq { "yes" } else { "no" },
                }),
                exit: u8::from(!eq),
            })
        }
        Command::Synt { automaton, cap } => {
            let a = load_automaton(automaton)?;
            let k = cap
                .max_rank
                .unwrap_or_else(|| default_rank_cap(a.alphabet()));
            let pg = syntactic_pgpair(&a, k)?;
            let text = pg.preclone.dump();
            let json = json!({
                "verb": "synt",
                "inputs": [automaton],
                "caps": { "max_rank": k },
                "verdict": { "level_sizes": pg.preclone.level_sizes() },
                "dump": text,
            });
            for w in &pg.preclone.warnings {
                eprintln!("warning: {}", w);
            }
            Ok(Report {
                text,
                json,
                exit: 0,
            })
        }
        Command::Quotient {
            side,
            automaton,
            terms,
            k1,
            k2,
        } => {
            let a = Arc::new(load_automaton(automaton)?);
            let lang = RecLang::of_automaton(a.clone());
            let result = match side {
                QuotientSide::Left => {
                    let [u] = terms.as_slice() else {
                        return Err(usage("left quotient takes exactly one context tree"));
                    };
                    let u = parse_tree(u, a.alphabet())?;
                    lang.left_quotient(&u, *k1, *k2)?
                }
                QuotientSide::Right => {
                    if terms.is_empty() {
                        return Err(usage("right quotient takes the tuple components"));
                    }
                    let parsed: Result<Vec<Tree>, _> =
                        terms.iter().map(|t| parse_tree(t, a.alphabet())).collect();
                    lang.right_quotient(&TreeTuple::new(parsed?))?
                }
            };
            let text = if result.rank == 0 {
                // a rank-0 quotient is again an automaton language: same
                // automaton, accepting constants as finals
                let finals: BTreeSet<u32> = result.accepting.iter().map(|table| table[0]).collect();
                let quotient_dfta = Dfta::new(
                    a.alphabet().clone(),
                    a.state_names().to_vec(),
                    a.alphabet().ids().map(|s| a.table(s).to_vec()).collect(),
                    finals,
                )?;
                quotient_dfta.to_string()
            } else {
                let mut out = format!(
                    "# quotient rank {} accepting {} elements\n",
                    result.rank,
                    result.accepting.len()
                );
                for table in &result.accepting {
                    let entries: Vec<String> = table.iter().map(u32::to_string).collect();
                    out.push_str(&format!("rank {}: [{}]\n", result.rank, entries.join(" ")));
                }
                out
            };
            let json = json!({
                "verb": "quotient",
                "inputs": [automaton, terms],
                "caps": { "k1": k1, "k2": k2 },
                "verdict": { "rank": result.rank, "accepting": result.accepting.len() },
                "output": text,
            });
            Ok(Report {
                text,
                json,
                exit: 0,
            })
        }
        Command::Check {
            kind,
            automaton,
            cap,
            perm_max,
            verbose,
        } => {
            let a = load_automaton(automaton)?;
            let k = cap
                .max_rank
                .unwrap_or_else(|| default_rank_cap(a.alphabet()));
            let pg = syntactic_pgpair(&a, k)?;
            let (label, verdict) = match kind {
                CheckKind::Ex => ("EX", check_ex(&pg)?),
                CheckKind::Ef => ("EF", check_ef_with(&pg, *perm_max)?),
                CheckKind::Fosucc => ("FOSucc", check_fosucc(&pg)?),
            };
            Ok(verdict_report(label, &verdict, *verbose, &[automaton]))
        }
        Command::Divide {
            t,
            s,
            power,
            cap,
            max_assignments,
        } => {
            let ta = load_automaton(t)?;
            let sa = load_automaton(s)?;
            let k = cap.max_rank.unwrap_or_else(|| {
                default_rank_cap(ta.alphabet()).max(default_rank_cap(sa.alphabet()))
            });
            let tp = syntactic_pgpair(&ta, k)?;
            let sp = syntactic_pgpair(&sa, k)?;
            let limits = SearchLimits {
                max_assignments: *max_assignments,
                ..SearchLimits::default()
            };
            let outcome = divides(&tp, &sp.preclone, *power, k, &limits)?;
            let (text, verdict, cert_json, exit) = match &outcome {
                DivisionOutcome::Divides(cert) => {
                    let lines = certificate_lines(&tp, &sp.preclone, cert);
                    (
                        format!("divides: yes (power {})\n{}\n", power, lines.join("\n")),
                        "yes",
                        Some(json!(cert.assignment)),
                        0u8,
                    )
                }
                DivisionOutcome::NotDivides => {
                    (format!("divides: no (power {})\n", power), "no", None, 1)
                }
                DivisionOutcome::Inconclusive { reason } => (
                    format!("divides: inconclusive ({})\n", reason),
                    "inconclusive",
                    None,
                    3,
                ),
            };
            let json = json!({
                "verb": "divide",
                "inputs": [t, s],
                "caps": { "max_rank": k, "power": power, "max_assignments": max_assignments },
                "verdict": verdict,
                "certificate": cert_json,
            });
            Ok(Report { text, json, exit })
        }
        Command::PsvMember {
            t,
            s,
            max_power,
            cap,
            max_assignments,
        } => {
            let ta = load_automaton(t)?;
            let sa = load_automaton(s)?;
            let k = cap.max_rank.unwrap_or_else(|| {
                default_rank_cap(ta.alphabet()).max(default_rank_cap(sa.alphabet()))
            });
            let tp = syntactic_pgpair(&ta, k)?;
            let sp = syntactic_pgpair(&sa, k)?;
            let limits = SearchLimits {
                max_assignments: *max_assignments,
                ..SearchLimits::default()
            };
            let outcome = member_generated(&tp, &sp, k, *max_power, &limits)?;
            let (text, verdict, extra, exit) = match &outcome {
                PsvMembership::Member { certificate } => {
                    let lines = certificate_lines(&tp, &sp.preclone, certificate);
                    (
                        format!(
                            "psv-member: yes (power {})\n{}\n",
                            certificate.exponent,
                            lines.join("\n")
                        ),
                        "yes",
                        json!({ "power": certificate.exponent, "certificate": certificate.assignment }),
                        0u8,
                    )
                }
                PsvMembership::NotWithinCap {
                    searched_cap,
                    bound,
                    conclusive,
                } => {
                    let bound_str = bound.map_or("unbounded".to_owned(), |b| b.to_string());
                    let label = if *conclusive {
                        "no"
                    } else {
                        "no (inconclusive-if-false)"
                    };
                    (
                        format!(
                            "psv-member: {} searched powers <= {} (search bound {})\n",
                            label, searched_cap, bound_str
                        ),
                        if *conclusive {
                            "no"
                        } else {
                            "inconclusive-if-false"
                        },
                        json!({ "searched": searched_cap, "bound": bound }),
                        if *conclusive { 1 } else { 3 },
                    )
                }
                PsvMembership::Inconclusive {
                    searched_cap,
                    bound,
                    reason,
                } => (
                    format!(
                        "psv-member: inconclusive at power {} ({})\n",
                        searched_cap, reason
                    ),
                    "inconclusive",
                    json!({ "searched": searched_cap, "bound": bound, "reason": reason }),
                    3,
                ),
            };
            let json = json!({
                "verb": "psv-member",
                "inputs": [t, s],
                "caps": { "max_rank": k, "max_power": max_power, "max_assignments": max_assignments },
                "verdict": verdict,
                "detail": extra,
            });
            Ok(Report { text, json, exit })
        }
        Command::Corpus {
            name,
            params,
            emit,
            arities,
            cap,
        } => {
            let arities: Vec<usize> = arities
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| usage(format!("bad arity list {:?}", arities)))
                })
                .collect::<Result<_, _>>()?;
            let alphabet = boolean_alphabet(&arities)?;
            let k = cap.max_rank.unwrap_or_else(|| default_rank_cap(&alphabet));
            enum Built {
                Automaton(Dfta),
                Reference(RefPreclone),
            }
            let built = match (name.as_str(), params.as_slice()) {
                ("exists", []) => Built::Automaton(build_exists(&alphabet)),
                ("modcount", [p, r]) => Built::Automaton(build_modcount(&alphabet, *p, *r)?),
                ("path", []) => Built::Automaton(build_path(&alphabet)),
                ("next", []) => Built::Automaton(build_next(&alphabet)),
                ("root1", []) => Built::Automaton(build_root1(&alphabet)),
                ("t_exists", []) => Built::Reference(RefPreclone::Exists),
                ("t_p", [p]) => Built::Reference(RefPreclone::ModP(*p)),
                ("t_pq", [p, q]) => Built::Reference(RefPreclone::ModThreshold(*p, *q)),
                ("t_path", []) => Built::Reference(RefPreclone::Path),
                _ => {
                    return Err(usage(format!(
                        "unknown corpus entry {:?} with {} parameter(s)",
                        name,
                        params.len()
                    )))
                }
            };
            let text = match (built, emit) {
                (Built::Automaton(a), EmitKind::Automaton) => a.to_string(),
                (Built::Automaton(a), EmitKind::Preclone) => {
                    syntactic_pgpair(&a, k)?.preclone.dump()
                }
                (Built::Reference(r), EmitKind::Preclone) => {
                    build_reference_preclone(r, &alphabet, k)?.preclone.dump()
                }
                (Built::Reference(_), EmitKind::Automaton) => {
                    return Err(usage(
                        "reference preclones have no automaton form; use --emit preclone",
                    ))
                }
            };
            let json = json!({
                "verb": "corpus",
                "inputs": [name, params],
                "caps": { "max_rank": k },
                "verdict": "ok",
                "output": text,
            });
            Ok(Report {
                text,
                json,
                exit: 0,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                let mut value = report.json;
                if let Value::Object(map) = &mut value {
                    let timings = if cli.timings {
                        json!({ "total_ms": start.elapsed().as_millis() as u64 })
                    } else {
                        Value::Null
                    };
                    map.insert("timings".to_owned(), timings);
                }
                println!(
                    "{}",
                    serde_json::to_string_pretty(&value).expect("serializable")
                );
            } else {
                print!("{}", report.text);
                if cli.timings {
                    println!("timings: {} ms", start.elapsed().as_millis());
                }
            }
            ExitCode::from(report.exit)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
