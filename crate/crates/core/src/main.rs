use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use msc_tools::cfm::{accepts_msc, bounded_language_cfm, DEFAULT_CAP};
use msc_tools::cmsc::CMsc;
use msc_tools::compose::concat_pair;
use msc_tools::emso::evaluate;
use msc_tools::hmsc::{
    bounded_language, cmscs_of_path, hmsc_to_emso, loop_connected_bounded, safe_bounded, sat_search,
    weakly_loop_connected_exact, Hmsc, LoopVerdict, PipelineOptions, SafeVerdict, SatVerdict, WlcVerdict,
};
use msc_tools::io::{self, emit_cmsc, emit_hmsc_with_labels, Block, Document};
use msc_tools::reduce::{cm2_to_hmsc, pcp_to_hmsc, tm_to_hmsc};

/// Compositional MSCs, HMSCs and communicating automata.
///
/// Exit status: 0 on success, 1 for a violation or unknown verdict, 2 on
/// errors.
#[derive(Parser)]
#[command(name = "msc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Input {
    /// Input files; their blocks are merged.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(clap::Args)]
struct Pick {
    #[command(flatten)]
    input: Input,
    /// Block to use (default: the first of the right kind).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Pcp,
    Tm,
    Cm2,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate every block.
    Validate(Input),
    /// All cMSCs in the concatenation of two cMSCs.
    Concat {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Connectivity and weak connectivity of cMSCs.
    Connected(Pick),
    /// Communication graph of a cMSC.
    Commgraph(Pick),
    /// Bounded loop-connectedness of an HMSC.
    Loopcheck {
        #[command(flatten)]
        pick: Pick,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Exact weak loop-connectedness of an HMSC.
    WlcCheck(Pick),
    /// Bounded safety of an HMSC.
    SafeCheck {
        #[command(flatten)]
        pick: Pick,
        #[arg(long, default_value_t = 10)]
        bound: usize,
    },
    /// Translate an HMSC into an EMSO sentence.
    ToEmso {
        #[command(flatten)]
        pick: Pick,
        /// Skip the loop-connectedness check.
        #[arg(long)]
        no_loop_check: bool,
        #[arg(long, default_value_t = 8)]
        loop_bound: usize,
    },
    /// Evaluate a formula on cMSCs.
    Eval {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        formula: Option<String>,
        /// cMSC to check (default: every cMSC block).
        #[arg(long)]
        cmsc: Option<String>,
    },
    /// Bounded language of an HMSC.
    Lang {
        #[command(flatten)]
        pick: Pick,
        #[arg(long, default_value_t = 8)]
        max_path: usize,
        #[arg(long, default_value_t = 8)]
        max_events: usize,
    },
    /// Bounded satisfiability search of an HMSC.
    Sat {
        #[command(flatten)]
        pick: Pick,
        #[arg(long, default_value_t = 20)]
        max_steps: usize,
        #[arg(long, default_value_t = 16)]
        max_queue: usize,
    },
    /// Does a CFM accept a given MSC?
    CfmAccepts {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        cfm: Option<String>,
        #[arg(long)]
        cmsc: String,
    },
    /// Bounded language of a CFM.
    CfmLang {
        #[command(flatten)]
        pick: Pick,
        #[arg(long, default_value_t = 6)]
        max_events: usize,
    },
    /// Build the HMSC of a reduction instance.
    Reduce {
        problem: Problem,
        #[command(flatten)]
        pick: Pick,
    },
    /// Render a cMSC, HMSC or CFM.
    Render {
        #[command(flatten)]
        pick: Pick,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

macro_rules! say {
    (@raw $out:ident, $($arg:tt)*) => {{
        let _ = write!($out, $($arg)*);
    }};
    ($out:ident, $($arg:tt)*) => {{
        let _ = writeln!($out, $($arg)*);
    }};
}

fn load(input: &Input) -> Result<Document, Failure> {
    let mut doc = Document::default();
    for f in &input.files {
        doc.blocks.extend(io::load(f)?.blocks);
    }
    Ok(doc)
}

fn missing(kind: &str, name: Option<&str>) -> Failure {
    match name {
        Some(n) => Failure(format!("no {kind} block named `{n}`")),
        None => Failure(format!("no {kind} block in input")),
    }
}

fn hmsc_of(doc: &Document, name: Option<&str>) -> Result<Hmsc, Failure> {
    doc.hmsc(name).cloned().ok_or_else(|| missing("hmsc", name))
}

fn cmsc_of<'a>(doc: &'a Document, name: &str) -> Result<&'a CMsc, Failure> {
    doc.cmsc(Some(name)).ok_or_else(|| missing("cmsc", Some(name)))
}

fn print_msc_list(out: &mut String, prefix: &str, ms: impl IntoIterator<Item = CMsc>) -> usize {
    let mut n = 0;
    for m in ms {
        n += 1;
        let mut text = String::new();
        emit_cmsc(&mut text, &format!("{prefix}{n}"), &m);
        say!(out, "{text}");
    }
    n
}

fn path_text(h: &Hmsc, path: &[usize]) -> String {
    path.iter()
        .map(|&t| {
            let tr = h.transitions[t];
            format!("{} -{}-> {}", h.states[tr.from], h.label_name(t), h.states[tr.to])
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn run(cmd: Command, out: &mut String) -> Outcome {
    match cmd {
        Command::Validate(input) => {
            let doc = load(&input)?;
            for b in &doc.blocks {
                match b {
                    Block::Cmsc(n, m) => say!(out, "ok cmsc {n}: {} events, msc={}", m.len(), m.is_msc()),
                    Block::Hmsc(n, h) => say!(out, 
                        "ok hmsc {n}: {} states, {} transitions",
                        h.states.len(),
                        h.transitions.len()
                    ),
                    other => say!(out, "ok {} {}", other.kind(), other.name()),
                }
            }
            Ok(true)
        }
        Command::Concat { input, left, right } => {
            let doc = load(&input)?;
            let (m1, m2) = (cmsc_of(&doc, &left)?, cmsc_of(&doc, &right)?);
            let results = concat_pair(m1, m2);
            say!(out, "# {} cMSC(s)", results.len());
            print_msc_list(out, &format!("{left}_{right}_"), results);
            Ok(true)
        }
        Command::Connected(pick) => {
            let doc = load(&pick.input)?;
            let mut all = true;
            for (n, m) in doc.cmscs().filter(|(n, _)| pick.name.as_deref().map_or(true, |w| w == *n)) {
                let c = m.connected();
                all &= c;
                say!(out, "{n}: connected={c} weakly_connected={}", m.weakly_connected());
            }
            Ok(all)
        }
        Command::Commgraph(pick) => {
            let doc = load(&pick.input)?;
            let name = pick.name.as_deref();
            let m = doc.cmsc(name).ok_or_else(|| missing("cmsc", name))?;
            let g = m.communication_graph();
            let nodes: Vec<&str> = g.nodes.iter().map(|p| p.as_str()).collect();
            say!(out, "nodes: {}", nodes.join(" "));
            for (p, q) in &g.edges {
                say!(out, "edge: {p} -- {q}");
            }
            say!(out, "connected: {}", g.is_connected());
            Ok(true)
        }
        Command::Loopcheck { pick, bound } => {
            let h = hmsc_of(&load(&pick.input)?, pick.name.as_deref())?;
            Ok(match loop_connected_bounded(&h, bound) {
                LoopVerdict::Pass { bound } => {
                    say!(out, "verdict: PASS\nbound: {bound}");
                    true
                }
                LoopVerdict::Violation { cycle } => {
                    say!(out, "verdict: VIOLATION\ncycle: {}", path_text(&h, &cycle));
                    false
                }
            })
        }
        Command::WlcCheck(pick) => {
            let h = hmsc_of(&load(&pick.input)?, pick.name.as_deref())?;
            Ok(match weakly_loop_connected_exact(&h)? {
                WlcVerdict::Pass => {
                    say!(out, "verdict: PASS");
                    true
                }
                WlcVerdict::Violation { cycle } => {
                    say!(out, "verdict: VIOLATION\ncycle: {}", path_text(&h, &cycle));
                    false
                }
            })
        }
        Command::SafeCheck { pick, bound } => {
            let h = hmsc_of(&load(&pick.input)?, pick.name.as_deref())?;
            Ok(match safe_bounded(&h, bound)? {
                SafeVerdict::Safe { bound } => {
                    say!(out, "verdict: SAFE\nbound: {bound}");
                    true
                }
                SafeVerdict::Unsafe { path } => {
                    say!(out, "verdict: UNSAFE\npath: {}", path_text(&h, &path));
                    false
                }
            })
        }
        Command::ToEmso {
            pick,
            no_loop_check,
            loop_bound,
        } => {
            let name = pick.name.clone().unwrap_or_else(|| "H".into());
            let h = hmsc_of(&load(&pick.input)?, pick.name.as_deref())?;
            let phi = hmsc_to_emso(
                &h,
                PipelineOptions {
                    check_loops: !no_loop_check,
                    loop_bound,
                },
            )?;
            say!(out, "formula {name}_emso\n{phi}");
            Ok(true)
        }
        Command::Eval { input, formula, cmsc } => {
            let doc = load(&input)?;
            let phi = doc.formula(formula.as_deref()).ok_or_else(|| missing("formula", formula.as_deref()))?;
            for (n, m) in doc.cmscs().filter(|(n, _)| cmsc.as_deref().map_or(true, |w| w == *n)) {
                say!(out, "{n}: {}", evaluate(phi, m)?);
            }
            Ok(true)
        }
        Command::Lang {
            pick,
            max_path,
            max_events,
        } => {
            let h = hmsc_of(&load(&pick.input)?, pick.name.as_deref())?;
            let lang = bounded_language(&h, max_path, max_events);
            say!(out, 
                "# {} MSC(s); path bound hit: {}; event bound hit: {}",
                lang.mscs.len(),
                lang.path_bound_hit,
                lang.event_bound_hit
            );
            print_msc_list(out, "L", lang.mscs.into_values());
            Ok(true)
        }
        Command::Sat {
            pick,
            max_steps,
            max_queue,
        } => {
            let h = hmsc_of(&load(&pick.input)?, pick.name.as_deref())?;
            Ok(match sat_search(&h, max_steps, max_queue) {
                SatVerdict::Sat { path } => {
                    say!(out, "verdict: SAT\npath: {}", path_text(&h, &path));
                    let witness = cmscs_of_path(&h, &path)?.into_values().find(|m| m.is_msc());
                    if let Some(m) = witness {
                        print_msc_list(out, "witness", [m]);
                    }
                    true
                }
                SatVerdict::Unknown { explored } => {
                    say!(out, "verdict: UNKNOWN\nexplored: {explored}");
                    false
                }
            })
        }
        Command::CfmAccepts { input, cfm, cmsc } => {
            let doc = load(&input)?;
            let a = doc.cfm(cfm.as_deref()).ok_or_else(|| missing("cfm", cfm.as_deref()))?;
            let ok = accepts_msc(a, cmsc_of(&doc, &cmsc)?, DEFAULT_CAP)?;
            say!(out, "verdict: {}", if ok { "ACCEPTED" } else { "REJECTED" });
            Ok(ok)
        }
        Command::CfmLang { pick, max_events } => {
            let doc = load(&pick.input)?;
            let name = pick.name.as_deref();
            let a = doc.cfm(name).ok_or_else(|| missing("cfm", name))?;
            let lang = bounded_language_cfm(a, max_events);
            say!(out, "# {} MSC(s)", lang.len());
            print_msc_list(out, "L", lang.into_values());
            Ok(true)
        }
        Command::Reduce { problem, pick } => {
            let doc = load(&pick.input)?;
            let name = pick.name.as_deref();
            let (block, h) = match problem {
                Problem::Pcp => ("pcp", doc.pcp(name).map(pcp_to_hmsc)),
                Problem::Tm => ("tm", doc.tm(name).map(tm_to_hmsc)),
                Problem::Cm2 => ("cm", doc.cm(name).map(cm2_to_hmsc)),
            };
            let h = h.ok_or_else(|| missing(block, name))??;
            say!(@raw out, "{}", emit_hmsc_with_labels("H", &h));
            Ok(true)
        }
        Command::Render { pick, format: Format::Dot } => {
            let doc = load(&pick.input)?;
            let want = pick.name.as_deref();
            // without a name, an hmsc wins over a cfm, which wins over a cmsc
            let rank = |b: &Block| match b {
                Block::Hmsc(..) => Some(0),
                Block::Cfm(..) => Some(1),
                Block::Cmsc(..) => Some(2),
                _ => None,
            };
            let block = doc
                .blocks
                .iter()
                .filter(|b| rank(b).is_some() && want.map_or(true, |w| w == b.name()))
                .min_by_key(|b| rank(b))
                .ok_or_else(|| missing("cmsc, hmsc or cfm", want))?;
            say!(@raw out,
                "{}",
                match block {
                    Block::Cmsc(n, m) => io::render_cmsc(n, m),
                    Block::Hmsc(n, h) => io::render_hmsc(n, h),
                    Block::Cfm(n, a) => io::render_cfm(n, a),
                    _ => unreachable!("filtered above"),
                }
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = String::new();
    let result = run(cli.command, &mut out);
    // a closed pipe on stdout is not an error worth reporting
    let _ = std::io::stdout().write_all(out.as_bytes());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
