use std::io::Read;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use satreal::oracle::{self, Census, TheoremReport};
use satreal::parse::{parse_bezout, parse_edges, parse_order, Edge};
use satreal::realizer::{realize_with, OffsetPolicy, RealizeOptions};
use satreal::tightpair::{
    build_cp2_instance, build_cpq_instance, macbrough_fixed_point, macbrough_realize,
};
use satreal::{enumerate_all, CyclicOrder, Error, IndexingSet, TransferSystem};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "satreal",
    version,
    about = "Realize saturated transfer systems on cyclic groups by indexing sets"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// List the subgroups of the group.
    Subgroups(OrderArg),
    /// List every transfer system on the subgroup lattice.
    Enumerate {
        #[command(flatten)]
        order: OrderArg,
        /// Only saturated systems.
        #[arg(long)]
        saturated: bool,
    },
    /// Build an indexing set realizing a saturated transfer system.
    Realize {
        #[command(flatten)]
        system: SystemArgs,
        /// Bezout coefficients u,v with u*q + v*p = 1.
        #[arg(long, allow_hyphen_values = true)]
        bezout: Option<String>,
        /// canonical or paper-c35.
        #[arg(long, default_value = "canonical")]
        offset_policy: String,
    },
    /// Check that an indexing set realizes a transfer system.
    Verify {
        /// Order as p,n,q,m or N.
        #[arg(long, required_unless_present = "certificate")]
        order: Option<String>,
        /// Comma-separated residues.
        #[arg(long, required_unless_present = "certificate")]
        set: Option<String>,
        /// Expected system: inline JSON, a file, or - for stdin.
        #[arg(long, required_unless_present = "certificate")]
        edges: Option<String>,
        /// A certificate written by `realize` (file or -).
        #[arg(long, conflicts_with_all = ["order", "set", "edges"])]
        certificate: Option<String>,
    },
    /// Exhaustive or sampled census of realizable systems.
    Oracle {
        #[command(flatten)]
        order: OrderArg,
        /// Largest exhaustive sweep, in pair bits.
        #[arg(long, env = "SATREAL_CAP", default_value_t = oracle::DEFAULT_CAP_BITS)]
        cap: u32,
        /// Sample this many indexing sets instead of sweeping all of them.
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare with the diagram-extension construction.
    CompareMacbrough {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1)]
        j: u64,
        #[arg(long, default_value_t = 1)]
        k: u64,
    },
    /// Hasse diagram of a transfer system in DOT.
    ExportDot {
        #[command(flatten)]
        system: SystemArgs,
    },
}

#[derive(Args)]
struct OrderArg {
    /// Order as p,n,q,m or N.
    #[arg(long)]
    order: String,
}

#[derive(Args)]
struct SystemArgs {
    /// Order as p,n,q,m or N.
    #[arg(long)]
    order: String,
    /// Non-trivial edges: inline JSON, a file, or - for stdin.
    #[arg(long, default_value = "[]")]
    edges: String,
    /// Close the edges under the transfer-system axioms instead of
    /// requiring them to be closed already.
    #[arg(long)]
    generate: bool,
}

/// Exit status 1: the computation ran and the answer is "no".
#[derive(Debug)]
struct Rejected;

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for Rejected {}

fn read_source(arg: &str) -> anyhow::Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        return Ok(buf);
    }
    std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
}

fn load_system(
    order: &CyclicOrder,
    edges_arg: &str,
    generate: bool,
) -> anyhow::Result<TransferSystem> {
    let (declared, edges) = parse_edges(&read_source(edges_arg)?)?;
    if let Some(d) = declared {
        if !d.same_lattice(order) {
            bail!("edges were written for {d}, not {order}");
        }
    }
    build_system(order, &edges, generate)
}

fn build_system(
    order: &CyclicOrder,
    edges: &[Edge],
    generate: bool,
) -> anyhow::Result<TransferSystem> {
    let t = if generate {
        TransferSystem::generate(*order, edges)?
    } else {
        TransferSystem::from_nontrivial(*order, edges)?
    };
    Ok(t)
}

impl SystemArgs {
    fn load(&self) -> anyhow::Result<TransferSystem> {
        let order = parse_order(&self.order)?;
        load_system(&order, &self.edges, self.generate)
    }
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("values serialize")
    );
}

fn edge_list(t: &TransferSystem) -> Value {
    json!(t.nontrivial_edges())
}

fn edges_text(t: &TransferSystem) -> String {
    let parts: Vec<String> = t
        .nontrivial_edges()
        .iter()
        .map(|(x, y)| format!("{x}->{y}"))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Subgroups(o) => {
            let order = parse_order(&o.order)?;
            let subs: Vec<Value> = order
                .all_subgroups()
                .into_iter()
                .map(|s| json!({"subgroup": s, "order": order.divisor(s), "label": order.label(s)}))
                .collect();
            match format {
                Format::Text => {
                    for s in order.all_subgroups() {
                        println!("{s}\t{}\t{}", order.divisor(s), order.label(s));
                    }
                }
                _ => print_json(&json!({"schema": SCHEMA, "order": order, "subgroups": subs})),
            }
        }
        Command::Enumerate { order, saturated } => {
            let order = parse_order(&order.order)?;
            let all = enumerate_all(order, saturated)?;
            match format {
                Format::Text => {
                    for t in &all {
                        println!("{}", edges_text(t));
                    }
                }
                Format::Dot => {
                    for t in &all {
                        print!("{}", t.to_dot());
                    }
                }
                Format::Json => {
                    let systems: Vec<Value> = all.iter().map(edge_list).collect();
                    print_json(&json!({
                        "schema": SCHEMA,
                        "order": order,
                        "saturated_only": saturated,
                        "count": all.len(),
                        "systems": systems,
                    }));
                }
            }
        }
        Command::Realize {
            system,
            bezout,
            offset_policy,
        } => {
            let t = system.load()?;
            let opts = RealizeOptions {
                bezout: bezout.as_deref().map(parse_bezout).transpose()?,
                policy: offset_policy.parse::<OffsetPolicy>()?,
            };
            let realization = realize_with(&t, &opts)?;
            let cert = realization.certificate()?;
            match format {
                Format::Text => {
                    println!("{}", cert.indexing_set.to_list_string());
                    println!("{}", cert.universe);
                }
                Format::Dot => print!("{}", cert.indexing_set.realized_system(t.order())?.to_dot()),
                Format::Json => print_json(&serde_json::to_value(&cert)?),
            }
            if !cert.verdicts.all() {
                return Err(Rejected.into());
            }
        }
        Command::Verify {
            order,
            set,
            edges,
            certificate,
        } => {
            let (order, set, expected) = match certificate {
                Some(path) => certificate_inputs(&read_source(&path)?)?,
                None => {
                    let order = parse_order(order.as_deref().expect("required by clap"))?;
                    let set = IndexingSet::parse_list(
                        order.modulus(),
                        set.as_deref().expect("required by clap"),
                    )?;
                    let expected =
                        load_system(&order, edges.as_deref().expect("required by clap"), false)?;
                    (order, set, expected)
                }
            };
            let realized = set.realized_system(&order)?;
            let ok = realized == expected;
            match format {
                Format::Text => {
                    println!("realized: {}", edges_text(&realized));
                    println!("expected: {}", edges_text(&expected));
                    println!("{}", if ok { "verified" } else { "mismatch" });
                }
                Format::Dot => print!("{}", realized.to_dot()),
                Format::Json => print_json(&json!({
                    "schema": SCHEMA,
                    "order": order,
                    "indexing_set": set,
                    "realized": edge_list(&realized),
                    "expected": edge_list(&expected),
                    "saturated": realized.is_saturated(),
                    "star": set.star_holds(&order)?,
                    "verified": ok,
                })),
            }
            if !ok {
                return Err(Rejected.into());
            }
        }
        Command::Oracle {
            order,
            cap,
            sample,
            seed,
        } => {
            let order = parse_order(&order.order)?;
            let census = match sample {
                Some(n) => oracle::sampled_census(&order, n, seed)?,
                None => oracle::realizability_census(&order, cap)?,
            };
            let mut report = oracle::compare_with_saturated(&census)?;
            let applies = [(order.p(), order.n()), (order.q(), order.m())]
                .iter()
                .all(|&(p, e)| e == 0 || p >= satreal::realizer::MIN_PRIME);
            if applies {
                oracle::cross_check_realizer(&census, &mut report)?;
            }
            let lines = verdict_lines(&census, &report, applies);
            match format {
                Format::Text | Format::Dot => {
                    for line in &lines {
                        println!("{line}");
                    }
                }
                Format::Json => print_json(&census_json(&census, &report, applies, &lines)),
            }
            if applies && !report.pass() {
                return Err(Rejected.into());
            }
        }
        Command::CompareMacbrough { system, j, k } => {
            let t = system.load()?;
            let order = *t.order();
            let instance = match (order.n(), order.m()) {
                (1, 1) => build_cpq_instance(order.p(), order.q(), j, k)?,
                (2, 0) => build_cp2_instance(order.p())?,
                (n, m) => bail!("no diagram instance for the lattice [{n}]x[{m}]; supported: [1]x[1] and [2]x[0]"),
            };
            let ours = satreal::realize(&t)?;
            let ours_system = ours.realized_system(&order)?;
            let run = macbrough_fixed_point(&t, &instance)?;
            let theirs = IndexingSet::seal(run.top().clone()).ok();
            let theirs_system = theirs
                .as_ref()
                .map(|s| s.realized_system(&order))
                .transpose()?;
            let verdict = macbrough_realize(&t, &instance);
            let agree = verdict.is_ok() && ours_system == t;
            match format {
                Format::Text | Format::Dot => {
                    println!(
                        "realizer:   {}  realizes {}",
                        ours.to_list_string(),
                        edges_text(&ours_system)
                    );
                    match (&theirs, &theirs_system) {
                        (Some(s), Some(ts)) => {
                            println!(
                                "diagrams:   {}  realizes {}",
                                s.to_list_string(),
                                edges_text(ts)
                            )
                        }
                        _ => println!("diagrams:   top set is not an indexing set"),
                    }
                    println!("{}", if agree { "agree" } else { "disagree" });
                }
                Format::Json => print_json(&json!({
                    "schema": SCHEMA,
                    "order": order,
                    "system": edge_list(&t),
                    "realizer": {"indexing_set": ours, "realized": edge_list(&ours_system)},
                    "diagrams": {
                        "indexing_set": theirs,
                        "realized": theirs_system.as_ref().map(edge_list),
                        "rounds": run.rounds,
                        "error": verdict.as_ref().err().map(ToString::to_string),
                    },
                    "same_set": theirs.as_ref() == Some(&ours),
                    "agree": agree,
                })),
            }
            if !agree {
                return Err(Rejected.into());
            }
        }
        Command::ExportDot { system } => {
            print!("{}", system.load()?.to_dot());
        }
    }
    Ok(())
}

fn certificate_inputs(text: &str) -> anyhow::Result<(CyclicOrder, IndexingSet, TransferSystem)> {
    let value: Value = serde_json::from_str(text).context("certificate is not JSON")?;
    let field = |name: &str| {
        value
            .get(name)
            .cloned()
            .ok_or_else(|| anyhow!("certificate has no {name:?} field"))
    };
    let order: CyclicOrder = serde_json::from_value(field("order")?)?;
    let set: IndexingSet = serde_json::from_value(field("indexing_set")?)?;
    let expected: TransferSystem = serde_json::from_value(field("input")?)?;
    if !expected.order().same_lattice(&order) {
        bail!("certificate input is on {}, not {order}", expected.order());
    }
    Ok((
        order,
        set,
        TransferSystem::from_nontrivial(order, &expected.nontrivial_edges())?,
    ))
}

fn verdict_lines(census: &Census, report: &TheoremReport, applies: bool) -> Vec<String> {
    let mut lines = Vec::new();
    let mode = if census.mode.is_exhaustive() {
        "exhaustive"
    } else {
        "sampled, not exhaustive"
    };
    lines.push(format!(
        "{}: {} indexing sets ({mode}), {} realizable of {} saturated systems",
        census.order,
        census.total(),
        report.realizable,
        report.saturated
    ));
    for t in &report.unrealized_saturated {
        let what = if census.mode.is_exhaustive() {
            "unrealizable"
        } else {
            "not observed"
        };
        lines.push(format!("{what}: {}", edges_text(t)));
    }
    for t in &report.unsaturated_keys {
        lines.push(format!("realizable but not saturated: {}", edges_text(t)));
    }
    if let Some(failures) = &report.realizer_failures {
        for f in failures {
            lines.push(format!("realizer failure: {f}"));
        }
    }
    if applies {
        lines.push(format!(
            "theorem check: {}",
            if report.pass() { "pass" } else { "FAIL" }
        ));
    } else {
        lines.push("theorem check: not applicable (a prime below 5 divides the order)".into());
    }
    lines
}

fn census_json(census: &Census, report: &TheoremReport, applies: bool, lines: &[String]) -> Value {
    let entries: Vec<Value> = census
        .counts
        .iter()
        .map(|(t, n)| json!({"edges": edge_list(t), "mask": t.mask_hex(), "count": n}))
        .collect();
    let unrealizable: Vec<Value> = report.unrealized_saturated.iter().map(edge_list).collect();
    json!({
        "schema": SCHEMA,
        "order": census.order,
        "mode": census.mode,
        "total": census.total(),
        "census": entries,
        "saturated": report.saturated,
        "unrealized_saturated": unrealizable,
        "unsaturated_keys": report.unsaturated_keys.iter().map(edge_list).collect::<Vec<_>>(),
        "realizer_failures": report.realizer_failures,
        "theorem_applies": applies,
        "pass": !applies || report.pass(),
        "verdicts": lines,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Rejected>() => ExitCode::from(1),
        Err(e) => match e.downcast_ref::<Error>() {
            Some(Error::Postcondition(_)) => {
                eprintln!("error: internal check failed: {e}");
                ExitCode::from(1)
            }
            _ => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
