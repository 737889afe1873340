use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use branchkit::construction::{delta, Membership};
use branchkit::permgroup::{non_normal_maximal, tau_action};
use branchkit::scenario::{GroupRef, Scenario, ScenarioDoc};
use branchkit::tree::Vertex;
use branchkit::treeaut::TreeAut;
use branchkit::verify::{layer_action, run_suite, VerifyConfig, SUITES};
use branchkit::{Error, Limits};

#[derive(Parser)]
#[command(name = "branchkit", version, about = "Spinal branch groups over finite perfect groups")]
struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Faithful transitive non-regular action of a group.
    Tau { group: String },
    /// Check subdirectness and the infinitary condition of a scenario's representation.
    CheckRep { scenario: PathBuf },
    /// Validate a scenario and list the generators of Γ.
    Build { scenario: PathBuf },
    /// Labels of a word down to a depth.
    Portrait {
        scenario: PathBuf,
        word: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Image of a vertex under a word.
    Act { scenario: PathBuf, word: String, vertex: String },
    /// Section of a word at a vertex.
    Section {
        scenario: PathBuf,
        word: String,
        vertex: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Contraction normal form of a word.
    Classify { scenario: PathBuf, word: String },
    /// Membership of a word in Δ(H) for the scenario's H.
    Member { scenario: PathBuf, word: String },
    /// Order of Γ modulo the stabiliser of a layer.
    Quotient {
        scenario: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Non-normal maximal subgroups of a group.
    Max { group: String },
    /// Run verification suites.
    Verify {
        scenario: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        /// Depth for portrait identities.
        #[arg(long)]
        depth: Option<usize>,
    },
}

enum Failure {
    Input(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::UnknownGroup(_)
            | Error::Scenario(_)
            | Error::InvalidVertex { .. }
            | Error::PointOutOfRange { .. }
            | Error::DegreeMismatch(..) => Failure::Input(e.to_string()),
            other => Failure::Failed(other.to_string()),
        }
    }
}

struct Output {
    value: Value,
    text: String,
    ok: bool,
}

fn read_doc(path: &PathBuf) -> Result<ScenarioDoc, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(ScenarioDoc::parse(&text)?)
}

fn load(path: &PathBuf) -> Result<Scenario, Failure> {
    Ok(Scenario::from_doc(read_doc(path)?, Limits::default())?)
}

fn parse_vertex(s: &str) -> Result<Vertex, Failure> {
    Ok(s.parse::<Vertex>()?)
}

fn word_text(a: &TreeAut) -> String {
    if a.is_trivial_word() {
        return "id".into();
    }
    a.word().iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
}

fn run(command: &Command) -> Result<Output, Failure> {
    let limits = Limits::default();
    match command {
        Command::Tau { group } => {
            let g = group.parse::<GroupRef>()?.resolve()?;
            let tau = tau_action(&g, limits)?;
            let images: Vec<String> = tau.images().iter().map(|p| p.to_string()).collect();
            Ok(Output {
                text: format!("degree {}\n{}", tau.point_count(), images.join("\n")),
                value: json!({ "group": group, "order": g.order().to_string(), "degree": tau.point_count(), "images": images }),
                ok: true,
            })
        }
        Command::CheckRep { scenario } => {
            let rep = read_doc(scenario)?.representation(limits)?;
            let mut levels = Vec::new();
            let mut subdirect = true;
            for (i, c) in rep.components().window() {
                let image = c.projection.image_group()?.order();
                let ok = image == c.target.order();
                subdirect &= ok;
                levels.push(json!({
                    "level": i + 1,
                    "image_order": image.to_string(),
                    "target_order": c.target.order().to_string(),
                    "subdirect": ok,
                }));
            }
            let kernel = rep.tail_kernel().len();
            let perfect = rep.check_perfect_levels().is_ok() && rep.group().is_perfect()?;
            let ok = subdirect && kernel == 1 && perfect;
            Ok(Output {
                text: format!(
                    "subdirect: {subdirect}\ntail kernel order: {kernel}\nperfect levels: {perfect}\n{}",
                    if ok { "representation ok" } else { "representation rejected" }
                ),
                value: json!({ "levels": levels, "subdirect": subdirect, "tail_kernel_order": kernel, "perfect": perfect, "ok": ok }),
                ok,
            })
        }
        Command::Build { scenario } => {
            let s = load(scenario)?;
            let spec = &s.spec;
            let mut names = Vec::new();
            for (i, p) in spec.s0().images().iter().enumerate() {
                names.push(json!({ "name": format!("r{}", i + 1), "rooted": p.to_string() }));
            }
            for (i, g) in spec.group().generators().iter().enumerate() {
                names.push(json!({ "name": format!("sG{}", i + 1), "spinal": g.to_string() }));
            }
            let digest = branchkit::verify::scenario_digest(spec);
            let text = names
                .iter()
                .map(|n| format!("{} {}", n["name"].as_str().unwrap(), n.get("rooted").or(n.get("spinal")).unwrap().as_str().unwrap()))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output {
                text: format!("{} generators\n{text}\ndigest {digest}", names.len()),
                value: json!({ "digest": digest, "generators": names, "data": spec.describe() }),
                ok: true,
            })
        }
        Command::Portrait { scenario, word, depth } => {
            let s = load(scenario)?;
            let a = s.spec.parse_word(word)?;
            let p = a.portrait(*depth);
            let text = p
                .labels
                .iter()
                .map(|(v, q)| format!("{}\t{q}", if v.is_root() { "ε".to_string() } else { v.to_string() }))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output { value: p.to_json(), text, ok: true })
        }
        Command::Act { scenario, word, vertex } => {
            let s = load(scenario)?;
            let a = s.spec.parse_word(word)?;
            let image = a.act(&parse_vertex(vertex)?)?;
            Ok(Output {
                text: image.to_string(),
                value: json!({ "vertex": vertex, "image": image.to_string() }),
                ok: true,
            })
        }
        Command::Section { scenario, word, vertex, depth } => {
            let s = load(scenario)?;
            let a = s.spec.parse_word(word)?;
            let sec = a.section(&parse_vertex(vertex)?)?;
            Ok(Output {
                text: format!("level {}: {}", sec.level(), word_text(&sec)),
                value: json!({ "level": sec.level(), "word": word_text(&sec), "portrait": sec.portrait(*depth).to_json() }),
                ok: true,
            })
        }
        Command::Classify { scenario, word } => {
            let s = load(scenario)?;
            let c = s.spec.classify(&s.spec.parse_word(word)?)?;
            let mut text = format!("k = {}", c.depth);
            for (v, kind) in &c.sections {
                let name = if v.is_root() { "ε".to_string() } else { v.to_string() };
                match kind.component() {
                    Some(b) => text.push_str(&format!("\n{name}\tspinal {b} · finitary depth {}", kind.finitary_part().depth())),
                    None => text.push_str(&format!("\n{name}\tfinitary depth {}", kind.finitary_part().depth())),
                }
            }
            Ok(Output { value: c.to_json(), text, ok: true })
        }
        Command::Member { scenario, word } => {
            let s = load(scenario)?;
            let h = s
                .subgroup
                .clone()
                .ok_or_else(|| Failure::Input("scenario has no H".into()))?;
            let answer = delta(&s.spec, &h)?.member(&s.spec.parse_word(word)?)?;
            let text = match &answer {
                Membership::Yes(w) => format!("yes ({} letters)", w.len()),
                Membership::No(n) => format!("no: component {} at vertex {:?} (k = {})", n.component, n.vertex.to_string(), n.depth),
                Membership::Unknown(r) => format!("unknown: {r}"),
            };
            Ok(Output { value: answer.to_json(), text, ok: true })
        }
        Command::Quotient { scenario, level } => {
            let s = load(scenario)?;
            let q = layer_action(&s.spec, &s.spec.generators(), *level)?;
            let order = q.exact_order()?;
            Ok(Output {
                text: order.to_string(),
                value: json!({ "level": level, "order": order.to_string() }),
                ok: true,
            })
        }
        Command::Max { group } => {
            let g = group.parse::<GroupRef>()?.resolve()?;
            let maxes = non_normal_maximal(&g, limits)?;
            let items: Vec<Value> = maxes
                .iter()
                .map(|m| json!({ "order": m.order().to_string(), "generators": m.generators().iter().map(|p| p.to_string()).collect::<Vec<_>>() }))
                .collect();
            let text = std::iter::once(format!("{} non-normal maximal subgroups", maxes.len()))
                .chain(maxes.iter().map(|m| {
                    let gens: Vec<String> = m.generators().iter().map(|p| p.to_string()).collect();
                    format!("order {}: {}", m.order(), gens.join(", "))
                }))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output { value: json!({ "count": maxes.len(), "subgroups": items }), text, ok: true })
        }
        Command::Verify { scenario, suite, depth } => {
            let s = load(scenario)?;
            let mut config = VerifyConfig::default();
            if let Some(d) = depth {
                config.portrait_depth = *d;
            }
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else if SUITES.contains(&suite.as_str()) {
                vec![suite.as_str()]
            } else {
                return Err(Failure::Input(format!("unknown suite {suite:?}")));
            };
            let reports = names
                .iter()
                .map(|n| run_suite(&s.spec, n, s.subgroup.as_ref(), &config))
                .collect::<Result<Vec<_>, _>>()?;
            let ok = reports.iter().all(|r| r.passed());
            Ok(Output {
                text: reports.iter().map(|r| r.to_text()).collect::<String>(),
                value: json!({ "passed": ok, "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>() }),
                ok,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(out) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&out.value).expect("json output")
            } else {
                out.text.trim_end().to_string()
            };
            // a closed pipe is not an error for the computation
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
