//! Command-line front end: framework file analysis and catalog export.
//!
//! Exit codes: 0 = self-stressable, 2 = not self-stressable, 1 = input or
//! usage error, 3 = the requested methods disagree at the given tolerance.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stresskit::check::{check_all, Method};
use stresskit::framework::FaceId;
use stresskit::io::{self, LoadedInput, Metadata};
use stresskit::oneform::{build_dual_graph, exactness, one_form};
use stresskit::paths::{monodromy, FacePath};
use stresskit::surgery::{resolve, Resolution};
use stresskit::tol::Tolerances;
use stresskit::{catalog, Error};

#[derive(Parser)]
#[command(
    name = "stresskit",
    about = "Self-stressability analysis of multidimensional trivalent tensegrities",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Nullspace,
    Monodromy,
    Oneform,
    Cayley,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportArg {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormalizeArg {
    FirstFace,
    Unit,
}

#[derive(Args)]
struct TolArg {
    /// Relative singular-value cutoff (default 1e-9; env STRESSKIT_TOL).
    #[arg(long)]
    tol: Option<f64>,
}

impl TolArg {
    fn resolve(&self) -> Result<Tolerances, Error> {
        let from_env = std::env::var("STRESSKIT_TOL")
            .ok()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Usage(format!("STRESSKIT_TOL: {e}")))
            })
            .transpose()?;
        let t = match self.tol.or(from_env) {
            Some(eps) => Tolerances::with_eps_rank(eps),
            None => Tolerances::default(),
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide self-stressability of a framework file.
    Check {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
        #[command(flatten)]
        tol: TolArg,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportArg,
    },
    /// Print the stress-space dimension and a basis.
    StressBasis {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "first-face")]
        normalize: NormalizeArg,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Stress monodromy along a face cycle (comma-separated face ids).
    Monodromy {
        path: PathBuf,
        #[arg(long, value_delimiter = ',')]
        cycle: Vec<usize>,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Resolve a face cycle to length 3 by HF-surgeries, logging each step.
    Surgery {
        path: PathBuf,
        #[arg(long, value_delimiter = ',')]
        cycle: Vec<usize>,
        /// Reduce to length 3 and apply the three-cycle criterion.
        #[arg(long)]
        resolve: bool,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Dual-graph 1-form: arc table and the exactness defect.
    Oneform {
        path: PathBuf,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Write a catalog example to a framework file (or list all names).
    Examples {
        /// Entry name, e.g. k5-tetrahedral; omit with --list.
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
    /// Export an ASCII PLY mesh with per-face stress.
    ExportMesh {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: TolArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &std::path::Path, tol: &Tolerances) -> Result<LoadedInput, Error> {
    io::read_input(path, tol)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Check {
            path,
            method,
            tol,
            report,
        } => {
            let t = tol.resolve()?;
            let fw = load(&path, &t)?.to_dframework(&t)?;
            let v = check_all(&fw, &t);
            let methods: Vec<Method> = match method {
                MethodArg::Nullspace => vec![Method::Nullspace],
                MethodArg::Monodromy => vec![Method::Monodromy],
                MethodArg::Oneform => vec![Method::OneForm],
                MethodArg::Cayley => vec![Method::Cayley],
                MethodArg::All => vec![
                    Method::Nullspace,
                    Method::Monodromy,
                    Method::OneForm,
                    Method::Cayley,
                ],
            };
            let mut verdicts = Vec::new();
            for m in &methods {
                match v.verdict(*m) {
                    Some(val) => verdicts.push((m.name(), Some(val))),
                    None => verdicts.push((m.name(), None)),
                }
            }
            let decided: Vec<bool> = verdicts.iter().filter_map(|(_, v)| *v).collect();
            if decided.is_empty() {
                return Err(Error::Usage(format!(
                    "no requested method applies to this framework (methods: {})",
                    methods
                        .iter()
                        .map(|m| m.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
            let disagree = decided.iter().any(|x| *x != decided[0]);
            match report {
                ReportArg::Text => {
                    for (name, val) in &verdicts {
                        match val {
                            Some(true) => println!("{name}: stressable"),
                            Some(false) => println!("{name}: not stressable"),
                            None => println!("{name}: not applicable"),
                        }
                    }
                    println!("stress dimension: {}", v.stress_dim);
                }
                ReportArg::Structured => {
                    let obj = serde_json::json!({
                        "schema_version": 1,
                        "stress_dim": v.stress_dim,
                        "verdicts": verdicts
                            .iter()
                            .map(|(name, val)| (name.to_string(), serde_json::json!(val)))
                            .collect::<serde_json::Map<String, serde_json::Value>>(),
                        "disagreement": disagree,
                        "worst_monodromy_defect": v.worst_monodromy_defect,
                        "worst_oneform_defect": v.worst_oneform_defect,
                    });
                    println!("{}", serde_json::to_string_pretty(&obj).expect("json"));
                }
            }
            Ok(if disagree {
                ExitCode::from(3)
            } else if decided[0] {
                ExitCode::from(0)
            } else {
                ExitCode::from(2)
            })
        }
        Command::StressBasis {
            path,
            normalize,
            tol,
        } => {
            let t = tol.resolve()?;
            let fw = load(&path, &t)?.to_dframework(&t)?;
            let ss = fw.stress_space(&t);
            println!("dimension: {}", ss.dimension);
            for (i, s) in ss.basis.iter().enumerate() {
                let values = match normalize {
                    NormalizeArg::Unit => s.clone(),
                    NormalizeArg::FirstFace => {
                        let first = s
                            .values()
                            .iter()
                            .copied()
                            .find(|v| v.abs() > t.eps_rank)
                            .unwrap_or(1.0);
                        s.scaled(1.0 / first)
                    }
                };
                let strs: Vec<String> =
                    values.values().iter().map(|v| format!("{v:.12}")).collect();
                println!("basis[{i}]: [{}]", strs.join(", "));
            }
            Ok(ExitCode::from(if ss.dimension >= 1 { 0 } else { 2 }))
        }
        Command::Monodromy { path, cycle, tol } => {
            let t = tol.resolve()?;
            let fw = load(&path, &t)?.to_dframework(&t)?;
            let mut walk: Vec<FaceId> = cycle.iter().map(|f| FaceId(*f)).collect();
            if walk.len() < 2 {
                return Err(Error::Usage("--cycle needs at least two faces".into()));
            }
            if walk.first() != walk.last() {
                walk.push(walk[0]);
            }
            let path_fw = FacePath::from_face_sequence(&fw, &walk, &t)?;
            let m = monodromy(&path_fw, &t)?;
            println!("monodromy: {m:.12}");
            println!(
                "trivial: {}",
                if (m - 1.0).abs() <= t.eps_exact {
                    "yes"
                } else {
                    "no"
                }
            );
            Ok(ExitCode::from(0))
        }
        Command::Surgery {
            path,
            cycle,
            resolve: do_resolve,
            tol,
        } => {
            let t = tol.resolve()?;
            let fw = load(&path, &t)?.to_dframework(&t)?;
            let mut walk: Vec<FaceId> = cycle.iter().map(|f| FaceId(*f)).collect();
            if walk.first() != walk.last() {
                walk.push(walk[0]);
            }
            let c = FacePath::from_face_sequence(&fw, &walk, &t)?;
            if !do_resolve {
                println!("cycle of length {}", c.len());
                for i in 0..c.len() {
                    let adm = stresskit::surgery::hf_admissible(&c, i, &t);
                    match adm {
                        Ok(a) if a.admissible => println!("HF_{i}: admissible"),
                        Ok(a) => println!("HF_{i}: {}", a.reason.unwrap_or_default()),
                        Err(e) => println!("HF_{i}: {e}"),
                    }
                }
                return Ok(ExitCode::from(0));
            }
            match resolve(&c, &t, None)? {
                Resolution::Resolved { steps, final_cycle } => {
                    for (k, s) in steps.iter().enumerate() {
                        let plane = s
                            .derived_plane
                            .as_ref()
                            .map(|p| format!("derived hat anchor {:?}", p.anchor().as_slice()))
                            .unwrap_or_default();
                        println!("step {k}: {:?} {plane}", s.kind);
                    }
                    let verdict =
                        stresskit::paths::three_cycle_stressable(&final_cycle, &t)?;
                    println!(
                        "resolved to length 3; three-cycle criterion: {}",
                        if verdict { "stressable" } else { "not stressable" }
                    );
                    Ok(ExitCode::from(if verdict { 0 } else { 2 }))
                }
                Resolution::Unresolvable { reason } => {
                    println!("unresolvable: {reason}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Oneform { path, tol } => {
            let t = tol.resolve()?;
            let fw = load(&path, &t)?.to_dframework(&t)?;
            let dg = build_dual_graph(&fw)?;
            let q = one_form(&fw, &dg, &t)?;
            println!("faces: {}  arcs: {}", dg.num_faces(), dg.arcs.len());
            for (i, arc) in dg.arcs.iter().enumerate() {
                println!(
                    "arc {i}: {} -> {} via edge {} (hat {}): q = {:.12}",
                    arc.from.0,
                    arc.to.0,
                    arc.via_edge.0,
                    arc.hat.0,
                    q.q(i, true)
                );
            }
            let rep = exactness(&fw, &dg, &q, &t)?;
            println!(
                "exact: {}  worst |log product|: {:.3e}  fundamental cycles: {}",
                rep.exact, rep.worst_defect, rep.fundamental_cycles
            );
            Ok(ExitCode::from(if rep.exact { 0 } else { 2 }))
        }
        Command::Examples { name, out, list } => {
            if list || name.is_none() {
                for e in catalog::entries() {
                    println!("{}", e.name);
                }
                return Ok(ExitCode::from(0));
            }
            let name = name.expect("checked above");
            let t = Tolerances::default();
            let entry = catalog::entry(&name)
                .ok_or_else(|| Error::Usage(format!("unknown example {name:?}")))?;
            let item = (entry.builder)(&t)?;
            let meta = Metadata {
                name: Some(name.clone()),
                tags: vec!["catalog".into()],
            };
            let loaded = match item {
                catalog::CatalogItem::D(fw) => LoadedInput::D {
                    framework: fw,
                    metadata: meta,
                },
                catalog::CatalogItem::R(r) => LoadedInput::R {
                    framework: r,
                    metadata: meta,
                },
            };
            match out {
                Some(path) => {
                    io::write_input(&path, &loaded)?;
                    println!("wrote {}", path.display());
                }
                None => {
                    let text = match &loaded {
                        LoadedInput::D {
                            framework,
                            metadata,
                        } => io::framework_to_canonical_json(framework, metadata),
                        LoadedInput::R {
                            framework,
                            metadata,
                        } => io::rframework_to_canonical_json(framework, metadata),
                    };
                    print!("{text}");
                }
            }
            Ok(ExitCode::from(0))
        }
        Command::ExportMesh { path, out, tol } => {
            let t = tol.resolve()?;
            let input = load(&path, &t)?;
            let ply = io::export_mesh_ply(&input, &t)?;
            std::fs::write(&out, ply)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::from(0))
        }
    }
}
