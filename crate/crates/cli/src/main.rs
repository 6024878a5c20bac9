use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use quasigi::coherent::{wl_refine, wl_refine_kdim, Config, Structure, WlOptions};
use quasigi::graph::{self, Graph};
use quasigi::graph_iso::{aut_order_brute, aut_order_master, iso_brute, iso_master, iso_wl};
use quasigi::local_certs::{families, master, MasterOptions, MasterReport};
use quasigi::string_iso::{brute_force_iso, parse_instance, pull, IsoConfig, IsoCoset};
use quasigi::{Error, Perm, Result};

/// Working-memory cap for k-dimensional refinement, in megabytes.
const MEMORY_ENV: &str = "QUASIGI_MEMORY_MB";

#[derive(Parser)]
#[command(name = "quasigi", version, about = "Graph and string isomorphism")]
struct Cli {
    /// Structured output on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Engine {
    Master,
    WlOnly,
    Brute,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide isomorphism of two graphs (graph6 or DIMACS files).
    Iso {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "master")]
        engine: Engine,
    },
    /// Stable coloring of k-dimensional WL refinement.
    Wl {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Order of the automorphism group of a graph.
    Aut {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "master")]
        engine: Engine,
    },
    /// Isomorphism coset of a string instance file.
    StringIso {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "master")]
        engine: Engine,
    },
    /// Write fixtures: cycle N, path N, complete N, petersen, johnson M T,
    /// kneser M T, paley Q, random N P SEED, cfi N, wreath B M SEED.
    Gen {
        family: String,
        params: Vec<String>,
        /// Directory for the output files instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dimacs: bool,
    },
}

#[derive(Serialize)]
struct IsoReport {
    verdict: &'static str,
    engine: Engine,
    n: usize,
    witness: Option<Vec<usize>>,
    report: Option<MasterReport>,
}

#[derive(Serialize)]
struct AutReport {
    engine: Engine,
    n: usize,
    order: String,
    report: Option<MasterReport>,
}

#[derive(Serialize)]
struct CosetReport {
    verdict: &'static str,
    engine: Engine,
    degree: usize,
    order: String,
    rep: Option<Vec<usize>>,
    generators: Vec<Vec<usize>>,
    report: Option<MasterReport>,
}

fn one_based(p: &Perm) -> Vec<usize> {
    p.to_vec().into_iter().map(|x| x + 1).collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Graph> {
    Graph::parse(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn wl_options() -> Result<WlOptions> {
    let mut o = WlOptions::default();
    if let Ok(v) = std::env::var(MEMORY_ENV) {
        let mb: usize = v.trim().parse().map_err(|_| Error::Parse(format!("{MEMORY_ENV}={v:?} is not a number")))?;
        o.memory_budget = mb << 20;
    }
    Ok(o)
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string(v).expect("report serializes"));
}

fn cmd_iso(a: &Path, b: &Path, engine: Engine, json: bool) -> Result<bool> {
    let (ga, gb) = (read_graph(a)?, read_graph(b)?);
    let (witness, report) = match engine {
        Engine::Master => {
            let (w, r) = iso_master(&ga, &gb, &MasterOptions::default())?;
            (w, Some(r))
        }
        Engine::WlOnly => (iso_wl(&ga, &gb)?, None),
        Engine::Brute => (iso_brute(&ga, &gb), None),
    };
    if let Some(p) = &witness {
        if !ga.is_isomorphism(&gb, p) {
            return Err(Error::Invariant(format!("witness {} does not map edges onto edges", p.to_image_string())));
        }
    }
    let verdict = if witness.is_some() { "ISOMORPHIC" } else { "NON-ISOMORPHIC" };
    if json {
        print_json(&IsoReport {
            verdict,
            engine,
            n: ga.n(),
            witness: witness.as_ref().map(one_based),
            report,
        });
    } else {
        println!("{verdict}");
        if let Some(p) = &witness {
            println!("witness {}", p.to_image_string());
        }
    }
    Ok(witness.is_some())
}

fn cmd_wl(file: &Path, dim: usize, json: bool) -> Result<()> {
    let g = read_graph(file)?;
    let cfg = match dim {
        2 => wl_refine(&Config::from_graph(&g))?.config().clone(),
        k if k >= 3 => wl_refine_kdim(&Structure::from_graph(&g), k, &wl_options()?)?,
        k => return Err(Error::Precondition(format!("--dim must be at least 2, got {k}"))),
    };
    if json {
        #[derive(Serialize)]
        struct WlReport {
            dim: usize,
            n: usize,
            rank: usize,
            colors: Vec<u32>,
        }
        print_json(&WlReport {
            dim,
            n: cfg.n(),
            rank: cfg.rank(),
            colors: cfg.colors().to_vec(),
        });
    } else {
        print!("{}", cfg.dump());
    }
    Ok(())
}

fn cmd_aut(file: &Path, engine: Engine, json: bool) -> Result<()> {
    let g = read_graph(file)?;
    let (order, report) = match engine {
        Engine::Master => {
            let (o, r) = aut_order_master(&g, &MasterOptions::default())?;
            (o.to_string(), Some(r))
        }
        Engine::Brute => (aut_order_brute(&g).to_string(), None),
        Engine::WlOnly => return Err(Error::Precondition("aut supports the master and brute engines".into())),
    };
    if json {
        print_json(&AutReport { engine, n: g.n(), order, report });
    } else {
        println!("{order}");
    }
    Ok(())
}

fn cmd_string_iso(file: &Path, engine: Engine, json: bool) -> Result<bool> {
    let inst = parse_instance(&read(file)?)?;
    let (c, report): (IsoCoset, Option<MasterReport>) = match engine {
        Engine::Master => {
            let (c, r) = master(&inst, &MasterOptions::default())?;
            (c, Some(r))
        }
        Engine::Brute => {
            let cfg = IsoConfig {
                brute_cutoff: u64::MAX,
                ..IsoConfig::default()
            };
            (brute_force_iso(&inst, &cfg)?, None)
        }
        Engine::WlOnly => return Err(Error::Precondition("string-iso supports the master and brute engines".into())),
    };
    if let Some(rep) = c.rep() {
        if !inst.is_isomorphism(rep) {
            return Err(Error::Invariant(format!("representative {} is not an isomorphism", rep.to_image_string())));
        }
    }
    let verdict = if c.is_empty() { "NON-ISOMORPHIC" } else { "ISOMORPHIC" };
    let generators: Vec<Vec<usize>> = c.group().map(|g| g.generators().iter().map(one_based).collect()).unwrap_or_default();
    if json {
        print_json(&CosetReport {
            verdict,
            engine,
            degree: inst.degree(),
            order: c.size().to_string(),
            rep: c.rep().map(one_based),
            generators,
            report,
        });
    } else {
        println!("{verdict}");
        println!("order {}", c.size());
        if let Some(rep) = c.rep() {
            println!("rep {}", rep.to_image_string());
        }
        for g in c.group().map(|g| g.generators().to_vec()).unwrap_or_default() {
            println!("gen {}", g.to_image_string());
        }
    }
    Ok(!c.is_empty())
}

fn param<T: std::str::FromStr>(params: &[String], i: usize, name: &str) -> Result<T> {
    let s = params
        .get(i)
        .ok_or_else(|| Error::Parse(format!("missing parameter {name}")))?;
    s.parse().map_err(|_| Error::Parse(format!("bad value {s:?} for {name}")))
}

fn wreath_instance(b: usize, m: usize, seed: u64) -> String {
    use rand::Rng;
    let rep = families::wreath(b, m);
    let g = rep.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<u32> = (0..g.degree()).map(|_| rng.gen_range(0..3)).collect();
    let y = pull(&x, &g.random_element(&mut rng));
    let letters = |s: &[u32]| s.iter().map(|&c| ((b'a' + c as u8) as char).to_string()).collect::<Vec<_>>().join(" ");
    let mut out = format!("degree {}\nalphabet a b c\nx {}\ny {}\n", g.degree(), letters(&x), letters(&y));
    for s in g.generators() {
        out.push_str(&format!("gen {s}\n"));
    }
    out
}

fn cmd_gen(family: &str, params: &[String], out: Option<&Path>, dimacs: bool) -> Result<()> {
    let graphs: Vec<(String, Graph)> = match family {
        "cycle" => vec![(String::new(), graph::cycle(param(params, 0, "N")?))],
        "path" => vec![(String::new(), graph::path(param(params, 0, "N")?))],
        "complete" => vec![(String::new(), graph::complete(param(params, 0, "N")?))],
        "petersen" => vec![(String::new(), graph::petersen())],
        "johnson" => vec![(String::new(), graph::johnson(param(params, 0, "M")?, param(params, 1, "T")?))],
        "kneser" => vec![(String::new(), graph::kneser(param(params, 0, "M")?, param(params, 1, "T")?))],
        "paley" => vec![(String::new(), graph::paley(param(params, 0, "Q")?))],
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(param(params, 2, "SEED")?);
            vec![(String::new(), graph::random(param(params, 0, "N")?, param(params, 1, "P")?, &mut rng))]
        }
        "cfi" => {
            let (a, b) = graph::cfi_pair(&graph::cycle(param(params, 0, "N")?));
            vec![("_a".into(), a), ("_b".into(), b)]
        }
        "wreath" => {
            let text = wreath_instance(param(params, 0, "B")?, param(params, 1, "M")?, param(params, 2, "SEED")?);
            return emit(out, &format!("{}.txt", stem(family, params)), &text);
        }
        other => return Err(Error::Parse(format!("unknown family {other:?}"))),
    };
    for (suffix, g) in graphs {
        let (text, ext) = if dimacs { (g.to_dimacs(), "dimacs") } else { (format!("{}\n", g.to_graph6()), "g6") };
        emit(out, &format!("{}{suffix}.{ext}", stem(family, params)), &text)?;
    }
    Ok(())
}

fn stem(family: &str, params: &[String]) -> String {
    std::iter::once(family).chain(params.iter().map(String::as_str)).collect::<Vec<_>>().join("_")
}

fn emit(dir: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match dir {
        None => print!("{text}"),
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| Error::Parse(format!("{}: {e}", d.display())))?;
            let p = d.join(name);
            std::fs::write(&p, text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Iso { a, b, engine } => cmd_iso(a, b, *engine, cli.json),
        Cmd::Wl { file, dim } => cmd_wl(file, *dim, cli.json).map(|()| true),
        Cmd::Aut { file, engine } => cmd_aut(file, *engine, cli.json).map(|()| true),
        Cmd::StringIso { file, engine } => cmd_string_iso(file, *engine, cli.json),
        Cmd::Gen { family, params, out, dimacs } => cmd_gen(family, params, out.as_deref(), *dimacs).map(|()| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wreath_fixture_parses_and_is_isomorphic() {
        let inst = parse_instance(&wreath_instance(2, 4, 7)).unwrap();
        assert_eq!(inst.degree(), 8);
        let (c, _) = master(&inst, &MasterOptions::default()).unwrap();
        assert!(!c.is_empty());
    }

    #[test]
    fn stems_join_parameters() {
        assert_eq!(stem("johnson", &["5".into(), "2".into()]), "johnson_5_2");
    }
}
