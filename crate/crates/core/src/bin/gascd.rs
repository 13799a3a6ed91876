use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gas_core::bench::{aggregate, run_experiment, write_csv, Algo, BenchConfig, GroupKey};
use gas_core::citest::{CachedTester, DSepOracle, Dataset, FisherZ};
use gas_core::cpdag::essential_graph;
use gas_core::edgelist::{parse_dag, write_dag, write_pdag};
use gas_core::graph::{Dag, NodeSet};
use gas_core::lowerbound::certify_lower_bound;
use gas_core::synth::{barabasi_albert_dag, erdos_renyi_dag, parallel_paths_dag, sample_sem, Density, SemModel};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "gascd", version, about = "Causal structure discovery with prefix-set search")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Er,
    Ba,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Gas,
    #[value(name = "gas+")]
    GasPlus,
    Pc,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TesterArg {
    Oracle,
    Fisherz,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a random DAG, optionally with SEM weights and data.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        p: usize,
        /// Expected neighbours (er) or edges per new node (ba).
        #[arg(long, default_value_t = 2.0)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Edge-list output.
        #[arg(long)]
        out: PathBuf,
        /// Weights sidecar, one `u v a_uv` line per edge.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// CSV sample output.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Learn an essential graph.
    Discover {
        #[arg(long, value_enum, default_value = "gas")]
        algo: AlgoArg,
        #[arg(long, value_enum, default_value = "oracle")]
        tester: TesterArg,
        /// True DAG (oracle), or the DAG to simulate from (fisherz).
        #[arg(long, conflicts_with = "data")]
        graph: Option<PathBuf>,
        /// Samples as CSV with a header row (fisherz).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples drawn when simulating from `--graph`.
        #[arg(long, default_value_t = 10000)]
        n: usize,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment grid and write per-run CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write mean/std per (algo, tester, p, density) here.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Exit nonzero if any cell failed.
        #[arg(long)]
        strict: bool,
        /// Report zero wall time for byte-reproducible output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Certify the query lower bound on a clique of size s.
    VerifyLb {
        #[arg(long)]
        s: usize,
    },
    /// Print the essential graph of a DAG.
    Cpdag {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Serialize)]
struct Edges {
    directed: Vec<(usize, usize)>,
    undirected: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct DiscoverOutput {
    algo: String,
    p: usize,
    edges: Edges,
    components: Vec<NodeSet>,
    distinct_ci: usize,
    total_ci: usize,
    max_level: usize,
    wall_time: f64,
}

fn read_dag(path: &Path) -> Res<Dag> {
    Ok(parse_dag(&fs::read_to_string(path)?)?)
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn generate(family: FamilyArg, p: usize, density: f64, seed: u64) -> Res<Dag> {
    Ok(match family {
        FamilyArg::Er => erdos_renyi_dag(p, Density::ExpectedNeighbors(density), seed)?,
        FamilyArg::Ba => {
            if density.fract() != 0.0 || density < 1.0 {
                return Err(format!("ba needs an integer density >= 1, got {density}").into());
            }
            barabasi_albert_dag(p, density as usize, seed)?
        }
        FamilyArg::Parallel => parallel_paths_dag(p)?,
    })
}

fn run(cli: Cli) -> Res<ExitCode> {
    match cli.cmd {
        Cmd::Generate {
            family,
            p,
            density,
            seed,
            out,
            weights,
            samples,
            n,
        } => {
            let dag = generate(family, p, density, seed)?;
            fs::write(&out, write_dag(&dag))?;
            if weights.is_some() || samples.is_some() {
                let model = SemModel::random(dag, seed);
                if let Some(w) = weights {
                    fs::write(w, model.weights_to_string())?;
                }
                if let Some(s) = samples {
                    let data = Dataset::new(sample_sem(&model, n, seed));
                    data.write_csv(fs::File::create(s)?)?;
                }
            }
        }
        Cmd::Discover {
            algo,
            tester,
            graph,
            data,
            alpha,
            seed,
            n,
            out,
        } => {
            let algo = match algo {
                AlgoArg::Gas => Algo::Gas,
                AlgoArg::GasPlus => Algo::GasPlus,
                AlgoArg::Pc => Algo::Pc,
            };
            let start = Instant::now();
            let res = match (tester, graph, data) {
                (TesterArg::Oracle, Some(g), None) => {
                    algo.run(&mut CachedTester::new(DSepOracle::new(read_dag(&g)?)))?
                }
                (TesterArg::Oracle, _, _) => return Err("the oracle tester needs --graph".into()),
                (TesterArg::Fisherz, None, Some(d)) => {
                    let ds = Dataset::from_csv(fs::File::open(d)?)?;
                    algo.run(&mut CachedTester::new(FisherZ::new(&ds.values, alpha)?))?
                }
                (TesterArg::Fisherz, Some(g), None) => {
                    let values = sample_sem(&SemModel::random(read_dag(&g)?, seed), n, seed);
                    algo.run(&mut CachedTester::new(FisherZ::new(&values, alpha)?))?
                }
                (TesterArg::Fisherz, _, _) => return Err("the fisherz tester needs --data or --graph".into()),
            };
            let report = DiscoverOutput {
                algo: algo.to_string(),
                p: res.graph.num_nodes(),
                edges: Edges {
                    directed: res.graph.directed_edges(),
                    undirected: res.graph.undirected_edges(),
                },
                components: res.components,
                distinct_ci: res.ci.distinct_queries,
                total_ci: res.ci.total_calls,
                max_level: res.max_level,
                wall_time: start.elapsed().as_secs_f64(),
            };
            emit(out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Cmd::Bench {
            config,
            out,
            summary,
            strict,
            no_timing,
        } => {
            let mut cfg = BenchConfig::parse(&fs::read_to_string(config)?)?;
            cfg.timing = !no_timing;
            let records = run_experiment(&cfg);
            let mut buf = Vec::new();
            write_csv(&records, &mut buf)?;
            emit(out.as_deref(), &String::from_utf8(buf)?)?;
            if let Some(path) = summary {
                let keys = [GroupKey::Algo, GroupKey::Tester, GroupKey::P, GroupKey::Density];
                let rows = aggregate(&records, &keys)?;
                let mut w = csv::Writer::from_path(path)?;
                let mut header = vec!["algo", "tester", "p", "density", "count"].into_iter().map(String::from).collect::<Vec<_>>();
                for m in gas_core::bench::METRICS {
                    header.push(format!("{m}_mean"));
                    header.push(format!("{m}_std"));
                }
                w.write_record(&header)?;
                for r in rows {
                    let mut rec = r.key.clone();
                    rec.push(r.count.to_string());
                    for m in gas_core::bench::METRICS {
                        let ms = r.metrics[m];
                        rec.push(ms.mean.to_string());
                        rec.push(ms.std.to_string());
                    }
                    w.write_record(&rec)?;
                }
                w.flush()?;
            }
            let failed = records.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("{failed} of {} runs failed", records.len());
                if strict {
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Cmd::VerifyLb { s } => {
            let rep = certify_lower_bound(s)?;
            println!("{:<16} {:>3} {:>3} {:>7} {:>7} {:>9} {:>10}  ok", "trace", "u", "v", "F~G", "H!~G", "disagree", "checked");
            for t in &rep.traces {
                println!(
                    "{:<16} {:>3} {:>3} {:>7} {:>7} {:>9} {:>10}  {}",
                    t.w.to_string(),
                    t.u,
                    t.v,
                    t.f_in_class,
                    t.h_outside_class,
                    t.disagrees_on_trace,
                    t.statements_checked,
                    if t.certified() { "yes" } else { "NO" }
                );
            }
            println!("traces: {} (2^s - s - 1 = {})", rep.traces.len(), rep.required);
            if !rep.all_certified() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Cpdag { graph } => {
            print!("{}", write_pdag(&essential_graph(&read_dag(&graph)?)));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
