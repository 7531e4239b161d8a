use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dyngnn::coordinator::{profile, CostUnit, ProfileParams};
use dyngnn::graph::{generate_synthetic, write_edge_list, GraphModel};
use dyngnn::harness::experiments::{ablate, peak_by_mode, PeakSearch, Variant};
use dyngnn::harness::{report, run, Prepared, RunConfig};
use dyngnn::{Result, UpdateStrategy};

#[derive(Parser)]
#[command(
    name = "dyngnn",
    version,
    about = "Serve GNN embeddings over a changing graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic graph as an edge list.
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: usize,
        #[arg(long, value_enum, default_value = "regular")]
        model: ModelArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Profile per-request costs and fit the cost model.
    Profile {
        /// Run config whose model section is profiled.
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        c: Vec<usize>,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Measure wall-clock seconds instead of touched nodes.
        #[arg(long)]
        wall: bool,
        #[arg(long)]
        naive: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run one workload and write per-request CSV.
    Run {
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Search the highest load meeting P99 latency and staleness bounds.
    Peak {
        config: PathBuf,
        #[arg(long)]
        latency_sla: f64,
        #[arg(long)]
        staleness_sla: f64,
        #[arg(long, default_value_t = 10.0)]
        start: f64,
        /// Variants to search; all when omitted.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<VariantArg>,
    },
    /// Run the workload under every serving variant.
    Ablate { config: PathBuf },
    /// Compare recorded CSV files.
    Report { csv: Vec<PathBuf> },
}

#[derive(Copy, Clone, clap::ValueEnum)]
enum ModelArg {
    Regular,
    ErdosRenyi,
}

#[derive(Copy, Clone, clap::ValueEnum)]
enum VariantArg {
    #[value(alias = "stag")]
    Collaborative,
    NoAip,
    NoCsm,
    InfBased,
    UpdBased,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Collaborative => Variant::Collaborative,
            VariantArg::NoAip => Variant::NoAip,
            VariantArg::NoCsm => Variant::NoCsm,
            VariantArg::InfBased => Variant::InfBased,
            VariantArg::UpdBased => Variant::UpdBased,
        }
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenGraph {
            n,
            c,
            model,
            seed,
            out,
        } => {
            let model = match model {
                ModelArg::Regular => GraphModel::Regular,
                ModelArg::ErdosRenyi => GraphModel::ErdosRenyi,
            };
            let g = generate_synthetic(n, c, model, 1, seed)?;
            write_edge_list(&g, &out)?;
            println!(
                "wrote {} nodes, {} edges to {}",
                g.node_count(),
                g.edge_count(),
                out.display()
            );
        }
        Command::Profile {
            config,
            c,
            n,
            reps,
            seed,
            wall,
            naive,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let params = ProfileParams {
                n,
                c_samples: c,
                reps,
                seed,
                unit: if wall {
                    CostUnit::Seconds
                } else {
                    CostUnit::Touched
                },
                strategy: if naive {
                    UpdateStrategy::Naive
                } else {
                    UpdateStrategy::Aip
                },
                ..ProfileParams::default()
            };
            let cm = profile(&params, &cfg.model.build()?)?;
            cm.save(&out)?;
            for s in &cm.splits {
                println!(
                    "M={} q={:?} u={:?} residual={:.3e}",
                    s.m, s.coeffs_q.coeffs, s.coeffs_u.coeffs, s.fit_residual
                );
            }
        }
        Command::Run { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if out.is_some() {
                cfg.output = out;
            }
            let result = run(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&result.summary)?);
        }
        Command::Peak {
            config,
            latency_sla,
            staleness_sla,
            start,
            variants,
        } => {
            let cfg = RunConfig::load(&config)?;
            let mut prep = Prepared::new(&cfg)?;
            let variants: Vec<Variant> = if variants.is_empty() {
                Variant::ALL.to_vec()
            } else {
                variants.into_iter().map(Variant::from).collect()
            };
            let search = PeakSearch {
                start,
                ..PeakSearch::default()
            };
            for r in peak_by_mode(
                &cfg,
                &mut prep,
                &variants,
                latency_sla,
                staleness_sla,
                search,
            )? {
                match r.peak_rps {
                    Some(p) => println!("{}\t{p:.1}", r.variant.name()),
                    None => println!("{}\tinfeasible", r.variant.name()),
                }
            }
        }
        Command::Ablate { config } => {
            let cfg = RunConfig::load(&config)?;
            let mut prep = Prepared::new(&cfg)?;
            let rows: Vec<_> = ablate(&cfg, &mut prep)?
                .into_iter()
                .map(|v| (v.variant.name().to_string(), v.summary))
                .collect();
            print!("{}", report::comparison_table(&rows));
        }
        Command::Report { csv } => print!("{}", report::report(&csv)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
