use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::bail;
use clap::{Args, Parser, Subcommand, ValueEnum};
use spinwire::{run_fit, run_ground_state, run_sweep, run_table1, table1_config, SweepConfig, SweepReport};
use spinwire_core::ProtocolRegistry;

#[derive(Parser)]
#[command(name = "spinwire", version, about = "Spin-chain communication experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state energy, gap and end-pair Werner parameters.
    GroundState(Common),
    /// Dense-coding protocol: Bell fidelities and Holevo capacity.
    Classical(Common),
    /// Remote state preparation: measurement-assisted average fidelity.
    Quantum(Common),
    /// Attaching-scheme baselines on uniform chains.
    Attach {
        #[arg(long, value_enum, default_value_t = Scheme::Both)]
        scheme: Scheme,
        #[command(flatten)]
        common: Common,
    },
    /// FM, AFM and quantum optima side by side; fails on an ordering violation.
    Table1(Common),
    /// Any protocols from a config file or `--protocol`.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        protocol: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Least-squares line through two columns of a CSV file.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "F_av")]
        y: String,
        /// Level whose crossing is reported; defaults to 2/3.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Fm,
    Afm,
    Both,
}

#[derive(Args, Clone)]
struct Common {
    /// Chain lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Dimerization values, comma separated.
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    /// Window end; the protocol default is used when omitted.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_parser = ["gs", "singlets"])]
    init: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML file with sweep settings; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

const DEFAULT_N: [usize; 4] = [6, 8, 10, 12];

impl Common {
    /// Config file values, then flags, on top of the defaults.
    fn resolve(&self, protocol: &[&str]) -> anyhow::Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::load(path)?,
            None => SweepConfig::new(protocol, &DEFAULT_N, &[0.7]),
        };
        if !protocol.is_empty() {
            cfg.protocol = protocol.iter().map(|s| s.to_string()).collect();
        }
        if !self.n.is_empty() {
            cfg.n = self.n.clone();
        }
        if !self.delta.is_empty() {
            cfg.delta = self.delta.clone();
        }
        if self.t_max.is_some() {
            cfg.t_max = self.t_max;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(init) = &self.init {
            cfg.init = init.clone();
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(jobs) = self.jobs {
            cfg.jobs = jobs;
        }
        Ok(cfg)
    }
}

fn report(r: &SweepReport, out: &std::path::Path) {
    let failed = r.failed();
    eprintln!(
        "{} cells ({} failed), {} files in {}",
        r.records.len(),
        failed.len(),
        r.manifest.outputs.len(),
        out.display()
    );
    for f in failed {
        eprintln!("  {} N={} delta={}: {}", f.protocol, f.n, f.delta, f.error.as_deref().unwrap_or(""));
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let registry = ProtocolRegistry::builtin();
    match cli.command {
        Command::GroundState(c) => {
            let mut cfg = c.resolve(&[])?;
            if c.config.is_none() && c.n.is_empty() {
                cfg.n = vec![12];
            }
            let (m, _) = run_ground_state(&cfg)?;
            eprintln!("{} ground states in {}", m.cells.len(), cfg.out.display());
        }
        Command::Classical(c) => {
            let cfg = c.resolve(&["classical"])?;
            report(&run_sweep(&cfg, "classical", &registry)?, &cfg.out);
        }
        Command::Quantum(c) => {
            let cfg = c.resolve(&["quantum"])?;
            report(&run_sweep(&cfg, "quantum", &registry)?, &cfg.out);
        }
        Command::Attach { scheme, common } => {
            let protocols: &[&str] = match scheme {
                Scheme::Fm => &["attach-fm"],
                Scheme::Afm => &["attach-afm"],
                Scheme::Both => &["attach-fm", "attach-afm"],
            };
            let cfg = common.resolve(protocols)?;
            report(&run_sweep(&cfg, "attach", &registry)?, &cfg.out);
        }
        Command::Table1(c) => {
            let cfg = table1_config(c.resolve(&[])?);
            report(&run_table1(&cfg, &registry)?, &cfg.out);
        }
        Command::Sweep { protocol, common } => {
            if common.config.is_none() && (protocol.is_empty() || common.n.is_empty()) {
                bail!("sweep needs --config FILE or both --protocol and --n");
            }
            let names: Vec<&str> = protocol.iter().map(String::as_str).collect();
            let cfg = common.resolve(&names)?;
            report(&run_sweep(&cfg, "sweep", &registry)?, &cfg.out);
        }
        Command::Fit {
            input,
            x,
            y,
            threshold,
            out,
        } => {
            let (_, table) = run_fit(&input, &x, &y, threshold, &out)?;
            if let Some(row) = table.rows.first() {
                println!("slope {} intercept {} r2 {} crossing {}", row[6], row[7], row[8], row[10]);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
