//! qwrecur: coined quantum walks on infinite lattices, return probabilities,
//! Polya numbers, and Fourier-picture recurrence analysis.
//!
//! Every run is deterministic: identical configuration produces
//! bitwise-identical output files. Exit code 0 means every requested artifact
//! was written; on failure partial outputs are removed.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

mod resolve;
mod run;

use resolve::Settings;

#[derive(Parser)]
#[command(name = "qwrecur", version, about = "quantum walk recurrence toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve a walk; write the p0(t) series, snapshots, and a classification report
    Walk(WalkArgs),
    /// Polya-number estimation: simulated walks, tensor estimates, classical baselines, Fourier surface
    Polya(PolyaArgs),
    /// Band structure, stationary-point taxonomy, localization verdict, predicted decay
    Spectral(SpectralArgs),
    /// Cartesian parameter sweeps: one series file per grid point plus an index
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// hadamard1d | grover | fourier | tensor-hadamard | grover-family | path to coin JSON
    #[arg(long)]
    coin: Option<String>,
    /// psi_S | psi_G | psi_F | e1..ec | random
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    t_max: Option<u64>,
    /// auto | direct | product
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seed for random states
    #[arg(long)]
    seed: Option<u64>,
    /// k-grid resolution per axis
    #[arg(short = 'N', long = "resolution")]
    n: Option<usize>,
    /// Number of even-time Polya terms
    #[arg(long)]
    terms: Option<usize>,
    /// JSON file with the same keys as the long flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// 1-D coin parameter alpha of C(alpha, beta)
    #[arg(long)]
    alpha: Option<f64>,
    /// 1-D coin parameter beta of C(alpha, beta)
    #[arg(long)]
    beta: Option<f64>,
    /// Lattice dimension for tensor-hadamard / grover-family / classical
    #[arg(short = 'd', long = "dimension")]
    d: Option<usize>,
    /// psi_F amplitude parameter
    #[arg(long)]
    a: Option<f64>,
    /// psi_F phase parameter
    #[arg(long)]
    phi: Option<f64>,
}

#[derive(Args, Debug)]
struct WalkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Times at which to dump position distributions
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<u64>,
}

#[derive(Args, Debug)]
struct PolyaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Tensor-power Hadamard walk in dimension -d (product engine)
    #[arg(long)]
    tensor_hadamard: bool,
    /// Classical lattice random walk baseline in dimension -d
    #[arg(long)]
    classical: bool,
    /// Polya surface over an initial-state family: `fourier`
    #[arg(long)]
    surface: Option<String>,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated alpha values (1-D coin sweep)
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Vec<f64>,
    /// Comma-separated beta values (1-D coin sweep)
    #[arg(long, value_delimiter = ',')]
    beta_grid: Vec<f64>,
    /// Comma-separated psi_F amplitude values (Fourier state sweep)
    #[arg(long, value_delimiter = ',')]
    a_grid: Vec<f64>,
    /// Comma-separated psi_F phase values (Fourier state sweep)
    #[arg(long, value_delimiter = ',')]
    phi_grid: Vec<f64>,
}

/// Paths written so far; on failure they are removed so that exit code 0 is
/// equivalent to "all outputs present and complete".
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn create(dir: &PathBuf) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Outputs { dir: dir.clone(), written: Vec::new() })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn discard(&self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
    }
}

type Runner = Box<dyn FnOnce(&Settings, &mut Outputs) -> Result<()>>;

fn dispatch(cli: Cli) -> Result<()> {
    let (settings, go): (Settings, Runner) = match cli.cmd {
        Cmd::Walk(args) => {
            let s = Settings::resolve(&args.common)?;
            let snaps = args.snapshots.clone();
            (s, Box::new(move |s, out| run::walk(s, &snaps, out)))
        }
        Cmd::Polya(args) => {
            let s = Settings::resolve(&args.common)?;
            if let Some(kind) = &args.surface {
                if kind != "fourier" {
                    bail!("unknown surface {kind:?} (expected `fourier`)");
                }
                (s, Box::new(run::polya_surface))
            } else if args.classical {
                (s, Box::new(run::polya_classical))
            } else if args.tensor_hadamard {
                (s, Box::new(run::polya_tensor))
            } else {
                (s, Box::new(run::polya_walk))
            }
        }
        Cmd::Spectral(args) => {
            let s = Settings::resolve(&args.common)?;
            (s, Box::new(run::spectral))
        }
        Cmd::Sweep(args) => {
            let s = Settings::resolve(&args.common)?;
            let grids = run::SweepGrids {
                alpha: args.alpha_grid.clone(),
                beta: args.beta_grid.clone(),
                a: args.a_grid.clone(),
                phi: args.phi_grid.clone(),
            };
            (s, Box::new(move |s, out| run::sweep(s, &grids, out)))
        }
    };
    let mut outputs = Outputs::create(&settings.out_dir)?;
    match go(&settings, &mut outputs) {
        Ok(()) => Ok(()),
        Err(e) => {
            outputs.discard();
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
