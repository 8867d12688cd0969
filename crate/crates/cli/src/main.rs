mod commands;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "characteristica", version, about = "Characteristic analysis of linear second-order PDEs in two variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Equation text, e.g. "x*u_xx + (x - y)*u_xy - y*u_yy = 0".
    pub pde: Option<String>,
    /// Bundled fixture id instead of an inline equation.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Independent variables, comma separated.
    #[arg(long)]
    pub vars: Option<String>,
    /// Sampling rectangle x0,x1,y0,y1.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Extra expression that must stay away from zero on samples.
    #[arg(long = "guard", allow_hyphen_values = true)]
    pub guards: Vec<String>,
    /// Oracle seed; overrides CHARACTERISTICA_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Oracle tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct MapArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Inverse map x = P(xi, eta).
    #[arg(long = "inv-phi", allow_hyphen_values = true)]
    pub inv_phi: Option<String>,
    /// Inverse map y = Q(xi, eta).
    #[arg(long = "inv-psi", allow_hyphen_values = true)]
    pub inv_psi: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sign of the discriminant over the region.
    Classify(#[command(flatten)] Common),
    /// Characteristic slopes and first-order factors.
    Factor(#[command(flatten)] Common),
    /// Commutator and residue verdicts.
    Conditions {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Invariants of each characteristic family.
    Invariants {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Canonical form by one or all methods.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
        /// compact | compact-invariant | chain | inverse | all
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// General solution from the catalog, certified by residual.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Residual of a concrete candidate solution.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Candidate u(x, y); defaults to the fixture's template.
        #[arg(long, allow_hyphen_values = true)]
        solution: Option<String>,
    },
    /// List or replay the bundled fixtures.
    Corpus {
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// SVG and CSV of a field or characteristic family.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Field "alpha,beta" for alpha*d/dx + beta*d/dy.
        #[arg(long, allow_hyphen_values = true)]
        op: Option<String>,
        /// plus | minus, for an equation input.
        #[arg(long, default_value = "plus")]
        family: String,
        /// Level-set function.
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        /// grid | line | "x,y;x,y;..."
        #[arg(long, default_value = "grid", allow_hyphen_values = true)]
        seeds: String,
        /// Seeds per side for grid and line layouts.
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value_t = 360)]
        panel: u32,
        #[arg(long)]
        svg: Option<std::path::PathBuf>,
        #[arg(long)]
        csv: Option<std::path::PathBuf>,
    },
}

/// Exit codes: 0 pass, 1 verification failure, 2 usage error.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
}

pub type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Classify(c) => commands::classify(&c),
        Command::Factor(c) => commands::factor(&c),
        Command::Conditions { common, map } => commands::conditions(&common, &map),
        Command::Invariants { common, map } => commands::invariants(&common, &map),
        Command::Reduce { common, map, method } => commands::reduce(&common, &map, &method),
        Command::Solve { common, map } => commands::solve(&common, &map),
        Command::Verify { common, solution } => commands::verify(&common, solution.as_deref()),
        Command::Corpus {
            fixture,
            list,
            seed,
            tol,
            json,
        } => commands::corpus(fixture.as_deref(), list, seed, tol, json),
        Command::Plot {
            common,
            op,
            family,
            phi,
            seeds,
            count,
            step,
            panel,
            svg,
            csv,
        } => commands::plot(
            &common,
            &commands::PlotArgs {
                op,
                family,
                phi,
                seeds,
                count,
                step,
                panel,
                svg,
                csv,
            },
        ),
    };
    match out {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
