mod commands;
mod json;
mod model_file;
mod points;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thermoform::tolerances::Tolerances;

use commands::{CliError, Context, Format, ReconstructArgs};

/// Entropy reconstruction and diagnostics for homogeneous thermodynamic
/// models.
///
/// Exit codes: 0 pass, 2 check failure, 3 invalid input, 4 numeric failure.
#[derive(Parser)]
#[command(name = "thermoform", version)]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    text: bool,

    #[command(flatten)]
    tolerances: ToleranceFlags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Homogeneity, integrability and exactness of ω/f on sampled states.
    Check { model: PathBuf },
    /// S and T on a grid.
    Reconstruct {
        model: PathBuf,
        /// Per coordinate a value or lo:hi:n, e.g. `U=1:16:4,V=1`.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Skip the model checks.
        #[arg(long)]
        force: bool,
    },
    /// Hessian of S, leading minors and the concavity verdict.
    Hessian {
        model: PathBuf,
        /// State, e.g. `1,1` or `U=1,V=1`.
        #[arg(long)]
        at: String,
    },
    /// Behaviour of S as the energy approaches the ground surface.
    ThirdLaw {
        model: PathBuf,
        /// Starting state of the approach; the reference state by default.
        #[arg(long)]
        ray: Option<String>,
        /// Energy above the ground surface at the end of the approach.
        #[arg(long, default_value_t = 1e-8)]
        epsilon: f64,
    },
    /// Energy above the ground surface at which S equals a given value.
    Leaf {
        model: PathBuf,
        #[arg(long = "s-value", allow_negative_numbers = true)]
        s_value: f64,
        /// The coordinates other than the energy, e.g. `V=1`.
        #[arg(long)]
        params: String,
    },
    /// Δlog(1/T) between two states from the state equations alone.
    GibbsDuhem {
        model: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
}

/// Overrides applied after `TF_TOLERANCES`.
#[derive(Args)]
struct ToleranceFlags {
    #[arg(long, global = true)]
    tol_integrability: Option<f64>,
    #[arg(long, global = true)]
    tol_exactness: Option<f64>,
    #[arg(long, global = true)]
    tol_homogeneity: Option<f64>,
    #[arg(long, global = true)]
    tol_quadrature: Option<f64>,
    #[arg(long, global = true)]
    max_subdivisions: Option<usize>,
    #[arg(long, global = true)]
    tol_gibbs_duhem: Option<f64>,
    #[arg(long, global = true)]
    tol_minor_band: Option<f64>,
    #[arg(long, global = true)]
    tol_hessian_cross_check: Option<f64>,
    #[arg(long, global = true)]
    tol_boundary_epsilon: Option<f64>,
    #[arg(long, global = true)]
    divergence_slope: Option<f64>,
    #[arg(long, global = true)]
    convergence_slope: Option<f64>,
    #[arg(long, global = true)]
    tol_leaf: Option<f64>,
}

impl ToleranceFlags {
    fn apply(&self, t: &mut Tolerances) {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut t.integrability, self.tol_integrability);
        set(&mut t.exactness, self.tol_exactness);
        set(&mut t.homogeneity, self.tol_homogeneity);
        set(&mut t.quadrature, self.tol_quadrature);
        set(&mut t.gibbs_duhem, self.tol_gibbs_duhem);
        set(&mut t.minor_band, self.tol_minor_band);
        set(&mut t.hessian_cross_check, self.tol_hessian_cross_check);
        set(&mut t.boundary_epsilon, self.tol_boundary_epsilon);
        set(&mut t.divergence_slope, self.divergence_slope);
        set(&mut t.convergence_slope, self.convergence_slope);
        set(&mut t.leaf, self.tol_leaf);
        if let Some(n) = self.max_subdivisions {
            t.max_subdivisions = n;
        }
    }
}

fn tolerances(flags: &ToleranceFlags) -> Result<Tolerances, CliError> {
    let mut t = match std::env::var_os("TF_TOLERANCES") {
        Some(path) => {
            let path = Path::new(&path);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("TF_TOLERANCES {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Invalid(format!("TF_TOLERANCES {}: {}", path.display(), e.message())))?
        }
        None => Tolerances::default(),
    };
    flags.apply(&mut t);
    Ok(t)
}

fn model_path(command: &Command) -> &Path {
    match command {
        Command::Check { model }
        | Command::Reconstruct { model, .. }
        | Command::Hessian { model, .. }
        | Command::ThirdLaw { model, .. }
        | Command::Leaf { model, .. }
        | Command::GibbsDuhem { model, .. } => model,
    }
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let ctx = Context {
        tolerances: tolerances(&cli.tolerances)?,
        loaded: model_file::load(model_path(&cli.command))?,
    };
    match &cli.command {
        Command::Check { .. } => commands::check(&ctx),
        Command::Reconstruct {
            grid,
            out,
            format,
            force,
            ..
        } => commands::reconstruct(
            &ctx,
            &ReconstructArgs {
                grid: grid.clone(),
                out: out.clone(),
                format: *format,
                force: *force,
            },
        ),
        Command::Hessian { at, .. } => commands::hessian(&ctx, at),
        Command::ThirdLaw { ray, epsilon, .. } => commands::third_law(&ctx, ray.as_deref(), *epsilon),
        Command::Leaf { s_value, params, .. } => commands::leaf(&ctx, *s_value, params),
        Command::GibbsDuhem { from, to, .. } => commands::gibbs_duhem(&ctx, from, to),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Some(raw) = &outcome.raw {
                print!("{raw}");
            } else if cli.text {
                print!("{}", outcome.text);
            } else {
                print!("{}", json::render(&outcome.json));
            }
            ExitCode::from(outcome.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
