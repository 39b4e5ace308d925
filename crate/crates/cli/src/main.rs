use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use luderscope_cli::discriminate::{run_discriminate, DiscriminationMode};
use luderscope_cli::output::write_outputs;
use luderscope_cli::scan::{
    advantage_curve, run_scan_noisy, run_scan_trine, Family, OutputFormat, ScanConfig, ScanMode,
};
use luderscope_cli::{configure_threads, verify, CliError};

#[derive(Parser)]
#[command(
    name = "luderscope",
    about = "Optimal discrimination of quantum measurements and their instruments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Measurement,
    Instrument,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanModeArg {
    Measurement,
    Instrument,
    Both,
}

impl From<ScanModeArg> for ScanMode {
    fn from(m: ScanModeArg) -> Self {
        match m {
            ScanModeArg::Measurement => ScanMode::Measurement,
            ScanModeArg::Instrument => ScanMode::Instrument,
            ScanModeArg::Both => ScanMode::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the discrimination problem for a POVM ensemble from a JSON file
    Discriminate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Comma-separated priors overriding the ones in the input file
        #[arg(long, value_delimiter = ',')]
        priors: Option<Vec<f64>>,
    },
    /// Grid scan over rotated/tilted trine measurements
    ScanTrine(ScanArgs),
    /// Grid scan over the noisy two-outcome measurement family
    ScanNoisy(ScanArgs),
    /// Instrument-vs-measurement advantage curve
    Advantage {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// lo:hi:steps
        #[arg(long)]
        p: String,
    },
    /// Run the built-in cross-validation suite
    Verify {
        /// Perturb the oracles and require at least one failure
        #[arg(long)]
        mutation: bool,
    },
}

#[derive(clap::Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 50)]
    grid: usize,
    /// lo:hi (radians)
    #[arg(long)]
    theta: Option<String>,
    /// lo:hi (radians); trine family only
    #[arg(long)]
    phi: Option<String>,
    /// lo:hi; noisy family only
    #[arg(long)]
    p: Option<String>,
    #[arg(long, value_enum, default_value_t = ScanModeArg::Both)]
    mode: ScanModeArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    heatmap: bool,
}

fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!("range must be lo:hi, got {s:?}")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Input(format!("bad number {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Input(format!("bad number {:?}", parts[1])))?;
    Ok((lo, hi))
}

fn parse_steps(s: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!("expected lo:hi:steps, got {s:?}")));
    }
    let (lo, hi) = parse_range(&parts[..2].join(":"))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Input(format!("bad step count {:?}", parts[2])))?;
    Ok((lo, hi, steps))
}

fn scan_config(family: Family, args: &ScanArgs) -> Result<ScanConfig, CliError> {
    let mut cfg = ScanConfig::defaults(family);
    cfg.grid_n = args.grid;
    cfg.mode = args.mode.into();
    cfg.output_path = args.out.clone();
    cfg.format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    cfg.emit_heatmap = args.heatmap;
    if let Some(theta) = &args.theta {
        cfg.axis1_range = parse_range(theta)?;
    }
    match family {
        Family::Trine => {
            if args.p.is_some() {
                return Err(CliError::Input("--p is not valid for the trine family".into()));
            }
            if let Some(phi) = &args.phi {
                cfg.axis2_range = parse_range(phi)?;
            }
        }
        Family::Noisy => {
            if args.phi.is_some() {
                return Err(CliError::Input("--phi is not valid for the noisy family".into()));
            }
            if let Some(p) = &args.p {
                cfg.axis2_range = parse_range(p)?;
            }
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads();
    match cli.command {
        Command::Discriminate {
            input,
            mode,
            priors,
        } => {
            let mode = match mode {
                ModeArg::Measurement => DiscriminationMode::Measurement,
                ModeArg::Instrument => DiscriminationMode::Instrument,
            };
            println!("{}", run_discriminate(&input, mode, priors)?);
            Ok(0)
        }
        Command::ScanTrine(args) => {
            let cfg = scan_config(Family::Trine, &args)?;
            let rows = run_scan_trine(&cfg)?;
            write_outputs(&cfg, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), cfg.output_path.display());
            Ok(0)
        }
        Command::ScanNoisy(args) => {
            let cfg = scan_config(Family::Noisy, &args)?;
            let rows = run_scan_noisy(&cfg)?;
            write_outputs(&cfg, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), cfg.output_path.display());
            Ok(0)
        }
        Command::Advantage { family, theta, p } => {
            if family != "noisy" {
                return Err(CliError::Input(format!(
                    "unsupported family {family:?}; only \"noisy\" has an advantage curve"
                )));
            }
            let (lo, hi, steps) = parse_steps(&p)?;
            let rows = advantage_curve(theta, (lo, hi), steps)?;
            println!("p,advantage,d_meas,d_inst");
            for (p, adv, d_m, d_i) in rows {
                let adv = adv.map(|a| format!("{a:.8e}")).unwrap_or_default();
                println!("{p:.8e},{adv},{d_m:.8e},{d_i:.8e}");
            }
            Ok(0)
        }
        Command::Verify { mutation } => {
            let checks = verify::run_all(mutation);
            for check in &checks {
                println!("{}", check.line());
            }
            let failures = checks.iter().filter(|c| !c.passed).count();
            if mutation {
                // a harness that can't catch a corrupted oracle is broken
                if failures > 0 {
                    println!("mutation detected ({failures} failing checks)");
                    Ok(0)
                } else {
                    eprintln!("mutation went undetected");
                    Ok(2)
                }
            } else if failures == 0 {
                Ok(0)
            } else {
                eprintln!("{failures} of {} checks failed", checks.len());
                Ok(2)
            }
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage-error exit code is 2, which this tool reserves for
    // solver failures; remap argument problems to 1
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
