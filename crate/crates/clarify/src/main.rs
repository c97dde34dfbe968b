//! Command-line front end: parse flags, run the pipeline, print the result.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use clarify::pipeline::{run_pipeline, ColorScheme, OutputFormat, PipelineConfig, PipelineError};

/// Recolors the edges of a laid-out graph so that visually ambiguous edge
/// pairs get maximally distinct colors.
#[derive(Parser, Debug)]
#[command(name = "clarify", version, about)]
struct Args {
    /// Laid-out DOT file (nodes need pos attributes), or a region adjacency
    /// list with --map-mode.
    #[arg(long)]
    input: PathBuf,

    /// Color space or palette: rgb, lab, gray, or palette:<X> where X is a
    /// builtin name (accent8, dark2_8, pastel1_9) or a file with one #rrggbb
    /// per line.
    #[arg(long, default_value = "rgb")]
    color_scheme: String,

    /// Restrict the lab scheme to a lightness window, e.g. 30,70.
    #[arg(long, value_name = "MIN,MAX")]
    lightness: Option<String>,

    /// Branch-and-bound resolution in color-space units.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,

    /// Random restarts per component (default: 10 for small inputs, else 1).
    #[arg(long)]
    random_starts: Option<usize>,

    /// Seed for the restart initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Crossing angle (degrees) below which a crossing pair is ambiguous.
    #[arg(long, default_value_t = 15.0)]
    small_angle: f64,

    /// Crossing angle (degrees) above which a shared-endpoint pair is
    /// ambiguous (the two edges nearly continue each other).
    #[arg(long, default_value_t = 165.0)]
    straight_angle: f64,

    /// Disable the shared-endpoint narrow-fan condition.
    #[arg(long)]
    no_c3: bool,

    /// Distance cutoff for near-parallel pairs, as a fraction of the layout
    /// diagonal.
    #[arg(long, default_value_t = 0.01)]
    near_dist_frac: f64,

    /// Direction tolerance (degrees) for the near-parallel condition.
    #[arg(long, default_value_t = 1.0)]
    parallel_angle: f64,

    /// Output format: dot, svg, or json.
    #[arg(long, default_value = "dot")]
    output: String,

    /// With the gray scheme, also map lightness buckets to SVG dash styles.
    #[arg(long)]
    dash_styles: bool,

    /// Treat the input as a region adjacency list and color regions instead
    /// of edges.
    #[arg(long)]
    map_mode: bool,
}

fn parse_lightness(s: &str) -> Result<(f64, f64), PipelineError> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| PipelineError::Config(format!("--lightness expects MIN,MAX, got \"{s}\"")))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| PipelineError::Config(format!("--lightness: bad number \"{}\"", lo.trim())))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| PipelineError::Config(format!("--lightness: bad number \"{}\"", hi.trim())))?;
    Ok((lo, hi))
}

fn build_config(args: &Args) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::new(args.input.clone());
    cfg.scheme = ColorScheme::parse(&args.color_scheme)?;
    cfg.lightness = match &args.lightness {
        Some(s) => Some(parse_lightness(s)?),
        None => None,
    };
    cfg.epsilon = args.epsilon;
    cfg.random_starts = args.random_starts;
    cfg.seed = args.seed;
    cfg.small_angle = args.small_angle;
    cfg.straight_angle = args.straight_angle;
    cfg.enable_c3 = !args.no_c3;
    cfg.near_dist_frac = args.near_dist_frac;
    cfg.parallel_angle = args.parallel_angle;
    cfg.output = OutputFormat::parse(&args.output)?;
    cfg.dash_styles = args.dash_styles;
    cfg.map_mode = args.map_mode;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    let run = build_config(&args).and_then(|cfg| run_pipeline(&cfg));
    match run {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprint!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprint!(": {cause}");
                source = cause.source();
            }
            eprintln!();
            ExitCode::FAILURE
        }
    }
}
