use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cubemc::eval::{emit_csv, run_eval, summary_path, EvalConfig, InputSource};
use cubemc::frame::SyntheticSpec;
use cubemc::search::SearchConfig;
use cubemc::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "cubemc", version, about = "Sphere-uniform motion compensation for cube-map video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare translational and advanced motion compensation over a sequence.
    ///
    /// No codec is run, so there is no rate axis and no BD-rate. BD-rate is
    /// replaced by a proxy: the PSNR of the motion-compensated prediction
    /// against the current frame (Y, U, V, face pixels only) and the per-block
    /// SAD, with advanced modes disabled and enabled.
    Eval(EvalArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Raw planar YUV 4:2:0 file, or `synthetic` for a generated sequence.
    #[arg(long)]
    input: String,
    /// Frame width; required for file input.
    #[arg(long)]
    width: Option<usize>,
    /// Frame height; required for file input.
    #[arg(long)]
    height: Option<usize>,
    /// Face size in pixels [default: width / 4, or 64 for synthetic input].
    #[arg(long)]
    face_size: Option<usize>,
    #[arg(long, default_value_t = 16)]
    block_size: usize,
    /// Frames between a picture and its reference (1 is low delay, larger
    /// values emulate random access).
    #[arg(long, default_value_t = 1)]
    ref_distance: usize,
    /// Integer-pel search range.
    #[arg(long, default_value_t = 64)]
    search_range: i32,
    /// Weight of the MV-difference bit estimate in the block cost.
    #[arg(long, default_value_t = 0)]
    lambda: u32,
    /// Per-block CSV; the summary goes next to it as `<name>.summary.txt`.
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    /// Sphere velocity in pixels per frame (synthetic input).
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_vec3, allow_hyphen_values = true, default_value = "2,0,0")]
    synth_velocity: [f64; 3],
    /// Number of frames (synthetic input).
    #[arg(long, default_value_t = 8)]
    synth_frames: usize,
    /// Texture seed (synthetic input).
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected 3 comma-separated values, got {}", p.len()))
}

impl EvalArgs {
    fn config(&self) -> Result<EvalConfig, Error> {
        let search = SearchConfig {
            search_range: self.search_range,
            lambda: self.lambda,
            ..SearchConfig::default()
        };
        let (input, face_size) = if self.input == "synthetic" {
            let face_size = self.face_size.unwrap_or(64);
            if let Some(w) = self.width.filter(|&w| w != 4 * face_size) {
                return Err(Error::Config(format!("width {w} does not match face size {face_size}")));
            }
            if let Some(h) = self.height.filter(|&h| h != 3 * face_size) {
                return Err(Error::Config(format!("height {h} does not match face size {face_size}")));
            }
            let spec = SyntheticSpec::new(face_size, self.synth_frames, self.synth_velocity, self.seed);
            (InputSource::Synthetic(spec), face_size)
        } else {
            let (Some(width), Some(height)) = (self.width, self.height) else {
                return Err(Error::Config("--width and --height are required for file input".into()));
            };
            let input = InputSource::File {
                path: PathBuf::from(&self.input),
                width,
                height,
            };
            (input, self.face_size.unwrap_or(width / 4))
        };
        let config = EvalConfig {
            input,
            face_size,
            block_size: self.block_size,
            ref_distance: self.ref_distance,
            search,
            parallel: true,
        };
        config.validate()?;
        Ok(config)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::SizeMismatch { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn eval(args: &EvalArgs) -> Result<(), Error> {
    let config = args.config()?;
    let report = run_eval(&config)?;
    emit_csv(&report, &args.out)?;
    print!("{}", report.summary());
    eprintln!("wrote {} and {}", args.out.display(), summary_path(&args.out).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(args) => eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
