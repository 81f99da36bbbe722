use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zerofree_core::io::{
    check_document, read_json, render_svg, run_pipeline, to_json, validate_inputs, write_atomic,
    DomainDoc, FailureClass, FieldDoc, FormatError, PipelineError, RenderOptions, ResultDocument,
    RunConfig, Slice,
};

/// Zero-free piecewise-linear approximation of vector fields on grid domains.
#[derive(Parser, Debug)]
#[command(name = "zerofree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and certify a zero-free approximation and write result.json.
    Approx(ApproxArgs),
    /// Parse the inputs, run the precondition scan and report the run size.
    Validate(RunArgs),
    /// Recompute every certificate stored in a result document.
    Check { result: PathBuf },
    /// Draw a result document as SVG.
    Render {
        result: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        #[command(flatten)]
        slice: SliceArgs,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    epsilon: f64,
    /// Requested triangulation cell size (refined if too coarse for epsilon).
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long, default_value_t = 3)]
    levels_cap: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Verification samples per domain spacing along each axis.
    #[arg(long, default_value_t = 4)]
    verify_resolution: u32,
    /// Cap on top simplices of the triangulation and of the refined complex.
    #[arg(long)]
    max_simplices: Option<u64>,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    slice: SliceArgs,
}

#[derive(Args, Debug)]
struct SliceArgs {
    /// Slice axis (0, 1 or 2) for 3D results.
    #[arg(long, requires = "slice_value")]
    slice_axis: Option<usize>,
    #[arg(long, requires = "slice_axis", allow_hyphen_values = true)]
    slice_value: Option<f64>,
}

impl SliceArgs {
    fn options(&self) -> RenderOptions {
        RenderOptions {
            slice: self
                .slice_axis
                .zip(self.slice_value)
                .map(|(axis, value)| Slice { axis, value }),
            ..RenderOptions::default()
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Self {
            code: FailureClass::Input.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(self.epsilon);
        cfg.cell_size = self.cell_size;
        cfg.levels_cap = self.levels_cap;
        cfg.seed = self.seed;
        cfg.verify_resolution = self.verify_resolution;
        if let Some(m) = self.max_simplices {
            cfg.max_simplices = m;
        }
        cfg
    }

    fn inputs(&self) -> Result<(DomainDoc, FieldDoc), Failure> {
        Ok((read_json(&self.domain)?, read_json(&self.field)?))
    }
}

fn print_json(bytes: Vec<u8>) {
    println!("{}", String::from_utf8_lossy(&bytes));
}

fn write_svg(doc: &ResultDocument, path: &Path, slice: &SliceArgs) -> Result<(), Failure> {
    let svg = render_svg(doc, &slice.options())?;
    write_atomic(path, svg.as_bytes())?;
    Ok(())
}

fn approx(args: &ApproxArgs) -> Result<u8, Failure> {
    let (domain, field) = args.run.inputs()?;
    let outcome = run_pipeline(&domain, &field, &args.run.config())?;
    for (stage, t) in &outcome.timings {
        eprintln!("{:>13} {:>9.3}s", stage.name(), t.as_secs_f64());
    }
    let doc = &outcome.document;
    write_atomic(&args.out, &to_json(doc))?;
    if let Some(svg) = &args.svg {
        write_svg(doc, svg, &args.slice)?;
    }
    eprintln!(
        "mu = {:e}, sampled sup error = {:e} (epsilon {:e}), {} simplices certified",
        doc.certificates.mu,
        doc.oracle.sup_error.value,
        doc.epsilon(),
        doc.certificates.margins.len()
    );
    for c in doc.oracle.checks.iter().filter(|c| !c.passed) {
        eprintln!("oracle check {} failed: {}", c.name, c.detail);
    }
    Ok(doc.exit_code() as u8)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Approx(args) => approx(args),
        Command::Validate(args) => {
            let (domain, field) = args.inputs()?;
            print_json(to_json(&validate_inputs(&domain, &field, &args.config())?));
            Ok(0)
        }
        Command::Check { result } => {
            let doc: ResultDocument = read_json(result)?;
            let report = check_document(&doc);
            print_json(to_json(&report));
            Ok(if report.passed {
                0
            } else {
                FailureClass::Certificate.exit_code() as u8
            })
        }
        Command::Render { result, svg, slice } => {
            let doc: ResultDocument = read_json(result)?;
            write_svg(&doc, svg, slice)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                FailureClass::Input.exit_code() as u8
            } else {
                0
            });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
