use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linkforge::assemble::MixedPoly;
use linkforge::braid::{parse_braid_word, BraidWord};
use linkforge::pipeline::{build_and_verify, render_plots, PipelineTrace};
use linkforge::verifier::{verify, VerificationReport, VerifyOptions, DEFAULT_SAMPLES, RADIUS_START};

const POLY_FILE: &str = "poly.json";
const TRACE_FILE: &str = "trace.json";
const REPORT_FILE: &str = "report.json";

#[derive(Parser)]
#[command(name = "linkforge", version, about = "Semiholomorphic polynomials whose singularity link is a given closed braid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct f for a braid word, verify it and write poly.json and trace.json.
    Build {
        #[command(flatten)]
        braid: BraidArgs,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        opts: VerifyArgs,
        /// Print the verification report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check a polynomial against a braid word; exit status 0 iff every section passes.
    Verify {
        /// MixedPoly JSON file.
        poly: PathBuf,
        #[command(flatten)]
        braid: BraidArgs,
        /// Where to write the report (default: report.json next to the polynomial).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: VerifyArgs,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Render the input diagram, the singular braid and the tracked trajectories as SVG.
    Plot {
        /// Trace JSON file written by `build`.
        trace: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Summarize a trace file.
    TraceDump {
        trace: PathBuf,
        /// Re-emit the whole trace as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct BraidArgs {
    /// Whitespace-separated signed generator indices, e.g. "1 -2 1 -2".
    #[arg(long, allow_hyphen_values = true)]
    braid: String,
    #[arg(long)]
    strands: usize,
}

impl BraidArgs {
    fn word(&self) -> Result<BraidWord, String> {
        parse_braid_word(&self.braid, self.strands).map_err(|e| format!("braid: {e}"))
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest torus radius tried.
    #[arg(long, default_value_t = RADIUS_START)]
    radius_start: f64,
    /// Base number of samples per circle.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
}

impl VerifyArgs {
    fn options(&self) -> Result<VerifyOptions, String> {
        if !(self.radius_start.is_finite() && self.radius_start > 0.0 && self.radius_start < 1.0) {
            return Err(format!("cli: --radius-start must lie in (0, 1), got {}", self.radius_start));
        }
        if self.samples < 8 {
            return Err(format!("cli: --samples must be at least 8, got {}", self.samples));
        }
        Ok(VerifyOptions {
            radius_start: self.radius_start,
            samples: self.samples,
            ..VerifyOptions::default()
        })
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("io: {}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("io: {}: {e}", dir.display()))?;
    }
    fs::write(path, text).map_err(|e| format!("io: {}: {e}", path.display()))
}

fn summarize(report: &VerificationReport) {
    let link = &report.link;
    match (&link.certified, &link.extracted_word) {
        (Some((r1, r2)), Some(w)) => eprintln!("link: extracted {w} at r = {r1:.3e}, {r2:.3e}"),
        _ => eprintln!("link: no certified radius pair"),
    }
    if let Some(e) = &link.failure {
        eprintln!("link: {e}");
    }
    if let Some(iso) = &report.isolation {
        let min = iso.margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
        eprintln!("isolation: min scaled margin {min:.3e} ({})", verdict(iso.passed));
    }
    eprintln!(
        "degree: deg f = {}, bound {} ({})",
        report.degree.degree,
        report.degree.bound,
        verdict(report.degree.passed)
    );
    eprintln!("verification: {}", verdict(report.passed));
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Build { braid, out, opts, json } => {
            let word = braid.word()?;
            let built = build_and_verify(&word, &opts.options()?).map_err(|e| e.to_string())?;
            write(&out.join(POLY_FILE), &built.poly.to_json())?;
            write(&out.join(TRACE_FILE), &built.trace.to_json())?;
            let t = &built.trace;
            if t.stabilized {
                eprintln!("stabilized to {}", t.word);
            }
            eprintln!(
                "built f: deg {}, deg_u {}, k = {}, m = {}, {} monomials",
                t.construction.degree, t.construction.degree_u, t.construction.k, t.construction.m, t.construction.monomials
            );
            if let Some(report) = &t.verification {
                summarize(report);
                if json {
                    println!("{}", report.to_json());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { poly, braid, out, opts, json } => {
            let f = MixedPoly::from_json(&read(&poly)?).map_err(|e| format!("assemble: {e}"))?;
            let word = braid.word()?;
            let report = verify(&f, &word, &opts.options()?).map_err(|e| format!("verifier: {e}"))?;
            let path = out.unwrap_or_else(|| poly.with_file_name(REPORT_FILE));
            write(&path, &report.to_json())?;
            summarize(&report);
            if json {
                println!("{}", report.to_json());
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Plot { trace, out } => {
            let trace = PipelineTrace::from_json(&read(&trace)?).map_err(|e| e.to_string())?;
            for (name, svg) in render_plots(&trace) {
                write(&out.join(name), &svg)?;
                eprintln!("wrote {}", out.join(name).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::TraceDump { trace, json } => {
            let trace = PipelineTrace::from_json(&read(&trace)?).map_err(|e| e.to_string())?;
            if json {
                println!("{}", trace.to_json());
            } else {
                dump(&trace);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn dump(t: &PipelineTrace) {
    println!("input: {}", t.input);
    if t.stabilized {
        println!("stabilized: {}", t.word);
    }
    if let Some(s1) = &t.step1 {
        for c in &s1.components {
            println!(
                "component {:?}: degree {} (expected {}), residual {:.3e}",
                c.lanes, c.degree, c.expected_degree, c.residual
            );
        }
    }
    let g = &t.genericity;
    println!("singular crossings: {}", g.b_sing.crossing_times.len());
    for (i, tk) in g.b_sing.crossing_times.iter().enumerate() {
        let sign = g.signs.get(i).map_or("?", |s| if s.value() > 0 { "+" } else { "-" });
        println!("  t = {tk:.6} sign {sign}");
    }
    let c = &t.construction;
    println!(
        "construction: k = {}, m = {}, deg f = {}, deg_u f = {}, hermite residual {:.3e}",
        c.k, c.m, c.degree, c.degree_u, c.star_residual
    );
    match &t.verification {
        Some(r) => {
            let w = r.link.extracted_word.as_ref().map_or("none".to_string(), |w| w.to_string());
            println!("verification: {} (extracted {w})", verdict(r.passed));
        }
        None => println!("verification: not run"),
    }
    if let Some(h) = &t.halves {
        let halves: Vec<String> = h.half.iter().map(|x| x.map_or("-".into(), |v| v.to_string())).collect();
        println!("halves: [{}] one per crossing: {}", halves.join(" "), h.one_per_crossing);
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LINKFORGE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
