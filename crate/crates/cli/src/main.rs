mod config;
mod selftest;

use std::fmt;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use edgetail::bounds::{certify_envelope, certify_with_refinement, uniform_grid, EnvelopeKind, EnvelopeSpec};
use edgetail::crossover::{fit_tail_envelope, tail_probability, tail_sweep, TailFit, TailSample};
use edgetail::deformed_airy::{ai_lower_gamma, ai_upper_gamma, airy_classical, airy_classical_prime, DeformedAiryParams};
use edgetail::fredholm::{airy_kernel_det, det_bound_check, nystrom_det};
use edgetail::operator::{CrossoverKernel, KernelSpec};
use edgetail::special::{check_recip_gamma_envelope, check_stirling_sandwich, Rect};
use edgetail::Complex64;
use serde::Serialize;

use config::{Format, RunConfig};

/// Invalid input from the command line or a config file (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const CSV_HELP: &str = "\
CSV outputs (floats as 17 significant digits):
  airy    x,T,value,imag_residual,contour_case
  bounds  x,T,value,envelope,ratio
  kernel  x,y,re,im
  sweep   s,T,tail,err      (err: node-doubling plus quadrature error estimate)
JSON outputs carry a top-level \"schema_version\": 1.

Exit codes: 0 success, 1 numerical non-convergence, 2 invalid arguments.";

#[derive(Parser, Debug)]
#[command(name = "edgetail", version, about = "Deformed Airy functions, crossover kernel determinants and upper-tail certification", after_help = CSV_HELP)]
struct Cli {
    /// TOML run configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective run configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Worker threads for parallel evaluation; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output path (default stdout).
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long = "T0", global = true)]
    t0: Option<f64>,
    /// Absolute tolerance of deformed Airy contour integrals.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    det_tol: Option<f64>,
    /// Largest Nystrom node count (power of two, at most 1024).
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Offset of the mu-contour lines from the positive axis.
    #[arg(long, global = true)]
    mu_delta: Option<f64>,
    #[arg(long, global = true)]
    mu_radius: Option<f64>,
    #[arg(long, global = true)]
    mu_truncation: Option<f64>,
    #[command(subcommand)]
    cmd: Option<Command>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AiryWhich {
    Upper,
    Lower,
    Classical,
    ClassicalPrime,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Deformed (or classical) Airy function values.
    Airy {
        #[arg(long, value_enum)]
        which: AiryWhich,
        /// Comma list or a:b:step range.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long = "T", default_value_t = 2.0, value_parser = positive_time, allow_hyphen_values = true)]
        t: f64,
    },
    /// Envelope certification: upper_all_x, lower_pos_x, lower_neg_x, all, stirling or recip_gamma.
    Bounds {
        #[arg(long, default_value = "all")]
        which: String,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 0.5)]
        x_step: f64,
        #[arg(long = "T", default_value = "1,8,64", allow_hyphen_values = true)]
        t: String,
        /// Repeat the scan with bisected x-steps and report the drift of the constant.
        #[arg(long)]
        refine: bool,
    },
    /// Crossover kernel values on a grid of (x, y).
    Kernel {
        #[arg(long = "T", value_parser = positive_time, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu_im: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Hilbert-Schmidt norms of the kernel factorization.
    Hsnorm {
        #[arg(long = "T", value_parser = positive_time, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu_im: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Fredholm determinant of the crossover kernel (or of the Airy kernel).
    Det {
        #[arg(long = "T", required_unless_present = "airy_kernel", value_parser = positive_time, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        mu_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu_im: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        /// Classical Airy kernel instead of the crossover kernel.
        #[arg(long)]
        airy_kernel: bool,
        /// Also compare |det - 1| with the Hilbert-Schmidt bound.
        #[arg(long, conflicts_with = "airy_kernel")]
        check_bound: bool,
    },
    /// Upper tail 1 - F_T(s) at one point.
    Tail {
        #[arg(long = "T", value_parser = positive_time, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Upper tail on a grid; CSV columns s,T,tail,err.
    Sweep {
        /// Comma list or a:b:step range.
        #[arg(long = "T", allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Upper-envelope fit of a sweep CSV; writes JSON and a gnuplot data file.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Gnuplot data path (default: --out with extension .dat, else fit.dat).
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Runs the trivial end-to-end checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<edgetail::Error>() {
            return if err.is_numerical() { 1 } else { 2 };
        }
    }
    2
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($flag:expr, $field:ident) => {
            if let Some(v) = $flag.clone() {
                cfg.$field = v;
            }
        };
    }
    set!(cli.t0, t0);
    set!(cli.abs_tol, abs_tol);
    set!(cli.det_tol, det_tol);
    set!(cli.nodes, max_nodes);
    set!(cli.mu_delta, mu_delta);
    set!(cli.mu_radius, mu_radius);
    set!(cli.mu_truncation, mu_truncation);
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = effective_config(&cli)?;
    if cli.dump_config {
        print!("{}", cfg.to_toml());
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(j) = cfg.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("configuring worker pool")?;
    }
    let out = Output { path: cfg.out.clone() };
    let Some(cmd) = cli.cmd else {
        return Err(UsageError("a subcommand is required (see --help)".into()).into());
    };
    match cmd {
        Command::Airy { which, x, t } => {
            let xs = parse_list(&x)?;
            let airy = cfg.airy();
            let mut rows = vec![];
            for &xv in &xs {
                let p = DeformedAiryParams::from_time(xv, t);
                rows.push(match which {
                    AiryWhich::Upper => AiryRow::from_eval(xv, t, "upper", ai_upper_gamma(&p, &airy)?),
                    AiryWhich::Lower => AiryRow::from_eval(xv, t, "lower", ai_lower_gamma(&p, &airy)?),
                    AiryWhich::Classical => AiryRow::plain(xv, "classical", airy_classical(xv)?),
                    AiryWhich::ClassicalPrime => AiryRow::plain(xv, "classical_prime", airy_classical_prime(xv)?),
                });
            }
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json if rows.len() == 1 => out.json("airy", &rows[0]),
                Format::Json => out.json("airy", &Rows { rows }),
                Format::Csv => out.csv(
                    &["x", "T", "value", "imag_residual", "contour_case"],
                    rows.iter().map(|r| {
                        vec![num(r.x), r.t.map(num).unwrap_or_default(), num(r.value), num(r.imag_residual), r.contour_case.clone().unwrap_or_default()]
                    }),
                ),
            }
        }
        Command::Bounds { which, x_min, x_max, x_step, t, refine } => {
            let format = cfg.format.unwrap_or(Format::Json);
            match which.as_str() {
                "stirling" => {
                    json_only(format, "bounds --which stirling")?;
                    out.json("bounds", &check_stirling_sandwich(1e-3, 1000)?)
                }
                "recip_gamma" => {
                    json_only(format, "bounds --which recip_gamma")?;
                    out.json("bounds", &check_recip_gamma_envelope(Rect::default_envelope_region(), 0.1)?)
                }
                _ => {
                    let kinds: Vec<EnvelopeKind> = if which == "all" {
                        EnvelopeKind::ALL.to_vec()
                    } else {
                        vec![which.parse::<EnvelopeKind>()?]
                    };
                    let ts = parse_times(&t)?;
                    let grid = uniform_grid(x_min, x_max, x_step)?;
                    let airy = cfg.airy();
                    let mut reports = vec![];
                    for kind in kinds {
                        let spec = EnvelopeSpec::new(kind);
                        let xs: Vec<f64> = grid.iter().copied().filter(|&x| spec.in_domain(x)).collect();
                        reports.push(if refine {
                            serde_json::to_value(certify_with_refinement(&spec, &xs, &ts, &airy)?)?
                        } else {
                            serde_json::to_value(certify_envelope(&spec, &xs, &ts, &airy)?)?
                        });
                    }
                    match format {
                        Format::Json => out.json("bounds", &serde_json::json!({ "reports": reports })),
                        Format::Csv => {
                            let mut lines = vec![];
                            for r in &reports {
                                let rows = if refine { &r["coarse"]["rows"] } else { &r["rows"] };
                                for row in rows.as_array().into_iter().flatten() {
                                    let f = |k: &str| row[k].as_f64().unwrap_or(f64::NAN);
                                    lines.push(vec![num(f("x")), num(f("T")), num(f("value")), num(f("envelope")), num(f("ratio"))]);
                                }
                            }
                            out.csv(&["x", "T", "value", "envelope", "ratio"], lines.into_iter())
                        }
                    }
                }
            }
        }
        Command::Kernel { t, mu_re, mu_im, s, x, y } => {
            let spec = KernelSpec::new(t, Complex64::new(mu_re, mu_im), s);
            let k = CrossoverKernel::new(spec, &cfg.airy(), cfg.kernel())?;
            let (xs, ys) = (parse_list(&x)?, parse_list(&y)?);
            let mut rows = vec![];
            for &xv in &xs {
                for &yv in &ys {
                    if xv < s || yv < s {
                        return Err(UsageError(format!("kernel arguments ({xv}, {yv}) must be >= s = {s}")).into());
                    }
                    let v = k.eval(xv, yv)?;
                    rows.push(KernelRow { x: xv, y: yv, re: v.re, im: v.im });
                }
            }
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Json => out.json("kernel", &Rows { rows }),
                Format::Csv => out.csv(&["x", "y", "re", "im"], rows.iter().map(|r| vec![num(r.x), num(r.y), num(r.re), num(r.im)])),
            }
        }
        Command::Hsnorm { t, mu_re, mu_im, s } => {
            json_only(cfg.format.unwrap_or(Format::Json), "hsnorm")?;
            let spec = KernelSpec::new(t, Complex64::new(mu_re, mu_im), s);
            let report = CrossoverKernel::new(spec, &cfg.airy(), cfg.kernel())?.hs_norms()?;
            out.json("hsnorm", &serde_json::json!({ "spec": spec, "report": report, "split_mismatch": report.split_mismatch() }))
        }
        Command::Det { t, mu_re, mu_im, s, airy_kernel, check_bound } => {
            json_only(cfg.format.unwrap_or(Format::Json), "det")?;
            if airy_kernel {
                return out.json("det", &airy_kernel_det(s, &cfg.det())?).map(|_| ExitCode::SUCCESS);
            }
            let spec = KernelSpec::new(t.expect("required by clap"), Complex64::new(mu_re, mu_im), s);
            if check_bound {
                let report = det_bound_check(&spec, &cfg.det(), &cfg.airy())?;
                out.json("det", &report)?;
                return Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) });
            }
            out.json("det", &serde_json::json!({ "spec": spec, "result": nystrom_det(&spec, &cfg.det(), &cfg.airy())? }))
        }
        Command::Tail { t, s } => {
            json_only(cfg.format.unwrap_or(Format::Json), "tail")?;
            out.json("tail", &tail_probability(s, t, &cfg.tail(), &cfg.airy())?)
        }
        Command::Sweep { t, s } => {
            let samples = tail_sweep(&parse_list(&s)?, &parse_times(&t)?, &cfg.tail(), &cfg.airy())?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Json => out.json("sweep", &Rows { rows: samples }),
                Format::Csv => out.csv(&["s", "T", "tail", "err"], samples.iter().map(|r| vec![num(r.s), num(r.t), num(r.tail), num(r.err)])),
            }
        }
        Command::Fit { input, gnuplot } => {
            json_only(cfg.format.unwrap_or(Format::Json), "fit")?;
            let samples = read_sweep(&input)?;
            let fit = fit_tail_envelope(&samples)?;
            let dat = gnuplot.unwrap_or_else(|| match &cfg.out {
                Some(p) => PathBuf::from(p).with_extension("dat"),
                None => PathBuf::from("fit.dat"),
            });
            std::fs::write(&dat, gnuplot_data(&samples, &fit)).with_context(|| format!("writing {}", dat.display()))?;
            out.json("fit", &fit)
        }
        Command::Selftest => {
            let checks = selftest::run_all(&cfg);
            let mut text = String::new();
            for c in &checks {
                text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            text.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
            out.write(&text)?;
            return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }?;
    Ok(ExitCode::SUCCESS)
}

fn json_only(format: Format, what: &str) -> Result<()> {
    if format == Format::Csv {
        return Err(UsageError(format!("{what} has no CSV output")).into());
    }
    Ok(())
}

fn positive_time(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        Ok(t) => Err(format!("T must be positive and finite, got {t}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_times(text: &str) -> Result<Vec<f64>> {
    let ts = parse_list(text)?;
    if let Some(t) = ts.iter().find(|t| **t <= 0.0) {
        return Err(UsageError(format!("T must be positive, got {t}")).into());
    }
    Ok(ts)
}

/// Comma list `a,b,c` or inclusive range `a:b:step`.
fn parse_list(text: &str) -> Result<Vec<f64>> {
    let bad = || UsageError(format!("cannot parse '{text}' as a list or a:b:step range"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let (a, b, step) = (v[0], v[1], v[2]);
        if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
            return Err(bad().into());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| a + step * k as f64).collect());
    }
    if parts.len() != 1 {
        return Err(bad().into());
    }
    let v: Vec<f64> = text.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(bad().into());
    }
    Ok(v)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_sweep(path: &PathBuf) -> Result<Vec<TailSample>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = rdr.deserialize::<TailSample>().collect::<Result<Vec<_>, _>>().map_err(|e| UsageError(format!("bad sweep CSV {}: {e}", path.display())))?;
    Ok(rows)
}

/// One block per `T` (separated by two blank lines): `s  ln(tail)  ln(envelope)`.
fn gnuplot_data(samples: &[TailSample], fit: &TailFit) -> String {
    let mut ts: Vec<f64> = samples.iter().map(|r| r.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut text = format!("# c1 = {:e}, c2 = {:e}, c3 = {:e}\n", fit.c1, fit.c2, fit.c3);
    for (i, &t) in ts.iter().enumerate() {
        if i > 0 {
            text.push_str("\n\n");
        }
        text.push_str(&format!("# T = {t}\n# s ln_tail ln_envelope\n"));
        let mut rows: Vec<&TailSample> = samples.iter().filter(|r| r.t == t).collect();
        rows.sort_by(|a, b| a.s.total_cmp(&b.s));
        for r in rows {
            text.push_str(&format!("{} {} {}\n", num(r.s), num(r.tail.ln()), num(fit.log_envelope(r.s, t))));
        }
    }
    text
}

#[derive(Serialize)]
struct Rows<T> {
    rows: Vec<T>,
}

#[derive(Serialize)]
struct AiryRow {
    which: &'static str,
    x: f64,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    value: f64,
    imag_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    contour_case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes_used: Option<usize>,
}

impl AiryRow {
    fn from_eval(x: f64, t: f64, which: &'static str, r: edgetail::deformed_airy::AiryEvalResult) -> Self {
        let case = serde_json::to_value(r.contour_case).ok().and_then(|v| v.as_str().map(str::to_owned));
        AiryRow { which, x, t: Some(t), value: r.value, imag_residual: r.imag_residual, contour_case: case, nodes_used: Some(r.quad.nodes_used) }
    }

    fn plain(x: f64, which: &'static str, value: f64) -> Self {
        AiryRow { which, x, t: None, value, imag_residual: 0.0, contour_case: None, nodes_used: None }
    }
}

#[derive(Serialize)]
struct KernelRow {
    x: f64,
    y: f64,
    re: f64,
    im: f64,
}

struct Output {
    path: Option<String>,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

impl Output {
    fn write(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {p}"))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, command: &str, body: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&Versioned { schema_version: 1, command, body })?;
        text.push('\n');
        self.write(&text)
    }

    fn csv(&self, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write(std::str::from_utf8(&bytes)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_list("8:20:1").unwrap().len(), 13);
        assert_eq!(parse_list("8,64").unwrap(), vec![8.0, 64.0]);
        assert_eq!(parse_list("-3").unwrap(), vec![-3.0]);
        assert!(parse_list("1:2").is_err());
        assert!(parse_list("a,b").is_err());
    }
}
