//! `indirect-fdi` subcommands: measures, fit, synth, report.
//!
//! Exit codes: 0 success, 2 bad arguments or input, 1 internal failure
//! (including failures to write outputs).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::econ::fit::fmt_sig;
use crate::econ::spec::{Term, Var};
use crate::econ::stats::{self, Summary};
use crate::econ::{self, SpecFile};
use crate::measures::{self, CommunicabilityMethod, MeasureOptions, MeasureTable};
use crate::netcore::{self, ColumnMap, DyadPanel};
use crate::synth::{self, DGPConfig};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "indirect-fdi", version, about = "Indirect FDI network measures and gravity estimators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Dyad panel CSV.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Model spec (TOML).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Output file (measures, fit, synth) or directory (report).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Control-path power; defaults to the spec's pinned value, else 1.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Multiplicative rescaling of communicability values.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub cmb_scale: f64,
    #[arg(long, global = true, default_value = "spectral")]
    pub cmb_method: CommunicabilityMethod,
    /// Fraction of heaviest edges kept per network in the edge report.
    #[arg(long, global = true, default_value_t = 0.025)]
    pub top_q: f64,
    /// Overrides the generator seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Leave timing out of the run manifest so reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Write a JSON run manifest here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Generator config (TOML) for `synth`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Ground-truth CSV written by `synth`.
    #[arg(long, global = true)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Per-dyad spl, spl_inv, cmb, diff, diff_inv.
    Measures,
    /// Estimate a model spec.
    Fit,
    /// Generate a synthetic panel.
    Synth,
    /// Summary statistics, correlations and top-edge classes.
    Report,
}

impl Command {
    fn as_str(self) -> &'static str {
        match self {
            Command::Measures => "measures",
            Command::Fit => "fit",
            Command::Synth => "synth",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunOptions {
    pub alpha: Option<f64>,
    pub cmb_scale: f64,
    pub cmb_method: String,
    pub top_q: f64,
    pub seed: Option<u64>,
    pub deterministic: bool,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<FileDigest>,
    pub options: RunOptions,
    /// sha256 over command, inputs and options.
    pub config_hash: String,
    pub outputs: Vec<FileDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

struct Run<'a> {
    cli: &'a Cli,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    alpha: Option<f64>,
}

impl<'a> Run<'a> {
    fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>, Error> {
        let bytes = fs::read(path).map_err(|source| Error::Input {
            path: path.display().to_string(),
            source,
        })?;
        self.inputs.push(FileDigest {
            role: role.into(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    fn write(&mut self, role: &str, path: &Path, bytes: &[u8]) -> Result<(), Error> {
        fs::write(path, bytes).map_err(|source| Error::Output {
            path: path.display().to_string(),
            source,
        })?;
        self.outputs.push(FileDigest {
            role: role.into(),
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Writes to `--out` if given, else to stdout.
    fn emit(&mut self, role: &str, bytes: &[u8]) -> Result<(), Error> {
        match &self.cli.out {
            Some(p) => self.write(role, &p.clone(), bytes),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(bytes).map_err(|source| Error::Output {
                    path: "<stdout>".into(),
                    source,
                })
            }
        }
    }

    fn panel(&mut self) -> Result<DyadPanel, Error> {
        let path = self
            .cli
            .input
            .clone()
            .ok_or_else(|| Error::Usage("--input <dyads.csv> is required".into()))?;
        let bytes = self.read("input", &path)?;
        let name = path.display().to_string();
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return Err(netcore::NetError::EmptyFile(name).into());
        }
        netcore::read_panel(bytes.as_slice(), &ColumnMap::default()).map_err(|e| match e {
            netcore::NetError::EmptyFile(_) => netcore::NetError::EmptyFile(name).into(),
            other => Error::Usage(format!("{name}: {other}")),
        })
    }

    fn measures(&self, panel: &DyadPanel) -> Result<MeasureTable, Error> {
        let alpha = self.alpha.unwrap_or(measures::DEFAULT_ALPHA);
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Usage(format!("--alpha must be a finite value >= 0, got {alpha}")));
        }
        if !(self.cli.cmb_scale.is_finite() && self.cli.cmb_scale > 0.0) {
            return Err(Error::Usage(format!("--cmb-scale must be positive, got {}", self.cli.cmb_scale)));
        }
        let (_, control) = netcore::build_networks(panel)?;
        let opts = MeasureOptions {
            alpha,
            cmb_method: self.cli.cmb_method,
            cmb_scale: self.cli.cmb_scale,
        };
        Ok(measures::measure_table(&control, opts)?)
    }

    fn manifest(&self, command: Command, elapsed_ms: Option<u128>) -> RunManifest {
        let options = RunOptions {
            alpha: self.alpha,
            cmb_scale: self.cli.cmb_scale,
            cmb_method: match self.cli.cmb_method {
                CommunicabilityMethod::Spectral => "spectral".into(),
                CommunicabilityMethod::Series => "series".into(),
            },
            top_q: self.cli.top_q,
            seed: self.cli.seed,
            deterministic: self.cli.deterministic,
        };
        let keyed = serde_json::json!({
            "command": command.as_str(),
            "inputs": self.inputs.iter().map(|d| (&d.role, &d.sha256)).collect::<Vec<_>>(),
            "options": &options,
        });
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.as_str(),
            inputs: vec![],
            options,
            config_hash: sha256_hex(keyed.to_string().as_bytes()),
            outputs: vec![],
            elapsed_ms,
        }
    }
}

fn cmd_measures(run: &mut Run) -> Result<(), Error> {
    let panel = run.panel()?;
    let table = run.measures(&panel)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf).map_err(|source| Error::Output {
        path: "<buffer>".into(),
        source,
    })?;
    run.emit("measures", &buf)
}

/// `ln_dist` interactions whose other factor is also a regressor.
fn dist_interactions(spec: &SpecFile) -> Vec<(String, String)> {
    let SpecFile::Single(s) = spec else {
        return vec![];
    };
    let is_dist = |t: &Term| matches!(t, Term::Ln(Var::Dist));
    s.regressors
        .iter()
        .filter_map(|t| match t {
            Term::Product(a, b) if is_dist(b) => Some((a.to_string(), t.to_string())),
            Term::Product(a, b) if is_dist(a) => Some((b.to_string(), t.to_string())),
            _ => None,
        })
        .collect()
}

fn cmd_fit(run: &mut Run) -> Result<(), Error> {
    let spec_path = run
        .cli
        .spec
        .clone()
        .ok_or_else(|| Error::Usage("--spec <model.toml> is required".into()))?;
    let text = run.read("spec", &spec_path)?;
    let text = String::from_utf8(text)
        .map_err(|_| Error::Usage(format!("{}: spec is not valid UTF-8", spec_path.display())))?;
    let spec = econ::parse_spec(&text).map_err(|e| Error::Usage(format!("{}: {e}", spec_path.display())))?;
    let pinned = match &spec {
        SpecFile::Single(s) => s.alpha,
        SpecFile::System(s) => s.alpha,
    };
    run.alpha = match (pinned, run.cli.alpha) {
        (Some(p), Some(a)) if p != a => {
            return Err(Error::Usage(format!(
                "--alpha {a} conflicts with alpha = {p} pinned in {}",
                spec_path.display()
            )))
        }
        (Some(p), _) => Some(p),
        (None, a) => a,
    };
    let panel = run.panel()?;
    let table = run.measures(&panel)?;
    let fit = econ::fit_spec_file(&panel, &table, &spec)?;
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    let mut human = fit.render_table();
    for (main, inter) in dist_interactions(&spec) {
        let (Some(bm), Some(bi)) = (fit.coef_of(&main), fit.coef_of(&inter)) else {
            continue;
        };
        match stats::critical_distance(bm, bi) {
            Ok(d) => {
                let _ = writeln!(human, "critical distance for {main}: {} km", fmt_sig(d, 6));
            }
            Err(e) => eprintln!("note: {main}: {e}"),
        }
    }
    print!("{human}");
    if run.cli.out.is_some() {
        let mut buf = Vec::new();
        fit.write_csv(&mut buf).map_err(|source| Error::Output {
            path: "<buffer>".into(),
            source,
        })?;
        run.emit("coefficients", &buf)?;
    }
    Ok(())
}

fn cmd_synth(run: &mut Run) -> Result<(), Error> {
    let mut cfg = match run.cli.config.clone() {
        Some(p) => {
            let bytes = run.read("config", &p)?;
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Usage(format!("{}: config is not valid UTF-8", p.display())))?;
            DGPConfig::from_toml(&text).map_err(|e| Error::Usage(format!("{}: {e}", p.display())))?
        }
        None => DGPConfig::default(),
    };
    if let Some(seed) = run.cli.seed {
        cfg.seed = seed;
    }
    let (panel, truth) = synth::generate(&cfg)?;
    let mut buf = Vec::new();
    netcore::write_panel(&panel, &mut buf)?;
    run.emit("dyads", &buf)?;
    if let Some(p) = run.cli.truth.clone() {
        let mut buf = Vec::new();
        synth::write_truth(&truth, &mut buf)?;
        run.write("truth", &p, &buf)?;
    }
    Ok(())
}

fn summary_table(rows: &[Summary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16}{:>8}{:>14}{:>14}{:>14}{:>14}",
        "variable", "n", "mean", "sd", "min", "max"
    );
    for s in rows {
        let _ = writeln!(
            out,
            "{:<16}{:>8}{:>14}{:>14}{:>14}{:>14}",
            s.name,
            s.n,
            fmt_sig(s.mean, 6),
            fmt_sig(s.sd, 6),
            fmt_sig(s.min, 6),
            fmt_sig(s.max, 6)
        );
    }
    out
}

fn cmd_report(run: &mut Run) -> Result<(), Error> {
    if !(run.cli.top_q > 0.0 && run.cli.top_q <= 1.0) {
        return Err(Error::Usage(format!("--top-q must lie in (0, 1], got {}", run.cli.top_q)));
    }
    let panel = run.panel()?;
    let table = run.measures(&panel)?;
    let summary = stats::summarize(&panel, &table, &stats::default_summary_terms(&table));
    print!("{}", summary_table(&summary));

    let corr_terms: Vec<Term> = stats::default_correlation_terms(&table)
        .into_iter()
        .filter(|t| {
            let s = stats::summarize_values(&t.to_string(), &econ::design::evaluate_term(
                &panel,
                &table,
                t,
                econ::LogPolicy::Shift1,
            ));
            let keep = s.n >= 2 && s.sd > 0.0;
            if !keep {
                eprintln!("warning: `{t}` has no variance; left out of the correlation table");
            }
            keep
        })
        .collect();
    let corr = if corr_terms.len() >= 2 {
        Some(stats::correlations(&panel, &table, &corr_terms)?)
    } else {
        eprintln!("warning: fewer than two variables vary; no correlation table");
        None
    };

    let (trade, control) = netcore::build_networks(&panel)?;
    let edges = netcore::classify_top_edges(&trade, &control, run.cli.top_q)?;

    if let Some(dir) = run.cli.out.clone() {
        fs::create_dir_all(&dir).map_err(|source| Error::Output {
            path: dir.display().to_string(),
            source,
        })?;
        let buffer_err = |source| Error::Output {
            path: "<buffer>".into(),
            source,
        };
        let mut buf = Vec::new();
        stats::write_summary_csv(&summary, &mut buf).map_err(buffer_err)?;
        run.write("summary", &dir.join("summary.csv"), &buf)?;
        if let Some(c) = &corr {
            let mut buf = Vec::new();
            c.write_csv(&mut buf).map_err(buffer_err)?;
            run.write("correlations", &dir.join("correlations.csv"), &buf)?;
        }
        let mut buf = Vec::new();
        netcore::write_edge_classes(&edges, &mut buf)?;
        run.write("edges", &dir.join("edges.csv"), &buf)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let start = Instant::now();
    let mut run = Run {
        cli,
        inputs: vec![],
        outputs: vec![],
        alpha: cli.alpha,
    };
    match cli.command {
        Command::Measures => cmd_measures(&mut run)?,
        Command::Fit => cmd_fit(&mut run)?,
        Command::Synth => cmd_synth(&mut run)?,
        Command::Report => cmd_report(&mut run)?,
    }
    if let Some(path) = cli.manifest.clone() {
        let elapsed = (!cli.deterministic).then(|| start.elapsed().as_millis());
        let mut m = run.manifest(cli.command, elapsed);
        m.inputs = std::mem::take(&mut run.inputs);
        m.outputs = std::mem::take(&mut run.outputs);
        let mut json = serde_json::to_string_pretty(&m).expect("manifest serializes");
        json.push('\n');
        fs::write(&path, json).map_err(|source| Error::Output {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            1
        }
    }
}
