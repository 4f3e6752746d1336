//! Command-line front end for the boundary-control experiments.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use edgeprep::harness::{self, ErrorModel, ExperimentConfig};
use edgeprep::{Error, LawKind, Rational, Result};

#[derive(Parser, Debug)]
#[command(name = "edgeprep", version, about = "Edge-state preparation on the open AAH chain by boundary feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Eigenvalues, boundary weights and edge labels.
    Spectrum,
    /// One trajectory from |site⟩.
    Evolve,
    /// Final fidelity from every localized initial state.
    SweepSites,
    /// Initial states cosθ|1⟩ + sinθ|2⟩.
    SweepTheta,
    /// Random two-site initial states.
    SweepRandom,
    /// Final fidelity over a (p, p_f) grid.
    OptimizeP,
    /// Initial-state and field-scaling errors.
    Robustness,
    /// Control time against lattice size.
    Scaling,
    /// Edge-subspace control and the concurrence scan.
    Entangle,
}

/// Every option may also be given as `key = value` in the `--config` file,
/// using the long flag name as key. Command-line values win.
#[derive(clap::Args, Debug, Default)]
struct Options {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of lattice sites.
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long = "t-hop", global = true)]
    t_hop: Option<String>,
    /// Potential strength.
    #[arg(long, global = true)]
    v: Option<String>,
    /// Modulation frequency as NUM/DEN.
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Potential phase in radians; accepts forms like `2pi/3`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<String>,
    /// v1, v2 or v3.
    #[arg(long, global = true)]
    law: Option<String>,
    #[arg(long, global = true)]
    gain: Option<String>,
    /// Coefficient of the target state in P.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pf: Option<String>,
    /// Uniform coefficient of the non-target states (default pᵢ = λᵢ).
    #[arg(long, global = true, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    dt: Option<String>,
    #[arg(long = "t-max", global = true)]
    t_max: Option<String>,
    /// Record every STRIDE-th integration step.
    #[arg(long, global = true)]
    stride: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Initial site for single runs.
    #[arg(long, global = true)]
    site: Option<String>,
    /// Minimum boundary weight of an edge state.
    #[arg(long = "edge-threshold", global = true)]
    edge_threshold: Option<String>,
    /// Fidelity threshold for the control-time column.
    #[arg(long, global = true)]
    threshold: Option<String>,
    /// Number of random draws.
    #[arg(long, global = true)]
    count: Option<String>,
    /// Number of θ grid points.
    #[arg(long, global = true)]
    points: Option<String>,
    /// Comma-separated p values.
    #[arg(long = "p-grid", global = true, allow_hyphen_values = true)]
    p_grid: Option<String>,
    /// Comma-separated p_f values.
    #[arg(long = "pf-grid", global = true, allow_hyphen_values = true)]
    pf_grid: Option<String>,
    /// Comma-separated error magnitudes.
    #[arg(long, global = true)]
    deltas: Option<String>,
    /// Comma-separated lattice sizes.
    #[arg(long, global = true)]
    sizes: Option<String>,
    /// Output CSV (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output CSV for the random-draw scan of `entangle`.
    #[arg(long = "scan-out", global = true)]
    scan_out: Option<PathBuf>,
}

/// Command-line values layered over the config file.
struct Settings<'a> {
    cli: &'a Options,
    file: HashMap<String, String>,
}

impl Settings<'_> {
    fn raw(&self, key: &str) -> Option<String> {
        let cli = match key {
            "n" => &self.cli.n,
            "t-hop" => &self.cli.t_hop,
            "v" => &self.cli.v,
            "alpha" => &self.cli.alpha,
            "delta" => &self.cli.delta,
            "law" => &self.cli.law,
            "gain" => &self.cli.gain,
            "pf" => &self.cli.pf,
            "p" => &self.cli.p,
            "dt" => &self.cli.dt,
            "t-max" => &self.cli.t_max,
            "stride" => &self.cli.stride,
            "seed" => &self.cli.seed,
            "workers" => &self.cli.workers,
            "site" => &self.cli.site,
            "edge-threshold" => &self.cli.edge_threshold,
            "threshold" => &self.cli.threshold,
            "count" => &self.cli.count,
            "points" => &self.cli.points,
            "p-grid" => &self.cli.p_grid,
            "pf-grid" => &self.cli.pf_grid,
            "deltas" => &self.cli.deltas,
            "sizes" => &self.cli.sizes,
            "out" => return self.cli.out.as_ref().map(|p| p.display().to_string()).or_else(|| self.file.get(key).cloned()),
            "scan-out" => {
                return self.cli.scan_out.as_ref().map(|p| p.display().to_string()).or_else(|| self.file.get(key).cloned())
            }
            _ => unreachable!("unknown option {key}"),
        };
        cli.clone().or_else(|| self.file.get(key).cloned())
    }

    fn parse_with<T>(&self, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => f(s.trim()).map(Some).ok_or_else(|| Error::InvalidParameter(format!("invalid value for {key}: {s:?}"))),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.parse_with(key, |s| s.parse().ok())
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.parse_with(key, |s| s.split(',').map(|x| x.trim().parse().ok()).collect())
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }
}

fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("{}:{}: expected key = value", path.display(), lineno + 1))
        })?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidParameter(format!("{}:{}: unknown key {key:?}", path.display(), lineno + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "n", "t-hop", "v", "alpha", "delta", "law", "gain", "pf", "p", "dt", "t-max", "stride", "seed", "workers", "site",
    "edge-threshold", "threshold", "count", "points", "p-grid", "pf-grid", "deltas", "sizes", "out", "scan-out",
];

/// Angle in radians: a number, or `[k][*]pi[/m]` with optional sign.
fn parse_angle(s: &str) -> Option<f64> {
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let s = s.replace(' ', "").to_ascii_lowercase();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.to_string()),
        None => (1.0, s.trim_start_matches('+').to_string()),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let factor = num.strip_suffix("pi")?.trim_end_matches('*');
    let factor = if factor.is_empty() { 1.0 } else { factor.parse::<f64>().ok()? };
    (den != 0.0).then(|| sign * factor * PI / den)
}

fn build_config(command: Command, s: &Settings) -> Result<ExperimentConfig> {
    let kind = match command {
        Command::Entangle => LawKind::V3,
        _ => s.get::<LawKind>("law")?.unwrap_or(LawKind::V2),
    };
    let mut c = ExperimentConfig::for_law(kind);
    if command == Command::Scaling {
        c.integrator.t_max = 5000.0;
        c.fidelity_threshold = 0.99;
    }
    if let Some(n) = s.get("n")? {
        c.lattice.sites = n;
    }
    if let Some(t) = s.get("t-hop")? {
        c.lattice.hopping = t;
    }
    if let Some(v) = s.get("v")? {
        c.lattice.potential = v;
    }
    if let Some(a) = s.get::<Rational>("alpha")? {
        c.lattice.alpha = a;
    }
    if let Some(d) = s.parse_with("delta", parse_angle)? {
        c.lattice.phase = d;
    }
    if let Some(g) = s.get("gain")? {
        c.law.gain = g;
    }
    if let Some(pf) = s.get("pf")? {
        c.law.p_f = pf;
    }
    c.law.p = s.get("p")?;
    if let Some(dt) = s.get("dt")? {
        c.integrator.dt = dt;
    }
    if let Some(t) = s.get("t-max")? {
        c.integrator.t_max = t;
    }
    if let Some(stride) = s.get("stride")? {
        c.integrator.record_stride = stride;
    }
    if let Some(seed) = s.get("seed")? {
        c.seed = seed;
    }
    if let Some(w) = s.get("workers")? {
        c.workers = w;
    }
    if let Some(site) = s.get("site")? {
        c.initial_site = site;
    }
    if let Some(e) = s.get("edge-threshold")? {
        c.edge_threshold = e;
    }
    if let Some(f) = s.get("threshold")? {
        c.fidelity_threshold = f;
    }
    c.validate()?;
    Ok(c)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> Result<()> {
    let file = match &cli.opts.config {
        Some(p) => read_config_file(p)?,
        None => HashMap::new(),
    };
    let s = Settings { cli: &cli.opts, file };
    let config = build_config(cli.command, &s)?;
    let out_path = s.path("out");
    let out = || open_out(out_path.as_deref());

    match cli.command {
        Command::Spectrum => harness::spectrum_table(&config, out()?)?,
        Command::Evolve => harness::write_trajectory_csv(&harness::run_single(&config)?, out()?)?,
        Command::SweepSites => harness::sweep_initial_sites(&config)?.write_csv(out()?)?,
        Command::SweepTheta => {
            let points = s.get("points")?.unwrap_or(101);
            harness::sweep_theta(&config, points)?.write_csv(out()?)?
        }
        Command::SweepRandom => {
            let table = harness::sweep_random(&config, s.get("count")?.unwrap_or(500))?;
            table.write_csv(out()?)?;
            eprintln!("mean final fidelity: {:.6}", table.mean_fidelity());
        }
        Command::OptimizeP => {
            let p_grid = s.list("p-grid")?.unwrap_or_else(|| (1..=8).map(f64::from).collect());
            let pf_grid = s.list("pf-grid")?.unwrap_or_else(|| (-6..=16).map(|k| f64::from(k) * 0.5).collect());
            harness::optimize_p(&config, &p_grid, &pf_grid)?.write_csv(out()?)?
        }
        Command::Robustness => {
            let deltas = s.list("deltas")?.unwrap_or_else(|| (0..=10).map(|k| f64::from(k) * 0.01).collect());
            harness::robustness_scan(&config, &ErrorModel::channel_grid(&deltas))?.write_csv(out()?)?
        }
        Command::Scaling => {
            let sizes = s.list("sizes")?.unwrap_or_else(|| vec![11, 17, 23, 29, 35, 41, 47, 53, 59]);
            let result = harness::scaling_study(&config, &sizes, config.fidelity_threshold)?;
            result.table.write_csv(out()?)?;
            match result.fit {
                Some(f) => eprintln!(
                    "time = {:.6}·N + {:.6}, R² = {:.6}",
                    f.slope, f.intercept, f.r_squared
                ),
                None => eprintln!("too few sizes reached the threshold for a fit"),
            }
        }
        Command::Entangle => {
            let result = harness::entangle_run(&config, s.get("count")?.unwrap_or(300))?;
            harness::write_trajectory_csv(&result.trajectory, out()?)?;
            if let Some(p) = s.path("scan-out") {
                result.scan.write_csv(open_out(Some(&p))?)?;
            }
            eprintln!("steady concurrence: {:.6}", result.steady_concurrence);
            if let Some(m) = result.scan.mean_concurrence() {
                eprintln!("mean steady concurrence over {} draws: {:.6}", result.scan.rows.len(), m);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
