//! Batch harness over the verification suites.
//!
//! Exit codes: 0 all cases pass, 1 at least one case failed, 2 configuration
//! error, 3 internal or numerical-budget error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use skms_core::report::Suite;
use skms_core::skms::growth_scan;
use skms_core::suites::{default_tolerances, suite_by_name, SuiteConfig};
use skms_core::testfn::TestFunction;

const VERSION: &str = concat!("skms-verify v", env!("CARGO_PKG_VERSION"));

#[derive(Parser, Debug)]
#[command(name = "skms-verify", version, about = "Run the numerical verification suites")]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed shared by all randomized cases.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Dump strip-scan samples as CSV (skms and all only).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,

    /// Suite name, as an alternative to the subcommand.
    #[arg(long, global = true)]
    suite: Option<String>,

    /// Tolerance override KEY=VAL; repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VAL")]
    tol: Vec<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Kernel identities and decomposition.
    Kernel,
    /// Boundary identity, axioms, growth report, derivation checks.
    Skms,
    /// Selfdual instances: splits, domination, evaluators.
    Araki,
    /// Graded Gibbs classification checks.
    Gibbs,
    /// Exact mode-algebra relations and deformed charges.
    Svir,
    /// Restriction norms and the non-isotony search.
    Jordan,
    /// Every suite in sequence.
    All,
    /// Print the effective configuration and exit.
    ShowConfig,
}

/// Flat file/flag configuration; every field optional so that the file,
/// the flags and the defaults merge cleanly.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    pairs: Option<usize>,
    instances: Option<usize>,
    matrix_m: Option<usize>,
    gibbs_n: Option<usize>,
    fock_cutoff2: Option<i64>,
    search_budget: Option<usize>,
    quad_rel_tol: Option<f64>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    tol: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Serialize)]
struct EffectiveConfig {
    seed: u64,
    pairs: usize,
    instances: usize,
    matrix_m: usize,
    gibbs_n: usize,
    fock_cutoff2: i64,
    search_budget: usize,
    quad_rel_tol: f64,
    tolerances: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct SuiteReport {
    #[serde(flatten)]
    suite: Suite,
    wall_ms: u64,
}

#[derive(Serialize)]
struct FullReport {
    schema: u32,
    version: &'static str,
    seed: u64,
    suites: Vec<SuiteReport>,
    failures: usize,
}

fn config_error(msg: &str) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(2)
}

/// Write a line to stdout, swallowing broken-pipe style errors so that a
/// downstream `head` does not turn into a panic or a phantom exit code.
fn emit_stdout(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.write_all(b"\n"));
}

fn parse_tol_overrides(items: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected KEY=VAL, got '{item}'"))?;
        let val: f64 = v
            .parse()
            .map_err(|_| format!("tolerance '{item}' has a non-numeric value"))?;
        if !(val > 0.0) {
            return Err(format!("tolerance '{item}' must be positive"));
        }
        out.insert(k.to_string(), val);
    }
    Ok(out)
}

fn build_config(cli: &Cli) -> Result<(SuiteConfig, FileConfig), String> {
    let mut file = FileConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        file = serde_json::from_str(&text)
            .map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
    }

    let mut cfg = SuiteConfig::default();
    if let Some(s) = file.seed {
        cfg.seed = s;
    }
    if let Some(p) = file.pairs {
        cfg.pairs = p;
    }
    if let Some(i) = file.instances {
        cfg.instances = i;
    }
    if let Some(m) = file.matrix_m {
        cfg.matrix_m = m;
    }
    if let Some(n) = file.gibbs_n {
        cfg.gibbs_n = n;
    }
    if let Some(f) = file.fock_cutoff2 {
        cfg.fock_cutoff2 = f;
    }
    if let Some(b) = file.search_budget {
        cfg.search_budget = b;
    }
    if let Some(q) = file.quad_rel_tol {
        if !(q > 0.0) {
            return Err(String::from("quad_rel_tol must be positive"));
        }
        cfg.kernel.quad_rel_tol = q;
    }
    if let Some(t) = &file.tol {
        for (k, &v) in t {
            if !(v > 0.0) {
                return Err(format!("tolerance '{k}' must be positive"));
            }
            cfg.tol.insert(k.clone(), v);
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    for (k, v) in parse_tol_overrides(&cli.tol)? {
        cfg.tol.insert(k, v);
    }
    if cfg.fock_cutoff2 < 0 || cfg.fock_cutoff2 > 28 {
        return Err(String::from("fock_cutoff2 must lie in 0..=28"));
    }
    Ok((cfg, file))
}

fn effective(cfg: &SuiteConfig) -> EffectiveConfig {
    let mut tolerances = default_tolerances();
    for (k, v) in &cfg.tol {
        tolerances.insert(k.clone(), *v);
    }
    EffectiveConfig {
        seed: cfg.seed,
        pairs: cfg.pairs,
        instances: cfg.instances,
        matrix_m: cfg.matrix_m,
        gibbs_n: cfg.gibbs_n,
        fock_cutoff2: cfg.fock_cutoff2,
        search_budget: cfg.search_budget,
        quad_rel_tol: cfg.kernel.quad_rel_tol,
        tolerances,
    }
}

fn run_suites(names: &[&str], cfg: &SuiteConfig) -> Result<Vec<SuiteReport>, String> {
    // keep budget-abort panics as single-line errors
    std::panic::set_hook(Box::new(|_| {}));
    let result = run_suites_inner(names, cfg);
    let _ = std::panic::take_hook();
    result
}

fn run_suites_inner(names: &[&str], cfg: &SuiteConfig) -> Result<Vec<SuiteReport>, String> {
    let mut out = Vec::new();
    for &name in names {
        let started = Instant::now();
        let cfg = cfg.clone();
        let suite = std::panic::catch_unwind(move || {
            if name == "all" {
                unreachable!()
            }
            suite_by_name(name, &cfg)
        })
        .map_err(|p| {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| String::from("panic"));
            format!("suite '{name}' aborted: {msg}")
        })?
        .ok_or_else(|| format!("unknown suite '{name}'"))?;
        out.push(SuiteReport {
            suite,
            wall_ms: started.elapsed().as_millis() as u64,
        });
    }
    Ok(out)
}

fn write_csv(path: &PathBuf, cfg: &SuiteConfig) -> Result<(), String> {
    let x = skms_core::car::Word::from_factors(vec![
        skms_core::car::Generator::fermion(TestFunction::hermite(0, 1.0, 0.0, 0)),
        skms_core::car::Generator::fermion(TestFunction::hermite(1, 0.9, 0.3, 0)),
    ]);
    let y = skms_core::car::Word::from_factors(vec![
        skms_core::car::Generator::fermion(TestFunction::hermite(0, 1.1, -0.2, 0)),
        skms_core::car::Generator::fermion(TestFunction::hermite(2, 0.8, 0.1, 0)),
    ]);
    let t_grid: Vec<f64> = (0..6).map(|k| k as f64 * 1.2).collect();
    let sigma_grid = vec![0.25, 0.5, 0.75];
    let rep = growth_scan(&x, &y, &t_grid, &sigma_grid, &cfg.kernel)
        .map_err(|e| format!("strip scan failed: {e}"))?;
    let mut text = String::from("re_z,im_z,re_F,im_F,err\n");
    for s in &rep.samples {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            s.z[0], s.z[1], s.value[0], s.value[1], s.err
        ));
    }
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let (cfg, file) = match build_config(&cli) {
        Ok(v) => v,
        Err(e) => return config_error(&e),
    };

    let command = match (&cli.command, &cli.suite) {
        (Some(_), Some(_)) => {
            return config_error("give either a subcommand or --suite, not both")
        }
        (Some(c), None) => *c,
        (None, Some(name)) => match name.as_str() {
            "kernel" => Command::Kernel,
            "skms" => Command::Skms,
            "araki" => Command::Araki,
            "gibbs" => Command::Gibbs,
            "svir" => Command::Svir,
            "jordan" => Command::Jordan,
            "all" => Command::All,
            other => return config_error(&format!("unknown suite '{other}'")),
        },
        (None, None) => return config_error("no suite selected; see --help"),
    };

    if command == Command::ShowConfig {
        let text = serde_json::to_string_pretty(&effective(&cfg)).expect("serialize config");
        emit_stdout(&text);
        return ExitCode::SUCCESS;
    }

    let names: Vec<&str> = match command {
        Command::Kernel => vec!["kernel"],
        Command::Skms => vec!["skms"],
        Command::Araki => vec!["araki"],
        Command::Gibbs => vec!["gibbs"],
        Command::Svir => vec!["svir"],
        Command::Jordan => vec!["jordan"],
        Command::All => vec!["kernel", "skms", "araki", "jordan", "gibbs", "svir"],
        Command::ShowConfig => unreachable!(),
    };

    let suites = match run_suites(&names, &cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };

    if let Some(csv) = cli.csv.as_ref().or(file.csv.as_ref()) {
        if names.contains(&"skms") {
            if let Err(e) = write_csv(csv, &cfg) {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
        } else {
            eprintln!("note: --csv applies to the skms strip scan; nothing to dump");
        }
    }

    let failures: usize = suites.iter().map(|s| s.suite.failures()).sum();
    let report = FullReport {
        schema: 1,
        version: VERSION,
        seed: cfg.seed,
        suites,
        failures,
    };
    let text = serde_json::to_string_pretty(&report).expect("serialize report");

    match cli.out.as_ref().or(file.out.as_ref()) {
        Some(path) => {
            if let Err(e) = fs::write(path, text.as_bytes()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => emit_stdout(&text),
    }

    if failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
