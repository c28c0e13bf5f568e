//! Command-line front end.
//!
//! Every command writes its artifacts into `--output-dir` (default: the
//! `FRAGPREP_OUTPUT_DIR` environment variable, else the working directory)
//! and nowhere else. Exit codes: 0 success, 1 runtime or numeric failure,
//! 2 usage, parse or config error.
//!
//! Hamiltonian arguments are Pauli text files or `builtin:<name>` with
//! `<name>` one of `h2`, `ising3`, `xxz4`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use crate::direct_init::{compile_initializer, parse_ci_vector};
use crate::error::{read_text, Error, Result};
use crate::evolution::count_gates;
use crate::linalg::eigh;
use crate::numfmt::sig;
use crate::pauli::{PauliSum, DEFAULT_ORACLE_CAP};
use crate::prony::{
    aliasing_warning, generate_series, prony_fit_with, AutocorrelationSeries, PronyOptions,
};
use crate::qpe::{
    aliasing_scan, default_scale_factor, ground_state_target, prepare_ground_state, resolution,
    run_qpe, InitialState, QpeConfig, UnitaryMode, DEFAULT_MIN_PEAK_WEIGHT,
};
use crate::resources::ResourceConfig;
use crate::rng::derive_seed;
use crate::statevector::{Outcome, Statevector};
use crate::toys;
use crate::vqe::{Scheme, VqeConfig};

#[derive(Debug, Parser)]
#[command(name = "fragprep", version, about = "Fragment state preparation toolkit")]
pub struct Cli {
    /// Directory for all output files.
    #[arg(long, global = true, env = "FRAGPREP_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,
    /// Base seed (default 0); overrides the seed of a VQE config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Suppress the human-readable summary on stdout.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact eigenvalues and ground gap of a Hamiltonian.
    Spectrum(SpectrumArgs),
    /// Phase-estimation histogram, ancilla sweeps and aliasing scans.
    Qpe(QpeArgs),
    /// Prepare a ground state by QPE readout or direct initialization.
    Prepare(PrepareArgs),
    /// Autocorrelation series and Prony eigenvalue extraction.
    Prony(PronyArgs),
    /// Coupled-fragment VQE from a run config.
    Vqe(ConfigArg),
    /// CNOT resource tables and ancilla estimates from a config.
    Resources(ConfigArg),
    /// Parallel grid of VQE runs from a sweep config.
    Sweep(ConfigArg),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    pub hamiltonian: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Trotter,
    Exact,
    RescaledTrotter,
}

impl From<ModeArg> for UnitaryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Trotter => UnitaryMode::Trotter,
            ModeArg::Exact => UnitaryMode::Exact,
            ModeArg::RescaledTrotter => UnitaryMode::RescaledTrotter,
        }
    }
}

#[derive(Debug, Args)]
pub struct QpeArgs {
    pub hamiltonian: String,
    /// Ancilla count, a range `2..9` (inclusive) or a list `4,6,8`.
    #[arg(long, default_value = "6")]
    pub ancilla: String,
    #[arg(long, default_value_t = 4)]
    pub trotter: usize,
    /// Multiplier on the default scale factor.
    #[arg(long, default_value_t = 1.0)]
    pub b_mult: f64,
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
    #[arg(long, value_enum, default_value = "trotter")]
    pub mode: ModeArg,
    /// Initial system basis state as a bitstring (qubit 0 rightmost).
    #[arg(long)]
    pub initial: Option<String>,
    /// Comma-separated scale-factor multipliers for an aliasing scan.
    #[arg(long, value_delimiter = ',')]
    pub scan: Option<Vec<f64>>,
    /// Simulate the gate-level circuit instead of fused controlled powers.
    #[arg(long)]
    pub literal: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum MethodArg {
    Qpe,
    Di,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Hamiltonian (required for QPE and for DI of the exact ground state).
    pub hamiltonian: Option<String>,
    #[arg(long, value_enum, default_value = "qpe")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 6)]
    pub ancilla: usize,
    #[arg(long, default_value_t = 4)]
    pub trotter: usize,
    #[arg(long, value_enum, default_value = "trotter")]
    pub mode: ModeArg,
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub max_attempts: Option<usize>,
    /// DI target given as a CI vector file (`coef occupation` lines).
    #[arg(long, conflicts_with = "state")]
    pub ci: Option<PathBuf>,
    /// DI target given as a statevector text file.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PronyArgs {
    /// Hamiltonian to propagate (omit when `--series` is given).
    pub hamiltonian: Option<String>,
    /// Read a stored autocorrelation CSV instead of generating one.
    #[arg(long, conflicts_with = "hamiltonian")]
    pub series: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Scale factor; defaults to the QPE default for the Hamiltonian.
    #[arg(long)]
    pub b: Option<f64>,
    /// Highest sample index N (N + 1 samples).
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Model order p.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long)]
    pub initial: Option<String>,
    /// Relative pruning threshold, or `none`.
    #[arg(long, default_value = "0.001")]
    pub prune: String,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    pub config: PathBuf,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(summary) => {
            if !cli.quiet {
                print!("{summary}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::SizeCap { .. }
        | Error::SizeMismatch { .. }
        | Error::NotHermitian { .. } => 2,
        Error::PreparationFailed { .. } | Error::Numeric(_) | Error::Io(_) => 1,
    }
}

/// Runs a parsed command and returns the stdout summary.
pub fn run(cli: &Cli) -> Result<String> {
    std::fs::create_dir_all(&cli.output_dir)?;
    let out = Output {
        dir: cli.output_dir.clone(),
    };
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, &out),
        Command::Qpe(a) => cmd_qpe(a, cli.seed.unwrap_or(0), &out),
        Command::Prepare(a) => cmd_prepare(a, cli.seed.unwrap_or(0), &out),
        Command::Prony(a) => cmd_prony(a, &out),
        Command::Vqe(a) => cmd_vqe(&a.config, cli.seed, &out),
        Command::Resources(a) => cmd_resources(&a.config, &out),
        Command::Sweep(a) => cmd_sweep(&a.config, cli.seed.unwrap_or(0), cli.jobs, &out),
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        Ok(path)
    }
}

/// Loads a Pauli file or a `builtin:` toy.
pub fn load_hamiltonian(arg: &str) -> Result<PauliSum> {
    let text = match arg.strip_prefix("builtin:") {
        Some("h2") => toys::H2_FRAGMENT_PAULI.to_string(),
        Some("ising3") => toys::ISING3_PAULI.to_string(),
        Some("xxz4") => toys::XXZ4_PAULI.to_string(),
        Some(other) => {
            return Err(Error::invalid(format!(
                "unknown builtin `{other}` (expected h2, ising3 or xxz4)"
            )))
        }
        None => read_text(arg)?,
    };
    let h = PauliSum::parse_text(&text)?.combine();
    h.ensure_hermitian()?;
    Ok(h)
}

fn parse_initial(bits: Option<&str>, n: usize) -> Result<InitialState> {
    match bits {
        None => Ok(InitialState::Basis(0)),
        Some(b) => {
            let o = Outcome::parse(b)?;
            if o.width != n {
                return Err(Error::invalid(format!(
                    "initial bitstring has {} bits for {n} qubits",
                    o.width
                )));
            }
            Ok(InitialState::Basis(o.value))
        }
    }
}

/// `6`, `2..9` (inclusive) or `4,6,8`.
pub fn parse_ancilla_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::invalid(format!("cannot parse ancilla list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

fn exact_spectrum(h: &PauliSum) -> Result<Vec<f64>> {
    let hs = h.subtract_identity();
    let off = hs.identity_offset();
    Ok(eigh(&hs.to_dense_matrix(DEFAULT_ORACLE_CAP)?)
        .0
        .into_iter()
        .map(|e| e + off)
        .collect())
}

fn cmd_spectrum(a: &SpectrumArgs, out: &Output) -> Result<String> {
    let h = load_hamiltonian(&a.hamiltonian)?;
    if h.subtract_identity().is_empty() {
        return Err(Error::invalid(
            "Hamiltonian has only an identity part; nothing to diagonalize",
        ));
    }
    let vals = exact_spectrum(&h)?;
    let gap = if vals.len() > 1 { vals[1] - vals[0] } else { 0.0 };
    let mut csv = String::from("# fragprep spectrum v1\nindex,energy\n");
    for (i, e) in vals.iter().enumerate() {
        writeln!(csv, "{i},{}", sig(*e)).unwrap();
    }
    let path = out.write("spectrum.csv", &csv)?;
    let mut s = String::new();
    for (i, e) in vals.iter().enumerate() {
        writeln!(s, "{i:>4}  {}", sig(*e)).unwrap();
    }
    writeln!(s, "ground gap: {}", sig(gap)).unwrap();
    writeln!(s, "wrote {}", path.display()).unwrap();
    Ok(s)
}

fn cmd_qpe(a: &QpeArgs, seed: u64, out: &Output) -> Result<String> {
    let h = load_hamiltonian(&a.hamiltonian)?;
    let ancillas = parse_ancilla_list(&a.ancilla)?;
    let initial = parse_initial(a.initial.as_deref(), h.n_qubits())?;
    let exact = if h.n_qubits() <= DEFAULT_ORACLE_CAP {
        Some(exact_spectrum(&h)?)
    } else {
        None
    };
    let base = |t: usize| -> Result<QpeConfig> {
        let mut c = QpeConfig::new(&h, t, a.trotter)?
            .with_multiplier(a.b_mult)
            .with_shots(a.shots)
            .with_seed(seed)
            .with_mode(a.mode.into())
            .with_initial_state(initial.clone());
        c.literal = a.literal;
        c.validate()?;
        Ok(c)
    };
    let mut s = String::new();
    let sweep = ancillas.len() > 1;
    let mut summary = String::from(
        "# fragprep qpe-sweep v1\nn_ancilla,b,resolution,peak_energy,peak_frequency,peak_error\n",
    );
    for &t in &ancillas {
        let cfg = base(t)?;
        let run = run_qpe(&h, &cfg)?;
        let name = if sweep {
            format!("qpe_histogram_t{t}.csv")
        } else {
            "qpe_histogram.csv".to_string()
        };
        out.write(&name, &run.to_csv())?;
        let peak = run.peak().ok_or_else(|| Error::Numeric("empty histogram".into()))?;
        let err = exact.as_ref().map(|v| {
            v.iter()
                .map(|e| (e - peak.energy).abs())
                .fold(f64::INFINITY, f64::min)
        });
        writeln!(
            summary,
            "{t},{},{},{},{},{}",
            sig(run.b),
            sig(resolution(run.b, t)),
            sig(peak.energy),
            sig(peak.probability),
            err.map(sig).unwrap_or_default()
        )
        .unwrap();
        writeln!(
            s,
            "n_ancilla {t}: peak {} Eh (frequency {}), resolution {}",
            sig(peak.energy),
            sig(peak.probability),
            sig(resolution(run.b, t))
        )
        .unwrap();
        if !sweep {
            for e in &run.histogram {
                writeln!(s, "  {}  {}  {}", e.bitstring, sig(e.energy), e.count).unwrap();
            }
        }
    }
    if sweep {
        out.write("qpe_sweep.csv", &summary)?;
    }
    if let Some(mults) = &a.scan {
        let t = *ancillas.last().expect("at least one ancilla count");
        let report = aliasing_scan(&h, &base(t)?, mults, DEFAULT_MIN_PEAK_WEIGHT)?;
        out.write("aliasing.json", &report.to_json())?;
        writeln!(
            s,
            "aliasing scan over {:?}: {} flagged, trusted energies {:?}",
            mults,
            report.flagged.len(),
            report.trusted.iter().map(|e| sig(*e)).collect::<Vec<_>>()
        )
        .unwrap();
    }
    Ok(s)
}

fn cmd_prepare(a: &PrepareArgs, seed: u64, out: &Output) -> Result<String> {
    let mut s = String::new();
    match a.method {
        MethodArg::Qpe => {
            let h = load_hamiltonian(
                a.hamiltonian
                    .as_deref()
                    .ok_or_else(|| Error::invalid("QPE preparation needs a Hamiltonian"))?,
            )?;
            let cfg = QpeConfig::new(&h, a.ancilla, a.trotter)?
                .with_mode(a.mode.into())
                .with_seed(seed)
                .with_initial_state(parse_initial(a.initial.as_deref(), h.n_qubits())?);
            cfg.validate()?;
            let target = ground_state_target(&h, &cfg)?;
            let p = prepare_ground_state(&h, &cfg, target, a.max_attempts)?;
            let energy = p.state.expectation(&h)?;
            let ground = exact_spectrum(&h)?[0];
            let fidelity = crate::qpe::eigenspace_weight(&p.state, &h, ground, 1e-8)?;
            out.write("prepared_state.txt", &p.state.to_text())?;
            let json = serde_json::json!({
                "format": "fragprep prepare v1",
                "method": "qpe",
                "target_bitstring": target.bitstring(),
                "attempts": p.attempts,
                "target_probability": sig(p.target_probability),
                "energy": sig(energy),
                "exact_ground_energy": sig(ground),
                "ground_state_weight": sig(fidelity),
            });
            out.write("prepare.json", &serde_json::to_string_pretty(&json).expect("json"))?;
            writeln!(
                s,
                "QPE preparation: {} attempts, energy {} Eh, ground-state weight {}",
                p.attempts,
                sig(energy),
                sig(fidelity)
            )
            .unwrap();
        }
        MethodArg::Di => {
            let target = match (&a.ci, &a.state, &a.hamiltonian) {
                (Some(ci), _, _) => parse_ci_vector(&read_text(ci)?)?,
                (None, Some(st), _) => Statevector::parse_text(&read_text(st)?)?,
                (None, None, Some(h)) => {
                    let h = load_hamiltonian(h)?;
                    let (_, vecs) = eigh(&h.subtract_identity().to_dense_matrix(DEFAULT_ORACLE_CAP)?);
                    Statevector::from_amplitudes(vecs.column(0).iter().copied().collect())?
                }
                (None, None, None) => {
                    return Err(Error::invalid(
                        "direct initialization needs --ci, --state or a Hamiltonian",
                    ))
                }
            };
            let circuit = compile_initializer(&target)?;
            let prepared = crate::statevector::apply(&Statevector::zero(target.n_qubits()), &circuit)?;
            let fidelity = prepared.overlap(&target)?.norm();
            let census = count_gates(&circuit);
            let cnots = census.cnot_equivalent().unwrap_or(0);
            out.write("di_circuit.txt", &circuit.dump())?;
            out.write("prepared_state.txt", &prepared.to_text())?;
            let json = serde_json::json!({
                "format": "fragprep prepare v1",
                "method": "di",
                "n_qubits": target.n_qubits(),
                "gates": circuit.len(),
                "cnots": cnots,
                "cnot_law": crate::direct_init::di_cnot_count(target.n_qubits() as u32).ok(),
                "fidelity": sig(fidelity),
            });
            out.write("prepare.json", &serde_json::to_string_pretty(&json).expect("json"))?;
            writeln!(
                s,
                "direct initialization: {} gates, {} CNOTs, fidelity {}",
                circuit.len(),
                cnots,
                sig(fidelity)
            )
            .unwrap();
        }
    }
    Ok(s)
}

fn cmd_prony(a: &PronyArgs, out: &Output) -> Result<String> {
    let prune = match a.prune.as_str() {
        "none" => None,
        v => Some(
            v.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad --prune value `{v}`")))?,
        ),
    };
    let mut s = String::new();
    let series = match (&a.series, &a.hamiltonian) {
        (Some(path), _) => AutocorrelationSeries::parse_csv(&read_text(path)?)?,
        (None, Some(harg)) => {
            let h = load_hamiltonian(harg)?;
            let b = match a.b {
                Some(b) => b,
                None => default_scale_factor(&h)?,
            };
            let psi0 = parse_initial(a.initial.as_deref(), h.n_qubits())?.resolve(h.n_qubits())?;
            if aliasing_warning(&h, a.tau, b) {
                writeln!(s, "warning: b·tau·|H|_1 >= pi, recovered energies may alias").unwrap();
            }
            let mut series = generate_series(&h, &psi0, a.tau, b, a.samples)?;
            series.source = harg.clone();
            out.write("autocorrelation.csv", &series.to_csv())?;
            series
        }
        (None, None) => return Err(Error::invalid("give a Hamiltonian or --series")),
    };
    let fit = prony_fit_with(
        &series,
        a.order,
        PronyOptions {
            prune,
            ..PronyOptions::default()
        },
    )?;
    out.write("prony.csv", &fit.to_csv())?;
    writeln!(
        s,
        "order {} (effective {}), {} components, residual {}",
        fit.p_requested,
        fit.p_effective,
        fit.components.len(),
        sig(fit.residual)
    )
    .unwrap();
    for c in &fit.components {
        writeln!(s, "  E = {}  h = {}", sig(c.energy), sig(c.weight_re)).unwrap();
    }
    Ok(s)
}

fn base_dir(path: &Path) -> Option<&Path> {
    path.parent().filter(|p| !p.as_os_str().is_empty())
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn cmd_vqe(path: &Path, seed: Option<u64>, out: &Output) -> Result<String> {
    let mut cfg = VqeConfig::from_toml(&read_config(path)?)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = cfg.run(base_dir(path))?;
    out.write("vqe_trace.csv", &report.run.trace_csv())?;
    out.write("vqe_summary.json", &report.summary_json())?;
    Ok(format!(
        "scheme {}: {} evaluations, final {} Eh (exact {}), zeroth-iteration error {}\n",
        cfg.scheme.name(),
        report.run.n_function_evals,
        sig(report.run.final_energy),
        sig(report.exact_energy),
        sig(report.zeroth_iteration_error)
    ))
}

fn cmd_resources(path: &Path, out: &Output) -> Result<String> {
    let cfg = ResourceConfig::from_toml(&read_config(path)?)?;
    let res = cfg.evaluate(base_dir(path))?;
    out.write("resources.csv", &res.report.to_csv())?;
    let mut json: serde_json::Value = serde_json::from_str(&res.report.to_json()).expect("json");
    json["ancilla_estimates"] = res
        .ancilla_estimates
        .iter()
        .map(|(inp, base, t)| serde_json::json!({ "input": inp, "log_base": base, "n_ancilla": t }))
        .collect();
    out.write("resources.json", &serde_json::to_string_pretty(&json).expect("json"))?;
    let mut s = res.report.to_table();
    for (inp, _, t) in &res.ancilla_estimates {
        writeln!(
            s,
            "ancilla estimate (n={}, dE={}, r={}, p={}, eps={}): {t}",
            inp.n,
            sig(inp.delta_e),
            inp.r,
            sig(inp.p),
            sig(inp.epsilon)
        )
        .unwrap();
    }
    Ok(s)
}

/// `[sweep]` grid on top of a VQE run config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepGrid {
    schemes: Vec<Scheme>,
    #[serde(default = "one_seed")]
    seeds: Vec<u64>,
    #[serde(default)]
    n_trotter: Vec<usize>,
    #[serde(default)]
    coupling: Vec<f64>,
}

fn one_seed() -> Vec<u64> {
    vec![0]
}

fn cmd_sweep(path: &Path, seed: u64, jobs: usize, out: &Output) -> Result<String> {
    let text = read_config(path)?;
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let grid_val = table
        .remove("sweep")
        .ok_or_else(|| Error::Config("missing [sweep] table".into()))?;
    let grid: SweepGrid = grid_val.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if !table.contains_key("scheme") {
        table.insert("scheme".into(), toml::Value::String("di".into()));
    }
    let base: VqeConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let trotters: Vec<Option<usize>> = if grid.n_trotter.is_empty() {
        vec![None]
    } else {
        grid.n_trotter.iter().map(|&n| Some(n)).collect()
    };
    let couplings: Vec<Option<f64>> = if grid.coupling.is_empty() {
        vec![base.coupling]
    } else {
        grid.coupling.iter().map(|&c| Some(c)).collect()
    };
    let mut points = Vec::new();
    for &c in &couplings {
        for &t in &trotters {
            for &sch in &grid.schemes {
                for &sd in &grid.seeds {
                    points.push((c, t, sch, sd));
                }
            }
        }
    }
    let dir = base_dir(path).map(Path::to_path_buf);
    let run_one = |(c, t, sch, sd): (Option<f64>, Option<usize>, Scheme, u64)| {
        let mut cfg = base.clone();
        cfg.scheme = sch;
        cfg.coupling = c;
        cfg.seed = derive_seed(seed, sd);
        if let Some(t) = t {
            cfg.qpe.n_trotter = t;
        }
        cfg.run(dir.as_deref())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    let results: Vec<Result<_>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| run_one(*p))
            .collect()
    });
    let mut csv = String::from(
        "# fragprep vqe-sweep v1\nscheme,seed,n_trotter,coupling,n_function_evals,converged,final_energy,exact_energy,zeroth_iteration_error\n",
    );
    let mut s = String::new();
    for ((c, t, sch, sd), r) in points.iter().zip(results) {
        let r = r?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            sch.name(),
            sd,
            t.map(|x| x.to_string()).unwrap_or_default(),
            c.map(sig).unwrap_or_default(),
            r.run.n_function_evals,
            r.run.converged,
            sig(r.run.final_energy),
            sig(r.exact_energy),
            sig(r.zeroth_iteration_error)
        )
        .unwrap();
        writeln!(
            s,
            "{:>3} seed {sd}: {} evals, zeroth-iteration error {}",
            sch.name(),
            r.run.n_function_evals,
            sig(r.zeroth_iteration_error)
        )
        .unwrap();
    }
    out.write("sweep.csv", &csv)?;
    Ok(s)
}
