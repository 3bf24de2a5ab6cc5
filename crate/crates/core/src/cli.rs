//! Command-line front end: `solve-pair`, `spectrum`, `verify` and
//! `export-matrix`, each driven by a JSON configuration (see [`crate::models`]).
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 numerical
//! failure, 3 verification failure. JSON numbers are written with 17
//! significant digits and all artifacts except `timing.json` are
//! byte-identical across runs and thread counts.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::fock::{enumerate_sector, sector_size, SectorBasis};
use crate::hamiltonian::{HamiltonianError, SparseHamiltonian, TermBuilder, TermId};
use crate::mode_space::{BoundPolicy, CompositeSpectrum, ModeSpace, ModeSpaceError};
use crate::models::{load_config_file, random_model, BoundConfig, ModelConfig, ModelError, OutputFormat};
use crate::numerics::{dense_symmetric_eigen, format_sig17, sparse_lowest_eigenpairs, Eigenpairs, NumericsError};
use crate::oracle::{verify_sectors, OracleError, VerificationReport, MAX_ORACLE_CONSTITUENTS};

pub const SCHEMA_VERSION: u32 = 1;
/// Eigenvalues reported per sector.
pub const REPORTED_EIGENVALUES: usize = 8;
/// Sectors up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 400;
/// Largest sector the pipeline will build.
pub const MAX_SECTOR_DIM: u128 = 2_000_000;
pub const DEFAULT_VERIFY_MAX_N: usize = 4;
/// Composite count used with `--seed` when the config does not fix one.
pub const SEEDED_COMPOSITES: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ModelError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: max |sq - oracle| = {max_abs_diff:e} exceeds {tolerance:e}")]
    VerificationFailed { max_abs_diff: f64, tolerance: f64 },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::VerificationFailed { .. } => 3,
        }
    }
}

impl From<ModeSpaceError> for CliError {
    fn from(e: ModeSpaceError) -> Self {
        match e {
            ModeSpaceError::Numerics(_) | ModeSpaceError::OneBody(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(ModelError::ModeSpace(other)),
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<HamiltonianError> for CliError {
    fn from(e: HamiltonianError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "composite-bosons",
    version,
    about = "Idealized second quantization of bosonic composite particles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the two-body problem and write composite_spectrum.json.
    SolvePair(CommonArgs),
    /// Diagonalize every sector and write report.json plus `sector_<N>_eigs.csv`.
    Spectrum(CommonArgs),
    /// Compare every matrix element with the permutation oracle.
    Verify(CommonArgs),
    /// Write each term block of each sector as coordinate CSV.
    ExportMatrix(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`, defaults to the current directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Highest constituent number; overrides `truncation.n_max`.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Replace the configured tensors by random ones of the same mode count.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolvePair(_) => "solve-pair",
            Command::Spectrum(_) => "spectrum",
            Command::Verify(_) => "verify",
            Command::ExportMatrix(_) => "export-matrix",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::SolvePair(a) | Command::Spectrum(a) | Command::Verify(a) | Command::ExportMatrix(a) => a,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command and returns the files written.
pub fn execute(command: &Command) -> Result<Vec<PathBuf>, CliError> {
    let args = command.args();
    match args.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| execute_inner(command)),
        None => execute_inner(command),
    }
}

fn execute_inner(command: &Command) -> Result<Vec<PathBuf>, CliError> {
    let args = command.args();
    let config = load_config_file(&args.config)?;
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let mut timing = Timing::default();
    let modes = timing.stage("model", || build_modes(&config, args.seed))?;
    let policy = bound_policy(&config, args.seed);
    let mut out = Output {
        dir: out_dir,
        written: Vec::new(),
    };
    let json = config.output.wants(OutputFormat::Json);
    let csv = config.output.wants(OutputFormat::Csv);

    match command {
        Command::SolvePair(_) => {
            let report = timing.stage("solve_pair", || pair_report(&config, args.seed, &modes, policy))?;
            out.json("composite_spectrum.json", &report)?;
        }
        Command::Spectrum(_) => {
            let max_n = args.max_n.unwrap_or(config.truncation.n_max);
            let spectrum = timing.stage("solve_pair", || modes.solve_bound_states(policy))?;
            let report = timing.stage("sectors", || {
                run_report(command.name(), &config, args.seed, &modes, &spectrum, max_n)
            })?;
            if json {
                out.json("report.json", &report.report)?;
            }
            if csv {
                for s in &report.report.sectors {
                    out.eigenvalue_csv(s)?;
                }
            }
        }
        Command::Verify(_) => {
            let max_n = args
                .max_n
                .unwrap_or_else(|| config.truncation.n_max.min(DEFAULT_VERIFY_MAX_N));
            if max_n > MAX_ORACLE_CONSTITUENTS {
                return Err(CliError::Usage(format!(
                    "--max-n {max_n} exceeds the oracle limit of {MAX_ORACLE_CONSTITUENTS}"
                )));
            }
            let spectrum = timing.stage("solve_pair", || modes.solve_bound_states(policy))?;
            let verification = timing.stage("oracle", || verify_sectors(&modes, &spectrum, max_n))?;
            let doc = VerificationDocument {
                schema_version: SCHEMA_VERSION,
                config: &config,
                seed: args.seed,
                max_n,
                composite_energies: spectrum.energies(),
                report: &verification,
            };
            out.json("verification.json", &doc)?;
            if !verification.summary.passed {
                out.timing(&timing, command.name())?;
                return Err(CliError::VerificationFailed {
                    max_abs_diff: verification.summary.max_abs_diff,
                    tolerance: verification.summary.tolerance,
                });
            }
            if json {
                let mut report = timing.stage("sectors", || {
                    run_report(command.name(), &config, args.seed, &modes, &spectrum, max_n)
                })?;
                report.report.verification = Some(verification.summary.clone());
                out.json("report.json", &report.report)?;
            }
        }
        Command::ExportMatrix(_) => {
            let max_n = args.max_n.unwrap_or(config.truncation.n_max);
            let spectrum = timing.stage("solve_pair", || modes.solve_bound_states(policy))?;
            let mut builder = TermBuilder::new(&modes, &spectrum)?;
            for n in 0..=max_n {
                let basis = sector_basis(n, &modes, &spectrum)?;
                let h = timing.stage("assemble", || builder.assemble(&basis))?;
                for (term, block) in h.blocks() {
                    out.matrix_csv(&format!("term_{}_sector_{n}.csv", term.as_str()), block)?;
                }
                out.matrix_csv(&format!("hamiltonian_sector_{n}.csv"), h.total())?;
                out.basis_csv(n, &basis)?;
            }
        }
    }
    out.timing(&timing, command.name())?;
    Ok(out.written)
}

/// The configured model, or a random one of the same mode count when `seed` is set.
pub fn build_modes(config: &ModelConfig, seed: Option<u64>) -> Result<ModeSpace, CliError> {
    match seed {
        Some(s) => Ok(random_model(config.mode_count(), s)?),
        None => Ok(config.build()?),
    }
}

/// Seeded random tensors rarely bind below the edge, so they keep the `k`
/// lowest pair states instead, using `k` from the config when it sets one.
pub fn bound_policy(config: &ModelConfig, seed: Option<u64>) -> BoundPolicy {
    match (seed, &config.bound) {
        (Some(_), BoundConfig::BelowEdge { .. }) => BoundPolicy::LowestK(SEEDED_COMPOSITES),
        _ => config.bound.policy(),
    }
}

pub fn sector_basis(n: usize, modes: &ModeSpace, spectrum: &CompositeSpectrum) -> Result<SectorBasis, CliError> {
    let size = sector_size(n, modes.mode_count(), spectrum.len());
    if size > MAX_SECTOR_DIM {
        return Err(CliError::Usage(format!(
            "sector N={n} has {size} states; limit is {MAX_SECTOR_DIM}"
        )));
    }
    enumerate_sector(n, modes.mode_count(), spectrum.len()).map_err(|e| CliError::Usage(e.to_string()))
}

/// Lowest `k` eigenpairs: dense for small matrices, Lanczos otherwise.
pub fn lowest_eigenpairs(h: &SparseHamiltonian, k: usize) -> Result<Eigenpairs, CliError> {
    let m = h.total();
    let k = k.min(m.dim());
    if m.dim() <= DENSE_LIMIT {
        let eig = dense_symmetric_eigen(&m.to_dense())?;
        Ok(Eigenpairs {
            values: eig.values[..k].to_vec(),
            vectors: (0..k).map(|i| eig.vector(i)).collect(),
        })
    } else {
        Ok(sparse_lowest_eigenpairs(m, k)?)
    }
}

/// Fraction of constituents bound in composites, `sum_s |v_s|^2 2 N_M(s) / N`.
pub fn molecule_weight(basis: &SectorBasis, v: &[f64]) -> f64 {
    basis
        .states()
        .iter()
        .zip(v)
        .map(|(s, c)| {
            let n = s.constituent_number();
            if n == 0 {
                0.0
            } else {
                c * c * (2 * s.molecule_count()) as f64 / n as f64
            }
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct TermNorm {
    pub term: &'static str,
    pub frobenius_norm: f64,
    pub nnz: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub n: usize,
    pub basis_size: usize,
    pub lowest_eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_molecule_weight: Option<f64>,
    pub hermiticity_max_asymmetry: f64,
    pub css_ssc_transpose_max_diff: f64,
    pub term_norms: Vec<TermNorm>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub continuum_edge: f64,
    pub pair_ground_energy: f64,
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub config: ModelConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub max_n: usize,
    pub mode_labels: Vec<String>,
    pub one_body_energies: Vec<f64>,
    pub composite_spectrum: SpectrumSummary,
    pub sectors: Vec<SectorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<crate::oracle::VerificationSummary>,
}

/// A [`RunReport`] with the ground vectors it was computed from.
pub struct RunOutcome {
    pub report: RunReport,
    pub ground_states: Vec<Option<Vec<f64>>>,
}

fn lowest_pair_energy(modes: &ModeSpace) -> Result<f64, CliError> {
    let ph = modes.pair_hamiltonian()?;
    Ok(dense_symmetric_eigen(ph.matrix())?.values[0])
}

pub fn solve_sector(
    builder: &mut TermBuilder<'_>,
    basis: &SectorBasis,
) -> Result<(SectorReport, Option<Vec<f64>>), CliError> {
    let n = basis.constituent_number().unwrap_or(0);
    let h = builder.assemble(basis)?;
    let herm = h.hermiticity();
    if let Some(&(r, c, a, b)) = herm.offending.first() {
        return Err(CliError::Numerical(format!(
            "sector N={n}: Hamiltonian not symmetric ({} entries), first H[{r}][{c}]={a:e} vs H[{c}][{r}]={b:e}",
            herm.offending.len()
        )));
    }
    let transpose_diff = h.block(TermId::CSS).sub(&h.block(TermId::SSC).transpose()).max_abs();
    let pairs = lowest_eigenpairs(&h, REPORTED_EIGENVALUES)?;
    let ground = pairs.vectors.first().cloned();
    let report = SectorReport {
        n,
        basis_size: basis.len(),
        lowest_eigenvalues: pairs.values,
        ground_molecule_weight: ground.as_ref().filter(|_| n > 0).map(|v| molecule_weight(basis, v)),
        hermiticity_max_asymmetry: herm.max_asymmetry,
        css_ssc_transpose_max_diff: transpose_diff,
        term_norms: h
            .blocks()
            .iter()
            .map(|(t, m)| TermNorm {
                term: t.as_str(),
                frobenius_norm: m.frobenius_norm(),
                nnz: m.nnz(),
            })
            .collect(),
    };
    Ok((report, ground))
}

/// Builds and diagonalizes sectors `0..=max_n`.
pub fn run_report(
    command: &str,
    config: &ModelConfig,
    seed: Option<u64>,
    modes: &ModeSpace,
    spectrum: &CompositeSpectrum,
    max_n: usize,
) -> Result<RunOutcome, CliError> {
    let mut builder = TermBuilder::new(modes, spectrum)?;
    let mut sectors = Vec::new();
    let mut ground_states = Vec::new();
    for n in 0..=max_n {
        let (s, g) = solve_sector(&mut builder, &sector_basis(n, modes, spectrum)?)?;
        sectors.push(s);
        ground_states.push(g);
    }
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        config: config.clone(),
        seed,
        max_n,
        mode_labels: modes.basis().labels().to_vec(),
        one_body_energies: (0..modes.mode_count()).map(|m| modes.one_body().get(m, m)).collect(),
        composite_spectrum: SpectrumSummary {
            continuum_edge: spectrum.continuum_edge(),
            pair_ground_energy: lowest_pair_energy(modes)?,
            energies: spectrum.energies().to_vec(),
        },
        sectors,
        verification: None,
    };
    Ok(RunOutcome { report, ground_states })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundStateReport {
    pub index: usize,
    pub energy: f64,
    pub binding_energy: f64,
    /// `c[p][q]` in the mode basis.
    pub coefficients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub schema_version: u32,
    pub config: ModelConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub mode_labels: Vec<String>,
    pub one_body_energies: Vec<f64>,
    pub pair_dimension: usize,
    pub pair_ground_energy: f64,
    pub continuum_edge: f64,
    pub bound_states: Vec<BoundStateReport>,
}

pub fn pair_report(
    config: &ModelConfig,
    seed: Option<u64>,
    modes: &ModeSpace,
    policy: BoundPolicy,
) -> Result<PairReport, CliError> {
    let spectrum = modes.solve_bound_states(policy)?;
    let m = modes.mode_count();
    Ok(PairReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        seed,
        mode_labels: modes.basis().labels().to_vec(),
        one_body_energies: (0..m).map(|i| modes.one_body().get(i, i)).collect(),
        pair_dimension: m * (m + 1) / 2,
        pair_ground_energy: lowest_pair_energy(modes)?,
        continuum_edge: spectrum.continuum_edge(),
        bound_states: (0..spectrum.len())
            .map(|a| BoundStateReport {
                index: a,
                energy: spectrum.energy(a),
                binding_energy: spectrum.continuum_edge() - spectrum.energy(a),
                coefficients: (0..m)
                    .map(|p| (0..m).map(|q| spectrum.coefficient(a, p, q)).collect())
                    .collect(),
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct VerificationDocument<'a> {
    schema_version: u32,
    config: &'a ModelConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    max_n: usize,
    composite_energies: &'a [f64],
    #[serde(flatten)]
    report: &'a VerificationReport,
}

#[derive(Default)]
struct Timing {
    stages: Vec<(&'static str, f64)>,
}

impl Timing {
    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match self.stages.iter_mut().find(|(n, _)| *n == name) {
            Some(s) => s.1 += secs,
            None => self.stages.push((name, secs)),
        }
        out
    }
}

/// Pretty JSON with every float written as `{:.16e}`.
struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17 significant digits per float and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let io_err = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let file = fs::File::create(&path).map_err(io_err)?;
        let mut w = io::BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = to_json_string(value);
        self.write(name, |w| w.write_all(text.as_bytes()))
    }

    fn eigenvalue_csv(&mut self, s: &SectorReport) -> Result<(), CliError> {
        self.write(&format!("sector_{}_eigs.csv", s.n), |w| {
            writeln!(w, "N,index,eigenvalue")?;
            for (i, e) in s.lowest_eigenvalues.iter().enumerate() {
                writeln!(w, "{},{},{}", s.n, i, format_sig17(*e))?;
            }
            Ok(())
        })
    }

    fn matrix_csv(&mut self, name: &str, m: &crate::numerics::SparseMatrix) -> Result<(), CliError> {
        self.write(name, |w| m.write_csv(w))
    }

    fn basis_csv(&mut self, n: usize, basis: &SectorBasis) -> Result<(), CliError> {
        self.write(&format!("basis_sector_{n}.csv"), |w| {
            writeln!(w, "index,state")?;
            for (i, s) in basis.states().iter().enumerate() {
                writeln!(w, "{i},\"{s}\"")?;
            }
            Ok(())
        })
    }

    fn timing(&mut self, t: &Timing, command: &str) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Stage {
            stage: &'static str,
            seconds: f64,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            command: &'a str,
            stages: Vec<Stage>,
        }
        let doc = Doc {
            command,
            stages: t
                .stages
                .iter()
                .map(|&(stage, seconds)| Stage { stage, seconds })
                .collect(),
        };
        self.json("timing.json", &doc)
    }
}

/// Writes `report` to `dir/report.json`; exposed for callers that build reports themselves.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = Output {
        dir: dir.to_path_buf(),
        written: Vec::new(),
    };
    out.json("report.json", report)?;
    for s in &report.sectors {
        out.eigenvalue_csv(s)?;
    }
    Ok(out.written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_ring_model;

    #[test]
    fn json_floats_have_seventeen_digits() {
        let s = to_json_string(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5]}));
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e0"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn molecule_weight_counts_bound_fraction() {
        let basis = enumerate_sector(2, 1, 1).unwrap();
        let v: Vec<f64> = basis
            .states()
            .iter()
            .map(|s| if s.molecule_count() == 1 { 0.6 } else { 0.8 })
            .collect();
        assert!((molecule_weight(&basis, &v) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn two_site_sector_two_ground_energy() {
        let modes = build_ring_model(2, 1.0, -4.0).unwrap();
        let spec = modes.solve_bound_states(BoundPolicy::default()).unwrap();
        let config = ModelConfig::ring(2, 1.0, -4.0, 2);
        let out = run_report("spectrum", &config, None, &modes, &spec, 2).unwrap();
        assert_eq!(out.report.sectors.len(), 3);
        assert_eq!(out.report.sectors[0].lowest_eigenvalues, [0.0]);
        assert!((out.report.composite_spectrum.pair_ground_energy + 2.0 + 8f64.sqrt()).abs() < 1e-12);
        for s in &out.report.sectors {
            assert!(s.hermiticity_max_asymmetry <= 1e-12);
            assert!(s.css_ssc_transpose_max_diff <= 1e-12);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 1);
        assert_eq!(CliError::Numerical(String::new()).exit_code(), 2);
        assert_eq!(
            CliError::VerificationFailed {
                max_abs_diff: 1.0,
                tolerance: 0.0
            }
            .exit_code(),
            3
        );
        let e: CliError = ModeSpaceError::Numerics(NumericsError::NoConvergence {
            iterations: 1,
            residual: 1.0,
        })
        .into();
        assert_eq!(e.exit_code(), 2);
    }
}
