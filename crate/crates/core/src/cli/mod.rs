//! The `hbutterfly` command line: argument parsing, reproducible run
//! manifests, atomic output and exit-code mapping.

mod manifest;

pub use manifest::Manifest;

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::kpm::KpmParams;
use crate::magnetic::MagneticError;
use crate::oracle::{
    farey_fluxes, harper_spectrum_honeycomb, harper_spectrum_square, OracleError, DEFAULT_K_GRID, MAX_Q,
};
use crate::plaquette::{area_classes, beat_periods, enumerate_faces, FluxQuantum, PlaquetteError};
use crate::structure::{
    build_flake, parse_hopping_config, parse_structure, BuiltinSpec, HoppingRule, Lattice, OnsiteEnergies,
    StructureError,
};
use crate::sweep::{center_energies, run_sweep, write_binary, write_csv, write_pgm, SweepError, SweepPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PlaquetteError> for CliError {
    fn from(e: PlaquetteError) -> Self {
        match e {
            PlaquetteError::Embedding(_) => CliError::Input(e.to_string()),
            PlaquetteError::Domain(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::InvalidPlan(_) => CliError::Usage(e.to_string()),
            SweepError::Magnetic(MagneticError::Config(_)) | SweepError::Io(_) | SweepError::Format(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "hbutterfly",
    version,
    about = "Magnetic tight-binding spectra of 2D lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List plaquettes, their field periods and pairwise beat periods.
    Plaquettes(PlaquettesArgs),
    /// Sweep the magnetic field and write DOS(E, B).
    Butterfly(ButterflyArgs),
    /// Density of states at a single field.
    Dos(DosArgs),
    /// Harper spectra of the square or honeycomb lattice for all p/q.
    Oracle(OracleArgs),
    /// Summarise a structure and its bonds.
    Info(InfoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Extended-XYZ structure file.
    #[arg(long, value_name = "PATH", conflicts_with = "builtin")]
    pub structure: Option<PathBuf>,
    /// Built-in lattice: square, honeycomb, kagome, porous-honeycomb[(bond,scale)].
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    /// Hopping configuration file.
    #[arg(long, value_name = "PATH")]
    pub hoppings: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
    Pgm,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Bin => "bin",
            Format::Pgm => "pgm",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; files are written as <prefix>.<ext> plus <prefix>.manifest.
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub nx: usize,
    #[arg(long, default_value_t = 30)]
    pub ny: usize,
    #[arg(long, default_value_t = 512)]
    pub moments: usize,
    #[arg(long, default_value_t = 3)]
    pub random_vectors: usize,
    #[arg(long, default_value_t = 512)]
    pub energy_points: usize,
    /// Output format; repeatable.
    #[arg(long, value_enum)]
    pub format: Vec<Format>,
    /// h_over_e or h_over_2e (default: hopping config, else h_over_e).
    #[arg(long, value_name = "NAME")]
    pub flux_quantum: Option<String>,
    /// Centre the energy axis on the spectrum support.
    #[arg(long)]
    pub center: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ButterflyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunOpts,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub b_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub b_max: f64,
    #[arg(long, default_value_t = 1)]
    pub b_points: usize,
    /// Repeat the run recorded in a manifest; only --out is taken from the command line.
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DosArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunOpts,
    /// Field in Tesla.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub b: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PlaquettesArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_name = "NAME")]
    pub flux_quantum: Option<String>,
    /// Relative tolerance for beat periods.
    #[arg(long, default_value_t = 0.02)]
    pub beat_tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// square or honeycomb.
    #[arg(long)]
    pub lattice: String,
    #[arg(long, default_value_t = 20)]
    pub q_max: u64,
    /// Hopping in eV (default −1 for square, −2.7 for honeycomb).
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_K_GRID)]
    pub k_grid: usize,
    /// CSV output path (standard output if omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InfoArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
                return EXIT_OK;
            }
            let _ = write!(err, "{text}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Plaquettes(a) => cmd_plaquettes(&a, out),
        Command::Butterfly(a) => {
            let spec = match &a.manifest {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                    RunSpec::from_manifest(&Manifest::parse(&text)?)?
                }
                None => RunSpec::from_args(&a.source, &a.run, "butterfly", a.b_min, a.b_max, a.b_points)?,
            };
            cmd_sweep(&spec, &a.run.out, out)
        }
        Command::Dos(a) => {
            let spec = RunSpec::from_args(&a.source, &a.run, "dos", a.b, a.b, 1)?;
            cmd_sweep(&spec, &a.run.out, out)
        }
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Info(a) => cmd_info(&a, out, err),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Builtin(String),
    Structure(PathBuf),
}

impl Source {
    fn from_args(a: &SourceArgs) -> Result<Self, CliError> {
        match (&a.structure, &a.builtin) {
            (Some(p), None) => Ok(Source::Structure(p.clone())),
            (None, Some(b)) => Ok(Source::Builtin(b.clone())),
            _ => Err(CliError::Usage(
                "exactly one of --structure or --builtin is required".into(),
            )),
        }
    }
}

struct Loaded {
    lattice: Lattice,
    onsite: OnsiteEnergies,
    flux_quantum: Option<FluxQuantum>,
}

fn load(source: &Source, hoppings: Option<&Path>) -> Result<Loaded, CliError> {
    let config = match hoppings {
        Some(p) => Some(parse_hopping_config(&fs::read_to_string(p).map_err(|e| io_err(p, e))?)?),
        None => None,
    };
    let (bare, default_rules) = match source {
        Source::Builtin(name) => {
            let built = name.parse::<BuiltinSpec>()?.build()?;
            (built.lattice, built.rules)
        }
        Source::Structure(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            (parse_structure(&text)?, vec![HoppingRule::carbon_default()])
        }
    };
    let (rules, onsite, flux_quantum) = match config {
        Some(c) => (c.rules, c.onsite, c.flux_quantum),
        None => (default_rules, OnsiteEnergies::default(), None),
    };
    Ok(Loaded {
        lattice: bare.with_hoppings(&rules)?,
        onsite,
        flux_quantum,
    })
}

fn parse_flux_quantum(raw: Option<&str>) -> Result<Option<FluxQuantum>, CliError> {
    raw.map(|s| s.parse::<FluxQuantum>().map_err(CliError::Usage))
        .transpose()
}

/// Fully resolved parameters of a `butterfly` or `dos` run.
#[derive(Debug, Clone, PartialEq)]
struct RunSpec {
    command: String,
    source: Source,
    hoppings: Option<PathBuf>,
    seed: u64,
    b_min: f64,
    b_max: f64,
    b_points: usize,
    nx: usize,
    ny: usize,
    kpm: KpmParams,
    flux_quantum: Option<FluxQuantum>,
    center: bool,
    formats: Vec<Format>,
}

fn absolute(p: &Path) -> PathBuf {
    fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf())
}

impl RunSpec {
    fn from_args(
        source: &SourceArgs,
        run: &RunOpts,
        command: &str,
        b_min: f64,
        b_max: f64,
        b_points: usize,
    ) -> Result<Self, CliError> {
        let hoppings = source.hoppings.as_deref().map(absolute);
        let source = match Source::from_args(source)? {
            Source::Structure(p) => Source::Structure(absolute(&p)),
            s => s,
        };
        let mut formats = run.format.clone();
        if formats.is_empty() {
            formats.push(Format::Bin);
        }
        formats.dedup();
        Ok(RunSpec {
            command: command.into(),
            source,
            hoppings,
            seed: run.seed,
            b_min,
            b_max,
            b_points,
            nx: run.nx,
            ny: run.ny,
            kpm: KpmParams {
                num_moments: run.moments,
                num_random_vectors: run.random_vectors,
                energy_points: run.energy_points,
                rng_seed: run.seed,
                ..KpmParams::default()
            },
            flux_quantum: parse_flux_quantum(run.flux_quantum.as_deref())?,
            center: run.center,
            formats,
        })
    }

    fn to_manifest(&self, resolved: FluxQuantum) -> Manifest {
        let mut m = Manifest::new();
        m.set("code_version", env!("CARGO_PKG_VERSION"));
        m.set("command", &self.command);
        match &self.source {
            Source::Builtin(b) => m.set("builtin", b),
            Source::Structure(p) => m.set("structure", p.display()),
        }
        if let Some(h) = &self.hoppings {
            m.set("hoppings", h.display());
        }
        m.set("seed", self.seed);
        m.set("b_min", self.b_min);
        m.set("b_max", self.b_max);
        m.set("b_points", self.b_points);
        m.set("nx", self.nx);
        m.set("ny", self.ny);
        m.set("moments", self.kpm.num_moments);
        m.set("random_vectors", self.kpm.num_random_vectors);
        m.set("energy_points", self.kpm.energy_points);
        m.set("rescale_margin", self.kpm.rescale_margin);
        m.set("flux_quantum", resolved);
        m.set("center", self.center);
        let formats: Vec<&str> = self.formats.iter().map(|f| f.extension()).collect();
        m.set("formats", formats.join(","));
        m
    }

    fn from_manifest(m: &Manifest) -> Result<Self, CliError> {
        let source = match (m.get("builtin"), m.get("structure")) {
            (Some(b), None) => Source::Builtin(b.to_string()),
            (None, Some(p)) => Source::Structure(PathBuf::from(p)),
            _ => {
                return Err(CliError::Input(
                    "manifest must name exactly one of builtin/structure".into(),
                ))
            }
        };
        let formats = m
            .get("formats")
            .unwrap_or("bin")
            .split(',')
            .map(|f| {
                <Format as ValueEnum>::from_str(f.trim(), true)
                    .map_err(|e| CliError::Input(format!("manifest formats: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let seed: u64 = m.require("seed")?;
        Ok(RunSpec {
            command: m.get("command").unwrap_or("butterfly").to_string(),
            source,
            hoppings: m.get("hoppings").map(PathBuf::from),
            seed,
            b_min: m.require("b_min")?,
            b_max: m.require("b_max")?,
            b_points: m.require("b_points")?,
            nx: m.require("nx")?,
            ny: m.require("ny")?,
            kpm: KpmParams {
                num_moments: m.require("moments")?,
                num_random_vectors: m.require("random_vectors")?,
                energy_points: m.require("energy_points")?,
                rescale_margin: m.require("rescale_margin")?,
                rng_seed: seed,
            },
            flux_quantum: parse_flux_quantum(m.get("flux_quantum")).map_err(|e| CliError::Input(e.to_string()))?,
            center: m.require("center")?,
            formats,
        })
    }
}

/// Writes every `(path, bytes)` pair through a temporary file and renames
/// them into place only after all writes succeeded.
fn write_all_atomic(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    let mut temps = Vec::new();
    let cleanup = |temps: &[PathBuf]| {
        for t in temps {
            let _ = fs::remove_file(t);
        }
    };
    for (path, bytes) in files {
        let name = path
            .file_name()
            .ok_or_else(|| CliError::Usage(format!("invalid output path {}", path.display())))?;
        let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
        if let Err(e) = fs::write(&tmp, bytes) {
            cleanup(&temps);
            return Err(io_err(path, e));
        }
        temps.push(tmp);
    }
    for (tmp, (path, _)) in temps.iter().zip(files) {
        if let Err(e) = fs::rename(tmp, path) {
            cleanup(&temps);
            return Err(io_err(path, e));
        }
    }
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_sweep(spec: &RunSpec, prefix: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&spec.source, spec.hoppings.as_deref())?;
    let fq = spec.flux_quantum.or(loaded.flux_quantum).unwrap_or_default();
    let flake = build_flake(&loaded.lattice, spec.nx, spec.ny)?;
    let plan = SweepPlan {
        b_min: spec.b_min,
        b_max: spec.b_max,
        b_points: spec.b_points,
        kpm: spec.kpm,
        flake_dims: (spec.nx, spec.ny),
    };
    let mut spectrum = run_sweep(&flake, &loaded.onsite, fq, &plan)?;
    if spec.center {
        spectrum = center_energies(&spectrum)?;
    }
    let mut files = Vec::new();
    for &f in &spec.formats {
        let mut buf = Vec::new();
        match f {
            Format::Csv => write_csv(&spectrum, &mut buf)?,
            Format::Bin => write_binary(&spectrum, &mut buf)?,
            Format::Pgm => write_pgm(&spectrum, &mut buf)?,
        }
        files.push((with_extension(prefix, f.extension()), buf));
    }
    files.push((
        with_extension(prefix, "manifest"),
        spec.to_manifest(fq).render().into_bytes(),
    ));
    write_all_atomic(&files)?;
    for (p, _) in &files {
        writeln!(out, "wrote {}", p.display()).map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn emit(out: &mut dyn Write, text: impl Display) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::Input(format!("standard output: {e}")))
}

fn cmd_plaquettes(a: &PlaquettesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&Source::from_args(&a.source)?, a.source.hoppings.as_deref())?;
    let fq = parse_flux_quantum(a.flux_quantum.as_deref())?
        .or(loaded.flux_quantum)
        .unwrap_or_default();
    let faces = enumerate_faces(&loaded.lattice, fq)?;
    emit(out, format!("flux_quantum: {fq} ({:e} Wb)", fq.value()))?;
    emit(out, format!("faces: {}", faces.len()))?;
    emit(out, "index\tvertices\tarea_A2\tperiod_T\tperiod_kT")?;
    for (i, f) in faces.iter().enumerate() {
        emit(
            out,
            format!(
                "{i}\t{}\t{:.6}\t{:.6e}\t{:.3}",
                f.vertex_cycle.len(),
                f.area,
                f.period,
                f.period / 1e3
            ),
        )?;
    }
    let classes = area_classes(&faces, 1e-6);
    emit(out, "classes:")?;
    emit(out, "class\tcount\tarea_A2\tperiod_kT")?;
    let mut periods = Vec::new();
    for (i, (area, count)) in classes.iter().enumerate() {
        let p = fq.field_for_area(*area);
        periods.push(p);
        emit(out, format!("{i}\t{count}\t{area:.6}\t{:.3}", p / 1e3))?;
    }
    if periods.len() > 1 {
        let beats = beat_periods(&periods, a.beat_tolerance)?;
        emit(out, format!("beats (tolerance {}):", a.beat_tolerance))?;
        emit(out, "class_i\tclass_j\tk_i\tk_j\tperiod_kT")?;
        for b in beats {
            emit(
                out,
                format!(
                    "{}\t{}\t{}\t{}\t{:.3}",
                    b.members[0],
                    b.members[1],
                    b.multiples[0],
                    b.multiples[1],
                    b.period / 1e3
                ),
            )?;
        }
    }
    Ok(())
}

fn cmd_info(a: &InfoArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&Source::from_args(&a.source)?, a.source.hoppings.as_deref())?;
    let lat = &loaded.lattice;
    emit(out, format!("sites_per_cell: {}", lat.sites().len()))?;
    emit(out, format!("bonds_per_cell: {}", lat.bonds().len()))?;
    emit(out, format!("species: {}", lat.species().join(",")))?;
    emit(out, format!("cell_area_A2: {:.6}", lat.cell_area()))?;
    if lat.bonds().is_empty() {
        let _ = writeln!(err, "warning: no bonds assigned; check the hopping rules");
    }
    match (a.nx, a.ny) {
        (None, None) => {}
        (Some(nx), Some(ny)) => {
            let flake = build_flake(lat, nx, ny)?;
            emit(out, format!("flake: {nx}x{ny}"))?;
            emit(out, format!("flake_sites: {}", flake.len()))?;
            emit(out, format!("flake_bonds: {}", flake.edges().len()))?;
        }
        _ => return Err(CliError::Usage("--nx and --ny must be given together".into())),
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (is_square, default_t) = match a.lattice.as_str() {
        "square" => (true, -1.0),
        "honeycomb" | "graphene" => (false, -2.7),
        other => {
            return Err(CliError::Usage(format!(
                "unsupported oracle lattice {other:?}; use square or honeycomb"
            )))
        }
    };
    if a.q_max < 1 || a.q_max > MAX_Q {
        return Err(CliError::Usage(format!("--q-max must lie in 1..={MAX_Q}")));
    }
    let t = a.t.unwrap_or(default_t);
    let mut csv = String::from("p,q,flux,energy_ev\n");
    for flux in farey_fluxes(a.q_max) {
        let spec = if is_square {
            harper_spectrum_square(flux, t, a.k_grid)?
        } else {
            harper_spectrum_honeycomb(flux, t, a.k_grid)?
        };
        for e in spec.eigenvalues() {
            csv.push_str(&format!("{},{},{},{e:e}\n", flux.p(), flux.q(), flux.value()));
        }
    }
    match &a.out {
        Some(p) => write_all_atomic(&[(p.clone(), csv.into_bytes())]),
        None => out
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Input(format!("standard output: {e}"))),
    }
}
