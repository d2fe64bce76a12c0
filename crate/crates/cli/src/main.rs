//! `nodal`: measure I/O, sampling, nodal censuses, estimator runs, lattice
//! utilities and nodal portraits.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 on I/O failure.
//! `NODAL_THREADS` caps the number of worker threads; results do not depend
//! on it.

mod render;
mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nodal_core::arithmetic::{angular_discrepancy, cilleruelo_candidates, lattice_points, mu_n, sample_torus_wave};
use nodal_core::estimators::{estimate_cns, estimate_dns, torus_count_report, EstimatorReport};
use nodal_core::kac_rice::{directional_flip_density, flip_density_bound};
use nodal_core::nodal::{census, count_flips, marching_squares, FlipDirection};
use nodal_core::stability::{sandwich_check, section7_field, stability_profile, Section7};
use nodal_core::stats::count_mean_stderr;
use nodal_core::{evaluate_grid, Domain, FieldSample, MeasureFile, NodalError, Preset, SpectralMeasure};
use serde::Serialize;

use render::View;
use report::{emit, to_json, write_file, MeasureInfo, Provenance, Report};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "{m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<NodalError> for CliError {
    fn from(e: NodalError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

type Res<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "nodal", version, about = "Nodal sets of Gaussian random fields with atomic spectral measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the zero set of one field as SVG (and optionally PPM)
    Portrait(PortraitArgs),
    /// Nodal census of one field
    Census(CensusArgs),
    /// Dump a field tabulated on a grid as CSV
    Grid(GridArgs),
    /// Estimate the Nazarov-Sodin constant by regression over radii
    Cns(CnsArgs),
    /// Plug-in estimate of the discrepancy functional
    Dns(DnsArgs),
    /// Nodal counts of arithmetic random waves on the unit torus
    Torus(TorusArgs),
    /// Lattice points on the circle of radius sqrt(n)
    Lattice(LatticeArgs),
    /// Kac-Rice flip densities, optionally with empirical counts
    Flips(FlipsArgs),
    /// Stability profiles and sandwich checks
    Stability(StabilityArgs),
}

#[derive(Args, Clone, Default)]
struct MeasureArgs {
    /// Preset, e.g. `cilleruelo`, `uniform:64`, `arc:0.5:128`, `two_point:0`
    #[arg(long, conflicts_with = "measure")]
    preset: Option<String>,
    /// Measure file (JSON)
    #[arg(long)]
    measure: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct FieldArgs {
    #[command(flatten)]
    m: MeasureArgs,
    /// One of the deterministic example fields: f, g, monochromatic_g
    #[arg(long, conflicts_with_all = ["preset", "measure", "torus_n"])]
    section7: Option<String>,
    /// Arithmetic random wave f_n on the unit torus
    #[arg(long = "torus-n", conflicts_with_all = ["preset", "measure"])]
    torus_n: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Half side of the square [-R, R]^2
    #[arg(long = "R", default_value_t = 10.0)]
    r: f64,
    /// Grid spacing (default: 16 nodes per shortest wavelength)
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args)]
struct PortraitArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// File stem of the outputs
    #[arg(long, default_value = "portrait")]
    name: String,
    /// Image side in pixels
    #[arg(long, default_value_t = 600)]
    size: u32,
    /// Also write a binary PPM raster
    #[arg(long)]
    ppm: bool,
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Also count flip points along both axes
    #[arg(long)]
    flips: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    m: MeasureArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 20.0, 40.0])]
    schedule: Vec<f64>,
    #[arg(long = "M", default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock time in the report (breaks byte-identical output)
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CnsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Per-radius table as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DnsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Radius of the plug-in (default: largest radius of the schedule)
    #[arg(long = "R")]
    r: Option<f64>,
    /// Known constant; estimated over the schedule when absent
    #[arg(long)]
    cns: Option<f64>,
}

#[derive(Args)]
struct TorusArgs {
    #[arg(long)]
    n: u64,
    #[arg(long = "M", default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Compare with a planar estimate for mu_n over this schedule
    #[arg(long, value_delimiter = ',')]
    compare: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long)]
    n: u64,
    /// Also list n = a^2 + 1 <= LIMIT with exactly 8 lattice points
    #[arg(long)]
    candidates: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlipsArgs {
    #[command(flatten)]
    m: MeasureArgs,
    /// Direction along a coordinate axis (1 or 2)
    #[arg(long, conflicts_with_all = ["diagonal", "angle"])]
    axis: Option<u8>,
    /// Direction (1, 1) / sqrt 2
    #[arg(long, conflicts_with = "angle")]
    diagonal: bool,
    /// Direction (cos t, sin t)
    #[arg(long)]
    angle: Option<f64>,
    /// Count flips on this many samples over [-R, R]^2
    #[arg(long = "M")]
    samples: Option<usize>,
    #[arg(long = "R", default_value_t = 10.0)]
    r: f64,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Run the sandwich check against this preset instead of a profile
    #[arg(long)]
    against: Option<String>,
    #[arg(long = "M", default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_measure(m: &MeasureArgs) -> Res<SpectralMeasure> {
    match (&m.preset, &m.measure) {
        (Some(p), _) => Ok(p.parse::<Preset>()?.build()?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Ok(MeasureFile::from_json(&text)?.build()?)
        }
        (None, None) => Err(CliError::Invalid("give --preset or --measure".into())),
    }
}

fn positive(name: &str, v: f64) -> Res<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("--{name} must be positive, got {v}")))
    }
}

/// A field together with the domain it is drawn on.
struct FieldSpec {
    sample: FieldSample,
    domain: Domain,
    h: f64,
    prov: Provenance,
}

fn field_spec(a: &FieldArgs, command: &str) -> Res<FieldSpec> {
    positive("R", a.r)?;
    if let Some(h) = a.h {
        positive("h", h)?;
    }
    let mut prov = Provenance::new(command);
    let (sample, domain) = if let Some(w) = &a.section7 {
        let which: Section7 = w.parse()?;
        prov.field = Some(format!("section7:{w}"));
        prov.measure = Some(MeasureInfo::of(&which.measure()));
        (section7_field(which), Domain::square(a.r))
    } else if let Some(n) = a.torus_n {
        let wave = sample_torus_wave(n, a.seed)?;
        prov.seed = Some(a.seed);
        prov.field = Some(format!("torus_wave:{n}"));
        prov.measure = Some(MeasureInfo::of(&mu_n(n)?));
        (wave.torus, Domain::unit_torus())
    } else {
        let rho = Arc::new(load_measure(&a.m)?);
        prov.seed = Some(a.seed);
        prov.measure = Some(MeasureInfo::of(&rho));
        (FieldSample::sample_shared(&rho, a.seed, 0), Domain::square(a.r))
    };
    let h = a.h.unwrap_or_else(|| sample.default_spacing());
    prov.h = Some(h);
    Ok(FieldSpec { sample, domain, h, prov })
}

fn view_of(d: &Domain) -> View {
    match *d {
        Domain::Square { center, half } => View { x0: center[0] - half, y0: center[1] - half, side: 2.0 * half },
        Domain::Torus { side } => View { x0: 0.0, y0: 0.0, side },
    }
}

fn cmd_portrait(a: &PortraitArgs) -> Res<()> {
    if a.size == 0 {
        return Err(CliError::Invalid("--size must be positive".into()));
    }
    let spec = field_spec(&a.field, "portrait")?;
    let g = evaluate_grid(&spec.sample, spec.domain, spec.h, 0)?;
    let segs = marching_squares(&g);
    let view = view_of(&spec.domain);
    let stem = a.out_dir.join(&a.name);
    write_file(&stem.with_extension("svg"), render::svg(&segs, g.h, view, a.size).as_bytes())?;
    let mut csv = Vec::new();
    g.write_csv(&mut csv).map_err(|e| CliError::io(&stem, e))?;
    write_file(&stem.with_extension("csv"), &csv)?;
    if a.ppm {
        write_file(&stem.with_extension("ppm"), &render::ppm(&spec.sample, view, a.size))?;
    }
    let mut prov = spec.prov;
    prov.h = Some(g.h);
    let rep = Report { kind: "census", provenance: prov, result: census(&g)? };
    write_file(&stem.with_extension("json"), to_json(&rep).as_bytes())
}

fn cmd_census(a: &CensusArgs) -> Res<()> {
    let spec = field_spec(&a.field, "census")?;
    let g = evaluate_grid(&spec.sample, spec.domain, spec.h, 0)?;
    let mut c = census(&g)?;
    if a.flips {
        if spec.domain.is_torus() {
            return Err(CliError::Invalid("flip counts need a square domain".into()));
        }
        c.s1_flips = Some(count_flips(&spec.sample, spec.domain, g.h, FlipDirection::X)?);
        c.s2_flips = Some(count_flips(&spec.sample, spec.domain, g.h, FlipDirection::Y)?);
    }
    let mut prov = spec.prov;
    prov.h = Some(g.h);
    emit(a.out.as_deref(), &to_json(&Report { kind: "census", provenance: prov, result: c }))
}

fn cmd_grid(a: &GridArgs) -> Res<()> {
    let spec = field_spec(&a.field, "grid")?;
    let g = evaluate_grid(&spec.sample, spec.domain, spec.h, 0)?;
    let mut buf = Vec::new();
    g.write_csv(&mut buf).map_err(|e| CliError::io(Path::new("<buffer>"), e))?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv is ascii"))
}

fn run_provenance(command: &str, r: &RunArgs, rho: &SpectralMeasure) -> Res<Provenance> {
    if r.samples < 10 {
        return Err(CliError::Invalid(format!("--M must be at least 10, got {}", r.samples)));
    }
    for &x in &r.schedule {
        positive("schedule", x)?;
    }
    if let Some(h) = r.h {
        positive("h", h)?;
    }
    let mut p = Provenance::new(command);
    p.seed = Some(r.seed);
    p.h = r.h;
    p.schedule = Some(r.schedule.clone());
    p.samples = Some(r.samples);
    p.measure = Some(MeasureInfo::of(rho));
    Ok(p)
}

fn cns_csv(rep: &EstimatorReport, info: &MeasureInfo) -> String {
    let mut s = String::new();
    writeln!(s, "# measure={} sha256={} seed={} M={}", info.descriptor, info.sha256, rep.seed, rep.samples).unwrap();
    writeln!(s, "# cns={} cns_stderr={} dns={}", rep.cns_estimate, rep.cns_stderr, rep.dns_estimate).unwrap();
    s.push_str("R,mean,stderr,M,h,density,density_stderr,coarse\n");
    for r in &rep.rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.r, r.mean, r.stderr, r.samples, r.h, r.density, r.density_stderr, r.coarse
        )
        .unwrap();
    }
    s
}

fn cmd_cns(a: &CnsArgs) -> Res<()> {
    let rho = load_measure(&a.run.m)?;
    let mut prov = run_provenance("cns", &a.run, &rho)?;
    let rep = estimate_cns(&rho, &a.run.schedule, a.run.samples, a.run.h, a.run.seed)?;
    prov.h = Some(rep.rows[0].h);
    if a.run.timing {
        prov.elapsed_seconds = Some(rep.elapsed_seconds);
    }
    if let Some(p) = &a.csv {
        write_file(p, cns_csv(&rep, prov.measure.as_ref().unwrap()).as_bytes())?;
    }
    emit(a.run.out.as_deref(), &to_json(&Report { kind: "cns", provenance: prov, result: rep }))
}

#[derive(Serialize)]
struct DnsResult {
    r: f64,
    cns: f64,
    cns_source: &'static str,
    dns_estimate: f64,
}

fn cmd_dns(a: &DnsArgs) -> Res<()> {
    let rho = load_measure(&a.run.m)?;
    let mut prov = run_provenance("dns", &a.run, &rho)?;
    let r = a.r.or(a.run.schedule.last().copied()).unwrap_or(40.0);
    positive("R", r)?;
    let (cns, source) = match a.cns {
        Some(c) => (c, "given"),
        None => (estimate_cns(&rho, &a.run.schedule, a.run.samples, a.run.h, a.run.seed)?.cns_estimate, "estimated"),
    };
    let start = std::time::Instant::now();
    let dns = estimate_dns(&rho, r, a.run.samples, cns, a.run.h, a.run.seed)?;
    if a.run.timing {
        prov.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    let result = DnsResult { r, cns, cns_source: source, dns_estimate: dns };
    emit(a.run.out.as_deref(), &to_json(&Report { kind: "dns", provenance: prov, result }))
}

fn cmd_torus(a: &TorusArgs) -> Res<()> {
    if a.samples < 10 {
        return Err(CliError::Invalid("--M must be at least 10".into()));
    }
    let mu = mu_n(a.n)?;
    let mut prov = Provenance::new("torus");
    prov.seed = Some(a.seed);
    prov.samples = Some(a.samples);
    prov.measure = Some(MeasureInfo::of(&mu));
    let cns = match &a.compare {
        Some(schedule) => {
            prov.schedule = Some(schedule.clone());
            let rep = estimate_cns(&mu, schedule, a.samples, None, a.seed)?;
            Some((rep.cns_estimate, rep.cns_stderr))
        }
        None => None,
    };
    let rep = torus_count_report(a.n, a.samples, a.h, a.seed, cns)?;
    prov.h = Some(rep.h);
    if let Some(p) = &a.csv {
        let mut s = String::from("sample,total\n");
        for (i, t) in rep.totals.iter().enumerate() {
            writeln!(s, "{i},{t}").unwrap();
        }
        write_file(p, s.as_bytes())?;
    }
    emit(a.out.as_deref(), &to_json(&Report { kind: "torus", provenance: prov, result: rep }))
}

#[derive(Serialize)]
struct LatticeResult {
    n: u64,
    r2: usize,
    points: Vec<(i64, i64)>,
    /// Weak-* distance of `mu_n` to the Cilleruelo measure.
    discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidates: Option<Vec<u64>>,
}

fn cmd_lattice(a: &LatticeArgs) -> Res<()> {
    let lc = lattice_points(a.n)?;
    let discrepancy = if lc.r2 > 0 { Some(angular_discrepancy(a.n)?) } else { None };
    let candidates = a.candidates.map(cilleruelo_candidates).transpose()?;
    let result = LatticeResult { n: lc.n, r2: lc.r2, points: lc.points, discrepancy, candidates };
    emit(a.out.as_deref(), &to_json(&Report { kind: "lattice", provenance: Provenance::new("lattice"), result }))
}

#[derive(Serialize)]
struct FlipsResult {
    direction: [f64; 2],
    density: f64,
    bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<EmpiricalFlips>,
}

#[derive(Serialize)]
struct EmpiricalFlips {
    r: f64,
    samples: usize,
    mean_per_area: f64,
    stderr_per_area: f64,
}

fn cmd_flips(a: &FlipsArgs) -> Res<()> {
    let rho = Arc::new(load_measure(&a.m)?);
    let (u, dir) = if a.diagonal {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        ([c, c], FlipDirection::Diagonal)
    } else if let Some(t) = a.angle {
        ([t.cos(), t.sin()], FlipDirection::Unit([t.cos(), t.sin()]))
    } else {
        let d = FlipDirection::axis(a.axis.unwrap_or(1))?;
        (d.unit(), d)
    };
    let mut prov = Provenance::new("flips");
    prov.measure = Some(MeasureInfo::of(&rho));
    let density = directional_flip_density(&rho, u)?;
    let empirical = match a.samples {
        Some(m) => {
            positive("R", a.r)?;
            prov.seed = Some(a.seed);
            prov.samples = Some(m);
            let area = 4.0 * a.r * a.r;
            let counts = (0..m as u64)
                .map(|i| {
                    let s = FieldSample::sample_shared(&rho, a.seed, i);
                    let h = a.h.unwrap_or_else(|| 0.5 * s.default_spacing());
                    count_flips(&s, Domain::square(a.r), h, dir)
                })
                .collect::<Result<Vec<u64>, _>>()?;
            let (mean, se) = count_mean_stderr(&counts);
            prov.h = a.h;
            Some(EmpiricalFlips { r: a.r, samples: m, mean_per_area: mean / area, stderr_per_area: se / area })
        }
        None => None,
    };
    let result = FlipsResult { direction: u, density, bound: flip_density_bound(&rho, u), empirical };
    emit(a.out.as_deref(), &to_json(&Report { kind: "flips", provenance: prov, result }))
}

fn cmd_stability(a: &StabilityArgs) -> Res<()> {
    match &a.against {
        None => {
            let spec = field_spec(&a.field, "stability")?;
            let p = stability_profile(&spec.sample, spec.domain, spec.h)?;
            let mut prov = spec.prov;
            prov.h = Some(p.h);
            emit(a.out.as_deref(), &to_json(&Report { kind: "stability", provenance: prov, result: p }))
        }
        Some(other) => {
            let rho0 = load_measure(&a.field.m)?;
            let rho1: SpectralMeasure = other.parse::<Preset>()?.build()?;
            if !(a.beta > 0.0) {
                return Err(CliError::Invalid("--beta must be positive".into()));
            }
            let rep = sandwich_check(&rho0, &rho1, a.field.r, a.samples, a.beta, a.field.h, a.field.seed)?;
            let mut prov = Provenance::new("sandwich");
            prov.seed = Some(a.field.seed);
            prov.samples = Some(a.samples);
            prov.h = Some(rep.h);
            prov.measure = Some(MeasureInfo::of(&rho0));
            prov.field = Some(format!("coupled with {}", MeasureInfo::of(&rho1).descriptor));
            emit(a.out.as_deref(), &to_json(&Report { kind: "sandwich", provenance: prov, result: rep }))
        }
    }
}

fn configure_threads() -> Res<()> {
    if let Ok(v) = std::env::var("NODAL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Invalid(format!("NODAL_THREADS must be a positive integer, got `{v}`")))?;
        // a second initialization only happens in tests and is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        log::info!("worker threads: {n}");
    }
    Ok(())
}

fn run(cli: &Cli) -> Res<()> {
    configure_threads()?;
    match &cli.command {
        Command::Portrait(a) => cmd_portrait(a),
        Command::Census(a) => cmd_census(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Cns(a) => cmd_cns(a),
        Command::Dns(a) => cmd_dns(a),
        Command::Torus(a) => cmd_torus(a),
        Command::Lattice(a) => cmd_lattice(a),
        Command::Flips(a) => cmd_flips(a),
        Command::Stability(a) => cmd_stability(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = std::time::Instant::now();
    let outcome = run(&cli);
    log::info!("finished in {:.2}s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nodal: {e}");
            ExitCode::from(e.code())
        }
    }
}
