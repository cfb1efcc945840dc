//! Command-line interface. `main` only parses arguments and maps errors to
//! exit codes: 0 success, 2 invalid input or arguments, 3 data problems,
//! 4 numerical failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cci_core::index::{build_cci, ConcernIndex, QueryGroup, TermSeries};
use cci_core::proxy::{
    compute_moments, identify_with, mbb_bands, relevance_test, BootstrapConfig, IdentifyOptions, InstrumentSeries,
    IrfBundle, SignConvention, DEFAULT_F_THRESHOLD,
};
use cci_core::sim::{run_mc, Dgp, McOptions, McReport, Summary};
use cci_core::t90::{self, GridSeries, T90Series};
use cci_core::var::{
    estimate_var, granger_table, pca, residual_autocorr_test, shock_correlation, CovarianceKind, VarModel, VarSpec,
};
use cci_core::{DMatrix, DVector, MonthStamp, SeriesPanel, TimeSeries};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::load_config;
use crate::csv_io::{load_csv, load_panel, load_table, load_vocabulary, shipped_vocabulary, write_csv, write_file};
use crate::error::IngestError;
use crate::svg::irf_svg;

#[derive(Debug, Parser)]
#[command(name = "cci", version, about = "Climate concern index toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the concern index from per-group search-volume CSVs.
    BuildIndex(BuildIndexArgs),
    /// VAR comparison of several indices: Granger table, PCA, diagnostics.
    Compare(CompareArgs),
    /// Proxy-SVAR impulse responses with moving-block-bootstrap bands.
    Estimate(EstimateArgs),
    /// Build the extreme-temperature instrument from gridded temperatures.
    T90(T90Args),
    /// Monte Carlo study of the proxy-SVAR estimator on a synthetic DGP.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    /// Vocabulary CSV (`term,category,is_benchmark`); the bundled one if omitted.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Expected benchmark label.
    #[arg(long, default_value = crate::csv_io::SHIPPED_BENCHMARK)]
    pub benchmark: String,
    /// Directory of group CSVs (`date,<term1>,<term2>,...`).
    #[arg(long)]
    pub groups: PathBuf,
    /// Output index CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Output JSON with category shares and term totals [default: OUT with .json].
    #[arg(long)]
    pub shares: Option<PathBuf>,
    /// Seasonally adjust the index (month-of-year demeaning), then renormalize.
    #[arg(long)]
    pub adjust: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Panel CSV (`date,<index1>,<index2>,...`).
    #[arg(long)]
    pub panel: PathBuf,
    #[arg(long, default_value_t = 13)]
    pub lags: usize,
    /// Use the heteroskedasticity-robust Wald covariance.
    #[arg(long)]
    pub robust: bool,
    /// PCA on the covariance instead of the correlation matrix.
    #[arg(long)]
    pub covariance_pca: bool,
    /// Largest residual autocorrelation order tested [default: lags + 12].
    #[arg(long)]
    pub portmanteau_order: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    /// Positive instrument-shock covariance.
    Relevance,
    /// Positive impact on the first variable.
    Impact,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Run configuration; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Panel CSV; the first column is the shocked variable.
    #[arg(long, required_unless_present = "config")]
    pub panel: Option<PathBuf>,
    /// Instrument series CSV (`date,value`).
    #[arg(long, required_unless_present = "config")]
    pub instrument: Option<PathBuf>,
    #[arg(long)]
    pub lags: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub block_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = SignArg::Relevance)]
    pub sign: SignArg,
    /// Proceed even when the relevance check calls the instrument weak.
    #[arg(long)]
    pub force: bool,
    /// Read remote series from the cache only.
    #[arg(long)]
    pub offline: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct T90Args {
    /// Manifest CSV (`grid_id,file[,weight]`); files are `date,temp_c`.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the raw exceedance frequency here.
    #[arg(long)]
    pub frequency_out: Option<PathBuf>,
    /// Reference window start.
    #[arg(long, default_value = "1961-01")]
    pub reference_start: MonthStamp,
    #[arg(long, default_value = "1990-12")]
    pub reference_end: MonthStamp,
    /// Weight grids by the manifest's `weight` column.
    #[arg(long)]
    pub weighted: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// DGP specification (JSON).
    #[arg(long)]
    pub dgp: PathBuf,
    /// Sample length [default: the design file's `sample_size`, else 250].
    #[arg(long)]
    pub t: Option<usize>,
    /// Monte Carlo replicates [default: the design file's `reps`, else 500].
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leading replicates that also compute bootstrap bands for coverage.
    #[arg(long, default_value_t = 0)]
    pub coverage_reps: usize,
    #[arg(long, default_value_t = 500)]
    pub boot_reps: usize,
    #[arg(long, default_value_t = 12)]
    pub horizon: usize,
    /// Output report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command and the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Core(#[from] cci_core::Error),
}

fn core_code(e: &cci_core::Error) -> i32 {
    use cci_core::Error as E;
    match e {
        E::InvalidArgument(_) | E::InvalidRequest(_) | E::InvalidMonth { .. } => 2,
        E::RankDeficient
        | E::SingularSigma
        | E::IrrelevantInstrument { .. }
        | E::UnstableDgp { .. }
        | E::TooManyFailures { .. } => 4,
        _ => 3,
    }
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Invalid(_) => 2,
            CommandError::Data(_) => 3,
            CommandError::Numerical(_) => 4,
            CommandError::Ingest(IngestError::Config { .. }) => 2,
            CommandError::Ingest(IngestError::Core(e)) | CommandError::Core(e) => core_code(e),
            CommandError::Ingest(_) => 3,
        }
    }
}

pub type CmdResult<T> = std::result::Result<T, CommandError>;

pub fn run(cli: Cli) -> CmdResult<()> {
    match cli.command {
        Command::BuildIndex(a) => build_index(&a).map(|_| ()),
        Command::Compare(a) => compare(&a),
        Command::Estimate(a) => estimate(&a).map(|_| ()),
        Command::T90(a) => t90_command(&a).map(|_| ()),
        Command::Simulate(a) => simulate(&a).map(|_| ()),
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn matrix_rows(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!(m.row(i).iter().collect::<Vec<_>>())).collect())
}

// ---------------------------------------------------------------- build-index

pub fn build_index(args: &BuildIndexArgs) -> CmdResult<ConcernIndex> {
    let vocab = match &args.vocab {
        Some(p) => load_vocabulary(p, Some(&args.benchmark))?,
        None => shipped_vocabulary(),
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.groups)
        .map_err(|e| IngestError::io(&args.groups, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CommandError::Data(format!("no group CSVs in {}", args.groups.display())));
    }
    let mut groups = Vec::with_capacity(files.len());
    for (id, path) in files.iter().enumerate() {
        let table = load_table(path)?;
        let mut members = Vec::with_capacity(table.columns.len());
        for (j, col) in table.columns.iter().enumerate() {
            let term = vocab
                .find(col)
                .ok_or_else(|| CommandError::Data(format!("{}: `{col}` is not a vocabulary term", path.display())))?;
            members.push(TermSeries { term: term.clone(), series: table.series(j)? });
        }
        let group = QueryGroup::new(id, members).map_err(|e| CommandError::Data(format!("{}: {e}", path.display())))?;
        group.validate_source_scale().map_err(|e| CommandError::Data(format!("{}: {e}", path.display())))?;
        groups.push(group);
    }
    let cci = build_cci(&vocab, &groups, args.adjust).map_err(|e| match e {
        cci_core::Error::MissingTerm(t) => CommandError::Data(format!("no group file provides term `{t}`")),
        other => other.into(),
    })?;
    write_csv(&args.out, &cci.index)?;
    let shares_path = args.shares.clone().unwrap_or_else(|| args.out.with_extension("json"));
    let shares: BTreeMap<String, f64> = cci.category_shares.iter().map(|(c, s)| (c.to_string(), *s)).collect();
    let totals: BTreeMap<String, f64> = cci.term_totals().into_iter().map(|(t, v)| (t.text.clone(), v)).collect();
    let sidecar = json!({
        "window": [cci.index.start().to_string(), cci.index.end().to_string()],
        "seasonally_adjusted": cci.seasonally_adjusted,
        "groups": groups.len(),
        "category_shares": shares,
        "term_totals": totals,
    });
    write_file(&shares_path, &json_text(&sidecar))?;
    println!(
        "index {}..{} ({} months, {} groups, {} terms){}",
        cci.index.start(),
        cci.index.end(),
        cci.index.len(),
        groups.len(),
        cci.per_term_fi.len(),
        if cci.seasonally_adjusted { ", seasonally adjusted" } else { "" }
    );
    for (c, s) in &cci.category_shares {
        println!("category {c}: {:.1}%", 100.0 * s);
    }
    println!("wrote {} and {}", args.out.display(), shares_path.display());
    Ok(cci)
}

// -------------------------------------------------------------------- compare

fn regressor_names(model: &VarModel) -> Vec<String> {
    let mut names = Vec::new();
    if model.spec.include_intercept {
        names.push("const".to_string());
    }
    for lag in 1..=model.lags() {
        for v in &model.names {
            names.push(format!("{v}_L{lag}"));
        }
    }
    names
}

pub fn compare(args: &CompareArgs) -> CmdResult<()> {
    let panel = load_panel(&args.panel)?;
    let model = estimate_var(&panel, VarSpec::new(args.lags))?;
    let n = model.n_vars();
    let kind = if args.robust { CovarianceKind::Robust } else { CovarianceKind::Homoskedastic };
    let table = granger_table(&model, kind)?;
    let pc = pca(&panel, !args.covariance_pca)?;
    let stability = model.stability();
    let order = args.portmanteau_order.unwrap_or(args.lags + 12);
    let portmanteau = residual_autocorr_test(&model, order)?;
    let corr = shock_correlation(&model);

    let granger_rows: Vec<Vec<String>> = table
        .iter()
        .map(|g| {
            vec![g.dependent.clone(), g.label(n), g.wald_stat.to_string(), g.df.to_string(), g.p_value.to_string()]
        })
        .collect();
    let regs = regressor_names(&model);
    let coef_rows: Vec<Vec<String>> = (0..n)
        .flat_map(|i| {
            let model = &model;
            regs.iter()
                .enumerate()
                .map(move |(k, r)| vec![model.names[i].clone(), r.clone(), model.coeffs[(i, k)].to_string()])
        })
        .collect();
    let pca_json = json!({
        "names": model.names,
        "correlation_matrix": !args.covariance_pca,
        "eigenvalues": pc.eigenvalues,
        "explained": pc.explained,
        "loadings": matrix_rows(&pc.loadings),
    });
    let diagnostics = json!({
        "window": [panel.start().to_string(), panel.window().1.to_string()],
        "lags": args.lags,
        "observations": model.n_obs(),
        "stability": { "radius": stability.radius, "stable": stability.stable },
        "r2": model.r2,
        "shock_correlation": matrix_rows(&corr),
        "portmanteau": portmanteau.iter().map(|o| json!({
            "order": o.order, "statistic": o.statistic, "df": o.df,
            "df_adjusted": o.df_adjusted, "p_value": o.p_value,
        })).collect::<Vec<_>>(),
    });
    let dir = &args.out_dir;
    write_file(dir.join("granger.csv"), &csv_text(&["dependent", "excluded", "chi_sq", "df", "prob"], &granger_rows))?;
    write_file(dir.join("coefficients.csv"), &csv_text(&["equation", "regressor", "coefficient"], &coef_rows))?;
    write_file(dir.join("pca.json"), &json_text(&pca_json))?;
    write_file(dir.join("diagnostics.json"), &json_text(&diagnostics))?;

    println!("VAR({}) on {} variables, {} observations", args.lags, n, model.n_obs());
    println!("radius < 1: {} (largest root modulus {:.4})", stability.stable, stability.radius);
    println!("{:<16} {:<16} {:>10} {:>4} {:>8}", "dependent", "excluded", "chi-sq", "df", "prob");
    for g in &table {
        println!("{:<16} {:<16} {:>10.3} {:>4} {:>8.4}", g.dependent, g.label(n), g.wald_stat, g.df, g.p_value);
    }
    println!("first component share: {:.3}", pc.explained[0]);
    println!("wrote granger.csv, coefficients.csv, pca.json, diagnostics.json to {}", dir.display());
    Ok(())
}

// ------------------------------------------------------------------- estimate

/// Everything `estimate` writes, for callers that want the numbers.
#[derive(Debug, Clone)]
pub struct EstimateOutput {
    pub bundle: IrfBundle,
    pub phi: f64,
    pub b_col: DVector<f64>,
    pub f_stat: f64,
    pub files: Vec<PathBuf>,
}

fn file_stem_for(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn estimate(args: &EstimateArgs) -> CmdResult<EstimateOutput> {
    let cfg = match &args.config {
        Some(p) => {
            let mut cfg = load_config(p)?;
            cfg.offline |= args.offline;
            Some(cfg)
        }
        None => None,
    };
    let panel: SeriesPanel = match (&args.panel, &cfg) {
        (Some(p), _) => load_panel(p)?,
        (None, Some(c)) => c.load_panel()?,
        (None, None) => return Err(CommandError::Invalid("--panel or --config is required".into())),
    };
    let instrument: TimeSeries = match (&args.instrument, &cfg) {
        (Some(p), _) => load_csv(p)?,
        (None, Some(c)) => {
            c.load_instrument()?.ok_or_else(|| CommandError::Invalid("config has no `instrument` line".into()))?
        }
        (None, None) => return Err(CommandError::Invalid("--instrument or --config is required".into())),
    };
    let pick = |flag: Option<usize>, from_cfg: Option<usize>, default: usize| flag.or(from_cfg).unwrap_or(default);
    let lags = pick(args.lags, cfg.as_ref().map(|c| c.var_lags), 6);
    let horizon = pick(args.horizon, cfg.as_ref().map(|c| c.horizon), 12);
    let reps = pick(args.reps, cfg.as_ref().map(|c| c.reps), 1000);
    let level = args.level.or(cfg.as_ref().map(|c| c.level)).unwrap_or(0.68);
    let seed = args.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let block_len = args.block_len.or(cfg.as_ref().and_then(|c| c.block_len));
    if !(level > 0.0 && level < 1.0) {
        return Err(CommandError::Invalid(format!("--level {level} is outside (0, 1)")));
    }
    if lags == 0 {
        return Err(CommandError::Invalid("--lags must be at least 1".into()));
    }
    let sign = match args.sign {
        SignArg::Relevance => SignConvention::PositiveRelevance,
        SignArg::Impact => SignConvention::PositiveImpact,
    };
    let identify = IdentifyOptions { sign, ..IdentifyOptions::default() };

    let spec = VarSpec::new(lags);
    let model = estimate_var(&panel, spec)?;
    let z = InstrumentSeries::aligned_to(&model, &instrument);
    let relevance = relevance_test(&model, &z, DEFAULT_F_THRESHOLD)?;
    if !relevance.strong && !args.force {
        return Err(CommandError::Numerical(format!(
            "instrument is weak: first-stage F = {:.3} < {} (IrrelevantInstrument; pass --force to continue)",
            relevance.f_stat, relevance.threshold
        )));
    }
    let ident = identify_with(&compute_moments(&model, &z)?, &identify)?;
    let config = BootstrapConfig { horizon, level, reps, block_len, seed, identify };
    let bundle = mbb_bands(&panel, spec, &z, &config)?;

    let dir = &args.out_dir;
    let mut files = Vec::new();
    for (j, name) in bundle.names.iter().enumerate() {
        let rows: Vec<Vec<String>> = (0..=horizon)
            .map(|h| {
                vec![
                    h.to_string(),
                    bundle.point[(h, j)].to_string(),
                    bundle.lower[(h, j)].to_string(),
                    bundle.upper[(h, j)].to_string(),
                ]
            })
            .collect();
        let path = dir.join(format!("irf_{}.csv", file_stem_for(name)));
        write_file(&path, &csv_text(&["horizon", "point", "lower", "upper"], &rows))?;
        files.push(path);
    }
    let svg_path = dir.join("irf.svg");
    write_file(&svg_path, &irf_svg(&bundle))?;
    files.push(svg_path);
    let summary = json!({
        "variables": bundle.names,
        "window": [panel.start().to_string(), panel.window().1.to_string()],
        "lags": lags,
        "horizon": horizon,
        "level": level,
        "seed": seed,
        "sign_convention": sign.label(),
        "phi": ident.phi,
        "impact": ident.b_col.iter().collect::<Vec<_>>(),
        "cmd_objective": ident.cmd_objective,
        "relevance": {
            "f_stat": relevance.f_stat, "threshold": relevance.threshold,
            "strong": relevance.strong, "observations": relevance.n_used,
        },
        "instrument_missing": z.n_missing(),
        "bootstrap": {
            "reps": bundle.reps, "dropped": bundle.dropped, "block_len": bundle.block_len,
            "crossings": bundle.crossings.iter().map(|(h, j)| json!([h, bundle.names[*j]])).collect::<Vec<_>>(),
        },
    });
    let summary_path = dir.join("summary.json");
    write_file(&summary_path, &json_text(&summary))?;
    files.push(summary_path);

    println!(
        "VAR({lags}), {} observations, instrument F = {:.2}{}",
        model.n_obs(),
        relevance.f_stat,
        if relevance.strong { "" } else { " (weak, forced)" }
    );
    println!("phi = {:.4}; impact column:", ident.phi);
    for (name, b) in bundle.names.iter().zip(ident.b_col.iter()) {
        println!("  {name:<16} {b:>10.4}");
    }
    println!(
        "{:.0}% bands from {} moving-block replicates (block length {}, {} dropped)",
        100.0 * level,
        bundle.reps,
        bundle.block_len,
        bundle.dropped
    );
    if !bundle.crossings.is_empty() {
        println!("point response outside its band at {} cells", bundle.crossings.len());
    }
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(EstimateOutput { phi: ident.phi, b_col: ident.b_col, f_stat: relevance.f_stat, bundle, files })
}

// ------------------------------------------------------------------------ t90

struct ManifestEntry {
    grid_id: String,
    file: PathBuf,
    weight: Option<f64>,
}

fn read_manifest(path: &Path) -> CmdResult<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers: Vec<String> =
        reader.headers().map_err(|e| IngestError::parse(path, 1, e.to_string()))?.iter().map(str::to_string).collect();
    if headers.len() < 2 || headers[0] != "grid_id" || headers[1] != "file" {
        return Err(IngestError::parse(path, 1, "expected header `grid_id,file[,weight]`").into());
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| IngestError::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let weight = match record.get(2) {
            Some(w) if !w.is_empty() => {
                Some(w.parse().map_err(|_| IngestError::parse(path, line, format!("invalid weight `{w}`")))?)
            }
            _ => None,
        };
        entries.push(ManifestEntry { grid_id: record[0].to_string(), file: base.join(&record[1]), weight });
    }
    Ok(entries)
}

pub fn t90_command(args: &T90Args) -> CmdResult<T90Series> {
    let entries = read_manifest(&args.manifest)?;
    if entries.is_empty() {
        return Err(CommandError::Invalid(format!("manifest {} lists no grids", args.manifest.display())));
    }
    let reference = (args.reference_start, args.reference_end);
    let mut exceedance = Vec::with_capacity(entries.len());
    for e in &entries {
        let table = load_table(&e.file)?;
        if table.columns != ["temp_c"] {
            return Err(IngestError::parse(&e.file, 1, "expected header `date,temp_c`").into());
        }
        let grid = GridSeries::new(e.grid_id.clone(), table.series(0)?, reference)
            .map_err(|err| CommandError::Data(format!("grid {}: {err}", e.grid_id)))?;
        let anomalies = t90::standardized_anomaly(&grid)?;
        exceedance.push(t90::grid_exceedance(&anomalies, reference)?);
    }
    let out = if args.weighted {
        let weights = entries
            .iter()
            .map(|e| e.weight.ok_or_else(|| CommandError::Invalid(format!("grid {} has no weight", e.grid_id))))
            .collect::<CmdResult<Vec<f64>>>()?;
        t90::aggregate_t90_weighted(&exceedance, Some(&weights))?
    } else {
        t90::aggregate_t90(&exceedance)?
    };
    write_csv(&args.out, &out.t90)?;
    if let Some(p) = &args.frequency_out {
        write_csv(p, &out.raw_frequency)?;
    }
    let post: Vec<f64> = out.t90.iter().filter(|(d, _)| *d > reference.1).map(|(_, v)| v).collect();
    println!("T90 from {} grids, {}..{}", entries.len(), out.t90.start(), out.t90.end());
    if !post.is_empty() {
        println!("mean change after reference period: {:+.2} pp", cci_core::stats::mean(&post));
    }
    println!("wrote {}", args.out.display());
    Ok(out)
}

// ------------------------------------------------------------------- simulate

/// DGP file: either `{"preset": "benchmark"}` or explicit matrices.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSpec {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub names: Option<Vec<String>>,
    /// Lag matrices as lists of rows.
    #[serde(default)]
    pub phi: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub intercept: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub instrument_strength: Option<f64>,
    #[serde(default)]
    pub noise_scale: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sample_size: Option<usize>,
    #[serde(default)]
    pub reps: Option<usize>,
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> CmdResult<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CommandError::Invalid(format!("`{what}` must be a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl DgpSpec {
    pub fn to_dgp(&self, seed_override: Option<u64>) -> CmdResult<Dgp> {
        let seed = seed_override.or(self.seed).unwrap_or(0);
        let mut dgp = match self.preset.as_deref() {
            Some("benchmark") => {
                if self.phi.is_some() || self.b.is_some() {
                    return Err(CommandError::Invalid("`preset` excludes `phi` and `b`".into()));
                }
                Dgp::benchmark(seed)
            }
            Some(other) => return Err(CommandError::Invalid(format!("unknown preset `{other}`"))),
            None => {
                let phi = self
                    .phi
                    .as_ref()
                    .ok_or_else(|| CommandError::Invalid("`phi` is required without a preset".into()))?
                    .iter()
                    .map(|m| rows_to_matrix(m, "phi"))
                    .collect::<CmdResult<Vec<_>>>()?;
                let b = rows_to_matrix(
                    self.b.as_ref().ok_or_else(|| CommandError::Invalid("`b` is required without a preset".into()))?,
                    "b",
                )?;
                Dgp::new(phi, b, 1.0, 1.0, seed)?
            }
        };
        if let Some(s) = self.instrument_strength {
            dgp.instrument_strength = s;
        }
        if let Some(s) = self.noise_scale {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(CommandError::Invalid("`noise_scale` must be finite and non-negative".into()));
            }
            dgp.noise_scale = s;
        }
        if let Some(c) = &self.intercept {
            if c.len() != dgp.n_vars() {
                return Err(CommandError::Invalid("`intercept` length differs from the number of variables".into()));
            }
            dgp = dgp.with_intercept(DVector::from_vec(c.clone()));
        }
        if let Some(names) = &self.names {
            if names.len() != dgp.n_vars() {
                return Err(CommandError::Invalid("`names` length differs from the number of variables".into()));
            }
            dgp = dgp.with_names(names.clone());
        }
        Ok(dgp)
    }
}

fn summary_json(s: &Option<Summary>) -> Value {
    match s {
        Some(s) => json!({ "mean": s.mean, "median": s.median, "q05": s.q05, "q95": s.q95 }),
        None => Value::Null,
    }
}

pub fn report_json(report: &McReport, dgp: &Dgp) -> Value {
    json!({
        "variables": dgp.names,
        "reps": report.reps,
        "sample_size": report.sample_size,
        "seed": report.seed,
        "failed": report.failed,
        "irrelevant": report.irrelevant,
        "phi_true": dgp.instrument_strength,
        "phi_bias": report.phi_bias,
        "phi_rel_error": summary_json(&report.phi_rel_error),
        "b_true": dgp.target_impact().iter().collect::<Vec<_>>(),
        "b_bias": report.b_bias,
        "b_rel_error": summary_json(&report.b_rel_error),
        "relevance_f": summary_json(&report.relevance_f),
        "strong_share": report.strong_share,
        "coverage_reps": report.coverage_reps,
        "coverage": report.coverage.as_ref().map(matrix_rows),
    })
}

pub fn simulate(args: &SimulateArgs) -> CmdResult<McReport> {
    let text = std::fs::read_to_string(&args.dgp).map_err(|e| IngestError::io(&args.dgp, e))?;
    let spec: DgpSpec =
        serde_json::from_str(&text).map_err(|e| CommandError::Invalid(format!("{}: {e}", args.dgp.display())))?;
    let dgp = spec.to_dgp(args.seed)?;
    let t = args.t.or(spec.sample_size).unwrap_or(250);
    let reps = args.reps.or(spec.reps).unwrap_or(500);
    let options = McOptions {
        horizon: args.horizon,
        coverage_reps: args.coverage_reps,
        bootstrap: BootstrapConfig { reps: args.boot_reps, horizon: args.horizon, ..BootstrapConfig::default() },
        ..McOptions::default()
    };
    let report = run_mc(&dgp, t, reps, &options)?;
    if let Some(out) = &args.out {
        write_file(out, &json_text(&report_json(&report, &dgp)))?;
    }
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{} replicates of T = {} (seed {}), {} failed, {} irrelevant",
        report.reps, report.sample_size, report.seed, report.failed, report.irrelevant
    );
    let _ = writeln!(table, "{:<22} {:>9} {:>9} {:>9} {:>9}", "", "mean", "median", "q05", "q95");
    for (label, s) in [
        ("rel. error phi", &report.phi_rel_error),
        ("rel. error impact", &report.b_rel_error),
        ("relevance F", &report.relevance_f),
    ] {
        if let Some(s) = s {
            let _ = writeln!(table, "{label:<22} {:>9.4} {:>9.4} {:>9.4} {:>9.4}", s.mean, s.median, s.q05, s.q95);
        }
    }
    let _ = writeln!(table, "strong-instrument share: {:.3}", report.strong_share);
    if let Some(cov) = &report.coverage {
        let worst = cov.iter().copied().fold(f64::INFINITY, f64::min);
        let best = cov.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(table, "band coverage over {} replicates: {:.3}..{:.3}", report.coverage_reps, worst, best);
    }
    print!("{table}");
    Ok(report)
}
