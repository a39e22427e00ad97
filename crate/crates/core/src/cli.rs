//! Batch front end: `enhance`, `tune`, `eval` and `compare`.
//!
//! Settings are resolved as command-line flags over an optional flat
//! `key = value` config file over built-in defaults. Exit codes: 0 on
//! success, 1 for usage or configuration errors, 2 for I/O errors.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::histogram_equalize;
use crate::error::{Error, Result};
use crate::image_io::{self, write_atomically, RgbImage};
use crate::objective::{self, EdgeThreshold, FitnessReport};
use crate::pso::{self, ParamBounds, SwarmConfig, TuneOptions, TuneResult};
use crate::retinex::{self, RetinexParams, ScaleWeights, Variant};
use crate::we_metric::{we_report, WEComparison};

/// Side length images are resampled to unless resizing is disabled.
pub const WORKING_SIZE: usize = 256;

#[derive(Debug, Parser)]
#[command(name = "retinex-pso", version, about = "Retinex color enhancement with PSO parameter tuning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enhance images with fixed parameters.
    Enhance {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Tune enhancement parameters per image with particle swarm optimization.
    Tune {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Report wavelet energies and fitness of an original/enhanced pair.
    Eval {
        original: PathBuf,
        enhanced: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run HE, tuned MSRCR and tuned MSRMCR on each image and tabulate.
    Compare {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Debug, Default, Args)]
pub struct CommonOpts {
    /// Enhancement method: he, msrcr or msrmcr.
    #[arg(long)]
    pub method: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Swarm RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Swarm iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Swarm size.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Edgel threshold: a number, or "mean" for the mean Sobel magnitude.
    #[arg(long)]
    pub threshold: Option<String>,
    /// Keep the input resolution instead of resampling to 256x256.
    #[arg(long)]
    pub no_resize: bool,
    /// Report format: json or csv.
    #[arg(long)]
    pub report: Option<String>,
    /// Parameter overrides, e.g. `C=110,G=2.5`. When tuning they pin the
    /// dimension to that value.
    #[arg(long)]
    pub params: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    He,
    Msrcr,
    Msrmcr,
}

impl Method {
    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::He => None,
            Method::Msrcr => Some(Variant::Msrcr),
            Method::Msrmcr => Some(Variant::Msrmcr),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::He => "he",
            Method::Msrcr => "msrcr",
            Method::Msrmcr => "msrmcr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "he" => Ok(Method::He),
            "msrcr" => Ok(Method::Msrcr),
            "msrmcr" => Ok(Method::Msrmcr),
            other => Err(Error::config(format!(
                "unknown method '{other}', expected he, msrcr or msrmcr"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::config(format!("unknown report format '{other}'"))),
        }
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub method: Method,
    pub tuning: bool,
    pub overrides: Vec<(String, f64)>,
    pub particles: usize,
    pub iterations: usize,
    pub w_max: f64,
    pub w_min: f64,
    pub seed: u64,
    pub threshold: EdgeThreshold,
    pub resize: bool,
    pub report: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let swarm = SwarmConfig::new(0);
        Self {
            inputs: Vec::new(),
            out_dir: PathBuf::from("."),
            method: Method::Msrmcr,
            tuning: false,
            overrides: Vec::new(),
            particles: swarm.particle_count,
            iterations: swarm.max_iterations,
            w_max: swarm.w_max,
            w_min: swarm.w_min,
            seed: swarm.rng_seed,
            threshold: EdgeThreshold::MeanMagnitude,
            resize: true,
            report: ReportFormat::Json,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value for {key}: '{value}'")))
}

fn parse_threshold(value: &str) -> Result<EdgeThreshold> {
    if value.trim().eq_ignore_ascii_case("mean") {
        return Ok(EdgeThreshold::MeanMagnitude);
    }
    let t: f64 = parse_num("threshold", value)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::config(format!("threshold must be non-negative, got {t}")));
    }
    Ok(EdgeThreshold::Absolute(t))
}

/// Parses `name=value` pairs separated by commas.
pub fn parse_overrides(text: &str) -> Result<Vec<(String, f64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::config(format!("expected name=value, got '{pair}'")))?;
            Ok((k.trim().to_string(), parse_num(k.trim(), v)?))
        })
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(format!("invalid boolean for {key}: '{value}'"))),
    }
}

impl RunConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "method" => self.method = value.parse()?,
            "out" => self.out_dir = PathBuf::from(value.trim()),
            "seed" => self.seed = parse_num(key, value)?,
            "iterations" => self.iterations = parse_num(key, value)?,
            "particles" => self.particles = parse_num(key, value)?,
            "w_max" => self.w_max = parse_num(key, value)?,
            "w_min" => self.w_min = parse_num(key, value)?,
            "threshold" => self.threshold = parse_threshold(value)?,
            "resize" => self.resize = parse_bool(key, value)?,
            "report" => self.report = value.parse()?,
            "params" => self.overrides = parse_overrides(value)?,
            other => return Err(Error::config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` config text. `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("config line {}: expected key = value", n + 1)))?;
            self.apply(k.trim(), v)?;
        }
        Ok(())
    }

    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(opts: &CommonOpts, inputs: Vec<PathBuf>, tuning: bool) -> Result<Self> {
        let mut cfg = RunConfig {
            inputs,
            tuning,
            ..RunConfig::default()
        };
        if let Some(path) = &opts.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_config_text(&text)?;
        }
        if let Some(m) = &opts.method {
            cfg.method = m.parse()?;
        }
        if let Some(o) = &opts.out {
            cfg.out_dir = o.clone();
        }
        if let Some(s) = opts.seed {
            cfg.seed = s;
        }
        if let Some(i) = opts.iterations {
            cfg.iterations = i;
        }
        if let Some(p) = opts.particles {
            cfg.particles = p;
        }
        if let Some(t) = &opts.threshold {
            cfg.threshold = parse_threshold(t)?;
        }
        if opts.no_resize {
            cfg.resize = false;
        }
        if let Some(r) = &opts.report {
            cfg.report = r.parse()?;
        }
        if let Some(p) = &opts.params {
            cfg.overrides = parse_overrides(p)?;
        }
        Ok(cfg)
    }

    pub fn swarm_config(&self, variant: Variant) -> Result<SwarmConfig> {
        let cfg = SwarmConfig {
            particle_count: self.particles,
            max_iterations: self.iterations,
            w_max: self.w_max,
            w_min: self.w_min,
            rng_seed: self.seed,
            ..SwarmConfig::for_variant(variant)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default search box with every override pinned.
    pub fn bounds(&self, variant: Variant) -> Result<ParamBounds> {
        let mut bounds = ParamBounds::for_variant(variant);
        for (name, value) in &self.overrides {
            let idx = retinex::param_index(variant, name).ok_or_else(|| {
                Error::config(format!("unknown {} parameter '{name}'", variant.name()))
            })?;
            let canonical = variant.param_names()[idx];
            bounds
                .pin(canonical, *value)
                .map_err(|e| Error::config(e.to_string()))?;
        }
        Ok(bounds)
    }

    /// Default parameters with every override applied.
    pub fn fixed_params(&self, variant: Variant) -> Result<RetinexParams> {
        let mut params = RetinexParams::defaults(variant);
        for (name, value) in &self.overrides {
            params = params
                .with_param(name, *value)
                .map_err(|e| Error::config(e.to_string()))?;
        }
        Ok(params)
    }

    fn tune_options(&self) -> TuneOptions {
        TuneOptions {
            weights: ScaleWeights::default(),
            threshold: self.threshold,
        }
    }

    fn prepare(&self, img: RgbImage) -> Result<RgbImage> {
        if self.resize {
            image_io::resize_bilinear(&img, WORKING_SIZE, WORKING_SIZE)
        } else {
            Ok(img)
        }
    }

    fn load_all(&self) -> Result<Vec<(PathBuf, RgbImage)>> {
        self.inputs
            .iter()
            .map(|p| Ok((p.clone(), self.prepare(image_io::load_image(p)?)?)))
            .collect()
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomically(path, |f| f.write_all(text.as_bytes()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_text<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Sidecar written next to each enhanced image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhanceSidecar {
    pub input: String,
    pub method: Method,
    pub width: usize,
    pub height: usize,
    pub params: Option<RetinexParams>,
    pub fitness: FitnessReport,
}

fn enhance_with(method: Method, img: &RgbImage, params: Option<&RetinexParams>) -> Result<RgbImage> {
    match (method, params) {
        (Method::He, _) => Ok(histogram_equalize(img)),
        (_, Some(p)) => retinex::enhance(img, p, &ScaleWeights::default()),
        (_, None) => unreachable!("retinex methods always carry parameters"),
    }
}

pub fn cmd_enhance(cfg: &RunConfig) -> Result<Vec<EnhanceSidecar>> {
    let params = cfg.method.variant().map(|v| cfg.fixed_params(v)).transpose()?;
    if cfg.method == Method::He && !cfg.overrides.is_empty() {
        return Err(Error::config("histogram equalization takes no parameters"));
    }
    let images = cfg.load_all()?;
    let mut outputs = Vec::with_capacity(images.len());
    for (path, img) in &images {
        let enhanced = enhance_with(cfg.method, img, params.as_ref())?;
        outputs.push((path, enhanced));
    }

    ensure_dir(&cfg.out_dir)?;
    let mut sidecars = Vec::with_capacity(outputs.len());
    for (path, enhanced) in outputs {
        let base = format!("{}_{}", stem(path), cfg.method);
        image_io::save_image(&enhanced, cfg.out_dir.join(format!("{base}.png")))?;
        let sidecar = EnhanceSidecar {
            input: path.display().to_string(),
            method: cfg.method,
            width: enhanced.width(),
            height: enhanced.height(),
            params,
            fitness: objective::fitness(&enhanced, cfg.threshold),
        };
        write_text(&cfg.out_dir.join(format!("{base}.json")), &to_json(&sidecar))?;
        sidecars.push(sidecar);
    }
    Ok(sidecars)
}

/// Header of the per-variant tuned-parameter table.
pub fn tune_table_header(variant: Variant) -> Vec<String> {
    ["image", "resolution"]
        .iter()
        .map(|s| s.to_string())
        .chain(variant.param_names().iter().map(|s| s.to_string()))
        .collect()
}

fn tune_table(variant: Variant, rows: &[(String, String, TuneResult)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::config(e.to_string());
    w.write_record(tune_table_header(variant)).map_err(io_err)?;
    for (image, resolution, result) in rows {
        let mut record = vec![image.clone(), resolution.clone()];
        record.extend(result.best_params.to_vector().iter().map(|v| format!("{v:.2}")));
        w.write_record(&record).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn tune_variant(cfg: &RunConfig) -> Result<Variant> {
    cfg.method.variant().ok_or_else(|| {
        Error::config("tuning needs a retinex method (msrcr or msrmcr)")
    })
}

pub fn cmd_tune(cfg: &RunConfig) -> Result<Vec<TuneResult>> {
    let variant = tune_variant(cfg)?;
    let swarm = cfg.swarm_config(variant)?;
    let bounds = cfg.bounds(variant)?;
    let images = cfg.load_all()?;

    let mut rows = Vec::with_capacity(images.len());
    let mut enhanced_images = Vec::with_capacity(images.len());
    for (path, img) in &images {
        let result = pso::tune(img, variant, &bounds, &swarm, &cfg.tune_options())?;
        enhanced_images.push(retinex::enhance(img, &result.best_params, &ScaleWeights::default())?);
        let resolution = format!("{}x{}", img.width(), img.height());
        rows.push((stem(path), resolution, result));
    }

    ensure_dir(&cfg.out_dir)?;
    for ((name, _, result), enhanced) in rows.iter().zip(&enhanced_images) {
        let base = format!("{name}_{}", cfg.method);
        image_io::save_image(enhanced, cfg.out_dir.join(format!("{base}.png")))?;
        write_text(&cfg.out_dir.join(format!("{base}_tune.json")), &to_json(result))?;
    }
    let table = tune_table(variant, &rows)?;
    write_text(&cfg.out_dir.join(format!("{}_params.csv", cfg.method)), &table)?;

    let results: Vec<TuneResult> = rows.into_iter().map(|(_, _, r)| r).collect();
    match cfg.report {
        ReportFormat::Json => print!("{}", to_json(&results)),
        ReportFormat::Csv => print!("{table}"),
    }
    Ok(results)
}

/// Output of `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub original: String,
    pub enhanced: String,
    pub wavelet: WEComparison,
    pub fitness: FitnessReport,
}

/// Flat CSV layout of [`EvalReport`].
#[derive(Debug, Serialize)]
struct EvalRow<'a> {
    original: &'a str,
    enhanced: &'a str,
    awe_original: f64,
    awe_enhanced: f64,
    awe_ratio: f64,
    dwe_original: f64,
    dwe_enhanced: f64,
    dwe_ratio: f64,
    fitness: f64,
    edge_intensity_sum: f64,
    edgel_count: usize,
    entropy_bits: f64,
    pixel_count: usize,
    edge_threshold: f64,
}

impl<'a> From<&'a EvalReport> for EvalRow<'a> {
    fn from(r: &'a EvalReport) -> Self {
        Self {
            original: &r.original,
            enhanced: &r.enhanced,
            awe_original: r.wavelet.awe_original,
            awe_enhanced: r.wavelet.awe_enhanced,
            awe_ratio: r.wavelet.awe_ratio,
            dwe_original: r.wavelet.dwe_original,
            dwe_enhanced: r.wavelet.dwe_enhanced,
            dwe_ratio: r.wavelet.dwe_ratio,
            fitness: r.fitness.fitness,
            edge_intensity_sum: r.fitness.edge_intensity_sum,
            edgel_count: r.fitness.edgel_count,
            entropy_bits: r.fitness.entropy_bits,
            pixel_count: r.fitness.pixel_count,
            edge_threshold: r.fitness.edge_threshold,
        }
    }
}

/// Renders an eval report in the requested format.
pub fn render_eval(report: &EvalReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(to_json(report)),
        ReportFormat::Csv => csv_text(&[EvalRow::from(report)]),
    }
}

pub fn cmd_eval(cfg: &RunConfig, original: &Path, enhanced: &Path) -> Result<EvalReport> {
    let orig = cfg.prepare(image_io::load_image(original)?)?;
    let enh = cfg.prepare(image_io::load_image(enhanced)?)?;
    let report = EvalReport {
        original: original.display().to_string(),
        enhanced: enhanced.display().to_string(),
        wavelet: we_report(&orig, &enh)?,
        fitness: objective::fitness(&enh, cfg.threshold),
    };
    print!("{}", render_eval(&report, cfg.report)?);
    Ok(report)
}

/// One (image, method) row of `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub image: String,
    pub method: Method,
    pub params: Option<RetinexParams>,
    pub fitness: FitnessReport,
    pub wavelet: WEComparison,
    /// Fitness of the same variant with default parameters (tuned rows only).
    pub default_fitness: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CompareCsvRow<'a> {
    image: &'a str,
    method: &'a str,
    fitness: f64,
    default_fitness: Option<f64>,
    edge_intensity_sum: f64,
    edgel_count: usize,
    entropy_bits: f64,
    awe_original: f64,
    awe_enhanced: f64,
    awe_ratio: f64,
    dwe_original: f64,
    dwe_enhanced: f64,
    dwe_ratio: f64,
}

impl<'a> From<&'a CompareRow> for CompareCsvRow<'a> {
    fn from(r: &'a CompareRow) -> Self {
        Self {
            image: &r.image,
            method: r.method.as_str(),
            fitness: r.fitness.fitness,
            default_fitness: r.default_fitness,
            edge_intensity_sum: r.fitness.edge_intensity_sum,
            edgel_count: r.fitness.edgel_count,
            entropy_bits: r.fitness.entropy_bits,
            awe_original: r.wavelet.awe_original,
            awe_enhanced: r.wavelet.awe_enhanced,
            awe_ratio: r.wavelet.awe_ratio,
            dwe_original: r.wavelet.dwe_original,
            dwe_enhanced: r.wavelet.dwe_enhanced,
            dwe_ratio: r.wavelet.dwe_ratio,
        }
    }
}

pub fn render_compare(rows: &[CompareRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(to_json(&rows)),
        ReportFormat::Csv => csv_text(&rows.iter().map(CompareCsvRow::from).collect::<Vec<_>>()),
    }
}

/// Enhances one image with every method and scores the results.
pub fn compare_image(cfg: &RunConfig, name: &str, img: &RgbImage) -> Result<Vec<(CompareRow, RgbImage)>> {
    let mut rows = Vec::with_capacity(3);
    let he = histogram_equalize(img);
    rows.push((
        CompareRow {
            image: name.to_string(),
            method: Method::He,
            params: None,
            fitness: objective::fitness(&he, cfg.threshold),
            wavelet: we_report(img, &he)?,
            default_fitness: None,
        },
        he,
    ));
    let opts = cfg.tune_options();
    for (method, variant) in [(Method::Msrcr, Variant::Msrcr), (Method::Msrmcr, Variant::Msrmcr)] {
        let tuned = pso::tune(img, variant, &cfg.bounds(variant)?, &cfg.swarm_config(variant)?, &opts)?;
        let enhanced = retinex::enhance(img, &tuned.best_params, &opts.weights)?;
        let default_fitness = pso::score(img, &RetinexParams::defaults(variant), &opts)?;
        rows.push((
            CompareRow {
                image: name.to_string(),
                method,
                params: Some(tuned.best_params),
                fitness: objective::fitness(&enhanced, cfg.threshold),
                wavelet: we_report(img, &enhanced)?,
                default_fitness: Some(default_fitness),
            },
            enhanced,
        ));
    }
    Ok(rows)
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<CompareRow>> {
    if !cfg.overrides.is_empty() {
        return Err(Error::config("compare does not take parameter overrides"));
    }
    let images = cfg.load_all()?;
    let mut results = Vec::new();
    for (path, img) in &images {
        results.extend(compare_image(cfg, &stem(path), img)?);
    }

    ensure_dir(&cfg.out_dir)?;
    for (row, enhanced) in &results {
        let file = format!("{}_{}.png", row.image, row.method);
        image_io::save_image(enhanced, cfg.out_dir.join(file))?;
    }
    let rows: Vec<CompareRow> = results.into_iter().map(|(r, _)| r).collect();
    write_text(&cfg.out_dir.join("compare.json"), &render_compare(&rows, ReportFormat::Json)?)?;
    write_text(&cfg.out_dir.join("compare.csv"), &render_compare(&rows, ReportFormat::Csv)?)?;
    print!("{}", render_compare(&rows, cfg.report)?);
    Ok(rows)
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Format { .. } => 2,
        Error::Argument(_) | Error::Config(_) => 1,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Enhance { inputs, opts } => {
            let cfg = RunConfig::resolve(&opts, inputs, false)?;
            let sidecars = cmd_enhance(&cfg)?;
            if cfg.report == ReportFormat::Json {
                print!("{}", to_json(&sidecars));
            } else {
                let rows: Vec<_> = sidecars
                    .iter()
                    .map(|s| (s.input.as_str(), s.method.as_str(), s.fitness))
                    .map(|(input, method, f)| EnhanceCsvRow {
                        input,
                        method,
                        fitness: f.fitness,
                        edge_intensity_sum: f.edge_intensity_sum,
                        edgel_count: f.edgel_count,
                        entropy_bits: f.entropy_bits,
                    })
                    .collect();
                print!("{}", csv_text(&rows)?);
            }
        }
        Command::Tune { inputs, opts } => {
            let cfg = RunConfig::resolve(&opts, inputs, true)?;
            cmd_tune(&cfg)?;
        }
        Command::Eval {
            original,
            enhanced,
            opts,
        } => {
            let cfg = RunConfig::resolve(&opts, Vec::new(), false)?;
            let report = cmd_eval(&cfg, &original, &enhanced)?;
            if opts.out.is_some() {
                ensure_dir(&cfg.out_dir)?;
                let name = match cfg.report {
                    ReportFormat::Json => "eval.json",
                    ReportFormat::Csv => "eval.csv",
                };
                write_text(&cfg.out_dir.join(name), &render_eval(&report, cfg.report)?)?;
            }
        }
        Command::Compare { inputs, opts } => {
            let cfg = RunConfig::resolve(&opts, inputs, true)?;
            cmd_compare(&cfg)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EnhanceCsvRow<'a> {
    input: &'a str,
    method: &'a str,
    fitness: f64,
    edge_intensity_sum: f64,
    edgel_count: usize,
    entropy_bits: f64,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
