//! `rsos` subcommands.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rsos_core::gim::MinerConfig;
use rsos_core::higen::{extract_higens, render_higen_report, RenderOptions};
use rsos_core::recommender::{recommend, Category, RecommendConfig, Recommendation, RecommendationRequest, Trend};
use rsos_core::transactions::Granularity;
use rsos_core::vision::{
    detect, estimate_measurements, BodyMeasurements, CascadeClassifier, GrayImage, MeasureConfig, ScanParams,
};

use crate::service::{self, AppState};
use crate::workspace::Workspace;
use crate::PlatformError;

#[derive(Debug, Parser)]
#[command(name = "rsos", version, about = "Outfit recommendation from mined purchase patterns")]
pub struct Cli {
    /// Workspace directory holding ingested inputs and the mined snapshot.
    #[arg(long, global = true, env = "RSOS_WORKSPACE", default_value = "rsos-workspace")]
    pub workspace: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a directory of input files and copy it into the workspace.
    Ingest {
        dir: PathBuf,
        /// Period length used to split the transaction log: day, month or year.
        #[arg(long, default_value = "month")]
        granularity: Granularity,
    },
    /// Mine every period, store the snapshot and print the frequent itemsets.
    Mine(MineArgs),
    /// Print the HIGENs of the ingested history.
    Higen {
        #[command(flatten)]
        mine: MineArgs,
        /// Use `/>` and `\>` instead of Unicode arrows.
        #[arg(long)]
        ascii: bool,
    },
    /// Run a cascade over a PGM image and print `x y w h score` per box.
    Detect(DetectArgs),
    /// Estimate body measurements from a silhouette PGM; prints JSON.
    Measure {
        image: PathBuf,
        /// Pixels per measurement unit.
        #[arg(long)]
        ppcm: f64,
        /// Gray level separating figure from background.
        #[arg(long, default_value_t = 128)]
        threshold: u8,
        /// The figure is lighter than the background.
        #[arg(long)]
        light_figure: bool,
    },
    /// Rank catalog entries for a shopper.
    Recommend(RecommendArgs),
    /// Serve the JSON API over the current snapshot.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Start even if the snapshot no longer matches the inputs.
        #[arg(long)]
        allow_stale: bool,
    },
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[arg(long, default_value_t = 2)]
    pub min_sup: usize,
    /// Attributes to mine, comma separated; their order is the display order.
    #[arg(long, value_delimiter = ',', default_value = "Outfit,Budget")]
    pub attrs: Vec<String>,
    /// Only climb the taxonomy for infrequent leaf itemsets.
    #[arg(long)]
    pub lazy: bool,
    #[arg(long)]
    pub max_size: Option<usize>,
}

impl MineArgs {
    fn config(&self) -> MinerConfig {
        let mut cfg = MinerConfig::new(self.min_sup, self.attrs.iter().map(|a| a.trim()));
        if self.lazy {
            cfg = cfg.lazy();
        }
        if let Some(n) = self.max_size {
            cfg = cfg.with_max_size(n);
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    image: PathBuf,
    /// Cascade file; defaults to the workspace's only cascade.
    #[arg(long)]
    cascade: Option<PathBuf>,
    #[arg(long, default_value_t = 1.25)]
    scale_factor: f64,
    #[arg(long, default_value_t = 2)]
    step: usize,
    #[arg(long)]
    min_window: Option<usize>,
    #[arg(long)]
    max_window: Option<usize>,
    #[arg(long, default_value_t = 0.4)]
    group_iou: f64,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    gender: String,
    #[arg(long, allow_negative_numbers = true)]
    budget: f64,
    #[arg(long, default_value = "")]
    profession: String,
    #[arg(long)]
    category: Option<Category>,
    /// Silhouette PGM to estimate measurements from (needs --ppcm).
    #[arg(long)]
    measure_from: Option<PathBuf>,
    #[arg(long)]
    ppcm: Option<f64>,
    /// JSON measurements; these override estimated values.
    #[arg(long)]
    measurements: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    /// Offer the closest stocked size when the closest size is sold out.
    #[arg(long)]
    size_fallback: bool,
    #[arg(long)]
    allow_stale: bool,
    /// Print the recommendations as JSON.
    #[arg(long)]
    json: bool,
}

fn read(path: &Path) -> Result<Vec<u8>, PlatformError> {
    fs::read(path).map_err(|source| PlatformError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_image(path: &Path) -> Result<GrayImage, PlatformError> {
    GrayImage::from_pgm(&read(path)?).map_err(|e| PlatformError::Invalid {
        file: path.display().to_string(),
        message: e.to_string(),
    })
}

fn trend_label(t: Trend) -> &'static str {
    match t {
        Trend::Gen => "GEN",
        Trend::Spec => "SPEC",
        Trend::Same => "SAME",
        Trend::Lateral => "LATERAL",
        Trend::None => "NONE",
    }
}

fn render_recommendations(recs: &[Recommendation]) -> String {
    if recs.is_empty() {
        return "no matching outfits\n".into();
    }
    let mut out = String::new();
    for (i, r) in recs.iter().enumerate() {
        out.push_str(&format!(
            "{}. {} {}\tsize={}\tprice={}\tfit={:.3}\tscore={}\tpattern={}\ttrend={}\n",
            i + 1,
            r.entry.outfit_id,
            r.entry.name,
            r.size,
            r.entry.price,
            r.fit_distance,
            r.pattern_score,
            r.matched_pattern,
            trend_label(r.trend),
        ));
    }
    out
}

fn measurements(args: &RecommendArgs) -> Result<BodyMeasurements, PlatformError> {
    let detected = match (&args.measure_from, args.ppcm) {
        (Some(path), Some(ppcm)) => Some(estimate_measurements(
            &read_image(path)?,
            ppcm,
            &MeasureConfig::default(),
        )?),
        (Some(_), None) => return Err(PlatformError::Config("--measure-from needs --ppcm".into())),
        (None, _) => None,
    };
    let manual = match &args.measurements {
        Some(path) => {
            Some(
                serde_json::from_slice::<BodyMeasurements>(&read(path)?).map_err(|e| PlatformError::Invalid {
                    file: path.display().to_string(),
                    message: e.to_string(),
                })?,
            )
        }
        None => None,
    };
    match (detected, manual) {
        (Some(d), Some(m)) => Ok(d.with_overrides(&m)),
        (Some(d), None) => Ok(d),
        (None, Some(m)) => Ok(m),
        (None, None) => Err(PlatformError::Config(
            "give --measurements <file> or --measure-from <image> --ppcm <x>".into(),
        )),
    }
}

fn cascade_for(ws: &Workspace, path: Option<&Path>) -> Result<CascadeClassifier, PlatformError> {
    if let Some(path) = path {
        let text = String::from_utf8_lossy(&read(path)?).into_owned();
        return CascadeClassifier::parse(&text).map_err(|e| PlatformError::Invalid {
            file: path.display().to_string(),
            message: e.to_string(),
        });
    }
    let mut cascades = ws.load()?.cascades;
    if cascades.len() != 1 {
        return Err(PlatformError::Config(format!(
            "the workspace has {} cascades; pick one with --cascade",
            cascades.len()
        )));
    }
    Ok(cascades.pop_first().expect("one cascade").1)
}

/// Runs one parsed command, writing its normal output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), PlatformError> {
    let ws = Workspace::new(&cli.workspace);
    let text = match cli.command {
        Command::Ingest { dir, granularity } => format!("{}\n", ws.ingest(&dir, granularity)?),
        Command::Mine(args) => ws.snapshot_mine(&args.config())?.pattern_report(),
        Command::Higen { mine, ascii } => {
            let cfg = mine.config();
            cfg.validate().map_err(|e| PlatformError::Config(e.to_string()))?;
            let inputs = ws.load()?;
            let higens = extract_higens(&inputs.periods, &inputs.taxonomy, &cfg)
                .map_err(|e| PlatformError::Config(e.to_string()))?;
            let opts = RenderOptions {
                ascii,
                ..RenderOptions::report(cfg.display_order())
            };
            render_higen_report(&higens, &opts)
        }
        Command::Detect(args) => {
            let img = read_image(&args.image)?;
            let cascade = cascade_for(&ws, args.cascade.as_deref())?;
            let scan = ScanParams {
                scale_factor: args.scale_factor,
                step: args.step,
                min_window: args.min_window,
                max_window: args.max_window,
                group_iou: args.group_iou,
            };
            detect(&img, &cascade, &scan)?
                .iter()
                .map(|d| format!("{d}\n"))
                .collect()
        }
        Command::Measure {
            image,
            ppcm,
            threshold,
            light_figure,
        } => {
            let cfg = MeasureConfig {
                threshold,
                foreground_dark: !light_figure,
                ..MeasureConfig::default()
            };
            let m = estimate_measurements(&read_image(&image)?, ppcm, &cfg)?;
            format!(
                "{}\n",
                serde_json::to_string_pretty(&m).expect("measurements serialize")
            )
        }
        Command::Recommend(args) => {
            let req = RecommendationRequest {
                measurements: measurements(&args)?,
                gender: args.gender.clone(),
                profession: args.profession.clone(),
                budget: args.budget,
                category: args.category,
                top_k: args.top_k,
            };
            let loaded = ws.open(args.allow_stale)?;
            let rc = RecommendConfig {
                size_fallback: args.size_fallback,
                ..RecommendConfig::default()
            };
            let recs = recommend(&req, &loaded.catalog, &loaded.sizing, &loaded.model, &rc)?;
            if args.json {
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&recs).expect("recommendations serialize")
                )
            } else {
                render_recommendations(&recs)
            }
        }
        Command::Serve { bind, allow_stale } => {
            let state = Arc::new(AppState::open(ws, allow_stale)?);
            let runtime = tokio::runtime::Runtime::new().map_err(|source| PlatformError::Io {
                path: "tokio runtime".into(),
                source,
            })?;
            runtime.block_on(service::serve(state, bind))?;
            String::new()
        }
    };
    out.write_all(text.as_bytes()).map_err(|source| PlatformError::Io {
        path: "<stdout>".into(),
        source,
    })
}

/// Parses `args`, runs the command and returns the process exit code.
/// Usage errors exit with 1 like other input errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
