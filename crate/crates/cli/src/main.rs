use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use cscd_cli::commands;
use cscd_core::config::PipelineConfig;
use cscd_core::evaluation::EvalParams;

/// Center-surround contrast pedestrian detector.
#[derive(Parser, Debug)]
#[command(name = "cscd", version, about)]
struct Cli {
    /// Configuration file with `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: ConfigOverrides,

    #[command(subcommand)]
    command: Command,
}

/// Flag mirror of the configuration keys.
#[derive(Args, Debug, Default)]
struct ConfigOverrides {
    /// Comma-separated cell sizes, e.g. 4,6,8,10
    #[arg(long, global = true)]
    scales: Option<String>,
    /// c1s8 or c1s1
    #[arg(long, global = true)]
    pattern: Option<String>,
    /// gaussian or histogram
    #[arg(long, global = true)]
    descriptor: Option<String>,
    #[arg(long, global = true)]
    histogram_bins: Option<String>,
    /// w2, l2, sgrd, kld, hellinger or hi
    #[arg(long, global = true)]
    measure: Option<String>,
    #[arg(long, global = true)]
    trees: Option<String>,
    #[arg(long, global = true)]
    tree_depth: Option<String>,
    #[arg(long, global = true)]
    rounds: Option<String>,
    #[arg(long, global = true)]
    negatives_per_round: Option<String>,
    #[arg(long, global = true)]
    nms_overlap: Option<String>,
    #[arg(long, global = true)]
    scale_step: Option<String>,
    #[arg(long, global = true)]
    stride: Option<String>,
    #[arg(long, global = true)]
    threshold: Option<String>,
    #[arg(long, global = true)]
    scale_min: Option<String>,
    #[arg(long, global = true)]
    scale_max: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    mirror_positives: Option<String>,
}

impl ConfigOverrides {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        let pairs: [(&str, &Option<String>); 17] = [
            ("scales", &self.scales),
            ("pattern", &self.pattern),
            ("descriptor", &self.descriptor),
            ("histogram_bins", &self.histogram_bins),
            ("measure", &self.measure),
            ("trees", &self.trees),
            ("tree_depth", &self.tree_depth),
            ("rounds", &self.rounds),
            ("negatives_per_round", &self.negatives_per_round),
            ("nms_overlap", &self.nms_overlap),
            ("scale_step", &self.scale_step),
            ("stride", &self.stride),
            ("threshold", &self.threshold),
            ("scale_min", &self.scale_min),
            ("scale_max", &self.scale_max),
            ("seed", &self.seed),
            ("mirror_positives", &self.mirror_positives),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Average contrast maps of two sample classes, as CSV heat maps.
    Avgmap {
        #[arg(long)]
        pos_dir: PathBuf,
        #[arg(long)]
        neg_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Contrast-map cell sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 6])]
        map_scales: Vec<usize>,
    },
    /// Extract the labeled feature matrix of a sample set.
    Extract {
        #[arg(long)]
        pos_dir: PathBuf,
        #[arg(long)]
        neg_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a detector with multi-round hard-negative mining.
    Train {
        #[arg(long)]
        pos_dir: PathBuf,
        #[arg(long)]
        neg_dir: PathBuf,
        /// Output model file (weight-map CSVs are written next to it).
        #[arg(long)]
        model: PathBuf,
    },
    /// Run the detector over a directory of images.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a detection file against ground-truth annotations.
    Eval {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        /// Output curve CSV.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the image count used for FPPI.
        #[arg(long)]
        image_count: Option<usize>,
        #[arg(long, default_value_t = 50.0)]
        min_height: f64,
        #[arg(long, default_value_t = 0.65)]
        min_visibility: f64,
        /// Upper visibility bound for occlusion sub-ranges (inclusive).
        #[arg(long, default_value_t = 1.0)]
        max_visibility: f64,
        #[arg(long, default_value_t = 1.25)]
        xi: f64,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        #[arg(long, default_value = "person")]
        pedestrian_label: String,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;

    match cli.command {
        Command::Avgmap { pos_dir, neg_dir, out_dir, map_scales } => {
            let (p, n) = commands::cmd_avgmap(&cfg, &pos_dir, &neg_dir, &map_scales, &out_dir)?;
            println!("{}", p.display());
            println!("{}", n.display());
        }
        Command::Extract { pos_dir, neg_dir, out } => {
            let (p, n) = commands::cmd_extract(&cfg, &pos_dir, &neg_dir, &out)?;
            println!("extracted {p} positive and {n} negative samples -> {}", out.display());
        }
        Command::Train { pos_dir, neg_dir, model } => {
            let outcome = commands::cmd_train(&cfg, &pos_dir, &neg_dir, &model)?;
            println!(
                "trained over {} rounds, final training error {:.5} -> {}",
                outcome.pool_sizes.len(),
                outcome.final_training_error,
                outcome.model_path.display()
            );
        }
        Command::Detect { model, images, out } => {
            let count = commands::cmd_detect(&cfg, &model, &images, &out)?;
            println!("{count} detections -> {}", out.display());
        }
        Command::Eval {
            detections,
            annotations,
            out,
            image_count,
            min_height,
            min_visibility,
            max_visibility,
            xi,
            iou,
            pedestrian_label,
        } => {
            let params = EvalParams {
                min_height,
                min_visibility,
                max_visibility,
                xi,
                iou,
                pedestrian_label,
            };
            let outcome =
                commands::cmd_eval(&cfg, &params, &detections, &annotations, &out, image_count)?;
            println!("lamr = {:.6}", outcome.curve.lamr);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
