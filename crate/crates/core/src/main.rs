use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use lghp::config::{Binning, DescriptorConfig, DescriptorKind, LghpParams};
use lghp::dataset::scan_dataset;
use lghp::descriptor::{compute_lghp_maps, render_feature_image};
use lghp::eval::{
    cross_validate, noise_eval, recognition_loo, retrieval_sweep, EvalReport, RecognitionMode,
    RecognitionResult, SplitSpec, DEFAULT_FOLDS, DEFAULT_MAX_N,
};
use lghp::gabor::{bank_from_scales, build_bank, gabor_responses, DEFAULT_SCALES};
use lghp::image::{load_image, DEFAULT_SIDE};
use lghp::index::build_index;
use lghp::matching::rank_all;
use lghp::store::{load_index, save_index};
use lghp::synthetic::face_like_corpus;

#[derive(Parser)]
#[command(
    name = "lghp",
    version,
    about = "LGHP face descriptor extraction and retrieval benchmark"
)]
struct Cli {
    /// Worker threads (default: all cores). Never changes any output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe every image of a dataset and write an index file.
    Index {
        /// Dataset root laid out as <root>/<class>/<image>.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Rank an indexed dataset against one query image.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
    /// APR/ARR sweep and recognition rates over an index.
    Eval {
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        /// Leave-one-out recognition (rank-2 match).
        #[arg(long)]
        loo: bool,
        /// Probe/gallery cross-validation over --fractions.
        #[arg(long)]
        split: bool,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.3, 0.4, 0.5, 0.6])]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Recognition CSV destination (default: standard output).
        #[arg(long)]
        recognition_csv: Option<PathBuf>,
    },
    /// Retrieval sweep over descriptors of noise-corrupted images.
    Noise {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
        #[command(flatten)]
        eval: EvalArgs,
        /// Noise variance on the [0, 1] intensity scale.
        #[arg(long, default_value_t = 0.05)]
        variance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write one feature image per (distance, direction pair).
    Visualize {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        #[arg(long, default_value_t = DEFAULT_SIDE)]
        side: usize,
        #[arg(long, value_enum, default_value_t = ImageFormat::Pgm)]
        format: ImageFormat,
        /// Also dump the Gabor response images.
        #[arg(long)]
        gabor: bool,
        #[arg(long = "gabor-scale", value_parser = parse_scale)]
        gabor_scales: Vec<(f64, f64, f64)>,
    },
    /// Generate the synthetic face-like corpus as PNG files.
    Synth {
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 10)]
        classes: usize,
        #[arg(long, default_value_t = 8)]
        per_class: usize,
        #[arg(long, default_value_t = DEFAULT_SIDE)]
        side: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, default_value_t = DEFAULT_SIDE)]
    side: usize,
    /// Largest ring distance R.
    #[arg(long, default_value_t = 3)]
    radius: usize,
    #[arg(long, value_enum, default_value_t = BinningArg::Full512)]
    binning: BinningArg,
    /// Spatial cells per axis.
    #[arg(long, default_value_t = 1)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Lghp)]
    descriptor: KindArg,
    /// Describe Gabor responses instead of raw intensities.
    #[arg(long)]
    gabor: bool,
    /// Gabor scale as "frequency,sigma_s,sigma_t"; repeat per scale.
    #[arg(long = "gabor-scale", value_parser = parse_scale)]
    gabor_scales: Vec<(f64, f64, f64)>,
}

#[derive(Args)]
struct EvalArgs {
    /// Largest number of retrieved images in the APR/ARR sweep.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    max_n: usize,
    /// Retrieval CSV destination (default: standard output).
    #[arg(long)]
    retrieval_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BinningArg {
    #[value(name = "full-512")]
    Full512,
    #[value(name = "paper-256")]
    Paper256,
    U2,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lghp,
    Lbp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImageFormat {
    Pgm,
    Png,
}

fn parse_scale(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [f, sigma] => Ok((f, sigma, sigma)),
        [f, ss, st] => Ok((f, ss, st)),
        _ => Err(format!(
            "expected 'f,sigma' or 'f,sigma_s,sigma_t', got '{s}'"
        )),
    }
}

fn scales_or_default(scales: &[(f64, f64, f64)]) -> Vec<(f64, f64, f64)> {
    if scales.is_empty() {
        DEFAULT_SCALES.iter().map(|&(f, s)| (f, s, s)).collect()
    } else {
        scales.to_vec()
    }
}

impl ExtractArgs {
    fn config(&self) -> anyhow::Result<DescriptorConfig> {
        let config = DescriptorConfig {
            kind: match self.descriptor {
                KindArg::Lghp => DescriptorKind::Lghp,
                KindArg::Lbp => DescriptorKind::Lbp,
            },
            params: LghpParams {
                radius_limit: self.radius,
                side: self.side,
                binning: match self.binning {
                    BinningArg::Full512 => Binning::Full512,
                    BinningArg::Paper256 => Binning::Paper256,
                    BinningArg::U2 => Binning::U2,
                },
                grid: self.grid,
            },
            gabor: if self.gabor {
                bank_from_scales(&scales_or_default(&self.gabor_scales))
            } else {
                Vec::new()
            },
        };
        if !self.gabor && !self.gabor_scales.is_empty() {
            bail!("--gabor-scale requires --gabor");
        }
        config.validate()?;
        build_bank(&config.gabor)?;
        Ok(config)
    }
}

fn csv_sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_retrieval(report: &EvalReport, args: &EvalArgs) -> anyhow::Result<()> {
    let mut sink = csv_sink(args.retrieval_csv.as_deref())?;
    report.write_retrieval_csv(&mut sink)?;
    sink.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Index {
            dataset,
            output,
            extract,
        } => {
            let config = extract.config()?;
            let started = Instant::now();
            let manifest = scan_dataset(&dataset)?;
            info!(
                "{} images in {} classes under {}",
                manifest.len(),
                manifest.class_names.len(),
                dataset.display()
            );
            let index = build_index(&manifest, &config)?;
            info!(
                "extracted {} descriptors of length {} in {:.2?}",
                index.len(),
                config.descriptor_len(),
                started.elapsed()
            );
            save_index(&index, &output)?;
            info!("wrote {}", output.display());
        }
        Command::Query {
            index,
            image,
            top_k,
        } => {
            let index = load_index(&index)?;
            let img = load_image(&image, index.config().params.side)?;
            let query = index.config().extract(&img)?;
            let ranked = rank_all(&query, &index, true, None)?;
            let mut out = io::stdout().lock();
            writeln!(out, "rank,image_id,path,label,distance")?;
            for r in ranked.entries.iter().take(top_k) {
                let path = &index.get(r.image_id).expect("ranked id is indexed").path;
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.rank, r.image_id, path, r.label, r.distance
                )?;
            }
        }
        Command::Eval {
            index,
            eval,
            loo,
            split,
            fractions,
            folds,
            seed,
            recognition_csv,
        } => {
            let index = load_index(&index)?;
            let started = Instant::now();
            let mut report = EvalReport {
                retrieval: retrieval_sweep(&index, eval.max_n)?,
                recognition: Vec::new(),
            };
            if loo {
                let gamma = recognition_loo(&index)?;
                info!("leave-one-out recognition {gamma:.2}%");
                report.recognition.push(RecognitionResult {
                    mode: RecognitionMode::Loo,
                    probe_fraction: None,
                    folds: vec![gamma],
                });
            }
            if split {
                for &probe_fraction in &fractions {
                    let spec = SplitSpec {
                        probe_fraction,
                        folds,
                        seed,
                    };
                    let r = cross_validate(&index, &spec)?;
                    info!(
                        "probe fraction {probe_fraction}: mean recognition {:.2}%",
                        r.mean()
                    );
                    report.recognition.push(r);
                }
            }
            info!("evaluation took {:.2?}", started.elapsed());
            write_retrieval(&report, &eval)?;
            if !report.recognition.is_empty() {
                let mut sink = csv_sink(recognition_csv.as_deref())?;
                report.write_recognition_csv(&mut sink)?;
                sink.flush()?;
            }
        }
        Command::Noise {
            dataset,
            extract,
            eval,
            variance,
            seed,
        } => {
            let config = extract.config()?;
            let manifest = scan_dataset(&dataset)?;
            let started = Instant::now();
            let report = noise_eval(&manifest, &config, variance, seed, eval.max_n)?;
            info!(
                "noise evaluation over {} images took {:.2?}",
                manifest.len(),
                started.elapsed()
            );
            write_retrieval(&report, &eval)?;
        }
        Command::Visualize {
            image,
            output_dir,
            radius,
            side,
            format,
            gabor,
            gabor_scales,
        } => {
            let img = load_image(&image, side)?;
            let params = LghpParams {
                radius_limit: radius,
                side,
                ..LghpParams::default()
            };
            params.validate()?;
            fs::create_dir_all(&output_dir)?;
            let stem = image
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "image".into());
            let ext = match format {
                ImageFormat::Pgm => "pgm",
                ImageFormat::Png => "png",
            };
            let maps = compute_lghp_maps(&img, radius)?;
            for map in &maps {
                let pair = map.pair.expect("lghp maps carry their pair");
                let name = format!("{stem}_D{}_{pair}.{ext}", map.distance);
                render_feature_image(map).save(&output_dir.join(name))?;
            }
            info!(
                "wrote {} feature images to {}",
                maps.len(),
                output_dir.display()
            );
            if gabor {
                let bank = build_bank(&bank_from_scales(&scales_or_default(&gabor_scales)))?;
                for (k, response) in gabor_responses(&img, &bank)?.iter().enumerate() {
                    response.save(&output_dir.join(format!("{stem}_gabor{k}.{ext}")))?;
                }
            }
        }
        Command::Synth {
            output,
            classes,
            per_class,
            side,
            seed,
        } => {
            for (i, (label, img)) in face_like_corpus(classes, per_class, side, seed)
                .into_iter()
                .enumerate()
            {
                let dir = output.join(format!("class_{label:03}"));
                fs::create_dir_all(&dir)?;
                img.save(&dir.join(format!("{:03}.png", i % per_class)))?;
            }
            info!(
                "wrote {} images to {}",
                classes * per_class,
                output.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
