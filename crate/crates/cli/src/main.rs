//! `mocseg` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use image::{DynamicImage, Rgb, RgbImage};
use log::info;
use rayon::prelude::*;

use mocseg::eval::{dataset_means, evaluate_page, report_csv, PageScores, LINE_THRESHOLD};
use mocseg::gt::{
    decode_diva, decode_raw_png, diva_encode, polygons_from_labels, read_page_xml, write_page_xml, write_raw_labels,
    DivaClass, LineLabeling, PageDocument, PolygonSet,
};
use mocseg::imaging::{load_binary_image, BinaryImage, Polarity};
use mocseg::pipeline::{segment_page, Mode, PipelineParams};
use mocseg::render::{label_color, render_blobs, render_labels, render_polygons, render_response, save_png};
use mocseg::synth::{generate_page, PageSpec};

#[derive(Parser)]
#[command(
    name = "mocseg",
    version,
    about = "Text-line segmentation for multiply oriented and curved handwriting"
)]
struct Cli {
    /// Worker threads for page-level parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment binary page images into text lines.
    Segment(SegmentArgs),
    /// Score predicted lines against ground truth.
    Evaluate(EvaluateArgs),
    /// Generate synthetic pages with ground truth from a JSON spec.
    Synth(SynthArgs),
    /// Render ground truth (PAGE XML, raw labels or DIVA PNG) as a colored overlay.
    Visualize(VisualizeArgs),
}

#[derive(Args)]
struct SegmentArgs {
    /// Page images (PNG or PGM) or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// TOML parameter file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the single-orientation baseline filter bank.
    #[arg(long)]
    baseline: bool,
    /// Also write per-stage overlays, the response map and the merge graph.
    #[arg(long)]
    debug: bool,
    /// Treat light pixels as ink.
    #[arg(long)]
    light_ink: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground-truth directory (`<stem>.xml` or `<stem>.labels.png`).
    #[arg(long)]
    gt: PathBuf,
    /// Prediction directory, same layout as the ground truth.
    #[arg(long)]
    pred: PathBuf,
    /// Directory of the page images.
    #[arg(long)]
    img: PathBuf,
    /// CSV report path (default: `<pred>/report.csv`).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = LINE_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    light_ink: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// A page spec, or an array of them.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VisualizeArgs {
    /// Ground-truth file.
    gt: PathBuf,
    /// Page image; required for PAGE XML.
    #[arg(long)]
    img: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    light_ink: bool,
}

fn polarity(light_ink: bool) -> Polarity {
    if light_ink {
        Polarity::LightIsForeground
    } else {
        Polarity::DarkIsForeground
    }
}

fn stem_of(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| anyhow!("{}: no file name", path.display()))
}

fn is_page_image(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    matches!(ext.as_deref(), Some("png" | "pgm")) && !name.ends_with(".labels.png") && !name.ends_with(".diva.png")
}

/// Page images named directly or found in the given directories, sorted.
fn collect_images(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let entries = fs::read_dir(p).with_context(|| format!("{}: cannot list directory", p.display()))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.is_file() && is_page_image(q))
                .collect();
            found.sort();
            out.extend(found);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            bail!("{}: no such file or directory", p.display());
        }
    }
    Ok(out)
}

fn page_stem(path: &Path) -> Result<String> {
    let stem = stem_of(path)?;
    Ok(stem.strip_suffix(".labels").unwrap_or(&stem).to_owned())
}

fn rgb(img: RgbImage) -> DynamicImage {
    DynamicImage::ImageRgb8(img)
}

fn segment_one(path: &Path, args: &SegmentArgs, params: &PipelineParams) -> Result<()> {
    let img = load_binary_image(path, polarity(args.light_ink))?;
    let stem = page_stem(path)?;
    let seg = segment_page(&img, params).with_context(|| format!("{}: segmentation failed", path.display()))?;
    info!("{}: {} lines", path.display(), seg.labeling.n_lines());
    let out = &args.out_dir;
    write_raw_labels(out.join(format!("{stem}.labels.png")), &seg.labeling)?;
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_owned();
    let doc = PageDocument {
        image_filename: file_name,
        width: img.width(),
        height: img.height(),
        lines: seg.polygons.clone(),
    };
    write_page_xml(out.join(format!("{stem}.xml")), &doc)?;
    save_png(
        out.join(format!("{stem}.overlay.png")),
        rgb(overlay(&img, &seg.labeling, &seg.polygons)),
    )?;

    if args.debug {
        let a = &seg.artifacts;
        let stages = [
            ("valid", &a.valid_blobs),
            ("invalid", &a.invalid_blobs),
            ("decomposed", &a.decomposed),
            ("ligatures", &a.removed_ligatures),
            ("merged", &a.merged_blobs),
        ];
        for (name, blobs) in stages {
            save_png(out.join(format!("{stem}.{name}.png")), rgb(render_blobs(&img, blobs)))?;
        }
        if let Some(field) = &a.field {
            save_png(
                out.join(format!("{stem}.response.png")),
                DynamicImage::ImageLuma8(render_response(field)),
            )?;
        }
        if let Some(graph) = &a.merge_graph {
            let p = out.join(format!("{stem}.graph.csv"));
            fs::write(&p, graph.to_csv()).with_context(|| format!("{}: cannot write", p.display()))?;
        }
    }
    Ok(())
}

/// Ink colored by line with each line's polygon outlined.
fn overlay(img: &BinaryImage, labeling: &LineLabeling, polys: &PolygonSet) -> RgbImage {
    let mut out = render_polygons(img, polys);
    for r in 0..img.height() {
        for c in 0..img.width() {
            let l = labeling.get(r, c);
            if l > 0 {
                out.put_pixel(c as u32, r as u32, Rgb(label_color(l)));
            }
        }
    }
    out
}

fn run_segment(args: &SegmentArgs) -> Result<()> {
    let mut params = match &args.config {
        Some(p) => mocseg::config::load_params(p)?,
        None => PipelineParams::default(),
    };
    if args.baseline {
        params.mode = Mode::SingleOrientedBaseline;
    }
    let pages = collect_images(&args.inputs)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("{}: cannot create directory", args.out_dir.display()))?;
    pages.par_iter().try_for_each(|p| segment_one(p, args, &params))
}

/// Ground truth or prediction for `stem` in `dir`: PAGE XML first, then raw labels.
fn load_lines(dir: &Path, stem: &str) -> Result<PolygonSet> {
    let xml = dir.join(format!("{stem}.xml"));
    if xml.is_file() {
        return Ok(read_page_xml(&xml)?.lines);
    }
    let raw = dir.join(format!("{stem}.labels.png"));
    if raw.is_file() {
        let bytes = fs::read(&raw).with_context(|| format!("{}: cannot read", raw.display()))?;
        let lab = decode_raw_png(&bytes).with_context(|| raw.display().to_string())?;
        return Ok(polygons_from_labels(&lab));
    }
    bail!("{}: no {stem}.xml or {stem}.labels.png", dir.display())
}

fn run_evaluate(args: &EvaluateArgs) -> Result<()> {
    for d in [&args.gt, &args.pred, &args.img] {
        if !d.is_dir() {
            bail!("{}: no such directory", d.display());
        }
    }
    let pages = collect_images(std::slice::from_ref(&args.img))?;
    if pages.is_empty() {
        bail!("{}: no page images", args.img.display());
    }
    let rows: Vec<(String, PageScores)> = pages
        .par_iter()
        .map(|p| -> Result<(String, PageScores)> {
            let stem = page_stem(p)?;
            let img = load_binary_image(p, polarity(args.light_ink))?;
            let gt = load_lines(&args.gt, &stem)?;
            let pred = load_lines(&args.pred, &stem)?;
            Ok((stem, evaluate_page(&gt, &pred, &img, args.threshold)))
        })
        .collect::<Result<_>>()?;
    let report = args.report.clone().unwrap_or_else(|| args.pred.join("report.csv"));
    fs::write(&report, report_csv(&rows)).with_context(|| format!("{}: cannot write", report.display()))?;
    let scores: Vec<PageScores> = rows.iter().map(|r| r.1).collect();
    let (pixel, line) = dataset_means(&scores)?;
    println!("pages {} mean pixel IU {pixel:.4} mean line IU {line:.4}", rows.len());
    Ok(())
}

fn read_specs(path: &Path) -> Result<Vec<PageSpec>> {
    let text = fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
    let specs = if text.trim_start().starts_with('[') {
        let specs: Vec<PageSpec> = serde_json::from_str(&text).with_context(|| path.display().to_string())?;
        for s in &specs {
            s.validate().with_context(|| path.display().to_string())?;
        }
        specs
    } else {
        vec![PageSpec::from_json(&text).with_context(|| path.display().to_string())?]
    };
    Ok(specs)
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let specs = read_specs(&args.spec)?;
    let base = stem_of(&args.spec)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("{}: cannot create directory", args.out_dir.display()))?;
    let single = specs.len() == 1;
    specs.par_iter().enumerate().try_for_each(|(i, spec)| -> Result<()> {
        let stem = if single { base.clone() } else { format!("{base}_{i:03}") };
        let (img, labels) = generate_page(spec).with_context(|| format!("{}: page {i}", args.spec.display()))?;
        let out = &args.out_dir;
        img.save_png(out.join(format!("{stem}.png")))?;
        write_raw_labels(out.join(format!("{stem}.labels.png")), &labels)?;
        let polys = polygons_from_labels(&labels);
        diva_encode(&img, &polys).save_png(out.join(format!("{stem}.diva.png")))?;
        let doc = PageDocument {
            image_filename: format!("{stem}.png"),
            width: img.width(),
            height: img.height(),
            lines: polys,
        };
        write_page_xml(out.join(format!("{stem}.xml")), &doc)?;
        Ok(())
    })
}

fn run_visualize(args: &VisualizeArgs) -> Result<()> {
    let gt = &args.gt;
    let img = match &args.img {
        Some(p) => Some(load_binary_image(p, polarity(args.light_ink))?),
        None => None,
    };
    let is_xml = gt
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("xml"));
    let out = if is_xml {
        let doc = read_page_xml(gt)?;
        let img = img.ok_or_else(|| anyhow!("{}: PAGE XML needs --img", gt.display()))?;
        render_polygons(&img, &doc.lines)
    } else {
        let bytes = fs::read(gt).with_context(|| format!("{}: cannot read", gt.display()))?;
        match decode_raw_png(&bytes) {
            Ok(lab) => match &img {
                Some(img) => overlay(img, &lab, &polygons_from_labels(&lab)),
                None => render_labels(&lab),
            },
            Err(_) => {
                let diva =
                    decode_diva(&bytes).with_context(|| format!("{}: neither raw labels nor DIVA", gt.display()))?;
                let (w, h) = (diva.width as u32, diva.height as u32);
                RgbImage::from_fn(w, h, |x, y| {
                    Rgb(match diva.get(y as usize, x as usize) {
                        DivaClass::Background => [255, 255, 255],
                        DivaClass::Boundary => [160, 160, 160],
                        DivaClass::TextLine => label_color(1),
                    })
                })
            }
        }
    };
    save_png(&args.out, rgb(out))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("cannot start worker threads")?;
    }
    match &cli.command {
        Command::Segment(a) => run_segment(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Synth(a) => run_synth(a),
        Command::Visualize(a) => run_visualize(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MOCSEG_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("mocseg: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
