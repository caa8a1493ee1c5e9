mod overlay;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pageseg_capture::{capture, CaptureConfig};
use pageseg_core::evaluation::bench::{benchmark, compare_reports, BenchReport, SubjectSpec};
use pageseg_core::evaluation::{evaluate_with, PairingMetric};
use pageseg_core::snapshot::Viewport;
use pageseg_core::{load_snapshot, segment_page, GroundTruth, SegmentsFile};

#[derive(Parser)]
#[command(name = "pageseg", version, about = "Visual web page segmentation")]
struct Cli {
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Only errors on stderr; no summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a URL headlessly and write a snapshot directory.
    Capture {
        url: String,
        #[arg(short, long)]
        out: PathBuf,
        /// Viewport as WIDTHxHEIGHT.
        #[arg(long, default_value = "1366x768", value_parser = parse_viewport)]
        viewport: Viewport,
        /// Navigation timeout in seconds.
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
        /// Wait after the load event, in seconds.
        #[arg(long, default_value_t = 2.0)]
        settle: f64,
        /// Node extractor script (defaults to $PAGESEG_EXTRACTOR).
        #[arg(long)]
        extractor: Option<PathBuf>,
        /// Skip the second extraction pass that checks the page is unchanged.
        #[arg(long)]
        no_verify: bool,
    },
    /// Segment a snapshot directory into segments.json.
    Segment {
        snapshot: PathBuf,
        /// Output file [default: SNAPSHOT/segments.json].
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also draw the segments on a copy of the screenshot.
        #[arg(long, num_args = 0..=1, default_missing_value = "")]
        overlay: Option<PathBuf>,
        /// Dump the adjacency edge list as JSON.
        #[arg(long)]
        adjacency: Option<PathBuf>,
    },
    /// Score segments.json against a truth file.
    Eval {
        segments: PathBuf,
        truth: PathBuf,
        #[arg(long, value_enum, default_value_t = Pairing::Overlap)]
        pairing: Pairing,
    },
    /// Segment and score every subject of a manifest.
    Bench {
        manifest: PathBuf,
        /// Report of another tool on the same subjects, for Welch t rows.
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Pairing {
    Overlap,
    Centroid,
}

fn parse_viewport(s: &str) -> Result<Viewport, String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("viewport dimensions must be positive".into());
    }
    Ok(Viewport { w, h })
}

/// An error paired with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

fn seconds(v: f64, what: &str) -> anyhow::Result<Duration> {
    Duration::try_from_secs_f64(v).map_err(|_| anyhow!("invalid {what}: {v}"))
}

struct Output {
    json: bool,
    quiet: bool,
}

impl Output {
    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> anyhow::Result<()> {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value)?);
        } else if !self.quiet {
            print!("{}", text());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SegmentSummary<'a> {
    segments_file: &'a Path,
    overlay: Option<&'a Path>,
    segments: usize,
    objects: usize,
    seconds: f64,
}

#[derive(Serialize)]
struct CaptureSummary<'a> {
    out: &'a Path,
    nodes: usize,
    width: u32,
    height: u32,
    skipped_iframes: u32,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = Output { json: cli.json, quiet: cli.quiet };
    match cli.command {
        Command::Capture { url, out: dir, viewport, timeout, settle, extractor, no_verify } => {
            let cfg = CaptureConfig {
                url,
                viewport,
                nav_timeout: seconds(timeout, "timeout")?,
                settle_delay: seconds(settle, "settle delay")?,
                extractor_script: extractor,
                verify_idempotent: !no_verify,
            };
            let snap = capture(&cfg, &dir).map_err(|e| fail(2)(e.into()))?;
            let summary = CaptureSummary {
                out: &dir,
                nodes: snap.nodes.len(),
                width: snap.screenshot.width(),
                height: snap.screenshot.height(),
                skipped_iframes: snap.skipped_iframes,
            };
            out.emit(&summary, || {
                format!(
                    "captured {} nodes, {}x{} screenshot -> {}\n",
                    summary.nodes,
                    summary.width,
                    summary.height,
                    dir.display()
                )
            })?;
        }
        Command::Segment { snapshot, out: file, overlay, adjacency } => {
            let snap = load_snapshot(&snapshot)
                .with_context(|| format!("invalid snapshot {}", snapshot.display()))
                .map_err(fail(3))?;
            let start = Instant::now();
            let seg = segment_page(&snap);
            let secs = start.elapsed().as_secs_f64();

            let file = file.unwrap_or_else(|| snapshot.join("segments.json"));
            let doc = SegmentsFile::new(&snap.url, snap.captured_at.clone(), &seg.segments);
            fs::write(&file, serde_json::to_string_pretty(&doc)? + "\n")
                .with_context(|| format!("writing {}", file.display()))?;
            let overlay = overlay.map(|p| if p.as_os_str().is_empty() { snapshot.join("overlay.png") } else { p });
            if let Some(path) = &overlay {
                let img = overlay::render(&snap.screenshot, &doc.bboxes(), &overlay::OverlayStyle::default());
                img.save_with_format(path, image::ImageFormat::Png)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = &adjacency {
                let boxes: Vec<_> = seg.objects.iter().map(|o| o.bounds).collect();
                fs::write(path, seg.neighborhood.to_json(&boxes))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let summary = SegmentSummary {
                segments_file: &file,
                overlay: overlay.as_deref(),
                segments: seg.segments.len(),
                objects: seg.objects.len(),
                seconds: secs,
            };
            out.emit(&summary, || {
                format!(
                    "{} segments from {} objects in {secs:.4} s -> {}\n",
                    summary.segments,
                    summary.objects,
                    file.display()
                )
            })?;
        }
        Command::Eval { segments, truth, pairing } => {
            let raw = fs::read_to_string(&segments).with_context(|| format!("reading {}", segments.display()))?;
            let doc: SegmentsFile =
                serde_json::from_str(&raw).with_context(|| format!("malformed {}", segments.display()))?;
            if !truth.is_file() {
                return Err(fail(4)(anyhow!("truth file not found: {}", truth.display())));
            }
            let gt = GroundTruth::load(&truth)?;
            let metric = match pairing {
                Pairing::Overlap => PairingMetric::Overlap,
                Pairing::Centroid => PairingMetric::Centroid,
            };
            let report = evaluate_with(&doc.bboxes(), &gt.rects(), metric);
            out.emit(&report, || {
                format!(
                    "precision {:.3}\nrecall    {:.3}\nf-measure {:.3}\ntp {} fp {} fn {}\n",
                    report.precision, report.recall, report.fmeasure, report.tp, report.fp, report.fn_
                )
            })?;
        }
        Command::Bench { manifest, compare, out: file } => {
            let raw = fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let subjects: Vec<SubjectSpec> = serde_json::from_str::<Vec<SubjectSpec>>(&raw)
                .with_context(|| format!("malformed manifest {}", manifest.display()))?
                .into_iter()
                .map(|s| SubjectSpec {
                    snapshot_dir: base.join(s.snapshot_dir),
                    truth_file: base.join(s.truth_file),
                })
                .collect();
            let mut report = benchmark(&subjects);
            if let Some(other) = compare {
                let raw = fs::read_to_string(&other).with_context(|| format!("reading {}", other.display()))?;
                let theirs: BenchReport =
                    serde_json::from_str(&raw).with_context(|| format!("malformed report {}", other.display()))?;
                report.comparison = Some(compare_reports(&report, &theirs)?);
            }
            if let Some(path) = &file {
                fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            out.emit(&report, || report.to_table())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
