use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use gsline::io::{self, RunConfig};
use gsline::metrics;
use gsline::pipeline::refine as run_refine;
use gsline::synth::{self, DefectSpec, SceneParams};
use gsline::{Aabb, Error, GaussianCloud, Octree, Point3, Segment};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CloudArgs, ConfigArgs, EvalArgs, InspectArgs, RefineArgs, SweepArgs, SynthArgs};

type F = f64;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_io() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn resolve_config(args: &ConfigArgs, extra: &[(&str, String)]) -> Result<RunConfig<F>> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &args.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.apply(k, v)?;
    }
    if let Some(v) = &args.overlap_semantics {
        cfg.apply("overlap_semantics", v)?;
    }
    if let Some(v) = &args.similarity_branch {
        cfg.apply("similarity_branch", v)?;
    }
    for (k, v) in extra {
        cfg.apply(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_cloud(args: &CloudArgs) -> Result<GaussianCloud<F>> {
    let ply = io::load_ply::<F>(&args.ply)?;
    if ply.skipped_nonfinite > 0 {
        eprintln!("warning: {}: skipped {} non-finite vertices", args.ply.display(), ply.skipped_nonfinite);
    }
    let cloud = ply.cloud;
    let Some(frac) = args.downsample else { return Ok(cloud) };
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Failure::Usage(format!("--downsample must lie in (0, 1], got {frac}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let kept: Vec<Point3<F>> = cloud.points().iter().copied().filter(|_| rng.gen::<f64>() < frac).collect();
    info!("downsampled {} -> {} points", cloud.len(), kept.len());
    Ok(GaussianCloud::new(kept))
}

fn load_segments(path: &Path) -> Result<Vec<Segment<F>>> {
    let f = io::load_segments::<F>(path)?;
    if f.skipped_degenerate > 0 {
        eprintln!("warning: {}: skipped {} zero-length segments", path.display(), f.skipped_degenerate);
    }
    Ok(f.segments)
}

fn out_dir(dir: &Path) -> Result<&Path> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    Ok(dir)
}

fn eval_box(args_reference: &Option<PathBuf>, segments: &[Segment<F>], cfg: &RunConfig<F>) -> Result<Aabb<F>> {
    let reference = match args_reference {
        Some(p) => load_segments(p)?,
        None => segments.to_vec(),
    };
    Ok(cfg.eval.bbox_for(&reference)?)
}

pub fn refine(a: RefineArgs) -> Result<()> {
    let extra: Vec<_> = a.radius.map(|r| ("working_radius", r.to_string())).into_iter().collect();
    let cfg = resolve_config(&a.config, &extra)?;
    let segments = load_segments(&a.segments)?;
    let cloud = load_cloud(&a.cloud)?;
    let dir = out_dir(&a.out.out)?;
    let out = run_refine(&segments, &cloud, &cfg.pipeline)?;
    io::save_segments(&out.segments, dir.join("refined.txt"))?;
    io::save_report(dir.join("refine_report.txt"), &io::refine_report_text(&out.report, &cfg))?;
    io::save_report(dir.join("refine_report.json"), &io::refine_report_json(&out.report, &cfg))?;
    io::save_report(dir.join("config.txt"), &cfg.render())?;
    let r = &out.report;
    println!(
        "refined {} -> {} segments (outliers {}, merges {}, joins {}); wrote {}",
        segments.len(),
        out.segments.len(),
        r.removed_outliers,
        r.merges,
        r.joins,
        dir.join("refined.txt").display()
    );
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let extra: Vec<_> = a.radius.map(|r| ("eval_radius", r.to_string())).into_iter().collect();
    let cfg = resolve_config(&a.config, &extra)?;
    let segments = load_segments(&a.segments)?;
    let cloud = load_cloud(&a.cloud)?;
    let bbox = eval_box(&a.reference, &segments, &cfg)?;
    let dir = out_dir(&a.out.out)?;
    let tree = Octree::build(&cloud, cfg.pipeline.octree_depth, cfg.pipeline.leaf_capacity, bbox)?;
    let rep = metrics::evaluate(&segments, &tree, &cfg.eval)?;
    io::save_report(dir.join(format!("{}_report.txt", a.name)), &io::eval_report_text(&rep, &cfg))?;
    io::save_report(dir.join(format!("{}_report.json", a.name)), &io::eval_report_json(&rep, &cfg))?;
    println!(
        "radius {}  e_rms_cm {}  r_covered_pct {}  r_l {}  score {}",
        rep.radius,
        rep.e_rms_cm,
        rep.r_covered_pct,
        opt(rep.r_l),
        opt(rep.score)
    );
    Ok(())
}

fn opt(v: Option<F>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let extra: Vec<_> = a.radii.iter().map(|r| ("radius_sweep", r.clone())).collect();
    let cfg = resolve_config(&a.config, &extra)?;
    let segments = load_segments(&a.segments)?;
    let cloud = load_cloud(&a.cloud)?;
    let bbox = eval_box(&a.reference, &segments, &cfg)?;
    let dir = out_dir(&a.out.out)?;
    let reports = metrics::radius_sweep(&segments, &cloud, bbox, &cfg.eval)?;
    let mut table = String::from("radius\te_rms_cm\tr_covered_pct\tr_l\tscore\n");
    for (i, rep) in reports.iter().enumerate() {
        let row = format!("{}\t{}\t{}\t{}\t{}\n", rep.radius, rep.e_rms_cm, rep.r_covered_pct, opt(rep.r_l), opt(rep.score));
        table.push_str(&row);
        io::save_report(dir.join(format!("{}_{i}_report.txt", a.name)), &io::eval_report_text(rep, &cfg))?;
        io::save_report(dir.join(format!("{}_{i}_report.json", a.name)), &io::eval_report_json(rep, &cfg))?;
    }
    io::save_report(dir.join(format!("{}_summary.tsv", a.name)), &table)?;
    print!("{table}");
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let edges = match a.scene.as_str() {
        "cube" if a.size > 0.0 => synth::cube_wireframe(a.size),
        "parallel" if a.size > 0.0 && a.edges > 0 => synth::parallel_edges(a.edges, a.size, a.spacing),
        "cube" | "parallel" => return Err(Failure::Usage("--size and --edges must be positive".into())),
        other => return Err(Failure::Usage(format!("unknown scene `{other}` (expected cube|parallel)"))),
    };
    let encoding = match a.ply_encoding.as_str() {
        "ascii" => io::PlyEncoding::Ascii,
        "binary" => io::PlyEncoding::BinaryLittleEndian,
        other => return Err(Failure::Usage(format!("unknown PLY encoding `{other}` (expected ascii|binary)"))),
    };
    let params = SceneParams { points_per_meter: a.points_per_meter, noise_sigma: a.sigma, background_fraction: a.background };
    let scene = synth::generate_scene(&edges, &params, a.seed)?;
    let spec = DefectSpec {
        position_bias: a.bias,
        overextension: a.overextension,
        outliers: a.outliers,
        outlier_length: a.outlier_length,
        outlier_clearance: a.clearance.unwrap_or(5.0 * a.sigma + 0.05),
        duplication: a.duplicates,
        duplicate_jitter: a.jitter,
        discontinuity: a.cuts,
        gap: a.gap,
    };
    // a distinct stream so the defects do not depend on the cloud size
    let defected = synth::inject_defects(&edges, &spec, a.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let dir = out_dir(&a.out.out)?;
    io::save_ply(dir.join("cloud.ply"), scene.cloud.points(), encoding)?;
    io::save_segments(&edges, dir.join("edges.txt"))?;
    io::save_segments(&defected.segments, dir.join("segments.txt"))?;
    io::save_report(dir.join("manifest.txt"), &synth::render_manifest(&defected.manifest))?;
    println!(
        "{} edges, {} points, {} defective segments; wrote {}",
        edges.len(),
        scene.cloud.len(),
        defected.segments.len(),
        dir.display()
    );
    Ok(())
}

fn bbox_line(bb: Option<Aabb<F>>) -> String {
    match bb {
        Some(b) => format!("bbox = [{}, {}, {}] .. [{}, {}, {}]", b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z),
        None => "bbox = none".into(),
    }
}

const HISTOGRAM_BINS: usize = 10;

pub fn inspect(a: InspectArgs) -> Result<()> {
    if let Some(p) = &a.ply {
        let ply = io::load_ply::<F>(p)?;
        println!("points = {}", ply.cloud.len());
        println!("declared_vertices = {}", ply.declared);
        println!("skipped_nonfinite = {}", ply.skipped_nonfinite);
        println!("{}", bbox_line(ply.cloud.bbox()));
    }
    if let Some(p) = &a.segments {
        let f = io::load_segments::<F>(p)?;
        let lens: Vec<F> = f.segments.iter().map(|s| s.length()).collect();
        println!("segments = {}", lens.len());
        println!("skipped_degenerate = {}", f.skipped_degenerate);
        println!("{}", bbox_line(Aabb::from_segments(&f.segments)));
        if lens.is_empty() {
            return Ok(());
        }
        let (lo, hi) = lens.iter().fold((F::INFINITY, F::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        let total: F = lens.iter().sum();
        println!("length.total = {total}");
        println!("length.min = {lo}");
        println!("length.mean = {}", total / lens.len() as F);
        println!("length.max = {hi}");
        let width = (hi - lo) / HISTOGRAM_BINS as F;
        let mut bins = [0usize; HISTOGRAM_BINS];
        for &l in &lens {
            let k = if width > 0.0 { (((l - lo) / width) as usize).min(HISTOGRAM_BINS - 1) } else { 0 };
            bins[k] += 1;
        }
        for (k, n) in bins.iter().enumerate() {
            let from = lo + width * k as F;
            println!("hist [{:.4}, {:.4}) {n}", from, from + width);
        }
    }
    Ok(())
}
