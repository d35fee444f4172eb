use gsline::geom::point_segment_distance;
use gsline::metrics::evaluate;
use gsline::pipeline::refine;
use gsline::synth::{cube_wireframe, generate_scene, inject_defects, parallel_edges, DefectSpec, SceneParams};
use gsline::{EvalConfig, Octree, PipelineConfig, Segment};

fn max_endpoint_error(s: &Segment<f64>, edges: &[Segment<f64>]) -> f64 {
    edges
        .iter()
        .map(|e| point_segment_distance(&s.a(), e).max(point_segment_distance(&s.b(), e)))
        .fold(f64::INFINITY, f64::min)
}

fn scene(edges: &[Segment<f64>], seed: u64) -> gsline::GaussianCloud<f64> {
    generate_scene(edges, &SceneParams::default(), seed).unwrap().cloud
}

#[test]
fn position_bias_is_removed() {
    let edges = parallel_edges(4, 1.0, 0.5);
    for seed in 0..5 {
        let d = inject_defects(&edges, &DefectSpec { position_bias: 0.02, ..Default::default() }, seed).unwrap();
        let out = refine(&d.segments, &scene(&edges, seed), &PipelineConfig::default()).unwrap();
        assert_eq!(out.segments.len(), 4);
        for s in &out.segments {
            // residual is the noise mean (~0.3 mm) plus the crop quantization
            let lateral = edges
                .iter()
                .map(|e| gsline::geom::point_line_distance(&s.midpoint(), e))
                .fold(f64::INFINITY, f64::min);
            assert!(lateral < 0.002, "{lateral}");
        }
    }
}

#[test]
fn overextension_is_cropped_on_separated_edges() {
    let edges = parallel_edges(4, 1.0, 0.5);
    for seed in 0..5 {
        let d = inject_defects(&edges, &DefectSpec { overextension: 0.4, ..Default::default() }, seed).unwrap();
        let out = refine(&d.segments, &scene(&edges, seed), &PipelineConfig::default()).unwrap();
        assert_eq!(out.segments.len(), 4);
        for s in &out.segments {
            assert!((s.length() - 1.0).abs() < 0.02, "{}", s.length());
            assert!(max_endpoint_error(s, &edges) < 0.02);
        }
    }
}

#[test]
fn all_defects_on_the_cube_recover_twelve_edges() {
    let edges = cube_wireframe(1.0);
    let spec = DefectSpec {
        position_bias: 0.02,
        overextension: 0.3,
        outliers: 5,
        outlier_clearance: 0.075,
        duplication: 2,
        duplicate_jitter: 0.002,
        discontinuity: 1,
        gap: 0.05,
        ..Default::default()
    };
    for seed in 0..3 {
        let cloud = scene(&edges, seed);
        let d = inject_defects(&edges, &spec, seed).unwrap();
        let out = refine(&d.segments, &cloud, &PipelineConfig::default()).unwrap();
        assert_eq!(out.segments.len(), 12, "seed {seed}");
        let ecfg = EvalConfig::default();
        let tree = Octree::with_defaults(&cloud, ecfg.bbox_for(&edges).unwrap()).unwrap();
        let before = evaluate(&d.segments, &tree, &ecfg).unwrap();
        let after = evaluate(&out.segments, &tree, &ecfg).unwrap();
        assert!(after.score.unwrap() > before.score.unwrap());
        assert!(after.e_rms_cm < before.e_rms_cm);
        assert!(after.r_l.unwrap() < before.r_l.unwrap());
    }
}

#[test]
fn single_precision_pipeline_agrees_with_double() {
    let edges = parallel_edges(3, 1.0f64, 0.5);
    let spec = DefectSpec { position_bias: 0.02, duplication: 1, duplicate_jitter: 0.001, ..Default::default() };
    let d = inject_defects(&edges, &spec, 1).unwrap();
    let cloud = scene(&edges, 1);
    let out64 = refine(&d.segments, &cloud, &PipelineConfig::default()).unwrap();

    let segs32: Vec<Segment<f32>> = d.segments.iter().map(|s| s.cast()).collect();
    let cloud32 = gsline::GaussianCloud::new(cloud.points().iter().map(|p| p.cast()).collect());
    let out32 = refine(&segs32, &cloud32, &PipelineConfig::default()).unwrap();
    assert_eq!(out32.segments.len(), out64.segments.len());
    for (a, b) in out32.segments.iter().zip(&out64.segments) {
        assert!((a.midpoint().cast::<f64>() - b.midpoint()).norm() < 1e-3);
    }
}
