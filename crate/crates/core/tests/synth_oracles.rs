use gsline::pipeline::segment_stats;
use gsline::synth::{cube_wireframe, generate_scene, SceneParams};
use gsline::{Aabb, Octree};

/// RMS radial distance of 2D isotropic Gaussian noise truncated at radius c:
/// E[rho^2 | rho <= c] = 2 s^2 - c^2 e^(-c^2/2s^2) / (1 - e^(-c^2/2s^2)).
fn truncated_rayleigh_rms(sigma: f64, c: f64) -> f64 {
    let q = (-c * c / (2.0 * sigma * sigma)).exp();
    (2.0 * sigma * sigma - c * c * q / (1.0 - q)).sqrt()
}

#[test]
fn per_edge_rms_matches_projected_noise() {
    let sigma = 0.005;
    let radius = 0.02;
    let expected = truncated_rayleigh_rms(sigma, radius);
    assert!((expected / sigma - 2f64.sqrt()).abs() < 0.01);
    let edges = cube_wireframe(1.0f64);
    let params = SceneParams { points_per_meter: 500.0, noise_sigma: sigma, background_fraction: 0.0 };
    for seed in 0..5 {
        let cloud = generate_scene(&edges, &params, seed).unwrap().cloud;
        let bb = Aabb::from_segments(&edges).unwrap().padded(0.1);
        let tree = Octree::with_defaults(&cloud, bb).unwrap();
        for e in &edges {
            let got = segment_stats(e, &tree, radius).e_rms;
            assert!((got / expected - 1.0).abs() < 0.15, "seed {seed}: {got} vs {expected}");
        }
    }
}

#[test]
fn every_edge_gets_points() {
    let edges = gsline::synth::parallel_edges(3, 0.004f64, 0.5);
    let params = SceneParams { points_per_meter: 250.0, noise_sigma: 0.0, background_fraction: 0.0 };
    let sc = generate_scene(&edges, &params, 0).unwrap();
    assert_eq!(sc.cloud.len(), 3);
}
