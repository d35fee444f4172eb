use gsline::io::{encode_ply, load_ply, load_segments, parse_ply, save_ply, save_segments, PlyEncoding, RunConfig};
use gsline::{Point3, Segment};
use proptest::prelude::*;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A 3DGS-style vertex layout: position, normal, 48 SH coefficients,
/// opacity, scale and rotation, all float.
fn splat_ply(points: &[[f32; 3]]) -> Vec<u8> {
    let mut names = vec!["x", "y", "z", "nx", "ny", "nz"].into_iter().map(String::from).collect::<Vec<_>>();
    names.extend((0..3).map(|i| format!("f_dc_{i}")));
    names.extend((0..45).map(|i| format!("f_rest_{i}")));
    names.push("opacity".into());
    names.extend((0..3).map(|i| format!("scale_{i}")));
    names.extend((0..4).map(|i| format!("rot_{i}")));
    let mut out = format!("ply\nformat binary_little_endian 1.0\nelement vertex {}\n", points.len()).into_bytes();
    for n in &names {
        out.extend(format!("property float {n}\n").bytes());
    }
    out.extend(b"end_header\n");
    for p in points {
        for (k, _) in names.iter().enumerate() {
            let v = if k < 3 { p[k] } else { 0.25 * k as f32 };
            out.extend(v.to_le_bytes());
        }
    }
    out
}

#[test]
fn splat_layout_reads_positions_only() {
    let pts = [[0.5f32, -1.0, 2.0], [1.0, 1.0, 1.0], [-3.0, 0.0, 0.125]];
    let cloud = parse_ply::<f64>(&splat_ply(&pts)).unwrap().cloud;
    let got: Vec<[f64; 3]> = cloud.points().iter().map(|p| [p.x, p.y, p.z]).collect();
    let want: Vec<[f64; 3]> = pts.iter().map(|p| [p[0] as f64, p[1] as f64, p[2] as f64]).collect();
    assert_eq!(got, want);
    let bb = cloud.bbox().unwrap();
    assert_eq!((bb.min.x, bb.max.x, bb.min.z, bb.max.z), (-3.0, 1.0, 0.125, 2.0));
}

#[test]
fn ply_files_round_trip_in_both_encodings() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<Point3<f64>> = (0..500).map(|_| Point3::new(rng.gen(), rng.gen::<f64>() * 1e3, -rng.gen::<f64>())).collect();
    let dir = tempfile::tempdir().unwrap();
    for enc in [PlyEncoding::Ascii, PlyEncoding::BinaryLittleEndian] {
        let path = dir.path().join("c.ply");
        save_ply(&path, &pts, enc).unwrap();
        let back = load_ply::<f64>(&path).unwrap();
        assert_eq!(back.cloud.points(), &pts[..], "{enc:?}");
        assert_eq!(back.declared, pts.len());
    }
}

#[test]
fn megabyte_of_noise_is_rejected_not_panicked() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut buf = vec![0u8; 1 << 20];
    rng.fill_bytes(&mut buf);
    assert!(parse_ply::<f64>(&buf).is_err());
    let mut with_header = b"ply\nformat binary_little_endian 1.0\nelement vertex 99999999\nproperty float x\nproperty float y\nproperty float z\nend_header\n".to_vec();
    with_header.extend_from_slice(&buf);
    assert!(parse_ply::<f64>(&with_header).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_ply_never_panics(cut in 0usize..2000, flip in 0usize..2000, byte in any::<u8>()) {
        let pts: Vec<Point3<f64>> = (0..40).map(|i| Point3::new(i as f64, 0.5, -1.0)).collect();
        let mut bytes = encode_ply(&pts, PlyEncoding::BinaryLittleEndian);
        if flip < bytes.len() {
            bytes[flip] = byte;
        }
        bytes.truncate(cut.min(bytes.len()));
        let _ = parse_ply::<f32>(&bytes);
    }

    #[test]
    fn segments_round_trip_to_nine_digits(v in prop::collection::vec(-1e4f64..1e4, 6..60)) {
        let segs: Vec<Segment<f64>> = v
            .chunks_exact(6)
            .filter_map(|c| Segment::new(Point3::new(c[0], c[1], c[2]), Point3::new(c[3], c[4], c[5])).ok())
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        save_segments(&segs, &path).unwrap();
        let back = load_segments::<f64>(&path).unwrap().segments;
        prop_assert_eq!(back.len(), segs.len());
        for (a, b) in segs.iter().zip(&back) {
            for (x, y) in [(a.a().x, b.a().x), (a.b().z, b.b().z)] {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}

#[test]
fn config_file_round_trip_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "").unwrap();
    let defaults = RunConfig::<f64>::load(&path).unwrap();
    assert_eq!(defaults, RunConfig::default());
    let mut cfg = defaults.clone();
    cfg.apply("alpha", "0.4").unwrap();
    cfg.apply("eval_radius", "0.07").unwrap();
    cfg.apply("similarity_branch", "paper").unwrap();
    std::fs::write(&path, cfg.render()).unwrap();
    assert_eq!(RunConfig::<f64>::load(&path).unwrap(), cfg);
}
