use shapefit_core::synth::grid_around;
use shapefit_core::{make_templates, point_in_mesh, topology_report, voxelize, GridSpec, SynthConfig, TriMesh, Vec3};

/// Closed synthetic meshes of varied size and position.
fn meshes(count: usize) -> Vec<TriMesh> {
    let mut out = Vec::new();
    let mut seed = 100;
    while out.len() < count {
        let cfg = SynthConfig {
            semi_axes: [6.0 + (seed % 5) as f64, 5.0 + (seed % 3) as f64, 4.0 + (seed % 4) as f64],
            subdivisions: 2,
            template_count: 5,
            amplitude: 1.0,
            seed,
            ..Default::default()
        };
        let shift = Vec3::new(0.37 * (seed % 7) as f64, -0.21 * (seed % 5) as f64, 0.13 * (seed % 3) as f64);
        out.extend(make_templates(&cfg).unwrap().into_iter().map(|m| m.translated(shift)));
        seed += 1;
    }
    out.truncate(count);
    out
}

#[test]
fn voxelize_agrees_with_winding_number() {
    for (n, mesh) in meshes(25).iter().enumerate() {
        assert!(topology_report(mesh).is_closed);
        let (lo, hi) = mesh.bounding_box().unwrap();
        let center = (lo + hi) * 0.5;
        let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max) * 1.2;
        let spacing = extent / 32.0;
        let origin = [0, 1, 2].map(|a| center[a] - 15.5 * spacing);
        let grid = GridSpec::new([32; 3], [spacing; 3], origin).unwrap();
        let mask = voxelize(mesh, &grid).unwrap();
        let mut disagree = 0;
        for k in 0..32 {
            for j in 0..32 {
                for i in 0..32 {
                    if mask.get(i, j, k) != point_in_mesh(mesh, grid.center(i, j, k)) {
                        disagree += 1;
                    }
                }
            }
        }
        assert_eq!(disagree, 0, "mesh {n}");
        assert!(mask.count() > 0);
    }
}

#[test]
fn voxel_volume_tracks_enclosed_volume() {
    for mesh in meshes(5) {
        let grid = grid_around(&mesh, 0.5, 1.0).unwrap();
        let mask = voxelize(&mesh, &grid).unwrap();
        let rel = (mask.foreground_volume() - mesh.enclosed_volume()).abs() / mesh.enclosed_volume();
        assert!(rel < 0.05, "relative volume error {rel}");
    }
}
