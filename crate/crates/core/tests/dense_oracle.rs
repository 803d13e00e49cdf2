mod common;

use biot3f_core::assembly::{BlockSystem, PhysicalParams};
use biot3f_core::mesh::BoundaryLayout;
use biot3f_core::solver::{assemble_step_matrix, Discretization, ElementPair};

fn max_deviation(pair: ElementPair, n: usize) -> (f64, f64) {
    let params = PhysicalParams::new(1.3, 2.5, 0.7).unwrap();
    let tau = 0.5;
    let disc = Discretization::<f64>::new(n, BoundaryLayout::AllDirichlet, pair).unwrap();
    let blocks = BlockSystem::assemble(&disc.space_u, &disc.space_q, &disc.space_p, &params).unwrap();
    let sparse = assemble_step_matrix(&blocks, &params, tau).unwrap().to_dense();
    let dense = common::dense_step_matrix(&disc, &params, tau);
    let mut dev: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, row) in dense.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            dev = dev.max((sparse[(i, j)] - v).abs());
            scale = scale.max(v.abs());
        }
    }
    (dev, scale)
}

#[test]
fn two_triangle_step_matrix_matches_dense_reference() {
    for pair in ElementPair::ALL {
        let (dev, scale) = max_deviation(pair, 1);
        assert!(scale > 0.1);
        assert!(dev <= 1e-12, "{pair}: {dev:e}");
    }
}

#[test]
fn small_mesh_step_matrix_matches_dense_reference() {
    for pair in ElementPair::ALL {
        let (dev, _) = max_deviation(pair, 3);
        assert!(dev <= 1e-12, "{pair}: {dev:e}");
    }
}
