mod common;

use common::{all_triangulations, area};

fn polygon(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

#[test]
fn convex_polygons_give_catalan_counts() {
    for (n, catalan) in [(3, 1), (4, 2), (5, 5), (6, 14), (7, 42)] {
        assert_eq!(all_triangulations(&polygon(n)).len(), catalan, "n = {n}");
    }
}

#[test]
fn interior_point_triangulations_tile_the_hull() {
    // square with one interior point: the full fan, or either diagonal with
    // the point joined to the corners of the triangle holding it
    let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.4, 0.45]];
    let all = all_triangulations(&pts);
    assert_eq!(all.len(), 3);
    for t in &all {
        assert!(t.len() == 4);
        let total: f64 = t.iter().map(|tri| area(tri.map(|i| pts[i]))).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
