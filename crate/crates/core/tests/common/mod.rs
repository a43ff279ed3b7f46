//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// Every triangulation of a planar point set in general position, found as
/// the maximal sets of pairwise non-crossing segments. Each triangulation
/// is a sorted list of triangles (sorted vertex triples).
pub fn all_triangulations(points: &[[f64; 2]]) -> Vec<Vec<[usize; 3]>> {
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    let m = edges.len();
    let mut crosses = vec![vec![false; m]; m];
    for a in 0..m {
        for b in 0..m {
            crosses[a][b] = proper_crossing(points, edges[a], edges[b]);
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    search(0, &edges, &crosses, &mut chosen, &mut |set: &[usize]| {
        let on = |i: usize, j: usize| {
            let e = (i.min(j), i.max(j));
            set.iter().any(|&k| edges[k] == e)
        };
        let mut tris = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if on(a, b) && on(b, c) && on(a, c) && !(0..n).any(|p| p != a && p != b && p != c && strictly_inside(points, [a, b, c], p)) {
                        tris.push([a, b, c]);
                    }
                }
            }
        }
        out.push(tris);
    });
    out
}

fn search(
    next: usize,
    edges: &[(usize, usize)],
    crosses: &[Vec<bool>],
    chosen: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if next == edges.len() {
        let maximal = (0..edges.len()).all(|e| chosen.contains(&e) || chosen.iter().any(|&c| crosses[e][c]));
        if maximal {
            emit(chosen);
        }
        return;
    }
    if !chosen.iter().any(|&c| crosses[next][c]) {
        chosen.push(next);
        search(next + 1, edges, crosses, chosen, emit);
        chosen.pop();
        // an edge crossing nothing must be in every maximal set
        if !(0..edges.len()).any(|e| crosses[next][e]) {
            return;
        }
    }
    search(next + 1, edges, crosses, chosen, emit);
}

pub fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn proper_crossing(p: &[[f64; 2]], e: (usize, usize), f: (usize, usize)) -> bool {
    if e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1 {
        return false;
    }
    let (a, b, c, d) = (p[e.0], p[e.1], p[f.0], p[f.1]);
    orient(a, b, c) * orient(a, b, d) < 0.0 && orient(c, d, a) * orient(c, d, b) < 0.0
}

fn strictly_inside(p: &[[f64; 2]], t: [usize; 3], q: usize) -> bool {
    let [a, b, c] = t.map(|i| p[i]);
    let s = [orient(a, b, p[q]), orient(b, c, p[q]), orient(c, a, p[q])];
    s.iter().all(|&x| x > 0.0) || s.iter().all(|&x| x < 0.0)
}

pub fn area(t: [[f64; 2]; 3]) -> f64 {
    orient(t[0], t[1], t[2]).abs() / 2.0
}

fn d2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Area times the sum of squared edge lengths.
pub fn rajan_term(t: [[f64; 2]; 3]) -> f64 {
    area(t) * (d2(t[0], t[1]) + d2(t[1], t[2]) + d2(t[0], t[2]))
}

/// Radius of the smallest disk containing a triangle: half the longest
/// edge when the triangle is right or obtuse, the circumradius otherwise.
pub fn min_containment_radius(t: [[f64; 2]; 3]) -> f64 {
    let mut e = [d2(t[1], t[2]), d2(t[0], t[2]), d2(t[0], t[1])];
    e.sort_by(f64::total_cmp);
    if e[2] >= e[0] + e[1] {
        return e[2].sqrt() / 2.0;
    }
    // R = abc / (4 area)
    (e[0] * e[1] * e[2]).sqrt() / (4.0 * area(t))
}
