//! Incremental Bowyer–Watson Delaunay triangulation in R^d.
//!
//! The convex hull is closed off with "ghost" cells that share a vertex at
//! infinity, so no bounding super-simplex is needed. Predicates are exact;
//! a point on a circumsphere is never in conflict, which makes cospherical
//! ties resolve by insertion (index) order.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::predicates::{insphere, orient};
use super::{Mesh, MeshError};
use crate::geometry::{Point, Simplex};

const GHOST: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Cell {
    vertices: Vec<usize>,
    /// `neighbors[i]` lies across the facet opposite `vertices[i]`.
    neighbors: Vec<usize>,
    alive: bool,
}

impl Cell {
    fn is_ghost(&self) -> bool {
        self.vertices.contains(&GHOST)
    }
}

struct Triangulation<'a> {
    dim: usize,
    points: &'a [Point],
    cells: Vec<Cell>,
    rng: ChaCha8Rng,
}

impl<'a> Triangulation<'a> {
    fn coords(&self, ids: &[usize]) -> Vec<&'a [f64]> {
        ids.iter().map(|&i| self.points[i].coords()).collect()
    }

    fn conflicts(&self, c: usize, p: &[f64]) -> bool {
        let cell = &self.cells[c];
        if !cell.is_ghost() {
            return insphere(&self.coords(&cell.vertices), p) == Ordering::Greater;
        }
        let g = cell.vertices.iter().position(|&v| v == GHOST).unwrap();
        let solid = &self.cells[cell.neighbors[g]];
        let facet: Vec<usize> = cell.vertices.iter().copied().filter(|&v| v != GHOST).collect();
        let opposite = *solid
            .vertices
            .iter()
            .find(|v| !facet.contains(v))
            .expect("solid neighbour has one vertex off the hull facet");
        let mut with_p = self.coords(&facet);
        with_p.push(p);
        let side_p = orient(&with_p);
        if side_p == Ordering::Equal {
            return insphere(&self.coords(&solid.vertices), p) == Ordering::Greater;
        }
        let mut with_o = self.coords(&facet);
        with_o.push(self.points[opposite].coords());
        side_p != orient(&with_o)
    }

    /// Stochastic visibility walk from `start` to a cell in conflict with `p`.
    fn locate(&mut self, start: usize, p: &[f64]) -> usize {
        let d = self.dim;
        let mut c = start;
        let max_steps = 10 * self.cells.len() + 100;
        'walk: for _ in 0..max_steps {
            let cell = &self.cells[c];
            if cell.is_ghost() {
                return c;
            }
            let pts = self.coords(&cell.vertices);
            let here = orient(&pts);
            let offset = self.rng.gen_range(0..=d);
            for t in 0..=d {
                let i = (t + offset) % (d + 1);
                let mut moved = pts.clone();
                moved[i] = p;
                let s = orient(&moved);
                if s != Ordering::Equal && s != here {
                    c = cell.neighbors[i];
                    continue 'walk;
                }
            }
            return c;
        }
        // The walk cannot cycle in a Delaunay triangulation; scan as a
        // last resort.
        (0..self.cells.len())
            .find(|&i| self.cells[i].alive && self.conflicts(i, p))
            .expect("some cell conflicts with a new point")
    }

    fn insert(&mut self, pid: usize, hint: usize) -> usize {
        let p = self.points[pid].coords();
        let start = self.locate(hint, p);
        debug_assert!(self.conflicts(start, p));
        let mut in_cavity: HashMap<usize, bool> = HashMap::new();
        in_cavity.insert(start, true);
        let mut stack = vec![start];
        let mut cavity = Vec::new();
        let mut boundary = Vec::new();
        while let Some(c) = stack.pop() {
            cavity.push(c);
            for i in 0..=self.dim {
                let n = self.cells[c].neighbors[i];
                let inside = match in_cavity.get(&n) {
                    Some(&v) => v,
                    None => {
                        let v = self.conflicts(n, p);
                        in_cavity.insert(n, v);
                        if v {
                            stack.push(n);
                        }
                        v
                    }
                };
                if !inside {
                    boundary.push((c, i));
                }
            }
        }
        let mut ridges: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        let mut last_solid = None;
        for &(c, i) in &boundary {
            let outside = self.cells[c].neighbors[i];
            let mut vertices = self.cells[c].vertices.clone();
            vertices[i] = pid;
            let id = self.cells.len();
            let mut neighbors = vec![usize::MAX; self.dim + 1];
            neighbors[i] = outside;
            let back = self.cells[outside]
                .neighbors
                .iter()
                .position(|&n| n == c)
                .expect("adjacency is symmetric");
            self.cells[outside].neighbors[back] = id;
            for j in 0..=self.dim {
                if j == i {
                    continue;
                }
                let mut key: Vec<usize> = vertices
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != i && t != j)
                    .map(|(_, &v)| v)
                    .collect();
                key.sort_unstable();
                if let Some((other, slot)) = ridges.remove(&key) {
                    neighbors[j] = other;
                    self.cells[other].neighbors[slot] = id;
                } else {
                    ridges.insert(key, (id, j));
                }
            }
            let cell = Cell {
                vertices,
                neighbors,
                alive: true,
            };
            if !cell.is_ghost() {
                last_solid = Some(id);
            }
            self.cells.push(cell);
        }
        debug_assert!(ridges.is_empty(), "cavity boundary is a closed surface");
        for c in cavity {
            self.cells[c].alive = false;
        }
        last_solid.unwrap_or(self.cells.len() - 1)
    }
}

/// Picks `d + 1` affinely independent points greedily in index order.
fn initial_simplex(points: &[Point], dim: usize) -> Result<Vec<usize>, MeshError> {
    let mut chosen = vec![0usize];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let p0 = points[0].coords();
    let scale = points
        .iter()
        .map(|p| crate::geometry::dist(p, p0))
        .fold(0.0, f64::max);
    for (i, p) in points.iter().enumerate().skip(1) {
        // Gram–Schmidt residual of p - p0 against the current span.
        let mut r: Vec<f64> = p.iter().zip(p0).map(|(a, b)| a - b).collect();
        for b in &basis {
            let c = crate::geometry::dot(&r, b);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = crate::geometry::norm(&r);
        if n > 1e-10 * scale {
            r.iter_mut().for_each(|x| *x /= n);
            basis.push(r);
            chosen.push(i);
            if chosen.len() == dim + 1 {
                break;
            }
        }
    }
    if chosen.len() < dim + 1 || orient(&chosen.iter().map(|&i| points[i].coords()).collect::<Vec<_>>()) == Ordering::Equal {
        return Err(MeshError::Flat);
    }
    Ok(chosen)
}

/// Delaunay triangulation of `points` (all points must share a dimension
/// `d`, be pairwise distinct and not lie on a common hyperplane).
///
/// Output simplices are positively oriented. Points are inserted in index
/// order, so the result is deterministic.
pub fn delaunay(points: &[Point]) -> Result<Mesh, MeshError> {
    let dim = points.first().map(Point::dim).ok_or(MeshError::TooFewPoints {
        needed: 1,
        found: 0,
    })?;
    for (index, p) in points.iter().enumerate() {
        if p.dim() != dim {
            return Err(MeshError::PointDimension {
                index,
                expected: dim,
                found: p.dim(),
            });
        }
    }
    if points.len() < dim + 1 {
        return Err(MeshError::TooFewPoints {
            needed: dim + 1,
            found: points.len(),
        });
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .iter()
            .zip(points[b].iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(MeshError::DuplicatePoint {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
            });
        }
    }

    let init = initial_simplex(points, dim)?;
    let mut cells = vec![Cell {
        vertices: init.clone(),
        neighbors: (1..=dim + 1).collect(),
        alive: true,
    }];
    for i in 0..=dim {
        let mut vertices = init.clone();
        vertices[i] = GHOST;
        let neighbors = (0..=dim).map(|j| if j == i { 0 } else { j + 1 }).collect();
        cells.push(Cell {
            vertices,
            neighbors,
            alive: true,
        });
    }
    let mut tri = Triangulation {
        dim,
        points,
        cells,
        rng: ChaCha8Rng::seed_from_u64(0xde1a),
    };
    let mut hint = 0;
    for pid in 0..points.len() {
        if init.contains(&pid) {
            continue;
        }
        hint = tri.insert(pid, hint);
    }

    let simplices = tri
        .cells
        .into_iter()
        .filter(|c| c.alive && !c.is_ghost())
        .map(|c| {
            let mut v = c.vertices;
            let pts: Vec<&[f64]> = v.iter().map(|&i| points[i].coords()).collect();
            if orient(&pts) == Ordering::Less {
                v.swap(0, 1);
            }
            Simplex::new(v)
        })
        .collect();
    Mesh::new(dim, points.to_vec(), simplices)
}

/// Brute-force empty-circumball check: every `(simplex, point)` pair where a
/// non-vertex point lies strictly inside the simplex's circumsphere.
pub fn empty_circumball_violations(mesh: &Mesh) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (k, s) in mesh.simplices().iter().enumerate() {
        let pts = mesh.simplex_points(k);
        for (i, p) in mesh.points().iter().enumerate() {
            if s.vertices().contains(&i) {
                continue;
            }
            if insphere(&pts, p) == Ordering::Greater {
                out.push((k, i));
            }
        }
    }
    out
}
