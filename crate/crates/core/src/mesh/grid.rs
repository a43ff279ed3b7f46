//! Uniform bucket grid for nearest-point queries at desk scale.

use std::collections::HashMap;

use crate::geometry::{dist, Point};

pub(crate) struct PointGrid<'a> {
    points: &'a [Point],
    origin: Vec<f64>,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    /// Largest ring index that can contain any point.
    max_ring: i64,
}

impl<'a> PointGrid<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let d = points[0].dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for m in 0..d {
                lo[m] = lo[m].min(p[m]);
                hi[m] = hi[m].max(p[m]);
            }
        }
        let extent: f64 = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
            .max(1e-300);
        // About two points per cell on average.
        let per_axis = ((points.len() as f64 / 2.0).powf(1.0 / d as f64)).max(1.0);
        let cell = extent / per_axis;
        let mut grid = Self {
            points,
            origin: lo,
            cell,
            buckets: HashMap::new(),
            max_ring: per_axis.ceil() as i64 + 1,
        };
        for (i, p) in points.iter().enumerate() {
            let key = grid.key(p);
            grid.buckets.entry(key).or_default().push(i);
        }
        grid
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .zip(&self.origin)
            .map(|(c, o)| ((c - o) / self.cell).floor() as i64)
            .collect()
    }

    /// Visits every cell at Chebyshev distance exactly `ring` from `center`.
    fn ring_cells(center: &[i64], ring: i64, visit: &mut impl FnMut(&[i64])) {
        let d = center.len();
        let mut offset = vec![-ring; d];
        loop {
            if offset.iter().any(|o| o.abs() == ring) {
                let cell: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
                visit(&cell);
            }
            let mut m = 0;
            loop {
                if m == d {
                    return;
                }
                offset[m] += 1;
                if offset[m] <= ring {
                    break;
                }
                offset[m] = -ring;
                m += 1;
            }
        }
    }

    /// Distance from `x` to the nearest point whose index is not excluded.
    pub fn nearest_excluding(&self, x: &[f64], exclude: &[usize]) -> Option<(usize, f64)> {
        let center = self.key(x);
        // Rings around a cell outside the grid must reach back into it.
        let outside: i64 = center
            .iter()
            .map(|&c| if c < 0 { -c } else { (c - self.max_ring).max(0) })
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        let mut ring = 0;
        loop {
            Self::ring_cells(&center, ring, &mut |cell| {
                if let Some(ids) = self.buckets.get(cell) {
                    for &i in ids {
                        if exclude.contains(&i) {
                            continue;
                        }
                        let dd = dist(&self.points[i], x);
                        if best.is_none_or(|(_, b)| dd < b) {
                            best = Some((i, dd));
                        }
                    }
                }
            });
            // Unvisited points lie at least `ring * cell` away.
            if let Some((_, b)) = best {
                if b <= ring as f64 * self.cell {
                    return best;
                }
            }
            if ring > self.max_ring + outside + 1 {
                return best;
            }
            ring += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nearest_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=4 {
            let pts: Vec<Point> = (0..150)
                .map(|_| Point::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
                .collect();
            let grid = PointGrid::new(&pts);
            for _ in 0..50 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let exclude = [rng.gen_range(0..150), rng.gen_range(0..150)];
                let (_, got) = grid.nearest_excluding(&x, &exclude).unwrap();
                let want = pts
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !exclude.contains(i))
                    .map(|(_, p)| dist(p, &x))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(got, want);
            }
        }
    }
}
