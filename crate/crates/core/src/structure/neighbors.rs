use crate::geometry::Vec2;

/// Uniform binning grid for fixed-radius neighbour queries in the plane.
///
/// With bin pitch equal to the query radius, every neighbour of a point lies in
/// the 3x3 block of bins around it, so building and querying are O(N) overall.
#[derive(Debug, Clone)]
pub struct CellList {
    origin: Vec2,
    pitch: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    entries: Vec<usize>,
    points: Vec<Vec2>,
}

impl CellList {
    pub fn new(points: &[Vec2], pitch: f64) -> Self {
        assert!(pitch > 0.0 && pitch.is_finite(), "bin pitch must be positive");
        let (mut lo, mut hi) = (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if points.is_empty() {
            lo = Vec2::ZERO;
            hi = Vec2::ZERO;
        }
        let nx = ((hi.x - lo.x) / pitch).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / pitch).floor() as usize + 1;
        let mut grid = CellList {
            origin: lo,
            pitch,
            nx,
            ny,
            starts: vec![0; nx * ny + 1],
            entries: vec![0; points.len()],
            points: points.to_vec(),
        };
        // Counting sort into bins.
        let bins: Vec<usize> = points.iter().map(|&p| grid.bin_of(p).unwrap()).collect();
        for &b in &bins {
            grid.starts[b + 1] += 1;
        }
        for b in 0..nx * ny {
            grid.starts[b + 1] += grid.starts[b];
        }
        let mut fill = grid.starts.clone();
        for (i, &b) in bins.iter().enumerate() {
            grid.entries[fill[b]] = i;
            fill[b] += 1;
        }
        grid
    }

    fn coords(&self, p: Vec2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.pitch).floor() as i64,
            ((p.y - self.origin.y) / self.pitch).floor() as i64,
        )
    }

    fn bin_of(&self, p: Vec2) -> Option<usize> {
        let (ix, iy) = self.coords(p);
        if ix < 0 || iy < 0 || ix as usize >= self.nx || iy as usize >= self.ny {
            None
        } else {
            Some(iy as usize * self.nx + ix as usize)
        }
    }

    /// Indices of all stored points within `radius` (≤ pitch) of `p`, ascending.
    pub fn within(&self, p: Vec2, radius: f64) -> Vec<usize> {
        debug_assert!(radius <= self.pitch * (1.0 + 1e-12));
        let (cx, cy) = self.coords(p);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for iy in cy - 1..=cy + 1 {
            if iy < 0 || iy as usize >= self.ny {
                continue;
            }
            for ix in cx - 1..=cx + 1 {
                if ix < 0 || ix as usize >= self.nx {
                    continue;
                }
                let b = iy as usize * self.nx + ix as usize;
                for &i in &self.entries[self.starts[b]..self.starts[b + 1]] {
                    if (self.points[i] - p).norm_sq() <= r2 {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec2> = (0..400)
            .map(|_| Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(0.0..3.0)))
            .collect();
        let r = 0.7;
        let grid = CellList::new(&pts, r);
        for q in pts.iter().take(50) {
            let brute: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - *q).norm() <= r).collect();
            assert_eq!(grid.within(*q, r), brute);
        }
    }

    #[test]
    fn query_outside_bounding_box() {
        let grid = CellList::new(&[Vec2::ZERO, Vec2::new(1.0, 0.0)], 1.0);
        assert_eq!(grid.within(Vec2::new(-0.9, 0.0), 1.0), vec![0]);
        assert!(grid.within(Vec2::new(10.0, 10.0), 1.0).is_empty());
    }
}
