//! Planar workspace: bounds, convex polygon obstacles, occupancy grid and
//! geodesic distance fields.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::GeometryError;
use crate::linalg::{Mat2, Vec2};

/// Convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

impl Polygon {
    /// Accepts either orientation; rejects fewer than three vertices and
    /// non-convex input.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Polygon("needs at least 3 vertices".into()));
        }
        let n = vertices.len();
        let area: f64 = (0..n).map(|i| cross(vertices[i], vertices[(i + 1) % n])).sum();
        if area.abs() < 1e-12 {
            return Err(GeometryError::Polygon("degenerate polygon".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if cross(b - a, c - b) < -1e-12 {
                return Err(GeometryError::Polygon("polygon is not convex".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn rectangle(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        Self::new(vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closed containment: boundary points count as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        self.edges().all(|(a, b)| cross(b - a, p - a) >= 0.0)
    }

    /// Closed segment/polygon intersection test (Cyrus-Beck clipping).
    pub fn intersects_segment(&self, a: Vec2, b: Vec2) -> bool {
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (u, v) in self.edges() {
            let e = v - u;
            // inside means cross(e, p - u) >= 0
            let num = cross(e, a - u);
            let den = cross(e, d);
            if den.abs() < 1e-15 {
                if num < 0.0 {
                    return false;
                }
                continue;
            }
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

pub type Cell = (usize, usize);

#[derive(Clone, Debug)]
pub struct Workspace {
    min: Vec2,
    max: Vec2,
    obstacles: Vec<Polygon>,
    resolution: f64,
    nx: usize,
    ny: usize,
    blocked: Vec<bool>,
    // bit k set when the move to NEIGHBOURS[k] is collision free
    moves: Vec<u8>,
}

const NEIGHBOURS: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

pub const DEFAULT_RESOLUTION: f64 = 0.25;

impl Workspace {
    pub fn new(min: Vec2, max: Vec2, obstacles: Vec<Polygon>, resolution: f64) -> Result<Self, GeometryError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(GeometryError::Resolution(resolution));
        }
        if !(max.x > min.x && max.y > min.y) {
            return Err(GeometryError::Bounds);
        }
        for (i, o) in obstacles.iter().enumerate() {
            let inside = o.vertices().iter().all(|v| v.x >= min.x && v.x <= max.x && v.y >= min.y && v.y <= max.y);
            if !inside {
                return Err(GeometryError::ObstacleOutOfBounds(i));
            }
        }
        let nx = ((max.x - min.x) / resolution).ceil().max(1.0) as usize;
        let ny = ((max.y - min.y) / resolution).ceil().max(1.0) as usize;
        let mut ws = Self { min, max, obstacles, resolution, nx, ny, blocked: Vec::new(), moves: Vec::new() };
        ws.blocked = (0..nx * ny).map(|k| !ws.is_free(ws.cell_center((k % nx, k / nx)))).collect();
        ws.moves = (0..nx * ny)
            .map(|k| {
                let c = (k % nx, k / nx);
                let mut mask = 0u8;
                if ws.blocked[k] {
                    return 0;
                }
                for (bit, &(dx, dy)) in NEIGHBOURS.iter().enumerate() {
                    if let Some(n) = ws.offset(c, dx, dy) {
                        if !ws.blocked[ws.index(n)] && ws.segment_free(ws.cell_center(c), ws.cell_center(n)) {
                            mask |= 1 << bit;
                        }
                    }
                }
                mask
            })
            .collect();
        Ok(ws)
    }

    pub fn min(&self) -> Vec2 {
        self.min
    }

    pub fn max(&self) -> Vec2 {
        self.max
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn grid_size(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Strictly inside the bounds and outside every (closed) obstacle.
    pub fn is_free(&self, p: Vec2) -> bool {
        p.x > self.min.x
            && p.x < self.max.x
            && p.y > self.min.y
            && p.y < self.max.y
            && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn segment_free(&self, a: Vec2, b: Vec2) -> bool {
        self.is_free(a) && self.is_free(b) && self.line_of_sight(a, b)
    }

    /// Segment misses every obstacle; bounds are not checked.
    pub fn line_of_sight(&self, a: Vec2, b: Vec2) -> bool {
        !self.obstacles.iter().any(|o| o.intersects_segment(a, b))
    }

    pub fn index(&self, c: Cell) -> usize {
        c.1 * self.nx + c.0
    }

    pub fn cell_of(&self, p: Vec2) -> Option<Cell> {
        if p.x < self.min.x || p.x > self.max.x || p.y < self.min.y || p.y > self.max.y {
            return None;
        }
        let i = (((p.x - self.min.x) / self.resolution) as usize).min(self.nx - 1);
        let j = (((p.y - self.min.y) / self.resolution) as usize).min(self.ny - 1);
        Some((i, j))
    }

    pub fn cell_center(&self, c: Cell) -> Vec2 {
        self.min + Vec2::new((c.0 as f64 + 0.5) * self.resolution, (c.1 as f64 + 0.5) * self.resolution)
    }

    pub fn cell_blocked(&self, c: Cell) -> bool {
        self.blocked[self.index(c)]
    }

    fn offset(&self, c: Cell, dx: isize, dy: isize) -> Option<Cell> {
        let i = c.0 as isize + dx;
        let j = c.1 as isize + dy;
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny).then_some((i as usize, j as usize))
    }

    /// Cells whose centres lie in the `epsilon` confidence ellipse of
    /// `N(mean, cov)`. The cell holding the mean is always included; a
    /// singular covariance yields that cell alone.
    pub fn confidence_ellipse_cells(&self, mean: Vec2, cov: &Mat2, epsilon: f64) -> Vec<Cell> {
        let mut out = Vec::new();
        let mean_cell = self.cell_of(self.clamp(mean));
        let chi2 = -2.0 * (1.0 - epsilon.clamp(0.0, 1.0 - 1e-15)).ln();
        let inv = if cov.determinant() > 1e-18 { cov.try_inverse() } else { None };
        if let (Some(inv), true) = (inv, chi2 > 0.0) {
            let hx = (chi2 * cov[(0, 0)]).sqrt();
            let hy = (chi2 * cov[(1, 1)]).sqrt();
            for c in self.cells_in_box(mean - Vec2::new(hx, hy), mean + Vec2::new(hx, hy)) {
                let d = self.cell_center(c) - mean;
                if (d.transpose() * inv * d)[(0, 0)] <= chi2 {
                    out.push(c);
                }
            }
        }
        if let Some(mc) = mean_cell {
            if !out.contains(&mc) {
                out.push(mc);
            }
        }
        out.sort_unstable();
        out
    }

    /// All cells whose centres are within `radius` of some cell in `cells`.
    pub fn dilate(&self, cells: &[Cell], radius: f64) -> Vec<Cell> {
        if radius <= 0.0 {
            return cells.to_vec();
        }
        let k = (radius / self.resolution).floor() as isize;
        let r2 = (radius / self.resolution).powi(2);
        let mut mark = vec![false; self.nx * self.ny];
        for &c in cells {
            for dy in -k..=k {
                for dx in -k..=k {
                    if (dx * dx + dy * dy) as f64 <= r2 {
                        if let Some(n) = self.offset(c, dx, dy) {
                            mark[self.index(n)] = true;
                        }
                    }
                }
            }
        }
        (0..mark.len()).filter(|&i| mark[i]).map(|i| (i % self.nx, i / self.nx)).collect()
    }

    fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }

    fn cells_in_box(&self, lo: Vec2, hi: Vec2) -> impl Iterator<Item = Cell> {
        let lo = self.cell_of(self.clamp(lo)).unwrap_or((0, 0));
        let hi = self.cell_of(self.clamp(hi)).unwrap_or((0, 0));
        (lo.1..=hi.1).flat_map(move |j| (lo.0..=hi.0).map(move |i| (i, j)))
    }

    /// Dijkstra distances from the goal cell over the 8-connected free grid
    /// with `virtual_obstacles` removed.
    pub fn build_geodesic_field(&self, goal: Vec2, virtual_obstacles: &[Cell]) -> Result<GeodesicField, GeometryError> {
        let gc = self.cell_of(goal).ok_or(GeometryError::GoalBlocked)?;
        let mut blocked = self.blocked.clone();
        for &c in virtual_obstacles {
            if c.0 < self.nx && c.1 < self.ny {
                blocked[self.index(c)] = true;
            }
        }
        if blocked[self.index(gc)] {
            return Err(GeometryError::GoalBlocked);
        }
        let mut dist = vec![f64::INFINITY; self.nx * self.ny];
        let mut heap = BinaryHeap::new();
        dist[self.index(gc)] = 0.0;
        heap.push(HeapItem(0.0, self.index(gc)));
        let diag = std::f64::consts::SQRT_2 * self.resolution;
        while let Some(HeapItem(d, k)) = heap.pop() {
            if d > dist[k] {
                continue;
            }
            let c = (k % self.nx, k / self.nx);
            for (bit, &(dx, dy)) in NEIGHBOURS.iter().enumerate() {
                if self.moves[k] & (1 << bit) == 0 {
                    continue;
                }
                let n = self.offset(c, dx, dy).expect("move mask only set for in-grid neighbours");
                let nk = self.index(n);
                if blocked[nk] {
                    continue;
                }
                let nd = d + if dx != 0 && dy != 0 { diag } else { self.resolution };
                if nd < dist[nk] {
                    dist[nk] = nd;
                    heap.push(HeapItem(nd, nk));
                }
            }
        }
        Ok(GeodesicField { nx: self.nx, ny: self.ny, min: self.min, resolution: self.resolution, goal: gc, dist })
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicField {
    nx: usize,
    ny: usize,
    min: Vec2,
    resolution: f64,
    goal: Cell,
    dist: Vec<f64>,
}

impl GeodesicField {
    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn cell_distance(&self, c: Cell) -> f64 {
        if c.0 >= self.nx || c.1 >= self.ny {
            return f64::INFINITY;
        }
        self.dist[c.1 * self.nx + c.0]
    }

    /// Distance from an arbitrary point: best of the surrounding 3x3 cells,
    /// each charged the straight-line hop to its centre.
    pub fn distance_at(&self, p: Vec2) -> f64 {
        let fi = ((p.x - self.min.x) / self.resolution).floor();
        let fj = ((p.y - self.min.y) / self.resolution).floor();
        if !fi.is_finite() || !fj.is_finite() {
            return f64::INFINITY;
        }
        let (ci, cj) = (fi as isize, fj as isize);
        let mut best = f64::INFINITY;
        for dj in -1..=1 {
            for di in -1..=1 {
                let (i, j) = (ci + di, cj + dj);
                if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
                    continue;
                }
                let d = self.dist[j as usize * self.nx + i as usize];
                if d.is_finite() {
                    let centre = self.min + Vec2::new((i as f64 + 0.5) * self.resolution, (j as f64 + 0.5) * self.resolution);
                    best = best.min(d + (p - centre).norm());
                }
            }
        }
        best
    }
}

/// χ²₂ quantile for confidence `p`.
pub fn chi2_2_quantile(p: f64) -> f64 {
    -2.0 * (1.0 - p).ln()
}
