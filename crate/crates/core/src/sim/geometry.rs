use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Disc centred at the origin; lengths in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub radius: f64,
}

impl Region {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config("radius", "region radius must be positive"));
        }
        Ok(Self { radius })
    }

    pub fn with_area(area: f64) -> Result<Self> {
        Self::new((area / PI).sqrt())
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let r = self.radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        Point::new(r * theta.cos(), r * theta.sin())
    }

    /// Distance from `p` to the boundary; negative outside.
    pub fn clearance(&self, p: Point) -> f64 {
        self.radius - p.norm()
    }
}

/// Homogeneous PPP of `intensity` points per km² on `region`.
pub fn sample_ppp<R: Rng + ?Sized>(intensity: f64, region: &Region, rng: &mut R) -> Vec<Point> {
    let mean = intensity * region.area();
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    (0..count).map(|_| region.sample_uniform(rng)).collect()
}

/// Nearest eNB for each device by exhaustive scan; ties go to the lowest index.
pub fn associate_nearest(devices: &[Point], enbs: &[Point]) -> Result<Vec<usize>> {
    if enbs.is_empty() {
        return Err(Error::domain("association needs at least one eNB"));
    }
    Ok(devices
        .iter()
        .map(|&d| {
            let mut best = 0;
            let mut best_d2 = d.dist2(enbs[0]);
            for (i, &e) in enbs.iter().enumerate().skip(1) {
                let d2 = d.dist2(e);
                if d2 < best_d2 {
                    best = i;
                    best_d2 = d2;
                }
            }
            best
        })
        .collect())
}

/// Uniform bucket grid over eNB positions for nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct EnbIndex {
    origin: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
    points: Vec<Point>,
}

impl EnbIndex {
    pub fn new(enbs: &[Point]) -> Result<Self> {
        if enbs.is_empty() {
            return Err(Error::domain("association needs at least one eNB"));
        }
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in enbs {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        let width = (max_x - min_x).max(1e-9);
        let height = (max_y - min_y).max(1e-9);
        // About two eNBs per bucket.
        let cell = (width * height * 2.0 / enbs.len() as f64).sqrt().max(1e-9);
        let cols = ((width / cell).floor() as usize + 1).min(4096);
        let rows = ((height / cell).floor() as usize + 1).min(4096);
        let cell = (width / cols as f64).max(height / rows as f64).max(1e-9) * (1.0 + 1e-12);
        let mut buckets = vec![Vec::new(); cols * rows];
        let origin = Point::new(min_x, min_y);
        let mut index = Self {
            origin,
            cell,
            cols,
            rows,
            buckets: Vec::new(),
            points: enbs.to_vec(),
        };
        for (i, &p) in enbs.iter().enumerate() {
            let (cx, cy) = index.cell_of(p);
            buckets[cy * cols + cx].push(i);
        }
        index.buckets = buckets;
        Ok(index)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor();
        let cy = ((p.y - self.origin.y) / self.cell).floor();
        (
            cx.clamp(0.0, (self.cols - 1) as f64) as usize,
            cy.clamp(0.0, (self.rows - 1) as f64) as usize,
        )
    }

    /// Index of the nearest eNB; ties go to the lowest index.
    pub fn nearest(&self, p: Point) -> usize {
        let (cx, cy) = self.cell_of(p);
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.cols.max(self.rows);
        for ring in 0..=max_ring {
            if let Some((d2, _)) = best {
                // Every unvisited bucket lies at least (ring - 1) cells away
                // from the query point's bucket boundary.
                let reach = (ring as f64 - 1.0) * self.cell;
                if reach > 0.0 && reach * reach > d2 {
                    break;
                }
            }
            self.visit_ring(cx, cy, ring, |i| {
                let d2 = p.dist2(self.points[i]);
                match best {
                    Some((bd, bi)) if d2 > bd || (d2 == bd && i > bi) => {}
                    _ => best = Some((d2, i)),
                }
            });
        }
        best.expect("index holds at least one eNB").1
    }

    fn visit_ring(&self, cx: usize, cy: usize, ring: usize, mut f: impl FnMut(usize)) {
        let (cx, cy, r) = (cx as isize, cy as isize, ring as isize);
        for y in (cy - r)..=(cy + r) {
            if y < 0 || y >= self.rows as isize {
                continue;
            }
            let on_edge_row = y == cy - r || y == cy + r;
            let step = if on_edge_row || r == 0 { 1 } else { 2 * r };
            let mut x = cx - r;
            while x <= cx + r {
                if x >= 0 && x < self.cols as isize {
                    for &i in &self.buckets[y as usize * self.cols + x as usize] {
                        f(i);
                    }
                }
                x += step.max(1);
            }
        }
    }

    pub fn associate(&self, devices: &[Point]) -> Vec<usize> {
        devices.iter().map(|&d| self.nearest(d)).collect()
    }
}
