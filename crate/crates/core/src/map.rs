//! Drivable-region polygons and their rasterization into a binary mask.
//!
//! Drivability is sampled at cell centers only. A point exactly on a polygon
//! edge counts as inside (drivable); the even-odd rule settles everything
//! else, so rasterization is deterministic for any input.

use crate::error::{Error, Result};
use crate::geometry::GridSpec;

type Point = [f64; 2];

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    if orient(a, b, p) != 0.0 {
        return false;
    }
    let dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
    let len2 = (b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]);
    dot >= 0.0 && dot <= len2
}

/// Strict segment crossing (shared endpoints and collinear touches excluded).
fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn on_ring_edge(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    (0..n).any(|i| on_segment(ring[i], ring[(i + 1) % n], p))
}

/// Even-odd crossing test. The half-open vertex rule keeps points passing
/// through vertices from being counted twice; points exactly on an edge are
/// handled by the caller.
fn even_odd_inside(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let t = (p[1] - a[1]) / (b[1] - a[1]);
            let x_cross = a[0] + t * (b[0] - a[0]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn validate_ring(label: &str, ring: &[Point]) -> Result<()> {
    if ring.len() < 3 {
        return Err(Error::Validation(format!(
            "{label}: ring needs at least 3 vertices (got {})",
            ring.len()
        )));
    }
    for (i, v) in ring.iter().enumerate() {
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(Error::Validation(format!(
                "{label}: vertex {i} is not finite ({v:?})"
            )));
        }
    }
    let n = ring.len();
    for i in 0..n {
        if ring[i] == ring[(i + 1) % n] {
            return Err(Error::Validation(format!(
                "{label}: vertices {i} and {} coincide",
                (i + 1) % n
            )));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // skip edges sharing a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                return Err(Error::Validation(format!(
                    "{label}: ring self-intersects between edges {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

/// Drop an explicit closing vertex if the ring repeats its first point.
fn trim_closed(mut ring: Vec<Point>) -> Vec<Point> {
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}

/// A simple polygon with optional hole rings, in world meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    outer: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

impl Polygon {
    /// Rings may be given open or explicitly closed; each must be simple.
    pub fn new(outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self> {
        let outer = trim_closed(outer);
        validate_ring("outer ring", &outer)?;
        let holes: Vec<Vec<Point>> = holes.into_iter().map(trim_closed).collect();
        for (h, ring) in holes.iter().enumerate() {
            validate_ring(&format!("hole ring {h}"), ring)?;
        }
        Ok(Self { outer, holes })
    }

    pub fn outer(&self) -> &[Point] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    /// Point-in-polygon with the edge tie-break: a point on any ring edge
    /// (outer or hole) counts as inside.
    pub fn contains(&self, p: Point) -> bool {
        if on_ring_edge(&self.outer, p) {
            return true;
        }
        if !even_odd_inside(&self.outer, p) {
            return false;
        }
        for hole in &self.holes {
            if on_ring_edge(hole, p) {
                return true;
            }
            if even_odd_inside(hole, p) {
                return false;
            }
        }
        true
    }
}

/// Union of polygons defining the drivable region.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolygonSet {
    polygons: Vec<Polygon>,
}

impl PolygonSet {
    pub fn new(polygons: Vec<Polygon>) -> Self {
        Self { polygons }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    /// True if `p` lies inside (or on the edge of) any member polygon.
    pub fn contains(&self, p: Point) -> bool {
        self.polygons.iter().any(|poly| poly.contains(p))
    }
}

/// Binary drivable-region grid: one bit per cell, `true` = drivable.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivableMask {
    grid: GridSpec,
    bits: Vec<bool>,
}

impl DrivableMask {
    /// Rasterize the polygon union: a cell is drivable iff its center lies
    /// inside the union (holes excluded, edges counting as inside).
    pub fn rasterize(polys: &PolygonSet, grid: &GridSpec) -> Self {
        Self::from_fn(grid, |x, y| polys.contains([x, y]))
    }

    /// Build a mask by sampling a predicate at every cell center.
    pub fn from_fn(grid: &GridSpec, drivable: impl Fn(f64, f64) -> bool) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut bits = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = grid.cell_center(i, j);
                bits[j * nx + i] = drivable(c[0], c[1]);
            }
        }
        Self {
            grid: grid.clone(),
            bits,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.grid.nx() + i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Drivability of the cell containing `p`; `None` when `p` is outside
    /// the grid extents (distinct from non-drivable).
    pub fn is_drivable_point(&self, p: Point) -> Option<bool> {
        self.grid.world_to_cell(p).map(|(i, j)| self.bit(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]], vec![]).unwrap()
    }

    fn grid_10x10() -> GridSpec {
        GridSpec::new(10.0, 10.0, 1.0, 1.0, [-5.0, -5.0]).unwrap()
    }

    #[test]
    fn empty_set_gives_zero_mask() {
        let mask = DrivableMask::rasterize(&PolygonSet::empty(), &grid_10x10());
        assert!(mask.bits().iter().all(|&b| !b));
    }

    #[test]
    fn full_rectangle_gives_one_mask() {
        let polys = PolygonSet::new(vec![rect(-5.0, -5.0, 5.0, 5.0)]);
        let mask = DrivableMask::rasterize(&polys, &grid_10x10());
        assert!(mask.bits().iter().all(|&b| b));
    }

    #[test]
    fn half_plane_covers_left_columns() {
        // Rectangle covering x < 0; oracle is a per-center point test.
        let polys = PolygonSet::new(vec![rect(-5.0, -5.0, 0.0, 5.0)]);
        let grid = grid_10x10();
        let mask = DrivableMask::rasterize(&polys, &grid);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let c = grid.cell_center(i, j);
                assert_eq!(mask.bit(i, j), c[0] < 0.0, "cell ({i}, {j}) at {c:?}");
                assert_eq!(mask.bit(i, j), i < 5);
            }
        }
    }

    #[test]
    fn point_queries() {
        let polys = PolygonSet::new(vec![rect(-5.0, -5.0, 0.0, 5.0)]);
        let mask = DrivableMask::rasterize(&polys, &grid_10x10());
        assert_eq!(mask.is_drivable_point([-2.5, 0.0]), Some(true));
        assert_eq!(mask.is_drivable_point([2.5, 0.0]), Some(false));
        assert_eq!(mask.is_drivable_point([7.5, 0.0]), None);
    }

    #[test]
    fn hole_is_excluded_but_its_edge_counts_inside() {
        let poly = Polygon::new(
            vec![[-4.0, -4.0], [4.0, -4.0], [4.0, 4.0], [-4.0, 4.0]],
            vec![vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]],
        )
        .unwrap();
        assert!(poly.contains([-2.0, 0.0]));
        assert!(!poly.contains([0.0, 0.0]));
        assert!(poly.contains([1.0, 0.0])); // exactly on the hole edge
        assert!(poly.contains([4.0, 0.0])); // exactly on the outer edge
        assert!(!poly.contains([5.0, 0.0]));
    }

    #[test]
    fn center_on_edge_counts_drivable() {
        // Edge along x = 0.5 passes exactly through the centers of column 5.
        let polys = PolygonSet::new(vec![rect(-5.0, -5.0, 0.5, 5.0)]);
        let grid = grid_10x10();
        let mask = DrivableMask::rasterize(&polys, &grid);
        for j in 0..grid.ny() {
            assert!(mask.bit(5, j), "on-edge center must count as drivable");
            assert!(!mask.bit(6, j));
        }
    }

    #[test]
    fn degenerate_rings_are_rejected_with_ring_named() {
        let two = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]], vec![]);
        assert!(matches!(two, Err(Error::Validation(ref m)) if m.contains("outer ring")));

        let bowtie = Polygon::new(
            vec![[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]],
            vec![],
        );
        assert!(matches!(bowtie, Err(Error::Validation(ref m)) if m.contains("self-intersects")));

        let bad_hole = Polygon::new(
            vec![[-4.0, -4.0], [4.0, -4.0], [4.0, 4.0], [-4.0, 4.0]],
            vec![vec![[0.0, 0.0], [1.0, 1.0], [1.0, 1.0]]],
        );
        assert!(matches!(bad_hole, Err(Error::Validation(ref m)) if m.contains("hole ring 0")));
    }

    #[test]
    fn closed_rings_are_accepted() {
        let p = Polygon::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
            vec![],
        )
        .unwrap();
        assert_eq!(p.outer().len(), 4);
    }

    #[test]
    fn rasterization_is_deterministic() {
        let polys = PolygonSet::new(vec![
            rect(-5.0, -5.0, 1.0, 2.0),
            Polygon::new(vec![[0.0, -3.0], [4.0, -1.0], [1.0, 4.0]], vec![]).unwrap(),
        ]);
        let grid = grid_10x10();
        let a = DrivableMask::rasterize(&polys, &grid);
        let b = DrivableMask::rasterize(&polys, &grid);
        assert_eq!(a, b);
    }
}
