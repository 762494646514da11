use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
    /// Row of the originating corpus.
    pub source_index: usize,
}

impl Point2D {
    pub fn new(x: f64, y: f64, source_index: usize) -> Self {
        Self { x, y, source_index }
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex polygon with counter-clockwise vertices and no collinear
/// vertices. An empty vertex list stands for a degenerate hull.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let twice: f64 = (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        0.5 * twice
    }

    /// Inclusive point test with an absolute tolerance on the edge
    /// cross products.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= -tol)
    }

    fn project(&self, axis: [f64; 2]) -> (f64, f64) {
        self.vertices
            .iter()
            .map(|v| v[0] * axis[0] + v[1] * axis[1])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p), hi.max(p))
            })
    }

    /// Separating-axis test. Touching polygons count as overlapping.
    pub fn overlaps(&self, other: &Polygon) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        for poly in [self, other] {
            let n = poly.vertices.len();
            for i in 0..n {
                let (a, b) = (poly.vertices[i], poly.vertices[(i + 1) % n]);
                let axis = [a[1] - b[1], b[0] - a[0]];
                let (lo1, hi1) = self.project(axis);
                let (lo2, hi2) = other.project(axis);
                if hi1 < lo2 || hi2 < lo1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Monotone-chain convex hull of raw coordinates.
pub fn hull_of(points: &[[f64; 2]]) -> Polygon {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_unstable_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return Polygon::default();
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Polygon::default();
    }
    Polygon { vertices: hull }
}

/// Counter-clockwise convex hull; collinear or fewer than three distinct
/// points give an empty polygon of area 0.
pub fn convex_hull(points: &[Point2D]) -> Polygon {
    let raw: Vec<[f64; 2]> = points.iter().map(Point2D::xy).collect();
    hull_of(&raw)
}

/// Pairwise non-overlapping convex hulls. Inserting a hull that overlaps
/// existing members replaces them all with the hull of the union of their
/// vertices, repeated until nothing overlaps.
#[derive(Debug, Clone, Default)]
pub struct HullSet {
    hulls: Vec<Polygon>,
    total_area: f64,
}

impl HullSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hulls(&self) -> &[Polygon] {
        &self.hulls
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn len(&self) -> usize {
        self.hulls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hulls.is_empty()
    }

    pub fn insert(&mut self, polygon: Polygon) {
        if polygon.is_empty() {
            return;
        }
        let mut current = polygon;
        while let Some(pos) = self.hulls.iter().position(|h| h.overlaps(&current)) {
            let other = self.hulls.swap_remove(pos);
            let mut verts = current.vertices;
            verts.extend_from_slice(&other.vertices);
            current = hull_of(&verts);
        }
        self.hulls.push(current);
        self.total_area = self.hulls.iter().map(Polygon::area).sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square(x: f64, y: f64, s: f64) -> Polygon {
        hull_of(&[[x, y], [x + s, y], [x + s, y + s], [x, y + s]])
    }

    #[test]
    fn unit_square() {
        let h = square(0.0, 0.0, 1.0);
        assert_eq!(h.vertices().len(), 4);
        assert_eq!(h.area(), 1.0);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts = [
            Point2D::new(0.0, 0.0, 0),
            Point2D::new(1.0, 1.0, 1),
            Point2D::new(2.0, 2.0, 2),
        ];
        let h = convex_hull(&pts);
        assert!(h.is_empty());
        assert_eq!(h.area(), 0.0);
    }

    #[test]
    fn collinear_edge_points_are_dropped() {
        let h = hull_of(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
        assert_eq!(h.vertices().len(), 4);
        assert_eq!(h.area(), 4.0);
    }

    #[test]
    fn interior_points_do_not_change_area() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut pts: Vec<[f64; 2]> = (0..100).map(|_| [rng.random(), rng.random()]).collect();
        pts.extend([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let h = hull_of(&pts);
        assert_eq!(h.area(), 1.0);
        assert!(pts.iter().all(|&p| h.contains(p, 1e-12)));
    }

    #[test]
    fn overlap_tests() {
        let a = square(0.0, 0.0, 1.0);
        assert!(a.overlaps(&square(0.5, 0.5, 1.0)));
        assert!(a.overlaps(&square(1.0, 0.0, 1.0)));
        assert!(!a.overlaps(&square(1.5, 0.0, 1.0)));
        // Diagonal neighbours separated only along a non-axis direction.
        let tri = hull_of(&[[1.6, 0.5], [0.5, 1.6], [2.0, 2.0]]);
        assert!(!a.overlaps(&tri));
        // Containment.
        assert!(square(0.0, 0.0, 4.0).overlaps(&square(1.0, 1.0, 1.0)));
    }

    #[test]
    fn hull_set_merges_to_fixed_point() {
        let mut set = HullSet::new();
        set.insert(square(0.0, 0.0, 1.0));
        set.insert(square(3.0, 0.0, 1.0));
        assert_eq!(set.len(), 2);
        assert_eq!(set.total_area(), 2.0);
        // Bridges both squares.
        set.insert(hull_of(&[[0.5, 0.4], [3.5, 0.4], [2.0, 0.6]]));
        assert_eq!(set.len(), 1);
        assert!((set.total_area() - 4.0).abs() < 1e-12);
        set.insert(Polygon::default());
        assert_eq!(set.len(), 1);
    }

    proptest! {
        #[test]
        fn hull_contains_all_inputs(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..300)
        ) {
            let raw: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            let h = hull_of(&raw);
            if !h.is_empty() {
                prop_assert!(h.area() > 0.0);
                for p in &raw {
                    prop_assert!(h.contains(*p, 1e-7));
                }
                let n = h.vertices().len();
                for i in 0..n {
                    let c = cross(h.vertices()[i], h.vertices()[(i + 1) % n], h.vertices()[(i + 2) % n]);
                    prop_assert!(c > 0.0);
                }
            }
        }

        #[test]
        fn hull_set_never_holds_overlaps(
            squares in proptest::collection::vec((0.0f64..20.0, 0.0f64..20.0, 0.1f64..3.0), 1..25)
        ) {
            let mut set = HullSet::new();
            let mut last = 0.0;
            for (x, y, s) in squares {
                set.insert(square(x, y, s));
                prop_assert!(set.total_area() + 1e-9 >= last);
                last = set.total_area();
                let hs = set.hulls();
                for i in 0..hs.len() {
                    for j in 0..i {
                        prop_assert!(!hs[i].overlaps(&hs[j]));
                    }
                }
                let sum: f64 = hs.iter().map(Polygon::area).sum();
                prop_assert!((sum - set.total_area()).abs() <= 1e-9 * sum.max(1.0));
            }
        }
    }
}
