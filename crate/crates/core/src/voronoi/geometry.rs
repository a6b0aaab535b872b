//! Exact predicates on integer vectors.

use crate::group::Coords;

pub(crate) fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `v / gcd(v)`; zero stays zero.
pub(crate) fn primitive(v: &[i64]) -> Coords {
    let g = v.iter().fold(0, |acc, &c| gcd(acc, c));
    if g == 0 {
        return Coords::from_slice(v);
    }
    v.iter().map(|c| c / g).collect()
}

fn cross3(a: &[i64], b: &[i64]) -> [i64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Non-zero directions `r` with `<r, w> >= 0` for every `w` in `vectors`
/// (dimension at most 3). Empty exactly when the vectors positively span
/// the whole space.
///
/// The cone `{r : <r, w> >= 0}` is polyhedral; when non-trivial it contains
/// a ray on the intersection of facet hyperplanes, so testing the
/// perpendiculars (d = 2) or pairwise cross products (d = 3) is complete.
pub(crate) fn recession_directions(dim: usize, vectors: &[Coords]) -> Vec<Coords> {
    let mut dirs: Vec<Coords> = vectors
        .iter()
        .filter(|v| v.iter().any(|&c| c != 0))
        .map(|v| primitive(v))
        .collect();
    dirs.sort();
    dirs.dedup();

    let mut candidates: Vec<Coords> = Vec::new();
    match dim {
        0 => return Vec::new(),
        1 => candidates.extend([Coords::from_slice(&[1]), Coords::from_slice(&[-1])]),
        2 => {
            if dirs.is_empty() {
                candidates.push(Coords::from_slice(&[1, 0]));
            }
            for w in &dirs {
                candidates.push(Coords::from_slice(&[-w[1], w[0]]));
                candidates.push(Coords::from_slice(&[w[1], -w[0]]));
            }
        }
        3 => {
            if dirs.is_empty() {
                candidates.push(Coords::from_slice(&[1, 0, 0]));
            }
            let mut any_cross = false;
            for (i, a) in dirs.iter().enumerate() {
                for b in &dirs[i + 1..] {
                    let c = cross3(a, b);
                    if c != [0, 0, 0] {
                        any_cross = true;
                        candidates.push(Coords::from_slice(&c));
                        candidates.push(c.iter().map(|x| -x).collect());
                    }
                }
            }
            if !any_cross {
                if let Some(w) = dirs.first() {
                    for e in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
                        let c = cross3(w, &e);
                        if c != [0, 0, 0] {
                            candidates.push(Coords::from_slice(&c));
                            candidates.push(c.iter().map(|x| -x).collect());
                        }
                    }
                }
            }
        }
        _ => panic!("recession test supports dimension <= 3"),
    }
    let mut found: Vec<Coords> = candidates
        .into_iter()
        .map(|c| primitive(&c))
        .filter(|r| dirs.iter().all(|w| dot(r, w) >= 0))
        .collect();
    found.sort();
    found.dedup();
    found
}

/// Whether `p` lies in the topological interior of `conv(points)`:
/// equivalently, the vectors `b - p` positively span the space.
pub(crate) fn in_open_hull_by_spanning(dim: usize, points: &[Coords], p: &[i64]) -> bool {
    let shifted: Vec<Coords> = points
        .iter()
        .map(|b| b.iter().zip(p).map(|(x, y)| x - y).collect())
        .collect();
    recession_directions(dim, &shifted).is_empty()
}

fn orient(o: &[i64], a: &[i64], b: &[i64]) -> i128 {
    (a[0] - o[0]) as i128 * (b[1] - o[1]) as i128 - (a[1] - o[1]) as i128 * (b[0] - o[0]) as i128
}

/// Counter-clockwise convex hull without collinear points (monotone chain).
pub(crate) fn convex_hull_2d(points: &[Coords]) -> Vec<Coords> {
    let mut pts: Vec<Coords> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Coords> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Coords>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2
                && orient(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0
            {
                hull.pop();
            }
            hull.push(p.clone());
        }
        hull.pop();
    }
    hull
}

/// Strictly inside a counter-clockwise hull with at least three vertices.
pub(crate) fn strictly_inside_hull(hull: &[Coords], p: &[i64]) -> bool {
    hull.len() >= 3 && (0..hull.len()).all(|i| orient(&hull[i], &hull[(i + 1) % hull.len()], p) > 0)
}

/// A line `a . v >= c` in the plane.
#[derive(Clone, Copy, Debug)]
struct HalfPlane {
    a: [i128; 2],
    c: i128,
}

/// Rational point `(x / den, y / den)` with `den > 0`.
#[derive(Clone, Copy, Debug)]
struct RatPoint {
    x: i128,
    y: i128,
    den: i128,
}

impl HalfPlane {
    fn side(&self, p: &RatPoint) -> i128 {
        (self.a[0] * p.x + self.a[1] * p.y - self.c * p.den).signum()
    }

    fn intersect(&self, other: &HalfPlane) -> RatPoint {
        let det = self.a[0] * other.a[1] - self.a[1] * other.a[0];
        let x = self.c * other.a[1] - other.c * self.a[1];
        let y = self.a[0] * other.c - other.a[0] * self.c;
        let s = det.signum();
        RatPoint {
            x: x * s,
            y: y * s,
            den: det.abs(),
        }
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// Integer bounding box `[lo, hi]` of the planar polygon
/// `{v : 2<v, w> + |w|^2 >= 0 for all w}`, which must be bounded and
/// contain the origin in its interior.
pub(crate) fn bounding_box_2d(constraints: &[Coords]) -> ([i64; 2], [i64; 2]) {
    let planes: Vec<HalfPlane> = constraints
        .iter()
        .map(|w| HalfPlane {
            a: [2 * w[0] as i128, 2 * w[1] as i128],
            c: -(dot(w, w)),
        })
        .collect();
    let mut m: i128 = 64;
    loop {
        let border = [
            HalfPlane { a: [0, 1], c: -m },
            HalfPlane { a: [-1, 0], c: -m },
            HalfPlane { a: [0, -1], c: -m },
            HalfPlane { a: [1, 0], c: -m },
        ];
        let corner = |x: i128, y: i128| RatPoint { x, y, den: 1 };
        // Each vertex carries the line of the edge leaving it.
        let mut poly: Vec<(RatPoint, HalfPlane)> = vec![
            (corner(-m, -m), border[0]),
            (corner(m, -m), border[1]),
            (corner(m, m), border[2]),
            (corner(-m, m), border[3]),
        ];
        for clip in &planes {
            let mut out = Vec::with_capacity(poly.len() + 1);
            for i in 0..poly.len() {
                let (p, edge) = poly[i];
                let q = poly[(i + 1) % poly.len()].0;
                let (sp, sq) = (clip.side(&p), clip.side(&q));
                if sp > 0 {
                    out.push((p, edge));
                    if sq < 0 {
                        out.push((edge.intersect(clip), *clip));
                    }
                } else if sp == 0 {
                    out.push((p, if sq < 0 { *clip } else { edge }));
                } else if sq > 0 {
                    out.push((edge.intersect(clip), edge));
                }
            }
            poly = out;
        }
        let touches = poly
            .iter()
            .any(|(p, _)| p.x.abs() == m * p.den || p.y.abs() == m * p.den);
        if !touches {
            let mut lo = [i128::MAX; 2];
            let mut hi = [i128::MIN; 2];
            for (p, _) in &poly {
                for (k, num) in [p.x, p.y].into_iter().enumerate() {
                    lo[k] = lo[k].min(floor_div(num, p.den));
                    hi[k] = hi[k].max(ceil_div(num, p.den));
                }
            }
            return ([lo[0] as i64, lo[1] as i64], [hi[0] as i64, hi[1] as i64]);
        }
        m *= 4;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[i64]) -> Coords {
        Coords::from_slice(v)
    }

    #[test]
    fn positive_spanning_examples() {
        let axes = [c(&[1, 0]), c(&[-1, 0]), c(&[0, 1]), c(&[0, -1])];
        assert!(recession_directions(2, &axes).is_empty());
        let quadrant = [c(&[2, 0]), c(&[0, 2])];
        let r = recession_directions(2, &quadrant);
        assert!(!r.is_empty());
        assert!(r.iter().all(|r| quadrant.iter().all(|w| dot(r, w) >= 0)));
        let strip = [c(&[1, 0]), c(&[-1, 0])];
        assert!(recession_directions(2, &strip).contains(&c(&[0, 1])));
        assert!(recession_directions(1, &[c(&[3]), c(&[-2])]).is_empty());
        assert_eq!(recession_directions(1, &[c(&[3])]), vec![c(&[1])]);
        let simplex3 = [
            c(&[1, 0, 0]),
            c(&[0, 1, 0]),
            c(&[0, 0, 1]),
            c(&[-1, -1, -1]),
        ];
        assert!(recession_directions(3, &simplex3).is_empty());
        let plane3 = [c(&[1, 0, 0]), c(&[0, 1, 0]), c(&[-1, -1, 0])];
        assert!(recession_directions(3, &plane3).contains(&c(&[0, 0, 1])));
    }

    #[test]
    fn hull_and_interior() {
        let square = [c(&[0, 0]), c(&[2, 0]), c(&[0, 2]), c(&[2, 2]), c(&[1, 0])];
        let hull = convex_hull_2d(&square);
        assert_eq!(hull.len(), 4);
        assert!(strictly_inside_hull(&hull, &[1, 1]));
        assert!(!strictly_inside_hull(&hull, &[1, 0]));
        assert!(in_open_hull_by_spanning(2, &square, &[1, 1]));
        assert!(!in_open_hull_by_spanning(2, &square, &[2, 1]));
    }

    #[test]
    fn bounding_box_of_square_cell() {
        let w = [c(&[2, 0]), c(&[-2, 0]), c(&[0, 2]), c(&[0, -2])];
        assert_eq!(bounding_box_2d(&w), ([-1, -1], [1, 1]));
        // Long thin cell reaching y = -50.5.
        let w = [c(&[10, 1]), c(&[-10, 1]), c(&[0, -1])];
        let (lo, hi) = bounding_box_2d(&w);
        assert!(lo[1] <= -51 && hi[1] >= 1, "{lo:?} {hi:?}");
    }
}
