//! Words as points `(x, y)` = (acceptance by the first automaton,
//! acceptance by the second), and maximum-margin line separation of
//! members from non-members.

use crate::dfa::DfaDefinition;
use crate::qfa::QfaDefinition;
use crate::word::Word;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }

    fn dist(self, o: Point) -> f64 {
        self.sub(o).dot(self.sub(o)).sqrt()
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityPoint {
    pub word: Word,
    pub x: f64,
    pub y: f64,
    pub member: bool,
}

/// One point per word `|w| <= max_len`, in length-lexicographic order.
pub fn probability_points(
    first: &QfaDefinition,
    second: &QfaDefinition,
    oracle: &DfaDefinition,
    max_len: usize,
) -> Result<Vec<ProbabilityPoint>> {
    let to_second = first.alphabet().mapping_to(second.alphabet())?;
    let to_oracle = first.alphabet().mapping_to(oracle.alphabet())?;
    let xs = first.word_outcomes(max_len);
    let ys = second.word_outcomes(max_len);
    let mut second_words: std::collections::HashMap<Word, f64> =
        ys.into_iter().map(|(w, o)| (w, o.accepted)).collect();
    xs.into_iter()
        .map(|(word, o)| {
            let in_second: Word = word.iter().map(|&l| to_second[l]).collect();
            let in_oracle: Word = word.iter().map(|&l| to_oracle[l]).collect();
            let y = second_words.remove(&in_second).expect("same corpus over a permuted alphabet");
            Ok(ProbabilityPoint { x: o.accepted, y, member: oracle.accepts(&in_oracle)?, word })
        })
        .collect()
}

/// Convex hull in counter-clockwise order without collinear points.
/// Degenerate inputs give one or two vertices.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Edges of a hull; a single point is a zero-length edge.
fn edges(hull: &[Point]) -> Vec<(Point, Point)> {
    match hull.len() {
        1 => vec![(hull[0], hull[0])],
        2 => vec![(hull[0], hull[1])],
        n => (0..n).map(|i| (hull[i], hull[(i + 1) % n])).collect(),
    }
}

fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return a;
    }
    a.lerp(b, (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0))
}

fn segments_cross(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = cross(b0, b1, a0);
    let d2 = cross(b0, b1, a1);
    let d3 = cross(a0, a1, b0);
    let d4 = cross(a0, a1, b1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Closest points between two segments.
fn segment_pair(a: (Point, Point), b: (Point, Point)) -> (f64, Point, Point) {
    if segments_cross(a.0, a.1, b.0, b.1) {
        // any crossing point; the distance is what matters
        let p = closest_on_segment(a.0, b.0, b.1);
        return (0.0, p, p);
    }
    let candidates = [
        (a.0, closest_on_segment(a.0, b.0, b.1)),
        (a.1, closest_on_segment(a.1, b.0, b.1)),
        (closest_on_segment(b.0, a.0, a.1), b.0),
        (closest_on_segment(b.1, a.0, a.1), b.1),
    ];
    candidates
        .into_iter()
        .map(|(p, q)| (p.dist(q), p, q))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("four candidates")
}

fn inside_polygon(p: Point, hull: &[Point]) -> bool {
    hull.len() >= 3 && (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) >= 0.0)
}

/// The line `a·x + b·y = c` with `a² + b² = 1`; the first set lies on the
/// `< c` side and the second on the `> c` side, each at distance `>= margin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatingLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub margin: f64,
}

impl SeparatingLine {
    pub fn eval(&self, p: Point) -> f64 {
        self.a * p.x + self.b * p.y - self.c
    }
}

/// Margins at or below this are treated as touching hulls.
const MIN_MARGIN: f64 = 1e-12;

/// Maximum-margin strict separator of `below` from `above`, or `None` when
/// their convex hulls meet. The optimal line is the perpendicular bisector
/// of the closest pair of hull points.
pub fn separating_line(below: &[Point], above: &[Point]) -> Result<Option<SeparatingLine>> {
    if below.is_empty() || above.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let h1 = convex_hull(below);
    let h2 = convex_hull(above);
    if h1.iter().any(|&p| inside_polygon(p, &h2)) || h2.iter().any(|&p| inside_polygon(p, &h1)) {
        return Ok(None);
    }
    let (dist, p, q) = edges(&h1)
        .into_iter()
        .flat_map(|e1| edges(&h2).into_iter().map(move |e2| segment_pair(e1, e2)))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("hulls are nonempty");
    let margin = dist / 2.0;
    if margin <= MIN_MARGIN {
        return Ok(None);
    }
    let n = q.sub(p);
    let (a, b) = (n.x / dist, n.y / dist);
    let c = a * (p.x + q.x) / 2.0 + b * (p.y + q.y) / 2.0;
    Ok(Some(SeparatingLine { a, b, c, margin }))
}

/// What is known about the two automata's rejection probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionProfile {
    /// Only the recognition guarantees: non-members rejected with `>= p`.
    Unrestricted,
    /// Every word is rejected with probability at most `p_i`, so
    /// non-members sit exactly at rejection `p_i`.
    Exact,
}

/// Corner points of the regions where non-members (`S1`, first) and
/// members of the union (`S2`, second) can lie, given recognition
/// probabilities `p1`, `p2`.
pub fn union_regions(p1: f64, p2: f64, profile: RejectionProfile) -> (Vec<Point>, Vec<Point>) {
    let boxed = |x0: f64, x1: f64, y0: f64, y1: f64| {
        vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x0, y1), Point::new(x1, y1)]
    };
    let (q1, q2) = (1.0 - p1, 1.0 - p2);
    match profile {
        RejectionProfile::Unrestricted => {
            let s1 = boxed(0.0, q1, 0.0, q2);
            let mut s2 = boxed(p1, 1.0, p2, 1.0);
            s2.extend(boxed(p1, 1.0, 0.0, q2));
            s2.extend(boxed(0.0, q1, p2, 1.0));
            (s1, s2)
        }
        RejectionProfile::Exact => {
            let s1 = vec![Point::new(q1, q2)];
            let mut s2 = boxed(p1, 1.0, p2, 1.0);
            s2.extend(boxed(p1, 1.0, q2, q2));
            s2.extend(boxed(q1, q1, p2, 1.0));
            (s1, s2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_are_separated_along_the_diagonal() {
        let line = separating_line(&[Point::new(0.2, 0.2)], &[Point::new(0.8, 0.8)])
            .unwrap()
            .expect("separable");
        let s = 0.5f64.sqrt();
        assert!((line.a - s).abs() < 1e-12 && (line.b - s).abs() < 1e-12);
        assert!((line.c - s).abs() < 1e-12);
        assert!((line.margin - 0.6 * s).abs() < 1e-12);
    }

    #[test]
    fn limit_case_is_not_strictly_separable() {
        let (s1, s2) = union_regions(2.0 / 3.0, 2.0 / 3.0, RejectionProfile::Unrestricted);
        assert_eq!(separating_line(&s1, &s2).unwrap(), None);
    }

    #[test]
    fn above_limit_is_separable() {
        let (s1, s2) = union_regions(0.7, 0.7, RejectionProfile::Unrestricted);
        let line = separating_line(&s1, &s2).unwrap().expect("1/0.7 + 1/0.7 < 3");
        assert!(s1.iter().all(|&p| line.eval(p) < 0.0));
        assert!(s2.iter().all(|&p| line.eval(p) > 0.0));
    }

    #[test]
    fn exact_rejection_point_is_separable_at_low_probability() {
        let (s1, s2) = union_regions(0.6, 0.6, RejectionProfile::Exact);
        assert_eq!(s1, vec![Point::new(0.4, 0.4)]);
        let line = separating_line(&s1, &s2).unwrap().expect("separable");
        assert!(line.margin > 0.0);
        assert!(s2.iter().all(|&p| line.eval(p) >= line.margin - 1e-12));
    }

    #[test]
    fn overlapping_sets_have_no_line() {
        let square = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0)];
        assert_eq!(separating_line(&square, &[Point::new(0.5, 0.5)]).unwrap(), None);
        let cross1 = [Point::new(0.0, 0.0), Point::new(1.0, 1.0)];
        let cross2 = [Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert_eq!(separating_line(&cross1, &cross2).unwrap(), None);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(separating_line(&[], &[Point::new(0.0, 0.0)]), Err(Error::EmptyPointSet)));
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(0.2, 0.2),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 3);
        let line = convex_hull(&[Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(0.5, 0.5)]);
        assert_eq!(line.len(), 2);
    }
}
