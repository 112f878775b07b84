//! Marching-squares extraction of a level set on a uniform grid.

use std::collections::HashMap;

pub type Point = [f64; 2];

/// Grid edge identifier: `(i, j, horizontal)`.
type EdgeId = (usize, usize, bool);

/// Extracts the zero set of `f` on `[lo, hi]²` sampled with `n × n` nodes.
/// Returns each connected component as a polyline; closed components repeat no point.
pub fn zero_contours<F: Fn(Point) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<Contour> {
    let h = (hi - lo) / (n - 1) as f64;
    let node = |i: usize| lo + i as f64 * h;
    let vals: Vec<f64> = (0..n * n).map(|k| f([node(k % n), node(k / n)])).collect();
    let at = |i: usize, j: usize| vals[j * n + i];

    let mut points: HashMap<EdgeId, Point> = HashMap::new();
    let mut crossing = |e: EdgeId| -> EdgeId {
        points.entry(e).or_insert_with(|| {
            let (i, j, horiz) = e;
            let (a, b, pa, pb) = if horiz {
                (
                    at(i, j),
                    at(i + 1, j),
                    [node(i), node(j)],
                    [node(i + 1), node(j)],
                )
            } else {
                (
                    at(i, j),
                    at(i, j + 1),
                    [node(i), node(j)],
                    [node(i), node(j + 1)],
                )
            };
            let t = a / (a - b);
            [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
        });
        e
    };

    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let case = c
                .iter()
                .enumerate()
                .fold(0u8, |m, (k, v)| if *v > 0.0 { m | (1 << k) } else { m });
            if case == 0 || case == 15 {
                continue;
            }
            // edges: 0 bottom, 1 right, 2 top, 3 left
            let e = [
                (i, j, true),
                (i + 1, j, false),
                (i, j + 1, true),
                (i, j, false),
            ];
            let centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
            let pairs: &[(usize, usize)] = match case {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 => {
                    if centre > 0.0 {
                        &[(3, 2), (0, 1)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                10 => {
                    if centre > 0.0 {
                        &[(3, 0), (1, 2)]
                    } else {
                        &[(3, 2), (0, 1)]
                    }
                }
                _ => &[],
            };
            for &(a, b) in pairs {
                segments.push((crossing(e[a]), crossing(e[b])));
            }
        }
    }

    let mut adjacency: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(k);
        adjacency.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut cur) = segments[start];
        let mut chain = vec![first, cur];
        let mut closed = false;
        loop {
            let next = adjacency[&cur].iter().copied().find(|&k| !used[k]);
            match next {
                Some(k) => {
                    used[k] = true;
                    let (a, b) = segments[k];
                    cur = if a == cur { b } else { a };
                    if cur == first {
                        closed = true;
                        break;
                    }
                    chain.push(cur);
                }
                None => break,
            }
        }
        out.push(Contour {
            points: chain.iter().map(|e| points[e]).collect(),
            closed,
        });
    }
    // deterministic ordering: longest first
    out.sort_by_key(|c| std::cmp::Reverse(c.points.len()));
    out
}

/// One connected piece of a level set.
#[derive(Debug, Clone)]
pub struct Contour {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Contour {
    /// Shoelace signed area (positive for counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|k| {
                let (a, b) = (self.points[k], self.points[(k + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            * 0.5
    }

    /// Winding number of the closed polyline about `q`.
    pub fn winding_number(&self, q: Point) -> i32 {
        let n = self.points.len();
        let total: f64 = (0..n)
            .map(|k| {
                let a = self.points[k];
                let b = self.points[(k + 1) % n];
                let (ax, ay) = (a[0] - q[0], a[1] - q[1]);
                let (bx, by) = (b[0] - q[0], b[1] - q[1]);
                (ax * by - ay * bx).atan2(ax * bx + ay * by)
            })
            .sum();
        (total / (2.0 * std::f64::consts::PI)).round() as i32
    }
}
