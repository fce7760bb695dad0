//! Quadrature rules on the reference segment and reference triangle.
//!
//! Points are stored in barycentric coordinates and weights are normalized to
//! sum to one, so an integral over a cell is `measure * sum_q w_q f(x_q)`.

use alloc::vec::Vec;

use crate::real;

/// Reference domain a rule integrates over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefDomain {
    Segment,
    Triangle,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    domain: RefDomain,
    /// Barycentric coordinates; segments use the first two entries.
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    /// Gauss-Legendre rule with `n` points on the segment, exact for
    /// polynomials of degree `2n - 1`.
    pub fn gauss_segment(n: usize) -> QuadratureRule {
        assert!(n >= 1, "gauss_segment needs at least one point");
        let (nodes, weights) = gauss_legendre(n);
        let points = nodes
            .iter()
            .map(|&x| {
                let xi = 0.5 * (x + 1.0);
                [1.0 - xi, xi, 0.0]
            })
            .collect();
        let weights = weights.iter().map(|&w| 0.5 * w).collect();
        QuadratureRule {
            domain: RefDomain::Segment,
            points,
            weights,
            degree: 2 * n - 1,
        }
    }

    /// Three-point triangle rule, exact to degree 2.
    pub fn triangle_degree2() -> QuadratureRule {
        let a = 2.0 / 3.0;
        let b = 1.0 / 6.0;
        QuadratureRule {
            domain: RefDomain::Triangle,
            points: alloc::vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: alloc::vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Six-point symmetric triangle rule, exact to degree 4.
    pub fn triangle_degree4() -> QuadratureRule {
        let a = 0.445_948_490_915_965;
        let wa = 0.223_381_589_678_011;
        let b = 0.091_576_213_509_771;
        let wb = 0.109_951_743_655_322;
        QuadratureRule {
            domain: RefDomain::Triangle,
            points: alloc::vec![
                [1.0 - 2.0 * a, a, a],
                [a, 1.0 - 2.0 * a, a],
                [a, a, 1.0 - 2.0 * a],
                [1.0 - 2.0 * b, b, b],
                [b, 1.0 - 2.0 * b, b],
                [b, b, 1.0 - 2.0 * b],
            ],
            weights: alloc::vec![wa, wa, wa, wb, wb, wb],
            degree: 4,
        }
    }

    /// Seven-point symmetric triangle rule, exact to degree 5.
    pub fn triangle_degree5() -> QuadratureRule {
        let s15 = real::sqrt(15.0);
        let a = (6.0 - s15) / 21.0;
        let wa = (155.0 - s15) / 1200.0;
        let b = (6.0 + s15) / 21.0;
        let wb = (155.0 + s15) / 1200.0;
        let c = 1.0 / 3.0;
        QuadratureRule {
            domain: RefDomain::Triangle,
            points: alloc::vec![
                [c, c, c],
                [1.0 - 2.0 * a, a, a],
                [a, 1.0 - 2.0 * a, a],
                [a, a, 1.0 - 2.0 * a],
                [1.0 - 2.0 * b, b, b],
                [b, 1.0 - 2.0 * b, b],
                [b, b, 1.0 - 2.0 * b],
            ],
            weights: alloc::vec![9.0 / 40.0, wa, wa, wa, wb, wb, wb],
            degree: 5,
        }
    }

    /// Default rule for a mesh dimension: 4-point Gauss on segments,
    /// the degree-4 symmetric rule on triangles.
    pub fn default_for_dim(dim: usize) -> QuadratureRule {
        match dim {
            1 => QuadratureRule::gauss_segment(4),
            2 => QuadratureRule::triangle_degree4(),
            _ => panic!("unsupported dimension {dim}"),
        }
    }

    /// Composite refinement: the reference cell is split uniformly `levels`
    /// times (2-way on segments, 4-way on triangles) and the rule is applied
    /// on every child. The polynomial degree is unchanged, the error constant
    /// shrinks.
    pub fn refined(&self, levels: u32) -> QuadratureRule {
        let mut cells: Vec<[[f64; 3]; 3]> = alloc::vec![[
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(cells.len() * 4);
            for cell in &cells {
                match self.domain {
                    RefDomain::Segment => {
                        let mid = mid_bary(&cell[0], &cell[1]);
                        next.push([cell[0], mid, cell[2]]);
                        next.push([mid, cell[1], cell[2]]);
                    }
                    RefDomain::Triangle => {
                        let m01 = mid_bary(&cell[0], &cell[1]);
                        let m12 = mid_bary(&cell[1], &cell[2]);
                        let m20 = mid_bary(&cell[2], &cell[0]);
                        next.push([cell[0], m01, m20]);
                        next.push([m01, cell[1], m12]);
                        next.push([m20, m12, cell[2]]);
                        next.push([m01, m12, m20]);
                    }
                }
            }
            cells = next;
        }
        let frac = 1.0 / cells.len() as f64;
        let mut points = Vec::with_capacity(cells.len() * self.points.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for cell in &cells {
            for (p, &w) in self.points.iter().zip(&self.weights) {
                let nv = match self.domain {
                    RefDomain::Segment => 2,
                    RefDomain::Triangle => 3,
                };
                let mut mapped = [0.0f64; 3];
                for i in 0..nv {
                    for k in 0..3 {
                        mapped[k] += p[i] * cell[i][k];
                    }
                }
                points.push(mapped);
                weights.push(w * frac);
            }
        }
        QuadratureRule {
            domain: self.domain,
            points,
            weights,
            degree: self.degree,
        }
    }

    pub fn domain(&self) -> RefDomain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn point(&self, q: usize) -> &[f64; 3] {
        &self.points[q]
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

fn mid_bary(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0f64; n];
    let mut weights = alloc::vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess.
        let mut x = real::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, d) = legendre_value_deriv(n, x);
            let dx = p / d;
            x -= dx;
            if real::abs(dx) < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_value_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_value_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_value_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
