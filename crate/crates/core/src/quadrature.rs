//! Quadrature on the reference triangle and on segments.
//!
//! Triangle rules are stored in barycentric coordinates with weights that
//! sum to one, so `sum_q w_q f(x_q) * |K|` approximates `∫_K f`.

use crate::error::{Error, Result};
use crate::scalar::{Point, Real};

#[derive(Clone, Debug)]
pub struct QuadRule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub degree: usize,
}

fn orbit3(a: f64, w: f64, out: &mut Vec<([f64; 3], f64)>) {
    let b = 1.0 - 2.0 * a;
    out.push(([b, a, a], w));
    out.push(([a, b, a], w));
    out.push(([a, a, b], w));
}

fn orbit6(a: f64, b: f64, w: f64, out: &mut Vec<([f64; 3], f64)>) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [b, a, c], [a, c, b], [c, a, b], [b, c, a], [c, b, a]] {
        out.push((p, w));
    }
}

impl<T: Real> QuadRule<T> {
    /// Smallest built-in symmetric rule exact for polynomials of total degree `degree`.
    #[allow(clippy::excessive_precision)]
    pub fn triangle(degree: usize) -> Result<Self> {
        let mut raw = Vec::new();
        let exact = match degree {
            0 | 1 => {
                raw.push(([1.0 / 3.0; 3], 1.0));
                1
            }
            2 => {
                orbit3(1.0 / 6.0, 1.0 / 3.0, &mut raw);
                2
            }
            3 | 4 => {
                orbit3(0.445_948_490_915_964_886_32, 0.223_381_589_678_011_465_7, &mut raw);
                orbit3(0.091_576_213_509_770_743_46, 0.109_951_743_655_321_867_64, &mut raw);
                4
            }
            5 | 6 => {
                orbit3(0.063_089_014_491_502_228_34, 0.050_844_906_370_206_816_921, &mut raw);
                orbit3(0.249_286_745_170_910_421_29, 0.116_786_275_726_379_366_03, &mut raw);
                orbit6(0.053_145_049_844_816_947_353, 0.310_352_451_033_784_405_42, 0.082_851_075_618_373_575_194, &mut raw);
                6
            }
            d => return Err(Error::Unsupported(format!("no triangle rule of degree {d}"))),
        };
        Ok(Self {
            points: raw.iter().map(|(p, _)| p.map(T::lit)).collect(),
            weights: raw.iter().map(|&(_, w)| T::lit(w)).collect(),
            degree: exact,
        })
    }

    /// The three interior nodes (1/6, 1/6, 2/3) and permutations.
    pub fn interior_three_point() -> Self {
        Self::triangle(2).expect("degree-2 rule exists")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical quadrature points and weights (scaled by the area) on a triangle.
    pub fn on_triangle(&self, p: &[Point<T>; 3]) -> impl Iterator<Item = (Point<T>, T)> + '_ {
        let area = triangle_area(p);
        let p = *p;
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            let x = [
                l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            ];
            (x, w * area)
        })
    }

    pub fn integrate<F: FnMut(Point<T>) -> T>(&self, p: &[Point<T>; 3], mut f: F) -> T {
        self.on_triangle(p).map(|(x, w)| w * f(x)).sum()
    }

    /// Max error over monomials `x^i y^j`, `i + j <= degree`, on the reference
    /// triangle (area 1/2), normalized by the exact value.
    pub fn monomial_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=self.degree {
            for j in 0..=(self.degree - i) {
                let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                let approx: f64 = self
                    .points
                    .iter()
                    .zip(&self.weights)
                    .map(|(l, w)| w.as_f64() * 0.5 * l[1].as_f64().powi(i as i32) * l[2].as_f64().powi(j as i32))
                    .sum();
                worst = worst.max(((approx - exact) / exact).abs());
            }
        }
        worst
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn triangle_area<T: Real>(p: &[Point<T>; 3]) -> T {
    ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0])).abs() * T::lit(0.5)
}

/// Gauss-Legendre rule mapped to `[0, 1]`, weights summing to one.
#[derive(Clone, Debug)]
pub struct GaussLine<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLine<T> {
    pub fn new(n: usize) -> Result<Self> {
        let (x, w): (Vec<f64>, Vec<f64>) = match n {
            1 => (vec![0.0], vec![2.0]),
            2 => {
                let a = 1.0 / 3f64.sqrt();
                (vec![-a, a], vec![1.0, 1.0])
            }
            3 => {
                let a = (3.0f64 / 5.0).sqrt();
                (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
            }
            5 => {
                let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
                let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
                let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
                let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
                (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
            }
            _ => return Err(Error::Unsupported(format!("no {n}-point Gauss rule"))),
        };
        Ok(Self {
            points: x.iter().map(|&t| T::lit(0.5 * (t + 1.0))).collect(),
            weights: w.iter().map(|&v| T::lit(0.5 * v)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rules_integrate_monomials_exactly() {
        for d in [1, 2, 4, 6] {
            let r = QuadRule::<f64>::triangle(d).unwrap();
            assert_eq!(r.degree, d);
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-15);
            assert!(r.monomial_defect() < 1e-14, "degree {d}: {}", r.monomial_defect());
        }
    }

    #[test]
    fn request_rounds_up_to_available_rule() {
        assert_eq!(QuadRule::<f64>::triangle(3).unwrap().degree, 4);
        assert_eq!(QuadRule::<f64>::triangle(5).unwrap().len(), 12);
        assert!(QuadRule::<f64>::triangle(9).is_err());
    }

    #[test]
    fn gauss_line_exactness() {
        for (n, deg) in [(2usize, 3i32), (3, 5), (5, 9)] {
            let g = GaussLine::<f64>::new(n).unwrap();
            for k in 0..=deg {
                let approx: f64 = g.points.iter().zip(&g.weights).map(|(x, w)| w * x.powi(k)).sum();
                assert!((approx - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn f32_rules_are_usable() {
        let r = QuadRule::<f32>::triangle(6).unwrap();
        assert!(r.monomial_defect() < 1e-6);
    }
}
