//! Uniform grids, extremum detection and golden-section maximization.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n` equally spaced samples from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    lo: T,
    hi: T,
    n: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(lo: T, hi: T, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "grid",
                format!("need finite lo < hi, got [{lo:e}, {hi:e}]"),
            ));
        }
        if n < 2 {
            return Err(Error::invalid("grid.n", "need at least two samples"));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn lo(&self) -> T {
        self.lo
    }
    pub fn hi(&self) -> T {
        self.hi
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> T {
        (self.hi - self.lo) / T::from_usize_lossy(self.n - 1)
    }

    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + self.step() * T::from_usize_lossy(i)
        }
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Same grid with every abscissa multiplied by `factor` (order kept ascending).
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let (a, b) = (self.lo * factor, self.hi * factor);
        Self::new(a.min(b), a.max(b), self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
    /// Flat run bounded by opposite slopes; location is the run midpoint.
    Plateau,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub location: T,
    pub value: T,
    pub kind: ExtremumKind,
}

fn slope_sign<T: Real>(a: T, b: T) -> i8 {
    if b > a {
        1
    } else if b < a {
        -1
    } else {
        0
    }
}

/// Interior local extrema of sampled values `v` on `grid`, without refinement.
pub fn extrema_of_samples<T: Real>(
    grid: &GridSpec<T>,
    v: &[T],
) -> Vec<(usize, usize, ExtremumKind)> {
    let n = v.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let slopes: Vec<i8> = v.windows(2).map(|w| slope_sign(w[0], w[1])).collect();
    let _ = grid;
    let mut i = 0;
    // last nonzero slope before position i, with the index where the flat run began
    let mut prev: Option<i8> = None;
    while i < slopes.len() {
        if slopes[i] == 0 {
            let start = i;
            while i < slopes.len() && slopes[i] == 0 {
                i += 1;
            }
            if i < slopes.len() {
                if let Some(p) = prev {
                    if p != slopes[i] {
                        out.push((start, i, ExtremumKind::Plateau));
                    }
                }
            }
            continue;
        }
        if let Some(p) = prev {
            if i > 0 && slopes[i - 1] != 0 && p != slopes[i] {
                let kind = if p > 0 {
                    ExtremumKind::Max
                } else {
                    ExtremumKind::Min
                };
                out.push((i, i, kind));
            }
        }
        prev = Some(slopes[i]);
        i += 1;
    }
    out
}

/// Samples `f` on `grid` and reports the strict interior extrema, each refined
/// by golden-section search to `1e-4` of the grid step. Flat runs between
/// opposite slopes come back as [`ExtremumKind::Plateau`].
pub fn scan_extrema<T: Real, F: Fn(T) -> T>(f: F, grid: &GridSpec<T>) -> Vec<Extremum<T>> {
    let x = grid.points();
    let v: Vec<T> = x.iter().map(|&t| f(t)).collect();
    refine_extrema(&f, grid, &v)
}

/// As [`scan_extrema`] with samples already computed.
pub fn refine_extrema<T: Real, F: Fn(T) -> T>(
    f: &F,
    grid: &GridSpec<T>,
    v: &[T],
) -> Vec<Extremum<T>> {
    let tol = grid.step() * T::lit(1e-4);
    extrema_of_samples(grid, v)
        .into_iter()
        .map(|(i, j, kind)| match kind {
            ExtremumKind::Plateau => Extremum {
                location: T::lit(0.5) * (grid.point(i) + grid.point(j)),
                value: v[i],
                kind,
            },
            ExtremumKind::Max | ExtremumKind::Min => {
                let sign = if kind == ExtremumKind::Max {
                    T::one()
                } else {
                    -T::one()
                };
                let (loc, val) =
                    golden_max(|t| sign * f(t), grid.point(i - 1), grid.point(i + 1), tol);
                let val = sign * val;
                // the refinement can only improve on the sampled node
                let (loc, val) = if sign * val >= sign * v[i] {
                    (loc, val)
                } else {
                    (grid.point(i), v[i])
                };
                Extremum {
                    location: loc,
                    value: val,
                    kind,
                }
            }
        })
        .collect()
}

fn inv_phi<T: Real>() -> T {
    (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0)
}

fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> (T, T) {
    let r = inv_phi::<T>();
    let (mut a, mut b) = (a, b);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Golden-section maximization of a unimodal `f` on `[a, b]` to bracket width `tol`.
/// A probe lying below both current bracket ends means `f` has a valley inside
/// the bracket and yields [`Error::NotUnimodal`].
pub fn maximize_scalar<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Result<(T, T)> {
    if !(a < b) || !(tol > T::zero()) {
        return Err(Error::invalid("maximize.bracket", "need a < b and tol > 0"));
    }
    let r = inv_phi::<T>();
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let valley = |x: T, lo: T, hi: T| x < lo && x < hi;
    while (b - a) > tol {
        if valley(fc, fa, fb) || valley(fd, fa, fb) {
            return Err(Error::NotUnimodal {
                lo: a.to_f64_lossy(),
                hi: b.to_f64_lossy(),
            });
        }
        if fc >= fd {
            b = d;
            fb = fd;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            fa = fc;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let best = [(a, fa), (c, fc), (d, fd), (b, fb)]
        .into_iter()
        .fold((a, fa), |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_points() {
        let g = GridSpec::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(GridSpec::new(1.0, 1.0, 5).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
        assert_eq!(g.scaled(-2.0).unwrap().points()[0], -2.0);
    }

    #[test]
    fn cosine_interior_only() {
        let g = GridSpec::new(0.0, 2.0 * PI, 101).unwrap();
        let e = scan_extrema(f64::cos, &g);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].kind, ExtremumKind::Min);
        assert!((e[0].location - PI).abs() < 1e-4 * g.step() + 1e-12);
        assert!((e[0].value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn parabola_minimum() {
        let g = GridSpec::new(0.0, 2.0, 10).unwrap();
        let e = scan_extrema(|x: f64| (x - 1.0).powi(2), &g);
        assert_eq!(e.len(), 1);
        assert!((e[0].location - 1.0).abs() < 1e-4);
    }

    #[test]
    fn plateau_reported_separately() {
        let g = GridSpec::new(0.0, 10.0, 11).unwrap();
        let f = |x: f64| {
            if (4.0..=6.0).contains(&x) {
                1.0
            } else {
                1.0 - (x - 5.0).abs() * 0.1
            }
        };
        let e = scan_extrema(f, &g);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].kind, ExtremumKind::Plateau);
        assert_eq!(e[0].location, 5.0);
        // a flat shoulder is not an extremum
        let shoulder = |x: f64| if x < 5.0 { 1.0 } else { 1.0 - (x - 5.0) };
        assert!(scan_extrema(shoulder, &g).is_empty());
    }

    #[test]
    fn deterministic() {
        let g = GridSpec::new(-3.0, 7.0, 333).unwrap();
        let f = |x: f64| (3.0 * x).sin() * (-0.1 * x * x).exp();
        assert_eq!(scan_extrema(f, &g), scan_extrema(f, &g));
    }

    #[test]
    fn maximize_examples() {
        let (x, v) = maximize_scalar(|x: f64| -(x - 2.0).powi(2), 0.0, 5.0, 1e-8).unwrap();
        assert!((x - 2.0).abs() < 1e-8 && v.abs() < 1e-15);
        let (x, _) = maximize_scalar(f64::sin, 0.0, PI, 1e-8).unwrap();
        assert!((x - PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn maximize_detects_valley() {
        let r = maximize_scalar(|x: f64| (x - 2.0).powi(2), 0.0, 5.0, 1e-8);
        assert!(matches!(r, Err(Error::NotUnimodal { .. })));
    }
}
