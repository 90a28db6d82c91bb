use std::ops::Range;

use num_complex::Complex;
use serde::Serialize;

use crate::equation::Side;
use crate::error::{Error, Result};
use crate::io::{GridSample, Metadata, PlaneTag};
use crate::scalar::{to_pair, Cplx, Scalar};

/// A rectangular sample lattice in the half-strip `∓Re z > ρ`, `|Im z| < σ`.
///
/// Rows sit at `Im z = i·h` with `|i·h| < σ`; columns at
/// `|Re z| = ρ + h·(n+1)` for `n < columns`, where `h = 1/per_unit`. Shifting
/// a grid point by one unit lands on another lattice point of the same row.
#[derive(Clone, Debug, PartialEq)]
pub struct StripDomain<T: Scalar> {
    pub rho: T,
    pub sigma: T,
    pub side: Side,
    pub per_unit: usize,
    pub columns: usize,
    rows: Vec<T>,
    grid: Vec<Cplx<T>>,
}

impl<T: Scalar> StripDomain<T> {
    /// Lattice with spacing `1/per_unit` that covers `width` units of `Re z`.
    pub fn lattice(rho: T, sigma: T, side: Side, per_unit: usize, width: usize) -> Result<Self> {
        if !(rho > T::zero()) || !(sigma > T::zero()) || per_unit == 0 || width == 0 {
            return Err(Error::Invalid(
                "strip needs ρ > 0, σ > 0, per_unit ≥ 1, width ≥ 1".into(),
            ));
        }
        let h = T::one() / T::int(per_unit as i64);
        let top = ((sigma / h).ceil().to_i64().unwrap_or(0) - 1).max(0);
        let rows: Vec<T> = (-top..=top)
            .map(|i| h * T::int(i))
            .filter(|im| im.abs() < sigma)
            .collect();
        let columns = width * per_unit;
        let sgn = match side {
            Side::Left => -T::one(),
            Side::Right => T::one(),
        };
        let mut grid = Vec::with_capacity(rows.len() * columns);
        for &im in &rows {
            for n in 0..columns {
                grid.push(Complex::new(sgn * (rho + h * T::int(n as i64 + 1)), im));
            }
        }
        Ok(StripDomain {
            rho,
            sigma,
            side,
            per_unit,
            columns,
            rows,
            grid,
        })
    }

    pub fn grid(&self) -> &[Cplx<T>] {
        &self.grid
    }

    pub fn rows(&self) -> &[T] {
        &self.rows
    }

    pub fn spacing(&self) -> T {
        T::one() / T::int(self.per_unit as i64)
    }

    pub fn contains(&self, z: Cplx<T>) -> bool {
        let inside = match self.side {
            Side::Left => z.re < -self.rho,
            Side::Right => z.re > self.rho,
        };
        inside && z.im.abs() < self.sigma
    }

    /// Same lattice shape on a different `ρ`.
    pub fn with_rho(&self, rho: T) -> Result<Self> {
        Self::lattice(
            rho,
            self.sigma,
            self.side,
            self.per_unit,
            self.columns / self.per_unit,
        )
    }
}

/// Grid points threaded into unit-step lines, each extended by `padding`
/// nodes away from the strip boundary.
///
/// Node `0` of a line is the one closest to the boundary; node `i+1` is
/// node `i` moved one unit further out.
#[derive(Clone, Debug)]
pub struct Lattice<T: Scalar> {
    pub nodes: Vec<Cplx<T>>,
    pub lines: Vec<Range<usize>>,
    /// Flat node index of each grid point.
    pub grid_node: Vec<usize>,
    pub padding: usize,
}

impl<T: Scalar> Lattice<T> {
    pub fn new(domain: &StripDomain<T>, padding: usize) -> Self {
        let s = domain.per_unit;
        let cols = domain.columns;
        let step = match domain.side {
            Side::Left => -T::one(),
            Side::Right => T::one(),
        };
        let mut nodes = Vec::new();
        let mut lines = Vec::new();
        let mut grid_node = vec![0; domain.grid.len()];
        for r in 0..domain.rows.len() {
            for q in 0..s.min(cols) {
                let start = nodes.len();
                let on_grid: Vec<usize> = (q..cols).step_by(s).collect();
                for &n in &on_grid {
                    grid_node[r * cols + n] = nodes.len();
                    nodes.push(domain.grid[r * cols + n]);
                }
                let mut last = *nodes.last().expect("every residue class has a grid point");
                for _ in 0..padding {
                    last.re += step;
                    nodes.push(last);
                }
                lines.push(start..nodes.len());
            }
        }
        Lattice {
            nodes,
            lines,
            grid_node,
            padding,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Flat index of the node one unit closer to the boundary (`z ± 1`
    /// towards the strip edge), if the line has one.
    pub fn inward(&self, i: usize) -> Option<usize> {
        let line = self.line_of(i);
        (i > line.start).then(|| i - 1)
    }

    /// Flat index of the node one unit further out.
    pub fn outward(&self, i: usize) -> Option<usize> {
        let line = self.line_of(i);
        (i + 1 < line.end).then_some(i + 1)
    }

    fn line_of(&self, i: usize) -> &Range<usize> {
        let k = self.lines.partition_point(|l| l.end <= i);
        &self.lines[k]
    }

    /// `out[i] = tail[line] + Σ d[l]` over later nodes `l > i` of the same
    /// line (`l ≥ i` when `inclusive`).
    pub fn suffix_sums(&self, d: &[Cplx<T>], tails: &[Cplx<T>], inclusive: bool) -> Vec<Cplx<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); d.len()];
        for (line, &tail) in self.lines.iter().zip(tails) {
            let mut acc = tail;
            for i in line.clone().rev() {
                if inclusive {
                    acc += d[i];
                    out[i] = acc;
                } else {
                    out[i] = acc;
                    acc += d[i];
                }
            }
        }
        out
    }
}

/// Truncation of the operator sums: `k` unit steps of padding beyond the
/// grid (`0` picks it from the tail estimate) and `j` terms of the `y`-series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub k: usize,
    pub j: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { k: 0, j: 20 }
    }
}

/// Values of a solved fixed point on the grid of its domain.
#[derive(Clone, Debug)]
pub struct StripFunction<T: Scalar> {
    pub domain: StripDomain<T>,
    /// Parallel to `domain.grid()`.
    pub values: Vec<Cplx<T>>,
    pub asymptote: Cplx<T>,
    pub truncation: Truncation,
    pub iterations: usize,
    pub last_step: T,
    /// Equation residual at grid points whose unit neighbour towards the
    /// boundary is also a lattice node.
    pub residuals: Vec<Option<T>>,
}

impl<T: Scalar> StripFunction<T> {
    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .flatten()
            .fold(T::zero(), |m, &r| m.max(r))
    }

    /// `sup |w − α|` over the grid.
    pub fn distance_from_asymptote(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| m.max((*v - self.asymptote).norm()))
    }

    pub fn to_grid_sample(&self, metadata: Metadata) -> GridSample {
        let pair = |z: Cplx<T>| {
            let (a, b) = to_pair(z);
            [a, b]
        };
        GridSample::new(
            PlaneTag::ZPlane,
            self.domain.grid().iter().map(|&z| pair(z)).collect(),
            self.values.iter().map(|&w| pair(w)).collect(),
            self.residuals.iter().map(|r| r.map(|r| r.f64())).collect(),
            metadata,
        )
        .expect("grid, values and residuals are parallel")
    }

    /// Grid values along row `r`, ordered away from the boundary.
    pub fn row(&self, r: usize) -> &[Cplx<T>] {
        let c = self.domain.columns;
        &self.values[r * c..(r + 1) * c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn lattice_points_lie_in_the_strip() {
        let d = StripDomain::<f64>::lattice(10.0, 1.0, Side::Left, 2, 5).unwrap();
        assert_eq!(d.rows(), &[-0.5, 0.0, 0.5]);
        assert_eq!(d.grid().len(), 30);
        assert!(d.grid().iter().all(|&z| d.contains(z)));
        assert_eq!(d.grid()[0], cx(-10.5, -0.5));
        let r = StripDomain::<f64>::lattice(3.0, 0.3, Side::Right, 1, 4).unwrap();
        assert_eq!(r.rows(), &[0.0]);
        assert_eq!(
            r.grid(),
            &[cx(4.0, 0.0), cx(5.0, 0.0), cx(6.0, 0.0), cx(7.0, 0.0)]
        );
    }

    #[test]
    fn lines_step_by_one_unit() {
        let d = StripDomain::<f64>::lattice(10.0, 1.0, Side::Left, 2, 3).unwrap();
        let l = Lattice::new(&d, 4);
        assert_eq!(l.lines.len(), 6);
        for line in &l.lines {
            assert_eq!(line.len(), 3 + 4);
            for i in line.start + 1..line.end {
                assert_eq!(l.nodes[i] - l.nodes[i - 1], cx(-1.0, 0.0));
            }
        }
        for (g, &n) in l.grid_node.iter().enumerate() {
            assert_eq!(l.nodes[n], d.grid()[g]);
        }
        assert_eq!(l.inward(l.lines[1].start), None);
        assert_eq!(l.outward(l.lines[1].start), Some(l.lines[1].start + 1));
        assert_eq!(l.outward(l.lines[1].end - 1), None);
    }

    #[test]
    fn suffix_sums_match_direct_sums() {
        let d = StripDomain::<f64>::lattice(1.0, 0.5, Side::Right, 1, 3).unwrap();
        let l = Lattice::new(&d, 2);
        let vals: Vec<Cplx<f64>> = (0..l.len()).map(|i| cx(i as f64, 1.0)).collect();
        let ex = l.suffix_sums(&vals, &[cx(0.5, 0.0)], false);
        let inc = l.suffix_sums(&vals, &[cx(0.5, 0.0)], true);
        for i in 0..l.len() {
            let later: Cplx<f64> = vals[i + 1..].iter().sum();
            assert_eq!(ex[i], later + cx(0.5, 0.0));
            assert_eq!(inc[i], later + vals[i] + cx(0.5, 0.0));
        }
    }
}
