//! Collocation grids on [-1, 1] and the functions sampled on them.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Smallest admissible Chebyshev grid.
pub const MIN_NODES: usize = 33;

/// Ordered collocation nodes on [-1, 1] with barycentric weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    bary: Vec<f64>,
    chebyshev: bool,
}

pub type SharedGrid = Arc<Grid>;

/// Chebyshev-extrema grid with `n` (odd, >= 33) nodes.
pub fn make_grid(n: usize) -> Result<SharedGrid> {
    Grid::chebyshev(n).map(Arc::new)
}

impl Grid {
    pub fn chebyshev(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Grid(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        if n % 2 == 0 {
            return Err(Error::Grid(format!("node count must be odd so that 0 is a node, got {n}")));
        }
        let m = n - 1;
        let mid = m / 2;
        let mut nodes = vec![0.0; n];
        for k in 0..mid {
            // sin form keeps the nesting n -> 2n-1 bit-exact
            let num = 2 * k as i64 - m as i64;
            let x = (PI * num as f64 / (2 * m) as f64).sin();
            nodes[k] = x;
            nodes[m - k] = -x;
        }
        nodes[0] = -1.0;
        nodes[m] = 1.0;
        nodes[mid] = 0.0;
        let bary = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Ok(Self { nodes, bary, chebyshev: true })
    }

    /// Arbitrary strictly increasing nodes including both endpoints.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 2 {
            return Err(Error::Grid("need at least two nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Grid("non-finite node".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Grid("nodes must be strictly increasing".into()));
        }
        if (nodes[0] + 1.0).abs() > 1e-12 || (nodes[n - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::Grid("endpoints -1 and 1 must be nodes".into()));
        }
        if n >= MIN_NODES && n % 2 == 1 {
            let cheb = Grid::chebyshev(n)?;
            if cheb.nodes.iter().zip(&nodes).all(|(a, b)| (a - b).abs() <= 1e-12) {
                return Ok(cheb);
            }
        }
        let mut bary = vec![1.0; n];
        for j in 0..n {
            for k in 0..n {
                if k != j {
                    // capacity scaling: interval length 2
                    bary[j] *= 2.0 / (nodes[j] - nodes[k]);
                }
            }
        }
        let scale = bary.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        for w in &mut bary {
            *w /= scale;
        }
        Ok(Self { nodes, bary, chebyshev: false })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn is_chebyshev(&self) -> bool {
        self.chebyshev
    }

    /// Nodes mirror exactly (to 1e-14) under x -> -x.
    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (self.nodes[i] + self.nodes[n - 1 - i]).abs() <= 1e-14)
    }

    /// The nested refinement n -> 2n - 1.
    pub fn refine(&self) -> Result<Grid> {
        if !self.chebyshev {
            return Err(Error::Grid("only Chebyshev grids refine".into()));
        }
        Grid::chebyshev(2 * self.len() - 1)
    }

    /// Index `k` with `nodes[k] <= x <= nodes[k + 1]`.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.len();
        match self.nodes.binary_search_by(|v| v.partial_cmp(&x).expect("finite nodes")) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Largest spacing among the node interval containing `x` and its neighbours.
    pub fn local_spacing(&self, x: f64) -> f64 {
        let k = self.locate(x);
        let n = self.len();
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(n - 2);
        (lo..=hi).map(|i| self.nodes[i + 1] - self.nodes[i]).fold(0.0, f64::max)
    }

    /// Values of all Lagrange basis polynomials at `y`.
    pub fn lagrange_row(&self, y: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        for (j, &x) in self.nodes.iter().enumerate() {
            if y == x {
                out.fill(0.0);
                out[j] = 1.0;
                return;
            }
        }
        let mut denom = 0.0;
        for j in 0..self.len() {
            let t = self.bary[j] / (y - self.nodes[j]);
            out[j] = t;
            denom += t;
        }
        for v in out.iter_mut() {
            *v /= denom;
        }
    }

    /// Global polynomial interpolant of `values` at `y`.
    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..self.len() {
            let d = y - self.nodes[j];
            if d == 0.0 {
                return values[j];
            }
            let t = self.bary[j] / d;
            num += t * values[j];
            den += t;
        }
        num / den
    }

    /// Local interpolating polynomial of degree `order` on the node interval
    /// `interval`; returns value, first and second derivative at `y`.
    pub fn local_poly(&self, values: &[f64], interval: usize, order: usize, y: f64) -> (f64, f64, f64) {
        let n = self.len();
        let order = order.min(n - 1);
        let start = (interval as isize - (order as isize - 1) / 2).clamp(0, (n - 1 - order) as isize) as usize;
        let xs = &self.nodes[start..=start + order];
        let mut coef: Vec<f64> = values[start..=start + order].to_vec();
        // divided differences
        for level in 1..=order {
            for i in (level..=order).rev() {
                coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - level]);
            }
        }
        let mut p = coef[order];
        let mut dp = 0.0;
        let mut d2p = 0.0;
        for i in (0..order).rev() {
            let t = y - xs[i];
            d2p = d2p * t + 2.0 * dp;
            dp = dp * t + p;
            p = p * t + coef[i];
        }
        (p, dp, d2p)
    }
}

/// A function sampled on a grid and extended by zero outside [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: SharedGrid,
    values: Vec<f64>,
    sup_norm: f64,
}

impl GridFunction {
    pub fn new(grid: SharedGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite grid value".into()));
        }
        let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { grid, values, sup_norm })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: SharedGrid, f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: SharedGrid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n], sup_norm: 0.0 }
    }

    pub fn grid(&self) -> &SharedGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::new(self.grid.clone(), values).expect("scaling keeps values finite")
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Value at an arbitrary point: global interpolant inside, zero outside.
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        self.grid.interpolate(&self.values, x)
    }

    /// Sup-norm distance to another function on the same grid.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// CSV with header `x,value` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,value\n");
        for (x, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(s, "{x:.16e},{v:.16e}").expect("writing to a String");
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn from_csv_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
        if header.trim() != "x,value" {
            return Err(Error::Parse(format!("expected header `x,value`, got `{}`", header.trim())));
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 2)));
            };
            let x: f64 = a.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            let v: f64 = b.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            xs.push(x);
            vs.push(v);
        }
        let grid = Arc::new(Grid::from_nodes(xs)?);
        Self::new(grid, vs)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(f))
    }
}
