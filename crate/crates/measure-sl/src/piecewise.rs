//! Left-continuous piecewise functions with closed-form cells.
//!
//! Cell `i` lives on `(nodes[i], nodes[i+1]]` in the left-continuous reading:
//! `value(x)` uses the cell to the *left* of a node, `value_right(x)` the
//! cell to the right, so jumps sit exactly at mesh nodes.

use crate::error::{Result, SlError};
use crate::exppoly::ExpPoly;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    nodes: Vec<f64>,
    cells: Vec<ExpPoly>,
}

impl PiecewiseFunction {
    pub fn new(nodes: Vec<f64>, cells: Vec<ExpPoly>) -> Result<PiecewiseFunction> {
        if nodes.len() < 2 || cells.len() + 1 != nodes.len() {
            return Err(SlError::Invalid(format!(
                "mesh needs n+1 nodes for n cells, got {} nodes / {} cells",
                nodes.len(),
                cells.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SlError::Invalid("mesh nodes must be strictly increasing".into()));
        }
        Ok(PiecewiseFunction { nodes, cells })
    }

    pub fn constant(v: Complex64, lo: f64, hi: f64) -> PiecewiseFunction {
        PiecewiseFunction::new(vec![lo, hi], vec![ExpPoly::constant(v)]).expect("two nodes")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cells(&self) -> &[ExpPoly] {
        &self.cells
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    fn clamp_domain(&self, x: f64) -> f64 {
        x.clamp(self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Left-continuous value `f(x)`.
    pub fn value(&self, x: f64) -> Complex64 {
        let x = self.clamp_domain(x);
        if x == self.nodes[0] {
            return self.cells[0].eval(0.0);
        }
        let i = self.nodes.partition_point(|&n| n < x) - 1;
        self.cells[i].eval(x - self.nodes[i])
    }

    /// Right limit `f(x+)`.
    pub fn value_right(&self, x: f64) -> Complex64 {
        let x = self.clamp_domain(x);
        let last = self.cells.len() - 1;
        let i = self.nodes.partition_point(|&n| n <= x).saturating_sub(1).min(last);
        self.cells[i].eval(x - self.nodes[i])
    }

    /// Lebesgue integral over `[s0, s1]` (subset of the domain).
    pub fn integrate_lebesgue(&self, s0: f64, s1: f64) -> Complex64 {
        debug_assert!(s0 <= s1);
        let s0 = self.clamp_domain(s0);
        let s1 = self.clamp_domain(s1);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.cells.len() {
            let lo = self.nodes[i].max(s0);
            let hi = self.nodes[i + 1].min(s1);
            if hi > lo {
                acc += self.cells[i].integrate(lo - self.nodes[i], hi - self.nodes[i]);
            }
        }
        acc
    }

    pub fn scale(&self, c: Complex64) -> PiecewiseFunction {
        PiecewiseFunction {
            nodes: self.nodes.clone(),
            cells: self.cells.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn add_constant(&self, c: Complex64) -> PiecewiseFunction {
        let k = ExpPoly::constant(c);
        PiecewiseFunction {
            nodes: self.nodes.clone(),
            cells: self.cells.iter().map(|p| p.add(&k)).collect(),
        }
    }

    pub fn conj(&self) -> PiecewiseFunction {
        PiecewiseFunction {
            nodes: self.nodes.clone(),
            cells: self.cells.iter().map(ExpPoly::conj).collect(),
        }
    }

    pub fn derivative(&self) -> PiecewiseFunction {
        PiecewiseFunction {
            nodes: self.nodes.clone(),
            cells: self.cells.iter().map(ExpPoly::derivative).collect(),
        }
    }

    /// `a*self + b*other`; meshes must agree.
    pub fn combine(
        &self,
        a: Complex64,
        other: &PiecewiseFunction,
        b: Complex64,
    ) -> Result<PiecewiseFunction> {
        if self.nodes != other.nodes {
            return Err(SlError::Invalid("mesh mismatch in combine".into()));
        }
        Ok(PiecewiseFunction {
            nodes: self.nodes.clone(),
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(p, q)| p.scale(a).add(&q.scale(b)))
                .collect(),
        })
    }

    /// Pointwise product; meshes must agree.
    pub fn mul(&self, other: &PiecewiseFunction) -> Result<PiecewiseFunction> {
        if self.nodes != other.nodes {
            return Err(SlError::Invalid("mesh mismatch in mul".into()));
        }
        Ok(PiecewiseFunction {
            nodes: self.nodes.clone(),
            cells: self.cells.iter().zip(&other.cells).map(|(p, q)| p.mul(q)).collect(),
        })
    }

    /// Re-anchors the function onto a finer mesh. Every new node must fall
    /// inside the current domain; existing jump nodes must reappear.
    pub fn on_mesh(&self, nodes: &[f64]) -> Result<PiecewiseFunction> {
        let (lo, hi) = self.domain();
        if nodes.first().map(|&n| n < lo - 1e-12).unwrap_or(true)
            || nodes.last().map(|&n| n > hi + 1e-12).unwrap_or(true)
        {
            return Err(SlError::Invalid("target mesh exceeds the domain".into()));
        }
        for &n in &self.nodes {
            if n >= nodes[0] && n <= *nodes.last().unwrap() && !contains_sorted(nodes, n) {
                return Err(SlError::Invalid(format!("target mesh drops node {n}")));
            }
        }
        let mut cells = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let i = self.nodes.partition_point(|&n| n < mid) - 1;
            cells.push(self.cells[i].shift(w[0] - self.nodes[i]));
        }
        PiecewiseFunction::new(nodes.to_vec(), cells)
    }

    /// Union mesh of two functions over the intersection of their domains.
    pub fn union_mesh(&self, other: &PiecewiseFunction) -> Vec<f64> {
        let lo = self.nodes[0].max(other.nodes[0]);
        let hi = self.nodes.last().unwrap().min(*other.nodes.last().unwrap());
        let mut nodes: Vec<f64> = self
            .nodes
            .iter()
            .chain(other.nodes.iter())
            .copied()
            .filter(|&n| n >= lo && n <= hi)
            .collect();
        nodes.push(lo);
        nodes.push(hi);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        nodes
    }
}

fn contains_sorted(nodes: &[f64], x: f64) -> bool {
    nodes.binary_search_by(|n| n.total_cmp(&x)).is_ok()
}
