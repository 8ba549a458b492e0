//! Locally finite complex Borel measures on an open interval, represented as
//! a sorted atom list plus a piecewise-constant density, and the
//! Lebesgue-Stieltjes integral with the half-open orientation
//! `int_c^x = int_[c,x)` for `x > c`.

use crate::error::{Result, SlError};
use crate::piecewise::PiecewiseFunction;
use num_complex::Complex64;

/// Open interval `(a, b)`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Interval> {
        if !(a < b) || a.is_nan() || b.is_nan() {
            return Err(SlError::Invalid(format!("invalid interval ({a}, {b})")));
        }
        Ok(Interval { a, b })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

/// One cell `[start, end)` of the absolutely continuous part, with the
/// constant value of the Radon-Nikodym derivative w.r.t. Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCell {
    pub start: f64,
    pub end: f64,
    pub value: Complex64,
}

/// Signed/complex locally finite Borel measure: atoms + piecewise-constant
/// density. Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    interval: Interval,
    atoms: Vec<(f64, Complex64)>,
    cells: Vec<DensityCell>,
}

impl Measure {
    pub fn zero(interval: Interval) -> Measure {
        Measure { interval, atoms: Vec::new(), cells: Vec::new() }
    }

    /// Adds a point mass. Coincident positions merge by summing weights;
    /// zero-weight atoms are dropped.
    pub fn with_atom(mut self, pos: f64, weight: Complex64) -> Result<Measure> {
        if !self.interval.contains(pos) {
            return Err(SlError::PositionOutsideInterval(pos));
        }
        match self.atoms.binary_search_by(|(p, _)| p.total_cmp(&pos)) {
            Ok(i) => {
                self.atoms[i].1 += weight;
                if self.atoms[i].1 == Complex64::new(0.0, 0.0) {
                    self.atoms.remove(i);
                }
            }
            Err(i) => {
                if weight != Complex64::new(0.0, 0.0) {
                    self.atoms.insert(i, (pos, weight));
                }
            }
        }
        Ok(self)
    }

    /// Adds a density cell `[start, end)`. Cells may not overlap.
    pub fn with_density(mut self, start: f64, end: f64, value: Complex64) -> Result<Measure> {
        if !(start < end) {
            return Err(SlError::Invalid(format!("empty density cell [{start}, {end})")));
        }
        if start < self.interval.a || end > self.interval.b {
            return Err(SlError::PositionOutsideInterval(start.min(end)));
        }
        let cell = DensityCell { start, end, value };
        let i = self
            .cells
            .partition_point(|c| c.start < cell.start);
        let overlaps_prev = i > 0 && self.cells[i - 1].end > start;
        let overlaps_next = i < self.cells.len() && self.cells[i].start < end;
        if overlaps_prev || overlaps_next {
            return Err(SlError::Invalid(format!(
                "density cell [{start}, {end}) overlaps an existing cell"
            )));
        }
        if value != Complex64::new(0.0, 0.0) {
            self.cells.insert(i, cell);
        }
        Ok(self)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn atoms(&self) -> &[(f64, Complex64)] {
        &self.atoms
    }

    pub fn cells(&self) -> &[DensityCell] {
        &self.cells
    }

    /// `mu({x})`.
    pub fn atom_mass(&self, x: f64) -> Complex64 {
        match self.atoms.binary_search_by(|(p, _)| p.total_cmp(&x)) {
            Ok(i) => self.atoms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Density of the AC part at `x` (value of the cell containing `x`).
    pub fn density_at(&self, x: f64) -> Complex64 {
        let i = self.cells.partition_point(|c| c.end <= x);
        if i < self.cells.len() && self.cells[i].start <= x {
            self.cells[i].value
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Total variation over `[lo, hi)`:
    /// atom moduli in the half-open range plus `|density| * length`.
    pub fn total_variation(&self, lo: f64, hi: f64) -> f64 {
        let mut tv = 0.0;
        for &(p, w) in &self.atoms {
            if p >= lo && p < hi {
                tv += w.norm();
            }
        }
        for c in &self.cells {
            let s = c.start.max(lo);
            let e = c.end.min(hi);
            if e > s {
                tv += c.value.norm() * (e - s);
            }
        }
        tv
    }

    /// Plain measure of the half-open set `[lo, hi)`.
    pub fn mass_halfopen(&self, lo: f64, hi: f64) -> Complex64 {
        let mut m = Complex64::new(0.0, 0.0);
        for &(p, w) in &self.atoms {
            if p >= lo && p < hi {
                m += w;
            }
        }
        for c in &self.cells {
            let s = c.start.max(lo);
            let e = c.end.min(hi);
            if e > s {
                m += c.value * (e - s);
            }
        }
        m
    }

    /// True if all atom weights and densities are real.
    pub fn is_real(&self) -> bool {
        self.atoms.iter().all(|(_, w)| w.im == 0.0)
            && self.cells.iter().all(|c| c.value.im == 0.0)
    }

    /// True if all atom weights and densities are real and nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|(_, w)| w.im == 0.0 && w.re >= 0.0)
            && self.cells.iter().all(|c| c.value.im == 0.0 && c.value.re >= 0.0)
    }

    /// Smallest and largest position carrying mass (atoms or cells),
    /// or `None` for the zero measure.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let Some(&(p, _)) = self.atoms.first() {
            lo = lo.min(p);
        }
        if let Some(&(p, _)) = self.atoms.last() {
            hi = hi.max(p);
        }
        if let Some(c) = self.cells.first() {
            lo = lo.min(c.start);
        }
        if let Some(c) = self.cells.last() {
            hi = hi.max(c.end);
        }
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// Positions that must appear in any solver mesh: atoms and cell
    /// boundaries, restricted to `[lo, hi]`.
    pub fn mesh_points(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        for &(p, _) in &self.atoms {
            if p >= lo && p <= hi {
                out.push(p);
            }
        }
        for c in &self.cells {
            if c.start >= lo && c.start <= hi {
                out.push(c.start);
            }
            if c.end >= lo && c.end <= hi {
                out.push(c.end);
            }
        }
    }

    /// Pointwise sum of measures on the same interval.
    pub fn total_variation_measure(parts: &[&Measure]) -> Measure {
        assert!(!parts.is_empty());
        let interval = parts[0].interval;
        let mut m = Measure::zero(interval);
        for part in parts {
            for &(p, w) in &part.atoms {
                m = m.with_atom(p, Complex64::new(w.norm(), 0.0)).expect("atom in interval");
            }
        }
        // overlay |density| cells on the union breakpoint mesh
        let mut cuts: Vec<f64> = Vec::new();
        for part in parts {
            for c in &part.cells {
                cuts.push(c.start);
                cuts.push(c.end);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let v: f64 = parts.iter().map(|p| p.density_at(mid).norm()).sum();
            if v != 0.0 {
                m = m.with_density(w[0], w[1], Complex64::new(v, 0.0)).expect("cell in interval");
            }
        }
        m
    }
}

/// Lebesgue-Stieltjes integral `int_c^x f dmu` with the half-open
/// convention: `int_[c,x)` for `x > c`, `0` at `x = c`, `-int_[x,c)` for
/// `x < c`. Exact for piecewise representations.
pub fn integrate(f: &PiecewiseFunction, mu: &Measure, c: f64, x: f64) -> Result<Complex64> {
    let iv = mu.interval();
    if !iv.contains(c) && c != iv.a && c != iv.b {
        return Err(SlError::PositionOutsideInterval(c));
    }
    if !iv.contains(x) && x != iv.a && x != iv.b {
        return Err(SlError::PositionOutsideInterval(x));
    }
    if x == c {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (lo, hi, sign) = if x > c { (c, x, 1.0) } else { (x, c, -1.0) };
    let (dlo, dhi) = f.domain();
    if lo < dlo - 1e-12 || hi > dhi + 1e-12 {
        return Err(SlError::PositionOutsideInterval(if lo < dlo { lo } else { hi }));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &(p, w) in mu.atoms() {
        if p >= lo && p < hi {
            acc += w * f.value(p);
        }
    }
    for cell in mu.cells() {
        let s = cell.start.max(lo);
        let e = cell.end.min(hi);
        if e > s {
            acc += cell.value * f.integrate_lebesgue(s, e);
        }
    }
    Ok(sign * acc)
}

/// Distribution function `x -> mu(c) + int_c^x dmu` on `[lo, hi]` as a
/// left-continuous piecewise function, anchored at `mu(c) = anchor`.
pub fn distribution_function(
    mu: &Measure,
    c: f64,
    anchor: Complex64,
    lo: f64,
    hi: f64,
) -> PiecewiseFunction {
    let mut nodes = vec![lo, hi, c.clamp(lo, hi)];
    mu.mesh_points(lo, hi, &mut nodes);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    // cell i covers (n_i, n_{i+1}]; its start level is the right limit at
    // n_i, so the atom sitting at n_i is already inside
    let mut pf_cells = Vec::with_capacity(nodes.len() - 1);
    let mut level = Complex64::new(0.0, 0.0);
    for (i, w) in nodes.windows(2).enumerate() {
        if i > 0 {
            level += mu.atom_mass(w[0]);
        }
        let slope = mu.density_at(0.5 * (w[0] + w[1]));
        pf_cells.push(crate::exppoly::ExpPoly::linear(level, slope));
        level += slope * (w[1] - w[0]);
    }
    let pf = PiecewiseFunction::new(nodes, pf_cells).expect("valid mesh");
    // renormalize so that pf(c) = anchor
    let shift = anchor - pf.value(c.clamp(lo, hi));
    pf.add_constant(shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::PiecewiseFunction;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> Complex64 {
        c64(1.0, 0.0)
    }

    fn unit_interval() -> Interval {
        Interval::new(-1.0, 1.0).unwrap()
    }

    fn const_fn(v: Complex64, lo: f64, hi: f64) -> PiecewiseFunction {
        PiecewiseFunction::constant(v, lo, hi)
    }

    #[test]
    fn integrate_zero_integrand() {
        let mu = Measure::zero(unit_interval())
            .with_atom(0.0, c64(2.0, 0.0))
            .unwrap()
            .with_density(-0.5, 0.5, one())
            .unwrap();
        let f = const_fn(c64(0.0, 0.0), -1.0, 1.0);
        assert_eq!(integrate(&f, &mu, -0.5, 0.5).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn integrate_coincident_endpoints() {
        let mu = Measure::zero(unit_interval()).with_atom(0.3, one()).unwrap();
        let f = const_fn(one(), -1.0, 1.0);
        assert_eq!(integrate(&f, &mu, 0.3, 0.3).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn integrate_atom_halfopen_convention() {
        // atom at 0 lies in [-0.5, 0.5)
        let mu = Measure::zero(unit_interval()).with_atom(0.0, c64(2.0, 0.0)).unwrap();
        let f = const_fn(one(), -1.0, 1.0);
        assert_eq!(integrate(&f, &mu, -0.5, 0.5).unwrap(), c64(2.0, 0.0));
        // atom at the left endpoint of the range is included ...
        assert_eq!(integrate(&f, &mu, 0.0, 0.5).unwrap(), c64(2.0, 0.0));
        // ... and excluded at the right endpoint
        assert_eq!(integrate(&f, &mu, -0.5, 0.0).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn atom_mass_lookup() {
        let iv = unit_interval();
        let mu = Measure::zero(iv).with_atom(0.0, c64(2.0, 0.0)).unwrap();
        assert_eq!(mu.atom_mass(0.0), c64(2.0, 0.0));
        assert_eq!(mu.atom_mass(0.3), c64(0.0, 0.0));
        let ac = Measure::zero(iv).with_density(0.0, 1.0 - 1e-9, one()).unwrap();
        assert_eq!(ac.atom_mass(0.5), c64(0.0, 0.0));
    }

    #[test]
    fn atom_merge_and_drop() {
        let mu = Measure::zero(unit_interval())
            .with_atom(0.25, one())
            .unwrap()
            .with_atom(0.25, c64(2.0, 0.0))
            .unwrap();
        assert_eq!(mu.atom_mass(0.25), c64(3.0, 0.0));
        let gone = mu.with_atom(0.25, c64(-3.0, 0.0)).unwrap();
        assert!(gone.atoms().is_empty());
    }

    #[test]
    fn total_variation_cases() {
        let iv = Interval::new(-1.0, 2.0).unwrap();
        let neg = Measure::zero(iv).with_atom(0.0, c64(-3.0, 0.0)).unwrap();
        assert_eq!(neg.total_variation(-0.5, 0.5), 3.0);
        let dens = Measure::zero(iv).with_density(0.0, 1.0, c64(-2.0, 0.0)).unwrap();
        assert!((dens.total_variation(0.0, 1.0) - 2.0).abs() < 1e-15);
        let mixed = Measure::zero(iv)
            .with_atom(0.25, one())
            .unwrap()
            .with_density(0.0, 1.0, one())
            .unwrap();
        // oracle: Riemann-Stieltjes sum of |dmu| on a fine partition
        let n = 200_000;
        let mut oracle = 0.0;
        for i in 0..n {
            let s = i as f64 / n as f64;
            let e = (i + 1) as f64 / n as f64;
            oracle += mixed.mass_halfopen(s, e).norm();
        }
        let tv = mixed.total_variation(0.0, 1.0);
        assert!((tv - 2.0).abs() < 1e-12);
        assert!((tv - oracle).abs() < 1e-9, "tv={tv} oracle={oracle}");
    }

    #[test]
    fn overlapping_density_rejected() {
        let r = Measure::zero(unit_interval())
            .with_density(-0.5, 0.5, one())
            .unwrap()
            .with_density(0.0, 0.75, one());
        assert!(r.is_err());
    }

    #[test]
    fn integrate_rejects_outside_positions() {
        let mu = Measure::zero(unit_interval()).with_atom(0.0, one()).unwrap();
        let f = const_fn(one(), -1.0, 1.0);
        assert!(matches!(
            integrate(&f, &mu, -0.5, 1.5),
            Err(SlError::PositionOutsideInterval(_))
        ));
    }

    #[test]
    fn distribution_function_levels() {
        let mu = Measure::zero(unit_interval())
            .with_atom(0.0, c64(2.0, 0.0))
            .unwrap()
            .with_density(-0.5, 0.5, one())
            .unwrap();
        let pf = distribution_function(&mu, -0.8, c64(0.0, 0.0), -0.9, 0.9);
        // left-continuous: no jump seen at 0 from the left
        assert!((pf.value(0.0) - c64(0.5, 0.0)).norm() < 1e-14);
        assert!((pf.value_right(0.0) - c64(2.5, 0.0)).norm() < 1e-14);
        assert!((pf.value(0.6) - c64(3.0, 0.0)).norm() < 1e-14);
    }
}
