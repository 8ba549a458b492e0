//! First-order linear measure differential equations
//! `dY/domega = (M1 + z*M2) Y + F` with the jump rule at atoms.
//!
//! A solution is left-continuous; crossing an atom at `x` rightwards applies
//! `Y(x+) = Y(x) + omega({x}) (M(x) Y(x) + F(x))`, which in coefficient-atom
//! form reads `Y(x+) = (I + M1({x}) + z M2({x})) Y(x) + F({x})`. Backwards the
//! relation inverts, so uniqueness to the left requires every jump factor
//! between the target and the initial point to be regular. On cells all
//! densities are constant and propagation uses exact matrix exponentials.

use crate::error::{Result, SlError};
use crate::exppoly::ExpPoly;
use crate::linalg::CMat;
use crate::measure::Measure;
use crate::piecewise::PiecewiseFunction;
use num_complex::Complex64;

const SINGULAR_REL: f64 = 1e-12;
/// Cells are split so that ||A|| * len stays below this.
const CELL_STRENGTH: f64 = 4.0;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Coefficient data for `dY/domega = (M1 + z M2) Y + F`.
///
/// Every coefficient entry and forcing component is a measure absolutely
/// continuous w.r.t. `omega`; in this representation that means every atom of
/// a coefficient is an atom of `omega` and densities only live where `omega`
/// has density.
#[derive(Debug, Clone)]
pub struct MeasureSystem {
    omega: Measure,
    m1: Vec<Vec<Measure>>,
    m2: Vec<Vec<Measure>>,
    forcing: Vec<Measure>,
    n: usize,
}

impl MeasureSystem {
    pub fn new(
        omega: Measure,
        m1: Vec<Vec<Measure>>,
        m2: Vec<Vec<Measure>>,
        forcing: Vec<Measure>,
    ) -> Result<MeasureSystem> {
        let n = m1.len();
        if n == 0
            || m1.iter().any(|r| r.len() != n)
            || m2.len() != n
            || m2.iter().any(|r| r.len() != n)
            || forcing.len() != n
        {
            return Err(SlError::Invalid("coefficient shape mismatch".into()));
        }
        if !omega.is_nonnegative() {
            return Err(SlError::Invalid("omega must be a positive measure".into()));
        }
        let sys = MeasureSystem { omega, m1, m2, forcing, n };
        for m in sys.all_measures() {
            for &(p, _) in m.atoms() {
                if sys.omega.atom_mass(p) == czero() {
                    return Err(SlError::Invalid(format!(
                        "coefficient atom at {p} is not an atom of omega"
                    )));
                }
            }
            for cell in m.cells() {
                let mid = 0.5 * (cell.start + cell.end);
                if sys.omega.density_at(mid) == czero() && cell.value != czero() {
                    return Err(SlError::Invalid(format!(
                        "coefficient density on [{}, {}) is not omega-absolutely continuous",
                        cell.start, cell.end
                    )));
                }
            }
        }
        Ok(sys)
    }

    fn all_measures(&self) -> impl Iterator<Item = &Measure> {
        self.m1
            .iter()
            .chain(self.m2.iter())
            .flatten()
            .chain(self.forcing.iter())
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> &Measure {
        &self.omega
    }

    /// Constant matrix of Lebesgue densities of `M1 + z M2` at `x`.
    fn density_matrix(&self, z: Complex64, x: f64) -> CMat {
        let mut a = CMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                a[(i, j)] = self.m1[i][j].density_at(x) + z * self.m2[i][j].density_at(x);
            }
        }
        a
    }

    fn atom_matrix(&self, z: Complex64, x: f64) -> CMat {
        let mut a = CMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                a[(i, j)] = self.m1[i][j].atom_mass(x) + z * self.m2[i][j].atom_mass(x);
            }
        }
        a
    }

    fn forcing_atom(&self, x: f64) -> Vec<Complex64> {
        self.forcing.iter().map(|f| f.atom_mass(x)).collect()
    }

    fn forcing_density(&self, x: f64) -> Vec<Complex64> {
        self.forcing.iter().map(|f| f.density_at(x)).collect()
    }

    fn mesh_points(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        self.omega.mesh_points(lo, hi, out);
        for m in self.all_measures() {
            m.mesh_points(lo, hi, out);
        }
    }
}

/// `I + omega({x}) M(x)` at a point, with the scale-relative singularity flag.
#[derive(Debug, Clone)]
pub struct JumpFactor {
    pub matrix: CMat,
    pub singular: bool,
}

pub fn jump_factor(sys: &MeasureSystem, z: Complex64, x: f64) -> JumpFactor {
    let m = CMat::identity(sys.n).add(&sys.atom_matrix(z, x));
    JumpFactor { singular: is_singular(&m), matrix: m }
}

fn is_singular(m: &CMat) -> bool {
    let scale = m.fro_norm().max(1e-150);
    m.det().norm() < SINGULAR_REL * scale.powi(m.order() as i32)
}

/// How the initial data is meant: value at `c` or right limit at `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    AtX,
    AtXPlus,
}

/// Extra cell forcing that need not be a plain measure: used by the
/// Sturm-Liouville layer where the inhomogeneity is `-g dvarrho` with `g`
/// an exponential-polynomial piecewise function.
pub(crate) struct CellForcing<'a> {
    /// density vector on a cell, local coordinate relative to `x0`
    pub cell: &'a dyn Fn(f64, f64) -> Vec<ExpPoly>,
    /// atom vector at a point
    pub atom: &'a dyn Fn(f64) -> Vec<Complex64>,
    /// additional mesh nodes the forcing needs
    pub mesh: Vec<f64>,
}

/// Solution snapshot: node positions, `(Y(x), Y(x+))` pairs at each node and
/// the exact per-cell solution in closed form.
#[derive(Debug, Clone)]
pub struct Trajectory {
    nodes: Vec<f64>,
    values: Vec<(Vec<Complex64>, Vec<Complex64>)>,
    cells: Vec<CellSolution>,
    n: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct CellSolution {
    pub x0: f64,
    pub x1: f64,
    pub kind: CellKind,
}

#[derive(Debug, Clone)]
pub(crate) enum CellKind {
    /// component functions on the cell, local coordinate `t = x - x0`
    Poly(Vec<ExpPoly>),
    /// homogeneous cell of order > 2: evaluate through the matrix exponential
    Expm { a: CMat, y0: Vec<Complex64> },
}

impl CellSolution {
    fn eval(&self, t: f64) -> Vec<Complex64> {
        match &self.kind {
            CellKind::Poly(polys) => polys.iter().map(|p| p.eval(t)).collect(),
            CellKind::Expm { a, y0 } => a.expm(t).mul_vec(y0),
        }
    }

    fn polys(&self) -> &[ExpPoly] {
        match &self.kind {
            CellKind::Poly(p) => p,
            CellKind::Expm { .. } => {
                panic!("closed-form cells are available for orders 1 and 2 only")
            }
        }
    }
}

impl Trajectory {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Left-continuous value `Y(x)`.
    pub fn value(&self, x: f64) -> Vec<Complex64> {
        if x <= self.nodes[0] {
            return self.values[0].0.clone();
        }
        let i = self.nodes.partition_point(|&n| n < x) - 1;
        if x == self.nodes[i + 1] {
            return self.values[i + 1].0.clone();
        }
        let c = &self.cells[i.min(self.cells.len() - 1)];
        c.eval(x - c.x0)
    }

    /// Right limit `Y(x+)`.
    pub fn value_right(&self, x: f64) -> Vec<Complex64> {
        let last = *self.nodes.last().unwrap();
        if x >= last {
            return self.values[self.values.len() - 1].1.clone();
        }
        if let Ok(i) = self.nodes.binary_search_by(|n| n.total_cmp(&x)) {
            return self.values[i].1.clone();
        }
        self.value(x)
    }

    pub fn node_values(&self) -> &[(Vec<Complex64>, Vec<Complex64>)] {
        &self.values
    }

    /// Extracts one component as a piecewise function over the whole window
    /// (closed-form cells, so orders 1 and 2 only).
    pub fn component(&self, i: usize) -> PiecewiseFunction {
        let cells = self.cells.iter().map(|c| c.polys()[i].clone()).collect();
        PiecewiseFunction::new(self.nodes.clone(), cells).expect("trajectory mesh is valid")
    }
}

/// Solves the initial value problem and reports the trajectory over the hull
/// of `c` and `targets`. Backward steps through a singular jump factor fail
/// with [`SlError::SingularJump`].
pub fn solve_ivp(
    sys: &MeasureSystem,
    z: Complex64,
    c: f64,
    yc: &[Complex64],
    targets: &[f64],
    init: InitKind,
) -> Result<Trajectory> {
    solve_ivp_forced(sys, z, c, yc, targets, init, None)
}

pub(crate) fn solve_ivp_forced(
    sys: &MeasureSystem,
    z: Complex64,
    c: f64,
    yc: &[Complex64],
    targets: &[f64],
    init: InitKind,
    extra_forcing: Option<&CellForcing>,
) -> Result<Trajectory> {
    if yc.len() != sys.n {
        return Err(SlError::Invalid("initial vector has wrong length".into()));
    }
    let has_forcing = extra_forcing.is_some()
        || sys.forcing.iter().any(|f| !f.atoms().is_empty() || !f.cells().is_empty());
    if sys.n > 2 && has_forcing {
        return Err(SlError::Invalid("forced systems are supported for n <= 2".into()));
    }
    let iv = sys.omega.interval();
    for &t in targets.iter().chain(std::iter::once(&c)) {
        if !iv.contains(t) && t != iv.a && t != iv.b {
            return Err(SlError::PositionOutsideInterval(t));
        }
    }
    let mut lo = c;
    let mut hi = c;
    for &t in targets {
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let nodes = build_mesh(sys, z, lo, hi, c, targets, extra_forcing);
    let ncells = nodes.len() - 1;
    let ic = nodes
        .binary_search_by(|n| n.total_cmp(&c))
        .expect("initial point is a mesh node");

    let mut values: Vec<(Vec<Complex64>, Vec<Complex64>)> =
        vec![(vec![czero(); sys.n], vec![czero(); sys.n]); nodes.len()];
    let mut cells: Vec<Option<CellSolution>> = vec![None; ncells];

    // initial value at c
    let y_at_c = match init {
        InitKind::AtX => yc.to_vec(),
        InitKind::AtXPlus => {
            let jf = jump_factor(sys, z, c);
            if jf.singular {
                return Err(SlError::SingularJump(c));
            }
            let fat = total_forcing_atom(sys, extra_forcing, c);
            let shifted: Vec<Complex64> = yc.iter().zip(&fat).map(|(y, f)| y - f).collect();
            jf.matrix.inverse().ok_or(SlError::SingularJump(c))?.mul_vec(&shifted)
        }
    };
    values[ic].0 = y_at_c;

    // march right
    for i in ic..nodes.len() {
        let jf = jump_factor(sys, z, nodes[i]);
        let fat = total_forcing_atom(sys, extra_forcing, nodes[i]);
        let y = values[i].0.clone();
        let mut yp = jf.matrix.mul_vec(&y);
        for (v, f) in yp.iter_mut().zip(&fat) {
            *v += f;
        }
        values[i].1 = yp.clone();
        if i < ncells {
            let cell = propagate_cell(sys, z, nodes[i], nodes[i + 1], &yp, extra_forcing);
            values[i + 1].0 = cell.eval(cell.x1 - cell.x0);
            cells[i] = Some(cell);
        }
    }

    // march left
    for i in (0..ic).rev() {
        // backward through cell i: solution on [nodes[i], nodes[i+1]] with
        // prescribed end value values[i+1].0
        let yend = values[i + 1].0.clone();
        let cell = propagate_cell_backward(sys, z, nodes[i], nodes[i + 1], &yend, extra_forcing);
        let yplus: Vec<Complex64> = cell.eval(0.0);
        values[i].1 = yplus.clone();
        cells[i] = Some(cell);
        // undo the jump at nodes[i]
        let jf = jump_factor(sys, z, nodes[i]);
        if jf.singular {
            return Err(SlError::SingularJump(nodes[i]));
        }
        let fat = total_forcing_atom(sys, extra_forcing, nodes[i]);
        let shifted: Vec<Complex64> = yplus.iter().zip(&fat).map(|(y, f)| y - f).collect();
        values[i].0 = jf
            .matrix
            .inverse()
            .ok_or(SlError::SingularJump(nodes[i]))?
            .mul_vec(&shifted);
    }

    Ok(Trajectory {
        nodes,
        values,
        cells: cells.into_iter().map(|c| c.expect("all cells visited")).collect(),
        n: sys.n,
    })
}

fn total_forcing_atom(
    sys: &MeasureSystem,
    extra: Option<&CellForcing>,
    x: f64,
) -> Vec<Complex64> {
    let mut fat = sys.forcing_atom(x);
    if let Some(cf) = extra {
        for (v, e) in fat.iter_mut().zip((cf.atom)(x)) {
            *v += e;
        }
    }
    fat
}

fn build_mesh(
    sys: &MeasureSystem,
    z: Complex64,
    lo: f64,
    hi: f64,
    c: f64,
    targets: &[f64],
    extra: Option<&CellForcing>,
) -> Vec<f64> {
    let mut nodes = vec![lo, hi, c];
    nodes.extend_from_slice(targets);
    sys.mesh_points(lo, hi, &mut nodes);
    if let Some(cf) = extra {
        nodes.extend(cf.mesh.iter().copied().filter(|&x| x >= lo && x <= hi));
    }
    nodes.retain(|&x| x >= lo && x <= hi);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    if nodes.len() < 2 {
        // degenerate window (c == single target); keep a token cell to the
        // right inside the interval so the trajectory has a mesh
        let eps = 1e-9_f64.max((c.abs() + 1.0) * 1e-12);
        nodes = vec![c, c + eps];
    }
    // split cells that are too strong for single-step propagation
    let mut refined = Vec::with_capacity(nodes.len());
    for w in nodes.windows(2) {
        refined.push(w[0]);
        let len = w[1] - w[0];
        let a = sys.density_matrix(z, 0.5 * (w[0] + w[1]));
        let parts = ((a.fro_norm() * len) / CELL_STRENGTH).ceil().max(1.0) as usize;
        for k in 1..parts {
            refined.push(w[0] + len * k as f64 / parts as f64);
        }
    }
    refined.push(*nodes.last().unwrap());
    refined
}

fn cell_forcing_polys(
    sys: &MeasureSystem,
    extra: Option<&CellForcing>,
    x0: f64,
    x1: f64,
) -> Vec<ExpPoly> {
    let mid = 0.5 * (x0 + x1);
    let mut f: Vec<ExpPoly> = sys
        .forcing_density(mid)
        .into_iter()
        .map(ExpPoly::constant)
        .collect();
    if let Some(cf) = extra {
        for (acc, e) in f.iter_mut().zip((cf.cell)(x0, x1)) {
            *acc = acc.add(&e);
        }
    }
    f
}

/// Fundamental matrix of `Y' = A Y` on a cell as exponential polynomials.
/// For n = 2 this is the exact trace-shifted cosh/sinh form with a series
/// branch near the double-root degeneracy.
fn fundamental_polys(a: &CMat, len: f64) -> Vec<Vec<ExpPoly>> {
    let n = a.order();
    let one = Complex64::new(1.0, 0.0);
    match n {
        1 => vec![vec![ExpPoly::from_term(one, 0, a[(0, 0)])]],
        2 => {
            let mu = a.trace() * 0.5;
            let b11 = a[(0, 0)] - mu;
            let delta = b11 * b11 + a[(0, 1)] * a[(1, 0)];
            let b = [[b11, a[(0, 1)]], [a[(1, 0)], -b11]];
            // cosh(s t) and sinh(s t)/s with s^2 = delta, times e^{mu t}
            let (cosh, sinhc) = if delta.norm() * len * len < 1e-8 {
                // truncated entire series in delta t^2
                let mut cosh = ExpPoly::zero();
                let mut sinhc = ExpPoly::zero();
                let mut dk = one;
                let mut fact2k = 1.0f64;
                let mut fact2k1 = 1.0f64;
                for k in 0..6u32 {
                    if k > 0 {
                        dk *= delta;
                        fact2k *= ((2 * k - 1) * (2 * k)) as f64;
                        fact2k1 *= ((2 * k) * (2 * k + 1)) as f64;
                    }
                    cosh = cosh.add(&ExpPoly::from_term(dk / fact2k, 2 * k, mu));
                    sinhc = sinhc.add(&ExpPoly::from_term(dk / fact2k1, 2 * k + 1, mu));
                    if dk.norm() * len.powi(2 * k as i32) / fact2k < 1e-22 {
                        break;
                    }
                }
                (cosh, sinhc)
            } else {
                let s = delta.sqrt();
                let half = Complex64::new(0.5, 0.0);
                let cosh = ExpPoly::from_term(half, 0, mu + s)
                    .add(&ExpPoly::from_term(half, 0, mu - s));
                let sinhc = ExpPoly::from_term(half / s, 0, mu + s)
                    .add(&ExpPoly::from_term(-half / s, 0, mu - s));
                (cosh, sinhc)
            };
            let mut rows = Vec::with_capacity(2);
            for i in 0..2 {
                let mut row = Vec::with_capacity(2);
                for j in 0..2 {
                    let mut e = sinhc.scale(b[i][j]);
                    if i == j {
                        e = e.add(&cosh);
                    }
                    row.push(e);
                }
                rows.push(row);
            }
            rows
        }
        _ => unreachable!("cell propagation is implemented for n <= 2"),
    }
}

fn propagate_cell(
    sys: &MeasureSystem,
    z: Complex64,
    x0: f64,
    x1: f64,
    y0: &[Complex64],
    extra: Option<&CellForcing>,
) -> CellSolution {
    let n = sys.n;
    let len = x1 - x0;
    let a = sys.density_matrix(z, 0.5 * (x0 + x1));
    if n > 2 {
        return CellSolution { x0, x1, kind: CellKind::Expm { a, y0: y0.to_vec() } };
    }
    let phi = fundamental_polys(&a, len);
    let forcing = cell_forcing_polys(sys, extra, x0, x1);
    let mut poly = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = ExpPoly::zero();
        for j in 0..n {
            p = p.add(&phi[i][j].scale(y0[j]));
            if !forcing[j].is_zero() {
                p = p.add(&phi[i][j].convolve(&forcing[j], len));
            }
        }
        poly.push(p);
    }
    CellSolution { x0, x1, kind: CellKind::Poly(poly) }
}

fn propagate_cell_backward(
    sys: &MeasureSystem,
    z: Complex64,
    x0: f64,
    x1: f64,
    yend: &[Complex64],
    extra: Option<&CellForcing>,
) -> CellSolution {
    let n = sys.n;
    let len = x1 - x0;
    let a = sys.density_matrix(z, 0.5 * (x0 + x1));
    if n > 2 {
        let y0 = a.expm(-len).mul_vec(yend);
        return CellSolution { x0, x1, kind: CellKind::Expm { a, y0 } };
    }
    let phi = fundamental_polys(&a, len);
    let forcing = cell_forcing_polys(sys, extra, x0, x1);
    // particular solution with zero start value
    let mut particular = vec![ExpPoly::zero(); n];
    let mut phi_end = CMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            phi_end[(i, j)] = phi[i][j].eval(len);
            if !forcing[j].is_zero() {
                particular[i] = particular[i].add(&phi[i][j].convolve(&forcing[j], len));
            }
        }
    }
    let rhs: Vec<Complex64> = yend
        .iter()
        .zip(&particular)
        .map(|(y, p)| y - p.eval(len))
        .collect();
    // matrix exponentials are invertible
    let y0 = phi_end.inverse().expect("fundamental matrix is regular").mul_vec(&rhs);
    let mut poly = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = particular[i].clone();
        for j in 0..n {
            p = p.add(&phi[i][j].scale(y0[j]));
        }
        poly.push(p);
    }
    CellSolution { x0, x1, kind: CellKind::Poly(poly) }
}

/// Atoms in `[lo, hi]` whose jump factor is singular at this `z`: the points
/// where unique solvability to the left fails.
pub fn check_uniqueness(sys: &MeasureSystem, z: Complex64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for &(p, _) in sys.omega.atoms() {
        if p >= lo && p <= hi && jump_factor(sys, z, p).singular {
            out.push(p);
        }
    }
    out
}
