//! The measure differential expression
//! `tau f = d/dvarrho (-df/dvarsigma + int f dchi)`,
//! its quasi-solutions, Wronskians and identities.
//!
//! A solution pair `(f, f^[1])` solves the equivalent 2x2 system
//! `du = u^[1] dvarsigma`, `du^[1] = u dchi - (z u + g) dvarrho`,
//! which is handed to the measure ODE engine in [`crate::mde`].

use crate::error::{HypothesisClause, Result, SlError};
use crate::exppoly::ExpPoly;
use crate::measure::{Interval, Measure};
use crate::mde::{self, CellForcing, InitKind, MeasureSystem};
use crate::piecewise::PiecewiseFunction;
use num_complex::Complex64;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Validated coefficient triple `(varrho, varsigma, chi)` together with the
/// derived quantities that the rest of the crate keeps asking for.
#[derive(Debug, Clone)]
pub struct TauExpression {
    varrho: Measure,
    varsigma: Measure,
    chi: Measure,
    omega: Measure,
    interval: Interval,
    alpha_rho: f64,
    beta_rho: f64,
    window: (f64, f64),
    regular_a: bool,
    regular_b: bool,
    one_point: bool,
    system: MeasureSystem,
}

impl TauExpression {
    pub fn varrho(&self) -> &Measure {
        &self.varrho
    }

    pub fn varsigma(&self) -> &Measure {
        &self.varsigma
    }

    pub fn chi(&self) -> &Measure {
        &self.chi
    }

    /// `|varsigma| + |chi| + |varrho|`.
    pub fn omega(&self) -> &Measure {
        &self.omega
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// `inf supp(varrho)`.
    pub fn alpha_rho(&self) -> f64 {
        self.alpha_rho
    }

    /// `sup supp(varrho)`.
    pub fn beta_rho(&self) -> f64 {
        self.beta_rho
    }

    /// Compact window on which solutions are computed: the interval itself
    /// when finite, otherwise the hull of the supplied coefficient data.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn regular_at_a(&self) -> bool {
        self.regular_a
    }

    pub fn regular_at_b(&self) -> bool {
        self.regular_b
    }

    /// True when `supp(varrho)` is the single point admitted by the
    /// one-point constructor.
    pub fn is_one_point(&self) -> bool {
        self.one_point
    }

    pub(crate) fn system(&self) -> &MeasureSystem {
        &self.system
    }

    /// Support of `varrho` as maximal closed pieces (atoms and cells merged).
    pub fn support_pieces(&self) -> Vec<(f64, f64)> {
        support_pieces_of(&self.varrho)
    }
}

fn support_pieces_of(varrho: &Measure) -> Vec<(f64, f64)> {
    let mut pieces: Vec<(f64, f64)> = varrho
        .atoms()
        .iter()
        .map(|&(p, _)| (p, p))
        .chain(varrho.cells().iter().map(|c| (c.start, c.end)))
        .collect();
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for p in pieces {
        match merged.last_mut() {
            Some(last) if p.0 <= last.1 => last.1 = last.1.max(p.1),
            _ => merged.push(p),
        }
    }
    merged
}

/// Validates the coefficient hypothesis and assembles the expression.
/// `supp(varrho)` must contain more than one point; use
/// [`build_tau_one_point`] for the single-Dirac case.
pub fn build_tau(varrho: Measure, varsigma: Measure, chi: Measure) -> Result<TauExpression> {
    build_tau_impl(varrho, varsigma, chi, false)
}

/// Variant admitting `varrho = rho_0 * delta_{x_0}` (one-point problems).
pub fn build_tau_one_point(
    varrho: Measure,
    varsigma: Measure,
    chi: Measure,
) -> Result<TauExpression> {
    build_tau_impl(varrho, varsigma, chi, true)
}

fn build_tau_impl(
    varrho: Measure,
    varsigma: Measure,
    chi: Measure,
    allow_one_point: bool,
) -> Result<TauExpression> {
    let interval = varrho.interval();
    if varsigma.interval() != interval || chi.interval() != interval {
        return Err(SlError::Invalid(
            "coefficient measures live on different intervals".into(),
        ));
    }
    if !varrho.is_nonnegative() {
        return Err(SlError::HypothesisViolation(HypothesisClause::VarrhoPositive));
    }
    if !chi.is_real() {
        return Err(SlError::HypothesisViolation(HypothesisClause::ChiReal));
    }
    if !varsigma.is_real() {
        return Err(SlError::HypothesisViolation(HypothesisClause::VarsigmaReal));
    }

    let rho_hull = varrho
        .support_hull()
        .ok_or(SlError::HypothesisViolation(HypothesisClause::SupportSize))?;
    let one_point = varrho.cells().is_empty() && varrho.atoms().len() == 1;
    if one_point && !allow_one_point {
        return Err(SlError::HypothesisViolation(HypothesisClause::SupportSize));
    }

    // varsigma must be supported on the whole interval; for unbounded
    // intervals the check runs over the hull of the supplied data
    let mut data_lo = rho_hull.0;
    let mut data_hi = rho_hull.1;
    for m in [&varsigma, &chi] {
        if let Some((lo, hi)) = m.support_hull() {
            data_lo = data_lo.min(lo);
            data_hi = data_hi.max(hi);
        }
    }
    let cover_lo = if interval.a.is_finite() { interval.a } else { data_lo };
    let cover_hi = if interval.b.is_finite() { interval.b } else { data_hi };
    let mut reach = cover_lo;
    for c in varsigma.cells() {
        if c.start > reach {
            break;
        }
        reach = reach.max(c.end);
    }
    if reach < cover_hi {
        return Err(SlError::HypothesisViolation(HypothesisClause::VarsigmaSupport));
    }

    // no shared point masses
    for &(p, _) in varsigma.atoms() {
        if varrho.atom_mass(p) != czero() || chi.atom_mass(p) != czero() {
            return Err(SlError::HypothesisViolation(HypothesisClause::SharedAtom));
        }
    }

    // sign condition on gaps of supp(varrho): all varsigma/chi weight inside
    // a gap must carry one common sign
    let pieces = support_pieces_of(&varrho);
    for gap in pieces.windows(2) {
        let (glo, ghi) = (gap[0].1, gap[1].0);
        let mut pos = false;
        let mut neg = false;
        let mut scan = |v: f64| {
            if v > 0.0 {
                pos = true;
            } else if v < 0.0 {
                neg = true;
            }
        };
        for m in [&varsigma, &chi] {
            for &(p, w) in m.atoms() {
                if p > glo && p < ghi {
                    scan(w.re);
                }
            }
            for c in m.cells() {
                if c.end > glo && c.start < ghi {
                    scan(c.value.re);
                }
            }
        }
        if pos && neg {
            return Err(SlError::HypothesisViolation(HypothesisClause::GapSign));
        }
    }

    let omega = Measure::total_variation_measure(&[&varsigma, &chi, &varrho]);
    let window = (
        if interval.a.is_finite() { interval.a } else { data_lo },
        if interval.b.is_finite() { interval.b } else { data_hi },
    );

    // 2x2 system: d(u, u1) = [[0, dvarsigma],[dchi - z dvarrho, 0]] (u, u1)
    let zero = Measure::zero(interval);
    let mut neg_rho = Measure::zero(interval);
    for &(p, w) in varrho.atoms() {
        neg_rho = neg_rho.with_atom(p, -w)?;
    }
    for c in varrho.cells() {
        neg_rho = neg_rho.with_density(c.start, c.end, -c.value)?;
    }
    let system = MeasureSystem::new(
        omega.clone(),
        vec![vec![zero.clone(), varsigma.clone()], vec![chi.clone(), zero.clone()]],
        vec![vec![zero.clone(), zero.clone()], vec![neg_rho, zero.clone()]],
        vec![zero.clone(), zero],
    )?;

    Ok(TauExpression {
        alpha_rho: rho_hull.0,
        beta_rho: rho_hull.1,
        regular_a: interval.a.is_finite(),
        regular_b: interval.b.is_finite(),
        one_point,
        window,
        omega,
        interval,
        varrho,
        varsigma,
        chi,
        system,
    })
}

/// Solution pair `(f, f^[1])` of `(tau - z) f = g`, sharing one mesh.
#[derive(Debug, Clone)]
pub struct QuasiSolution {
    f: PiecewiseFunction,
    qd: PiecewiseFunction,
    z: Complex64,
    g: Option<PiecewiseFunction>,
}

impl QuasiSolution {
    pub fn value(&self, x: f64) -> Complex64 {
        self.f.value(x)
    }

    pub fn value_right(&self, x: f64) -> Complex64 {
        self.f.value_right(x)
    }

    /// First quasi-derivative `f^[1](x)`.
    pub fn qderiv(&self, x: f64) -> Complex64 {
        self.qd.value(x)
    }

    pub fn qderiv_right(&self, x: f64) -> Complex64 {
        self.qd.value_right(x)
    }

    pub fn f(&self) -> &PiecewiseFunction {
        &self.f
    }

    pub fn quasi_derivative(&self) -> &PiecewiseFunction {
        &self.qd
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn inhomogeneity(&self) -> Option<&PiecewiseFunction> {
        self.g.as_ref()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.f.domain()
    }

    /// `a*self + b*other` (same mesh; both must solve at the same `z`).
    pub fn combine(
        &self,
        a: Complex64,
        other: &QuasiSolution,
        b: Complex64,
    ) -> Result<QuasiSolution> {
        let g = match (&self.g, &other.g) {
            (None, None) => None,
            (Some(g1), None) => Some(g1.scale(a)),
            (None, Some(g2)) => Some(g2.scale(b)),
            (Some(g1), Some(g2)) => {
                let mesh = g1.union_mesh(g2);
                Some(g1.on_mesh(&mesh)?.combine(a, &g2.on_mesh(&mesh)?, b)?)
            }
        };
        Ok(QuasiSolution {
            f: self.f.combine(a, &other.f, b)?,
            qd: self.qd.combine(a, &other.qd, b)?,
            z: self.z,
            g,
        })
    }

    pub fn conj(&self) -> QuasiSolution {
        QuasiSolution {
            f: self.f.conj(),
            qd: self.qd.conj(),
            z: self.z.conj(),
            g: self.g.as_ref().map(|g| g.conj()),
        }
    }

    /// Wraps an explicitly constructed pair (used for glued functions such
    /// as the multivalued-part representatives). Meshes must agree.
    pub fn from_parts(
        f: PiecewiseFunction,
        qd: PiecewiseFunction,
        z: Complex64,
        g: Option<PiecewiseFunction>,
    ) -> Result<QuasiSolution> {
        if f.nodes() != qd.nodes() {
            return Err(SlError::Invalid("f and f^[1] need one shared mesh".into()));
        }
        Ok(QuasiSolution { f, qd, z, g })
    }
}

/// Solves `(tau - z) u = g` with `u(c) = d1`, `u^[1](c) = d2` (or the right
/// limits, per `init`). The solution covers the whole computable window.
pub fn solve_tau(
    tau: &TauExpression,
    z: Complex64,
    g: Option<&PiecewiseFunction>,
    c: f64,
    d1: Complex64,
    d2: Complex64,
    init: InitKind,
) -> Result<QuasiSolution> {
    let (wlo, whi) = tau.window();
    if c < wlo || c > whi {
        return Err(SlError::PositionOutsideInterval(c));
    }
    let targets = [wlo, whi];
    let yc = [d1, d2];
    let trajectory = match g {
        None => mde::solve_ivp(tau.system(), z, c, &yc, &targets, init)?,
        Some(gf) => {
            let varrho = tau.varrho().clone();
            let gf_cell = gf.clone();
            let cell = move |x0: f64, x1: f64| -> Vec<ExpPoly> {
                let mid = 0.5 * (x0 + x1);
                let (glo, ghi) = gf_cell.domain();
                if mid < glo || mid > ghi {
                    return vec![ExpPoly::zero(), ExpPoly::zero()];
                }
                let dens = varrho.density_at(mid);
                if dens == czero() {
                    return vec![ExpPoly::zero(), ExpPoly::zero()];
                }
                let nodes = gf_cell.nodes();
                let i = nodes.partition_point(|&n| n < mid) - 1;
                let local = gf_cell.cells()[i].shift(x0 - nodes[i]);
                vec![ExpPoly::zero(), local.scale(-dens)]
            };
            let varrho2 = tau.varrho().clone();
            let gf_atom = gf.clone();
            let atom = move |x: f64| -> Vec<Complex64> {
                let w = varrho2.atom_mass(x);
                if w == czero() {
                    return vec![czero(), czero()];
                }
                let (glo, ghi) = gf_atom.domain();
                let gv = if x < glo || x > ghi { czero() } else { gf_atom.value(x) };
                vec![czero(), -w * gv]
            };
            let mut mesh: Vec<f64> = gf.nodes().to_vec();
            let (glo, ghi) = gf.domain();
            mesh.push(glo);
            mesh.push(ghi);
            let forcing = CellForcing { cell: &cell, atom: &atom, mesh };
            mde::solve_ivp_forced(tau.system(), z, c, &yc, &targets, init, Some(&forcing))?
        }
    };
    Ok(QuasiSolution {
        f: trajectory.component(0),
        qd: trajectory.component(1),
        z,
        g: g.cloned(),
    })
}

/// Fundamental pair at `c`: `u1(c) = u2^[1](c) = 1`, `u1^[1](c) = u2(c) = 0`.
pub fn fundamental_pair(
    tau: &TauExpression,
    z: Complex64,
    c: f64,
    init: InitKind,
) -> Result<(QuasiSolution, QuasiSolution)> {
    let one = Complex64::new(1.0, 0.0);
    let u1 = solve_tau(tau, z, None, c, one, czero(), init)?;
    let u2 = solve_tau(tau, z, None, c, czero(), one, init)?;
    Ok((u1, u2))
}

/// Wronskian `W(u, v)(x) = u(x) v^[1](x) - u^[1](x) v(x)`.
pub fn wronskian(u: &QuasiSolution, v: &QuasiSolution, x: f64) -> Complex64 {
    u.value(x) * v.qderiv(x) - u.qderiv(x) * v.value(x)
}

/// Wronskian from right limits, `W(u, v)(x+)`.
pub fn wronskian_right(u: &QuasiSolution, v: &QuasiSolution, x: f64) -> Complex64 {
    u.value_right(x) * v.qderiv_right(x) - u.qderiv_right(x) * v.value_right(x)
}

/// `int_{[lo,hi)} (prod_i parts_i) dmu`, exact for the piecewise closed forms.
pub fn integrate_product(
    parts: &[&PiecewiseFunction],
    mu: &Measure,
    lo: f64,
    hi: f64,
) -> Complex64 {
    assert!(!parts.is_empty());
    if hi <= lo {
        return czero();
    }
    let mut acc = czero();
    for &(p, w) in mu.atoms() {
        if p >= lo && p < hi {
            let mut v = w;
            for f in parts {
                v *= f.value(p);
            }
            acc += v;
        }
    }
    if mu.cells().is_empty() {
        return acc;
    }
    let mut nodes: Vec<f64> = vec![lo, hi];
    for f in parts {
        nodes.extend(f.nodes().iter().copied().filter(|&n| n > lo && n < hi));
    }
    mu.mesh_points(lo, hi, &mut nodes);
    nodes.retain(|&n| n >= lo && n <= hi);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    for w in nodes.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let dens = mu.density_at(mid);
        if dens == czero() {
            continue;
        }
        let mut prod: Option<ExpPoly> = None;
        for f in parts {
            let fnodes = f.nodes();
            let i = fnodes.partition_point(|&n| n < mid) - 1;
            let local = f.cells()[i].shift(w[0] - fnodes[i]);
            prod = Some(match prod {
                None => local,
                Some(p) => p.mul(&local),
            });
        }
        acc += dens * prod.expect("at least one factor").integrate(0.0, w[1] - w[0]);
    }
    acc
}

/// Lagrange residual
/// `int_alpha^beta (v tau u - u tau v) dvarrho - (W(u,v)(beta) - W(u,v)(alpha))`;
/// vanishes for any two quasi-solutions.
pub fn lagrange_residual(
    tau: &TauExpression,
    u: &QuasiSolution,
    v: &QuasiSolution,
    alpha: f64,
    beta: f64,
) -> Complex64 {
    // tau u = z_u u + g_u and tau v = z_v v + g_v on supp(varrho)
    let mut integral =
        integrate_product(&[u.f(), v.f()], tau.varrho(), alpha, beta) * (u.z() - v.z());
    if let Some(gu) = u.inhomogeneity() {
        integral += integrate_product(&[v.f(), gu], tau.varrho(), alpha, beta);
    }
    if let Some(gv) = v.inhomogeneity() {
        integral -= integrate_product(&[u.f(), gv], tau.varrho(), alpha, beta);
    }
    integral - (wronskian(u, v, beta) - wronskian(u, v, alpha))
}

/// Three-term cyclic Wronskian sum; vanishes identically.
pub fn pluecker_residual(
    f1: &QuasiSolution,
    f2: &QuasiSolution,
    f3: &QuasiSolution,
    f4: &QuasiSolution,
    x: f64,
) -> Complex64 {
    wronskian(f1, f2, x) * wronskian(f3, f4, x)
        + wronskian(f1, f3, x) * wronskian(f4, f2, x)
        + wronskian(f1, f4, x) * wronskian(f2, f3, x)
}

/// `tau u` restricted to `supp(varrho)`: point values at atoms and closed
/// forms on density cells.
#[derive(Debug, Clone)]
pub struct TauOnSupport {
    pub atoms: Vec<(f64, Complex64)>,
    /// `(start, end, local closed form)` pieces covering the density cells
    pub cells: Vec<(f64, f64, ExpPoly)>,
}

impl TauOnSupport {
    pub fn at_atom(&self, x: f64) -> Option<Complex64> {
        self.atoms.iter().find(|(p, _)| *p == x).map(|&(_, v)| v)
    }

    pub fn eval(&self, x: f64) -> Option<Complex64> {
        if let Some(v) = self.at_atom(x) {
            return Some(v);
        }
        self.cells
            .iter()
            .find(|(s, e, _)| *s <= x && x < *e)
            .map(|(s, _, p)| p.eval(x - s))
    }
}

/// Applies the expression to a quasi-solution: at a varrho atom
/// `tau u(x) = (-(u^[1](x+) - u^[1](x)) + u(x) chi({x})) / varrho({x})`,
/// on varrho density cells `tau u = (-(u^[1])' + u chi_dens) / varrho_dens`.
pub fn apply_tau(tau: &TauExpression, u: &QuasiSolution) -> TauOnSupport {
    let mut atoms = Vec::with_capacity(tau.varrho().atoms().len());
    for &(p, w) in tau.varrho().atoms() {
        let jump = u.qderiv_right(p) - u.qderiv(p);
        let v = (-jump + u.value(p) * tau.chi().atom_mass(p)) / w;
        atoms.push((p, v));
    }
    let mut cells = Vec::new();
    for cell in tau.varrho().cells() {
        let mut nodes = vec![cell.start, cell.end];
        nodes.extend(
            u.f()
                .nodes()
                .iter()
                .copied()
                .filter(|&n| n > cell.start && n < cell.end),
        );
        tau.chi().mesh_points(cell.start, cell.end, &mut nodes);
        nodes.retain(|&n| n >= cell.start && n <= cell.end);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        for w in nodes.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let chi_d = tau.chi().density_at(mid);
            let fnodes = u.f().nodes();
            let i = fnodes.partition_point(|&n| n < mid) - 1;
            let fu = u.f().cells()[i].shift(w[0] - fnodes[i]);
            let du1 = u.quasi_derivative().cells()[i]
                .shift(w[0] - fnodes[i])
                .derivative();
            let poly = du1
                .scale(Complex64::new(-1.0, 0.0))
                .add(&fu.scale(chi_d))
                .scale(Complex64::new(1.0, 0.0) / cell.value);
            cells.push((w[0], w[1], poly));
        }
    }
    TauOnSupport { atoms, cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c64(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one() -> Complex64 {
        c64(1.0)
    }

    /// classical -y'' on (0, pi): varrho = varsigma = Lebesgue, chi = 0
    fn classical_tau() -> TauExpression {
        let iv = Interval::new(0.0, PI).unwrap();
        let leb = Measure::zero(iv).with_density(0.0, PI, one()).unwrap();
        build_tau(leb.clone(), leb, Measure::zero(iv)).unwrap()
    }

    /// Jacobi triple with atoms at 1..=n on (0.5, n + 0.5)
    fn jacobi_tau(n: usize, p: &[f64], q: &[f64]) -> TauExpression {
        assert_eq!(p.len(), n + 1);
        assert_eq!(q.len(), n);
        let iv = Interval::new(0.5, n as f64 + 0.5).unwrap();
        let mut rho = Measure::zero(iv);
        let mut chi = Measure::zero(iv);
        for k in 1..=n {
            rho = rho.with_atom(k as f64, one()).unwrap();
            if q[k - 1] != 0.0 {
                chi = chi.with_atom(k as f64, c64(q[k - 1])).unwrap();
            }
        }
        let mut sigma = Measure::zero(iv);
        for k in 0..=n {
            let lo = (k as f64).max(0.5);
            let hi = (k as f64 + 1.0).min(n as f64 + 0.5);
            sigma = sigma.with_density(lo, hi, c64(1.0 / p[k])).unwrap();
        }
        build_tau(rho, sigma, chi).unwrap()
    }

    #[test]
    fn build_tau_reports_support_edges() {
        let iv = Interval::new(-1.0, 2.0).unwrap();
        let rho = Measure::zero(iv)
            .with_atom(0.0, one())
            .unwrap()
            .with_atom(1.0, one())
            .unwrap();
        let sigma = Measure::zero(iv).with_density(-1.0, 2.0, one()).unwrap();
        let tau = build_tau(rho, sigma, Measure::zero(iv)).unwrap();
        assert_eq!(tau.alpha_rho(), 0.0);
        assert_eq!(tau.beta_rho(), 1.0);
        assert!(tau.regular_at_a() && tau.regular_at_b());
    }

    #[test]
    fn build_tau_rejects_shared_atom() {
        let iv = Interval::new(-1.0, 2.0).unwrap();
        let rho = Measure::zero(iv)
            .with_atom(0.0, one())
            .unwrap()
            .with_atom(1.0, one())
            .unwrap();
        let sigma = Measure::zero(iv)
            .with_density(-1.0, 2.0, one())
            .unwrap()
            .with_atom(0.0, one())
            .unwrap();
        let err = build_tau(rho, sigma, Measure::zero(iv)).unwrap_err();
        assert_eq!(err, SlError::HypothesisViolation(HypothesisClause::SharedAtom));
        assert!(err.to_string().contains("no point masses in common"));
    }

    #[test]
    fn build_tau_rejects_opposite_gap_signs() {
        // gap (0, 2pi) of supp(varrho) with dvarsigma = dx and some
        // negative chi inside the gap
        let iv = Interval::new(-1.0, 2.0 * PI + 1.0).unwrap();
        let rho = Measure::zero(iv)
            .with_atom(0.0, one())
            .unwrap()
            .with_atom(2.0 * PI, one())
            .unwrap();
        let sigma = Measure::zero(iv)
            .with_density(-1.0, 2.0 * PI + 1.0, one())
            .unwrap();
        let chi = Measure::zero(iv).with_density(0.5, 1.5, c64(-1.0)).unwrap();
        let err = build_tau(rho, sigma, chi).unwrap_err();
        assert_eq!(err, SlError::HypothesisViolation(HypothesisClause::GapSign));
    }

    #[test]
    fn build_tau_rejects_single_point_without_flag() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let rho = Measure::zero(iv).with_atom(0.0, one()).unwrap();
        let sigma = Measure::zero(iv).with_density(-1.0, 1.0, one()).unwrap();
        let err = build_tau(rho.clone(), sigma.clone(), Measure::zero(iv)).unwrap_err();
        assert_eq!(err, SlError::HypothesisViolation(HypothesisClause::SupportSize));
        assert!(build_tau_one_point(rho, sigma, Measure::zero(iv)).is_ok());
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let tau = classical_tau();
        let u = solve_tau(&tau, one(), None, 1.0, c64(0.0), c64(0.0), InitKind::AtX).unwrap();
        for x in [0.2, 1.0, 2.5] {
            assert_eq!(u.value(x), c64(0.0));
            assert_eq!(u.qderiv(x), c64(0.0));
        }
    }

    #[test]
    fn classical_solution_is_sine() {
        let tau = classical_tau();
        // -y'' = z y with z = 1, y(0) = 0, y'(0) = 1 -> y = sin
        let u = solve_tau(&tau, one(), None, 0.0, c64(0.0), one(), InitKind::AtX).unwrap();
        for &x in &[0.3, 1.0, PI / 2.0, 2.9] {
            assert!((u.value(x) - c64(x.sin())).norm() < 1e-12, "sin({x})");
            assert!((u.qderiv(x) - c64(x.cos())).norm() < 1e-12, "cos({x})");
        }
    }

    #[test]
    fn jacobi_solution_is_piecewise_linear_with_integer_kinks() {
        let tau = jacobi_tau(2, &[1.0, 1.0, 1.0], &[0.0, 0.0]);
        let u = solve_tau(&tau, c64(0.0), None, 0.5, one(), one(), InitKind::AtX).unwrap();
        // hand propagation: on (0.5, 1): u(x) = u(0.5) + (x - 0.5) u^[1]
        assert!((u.value(1.0) - c64(1.5)).norm() < 1e-13);
        // z = 0, q = 0: jump of the slope at the atom is zero
        assert!((u.qderiv_right(1.0) - c64(1.0)).norm() < 1e-13);
        assert!((u.value(1.7) - c64(2.2)).norm() < 1e-13);
        // with q nonzero the slope kinks at the atom by q * u(1)
        let tau_q = jacobi_tau(2, &[1.0, 1.0, 1.0], &[2.0, 0.0]);
        let v = solve_tau(&tau_q, c64(0.0), None, 0.5, one(), one(), InitKind::AtX).unwrap();
        let jump = v.qderiv_right(1.0) - v.qderiv(1.0);
        assert!((jump - c64(2.0) * v.value(1.0)).norm() < 1e-13);
    }

    #[test]
    fn wronskian_of_fundamental_pair_is_one_everywhere() {
        let tau = jacobi_tau(3, &[1.0, 2.0, 0.5, 1.5], &[0.3, -0.7, 0.1]);
        let (u1, u2) = fundamental_pair(&tau, c64(0.7), 2.0, InitKind::AtX).unwrap();
        assert_eq!(wronskian(&u1, &u1, 1.3), c64(0.0));
        for x in [0.6, 1.0, 1.5, 2.0, 2.5, 3.2] {
            let w = wronskian(&u1, &u2, x);
            assert!((w - one()).norm() < 1e-12, "W at {x} = {w}");
        }
    }

    #[test]
    fn wronskian_sin_cos_is_minus_one() {
        let tau = classical_tau();
        let sin = solve_tau(&tau, one(), None, 0.0, c64(0.0), one(), InitKind::AtX).unwrap();
        let cos = solve_tau(&tau, one(), None, 0.0, one(), c64(0.0), InitKind::AtX).unwrap();
        assert!((wronskian(&sin, &cos, PI / 2.0) - c64(-1.0)).norm() < 1e-12);
        assert!((wronskian(&cos, &sin, 1.1) - one()).norm() < 1e-12);
    }

    #[test]
    fn lagrange_residual_vanishes() {
        let tau = jacobi_tau(3, &[1.0, 2.0, 0.5, 1.5], &[0.3, -0.7, 0.1]);
        let u = solve_tau(&tau, c64(0.4), None, 1.0, one(), c64(0.2), InitKind::AtX).unwrap();
        let v = solve_tau(&tau, c64(-1.1), None, 2.0, c64(0.5), one(), InitKind::AtX).unwrap();
        assert_eq!(lagrange_residual(&tau, &u, &u, 0.7, 3.2).norm(), 0.0);
        let r = lagrange_residual(&tau, &u, &v, 0.7, 3.2);
        assert!(r.norm() < 1e-10, "residual {r}");
        // same z: Wronskian of two solutions is constant
        let v2 = solve_tau(&tau, c64(0.4), None, 2.0, c64(0.5), one(), InitKind::AtX).unwrap();
        for x in [0.7, 1.4, 2.9] {
            assert!((wronskian(&u, &v2, x) - wronskian(&u, &v2, 0.7)).norm() < 1e-12);
        }
    }

    #[test]
    fn pluecker_residual_vanishes() {
        let tau = jacobi_tau(2, &[1.3, 0.8, 2.0], &[0.5, -0.2]);
        let f1 = solve_tau(&tau, c64(0.3), None, 1.0, one(), c64(0.4), InitKind::AtX).unwrap();
        let f2 = solve_tau(&tau, c64(-0.8), None, 1.5, c64(0.2), one(), InitKind::AtX).unwrap();
        let f3 = solve_tau(&tau, c64(1.9), None, 2.0, one(), one(), InitKind::AtX).unwrap();
        let f4 = solve_tau(&tau, c64(0.0), None, 1.2, c64(-0.6), one(), InitKind::AtX).unwrap();
        assert_eq!(pluecker_residual(&f1, &f2, &f1, &f4, 1.4).norm(), 0.0);
        assert!(pluecker_residual(&f1, &f2, &f3, &f4, 1.4).norm() < 1e-10);
        assert!(pluecker_residual(&f1, &f2, &f1, &f2, 2.2).norm() < 1e-15);
    }

    #[test]
    fn apply_tau_reproduces_jacobi_recurrence() {
        let p = [1.3, 0.8, 2.0, 0.6];
        let q = [0.5, -0.2, 1.1];
        let tau = jacobi_tau(3, &p, &q);
        let z = c64(0.9);
        let u = solve_tau(&tau, z, None, 2.0, c64(0.7), c64(-0.4), InitKind::AtX).unwrap();
        let tu = apply_tau(&tau, &u);
        let f = |x: f64| u.value(x);
        for n in 1..=3usize {
            let x = n as f64;
            // p_{n-1}(f(n) - f(n-1)) - p_n(f(n+1) - f(n)) + q_n f(n);
            // outside the lattice the linear pieces extrapolate with the
            // actual slopes
            let left = if n == 1 {
                f(1.0) - u.qderiv(1.0) / p[0]
            } else {
                f(x - 1.0)
            };
            let right = if n == 3 {
                f(3.0) + u.qderiv_right(3.0) / p[3]
            } else {
                f(x + 1.0)
            };
            let expect = p[n - 1] * (f(x) - left) - p[n] * (right - f(x)) + q[n - 1] * f(x);
            let got = tu.at_atom(x).unwrap();
            assert!((got - expect).norm() < 1e-12, "site {n}: {got} vs {expect}");
            // homogeneous solution: tau u = z u on the support
            assert!((got - z * f(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_tau_on_ac_weight_gives_zu() {
        let tau = classical_tau();
        let z = c64(2.3);
        let u = solve_tau(&tau, z, None, 1.0, one(), c64(0.5), InitKind::AtX).unwrap();
        let tu = apply_tau(&tau, &u);
        for &x in &[0.4, 1.7, 2.8] {
            let got = tu.eval(x).unwrap();
            assert!((got - z * u.value(x)).norm() < 1e-11, "{got}");
        }
    }

    #[test]
    fn one_point_tau_formula() {
        // f continuous with equal slopes on both sides, chi({x0}) = 0:
        // tau f(x0) = 0
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let rho = Measure::zero(iv).with_atom(0.0, c64(0.5)).unwrap();
        let sigma = Measure::zero(iv).with_density(-1.0, 1.0, one()).unwrap();
        let tau = build_tau_one_point(rho, sigma, Measure::zero(iv)).unwrap();
        let u = solve_tau(&tau, c64(0.0), None, 0.0, one(), one(), InitKind::AtX).unwrap();
        let tu = apply_tau(&tau, &u);
        assert!(tu.at_atom(0.0).unwrap().norm() < 1e-14);
    }

    #[test]
    fn realness_of_real_solutions() {
        let tau = jacobi_tau(2, &[1.0, 0.7, 1.4], &[0.2, -0.5]);
        let u = solve_tau(&tau, c64(1.7), None, 1.0, one(), c64(0.3), InitKind::AtX).unwrap();
        for x in [0.6, 1.2, 2.4] {
            assert!(u.value(x).im.abs() <= 1e-14 * u.value(x).norm().max(1.0));
            assert!(u.qderiv(x).im.abs() <= 1e-14 * u.qderiv(x).norm().max(1.0));
        }
    }

    #[test]
    fn linear_independence_iff_nonzero_wronskian() {
        let tau = classical_tau();
        let z = one();
        let u = solve_tau(&tau, z, None, 1.0, one(), c64(0.5), InitKind::AtX).unwrap();
        let v = u.combine(c64(2.5), &u, c64(0.0)).unwrap();
        assert!(wronskian(&u, &v, 1.7).norm() < 1e-13);
        let w = solve_tau(&tau, z, None, 1.0, one(), c64(0.6), InitKind::AtX).unwrap();
        assert!(wronskian(&u, &w, 1.7).norm() > 1e-3);
    }

    #[test]
    fn variation_of_parameters_matches_explicit_formula() {
        let tau = jacobi_tau(3, &[1.0, 2.0, 0.5, 1.5], &[0.3, -0.7, 0.1]);
        let z = c64(0.35);
        let c = 1.5;
        let g = PiecewiseFunction::new(
            vec![0.8, 1.9, 3.1],
            vec![ExpPoly::constant(c64(0.7)), ExpPoly::constant(c64(-0.3))],
        )
        .unwrap();
        let d1 = c64(0.4);
        let d2 = c64(-1.1);
        let f = solve_tau(&tau, z, Some(&g), c, d1, d2, InitKind::AtX).unwrap();
        let (u1, u2) = fundamental_pair(&tau, z, c, InitKind::AtX).unwrap();
        // f = d1 u1 + d2 u2 + u1 int_c^x u2 g drho - u2 int_c^x u1 g drho
        for &x in &[0.7, 1.2, 2.0, 2.6, 3.3] {
            let (lo, hi, sgn) = if x >= c { (c, x, 1.0) } else { (x, c, -1.0) };
            let i2 = integrate_product(&[u2.f(), &g], tau.varrho(), lo, hi) * sgn;
            let i1 = integrate_product(&[u1.f(), &g], tau.varrho(), lo, hi) * sgn;
            let expect =
                d1 * u1.value(x) + d2 * u2.value(x) + u1.value(x) * i2 - u2.value(x) * i1;
            let got = f.value(x);
            assert!((got - expect).norm() < 1e-10, "x={x}: {got} vs {expect}");
        }
    }

    #[test]
    fn entire_growth_bound_order_half() {
        // Gronwall route: v_z = |z||f|^2 + |f^[1]|^2 satisfies
        // v_z(x) <= v_z(c) exp(sqrt|z| omega([c,x])), so with unit-bounded
        // initial data |f| + |f^[1]| <= sqrt(2|z|) exp(B sqrt|z|)
        let tau = classical_tau();
        let c = 0.4;
        let b_const = tau.omega().total_variation(0.4, 2.8);
        for &modulus in &[10.0, 100.0, 1000.0] {
            for k in 0..8 {
                let arg = 2.0 * PI * k as f64 / 8.0;
                let z = Complex64::from_polar(modulus, arg);
                let u = solve_tau(&tau, z, None, c, c64(0.3), c64(0.7), InitKind::AtX).unwrap();
                let bound = (2.0 * modulus).sqrt() * (b_const * modulus.sqrt()).exp();
                for &x in &[0.5, 1.4, 2.7] {
                    let lhs = u.value(x).norm() + u.qderiv(x).norm();
                    assert!(lhs <= bound, "|z|={modulus} arg={arg}: {lhs} > {bound}");
                }
            }
        }
    }
}
