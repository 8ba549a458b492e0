//! Exponential polynomials: finite sums of `c * t^p * exp(lambda*t)`.
//!
//! Cell-local closed form for everything the solvers produce. The class is
//! closed under addition, multiplication, differentiation and (up to a
//! truncation far below working precision) convolution, so solutions,
//! Wronskians and spectral integrals never leave it.
//!
//! All evaluation happens on a bounded local variable `t in [0, len]` with
//! `len` kept small by mesh subdivision; the integral kernels below switch
//! between series and closed forms at `|w| ~ 8` to avoid cancellation.

use num_complex::Complex64;

const SERIES_SWITCH: f64 = 8.0;
const SERIES_TAIL: f64 = 1e-18;

/// One term `coeff * t^power * exp(lambda * t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub power: u32,
    pub lambda: Complex64,
}

/// Sum of exponential-polynomial terms on a local coordinate `t >= 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        ExpPoly::from_term(c, 0, Complex64::new(0.0, 0.0))
    }

    pub fn from_term(coeff: Complex64, power: u32, lambda: Complex64) -> Self {
        let mut p = ExpPoly {
            terms: vec![Term { coeff, power, lambda }],
        };
        p.normalize();
        p
    }

    /// `a + b*t`
    pub fn linear(a: Complex64, b: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = ExpPoly {
            terms: vec![
                Term { coeff: a, power: 0, lambda: zero },
                Term { coeff: b, power: 1, lambda: zero },
            ],
        };
        p.normalize();
        p
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalize(&mut self) {
        self.terms.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        self.terms.sort_by(|a, b| {
            a.power
                .cmp(&b.power)
                .then(a.lambda.re.total_cmp(&b.lambda.re))
                .then(a.lambda.im.total_cmp(&b.lambda.im))
        });
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.power == t.power && last.lambda == t.lambda => {
                    last.coeff += t.coeff;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        self.terms = merged;
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            acc += term.coeff * t.powi(term.power as i32) * (term.lambda * t).exp();
        }
        acc
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        let mut p = ExpPoly { terms };
        p.normalize();
        p
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> ExpPoly {
        let mut p = ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coeff: t.coeff * c, ..*t })
                .collect(),
        };
        p.normalize();
        p
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    power: a.power + b.power,
                    lambda: a.lambda + b.lambda,
                });
            }
        }
        let mut p = ExpPoly { terms };
        p.normalize();
        p
    }

    pub fn derivative(&self) -> ExpPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            if t.power > 0 {
                terms.push(Term {
                    coeff: t.coeff * t.power as f64,
                    power: t.power - 1,
                    lambda: t.lambda,
                });
            }
            terms.push(Term {
                coeff: t.coeff * t.lambda,
                power: t.power,
                lambda: t.lambda,
            });
        }
        let mut p = ExpPoly { terms };
        p.normalize();
        p
    }

    /// Complex conjugate as a function of real `t`.
    pub fn conj(&self) -> ExpPoly {
        let mut p = ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.conj(),
                    power: t.power,
                    lambda: t.lambda.conj(),
                })
                .collect(),
        };
        p.normalize();
        p
    }

    /// Definite integral over `[t0, t1]` with `0 <= t0 <= t1`.
    pub fn integrate(&self, t0: f64, t1: f64) -> Complex64 {
        debug_assert!(t0 >= 0.0 && t1 >= t0);
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            acc += term.coeff * int_tp_exp(term.power, term.lambda, t0, t1);
        }
        acc
    }

    /// Convolution `(self * other)(t) = int_0^t self(t-s) other(s) ds`,
    /// valid for `t in [0, maxlen]`.
    pub fn convolve(&self, other: &ExpPoly, maxlen: f64) -> ExpPoly {
        let mut acc = ExpPoly::zero();
        for a in &self.terms {
            for b in &other.terms {
                acc = acc.add(&conv_term(a, b, maxlen));
            }
        }
        acc
    }

    /// Shift the local variable: returns `q` with `q(t) = self(t + dt)`, `dt >= 0`.
    pub fn shift(&self, dt: f64) -> ExpPoly {
        let mut terms = Vec::new();
        for t in &self.terms {
            let scale = (t.lambda * dt).exp() * t.coeff;
            // (t+dt)^p = sum_k C(p,k) dt^(p-k) t^k
            let p = t.power;
            let mut binom = 1.0f64;
            for k in 0..=p {
                if k > 0 {
                    binom *= (p - k + 1) as f64 / k as f64;
                }
                terms.push(Term {
                    coeff: scale * binom * dt.powi((p - k) as i32),
                    power: k,
                    lambda: t.lambda,
                });
            }
        }
        let mut q = ExpPoly { terms };
        q.normalize();
        q
    }
}

/// `phi_p(w) = int_0^1 sigma^p exp(w sigma) d sigma`, series branch (`|w| <= ~8`).
fn phi_series(p: u32, w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut wn = Complex64::new(1.0, 0.0); // w^n / n!
    for n in 0..200u32 {
        if n > 0 {
            wn *= w / n as f64;
        }
        let term = wn / (n + p + 1) as f64;
        acc += term;
        if term.norm() < SERIES_TAIL * acc.norm().max(1e-300) && n > 4 {
            break;
        }
    }
    acc
}

/// `int_{t0}^{t1} t^p exp(lambda t) dt`, robust for all magnitudes of `lambda`.
pub fn int_tp_exp(p: u32, lambda: Complex64, t0: f64, t1: f64) -> Complex64 {
    if t1 <= t0 {
        return Complex64::new(0.0, 0.0);
    }
    let span = t1 - t0;
    let chunks = ((lambda.norm() * span) / SERIES_SWITCH).ceil().max(1.0) as usize;
    let h = span / chunks as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..chunks {
        let c0 = t0 + i as f64 * h;
        // shift: int_0^h (c0+u)^p e^{lambda u} du * e^{lambda c0}
        let front = (lambda * c0).exp();
        let mut binom = 1.0f64;
        let mut inner = Complex64::new(0.0, 0.0);
        for k in 0..=p {
            if k > 0 {
                binom *= (p - k + 1) as f64 / k as f64;
            }
            let base = binom * c0.powi((p - k) as i32) * h.powi(k as i32 + 1);
            if base != 0.0 {
                inner += base * phi_series(k, lambda * h);
            }
        }
        acc += front * inner;
    }
    acc
}

/// `int_0^t s^m exp(w s) ds` represented as an exponential polynomial in `t`,
/// accurate on `[0, maxlen]`.
fn int_sm_exp(m: u32, w: Complex64, maxlen: f64) -> ExpPoly {
    let zero = Complex64::new(0.0, 0.0);
    if w.norm() * maxlen.max(1e-300) <= SERIES_SWITCH {
        // truncated entire series: t^{m+1} sum_n w^n t^n / (n! (n+m+1))
        let mut terms = Vec::new();
        let mut wn = Complex64::new(1.0, 0.0); // w^n / n!
        let mut bound_scale = maxlen.powi(m as i32 + 1);
        for n in 0..200u32 {
            if n > 0 {
                wn *= w / n as f64;
                bound_scale *= maxlen;
            }
            let coeff = wn / (n + m + 1) as f64;
            terms.push(Term { coeff, power: m + 1 + n, lambda: zero });
            if coeff.norm() * bound_scale < SERIES_TAIL && n > 4 {
                break;
            }
        }
        let mut p = ExpPoly { terms };
        p.normalize();
        p
    } else {
        // closed form: e^{wt} P(t) - P(0),
        // P(t) = sum_k (-1)^k m!/(m-k)! w^{-(k+1)} t^{m-k}
        let mut terms = Vec::new();
        let mut fall = 1.0f64; // m!/(m-k)!
        let mut winv = Complex64::new(1.0, 0.0) / w;
        let mut sign = 1.0f64;
        for k in 0..=m {
            if k > 0 {
                fall *= (m - k + 1) as f64;
                winv /= w;
                sign = -sign;
            }
            terms.push(Term {
                coeff: sign * fall * winv,
                power: m - k,
                lambda: w,
            });
        }
        // subtract value at t = 0: only the k = m monomial is nonzero there
        let p0 = if m % 2 == 0 { 1.0 } else { -1.0 };
        let fact: f64 = (1..=m).map(|i| i as f64).product::<f64>().max(1.0);
        terms.push(Term {
            coeff: -p0 * fact * Complex64::new(1.0, 0.0) / w.powu(m + 1),
            power: 0,
            lambda: zero,
        });
        let mut p = ExpPoly { terms };
        p.normalize();
        p
    }
}

/// Convolution of two single terms.
fn conv_term(a: &Term, b: &Term, maxlen: f64) -> ExpPoly {
    // int_0^t (t-s)^p e^{la (t-s)} s^q e^{nu s} ds
    //   = e^{la t} sum_j C(p,j) (-1)^j t^{p-j} int_0^t s^{q+j} e^{(nu-la)s} ds
    let w = b.lambda - a.lambda;
    let mut acc = ExpPoly::zero();
    let mut binom = 1.0f64;
    for j in 0..=a.power {
        if j > 0 {
            binom *= (a.power - j + 1) as f64 / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let inner = int_sm_exp(b.power + j, w, maxlen);
        let outer = ExpPoly::from_term(
            a.coeff * b.coeff * binom * sign,
            a.power - j,
            a.lambda,
        );
        acc = acc.add(&outer.mul(&inner));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Gauss-Legendre 20-point quadrature, the independent oracle for the
    /// closed-form kernels.
    fn quad<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64) -> Complex64 {
        const X: [f64; 10] = [
            0.0765265211334973, 0.2277858511416451, 0.3737060887154196,
            0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
            0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
            0.9931285991850949,
        ];
        const W: [f64; 10] = [
            0.1527533871307258, 0.1491729864726037, 0.1420961093183821,
            0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
            0.0832767415767047, 0.0626720483341091, 0.0406014298003869,
            0.0176140071391521,
        ];
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..10 {
            acc += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
        }
        acc * half
    }

    fn quad_subdiv<F: Fn(f64) -> Complex64 + Copy>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| quad(f, a + i as f64 * h, a + (i + 1) as f64 * h)).sum()
    }

    #[test]
    fn integral_matches_quadrature_oracle() {
        let cases = [
            (0u32, c(0.0, 0.0)),
            (0, c(-2.5, 3.0)),
            (3, c(0.3, -1.2)),
            (2, c(25.0, 40.0)),
            (5, c(-33.0, 0.0)),
        ];
        for (p, lam) in cases {
            let exact = int_tp_exp(p, lam, 0.2, 1.7);
            let oracle = quad_subdiv(|t| t.powi(p as i32) * (lam * t).exp(), 0.2, 1.7, 24);
            assert!(
                (exact - oracle).norm() <= 1e-11 * oracle.norm().max(1.0),
                "p={p} lam={lam}: {exact} vs {oracle}"
            );
        }
    }

    #[test]
    fn eval_mul_derivative_consistency() {
        let f = ExpPoly::from_term(c(1.0, 0.5), 2, c(-0.3, 1.1));
        let g = ExpPoly::linear(c(2.0, 0.0), c(0.0, -1.0));
        let prod = f.mul(&g);
        for &t in &[0.0, 0.4, 1.3] {
            let expect = f.eval(t) * g.eval(t);
            assert!((prod.eval(t) - expect).norm() < 1e-13 * expect.norm().max(1.0));
        }
        let df = f.derivative();
        let h = 1e-6;
        let fd = (f.eval(1.0 + h) - f.eval(1.0 - h)) / (2.0 * h);
        assert!((df.eval(1.0) - fd).norm() < 1e-7);
    }

    #[test]
    fn convolution_matches_quadrature_oracle() {
        let f = ExpPoly::from_term(c(1.2, -0.4), 1, c(0.7, -2.0));
        let g = ExpPoly::from_term(c(0.5, 0.9), 0, c(-1.4, 0.6))
            .add(&ExpPoly::from_term(c(0.0, 1.0), 3, c(0.0, 0.0)));
        let conv = f.convolve(&g, 1.5);
        for &t in &[0.3, 0.9, 1.5] {
            let oracle = quad_subdiv(|s| f.eval(t - s) * g.eval(s), 0.0, t, 16);
            assert!(
                (conv.eval(t) - oracle).norm() <= 1e-11 * oracle.norm().max(1.0),
                "t={t}: {} vs {oracle}",
                conv.eval(t)
            );
        }
    }

    #[test]
    fn convolution_large_exponent_gap() {
        // forces the closed-form branch of int_sm_exp
        let f = ExpPoly::from_term(c(1.0, 0.0), 0, c(14.0, 0.0));
        let g = ExpPoly::from_term(c(1.0, 0.0), 2, c(-9.0, 3.0));
        let conv = f.convolve(&g, 2.0);
        for &t in &[0.5, 2.0] {
            let oracle = quad_subdiv(|s| f.eval(t - s) * g.eval(s), 0.0, t, 40);
            assert!(
                (conv.eval(t) - oracle).norm() <= 1e-9 * oracle.norm().max(1.0),
                "t={t}: {} vs {oracle}",
                conv.eval(t)
            );
        }
    }

    #[test]
    fn shift_reanchors_local_variable() {
        let f = ExpPoly::from_term(c(0.3, 0.8), 2, c(-1.0, 0.5));
        let g = f.shift(0.7);
        for &t in &[0.0, 0.2, 1.1] {
            assert!((g.eval(t) - f.eval(t + 0.7)).norm() < 1e-13);
        }
    }

    #[test]
    fn conj_is_pointwise_conjugate() {
        let f = ExpPoly::from_term(c(0.3, 0.8), 1, c(-1.0, 2.5));
        let fc = f.conj();
        assert!((fc.eval(0.83) - f.eval(0.83).conj()).norm() < 1e-15);
    }
}
