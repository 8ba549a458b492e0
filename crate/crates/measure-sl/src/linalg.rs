//! Dense complex matrices of small order (systems here are n = 1 or 2).

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> CMat {
        CMat { n, a: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> CMat {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> CMat {
        let n = rows.len();
        let mut m = CMat::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n);
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        CMat {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> CMat {
        CMat { n: self.n, a: self.a.iter().map(|x| x * c).collect() }
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let v = self[(i, k)];
                if v != Complex64::new(0.0, 0.0) {
                    for j in 0..n {
                        out[(i, j)] += v * other[(k, j)];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn det(&self) -> Complex64 {
        match self.n {
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            _ => {
                let (lu, sign, singular) = self.lu();
                if singular {
                    return Complex64::new(0.0, 0.0);
                }
                let mut d = Complex64::new(sign, 0.0);
                for i in 0..self.n {
                    d *= lu[(i, i)];
                }
                d
            }
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    fn lu(&self) -> (CMat, f64, bool) {
        let n = self.n;
        let mut m = self.clone();
        let mut sign = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if m[(r, col)].norm() > m[(piv, col)].norm() {
                    piv = r;
                }
            }
            if m[(piv, col)].norm() == 0.0 {
                return (m, sign, true);
            }
            if piv != col {
                for j in 0..n {
                    m.a.swap(col * n + j, piv * n + j);
                }
                sign = -sign;
            }
            for r in col + 1..n {
                let f = m[(r, col)] / m[(col, col)];
                m[(r, col)] = f;
                for j in col + 1..n {
                    let sub = f * m[(col, j)];
                    m[(r, j)] -= sub;
                }
            }
        }
        (m, sign, false)
    }

    pub fn inverse(&self) -> Option<CMat> {
        let n = self.n;
        match n {
            1 => {
                if self[(0, 0)].norm() == 0.0 {
                    return None;
                }
                let mut m = CMat::zeros(1);
                m[(0, 0)] = Complex64::new(1.0, 0.0) / self[(0, 0)];
                Some(m)
            }
            2 => {
                let d = self.det();
                if d.norm() == 0.0 {
                    return None;
                }
                let mut m = CMat::zeros(2);
                m[(0, 0)] = self[(1, 1)] / d;
                m[(1, 1)] = self[(0, 0)] / d;
                m[(0, 1)] = -self[(0, 1)] / d;
                m[(1, 0)] = -self[(1, 0)] / d;
                Some(m)
            }
            _ => {
                // Gauss-Jordan with partial pivoting
                let mut m = self.clone();
                let mut inv = CMat::identity(n);
                for col in 0..n {
                    let mut piv = col;
                    for r in col + 1..n {
                        if m[(r, col)].norm() > m[(piv, col)].norm() {
                            piv = r;
                        }
                    }
                    if m[(piv, col)].norm() == 0.0 {
                        return None;
                    }
                    if piv != col {
                        for j in 0..n {
                            m.a.swap(col * n + j, piv * n + j);
                            inv.a.swap(col * n + j, piv * n + j);
                        }
                    }
                    let p = m[(col, col)];
                    for j in 0..n {
                        m[(col, j)] /= p;
                        inv[(col, j)] /= p;
                    }
                    for r in 0..n {
                        if r != col {
                            let f = m[(r, col)];
                            if f.norm() != 0.0 {
                                for j in 0..n {
                                    let (ms, is) = (f * m[(col, j)], f * inv[(col, j)]);
                                    m[(r, j)] -= ms;
                                    inv[(r, j)] -= is;
                                }
                            }
                        }
                    }
                }
                Some(inv)
            }
        }
    }

    /// `exp(self * t)` by scaling and squaring with a truncated series.
    pub fn expm(&self, t: f64) -> CMat {
        let n = self.n;
        let at = self.scale(Complex64::new(t, 0.0));
        let norm = at.fro_norm();
        let k = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = at.scale(Complex64::new(0.5f64.powi(k as i32), 0.0));
        let mut acc = CMat::identity(n);
        let mut term = CMat::identity(n);
        for m in 1..60 {
            term = term.mul(&scaled).scale(Complex64::new(1.0 / m as f64, 0.0));
            acc = acc.add(&term);
            if term.fro_norm() < 1e-18 * acc.fro_norm().max(1e-300) {
                break;
            }
        }
        let mut out = acc;
        for _ in 0..k {
            out = out.mul(&out);
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.a[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.a[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_round_trip() {
        let m = CMat::from_rows(&[
            &[c(1.0, 0.5), c(-0.3, 0.0), c(0.0, 2.0)],
            &[c(0.0, 0.0), c(2.0, -1.0), c(0.7, 0.0)],
            &[c(1.0, 0.0), c(0.0, 0.4), c(-1.2, 0.0)],
        ]);
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        let id = CMat::identity(3);
        assert!(prod.add(&id.scale(c(-1.0, 0.0))).fro_norm() < 1e-12);
    }

    #[test]
    fn expm_scalar_and_rotation() {
        let m = CMat::from_rows(&[&[c(0.7, -0.2)]]);
        let e = m.expm(2.0);
        assert!((e[(0, 0)] - (c(0.7, -0.2) * 2.0).exp()).norm() < 1e-14);

        // rotation generator: exp(t J) = [[cos t, -sin t],[sin t, cos t]]
        let j = CMat::from_rows(&[&[c(0.0, 0.0), c(-1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]]);
        let r = j.expm(0.9);
        assert!((r[(0, 0)].re - 0.9f64.cos()).abs() < 1e-14);
        assert!((r[(1, 0)].re - 0.9f64.sin()).abs() < 1e-14);
    }
}
