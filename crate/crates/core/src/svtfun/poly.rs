use crate::error::{Error, Result};

/// Odd polynomial in the Chebyshev basis: `Σ_j c_j T_{2j+1}(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddPolynomial {
    coeffs: Vec<f64>,
}

impl OddPolynomial {
    /// `coeffs[j]` multiplies `T_{2j+1}`. Trailing zeros are kept so the
    /// declared degree survives round trips.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("odd polynomial needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite Chebyshev coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    /// `T_d` for odd `d`.
    pub fn chebyshev_t(d: usize) -> Result<Self> {
        if d.is_multiple_of(2) {
            return Err(Error::Domain(format!("T_{d} is not odd")));
        }
        let mut c = vec![0.0; d.div_ceil(2)];
        c[d / 2] = 1.0;
        Self::new(c)
    }

    pub fn identity() -> Self {
        Self { coeffs: vec![1.0] }
    }

    /// Builds from a full Chebyshev coefficient list (index = order), dropping even orders.
    pub fn from_full(full: &[f64], degree: usize) -> Result<Self> {
        if degree.is_multiple_of(2) {
            return Err(Error::Domain(format!("degree {degree} is not odd")));
        }
        let coeffs = (0..=degree / 2).map(|j| full.get(2 * j + 1).copied().unwrap_or(0.0)).collect();
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        2 * self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.degree();
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..=n).rev() {
            let ck = if k % 2 == 1 { self.coeffs[k / 2] } else { 0.0 };
            let b0 = ck + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        // c_0 = 0, so P(x) = x·b1 − b2.
        x * b1 - b2
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Power-basis coefficients `a_k` with `P(x) = Σ a_k x^k`.
    ///
    /// Limited to degree 63 so the integer Chebyshev coefficients stay exact;
    /// the result is badly conditioned at high degree and meant for inspection.
    pub fn to_monomial(&self) -> Result<Vec<f64>> {
        Ok(chebyshev_integer_table(self.degree())?.iter().enumerate().filter(|(k, _)| k % 2 == 1).fold(
            vec![0.0; self.degree() + 1],
            |mut out, (k, t)| {
                for (o, &ti) in out.iter_mut().zip(t) {
                    *o += self.coeffs[k / 2] * ti as f64;
                }
                out
            },
        ))
    }

    /// Plain-text table: degree on the first line, then one coefficient per odd order.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.degree());
        for c in &self.coeffs {
            s.push_str(&format!("{c:.17e}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty table".into() })?;
        let degree: usize = first.parse().map_err(|_| Error::Parse { line: ln, msg: "bad degree".into() })?;
        if degree.is_multiple_of(2) {
            return Err(Error::Parse { line: ln, msg: "degree must be odd".into() });
        }
        let mut coeffs = Vec::new();
        for (ln, l) in lines {
            coeffs
                .push(l.parse::<f64>().map_err(|_| Error::Parse { line: ln, msg: format!("bad coefficient {l:?}") })?);
        }
        if coeffs.len() != degree.div_ceil(2) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("degree {degree} needs {} coefficients, found {}", degree.div_ceil(2), coeffs.len()),
            });
        }
        Self::new(coeffs)
    }
}

/// Chebyshev points of the first kind on `[a, b]`, plus both endpoints.
pub fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n)
        .map(|k| {
            let t = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect();
    xs.push(a);
    xs.push(b);
    xs
}

/// Chebyshev coefficients (orders `0..=max_order`) of `f` from `n` Gauss–Chebyshev nodes.
pub fn chebyshev_coefficients(f: impl Fn(f64) -> f64, max_order: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; max_order + 1];
    for j in 0..n {
        let x = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
        let fx = f(x);
        let (mut t0, mut t1) = (1.0, x);
        c[0] += fx;
        if max_order >= 1 {
            c[1] += fx * x;
        }
        for ck in c.iter_mut().skip(2) {
            let t2 = 2.0 * x * t1 - t0;
            *ck += fx * t2;
            t0 = t1;
            t1 = t2;
        }
    }
    let s = 2.0 / n as f64;
    for ck in c.iter_mut() {
        *ck *= s;
    }
    c[0] *= 0.5;
    c
}

/// Integer power-basis coefficients of `T_0 .. T_n` (`table[k][i]` multiplies `x^i` in `T_k`).
pub fn chebyshev_integer_table(n: usize) -> Result<Vec<Vec<i128>>> {
    if n > 63 {
        return Err(Error::Domain(format!("integer Chebyshev table limited to degree 63, got {n}")));
    }
    let mut table = vec![vec![0i128; n + 1]; n + 1];
    table[0][0] = 1;
    if n >= 1 {
        table[1][1] = 1;
    }
    for k in 2..=n {
        for i in 0..=n {
            let up = if i > 0 { 2 * table[k - 1][i - 1] } else { 0 };
            table[k][i] = up - table[k - 2][i];
        }
    }
    Ok(table)
}
