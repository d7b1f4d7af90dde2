use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Map, Value};

use super::GaussianRational;

/// Exponent vector. Ordered graded-lexicographically with `t^1 < t^2 < ...`:
/// total degree first, then the exponent of the highest variable, and so on down.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: GaussianRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), GaussianRational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&m) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        self.scale(&GaussianRational::from_integer(-1))
    }

    pub fn scale(&self, k: &GaussianRational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, c * &GaussianRational::from_integer(i64::from(e)));
        }
        out
    }

    /// Substitutes `t^i -> factors[i] * t^i`.
    pub fn scale_vars(&self, factors: &[GaussianRational]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut k = c.clone();
            for (f, &e) in factors.iter().zip(&m.0) {
                k = &k * &f.pow(e);
            }
            out.add_term(m.clone(), k);
        }
        out
    }

    pub fn eval(&self, point: &[GaussianRational]) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                term = &term * &x.pow(e);
            }
            acc += &term;
        }
        acc
    }

    /// `[{ "monomial": {"1": e1, ...}, "coeff": ["p/q", "r/s"] }, ...]` in canonical order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| {
                    let mut mono = Map::new();
                    for (i, &e) in m.0.iter().enumerate() {
                        if e > 0 {
                            mono.insert((i + 1).to_string(), json!(e));
                        }
                    }
                    json!({ "monomial": mono, "coeff": c.to_strings() })
                })
                .collect(),
        )
    }

    pub fn from_json(nvars: usize, v: &Value) -> Result<Poly, String> {
        let mut p = Poly::zero(nvars);
        for term in v.as_array().ok_or("polynomial must be an array")? {
            let mono = term.get("monomial").and_then(Value::as_object).ok_or("missing monomial")?;
            let mut e = vec![0u32; nvars];
            for (k, v) in mono {
                let i: usize = k.parse().map_err(|_| format!("bad variable index {k:?}"))?;
                if i == 0 || i > nvars {
                    return Err(format!("variable index {i} out of range"));
                }
                e[i - 1] = v.as_u64().and_then(|x| u32::try_from(x).ok()).ok_or("bad exponent")?;
            }
            let coeff = term.get("coeff").and_then(Value::as_array).ok_or("missing coeff")?;
            let part = |j: usize| coeff.get(j).and_then(Value::as_str).ok_or("coeff must be two strings");
            p.add_term(Monomial(e), GaussianRational::from_strings(part(0)?, part(1)?)?);
        }
        Ok(p)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("t{}", i + 1) } else { format!("t{}^{}", i + 1, e) })
                    .collect();
            if vars.is_empty() {
                write!(f, "{c}")?;
            } else if *c == GaussianRational::one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{c}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Dense matrix of polynomials in a shared set of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    pub vars: Vec<String>,
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(vars: Vec<String>, rows: usize, cols: usize) -> Self {
        let n = vars.len();
        Self { vars, rows, cols, entries: vec![Poly::zero(n); rows * cols] }
    }

    pub fn identity(vars: Vec<String>, size: usize) -> Self {
        let n = vars.len();
        let mut m = Self::zeros(vars, size, size);
        for i in 0..size {
            m.set(i, i, Poly::constant(n, GaussianRational::one()));
        }
        m
    }

    /// Constant matrix from rows of Gaussian rationals.
    pub fn from_constants(vars: Vec<String>, rows: &[Vec<GaussianRational>]) -> Self {
        let n = vars.len();
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(vars, r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, Poly::constant(n, x.clone()));
            }
        }
        m
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Poly) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn mul(&self, o: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, o.rows, "PolyMatrix::mul shape");
        let mut out = PolyMatrix::zeros(self.vars.clone(), self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Poly::zero(self.nvars());
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn add(&self, o: &PolyMatrix) -> PolyMatrix {
        self.zip_with(o, Poly::add)
    }

    pub fn sub(&self, o: &PolyMatrix) -> PolyMatrix {
        self.zip_with(o, Poly::sub)
    }

    fn zip_with(&self, o: &PolyMatrix, f: impl Fn(&Poly, &Poly) -> Poly) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "PolyMatrix shape");
        PolyMatrix {
            vars: self.vars.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix {
            vars: self.vars.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Multiplies every entry by the polynomial `p`.
    pub fn scale_poly(&self, p: &Poly) -> PolyMatrix {
        self.map(|e| e.mul(p))
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.entries.iter().filter_map(Poly::total_degree).max()
    }

    pub fn eval(&self, point: &[GaussianRational]) -> Vec<Vec<GaussianRational>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c).eval(point)).collect()).collect()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> =
            (0..self.rows).map(|r| Value::Array((0..self.cols).map(|c| self.get(r, c).to_json()).collect())).collect();
        json!({ "vars": self.vars, "rows": self.rows, "cols": self.cols, "entries": entries })
    }
}
