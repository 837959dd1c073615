//! Dense rectangular matrices: a floating-point variant for spectral work and
//! an exact integer variant for certifying (-1,0,1)-structures.

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(RealMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// The all-ones matrix J_{m,n}.
    pub fn ones(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![1.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RealMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RealMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn min_dim(&self) -> usize {
        self.rows.min(self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RealMatrix {
        RealMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
    }

    pub fn has_zero_diagonal(&self, tol: f64) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| self.get(i, i).abs() <= tol)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += self.get(i, j);
            }
        }
        sums
    }

    pub fn entry_sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Row sums all equal and column sums all equal.
    pub fn is_regular(&self, tol: f64) -> bool {
        let rs = self.row_sums();
        let cs = self.col_sums();
        rs.iter().all(|&r| (r - rs[0]).abs() <= tol) && cs.iter().all(|&c| (c - cs[0]).abs() <= tol)
    }

    pub fn add(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in matrix addition".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, c: f64) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Rounds every entry to the nearest integer provided all entries are
    /// within `guard` of an integer.
    pub fn to_int(&self, guard: f64) -> Option<IntMatrix> {
        let mut data = Vec::with_capacity(self.data.len());
        for &x in &self.data {
            let r = x.round();
            if (x - r).abs() > guard || r.abs() > 1e15 {
                return None;
            }
            data.push(r as i64);
        }
        Some(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

/// Kronecker product A (x) B.
pub fn kronecker(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let mut out = RealMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Dense row-major matrix of exact integers, used for (-1,0,1) certification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity_scaled(n: usize, c: i64) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// All entries in {-1, 0, 1}.
    pub fn is_sign_matrix(&self) -> bool {
        self.data.iter().all(|&x| (-1..=1).contains(&x))
    }

    /// All entries in {-1, 1}.
    pub fn is_pm_one(&self) -> bool {
        self.data.iter().all(|&x| x == 1 || x == -1)
    }

    /// All entries in {0, 1}.
    pub fn is_zero_one(&self) -> bool {
        self.data.iter().all(|&x| x == 0 || x == 1)
    }

    pub fn has_zero_diagonal(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| self.get(i, i) == 0)
    }

    pub fn row_sums(&self) -> Vec<i64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.cols];
        for i in 0..self.rows {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += self.get(i, j);
            }
        }
        sums
    }

    pub fn is_regular(&self) -> bool {
        let rs = self.row_sums();
        let cs = self.col_sums();
        rs.iter().all(|&r| r == rs[0]) && cs.iter().all(|&c| c == cs[0])
    }

    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x as f64).collect(),
        }
    }
}

pub fn kronecker_int(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = IntMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij == 0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// A matrix parsed from the text format; integer files stay exact.
#[derive(Debug, Clone)]
pub enum ParsedMatrix {
    Int(IntMatrix),
    Real(RealMatrix),
}

impl ParsedMatrix {
    pub fn to_real(&self) -> RealMatrix {
        match self {
            ParsedMatrix::Int(m) => m.to_real(),
            ParsedMatrix::Real(m) => m.clone(),
        }
    }

    pub fn as_int(&self) -> Option<&IntMatrix> {
        match self {
            ParsedMatrix::Int(m) => Some(m),
            ParsedMatrix::Real(_) => None,
        }
    }
}

/// Parses the matrix text format: first line `m n`, then `m` lines of `n`
/// space-separated integers or decimals. Files whose every token parses as an
/// integer are kept exact.
pub fn parse_matrix_text(text: &str) -> Result<ParsedMatrix> {
    let mut offset = 0usize;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty matrix file"))?;
    let mut head_tokens = header.split_whitespace();
    let rows: usize = head_tokens
        .next()
        .ok_or_else(|| Error::parse(0, "missing row count"))?
        .parse()
        .map_err(|_| Error::parse(0, "row count is not a positive integer"))?;
    let cols: usize = head_tokens
        .next()
        .ok_or_else(|| Error::parse(header.len(), "missing column count"))?
        .parse()
        .map_err(|_| Error::parse(0, "column count is not a positive integer"))?;
    if head_tokens.next().is_some() {
        return Err(Error::parse(0, "header must be exactly `m n`"));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::parse(0, "matrix dimensions must be positive"));
    }
    offset += header.len() + 1;

    let mut ints: Vec<i64> = Vec::with_capacity(rows * cols);
    let mut reals: Vec<f64> = Vec::with_capacity(rows * cols);
    let mut all_int = true;
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(offset, format!("missing matrix row {}", r + 1)))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != cols {
            return Err(Error::parse(
                offset,
                format!("row {} has {} entries, expected {cols}", r + 1, tokens.len()),
            ));
        }
        for tok in tokens {
            if all_int {
                if let Ok(v) = tok.parse::<i64>() {
                    ints.push(v);
                    reals.push(v as f64);
                    continue;
                }
                all_int = false;
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(offset, format!("bad numeric token `{tok}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(offset, format!("non-finite entry `{tok}`")));
            }
            reals.push(v);
        }
        offset += line.len() + 1;
    }
    for extra in lines {
        if !extra.trim().is_empty() {
            return Err(Error::parse(offset, "trailing content after matrix rows"));
        }
        offset += extra.len() + 1;
    }
    if all_int {
        Ok(ParsedMatrix::Int(IntMatrix::new(rows, cols, ints)?))
    } else {
        Ok(ParsedMatrix::Real(RealMatrix::new(rows, cols, reals)?))
    }
}

pub fn write_matrix_text_int(m: &IntMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_matrix_text_real(m: &RealMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_entries() {
        assert!(RealMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn rejects_bad_shape() {
        assert!(RealMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(IntMatrix::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn kronecker_identity() {
        let i2 = RealMatrix::identity(2);
        let i3 = RealMatrix::identity(3);
        assert_eq!(kronecker(&i2, &i3), RealMatrix::identity(6));
    }

    #[test]
    fn parse_round_trip_int() {
        let m = IntMatrix::new(2, 3, vec![1, -1, 0, 0, 1, 1]).unwrap();
        let text = write_matrix_text_int(&m);
        match parse_matrix_text(&text).unwrap() {
            ParsedMatrix::Int(p) => assert_eq!(p, m),
            ParsedMatrix::Real(_) => panic!("integer file must stay exact"),
        }
    }

    #[test]
    fn parse_real_file() {
        let parsed = parse_matrix_text("1 2\n0.5 -1.25\n").unwrap();
        match parsed {
            ParsedMatrix::Real(m) => {
                assert_eq!(m.get(0, 0), 0.5);
                assert_eq!(m.get(0, 1), -1.25);
            }
            ParsedMatrix::Int(_) => panic!("decimal file must parse as real"),
        }
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let err = parse_matrix_text("2 2\n1 0\n1\n").unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert!(offset > 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn regular_detection() {
        let j = IntMatrix::from_fn(3, 3, |_, _| 1);
        assert!(j.is_regular());
        let mut m = j.clone();
        m.set(0, 0, 0);
        assert!(!m.is_regular());
    }
}
