//! Dense square integer matrices for Rauzy-Veech products.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![BigInt::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// `I + E_{row,col}`.
    pub fn elementary(n: usize, row: usize, col: usize) -> Self {
        let mut m = Self::identity(n);
        m.data[row * n + col] += 1;
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix must be square");
            data.extend(r);
        }
        IntMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// In-place right multiplication by `I + E_{row,col}`: column `col` += column `row`.
    pub fn add_column(&mut self, from: usize, to: usize) {
        for i in 0..self.n {
            let v = self.data[i * self.n + from].clone();
            self.data[i * self.n + to] += v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.data[j * self.n + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(BigRational::zero(), |acc, j| {
                    let a = self.get(i, j);
                    if a.is_zero() {
                        acc
                    } else {
                        acc + v[j].clone() * BigRational::from_integer(a.clone())
                    }
                })
            })
            .collect()
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = self.data.iter().map(crate::scalar::bigint_to_f64).collect();
        (0..self.n).map(|i| (0..self.n).map(|j| f[i * self.n + j] * v[j]).sum()).collect()
    }

    pub fn min_entry(&self) -> BigInt {
        self.data.iter().min().cloned().unwrap_or_default()
    }

    pub fn max_entry(&self) -> BigInt {
        self.data.iter().max().cloned().unwrap_or_default()
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|v| v.is_positive())
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    /// Fraction-free Gaussian elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    let (q, r) = v.div_rem(&prev);
                    debug_assert!(r.is_zero());
                    a[i][j] = q;
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.data.chunks(self.n) {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Serialized as rows of decimal strings so that entries of any size survive JSON.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .data
            .chunks(self.n.max(1))
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let n = rows.len();
        let mut parsed = Vec::with_capacity(n);
        for r in rows {
            if r.len() != n {
                return Err(serde::de::Error::custom("matrix must be square"));
            }
            let row: Result<Vec<BigInt>, _> = r.iter().map(|s| s.parse::<BigInt>()).collect();
            parsed.push(row.map_err(serde::de::Error::custom)?);
        }
        Ok(IntMatrix::from_rows(parsed))
    }
}
