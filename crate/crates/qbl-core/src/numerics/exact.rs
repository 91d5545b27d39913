//! Exact linear algebra over the rationals.
//!
//! Ranks are computed by fraction-free (Bareiss) elimination over integers,
//! kernels and canonical subspace forms by rational reduced row echelon form.
//! Every answer produced here is exact; feasibility certificates elsewhere in
//! the crate rely on that.

use num::{BigInt, BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a/b"`, an integer string, or a plain decimal such as `"-1.25"`.
/// Decimal forms convert exactly (no float round trip).
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::param("empty rational literal".to_string()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("bad numerator in rational '{s}'")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("bad denominator in rational '{s}'")))?;
        if d.is_zero() {
            return Err(Error::param(format!("zero denominator in rational '{s}'")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') {
            -1i32
        } else {
            1
        };
        let int_digits = int_part.trim_start_matches(['+', '-']);
        let int_val: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits
                .parse()
                .map_err(|_| Error::param(format!("bad decimal '{s}'")))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::param(format!("bad decimal '{s}'")));
        }
        let frac_val: BigInt = frac_part
            .parse()
            .map_err(|_| Error::param(format!("bad decimal '{s}'")))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let mag = Rat::from_integer(int_val) + Rat::new(frac_val, scale);
        return Ok(if sign < 0 { -mag } else { mag });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::param(format!("bad rational '{s}'")))?;
    Ok(Rat::from_integer(n))
}

/// Canonical text form: `"a"` for integers, `"a/b"` otherwise, `b > 0`.
pub fn rational_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a quotient of coarse approximations for
        // denominators outside f64 range.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn rat_from_f64(x: f64) -> Option<Rat> {
    BigRational::from_f64(x)
}

/// Dense row-major matrix over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        RatMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix::new(rows, cols, vec![Rat::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix::new(r, c, rows.iter().flatten().cloned().collect())
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let owned: Vec<Vec<Rat>> = rows
            .iter()
            .map(|row| row.iter().map(|&v| rat_int(v)).collect())
            .collect();
        RatMatrix::from_rows(&owned)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row_vec(&self, r: usize) -> Vec<Rat> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col_vec(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.at(r, c).clone());
            }
        }
        t
    }

    pub fn matmul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let add = a * other.at(k, c);
                    if !add.is_zero() {
                        let cur = out.at(r, c).clone();
                        out.set(r, c, cur + add);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "mul_vec shape");
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.at(r, c) * &v[c])
                    .fold(Rat::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.rows, other.rows, "hstack shape");
        let mut out = RatMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.at(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.at(r, c).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |r, c| rat_to_f64(self.at(r, c)))
    }

    /// Rank by fraction-free elimination: rows are cleared to integers, then
    /// reduced with the Bareiss update so every intermediate entry stays an
    /// exact integer minor.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let mut m: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|r| {
                let mut lcm = BigInt::one();
                for c in 0..self.cols {
                    lcm = num::integer::lcm(lcm, self.at(r, c).denom().clone());
                }
                (0..self.cols)
                    .map(|c| {
                        let v = self.at(r, c);
                        v.numer() * (&lcm / v.denom())
                    })
                    .collect()
            })
            .collect();
        let mut rank = 0usize;
        let mut prev = BigInt::one();
        for col in 0..self.cols {
            let Some(pivot_row) = (rank..self.rows).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, pivot_row);
            let pivot = m[rank][col].clone();
            for r in rank + 1..self.rows {
                for c in col + 1..self.cols {
                    let num = &m[r][c] * &pivot - &m[r][col] * &m[rank][c];
                    debug_assert!((&num % &prev).is_zero(), "Bareiss division not exact");
                    m[r][c] = num / &prev;
                }
                m[r][col] = BigInt::zero();
            }
            prev = pivot;
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Reduced row echelon form with its pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pivot_row) = (row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            if pivot_row != row {
                for c in 0..m.cols {
                    let a = m.at(row, c).clone();
                    let b = m.at(pivot_row, c).clone();
                    m.set(row, c, b);
                    m.set(pivot_row, c, a);
                }
            }
            let inv = m.at(row, col).clone();
            for c in col..m.cols {
                let v = m.at(row, c) / &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for c in col..m.cols {
                    let v = m.at(r, c) - &factor * m.at(row, c);
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }
}

/// Kernel of a matrix as a subspace of its column-index space.
pub fn kernel_of(m: &RatMatrix) -> Subspace {
    let (r, pivots) = m.rref();
    let n = m.cols();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis_cols: Vec<Vec<Rat>> = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![Rat::zero(); n];
        v[f] = Rat::one();
        for (prow, &pcol) in pivots.iter().enumerate() {
            v[pcol] = -r.at(prow, f).clone();
        }
        basis_cols.push(v);
    }
    Subspace::from_generator_columns(n, &basis_cols)
}

/// Linear subspace of a fixed ambient rational space, stored by a canonical
/// basis: the nonzero rows of the RREF of any generating set, kept as columns.
/// Equality of subspaces is therefore literal equality of the stored form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    /// ambient x dim; column k is the k-th canonical basis vector.
    basis: RatMatrix,
    /// Leading coordinate of each canonical basis vector, strictly increasing.
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: RatMatrix::zeros(ambient, 0),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: RatMatrix::identity(ambient),
            pivots: (0..ambient).collect(),
        }
    }

    pub fn coordinate(ambient: usize, indices: &[usize]) -> Self {
        let cols: Vec<Vec<Rat>> = indices
            .iter()
            .map(|&i| {
                assert!(i < ambient, "coordinate index in range");
                let mut v = vec![Rat::zero(); ambient];
                v[i] = Rat::one();
                v
            })
            .collect();
        Subspace::from_generator_columns(ambient, &cols)
    }

    /// Span of the given generator columns (each of length `ambient`).
    pub fn from_generator_columns(ambient: usize, cols: &[Vec<Rat>]) -> Self {
        for c in cols {
            assert_eq!(c.len(), ambient, "generator length");
        }
        let gen_rows = RatMatrix::from_rows(cols);
        let gen_rows = if cols.is_empty() {
            RatMatrix::zeros(0, ambient)
        } else {
            gen_rows
        };
        let (r, pivots) = gen_rows.rref();
        let dim = pivots.len();
        let mut basis = RatMatrix::zeros(ambient, dim);
        for k in 0..dim {
            for c in 0..ambient {
                basis.set(c, k, r.at(k, c).clone());
            }
        }
        Subspace {
            ambient,
            basis,
            pivots,
        }
    }

    pub fn from_matrix_columns(m: &RatMatrix) -> Self {
        let cols: Vec<Vec<Rat>> = (0..m.cols()).map(|c| m.col_vec(c)).collect();
        Subspace::from_generator_columns(m.rows(), &cols)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Canonical basis, columns are basis vectors.
    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        let mut cols: Vec<Vec<Rat>> = (0..self.dim()).map(|c| self.basis.col_vec(c)).collect();
        cols.extend((0..other.dim()).map(|c| other.basis.col_vec(c)));
        Subspace::from_generator_columns(self.ambient, &cols)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        // Solve U x = V y via the kernel of [U | -V]; U x then spans the
        // intersection.
        let mut neg_v = other.basis.clone();
        for r in 0..neg_v.rows() {
            for c in 0..neg_v.cols() {
                let v = -neg_v.at(r, c).clone();
                neg_v.set(r, c, v);
            }
        }
        let stacked = self.basis.hstack(&neg_v);
        let ker = kernel_of(&stacked);
        let k = self.dim();
        let cols: Vec<Vec<Rat>> = (0..ker.dim())
            .map(|t| {
                let kv = ker.basis.col_vec(t);
                self.basis.mul_vec(&kv[..k])
            })
            .collect();
        Subspace::from_generator_columns(self.ambient, &cols)
    }

    /// Image of this subspace under a linear map given by `m` (rows x ambient).
    pub fn image(&self, m: &RatMatrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient, "map domain mismatch");
        let cols: Vec<Vec<Rat>> = (0..self.dim())
            .map(|c| m.mul_vec(&self.basis.col_vec(c)))
            .collect();
        Subspace::from_generator_columns(m.rows(), &cols)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ambient, "vector length");
        let ext = self.basis.hstack(&RatMatrix::new(self.ambient, 1, v.to_vec()));
        ext.rank() == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        other.basis.hstack(&self.basis).rank() == other.dim()
    }

    /// Deterministic search ordering: dimension, then pivot pattern, then the
    /// canonical basis entries.
    pub fn sort_key(&self) -> (usize, Vec<usize>, Vec<(BigInt, BigInt)>) {
        let entries = self
            .basis
            .entries()
            .iter()
            .map(|r| (r.numer().clone(), r.denom().clone()))
            .collect();
        (self.dim(), self.pivots.clone(), entries)
    }

    /// Short display such as `span{(1, 0, 0), (0, 1, 0)}`.
    pub fn describe(&self) -> String {
        if self.dim() == 0 {
            return "{0}".to_string();
        }
        let vecs: Vec<String> = (0..self.dim())
            .map(|c| {
                let coords: Vec<String> = self
                    .basis
                    .col_vec(c)
                    .iter()
                    .map(rational_to_string)
                    .collect();
                format!("({})", coords.join(", "))
            })
            .collect();
        format!("span{{{}}}", vecs.join(", "))
    }
}

/// Fails unless `w` is in [0, 1].
pub fn check_unit_interval(w: &Rat) -> bool {
    !w.is_negative() && w <= &Rat::one()
}
