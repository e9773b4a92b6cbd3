//! Banded Gaussian elimination with partial pivoting.

use num_complex::Complex64;

type C64 = Complex64;

#[derive(Debug, Clone)]
struct Row {
    lo: usize,
    v: Vec<C64>,
}

impl Row {
    fn get(&self, c: usize) -> C64 {
        if c >= self.lo && c < self.lo + self.v.len() {
            self.v[c - self.lo]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    fn hi(&self) -> usize {
        self.lo + self.v.len()
    }

    fn extend_to(&mut self, lo: usize, hi: usize) {
        if lo < self.lo {
            let mut v = vec![C64::new(0.0, 0.0); self.lo - lo];
            v.extend_from_slice(&self.v);
            self.v = v;
            self.lo = lo;
        }
        if hi > self.hi() {
            self.v.resize(hi - self.lo, C64::new(0.0, 0.0));
        }
    }
}

/// Sparse-row square system; rows are given as `(first column, values)`.
#[derive(Debug, Clone)]
pub struct BandSystem {
    rows: Vec<Row>,
}

/// Elimination met a pivot below the relative threshold in this column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    pub column: usize,
}

impl BandSystem {
    pub fn new(n: usize) -> Self {
        Self {
            rows: vec![Row { lo: 0, v: Vec::new() }; n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn set_row(&mut self, r: usize, lo: usize, values: Vec<C64>) {
        self.rows[r] = Row { lo, v: values };
    }

    /// Solves `A x = b`, consuming the system.
    pub fn solve(mut self, mut b: Vec<C64>) -> Result<Vec<C64>, Singular> {
        let n = self.rows.len();
        assert_eq!(b.len(), n);
        let scale = self
            .rows
            .iter()
            .flat_map(|r| r.v.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let tol = 1e-13 * scale;
        let reach = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| r.saturating_sub(row.lo))
            .max()
            .unwrap_or(0);
        for j in 0..n {
            let end = (j + reach + 1).min(n);
            let (mut p, mut best) = (j, 0.0);
            for r in j..end {
                let v = self.rows[r].get(j).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tol) {
                return Err(Singular { column: j });
            }
            self.rows.swap(j, p);
            b.swap(j, p);
            let pivot_row = self.rows[j].clone();
            let pivot = pivot_row.get(j);
            for r in j + 1..end {
                let a = self.rows[r].get(j);
                if a.norm() == 0.0 {
                    continue;
                }
                let l = a / pivot;
                let row = &mut self.rows[r];
                row.extend_to(j.min(row.lo), pivot_row.hi());
                for c in j..pivot_row.hi() {
                    let pv = pivot_row.get(c);
                    row.v[c - row.lo] -= l * pv;
                }
                row.v[j - row.lo] = C64::new(0.0, 0.0);
                let bj = b[j];
                b[r] -= l * bj;
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for j in (0..n).rev() {
            let row = &self.rows[j];
            let mut s = b[j];
            for c in j + 1..row.hi().min(n) {
                s -= row.get(c) * x[c];
            }
            x[j] = s / row.get(j);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_with_pivoting() {
        // [[0,1,0],[2,3,1],[0,4,5]] x = [2, 11, 23] -> x = [1, 2, 3]
        let c = |v: f64| C64::new(v, 0.0);
        let mut s = BandSystem::new(3);
        s.set_row(0, 0, vec![c(0.0), c(1.0)]);
        s.set_row(1, 0, vec![c(2.0), c(3.0), c(1.0)]);
        s.set_row(2, 1, vec![c(4.0), c(5.0)]);
        let x = s.solve(vec![c(2.0), c(11.0), c(23.0)]).unwrap();
        for (xi, e) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((xi - c(e)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_row_is_singular() {
        let c = |v: f64| C64::new(v, 0.0);
        let mut s = BandSystem::new(2);
        s.set_row(0, 0, vec![c(0.0), c(0.0)]);
        s.set_row(1, 0, vec![c(1.0), c(1.0)]);
        assert!(s.solve(vec![c(1.0), c(1.0)]).is_err());
    }
}
