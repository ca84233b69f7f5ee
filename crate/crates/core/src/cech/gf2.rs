//! Dense linear algebra over GF(2), rows packed into `u64` words.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / 64] ^= 1 << (c % 64);
    }

    fn xor_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        for k in 0..w {
            let v = self.data[src * w + k];
            self.data[dst * w + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            let w = self.words;
            for k in 0..w {
                self.data.swap(a * w + k, b * w + k);
            }
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn mul_vec(&self, x: &[bool]) -> Vec<bool> {
        (0..self.rows).map(|r| (0..self.cols).filter(|&c| self.get(r, c) && x[c]).count() % 2 == 1).collect()
    }

    pub fn mul(&self, other: &Gf2Matrix) -> Gf2Matrix {
        let mut out = Gf2Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in (0..self.cols).filter(|&k| self.get(r, k)) {
                for c in (0..other.cols).filter(|&c| other.get(k, c)) {
                    out.flip(r, c);
                }
            }
        }
        out
    }

    /// Some `x` with `A x = b`, if one exists.
    pub fn solve(&self, b: &[bool]) -> Option<Vec<bool>> {
        let mut aug = Gf2Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, b[r]);
        }
        let pivots = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![false; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols);
        }
        Some(x)
    }

    /// Basis of the null space.
    pub fn kernel(&self) -> Vec<Vec<bool>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![false; self.cols];
                v[f] = true;
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = m.get(r, f);
                }
                v
            })
            .collect()
    }

    /// Canonical representative of `b` modulo the column space: the residue
    /// after eliminating against a reduced basis of the image.
    pub fn reduce_mod_image(&self, b: &[bool]) -> Vec<bool> {
        let mut t = self.transpose();
        let pivots = t.rref();
        let mut out = b.to_vec();
        for (r, &c) in pivots.iter().enumerate() {
            if out[c] {
                for k in 0..self.rows {
                    out[k] ^= t.get(r, k);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[u8]]) -> Gf2Matrix {
        let mut m = Gf2Matrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v == 1);
            }
        }
        m
    }

    #[test]
    fn rank_solve_kernel() {
        let a = from_rows(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let x = a.solve(&[true, false, true]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![true, false, true]);
        assert!(a.solve(&[true, false, false]).is_none());
        let k = a.kernel();
        assert_eq!(k, vec![vec![true, true, true]]);
        let red = a.reduce_mod_image(&[true, false, true]);
        assert_eq!(red, vec![false; 3]);
        assert_eq!(a.reduce_mod_image(&[true, false, false]), a.reduce_mod_image(&[false, true, false]));
    }

    #[test]
    fn wide_rows() {
        let mut a = Gf2Matrix::zeros(2, 130);
        a.set(0, 129, true);
        a.set(1, 64, true);
        a.set(1, 129, true);
        assert_eq!(a.rank(), 2);
        assert!(a.get(1, 64) && !a.get(1, 65));
        assert_eq!(a.transpose().transpose(), a);
    }
}
