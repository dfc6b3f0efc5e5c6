//! Integer matrices: Smith normal form with unimodular transforms and
//! exact ranks.

pub type IMat = Vec<Vec<i64>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smith {
    /// `left · a · right = diag`
    pub left: IMat,
    pub diag: IMat,
    pub right: IMat,
}

impl Smith {
    /// Nonzero diagonal entries, each dividing the next.
    pub fn invariant_factors(&self) -> Vec<i64> {
        (0..self.diag.len().min(self.diag.first().map_or(0, Vec::len)))
            .map(|i| self.diag[i][i])
            .take_while(|&d| d != 0)
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

pub fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

pub fn matmul(a: &IMat, b: &IMat) -> IMat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

fn swap_cols(m: &mut IMat, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

/// col_j ← col_j − q·col_i
fn sub_col(m: &mut IMat, j: usize, i: usize, q: i64) {
    for row in m.iter_mut() {
        row[j] -= q * row[i];
    }
}

/// row_j ← row_j − q·row_i
fn sub_row(m: &mut IMat, j: usize, i: usize, q: i64) {
    let src = m[i].clone();
    for (x, s) in m[j].iter_mut().zip(src) {
        *x -= q * s;
    }
}

pub fn smith_normal_form(a: &IMat) -> Smith {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut d = a.clone();
    let mut left = identity(rows);
    let mut right = identity(cols);

    for t in 0..rows.min(cols) {
        // pivot: smallest nonzero |entry| in the trailing block
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[i][j] != 0 && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return normalize(Smith { left, diag: d, right });
            };
            d.swap(t, pi);
            left.swap(t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut right, t, pj);

            let p = d[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = d[i][t].div_euclid(p);
                if q != 0 {
                    sub_row(&mut d, i, t, q);
                    sub_row(&mut left, i, t, q);
                }
                clean &= d[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = d[t][j].div_euclid(p);
                if q != 0 {
                    sub_col(&mut d, j, t, q);
                    sub_col(&mut right, j, t, q);
                }
                clean &= d[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| d[i][j] % p != 0);
            match bad {
                Some((i, _)) => {
                    // row_t ← row_t + row_i, then re-reduce
                    sub_row(&mut d, t, i, -1);
                    sub_row(&mut left, t, i, -1);
                }
                None => break,
            }
        }
    }
    normalize(Smith { left, diag: d, right })
}

fn normalize(mut s: Smith) -> Smith {
    let n = s.diag.len().min(s.diag.first().map_or(0, Vec::len));
    for i in 0..n {
        if s.diag[i][i] < 0 {
            for x in s.diag[i].iter_mut() {
                *x = -*x;
            }
            for x in s.left[i].iter_mut() {
                *x = -*x;
            }
        }
    }
    s
}

pub fn rank(a: &IMat) -> usize {
    smith_normal_form(a).rank()
}

/// Dimension of the common fixed space of integer matrices acting on `Q^n`.
pub fn fixed_space_dim(n: usize, ops: &[IMat]) -> usize {
    if ops.is_empty() {
        return n;
    }
    let mut stacked = Vec::with_capacity(n * ops.len());
    for m in ops {
        for (i, row) in m.iter().enumerate().take(n) {
            stacked.push((0..n).map(|j| row[j] - i64::from(i == j)).collect());
        }
    }
    n - rank(&stacked)
}
