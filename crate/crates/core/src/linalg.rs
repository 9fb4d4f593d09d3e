//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, SymmetricEigen};

/// Thin SVD with singular values sorted in descending order.
pub(crate) struct SortedSvd {
    pub u: Option<DMatrix<f64>>,
    pub singular_values: Vec<f64>,
    pub v_t: Option<DMatrix<f64>>,
}

/// Thin SVD through faer, whose bidiagonal SVD stays backward stable on nearly
/// rank-deficient inputs (nalgebra's can lose digits there).
pub(crate) fn sorted_svd(m: &DMatrix<f64>, want_u: bool, want_v: bool) -> SortedSvd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return SortedSvd {
            u: want_u.then(|| DMatrix::zeros(rows, 0)),
            singular_values: Vec::new(),
            v_t: want_v.then(|| DMatrix::zeros(0, cols)),
        };
    }
    let fm = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = fm.thin_svd().expect("SVD of a finite matrix");
    let values = svd.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let singular_values = order.iter().map(|&i| values[i]).collect();
    let u = want_u.then(|| {
        let fu = svd.U();
        DMatrix::from_fn(rows, k, |r, c| fu[(r, order[c])])
    });
    let v_t = want_v.then(|| {
        let fv = svd.V();
        DMatrix::from_fn(k, cols, |r, c| fv[(c, order[r])])
    });
    SortedSvd {
        u,
        singular_values,
        v_t,
    }
}

pub(crate) fn singular_values_desc(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    sorted_svd(m, false, false).singular_values
}

/// Largest singular value; zero for an empty matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values_desc(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with singular values above `rel_tol * sigma_max`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values_desc(m);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}

/// Eigen-decomposition of the D×D Gram `X·Xᵀ`, computed through whichever of
/// `X·Xᵀ` or `Xᵀ·X` is smaller. Returns eigenvalues in descending order and the
/// matching unit eigenvectors in R^D (only those with positive eigenvalue when
/// the N×N side was used).
pub(crate) fn gram_eigen(x: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (dd, n) = x.shape();
    if n == 0 {
        return (vec![0.0; dd], DMatrix::identity(dd, dd));
    }
    if dd <= n {
        let g = x * x.transpose();
        let (vals, vecs) = sorted_sym_eigen(g);
        (vals, vecs)
    } else {
        let g = x.transpose() * x;
        let (vals, w) = sorted_sym_eigen(g);
        let top = vals.first().copied().unwrap_or(0.0).max(0.0);
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] > 1e-14 * top && vals[i] > 0.0)
            .collect();
        let mut u = DMatrix::zeros(dd, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let col = x * w.column(i) / vals[i].sqrt();
            u.set_column(c, &col);
        }
        let mut all_vals: Vec<f64> = keep.iter().map(|&i| vals[i]).collect();
        all_vals.resize(dd, 0.0);
        (all_vals, u)
    }
}

/// Symmetric eigen-decomposition with eigenvalues sorted descending.
pub(crate) fn sorted_sym_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Flip column signs so the largest-magnitude entry of each column is positive.
pub(crate) fn canonicalize_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Binomial coefficient as f64 (exact for the desk-scale values used here).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}


/// Lexicographic k-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

pub(crate) fn combinations(n: usize, k: usize) -> Combinations {
    let current = if k <= n { Some((0..k).collect()) } else { None };
    Combinations { n, current }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        if k == 0 {
            self.current = None;
        }
        Some(out)
    }
}

#[cfg(test)]
mod combination_tests {
    use super::*;

    #[test]
    fn counts_match_binomials() {
        assert_eq!(combinations(8, 3).count(), 56);
        assert_eq!(combinations(5, 0).count(), 1);
        assert_eq!(combinations(3, 4).count(), 0);
        assert_eq!(
            combinations(4, 2).collect::<Vec<_>>(),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }
}
