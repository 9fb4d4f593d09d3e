use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianConfig {
    /// Stop when an update moves less than this; points closer than this are coincident.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MedianConfig {
    fn default() -> Self {
        MedianConfig {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// Geometric median `argmin_m Σ ‖x_i − m‖` of the columns of `points`.
///
/// Weiszfeld's iteration started from the mean. When the iterate coincides with
/// data points of multiplicity `k`, it is optimal iff `‖Σ (x_j − m)/‖x_j − m‖‖ ≤ k`
/// over the remaining points; otherwise the Vardi–Zhang step leaves the point.
pub fn geometric_median(points: &DMatrix<f64>, cfg: &MedianConfig) -> DVector<f64> {
    let n = points.ncols();
    assert!(n > 0, "geometric median of an empty set");
    let mut m: DVector<f64> = points.column_mean();
    for _ in 0..cfg.max_iter {
        let mut weighted = DVector::zeros(points.nrows());
        let mut weight_sum = 0.0;
        let mut pull = DVector::zeros(points.nrows());
        let mut coincident = 0usize;
        let mut nearest = (f64::INFINITY, 0usize);
        for (j, col) in points.column_iter().enumerate() {
            let diff = col - &m;
            let dist = diff.norm();
            if dist < nearest.0 {
                nearest = (dist, j);
            }
            if dist <= cfg.tol {
                coincident += 1;
                continue;
            }
            weighted.axpy(1.0 / dist, &col, 1.0);
            weight_sum += 1.0 / dist;
            pull.axpy(1.0 / dist, &diff, 1.0);
        }
        if weight_sum == 0.0 {
            return points.column(nearest.1).into_owned();
        }
        let r = pull.norm();
        if coincident > 0 {
            if r <= coincident as f64 {
                return points.column(nearest.1).into_owned();
            }
        } else if r == 0.0 {
            return m;
        }
        let t = weighted / weight_sum;
        let eta = coincident as f64 / r;
        let next = if coincident > 0 {
            t * (1.0 - eta) + &m * eta
        } else {
            t
        };
        let moved = (&next - &m).norm();
        m = next;
        if moved < cfg.tol {
            break;
        }
    }
    m
}
