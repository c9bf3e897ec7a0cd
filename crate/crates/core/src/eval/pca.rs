//! Two-component principal component analysis with a hand-rolled cyclic
//! Jacobi eigensolver (the covariance matrices here are at most 12×12).

use super::EvalError;
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

/// Fitted 2-D PCA projection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pca2 {
    pub mean: Vec<f64>,
    /// The two leading principal directions, unit length.
    pub components: [Vec<f64>; 2],
    /// Their eigenvalues (sample variances along the components).
    pub eigenvalues: [f64; 2],
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi sweeps.
/// Returns (eigenvalues, eigenvectors as columns), descending.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = Array2::eye(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, col]] = v[[k, i]];
        }
    }
    (eigenvalues, vectors)
}

impl Pca2 {
    /// Fit the top-2 principal directions of the mean-centered data.
    pub fn fit(data: &Array2<f64>) -> Result<Self, EvalError> {
        let n = data.nrows();
        let d = data.ncols();
        if n < 3 {
            return Err(EvalError::TooFew { need: 3, got: n });
        }
        let mean = data.mean_axis(Axis(0)).expect("non-empty");
        let mut cov = Array2::zeros((d, d));
        for row in data.rows() {
            let centered = &row.to_owned() - &mean;
            for i in 0..d {
                for j in i..d {
                    cov[[i, j]] += centered[i] * centered[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                cov[[i, j]] /= (n - 1) as f64;
                cov[[j, i]] = cov[[i, j]];
            }
        }
        let (eigenvalues, vectors) = symmetric_eigen(&cov);
        let trace: f64 = eigenvalues.iter().map(|e| e.abs()).sum();
        if eigenvalues.len() < 2 || eigenvalues[1] <= 1e-12 * trace.max(1e-300) {
            return Err(EvalError::RankDeficient);
        }
        let mut components: [Vec<f64>; 2] = [vec![0.0; d], vec![0.0; d]];
        for c in 0..2 {
            let mut comp: Vec<f64> = (0..d).map(|k| vectors[[k, c]]).collect();
            // Deterministic sign: largest-magnitude entry positive.
            let lead = comp
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            if comp[lead] < 0.0 {
                comp.iter_mut().for_each(|x| *x = -*x);
            }
            components[c] = comp;
        }
        Ok(Pca2 {
            mean: mean.to_vec(),
            components,
            eigenvalues: [eigenvalues[0], eigenvalues[1]],
        })
    }

    /// Project rows onto the two components.
    pub fn project(&self, data: &Array2<f64>) -> Result<Array2<f64>, EvalError> {
        let d = self.mean.len();
        if data.ncols() != d {
            return Err(EvalError::DimensionMismatch(format!(
                "{} vs {} columns",
                data.ncols(),
                d
            )));
        }
        let mut out = Array2::zeros((data.nrows(), 2));
        for (r, row) in data.rows().into_iter().enumerate() {
            for c in 0..2 {
                let mut dot = 0.0;
                for k in 0..d {
                    dot += (row[k] - self.mean[k]) * self.components[c][k];
                }
                out[[r, c]] = dot;
            }
        }
        Ok(out)
    }

    pub fn project_point(&self, point: &[f64]) -> Result<(f64, f64), EvalError> {
        let m = Array2::from_shape_vec((1, point.len()), point.to_vec())
            .map_err(|e| EvalError::DimensionMismatch(e.to_string()))?;
        let p = self.project(&m)?;
        Ok((p[[0, 0]], p[[0, 1]]))
    }
}

#[allow(unused)]
fn variance(col: &Array1<f64>) -> f64 {
    let mean = col.mean().unwrap_or(0.0);
    col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (col.len() - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    /// 5-D data with a known covariance built from an explicit orthonormal
    /// frame, so the analytic eigenvectors are available.
    fn synthetic_known_covariance() -> (Array2<f64>, Vec<Vec<f64>>, Vec<f64>) {
        let d = 5;
        // Orthonormal directions from Gram-Schmidt on a fixed basis.
        let raw = [
            vec![1.0, 1.0, 0.0, 0.0, 1.0],
            vec![1.0, -1.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 1.0, -1.0],
            vec![1.0, 0.0, -1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0, 1.0],
        ];
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for r in raw {
            let mut v = r.clone();
            for b in &basis {
                let dot: f64 = v.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
                for k in 0..d {
                    v[k] -= dot * b[k];
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            basis.push(v.iter().map(|x| x / norm).collect());
        }
        let scales = [4.0, 2.0, 1.0, 0.5, 0.25];
        let mut rng = derive_stream(42, "pca.synth", 0);
        let n = 20_000;
        let mut data = Array2::zeros((n, d));
        for i in 0..n {
            for (k, b) in basis.iter().enumerate() {
                let z: f64 = rng.sample::<f64, _>(StandardNormal) * scales[k];
                for c in 0..d {
                    data[[i, c]] += z * b[c];
                }
            }
        }
        (
            data,
            basis,
            scales.iter().map(|s| s * s).collect::<Vec<f64>>(),
        )
    }

    #[test]
    fn recovers_analytic_eigenvectors_up_to_sign() {
        let (data, basis, variances) = synthetic_known_covariance();
        let pca = Pca2::fit(&data).unwrap();
        for c in 0..2 {
            let dot: f64 = pca.components[c]
                .iter()
                .zip(basis[c].iter())
                .map(|(a, b)| a * b)
                .sum();
            assert!(dot.abs() > 0.99, "component {c}: |dot| = {}", dot.abs());
            let rel = (pca.eigenvalues[c] - variances[c]).abs() / variances[c];
            assert!(rel < 0.1, "eigenvalue {c}: rel = {rel}");
        }
    }

    #[test]
    fn projected_variances_equal_top_eigenvalues() {
        let (data, _, _) = synthetic_known_covariance();
        let pca = Pca2::fit(&data).unwrap();
        let proj = pca.project(&data).unwrap();
        for c in 0..2 {
            let col = proj.column(c).to_owned();
            let v = variance(&col);
            let rel = (v - pca.eigenvalues[c]).abs() / pca.eigenvalues[c];
            assert!(rel < 1e-9, "component {c}: rel = {rel}");
        }
    }

    #[test]
    fn dataset_mean_projects_to_origin() {
        let (data, _, _) = synthetic_known_covariance();
        let pca = Pca2::fit(&data).unwrap();
        let (x, y) = pca.project_point(&pca.mean.clone()).unwrap();
        assert_eq!((x, y), (0.0, 0.0));
    }

    #[test]
    fn rank_deficient_data_is_rejected() {
        let mut rng = derive_stream(1, "pca.rank", 0);
        // All rows on a single line.
        let mut data = Array2::zeros((50, 3));
        for i in 0..50 {
            let t: f64 = rng.random();
            data[[i, 0]] = t;
            data[[i, 1]] = 2.0 * t;
            data[[i, 2]] = -t;
        }
        assert!(matches!(Pca2::fit(&data), Err(EvalError::RankDeficient)));
    }

    #[test]
    fn jacobi_matches_known_eigenvalues() {
        let m = ndarray::array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // Columns are unit eigenvectors.
        for c in 0..2 {
            let v = [vecs[[0, c]], vecs[[1, c]]];
            let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
