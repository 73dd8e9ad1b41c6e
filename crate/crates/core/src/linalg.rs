//! Dense least squares by column-pivoted Householder QR.
//!
//! Signature feature matrices are highly collinear, so the solver detects
//! rank with a relative tolerance on the pivoted diagonal and, when the
//! matrix is rank deficient, returns the minimum-norm solution through a
//! complete orthogonal decomposition. No normal equations are formed.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::domain_err;
use crate::Result;

/// Least-squares outcome; `rank_deficient` flags a minimum-norm solve.
#[derive(Debug, Clone)]
pub struct LstsqResult {
    pub solution: Vec<f64>,
    pub rank: usize,
    pub rank_deficient: bool,
}

struct Matrix {
    data: Vec<f64>,
    cols: usize,
}

impl Matrix {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

// Applies the Householder reflector living in column `k`, rows `k..`, to a
// column vector stored in `target`.
fn apply_reflector(v: &[f64], beta: f64, target: &mut [f64], offset: usize) {
    let mut dot = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        dot += vi * target[offset + i];
    }
    let scale = beta * dot;
    for (i, &vi) in v.iter().enumerate() {
        target[offset + i] -= scale * vi;
    }
}

/// Minimizes `|A x - b|_2` for row-major `a` of shape `rows x cols`.
pub fn lstsq(a: &[f64], rows: usize, cols: usize, b: &[f64], rel_tol: f64) -> Result<LstsqResult> {
    if a.len() != rows * cols || b.len() != rows || rows == 0 || cols == 0 {
        return Err(domain_err!("inconsistent least-squares dimensions"));
    }
    let mut r = Matrix {
        data: a.to_vec(),
        cols,
    };
    let mut qtb = b.to_vec();
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);
    let mut diag = vec![0.0f64; steps];

    for k in 0..steps {
        // pivot on the remaining column of largest norm
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..cols {
            let mut s = 0.0;
            for i in k..rows {
                let v = r.get(i, j);
                s += v * v;
            }
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        if best != k {
            for i in 0..rows {
                let tmp = r.get(i, k);
                r.set(i, k, r.get(i, best));
                r.set(i, best, tmp);
            }
            perm.swap(k, best);
        }

        // Householder vector for column k
        let mut norm = 0.0;
        for i in k..rows {
            let v = r.get(i, k);
            norm += v * v;
        }
        let norm = libm::sqrt(norm);
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let x0 = r.get(k, k);
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; rows - k];
        for i in k..rows {
            v[i - k] = r.get(i, k);
        }
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            diag[k] = alpha;
            continue;
        }
        let beta = 2.0 / vtv;

        for j in k..cols {
            let mut col = vec![0.0; rows - k];
            for i in k..rows {
                col[i - k] = r.get(i, j);
            }
            apply_reflector(&v, beta, &mut col, 0);
            for i in k..rows {
                r.set(i, j, col[i - k]);
            }
        }
        apply_reflector(&v, beta, &mut qtb, k);
        r.set(k, k, alpha);
        for i in k + 1..rows {
            r.set(i, k, 0.0);
        }
        diag[k] = alpha;
    }

    let scale = libm::fabs(diag[0]);
    let mut rank = 0;
    while rank < steps && libm::fabs(diag[rank]) > rel_tol * scale && diag[rank] != 0.0 {
        rank += 1;
    }
    if rank == 0 {
        return Ok(LstsqResult {
            solution: vec![0.0; cols],
            rank: 0,
            rank_deficient: true,
        });
    }

    let mut x_perm = vec![0.0; cols];
    if rank == cols {
        // plain back substitution on the upper triangle
        for k in (0..cols).rev() {
            let mut acc = qtb[k];
            for j in k + 1..cols {
                acc -= r.get(k, j) * x_perm[j];
            }
            x_perm[k] = acc / r.get(k, k);
        }
    } else {
        // Complete orthogonal decomposition: QR-factor the transpose of the
        // leading `rank` rows, [R11 R12]^T = Q2 T2, giving
        // [R11 R12] = L Q2^T with L = T2^T lower triangular. The minimum-norm
        // solution is x = Q2 w with L w = (Q^T b)[..rank].
        let nrows = cols; // transposed block height
        let mut block = Matrix {
            data: vec![0.0; nrows * rank],
            cols: rank,
        };
        for i in 0..rank {
            for j in 0..cols {
                block.set(j, i, r.get(i, j));
            }
        }
        // explicit thin Q2 (cols x rank) accumulated from reflectors
        let mut q2: Vec<Vec<f64>> = (0..rank)
            .map(|j| {
                let mut e = vec![0.0; nrows];
                e[j] = 1.0;
                e
            })
            .collect();
        let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::new();
        for k in 0..rank {
            let mut norm = 0.0;
            for i in k..nrows {
                let v = block.get(i, k);
                norm += v * v;
            }
            let norm = libm::sqrt(norm);
            if norm == 0.0 {
                continue;
            }
            let x0 = block.get(k, k);
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let mut v = vec![0.0; nrows - k];
            for i in k..nrows {
                v[i - k] = block.get(i, k);
            }
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                continue;
            }
            let beta = 2.0 / vtv;
            for j in k..rank {
                let mut col = vec![0.0; nrows - k];
                for i in k..nrows {
                    col[i - k] = block.get(i, j);
                }
                apply_reflector(&v, beta, &mut col, 0);
                for i in k..nrows {
                    block.set(i, j, col[i - k]);
                }
            }
            block.set(k, k, alpha);
            for i in k + 1..nrows {
                block.set(i, k, 0.0);
            }
            reflectors.push((k, v, beta));
        }
        // Q2 columns: apply reflectors in reverse to unit vectors
        for col in q2.iter_mut() {
            for (k, v, beta) in reflectors.iter().rev() {
                apply_reflector(v, *beta, col, *k);
            }
        }
        // forward-substitute L w = qtb[..rank], L = T2^T so L[i][j] = T2[j][i]
        let mut w = vec![0.0; rank];
        for i in 0..rank {
            let mut acc = qtb[i];
            for j in 0..i {
                acc -= block.get(j, i) * w[j];
            }
            w[i] = acc / block.get(i, i);
        }
        for j in 0..cols {
            let mut acc = 0.0;
            for (k, q) in q2.iter().enumerate() {
                acc += q[j] * w[k];
            }
            x_perm[j] = acc;
        }
    }

    let mut solution = vec![0.0; cols];
    for (j, &p) in perm.iter().enumerate() {
        solution[p] = x_perm[j];
    }
    Ok(LstsqResult {
        solution,
        rank,
        rank_deficient: rank < cols,
    })
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(domain_err!("line fit needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(domain_err!("degenerate abscissae in line fit"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
