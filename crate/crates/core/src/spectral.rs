//! Eigendecomposition of `H0` and edge-state identification.
//!
//! The symmetric tridiagonal eigenproblem is solved with the implicit-shift QL
//! iteration (EISPACK `tql2`). Small dense symmetric matrices are first reduced
//! to tridiagonal form by Householder reflections (`tred2`) and then handed to
//! the same QL core.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::HamiltonianMatrix;
use crate::state::State;

const MAX_QL_ITERATIONS: usize = 64;

/// Eigenvalues in ascending order with matching phase-canonical eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    edge_left: Option<usize>,
    edge_right: Option<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    /// Amplitudes `b_{j,i}` of eigenstate `i` over sites `j`.
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i]
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn eigenstate(&self, i: usize) -> State {
        State::from_real(&self.eigenvectors[i])
    }

    /// Index of `|Edge₁⟩` once edges have been labeled.
    pub fn edge_left(&self) -> Option<usize> {
        self.edge_left
    }

    /// Index of `|Edge_N⟩` once edges have been labeled.
    pub fn edge_right(&self) -> Option<usize> {
        self.edge_right
    }

    /// Runs [`identify_edge_states`] and records the labels on `self`.
    pub fn label_edges(&mut self, threshold: f64) -> Result<EdgePair> {
        let pair = identify_edge_states(self, threshold)?;
        self.edge_left = pair.left_index;
        self.edge_right = pair.right_index;
        Ok(pair)
    }

    /// Column matrix `V` with `V[(j, i)] = b_{j,i}`.
    pub fn vector_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |j, i| self.eigenvectors[i][j])
    }

    /// `Σ c_i |λ_i⟩⟨λ_i|` as a dense matrix.
    pub fn operator_from_coefficients(&self, coefficients: &[f64]) -> DMatrix<f64> {
        let v = self.vector_matrix();
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |j, i| v[(j, i)] * coefficients[i]);
        scaled * v.transpose()
    }

    /// `max_i ‖H vᵢ − λᵢ vᵢ‖∞`.
    pub fn max_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let hv = h.apply(&State::from_real(v));
            for (x, y) in hv.iter().zip(v) {
                worst = worst.max((x.re - lambda * y).abs());
            }
        }
        worst
    }

    /// `max |VᵀV − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let v = self.vector_matrix();
        let g = v.transpose() * &v - DMatrix::identity(self.dim(), self.dim());
        g.abs().max()
    }

    /// `max |V·diag(λ)·Vᵀ − H|`.
    pub fn reconstruction_error(&self, h: &HamiltonianMatrix) -> f64 {
        (self.operator_from_coefficients(&self.eigenvalues) - h.to_dense()).abs().max()
    }
}

/// The two boundary-localized eigenstates.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Eigenstate indices; `None` when the pair was re-mixed out of a degenerate doublet.
    pub left_index: Option<usize>,
    pub right_index: Option<usize>,
    /// `|b₁|²` of the left state.
    pub left_boundary_probability: f64,
    /// `|b_N|²` of the right state.
    pub right_boundary_probability: f64,
}

impl EdgePair {
    pub fn left_state(&self) -> State {
        State::from_real(&self.left)
    }

    pub fn right_state(&self) -> State {
        State::from_real(&self.right)
    }
}

pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let mut d = h.diagonal().to_vec();
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(h.offdiagonal());
    let mut v = DMatrix::identity(n, n);
    tql2(&mut d, &mut e, &mut v)?;
    Ok(sorted_canonical(d, &v))
}

/// Eigenvalues and eigenvectors of a dense real symmetric matrix (only the lower triangle is read).
pub fn dense_symmetric_eigen(a: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut v = DMatrix::from_fn(n, n, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)] });
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n > 0 {
        tred2(&mut v, &mut d, &mut e);
        tql2(&mut d, &mut e, &mut v)?;
    }
    Ok(sorted_canonical(d, &v))
}

fn sorted_canonical(d: Vec<f64>, v: &DMatrix<f64>) -> SpectralDecomposition {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = v.column(i).iter().copied().collect();
            canonicalize_phase(&mut col);
            col
        })
        .collect();
    SpectralDecomposition { eigenvalues, eigenvectors, edge_left: None, edge_right: None }
}

/// Flip the sign so the largest-magnitude component (lowest index on ties) is positive.
fn canonicalize_phase(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Householder reduction of the symmetric matrix held in `v` to tridiagonal form.
/// On exit `d` holds the diagonal, `e[1..]` the subdiagonal and `v` the orthogonal transform.
fn tred2(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal matrix (`d`, `e[1..]`), accumulating rotations into `v`.
fn tql2(d: &mut [f64], e: &mut [f64], v: &mut DMatrix<f64>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { index: l, iterations: MAX_QL_ITERATIONS });
                }

                // Wilkinson-style shift from the leading 2x2 block.
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v[(k, i + 1)];
                        let vk = v[(k, i)];
                        v[(k, i + 1)] = s * vk + c * vk1;
                        v[(k, i)] = c * vk - s * vk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `|v₁|² + |v_N|²`.
pub fn boundary_weight(v: &[f64]) -> f64 {
    match v {
        [] => 0.0,
        [only] => only * only,
        [first, .., last] => first * first + last * last,
    }
}

/// Degeneracy window below which two edge candidates are re-mixed.
const DEGENERACY_TOLERANCE: f64 = 1e-8;
/// Probability on the weaker end that counts as "weight on both ends".
const TWO_ENDED_WEIGHT: f64 = 1e-6;

pub fn identify_edge_states(d: &SpectralDecomposition, threshold: f64) -> Result<EdgePair> {
    let candidates: Vec<usize> =
        (0..d.dim()).filter(|&i| boundary_weight(d.eigenvector(i)) > threshold).collect();
    let (a, b) = match candidates[..] {
        [] => return Err(Error::NoEdgeStates { threshold }),
        [a, b] => (a, b),
        _ => return Err(Error::AmbiguousEdgeStates { count: candidates.len(), threshold }),
    };

    let n = d.dim();
    let first_prob = |v: &[f64]| v[0] * v[0];
    let last_prob = |v: &[f64]| v[n - 1] * v[n - 1];
    let two_ended = |v: &[f64]| first_prob(v).min(last_prob(v)) > TWO_ENDED_WEIGHT;

    let (va, vb) = (d.eigenvector(a), d.eigenvector(b));
    let degenerate = (d.eigenvalue(a) - d.eigenvalue(b)).abs() < DEGENERACY_TOLERANCE;

    let (left, right, left_index, right_index) = if degenerate && two_ended(va) && two_ended(vb) {
        // Rotate within the doublet so one combination has no amplitude at site N.
        let phi = (-va[n - 1]).atan2(vb[n - 1]);
        let (s, c) = phi.sin_cos();
        let mut u: Vec<f64> = va.iter().zip(vb).map(|(x, y)| c * x + s * y).collect();
        let mut w: Vec<f64> = va.iter().zip(vb).map(|(x, y)| -s * x + c * y).collect();
        canonicalize_phase(&mut u);
        canonicalize_phase(&mut w);
        (u, w, None, None)
    } else if first_prob(va) > last_prob(va) && first_prob(vb) <= last_prob(vb) {
        (va.to_vec(), vb.to_vec(), Some(a), Some(b))
    } else if first_prob(vb) > last_prob(vb) && first_prob(va) <= last_prob(va) {
        (vb.to_vec(), va.to_vec(), Some(b), Some(a))
    } else {
        // Both candidates sit on the same end.
        return Err(Error::AmbiguousEdgeStates { count: 2, threshold });
    };

    Ok(EdgePair {
        left_boundary_probability: first_prob(&left),
        right_boundary_probability: last_prob(&right),
        left,
        right,
        left_index,
        right_index,
    })
}

/// Residual amplitude of each edge state at the opposite boundary.
pub fn edge_tail_epsilon(pair: &EdgePair) -> f64 {
    let n = pair.left.len();
    pair.right[0].abs().max(pair.left[n - 1].abs())
}
