//! Dense symmetric eigenvalues, singular values of rectangular matrices, and
//! exact integer Gram products. Everything downstream feeds off this module.
//!
//! The solver is the classic pair: Householder reduction to tridiagonal form
//! followed by QL iteration with implicit shifts, eigenvalues only.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{IntMatrix, RealMatrix};
use serde::Serialize;

const MAX_QL_ITER: usize = 60;

/// Householder reduction of a symmetric matrix (row-major, lower triangle
/// used) to tridiagonal form. `d` receives the diagonal, `e[1..]` the
/// subdiagonal; `a` is destroyed.
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i; // row i has entries 0..=l-1 below the diagonal
        let mut h = 0.0;
        if l > 1 {
            let mut scale = 0.0;
            for k in 0..l {
                scale += a[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = a[i * n + l - 1];
            } else {
                for k in 0..l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l - 1];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l - 1] = f - g;
                let mut f_acc = 0.0;
                for j in 0..l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l - 1];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
}

/// QL iteration with implicit shifts on a tridiagonal matrix. `d` holds the
/// diagonal on entry and the eigenvalues on exit; `e[1..]` the subdiagonal.
fn ql_implicit(d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(Error::Precision(
                    "QL iteration failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of the symmetric matrix stored row-major in `a` (destroyed),
/// written to `d` in descending order. `e` is scratch of length `n`.
pub(crate) fn eig_symmetric_in_place(
    a: &mut [f64],
    n: usize,
    d: &mut [f64],
    e: &mut [f64],
) -> Result<()> {
    debug_assert!(a.len() >= n * n && d.len() >= n && e.len() >= n);
    if n == 1 {
        d[0] = a[0];
        return Ok(());
    }
    tridiagonalize(a, n, d, e);
    ql_implicit(d, e, n)?;
    d[..n].sort_by(|x, y| y.total_cmp(x));
    Ok(())
}

/// Descending eigenvalues of a symmetric square matrix.
///
/// The input must be square and symmetric within `1e-12` per entry; the two
/// triangles are averaged before reduction.
pub fn sym_eigenvalues(m: &RealMatrix) -> Result<Vec<f64>> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_symmetric(1e-12) {
        return Err(Error::Domain(
            "matrix is not symmetric within 1e-12".into(),
        ));
    }
    let n = m.rows();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m.get(i, j) + m.get(j, i));
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    eig_symmetric_in_place(&mut a, n, &mut d, &mut e)?;
    Ok(d)
}

/// Descending adjacency eigenvalues of a graph.
pub fn graph_eigenvalues(g: &Graph) -> Vec<f64> {
    let n = g.order();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if g.has_edge(i, j) {
                a[i * n + j] = 1.0;
            }
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    eig_symmetric_in_place(&mut a, n, &mut d, &mut e)
        .expect("adjacency matrices are exactly symmetric");
    d
}

/// One multiplicity group of a singular spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumGroup {
    pub value: f64,
    pub multiplicity: usize,
}

/// Descending nonnegative singular values with tolerance-grouped
/// multiplicities. The gap defaults to `1e-6 * sigma_1`, floored at `1e-12`.
#[derive(Debug, Clone, Serialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub groups: Vec<SpectrumGroup>,
    pub grouping_gap: f64,
}

impl SingularSpectrum {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        values.sort_by(|x, y| y.total_cmp(x));
        let sigma1 = values.first().copied().unwrap_or(0.0);
        let gap = (1e-6 * sigma1).max(1e-12);
        let groups = group_values(&values, gap);
        SingularSpectrum {
            values,
            groups,
            grouping_gap: gap,
        }
    }

    pub fn sigma1(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// k-th singular value, 1-based.
    pub fn sigma(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Groups whose representative exceeds the grouping gap.
    pub fn nonzero_groups(&self) -> Vec<SpectrumGroup> {
        self.groups
            .iter()
            .filter(|g| g.value > self.grouping_gap)
            .cloned()
            .collect()
    }

    /// Number of singular values exceeding the grouping gap.
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&v| v > self.grouping_gap).count()
    }
}

fn group_values(values: &[f64], gap: f64) -> Vec<SpectrumGroup> {
    let mut groups: Vec<SpectrumGroup> = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end - 1] - values[end] <= gap {
            end += 1;
        }
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        groups.push(SpectrumGroup {
            value: mean,
            multiplicity: end - start,
        });
        start = end;
    }
    groups
}

/// Singular values of a rectangular matrix, descending.
///
/// Symmetric square inputs take the eigenvalue-modulus route; everything else
/// goes through the smaller of A*A^T / A^T*A with round-off eigenvalues
/// clamped to zero.
pub fn singular_values(a: &RealMatrix) -> SingularSpectrum {
    if a.rows() == a.cols() && a.is_symmetric(1e-12) {
        let eig = sym_eigenvalues(a).expect("validated symmetric");
        return SingularSpectrum::from_values(eig.iter().map(|x| x.abs()).collect());
    }
    let (gram, dim) = if a.rows() <= a.cols() {
        (gram_rows(a), a.rows())
    } else {
        let t = a.transpose();
        (gram_rows(&t), a.cols())
    };
    let mut work = gram;
    let mut d = vec![0.0; dim];
    let mut e = vec![0.0; dim];
    eig_symmetric_in_place(&mut work, dim, &mut d, &mut e).expect("Gram matrices are symmetric");
    SingularSpectrum::from_values(d.iter().map(|x| x.max(0.0).sqrt()).collect())
}

pub fn graph_singular_values(g: &Graph) -> SingularSpectrum {
    SingularSpectrum::from_values(graph_eigenvalues(g).iter().map(|x| x.abs()).collect())
}

/// Row Gram matrix A * A^T as a flat row-major buffer.
fn gram_rows(a: &RealMatrix) -> Vec<f64> {
    let m = a.rows();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let dot: f64 = a
                .row(i)
                .iter()
                .zip(a.row(j))
                .map(|(x, y)| x * y)
                .sum();
            g[i * m + j] = dot;
            g[j * m + i] = dot;
        }
    }
    g
}

/// Exact integer product H * H^T for a matrix with entries in {-1, 0, 1}.
///
/// Rows are packed into sign/support bit vectors so each inner product is a
/// handful of popcounts.
pub fn gram_exact(h: &IntMatrix) -> Result<IntMatrix> {
    if !h.is_sign_matrix() {
        return Err(Error::Domain(
            "exact Gram requires entries in {-1, 0, 1}".into(),
        ));
    }
    let (m, n) = (h.rows(), h.cols());
    let words = n.div_ceil(64);
    let mut support = vec![0u64; m * words];
    let mut negative = vec![0u64; m * words];
    for i in 0..m {
        for j in 0..n {
            let v = h.get(i, j);
            if v != 0 {
                support[i * words + j / 64] |= 1 << (j % 64);
                if v < 0 {
                    negative[i * words + j / 64] |= 1 << (j % 64);
                }
            }
        }
    }
    let mut out = IntMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut agree = 0i64;
            let mut disagree = 0i64;
            for w in 0..words {
                let both = support[i * words + w] & support[j * words + w];
                let diff = negative[i * words + w] ^ negative[j * words + w];
                agree += (both & !diff).count_ones() as i64;
                disagree += (both & diff).count_ones() as i64;
            }
            let dot = agree - disagree;
            out.set(i, j, dot);
            out.set(j, i, dot);
        }
    }
    Ok(out)
}

/// Outcome of one Weyl singular-value inequality check,
/// sigma_{i+j-1}(A+B) <= sigma_i(A) + sigma_j(B).
#[derive(Debug, Clone, Serialize)]
pub struct WeylCheck {
    pub i: usize,
    pub j: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks Weyl's inequality for singular values at 1-based indices (i, j)
/// with i + j <= min(m, n) + 1.
pub fn weyl_check(a: &RealMatrix, b: &RealMatrix, i: usize, j: usize) -> Result<WeylCheck> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension("Weyl check needs matrices of equal shape".into()));
    }
    let d = a.min_dim();
    if i < 1 || j < 1 || i + j > d + 1 {
        return Err(Error::Argument(format!(
            "indices must satisfy i >= 1, j >= 1, i + j <= {}",
            d + 1
        )));
    }
    let sum = a.add(b)?;
    let s_sum = singular_values(&sum);
    let s_a = singular_values(a);
    let s_b = singular_values(b);
    let lhs = s_sum.sigma(i + j - 1);
    let rhs = s_a.sigma(i) + s_b.sigma(j);
    let holds = lhs <= rhs + 1e-9 * s_sum.sigma1().max(1.0);
    Ok(WeylCheck { i, j, lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, complete_graph, cycle_graph};
    use crate::matrix::kronecker;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn complete_graph_spectrum() {
        let eig = graph_eigenvalues(&complete_graph(4));
        let expect = [3.0, -1.0, -1.0, -1.0];
        for (x, y) in eig.iter().zip(expect) {
            assert_close(*x, y, 1e-12);
        }
    }

    #[test]
    fn cycle_five_spectrum() {
        // circulant eigenvalues 2 cos(2 pi k / 5)
        let eig = graph_eigenvalues(&cycle_graph(5));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let expect = [2.0, phi, phi, -phi - 1.0, -phi - 1.0];
        for (x, y) in eig.iter().zip(expect) {
            assert_close(*x, y, 1e-10);
        }
    }

    #[test]
    fn zero_matrix_spectrum() {
        let eig = sym_eigenvalues(&RealMatrix::zeros(3, 3)).unwrap();
        assert_eq!(eig, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = RealMatrix::new(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(sym_eigenvalues(&m).is_err());
        assert!(sym_eigenvalues(&RealMatrix::ones(2, 3)).is_err());
    }

    #[test]
    fn singular_values_of_ones() {
        let s = singular_values(&RealMatrix::ones(3, 3));
        assert_close(s.sigma(1), 3.0, 1e-10);
        assert_close(s.sigma(2), 0.0, 1e-8);
        assert_close(s.sigma(3), 0.0, 1e-8);
    }

    #[test]
    fn singular_values_hadamard_2() {
        let h = RealMatrix::new(2, 2, vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        let s = singular_values(&h);
        assert_close(s.sigma(1), 2f64.sqrt(), 1e-12);
        assert_close(s.sigma(2), 2f64.sqrt(), 1e-12);
    }

    #[test]
    fn singular_values_k23() {
        let s = graph_singular_values(&complete_bipartite(2, 3));
        let expect = [6f64.sqrt(), 6f64.sqrt(), 0.0, 0.0, 0.0];
        for (k, y) in expect.iter().enumerate() {
            assert_close(s.sigma(k + 1), *y, 1e-10);
        }
        assert_eq!(s.nonzero_groups().len(), 1);
        assert_eq!(s.nonzero_groups()[0].multiplicity, 2);
    }

    #[test]
    fn rectangular_matches_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (m, n) = (rng.random_range(1..6), rng.random_range(1..6));
            let a = RealMatrix::from_fn(m, n, |_, _| rng.random_range(-2.0..2.0));
            let s1 = singular_values(&a);
            let s2 = singular_values(&a.transpose());
            for (x, y) in s1.values.iter().zip(&s2.values) {
                assert_close(*x, *y, 1e-9 * s1.sigma1().max(1.0));
            }
        }
    }

    #[test]
    fn eigen_moduli_match_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.random_range(1..9);
            let mut m = RealMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.random_range(-1.0..1.0);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let mut moduli: Vec<f64> =
                sym_eigenvalues(&m).unwrap().iter().map(|x| x.abs()).collect();
            moduli.sort_by(|x, y| y.total_cmp(x));
            let s = singular_values(&m);
            for (x, y) in moduli.iter().zip(&s.values) {
                assert_close(*x, *y, 1e-9 * s.sigma1().max(1.0));
            }
        }
    }

    #[test]
    fn eigensolver_trace_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 60;
        let mut m = RealMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let eig = sym_eigenvalues(&m).unwrap();
        let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
        let frob2 = m.frobenius_sq();
        assert_close(eig.iter().sum::<f64>(), trace, 1e-9 * n as f64);
        assert_close(eig.iter().map(|x| x * x).sum::<f64>(), frob2, 1e-9 * frob2.max(1.0));
        assert!(eig.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn kronecker_spectrum_is_pairwise_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = RealMatrix::from_fn(3, 4, |_, _| rng.random_range(-1.0..1.0));
        let b = RealMatrix::from_fn(2, 3, |_, _| rng.random_range(-1.0..1.0));
        let sa = singular_values(&a);
        let sb = singular_values(&b);
        let mut products: Vec<f64> = sa
            .values
            .iter()
            .flat_map(|x| sb.values.iter().map(move |y| x * y))
            .collect();
        products.sort_by(|x, y| y.total_cmp(x));
        let sk = singular_values(&kronecker(&a, &b));
        for (x, y) in sk.values.iter().zip(&products) {
            assert_close(*x, *y, 1e-9 * sk.sigma1().max(1.0));
        }
    }

    #[test]
    fn gram_exact_hadamard_2() {
        let h = IntMatrix::new(2, 2, vec![1, 1, 1, -1]).unwrap();
        assert_eq!(gram_exact(&h).unwrap(), IntMatrix::identity_scaled(2, 2));
        let j = IntMatrix::new(2, 2, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(
            gram_exact(&j).unwrap(),
            IntMatrix::new(2, 2, vec![2, 2, 2, 2]).unwrap()
        );
    }

    #[test]
    fn gram_exact_rejects_large_entries() {
        let m = IntMatrix::new(1, 2, vec![2, 0]).unwrap();
        assert!(gram_exact(&m).is_err());
    }

    #[test]
    fn gram_exact_matches_float_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let (m, n) = (rng.random_range(1..7), rng.random_range(1..7));
            let h = IntMatrix::from_fn(m, n, |_, _| rng.random_range(-1..=1));
            let exact = gram_exact(&h).unwrap();
            let real = h.to_real();
            for i in 0..m {
                for j in 0..m {
                    let dot: f64 = real.row(i).iter().zip(real.row(j)).map(|(x, y)| x * y).sum();
                    assert!((dot - exact.get(i, j) as f64).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn weyl_examples() {
        let j3 = RealMatrix::ones(3, 3);
        let neg = j3.scale(-1.0);
        let w = weyl_check(&j3, &neg, 1, 1).unwrap();
        assert!(w.holds);
        assert_close(w.lhs, 0.0, 1e-10);
        assert_close(w.rhs, 6.0, 1e-10);

        let i3 = RealMatrix::identity(3);
        let w = weyl_check(&i3, &i3, 1, 1).unwrap();
        assert!(w.holds);
        assert_close(w.lhs, 2.0, 1e-12);
        assert_close(w.rhs, 2.0, 1e-12);

        assert!(weyl_check(&i3, &i3, 2, 3).is_err());
        assert!(weyl_check(&i3, &RealMatrix::ones(2, 3), 1, 1).is_err());
    }

    #[test]
    fn weyl_random_sign_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let m = rng.random_range(1..6);
            let n = rng.random_range(m..7);
            let a = RealMatrix::from_fn(m, n, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
            let b = RealMatrix::from_fn(m, n, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
            for i in 1..=m {
                for j in 1..=(m + 1 - i) {
                    assert!(weyl_check(&a, &b, i, j).unwrap().holds);
                }
            }
        }
    }

    #[test]
    fn grouping_invariants() {
        let s = SingularSpectrum::from_values(vec![3.0, 3.0 + 1e-9, 1.0, 1.0, 1e-14]);
        assert_eq!(s.groups.iter().map(|g| g.multiplicity).sum::<usize>(), 5);
        assert_eq!(s.nonzero_groups().len(), 2);
        assert_eq!(s.rank(), 4);
        assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
