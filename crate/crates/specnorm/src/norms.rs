//! Ky Fan, Schatten, trace, operator, Frobenius and max norms over a cached
//! singular spectrum; the Schatten curve f(x) and recovery of the grouped
//! spectrum from it; singular cospectrality; closed-walk counts.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::RealMatrix;
use crate::spectra::{
    graph_eigenvalues, singular_values, SingularSpectrum, SpectrumGroup,
};

/// A graph or a real matrix together with its cached singular spectrum.
#[derive(Debug, Clone)]
pub struct NormSubject {
    data: SubjectData,
    spectrum: SingularSpectrum,
    /// Descending eigenvalues, present for graphs and symmetric matrices.
    eigenvalues: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub enum SubjectData {
    Graph(Graph),
    Matrix(RealMatrix),
}

impl NormSubject {
    pub fn from_graph(g: Graph) -> Self {
        let eig = graph_eigenvalues(&g);
        let spectrum = SingularSpectrum::from_values(eig.iter().map(|x| x.abs()).collect());
        NormSubject {
            data: SubjectData::Graph(g),
            spectrum,
            eigenvalues: Some(eig),
        }
    }

    pub fn from_matrix(m: RealMatrix) -> Self {
        let spectrum = singular_values(&m);
        let eigenvalues = if m.rows() == m.cols() && m.is_symmetric(1e-12) {
            Some(crate::spectra::sym_eigenvalues(&m).expect("validated symmetric"))
        } else {
            None
        };
        NormSubject {
            data: SubjectData::Matrix(m),
            spectrum,
            eigenvalues,
        }
    }

    pub fn spectrum(&self) -> &SingularSpectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.data {
            SubjectData::Graph(g) => Some(g),
            SubjectData::Matrix(_) => None,
        }
    }

    /// The underlying matrix; adjacency for graph subjects.
    pub fn matrix(&self) -> RealMatrix {
        match &self.data {
            SubjectData::Graph(g) => g.adjacency_real(),
            SubjectData::Matrix(m) => m.clone(),
        }
    }

    pub fn rows(&self) -> usize {
        match &self.data {
            SubjectData::Graph(g) => g.order(),
            SubjectData::Matrix(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.data {
            SubjectData::Graph(g) => g.order(),
            SubjectData::Matrix(m) => m.cols(),
        }
    }

    pub fn min_dim(&self) -> usize {
        self.rows().min(self.cols())
    }

    /// Largest adjacency eigenvalue, graphs only.
    pub fn lambda1(&self) -> Option<f64> {
        self.eigenvalues.as_ref().map(|e| e[0])
    }

    pub fn lambda_min(&self) -> Option<f64> {
        self.eigenvalues.as_ref().map(|e| *e.last().expect("nonempty"))
    }

    /// Sum of the k largest singular values.
    pub fn ky_fan(&self, k: usize) -> Result<f64> {
        if k < 1 || k > self.min_dim() {
            return Err(Error::Argument(format!(
                "Ky Fan index must satisfy 1 <= k <= {}, got {k}",
                self.min_dim()
            )));
        }
        Ok(self.spectrum.values[..k].iter().sum())
    }

    /// (sum sigma_i^p)^(1/p) for p >= 1, evaluated in factored form so large
    /// exponents stay finite.
    pub fn schatten(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Argument(format!("Schatten exponent must be >= 1, got {p}")));
        }
        let s1 = self.spectrum.sigma1();
        if s1 == 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = self
            .spectrum
            .values
            .iter()
            .map(|&v| (v / s1).powf(p))
            .sum();
        Ok(s1 * sum.powf(1.0 / p))
    }

    /// sum sigma_i^p, usable below p = 1 for the Hoelder machinery.
    pub fn sigma_power_sum(&self, p: f64) -> f64 {
        self.spectrum.values.iter().map(|&v| v.powf(p)).sum()
    }

    pub fn trace_norm(&self) -> f64 {
        self.spectrum.values.iter().sum()
    }

    pub fn operator_norm(&self) -> f64 {
        self.spectrum.sigma1()
    }

    pub fn frobenius(&self) -> f64 {
        self.spectrum.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        match &self.data {
            SubjectData::Graph(g) => {
                if g.edge_count() > 0 {
                    1.0
                } else {
                    0.0
                }
            }
            SubjectData::Matrix(m) => m.max_abs(),
        }
    }

    /// Samples the Schatten curve f(x) at the given points, all >= 1.
    pub fn schatten_curve(&self, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        if xs.is_empty() {
            return Err(Error::Argument("curve needs at least one sample point".into()));
        }
        xs.iter()
            .map(|&x| Ok((x, self.schatten(x)?)))
            .collect()
    }
}

/// Number of closed walks of length 2k, i.e. tr A^{2k}, computed from the
/// eigenvalues and rounded to the nearest integer. Round-off of 0.4 or more
/// before rounding is a precision error.
pub fn closed_walks_2k(g: &Graph, k: usize) -> Result<u64> {
    if k < 1 {
        return Err(Error::Argument("walk length parameter must be >= 1".into()));
    }
    let eig = graph_eigenvalues(g);
    let sum: f64 = eig.iter().map(|&l| l.powi(2 * k as i32)).sum();
    let rounded = sum.round();
    if !sum.is_finite() || (sum - rounded).abs() >= 0.4 || rounded < 0.0 {
        return Err(Error::Precision(format!(
            "tr A^{} = {sum} is too far from an integer",
            2 * k
        )));
    }
    Ok(rounded as u64)
}

/// True iff the two graphs share all nonzero singular values with equal
/// multiplicities (1e-9 relative on the values).
pub fn singularly_cospectral(g: &Graph, h: &Graph) -> bool {
    let sg = crate::spectra::graph_singular_values(g);
    let sh = crate::spectra::graph_singular_values(h);
    let a = sg.nonzero_groups();
    let b = sh.nonzero_groups();
    if a.len() != b.len() {
        return false;
    }
    let scale = sg.sigma1().max(sh.sigma1()).max(1.0);
    a.iter()
        .zip(&b)
        .all(|(x, y)| x.multiplicity == y.multiplicity && (x.value - y.value).abs() <= 1e-9 * scale)
}

const RECOVER_SAMPLES: usize = 15;
const MAX_LOCAL_ORDER: usize = 3;
const MAX_MULTIPLICITY: usize = 64;

/// One accepted geometric batch: `order` roots fitted on the residual window
/// `lo..=top` of the sampling grid, in the z = sigma^step scale.
#[derive(Debug, Clone)]
struct Batch {
    lo: usize,
    top: usize,
    groups: Vec<(f64, usize)>, // (z, multiplicity)
}

/// Recovers the nonzero grouped singular spectrum of a graph or matrix from
/// its Schatten curve.
///
/// The curve is sampled on the grid x = max_x/15, 2 max_x/15, ..., max_x and
/// the power sums f(x)^x are explained by geometric batches, largest scale
/// first. Each stage fits one to three geometric terms on a small window of
/// the unexplained residual, accepting the fit only when every implied
/// multiplicity lands within 0.25 of a positive integer and the batch
/// reproduces the residual above its window. Accepted batches are re-solved
/// jointly and must be stable under shifting their window one sample up;
/// instability means a smaller, still-hidden group is being swallowed, so
/// the window slides up until the batch is shift-stable. The finished model
/// must reproduce every sample, otherwise recovery fails. Groups whose mass
/// sits below the floating-point noise floor at every sample are
/// unrecoverable.
pub fn recover_spectrum(
    oracle: impl Fn(f64) -> f64,
    max_x: f64,
    tol: f64,
) -> Result<Vec<SpectrumGroup>> {
    if !(max_x > 1.0) || !(tol > 0.0) {
        return Err(Error::Argument("recovery needs max_x > 1 and tol > 0".into()));
    }
    let step = max_x / RECOVER_SAMPLES as f64;
    let xs: Vec<f64> = (1..=RECOVER_SAMPLES).map(|j| step * j as f64).collect();
    let mut power_sums = Vec::with_capacity(xs.len());
    for &x in &xs {
        let f = oracle(x);
        if !f.is_finite() || f < 0.0 {
            return Err(Error::RecoveryFailed(format!("oracle returned {f} at x = {x}")));
        }
        let p = f.powf(x);
        if !p.is_finite() {
            return Err(Error::RecoveryFailed(format!("f({x})^{x} overflows")));
        }
        power_sums.push(p);
    }
    if power_sums[xs.len() - 1] == 0.0 {
        return Ok(Vec::new());
    }
    // absolute per-sample noise floor of the sampled power sums
    let floor: Vec<f64> = xs
        .iter()
        .zip(&power_sums)
        .map(|(&x, &f)| 64.0 * f64::EPSILON * x * f.max(1e-300))
        .collect();

    let mut batches: Vec<Batch> = Vec::new();
    loop {
        let total_mult: usize = batches
            .iter()
            .flat_map(|b| b.groups.iter().map(|&(_, k)| k))
            .sum();
        if total_mult > MAX_MULTIPLICITY {
            return Err(Error::RecoveryFailed("model grew past 64 singular values".into()));
        }
        let residual = residual_of(&batches, None, &power_sums);
        // Model complete once every sample is explained to a few parts in
        // 1e7; residual slop below that level is refit noise, not a group.
        if (0..xs.len()).all(|j| residual[j] <= (2e-7 * power_sums[j]).max(4.0 * floor[j])) {
            break;
        }
        // Largest sample whose unexplained mass stands clear of the noise.
        // The margin grows with the sample index because a fit at index j
        // amplifies measurement noise by roughly j+1 when the coefficient is
        // unwound back to a multiplicity.
        let max_top = match (0..xs.len())
            .rev()
            .find(|&j| residual[j] > 40.0 * (j + 1) as f64 * floor[j])
        {
            Some(t) => t,
            None => break,
        };
        // Collect every window and model order that passes the hard gates,
        // then keep the candidate that best reproduces the residual above
        // its window; a merged pseudo-root passes the integer gates but
        // extrapolates badly, so the misfit score weeds it out.
        let mut accepted: Option<Batch> = None;
        let mut best_score = f64::INFINITY;
        for order in 1..=MAX_LOCAL_ORDER {
            for top in (2 * order - 1)..=max_top {
                let Some(batch) = fit_window_gated(&residual, &floor, top, order, max_top) else {
                    continue;
                };
                let mut misfit = 0.0;
                let mut counted = 0usize;
                for j in (top + 1)..=max_top {
                    if residual[j] <= 4.0 * floor[j] {
                        continue;
                    }
                    let predict: f64 = batch
                        .groups
                        .iter()
                        .map(|&(z, k)| k as f64 * z.powi(j as i32 + 1))
                        .sum();
                    misfit +=
                        ((predict - residual[j]).abs() / (residual[j] + 8.0 * floor[j])).min(10.0);
                    counted += 1;
                }
                let score = if counted == 0 { 0.0 } else { misfit / counted as f64 }
                    + 1e-9 * order as f64
                    + 1e-12 * (max_top - top) as f64;
                if std::env::var_os("SPECNORM_RECOVER_DEBUG").is_some() {
                    eprintln!("  candidate d={order} top={top} score={score:.3e} {:?}", batch.groups);
                }
                if score < best_score {
                    best_score = score;
                    accepted = Some(batch);
                }
            }
        }
        if accepted.is_none() && max_top == 0 {
            // a single usable sample: enumerate integer multiplicities and
            // validate the implied value on the sample above
            if let Some((z, mult)) = fit_single_sample(&residual, &floor, step) {
                accepted = Some(Batch { lo: 0, top: 0, groups: vec![(z, mult)] });
            }
        }
        if std::env::var_os("SPECNORM_RECOVER_DEBUG").is_some() {
            eprintln!(
                "stage: batches={batches:?} max_top={max_top} accepted={accepted:?} resid_rel={:?}",
                residual
                    .iter()
                    .zip(&power_sums)
                    .map(|(r, f)| r / f)
                    .collect::<Vec<_>>()
            );
        }
        let Some(batch) = accepted else {
            // leave the leftover to the global refinement below
            break;
        };
        batches.push(batch);
        refit_all(&mut batches, &power_sums, &floor);
    }

    // Global refinement: polish all values jointly by noise-weighted
    // Levenberg-Marquardt, then repair the structure by splitting groups
    // whose multiplicity hides a close pair. The greedy peel cannot resolve
    // pairs whose separation only shows as curvature against the noise
    // floor; the weighted fit can.
    let mut structure: Vec<(f64, usize)> = batches
        .iter()
        .flat_map(|b| b.groups.iter().copied())
        .collect();
    structure.sort_by(|a, b| b.0.total_cmp(&a.0));
    if structure.is_empty() {
        return Err(Error::RecoveryFailed(
            "no geometric structure could be extracted from the curve".into(),
        ));
    }
    lm_polish(&mut structure, &power_sums, &floor);
    for _ in 0..12 {
        if model_explains(&structure, &power_sums, &floor) {
            break;
        }
        if structure.iter().map(|&(_, k)| k).sum::<usize>() > MAX_MULTIPLICITY {
            break;
        }
        let split = best_split(&structure, &power_sums, &floor);
        let addition = best_addition(&structure, &power_sums, &floor);
        let candidate = match (split, addition) {
            (Some(s), Some(a)) => {
                let cost = |s: &[(f64, usize)]| -> f64 {
                    lm_residual(s, &power_sums)
                        .iter()
                        .zip(&floor)
                        .map(|(r, &f)| (r / f) * (r / f))
                        .sum()
                };
                if cost(&s) <= cost(&a) {
                    Some(s)
                } else {
                    Some(a)
                }
            }
            (s, a) => s.or(a),
        };
        let Some(better) = candidate else {
            break;
        };
        structure = better;
    }
    if !model_explains(&structure, &power_sums, &floor) {
        let residual = lm_residual(&structure, &power_sums);
        let worst = (0..power_sums.len())
            .max_by(|&a, &b| {
                (residual[a].abs() / floor[a]).total_cmp(&(residual[b].abs() / floor[b]))
            })
            .expect("nonempty grid");
        return Err(Error::RecoveryFailed(format!(
            "final model misses the sample at x = {} by a relative {:.2e}; \
             the oracle is inconsistent or max_x is too small",
            xs[worst],
            residual[worst].abs() / power_sums[worst].max(1e-300)
        )));
    }

    let mut recovered: Vec<(f64, usize)> = structure
        .iter()
        .map(|&(z, k)| (z.powf(1.0 / step), k))
        .collect();
    recovered.sort_by(|a, b| b.0.total_cmp(&a.0));
    merge_close(&mut recovered, tol);
    Ok(recovered
        .into_iter()
        .filter(|&(v, _)| v > tol)
        .map(|(value, multiplicity)| SpectrumGroup { value, multiplicity })
        .collect())
}

/// Weighted model residual F_j - sum_i k_i z_i^{j+1}.
fn lm_residual(structure: &[(f64, usize)], power_sums: &[f64]) -> Vec<f64> {
    (0..power_sums.len())
        .map(|j| {
            power_sums[j]
                - structure
                    .iter()
                    .map(|&(z, k)| k as f64 * z.powi(j as i32 + 1))
                    .sum::<f64>()
        })
        .collect()
}

/// Every sample reproduced down to a small multiple of its noise floor.
fn model_explains(structure: &[(f64, usize)], power_sums: &[f64], floor: &[f64]) -> bool {
    lm_residual(structure, power_sums)
        .iter()
        .zip(floor)
        .all(|(r, &f)| r.abs() <= 64.0 * f)
}

/// Levenberg-Marquardt on the group values in log space, with samples
/// weighted by the inverse of their noise floor so that the low end of the
/// grid constrains the small groups.
fn lm_polish(structure: &mut [(f64, usize)], power_sums: &[f64], floor: &[f64]) {
    let g = structure.len();
    if g == 0 {
        return;
    }
    let n = power_sums.len();
    let mut lambda = 1e-9;
    let cost = |s: &[(f64, usize)]| -> f64 {
        lm_residual(s, power_sums)
            .iter()
            .zip(floor)
            .map(|(r, &f)| (r / f) * (r / f))
            .sum()
    };
    let mut current = cost(structure);
    for _ in 0..200 {
        // weighted normal equations over t_i = ln z_i
        let mut jtj = vec![0.0; g * g];
        let mut jtr = vec![0.0; g];
        let residual = lm_residual(structure, power_sums);
        for j in 0..n {
            let w = 1.0 / floor[j];
            let r = residual[j] * w;
            let grad: Vec<f64> = structure
                .iter()
                .map(|&(z, k)| w * (j + 1) as f64 * k as f64 * z.powi(j as i32 + 1))
                .collect();
            for a in 0..g {
                for b in 0..g {
                    jtj[a * g + b] += grad[a] * grad[b];
                }
                jtr[a] += grad[a] * r;
            }
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for a in 0..g {
                damped[a * g + a] *= 1.0 + lambda;
                damped[a * g + a] += 1e-300;
            }
            let mut delta = jtr.clone();
            if solve_linear(&mut damped, &mut delta, g).is_none() {
                lambda *= 8.0;
                continue;
            }
            let trial: Vec<(f64, usize)> = structure
                .iter()
                .zip(&delta)
                .map(|(&(z, k), &d)| (z * d.clamp(-0.5, 0.5).exp(), k))
                .collect();
            let trial_cost = cost(&trial);
            if trial_cost < current && trial_cost.is_finite() {
                for (slot, fresh) in structure.iter_mut().zip(trial) {
                    *slot = fresh;
                }
                current = trial_cost;
                lambda = (lambda / 4.0).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 8.0;
        }
        if !improved || current < 1e-4 {
            break;
        }
    }
}

/// Tries splitting each multiple group into a slightly separated pair and
/// keeps the best split that the data accepts.
fn best_split(
    structure: &[(f64, usize)],
    power_sums: &[f64],
    floor: &[f64],
) -> Option<Vec<(f64, usize)>> {
    let cost = |s: &[(f64, usize)]| -> f64 {
        lm_residual(s, power_sums)
            .iter()
            .zip(floor)
            .map(|(r, &f)| (r / f) * (r / f))
            .sum()
    };
    let base = cost(structure);
    let mut best: Option<(f64, Vec<(f64, usize)>)> = None;
    for (i, &(z, k)) in structure.iter().enumerate() {
        if k < 2 {
            continue;
        }
        for split_mult in 1..k {
            for spread in [3e-3, 2e-2, 8e-2] {
                let mut trial: Vec<(f64, usize)> = structure.to_vec();
                trial[i] = (z * (1.0 + spread), split_mult);
                trial.insert(i + 1, (z * (1.0 - spread), k - split_mult));
                lm_polish(&mut trial, power_sums, floor);
                let c = cost(&trial);
                if c < 0.25 * base && best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                    best = Some((c, trial));
                }
            }
        }
    }
    best.map(|(_, s)| s)
}

/// Tries adding one new group seeded from the lowest unexplained sample,
/// enumerating small multiplicities; keeps the best addition the data
/// accepts.
fn best_addition(
    structure: &[(f64, usize)],
    power_sums: &[f64],
    floor: &[f64],
) -> Option<Vec<(f64, usize)>> {
    let cost = |s: &[(f64, usize)]| -> f64 {
        lm_residual(s, power_sums)
            .iter()
            .zip(floor)
            .map(|(r, &f)| (r / f) * (r / f))
            .sum()
    };
    let residual = lm_residual(structure, power_sums);
    let j0 = (0..power_sums.len()).find(|&j| residual[j] > 4.0 * floor[j])?;
    let base = cost(structure);
    let mut best: Option<(f64, Vec<(f64, usize)>)> = None;
    for k in 1..=8usize {
        let z = (residual[j0] / k as f64).powf(1.0 / (j0 as f64 + 1.0));
        if !z.is_finite() || z <= 0.0 {
            continue;
        }
        let mut trial: Vec<(f64, usize)> = structure.to_vec();
        trial.push((z, k));
        trial.sort_by(|a, b| b.0.total_cmp(&a.0));
        lm_polish(&mut trial, power_sums, floor);
        let c = cost(&trial);
        if c < 0.25 * base && best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, trial));
        }
    }
    best.map(|(_, s)| s)
}

/// Power-sum residual after subtracting every batch except `skip`.
fn residual_of(batches: &[Batch], skip: Option<usize>, power_sums: &[f64]) -> Vec<f64> {
    let mut residual = power_sums.to_vec();
    for (b, batch) in batches.iter().enumerate() {
        if Some(b) == skip {
            continue;
        }
        for (j, r) in residual.iter_mut().enumerate() {
            for &(z, k) in &batch.groups {
                *r -= k as f64 * z.powi(j as i32 + 1);
            }
        }
    }
    residual
}

/// Raw Prony solve of `order` geometric terms on residual window
/// `lo..=top`: returns (z, coefficient) pairs with z descending, or None when
/// the window is unusable or the roots are not positive, real and distinct.
fn fit_window(residual: &[f64], lo: usize, top: usize, order: usize) -> Option<Vec<(f64, f64)>> {
    if top >= residual.len() || lo + 2 * order != top + 1 {
        return None;
    }
    let window = &residual[lo..=top];
    if window.iter().any(|&r| !(r > 0.0)) {
        return None;
    }
    let scale = window[0];
    let u: Vec<f64> = window.iter().map(|&r| r / scale).collect();

    // Prony: u_{j+order} = sum c_l u_{j+l}; solve the order x order system.
    let mut coeffs = vec![0.0; order];
    if order == 1 {
        coeffs[0] = u[1] / u[0];
    } else {
        let mut a = vec![0.0; order * order];
        let mut b = vec![0.0; order];
        for row in 0..order {
            for col in 0..order {
                a[row * order + col] = u[row + col];
            }
            b[row] = u[row + order];
        }
        solve_linear(&mut a, &mut b, order)?;
        coeffs.copy_from_slice(&b);
    }
    // roots of z^order - c_{order-1} z^{order-1} - ... - c_0
    let mut poly = vec![0.0; order + 1];
    poly[order] = 1.0;
    for (l, &c) in coeffs.iter().enumerate() {
        poly[l] = -c;
    }
    let roots = positive_real_roots(&poly)?;
    if roots.len() != order {
        return None;
    }
    // coefficients from the first `order` window points
    let mut vand = vec![0.0; order * order];
    let mut rhs = vec![0.0; order];
    for row in 0..order {
        for (col, &z) in roots.iter().enumerate() {
            vand[row * order + col] = z.powi(row as i32);
        }
        rhs[row] = u[row];
    }
    solve_linear(&mut vand, &mut rhs, order)?;
    Some(
        roots
            .iter()
            .zip(&rhs)
            .map(|(&z, &kappa)| (z, kappa * scale / z.powi(lo as i32 + 1)))
            .collect(),
    )
}

/// Gated fit: multiplicities must round to positive integers, an order-1 fit
/// must look geometric three samples deep, and the batch must reproduce the
/// residual below (no overshoot) and above (within 5%) its window.
fn fit_window_gated(
    residual: &[f64],
    floor: &[f64],
    top: usize,
    order: usize,
    max_top: usize,
) -> Option<Batch> {
    let lo = top + 1 - 2 * order;
    let fitted = fit_window(residual, lo, top, order)?;
    let mut groups = Vec::with_capacity(order);
    for &(z, count) in &fitted {
        if !count.is_finite() {
            return None;
        }
        let rounded = count.round();
        if (count - rounded).abs() > 0.25 || rounded < 1.0 {
            return None;
        }
        groups.push((z, rounded as usize));
    }
    let predict = |j: usize| -> f64 {
        groups
            .iter()
            .map(|&(z, k)| k as f64 * z.powi(j as i32 + 1))
            .sum()
    };
    // never overshoot the sample below the window; smaller unrecovered
    // groups may legitimately hide there, so undershoot is fine
    if lo >= 1 && predict(lo - 1) > residual[lo - 1] * (1.0 + 1e-6) + 4.0 * floor[lo - 1] {
        return None;
    }
    // The batch must not overshoot the residual above its window either;
    // overshoot means foreign mass was swallowed into the fit. Undershoot is
    // legitimate: noise from earlier batches rides above, and under-fitted
    // batches are straightened out by the shift stabilization.
    for j in (top + 1)..=max_top {
        if residual[j] <= 4.0 * floor[j] {
            continue;
        }
        if predict(j) > 1.10 * residual[j] + 8.0 * floor[j] {
            return None;
        }
    }
    Some(Batch { lo, top, groups })
}

/// Endgame when only the lowest sample carries signal: the remaining group is
/// (R_0 / k)^(1/x_0) for some integer k, disambiguated on the sample above.
fn fit_single_sample(residual: &[f64], floor: &[f64], step: f64) -> Option<(f64, usize)> {
    let r0 = residual[0];
    if !(r0 > 0.0) {
        return None;
    }
    // if the next sample is pure noise the multiplicity is ambiguous
    if residual.len() < 2 || residual[1] <= 4.0 * floor[1] {
        return None;
    }
    let r1 = residual[1];
    let mut best: Option<(f64, usize, f64)> = None;
    for k in 1..=MAX_MULTIPLICITY {
        let z = r0 / k as f64;
        let defect = ((k as f64 * z * z).ln() - r1.ln()).abs();
        if best.is_none() || defect < best.expect("just checked").2 {
            best = Some((z, k, defect));
        }
    }
    let (z, k, defect) = best?;
    let _ = step;
    // candidates are spaced ln 2 apart in log-prediction; demand a clear win
    if defect > 0.3 {
        return None;
    }
    Some((z, k))
}

/// Re-solves every batch's values at its own window with the other batches
/// subtracted, keeping the multiplicities pinned. A few rounds shrink the
/// cross-batch coupling to the noise floor.
fn refit_all(batches: &mut Vec<Batch>, power_sums: &[f64], floor: &[f64]) {
    for _ in 0..4 {
        for b in 0..batches.len() {
            let residual = residual_of(batches, Some(b), power_sums);
            let (lo, top, order) = (batches[b].lo, batches[b].top, batches[b].groups.len());
            if let Some(fresh) = refit_batch(&residual, floor, lo, top, order, &batches[b].groups)
            {
                batches[b].groups = fresh;
            }
        }
    }
}

/// One structure-preserving refit: same window, same order, and the fitted
/// coefficients must round to the same multiplicities.
fn refit_batch(
    residual: &[f64],
    _floor: &[f64],
    lo: usize,
    top: usize,
    order: usize,
    pinned: &[(f64, usize)],
) -> Option<Vec<(f64, usize)>> {
    let fitted = fit_window(residual, lo, top, order)?;
    let mut fresh = Vec::with_capacity(order);
    for (&(z, count), &(_, k)) in fitted.iter().zip(pinned) {
        if !count.is_finite() || (count - k as f64).abs() > 0.4 {
            return None;
        }
        fresh.push((z, k));
    }
    Some(fresh)
}

/// Gaussian elimination with partial pivoting; overwrites `b` with the
/// solution. None when the system is singular.
fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Some(())
}

/// All roots of the real polynomial (ascending coefficients) when they are
/// real, positive and distinct; None otherwise. Durand-Kerner iteration.
fn positive_real_roots(poly: &[f64]) -> Option<Vec<f64>> {
    let degree = poly.len() - 1;
    if degree == 1 {
        let r = -poly[0] / poly[1];
        return if r > 0.0 { Some(vec![r]) } else { None };
    }
    // complex arithmetic on (re, im) pairs
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for &c in poly.iter().rev() {
            acc = (acc.0 * z.0 - acc.1 * z.1 + c, acc.0 * z.1 + acc.1 * z.0);
        }
        acc
    };
    let sub = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0, a.1 - b.1);
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let div = |a: (f64, f64), b: (f64, f64)| {
        let d = b.0 * b.0 + b.1 * b.1;
        ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
    };
    let mut roots: Vec<(f64, f64)> = (0..degree)
        .map(|k| {
            let theta = 0.7 + 2.1 * k as f64;
            (0.9 * theta.cos() + 0.4, 0.9 * theta.sin())
        })
        .collect();
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..degree {
            let mut denom = (poly[degree], 0.0);
            for j in 0..degree {
                if j != i {
                    denom = mul(denom, sub(roots[i], roots[j]));
                }
            }
            if denom.0 == 0.0 && denom.1 == 0.0 {
                return None;
            }
            let delta = div(eval(roots[i]), denom);
            roots[i] = sub(roots[i], delta);
            moved = moved.max(delta.0.hypot(delta.1));
        }
        if moved < 1e-14 {
            break;
        }
    }
    let mut out = Vec::with_capacity(degree);
    for (re, im) in roots {
        if im.abs() > 1e-7 * re.abs().max(1e-9) || re <= 0.0 {
            return None;
        }
        out.push(re);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    for w in out.windows(2) {
        if (w[0] - w[1]).abs() <= 1e-9 * w[0] {
            return None;
        }
    }
    Some(out)
}

fn merge_close(recovered: &mut Vec<(f64, usize)>, tol: f64) {
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for &(v, k) in recovered.iter() {
        if let Some(last) = merged.last_mut() {
            if last.0 - v <= tol {
                let total = last.1 + k;
                last.0 = (last.0 * last.1 as f64 + v * k as f64) / total as f64;
                last.1 = total;
                continue;
            }
        }
        merged.push((v, k));
    }
    *recovered = merged;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        complete_bipartite, complete_graph, cycle_graph, disjoint_union, star_graph, Graph,
    };

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ky_fan_examples() {
        let k2 = NormSubject::from_graph(complete_graph(2));
        assert!(close(k2.ky_fan(2).unwrap(), 2.0, 1e-12));

        // sigma_2(C_5) = (sqrt 5 + 1)/2, so the Ky Fan 2-norm is ~3.618
        let c5 = NormSubject::from_graph(cycle_graph(5));
        let expected = 2.0 + (5f64.sqrt() + 1.0) / 2.0;
        assert!(close(expected, 3.618, 1e-3));
        assert!(close(c5.ky_fan(2).unwrap(), expected, 1e-10));

        let j44 = NormSubject::from_matrix(RealMatrix::ones(4, 4));
        assert!(close(j44.ky_fan(3).unwrap(), 4.0, 1e-8));

        assert!(k2.ky_fan(0).is_err());
        assert!(k2.ky_fan(3).is_err());
    }

    #[test]
    fn schatten_examples() {
        // complete graphs: ((n-1)^p + (n-1))^(1/p)
        for n in [3usize, 5, 8] {
            let s = NormSubject::from_graph(complete_graph(n));
            for p in [1.0, 1.5, 2.0, 3.0] {
                let expect = ((n as f64 - 1.0).powf(p) + (n as f64 - 1.0)).powf(1.0 / p);
                assert!(close(s.schatten(p).unwrap(), expect, 1e-9 * expect));
            }
        }
        // any graph at p = 2 equals sqrt(2m)
        let c5 = NormSubject::from_graph(cycle_graph(5));
        assert!(close(c5.schatten(2.0).unwrap(), 10f64.sqrt(), 1e-10));
        // K_{n,n}: n 2^{1/p}
        for n in [2usize, 3] {
            let s = NormSubject::from_graph(complete_bipartite(n, n));
            for p in [1.0, 2.5, 7.0] {
                let expect = n as f64 * 2f64.powf(1.0 / p);
                assert!(close(s.schatten(p).unwrap(), expect, 1e-9 * expect));
            }
        }
        assert!(c5.schatten(0.5).is_err());
    }

    #[test]
    fn named_norms() {
        let k4 = NormSubject::from_graph(complete_graph(4));
        assert!(close(k4.trace_norm(), 6.0, 1e-10));
        assert!(close(k4.operator_norm(), 3.0, 1e-10));
        assert!(close(k4.frobenius(), 12f64.sqrt(), 1e-10));
        assert!(close(k4.max_norm(), 1.0, 0.0));
        assert!(close(
            k4.trace_norm(),
            k4.ky_fan(4).unwrap(),
            1e-12
        ));
        assert!(close(k4.trace_norm(), k4.schatten(1.0).unwrap(), 1e-10));
    }

    #[test]
    fn schatten_large_p_tends_to_operator_norm() {
        for g in [complete_graph(5), cycle_graph(6), star_graph(7)] {
            let s = NormSubject::from_graph(g);
            let p200 = s.schatten(200.0).unwrap();
            assert!((p200 - s.operator_norm()).abs() <= 1e-2 * s.operator_norm());
        }
    }

    #[test]
    fn curve_is_decreasing() {
        let s = NormSubject::from_graph(cycle_graph(5));
        let pts = s.schatten_curve(&[1.0, 1.5, 2.0, 4.0, 16.0]).unwrap();
        for w in pts.windows(2) {
            assert!(w[0].1 > w[1].1);
        }
        assert!(s.schatten_curve(&[]).is_err());
        assert!(s.schatten_curve(&[0.5]).is_err());
    }

    #[test]
    fn closed_walk_counts() {
        assert_eq!(closed_walks_2k(&complete_graph(2), 1).unwrap(), 2);
        assert_eq!(closed_walks_2k(&complete_graph(3), 2).unwrap(), 18);
        let empty = Graph::empty(4).unwrap();
        assert_eq!(closed_walks_2k(&empty, 3).unwrap(), 0);
    }

    #[test]
    fn closed_walks_match_brute_force() {
        // brute-force walk enumeration as an independent oracle
        fn count_walks(g: &Graph, len: usize) -> u64 {
            let n = g.order();
            let mut total = 0u64;
            for start in 0..n {
                let mut stack = vec![(start, 0usize)];
                while let Some((v, d)) = stack.pop() {
                    if d == len {
                        if v == start {
                            total += 1;
                        }
                        continue;
                    }
                    for u in 0..n {
                        if g.has_edge(v, u) {
                            stack.push((u, d + 1));
                        }
                    }
                }
            }
            total
        }
        for (g, k) in [
            (complete_graph(4), 2usize),
            (cycle_graph(5), 2),
            (star_graph(5), 3),
            (path_graph_local(4), 2),
        ] {
            assert_eq!(closed_walks_2k(&g, k).unwrap(), count_walks(&g, 2 * k));
        }
    }

    fn path_graph_local(n: usize) -> Graph {
        crate::graph::path_graph(n)
    }

    #[test]
    fn cospectrality_examples() {
        // K_{n,n} vs K_{1,n^2}
        for n in [2usize, 3] {
            let f = complete_bipartite(n, n);
            let h = star_graph(n * n + 1);
            assert!(singularly_cospectral(&f, &h));
        }
        // isolated vertices are invisible
        let g = cycle_graph(5);
        let padded = disjoint_union(&g, &Graph::empty(1).unwrap());
        assert!(singularly_cospectral(&g, &padded));
        // K_3 vs K_{1,3}
        assert!(!singularly_cospectral(&complete_graph(3), &star_graph(4)));
    }

    fn recover_graph(g: &Graph) -> Vec<SpectrumGroup> {
        let s = NormSubject::from_graph(g.clone());
        recover_spectrum(|x| s.schatten(x).unwrap(), 60.0, 1e-3).unwrap()
    }

    #[test]
    fn recovery_examples() {
        let got = recover_graph(&complete_graph(4));
        assert_eq!(got.len(), 2);
        assert!(close(got[0].value, 3.0, 1e-3) && got[0].multiplicity == 1);
        assert!(close(got[1].value, 1.0, 1e-3) && got[1].multiplicity == 3);

        let got = recover_graph(&cycle_graph(5));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(got.len(), 3);
        assert!(close(got[0].value, 2.0, 1e-3) && got[0].multiplicity == 1);
        assert!(close(got[1].value, phi + 1.0, 1e-3) && got[1].multiplicity == 2);
        assert!(close(got[2].value, phi, 1e-3) && got[2].multiplicity == 2);

        let got = recover_graph(&complete_bipartite(3, 3));
        assert_eq!(got.len(), 1);
        assert!(close(got[0].value, 3.0, 1e-3) && got[0].multiplicity == 2);
    }

    #[test]
    fn recovery_close_pair() {
        // the n = 6 labeled graph whose adjacent singular values are closest
        // across the whole order-6 corpus (ratio ~ 0.985)
        let g = Graph::from_mask(6, 21884).unwrap();
        let s = NormSubject::from_graph(g.clone());
        let got = recover_spectrum(|x| s.schatten(x).unwrap(), 60.0, 1e-3).unwrap();
        let want = crate::spectra::graph_singular_values(&g);
        let want = want.nonzero_groups();
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!(close(a.value, b.value, 1e-3), "{} vs {}", a.value, b.value);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
    }

    #[test]
    fn recovery_rejects_bogus_oracle() {
        // 1.5 "copies" of a singular value cannot be explained with integer
        // multiplicities
        let err = recover_spectrum(|x| (1.5 * 3f64.powf(x)).powf(1.0 / x), 60.0, 1e-3);
        assert!(err.is_err());
    }
}
