//! Thick-restart Lanczos with explicit deflation, plus small dense helpers.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{axpy, dot, norm, scale};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Absolute residual `‖Ay − θy‖` required for convergence.
    pub tol: f64,
    /// Krylov basis size before a restart.
    pub max_basis: usize,
    /// Ritz vectors kept across a restart.
    pub keep: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-8, max_basis: 40, keep: 8, max_restarts: 2000, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LanczosStats {
    pub matvecs: usize,
    pub restarts: usize,
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in against {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng, against: &[&[Vec<f64>]]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        for set in against {
            orthogonalize(&mut v, set);
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            scale(1.0 / nv, &mut v);
            return Some(v);
        }
    }
    None
}

/// Lowest eigenpair of the symmetric operator restricted to the orthogonal
/// complement of `deflate` (which must be orthonormal).
pub fn lowest_eigenpair<F>(
    dim: usize,
    apply: &F,
    deflate: &[Vec<f64>],
    opts: &LanczosOptions,
    stats: &mut LanczosStats,
) -> Result<EigenPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let avail = dim.saturating_sub(deflate.len());
    if avail == 0 {
        return Err(Error::InvalidArgument("deflation space fills the whole space".into()));
    }
    let m = opts.max_basis.clamp(2, avail.max(2)).min(avail);
    let keep = opts.keep.clamp(1, m.saturating_sub(1).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (deflate.len() as u64).wrapping_mul(0x9e37_79b9));
    let mut basis: Vec<Vec<f64>> = vec![random_unit(dim, &mut rng, &[deflate])
        .ok_or_else(|| Error::InvalidArgument("cannot draw a start vector".into()))?];
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;

    for restart in 0..=opts.max_restarts {
        stats.restarts = stats.restarts.max(restart);
        let mut beta;
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            stats.matvecs += 1;
            let mut h = vec![0.0; j + 1];
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    h[i] += c;
                    axpy(-c, v, &mut w);
                }
                for v in deflate {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            for (i, &hi) in h.iter().enumerate() {
                t[(i, j)] = hi;
                t[(j, i)] = hi;
            }
            beta = norm(&w);
            if basis.len() == m {
                break;
            }
            let scale_ref = h[j].abs().max(1.0);
            if beta <= 1e-12 * scale_ref {
                // invariant subspace: continue with a fresh direction
                match random_unit(dim, &mut rng, &[deflate, &basis]) {
                    Some(v) => {
                        basis.push(v);
                        continue;
                    }
                    None => {
                        beta = 0.0;
                        break;
                    }
                }
            }
            let mut v = w.clone();
            scale(1.0 / beta, &mut v);
            basis.push(v);
        }

        let s = basis.len();
        let sub = t.view((0, 0), (s, s)).into_owned();
        let eig = SymmetricEigen::new(sub);
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let i0 = order[0];
        let est = beta * eig.eigenvectors[(s - 1, i0)].abs();

        if est <= opts.tol {
            let mut y = vec![0.0; dim];
            for (k, v) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(k, i0)], v, &mut y);
            }
            let ny = norm(&y);
            scale(1.0 / ny, &mut y);
            apply(&y, &mut w);
            stats.matvecs += 1;
            let value = dot(&y, &w);
            axpy(-value, &y, &mut w);
            let mut r = w.clone();
            orthogonalize(&mut r, deflate);
            let residual = norm(&r);
            last_residual = residual;
            if residual <= opts.tol * 10.0 {
                return Ok(EigenPair { value, vector: y, residual });
            }
        } else {
            last_residual = est;
        }

        // thick restart: keep the lowest Ritz vectors plus the residual direction
        let q = keep.min(s - 1).max(1);
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(m);
        for &i in order.iter().take(q) {
            let mut y = vec![0.0; dim];
            for (k, v) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(k, i)], v, &mut y);
            }
            next.push(y);
        }
        orthonormalize(&mut next);
        t.fill(0.0);
        for (a, &i) in order.iter().take(q).enumerate() {
            t[(a, a)] = eig.eigenvalues[i];
        }
        basis = next;
        let fresh = if beta > 0.0 {
            let mut v = w.clone();
            orthogonalize(&mut v, deflate);
            orthogonalize(&mut v, &basis);
            let nv = norm(&v);
            if nv > 1e-10 {
                scale(1.0 / nv, &mut v);
                Some(v)
            } else {
                None
            }
        } else {
            None
        };
        match fresh.or_else(|| random_unit(dim, &mut rng, &[deflate, &basis])) {
            Some(v) => basis.push(v),
            None => {
                // the kept block spans everything that is left
                let y = basis[0].clone();
                apply(&y, &mut w);
                stats.matvecs += 1;
                let value = dot(&y, &w);
                axpy(-value, &y, &mut w);
                orthogonalize(&mut w, deflate);
                return Ok(EigenPair { value, vector: y, residual: norm(&w) });
            }
        }
    }
    Err(Error::NonConvergence { iterations: stats.matvecs, residual: last_residual })
}

/// The `count` lowest eigenpairs outside `deflate`, found one at a time with locking.
pub fn lowest_eigenpairs<F>(
    dim: usize,
    apply: &F,
    deflate: &[Vec<f64>],
    count: usize,
    opts: &LanczosOptions,
    stats: &mut LanczosStats,
) -> Result<Vec<EigenPair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut locked: Vec<Vec<f64>> = deflate.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if locked.len() >= dim {
            break;
        }
        let pair = lowest_eigenpair(dim, apply, &locked, opts, stats)?;
        let mut v = pair.vector.clone();
        orthogonalize(&mut v, &locked);
        let nv = norm(&v);
        scale(1.0 / nv, &mut v);
        locked.push(v);
        out.push(pair);
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Largest eigenvalue of a symmetric positive semidefinite operator.
pub fn largest_eigenvalue<F>(dim: usize, apply: &F, opts: &LanczosOptions, stats: &mut LanczosStats) -> Result<EigenPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let neg = |x: &[f64], y: &mut [f64]| {
        apply(x, y);
        scale(-1.0, y);
    };
    let mut p = lowest_eigenpair(dim, &neg, &[], opts, stats)?;
    p.value = -p.value;
    Ok(p)
}

/// Modified Gram–Schmidt in place; drops vectors that become negligible.
pub fn orthonormalize(vs: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs.drain(..) {
        orthogonalize(&mut v, &out);
        let nv = norm(&v);
        if nv > 1e-10 {
            scale(1.0 / nv, &mut v);
            out.push(v);
        }
    }
    *vs = out;
}

/// Dense matrix from an operator by applying it to every basis vector.
pub fn assemble<F>(dim: usize, apply: &F) -> DMatrix<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}
