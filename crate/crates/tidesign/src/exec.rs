//! Serial/parallel dispatch for the chunked kernels.
//!
//! Every reduction is split into fixed-size chunks whose partial sums are
//! combined in chunk order, so results do not depend on the thread count.

use std::sync::atomic::{AtomicBool, Ordering};

/// Number of elements handled by one work item.
pub const CHUNK: usize = 1 << 14;

static FORCE_SERIAL: AtomicBool = AtomicBool::new(false);

/// Forces the serial code path even when the `parallel` feature is enabled.
pub fn set_serial(serial: bool) {
    FORCE_SERIAL.store(serial, Ordering::SeqCst);
}

/// True when kernels will run on the rayon pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SERIAL.load(Ordering::SeqCst)
}

/// Calls `f(chunk_index, chunk)` on consecutive `CHUNK`-sized pieces of `out`.
pub fn for_chunks_mut<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && out.len() > CHUNK {
        use rayon::prelude::*;
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, s)| f(c, s));
        return;
    }
    for (c, s) in out.chunks_mut(CHUNK).enumerate() {
        f(c, s);
    }
}

/// Maps `f` over `0..count` and returns the results in index order.
pub fn map_indexed<R, F>(count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && count > 1 {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    (0..count).map(f).collect()
}

/// Sum of `f(chunk_index, range)` over chunks of `0..len`, combined in order.
pub fn chunked_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    let parts = map_indexed(chunks, |c| f(c * CHUNK..((c + 1) * CHUNK).min(len)));
    parts.into_iter().sum()
}

/// Deterministic dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    chunked_sum(a.len(), |r| a[r.clone()].iter().zip(&b[r]).map(|(x, y)| x * y).sum())
}

/// Deterministic Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len());
    for_chunks_mut(y, |c, s| {
        let base = c * CHUNK;
        for (i, v) in s.iter_mut().enumerate() {
            *v += alpha * x[base + i];
        }
    });
}

/// `x *= alpha`
pub fn scale(alpha: f64, x: &mut [f64]) {
    for_chunks_mut(x, |_, s| s.iter_mut().for_each(|v| *v *= alpha));
}
