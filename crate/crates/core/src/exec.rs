//! Execution policy for the data-parallel inner loops.
//!
//! With the `parallel` feature (default) independent grid lines and Jacobi
//! sweeps run on the rayon pool; without it, or after
//! `set_execution(Execution::Sequential)`, the same closures run on the
//! calling thread. Each work item writes only its own output slot, so both
//! paths produce bit-identical results.

use std::sync::atomic::{AtomicU8, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

/// Selects the process-wide execution policy.
pub fn set_execution(mode: Execution) {
    MODE.store(mode as u8, Ordering::Relaxed);
}

/// The policy currently in effect. Always `Sequential` without the
/// `parallel` feature.
pub fn execution() -> Execution {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == Execution::Parallel as u8 {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// `out[i] = f(i)` for `i in 0..len`.
pub(crate) fn map_indexed<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Runs `f(input_line, output_line)` on every line of a row-major array
/// along `axis`, where the output array has the same shape except that the
/// axis has length `out_len`.
pub(crate) fn map_lines<F>(
    shape: &[usize],
    values: &[f64],
    axis: usize,
    out_len: usize,
    f: F,
) -> Vec<f64>
where
    F: Fn(&[f64], &mut [f64]) + Sync + Send,
{
    let n = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let lines = outer * inner;
    debug_assert_eq!(values.len(), lines * n);

    let work = |line: usize, buf: &mut Vec<f64>, out: &mut [f64]| {
        let (o, i) = (line / inner, line % inner);
        let base = o * n * inner + i;
        buf.clear();
        buf.extend((0..n).map(|k| values[base + k * inner]));
        f(buf, out);
    };

    let mut by_line = vec![0.0; lines * out_len];
    if out_len > 0 {
        run_chunks(&mut by_line, out_len, n, work);
    }
    if inner == 1 {
        return by_line;
    }
    let mut result = vec![0.0; lines * out_len];
    for o in 0..outer {
        for i in 0..inner {
            let src = &by_line[(o * inner + i) * out_len..][..out_len];
            let base = o * out_len * inner + i;
            for (j, v) in src.iter().enumerate() {
                result[base + j * inner] = *v;
            }
        }
    }
    result
}

fn run_chunks<W>(data: &mut [f64], chunk: usize, scratch: usize, work: W)
where
    W: Fn(usize, &mut Vec<f64>, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        data.par_chunks_mut(chunk).enumerate().for_each_init(
            || Vec::with_capacity(scratch),
            |buf, (line, out)| work(line, buf, out),
        );
        return;
    }
    let mut buf = Vec::with_capacity(scratch);
    for (line, out) in data.chunks_mut(chunk).enumerate() {
        work(line, &mut buf, out);
    }
}
