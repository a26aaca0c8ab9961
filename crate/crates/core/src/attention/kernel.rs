//! Dense softmax attention over contiguous row blocks.

/// Queries processed together so each key and value row is loaded once per tile.
const QUERY_TILE: usize = 8;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (ca, ra) = a.as_chunks::<4>();
    let (cb, rb) = b.as_chunks::<4>();
    for (x, y) in ca.iter().zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(out: &mut [f64], w: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += w * v;
    }
}

/// Shapes of one dense attention problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockDims {
    pub queries: usize,
    pub keys: usize,
    pub dim: usize,
    pub value_dim: usize,
}

/// Unmasked attention: `out = softmax(q k^T * scale) v`, row-major slices.
///
/// `scores` is scratch space and is resized as needed.
pub(crate) fn dense_block(
    q: &[f64],
    k: &[f64],
    v: &[f64],
    dims: BlockDims,
    scale: f64,
    out: &mut [f64],
    scores: &mut Vec<f64>,
) {
    let BlockDims {
        queries: nq,
        keys: nk,
        dim: d,
        value_dim: dv,
    } = dims;
    debug_assert_eq!(q.len(), nq * d);
    debug_assert_eq!(k.len(), nk * d);
    debug_assert_eq!(v.len(), nk * dv);
    debug_assert_eq!(out.len(), nq * dv);
    out.fill(0.0);
    if nq == 0 || nk == 0 {
        return;
    }
    scores.clear();
    scores.resize(QUERY_TILE * nk, 0.0);

    let mut norm = [0.0f64; QUERY_TILE];
    for t0 in (0..nq).step_by(QUERY_TILE) {
        let tn = QUERY_TILE.min(nq - t0);
        let q_tile = &q[t0 * d..(t0 + tn) * d];

        for (j, kj) in k.chunks_exact(d).enumerate() {
            for (t, qt) in q_tile.chunks_exact(d).enumerate() {
                scores[t * nk + j] = dot(qt, kj) * scale;
            }
        }

        for (t, n) in norm.iter_mut().enumerate().take(tn) {
            let row = &mut scores[t * nk..(t + 1) * nk];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for s in row.iter_mut() {
                *s = (*s - max).exp();
                sum += *s;
            }
            *n = sum;
        }

        let out_tile = &mut out[t0 * dv..(t0 + tn) * dv];
        for (j, vj) in v.chunks_exact(dv).enumerate() {
            for (t, ot) in out_tile.chunks_exact_mut(dv).enumerate() {
                axpy(ot, scores[t * nk + j], vj);
            }
        }
        for (ot, &sum) in out_tile.chunks_exact_mut(dv).zip(&norm) {
            for o in ot.iter_mut() {
                *o /= sum;
            }
        }
    }
}
