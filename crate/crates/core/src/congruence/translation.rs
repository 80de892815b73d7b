use crate::series::euclidean;

/// Translation `v` minimizing `Σ ‖r_i − v‖^p` over the flat residuals `res`.
///
/// Iteratively reweighted means with weights `max(‖r_i − v‖, eps)^(p−2)`,
/// starting from `start` or the centroid. For `p = 1` this is Weiszfeld's
/// geometric-median iteration; for `p = 2` it returns the centroid.
pub fn optimal_translation(
    res: &[f64],
    k: usize,
    p: f64,
    start: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
    eps: f64,
) -> Vec<f64> {
    let n = res.len() / k;
    let mut v = match start {
        Some(v0) => v0.to_vec(),
        None => {
            let mut c = vec![0.0; k];
            for r in res.chunks_exact(k) {
                for (ci, ri) in c.iter_mut().zip(r) {
                    *ci += ri;
                }
            }
            c.iter_mut().for_each(|ci| *ci /= n as f64);
            c
        }
    };
    if p == 2.0 && start.is_none() {
        return v;
    }
    let objective =
        |x: &[f64]| -> f64 { res.chunks_exact(k).map(|r| euclidean(r, x).powf(p)).sum() };
    let mut current = objective(&v);
    let mut next = vec![0.0; k];
    let mut trial = vec![0.0; k];
    for _ in 0..max_iters {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut total = 0.0;
        for r in res.chunks_exact(k) {
            let d = euclidean(r, &v).max(eps);
            let w = if p == 1.0 { 1.0 / d } else { d.powf(p - 2.0) };
            total += w;
            for (ni, ri) in next.iter_mut().zip(r) {
                *ni += w * ri;
            }
        }
        next.iter_mut().for_each(|x| *x /= total);
        // The reweighted mean can overshoot for p > 2; halve the step until
        // the objective does not increase.
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            for ((tr, a), b) in trial.iter_mut().zip(&v).zip(&next) {
                *tr = a + t * (b - a);
            }
            let value = objective(&trial);
            if value <= current {
                accepted = Some(value);
                break;
            }
            t *= 0.5;
        }
        let Some(value) = accepted else { break };
        let step = euclidean(&trial, &v);
        let scale = 1.0 + v.iter().map(|x| x * x).sum::<f64>().sqrt();
        std::mem::swap(&mut v, &mut trial);
        current = value;
        if step <= tol * scale {
            break;
        }
    }
    v
}
