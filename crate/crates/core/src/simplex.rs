//! Derivative-free minimization over the probability simplex.
//!
//! Points are parameterized as `softmax(z, 0)` with `z` in `R^(m-1)`, so the
//! search never leaves the simplex and needs no projection. The local search
//! is a plain Nelder–Mead.

/// Smallest probability used when mapping a seed into logit coordinates.
const LOGIT_FLOOR: f64 = 1e-300;

pub(crate) fn to_logits(p: &[f64]) -> Vec<f64> {
    let last = p[p.len() - 1].max(LOGIT_FLOOR).ln();
    p[..p.len() - 1]
        .iter()
        .map(|&v| v.max(LOGIT_FLOOR).ln() - last)
        .collect()
}

pub(crate) fn softmax(z: &[f64], out: &mut [f64]) {
    let max = z.iter().copied().fold(0.0_f64, f64::max);
    let mut total = (-max).exp();
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - max).exp();
        total += *o;
    }
    out[z.len()] = (-max).exp();
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Runs Nelder–Mead from `p0` for at most `iters` iterations and returns the
/// best point seen together with its objective value. The starting point is
/// evaluated directly (not through the logit map) so an exact seed is never lost.
pub(crate) fn minimize<F>(objective: F, p0: &[f64], iters: usize, step: f64) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let m = p0.len();
    let seed_value = objective(p0);
    if m < 2 || iters == 0 {
        return (seed_value, p0.to_vec());
    }
    let dim = m - 1;
    let mut buf = vec![0.0; m];
    let mut eval = |z: &[f64]| {
        softmax(z, &mut buf);
        let v = objective(&buf);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let z0 = to_logits(p0);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(z0.clone());
    for i in 0..dim {
        let mut z = z0.clone();
        z[i] += step;
        simplex.push(z);
    }
    let mut values: Vec<f64> = simplex.iter().map(|z| eval(z)).collect();

    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = idx[0];
        let worst = idx[dim];
        let second_worst = idx[dim - 1];
        if (values[worst] - values[best]).abs() <= 1e-15 * (1.0 + values[best].abs())
            && values[best].is_finite()
        {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &i in idx.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected);
        if fr < values[best] {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = if fr < values[worst] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = eval(&contracted);
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                let anchor = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    for (z, a) in simplex[i].iter_mut().zip(&anchor) {
                        *z = a + 0.5 * (*z - a);
                    }
                    values[i] = eval(&simplex[i]);
                }
            }
        }
    }

    let (bi, &bv) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("simplex is nonempty");
    if bv < seed_value {
        let mut p = vec![0.0; m];
        softmax(&simplex[bi], &mut p);
        (bv, p)
    } else {
        (seed_value, p0.to_vec())
    }
}
