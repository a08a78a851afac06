//! Test-side oracles, independent of the implementation paths they check.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Slot-level Monte Carlo of saturated DCF stations with binary exponential
/// backoff. Counters decrement once per virtual slot (busy periods count as
/// one slot for the backoff chain); each transmission occupies the medium
/// for `pkt_slots` real slots. Returns idle real slots / total real slots.
///
/// The chain starts at backoff stage zero for everyone, which is far more
/// aggressive than the stationary mix, so measurement begins only after a
/// burn-in period.
pub fn mc_dcf_p_off(
    stations: usize,
    min_window: u32,
    max_doublings: u32,
    pkt_slots: u64,
    measured_slots: u64,
    burn_in_slots: u64,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut stage = vec![0u32; stations];
    let mut counter: Vec<u64> = (0..stations)
        .map(|_| rng.random_range(0..u64::from(min_window)))
        .collect();

    let mut idle: u64 = 0;
    let mut busy_periods: u64 = 0;
    let mut elapsed: u64 = 0;
    let total = measured_slots + burn_in_slots;
    while elapsed < total {
        let transmitters: Vec<usize> = (0..stations).filter(|&s| counter[s] == 0).collect();
        let in_burn_in = elapsed < burn_in_slots;
        if transmitters.is_empty() {
            if !in_burn_in {
                idle += 1;
            }
            elapsed += 1;
        } else {
            if !in_burn_in {
                busy_periods += 1;
            }
            elapsed += pkt_slots;
        }
        for s in 0..stations {
            if counter[s] == 0 {
                stage[s] = if transmitters.len() == 1 {
                    0
                } else {
                    (stage[s] + 1).min(max_doublings)
                };
                let window = u64::from(min_window) << stage[s];
                counter[s] = rng.random_range(0..window);
            } else {
                counter[s] -= 1;
            }
        }
    }
    idle as f64 / (idle + pkt_slots * busy_periods) as f64
}

/// Utility of an allocation; `-inf` outside the log domain.
pub fn utility(c_l: &[f64], c_u: &[f64], bias: &[f64], x_l: &[f64], x_u: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..c_l.len() {
        let arg = c_l[k] * x_l[k] + c_u[k] * x_u[k] + bias[k];
        if arg <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += arg.ln();
    }
    total
}

fn simplex_grid(k: usize, step: f64) -> Vec<Vec<f64>> {
    let n = (1.0 / step).round() as usize;
    let mut points = Vec::new();
    match k {
        2 => {
            for i in 0..=n {
                let a = i as f64 * step;
                points.push(vec![a, 1.0 - a]);
            }
        }
        3 => {
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let a = i as f64 * step;
                    let b = j as f64 * step;
                    points.push(vec![a, b, 1.0 - a - b]);
                }
            }
        }
        _ => panic!("grid oracle supports K in {{2, 3}}"),
    }
    points
}

fn local_simplex_grid(center: &[f64], width: f64, step: f64) -> Vec<Vec<f64>> {
    let n = (width / step).round() as i64;
    let mut points = Vec::new();
    match center.len() {
        2 => {
            for da in -n..=n {
                let a = center[0] + da as f64 * step;
                if (0.0..=1.0).contains(&a) {
                    points.push(vec![a, 1.0 - a]);
                }
            }
        }
        3 => {
            for da in -n..=n {
                for db in -n..=n {
                    let a = center[0] + da as f64 * step;
                    let b = center[1] + db as f64 * step;
                    let c = 1.0 - a - b;
                    if (0.0..=1.0).contains(&a)
                        && (0.0..=1.0).contains(&b)
                        && (-1e-12..=1.0).contains(&c)
                    {
                        points.push(vec![a, b, c.max(0.0)]);
                    }
                }
            }
        }
        _ => panic!("grid oracle supports K in {{2, 3}}"),
    }
    points
}

fn best_over(
    points_l: &[Vec<f64>],
    points_u: &[Vec<f64>],
    c_l: &[f64],
    c_u: &[f64],
    bias: &[f64],
) -> (f64, Vec<f64>, Vec<f64>) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = (points_l[0].clone(), points_u[0].clone());
    for xl in points_l {
        for xu in points_u {
            let u = utility(c_l, c_u, bias, xl, xu);
            if u > best {
                best = u;
                arg = (xl.clone(), xu.clone());
            }
        }
    }
    (best, arg.0, arg.1)
}

/// Dense grid-search optimum of the allocation problem, step 1e-3.
///
/// K = 2 enumerates the full joint grid. K = 3 first scans a coarse joint
/// grid and then refines around the best cell at the fine step; the
/// objective is concave, so the coarse optimum brackets the true one.
pub fn grid_search_utility(c_l: &[f64], c_u: &[f64], bias: &[f64]) -> f64 {
    match c_l.len() {
        2 => {
            let pts = simplex_grid(2, 1e-3);
            best_over(&pts, &pts, c_l, c_u, bias).0
        }
        3 => {
            let coarse = simplex_grid(3, 0.02);
            let (_, best_l, best_u) = best_over(&coarse, &coarse, c_l, c_u, bias);
            let fine_l = local_simplex_grid(&best_l, 0.02, 1e-3);
            let fine_u = local_simplex_grid(&best_u, 0.02, 1e-3);
            best_over(&fine_l, &fine_u, c_l, c_u, bias).0
        }
        _ => panic!("grid oracle supports K in {{2, 3}}"),
    }
}

/// One-sided exact sign test: probability of observing at least `wins`
/// successes among `trials` fair coin flips.
pub fn sign_test_p_value(wins: usize, trials: usize) -> f64 {
    let mut tail = 0.0f64;
    for k in wins..=trials {
        tail += binomial(trials, k);
    }
    tail / 2f64.powi(trials as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Least-squares line fit returning (slope, intercept, r_squared).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}
