use crate::error::{Error, Result};

/// Trailing mean over the last `window` points, shortened at the start of
/// the series. Each output lies within the min and max of its window.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::invalid("cannot smooth an empty series"));
    }
    if window == 0 {
        return Err(Error::invalid("moving-average window must be at least 1"));
    }
    Ok((0..series.len())
        .map(|i| {
            let w = &series[(i + 1).saturating_sub(window)..=i];
            let (lo, hi) = w
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            (w.iter().sum::<f64>() / w.len() as f64).clamp(lo, hi)
        })
        .collect())
}

/// Earliest index `i >= start` such that `trajectory[i..i + hold]` lies at
/// or above `target` in full. A hold of 0 is treated as 1.
pub fn find_sustained_hit(trajectory: &[f64], start: usize, target: f64, hold: usize) -> Option<usize> {
    let hold = hold.max(1);
    let mut run = 0;
    for (i, &v) in trajectory.iter().enumerate().skip(start) {
        if v >= target {
            run += 1;
            if run == hold {
                return Some(i + 1 - hold);
            }
        } else {
            run = 0;
        }
    }
    None
}
