//! Dense-grid scanning shared by the encoder and the threshold bounds.

use crate::par::Execution;
use crate::signal_model::Waveform;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Uniform grid over `[start, end]` with its sampled values.
pub(crate) struct Grid {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn sample<W: Waveform + ?Sized>(
        f: &W,
        start: f64,
        end: f64,
        cells: usize,
        exec: Execution,
    ) -> Self {
        let cells = cells.max(1);
        let h = (end - start) / cells as f64;
        let times: Vec<f64> = (0..=cells)
            .map(|i| {
                if i == cells {
                    end
                } else {
                    start + i as f64 * h
                }
            })
            .collect();
        let values = exec.map_range(times.len(), |i| f.value(times[i]));
        Self { times, values }
    }

    /// Indices of interior grid points that bracket a local maximum (`true`)
    /// or minimum (`false`).
    pub fn local_extrema(&self) -> Vec<(usize, bool)> {
        let v = &self.values;
        (1..v.len().saturating_sub(1))
            .filter_map(|i| {
                let d1 = v[i] - v[i - 1];
                let d2 = v[i + 1] - v[i];
                if d1 > 0.0 && d2 <= 0.0 {
                    Some((i, true))
                } else if d1 < 0.0 && d2 >= 0.0 {
                    Some((i, false))
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Golden-section search for an extremum of `f` on `[a, b]`.
pub(crate) fn golden_extremum<W: Waveform + ?Sized>(
    f: &W,
    mut a: f64,
    mut b: f64,
    maximize: bool,
    tol: f64,
) -> (f64, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |t: f64| sign * f.value(t);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while (b - a) > tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
        if c >= d {
            break;
        }
    }
    let t = 0.5 * (a + b);
    (t, f.value(t))
}

/// Smallest `t` in `(lo, hi]` with `reached(t)`, assuming `reached` flips
/// once from false to true. Bisects down to adjacent floats.
pub(crate) fn bisect_first(mut lo: f64, mut hi: f64, reached: impl Fn(f64) -> bool) -> f64 {
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}
