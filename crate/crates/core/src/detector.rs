//! GLRT target detection on the correlation map with 2D CA-CFAR thresholds.
//!
//! The statistic at each cell is `|V[k, l]|²`. The threshold is
//! `α · S_H0(k, l)`, where `S_H0` is the mean statistic over a rectangular
//! training ring (guard ring and cell under test excluded) wrapped on the
//! DD torus, and `α = N_s (P_fa^{-1/N_s} − 1)`.

use num_complex::Complex;

use crate::correlator::CorrelationMap;
use crate::error::{Error, Result};
use crate::matrix::RealMap;
use crate::scalar::Real;

/// CA-CFAR window and false-alarm target. Window sizes are given per axis as
/// `[doppler, delay]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfarConfig {
    pub guard_cells: [usize; 2],
    pub training_cells: [usize; 2],
    pub p_fa: f64,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            guard_cells: [2, 2],
            training_cells: [4, 4],
            p_fa: 1e-4,
        }
    }
}

impl CfarConfig {
    pub fn with_p_fa(p_fa: f64) -> Self {
        Self {
            p_fa,
            ..Self::default()
        }
    }

    /// Full window side `2(T + G) + 1` per axis.
    pub fn window(&self) -> [usize; 2] {
        [0, 1].map(|i| 2 * (self.training_cells[i] + self.guard_cells[i]) + 1)
    }

    /// Number of training cells `N_s`.
    pub fn training_count(&self) -> usize {
        let w = self.window();
        let g = [0, 1].map(|i| 2 * self.guard_cells[i] + 1);
        w[0] * w[1] - g[0] * g[1]
    }

    pub fn alpha(&self) -> Result<f64> {
        cfar_alpha(self.training_count(), self.p_fa)
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.training_cells.contains(&0) {
            return Err(Error::InvalidWindow(format!(
                "training cells must be positive per axis, got {:?}",
                self.training_cells
            )));
        }
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(Error::InvalidProbability(self.p_fa));
        }
        let w = self.window();
        if w[0] > rows || w[1] > cols {
            return Err(Error::WindowTooLarge {
                window: (w[0], w[1]),
                rows,
                cols,
            });
        }
        Ok(())
    }
}

/// CA-CFAR scaling `α = n_s (p_fa^{-1/n_s} − 1)` for exponential background.
pub fn cfar_alpha(n_s: usize, p_fa: f64) -> Result<f64> {
    if n_s == 0 {
        return Err(Error::InvalidWindow("no training cells".into()));
    }
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::InvalidProbability(p_fa));
    }
    let n = n_s as f64;
    // p^{-1/n} − 1 = expm1(−ln p / n), exact for large n.
    Ok(n * (-p_fa.ln() / n).exp_m1())
}

/// Circular box sum with half-widths `(hk, hl)`.
fn box_sum<T: Real>(map: &RealMap<T>, hk: usize, hl: usize) -> RealMap<T> {
    let (rows, cols) = map.dims();
    let along_delay = RealMap::from_fn(rows, cols, |k, l| {
        (-(hl as isize)..=hl as isize).fold(T::zero(), |acc, d| acc + map.get_wrapped(k as isize, l as isize + d))
    });
    RealMap::from_fn(rows, cols, |k, l| {
        (-(hk as isize)..=hk as isize)
            .fold(T::zero(), |acc, d| acc + along_delay.get_wrapped(k as isize + d, l as isize))
    })
}

/// Mean training-cell statistic `S_H0` for every cell.
pub fn training_mean<T: Real>(power: &RealMap<T>, cfg: &CfarConfig) -> Result<RealMap<T>> {
    let (rows, cols) = power.dims();
    cfg.validate(rows, cols)?;
    let outer = box_sum(
        power,
        cfg.training_cells[0] + cfg.guard_cells[0],
        cfg.training_cells[1] + cfg.guard_cells[1],
    );
    let inner = box_sum(power, cfg.guard_cells[0], cfg.guard_cells[1]);
    let n_s = T::of_usize(cfg.training_count());
    Ok(RealMap::from_fn(rows, cols, |k, l| {
        ((outer[(k, l)] - inner[(k, l)]) / n_s).max(T::zero())
    }))
}

/// Adaptive threshold `α · S_H0` on the `|V|²` statistic.
pub fn cfar_threshold_map<T: Real>(v: &CorrelationMap<T>, cfg: &CfarConfig) -> Result<RealMap<T>> {
    threshold_map_from_power(&v.power(), cfg)
}

pub fn threshold_map_from_power<T: Real>(power: &RealMap<T>, cfg: &CfarConfig) -> Result<RealMap<T>> {
    let alpha = T::of(cfg.alpha()?);
    let mean = training_mean(power, cfg)?;
    let (rows, cols) = mean.dims();
    Ok(RealMap::from_fn(rows, cols, |k, l| alpha * mean[(k, l)]))
}

/// One declared target on the integer grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    /// Doppler storage row.
    pub k: usize,
    /// Delay column.
    pub l: usize,
    /// `|V[k, l]|²`.
    pub statistic: T,
    pub threshold: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionList<T> {
    pub detections: Vec<Detection<T>>,
}

impl<T: Real> DetectionList<T> {
    /// Estimated number of targets `P̂`.
    pub fn count(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.detections.iter().map(|d| (d.k, d.l)).collect()
    }
}

/// `true` if `(k, l)` holds the largest value within `±(hk, hl)` on the
/// torus; equal values are resolved in favour of the smaller row-major index.
pub fn is_local_max<T: Real>(power: &RealMap<T>, k: usize, l: usize, hk: usize, hl: usize) -> bool {
    let (rows, cols) = power.dims();
    let centre = power[(k, l)];
    let here = k * cols + l;
    for dk in -(hk as isize)..=hk as isize {
        for dl in -(hl as isize)..=hl as isize {
            if dk == 0 && dl == 0 {
                continue;
            }
            let nk = (k as isize + dk).rem_euclid(rows as isize) as usize;
            let nl = (l as isize + dl).rem_euclid(cols as isize) as usize;
            let other = power[(nk, nl)];
            if other > centre || (other == centre && nk * cols + nl < here) {
                return false;
            }
        }
    }
    true
}

/// Statistic at or below which a cell is treated as FFT round-off:
/// `max |V|² · (1000 ε)²`.
pub fn numerical_floor<T: Real>(power: &RealMap<T>) -> T {
    let e = T::epsilon() * T::of(1000.0);
    power.max() * e * e
}

/// Scan every cell, keep those above threshold that are also the strongest
/// cell of their guard neighbourhood. Cells at the round-off floor are never
/// declared.
pub fn detect_targets<T: Real>(v: &CorrelationMap<T>, cfg: &CfarConfig) -> Result<DetectionList<T>> {
    let power = v.power();
    let threshold = threshold_map_from_power(&power, cfg)?;
    let floor = numerical_floor(&power);
    let (rows, cols) = power.dims();
    let [gk, gl] = cfg.guard_cells;
    let mut detections = Vec::new();
    for k in 0..rows {
        for l in 0..cols {
            let s = power[(k, l)];
            let t = threshold[(k, l)];
            if s > t && s > floor && is_local_max(&power, k, l, gk, gl) {
                detections.push(Detection {
                    k,
                    l,
                    statistic: s,
                    threshold: t,
                });
            }
        }
    }
    Ok(DetectionList { detections })
}

/// Raw CFAR exceedances without peak consolidation.
pub fn raw_exceedances<T: Real>(v: &CorrelationMap<T>, cfg: &CfarConfig) -> Result<usize> {
    let power = v.power();
    let threshold = threshold_map_from_power(&power, cfg)?;
    let floor = numerical_floor(&power);
    Ok(power
        .as_slice()
        .iter()
        .zip(threshold.as_slice())
        .filter(|&(s, t)| s > t && *s > floor)
        .count())
}

/// Gain estimate `V[k, l] / (MN)` at a detected cell; equals `conj(h) e^{j2πντ}`
/// for an isolated on-grid target.
pub fn estimate_gain<T: Real>(v: &CorrelationMap<T>, k: usize, l: usize) -> Complex<T> {
    let mn = T::of_usize(v.rows() * v.cols());
    v.v[(k, l)] / mn
}
