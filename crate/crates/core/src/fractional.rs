//! Difference-based ratio refinement of integer detections.
//!
//! For a detected peak `k₁` and its stronger neighbour `k₂ = [k₁ ± 1]_N`,
//!
//! ```text
//! κ̂ = (k₂ − k₁) |V[k₂, l]| / (|V[k₁, l]| + |V[k₂, l]|)
//! ```
//!
//! and analogously along delay. `k₂ − k₁` is taken on the ring, so peaks at
//! bin 0 or N−1 refine across the wrap.

use crate::correlator::CorrelationMap;
use crate::detector::{is_local_max, Detection, DetectionList};
use crate::error::{Error, Result};
use crate::grid::FrameGrid;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Doppler,
    Delay,
}

/// Refined target position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalEstimate<T> {
    /// Doppler storage row of the peak.
    pub k: usize,
    /// Delay column of the peak.
    pub l: usize,
    pub kappa: T,
    pub iota: T,
    /// Signed Doppler index `k + κ̂`, wrapped to `[−N/2, N/2)`.
    pub doppler_index: T,
    /// Delay index `l + ι̂`, wrapped to `[0, M)`.
    pub delay_index: T,
    pub kappa_clamped: bool,
    pub iota_clamped: bool,
    /// Set when both magnitudes on some axis were zero; that fraction is 0.
    pub zero_denominator: bool,
}

impl<T: Real> FractionalEstimate<T> {
    /// Signed integer Doppler bin.
    pub fn doppler_bin(&self, n_doppler: usize) -> isize {
        let k = self.k as isize;
        if self.k < n_doppler.div_ceil(2) {
            k
        } else {
            k - n_doppler as isize
        }
    }

    pub fn range_m(&self, grid: &FrameGrid<T>) -> T {
        grid.delay_index_to_range(self.delay_index)
    }

    pub fn velocity_mps(&self, grid: &FrameGrid<T>) -> T {
        grid.doppler_index_to_velocity(self.doppler_index)
    }
}

fn ring_step(a: usize, b: usize, n: usize) -> Result<isize> {
    if n >= 2 && b == (a + 1) % n {
        Ok(1)
    } else if n >= 2 && b == (a + n - 1) % n {
        Ok(-1)
    } else {
        Err(Error::InvalidArgument(format!("{b} is not a ring neighbour of {a} modulo {n}")))
    }
}

fn check_cell<T: Real>(v: &CorrelationMap<T>, k: usize, l: usize) -> Result<()> {
    if k >= v.rows() || l >= v.cols() {
        return Err(Error::InvalidArgument(format!(
            "cell ({k}, {l}) outside a {}x{} map",
            v.rows(),
            v.cols()
        )));
    }
    Ok(())
}

/// Stronger of the two ring neighbours of `(k, l)` along `axis`; ties go to +1.
pub fn pick_neighbor<T: Real>(v: &CorrelationMap<T>, k: usize, l: usize, axis: Axis) -> usize {
    let (n, m) = v.dims();
    match axis {
        Axis::Doppler => {
            let up = (k + 1) % n;
            let down = (k + n - 1) % n;
            if v.v[(down, l)].norm() > v.v[(up, l)].norm() {
                down
            } else {
                up
            }
        }
        Axis::Delay => {
            let up = (l + 1) % m;
            let down = (l + m - 1) % m;
            if v.v[(k, down)].norm() > v.v[(k, up)].norm() {
                down
            } else {
                up
            }
        }
    }
}

/// Outcome of one ratio evaluation before it is stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioFraction<T> {
    pub value: T,
    pub clamped: bool,
}

/// `step · a₂ / (a₁ + a₂)` clamped to `[−0.5, 0.5]`.
pub fn ratio_fraction<T: Real>(a1: T, a2: T, step: isize) -> Result<RatioFraction<T>> {
    let den = a1 + a2;
    if den == T::zero() {
        return Err(Error::ZeroDenominator);
    }
    if !den.is_finite() {
        return Err(Error::NonFinite("neighbour magnitude".into()));
    }
    let raw = T::of_isize(step) * a2 / den;
    let half = T::of(0.5);
    let value = raw.max(-half).min(half);
    Ok(RatioFraction {
        value,
        clamped: value != raw,
    })
}

/// Fractional Doppler from rows `k1` (peak) and `k2` (neighbour) at column `l`.
pub fn estimate_kappa<T: Real>(v: &CorrelationMap<T>, k1: usize, k2: usize, l: usize) -> Result<T> {
    check_cell(v, k1, l)?;
    check_cell(v, k2, l)?;
    let step = ring_step(k1, k2, v.rows())?;
    Ok(ratio_fraction(v.v[(k1, l)].norm(), v.v[(k2, l)].norm(), step)?.value)
}

/// Fractional delay from columns `l1` (peak) and `l2` (neighbour) at row `k`.
pub fn estimate_iota<T: Real>(v: &CorrelationMap<T>, k: usize, l1: usize, l2: usize) -> Result<T> {
    check_cell(v, k, l1)?;
    check_cell(v, k, l2)?;
    let step = ring_step(l1, l2, v.cols())?;
    Ok(ratio_fraction(v.v[(k, l1)].norm(), v.v[(k, l2)].norm(), step)?.value)
}

fn axis_fraction<T: Real>(
    v: &CorrelationMap<T>,
    k: usize,
    l: usize,
    axis: Axis,
) -> Result<(RatioFraction<T>, bool)> {
    let nb = pick_neighbor(v, k, l, axis);
    let (a1, a2, step) = match axis {
        Axis::Doppler => (v.v[(k, l)].norm(), v.v[(nb, l)].norm(), ring_step(k, nb, v.rows())?),
        Axis::Delay => (v.v[(k, l)].norm(), v.v[(k, nb)].norm(), ring_step(l, nb, v.cols())?),
    };
    match ratio_fraction(a1, a2, step) {
        Ok(f) => Ok((f, false)),
        Err(Error::ZeroDenominator) => Ok((
            RatioFraction {
                value: T::zero(),
                clamped: false,
            },
            true,
        )),
        Err(e) => Err(e),
    }
}

fn wrap_signed<T: Real>(x: T, n: usize) -> T {
    let nn = T::of_usize(n);
    let half = nn / T::of(2.0);
    let mut y = (x + half) % nn;
    if y < T::zero() {
        y += nn;
    }
    y - half
}

fn wrap_unsigned<T: Real>(x: T, n: usize) -> T {
    let nn = T::of_usize(n);
    let mut y = x % nn;
    if y < T::zero() {
        y += nn;
    }
    y
}

/// Refine a single peak at `(k, l)`.
pub fn refine_cell<T: Real>(v: &CorrelationMap<T>, k: usize, l: usize) -> Result<FractionalEstimate<T>> {
    check_cell(v, k, l)?;
    let (n, m) = v.dims();
    let (kappa, zk) = axis_fraction(v, k, l, Axis::Doppler)?;
    let (iota, zl) = axis_fraction(v, k, l, Axis::Delay)?;
    let signed_k = if k < n.div_ceil(2) { k as isize } else { k as isize - n as isize };
    Ok(FractionalEstimate {
        k,
        l,
        kappa: kappa.value,
        iota: iota.value,
        doppler_index: wrap_signed(T::of_isize(signed_k) + kappa.value, n),
        delay_index: wrap_unsigned(T::of_usize(l) + iota.value, m),
        kappa_clamped: kappa.clamped,
        iota_clamped: iota.clamped,
        zero_denominator: zk || zl,
    })
}

/// Refine every detection in order.
pub fn refine_detections<T: Real>(
    v: &CorrelationMap<T>,
    dets: &DetectionList<T>,
) -> Result<Vec<FractionalEstimate<T>>> {
    dets.detections.iter().map(|d| refine_cell(v, d.k, d.l)).collect()
}

/// The `p` strongest local maxima of `|V|²` (neighbourhood `±guard`),
/// strongest first. `threshold` is reported as zero.
pub fn pick_largest_peaks<T: Real>(v: &CorrelationMap<T>, p: usize, guard: [usize; 2]) -> DetectionList<T> {
    let power = v.power();
    let (rows, cols) = power.dims();
    let mut peaks: Vec<Detection<T>> = (0..rows)
        .flat_map(|k| (0..cols).map(move |l| (k, l)))
        .filter(|&(k, l)| is_local_max(&power, k, l, guard[0], guard[1]))
        .map(|(k, l)| Detection {
            k,
            l,
            statistic: power[(k, l)],
            threshold: T::zero(),
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.statistic
            .partial_cmp(&a.statistic)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((a.k, a.l).cmp(&(b.k, b.l)))
    });
    peaks.truncate(p);
    DetectionList { detections: peaks }
}

/// Refinement entered from a known target count instead of CFAR output.
pub fn refine_largest_peaks<T: Real>(
    v: &CorrelationMap<T>,
    p: usize,
    guard: [usize; 2],
) -> Result<Vec<FractionalEstimate<T>>> {
    refine_detections(v, &pick_largest_peaks(v, p, guard))
}
