//! Steady-state thermal model of the interposer.
//!
//! The interposer is discretized into a `resolution x resolution` grid of
//! cells. Each cell exchanges heat with its 4-neighbors through a lateral
//! conductance, leaks to a heat sink at ambient temperature through a sink
//! conductance, and receives the power of whatever chiplet area covers it.
//! The steady state satisfies, per cell,
//!
//! ```text
//! sum_nbr g * (T_nbr - T_cell) + g_sink * (ambient - T_cell) + P_cell = 0
//! ```
//!
//! which is a symmetric positive-definite linear system in the temperature
//! rise `u = T - ambient`. It is solved with conjugate gradients from a zero
//! start, so an all-zero power map yields exactly `ambient` everywhere and
//! doubling the power map doubles every rise bit for bit.

use serde::{Deserialize, Serialize};

use crate::geometry::Placement;

/// Grid size and conductances of the thermal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    /// Cells per interposer edge.
    pub grid_resolution: usize,
    /// Lateral conductance between adjacent cells, W/K.
    pub interposer_conductance: f64,
    /// Conductance from each cell to the heat sink, W/K.
    pub sink_conductance: f64,
    /// Heat-sink (ambient) temperature, °C.
    pub ambient: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            grid_resolution: 64,
            interposer_conductance: 2.0,
            sink_conductance: 0.05,
            ambient: 45.0,
        }
    }
}

/// A solved temperature field, row-major with row 0 at the bottom
/// (`y = 0`) edge of the interposer.
///
/// The solver works on temperature rises above ambient; both the raw rises
/// and the final temperatures are kept so that exactly linear quantities
/// (the rises) stay observable without a lossy round trip through the
/// ambient offset.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalMap {
    resolution: usize,
    ambient: f64,
    rises: Vec<f64>,
    cells: Vec<f64>,
}

impl ThermalMap {
    fn new(resolution: usize, ambient: f64, rises: Vec<f64>) -> Self {
        let cells = rises.iter().map(|&u| ambient + u).collect();
        ThermalMap { resolution, ambient, rises, cells }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn ambient(&self) -> f64 {
        self.ambient
    }

    /// All cell temperatures, row-major.
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// All temperature rises above ambient, row-major.
    pub fn rises(&self) -> &[f64] {
        &self.rises
    }

    /// Temperature of cell (`row`, `col`) in °C.
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.resolution + col]
    }

    /// Rise above ambient of cell (`row`, `col`) in K.
    pub fn rise_at(&self, row: usize, col: usize) -> f64 {
        self.rises[row * self.resolution + col]
    }

    /// The hottest cell temperature.
    pub fn max_temperature(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// (row, col) of the first hottest cell in row-major order.
    pub fn hottest_cell(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &t) in self.cells.iter().enumerate() {
            if t > self.cells[best] {
                best = i;
            }
        }
        (best / self.resolution, best % self.resolution)
    }

    /// CSV rendering: one line per grid row (row 0 first), cells separated
    /// by commas, 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in 0..self.resolution {
            for col in 0..self.resolution {
                if col > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{:.8e}", self.at(row, col)));
            }
            out.push('\n');
        }
        out
    }

    /// Binary PGM (P5) rendering, brightest at the hottest cell and black at
    /// the coldest, with the top image row at the `y = max` edge.
    pub fn to_pgm(&self) -> Vec<u8> {
        let lo = self.cells.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.max_temperature();
        let span = hi - lo;
        let mut out = format!("P5\n{} {}\n255\n", self.resolution, self.resolution).into_bytes();
        for row in (0..self.resolution).rev() {
            for col in 0..self.resolution {
                let level = if span > 0.0 {
                    ((self.at(row, col) - lo) / span * 255.0).round() as u8
                } else {
                    0
                };
                out.push(level);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThermalError {
    /// The conjugate-gradient iteration failed to reach the required
    /// residual, e.g. because a zero sink conductance makes the system
    /// singular.
    NonConvergence { iterations: usize, relative_residual: f64 },
}

impl std::fmt::Display for ThermalError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            ThermalError::NonConvergence { iterations, relative_residual } => write!(
                f,
                "steady-state solve did not converge: relative residual {relative_residual:.3e} after {iterations} iterations"
            ),
        }
    }
}

impl std::error::Error for ThermalError {}

/// Rasterize chiplet power onto the grid by exact overlap area: each cell
/// receives `power_density * overlap_area` from every chiplet covering it.
/// Row-major, row 0 at `y = 0`.
pub fn power_map(placement: &Placement, resolution: usize) -> Vec<f64> {
    assert!(resolution >= 1);
    let res = resolution;
    let delta = placement.interposer_size / res as f64;
    let mut grid = vec![0.0; res * res];
    for idx in 0..placement.len() {
        let chiplet = &placement.chiplets[idx];
        if chiplet.power == 0.0 {
            continue;
        }
        let r = placement.rect(idx);
        let density = chiplet.power / r.area();
        let col_range = cell_range(r.x_min, r.x_max, delta, res);
        let row_range = cell_range(r.y_min, r.y_max, delta, res);
        for row in row_range.clone() {
            let oy = overlap(r.y_min, r.y_max, row, delta);
            if oy <= 0.0 {
                continue;
            }
            for col in col_range.clone() {
                let ox = overlap(r.x_min, r.x_max, col, delta);
                if ox > 0.0 {
                    grid[row * res + col] += density * ox * oy;
                }
            }
        }
    }
    grid
}

fn cell_range(lo: f64, hi: f64, delta: f64, res: usize) -> std::ops::Range<usize> {
    let first = (lo / delta).floor().max(0.0) as usize;
    let last = ((hi / delta).ceil() as usize).min(res);
    first.min(res)..last
}

/// Length of the overlap of `[lo, hi]` with cell `i` of width `delta`.
fn overlap(lo: f64, hi: f64, i: usize, delta: f64) -> f64 {
    let cell_lo = i as f64 * delta;
    let cell_hi = (i + 1) as f64 * delta;
    (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0)
}

/// Internal CG target on the relative residual; iteration continues to this
/// level so downstream checks (conservation, symmetry) have slack.
const CG_TARGET: f64 = 1e-13;
/// Largest relative residual still accepted as converged.
const CG_ACCEPT: f64 = 1e-8;
const CG_MAX_ITERATIONS: usize = 20_000;

/// Solve the steady state for a power map (row-major, length
/// `grid_resolution^2`, W per cell).
pub fn solve_steady_state(power: &[f64], config: &ThermalConfig) -> Result<ThermalMap, ThermalError> {
    let res = config.grid_resolution;
    assert_eq!(power.len(), res * res, "power map must match the grid");
    assert!(config.interposer_conductance > 0.0);
    assert!(config.sink_conductance >= 0.0);

    let n = res * res;
    let b_norm = norm(power);
    let mut u = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(ThermalMap::new(res, config.ambient, u));
    }

    let g = config.interposer_conductance;
    let g_sink = config.sink_conductance;
    let apply = |v: &[f64], out: &mut [f64]| {
        for row in 0..res {
            for col in 0..res {
                let i = row * res + col;
                let mut degree = 0.0;
                // Horizontal and vertical neighbor pairs are accumulated as
                // sums so mirror-symmetric inputs stay symmetric bit for bit.
                let mut lateral = 0.0;
                let mut pair = 0.0;
                if col > 0 {
                    degree += 1.0;
                    pair += v[i - 1];
                }
                if col + 1 < res {
                    degree += 1.0;
                    pair += v[i + 1];
                }
                lateral += pair;
                let mut pair = 0.0;
                if row > 0 {
                    degree += 1.0;
                    pair += v[i - res];
                }
                if row + 1 < res {
                    degree += 1.0;
                    pair += v[i + res];
                }
                lateral += pair;
                out[i] = (g_sink + degree * g) * v[i] - g * lateral;
            }
        }
    };

    let mut r: Vec<f64> = power.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs_old = dot(&r, &r);
    let mut iterations = 0;
    while iterations < CG_MAX_ITERATIONS {
        iterations += 1;
        apply(&p, &mut ap);
        let p_ap = dot(&p, &ap);
        if p_ap <= 0.0 || !p_ap.is_finite() {
            // Singular or indefinite system (e.g. sink conductance 0 with net
            // injected power): CG cannot proceed.
            return Err(ThermalError::NonConvergence {
                iterations,
                relative_residual: rs_old.sqrt() / b_norm,
            });
        }
        let alpha = rs_old / p_ap;
        for i in 0..n {
            u[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        if rs_new.sqrt() <= CG_TARGET * b_norm {
            break;
        }
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }

    let relative_residual = dot(&r, &r).sqrt() / b_norm;
    if relative_residual > CG_ACCEPT {
        return Err(ThermalError::NonConvergence { iterations, relative_residual });
    }
    Ok(ThermalMap::new(res, config.ambient, u))
}

/// Peak steady-state temperature of a placement, °C.
pub fn max_temperature(placement: &Placement, config: &ThermalConfig) -> Result<f64, ThermalError> {
    let power = power_map(placement, config.grid_resolution);
    Ok(solve_steady_state(&power, config)?.max_temperature())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
