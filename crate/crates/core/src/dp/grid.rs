use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ComfortBand;

/// Shape of the value-function grid before it is tied to a wall size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_nodes: usize,
    /// Grid only half the wall when the initial profile is mirror symmetric.
    pub exploit_symmetry: bool,
}

impl GridSpec {
    pub const DEFAULT_NODES: usize = 21;
    pub const DEFAULT_MARGIN: f64 = 2.0;

    pub fn around_band(band: &ComfortBand, margin: f64, n_nodes: usize) -> Self {
        Self {
            lo: band.t_min - margin,
            hi: band.t_max + margin,
            n_nodes,
            exploit_symmetry: true,
        }
    }

    pub fn validate(&self, band: &ComfortBand) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 2 nodes per dimension, got {}",
                self.n_nodes
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidConfig(format!(
                "grid range [{}, {}] is empty",
                self.lo, self.hi
            )));
        }
        if self.lo > band.t_min || self.hi < band.t_max {
            return Err(Error::InvalidConfig(format!(
                "grid [{}, {}] does not contain the comfort band [{}, {}]",
                self.lo, self.hi, band.t_min, band.t_max
            )));
        }
        Ok(())
    }
}

/// Cartesian grid over the free wall coordinates.
///
/// With mirroring the grid spans the first `ceil(m / 2)` nodes and the rest
/// of the wall is filled in by reflection about the midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    nodes: Vec<f64>,
    spacing: f64,
    dims: usize,
    wall_len: usize,
    mirrored: bool,
    len: usize,
}

const SNAP: f64 = 1e-12;

impl StateGrid {
    pub fn new(spec: &GridSpec, wall_len: usize, mirrored: bool) -> Self {
        let n = spec.n_nodes;
        let spacing = (spec.hi - spec.lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| spec.lo + i as f64 * spacing).collect();
        nodes[n - 1] = spec.hi;
        let dims = if mirrored {
            wall_len.div_ceil(2)
        } else {
            wall_len
        };
        Self {
            nodes,
            spacing,
            dims,
            wall_len,
            mirrored,
            len: n.pow(dims as u32),
        }
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn wall_len(&self) -> usize {
        self.wall_len
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Full wall state at grid point `index`. The first free coordinate
    /// varies fastest.
    pub fn wall_at(&self, index: usize, out: &mut [f64]) {
        let n = self.nodes.len();
        let mut rest = index;
        for slot in out.iter_mut().take(self.dims) {
            *slot = self.nodes[rest % n];
            rest /= n;
        }
        if self.mirrored {
            for i in self.dims..self.wall_len {
                out[i] = out[self.wall_len - 1 - i];
            }
        }
    }

    /// Multilinear interpolation of `values` at a full wall state.
    ///
    /// Returns the value and whether the point had to be clamped into the
    /// grid box. Any infinite corner with nonzero weight makes the result
    /// infinite.
    pub fn interpolate(&self, values: &[f64], wall: &[f64]) -> (f64, bool) {
        debug_assert_eq!(values.len(), self.len);
        let n = self.nodes.len();
        let last = (n - 1) as f64;
        let mut clamped = false;
        // at most 16 free coordinates are ever practical
        let mut cell = [0usize; 16];
        let mut frac = [0f64; 16];
        for d in 0..self.dims {
            let mut t = (wall[d] - self.nodes[0]) / self.spacing;
            if t < -SNAP || t > last + SNAP {
                clamped = true;
            }
            t = t.clamp(0.0, last);
            let mut i = (t.floor() as usize).min(n - 2);
            let mut w = t - i as f64;
            if w < SNAP {
                w = 0.0;
            } else if w > 1.0 - SNAP {
                w = 0.0;
                i += 1;
                if i == n - 1 {
                    i = n - 2;
                    w = 1.0;
                }
            }
            cell[d] = i;
            frac[d] = w;
        }

        let mut acc = 0.0;
        for corner in 0..(1usize << self.dims) {
            let mut weight = 1.0;
            let mut index = 0;
            let mut stride = 1;
            for d in 0..self.dims {
                let upper = corner >> d & 1 == 1;
                weight *= if upper { frac[d] } else { 1.0 - frac[d] };
                index += (cell[d] + upper as usize) * stride;
                stride *= n;
            }
            if weight == 0.0 {
                continue;
            }
            let v = values[index];
            if v.is_infinite() {
                return (f64::INFINITY, clamped);
            }
            acc += weight * v;
        }
        (acc, clamped)
    }
}
