//! Patch extraction: trilinear resampling of a box region to a fixed grid,
//! with intensity windowing and min-max scaling to [0, 1].

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::volume::{IntensityUnits, Volume};

/// Soft-tissue window applied to HU volumes before scaling.
pub const HU_WINDOW: (f64, f64) = (-200.0, 400.0);

/// Resample the part of `box_` inside `volume` to `out_shape` with trilinear
/// interpolation, then window and scale intensities to [0, 1].
///
/// The box is clipped to the volume first; a box that leaves no voxels after
/// clipping is an error. Output index order is `[x, y, z]`.
pub fn extract_patch(
    volume: &Volume,
    box_: &BoundingBox,
    out_shape: [usize; 3],
) -> Result<Array3<f64>> {
    if out_shape.iter().any(|&p| p < 2) {
        return Err(Error::config(format!(
            "patch shape {out_shape:?} has a component below 2"
        )));
    }
    let clipped = box_.clip_to(volume.dims()).ok_or(Error::DegenerateBox)?;

    let dims = volume.dims();
    let mut raw = Array3::<f64>::zeros(out_shape);
    for ox in 0..out_shape[0] {
        let sx = sample_coord(clipped.lower[0], clipped.size[0], ox, out_shape[0]);
        for oy in 0..out_shape[1] {
            let sy = sample_coord(clipped.lower[1], clipped.size[1], oy, out_shape[1]);
            for oz in 0..out_shape[2] {
                let sz = sample_coord(clipped.lower[2], clipped.size[2], oz, out_shape[2]);
                raw[[ox, oy, oz]] = trilinear(volume, dims, sx, sy, sz);
            }
        }
    }

    let (lo, hi) = match volume.units() {
        IntensityUnits::Hu => HU_WINDOW,
        IntensityUnits::Arbitrary => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in raw.iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        }
    };
    let range = hi - lo;
    if range <= f64::EPSILON {
        // Constant patch: map to mid-scale.
        raw.fill(0.5);
    } else {
        raw.mapv_inplace(|v| (v.clamp(lo, hi) - lo) / range);
    }
    Ok(raw)
}

/// Continuous source coordinate (voxel-centre convention) of output sample
/// `i` of `n` along an axis spanning `[lower, lower+size)`.
#[inline]
fn sample_coord(lower: i64, size: u64, i: usize, n: usize) -> f64 {
    lower as f64 + (i as f64 + 0.5) / n as f64 * size as f64 - 0.5
}

/// Trilinear interpolation at a continuous voxel-centre coordinate, with
/// edge clamping.
fn trilinear(volume: &Volume, dims: [u64; 3], x: f64, y: f64, z: f64) -> f64 {
    let clamp_axis = |v: f64, d: u64| -> (u64, u64, f64) {
        let max = (d - 1) as f64;
        let c = v.clamp(0.0, max);
        let i0 = c.floor().min(max - 1.0).max(0.0) as u64;
        let i1 = (i0 + 1).min(d - 1);
        (i0, i1, c - i0 as f64)
    };
    let (x0, x1, fx) = clamp_axis(x, dims[0]);
    let (y0, y1, fy) = clamp_axis(y, dims[1]);
    let (z0, z1, fz) = clamp_axis(z, dims[2]);

    let v = |xi: u64, yi: u64, zi: u64| f64::from(volume.get(xi, yi, zi));
    let c00 = v(x0, y0, z0) * (1.0 - fx) + v(x1, y0, z0) * fx;
    let c10 = v(x0, y1, z0) * (1.0 - fx) + v(x1, y1, z0) * fx;
    let c01 = v(x0, y0, z1) * (1.0 - fx) + v(x1, y0, z1) * fx;
    let c11 = v(x0, y1, z1) * (1.0 - fx) + v(x1, y1, z1) * fx;
    let c0 = c00 * (1.0 - fy) + c10 * fy;
    let c1 = c01 * (1.0 - fy) + c11 * fy;
    c0 * (1.0 - fz) + c1 * fz
}
