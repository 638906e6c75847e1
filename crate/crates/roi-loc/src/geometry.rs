//! Axis-aligned integer-voxel boxes and the evaluation metrics computed on
//! them: intersection-over-union, Dice coefficient, centroid distance and
//! mean wall distance.
//!
//! Boxes are half-open voxel sets `[lower, lower + size)`, so the volume of a
//! box is exactly the product of its sizes.

use serde::{Deserialize, Serialize};

/// Axis-aligned box on the integer voxel grid: inclusive lower corner plus
/// per-axis size. `lower` may be negative for boxes not yet clipped to a
/// volume.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: [i64; 3],
    pub size: [u64; 3],
}

impl BoundingBox {
    pub fn new(lower: [i64; 3], size: [u64; 3]) -> Self {
        assert!(size.iter().all(|&s| s >= 1), "box size components must be >= 1");
        BoundingBox { lower, size }
    }

    /// Exclusive upper corner (`lower + size`).
    pub fn upper(&self) -> [i64; 3] {
        [
            self.lower[0] + self.size[0] as i64,
            self.lower[1] + self.size[1] as i64,
            self.lower[2] + self.size[2] as i64,
        ]
    }

    /// Voxel count.
    pub fn volume(&self) -> u128 {
        self.size.iter().map(|&s| s as u128).product()
    }

    /// Continuous centre, `lower + size / 2`.
    pub fn centre(&self) -> [f64; 3] {
        [
            self.lower[0] as f64 + self.size[0] as f64 / 2.0,
            self.lower[1] as f64 + self.size[1] as f64 / 2.0,
            self.lower[2] as f64 + self.size[2] as f64 / 2.0,
        ]
    }

    /// Centre voxel on the integer lattice, `lower + floor(size / 2)`.
    /// Navigation compares positions on this lattice so that exact centre
    /// matches are well-defined for any size parity.
    pub fn centre_voxel(&self) -> [i64; 3] {
        [
            self.lower[0] + (self.size[0] / 2) as i64,
            self.lower[1] + (self.size[1] / 2) as i64,
            self.lower[2] + (self.size[2] / 2) as i64,
        ]
    }

    /// Box of the given size whose centre voxel is `centre`.
    pub fn from_centre_voxel(centre: [i64; 3], size: [u64; 3]) -> Self {
        let lower = [
            centre[0] - (size[0] / 2) as i64,
            centre[1] - (size[1] / 2) as i64,
            centre[2] - (size[2] / 2) as i64,
        ];
        BoundingBox::new(lower, size)
    }

    /// True when the box lies fully inside a volume of the given dims.
    pub fn fits(&self, dims: [u64; 3]) -> bool {
        (0..3).all(|a| self.lower[a] >= 0 && self.upper()[a] <= dims[a] as i64)
    }

    /// Translate the box so it lies inside the volume, shrinking any axis
    /// that is larger than the volume itself.
    pub fn clamp_into(&self, dims: [u64; 3]) -> BoundingBox {
        let mut lower = self.lower;
        let mut size = self.size;
        for a in 0..3 {
            if size[a] > dims[a] {
                size[a] = dims[a];
            }
            let max_lower = dims[a] as i64 - size[a] as i64;
            lower[a] = lower[a].clamp(0, max_lower);
        }
        BoundingBox { lower, size }
    }

    /// Intersect with the volume extent, keeping only the in-bounds part.
    /// Returns `None` when the overlap is empty.
    pub fn clip_to(&self, dims: [u64; 3]) -> Option<BoundingBox> {
        let mut lower = [0i64; 3];
        let mut size = [0u64; 3];
        for a in 0..3 {
            let lo = self.lower[a].max(0);
            let hi = self.upper()[a].min(dims[a] as i64);
            if hi <= lo {
                return None;
            }
            lower[a] = lo;
            size[a] = (hi - lo) as u64;
        }
        Some(BoundingBox { lower, size })
    }

    fn overlap(&self, other: &BoundingBox) -> u128 {
        let mut inter: u128 = 1;
        for a in 0..3 {
            let lo = self.lower[a].max(other.lower[a]);
            let hi = self.upper()[a].min(other.upper()[a]);
            if hi <= lo {
                return 0;
            }
            inter *= (hi - lo) as u128;
        }
        inter
    }
}

/// Intersection over union of two boxes on the voxel grid; 0 when disjoint.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.overlap(b);
    let union = a.volume() + b.volume() - inter;
    inter as f64 / union as f64
}

/// Dice coefficient, `2|a∩b| / (|a| + |b|)`.
pub fn dice(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.overlap(b);
    2.0 * inter as f64 / (a.volume() + b.volume()) as f64
}

/// Euclidean distance between the continuous box centres, scaled per axis by
/// the voxel spacing in mm.
pub fn centroid_distance(a: &BoundingBox, b: &BoundingBox, spacing_mm: [f64; 3]) -> f64 {
    let ca = a.centre();
    let cb = b.centre();
    (0..3)
        .map(|i| ((ca[i] - cb[i]) * spacing_mm[i]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Mean absolute gap over the six corresponding axis-aligned faces, in mm.
pub fn wall_distance(a: &BoundingBox, b: &BoundingBox, spacing_mm: [f64; 3]) -> f64 {
    let (ua, ub) = (a.upper(), b.upper());
    let mut total = 0.0;
    for axis in 0..3 {
        total += (a.lower[axis] - b.lower[axis]).abs() as f64 * spacing_mm[axis];
        total += (ua[axis] - ub[axis]).abs() as f64 * spacing_mm[axis];
    }
    total / 6.0
}

/// Detection bar: a prediction counts as detected at Dice >= 50%.
pub const DETECTION_DICE: f64 = 0.5;

/// All four metrics for one predicted box against ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub iou: f64,
    pub dice: f64,
    pub centroid_mm: f64,
    pub wall_mm: f64,
    pub detected: bool,
}

impl MetricReport {
    pub fn compare(pred: &BoundingBox, gt: &BoundingBox, spacing_mm: [f64; 3]) -> Self {
        let d = dice(pred, gt);
        MetricReport {
            iou: iou(pred, gt),
            dice: d,
            centroid_mm: centroid_distance(pred, gt, spacing_mm),
            wall_mm: wall_distance(pred, gt, spacing_mm),
            detected: d >= DETECTION_DICE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(lower: [i64; 3], size: [u64; 3]) -> BoundingBox {
        BoundingBox::new(lower, size)
    }

    /// Brute-force voxel-set counting, the independent route for iou/dice.
    fn voxel_counts(a: &BoundingBox, b: &BoundingBox) -> (u64, u64, u64) {
        let contains = |bx: &BoundingBox, p: [i64; 3]| {
            (0..3).all(|i| p[i] >= bx.lower[i] && p[i] < bx.upper()[i])
        };
        let lo = [
            a.lower[0].min(b.lower[0]),
            a.lower[1].min(b.lower[1]),
            a.lower[2].min(b.lower[2]),
        ];
        let hi = [
            a.upper()[0].max(b.upper()[0]),
            a.upper()[1].max(b.upper()[1]),
            a.upper()[2].max(b.upper()[2]),
        ];
        let (mut na, mut nb, mut ni) = (0u64, 0u64, 0u64);
        for x in lo[0]..hi[0] {
            for y in lo[1]..hi[1] {
                for z in lo[2]..hi[2] {
                    let p = [x, y, z];
                    let ia = contains(a, p);
                    let ib = contains(b, p);
                    na += u64::from(ia);
                    nb += u64::from(ib);
                    ni += u64::from(ia && ib);
                }
            }
        }
        (na, nb, ni)
    }

    #[test]
    fn iou_identical_and_disjoint() {
        let a = bb([0, 0, 0], [4, 4, 4]);
        assert_eq!(iou(&a, &a), 1.0);
        let b = bb([10, 10, 10], [4, 4, 4]);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_half_overlap_matches_counting() {
        // Computed by the voxel-counting oracle: inter 2*4*4=32, union 96.
        let a = bb([0, 0, 0], [4, 4, 4]);
        let b = bb([2, 0, 0], [4, 4, 4]);
        let (na, nb, ni) = voxel_counts(&a, &b);
        assert_eq!((na, nb, ni), (64, 64, 32));
        assert_eq!(iou(&a, &b), 32.0 / 96.0);
        assert_eq!(dice(&a, &b), 64.0 / 128.0);
    }

    #[test]
    fn dice_of_identical_boxes() {
        let a = bb([3, -1, 7], [5, 2, 9]);
        assert_eq!(dice(&a, &a), 1.0);
    }

    #[test]
    fn iou_one_third_is_dice_one_half() {
        // The detection bar stated as IOU above 1/3 equals Dice 50%.
        let a = bb([0, 0, 0], [4, 4, 4]);
        let b = bb([2, 0, 0], [4, 4, 4]);
        let i = iou(&a, &b);
        let d = dice(&a, &b);
        assert!((i - 1.0 / 3.0).abs() < 1e-12);
        assert!((d - 0.5).abs() < 1e-12);
        assert!((d - 2.0 * i / (1.0 + i)).abs() < 1e-12);
    }

    #[test]
    fn centroid_distance_examples() {
        let a = bb([0, 0, 0], [4, 4, 4]);
        assert_eq!(centroid_distance(&a, &a, [1.0, 1.0, 1.0]), 0.0);
        let b = bb([3, 4, 0], [4, 4, 4]);
        assert!((centroid_distance(&a, &b, [1.0, 1.0, 1.0]) - 5.0).abs() < 1e-12);
        // spacing (2,1,1): sqrt((3*2)^2 + 4^2) = sqrt(52)
        assert!((centroid_distance(&a, &b, [2.0, 1.0, 1.0]) - 52.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wall_distance_examples() {
        let a = bb([0, 0, 0], [4, 4, 4]);
        assert_eq!(wall_distance(&a, &a, [1.0, 1.0, 1.0]), 0.0);
        // Every face shifted by 1mm.
        let b = bb([1, 1, 1], [4, 4, 4]);
        assert!((wall_distance(&a, &b, [1.0, 1.0, 1.0]) - 1.0).abs() < 1e-12);
        // Only the +x face differs, by 6mm: mean = 6/6 = 1.
        let c = bb([0, 0, 0], [10, 4, 4]);
        assert!((wall_distance(&a, &c, [1.0, 1.0, 1.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detected_flag_tracks_dice_threshold() {
        let a = bb([0, 0, 0], [4, 4, 4]);
        let b = bb([2, 0, 0], [4, 4, 4]);
        let r = MetricReport::compare(&a, &b, [1.0; 3]);
        assert!(r.detected, "dice exactly 0.5 is detected (boundary inclusive)");
        let far = bb([20, 0, 0], [4, 4, 4]);
        assert!(!MetricReport::compare(&a, &far, [1.0; 3]).detected);
    }

    #[test]
    fn metrics_match_counting_on_random_pairs() {
        use rand::Rng;
        let mut rng = crate::seeds::rng(11, "geometry-test", &[]);
        for _ in 0..300 {
            let rb = |rng: &mut rand_chacha::ChaCha8Rng| {
                bb(
                    [rng.gen_range(-5..10), rng.gen_range(-5..10), rng.gen_range(-5..10)],
                    [rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..8)],
                )
            };
            let a = rb(&mut rng);
            let b = rb(&mut rng);
            let (na, nb, ni) = voxel_counts(&a, &b);
            let nu = na + nb - ni;
            assert_eq!(iou(&a, &b), ni as f64 / nu as f64);
            assert_eq!(dice(&a, &b), 2.0 * ni as f64 / (na + nb) as f64);
            assert_eq!(iou(&a, &b), iou(&b, &a));
            let i = iou(&a, &b);
            assert!((dice(&a, &b) - 2.0 * i / (1.0 + i)).abs() < 1e-12);
            // Translation invariance.
            let shift = [rng.gen_range(-9..9), rng.gen_range(-9..9), rng.gen_range(-9..9)];
            let t = |x: &BoundingBox| {
                bb(
                    [x.lower[0] + shift[0], x.lower[1] + shift[1], x.lower[2] + shift[2]],
                    x.size,
                )
            };
            let (ta, tb) = (t(&a), t(&b));
            assert_eq!(iou(&a, &b), iou(&ta, &tb));
            assert_eq!(dice(&a, &b), dice(&ta, &tb));
            assert_eq!(
                centroid_distance(&a, &b, [1.5, 1.0, 3.0]),
                centroid_distance(&ta, &tb, [1.5, 1.0, 3.0])
            );
            assert_eq!(
                wall_distance(&a, &b, [1.5, 1.0, 3.0]),
                wall_distance(&ta, &tb, [1.5, 1.0, 3.0])
            );
        }
    }

    #[test]
    fn clip_and_clamp() {
        let dims = [16, 16, 16];
        let a = bb([-3, 4, 14], [8, 8, 8]);
        let c = a.clip_to(dims).unwrap();
        assert_eq!(c.lower, [0, 4, 14]);
        assert_eq!(c.size, [5, 8, 2]);
        let inside = a.clamp_into(dims);
        assert!(inside.fits(dims));
        assert_eq!(inside.size, [8, 8, 8]);
        assert!(bb([20, 0, 0], [2, 2, 2]).clip_to(dims).is_none());
    }

    #[test]
    fn centre_voxel_roundtrip() {
        let b = BoundingBox::from_centre_voxel([10, 11, 12], [5, 6, 7]);
        assert_eq!(b.centre_voxel(), [10, 11, 12]);
        let b2 = BoundingBox::from_centre_voxel([10, 11, 12], [4, 9, 2]);
        assert_eq!(b2.centre_voxel(), [10, 11, 12]);
    }
}
