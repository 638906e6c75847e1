//! Deterministic synthetic phantoms: a Gaussian-noise background, one target
//! ellipsoid with a known tight bounding box, and a configurable number of
//! distractor ellipsoids in a different intensity band.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::seeds;
use crate::volume::{Annotation, IntensityUnits, Volume};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhantomConfig {
    pub dims: [u64; 3],
    pub spacing_mm: [f64; 3],
    /// Inclusive intensity range the target ellipsoid is drawn from.
    pub organ_intensity: (i16, i16),
    /// Standard deviation of the additive Gaussian background noise.
    pub noise_sigma: f64,
    /// Per-axis semi-axis range of every ellipsoid, in voxels.
    pub semi_axis_range: (f64, f64),
    pub distractor_count: usize,
    /// Inclusive intensity range of distractors; a band distinct from the
    /// target's so components are separable.
    pub distractor_intensity: (i16, i16),
    /// Fraction of each dim, centred, within which the target centre is
    /// drawn. 1.0 allows any placement that fits with margin.
    pub centre_span_frac: f64,
    pub seed: u64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        PhantomConfig {
            dims: [64, 64, 64],
            spacing_mm: [1.0, 1.0, 1.0],
            organ_intensity: (150, 350),
            noise_sigma: 15.0,
            semi_axis_range: (9.0, 13.0),
            distractor_count: 2,
            distractor_intensity: (-350, -150),
            centre_span_frac: 0.25,
            seed: 0,
        }
    }
}

impl PhantomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d < 8) {
            return Err(Error::DimsTooSmall(self.dims));
        }
        if !(self.semi_axis_range.0 >= 1.0 && self.semi_axis_range.1 >= self.semi_axis_range.0) {
            return Err(Error::config("semi-axis range must satisfy 1 <= lo <= hi"));
        }
        if !(self.centre_span_frac > 0.0 && self.centre_span_frac <= 1.0) {
            return Err(Error::config("centre_span_frac must be in (0, 1]"));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::config("noise sigma must be >= 0"));
        }
        if self.organ_intensity.1 < self.organ_intensity.0
            || self.distractor_intensity.1 < self.distractor_intensity.0
        {
            return Err(Error::config("intensity ranges must have lo <= hi"));
        }
        let r = self.semi_axis_range.1.ceil() as i64;
        for a in 0..3 {
            let (lo, hi) = self.centre_band(a);
            if lo > hi || lo - r < 2 || hi + r > self.dims[a] as i64 - 3 {
                return Err(Error::config(format!(
                    "organ cannot fit inside dims {:?} with margin 2 on axis {a}",
                    self.dims
                )));
            }
        }
        Ok(())
    }

    /// Inclusive band the target centre is sampled from on `axis`.
    fn centre_band(&self, axis: usize) -> (i64, i64) {
        let d = self.dims[axis] as f64;
        let half = self.centre_span_frac / 2.0;
        let lo = (d * (0.5 - half)).ceil() as i64;
        let hi = (d * (0.5 + half)).floor() as i64;
        (lo, hi.max(lo))
    }
}

struct Ellipsoid {
    centre: [i64; 3],
    semi: [f64; 3],
    value: i16,
}

impl Ellipsoid {
    fn contains(&self, p: [i64; 3]) -> bool {
        (0..3)
            .map(|a| {
                let d = (p[a] - self.centre[a]) as f64 / self.semi[a];
                d * d
            })
            .sum::<f64>()
            <= 1.0
    }

    /// Conservative outer bound used for disjointness checks.
    fn outer(&self, axis: usize) -> (i64, i64) {
        let r = self.semi[axis].ceil() as i64 + 1;
        (self.centre[axis] - r, self.centre[axis] + r)
    }

    fn disjoint_from(&self, other: &Ellipsoid) -> bool {
        (0..3).any(|a| {
            let (lo1, hi1) = self.outer(a);
            let (lo2, hi2) = other.outer(a);
            hi1 < lo2 || hi2 < lo1
        })
    }
}

/// Generate one phantom volume and its ground-truth annotation. Fully
/// deterministic in `config.seed`.
pub fn generate_phantom(config: &PhantomConfig, scan_id: &str) -> Result<(Volume, Annotation)> {
    config.validate()?;
    let mut rng = seeds::rng(config.seed, "phantom", &[]);
    let (slo, shi) = config.semi_axis_range;

    let mut sample_semi = |rng: &mut rand_chacha::ChaCha8Rng| -> [f64; 3] {
        [
            rng.gen_range(slo..=shi),
            rng.gen_range(slo..=shi),
            rng.gen_range(slo..=shi),
        ]
    };

    let centre = [
        rng.gen_range(config.centre_band(0).0..=config.centre_band(0).1),
        rng.gen_range(config.centre_band(1).0..=config.centre_band(1).1),
        rng.gen_range(config.centre_band(2).0..=config.centre_band(2).1),
    ];
    let target = Ellipsoid {
        centre,
        semi: sample_semi(&mut rng),
        value: rng.gen_range(config.organ_intensity.0..=config.organ_intensity.1),
    };

    let mut placed = vec![target];
    for _ in 0..config.distractor_count {
        let mut ok = false;
        for _attempt in 0..1000 {
            let semi = sample_semi(&mut rng);
            let mut centre = [0i64; 3];
            let mut fits = true;
            for a in 0..3 {
                let r = semi[a].ceil() as i64;
                let lo = r + 2;
                let hi = config.dims[a] as i64 - 3 - r;
                if lo > hi {
                    fits = false;
                    break;
                }
                centre[a] = rng.gen_range(lo..=hi);
            }
            if !fits {
                continue;
            }
            let cand = Ellipsoid {
                centre,
                semi,
                value: rng
                    .gen_range(config.distractor_intensity.0..=config.distractor_intensity.1),
            };
            if placed.iter().all(|e| e.disjoint_from(&cand)) {
                placed.push(cand);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::config(
                "could not place disjoint distractor ellipsoids; reduce count or sizes",
            ));
        }
    }

    let dims = config.dims;
    let n = (dims[0] * dims[1] * dims[2]) as usize;
    let mut voxels = vec![0i16; n];

    // Paint ellipsoids and record the tight bound of the target from the
    // actual voxel membership, so the annotation is minimal by construction.
    let mut gt_lo = [i64::MAX; 3];
    let mut gt_hi = [i64::MIN; 3];
    for (k, e) in placed.iter().enumerate() {
        let lo: Vec<i64> = (0..3).map(|a| (e.centre[a] - e.semi[a].ceil() as i64).max(0)).collect();
        let hi: Vec<i64> = (0..3)
            .map(|a| (e.centre[a] + e.semi[a].ceil() as i64).min(dims[a] as i64 - 1))
            .collect();
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    if e.contains([x, y, z]) {
                        let idx = (x as u64 + dims[0] * (y as u64 + dims[1] * z as u64)) as usize;
                        voxels[idx] = e.value;
                        if k == 0 {
                            for (a, &p) in [x, y, z].iter().enumerate() {
                                gt_lo[a] = gt_lo[a].min(p);
                                gt_hi[a] = gt_hi[a].max(p);
                            }
                        }
                    }
                }
            }
        }
    }

    if config.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, config.noise_sigma).expect("sigma validated");
        for v in voxels.iter_mut() {
            let n = normal.sample(&mut rng).round();
            *v = (f64::from(*v) + n).clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16;
        }
    }

    let gt_box = BoundingBox::new(
        gt_lo,
        [
            (gt_hi[0] - gt_lo[0] + 1) as u64,
            (gt_hi[1] - gt_lo[1] + 1) as u64,
            (gt_hi[2] - gt_lo[2] + 1) as u64,
        ],
    );
    let volume = Volume::new(dims, config.spacing_mm, IntensityUnits::Hu, voxels)?;
    let annotation = Annotation {
        scan_id: scan_id.to_string(),
        gt_box,
        organ_label: "target".to_string(),
    };
    Ok((volume, annotation))
}
