//! Discrete navigation environment: the 19-action set, box movement with
//! clipping at volume bounds, observation extraction and loop detection.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::patch::extract_patch;
use crate::volume::Volume;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Movement granularity. Steps of 9/3/1 voxels: the geometric 3x spacing lets
/// very-fine moves reach any voxel exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveLevel {
    Coarse,
    Fine,
    VeryFine,
}

impl MoveLevel {
    pub fn step(self) -> i64 {
        match self {
            MoveLevel::Coarse => 9,
            MoveLevel::Fine => 3,
            MoveLevel::VeryFine => 1,
        }
    }

    fn index(self) -> usize {
        match self {
            MoveLevel::Coarse => 0,
            MoveLevel::Fine => 1,
            MoveLevel::VeryFine => 2,
        }
    }
}

/// One of the 19 discrete actions: a move along an axis at one of three
/// levels in either direction, or termination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Move { axis: Axis, positive: bool, level: MoveLevel },
    Terminate,
}

impl Action {
    pub const COUNT: usize = 19;
    pub const TERMINATE_INDEX: usize = 18;

    /// Index encoding: axis*6 + sign*3 + level (sign: + = 0, - = 1);
    /// Terminate = 18.
    pub fn index(self) -> usize {
        match self {
            Action::Move { axis, positive, level } => {
                axis.index() * 6 + usize::from(!positive) * 3 + level.index()
            }
            Action::Terminate => Self::TERMINATE_INDEX,
        }
    }

    pub fn from_index(i: usize) -> Option<Action> {
        match i {
            0..=17 => {
                let axis = Axis::ALL[i / 6];
                let positive = (i % 6) / 3 == 0;
                let level = match i % 3 {
                    0 => MoveLevel::Coarse,
                    1 => MoveLevel::Fine,
                    _ => MoveLevel::VeryFine,
                };
                Some(Action::Move { axis, positive, level })
            }
            18 => Some(Action::Terminate),
            _ => None,
        }
    }

    /// Signed per-axis displacement of the action, before clipping.
    pub fn displacement(self) -> [i64; 3] {
        let mut d = [0i64; 3];
        if let Action::Move { axis, positive, level } = self {
            d[axis.index()] = if positive { level.step() } else { -level.step() };
        }
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    TerminateAction,
    StepCap,
    Loop,
}

/// Mutable episode bookkeeping: current box, step count and the sequence of
/// visited centre voxels.
#[derive(Clone, Debug)]
pub struct EpisodeState {
    pub current_box: BoundingBox,
    pub step: u32,
    pub visited_centres: Vec<[i64; 3]>,
    pub terminated: bool,
    pub terminal_reason: Option<StopReason>,
}

impl EpisodeState {
    /// Start an episode with `box_` clamped inside the volume.
    pub fn start(box_: BoundingBox, volume_dims: [u64; 3]) -> Self {
        let b = box_.clamp_into(volume_dims);
        EpisodeState {
            current_box: b,
            step: 0,
            visited_centres: vec![b.centre_voxel()],
            terminated: false,
            terminal_reason: None,
        }
    }

    pub fn centre(&self) -> [i64; 3] {
        self.current_box.centre_voxel()
    }

    /// Mark the episode finished for a reason decided by the driver
    /// (step cap or loop).
    pub fn finish(&mut self, reason: StopReason) {
        self.terminated = true;
        self.terminal_reason = Some(reason);
    }
}

/// Apply one action: moves shift the box centre by the level's step along
/// the axis, clipped so the box stays inside the volume; Terminate ends the
/// episode in place.
pub fn apply_action(
    state: &mut EpisodeState,
    action: Action,
    volume_dims: [u64; 3],
) -> Result<()> {
    if state.terminated {
        return Err(Error::EpisodeTerminated);
    }
    state.step += 1;
    match action {
        Action::Terminate => {
            state.terminated = true;
            state.terminal_reason = Some(StopReason::TerminateAction);
        }
        Action::Move { axis, positive, level } => {
            let a = axis.index();
            let delta = if positive { level.step() } else { -level.step() };
            let max_lower = volume_dims[a] as i64 - state.current_box.size[a] as i64;
            let new_lower = (state.current_box.lower[a] + delta).clamp(0, max_lower.max(0));
            state.current_box.lower[a] = new_lower;
            state.visited_centres.push(state.centre());
        }
    }
    Ok(())
}

/// Observation: the current box shrunk by half around its centre (each size
/// `max(1, w/2)`), resampled to the network input shape.
pub fn observe(
    state: &EpisodeState,
    volume: &Volume,
    net_input_shape: [usize; 3],
) -> Result<Array3<f64>> {
    let shrunk = shrink_box(&state.current_box);
    extract_patch(volume, &shrunk, net_input_shape)
}

/// Box with the same centre and half the size of `b`.
pub fn shrink_box(b: &BoundingBox) -> BoundingBox {
    let mut size = [0u64; 3];
    let mut lower = [0i64; 3];
    for a in 0..3 {
        let w = (b.size[a] / 2).max(1);
        size[a] = w;
        lower[a] = b.lower[a] + ((b.size[a] - w) / 2) as i64;
    }
    BoundingBox::new(lower, size)
}

/// True iff the latest centre already appears earlier in the visit sequence.
pub fn detect_loop(state: &EpisodeState) -> bool {
    match state.visited_centres.split_last() {
        Some((last, earlier)) => earlier.contains(last),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::IntensityUnits;
    use rand::Rng;

    fn test_volume(dims: [u64; 3]) -> Volume {
        let n = (dims[0] * dims[1] * dims[2]) as usize;
        Volume::new(dims, [1.0; 3], IntensityUnits::Hu, vec![50i16; n]).unwrap()
    }

    #[test]
    fn action_index_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..Action::COUNT {
            let a = Action::from_index(i).unwrap();
            assert_eq!(a.index(), i);
            assert!(seen.insert(a));
        }
        assert_eq!(seen.len(), 19);
        assert!(Action::from_index(19).is_none());
        assert_eq!(Action::Terminate.index(), 18);
    }

    #[test]
    fn coarse_move_shifts_centre_nine_voxels() {
        let dims = [120u64; 3];
        let b = BoundingBox::from_centre_voxel([50, 50, 50], [20, 20, 20]);
        let mut st = EpisodeState::start(b, dims);
        apply_action(
            &mut st,
            Action::Move { axis: Axis::X, positive: true, level: MoveLevel::Coarse },
            dims,
        )
        .unwrap();
        assert_eq!(st.centre(), [59, 50, 50]);
        assert_eq!(st.step, 1);
        assert_eq!(st.visited_centres.len(), 2);
    }

    #[test]
    fn moves_clip_at_the_wall() {
        let dims = [32u64; 3];
        // Box of size 8: max lower is 24, so centre 28 hugs the +x wall at
        // lower 24. Start the centre 2 voxels shy of that.
        let b = BoundingBox::new([22, 10, 10], [8, 8, 8]);
        let mut st = EpisodeState::start(b, dims);
        let c0 = st.centre();
        apply_action(
            &mut st,
            Action::Move { axis: Axis::X, positive: true, level: MoveLevel::Fine },
            dims,
        )
        .unwrap();
        assert_eq!(st.current_box.lower[0], 24, "flush against the wall");
        assert_eq!(st.centre()[0] - c0[0], 2, "moved only the 2 available voxels");
    }

    #[test]
    fn terminate_keeps_box_and_sets_reason() {
        let dims = [32u64; 3];
        let b = BoundingBox::new([10, 10, 10], [8, 8, 8]);
        let mut st = EpisodeState::start(b, dims);
        apply_action(&mut st, Action::Terminate, dims).unwrap();
        assert!(st.terminated);
        assert_eq!(st.terminal_reason, Some(StopReason::TerminateAction));
        assert_eq!(st.current_box, b);
        let err = apply_action(&mut st, Action::Terminate, dims).unwrap_err();
        assert!(matches!(err, Error::EpisodeTerminated));
    }

    #[test]
    fn shrink_halves_sizes_with_floor_and_min_one() {
        let b = BoundingBox::from_centre_voxel([16, 16, 16], [32, 32, 32]);
        let s = shrink_box(&b);
        assert_eq!(s.size, [16, 16, 16]);
        assert_eq!(s.centre_voxel(), [16, 16, 16]);

        let tiny = BoundingBox::new([5, 5, 5], [3, 3, 3]);
        let st = shrink_box(&tiny);
        assert_eq!(st.size, [1, 1, 1]);
        assert_eq!(st.centre_voxel(), tiny.centre_voxel());
    }

    #[test]
    fn observe_constant_volume_is_constant() {
        let vol = test_volume([32, 32, 32]);
        let st = EpisodeState::start(BoundingBox::new([8, 8, 8], [16, 16, 16]), vol.dims());
        let p = observe(&st, &vol, [6, 6, 6]).unwrap();
        let first = p[[0, 0, 0]];
        assert!(p.iter().all(|&v| (v - first).abs() < 1e-12));
    }

    #[test]
    fn loop_detection_examples() {
        let dims = [32u64; 3];
        let mut st = EpisodeState::start(BoundingBox::new([5, 5, 5], [2, 2, 2]), dims);
        st.visited_centres = vec![[5, 5, 5], [6, 5, 5], [5, 5, 5]];
        assert!(detect_loop(&st));
        st.visited_centres = vec![[5, 5, 5], [6, 5, 5], [7, 5, 5]];
        assert!(!detect_loop(&st));
    }

    #[test]
    fn oscillation_is_detected_at_step_three() {
        let dims = [64u64; 3];
        let b = BoundingBox::from_centre_voxel([30, 30, 30], [8, 8, 8]);
        let mut st = EpisodeState::start(b, dims);
        let right = Action::Move { axis: Axis::X, positive: true, level: MoveLevel::VeryFine };
        let left = Action::Move { axis: Axis::X, positive: false, level: MoveLevel::VeryFine };
        apply_action(&mut st, right, dims).unwrap();
        assert!(!detect_loop(&st));
        apply_action(&mut st, left, dims).unwrap();
        assert!(detect_loop(&st), "A -> B -> A revisits A");
        assert_eq!(st.step, 2);
    }

    #[test]
    fn fuzzed_actions_never_leave_the_volume() {
        let dims = [40u64, 33, 57];
        let mut rng = crate::seeds::rng(5, "env-fuzz", &[]);
        let b = BoundingBox::new([3, 3, 3], [11, 7, 15]);
        let mut st = EpisodeState::start(b, dims);
        for _ in 0..10_000 {
            let idx = rng.gen_range(0..18); // moves only, keep the episode alive
            let a = Action::from_index(idx).unwrap();
            let before = st.centre();
            apply_action(&mut st, a, dims).unwrap();
            assert!(st.current_box.fits(dims), "box escaped: {:?}", st.current_box);
            // A move changes at most one axis, by at most the step size.
            let after = st.centre();
            let mut changed = 0;
            for ax in 0..3 {
                let d = (after[ax] - before[ax]).abs();
                if d > 0 {
                    changed += 1;
                    assert!(d <= a.displacement()[ax].abs());
                }
            }
            assert!(changed <= 1);
        }
    }
}
