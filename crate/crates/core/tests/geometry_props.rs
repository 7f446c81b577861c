//! Property tests for placement geometry: every operator result must be
//! legal, slides must invert exactly, and the jump lattice must keep its
//! promises.
//!
//! Instances use dyadic coordinates (multiples of 0.25 mm) so reversal
//! checks can demand bitwise equality instead of tolerances.

use chiplace_core::{Chiplet, Direction, Placement};
use proptest::prelude::*;

const INTERPOSER: f64 = 45.0;
/// 5x5 grid of 9 mm slots; chiplets sit centered in distinct slots, so any
/// generated placement is legal with clearance on all sides.
const SLOT: f64 = 9.0;

fn dyadic(raw: u32) -> f64 {
    // 2.0 ..= 7.0 in steps of 0.25
    2.0 + f64::from(raw % 21) * 0.25
}

#[derive(Debug, Clone)]
struct Instance {
    placement: Placement,
}

fn instances(max_chiplets: usize) -> impl Strategy<Value = Instance> {
    let slots = proptest::sample::subsequence((0..25usize).collect::<Vec<_>>(), 1..=max_chiplets);
    (slots, proptest::collection::vec((0u32..21, 0u32..21), 25)).prop_map(|(slots, dims)| {
        let mut chiplets = Vec::new();
        let mut centers = Vec::new();
        for (i, slot) in slots.iter().enumerate() {
            let (w_raw, h_raw) = dims[*slot];
            chiplets.push(Chiplet::new(i, dyadic(w_raw), dyadic(h_raw), 1.0));
            let col = (slot % 5) as f64;
            let row = (slot / 5) as f64;
            centers.push((col * SLOT + SLOT / 2.0, row * SLOT + SLOT / 2.0));
        }
        Instance { placement: Placement::new(chiplets, centers, INTERPOSER) }
    })
}

fn opposite(direction: Direction) -> Direction {
    match direction {
        Direction::Left => Direction::Right,
        Direction::Right => Direction::Left,
        Direction::Up => Direction::Down,
        Direction::Down => Direction::Up,
    }
}

proptest! {
    #[test]
    fn generated_instances_are_legal(inst in instances(6)) {
        prop_assert!(inst.placement.is_legal());
    }

    #[test]
    fn moves_preserve_legality(
        inst in instances(6),
        idx_raw in 0usize..6,
        dir_raw in 0usize..4,
        steps in 1u32..8,
    ) {
        let p = &inst.placement;
        let idx = idx_raw % p.len();
        let direction = Direction::ALL[dir_raw];
        let distance = f64::from(steps) * 0.25;
        if let Some(moved) = p.try_move(idx, direction, distance) {
            prop_assert!(moved.is_legal());
            // Only the moved chiplet changed.
            for i in 0..p.len() {
                if i != idx {
                    prop_assert_eq!(moved.centers[i], p.centers[i]);
                }
                prop_assert_eq!(moved.chiplets[i], p.chiplets[i]);
            }
        }
    }

    #[test]
    fn moves_invert_bitwise(
        inst in instances(6),
        idx_raw in 0usize..6,
        dir_raw in 0usize..4,
        steps in 1u32..8,
    ) {
        let p = &inst.placement;
        let idx = idx_raw % p.len();
        let direction = Direction::ALL[dir_raw];
        let distance = f64::from(steps) * 0.25;
        if let Some(moved) = p.try_move(idx, direction, distance) {
            let back = moved
                .try_move(idx, opposite(direction), distance)
                .expect("the vacated spot is still free");
            prop_assert_eq!(&back, p);
        }
    }

    #[test]
    fn jumps_land_legally(
        inst in instances(6),
        idx_raw in 0usize..6,
        rotate in proptest::bool::ANY,
        pick in 0usize..1000,
    ) {
        let p = &inst.placement;
        let idx = idx_raw % p.len();
        let spots = p.free_positions(idx, rotate, 1.0);
        prop_assert!(!spots.is_empty(), "a 45 mm interposer with six 7 mm chiplets has room");
        let target = spots[pick % spots.len()];
        let jumped = p
            .try_jump(idx, target, rotate)
            .expect("free positions must be jumpable with the same rotation flag");
        prop_assert!(jumped.is_legal());
        prop_assert_eq!(jumped.centers[idx], target);
        prop_assert_eq!(jumped.chiplets[idx].rotated, p.chiplets[idx].rotated ^ rotate);
    }

    #[test]
    fn jump_lattice_is_corner_aligned(
        inst in instances(4),
        idx_raw in 0usize..4,
        rotate in proptest::bool::ANY,
    ) {
        let p = &inst.placement;
        let idx = idx_raw % p.len();
        let mut chiplet = p.chiplets[idx];
        if rotate {
            chiplet.rotated = !chiplet.rotated;
        }
        let (w, h) = chiplet.effective_dims();
        for (cx, cy) in p.free_positions(idx, rotate, 1.0) {
            // Dyadic dims make the corner arithmetic exact.
            let corner_x = cx - w / 2.0;
            let corner_y = cy - h / 2.0;
            prop_assert_eq!(corner_x, corner_x.round());
            prop_assert_eq!(corner_y, corner_y.round());
        }
    }

    #[test]
    fn blocked_moves_return_none(
        inst in instances(3),
        idx_raw in 0usize..3,
        dir_raw in 0usize..4,
    ) {
        let p = &inst.placement;
        let idx = idx_raw % p.len();
        let direction = Direction::ALL[dir_raw];
        // A slide past the far edge is always illegal.
        prop_assert!(p.try_move(idx, direction, 2.0 * INTERPOSER).is_none());
    }
}

#[test]
fn free_positions_exclude_the_current_spot_only_without_rotation() {
    let chiplets = vec![Chiplet::new(0, 4.0, 4.0, 1.0)];
    let p = Placement::new(chiplets, vec![(2.0, 2.0)], 12.0);
    let unrotated = p.free_positions(0, false, 1.0);
    assert!(!unrotated.contains(&(2.0, 2.0)), "current spot is not a fresh jump target");
    // A square chiplet keeps its footprint under rotation, so the spot stays
    // excluded; a non-square one regains it.
    let rotated = p.free_positions(0, true, 1.0);
    assert!(!rotated.contains(&(2.0, 2.0)));

    // A 6x4 chiplet centered at (3,3) sits on both the unrotated and the
    // rotated corner lattice, so the same center reappears once rotation
    // changes the footprint.
    let chiplets = vec![Chiplet::new(0, 6.0, 4.0, 1.0)];
    let p = Placement::new(chiplets, vec![(3.0, 3.0)], 12.0);
    assert!(!p.free_positions(0, false, 1.0).contains(&(3.0, 3.0)));
    let rotated = p.free_positions(0, true, 1.0);
    assert!(rotated.contains(&(3.0, 3.0)), "rotation changes the footprint at the same center");
}
