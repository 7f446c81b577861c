//! Physical invariants of the steady-state solver on randomized inputs:
//! energy balance, superposition, monotonicity in power, and exact mirror
//! symmetry.

use chiplace_core::thermal::{power_map, solve_steady_state};
use chiplace_core::{Chiplet, Placement, ThermalConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RES: usize = 16;

fn config() -> ThermalConfig {
    ThermalConfig { grid_resolution: RES, ..ThermalConfig::default() }
}

fn random_power(rng: &mut impl Rng) -> Vec<f64> {
    let mut power = vec![0.0; RES * RES];
    let sources = rng.random_range(1..6);
    for _ in 0..sources {
        let cell = rng.random_range(0..RES * RES);
        power[cell] += rng.random_range(1.0..40.0);
    }
    power
}

#[test]
fn injected_power_leaves_through_the_sink() {
    let cfg = config();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..20 {
        let power = random_power(&mut rng);
        let injected: f64 = power.iter().sum();
        let map = solve_steady_state(&power, &cfg).unwrap();
        let extracted: f64 = map.rises().iter().map(|u| cfg.sink_conductance * u).sum();
        let relative = (extracted - injected).abs() / injected;
        assert!(relative < 1e-6, "energy imbalance {relative:.3e}");
    }
}

#[test]
fn rises_superpose() {
    let cfg = config();
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    for _ in 0..10 {
        let p1 = random_power(&mut rng);
        let p2 = random_power(&mut rng);
        let sum: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a + b).collect();
        let u1 = solve_steady_state(&p1, &cfg).unwrap();
        let u2 = solve_steady_state(&p2, &cfg).unwrap();
        let u12 = solve_steady_state(&sum, &cfg).unwrap();
        let scale = u12.rises().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..RES * RES {
            let expected = u1.rises()[i] + u2.rises()[i];
            assert!(
                (u12.rises()[i] - expected).abs() <= 1e-7 * scale,
                "superposition violated at cell {i}"
            );
        }
    }
}

#[test]
fn extra_power_never_cools_any_cell() {
    let cfg = config();
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for _ in 0..10 {
        let base = random_power(&mut rng);
        let mut more = base.clone();
        let cell = rng.random_range(0..RES * RES);
        more[cell] += rng.random_range(5.0..20.0);
        let before = solve_steady_state(&base, &cfg).unwrap();
        let after = solve_steady_state(&more, &cfg).unwrap();
        let scale = after.rises().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..RES * RES {
            assert!(
                after.rises()[i] >= before.rises()[i] - 1e-9 * scale,
                "cell {i} cooled when power was added"
            );
        }
    }
}

#[test]
fn mirrored_power_maps_solve_to_mirrored_fields() {
    let cfg = config();
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    for _ in 0..10 {
        let power = random_power(&mut rng);
        let mut mirrored = vec![0.0; RES * RES];
        for row in 0..RES {
            for col in 0..RES {
                mirrored[row * RES + (RES - 1 - col)] = power[row * RES + col];
            }
        }
        let a = solve_steady_state(&power, &cfg).unwrap();
        let b = solve_steady_state(&mirrored, &cfg).unwrap();
        let scale = a.rises().iter().cloned().fold(1.0, f64::max);
        for row in 0..RES {
            for col in 0..RES {
                let diff = (a.at(row, col) - b.at(row, RES - 1 - col)).abs();
                assert!(
                    diff <= 1e-9 * scale,
                    "mirror symmetry broken at ({row}, {col}): {diff:.3e}"
                );
            }
        }
    }
}

#[test]
fn placement_power_maps_conserve_power_and_heat_the_right_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(75);
    for _ in 0..20 {
        let w = rng.random_range(4.0..14.0);
        let h = rng.random_range(4.0..14.0);
        let power = rng.random_range(10.0..300.0);
        let cx = rng.random_range(w / 2.0..45.0 - w / 2.0);
        let cy = rng.random_range(h / 2.0..45.0 - h / 2.0);
        let placement =
            Placement::new(vec![Chiplet::new(0, w, h, power)], vec![(cx, cy)], 45.0);
        let map = power_map(&placement, RES);
        let total: f64 = map.iter().sum();
        assert!((total - power).abs() < 1e-9 * power, "rasterization lost power");
        // No power lands outside the footprint.
        let cell = 45.0 / RES as f64;
        for (i, &p) in map.iter().enumerate() {
            if p > 0.0 {
                let col = i % RES;
                let row = i / RES;
                let x0 = col as f64 * cell;
                let y0 = row as f64 * cell;
                let overlaps = x0 < cx + w / 2.0
                    && x0 + cell > cx - w / 2.0
                    && y0 < cy + h / 2.0
                    && y0 + cell > cy - h / 2.0;
                assert!(overlaps, "cell {i} heated without overlapping the chiplet");
            }
        }
    }
}
