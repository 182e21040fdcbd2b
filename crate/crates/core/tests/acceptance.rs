//! The release gate: nine end-to-end checks, each printing one
//! `[acceptance] criterion N (...): PASS/FAIL` line and failing the build
//! when its contract or time budget is missed.
//!
//! Reference values are computed here from first principles (closed-form
//! polynomials, scalar loops, per-tile analytic heights) rather than
//! through the library's own helpers, so a regression in the crate cannot
//! hide behind the same bug in the check.

use pgtt_core::curriculum::{
    eval_metrics, level_gate, level_params, success_rate, EvalBatch, GateConfig,
};
use pgtt_core::elevation::{
    median_fill, sample_robot_heightmap, BoundaryMode, ElevationGrid, HeightmapSpec, Pose2,
};
use pgtt_core::io;
use pgtt_core::phase::{GaitConfig, GaitSampleRanges, GaitTemplate};
use pgtt_core::reward::{total_reward, RewardInput, RewardWeights, Suite, JOINT_COUNT};
use pgtt_core::rollout::{
    assemble, assemble_privileged, scripted_rollout, CommandSpec, GaitSource, ObservationLayout,
    ObservationParts, RobotModel, RolloutConfig, RolloutSetup,
};
use pgtt_core::spline::{desired_foot_height, FootTrajectoryParams};
use pgtt_core::terrain::{generate_field, HeightField, Side, TileGrid, TileKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

fn report(n: u32, label: &str, pass: bool, elapsed: Duration, budget: Duration) {
    let verdict = if pass && elapsed <= budget {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "[acceptance] criterion {n} ({label}): {verdict} [{:.2}s of {:.0}s budget]",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
}

/// Closed-form reference for the swing profile: a plateau and two
/// smoothstep arcs, written without Hermite coefficients.
fn reference_foot_height(phase: f64, p: &FootTrajectoryParams, spread: f64) -> f64 {
    let phi = if phase == TAU { 0.0 } else { phase };
    let stance_end = TAU * p.stance_ratio;
    let peak = PI * (1.0 + p.stance_ratio);
    let half = PI * (1.0 - p.stance_ratio);
    let apex = p.swing_apex + spread;
    if phi < stance_end {
        p.stance_height
    } else if phi < peak {
        let s = (phi - stance_end) / half;
        p.stance_height + (apex - p.stance_height) * s * s * (3.0 - 2.0 * s)
    } else {
        let s = (phi - peak) / half;
        apex + (p.stance_height - apex) * s * s * (3.0 - 2.0 * s)
    }
}

#[test]
fn criterion_1_swing_trajectory() {
    let start = Instant::now();
    let budget = Duration::from_secs(5);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let eps = 1e-6;
    let mut pass = true;
    let mut fail = |msg: String| {
        if pass {
            eprintln!("criterion 1: {msg}");
        }
        pass = false;
    };

    for draw in 0..1000 {
        let stance_height = rng.random_range(-0.5..-0.15);
        let swing_apex = stance_height + rng.random_range(0.02..0.25);
        let stance_ratio = rng.random_range(0.15..0.85);
        let spread = rng.random_range(0.0..0.2);
        let p = FootTrajectoryParams::new(stance_height, swing_apex, stance_ratio).unwrap();
        let eval = |phi: f64| desired_foot_height(phi, &p, spread).unwrap();

        let stance_end = TAU * stance_ratio;
        let peak = PI * (1.0 + stance_ratio);
        for joint in [stance_end, peak] {
            let before = eval(joint - eps);
            let after = eval(joint + eps);
            if (after - before).abs() > 1e-9 {
                fail(format!(
                    "draw {draw}: value jump {} at phase {joint}",
                    (after - before).abs()
                ));
            }
            let slope = (after - before) / (2.0 * eps);
            if slope.abs() > 1e-4 {
                fail(format!("draw {draw}: slope {slope} at phase {joint}"));
            }
        }
        // Wrap: the end of the cycle rejoins the stance plateau.
        if (eval(eps) - eval(TAU - eps)).abs() > 1e-9 {
            fail(format!("draw {draw}: discontinuity across the cycle wrap"));
        }

        let apex = eval(PI * (1.0 + stance_ratio));
        if apex != swing_apex + spread {
            fail(format!(
                "draw {draw}: apex {apex} != {}",
                swing_apex + spread
            ));
        }

        for _ in 0..10 {
            let phi = rng.random_range(0.0..TAU);
            let got = eval(phi);
            let want = reference_foot_height(phi, &p, spread);
            if (got - want).abs() > 1e-12 {
                fail(format!(
                    "draw {draw}: height {got} vs reference {want} at phase {phi}"
                ));
            }
        }
    }

    let elapsed = start.elapsed();
    report(
        1,
        "swing trajectory continuity and apex",
        pass,
        elapsed,
        budget,
    );
    assert!(pass);
    assert!(elapsed <= budget, "criterion 1 took {elapsed:?}");
}

/// Scalar-loop reward formulas, one per term, with no shared helpers.
mod reference_rewards {
    use super::{RewardInput, RewardWeights, JOINT_COUNT, PI};

    pub fn term(name: &str, i: &RewardInput, w: &RewardWeights, desired: &[f64; 4]) -> f64 {
        match name {
            "track_lin_vel" => {
                let dx = i.command.0 - i.lin_vel_xy.0;
                let dy = i.command.1 - i.lin_vel_xy.1;
                (-(dx * dx + dy * dy) / w.sigma_v).exp()
            }
            "track_ang_vel" => {
                let d = i.command.2 - i.ang_vel_z;
                (-(d * d) / w.sigma_v).exp()
            }
            "lin_vel_z" => i.lin_vel_z * i.lin_vel_z,
            "ang_vel_xy" => i.ang_vel_xy.0 * i.ang_vel_xy.0 + i.ang_vel_xy.1 * i.ang_vel_xy.1,
            "orientation" => i.gravity[0] * i.gravity[0] + i.gravity[1] * i.gravity[1],
            "termination" => (!i.alive) as u32 as f64,
            "joint_power" => {
                let mut s = 0.0;
                for j in 0..JOINT_COUNT {
                    s += i.joint_torque[j].abs() * i.joint_vel[j].abs();
                }
                s
            }
            "action_rate" => {
                let mut s = 0.0;
                for j in 0..JOINT_COUNT {
                    s += (i.action[j] - i.prev_action[j]) * (i.action[j] - i.prev_action[j]);
                }
                s
            }
            "joint_limits" => {
                let mut n = 0.0;
                for j in 0..JOINT_COUNT {
                    if i.joint_pos[j] < i.joint_min[j] || i.joint_pos[j] > i.joint_max[j] {
                        n += 1.0;
                    }
                }
                n
            }
            "default_pose" => {
                let mut s = 0.0;
                for j in 0..JOINT_COUNT {
                    s += (i.joint_pos[j] - i.default_pose[j]) * w.default_pose_joint_weights[j];
                }
                s
            }
            "joint_torques" => {
                let mut s = 0.0;
                for j in 0..JOINT_COUNT {
                    s += i.joint_torque[j] * i.joint_torque[j];
                }
                s
            }
            "foot_phase" => {
                let mut s = 0.0;
                for (d, h) in desired.iter().zip(&i.foot_height_hip) {
                    let e = d - h;
                    s += (-(e * e) / w.sigma_f).exp();
                }
                s
            }
            "foot_contact" => {
                let mut n = 0.0;
                for f in 0..4 {
                    if i.phases[f] >= PI && i.phases[f] < 2.0 * PI && i.contacts[f] {
                        n += 1.0;
                    }
                }
                n
            }
            other => panic!("no reference for term {other}"),
        }
    }

    pub fn massloco(name: &str, i: &RewardInput, w: &RewardWeights) -> f64 {
        let speed = |f: usize| {
            (i.foot_vel_xy[f].0 * i.foot_vel_xy[f].0 + i.foot_vel_xy[f].1 * i.foot_vel_xy[f].1)
                .sqrt()
        };
        let cmd =
            (i.command.0 * i.command.0 + i.command.1 * i.command.1 + i.command.2 * i.command.2)
                .sqrt();
        match name {
            "clearance" => {
                let mut s = 0.0;
                for f in 0..4 {
                    let e =
                        i.foot_terrain_height[f] + w.massloco_swing_height - i.foot_height_world[f];
                    s += e * e * speed(f);
                }
                s
            }
            "slip" => {
                let mut s = 0.0;
                for f in 0..4 {
                    if i.contacts[f] {
                        s += speed(f);
                    }
                }
                s
            }
            "air_time" => {
                if cmd > 0.01 {
                    let mut s = 0.0;
                    for f in 0..4 {
                        s += i.air_time[f] - 0.5;
                    }
                    s
                } else {
                    0.0
                }
            }
            "stand_still" => {
                if cmd < 0.01 {
                    let mut s = 0.0;
                    for j in 0..JOINT_COUNT {
                        s += (i.joint_pos[j] - i.default_pose[j]).abs();
                    }
                    s
                } else {
                    0.0
                }
            }
            other => panic!("no reference for term {other}"),
        }
    }

    pub fn wild(name: &str, i: &RewardInput) -> f64 {
        match name {
            "clearance" => {
                let mut n = 0.0;
                for f in 0..4 {
                    if i.phases[f] >= PI
                        && i.phases[f] < 2.0 * PI
                        && i.foot_height_world[f] >= i.leg_h_max[f]
                    {
                        n += 1.0;
                    }
                }
                n
            }
            "slip" => {
                let mut s = 0.0;
                for f in 0..4 {
                    if i.contacts[f] {
                        s += (i.foot_vel_xy[f].0 * i.foot_vel_xy[f].0
                            + i.foot_vel_xy[f].1 * i.foot_vel_xy[f].1)
                            .sqrt();
                    }
                }
                s
            }
            other => panic!("no reference for term {other}"),
        }
    }
}

fn random_reward_input(rng: &mut ChaCha8Rng) -> RewardInput {
    RewardInput {
        lin_vel_xy: (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        lin_vel_z: rng.random_range(-1.0..1.0),
        ang_vel_xy: (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
        ang_vel_z: rng.random_range(-3.0..3.0),
        gravity: [
            rng.random_range(-0.6..0.6),
            rng.random_range(-0.6..0.6),
            -1.0,
        ],
        joint_pos: std::array::from_fn(|_| rng.random_range(-1.5..1.5)),
        joint_vel: std::array::from_fn(|_| rng.random_range(-8.0..8.0)),
        joint_torque: std::array::from_fn(|_| rng.random_range(-30.0..30.0)),
        action: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        prev_action: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        contacts: std::array::from_fn(|_| rng.random_bool(0.5)),
        foot_height_hip: std::array::from_fn(|_| rng.random_range(-0.4..0.1)),
        foot_height_world: std::array::from_fn(|_| rng.random_range(-0.1..0.5)),
        foot_vel_xy: std::array::from_fn(|_| {
            (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }),
        foot_terrain_height: std::array::from_fn(|_| rng.random_range(-0.1..0.4)),
        phases: std::array::from_fn(|_| rng.random_range(0.0..TAU)),
        leg_h_max: std::array::from_fn(|_| rng.random_range(-0.1..0.4)),
        leg_delta_h: std::array::from_fn(|_| rng.random_range(0.0..0.3)),
        air_time: std::array::from_fn(|_| rng.random_range(0.0..1.5)),
        command: (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ),
        alive: rng.random_bool(0.9),
        default_pose: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        joint_min: std::array::from_fn(|_| rng.random_range(-2.0..-0.5)),
        joint_max: std::array::from_fn(|_| rng.random_range(0.5..2.0)),
    }
}

#[test]
fn criterion_2_reward_reference() {
    let start = Instant::now();
    let budget = Duration::from_secs(10);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let params = FootTrajectoryParams::default();
    let common = [
        "track_lin_vel",
        "track_ang_vel",
        "lin_vel_z",
        "ang_vel_xy",
        "orientation",
        "termination",
        "joint_power",
        "action_rate",
        "joint_limits",
        "default_pose",
        "joint_torques",
    ];
    let mut pass = true;
    let mut worst = 0.0f64;

    'outer: for trial in 0..10_000 {
        let input = random_reward_input(&mut rng);
        let w = if trial % 2 == 0 {
            RewardWeights::table_printed()
        } else {
            RewardWeights::sign_corrected()
        };
        let desired: [f64; 4] = std::array::from_fn(|f| {
            desired_foot_height(input.phases[f], &params, input.leg_delta_h[f]).unwrap()
        });
        for suite in [Suite::Pgtt, Suite::MassLoco, Suite::Wild] {
            let b = total_reward(suite, &input, &params, &w).unwrap();
            let mut check = |name: &str, want: f64| {
                let got = b.raw(name);
                worst = worst.max((got - want).abs());
                if (got - want).abs() > 1e-12 {
                    eprintln!(
                        "criterion 2: trial {trial} {suite:?} {name}: {got} vs reference {want}"
                    );
                    pass = false;
                }
            };
            for name in common {
                check(name, reference_rewards::term(name, &input, &w, &desired));
            }
            match suite {
                Suite::Pgtt => {
                    check(
                        "foot_phase",
                        reference_rewards::term("foot_phase", &input, &w, &desired),
                    );
                    check(
                        "foot_contact",
                        reference_rewards::term("foot_contact", &input, &w, &desired),
                    );
                }
                Suite::MassLoco => {
                    for name in ["clearance", "slip", "air_time", "stand_still"] {
                        check(name, reference_rewards::massloco(name, &input, &w));
                    }
                }
                Suite::Wild => {
                    for name in ["clearance", "slip"] {
                        check(name, reference_rewards::wild(name, &input));
                    }
                }
            }
            let resum: f64 = b
                .terms
                .iter()
                .map(|t| t.raw * lookup_weight(&w, suite, t))
                .sum();
            if (b.total - resum).abs() > 1e-12 {
                eprintln!(
                    "criterion 2: trial {trial} total {} vs resum {resum}",
                    b.total
                );
                pass = false;
            }
            if !pass {
                break 'outer;
            }
        }
    }

    let elapsed = start.elapsed();
    report(2, "reward terms vs scalar reference", pass, elapsed, budget);
    assert!(pass, "worst deviation {worst}");
    assert!(elapsed <= budget, "criterion 2 took {elapsed:?}");
}

/// Weight of a named term under one suite, read straight off the table.
fn lookup_weight(w: &RewardWeights, suite: Suite, term: &pgtt_core::reward::RewardTerm) -> f64 {
    match term.name.as_str() {
        "track_lin_vel" => w.track_lin_vel,
        "track_ang_vel" => w.track_ang_vel,
        "lin_vel_z" => w.lin_vel_z,
        "ang_vel_xy" => w.ang_vel_xy,
        "orientation" => w.orientation,
        "termination" => w.termination,
        "joint_power" => w.joint_power,
        "action_rate" => w.action_rate,
        "joint_limits" => w.joint_limits,
        "default_pose" => w.default_pose,
        "joint_torques" => w.joint_torques,
        "foot_phase" => w.foot_phase,
        "foot_contact" => w.foot_contact,
        "clearance" if suite == Suite::MassLoco => w.massloco_clearance,
        "slip" if suite == Suite::MassLoco => w.massloco_slip,
        "air_time" => w.massloco_air_time,
        "stand_still" => w.massloco_stand_still,
        "clearance" => w.wild_clearance,
        "slip" => w.wild_slip,
        other => panic!("no weight for term {other}"),
    }
}

#[test]
fn criterion_3_exact_driver() {
    let start = Instant::now();
    let budget = Duration::from_secs(5);
    let mut pass = true;

    // A perfect-tracking step on the desired trajectory scores the sum of
    // the suite's positive weights and nothing else.
    let params = FootTrajectoryParams::default();
    let phases = [0.4, PI + 0.4, PI + 0.4, 0.4];
    let ideal = RewardInput {
        lin_vel_xy: (0.5, 0.0),
        ang_vel_z: 0.2,
        command: (0.5, 0.0, 0.2),
        phases,
        foot_height_hip: phases.map(|phi| desired_foot_height(phi, &params, 0.0).unwrap()),
        contacts: phases.map(|phi| phi < PI),
        ..Default::default()
    };
    let b = total_reward(
        Suite::Pgtt,
        &ideal,
        &params,
        &RewardWeights::table_printed(),
    )
    .unwrap();
    if (b.total - 3.5).abs() > 1e-12 {
        eprintln!("criterion 3: ideal step total {} != 3.5", b.total);
        pass = false;
    }

    // A scripted rollout with the exact foot driver on flat ground keeps
    // all four feet on the trajectory at every one of 5000 steps.
    let terrain = HeightField::from_fn(200, 200, 0.05, (-5.0, -5.0), |_, _| 0.0);
    let gait = GaitSource::Fixed {
        gait: GaitConfig::from_template(GaitTemplate::Trot, 2.0).unwrap(),
    };
    let config = RolloutConfig {
        episode_length: 5000,
        // Keeps phases off the exact stance/swing boundary, where a foot
        // that is about to lift still touches the ground.
        initial_time: 0.005,
        command: CommandSpec::Fixed {
            command: (0.0, 0.0, 0.3),
        },
        ..Default::default()
    };
    let model = RobotModel::go2_like();
    let weights = RewardWeights::table_printed();
    let setup = RolloutSetup {
        terrain: &terrain,
        model: &model,
        trajectory: &params,
        weights: &weights,
        suite: Suite::Pgtt,
        gait: &gait,
        config: &config,
        terrain_tag: None,
    };
    let trace = scripted_rollout(&setup, 3).unwrap();
    if trace.steps.len() != 5000 {
        eprintln!("criterion 3: rollout has {} steps", trace.steps.len());
        pass = false;
    }
    for (k, step) in trace.steps.iter().enumerate() {
        let phase = step.breakdown.raw("foot_phase");
        let contact = step.breakdown.raw("foot_contact");
        if (phase - 4.0).abs() > 1e-9 || contact != 0.0 {
            eprintln!("criterion 3: step {k}: foot_phase {phase}, foot_contact {contact}");
            pass = false;
            break;
        }
    }

    let elapsed = start.elapsed();
    report(
        3,
        "exact driver tracks the trajectory",
        pass,
        elapsed,
        budget,
    );
    assert!(pass);
    assert!(elapsed <= budget, "criterion 3 took {elapsed:?}");
}

/// Audit every interior tile edge of a generated grid by brute force.
fn edges_all_compatible(grid: &TileGrid) -> bool {
    let side = grid.side();
    for row in 0..side {
        for col in 0..side {
            let tile = grid.tile(row, col);
            if col + 1 < side
                && tile.edge_profile(Side::East) != grid.tile(row, col + 1).edge_profile(Side::West)
            {
                return false;
            }
            if row + 1 < side
                && tile.edge_profile(Side::North)
                    != grid.tile(row + 1, col).edge_profile(Side::South)
            {
                return false;
            }
        }
    }
    true
}

#[test]
fn criterion_4_terrain_generation() {
    let start = Instant::now();
    let budget = Duration::from_secs(60);
    let mut pass = true;

    'levels: for level in 1..=4u8 {
        let params = level_params(level).unwrap().terrain_params();
        for seed in 0..250u64 {
            let (grid, field) = match generate_field(&params, seed) {
                Ok(pair) => pair,
                Err(e) => {
                    eprintln!("criterion 4: level {level} seed {seed}: {e}");
                    pass = false;
                    break 'levels;
                }
            };
            if !edges_all_compatible(&grid) {
                eprintln!("criterion 4: level {level} seed {seed}: incompatible edge");
                pass = false;
                break 'levels;
            }
            if grid.center().kind != TileKind::Flat {
                eprintln!("criterion 4: level {level} seed {seed}: center not flat");
                pass = false;
                break 'levels;
            }
            let heights = params.step_height_range;
            let tile = &grid.cells[0];
            if tile.step_height < heights.0 - 1e-12 || tile.step_height > heights.1 + 1e-12 {
                eprintln!(
                    "criterion 4: level {level} seed {seed}: step height {} outside {heights:?}",
                    tile.step_height
                );
                pass = false;
                break 'levels;
            }
            // Regeneration from the same seed is byte-identical on disk.
            let (_, again) = generate_field(&params, seed).unwrap();
            let mut a = Vec::new();
            let mut b = Vec::new();
            io::write_height_field(&field, &mut a).unwrap();
            io::write_height_field(&again, &mut b).unwrap();
            if a != b {
                eprintln!("criterion 4: level {level} seed {seed}: regen differs");
                pass = false;
                break 'levels;
            }
        }
    }

    let elapsed = start.elapsed();
    report(4, "terrain audit over 1000 seeds", pass, elapsed, budget);
    assert!(pass);
    assert!(elapsed <= budget, "criterion 4 took {elapsed:?}");
}

/// Height at a world point straight from the tile definitions, replaying
/// the nearest-cell semantics of the rasterized field.
fn analytic_height(grid: &TileGrid, resolution: f64, x: f64, y: f64) -> Option<f64> {
    let per_tile = (grid.tile_size / resolution).round() as usize;
    let cells = grid.side() * per_tile;
    let half_extent = grid.side() as f64 * grid.tile_size / 2.0;
    let col = ((x + half_extent) / resolution).floor();
    let row = ((y + half_extent) / resolution).floor();
    if col < 0.0 || row < 0.0 || col >= cells as f64 || row >= cells as f64 {
        return None;
    }
    let (row, col) = (row as usize, col as usize);
    let tile = grid.tile(row / per_tile, col / per_tile);
    let local_x = (col % per_tile) as f64 * resolution + resolution / 2.0;
    let local_y = (row % per_tile) as f64 * resolution + resolution / 2.0;
    Some(tile.height_at(grid.tile_size, local_x, local_y) as f32 as f64)
}

#[test]
fn criterion_5_heightmap_oracle() {
    let start = Instant::now();
    let budget = Duration::from_secs(10);
    let mut pass = true;

    let params = level_params(3).unwrap().terrain_params();
    let (grid, field) = generate_field(&params, 77).unwrap();
    let resolution = params.resolution;
    let spec = HeightmapSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(505);

    'poses: for trial in 0..100 {
        let pose = Pose2::new(
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(0.0..TAU),
        );
        let map = sample_robot_heightmap(&field, pose, &spec, BoundaryMode::Strict).unwrap();
        for r in 0..spec.rows {
            for c in 0..spec.cols {
                let (bx, by) = spec.body_point(r, c);
                let (x, y) = pose.to_world(bx, by);
                let want = analytic_height(&grid, resolution, x, y).unwrap();
                let got = map.sample(r, c);
                if got != want {
                    eprintln!(
                        "criterion 5: trial {trial} sample ({r},{c}): {got} vs analytic {want}"
                    );
                    pass = false;
                    break 'poses;
                }
            }
        }
    }

    // A quarter turn permutes the square footprint; samples may shift by
    // at most one cell where a rotated point lands on a cell boundary.
    let square = HeightmapSpec {
        rows: 9,
        cols: 9,
        spacing: 0.1,
    };
    'turns: for trial in 0..100 {
        let x = rng.random_range(-3.0..3.0);
        let y = rng.random_range(-3.0..3.0);
        let yaw = rng.random_range(0.0..TAU);
        let pose = Pose2::new(x, y, yaw);
        let turned = Pose2::new(x, y, yaw + PI / 2.0);
        let map = sample_robot_heightmap(&field, pose, &square, BoundaryMode::Clamp).unwrap();
        let map90 = sample_robot_heightmap(&field, turned, &square, BoundaryMode::Clamp).unwrap();
        for r in 0..9 {
            for c in 0..9 {
                let got = map90.sample(r, c);
                let want = map.sample(8 - c, r);
                if got != want {
                    // The two world points must then disagree by at most
                    // one grid cell in each index.
                    let (bx, by) = square.body_point(r, c);
                    let p90 = turned.to_world(bx, by);
                    let (bx0, by0) = square.body_point(8 - c, r);
                    let p0 = pose.to_world(bx0, by0);
                    let cell = |x: f64, y: f64| {
                        (
                            ((x + 5.0) / resolution).floor() as i64,
                            ((y + 5.0) / resolution).floor() as i64,
                        )
                    };
                    let (c90, r90) = cell(p90.0, p90.1);
                    let (c0, r0) = cell(p0.0, p0.1);
                    if (c90 - c0).abs() > 1 || (r90 - r0).abs() > 1 {
                        eprintln!(
                            "criterion 5: turn {trial} sample ({r},{c}) is {} cells away",
                            (c90 - c0).abs().max((r90 - r0).abs())
                        );
                        pass = false;
                        break 'turns;
                    }
                }
            }
        }
    }

    let elapsed = start.elapsed();
    report(5, "heightmap matches tile analytics", pass, elapsed, budget);
    assert!(pass);
    assert!(elapsed <= budget, "criterion 5 took {elapsed:?}");
}

/// Reference hole filling, written from the contract: label components,
/// decide each one, fill from patch medians of the original grid.
fn reference_fill(grid: &ElevationGrid, r_hole: usize) -> ElevationGrid {
    let (rows, cols) = (grid.rows, grid.cols);
    let mut label = vec![usize::MAX; rows * cols];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..rows * cols {
        if grid.valid[start] || label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut cells = Vec::new();
        let mut stack = vec![start];
        label[start] = id;
        while let Some(cell) = stack.pop() {
            cells.push(cell);
            let (row, col) = (cell / cols, cell % cols);
            for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (row as i64 + dr, col as i64 + dc);
                if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
                    continue;
                }
                let n = nr as usize * cols + nc as usize;
                if !grid.valid[n] && label[n] == usize::MAX {
                    label[n] = id;
                    stack.push(n);
                }
            }
        }
        components.push(cells);
    }

    let mut out = grid.clone();
    for (id, cells) in components.iter().enumerate() {
        let rs: Vec<usize> = cells.iter().map(|c| c / cols).collect();
        let cs: Vec<usize> = cells.iter().map(|c| c % cols).collect();
        let (r_min, r_max) = (*rs.iter().min().unwrap(), *rs.iter().max().unwrap());
        let (c_min, c_max) = (*cs.iter().min().unwrap(), *cs.iter().max().unwrap());
        let extent = (r_max - r_min + 1).max(c_max - c_min + 1);
        if extent.div_ceil(2) > r_hole {
            continue;
        }
        if r_min == 0 || c_min == 0 || r_max == rows - 1 || c_max == cols - 1 {
            continue;
        }
        let mut ring_valid = true;
        for &cell in cells {
            let (row, col) = (cell / cols, cell % cols);
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let n = (row as i64 + dr) as usize * cols + (col as i64 + dc) as usize;
                    if !grid.valid[n] && label[n] != id {
                        ring_valid = false;
                    }
                }
            }
        }
        if !ring_valid {
            continue;
        }
        for &cell in cells {
            let (row, col) = (cell / cols, cell % cols);
            let mut ms = Vec::new();
            let mut vs = Vec::new();
            for pr in row.saturating_sub(r_hole)..=(row + r_hole).min(rows - 1) {
                for pc in col.saturating_sub(r_hole)..=(col + r_hole).min(cols - 1) {
                    let p = pr * cols + pc;
                    if grid.valid[p] {
                        ms.push(grid.means[p] as f64);
                        vs.push(grid.variances[p] as f64);
                    }
                }
            }
            if ms.is_empty() {
                continue;
            }
            let med = |vals: &mut Vec<f64>| {
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let n = vals.len();
                if n % 2 == 1 {
                    vals[n / 2]
                } else {
                    (vals[n / 2 - 1] + vals[n / 2]) / 2.0
                }
            };
            out.means[cell] = med(&mut ms) as f32;
            out.variances[cell] = med(&mut vs) as f32;
            out.valid[cell] = true;
        }
    }
    out
}

#[test]
fn criterion_6_median_fill() {
    let start = Instant::now();
    let budget = Duration::from_secs(10);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut pass = true;

    for trial in 0..500 {
        let rows = rng.random_range(8..24);
        let cols = rng.random_range(8..24);
        let n = rows * cols;
        let hole_prob = rng.random_range(0.02..0.2);
        let mut grid = ElevationGrid {
            rows,
            cols,
            resolution: 0.05,
            origin: (0.0, 0.0),
            means: (0..n).map(|_| rng.random_range(-0.5..0.5)).collect(),
            variances: (0..n).map(|_| rng.random_range(0.0..0.02)).collect(),
            valid: (0..n).map(|_| rng.random_bool(1.0 - hole_prob)).collect(),
        };
        // Every third grid gets explicit border holes, which must survive
        // untouched, plus a blob too wide to fill.
        if trial % 3 == 0 {
            grid.valid[rng.random_range(0..cols)] = false;
            grid.valid[n - 1 - rng.random_range(0..cols)] = false;
            for col in 2..(cols - 2).min(12) {
                grid.valid[(rows / 2) * cols + col] = false;
            }
        }
        let r_hole = rng.random_range(1..=3);

        let filled = median_fill(&grid, r_hole).unwrap();
        let want = reference_fill(&grid, r_hole);
        if filled != want {
            eprintln!("criterion 6: trial {trial} (r_hole {r_hole}) differs from reference");
            pass = false;
            break;
        }
        for i in 0..n {
            if grid.valid[i]
                && (filled.means[i] != grid.means[i]
                    || filled.variances[i] != grid.variances[i]
                    || !filled.valid[i])
            {
                eprintln!("criterion 6: trial {trial}: valid cell {i} was modified");
                pass = false;
            }
        }
        let again = median_fill(&filled, r_hole).unwrap();
        if again != filled {
            eprintln!("criterion 6: trial {trial}: fill is not idempotent");
            pass = false;
        }
        if !pass {
            break;
        }
    }

    let elapsed = start.elapsed();
    report(6, "median fill matches its contract", pass, elapsed, budget);
    assert!(pass);
    assert!(elapsed <= budget, "criterion 6 took {elapsed:?}");
}

#[test]
fn criterion_7_metrics_and_gate() {
    let start = Instant::now();
    let budget = Duration::from_secs(1);
    let cfg = GateConfig::default();
    let mut pass = true;

    // A constant squared error equal to sigma lands exactly on 1/e.
    let batch = EvalBatch {
        lin_err_sq: vec![vec![cfg.sigma; 40], vec![cfg.sigma; 60]],
        ang_err_sq: vec![vec![cfg.sigma; 40], vec![cfg.sigma; 60]],
        terminated: 0,
        total: 2,
    };
    let (m_v, m_omega) = eval_metrics(&batch, &cfg).unwrap();
    let inv_e = (-1.0f64).exp();
    if (m_v - inv_e).abs() > 1e-12 || (m_omega - inv_e).abs() > 1e-12 {
        eprintln!("criterion 7: metrics ({m_v}, {m_omega}) vs 1/e {inv_e}");
        pass = false;
    }

    if success_rate(152, 1000).unwrap() != 0.848 {
        eprintln!(
            "criterion 7: success rate {}",
            success_rate(152, 1000).unwrap()
        );
        pass = false;
    }

    // The gate is inclusive at the threshold and needs both metrics.
    let t = cfg.threshold;
    let below = f64::from_bits(t.to_bits() - 1);
    if !level_gate(t, t, &cfg)
        || level_gate(below, t, &cfg)
        || level_gate(t, below, &cfg)
        || level_gate(below, below, &cfg)
    {
        eprintln!("criterion 7: gate boundary behavior wrong at {t}");
        pass = false;
    }

    let elapsed = start.elapsed();
    report(7, "metrics hit pinned values", pass, elapsed, budget);
    assert!(pass);
    assert!(elapsed <= budget, "criterion 7 took {elapsed:?}");
}

#[test]
fn criterion_8_observation_layout() {
    let start = Instant::now();
    let budget = Duration::from_secs(1);
    let mut pass = true;

    let spec = HeightmapSpec::default();
    let layout = ObservationLayout::new(spec.len());
    if layout.len() != 153 {
        eprintln!("criterion 8: observation length {}", layout.len());
        pass = false;
    }

    let parts = ObservationParts {
        ang_vel: [0.1, 0.2, 0.3],
        gravity: [0.0, 0.01, -1.0],
        joint_pos: std::array::from_fn(|j| j as f64 * 0.01),
        joint_vel: std::array::from_fn(|j| -(j as f64) * 0.1),
        phase_cos: [0.9, -0.9, 0.8, -0.8],
        phase_sin: [0.1, -0.1, 0.2, -0.2],
        heightmap: (0..spec.len()).map(|k| k as f64 * 1e-3).collect(),
        frequency: 2.25,
        prev_action: std::array::from_fn(|j| j as f64 * 0.02),
        command: [0.5, -0.25, 0.3],
    };
    let obs = assemble(&parts, &layout).unwrap();
    if obs.len() != 153 {
        pass = false;
    }
    let blocks: [(&str, &[f64]); 10] = [
        ("ang_vel", &parts.ang_vel),
        ("gravity", &parts.gravity),
        ("joint_pos", &parts.joint_pos),
        ("joint_vel", &parts.joint_vel),
        ("phase_cos", &parts.phase_cos),
        ("phase_sin", &parts.phase_sin),
        ("heightmap", &parts.heightmap),
        ("frequency", std::slice::from_ref(&parts.frequency)),
        ("prev_action", &parts.prev_action),
        ("command", &parts.command),
    ];
    let mut expected_offset = 0;
    for (name, want) in blocks {
        let block = layout.block(name).unwrap();
        if block.offset != expected_offset {
            eprintln!(
                "criterion 8: block {name} at offset {} instead of {expected_offset}",
                block.offset
            );
            pass = false;
        }
        expected_offset += block.len;
        if layout.slice(&obs, name).unwrap() != want {
            eprintln!("criterion 8: block {name} does not round-trip");
            pass = false;
        }
    }
    if expected_offset != 153 {
        pass = false;
    }

    let privileged = assemble_privileged(&parts, [1.0, 2.0, 3.0], &layout).unwrap();
    if privileged.len() != 156
        || privileged[..153] != obs[..]
        || privileged[153..] != [1.0, 2.0, 3.0]
    {
        eprintln!("criterion 8: privileged state malformed");
        pass = false;
    }

    let elapsed = start.elapsed();
    report(8, "observation blocks and lengths", pass, elapsed, budget);
    assert!(pass);
    assert!(elapsed <= budget, "criterion 8 took {elapsed:?}");
}

/// One full artifact pipeline into a directory: terrain files, three
/// episode traces, a per-term reward CSV, and a metrics summary.
fn run_pipeline(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let params = level_params(2).unwrap().terrain_params();
    let (grid, field) = generate_field(&params, 31).unwrap();
    io::save_height_field(&field, dir.join("terrain.pghf")).unwrap();
    let csv = std::fs::File::create(dir.join("terrain.csv")).unwrap();
    io::write_height_field_csv(&field, std::io::BufWriter::new(csv)).unwrap();
    let txt = std::fs::File::create(dir.join("tiles.txt")).unwrap();
    io::write_tile_grid_text(&grid, std::io::BufWriter::new(txt)).unwrap();

    let terrain = io::load_height_field(dir.join("terrain.pghf")).unwrap();
    let config = RolloutConfig {
        episode_length: 120,
        ..Default::default()
    };
    let model = RobotModel::go2_like();
    let trajectory = FootTrajectoryParams::default();
    let weights = RewardWeights::table_printed();
    let gait = GaitSource::Sampled {
        ranges: GaitSampleRanges::default(),
    };
    let setup = RolloutSetup {
        terrain: &terrain,
        model: &model,
        trajectory: &trajectory,
        weights: &weights,
        suite: Suite::Pgtt,
        gait: &gait,
        config: &config,
        terrain_tag: Some("terrain"),
    };
    let mut traces = Vec::new();
    for (k, seed) in [5u64, 6, 7].iter().enumerate() {
        let trace = scripted_rollout(&setup, *seed).unwrap();
        trace.save(dir.join(format!("ep_{k:04}.jsonl"))).unwrap();
        traces.push(trace);
    }

    let mut csv = String::from("episode,step,total\n");
    for (e, trace) in traces.iter().enumerate() {
        for (k, step) in trace.steps.iter().enumerate() {
            let b = total_reward(Suite::Pgtt, &step.input, &trajectory, &weights).unwrap();
            use std::fmt::Write as _;
            writeln!(csv, "{e},{k},{}", b.total).unwrap();
        }
    }
    std::fs::write(dir.join("rewards.csv"), csv).unwrap();

    let batch = EvalBatch::from_traces(&traces);
    let (m_v, m_omega) = eval_metrics(&batch, &GateConfig::default()).unwrap();
    let sr = success_rate(batch.terminated, batch.total).unwrap();
    std::fs::write(
        dir.join("metrics.txt"),
        format!("m_v={m_v}\nm_omega={m_omega}\nsr={sr}\n"),
    )
    .unwrap();

    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let bytes = std::fs::read(dir.join(&name)).unwrap();
            (name, bytes)
        })
        .collect()
}

#[test]
fn criterion_9_pipeline_determinism() {
    let start = Instant::now();
    let budget = Duration::from_secs(60);
    let mut pass = true;

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let run_a = run_pipeline(dir_a.path());
    let run_b = run_pipeline(dir_b.path());

    if run_a.len() != run_b.len() || run_a.len() != 8 {
        eprintln!(
            "criterion 9: produced {} and {} artifacts",
            run_a.len(),
            run_b.len()
        );
        pass = false;
    }
    for ((name_a, bytes_a), (name_b, bytes_b)) in run_a.iter().zip(&run_b) {
        if name_a != name_b {
            eprintln!("criterion 9: artifact sets differ: {name_a} vs {name_b}");
            pass = false;
        } else if bytes_a != bytes_b {
            eprintln!("criterion 9: {name_a} is not byte-identical across runs");
            pass = false;
        }
    }

    let elapsed = start.elapsed();
    report(
        9,
        "pipeline artifacts reproduce byte for byte",
        pass,
        elapsed,
        budget,
    );
    assert!(pass);
    assert!(elapsed <= budget, "criterion 9 took {elapsed:?}");
}
