//! Episode-level random draws: commands, push schedules, sensor noise
//! levels, and physical parameter randomization.

use super::model::RobotModel;
use super::RolloutError;
use crate::reward::JOINT_COUNT;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Uniform command intervals for (v_x, v_y, yaw rate).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandSampler {
    pub min: (f64, f64, f64),
    pub max: (f64, f64, f64),
    /// Factor applied to evaluation draws.
    pub eval_scale: f64,
}

impl Default for CommandSampler {
    fn default() -> Self {
        Self {
            min: (-1.0, -1.0, -1.0),
            max: (1.0, 1.0, 1.0),
            eval_scale: 0.7,
        }
    }
}

impl CommandSampler {
    pub fn validate(&self) -> Result<(), RolloutError> {
        let ok = self.min.0 <= self.max.0
            && self.min.1 <= self.max.1
            && self.min.2 <= self.max.2
            && self.eval_scale.is_finite();
        if ok {
            Ok(())
        } else {
            Err(RolloutError::InvalidConfig(format!(
                "command intervals must be ordered: {self:?}"
            )))
        }
    }

    fn draw<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> f64 {
        if range.0 == range.1 {
            range.0
        } else {
            rng.random_range(range.0..=range.1)
        }
    }

    /// Training draw: componentwise uniform in the intervals.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        (
            Self::draw((self.min.0, self.max.0), rng),
            Self::draw((self.min.1, self.max.1), rng),
            Self::draw((self.min.2, self.max.2), rng),
        )
    }

    /// Evaluation draw: training draw scaled by `eval_scale`.
    pub fn sample_eval<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let (x, y, w) = self.sample(rng);
        (
            x * self.eval_scale,
            y * self.eval_scale,
            w * self.eval_scale,
        )
    }
}

/// The step index at which the episode's command is redrawn; uniform over
/// the episode.
pub fn resample_event<R: Rng + ?Sized>(rng: &mut R, episode_length: usize) -> usize {
    rng.random_range(0..episode_length.max(1))
}

/// Ranges for randomly timed base pushes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSchedule {
    /// Push force magnitude range in newtons.
    pub magnitude: (f64, f64),
    /// Push duration range in seconds.
    pub duration: (f64, f64),
    /// Wait between pushes in seconds.
    pub wait: (f64, f64),
}

impl Default for PerturbationSchedule {
    fn default() -> Self {
        Self {
            magnitude: (7.5, 30.0),
            duration: (0.1, 0.3),
            wait: (2.0, 5.0),
        }
    }
}

impl PerturbationSchedule {
    pub fn validate(&self) -> Result<(), RolloutError> {
        let ordered = |r: (f64, f64)| r.0 <= r.1 && r.0 >= 0.0;
        if ordered(self.magnitude) && ordered(self.duration) && ordered(self.wait) {
            Ok(())
        } else {
            Err(RolloutError::InvalidConfig(format!(
                "perturbation ranges must be ordered and non-negative: {self:?}"
            )))
        }
    }
}

/// One realized push: a planar force applied for a step window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Push {
    pub start_step: usize,
    pub duration_steps: usize,
    /// World-frame force (x, y) in newtons.
    pub force: (f64, f64),
}

fn draw_range<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.random_range(range.0..=range.1)
    }
}

/// Lay out pushes over an episode: wait, push, wait, push, until the
/// horizon runs out. Directions are uniform on the circle.
pub fn sample_pushes<R: Rng + ?Sized>(
    schedule: &PerturbationSchedule,
    episode_length: usize,
    dt: f64,
    rng: &mut R,
) -> Vec<Push> {
    let mut pushes = Vec::new();
    let horizon = episode_length as f64 * dt;
    let mut t = draw_range(schedule.wait, rng);
    while t < horizon {
        let duration = draw_range(schedule.duration, rng).max(dt);
        let magnitude = draw_range(schedule.magnitude, rng);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        pushes.push(Push {
            start_step: (t / dt) as usize,
            duration_steps: ((duration / dt).ceil() as usize).max(1),
            force: (magnitude * angle.cos(), magnitude * angle.sin()),
        });
        t += duration + draw_range(schedule.wait, rng);
    }
    pushes
}

/// Per-block standard deviations for sensor noise. Command and frequency
/// blocks are policy inputs, not sensors, and are never noised.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservationNoise {
    pub ang_vel: f64,
    pub gravity: f64,
    pub joint_pos: f64,
    pub joint_vel: f64,
    pub phase: f64,
    pub heightmap: f64,
    pub prev_action: f64,
}

impl Default for ObservationNoise {
    fn default() -> Self {
        Self {
            ang_vel: 0.0,
            gravity: 0.0,
            joint_pos: 0.0,
            joint_vel: 0.0,
            phase: 0.0,
            heightmap: 0.0,
            prev_action: 0.0,
        }
    }
}

impl ObservationNoise {
    pub fn validate(&self) -> Result<(), RolloutError> {
        let stds = [
            self.ang_vel,
            self.gravity,
            self.joint_pos,
            self.joint_vel,
            self.phase,
            self.heightmap,
            self.prev_action,
        ];
        if stds.iter().all(|&s| s >= 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(RolloutError::InvalidConfig(format!(
                "noise stds must be non-negative: {self:?}"
            )))
        }
    }
}

/// Ranges for physical parameter randomization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainRandomization {
    pub noise: ObservationNoise,
    pub mass_scale: (f64, f64),
    /// Additive perturbation applied per joint to the default pose.
    pub default_pose_offset: (f64, f64),
    pub kp_scale: (f64, f64),
    pub kd_scale: (f64, f64),
    pub friction: (f64, f64),
}

impl Default for DomainRandomization {
    fn default() -> Self {
        Self {
            noise: ObservationNoise::default(),
            mass_scale: (1.0, 1.0),
            default_pose_offset: (0.0, 0.0),
            kp_scale: (1.0, 1.0),
            kd_scale: (1.0, 1.0),
            friction: (0.6, 0.6),
        }
    }
}

impl DomainRandomization {
    pub fn validate(&self) -> Result<(), RolloutError> {
        self.noise.validate()?;
        let ordered = |r: (f64, f64)| r.0 <= r.1;
        if ordered(self.mass_scale)
            && ordered(self.default_pose_offset)
            && ordered(self.kp_scale)
            && ordered(self.kd_scale)
            && ordered(self.friction)
        {
            Ok(())
        } else {
            Err(RolloutError::InvalidConfig(format!(
                "randomization ranges must be ordered: {self:?}"
            )))
        }
    }
}

/// One drawn physical parameter set, for export to external simulators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizedRandomization {
    pub mass: f64,
    pub default_pose: [f64; JOINT_COUNT],
    pub kp: f64,
    pub kd: f64,
    pub friction: f64,
}

/// Draw one parameter set uniformly from the configured ranges.
pub fn sample_randomization<R: Rng + ?Sized>(
    dr: &DomainRandomization,
    model: &RobotModel,
    rng: &mut R,
) -> RealizedRandomization {
    RealizedRandomization {
        mass: model.mass * draw_range(dr.mass_scale, rng),
        default_pose: std::array::from_fn(|j| {
            model.default_pose[j] + draw_range(dr.default_pose_offset, rng)
        }),
        kp: model.kp * draw_range(dr.kp_scale, rng),
        kd: model.kd * draw_range(dr.kd_scale, rng),
        friction: draw_range(dr.friction, rng),
    }
}

/// Additive Gaussian noise on a slice, one shared std.
pub(crate) fn add_noise<R: Rng + ?Sized>(values: &mut [f64], std: f64, rng: &mut R) {
    if std == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, std).expect("validated std");
    for v in values.iter_mut() {
        *v += normal.sample(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_intervals_return_exact_values() {
        let sampler = CommandSampler {
            min: (0.0, 0.0, 0.0),
            max: (0.0, 0.0, 0.0),
            eval_scale: 0.7,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sampler.sample(&mut rng), (0.0, 0.0, 0.0));
    }

    #[test]
    fn command_means_are_centered() {
        let sampler = CommandSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut sums = (0.0, 0.0, 0.0);
        let n = 100_000;
        for _ in 0..n {
            let c = sampler.sample(&mut rng);
            sums.0 += c.0;
            sums.1 += c.1;
            sums.2 += c.2;
        }
        for mean in [sums.0, sums.1, sums.2].map(|s| s / n as f64) {
            assert!(mean.abs() <= 0.01, "mean {mean}");
        }
    }

    #[test]
    fn evaluation_draws_are_scaled() {
        let sampler = CommandSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let c = sampler.sample_eval(&mut rng);
            assert!(c.0.abs() <= 0.7 && c.1.abs() <= 0.7 && c.2.abs() <= 0.7);
        }
    }

    #[test]
    fn resample_index_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(resample_event(&mut rng, 1), 0);
        let mut counts = [0usize; 100];
        let n = 100_000;
        for _ in 0..n {
            counts[resample_event(&mut rng, 100)] += 1;
        }
        // Binomial(10^5, 0.01): sigma ~= 31.5. 4 sigma keeps the chance
        // of any of the 100 bins tripping far below one in a thousand.
        let expected = n as f64 / 100.0;
        let sigma = (n as f64 * 0.01 * 0.99).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() <= 4.0 * sigma,
                "index {i}: {c} draws"
            );
        }
    }

    #[test]
    fn pushes_fit_schedule_ranges() {
        let schedule = PerturbationSchedule::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let pushes = sample_pushes(&schedule, 3000, 0.02, &mut rng);
            assert!(!pushes.is_empty());
            for p in &pushes {
                let mag = (p.force.0.powi(2) + p.force.1.powi(2)).sqrt();
                assert!((7.5..=30.0 + 1e-9).contains(&mag), "magnitude {mag}");
                assert!(p.start_step < 3000);
                assert!(p.duration_steps >= 1);
            }
            for pair in pushes.windows(2) {
                assert!(pair[0].start_step + pair[0].duration_steps <= pair[1].start_step);
            }
        }
    }

    #[test]
    fn randomization_respects_ranges_and_seeds() {
        let model = RobotModel::go2_like();
        let dr = DomainRandomization {
            mass_scale: (0.8, 1.2),
            default_pose_offset: (-0.05, 0.05),
            kp_scale: (0.9, 1.1),
            kd_scale: (0.9, 1.1),
            friction: (0.4, 1.0),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let r = sample_randomization(&dr, &model, &mut rng);
            assert!(r.mass >= model.mass * 0.8 && r.mass <= model.mass * 1.2);
            assert!(r.kp >= 54.0 && r.kp <= 66.0);
            assert!(r.friction >= 0.4 && r.friction <= 1.0);
            for j in 0..JOINT_COUNT {
                assert!((r.default_pose[j] - model.default_pose[j]).abs() <= 0.05 + 1e-12);
            }
        }
        let a = sample_randomization(&dr, &model, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_randomization(&dr, &model, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_randomization_is_nominal() {
        let model = RobotModel::go2_like();
        let dr = DomainRandomization::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = sample_randomization(&dr, &model, &mut rng);
        assert_eq!(r.mass, model.mass);
        assert_eq!(r.default_pose, model.default_pose);
        assert_eq!(r.kp, model.kp);
        assert_eq!(r.kd, model.kd);
    }
}
