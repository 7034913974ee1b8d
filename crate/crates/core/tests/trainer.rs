use leaper_core::env::{EnvConfig, Layout};
use leaper_core::physics::WorldState;
use leaper_core::planner::{plan, PlannerConfig};
use leaper_core::rl::DdpgConfig;
use leaper_core::rng::{stream, Stream};
use leaper_core::trainer::*;
use leaper_core::{ModelKind, SE2Pose, TrainError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reduced() -> Layout {
    Layout::builtin("reduced").unwrap()
}

fn planned_states(layout: &Layout) -> Vec<WorldState> {
    let params = layout.nominal_params();
    let cfg = PlannerConfig {
        model: ModelKind::Weld,
        ..PlannerConfig::default()
    };
    let mut rng = stream(1, Stream::Planner);
    let (traj, _) = plan(layout, &layout.start, &layout.goal, &cfg, &params, 1, &mut rng).unwrap();
    traj.dense_states(&layout.scene, &params).unwrap()
}

fn tiny_config(episodes: usize) -> TrainConfig {
    TrainConfig {
        episodes,
        eval_interval: 5,
        eval_episodes: 2,
        updates_per_episode: 4,
        agent: DdpgConfig {
            hidden: vec![16, 16],
            batch_size: 32,
            lr_actor: 1e-3,
            lr_critic: 1e-3,
            ..DdpgConfig::default()
        },
        ..TrainConfig::default()
    }
}

#[test]
fn zero_alpha_always_resets_to_start() {
    let layout = reduced();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..200 {
        let (s, k) = sample_initial_state(&ResetMix::planned(0.0), &layout, None, &mut rng).unwrap();
        assert_eq!(k, ResetKind::Start);
        assert_eq!(s, layout.start);
    }
}

#[test]
fn full_alpha_samples_trajectory_states_uniformly() {
    let layout = reduced();
    let states: Vec<WorldState> = (0..8)
        .map(|i| {
            WorldState::at_rest(
                SE2Pose::new(-0.3 + 0.05 * i as f64, -0.4, 0.0),
                vec![SE2Pose::new(-0.3 + 0.05 * i as f64, 0.2, 0.0)],
            )
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 10_000;
    let mut counts = [0usize; 8];
    for _ in 0..n {
        let (s, k) = sample_initial_state(&ResetMix::planned(1.0), &layout, Some(&states), &mut rng).unwrap();
        assert_eq!(k, ResetKind::Planned);
        counts[states.iter().position(|x| *x == s).unwrap()] += 1;
    }
    let p = 1.0 / 8.0;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn planned_resets_are_free_and_at_rest() {
    let layout = reduced();
    let mut states = planned_states(&layout);
    for s in &mut states {
        s.object_twists[0].vx = 0.3;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let (s, _) = sample_initial_state(&ResetMix::planned(1.0), &layout, Some(&states), &mut rng).unwrap();
        assert!(layout.scene.is_free(&s));
        assert!(s.object_twists.iter().all(|t| t.is_zero()));
        assert!(s.robot_twist.is_zero());
    }
}

#[test]
fn colliding_planned_state_is_jittered_or_replaced() {
    let layout = reduced();
    // Robot overlapping the object by half a millimetre.
    let bad = WorldState::at_rest(SE2Pose::new(0.0, -0.2295, 0.0), vec![SE2Pose::new(0.0, -0.15, 0.0)]);
    assert!(!layout.scene.is_free(&bad));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut jittered = 0;
    for _ in 0..100 {
        let (s, k) = sample_initial_state(&ResetMix::planned(1.0), &layout, Some(std::slice::from_ref(&bad)), &mut rng).unwrap();
        assert!(layout.scene.is_free(&s));
        if k == ResetKind::Planned {
            jittered += 1;
            assert!((s.robot_pose.y - bad.robot_pose.y).abs() <= RESET_JITTER);
        } else {
            assert_eq!(s, layout.start);
        }
    }
    assert!(jittered > 0);
}

#[test]
fn planned_reset_without_trajectory_is_an_error() {
    let layout = reduced();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    assert!(matches!(
        sample_initial_state(&ResetMix::planned(1.0), &layout, None, &mut rng),
        Err(TrainError::MissingTrajectory)
    ));
    let env = EnvConfig::for_layout(&layout);
    let cfg = TrainConfig {
        reset: ResetMix::planned(0.5),
        ..tiny_config(5)
    };
    assert!(matches!(
        train(&layout, &env, &cfg, None, 0, "x", &mut |_| {}),
        Err(TrainError::MissingTrajectory)
    ));
}

#[test]
fn mix_validation() {
    assert!(ResetMix::planned(0.5).validate().is_ok());
    let bad = ResetMix {
        start: 0.7,
        ..ResetMix::planned(0.5)
    };
    assert!(bad.validate().is_err());
    assert!(ResetMix::planned(1.5).validate().is_err());
}

#[test]
fn zero_budget_gives_empty_curve() {
    let layout = reduced();
    let env = EnvConfig::for_layout(&layout);
    let out = train(&layout, &env, &tiny_config(0), None, 3, "x", &mut |_| {}).unwrap();
    assert!(out.curve.points.is_empty());
    assert_eq!(out.episodes_run, 0);
}

#[test]
fn training_is_deterministic_and_curves_are_well_formed() {
    let layout = reduced();
    let planned = planned_states(&layout);
    let env = EnvConfig::for_layout(&layout);
    let cfg = TrainConfig {
        reset: ResetMix::planned(0.5),
        ..tiny_config(10)
    };
    let a = train(&layout, &env, &cfg, Some(&planned), 9, "x", &mut |_| {}).unwrap();
    let b = train(&layout, &env, &cfg, Some(&planned), 9, "x", &mut |_| {}).unwrap();
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.agent, b.agent);
    assert_eq!(a.curve.points.len(), 2);
    assert!(a.curve.points.windows(2).all(|w| w[0].episode < w[1].episode));
    assert!(a.curve.points.iter().all(|p| (0.0..=1.0).contains(&p.success_rate)));
    assert!(a.reset_counts[ResetKind::Planned as usize] > 0);
}

#[test]
fn zero_alpha_matches_start_only_training() {
    let layout = reduced();
    let planned = planned_states(&layout);
    let env = EnvConfig::for_layout(&layout);
    let her = train(&layout, &env, &tiny_config(10), None, 5, "x", &mut |_| {}).unwrap();
    let cfg = TrainConfig {
        reset: ResetMix::planned(0.0),
        ..tiny_config(10)
    };
    let leaper = train(&layout, &env, &cfg, Some(&planned), 5, "x", &mut |_| {}).unwrap();
    assert_eq!(her.curve, leaper.curve);
    assert_eq!(her.agent, leaper.agent);
}

fn straight_layout() -> Layout {
    let text = r#"
schema = 1
name = "straight"
episode_len = 30

[table]
half_x = 0.5
half_y = 0.5

[robot]
kind = "box"
half_w = 0.08
half_h = 0.04
pose = [0.0, -0.3, 0.0]

[[objects]]
kind = "box"
half_w = 0.04
half_h = 0.04
pose = [0.0, -0.15, 0.0]

[goal]
x = 0.0
y = 0.15
radius = 0.05
"#;
    Layout::from_toml_str(text).unwrap()
}

#[test]
fn scripted_straight_push_always_succeeds() {
    let layout = straight_layout();
    let mut env = leaper_core::env::RearrangeEnv::new(layout.clone(), EnvConfig::for_layout(&layout)).unwrap();
    let goal_y = layout.goal.y;
    // Push straight ahead until the observed target is level with the goal.
    let mut scripted = |obs: &[f64], _: &[f64], _: usize| {
        let push = if obs[5] < goal_y - 0.02 { 1.0 } else { 0.0 };
        vec![0.0, push, 0.0]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    assert_eq!(evaluate(&mut scripted, &mut env, 20, &mut rng), 1.0);
}

#[test]
fn idle_policy_never_succeeds_and_single_episode_is_binary() {
    let layout = reduced();
    let mut env = leaper_core::env::RearrangeEnv::new(layout.clone(), EnvConfig::for_layout(&layout)).unwrap();
    let mut idle = |_: &[f64], _: &[f64], _: usize| vec![0.0; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    assert_eq!(evaluate(&mut idle, &mut env, 10, &mut rng), 0.0);
    let mut forward = |_: &[f64], _: &[f64], _: usize| vec![0.3, 1.0, 0.0];
    let r = evaluate(&mut forward, &mut env, 1, &mut rng);
    assert!(r == 0.0 || r == 1.0);
}

fn curve(points: &[(usize, f64)]) -> LearningCurve {
    LearningCurve {
        seed: 0,
        config_id: "c".into(),
        points: points
            .iter()
            .map(|&(episode, success_rate)| CurvePoint { episode, success_rate })
            .collect(),
    }
}

#[test]
fn threshold_summaries() {
    let single = episodes_to_threshold(&[curve(&[(250, 0.5), (500, 0.85), (750, 0.7)])], 0.8);
    assert_eq!(single.median, 500.0);
    let never = episodes_to_threshold(&[curve(&[(250, 0.1), (500, 0.2)])], 0.8);
    assert!(never.median.is_infinite());
    assert_eq!(format_episodes(never.median), "not reached");
    let three = [
        curve(&[(100, 0.9)]),
        curve(&[(100, 0.1), (200, 0.8)]),
        curve(&[(100, 0.0), (200, 0.5), (300, 1.0)]),
    ];
    let s = episodes_to_threshold(&three, 0.8);
    assert_eq!(s.median, 200.0);
    assert!((s.p20 - 140.0).abs() < 1e-12);
    assert!((s.p80 - 260.0).abs() < 1e-12);
}

#[test]
fn kl_closed_forms() {
    let p = [0.2, 0.3, 0.5];
    assert_eq!(kl_divergence(&p, &p, KL_SMOOTHING), 0.0);
    let kl = kl_divergence(&[0.9, 0.1], &[0.5, 0.5], 0.0);
    let expect = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
    assert!((kl - expect).abs() < 1e-12);
    assert!((kl - 0.368).abs() < 1e-3);
}
