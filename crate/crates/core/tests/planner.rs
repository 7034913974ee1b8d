use leaper_core::env::{Goal, Layout};
use leaper_core::geometry::{cstate_distance, SE2Pose, Twist2};
use leaper_core::physics::ModelKind;
use leaper_core::planner::{
    entity_weights, extend, nearest, plan, propagate, weighted_distance, PlannedTrajectory,
    PlannerConfig, Tree,
};
use leaper_core::PlanError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reduced() -> Layout {
    Layout::builtin("reduced").unwrap()
}

fn straight_push_layout() -> Layout {
    let text = include_str!("../layouts/reduced.toml")
        .replace("x = 0.1\ny = 0.15", "x = 0.0\ny = 0.0");
    Layout::from_toml_str(&text).unwrap()
}

fn replay_error(layout: &Layout, t: &PlannedTrajectory) -> f64 {
    let params = layout.nominal_params();
    let mut worst = 0.0f64;
    for i in 0..t.controls.len() {
        let s = propagate(
            &layout.scene,
            &t.states[i],
            &t.controls[i],
            t.durations[i],
            t.step_dt,
            t.model,
            &params,
        )
        .unwrap();
        worst = worst.max(s.max_pose_diff(&t.states[i + 1]));
    }
    worst
}

#[test]
fn start_in_goal_gives_single_state() {
    let l = reduced();
    let mut start = l.start.clone();
    start.object_poses[0] = SE2Pose::new(l.goal.x, l.goal.y, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (t, _) = plan(&l, &start, &l.goal, &PlannerConfig::default(), &l.nominal_params(), 0, &mut rng)
        .unwrap();
    assert_eq!(t.states.len(), 1);
    assert!(t.controls.is_empty());
}

#[test]
fn colliding_start_is_rejected() {
    let l = reduced();
    let mut start = l.start.clone();
    start.robot_pose = start.object_poses[0];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let r = plan(&l, &start, &l.goal, &PlannerConfig::default(), &l.nominal_params(), 0, &mut rng);
    assert!(matches!(r, Err(PlanError::StartInCollision(_))));
}

#[test]
fn exhaustion_reports_tree_statistics() {
    let l = reduced();
    let cfg = PlannerConfig {
        max_iterations: 3,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    match plan(&l, &l.start, &l.goal, &cfg, &l.nominal_params(), 0, &mut rng) {
        Err(PlanError::Exhausted { iterations, nodes, .. }) => {
            assert_eq!(iterations, 3);
            assert!((1..=4).contains(&nodes));
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
}

#[test]
fn plans_replay_exactly_and_reach_goal() {
    let l = reduced();
    for model in [ModelKind::Quasistatic, ModelKind::Weld] {
        for seed in 0..3 {
            let cfg = PlannerConfig {
                model,
                ..Default::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (t, _) = plan(&l, &l.start, &l.goal, &cfg, &l.nominal_params(), seed, &mut rng).unwrap();
            assert_eq!(t.states[0], l.start);
            assert!(replay_error(&l, &t) <= 1e-6);
            let end = t.states.last().unwrap().object_poses[0];
            assert!((end.x - l.goal.x).hypot(end.y - l.goal.y) < 0.05);
            for s in &t.states {
                assert!(l.scene.is_free(s) && l.scene.within_table(s));
            }
            // Only the final edge may be cut short on entering the goal.
            let (last, rest) = t.durations.split_last().unwrap();
            for d in rest {
                assert!((0.5 - 1e-9..=2.0 + 1e-9).contains(d));
            }
            assert!(*last > 0.0 && *last <= 2.0 + 1e-9);
            // Dense replay ends where the sparse one does.
            let dense = t.dense_states(&l.scene, &l.nominal_params()).unwrap();
            assert_eq!(dense.len(), t.step_controls().len() + 1);
            assert!(dense.last().unwrap().max_pose_diff(t.states.last().unwrap()) <= 1e-12);
        }
    }
}

#[test]
fn goal_biased_straight_push_is_fast() {
    let l = straight_push_layout();
    let cfg = PlannerConfig {
        goal_bias: 1.0,
        max_iterations: 100,
        ..Default::default()
    };
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        plan(&l, &l.start, &l.goal, &cfg, &l.nominal_params(), seed, &mut rng).unwrap();
    }
}

#[test]
fn planning_is_deterministic() {
    let l = Layout::builtin("1").unwrap();
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        plan(&l, &l.start, &l.goal, &PlannerConfig::default(), &l.nominal_params(), 11, &mut rng)
            .unwrap()
            .0
    };
    assert_eq!(run(), run());
}

#[test]
fn extend_without_candidates_is_rejected() {
    let l = reduced();
    let mut tree = Tree::new(l.start.clone());
    let cfg = PlannerConfig {
        num_controls: 0,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(extend(&mut tree, &l.scene, &l.start, None, &cfg, &l.nominal_params(), &mut rng).is_none());
    assert_eq!(tree.len(), 1);
}

#[test]
fn extension_is_a_recorded_propagation() {
    let l = Layout::builtin("2").unwrap();
    let cfg = PlannerConfig::default();
    let params = l.nominal_params();
    let mut tree = Tree::new(l.start.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let (q, _) = leaper_core::planner::sample_state(&l.scene, &l.goal, 0.1, &mut rng);
        if let Some(i) = extend(&mut tree, &l.scene, &q, None, &cfg, &params, &mut rng) {
            let n = &tree.nodes[i];
            let parent = &tree.nodes[n.parent.unwrap()];
            let again = propagate(&l.scene, &parent.state, &n.control, n.duration, cfg.step_dt, cfg.model, &params)
                .unwrap();
            assert_eq!(again, n.state);
        }
    }
    assert!(tree.len() > 10);
}

#[test]
fn extending_towards_existing_node_stays_within_one_step_reach() {
    let l = reduced();
    let cfg = PlannerConfig::default();
    let params = l.nominal_params();
    let mut tree = Tree::new(l.start.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let q = l.start.clone();
    let i = extend(&mut tree, &l.scene, &q, None, &cfg, &params, &mut rng).unwrap();
    // Farthest any candidate can move the robot: max speed for max duration.
    let reach = cfg.nn_weights.robot
        * (0.25f64.hypot(0.25) * 2.0 + cfg.angle_scale * std::f64::consts::PI)
        + cfg.nn_weights.target * (0.25f64.hypot(0.25) * 2.0 + cfg.angle_scale * std::f64::consts::PI);
    assert!(weighted_distance(&l.scene, &tree.nodes[i].state, &q, &cfg) <= reach);
    assert_eq!(nearest(&tree, &l.scene, &q, &cfg), 0);
}

#[test]
fn weighted_distance_matches_cstate_distance() {
    let l = Layout::builtin("1").unwrap();
    let cfg = PlannerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = entity_weights(&l.scene, &cfg.nn_weights);
    for _ in 0..100 {
        let (a, _) = leaper_core::planner::sample_state(&l.scene, &l.goal, 0.0, &mut rng);
        let (b, _) = leaper_core::planner::sample_state(&l.scene, &l.goal, 0.0, &mut rng);
        let d1 = weighted_distance(&l.scene, &a, &b, &cfg);
        let d2 = cstate_distance(&a.poses(), &b.poses(), &w, cfg.angle_scale).unwrap();
        assert!((d1 - d2).abs() < 1e-12);
    }
}

#[test]
fn propagate_basic_cases() {
    let l = Layout::builtin("2").unwrap();
    let params = l.nominal_params();
    let s = l.start.clone();
    let same = propagate(&l.scene, &s, &Twist2::ZERO, 1.0, 0.1, ModelKind::Quasistatic, &params).unwrap();
    assert_eq!(same, s);
    // Free translation sideways: nothing in the way.
    let u = Twist2::new(0.2, 0.0, 0.0);
    let moved = propagate(&l.scene, &s, &u, 1.0, 0.1, ModelKind::Quasistatic, &params).unwrap();
    assert!((moved.robot_pose.x - 0.2).abs() < 1e-12);
    assert_eq!(moved.object_poses, s.object_poses);
    // Robot placed below the wall and driven into it.
    let mut below = s.clone();
    below.robot_pose = SE2Pose::new(0.0, -0.03, 0.0);
    below.object_poses[0] = SE2Pose::new(-0.35, -0.35, 0.0);
    assert!(l.scene.is_free(&below));
    let r = propagate(&l.scene, &below, &Twist2::new(0.0, 0.2, 0.0), 1.0, 0.1, ModelKind::Quasistatic, &params);
    assert!(r.is_err());
    // Zero duration is invalid.
    assert!(propagate(&l.scene, &s, &u, 0.0, 0.1, ModelKind::Weld, &params).is_err());
}

#[test]
fn trajectory_file_round_trip() {
    let l = reduced();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = PlannerConfig {
        model: ModelKind::Weld,
        ..Default::default()
    };
    let (t, _) = plan(&l, &l.start, &l.goal, &cfg, &l.nominal_params(), 2, &mut rng).unwrap();
    let json = t.to_json();
    assert_eq!(PlannedTrajectory::from_json(&json).unwrap(), t);
    assert!(PlannedTrajectory::from_json(&json.replace("\"schema\": 1", "\"schema\": 9")).is_err());
    assert!(PlannedTrajectory::from_json("{").is_err());
    let mut short = t.clone();
    short.controls.pop();
    assert!(PlannedTrajectory::from_json(&short.to_json()).is_err());
    let g: Goal = t.goal;
    assert_eq!(g, l.goal);
}

