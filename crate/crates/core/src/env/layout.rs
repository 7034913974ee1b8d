//! Scene layouts loaded from versioned TOML files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::EnvError;
use crate::geometry::{ConvexShape, EntityClass, SE2Pose, ShapeKind, FREE_TOLERANCE};
use crate::physics::{PhysicsParams, Scene, TableBounds, WorldState};

pub const LAYOUT_SCHEMA: u32 = 1;

const BUILTIN: [(&str, &str); 4] = [
    ("1", include_str!("../../layouts/layout1.toml")),
    ("2", include_str!("../../layouts/layout2.toml")),
    ("3", include_str!("../../layouts/layout3.toml")),
    ("reduced", include_str!("../../layouts/reduced.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    Box { half_w: f64, half_h: f64 },
    Disc { radius: f64 },
}

impl ShapeSpec {
    fn kind(&self) -> ShapeKind {
        match *self {
            ShapeSpec::Box { half_w, half_h } => ShapeKind::Box { half_w, half_h },
            ShapeSpec::Disc { radius } => ShapeKind::Disc { radius },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntitySpec {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    /// `[x, y, theta]`.
    pub pose: [f64; 3],
}

impl EntitySpec {
    fn pose(&self) -> SE2Pose {
        SE2Pose::new(self.pose[0], self.pose[1], self.pose[2])
    }
}

/// Goal disc for the target object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Goal {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl Goal {
    pub fn center(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Strict membership: distance below the radius.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.x).hypot(p[1] - self.y) < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    schema: u32,
    name: String,
    episode_len: usize,
    table: TableBounds,
    robot: EntitySpec,
    objects: Vec<EntitySpec>,
    #[serde(default)]
    obstacles: Vec<EntitySpec>,
    goal: Goal,
    #[serde(default)]
    target: usize,
}

/// A validated scene with its canonical start state and goal.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub name: String,
    pub episode_len: usize,
    pub scene: Scene,
    pub start: WorldState,
    pub goal: Goal,
}

impl Layout {
    /// One of the layouts shipped with the crate: `"1"`, `"2"`, `"3"`, or `"reduced"`.
    pub fn builtin(id: &str) -> Result<Layout, EnvError> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(k, _)| *k == id)
            .ok_or_else(|| EnvError::Layout(format!("unknown built-in layout '{id}'")))?;
        Layout::from_toml_str(text)
    }

    pub fn builtin_ids() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(k, _)| *k)
    }

    /// Loads a built-in id or, failing that, a file path.
    pub fn load(id_or_path: &str) -> Result<Layout, EnvError> {
        if BUILTIN.iter().any(|(k, _)| *k == id_or_path) {
            Layout::builtin(id_or_path)
        } else {
            Layout::from_path(Path::new(id_or_path))
        }
    }

    pub fn from_path(path: &Path) -> Result<Layout, EnvError> {
        let text = std::fs::read_to_string(path)?;
        Layout::from_toml_str(&text)
            .map_err(|e| EnvError::Layout(format!("{}: {e}", path.display())))
    }

    pub fn from_toml_str(text: &str) -> Result<Layout, EnvError> {
        let file: LayoutFile =
            toml::from_str(text).map_err(|e| EnvError::Layout(e.to_string()))?;
        if file.schema != LAYOUT_SCHEMA {
            return Err(EnvError::Layout(format!(
                "unsupported layout schema {} (expected {LAYOUT_SCHEMA})",
                file.schema
            )));
        }
        if file.objects.is_empty() {
            return Err(EnvError::Layout("layout needs at least one object".into()));
        }
        if file.target >= file.objects.len() {
            return Err(EnvError::Layout(format!(
                "target index {} out of range",
                file.target
            )));
        }
        if file.episode_len == 0 {
            return Err(EnvError::Layout("episode_len must be positive".into()));
        }
        if !(file.table.half_x > 0.0 && file.table.half_y > 0.0) {
            return Err(EnvError::Layout("table extents must be positive".into()));
        }
        if !(file.goal.radius > 0.0) {
            return Err(EnvError::Layout("goal radius must be positive".into()));
        }
        let goal_pose = SE2Pose::new(file.goal.x, file.goal.y, 0.0);
        if !file.table.contains(&goal_pose) {
            return Err(EnvError::Layout("goal lies outside the table".into()));
        }
        let robot = ConvexShape::new(file.robot.shape.kind(), EntityClass::Robot)?;
        let objects = file
            .objects
            .iter()
            .map(|e| ConvexShape::new(e.shape.kind(), EntityClass::Movable))
            .collect::<Result<Vec<_>, _>>()?;
        let obstacles = file
            .obstacles
            .iter()
            .map(|e| Ok((ConvexShape::new(e.shape.kind(), EntityClass::Obstacle)?, e.pose())))
            .collect::<Result<Vec<_>, EnvError>>()?;
        let scene = Scene {
            robot,
            objects,
            obstacles,
            table: file.table,
            target: file.target,
        };
        let start = WorldState::at_rest(
            file.robot.pose(),
            file.objects.iter().map(EntitySpec::pose).collect(),
        );
        if !scene.within_table(&start) {
            return Err(EnvError::Layout("start state leaves the table".into()));
        }
        scene
            .check_free(&start, FREE_TOLERANCE)
            .map_err(EnvError::InitialCollision)?;
        Ok(Layout {
            name: file.name,
            episode_len: file.episode_len,
            scene,
            start,
            goal: file.goal,
        })
    }

    /// Nominal physics with the pressure constant scaled to the target's half-width.
    pub fn nominal_params(&self) -> PhysicsParams {
        let half = match self.scene.objects[self.scene.target].kind {
            ShapeKind::Box { half_w, half_h } => half_w.min(half_h),
            ShapeKind::Disc { radius } => radius,
        };
        PhysicsParams::nominal(self.scene.num_objects(), half)
    }

    pub fn target_position(&self, state: &WorldState) -> [f64; 2] {
        let p = state.object_poses[self.scene.target];
        [p.x, p.y]
    }
}
