use serde::{Deserialize, Serialize};

use super::{decompose_path, FormationPath, TreeStats};
use crate::formation::FormationState;

/// Serialized plan. Holds nothing time-dependent, so identical inputs give
/// identical bytes; wall-clock figures live in [`PlanTiming`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub config_hash: String,
    pub seed: u64,
    pub rope_length: f64,
    pub states: Vec<FormationState>,
    pub waypoints_uav1: Vec<[f64; 3]>,
    pub waypoints_uav2: Vec<[f64; 3]>,
    pub raw_path_length: f64,
    pub path_length: f64,
    pub tree: TreeStats,
}

impl PlanDocument {
    pub fn new(
        config_hash: String,
        seed: u64,
        rope_length: f64,
        path: &FormationPath,
        raw_path_length: f64,
        path_length: f64,
        tree: TreeStats,
    ) -> Self {
        let (w1, w2) = decompose_path(path);
        let arr = |p: &nalgebra::Point3<f64>| [p.x, p.y, p.z];
        Self {
            config_hash,
            seed,
            rope_length,
            states: path.states.clone(),
            waypoints_uav1: w1.iter().map(arr).collect(),
            waypoints_uav2: w2.iter().map(arr).collect(),
            raw_path_length,
            path_length,
            tree,
        }
    }

    pub fn path(&self) -> FormationPath {
        FormationPath {
            states: self.states.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan document serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Wall-clock report of one planning run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanTiming {
    pub config_hash: String,
    pub load_s: f64,
    pub plan_s: f64,
    pub simplify_s: f64,
    pub total_s: f64,
    pub validity_checks: usize,
    pub mean_check_us: f64,
    pub environment_triangles: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    #[test]
    fn json_round_trip() {
        let path = FormationPath {
            states: vec![
                FormationState::new(Point3::new(0.1, 0.2, 1.3), 0.25, 0.9, -0.1),
                FormationState::new(Point3::new(1.0 / 3.0, -0.7, 1.1), -3.0, 1.1, 0.4),
            ],
        };
        let doc = PlanDocument::new("abc".into(), 7, 1.5, &path, 2.5, 1.2, TreeStats::default());
        let text = doc.to_json();
        let back = PlanDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), text);
        assert_eq!(back.waypoints_uav1.len(), 2);
    }
}
