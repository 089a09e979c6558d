//! The JSON files under `scenarios/` and `presets/` are generated from the
//! built-in builders. Set `NAVPLAN_UPDATE_SCENARIOS=1` to rewrite them.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use navplan::benchmarks;
use navplan::dynamics::PlantModel;
use navplan::sim::Scenario;
use navplan::vehicle::VehicleParams;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn updating() -> bool {
    std::env::var_os("NAVPLAN_UPDATE_SCENARIOS").is_some_and(|v| v == "1")
}

fn check(path: &Path, expected: &str) {
    if updating() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, expected).unwrap();
        return;
    }
    let found = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(found == expected, "{} is stale; rerun with NAVPLAN_UPDATE_SCENARIOS=1", path.display());
}

fn json_names(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".json"))
        .collect()
}

#[test]
fn scenario_files_match_builders() {
    let suite: Vec<Scenario> = benchmarks::safety_suite();
    let suite_names: BTreeSet<String> = suite.iter().map(|s| s.name.clone()).collect();
    let mut expected = (BTreeSet::new(), BTreeSet::new());
    for s in benchmarks::all() {
        let in_suite = suite_names.contains(&s.name);
        let dir = root().join("scenarios").join(if in_suite { "suite" } else { "extra" });
        let file = format!("{}.json", s.name);
        check(&dir.join(&file), &(s.to_json().unwrap() + "\n"));
        if in_suite { &mut expected.0 } else { &mut expected.1 }.insert(file);
    }
    assert_eq!(json_names(&root().join("scenarios/suite")), expected.0);
    assert_eq!(json_names(&root().join("scenarios/extra")), expected.1);
}

#[test]
fn scenario_files_parse_and_validate() {
    for dir in ["scenarios/suite", "scenarios/extra"] {
        for name in json_names(&root().join(dir)) {
            let s = Scenario::load(&root().join(dir).join(&name)).unwrap();
            s.validate().unwrap();
            assert_eq!(format!("{}.json", s.name), name);
        }
    }
}

#[test]
fn preset_files_match_builders() {
    for name in ["hatchback", "sports_car", "suv"] {
        let v = VehicleParams::preset(name).unwrap();
        let p = PlantModel::preset(name).unwrap();
        check(&root().join(format!("presets/{name}.vehicle.json")), &(serde_json::to_string_pretty(&v).unwrap() + "\n"));
        check(&root().join(format!("presets/{name}.plant.json")), &(serde_json::to_string_pretty(&p).unwrap() + "\n"));
    }
}
