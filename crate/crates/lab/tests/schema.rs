use std::collections::BTreeSet;

use serde_json::Value;
use silt_lab::{Command, RunConfig};

#[test]
fn shipped_schema_lists_every_config_field() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/config.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let documented: BTreeSet<&str> = schema["properties"]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    let config = serde_json::to_value(RunConfig::defaults(Command::Tails)).unwrap();
    let actual: BTreeSet<&str> = config.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(documented, actual);
    let commands: Vec<&str> = schema["properties"]["command"]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(commands.len(), 10);
    for c in commands {
        assert!(serde_json::from_value::<Command>(Value::String(c.into())).is_ok(), "{c}");
    }
}
