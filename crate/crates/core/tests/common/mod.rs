#![allow(dead_code)]

use std::path::PathBuf;

use frj::builtins::SensorScript;
use frj::runtime::Machine;
use frj::{check_source, Checked};

pub const POSITIVE: &[&str] = &[
    "person_call.frj",
    "person_frp.frj",
    "person_actor.frj",
    "fork_join.frj",
    "promotion.frj",
    "ac_controller.frj",
    "refcaps.frj",
    "order_sensitive.frj",
    "micro_head.frj",
    "micro_adder.frj",
];

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn source(file: &str) -> String {
    std::fs::read_to_string(root().join("corpus").join(file))
        .unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn warm3() -> SensorScript {
    std::fs::read_to_string(root().join("scripts/warm3.sensors"))
        .unwrap()
        .parse()
        .unwrap()
}

/// The script a corpus program runs with: the AC pipeline gets the warm
/// three-tick script, everything else none.
pub fn script_for(file: &str) -> SensorScript {
    if file == "ac_controller.frj" {
        warm3()
    } else {
        SensorScript::default()
    }
}

pub fn checked(file: &str) -> Checked {
    check_source(&source(file)).unwrap_or_else(|d| panic!("{file} rejected: {d:?}"))
}

pub fn machine(file: &str) -> (Checked, Machine) {
    let c = checked(file);
    let m = Machine::new(&c.program, script_for(file));
    (c, m)
}

/// Discomfort index, evaluated directly in f64.
pub fn discomfort_oracle(temp: f64, hum: f64) -> f64 {
    0.81 * temp + 0.01 * hum * (0.99 * temp - 14.3) + 46.3
}

/// Power states of a hysteresis controller that starts off: it switches
/// on at 75.5 while off and stays on down to 74.5.
pub fn hysteresis_oracle(discomfort: &[f64]) -> Vec<bool> {
    let mut on = false;
    discomfort
        .iter()
        .map(|&d| {
            on = d >= if on { 74.5 } else { 75.5 };
            on
        })
        .collect()
}
