#![allow(dead_code)]

use std::path::PathBuf;
use toricgw::compactify::{validate_compactification, CompactifiedData, Disk};
use toricgw::{kernel_data, parse_stacky_fan, StackyFan, ToricData};

pub fn fan_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fans").join(format!("{name}.json"))
}

pub fn fan(name: &str) -> StackyFan {
    parse_stacky_fan(&std::fs::read_to_string(fan_path(name)).unwrap()).unwrap()
}

pub fn data(name: &str) -> ToricData {
    kernel_data(&fan(name)).unwrap()
}

pub fn compactified(name: &str, disk: Disk) -> CompactifiedData {
    validate_compactification(&data(name), &fan(&format!("{name}_bar")), disk).unwrap()
}

pub fn q(n: i64) -> toricgw::Q {
    toricgw::rational::q(n)
}

pub fn frac(n: i64, d: i64) -> toricgw::Q {
    toricgw::rational::frac(n, d)
}

pub fn qs(xs: &[(i64, i64)]) -> Vec<toricgw::Q> {
    xs.iter().map(|&(n, d)| frac(n, d)).collect()
}

pub fn ints(xs: &[i64]) -> Vec<toricgw::Q> {
    xs.iter().map(|&n| q(n)).collect()
}
