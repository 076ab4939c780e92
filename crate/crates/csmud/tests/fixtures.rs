//! Golden-fixture tests: the JSON frame schema and the generator's RNG
//! stream are both load-bearing interfaces, so a frozen fixture guards them.

use csmud::{FrameInstance, Modulation, RandomStream, SystemConfig};

const FIXTURE: &str = include_str!("data/frame_fixture.json");

fn fixture_cfg() -> SystemConfig {
    SystemConfig {
        k: 6,
        n: 4,
        j: 2,
        sparsity_range: (2, 2),
        modulation: Modulation::Qpsk,
        snr_db: 10.0,
        beta: 0.02,
        seed: 2026,
        sigma2_override: None,
    }
}

#[test]
fn generator_reproduces_the_frozen_fixture() {
    let cfg = fixture_cfg();
    let frame = FrameInstance::generate(&cfg, &mut RandomStream::new(cfg.seed)).unwrap();
    let stored = FrameInstance::from_json(FIXTURE).unwrap();
    assert_eq!(frame, stored);
}

#[test]
fn fixture_schema_has_documented_shape() {
    let value: serde_json::Value = serde_json::from_str(FIXTURE).unwrap();
    let obj = value.as_object().unwrap();
    for key in [
        "spreading",
        "channel",
        "equivalent",
        "gamma_true",
        "symbols",
        "received",
        "sigma2",
    ] {
        assert!(obj.contains_key(key), "missing key {key}");
    }
    // complex entries are [re, im] pairs
    let entry = &value["spreading"]["data"][0];
    assert_eq!(entry.as_array().unwrap().len(), 2);
    assert!(entry[0].is_f64() || entry[0].is_i64());
    // drifting channel stores one matrix per slot
    assert_eq!(value["channel"].as_array().unwrap().len(), 2);
    assert_eq!(value["spreading"]["rows"], 4);
    assert_eq!(value["spreading"]["cols"], 6);
}

#[test]
fn fixture_satisfies_model_invariants() {
    let frame = FrameInstance::from_json(FIXTURE).unwrap();
    // equivalent = slot-1 channel .* spreading, entrywise
    for row in 0..frame.n() {
        for col in 0..frame.k() {
            let expect = frame.channel[0][[row, col]] * frame.spreading[[row, col]];
            assert_eq!(frame.equivalent[[row, col]], expect);
        }
    }
    // joint sparsity: symbol rows nonzero exactly on the support, every slot
    assert_eq!(frame.support_of_symbols(), frame.gamma_true);
    for &k in &frame.gamma_true {
        for j in 0..frame.j() {
            assert!(frame.symbols[[k, j]].norm_sqr() > 0.0);
        }
    }
}
