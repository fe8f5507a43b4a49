use proptest::test_runner::{Config, RngSeed};

/// Fixed-seed proptest configuration so every run sees the same cases.
pub fn config(cases: u32) -> Config {
    Config { cases, failure_persistence: None, rng_seed: RngSeed::Fixed(0x5eed), ..Config::default() }
}
