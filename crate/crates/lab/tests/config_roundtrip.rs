use proptest::prelude::*;
use silt_lab::{Command, RunConfig};

fn command() -> impl Strategy<Value = Command> {
    prop::sample::select(vec![
        Command::Gn,
        Command::Beta,
        Command::Alpha,
        Command::DecompCheck,
        Command::IdentityCheck,
        Command::OccSup,
        Command::Cn,
        Command::Lil,
    ])
}

proptest! {
    #[test]
    fn canonical_json_round_trips(
        cmd in command(),
        seed in any::<u64>(),
        dt in 1e-4f64..0.1,
        ratio in 4.0f64..50.0,
        replicas in 1u64..1_000_000,
        horizon in 0.1f64..100.0,
        threads in prop::option::of(1usize..64),
        thresholds in prop::option::of(prop::collection::btree_set(-1000i32..1000, 1..10)),
    ) {
        let mut c = RunConfig::defaults(cmd);
        c.seed = seed;
        c.dt = dt;
        c.eps = dt * ratio;
        c.replicas = replicas;
        c.horizon = horizon;
        c.threads = threads;
        c.thresholds = thresholds.map(|s| s.into_iter().map(|k| f64::from(k) / 7.0).collect());
        let text = c.to_canonical_json().unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_canonical_json().unwrap(), text);
        prop_assert_eq!(back.fingerprint().unwrap(), c.fingerprint().unwrap());
    }
}
