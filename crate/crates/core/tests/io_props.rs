use proptest::prelude::*;
use terrace_core::io::{read_snapshots_ndjson, write_snapshots_ndjson};
use terrace_core::pdesim::Snapshot;

fn snapshot() -> impl Strategy<Value = Snapshot> {
    (1usize..3, 2usize..40, -1e3f64..1e3, 1e-4f64..1.0, 0.0f64..1e4).prop_flat_map(|(n, len, x0, dx, t)| {
        (
            prop::collection::vec(prop::num::f64::NORMAL, n * len),
            prop::collection::vec(prop::num::f64::NORMAL, n * len),
        )
            .prop_map(move |(u, ut)| Snapshot { t, x0, dx, n, u, ut })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshots_round_trip_bit_exact(snaps in prop::collection::vec(snapshot(), 1..5)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.ndjson");
        write_snapshots_ndjson(&p, &snaps).unwrap();
        let back = read_snapshots_ndjson(&p).unwrap();
        prop_assert_eq!(back, snaps);
    }
}
