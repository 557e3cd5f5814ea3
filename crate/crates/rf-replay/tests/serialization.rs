//! Round-trip and guard tests for the binary buffer format.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rf_replay::{
    deserialize, deserialize_for_env, serialize, PrioritySpec, ReplayBuffer, ReplayError, Strategy,
    Transition, FORMAT_VERSION,
};

fn random_buffer(seed: u64, n: usize, state_dim: usize) -> ReplayBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = ReplayBuffer::new(
        Strategy::Per,
        n.next_power_of_two().max(8),
        state_dim,
        4,
        "env-compile/1q",
        PrioritySpec::default(),
        None,
    );
    let mut ep = 0u32;
    let mut step = 0u32;
    for _ in 0..n {
        step += 1;
        let done = rng.gen_bool(0.2);
        buf.insert(Transition::new(
            (0..state_dim).map(|_| rng.gen::<f32>()).collect(),
            rng.gen_range(0..4),
            rng.gen::<f32>() * 2.0 - 1.0,
            (0..state_dim).map(|_| rng.gen::<f32>()).collect(),
            done,
            ep,
            step,
        ));
        if done {
            ep += 1;
            step = 0;
        }
    }
    buf
}

#[test]
fn round_trip_is_identity_on_transitions() {
    let buf = random_buffer(1, 57, 8);
    let mut bytes = Vec::new();
    serialize(&buf, &mut bytes).unwrap();
    let loaded = deserialize(&mut bytes.as_slice(), PrioritySpec::default(), None).unwrap();
    assert_eq!(loaded.len(), buf.len());
    assert_eq!(loaded.state_dim(), 8);
    assert_eq!(loaded.action_count(), 4);
    assert_eq!(loaded.env_id(), "env-compile/1q");
    assert_eq!(loaded.strategy(), Strategy::Per);
    for (a, b) in buf.iter_in_order().zip(loaded.iter_in_order()) {
        assert_eq!(a, b);
    }
}

#[test]
fn serialize_deserialize_serialize_is_byte_identical() {
    let buf = random_buffer(2, 123, 6);
    let mut first = Vec::new();
    serialize(&buf, &mut first).unwrap();
    let loaded = deserialize(&mut first.as_slice(), PrioritySpec::default(), None).unwrap();
    let mut second = Vec::new();
    serialize(&loaded, &mut second).unwrap();
    assert_eq!(first, second);
}

#[test]
fn transfer_then_serialize_matches_source_transition_section() {
    let buf = random_buffer(3, 40, 5);
    let transferred = buf.transfer();
    let mut a = Vec::new();
    let mut b = Vec::new();
    serialize(&buf, &mut a).unwrap();
    serialize(&transferred, &mut b).unwrap();
    assert_eq!(a, b, "payload bytes must be unchanged by transfer");
}

#[test]
fn wrong_magic_is_rejected() {
    let buf = random_buffer(4, 5, 3);
    let mut bytes = Vec::new();
    serialize(&buf, &mut bytes).unwrap();
    bytes[0] = b'X';
    assert!(matches!(
        deserialize(&mut bytes.as_slice(), PrioritySpec::default(), None),
        Err(ReplayError::BadMagic)
    ));
}

#[test]
fn wrong_version_is_rejected() {
    let buf = random_buffer(5, 5, 3);
    let mut bytes = Vec::new();
    serialize(&buf, &mut bytes).unwrap();
    let bad = (FORMAT_VERSION + 7).to_le_bytes();
    bytes[4..8].copy_from_slice(&bad);
    assert!(matches!(
        deserialize(&mut bytes.as_slice(), PrioritySpec::default(), None),
        Err(ReplayError::BadVersion(_))
    ));
}

#[test]
fn truncated_stream_is_rejected() {
    let buf = random_buffer(6, 20, 4);
    let mut bytes = Vec::new();
    serialize(&buf, &mut bytes).unwrap();
    bytes.truncate(bytes.len() - 3);
    assert!(matches!(
        deserialize(&mut bytes.as_slice(), PrioritySpec::default(), None),
        Err(ReplayError::Truncated)
    ));
}

#[test]
fn dimension_guard_against_loading_env() {
    // a "1-qubit" buffer (state dim 8) must not load into a 2-qubit env (dim 32)
    let buf = random_buffer(7, 10, 8);
    let mut bytes = Vec::new();
    serialize(&buf, &mut bytes).unwrap();
    assert!(matches!(
        deserialize_for_env(&mut bytes.as_slice(), 32, 4, PrioritySpec::default(), None),
        Err(ReplayError::StateDimMismatch { file: 8, expected: 32 })
    ));
    assert!(matches!(
        deserialize_for_env(&mut bytes.as_slice(), 8, 6, PrioritySpec::default(), None),
        Err(ReplayError::ActionCountMismatch { file: 4, expected: 6 })
    ));
    assert!(deserialize_for_env(&mut bytes.as_slice(), 8, 4, PrioritySpec::default(), None).is_ok());
}

#[test]
fn file_round_trip_via_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("buffer.buf");
    let buf = random_buffer(8, 33, 4);
    let mut file = std::fs::File::create(&path).unwrap();
    serialize(&buf, &mut file).unwrap();
    drop(file);
    let mut file = std::fs::File::open(&path).unwrap();
    let loaded = deserialize(&mut file, PrioritySpec::default(), None).unwrap();
    assert_eq!(loaded.len(), 33);
    for (a, b) in buf.iter_in_order().zip(loaded.iter_in_order()) {
        assert_eq!(a, b);
    }
}
