use std::io::{Read, Write};

use crate::{OmegaSchedule, PrioritySpec, ReplayBuffer, ReplayError, Strategy, Transition};

/// File magic of the buffer format.
pub const MAGIC: [u8; 4] = *b"RPBF";
/// Current format version.
pub const FORMAT_VERSION: u32 = 1;

/// Parsed header of a buffer file. All integers little-endian.
///
/// Layout: magic `RPBF`, u32 version, u8 strategy tag, u32 state_dim,
/// u32 action_count, u64 count, u64 capacity, env-id string (u32 length +
/// UTF-8 bytes); then `count` fixed-size transition records of
/// `f32 state[state_dim], u32 action, f32 reward, f32 next_state[state_dim],
/// u8 done, u32 episode_id, u32 step`.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferHeader {
    pub version: u32,
    pub strategy: Strategy,
    pub state_dim: u32,
    pub action_count: u32,
    pub count: u64,
    pub capacity: u64,
    pub env_id: String,
}

fn put_u32(sink: &mut impl Write, v: u32) -> Result<(), ReplayError> {
    sink.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_u64(sink: &mut impl Write, v: u64) -> Result<(), ReplayError> {
    sink.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f32(sink: &mut impl Write, v: f32) -> Result<(), ReplayError> {
    sink.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_exact<const N: usize>(source: &mut impl Read) -> Result<[u8; N], ReplayError> {
    let mut buf = [0u8; N];
    source.read_exact(&mut buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            ReplayError::Truncated
        } else {
            ReplayError::Io(e)
        }
    })?;
    Ok(buf)
}

fn get_u32(source: &mut impl Read) -> Result<u32, ReplayError> {
    Ok(u32::from_le_bytes(get_exact::<4>(source)?))
}

fn get_u64(source: &mut impl Read) -> Result<u64, ReplayError> {
    Ok(u64::from_le_bytes(get_exact::<8>(source)?))
}

fn get_f32(source: &mut impl Read) -> Result<f32, ReplayError> {
    Ok(f32::from_le_bytes(get_exact::<4>(source)?))
}

/// Write the buffer to `sink`. Transitions go out oldest-to-newest, so a
/// serialize / deserialize / serialize chain is byte-identical. Goal vectors
/// are not part of the format.
pub fn serialize(buffer: &ReplayBuffer, sink: &mut impl Write) -> Result<(), ReplayError> {
    sink.write_all(&MAGIC)?;
    put_u32(sink, FORMAT_VERSION)?;
    sink.write_all(&[buffer.strategy().tag()])?;
    put_u32(sink, buffer.state_dim() as u32)?;
    put_u32(sink, buffer.action_count() as u32)?;
    put_u64(sink, buffer.len() as u64)?;
    put_u64(sink, buffer.capacity() as u64)?;
    let env_id = buffer.env_id().as_bytes();
    put_u32(sink, env_id.len() as u32)?;
    sink.write_all(env_id)?;
    for t in buffer.iter_in_order() {
        debug_assert_eq!(t.state.len(), buffer.state_dim());
        for &v in &t.state {
            put_f32(sink, v)?;
        }
        put_u32(sink, t.action)?;
        put_f32(sink, t.reward)?;
        for &v in &t.next_state {
            put_f32(sink, v)?;
        }
        sink.write_all(&[u8::from(t.done)])?;
        put_u32(sink, t.episode_id)?;
        put_u32(sink, t.step_in_episode)?;
    }
    Ok(())
}

pub fn read_header(source: &mut impl Read) -> Result<BufferHeader, ReplayError> {
    let magic = get_exact::<4>(source)?;
    if magic != MAGIC {
        return Err(ReplayError::BadMagic);
    }
    let version = get_u32(source)?;
    if version != FORMAT_VERSION {
        return Err(ReplayError::BadVersion(version));
    }
    let tag = get_exact::<1>(source)?[0];
    let strategy = Strategy::from_tag(tag).ok_or(ReplayError::BadStrategyTag(tag))?;
    let state_dim = get_u32(source)?;
    let action_count = get_u32(source)?;
    let count = get_u64(source)?;
    let capacity = get_u64(source)?;
    let len = get_u32(source)? as usize;
    let mut raw = vec![0u8; len];
    source.read_exact(&mut raw).map_err(|_| ReplayError::Truncated)?;
    let env_id = String::from_utf8(raw).map_err(|_| ReplayError::Truncated)?;
    Ok(BufferHeader { version, strategy, state_dim, action_count, count, capacity, env_id })
}

/// Reconstruct a buffer. `spec`/`schedule` are runtime knobs, not part of the
/// stored format; pass the ones the loading experiment runs with.
pub fn deserialize(
    source: &mut impl Read,
    spec: PrioritySpec,
    schedule: Option<OmegaSchedule>,
) -> Result<ReplayBuffer, ReplayError> {
    let header = read_header(source)?;
    let mut buffer = ReplayBuffer::new(
        header.strategy,
        header.capacity as usize,
        header.state_dim as usize,
        header.action_count as usize,
        header.env_id.clone(),
        spec,
        schedule,
    );
    for _ in 0..header.count {
        let mut state = Vec::with_capacity(header.state_dim as usize);
        for _ in 0..header.state_dim {
            state.push(get_f32(source)?);
        }
        let action = get_u32(source)?;
        let reward = get_f32(source)?;
        let mut next_state = Vec::with_capacity(header.state_dim as usize);
        for _ in 0..header.state_dim {
            next_state.push(get_f32(source)?);
        }
        let done = get_exact::<1>(source)?[0] != 0;
        let episode_id = get_u32(source)?;
        let step = get_u32(source)?;
        buffer.insert(Transition::new(state, action, reward, next_state, done, episode_id, step));
    }
    Ok(buffer)
}

/// Deserialize and reject buffers recorded for a different observation or
/// action space than the loading environment.
pub fn deserialize_for_env(
    source: &mut impl Read,
    expected_state_dim: usize,
    expected_action_count: usize,
    spec: PrioritySpec,
    schedule: Option<OmegaSchedule>,
) -> Result<ReplayBuffer, ReplayError> {
    let buffer = deserialize(source, spec, schedule)?;
    if buffer.state_dim() != expected_state_dim {
        return Err(ReplayError::StateDimMismatch {
            file: buffer.state_dim() as u32,
            expected: expected_state_dim as u32,
        });
    }
    if buffer.action_count() != expected_action_count {
        return Err(ReplayError::ActionCountMismatch {
            file: buffer.action_count() as u32,
            expected: expected_action_count as u32,
        });
    }
    Ok(buffer)
}
