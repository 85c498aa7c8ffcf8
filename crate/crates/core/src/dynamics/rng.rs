//! Counter-based random streams.
//!
//! Every random draw is addressed by (seed, ensemble, atom, channel): the
//! ChaCha key comes from the seed, the stream id from the ensemble, and the
//! word position from atom and channel. Results therefore do not depend on
//! which thread handles which atom or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes an atom draws random numbers for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Channel {
    Initial = 0,
    Recoil = 1,
    Image = 2,
}

/// Words reserved per (atom, channel) pair: 2³² words, far beyond any use.
const CHANNEL_SHIFT: u32 = 32;
const ATOM_SHIFT: u32 = 40;

pub fn stream(seed: u64, ensemble: u64, atom: u64, channel: Channel) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ensemble);
    rng.set_word_pos(((atom as u128) << ATOM_SHIFT) | ((channel as u128) << CHANNEL_SHIFT));
    rng
}

/// Ensemble id for shot `shot` of frame `frame`.
pub fn ensemble_id(frame: u32, shot: u32) -> u64 {
    ((frame as u64) << 32) | shot as u64
}
