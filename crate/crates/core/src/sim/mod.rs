//! Deterministic discrete-event kernel, broadcast channel and mobility.

pub mod channel;
pub mod kernel;
pub mod mobility;
mod time;

pub use channel::{Channel, ChannelConfig, Delivery};
pub use kernel::{EventId, Kernel};
pub use mobility::{MobilityState, MPH_TO_MPS};
pub use time::SimTime;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random stream `stream` derived from the scenario seed.
/// Stream 0 is the channel; node `i` uses stream `i + 1`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
