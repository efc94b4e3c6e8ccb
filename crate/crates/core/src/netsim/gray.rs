use super::action::{HostId, Protocol};
use super::events::StepEvents;
use super::state::SimState;
use rand::Rng as _;

impl SimState {
    /// Benign traffic for one step.
    ///
    /// Each real host outside the honey network makes `floor(volume)` attempts
    /// plus one more with probability `frac(volume)`. An attempt is HTTP with
    /// probability `1 - diversity`, otherwise a uniformly drawn protocol, to a
    /// uniformly drawn other real host. Isolated hosts make no attempts.
    pub(crate) fn gray_tick(&mut self, ev: &mut StepEvents) {
        let n = self.real_hosts;
        if n < 2 {
            return;
        }
        let gray = self.task.gray;
        let whole = gray.volume.floor() as u32;
        let frac = gray.volume - gray.volume.floor();
        for src in 0..n {
            let attempts = whole + u32::from(self.rngs.gray.random_bool(frac));
            for _ in 0..attempts {
                let protocol = if self.rngs.gray.random_bool(gray.diversity) {
                    Protocol::ALL[self.rngs.gray.random_range(0..Protocol::ALL.len())]
                } else {
                    Protocol::Http
                };
                let mut dst: HostId = self.rngs.gray.random_range(0..n - 1);
                if dst >= src {
                    dst += 1;
                }
                // draws happen regardless so the stream does not depend on blue
                let host = self.host(src);
                if host.isolated || host.honey {
                    continue;
                }
                let ok = self.connection_ok(src, dst, protocol);
                ev.connection(src, protocol, ok);
                if ok {
                    ev.qos_good += 1;
                } else {
                    ev.qos_bad += 1;
                }
            }
        }
    }
}
