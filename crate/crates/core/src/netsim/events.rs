use super::action::Protocol;
use serde::{Deserialize, Serialize};

/// Log and connection tallies produced during one step.
///
/// QoS tallies count gray connection attempts only; red traffic shows up in
/// the protocol tallies but never in `qos_good`/`qos_bad`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvents {
    pub jewel_search_logs: u32,
    pub passive_discovery_logs: u32,
    pub active_discovery_logs: u32,
    pub http_failed: u32,
    pub scp_failed: u32,
    pub ssh_failed: u32,
    pub http_success: u32,
    pub scp_internal_success: u32,
    pub ssh_success: u32,
    pub ssh_external_success: u32,
    pub qos_good: u32,
    pub qos_bad: u32,
    /// Connection events emitted by each host id this step.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_host_connections: Vec<u32>,
}

impl StepEvents {
    pub(crate) fn with_hosts(n: usize) -> Self {
        StepEvents {
            per_host_connections: vec![0; n],
            ..Default::default()
        }
    }

    /// Records one connection attempt reported by `src`.
    pub(crate) fn connection(&mut self, src: u32, protocol: Protocol, ok: bool) {
        let slot = match (protocol, ok) {
            (Protocol::Http, true) => &mut self.http_success,
            (Protocol::Http, false) => &mut self.http_failed,
            (Protocol::Scp, true) => &mut self.scp_internal_success,
            (Protocol::Scp, false) => &mut self.scp_failed,
            (Protocol::Ssh, true) => &mut self.ssh_success,
            (Protocol::SshExternal, true) => &mut self.ssh_external_success,
            (Protocol::Ssh | Protocol::SshExternal, false) => &mut self.ssh_failed,
        };
        *slot += 1;
        if let Some(c) = self.per_host_connections.get_mut(src as usize) {
            *c += 1;
        }
    }

    /// QoS summary in `[-1, 1]`: `(good - bad) / (good + bad)`, 0 when idle.
    pub fn qos_summary(&self) -> f64 {
        crate::reward::EpisodeOutcome::qos_from_tallies(self.qos_good as u64, self.qos_bad as u64)
    }

    /// The event features in observation order.
    pub fn feature_counts(&self) -> [u32; 10] {
        [
            self.jewel_search_logs,
            self.passive_discovery_logs,
            self.active_discovery_logs,
            self.http_failed,
            self.scp_failed,
            self.ssh_failed,
            self.http_success,
            self.scp_internal_success,
            self.ssh_success,
            self.ssh_external_success,
        ]
    }
}
