use serde::{Deserialize, Serialize};

use super::Coord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Header {
    pub vc: u8,
    pub src: Coord,
    pub dst: Coord,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpikeBody {
    /// Row in the receiving core's synapse table.
    pub synapse: u32,
    pub delay: u32,
    /// Timestep in which the source neuron fired.
    pub timestep: u32,
    /// Cancels an earlier spike with the same fields. Only speculative
    /// execution sends these, after a rollback un-fires a neuron.
    pub retract: bool,
}

impl SpikeBody {
    pub fn target_timestep(&self) -> u32 {
        self.timestep + self.delay
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DepFlag {
    Finish = 0,
    Start = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DepBody {
    pub timestep: u32,
    pub flag: DepFlag,
    /// Row in the receiver's pre-table (FINISH) or post-table (START).
    pub dep_id: u16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Body {
    Spike(SpikeBody),
    Dep(DepBody),
    Sync { timestep: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketClass {
    Spike = 0,
    Dep = 1,
    Sync = 2,
}

impl PacketClass {
    pub const ALL: [PacketClass; 3] = [PacketClass::Spike, PacketClass::Dep, PacketClass::Sync];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Packet {
    pub header: Header,
    pub body: Body,
}

impl Packet {
    pub fn class(&self) -> PacketClass {
        match self.body {
            Body::Spike(_) => PacketClass::Spike,
            Body::Dep(_) => PacketClass::Dep,
            Body::Sync { .. } => PacketClass::Sync,
        }
    }

    /// Build a packet with its virtual channel chosen by [`assign_vc`].
    pub fn new(src: Coord, dst: Coord, body: Body, n_vc: u8) -> Self {
        let vc = assign_vc(&body, src, dst, n_vc);
        Packet { header: Header { vc, src, dst }, body }
    }

    fn finish_timestep(&self) -> Option<u32> {
        match self.body {
            Body::Dep(DepBody { flag: DepFlag::Finish, timestep, .. }) => Some(timestep),
            _ => None,
        }
    }

    /// Whether this spike must leave a port before `finish` may.
    pub(crate) fn holds_back(&self, finish: &Packet) -> bool {
        match (self.body, finish.finish_timestep()) {
            (Body::Spike(s), Some(t)) => {
                self.header.src == finish.header.src && self.header.dst == finish.header.dst && s.timestep <= t
            }
            _ => false,
        }
    }

    pub(crate) fn is_finish(&self) -> bool {
        self.finish_timestep().is_some()
    }
}

/// VC 0 carries control traffic. Spikes are spread over the remaining
/// channels by a hash of the flow, so one flow always uses one channel and
/// stays in order. With a single VC everything shares it.
pub fn assign_vc(body: &Body, src: Coord, dst: Coord, n_vc: u8) -> u8 {
    match body {
        Body::Spike(_) if n_vc > 1 => {
            let key = (u64::from(src.x) << 48) ^ (u64::from(src.y) << 32) ^ (u64::from(dst.x) << 16) ^ u64::from(dst.y);
            let h = key.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32;
            1 + (h % u64::from(n_vc - 1)) as u8
        }
        _ => 0,
    }
}
