/// Ring of accumulator slots, one per buffered future timestep.
///
/// The head slot belongs to `head_t`, the next timestep to be consumed.
/// Consuming a timestep reads the head slot and rotates it to the back,
/// zeroed, so during the computation of `t` the ring already covers
/// `t + 1 .. t + n_slot`. With `n_slot = max_delay + m - 1` that is exactly
/// the range a pre-dependency at most `m - 1` timesteps ahead can reach.
#[derive(Clone, Debug)]
pub struct CircularSpikeBuffer {
    slots: Vec<Vec<i64>>,
    head: usize,
    head_t: u32,
    violations: u64,
}

impl CircularSpikeBuffer {
    pub fn new(n_slot: usize, n_local: usize) -> Self {
        assert!(n_slot >= 1, "buffer needs at least one slot");
        CircularSpikeBuffer { slots: vec![vec![0; n_local]; n_slot], head: 0, head_t: 0, violations: 0 }
    }

    pub fn slot_count(max_delay: u32, m: u32) -> usize {
        (max_delay + m).saturating_sub(1).max(1) as usize
    }

    pub fn n_slot(&self) -> usize {
        self.slots.len()
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn head_timestep(&self) -> u32 {
        self.head_t
    }

    /// Writes that fell outside the ring. Nonzero means a spike was lost or
    /// arrived after its timestep was consumed.
    pub fn violations(&self) -> u64 {
        self.violations
    }

    /// Accumulate `weight` (raw Q16.16) for `local` at timestep `target_t`.
    /// Returns false, and counts a violation, when the target is not held.
    pub fn write(&mut self, target_t: u32, local: u32, weight: i64) -> bool {
        let Some(offset) = target_t.checked_sub(self.head_t).map(|o| o as usize) else {
            self.violations += 1;
            return false;
        };
        if offset >= self.slots.len() {
            self.violations += 1;
            return false;
        }
        let slot = (self.head + offset) % self.slots.len();
        self.slots[slot][local as usize] += weight;
        true
    }

    pub fn head_slot(&self) -> &[i64] {
        &self.slots[self.head]
    }

    /// Advance the head one slot, zeroing the vacated one.
    pub fn rotate(&mut self) {
        self.slots[self.head].iter_mut().for_each(|a| *a = 0);
        self.head = (self.head + 1) % self.slots.len();
        self.head_t += 1;
    }

    /// Move the head slot's accumulators into `out` and rotate.
    pub fn consume_into(&mut self, out: &mut Vec<i64>) {
        out.clear();
        out.extend_from_slice(&self.slots[self.head]);
        self.rotate();
    }
}
