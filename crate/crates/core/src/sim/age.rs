/// AoI of one user at the access point, accumulated lazily.
///
/// `age` is δ at slot `cursor`; slots before `cursor` are already folded
/// into `area`. Between deliveries δ grows by one per slot, so whole runs of
/// slots are summed in closed form.
#[derive(Debug, Clone)]
pub(crate) struct AgeTracker {
    cursor: u64,
    age: u64,
    area: u128,
    slots: u64,
}

impl AgeTracker {
    /// δ(0) = 1.
    pub(crate) fn new() -> Self {
        Self {
            cursor: 0,
            age: 1,
            area: 0,
            slots: 0,
        }
    }

    /// δ at slot `t >= cursor`, assuming no delivery in between.
    pub(crate) fn age_at(&self, t: u64) -> u64 {
        debug_assert!(t >= self.cursor);
        self.age + (t - self.cursor)
    }

    /// Moves the cursor to `t`, adding slots `cursor..t` to the area when
    /// `measured`.
    pub(crate) fn advance_to(&mut self, t: u64, measured: bool) {
        debug_assert!(t >= self.cursor);
        let n = t - self.cursor;
        if measured && n > 0 {
            let n128 = u128::from(n);
            self.area += n128 * u128::from(self.age) + n128 * (n128 - 1) / 2;
            self.slots += n;
        }
        self.age += n;
        self.cursor = t;
    }

    /// Delivery at the end of `reception_slot` of an update generated at the
    /// start of `generated`: δ(t+1) = g(t) + 1. Returns the new age, which is
    /// the service time of the update.
    ///
    /// # Panics
    ///
    /// If the reset does not lower (or keep) the age, i.e. the delivered
    /// update is older than the one already known at the access point.
    pub(crate) fn deliver(&mut self, reception_slot: u64, generated: u64, measured: bool) -> u64 {
        assert!(
            generated <= reception_slot,
            "update received before it was generated"
        );
        self.advance_to(reception_slot + 1, measured);
        let reset = reception_slot + 1 - generated;
        assert!(
            reset >= 1 && reset <= self.age,
            "sample-path law violated: reset to {reset} from {}",
            self.age
        );
        self.age = reset;
        reset
    }

    pub(crate) fn area(&self) -> u128 {
        self.area
    }

    pub(crate) fn measured_slots(&self) -> u64 {
        self.slots
    }
}
