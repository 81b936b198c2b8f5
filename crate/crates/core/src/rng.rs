//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(master_seed, trial, index, purpose)`, so
//! a trial's randomness never depends on which worker ran it or on how many
//! draws other trials consumed. The mixer is two rounds of the SplitMix64
//! finalizer over the packed key.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TRIAL_MUL: u64 = 0xD1B5_4A32_D192_ED03;
const INDEX_MUL: u64 = 0xAEF1_7502_108E_F2D9;
const PURPOSE_MUL: u64 = 0x8CB9_2BA7_2F3D_8DD7;

#[inline(always)]
fn fmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What a draw is used for. Separate tags keep, e.g., an edge's arrival time
/// independent of its activity coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Arrival = 1,
    Active = 2,
    Coin = 3,
    Price = 4,
    OnlineArrival = 5,
    Generator = 6,
    Auxiliary = 7,
}

/// Root of a family of independent per-trial streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(master_seed: u64) -> Self {
        Self { seed: master_seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trial(&self, trial: u64) -> TrialRng {
        let k = fmix(self.seed ^ GOLDEN);
        TrialRng {
            key: fmix(k ^ trial.wrapping_add(1).wrapping_mul(TRIAL_MUL)),
        }
    }
}

/// Random access into one trial's stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialRng {
    key: u64,
}

impl TrialRng {
    #[inline]
    pub fn bits(&self, index: u64, purpose: Purpose) -> u64 {
        let h = fmix(self.key ^ (purpose as u64).wrapping_mul(PURPOSE_MUL));
        fmix(h.wrapping_add(index.wrapping_add(1).wrapping_mul(INDEX_MUL)))
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, index: u64, purpose: Purpose) -> f64 {
        (self.bits(index, purpose) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&self, index: u64, purpose: Purpose, p: f64) -> bool {
        self.uniform(index, purpose) < p
    }

    /// Sequential view over one purpose, for code that just wants "the next number".
    pub fn sequence(&self, purpose: Purpose) -> Sequence {
        Sequence {
            rng: *self,
            purpose,
            counter: 0,
        }
    }
}

pub struct Sequence {
    rng: TrialRng,
    purpose: Purpose,
    counter: u64,
}

impl Sequence {
    pub fn next_f64(&mut self) -> f64 {
        let u = self.rng.uniform(self.counter, self.purpose);
        self.counter += 1;
        u
    }

    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
