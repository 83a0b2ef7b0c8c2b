use std::cmp::Ordering;
use std::fmt;

/// Largest supported number of spectral variables (`l + 1`).
pub const MAX_VARS: usize = 4;

const FIELD_BITS: u32 = 16;
const FIELD_MASK: u64 = 0xffff;

/// Monomial in the spectral variables, packed into one word.
///
/// Variable 0 occupies the most significant 16 bits, so comparing the packed
/// words compares exponent vectors lexicographically with `ζ_1 > ζ_2 > …`.
/// The total ordering is graded lexicographic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    fn shift_of(i: usize) -> u32 {
        debug_assert!(i < MAX_VARS);
        FIELD_BITS * (MAX_VARS - 1 - i) as u32
    }

    pub fn from_exps(exps: &[u32]) -> Monomial {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables supported");
        let mut packed = 0u64;
        for (i, &e) in exps.iter().enumerate() {
            assert!(e <= FIELD_MASK as u32, "exponent {e} too large");
            packed |= (e as u64) << Self::shift_of(i);
        }
        Monomial(packed)
    }

    pub fn var(i: usize) -> Monomial {
        Monomial(1u64 << Self::shift_of(i))
    }

    pub fn exp(&self, i: usize) -> u32 {
        ((self.0 >> Self::shift_of(i)) & FIELD_MASK) as u32
    }

    pub fn exps(&self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exp(i)).collect()
    }

    pub fn degree(&self) -> u32 {
        (0..MAX_VARS).map(|i| self.exp(i)).sum()
    }

    /// Same monomial with the exponent of variable `i` replaced.
    pub fn with_exp(&self, i: usize, e: u32) -> Monomial {
        let s = Self::shift_of(i);
        Monomial((self.0 & !(FIELD_MASK << s)) | ((e as u64) << s))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        (0..MAX_VARS).all(|i| self.exp(i) <= other.exp(i))
    }

    /// `other / self` when `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if self.divides(other) {
            Some(Monomial(other.0 - self.0))
        } else {
            None
        }
    }

    pub fn packed(&self) -> u64 {
        self.0
    }
}

impl std::ops::Mul for Monomial {
    type Output = Monomial;
    fn mul(self, rhs: Monomial) -> Monomial {
        debug_assert!((0..MAX_VARS).all(|i| self.exp(i) + rhs.exp(i) <= FIELD_MASK as u32));
        Monomial(self.0 + rhs.0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then(self.0.cmp(&other.0))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..MAX_VARS {
            let e = self.exp(i);
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "z{}", i + 1)?;
            } else {
                write!(f, "z{}^{}", i + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}
