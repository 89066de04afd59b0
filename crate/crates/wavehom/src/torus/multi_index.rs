//! Space-time multi-indices.
//!
//! A multi-index records how many times each of `t, x_1, .., x_d` is
//! differentiated. Ordering is lexicographic with the time order first, which
//! fixes the canonical order of every coefficient dump.

use std::fmt;

pub const MAX_DIM: usize = 2;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex {
    pub time: u32,
    pub space: [u32; MAX_DIM],
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex {
        time: 0,
        space: [0; MAX_DIM],
    };

    pub fn new(time: u32, space: &[u32]) -> Self {
        assert!(space.len() <= MAX_DIM, "at most {MAX_DIM} space dimensions");
        let mut s = [0; MAX_DIM];
        s[..space.len()].copy_from_slice(space);
        MultiIndex { time, space: s }
    }

    pub fn space_only(space: &[u32]) -> Self {
        Self::new(0, space)
    }

    pub fn order(&self) -> u32 {
        self.time + self.space_order()
    }

    pub fn space_order(&self) -> u32 {
        self.space.iter().sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut s = self.space;
        for (a, b) in s.iter_mut().zip(other.space.iter()) {
            *a += b;
        }
        MultiIndex {
            time: self.time + other.time,
            space: s,
        }
    }

    /// Adds one space derivative in direction `axis`.
    pub fn bump_space(&self, axis: usize) -> MultiIndex {
        let mut m = *self;
        m.space[axis] += 1;
        m
    }

    pub fn bump_time(&self, by: u32) -> MultiIndex {
        let mut m = *self;
        m.time += by;
        m
    }

    /// `self - other` if every component stays non-negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let time = self.time.checked_sub(other.time)?;
        let mut s = [0; MAX_DIM];
        for i in 0..MAX_DIM {
            s[i] = self.space[i].checked_sub(other.space[i])?;
        }
        Some(MultiIndex { time, space: s })
    }

    /// Removes the time component.
    pub fn without_time(&self) -> MultiIndex {
        MultiIndex {
            time: 0,
            space: self.space,
        }
    }

    /// Every multi-index of total order `k` in dimension `dim`, time included
    /// when `with_time`, in canonical order.
    pub fn all_of_order(k: u32, dim: usize, with_time: bool) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let t_max = if with_time { k } else { 0 };
        for t in 0..=t_max {
            let rest = k - t;
            match dim {
                1 => out.push(MultiIndex::new(t, &[rest])),
                2 => {
                    for a in 0..=rest {
                        out.push(MultiIndex::new(t, &[a, rest - a]));
                    }
                }
                _ => panic!("dimension {dim} is not supported"),
            }
        }
        out.sort();
        out
    }

    /// Multinomial count of ordered words of derivatives giving this index.
    pub fn multinomial(&self) -> f64 {
        let mut num = factorial(self.order());
        num /= factorial(self.time);
        for s in self.space {
            num /= factorial(s);
        }
        num
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};{},{})", self.time, self.space[0], self.space[1])
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.time)?;
        for s in self.space {
            write!(f, ":{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for MultiIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.is_empty() || parts.len() > MAX_DIM + 1 {
            return Err(format!("bad multi-index '{s}'"));
        }
        let nums: Result<Vec<u32>, _> = parts.iter().map(|p| p.trim().parse::<u32>()).collect();
        let nums = nums.map_err(|e| format!("bad multi-index '{s}': {e}"))?;
        Ok(MultiIndex::new(nums[0], &nums[1..]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_time_first() {
        let a = MultiIndex::new(0, &[4]);
        let b = MultiIndex::new(2, &[0]);
        assert!(a < b);
        let all = MultiIndex::all_of_order(2, 2, true);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], MultiIndex::new(0, &[0, 2]));
        assert_eq!(all[5], MultiIndex::new(2, &[0, 0]));
    }

    #[test]
    fn parse_round_trip() {
        let m = MultiIndex::new(2, &[1, 3]);
        let back: MultiIndex = m.to_string().parse().unwrap();
        assert_eq!(m, back);
    }
}
